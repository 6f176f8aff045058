class NumericalFailure(RuntimeError):
    """Raised when the integrator cannot advance the state or the state drifts out of the physical set."""

    def __init__(self, message: str, last_time: float):
        super().__init__(f"{message} (last good time {last_time:.6e} s)")
        self.last_time = last_time
