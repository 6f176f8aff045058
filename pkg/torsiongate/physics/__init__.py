class DomainError(ValueError):
    """Raised when a physical input lies outside the domain where a formula is defined."""


class DegenerateGeometryError(DomainError):
    """Raised when a particle has no shape anisotropy but an anisotropic quantity is required."""


def require(condition: bool, message: str):
    if not condition:
        raise DomainError(message)
