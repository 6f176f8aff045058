import math

import mock
import numpy as np
import pytest

from torsiongate.dynamics import NumericalFailure
from torsiongate.dynamics.experiments import (
    MAX_CUTOFF_STEPS,
    WINDOW_SAMPLES,
    cphase_experiment,
    dephasing_scan,
    gate_sample_times,
    single_qubit_drive,
)
from torsiongate.dynamics.operators import CUTOFF_CONVERGENCE, CutoffError
from torsiongate.dynamics.states import PLUS, TARGET_STATE, projector, trace_distance
from torsiongate.physics import DomainError
from torsiongate.physics.gate_design import PhaseCalibration, cphase_phase, design_gate, normal_mode_spin_state

OMEGA0 = 2 * math.pi * 1e6
G0 = 2 * math.pi * 1e5
DEPHASING = 2 * math.pi * 50


def simulate(design, **kwargs):
    kwargs.setdefault("convergence", None)
    return cphase_experiment(design.omega0, design.g0, design.g1, design.g2, design.m, **kwargs)


@pytest.fixture(scope="module")
def closed_loop_gate():
    return simulate(design_gate(OMEGA0, G0, 4, close_loops=True), n_fock=10, samples=11)


class TestClosedLoopGate:
    def test_reaches_cz(self, closed_loop_gate):
        assert closed_loop_gate.infidelity < 1e-4
        assert trace_distance(closed_loop_gate.spin_states[-1], projector(TARGET_STATE)) < 1e-6

    def test_modes_disentangle_at_the_echo(self, closed_loop_gate):
        assert closed_loop_gate.mode_purity_tm > 1 - 1e-6

    def test_trajectory(self, closed_loop_gate):
        schedule = closed_loop_gate.schedule
        times = [row.time for row in closed_loop_gate.trajectory]
        assert times == sorted(times)
        assert times[0] == 0.0 and times[-1] == schedule.duration
        assert schedule.t_m in times
        first = closed_loop_gate.trajectory[0]
        assert first.fidelity == pytest.approx(0.25)
        assert first.n1 == first.n2 == 0.0

    def test_to_table(self, closed_loop_gate):
        table = closed_loop_gate.to_table()
        assert [column.name for column in table.columns] == ["t_seconds", "fidelity", "purity", "n1", "n2"]
        assert len(table.rows) == len(closed_loop_gate.trajectory)


def test_open_loops_follow_the_closed_form():
    g = 0.05 * OMEGA0
    result = cphase_experiment(OMEGA0, G0, g, g, 4, n_fock=8, samples=5, convergence=None)
    correction = PhaseCalibration.NORMAL_MODE.correction_angle(cphase_phase(OMEGA0, G0, g, g, 4))
    expected = normal_mode_spin_state(OMEGA0, G0, g, g, 4, correction)
    assert trace_distance(result.spin_states[-1], expected) < 1e-6
    assert result.mode_purity_tm < 1 - 1e-4


class TestDephasingScan:
    def test_reference_dephasing(self, closed_loop_gate):
        (dephased,) = dephasing_scan(closed_loop_gate, [DEPHASING])
        x = DEPHASING * closed_loop_gate.schedule.duration / 2
        expected = 1 - ((1 + math.exp(-x)) / 2) ** 2
        assert dephased.infidelity == pytest.approx(expected, rel=1e-3)
        assert dephased.infidelity == pytest.approx(1.2554e-3, rel=1e-3)
        assert dephased.gamma == DEPHASING

    def test_zero_rate_keeps_the_base(self, closed_loop_gate):
        (same,) = dephasing_scan(closed_loop_gate, [0.0])
        assert same.fidelity_max == closed_loop_gate.fidelity_max

    def test_infidelity_grows_with_rate(self, closed_loop_gate):
        infidelities = [result.infidelity for result in dephasing_scan(closed_loop_gate, [1e2, 1e3, 1e4])]
        assert infidelities == sorted(infidelities)

    def test_rejects_negative_rates(self, closed_loop_gate):
        with pytest.raises(DomainError):
            dephasing_scan(closed_loop_gate, [-1.0])

    def test_matches_direct_integration(self):
        design = design_gate(OMEGA0, G0, 4, close_loops=True)
        gamma = 2 * math.pi * 2e3
        (scanned,) = dephasing_scan(simulate(design, n_fock=6, samples=5), [gamma])
        direct = simulate(design, n_fock=6, samples=5, gamma=gamma)
        assert scanned.fidelity_max == pytest.approx(direct.fidelity_max, rel=1e-6)

    def test_longer_gates_dephase_more(self, closed_loop_gate):
        long_gate = simulate(design_gate(OMEGA0, G0, 16, close_loops=True), n_fock=6, samples=5)
        (short,) = dephasing_scan(closed_loop_gate, [DEPHASING])
        (long,) = dephasing_scan(long_gate, [DEPHASING])
        assert long.infidelity > 3 * short.infidelity


def test_reference_operating_point_lies_in_the_acceptance_band(caplog):
    result = simulate(
        design_gate(OMEGA0, G0, 4, close_loops=True),
        kappa=OMEGA0 * 1e-6,
        n_th=0.01,
        gamma=DEPHASING,
        samples=5,
        convergence=CUTOFF_CONVERGENCE,
    )
    assert 1e-3 <= result.infidelity <= 1.5e-2
    assert result.n_fock >= 13
    assert "Infidelity ξ" in caplog.text


def test_counter_rotating_terms_break_the_gate(closed_loop_gate):
    result = simulate(design_gate(OMEGA0, G0, 4, close_loops=True), rwa=False, n_fock=8, samples=5)
    assert result.infidelity > 1e-2
    assert result.infidelity > 100 * closed_loop_gate.infidelity


THERMAL_KAPPA = 2 * math.pi * 1e3


def hot_gate(n_th: float, n_fock: int, **kwargs):
    design = design_gate(OMEGA0, G0, 4, close_loops=True)
    return simulate(design, kappa=THERMAL_KAPPA, n_th=n_th, n_fock=n_fock, samples=5, tolerance=1e-8, **kwargs)


class TestThermalModes:
    @pytest.fixture(scope="class")
    def warm(self):
        return hot_gate(0.2, 10)

    def test_rethermalization_lies_in_the_acceptance_band(self, warm):
        assert 3e-3 <= warm.infidelity <= 3e-2

    def test_hotter_bath_costs_fidelity(self, warm):
        assert hot_gate(0.4, 10).infidelity > warm.infidelity

    def test_two_more_fock_levels_leave_the_infidelity_in_place(self, warm):
        assert abs(hot_gate(0.2, 12).infidelity - warm.infidelity) < CUTOFF_CONVERGENCE

    def test_sampled_states_stay_physical(self, caplog):
        result = hot_gate(0.1, 8, check_positivity=True)
        assert "negative eigenvalue" not in caplog.text
        for spins in result.spin_states:
            assert np.trace(spins).real == pytest.approx(1.0, abs=1e-9)
            np.testing.assert_allclose(spins, spins.conj().T, atol=1e-10)
            assert np.linalg.eigvalsh(spins)[0] >= -1e-8


def cutoff_run(infidelities: dict[int, float]):
    def run(omega0, g0, g1, g2, schedule, n_fock, **kwargs):
        return mock.Mock(infidelity=infidelities[n_fock], n_fock=n_fock)

    return run


class TestCutoffConvergence:
    @mock.patch("torsiongate.dynamics.experiments._gate_run")
    def test_cutoff_grows_until_the_infidelity_settles(self, mock_gate_run, caplog):
        mock_gate_run.side_effect = cutoff_run({8: 5e-3, 10: 3e-3, 12: 2.95e-3})
        result = cphase_experiment(OMEGA0, G0, 1e5, 1e5, 4, n_fock=8)
        assert [c.args[5] for c in mock_gate_run.call_args_list] == [8, 10, 12]
        assert result.n_fock == 12
        assert "moved by 2.00e-03 from n_fock=8 to n_fock=10" in caplog.text

    @mock.patch("torsiongate.dynamics.experiments._gate_run")
    def test_unsettled_infidelity_is_a_numerical_failure(self, mock_gate_run):
        mock_gate_run.side_effect = cutoff_run({n: 1e-2 * (n % 4 + 1) for n in range(8, 20, 2)})
        with pytest.raises(NumericalFailure, match="did not settle"):
            cphase_experiment(OMEGA0, G0, 1e5, 1e5, 4, n_fock=8)
        assert mock_gate_run.call_count == MAX_CUTOFF_STEPS + 1

    @mock.patch("torsiongate.dynamics.experiments._gate_run")
    def test_default_cutoff_makes_room_for_the_displacement(self, mock_gate_run):
        mock_gate_run.side_effect = cutoff_run({n: 1e-3 for n in range(8, 40)})
        design = design_gate(OMEGA0, G0, 4, close_loops=True)
        cphase_experiment(design.omega0, design.g0, design.g1, design.g2, 4, n_th=1.0, convergence=None)
        assert mock_gate_run.call_args.args[5] == 18

    def test_disabled_check_runs_once(self):
        with mock.patch("torsiongate.dynamics.experiments._gate_run") as mock_gate_run:
            cphase_experiment(OMEGA0, G0, 1e5, 1e5, 4, n_fock=8, convergence=None)
        mock_gate_run.assert_called_once()


def test_cutoff_is_checked_before_simulating():
    with pytest.raises(CutoffError):
        cphase_experiment(OMEGA0, G0, 1e5, 1e5, 4, n_th=1.0, n_fock=10)


def test_gate_sample_times():
    schedule = design_gate(OMEGA0, G0, 4).schedule
    times = gate_sample_times(schedule, 11)
    assert np.all(np.diff(times) > 0)
    assert schedule.t_m in times
    assert times[-1] == schedule.duration
    assert np.sum(times >= 0.95 * schedule.duration * (1 - 1e-12)) >= WINDOW_SAMPLES


class TestSingleQubitDrive:
    def test_rabi_oscillation(self):
        omega_rabi = 2 * math.pi * 1e5
        rows = single_qubit_drive(omega_rabi, 0.0, OMEGA0, echo=False, duration=2e-5, n_fock=2, samples=21)
        for row in rows:
            assert row.z == pytest.approx(math.cos(omega_rabi * row.time), abs=1e-6)
            assert row.y == pytest.approx(-math.sin(omega_rabi * row.time), abs=1e-6)
            assert row.x == pytest.approx(0.0, abs=1e-6)

    def test_coherence_revives_after_a_mode_period(self):
        g = 0.1 * OMEGA0
        rows = single_qubit_drive(
            0.0, g, OMEGA0, echo=False, duration=3 * math.pi / OMEGA0, n_fock=12, samples=31, initial_spin=PLUS
        )
        for row in rows:
            expected = math.exp(-4 * (g / OMEGA0) ** 2 * (1 - math.cos(OMEGA0 * row.time)))
            assert row.x == pytest.approx(expected, abs=1e-6)
            assert row.y == pytest.approx(0.0, abs=1e-6)
        assert rows[20].x == pytest.approx(1.0, abs=1e-6)

    def test_echo_refocuses_a_displaced_mode(self):
        rows = single_qubit_drive(
            0.0,
            2 * math.pi * 1e3,
            OMEGA0,
            echo=True,
            duration=1e-5,
            n_fock=12,
            samples=3,
            initial_spin=PLUS,
            mode_alpha=1.0,
        )
        assert rows[-1].x == pytest.approx(1.0, abs=1e-3)

    def test_rejects_non_positive_duration(self):
        with pytest.raises(DomainError):
            single_qubit_drive(1.0, 0.0, OMEGA0, echo=False, duration=0.0)
