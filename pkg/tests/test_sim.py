import numpy as np
import pytest

from dptcrane import (
    REFERENCE_POLES,
    EmptyTrajectory,
    IntegratorOptions,
    InvalidParameters,
    Trajectory,
    analytic_linearization,
    compare_variants,
    energy_audit,
    integrate,
    integrate_open_loop,
    place_poles,
    settling_time,
)
from dptcrane.config import FIG3_X0, FIG5_X0
from dptcrane.integrators import dopri45, rk4
from dptcrane.sim import CSV_HEADER, read_trajectory_csv, reduction_percent, trajectory_divergence

SMALL_X0 = np.array([0.05, 0.02, 0.0, -0.001, 0, 0, 0, 0])


def oscillator(t, y):
    return np.array([y[1], -y[0]])


# --- integrators ------------------------------------------------------------

def test_dopri45_harmonic_oscillator():
    t = np.linspace(0, 10, 101)
    res = dopri45(oscillator, t, [1.0, 0.0], rtol=1e-10, atol=1e-12)
    assert res.success and res.y.shape == (101, 2)
    np.testing.assert_allclose(res.y[:, 0], np.cos(t), atol=1e-8)
    np.testing.assert_allclose(res.y[:, 1], -np.sin(t), atol=1e-8)


def test_dopri45_dense_output_between_steps():
    # Large max_step forces several samples per step, exercising interpolation.
    t = np.linspace(0, 3, 301)
    res = dopri45(lambda t, y: -y, t, [1.0], rtol=1e-9, atol=1e-12)
    assert res.n_steps < 100
    np.testing.assert_allclose(res.y[:, 0], np.exp(-t), atol=1e-8)


def test_dopri45_tolerance_controls_error():
    t = np.array([0.0, 20.0])
    errs = [abs(dopri45(oscillator, t, [1.0, 0.0], rtol=tol, atol=tol * 1e-2).y[-1, 0] - np.cos(20)) for tol in (1e-5, 1e-9)]
    assert errs[1] < errs[0] / 100


def test_rk4_fourth_order():
    t = np.array([0.0, 5.0])
    e1 = abs(rk4(oscillator, t, [1.0, 0.0], 0.1).y[-1, 0] - np.cos(5))
    e2 = abs(rk4(oscillator, t, [1.0, 0.0], 0.05).y[-1, 0] - np.cos(5))
    assert e1 / e2 == pytest.approx(16, rel=0.1)


def test_integrators_stop_on_bound():
    t = np.linspace(0, 10, 11)
    res = dopri45(lambda t, y: y, t, [1.0], bound=100.0)
    assert not res.success and "exceeds" in res.message
    assert res.t[-1] < np.log(100) + 1
    res = rk4(lambda t, y: y, t, [1.0], 0.01, bound=100.0)
    assert not res.success


# --- closed-loop simulation -------------------------------------------------

@pytest.fixture(scope="module")
def gains():
    from dptcrane import CraneParams

    p = CraneParams()
    return {v: place_poles(analytic_linearization(p, v), REFERENCE_POLES).K for v in ("underactuated", "fully_actuated")}


def test_closed_loop_converges_from_small_state(params, gains):
    tr = integrate(params, gains["underactuated"], "underactuated", SMALL_X0, IntegratorOptions(t_end=30))
    assert tr.success
    assert np.linalg.norm(tr.final_state) < 1e-6
    assert tr.forces.shape == (len(tr), 4)
    assert np.all(tr.forces[:, 3] == 0)
    assert tr.forces[-1, 1] == pytest.approx(-params.g * params.hanging_mass, rel=1e-6)


def test_sampling_grid(params, gains):
    opts = IntegratorOptions(t_end=1.005, sample_dt=0.01)
    tr = integrate(params, gains["underactuated"], "underactuated", SMALL_X0, opts)
    assert tr.times[0] == 0 and tr.times[-1] == pytest.approx(1.005)
    assert np.allclose(np.diff(tr.times[:-1]), 0.01)


def test_default_horizons(params, gains):
    assert IntegratorOptions().resolved_t_end("underactuated") == 40
    assert IntegratorOptions().resolved_t_end("fully_actuated") == 15


def test_rk4_and_rk45_agree(params, gains):
    a = integrate(params, gains["fully_actuated"], "fully_actuated", SMALL_X0, IntegratorOptions(t_end=5))
    b = integrate(params, gains["fully_actuated"], "fully_actuated", SMALL_X0,
                  IntegratorOptions(method="rk4", fixed_step=2e-3, t_end=5))
    assert trajectory_divergence(a, b) < 1e-6


def test_closed_loop_work_energy_balance(params, gains):
    tr = integrate(params, gains["underactuated"], "underactuated", FIG3_X0, IntegratorOptions(t_end=10))
    assert energy_audit(tr) < 1e-6


def test_unforced_run_conserves_energy(params):
    opts = IntegratorOptions(rel_tol=1e-10, abs_tol=1e-12, t_end=3)
    tr = integrate_open_loop(params, np.zeros(4), [0, 1, 0.3, -0.2, 0, 0, 0, 0], opts)
    assert tr.success
    assert energy_audit(tr) < 1e-7


def test_trapezoid_audit_for_loaded_csv(params, gains, tmp_path):
    tr = integrate(params, gains["underactuated"], "underactuated", FIG3_X0, IntegratorOptions(t_end=10))
    path = tmp_path / "run.csv"
    tr.to_csv(path)
    loaded = read_trajectory_csv(path, params)
    assert loaded.work is None
    assert energy_audit(loaded) < 1e-4


def test_disturbance_hook(params, gains):
    opts = IntegratorOptions(t_end=2)
    push = np.array([0, 0, 0, 0, 0.1, 0, 0, 0])
    a = integrate(params, gains["underactuated"], "underactuated", np.zeros(8), opts)
    b = integrate(params, gains["underactuated"], "underactuated", np.zeros(8), opts, disturbance=lambda t: push)
    assert np.max(np.abs(a.states)) < 1e-12
    assert np.max(np.abs(b.states[:, 0])) > 1e-3
    assert b.meta["disturbed"]


def test_integrate_validates_inputs(params, gains):
    with pytest.raises(InvalidParameters):
        integrate(params, gains["underactuated"], "fully_actuated", SMALL_X0)
    with pytest.raises(InvalidParameters):
        integrate(params, gains["underactuated"], "underactuated", SMALL_X0[:7])
    with pytest.raises(InvalidParameters):
        IntegratorOptions(method="euler")


def test_singular_configuration_halts(params):
    from dptcrane import CraneParams

    p = CraneParams(I_h=0.0)
    tr = integrate_open_loop(p, np.zeros(4), [0, 1e-9, 0, 0, 0, 0, 0, 0], IntegratorOptions(t_end=1))
    assert not tr.success and "SingularConfiguration" in tr.message
    assert len(tr) == 1


def test_divergent_run_stops(params, gains):
    # Positive feedback makes the closed loop unstable.
    tr = integrate(params, -gains["underactuated"], "underactuated", SMALL_X0,
                   IntegratorOptions(t_end=200, divergence_norm=50))
    assert not tr.success and "TrajectoryDiverged" in tr.message
    assert tr.times[-1] < 200


# --- metrics and I/O --------------------------------------------------------

def synthetic(times, norms, params):
    states = np.zeros((len(times), 8))
    states[:, 0] = norms
    return Trajectory(np.asarray(times, float), states, np.zeros((len(times), 4)), params)


def test_settling_time_definition(params):
    tr = synthetic([0, 1, 2, 3, 4], [1.0, 0.5, 0.01, 0.03, 0.01], params)
    assert settling_time(tr) == 4
    assert settling_time(tr, 0.05) == 2
    assert settling_time(synthetic([0, 1], [1.0, 0.5], params)) is None
    assert settling_time(synthetic([0, 1], [0.0, 0.0], params)) == 0
    with pytest.raises(InvalidParameters):
        settling_time(tr, 1.5)
    with pytest.raises(EmptyTrajectory):
        energy_audit(synthetic([0], [1.0], params))


def test_reduction_percent():
    assert reduction_percent(10.0, 4.0) == pytest.approx(60.0)
    assert reduction_percent(10.0, 10.0) == 0.0
    assert reduction_percent(None, 4.0) is None


def test_csv_round_trip(params, gains, tmp_path):
    tr = integrate(params, gains["fully_actuated"], "fully_actuated", SMALL_X0, IntegratorOptions(t_end=1))
    path = tmp_path / "t.csv"
    tr.to_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    back = read_trajectory_csv(path, params)
    np.testing.assert_allclose(back.states, tr.states, rtol=1e-14, atol=1e-300)
    np.testing.assert_allclose(back.forces, tr.forces, rtol=1e-14)
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(InvalidParameters):
        read_trajectory_csv(tmp_path / "bad.csv", params)


def test_runs_are_deterministic(params, gains, tmp_path):
    paths = []
    for i in range(2):
        tr = integrate(params, gains["underactuated"], "underactuated", FIG3_X0, IntegratorOptions(t_end=3))
        paths.append(tmp_path / f"{i}.csv")
        tr.to_csv(paths[-1])
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_compare_variants_with_perturbation(params):
    opts = IntegratorOptions(t_end=12)
    cmp = compare_variants(params, REFERENCE_POLES, FIG3_X0, opts, perturbed_x0=FIG5_X0)
    d = cmp.to_dict()
    assert cmp.settling_full < cmp.settling_under
    assert d["reduction_percent"] == pytest.approx(reduction_percent(cmp.settling_under, cmp.settling_full))
    assert cmp.divergence > 0
    assert d["perturbed_x0"][0] == 0.235
