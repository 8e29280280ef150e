"""Acceptance suite for the reference crane data set.

Each test carries ``criterion(n)``; the terminal summary prints one PASS/FAIL
line per criterion with the measured numbers.
"""

import numpy as np
import pytest

from dptcrane import (
    REFERENCE_POLES,
    CraneParams,
    IntegratorOptions,
    SingularConfiguration,
    accel,
    analytic_linearization,
    controllability_rank,
    delta,
    energy_audit,
    figure_preset,
    fd_linearization,
    integrate,
    integrate_open_loop,
    reference_gain,
    place_poles,
    region_of_attraction,
    run_scenario,
    settling_time,
    vdot,
)
from dptcrane.certify import unit_ball_samples
from dptcrane.config import FIG8_X0
from dptcrane.synthesis import closed_loop_eigs, sort_eigs

VARIANTS = ("underactuated", "fully_actuated")
TARGET = sort_eigs(REFERENCE_POLES.poles)
HOLD = -9.81 * 10.1


def detail(request, text):
    request.node.user_properties.append(("detail", text))
    print(text)


@pytest.fixture(scope="module")
def p():
    return CraneParams()


@pytest.fixture(scope="module")
def runs():
    """Figure 3, 6 and 8 preset runs, each computed once."""
    return {n: run_scenario(figure_preset(n), certify=False) for n in (3, 6, 8)}


def eig_error(m, K):
    return float(np.max(np.abs(closed_loop_eigs(m, K) - TARGET)))


def terminal_checks(tr, check_fth2):
    F = tr.forces[-1]
    ok = tr.success and np.linalg.norm(tr.final_state) <= 1e-3
    ok &= abs(F[1] / HOLD - 1) <= 0.01
    ok &= abs(F[0]) <= 1e-2 and abs(F[2]) <= 1e-2
    if check_fth2:
        ok &= abs(F[3]) <= 1e-2
    return bool(ok)


def summary(tr):
    F = tr.forces[-1]
    return (f"|x({tr.times[-1]:g})|={np.linalg.norm(tr.final_state):.2e} "
            f"Fz={F[0]:.1e} Fl1={F[1]:.4f} Fth1={F[2]:.1e} Fth2={F[3]:.1e}")


@pytest.mark.criterion(1)
def test_controllability_rank_is_full(request, p):
    ranks = [controllability_rank(analytic_linearization(p, v)) for v in VARIANTS]
    detail(request, f"ranks {ranks}")
    assert ranks == [8, 8]


@pytest.mark.criterion(2)
def test_finite_difference_matches_closed_form(request, p):
    devs = []
    for v in VARIANTS:
        a, fd = analytic_linearization(p, v), fd_linearization(p, v)
        devs.append(max(np.max(np.abs(a.A - fd.A)), np.max(np.abs(a.B - fd.B))))
    A, B = analytic_linearization(p, "underactuated").A, analytic_linearization(p, "underactuated").B
    detail(request, f"max deviation {max(devs):.2e}; A54={A[4, 3]:.3f} A84={A[7, 3]:.3f} B73={B[6, 2]:g}")
    assert max(devs) <= 1e-5
    assert A[4, 3] == pytest.approx(73.759, abs=5e-4)
    assert A[7, 3] == pytest.approx(-37.986, abs=5e-4)
    assert B[6, 2] == pytest.approx(20.0, abs=1e-12)


@pytest.mark.criterion(3)
def test_printed_gains_place_reference_poles(request, p):
    errs = [eig_error(analytic_linearization(p, v), reference_gain(v).K) for v in VARIANTS]
    detail(request, f"max eigenvalue error under {errs[0]:.1e}, full {errs[1]:.1e}")
    assert max(errs) <= 1e-2


@pytest.mark.criterion(4)
def test_own_placement_is_exact(request, p):
    errs = [eig_error(m, place_poles(m, REFERENCE_POLES).K) for m in (analytic_linearization(p, v) for v in VARIANTS)]
    detail(request, f"max eigenvalue error under {errs[0]:.1e}, full {errs[1]:.1e}")
    assert max(errs) <= 1e-8


@pytest.mark.criterion(5)
def test_underactuated_run_settles(request, runs):
    tr = runs[3].trajectory
    detail(request, summary(tr))
    assert tr.times[-1] == pytest.approx(40)
    assert terminal_checks(tr, check_fth2=False)
    assert np.all(tr.forces[:, 3] == 0)


@pytest.mark.criterion(6)
def test_fully_actuated_runs_settle(request, p, runs):
    tr6, tr8 = runs[6].trajectory, runs[8].trajectory
    # Informational: the robust placement gain from the far start.
    K_own = place_poles(analytic_linearization(p, "fully_actuated"), REFERENCE_POLES).K
    own8 = integrate(p, K_own, "fully_actuated", FIG8_X0, IntegratorOptions(t_end=20))
    own8_note = "converges" if own8.success else own8.message.split(":")[0]
    detail(request, f"fig6 (placed K) {summary(tr6)}; fig8 (printed K) {summary(tr8)}; "
                    f"fig8 with placed K: {own8_note}")
    assert terminal_checks(tr6, check_fth2=True)
    assert terminal_checks(tr8, check_fth2=True)


@pytest.mark.criterion(7)
def test_full_actuation_halves_settling_time(request, runs):
    ts_u = settling_time(runs[3].trajectory, 0.02)
    ts_f = settling_time(runs[6].trajectory, 0.02)
    red = 100 * (1 - ts_f / ts_u)
    detail(request, f"settling under {ts_u:.2f}, full {ts_f:.2f}, reduction {red:.1f}%")
    assert ts_f <= 0.5 * ts_u


@pytest.mark.criterion(8)
def test_energy_bookkeeping(request, p, runs):
    opts = IntegratorOptions(rel_tol=1e-10, abs_tol=1e-12, t_end=10)
    free = integrate_open_loop(p, np.zeros(4), [0, 1, 0.3, -0.2, 0, 0, 0, 0], opts)
    forced = {n: energy_audit(r.trajectory) for n, r in runs.items()}
    detail(request, f"unforced {energy_audit(free):.1e}; forced "
                    + ", ".join(f"fig{n} {v:.1e}" for n, v in forced.items()))
    assert free.success and free.times[-1] == pytest.approx(10)
    assert energy_audit(free) <= 1e-6
    assert max(forced.values()) <= 1e-4


@pytest.mark.criterion(9)
def test_delta_identities(request, p):
    closed = 2 * p.I_h * (p.m_h + p.m_p) * (p.I_p * p.sigma_m + p.l_2**2 * p.m_h * p.m_p + p.M * p.l_2**2 * p.m_p)
    d0 = float(delta(p, np.zeros(8)))
    q = CraneParams(I_h=0.0)
    r = [float(delta(q, [0, x2, 0.1, -0.2, 0, 0, 0, 0])) / x2**2 for x2 in (1e-2, 1e-3)]
    variation = abs(r[0] / r[1] - 1)
    detail(request, f"delta(0)={d0:.6f} rel err {abs(d0 / closed - 1):.1e}; delta/x2^2 variation {variation:.2e}")
    assert d0 == pytest.approx(closed, rel=1e-12)
    assert d0 == pytest.approx(53.732, abs=5e-4)
    assert variation < 0.01
    with pytest.raises(SingularConfiguration):
        accel(q, [0, 1e-9, 0, 0, 0, 0, 0, 0], np.zeros(4))


@pytest.mark.criterion(10)
def test_region_of_attraction_certificate(request, p):
    m = analytic_linearization(p, "underactuated")
    K = place_poles(m, REFERENCE_POLES).K
    cert = region_of_attraction(p, m, K, Q=np.eye(8))
    X = cert.gamma_hat * unit_ball_samples(10_000, seed=7)
    worst = float(np.max(vdot(cert.P, p, K, m.variant, X)))
    detail(request, f"gamma_hat={cert.gamma_hat:.3e} margin={cert.margin:.3e} max vdot={worst:.2e}")
    assert cert.gamma_hat > 0 and cert.margin > 0
    assert worst < 0
