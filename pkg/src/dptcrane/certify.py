"""Lyapunov certificate of local asymptotic stability for the closed loop.

With ``A_cl = A - B K`` Hurwitz, the closed loop splits as
``G(x, -Kx) = A_cl x + R(x)`` where the remainder ``R`` is quadratically
small. If ``|R(x)| <= sigma |x|`` on the ball ``|x| <= gamma`` and
``lambda_min(Q) > 2 sigma lambda_max(P)`` (``P`` solving the Lyapunov
equation for ``Q``), then ``V = x' P x`` decreases on that ball.

``sigma`` is estimated by sampling, so the radius returned here is
sample-certified rather than proven.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ActuationVariant, CraneParams, closed_loop_field
from .errors import InvalidParameters, NotHurwitz, NoValidRadius, SingularConfiguration
from .linmodel import LinearModel, analytic_linearization

DEFAULT_SAMPLES = 100_000
DEFAULT_SEED = 20180511
GAMMA_BOUNDS = (1e-6, 1e2)


def solve_lyapunov(A_cl, Q) -> np.ndarray:
    """Solve ``P A_cl + A_cl' P = -Q`` by a dense Kronecker-form solve.

    Raises:
        NotHurwitz: if ``A_cl`` has an eigenvalue with real part >= 0.
    """
    A_cl = np.atleast_2d(np.asarray(A_cl, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = A_cl.shape[0]
    if np.max(np.linalg.eigvals(A_cl).real) >= 0:
        raise NotHurwitz("closed-loop matrix is not Hurwitz")
    I = np.eye(n)
    # Row-major vec: vec(P A) = (I kron A') vec(P), vec(A' P) = (A' kron I) vec(P).
    L = np.kron(I, A_cl.T) + np.kron(A_cl.T, I)
    P = np.linalg.solve(L, -Q.reshape(-1)).reshape(n, n)
    P = 0.5 * (P + P.T)
    if np.min(np.linalg.eigvalsh(P)) <= 0:
        raise NotHurwitz("Lyapunov solution is not positive definite")
    return P


def lyapunov_residual(P, A_cl, Q) -> float:
    return float(np.max(np.abs(P @ A_cl + A_cl.T @ P + Q)))


def unit_ball_samples(n_samples: int, dim: int = 8, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Volume-uniform points in the unit ball plus the ``2*dim`` axis probes."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((n_samples, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.random(n_samples) ** (1.0 / dim)
    probes = np.vstack([np.eye(dim), -np.eye(dim)])
    return np.vstack([d * r[:, None], probes])


def remainder_sigma(field, A_cl, gamma: float, n_samples: int = DEFAULT_SAMPLES,
                    seed: int = DEFAULT_SEED, chunk: int = 20_000):
    """Sampled ``max |field(x) - A_cl x| / |x|`` over the ball of radius ``gamma``.

    ``field`` maps a stack ``(N, n)`` of states to derivatives. Chunks
    raising :class:`SingularConfiguration` are re-evaluated row by row and
    offending samples are redrawn. Returns ``(sigma_hat, n_rejected)``.
    """
    if not gamma > 0:
        raise InvalidParameters("gamma must be positive")
    if n_samples < 1:
        raise InvalidParameters("n_samples must be at least 1")
    A_cl = np.asarray(A_cl, dtype=float)
    dim = A_cl.shape[0]
    X = gamma * unit_ball_samples(n_samples, dim, seed)
    rng = np.random.default_rng([seed, 1])
    sigma = 0.0
    rejected = 0
    for start in range(0, X.shape[0], chunk):
        block = X[start:start + chunk]
        try:
            R = field(block) - block @ A_cl.T
        except SingularConfiguration:
            block = block.copy()
            R = np.empty_like(block)
            for i in range(block.shape[0]):
                while True:
                    try:
                        R[i] = field(block[i:i + 1])[0] - A_cl @ block[i]
                        break
                    except SingularConfiguration:
                        rejected += 1
                        d = rng.standard_normal(dim)
                        block[i] = gamma * rng.random() ** (1 / dim) * d / np.linalg.norm(d)
        ratio = np.linalg.norm(R, axis=1) / np.linalg.norm(block, axis=1)
        sigma = max(sigma, float(np.max(ratio)))
    return sigma, rejected


def _crane_field(p: CraneParams, K, variant):
    K = np.asarray(K, dtype=float)
    return lambda X: closed_loop_field(p, K, variant, X)


def _closed_loop_matrix(m: LinearModel, K):
    return m.A - m.B @ np.asarray(K, dtype=float)


def estimate_sigma(p: CraneParams, K, variant, gamma: float, n_samples: int = DEFAULT_SAMPLES,
                   seed: int = DEFAULT_SEED) -> float:
    """Sampled Taylor-remainder bound ``sigma_hat`` of the crane closed loop."""
    variant = ActuationVariant.parse(variant)
    A_cl = _closed_loop_matrix(analytic_linearization(p, variant), K)
    sigma, _ = remainder_sigma(_crane_field(p, K, variant), A_cl, gamma, n_samples, seed)
    return sigma


@dataclass(eq=False)
class RoaCertificate:
    """Lyapunov evidence for a region of attraction ``|x| <= gamma_hat``."""

    K: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    sigma_hat: float
    gamma_hat: float
    margin: float
    n_samples: int
    seed: int
    rejected: int = 0
    note: str = "sample-certified"

    @property
    def valid(self) -> bool:
        return self.margin > 0

    @property
    def lambda_min_Q(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.Q)))

    @property
    def lambda_max_P(self) -> float:
        return float(np.max(np.linalg.eigvalsh(self.P)))

    def to_dict(self) -> dict:
        return {
            "gamma_hat": self.gamma_hat,
            "sigma_hat": self.sigma_hat,
            "margin": self.margin,
            "lambda_min_Q": self.lambda_min_Q,
            "lambda_max_P": self.lambda_max_P,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "rejected_samples": self.rejected,
            "note": self.note,
        }


def roa_from_field(field, A_cl, K, Q=None, n_samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                   bounds=GAMMA_BOUNDS, rel_precision: float = 1e-3) -> RoaCertificate:
    """Log-space bisection for the largest radius passing the decrease test."""
    A_cl = np.asarray(A_cl, dtype=float)
    n = A_cl.shape[0]
    Q = np.eye(n) if Q is None else np.asarray(Q, dtype=float)
    if not np.allclose(Q, Q.T) or np.min(np.linalg.eigvalsh(Q)) <= 0:
        raise InvalidParameters("Q must be symmetric positive definite")
    P = solve_lyapunov(A_cl, Q)
    lam_q = float(np.min(np.linalg.eigvalsh(Q)))
    lam_p = float(np.max(np.linalg.eigvalsh(P)))
    rejected = 0

    def test(gamma):
        nonlocal rejected
        sigma, rej = remainder_sigma(field, A_cl, gamma, n_samples, seed)
        rejected += rej
        return lam_q > 2 * sigma * lam_p, sigma

    lo, hi = bounds
    ok, sigma_lo = test(lo)
    if not ok:
        raise NoValidRadius(f"decrease condition fails already at gamma = {lo:g}")
    ok, sigma_hi = test(hi)
    if ok:
        best, best_sigma = hi, sigma_hi
    else:
        best, best_sigma = lo, sigma_lo
        a, b = np.log(lo), np.log(hi)
        while b - a > np.log1p(rel_precision):
            mid = 0.5 * (a + b)
            ok, sigma = test(np.exp(mid))
            if ok:
                a, best, best_sigma = mid, np.exp(mid), sigma
            else:
                b = mid
    return RoaCertificate(
        K=np.asarray(K, dtype=float), Q=Q, P=P, sigma_hat=best_sigma, gamma_hat=float(best),
        margin=lam_q - 2 * best_sigma * lam_p, n_samples=n_samples, seed=seed, rejected=rejected,
    )


def region_of_attraction(p: CraneParams, m: LinearModel, K, Q=None, n_samples: int = DEFAULT_SAMPLES,
                         seed: int = DEFAULT_SEED) -> RoaCertificate:
    """Sample-certified region of attraction of the crane under ``u = -K x``.

    Raises:
        NotHurwitz: if ``A - B K`` is not Hurwitz.
        NoValidRadius: if the decrease test fails at the smallest radius.
    """
    A_cl = _closed_loop_matrix(m, K)
    return roa_from_field(_crane_field(p, K, m.variant), A_cl, K, Q, n_samples, seed)


def lyapunov_derivative(P, field, x) -> np.ndarray:
    """``2 x' P field(x)`` for a batched vector field."""
    x = np.asarray(x, dtype=float)
    return 2.0 * np.einsum("...i,ij,...j->...", x, np.asarray(P, dtype=float), field(x))


def vdot(P, p: CraneParams, K, variant, x) -> np.ndarray:
    """Derivative of ``V = x' P x`` along the crane closed loop; batched over ``x``."""
    return lyapunov_derivative(P, _crane_field(p, K, ActuationVariant.parse(variant)), x)
