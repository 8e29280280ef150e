"""Controllability testing and multi-input pole placement.

Placement uses robust eigenstructure assignment: each closed-loop
eigenvector is chosen from the subspace that input feedback can reach for
its eigenvalue, and the vectors are rotated one at a time towards the
orthogonal complement of the others so the eigenvector matrix stays well
conditioned. A Sylvester-equation assignment is kept as a fallback for pole
sets the eigenvector method cannot handle (e.g. repeated poles with
multiplicity above the number of inputs).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dynamics import ActuationVariant
from .errors import InvalidParameters, PlacementFailed, Uncontrollable
from .linmodel import LinearModel

log = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-10
EIG_TOL = 1e-8


def sort_eigs(values) -> np.ndarray:
    """Sort complex numbers by real part, then imaginary part."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((values.imag, values.real))
    return values[order]


@dataclass(frozen=True, eq=False)
class PoleSet:
    """Self-conjugate set of desired closed-loop eigenvalues."""

    poles: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.poles, dtype=complex))
        if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
            raise InvalidParameters("poles must be a non-empty 1-D list of finite numbers")
        tol = 1e-9 * max(1.0, np.max(np.abs(p)))
        if not np.allclose(sort_eigs(p), sort_eigs(p.conj()), rtol=0, atol=tol):
            raise InvalidParameters("pole set is not closed under complex conjugation")
        p = np.where(np.abs(p.imag) <= tol, p.real, p)
        object.__setattr__(self, "poles", sort_eigs(p))

    def __len__(self):
        return self.poles.size

    def __array__(self, dtype=None, copy=None):
        return self.poles if dtype is None else self.poles.astype(dtype)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.poles.imag == 0))

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.poles.real < 0))

    def to_list(self) -> list:
        """JSON-friendly form: reals as floats, complex values as ``[re, im]``."""
        return [float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)] for z in self.poles]

    @classmethod
    def from_list(cls, values) -> "PoleSet":
        out = []
        for v in values:
            if isinstance(v, (list, tuple)):
                re, im = v
                out.append(complex(re, im))
            else:
                out.append(complex(v))
        return cls(np.array(out))


REFERENCE_POLES = PoleSet(-0.5 * np.arange(1, 9))


@dataclass(frozen=True, eq=False)
class GainMatrix:
    """State-feedback gain ``u = -K x`` tagged with its actuation variant."""

    K: np.ndarray
    variant: ActuationVariant
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        variant = ActuationVariant.parse(self.variant)
        if K.ndim != 2 or K.shape[0] != variant.n_inputs:
            raise InvalidParameters(f"gain for {variant.value} must have {variant.n_inputs} rows, got {K.shape}")
        if not np.all(np.isfinite(K)):
            raise InvalidParameters("gain matrix has non-finite entries")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "variant", variant)

    def __array__(self, dtype=None, copy=None):
        return self.K if dtype is None else self.K.astype(dtype)

    @property
    def shape(self):
        return self.K.shape


# Printed 4-decimal gains from the reference simulations, p = -0.5 .. -4.
REFERENCE_GAIN_UNDERACTUATED = np.array([
    [2.0574, 0.1052, 0.1224, 42.3471, 6.7649, 0.0526, 0.0488, -7.7172],
    [64.5917, 214.6134, -93.7833, -985.9842, 173.1363, 236.2118, -36.9947, 180.4709],
    [0.0840, -0.0704, 0.3034, -0.9495, 0.2016, -0.0283, 0.2554, 0.2631],
])
REFERENCE_GAIN_FULLY_ACTUATED = np.array([
    [74.4779, 0.0040, 0.0051, 193.1964, 56.9739, 0.0035, 0.0039, 125.5484],
    [-0.4298, 66.2825, -33.7242, 0.6125, -0.1268, 128.4893, -26.8565, 0.1879],
    [-0.0004, -0.0295, 0.0758, 0.0005, -0.0001, -0.0238, 0.1304, 0.0002],
    [136.6796, 0.0094, 0.0120, 233.3502, 108.1736, 0.0083, 0.0092, 277.5913],
])


def reference_gain(variant) -> GainMatrix:
    variant = ActuationVariant.parse(variant)
    K = REFERENCE_GAIN_UNDERACTUATED if variant is ActuationVariant.UNDERACTUATED else REFERENCE_GAIN_FULLY_ACTUATED
    return GainMatrix(K.copy(), variant, {"source": "reference"})


def _AB(m):
    if isinstance(m, LinearModel):
        return m.A, m.B
    A, B = m
    return np.atleast_2d(np.asarray(A, dtype=float)), np.atleast_2d(np.asarray(B, dtype=float))


def controllability_matrix(m) -> np.ndarray:
    """Kalman matrix ``[B, AB, ..., A^(n-1) B]``."""
    A, B = _AB(m)
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def numerical_rank(Mx, rel_tol: float = DEFAULT_RANK_TOL, block_cols: int | None = None) -> int:
    """Count singular values above ``rel_tol`` times the largest one.

    With ``block_cols`` set, the matrix is treated as consecutive column
    blocks (e.g. ``A^k B``) and each nonzero block is first scaled to unit
    largest-magnitude entry.
    """
    if not 0 < rel_tol < 1:
        raise InvalidParameters("rel_tol must lie in (0, 1)")
    Mx = np.array(Mx, dtype=float, ndmin=2)
    if Mx.size == 0:
        return 0
    if block_cols:
        for start in range(0, Mx.shape[1], block_cols):
            blk = Mx[:, start:start + block_cols]
            peak = np.max(np.abs(blk))
            if peak > 0:
                Mx[:, start:start + block_cols] = blk / peak
    sv = np.linalg.svd(Mx, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def controllability_rank(m, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """Rank of the block-scaled Kalman matrix."""
    _, B = _AB(m)
    return numerical_rank(controllability_matrix(m), rel_tol, block_cols=B.shape[1])


def closed_loop_eigs(m, K) -> np.ndarray:
    """Eigenvalues of ``A - B K``, sorted by real then imaginary part."""
    A, B = _AB(m)
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (B.shape[1], A.shape[0]):
        raise InvalidParameters(f"gain shape {K.shape} does not match B {B.shape}")
    return sort_eigs(np.linalg.eigvals(A - B @ K))


def _pair(poles):
    """Index of each pole's conjugate partner (itself for real poles)."""
    partner = np.arange(poles.size)
    used = np.zeros(poles.size, dtype=bool)
    for i, z in enumerate(poles):
        if used[i] or z.imag == 0:
            continue
        cands = [j for j in range(poles.size) if not used[j] and j != i and np.isclose(poles[j], z.conj())]
        if not cands:
            raise InvalidParameters("unpaired complex pole")
        j = cands[0]
        partner[i], partner[j] = j, i
        used[i] = used[j] = True
    return partner


def _eigenvector_assignment(A, B, poles, max_iter=50, rtol=1e-3):
    n, m = B.shape
    Q, R = np.linalg.qr(B, mode="complete")
    U0, U1, Z = Q[:, :m], Q[:, m:], R[:m, :]

    # Subspace of admissible eigenvectors for each pole.
    subspaces = []
    for lam in poles:
        Mlam = U1.T @ (A - lam * np.eye(n))
        _, sv, Vh = np.linalg.svd(Mlam)
        rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0]))) if sv.size else 0
        subspaces.append(Vh[rank:].conj().T)

    partner = _pair(poles)
    X = np.empty((n, n), dtype=complex)
    for j in range(n):
        S = subspaces[j]
        if S.shape[1] == 0:
            raise PlacementFailed(f"no admissible eigenvector for pole {poles[j]}")
        X[:, j] = S[:, j % S.shape[1]]
    for j in range(n):
        if partner[j] < j:
            X[:, j] = X[:, partner[j]].conj()

    prev = abs(np.linalg.det(X))
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        for j in range(n):
            if partner[j] < j:
                continue
            others = np.delete(X, j, axis=1)
            Qo, _ = np.linalg.qr(others, mode="complete")
            y = Qo[:, -1]
            S = subspaces[j]
            x = S @ (S.conj().T @ y)
            nrm = np.linalg.norm(x)
            if nrm < 1e-14:
                continue
            X[:, j] = x / nrm
            if partner[j] != j:
                X[:, partner[j]] = X[:, j].conj()
        det = abs(np.linalg.det(X))
        if prev > 0 and abs(det - prev) / prev < rtol:
            break
        prev = det
    log.debug("eigenvector assignment stopped after %d sweeps, |det X| = %.3g", sweeps, abs(np.linalg.det(X)))

    if np.linalg.cond(X) > 1e12:
        raise PlacementFailed("eigenvector matrix is singular")
    closed = X @ np.diag(poles) @ np.linalg.inv(X)
    K = np.linalg.solve(Z, U0.T @ (A - closed))
    return K.real, np.linalg.cond(X)


def _sylvester_assignment(A, B, poles, seed=0, attempts=20):
    n, m = B.shape
    # Real block-diagonal target with the requested spectrum.
    F = np.zeros((n, n))
    i = 0
    ps = sort_eigs(poles)
    while i < n:
        z = ps[i]
        if z.imag == 0:
            F[i, i] = z.real
            i += 1
        else:
            F[i:i + 2, i:i + 2] = [[z.real, abs(z.imag)], [-abs(z.imag), z.real]]
            i += 2
    # Couple equal real poles into Jordan-like chains so (F, G) stays observable for small m.
    for k in range(n - 1):
        if ps[k].imag == 0 and ps[k + 1].imag == 0 and np.isclose(ps[k].real, ps[k + 1].real):
            F[k, k + 1] = 1.0
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(attempts):
        G = rng.standard_normal((m, n))
        X = scipy.linalg.solve_sylvester(A, -F, B @ G)
        c = np.linalg.cond(X)
        if best is None or c < best[1]:
            best = (G @ np.linalg.inv(X), c)
        if c < 1e8:
            break
    if best is None or best[1] > 1e12:
        raise PlacementFailed("Sylvester assignment produced a singular transformation")
    return best


def place_poles(m: LinearModel, poles, rel_tol: float = DEFAULT_RANK_TOL) -> GainMatrix:
    """Gain ``K`` such that ``eig(A - B K)`` equals ``poles``.

    Raises:
        Uncontrollable: if the Kalman rank test fails.
        PlacementFailed: if no method reaches the poles to within 1e-8.
    """
    A, B = _AB(m)
    variant = m.variant if isinstance(m, LinearModel) else None
    poles = poles if isinstance(poles, PoleSet) else PoleSet(poles)
    n = A.shape[0]
    if len(poles) != n:
        raise InvalidParameters(f"need {n} poles, got {len(poles)}")
    rank = controllability_rank((A, B), rel_tol)
    if rank < n:
        raise Uncontrollable(f"controllability rank {rank} < {n}")
    if np.linalg.matrix_rank(B) < B.shape[1]:
        raise PlacementFailed("input matrix B is rank deficient")

    target = poles.poles
    attempts = []
    try:
        K, cond = _eigenvector_assignment(A, B, target)
        attempts.append(("eigenvector", K, cond))
    except PlacementFailed as exc:
        log.debug("eigenvector assignment failed: %s", exc)
    if not attempts or _eig_error(A, B, attempts[-1][1], target) > EIG_TOL:
        try:
            K, cond = _sylvester_assignment(A, B, target)
            attempts.append(("sylvester", K, cond))
        except PlacementFailed as exc:
            log.debug("sylvester assignment failed: %s", exc)

    for method, K, cond in attempts:
        err = _eig_error(A, B, K, target)
        if err <= EIG_TOL:
            info = {"method": method, "eigvec_cond": float(cond), "max_eig_error": float(err)}
            if variant is None:
                return K
            return GainMatrix(K, variant, info)
    raise PlacementFailed("closed-loop eigenvalues missed the requested poles")


def _eig_error(A, B, K, target):
    """Pole mismatch of ``A - B K``.

    Repeated poles in a single Jordan chain are only computable to about
    ``eps ** (1 / multiplicity)``, so the characteristic polynomial
    coefficients (relative to their size) are also accepted as evidence.
    """
    Acl = A - B @ K
    got = sort_eigs(np.linalg.eigvals(Acl))
    eig_err = float(np.max(np.abs(got - sort_eigs(target))))
    want = np.real(np.poly(target))
    poly_err = float(np.max(np.abs(np.poly(Acl).real - want)) / np.max(np.abs(want)))
    return min(eig_err, poly_err)
