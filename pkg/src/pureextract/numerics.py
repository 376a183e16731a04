"""Dense linear algebra and special functions shared by the physics modules.

Degenerate eigenspaces are given a reproducible basis by ``canonical_basis``:
computational basis vectors are projected onto the subspace and
Gram-Schmidt orthonormalized, lowest index first.  The result depends only on
the subspace, not on the rotation LAPACK happened to return, and it keeps any
quantum number that is diagonal in the computational basis (magnetization,
parity) sharp whenever the subspace allows it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spinbasis import PureState, Region, bipartite_matrix, split_state

HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-9
NEGATIVE_EIG_TOL = 1e-10
ENTROPY_CUTOFF = 1e-12
SCHMIDT_CUTOFF = 1e-12

BESSEL_MAX_ORDER = 10_000
BESSEL_MAX_ARG = 1_000.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def degenerate_groups(values: Sequence[float], tol: float = DEGENERACY_TOL) -> list[slice]:
    """Split sorted ``values`` into runs whose neighbours differ by <= ``tol``."""
    values = np.asarray(values, dtype=float)
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or abs(values[i] - values[i - 1]) > tol:
            groups.append(slice(start, i))
            start = i
    return groups


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so that its largest-magnitude component is real positive.

    Near-ties (within 1e-10) resolve to the lowest index.
    """
    mags = np.abs(v)
    top = np.max(mags, initial=0.0)
    if top == 0:
        return v
    i = int(np.flatnonzero(mags >= top - 1e-10)[0])
    return v * (abs(v[i]) / v[i])


def canonical_basis(q: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the column span of orthonormal ``q``."""
    n, g = q.shape
    if g <= 1:
        return fix_phase(q[:, 0])[:, None] if g else q
    proj_rows = q.conj()  # row i holds the coordinates of P e_i in the q basis
    chosen: list[np.ndarray] = []
    residual = proj_rows.copy()
    for _ in range(g):
        norms = np.linalg.norm(residual, axis=1)
        i = int(np.flatnonzero(norms >= np.max(norms) * (1 - 1e-8))[0])
        c = residual[i] / norms[i]
        chosen.append(c)
        residual = residual - np.outer(residual @ c.conj(), c)
    coords = np.array(chosen).T
    basis = q @ coords
    # one re-orthonormalization pass for rounding, keeping the chosen order
    basis, r = np.linalg.qr(basis)
    basis = basis * np.sign(np.diag(r).real)
    return np.column_stack([fix_phase(basis[:, k]) for k in range(g)])


def hermitian_eig(
    m: np.ndarray, canonical: bool = False, tol: float = DEGENERACY_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of ``m``.

    With ``canonical=True`` every degenerate eigenspace (eigenvalues within
    ``tol``) gets the basis of ``canonical_basis`` and non-degenerate vectors
    get the phase of ``fix_phase``.
    """
    m = np.asarray(m)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian")
    values, vectors = np.linalg.eigh(m)
    if canonical:
        vectors = vectors.astype(complex)
        for grp in degenerate_groups(values, tol):
            vectors[:, grp] = canonical_basis(vectors[:, grp])
    return values, vectors


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``psi = sum_i coefficients[i] * left[:, i] (x) right[:, i]``."""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray
    degenerate: bool = False

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.coefficients) @ self.right.T

    def entropy(self) -> float:
        return entropy_from_probabilities(self.coefficients**2)


def schmidt_matrix(
    m: np.ndarray, cutoff: float = SCHMIDT_CUTOFF, tol: float = DEGENERACY_TOL
) -> SchmidtDecomposition:
    """Schmidt decomposition of the bipartite amplitude matrix ``m[a, b]``.

    Coefficients at or below ``cutoff`` are dropped.  Within a degenerate
    group of coefficients the left vectors take the canonical basis and the
    right vectors follow, so the decomposition is reproducible.
    """
    m = np.asarray(m, dtype=complex)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > cutoff
    u, s, v = u[:, keep], s[keep], vh[keep].T
    degenerate = False
    for grp in degenerate_groups(s, tol):
        if grp.stop - grp.start > 1:
            degenerate = True
        block = u[:, grp]
        new = canonical_basis(block)
        rot = block.conj().T @ new
        u[:, grp] = new
        v[:, grp] = v[:, grp] @ rot.conj()
    return SchmidtDecomposition(s, u, v, degenerate)


def schmidt(state: PureState, a: Region, b: Region) -> SchmidtDecomposition:
    return schmidt_matrix(bipartite_matrix(state, a, b))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    sites: Region

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if not is_hermitian(m, 1e-10):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace {np.trace(m).real!r} != 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        w = np.linalg.eigvalsh(self.matrix)
        if w[0] < -NEGATIVE_EIG_TOL:
            raise ValueError(f"density matrix has eigenvalue {w[0]!r} < 0")
        return np.clip(w, 0.0, None)

    def purity(self) -> float:
        return float(np.vdot(self.matrix, self.matrix).real)


def reduced_density(state: PureState, keep: Region) -> DensityMatrix:
    """Partial trace of ``|state><state|`` onto the sites in ``keep``."""
    if not keep:
        raise ValueError("keep region is empty")
    tensor, _ = split_state(state, [keep])
    rho = tensor @ tensor.conj().T
    return DensityMatrix(rho, tuple(keep))


def entropy_from_probabilities(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > ENTROPY_CUTOFF]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits; eigenvalues below 1e-12 contribute nothing."""
    return entropy_from_probabilities(rho.eigenvalues())


# --------------------------------------------------------------------------
# Bessel functions of integer order


def _check_bessel_args(order: int, x: float) -> None:
    if abs(order) > BESSEL_MAX_ORDER:
        raise ValueError(f"|order| must be <= {BESSEL_MAX_ORDER}, got {order}")
    if not math.isfinite(x) or abs(x) > BESSEL_MAX_ARG:
        raise ValueError(f"|x| must be <= {BESSEL_MAX_ARG}, got {x}")


def bessel_j_orders(n_max: int, x: float) -> np.ndarray:
    """``J_0(x) .. J_{n_max}(x)`` by Miller's downward recurrence.

    The recurrence starts well above ``max(n_max, |x|)`` and is normalized
    with ``J_0 + 2 * sum_k J_{2k} = 1``.
    """
    _check_bessel_args(n_max, x)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = np.zeros(n_max + 1)
    ax = abs(x)
    if ax / 2 == 0.0:
        out[0] = 1.0
        return out
    if ax < 1e-5:
        # three series terms are exact to double precision here; the
        # recurrence would overflow
        n = np.arange(n_max + 1)
        q = (ax / 2) ** 2
        lead = np.exp(n * math.log(ax / 2) - np.array([math.lgamma(k + 1) for k in n]))
        out[:] = lead * (1 - q / (n + 1) + q * q / (2 * (n + 1) * (n + 2)))
        if x < 0:
            out[1::2] *= -1.0
        return out
    top = max(n_max, int(ax)) + 60 + int(12 * ax ** (1 / 3))
    top += top % 2
    j_next, j_cur = 0.0, 1e-300
    vals = np.zeros(top + 1)
    vals[top] = j_cur
    for k in range(top, 0, -1):
        j_prev = (2.0 * k / ax) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        vals[k - 1] = j_cur
        if abs(j_cur) > 1e250:
            vals[k - 1 :] *= 1e-250
            j_next *= 1e-250
            j_cur *= 1e-250
    norm = vals[0] + 2.0 * np.sum(vals[2::2])
    out[:] = vals[: n_max + 1] / norm
    if x < 0:
        out[1::2] *= -1.0
    return out


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind for integer ``order``."""
    order = int(order)
    _check_bessel_args(order, x)
    n = abs(order)
    value = bessel_j_orders(n, x)[n]
    if order < 0 and n % 2:
        value = -value
    return float(value)


def bessel_j_signed(orders: np.ndarray, x: float) -> np.ndarray:
    """Vectorized ``J_n(x)`` for an integer array of possibly negative orders."""
    orders = np.asarray(orders, dtype=int)
    n = np.abs(orders)
    table = bessel_j_orders(int(n.max(initial=0)), x)
    values = table[n]
    flip = (orders < 0) & (n % 2 == 1)
    values[flip] *= -1.0
    return values
