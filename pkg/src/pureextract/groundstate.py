"""Spin-ring Hamiltonians and their ground states.

``build_hamiltonian`` assembles

    H = -sum_i [(1 - gamma) sx_i sx_{i+1} + (1 + gamma) sy_i sy_{i+1}] - 2 h sum_i sz_i

on the full ``2**N`` space with periodic bonds (for N = 2 both bonds join the
same pair of sites and are both kept).  At ``gamma = 0`` the flip number is
conserved and ``sector_hamiltonian`` builds the same operator inside a fixed
flip-number sector, which is how the N = 24 two-flip problems are solved.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .numerics import DEGENERACY_TOL, hermitian_eig
from .spinbasis import (
    MAX_FULL_SITES,
    FullBasis,
    PureState,
    RingGeometry,
    TwoFlipBasis,
)

MAX_SECTOR_DIM = 5000


@dataclass(frozen=True)
class XYParams:
    n_sites: int
    gamma: float = 0.0
    h: float = 0.0

    def __post_init__(self):
        RingGeometry(self.n_sites)
        if not (math.isfinite(self.gamma) and math.isfinite(self.h)):
            raise ValueError("gamma and h must be finite")


@dataclass(frozen=True, eq=False)
class GroundStateReport:
    energy: float
    state: PureState
    degeneracy: int
    parity_expectation: float | None
    # every vector of the (canonical) ground eigenspace, ground state first
    manifold: tuple[PureState, ...] = ()


def _bonds(n: int) -> list[tuple[int, int]]:
    return [(i, (i + 1) % n) for i in range(n)]


def build_hamiltonian(params: XYParams) -> np.ndarray:
    """Dense real matrix of the transverse XY ring on the full basis."""
    n = params.n_sites
    if n > MAX_FULL_SITES:
        raise ValueError(f"full-space Hamiltonian limited to N <= {MAX_FULL_SITES}")
    dim = 2**n
    idx = np.arange(dim)
    ham = np.zeros((dim, dim))
    for i, j in _bonds(n):
        bi = (idx >> i) & 1
        bj = (idx >> j) & 1
        flipped = idx ^ ((1 << i) | (1 << j))
        # sx sx + sy sy swaps antiparallel pairs (weight 2); the anisotropic
        # part flips parallel pairs with weight -2 gamma from the sy sy sign
        ham[flipped, idx] += np.where(bi == bj, 2.0 * params.gamma, -2.0)
    n_up = np.array([bin(x).count("1") for x in idx])
    ham[idx, idx] += -2.0 * params.h * (2 * n_up - n)
    return ham


def flip_number_operator(n_sites: int) -> np.ndarray:
    idx = np.arange(2**n_sites)
    return np.diag([bin(x).count("1") for x in idx]).astype(float)


def total_sz(n_sites: int) -> np.ndarray:
    return 2.0 * flip_number_operator(n_sites) - n_sites * np.eye(2**n_sites)


def parity_operator(n_sites: int) -> np.ndarray:
    """Diagonal ``(-1)**(number of up spins)`` on the full basis."""
    n_up = np.diag(flip_number_operator(n_sites))
    return np.diag(np.where(n_up % 2, -1.0, 1.0))


def parity_expectation(state: PureState) -> float:
    if not isinstance(state.basis, FullBasis):
        raise TypeError("parity_expectation expects a FullBasis state")
    n_up = np.array([bin(x).count("1") for x in range(state.basis.dim)])
    weights = np.abs(state.amplitudes) ** 2
    return float(np.sum(np.where(n_up % 2, -weights, weights)))


def ground_state(
    ham: np.ndarray, basis=None, tol: float = DEGENERACY_TOL
) -> GroundStateReport:
    """Lowest eigenpair of ``ham`` with degeneracy count at ``tol`` resolution.

    Degenerate ground spaces get the canonical basis of ``hermitian_eig``;
    the first canonical vector is reported as ``state``.
    """
    values, vectors = hermitian_eig(ham, canonical=True, tol=tol)
    if basis is None:
        n = int(round(math.log2(ham.shape[0])))
        if 2**n != ham.shape[0]:
            raise ValueError("cannot infer a full basis for this dimension")
        basis = FullBasis(n)
    degeneracy = int(np.sum(values <= values[0] + tol))
    manifold = tuple(PureState(basis, vectors[:, k]) for k in range(degeneracy))
    parity = parity_expectation(manifold[0]) if isinstance(basis, FullBasis) else None
    return GroundStateReport(float(values[0]), manifold[0], degeneracy, parity, manifold)


# --------------------------------------------------------------------------
# fixed flip-number sectors (gamma = 0)


@functools.lru_cache(maxsize=32)
def sector_configurations(n_sites: int, n_flips: int) -> tuple[tuple[int, ...], ...]:
    """Lexicographic tuples of 1-based up-spin sites."""
    return tuple(itertools.combinations(range(1, n_sites + 1), n_flips))


def sector_hamiltonian(n_sites: int, n_flips: int, h: float = 0.0) -> np.ndarray:
    """``H_0 - 2 h S^z`` restricted to states with ``n_flips`` up spins."""
    RingGeometry(n_sites)
    if not 0 <= n_flips <= n_sites:
        raise ValueError(f"flip number {n_flips} outside 0..{n_sites}")
    configs = sector_configurations(n_sites, n_flips)
    if len(configs) > MAX_SECTOR_DIM:
        raise ValueError(f"sector dimension {len(configs)} exceeds {MAX_SECTOR_DIM}")
    lookup = {c: i for i, c in enumerate(configs)}
    ham = np.zeros((len(configs), len(configs)))
    for col, config in enumerate(configs):
        occupied = set(config)
        for i in range(1, n_sites + 1):
            j = i % n_sites + 1
            if (i in occupied) != (j in occupied):
                src, dst = (i, j) if i in occupied else (j, i)
                moved = tuple(sorted((occupied - {src}) | {dst}))
                ham[lookup[moved], col] += -2.0
    ham += np.eye(len(configs)) * (-2.0 * h * (2 * n_flips - n_sites))
    return ham


def two_flip_hamiltonian(n_sites: int, h: float = 0.0) -> np.ndarray:
    return sector_hamiltonian(n_sites, 2, h)


@functools.lru_cache(maxsize=64)
def _kinetic_ground(n_sites: int, n_flips: int) -> tuple[float, np.ndarray]:
    values, vectors = hermitian_eig(sector_hamiltonian(n_sites, n_flips), canonical=True)
    vec = vectors[:, 0]
    vec.setflags(write=False)
    return float(values[0]), vec


def sector_ground(n_sites: int, h: float, n_flips: int) -> tuple[float, np.ndarray]:
    """Lowest energy and canonical eigenvector inside one flip-number sector.

    The field only shifts a sector by a constant, so the vector is cached per
    ``(n_sites, n_flips)``.
    """
    energy, vec = _kinetic_ground(n_sites, n_flips)
    return energy - 2.0 * h * (2 * n_flips - n_sites), vec.copy()


def magnon_sector_ground(
    geometry: RingGeometry, h: float, m: int
) -> tuple[float, PureState | np.ndarray]:
    """Ground pair of the ``m``-flip sector, ``m`` in {0, 1, 2}.

    ``m = 2`` returns a ``TwoFlipBasis`` state; ``m = 0, 1`` return the raw
    sector vector (vacuum, or amplitudes indexed by the flipped site).
    """
    if m not in (0, 1, 2):
        raise ValueError("magnon_sector_ground supports m in {0, 1, 2}")
    energy, vec = sector_ground(geometry.n_sites, h, m)
    if m == 2:
        return energy, PureState(TwoFlipBasis(geometry.n_sites), vec)
    return energy, vec


def single_magnon_dispersion(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """Momenta ``2 pi n / N`` and kinetic energies ``-4 cos p`` of one flip."""
    p = 2 * np.pi * np.arange(n_sites) / n_sites
    p = np.where(p > np.pi, p - 2 * np.pi, p)
    order = np.argsort(p, kind="stable")
    return p[order], -4.0 * np.cos(p[order])


def two_flip_field_window(n_sites: int) -> tuple[float, float]:
    """Field interval where the two-flip sector holds the global ground state.

    Sector energies are ``e_m + 2 h (N - 2 m)``; since the kinetic minima
    ``e_m`` are convex in ``m`` only the neighbouring sectors m = 1 and m = 3
    bound the window.  With flips as up spins the window lies at negative h.
    """
    e1, _ = sector_ground(n_sites, 0.0, 1)
    e2, _ = sector_ground(n_sites, 0.0, 2)
    e3, _ = sector_ground(n_sites, 0.0, 3) if n_sites >= 3 else (math.inf, None)
    return (e2 - e1) / 4.0, (e3 - e2) / 4.0


def global_sector_minimum(n_sites: int, h: float, max_flips: int = 3) -> int:
    """Flip number with the lowest energy among sectors ``0..max_flips``."""
    energies = [sector_ground(n_sites, h, m)[0] for m in range(max_flips + 1)]
    return int(np.argmin(energies))


def two_flip_wavefunction(
    geometry: RingGeometry, p1: float, p2: float
) -> PureState:
    """Normalized determinant state with momenta ``p1 != p2``.

    The amplitude on the pair ``x_j < x_k`` is
    ``exp(i p1 x_j) exp(i p2 x_k) - exp(i p2 x_j) exp(i p1 x_k)``.
    """
    for p in (p1, p2):
        if not -np.pi < p < np.pi:
            raise ValueError(f"momentum {p} outside (-pi, pi)")
    if p1 == p2:
        raise ValueError("momenta must be distinct")
    pairs = np.array(TwoFlipBasis(geometry.n_sites).pairs(), dtype=float)
    xj, xk = pairs[:, 0], pairs[:, 1]
    amps = np.exp(1j * (p1 * xj + p2 * xk)) - np.exp(1j * (p2 * xj + p1 * xk))
    norm = np.linalg.norm(amps)
    if norm < 1e-12:
        raise ValueError("momentum pair gives a vanishing wavefunction")
    return PureState(TwoFlipBasis(geometry.n_sites), amps / norm)


def antiperiodic_momenta(n_sites: int) -> tuple[float, float]:
    """Default two-flip ground pair ``(-pi/N, +pi/N)``."""
    return -np.pi / n_sites, np.pi / n_sites
