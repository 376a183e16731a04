"""Two-flip quench on the XX ring.

Two flips start at sites ``r1 < r2`` and evolve under ``H_0``.  Three engines
produce the evolved state:

``"sector"``  exact evolution in the N(N-1)/2 dimensional two-flip sector
              (default);
``"bessel"``  the pair determinant ``A_jk = f_j1 f_k2 - f_k1 f_j2`` built from
              the lattice Bessel sum for the single-flip amplitude ``f``;
``"fermion"`` the same determinant built from the exactly exponentiated
              one-flip hopping matrix.

Two hard-core flips on a ring map to free fermions whose boundary condition
is antiperiodic (even particle number).  The Bessel sum carries this as the
image phase ``exp(2 pi i twist k)`` with ``twist = 1/2``; the matching exact
single-flip propagator is the one-flip hopping matrix whose boundary bond is
multiplied by ``exp(2 pi i twist)``.  ``twist = 0`` gives the plain one-flip
block of ``H_0``.  The Bessel sum also carries the prefactor ``exp(-4 i t)``,
so the two single-flip propagators differ by exactly that global phase.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .groundstate import two_flip_hamiltonian
from .numerics import bessel_j_signed
from .spinbasis import PureState, RingGeometry, TwoFlipBasis

TWO_FLIP_TWIST = 0.5


@dataclass(frozen=True)
class QuenchSetup:
    geometry: RingGeometry
    r1: int
    r2: int
    t: float = 0.0

    def __post_init__(self):
        self.geometry.check_site(self.r1)
        self.geometry.check_site(self.r2)
        if self.r1 == self.r2:
            raise ValueError("the two flips must start on different sites")
        if not math.isfinite(self.t):
            raise ValueError("time must be finite")

    @property
    def ordered_sites(self) -> tuple[int, int]:
        return min(self.r1, self.r2), max(self.r1, self.r2)

    def at(self, t: float) -> "QuenchSetup":
        return QuenchSetup(self.geometry, self.r1, self.r2, t)


def _bessel_truncation(n_sites: int, beta: float) -> int:
    return math.ceil((abs(beta) + 40) / n_sites) + 1


def bessel_propagator(n_sites: int, t: float, twist: float = TWO_FLIP_TWIST) -> np.ndarray:
    """Matrix ``F[s-1, r-1] = f^N_{sr}(t)`` from the lattice Bessel sum.

    ``f = exp(-4it) i**d sum_k J_{d-kN}(4t) i**(-kN) exp(2 pi i twist k)``
    with ``d = s - r`` and ``|k| <= ceil((4t + 40)/N) + 1``.
    """
    RingGeometry(n_sites)
    if t < 0:
        raise ValueError("time must be >= 0")
    beta = 4.0 * t
    kmax = _bessel_truncation(n_sites, beta)
    d = np.arange(-(n_sites - 1), n_sites)
    k = np.arange(-kmax, kmax + 1)
    orders = d[:, None] - k[None, :] * n_sites
    jvals = bessel_j_signed(orders.ravel(), beta).reshape(orders.shape)
    image_phase = (1j) ** (-(k * n_sites % 4)) * np.exp(2j * np.pi * twist * k)
    by_d = np.exp(-4j * t) * (1j) ** (d % 4) * (jvals @ image_phase)
    s = np.arange(n_sites)
    return by_d[(s[:, None] - s[None, :]) + (n_sites - 1)]


def single_flip_amplitude(
    n_sites: int, s: int, r: int, t: float, twist: float = TWO_FLIP_TWIST
) -> complex:
    geometry = RingGeometry(n_sites)
    geometry.check_site(s)
    geometry.check_site(r)
    return complex(bessel_propagator(n_sites, t, twist)[s - 1, r - 1])


def one_flip_hamiltonian(n_sites: int, twist: float = 0.0) -> np.ndarray:
    """Hopping matrix of a single flip; the bond N -> 1 carries ``exp(2 pi i twist)``."""
    ham = np.zeros((n_sites, n_sites), dtype=complex)
    for i in range(n_sites - 1):
        ham[i + 1, i] += -2.0
        ham[i, i + 1] += -2.0
    phase = np.exp(2j * np.pi * twist)
    ham[0, n_sites - 1] += -2.0 * phase
    ham[n_sites - 1, 0] += -2.0 * np.conj(phase)
    return ham


@functools.lru_cache(maxsize=16)
def _eig_cached(kind: str, n_sites: int, twist: float) -> tuple[np.ndarray, np.ndarray]:
    if kind == "one":
        ham = one_flip_hamiltonian(n_sites, twist)
    else:
        ham = two_flip_hamiltonian(n_sites)
    values, vectors = np.linalg.eigh(ham)
    values.setflags(write=False)
    vectors.setflags(write=False)
    return values, vectors


def _evolve_operator(kind: str, n_sites: int, t: float, twist: float = 0.0) -> np.ndarray:
    values, vectors = _eig_cached(kind, n_sites, float(twist))
    return (vectors * np.exp(-1j * values * t)) @ vectors.conj().T


def exact_single_flip_propagator(n_sites: int, t: float, twist: float = 0.0) -> np.ndarray:
    """``exp(-i H_1 t)`` for the one-flip hopping matrix (negative t allowed)."""
    RingGeometry(n_sites)
    return _evolve_operator("one", n_sites, t, twist)


def pair_amplitudes(setup: QuenchSetup, engine: str = "bessel") -> np.ndarray:
    """Antisymmetric ``N x N`` table ``A[s1-1, s2-1]`` of pair amplitudes.

    ``engine`` selects the single-flip propagator: ``"bessel"`` or ``"fermion"``
    (exact, twisted).  The table obeys ``sum_{j<k} |A_jk|^2 = 1``.
    """
    n = setup.geometry.n_sites
    if engine == "bessel":
        f = bessel_propagator(n, setup.t)
    elif engine == "fermion":
        f = exact_single_flip_propagator(n, setup.t, TWO_FLIP_TWIST)
    else:
        raise ValueError(f"unknown pair-amplitude engine {engine!r}")
    r1, r2 = setup.ordered_sites
    m = np.outer(f[:, r1 - 1], f[:, r2 - 1])
    return m - m.T


def two_flip_propagator(n_sites: int, t: float, engine: str = "sector") -> np.ndarray:
    """``exp(-i H_2 t)`` on ``TwoFlipBasis(n_sites)``, columns indexed by initial pairs.

    ``"bessel"`` and ``"fermion"`` assemble it from pair determinants of the
    twisted single-flip propagator; ``"sector"`` exponentiates the sector matrix.
    """
    if engine == "sector":
        return _evolve_operator("two", n_sites, t)
    if engine == "bessel":
        f = bessel_propagator(n_sites, t)
    elif engine == "fermion":
        f = exact_single_flip_propagator(n_sites, t, TWO_FLIP_TWIST)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    pairs = np.array(TwoFlipBasis(n_sites).pairs()) - 1
    j, k = pairs[:, 0][:, None], pairs[:, 1][:, None]
    r1, r2 = pairs[:, 0][None, :], pairs[:, 1][None, :]
    return f[j, r1] * f[k, r2] - f[k, r1] * f[j, r2]


def table_to_state(table: np.ndarray) -> PureState:
    """Collapse an antisymmetric pair table onto ordered pairs ``j < k``."""
    n = table.shape[0]
    pairs = np.array(TwoFlipBasis(n).pairs()) - 1
    return PureState.from_unnormalized(TwoFlipBasis(n), table[pairs[:, 0], pairs[:, 1]])


def state_to_table(state: PureState) -> np.ndarray:
    if not isinstance(state.basis, TwoFlipBasis):
        raise TypeError("expected a TwoFlipBasis state")
    n = state.n_sites
    pairs = np.array(state.basis.pairs()) - 1
    table = np.zeros((n, n), dtype=complex)
    table[pairs[:, 0], pairs[:, 1]] = state.amplitudes
    table[pairs[:, 1], pairs[:, 0]] = -state.amplitudes
    return table


def initial_state(setup: QuenchSetup) -> PureState:
    basis = TwoFlipBasis(setup.geometry.n_sites)
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.pairs().index(setup.ordered_sites)] = 1.0
    return PureState(basis, amps)


def evolved_state(setup: QuenchSetup, engine: str = "sector") -> PureState:
    """Two-flip state at time ``setup.t``; amplitude ``A_jk(t)`` on ``j < k``."""
    if engine == "sector":
        if setup.t == 0:
            return initial_state(setup)
        n = setup.geometry.n_sites
        psi0 = initial_state(setup).amplitudes
        values, vectors = _eig_cached("two", n, 0.0)
        amps = vectors @ (np.exp(-1j * values * setup.t) * (vectors.conj().T @ psi0))
        return PureState.from_unnormalized(TwoFlipBasis(n), amps)
    return table_to_state(pair_amplitudes(setup, engine))


def time_grid(t_max: float = 6.0, dt: float = 0.05) -> np.ndarray:
    if dt <= 0 or t_max < 0:
        raise ValueError("need dt > 0 and t_max >= 0")
    steps = int(math.floor(t_max / dt + 1e-9))
    return np.round(np.arange(steps + 1) * dt, 12)
