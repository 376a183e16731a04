"""Local projective extraction of a pure state on two regions.

A projector lives on the local space of its region (see
``spinbasis.LocalSpace``) and is stored as an orthonormal spanning set.
``apply_projection`` forms ``P_A P_B |phi>``, traces out the complement and
reports probability, purity, entropy and ``E_PP = entropy * probability``.
All computations use coordinates in the projectors' ranges, which preserves
every norm and Schmidt spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import entropy_from_probabilities, fix_phase
from .spinbasis import (
    Basis,
    FullBasis,
    LocalSpace,
    PureState,
    Region,
    TwoFlipBasis,
    check_disjoint,
    check_region,
    split_state,
)
from .quench import state_to_table

IMPOSSIBLE_TOL = 1e-12
PURITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Projector:
    region: Region
    space: LocalSpace
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != self.space.dim or v.shape[1] < 1:
            raise ValueError(
                f"projector needs a ({self.space.dim}, rank>=1) spanning matrix, got {v.shape}"
            )
        if len(self.region) != self.space.n_sites:
            raise ValueError("region size does not match the local space")
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(v.shape[1]))) > 1e-10:
            raise ValueError("spanning vectors are not orthonormal")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    def matrix(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T


@dataclass(frozen=True, eq=False)
class ExtractionOutcome:
    probability: float
    is_pure: bool
    purity: float
    entropy: float | None = None
    epp: float = 0.0
    # dominant AB state as a (dim_A, dim_B) amplitude matrix, only when pure
    post_state: np.ndarray | None = field(default=None, repr=False)
    impossible: bool = False


def configuration_projector(
    region: Sequence[int], basis: Basis, keep: Callable[[tuple[int, ...]], bool]
) -> Projector:
    """Projector onto the local configurations of ``region`` selected by ``keep``."""
    region = check_region(region, basis.n_sites)
    space = basis.local_space(len(region))
    selected = [i for i, c in enumerate(space.configurations()) if keep(c)]
    if not selected:
        raise ValueError("no local configuration satisfies the selection")
    vectors = np.zeros((space.dim, len(selected)), dtype=complex)
    vectors[selected, np.arange(len(selected))] = 1.0
    return Projector(region, space, vectors)


def block_flip_projector(
    region: Sequence[int], n_sites: int, basis: Basis | None = None
) -> Projector:
    """"Exactly one flip somewhere in ``region``", rank ``len(region)``."""
    basis = TwoFlipBasis(n_sites) if basis is None else basis
    if basis.n_sites != n_sites:
        raise ValueError("basis size does not match n_sites")
    return configuration_projector(region, basis, lambda c: sum(c) == 1)


def parity_projector(
    region: Sequence[int], parity: str, basis: Basis | None = None
) -> Projector:
    """Projector onto even or odd up-spin count in ``region``."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    region = tuple(region)
    if basis is None:
        basis = FullBasis(max(max(region), 2))
    want = 0 if parity == "even" else 1
    return configuration_projector(region, basis, lambda c: sum(c) % 2 == want)


def identity_projector(region: Sequence[int], basis: Basis) -> Projector:
    return configuration_projector(region, basis, lambda c: True)


def projector_from_vectors(region: Sequence[int], basis: Basis, vectors) -> Projector:
    """Projector spanned by (not necessarily orthonormal) columns of ``vectors``."""
    region = check_region(region, basis.n_sites)
    q, r = np.linalg.qr(np.asarray(vectors, dtype=complex))
    rank = int(np.sum(np.abs(np.diag(r)) > 1e-10))
    return Projector(region, basis.local_space(len(region)), q[:, :rank])


def _check_compatible(state: PureState, proj: Projector) -> None:
    if proj.space != state.basis.local_space(len(proj.region)):
        raise ValueError(
            f"projector on {proj.space} does not act on {type(state.basis).__name__}"
        )


def projected_coordinates(
    state: PureState, p_a: Projector, p_b: Projector
) -> np.ndarray:
    """Unnormalized ``(rank_A, rank_B, dim_complement)`` tensor of ``P_A P_B |phi>``."""
    _check_compatible(state, p_a)
    _check_compatible(state, p_b)
    check_disjoint(p_a.region, p_b.region)
    tensor, _ = split_state(state, [p_a.region, p_b.region])
    return np.einsum(
        "ar,bs,abc->rsc", p_a.vectors.conj(), p_b.vectors.conj(), tensor, optimize=True
    )


def _purity_and_top(m: np.ndarray) -> tuple[float, np.ndarray]:
    # rho_AB = m m^dagger; work with the smaller Gram matrix
    if m.shape[1] <= m.shape[0]:
        gram = m.conj().T @ m
        purity = float(np.vdot(gram, gram).real)
        _, vecs = np.linalg.eigh(gram)
        top = m @ vecs[:, -1]
    else:
        gram = m @ m.conj().T
        purity = float(np.vdot(gram, gram).real)
        _, vecs = np.linalg.eigh(gram)
        top = vecs[:, -1]
    return purity, top / np.linalg.norm(top)


def apply_projection(
    state: PureState, p_a: Projector, p_b: Projector
) -> ExtractionOutcome:
    """Project ``state`` with ``P_A P_B`` and characterize the AB state.

    A branch with probability <= 1e-12 is returned flagged ``impossible``.
    The AB state counts as pure when ``Tr(rho_AB^2) > 1 - 1e-9``.
    """
    coords = projected_coordinates(state, p_a, p_b)
    prob = float(np.vdot(coords, coords).real)
    if prob <= IMPOSSIBLE_TOL:
        return ExtractionOutcome(max(prob, 0.0), False, 0.0, epp=0.0, impossible=True)
    coords = coords / math.sqrt(prob)
    ra, rb = p_a.rank, p_b.rank
    purity, top = _purity_and_top(coords.reshape(ra * rb, -1))
    if purity <= 1 - PURITY_TOL:
        return ExtractionOutcome(prob, False, purity)
    top = top.reshape(ra, rb)
    sv = np.linalg.svd(top, compute_uv=False)
    entropy = entropy_from_probabilities(sv**2)
    local = p_a.vectors @ top @ p_b.vectors.T
    local = fix_phase(local.ravel()).reshape(local.shape)
    return ExtractionOutcome(prob, True, purity, entropy, entropy * prob, local)


def quench_probability(state, region_a: Sequence[int], region_b: Sequence[int]) -> float:
    """Probability of one flip in A and one in B from the pair-amplitude table.

    ``state`` is a ``TwoFlipBasis`` PureState or an antisymmetric N x N table;
    the value is ``2 sum_{j in A, k in B} |A_jk|^2 / sum_{l, m} |A_lm|^2``.
    """
    table = state_to_table(state) if isinstance(state, PureState) else np.asarray(state)
    n = table.shape[0]
    a = np.array(check_region(region_a, n)) - 1
    b = np.array(check_region(region_b, n)) - 1
    check_disjoint(tuple(a), tuple(b))
    weights = np.abs(table) ** 2
    return float(2.0 * weights[np.ix_(a, b)].sum() / weights.sum())
