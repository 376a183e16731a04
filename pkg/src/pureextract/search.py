"""Systematic search for pure-state-extracting local projector pairs.

For a global pure state and two disjoint regions A, B:

1. diagonalize ``rho_AB = sum_j lambda_j |Psi_j><Psi_j|`` (branches),
2. Schmidt-decompose every branch ``Psi_j = sum_i w_i |a_i>|b_i>``,
3. for every pair of index subsets ``I, J`` (each of size >= 2) form
   ``P_A = sum_{i in I} |a_i><a_i|`` and ``P_B = sum_{m in J} |b_m><b_m|``,
4. keep pairs that annihilate every other branch but not ``Psi_j``,
5. score each kept pair by ``lambda_j <Psi_j|P|Psi_j>`` times the entropy of
   the extracted state and return the best.

Pairs that fail step 4 but still map every surviving branch onto one common
direction would also purify ``rho_AB``; those are reported separately as
``case_b`` detections and are not scored.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .extraction import PURITY_TOL, Projector
from .numerics import (
    DEGENERACY_TOL,
    SchmidtDecomposition,
    canonical_basis,
    degenerate_groups,
    entropy_from_probabilities,
    schmidt_matrix,
)
from .spinbasis import LocalSpace, PureState, Region, check_region, split_state

BRANCH_CUTOFF = 1e-10
ANNIHILATION_TOL = 1e-8
# Schmidt components below this weight cannot change any probability above 1e-16
RANK_CUTOFF = 1e-8
MAX_BRANCH_RANK = 12


@dataclass(frozen=True, eq=False)
class BranchDecomposition:
    """Spectral data of ``rho_AB``: weights and branch amplitude matrices."""

    weights: np.ndarray
    branches: np.ndarray  # (n_branch, dim_A, dim_B)
    space_a: LocalSpace | None = None
    space_b: LocalSpace | None = None
    region_a: Region = ()
    region_b: Region = ()

    @property
    def n_branches(self) -> int:
        return len(self.weights)

    def density_matrix(self) -> np.ndarray:
        flat = self.branches.reshape(self.n_branches, -1)
        return (flat.T * self.weights) @ flat.conj()


@dataclass(frozen=True, eq=False)
class CandidateProjectorPair:
    branch: int
    mu: tuple[int, ...]
    nu: tuple[int, ...]
    vectors_a: np.ndarray = field(repr=False)
    vectors_b: np.ndarray = field(repr=False)

    @property
    def key(self) -> tuple:
        return (self.branch, self.mu, self.nu)

    def projectors(self, decomposition: BranchDecomposition) -> tuple[Projector, Projector]:
        return (
            Projector(decomposition.region_a, decomposition.space_a, self.vectors_a),
            Projector(decomposition.region_b, decomposition.space_b, self.vectors_b),
        )


@dataclass(frozen=True, eq=False)
class CandidateScore:
    candidate: CandidateProjectorPair
    probability: float
    entropy: float
    epp: float
    purity: float
    extracted: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class CaseBDetection:
    candidate: CandidateProjectorPair
    branches: tuple[int, ...]
    probability: float
    entropy: float


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_epp: float
    best: CandidateScore | None
    all_pure_candidates: list[CandidateScore]
    case_b_detections: list[CaseBDetection]
    decomposition: BranchDecomposition
    degenerate_branches: bool = False
    degenerate_schmidt: tuple[int, ...] = ()

    @property
    def best_candidate(self) -> CandidateProjectorPair | None:
        return None if self.best is None else self.best.candidate

    @property
    def extracted_state(self) -> np.ndarray | None:
        return None if self.best is None else self.best.extracted

    @property
    def max_probability(self) -> float:
        return max((c.probability for c in self.all_pure_candidates), default=0.0)

    @property
    def max_entropy(self) -> float:
        return max((c.entropy for c in self.all_pure_candidates), default=0.0)


def rho_ab_schmidt(
    state: PureState, region_a: Sequence[int], region_b: Sequence[int]
) -> BranchDecomposition:
    """Branches of ``rho_AB`` sorted by descending weight, weights < 1e-10 dropped.

    Degenerate weights get the canonical eigenspace basis, so branches carry
    sharp values of any conserved quantity diagonal in the local basis.
    """
    n = state.n_sites
    region_a = check_region(region_a, n)
    region_b = check_region(region_b, n)
    tensor, spaces = split_state(state, [region_a, region_b])
    da, db = spaces[0].dim, spaces[1].dim
    m = tensor.reshape(da * db, -1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    weights = s**2
    keep = weights >= BRANCH_CUTOFF
    u, weights = u[:, keep], weights[keep]
    for grp in degenerate_groups(weights, DEGENERACY_TOL):
        u[:, grp] = canonical_basis(u[:, grp])
    branches = u.T.reshape(-1, da, db)
    return BranchDecomposition(weights, branches, spaces[0], spaces[1], region_a, region_b)


def branch_schmidt(branch: np.ndarray) -> SchmidtDecomposition:
    return schmidt_matrix(branch, cutoff=RANK_CUTOFF)


def index_subsets(rank: int) -> list[tuple[int, ...]]:
    """All subsets of ``range(rank)`` with at least two elements, lexicographic."""
    if rank > MAX_BRANCH_RANK:
        raise ValueError(f"branch Schmidt rank {rank} exceeds {MAX_BRANCH_RANK}")
    subsets = [
        c for size in range(2, rank + 1) for c in itertools.combinations(range(rank), size)
    ]
    return sorted(subsets)


def enumerate_candidates(branch: int, decomp: SchmidtDecomposition) -> list[CandidateProjectorPair]:
    subsets = index_subsets(decomp.rank)
    return [
        CandidateProjectorPair(
            branch, mu, nu, decomp.left[:, list(mu)], decomp.right[:, list(nu)]
        )
        for mu in subsets
        for nu in subsets
    ]


def _branch_overlaps(
    decomp: SchmidtDecomposition, branches: np.ndarray
) -> np.ndarray:
    # X[k] = <a_i| Psi_k |b_m>, the branches in this Schmidt basis
    return np.einsum("ai,kab,bm->kim", decomp.left.conj(), branches, decomp.right.conj())


def purity_filter(
    candidate: CandidateProjectorPair, decomposition: BranchDecomposition
) -> bool:
    """Annihilation test: ``P Psi_k = 0`` for all ``k != j`` and ``P Psi_j != 0``."""
    norms = _projected_norms(candidate, decomposition)
    j = candidate.branch
    others = np.delete(norms, j)
    return bool(norms[j] > ANNIHILATION_TOL and np.all(others < ANNIHILATION_TOL))


def _projected_norms(
    candidate: CandidateProjectorPair, decomposition: BranchDecomposition
) -> np.ndarray:
    x = np.einsum(
        "ai,kab,bm->kim",
        candidate.vectors_a.conj(),
        decomposition.branches,
        candidate.vectors_b.conj(),
    )
    return np.linalg.norm(x.reshape(len(x), -1), axis=1)


def _gram_purity(vectors: np.ndarray) -> float:
    # vectors rows are sqrt(weight) * projected branch; rho = sum v v^dagger
    gram = vectors.conj() @ vectors.T
    total = np.trace(gram).real
    return float(np.vdot(gram, gram).real / total**2)


def search_branches(decomposition: BranchDecomposition) -> SearchResult:
    """Run the candidate search on an explicit branch decomposition."""
    keep = decomposition.weights >= BRANCH_CUTOFF
    decomposition = BranchDecomposition(
        decomposition.weights[keep],
        decomposition.branches[keep],
        decomposition.space_a,
        decomposition.space_b,
        decomposition.region_a,
        decomposition.region_b,
    )
    weights = decomposition.weights
    branches = decomposition.branches
    scores: list[CandidateScore] = []
    case_b: list[CaseBDetection] = []
    degenerate_schmidt = []
    for j in range(len(weights)):
        decomp = branch_schmidt(branches[j])
        if decomp.degenerate:
            degenerate_schmidt.append(j)
        if decomp.rank < 2:
            continue
        x = _branch_overlaps(decomp, branches)  # (n_branch, r, r)
        w2 = decomp.coefficients**2
        scale = np.sqrt(weights)[:, None]
        for candidate in enumerate_candidates(j, decomp):
            mu, nu = list(candidate.mu), list(candidate.nu)
            block = x[:, mu][:, :, nu].reshape(len(weights), -1)
            norms = np.linalg.norm(block, axis=1)
            if norms[j] > ANNIHILATION_TOL and np.all(np.delete(norms, j) < ANNIHILATION_TOL):
                scores.append(_score(candidate, decomp, weights[j], w2, scale * block))
                continue
            alive = np.flatnonzero(norms >= ANNIHILATION_TOL)
            if len(alive) >= 2:
                vecs = scale[alive] * block[alive]
                if _gram_purity(vecs) > 1 - PURITY_TOL:
                    case_b.append(_case_b(candidate, alive, vecs))
    best = None
    for score in scores:
        if best is None or _better(score, best):
            best = score
    return SearchResult(
        0.0 if best is None else best.epp,
        best,
        scores,
        case_b,
        decomposition,
        degenerate_branches=any(
            g.stop - g.start > 1 for g in degenerate_groups(weights, DEGENERACY_TOL)
        ),
        degenerate_schmidt=tuple(degenerate_schmidt),
    )


def _score(candidate, decomp, weight, w2, scaled_block) -> CandidateScore:
    common = sorted(set(candidate.mu) & set(candidate.nu))
    inner = float(np.sum(w2[common]))
    prob = float(weight * inner)
    entropy = entropy_from_probabilities(w2[common] / inner)
    purity = _gram_purity(scaled_block)
    if purity <= 1 - PURITY_TOL:
        raise RuntimeError(
            f"candidate {candidate.key} passed the annihilation test "
            f"but has purity {purity!r}"
        )
    extracted = (decomp.left[:, common] * decomp.coefficients[common]) @ decomp.right[
        :, common
    ].T / math.sqrt(inner)
    return CandidateScore(candidate, prob, entropy, prob * entropy, purity, extracted)


def _case_b(candidate, alive, vecs) -> CaseBDetection:
    prob = float(np.sum(np.abs(vecs) ** 2))
    top = vecs[np.argmax(np.linalg.norm(vecs, axis=1))]
    sv = np.linalg.svd(
        top.reshape(len(candidate.mu), len(candidate.nu)), compute_uv=False
    )
    return CaseBDetection(
        candidate,
        tuple(int(k) for k in alive),
        prob,
        entropy_from_probabilities(sv**2 / np.sum(sv**2)),
    )


def _better(a: CandidateScore, b: CandidateScore) -> bool:
    # higher E_PP, then higher probability, then lexicographically smaller key
    if abs(a.epp - b.epp) > 1e-12:
        return a.epp > b.epp
    if abs(a.probability - b.probability) > 1e-12:
        return a.probability > b.probability
    return a.candidate.key < b.candidate.key


def optimize_epp(
    state: PureState, region_a: Sequence[int], region_b: Sequence[int]
) -> SearchResult:
    """Maximal ``E_PP`` over the Schmidt-basis projector family."""
    return search_branches(rho_ab_schmidt(state, region_a, region_b))


def random_projector_probe(
    decomposition: BranchDecomposition,
    n_samples: int,
    rank: int = 2,
    rng: np.random.Generator | None = None,
) -> float:
    """Best ``E_PP`` over random rank-``rank`` local projector pairs that purify ``rho_AB``.

    Random projectors almost never purify a mixed ``rho_AB``; the probe is an
    empirical check that the Schmidt family is not beaten, not an optimizer.
    """
    rng = np.random.default_rng() if rng is None else rng
    da, db = decomposition.branches.shape[1:]
    vecs = np.sqrt(decomposition.weights)[:, None, None] * decomposition.branches
    best = 0.0
    for _ in range(n_samples):
        qa = _random_isometry(rng, da, min(rank, da))
        qb = _random_isometry(rng, db, min(rank, db))
        x = np.einsum("ai,kab,bm->kim", qa.conj(), vecs, qb.conj()).reshape(len(vecs), -1)
        prob = float(np.sum(np.abs(x) ** 2))
        if prob <= 1e-12 or _gram_purity(x) <= 1 - PURITY_TOL:
            continue
        top = x[np.argmax(np.linalg.norm(x, axis=1))]
        sv = np.linalg.svd(top.reshape(qa.shape[1], qb.shape[1]), compute_uv=False)
        best = max(best, prob * entropy_from_probabilities(sv**2 / np.sum(sv**2)))
    return best


def _random_isometry(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    z = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    q, _ = np.linalg.qr(z)
    return q
