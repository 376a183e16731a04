"""Supersinglets: totally antisymmetric states of N qudits with d = N."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .spinbasis import PureState, QuditBasis

MAX_SUPERSINGLET_DIM = 2**24


@dataclass(frozen=True)
class SupersingletSpec:
    n_parties: int
    local_dim: int | None = None

    def __post_init__(self):
        d = self.n_parties if self.local_dim is None else self.local_dim
        object.__setattr__(self, "local_dim", d)
        if self.n_parties < 2:
            raise ValueError("a supersinglet needs at least 2 parties")
        if d != self.n_parties:
            raise ValueError(f"supersinglets need d = N (got N={self.n_parties}, d={d})")
        if d**self.n_parties > MAX_SUPERSINGLET_DIM:
            raise ValueError(f"d**N = {d**self.n_parties} exceeds {MAX_SUPERSINGLET_DIM}")


def permutation_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def supersinglet(spec: SupersingletSpec | int) -> PureState:
    """``sum_s eps_{s_1..s_N} |s_1..s_N> / sqrt(N!)`` on ``QuditBasis(N, N)``.

    Local levels are stored 0-based: level ``s`` of ``1..d`` is
    index ``s - 1``.
    """
    if isinstance(spec, int):
        spec = SupersingletSpec(spec)
    n, d = spec.n_parties, spec.local_dim
    basis = QuditBasis(n, d)
    amps = np.zeros(basis.dim)
    norm = 1.0 / math.sqrt(math.factorial(n))
    for perm in itertools.permutations(range(d), n):
        amps[basis.index(perm)] = permutation_sign(perm) * norm
    return PureState(basis, amps)


def antisymmetric_pair(i: int, j: int, d: int) -> np.ndarray:
    """``(|i>|j> - |j>|i>)/sqrt(2)`` as a ``d x d`` amplitude matrix (0-based levels)."""
    m = np.zeros((d, d))
    m[i, j] = 1 / math.sqrt(2)
    m[j, i] = -1 / math.sqrt(2)
    return m

