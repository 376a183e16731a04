"""Basis conventions and state containers for spin rings and qudit chains.

Conventions
-----------
* Sites are numbered ``1..N`` in every public function; arrays use ``0..N-1``.
* ``FullBasis(N)``: index ``sum_i b_i 2**(i-1)`` where ``b_i = 1`` means spin up
  (a "flip") on site ``i``.  The all-down state is the vacuum, index 0.
* ``TwoFlipBasis(N)``: configurations with exactly two up spins, stored once as
  ordered pairs ``j < k`` in lexicographic order.
* ``QuditBasis(N, d)``: big-endian digits, site 1 is the most significant.

Any of these bases can be viewed as a tensor over a list of disjoint regions
plus their complement (``split_state``).  The local space of a region is a
``LocalSpace``: either the full product space (``d**n`` levels, big-endian over
the region's sites in the order given) or, for the two-flip sector, the space
truncated to at most two flips.
"""

from __future__ import annotations

import functools
import itertools
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

MAX_FULL_SITES = 14
NORM_TOL = 1e-10

Region = tuple[int, ...]


class StateFormatError(ValueError):
    """Raised for malformed state-vector text files."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class RingGeometry:
    n_sites: int

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"ring needs at least 2 sites, got {self.n_sites}")

    def neighbor(self, site: int) -> int:
        """Right neighbour of ``site`` with periodic wraparound."""
        self.check_site(site)
        return site % self.n_sites + 1

    def check_site(self, site: int) -> None:
        if not 1 <= site <= self.n_sites:
            raise ValueError(f"site {site} outside 1..{self.n_sites}")


@dataclass(frozen=True)
class LocalSpace:
    """Local Hilbert space of ``n_sites`` sites of a region.

    ``kind`` is ``"product"`` (all ``local_dim**n_sites`` configurations) or
    ``"flip2"`` (spin-1/2 configurations with at most two up spins).
    """

    kind: str
    n_sites: int
    local_dim: int = 2

    @property
    def dim(self) -> int:
        if self.kind == "product":
            return self.local_dim**self.n_sites
        n = self.n_sites
        return 1 + n + n * (n - 1) // 2

    def configurations(self) -> list[tuple[int, ...]]:
        return list(_local_configurations(self))

    def index(self, config: Sequence[int]) -> int:
        if len(config) != self.n_sites:
            raise ValueError("configuration length does not match region size")
        if self.kind == "product":
            idx = 0
            for level in config:
                if not 0 <= level < self.local_dim:
                    raise ValueError(f"level {level} outside 0..{self.local_dim - 1}")
                idx = idx * self.local_dim + int(level)
            return idx
        ups = [p for p, b in enumerate(config) if b]
        if any(b not in (0, 1) for b in config) or len(ups) > 2:
            raise ValueError(f"{tuple(config)} is not a configuration with <= 2 flips")
        return _flip2_index(self.n_sites, ups)


@functools.lru_cache(maxsize=None)
def _local_configurations(space: LocalSpace) -> tuple[tuple[int, ...], ...]:
    n = space.n_sites
    if space.kind == "product":
        return tuple(itertools.product(range(space.local_dim), repeat=n))
    configs = [(0,) * n]
    for p in range(n):
        configs.append(tuple(int(q == p) for q in range(n)))
    for p, q in itertools.combinations(range(n), 2):
        configs.append(tuple(int(s in (p, q)) for s in range(n)))
    return tuple(configs)


def _pair_rank(n: int, p: int, q: int) -> int:
    # lexicographic rank of 0-based p < q among n-choose-2 pairs
    return p * (2 * n - p - 1) // 2 + (q - p - 1)


def _flip2_index(n: int, ups: Sequence[int]) -> int:
    if len(ups) == 0:
        return 0
    if len(ups) == 1:
        return 1 + ups[0]
    return 1 + n + _pair_rank(n, ups[0], ups[1])


@dataclass(frozen=True)
class FullBasis:
    n_sites: int

    def __post_init__(self):
        RingGeometry(self.n_sites)

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    @property
    def local_dim(self) -> int:
        return 2

    def local_space(self, n_region_sites: int) -> LocalSpace:
        return LocalSpace("product", n_region_sites, 2)

    def configuration(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside 0..{self.dim - 1}")
        return tuple((index >> i) & 1 for i in range(self.n_sites))

    def index(self, config: Sequence[int]) -> int:
        if len(config) != self.n_sites or any(b not in (0, 1) for b in config):
            raise ValueError(f"invalid spin configuration {tuple(config)}")
        return sum(int(b) << i for i, b in enumerate(config))

    def header(self) -> str:
        return f"basis full {self.n_sites}"


@dataclass(frozen=True)
class TwoFlipBasis:
    n_sites: int

    def __post_init__(self):
        RingGeometry(self.n_sites)

    @property
    def dim(self) -> int:
        return self.n_sites * (self.n_sites - 1) // 2

    @property
    def local_dim(self) -> int:
        return 2

    def local_space(self, n_region_sites: int) -> LocalSpace:
        return LocalSpace("flip2", n_region_sites, 2)

    def pairs(self) -> tuple[tuple[int, int], ...]:
        """All 1-based pairs ``(j, k)``, ``j < k``, in index order."""
        return _two_flip_pairs(self.n_sites)

    def configuration(self, index: int) -> tuple[int, ...]:
        j, k = two_flip_pair(RingGeometry(self.n_sites), index)
        return tuple(int(s in (j, k)) for s in range(1, self.n_sites + 1))

    def index(self, config: Sequence[int]) -> int:
        ups = [s + 1 for s, b in enumerate(config) if b]
        if len(config) != self.n_sites or len(ups) != 2:
            raise ValueError(f"{tuple(config)} is not a two-flip configuration")
        return two_flip_index(RingGeometry(self.n_sites), ups[0], ups[1])

    def header(self) -> str:
        return f"basis twoflip {self.n_sites}"


@dataclass(frozen=True)
class QuditBasis:
    n_sites: int
    local_dim: int

    def __post_init__(self):
        if self.n_sites < 1 or self.local_dim < 2:
            raise ValueError("qudit chain needs n_sites >= 1 and local_dim >= 2")

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_sites

    def local_space(self, n_region_sites: int) -> LocalSpace:
        return LocalSpace("product", n_region_sites, self.local_dim)

    def configuration(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside 0..{self.dim - 1}")
        digits = []
        for _ in range(self.n_sites):
            index, r = divmod(index, self.local_dim)
            digits.append(r)
        return tuple(reversed(digits))

    def index(self, config: Sequence[int]) -> int:
        if len(config) != self.n_sites:
            raise ValueError("configuration length does not match chain length")
        return LocalSpace("product", self.n_sites, self.local_dim).index(config)

    def header(self) -> str:
        return f"basis qudit {self.n_sites} {self.local_dim}"


Basis = Union[FullBasis, TwoFlipBasis, QuditBasis]


@functools.lru_cache(maxsize=None)
def _two_flip_pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(itertools.combinations(range(1, n + 1), 2))


def two_flip_index(geometry: RingGeometry, j: int, k: int) -> int:
    """Lexicographic rank of the 1-based flip pair ``(j, k)`` with ``j < k``."""
    geometry.check_site(j)
    geometry.check_site(k)
    if j >= k:
        raise ValueError(f"two-flip pair needs j < k, got ({j}, {k})")
    return _pair_rank(geometry.n_sites, j - 1, k - 1)


def two_flip_pair(geometry: RingGeometry, index: int) -> tuple[int, int]:
    n = geometry.n_sites
    if not 0 <= index < n * (n - 1) // 2:
        raise ValueError(f"two-flip index {index} out of range")
    return _two_flip_pairs(n)[index]


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over ``basis``.  The array is read-only."""

    basis: Basis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.shape != (self.basis.dim,):
            raise ValueError(
                f"{amps.size} amplitudes for a basis of dimension {self.basis.dim}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (squared norm {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, basis: Basis, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis, amps / norm)

    @property
    def n_sites(self) -> int:
        return self.basis.n_sites

    def overlap(self, other: "PureState") -> complex:
        if other.basis != self.basis:
            raise ValueError("states live in different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def check_region(sites: Iterable[int], n_sites: int) -> Region:
    region = tuple(int(s) for s in sites)
    if not region:
        raise ValueError("region is empty")
    if len(set(region)) != len(region):
        raise ValueError(f"region {region} repeats a site")
    for s in region:
        if not 1 <= s <= n_sites:
            raise ValueError(f"site {s} outside 1..{n_sites}")
    return region


def check_disjoint(*regions: Region) -> None:
    seen: set[int] = set()
    for region in regions:
        overlap = seen.intersection(region)
        if overlap:
            raise ValueError(f"regions overlap on sites {sorted(overlap)}")
        seen.update(region)


def complement(n_sites: int, *regions: Region) -> Region:
    used = set(itertools.chain.from_iterable(regions))
    return tuple(s for s in range(1, n_sites + 1) if s not in used)


def contiguous_block(n_sites: int, center: int, size: int) -> Region:
    """``size`` consecutive ring sites around ``center``.

    Even blocks extend one site further to the right of the centre.
    """
    if not 1 <= size <= n_sites:
        raise ValueError(f"block size {size} outside 1..{n_sites}")
    start = center - (size + 1) // 2 + 1
    return tuple((start - 1 + i) % n_sites + 1 for i in range(size))


def parse_region(text: str, n_sites: int) -> Region:
    """Parse ``"1,2,5"`` or ``"3-6"`` style site lists (ranges may wrap)."""
    sites: list[int] = []
    for part in re.split(r"[,\s]+", text.strip()):
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-", 1))
            span = (hi - lo) % n_sites + 1
            sites.extend((lo - 1 + i) % n_sites + 1 for i in range(span))
        else:
            sites.append(int(part))
    return check_region(sites, n_sites)


# --------------------------------------------------------------------------
# Tensor views over regions


def _site_axis(basis: Basis, site: int) -> int:
    if isinstance(basis, FullBasis):
        return basis.n_sites - site
    return site - 1


@functools.lru_cache(maxsize=256)
def _flip2_layout(n_sites: int, parts: tuple[Region, ...]) -> tuple[np.ndarray, ...]:
    owner = {}
    for part_idx, part in enumerate(parts):
        for pos, s in enumerate(part):
            owner[s] = (part_idx, pos)
    idx = np.zeros((len(parts), n_sites * (n_sites - 1) // 2), dtype=np.intp)
    for c, (j, k) in enumerate(_two_flip_pairs(n_sites)):
        ups: list[list[int]] = [[] for _ in parts]
        for s in (j, k):
            part_idx, pos = owner[s]
            ups[part_idx].append(pos)
        for part_idx, part in enumerate(parts):
            idx[part_idx, c] = _flip2_index(len(part), sorted(ups[part_idx]))
    for row in idx:
        row.setflags(write=False)
    return tuple(idx)


def split_state(
    state: PureState, regions: Sequence[Region]
) -> tuple[np.ndarray, list[LocalSpace]]:
    """View ``state`` as a tensor with one axis per region plus the complement.

    Regions must be disjoint; the last axis is the (possibly empty) complement,
    with sites in ascending order.  Returns the tensor and the local spaces.
    """
    n = state.n_sites
    regions = tuple(check_region(r, n) for r in regions)
    check_disjoint(*regions)
    parts = regions + (complement(n, *regions),)
    basis = state.basis
    spaces = [basis.local_space(len(p)) for p in parts]
    shape = tuple(sp.dim for sp in spaces)
    if isinstance(basis, TwoFlipBasis):
        layout = _flip2_layout(n, parts)
        tensor = np.zeros(shape, dtype=complex)
        tensor[layout] = state.amplitudes
        return tensor, spaces
    d = basis.local_dim
    order = [_site_axis(basis, s) for p in parts for s in p]
    tensor = state.amplitudes.reshape((d,) * n).transpose(order).reshape(shape)
    return tensor, spaces


def bipartite_matrix(state: PureState, a: Region, b: Region) -> np.ndarray:
    """Amplitude matrix ``M[a, b]`` for a bipartition covering all sites."""
    tensor, spaces = split_state(state, [a, b])
    if spaces[-1].n_sites:
        raise ValueError("regions must cover every site for a bipartite split")
    return tensor[..., 0]


def embed_two_flip(state: PureState) -> PureState:
    """Map a two-flip-sector state isometrically into the full ``2**N`` basis."""
    if not isinstance(state.basis, TwoFlipBasis):
        raise TypeError("embed_two_flip expects a TwoFlipBasis state")
    n = state.n_sites
    if n > MAX_FULL_SITES:
        raise ValueError(f"full embedding limited to N <= {MAX_FULL_SITES}, got {n}")
    full = np.zeros(2**n, dtype=complex)
    pairs = np.array(state.basis.pairs()) - 1
    full[(1 << pairs[:, 0]) | (1 << pairs[:, 1])] = state.amplitudes
    return PureState(FullBasis(n), full)


# --------------------------------------------------------------------------
# State-vector text format


def format_state(state: PureState, cutoff: float = 0.0) -> str:
    lines = [state.basis.header()]
    for idx in np.flatnonzero(np.abs(state.amplitudes) > cutoff):
        amp = state.amplitudes[idx]
        lines.append(f"{idx} {float(amp.real)!r} {float(amp.imag)!r}")
    return "\n".join(lines) + "\n"


def write_state(state: PureState, path: str | Path) -> None:
    Path(path).write_text(format_state(state))


def parse_state(text: str) -> PureState:
    """Parse the state-vector text format.

    The first non-comment line is ``basis full N``, ``basis twoflip N`` or
    ``basis qudit N d``; every further line is ``<index> <real> <imag>``.
    Vectors within 1e-6 of unit norm are renormalized.
    """
    basis = None
    amps = None
    seen: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if basis is None:
            basis = _parse_header(fields, lineno)
            amps = np.zeros(basis.dim, dtype=complex)
            continue
        if len(fields) != 3:
            raise StateFormatError("expected '<index> <real> <imag>'", lineno)
        try:
            idx = int(fields[0])
            re_part, im_part = float(fields[1]), float(fields[2])
        except ValueError as exc:
            raise StateFormatError(str(exc), lineno) from None
        if not 0 <= idx < basis.dim:
            raise StateFormatError(f"index {idx} outside 0..{basis.dim - 1}", lineno)
        if idx in seen:
            raise StateFormatError(f"index {idx} listed twice", lineno)
        if not (math.isfinite(re_part) and math.isfinite(im_part)):
            raise StateFormatError("non-finite amplitude", lineno)
        seen.add(idx)
        amps[idx] = complex(re_part, im_part)
    if basis is None:
        raise StateFormatError("missing 'basis' header")
    norm2 = float(np.vdot(amps, amps).real)
    if abs(norm2 - 1.0) > 1e-6:
        raise StateFormatError(f"state is not normalized (squared norm {norm2:.12g})")
    if abs(norm2 - 1.0) > 1e-12:
        amps = amps / math.sqrt(norm2)
    return PureState(basis, amps)


def _parse_header(fields: list[str], lineno: int) -> Basis:
    if not fields or fields[0] != "basis" or len(fields) < 3:
        raise StateFormatError("header must read 'basis <full|twoflip|qudit> N [d]'", lineno)
    try:
        numbers = [int(x) for x in fields[2:]]
    except ValueError:
        raise StateFormatError("basis sizes must be integers", lineno) from None
    kind = fields[1]
    try:
        if kind == "full" and len(numbers) == 1:
            if numbers[0] > MAX_FULL_SITES:
                raise ValueError(f"full basis limited to N <= {MAX_FULL_SITES}")
            return FullBasis(numbers[0])
        if kind == "twoflip" and len(numbers) == 1:
            return TwoFlipBasis(numbers[0])
        if kind == "qudit" and len(numbers) == 2:
            return QuditBasis(numbers[0], numbers[1])
    except ValueError as exc:
        raise StateFormatError(str(exc), lineno) from None
    raise StateFormatError(f"unknown basis declaration {' '.join(fields)!r}", lineno)


def read_state(path: str | Path) -> PureState:
    return parse_state(Path(path).read_text())
