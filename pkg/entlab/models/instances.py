"""Problem instances: matchings, BHM instances, hard distributions, Forrelation inputs.

Labels are ints: +1, -1, or STAR (0) for inputs outside the promise.
Vertices and edge indices are 0-based.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from entlab.core.exceptions import DimensionMismatchError, InvalidStateError

STAR = 0

Edge = Tuple[int, int]


def as_signs(values: Sequence[int], name: str = "vector") -> Tuple[int, ...]:
    """Validate a ±1 vector and return it as a tuple of ints."""
    signs = tuple(int(v) for v in values)
    if any(v not in (1, -1) for v in signs):
        raise InvalidStateError(f"{name} must have entries in {{-1, 1}}")
    return signs


@dataclass(frozen=True)
class Matching:
    """m vertex-disjoint edges (i, j), i < j, on n vertices."""
    n: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        seen = set()
        for i, j in edges:
            if not 0 <= i < j < self.n:
                raise InvalidStateError(f"Edge ({i}, {j}) must satisfy 0 <= i < j < {self.n}")
            if i in seen or j in seen:
                raise InvalidStateError(f"Edge ({i}, {j}) shares a vertex with another edge")
            seen.update((i, j))
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> frozenset:
        return frozenset(v for edge in self.edges for v in edge)

    def edge_index(self) -> Dict[Edge, int]:
        return {edge: k for k, edge in enumerate(self.edges)}

    def vertex_mask(self) -> int:
        return sum(1 << v for v in self.vertices)


@dataclass(frozen=True)
class BhmInstance:
    """Alice's x, Bob's matching and y."""
    x: Tuple[int, ...]
    matching: Matching
    y: Tuple[int, ...]

    def __post_init__(self):
        x = as_signs(self.x, "x")
        y = as_signs(self.y, "y")
        if len(x) != self.matching.n:
            raise DimensionMismatchError(f"x has length {len(x)}, matching has n={self.matching.n}")
        if len(y) != self.matching.m:
            raise DimensionMismatchError(f"y has length {len(y)}, matching has m={self.matching.m}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.matching.n

    @property
    def label(self) -> int:
        """+1 when y = Mx, -1 when y = -Mx, STAR otherwise."""
        mx = tuple(self.x[i] * self.x[j] for i, j in self.matching.edges)
        if self.y == mx:
            return 1
        if self.y == tuple(-v for v in mx):
            return -1
        return STAR


class DistributionKind(str, Enum):
    NO = "N"
    YES = "Y"
    MU_PLUS = "mu+1"
    MU_MINUS = "mu-1"


@dataclass(frozen=True)
class HardDistributionSpec:
    """
    One of the hard BHM input distributions.

    N draws y = Mx, Y draws y = -Mx; mu(b, k) draws k copies, copy i from Y
    when i is in a uniform K of [k] with (-1)^|K| = b and from N otherwise.
    """
    kind: DistributionKind
    n: int
    m: int
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", DistributionKind(self.kind))
        if self.n < 2 or self.n % 2:
            raise InvalidStateError(f"BHM needs an even n >= 2, got {self.n}")
        if not 1 <= 2 * self.m <= self.n:
            raise InvalidStateError(f"m={self.m} violates 1 <= 2m <= n={self.n}")
        if self.k < 1:
            raise InvalidStateError("k must be positive")
        if self.kind in (DistributionKind.NO, DistributionKind.YES) and self.k != 1:
            raise InvalidStateError("N and Y are single-copy distributions")

    @property
    def parity(self) -> int:
        """Required (-1)^|K| for the mixtures."""
        if self.kind == DistributionKind.MU_PLUS:
            return 1
        if self.kind == DistributionKind.MU_MINUS:
            return -1
        return 1 if self.kind == DistributionKind.NO else -1


@dataclass(frozen=True)
class LevelSets:
    """
    Membership in the parity-graded set families over k blocks.

    A subset of [nk] is given as k per-block masks over [n]; a subset of
    [mk] as k per-block masks over [m].
    """
    n: int
    m: int
    k: int

    def _blocks(self, masks: Sequence[int], width: int) -> Tuple[int, ...]:
        blocks = tuple(int(b) for b in masks)
        if len(blocks) != self.k or any(b < 0 or b >> width for b in blocks):
            raise DimensionMismatchError(f"Expected {self.k} block masks over {width} bits")
        return blocks

    def in_s(self, s_blocks: Sequence[int], ell: Optional[int] = None) -> bool:
        """Every |S_i| / 2 is odd; with ``ell`` also |S| = 2 ell."""
        sizes = [bin(b).count("1") for b in self._blocks(s_blocks, self.n)]
        if any(size % 4 != 2 for size in sizes):
            return False
        return ell is None or sum(sizes) == 2 * ell

    def in_t(self, t_blocks: Sequence[int], ell: Optional[int] = None) -> bool:
        """Every |T_i| is odd; with ``ell`` also |T| = ell."""
        sizes = [bin(b).count("1") for b in self._blocks(t_blocks, self.m)]
        if any(size % 2 != 1 for size in sizes):
            return False
        return ell is None or sum(sizes) == ell


@dataclass(frozen=True)
class ForrInstance:
    """Forrelation input pair; ``label`` is the planted or classified label."""
    n: int
    x: Tuple[int, ...]
    y: Tuple[int, ...]
    label: int
    epsilon: float
    seed: Optional[int] = None

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise InvalidStateError(f"Forrelation needs n a power of two >= 2, got {self.n}")
        x = as_signs(self.x, "x")
        y = as_signs(self.y, "y")
        if len(x) != self.n or len(y) != self.n:
            raise DimensionMismatchError(f"x and y must have length {self.n}")
        if self.label not in (1, -1, STAR):
            raise InvalidStateError(f"Unknown label {self.label}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def product(self) -> np.ndarray:
        """Pointwise x * y."""
        return np.asarray(self.x) * np.asarray(self.y)


@dataclass(frozen=True)
class ForrXorInstance:
    """k Forrelation copies sharing n and epsilon."""
    copies: Tuple[ForrInstance, ...]

    def __post_init__(self):
        copies = tuple(self.copies)
        if not copies:
            raise InvalidStateError("A XOR instance needs at least one copy")
        if len({c.n for c in copies}) != 1 or len({c.epsilon for c in copies}) != 1:
            raise DimensionMismatchError("Copies must share n and epsilon")
        object.__setattr__(self, "copies", copies)

    @property
    def k(self) -> int:
        return len(self.copies)

    @property
    def n(self) -> int:
        return self.copies[0].n

    @property
    def epsilon(self) -> float:
        return self.copies[0].epsilon

    @property
    def label(self) -> int:
        """Product of copy labels, STAR if any copy is outside the promise."""
        result = 1
        for copy in self.copies:
            if copy.label == STAR:
                return STAR
            result *= copy.label
        return result
