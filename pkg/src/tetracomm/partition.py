"""Tetrahedral block partition of a symmetric tensor's lower tetrahedron.

Block coordinates are 1-based triples (i, j, k) with i >= j >= k:
off-diagonal when strict, non-central diagonal when exactly two coordinates
are equal, central diagonal when all three are equal.  A design with m
points and blocks R_p induces the partition: processor p owns TB3(R_p) plus
matched diagonal blocks whose coordinates stay inside R_p, so its block
computations never need vector data beyond the row blocks of R_p.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import NamedTuple

from .finite_field import prime_power
from .matching import BipartiteGraph, MatchingInfeasibleError, d_disjoint_matchings, max_matching
from .steiner import SteinerSystem

__all__ = [
    "BlockIndex",
    "TetraPartition",
    "VectorLayout",
    "DesignUnsuitableError",
    "tb3",
    "all_lower_blocks",
    "noncentral_blocks",
    "build_partition",
    "validate_partition",
    "vector_layout",
    "pad_dimension",
    "storage_count",
]


class DesignUnsuitableError(RuntimeError):
    """The design lacks the structure needed for a balanced assignment."""


class BlockIndex(NamedTuple):
    i: int
    j: int
    k: int

    @property
    def kind(self) -> str:
        if self.i > self.j > self.k:
            return "off"
        if self.i == self.j == self.k:
            return "central"
        return "noncentral"


def tb3(indices) -> set[BlockIndex]:
    """All strictly ordered triples drawn from an index set."""
    return {BlockIndex(c, b, a) for a, b, c in combinations(sorted(indices), 3)}


def all_lower_blocks(m: int):
    """Every block index (i, j, k) with m >= i >= j >= k >= 1."""
    for i in range(1, m + 1):
        for j in range(1, i + 1):
            for k in range(1, j + 1):
                yield BlockIndex(i, j, k)


def noncentral_blocks(m: int) -> list[BlockIndex]:
    """The m(m-1) blocks with exactly two equal coordinates, sorted."""
    out = []
    for a in range(2, m + 1):
        for b in range(1, a):
            out.append(BlockIndex(a, a, b))
            out.append(BlockIndex(a, b, b))
    return sorted(out)


@dataclass
class TetraPartition:
    """Per-processor block ownership derived from an (m, r, 3) design.

    R[p-1] is processor p's index set, N[p-1]/D[p-1] its non-central and
    central diagonal blocks, Q[i-1] the processors whose sets contain row
    block i.  q is set when the design has spherical parameters
    (m, r) = (q^2+1, q+1), None otherwise.
    """

    label: str
    m: int
    r: int
    P: int
    q: int | None
    R: list[tuple[int, ...]]
    N: list[list[BlockIndex]]
    D: list[list[BlockIndex]]
    Q: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def group_size(self) -> int:
        return len(self.Q[0])

    def to_json_obj(self) -> dict:
        return {
            "meta": {"label": self.label, "m": self.m, "r": self.r, "P": self.P, "q": self.q},
            "processors": [
                {
                    "p": p,
                    "R": list(self.R[p - 1]),
                    "N": [list(blk) for blk in self.N[p - 1]],
                    "D": [list(blk) for blk in self.D[p - 1]],
                }
                for p in range(1, self.P + 1)
            ],
            "row_blocks": [{"i": i, "Q": list(self.Q[i - 1])} for i in range(1, self.m + 1)],
        }


def build_partition(system: SteinerSystem, label: str | None = None) -> TetraPartition:
    """Assign every lower-tetrahedral block of an m-block tensor to a processor.

    Off-diagonal blocks follow the design directly (TB3 of each block's index
    set).  Non-central diagonal blocks are split evenly via disjoint
    matchings; central diagonal blocks go to distinct compatible processors
    via one maximum matching.  The caller is expected to pass a verified
    system; an unsuitable design raises DesignUnsuitableError naming the
    failing stage.
    """
    m, r = system.n, system.r
    blocks = system.blocks
    P = len(blocks)
    R = [tuple(blk) for blk in blocks]
    Q = [tuple(p for p in range(1, P + 1) if i in R[p - 1]) for i in range(1, m + 1)]
    if len({len(qi) for qi in Q}) != 1:
        raise DesignUnsuitableError("row-block sharing stage: |Q_i| is not uniform across row blocks")

    nc = noncentral_blocks(m)
    total_nc = len(nc)
    if total_nc % P != 0:
        raise DesignUnsuitableError(
            f"non-central stage: {total_nc} blocks do not divide evenly over {P} processors"
        )
    d = total_nc // P
    nc_index = {blk: idx + 1 for idx, blk in enumerate(nc)}
    adj: list[list[int]] = []
    for p in range(1, P + 1):
        row = []
        for a, b in combinations(R[p - 1], 2):  # a < b within the sorted set
            row.append(nc_index[BlockIndex(b, b, a)])
            row.append(nc_index[BlockIndex(b, a, a)])
        adj.append(sorted(row))
    try:
        mats = d_disjoint_matchings(BipartiteGraph(P, total_nc, adj), d)
    except MatchingInfeasibleError as exc:
        raise DesignUnsuitableError(f"non-central stage: {exc}") from exc
    N: list[list[BlockIndex]] = [[] for _ in range(P)]
    for mat in mats:
        for p, idx in mat.pairs:
            N[p - 1].append(nc[idx - 1])
    for row_blocks in N:
        row_blocks.sort()

    central = max_matching(BipartiteGraph(m, P, [list(Q[i - 1]) for i in range(1, m + 1)]))
    if central.size != m:
        raise DesignUnsuitableError(
            f"central stage: only {central.size} of {m} central blocks could be assigned"
        )
    D: list[list[BlockIndex]] = [[] for _ in range(P)]
    for i, p in central.pairs:
        D[p - 1].append(BlockIndex(i, i, i))

    q = r - 1 if prime_power(r - 1) is not None and m == (r - 1) ** 2 + 1 else None
    return TetraPartition(
        label=label or f"steiner-{m}-{r}-3",
        m=m,
        r=r,
        P=P,
        q=q,
        R=R,
        N=N,
        D=D,
        Q=Q,
    )


def validate_partition(part: TetraPartition) -> list[str]:
    """Return human-readable violations of the partition invariants (empty = valid)."""
    problems: list[str] = []
    counts: Counter[BlockIndex] = Counter()
    for p in range(1, part.P + 1):
        counts.update(tb3(part.R[p - 1]))
        counts.update(part.N[p - 1])
        counts.update(part.D[p - 1])
    expected = set(all_lower_blocks(part.m))
    extra = [blk for blk in counts if blk not in expected]
    dupes = [blk for blk, c in counts.items() if c > 1]
    missing = [blk for blk in expected if blk not in counts]
    if extra:
        problems.append(f"blocks outside the lower tetrahedron: {sorted(extra)[:3]}")
    if dupes:
        problems.append(f"blocks assigned more than once: {sorted(dupes)[:3]}")
    if missing:
        problems.append(f"unassigned blocks: {sorted(missing)[:3]}")

    for p in range(1, part.P + 1):
        owned = set(part.R[p - 1])
        for blk in list(part.N[p - 1]) + list(part.D[p - 1]):
            if not set(blk) <= owned:
                problems.append(f"locality violated at processor {p}: block {tuple(blk)} not within {sorted(owned)}")
        if len(part.D[p - 1]) > 1:
            problems.append(f"processor {p} holds {len(part.D[p - 1])} central blocks")

    derived_q = [tuple(p for p in range(1, part.P + 1) if i in part.R[p - 1]) for i in range(1, part.m + 1)]
    if derived_q != list(part.Q):
        problems.append("row-block processor sets Q are inconsistent with R")

    sizes = {len(n_p) for n_p in part.N}
    if len(sizes) != 1:
        problems.append(f"non-central loads are unbalanced: {sorted(sizes)}")
    if part.q is not None:
        if sizes != {part.q}:
            problems.append(f"expected {part.q} non-central blocks per processor, got {sorted(sizes)}")
    return problems


@dataclass
class VectorLayout:
    """Ownership map of a length-n vector over the partition's processors.

    Row block i occupies global indices [(i-1)*b, i*b) (0-based half-open)
    and is split into |Q_i| contiguous chunks assigned to the processors of
    Q_i in ascending order.
    """

    n: int
    m: int
    b: int
    chunk: int
    ranges: dict[tuple[int, int], tuple[int, int]]

    def chunk_range(self, i: int, p: int) -> tuple[int, int]:
        return self.ranges[(i, p)]


def pad_dimension(n: int, part: TetraPartition) -> int:
    """Smallest n' >= n with m | n' and |Q_i| | (n'/m)."""
    unit = part.m * part.group_size
    return -(-n // unit) * unit


def vector_layout(n: int, part: TetraPartition) -> VectorLayout:
    g = part.group_size
    if n % part.m != 0 or (n // part.m) % g != 0:
        raise ValueError(
            f"n={n} is not divisible into {part.m} row blocks of {g} chunks; pad to {pad_dimension(n, part)}"
        )
    b = n // part.m
    chunk = b // g
    ranges: dict[tuple[int, int], tuple[int, int]] = {}
    for i in range(1, part.m + 1):
        base = (i - 1) * b
        for t, p in enumerate(part.Q[i - 1]):
            ranges[(i, p)] = (base + t * chunk, base + (t + 1) * chunk)
    return VectorLayout(n=n, m=part.m, b=b, chunk=chunk, ranges=ranges)


def storage_count(part: TetraPartition, n: int, p: int) -> int:
    """Exact lower-tetrahedral element count stored by processor p."""
    if n % part.m != 0:
        raise ValueError(f"n={n} is not a multiple of m={part.m}")
    b = n // part.m
    n_off = comb(len(part.R[p - 1]), 3)
    n_nc = len(part.N[p - 1])
    n_ce = len(part.D[p - 1])
    return n_off * b**3 + n_nc * (b * b * (b + 1) // 2) + n_ce * (b * (b + 1) * (b + 2) // 6)
