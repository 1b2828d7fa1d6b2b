"""Point-to-point communication schedules and the all-to-all cost model.

Every ordered pair of processors with overlapping row-block sets induces one
transfer demand per vector phase.  Demands are layered by the number of
shared blocks; each regular layer decomposes into perfect matchings, one
communication step per matching, so that within a step every processor sends
at most one message and receives at most one message.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from .matching import BipartiteGraph, max_matching, regular_decompose
from .partition import TetraPartition, vector_layout

__all__ = [
    "TransferDemand",
    "CommSchedule",
    "ScheduleReport",
    "AllToAllCost",
    "build_demands",
    "build_schedule",
    "validate",
    "alltoall_cost",
]


@dataclass(frozen=True)
class TransferDemand:
    """One directed transfer: src sends its chunks of the shared row blocks to dst."""

    src: int
    dst: int
    blocks: tuple[int, ...]


@dataclass
class CommSchedule:
    """Ordered steps, each a set of demands with per-step unique senders/receivers."""

    steps: list[list[TransferDemand]]
    meta: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "meta": self.meta,
            "steps": [
                [{"src": d.src, "dst": d.dst, "blocks": list(d.blocks)} for d in step]
                for step in self.steps
            ],
        }


def build_demands(part: TetraPartition) -> list[TransferDemand]:
    """All ordered-pair demands; symmetric with identical block lists."""
    sets = [set(r) for r in part.R]
    demands = []
    for src in range(1, part.P + 1):
        for dst in range(1, part.P + 1):
            if src == dst:
                continue
            shared = sorted(sets[src - 1] & sets[dst - 1])
            if shared:
                demands.append(TransferDemand(src, dst, tuple(shared)))
    return demands


def build_schedule(demands: list[TransferDemand]) -> CommSchedule:
    """Schedule the demands layer by layer (larger shared counts first).

    A layer whose participants all have the same degree decomposes exactly
    into that many steps.  A non-regular layer falls back to repeated
    maximum matchings, which stays valid but may use extra steps; the meta
    field records which path each layer took.
    """
    layers: dict[int, list[TransferDemand]] = {}
    for d in demands:
        layers.setdefault(len(d.blocks), []).append(d)

    steps: list[list[TransferDemand]] = []
    layer_meta = []
    exact = True
    for size in sorted(layers, reverse=True):
        layer = layers[size]
        procs = sorted({d.src for d in layer} | {d.dst for d in layer})
        pos = {p: idx + 1 for idx, p in enumerate(procs)}
        by_pair = {(d.src, d.dst): d for d in layer}
        out_deg = Counter(d.src for d in layer)
        in_deg = Counter(d.dst for d in layer)
        degree = out_deg[procs[0]]
        regular = all(out_deg[p] == degree and in_deg[p] == degree for p in procs)

        adj: list[list[int]] = [[] for _ in procs]
        for d in layer:
            adj[pos[d.src] - 1].append(pos[d.dst])
        graph = BipartiteGraph(len(procs), len(procs), adj)

        layer_steps: list[list[TransferDemand]] = []
        if regular:
            for mat in regular_decompose(graph, degree):
                layer_steps.append(sorted(
                    (by_pair[(procs[x - 1], procs[y - 1])] for x, y in mat.pairs),
                    key=lambda d: d.src,
                ))
        else:
            exact = False
            remaining = [list(row) for row in graph.adj]
            while any(remaining):
                mat = max_matching(BipartiteGraph(len(procs), len(procs), [list(r) for r in remaining]))
                layer_steps.append(sorted(
                    (by_pair[(procs[x - 1], procs[y - 1])] for x, y in mat.pairs),
                    key=lambda d: d.src,
                ))
                for x, y in mat.pairs:
                    remaining[x - 1].remove(y)
        steps.extend(layer_steps)
        layer_meta.append({
            "shared_blocks": size,
            "demands": len(layer),
            "steps": len(layer_steps),
            "regular": regular,
        })

    meta = {
        "steps": len(steps),
        "exact": exact,
        "layers": layer_meta,
        "blocks_per_step": [len(step[0].blocks) if step else 0 for step in steps],
    }
    return CommSchedule(steps=steps, meta=meta)


@dataclass
class ScheduleReport:
    ok: bool
    problems: list[str]
    send_volume: dict[int, int]

    def to_json_obj(self) -> dict:
        return {
            "ok": self.ok,
            "problems": self.problems,
            "send_volume": {str(p): v for p, v in sorted(self.send_volume.items())},
        }


def validate(sched: CommSchedule, demands: list[TransferDemand], chunk: int = 1) -> ScheduleReport:
    """Check one-send/one-receive per step and exact demand coverage.

    send_volume maps each processor to the words it sends across the
    schedule (chunk words per shared block per demand).
    """
    problems: list[str] = []
    seen: Counter[TransferDemand] = Counter()
    for step_no, step in enumerate(sched.steps, start=1):
        srcs = Counter(d.src for d in step)
        dsts = Counter(d.dst for d in step)
        for p, c in srcs.items():
            if c > 1:
                problems.append(f"step {step_no}: processor {p} sends {c} messages")
        for p, c in dsts.items():
            if c > 1:
                problems.append(f"step {step_no}: processor {p} receives {c} messages")
        seen.update(step)

    want = Counter(demands)
    for d, c in want.items():
        got = seen.get(d, 0)
        if got != c:
            problems.append(f"demand {d.src}->{d.dst} blocks {d.blocks} scheduled {got} times, expected {c}")
    for d in seen:
        if d not in want:
            problems.append(f"scheduled transfer {d.src}->{d.dst} has no matching demand")

    volume: dict[int, int] = {}
    for d in demands:
        volume[d.src] = volume.get(d.src, 0) + len(d.blocks) * chunk
    scheduled_volume: dict[int, int] = {}
    for step in sched.steps:
        for d in step:
            scheduled_volume[d.src] = scheduled_volume.get(d.src, 0) + len(d.blocks) * chunk
    if scheduled_volume != volume:
        off = {p for p in set(volume) | set(scheduled_volume) if volume.get(p) != scheduled_volume.get(p)}
        problems.append(f"scheduled send volume differs from demands for processors {sorted(off)[:5]}")

    return ScheduleReport(ok=not problems, problems=problems, send_volume=volume)


class AllToAllCost(NamedTuple):
    per_vector: int
    both_vectors: int


def alltoall_cost(part: TetraPartition, n: int) -> AllToAllCost:
    """Words sent per processor when each vector moves via an all-to-all.

    The collective runs P-1 steps and every step carries a fixed slot of two
    row-block chunks, whether or not that much is shared with the receiver.
    """
    layout = vector_layout(n, part)
    per_vector = 2 * layout.chunk * (part.P - 1)
    return AllToAllCost(per_vector, 2 * per_vector)
