"""Causal flow, path covers and extraction of circuits from diagrams.

A path cover assigns every vertex to one input-to-output path; the induced
successor function together with an order satisfying

    F1: f(v) adjacent to v,   F2: v before f(v),   F3: u ~ f(v) implies v before u

certifies that the diagram has circuit structure.  Cross edges (edges not on
any path) then correspond to CNOT gates between the paths.
"""

from __future__ import annotations

import heapq
import weakref
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .diagram import H, X, Z, Diagram, VertexId
from .errors import CrossEdgeColourError, NotACircuit
from .passes import is_simple

# backtracking budget: expansions per vertex before giving up
_NODE_BUDGET_FACTOR = 10


@dataclass(frozen=True)
class CausalFlow:
    """Successor function and a topological rank witnessing F1-F3."""

    successor: Tuple[Tuple[VertexId, VertexId], ...]
    rank: Tuple[Tuple[VertexId, int], ...]

    def successor_map(self) -> Dict[VertexId, VertexId]:
        return dict(self.successor)

    def rank_map(self) -> Dict[VertexId, int]:
        return dict(self.rank)


@dataclass(frozen=True)
class PathCover:
    """Vertex-disjoint input-to-output paths covering every vertex."""

    paths: Tuple[Tuple[VertexId, ...], ...]
    flow: CausalFlow

    def position(self) -> Dict[VertexId, Tuple[int, int]]:
        pos: Dict[VertexId, Tuple[int, int]] = {}
        for q, path in enumerate(self.paths):
            for p, v in enumerate(path):
                pos[v] = (q, p)
        return pos

    def qubit_of(self) -> Dict[VertexId, int]:
        return {v: q for q, path in enumerate(self.paths) for v in path}


def _flow_of_paths(d: Diagram, paths: Sequence[Sequence[VertexId]]) -> Optional[CausalFlow]:
    """Build (f, rank) from paths and check F1-F3; None if the order is cyclic."""
    succ: Dict[VertexId, VertexId] = {}
    for path in paths:
        for a, b in zip(path, path[1:]):
            succ[a] = b
    # order constraints: v -> f(v) and v -> u for every u ~ f(v), u != v
    arcs: Dict[VertexId, Set[VertexId]] = {v: set() for v in d.vertices()}
    for v, fv in succ.items():
        arcs[v].add(fv)
        for u in d.neighbours(fv):
            if u != v:
                arcs[v].add(u)
    indeg: Dict[VertexId, int] = {v: 0 for v in arcs}
    for v, outs in arcs.items():
        for u in outs:
            indeg[u] += 1
    ready = [v for v in sorted(arcs) if indeg[v] == 0]
    heapq.heapify(ready)
    rank: Dict[VertexId, int] = {}
    k = 0
    while ready:
        v = heapq.heappop(ready)
        rank[v] = k
        k += 1
        for u in sorted(arcs[v]):
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(rank) != len(arcs):
        return None  # cyclic: no order satisfies F3
    return CausalFlow(tuple(sorted(succ.items())), tuple(sorted(rank.items())))


def _cover_search(d: Diagram, budget: int) -> Tuple[Optional[PathCover], List[VertexId]]:
    """Deterministic propagation-plus-backtracking search for a valid cover.

    Returns (cover, stranded) where stranded reports the best failure seen,
    for diagnostics.
    """
    inputs = list(d.inputs)
    outputs = set(d.outputs)
    interior = set(d.interior())

    best_stranded: List[VertexId] = sorted(interior)
    expansions = [0]

    def candidates(head: VertexId, claimed: Set[VertexId], free_outputs: Set[VertexId]) -> List[VertexId]:
        out = []
        for w in d.neighbours(head):
            if w in claimed:
                continue
            if w in interior or w in free_outputs:
                out.append(w)
        return out

    def search(paths: List[List[VertexId]], open_idx: List[int],
               claimed: Set[VertexId], free_outputs: Set[VertexId]) -> Optional[PathCover]:
        nonlocal best_stranded
        if not open_idx:
            uncovered = sorted(interior - claimed)
            if uncovered:
                if len(uncovered) < len(best_stranded):
                    best_stranded = uncovered
                return None
            flow = _flow_of_paths(d, paths)
            if flow is None:
                return None
            return PathCover(tuple(tuple(p) for p in paths), flow)
        if expansions[0] > budget:
            return None
        # most-constrained open path first
        scored = []
        for i in open_idx:
            cs = candidates(paths[i][-1], claimed, free_outputs)
            scored.append((len(cs), i, cs))
        scored.sort(key=lambda t: (t[0], t[1]))
        n, i, cs = scored[0]
        if n == 0:
            leftover = sorted(interior - claimed)
            if len(leftover) < len(best_stranded):
                best_stranded = leftover if leftover else [paths[i][-1]]
            return None
        for w in cs:
            expansions[0] += 1
            if expansions[0] > budget:
                return None
            paths[i].append(w)
            if w in free_outputs:
                free_outputs.discard(w)
                new_open = [j for j in open_idx if j != i]
            else:
                claimed.add(w)
                new_open = open_idx
            res = search(paths, new_open, claimed, free_outputs)
            if res is not None:
                return res
            paths[i].pop()
            if w in outputs:
                free_outputs.add(w)
            else:
                claimed.discard(w)
        return None

    paths = [[i] for i in inputs]
    cover = search(paths, list(range(len(inputs))), set(inputs), set(outputs))
    return cover, best_stranded


# diagrams are immutable, so covers are cached per object; entries vanish
# with the diagram, which is the invalidation callers need after rewriting
_COVER_CACHE: "weakref.WeakKeyDictionary[Diagram, PathCover]" = None  # type: ignore[assignment]


def find_path_cover(d: Diagram) -> PathCover:
    """A path cover satisfying F1-F3, or NotACircuit.

    Forced extensions are taken first; genuine choices are explored by
    backtracking with a node budget of 10 * |V|, and covers whose order
    constraints are cyclic are rejected.  Successful covers are memoised per
    diagram object.
    """
    global _COVER_CACHE
    if _COVER_CACHE is None:
        _COVER_CACHE = weakref.WeakKeyDictionary()
    cached = _COVER_CACHE.get(d)
    if cached is not None:
        return cached
    if d.num_inputs != d.num_outputs:
        raise NotACircuit(
            f"{d.num_inputs} inputs vs {d.num_outputs} outputs")
    budget = max(_NODE_BUDGET_FACTOR * len(d.vertices()), 100)
    cover, stranded = _cover_search(d, budget)
    if cover is None:
        raise NotACircuit(
            "no causal-flow path cover exists"
            + (f"; stranded vertices {stranded}" if stranded else ""),
            stranded=stranded)
    _COVER_CACHE[d] = cover
    return cover


def has_path_cover(d: Diagram) -> bool:
    try:
        find_path_cover(d)
        return True
    except NotACircuit:
        return False


def is_circuit_like(d: Diagram) -> bool:
    """Simple, balanced boundary, and admits a causal flow."""
    if d.num_inputs != d.num_outputs:
        return False
    if not is_simple(d):
        return False
    return has_path_cover(d)


def greedy_path_cover(d: Diagram) -> Tuple[List[List[VertexId]], List[VertexId]]:
    """Propagation-only cover used by metrics: forced moves first, then the
    first candidate in id order, never backtracking.  Returns (paths,
    uncovered); paths that fail to reach an output are truncated as-is."""
    if d.num_inputs != d.num_outputs:
        return [[i] for i in d.inputs], sorted(d.interior())
    interior = set(d.interior())
    free_outputs = set(d.outputs)
    claimed = set(d.inputs)
    paths = [[i] for i in d.inputs]
    open_idx = list(range(len(paths)))
    while open_idx:
        scored = []
        for i in open_idx:
            head = paths[i][-1]
            cs = [w for w in d.neighbours(head)
                  if w not in claimed and (w in interior or w in free_outputs)]
            scored.append((len(cs), i, cs))
        scored.sort(key=lambda t: (t[0], t[1]))
        n, i, cs = scored[0]
        if n == 0:
            open_idx.remove(i)  # stuck path: leave truncated
            continue
        w = cs[0]
        paths[i].append(w)
        if w in free_outputs:
            free_outputs.discard(w)
            open_idx.remove(i)
        else:
            claimed.add(w)
    covered = {v for p in paths for v in p}
    return paths, sorted(interior - covered)


_PHASE_GATES = {(Z, 1): ("S",), (Z, 2): ("Z",), (Z, 3): ("Z", "S"),
                (X, 1): ("V",), (X, 2): ("X",), (X, 3): ("X", "V")}


def extract_circuit(d: Diagram, pc: PathCover) -> "Circuit":
    """Turn a covered diagram back into a gate list.

    Path vertices become 1-qubit gates (higher-degree vertices contribute
    their phase gate plus one CNOT per cross edge); cross edges become CNOTs
    with the Z end as control.  Events are emitted in a fixed linear
    extension of the flow order: ready events sorted by (max path position,
    lower qubit).  A permutation between path starts and output positions is
    realised by trailing CNOT triples (the gate set has no primitive swap in
    extracted output).
    """
    from .circuit import Circuit, Gate

    pos = pc.position()
    width = len(pc.paths)
    on_path_edges = set()
    for path in pc.paths:
        for a, b in zip(path, path[1:]):
            es = d.edges_between(a, b)
            on_path_edges.add(es[0])

    events: List[Tuple[Tuple, List[Gate], Dict[int, int]]] = []
    # key -> (gates, {qubit: slot_position})
    for q, path in enumerate(pc.paths):
        for p, v in enumerate(path):
            if d.is_boundary(v):
                continue
            kind = d.kind(v)
            if kind == H:
                events.append(((p, q, 0, -1), [Gate("H", (q,))], {q: p}))
                continue
            phase = d.phase(v)
            if phase:
                names = _PHASE_GATES[(kind, phase)]
                events.append(((p, q, 0, -1),
                               [Gate(n, (q,)) for n in names], {q: p}))
    for e in sorted(d.edges()):
        if e in on_path_edges:
            continue
        u, v = d.edge_ends(e)
        if d.is_boundary(u) or d.is_boundary(v):
            raise NotACircuit(f"cross edge {e} touches a boundary")
        ku, kv = d.kind(u), d.kind(v)
        if {ku, kv} != {Z, X}:
            raise CrossEdgeColourError(
                f"cross edge {e} joins {ku} to {kv}")
        zv, xv = (u, v) if ku == Z else (v, u)
        qz, pz = pos[zv]
        qx, px = pos[xv]
        if qz == qx:
            raise NotACircuit(f"cross edge {e} lies within one path")
        key = (max(pz, px), min(qz, qx), 1, e)
        events.append((key, [Gate("CNOT", (qz, qx))], {qz: pz, qx: px}))

    # schedule: per qubit, events are ordered by path position; events sharing
    # a vertex (same position) commute, so they carry no mutual constraint
    per_q: Dict[int, List[Tuple[int, int]]] = {q: [] for q in range(width)}
    for idx, (key, gates, slots) in enumerate(events):
        for q, p in slots.items():
            per_q[q].append((p, idx))

    emitted: List[Gate] = []
    done = [False] * len(events)
    remaining = len(events)

    def ready_now(idx: int) -> bool:
        for q, p in events[idx][2].items():
            for p2, j in per_q[q]:
                if p2 < p and not done[j]:
                    return False
        return True

    while remaining:
        ready = sorted((events[idx][0], idx) for idx in range(len(events))
                       if not done[idx] and ready_now(idx))
        if not ready:
            raise NotACircuit("event schedule deadlocked (flow order cyclic)")
        _, idx = ready[0]
        done[idx] = True
        remaining -= 1
        emitted.extend(events[idx][1])

    # trailing permutation: path q must deliver its value at output position
    # target[q]; realise by swaps (each swap = CNOT TONC CNOT)
    out_index = {v: j for j, v in enumerate(d.outputs)}
    target = [out_index[path[-1]] for path in pc.paths]
    cur = list(range(width))  # cur[wire] = which path value sits there
    for wire in range(width):
        want_val = next(q for q in range(width) if target[q] == wire)
        src = cur.index(want_val)
        if src != wire:
            emitted.extend([Gate("CNOT", (wire, src)), Gate("TONC", (wire, src)),
                            Gate("CNOT", (wire, src))])
            cur[wire], cur[src] = cur[src], cur[wire]
    return Circuit(width, tuple(emitted))
