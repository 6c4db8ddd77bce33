"""Built-in structural passes for the variable-arity axioms.

The generic matcher only handles fixed-arity rules, so spider fusion,
identity/anti-loop/hopf reduction, H expansion, colour change and
Pauli-copying are implemented here as parameterised passes.  Each pass is
deterministic and preserves the interpretation up to a non-zero scalar.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Tuple

from .diagram import H, X, Z, Diagram, EdgeId, VertexId, phase_add, phase_neg
from .errors import TargetKindError
from .semantics import interpret


def fuse_spiders(d: Diagram) -> Diagram:
    """Merge adjacent same-colour spiders, summing phases, until none remain.

    Any extra parallel edges between a fused pair turn into self-loops on the
    merged vertex; they are left for the anti-loop pass.
    """
    b = d.builder()
    while True:
        target = None
        for e in sorted(b.edges):
            u, v = b.edges[e]
            if u == v:
                continue
            ku = b.vertices[u][0]
            if ku in (Z, X) and b.vertices[v][0] == ku:
                target = (e, min(u, v), max(u, v))
                break
        if target is None:
            break
        e, keep, gone = target
        b.set_phase(keep, phase_add(b.vertices[keep][1], b.vertices[gone][1]))
        b.remove_edge(e)
        for e2 in list(b.edges):
            a, c = b.edges[e2]
            if a == gone:
                a = keep
            if c == gone:
                c = keep
            b.edges[e2] = (min(a, c), max(a, c))
        del b.vertices[gone]
    return b.build()


def remove_self_loops(d: Diagram) -> Diagram:
    """Delete plain self-loops on spiders (the anti-loop axiom)."""
    b = d.builder()
    for e in sorted(b.edges):
        u, v = b.edges[e]
        if u == v and b.vertices[u][0] in (Z, X):
            b.remove_edge(e)
    return b.build()


def remove_identities(d: Diagram) -> Diagram:
    """Delete zero-phase degree-2 spiders, joining their two edges."""
    b = d.builder()
    changed = True
    while changed:
        changed = False
        for v in sorted(b.vertices):
            kind, phase = b.vertices[v]
            if kind not in (Z, X) or phase != 0:
                continue
            inc = b.incident(v)
            if len(inc) != 2:
                continue  # degree-2 via a self-loop is left to anti-loop
            e1, e2 = inc
            a = b._other(e1, v)
            c = b._other(e2, v)
            if a == v or c == v:
                continue
            b.remove_edge(e1)
            b.remove_edge(e2)
            del b.vertices[v]
            b.add_edge(a, c)
            changed = True
            break
    return b.build()


def hopf_reduce(d: Diagram) -> Diagram:
    """Cancel parallel edges between opposite-colour spiders two at a time."""
    b = d.builder()
    pairs: Dict[Tuple[VertexId, VertexId], List[EdgeId]] = {}
    for e in sorted(b.edges):
        u, v = b.edges[e]
        if u == v:
            continue
        ku, kv = b.vertices[u][0], b.vertices[v][0]
        if (ku, kv) in ((Z, X), (X, Z)):
            pairs.setdefault((u, v), []).append(e)
    for es in pairs.values():
        while len(es) >= 2:
            b.remove_edge(es.pop())
            b.remove_edge(es.pop())
    return b.build()


def h_euler_expand(d: Diagram) -> Diagram:
    """Replace every H box by the Z(1)-X(1)-Z(1) chain (scalar dropped)."""
    b = d.builder()
    for hv in sorted(v for v, (k, _) in d._vertices.items() if k == H):
        inc = b.incident(hv)
        z1 = b.add_vertex(Z, 1)
        x1 = b.add_vertex(X, 1)
        z2 = b.add_vertex(Z, 1)
        b.add_edge(z1, x1)
        b.add_edge(x1, z2)
        if len(inc) == 1:  # self-loop at the H box: the chain closes on itself
            b.add_edge(z2, z1)
        else:
            e1, e2 = inc
            a = b._other(e1, hv)
            c = b._other(e2, hv)
            b.add_edge(a, z1)
            b.add_edge(z2, c)
        b.remove_vertex(hv)
    return b.build()


def drop_scalar_components(d: Diagram) -> Diagram:
    """Remove boundary-free connected components with a non-zero scalar value.

    Zero-valued components are kept: the diagram genuinely denotes the zero
    map and dropping them would change the semantics.
    """
    comp: Dict[VertexId, int] = {}
    for v in d.vertices():
        if v in comp:
            continue
        stack = [v]
        comp[v] = v
        while stack:
            u = stack.pop()
            for w in d.neighbours(u):
                if w not in comp:
                    comp[w] = v
                    stack.append(w)
    roots_with_boundary = {comp[v] for v in d.vertices() if d.is_boundary(v)}
    doomed: List[VertexId] = []
    for root in sorted(set(comp.values()) - roots_with_boundary):
        members = sorted(v for v, r in comp.items() if r == root)
        sub = Diagram({v: d._vertices[v] for v in members},
                      {e: d.edge_ends(e) for e in d.edges()
                       if d.edge_ends(e)[0] in members},
                      (), ())
        scalar = interpret(sub)[0, 0]
        if abs(scalar) > 1e-12:
            doomed.extend(members)
    if not doomed:
        return d
    b = d.builder()
    for v in doomed:
        b.remove_vertex(v)
    return b.build()


def is_simple(d: Diagram) -> bool:
    """The circuit-extraction notion of simplicity: a simple graph, no two
    adjacent spiders of the same colour, and no zero-phase degree-2 spider."""
    seen_pairs = set()
    for e in d.edges():
        u, v = d.edge_ends(e)
        if u == v:
            return False
        if (u, v) in seen_pairs:
            return False
        seen_pairs.add((u, v))
        ku, kv = d.kind(u), d.kind(v)
        if ku in (Z, X) and ku == kv:
            return False
    for v in d.interior():
        if d.is_spider(v) and d.phase(v) == 0 and d.degree(v) == 2:
            return False
    return True


def simple_form(d: Diagram) -> Diagram:
    """Fixpoint of H expansion, fusion, anti-loop, hopf and identity removal."""
    passes = (h_euler_expand, fuse_spiders, remove_self_loops, hopf_reduce,
              remove_identities, drop_scalar_components)

    def state(g: Diagram):
        return (g._vertices, sorted(g.edge_ends(e) for e in g.edges()))

    while True:
        before = state(d)
        for p in passes:
            d = p(d)
        if state(d) == before:
            break
    assert is_simple(d)
    return d


def colour_change_vertex(d: Diagram, v: VertexId) -> Diagram:
    """Flip the colour of spider v, conjugating every leg by an H box.

    New H boxes meeting an existing H box on the same edge cancel; self-loops
    pick up two H boxes which likewise cancel, so they are left alone.
    """
    if not d.is_spider(v):
        raise TargetKindError(f"vertex {v} is not a spider")
    b = d.builder()
    b.set_kind(v, X if d.kind(v) == Z else Z)
    handled = set()
    for e in sorted(d.incident_edges(v)):
        if e in handled or e not in b.edges:
            continue
        u, w = b.edges[e]
        if u == w:
            continue  # self-loop: the two H boxes cancel each other
        other = w if u == v else u
        if b.vertices[other][0] == H:
            # cancel with the existing H box: connect v straight through
            far_edges = [e2 for e2 in b.incident(other) if e2 != e]
            (e2,) = far_edges
            far = b._other(e2, other)
            handled.add(e2)
            b.remove_vertex(other)
            b.add_edge(v, far if far != other else v)
        else:
            hv = b.add_vertex(H)
            b.remove_edge(e)
            b.add_edge(v, hv)
            b.add_edge(hv, other)
    return b.build()


def pi_copy(d: Diagram, pauli_v: VertexId, spider_v: VertexId) -> Diagram:
    """Commute a degree-2 Pauli through an adjacent opposite-colour spider.

    The spider's phase is negated and a copy of the Pauli appears on each of
    its other legs (sound up to scalar).
    """
    if not (d.is_spider(pauli_v) and d.phase(pauli_v) == 2 and d.degree(pauli_v) == 2):
        raise TargetKindError(f"vertex {pauli_v} is not a degree-2 Pauli")
    if not d.is_spider(spider_v) or d.kind(spider_v) == d.kind(pauli_v):
        raise TargetKindError(f"vertex {spider_v} is not an opposite-colour spider")
    link = d.edges_between(pauli_v, spider_v)
    if len(link) != 1:
        raise TargetKindError("Pauli must meet the spider along a single edge")
    pauli_kind = d.kind(pauli_v)
    b = d.builder()
    (e_prev,) = [e for e in d.incident_edges(pauli_v) if e != link[0]]
    prev = b._other(e_prev, pauli_v)
    # capture the spider's other legs before any mutation
    other_edges = [e for e in sorted(d.incident_edges(spider_v)) if e != link[0]]
    b.remove_vertex(pauli_v)
    b.add_edge(prev, spider_v)
    b.set_phase(spider_v, phase_neg(d.phase(spider_v)))
    for e in other_edges:
        u, w = b.edges[e]
        if u == w:
            continue  # loop legs get two Pauli copies which cancel
        other = w if u == spider_v else u
        p = b.add_vertex(pauli_kind, 2)
        b.remove_edge(e)
        b.add_edge(spider_v, p)
        b.add_edge(p, other)
    return b.build()


def split_cross_leg(d: Diagram, v: VertexId, prev_edge: EdgeId, next_edge: EdgeId,
                    order: List[EdgeId]) -> Diagram:
    """Decompose a spider with several cross edges into a same-colour chain,
    one cross edge per link, in the given edge order (first link nearest the
    `prev_edge` side).  The vertex's phase lands on the first link."""
    if not d.is_spider(v):
        raise TargetKindError(f"vertex {v} is not a spider")
    incident = set(d.incident_edges(v))
    if set(order) | {prev_edge, next_edge} != incident or \
            len(order) + 2 != len(incident):
        raise TargetKindError("order must list exactly the cross edges at v")
    b = d.builder()
    kind, phase = d.kind(v), d.phase(v)
    prev = b._other(prev_edge, v)
    nxt = b._other(next_edge, v)
    partners = [b._other(e, v) for e in order]
    b.remove_vertex(v)
    chain_prev = prev
    for i, (e, partner) in enumerate(zip(order, partners)):
        link = b.add_vertex(kind, phase if i == 0 else 0)
        b.add_edge(chain_prev, link)
        b.add_edge(link, partner)
        chain_prev = link
    b.add_edge(chain_prev, nxt)
    return b.build()


def split_phase(d: Diagram, v: VertexId, edge: EdgeId) -> Diagram:
    """Pull the phase of spider v out into a fresh degree-2 vertex on `edge`."""
    if not d.is_spider(v) or d.phase(v) == 0:
        raise TargetKindError(f"vertex {v} has no phase to split")
    u, w = d.edge_ends(edge)
    if v not in (u, w) or u == w:
        raise TargetKindError("edge must be a non-loop edge at v")
    other = w if u == v else u
    b = d.builder()
    p = b.add_vertex(d.kind(v), d.phase(v))
    b.set_phase(v, 0)
    b.remove_edge(edge)
    b.add_edge(other, p)
    b.add_edge(p, v)
    return b.build()


# registry used by trace replay
PASSES: Dict[str, Callable] = {
    "fuse_spiders": fuse_spiders,
    "remove_self_loops": remove_self_loops,
    "remove_identities": remove_identities,
    "hopf_reduce": hopf_reduce,
    "h_euler_expand": h_euler_expand,
    "drop_scalar_components": drop_scalar_components,
    "simple_form": simple_form,
    "colour_change_vertex": colour_change_vertex,
    "pi_copy": pi_copy,
    "split_phase": split_phase,
    "split_cross_leg": split_cross_leg,
}
