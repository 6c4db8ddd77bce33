"""Boundary-respecting subgraph matching, rule application and proof traces.

A rule is a pair of diagrams with the same boundary shape.  A match embeds
the rule's interior into a target diagram; the gluing condition (every target
edge incident to a matched vertex is itself matched) guarantees the rewrite
never leaves dangling edges.  Together with kind/phase preservation this
forces matched vertices to have exactly the degree of their rule vertex,
which the matcher uses for pruning.

Matches are enumerated in a canonical order (lexicographic over the sorted
image vertex ids, then edge and boundary assignments), so every operation in
this module is deterministic and proof traces are byte-stable.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .diagram import Diagram, EdgeId, VertexId
from .errors import ReplayDivergence, RuleFormatError, StaleMatchError

Metric = Callable[[Diagram], int]


@dataclass(frozen=True)
class Rule:
    """A directed equation between two diagrams with the same boundary."""

    name: str
    lhs: Diagram
    rhs: Diagram

    def __post_init__(self):
        if self.lhs.signature() != self.rhs.signature():
            raise RuleFormatError(f"rule {self.name}: boundary mismatch")
        for e in self.lhs.edges():
            u, v = self.lhs.edge_ends(e)
            if self.lhs.is_boundary(u) and self.lhs.is_boundary(v):
                raise RuleFormatError(
                    f"rule {self.name}: LHS has a bare wire, which would match anywhere")
        if not self.lhs.interior():
            raise RuleFormatError(f"rule {self.name}: empty LHS interior")

    def colour_swapped(self, name: str) -> "Rule":
        from .diagram import X, Z

        def swap(d: Diagram) -> Diagram:
            verts = {}
            for v in d.vertices():
                k, p = d.kind(v), d.phase(v)
                if k == Z:
                    k = X
                elif k == X:
                    k = Z
                verts[v] = (k, p)
            return Diagram(verts, {e: d.edge_ends(e) for e in d.edges()},
                           d.inputs, d.outputs)

        return Rule(name, swap(self.lhs), swap(self.rhs))


@dataclass(frozen=True)
class Match:
    """An embedding of a rule's LHS into a target diagram.

    ``boundary_attach`` maps each LHS boundary vertex to the half-edge it
    stands for: (target edge id, end index of the far vertex).
    """

    rule_name: str
    vertex_map: Tuple[Tuple[VertexId, VertexId], ...]
    edge_map: Tuple[Tuple[EdgeId, EdgeId], ...]
    boundary_attach: Tuple[Tuple[VertexId, Tuple[EdgeId, int]], ...]

    def vmap(self) -> Dict[VertexId, VertexId]:
        return dict(self.vertex_map)

    def emap(self) -> Dict[EdgeId, EdgeId]:
        return dict(self.edge_map)

    def attach(self) -> Dict[VertexId, Tuple[EdgeId, int]]:
        return dict(self.boundary_attach)

    def key(self) -> Tuple:
        return (tuple(sorted(t for _, t in self.vertex_map)),
                self.edge_map, self.boundary_attach)

    def to_json_obj(self) -> dict:
        return {
            "rule": self.rule_name,
            "vertex_map": [list(p) for p in self.vertex_map],
            "edge_map": [list(p) for p in self.edge_map],
            "boundary_attach": [[b, list(h)] for b, h in self.boundary_attach],
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "Match":
        return Match(
            rule_name=obj["rule"],
            vertex_map=tuple((int(a), int(b)) for a, b in obj["vertex_map"]),
            edge_map=tuple((int(a), int(b)) for a, b in obj["edge_map"]),
            boundary_attach=tuple(
                (int(b), (int(e), int(s))) for b, (e, s) in obj["boundary_attach"]),
        )


def _search_order(lhs: Diagram) -> List[VertexId]:
    """Interior vertices in a BFS order so each new vertex (within a connected
    component) touches an already-placed one."""
    interior = lhs.interior()
    order: List[VertexId] = []
    seen = set()
    for root in interior:
        if root in seen:
            continue
        queue = [root]
        seen.add(root)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in lhs.neighbours(v):
                if w in seen or lhs.is_boundary(w):
                    continue
                seen.add(w)
                queue.append(w)
    return order


def find_matches(rule: Rule, target: Diagram) -> List[Match]:
    """All embeddings of rule.lhs into target, in canonical order."""
    lhs = rule.lhs
    order = _search_order(lhs)
    interior_set = set(order)

    lhs_loops = {v: len(lhs.edges_between(v, v)) for v in order}
    lhs_bedges: Dict[VertexId, List[Tuple[EdgeId, VertexId]]] = {v: [] for v in order}
    for e in lhs.edges():
        u, v = lhs.edge_ends(e)
        if lhs.is_boundary(u) and not lhs.is_boundary(v):
            lhs_bedges[v].append((e, u))
        elif lhs.is_boundary(v) and not lhs.is_boundary(u):
            lhs_bedges[u].append((e, v))

    cand_pool: Dict[VertexId, List[VertexId]] = {}
    for v in order:
        sig = (lhs.kind(v), lhs.phase(v), lhs.degree(v))
        cand_pool[v] = [t for t in target.interior()
                        if (target.kind(t), target.phase(t), target.degree(t)) == sig
                        and len(target.edges_between(t, t)) == lhs_loops[v]]

    matches: List[Match] = []
    vmap: Dict[VertexId, VertexId] = {}
    used = set()

    def edges_ok(a: VertexId, t: VertexId) -> bool:
        for u in lhs.neighbours(a):
            if u in vmap:
                if len(lhs.edges_between(a, u)) != len(target.edges_between(t, vmap[u])):
                    return False
        return True

    def complete() -> None:
        image = set(vmap.values())
        emap: Dict[EdgeId, EdgeId] = {}
        # interior-interior edges: canonical sorted pairing, multiplicities must
        # agree exactly (anything extra would violate the gluing condition)
        pairs = set()
        for v in order:
            pairs.add((v, v))
            for u in lhs.neighbours(v):
                if u in interior_set:
                    pairs.add((min(u, v), max(u, v)))
        for u, v in sorted(pairs):
            les = sorted(lhs.edges_between(u, v))
            tes = sorted(target.edges_between(vmap[u], vmap[v]))
            if len(les) != len(tes):
                return
            for le, te in zip(les, tes):
                emap[le] = te
        # boundary edges: assign remaining target half-edges at each image
        per_vertex: List[Tuple[VertexId, List[Tuple[EdgeId, VertexId]], List[EdgeId]]] = []
        for v in order:
            bedges = sorted(lhs_bedges[v])
            remaining = [e for e in target.incident_edges(vmap[v]) if e not in emap.values()]
            remaining = sorted(remaining)
            if len(bedges) != len(remaining):
                return
            for e in remaining:
                x, y = target.edge_ends(e)
                far = y if x == vmap[v] else x
                if far in image:
                    return  # would leave an unmatched edge at a matched vertex
            if bedges:
                per_vertex.append((v, bedges, remaining))

        def assignments(i: int, attach: Dict[VertexId, Tuple[EdgeId, int]],
                        extra: Dict[EdgeId, EdgeId]) -> None:
            if i == len(per_vertex):
                full = dict(emap)
                full.update(extra)
                matches.append(Match(
                    rule_name=rule.name,
                    vertex_map=tuple(sorted(vmap.items())),
                    edge_map=tuple(sorted(full.items())),
                    boundary_attach=tuple(sorted(attach.items())),
                ))
                return
            v, bedges, remaining = per_vertex[i]
            for perm in itertools.permutations(remaining):
                a2 = dict(attach)
                x2 = dict(extra)
                for (le, bvert), te in zip(bedges, perm):
                    ends = target.edge_ends(te)
                    side = 1 if ends[0] == vmap[v] else 0
                    a2[bvert] = (te, side)
                    x2[le] = te
                assignments(i + 1, a2, x2)

        assignments(0, {}, {})

    def backtrack(i: int) -> None:
        if i == len(order):
            complete()
            return
        a = order[i]
        for t in cand_pool[a]:
            if t in used:
                continue
            if not edges_ok(a, t):
                continue
            vmap[a] = t
            used.add(t)
            backtrack(i + 1)
            del vmap[a]
            used.discard(t)

    backtrack(0)
    matches.sort(key=lambda m: m.key())
    return matches


def _revalidate(target: Diagram, rule: Rule, m: Match) -> None:
    lhs = rule.lhs
    vmap = m.vmap()
    emap = m.emap()
    attach = m.attach()
    try:
        if set(vmap) != set(lhs.interior()):
            raise StaleMatchError("vertex map does not cover the LHS interior")
        if len(set(vmap.values())) != len(vmap):
            raise StaleMatchError("vertex map not injective")
        for lv, tv in vmap.items():
            if (target.kind(tv), target.phase(tv)) != (lhs.kind(lv), lhs.phase(lv)):
                raise StaleMatchError(f"vertex {tv} no longer matches {lv}")
            if target.degree(tv) != lhs.degree(lv):
                raise StaleMatchError(f"vertex {tv} degree changed")
        if len(set(emap.values())) != len(emap):
            raise StaleMatchError("edge map not injective")
        for le, te in emap.items():
            lu, lv_ = lhs.edge_ends(le)
            tu, tv_ = target.edge_ends(te)
            limg = {vmap[x] for x in (lu, lv_) if x in vmap}
            if not limg <= {tu, tv_}:
                raise StaleMatchError(f"edge {te} endpoints changed")
        image = set(vmap.values())
        mapped = set(emap.values())
        for tv in image:
            for e in target.incident_edges(tv):
                if e not in mapped:
                    raise StaleMatchError(f"unmatched edge {e} at matched vertex {tv}")
        for b, (te, side) in attach.items():
            if te not in mapped:
                raise StaleMatchError(f"attachment edge {te} is not matched")
            if side not in (0, 1):
                raise StaleMatchError(f"bad attachment side {side}")
            if target.edge_ends(te)[side] in image:
                raise StaleMatchError(f"attachment of {b} points at a matched vertex")
    except KeyError as exc:  # missing vertex/edge ids
        raise StaleMatchError(f"match refers to a missing id: {exc}")


def apply_match(target: Diagram, rule: Rule, m: Match) -> Diagram:
    """Replace the matched subgraph by the rule's RHS."""
    _revalidate(target, rule, m)
    vmap = m.vmap()
    attach = m.attach()
    b = target.builder()

    # record attachment vertices before deleting anything
    attach_vertex: Dict[VertexId, VertexId] = {}
    for bvert, (te, side) in attach.items():
        attach_vertex[bvert] = target.edge_ends(te)[side]

    for te in sorted(m.emap().values()):
        b.remove_edge(te)
    for tv in sorted(vmap.values()):
        del b.vertices[tv]

    rhs = rule.rhs
    fresh: Dict[VertexId, VertexId] = {}
    for rv in rhs.interior():
        fresh[rv] = b.add_vertex(rhs.kind(rv), rhs.phase(rv))

    lhs_b = list(rule.lhs.inputs) + list(rule.lhs.outputs)
    rhs_b = list(rhs.inputs) + list(rhs.outputs)
    rb_to_attach = {rb: attach_vertex[lb] for rb, lb in zip(rhs_b, lhs_b)}

    def endpoint(v: VertexId) -> VertexId:
        return fresh[v] if v in fresh else rb_to_attach[v]

    for e in rhs.edges():
        u, v = rhs.edge_ends(e)
        b.add_edge(endpoint(u), endpoint(v))

    return b.build()


# -- proof traces -----------------------------------------------------------------


@dataclass(frozen=True)
class ProofStep:
    """One recorded step: an axiomatic rewrite, a structural pass, or a
    semantic normalisation."""

    kind: str  # "rewrite" | "pass" | "semantic"
    payload: dict

    def to_json_obj(self) -> dict:
        return {"kind": self.kind, **self.payload}

    @staticmethod
    def from_json_obj(obj: dict) -> "ProofStep":
        payload = {k: v for k, v in obj.items() if k != "kind"}
        return ProofStep(obj["kind"], payload)


class ProofTrace:
    """Rewrite history from an initial diagram to a final one; replayable."""

    def __init__(self, initial: Diagram):
        self.initial = initial
        self.steps: List[ProofStep] = []
        self.final: Diagram = initial

    def record_rewrite(self, rule: Rule, m: Match, result: Diagram) -> None:
        self.steps.append(ProofStep("rewrite", {"match": m.to_json_obj()}))
        self.final = result

    def record_pass(self, name: str, args: dict, before: Diagram, result: Diagram) -> None:
        affected = sorted(set(before.vertices()) ^ set(result.vertices()))
        self.steps.append(ProofStep(
            "pass", {"name": name, "args": args, "affected": affected}))
        self.final = result

    def record_semantic(self, payload: dict, result: Diagram) -> None:
        self.steps.append(ProofStep("semantic", dict(payload)))
        self.final = result

    def to_json_obj(self) -> dict:
        return {
            "initial": self.initial.to_json_obj(),
            "steps": [s.to_json_obj() for s in self.steps],
            "final": self.final.to_json_obj(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "ProofTrace":
        obj = json.loads(text)
        t = ProofTrace(Diagram.from_json_obj(obj["initial"]))
        t.steps = [ProofStep.from_json_obj(s) for s in obj["steps"]]
        t.final = Diagram.from_json_obj(obj["final"])
        return t


# populated by the normal-forms/optimiser modules; maps a semantic-step
# "op" field to a function (diagram, payload) -> diagram
SEMANTIC_REPLAYERS: Dict[str, Callable[[Diagram, dict], Diagram]] = {}


def replay(trace: ProofTrace, rules_by_name: Dict[str, Rule]) -> Diagram:
    """Re-execute a trace from its initial diagram; returns the final diagram.

    Raises ReplayDivergence if any step fails to re-apply or the result is not
    isomorphic to the recorded final diagram.
    """
    from .passes import PASSES

    d = trace.initial
    for i, step in enumerate(trace.steps):
        try:
            if step.kind == "rewrite":
                m = Match.from_json_obj(step.payload["match"])
                rule = rules_by_name.get(m.rule_name)
                if rule is None:
                    raise ReplayDivergence(f"step {i}: unknown rule {m.rule_name!r}")
                d = apply_match(d, rule, m)
            elif step.kind == "pass":
                fn = PASSES.get(step.payload["name"])
                if fn is None:
                    raise ReplayDivergence(f"step {i}: unknown pass")
                d = fn(d, **step.payload.get("args", {}))
            elif step.kind == "semantic":
                fn = SEMANTIC_REPLAYERS.get(step.payload.get("op"))
                if fn is None:
                    raise ReplayDivergence(f"step {i}: unknown semantic op")
                d = fn(d, step.payload)
            else:
                raise ReplayDivergence(f"step {i}: unknown step kind {step.kind!r}")
        except ReplayDivergence:
            raise
        except Exception as exc:
            raise ReplayDivergence(f"step {i} failed: {exc}") from exc
    if not d.iso_equal(trace.final):
        raise ReplayDivergence("replayed diagram differs from recorded final")
    return d


# -- strategy combinators ------------------------------------------------------------


def rewrite_first(rules: Sequence[Rule], d: Diagram,
                  trace: Optional[ProofTrace] = None,
                  accept: Optional[Callable[[Diagram], bool]] = None) -> Optional[Diagram]:
    """Apply the first match of the first rule that matches at all.

    With `accept`, results failing the predicate are skipped (the optimiser
    uses this to stay within diagrams that admit a causal flow)."""
    for rule in rules:
        for m in find_matches(rule, d):
            out = apply_match(d, rule, m)
            if accept is not None and not accept(out):
                continue
            if trace is not None:
                trace.record_rewrite(rule, m, out)
            return out
    return None


def rewrite_metric(rules: Sequence[Rule], d: Diagram, metric: Metric,
                   trace: Optional[ProofTrace] = None) -> Optional[Diagram]:
    """Apply the first match (rules in list order) that strictly reduces the metric."""
    base = metric(d)
    for rule in rules:
        for m in find_matches(rule, d):
            out = apply_match(d, rule, m)
            if metric(out) < base:
                if trace is not None:
                    trace.record_rewrite(rule, m, out)
                return out
    return None


def rewrite_targeted(rule: Rule, anchor: VertexId, d: Diagram,
                     target_fn: Callable[[Diagram], Optional[VertexId]],
                     trace: Optional[ProofTrace] = None,
                     accept: Optional[Callable[[Diagram], bool]] = None) -> Optional[Diagram]:
    """Apply the first match that sends the rule's anchor vertex to target_fn(d)."""
    if anchor not in rule.lhs.interior():
        raise RuleFormatError(f"anchor {anchor} is not interior to {rule.name}")
    t = target_fn(d)
    if t is None:
        return None
    for m in find_matches(rule, d):
        if m.vmap()[anchor] == t:
            out = apply_match(d, rule, m)
            if accept is not None and not accept(out):
                continue
            if trace is not None:
                trace.record_rewrite(rule, m, out)
            return out
    return None


@dataclass
class ReduceResult:
    diagram: Diagram
    steps: int
    fixpoint: bool


def reduce(strategy: Callable[[Diagram, Optional[ProofTrace]], Optional[Diagram]],
           d: Diagram, trace: Optional[ProofTrace] = None,
           max_steps: int = 10_000) -> ReduceResult:
    """Repeat a strategy until it returns None or the step budget runs out."""
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    steps = 0
    while steps < max_steps:
        out = strategy(d, trace)
        if out is None:
            return ReduceResult(d, steps, True)
        d = out
        steps += 1
    return ReduceResult(d, steps, False)
