import json
import random

import numpy as np
import pytest

from zxcliff.circuit import circuit, gate, random_clifford_circuit, translate
from zxcliff.diagram import Diagram, X, Z
from zxcliff.errors import (ReplayDivergence, RuleFormatError, StaleMatchError)
from zxcliff.normal_forms import line_diagram
from zxcliff.rewrite import (ProofTrace, Rule, apply_match,
                             find_matches, reduce, replay, rewrite_first,
                             rewrite_metric, rewrite_targeted)
from zxcliff.semantics import interpret, scalar_free_equal


def t(*gates):
    width = 1 + max((w for g in gates for w in g.wires), default=0)
    return translate(circuit(width, *gates))


def wire_rule(name, lhs_seq, rhs_seq):
    return Rule(name, line_diagram(lhs_seq), line_diagram(rhs_seq))


GREEN_PI = wire_rule("GreenPi", [(Z, 2), (Z, 2)], [])


# -- rule validation ------------------------------------------------------------

def test_rule_boundary_mismatch():
    with pytest.raises(RuleFormatError):
        Rule("bad", line_diagram([(Z, 1)]), Diagram.wires(2))


def test_rule_rejects_bare_wire_lhs():
    with pytest.raises(RuleFormatError):
        Rule("bad", Diagram.wires(1), line_diagram([(Z, 0)]))


# -- matching ---------------------------------------------------------------------

def test_single_vertex_rule_match_count():
    # two candidate vertices; the matcher also returns both boundary
    # attachments per candidate, so four embeddings in total
    rule = wire_rule("flip", [(Z, 2)], [(X, 2)])
    ms = find_matches(rule, t(gate("Z", 0), gate("Z", 0)))
    assert len({m.vmap()[next(iter(m.vmap()))] for m in ms}) == 2
    assert len(ms) == 4


def test_match_respects_kind_and_phase():
    rule = wire_rule("s", [(Z, 1)], [(Z, 1)])
    assert not find_matches(rule, t(gate("Z", 0)))
    assert not find_matches(rule, t(gate("V", 0)))
    assert find_matches(rule, t(gate("S", 0)))


def test_match_degree_pruning():
    # an interior Z(0) of degree 3 (CNOT leg) never matches a degree-2 LHS
    rule = wire_rule("id0", [(Z, 0)], [(Z, 0)])
    assert not find_matches(rule, t(gate("CNOT", 0, 1)))


def test_no_match_on_empty_diagram():
    assert find_matches(GREEN_PI, Diagram.empty()) == []


def test_greenpicx_matches_raw_translation(rules_by_name):
    # the commute rule embeds into the plain translation of [Z 0, CNOT 0 1]
    target = t(gate("Z", 0), gate("CNOT", 0, 1))
    ms = find_matches(rules_by_name["GreenPiCx"], target)
    assert len(ms) >= 1


def test_match_determinism():
    target = t(gate("Z", 0), gate("Z", 0), gate("Z", 0))
    ms1 = find_matches(GREEN_PI, target)
    ms2 = find_matches(GREEN_PI, target)
    assert [m.key() for m in ms1] == [m.key() for m in ms2]


# -- application ---------------------------------------------------------------------

def test_apply_identity_removal_instance():
    rule = Rule("zz-elim", line_diagram([(Z, 2), (Z, 2)]), line_diagram([]))
    target = t(gate("Z", 0), gate("Z", 0))
    out = apply_match(target, rule, find_matches(rule, target)[0])
    assert out.iso_equal(Diagram.identity_wire())


def test_apply_preserves_boundaries():
    rule = GREEN_PI
    target = t(gate("S", 0), gate("Z", 0), gate("Z", 0), gate("V", 0))
    out = apply_match(target, rule, find_matches(rule, target)[0])
    assert out.signature() == target.signature()
    assert out.inputs == target.inputs and out.outputs == target.outputs
    assert scalar_free_equal(interpret(out), interpret(target))


def test_apply_cx_cancellation(rules_by_name):
    target = t(gate("CNOT", 0, 1), gate("CNOT", 0, 1))
    rule = rules_by_name["Cx"]
    out = apply_match(target, rule, find_matches(rule, target)[0])
    assert out.iso_equal(Diagram.wires(2))
    assert scalar_free_equal(interpret(out), np.eye(4))


def test_stale_match_detected():
    target = t(gate("Z", 0), gate("Z", 0))
    m = find_matches(GREEN_PI, target)[0]
    other = t(gate("Z", 0), gate("V", 0))
    with pytest.raises(StaleMatchError):
        apply_match(other, GREEN_PI, m)


def test_rewrites_are_sound_at_every_match(rules_by_name):
    rng = random.Random(55)
    rules = [rules_by_name[n] for n in
             ("Cx", "GreenPiCx", "GreenCxCommute", "C22Plus1Bit", "GreenPi2")]
    checked = 0
    for seed in range(12):
        c = random_clifford_circuit(2 + seed % 2, 10, seed)
        d = translate(c)
        ref = interpret(d)
        for rule in rules:
            for m in find_matches(rule, d)[:4]:
                out = apply_match(d, rule, m)
                assert scalar_free_equal(interpret(out), ref), (seed, rule.name)
                checked += 1
    assert checked > 20


# -- combinators -----------------------------------------------------------------------

def test_rewrite_first_rule_order():
    r1 = wire_rule("never", [(Z, 3)], [(Z, 3)])
    r2 = GREEN_PI
    target = t(gate("Z", 0), gate("Z", 0))
    out = rewrite_first([r1, r2], target)
    assert out is not None and out.iso_equal(Diagram.identity_wire())


def test_rewrite_first_none_when_nothing_matches():
    assert rewrite_first([GREEN_PI], t(gate("S", 0))) is None


def test_rewrite_first_deterministic():
    target = t(gate("Z", 0), gate("Z", 0), gate("Z", 0))
    t1 = ProofTrace(target)
    t2 = ProofTrace(target)
    rewrite_first([GREEN_PI], target, t1)
    rewrite_first([GREEN_PI], target, t2)
    assert t1.to_json() == t2.to_json()


def test_rewrite_metric_vertex_count():
    metric = lambda d: len(d.interior())
    rule = Rule("zz-elim", line_diagram([(Z, 2), (Z, 2)]), line_diagram([]))
    target = t(gate("Z", 0), gate("Z", 0))
    out = rewrite_metric([rule], target, metric)
    assert out is not None and out.iso_equal(Diagram.identity_wire())


def test_rewrite_metric_rejects_increases():
    grow = Rule("grow", line_diagram([(Z, 2)]), line_diagram([(Z, 2), (Z, 2), (Z, 2)]))
    target = t(gate("Z", 0))
    assert rewrite_metric([grow], target, lambda d: len(d.interior())) is None


def test_rewrite_targeted():
    rule = wire_rule("zpi-to-xpi", [(Z, 2)], [(X, 2)])
    anchor = rule.lhs.interior()[0]
    target = t(gate("Z", 0), gate("Z", 0))
    second = target.interior()[1]
    out = rewrite_targeted(rule, anchor, target, lambda d: second)
    assert out is not None
    assert out.kind(target.interior()[0]) == Z
    assert any(out.kind(v) == X for v in out.interior())


def test_rewrite_targeted_no_target():
    rule = wire_rule("zpi-to-xpi", [(Z, 2)], [(X, 2)])
    anchor = rule.lhs.interior()[0]
    out = rewrite_targeted(rule, anchor, t(gate("Z", 0)), lambda d: None)
    assert out is None


def test_rewrite_targeted_absent_anchor_match():
    rule = wire_rule("zpi-to-xpi", [(Z, 2)], [(X, 2)])
    anchor = rule.lhs.interior()[0]
    target = t(gate("S", 0))
    tr = ProofTrace(target)
    out = rewrite_targeted(rule, anchor, target, lambda d: target.interior()[0], tr)
    assert out is None and not tr.steps


def test_reduce_chain_of_pauli_pairs():
    target = t(*(gate("Z", 0) for _ in range(6)))
    res = reduce(lambda d, tr: rewrite_first([GREEN_PI], d, tr), target)
    assert res.fixpoint and res.steps == 3
    assert res.diagram.iso_equal(Diagram.identity_wire())


def test_reduce_budget():
    flip = Rule("flip", line_diagram([(Z, 2)]), line_diagram([(X, 2)]))
    flop = Rule("flop", line_diagram([(X, 2)]), line_diagram([(Z, 2)]))
    res = reduce(lambda d, tr: rewrite_first([flip, flop], d, tr),
                 t(gate("Z", 0)), max_steps=7)
    assert not res.fixpoint and res.steps == 7


def test_reduce_fixpoint_zero_steps():
    res = reduce(lambda d, tr: rewrite_first([GREEN_PI], d, tr), t(gate("S", 0)))
    assert res.fixpoint and res.steps == 0


def test_reduce_s4_with_always_rules(ruleset):
    rot = [r for r in ruleset.always if r.name.split(":")[0] not in ("Euler", "H")]
    target = t(*(gate("S", 0) for _ in range(4)))
    res = reduce(lambda d, tr: rewrite_first(rot, d, tr), target)
    assert res.fixpoint
    assert res.diagram.iso_equal(Diagram.identity_wire())


def test_cc1_members_fixed_under_loop_rules(ruleset, cc1):
    rot = [r for r in ruleset.always if r.name.split(":")[0] not in ("Euler", "H")]
    for m in cc1.members:
        assert rewrite_first(rot, m) is None


# -- proof traces --------------------------------------------------------------------

def test_empty_trace_replay(rules_by_name):
    d = t(gate("S", 0))
    tr = ProofTrace(d)
    assert replay(tr, rules_by_name).iso_equal(d)


def test_trace_replay_round(rules_by_name):
    target = t(gate("CNOT", 0, 1), gate("CNOT", 0, 1), gate("S", 0))
    tr = ProofTrace(target)
    d = target
    while True:
        out = rewrite_first([rules_by_name["Cx"], rules_by_name["GreenPi2"]], d, tr)
        if out is None:
            break
        d = out
    assert tr.final.iso_equal(d)
    assert replay(tr, rules_by_name).iso_equal(d)


def test_trace_json_round_trip(rules_by_name):
    target = t(gate("CNOT", 0, 1), gate("CNOT", 0, 1))
    tr = ProofTrace(target)
    rewrite_first([rules_by_name["Cx"]], target, tr)
    text = tr.to_json()
    again = ProofTrace.from_json(text)
    assert again.to_json() == text
    assert replay(again, rules_by_name).iso_equal(tr.final)


def test_corrupted_trace_raises(rules_by_name):
    target = t(gate("CNOT", 0, 1), gate("CNOT", 0, 1))
    tr = ProofTrace(target)
    rewrite_first([rules_by_name["Cx"]], target, tr)
    obj = json.loads(tr.to_json())
    obj["steps"][0]["match"]["rule"] = "Renamed"
    bad = ProofTrace.from_json(json.dumps(obj))
    with pytest.raises(ReplayDivergence):
        replay(bad, rules_by_name)


def test_trace_detects_tampered_final(rules_by_name):
    target = t(gate("CNOT", 0, 1), gate("CNOT", 0, 1))
    tr = ProofTrace(target)
    rewrite_first([rules_by_name["Cx"]], target, tr)
    tr.final = t(gate("S", 0), gate("S", 0))
    with pytest.raises(ReplayDivergence):
        replay(tr, rules_by_name)
