import random

import pytest
from hypothesis import given, settings, strategies as st

from shiftsbst.corpus import shipped
from shiftsbst.fitness import ComparisonOp, branch_distance
from shiftsbst.program import (ProgramError, execute, format_program, make_objective,
                               make_targets, parse_condition, parse_program, target_fitness)

NESTED = """\
# comment
program nested
category mixed
inputs a b
domain -50 50
domain b 0 10
constants 3
expect 4
if b0: a > 3
    if b1: a + b == 20
else:
    if b2 [no-false]: abs(a) >= 0
"""


def test_parse_structure():
    p = parse_program(NESTED)
    assert p.inputs == ["a", "b"] and p.domain == [(-50, 50), (0, 10)]
    assert p.constants == [3] and p.expected_coverable == 4
    keys = [t.key for t in make_targets(p)]
    assert keys == ["b0:T", "b0:F", "b1:T", "b1:F", "b2:T"]
    t = {t.key: t for t in make_targets(p)}
    assert t["b1:T"].guard_chain == (("b0", True),)
    assert t["b2:T"].guard_chain == (("b0", False),)


def test_format_round_trip():
    for p in shipped() + [parse_program(NESTED)]:
        q = parse_program(format_program(p))
        assert format_program(q) == format_program(p)
        assert [t.key for t in make_targets(q)] == [t.key for t in make_targets(p)]


@pytest.mark.parametrize("bad", [
    "program x\ninputs a\ndomain 0 1\nif b0: a ** 2 > 1\n",
    "program x\ninputs a\ndomain 0 1\nif b0: q > 1\n",
    "program x\ninputs a\nif b0: a > 1\n",
    "program x\ninputs a\ndomain 0 1\nif b0: a > 1\nif b0: a < 1\n",
    "program x\ninputs a\ndomain 0 1\nif b0: a > 1\nelse:\n",
    "program x\ninputs a\ndomain 0 1\nbogus 3\n",
    "program x\ninputs a\ndomain 0 1\nif b0 [maybe]: a > 1\n",
    "program x\ninputs a\ndomain 0 1\nif b0: __import__('os')\n",
])
def test_rejects_malformed(bad):
    with pytest.raises(ProgramError):
        parse_program(bad)


def test_compiled_compare_matches_branch_distance():
    for op in ComparisonOp:
        run = parse_condition(f"a {op.value} b", ["a", "b"]).compile()
        for a in range(-20, 21):
            for b in range(-20, 21):
                o, dt, df = run((a, b))
                assert o == op.holds(a, b)
                assert dt == branch_distance(a, b, op, True)
                assert df == branch_distance(a, b, op, False)


def test_boolean_combinations():
    run = parse_condition("a > 0 and not b > 5 or a == -7", ["a", "b"]).compile()
    for a in range(-10, 11):
        for b in range(0, 11):
            o, dt, df = run((a, b))
            assert o == ((a > 0 and not b > 5) or a == -7)
            assert (dt == 0) == o and (df == 0) == (not o)


def test_chained_comparison_is_conjunction():
    run = parse_condition("0 < a <= 5", ["a"]).compile()
    assert [run((v,))[0] for v in range(-1, 8)] == [0 < v <= 5 for v in range(-1, 8)]


def test_arithmetic_fault_is_program_error():
    p = parse_program("program x\ninputs a b\ndomain -5 5\nif b0: a // b == 1\n")
    with pytest.raises(ProgramError):
        execute(p, (1, 0))


def test_trace_consistency_on_shipped_corpus():
    rng = random.Random(0)
    for p in shipped():
        for _ in range(50):
            x = tuple(rng.randint(lo, hi) for lo, hi in p.domain)
            try:
                trace = execute(p, x)
            except ProgramError:
                continue
            for r in trace.values():
                assert (r.d_true == 0) == r.outcome and (r.d_false == 0) == (not r.outcome)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_fast_objective_equals_reference(data):
    progs = shipped()
    p = data.draw(st.sampled_from(progs))
    t = data.draw(st.sampled_from(make_targets(p)))
    x = tuple(data.draw(st.integers(lo, hi)) for lo, hi in p.domain)
    try:
        ref = target_fitness(p, t, x).value
    except ProgramError:
        with pytest.raises(ProgramError):
            make_objective(p, t)(x)
        return
    assert make_objective(p, t)(x) == ref
