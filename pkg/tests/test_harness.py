from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rendezvous.adversaries import constant_assignment, random_scenario
from rendezvous.engine import Block, Scenario, run_scenario
from rendezvous.graph import gen_cycle, gen_path
from rendezvous.harness import (
    BoundContext,
    ConfigError,
    bound_T,
    check_claim_concurrency,
    check_theorem1,
    compute_alpha,
    core_subblocks,
    evaluate,
    format_csv,
    next_power_of_two,
    parse_config,
    parse_seeds,
    phases_at_end,
    run_experiment,
)
from rendezvous.strongrv import Action, EXPLO


def recursive_T(x, y, pt):
    if y == 1:
        return 4 * x * pt[1]
    return 2 * recursive_T(x, y // 2, pt) + 4 * x * y * pt[y]


def scenario(n, labels, tau, family=gen_path):
    g = family(n)
    return Scenario(g, labels, (0, 1), constant_assignment(g, tau, 1))


@pytest.mark.parametrize(
    "n, labels, tau, alpha",
    [(3, (5, 9), Fraction(5, 2), 8), (2, (1, 2), 1, 4), (9, (1, 3), 1, 16), (2, (1, 2), 17, 32)],
)
def test_alpha(n, labels, tau, alpha, table):
    ctx = compute_alpha(scenario(n, labels, tau), table)
    assert ctx.alpha == alpha
    assert ctx.bound == bound_T(4 * alpha, 4 * alpha, table)


def test_next_power_of_two():
    assert [next_power_of_two(x) for x in (0, 1, 2, 3, Fraction(5, 2), 8, 9)] == [1, 1, 2, 4, 4, 8, 16]


def test_bound_examples(table):
    assert bound_T(5, 1, table) == 4 * 5 * table[1]
    assert bound_T(5, 2, table) == 8 * 5 * (table[1] + table[2])
    assert bound_T(4, 1, table) == 32
    with pytest.raises(ValueError):
        bound_T(1, 3, table)


@pytest.mark.parametrize("y", [1, 2, 4, 8, 16])
def test_bound_closed_form_matches_recursion(y, table):
    for x in range(1, 65):
        assert bound_T(x, y, table) == recursive_T(x, y, table)


@given(st.lists(st.integers(1, 10**9), min_size=6, max_size=6), st.integers(1, 10**6))
def test_bound_recursion_any_table(values, x):
    pt = dict(zip((1, 2, 4, 8, 16, 32), values))
    for y in (1, 2, 4, 8, 16, 32):
        assert bound_T(x, y, pt) == recursive_T(x, y, pt)


def test_theorem_check_passes_on_k2(table):
    sc = scenario(2, (1, 2), 1)
    row, tr, rep, ctx = evaluate(sc, table)
    assert rep.met and row.theorem1 and row.ok
    assert row.meet_time <= ctx.bound
    assert "within bound" in check_theorem1(tr, rep, ctx).detail


def test_theorem_check_no_meeting(table):
    sc = scenario(2, (1, 2), 1)
    tr, rep = run_scenario(sc, table, horizon=10)
    res = check_theorem1(tr, rep, compute_alpha(sc, table))
    assert not res and "no meeting" in res.detail


def test_theorem_check_phase_too_late(table):
    sc = scenario(2, (1, 2), 1)
    tr, rep = run_scenario(sc, table)
    tight = BoundContext(2, 1, Fraction(1), 1, Fraction(10**9))
    res = check_theorem1(tr, rep, tight)
    assert not res and "Phase(4)" in res.detail


def test_theorem_check_time_too_late(table):
    sc = scenario(2, (1, 2), 1)
    tr, rep = run_scenario(sc, table)
    res = check_theorem1(tr, rep, BoundContext(2, 1, Fraction(1), 4, Fraction(100)))
    assert not res and "exceeds" in res.detail


def test_phases_at_end_requires_blocks(table):
    sc = scenario(2, (1, 2), 1)
    tr, _ = run_scenario(sc, table, horizon=5)
    tr.blocks[1].clear()
    with pytest.raises(ValueError):
        phases_at_end(tr)


def test_claim_not_reached(table):
    sc = random_scenario(0)
    row, tr, rep, ctx = evaluate(sc, table)
    claim = check_claim_concurrency(tr, ctx)
    if max(rep.reached_phase) < ctx.alpha:
        assert not claim.reached and "not reached" in claim.summary()


def test_claim_symmetric_k2(table):
    # identical speeds and wakeups make every sub-block line up
    row, tr, rep, ctx = evaluate(scenario(2, (1, 2), 1), table)
    assert ctx.alpha == 4 and rep.reached_phase == (4, 4)
    claim = check_claim_concurrency(tr, ctx)
    assert claim.reached and claim.all_concurrent
    assert [p[0] for p in claim.pairs] == list(range(1, len(claim.pairs) + 1))


def test_core_wait_splits_in_halves(table):
    sc = scenario(2, (1, 2), 1)
    tr, _ = run_scenario(sc, table, horizon=24)
    subs = core_subblocks(tr, 0, 1)
    # label 1, h = 1: Explo, Explo, then a 4-unit wait split 2 + 2
    (s3, e3), (s4, e4) = subs[3], subs[4]
    assert e3 - s3 == e4 - s4 == 2 and e3 == s4


def test_claim_detects_disjoint_pairs(table):
    sc = scenario(2, (1, 2), 1)
    tr, _ = run_scenario(sc, table, horizon=24)
    act = Action(EXPLO, size=1, phase=1, section="core", block=1, subblocks=(1,))
    # shift agent 1's first core exploration far away
    tr.blocks[1][:] = [Block(1, EXPLO, 10**6, 10**6 + 2, 1, act)]
    claim = check_claim_concurrency(tr, BoundContext(2, 1, Fraction(1), 1, Fraction(1)))
    assert claim.reached and not claim.all_concurrent
    assert "not concurrent: [1]" in claim.summary()


def test_config_parsing():
    cfg = parse_config("# demo\nseeds = 0-2, 7\ntau_max = 3/2  # comment\njobs=2\n")
    assert parse_seeds(cfg["seeds"]) == [0, 1, 2, 7]
    assert cfg["tau_max"] == "3/2" and cfg["strategy"] == "random"
    for bad in ("bogus=1", "seeds", "strategy=other", "n_min=x", "horizon=soon"):
        with pytest.raises(ConfigError):
            parse_config(bad)


def test_csv_deterministic_and_parallel_identical():
    cfg = parse_config("seeds=0-5\nn_max=5\n")
    first = format_csv(run_experiment(cfg))
    assert first == format_csv(run_experiment(cfg))
    assert format_csv(run_experiment({**cfg, "jobs": "2"})) == first
    lines = first.splitlines()
    assert len(lines) == 7 and lines[0].startswith("scenario_id,seed,n,")
    assert all(",true," in ln for ln in lines[1:])


def test_horizon_rows_flagged():
    rows = run_experiment(parse_config("seeds=0-1\nhorizon=1/16\n"))
    for r in rows:
        assert r.status == "horizon" and not r.ok
        assert r.meet_time is None and r.ratio is None
    text = format_csv(rows)
    assert text.count(",horizon") == 2


def test_sec4_rows():
    rows = run_experiment(parse_config("strategy=sec4\nseeds=0-3\nn_max=6\n"))
    assert all(r.lower_bound_ok and r.ok for r in rows)


def test_cycle_family_rows():
    rows = run_experiment(parse_config("family=cycle\nn_min=2\nseeds=0-3\n"))
    assert all(r.n >= 3 and r.ok for r in rows)


def test_evaluate_on_cycle(table):
    sc = scenario(5, (6, 11), 2, gen_cycle)
    row, *_ = evaluate(sc, table)
    assert row.ok and row.ratio < 1
