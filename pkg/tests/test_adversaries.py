from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rendezvous.adversaries import (
    StrategySpec,
    assignment_random,
    build_assignment,
    constant_assignment,
    delay_later,
    format_scenario,
    make_graph,
    parse_scenario,
    probe_first_move_delay,
    random_scenario,
    scenario_sec4,
)
from rendezvous.graph import gen_cycle, gen_path, gen_random_connected
from rendezvous.strongrv import EXPLO, WAIT, Action


def test_integer_times_with_unit_denominator(table):
    a = assignment_random(gen_random_connected(6, 2), 9, 16, 1, pt=table)
    for times in a.times:
        assert all(t.denominator == 1 and 1 <= t <= 16 for t in times.values())
    assert all(w.denominator == 1 for w in a.wakeup)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), tau=st.fractions(Fraction(1, 8), 20), den=st.integers(1, 8))
def test_random_assignment_ranges(seed, tau, den, table):
    if tau * den < 1:
        with pytest.raises(ValueError):
            assignment_random(gen_cycle(4), seed, tau, den, pt=table)
        return
    a = assignment_random(gen_cycle(4), seed, tau, den, pt=table)
    for times in a.times:
        assert all(0 < t <= tau and t.denominator <= den for t in times.values())
    assert min(a.wakeup) == 0
    assert 0 <= max(a.wakeup) <= tau * table[4]


def test_random_assignment_deterministic(table):
    g = gen_random_connected(7, 1)
    assert assignment_random(g, 4, 16, 8, pt=table) == assignment_random(g, 4, 16, 8, pt=table)
    assert assignment_random(g, 4, 16, 8, pt=table) != assignment_random(g, 5, 16, 8, pt=table)
    assert random_scenario(12) == random_scenario(12)


def test_random_scenario_contract():
    for seed in range(50):
        sc = random_scenario(seed)
        sc.validate()
        assert 2 <= sc.graph.node_count <= 8
        assert all(1 <= x <= 1024 for x in sc.labels)


def test_constant_and_delay():
    g = gen_path(3)
    a = constant_assignment(g, 2, Fraction(1, 2), (0, 3))
    assert set(a.times[0].values()) == {2} and set(a.times[1].values()) == {Fraction(1, 2)}
    assert delay_later(a, 4).wakeup == (0, 7)
    assert a.tau == 2 and a.tau_min == Fraction(1, 2)


def test_build_assignment(table):
    g = gen_cycle(5)
    fixed = StrategySpec("fixed", t1=Fraction(1), t2=Fraction(3))
    assert build_assignment(fixed, g) == constant_assignment(g, 1, 3)
    nested = StrategySpec("delay-later", base=fixed, extra_delay=Fraction(5))
    assert build_assignment(nested, g).wakeup == (0, 5)
    rand = StrategySpec("random", seed=3, tau_max=Fraction(4), den_bound=2)
    assert build_assignment(rand, g, table) == assignment_random(g, 3, 4, 2, pt=table)
    with pytest.raises(ValueError):
        build_assignment(StrategySpec("sec4"), g)
    with pytest.raises(ValueError):
        StrategySpec("fixed", t1=Fraction(0))


def test_probe_strongrv_moves_first(table):
    assert probe_first_move_delay(1, table) == 0
    assert probe_first_move_delay(999, table) == 0


def _waits_first(label, pt):
    yield Action(WAIT, duration=Fraction(5), phase=1, section="init")
    yield Action(EXPLO, size=1, phase=1, section="init")


def test_probe_hypothetical_algorithm(table):
    assert probe_first_move_delay(1, table, algorithm=_waits_first) == 5


def test_sec4_alignment(table):
    g = gen_cycle(4)
    sc = scenario_sec4(g, (3, 7), (0, 2), 1, 4, table)
    assert sc.assignment.wakeup == (0, 0)
    sc = scenario_sec4(g, (3, 7), (0, 2), 1, 4, table, algorithm=_waits_first)
    # both wait 5 before moving, so both still depart together
    assert sc.assignment.wakeup == (0, 0)


def test_sec4_alignment_unequal_delays(table):
    def by_label(label, pt):
        yield Action(WAIT, duration=Fraction(label), phase=1, section="init")
        yield Action(EXPLO, size=1, phase=1, section="init")

    sc = scenario_sec4(gen_path(2), (2, 9), (0, 1), 3, 1, table, algorithm=by_label)
    # agent 1 is faster; its first departure at 9 is matched by agent 0 waking at 7
    assert sc.assignment.wakeup == (7, 0)


def test_make_graph():
    assert make_graph("path", 4, 0) == gen_path(4)
    assert make_graph("random", 5, 3) == gen_random_connected(5, 3)
    with pytest.raises(ValueError):
        make_graph("torus", 4, 0)


def test_scenario_roundtrip():
    for seed in range(10):
        sc = random_scenario(seed)
        assert parse_scenario(format_scenario(sc)) == sc


def test_scenario_graph_file(tmp_path):
    g = gen_cycle(3)
    (tmp_path / "g.txt").write_text(g.to_text())
    text = "# triangle\ngraph-file g.txt\n4 9\n0 1\n0 1.5\n0 1 1 2\n1 2 1/2 2\n0 2 3 2\n"
    sc = parse_scenario(text, tmp_path)
    assert sc.graph == g
    assert sc.assignment.wakeup == (0, Fraction(3, 2))
    assert sc.assignment.times[0][(1, 2)] == Fraction(1, 2)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "nope\n",
        "graph\n2 1\n0 0 1 0\n1 2\n",
        "graph\n2 1\n0 0 1 0\n1 2\n0 1\n0 0\n0 1 1\n",
        "graph\n2 1\n0 0 1 0\n1 2\n0 1\n0 0\n0 1 1 1\n1 0 1 1\n",
    ],
)
def test_scenario_parse_errors(text):
    with pytest.raises(ValueError):
        parse_scenario(text)
