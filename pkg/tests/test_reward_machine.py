"""Reward-machine core: DSL parsing, guard semantics, run semantics."""

import numpy as np
import pytest

from rmsprl.reward_machine import (
    And,
    Atom,
    DeterminismError,
    Not,
    Or,
    RewardMachine,
    RMParseError,
    RMValidationError,
    TrueGuard,
    enumerate_labels,
    eval_guard,
    parse_rm,
    rm_run,
    rm_step,
    rm_to_text,
    same_step_table,
)
from rmsprl.envs import builtin_machine


def L(*props):
    return frozenset(props)


@pytest.fixture(scope="module")
def two_door():
    return builtin_machine("two_door_8")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_two_door_machine_structure(two_door):
    assert set(two_door.states) == {"q0", "q1", "q2", "q3", "q4", "q5"}
    assert two_door.initial == "q0"
    assert two_door.accepting == {"q4"}
    assert set(two_door.alphabet) == {"d1", "b", "d2", "g", "w"}


def test_single_state_true_loop_is_valid():
    m = parse_rm(
        """
        alphabet: x
        state q0 initial
        edge q0 -> q0 on true reward 0
        """
    )
    assert rm_step(m, "q0", L("x")) == ("q0", 0.0)
    assert rm_step(m, "q0", L()) == ("q0", 0.0)


def test_overlapping_guards_rejected_at_first_ambiguous_label():
    # oracle: enumerate labels in declaration-bitmask order and evaluate the
    # guards directly; the first label satisfying several guards is {d1}
    text = """
    alphabet: d1, w
    state q0 initial
    state q1
    state q2
    edge q0 -> q1 on d1 reward 0
    edge q0 -> q2 on d1 | w reward 0
    edge q0 -> q0 on !(d1 | w) reward 0
    edge q1 -> q1 on true reward 0
    edge q2 -> q2 on true reward 0
    """
    guards = [Atom("d1"), Or(Atom("d1"), Atom("w")), Not(Or(Atom("d1"), Atom("w")))]
    first_bad = next(
        lab
        for lab in enumerate_labels(("d1", "w"))
        if sum(g.evaluate(lab) for g in guards) != 1
    )
    assert first_bad == L("d1")
    with pytest.raises(DeterminismError) as err:
        parse_rm(text)
    assert err.value.state == "q0"
    assert err.value.label == L("d1")
    assert err.value.n_matching == 2


def test_incomplete_state_rejected():
    with pytest.raises(DeterminismError) as err:
        parse_rm(
            """
            alphabet: a
            state q0 initial
            edge q0 -> q0 on a reward 1
            """
        )
    assert err.value.n_matching == 0


def test_syntax_error_reports_position():
    with pytest.raises(RMParseError) as err:
        parse_rm("alphabet: a\nstate q0 initial\nedge q0 -> on a reward 1\n")
    assert err.value.line == 3


def test_undeclared_proposition_rejected():
    with pytest.raises(RMParseError, match="undeclared"):
        parse_rm(
            """
            alphabet: a
            state q0 initial
            edge q0 -> q0 on b reward 0
            """
        )


def test_alphabet_cap_enforced():
    props = [f"p{i}" for i in range(17)]
    with pytest.raises(RMValidationError, match="maximum 16"):
        RewardMachine(["q0"], "q0", props, [("q0", TrueGuard(), "q0", 0.0)])


def test_comments_and_edge_order_irrelevant(two_door):
    shuffled = """
    alphabet: d1, b, d2, g, w   # props
    state q0 initial
    state q1
    state q2
    state q3
    state q4 accepting
    state q5
    edge q5 -> q5 on true reward 0
    edge q4 -> q4 on true reward 0
    edge q3 -> q3 on !(g | w | d1) reward 0
    edge q3 -> q5 on w | d1 reward 0
    edge q3 -> q4 on g & !(w | d1) reward 4
    edge q2 -> q2 on !(d2 | w) reward 0
    edge q2 -> q5 on w reward 0
    edge q2 -> q3 on d2 & !w reward 3
    edge q1 -> q1 on !(b | w | d2) reward 0
    edge q1 -> q5 on w | d2 reward 0
    edge q1 -> q2 on b & !(w | d2) reward 2
    edge q0 -> q0 on !(d1 | w | d2) reward 0
    edge q0 -> q5 on w | d2 reward 0
    edge q0 -> q1 on d1 & !(w | d2) reward 1
    """
    assert same_step_table(parse_rm(shuffled), two_door)


# ---------------------------------------------------------------------------
# guard evaluation
# ---------------------------------------------------------------------------


def test_guard_disjunction():
    g = Or(Atom("w"), Atom("d2"))
    assert eval_guard(g, L("w")) is True
    assert eval_guard(g, L("d2", "b")) is True
    assert eval_guard(g, L("b")) is False


def test_guard_true_on_empty_label():
    assert eval_guard(TrueGuard(), L()) is True


def test_guard_negated_disjunction_truth_table():
    g = Not(Or(Atom("d1"), Atom("w")))
    # truth-table oracle over the two referenced atoms
    for d1 in (False, True):
        for w in (False, True):
            label = L(*([p for p, on in (("d1", d1), ("w", w)) if on] + ["b"]))
            assert eval_guard(g, label) == (not (d1 or w))
    assert eval_guard(g, L("b")) is True


def test_guard_conjunction_and_negation():
    g = And(Atom("a"), Not(Atom("b")))
    assert eval_guard(g, L("a")) is True
    assert eval_guard(g, L("a", "b")) is False
    assert eval_guard(g, L()) is False


# ---------------------------------------------------------------------------
# step / run semantics
# ---------------------------------------------------------------------------


def test_step_examples(two_door):
    assert rm_step(two_door, "q1", L("w")) == ("q5", 0.0)
    assert rm_step(two_door, "q0", L("d1")) == ("q1", 1.0)
    for label in enumerate_labels(two_door.alphabet):
        assert rm_step(two_door, "q4", label) == ("q4", 0.0)


def test_run_subtask_chain(two_door):
    labels = [L(), L("d1"), L("b"), L("d2"), L("g")]
    # oracle: stepwise composition from the initial state
    q, expected = two_door.initial, []
    for lab in labels:
        q, r = rm_step(two_door, q, lab)
        expected.append(r)
    assert expected == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert rm_run(two_door, labels) == expected
    assert q == "q4"


def test_run_failure_path(two_door):
    labels = [L("d1"), L("w"), L("b")]
    q, expected = two_door.initial, []
    for lab in labels:
        q, r = rm_step(two_door, q, lab)
        expected.append(r)
    assert rm_run(two_door, labels) == expected == [1.0, 0.0, 0.0]
    assert q == "q5"


def test_run_empty_sequence(two_door):
    assert rm_run(two_door, []) == []


def test_run_length_preserved(two_door):
    rng = np.random.default_rng(1)
    alphabet = two_door.alphabet
    for _ in range(50):
        n = int(rng.integers(0, 30))
        labels = [
            frozenset(p for p in alphabet if rng.random() < 0.3) for _ in range(n)
        ]
        assert len(rm_run(two_door, labels)) == n


def test_absorbing_states_never_exit(two_door):
    rng = np.random.default_rng(2)
    for q_abs in ("q4", "q5"):
        q = q_abs
        for _ in range(100):
            label = frozenset(p for p in two_door.alphabet if rng.random() < 0.5)
            q, _ = rm_step(two_door, q, label)
            assert q == q_abs


def test_print_parse_round_trip(two_door):
    assert same_step_table(parse_rm(rm_to_text(two_door)), two_door)


def test_round_trip_randomized_machines():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n_props = int(rng.integers(1, 4))
        props = [f"p{i}" for i in range(n_props)]
        n_states = int(rng.integers(1, 4))
        states = [f"s{i}" for i in range(n_states)]
        # partition labels of each state among random targets: deterministic
        # by construction
        edges = []
        for q in states:
            for label in enumerate_labels(props):
                target = states[int(rng.integers(n_states))]
                guard = TrueGuard()
                for p in props:
                    term = Atom(p) if p in label else Not(Atom(p))
                    guard = And(guard, term)
                edges.append((q, guard, target, float(rng.integers(0, 5))))
        m = RewardMachine(states, states[0], props, edges)
        assert same_step_table(parse_rm(rm_to_text(m)), m)
