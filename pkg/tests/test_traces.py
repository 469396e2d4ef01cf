"""Message-trace posterior and metric tests."""

import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpwanleak import (
    AnomalyCountDistance,
    CardinalityDistance,
    Event,
    EventSet,
    FillToMechanism,
    IdentityMechanism,
    InconsistentObservationError,
    MessageTrace,
    TableMechanism,
    TracePrior,
    average_error,
    average_error_mc,
    chi_square_threshold,
    conditional_entropy,
    conditional_entropy_mc,
    dispersion,
    distance,
    enumerate_observables,
    load_fixture,
    optimal_guess,
    posterior,
    posterior_table,
)

WINDOW = (0.0, 3.0)
# two-trace prior: {1} at 0.6, {1,2} at 0.4, filled to {1,2}
PRIOR = TracePrior({(1.0,): 0.6, (1.0, 2.0): 0.4}, WINDOW)
FILL = FillToMechanism([1.0, 2.0])
CARD = CardinalityDistance()


def test_event_set_validation():
    with pytest.raises(ValueError):
        Event(2.0, 1.0)
    with pytest.raises(ValueError):
        EventSet((0.0, 10.0), (Event(1.0, 2.0), Event(1.0, 3.0)))
    with pytest.raises(ValueError):
        EventSet((0.0, 2.0), (Event(1.0, 5.0),))
    es = EventSet((0.0, 10.0), (Event(1.0, 2.0), Event(4.0, 4.5)))
    assert es.to_trace().timestamps == (1.0, 4.0)
    assert es.to_trace().kind == "real"


def test_message_trace_validation():
    with pytest.raises(ValueError):
        MessageTrace(WINDOW, (5.0,))
    with pytest.raises(ValueError):
        MessageTrace(WINDOW, (2.0, 1.0))
    with pytest.raises(ValueError):
        MessageTrace(WINDOW, (1.0, 1.0))
    with pytest.raises(ValueError):
        MessageTrace(WINDOW, (1.0,), kind="imaginary")
    merged = MessageTrace(WINDOW, (1.0,)).merge(MessageTrace(WINDOW, (0.5, 1.0), "dummy"))
    assert merged.timestamps == (0.5, 1.0)
    assert merged.kind == "observed"


def test_prior_validation():
    with pytest.raises(ValueError):
        TracePrior({(0.5,): 1.0}, WINDOW)  # off the tick grid
    with pytest.raises(ValueError):
        TracePrior({(1.0,): 0.7}, WINDOW)  # masses do not sum to 1
    with pytest.raises(ValueError):
        TracePrior({(1.0,): -0.5, (2.0,): 1.5}, WINDOW)
    with pytest.raises(ValueError):
        TracePrior({(4.0,): 1.0}, WINDOW)  # outside window
    # list input with duplicate canonical form
    with pytest.raises(ValueError):
        TracePrior({(1.0, 2.0): 0.5, (2.0, 1.0): 0.5}, WINDOW)
    fine = TracePrior({(0.5,): 1.0}, WINDOW, tick=0.5)
    assert fine.support == ((0.5,),)


def test_prior_support_and_entropy():
    p = TracePrior({(2.0,): 0.5, (1.0,): 0.3, (): 0.2}, WINDOW)
    assert p.support == ((), (1.0,), (2.0,))  # lexicographic
    assert p.mass((1.0,)) == 0.3
    assert p.mass((3.0,)) == 0.0
    assert PRIOR.entropy_bits() == pytest.approx(
        -(0.6 * math.log2(0.6) + 0.4 * math.log2(0.4)))
    # zero-mass entries are dropped
    q = TracePrior({(1.0,): 1.0, (2.0,): 0.0}, WINDOW)
    assert q.support == ((1.0,),)
    a = p.sample(7)
    assert a == p.sample(7)
    assert a in p.support


def test_identity_mechanism():
    m = IdentityMechanism()
    assert m.mass((1.0,), (1.0,)) == 1.0
    assert m.mass((1.0, 2.0), (1.0,)) == 0.0
    assert m.outputs((1.0,)) == [((1.0,), 1.0)]
    assert m.sample((1.0,), 0) == (1.0,)


def test_fill_to_mechanism_union():
    assert FILL.outputs(()) == [((1.0, 2.0), 1.0)]
    assert FILL.outputs((1.0,)) == [((1.0, 2.0), 1.0)]
    # reals outside the target stay in the output
    assert FILL.outputs((0.0, 1.0)) == [((0.0, 1.0, 2.0), 1.0)]
    assert FILL.mass((1.0, 2.0), (1.0,)) == 1.0
    assert FILL.mass((1.0,), (1.0,)) == 0.0


def test_table_mechanism():
    rows = {
        (1.0,): {(1.0,): 0.5, (1.0, 2.0): 0.5},
        (): {(): 1.0},
    }
    m = TableMechanism(rows)
    assert m.mass((1.0, 2.0), (1.0,)) == 0.5
    assert m.mass((2.0,), ()) == 0.0
    assert m.outputs((1.0,)) == [((1.0,), 0.5), ((1.0, 2.0), 0.5)]
    with pytest.raises(ValueError):
        TableMechanism({(1.0,): {(1.0,): 0.7}})  # row sums to 0.7
    with pytest.raises(ValueError):
        TableMechanism({(1.0,): {(2.0,): 1.0}})  # output loses the real trace
    with pytest.raises(ValueError):
        m.mass((1.0,), (3.0,))  # no row for that real trace


def test_cardinality_distance():
    assert CARD((1.0, 2.0), ()) == 2.0
    assert CARD((1.0,), (2.0,)) == 0.0
    assert distance("cardinality-difference")((1.0,), ()) == 1.0
    with pytest.raises(ValueError):
        distance("hamming")


def test_anomaly_count_distance():
    window = (0.0, 10.0)
    d = AnomalyCountDistance(window, slot_width=1.0, slots=10, alpha=0.05)
    burst = tuple(2.0 + 0.05 * k for k in range(12))  # 12 messages in slot 2
    # cross-check the flag decision against the dispersion test itself
    counts = [0] * 10
    counts[2] = 12
    stat = 9 * dispersion(counts).dispersion
    assert stat > chi_square_threshold(10, 0.05)
    assert d(burst, ()) == 1.0
    assert d(burst, burst) == 0.0
    assert d((), ()) == 0.0  # empty intervals never flag
    via_factory = distance("anomaly-count-difference", window=window,
                           slot_width=1.0, slots=10)
    assert via_factory(burst, ()) == 1.0
    with pytest.raises(ValueError):
        AnomalyCountDistance((0.0, 5.0), slot_width=1.0, slots=10)


def test_posterior_values():
    assert posterior(PRIOR, FILL, (1.0, 2.0), (1.0,)) == pytest.approx(0.6)
    assert posterior(PRIOR, FILL, (1.0, 2.0), (1.0, 2.0)) == pytest.approx(0.4)
    # candidates outside the observation have zero posterior
    assert posterior(PRIOR, FILL, (1.0, 2.0), (0.0,)) == 0.0
    # empty trace is a subset but carries no prior mass here
    assert posterior(PRIOR, FILL, (1.0, 2.0), ()) == 0.0


def test_posterior_inconsistent_observation():
    with pytest.raises(InconsistentObservationError):
        posterior(PRIOR, FILL, (0.5,), (1.0,))
    with pytest.raises(InconsistentObservationError):
        posterior_table(PRIOR, FILL, (1.0,))  # fill-to never emits a bare {1}


def test_posterior_table_normalizes():
    table = posterior_table(PRIOR, FILL, (1.0, 2.0))
    assert set(table) == {(1.0,), (1.0, 2.0)}
    assert math.fsum(table.values()) == pytest.approx(1.0, abs=1e-12)


def test_enumerate_observables():
    assert enumerate_observables(PRIOR, FILL) == {(1.0, 2.0): pytest.approx(1.0)}
    ident = enumerate_observables(PRIOR, IdentityMechanism())
    assert ident[(1.0,)] == pytest.approx(0.6)
    assert ident[(1.0, 2.0)] == pytest.approx(0.4)


def test_optimal_guess_lex_tie_break():
    prior = TracePrior({(): 0.25, (1.0,): 0.25, (2.0,): 0.25, (1.0, 2.0): 0.25},
                       WINDOW)
    guess, cost = optimal_guess(prior, FillToMechanism([1.0, 2.0]), (1.0, 2.0), CARD)
    # both singletons cost 0.5; lexicographic order picks {1}
    assert guess == (1.0,)
    assert cost == pytest.approx(0.5)


def test_optimal_guess_too_many_messages():
    big = tuple(float(k) for k in range(21))
    prior = TracePrior({big: 1.0}, (0.0, 30.0))
    with pytest.raises(ValueError):
        optimal_guess(prior, IdentityMechanism(), big, CARD)


def test_average_error_exact_hand_values():
    # single observable {1,2}: best guess {1} errs only on the 0.4 branch
    assert average_error(PRIOR, FILL, CARD, method="exact") == pytest.approx(0.4)
    # identity channel leaks everything
    assert average_error(PRIOR, IdentityMechanism(), CARD, method="exact") == 0.0
    uniform = TracePrior({(): 0.25, (1.0,): 0.25, (2.0,): 0.25, (1.0, 2.0): 0.25},
                         WINDOW)
    assert average_error(uniform, FillToMechanism([1.0, 2.0]), CARD,
                         method="exact") == pytest.approx(0.5)


def test_conditional_entropy_exact_hand_values():
    assert conditional_entropy(PRIOR, FILL, method="exact") == pytest.approx(
        PRIOR.entropy_bits(), abs=1e-12)
    assert conditional_entropy(PRIOR, IdentityMechanism(), method="exact") \
        == pytest.approx(0.0, abs=1e-12)
    uniform = TracePrior({(): 0.25, (1.0,): 0.25, (2.0,): 0.25, (1.0, 2.0): 0.25},
                         WINDOW)
    assert conditional_entropy(uniform, FillToMechanism([1.0, 2.0]),
                               method="exact") == pytest.approx(2.0, abs=1e-12)


def test_auto_method_matches_exact():
    assert average_error(PRIOR, FILL, CARD) == average_error(
        PRIOR, FILL, CARD, method="exact")
    assert conditional_entropy(PRIOR, FILL) == conditional_entropy(
        PRIOR, FILL, method="exact")


def test_mc_estimators_agree_with_exact():
    exact_ae = average_error(PRIOR, FILL, CARD, method="exact")
    ae, se = average_error_mc(PRIOR, FILL, CARD, budget=20_000, seed=11)
    assert abs(ae - exact_ae) <= 4 * se + 1e-12
    exact_ce = conditional_entropy(PRIOR, FILL, method="exact")
    ce, se = conditional_entropy_mc(PRIOR, FILL, budget=20_000, seed=12)
    assert abs(ce - exact_ce) <= 4 * se + 1e-12


def test_mc_with_random_table_mechanism():
    rows = {
        (1.0,): {(1.0,): 0.5, (1.0, 2.0): 0.5},
        (2.0,): {(2.0,): 0.25, (1.0, 2.0): 0.75},
    }
    prior = TracePrior({(1.0,): 0.5, (2.0,): 0.5}, WINDOW)
    mech = TableMechanism(rows)
    exact = average_error(prior, mech, CARD, method="exact")
    ae, se = average_error_mc(prior, mech, CARD, budget=20_000, seed=13)
    assert abs(ae - exact) <= 4 * se + 1e-12
    with pytest.raises(ValueError):
        average_error_mc(prior, mech, CARD, budget=0)


def test_mc_methods_reject_unknown():
    with pytest.raises(ValueError):
        average_error(PRIOR, FILL, CARD, method="telepathy")
    with pytest.raises(ValueError):
        conditional_entropy(PRIOR, FILL, method="telepathy")


def test_load_fixture_forms(repo_root):
    path = repo_root / "fixtures" / "fillto_two_messages.json"
    fx = load_fixture(path)
    assert fx.name == "fillto_two_messages"
    assert fx.prior.support == ((1.0,), (1.0, 2.0))
    with open(path) as fh:
        fx2 = load_fixture(fh)
    assert fx2.prior.support == fx.prior.support
    doc = json.loads(path.read_text())
    fx3 = load_fixture(doc)
    assert fx3.prior.support == fx.prior.support
    assert posterior(fx.prior, fx.mechanism, (1.0, 2.0), (1.0,)) == pytest.approx(0.6)


def test_load_fixture_mechanism_specs():
    base = {"tick": 1.0, "window": [0.0, 3.0],
            "prior": [{"trace": [1.0], "p": 1.0}]}
    ident = load_fixture({**base, "mechanism": "identity"})
    assert ident.mechanism.outputs((1.0,)) == [((1.0,), 1.0)]
    table = load_fixture({**base, "mechanism": {
        "type": "table",
        "rows": [{"real": [1.0],
                  "outputs": [{"observed": [1.0], "q": 0.5},
                              {"observed": [1.0, 2.0], "q": 0.5}]}]}})
    assert table.mechanism.mass((1.0, 2.0), (1.0,)) == 0.5
    with pytest.raises(ValueError):
        load_fixture({**base, "mechanism": {"type": "wormhole"}})
    with pytest.raises(ValueError):
        load_fixture({**base, "mechanism": 7})


@st.composite
def small_priors(draw):
    grid = [0.0, 1.0, 2.0, 3.0]
    all_subsets = []
    for mask in range(16):
        all_subsets.append(tuple(grid[i] for i in range(4) if mask >> i & 1))
    picked = draw(st.lists(st.sampled_from(all_subsets), min_size=1, max_size=6,
                           unique=True))
    weights = draw(st.lists(st.integers(1, 9), min_size=len(picked),
                            max_size=len(picked)))
    total = sum(weights)
    return TracePrior({t: w / total for t, w in zip(picked, weights)}, (0.0, 3.0))


@settings(max_examples=25, deadline=None)
@given(prior=small_priors())
def test_fill_to_posterior_properties(prior):
    mech = FillToMechanism([0.0, 1.0, 2.0, 3.0])
    obs = mech.outputs(prior.support[0])[0][0]
    table = posterior_table(prior, mech, obs)
    assert math.fsum(table.values()) == pytest.approx(1.0, abs=1e-9)
    assert all(v >= 0 for v in table.values())
    # optimal guessing beats any constant guess
    ae = average_error(prior, mech, CARD, method="exact")
    for const in prior.support:
        fixed = math.fsum(prior.mass(r) * CARD(r, const) for r in prior.support)
        assert ae <= fixed + 1e-12
    ce = conditional_entropy(prior, mech, method="exact")
    assert -1e-12 <= ce <= prior.entropy_bits() + 1e-9
