"""Trace-level view: what does one observation tell the attacker?

Loads the shipped prior/mechanism fixtures, prints the Bayesian posterior
over real traces for each reachable observation, and compares the exact
average-error / conditional-entropy values with their Monte-Carlo
estimates.
"""

from pathlib import Path

from lpwanleak import (CardinalityDistance, average_error, average_error_mc,
                       conditional_entropy, conditional_entropy_mc,
                       enumerate_observables, load_fixture, optimal_guess,
                       posterior_table)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fmt(ts):
    return "{" + ", ".join(f"{t:g}" for t in ts) + "}"


def show(path):
    fx = load_fixture(path)
    print(f"\n=== {fx.name} ===")
    dist = CardinalityDistance()
    for obs, px in sorted(enumerate_observables(fx.prior, fx.mechanism).items()):
        table = posterior_table(fx.prior, fx.mechanism, obs)
        guess, err = optimal_guess(fx.prior, fx.mechanism, obs, dist)
        post = ", ".join(f"p({fmt(r)})={p:.3f}" for r, p in sorted(table.items()))
        print(f"  X={fmt(obs)} (p={px:.3f}): {post}; best guess {fmt(guess)} err {err:.3f}")
    ae = average_error(fx.prior, fx.mechanism, dist)
    ce = conditional_entropy(fx.prior, fx.mechanism)
    ae_mc, ae_se = average_error_mc(fx.prior, fx.mechanism, dist, budget=50_000, seed=1)
    ce_mc, ce_se = conditional_entropy_mc(fx.prior, fx.mechanism, budget=50_000, seed=1)
    print(f"  AE exact {ae:.4f} | mc {ae_mc:.4f} +/- {ae_se:.4f}")
    print(f"  CE exact {ce:.4f} | mc {ce_mc:.4f} +/- {ce_se:.4f} bits "
          f"(prior entropy {fx.prior.entropy_bits():.4f})")


if __name__ == "__main__":
    for name in ("fillto_two_messages", "empty_or_one", "uniform_subsets",
                 "table_noisy", "fillto_six"):
        show(FIXTURES / f"{name}.json")
