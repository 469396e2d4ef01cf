"""How much dummy traffic does a given dispersion shift cost?

Prints the analytic relative cost of faking an anomaly (one boosted slot
in a baseline interval) versus suppressing one by waterfilling, over a
grid of shift factors k. Waterfilling is capped at full suppression. At
the full obfuscation targets the fake is the cheaper move, which is what
makes the mixed strategy affordable at low anomaly rates.
"""

from lpwanleak import IntervalModel, anomaly_dispersion, cost_curves, costs


def print_curve(lam, intensity, slots=10):
    model = IntervalModel(slots, lam, intensity, 0.0)
    d0 = anomaly_dispersion(model)
    shifts = [1.0, 1.5, 2.0, 3.0, 5.0, round(d0, 3)]
    shifts = sorted(k for k in shifts if k <= d0)
    points = cost_curves([model], shifts)
    print(f"\nlambda={lam} I={intensity} S={slots}   full anomaly dispersion {d0:.3f}")
    print("      k      C_fake     C_waterfill")
    for p in points:
        wf = f"{p.waterfill_cost:.4f}" if p.wf_feasible else "   -"
        print(f"  {p.shift:6.3f}   {p.fake_cost:8.4f}   {wf}")
    cm = costs(model)
    print(f"  full targets: fake rate {cm.fake_rate:.3f} msg/interval -> C_f {cm.fake_cost:.3f}, "
          f"waterfill rate {cm.waterfill_rate:.3f} msg/slot -> C_wf {cm.waterfill_cost:.3f}")


if __name__ == "__main__":
    for lam, intensity in ((1.0, 10.0), (1.0, 40.0), (5.0, 10.0)):
        print_curve(lam, intensity)
