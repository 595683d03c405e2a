"""Sectored hierarchy vs flat always-on monitoring, same seed, same attack.

Both runs see the identical deployment, sleep draws, and attacker
behavior; only the detection architecture differs. The flat baseline
keeps half of each cluster's leaders listening promiscuously around the
clock, and that bill comes due long before the attack even starts.
"""

import os

from imids_sim import Series, line_chart, parse_config, run_simulation

OUT = os.path.join(os.path.dirname(__file__), "out")

scenario = {
    "seed": 42,
    "rounds": 500,
    "deployment": {"node_count": 70, "leader_fraction": 0.2},
    "attack": {
        "attacker_count": 3,
        "fake_msgs_per_round": 4,
        "flood_packets_per_slot": 2,
        "start_round": 440,
    },
}

traces = {}
for mode in ("imids", "itids"):
    traces[mode] = run_simulation(parse_config(dict(scenario, mode=mode)))
    t = traces[mode]
    print(f"{mode:>6}: alive {t.alive_series[-1]:>2}/69  "
          f"accuracy {t.final_confusion.accuracy:.3f}  "
          f"energy {t.total_energy_spent():.2f} J  "
          f"quarantined {sorted(t.ledgers.quarantined)}")

dominated = all(
    a >= b for a, b in zip(traces["imids"].alive_series, traces["itids"].alive_series)
)
print(f"\nsectored curve stays at or above the flat one in every round: {dominated}")

os.makedirs(OUT, exist_ok=True)
chart = line_chart(
    [
        Series("imids", tuple(range(500)), tuple(traces["imids"].alive_series)),
        Series("itids", tuple(range(500)), tuple(traces["itids"].alive_series)),
    ],
    "Alive nodes over time",
    "round",
    "alive nodes",
)
path = os.path.join(OUT, "alive_comparison.svg")
with open(path, "w", encoding="utf-8") as handle:
    handle.write(chart)
print(f"chart written to {path}")
