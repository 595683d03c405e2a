"""What the sector layer is worth in joules.

`imids-no-sectors` keeps the clusters, the trust windows, and the attack
handling, but every node reports straight to its cluster coordinator.
Crossing that ablation against network size shows the sectored layout
paying for its extra coordinators many times over: short leaf hops and
cheap aggregation beat long direct uplinks at every size.
"""

import os

from imids_sim import Series, line_chart, parse_config, run_simulation

OUT = os.path.join(os.path.dirname(__file__), "out")

base = {
    "seed": 40,
    "rounds": 150,
    "deployment": {"leader_fraction": 0.2},
    "attack": {
        "attacker_count": 3,
        "fake_msgs_per_round": 4,
        "flood_packets_per_slot": 2,
        "start_round": 60,
    },
}

sizes = (50, 100, 200)
energy = {"imids": [], "imids-no-sectors": []}

print(f"{'nodes':>5}  {'sectored':>10}  {'flat-cluster':>12}  {'saving':>7}")
for size in sizes:
    row = {}
    for mode in energy:
        raw = dict(base, mode=mode)
        raw["deployment"] = dict(base["deployment"], node_count=size)
        trace = run_simulation(parse_config(raw))
        row[mode] = trace.total_energy_spent()
        energy[mode].append(row[mode])
    saving = 1 - row["imids"] / row["imids-no-sectors"]
    print(f"{size:>5}  {row['imids']:>9.3f}J  {row['imids-no-sectors']:>11.3f}J  {saving:>6.1%}")

os.makedirs(OUT, exist_ok=True)
chart = line_chart(
    [Series(mode, sizes, tuple(values)) for mode, values in sorted(energy.items())],
    "Total energy consumed vs network size",
    "node count",
    "energy (J)",
)
path = os.path.join(OUT, "sector_energy.svg")
with open(path, "w", encoding="utf-8") as handle:
    handle.write(chart)
print(f"chart written to {path}")
