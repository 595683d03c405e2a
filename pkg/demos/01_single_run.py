"""Run one scenario from plain Python and poke at the trace.

The simulator is a library first: build a config dict, parse it, run it,
and read everything off the returned trace. No files are involved.
"""

from imids_sim import parse_config, run_simulation

config = parse_config({
    "seed": 7,
    "rounds": 60,
    "mode": "imids",
    "deployment": {"node_count": 40, "leader_fraction": 0.2},
    "attack": {
        "attacker_count": 2,
        "fake_msgs_per_round": 4,
        "flood_packets_per_slot": 2,
        "start_round": 10,
    },
})

trace = run_simulation(config)

print(f"network: {len(trace.positions) - 1} nodes + sink, "
      f"{trace.cluster_count} clusters, {trace.sector_count} sectors")
print(f"attackers (hidden from the defenders): {trace.attacker_ids}")
print(f"attack begins at round {config.attack.start_round}")
print()

# the ledger records when each node was cut off
for node_id, round_no in sorted(trace.ledgers.quarantined.items()):
    print(f"node {node_id} quarantined in round {round_no}")

confusion = trace.final_confusion
print()
print(f"final accuracy {confusion.accuracy:.3f} "
      f"(tp={confusion.tp} fp={confusion.fp} tn={confusion.tn} fn={confusion.fn})")
print(f"alive at the end: {trace.alive_series[-1]} of {len(trace.positions) - 1}")
print(f"total energy drawn: {trace.total_energy_spent():.4f} J")

# per-round numbers live on the reports
worst = max(trace.reports, key=lambda r: r.energy_spent_total)
print(f"most expensive round: {worst.round} at {worst.energy_spent_total * 1000:.2f} mJ")
