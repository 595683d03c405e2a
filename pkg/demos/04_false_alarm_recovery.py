"""An honest node takes one bogus strike. Who forgives it?

A single spurious strike is injected against node 17 in round 10 of an
attack-free run. The windowed judgment keeps the node in a pending state
and clears it once it behaves through the review window; the
single-strike baseline expels it on the spot and never looks back.
"""

from imids_sim import Decision, parse_config, run_simulation

scenario = {
    "seed": 13,
    "rounds": 40,
    "deployment": {"node_count": 40, "leader_fraction": 0.2},
    "attack": {"attacker_count": 0},
    "detection": {"injected_false_strikes": [[17, 10]]},
}

for mode in ("imids", "itids"):
    trace = run_simulation(parse_config(dict(scenario, mode=mode)))
    print(f"--- {mode} ---")
    for round_no, judge, node, decision in trace.ledgers.decision_log:
        if node == 17:
            who = "the baseline" if judge is None else f"judge {judge}"
            print(f"round {round_no:>2}: {who} rules {decision.name}")
    if 17 in trace.ledgers.quarantined:
        print(f"node 17 quarantined in round {trace.ledgers.quarantined[17]}, permanently")
    else:
        print("node 17 kept its place in the network")
    confusion = trace.final_confusion
    print(f"false positives {confusion.fp}, accuracy {confusion.accuracy:.3f}")
    print()

# Decision is a real enum; the pending/cleared lifecycle is inspectable
print("possible rulings:", ", ".join(d.name for d in Decision))
