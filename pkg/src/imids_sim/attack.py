"""Sleep-deprivation attack traffic and its effect on duty-cycled victims.

An attacker burns its neighbors' batteries two ways: fabricated control
messages wake random neighbors in random slots, and a steady flood of bogus
readings keeps its uplink coordinator busy receiving. Fabricated packets can
never carry a valid wake-up token, which is what gives the defense a hook.
Packets the attacker sends as part of a legitimately held duty (before it
turns active) still bear its authentic token.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .core import NodeState, Packet, PacketKind, SensorNode, WakeupToken, is_alive
from .energy import EnergyParams, consume, rx_cost


@dataclass
class AttackConfig:
    attacker_ids: list | None = None
    attacker_count: int = 0
    fake_msgs_per_round: int = 0
    fake_msg_bits: int = 1000
    flood_packets_per_slot: int = 0
    start_round: int = 0

    def validate(self) -> None:
        if self.attacker_count < 0:
            raise ValueError("attacker_count must be non-negative")
        if self.fake_msgs_per_round < 0 or self.flood_packets_per_slot < 0:
            raise ValueError("attack rates must be non-negative")
        if self.fake_msg_bits <= 0:
            raise ValueError("fake_msg_bits must be positive")
        if self.start_round < 0:
            raise ValueError("start_round must be non-negative")


def choose_attackers(config: AttackConfig, node_ids, sink_id: int, rng: random.Random) -> set:
    """Resolve the malicious set: explicit ids win, otherwise a random draw.
    The sink is never an attacker."""
    if config.attacker_ids is not None:
        chosen = set(int(i) for i in config.attacker_ids)
        if sink_id in chosen:
            raise ValueError("the sink cannot be an attacker")
        unknown = chosen - set(node_ids)
        if unknown:
            raise ValueError(f"unknown attacker ids: {sorted(unknown)}")
        return chosen
    candidates = sorted(i for i in node_ids if i != sink_id)
    count = min(config.attacker_count, len(candidates))
    return set(rng.sample(candidates, count))


def emit_attack_traffic(
    attacker: SensorNode,
    neighbors: list,
    uplink: int | None,
    slots_per_round: int,
    config: AttackConfig,
    data_bits: int,
    rng: random.Random,
) -> list:
    """Produce one round of attack packets for a single attacker.

    Fake control messages pick a random live neighbor and a random slot
    each; flood packets target the attacker's uplink coordinator in every
    slot. A dead attacker, or one whose round predates start_round, emits
    nothing. All emitted tokens are invalid.
    """
    if not is_alive(attacker):
        return []
    packets = []
    bad_token = WakeupToken(owner=attacker.id, valid=False)
    live_neighbors = sorted(neighbors)
    for _ in range(config.fake_msgs_per_round):
        if not live_neighbors:
            break
        victim = rng.choice(live_neighbors)
        slot = rng.randrange(slots_per_round)
        packets.append(
            Packet(
                src=attacker.id,
                dst=victim,
                kind=PacketKind.FAKE_CONTROL,
                token=bad_token,
                slot=slot,
                payload_size=config.fake_msg_bits,
            )
        )
    if uplink is not None and config.flood_packets_per_slot > 0:
        for slot in range(slots_per_round):
            for _ in range(config.flood_packets_per_slot):
                packets.append(
                    Packet(
                        src=attacker.id,
                        dst=uplink,
                        kind=PacketKind.SENSOR_DATA,
                        token=bad_token,
                        slot=slot,
                        payload_size=data_bits,
                    )
                )
    packets.sort(key=lambda p: (p.slot, p.dst, p.kind.value))
    return packets


@dataclass
class DeprivationResult:
    woken: bool = False
    energy_charged: float = 0.0
    received: bool = False


def apply_deprivation(
    victim: SensorNode,
    packet: Packet,
    awake: bool,
    params: EnergyParams,
    filtered: bool = False,
) -> DeprivationResult:
    """Deliver one unsolicited packet to a victim.

    A sleeping victim is forced awake (paying the listen/sleep difference
    for the slot) and then pays reception. A victim that already listens
    pays reception only. Dead victims, and traffic from sources the victim
    knows to be quarantined (`filtered`), change nothing.
    """
    result = DeprivationResult()
    if not is_alive(victim) or filtered:
        return result
    if not awake:
        consume(victim, params.p_listen - params.p_sleep)
        victim.state = NodeState.LISTEN
        result.woken = True
        result.energy_charged += params.p_listen - params.p_sleep
    if is_alive(victim):
        charge = rx_cost(params, packet.payload_size)
        consume(victim, charge)
        result.energy_charged += charge
        result.received = True
    return result
