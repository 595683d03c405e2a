"""Two-stage anomaly detection with trust, quarantine, and audit ledgers.

Stage one (run by sector coordinators) screens each watched node against
four rules: energy draw above the allowed rate, transmission outside the
node's own slot, an invalid wake-up token, and packet counts above the
flood threshold. Every firing rule is one strike. Stage two (run by sector
monitors) watches strikes over a sliding window and either condemns,
rehabilitates, or keeps waiting. Cluster coordinators and the sink
re-validate forwarded packets so a compromised lower layer cannot launder
traffic; a drop there feeds a strike back to the origin's suspect entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core import SensorNode, trust_penalize, trust_reward
from .energy import EnergyParams, charge_detection


class DisabledIds(Exception):
    """Raised when a node is asked to detect with an exhausted budget."""


class Reason(Enum):
    ENERGY_RATE = "energy_rate"
    SCHEDULE_VIOLATION = "schedule_violation"
    INVALID_TOKEN = "invalid_token"
    PACKET_FLOOD = "packet_flood"


class Decision(Enum):
    MALICIOUS = "malicious"
    REHABILITATED = "rehabilitated"
    PENDING = "pending"


@dataclass(frozen=True)
class DetectionConfig:
    window_rounds: int = 5
    strike_limit: int = 3
    trust_floor: int = 8
    rate_threshold: float = 1.5
    count_threshold: float = 2.0
    reputation_min: int = 8
    injected_false_strikes: tuple = ()

    def validate(self) -> None:
        if self.window_rounds < 1 or self.strike_limit < 1:
            raise ValueError("window_rounds and strike_limit must be >= 1")
        if not 0 <= self.trust_floor <= 15 or not 0 <= self.reputation_min <= 15:
            raise ValueError("trust thresholds live on the 4-bit scale 0..15")
        if self.rate_threshold <= 1.0 or self.count_threshold <= 0:
            raise ValueError("rate_threshold must exceed 1.0, count_threshold 0")


@dataclass(frozen=True)
class NormalProfile:
    """Pre-set per-node allowance, fixed for the whole run."""

    expected_energy_rate: float  # J per round
    expected_packets: float = 1.0  # packets per round toward the watcher


@dataclass
class Observation:
    """What a watcher saw of one subject during one round."""

    subject: int
    energy_spent: float = 0.0
    tx_events: list = field(default_factory=list)  # (slot, token_valid)
    packets_to_watcher: int = 0


@dataclass(frozen=True)
class SidsVerdict:
    node: int
    suspected: bool
    reasons: tuple = ()


@dataclass
class SuspectedEntry:
    node: int
    first_round: int
    last_strike_round: int
    strike_count: int = 0
    reasons: list = field(default_factory=list)


@dataclass
class Ledgers:
    """Run-wide audit state: suspects, quarantine, and delivery logs."""

    suspected: dict = field(default_factory=dict)       # node -> SuspectedEntry
    quarantined: dict = field(default_factory=dict)     # node -> round
    valid_log: list = field(default_factory=list)       # (round, source id)
    sn_log: list = field(default_factory=list)          # (round, source id)
    forwarding_log: list = field(default_factory=list)  # (round, fsh, sector coordinator)
    decision_log: list = field(default_factory=list)    # (round, judge, node, Decision)

    def is_quarantined(self, node_id: int) -> bool:
        return node_id in self.quarantined


def add_strikes(ledgers: Ledgers, node_id: int, reasons, current_round: int) -> SuspectedEntry:
    entry = ledgers.suspected.get(node_id)
    if entry is None:
        entry = SuspectedEntry(
            node=node_id, first_round=current_round, last_strike_round=current_round
        )
        ledgers.suspected[node_id] = entry
    entry.strike_count += len(reasons)
    entry.last_strike_round = current_round
    entry.reasons.extend(reasons)
    return entry


def evaluate_rules(
    subject: SensorNode,
    observation: Observation,
    profile: NormalProfile,
    config: DetectionConfig,
) -> tuple:
    """Apply the four anomaly rules to one round of observations."""
    reasons = []
    if observation.energy_spent > config.rate_threshold * profile.expected_energy_rate:
        reasons.append(Reason.ENERGY_RATE)
    own_slot = subject.schedule.tdma_slot if subject.schedule else None
    if any(slot != own_slot for slot, _valid in observation.tx_events):
        reasons.append(Reason.SCHEDULE_VIOLATION)
    if any(not valid for _slot, valid in observation.tx_events):
        reasons.append(Reason.INVALID_TOKEN)
    if observation.packets_to_watcher > config.count_threshold * profile.expected_packets:
        reasons.append(Reason.PACKET_FLOOD)
    return tuple(reasons)


def sids_check(
    watcher: SensorNode,
    subjects: dict,
    observations: dict,
    profiles: dict,
    config: DetectionConfig,
    params: EnergyParams,
    ledgers: Ledgers,
    current_round: int,
) -> list:
    """Screen every watched subject; record strikes and adjust trust.

    Charges one detection unit per subject. If the watcher's budget runs
    out mid-pass the remaining subjects go unchecked this round and the
    caller sees the watcher disabled afterwards.
    """
    if not watcher.energy.detection_enabled:
        raise DisabledIds(f"node {watcher.id} cannot run checks")
    verdicts = []
    for node_id in sorted(subjects):
        if ledgers.is_quarantined(node_id):
            continue
        subject = subjects[node_id]
        disabled = charge_detection(watcher, params)
        observation = observations.get(node_id) or Observation(subject=node_id)
        reasons = evaluate_rules(subject, observation, profiles[node_id], config)
        if reasons:
            subject.trust = trust_penalize(subject.trust)
            add_strikes(ledgers, node_id, reasons, current_round)
            verdicts.append(SidsVerdict(node=node_id, suspected=True, reasons=reasons))
        else:
            subject.trust = trust_reward(subject.trust)
            verdicts.append(SidsVerdict(node=node_id, suspected=False))
        if disabled:
            break
    return verdicts


def exids_decide(
    monitor: SensorNode,
    suspect: SensorNode,
    entry: SuspectedEntry,
    current_round: int,
    config: DetectionConfig,
    params: EnergyParams,
) -> Decision:
    """Window verdict for one suspect.

    Condemn on strike_limit strikes or trust under the floor; clear the
    suspect after a full window without a new strike; otherwise wait.
    """
    if not monitor.energy.detection_enabled:
        raise DisabledIds(f"node {monitor.id} cannot run checks")
    charge_detection(monitor, params)
    if entry.strike_count >= config.strike_limit or suspect.trust.nibble < config.trust_floor:
        return Decision.MALICIOUS
    if current_round - entry.last_strike_round >= config.window_rounds:
        return Decision.REHABILITATED
    return Decision.PENDING


def quarantine(ledgers: Ledgers, node_id: int, current_round: int) -> bool:
    """Add a node to the quarantine roster. Idempotent; returns True if new."""
    if node_id in ledgers.quarantined:
        return False
    ledgers.quarantined[node_id] = current_round
    return True


def rehabilitate(ledgers: Ledgers, suspect: SensorNode) -> None:
    """Drop the suspect entry and give the trust counter a step back."""
    ledgers.suspected.pop(suspect.id, None)
    suspect.trust = trust_reward(suspect.trust)


@dataclass(frozen=True)
class ValidationResult:
    accepted: bool
    reasons: tuple = ()


def cc_validate(
    validator: SensorNode,
    packet,
    expected_slot: int | None,
    packets_from_src: int,
    allowed_packets: float,
    ledgers: Ledgers,
    config: DetectionConfig,
    params: EnergyParams,
    current_round: int,
) -> ValidationResult:
    """Re-validate one packet at coordinator or sink scope.

    Applies the token, schedule, and flood rules once more so traffic a
    compromised lower layer waved through still gets dropped here. A drop
    is a caught false negative: the source collects a fresh strike.
    """
    if not validator.energy.detection_enabled:
        raise DisabledIds(f"node {validator.id} cannot validate")
    charge_detection(validator, params)
    if ledgers.is_quarantined(packet.src):
        return ValidationResult(accepted=False, reasons=())
    reasons = []
    if not packet.token.valid:
        reasons.append(Reason.INVALID_TOKEN)
    if expected_slot is not None and packet.slot != expected_slot:
        reasons.append(Reason.SCHEDULE_VIOLATION)
    if packets_from_src > config.count_threshold * allowed_packets:
        reasons.append(Reason.PACKET_FLOOD)
    if reasons:
        add_strikes(ledgers, packet.src, reasons, current_round)
        return ValidationResult(accepted=False, reasons=tuple(reasons))
    return ValidationResult(accepted=True)


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def accuracy(self) -> float:
        total = self.tp + self.fp + self.tn + self.fn
        return (self.tp + self.tn) / total if total else 1.0

    @property
    def detection_rate(self) -> float:
        positives = self.tp + self.fn
        return self.tp / positives if positives else 1.0


def compute_confusion(nodes, quarantined_ids, sink_id: int = 0) -> Confusion:
    """Per-node classification against ground truth, sink excluded."""
    tp = fp = tn = fn = 0
    for node in nodes:
        if node.id == sink_id:
            continue
        isolated = node.id in quarantined_ids
        if node.malicious and isolated:
            tp += 1
        elif node.malicious and not isolated:
            fn += 1
        elif not node.malicious and isolated:
            fp += 1
        else:
            tn += 1
    return Confusion(tp=tp, fp=fp, tn=tn, fn=fn)
