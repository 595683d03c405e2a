import pytest

from imids_sim.core import (
    DutySchedule,
    Packet,
    PacketKind,
    Role,
    TrustState,
    WakeupToken,
)
from imids_sim.energy import EnergyParams, assign_detection_budget
from imids_sim.ids import (
    Decision,
    DetectionConfig,
    DisabledIds,
    Ledgers,
    NormalProfile,
    Observation,
    Reason,
    SuspectedEntry,
    add_strikes,
    cc_validate,
    compute_confusion,
    evaluate_rules,
    exids_decide,
    quarantine,
    rehabilitate,
    sids_check,
)

from conftest import build_node

P = EnergyParams()
CFG = DetectionConfig()  # window 5, strikes 3, trust floor 8, 1.5x / 2.0x
PROFILE = NormalProfile(expected_energy_rate=1e-3, expected_packets=1.0)


def _subject(node_id=7, slot=2):
    node = build_node(node_id, energy=0.2)
    node.schedule = DutySchedule(tdma_slot=slot)
    return node


def _watcher(node_id=3):
    node = build_node(node_id, energy=2.0, role=Role.SC)
    assign_detection_budget(node, Role.SC)
    return node


# --- the four screening rules, one by one ---------------------------------


def test_rule_energy_rate():
    subject = _subject()
    obs = Observation(subject=7, energy_spent=1.6e-3)  # above 1.5 * 1e-3
    assert evaluate_rules(subject, obs, PROFILE, CFG) == (Reason.ENERGY_RATE,)
    obs_ok = Observation(subject=7, energy_spent=1.4e-3)
    assert evaluate_rules(subject, obs_ok, PROFILE, CFG) == ()


def test_rule_schedule_violation():
    subject = _subject(slot=2)
    obs = Observation(subject=7, tx_events=[(4, True)])
    assert evaluate_rules(subject, obs, PROFILE, CFG) == (Reason.SCHEDULE_VIOLATION,)
    obs_ok = Observation(subject=7, tx_events=[(2, True)])
    assert evaluate_rules(subject, obs_ok, PROFILE, CFG) == ()


def test_rule_invalid_token():
    subject = _subject(slot=2)
    obs = Observation(subject=7, tx_events=[(2, False)])
    assert evaluate_rules(subject, obs, PROFILE, CFG) == (Reason.INVALID_TOKEN,)


def test_rule_packet_flood():
    subject = _subject()
    obs = Observation(subject=7, packets_to_watcher=3)  # above 2.0 * 1.0
    assert evaluate_rules(subject, obs, PROFILE, CFG) == (Reason.PACKET_FLOOD,)
    obs_ok = Observation(subject=7, packets_to_watcher=2)
    assert evaluate_rules(subject, obs_ok, PROFILE, CFG) == ()


def test_all_rules_fire_together():
    subject = _subject(slot=2)
    obs = Observation(
        subject=7,
        energy_spent=5e-3,
        tx_events=[(1, False), (3, False)],
        packets_to_watcher=9,
    )
    assert set(evaluate_rules(subject, obs, PROFILE, CFG)) == {
        Reason.ENERGY_RATE,
        Reason.SCHEDULE_VIOLATION,
        Reason.INVALID_TOKEN,
        Reason.PACKET_FLOOD,
    }


# --- screening pass --------------------------------------------------------


def test_sids_strikes_and_trust_penalty():
    watcher = _watcher()
    subject = _subject()
    ledgers = Ledgers()
    obs = {7: Observation(subject=7, packets_to_watcher=5)}
    verdicts = sids_check(
        watcher, {7: subject}, obs, {7: PROFILE}, CFG, P, ledgers, current_round=4
    )
    assert verdicts[0].suspected
    assert subject.trust.nibble == 14
    entry = ledgers.suspected[7]
    assert entry.strike_count == 1 and entry.last_strike_round == 4


def test_sids_rewards_clean_subject():
    watcher = _watcher()
    subject = _subject()
    subject.trust = TrustState(nibble=10)
    ledgers = Ledgers()
    sids_check(watcher, {7: subject}, {}, {7: PROFILE}, CFG, P, ledgers, 0)
    assert subject.trust.nibble == 11
    assert 7 not in ledgers.suspected


def test_sids_skips_quarantined_and_charges_watcher():
    watcher = _watcher()
    subject = _subject()
    ledgers = Ledgers()
    quarantine(ledgers, 7, 0)
    before = watcher.energy.residual_energy
    verdicts = sids_check(watcher, {7: subject}, {}, {7: PROFILE}, CFG, P, ledgers, 1)
    assert verdicts == []
    assert watcher.energy.residual_energy == before  # nothing checked


def test_sids_raises_for_disabled_watcher():
    watcher = _watcher()
    watcher.energy.detection_enabled = False
    with pytest.raises(DisabledIds):
        sids_check(watcher, {}, {}, {}, CFG, P, Ledgers(), 0)


# --- window decisions ------------------------------------------------------


def test_exids_condemns_on_strike_limit():
    entry = SuspectedEntry(node=7, first_round=0, last_strike_round=2, strike_count=3)
    decision = exids_decide(_watcher(), _subject(), entry, 3, CFG, P)
    assert decision is Decision.MALICIOUS


def test_exids_condemns_on_trust_floor():
    subject = _subject()
    subject.trust = TrustState(nibble=7)
    entry = SuspectedEntry(node=7, first_round=0, last_strike_round=2, strike_count=1)
    assert exids_decide(_watcher(), subject, entry, 3, CFG, P) is Decision.MALICIOUS


def test_exids_rehabilitates_after_quiet_window():
    entry = SuspectedEntry(node=7, first_round=0, last_strike_round=2, strike_count=1)
    assert exids_decide(_watcher(), _subject(), entry, 7, CFG, P) is Decision.REHABILITATED
    assert exids_decide(_watcher(), _subject(), entry, 6, CFG, P) is Decision.PENDING


def test_exids_malice_beats_rehabilitation():
    entry = SuspectedEntry(node=7, first_round=0, last_strike_round=0, strike_count=3)
    assert exids_decide(_watcher(), _subject(), entry, 99, CFG, P) is Decision.MALICIOUS


def test_quarantine_records_round_once():
    ledgers = Ledgers()
    assert quarantine(ledgers, 7, 4) is True
    assert quarantine(ledgers, 7, 9) is False
    assert ledgers.quarantined[7] == 4


def test_rehabilitate_clears_entry_and_rewards():
    ledgers = Ledgers()
    subject = _subject()
    subject.trust = TrustState(nibble=9)
    add_strikes(ledgers, 7, (Reason.ENERGY_RATE,), 0)
    rehabilitate(ledgers, subject)
    assert 7 not in ledgers.suspected
    assert subject.trust.nibble == 10


# --- coordinator validation ------------------------------------------------


def _data_packet(src, slot, valid=True):
    return Packet(
        src=src,
        dst=1,
        kind=PacketKind.SENSOR_DATA,
        token=WakeupToken(owner=src, valid=valid),
        slot=slot,
        payload_size=3000,
    )


def _validator():
    node = build_node(1, energy=2.0, role=Role.CC)
    assign_detection_budget(node, Role.CC)
    return node


def test_cc_validate_accepts_clean_packet():
    ledgers = Ledgers()
    result = cc_validate(
        _validator(), _data_packet(7, 2), 2, 1, 1.0, ledgers, CFG, P, 0
    )
    assert result.accepted
    assert 7 not in ledgers.suspected


def test_cc_validate_strikes_invalid_token():
    ledgers = Ledgers()
    result = cc_validate(
        _validator(), _data_packet(7, 2, valid=False), 2, 1, 1.0, ledgers, CFG, P, 0
    )
    assert not result.accepted
    assert Reason.INVALID_TOKEN in ledgers.suspected[7].reasons


def test_cc_validate_strikes_wrong_slot():
    ledgers = Ledgers()
    result = cc_validate(
        _validator(), _data_packet(7, 5), 2, 1, 1.0, ledgers, CFG, P, 0
    )
    assert not result.accepted
    assert Reason.SCHEDULE_VIOLATION in ledgers.suspected[7].reasons


def test_cc_validate_strikes_flood():
    ledgers = Ledgers()
    result = cc_validate(
        _validator(), _data_packet(7, 2), 2, 5, 1.0, ledgers, CFG, P, 0
    )
    assert not result.accepted
    assert Reason.PACKET_FLOOD in ledgers.suspected[7].reasons


def test_cc_validate_drops_quarantined_silently():
    ledgers = Ledgers()
    quarantine(ledgers, 7, 0)
    result = cc_validate(
        _validator(), _data_packet(7, 2), 2, 1, 1.0, ledgers, CFG, P, 1
    )
    assert not result.accepted
    assert 7 not in ledgers.suspected  # no new strikes, just dropped


# --- confusion bookkeeping --------------------------------------------------


def test_confusion_counts_and_rates():
    nodes = [build_node(i) for i in range(5)]
    nodes[0] = build_node(0)  # sink id excluded from counting
    nodes[1].malicious = True
    nodes[2].malicious = True
    confusion = compute_confusion(nodes, quarantined_ids={1, 3}, sink_id=0)
    assert (confusion.tp, confusion.fp, confusion.tn, confusion.fn) == (1, 1, 1, 1)
    assert confusion.accuracy == 0.5
    assert confusion.detection_rate == 0.5


def test_confusion_empty_positive_class():
    nodes = [build_node(i) for i in range(3)]
    confusion = compute_confusion(nodes, quarantined_ids=set(), sink_id=0)
    assert confusion.detection_rate == 1.0
    assert confusion.accuracy == 1.0
