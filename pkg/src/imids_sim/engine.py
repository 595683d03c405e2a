"""Round-driven simulation engine tying topology, attack, and detection together.

One round is `slots_per_round` TDMA slots. Attack packets land in their
slots and force sleeping victims awake; every leaf transmits once in its
own slot; then the detection ladder fires bottom-up: sector coordinators
screen their leaves, forwarding heads relay aggregates, sector monitors
pass window verdicts, coordinators and finally the sink re-validate what
reaches them. Reconfiguration (death, quarantine, exhausted detection
budget, or a coordinator falling behind its peers) closes the round.

The baseline mode replaces all of that with static low-energy monitors
and single-strike isolation; the no-sector mode keeps cluster
coordinators as the only detection layer.

Everything random is drawn from substreams derived from the scenario
seed and keyed by concern, round, and node id, so a (config, seed) pair
always produces the identical trace and the sleep masks and attack
traffic line up exactly across modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import attack as attack_mod
from . import ids as ids_mod
from . import itids as itids_mod
from . import topology as topo
from .config import ScenarioConfig, config_to_dict
from .core import (
    DETECTION_FRACTION,
    DutySchedule,
    NodeClass,
    Packet,
    PacketKind,
    Role,
    WakeupToken,
    is_alive,
    trust_penalize,
)
from .energy import assign_detection_budget, consume, rx_cost, tx_cost
from .ids import Decision, Ledgers, NormalProfile, Observation
from .rng import SeededRng

AGGREGATE_SLOT = -1  # sentinel: aggregates move in the post-data phase


@dataclass
class RoundReport:
    round: int
    alive_count: int
    energy_spent_total: float
    energy_spent: dict
    packets_sent: int
    packets_delivered: int
    packets_dropped: int
    suspects_new: list
    quarantines_new: list
    reconfigurations: list
    tp: int
    fp: int
    tn: int
    fn: int


@dataclass
class SimulationTrace:
    config: dict
    mode: str
    seed: int
    attacker_ids: list
    positions: dict
    roles_initial: dict
    cluster_count: int
    sector_count: int
    monitor_count: int
    initial_energy: dict
    init_energy_spent: dict
    reports: list = field(default_factory=list)
    final_energy: dict = field(default_factory=dict)
    extinction_round: int | None = None
    final_confusion: ids_mod.Confusion | None = None
    ledgers: Ledgers | None = None

    @property
    def alive_series(self) -> list:
        return [r.alive_count for r in self.reports]

    def accuracy_series(self) -> list:
        out = []
        for r in self.reports:
            total = r.tp + r.fp + r.tn + r.fn
            out.append((r.tp + r.tn) / total if total else 1.0)
        return out

    def total_energy_spent(self, include_sink: bool = False) -> float:
        total = 0.0
        for node_id, initial in self.initial_energy.items():
            if not include_sink and node_id == topo.SINK_ID:
                continue
            total += initial - self.final_energy.get(node_id, initial)
        return total


class Simulation:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.params = config.energy
        self.rng = SeededRng(config.seed)
        self.ledgers = Ledgers()
        self.round = 0
        self._sent = 0
        self._delivered = 0
        self._dropped = 0
        self._initialize()

    # ------------------------------------------------------------------
    # setup

    def _initialize(self):
        cfg = self.config
        self.nodes = topo.deploy(cfg.deployment, self.rng)
        self.by_id = {n.id: n for n in self.nodes}
        self.sink = self.by_id[topo.SINK_ID]
        self.attackers = attack_mod.choose_attackers(
            cfg.attack, list(self.by_id), topo.SINK_ID, self.rng.derive("attackers")
        )
        for node_id in self.attackers:
            self.by_id[node_id].malicious = True

        self.graph = topo.build_graph(self.nodes, cfg.deployment.transmission_range)
        self._census()
        topo.classify_nodes(self.nodes, cfg.deployment.leader_energy_threshold)

        coordinator_ids = topo.select_cluster_coordinators(
            self.nodes, self.graph, cfg.detection.reputation_min, self._quarantined_set()
        )
        self.clusters = topo.form_clusters(
            self.nodes, coordinator_ids, self.graph, self.rng.derive("join", -1)
        )
        self.orphans = set()
        self.monitors = {}  # cluster id -> monitor ids, baseline mode only
        self._build_structures(initial=True)
        self._charge_formation(self.clusters)

        # One shared allowance, fixed for the run: a transmit at full range
        # plus a fully awake round. Honest duty can never exceed it, while a
        # flooding (or deprived-awake) energy profile clears it comfortably.
        allowance = tx_cost(
            self.params, cfg.traffic.data_bits, cfg.deployment.transmission_range
        ) + cfg.slots_per_round * self.params.p_listen
        self.profiles = {
            n.id: NormalProfile(expected_energy_rate=allowance)
            for n in self.nodes
            if n.node_class is not NodeClass.SINK
        }

        self.init_energy_spent = {
            n.id: n.energy.initial_energy - n.energy.residual_energy for n in self.nodes
        }

    def _census(self):
        """Sink advertises and every node in range answers with its vitals."""
        bits = self.config.traffic.control_bits
        in_range = sorted(self.graph.neighbors(self.sink.id))
        if not in_range:
            return
        self._charge_tx(self.sink, bits, self.graph.transmission_range)
        for node_id in in_range:
            node = self.by_id[node_id]
            self._charge_rx(node, bits)
            self._charge_tx(node, bits, node.distance_to(self.sink))
            self._charge_rx(self.sink, bits)

    def _build_structures(self, rebuild=None, initial=False):
        """(Re)derive sectors, monitors, roles, budgets, and schedules.

        `rebuild` limits sector re-formation to the named clusters so an
        untouched cluster keeps its coordinators and their running
        detection budgets; roles, schedules, and duty sets are pure
        functions of the structure and are recomputed globally.
        """
        cfg = self.config
        quarantined = self._quarantined_set()
        targets = self.clusters if rebuild is None else rebuild
        if cfg.mode == "imids":
            for cluster in targets:
                cluster.sectors = topo.form_sectors(cluster, self.nodes, self.graph, quarantined)
                for sector in cluster.sectors:
                    try:
                        sector.monitors = topo.select_sector_monitor(
                            cluster, sector, self.nodes, self.graph, quarantined
                        )
                    except topo.MonitorUnavailable:
                        sector.monitors = ()
                    try:
                        sector.fsh = topo.select_fsh(
                            cluster, sector, self.nodes, self.graph, quarantined
                        )
                    except topo.MonitorUnavailable:
                        sector.fsh = None
        else:
            for cluster in targets:
                cluster.sectors = []
        roles_before = {n.id: n.role for n in self.nodes}
        self.roles = topo.assign_roles(self.nodes, self.clusters)
        if cfg.mode == "itids" and initial:
            for cluster in self.clusters:
                self.monitors[cluster.id] = itids_mod.select_monitors(
                    cluster, self.nodes, cfg.itids.monitor_fraction
                )
        self._assign_budgets(roles_before, initial)
        self._assign_schedules()
        self._refresh_duty_sets()

    def _assign_budgets(self, roles_before, initial):
        """A fresh appointment brings a fresh reserve; a node that keeps its
        role keeps whatever is left of its running budget."""
        if self.config.mode == "itids":
            if not initial:
                return  # the baseline never reconfigures
            monitor_ids = set()
            for ids in self.monitors.values():
                monitor_ids.update(ids)
            for node in self.nodes:
                if not is_alive(node):
                    continue
                if node.id in monitor_ids:
                    # baseline monitors carry the screening-level reserve
                    fraction = DETECTION_FRACTION["SC"]
                    budget = min(
                        fraction * node.energy.initial_energy, node.energy.residual_energy
                    )
                    node.energy.detection_budget = budget
                    node.energy.detection_budget_initial = budget
                    node.energy.detection_enabled = budget > 0.0
                else:
                    assign_detection_budget(node, node.role)
            return
        for node in self.nodes:
            if not is_alive(node):
                continue
            if initial or node.role is not roles_before.get(node.id):
                assign_detection_budget(node, node.role)

    def _assign_schedules(self):
        slots = self.config.slots_per_round
        p_sleep = self.config.sleep_probability
        assigned = set()
        for cluster in sorted(self.clusters, key=lambda c: c.id):
            index = 0
            for sector in cluster.sectors:
                for node_id in sorted(sector.node_ids()):
                    self.by_id[node_id].schedule = DutySchedule(
                        tdma_slot=index % slots, sleep_probability=p_sleep
                    )
                    assigned.add(node_id)
                    index += 1
            for node_id in sorted(cluster.node_ids()):
                if node_id not in assigned:
                    self.by_id[node_id].schedule = DutySchedule(
                        tdma_slot=index % slots, sleep_probability=p_sleep
                    )
                    assigned.add(node_id)
                    index += 1
        for node in self.nodes:
            if node.id not in assigned and node.node_class is not NodeClass.SINK:
                node.schedule = DutySchedule(
                    tdma_slot=node.id % slots, sleep_probability=p_sleep
                )

    def _refresh_duty_sets(self):
        """Who stays awake all round, and who forwards to whom."""
        always_on = {self.sink.id}
        parent = {}
        for cluster in self.clusters:
            cc = cluster.coordinator
            always_on.add(cc)
            parent[cc] = self.sink.id
            for member in sorted(cluster.members):
                parent.setdefault(member, cc)
            for sector in cluster.sectors:
                always_on.add(sector.coordinator)
                always_on.update(sector.monitors)
                if sector.fsh is not None:
                    always_on.add(sector.fsh)
                parent[sector.coordinator] = self._sector_uplink(sector, cc)
                for leaf in sector.leaves:
                    parent[leaf] = sector.coordinator
        for ids in self.monitors.values():
            always_on.update(ids)
        self.always_on = always_on
        self.parent = parent

    def _sector_uplink(self, sector, cc_id: int) -> int:
        """Aggregates ride through the forwarding head when it is reachable."""
        if sector.fsh is None:
            return cc_id
        sc = self.by_id[sector.coordinator]
        fsh = self.by_id[sector.fsh]
        if is_alive(fsh) and sc.distance_to(fsh) <= self.graph.transmission_range:
            return sector.fsh
        return cc_id

    def _charge_formation(self, clusters):
        """Control traffic of (re)building cluster and sector structure."""
        bits = self.config.traffic.control_bits
        for cluster in sorted(clusters, key=lambda c: c.id):
            cc = self.by_id[cluster.coordinator]
            if not is_alive(cc):
                continue
            self._charge_tx(cc, bits, self.graph.transmission_range)
            for member_id in sorted(cluster.members):
                member = self.by_id[member_id]
                if not is_alive(member):
                    continue
                self._charge_rx(member, bits)
                self._charge_tx(member, bits, member.distance_to(cc))
                self._charge_rx(cc, bits)
            for sector in cluster.sectors:
                sc = self.by_id[sector.coordinator]
                if not is_alive(sc):
                    continue
                self._charge_tx(sc, bits, self.graph.transmission_range)
                for leaf_id in sorted(sector.leaves):
                    leaf = self.by_id[leaf_id]
                    if not is_alive(leaf):
                        continue
                    self._charge_rx(leaf, bits)
                    self._charge_tx(leaf, bits, leaf.distance_to(sc))
                    self._charge_rx(sc, bits)

    # ------------------------------------------------------------------
    # low-level charging

    def _charge_tx(self, node, bits, distance):
        if not is_alive(node):
            return False
        consume(node, tx_cost(self.params, bits, distance))
        self._sent += 1
        return True

    def _charge_rx(self, node, bits):
        if not is_alive(node):
            return False
        consume(node, rx_cost(self.params, bits))
        return True

    def _quarantined_set(self):
        return set(self.ledgers.quarantined)

    # ------------------------------------------------------------------
    # round loop

    def run_round(self) -> RoundReport:
        cfg = self.config
        r = self.round
        residual_before = {n.id: n.energy.residual_energy for n in self.nodes}
        suspects_before = set(self.ledgers.suspected)
        quarantined_before = set(self.ledgers.quarantined)
        self._sent = self._delivered = self._dropped = 0
        reconfig_events = []

        masks = self._draw_masks()
        forced = [set() for _ in range(cfg.slots_per_round)]
        self._obs = {}
        self._received_at = {}   # (receiver, src) -> packets received this round
        self._cc_inbox = {}      # coordinator id -> packets awaiting validation
        self._sc_valid = {}      # sector coordinator id -> leaf data this round

        attack_packets = self._emit_attacks(r)
        for slot in range(cfg.slots_per_round):
            self._run_slot(slot, masks, forced, attack_packets.get(slot, []))
        self._charge_slot_costs(masks)

        self._inject_false_strikes(r)
        self._detection_phase(r)
        if cfg.mode != "itids":
            self._reconfiguration_sweep(reconfig_events)

        alive_count = self.alive_non_sink()
        spent = {
            n.id: residual_before[n.id] - n.energy.residual_energy for n in self.nodes
        }
        confusion = ids_mod.compute_confusion(
            self.nodes, self._quarantined_set(), self.sink.id
        )
        report = RoundReport(
            round=r,
            alive_count=alive_count,
            energy_spent_total=sum(spent.values()),
            energy_spent=spent,
            packets_sent=self._sent,
            packets_delivered=self._delivered,
            packets_dropped=self._dropped,
            suspects_new=sorted(set(self.ledgers.suspected) - suspects_before),
            quarantines_new=sorted(set(self.ledgers.quarantined) - quarantined_before),
            reconfigurations=reconfig_events,
            tp=confusion.tp,
            fp=confusion.fp,
            tn=confusion.tn,
            fn=confusion.fn,
        )
        self.round += 1
        return report

    def _draw_masks(self):
        """Per-node wake masks for the round; the own TDMA slot is always
        awake. Keyed by (round, node) so every mode sees the same draw."""
        cfg = self.config
        masks = {}
        for node in self.nodes:
            if node.node_class is NodeClass.SINK or not is_alive(node):
                continue
            stream = self.rng.derive("sleep", self.round, node.id)
            wake = [
                stream.random() >= cfg.sleep_probability
                for _ in range(cfg.slots_per_round)
            ]
            if node.schedule is not None:
                wake[node.schedule.tdma_slot] = True
                node.schedule.wake_slots = {i for i, w in enumerate(wake) if w}
            masks[node.id] = wake
        return masks

    def _emit_attacks(self, r: int):
        cfg = self.config
        by_slot = {}
        if r < cfg.attack.start_round:
            return by_slot
        for attacker_id in sorted(self.attackers):
            attacker = self.by_id[attacker_id]
            if not is_alive(attacker):
                continue
            stream = self.rng.derive("attack", r, attacker_id)
            neighbors = [
                v for v in self.graph.neighbors(attacker_id) if is_alive(self.by_id[v])
            ]
            packets = attack_mod.emit_attack_traffic(
                attacker,
                neighbors,
                self.parent.get(attacker_id),
                cfg.slots_per_round,
                cfg.attack,
                cfg.traffic.data_bits,
                stream,
            )
            for pkt in packets:
                by_slot.setdefault(pkt.slot, []).append(pkt)
        return by_slot

    def _is_awake(self, node_id, slot, masks, forced) -> bool:
        if node_id in self.always_on or node_id == self.sink.id:
            return True
        mask = masks.get(node_id)
        if mask is None:
            return False
        return mask[slot] or node_id in forced[slot]

    def _run_slot(self, slot, masks, forced, slot_attack_packets):
        cfg = self.config
        coordinators = {c.coordinator for c in self.clusters}
        # attack deliveries first: they can wake victims within this slot
        for pkt in slot_attack_packets:
            src = self.by_id[pkt.src]
            if not is_alive(src):
                continue
            dst = self.by_id[pkt.dst]
            self._charge_tx(src, pkt.payload_size, src.distance_to(dst))
            self._observe_tx(pkt, slot)
            if not is_alive(dst) or src.distance_to(dst) > self.graph.transmission_range:
                self._dropped += 1
                continue
            filtered = self.ledgers.is_quarantined(pkt.src)
            awake = self._is_awake(pkt.dst, slot, masks, forced)
            result = attack_mod.apply_deprivation(dst, pkt, awake, self.params, filtered)
            if result.woken:
                forced[slot].add(pkt.dst)
            if result.received:
                self._delivered += 1
                self._note_receipt(pkt.dst, pkt.src)
                if pkt.dst in coordinators or pkt.dst == self.sink.id:
                    self._cc_inbox.setdefault(pkt.dst, []).append(pkt)
            else:
                self._dropped += 1

        # regular sensing traffic in the owner's slot
        for node in self.nodes:
            if node.node_class is not NodeClass.FOLLOWER or not is_alive(node):
                continue
            if node.role is not Role.LN:
                continue
            if node.schedule is None or node.schedule.tdma_slot != slot:
                continue
            if node.malicious and self.round >= cfg.attack.start_round:
                continue  # active attackers replace sensing with their flood
            parent_id = self.parent.get(node.id)
            if parent_id is None:
                continue
            parent = self.by_id[parent_id]
            pkt = Packet(
                src=node.id,
                dst=parent_id,
                kind=PacketKind.SENSOR_DATA,
                token=WakeupToken(owner=node.id, valid=True),
                slot=slot,
                payload_size=cfg.traffic.data_bits,
            )
            self._charge_tx(node, pkt.payload_size, node.distance_to(parent))
            self._observe_tx(pkt, slot)
            if not is_alive(parent) or node.distance_to(parent) > self.graph.transmission_range:
                self._dropped += 1
                continue
            if self.ledgers.is_quarantined(node.id):
                self._dropped += 1  # roster is known; junk is not picked up
                continue
            self._charge_rx(parent, pkt.payload_size)
            self._delivered += 1
            self._note_receipt(parent_id, node.id)
            if parent.role is Role.SC:
                self._sc_valid.setdefault(parent_id, []).append(pkt)
            elif parent_id in coordinators:
                self._cc_inbox.setdefault(parent_id, []).append(pkt)

    def _note_receipt(self, receiver_id, src_id):
        self._received_at[(receiver_id, src_id)] = (
            self._received_at.get((receiver_id, src_id), 0) + 1
        )
        if self._watches(receiver_id, src_id):
            self._observation(receiver_id, src_id).packets_to_watcher += 1

    def _charge_slot_costs(self, masks):
        """Baseline duty cost by the scheduled state: a forced wake already
        paid the listen/sleep difference at delivery time."""
        cfg = self.config
        for node in self.nodes:
            if not is_alive(node):
                continue
            if node.id == self.sink.id or node.id in self.always_on:
                consume(node, self.params.p_listen * cfg.slots_per_round)
                continue
            mask = masks.get(node.id)
            if mask is None:
                continue
            cost = sum(
                self.params.p_listen if awake else self.params.p_sleep for awake in mask
            )
            consume(node, cost)

    # ------------------------------------------------------------------
    # observations

    def _watcher_of(self, node_id: int):
        """The detection node that promiscuously observes this node, if any."""
        if self.config.mode == "imids":
            for cluster in self.clusters:
                for sector in cluster.sectors:
                    if node_id in sector.leaves:
                        return sector.coordinator
            return None
        for cluster in self.clusters:
            if node_id in cluster.members:
                return cluster.coordinator
        return None

    def _watches(self, watcher_id, subject_id) -> bool:
        if self.config.mode == "itids":
            cluster = self._cluster_of(subject_id)
            return cluster is not None and watcher_id in self.monitors.get(cluster.id, ())
        return self._watcher_of(subject_id) == watcher_id

    def _observe_tx(self, pkt: Packet, slot: int):
        """Record a transmission with everyone watching the source.

        Overhearing is not free: a watcher that is not the addressee keeps
        its radio receiving for the whole packet and pays for it. This is
        what makes an always-on promiscuous monitor expensive to run,
        while a coordinator watching traffic addressed to itself pays
        nothing extra."""
        src_id = pkt.src
        if self.config.mode == "itids":
            cluster = self._cluster_of(src_id)
            if cluster is None:
                return
            for monitor_id in self.monitors.get(cluster.id, ()):
                if monitor_id == src_id:
                    continue
                monitor = self.by_id[monitor_id]
                if not is_alive(monitor) or self.ledgers.is_quarantined(monitor_id):
                    continue
                if self.graph.has_edge(monitor_id, src_id):
                    self._observation(monitor_id, src_id).tx_events.append(
                        (slot, pkt.token.valid)
                    )
                    if monitor_id != pkt.dst:
                        consume(monitor, rx_cost(self.params, pkt.payload_size))
            return
        watcher_id = self._watcher_of(src_id)
        if watcher_id is None:
            return
        watcher = self.by_id[watcher_id]
        if not is_alive(watcher) or self.ledgers.is_quarantined(watcher_id):
            return
        if self.graph.has_edge(watcher_id, src_id):
            self._observation(watcher_id, src_id).tx_events.append((slot, pkt.token.valid))
            if watcher_id != pkt.dst:
                consume(watcher, rx_cost(self.params, pkt.payload_size))

    def _observation(self, watcher_id, subject_id) -> Observation:
        key = (watcher_id, subject_id)
        if key not in self._obs:
            self._obs[key] = Observation(subject=subject_id)
        return self._obs[key]

    def _cluster_of(self, node_id):
        for cluster in self.clusters:
            if node_id == cluster.coordinator or node_id in cluster.members:
                return cluster
        return None

    def _inject_false_strikes(self, r: int):
        """Scenario hook: a spurious strike charged against a benign node,
        standing in for a misjudgment at the screening layer."""
        for item in self.config.detection.injected_false_strikes:
            node_id, at_round = int(item[0]), int(item[1])
            if at_round != r:
                continue
            node = self.by_id.get(node_id)
            if node is None or not is_alive(node) or self.ledgers.is_quarantined(node_id):
                continue
            node.trust = trust_penalize(node.trust)
            ids_mod.add_strikes(self.ledgers, node_id, (ids_mod.Reason.ENERGY_RATE,), r)

    # ------------------------------------------------------------------
    # detection ladder

    def _detection_phase(self, r):
        if self.config.mode == "itids":
            self._itids_detection(r)
            return
        self._sids_stage(r)
        self._forwarding_stage(r)
        self._monitor_stage(r)
        self._sink_stage(r)

    def _screening_pairs(self):
        """(watcher, subjects) pairs for the screening stage, per mode."""
        pairs = []
        for cluster in sorted(self.clusters, key=lambda c: c.id):
            if self.config.mode == "imids":
                for sector in cluster.sectors:
                    pairs.append((sector.coordinator, sorted(sector.leaves)))
            else:
                pairs.append((cluster.coordinator, sorted(cluster.members)))
        return pairs

    def _sids_stage(self, r):
        cfg = self.config
        for watcher_id, subject_ids in self._screening_pairs():
            watcher = self.by_id[watcher_id]
            if not is_alive(watcher) or self.ledgers.is_quarantined(watcher_id):
                continue
            if watcher.malicious and r >= cfg.attack.start_round:
                continue  # a compromised screen simply stops screening
            if not watcher.energy.detection_enabled:
                continue
            subjects = {
                s: self.by_id[s] for s in subject_ids if is_alive(self.by_id[s])
            }
            observations = {
                s: self._obs.get((watcher_id, s), Observation(subject=s))
                for s in subjects
            }
            ids_mod.sids_check(
                watcher, subjects, observations, self.profiles,
                cfg.detection, self.params, self.ledgers, r,
            )

    def _forwarding_stage(self, r):
        """Sector coordinators aggregate their valid leaf traffic upward."""
        cfg = self.config
        bits = cfg.traffic.aggregate_bits
        for cluster in sorted(self.clusters, key=lambda c: c.id):
            cc = self.by_id[cluster.coordinator]
            for sector in cluster.sectors:
                sc = self.by_id[sector.coordinator]
                if not is_alive(sc):
                    continue
                valid = [
                    p for p in self._sc_valid.get(sc.id, [])
                    if p.token.valid and not self.ledgers.is_quarantined(p.src)
                ]
                sources = sorted({p.src for p in valid})
                if not self.ledgers.is_quarantined(sc.id):
                    sources.append(sc.id)  # own reading rides along
                active_attacker = sc.malicious and r >= cfg.attack.start_round
                agg = Packet(
                    src=sc.id,
                    dst=self.parent.get(sc.id, cluster.coordinator),
                    kind=PacketKind.SENSOR_DATA,
                    token=WakeupToken(owner=sc.id, valid=not active_attacker),
                    slot=AGGREGATE_SLOT,
                    payload_size=bits,
                    sources=tuple(sources),
                )
                hop = self.by_id[agg.dst]
                self._charge_tx(sc, bits, sc.distance_to(hop))
                if not is_alive(hop) or self.ledgers.is_quarantined(sc.id):
                    self._dropped += 1
                    continue
                self._charge_rx(hop, bits)
                self._delivered += 1
                if hop.id != cluster.coordinator:
                    # forwarding head relays to the coordinator
                    self.ledgers.forwarding_log.append((r, hop.id, sc.id))
                    if not is_alive(cc):
                        self._dropped += 1
                        continue
                    self._charge_tx(hop, bits, hop.distance_to(cc))
                    if self.ledgers.is_quarantined(hop.id):
                        self._dropped += 1
                        continue
                    self._charge_rx(cc, bits)
                    self._delivered += 1
                self._cc_inbox.setdefault(cluster.coordinator, []).append(agg)
                self._note_receipt(cluster.coordinator, sc.id)

    def _monitor_stage(self, r):
        """Sector monitors pass window verdicts over every open suspect."""
        cfg = self.config
        for suspect_id in sorted(self.ledgers.suspected):
            if self.ledgers.is_quarantined(suspect_id):
                continue
            suspect = self.by_id[suspect_id]
            entry = self.ledgers.suspected[suspect_id]
            decision = None
            decided_by = None
            for judge_id in self._judges_for(suspect_id):
                judge = self.by_id[judge_id]
                try:
                    decision = ids_mod.exids_decide(
                        judge, suspect, entry, r, cfg.detection, self.params
                    )
                    decided_by = judge_id
                except ids_mod.DisabledIds:
                    continue
            if decision is None:
                continue
            self.ledgers.decision_log.append((r, decided_by, suspect_id, decision))
            if decision is Decision.MALICIOUS:
                if ids_mod.quarantine(self.ledgers, suspect_id, r):
                    self._broadcast_roster_update(suspect_id)
            elif decision is Decision.REHABILITATED:
                ids_mod.rehabilitate(self.ledgers, suspect)

    def _usable_judge(self, node_id) -> bool:
        node = self.by_id[node_id]
        return (
            is_alive(node)
            and not self.ledgers.is_quarantined(node_id)
            and node.energy.detection_enabled
            and not (node.malicious and self.round >= self.config.attack.start_round)
        )

    def _judges_for(self, suspect_id):
        """Monitors of the suspect's own sector judge it; lacking those, any
        monitor of the cluster, then the coordinator. A suspect nobody local
        can judge (typically a coordinator gone bad) escalates to the sink."""
        cluster = self._cluster_of(suspect_id)
        if cluster is not None and self.config.mode == "imids":
            own_sector = []
            cluster_wide = []
            for sector in cluster.sectors:
                usable = [
                    m for m in sector.monitors
                    if m != suspect_id and self._usable_judge(m)
                ]
                cluster_wide.extend(usable)
                if suspect_id in sector.leaves or suspect_id == sector.coordinator:
                    own_sector.extend(usable)
            pool = own_sector or cluster_wide
            if pool:
                return sorted(set(pool))
        if cluster is not None:
            cc_id = cluster.coordinator
            if cc_id != suspect_id and self._usable_judge(cc_id):
                return [cc_id]
        if self._usable_judge(self.sink.id):
            return [self.sink.id]
        return []

    def _validate_sink_inbox(self, r):
        """Raw traffic landing on the sink directly (a coordinator gone
        rogue floods its uplink like everyone else) faces the same checks
        the coordinators apply."""
        inbox = self._cc_inbox.pop(self.sink.id, None)
        if not inbox:
            return
        for pkt in sorted(inbox, key=lambda p: (p.src, p.slot)):
            subject = self.by_id[pkt.src]
            expected = subject.schedule.tdma_slot if subject.schedule else None
            try:
                result = ids_mod.cc_validate(
                    self.sink,
                    pkt,
                    expected,
                    self._received_at.get((self.sink.id, pkt.src), 0),
                    1.0,
                    self.ledgers,
                    self.config.detection,
                    self.params,
                    r,
                )
            except ids_mod.DisabledIds:
                return
            if not result.accepted:
                self._dropped += 1

    def _sink_stage(self, r):
        """Coordinators validate their inbox and the sink re-validates theirs."""
        cfg = self.config
        self._validate_sink_inbox(r)
        sink_inbox = []
        for cluster in sorted(self.clusters, key=lambda c: c.id):
            cc = self.by_id[cluster.coordinator]
            if not is_alive(cc):
                continue
            cc_active_attacker = cc.malicious and r >= cfg.attack.start_round
            accepted_sources = []
            for pkt in sorted(
                self._cc_inbox.get(cc.id, []), key=lambda p: (p.src, p.slot)
            ):
                if not cc.energy.detection_enabled or cc_active_attacker:
                    # an unguarded coordinator forwards whatever it received
                    accepted_sources.extend(pkt.sources or (pkt.src,))
                    continue
                subject = self.by_id[pkt.src]
                expected_slot = (
                    AGGREGATE_SLOT
                    if pkt.slot == AGGREGATE_SLOT
                    else (subject.schedule.tdma_slot if subject.schedule else None)
                )
                try:
                    result = ids_mod.cc_validate(
                        cc,
                        pkt,
                        expected_slot,
                        self._received_at.get((cc.id, pkt.src), 0),
                        1.0,
                        self.ledgers,
                        cfg.detection,
                        self.params,
                        r,
                    )
                except ids_mod.DisabledIds:
                    accepted_sources.extend(pkt.sources or (pkt.src,))
                    continue
                if result.accepted:
                    for source in pkt.sources or (pkt.src,):
                        self.ledgers.valid_log.append((r, source))
                        accepted_sources.append(source)
                else:
                    self._dropped += 1
            if not accepted_sources:
                continue
            agg = Packet(
                src=cc.id,
                dst=self.sink.id,
                kind=PacketKind.SENSOR_DATA,
                token=WakeupToken(owner=cc.id, valid=not cc_active_attacker),
                slot=AGGREGATE_SLOT,
                payload_size=cfg.traffic.aggregate_bits,
                sources=tuple(sorted(set(accepted_sources))),
            )
            self._charge_tx(cc, agg.payload_size, cc.distance_to(self.sink))
            if self.ledgers.is_quarantined(cc.id):
                self._dropped += 1
                continue
            self._charge_rx(self.sink, agg.payload_size)
            self._delivered += 1
            sink_inbox.append(agg)
        for pkt in sorted(sink_inbox, key=lambda p: p.src):
            try:
                result = ids_mod.cc_validate(
                    self.sink, pkt, AGGREGATE_SLOT, 1, 1.0,
                    self.ledgers, cfg.detection, self.params, r,
                )
            except ids_mod.DisabledIds:
                continue
            if result.accepted:
                self.ledgers.sn_log.append((r, pkt.src))
                for source in pkt.sources:
                    self.ledgers.sn_log.append((r, source))
            else:
                self._dropped += 1

    def _itids_detection(self, r):
        """Baseline ladder: every monitor screens the cluster members it can
        hear, and one strike sends the subject straight to isolation."""
        cfg = self.config
        for cluster in sorted(self.clusters, key=lambda c: c.id):
            for monitor_id in self.monitors.get(cluster.id, ()):
                monitor = self.by_id[monitor_id]
                if not is_alive(monitor) or self.ledgers.is_quarantined(monitor_id):
                    continue
                if monitor.malicious and r >= cfg.attack.start_round:
                    continue
                if not monitor.energy.detection_enabled:
                    continue
                subjects = {
                    m: self.by_id[m]
                    for m in sorted(cluster.node_ids())
                    if m != monitor_id
                    and is_alive(self.by_id[m])
                    and self.graph.has_edge(monitor_id, m)
                }
                observations = {
                    m: self._obs.get((monitor_id, m), Observation(subject=m))
                    for m in subjects
                }
                ids_mod.sids_check(
                    monitor, subjects, observations, self.profiles,
                    cfg.detection, self.params, self.ledgers, r,
                )
        # single strike suffices; no window, no rehabilitation, ever
        for suspect_id in sorted(self.ledgers.suspected):
            if self.ledgers.is_quarantined(suspect_id):
                continue
            if ids_mod.quarantine(self.ledgers, suspect_id, r):
                self.ledgers.decision_log.append((r, None, suspect_id, Decision.MALICIOUS))
                self._broadcast_roster_update(suspect_id)
        # the coordinator forwards whatever its non-isolated members sent
        for cluster in sorted(self.clusters, key=lambda c: c.id):
            cc = self.by_id[cluster.coordinator]
            if not is_alive(cc):
                continue
            sources = sorted(
                src
                for (dst, src), count in self._received_at.items()
                if dst == cc.id and count > 0 and not self.ledgers.is_quarantined(src)
            )
            if not sources:
                continue
            self._charge_tx(cc, cfg.traffic.aggregate_bits, cc.distance_to(self.sink))
            if self._charge_rx(self.sink, cfg.traffic.aggregate_bits):
                self._delivered += 1
                self.ledgers.sn_log.append((r, cc.id))
                for source in sources:
                    self.ledgers.sn_log.append((r, source))

    def _broadcast_roster_update(self, node_id):
        """Cluster-wide notice that a node was isolated; receivers filter
        its traffic from now on."""
        bits = self.config.traffic.control_bits
        cluster = self._cluster_of(node_id)
        if cluster is None:
            return
        cc = self.by_id[cluster.coordinator]
        if not is_alive(cc):
            return
        self._charge_tx(cc, bits, self.graph.transmission_range)
        for member_id in sorted(cluster.members):
            member = self.by_id[member_id]
            if is_alive(member):
                self._charge_rx(member, bits)

    # ------------------------------------------------------------------
    # reconfiguration

    def _role_failed(self, node_id) -> bool:
        """Detection-role holders fail on death, quarantine, or exhausted
        detection budget."""
        node = self.by_id[node_id]
        return (
            not is_alive(node)
            or self.ledgers.is_quarantined(node_id)
            or not node.energy.detection_enabled
        )

    def _check_cluster(self, cluster):
        """Decide whether the cluster must rebuild and whether that includes
        replacing the coordinator. Rotation maintains the defining
        invariants within a hysteresis band: the coordinator holds the
        best capacity, a sector coordinator the best residual energy."""
        cfg = self.config
        cc = self.by_id[cluster.coordinator]
        if self._role_failed(cluster.coordinator):
            return True, True, f"cluster {cluster.id}: coordinator {cluster.coordinator} failed"
        eligible = [
            self.by_id[m]
            for m in cluster.node_ids()
            if self.by_id[m].node_class is NodeClass.LEADER
            and is_alive(self.by_id[m])
            and not self.ledgers.is_quarantined(m)
            and self.by_id[m].trust.nibble >= cfg.detection.reputation_min
        ]
        if eligible:
            best = max(topo.capacity(n, self.graph) for n in eligible)
            if topo.capacity(cc, self.graph) < cfg.rotation_hysteresis * best:
                return True, True, f"cluster {cluster.id}: coordinator rotation"
        for sector in cluster.sectors:
            if self._role_failed(sector.coordinator):
                return True, False, (
                    f"cluster {cluster.id}: sector coordinator {sector.coordinator} failed"
                )
            if sector.fsh is not None:
                fsh = self.by_id[sector.fsh]
                if not is_alive(fsh) or self.ledgers.is_quarantined(sector.fsh):
                    return True, False, (
                        f"cluster {cluster.id}: forwarding head {sector.fsh} failed"
                    )
            if sector.monitors and all(self._role_failed(m) for m in sector.monitors):
                return True, False, (
                    f"cluster {cluster.id}: monitors of sector {sector.coordinator} failed"
                )
            sc = self.by_id[sector.coordinator]
            peers = [
                self.by_id[leaf]
                for leaf in sector.leaves
                if is_alive(self.by_id[leaf]) and not self.ledgers.is_quarantined(leaf)
            ]
            if peers:
                best = max(p.energy.residual_energy for p in peers)
                if sc.energy.residual_energy < cfg.rotation_hysteresis * best:
                    return True, False, (
                        f"cluster {cluster.id}: sector rotation at {sector.coordinator}"
                    )
        return False, False, ""

    def _reconfiguration_sweep(self, events):
        cfg = self.config
        if any(not is_alive(n) for n in self.nodes):
            self.graph = topo.build_graph(self.nodes, cfg.deployment.transmission_range)
        quarantined = self._quarantined_set()
        for cluster in self.clusters:
            cluster.members -= quarantined  # isolated nodes leave the roster
            for sector in cluster.sectors:
                sector.leaves -= quarantined
        surviving = []
        rebuilt = []
        stranded = []
        for cluster in self.clusters:
            needs, replace_cc, reason = self._check_cluster(cluster)
            if not needs:
                surviving.append(cluster)
                continue
            events.append(reason)
            pool = {
                m for m in cluster.node_ids()
                if is_alive(self.by_id[m]) and m not in quarantined
            }
            if replace_cc:
                eligible = [
                    self.by_id[m]
                    for m in pool
                    if self.by_id[m].node_class is NodeClass.LEADER
                    and self.by_id[m].trust.nibble >= cfg.detection.reputation_min
                    and not self._role_failed(m)
                ]
                if not eligible:
                    events.append(f"cluster {cluster.id}: dissolved, no leader left")
                    stranded.extend(sorted(pool))
                    continue
                new_cc = min(
                    eligible,
                    key=lambda n: (
                        -topo.capacity(n, self.graph),
                        n.distance_to(self.sink),
                        n.id,
                    ),
                )
                if new_cc.id != cluster.coordinator:
                    events.append(f"cluster {cluster.id}: coordinator -> {new_cc.id}")
                cluster.coordinator = new_cc.id
                keep = set()
                for member_id in pool - {new_cc.id}:
                    member = self.by_id[member_id]
                    if member.distance_to(new_cc) <= self.graph.transmission_range:
                        keep.add(member_id)
                    else:
                        stranded.append(member_id)
                cluster.members = keep
            else:
                cluster.members = pool - {cluster.coordinator}
            surviving.append(cluster)
            rebuilt.append(cluster)
        self.clusters = surviving
        for node_id in sorted(set(stranded) | self.orphans):
            self._try_adopt(node_id, events)
        self._build_structures(rebuild=rebuilt)
        if rebuilt:
            self._charge_formation(rebuilt)

    def _try_adopt(self, node_id, events):
        node = self.by_id.get(node_id)
        if node is None or not is_alive(node) or self.ledgers.is_quarantined(node_id):
            self.orphans.discard(node_id)
            return
        candidates = [
            c for c in self.clusters
            if is_alive(self.by_id[c.coordinator])
            and node.distance_to(self.by_id[c.coordinator]) <= self.graph.transmission_range
        ]
        if not candidates:
            self.orphans.add(node_id)
            return
        best = min(
            candidates,
            key=lambda c: (node.distance_to(self.by_id[c.coordinator]), c.coordinator),
        )
        best.members.add(node_id)
        self.orphans.discard(node_id)
        bits = self.config.traffic.control_bits
        self._charge_tx(node, bits, node.distance_to(self.by_id[best.coordinator]))
        self._charge_rx(self.by_id[best.coordinator], bits)
        events.append(f"node {node_id} adopted by cluster {best.id}")

    # ------------------------------------------------------------------

    def alive_non_sink(self) -> int:
        return sum(
            1 for n in self.nodes if n.node_class is not NodeClass.SINK and is_alive(n)
        )

    def snapshot_trace(self) -> SimulationTrace:
        if self.config.mode == "itids":
            monitor_count = sum(len(m) for m in self.monitors.values())
        else:
            monitor_count = sum(1 for n in self.nodes if n.role is Role.SM)
        return SimulationTrace(
            config=config_to_dict(self.config),
            mode=self.config.mode,
            seed=self.config.seed,
            attacker_ids=sorted(self.attackers),
            positions={n.id: (n.position.x, n.position.y) for n in self.nodes},
            roles_initial={n.id: n.role.value for n in self.nodes},
            cluster_count=len(self.clusters),
            sector_count=sum(len(c.sectors) for c in self.clusters),
            monitor_count=monitor_count,
            initial_energy={n.id: n.energy.initial_energy for n in self.nodes},
            init_energy_spent=dict(self.init_energy_spent),
        )


def initialize(config: ScenarioConfig) -> Simulation:
    return Simulation(config)


def run_round(sim: Simulation) -> RoundReport:
    if sim.alive_non_sink() == 0:
        raise RuntimeError("cannot run a round: every non-sink node is dead")
    return sim.run_round()


def run_simulation(config: ScenarioConfig) -> SimulationTrace:
    sim = Simulation(config)
    trace = sim.snapshot_trace()
    for _ in range(config.rounds):
        if sim.alive_non_sink() == 0:
            trace.extinction_round = sim.round
            break
        trace.reports.append(sim.run_round())
    trace.final_energy = {n.id: n.energy.residual_energy for n in sim.nodes}
    trace.final_confusion = ids_mod.compute_confusion(
        sim.nodes, set(sim.ledgers.quarantined), sim.sink.id
    )
    trace.ledgers = sim.ledgers
    return trace
