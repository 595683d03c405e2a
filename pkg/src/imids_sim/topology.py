"""Deployment, connectivity, and the election machinery for clusters and sectors.

The hierarchy is rebuilt from measurable quantities only: capacity (degree
scaled by remaining energy) elects cluster coordinators, residual energy
elects sector coordinators, detection reserves elect sector monitors, and
hop distance to the coordinator elects the forwarding sector head. Every
tie-break ends in the node id so elections are reproducible.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .core import (
    NodeClass,
    NodeState,
    Position,
    Role,
    SensorNode,
    is_alive,
    make_energy_account,
)

SINK_ID = 0


class CoverageFailure(Exception):
    """No eligible coordinator can cover the remaining nodes."""


class UnreachableNode(Exception):
    """A node has no coordinator inside its transmission range."""


class MonitorUnavailable(Exception):
    """A cluster holds no leader that could take a monitoring duty."""


@dataclass
class TransmissionGraph:
    transmission_range: float
    adjacency: dict = field(default_factory=dict)

    def neighbors(self, node_id: int) -> list:
        return self.adjacency.get(node_id, [])

    def degree(self, node_id: int) -> int:
        return len(self.adjacency.get(node_id, []))

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adjacency.get(a, [])


@dataclass
class Sector:
    coordinator: int
    leaves: set = field(default_factory=set)
    monitors: tuple = ()
    fsh: int | None = None

    def node_ids(self) -> set:
        return {self.coordinator} | set(self.leaves)


@dataclass
class Cluster:
    id: int
    coordinator: int
    members: set = field(default_factory=set)
    sectors: list = field(default_factory=list)

    def node_ids(self) -> set:
        return {self.coordinator} | set(self.members)


@dataclass
class Topology:
    nodes: list
    graph: TransmissionGraph
    clusters: list
    roles: dict
    transmission_range: float
    sink_id: int = SINK_ID


def deploy(deployment, rng) -> list:
    """Place `node_count` nodes and hand out per-class initial energies.

    Node ids run 0..n-1 with the sink at id 0. Explicit coordinates are
    echoed back verbatim when provided; otherwise non-sink nodes land
    uniformly in the area and the sink sits at its configured position.
    """
    n = deployment.node_count
    if n < 3:
        raise ValueError("need at least three nodes (sink, leader, follower)")
    if deployment.area_width <= 0 or deployment.area_height <= 0:
        raise ValueError("deployment area must be positive")

    place_rng = rng.derive("deploy", "positions")
    if deployment.positions is not None:
        if len(deployment.positions) != n:
            raise ValueError("explicit position list must match node_count")
        positions = [Position(float(x), float(y)) for x, y in deployment.positions]
    else:
        sink_xy = deployment.sink_position
        if sink_xy is None:
            sink_xy = (deployment.area_width / 2.0, deployment.area_height / 2.0)
        positions = [Position(float(sink_xy[0]), float(sink_xy[1]))]
        for _ in range(n - 1):
            positions.append(
                Position(
                    place_rng.uniform(0.0, deployment.area_width),
                    place_rng.uniform(0.0, deployment.area_height),
                )
            )

    leader_count = max(1, round(deployment.leader_fraction * (n - 1)))
    leader_count = min(leader_count, n - 2)  # keep at least one follower
    class_rng = rng.derive("deploy", "classes")
    leader_ids = set(class_rng.sample(range(1, n), leader_count))

    nodes = []
    for node_id in range(n):
        if node_id == SINK_ID:
            initial = deployment.sink_initial_energy
            node_class = NodeClass.SINK
        elif node_id in leader_ids:
            initial = deployment.leader_initial_energy
            node_class = NodeClass.LEADER
        else:
            initial = deployment.follower_initial_energy
            node_class = NodeClass.FOLLOWER
        nodes.append(
            SensorNode(
                id=node_id,
                position=positions[node_id],
                node_class=node_class,
                role=Role.SN if node_id == SINK_ID else Role.LN,
                state=NodeState.LISTEN,
                energy=make_energy_account(initial),
            )
        )
    return nodes


def build_graph(nodes, transmission_range: float) -> TransmissionGraph:
    """Symmetric range graph: an edge exists iff both ends are alive and
    their distance does not exceed the transmission range (inclusive)."""
    if transmission_range <= 0:
        raise ValueError("transmission range must be positive")
    alive = [n for n in nodes if is_alive(n)]
    adjacency = {n.id: [] for n in alive}
    for i, a in enumerate(alive):
        for b in alive[i + 1:]:
            if a.distance_to(b) <= transmission_range:
                adjacency[a.id].append(b.id)
                adjacency[b.id].append(a.id)
    for neighbor_list in adjacency.values():
        neighbor_list.sort()
    return TransmissionGraph(transmission_range=transmission_range, adjacency=adjacency)


def classify_nodes(nodes, leader_energy_threshold: float) -> None:
    """Split non-sink nodes into leaders and followers by initial energy."""
    leaders = 0
    for node in nodes:
        if node.node_class is NodeClass.SINK:
            continue
        if node.energy.initial_energy >= leader_energy_threshold:
            node.node_class = NodeClass.LEADER
            leaders += 1
        else:
            node.node_class = NodeClass.FOLLOWER
    if leaders == 0:
        raise CoverageFailure("no node qualifies as leader under the energy threshold")


def capacity(node: SensorNode, graph: TransmissionGraph) -> float:
    """Coordination capacity: connectivity weighted by remaining charge."""
    if node.energy.initial_energy <= 0:
        return 0.0
    return graph.degree(node.id) / node.energy.initial_energy * node.energy.residual_energy


def _cc_eligible(node, quarantined, reputation_min) -> bool:
    return (
        node.node_class is NodeClass.LEADER
        and is_alive(node)
        and node.id not in quarantined
        and node.trust.nibble >= reputation_min
    )


def select_cluster_coordinators(
    nodes, graph, reputation_min: int = 8, quarantined=frozenset()
) -> list:
    """Greedy disk cover by capacity.

    Repeatedly elect the eligible leader with the highest capacity among
    those whose range disk still claims at least one uncovered node; ties
    go to the smaller distance to the sink, then the smaller id. Fails if
    some alive non-sink node can never be covered.
    """
    by_id = {n.id: n for n in nodes}
    sink = by_id[SINK_ID]
    uncovered = {n.id for n in nodes if is_alive(n) and n.node_class is not NodeClass.SINK}
    eligible = [n for n in nodes if _cc_eligible(n, quarantined, reputation_min)]
    coordinators = []
    while uncovered:
        best = None
        best_key = None
        for node in eligible:
            if node.id in coordinators:
                continue
            claims = {node.id} | set(graph.neighbors(node.id))
            if not claims & uncovered:
                continue
            key = (-capacity(node, graph), node.distance_to(sink), node.id)
            if best is None or key < best_key:
                best = node
                best_key = key
        if best is None:
            raise CoverageFailure(f"uncoverable nodes remain: {sorted(uncovered)}")
        coordinators.append(best.id)
        uncovered -= {best.id} | set(graph.neighbors(best.id))
    return coordinators


def form_clusters(nodes, coordinator_ids, graph, rng: random.Random) -> list:
    """Attach every alive non-sink node to its strongest coordinator.

    Signal strength is modeled as 1/d^2, so the nearest coordinator wins;
    exact distance ties are broken uniformly at random. Membership is
    exclusive.
    """
    by_id = {n.id: n for n in nodes}
    clusters = [
        Cluster(id=idx, coordinator=cc) for idx, cc in enumerate(sorted(coordinator_ids))
    ]
    slot_of = {c.coordinator: c for c in clusters}
    for node in nodes:
        if not is_alive(node) or node.node_class is NodeClass.SINK:
            continue
        if node.id in slot_of:
            continue
        in_range = [
            cc for cc in slot_of
            if is_alive(by_id[cc]) and node.distance_to(by_id[cc]) <= graph.transmission_range
        ]
        if not in_range:
            raise UnreachableNode(f"node {node.id} has no coordinator in range")
        best_d = min(node.distance_to(by_id[cc]) for cc in in_range)
        tied = sorted(cc for cc in in_range if node.distance_to(by_id[cc]) == best_d)
        choice = tied[0] if len(tied) == 1 else rng.choice(tied)
        slot_of[choice].members.add(node.id)
    return clusters


def form_sectors(cluster: Cluster, nodes, graph, quarantined=frozenset()) -> list:
    """Partition the cluster's alive followers into disjoint sectors.

    Coordinators are seeded greedily: the unassigned follower with the
    most residual energy takes the job and tentatively claims unassigned
    followers within half the radio range, so each cluster splits into
    several small sectors rather than one big one. Every leaf then
    settles on its nearest coordinator, which keeps the data hops short.
    Quarantined followers never coordinate; they only ever join.
    """
    by_id = {n.id: n for n in nodes}
    followers = sorted(
        m for m in cluster.node_ids()
        if by_id[m].node_class is NodeClass.FOLLOWER and is_alive(by_id[m])
    )
    unassigned = set(followers)
    tainted = set(followers) & set(quarantined)
    radius = graph.transmission_range / 2.0
    coordinators = []
    while unassigned - tainted:
        candidates = sorted(unassigned - tainted)
        sc = max(candidates, key=lambda m: (by_id[m].energy.residual_energy, -m))
        coordinators.append(sc)
        claimed = {
            m for m in unassigned
            if m == sc or by_id[sc].distance_to(by_id[m]) <= radius
        }
        unassigned -= claimed
    if not coordinators:
        return []
    sectors = {sc: Sector(coordinator=sc, leaves=set()) for sc in coordinators}
    for member in followers:
        if member in sectors:
            continue
        nearest = min(
            coordinators,
            key=lambda sc: (by_id[member].distance_to(by_id[sc]), sc),
        )
        sectors[nearest].leaves.add(member)
    return [sectors[sc] for sc in coordinators]


def _monitor_candidates(cluster, nodes, quarantined):
    by_id = {n.id: n for n in nodes}
    return [
        by_id[m] for m in sorted(cluster.node_ids())
        if m != cluster.coordinator
        and by_id[m].node_class is NodeClass.LEADER
        and is_alive(by_id[m])
        and m not in quarantined
    ]


def prospective_detection_budget(node: SensorNode) -> float:
    """Budget a leader would bring as sector monitor (largest reserve share)."""
    from .core import DETECTION_FRACTION

    cap = DETECTION_FRACTION["SM"] * node.energy.initial_energy
    return min(cap, node.energy.residual_energy)


def select_sector_monitor(cluster, sector, nodes, graph, quarantined=frozenset()) -> tuple:
    """Pick the sector's monitors: non-CC leaders with maximal detection budget.

    Leaders adjacent to the sector are preferred; if none touch it, any
    non-CC leader of the cluster may monitor (scarce-leader fallback). All
    leaders tied at the maximum are selected.
    """
    candidates = _monitor_candidates(cluster, nodes, quarantined)
    if not candidates:
        raise MonitorUnavailable(f"cluster {cluster.id} has no spare leader")
    sector_ids = sector.node_ids()
    adjacent = [
        c for c in candidates
        if any(graph.has_edge(c.id, s) for s in sector_ids)
    ]
    pool = adjacent if adjacent else candidates
    best = max(prospective_detection_budget(c) for c in pool)
    return tuple(sorted(c.id for c in pool if prospective_detection_budget(c) == best))


def hop_distances(graph: TransmissionGraph, source: int) -> dict:
    """Breadth-first hop counts from `source` over the live graph."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        current = queue.popleft()
        for nxt in graph.neighbors(current):
            if nxt not in dist:
                dist[nxt] = dist[current] + 1
                queue.append(nxt)
    return dist


def select_fsh(cluster, sector, nodes, graph, quarantined=frozenset()) -> int:
    """Pick the sector's forwarding head: the non-CC leader closest to the
    CC in hops, then in meters, then by id."""
    candidates = _monitor_candidates(cluster, nodes, quarantined)
    if not candidates:
        raise MonitorUnavailable(f"cluster {cluster.id} has no spare leader")
    by_id = {n.id: n for n in nodes}
    cc = by_id[cluster.coordinator]
    hops = hop_distances(graph, cc.id)
    inf = float("inf")
    return min(
        candidates,
        key=lambda c: (hops.get(c.id, inf), c.distance_to(cc), c.id),
    ).id


def assign_roles(nodes, clusters, sink_id: int = SINK_ID) -> dict:
    """Derive the role map from the cluster/sector structure.

    Precedence CC > SM > FSH: when leaders are scarce one leader may both
    monitor a sector and forward for another, in which case it keeps the
    monitor role (and its detection reserve) while the sector's fsh field
    names it as forwarder. Leaders left without a duty become reserve
    monitors; everything else is a leaf.
    """
    roles = {}
    for node in nodes:
        if node.id == sink_id:
            roles[node.id] = Role.SN
        elif node.node_class is NodeClass.LEADER:
            roles[node.id] = Role.SM
        else:
            roles[node.id] = Role.LN
    for cluster in clusters:
        for sector in cluster.sectors:
            roles[sector.coordinator] = Role.SC
            if sector.fsh is not None:
                roles[sector.fsh] = Role.FSH
    for cluster in clusters:
        for sector in cluster.sectors:
            for sm in sector.monitors:
                roles[sm] = Role.SM
    for cluster in clusters:
        roles[cluster.coordinator] = Role.CC
    for node in nodes:
        node.role = roles[node.id]
    return roles
