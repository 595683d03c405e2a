import random
from collections import deque

import pytest

from imids_sim import topology as topo
from imids_sim.config import DeploymentConfig
from imids_sim.core import NodeClass, Role, TrustState, is_alive
from imids_sim.rng import SeededRng

from conftest import build_node, build_sink


def _graph(nodes, rng_range=40.0):
    return topo.build_graph(nodes, rng_range)


# --- deployment -------------------------------------------------------------


def test_deploy_is_deterministic_and_sink_first():
    dep = DeploymentConfig(node_count=30)
    a = topo.deploy(dep, SeededRng(5))
    b = topo.deploy(dep, SeededRng(5))
    assert [n.id for n in a] == list(range(30))
    assert a[0].node_class is NodeClass.SINK
    assert [(n.position.x, n.position.y) for n in a] == [
        (n.position.x, n.position.y) for n in b
    ]
    assert [n.node_class for n in a] == [n.node_class for n in b]


def test_deploy_leader_count_follows_fraction():
    dep = DeploymentConfig(node_count=41, leader_fraction=0.2)
    nodes = topo.deploy(dep, SeededRng(1))
    leaders = [n for n in nodes if n.node_class is NodeClass.LEADER]
    assert len(leaders) == round(0.2 * 40)
    assert all(n.energy.initial_energy == dep.leader_initial_energy for n in leaders)


def test_deploy_positions_inside_area():
    dep = DeploymentConfig(node_count=50, area_width=30.0, area_height=60.0)
    for node in topo.deploy(dep, SeededRng(3)):
        assert 0.0 <= node.position.x <= 30.0
        assert 0.0 <= node.position.y <= 60.0


def test_classify_nodes_by_threshold():
    nodes = [build_sink(), build_node(1, energy=2.0), build_node(2, energy=0.2)]
    topo.classify_nodes(nodes, leader_energy_threshold=1.0)
    assert nodes[1].node_class is NodeClass.LEADER
    assert nodes[2].node_class is NodeClass.FOLLOWER
    assert nodes[0].node_class is NodeClass.SINK


# --- range graph -------------------------------------------------------------


def test_graph_edges_symmetric_inclusive_and_alive_only():
    nodes = [
        build_sink(),
        build_node(1, 0, 0),
        build_node(2, 0, 40),   # exactly at range: edge exists
        build_node(3, 0, 40.1),
        build_node(4, 10, 0, energy=0.0),
    ]
    nodes[4].energy.residual_energy = 0.0
    g = _graph(nodes)
    assert g.has_edge(1, 2) and g.has_edge(2, 1)
    assert not g.has_edge(1, 3)  # 40.1 m, just past the range
    assert not g.has_edge(1, 4)  # dead node has no edges
    assert g.degree(4) == 0


# --- coordinator election vs brute-force oracle ------------------------------


def _oracle_election(nodes, graph, reputation_min=8):
    """Independent restatement of the election rule: repeatedly pick the
    eligible leader with the highest connectivity-weighted residual charge
    whose disk still claims an uncovered node; break ties by distance to
    the sink, then id."""
    by_id = {n.id: n for n in nodes}
    sink = by_id[topo.SINK_ID]
    uncovered = {
        n.id for n in nodes if is_alive(n) and n.node_class is not NodeClass.SINK
    }
    chosen = []
    while uncovered:
        ranked = []
        for n in nodes:
            if n.node_class is not NodeClass.LEADER or not is_alive(n):
                continue
            if n.trust.nibble < reputation_min or n.id in chosen:
                continue
            disk = {n.id} | set(graph.neighbors(n.id))
            if not disk & uncovered:
                continue
            cap = (
                graph.degree(n.id)
                * n.energy.residual_energy
                / n.energy.initial_energy
            )
            ranked.append((-cap, n.distance_to(sink), n.id, disk))
        if not ranked:
            raise topo.CoverageFailure("oracle: uncoverable")
        ranked.sort(key=lambda item: item[:3])
        _, _, winner, disk = ranked[0]
        chosen.append(winner)
        uncovered -= disk
    return chosen


def _random_instance(rng):
    count = rng.randint(4, 10)
    nodes = [build_sink(rng.uniform(0, 50), rng.uniform(0, 50))]
    for i in range(1, count):
        if rng.random() < 0.5:
            node = build_node(
                i, rng.uniform(0, 50), rng.uniform(0, 50),
                energy=rng.uniform(1.0, 2.0), node_class=NodeClass.LEADER,
                role=Role.SM,
            )
            node.energy.residual_energy = rng.uniform(0.3, 1.0) * node.energy.initial_energy
        else:
            node = build_node(
                i, rng.uniform(0, 50), rng.uniform(0, 50),
                energy=rng.uniform(0.1, 0.3),
            )
        nodes.append(node)
    return nodes


def test_election_matches_oracle_on_random_instances():
    rng = random.Random(2024)
    checked = 0
    attempts = 0
    while checked < 50 and attempts < 500:
        attempts += 1
        nodes = _random_instance(rng)
        graph = _graph(nodes, rng_range=35.0)
        try:
            expected = _oracle_election(nodes, graph)
        except topo.CoverageFailure:
            with pytest.raises(topo.CoverageFailure):
                topo.select_cluster_coordinators(nodes, graph)
            continue
        assert topo.select_cluster_coordinators(nodes, graph) == expected
        checked += 1
    assert checked == 50


def test_election_tie_breaks_by_sink_distance_then_id():
    # two identical leaders; 2 is closer to the sink and must win
    nodes = [
        build_sink(0, 0),
        build_node(1, 0, 30, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 0, 20, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(3, 0, 25, energy=0.2),
    ]
    g = _graph(nodes)
    assert topo.select_cluster_coordinators(nodes, g)[0] == 2


def test_election_skips_distrusted_leaders():
    nodes = [
        build_sink(0, 0),
        build_node(1, 0, 10, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 0, 12, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(3, 0, 15, energy=0.2),
    ]
    nodes[1].trust = TrustState(nibble=5)
    g = _graph(nodes)
    assert 1 not in topo.select_cluster_coordinators(nodes, g)


# --- cluster membership -------------------------------------------------------


def test_form_clusters_nearest_coordinator_wins(rng):
    nodes = [
        build_sink(0, 0),
        build_node(1, 10, 10, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 40, 10, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(3, 14, 10, energy=0.2),
        build_node(4, 38, 10, energy=0.2),
    ]
    g = _graph(nodes)
    clusters = topo.form_clusters(nodes, [1, 2], g, rng)
    members = {c.coordinator: c.members for c in clusters}
    assert members[1] == {3}
    assert members[2] == {4}


def test_form_clusters_unreachable_node_raises(rng):
    nodes = [
        build_sink(0, 0),
        build_node(1, 0, 10, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 0, 90, energy=0.2),
    ]
    g = _graph(nodes)
    with pytest.raises(topo.UnreachableNode):
        topo.form_clusters(nodes, [1], g, rng)


def test_form_clusters_exact_tie_uses_rng_deterministically():
    nodes = [
        build_sink(0, 0),
        build_node(1, 10, 0, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 30, 0, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(3, 20, 0, energy=0.2),  # equidistant from both
    ]
    g = _graph(nodes)
    pick = lambda seed: next(
        c.coordinator
        for c in topo.form_clusters(nodes, [1, 2], g, random.Random(seed))
        if 3 in c.members
    )
    assert pick(3) == pick(3)
    assert {pick(s) for s in range(12)} == {1, 2}  # both outcomes reachable


# --- sectors ------------------------------------------------------------------


def _cluster_fixture():
    nodes = [
        build_sink(0, 0),
        build_node(1, 50, 50, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 40, 50, energy=0.20),
        build_node(3, 42, 50, energy=0.19),
        build_node(4, 60, 50, energy=0.18),
        build_node(5, 62, 50, energy=0.17),
        build_node(6, 44, 50, energy=0.16),
    ]
    cluster = topo.Cluster(id=0, coordinator=1, members={2, 3, 4, 5, 6})
    return nodes, cluster


def test_sectors_partition_alive_followers():
    nodes, cluster = _cluster_fixture()
    g = _graph(nodes)
    sectors = topo.form_sectors(cluster, nodes, g)
    seen = set()
    for sector in sectors:
        ids = sector.node_ids()
        assert not ids & seen  # disjoint
        seen |= ids
    assert seen == {2, 3, 4, 5, 6}


def test_sector_coordinator_is_highest_residual_seed():
    nodes, cluster = _cluster_fixture()
    g = _graph(nodes)
    sectors = topo.form_sectors(cluster, nodes, g)
    assert sectors[0].coordinator == 2  # highest residual follower seeds first


def test_leaves_join_nearest_coordinator():
    nodes, cluster = _cluster_fixture()
    g = _graph(nodes)
    sectors = topo.form_sectors(cluster, nodes, g)
    by_sc = {s.coordinator: s.leaves for s in sectors}
    # node 5 at x=62 sits far from seed 2 (x=40); it must end up with a
    # coordinator that is nearer than 2, never pulled into 2's sector
    home = next(sc for sc, leaves in by_sc.items() if 5 in leaves or sc == 5)
    by_id = {n.id: n for n in nodes}
    d_home = by_id[5].distance_to(by_id[home])
    assert d_home <= by_id[5].distance_to(by_id[2])


def test_quarantined_follower_never_coordinates():
    nodes, cluster = _cluster_fixture()
    g = _graph(nodes)
    sectors = topo.form_sectors(cluster, nodes, g, quarantined={2})
    assert all(s.coordinator != 2 for s in sectors)
    assert any(2 in s.leaves for s in sectors)  # still joins as a leaf


def test_all_quarantined_yields_no_sectors():
    nodes, cluster = _cluster_fixture()
    g = _graph(nodes)
    assert topo.form_sectors(cluster, nodes, g, quarantined={2, 3, 4, 5, 6}) == []


# --- monitors and forwarding heads ---------------------------------------------


def _leader_cluster():
    nodes = [
        build_sink(0, 0),
        build_node(1, 50, 50, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 55, 50, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(3, 45, 50, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(4, 52, 50, energy=0.2),
        build_node(5, 53, 50, energy=0.2),
    ]
    cluster = topo.Cluster(id=0, coordinator=1, members={2, 3, 4, 5})
    g = _graph(nodes)
    sectors = topo.form_sectors(cluster, nodes, g)
    cluster.sectors = sectors
    return nodes, cluster, g, sectors


def test_monitor_excludes_coordinator_and_needs_leaders():
    nodes, cluster, g, sectors = _leader_cluster()
    monitors = topo.select_sector_monitor(cluster, sectors[0], nodes, g)
    assert monitors
    assert cluster.coordinator not in monitors
    assert all(
        next(n for n in nodes if n.id == m).node_class is NodeClass.LEADER
        for m in monitors
    )


def test_monitor_unavailable_without_spare_leaders():
    nodes = [
        build_sink(0, 0),
        build_node(1, 50, 50, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 52, 50, energy=0.2),
    ]
    cluster = topo.Cluster(id=0, coordinator=1, members={2})
    g = _graph(nodes)
    sectors = topo.form_sectors(cluster, nodes, g)
    with pytest.raises(topo.MonitorUnavailable):
        topo.select_sector_monitor(cluster, sectors[0], nodes, g)


def test_fsh_minimizes_hops_to_coordinator():
    nodes, cluster, g, sectors = _leader_cluster()
    fsh = topo.select_fsh(cluster, sectors[0], nodes, g)
    assert fsh in {2, 3}  # a spare leader, one hop from the coordinator


def test_hop_distances_match_bfs_oracle():
    rng = random.Random(99)
    for _ in range(20):
        nodes = [build_sink(rng.uniform(0, 60), rng.uniform(0, 60))]
        for i in range(1, rng.randint(5, 14)):
            nodes.append(
                build_node(i, rng.uniform(0, 60), rng.uniform(0, 60), energy=0.2)
            )
        g = _graph(nodes, rng_range=25.0)
        got = topo.hop_distances(g, 0)
        # plain BFS, written separately
        expected = {0: 0}
        frontier = deque([0])
        while frontier:
            cur = frontier.popleft()
            for nxt in g.neighbors(cur):
                if nxt not in expected:
                    expected[nxt] = expected[cur] + 1
                    frontier.append(nxt)
        assert got == expected


# --- roles ---------------------------------------------------------------------


def test_assign_roles_precedence():
    nodes, cluster, g, sectors = _leader_cluster()
    sectors[0].monitors = topo.select_sector_monitor(cluster, sectors[0], nodes, g)
    sectors[0].fsh = topo.select_fsh(cluster, sectors[0], nodes, g)
    roles = topo.assign_roles(nodes, [cluster])
    by_id = {n.id: n for n in nodes}
    assert by_id[0].role is Role.SN
    assert by_id[1].role is Role.CC
    assert by_id[sectors[0].coordinator].role is Role.SC
    for m in sectors[0].monitors:
        assert by_id[m].role is Role.SM
    for leaf in sectors[0].leaves:
        assert by_id[leaf].role is Role.LN
    assert roles == {n.id: n.role for n in nodes}


def test_capacity_scales_with_residual():
    nodes = [
        build_sink(0, 0),
        build_node(1, 0, 10, energy=2.0, node_class=NodeClass.LEADER, role=Role.SM),
        build_node(2, 0, 20, energy=0.2),
    ]
    g = _graph(nodes)
    full = topo.capacity(nodes[1], g)
    nodes[1].energy.residual_energy = 1.0
    assert topo.capacity(nodes[1], g) == pytest.approx(full / 2)
