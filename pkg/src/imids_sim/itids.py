"""Flat baseline defense: isolation tables kept by low-energy member monitors.

The baseline keeps the cluster layer but nothing below it. A fixed share of
each cluster's members, chosen from the lowest-energy ones, stays awake to
watch its neighbors with the same four anomaly rules. One strike lands a
node in the isolation table for good: no observation window, no
rehabilitation, and no re-election when a role holder dies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import is_alive


@dataclass(frozen=True)
class ItidsConfig:
    monitor_fraction: float = 0.5

    def validate(self) -> None:
        if not 0 <= self.monitor_fraction <= 1:
            raise ValueError("monitor_fraction must lie in [0, 1]")


def select_monitors(cluster, nodes, fraction: float) -> tuple:
    """Pick the cluster's monitors from its lowest-energy members.

    Members are ranked by residual energy ascending (ids break ties) and
    the bottom `fraction` share takes monitoring duty. At least one member
    monitors whenever the cluster has members at all.
    """
    by_id = {n.id: n for n in nodes}
    members = sorted(
        (m for m in cluster.members if is_alive(by_id[m])),
        key=lambda m: (by_id[m].energy.residual_energy, m),
    )
    if not members:
        return ()
    count = max(1, int(fraction * len(members)))
    return tuple(sorted(members[:count]))
