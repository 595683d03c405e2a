"""First-order radio energy model plus duty-cycle and detection accounting.

Transmission pays electronics per bit and a d^2 amplifier term; reception
pays electronics only. Listening in a slot costs orders of magnitude more
than sleeping through it, which is exactly what a sleep-deprivation attack
exploits: every slot a victim is kept awake leaks p_listen - p_sleep.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DETECTION_FRACTION, NodeState, Role, SensorNode, is_alive


@dataclass(frozen=True)
class EnergyParams:
    e_elec: float = 50e-9        # J per bit, TX/RX electronics
    e_amp: float = 100e-12       # J per bit per m^2, TX amplifier
    p_listen: float = 10e-6      # J per slot spent listening
    p_sleep: float = 0.1e-6      # J per slot spent sleeping
    e_detect: float = 1e-6       # J per detection check
    dp_min_threshold: float = 0.05  # fraction of initial detection budget

    def validate(self) -> None:
        for name in ("e_elec", "e_amp", "p_listen", "p_sleep", "e_detect"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.p_sleep < self.p_listen:
            raise ValueError("p_sleep must be strictly below p_listen")
        if not 0 <= self.dp_min_threshold < 1:
            raise ValueError("dp_min_threshold must be in [0, 1)")


def tx_cost(params: EnergyParams, bits: int, distance: float) -> float:
    if bits <= 0:
        raise ValueError("bits must be positive")
    if distance < 0:
        raise ValueError("distance must be non-negative")
    return params.e_elec * bits + params.e_amp * bits * distance * distance


def rx_cost(params: EnergyParams, bits: int) -> float:
    if bits <= 0:
        raise ValueError("bits must be positive")
    return params.e_elec * bits


def slot_cost(params: EnergyParams, state: NodeState) -> float:
    if state is NodeState.LISTEN:
        return params.p_listen
    if state is NodeState.SLEEP:
        return params.p_sleep
    raise ValueError(f"no per-slot cost defined for state {state}")


def consume(node: SensorNode, joules: float) -> float:
    """Drain `joules` from the node, clamping at zero. Returns actual drain."""
    if joules < 0:
        raise ValueError("cannot consume negative energy")
    if joules == 0.0:
        return 0.0
    account = node.energy
    spent = min(joules, account.residual_energy)
    account.residual_energy -= spent
    if account.residual_energy <= 0.0:
        account.residual_energy = 0.0
        node.state = NodeState.DEAD
    return spent


def assign_detection_budget(node: SensorNode, role: Role) -> None:
    """Reserve the role's detection share out of what the node has left."""
    fraction = DETECTION_FRACTION[role.value]
    budget = min(fraction * node.energy.initial_energy, node.energy.residual_energy)
    node.energy.detection_budget = budget
    node.energy.detection_budget_initial = budget
    node.energy.detection_enabled = budget > 0.0


def charge_detection(node: SensorNode, params: EnergyParams) -> bool:
    """Charge one detection check. Returns True if the IDS just shut off.

    The check drains residual energy and the detection budget together.
    Once the budget falls under dp_min_threshold of its initial value the
    node's IDS disables itself, which the caller must treat as a
    reconfiguration trigger.
    """
    account = node.energy
    if not account.detection_enabled:
        raise ValueError(f"node {node.id} has no active detection capability")
    consume(node, params.e_detect)
    account.detection_budget = max(0.0, account.detection_budget - params.e_detect)
    floor = params.dp_min_threshold * account.detection_budget_initial
    if account.detection_budget < floor or not is_alive(node):
        account.detection_enabled = False
        return True
    return False
