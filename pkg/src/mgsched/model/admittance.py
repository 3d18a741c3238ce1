"""Bus admittance matrix assembly, partitioned around the slack bus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import CaseError, GridModel


@dataclass
class AdmittanceBlocks:
    """Y partitioned as [[y_ss, y_s_eta], [y_eta_s, y_eta_eta]] where ``s`` is
    the slack bus and ``eta`` the remaining buses in ``eta_buses`` order."""

    y_ss: complex
    y_s_eta: np.ndarray      # (1, n)
    y_eta_s: np.ndarray      # (n, 1)
    y_eta_eta: np.ndarray    # (n, n)
    eta_buses: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.eta_buses)

    def index(self, bus_id: str) -> int:
        return self.eta_buses.index(bus_id)


def build_admittance(model: GridModel) -> AdmittanceBlocks:
    order = [b.id for b in model.buses]
    pos = {b: k for k, b in enumerate(order)}
    N = len(order)
    Y = np.zeros((N, N), dtype=complex)
    for br in model.branches:
        if not br.closed:
            continue
        y = br.admittance
        i, j = pos[br.from_bus], pos[br.to_bus]
        Y[i, i] += y
        Y[j, j] += y
        Y[i, j] -= y
        Y[j, i] -= y

    slack = model.settings.slack_bus
    s = pos[slack]
    eta = [k for k in range(N) if k != s]
    # connectivity is checked at load time; guard anyway so a hand-built
    # model cannot produce a singular reduced matrix silently
    reach = _reachable(model, slack)
    missing = [b for b in order if b not in reach]
    if missing:
        raise CaseError(f"buses not connected to the slack: {missing}")

    return AdmittanceBlocks(
        y_ss=complex(Y[s, s]),
        y_s_eta=Y[np.ix_([s], eta)].copy(),
        y_eta_s=Y[np.ix_(eta, [s])].copy(),
        y_eta_eta=Y[np.ix_(eta, eta)].copy(),
        eta_buses=tuple(order[k] for k in eta),
    )


def _reachable(model: GridModel, start: str) -> set[str]:
    adj: dict[str, list[str]] = {b.id: [] for b in model.buses}
    for br in model.branches:
        if not br.closed:
            continue
        adj[br.from_bus].append(br.to_bus)
        adj[br.to_bus].append(br.from_bus)
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen
