"""Linearized AC power flow for ZIP-type composite loads.

Around the nominal magnitude ``v_norm`` the nodal current balance at the
non-slack buses reduces to an affine relation

    a_const + a_conj * conj(V) + A_lin @ V = 0

(``a_conj`` acts elementwise) where the three coefficient blocks follow from
the constant-power / constant-current / constant-impedance decomposition of
each bus's net apparent-power injection.  The conjugate makes the relation
real-linear rather than complex-linear, so the exact solve stacks real and
imaginary parts into a 2n system.  Freezing conj(V) at an estimate restores
complex linearity; that form yields per-bus injection sensitivity columns and
feeds the sequential-linearization loop of the network-constrained scheduler.

A full Newton-Raphson solver on the untruncated ZIP injection model serves as
the accuracy oracle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model.admittance import AdmittanceBlocks, build_admittance
from .model.types import GridModel, RealizedInputs


@dataclass
class ZipSystem:
    """Network plus net ZIP injections for one operating point."""

    bus_order: tuple[str, ...]
    y_eta_eta: np.ndarray        # (n, n) complex
    y_eta_s: np.ndarray          # (n,) complex
    y_s_eta: np.ndarray          # (n,) complex
    y_ss: complex
    s_power: np.ndarray          # (n,) injection-positive constant-power part
    s_current: np.ndarray        # (n,) constant-current part
    s_impedance: np.ndarray      # (n,) constant-impedance part
    v_norm: float
    slack_voltage: complex

    @property
    def n(self) -> int:
        return len(self.bus_order)

    @property
    def h(self) -> float:
        return 1.0 / self.v_norm

    def const_term(self) -> np.ndarray:
        h = self.h
        return (self.y_eta_s * np.conj(self.slack_voltage)
                - 2.0 * h * np.conj(self.s_power)
                - h * np.conj(self.s_current))

    def conj_coeff(self) -> np.ndarray:
        return self.h ** 2 * np.conj(self.s_power)

    def linear_term(self) -> np.ndarray:
        A = self.y_eta_eta.copy()
        A[np.diag_indices(self.n)] -= self.h ** 2 * np.conj(self.s_impedance)
        return A

    def index(self, bus_id: str) -> int:
        return self.bus_order.index(bus_id)


def fixed_loads_pu(model: GridModel, inputs: RealizedInputs, hour: int) -> dict[str, complex]:
    """Per-bus fixed consumption in pu (positive = load), reactive part from
    the bus power factor."""
    scale = 1.0 / (1000.0 * model.settings.base_mva)
    out = {}
    for bus in model.buses:
        p = bus.load_share * inputs.load_kw[hour] * scale
        if p == 0.0:
            continue
        q = p * math.tan(math.acos(bus.power_factor))
        out[bus.id] = complex(p, q)
    return out


def assemble_zip(model: GridModel, consumption_pu: dict[str, complex],
                 injection_pu: dict[str, complex] | None = None,
                 blocks: AdmittanceBlocks | None = None) -> ZipSystem:
    """Build the per-bus ZIP decomposition of net injections.

    ``consumption_pu`` is split across the Z/I/P parts by each bus's weights;
    ``injection_pu`` (dispatch decisions, generation positive) is constant
    power.  Both dicts may omit buses.
    """
    blocks = blocks or build_admittance(model)
    n = blocks.n
    s_p = np.zeros(n, dtype=complex)
    s_i = np.zeros(n, dtype=complex)
    s_z = np.zeros(n, dtype=complex)
    by_id = {b.id: b for b in model.buses}
    for k, bus_id in enumerate(blocks.eta_buses):
        zw = by_id[bus_id].zip_weights
        load = consumption_pu.get(bus_id, 0.0)
        s_z[k] -= zw[0] * load
        s_i[k] -= zw[1] * load
        s_p[k] -= zw[2] * load
        if injection_pu:
            s_p[k] += injection_pu.get(bus_id, 0.0)
    return ZipSystem(
        bus_order=blocks.eta_buses,
        y_eta_eta=blocks.y_eta_eta,
        y_eta_s=blocks.y_eta_s[:, 0],
        y_s_eta=blocks.y_s_eta[0, :],
        y_ss=blocks.y_ss,
        s_power=s_p,
        s_current=s_i,
        s_impedance=s_z,
        v_norm=model.settings.v_norm,
        slack_voltage=complex(model.settings.slack_voltage),
    )


@dataclass
class PfSolution:
    voltages: np.ndarray          # (n,) complex, bus_order of the system
    bus_order: tuple[str, ...]
    residual: float               # max |equation residual|
    slack_injection: complex      # complex power entering at the slack bus, pu
    converged: bool = True
    iterations: int = 0

    def voltage(self, bus_id: str) -> complex:
        return self.voltages[self.bus_order.index(bus_id)]


def solve_linear_pf(system: ZipSystem) -> PfSolution:
    """Exact solution of the affine-with-conjugate model via a 2n real system."""
    n = system.n
    a1 = system.const_term()
    a2 = system.conj_coeff()
    A3 = system.linear_term()
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = np.diag(a2.real) + A3.real
    M[:n, n:] = np.diag(a2.imag) - A3.imag
    M[n:, :n] = np.diag(a2.imag) + A3.imag
    M[n:, n:] = -np.diag(a2.real) + A3.real
    rhs = np.concatenate([-a1.real, -a1.imag])
    try:
        ef = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"degenerate voltage system (condition {np.linalg.cond(M):.3e})"
        ) from exc
    V = ef[:n] + 1j * ef[n:]
    resid = float(np.abs(a1 + a2 * np.conj(V) + A3 @ V).max())
    slack_inj = system.slack_voltage * np.conj(
        system.y_ss * system.slack_voltage + system.y_s_eta @ V)
    return PfSolution(V, system.bus_order, resid, slack_inj)


def conj_frozen_solution(system: ZipSystem, v_estimate: np.ndarray) -> np.ndarray:
    """Solve the model with conj(V) frozen at an estimate (complex-linear)."""
    rhs = -system.const_term() - system.conj_coeff() * np.conj(v_estimate)
    return np.linalg.solve(system.linear_term(), rhs)


def injection_sensitivities(system: ZipSystem, v_estimate: np.ndarray) -> np.ndarray:
    """Columns d/dx of the frozen-conjugate voltage solution w.r.t. a real
    constant-power injection at each bus: (2h - h^2 conj(v_est_d)) * A3^{-1} e_d."""
    h = system.h
    gains = 2.0 * h - h ** 2 * np.conj(v_estimate)
    return np.linalg.solve(system.linear_term(), np.diag(gains))


def _zip_injection(system: ZipSystem, V: np.ndarray) -> np.ndarray:
    # constant-current components hold their complex current, so their power
    # scales with V itself; constant-impedance power scales with |V|^2
    h = system.h
    return system.s_power + h * system.s_current * V \
        + h ** 2 * system.s_impedance * np.abs(V) ** 2


def ac_pf_oracle(system: ZipSystem, tol: float = 1e-8,
                 max_iter: int = 50) -> PfSolution:
    """Newton-Raphson on the full (untruncated) ZIP injection model.

    Power-mismatch formulation in rectangular coordinates; returns the last
    iterate with ``converged=False`` instead of raising when the iteration
    stalls, so callers can report divergence.
    """
    n = system.n
    Y = system.y_eta_eta
    i_slack = system.y_eta_s * system.slack_voltage
    V = np.full(n, system.v_norm, dtype=complex)
    h = system.h
    it = 0
    for it in range(1, max_iter + 1):
        I = i_slack + Y @ V
        mismatch = V * np.conj(I) - _zip_injection(system, V)
        if np.abs(mismatch).max() <= tol:
            slack_inj = system.slack_voltage * np.conj(
                system.y_ss * system.slack_voltage + system.y_s_eta @ V)
            return PfSolution(V, system.bus_order, float(np.abs(mismatch).max()),
                              slack_inj, converged=True, iterations=it)
        # complex partials of V*conj(I) - S_net(V) w.r.t. e_k and f_k
        conj_I = np.conj(I)
        conj_Y = np.conj(Y)
        Je = V[:, None] * conj_Y + np.diag(conj_I)
        Jf = -1j * V[:, None] * conj_Y + 1j * np.diag(conj_I)
        Je -= np.diag(h * system.s_current + 2.0 * h ** 2 * system.s_impedance * V.real)
        Jf -= np.diag(1j * h * system.s_current + 2.0 * h ** 2 * system.s_impedance * V.imag)
        J = np.zeros((2 * n, 2 * n))
        J[:n, :n] = Je.real
        J[:n, n:] = Jf.real
        J[n:, :n] = Je.imag
        J[n:, n:] = Jf.imag
        try:
            step = np.linalg.solve(J, np.concatenate([mismatch.real, mismatch.imag]))
        except np.linalg.LinAlgError:
            break
        V = V - (step[:n] + 1j * step[n:])
        if not np.all(np.isfinite(V)):
            break
    I = i_slack + Y @ V if np.all(np.isfinite(V)) else np.full(n, np.nan, complex)
    mis = V * np.conj(I) - _zip_injection(system, V)
    resid = float(np.nanmax(np.abs(mis))) if np.any(np.isfinite(mis)) else math.inf
    slack_inj = system.slack_voltage * np.conj(
        system.y_ss * system.slack_voltage + system.y_s_eta @ V)
    return PfSolution(V, system.bus_order, resid, slack_inj,
                      converged=False, iterations=it)


@dataclass
class BranchFlow:
    from_bus: str
    to_bus: str
    s_from: complex              # pu, leaving from_bus into the branch
    s_to: complex
    current_pu: float
    limit_pu: float              # 0 when unlimited
    overloaded: bool


def branch_flows(model: GridModel, solution: PfSolution) -> list[BranchFlow]:
    volt = {b: solution.voltages[k] for k, b in enumerate(solution.bus_order)}
    volt[model.settings.slack_bus] = complex(model.settings.slack_voltage)
    out = []
    kva_to_pu = 1.0 / (1000.0 * model.settings.base_mva)
    for br in model.branches:
        if not br.closed:
            continue
        vf, vt = volt[br.from_bus], volt[br.to_bus]
        flow = br.admittance * (vf - vt)
        s_from = vf * np.conj(flow)
        s_to = vt * np.conj(-flow)
        imag = abs(flow)
        limit_pu = br.limit_kva * kva_to_pu / model.settings.v_norm
        out.append(BranchFlow(br.from_bus, br.to_bus, s_from, s_to, imag,
                              limit_pu, bool(limit_pu and imag > limit_pu)))
    return out


def linearization_error_report(model: GridModel, inputs: RealizedInputs,
                               scalings, hour: int | None = None) -> list[dict]:
    """Compare the affine model against the Newton oracle while the fixed
    load at one hour is scaled up; one result row per scaling factor."""
    if hour is None:
        hour = int(np.argmax(inputs.load_kw))
    base = fixed_loads_pu(model, inputs, hour)
    blocks = build_admittance(model)
    rows = []
    for s in scalings:
        loads = {b: s * v for b, v in base.items()}
        system = assemble_zip(model, loads, blocks=blocks)
        lin = solve_linear_pf(system)
        ref = ac_pf_oracle(system)
        if ref.converged:
            err = float(np.abs(lin.voltages - ref.voltages).max())
            drop = float(1.0 - np.abs(ref.voltages).min() / model.settings.v_norm)
        else:
            err = math.nan
            drop = math.nan
        rows.append({"scaling": float(s), "max_v_error": err,
                     "max_drop": drop, "oracle_iters": ref.iterations,
                     "oracle_converged": ref.converged,
                     "linear_residual": lin.residual})
    return rows
