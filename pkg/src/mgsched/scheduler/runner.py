"""Solve pipeline: build the MILP, solve, extract, and audit.

Case 2 wraps the solve in a short sequential-linearization loop: network rows
are linearized around a voltage estimate, the schedule is solved, voltages are
re-computed from the resulting dispatch with the exact (conjugate-coupled)
linear flow model, and the rows are rebuilt around the new estimate until the
voltages stop moving.  The pruned row set is frozen after the first pass so
later passes keep the same problem shape and can warm-start; any network check
that turns out violated because its row was pruned gets the row re-added and
the loop continues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..model import GridModel, RealizedInputs, Schedule, build_admittance, validate_schedule
from ..powerflow import PfSolution, assemble_zip, fixed_loads_pu, solve_linear_pf
from ..solver import MilpOptions, SolverOptions, solve_milp
from .formulation import (
    CASE1,
    CaseFlag,
    CostReport,
    VariableMap,
    build_problem,
    cost_of,
    default_inputs,
    extract_schedule,
    link_network_constraints,
)


@dataclass
class SchedulerOptions:
    # proving the last ~1e-4 of relative gap costs most of the tree; on a
    # day-ahead objective that slack is pennies, so the operational default
    # is looser than the solver's own
    gap_tol: float = 1e-4
    node_limit: int = 200_000
    iteration_limit: int = 400_000
    max_passes: int = 5            # sequential-linearization cap (Case 2)
    v_tol: float = 1e-4            # pu; voltage-estimate fixed-point tolerance


@dataclass
class RunResult:
    status: str
    objective: float
    schedule: Schedule | None
    cost: CostReport | None
    voltages: list[PfSolution] | None   # exact linear flow at the final dispatch
    gap: float = 0.0
    node_count: int = 0
    iterations: int = 0
    passes: int = 1
    network_rows: int = 0
    violations: list[str] = field(default_factory=list)
    basis: tuple | None = None
    milp_values: np.ndarray | None = None   # raw column values; seeds related solves


def _injections_pu(model: GridModel, schedule: Schedule, hour: int) -> dict[str, complex]:
    """Net decision injections per bus (generation positive, constant power)."""
    sc = 1.0 / (1000.0 * model.settings.base_mva)
    out: dict[str, complex] = {}

    def add(bus: str, value: complex) -> None:
        if value:
            out[bus] = out.get(bus, 0.0) + value

    T = schedule.horizon
    for u in model.units:
        add(u.bus, schedule.unit_power.get(u.id, (0.0,) * T)[hour] * sc)
    for st in model.storage:
        add(st.bus, (schedule.storage_discharge.get(st.id, (0.0,) * T)[hour]
                     - schedule.storage_charge.get(st.id, (0.0,) * T)[hour]) * sc)
    for ld in model.adjustable_loads:
        d = schedule.adjustable_power.get(ld.id, (0.0,) * T)[hour] * sc
        if d:
            pf = model.bus(ld.bus).power_factor
            add(ld.bus, -d * complex(1.0, math.tan(math.acos(pf))))
    return out


def hourly_voltages(model: GridModel, schedule: Schedule,
                    inputs: RealizedInputs) -> list[PfSolution]:
    """Exact linear power flow at each hour of a committed schedule."""
    blocks = build_admittance(model)
    out = []
    for t in range(model.settings.horizon):
        system = assemble_zip(model, fixed_loads_pu(model, inputs, t),
                              injection_pu=_injections_pu(model, schedule, t),
                              blocks=blocks)
        out.append(solve_linear_pf(system))
    return out


def network_audit(model: GridModel, voltages: list[PfSolution],
                  v_slop: float = 1e-3, i_slop: float = 0.02,
                  ) -> tuple[list[str], set[str]]:
    """Check the final voltages against the same linear proxies the rows
    enforce.  Returns human-readable violations plus the names of the rows
    that would have caught them (for re-adding pruned rows)."""
    settings = model.settings
    by_id = {b.id: b for b in model.buses}
    octo = np.exp(-1j * np.arange(8) * math.pi / 4.0)
    messages: list[str] = []
    rows: set[str] = set()
    for t, sol in enumerate(voltages):
        for bus_id, v in zip(sol.bus_order, sol.voltages):
            bus = by_id[bus_id]
            if v.real < bus.v_min - v_slop:
                messages.append(f"network h{t + 1} bus {bus_id}: Re V "
                                f"{v.real:.4f} < {bus.v_min}")
                rows.add(f"v_lo[{bus_id},{t}]")
            if v.real > bus.v_max + v_slop:
                messages.append(f"network h{t + 1} bus {bus_id}: Re V "
                                f"{v.real:.4f} > {bus.v_max}")
                rows.add(f"v_hi[{bus_id},{t}]")
            if v.imag > settings.imag_cap + v_slop:
                messages.append(f"network h{t + 1} bus {bus_id}: Im V "
                                f"{v.imag:.4f} over cap")
                rows.add(f"im_hi[{bus_id},{t}]")
            if -v.imag > settings.imag_cap + v_slop:
                messages.append(f"network h{t + 1} bus {bus_id}: Im V "
                                f"{v.imag:.4f} under cap")
                rows.add(f"im_lo[{bus_id},{t}]")

        def volt(bus_id: str) -> complex:
            if bus_id == settings.slack_bus:
                return complex(settings.slack_voltage)
            return sol.voltage(bus_id)

        for bi, br in enumerate(model.branches):
            if br.limit_kva <= 0 or not br.closed:
                continue
            limit = br.limit_kva / (1000.0 * settings.base_mva) / settings.v_norm
            cur = br.admittance * (volt(br.from_bus) - volt(br.to_bus))
            proj = (octo * cur).real
            worst = int(np.argmax(proj))
            if proj[worst] > limit + i_slop:
                messages.append(
                    f"network h{t + 1} feeder {br.from_bus}-{br.to_bus}: "
                    f"current {abs(cur):.3f} pu over limit {limit:.3f}")
                rows.add(f"cur[{bi},{worst},{t}]")
    return messages, rows


def _milp_options(opts: SchedulerOptions) -> MilpOptions:
    return MilpOptions(gap_tol=opts.gap_tol, node_limit=opts.node_limit,
                       lp=SolverOptions(iter_limit=opts.iteration_limit))


def run_deterministic(model: GridModel, flag: CaseFlag = CASE1,
                      inputs: RealizedInputs | None = None,
                      options: SchedulerOptions | None = None,
                      hint: np.ndarray | None = None) -> RunResult:
    """Full day-ahead run: returns the schedule, the independently recomputed
    cost report, and the per-hour voltage solutions at the final dispatch.

    `hint` is the raw solution vector of a previous run on the same model
    (any case, any realized inputs); its commitment pattern seeds the
    branch-and-bound incumbent.
    """
    inputs = inputs if inputs is not None else default_inputs(model)
    opts = options or SchedulerOptions()
    milp_opts = _milp_options(opts)
    base, vm = build_problem(model, CASE1, inputs)

    if not flag.network_constraints:
        res = solve_milp(base, milp_opts, incumbent_hint=hint)
        if res.values is None:
            return RunResult(res.status, res.objective, None, None, None,
                             gap=res.gap, node_count=res.node_count,
                             iterations=res.iterations)
        schedule = extract_schedule(model, vm, res.values)
        return RunResult(
            res.status, res.objective, schedule,
            cost_of(schedule, model, inputs),
            hourly_voltages(model, schedule, inputs),
            gap=res.gap, node_count=res.node_count, iterations=res.iterations,
            violations=validate_schedule(model, schedule, inputs),
            basis=res.basis, milp_values=res.values)

    keep: set[str] | None = None
    v_est: dict[int, np.ndarray] | None = None
    warm = None
    prev_rows = -1
    nodes = iters = 0
    net_messages: list[str] = []
    res = schedule = voltages = None
    passes = 0
    while passes < opts.max_passes:
        passes += 1
        problem, kept = link_network_constraints(model, base, inputs, vm,
                                                 v_est, keep)
        n_rows = len(problem.rows)
        res = solve_milp(problem, milp_opts,
                         warm_basis=warm if n_rows == prev_rows else None,
                         incumbent_hint=hint)
        prev_rows = n_rows
        if res.values is None:
            return RunResult(res.status, res.objective, None, None, None,
                             gap=res.gap, node_count=nodes + res.node_count,
                             iterations=iters + res.iterations, passes=passes,
                             network_rows=n_rows - len(base.rows))
        nodes += res.node_count
        iters += res.iterations
        warm = res.basis
        hint = res.values          # later passes start from this incumbent
        schedule = extract_schedule(model, vm, res.values)
        voltages = hourly_voltages(model, schedule, inputs)
        reference = v_est or {}
        flat = None
        delta = 0.0
        for t, sol in enumerate(voltages):
            if t in reference:
                prev = reference[t]
            else:
                if flat is None:
                    flat = np.full(len(sol.voltages),
                                   complex(model.settings.slack_voltage))
                prev = flat
            delta = max(delta, float(np.abs(sol.voltages - prev).max()))
        net_messages, wanted = network_audit(model, voltages)
        missing = wanted - kept
        keep = kept | missing
        if missing:
            # a pruned row turned out to matter: re-add and re-solve
            v_est = {t: sol.voltages for t, sol in enumerate(voltages)}
            warm = None
            continue
        if delta <= opts.v_tol:
            break
        v_est = {t: sol.voltages for t, sol in enumerate(voltages)}

    violations = validate_schedule(model, schedule, inputs) + net_messages
    return RunResult(res.status, res.objective, schedule,
                     cost_of(schedule, model, inputs), voltages,
                     gap=res.gap, node_count=nodes, iterations=iters,
                     passes=passes, network_rows=prev_rows - len(base.rows),
                     violations=violations, basis=res.basis,
                     milp_values=res.values)
