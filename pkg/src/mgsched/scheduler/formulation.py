"""Day-ahead MILP formulation for interconnected microgrids.

All power variables live in per-unit (kW / (1000 * base_mva)) so that network
sensitivity coefficients can be attached without rescaling; the objective is
in dollars.  ``build_problem`` emits the market layer (commitment, ramps,
run-length rules, storage, adjustable loads, tie exchange, hourly regional
balance) and ``link_network_constraints`` appends the physical layer: linear
voltage-band and feeder-current rows derived from the frozen-conjugate ZIP
flow model around a voltage estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..model import (
    CaseError,
    GridModel,
    RealizedInputs,
    Schedule,
    build_admittance,
    scale_forecasts,
)
from ..powerflow import (
    assemble_zip,
    conj_frozen_solution,
    fixed_loads_pu,
    injection_sensitivities,
)
from ..solver import MilpProblem, ProblemBuilder, Row

# Token objective terms that pin otherwise-degenerate indicators without
# disturbing the economics (total mass is a few 1e-4 $ on schedules costing
# thousands, far inside the cost-audit tolerance).  On/off binaries get a tiny
# REWARD so the relaxation sets u = clamp(p/pmin, 0, 1): any dispatch at or
# above its minimum stable level relaxes integrally, which keeps the
# branch-and-bound tree small.  Start/stop indicators get a tiny COST so they
# settle at exactly max(0, +-delta u).
EPS_COMMIT = 1e-6

# Even smaller per-hour tilt on storage flows and adjustable-load service so
# schedules that are cost-ties (same energy shifted between equal-price hours)
# have a unique optimum; otherwise the sequential-linearization loop chases
# alternate optima whose voltages differ by a few 1e-4 pu and never sees a
# fixed point.
EPS_TIE = 1e-9


@dataclass(frozen=True)
class CaseFlag:
    """Study selector: Case 1 ignores the distribution network, Case 2 adds
    the linearized voltage and feeder-current rows."""

    network_constraints: bool = False


CASE1 = CaseFlag(False)
CASE2 = CaseFlag(True)


@dataclass
class CostReport:
    """Dollar breakdown of a day-ahead schedule.

    ``total`` always equals generation + startup + shutdown + exchange, and
    also the sum of the hourly series.
    """

    total: float
    generation: dict[str, float]        # fuel cost by microgrid
    startup: float
    shutdown: float
    exchange: float                     # import charges over all ties
    hourly: tuple[float, ...]


@dataclass
class VariableMap:
    """Registry mapping (resource id, hour) to solver column indices, plus
    the per-hour physical injections the network block couples to."""

    scale: float                        # kW -> pu factor
    horizon: int
    power: dict = field(default_factory=dict)
    on: dict = field(default_factory=dict)
    turn_on: dict = field(default_factory=dict)
    turn_off: dict = field(default_factory=dict)
    charge: dict = field(default_factory=dict)
    discharge: dict = field(default_factory=dict)
    level: dict = field(default_factory=dict)
    charge_on: dict = field(default_factory=dict)
    discharge_on: dict = field(default_factory=dict)
    charge_start: dict = field(default_factory=dict)
    charge_stop: dict = field(default_factory=dict)
    discharge_start: dict = field(default_factory=dict)
    discharge_stop: dict = field(default_factory=dict)
    served: dict = field(default_factory=dict)
    load_on: dict = field(default_factory=dict)
    load_start: dict = field(default_factory=dict)
    flow: dict = field(default_factory=dict)
    import_pos: dict = field(default_factory=dict)
    import_neg: dict = field(default_factory=dict)
    # hour -> [(column, bus id, per-unit complex injection)]
    injections_by_hour: dict = field(default_factory=dict)


def _check_buildable(model: GridModel) -> None:
    """Reject contracts that no schedule can honour, before any solving."""
    problems = []
    T = model.settings.horizon
    for ld in model.adjustable_loads:
        span = len([t for t in ld.hours() if 0 <= t < T])
        if ld.energy_kwh > ld.p_max_kw * span + 1e-9:
            problems.append(
                f"adjustable load {ld.id}: energy {ld.energy_kwh} kWh cannot fit "
                f"{span} h x {ld.p_max_kw} kW")
        if ld.kind == "curtailable" and ld.energy_kwh < ld.p_min_kw * span - 1e-9:
            problems.append(
                f"adjustable load {ld.id}: energy {ld.energy_kwh} kWh below the "
                f"always-on floor {ld.p_min_kw} kW x {span} h")
    if problems:
        raise CaseError("; ".join(problems))


def build_problem(model: GridModel, flag: CaseFlag, inputs: RealizedInputs,
                  voltage_estimate: dict[int, np.ndarray] | None = None,
                  keep: set[str] | None = None,
                  ) -> tuple[MilpProblem, VariableMap]:
    """Translate the model into a minimization MILP.

    Returns the problem together with the variable registry needed to read a
    schedule back out of a solution vector.  With ``flag.network_constraints``
    the voltage/current rows are appended immediately (around a flat estimate
    unless ``voltage_estimate`` is given); the sequential-linearization loop
    in the runner calls ``link_network_constraints`` itself instead.
    """
    _check_buildable(model)
    T = model.settings.horizon
    sc = 1.0 / (1000.0 * model.settings.base_mva)
    b = ProblemBuilder()
    vm = VariableMap(scale=sc, horizon=T)
    inj = {t: [] for t in range(T)}
    vm.injections_by_hour = inj
    by_id = {bus.id: bus for bus in model.buses}

    def load_mult(bus_id: str) -> complex:
        # constant-power consumption at the bus power factor; the conjugate
        # is what scales a voltage-sensitivity column
        pf = by_id[bus_id].power_factor
        return -complex(1.0, math.tan(math.acos(pf)))

    for u in model.units:
        if u.kind == "wind":
            avail = inputs.wind_kw[u.id]
            for t in range(T):
                j = b.add_var(f"p[{u.id},{t}]", 0.0, max(avail[t], 0.0) * sc,
                              obj=u.cost_per_kwh * 1000.0)
                vm.power[u.id, t] = j
                inj[t].append((j, u.bus, 1.0 + 0.0j))
            continue

        pmin, pmax = u.p_min_kw * sc, u.p_max_kw * sc
        rup, rdn = u.ramp_up_kw * sc, u.ramp_down_kw * sc
        p0 = u.initial_power_kw * sc
        on_prev = 1.0 if u.initial_on_h > 0 else 0.0
        # hours still pinned by the pre-horizon campaign
        must_on = max(0, u.min_up_h - u.initial_on_h) if u.initial_on_h > 0 else 0
        must_off = max(0, u.min_down_h + u.initial_on_h) if u.initial_on_h <= 0 else 0
        for t in range(T):
            j = b.add_var(f"p[{u.id},{t}]", 0.0, pmax,
                          obj=u.cost_per_kwh * 1000.0)
            vm.power[u.id, t] = j
            inj[t].append((j, u.bus, 1.0 + 0.0j))
            if t < must_on:
                ju = b.add_var(f"u[{u.id},{t}]", 1.0, 1.0, integer=True,
                               obj=-EPS_COMMIT)
            elif t < must_off:
                ju = b.add_var(f"u[{u.id},{t}]", 0.0, 0.0, integer=True,
                               obj=-EPS_COMMIT)
            else:
                ju = b.add_binary(f"u[{u.id},{t}]", obj=-EPS_COMMIT)
            vm.on[u.id, t] = ju
            js = b.add_var(f"su[{u.id},{t}]", 0.0, 1.0,
                           obj=u.startup_cost + EPS_COMMIT)
            jx = b.add_var(f"sd[{u.id},{t}]", 0.0, 1.0,
                           obj=u.shutdown_cost + EPS_COMMIT)
            vm.turn_on[u.id, t] = js
            vm.turn_off[u.id, t] = jx
            # {0} U [pmin, pmax]
            b.add_row({j: 1.0, ju: -pmax}, "<=", 0.0, f"cap_hi[{u.id},{t}]")
            b.add_row({j: 1.0, ju: -pmin}, ">=", 0.0, f"cap_lo[{u.id},{t}]")
            if t == 0:
                b.add_row({js: 1.0, jx: -1.0, ju: -1.0}, "=", -on_prev,
                          f"swlog[{u.id},{t}]")
                if rup > 0:
                    b.add_row({j: 1.0}, "<=", p0 + rup, f"rup[{u.id},{t}]")
                if rdn > 0:
                    b.add_row({j: 1.0}, ">=", p0 - rdn, f"rdn[{u.id},{t}]")
            else:
                jp = vm.power[u.id, t - 1]
                up = vm.on[u.id, t - 1]
                b.add_row({js: 1.0, jx: -1.0, ju: -1.0, up: 1.0}, "=", 0.0,
                          f"swlog[{u.id},{t}]")
                if rup > 0:
                    b.add_row({j: 1.0, jp: -1.0}, "<=", rup, f"rup[{u.id},{t}]")
                if rdn > 0:
                    b.add_row({jp: 1.0, j: -1.0}, "<=", rdn, f"rdn[{u.id},{t}]")
            if u.min_up_h > 1:
                window = {vm.turn_on[u.id, s]: 1.0
                          for s in range(max(0, t - u.min_up_h + 1), t + 1)}
                window[ju] = window.get(ju, 0.0) - 1.0
                b.add_row(window, "<=", 0.0, f"mup[{u.id},{t}]")
            if u.min_down_h > 1:
                window = {vm.turn_off[u.id, s]: 1.0
                          for s in range(max(0, t - u.min_down_h + 1), t + 1)}
                window[ju] = window.get(ju, 0.0) + 1.0
                b.add_row(window, "<=", 1.0, f"mdn[{u.id},{t}]")

    for st in model.storage:
        cmin, cmax = st.p_charge_min_kw * sc, st.p_charge_max_kw * sc
        dmin, dmax = st.p_discharge_min_kw * sc, st.p_discharge_max_kw * sc
        eff = math.sqrt(st.round_trip_efficiency)
        smin, smax = st.soc_min_kwh * sc, st.energy_capacity_kwh * sc
        for t in range(T):
            # charge early / discharge late among otherwise-equal hours
            jc = b.add_var(f"pc[{st.id},{t}]", 0.0, cmax, obj=(t + 1) * EPS_TIE)
            jd = b.add_var(f"pd[{st.id},{t}]", 0.0, dmax, obj=(T - t) * EPS_TIE)
            lo = max(smin, st.final_soc_min_kwh * sc) if t == T - 1 else smin
            jl = b.add_var(f"soc[{st.id},{t}]", lo, smax)
            # penalty, not reward: a reward invites lossless charge/discharge
            # churn that pins fractional modes at every hour
            jcu = b.add_binary(f"c[{st.id},{t}]", obj=EPS_COMMIT)
            jdu = b.add_binary(f"d[{st.id},{t}]", obj=EPS_COMMIT)
            jcs = b.add_var(f"cs[{st.id},{t}]", 0.0, 1.0, obj=EPS_COMMIT)
            jcx = b.add_var(f"cx[{st.id},{t}]", 0.0, 1.0, obj=EPS_COMMIT)
            jds = b.add_var(f"ds[{st.id},{t}]", 0.0, 1.0, obj=EPS_COMMIT)
            jdx = b.add_var(f"dx[{st.id},{t}]", 0.0, 1.0, obj=EPS_COMMIT)
            vm.charge[st.id, t] = jc
            vm.discharge[st.id, t] = jd
            vm.level[st.id, t] = jl
            vm.charge_on[st.id, t] = jcu
            vm.discharge_on[st.id, t] = jdu
            vm.charge_start[st.id, t] = jcs
            vm.charge_stop[st.id, t] = jcx
            vm.discharge_start[st.id, t] = jds
            vm.discharge_stop[st.id, t] = jdx
            inj[t].append((jd, st.bus, 1.0 + 0.0j))
            inj[t].append((jc, st.bus, -1.0 + 0.0j))
            b.add_row({jc: 1.0, jcu: -cmax}, "<=", 0.0, f"ch_hi[{st.id},{t}]")
            b.add_row({jc: 1.0, jcu: -cmin}, ">=", 0.0, f"ch_lo[{st.id},{t}]")
            b.add_row({jd: 1.0, jdu: -dmax}, "<=", 0.0, f"dis_hi[{st.id},{t}]")
            b.add_row({jd: 1.0, jdu: -dmin}, ">=", 0.0, f"dis_lo[{st.id},{t}]")
            b.add_row({jcu: 1.0, jdu: 1.0}, "<=", 1.0, f"excl[{st.id},{t}]")
            if t == 0:
                b.add_row({jl: 1.0, jc: -eff, jd: 1.0 / eff}, "=",
                          st.initial_soc_kwh * sc, f"soc_rec[{st.id},{t}]")
                b.add_row({jcs: 1.0, jcx: -1.0, jcu: -1.0}, "=", 0.0,
                          f"clog[{st.id},{t}]")
                b.add_row({jds: 1.0, jdx: -1.0, jdu: -1.0}, "=", 0.0,
                          f"dlog[{st.id},{t}]")
            else:
                b.add_row({jl: 1.0, vm.level[st.id, t - 1]: -1.0,
                           jc: -eff, jd: 1.0 / eff}, "=", 0.0,
                          f"soc_rec[{st.id},{t}]")
                b.add_row({jcs: 1.0, jcx: -1.0, jcu: -1.0,
                           vm.charge_on[st.id, t - 1]: 1.0}, "=", 0.0,
                          f"clog[{st.id},{t}]")
                b.add_row({jds: 1.0, jdx: -1.0, jdu: -1.0,
                           vm.discharge_on[st.id, t - 1]: 1.0}, "=", 0.0,
                          f"dlog[{st.id},{t}]")
            if st.min_charge_h > 1:
                wc = {vm.charge_start[st.id, s]: 1.0
                      for s in range(max(0, t - st.min_charge_h + 1), t + 1)}
                wc[jcu] = wc.get(jcu, 0.0) - 1.0
                b.add_row(wc, "<=", 0.0, f"crun[{st.id},{t}]")
            if st.min_discharge_h > 1:
                wd = {vm.discharge_start[st.id, s]: 1.0
                      for s in range(max(0, t - st.min_discharge_h + 1), t + 1)}
                wd[jdu] = wd.get(jdu, 0.0) - 1.0
                b.add_row(wd, "<=", 0.0, f"drun[{st.id},{t}]")

    for ld in model.adjustable_loads:
        hours = [t for t in ld.hours() if 0 <= t < T]
        pmin, pmax = ld.p_min_kw * sc, ld.p_max_kw * sc
        mult = load_mult(ld.bus)
        energy_row = {}
        for t in hours:
            if ld.kind == "curtailable":
                j = b.add_var(f"dl[{ld.id},{t}]", pmin, pmax, obj=(t + 1) * EPS_TIE)
            else:
                j = b.add_var(f"dl[{ld.id},{t}]", 0.0, pmax, obj=(t + 1) * EPS_TIE)
                ju = b.add_binary(f"ul[{ld.id},{t}]", obj=-EPS_COMMIT)
                vm.load_on[ld.id, t] = ju
                b.add_row({j: 1.0, ju: -pmax}, "<=", 0.0, f"al_hi[{ld.id},{t}]")
                if pmin > 0:
                    b.add_row({j: 1.0, ju: -pmin}, ">=", 0.0, f"al_lo[{ld.id},{t}]")
            vm.served[ld.id, t] = j
            inj[t].append((j, ld.bus, mult))
            energy_row[j] = 1.0
        b.add_row(energy_row, "=", ld.energy_kwh * sc, f"energy[{ld.id}]")
        if ld.kind == "shiftable" and ld.min_on_h > 1:
            # serving streaks shorter than the contract minimum are barred,
            # except where the window end cuts a streak short
            for i, t in enumerate(hours):
                jls = b.add_var(f"sl[{ld.id},{t}]", 0.0, 1.0, obj=EPS_COMMIT)
                vm.load_start[ld.id, t] = jls
                row = {jls: 1.0, vm.load_on[ld.id, t]: -1.0}
                if i > 0:
                    row[vm.load_on[ld.id, hours[i - 1]]] = 1.0
                b.add_row(row, ">=", 0.0, f"al_st[{ld.id},{t}]")
            for i, t in enumerate(hours):
                window = {vm.load_start[ld.id, s]: 1.0
                          for s in hours[max(0, i - ld.min_on_h + 1):i + 1]}
                ju = vm.load_on[ld.id, t]
                window[ju] = window.get(ju, 0.0) - 1.0
                b.add_row(window, "<=", 0.0, f"al_run[{ld.id},{t}]")

    for tie in model.ties:
        lo, hi = tie.flow_min_kw * sc, tie.flow_max_kw * sc
        # whoever receives power pays; sales back to the upstream grid earn
        # nothing (reverse flow is allowed but unpaid, so it carries only a
        # tie-break tilt that prefers spilling over exporting)
        to_main = tie.region_a == "main"
        for t in range(T):
            price = inputs.tie_price(tie, t) * 1000.0
            jf = b.add_var(f"f[{tie.id},{t}]", lo, hi)
            jp = b.add_var(f"fp[{tie.id},{t}]", 0.0, max(hi, 0.0), obj=price)
            jn = b.add_var(f"fn[{tie.id},{t}]", 0.0, max(-lo, 0.0),
                           obj=EPS_TIE if to_main else price)
            vm.flow[tie.id, t] = jf
            vm.import_pos[tie.id, t] = jp
            vm.import_neg[tie.id, t] = jn
            b.add_row({jp: 1.0, jf: -1.0}, ">=", 0.0, f"imp_b[{tie.id},{t}]")
            b.add_row({jn: 1.0, jf: 1.0}, ">=", 0.0, f"imp_a[{tie.id},{t}]")

    for region in model.regions:
        share = sum(bus.load_share for bus in model.region_buses(region))
        runits = [u for u in model.units if u.microgrid == region]
        rsto = [s for s in model.storage if s.microgrid == region]
        radj = [l for l in model.adjustable_loads if l.microgrid == region]
        for t in range(T):
            row = {vm.power[u.id, t]: 1.0 for u in runits}
            for st in rsto:
                row[vm.discharge[st.id, t]] = 1.0
                row[vm.charge[st.id, t]] = -1.0
            for tie in model.ties:
                if tie.region_b == region:
                    row[vm.flow[tie.id, t]] = row.get(vm.flow[tie.id, t], 0.0) + 1.0
                elif tie.region_a == region:
                    row[vm.flow[tie.id, t]] = row.get(vm.flow[tie.id, t], 0.0) - 1.0
            for ld in radj:
                if (ld.id, t) in vm.served:
                    row[vm.served[ld.id, t]] = -1.0
            b.add_row(row, "=", share * inputs.load_kw[t] * sc, f"bal[{region},{t}]")

    problem = b.build()
    if flag.network_constraints:
        problem, _ = link_network_constraints(model, problem, inputs, vm,
                                              voltage_estimate, keep)
    return problem, vm


def link_network_constraints(model: GridModel, problem: MilpProblem,
                             inputs: RealizedInputs, varmap: VariableMap,
                             voltage_estimate: dict[int, np.ndarray] | None = None,
                             keep: set[str] | None = None,
                             ) -> tuple[MilpProblem, set[str]]:
    """Append per-hour voltage-band and feeder-current rows.

    Bus voltages are affine in the dispatch: V = V0 + sum_d conj(kappa_d) g_d x_d,
    where V0 solves the fixed-load system with conj(V) frozen at the estimate
    and g_d is the injection sensitivity column of the bus of decision d.
    Real parts are fenced by [v_min, v_max], imaginary parts by the flat-model
    cap, and each rated feeder current by an octagon of supporting half-planes
    of the disk |I| <= limit.

    Rows that no dispatch inside the variable box can violate are dropped; the
    surviving row names are returned so later relinearization passes can keep
    the row set (and with it the basis shape) stable by passing them back in.
    """
    blocks = build_admittance(model)
    T = model.settings.horizon
    settings = model.settings
    lower = np.array([v.lower for v in problem.variables])
    upper = np.array([v.upper for v in problem.variables])
    by_id = {bus.id: bus for bus in model.buses}
    new_rows: list[Row] = []
    kept: set[str] = set()

    def emit(name: str, cols: np.ndarray, coeffs: np.ndarray, sense: str,
             rhs: float) -> None:
        live = np.abs(coeffs) > 1e-12
        cols, coeffs = cols[live], coeffs[live]
        if keep is None:
            hi_pts = np.maximum(coeffs * lower[cols], coeffs * upper[cols])
            lo_pts = np.minimum(coeffs * lower[cols], coeffs * upper[cols])
            if sense == "<=" and hi_pts.sum() <= rhs:
                return
            if sense == ">=" and lo_pts.sum() >= rhs:
                return
        elif name not in keep:
            return
        kept.add(name)
        new_rows.append(Row(dict(zip((int(c) for c in cols), coeffs)),
                            sense, float(rhs), name))

    octo = np.exp(-1j * np.arange(8) * math.pi / 4.0)
    for t in range(T):
        system = assemble_zip(model, fixed_loads_pu(model, inputs, t),
                              blocks=blocks)
        n = system.n
        if voltage_estimate is not None and t in voltage_estimate:
            v_est = np.asarray(voltage_estimate[t], dtype=complex)
        else:
            v_est = np.full(n, complex(settings.slack_voltage))
        v0 = conj_frozen_solution(system, v_est)
        gains = injection_sensitivities(system, v_est)
        pos = system.index
        entries = varmap.injections_by_hour[t]
        cols = np.array([j for j, _, _ in entries], dtype=int)
        # (bus, decision) complex sensitivity table for this hour
        C = np.empty((n, len(entries)), dtype=complex)
        for k, (_, bus_id, kappa) in enumerate(entries):
            C[:, k] = np.conj(kappa) * gains[:, pos(bus_id)]

        for bus_id in system.bus_order:
            bus = by_id[bus_id]
            i = pos(bus_id)
            re, im = C[i].real, C[i].imag
            emit(f"v_lo[{bus_id},{t}]", cols, re, ">=", bus.v_min - v0[i].real)
            emit(f"v_hi[{bus_id},{t}]", cols, re, "<=", bus.v_max - v0[i].real)
            emit(f"im_hi[{bus_id},{t}]", cols, im, "<=",
                 settings.imag_cap - v0[i].imag)
            emit(f"im_lo[{bus_id},{t}]", cols, -im, "<=",
                 settings.imag_cap + v0[i].imag)

        for bi, br in enumerate(model.branches):
            if br.limit_kva <= 0 or not br.closed:
                continue
            limit = br.limit_kva / (1000.0 * settings.base_mva) / settings.v_norm
            y = br.admittance

            def affine(bus_id):
                if bus_id == settings.slack_bus:
                    return complex(settings.slack_voltage), np.zeros(len(entries), complex)
                i = pos(bus_id)
                return v0[i], C[i]

            vn0, vnC = affine(br.from_bus)
            vm0, vmC = affine(br.to_bus)
            i0 = y * (vn0 - vm0)
            iC = y * (vnC - vmC)
            for k, w in enumerate(octo):
                emit(f"cur[{bi},{k},{t}]", cols, (w * iC).real, "<=",
                     limit - (w * i0).real)

    augmented = MilpProblem(problem.variables, problem.objective,
                            problem.rows + new_rows)
    augmented.validate()
    return augmented, kept


def extract_schedule(model: GridModel, varmap: VariableMap,
                     values: np.ndarray) -> Schedule:
    """Solution vector -> kW/kWh schedule, with binaries snapped and dispatch
    dust under the solver feasibility tolerance cleared."""
    T = varmap.horizon

    def kw_of(j: int) -> float:
        x = values[j] / varmap.scale
        return 0.0 if abs(x) < 1e-6 else float(x)

    unit_power, unit_on = {}, {}
    for u in model.units:
        p = [kw_of(varmap.power[u.id, t]) for t in range(T)]
        if u.kind == "wind":
            unit_on[u.id] = tuple(1 if x > 1e-6 else 0 for x in p)
        else:
            on = [int(round(values[varmap.on[u.id, t]])) for t in range(T)]
            p = [x if s else 0.0 for x, s in zip(p, on)]
            unit_on[u.id] = tuple(on)
        unit_power[u.id] = tuple(p)

    charge, discharge, level = {}, {}, {}
    for st in model.storage:
        con = [int(round(values[varmap.charge_on[st.id, t]])) for t in range(T)]
        don = [int(round(values[varmap.discharge_on[st.id, t]])) for t in range(T)]
        charge[st.id] = tuple(kw_of(varmap.charge[st.id, t]) if con[t] else 0.0
                              for t in range(T))
        discharge[st.id] = tuple(kw_of(varmap.discharge[st.id, t]) if don[t] else 0.0
                                 for t in range(T))
        level[st.id] = tuple(values[varmap.level[st.id, t]] / varmap.scale
                             for t in range(T))

    served = {}
    for ld in model.adjustable_loads:
        served[ld.id] = tuple(
            kw_of(varmap.served[ld.id, t]) if (ld.id, t) in varmap.served else 0.0
            for t in range(T))

    flows = {}
    for tie in model.ties:
        flows[tie.id] = tuple(kw_of(varmap.flow[tie.id, t]) for t in range(T))

    return Schedule(horizon=T, unit_power=unit_power, unit_on=unit_on,
                    storage_charge=charge, storage_discharge=discharge,
                    storage_soc=level, adjustable_power=served, tie_flow=flows)


def cost_of(schedule: Schedule, model: GridModel,
            inputs: RealizedInputs) -> CostReport:
    """Recompute the schedule's bill from first principles, independent of the
    solver objective: fuel per microgrid, start/stop fees, and import charges
    paid by whichever side of each tie receives power."""
    T = schedule.horizon
    generation = {region: 0.0 for region in model.regions}
    hourly = [0.0] * T
    startup = shutdown = exchange = 0.0

    for u in model.units:
        p = schedule.unit_power.get(u.id, (0.0,) * T)
        for t in range(T):
            fuel = u.cost_per_kwh * p[t]
            generation[u.microgrid] = generation.get(u.microgrid, 0.0) + fuel
            hourly[t] += fuel
        if u.kind == "wind":
            continue
        prev = 1 if u.initial_on_h > 0 else 0
        on = schedule.unit_on.get(u.id, (0,) * T)
        for t in range(T):
            if on[t] and not prev:
                startup += u.startup_cost
                hourly[t] += u.startup_cost
            if prev and not on[t]:
                shutdown += u.shutdown_cost
                hourly[t] += u.shutdown_cost
            prev = on[t]

    for tie in model.ties:
        f = schedule.tie_flow.get(tie.id, (0.0,) * T)
        to_main = tie.region_a == "main"
        for t in range(T):
            # sales back to the upstream grid are unpaid; between microgrids
            # the receiving side pays whichever way the power moves
            imported = max(f[t], 0.0) if to_main else abs(f[t])
            fee = inputs.tie_price(tie, t) * imported
            exchange += fee
            hourly[t] += fee

    total = sum(generation.values()) + startup + shutdown + exchange
    return CostReport(total=total, generation=generation, startup=startup,
                      shutdown=shutdown, exchange=exchange,
                      hourly=tuple(hourly))


def default_inputs(model: GridModel) -> RealizedInputs:
    """Forecasts taken at face value (all scenario factors = 1)."""
    return scale_forecasts(model)
