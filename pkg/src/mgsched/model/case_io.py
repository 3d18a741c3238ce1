"""Case file loading, validation, saving, and forecast scaling.

Cases are a single JSON document with top-level sections ``settings``,
``buses``, ``branches``, ``microgrids``, ``tie_lines``, ``ders``,
``storages``, ``adjustable_loads`` and ``forecasts``.  Hours in case files
are 1-based; tie-line ends name a microgrid id or the sentinel
``MAIN_GRID``.  ``load_case`` validates everything it can and raises
:class:`CaseError` with one line per problem (field paths included) rather
than stopping at the first, so a broken case can be fixed in one pass.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .types import (
    AdjustableLoad,
    Branch,
    Bus,
    CaseError,
    CaseSettings,
    DerUnit,
    ForecastSet,
    GridModel,
    RealizedInputs,
    StorageUnit,
    TieLine,
)

LOAD_KINDS = ("shiftable", "curtailable")
SWITCH_STATES = ("closed", "open")
MAIN_GRID = "MAIN_GRID"            # tie-line end label for the upstream grid
_MAIN = "main"                     # its internal region id


def bundled_case_path() -> Path:
    """Path of the case distributed with the package."""
    return Path(__file__).resolve().parent.parent / "cases" / "tables_case.json"


def _profile(value, horizon: int, where: str, errors: list[str]) -> tuple[float, ...]:
    """Normalize a scalar-or-list profile entry to a length-horizon tuple."""
    if isinstance(value, (int, float)):
        return (float(value),) * horizon
    if isinstance(value, (list, tuple)):
        if len(value) != horizon:
            errors.append(f"{where}: profile has {len(value)} entries, expected {horizon}")
            return tuple(float(v) for v in value)
        return tuple(float(v) for v in value)
    errors.append(f"{where}: expected number or list, got {type(value).__name__}")
    return (0.0,) * horizon


def load_case(path: str | Path) -> GridModel:
    raw = json.loads(Path(path).read_text())
    errors: list[str] = []

    s = raw.get("settings", {})
    settings = CaseSettings(
        horizon=int(s.get("horizon_hours", 24)),
        base_mva=float(s.get("base_mva", 1.0)),
        v_norm=float(s.get("v_norm", 1.0)),
        imag_cap=float(s.get("imag_cap", 0.25)),
        slack_bus=str(s.get("slack_bus", "")),
        slack_voltage=float(s.get("slack_voltage", 1.0)),
    )
    T = settings.horizon
    if T < 1:
        errors.append("settings.horizon_hours: must be at least 1")
    if settings.base_mva <= 0:
        errors.append("settings.base_mva: must be positive")
    if settings.v_norm <= 0:
        errors.append("settings.v_norm: must be positive")

    mg_entries = raw.get("microgrids", [])
    regions = tuple(str(m.get("id", f"MG?{k}")) for k, m in enumerate(mg_entries))
    if len(set(regions)) != len(regions):
        errors.append("microgrids: duplicate ids")
    region_set = set(regions)

    buses = []
    for k, b in enumerate(raw.get("buses", [])):
        where = f"buses[{k}]"
        zw = tuple(float(v) for v in b.get("zip_fractions", (0.0, 0.0, 1.0)))
        if len(zw) != 3:
            errors.append(f"{where}.zip_fractions: need 3 entries")
            zw = (0.0, 0.0, 1.0)
        elif abs(sum(zw) - 1.0) > 1e-9:
            errors.append(f"{where}.zip_fractions: fractions sum to {sum(zw):.6f}, not 1")
        mg = b.get("microgrid_id")
        if mg is not None and mg not in region_set:
            errors.append(f"{where}.microgrid_id: unknown microgrid {mg!r}")
        pf = float(b.get("power_factor", 1.0))
        if not 0.0 < pf <= 1.0:
            errors.append(f"{where}.power_factor: {pf} outside (0, 1]")
        share = float(b.get("load_share", 0.0))
        if share < 0:
            errors.append(f"{where}.load_share: negative")
        vmin = float(b.get("v_min", 0.95))
        vmax = float(b.get("v_max", 1.05))
        if vmin >= vmax:
            errors.append(f"{where}: v_min {vmin} >= v_max {vmax}")
        buses.append(Bus(str(b.get("id", f"?{k}")), mg, share, pf, zw, vmin, vmax))

    bus_ids = [b.id for b in buses]
    if len(set(bus_ids)) != len(bus_ids):
        errors.append("buses: duplicate bus ids")
    bus_set = set(bus_ids)
    total_share = sum(b.load_share for b in buses)
    if buses and abs(total_share - 1.0) > 1e-6:
        errors.append(f"buses: load shares sum to {total_share:.8f}, not 1")
    if settings.slack_bus not in bus_set:
        errors.append(f"settings.slack_bus: {settings.slack_bus!r} is not a bus")

    branches = []
    for k, br in enumerate(raw.get("branches", [])):
        where = f"branches[{k}]"
        fb, tb = str(br.get("from_bus", "")), str(br.get("to_bus", ""))
        for end, node in (("from_bus", fb), ("to_bus", tb)):
            if node not in bus_set:
                errors.append(f"{where}.{end}: unknown bus {node!r}")
        z = br.get("series_impedance", [0.0, 0.0])
        try:
            r, x = float(z[0]), float(z[1])
        except (TypeError, ValueError, IndexError):
            errors.append(f"{where}.series_impedance: expected [r, x] in pu")
            r, x = 0.0, 0.0
        if r == 0.0 and x == 0.0:
            errors.append(f"{where}: zero impedance")
        lim = float(br.get("thermal_limit", 0.0))
        if lim < 0:
            errors.append(f"{where}.thermal_limit: negative")
        sw = str(br.get("switch_state", "closed"))
        if sw not in SWITCH_STATES:
            errors.append(f"{where}.switch_state: {sw!r} not in {SWITCH_STATES}")
        branches.append(Branch(fb, tb, r, x, lim, sw))

    # every bus must be reachable from the slack through closed branches
    if settings.slack_bus in bus_set:
        adj: dict[str, list[str]] = {b: [] for b in bus_ids}
        for br in branches:
            if br.closed and br.from_bus in adj and br.to_bus in adj:
                adj[br.from_bus].append(br.to_bus)
                adj[br.to_bus].append(br.from_bus)
        seen = {settings.slack_bus}
        stack = [settings.slack_bus]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        for b in bus_ids:
            if b not in seen:
                errors.append(f"buses: {b} is disconnected from the slack bus")

    ties = []
    for k, t in enumerate(raw.get("tie_lines", [])):
        where = f"tie_lines[{k}]"
        ends = t.get("connects", [])
        if not isinstance(ends, (list, tuple)) or len(ends) != 2:
            errors.append(f"{where}.connects: expected two end labels")
            ends = [MAIN_GRID, MAIN_GRID]
        ra, rb = (str(e) for e in ends)
        for end in (ra, rb):
            if end != MAIN_GRID and end not in region_set:
                errors.append(f"{where}.connects: unknown end {end!r}")
        if ra == rb:
            errors.append(f"{where}.connects: both ends are {ra!r}")
        lo = float(t.get("p_min", 0.0))
        hi = float(t.get("p_max", 0.0))
        if lo > hi:
            errors.append(f"{where}: p_min {lo} > p_max {hi}")
        price = t.get("price_profile", 0.0)
        market = price == "market"
        profile = (0.0,) * T if market else _profile(
            price, T, f"{where}.price_profile", errors)
        if any(p < 0 for p in profile):
            errors.append(f"{where}.price_profile: negative price")
        ties.append(TieLine(str(t.get("id", f"T?{k}")),
                            _MAIN if ra == MAIN_GRID else ra,
                            _MAIN if rb == MAIN_GRID else rb,
                            lo, hi, profile, market))
    tie_ids = [t.id for t in ties]
    if len(set(tie_ids)) != len(tie_ids):
        errors.append("tie_lines: duplicate tie ids")
    tie_set = set(tie_ids)

    bus_region = {b.id: b.microgrid for b in buses}
    for k, m in enumerate(mg_entries):
        where = f"microgrids[{k}]"
        mg = regions[k]
        members = [str(x) for x in m.get("buses", [])]
        for bid in members:
            if bid not in bus_set:
                errors.append(f"{where}.buses: unknown bus {bid!r}")
            elif bus_region.get(bid) != mg:
                errors.append(f"{where}.buses: bus {bid} declares microgrid "
                              f"{bus_region.get(bid)!r}, not {mg!r}")
        member_set = set(members)
        for b in buses:
            if b.microgrid == mg and b.id not in member_set:
                errors.append(f"{where}.buses: bus {b.id} missing from member list")
        for tid in (str(x) for x in m.get("tie_lines", [])):
            if tid not in tie_set:
                errors.append(f"{where}.tie_lines: unknown tie {tid!r}")
            elif not any(t.id == tid and mg in (t.region_a, t.region_b)
                         for t in ties):
                errors.append(f"{where}.tie_lines: tie {tid} does not connect {mg}")

    wind_names = set(raw.get("forecasts", {}).get("wind_shapes", {}) or {})

    units = []
    for k, u in enumerate(raw.get("ders", [])):
        where = f"ders[{k}]"
        dispatchable = bool(u.get("dispatchable", True))
        kind = "dispatchable" if dispatchable else "wind"
        bus = str(u.get("bus_id", ""))
        mg = str(u.get("microgrid_id", ""))
        if mg not in region_set:
            errors.append(f"{where}.microgrid_id: unknown microgrid {mg!r}")
        if bus not in bus_set:
            errors.append(f"{where}.bus_id: unknown bus {bus!r}")
        elif bus_region.get(bus) != mg:
            errors.append(f"{where}.microgrid_id: {mg!r} does not match bus {bus} "
                          f"microgrid {bus_region.get(bus)!r}")
        pmin = float(u.get("p_min", 0.0))
        pmax = float(u.get("p_max", 0.0))
        if pmin < 0 or pmax < pmin:
            errors.append(f"{where}: power band [{pmin}, {pmax}] invalid")
        ref = str(u.get("profile_ref") or "")
        if dispatchable:
            if ref:
                errors.append(f"{where}.profile_ref: set on a dispatchable unit")
        else:
            if pmax <= 0:
                errors.append(f"{where}: nondispatchable unit needs positive p_max")
            if not ref:
                errors.append(f"{where}.profile_ref: required for a "
                              "nondispatchable unit")
            elif ref not in wind_names:
                errors.append(f"{where}.profile_ref: no forecast series {ref!r}")
        mu = int(u.get("min_up", 0))
        md = int(u.get("min_down", 0))
        if mu < 0 or md < 0:
            errors.append(f"{where}: negative minimum up/down time")
        rup = float(u.get("ramp_up", 0.0))
        rdn = float(u.get("ramp_down", 0.0))
        if rup < 0 or rdn < 0:
            errors.append(f"{where}: negative ramp limit")
        init_on = int(u.get("initial_status", -md if md else 0))
        init_p = float(u.get("initial_power", pmin if init_on > 0 else 0.0))
        if init_p < 0 or init_p > pmax:
            errors.append(f"{where}.initial_power: {init_p} outside [0, {pmax}]")
        units.append(DerUnit(str(u.get("id", f"G?{k}")), bus, mg, kind,
                             float(u.get("cost_coeff", 0.0)), pmin, pmax, mu, md,
                             rup, rdn,
                             float(u.get("startup_cost", 0.0)),
                             float(u.get("shutdown_cost", 0.0)),
                             init_on, init_p, ref))

    storage = []
    for k, st in enumerate(raw.get("storages", [])):
        where = f"storages[{k}]"
        bus = str(st.get("bus_id", ""))
        mg = str(st.get("microgrid_id", ""))
        if bus not in bus_set:
            errors.append(f"{where}.bus_id: unknown bus {bus!r}")
        elif bus_region.get(bus) != mg:
            errors.append(f"{where}.microgrid_id: {mg!r} does not match bus {bus} "
                          f"microgrid {bus_region.get(bus)!r}")
        cap = float(st.get("energy_capacity", 0.0))
        if cap <= 0:
            errors.append(f"{where}.energy_capacity: must be positive")
        cmin = float(st.get("p_charge_min", 0.0))
        cmax = float(st.get("p_charge_max", 0.0))
        dmin = float(st.get("p_discharge_min", 0.0))
        dmax = float(st.get("p_discharge_max", 0.0))
        if cmin < 0 or cmax < cmin:
            errors.append(f"{where}: charge band [{cmin}, {cmax}] invalid")
        if dmin < 0 or dmax < dmin:
            errors.append(f"{where}: discharge band [{dmin}, {dmax}] invalid")
        mch = int(st.get("min_charge_time", 0))
        mdis = int(st.get("min_discharge_time", 0))
        if mch < 0 or mdis < 0:
            errors.append(f"{where}: negative minimum charge/discharge time")
        eff = float(st.get("round_trip_efficiency", 1.0))
        init = float(st.get("initial_soc", 0.0))
        fin = float(st.get("final_soc_min", 0.0))
        if not 0 <= init <= cap:
            errors.append(f"{where}.initial_soc: {init} outside [0, {cap}]")
        if fin > cap:
            errors.append(f"{where}.final_soc_min: {fin} above capacity {cap}")
        if not 0 < eff <= 1:
            errors.append(f"{where}.round_trip_efficiency: {eff} outside (0, 1]")
        storage.append(StorageUnit(str(st.get("id", f"S?{k}")), bus, mg, cap,
                                   cmin, cmax, dmin, dmax, mch, mdis,
                                   eff, init, fin))

    loads = []
    for k, ld in enumerate(raw.get("adjustable_loads", [])):
        where = f"adjustable_loads[{k}]"
        kind = str(ld.get("kind", "shiftable"))
        if kind not in LOAD_KINDS:
            errors.append(f"{where}.kind: {kind!r} not in {LOAD_KINDS}")
        bus = str(ld.get("bus_id", ""))
        mg = str(ld.get("microgrid_id", ""))
        if bus not in bus_set:
            errors.append(f"{where}.bus_id: unknown bus {bus!r}")
        elif bus_region.get(bus) != mg:
            errors.append(f"{where}.microgrid_id: {mg!r} does not match bus {bus} "
                          f"microgrid {bus_region.get(bus)!r}")
        w0 = int(ld.get("window_start", 1))
        w1 = int(ld.get("window_end", T))
        if not 1 <= w0 <= w1 <= T:
            errors.append(f"{where}: window [{w0}, {w1}] outside 1..{T}")
        pmin = float(ld.get("p_min", 0.0))
        pmax = float(ld.get("p_max", 0.0))
        energy = float(ld.get("required_energy", 0.0))
        if pmin < 0 or pmax < pmin:
            errors.append(f"{where}: power band [{pmin}, {pmax}] invalid")
        span = max(0, w1 - w0 + 1)
        mon = int(ld.get("min_on_time", 1))
        if mon < 1:
            errors.append(f"{where}.min_on_time: must be at least 1")
        elif mon > span:
            errors.append(f"{where}.min_on_time: {mon} h exceeds the "
                          f"{span} h window")
        if energy < 0 or energy > pmax * span + 1e-9:
            errors.append(f"{where}.required_energy: {energy} kWh cannot fit in "
                          f"{span} h at {pmax} kW")
        if kind == "curtailable" and energy < pmin * span - 1e-9:
            errors.append(f"{where}.required_energy: {energy} kWh below the "
                          f"always-on minimum {pmin * span} kWh")
        if kind == "shiftable" and pmin > 0 and energy > 0:
            # the served hours must admit an integer count k with
            # k*pmin <= energy <= k*pmax
            k_lo = math.ceil(energy / pmax - 1e-9) if pmax > 0 else 0
            k_hi = min(span, math.floor(energy / pmin + 1e-9))
            if k_lo > k_hi:
                errors.append(f"{where}: no feasible number of running hours "
                              f"for {energy} kWh in [{pmin}, {pmax}] kW")
        loads.append(AdjustableLoad(str(ld.get("id", f"L?{k}")), bus, mg, kind,
                                    pmin, pmax, energy, w0, w1, mon))

    all_ids = [u.id for u in units] + [s_.id for s_ in storage] + [l.id for l in loads]
    if len(set(all_ids)) != len(all_ids):
        errors.append("ders/storages/adjustable_loads: resource ids not unique")

    f = raw.get("forecasts", {})
    peak = float(f.get("peak_load", 0.0))
    if peak <= 0:
        errors.append("forecasts.peak_load: must be positive")
    load_shape = _profile(f.get("load_shape", []), T, "forecasts.load_shape", errors)
    if any(v < 0 for v in load_shape):
        errors.append("forecasts.load_shape: negative entries")
    price_shape = _profile(f.get("price_shape", []), T, "forecasts.price_shape", errors)
    if any(v < 0 for v in price_shape):
        errors.append("forecasts.price_shape: negative entries")
    wind_shapes = {}
    for nm, series in (f.get("wind_shapes", {}) or {}).items():
        shape = _profile(series, T, f"forecasts.wind_shapes[{nm}]", errors)
        if any(v < 0 for v in shape):
            errors.append(f"forecasts.wind_shapes[{nm}]: negative entries")
        wind_shapes[str(nm)] = shape
    forecasts = ForecastSet(peak, load_shape, wind_shapes, price_shape)

    if errors:
        raise CaseError(f"case {path} has {len(errors)} problem(s):\n  "
                        + "\n  ".join(errors))

    return GridModel(str(raw.get("name", Path(path).stem)), regions,
                     tuple(buses), tuple(branches), tuple(ties), tuple(units),
                     tuple(storage), tuple(loads), forecasts, settings)


def save_case(model: GridModel, path: str | Path) -> None:
    """Serialize a model back to the JSON layout ``load_case`` reads."""
    def tie_end(region: str) -> str:
        return MAIN_GRID if region == _MAIN else region

    doc = {
        "name": model.name,
        "settings": {
            "horizon_hours": model.settings.horizon,
            "base_mva": model.settings.base_mva,
            "v_norm": model.settings.v_norm,
            "imag_cap": model.settings.imag_cap,
            "slack_bus": model.settings.slack_bus,
            "slack_voltage": model.settings.slack_voltage,
        },
        "buses": [
            {"id": b.id, "microgrid_id": b.microgrid, "load_share": b.load_share,
             "power_factor": b.power_factor, "zip_fractions": list(b.zip_weights),
             "v_min": b.v_min, "v_max": b.v_max}
            for b in model.buses
        ],
        "branches": [
            {"from_bus": br.from_bus, "to_bus": br.to_bus,
             "series_impedance": [br.resistance, br.reactance],
             "thermal_limit": br.limit_kva, "switch_state": br.switch_state}
            for br in model.branches
        ],
        "microgrids": [
            {"id": mg,
             "buses": [b.id for b in model.buses if b.microgrid == mg],
             "tie_lines": [t.id for t in model.ties if mg in (t.region_a, t.region_b)]}
            for mg in model.regions
        ],
        "tie_lines": [
            {"id": t.id, "connects": [tie_end(t.region_a), tie_end(t.region_b)],
             "p_min": t.flow_min_kw, "p_max": t.flow_max_kw,
             "price_profile": "market" if t.price_is_market else list(t.price_per_kwh)}
            for t in model.ties
        ],
        "ders": [
            {k: v for k, v in (
                ("id", u.id), ("microgrid_id", u.microgrid), ("bus_id", u.bus),
                ("dispatchable", u.kind == "dispatchable"),
                ("cost_coeff", u.cost_per_kwh),
                ("p_min", u.p_min_kw), ("p_max", u.p_max_kw),
                ("min_up", u.min_up_h), ("min_down", u.min_down_h),
                ("ramp_up", u.ramp_up_kw), ("ramp_down", u.ramp_down_kw),
                ("startup_cost", u.startup_cost), ("shutdown_cost", u.shutdown_cost),
                ("initial_status", u.initial_on_h),
                ("initial_power", u.initial_power_kw),
                ("profile_ref", u.profile_ref or None),
             ) if v is not None}
            for u in model.units
        ],
        "storages": [
            {"id": st.id, "microgrid_id": st.microgrid, "bus_id": st.bus,
             "energy_capacity": st.energy_capacity_kwh,
             "p_charge_min": st.p_charge_min_kw, "p_charge_max": st.p_charge_max_kw,
             "p_discharge_min": st.p_discharge_min_kw,
             "p_discharge_max": st.p_discharge_max_kw,
             "min_charge_time": st.min_charge_h,
             "min_discharge_time": st.min_discharge_h,
             "round_trip_efficiency": st.round_trip_efficiency,
             "initial_soc": st.initial_soc_kwh,
             "final_soc_min": st.final_soc_min_kwh}
            for st in model.storage
        ],
        "adjustable_loads": [
            {"id": ld.id, "microgrid_id": ld.microgrid, "bus_id": ld.bus,
             "kind": ld.kind, "p_min": ld.p_min_kw, "p_max": ld.p_max_kw,
             "required_energy": ld.energy_kwh,
             "window_start": ld.window_start_h, "window_end": ld.window_end_h,
             "min_on_time": ld.min_on_h}
            for ld in model.adjustable_loads
        ],
        "forecasts": {
            "peak_load": model.forecasts.peak_load_kw,
            "load_shape": list(model.forecasts.load_shape),
            "wind_shapes": {nm: list(shape)
                            for nm, shape in model.forecasts.wind_shapes.items()},
            "price_shape": list(model.forecasts.price_shape),
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def scale_forecasts(model: GridModel, load_factor=1.0, wind_factor=1.0,
                    price_factor=1.0) -> RealizedInputs:
    """Turn forecast shapes into hourly series, scaled by scenario factors.

    Factors are scalars or per-hour arrays.  Wind availability is capped at
    each unit's nameplate; all series are floored at zero.
    """
    T = model.settings.horizon
    lf = np.broadcast_to(np.asarray(load_factor, dtype=float), (T,))
    wf = np.broadcast_to(np.asarray(wind_factor, dtype=float), (T,))
    pf = np.broadcast_to(np.asarray(price_factor, dtype=float), (T,))
    shapes = model.forecasts
    load = np.clip(shapes.peak_load_kw * np.asarray(shapes.load_shape) * lf, 0.0, None)
    price = np.clip(np.asarray(shapes.price_shape) * pf, 0.0, None)
    wind = {}
    for u in model.wind_units():
        shape = np.asarray(shapes.wind_shapes[u.profile_ref])
        avail = np.clip(u.p_max_kw * shape * wf, 0.0, u.p_max_kw)
        wind[u.id] = tuple(avail)
    return RealizedInputs(tuple(load), wind, tuple(price))
