"""Independent feasibility audit of a committed schedule.

``validate_schedule`` re-derives every operational rule from the model and
the realized inputs and returns one message per violation (empty list means
clean).  It deliberately shares no code with the optimizer's constraint
builder so the two can cross-check each other.

Run-length rules use day-ahead semantics: a campaign cut off by the end of
the horizon is not penalized, and unit histories (hours already on/off at
hour 0) count toward the first campaign.
"""

from __future__ import annotations

import math

from .types import GridModel, RealizedInputs, Schedule

ON_TOL = 1e-6


def _runs(flags: list[int]) -> list[tuple[int, int, int]]:
    """Maximal constant runs as (value, start, length)."""
    out = []
    start = 0
    for t in range(1, len(flags) + 1):
        if t == len(flags) or flags[t] != flags[start]:
            out.append((flags[start], start, t - start))
            start = t
    return out


def _series(schedule_dict, key, T, what, errors):
    s = schedule_dict.get(key)
    if s is None:
        errors.append(f"{what} {key}: series missing from schedule")
        return None
    if len(s) != T:
        errors.append(f"{what} {key}: series has {len(s)} entries, expected {T}")
        return None
    return s


def validate_schedule(model: GridModel, schedule: Schedule,
                      inputs: RealizedInputs, tol_kw: float = 1e-3,
                      tol_kwh: float = 1e-3) -> list[str]:
    T = model.settings.horizon
    errors: list[str] = []
    if schedule.horizon != T:
        errors.append(f"schedule horizon {schedule.horizon} != case horizon {T}")
        return errors

    for u in model.units:
        p = _series(schedule.unit_power, u.id, T, "unit", errors)
        if p is None:
            continue
        if u.kind == "wind":
            avail = inputs.wind_kw.get(u.id, (0.0,) * T)
            for t in range(T):
                if p[t] < -tol_kw:
                    errors.append(f"unit {u.id} h{t + 1}: negative output {p[t]:.3f}")
                if p[t] > avail[t] + tol_kw:
                    errors.append(f"unit {u.id} h{t + 1}: output {p[t]:.3f} kW "
                                  f"exceeds available wind {avail[t]:.3f}")
            continue

        on = _series(schedule.unit_on, u.id, T, "unit", errors)
        if on is None:
            continue
        for t in range(T):
            if on[t] not in (0, 1):
                errors.append(f"unit {u.id} h{t + 1}: status {on[t]!r} not binary")
        for t in range(T):
            hi = u.p_max_kw * on[t]
            lo = u.p_min_kw * on[t]
            if p[t] > hi + tol_kw or p[t] < lo - tol_kw:
                errors.append(f"unit {u.id} h{t + 1}: {p[t]:.3f} kW outside "
                              f"[{lo:.1f}, {hi:.1f}]")
        if u.ramp_up_kw > 0 or u.ramp_down_kw > 0:
            prev = u.initial_power_kw
            for t in range(T):
                if u.ramp_up_kw > 0 and p[t] - prev > u.ramp_up_kw + tol_kw:
                    errors.append(f"unit {u.id} h{t + 1}: ramp up "
                                  f"{p[t] - prev:.3f} > {u.ramp_up_kw}")
                if u.ramp_down_kw > 0 and prev - p[t] > u.ramp_down_kw + tol_kw:
                    errors.append(f"unit {u.id} h{t + 1}: ramp down "
                                  f"{prev - p[t]:.3f} > {u.ramp_down_kw}")
                prev = p[t]

        runs = _runs(list(on))
        for value, start, length in runs:
            ends_at_horizon = start + length == T
            if value == 1:
                eff = length + (max(u.initial_on_h, 0) if start == 0 else 0)
                if not ends_at_horizon and eff < u.min_up_h:
                    errors.append(f"unit {u.id}: on-run at h{start + 1} lasts "
                                  f"{eff} h < minimum up time {u.min_up_h}")
            else:
                eff = length + (max(-u.initial_on_h, 0) if start == 0 else 0)
                if not ends_at_horizon and eff < u.min_down_h:
                    errors.append(f"unit {u.id}: off-run at h{start + 1} lasts "
                                  f"{eff} h < minimum down time {u.min_down_h}")

    for st in model.storage:
        ch = _series(schedule.storage_charge, st.id, T, "storage", errors)
        dis = _series(schedule.storage_discharge, st.id, T, "storage", errors)
        soc = _series(schedule.storage_soc, st.id, T, "storage", errors)
        if ch is None or dis is None or soc is None:
            continue
        eff = math.sqrt(st.round_trip_efficiency)
        level = st.initial_soc_kwh
        for t in range(T):
            if ch[t] < -tol_kw or dis[t] < -tol_kw:
                errors.append(f"storage {st.id} h{t + 1}: negative rate")
            if ch[t] > ON_TOL and dis[t] > ON_TOL:
                errors.append(f"storage {st.id} h{t + 1}: charges "
                              f"{ch[t]:.3f} kW while discharging {dis[t]:.3f} kW")
            for mode, val, lo, hi in (
                    ("charge", ch[t], st.p_charge_min_kw, st.p_charge_max_kw),
                    ("discharge", dis[t], st.p_discharge_min_kw, st.p_discharge_max_kw)):
                if val > ON_TOL and not (lo - tol_kw <= val <= hi + tol_kw):
                    errors.append(f"storage {st.id} h{t + 1}: {mode} rate "
                                  f"{val:.3f} kW outside [{lo}, {hi}]")
            level = level + eff * ch[t] - dis[t] / eff
            if abs(level - soc[t]) > tol_kwh:
                errors.append(f"storage {st.id} h{t + 1}: state {soc[t]:.3f} kWh "
                              f"does not follow from flows (expect {level:.3f})")
            if soc[t] > st.energy_capacity_kwh + tol_kwh or soc[t] < st.soc_min_kwh - tol_kwh:
                errors.append(f"storage {st.id} h{t + 1}: state {soc[t]:.3f} kWh "
                              f"outside [{st.soc_min_kwh}, {st.energy_capacity_kwh}]")
        if soc[T - 1] < st.final_soc_min_kwh - tol_kwh:
            errors.append(f"storage {st.id}: final state {soc[T - 1]:.3f} kWh "
                          f"below required {st.final_soc_min_kwh}")
        for mode, series, need in (("charge", ch, st.min_charge_h),
                                   ("discharge", dis, st.min_discharge_h)):
            if need <= 1:
                continue
            flags = [1 if v > ON_TOL else 0 for v in series]
            for value, start, length in _runs(flags):
                if value == 1 and start + length < T and length < need:
                    errors.append(f"storage {st.id}: {mode} run at h{start + 1} "
                                  f"lasts {length} h < minimum {need}")

    for ld in model.adjustable_loads:
        d = _series(schedule.adjustable_power, ld.id, T, "adjustable load", errors)
        if d is None:
            continue
        window = set(ld.hours())
        for t in range(T):
            if t not in window:
                if abs(d[t]) > tol_kw:
                    errors.append(f"adjustable load {ld.id} h{t + 1}: "
                                  f"{d[t]:.3f} kW outside its window")
                continue
            if d[t] < -tol_kw or d[t] > ld.p_max_kw + tol_kw:
                errors.append(f"adjustable load {ld.id} h{t + 1}: {d[t]:.3f} kW "
                              f"outside [0, {ld.p_max_kw}]")
            if ld.kind == "curtailable" and d[t] < ld.p_min_kw - tol_kw:
                errors.append(f"adjustable load {ld.id} h{t + 1}: {d[t]:.3f} kW "
                              f"below always-on minimum {ld.p_min_kw}")
            if ld.kind == "shiftable" and d[t] > ON_TOL and d[t] < ld.p_min_kw - tol_kw:
                errors.append(f"adjustable load {ld.id} h{t + 1}: {d[t]:.3f} kW "
                              f"below running minimum {ld.p_min_kw}")
        served = sum(d[t] for t in range(T))
        if abs(served - ld.energy_kwh) > tol_kwh:
            errors.append(f"adjustable load {ld.id}: served {served:.3f} kWh, "
                          f"contract requires {ld.energy_kwh}")
        if ld.kind == "shiftable" and ld.min_on_h > 1:
            hours = [t for t in ld.hours() if 0 <= t < T]
            flags = [1 if d[t] > ON_TOL else 0 for t in hours]
            for value, start, length in _runs(flags):
                # a streak cut off by the window end is not penalized
                if value == 1 and start + length < len(hours) and length < ld.min_on_h:
                    errors.append(f"adjustable load {ld.id}: serving streak at "
                                  f"h{hours[start] + 1} lasts {length} h < "
                                  f"minimum {ld.min_on_h}")

    for tie in model.ties:
        f = _series(schedule.tie_flow, tie.id, T, "tie", errors)
        if f is None:
            continue
        for t in range(T):
            if f[t] > tie.flow_max_kw + tol_kw or f[t] < tie.flow_min_kw - tol_kw:
                errors.append(f"tie {tie.id} h{t + 1}: flow {f[t]:.3f} kW outside "
                              f"[{tie.flow_min_kw}, {tie.flow_max_kw}]")

    for region in model.regions:
        gen_units = [u for u in model.units if u.microgrid == region]
        sto = [s for s in model.storage if s.microgrid == region]
        adj = [l for l in model.adjustable_loads if l.microgrid == region]
        fixed_share = sum(b.load_share for b in model.region_buses(region))
        for t in range(T):
            supply = sum(schedule.unit_power.get(u.id, (0.0,) * T)[t] for u in gen_units)
            supply += sum(schedule.storage_discharge.get(s.id, (0.0,) * T)[t]
                          - schedule.storage_charge.get(s.id, (0.0,) * T)[t]
                          for s in sto)
            for tie in model.ties:
                flow = schedule.tie_flow.get(tie.id, (0.0,) * T)[t]
                if tie.region_b == region:
                    supply += flow
                elif tie.region_a == region:
                    supply -= flow
            demand = fixed_share * inputs.load_kw[t]
            demand += sum(schedule.adjustable_power.get(l.id, (0.0,) * T)[t]
                          for l in adj)
            if abs(supply - demand) > tol_kw:
                errors.append(f"region {region} h{t + 1}: supply {supply:.4f} kW "
                              f"!= demand {demand:.4f} kW")

    return errors
