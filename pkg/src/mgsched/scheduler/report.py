"""Flat-file views of Schedule and CostReport.

The CSV layout is one row per entity-hour with 1-based hours, so the
files diff cleanly and load directly into pandas/gnuplot.  Both
directions are provided and round-trip exactly (power_kw is written at
micro-kW resolution, well under commitment tolerances).
"""
from __future__ import annotations

from ..model import GridModel, Schedule
from .formulation import CostReport

SCHEDULE_FIELDS = ("entity_id", "kind", "hour", "status", "power_kw", "soc_kwh")


def schedule_rows(model: GridModel, schedule: Schedule) -> list[dict]:
    """One row per entity-hour: units, storage, adjustable loads, ties.

    Storage power is signed grid-side flow (discharge positive); soc_kwh
    is filled for storage rows only.
    """
    rows = []

    def put(entity, kind, t, status, power, soc=""):
        rows.append({"entity_id": entity, "kind": kind, "hour": t + 1,
                     "status": status, "power_kw": round(power, 6),
                     "soc_kwh": soc if soc == "" else round(soc, 6)})

    for u in model.units:
        on, p = schedule.unit_on[u.id], schedule.unit_power[u.id]
        for t in range(schedule.horizon):
            put(u.id, "unit", t, on[t], p[t])
    for s in model.storage:
        ch, dis = schedule.storage_charge[s.id], schedule.storage_discharge[s.id]
        soc = schedule.storage_soc[s.id]
        for t in range(schedule.horizon):
            put(s.id, "storage", t, int(ch[t] > 1e-9 or dis[t] > 1e-9),
                dis[t] - ch[t], soc[t])
    for ld in model.adjustable_loads:
        p = schedule.adjustable_power[ld.id]
        for t in range(schedule.horizon):
            put(ld.id, "load", t, int(p[t] > 1e-9), p[t])
    for tie in model.ties:
        f = schedule.tie_flow[tie.id]
        for t in range(schedule.horizon):
            put(tie.id, "tie", t, int(abs(f[t]) > 1e-9), f[t])
    return rows


def schedule_from_rows(model: GridModel, rows: list[dict]) -> Schedule:
    """Inverse of :func:`schedule_rows` (CSV readers yield strings; both
    string and numeric cells are accepted)."""
    T = model.settings.horizon
    series: dict[tuple[str, str], list[float]] = {}
    status: dict[tuple[str, str], list[int]] = {}
    soc: dict[str, list[float]] = {}
    for r in rows:
        key = (str(r["kind"]), str(r["entity_id"]))
        t = int(r["hour"]) - 1
        series.setdefault(key, [0.0] * T)[t] = float(r["power_kw"])
        status.setdefault(key, [0] * T)[t] = int(r["status"])
        if r["kind"] == "storage":
            soc.setdefault(str(r["entity_id"]), [0.0] * T)[t] = float(r["soc_kwh"])
    return Schedule(
        horizon=T,
        unit_power={u.id: tuple(series[("unit", u.id)]) for u in model.units},
        unit_on={u.id: tuple(status[("unit", u.id)]) for u in model.units},
        storage_charge={s.id: tuple(max(-v, 0.0) for v in series[("storage", s.id)])
                        for s in model.storage},
        storage_discharge={s.id: tuple(max(v, 0.0) for v in series[("storage", s.id)])
                           for s in model.storage},
        storage_soc={s.id: tuple(soc[s.id]) for s in model.storage},
        adjustable_power={ld.id: tuple(series[("load", ld.id)])
                          for ld in model.adjustable_loads},
        tie_flow={tie.id: tuple(series[("tie", tie.id)]) for tie in model.ties},
    )


def cost_dict(report: CostReport) -> dict:
    """JSON-ready mirror of CostReport."""
    return {
        "total": report.total,
        "generation": dict(report.generation),
        "startup": report.startup,
        "shutdown": report.shutdown,
        "exchange": report.exchange,
        "hourly": list(report.hourly),
    }


def cost_from_dict(d: dict) -> CostReport:
    return CostReport(d["total"], dict(d["generation"]), d["startup"],
                      d["shutdown"], d["exchange"], tuple(d["hourly"]))
