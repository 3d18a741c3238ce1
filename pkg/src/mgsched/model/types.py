"""Data model for multi-microgrid day-ahead scheduling cases.

Everything is plain frozen dataclasses with tuples for hourly profiles, so
cases hash/compare cleanly and accidental mutation is impossible.  Hour
indexing is 0-based internally; load windows in case files use 1-based
inclusive hours (the way planning tables are usually written) and are
converted on access via ``AdjustableLoad.hours``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace  # noqa: F401  (replace is part of the API)


class CaseError(ValueError):
    """Raised when a case file fails validation; message lists every problem."""


@dataclass(frozen=True)
class Bus:
    id: str
    microgrid: str | None          # None for the upstream-grid bus
    load_share: float = 0.0        # fraction of system load served here
    power_factor: float = 1.0
    zip_weights: tuple[float, float, float] = (0.0, 0.0, 1.0)  # (Z, I, P)
    v_min: float = 0.95
    v_max: float = 1.05


@dataclass(frozen=True)
class Branch:
    from_bus: str
    to_bus: str
    resistance: float              # pu
    reactance: float               # pu
    limit_kva: float = 0.0         # 0 disables the flow limit
    switch_state: str = "closed"   # "closed" | "open"

    @property
    def closed(self) -> bool:
        return self.switch_state == "closed"

    @property
    def admittance(self) -> complex:
        return 1.0 / complex(self.resistance, self.reactance)


@dataclass(frozen=True)
class TieLine:
    """Scheduling-layer exchange corridor between two regions.

    Flow is signed positive from ``region_a`` to ``region_b``.  The importing
    side pays ``price_per_kwh`` on the energy it receives; exports earn
    nothing.  When ``price_is_market`` is set the hourly market price from the
    forecast set is used instead of the stored profile.
    """

    id: str
    region_a: str
    region_b: str
    flow_min_kw: float
    flow_max_kw: float
    price_per_kwh: tuple[float, ...] = ()
    price_is_market: bool = False


@dataclass(frozen=True)
class DerUnit:
    id: str
    bus: str
    microgrid: str
    kind: str                      # "dispatchable" | "wind"
    cost_per_kwh: float = 0.0
    p_min_kw: float = 0.0
    p_max_kw: float = 0.0
    min_up_h: int = 0
    min_down_h: int = 0
    ramp_up_kw: float = 0.0        # per hour; 0 disables the limit
    ramp_down_kw: float = 0.0
    startup_cost: float = 0.0
    shutdown_cost: float = 0.0
    initial_on_h: int = 0          # +hours already on / -hours already off
    initial_power_kw: float = 0.0
    profile_ref: str = ""          # forecast series a nondispatchable unit follows


@dataclass(frozen=True)
class StorageUnit:
    id: str
    bus: str
    microgrid: str
    energy_capacity_kwh: float
    p_charge_min_kw: float         # smallest nonzero charging rate
    p_charge_max_kw: float
    p_discharge_min_kw: float
    p_discharge_max_kw: float
    min_charge_h: int = 0          # shortest charging campaign
    min_discharge_h: int = 0
    round_trip_efficiency: float = 1.0
    initial_soc_kwh: float = 0.0
    final_soc_min_kwh: float = 0.0
    soc_min_kwh: float = 0.0


@dataclass(frozen=True)
class AdjustableLoad:
    """Demand-side resource: shiftable loads choose their hours inside the
    window, curtailable loads run every window hour within a power band.
    Either way the window total must hit ``energy_kwh``."""

    id: str
    bus: str
    microgrid: str
    kind: str                      # "shiftable" | "curtailable"
    p_min_kw: float
    p_max_kw: float
    energy_kwh: float
    window_start_h: int            # 1-based inclusive
    window_end_h: int
    min_on_h: int = 1              # shortest serving streak while running

    def hours(self) -> range:
        return range(self.window_start_h - 1, self.window_end_h)


@dataclass(frozen=True)
class ForecastSet:
    peak_load_kw: float
    load_shape: tuple[float, ...]               # per-hour fraction of peak
    wind_shapes: dict[str, tuple[float, ...]]   # named series, fraction of nameplate
    price_shape: tuple[float, ...]              # $/kWh market price


@dataclass(frozen=True)
class CaseSettings:
    horizon: int = 24
    base_mva: float = 1.0
    v_norm: float = 1.0               # voltage magnitude the linearization is anchored at
    imag_cap: float = 0.25            # bound on |Im V| keeping the flat-voltage model valid
    slack_bus: str = ""
    slack_voltage: float = 1.0


@dataclass(frozen=True)
class GridModel:
    name: str
    regions: tuple[str, ...]          # microgrid ids; the upstream grid is "main"
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    ties: tuple[TieLine, ...]
    units: tuple[DerUnit, ...]
    storage: tuple[StorageUnit, ...]
    adjustable_loads: tuple[AdjustableLoad, ...]
    forecasts: ForecastSet
    settings: CaseSettings

    def bus(self, bus_id: str) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def region_buses(self, region: str) -> list[Bus]:
        return [b for b in self.buses if b.microgrid == region]

    def wind_units(self) -> list[DerUnit]:
        return [u for u in self.units if u.kind == "wind"]

    def dispatchable_units(self) -> list[DerUnit]:
        return [u for u in self.units if u.kind == "dispatchable"]


@dataclass(frozen=True)
class RealizedInputs:
    """Hourly series the optimizer actually sees (forecast x scenario factors)."""

    load_kw: tuple[float, ...]                     # system total
    wind_kw: dict[str, tuple[float, ...]]          # available power per wind unit
    price: tuple[float, ...]                       # market energy price $/kWh

    def bus_load_kw(self, bus: Bus, t: int) -> float:
        return bus.load_share * self.load_kw[t]

    def tie_price(self, tie: TieLine, t: int) -> float:
        if tie.price_is_market:
            return self.price[t]
        return tie.price_per_kwh[t]


@dataclass(frozen=True)
class Schedule:
    """Committed day-ahead plan, all in kW / kWh at the grid side."""

    horizon: int
    unit_power: dict[str, tuple[float, ...]]
    unit_on: dict[str, tuple[int, ...]]
    storage_charge: dict[str, tuple[float, ...]]
    storage_discharge: dict[str, tuple[float, ...]]
    storage_soc: dict[str, tuple[float, ...]]
    adjustable_power: dict[str, tuple[float, ...]]
    tie_flow: dict[str, tuple[float, ...]]
