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
    Schedule,
    StorageUnit,
    TieLine,
)
from .case_io import load_case, save_case, scale_forecasts, bundled_case_path
from .admittance import AdmittanceBlocks, build_admittance
from .validation import validate_schedule

__all__ = [
    "AdjustableLoad", "AdmittanceBlocks", "Branch", "Bus", "CaseError",
    "CaseSettings", "DerUnit", "ForecastSet", "GridModel", "RealizedInputs",
    "Schedule", "StorageUnit", "TieLine", "build_admittance",
    "bundled_case_path", "load_case", "save_case", "scale_forecasts",
    "validate_schedule",
]
