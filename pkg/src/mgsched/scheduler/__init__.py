"""Day-ahead scheduling: MILP formulation, solve pipeline, cost audit."""

from .formulation import (
    CASE1,
    CASE2,
    CaseFlag,
    CostReport,
    VariableMap,
    build_problem,
    cost_of,
    default_inputs,
    extract_schedule,
    link_network_constraints,
)
from .report import (
    SCHEDULE_FIELDS,
    cost_dict,
    cost_from_dict,
    schedule_from_rows,
    schedule_rows,
)
from .runner import (
    RunResult,
    SchedulerOptions,
    hourly_voltages,
    network_audit,
    run_deterministic,
)

__all__ = [
    "CASE1",
    "CASE2",
    "CaseFlag",
    "CostReport",
    "RunResult",
    "SCHEDULE_FIELDS",
    "SchedulerOptions",
    "VariableMap",
    "build_problem",
    "cost_dict",
    "cost_from_dict",
    "cost_of",
    "default_inputs",
    "extract_schedule",
    "hourly_voltages",
    "link_network_constraints",
    "network_audit",
    "run_deterministic",
    "schedule_from_rows",
    "schedule_rows",
]
