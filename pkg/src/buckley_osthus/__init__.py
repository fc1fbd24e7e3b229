"""Simulation and analytics for the Buckley-Osthus preferential attachment graph."""

from .analytic import (
    AnalyticTables,
    build_c_table,
    build_p_table,
    build_tables,
    c_of_k,
    expected_degree_count,
    expected_X,
    expected_Y,
    gamma_ratio,
    sum_c_over_l,
)
from .exceptions import (
    BudgetError,
    BuckleyOsthusError,
    ConsistencyError,
    DomainError,
    ParameterError,
    TruncationError,
    UnsupportedError,
)
from .model import (
    ModelParams,
    XiSequence,
    attachment_law_check,
    build_sequence,
    generate,
    materialize,
    sample_xi,
)
from .multigraph import MultiGraph
from .statistics import CountTables, count_tables, degree_histogram, second_degree, second_degrees

__version__ = "0.1.0"

__all__ = [
    "AnalyticTables",
    "BudgetError",
    "BuckleyOsthusError",
    "ConsistencyError",
    "CountTables",
    "DomainError",
    "ModelParams",
    "MultiGraph",
    "ParameterError",
    "TruncationError",
    "UnsupportedError",
    "XiSequence",
    "attachment_law_check",
    "build_c_table",
    "build_p_table",
    "build_sequence",
    "build_tables",
    "c_of_k",
    "count_tables",
    "degree_histogram",
    "expected_X",
    "expected_Y",
    "expected_degree_count",
    "gamma_ratio",
    "generate",
    "materialize",
    "sample_xi",
    "second_degree",
    "second_degrees",
    "sum_c_over_l",
]
