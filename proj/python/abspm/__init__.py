"""Python bindings for the abspm core library."""

from ._abspm import (
    AbspmError,
    Dfg,
    EventLog,
    InvalidArgument,
    ParseError,
    PreconditionError,
    SimConfig,
    SimResult,
    discover,
    observations,
    render_questions,
    simulate,
    summarize,
)

__all__ = [
    "AbspmError",
    "Dfg",
    "EventLog",
    "InvalidArgument",
    "ParseError",
    "PreconditionError",
    "SimConfig",
    "SimResult",
    "discover",
    "observations",
    "render_questions",
    "simulate",
    "summarize",
]
