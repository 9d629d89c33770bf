"""Two-qubit quantum thermal diode with an anisotropic sz-sx coupling."""
from .errors import (
    ConsistencyError,
    DegenerateAngleError,
    DegenerateSteadyStateError,
    DiodeError,
    InfeasibleSteadyStateError,
    ParseError,
    StepSizeError,
    UndefinedRectificationError,
    UnsupportedConfigurationError,
)
from .liouvillian import Channel, Generator, assemble
from .observables import (
    HeatReport,
    RectificationResult,
    heat_current,
    heat_report,
    rectification,
)
from .operators import DressedFrame, SystemSpec, eigensystem
from .solver import SteadySolution, evolve, gibbs, steady_state
from .spectrum import BathSpec
from .sweep import RunSpec, emit, parse_config, preset, run

__version__ = "0.1.0"
