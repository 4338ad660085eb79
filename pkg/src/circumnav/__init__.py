"""Multi-agent circumnavigation of a moving circle with adaptive target estimation."""

from .geometry import Vec2, bearing, ccw_angle, distances, rot90
from .sim import SimConfig, RunRecord, run, pe_check
from .metrics import summarize, decay_fit
from .config import load_config

__all__ = [
    "Vec2", "bearing", "ccw_angle", "distances", "rot90",
    "SimConfig", "RunRecord", "run", "pe_check",
    "summarize", "decay_fit", "load_config",
]

__version__ = "0.1.0"
