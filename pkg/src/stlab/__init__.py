"""Space-time block codes built from cyclic division algebras."""

from .exactalg import algebra_preset, extension_preset, load_algebra_json
from .stcodes import SignalSet, SpaceTimeCode, code_preset

__all__ = ["algebra_preset", "extension_preset", "load_algebra_json", "SignalSet",
           "SpaceTimeCode", "code_preset"]
__version__ = "0.1.0"
