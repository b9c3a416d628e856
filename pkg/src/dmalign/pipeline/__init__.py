from .config import AblationFlags, EditConfig, load_config_file
from .runner import EditEngine, EditRun, EmptyGroundingProvider
from .sessions import SessionStore

__all__ = [
    "AblationFlags",
    "EditConfig",
    "EditEngine",
    "EditRun",
    "EmptyGroundingProvider",
    "SessionStore",
    "load_config_file",
]
