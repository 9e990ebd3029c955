# ruff: noqa: F401, F403

from importlib.metadata import PackageNotFoundError, version

from . import reports
from .config import *
from .diagnostics import *
from .exceptions import *
from .fieldio import *
from .harness import *
from .initdata import *
from .interface import *
from .matgeo import *
from .profile1d import *
from .reports import *
from .selftest import *
from .solver import *
from .stencils import *

try:
    __version__ = version("mvac")
except PackageNotFoundError:
    __version__ = "0.0.0"
