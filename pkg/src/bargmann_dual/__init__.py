"""Bargmann and conjugate representations of oscillator states."""

from . import bargmann, conjugate, errors, numerics, overlap, propagators, semiclassical, states
from .bargmann import *  # noqa: F401,F403
from .conjugate import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .overlap import *  # noqa: F401,F403
from .propagators import *  # noqa: F401,F403
from .semiclassical import *  # noqa: F401,F403
from .states import *  # noqa: F401,F403

__version__ = "0.1.0"
