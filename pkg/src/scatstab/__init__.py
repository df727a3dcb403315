"""Deformation stability of deep convolutional feature extractors on cartoon functions."""

from .cartoon import *  # noqa: F401,F403
from .deform import *  # noqa: F401,F403
from .estimators import ScatteringFeatures, check_signal_array
from .frames import *  # noqa: F401,F403
from .network import *  # noqa: F401,F403
from .signals import *  # noqa: F401,F403
from . import cartoon, deform, frames, network, signals

__version__ = "0.1.0"

__all__ = (
    signals.__all__ + frames.__all__ + network.__all__ + cartoon.__all__ + deform.__all__
    + ["ScatteringFeatures", "check_signal_array"]
)
