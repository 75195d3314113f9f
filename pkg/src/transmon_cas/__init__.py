"""Coupler-assisted swap (CAS) interactions in fixed-frequency transmon triplets."""

__version__ = "0.1.0"

from .device import DeviceParams, DriveParams, measured_device  # noqa: E402,F401
from .dynamics import CoherenceParams, PulseShape, measured_coherence  # noqa: E402,F401
from .hilbert import ModeDims  # noqa: E402,F401
