"""Link-level toolkit for short-block control-channel reception.

Reed-Muller encoding (3GPP (32, K) and block RM(1, m)), PUCCH2-style
framing with adjustable DMRS power, SIMO TDL-C / unknown-phase channels,
non-coherent / estimator-correlator / quasi-coherent ML detection, block
fast-Hadamard decoding, and a Monte Carlo BLER harness.
"""
from ._accel import backend
from .errors import CapacityError, ConfigurationError, DimensionError, RangeError, ShortBlockError

__version__ = "0.1.0"

__all__ = [
    "backend",
    "CapacityError",
    "ConfigurationError",
    "DimensionError",
    "RangeError",
    "ShortBlockError",
]
