"""Parity-switching rates, jump-trace simulation, and inference for a
gap-asymmetric transmon.

All energies are stored as frequencies (value/h) in GHz; temperatures are in
kelvin and converted at use sites; rates are in 1/s.
"""

from qpscope.device_model import DeviceParams, EnvConditions, measured_device, validate
from qpscope.tunneling_rates import RateBundle, effective_rate, rate_bundle, state_rate

__all__ = [
    "DeviceParams",
    "EnvConditions",
    "RateBundle",
    "effective_rate",
    "measured_device",
    "rate_bundle",
    "state_rate",
    "validate",
    "__version__",
]

__version__ = "0.1.0"
