"""Two-way matrix factor model estimation and biclustering for matrix time series."""

from ._mtsb import *  # noqa: F401,F403
from ._mtsb import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
