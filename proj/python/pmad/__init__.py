"""Process-mining-based control-flow anomaly detection."""

from ._pmad import *  # noqa: F401,F403
from ._pmad import __doc__  # noqa: F401
