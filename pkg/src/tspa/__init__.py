"""Timestamp-based smart-card password authentication: two schemes, four forgeries."""

from .codec import ClockPolicy, ManualClock, OneWayConfig
from .improved import improved_login, improved_verify, recover_x
from .messages import LoginRequestImproved, LoginRequestShen, Reason, Scheme, ServerResponse
from .numtheory import SystemParams, gen_system_params, params_from_primes
from .registration import KIC, CardData, IdPolicy
from .shen import ServerPolicy, shen_login, shen_verify, verify_server_response

__version__ = "0.1.0"
