"""Wire format, file formats, channel simulator and TCP service."""

from .channel import Capture, ChannelSim, Tap
from .files import load_card, load_kic, save_card, save_kic
from .service import (AuthEndpoint, SessionOutcome, authenticate, client_session,
                      default_policy, parse_addr, serve)
from .wire import DecodeError, FieldOverflow, MsgType, decode_message, encode_message, read_frame

__all__ = [
    "AuthEndpoint", "Capture", "ChannelSim", "DecodeError", "FieldOverflow", "MsgType",
    "SessionOutcome", "Tap", "authenticate", "client_session", "decode_message",
    "default_policy", "encode_message", "load_card", "load_kic", "parse_addr",
    "read_frame", "save_card", "save_kic", "serve",
]
