"""Logging, size guardrails and the shared error base"""
from .errors import InternalConsistencyError, ToposError
from .system import SizeLimitError, SizeLimits, check_size, set_logging
