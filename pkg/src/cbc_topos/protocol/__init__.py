"""Estimate consensus protocols, decided properties and their spec files"""
from .decided import NotMonotoneError, StateProperty, decided_forcing, decided_modal, is_decided
from .protocol import (
    EstimateOrder,
    Protocol,
    RequiresFunctorialEstimatorError,
    UnknownPropositionError,
    UnknownStateError,
    check_consistency_lemmas,
    check_safety_theorem,
    check_upward_closure,
    compatible,
    is_safe,
    protocol_from_dag,
    validate_protocol,
)
from .spec_file import ProtocolSpec, SpecParseError, UnresolvedReferenceError, parse_spec, serialize_spec
