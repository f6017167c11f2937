from .query import compatible_states, decided, safety, validate_spec
from .sweep import sweep
from .verify import full_report, semantics, verify
