"""Finite Heyting algebras and quantifiers along finite functions"""
from .heyting import (
    BooleanDecision,
    FinPoset,
    HeytingAlgebra,
    InvalidPosetError,
    NotALatticeError,
    NotHeytingError,
    PowersetAlgebra,
    QuantifierTriple,
    TableAlgebra,
    UnknownElementError,
    chain_poset,
    diamond_poset,
    discrete_poset,
    heyting_from_poset,
    implication,
    is_boolean,
    powerset_algebra,
    quantifier_adjoints,
    truth_values,
    verify_heyting_laws,
)
