"""Finite categories, copresheaves over them and the geometric morphisms functors induce"""
from .copresheaf import (
    And,
    Atom,
    Bot,
    Copresheaf,
    Implies,
    MalformedFormulaError,
    NatTrans,
    Not,
    NotNaturalError,
    Or,
    Subobject,
    SubobjectAlgebra,
    Top,
    classify,
    comprehension,
    elementary_forcing,
    elementary_safety_forcing,
    eval_formula,
    forces,
    formula_subobject,
    omega,
    sub_heyting_ops,
    subobjects,
    terminal_copresheaf,
    unfolded_safety_forcing,
)
from .fincat import (
    Cosieve,
    CyclicQuiverError,
    DomainMismatchError,
    FinCategory,
    FinFunctor,
    UnknownObjectError,
    category_from_dag,
    comma_category,
    concrete_category,
    cosieves_at,
    functor_to_terminal,
    poset_category,
    total_cosieve,
    validate_category,
    validate_functor,
)
from .geometric import (
    EstimatorOrderError,
    InducedGeometricMorphism,
    InvalidFunctorError,
    NotAGeometricModelError,
    box,
    box_forces,
    check_invariants,
    induce,
    is_surjection,
    point_subobject,
    rel_forces,
    safety_via_box,
    safety_via_rel_forcing,
    transpose,
    verify_semantics,
)
