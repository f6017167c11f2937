"""
The geometric morphism induced by a functor F: C -> D between finite categories.

The direct image of Omega_C at d is the set of compatible families of cosieves indexed by
the comma category of d over F. A family is stored as a tuple ordered like the comma
category's objects.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Tuple

from ..helpers.errors import InternalConsistencyError, ToposError
from ..helpers.system import SizeLimitError, SizeLimits
from ..reports import CheckKind, Report, Tally, skipped
from .copresheaf import (
    Copresheaf,
    NatTrans,
    Subobject,
    classify,
    omega,
    terminal_copresheaf,
)
from .fincat import (
    CommaCategory,
    Cosieve,
    FinCategory,
    FinFunctor,
    comma_category,
    cosieve_transition,
    cosieves_at,
    accessible_from,
    full_subcategory,
    total_cosieve,
    validate_functor,
)

if TYPE_CHECKING:
    from ..protocol.protocol import Protocol

LOGGER = logging.getLogger(__name__)

Family = Tuple[Cosieve, ...]


class InvalidFunctorError(ToposError):
    pass


class NotAGeometricModelError(ToposError):
    pass


class EstimatorOrderError(ToposError):
    pass


@dataclass
class SurjectionDecision:
    is_surjection: bool
    witness: Optional[str] = None


class InducedGeometricMorphism:
    """
    Inverse image, direct image of Omega, frame inclusion i, classifier tau and box = i tau.

    Parameters
    ----------
    functor : FinFunctor
        F: C -> D, validated on construction
    limits : SizeLimits
        bounds for cosieve and family enumeration
    verify : bool
        run check_invariants and raise InternalConsistencyError on any failure
    """

    def __init__(self, functor: FinFunctor, limits: Optional[SizeLimits] = None, verify: bool = True) -> None:
        validation = validate_functor(functor)
        if not validation.passed:
            failed = next(r for r in validation.results if r.failed)
            raise InvalidFunctorError(f"{functor.name or 'functor'} fails {failed.name}", witness=failed.witness)
        self.functor = functor
        self.source: FinCategory = functor.source
        self.target: FinCategory = functor.target
        self.limits = limits or SizeLimits.from_env()
        self.omega_source = omega(self.source, self.limits)
        self.omega_target = omega(self.target, self.limits)
        self.comma: Dict[str, CommaCategory] = {d: comma_category(d, functor) for d in self.target.objects}
        self._slot: Dict[str, Dict[str, int]] = {
            d: {key: i for i, key in enumerate(comma.category.objects)} for d, comma in self.comma.items()
        }
        self._local: Dict[str, "InducedGeometricMorphism"] = {}
        self.omega_star = self._direct_image()
        self.i = self._inclusion()
        self.tau = self._classifier()
        self._box: Dict[str, Dict[Family, Family]] = {
            d: {phi: self.i(d, self.tau(d, phi)) for phi in self.omega_star.values[d]} for d in self.target.objects
        }
        LOGGER.debug(
            "Induced %s: |Omega_*| = %s",
            functor.name,
            {d: len(v) for d, v in self.omega_star.values.items()},
        )
        if verify:
            invariants = check_invariants(self)
            if not invariants.passed:
                failed = next(r for r in invariants.results if r.failed)
                raise InternalConsistencyError(f"Induced morphism violates {failed.name} at {failed.witness}")

    def legs(self, d: str) -> List[Tuple[str, str]]:
        comma = self.comma[d]
        return [comma.legs[key] for key in comma.category.objects]

    def top_family(self, d: str) -> Family:
        return tuple(total_cosieve(self.source, c) for _, c in self.legs(d))

    def bottom_family(self, d: str) -> Family:
        return tuple(Cosieve(c, frozenset()) for _, c in self.legs(d))

    def _families(self, d: str) -> Tuple[Family, ...]:
        """Compatible families over comma(d, F), by backtracking with forced propagation."""
        comma = self.comma[d]
        keys = comma.category.objects
        slot = self._slot[d]
        arrows = comma.category.arrows
        # each constraint is checked once both ends are assigned
        incoming: List[List[str]] = [[] for _ in keys]
        for name, arrow in arrows.items():
            if name != comma.category.identity[arrow.dom]:
                incoming[max(slot[arrow.dom], slot[arrow.cod])].append(name)
        budget = [self.limits.max_family_candidates]
        found: List[Family] = []
        current: List[Cosieve] = []

        def consistent(index: int) -> bool:
            for name in incoming[index]:
                arrow = arrows[name]
                h = comma.projection.arr_map[name]
                moved = cosieve_transition(self.source, current[slot[arrow.dom]], h)
                if moved != current[slot[arrow.cod]]:
                    return False
            return True

        def extend(index: int) -> None:
            if index == len(keys):
                found.append(tuple(current))
                return
            c = comma.legs[keys[index]][1]
            forced = [
                cosieve_transition(self.source, current[slot[arrows[n].dom]], comma.projection.arr_map[n])
                for n in incoming[index]
                if slot[arrows[n].cod] == index and slot[arrows[n].dom] < index
            ]
            candidates = forced[:1] if forced else cosieves_at(self.source, c, self.limits)
            for candidate in candidates:
                budget[0] -= 1
                if budget[0] < 0:
                    raise SizeLimitError(
                        f"Family enumeration at {d} exceeds {self.limits.max_family_candidates} candidates",
                        witness=d,
                    )
                current.append(candidate)
                if consistent(index):
                    extend(index + 1)
                current.pop()

        extend(0)
        return tuple(found)

    def act(self, k: str, family: Family) -> Family:
        """k: d -> d' moves a family at d to the family at d' read off at (g' after k, c)."""
        d, d2 = self.target.dom(k), self.target.cod(k)
        slot = self._slot[d]
        return tuple(family[slot[f"{self.target.compose(g, k)}|{c}"]] for g, c in self.legs(d2))

    def _direct_image(self) -> Copresheaf:
        values = {d: self._families(d) for d in self.target.objects}
        action = {
            (k, phi): self.act(k, phi)
            for d in self.target.objects
            for phi in values[d]
            for k in self.target.out_arrows(d)
        }
        return Copresheaf(self.target, values, action, name="Omega_*")

    def include(self, d: str, cosieve: Cosieve) -> Family:
        """Component at (g, c): the arrows h out of c with F(h) after g in the cosieve."""
        target, functor = self.target, self.functor
        return tuple(
            Cosieve(
                c,
                frozenset(
                    h for h in self.source.out_arrows(c) if target.compose(functor.arr_map[h], g) in cosieve.arrows
                ),
            )
            for g, c in self.legs(d)
        )

    def classify_family(self, d: str, family: Family) -> Cosieve:
        """Arrows k out of d that move the family to the top family."""
        target = self.target
        return Cosieve(
            d,
            frozenset(k for k in target.out_arrows(d) if self.act(k, family) == self.top_family(target.cod(k))),
        )

    def _inclusion(self) -> NatTrans:
        return NatTrans(
            self.omega_target,
            self.omega_star,
            {d: {r: self.include(d, r) for r in self.omega_target.values[d]} for d in self.target.objects},
            name="i",
        )

    def _classifier(self) -> NatTrans:
        return NatTrans(
            self.omega_star,
            self.omega_target,
            {d: {phi: self.classify_family(d, phi) for phi in self.omega_star.values[d]} for d in self.target.objects},
            name="tau",
        )

    def box_family(self, d: str, family: Family) -> Family:
        return self._box[d][family]

    def counit(self, c: str, family: Family) -> Cosieve:
        """Project a family at F(c) to its (id, c) component."""
        fc = self.functor.obj_map[c]
        return family[self._slot[fc][f"{self.target.identity[fc]}|{c}"]]

    def inverse_image(self, copresheaf: Copresheaf) -> Copresheaf:
        """F*X = X after F."""
        functor = self.functor
        values = {c: copresheaf.values[functor.obj_map[c]] for c in self.source.objects}
        action = {
            (f, x): copresheaf.act(functor.arr_map[f], x)
            for c in self.source.objects
            for x in values[c]
            for f in self.source.out_arrows(c)
        }
        return Copresheaf(self.source, values, action, name=f"F*{copresheaf.name}")

    def global_family(self, chi: NatTrans) -> NatTrans:
        """The global element of Omega_* whose (g, c) components are chi at c, for chi: 1 -> Omega_C."""
        one = terminal_copresheaf(self.target)
        return NatTrans(
            one,
            self.omega_star,
            {d: {"*": tuple(chi(c, "*") for _, c in self.legs(d))} for d in self.target.objects},
            name="lift",
        ).check_natural()

    def global_elements(self) -> Tuple[NatTrans, ...]:
        """Every natural 1 -> Omega_*, one family per object of D."""
        target = self.target
        objects = target.objects
        one = terminal_copresheaf(target)
        found: List[Dict[str, Family]] = []
        chosen: Dict[str, Family] = {}

        def extend(index: int) -> None:
            if index == len(objects):
                found.append(dict(chosen))
                return
            d = objects[index]
            for family in self.omega_star.values[d]:
                chosen[d] = family
                ok = True
                for k in target.arrows.values():
                    if k.dom in chosen and k.cod in chosen and (k.dom == d or k.cod == d):
                        if self.act(k.name, chosen[k.dom]) != chosen[k.cod]:
                            ok = False
                            break
                if ok:
                    extend(index + 1)
                del chosen[d]

        extend(0)
        return tuple(
            NatTrans(one, self.omega_star, {d: {"*": u[d]} for d in objects}, name=f"u{n}") for n, u in enumerate(found)
        )

    def local(self, c: str) -> "InducedGeometricMorphism":
        """The morphism induced by F restricted to the objects accessible from c."""
        if c not in self._local:
            sub, inclusion = full_subcategory(self.source, accessible_from(self.source, c))
            restricted = FinFunctor(
                sub,
                self.target,
                {x: self.functor.obj_map[x] for x in sub.objects},
                {f: self.functor.arr_map[f] for f in sub.arrows},
                name=f"{self.functor.name}|{c}",
            )
            self._local[c] = InducedGeometricMorphism(restricted, self.limits, verify=False)
        return self._local[c]

    def restrict(self, d: str, family: Family, local: "InducedGeometricMorphism") -> Family:
        """Drop the components indexed by objects outside the local morphism's source."""
        slot = self._slot[d]
        return tuple(family[slot[key]] for key in local.comma[d].category.objects)


def induce(functor: FinFunctor, limits: Optional[SizeLimits] = None) -> InducedGeometricMorphism:
    return InducedGeometricMorphism(functor, limits)


def _families_leq(a: Family, b: Family) -> bool:
    return all(x.arrows <= y.arrows for x, y in zip(a, b))


def _meet(a: Family, b: Family) -> Family:
    return tuple(Cosieve(x.base, x.arrows & y.arrows) for x, y in zip(a, b))


def _join(a: Family, b: Family) -> Family:
    return tuple(Cosieve(x.base, x.arrows | y.arrows) for x, y in zip(a, b))


def is_surjection(morphism: InducedGeometricMorphism) -> SurjectionDecision:
    """
    Every object of D is a retract of an object F(c). Cross-checked against injectivity of i.

    Raises
    ------
    InternalConsistencyError
        the retract test and the injectivity test disagree
    """
    target, functor = morphism.target, morphism.functor
    retract_witness = None
    for d in target.objects:
        found = any(
            target.compose(r, s) == target.identity[d]
            for c in morphism.source.objects
            for s in target.hom(d, functor.obj_map[c])
            for r in target.hom(functor.obj_map[c], d)
        )
        if not found:
            retract_witness = d
            break
    injective_witness = None
    for d in target.objects:
        images = [morphism.i(d, r) for r in morphism.omega_target.values[d]]
        if len(set(images)) != len(images):
            injective_witness = d
            break
    if (retract_witness is None) != (injective_witness is None):
        raise InternalConsistencyError(
            f"Retract test ({retract_witness}) and injectivity of i ({injective_witness}) disagree"
        )
    return SurjectionDecision(retract_witness is None, retract_witness)


def transpose(morphism: InducedGeometricMorphism, proposition: NatTrans) -> NatTrans:
    """The proposition F*X -> Omega_C: counit after the inverse image of proposition."""
    proposition.check_natural()
    pulled = morphism.inverse_image(proposition.source)
    functor = morphism.functor
    return NatTrans(
        pulled,
        morphism.omega_source,
        {
            c: {x: morphism.counit(c, proposition(functor.obj_map[c], x)) for x in pulled.values[c]}
            for c in morphism.source.objects
        },
        name=f"transpose({proposition.name})",
    )


def box(morphism: InducedGeometricMorphism, proposition: NatTrans) -> NatTrans:
    proposition.check_natural()
    return NatTrans(
        proposition.source,
        morphism.omega_star,
        {
            d: {x: morphism.box_family(d, phi) for x, phi in component.items()}
            for d, component in proposition.components.items()
        },
        name=f"box({proposition.name})",
    )


def rel_forces(morphism: InducedGeometricMorphism, c: str, proposition: NatTrans, x) -> bool:
    """c forces proposition(x) relative to F: the transpose is total at (c, x)."""
    fc = morphism.functor.on_object(c)
    proposition.source.check_element(fc, x)
    return morphism.counit(c, proposition(fc, x)) == total_cosieve(morphism.source, c)


def box_forces(morphism: InducedGeometricMorphism, c: str, proposition: NatTrans, x) -> bool:
    """c forces box proposition(x), with box computed over the states accessible from c."""
    fc = morphism.functor.on_object(c)
    proposition.source.check_element(fc, x)
    local = morphism.local(c)
    family = morphism.restrict(fc, proposition(fc, x), local)
    return local.counit(c, local.box_family(fc, family)) == total_cosieve(morphism.source, c)


def _forced_in_all_futures(morphism: InducedGeometricMorphism, c: str, proposition: NatTrans, x) -> bool:
    source, functor = morphism.source, morphism.functor
    return all(
        rel_forces(morphism, source.cod(f), proposition, proposition.source.act(functor.arr_map[f], x))
        for f in source.out_arrows(c)
    )


def check_invariants(morphism: InducedGeometricMorphism) -> Report:
    """Naturality, frame laws of i, the adjunction i -| tau and the box laws, exhaustively."""
    report = Report(command=f"invariants {morphism.functor.name}".strip())
    report.extend(morphism.omega_star.validate().results, prefix="direct_image")
    target, source = morphism.target, morphism.source
    compatible = Tally("families_compatible")
    for d, comma in morphism.comma.items():
        slot = morphism._slot[d]
        for phi in morphism.omega_star.values[d]:
            for name, arrow in comma.category.arrows.items():
                h = comma.projection.arr_map[name]
                compatible.observe(
                    cosieve_transition(source, phi[slot[arrow.dom]], h) == phi[slot[arrow.cod]], (d, name)
                )
    report.add(compatible.result())

    natural = Tally("i_and_tau_natural")
    natural.observe(morphism.i.naturality_failure() is None, "i")
    natural.observe(morphism.tau.naturality_failure() is None, "tau")
    report.add(natural.result())

    frame = Tally("i_frame_morphism")
    adjunction = Tally("i_left_adjoint_to_tau")
    unit = Tally("unit_below_tau_i")
    retraction = Tally("tau_after_i_identity")
    for d in target.objects:
        cosieves = morphism.omega_target.values[d]
        families = morphism.omega_star.values[d]
        frame.observe(morphism.i(d, total_cosieve(target, d)) == morphism.top_family(d), (d, "top"))
        frame.observe(morphism.i(d, Cosieve(d, frozenset())) == morphism.bottom_family(d), (d, "bottom"))
        for r in cosieves:
            ir = morphism.i(d, r)
            back = morphism.tau(d, ir)
            unit.observe(r.arrows <= back.arrows, (d, r))
            retraction.observe(back == r, (d, r))
            for s in cosieves:
                both = Cosieve(d, r.arrows & s.arrows)
                either = Cosieve(d, r.arrows | s.arrows)
                frame.observe(morphism.i(d, both) == _meet(ir, morphism.i(d, s)), (d, r, s, "meet"))
                frame.observe(morphism.i(d, either) == _join(ir, morphism.i(d, s)), (d, r, s, "join"))
            for phi in families:
                adjunction.observe(_families_leq(ir, phi) == (r.arrows <= morphism.tau(d, phi).arrows), (d, r))
    report.add(frame.result())
    report.add(adjunction.result())
    report.add(unit.result())
    if is_surjection(morphism).is_surjection:
        report.add(retraction.result())
    else:
        report.add(skipped("tau_after_i_identity", "i is not monic", kind=CheckKind.VALIDATION))

    deflationary = Tally("box_deflationary")
    idempotent = Tally("box_idempotent")
    meets = Tally("box_preserves_meets")
    for d in target.objects:
        families = morphism.omega_star.values[d]
        deflationary.observe(morphism.box_family(d, morphism.top_family(d)) == morphism.top_family(d), (d, "top"))
        for phi in families:
            boxed = morphism.box_family(d, phi)
            deflationary.observe(_families_leq(boxed, phi), (d, phi))
            idempotent.observe(morphism.box_family(d, boxed) == boxed, (d, phi))
            for psi in families:
                meets.observe(
                    morphism.box_family(d, _meet(phi, psi)) == _meet(boxed, morphism.box_family(d, psi)),
                    (d, phi, psi),
                )
    for tally in (deflationary, idempotent, meets):
        report.add(tally.result())
    return report


def _propositions_on_direct_image(morphism: InducedGeometricMorphism) -> List[NatTrans]:
    """Identity, box, the constants at every global element, and meets and joins with those."""
    star = morphism.omega_star
    objects = morphism.target.objects

    def pointwise(name: str, fn) -> NatTrans:
        return NatTrans(star, star, {d: {phi: fn(d, phi) for phi in star.values[d]} for d in objects}, name=name)

    constants = [("top", lambda d: morphism.top_family(d)), ("bottom", lambda d: morphism.bottom_family(d))]
    for u in morphism.global_elements():
        constants.append((u.name, lambda d, u=u: u(d, "*")))
    props = [
        pointwise("identity", lambda d, phi: phi),
        pointwise("box", morphism.box_family),
    ]
    for name, value in constants:
        props.append(pointwise(f"const[{name}]", lambda d, phi, value=value: value(d)))
        props.append(pointwise(f"identity&{name}", lambda d, phi, value=value: _meet(phi, value(d))))
        props.append(pointwise(f"identity|{name}", lambda d, phi, value=value: _join(phi, value(d))))
    return props


def verify_semantics(morphism: InducedGeometricMorphism) -> Report:
    """
    Check relative forcing against its unfolding over futures, for X = 1 and X = Omega_*.

    The box clause uses the modality local to each stage and runs on surjections with
    thin target. The soundness direction of the global box is checked everywhere.
    """
    report = Report(command=f"semantics {morphism.functor.name}".strip())
    surjective = is_surjection(morphism).is_surjection
    box_applies = surjective and morphism.target.is_thin
    one = terminal_copresheaf(morphism.target)
    globals_ = morphism.global_elements()
    cases: List[Tuple[Copresheaf, NatTrans]] = [(one, u) for u in globals_]
    cases += [(morphism.omega_star, phi) for phi in _propositions_on_direct_image(morphism)]

    futures = Tally("forcing_equals_forcing_in_all_futures", CheckKind.THEOREM)
    local_box = Tally("box_forcing_equals_forcing_in_all_futures", CheckKind.THEOREM)
    global_box = Tally("global_box_forcing_sound", CheckKind.THEOREM)
    functor = morphism.functor
    for domain, proposition in cases:
        boxed = box(morphism, proposition)
        for c in morphism.source.objects:
            for x in domain.values[functor.obj_map[c]]:
                everywhere = _forced_in_all_futures(morphism, c, proposition, x)
                witness = {"proposition": proposition.name, "stage": c, "element": x}
                futures.observe(rel_forces(morphism, c, proposition, x) == everywhere, witness)
                global_box.observe(not rel_forces(morphism, c, boxed, x) or everywhere, witness)
                if box_applies:
                    local_box.observe(box_forces(morphism, c, proposition, x) == everywhere, witness)
    report.add(futures.result(detail=f"{len(cases)} propositions"))
    if box_applies:
        report.add(local_box.result())
    else:
        reason = "not a geometric model" if not surjective else "target category is not thin"
        report.add(skipped(local_box.name, reason))
    report.add(global_box.result())

    if surjective:
        transposes = Tally("transpose_of_box_true_iff_transpose_true", CheckKind.THEOREM)
        for u in globals_:
            plain = _transpose_is_true(morphism, u)
            boxed = _transpose_is_true(morphism, box(morphism, u))
            transposes.observe(plain == boxed, u.name)
        report.add(transposes.result(detail=f"{len(globals_)} global elements"))
    else:
        report.add(skipped("transpose_of_box_true_iff_transpose_true", "not a geometric model"))
    return report


def _transpose_is_true(morphism: InducedGeometricMorphism, proposition: NatTrans) -> bool:
    flat = transpose(morphism, proposition)
    return all(
        flat(c, x) == total_cosieve(morphism.source, c) for c in morphism.source.objects for x in flat.source.values[c]
    )


@dataclass(eq=False)
class PointSubobject:
    """The subobject of 1 over PC picked out by a proposition, its classifier, and i after it."""

    selection: Subobject
    chi: NatTrans
    included: NatTrans


def estimator_morphism(protocol: "Protocol") -> InducedGeometricMorphism:
    if "geometric" not in protocol._cache:
        protocol._cache["geometric"] = InducedGeometricMorphism(protocol.estimator_functor(), protocol.limits)
    return protocol._cache["geometric"]


def point_subobject(protocol: "Protocol", proposition: Iterable[str]) -> PointSubobject:
    """
    Support of the representable PC(p, -) as a subobject of 1.

    Under inclusion order S is selected when p <= S, under refinement when S <= p.

    Raises
    ------
    RequiresFunctorialEstimatorError
        the protocol's estimator is not a functor into PC
    """
    morphism = estimator_morphism(protocol)
    p = protocol.check_proposition(proposition)
    pc = protocol.pc_category()
    one = terminal_copresheaf(pc)
    selection = Subobject(
        one,
        {
            protocol.label(s): frozenset({"*"}) if protocol.precedes(p, s) else frozenset()
            for s in protocol.propositions()
        },
    )
    chi = classify(selection)
    included = morphism.i.after(chi)
    included.name = f"i.chi[{protocol.label(p)}]"
    return PointSubobject(selection, chi, included)


def require_geometric_model(protocol: "Protocol") -> InducedGeometricMorphism:
    """
    The induced morphism of a protocol whose estimator makes it a geometric model.

    Raises
    ------
    NotAGeometricModelError
        some proposition is not a retract of an estimate, with that proposition as witness
    RequiresFunctorialEstimatorError
        the estimator is not a functor
    EstimatorOrderError
        PC is ordered by inclusion, where safety is not a point subobject
    """
    image = {protocol.label(e) for e in protocol.estimates.values()}
    missing = [protocol.label(p) for p in protocol.propositions() if protocol.label(p) not in image]
    if missing:
        raise NotAGeometricModelError(
            f"Estimator image misses {missing[0]}; it is not a retract of any estimate", witness=missing[0]
        )
    morphism = estimator_morphism(protocol)
    if protocol.order.value != "refinement":
        raise EstimatorOrderError("Safety is expressible by relative forcing only for refinement ordered estimates")
    decision = is_surjection(morphism)
    if not decision.is_surjection:
        raise NotAGeometricModelError(f"{decision.witness} is not a retract of an estimate", witness=decision.witness)
    return morphism


def safety_via_rel_forcing(protocol: "Protocol", proposition: Iterable[str], state: str) -> bool:
    morphism = require_geometric_model(protocol)
    point = point_subobject(protocol, proposition)
    return rel_forces(morphism, protocol.check_state(state), point.included, "*")


def safety_via_box(protocol: "Protocol", proposition: Iterable[str], state: str) -> bool:
    morphism = require_geometric_model(protocol)
    point = point_subobject(protocol, proposition)
    return rel_forces(morphism, protocol.check_state(state), box(morphism, point.included), "*")

