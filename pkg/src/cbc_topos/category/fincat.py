"""Finite categories, functors, cosieves and comma categories"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..helpers.errors import ToposError
from ..helpers.system import SizeLimits, check_size
from ..logic.heyting import FinPoset
from ..reports import Report, Tally

LOGGER = logging.getLogger(__name__)


class UnknownObjectError(ToposError):
    pass


class UnknownArrowError(UnknownObjectError):
    pass


class DomainMismatchError(ToposError):
    pass


class CyclicQuiverError(ToposError):
    pass


class CompositionUndefinedError(ToposError):
    pass


@dataclass(frozen=True)
class Arrow:
    name: str
    dom: str
    cod: str


@dataclass(eq=False)
class FinCategory:
    """
    Finite category given by explicit data.

    composition maps (g, f) to the name of g after f and is only consulted for pairs
    with cod(f) == dom(g). Malformed tables are representable so that
    validate_category can report on them.
    """

    objects: Tuple[str, ...]
    arrows: Dict[str, Arrow]
    identity: Dict[str, str]
    composition: Dict[Tuple[str, str], str]
    name: str = ""
    _cache: Dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(
        cls,
        objects: Sequence[str],
        arrows: Iterable[Tuple[str, str, str]],
        compose: Iterable[Tuple[str, str, str]] = (),
        name: str = "",
    ) -> "FinCategory":
        """
        Category from non-identity arrows (name, dom, cod) and composites (g, f, g_after_f).

        Identities named id_<object> and their composites are added automatically.
        """
        objects = tuple(objects)
        table: Dict[str, Arrow] = {}
        identity: Dict[str, str] = {}
        for obj in objects:
            ident = f"id_{obj}"
            table[ident] = Arrow(ident, obj, obj)
            identity[obj] = ident
        for arrow_name, dom, cod in arrows:
            table[arrow_name] = Arrow(arrow_name, dom, cod)
        composition: Dict[Tuple[str, str], str] = {}
        for arrow in table.values():
            if arrow.cod in identity:
                composition[(identity[arrow.cod], arrow.name)] = arrow.name
            if arrow.dom in identity:
                composition[(arrow.name, identity[arrow.dom])] = arrow.name
        for g, f, gf in compose:
            composition[(g, f)] = gf
        return cls(objects, table, identity, composition, name=name)

    def check_object(self, obj: str) -> str:
        if obj not in self.identity:
            raise UnknownObjectError(f"Unknown object {obj!r} in category {self.name or '<anonymous>'}", witness=obj)
        return obj

    def arrow(self, name: str) -> Arrow:
        try:
            return self.arrows[name]
        except KeyError as e:
            raise UnknownArrowError(f"Unknown arrow {name!r}", witness=name) from e

    def dom(self, name: str) -> str:
        return self.arrow(name).dom

    def cod(self, name: str) -> str:
        return self.arrow(name).cod

    def compose(self, g: str, f: str) -> str:
        """g after f"""
        if self.cod(f) != self.dom(g):
            raise DomainMismatchError(f"Cannot compose {g} after {f}: cod({f}) != dom({g})", witness=(g, f))
        try:
            return self.composition[(g, f)]
        except KeyError as e:
            raise CompositionUndefinedError(f"No composite recorded for {g} after {f}", witness=(g, f)) from e

    def _index(self) -> Tuple[Dict[str, Tuple[str, ...]], Dict[Tuple[str, str], Tuple[str, ...]]]:
        if "out" not in self._cache:
            out: Dict[str, List[str]] = {obj: [] for obj in self.objects}
            hom: Dict[Tuple[str, str], List[str]] = {}
            for arrow in self.arrows.values():
                out.setdefault(arrow.dom, []).append(arrow.name)
                hom.setdefault((arrow.dom, arrow.cod), []).append(arrow.name)
            self._cache["out"] = {k: tuple(v) for k, v in out.items()}
            self._cache["hom"] = {k: tuple(v) for k, v in hom.items()}
        return self._cache["out"], self._cache["hom"]

    def out_arrows(self, obj: str) -> Tuple[str, ...]:
        self.check_object(obj)
        return self._index()[0][obj]

    def hom(self, source: str, target: str) -> Tuple[str, ...]:
        self.check_object(source)
        self.check_object(target)
        return self._index()[1].get((source, target), ())

    def reachable(self, obj: str) -> Tuple[str, ...]:
        """Objects with an arrow from obj, in object order."""
        targets = {self.cod(f) for f in self.out_arrows(obj)}
        return tuple(x for x in self.objects if x in targets)

    @property
    def is_thin(self) -> bool:
        return all(len(arrows) <= 1 for arrows in self._index()[1].values())

    def __repr__(self) -> str:
        return f"FinCategory({self.name or '<anonymous>'}: {len(self.objects)} objects, {len(self.arrows)} arrows)"


@dataclass(eq=False)
class FinFunctor:
    source: FinCategory
    target: FinCategory
    obj_map: Dict[str, str]
    arr_map: Dict[str, str]
    name: str = ""
    _cache: Dict = field(default_factory=dict, repr=False)

    def on_object(self, obj: str) -> str:
        self.source.check_object(obj)
        return self.obj_map[obj]

    def on_arrow(self, arrow: str) -> str:
        self.source.arrow(arrow)
        return self.arr_map[arrow]


def identity_functor(category: FinCategory) -> FinFunctor:
    return FinFunctor(
        category,
        category,
        {x: x for x in category.objects},
        {f: f for f in category.arrows},
        name=f"id[{category.name}]",
    )


def validate_category(category: FinCategory) -> Report:
    """Check typing, totality, identity laws and associativity of the composition table."""
    report = Report(command=f"validate-category {category.name}".strip())
    endpoints = Tally("arrow_endpoints")
    identities = Tally("identities")
    typed = Tally("composition_typed")
    total = Tally("composition_total")
    unit = Tally("identity_laws")
    assoc = Tally("associativity")

    known = set(category.objects)
    for arrow in category.arrows.values():
        endpoints.observe(arrow.dom in known and arrow.cod in known, arrow.name)
    for obj in category.objects:
        ident = category.identity.get(obj)
        arrow = category.arrows.get(ident) if ident else None
        identities.observe(arrow is not None and arrow.dom == obj and arrow.cod == obj, obj)

    arrows = list(category.arrows.values())
    composable = [(g, f) for f in arrows for g in arrows if f.cod == g.dom]
    for g, f in composable:
        gf = category.composition.get((g.name, f.name))
        if not total.observe(gf is not None, (g.name, f.name)):
            continue
        result = category.arrows.get(gf)
        typed.observe(result is not None and result.dom == f.dom and result.cod == g.cod, (g.name, f.name))

    for f in arrows:
        id_dom = category.identity.get(f.dom)
        id_cod = category.identity.get(f.cod)
        if id_dom is None or id_cod is None:
            continue
        left = category.composition.get((id_cod, f.name))
        right = category.composition.get((f.name, id_dom))
        unit.observe(left == f.name and right == f.name, f.name)

    for g, f in composable:
        gf = category.composition.get((g.name, f.name))
        for h in arrows:
            if h.dom != g.cod:
                continue
            hg = category.composition.get((h.name, g.name))
            if gf is None or hg is None:
                continue
            lhs = category.composition.get((h.name, gf))
            rhs = category.composition.get((hg, f.name))
            assoc.observe(lhs is not None and lhs == rhs, (h.name, g.name, f.name))

    for tally in (endpoints, identities, total, typed, unit, assoc):
        report.add(tally.result())
    return report


def validate_functor(functor: FinFunctor) -> Report:
    """Check that the functor is total and preserves endpoints, identities and composition."""
    source, target = functor.source, functor.target
    report = Report(command=f"validate-functor {functor.name}".strip())
    total = Tally("total")
    endpoints = Tally("preserves_endpoints")
    identities = Tally("preserves_identities")
    composition = Tally("preserves_composition")

    for obj in source.objects:
        total.observe(functor.obj_map.get(obj) in target.identity, obj)
    for name in source.arrows:
        total.observe(functor.arr_map.get(name) in target.arrows, name)
    if total.violations:
        report.add(total.result())
        return report

    for name, arrow in source.arrows.items():
        image = target.arrows[functor.arr_map[name]]
        endpoints.observe(
            image.dom == functor.obj_map[arrow.dom] and image.cod == functor.obj_map[arrow.cod],
            name,
        )
    for obj in source.objects:
        identities.observe(functor.arr_map[source.identity[obj]] == target.identity[functor.obj_map[obj]], obj)
    for (g, f), gf in source.composition.items():
        fg_image = target.composition.get((functor.arr_map[g], functor.arr_map[f]))
        composition.observe(fg_image == functor.arr_map.get(gf), (g, f))

    for tally in (total, endpoints, identities, composition):
        report.add(tally.result())
    return report


def thin_arrow_name(dom: str, cod: str) -> str:
    return f"{dom}>{cod}"


def _thin_category(objects: Sequence[str], leq: Mapping[str, Sequence[str]], name: str) -> FinCategory:
    arrows: Dict[str, Arrow] = {}
    identity: Dict[str, str] = {}
    composition: Dict[Tuple[str, str], str] = {}
    for x in objects:
        for y in leq[x]:
            arrows[thin_arrow_name(x, y)] = Arrow(thin_arrow_name(x, y), x, y)
        identity[x] = thin_arrow_name(x, x)
    for x in objects:
        for y in leq[x]:
            for z in leq[y]:
                composition[(thin_arrow_name(y, z), thin_arrow_name(x, y))] = thin_arrow_name(x, z)
    return FinCategory(tuple(objects), arrows, identity, composition, name=name)


def poset_category(poset: FinPoset, name: str = "") -> FinCategory:
    """Thin category with an arrow x>y exactly when x <= y."""
    above = {x: [y for y in poset.carrier if poset.leq(x, y)] for x in poset.carrier}
    return _thin_category(poset.carrier, above, name)


def category_from_dag(nodes: Sequence[str], edges: Iterable[Tuple[str, str]], name: str = "") -> FinCategory:
    """
    Thin category of the reachability preorder of an acyclic quiver.

    Raises
    ------
    UnknownObjectError
        an edge references an unknown node
    CyclicQuiverError
        the quiver has a cycle (self loops included), witness is the cycle
    """
    nodes = tuple(nodes)
    successors: Dict[str, List[str]] = {n: [] for n in nodes}
    for src, dst in edges:
        for end in (src, dst):
            if end not in successors:
                raise UnknownObjectError(f"Edge {src}->{dst} references unknown node {end!r}", witness=end)
        if dst not in successors[src]:
            successors[src].append(dst)

    cycle = _find_cycle(nodes, successors)
    if cycle:
        raise CyclicQuiverError(f"Quiver has a cycle: {' -> '.join(cycle)}", witness=cycle)

    reach: Dict[str, List[str]] = {}
    for node in nodes:
        seen = {node}
        stack = [node]
        while stack:
            for nxt in successors[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        reach[node] = [x for x in nodes if x in seen]
    return _thin_category(nodes, reach, name)


def _find_cycle(nodes: Sequence[str], successors: Mapping[str, Sequence[str]]) -> Optional[Tuple[str, ...]]:
    state: Dict[str, int] = {n: 0 for n in nodes}
    path: List[str] = []

    def visit(node: str) -> Optional[Tuple[str, ...]]:
        state[node] = 1
        path.append(node)
        for nxt in successors[node]:
            if state[nxt] == 1:
                return tuple(path[path.index(nxt) :]) + (nxt,)
            if state[nxt] == 0:
                found = visit(nxt)
                if found:
                    return found
        path.pop()
        state[node] = 2
        return None

    for node in nodes:
        if state[node] == 0:
            found = visit(node)
            if found:
                return found
    return None


def concrete_category(
    sizes: Mapping[str, int],
    generators: Iterable[Tuple[str, str, Sequence[int]]],
    name: str = "",
) -> FinCategory:
    """
    Category of the finite sets range(sizes[x]) and every composite of the generating functions.

    A generator (dom, cod, images) sends i to images[i]. Arrows are named
    <dom>><cod>:<images> with the images dot separated, identities id_<x>.

    Raises
    ------
    UnknownObjectError
        a generator references an unknown object
    ToposError
        a generator is not a function between the given sets
    """
    objects = tuple(sizes)

    def arrow_name(dom: str, cod: str, images: Tuple[int, ...]) -> str:
        if dom == cod and images == tuple(range(sizes[dom])):
            return f"id_{dom}"
        return f"{dom}>{cod}:{'.'.join(str(i) for i in images)}"

    functions: Dict[str, Tuple[str, str, Tuple[int, ...]]] = {
        f"id_{x}": (x, x, tuple(range(sizes[x]))) for x in objects
    }
    for dom, cod, images in generators:
        for end in (dom, cod):
            if end not in sizes:
                raise UnknownObjectError(f"Generator {dom}->{cod} references unknown object {end!r}", witness=end)
        images = tuple(images)
        if len(images) != sizes[dom] or any(not 0 <= i < sizes[cod] for i in images):
            raise ToposError(f"{images} is not a function from {dom} to {cod}", witness=(dom, cod, images))
        functions.setdefault(arrow_name(dom, cod, images), (dom, cod, images))

    changed = True
    while changed:
        changed = False
        for f_dom, f_cod, f_images in list(functions.values()):
            for g_dom, g_cod, g_images in list(functions.values()):
                if g_dom != f_cod:
                    continue
                images = tuple(g_images[i] for i in f_images)
                composite = arrow_name(f_dom, g_cod, images)
                if composite not in functions:
                    functions[composite] = (f_dom, g_cod, images)
                    changed = True

    arrows = {n: Arrow(n, dom, cod) for n, (dom, cod, _) in functions.items()}
    composition: Dict[Tuple[str, str], str] = {}
    for f, (f_dom, f_cod, f_images) in functions.items():
        for g, (g_dom, g_cod, g_images) in functions.items():
            if g_dom == f_cod:
                composition[(g, f)] = arrow_name(f_dom, g_cod, tuple(g_images[i] for i in f_images))
    LOGGER.debug("Concrete category %s: %s arrows", name, len(arrows))
    return FinCategory(objects, arrows, {x: f"id_{x}" for x in objects}, composition, name=name)


def terminal_category() -> FinCategory:
    return FinCategory.build(["*"], [], name="1")


def functor_to_terminal(category: FinCategory) -> FinFunctor:
    return FinFunctor(
        category,
        terminal_category(),
        {x: "*" for x in category.objects},
        {f: "id_*" for f in category.arrows},
        name=f"![{category.name}]",
    )


def full_subcategory(category: FinCategory, objects: Iterable[str]) -> Tuple[FinCategory, FinFunctor]:
    """Full subcategory on objects, in the parent's object order, with its inclusion functor."""
    keep = {category.check_object(x) for x in objects}
    objs = tuple(x for x in category.objects if x in keep)
    arrows = {n: a for n, a in category.arrows.items() if a.dom in keep and a.cod in keep}
    identity = {x: category.identity[x] for x in objs}
    composition = {(g, f): gf for (g, f), gf in category.composition.items() if g in arrows and f in arrows}
    sub = FinCategory(objs, arrows, identity, composition, name=f"{category.name}|{','.join(objs)}")
    inclusion = FinFunctor(sub, category, {x: x for x in objs}, {f: f for f in arrows}, name="incl")
    return sub, inclusion


def accessible_from(category: FinCategory, obj: str) -> Tuple[str, ...]:
    return category.reachable(obj)


@dataclass(frozen=True)
class Cosieve:
    """Set of arrows out of base, closed under postcomposition."""

    base: str
    arrows: FrozenSet[str]

    def label(self) -> str:
        return "{" + ",".join(sorted(self.arrows)) + "}"

    def __repr__(self) -> str:
        return f"Cosieve({self.base}: {self.label()})"


def total_cosieve(category: FinCategory, obj: str) -> Cosieve:
    return Cosieve(obj, frozenset(category.out_arrows(obj)))


def principal_cosieve(category: FinCategory, arrow: str) -> Cosieve:
    """All composites g after arrow."""
    f = category.arrow(arrow)
    return Cosieve(f.dom, frozenset(category.compose(g, arrow) for g in category.out_arrows(f.cod)))


def is_cosieve(category: FinCategory, obj: str, arrows: FrozenSet[str]) -> bool:
    return all(
        category.dom(f) == obj and all(category.compose(g, f) in arrows for g in category.out_arrows(category.cod(f)))
        for f in arrows
    )


def cosieves_at(category: FinCategory, obj: str, limits: Optional[SizeLimits] = None) -> Tuple[Cosieve, ...]:
    """
    Every cosieve on obj, smallest first.

    Cosieves are exactly the unions of principal cosieves, so the family is grown by
    joining each principal cosieve onto what has been found so far.
    """
    limits = limits or SizeLimits.from_env()
    out = category.out_arrows(obj)
    check_size(f"out-arrows of {obj}", len(out), limits.max_out_arrows)
    cache_key = ("cosieves", obj)
    if cache_key in category._cache:
        return category._cache[cache_key]
    position = {f: i for i, f in enumerate(out)}
    masks = []
    for f in out:
        mask = 0
        for g in principal_cosieve(category, f).arrows:
            mask |= 1 << position[g]
        masks.append(mask)
    found = {0}
    for mask in masks:
        found |= {known | mask for known in found}
    ordered = sorted(found, key=lambda m: (bin(m).count("1"), [i for i in range(len(out)) if m >> i & 1]))
    result = tuple(Cosieve(obj, frozenset(out[i] for i in range(len(out)) if m >> i & 1)) for m in ordered)
    LOGGER.debug("%s cosieves on %s", len(result), obj)
    category._cache[cache_key] = result
    return result


def cosieve_transition(category: FinCategory, cosieve: Cosieve, arrow: str) -> Cosieve:
    """Arrows g out of cod(arrow) with g after arrow in the cosieve."""
    f = category.arrow(arrow)
    if f.dom != cosieve.base:
        raise DomainMismatchError(
            f"Cosieve on {cosieve.base} cannot move along {arrow}: {f.dom} -> {f.cod}", witness=(cosieve.base, arrow)
        )
    return Cosieve(
        f.cod,
        frozenset(g for g in category.out_arrows(f.cod) if category.compose(g, arrow) in cosieve.arrows),
    )


@dataclass(eq=False)
class CommaCategory:
    """Comma category of d over F. Object ids are '<g>|<c>' for g: d -> F(c)."""

    base: str
    category: FinCategory
    projection: FinFunctor
    legs: Dict[str, Tuple[str, str]]

    def object_for(self, leg: str, obj: str) -> str:
        return f"{leg}|{obj}"


def comma_category(obj: str, functor: FinFunctor) -> CommaCategory:
    """Objects (g: obj -> F c, c); morphisms h: c -> c' with F(h) after g equal to g'."""
    source, target = functor.source, functor.target
    target.check_object(obj)
    cache_key = ("comma", obj)
    if cache_key in functor._cache:
        return functor._cache[cache_key]

    legs: Dict[str, Tuple[str, str]] = {}
    for c in source.objects:
        for g in target.hom(obj, functor.obj_map[c]):
            legs[f"{g}|{c}"] = (g, c)
    objects = tuple(legs)
    arrows: Dict[str, Arrow] = {}
    arrow_source: Dict[str, str] = {}
    identity: Dict[str, str] = {}
    for key, (g, c) in legs.items():
        for h in source.out_arrows(c):
            image = target.compose(functor.arr_map[h], g)
            cod_key = f"{image}|{source.cod(h)}"
            name = f"{h}@{key}"
            arrows[name] = Arrow(name, key, cod_key)
            arrow_source[name] = h
        identity[key] = f"{source.identity[c]}@{key}"
    composition: Dict[Tuple[str, str], str] = {}
    for f_name, f_arrow in arrows.items():
        for g_name in (n for n, a in arrows.items() if a.dom == f_arrow.cod):
            composite = source.compose(arrow_source[g_name], arrow_source[f_name])
            composition[(g_name, f_name)] = f"{composite}@{f_arrow.dom}"
    comma = FinCategory(objects, arrows, identity, composition, name=f"{obj}/{functor.name}")
    projection = FinFunctor(
        comma,
        source,
        {key: c for key, (_, c) in legs.items()},
        dict(arrow_source),
        name="proj",
    )
    result = CommaCategory(obj, comma, projection, legs)
    functor._cache[cache_key] = result
    return result
