"""Seeded and exhaustive protocol generators for the verification sweeps"""

import logging
import random
from itertools import combinations, product
from typing import Iterator, List, Optional, Sequence, Tuple

from ..category.fincat import (
    FinFunctor,
    category_from_dag,
    concrete_category,
    full_subcategory,
    functor_to_terminal,
    thin_arrow_name,
)
from ..helpers.system import SizeLimits, check_size
from .protocol import EstimateOrder, Protocol

LOGGER = logging.getLogger(__name__)


def state_names(count: int) -> Tuple[str, ...]:
    return tuple(f"w{i + 1}" for i in range(count))


def consensus_names(count: int) -> Tuple[str, ...]:
    return tuple(f"c{i}" for i in range(count))


def _subsets(values: Sequence[str], include_empty: bool) -> List[frozenset]:
    start = 0 if include_empty else 1
    return [frozenset(c) for size in range(start, len(values) + 1) for c in combinations(values, size)]


def dag_shapes(states: Sequence[str]) -> Iterator[List[Tuple[str, str]]]:
    """Every edge set using only forward edges i -> j with i < j."""
    candidates = list(combinations(states, 2))
    for mask in range(1 << len(candidates)):
        yield [edge for i, edge in enumerate(candidates) if mask >> i & 1]


def all_small_protocols(
    n_consensus: int = 2,
    max_states: int = 3,
    waive_estimator_condition: bool = False,
    limits: Optional[SizeLimits] = None,
) -> Iterator[Protocol]:
    """
    Every protocol on up to max_states states: all forward DAG shapes times all estimate maps.

    Estimates avoid bottom unless the estimator condition is waived.
    """
    limits = limits or SizeLimits.from_env()
    check_size("exhaustive sweep consensus size", n_consensus, limits.max_powerset_size)
    consensus = consensus_names(n_consensus)
    estimates = _subsets(consensus, include_empty=waive_estimator_condition)
    count = 0
    for n_states in range(1, max_states + 1):
        states = state_names(n_states)
        for edges in dag_shapes(states):
            sigma = category_from_dag(states, edges, name="Sigma")
            for choice in product(estimates, repeat=n_states):
                count += 1
                yield Protocol(
                    consensus,
                    sigma,
                    dict(zip(states, choice)),
                    waive_estimator_condition=waive_estimator_condition,
                    name=f"exhaustive-{count}",
                    limits=limits,
                )
    LOGGER.debug("Generated %s exhaustive protocols", count)


def random_protocol(
    n_states: int,
    n_consensus: int,
    edge_density: float,
    seed: int,
    waive_estimator_condition: bool = False,
    limits: Optional[SizeLimits] = None,
) -> Protocol:
    """
    Seeded protocol on a random forward DAG.

    Parameters
    ----------
    n_states : int
        number of protocol states, at least 1
    n_consensus : int
        number of consensus values, at least 1
    edge_density : float
        probability of each forward edge
    seed : int
        rng seed, the same seed always gives the same protocol
    waive_estimator_condition : bool
        allow bottom estimates
    """
    limits = limits or SizeLimits.from_env()
    check_size("random protocol consensus size", n_consensus, limits.max_powerset_size)
    check_size("random protocol state count", n_states, limits.max_out_arrows)
    rng = random.Random(seed)
    states = state_names(n_states)
    consensus = consensus_names(n_consensus)
    edges = [edge for edge in combinations(states, 2) if rng.random() < edge_density]
    lowest = 0 if waive_estimator_condition else 1
    estimates = {}
    for w in states:
        mask = rng.randint(lowest, (1 << n_consensus) - 1)
        estimates[w] = frozenset(c for i, c in enumerate(consensus) if mask >> i & 1)
    return Protocol(
        consensus,
        category_from_dag(states, edges, name="Sigma"),
        estimates,
        waive_estimator_condition=waive_estimator_condition,
        name=f"random-{seed}",
        limits=limits,
    )


def random_geometric_protocol(
    n_consensus: int,
    seed: int,
    edge_density: float = 0.5,
    extra_states: int = 0,
    limits: Optional[SizeLimits] = None,
) -> Protocol:
    """
    Seeded strict functorial protocol in refinement order whose estimator hits every proposition.

    One state per subset of C, ordered largest subset first, plus extra_states copies of
    random estimates. Edges only narrow the estimate, so the estimator is a functor into
    (PC, refinement) and surjective on objects. Bottom is hit, so the estimator condition
    is waived.
    """
    limits = limits or SizeLimits.from_env()
    check_size("geometric protocol consensus size", n_consensus, limits.max_powerset_size)
    rng = random.Random(seed)
    consensus = consensus_names(n_consensus)
    estimates_in_order = sorted(_subsets(consensus, include_empty=True), key=len, reverse=True)
    estimates_in_order += [rng.choice(estimates_in_order) for _ in range(extra_states)]
    estimates_in_order.sort(key=len, reverse=True)
    states = state_names(len(estimates_in_order))
    estimates = dict(zip(states, estimates_in_order))
    edges = [
        (a, b) for a, b in combinations(states, 2) if estimates[b] <= estimates[a] and rng.random() < edge_density
    ]
    LOGGER.debug("Geometric protocol seed %s: %s states, %s edges", seed, len(states), len(edges))
    return Protocol(
        consensus,
        category_from_dag(states, edges, name="Sigma"),
        estimates,
        strict_functorial=True,
        order=EstimateOrder.REFINEMENT,
        waive_estimator_condition=True,
        name=f"geometric-{seed}",
        limits=limits,
    )


def geometric_protocols(n_consensus: int, max_states: int) -> Iterator[Protocol]:
    """Every strict functorial, refinement ordered, object-surjective protocol up to max_states."""
    consensus = consensus_names(n_consensus)
    estimates = _subsets(consensus, include_empty=True)
    count = 0
    for n_states in range(len(estimates), max_states + 1):
        states = state_names(n_states)
        for choice in product(estimates, repeat=n_states):
            if set(choice) != set(estimates):
                continue
            assigned = dict(zip(states, choice))
            for edges in dag_shapes(states):
                if not all(assigned[b] <= assigned[a] for a, b in edges):
                    continue
                count += 1
                yield Protocol(
                    consensus,
                    category_from_dag(states, edges, name="Sigma"),
                    assigned,
                    strict_functorial=True,
                    order=EstimateOrder.REFINEMENT,
                    waive_estimator_condition=True,
                    name=f"geometric-exhaustive-{count}",
                )


def random_concrete_functor(seed: int, max_objects: int = 3) -> FinFunctor:
    """
    Seeded inclusion of a full subcategory of a random category of small finite sets.

    s0 has two elements and a non-identity endomorphism, so the target is never thin and
    objects left out of the subcategory may still be retracts of kept ones.
    """
    rng = random.Random(seed)
    sizes = {f"s{i}": rng.randint(1, 2) for i in range(rng.randint(1, max_objects))}
    sizes["s0"] = 2
    objects = list(sizes)
    generators = [("s0", "s0", rng.choice([(1, 0), (0, 0), (1, 1)]))]
    for _ in range(rng.randint(0, 3)):
        dom, cod = rng.choice(objects), rng.choice(objects)
        generators.append((dom, cod, tuple(rng.randrange(sizes[cod]) for _ in range(sizes[dom]))))
    target = concrete_category(sizes, generators, name="D")
    keep = [x for x in objects if rng.random() < 0.5] or [rng.choice(objects)]
    source, inclusion = full_subcategory(target, keep)
    return FinFunctor(source, target, inclusion.obj_map, inclusion.arr_map, name=f"F{seed}")


def random_functor(seed: int, max_objects: int = 4, attempts: int = 50) -> FinFunctor:
    """
    Seeded functor, half of the time between random thin categories and otherwise from
    random_concrete_functor.

    Thin functors place objects in order, each on a target object reachable from the images
    of its direct predecessors, and fall back to the functor to the terminal category when
    no attempt succeeds.
    """
    rng = random.Random(seed)
    if rng.random() < 0.5:
        return random_concrete_functor(rng.randrange(2**31), min(max_objects, 3))
    for _ in range(attempts):
        source_states = tuple(f"x{i}" for i in range(rng.randint(1, max_objects)))
        target_states = tuple(f"y{i}" for i in range(rng.randint(1, max_objects)))
        source_edges = [e for e in combinations(source_states, 2) if rng.random() < 0.5]
        target_edges = [e for e in combinations(target_states, 2) if rng.random() < 0.5]
        source = category_from_dag(source_states, source_edges, name="C")
        target = category_from_dag(target_states, target_edges, name="D")
        obj_map = {}
        for c in source_states:
            preds = [a for a, b in source_edges if b == c]
            candidates = [d for d in target_states if all(d in target.reachable(obj_map[p]) for p in preds)]
            if not candidates:
                break
            obj_map[c] = rng.choice(candidates)
        else:
            arr_map = {
                name: thin_arrow_name(obj_map[arrow.dom], obj_map[arrow.cod]) for name, arrow in source.arrows.items()
            }
            return FinFunctor(source, target, obj_map, arr_map, name=f"F{seed}")
    LOGGER.debug("random_functor seed %s fell back to the terminal functor", seed)
    return functor_to_terminal(category_from_dag(("x0",), [], name="C"))
