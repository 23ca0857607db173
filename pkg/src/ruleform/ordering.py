"""Priority-order search: minimize how many questions the initial form shows.

The objective of an order is the number of distinct clinical conditions
displayed when no clinical answer has been given yet (non-clinical facts may be
present). Solvers: a frequency heuristic, a seeded stochastic local search over
permutations, an exhaustive search for small instances, and a reduction to the
generalized traveling salesman problem for restricted rulebases, used to
cross-validate the other solvers at toy scale.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .display import Order, compile_display_rules, displayed_conditions
from .errors import RuleformError
from .rules import PatientState, RuleBase


class OrderingError(RuleformError):
    """Instance outside a solver's supported range, or invalid input."""


@dataclass(frozen=True)
class OrderingInstance:
    """A rulebase plus the non-clinical facts assumed present.

    An empty ``nonclinical_state`` yields the global, patient-independent
    ordering problem; a patient's drug list yields the patient-specific one.
    """

    rulebase: RuleBase
    nonclinical_state: frozenset[str] = frozenset()

    def __post_init__(self):
        for cond_id in self.nonclinical_state:
            if self.rulebase.catalog.condition(cond_id).is_clinical:
                raise OrderingError(
                    f"{cond_id!r} is clinical; instance state must be non-clinical"
                )


def objective(inst: OrderingInstance, order: Order) -> int:
    """Number of conditions shown on the initial form under ``order``."""
    drs = compile_display_rules(inst.rulebase, order)
    patient = PatientState(set(inst.nonclinical_state), {})
    return len(displayed_conditions(drs, patient))


def condition_frequency_order(rb: RuleBase) -> Order:
    """Clinical conditions by decreasing occurrence count in rules; ties by id."""
    counts: dict[str, int] = {cond_id: 0 for cond_id in rb.catalog.clinical_ids()}
    for rule in rb.rules.values():
        p = rule.premise
        for cond_id in itertools.chain(
            p.c_present, p.c_absent, *(group.clinical for group in p.any_of)
        ):
            counts[cond_id] += 1
    ordered = sorted(counts, key=lambda cond_id: (-counts[cond_id], cond_id))
    return Order(tuple(ordered))


def _search_space(rb: RuleBase) -> tuple[list[str], list[str]]:
    """Rule-referenced clinical conditions (the only ones that matter) and the rest."""
    referenced = sorted(rb.referenced_clinical_ids())
    rest = sorted(set(rb.catalog.clinical_ids()) - set(referenced))
    return referenced, rest


def brute_force_order(inst: OrderingInstance, cap: int = 8) -> tuple[Order, int]:
    """Exhaustive minimum over all permutations of rule-referenced conditions."""
    referenced, rest = _search_space(inst.rulebase)
    if len(referenced) > cap:
        raise OrderingError(
            f"{len(referenced)} rule-referenced conditions exceed the "
            f"brute-force cap of {cap}"
        )
    best_order = None
    best_cost = None
    for perm in itertools.permutations(referenced):
        order = Order(perm + tuple(rest))
        cost = objective(inst, order)
        if best_cost is None or cost < best_cost:
            best_order, best_cost = order, cost
    if best_order is None:  # no referenced conditions at all
        best_order = Order(tuple(rest))
        best_cost = objective(inst, best_order)
    return best_order, best_cost


@dataclass(frozen=True)
class OptimizerConfig:
    seed: int = 0
    max_evaluations: int = 2000
    stagnation_limit: int = 600
    flock_size: int = 4
    restart_probability: float = 0.04
    return_probability: float = 0.12


def optimize_order(inst: OrderingInstance, config: OptimizerConfig = OptimizerConfig()) -> Order:
    """Seeded stochastic local search over permutations.

    A small flock of trajectories starts from the frequency-heuristic order;
    each step a trajectory either takes a small local move (adjacent swap or
    relocation of one condition), returns to its memorized best, or restarts
    from a random permutation. Never returns an order worse than the heuristic
    seed; deterministic for a given config.
    """
    rb = inst.rulebase
    referenced, rest = _search_space(rb)
    heuristic = condition_frequency_order(rb)
    if len(referenced) <= 1:
        return heuristic

    seed_perm = tuple(c for c in heuristic.sequence if c in set(referenced))
    rest_tuple = tuple(rest)

    evaluations = 0

    def evaluate(perm: tuple[str, ...]) -> int:
        nonlocal evaluations
        evaluations += 1
        return objective(inst, Order(perm + rest_tuple))

    rng = random.Random(config.seed)
    best_perm = seed_perm
    best_cost = evaluate(seed_perm)
    since_improvement = 0

    positions = [list(seed_perm) for _ in range(config.flock_size)]
    memories = [(seed_perm, best_cost)] * config.flock_size

    while evaluations < config.max_evaluations and since_improvement < config.stagnation_limit:
        for b in range(config.flock_size):
            if evaluations >= config.max_evaluations:
                break
            move = rng.random()
            pos = positions[b]
            if move < config.restart_probability:
                rng.shuffle(pos)
            elif move < config.restart_probability + config.return_probability:
                pos[:] = memories[b][0]
                continue  # returning is not a new candidate
            elif rng.random() < 0.5:
                i = rng.randrange(len(pos) - 1)
                pos[i], pos[i + 1] = pos[i + 1], pos[i]
            else:
                i = rng.randrange(len(pos))
                j = rng.randrange(len(pos))
                pos.insert(j, pos.pop(i))
            perm = tuple(pos)
            cost = evaluate(perm)
            if cost <= memories[b][1]:
                memories[b] = (perm, cost)
            if cost < best_cost:
                best_perm, best_cost = perm, cost
                since_improvement = 0
            else:
                since_improvement += 1
    return Order(best_perm + rest_tuple)


# --------------------------------------------------------------------------- #
# Reduction to the generalized traveling salesman problem                     #
# --------------------------------------------------------------------------- #

INFINITY = float("inf")


@dataclass(frozen=True)
class GtspInstance:
    """Towns are subsets of the clinical conditions; area k holds the size-k towns.

    The asymmetric distance is 0 for closing the loop from the full set back to
    the empty set, infinite unless moving to the next area, 1 when the added
    conditions open a rule none of whose conditions was covered before, and 0
    otherwise. Distances are computed on demand; ``matrix()`` materializes them
    for small instances.
    """

    conditions: tuple[str, ...]
    towns: tuple[frozenset[str], ...]
    areas: tuple[tuple[int, ...], ...]
    present_sets: tuple[frozenset[str], ...] = field(compare=False)

    @property
    def n(self) -> int:
        return len(self.conditions)

    def distance(self, i: int, j: int) -> float:
        ti, tj = self.towns[i], self.towns[j]
        if len(ti) == self.n and len(tj) == 0:
            return 0.0
        # the travel builds an order: each step must extend the current set by
        # exactly one condition (hops to incomparable towns would let a tour
        # dodge the display cost of a rule condition)
        if len(tj) != len(ti) + 1 or not ti < tj:
            return INFINITY
        added = tj - ti
        for c_present in self.present_sets:
            if added <= c_present and not (ti & c_present):
                return 1.0
        return 0.0

    def matrix(self) -> list[list[float]]:
        if self.n > 8:
            raise OrderingError("matrix materialization is limited to n <= 8")
        size = len(self.towns)
        return [[self.distance(i, j) for j in range(size)] for i in range(size)]


@dataclass(frozen=True)
class GtspTour:
    """One town per area, in area order; cost includes closing back to the start."""

    towns: tuple[frozenset[str], ...]
    cost: float


def gtsp_reduce(rb: RuleBase, cap: int = 12) -> GtspInstance:
    """Build the GTSP instance for a rulebase of restricted-form rules.

    Restricted form means rules carry only required-present clinical
    conditions: no non-clinical slots, no absences, no any-of groups.
    """
    for rule in rb.rules.values():
        p = rule.premise
        if p.d_present or p.c_absent or p.d_absent or p.any_of:
            raise OrderingError(
                f"rule {rule.id!r} is not in restricted form "
                "(only required-present clinical conditions allowed)"
            )
    conditions = tuple(sorted(rb.catalog.clinical_ids()))
    n = len(conditions)
    if n > cap:
        raise OrderingError(f"{n} clinical conditions exceed the reduction cap of {cap}")
    towns: list[frozenset[str]] = []
    areas: list[tuple[int, ...]] = []
    for k in range(n + 1):
        members = []
        for combo in itertools.combinations(conditions, k):
            members.append(len(towns))
            towns.append(frozenset(combo))
        areas.append(tuple(members))
    present_sets = tuple(rule.premise.c_present for rule in rb.rules.values())
    return GtspInstance(conditions, tuple(towns), tuple(areas), present_sets)


def _is_chain(towns: tuple[frozenset[str], ...]) -> bool:
    return all(
        towns[k] < towns[k + 1] and len(towns[k + 1]) == len(towns[k]) + 1
        for k in range(len(towns) - 1)
    )


def gtsp_brute_solve(g: GtspInstance, cap: int = 5) -> GtspTour:
    """Minimum-cost tour through one town per area, by exhaustive enumeration.

    Among equal-cost optima, chain tours (each step adds exactly one condition)
    are preferred, then the lexicographically least tour, so results are
    deterministic and directly convertible to an order whenever possible.
    """
    if g.n > cap:
        raise OrderingError(f"n={g.n} exceeds the exact-solver cap of {cap}")
    best: tuple[float, bool, tuple, tuple[int, ...]] | None = None
    for choice in itertools.product(*g.areas):
        cost = 0.0
        for k in range(len(choice) - 1):
            cost += g.distance(choice[k], choice[k + 1])
            if cost == INFINITY:
                break
        cost += g.distance(choice[-1], choice[0])
        towns = tuple(g.towns[i] for i in choice)
        key = (cost, not _is_chain(towns), tuple(tuple(sorted(t)) for t in towns), choice)
        if best is None or key < best:
            best = key
    assert best is not None  # areas are never empty
    cost, _, _, choice = best
    return GtspTour(tuple(g.towns[i] for i in choice), cost)


def order_from_tour(tour: GtspTour) -> Order:
    """Priority order read off a chain tour: conditions in order of first appearance."""
    sequence: list[str] = []
    for k in range(len(tour.towns) - 1):
        current, following = tour.towns[k], tour.towns[k + 1]
        added = following - current
        if len(added) != 1 or not current < following:
            raise OrderingError(
                "tour is not a chain: step "
                f"{sorted(current)} -> {sorted(following)} does not add exactly "
                "one condition"
            )
        sequence.extend(added)
    return Order(tuple(sequence))
