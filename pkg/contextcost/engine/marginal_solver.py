"""Does a global joint distribution reproduce every context table?

The unknowns are weights on the deterministic global assignments (one
outcome per observable). Each context/outcome cell gives one equality
constraint, plus one normalization row. Feasibility is decided by an exact
phase-one simplex over `Fraction`s with Bland's rule; an infeasible system
comes back with a Farkas certificate read off the final tableau.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from engine.defaults import DEFAULTS
from engine.exceptions import CapacityError, ScenarioMismatchError, ValidationError
from engine.infotheory import EXACT, Dist, JointTable, close, marginalize
from engine.models import (
    Context,
    EmpiricalModel,
    Scenario,
    SingleStateModel,
    context_key,
    outcome_key,
    point_responses,
)
from engine.scenario import require_consistent, validate

logger = logging.getLogger(__name__)

FEASIBLE = "FEASIBLE"
INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class GlobalAssignment:
    assignment: Tuple[Tuple[str, str], ...]  # (observable, outcome), every observable once

    def __getitem__(self, name: str) -> str:
        for n, o in self.assignment:
            if n == name:
                return o
        raise KeyError(name)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.assignment)

    def restrict(self, context: Context) -> Tuple[str, ...]:
        return tuple(self[n] for n in context)

    def label(self) -> str:
        return ",".join(f"{n}={o}" for n, o in self.assignment)


@dataclass(frozen=True)
class FeasibilityResult:
    status: str
    witness: Optional[Dist] = None                       # over GlobalAssignment
    certificate: Optional[Tuple[Fraction, ...]] = None   # one entry per constraint row
    constraint_labels: Tuple[str, ...] = ()
    assignment_count: int = 0
    pivots: int = 0
    snap_distance: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def enumerate_assignments(scenario: Scenario, cap: int = DEFAULTS["assignment_cap"]) -> List[GlobalAssignment]:
    """All global assignments, lexicographic in observable then outcome order."""
    count = math.prod(len(outcomes) for _, outcomes in scenario.observables)
    if count > cap:
        raise CapacityError(
            f"scenario has {count} global assignments, above the cap of {cap}; "
            f"raise the cap (--cap) to solve it"
        )
    names = scenario.names
    return [
        GlobalAssignment(tuple(zip(names, combo)))
        for combo in itertools.product(*(outcomes for _, outcomes in scenario.observables))
    ]


def _grid_counts(values: Dict[Tuple[str, ...], float], denominator: int) -> Dict[Tuple[str, ...], int]:
    """Round onto the grid in units of 1/denominator; the residual goes to the largest cell."""
    counts = {o: round(p * denominator) for o, p in values.items()}
    residual = denominator - sum(counts.values())
    if residual:
        largest = max(counts, key=counts.get)
        counts[largest] += residual
    return counts


def _shared_groups(scenario: Scenario) -> List[Tuple[str, ...]]:
    """Observable sets two contexts have in common, each set once."""
    groups: List[Tuple[str, ...]] = []
    for i, a in enumerate(scenario.contexts):
        for b in scenario.contexts[i + 1:]:
            shared = scenario.shared(a, b)
            if shared and shared not in groups:
                groups.append(shared)
    return groups


def _align(counts: Dict[Tuple[str, ...], int], positions: Sequence[int], target: Dict[Tuple[str, ...], int]) -> None:
    """Move mass between cells that differ only at `positions` until the marginal there is `target`.

    Every other coordinate of a moved unit stays put, so marginals on
    observables outside `positions` are unchanged.
    """
    def key(o):
        return tuple(o[i] for i in positions)

    surplus = {s: -n for s, n in target.items()}
    for o, n in counts.items():
        surplus[key(o)] += n
    while True:
        give = next((s for s, d in surplus.items() if d > 0), None)
        if give is None:
            return
        take = next(s for s, d in surplus.items() if d < 0)
        donor = max((o for o in counts if key(o) == give and counts[o] > 0), key=counts.get)
        receiver = list(donor)
        for i, s in zip(positions, take):
            receiver[i] = s
        amount = min(surplus[give], -surplus[take], counts[donor])
        counts[donor] -= amount
        counts[tuple(receiver)] += amount
        surplus[give] -= amount
        surplus[take] += amount


def rationalize(em: EmpiricalModel, denominator: int = DEFAULTS["snap_denominator"]) -> Tuple[EmpiricalModel, float]:
    """Snap float tables onto the grid 1/denominator.

    Marginals on observable sets shared between contexts are snapped first,
    from the mean of the contexts' float marginals, and every table is then
    rounded and nudged to sum to exactly 1 and to reproduce those marginals
    exactly. Shared sets that overlap each other are left to the rounding
    alone. Returns the exact model and the largest distance any cell moved.
    """
    if em.mode == EXACT:
        return em, 0.0
    scenario = em.scenario
    groups = _shared_groups(scenario)
    aligned = [g for g in groups if not any(set(g) & set(h) for h in groups if h != g)]
    if len(aligned) < len(groups):
        overlapping = [list(g) for g in groups if g not in aligned]
        logger.info("shared observable sets %s overlap; their marginals are snapped per table", overlapping)

    targets = {}
    for g in aligned:
        holders = [c for c in scenario.contexts if set(g) <= set(c)]
        marginals = [marginalize(em.table(c), g) for c in holders]
        mean = {
            o: sum(float(m.cell(o)) for m in marginals) / len(marginals)
            for o in marginals[0].outcomes()
        }
        targets[g] = _grid_counts(mean, denominator)

    tables: Dict[Context, JointTable] = {}
    snap = 0.0
    for c, table in em.tables.items():
        counts = _grid_counts({o: float(table.cell(o)) for o in table.outcomes()}, denominator)
        for g in aligned:
            if set(g) <= set(c):
                _align(counts, [table.index(n) for n in g], targets[g])
        snapped = {o: Fraction(n, denominator) for o, n in counts.items()}
        snap = max([snap] + [abs(float(table.cell(o)) - float(snapped[o])) for o in snapped])
        tables[c] = JointTable(table.variables, snapped, EXACT, table.tol)
    if snap:
        logger.info("snapped float tables to the 1/%d grid, max distance %.3g", denominator, snap)
    return EmpiricalModel(scenario, tables, em.tol), snap


def constraint_system(
    em: EmpiricalModel, assignments: Sequence[GlobalAssignment]
) -> Tuple[List[str], List[List[int]], List[Fraction]]:
    """Rows: normalization, then every cell of every context table in order."""
    labels = ["normalization"]
    rows = [[1] * len(assignments)]
    rhs = [Fraction(1)]
    for c in em.scenario.contexts:
        table = em.table(c)
        restricted = [g.restrict(c) for g in assignments]
        for o in table.outcomes():
            labels.append(f"{context_key(c)}:{outcome_key(o)}")
            rows.append([1 if r == o else 0 for r in restricted])
            rhs.append(Fraction(table.cell(o)))
    return labels, rows, rhs


class PhaseOneSimplex:
    """Minimize the sum of artificials on A w + a = b, w, a >= 0.

    Tableau over Fractions. Entering column: lowest index with negative
    reduced cost. Leaving row: minimum ratio, ties to the lowest basic index.
    """

    def __init__(self, rows: Sequence[Sequence[int]], rhs: Sequence[Fraction]):
        self.m = len(rows)
        self.n = len(rows[0]) if rows else 0
        self.sign = [1 if b >= 0 else -1 for b in rhs]
        self.tableau = [
            [Fraction(s * a) for a in row] + [Fraction(int(i == k)) for k in range(self.m)]
            for i, (row, s) in enumerate(zip(rows, self.sign))
        ]
        self.rhs = [Fraction(s * b) for b, s in zip(rhs, self.sign)]
        self.basis = [self.n + i for i in range(self.m)]
        self.cost = [Fraction(0)] * self.n + [Fraction(1)] * self.m
        self.pivots = 0

    def reduced_costs(self) -> List[Fraction]:
        reduced = list(self.cost)
        for i, var in enumerate(self.basis):
            cb = self.cost[var]
            if cb:
                row = self.tableau[i]
                for j in range(len(reduced)):
                    if row[j]:
                        reduced[j] -= cb * row[j]
        return reduced

    def pivot(self, i: int, j: int) -> None:
        piv = self.tableau[i][j]
        row = [a / piv for a in self.tableau[i]]
        b = self.rhs[i] / piv
        self.tableau[i] = row
        self.rhs[i] = b
        for k in range(self.m):
            f = self.tableau[k][j]
            if k != i and f:
                self.tableau[k] = [a - f * r for a, r in zip(self.tableau[k], row)]
                self.rhs[k] -= f * b
        self.basis[i] = j
        self.pivots += 1

    def run(self) -> "PhaseOneSimplex":
        while True:
            reduced = self.reduced_costs()
            entering = next((j for j, r in enumerate(reduced) if r < 0), None)
            if entering is None:
                return self
            leaving = None
            for i in range(self.m):
                a = self.tableau[i][entering]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if leaving is None or key < leaving[0]:
                        leaving = (key, i)
            # phase one is bounded below by 0, so some row always limits the step
            self.pivot(leaving[1], entering)

    def objective(self) -> Fraction:
        return sum((self.cost[var] * b for var, b in zip(self.basis, self.rhs)), Fraction(0))

    def primal(self) -> List[Fraction]:
        x = [Fraction(0)] * self.n
        for var, b in zip(self.basis, self.rhs):
            if var < self.n:
                x[var] = b
        return x

    def farkas_certificate(self) -> Tuple[Fraction, ...]:
        """z with z.A_j >= 0 for every column and z.b < 0, in the original row signs.

        The artificial columns of the final tableau hold B^-1, so the phase-one
        duals are y = c_B B^-1 and z = -y.
        """
        y = []
        for k in range(self.m):
            col = self.n + k
            y.append(sum((self.cost[var] * self.tableau[i][col] for i, var in enumerate(self.basis)), Fraction(0)))
        return tuple(-s * yk for s, yk in zip(self.sign, y))


def farkas_check(rows: Sequence[Sequence[int]], rhs: Sequence[Fraction], z: Sequence[Fraction]) -> bool:
    if len(z) != len(rows):
        return False
    for j in range(len(rows[0])):
        if sum(z[i] * rows[i][j] for i in range(len(rows))) < 0:
            return False
    return sum(zi * b for zi, b in zip(z, rhs)) < 0


def clears_snap_margin(z: Sequence[Fraction], rhs: Sequence[Fraction], denominator: int) -> bool:
    """z.b < -|z|_1 / denominator: the certificate survives moving any cell of b by one grid step."""
    margin = sum((abs(zi) for zi in z), Fraction(0)) / denominator
    return sum((zi * Fraction(b) for zi, b in zip(z, rhs)), Fraction(0)) < -margin


def global_joint_exists(
    em: EmpiricalModel,
    cap: int = DEFAULTS["assignment_cap"],
    denominator: int = DEFAULTS["snap_denominator"],
) -> FeasibilityResult:
    """Witness distribution over global assignments, or a Farkas certificate."""
    require_consistent(em)
    exact_em, snap = rationalize(em, denominator)
    assignments = enumerate_assignments(em.scenario, cap)
    labels, rows, rhs = constraint_system(exact_em, assignments)
    lp = PhaseOneSimplex(rows, rhs).run()
    logger.debug("phase one finished after %d pivots (%d assignments, %d rows)", lp.pivots, len(assignments), len(rows))

    common = dict(
        constraint_labels=tuple(labels),
        assignment_count=len(assignments),
        pivots=lp.pivots,
        snap_distance=snap,
    )
    if lp.objective() == 0:
        weights = lp.primal()
        support = [(g, w) for g, w in zip(assignments, weights) if w > 0]
        witness = Dist(tuple(g for g, _ in support), dict(support))
        return FeasibilityResult(FEASIBLE, witness=witness, **common)
    certificate = lp.farkas_certificate()
    if not validate(exact_em)["consistent"]:
        # snapped contexts disagree, so the certificate must hold for the float tables too
        _, _, float_rhs = constraint_system(em, assignments)
        if not clears_snap_margin(certificate, float_rhs, denominator):
            raise ValidationError(
                f"float tables are too close to the contextual boundary to decide on the 1/{denominator} grid; "
                f"rerun with exact tables to decide"
            )
    return FeasibilityResult(INFEASIBLE, certificate=certificate, **common)


def check_certificate(
    em: EmpiricalModel,
    result: FeasibilityResult,
    cap: int = DEFAULTS["assignment_cap"],
    denominator: int = DEFAULTS["snap_denominator"],
) -> bool:
    """Independent Farkas sign check of an infeasibility certificate."""
    if result.certificate is None:
        return False
    exact_em, _ = rationalize(em, denominator)
    _, rows, rhs = constraint_system(exact_em, enumerate_assignments(em.scenario, cap))
    return farkas_check(rows, rhs, result.certificate)


def verify_witness(em: EmpiricalModel, witness: Dist, tolerance: float = None) -> bool:
    """True iff the witness marginalizes onto every context table.

    Exact comparison when both sides are exact, otherwise within
    `tolerance` (default: the model's tolerance).
    """
    names = em.scenario.names
    for g in witness.alphabet:
        if not isinstance(g, GlobalAssignment) or g.names != names:
            raise ScenarioMismatchError(f"witness entry {g!r} is not a global assignment of {list(names)!r}")
    mode = EXACT if em.mode == EXACT and witness.mode == EXACT else "float"
    tol = em.tol if tolerance is None else tolerance
    if not close(witness.total(), Fraction(1), mode, tol):
        return False
    for c in em.scenario.contexts:
        table = em.table(c)
        acc: Dict[Tuple[str, ...], Fraction] = {}
        for g, w in witness.items():
            key = g.restrict(c)
            acc[key] = acc.get(key, Fraction(0)) + w
        for o in table.outcomes():
            if not close(acc.get(o, Fraction(0)), table.cell(o), mode, tol):
                return False
    return True


def hidden_variable_model(em: EmpiricalModel, witness: Dist) -> SingleStateModel:
    """The deterministic hidden-variable model a feasible witness defines.

    Ontic states are the global assignments in the witness support, mu is
    the witness, and each context reads its observables off the assignment.
    """
    if not witness.alphabet:
        raise ValidationError("empty witness")
    states = [g.label() for g in witness.alphabet]
    by_label = dict(zip(states, witness.alphabet))
    mu = Dist(tuple(states), {g.label(): w for g, w in witness.items()}, witness.mode, witness.tol)
    contexts = [context_key(c) for c in em.scenario.contexts]
    outcome_alphabet: List[str] = []
    for c in em.scenario.contexts:
        for o in itertools.product(*(em.scenario.outcomes(n) for n in c)):
            if outcome_key(o) not in outcome_alphabet:
                outcome_alphabet.append(outcome_key(o))
    responses = point_responses(
        contexts,
        states,
        outcome_alphabet,
        lambda c, lam: outcome_key(by_label[lam].restrict(em.scenario.context_by_key(c))),
        witness.mode,
    )
    return SingleStateModel(
        ontic_space=tuple(states),
        preparation=mu,
        context_prior=Dist.uniform(contexts, witness.mode),
        responses=responses,
        outcome_alphabet=tuple(outcome_alphabet),
        scenario=em.scenario,
    )
