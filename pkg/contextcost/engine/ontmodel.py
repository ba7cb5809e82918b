from __future__ import annotations

import dataclasses
import itertools
from typing import Dict, Optional, Sequence

from engine.defaults import DEFAULTS
from engine.exceptions import ValidationError
from engine.infotheory import (
    EXACT,
    Dist,
    JointTable,
    conditional_mutual_information,
    entropy,
    extend,
    zero,
)
from engine.models import (
    EmpiricalModel,
    InterventionBit,
    Scenario,
    SingleStateModel,
    outcome_key,
    point_responses,
)

# variable names in the joint laws
C = "C"
LAMBDA = "lambda"
O = "O"
M = "M"

BINARY = ("0", "1")


def uniform_prior(contexts: Sequence[str], mode: str = EXACT) -> Dist:
    return Dist.uniform(tuple(contexts), mode)


def with_prior(m: SingleStateModel, prior: Dist) -> SingleStateModel:
    """Same model, different p(C)."""
    if set(prior.alphabet) != set(m.contexts):
        raise ValidationError(
            f"prior is over {list(prior.alphabet)!r}, model contexts are {list(m.contexts)!r}"
        )
    return dataclasses.replace(m, context_prior=prior)


def reproduce_statistics(m: SingleStateModel) -> Dict[str, Dist]:
    """p(o|c) = sum_lambda mu(lambda) xi(o|c,lambda), for every context."""
    stats = {}
    for c in m.contexts:
        acc = {o: zero(m.mode) for o in m.outcome_alphabet}
        for lam, mu in m.preparation.items():
            for o, q in m.response(c, lam).items():
                acc[o] += mu * q
        stats[c] = Dist(m.outcome_alphabet, acc, m.mode, m.tol)
    return stats


def joint_law(m: SingleStateModel) -> JointTable:
    """p(c, lambda, o) = p(c) mu(lambda) xi(o|c,lambda)."""
    m.require_complete()
    table = JointTable.from_dist(C, m.context_prior)
    table = extend(table, LAMBDA, m.ontic_space, lambda row: m.preparation)
    return extend(table, O, m.outcome_alphabet, lambda row: m.response(row[C], row[LAMBDA]))


def contextual_dependence(m: SingleStateModel, base: float = DEFAULTS["log_base"]) -> float:
    """I(C;O|lambda): what the context tells about the outcome beyond the ontic state."""
    return conditional_mutual_information(joint_law(m), C, O, LAMBDA, base)


def is_response_noncontextual(m: SingleStateModel) -> bool:
    """True iff xi(.|c,lambda) is the same for every context, for every lambda."""
    m.require_complete()
    for lam in m.ontic_space:
        first = m.response(m.contexts[0], lam)
        if not all(first.equals(m.response(c, lam)) for c in m.contexts[1:]):
            return False
    return True


def intervention_bit_entropy(f: InterventionBit, prior: Dist, base: float = DEFAULTS["log_base"]) -> float:
    """H(f(C)) for C ~ prior."""
    f.require_total(prior.alphabet)
    return entropy(prior.pushforward(f, alphabet=(0, 1)), base)


def xor_example(f: InterventionBit, prior: Optional[Dist] = None) -> SingleStateModel:
    """
    O = lambda XOR f(C) with a uniform ontic bit independent of C.
    Each context is a single binary observable named after the context.
    With prior=None, p(C) is uniform over the contexts f is defined on.
    """
    if prior is None:
        prior = uniform_prior(tuple(f.f))
    contexts = prior.alphabet
    f.require_total(contexts)
    responses = point_responses(
        contexts, BINARY, BINARY, lambda c, lam: str(int(lam) ^ f(c)), prior.mode
    )
    scenario = Scenario(
        observables=tuple((c, BINARY) for c in contexts),
        contexts=tuple((c,) for c in contexts),
    )
    return SingleStateModel(
        ontic_space=BINARY,
        preparation=Dist.uniform(BINARY, prior.mode),
        context_prior=prior,
        responses=responses,
        outcome_alphabet=BINARY,
        scenario=scenario,
    )


def empirical_model(m: SingleStateModel) -> EmpiricalModel:
    """reproduce_statistics() laid out as per-context tables over the model's scenario.

    Outcome labels of the model are the outcome keys ("0,1") of each context.
    """
    if m.scenario is None:
        raise ValidationError("model has no scenario; cannot lay its statistics out as tables")
    stats = reproduce_statistics(m)
    tables = {}
    for key, law in stats.items():
        context = m.scenario.context_by_key(key)
        variables = m.scenario.context_variables(context)
        outcomes = list(itertools.product(*(alphabet for _, alphabet in variables)))
        allowed = {outcome_key(o) for o in outcomes}
        stray = [s for s in law.support() if s not in allowed]
        if stray:
            raise ValidationError(f"context {key!r} gives mass to outcomes {stray!r} it cannot produce")
        cells = {o: law.mass.get(outcome_key(o), zero(m.mode)) for o in outcomes}
        tables[context] = JointTable(variables, cells, m.mode, m.tol)
    return EmpiricalModel(m.scenario, tables, m.tol)
