"""Random models for the seeded suites.

Every generator takes a `random.Random`; `seeded_rng()` builds one from
settings.CONTEXTCOST["SEED"] (env CONTEXTCOST_SEED) so failures reproduce.
"""

import itertools
import random
from fractions import Fraction

from django.conf import settings

from engine.infotheory import Dist, JointTable
from engine.models import AuxChannel, EmpiricalModel, InterventionBit, Scenario, SingleStateModel, point_responses

BINARY = ("0", "1")


def seeded_rng(offset: int = 0) -> random.Random:
    return random.Random(settings.CONTEXTCOST["SEED"] + offset)


def random_dist(rng: random.Random, alphabet, denominator: int = 6, minimum: int = 0) -> Dist:
    """Exact distribution with small integer weights; zeros allowed unless minimum > 0."""
    alphabet = tuple(alphabet)
    weights = [rng.randint(minimum, denominator) for _ in alphabet]
    if not any(weights):
        weights[rng.randrange(len(weights))] = 1
    total = sum(weights)
    return Dist(alphabet, {s: Fraction(w, total) for s, w in zip(alphabet, weights)})


def random_model_and_channel(rng: random.Random, max_lambda: int = 4, max_contexts: int = 4, max_m: int = 3):
    """A channel first, then the responses it induces, so mediation holds exactly."""
    contexts = tuple(f"c{i}" for i in range(rng.randint(1, max_contexts)))
    ontic = tuple(f"l{i}" for i in range(rng.randint(1, max_lambda)))
    labels = tuple(f"m{i}" for i in range(rng.randint(1, max_m)))

    p_m = {c: random_dist(rng, labels) for c in contexts}
    mediated = {(lam, m): random_dist(rng, BINARY) for lam in ontic for m in labels}
    channel = AuxChannel(labels, p_m, mediated)

    responses = {}
    for c in contexts:
        for lam in ontic:
            mass = {o: sum(p_m[c][m] * mediated[(lam, m)][o] for m in labels) for o in BINARY}
            responses[(c, lam)] = Dist(BINARY, mass)
    model = SingleStateModel(
        ontic_space=ontic,
        preparation=random_dist(rng, ontic),
        context_prior=random_dist(rng, contexts),
        responses=responses,
        outcome_alphabet=BINARY,
    )
    return model, channel


def random_intervention_bit(rng: random.Random, contexts) -> InterventionBit:
    return InterventionBit({c: rng.randint(0, 1) for c in contexts})


def random_single_state_model(
    rng: random.Random,
    contexts: int = 3,
    ontic: int = 4,
    outcomes=BINARY,
    deterministic: bool = False,
    copied: bool = False,
) -> SingleStateModel:
    """Full-support prior and preparation.

    copied=True gives every context the responses of the first one.
    """
    names = tuple(f"c{i}" for i in range(contexts))
    states = tuple(f"l{i}" for i in range(ontic))
    outcomes = tuple(outcomes)

    def draw():
        if deterministic:
            return Dist.point(outcomes, rng.choice(outcomes))
        return random_dist(rng, outcomes)

    first = {lam: draw() for lam in states}
    responses = {
        (c, lam): first[lam] if copied or c == names[0] else draw()
        for c in names
        for lam in states
    }
    return SingleStateModel(
        ontic_space=states,
        preparation=random_dist(rng, states, minimum=1),
        context_prior=random_dist(rng, names, minimum=1),
        responses=responses,
        outcome_alphabet=outcomes,
    )


def correlated_pair(same: Fraction) -> dict:
    """Two bits with uniform marginals that agree with probability `same`."""
    return {
        ("0", "0"): same / 2, ("1", "1"): same / 2,
        ("0", "1"): (1 - same) / 2, ("1", "0"): (1 - same) / 2,
    }


def random_cycle_model(rng: random.Random) -> EmpiricalModel:
    """Three bits measured pairwise around a triangle, each edge with its own correlation."""
    scenario = Scenario(
        observables=(("o1", BINARY), ("o2", BINARY), ("o3", BINARY)),
        contexts=(("o1", "o2"), ("o2", "o3"), ("o3", "o1")),
    )
    tables = {
        c: JointTable(scenario.context_variables(c), correlated_pair(Fraction(rng.randint(0, 8), 8)))
        for c in scenario.contexts
    }
    return EmpiricalModel(scenario, tables)


def random_global_model(rng: random.Random, observables: int) -> EmpiricalModel:
    """Marginals of a random global distribution, over random contexts; always feasible."""
    names = tuple(f"o{i + 1}" for i in range(observables))
    scenario_contexts = [c for r in (1, 2) for c in itertools.combinations(names, r)]
    contexts = tuple(rng.sample(scenario_contexts, rng.randint(1, len(scenario_contexts))))
    scenario = Scenario(tuple((n, BINARY) for n in names), contexts)
    joint = random_dist(rng, list(itertools.product(BINARY, repeat=observables)))
    tables = {}
    for c in contexts:
        idx = [names.index(n) for n in c]
        cells = {}
        for g, p in joint.items():
            key = tuple(g[i] for i in idx)
            cells[key] = cells.get(key, 0) + p
        tables[c] = JointTable(scenario.context_variables(c), cells)
    return EmpiricalModel(scenario, tables)


def random_binary_model(rng: random.Random) -> EmpiricalModel:
    """Mix of feasible and infeasible 2- and 3-observable binary scenarios."""
    kind = rng.randrange(3)
    if kind == 0:
        return random_cycle_model(rng)
    return random_global_model(rng, observables=2 + kind - 1)


def constant_model(contexts=("c1", "c2")) -> SingleStateModel:
    """O = lambda whatever the context."""
    return SingleStateModel(
        ontic_space=BINARY,
        preparation=Dist.uniform(BINARY),
        context_prior=Dist.uniform(contexts),
        responses=point_responses(contexts, BINARY, BINARY, lambda c, lam: lam),
        outcome_alphabet=BINARY,
    )


def constant_channel(contexts=("c1", "c2")) -> AuxChannel:
    """M = 0 everywhere, response lambda XOR m: cannot carry f(C)."""
    return AuxChannel(
        BINARY,
        {c: Dist.point(BINARY, "0") for c in contexts},
        {(lam, m): Dist.point(BINARY, str(int(lam) ^ int(m))) for lam in BINARY for m in BINARY},
    )
