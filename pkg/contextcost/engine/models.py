from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, Mapping, Optional, Tuple

from engine.defaults import DEFAULTS
from engine.exceptions import ModelIncompleteError, ValidationError
from engine.infotheory import EXACT, FLOAT, Dist, JointTable

Context = Tuple[str, ...]


def context_key(context: Context) -> str:
    """Canonical name of a context: observable names joined by "|"."""
    return "|".join(context)


def outcome_key(outcome: Tuple[str, ...]) -> str:
    """Canonical name of a joint outcome: symbols joined by ","."""
    return ",".join(str(o) for o in outcome)


@dataclass(frozen=True)
class Scenario:
    observables: Tuple[Tuple[str, Tuple[str, ...]], ...]  # (name, outcome alphabet)
    contexts: Tuple[Context, ...]                          # jointly measured subsets

    def __post_init__(self):
        observables = tuple((str(n), tuple(str(o) for o in outs)) for n, outs in self.observables)
        names = [n for n, _ in observables]
        if not names:
            raise ValidationError("scenario declares no observables")
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate observable names in {names!r}")
        for name, outcomes in observables:
            if not outcomes:
                raise ValidationError(f"observable {name!r} has no outcomes")
            if len(set(outcomes)) != len(outcomes):
                raise ValidationError(f"observable {name!r} repeats an outcome")
        contexts = tuple(tuple(str(n) for n in c) for c in self.contexts)
        seen = set()
        for c in contexts:
            if not c:
                raise ValidationError("empty context")
            if len(set(c)) != len(c):
                raise ValidationError(f"context {list(c)!r} repeats an observable")
            unknown = [n for n in c if n not in names]
            if unknown:
                raise ValidationError(f"context {list(c)!r} uses undeclared observables {unknown!r}")
            if frozenset(c) in seen:
                raise ValidationError(f"duplicate context {list(c)!r}")
            seen.add(frozenset(c))
        object.__setattr__(self, "observables", observables)
        object.__setattr__(self, "contexts", contexts)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.observables)

    def outcomes(self, name: str) -> Tuple[str, ...]:
        for n, outs in self.observables:
            if n == name:
                return outs
        raise ValidationError(f"unknown observable {name!r}")

    def context_variables(self, context: Context) -> Tuple[Tuple[str, Tuple[str, ...]], ...]:
        return tuple((n, self.outcomes(n)) for n in context)

    def context_by_key(self, key: str) -> Context:
        for c in self.contexts:
            if context_key(c) == key:
                return c
        raise ValidationError(f"unknown context {key!r}")

    def shared(self, a: Context, b: Context) -> Tuple[str, ...]:
        """Observables in both contexts, in declaration order."""
        return tuple(n for n in self.names if n in a and n in b)


@dataclass(frozen=True)
class EmpiricalModel:
    """One table per context over exactly that context's observables.

    Normalization and no-disturbance are not enforced here; see
    `engine.scenario.validate`.
    """

    scenario: Scenario
    tables: Mapping[Context, JointTable]
    tol: float = DEFAULTS["tolerance"]

    def __post_init__(self):
        tables = {tuple(c): t for c, t in self.tables.items()}
        known = set(self.scenario.contexts)
        stray = [list(c) for c in tables if c not in known]
        if stray:
            raise ValidationError(f"tables given for contexts not in the scenario: {stray!r}")
        object.__setattr__(self, "tables", tables)

    @property
    def mode(self) -> str:
        return EXACT if all(t.mode == EXACT for t in self.tables.values()) else FLOAT

    def table(self, context: Context) -> JointTable:
        try:
            return self.tables[tuple(context)]
        except KeyError:
            raise ValidationError(f"no table for context {context_key(context)!r}") from None


@dataclass(frozen=True)
class SingleStateModel:
    """Finite ontological model with one ontic space shared by every context.

    The joint law is p(c) mu(lambda) xi(o|c,lambda): C and lambda are
    independent, and Lambda is never indexed by the context.
    """

    ontic_space: Tuple[str, ...]
    preparation: Dist                              # mu(lambda)
    context_prior: Dist                            # p(C)
    responses: Mapping[Tuple[str, str], Dist]      # (context, lambda) -> xi(.|c,lambda)
    outcome_alphabet: Tuple[str, ...]
    scenario: Optional[Scenario] = field(default=None, compare=False)

    def __post_init__(self):
        ontic_space = tuple(self.ontic_space)
        outcome_alphabet = tuple(self.outcome_alphabet)
        if not ontic_space:
            raise ValidationError("empty ontic space")
        if set(self.preparation.alphabet) != set(ontic_space):
            raise ValidationError("preparation is not a distribution over the ontic space")
        self.preparation.require_normalized("preparation mu")
        self.context_prior.require_normalized("context prior")
        contexts = set(self.context_prior.alphabet)
        responses = {}
        for (c, lam), xi in self.responses.items():
            if c not in contexts:
                raise ValidationError(f"response given for unknown context {c!r}")
            if lam not in ontic_space:
                raise ValidationError(f"response given for unknown ontic state {lam!r}")
            if set(xi.alphabet) != set(outcome_alphabet):
                raise ValidationError(f"response for ({c!r}, {lam!r}) is not over the outcome alphabet")
            xi.require_normalized(f"response xi(.|{c},{lam})")
            responses[(c, lam)] = xi
        if self.scenario is not None:
            keys = {context_key(c) for c in self.scenario.contexts}
            if contexts - keys:
                raise ValidationError(f"contexts {sorted(contexts - keys)!r} are not in the scenario")
        object.__setattr__(self, "ontic_space", ontic_space)
        object.__setattr__(self, "outcome_alphabet", outcome_alphabet)
        object.__setattr__(self, "responses", responses)

    @property
    def contexts(self) -> Tuple[str, ...]:
        return self.context_prior.alphabet

    @property
    def mode(self) -> str:
        dists = [self.preparation, self.context_prior, *self.responses.values()]
        return EXACT if all(d.mode == EXACT for d in dists) else FLOAT

    @property
    def tol(self) -> float:
        return self.preparation.tol

    def response(self, context: str, lam: str) -> Dist:
        try:
            return self.responses[(context, lam)]
        except KeyError:
            raise ModelIncompleteError(context, lam) from None

    def require_complete(self) -> None:
        for c in self.contexts:
            for lam in self.ontic_space:
                self.response(c, lam)


@dataclass(frozen=True)
class InterventionBit:
    """f(C) in {0, 1}."""

    f: Mapping[str, int]

    def __post_init__(self):
        bad = {c: b for c, b in self.f.items() if b not in (0, 1)}
        if bad:
            raise ValidationError(f"intervention bit must be 0 or 1, got {bad!r}")
        object.__setattr__(self, "f", dict(self.f))

    def __call__(self, context: str) -> int:
        try:
            return self.f[context]
        except KeyError:
            raise ValidationError(f"intervention bit undefined on context {context!r}") from None

    def require_total(self, contexts) -> None:
        missing = [c for c in contexts if c not in self.f]
        if missing:
            raise ValidationError(f"intervention bit undefined on contexts {missing!r}")


@dataclass(frozen=True)
class AuxChannel:
    """Auxiliary contextual variable M: C -> M, then (lambda, M) -> O.

    The mediated response takes no context argument, so
    p(o|lambda,M,C) = p(o|lambda,M) holds by construction.
    """

    m_alphabet: Tuple[Hashable, ...]
    context_to_m: Mapping[str, Dist]                       # p(m|c)
    mediated_response: Mapping[Tuple[str, Hashable], Dist]  # (lambda, m) -> p(o|lambda,m)

    def __post_init__(self):
        m_alphabet = tuple(self.m_alphabet)
        if not m_alphabet:
            raise ValidationError("empty M alphabet")
        for c, law in self.context_to_m.items():
            if set(law.alphabet) != set(m_alphabet):
                raise ValidationError(f"p(m|{c}) is not over the M alphabet")
            law.require_normalized(f"p(m|{c})")
        for (lam, m), law in self.mediated_response.items():
            if m not in m_alphabet:
                raise ValidationError(f"mediated response given for unknown m={m!r}")
            law.require_normalized(f"p(o|{lam},{m})")
        object.__setattr__(self, "m_alphabet", m_alphabet)
        object.__setattr__(self, "context_to_m", dict(self.context_to_m))
        object.__setattr__(self, "mediated_response", dict(self.mediated_response))

    def p_m(self, context: str) -> Dist:
        try:
            return self.context_to_m[context]
        except KeyError:
            raise ModelIncompleteError(context, "*") from None

    def response(self, lam: str, m: Hashable) -> Dist:
        try:
            return self.mediated_response[(lam, m)]
        except KeyError:
            raise ModelIncompleteError(f"m={m}", lam) from None


def point_responses(contexts, ontic_space, outcome_alphabet, rule, mode: str = EXACT) -> Dict[Tuple[str, str], Dist]:
    """Deterministic responses xi(o|c,lambda) = 1 iff o == rule(c, lambda)."""
    return {
        (c, lam): Dist.point(outcome_alphabet, rule(c, lam), mode)
        for c in contexts
        for lam in ontic_space
    }
