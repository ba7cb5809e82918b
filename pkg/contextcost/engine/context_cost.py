"""Auxiliary contextual variable M and the information cost H(M).

A channel C -> M with a mediated response p(o|lambda, m) must reproduce
the model's responses: sum_m p(m|c) p(o|lambda,m) = xi(o|c,lambda). For any
such channel

    I(C;O|lambda) <= I(C;M|lambda) <= H(M).

`minimal_deterministic_cost` searches only channels M = g(C): the coarsest
partition of contexts into identical response families is the cheapest of
those. Whether a stochastic M can go lower is left open; reports show the
deterministic minimum next to the lower bound I(C;O|lambda).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Tuple

from engine.defaults import DEFAULTS
from engine.exceptions import MediationError, ScenarioMismatchError
from engine.infotheory import (
    EXACT,
    FLOAT,
    Dist,
    JointTable,
    Prob,
    conditional_mutual_information,
    extend,
    joint_entropy,
    zero,
)
from engine.models import AuxChannel, InterventionBit, SingleStateModel
from engine.ontmodel import BINARY, C, LAMBDA, M, O, contextual_dependence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CostReport:
    i_c_o_given_lambda: float
    i_c_m_given_lambda: float
    h_m: float
    bound_satisfied: bool          # h_m >= i_c_o_given_lambda - bound tolerance
    saturated: bool                # |h_m - i_c_o_given_lambda| <= saturation tolerance
    reproduction_max_deviation: Prob
    chain_satisfied: bool          # I(C;O|lambda) <= I(C;M|lambda) <= H(M)
    prior: Dict[str, Prob] = field(default_factory=dict)


def _channel_mode(ch: AuxChannel) -> str:
    dists = [*ch.context_to_m.values(), *ch.mediated_response.values()]
    return EXACT if all(d.mode == EXACT for d in dists) else FLOAT


def _check_structure(m: SingleStateModel, ch: AuxChannel) -> None:
    if set(ch.context_to_m) != set(m.contexts):
        raise ScenarioMismatchError(
            f"channel is defined on contexts {sorted(ch.context_to_m)!r}, model has {list(m.contexts)!r}"
        )
    for (lam, label), law in ch.mediated_response.items():
        if lam not in m.ontic_space:
            raise ScenarioMismatchError(f"channel response given for unknown ontic state {lam!r}")
        if set(law.alphabet) != set(m.outcome_alphabet):
            raise ScenarioMismatchError(
                f"channel response for ({lam!r}, {label!r}) is over {list(law.alphabet)!r}, "
                f"model outcomes are {list(m.outcome_alphabet)!r}"
            )


def check_mediation(m: SingleStateModel, ch: AuxChannel) -> dict:
    """
    Compares sum_m p(m|c) p(o|lambda,m) against xi(o|c,lambda) on every cell.
    Returns {"mediates", "max_deviation", "worst_cell", "alerts"}.
    """
    _check_structure(m, ch)
    exact = m.mode == EXACT and _channel_mode(ch) == EXACT
    mode = EXACT if exact else FLOAT
    max_deviation = zero(mode)
    worst = None
    for c in m.contexts:
        p_m = ch.p_m(c)
        for lam in m.ontic_space:
            xi = m.response(c, lam)
            mixed = {o: zero(mode) for o in m.outcome_alphabet}
            for label, weight in p_m.items():
                if not weight:
                    continue
                for o, q in ch.response(lam, label).items():
                    mixed[o] += weight * q
            for o in m.outcome_alphabet:
                deviation = abs(mixed[o] - xi[o])
                if worst is None or deviation > max_deviation:
                    max_deviation = deviation
                    worst = {"context": c, "lambda": lam, "outcome": o}
    mediates = max_deviation == 0 if exact else max_deviation <= m.tol
    alerts = []
    if not mediates:
        alerts.append({
            "code": "MEDIATION",
            "message": (
                f"Channel gives p(o={worst['outcome']}|c={worst['context']},lambda={worst['lambda']}) "
                f"off by {max_deviation}."
            ),
            **worst,
            "deviation": max_deviation,
        })
    return {
        "mediates": mediates,
        "max_deviation": max_deviation,
        "worst_cell": worst,
        "alerts": alerts,
    }


def _require_mediation(m: SingleStateModel, ch: AuxChannel) -> dict:
    report = check_mediation(m, ch)
    if not report["mediates"]:
        raise MediationError(report)
    return report


def extended_joint_law(m: SingleStateModel, ch: AuxChannel) -> JointTable:
    """p(c, lambda, m, o) = p(c) mu(lambda) p(m|c) p(o|lambda,m)."""
    m.require_complete()
    table = JointTable.from_dist(C, m.context_prior)
    table = extend(table, LAMBDA, m.ontic_space, lambda row: m.preparation)
    table = extend(table, M, ch.m_alphabet, lambda row: ch.p_m(row[C]))
    return extend(table, O, m.outcome_alphabet, lambda row: ch.response(row[LAMBDA], row[M]))


def channel_cost(m: SingleStateModel, ch: AuxChannel, base: float = DEFAULTS["log_base"]) -> float:
    """H(M) with p(m) = sum_c p(c) p(m|c). Refuses channels that do not mediate."""
    _require_mediation(m, ch)
    return joint_entropy(extended_joint_law(m, ch), M, base)


def verify_bound(
    m: SingleStateModel,
    ch: AuxChannel,
    base: float = DEFAULTS["log_base"],
    bound_tolerance: float = DEFAULTS["bound_tolerance"],
    saturation_tolerance: float = DEFAULTS["saturation_tolerance"],
) -> CostReport:
    mediation = _require_mediation(m, ch)
    i_co = contextual_dependence(m, base)
    extended = extended_joint_law(m, ch)
    i_cm = conditional_mutual_information(extended, C, M, LAMBDA, base)
    h_m = joint_entropy(extended, M, base)

    chain = i_co <= i_cm + bound_tolerance and i_cm <= h_m + bound_tolerance
    if not chain:
        logger.error(
            "information chain violated: I(C;O|lambda)=%.12g, I(C;M|lambda)=%.12g, H(M)=%.12g",
            i_co, i_cm, h_m,
        )
    return CostReport(
        i_c_o_given_lambda=i_co,
        i_c_m_given_lambda=i_cm,
        h_m=h_m,
        bound_satisfied=h_m >= i_co - bound_tolerance,
        saturated=abs(h_m - i_co) <= saturation_tolerance,
        reproduction_max_deviation=mediation["max_deviation"],
        chain_satisfied=chain,
        prior=dict(m.context_prior.items()),
    )


def response_partition(m: SingleStateModel) -> List[List[str]]:
    """Contexts grouped by identical response families xi(.|c,.), in context order.

    Exact comparison in exact mode; within the model tolerance in float mode.
    """
    m.require_complete()
    if m.mode != EXACT:
        logger.warning(
            "float mode: contexts whose responses agree within %g are merged, "
            "so the reported cost may be below the exact one",
            m.tol,
        )
    cells: List[List[str]] = []
    for c in m.contexts:
        for cell in cells:
            head = cell[0]
            if all(m.response(head, lam).equals(m.response(c, lam)) for lam in m.ontic_space):
                cell.append(c)
                break
        else:
            cells.append([c])
    return cells


def deterministic_channel(
    m: SingleStateModel, g: Mapping[str, Hashable], m_alphabet: Optional[Tuple[Hashable, ...]] = None
) -> AuxChannel:
    """M = g(C). Each label answers with the response family of its first context."""
    if m_alphabet is None:
        m_alphabet = tuple(dict.fromkeys(g[c] for c in m.contexts))
    representative: Dict[Hashable, str] = {}
    for c in m.contexts:
        representative.setdefault(g[c], c)
    mode = m.mode
    context_to_m = {c: Dist.point(m_alphabet, g[c], mode) for c in m.contexts}
    mediated_response = {
        (lam, label): m.response(representative[label], lam)
        for label in m_alphabet
        if label in representative
        for lam in m.ontic_space
    }
    return AuxChannel(m_alphabet, context_to_m, mediated_response)


def identity_channel(m: SingleStateModel) -> AuxChannel:
    """M = C."""
    return deterministic_channel(m, {c: c for c in m.contexts})


def xor_channel(f: InterventionBit) -> AuxChannel:
    """M = f(C) with p(o|lambda,m) = 1 iff o = lambda XOR m."""
    context_to_m = {c: Dist.point(BINARY, str(bit)) for c, bit in f.f.items()}
    mediated_response = {
        (lam, m): Dist.point(BINARY, str(int(lam) ^ int(m)))
        for lam in BINARY
        for m in BINARY
    }
    return AuxChannel(BINARY, context_to_m, mediated_response)


def minimal_deterministic_cost(
    m: SingleStateModel,
    base: float = DEFAULTS["log_base"],
    bound_tolerance: float = DEFAULTS["bound_tolerance"],
    saturation_tolerance: float = DEFAULTS["saturation_tolerance"],
) -> Tuple[AuxChannel, CostReport]:
    """Cheapest M = g(C) that mediates: one label per cell of response_partition()."""
    cells = response_partition(m)
    g = {c: f"m{k}" for k, cell in enumerate(cells) for c in cell}
    channel = deterministic_channel(m, g)
    return channel, verify_bound(m, channel, base, bound_tolerance, saturation_tolerance)
