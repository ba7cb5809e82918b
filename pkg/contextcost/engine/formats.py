"""JSON model files.

Three file kinds share one encoding: probabilities are strings, either
"p/q" rationals (exact mode) or the shortest round-tripping decimal (float
mode); contexts are keyed by `context_key`, joint outcomes by `outcome_key`.
Dumps sort keys and list every cell, so dump -> parse -> dump is
byte-identical.

    empirical model   {"observables": [{"name", "outcomes"}], "contexts": [[names]],
                       "tables": {context-key: {outcome-key: prob}}}
    ontological model {"observables", "contexts", "lambda": [...], "mu": {lambda: prob},
                       "prior": {context-key: prob}, "responses": {context-key: {lambda: {outcome: prob}}}}
    channel           {"m_alphabet": [...], "p_m_given_c": {context-key: {m: prob}},
                       "response": {lambda: {m: {outcome: prob}}}}
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from engine.defaults import DEFAULTS
from engine.exceptions import FormatError, ValidationError
from engine.infotheory import EXACT, Dist, JointTable, Prob, to_prob, zero
from engine.models import (
    AuxChannel,
    EmpiricalModel,
    Scenario,
    SingleStateModel,
    context_key,
    outcome_key,
)


def format_prob(p: Prob) -> str:
    if isinstance(p, Fraction):
        return str(p)
    return repr(float(p))


def dumps(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, line=e.lineno, column=e.colno) from None
    if not isinstance(data, dict):
        raise FormatError("top level must be a JSON object")
    return data


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise FormatError(f"cannot read {path}: {e}") from None


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


###################
##### helpers #####
###################

def _key(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}[{json.dumps(key, ensure_ascii=False)}]"


def _field(data: dict, name: str, path: str, kind, required: bool = True):
    here = f"{path}.{name}"
    if name not in data:
        if required:
            raise FormatError("missing field", here)
        return None
    value = data[name]
    if not isinstance(value, kind):
        raise FormatError(f"expected {_kind_name(kind)}, got {type(value).__name__}", here)
    return value


def _kind_name(kind) -> str:
    return {dict: "object", list: "array", str: "string"}.get(kind, kind.__name__)


def _label(value, path: str, forbidden: str = "") -> str:
    if not isinstance(value, str) or not value:
        raise FormatError("expected a non-empty string", path)
    bad = [ch for ch in forbidden if ch in value]
    if bad:
        raise FormatError(f"{value!r} may not contain {bad[0]!r}", path)
    return value


def _labels(values, path: str, forbidden: str = "") -> Tuple[str, ...]:
    if not isinstance(values, list):
        raise FormatError("expected array", path)
    labels = tuple(_label(v, _key(path, i), forbidden) for i, v in enumerate(values))
    if len(set(labels)) != len(labels):
        raise FormatError("duplicate entries", path)
    return labels


def _prob(value, path: str, mode: str, tol: float) -> Prob:
    if not isinstance(value, (str, int, float)) or isinstance(value, bool):
        raise FormatError(f"expected a probability string, got {type(value).__name__}", path)
    try:
        p = to_prob(value, mode)
    except ValidationError as e:
        raise FormatError(str(e), path) from None
    if p < 0 or p > (1 if mode == EXACT else 1 + tol):
        raise FormatError(f"probability {format_prob(p)} outside [0, 1]", path)
    return p


def _dist(data, alphabet: Sequence[str], path: str, mode: str, tol: float, what: str) -> Dist:
    """Dense Dist over `alphabet`; absent symbols get 0, unknown ones are an error."""
    if not isinstance(data, dict):
        raise FormatError("expected object", path)
    mass = {s: zero(mode) for s in alphabet}
    for symbol, value in data.items():
        if symbol not in mass:
            raise FormatError(f"unknown symbol {symbol!r}; expected one of {list(alphabet)!r}", _key(path, symbol))
        mass[symbol] = _prob(value, _key(path, symbol), mode, tol)
    d = Dist(tuple(alphabet), mass, mode, tol)
    if not d.is_normalized():
        raise FormatError(f"{what} sums to {format_prob(d.total())}, not 1", path)
    return d


def _dump_dist(d: Dist) -> Dict[str, str]:
    return {str(s): format_prob(p) for s, p in d.items()}


##########################
##### scenario block #####
##########################

def parse_scenario(data: dict, path: str = "$") -> Scenario:
    raw = _field(data, "observables", path, list)
    observables = []
    for i, entry in enumerate(raw):
        here = _key(f"{path}.observables", i)
        if not isinstance(entry, dict):
            raise FormatError("expected object with name and outcomes", here)
        name = _label(entry.get("name"), f"{here}.name", forbidden="|")
        outcomes = _labels(entry.get("outcomes"), f"{here}.outcomes", forbidden=",")
        observables.append((name, outcomes))
    raw_contexts = _field(data, "contexts", path, list)
    contexts = [_labels(c, _key(f"{path}.contexts", i)) for i, c in enumerate(raw_contexts)]
    try:
        return Scenario(tuple(observables), tuple(contexts))
    except ValidationError as e:
        raise FormatError(str(e), path) from None


def dump_scenario(scenario: Scenario) -> dict:
    return {
        "observables": [{"name": n, "outcomes": list(outs)} for n, outs in scenario.observables],
        "contexts": [list(c) for c in scenario.contexts],
    }


def _outcome_alphabet(scenario: Scenario) -> Tuple[str, ...]:
    """Outcome keys of every context, first appearance order."""
    keys: List[str] = []
    for c in scenario.contexts:
        for o in itertools.product(*(scenario.outcomes(n) for n in c)):
            if outcome_key(o) not in keys:
                keys.append(outcome_key(o))
    return tuple(keys)


###########################
##### empirical model #####
###########################

def parse_empirical_model(text: str, mode: str = DEFAULTS["mode"], tol: float = DEFAULTS["tolerance"]) -> EmpiricalModel:
    """Tables are not required to be normalized or consistent here; `scenario.validate` reports that."""
    data = loads(text)
    scenario = parse_scenario(data)
    raw = _field(data, "tables", "$", dict)
    tables = {}
    for key, cells in raw.items():
        here = _key("$.tables", key)
        try:
            context = scenario.context_by_key(key)
        except ValidationError:
            raise FormatError(f"no context named {key!r}", here) from None
        if not isinstance(cells, dict):
            raise FormatError("expected object", here)
        variables = scenario.context_variables(context)
        parsed = {}
        for okey, value in cells.items():
            outcome = tuple(okey.split(","))
            if len(outcome) != len(context) or any(o not in a for o, (_, a) in zip(outcome, variables)):
                raise FormatError(f"{okey!r} is not an outcome of {list(context)!r}", _key(here, okey))
            parsed[outcome] = _prob(value, _key(here, okey), mode, tol)
        tables[context] = JointTable(variables, parsed, mode, tol)
    return EmpiricalModel(scenario, tables, tol)


def dump_empirical_model(em: EmpiricalModel) -> str:
    data = dump_scenario(em.scenario)
    data["tables"] = {
        context_key(c): {outcome_key(o): format_prob(t.cell(o)) for o in t.outcomes()}
        for c, t in em.tables.items()
    }
    return dumps(data)


def read_empirical_model(path, mode: str = DEFAULTS["mode"], tol: float = DEFAULTS["tolerance"]) -> EmpiricalModel:
    return parse_empirical_model(read_text(path), mode, tol)


#############################
##### ontological model #####
#############################

def parse_ontological_model(text: str, mode: str = DEFAULTS["mode"], tol: float = DEFAULTS["tolerance"]) -> SingleStateModel:
    """Without a "prior" field, p(C) is uniform over the contexts."""
    data = loads(text)
    scenario = parse_scenario(data)
    contexts = tuple(context_key(c) for c in scenario.contexts)
    outcomes = _outcome_alphabet(scenario)
    ontic_space = _labels(_field(data, "lambda", "$", list), "$.lambda")
    if not ontic_space:
        raise FormatError("empty ontic space", "$.lambda")
    mu = _dist(_field(data, "mu", "$", dict), ontic_space, "$.mu", mode, tol, "mu")
    raw_prior = _field(data, "prior", "$", dict, required=False)
    if raw_prior is None:
        prior = Dist.uniform(contexts, mode, tol)
    else:
        prior = _dist(raw_prior, contexts, "$.prior", mode, tol, "prior")

    raw = _field(data, "responses", "$", dict)
    responses = {}
    for c in contexts:
        here = _key("$.responses", c)
        per_context = raw.get(c)
        if not isinstance(per_context, dict):
            raise FormatError("missing responses for this context", here)
        for lam in ontic_space:
            if lam not in per_context:
                raise FormatError(f"missing response for lambda {lam!r}", here)
            responses[(c, lam)] = _dist(per_context[lam], outcomes, _key(here, lam), mode, tol, "response")
        stray = [lam for lam in per_context if lam not in ontic_space]
        if stray:
            raise FormatError(f"unknown ontic states {stray!r}", here)
    stray = [c for c in raw if c not in contexts]
    if stray:
        raise FormatError(f"unknown contexts {stray!r}", "$.responses")
    return SingleStateModel(ontic_space, mu, prior, responses, outcomes, scenario)


def dump_ontological_model(m: SingleStateModel) -> str:
    if m.scenario is None:
        raise ValidationError("model has no scenario to write")
    data = dump_scenario(m.scenario)
    data["lambda"] = list(m.ontic_space)
    data["mu"] = _dump_dist(m.preparation)
    data["prior"] = _dump_dist(m.context_prior)
    data["responses"] = {
        c: {lam: _dump_dist(m.response(c, lam)) for lam in m.ontic_space}
        for c in m.contexts
    }
    return dumps(data)


def read_ontological_model(path, mode: str = DEFAULTS["mode"], tol: float = DEFAULTS["tolerance"]) -> SingleStateModel:
    return parse_ontological_model(read_text(path), mode, tol)


def parse_prior(text: str, contexts: Sequence[str], mode: str = DEFAULTS["mode"], tol: float = DEFAULTS["tolerance"]) -> Dist:
    """{context-key: prob}; contexts left out get 0."""
    return _dist(loads(text), tuple(contexts), "$", mode, tol, "prior")


def read_prior(path, contexts: Sequence[str], mode: str = DEFAULTS["mode"], tol: float = DEFAULTS["tolerance"]) -> Dist:
    return parse_prior(read_text(path), contexts, mode, tol)


###################
##### channel #####
###################

def parse_channel(
    text: str,
    outcome_alphabet: Optional[Sequence[str]] = None,
    mode: str = DEFAULTS["mode"],
    tol: float = DEFAULTS["tolerance"],
) -> AuxChannel:
    """
    Response laws are read over `outcome_alphabet` when given (the model's
    outcomes), otherwise over the outcomes the file itself names.
    """
    data = loads(text)
    m_alphabet = _labels(_field(data, "m_alphabet", "$", list), "$.m_alphabet")
    if not m_alphabet:
        raise FormatError("empty M alphabet", "$.m_alphabet")
    raw_pm = _field(data, "p_m_given_c", "$", dict)
    context_to_m = {
        c: _dist(law, m_alphabet, _key("$.p_m_given_c", c), mode, tol, "p(m|c)")
        for c, law in raw_pm.items()
    }

    raw = _field(data, "response", "$", dict)
    if outcome_alphabet is None:
        seen: List[str] = []
        for per_lambda in raw.values():
            for law in (per_lambda.values() if isinstance(per_lambda, dict) else ()):
                for o in (law if isinstance(law, dict) else ()):
                    if o not in seen:
                        seen.append(o)
        outcome_alphabet = tuple(sorted(seen))
    mediated = {}
    for lam, per_lambda in raw.items():
        here = _key("$.response", lam)
        if not isinstance(per_lambda, dict):
            raise FormatError("expected object", here)
        for label, law in per_lambda.items():
            if label not in m_alphabet:
                raise FormatError(f"unknown M label {label!r}", _key(here, label))
            mediated[(lam, label)] = _dist(law, tuple(outcome_alphabet), _key(here, label), mode, tol, "response")
    return AuxChannel(m_alphabet, context_to_m, mediated)


def dump_channel(ch: AuxChannel) -> str:
    response: Dict[str, Dict[str, Dict[str, str]]] = {}
    for (lam, label), law in ch.mediated_response.items():
        response.setdefault(str(lam), {})[str(label)] = _dump_dist(law)
    return dumps({
        "m_alphabet": [str(label) for label in ch.m_alphabet],
        "p_m_given_c": {c: _dump_dist(law) for c, law in ch.context_to_m.items()},
        "response": response,
    })


def read_channel(
    path,
    outcome_alphabet: Optional[Sequence[str]] = None,
    mode: str = DEFAULTS["mode"],
    tol: float = DEFAULTS["tolerance"],
) -> AuxChannel:
    return parse_channel(read_text(path), outcome_alphabet, mode, tol)
