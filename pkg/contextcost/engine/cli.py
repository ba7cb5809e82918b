"""Commands behind `manage.py analyze | cost | verify | examples`.

Each cmd_* returns (exit code, report dict); the management commands only
parse flags, render the report and exit. Exit codes:

    0   feasible / bound holds
    2   invalid input
    10  no global joint distribution (contextual)
    11  channel does not mediate the model
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from engine import formats
from engine.context_cost import (
    CostReport,
    check_mediation,
    minimal_deterministic_cost,
    verify_bound,
    xor_channel,
)
from engine.defaults import DEFAULTS, MODES, OUTPUT_FORMATS
from engine.exceptions import ContextCostError, ValidationError
from engine.infotheory import Dist
from engine.marginal_solver import (
    FeasibilityResult,
    GlobalAssignment,
    check_certificate,
    global_joint_exists,
    rationalize,
    verify_witness,
)
from engine.models import EmpiricalModel, InterventionBit, SingleStateModel
from engine.ontmodel import (
    contextual_dependence,
    is_response_noncontextual,
    uniform_prior,
    with_prior,
    xor_example,
)
from engine.quantum_witness import CHSH_CONTEXTS, chsh_model, chsh_value
from engine.scenario import triangle_example, validate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CONTEXTUAL = 10
EXIT_MEDIATION_FAILED = 11

EXAMPLES = ("xor", "triangle", "chsh")

# settings.CONTEXTCOST key -> RunConfig field
_SETTINGS_KEYS = {
    "MODE": "mode",
    "TOL": "tolerance",
    "CAP": "assignment_cap",
    "FORMAT": "output_format",
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    mode: str = DEFAULTS["mode"]
    tolerance: float = DEFAULTS["tolerance"]
    log_base: float = DEFAULTS["log_base"]
    prior: Optional[str] = None            # None (file prior) | "uniform" | path to {context: prob}
    assignment_cap: int = DEFAULTS["assignment_cap"]
    output_format: str = DEFAULTS["output_format"]
    snap_denominator: int = DEFAULTS["snap_denominator"]
    bound_tolerance: float = DEFAULTS["bound_tolerance"]
    saturation_tolerance: float = DEFAULTS["saturation_tolerance"]
    significant_digits: int = DEFAULTS["significant_digits"]

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {list(MODES)}, got {self.mode!r}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValidationError(f"format must be one of {list(OUTPUT_FORMATS)}, got {self.output_format!r}")
        if not self.tolerance > 0:
            raise ValidationError(f"tolerance must be > 0, got {self.tolerance}")
        if self.assignment_cap < 1:
            raise ValidationError(f"assignment cap must be >= 1, got {self.assignment_cap}")
        if not self.log_base > 1:
            raise ValidationError(f"log base must be > 1, got {self.log_base}")

    @classmethod
    def from_options(cls, **options) -> "RunConfig":
        """DEFAULTS, then settings.CONTEXTCOST, then the flags that were given."""
        values: Dict[str, Any] = {}
        configured = getattr(settings, "CONTEXTCOST", {}) or {}
        for key, name in _SETTINGS_KEYS.items():
            if configured.get(key) is not None:
                values[name] = configured[key]
        fields = {f.name for f in dataclasses.fields(cls)}
        values.update({k: v for k, v in options.items() if k in fields and v is not None})
        try:
            values["tolerance"] = float(values.get("tolerance", DEFAULTS["tolerance"]))
            values["assignment_cap"] = int(values.get("assignment_cap", DEFAULTS["assignment_cap"]))
        except (TypeError, ValueError) as e:
            raise ValidationError(f"invalid run configuration: {e}") from None
        return cls(**values)


###################
##### reports #####
###################

def feasibility_report(em: EmpiricalModel, result: FeasibilityResult, config: RunConfig) -> dict:
    report = {
        "status": result.status,
        "assignment_count": result.assignment_count,
        "constraint_count": len(result.constraint_labels),
        "pivots": result.pivots,
        "snap_distance": result.snap_distance,
    }
    if result.feasible:
        # the witness matches the snapped tables exactly, the originals within the snap
        report["witness"] = [
            {"assignment": g.label(), "weight": w} for g, w in result.witness.items()
        ]
        report["witness_verified"] = verify_witness(
            em, result.witness, tolerance=config.tolerance + result.snap_distance
        )
    else:
        report["certificate"] = [
            {"constraint": label, "coefficient": z}
            for label, z in zip(result.constraint_labels, result.certificate)
        ]
        report["certificate_verified"] = check_certificate(
            em, result, config.assignment_cap, config.snap_denominator
        )
    return report


def cost_report(cost: CostReport) -> dict:
    return dataclasses.asdict(cost)


def _apply_prior(m: SingleStateModel, config: RunConfig) -> SingleStateModel:
    if config.prior is None:
        return m
    if config.prior == "uniform":
        return with_prior(m, uniform_prior(m.contexts, m.mode))
    return with_prior(m, formats.read_prior(config.prior, m.contexts, config.mode, config.tolerance))


####################
##### commands #####
####################

def cmd_analyze(path, config: RunConfig) -> Tuple[int, dict]:
    em = formats.read_empirical_model(path, config.mode, config.tolerance)
    validation = validate(em)
    report: Dict[str, Any] = {
        "command": "analyze",
        "file": str(path),
        "mode": em.mode,
        "validation": validation,
    }
    if not validation["consistent"]:
        report["verdict"] = "INVALID"
        return EXIT_INVALID, report

    result = global_joint_exists(em, config.assignment_cap, config.snap_denominator)
    report["feasibility"] = feasibility_report(em, result, config)
    if tuple(em.scenario.contexts) == CHSH_CONTEXTS:
        report["chsh_value"] = chsh_value(em)
    if result.feasible:
        report["verdict"] = "NONCONTEXTUAL"
        return EXIT_OK, report
    report["verdict"] = "CONTEXTUAL"
    return EXIT_CONTEXTUAL, report


def cmd_cost(path, config: RunConfig) -> Tuple[int, dict]:
    m = _apply_prior(formats.read_ontological_model(path, config.mode, config.tolerance), config)
    channel, cost = minimal_deterministic_cost(
        m, config.log_base, config.bound_tolerance, config.saturation_tolerance
    )
    partition = [
        {"label": label, "contexts": [c for c in m.contexts if channel.p_m(c).support() == (label,)]}
        for label in channel.m_alphabet
    ]
    return EXIT_OK, {
        "command": "cost",
        "file": str(path),
        "mode": m.mode,
        "i_c_o_given_lambda": contextual_dependence(m, config.log_base),
        "response_noncontextual": is_response_noncontextual(m),
        "minimal_channel": {"partition": partition, "h_m": cost.h_m},
        "cost": cost_report(cost),
    }


def cmd_verify(model_path, channel_path, config: RunConfig) -> Tuple[int, dict]:
    m = _apply_prior(formats.read_ontological_model(model_path, config.mode, config.tolerance), config)
    ch = formats.read_channel(channel_path, m.outcome_alphabet, config.mode, config.tolerance)
    report: Dict[str, Any] = {
        "command": "verify",
        "model": str(model_path),
        "channel": str(channel_path),
        "mode": m.mode,
    }
    mediation = check_mediation(m, ch)
    report["mediation"] = mediation
    if not mediation["mediates"]:
        report["verdict"] = "MEDIATION_FAILED"
        return EXIT_MEDIATION_FAILED, report
    cost = verify_bound(m, ch, config.log_base, config.bound_tolerance, config.saturation_tolerance)
    report["cost"] = cost_report(cost)
    report["verdict"] = "BOUND_HOLDS" if cost.bound_satisfied else "BOUND_VIOLATED"
    return EXIT_OK, report


def cmd_examples(name: str, output, config: RunConfig) -> Tuple[int, dict]:
    """Canonical model files, always written in exact rational form."""
    if name not in EXAMPLES:
        raise ValidationError(f"unknown example {name!r}; valid names are {', '.join(EXAMPLES)}")
    output = Path(output)
    written: List[Path] = []
    if name == "xor":
        f = InterventionBit({"c1": 0, "c2": 1})
        written.append(formats.write_text(output, formats.dump_ontological_model(xor_example(f))))
        channel_path = output.with_name(f"{output.stem}.channel.json")
        written.append(formats.write_text(channel_path, formats.dump_channel(xor_channel(f))))
    elif name == "triangle":
        written.append(formats.write_text(output, formats.dump_empirical_model(triangle_example())))
    else:
        # on the 1/10^6 grid the singlet tables keep their exact 1/2 marginals
        em, _ = rationalize(chsh_model(), config.snap_denominator)
        written.append(formats.write_text(output, formats.dump_empirical_model(em)))
    return EXIT_OK, {"command": "examples", "name": name, "files": [str(p) for p in written]}


#####################
##### rendering #####
#####################

def _plain(value, digits: int):
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    if isinstance(value, GlobalAssignment):
        return value.label()
    if isinstance(value, Dist):
        return {str(s): _plain(p, digits) for s, p in value.items()}
    if isinstance(value, dict):
        return {str(k): _plain(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v, digits) for v in value]
    return str(value)


def _lines(value, prefix: str):
    if isinstance(value, dict):
        if not value:
            yield f"{prefix}: {{}}"
        for k in sorted(value):
            yield from _lines(value[k], f"{prefix}.{k}" if prefix else k)
    elif isinstance(value, list):
        if not value:
            yield f"{prefix}: []"
        for i, v in enumerate(value):
            yield from _lines(v, f"{prefix}[{i}]")
    else:
        yield f"{prefix}: {json.dumps(value, ensure_ascii=False) if not isinstance(value, str) else value}"


def render(report: dict, fmt: str = DEFAULTS["output_format"], digits: int = DEFAULTS["significant_digits"]) -> str:
    """JSON (sorted keys, floats to `digits` significant digits) or one `key.path: value` line per field."""
    plain = _plain(report, digits)
    if fmt == "json":
        return json.dumps(plain, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return "\n".join(_lines(plain, "")) + "\n"


###########################
##### command plumbing #####
###########################

class EngineCommand(BaseCommand):
    """Shared flags and exit handling for the engine's management commands.

    Subclasses implement `run(config, **options) -> (exit code, report)`.
    Engine errors leave with exit code 2; codes 10 and 11 leave through
    SystemExit once the report has been written.
    """

    def add_arguments(self, parser):
        parser.add_argument("--mode", choices=MODES, help="exact (rationals) or float (binary64) arithmetic")
        parser.add_argument("--tol", dest="tolerance", type=float, help="float-mode tolerance")
        parser.add_argument("--prior", help="'uniform' or a JSON file {context: prob}")
        parser.add_argument("--cap", dest="assignment_cap", type=int, help="max global assignments")
        parser.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, help="report format")

    def run(self, config: RunConfig, **options) -> Tuple[int, dict]:
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = RunConfig.from_options(**options)
            logger.debug("run configuration: %s", config)
            code, report = self.run(config, **options)
        except ContextCostError as e:
            raise CommandError(str(e), returncode=EXIT_INVALID) from e
        self.stdout.write(render(report, config.output_format, config.significant_digits), ending="")
        if code == EXIT_INVALID:
            raise CommandError(f"{report.get('verdict', 'invalid input')}", returncode=EXIT_INVALID)
        if code != EXIT_OK:
            self.stdout.flush()
            sys.exit(code)
