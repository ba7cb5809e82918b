from fractions import Fraction

from engine.exceptions import ValidationError
from engine.infotheory import EXACT, JointTable, marginalize
from engine.models import EmpiricalModel, Scenario, context_key

BINARY = ("0", "1")


def validate(em: EmpiricalModel) -> dict:
    """
    Checks an empirical model against the operational consistency rules.
    Every failure becomes an alert; nothing is raised.
    Returns {"consistent": bool, "alerts": [...], "checked_pairs": int}.
    """
    alerts = []  # one entry per violated rule
    scenario = em.scenario
    exact = em.mode == EXACT
    usable = {}  # contexts whose table has the right variables

    #####################################
    ##### 1. One table per context ######
    #####################################
    for c in scenario.contexts:
        table = em.tables.get(c)
        if table is None:
            alerts.append({
                "code": "MISSING_TABLE",
                "message": f"No table for context '{context_key(c)}'.",
                "context": context_key(c),
            })
        elif table.variables != scenario.context_variables(c):
            alerts.append({
                "code": "TABLE_VARIABLES",
                "message": f"Table for '{context_key(c)}' is over {list(table.names)}, not the context's observables.",
                "context": context_key(c),
            })
        else:
            usable[c] = table

    ##############################
    ##### 2. Normalization #######
    ##############################
    for c, table in usable.items():
        if not table.is_normalized():
            alerts.append({
                "code": "NORMALIZATION",
                "message": f"Table for '{context_key(c)}' sums to {table.total()}.",
                "context": context_key(c),
                "total": table.total(),
                "deviation": table.normalization_defect(),
            })

    ####################################################
    ##### 3. No-disturbance on overlapping contexts #####
    ####################################################
    contexts = list(usable)
    checked = 0
    for i, a in enumerate(contexts):
        for b in contexts[i + 1:]:
            shared = scenario.shared(a, b)
            if not shared:
                continue
            checked += 1
            left = marginalize(usable[a], shared)
            right = marginalize(usable[b], shared)
            deviation = max(abs(left.cell(o) - right.cell(o)) for o in left.outcomes())
            agrees = deviation == 0 if exact else deviation <= em.tol
            if not agrees:
                alerts.append({
                    "code": "NO_DISTURBANCE",
                    "message": (
                        f"Contexts '{context_key(a)}' and '{context_key(b)}' disagree on the "
                        f"marginal of {list(shared)} by {deviation}."
                    ),
                    "contexts": [context_key(a), context_key(b)],
                    "shared": list(shared),
                    "deviation": deviation,
                })

    return {
        "consistent": not alerts,
        "alerts": alerts,
        "checked_pairs": checked,
    }


def require_consistent(em: EmpiricalModel) -> None:
    report = validate(em)
    if not report["consistent"]:
        messages = "; ".join(a["message"] for a in report["alerts"])
        raise ValidationError(f"invalid empirical model: {messages}")


def triangle_example() -> EmpiricalModel:
    """
    Three binary observables measured pairwise, each pair perfectly
    anticorrelated. Every pair is consistent, but an odd cycle of
    anticorrelations has no global assignment.
    The numbers are this project's choice of instance, not measured data.
    """
    scenario = Scenario(
        observables=(("o1", BINARY), ("o2", BINARY), ("o3", BINARY)),
        contexts=(("o1", "o2"), ("o2", "o3"), ("o3", "o1")),
    )
    half = Fraction(1, 2)
    anticorrelated = {("0", "0"): 0, ("0", "1"): half, ("1", "0"): half, ("1", "1"): 0}
    tables = {
        c: JointTable(scenario.context_variables(c), anticorrelated)
        for c in scenario.contexts
    }
    return EmpiricalModel(scenario, tables)


def product_example() -> EmpiricalModel:
    """Two independent uniform bits measured together."""
    scenario = Scenario(observables=(("a", BINARY), ("b", BINARY)), contexts=(("a", "b"),))
    quarter = Fraction(1, 4)
    table = JointTable(
        scenario.context_variables(("a", "b")),
        {(x, y): quarter for x in BINARY for y in BINARY},
    )
    return EmpiricalModel(scenario, {("a", "b"): table})
