"""Born-rule statistics for small quantum systems.

Only enough linear algebra to turn a density matrix and measurements into
empirical models; the CHSH model built here is the standard example of
statistics no global joint distribution reproduces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from engine.exceptions import ValidationError
from engine.infotheory import FLOAT, Dist, JointTable
from engine.models import EmpiricalModel, Scenario

MAX_DIMENSION = 8
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
TRACE_TOL = 1e-9

# (a0, a1, b0, b1), measurement angles in the x-z plane
TSIRELSON_ANGLES = (0.0, math.pi / 2, math.pi / 4, -math.pi / 4)
ALIGNED_ANGLES = (0.0, 0.0, 0.0, 0.0)

BINARY = ("0", "1")
CHSH_CONTEXTS = (("A0", "B0"), ("A0", "B1"), ("A1", "B0"), ("A1", "B1"))


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {arr.shape}")
        if not 1 <= arr.shape[0] <= MAX_DIMENSION:
            raise ValidationError(f"dimension {arr.shape[0]} outside 1..{MAX_DIMENSION}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def projector(cls, vector: Sequence[complex]) -> "ComplexMatrix":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @property
    def dimension(self) -> int:
        return self.data.shape[0]

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        # eigvalsh reads one triangle only; symmetrize so the defect cannot hide
        return float(np.linalg.eigvalsh((self.data + self.data.conj().T) / 2)[0])

    def trace(self) -> complex:
        return complex(np.trace(self.data))


@dataclass(frozen=True, eq=False)
class Povm:
    effects: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        effects = tuple(self.effects)
        if not effects:
            raise ValidationError("POVM has no effects")
        d = effects[0].dimension
        if any(e.dimension != d for e in effects):
            raise ValidationError("POVM effects have different dimensions")
        for k, e in enumerate(effects):
            defect = e.hermitian_defect()
            if defect > HERMITIAN_TOL:
                raise ValidationError(f"effect {k} is not Hermitian (defect {defect:.3g})")
            low = e.min_eigenvalue()
            if low < -PSD_TOL:
                raise ValidationError(f"effect {k} is not positive semidefinite (min eigenvalue {low:.3g})")
        total = sum(e.data for e in effects)
        defect = float(np.max(np.abs(total - np.eye(d))))
        if defect > PSD_TOL:
            raise ValidationError(f"POVM effects do not sum to the identity (defect {defect:.3g})")
        object.__setattr__(self, "effects", effects)

    @property
    def dimension(self) -> int:
        return self.effects[0].dimension


def check_state(rho: ComplexMatrix) -> None:
    defect = rho.hermitian_defect()
    if defect > HERMITIAN_TOL:
        raise ValidationError(f"state is not Hermitian (defect {defect:.3g})")
    trace_defect = abs(rho.trace() - 1)
    if trace_defect > TRACE_TOL:
        raise ValidationError(f"state trace is off by {trace_defect:.3g}")
    low = rho.min_eigenvalue()
    if low < -PSD_TOL:
        raise ValidationError(f"state is not positive semidefinite (min eigenvalue {low:.3g})")


def born_probabilities(rho: ComplexMatrix, povm: Povm) -> Dist:
    """p(k) = Tr(rho E_k) over effect indices, as a float distribution."""
    check_state(rho)
    if rho.dimension != povm.dimension:
        raise ValidationError(f"state has dimension {rho.dimension}, POVM {povm.dimension}")
    probs = []
    for k, e in enumerate(povm.effects):
        p = float(np.real(np.trace(rho.data @ e.data)))
        if p < 0:
            if p < -PSD_TOL:
                raise ValidationError(f"effect {k} has negative probability {p:.3g}")
            p = 0.0
        probs.append(p)
    total = sum(probs)
    if abs(total - 1) > TRACE_TOL:
        raise ValidationError(f"Born probabilities sum to {total!r}")
    probs = [p / total for p in probs]
    return Dist(tuple(range(len(probs))), dict(enumerate(probs)), FLOAT)


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return ComplexMatrix(np.kron(a.data, b.data))


def singlet() -> ComplexMatrix:
    """(|01> - |10>)/sqrt(2)."""
    return ComplexMatrix.projector([0, 1, -1, 0])


def spin_projectors(angle: float) -> Povm:
    """Spin along cos(angle) Z + sin(angle) X; effect 0 is the +1 outcome."""
    half = angle / 2
    return Povm((
        ComplexMatrix.projector([math.cos(half), math.sin(half)]),
        ComplexMatrix.projector([-math.sin(half), math.cos(half)]),
    ))


def chsh_model(angles: Sequence[float] = TSIRELSON_ANGLES) -> EmpiricalModel:
    """Singlet measured at angles (a0, a1, b0, b1); one context per pair (Ai, Bj)."""
    angles = tuple(float(a) for a in angles)
    if len(angles) != 4:
        raise ValidationError(f"expected four angles (a0, a1, b0, b1), got {len(angles)}")
    setting = {"A0": angles[0], "A1": angles[1], "B0": angles[2], "B1": angles[3]}
    scenario = Scenario(
        observables=tuple((name, BINARY) for name in ("A0", "A1", "B0", "B1")),
        contexts=CHSH_CONTEXTS,
    )
    rho = singlet()
    tables = {}
    for a, b in CHSH_CONTEXTS:
        left, right = spin_projectors(setting[a]), spin_projectors(setting[b])
        joint = Povm(tuple(tensor(ea, eb) for ea in left.effects for eb in right.effects))
        probs = born_probabilities(rho, joint)
        cells = {(x, y): probs[2 * i + j] for i, x in enumerate(BINARY) for j, y in enumerate(BINARY)}
        tables[(a, b)] = JointTable(scenario.context_variables((a, b)), cells, FLOAT)
    return EmpiricalModel(scenario, tables)


def correlator(table: JointTable) -> float:
    """E = p(same) - p(different) for a two-bit table."""
    return sum(
        float(p) * (1 if o[0] == o[1] else -1)
        for o, p in table.cells.items()
    )


def chsh_value(em: EmpiricalModel) -> float:
    """|E00 + E01 + E10 - E11|; at most 2 for any global joint distribution."""
    e = [correlator(em.table(c)) for c in CHSH_CONTEXTS]
    return abs(e[0] + e[1] + e[2] - e[3])


def chsh_closed_form(angles: Sequence[float]) -> float:
    """The singlet value of chsh_value(), E(a, b) = -cos(a - b)."""
    a0, a1, b0, b1 = angles
    return abs(math.cos(a0 - b0) + math.cos(a0 - b1) + math.cos(a1 - b0) - math.cos(a1 - b1))
