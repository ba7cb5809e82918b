"""Discrete probability tables and Shannon quantities.

Masses are either exact (`fractions.Fraction`, mode "exact") or binary64
(mode "float"). Tables are summed in their own mode; entropies are always
binary64, taken over dense numpy arrays of the marginals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from engine.defaults import DEFAULTS
from engine.exceptions import UnknownVariableError, ValidationError


Prob = Union[Fraction, float]
Variable = Union[str, Sequence[str]]

EXACT = "exact"
FLOAT = "float"


def to_prob(value, mode: str = EXACT) -> Prob:
    """Coerce an int, float, Fraction, or a "p/q" / decimal string to a mass.

    No range check here; the containers do that.
    """
    if mode not in (EXACT, FLOAT):
        raise ValidationError(f"unknown arithmetic mode {mode!r}")
    if isinstance(value, bool):
        raise ValidationError(f"not a probability: {value!r}")
    try:
        if isinstance(value, str):
            exact = Fraction(value.strip())
        elif isinstance(value, float):
            if math.isnan(value) or math.isinf(value):
                raise ValidationError(f"not a probability: {value!r}")
            if mode == FLOAT:
                return value
            # repr() is the shortest decimal that round-trips, so 0.1 -> 1/10
            exact = Fraction(repr(value))
        else:
            exact = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"not a probability: {value!r} ({e})") from None
    return exact if mode == EXACT else float(exact)


def zero(mode: str) -> Prob:
    return Fraction(0) if mode == EXACT else 0.0


def one(mode: str) -> Prob:
    return Fraction(1) if mode == EXACT else 1.0


def infer_mode(values: Iterable[Prob]) -> str:
    return EXACT if all(isinstance(v, (Fraction, int)) for v in values) else FLOAT


def close(a: Prob, b: Prob, mode: str, tol: float) -> bool:
    """Equality of masses: exact in exact mode, within `tol` otherwise."""
    if mode == EXACT and isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= tol


def _check_mass(p: Prob, mode: str, tol: float, where: str) -> None:
    if p < 0:
        raise ValidationError(f"negative probability {p} at {where}")
    limit = 1 if mode == EXACT else 1 + tol
    if p > limit:
        raise ValidationError(f"probability {p} > 1 at {where}")


def _check_base(base: float) -> None:
    if base <= 1:
        raise ValidationError(f"log base must be > 1, got {base}")


def _clamp(value: float, tol: float) -> float:
    # cancellation in the log sums can leave -1e-17 where the exact value is 0
    if -tol < value < 0.0:
        return 0.0
    return value


@dataclass(frozen=True)
class Dist:
    """A distribution over an ordered alphabet. Every symbol has an entry."""

    alphabet: Tuple[Hashable, ...]
    mass: Mapping[Hashable, Prob]
    mode: str = EXACT
    tol: float = DEFAULTS["tolerance"]

    def __post_init__(self):
        if self.mode not in (EXACT, FLOAT):
            raise ValidationError(f"unknown arithmetic mode {self.mode!r}")
        alphabet = tuple(self.alphabet)
        if len(set(alphabet)) != len(alphabet):
            raise ValidationError(f"duplicate symbols in alphabet {alphabet!r}")
        known = set(alphabet)
        stray = [s for s in self.mass if s not in known]
        if stray:
            raise ValidationError(f"mass given for symbols outside the alphabet: {stray!r}")
        mass = {}
        for s in alphabet:
            if s not in self.mass:
                raise ValidationError(f"no mass for symbol {s!r}")
            p = to_prob(self.mass[s], self.mode)
            _check_mass(p, self.mode, self.tol, f"symbol {s!r}")
            mass[s] = p
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def uniform(cls, alphabet: Sequence[Hashable], mode: str = EXACT, tol: float = DEFAULTS["tolerance"]) -> "Dist":
        alphabet = tuple(alphabet)
        if not alphabet:
            raise ValidationError("uniform distribution over an empty alphabet")
        p = Fraction(1, len(alphabet))
        if mode == FLOAT:
            p = float(p)
        return cls(alphabet, {s: p for s in alphabet}, mode, tol)

    @classmethod
    def point(cls, alphabet: Sequence[Hashable], symbol: Hashable, mode: str = EXACT, tol: float = DEFAULTS["tolerance"]) -> "Dist":
        return cls(tuple(alphabet), {s: one(mode) if s == symbol else zero(mode) for s in alphabet}, mode, tol)

    def __getitem__(self, symbol: Hashable) -> Prob:
        return self.mass[symbol]

    def items(self):
        return ((s, self.mass[s]) for s in self.alphabet)

    def support(self) -> Tuple[Hashable, ...]:
        return tuple(s for s in self.alphabet if self.mass[s] > 0)

    def total(self) -> Prob:
        return sum(self.mass.values(), zero(self.mode))

    def normalization_defect(self) -> Prob:
        return abs(self.total() - 1)

    def is_normalized(self) -> bool:
        if self.mode == EXACT:
            return self.total() == 1
        return self.normalization_defect() <= self.tol

    def require_normalized(self, what: str = "distribution") -> None:
        if not self.is_normalized():
            raise ValidationError(f"{what} sums to {self.total()}, not 1")

    def pushforward(self, fn: Callable[[Hashable], Hashable], alphabet: Sequence[Hashable] = None) -> "Dist":
        """Law of fn(X) for X ~ self."""
        acc: Dict[Hashable, Prob] = {}
        for s, p in self.items():
            y = fn(s)
            acc[y] = acc.get(y, zero(self.mode)) + p
        if alphabet is None:
            alphabet = tuple(acc)
        return Dist(tuple(alphabet), {y: acc.get(y, zero(self.mode)) for y in alphabet}, self.mode, self.tol)

    def to_float(self) -> "Dist":
        return Dist(self.alphabet, {s: float(p) for s, p in self.items()}, FLOAT, self.tol)

    def equals(self, other: "Dist") -> bool:
        """Same alphabet and masses (exact, or within tol when either side is float)."""
        if set(self.alphabet) != set(other.alphabet):
            return False
        mode = EXACT if self.mode == other.mode == EXACT else FLOAT
        return all(close(p, other.mass[s], mode, max(self.tol, other.tol)) for s, p in self.items())


@dataclass(frozen=True)
class JointTable:
    """Joint law over named variables.

    `cells` may be sparse; a missing outcome tuple has mass 0.
    """

    variables: Tuple[Tuple[str, Tuple[Hashable, ...]], ...]
    cells: Mapping[Tuple[Hashable, ...], Prob]
    mode: str = EXACT
    tol: float = DEFAULTS["tolerance"]

    def __post_init__(self):
        if self.mode not in (EXACT, FLOAT):
            raise ValidationError(f"unknown arithmetic mode {self.mode!r}")
        variables = tuple((str(name), tuple(alphabet)) for name, alphabet in self.variables)
        if not variables:
            raise ValidationError("joint table needs at least one variable")
        names = [n for n, _ in variables]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate variable names {names!r}")
        alphabets = []
        for name, alphabet in variables:
            if not alphabet:
                raise ValidationError(f"variable {name!r} has an empty alphabet")
            if len(set(alphabet)) != len(alphabet):
                raise ValidationError(f"duplicate symbols in alphabet of {name!r}")
            alphabets.append(set(alphabet))
        cells = {}
        for outcome, p in self.cells.items():
            outcome = tuple(outcome)
            if len(outcome) != len(variables) or any(o not in a for o, a in zip(outcome, alphabets)):
                raise ValidationError(f"outcome {outcome!r} does not match variables {names!r}")
            p = to_prob(p, self.mode)
            _check_mass(p, self.mode, self.tol, f"cell {outcome!r}")
            cells[outcome] = p
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_dist(cls, name: str, d: Dist) -> "JointTable":
        return cls(((name, d.alphabet),), {(s,): p for s, p in d.items()}, d.mode, d.tol)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.variables):
            if n == name:
                return i
        raise UnknownVariableError(f"unknown variable {name!r}; table has {list(self.names)!r}")

    def alphabet(self, name: str) -> Tuple[Hashable, ...]:
        return self.variables[self.index(name)][1]

    def outcomes(self) -> Iterable[Tuple[Hashable, ...]]:
        """Every outcome tuple in alphabet order, zero cells included."""
        return itertools.product(*(a for _, a in self.variables))

    def cell(self, outcome: Sequence[Hashable]) -> Prob:
        return self.cells.get(tuple(outcome), zero(self.mode))

    def total(self) -> Prob:
        return sum(self.cells.values(), zero(self.mode))

    def normalization_defect(self) -> Prob:
        return abs(self.total() - 1)

    def is_normalized(self) -> bool:
        if self.mode == EXACT:
            return self.total() == 1
        return self.normalization_defect() <= self.tol

    def require_normalized(self, what: str = "joint table") -> None:
        if not self.is_normalized():
            raise ValidationError(f"{what} over {list(self.names)!r} sums to {self.total()}, not 1")

    def as_dist(self) -> Dist:
        """The law of a single-variable table (or of the outcome tuples otherwise)."""
        if len(self.variables) == 1:
            alphabet = self.variables[0][1]
            return Dist(alphabet, {s: self.cell((s,)) for s in alphabet}, self.mode, self.tol)
        alphabet = tuple(self.outcomes())
        return Dist(alphabet, {o: self.cell(o) for o in alphabet}, self.mode, self.tol)

    def to_float(self) -> "JointTable":
        return JointTable(self.variables, {o: float(p) for o, p in self.cells.items()}, FLOAT, self.tol)


def _names(v: Variable) -> Tuple[str, ...]:
    if isinstance(v, str):
        return (v,)
    names = tuple(v)
    if not names:
        raise ValidationError("empty variable group")
    return names


def _distinct(j: JointTable, *groups: Variable) -> Tuple[Tuple[str, ...], ...]:
    resolved = tuple(_names(g) for g in groups)
    seen = set()
    for group in resolved:
        for name in group:
            j.index(name)
            if name in seen:
                raise ValidationError(f"variable {name!r} appears in more than one argument")
            seen.add(name)
    return resolved


def marginalize(j: JointTable, keep: Sequence[str]) -> JointTable:
    """Sum out every variable not in `keep`; variables come back in `keep` order."""
    keep = tuple(keep)
    if not keep:
        raise ValidationError("marginalize needs at least one variable to keep")
    if len(set(keep)) != len(keep):
        raise ValidationError(f"duplicate names in keep list {keep!r}")
    idx = [j.index(name) for name in keep]
    acc: Dict[Tuple[Hashable, ...], Prob] = {}
    for outcome, p in j.cells.items():
        key = tuple(outcome[i] for i in idx)
        acc[key] = acc.get(key, zero(j.mode)) + p
    return JointTable(tuple(j.variables[i] for i in idx), acc, j.mode, j.tol)


def _group_array(j: JointTable, groups: Sequence[Tuple[str, ...]]) -> np.ndarray:
    """Dense float array of the marginal on `groups`, one axis per group."""
    table = marginalize(j, tuple(n for g in groups for n in g))
    position = [{s: k for k, s in enumerate(alphabet)} for _, alphabet in table.variables]
    p = np.zeros([len(alphabet) for _, alphabet in table.variables])
    for outcome, mass in table.cells.items():
        p[tuple(pos[s] for pos, s in zip(position, outcome))] = float(mass)
    sizes, start = [], 0
    for g in groups:
        sizes.append(int(np.prod(p.shape[start:start + len(g)])))
        start += len(g)
    return p.reshape(sizes)


def _entropy_of(p: np.ndarray, base: float) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum() / np.log2(base))


def entropy(d: Dist, base: float = DEFAULTS["log_base"]) -> float:
    """Shannon entropy, with 0 log 0 = 0."""
    _check_base(base)
    d.require_normalized()
    return _entropy_of(np.array([float(p) for p in d.mass.values()]), base)


def joint_entropy(j: JointTable, names: Variable, base: float = DEFAULTS["log_base"]) -> float:
    _check_base(base)
    j.require_normalized()
    return _entropy_of(_group_array(j, (_names(names),)), base)


def conditional_entropy(j: JointTable, x: Variable, z: Variable, base: float = DEFAULTS["log_base"]) -> float:
    """H(X|Z) = H(X,Z) - H(Z)."""
    xs, zs = _distinct(j, x, z)
    return _clamp(joint_entropy(j, xs + zs, base) - joint_entropy(j, zs, base), j.tol)


def mutual_information(j: JointTable, x: Variable, y: Variable, base: float = DEFAULTS["log_base"]) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y). Either side may be a group of variables."""
    _check_base(base)
    xs, ys = _distinct(j, x, y)
    j.require_normalized()
    p = _group_array(j, (xs, ys))
    value = _entropy_of(p.sum(axis=1), base) + _entropy_of(p.sum(axis=0), base) - _entropy_of(p, base)
    return _clamp(value, j.tol)


def conditional_mutual_information(
    j: JointTable, x: Variable, y: Variable, z: Variable, base: float = DEFAULTS["log_base"]
) -> float:
    """I(X;Y|Z) = sum_z p(z) I(X;Y|Z=z).

    Summed cell by cell as p(x,y,z) log[p(z) p(x,y,z) / (p(x,z) p(y,z))], so
    slices with p(z) = 0 contribute nothing.
    """
    _check_base(base)
    xs, ys, zs = _distinct(j, x, y, z)
    j.require_normalized()
    p = _group_array(j, (xs, ys, zs))
    p_xz = np.broadcast_to(p.sum(axis=1, keepdims=True), p.shape)
    p_yz = np.broadcast_to(p.sum(axis=0, keepdims=True), p.shape)
    p_z = np.broadcast_to(p.sum(axis=(0, 1), keepdims=True), p.shape)
    mask = p > 0
    ratio = p_z[mask] * p[mask] / (p_xz[mask] * p_yz[mask])
    value = float((p[mask] * np.log2(ratio)).sum() / np.log2(base))
    return _clamp(value, j.tol)


def extend(
    j: JointTable,
    name: str,
    alphabet: Sequence[Hashable],
    kernel: Callable[[Dict[str, Hashable]], Dist],
) -> JointTable:
    """Append variable `name` drawn from kernel(row) for each row of `j`.

    The kernel sees the row as {variable name: symbol}. Composing extend()
    calls builds Markov chains and the joint laws of ontological models.
    """
    if name in j.names:
        raise ValidationError(f"variable {name!r} already present")
    alphabet = tuple(alphabet)
    cells: Dict[Tuple[Hashable, ...], Prob] = {}
    for outcome, p in j.cells.items():
        if p == 0:
            continue
        law = kernel(dict(zip(j.names, outcome)))
        if set(law.alphabet) - set(alphabet):
            raise ValidationError(f"kernel for {name!r} returned symbols outside {alphabet!r}")
        for s, q in law.items():
            if q:
                cells[outcome + (s,)] = p * q
    mode = j.mode if cells == {} else infer_mode(cells.values())
    if mode == FLOAT:
        cells = {o: float(p) for o, p in cells.items()}
    return JointTable(j.variables + ((name, alphabet),), cells, mode, j.tol)


def product(*tables: JointTable) -> JointTable:
    """Independent product; variable names must not clash."""
    if not tables:
        raise ValidationError("product of no tables")
    variables = tuple(v for t in tables for v in t.variables)
    cells: Dict[Tuple[Hashable, ...], Prob] = {}
    for combo in itertools.product(*(t.cells.items() for t in tables)):
        p = one(EXACT)
        outcome: Tuple[Hashable, ...] = ()
        for o, q in combo:
            outcome += o
            p = p * q
        cells[outcome] = p
    mode = infer_mode(cells.values()) if all(t.mode == EXACT for t in tables) else FLOAT
    if mode == FLOAT:
        cells = {o: float(p) for o, p in cells.items()}
    return JointTable(variables, cells, mode, tables[0].tol)
