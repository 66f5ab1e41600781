"""Unification costs: non-negative rationals plus an absorbing top element.

A binding of a syntactic case to a semantic role is scored by a small table;
canonical pairings cost 1, marked pairings cost ``k`` (a configurable rational
greater than 1), forbidden or unlisted pairings cost infinity.  Identical
labels always cost 0.
"""

from __future__ import annotations

from fractions import Fraction


class Cost:
    """A cost value: a non-negative rational, or an absorbing infinity.

    Infinity absorbs under addition and compares greater than every finite
    cost, which keeps total-cost comparison well defined.
    """

    __slots__ = ("_value",)

    def __init__(self, value=None):
        if value is not None and not isinstance(value, Fraction):
            value = Fraction(value)
        if value is not None and value < 0:
            raise ValueError("costs are non-negative")
        self._value = value

    @property
    def is_infinite(self) -> bool:
        return self._value is None

    @property
    def value(self) -> Fraction:
        if self._value is None:
            raise ValueError("infinite cost has no finite value")
        return self._value

    def __add__(self, other: "Cost") -> "Cost":
        if self.is_infinite or other.is_infinite:
            return INF
        return Cost(self._value + other._value)

    __radd__ = __add__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cost):
            return NotImplemented
        return self._value == other._value

    def __lt__(self, other: "Cost") -> bool:
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        return self._value < other._value

    def __le__(self, other: "Cost") -> bool:
        return self == other or self < other

    def __gt__(self, other: "Cost") -> bool:
        return not self <= other

    def __ge__(self, other: "Cost") -> bool:
        return not self < other

    def __hash__(self) -> int:
        return hash(self._value)

    def __str__(self) -> str:
        if self._value is None:
            return "inf"
        if self._value.denominator == 1:
            return str(self._value.numerator)
        return f"{self._value.numerator}/{self._value.denominator}"

    def __repr__(self) -> str:
        return f"Cost({self})"


ZERO = Cost(0)
ONE = Cost(1)
INF = Cost()

# The figures spell roles out in full while the cost table abbreviates them;
# both spellings denote the same labels.
_ALIASES = {
    "agt": "agent",
    "cgt": "co-agent",
    "obj": "object",
}


def canonical_label(name: str) -> str:
    return _ALIASES.get(name, name)


# Sentinel resolved against the model's k at lookup time.
K = object()

# The printed case/role cost table.  Keys are unordered label pairs; values
# are 1, the constant k, or infinity (None).  Unlisted pairs default to
# infinity, identical labels to 0.
DEFAULT_TABLE = {
    frozenset(("nom", "agent")): 1,
    frozenset(("dat", "co-agent")): 1,
    frozenset(("acc", "object")): 1,
    frozenset(("object", "nom")): K,
    frozenset(("dat", "agent")): K,
    frozenset(("t", "object")): K,
    frozenset(("nom", "dat")): None,
    frozenset(("agent", "co-agent")): None,
}


class CostModel:
    """Symmetric lookup of binding costs over one open label alphabet."""

    def __init__(self, k=Fraction(2), table=None):
        k = Fraction(k)
        if k <= 1:
            raise ValueError("k must be greater than 1")
        self.k = k
        self.table = dict(DEFAULT_TABLE) if table is None else dict(table)

    def lookup(self, x: str, y: str) -> Cost:
        x = canonical_label(x)
        y = canonical_label(y)
        if x == y:
            return ZERO
        entry = self.table.get(frozenset((x, y)))
        if entry is None:
            return INF
        if entry is K:
            return Cost(self.k)
        return Cost(entry)


def lookup_cost(x: str, y: str, model: CostModel) -> Cost:
    """Cost of identifying labels ``x`` and ``y`` under ``model``."""
    return model.lookup(x, y)
