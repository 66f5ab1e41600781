"""Typed feature structures: acyclic feature graphs with ordered argument slots.

A structure is a rooted DAG whose edges carry feature names and whose leaves
are atomic labels or unbound variables.  ``arg`` edges form an ordered list
(they align with lambda-binder order); all other features are unordered and
at most one per node.  Reentrancy (shared subnodes) is permitted and preserved
by unification, printing and parsing.

Unification is structural: atoms merge only when equal.  A successful
unification is additionally scored by the case/role cost model: when it newly
identifies a case label from one input with a role label from the other, the
pair is looked up in the model and an infinite cost fails the unification.
The resulting record carries the charged pair, its cost and snapshots of both
inputs, which suffice to undo the unification exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cost import Cost, CostModel, ZERO, canonical_label
from .sexpr import SList, Sym, SexprError, read_all


class AvmError(Exception):
    pass


# --------------------------------------------------------------------------
# Node graph


class Atom:
    __slots__ = ("label",)

    def __init__(self, label: str):
        self.label = label

    def __repr__(self):
        return f"Atom({self.label})"


class VarLeaf:
    __slots__ = ()

    def __repr__(self):
        return "VarLeaf()"


class FNode:
    __slots__ = ("feats", "args")

    def __init__(self, feats=None, args=()):
        self.feats = dict(feats or {})
        self.args = tuple(args)

    def __repr__(self):
        return f"FNode({sorted(self.feats)}, args={len(self.args)})"


class FeatureStructure:
    """Immutable wrapper around a rooted feature graph."""

    __slots__ = ("root",)

    def __init__(self, root):
        self.root = root

    @classmethod
    def parse(cls, text: str) -> "FeatureStructure":
        forms = read_all(text)
        if len(forms) != 1:
            raise AvmError("expected exactly one (dag ...) form")
        return cls(_node_from_sexpr(forms[0], {}, expect_dag=True))

    def avm(self) -> str:
        return _print_avm(self.root)

    def atom(self, feature: str):
        """Top-level atomic value of ``feature``, or None."""
        if not isinstance(self.root, FNode):
            return None
        v = self.root.feats.get(feature)
        return v.label if isinstance(v, Atom) else None

    def feature(self, feature: str):
        """Top-level value of ``feature`` as a FeatureStructure, or None."""
        if not isinstance(self.root, FNode):
            return None
        v = self.root.feats.get(feature)
        return FeatureStructure(v) if v is not None else None

    @property
    def args(self):
        if not isinstance(self.root, FNode):
            return ()
        return tuple(FeatureStructure(a) for a in self.root.args)

    def without(self, feature: str) -> "FeatureStructure":
        """Copy with the top-level ``feature`` edge removed."""
        if not isinstance(self.root, FNode) or feature not in self.root.feats:
            return self
        feats = dict(self.root.feats)
        del feats[feature]
        return FeatureStructure(FNode(feats, self.root.args))

    def __eq__(self, other):
        if not isinstance(other, FeatureStructure):
            return NotImplemented
        return subsumes(self, other) and subsumes(other, self)

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        raise TypeError("feature structures are not hashable")

    def __repr__(self):
        return f"FeatureStructure({self.avm()})"


# --------------------------------------------------------------------------
# Records


@dataclass(frozen=True)
class UnifierRecord:
    """Log of one unification: the identified label pair, its cost, and the
    two pre-unification structures (sufficient to undo the binding)."""

    pair: tuple
    cost: Cost
    snapshot: tuple
    site: str | None = None

    def __repr__(self):
        return f"UnifierRecord(pair={self.pair}, cost={self.cost}, site={self.site})"


@dataclass(frozen=True)
class UnifyResult:
    fs: FeatureStructure
    record: UnifierRecord


def undo(record: UnifierRecord):
    """Return the two pre-unification structures recorded in ``record``."""
    return record.snapshot


# --------------------------------------------------------------------------
# Unification

_ATOM, _VAR, _NODE = 0, 1, 2


class _Cell:
    __slots__ = ("kind", "label", "feats", "args", "fwd")

    def __init__(self, kind, label=None, feats=None, args=None):
        self.kind = kind
        self.label = label
        self.feats = feats if feats is not None else {}
        self.args = args if args is not None else []
        self.fwd = None


class _Clash(Exception):
    pass


def _to_cells(node, memo):
    key = id(node)
    if key in memo:
        return memo[key]
    if isinstance(node, Atom):
        cell = _Cell(_ATOM, label=node.label)
    elif isinstance(node, VarLeaf):
        cell = _Cell(_VAR)
    else:
        cell = _Cell(_NODE)
        memo[key] = cell
        cell.feats = {f: _to_cells(v, memo) for f, v in node.feats.items()}
        cell.args = [_to_cells(a, memo) for a in node.args]
        return cell
    memo[key] = cell
    return cell


def _find(cell):
    while cell.fwd is not None:
        cell = cell.fwd
    return cell


def _merge(x, y):
    x, y = _find(x), _find(y)
    if x is y:
        return x
    if x.kind == _VAR:
        x.fwd = y
        return _find(y)
    if y.kind == _VAR:
        y.fwd = x
        return x
    if x.kind == _ATOM and y.kind == _ATOM:
        if x.label != y.label:
            raise _Clash
        y.fwd = x
        return x
    if x.kind != _NODE or y.kind != _NODE:
        raise _Clash
    y.fwd = x
    for f, yc in list(y.feats.items()):
        if f in x.feats:
            _merge(x.feats[f], yc)
        else:
            x.feats[f] = yc
    n = min(len(x.args), len(y.args))
    for i in range(n):
        _merge(x.args[i], y.args[i])
    if len(y.args) > n:
        x.args.extend(y.args[n:])
    return x


def _has_cycle(cell):
    onstack = set()
    seen = set()

    def visit(c):
        c = _find(c)
        key = id(c)
        if key in onstack:
            return True
        if key in seen:
            return False
        if c.kind == _NODE:
            onstack.add(key)
            for child in list(c.feats.values()) + list(c.args):
                if visit(child):
                    return True
            onstack.discard(key)
        seen.add(key)
        return False

    return visit(cell)


def _freeze(cell, memo):
    cell = _find(cell)
    key = id(cell)
    if key in memo:
        return memo[key]
    if cell.kind == _ATOM:
        node = Atom(cell.label)
    elif cell.kind == _VAR:
        node = VarLeaf()
    else:
        node = FNode()
        memo[key] = node
        node.feats = {f: _freeze(v, memo) for f, v in cell.feats.items()}
        node.args = tuple(_freeze(a, memo) for a in cell.args)
        return node
    memo[key] = node
    return node


def unify(a: FeatureStructure, b: FeatureStructure, model: CostModel,
          site: str | None = None) -> UnifyResult | None:
    """Unify two structures; None on failure.  Inputs are never modified.

    The record's pair is the (case, role) identification made at the top
    binding, or an identity pair when no new case/role identification
    happened.  A charged pair with infinite cost fails the unification.
    """
    ra = _to_cells(a.root, {})
    rb = _to_cells(b.root, {})
    try:
        _merge(ra, rb)
    except _Clash:
        return None
    root = _find(ra)
    if _has_cycle(root):
        return None
    merged = FeatureStructure(_freeze(root, {}))

    case_m = merged.atom("case")
    role_m = merged.atom("role")
    had_both = (a.atom("case") and a.atom("role")) or (b.atom("case") and b.atom("role"))
    if case_m and role_m and not had_both:
        pair = (canonical_label(case_m), canonical_label(role_m))
        cost = model.lookup(*pair)
        if cost.is_infinite:
            return None
    else:
        fallback = merged.root.label if isinstance(merged.root, Atom) else "top"
        x = role_m or case_m or merged.atom("cat") or fallback
        x = canonical_label(x)
        pair = (x, x)
        cost = ZERO
    record = UnifierRecord(pair=pair, cost=cost, snapshot=(a, b), site=site)
    return UnifyResult(merged, record)


# --------------------------------------------------------------------------
# Subsumption


def subsumes(a: FeatureStructure, b: FeatureStructure) -> bool:
    """True iff every feature path and value of ``a`` is present in ``b``
    with a compatible value, respecting reentrancy in ``a``."""
    mapping = {}

    def walk(x, y):
        key = id(x)
        if key in mapping:
            return mapping[key] is y
        mapping[key] = y
        if isinstance(x, VarLeaf):
            return True
        if isinstance(x, Atom):
            return isinstance(y, Atom) and x.label == y.label
        if not isinstance(y, FNode):
            return False
        for f, xv in x.feats.items():
            if f not in y.feats or not walk(xv, y.feats[f]):
                return False
        if len(x.args) > len(y.args):
            return False
        return all(walk(xa, ya) for xa, ya in zip(x.args, y.args))

    return walk(a.root, b.root)


# --------------------------------------------------------------------------
# Text format

_FEATURE_ORDER = {"cat": 0, "case": 1, "role": 2, "form": 3, "val": 4,
                  "subcat": 5, "optionality": 6}


def _feature_key(name):
    return (_FEATURE_ORDER.get(name, 99), name)


def _node_from_sexpr(form, tags, expect_dag=False):
    if isinstance(form, Sym):
        text = form.text
        if text == "?":
            return VarLeaf()
        if text.startswith("#"):
            if text not in tags:
                raise AvmError(f"line {form.line}: undefined tag {text}")
            return tags[text]
        return Atom(text)
    if not isinstance(form, SList) or not form.items:
        raise AvmError("malformed AVM node")
    items = list(form.items)
    if expect_dag:
        if not (isinstance(items[0], Sym) and items[0].text == "dag"):
            raise AvmError(f"line {form.line}: expected (dag ...)")
        items = items[1:]
    node = FNode()
    tag = None
    if items and isinstance(items[0], Sym) and items[0].text.startswith("#"):
        tag = items[0].text
        tags[tag] = node
        items = items[1:]
    feats = {}
    args = []
    for edge in items:
        if not (isinstance(edge, SList) and edge.items
                and isinstance(edge.items[0], Sym)):
            raise AvmError(f"line {form.line}: expected (feature value) edge")
        feat = edge.items[0].text
        rest = edge.items[1:]
        if len(rest) == 1 and isinstance(rest[0], Sym):
            value = _node_from_sexpr(rest[0], tags)
        elif len(rest) == 0:
            raise AvmError(f"line {edge.line}: feature {feat} has no value")
        else:
            inner = SList(rest, edge.line)
            value = _node_from_sexpr(inner, tags)
        if feat == "arg":
            args.append(value)
        else:
            if feat in feats:
                raise AvmError(f"line {edge.line}: duplicate feature {feat}")
            feats[feat] = value
    node.feats = feats
    node.args = tuple(args)
    if tag is not None:
        tags[tag] = node
    return node


def _print_avm(root) -> str:
    shared = _shared_nodes(root)
    tags = {}
    counter = [0]

    def render(node):
        if isinstance(node, Atom):
            return node.label
        if isinstance(node, VarLeaf):
            return "?"
        key = id(node)
        if key in tags:
            return tags[key]
        prefix = ""
        if key in shared:
            counter[0] += 1
            tags[key] = f"#{counter[0]}"
            prefix = tags[key] + " "
        parts = []
        for f in sorted(node.feats, key=_feature_key):
            parts.append(f"({f} {render(node.feats[f])})")
        for a in node.args:
            parts.append(f"(arg {render(a)})")
        return prefix + " ".join(parts)

    body = render(root)
    return f"(dag {body})" if body else "(dag)"


def _shared_nodes(root):
    counts = {}

    def visit(node):
        if isinstance(node, (Atom, VarLeaf)):
            return
        key = id(node)
        counts[key] = counts.get(key, 0) + 1
        if counts[key] == 1:
            for v in node.feats.values():
                visit(v)
            for a in node.args:
                visit(a)

    visit(root)
    return {k for k, c in counts.items() if c > 1}
