"""Polymorphic typed lambda calculus with binder-reordering combinators.

Terms are variables, semantic constants, typed abstractions and applications.
Types are constants (plain symbols or category feature structures treated as
atomic types), type variables, and right-associative arrows.  Inference is
by the abstraction and application rules with substitutions accumulated in
the context; unifying two category-bearing atomic types delegates to feature
structure unification and yields a unifier record on the application node.

The order-freeing operations:

* ``comb_C`` swaps the outermost two binders.
* ``comb_B`` composes two functions so the inner one's binder escapes the
  outer one's scope.
* ``abstract_argument`` is inverse beta: it pulls a filled argument out of a
  saturated application, leaving a fresh outermost binder and returning the
  detached unifier record.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cost import CostModel
from .dag import FeatureStructure, UnifierRecord, unify as fs_unify


class TermError(Exception):
    pass


class ArityError(TermError):
    pass


class DecompositionError(TermError):
    pass


class TypeInferenceError(TermError):
    pass


class ApplicationTypeError(TypeInferenceError):
    def __init__(self, fn_type, arg_type):
        super().__init__(f"cannot apply {type_to_text(fn_type)} to {type_to_text(arg_type)}")
        self.fn_type = fn_type
        self.arg_type = arg_type


class OccursCheckError(TypeInferenceError):
    pass


# --------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TAtom:
    name: str


class CatType:
    """A category feature structure used as an atomic type."""

    __slots__ = ("fs",)

    def __init__(self, fs: FeatureStructure):
        self.fs = fs

    def __eq__(self, other):
        return isinstance(other, CatType) and self.fs == other.fs

    def __repr__(self):
        return f"CatType({self.fs.avm()})"


@dataclass(frozen=True)
class TArrow:
    dom: object
    cod: object


def arrow(*types):
    """Right-associative arrow builder: arrow(a, b, c) == a -> (b -> c)."""
    if not types:
        raise ValueError("arrow needs at least one type")
    result = types[-1]
    for t in reversed(types[:-1]):
        result = TArrow(t, result)
    return result


def type_to_text(t) -> str:
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TAtom):
        return t.name
    if isinstance(t, CatType):
        cat = t.fs.atom("cat")
        if cat:
            return cat
        val = t.fs.feature("val")
        if val is not None and val.atom("cat"):
            return val.atom("cat")
        return t.fs.avm()
    if isinstance(t, TArrow):
        dom = type_to_text(t.dom)
        if isinstance(t.dom, TArrow):
            dom = f"({dom})"
        return f"{dom}->{type_to_text(t.cod)}"
    return str(t)


def resolve(t, subst):
    while isinstance(t, TVar) and t.name in subst:
        t = subst[t.name]
    return t


def apply_subst(t, subst):
    t = resolve(t, subst)
    if isinstance(t, TArrow):
        return TArrow(apply_subst(t.dom, subst), apply_subst(t.cod, subst))
    return t


def _occurs(name, t, subst):
    t = resolve(t, subst)
    if isinstance(t, TVar):
        return t.name == name
    if isinstance(t, TArrow):
        return _occurs(name, t.dom, subst) or _occurs(name, t.cod, subst)
    return False


def unify_types(a, b, subst, model: CostModel | None = None):
    """Unify two type expressions; returns (subst, records).

    Type variables are bound with a sound occurs check.  Category-bearing
    atomic types unify structurally under ``model`` and contribute a unifier
    record.
    """
    records = []

    def go(a, b):
        a = resolve(a, subst)
        b = resolve(b, subst)
        if isinstance(a, TVar):
            if isinstance(b, TVar) and b.name == a.name:
                return
            if _occurs(a.name, b, subst):
                raise OccursCheckError(f"occurs check: {a.name} in {type_to_text(b)}")
            subst[a.name] = b
            return
        if isinstance(b, TVar):
            go(b, a)
            return
        if isinstance(a, TAtom) and isinstance(b, TAtom):
            if a.name != b.name:
                raise TypeInferenceError(f"type constants differ: {a.name} vs {b.name}")
            return
        if isinstance(a, CatType) and isinstance(b, CatType):
            result = fs_unify(a.fs, b.fs, model or CostModel())
            if result is None:
                raise TypeInferenceError(
                    f"categories do not unify: {a.fs.avm()} vs {b.fs.avm()}")
            records.append(result.record)
            return
        if isinstance(a, TArrow) and isinstance(b, TArrow):
            go(a.dom, b.dom)
            go(a.cod, b.cod)
            return
        raise TypeInferenceError(
            f"cannot unify {type_to_text(a)} with {type_to_text(b)}")

    go(a, b)
    return subst, records


@dataclass
class TypeContext:
    """Known typings plus the accumulated (idempotent) type substitution."""

    vars: dict = field(default_factory=dict)
    subst: dict = field(default_factory=dict)
    _counter: int = 0

    def fresh(self, stem="a") -> TVar:
        self._counter += 1
        return TVar(f"{stem}{self._counter}")

    def bind(self, name, t):
        self.vars[name] = t

    def type_of(self, name):
        if name not in self.vars:
            raise TypeInferenceError(f"unknown identifier {name}")
        return apply_subst(self.vars[name], self.subst)

    def child(self) -> "TypeContext":
        ctx = TypeContext(dict(self.vars), self.subst, self._counter)
        return ctx


# --------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Lam:
    var: str
    var_type: object = field(compare=False)
    body: object = None


@dataclass(frozen=True)
class App:
    fn: object
    arg: object
    record: UnifierRecord | None = field(default=None, compare=False)


def lam(names, body, types=None):
    """Wrap ``body`` in abstractions, innermost binder last."""
    types = types or [None] * len(names)
    for name, t in zip(reversed(names), reversed(types)):
        body = Lam(name, t, body)
    return body


def app_spine(t):
    """Split nested applications: returns (head, [args], [records])."""
    args = []
    records = []
    while isinstance(t, App):
        args.append(t.arg)
        records.append(t.record)
        t = t.fn
    args.reverse()
    records.reverse()
    return t, args, records


def build_spine(head, args, records=None):
    records = records or [None] * len(args)
    for a, r in zip(args, records):
        head = App(head, a, r)
    return head


def lam_spine(t):
    """Split leading abstractions: returns ([(name, type), ...], body)."""
    binders = []
    while isinstance(t, Lam):
        binders.append((t.var, t.var_type))
        t = t.body
    return binders, t


def free_vars(t) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return set()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    return set()


_fresh_counter = [0]


def reset_fresh_names():
    """Reset the fresh-name counter (one deterministic stream per run)."""
    _fresh_counter[0] = 0


def _fresh_name(stem: str) -> str:
    _fresh_counter[0] += 1
    base = stem.rstrip("0123456789_")
    return f"{base or 'v'}_{_fresh_counter[0]}"


def substitute(t, name, repl):
    """Capture-avoiding substitution t[name := repl]."""
    if isinstance(t, Var):
        return repl if t.name == name else t
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(substitute(t.fn, name, repl), substitute(t.arg, name, repl), t.record)
    if isinstance(t, Lam):
        if t.var == name:
            return t
        if t.var in free_vars(repl) and name in free_vars(t.body):
            fresh = _fresh_name(t.var)
            body = substitute(t.body, t.var, Var(fresh))
            return Lam(fresh, t.var_type, substitute(body, name, repl))
        return Lam(t.var, t.var_type, substitute(t.body, name, repl))
    raise TermError(f"not a term: {t!r}")


def normalize(t):
    """Beta-normal form.  Well-typed terms in this fragment terminate."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Lam):
        return Lam(t.var, t.var_type, normalize(t.body))
    if isinstance(t, App):
        fn = normalize(t.fn)
        arg = normalize(t.arg)
        if isinstance(fn, Lam):
            return normalize(substitute(fn.body, fn.var, arg))
        return App(fn, arg, t.record)
    raise TermError(f"not a term: {t!r}")


def alpha_eq(a, b) -> bool:
    """Structural identity up to renaming of bound variables."""

    def go(a, b, ea, eb, depth):
        if isinstance(a, Var) and isinstance(b, Var):
            ia, ib = ea.get(a.name), eb.get(b.name)
            if ia is None and ib is None:
                return a.name == b.name
            return ia is not None and ia == ib
        if isinstance(a, Const) and isinstance(b, Const):
            return a.name == b.name
        if isinstance(a, Lam) and isinstance(b, Lam):
            ea2 = dict(ea)
            eb2 = dict(eb)
            ea2[a.var] = depth
            eb2[b.var] = depth
            return go(a.body, b.body, ea2, eb2, depth + 1)
        if isinstance(a, App) and isinstance(b, App):
            return go(a.fn, b.fn, ea, eb, depth) and go(a.arg, b.arg, ea, eb, depth)
        return False

    return go(a, b, {}, {}, 0)


# --------------------------------------------------------------------------
# Inference rules


def infer(ctx: TypeContext, t, model: CostModel | None = None):
    """Infer the type of ``t`` under ``ctx`` (substitution accumulates)."""
    if isinstance(t, Var) or isinstance(t, Const):
        return ctx.type_of(t.name)
    if isinstance(t, Lam):
        var_type = t.var_type if t.var_type is not None else ctx.fresh()
        saved = ctx.vars.get(t.var, _MISSING)
        ctx.bind(t.var, var_type)
        body_type = infer(ctx, t.body, model)
        if saved is _MISSING:
            del ctx.vars[t.var]
        else:
            ctx.vars[t.var] = saved
        return TArrow(apply_subst(var_type, ctx.subst), body_type)
    if isinstance(t, App):
        fn_type = infer(ctx, t.fn, model)
        arg_type = infer(ctx, t.arg, model)
        beta = ctx.fresh("b")
        try:
            unify_types(fn_type, TArrow(arg_type, beta), ctx.subst, model)
        except TypeInferenceError:
            raise ApplicationTypeError(apply_subst(fn_type, ctx.subst),
                                       apply_subst(arg_type, ctx.subst))
        return apply_subst(beta, ctx.subst)
    raise TermError(f"not a term: {t!r}")


_MISSING = object()


def infer_abs(ctx: TypeContext, name: str, var_type, body):
    """Abstraction rule: from a typing of ``body`` with ``name`` assumed at
    ``var_type``, build the typed abstraction and its arrow type."""
    saved = ctx.vars.get(name, _MISSING)
    ctx.bind(name, var_type)
    body_type = infer(ctx, body)
    if saved is _MISSING:
        del ctx.vars[name]
    else:
        ctx.vars[name] = saved
    term = Lam(name, var_type, body)
    return term, TArrow(apply_subst(var_type, ctx.subst), body_type)


def infer_app(ctx: TypeContext, t, s, model: CostModel | None = None):
    """Application rule: type both sides, unify the argument types, and attach
    the category unifier record (if one was produced) to the application node.

    Raises ApplicationTypeError when the argument type does not unify.
    """
    fn_type = infer(ctx, t, model)
    arg_type = infer(ctx, s, model)
    fn_type = apply_subst(fn_type, ctx.subst)
    if not isinstance(fn_type, TArrow):
        beta = ctx.fresh("b")
        alpha = ctx.fresh("a")
        try:
            unify_types(fn_type, TArrow(alpha, beta), ctx.subst)
        except TypeInferenceError:
            raise ApplicationTypeError(fn_type, arg_type)
        fn_type = apply_subst(fn_type, ctx.subst)
    try:
        _, records = unify_types(fn_type.dom, arg_type, ctx.subst, model)
    except TypeInferenceError:
        raise ApplicationTypeError(fn_type, apply_subst(arg_type, ctx.subst))
    record = records[0] if records else None
    term = App(t, s, record)
    return term, apply_subst(fn_type.cod, ctx.subst)


# --------------------------------------------------------------------------
# Combinators


def comb_C(t):
    """Swap the outermost two binders: C(\\x y.f(x,y)) = \\y x.f(x,y)."""
    if not (isinstance(t, Lam) and isinstance(t.body, Lam)):
        raise ArityError("C needs at least two leading binders")
    outer, inner = t, t.body
    return Lam(inner.var, inner.var_type, Lam(outer.var, outer.var_type, inner.body))


def comb_C_at(t, depth: int):
    """Apply C under ``depth`` leading binders."""
    if depth == 0:
        return comb_C(t)
    if not isinstance(t, Lam):
        raise ArityError("not enough leading binders")
    return Lam(t.var, t.var_type, comb_C_at(t.body, depth - 1))


def comb_B(f, g, binder: str | None = None):
    """Compose: B(f)(g) = \\x.f(g(x)).  The new binder takes g's argument."""
    if binder is None:
        binder = _fresh_name("x")
    g_dom = g.var_type if isinstance(g, Lam) else None
    v = Var(binder)
    return Lam(binder, g_dom, App(f, App(g, v)))


def abstract_argument(t, index: int, binder: str, binder_type=None):
    """Inverse beta: abstract the filled argument at position ``index`` of the
    constant application inside ``t`` (under any leading binders).

    Returns (\\binder . t[index := binder], detached record).  The new binder
    is outermost; reordering it back among existing binders is the caller's
    business (via C).  Raises DecompositionError when the site is empty (an
    unfilled variable) or carries no record.
    """
    binders, body = lam_spine(t)
    head, args, records = app_spine(body)
    if index >= len(args):
        raise DecompositionError(f"no argument at position {index}")
    arg = args[index]
    bound_names = {name for name, _ in binders}
    if isinstance(arg, Var) and arg.name in bound_names:
        raise DecompositionError(f"argument {index} is an unfilled site")
    record = records[index]
    if record is None:
        raise DecompositionError(f"argument {index} has no unifier record")
    if binder_type is None:
        binder_type = CatType(record.snapshot[0])
    new_args = list(args)
    new_args[index] = Var(binder)
    new_records = list(records)
    new_records[index] = None
    new_body = build_spine(head, new_args, new_records)
    inner = lam([name for name, _ in binders], new_body,
                [ty for _, ty in binders])
    return Lam(binder, binder_type, inner), record


# --------------------------------------------------------------------------
# Text syntax

# lam  := '\' ident+ '.' expr
# expr := atom trailer*          trailer := '(' expr (',' expr)* ')'
# atom := ident | '(' expr ')' | lam
# Free identifiers parse as semantic constants, bound ones as variables.


class TermSyntaxError(TermError):
    pass


def _tokenize_term(text):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\n\r":
            i += 1
        elif c in "\\.(),":
            yield c
            i += 1
        elif c == "λ":
            yield "\\"
            i += 1
        elif c.isalnum() or c in "_'":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            yield text[i:j]
            i = j
        else:
            raise TermSyntaxError(f"unexpected character {c!r}")
    yield None


class _TermParser:
    def __init__(self, text):
        self.tokens = list(_tokenize_term(text))
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.next()
        if got != tok:
            raise TermSyntaxError(f"expected {tok!r}, got {got!r}")

    def parse(self, bound=frozenset()):
        t = self.parse_expr(bound)
        if self.peek() is not None:
            raise TermSyntaxError(f"trailing input at {self.peek()!r}")
        return t

    def parse_expr(self, bound):
        if self.peek() == "\\":
            self.next()
            names = []
            while self.peek() not in (".", None) and self.peek() not in "\\().,":
                names.append(self.next())
            if not names:
                raise TermSyntaxError("abstraction without binders")
            self.expect(".")
            body = self.parse_expr(bound | set(names))
            return lam(names, body)
        return self.parse_applied(bound)

    def parse_applied(self, bound):
        t = self.parse_atom(bound)
        while self.peek() == "(":
            self.next()
            args = [self.parse_expr(bound)]
            while self.peek() == ",":
                self.next()
                args.append(self.parse_expr(bound))
            self.expect(")")
            for a in args:
                t = App(t, a)
        return t

    def parse_atom(self, bound):
        tok = self.next()
        if tok == "(":
            t = self.parse_expr(bound)
            self.expect(")")
            return t
        if tok is None or tok in "\\.,)":
            raise TermSyntaxError(f"unexpected token {tok!r}")
        return Var(tok) if tok in bound else Const(tok)


def term_from_text(text: str):
    """Parse the term text syntax; free identifiers become constants."""
    return _TermParser(text).parse()


def term_to_text(t, lamsym: str = "\\") -> str:
    """Print a term; round-trips through ``term_from_text``."""

    def render(t, fn_position=False):
        if isinstance(t, (Var, Const)):
            return t.name
        if isinstance(t, Lam):
            binders, body = lam_spine(t)
            names = [name for name, _ in binders]
            joined = "".join(names) if lamsym == "λ" else " ".join(names)
            s = f"{lamsym}{joined}.{render(body)}"
            return f"({s})" if fn_position else s
        if isinstance(t, App):
            head, args, _ = app_spine(t)
            inner = ",".join(render(a) for a in args)
            return f"{render(head, fn_position=True)}({inner})"
        raise TermError(f"not a term: {t!r}")

    return render(t)
