"""Lexicon files, agglutinative segmentation, and molecule construction.

An entry pairs a surface morpheme with its kind, its semantics (a lambda
term) and its category (an AVM).  Tokens are segmented into known morphemes
by greedy longest match over a trie, honoring the kind order

    noun (+ case-marker)  |  verb-root (+ auxiliary)* (+ tense-marker)

with the epenthetic "r" of vowel-stem inflection absorbed wherever it
appears between a vowel-final and a vowel-initial morpheme.  Lookup fuses a
case marker into the preceding noun molecule and a tense marker into the
nearest preceding verbal molecule, so every resulting molecule is directly
injectable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .dag import AvmError, FeatureStructure, _node_from_sexpr, unify
from .cost import CostModel
from .engine import Molecule
from .sexpr import SList, Str, Sym, SexprError, read_all
from .terms import (
    Const,
    Var,
    App,
    app_spine,
    lam_spine,
    term_from_text,
    term_to_text,
    TermError,
)

KINDS = ("noun", "case-marker", "verb-root", "auxiliary", "tense-marker")
VOWELS = set("aeiou")


class LexiconError(Exception):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SegmentationError(LexiconError):
    pass


@dataclass
class SemConstant:
    """A declared semantic constant with its arity and argument categories."""

    name: str
    arity: int
    arg_types: tuple = ()
    result: FeatureStructure | None = None


@dataclass
class LexiconEntry:
    surface: str
    kind: str
    sem: object | None
    dag: FeatureStructure | None
    line: int = 0
    # slot indices feeding each sentential slot's control applications,
    # read off the semantics (the z(y)... chains)
    control_sources: dict = field(default_factory=dict)

    @property
    def spawns_membrane(self) -> bool:
        return self.kind in ("verb-root", "auxiliary")

    @property
    def key(self) -> str:
        return _match_key(self.surface)


def _match_key(surface: str) -> str:
    return surface.replace("-", "").replace("(r)", "")


def _binder_names(sem) -> list:
    binders, _ = lam_spine(sem)
    return [name for name, _ in binders]


class Lexicon:
    """Entries keyed by surface, with a segmentation trie over the surfaces."""

    def __init__(self):
        self.entries: dict[str, LexiconEntry] = {}
        self.trie: dict = {}
        self.constants: dict[str, SemConstant] = {}

    def add(self, entry: LexiconEntry):
        if entry.surface in self.entries:
            raise LexiconError(f"duplicate surface {entry.surface!r}", entry.line)
        self.entries[entry.surface] = entry
        node = self.trie
        for ch in entry.key:
            node = node.setdefault(ch, {})
        node["$"] = entry.surface
        self._register_constant(entry)

    def _register_constant(self, entry: LexiconEntry):
        if entry.sem is None:
            return
        _, body = lam_spine(entry.sem)
        head, args, _ = app_spine(body)
        if isinstance(head, Const):
            arg_types = tuple(entry.dag.args) if entry.dag else ()
            self.constants[head.name] = SemConstant(
                name=head.name,
                arity=len(args),
                arg_types=arg_types,
                result=entry.dag.feature("val") if entry.dag else None,
            )

    def update(self, other: "Lexicon"):
        for entry in other.entries.values():
            self.add(entry)

    def entry_for_constant(self, name: str) -> LexiconEntry | None:
        for entry in self.entries.values():
            if entry.sem is None:
                continue
            _, body = lam_spine(entry.sem)
            head, _, _ = app_spine(body)
            if isinstance(head, Const) and head.name == name:
                return entry
        return None

    def surface_for_constant(self, name: str) -> str | None:
        entry = self.entry_for_constant(name)
        return entry.surface if entry else None

    def verb_roots(self) -> list:
        return [e for e in self.entries.values() if e.kind == "verb-root"]

    def print_text(self) -> str:
        lines = []
        for entry in self.entries.values():
            parts = [f'(entry "{entry.surface}"', f"(kind {entry.kind})"]
            if entry.sem is not None:
                if isinstance(entry.sem, Const):
                    parts.append(f"(sem {entry.sem.name})")
                else:
                    parts.append(f'(sem "{term_to_text(entry.sem)}")')
            if entry.dag is not None:
                parts.append(f"(dag {entry.dag.avm()[5:-1]})"
                             if entry.dag.avm() != "(dag)" else "(dag)")
            lines.append(" ".join(parts) + ")")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Loading


def _entry_from_form(form) -> LexiconEntry:
    if not (isinstance(form, SList) and form.items
            and isinstance(form.items[0], Sym) and form.items[0].text == "entry"):
        raise LexiconError("expected (entry ...) form", getattr(form, "line", 0))
    line = form.line
    items = form.items[1:]
    if not items or not isinstance(items[0], Str):
        raise LexiconError("entry needs a quoted surface string", line)
    surface = items[0].text
    kind = None
    sem = None
    dag = None
    for part in items[1:]:
        if not (isinstance(part, SList) and part.items
                and isinstance(part.items[0], Sym)):
            raise LexiconError(f"malformed clause in entry {surface!r}", line)
        tag = part.items[0].text
        if tag == "kind":
            if len(part.items) != 2 or not isinstance(part.items[1], Sym):
                raise LexiconError(f"bad kind clause in {surface!r}", part.line)
            kind = part.items[1].text
        elif tag == "sem":
            if len(part.items) != 2:
                raise LexiconError(f"bad sem clause in {surface!r}", part.line)
            payload = part.items[1]
            try:
                if isinstance(payload, Str):
                    sem = term_from_text(payload.text)
                elif isinstance(payload, Sym):
                    sem = Const(payload.text)
                else:
                    raise LexiconError(f"bad sem clause in {surface!r}", part.line)
            except TermError as exc:
                raise LexiconError(f"{surface!r}: {exc}", part.line)
        elif tag == "dag":
            try:
                dag = FeatureStructure(_node_from_sexpr(part, {}, expect_dag=True))
            except AvmError as exc:
                raise LexiconError(f"{surface!r}: {exc}", part.line)
        else:
            raise LexiconError(f"unknown clause ({tag} ...) in {surface!r}", part.line)
    if kind not in KINDS:
        raise LexiconError(f"{surface!r}: unknown kind {kind!r}", line)
    entry = LexiconEntry(surface=surface, kind=kind, sem=sem, dag=dag, line=line)
    _validate_entry(entry)
    return entry


def _validate_entry(entry: LexiconEntry):
    line = entry.line
    if entry.dag is None:
        raise LexiconError(f"{entry.surface!r}: missing (dag ...)", line)
    if entry.kind == "noun":
        if not isinstance(entry.sem, Const):
            raise LexiconError(f"{entry.surface!r}: noun needs a constant sem", line)
        if entry.dag.atom("cat") is None:
            raise LexiconError(f"{entry.surface!r}: noun needs a cat", line)
        return
    if entry.kind == "case-marker":
        if entry.dag.atom("case") is None:
            raise LexiconError(f"{entry.surface!r}: case marker needs a case", line)
        return
    if entry.kind == "tense-marker":
        if entry.dag.atom("form") is None:
            raise LexiconError(f"{entry.surface!r}: tense marker needs a form", line)
        return
    # verb-root / auxiliary
    if entry.sem is None:
        raise LexiconError(f"{entry.surface!r}: verbal entry needs a sem", line)
    binders = _binder_names(entry.sem)
    nargs = len(entry.dag.args)
    if len(binders) != nargs:
        raise LexiconError(
            f"{entry.surface!r}: {len(binders)} binders but {nargs} arg slots", line)
    entry.control_sources = _control_sources(entry, binders)


def _control_sources(entry: LexiconEntry, binders) -> dict:
    """Map sentential slot index -> list of slot indices whose fillers feed
    the control applications of that slot's binder in the semantics."""
    index_of = {name: i for i, name in enumerate(binders)}
    sources = {}
    _, body = lam_spine(entry.sem)

    def visit(t):
        if isinstance(t, App):
            head, args, _ = app_spine(t)
            if isinstance(head, Var) and head.name in index_of:
                slot = index_of[head.name]
                chain = []
                for a in args:
                    if not (isinstance(a, Var) and a.name in index_of):
                        raise LexiconError(
                            f"{entry.surface!r}: control argument must be a binder",
                            entry.line)
                    chain.append(index_of[a.name])
                sources[slot] = chain
            for a in args:
                visit(a)
            if not isinstance(head, (Var, Const)):
                visit(head)
        elif hasattr(t, "body"):
            visit(t.body)

    visit(body)
    for i, arg in enumerate(entry.dag.args):
        if arg.atom("cat") != "S":
            continue
        sub = arg.feature("subcat")
        chain_len = 0
        if sub is not None:
            chain_len = len(sub.args) if sub.args else 1
        got = len(sources.get(i, []))
        if got != chain_len:
            raise LexiconError(
                f"{entry.surface!r}: slot {i} subcategorizes {chain_len} roles "
                f"but the sem applies {got} control arguments", entry.line)
    return sources


def load(text: str, name: str = "<lexicon>") -> Lexicon:
    """Parse lexicon text; errors cite line numbers."""
    lex = Lexicon()
    try:
        forms = read_all(text)
    except SexprError as exc:
        raise LexiconError(f"{name}: {exc}", exc.line)
    for form in forms:
        lex.add(_entry_from_form(form))
    return lex


def _packaged(filename: str) -> str:
    return resources.files("champarse").joinpath("lexicon", filename).read_text()


def load_core() -> Lexicon:
    return load(_packaged("japanese_core.lex"), "japanese_core.lex")


def load_derived() -> Lexicon:
    """Core lexicon plus the authored passive auxiliary."""
    lex = load_core()
    lex.update(load(_packaged("japanese_derived.lex"), "japanese_derived.lex"))
    return lex


# --------------------------------------------------------------------------
# Segmentation

_ORDER = {
    "start": {"noun", "verb-root"},
    "noun": {"case-marker"},
    "case-marker": set(),
    "verb-root": {"auxiliary", "tense-marker"},
    "auxiliary": {"auxiliary", "tense-marker"},
    "tense-marker": set(),
}


def _vowel_final(s: str) -> bool:
    return bool(s) and s[-1].lower() in VOWELS


def _vowel_initial(s: str) -> bool:
    return bool(s) and s[0].lower() in VOWELS


def _trie_matches(trie: dict, s: str, start: int):
    """All (end, surface) trie matches of s beginning at start."""
    node = trie
    out = []
    i = start
    while True:
        if "$" in node:
            out.append((i, node["$"]))
        if i >= len(s) or s[i] not in node:
            return out
        node = node[s[i]]
        i += 1


def segment(token: str, lex: Lexicon) -> list:
    """Greedy longest-match decomposition of one token into known surfaces."""
    morphemes: list[str] = []
    state = "start"
    prev_text = ""

    def accept(surface: str, line_msg: str):
        nonlocal state, prev_text
        entry = lex.entries[surface]
        if entry.kind not in _ORDER[state]:
            raise SegmentationError(
                f"token {token!r}: {entry.kind} {surface!r} cannot follow "
                f"{state} ({line_msg})")
        morphemes.append(surface)
        state = entry.kind
        prev_text = _match_key(surface)

    for piece in token.split("-"):
        if piece == "(r)":
            if not _vowel_final(prev_text):
                raise SegmentationError(
                    f"token {token!r}: epenthetic '(r)' after non-vowel")
            continue
        i = 0
        while i < len(piece):
            candidates = _trie_matches(lex.trie, piece, i)
            if piece[i] == "r" and _vowel_final(prev_text):
                for end, surface in _trie_matches(lex.trie, piece, i + 1):
                    if _vowel_initial(_match_key(surface)):
                        candidates.append((end, surface))
            if not candidates:
                raise SegmentationError(
                    f"token {token!r}: unknown residue {piece[i:]!r}")
            end, surface = max(candidates, key=lambda c: c[0])
            accept(surface, f"at {piece[i:]!r}")
            i = end
    if not morphemes:
        raise SegmentationError(f"token {token!r}: empty token")
    return morphemes


def join(morphemes: list, lex: Lexicon) -> str:
    """Inverse of segmentation on canonical surface strings."""
    pieces = []
    prev = ""
    for surface in morphemes:
        entry = lex.entries[surface]
        text = _match_key(surface)
        if _vowel_final(prev) and _vowel_initial(text):
            if entry.kind == "tense-marker":
                text = "r" + text
            else:
                pieces.append("(r)")
        pieces.append(text)
        prev = text
    return "-".join(pieces)


# --------------------------------------------------------------------------
# Molecule construction


def lookup(morphemes: list, lex: Lexicon, origin: int = 0) -> list:
    """Build molecules from a morpheme sequence: a case marker fuses into the
    preceding noun, a tense marker sets form on the nearest verbal molecule."""
    model = CostModel()
    molecules: list[Molecule] = []
    kinds: list[str] = []
    for surface in morphemes:
        if surface not in lex.entries:
            raise LexiconError(f"unknown morpheme {surface!r}")
        entry = lex.entries[surface]
        if entry.kind == "noun":
            molecules.append(Molecule(
                label=entry.sem.name, sem=entry.sem, cat=entry.dag,
                origin=origin, entry=entry, spawns_membrane=False))
            kinds.append("noun")
        elif entry.kind == "case-marker":
            if not molecules or kinds[-1] != "noun":
                raise LexiconError(
                    f"case marker {surface!r} has no preceding noun")
            host = molecules[-1]
            fused = unify(host.cat0, entry.dag, model)
            if fused is None:
                raise LexiconError(
                    f"case marker {surface!r} does not unify with {host.label}")
            host.cat0 = fused.fs
            kinds[-1] = "case-marked-noun"
        elif entry.kind in ("verb-root", "auxiliary"):
            binders = _binder_names(entry.sem)
            _, body = lam_spine(entry.sem)
            head, _, _ = app_spine(body)
            label = head.name if isinstance(head, Const) else surface
            molecules.append(Molecule(
                label=label, sem=entry.sem, cat=entry.dag,
                origin=origin, entry=entry, spawns_membrane=True))
            kinds.append(entry.kind)
        elif entry.kind == "tense-marker":
            host = None
            for mol, kind in zip(reversed(molecules), reversed(kinds)):
                if kind in ("verb-root", "auxiliary"):
                    host = mol
                    break
            if host is None:
                raise LexiconError(
                    f"tense marker {surface!r} has no verbal host")
            form = FeatureStructure(_node_from_sexpr(
                read_all(f"(dag (val (form {entry.dag.atom('form')})))")[0],
                {}, expect_dag=True))
            fused = unify(host.cat0, form, model)
            if fused is None:
                raise LexiconError(
                    f"tense marker {surface!r} does not unify with {host.label}")
            host.cat0 = fused.fs
            host.slots = _refresh_slots(host)
        else:
            raise LexiconError(f"unhandled kind {entry.kind}")
    return molecules


def _refresh_slots(mol: Molecule):
    from .engine import slots_from_category

    binders = _binder_names(mol.sem)
    return slots_from_category(mol.cat0, binders)


def molecules_for_sentence(sentence: str, lex: Lexicon) -> tuple:
    """Tokenize on whitespace, segment each token, and build all molecules.

    Returns (tokens, segmentation, molecules)."""
    tokens = sentence.split()
    segmentation = []
    molecules = []
    for ti, token in enumerate(tokens):
        morphs = segment(token, lex)
        segmentation.append(morphs)
        molecules.extend(lookup(morphs, lex, origin=ti))
    return tokens, segmentation, molecules
