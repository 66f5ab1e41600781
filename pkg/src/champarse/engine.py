"""Reaction engine: molecules self-assemble inside nested membranes.

Every recognized linguistic object is thrown into the solution as a molecule
(a lambda term paired with its category feature structure and the unifier
records of its bindings).  Verbs and auxiliaries spawn membranes, which are
their case-domination scopes; floating molecules move through the porous
membranes; a singleton membrane with surplus valences is lifted so the whole
membrane acts as a typed function.

Two membranes in contact may exchange bound molecules: a filler is abstracted
out (inverse beta, the unifier record undone) and rebound only when the move
is strictly cheaper or sanctioned by a one-shot tie-break heuristic, which
guards the loop the unconstrained combinators would otherwise allow.  A
sentential slot is filled by a lifted membrane; the subcategorized binders of
the consumed membrane are bound by the host's own control applications during
beta-reduction, and the membrane dissolves into the binding.

The run is deterministic: a worklist ordered by membrane arrival and slot
index, with the seed perturbing candidate order only among equal costs.
Every state change is a trace event carrying before/after renderings of the
affected membranes, so a trace can be replayed and audited.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .cost import Cost, CostModel, ZERO, canonical_label
from .dag import FeatureStructure, UnifierRecord, unify
from .terms import (
    Const,
    lam,
    lam_spine,
    app_spine,
    build_spine,
    normalize,
    reset_fresh_names,
    substitute,
    term_to_text,
    CatType,
)


class EngineError(Exception):
    pass


class MigrationError(EngineError):
    pass


class _StepLimit(Exception):
    pass


DEFAULT_TIE_BREAK = {
    ("nom", "agent"): "newcomer",
    ("dat", "co-agent"): "newcomer",
}


@dataclass
class EngineConfig:
    model: CostModel = field(default_factory=CostModel)
    seed: int = 0
    max_steps: int = 10000
    tie_break: dict = field(default_factory=lambda: dict(DEFAULT_TIE_BREAK))
    trace: str = "events"

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def tie_rule(self, pair) -> str:
        key = (canonical_label(pair[0]), canonical_label(pair[1]))
        rule = self.tie_break.get(key) or self.tie_break.get((key[1], key[0]))
        return rule or "incumbent"


# --------------------------------------------------------------------------
# Molecules


@dataclass
class Slot:
    index: int
    binder: str
    dag: FeatureStructure
    role: str | None
    cat: str | None
    optional: bool
    sentential: bool
    subcat_chain: tuple = ()
    match_dag: FeatureStructure | None = None

    @property
    def site(self) -> str:
        return self.role or f"arg{self.index}"


def slots_from_category(cat: FeatureStructure, binders) -> list[Slot]:
    slots = []
    for i, arg in enumerate(cat.args):
        role = arg.atom("role")
        sentential = arg.atom("cat") == "S"
        chain = ()
        match_dag = arg
        if sentential:
            sub = arg.feature("subcat")
            if sub is not None:
                chain = tuple(sub.args) if sub.args else (sub,)
            match_dag = arg.without("subcat")
        slots.append(Slot(
            index=i,
            binder=binders[i],
            dag=arg,
            role=role,
            cat=arg.atom("cat"),
            optional=arg.atom("optionality") == "+",
            sentential=sentential,
            subcat_chain=chain,
            match_dag=match_dag,
        ))
    return slots


@dataclass
class Fill:
    filler: "Molecule"
    record: UnifierRecord
    membrane: str | None = None


_uid_counter = [0]


class Molecule:
    """A lambda term with its category and the records of its bindings."""

    def __init__(self, label: str, sem, cat: FeatureStructure, origin: int = 0,
                 entry=None, spawns_membrane: bool = False):
        _uid_counter[0] += 1
        self.uid = _uid_counter[0]
        self.label = label
        self.sem = sem
        self.cat0 = cat
        self.origin = origin
        self.entry = entry
        self.spawns_membrane = spawns_membrane
        binders, _ = lam_spine(sem)
        names = [name for name, _ in binders]
        if len(names) != len(cat.args):
            raise EngineError(
                f"{label}: {len(names)} binders but {len(cat.args)} argument slots")
        self.slots = slots_from_category(cat, names)
        self.fills: list[Fill | None] = [None] * len(self.slots)
        self.arrival = -1
        self.priority = 0.0

    # -- structure ---------------------------------------------------------

    @property
    def arity(self) -> int:
        return len(self.slots)

    def unfilled(self) -> list[int]:
        return [i for i, f in enumerate(self.fills) if f is None]

    def mandatory_open(self) -> list[int]:
        return [i for i in self.unfilled() if not self.slots[i].optional]

    def records(self) -> list[UnifierRecord]:
        return [f.record for f in self.fills if f is not None]

    @property
    def const_name(self) -> str:
        _, body = lam_spine(self.sem)
        head, _, _ = app_spine(body)
        return head.name if isinstance(head, Const) else self.label

    def val_fs(self) -> FeatureStructure:
        v = self.cat0.feature("val")
        return v if v is not None else self.cat0

    def fill(self, index: int, filler: "Molecule", record: UnifierRecord,
             membrane: str | None = None):
        if self.fills[index] is not None:
            raise EngineError(f"slot {index} of {self.label} already filled")
        self.fills[index] = Fill(filler, record, membrane)

    def unfill(self, index: int) -> Fill:
        f = self.fills[index]
        if f is None:
            raise EngineError(f"slot {index} of {self.label} is not filled")
        self.fills[index] = None
        return f

    # -- derived views -----------------------------------------------------

    def term(self):
        """The molecule's lambda term: unfilled binders leading in slot
        order, fillers substituted, control applications beta-reduced."""
        binders, body = lam_spine(self.sem)
        t = body
        for i, slot in enumerate(self.slots):
            f = self.fills[i]
            if f is not None:
                t = substitute(t, slot.binder, f.filler.term())
        open_slots = self.unfilled()
        t = lam([self.slots[i].binder for i in open_slots], t,
                [CatType(self.slots[i].dag) for i in open_slots])
        t = normalize(t)
        return self._attach_records(t)

    def _attach_records(self, t):
        binders, body = lam_spine(t)
        head, args, records = app_spine(body)
        if not (isinstance(head, Const) and head.name == self.const_name
                and len(args) == self.arity):
            return t
        new_records = list(records)
        for i, f in enumerate(self.fills):
            if f is not None:
                new_records[i] = f.record
        body = build_spine(head, args, new_records)
        return lam([name for name, _ in binders], body,
                   [ty for _, ty in binders])

    def type_string(self) -> str:
        parts = [self.slots[i].cat or "?" for i in self.unfilled()]
        if self.cat0.feature("val") is not None:
            parts.append(self.val_fs().atom("cat") or "?")
        else:
            parts.append(self.cat0.atom("cat") or "?")
        return "->".join(parts)

    def __repr__(self):
        return f"Molecule({self.label}#{self.uid})"


# --------------------------------------------------------------------------
# Membranes and the solution


@dataclass
class Membrane:
    mid: str
    arrival: int
    contents: list = field(default_factory=list)
    lifted: list = field(default_factory=list)
    dissolved: bool = False

    def host(self) -> Molecule | None:
        for mol in self.contents:
            if mol.slots:
                return mol
        return None


@dataclass
class Solution:
    world: Membrane = field(default_factory=lambda: Membrane("W", -1))
    membranes: list = field(default_factory=list)
    contacts: set = field(default_factory=set)

    def membrane(self, mid: str) -> Membrane:
        if mid == "W":
            return self.world
        for m in self.membranes:
            if m.mid == mid:
                return m
        raise EngineError(f"no membrane {mid}")

    def places(self):
        return [self.world] + list(self.membranes)

    def top_molecules(self):
        out = []
        for place in self.places():
            out.extend(place.contents)
        return out


def render_term(t) -> str:
    return term_to_text(t, lamsym="λ")


def _collapse_pending(t):
    """A pending control chain (an application headed by an unfilled-slot
    binder) prints as the bare binder in configuration notation."""
    from .terms import App, Var

    if isinstance(t, App):
        head, _, _ = app_spine(t)
        if isinstance(head, Var):
            return head
        return App(_collapse_pending(t.fn), _collapse_pending(t.arg), t.record)
    if hasattr(t, "body"):
        from .terms import Lam

        return Lam(t.var, t.var_type, _collapse_pending(t.body))
    return t


def render_membrane(m: Membrane, collapse: bool = False) -> str:
    if m.dissolved or not m.contents:
        return m.mid
    if len(m.contents) == 1:
        mol = m.contents[0]
        t = mol.term()
        binders, body = lam_spine(t)
        if collapse:
            body = _collapse_pending(body)
        prefix = ""
        if binders:
            prefix = "λ" + "".join(name for name, _ in binders) + "."
        return f"{prefix}{m.mid} |= {render_term(body)}"
    inner = ", ".join(render_term(mol.term()) for mol in m.contents)
    return f"{m.mid} |= {{{inner}}}"


def render_solution(sol: Solution, include_world: bool = True) -> str:
    parts = []
    if include_world and sol.world.contents:
        parts.append(render_membrane(sol.world))
    for m in sol.membranes:
        parts.append(render_membrane(m))
    return " || ".join(parts) if parts else "(empty)"


def render_configuration(sol: Solution) -> str:
    """Membrane configuration in the side-by-side notation (world omitted)."""
    parts = [render_membrane(m, collapse=True) for m in sol.membranes]
    return " || ".join(parts)


# --------------------------------------------------------------------------
# Trace


@dataclass
class TraceEvent:
    step: int
    kind: str
    membranes: tuple
    payload: str
    cost_delta: Fraction
    before: dict
    after: dict

    def line(self) -> str:
        mids = ",".join(self.membranes) or "-"
        sign = "+" if self.cost_delta >= 0 else ""
        return f"{self.step} {self.kind} {mids} {self.payload} {sign}{_frac(self.cost_delta)}"

    def record_line(self) -> str:
        sign = "+" if self.cost_delta >= 0 else ""
        mids = ",".join(self.membranes) or "-"
        return (f"step={self.step} kind={self.kind} membranes={mids} "
                f"delta={sign}{_frac(self.cost_delta)} payload={self.payload}")


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def replay(initial: dict, events) -> dict:
    """Fold the after-snapshots of ``events`` over an initial rendering."""
    state = dict(initial)
    for ev in events:
        state.update(ev.after)
    return state


def render_state(sol: Solution) -> dict:
    state = {"W": render_membrane(sol.world)}
    for m in sol.membranes:
        state[m.mid] = render_membrane(m)
    return state


# --------------------------------------------------------------------------
# Conservation and typing checks (used by the test harness and the observer)


def reachable_molecules(sol: Solution) -> list:
    out = []

    def visit(mol):
        out.append(mol)
        for f in mol.fills:
            if f is not None:
                visit(f.filler)

    for mol in sol.top_molecules():
        visit(mol)
    return out


def valence_totals(sol: Solution):
    """(open slots, attached records) summed over every reachable molecule."""
    open_slots = 0
    records = 0
    for mol in reachable_molecules(sol):
        open_slots += len(mol.unfilled())
        records += len(mol.records())
    return open_slots, records


def check_molecule(mol: Molecule, model: CostModel) -> None:
    """Raise EngineError if the molecule violates its typing invariants."""
    t = mol.term()
    binders, _ = lam_spine(t)
    if len(binders) != len(mol.unfilled()):
        raise EngineError(
            f"{mol.label}: {len(binders)} leading binders but "
            f"{len(mol.unfilled())} unfilled slots")
    for i, f in enumerate(mol.fills):
        if f is None:
            continue
        if model.lookup(*f.record.pair) != f.record.cost:
            raise EngineError(f"{mol.label}: record cost mismatch at slot {i}")
        if not f.filler.slots:
            if unify(f.filler.cat0, mol.slots[i].dag, model) is None:
                raise EngineError(
                    f"{mol.label}: slot {i} filler does not unify")
        check_molecule(f.filler, model)


# --------------------------------------------------------------------------
# Engine


@dataclass
class RunResult:
    solution: Solution
    events: list
    configurations: list
    steps: int
    halt_reason: str

    @property
    def quiescent(self) -> bool:
        return self.halt_reason != "step-limit"


class Engine:
    """One reaction run over a solution.  Owns the trace and the fresh-name
    stream; safe to drive from a single thread only."""

    def __init__(self, cfg: EngineConfig, observer=None):
        self.cfg = cfg
        self.observer = observer
        self.solution = Solution()
        self.events: list[TraceEvent] = []
        self.configurations: list[str] = []
        self.halted = False
        self._rng = random.Random(cfg.seed)
        self._arrivals = 0
        self._restructured = set()

    # -- trace helpers -----------------------------------------------------

    def _snap(self, mids) -> dict:
        out = {}
        for mid in mids:
            out[mid] = render_membrane(self.solution.membrane(mid))
        return out

    def _emit(self, kind, mids, payload, delta=Fraction(0), before=None):
        if kind != "halt" and len(self.events) >= self.cfg.max_steps:
            self.halted = True
            raise _StepLimit
        ev = TraceEvent(
            step=len(self.events) + 1,
            kind=kind,
            membranes=tuple(mids),
            payload=payload,
            cost_delta=delta,
            before=before or {},
            after=self._snap(mids),
        )
        self.events.append(ev)
        if self.observer is not None:
            self.observer(self, ev)
        return ev

    def note_configuration(self):
        line = render_configuration(self.solution)
        if line and (not self.configurations or self.configurations[-1] != line):
            self.configurations.append(line)

    # -- structural operations ----------------------------------------------

    def inject(self, mol: Molecule):
        mol.arrival = self._arrivals
        mol.priority = self._rng.random()
        self._arrivals += 1
        sol = self.solution
        before = self._snap(["W"])
        sol.world.contents.append(mol)
        self._emit("inject", ["W"], f"{mol.label} : {mol.type_string()}",
                   before=before)
        if mol.spawns_membrane:
            self.spawn_membrane(mol)

    def spawn_membrane(self, mol: Molecule) -> Membrane:
        sol = self.solution
        mid = f"s{len(sol.membranes) + 1}"
        m = Membrane(mid, arrival=mol.arrival)
        before = self._snap(["W"])
        if mol in sol.world.contents:
            sol.world.contents.remove(mol)
        m.contents.append(mol)
        sol.membranes.append(m)
        sol.contacts.add(frozenset((mid, "W")))
        for other in sol.membranes[:-1]:
            sol.contacts.add(frozenset((mid, other.mid)))
        linked = ",".join(sorted(x.mid for x in sol.membranes if x is not m) + ["W"])
        self._emit("spawn", ["W", mid], f"{mid} <- {mol.label} contacts={linked}",
                   before=before)
        self.lift_valences(m)
        if any(x.contents and x is not m for x in sol.membranes):
            self.note_configuration()
        return m

    def lift_valences(self, m: Membrane):
        """Hoist a singleton molecule's surplus binders to membrane level."""
        host = m.host()
        if m.dissolved or len(m.contents) != 1 or host is None:
            return m
        binders, _ = lam_spine(host.term())
        new = [name for name, _ in binders]
        if new != m.lifted:
            before = self._snap([m.mid])
            m.lifted = new
            shown = "λ" + "".join(new) if new else "none"
            self._emit("lift", [m.mid], f"surplus valences {shown}", before=before)
        return m

    def migrate(self, mol: Molecule, src: Membrane, dst: Membrane):
        for place in self.solution.places():
            for other in place.contents:
                for f in other.fills:
                    if f is not None and f.filler is mol:
                        raise MigrationError(
                            f"{mol.label} is concatenated and cannot migrate")
        if mol not in src.contents:
            raise MigrationError(f"{mol.label} is not in {src.mid}")
        before = self._snap([src.mid, dst.mid])
        src.contents.remove(mol)
        dst.contents.append(mol)
        self._emit("migrate", [src.mid, dst.mid],
                   f"{mol.label} {src.mid}->{dst.mid}", before=before)

    # -- reactions -----------------------------------------------------------

    def _free_candidates(self, m: Membrane):
        """Floating molecules reachable from m (its own extras, the world,
        and other membranes' extras: the membranes are porous)."""
        out = []
        for place in self.solution.places():
            host = place.host()
            for mol in place.contents:
                if mol is host and place is not self.solution.world:
                    continue
                if mol.slots:
                    continue
                out.append((mol, place))
        return out

    def react_local(self, m: Membrane) -> bool:
        """Fill the host's slots from reachable floating molecules, cheapest
        candidate first, leftmost fillable slot first."""
        host = m.host()
        if host is None or m.dissolved:
            return False
        changed = False
        while True:
            action = None
            for i in host.unfilled():
                slot = host.slots[i]
                if slot.sentential:
                    continue
                scored = []
                for cand, place in self._free_candidates(m):
                    if slot.cat and cand.cat0.atom("cat") != slot.cat:
                        continue
                    result = unify(cand.cat0, slot.dag, self.cfg.model,
                                   site=f"{host.label}.{slot.site}")
                    if result is None:
                        continue
                    scored.append((result.record.cost, cand.priority, cand.uid,
                                   cand, place, result))
                if scored:
                    scored.sort(key=lambda s: (s[0], s[1], s[2]))
                    action = (i,) + tuple(scored[0][3:])
                    break
            if action is None:
                return changed
            i, cand, place, result = action
            if place is not m:
                self.migrate(cand, place, m)
            self._apply_fill(m, host, i, cand, result)
            changed = True

    def _apply_fill(self, m: Membrane, host: Molecule, index: int,
                    filler: Molecule, result, membrane_id=None, note=""):
        slot = host.slots[index]
        before = self._snap([m.mid])
        if filler in m.contents:
            m.contents.remove(filler)
        host.fill(index, filler, result.record, membrane_id)
        pair = result.record.pair
        payload = (f"{host.label}.{slot.site} <- {filler.label} "
                   f"pair=({pair[0]},{pair[1]}){note}")
        delta = Fraction(0) if result.record.cost.is_infinite else result.record.cost.value
        self._emit("apply", [m.mid], payload, delta=delta, before=before)
        self.lift_valences(m)

    # -- membrane interaction -------------------------------------------------

    def contact(self, outer: Membrane, inner: Membrane) -> bool:
        """Let the outer membrane's host satisfy its frame from material bound
        inside the inner membrane: strictly cheaper rebindings, tie-break
        sanctioned rebindings, and sentential binding of the lifted inner."""
        if outer.dissolved or inner.dissolved:
            return False
        host_o = outer.host()
        if host_o is None or not host_o.unfilled():
            return False
        changed = False
        session_noted = False
        progress = True
        while progress:
            progress = False
            for i in host_o.unfilled():
                slot = host_o.slots[i]
                if slot.sentential:
                    if self._bind_sentential(outer, host_o, i, inner):
                        changed = progress = True
                        break
                    continue
                plan = self._plan_steal(outer, host_o, i, inner)
                if plan is None:
                    continue
                if not session_noted:
                    before = self._snap([outer.mid, inner.mid])
                    self._emit("contact", [outer.mid, inner.mid],
                               f"{outer.mid} || {inner.mid}", before=before)
                    session_noted = True
                self._steal(outer, host_o, i, inner, *plan)
                changed = progress = True
                break
        return changed

    def _plan_steal(self, outer, host_o, i, inner):
        host_i = inner.host()
        if host_i is None:
            return None
        slot = host_o.slots[i]
        options = []
        for j, f in enumerate(host_i.fills):
            if f is None or f.filler.slots:
                continue
            filler = f.filler
            key = (host_o.uid, i, filler.uid)
            if key in self._restructured:
                continue
            if slot.cat and filler.cat0.atom("cat") != slot.cat:
                continue
            result = unify(filler.cat0, slot.dag, self.cfg.model,
                           site=f"{host_o.label}.{slot.site}")
            if result is None:
                continue
            new_cost = result.record.cost
            old_cost = f.record.cost
            if new_cost < old_cost:
                sanction = "cheaper"
            elif new_cost == old_cost:
                rule = self.cfg.tie_rule(result.record.pair)
                winner = host_o if (rule == "newcomer"
                                    and outer.arrival > inner.arrival) else host_i
                pair = result.record.pair
                self._emit(
                    "react", [outer.mid, inner.mid],
                    f"tie-break pair=({pair[0]},{pair[1]}) filler={filler.label} "
                    f"incumbent={host_i.label} challenger={host_o.label} "
                    f"rule={rule} winner={winner.label}",
                    before=self._snap([outer.mid, inner.mid]))
                if winner is not host_o:
                    self._restructured.add(key)
                    continue
                sanction = "tie-break"
            else:
                continue
            gap = abs(host_o.origin - filler.origin)
            options.append(((new_cost, -old_cost.value, -gap, -j, filler.priority),
                            j, result, sanction))
        if not options:
            return None
        options.sort(key=lambda o: o[0])
        _, j, result, sanction = options[0]
        return j, result, sanction

    def _steal(self, outer, host_o, i, inner, j, result, sanction):
        host_i = inner.host()
        filler = host_i.fills[j].filler
        self._restructured.add((host_o.uid, i, filler.uid))
        before = self._snap([inner.mid])
        old = host_i.unfill(j)
        inner.contents.append(filler)
        self._emit(
            "abstract", [inner.mid],
            f"{filler.label} from {host_i.label}.{host_i.slots[j].site} "
            f"undo pair=({old.record.pair[0]},{old.record.pair[1]}) [{sanction}]",
            delta=-(old.record.cost.value), before=before)
        self.migrate(filler, inner, outer)
        self.lift_valences(inner)
        self._apply_fill(outer, host_o, i, filler, result)
        self.note_configuration()

    def _bind_sentential(self, outer, host_o, i, inner) -> bool:
        """Fill a sentential slot with the lifted inner membrane, binding the
        subcategorized roles through the host's control applications."""
        host_i = inner.host()
        if host_i is None or len(inner.contents) != 1:
            return False
        slot = host_o.slots[i]
        open_idx = host_i.unfilled()
        chain = slot.subcat_chain
        if len(chain) > len(open_idx):
            return False
        for want, idx in zip(chain, open_idx):
            inner_slot = host_i.slots[idx]
            if want.atom("role") and want.atom("role") != inner_slot.role:
                return False
            if unify(want, inner_slot.dag, self.cfg.model) is None:
                return False
        for idx in open_idx[len(chain):]:
            if not host_i.slots[idx].optional:
                return False
        result = unify(host_i.val_fs(), slot.match_dag, self.cfg.model,
                       site=f"{host_o.label}.{slot.site}")
        if result is None:
            return False
        before = self._snap([outer.mid, inner.mid])
        self._emit("contact", [outer.mid, inner.mid],
                   f"{outer.mid} || {inner.mid} sentential", before=before)
        before = self._snap([outer.mid, inner.mid])
        inner.contents.remove(host_i)
        inner.dissolved = True
        inner.lifted = []
        host_o.fill(i, host_i, result.record, inner.mid)
        pair = result.record.pair
        payload = (f"{host_o.label}.{slot.site} <- {inner.mid}({host_i.label}) "
                   f"pair=({pair[0]},{pair[1]}) dissolve")
        delta = Fraction(0) if result.record.cost.is_infinite else result.record.cost.value
        self._emit("apply", [outer.mid, inner.mid], payload, delta=delta,
                   before=before)
        self.lift_valences(outer)
        self.note_configuration()
        return True

    # -- the loop ---------------------------------------------------------

    def stabilize(self):
        while True:
            fired = False
            for m in sorted(self.solution.membranes, key=lambda m: m.arrival):
                if self.react_local(m):
                    fired = True
            ordered = sorted(self.solution.membranes, key=lambda m: -m.arrival)
            for outer in ordered:
                for inner in sorted(self.solution.membranes, key=lambda m: m.arrival):
                    if inner is outer:
                        continue
                    if self.contact(outer, inner):
                        fired = True
            if not fired:
                return

    def halt_reason(self) -> str:
        if self.halted:
            return "step-limit"
        for mol in self.solution.top_molecules():
            if mol.mandatory_open():
                return "incomplete-mandatory-slot"
        return "quiescent"

    def finish(self) -> RunResult:
        reason = self.halt_reason()
        self._emit("halt", [m.mid for m in self.solution.membranes] or ["W"],
                   reason)
        return RunResult(
            solution=self.solution,
            events=self.events,
            configurations=self.configurations,
            steps=len(self.events),
            halt_reason=reason,
        )


def run(molecules, cfg: EngineConfig | None = None, observer=None) -> RunResult:
    """Inject the molecules left to right, reacting to quiescence after each
    injection; deterministic for a fixed config (the seed only perturbs
    candidate order among equal costs)."""
    cfg = cfg or EngineConfig()
    reset_fresh_names()
    eng = Engine(cfg, observer)
    try:
        for mol in molecules:
            eng.inject(mol)
            eng.stabilize()
    except _StepLimit:
        pass
    return eng.finish()


def total_cost(sol: Solution) -> Cost:
    """Sum of the costs of every attached unifier record in the solution."""
    total = ZERO
    for mol in reachable_molecules(sol):
        for rec in mol.records():
            total = total + rec.cost
    return total


def final_assignment(sol: Solution) -> frozenset:
    """The slot-filler assignment realized by the solution, as
    (host uid, slot index, filler uid) triples."""
    triples = []
    for mol in reachable_molecules(sol):
        for i, f in enumerate(mol.fills):
            if f is not None:
                triples.append((mol.uid, i, f.filler.uid))
    return frozenset(triples)
