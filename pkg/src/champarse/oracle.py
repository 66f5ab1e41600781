"""Exhaustive assignment oracle for small inputs.

Enumerates every well-typed slot-filler assignment over a molecule set,
scoring each directly from the case/role cost table.  Because the engine's
binder-reordering combinators make any argument order realizable, assignments
are enumerated order-free (as sets of slot fills); the engine's greedy,
event-driven search is checked against the minimum this enumeration finds.

Deliberately independent of the reaction engine: costs come straight from
``lookup_cost`` on the fillers' case and the slots' role, and validity is
decided by direct inspection of the category structures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .cost import Cost, ZERO, lookup_cost
from .engine import EngineConfig, Molecule


class OracleBudgetError(Exception):
    pass


@dataclass(frozen=True)
class OracleAssignment:
    fills: frozenset          # (host uid, slot index, filler uid)
    cost: Cost
    complete: bool


def _noun_fill_cost(noun: Molecule, slot, model) -> Cost | None:
    if slot.cat and noun.cat0.atom("cat") != slot.cat:
        return None
    case = noun.cat0.atom("case")
    role = slot.role
    if case is None or role is None:
        return ZERO
    cost = lookup_cost(case, role, model)
    return None if cost.is_infinite else cost


def _subcat_ok(host_slot, filler: Molecule, assigned) -> bool:
    """The filler verb's slots left open by ``assigned`` must start with the
    subcategorized roles in order, and any remainder must be optional."""
    open_slots = [s for s in filler.slots if (filler.uid, s.index) not in assigned]
    chain = host_slot.subcat_chain
    if len(chain) > len(open_slots):
        return False
    for want, got in zip(chain, open_slots):
        want_role = want.atom("role")
        if want_role is not None and want_role != got.role:
            return False
        if want.atom("cat") and got.cat and want.atom("cat") != got.cat:
            return False
    return all(s.optional for s in open_slots[len(chain):])


def oracle_enumerate(molecules, cfg: EngineConfig | None = None):
    """All well-typed assignments with their total costs.

    Refuses inputs of more than six molecules (combinatorial guard)."""
    if len(molecules) > 6:
        raise OracleBudgetError(f"{len(molecules)} molecules exceed the oracle budget")
    cfg = cfg or EngineConfig()
    model = cfg.model
    nouns = [m for m in molecules if not m.slots]
    verbs = [m for m in molecules if m.slots]
    by_uid = {m.uid: m for m in molecules}

    slot_options = []
    slot_keys = []
    for v in verbs:
        for s in v.slots:
            options = [None]
            if s.sentential:
                for other in verbs:
                    if other is v:
                        continue
                    if s.cat and other.val_fs().atom("cat") != s.cat:
                        continue
                    options.append((other.uid, ZERO))
            else:
                for n in nouns:
                    c = _noun_fill_cost(n, s, model)
                    if c is not None:
                        options.append((n.uid, c))
            slot_options.append(options)
            slot_keys.append((v.uid, s.index))

    out = []
    seen = set()
    for combo in itertools.product(*slot_options):
        fills = {}
        cost = ZERO
        used_nouns = []
        used_verbs = []
        ok = True
        for key, choice in zip(slot_keys, combo):
            if choice is None:
                continue
            uid, c = choice
            fills[key] = uid
            cost = cost + c
            if by_uid[uid].slots:
                used_verbs.append(uid)
            else:
                used_nouns.append(uid)
        if len(set(used_nouns)) != len(used_nouns):
            continue
        if len(set(used_verbs)) != len(used_verbs):
            continue
        assigned = set(fills)
        for (host_uid, idx), filler_uid in fills.items():
            filler = by_uid[filler_uid]
            if filler.slots:
                host = by_uid[host_uid]
                if not _subcat_ok(host.slots[idx], filler, assigned):
                    ok = False
                    break
        if not ok:
            continue
        roots = [v for v in verbs if v.uid not in used_verbs]
        if verbs and len(roots) == 1 and _reaches_all(roots[0], fills, by_uid, verbs):
            complete = (set(used_nouns) == {n.uid for n in nouns}
                        and _mandatory_done(verbs, fills))
        else:
            complete = not verbs and not nouns
        key = frozenset((h, i, u) for (h, i), u in fills.items())
        if key in seen:
            continue
        seen.add(key)
        out.append(OracleAssignment(fills=key, cost=cost, complete=complete))
    return out


def _reaches_all(root: Molecule, fills, by_uid, verbs) -> bool:
    reached = {root.uid}
    frontier = [root.uid]
    while frontier:
        host = frontier.pop()
        for (h, _), u in fills.items():
            if h == host and by_uid[u].slots and u not in reached:
                reached.add(u)
                frontier.append(u)
    return reached == {v.uid for v in verbs}


def _mandatory_done(verbs, fills) -> bool:
    """Every mandatory slot is directly filled or consumed through its host's
    subcategorization chain (the slot's verb being a sentential filler)."""
    hosts = {}
    for (h, i), u in fills.items():
        hosts[u] = (h, i)
    for v in verbs:
        open_mandatory = [s for s in v.slots
                          if (v.uid, s.index) not in fills and not s.optional]
        if not open_mandatory:
            continue
        if v.uid not in hosts:
            return False
        # _subcat_ok already guaranteed the open prefix is exactly the chain
        # and the remainder optional, so reaching here means they are covered.
    return True


def minimal_complete(assignments):
    """(minimum cost, assignments achieving it) over complete assignments."""
    complete = [a for a in assignments if a.complete]
    if not complete:
        return None, []
    best = min(a.cost for a in complete)
    return best, [a for a in complete if a.cost == best]
