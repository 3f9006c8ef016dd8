"""Tabulated simulation over a tree of micro automata.

The automaton's tree is cut repeatedly (same balanced separator as the
decomposition stage) until every piece owns at most t states.  A split-out
child appears in its parent piece as a pseudo leaf whose two states are
shared copies of the child's entry/exit pair; the pseudo transition itself
never fires on input, it only marks where the child plugs in.

A global state set is the concatenation of per-micro local sets, shared
states duplicated.  One symbol step is: per-micro character moves, then
two depth-first propagation passes that close each micro by table lookup
and mirror the shared bits between parent and child.  Any cycle-free
epsilon path in these automata uses at most one backward edge, so two
passes reach everything; ``two_pass_audit`` runs a third pass in tests to
demonstrate it changes nothing.

Closure results are memoized in a table shared by all forests, keyed by a
canonical micro encoding (preorder shape plus post-construction edges,
direction-flagged) and the local set, so same-shaped micros anywhere share
entries.  Character moves go through per-micro symbol dictionaries rather
than tables; only epsilon closure is tabulated.

Encoding layout: the shape string lists node kinds in preorder ("c"
concat, "u" union, "s" star, "E" epsilon leaf, "L" any other leaf; arity
is implied by the kind), and the extras are (preorder index, backward?)
pairs for post-construction epsilon edges on that node's state pair.  The
encoding decodes back to an automaton with identical epsilon structure and
state numbering, which is how the tests audit table entries.
"""

from __future__ import annotations

import contextlib
import itertools
import threading

from . import kernel
from . import ledger as ledger_mod
from .automata import Tnfa, as_symbols, build_tnfa, reverse
from .decomposition import _replace_subtree, subtree_sizes
from .engine import MIN_SPLIT_STATES, CompressedPath
from .ledger import current_ledger
from .syntax import (
    Beta,
    Concat,
    Epsilon,
    Literal,
    Pseudo,
    Star,
    Union,
    real_node_count,
    walk,
)

DEFAULT_T = 32

_pass_audit = {"enabled": False, "count": 0}


@contextlib.contextmanager
def two_pass_audit():
    """Within this context every propagation runs a third pass and asserts
    it is a no-op; yields a dict whose "count" tracks audited steps."""
    prev = _pass_audit["enabled"]
    _pass_audit["enabled"] = True
    _pass_audit["count"] = 0
    try:
        yield _pass_audit
    finally:
        _pass_audit["enabled"] = prev


def _shape(tree) -> str:
    parts = []
    for node in walk(tree):
        if isinstance(node, Concat):
            parts.append("c")
        elif isinstance(node, Union):
            parts.append("u")
        elif isinstance(node, Star):
            parts.append("s")
        elif isinstance(node, Epsilon):
            parts.append("E")
        elif isinstance(node, (Literal, Beta, Pseudo)):
            parts.append("L")
        else:
            raise TypeError(f"not an Ast node: {node!r}")
    return "".join(parts)


def decode_encoding(enc) -> Tnfa:
    """Rebuild an automaton with the encoding's epsilon structure."""
    shape, extras = enc
    pos = itertools.count(1)
    idx = 0

    def build():
        nonlocal idx
        kind = shape[idx]
        idx += 1
        if kind == "c":
            return Concat(build(), build())
        if kind == "u":
            return Union(build(), build())
        if kind == "s":
            return Star(build())
        if kind == "E":
            return Epsilon()
        assert kind == "L"
        return Literal(0, next(pos))

    tree = build()
    assert idx == len(shape)
    tnfa = build_tnfa(tree)
    order = list(walk(tree))
    for node_idx, backward in extras:
        theta, phi = tnfa.node_states[order[node_idx]]
        if backward:
            tnfa.add_extra_eps(phi, theta)
        else:
            tnfa.add_extra_eps(theta, phi)
    return tnfa


class ClosureTable:
    """Shared memo of per-micro closures, keyed (direction, encoding, set).

    A forest resolves each micro's encoding to its per-encoding sub-table
    once at build time; the hot path then hits a plain dict.  Writes take
    the lock, reads do not (filling an idempotent entry twice is benign).
    """

    def __init__(self):
        self._tables = {}
        self._lock = threading.Lock()
        self.misses = 0

    def subtable(self, enc, reversed_dir: bool) -> dict:
        key = (reversed_dir, enc)
        sub = self._tables.get(key)
        if sub is None:
            with self._lock:
                sub = self._tables.setdefault(key, {})
        return sub

    def fill(self, sub: dict, prog, bits: int) -> int:
        closed = kernel.impl.closure(prog, bits)
        self.misses += 1
        with self._lock:
            sub[bits] = closed
        return closed

    def closure(self, enc, prog, bits: int, reversed_dir: bool) -> int:
        sub = self.subtable(enc, reversed_dir)
        hit = sub.get(bits)
        if hit is None:
            hit = self.fill(sub, prog, bits)
        return hit

    def entries(self):
        for (reversed_dir, enc), sub in self._tables.items():
            for bits, closed in sub.items():
                yield reversed_dir, enc, bits, closed

    def size(self) -> int:
        return sum(len(sub) for sub in self._tables.values())


GLOBAL_TABLE = ClosureTable()


class Micro:
    __slots__ = (
        "index",
        "tnfa",
        "rtnfa",
        "enc",
        "offset",
        "mask",
        "theta_local",
        "phi_local",
        "parent_link",  # (parent index, theta bit there, phi bit there)
        "child_links",  # [(theta bit here, phi bit here, child index)], l-to-r
        "local_to_global",
        "prog_f",
        "prog_b",
        "tbl_f",  # this micro's slice of the closure table, per direction
        "tbl_b",
        "moves_f",  # sym -> ((source bit, target bit), ...)
        "moves_b",
    )

    def __init__(self, index, tnfa, enc):
        self.index = index
        self.tnfa = tnfa
        self.rtnfa = reverse(tnfa)
        self.enc = enc
        self.offset = 0
        self.mask = (1 << tnfa.k) - 1
        self.theta_local = tnfa.theta
        self.phi_local = tnfa.phi
        self.parent_link = None
        self.child_links = []
        self.local_to_global = [0] * tnfa.k
        self.prog_f = tnfa.prog()
        self.prog_b = self.rtnfa.prog()
        self.tbl_f = None
        self.tbl_b = None
        self.moves_f = {
            sym: self.prog_f.pure_moves(sym) for sym in self.prog_f.by_sym
        }
        self.moves_b = {
            sym: self.prog_b.pure_moves(sym) for sym in self.prog_b.by_sym
        }

    def prog(self, reversed_dir: bool):
        return self.prog_b if reversed_dir else self.prog_f

    def bind_table(self, table: ClosureTable):
        self.tbl_f = table.subtable(self.enc, False)
        self.tbl_b = table.subtable(self.enc, True)


def _choose_piece_separator(tree):
    """Balanced edge whose subtree owns at least one real node (a pure
    pseudo leaf would not shrink anything)."""
    sizes, preorder = subtree_sizes(tree)
    v = sizes[tree]
    bound = 2 * v / 3 + 1
    best = best_key = None
    fallback = fallback_key = None
    for node, size in sizes.items():
        if node is tree or isinstance(node, Pseudo):
            continue
        key = (max(size, v - size), preorder[node])
        if fallback_key is None or key < fallback_key:
            fallback, fallback_key = node, key
        if size <= bound and v - size <= bound:
            if best_key is None or key < best_key:
                best, best_key = node, key
    assert fallback is not None, "tree has no real nodes to split off"
    return best if best is not None else fallback


class MicroForest:
    __slots__ = (
        "tnfa",
        "t",
        "micros",
        "root_index",
        "postorder",
        "total_width",
        "primary",  # global state -> (micro index, local bit)
        "copies",  # global state -> ((micro index, local bit), ...)
        "table",
        # flattened per-micro hot-loop data, one entry per micro:
        "tbls",  # (forward table slice, backward table slice)
        "progs",
        "links",  # ((lth, lph, ci, child theta, child phi), ...) l-to-r
        "sym_micros",  # per direction: sym -> ((micro, move pairs), ...)
        "parent_of",
        "step_cache",  # (direction, sym, state) -> closed state
        "inject_cache",
    )

    def micro_count(self) -> int:
        return len(self.micros)

    def finalize(self):
        self.tbls = ([m.tbl_f for m in self.micros], [m.tbl_b for m in self.micros])
        self.progs = (
            [m.prog_f for m in self.micros],
            [m.prog_b for m in self.micros],
        )
        links = []
        for m in self.micros:
            links.append(
                tuple(
                    (lth, lph, ci, self.micros[ci].theta_local,
                     self.micros[ci].phi_local)
                    for lth, lph, ci in m.child_links
                )
            )
        self.links = links
        by_sym = ({}, {})
        for mi, m in enumerate(self.micros):
            for sym, pairs in m.moves_f.items():
                by_sym[0].setdefault(sym, []).append((mi, pairs))
            for sym, pairs in m.moves_b.items():
                by_sym[1].setdefault(sym, []).append((mi, pairs))
        self.sym_micros = (
            {sym: tuple(v) for sym, v in by_sym[0].items()},
            {sym: tuple(v) for sym, v in by_sym[1].items()},
        )
        self.parent_of = [
            m.parent_link[0] if m.parent_link else -1 for m in self.micros
        ]
        self.step_cache = {}
        self.inject_cache = {}


def build_micro_forest(tnfa: Tnfa, t: int, table: ClosureTable = None) -> MicroForest:
    """Cut the automaton into a tree of micros owning at most t states each."""
    if t < 3:
        raise ValueError("micro size must be at least 3")
    if tnfa.tree is None:
        raise ValueError("automaton carries no tree")
    maxnodes = max(1, t // 2)

    pieces = []  # (piece tree, id(new node) -> original node)
    links = {}  # pseudo id -> piece index of the split-out child
    pseudo_ids = itertools.count()

    def partition(tree, orig_of):
        if real_node_count(tree) <= maxnodes:
            pieces.append((tree, orig_of))
            return len(pieces) - 1
        u = _choose_piece_separator(tree)
        pid = next(pseudo_ids)
        newtree, new_for_old = _replace_subtree(tree, u, Pseudo(pid))
        new_orig = dict(orig_of)
        for old, new in new_for_old.items():
            new_orig[id(new)] = orig_of.get(id(old), old)
        root_idx = partition(newtree, new_orig)
        links[pid] = partition(u, orig_of)
        return root_idx

    root_index = partition(tnfa.tree, {})

    # Local automata plus their post-construction edges, reassigned to the
    # piece owning the edge's node.
    micros = []
    owner_piece = {}  # id(original node) -> (piece index, piece-local node)
    for pi, (ptree, orig_of) in enumerate(pieces):
        for node in walk(ptree):
            if isinstance(node, Pseudo):
                continue
            orig = orig_of.get(id(node), node)
            owner_piece[id(orig)] = (pi, node)

    state_owner = {}
    for node, (th, ph) in tnfa.node_states.items():
        state_owner[th] = (node, False)
        state_owner[ph] = (node, True)

    local_tnfas = [build_tnfa(ptree) for ptree, _ in pieces]
    piece_extras = [[] for _ in pieces]
    for src, dst in tnfa.extra_eps:
        w, src_is_exit = state_owner[src]
        assert state_owner[dst][0] is w, "post-construction edge spans nodes"
        pi, local_node = owner_piece[id(w)]
        lth, lph = local_tnfas[pi].node_states[local_node]
        backward = src_is_exit
        if backward:
            local_tnfas[pi].add_extra_eps(lph, lth)
        else:
            local_tnfas[pi].add_extra_eps(lth, lph)
        piece_extras[pi].append((local_node, backward))

    offset = 0
    for pi, (ptree, orig_of) in enumerate(pieces):
        lt = local_tnfas[pi]
        order = {node: i for i, node in enumerate(walk(ptree))}
        extras = tuple(sorted((order[n], b) for n, b in piece_extras[pi]))
        micro = Micro(pi, lt, (_shape(ptree), extras))
        micro.offset = offset
        offset += lt.k
        micros.append(micro)

    forest = MicroForest()
    forest.tnfa = tnfa
    forest.t = t
    forest.micros = micros
    forest.root_index = root_index
    forest.total_width = offset
    forest.table = table if table is not None else GLOBAL_TABLE
    for micro in micros:
        micro.bind_table(forest.table)

    primary = {}
    copies = {s: [] for s in range(tnfa.k)}
    for pi, (ptree, orig_of) in enumerate(pieces):
        micro = micros[pi]
        lt = local_tnfas[pi]
        pseudo_links = []
        for node in walk(ptree):
            lth, lph = lt.node_states[node]
            if isinstance(node, Pseudo):
                child_idx = links[node.pseudo_id]
                child_tree, child_orig = pieces[child_idx]
                corig = child_orig.get(id(child_tree), child_tree)
                gth, gph = tnfa.node_states[corig]
                pseudo_links.append((lth, lph, child_idx))
                micros[child_idx].parent_link = (
                    pi,
                    lth,
                    lph,
                )
            else:
                orig = orig_of.get(id(node), node)
                gth, gph = tnfa.node_states[orig]
                primary[gth] = (pi, lth)
                primary[gph] = (pi, lph)
            micro.local_to_global[lth] = gth
            micro.local_to_global[lph] = gph
            copies[gth].append((pi, lth))
            copies[gph].append((pi, lph))
        micro.child_links = pseudo_links

    forest.primary = [primary[s] for s in range(tnfa.k)]
    forest.copies = {s: tuple(bits) for s, bits in copies.items()}

    postorder = []
    stack = [(root_index, False)]
    while stack:
        mi, done = stack.pop()
        if done:
            postorder.append(mi)
            continue
        stack.append((mi, True))
        for _, _, ci in micros[mi].child_links:
            stack.append((ci, False))
    forest.postorder = postorder
    forest.finalize()
    return forest


def _split_locals(forest: MicroForest, state: int) -> list:
    return [(state >> m.offset) & m.mask for m in forest.micros]


def _assemble(forest: MicroForest, locs: list) -> int:
    out = 0
    for m, bits in zip(forest.micros, locs):
        out |= bits << m.offset
    return out


def _chain_add(needed: set, parent_of: list, mi: int):
    while mi >= 0 and mi not in needed:
        needed.add(mi)
        mi = parent_of[mi]


def _one_pass(forest: MicroForest, locs: list, reversed_dir: bool,
              needed: set) -> bool:
    """One depth-first propagation pass; True when any bit crossed a
    parent/child link (a second pass is then needed).

    ``needed`` holds the micros worth visiting (bit holders plus their
    ancestors); micros gaining their first bit are chained in so a later
    pass sees them.  The traversal runs on an explicit stack; subtrees
    outside ``needed`` that receive nothing from above are skipped whole.
    """
    table = forest.table
    tbls = forest.tbls[reversed_dir]
    progs = forest.progs[reversed_dir]
    all_links = forest.links
    parent_of = forest.parent_of

    crossed = False
    root = forest.root_index
    bits = locs[root]
    if bits:
        closed = tbls[root].get(bits)
        locs[root] = closed if closed is not None else table.fill(
            tbls[root], progs[root], bits
        )
    # Stack frames: [micro, its links (direction-ordered), next link index].
    stack = [[root, all_links[root] if not reversed_dir else all_links[root][::-1], 0]]
    while stack:
        frame = stack[-1]
        mi, links, li = frame
        if li >= len(links):
            stack.pop()
            if not stack:
                break
            # Returning to the parent: mirror the finished child's pair.
            pframe = stack[-1]
            pmi = pframe[0]
            lth, lph, ci, cth, cph = pframe[1][pframe[2] - 1]
            pb = locs[pmi]
            cb = locs[ci]
            new_pb, new_cb = pb, cb
            if ((pb >> lth) | (cb >> cth)) & 1:
                new_pb |= 1 << lth
                new_cb |= 1 << cth
            if ((pb >> lph) | (cb >> cph)) & 1:
                new_pb |= 1 << lph
                new_cb |= 1 << cph
            if new_pb != pb or new_cb != cb:
                crossed = True
                if not cb and new_cb:
                    _chain_add(needed, parent_of, ci)
                locs[ci] = new_cb
                if new_pb != pb:
                    if not pb:
                        _chain_add(needed, parent_of, pmi)
                    closed = tbls[pmi].get(new_pb)
                    locs[pmi] = closed if closed is not None else table.fill(
                        tbls[pmi], progs[pmi], new_pb
                    )
                else:
                    locs[pmi] = new_pb
            continue
        frame[2] = li + 1
        lth, lph, ci, cth, cph = links[li]
        pb = locs[mi]
        if not (ci in needed or (pb >> lth) & 1 or (pb >> lph) & 1):
            continue
        # Mirror the shared pair downward before descending.
        cb = locs[ci]
        new_pb, new_cb = pb, cb
        if ((pb >> lth) | (cb >> cth)) & 1:
            new_pb |= 1 << lth
            new_cb |= 1 << cth
        if ((pb >> lph) | (cb >> cph)) & 1:
            new_pb |= 1 << lph
            new_cb |= 1 << cph
        if new_pb != pb or new_cb != cb:
            crossed = True
            if not cb and new_cb:
                _chain_add(needed, parent_of, ci)
            locs[ci] = new_cb
            if new_pb != pb:
                if not pb:
                    _chain_add(needed, parent_of, mi)
                closed = tbls[mi].get(new_pb)
                locs[mi] = closed if closed is not None else table.fill(
                    tbls[mi], progs[mi], new_pb
                )
            else:
                locs[mi] = new_pb
        bits = locs[ci]
        if bits:
            closed = tbls[ci].get(bits)
            locs[ci] = closed if closed is not None else table.fill(
                tbls[ci], progs[ci], bits
            )
        clinks = all_links[ci]
        if clinks:
            stack.append(
                [ci, clinks if not reversed_dir else clinks[::-1], 0]
            )
        else:
            # Leaf micro: mirror straight back up.
            pb = locs[mi]
            cb = locs[ci]
            new_pb, new_cb = pb, cb
            if ((pb >> lth) | (cb >> cth)) & 1:
                new_pb |= 1 << lth
                new_cb |= 1 << cth
            if ((pb >> lph) | (cb >> cph)) & 1:
                new_pb |= 1 << lph
                new_cb |= 1 << cph
            if new_pb != pb or new_cb != cb:
                crossed = True
                if not cb and new_cb:
                    _chain_add(needed, parent_of, ci)
                locs[ci] = new_cb
                if new_pb != pb:
                    if not pb:
                        _chain_add(needed, parent_of, mi)
                    closed = tbls[mi].get(new_pb)
                    locs[mi] = closed if closed is not None else table.fill(
                        tbls[mi], progs[mi], new_pb
                    )
                else:
                    locs[mi] = new_pb
    return crossed


def _propagate(forest: MicroForest, locs: list, reversed_dir: bool,
               active) -> None:
    """Two propagation passes over the micros in ``active`` (the ones that
    hold bits) and their ancestors.

    A pass with no cross-link flow is already a fixpoint; otherwise the
    second pass finishes the job (one backward edge per cycle-free path).
    """
    parent_of = forest.parent_of
    needed = set()
    for mi in active:
        _chain_add(needed, parent_of, mi)
    if not needed:
        return
    if _one_pass(forest, locs, reversed_dir, needed):
        _one_pass(forest, locs, reversed_dir, needed)
    if _pass_audit["enabled"]:
        probe = list(locs)
        _one_pass(forest, probe, reversed_dir, needed)
        assert probe == locs, "third propagation pass changed a state set"
        _pass_audit["count"] += 1


def _move_locals(forest: MicroForest, locs_in: list, sym: int,
                 reversed_dir: bool):
    """Character move; returns the new locals plus the touched micros."""
    locs = [0] * len(locs_in)
    active = []
    hits = forest.sym_micros[reversed_dir].get(sym)
    if hits:
        for mi, pairs in hits:
            local = locs_in[mi]
            if local:
                moved = 0
                for sbit, dbit in pairs:
                    if local & sbit:
                        moved |= dbit
                if moved:
                    locs[mi] = moved
                    active.append(mi)
    return locs, active


def _step_locals(forest: MicroForest, locs: list, sym: int,
                 reversed_dir: bool) -> list:
    """One symbol step; memoized per (direction, symbol, state).

    State sets recur heavily during a simulation, so the closed result of
    a step is cached, the on-the-fly analogue of determinization.  Cached
    lists are shared; state lists are never mutated after propagation.
    """
    cache = forest.step_cache
    key = (reversed_dir, sym, tuple(locs))
    hit = cache.get(key)
    if hit is not None:
        return hit
    out, active = _move_locals(forest, locs, sym, reversed_dir)
    _propagate(forest, out, reversed_dir, active)
    if len(cache) < 1 << 18:
        cache[key] = out
    return out


def fast_step(forest: MicroForest, state: int, sym: int,
              reversed_dir: bool = False) -> int:
    """One global state-set transition through the micro tree.

    Takes and returns the whole-automaton bitset form; the simulation
    facade keeps states in the per-micro list form internally.
    """
    locs = _step_locals(forest, _split_locals(forest, state), sym, reversed_dir)
    return _assemble(forest, locs)


class ForestSim:
    """Drop-in simulation facade matching KernelSim's surface.

    States are per-micro local-set lists; the whole-automaton bitset form
    exists only at the ``fast_step`` wrapper for tests.
    """

    def __init__(self, forest: MicroForest):
        self.forest = forest
        self.k = forest.tnfa.k
        self.theta = forest.tnfa.theta
        self.phi = forest.tnfa.phi

    # -- forward -----------------------------------------------------------
    def _inject_closed(self, states, reversed_dir: bool) -> list:
        states = sorted(states)
        cache = self.forest.inject_cache
        key = (reversed_dir, tuple(states))
        hit = cache.get(key)
        if hit is not None:
            return hit
        locs = [0] * len(self.forest.micros)
        active = []
        for s in states:
            for mi, bit in self.forest.copies[s]:
                if not locs[mi]:
                    active.append(mi)
                locs[mi] |= 1 << bit
        _propagate(self.forest, locs, reversed_dir, active)
        if len(cache) < 1 << 16:
            cache[key] = locs
        return locs

    def start(self) -> list:
        return self._inject_closed([self.theta], False)

    def step(self, state: list, sym: int) -> list:
        return _step_locals(self.forest, state, sym, False)

    def inject(self, states) -> list:
        return self._inject_closed(states, False)

    def contains(self, state: list, s: int) -> bool:
        mi, bit = self.forest.primary[s]
        return bool((state[mi] >> bit) & 1)

    def final(self, syms, state=None) -> list:
        if state is None:
            state = self.start()
        dead = False
        for sym in syms:
            if dead:
                break
            state = _step_locals(self.forest, state, sym, False)
            dead = not any(state)
        return [0] * len(self.forest.micros) if dead else state

    def accepts(self, syms) -> bool:
        return self.contains(self.final(syms), self.phi)

    def record(self, syms, w1: int, w2: int):
        state = self.start()
        r1 = 1 if self.contains(state, w1) else 0
        r2 = 1 if self.contains(state, w2) else 0
        for i, sym in enumerate(syms, start=1):
            if any(state):
                state = _step_locals(self.forest, state, sym, False)
            if self.contains(state, w1):
                r1 |= 1 << i
            if self.contains(state, w2):
                r2 |= 1 << i
        return r1, r2

    def history(self, syms) -> list:
        state = self.start()
        out = [state]
        for sym in syms:
            if any(state):
                state = _step_locals(self.forest, state, sym, False)
            out.append(state)
        return out

    # -- backward ----------------------------------------------------------
    def rstart(self) -> list:
        return self._inject_closed([self.phi], True)

    def rstep(self, state: list, sym: int) -> list:
        return _step_locals(self.forest, state, sym, True)

    def rclosure_of(self, states) -> list:
        return self._inject_closed(states, True)

    def rrecord(self, syms, w1: int, w2: int):
        state = self.rstart()
        r1 = 1 if self.contains(state, w1) else 0
        r2 = 1 if self.contains(state, w2) else 0
        j = 0
        for idx in range(len(syms) - 1, -1, -1):
            j += 1
            if any(state):
                state = _step_locals(self.forest, state, syms[idx], True)
            if self.contains(state, w1):
                r1 |= 1 << j
            if self.contains(state, w2):
                r2 |= 1 << j
        return r1, r2

    @staticmethod
    def empty(state: list) -> bool:
        return not any(state)


def get_forest(tnfa: Tnfa, t: int) -> MicroForest:
    key = ("forest", t)
    forest = tnfa._cache.get(key)
    if forest is None:
        forest = tnfa._cache[key] = build_micro_forest(tnfa, t)
    return forest


def get_sim(tnfa: Tnfa, t: int) -> ForestSim:
    key = ("forest_sim", t)
    sim = tnfa._cache.get(key)
    if sim is None:
        sim = tnfa._cache[key] = ForestSim(get_forest(tnfa, t))
    return sim


def fast_match(tnfa: Tnfa, q, t: int = DEFAULT_T) -> bool:
    """Membership via the tabulated simulation; equals plain acceptance."""
    return get_sim(tnfa, t).accepts(as_symbols(q))


def fast_parse_base(sim: ForestSim, syms, *, ledger=None) -> CompressedPath | None:
    """Store all forward state sets, then walk right to left: a reversed
    closure from the current state intersects (bitwise, micro by micro)
    the stored set one position back to pick the next source state, lowest
    global id first."""
    led = ledger if ledger is not None else current_ledger()
    forest = sim.forest
    syms = as_symbols(syms)
    n = len(syms)
    hist_alloc = led.alloc("history", ledger_mod.history_bytes(n, forest.total_width))
    try:
        states = [sim.start()]
        for sym in syms:
            prev = states[-1]
            states.append(
                _step_locals(forest, prev, sym, False) if any(prev) else prev
            )
        if not sim.contains(states[n], sim.phi):
            return None
        flat = forest.tnfa.prog()
        entries = [None] * n
        cur = sim.phi
        for i in range(n, 0, -1):
            sym = syms[i - 1]
            back = sim.rclosure_of([cur])
            sources, _ = _move_locals(forest, back, sym, True)
            s_star = None
            for m, w, p in zip(forest.micros, sources, states[i - 1]):
                cand = w & p
                while cand:
                    low = cand & -cand
                    cand ^= low
                    g = m.local_to_global[low.bit_length() - 1]
                    if s_star is None or g < s_star:
                        s_star = g
            assert s_star is not None, "stored history always admits a step"
            best = None
            srcs, dsts, poss = flat.by_sym[sym]
            for j in range(len(srcs)):
                if srcs[j] == s_star and sim.contains(back, dsts[j]):
                    if best is None or dsts[j] < best[0]:
                        best = (dsts[j], poss[j])
            assert best is not None
            entries[i - 1] = (sym, s_star, best[0], best[1])
            cur = s_star
        return CompressedPath(entries)
    finally:
        hist_alloc.release()


class ForestStrategy:
    """Recursion strategy running every sweep on the micro-tree simulation."""

    name = "bitparallel"

    def __init__(self, t: int, ledger):
        if t < 3:
            raise ValueError("micro size must be at least 3")
        self.t = t
        self.ledger = ledger

    def is_base(self, n: int, k: int) -> bool:
        return n < self.t or k < self.t or k < MIN_SPLIT_STATES

    def sim(self, tnfa: Tnfa) -> ForestSim:
        return get_sim(tnfa, self.t)

    def alloc_automaton(self, tnfa: Tnfa):
        forest = get_forest(tnfa, self.t)
        nbytes = ledger_mod.tnfa_bytes(tnfa.k, len(tnfa.transitions))
        nbytes += 32 * forest.micro_count()
        return self.ledger.alloc("recursion", nbytes)

    def base_parse(self, tnfa: Tnfa, syms):
        return fast_parse_base(self.sim(tnfa), syms, ledger=self.ledger)


def fast_parse(pattern, q, t: int = DEFAULT_T, *, ledger=None, stats=None):
    """Full parse through the tabulated engine; None when there is no match."""
    from .engine import parse

    return parse(pattern, q, "bitparallel", t=t, ledger=ledger, stats=stats)
