"""Thompson NFA construction and state-set simulation.

Every AST node contributes exactly two fresh states (its entry and exit),
so an automaton built from a v-node tree has k = 2v states and at most 4v
transitions.  Keeping the per-node state pair fresh (no endpoint merging)
is what lets the decomposition stage cut the automaton along any tree edge
and know the two halves stay within their size budget.

Transition labels are small ints: -1 for epsilon, 0..255 for bytes, and
256+id for beta sentinels (the placeholder symbol a decomposition splices
in for an inner subautomaton).  Pseudo labels (used by the tabulated
engine's micro decomposition) live far above the beta range and never
match any input symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernel
from .syntax import Ast, Beta, Concat, Epsilon, Literal, Pseudo, Star, Union, children

EPS = -1
BETA_BASE = 256
PSEUDO_BASE = 1 << 40


def beta_sym(beta_id: int) -> int:
    return BETA_BASE + beta_id


def pseudo_sym(pseudo_id: int) -> int:
    return PSEUDO_BASE + pseudo_id


def is_char_sym(sym: int) -> bool:
    return 0 <= sym < BETA_BASE


@dataclass(frozen=True)
class StateSet:
    """Fixed-width bitset over an automaton's states."""

    bits: int
    width: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError("bits outside the set's width")

    @classmethod
    def from_states(cls, states, width: int) -> "StateSet":
        bits = 0
        for s in states:
            bits |= 1 << s
        return cls(bits, width)

    def __contains__(self, state: int) -> bool:
        return bool((self.bits >> state) & 1)

    def __bool__(self) -> bool:
        return self.bits != 0

    def states(self) -> list[int]:
        out = []
        bits = self.bits
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return out


class Tnfa:
    """An automaton over states 0..k-1 with one start and one accept state.

    ``tree`` is the pattern AST the automaton was built from (None for
    reversed automata, which are only simulated, never decomposed) and
    ``node_states`` maps each tree node to its (entry, exit) state pair.
    ``extra_eps`` lists epsilon transitions added after construction by a
    decomposition; they are part of ``transitions`` too.
    """

    __slots__ = (
        "k",
        "theta",
        "phi",
        "transitions",
        "tree",
        "node_states",
        "extra_eps",
        "_prog",
        "_reversed",
        "_cache",
    )

    def __init__(self, k, theta, phi, transitions, tree=None, node_states=None):
        self.k = k
        self.theta = theta
        self.phi = phi
        self.transitions = transitions
        self.tree = tree
        self.node_states = node_states or {}
        self.extra_eps = []
        self._prog = None
        self._reversed = None
        self._cache = {}  # per-engine simulation facades

    def add_extra_eps(self, src: int, dst: int):
        """Append a post-construction epsilon edge (decomposition use only)."""
        self.transitions.append((src, dst, EPS, 0))
        self.extra_eps.append((src, dst))
        self._prog = None
        self._reversed = None

    def prog(self) -> "kernel.Prog":
        if self._prog is None:
            self._prog = kernel.compile_program(self)
        return self._prog

    def char_transition_count(self) -> int:
        return sum(1 for _, _, sym, _ in self.transitions if is_char_sym(sym))

    def transition_by_pos(self) -> dict:
        """Literal position -> (src, dst, sym) for the unique char transition."""
        out = {}
        for src, dst, sym, pos in self.transitions:
            if is_char_sym(sym):
                assert pos not in out, "duplicate literal position"
                out[pos] = (src, dst, sym)
        return out


def build_tnfa(ast: Ast) -> Tnfa:
    """Build the automaton for an AST; linear in tree size, iterative."""
    transitions = []
    node_states = {}
    counter = 0

    def fresh():
        nonlocal counter
        pair = (counter, counter + 1)
        counter += 2
        return pair

    # Post-order: children have their state pairs before the parent wires them.
    order = []
    stack = [ast]
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(children(node))
    for node in reversed(order):
        theta, phi = fresh()
        node_states[node] = (theta, phi)
        if isinstance(node, Literal):
            transitions.append((theta, phi, node.byte, node.pos))
        elif isinstance(node, Epsilon):
            transitions.append((theta, phi, EPS, 0))
        elif isinstance(node, Beta):
            transitions.append((theta, phi, beta_sym(node.beta_id), 0))
        elif isinstance(node, Pseudo):
            transitions.append((theta, phi, pseudo_sym(node.pseudo_id), 0))
        elif isinstance(node, Concat):
            lt, lp = node_states[node.left]
            rt, rp = node_states[node.right]
            transitions.append((theta, lt, EPS, 0))
            transitions.append((lp, rt, EPS, 0))
            transitions.append((rp, phi, EPS, 0))
        elif isinstance(node, Union):
            lt, lp = node_states[node.left]
            rt, rp = node_states[node.right]
            transitions.append((theta, lt, EPS, 0))
            transitions.append((theta, rt, EPS, 0))
            transitions.append((lp, phi, EPS, 0))
            transitions.append((rp, phi, EPS, 0))
        elif isinstance(node, Star):
            ct, cp = node_states[node.child]
            transitions.append((theta, ct, EPS, 0))
            transitions.append((theta, phi, EPS, 0))
            transitions.append((cp, phi, EPS, 0))
            transitions.append((cp, ct, EPS, 0))
        else:
            raise TypeError(f"not an Ast node: {node!r}")

    theta, phi = node_states[ast]
    return Tnfa(counter, theta, phi, transitions, tree=ast, node_states=node_states)


def reverse(a: Tnfa) -> Tnfa:
    """The automaton with every transition flipped and start/accept swapped.

    Cached on the automaton; the reverse has no tree (it is only simulated).
    """
    if a._reversed is not None:
        return a._reversed
    flipped = [(dst, src, sym, pos) for src, dst, sym, pos in a.transitions]
    rev = Tnfa(a.k, a.phi, a.theta, flipped)
    rev.extra_eps = [(dst, src) for src, dst in a.extra_eps]
    rev._reversed = a
    a._reversed = rev
    return rev


def eps_closure(a: Tnfa, s: StateSet) -> StateSet:
    """All states reachable from ``s`` along epsilon edges (beta is not
    epsilon).  Idempotent."""
    if s.width != a.k:
        raise ValueError("state set width does not match automaton")
    return StateSet(kernel.impl.closure(a.prog(), s.bits), a.k)


def step(a: Tnfa, s: StateSet, sym: int) -> StateSet:
    """One state-set transition on symbol ``sym`` (a byte or a beta symbol).

    ``s`` must be epsilon-closed; the result is epsilon-closed.
    """
    if s.width != a.k:
        raise ValueError("state set width does not match automaton")
    return StateSet(kernel.impl.step(a.prog(), s.bits, sym), a.k)


def start_set(a: Tnfa) -> StateSet:
    return StateSet(kernel.impl.closure(a.prog(), 1 << a.theta), a.k)


def accepts(a: Tnfa, q) -> bool:
    """Whether the automaton accepts ``q`` (bytes or a symbol sequence)."""
    syms = as_symbols(q)
    prog = a.prog()
    final = kernel.impl.sweep_final(prog, syms, kernel.impl.closure(prog, 1 << a.theta))
    return bool((final >> a.phi) & 1)


def as_symbols(q):
    """Normalize bytes / ints to the array form the kernels take."""
    import array

    if isinstance(q, array.array) and q.typecode == "i":
        return q
    if isinstance(q, memoryview):
        return q
    if isinstance(q, str):
        q = q.encode("utf-8")
    return array.array("i", list(q))


def label_text(sym: int, pos: int) -> str:
    if sym == EPS:
        return "eps"
    if is_char_sym(sym):
        ch = chr(sym) if 0x20 <= sym <= 0x7E else f"\\x{sym:02x}"
        return f"char {ch!r} pos {pos}"
    if sym >= PSEUDO_BASE:
        return f"pseudo {sym - PSEUDO_BASE}"
    return f"beta {sym - BETA_BASE}"


def serialize(a: Tnfa) -> str:
    """Line-oriented dump ``src -> dst [label]`` for golden tests."""
    lines = [f"states {a.k} start {a.theta} accept {a.phi}"]
    for src, dst, sym, pos in a.transitions:
        lines.append(f"{src} -> {dst} [{label_text(sym, pos)}]")
    return "\n".join(lines) + "\n"


def check_structure(a: Tnfa):
    """Construction-shape invariants; used by tests and the decomposer."""
    from .syntax import node_count

    assert a.tree is not None
    v = node_count(a.tree)
    assert a.k <= 2 * v, "state count exceeds twice the node count"
    assert len(a.transitions) <= 4 * v, "transition count exceeds four per node"
    positions = [pos for _, _, sym, pos in a.transitions if is_char_sym(sym)]
    assert len(positions) == len(set(positions)), "duplicate literal positions"
    extras = set(a.extra_eps)
    for src, dst, _, _ in a.transitions:
        if (src, dst) in extras:
            continue
        assert dst != a.theta, "start state acquired an in-edge"
        assert src != a.phi, "accept state acquired an out-edge"
