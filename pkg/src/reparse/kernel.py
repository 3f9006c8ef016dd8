"""Kernel selection and the compiled transition program.

The per-character state-set transition (character move + epsilon closure)
is the hot loop of every engine here, so it is implemented twice with
identical semantics: ``_kernel_c`` (Cython) and ``_kernel_py`` (pure
Python).  The compiled kernel is picked at import when the extension is
available; set ``REPARSE_KERNEL=py`` to force the fallback.

Both kernels work on a ``Prog``: the automaton flattened to CSR adjacency
for epsilon edges plus per-symbol (source, target) arrays for labelled
edges.  State sets cross the kernel boundary as plain ints (bit i = state
i), which keeps the driver code ordinary Python.
"""

from __future__ import annotations

import os
from array import array

from . import _kernel_py

_forced = os.environ.get("REPARSE_KERNEL", "").strip().lower()
_kernel_c = None
if _forced != "py":
    try:
        from . import _kernel_c  # type: ignore[attr-defined]
    except ImportError:
        _kernel_c = None
        if _forced == "c":
            raise

if _kernel_c is not None:
    impl = _kernel_c
    BACKEND = "c"
else:
    impl = _kernel_py
    BACKEND = "py"


def available_backends() -> dict:
    out = {"py": _kernel_py}
    if _kernel_c is not None:
        out["c"] = _kernel_c
    return out


class Prog:
    """Flattened automaton adjacency shared by both kernels."""

    __slots__ = (
        "k",
        "theta",
        "phi",
        "eps_off",
        "eps_dst",
        "by_sym",
        "_eps_masks",
        "_pure_moves",
    )

    def __init__(self, k, theta, phi, eps_off, eps_dst, by_sym):
        self.k = k
        self.theta = theta
        self.phi = phi
        self.eps_off = eps_off
        self.eps_dst = eps_dst
        self.by_sym = by_sym  # sym -> (srcs, dsts, positions) as array('i')
        self._eps_masks = None
        self._pure_moves = None

    def eps_masks(self) -> list:
        """Per-state int mask of epsilon targets (pure kernel's view)."""
        if self._eps_masks is None:
            off, dst = self.eps_off, self.eps_dst
            masks = []
            for s in range(self.k):
                m = 0
                for j in range(off[s], off[s + 1]):
                    m |= 1 << dst[j]
                masks.append(m)
            self._eps_masks = masks
        return self._eps_masks

    def pure_moves(self, sym: int):
        """(source bit, target bit) pairs for ``sym`` (pure kernel's view)."""
        if self._pure_moves is None:
            self._pure_moves = {}
        cached = self._pure_moves.get(sym)
        if cached is None:
            entry = self.by_sym.get(sym)
            if entry is None:
                cached = ()
            else:
                srcs, dsts, _ = entry
                cached = tuple((1 << s, 1 << d) for s, d in zip(srcs, dsts))
            self._pure_moves[sym] = cached
        return cached


def compile_program(tnfa) -> Prog:
    from .automata import EPS

    k = tnfa.k
    eps_targets = [[] for _ in range(k)]
    sym_edges: dict = {}
    for src, dst, sym, pos in tnfa.transitions:
        if sym == EPS:
            eps_targets[src].append(dst)
        else:
            sym_edges.setdefault(sym, []).append((src, dst, pos))

    eps_off = array("i", [0] * (k + 1))
    eps_dst = array("i")
    for s in range(k):
        for d in eps_targets[s]:
            eps_dst.append(d)
        eps_off[s + 1] = len(eps_dst)

    by_sym = {}
    for sym, edges in sym_edges.items():
        by_sym[sym] = (
            array("i", [e[0] for e in edges]),
            array("i", [e[1] for e in edges]),
            array("i", [e[2] for e in edges]),
        )
    return Prog(k, tnfa.theta, tnfa.phi, eps_off, eps_dst, by_sym)


class KernelSim:
    """Simulation facade over compiled programs, one per direction.

    Match-set and history sweeps go through the kernel's fused loops; the
    stepwise interface serves drivers that inspect or collapse the state
    set between characters.  States are int masks.
    """

    def __init__(self, tnfa, rev_tnfa=None):
        from .automata import reverse

        self.tnfa = tnfa
        self.prog = tnfa.prog()
        self.rev_prog = (rev_tnfa or reverse(tnfa)).prog()
        self.k = tnfa.k
        self.theta = tnfa.theta
        self.phi = tnfa.phi

    # -- forward -----------------------------------------------------------
    def start(self) -> int:
        return impl.closure(self.prog, 1 << self.theta)

    def step(self, state: int, sym: int) -> int:
        return impl.step(self.prog, state, sym)

    def inject(self, states) -> int:
        bits = 0
        for s in states:
            bits |= 1 << s
        return impl.closure(self.prog, bits)

    def final(self, syms, state=None) -> int:
        if state is None:
            state = self.start()
        return impl.sweep_final(self.prog, syms, state)

    def accepts(self, syms) -> bool:
        return bool((self.final(syms) >> self.phi) & 1)

    def record(self, syms, w1: int, w2: int):
        """Per-position membership bitsets of two watched states."""
        return impl.sweep_record(self.prog, syms, self.start(), w1, w2)

    def history(self, syms) -> list:
        return impl.sweep_history(self.prog, syms, self.start())

    # -- backward ----------------------------------------------------------
    def rstart(self) -> int:
        return impl.closure(self.rev_prog, 1 << self.phi)

    def rstep(self, state: int, sym: int) -> int:
        return impl.step(self.rev_prog, state, sym)

    def rclosure_of(self, states) -> int:
        bits = 0
        for s in states:
            bits |= 1 << s
        return impl.closure(self.rev_prog, bits)

    def rrecord(self, syms, w1: int, w2: int):
        """Per-position membership for the reverse sweep: bit j of each
        result is set when the watch is live after j symbols from the
        right."""
        return impl.sweep_record_back(self.rev_prog, syms, self.rstart(), w1, w2)

    @staticmethod
    def contains(state: int, s: int) -> bool:
        return bool((state >> s) & 1)

    @staticmethod
    def empty(state: int) -> bool:
        return state == 0
