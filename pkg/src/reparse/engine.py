"""Parse engines: the stored-history oracle and the linear-space recursion.

``naive_parse`` keeps every state set of the forward sweep and walks them
backwards to pick an accepting path.  It is the simplest correct engine
and the space foil: its tracked footprint grows with n*m by design.

The recursive engine decomposes the automaton, cuts the string to match,
and recurses: one subproblem on the outer half (inner visits replaced by
a beta placeholder symbol) and one per inner substring.  Recursion order
follows string length: shorter children first, the longest child last,
with the parent's storage released before descending into it.  Base cases
run the stored-history walk and write each character's literal position
straight into the shared result array through the subproblem's
position-run table, so nothing is concatenated on the way back up.

Subproblem strings carry their origin as runs (child start, root start,
length) over the positions holding real characters; placeholder symbols
have no origin and emit nothing (their substring is some inner child's
whole problem).
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field

from . import ledger as ledger_mod
from .automata import (
    Tnfa,
    as_symbols,
    beta_sym,
    build_tnfa,
    is_char_sym,
)
from .decomposition import decompose
from .kernel import KernelSim
from .ledger import current_ledger
from .strdecomp import outer_symbols, string_decomposition
from .syntax import parse_pattern

DEFAULT_GAMMA_N = 2
DEFAULT_GAMMA_M = 25
# Splitting below seven states need not shrink the automaton (a three-node
# tree can reproduce itself around the placeholder), so treat it as base.
MIN_SPLIT_STATES = 7

ENGINES = ("naive", "linear", "bitparallel")


@dataclass(frozen=True)
class EngineConfig:
    """Recursion thresholds; the defaults keep the work bound linear in n*m.

    Tests lower them to force deep recursion on small inputs.
    """

    gamma_n: int = DEFAULT_GAMMA_N
    gamma_m: int = DEFAULT_GAMMA_M

    def __post_init__(self):
        if self.gamma_n < 1 or self.gamma_m < 1:
            raise ValueError("thresholds must be positive")


@dataclass
class RunStats:
    """Counters the test suite inspects; filled by the recursive engines."""

    decompositions: int = 0
    base_cases: int = 0
    light_children: int = 0
    max_depth: int = 0
    child_lengths: list = field(default_factory=list)  # (parent_n, light_n)


@dataclass
class CompressedPath:
    """One labelled transition per consumed symbol, epsilon edges elided."""

    entries: list  # (sym, src, dst, literal position)

    def __len__(self) -> int:
        return len(self.entries)

    def positions(self) -> list:
        return [pos for sym, _, _, pos in self.entries if is_char_sym(sym)]


def replay(tnfa: Tnfa, syms, path: CompressedPath) -> bool:
    """Check a compressed path really is an accepting path for ``syms``."""
    syms = as_symbols(syms)
    if len(path.entries) != len(syms):
        return False
    sim = KernelSim(tnfa)
    state = sim.start()
    for (sym, src, dst, _), expect in zip(path.entries, syms):
        if sym != expect or not sim.contains(state, src):
            return False
        state = sim.inject([dst])
    return sim.contains(state, tnfa.phi)


def replay_positions(tnfa: Tnfa, syms, positions) -> bool:
    """Check a parse (literal positions) against the automaton it came from."""
    syms = as_symbols(syms)
    if len(positions) != len(syms):
        return False
    by_pos = tnfa.transition_by_pos()
    sim = KernelSim(tnfa)
    state = sim.start()
    for sym, pos in zip(syms, positions):
        hit = by_pos.get(pos)
        if hit is None:
            return False
        src, dst, label = hit
        if label != sym or not sim.contains(state, src):
            return False
        state = sim.inject([dst])
    return sim.contains(state, tnfa.phi)


def naive_parse(tnfa: Tnfa, q, *, ledger=None) -> CompressedPath | None:
    """Stored-history engine: forward sweep keeping all n+1 state sets,
    then a backward walk recovering one accepting path.

    Deterministic: each backward step takes the lowest-numbered usable
    source state, then the lowest-numbered target among its candidates.
    """
    led = ledger if ledger is not None else current_ledger()
    syms = as_symbols(q)
    n = len(syms)
    sim = KernelSim(tnfa)
    prog = tnfa.prog()
    hist_alloc = led.alloc("history", ledger_mod.history_bytes(n, tnfa.k))
    try:
        hist = sim.history(syms)
        if not sim.contains(hist[n], tnfa.phi):
            return None
        entries = [None] * n
        cur = tnfa.phi
        with led.track("state_sets", 2 * ledger_mod.set_bytes(tnfa.k)):
            for i in range(n, 0, -1):
                sym = syms[i - 1]
                reach_back = sim.rclosure_of([cur])
                prev = hist[i - 1]
                best = None
                edges = prog.by_sym.get(sym)
                if edges is not None:
                    srcs, dsts, poss = edges
                    for j in range(len(srcs)):
                        s, d = srcs[j], dsts[j]
                        if (reach_back >> d) & 1 and (prev >> s) & 1:
                            if best is None or (s, d) < (best[0], best[1]):
                                best = (s, d, poss[j])
                assert best is not None, "stored history always admits a step"
                entries[i - 1] = (sym, best[0], best[1], best[2])
                cur = best[0]
        assert (hist[0] >> cur) & 1
        return CompressedPath(entries)
    finally:
        hist_alloc.release()


def order_recursion(lengths) -> list:
    """Schedule child indices: all light children (ascending index) first,
    the heavy child (maximum length, first on ties) last."""
    heavy = max(range(len(lengths)), key=lambda i: (lengths[i], -i))
    return [i for i in range(len(lengths)) if i != heavy] + [heavy]


class _Sub:
    """A subproblem: automaton, symbols, and origin runs for its characters."""

    __slots__ = ("tnfa", "syms", "runs", "allocs")

    def __init__(self, tnfa, syms, runs, allocs):
        self.tnfa = tnfa
        self.syms = syms  # memoryview over array('i')
        self.runs = runs  # [(child_start, root_start, length)], ascending
        self.allocs = allocs

    def release(self):
        for alloc in self.allocs:
            alloc.release()
        self.allocs = []


def _clip_runs(runs, start, end, delta):
    """Restrict runs to [start, end) and shift into child coordinates.

    Runs are disjoint and ascending, so the overlap window is found by
    bisection; cost is logarithmic plus the overlap size.
    """
    import bisect

    i = bisect.bisect_left(runs, (start,))
    if i and runs[i - 1][0] + runs[i - 1][2] > start:
        i -= 1
    out = []
    while i < len(runs) and runs[i][0] < end:
        cs, rs, ln = runs[i]
        lo = max(cs, start)
        hi = min(cs + ln, end)
        if lo < hi:
            out.append((lo - start + delta, rs + (lo - cs), hi - lo))
        i += 1
    return out


class _Ctx:
    def __init__(self, strategy, ledger, stats):
        self.strategy = strategy
        self.ledger = ledger
        self.stats = stats


def _make_child(sub, d, sd, idx, ctx, materialize):
    led = ctx.ledger
    allocs = []
    if idx == 0:
        syms = outer_symbols(sd, sub.syms, beta_sym(d.beta_id))
        # Outer blocks land at child offsets separated by one placeholder
        # symbol each.
        runs = []
        offset = 0
        for j, (s, e) in enumerate(sd.outer_ranges()):
            if j:
                offset += 1
            runs.extend(_clip_runs(sub.runs, s, e, offset))
            offset += e - s
        allocs.append(led.alloc("strings_chi", ledger_mod.syms_bytes(len(syms))))
        child_syms = memoryview(syms)
        tnfa = d.outer
    else:
        s, e = sd.inner_ranges()[idx - 1]
        runs = _clip_runs(sub.runs, s, e, 0)
        if materialize:
            arr = array("i", sub.syms[s:e])
            allocs.append(led.alloc("strings_chi", ledger_mod.syms_bytes(len(arr))))
            child_syms = memoryview(arr)
        else:
            child_syms = sub.syms[s:e]
        tnfa = d.inner
    allocs.append(led.alloc("strings_chi", ledger_mod.runs_bytes(len(runs))))
    return _Sub(tnfa, child_syms, runs, allocs)


def _emit(sub, path: CompressedPath, out):
    """Write each character's literal position through the origin runs."""
    runs = sub.runs
    ri = 0
    for i, (sym, _, _, pos) in enumerate(path.entries):
        while ri < len(runs) and runs[ri][0] + runs[ri][2] <= i:
            ri += 1
        covered = ri < len(runs) and runs[ri][0] <= i
        if is_char_sym(sym):
            assert covered, "character position missing an origin"
            cs, rs, _ = runs[ri]
            root = rs + (i - cs)
            assert out[root] == -1, "result slot written twice"
            out[root] = pos
        else:
            assert not covered, "placeholder symbol has no origin"


def _run(sub, ctx, out, depth=0):
    stats = ctx.stats
    if depth > stats.max_depth:
        stats.max_depth = depth
    strategy = ctx.strategy
    n = len(sub.syms)
    k = sub.tnfa.k
    if strategy.is_base(n, k):
        stats.base_cases += 1
        path = strategy.base_parse(sub.tnfa, sub.syms)
        assert path is not None, "subproblems are accepted by construction"
        _emit(sub, path, out)
        sub.release()
        return

    # The split depends only on the automaton, and all inner siblings of a
    # node share one automaton object, so it is memoized per object.  The
    # ledger still charges every recursion node for its own copy: tracked
    # bytes follow the algorithm's storage discipline, the cache is a
    # transparent implementation shortcut.
    d = sub.tnfa._cache.get("decomposition")
    if d is None:
        d = sub.tnfa._cache["decomposition"] = decompose(sub.tnfa)
    stats.decompositions += 1
    alloc_inner = strategy.alloc_automaton(d.inner)
    alloc_outer = strategy.alloc_automaton(d.outer)
    sim = strategy.sim(sub.tnfa)
    inner_sim = strategy.sim(d.inner)
    outer_sim = strategy.sim(d.outer)
    sd = string_decomposition(sim, d, sub.syms, inner_sim, outer_sim, ctx.ledger)
    blocks_alloc = ctx.ledger.alloc(
        "recursion", ledger_mod.blocks_bytes(len(sd.ranges))
    )

    inner_lengths = [e - s for s, e in sd.inner_ranges()]
    outer_len = n - sum(inner_lengths) + sd.ell
    lengths = [outer_len] + inner_lengths
    schedule = order_recursion(lengths)

    for idx in schedule[:-1]:
        stats.light_children += 1
        child = _make_child(sub, d, sd, idx, ctx, materialize=False)
        stats.child_lengths.append((n, len(child.syms)))
        assert 4 * len(child.syms) <= 3 * n + 4, "light child exceeds 3n/4 + 1"
        _run(child, ctx, out, depth + 1)

    heavy = schedule[-1]
    child = _make_child(sub, d, sd, heavy, ctx, materialize=True)
    # Free the parent before descending: its string, runs, block table, and
    # the half the heavy child does not use.
    (alloc_inner if heavy == 0 else alloc_outer).release()
    blocks_alloc.release()
    sub.release()
    child.allocs.append(alloc_outer if heavy == 0 else alloc_inner)
    _run(child, ctx, out, depth + 1)


class LinearStrategy:
    """Kernel-backed strategy for the linear-space engine."""

    name = "linear"

    def __init__(self, config: EngineConfig, ledger):
        self.config = config
        self.ledger = ledger

    def is_base(self, n: int, k: int) -> bool:
        return (
            n < self.config.gamma_n
            or k < self.config.gamma_m
            or k < MIN_SPLIT_STATES
        )

    def sim(self, tnfa: Tnfa) -> KernelSim:
        sim = tnfa._cache.get("kernel_sim")
        if sim is None:
            sim = tnfa._cache["kernel_sim"] = KernelSim(tnfa)
        return sim

    def alloc_automaton(self, tnfa: Tnfa):
        return self.ledger.alloc(
            "recursion", ledger_mod.tnfa_bytes(tnfa.k, len(tnfa.transitions))
        )

    def base_parse(self, tnfa: Tnfa, syms):
        return naive_parse(tnfa, syms, ledger=self.ledger)


def _run_recursive(tnfa, syms, strategy, led, result, stats):
    runs_alloc = led.alloc("strings_chi", ledger_mod.runs_bytes(1))
    root = _Sub(tnfa, memoryview(syms), [(0, 0, len(syms))], [runs_alloc])
    ctx = _Ctx(strategy, led, stats)
    _run(root, ctx, result)


def parse(pattern, text, engine: str = "linear", *, config: EngineConfig = None,
          t: int = None, ledger=None, stats: RunStats = None):
    """Parse ``text`` against ``pattern``: the literal position each
    character matched, or None when the pattern does not match.

    ``engine`` picks the machinery: "naive" (stored history), "linear"
    (decomposition recursion), or "bitparallel" (same recursion over the
    tabulated micro-automata simulation; ``t`` bounds micro size).  The
    result is validated by replay before it is returned.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    led = ledger if ledger is not None else current_ledger()
    config = config or EngineConfig()
    stats = stats if stats is not None else RunStats()

    ast = parse_pattern(pattern)
    tnfa = build_tnfa(ast)
    syms = as_symbols(text)
    n = len(syms)

    root_alloc = led.alloc(
        "recursion", ledger_mod.tnfa_bytes(tnfa.k, len(tnfa.transitions))
    )
    syms_alloc = led.alloc("strings_chi", ledger_mod.syms_bytes(n))
    try:
        if engine == "bitparallel":
            from .bitparallel import DEFAULT_T, ForestStrategy

            strategy = ForestStrategy(t if t is not None else DEFAULT_T, led)
            accepted = strategy.sim(tnfa).accepts(syms)
        else:
            strategy = LinearStrategy(config, led)
            with led.track("state_sets", 2 * ledger_mod.set_bytes(tnfa.k)):
                accepted = KernelSim(tnfa).accepts(syms)
        if not accepted:
            return None

        result = array("i", [-1]) * n
        led.alloc("result", ledger_mod.result_bytes(n))  # stays live

        if engine == "naive":
            path = naive_parse(tnfa, syms, ledger=led)
            for i, (_, _, _, pos) in enumerate(path.entries):
                result[i] = pos
        else:
            _run_recursive(tnfa, syms, strategy, led, result, stats)

        out = list(result)
        assert all(pos != -1 for pos in out), "unfilled result slot"
        assert replay_positions(tnfa, syms, out), "parse failed replay check"
        return out
    finally:
        syms_alloc.release()
        root_alloc.release()


def match(pattern, text, engine: str = "linear", *, t: int = None) -> bool:
    """Membership only; cheaper than a full parse."""
    ast = parse_pattern(pattern)
    tnfa = build_tnfa(ast)
    syms = as_symbols(text)
    if engine == "bitparallel":
        from .bitparallel import DEFAULT_T, fast_match

        return fast_match(tnfa, syms, t if t is not None else DEFAULT_T)
    return KernelSim(tnfa).accepts(syms)
