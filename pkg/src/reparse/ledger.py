"""Workspace accounting for the engines.

The engines report every working structure they hold (state sets, match
sets, subproblem strings, recursion bookkeeping, stored state-set
histories) to the ambient ledger.  The byte model counts what the data
structures fundamentally contain, not CPython object overhead, so the
numbers are reproducible and allocator-independent:

    state set           ceil(k/8)               k-bit set
    state-set history   (n+1) * ceil(k/8)       one set per position
    match sets          6 * ceil((n+1)/8)       six position sets
    valid-pair entry    5                       position + boundary flags
    string symbol       2                       byte or sentinel
    position-map run    12                      (start, root start, length)
    decomposition block 8                       half-open range
    automaton           8/state + 12/transition adjacency + labels
    micro automaton     +32 per micro           links and encoding
    result slot         4                       one literal index

A ledger is installed for the dynamic extent of a call with ``use_ledger``;
when none is installed, reporting goes to a no-op sink.  Every allocation
must be released (``Allocation.release``) except the final parse result;
``SpaceLedger.live`` therefore returns to its baseline after a call.
"""

from __future__ import annotations

import contextlib
import contextvars

CATEGORIES = (
    "state_sets",
    "match_sets",
    "strings_chi",
    "recursion",
    "history",
    "result",
)


def set_bytes(k: int) -> int:
    return (k + 7) // 8


def history_bytes(n: int, k: int) -> int:
    return (n + 1) * set_bytes(k)


def match_sets_bytes(n: int) -> int:
    return 6 * ((n + 2) // 8 + 1)


def valid_pairs_bytes(count: int) -> int:
    return 5 * count


def syms_bytes(length: int) -> int:
    return 2 * length


def runs_bytes(count: int) -> int:
    return 12 * count


def blocks_bytes(count: int) -> int:
    return 8 * count


def tnfa_bytes(k: int, ntrans: int) -> int:
    return 8 * k + 12 * ntrans


def result_bytes(n: int) -> int:
    return 4 * n


class Allocation:
    """Handle for one tracked allocation; release exactly once."""

    __slots__ = ("ledger", "category", "nbytes", "released")

    def __init__(self, ledger, category, nbytes):
        self.ledger = ledger
        self.category = category
        self.nbytes = nbytes
        self.released = False

    def release(self):
        if not self.released:
            self.released = True
            self.ledger._release(self.category, self.nbytes)


class _NullAllocation:
    __slots__ = ()

    def release(self):
        pass


_NULL_ALLOCATION = _NullAllocation()


class SpaceLedger:
    """Tracks live and peak workspace bytes, broken down by category."""

    def __init__(self):
        self.live = 0
        self.peak = 0
        self.live_by_category = dict.fromkeys(CATEGORIES, 0)
        self.peak_by_category = dict.fromkeys(CATEGORIES, 0)

    def alloc(self, category: str, nbytes: int) -> Allocation:
        if nbytes < 0:
            raise ValueError("allocation size must be >= 0")
        by_cat = self.live_by_category
        if category not in by_cat:
            raise KeyError(f"unknown ledger category: {category}")
        by_cat[category] += nbytes
        self.live += nbytes
        if self.live > self.peak:
            self.peak = self.live
            self.peak_by_category = dict(by_cat)
        return Allocation(self, category, nbytes)

    def _release(self, category: str, nbytes: int):
        self.live_by_category[category] -= nbytes
        self.live -= nbytes
        assert self.live >= 0, "ledger released more than it allocated"

    @contextlib.contextmanager
    def track(self, category: str, nbytes: int):
        handle = self.alloc(category, nbytes)
        try:
            yield handle
        finally:
            handle.release()


class _NullLedger:
    """Sink used when no ledger is installed."""

    live = 0
    peak = 0

    def alloc(self, category, nbytes):
        return _NULL_ALLOCATION

    @contextlib.contextmanager
    def track(self, category, nbytes):
        yield _NULL_ALLOCATION


NULL_LEDGER = _NullLedger()

_current: contextvars.ContextVar = contextvars.ContextVar(
    "reparse_ledger", default=NULL_LEDGER
)


def current_ledger():
    return _current.get()


@contextlib.contextmanager
def use_ledger(ledger: SpaceLedger):
    """Install ``ledger`` as the accounting sink for the enclosed calls."""
    token = _current.set(ledger)
    try:
        yield ledger
    finally:
        _current.reset(token)
