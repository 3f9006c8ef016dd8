"""Pure-Python transition kernel.

State sets are int masks, so the per-word bit work rides on CPython's
big-int ops.  Semantics match ``_kernel_c`` exactly; the test suite holds
the two to bit-for-bit agreement.
"""

from __future__ import annotations


def closure(prog, mask: int) -> int:
    """Epsilon closure of ``mask``; each state is expanded at most once."""
    masks = prog.eps_masks()
    result = mask
    frontier = mask
    while frontier:
        new = 0
        m = frontier
        while m:
            low = m & -m
            m ^= low
            new |= masks[low.bit_length() - 1]
        frontier = new & ~result
        result |= frontier
    return result


def move(prog, mask: int, sym: int) -> int:
    out = 0
    for sbit, dbit in prog.pure_moves(sym):
        if mask & sbit:
            out |= dbit
    return out


def step(prog, mask: int, sym: int) -> int:
    """Character move then closure; ``mask`` must already be closed."""
    return closure(prog, move(prog, mask, sym))


def sweep_final(prog, syms, mask: int) -> int:
    for sym in syms:
        if not mask:
            return 0
        mask = closure(prog, move(prog, mask, sym))
    return mask


def sweep_record(prog, syms, mask: int, w1: int, w2: int):
    """Run the sweep and record per-position membership of two states.

    Bit i of each result is set when the watched state is live after i
    symbols.  Results are (n+1)-bit ints.
    """
    r1 = (mask >> w1) & 1
    r2 = (mask >> w2) & 1
    i = 0
    for sym in syms:
        i += 1
        if mask:
            mask = closure(prog, move(prog, mask, sym))
        r1 |= ((mask >> w1) & 1) << i
        r2 |= ((mask >> w2) & 1) << i
    return r1, r2


def sweep_record_back(prog, syms, mask: int, w1: int, w2: int):
    """Like sweep_record, but consume ``syms`` right to left.

    Bit j of each result is set when the watched state is live after j
    symbols taken from the right end.  ``prog`` is normally the reversed
    program, making this the suffix-side twin of sweep_record without
    materializing a reversed string.
    """
    r1 = (mask >> w1) & 1
    r2 = (mask >> w2) & 1
    j = 0
    for idx in range(len(syms) - 1, -1, -1):
        j += 1
        if mask:
            mask = closure(prog, move(prog, mask, syms[idx]))
        r1 |= ((mask >> w1) & 1) << j
        r2 |= ((mask >> w2) & 1) << j
    return r1, r2


def sweep_history(prog, syms, mask: int) -> list:
    """All n+1 state sets of the sweep, in order."""
    out = [mask]
    for sym in syms:
        if mask:
            mask = closure(prog, move(prog, mask, sym))
        out.append(mask)
    return out
