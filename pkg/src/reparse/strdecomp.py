"""Cutting the subject string along an automaton decomposition.

Given a decomposed automaton and an accepted string, this stage finds an
alternating sequence of outer/inner substrings consistent with some single
accepting path:

  1. match sets: positions where each boundary state lies on *some*
     accepting path (a forward and a backward sweep);
  2. a valid-pair sequence: one left-to-right sweep that collapses the
     state set onto the boundary whenever it can, tying all recorded pairs
     to one accepting path;
  3. a greedy labelling of the blocks between consecutive pairs, then a
     merge of equal labels into the final alternation.

Blocks whose pairs do not force a side are resolved by simulating the
block in each half; blocks both halves accept go inner exactly when the
outer half has an epsilon path from the exit boundary back to the entry
(one inner run can then serve both neighbours).

Everything here is generic over a simulation facade, so the tabulated
engine can reuse the stage wholesale.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from . import ledger as ledger_mod
from .decomposition import Decomposition


class InternalInvariantError(AssertionError):
    """A should-be-impossible configuration; indicates a bug, not bad input."""


@dataclass
class MatchSets:
    """Per-position bitsets (bit i = after i symbols) for the boundary pair."""

    n: int
    prefix_theta: int
    prefix_phi: int
    suffix_theta: int
    suffix_phi: int

    @property
    def match_theta(self) -> int:
        return self.prefix_theta & self.suffix_theta

    @property
    def match_phi(self) -> int:
        return self.prefix_phi & self.suffix_phi


@dataclass
class ValidPairSeq:
    """Strictly increasing positions with nonempty boundary subsets."""

    positions: array  # array('i')
    flags: bytearray  # bit 0: entry boundary, bit 1: exit boundary

    def __len__(self) -> int:
        return len(self.positions)

    def pairs(self):
        return zip(self.positions, self.flags)


@dataclass
class StringDecomposition:
    """Alternating outer/inner ranges covering [0, n).

    ``ranges[0::2]`` are outer (possibly empty), ``ranges[1::2]`` inner
    (never empty); the sequence starts and ends with an outer range.
    """

    n: int
    ranges: list

    @property
    def ell(self) -> int:
        return len(self.ranges) // 2

    def inner_ranges(self):
        return self.ranges[1::2]

    def outer_ranges(self):
        return self.ranges[0::2]


def _reverse_bits(x: int, width: int) -> int:
    return int(format(x, f"0{width}b")[::-1], 2) if width else 0


def compute_match_sets(sim, d: Decomposition, syms) -> MatchSets:
    """Prefix/suffix/match sets for the boundary states.

    ``sim`` simulates the parent automaton; the caller guarantees the
    parent accepts ``syms``.
    """
    n = len(syms)
    pre_t, pre_p = sim.record(syms, d.theta_parent, d.phi_parent)
    suf_t_rev, suf_p_rev = sim.rrecord(syms, d.theta_parent, d.phi_parent)
    # Bit j of the reverse sweep is "state live after j symbols from the
    # right", i.e. position n - j.
    suf_t = _reverse_bits(suf_t_rev, n + 1)
    suf_p = _reverse_bits(suf_p_rev, n + 1)
    return MatchSets(n, pre_t, pre_p, suf_t, suf_p)


def compute_valid_pairs(sim, d: Decomposition, syms, ms: MatchSets) -> ValidPairSeq:
    """One forward sweep, collapsing onto match-valid boundary states."""
    match_t, match_p = ms.match_theta, ms.match_phi
    theta, phi = d.theta_parent, d.phi_parent
    positions = array("i")
    flags = bytearray()
    state = sim.start()
    n = len(syms)
    for i in range(n + 1):
        if i:
            state = sim.step(state, syms[i - 1])
        x = 0
        if ((match_t >> i) & 1) and sim.contains(state, theta):
            x |= 1
        if ((match_p >> i) & 1) and sim.contains(state, phi):
            x |= 2
        if x:
            positions.append(i)
            flags.append(x)
            collapse = []
            if x & 1:
                collapse.append(theta)
            if x & 2:
                collapse.append(phi)
            state = sim.inject(collapse)
    return ValidPairSeq(positions, flags)


INNER = True
OUTER = False


def label_partition(v: ValidPairSeq, syms, d: Decomposition,
                    inner_sim, outer_sim) -> list:
    """Label the blocks the pair sequence cuts the string into.

    Returns (start, end, label) triples covering [0, n).  The leading and
    trailing blocks are outer by construction; blocks whose neighbouring
    pairs are both single and distinct are forced, the rest are resolved
    by simulation.
    """
    n = len(syms)
    if len(v) == 0:
        return [(0, n, OUTER)]
    blocks = [(0, v.positions[0], OUTER)]
    for j in range(len(v) - 1):
        s, e = v.positions[j], v.positions[j + 1]
        xl, xr = v.flags[j], v.flags[j + 1]
        if xl == 1 and xr == 2:
            label = INNER
        elif xl == 2 and xr == 1:
            label = OUTER
        elif xl in (1, 2) and xr == xl:
            raise InternalInvariantError(
                "consecutive single pairs on the same boundary state"
            )
        else:
            block = syms[s:e]
            inner_ok = inner_sim.contains(
                inner_sim.final(block), d.inner.phi
            )
            outer_ok = outer_sim.contains(
                outer_sim.final(block, outer_sim.inject([d.phi_outer])),
                d.theta_outer,
            )
            if inner_ok and not outer_ok:
                label = INNER
            elif outer_ok and not inner_ok:
                label = OUTER
            elif inner_ok and outer_ok:
                label = INNER if d.eps_back_path_in_outer else OUTER
            else:
                raise InternalInvariantError(
                    "block accepted by neither half despite valid pairs"
                )
        blocks.append((s, e, label))
    blocks.append((v.positions[-1], n, OUTER))
    return blocks


def merge_labels(blocks, n: int) -> StringDecomposition:
    """Merge equal-label neighbours into the alternating decomposition."""
    merged = []
    for s, e, label in blocks:
        if s == e:
            continue
        if merged and merged[-1][2] == label:
            merged[-1] = (merged[-1][0], e, label)
        else:
            merged.append((s, e, label))
    ranges = []
    pos = 0
    for s, e, label in merged:
        if label is INNER:
            if not ranges or len(ranges) % 2 == 0:
                ranges.append((pos, pos))  # empty outer before this inner
            ranges.append((s, e))
        else:
            ranges.append((s, e))
        pos = e
    if len(ranges) % 2 == 0:
        ranges.append((n, n))  # empty trailing outer
    if not ranges:
        ranges = [(0, n)]
    return StringDecomposition(n, ranges)


def outer_symbols(sd: StringDecomposition, syms, beta: int) -> array:
    """The outer string: outer substrings joined by the beta symbol."""
    out = array("i")
    for idx, (s, e) in enumerate(sd.outer_ranges()):
        if idx:
            out.append(beta)
        out.extend(syms[s:e])
    return out


def validate(sd: StringDecomposition, syms, d: Decomposition,
             inner_sim, outer_sim):
    """Re-acceptance and shape checks; runs on every decomposition."""
    from .automata import beta_sym

    n = sd.n
    ranges = sd.ranges
    assert len(ranges) % 2 == 1
    pos = 0
    for idx, (s, e) in enumerate(ranges):
        assert s == pos and e >= s, "ranges must tile the string"
        if idx % 2 == 1:
            assert e > s, "inner substrings are nonempty"
        pos = e
    assert pos == n
    assert 2 * sd.ell <= n + 1, "too many inner substrings"
    for s, e in sd.inner_ranges():
        final = inner_sim.final(syms[s:e])
        if not inner_sim.contains(final, d.inner.phi):
            raise InternalInvariantError("inner half rejects an inner substring")
    outer_syms = outer_symbols(sd, syms, beta_sym(d.beta_id))
    if not outer_sim.contains(outer_sim.final(outer_syms), d.outer.phi):
        raise InternalInvariantError("outer half rejects the joined outer string")


def describe(v: ValidPairSeq, blocks) -> str:
    """Debug dump of a pair sequence and its labelled blocks."""
    names = {1: "{entry}", 2: "{exit}", 3: "{entry,exit}"}
    lines = ["pairs:"]
    for pos, flags in v.pairs():
        lines.append(f"  {pos} {names[flags]}")
    lines.append("blocks:")
    for s, e, label in blocks:
        lines.append(f"  [{s},{e}) {'inner' if label is INNER else 'outer'}")
    return "\n".join(lines) + "\n"


def string_decomposition(sim, d: Decomposition, syms, inner_sim, outer_sim,
                         ledger=None) -> StringDecomposition:
    """Full pipeline: match sets, valid pairs, labelling, merge, validate."""
    led = ledger or ledger_mod.current_ledger()
    n = len(syms)
    with led.track("match_sets", ledger_mod.match_sets_bytes(n)):
        ms = compute_match_sets(sim, d, syms)
        v = compute_valid_pairs(sim, d, syms, ms)
    with led.track("recursion", ledger_mod.valid_pairs_bytes(len(v))):
        blocks = label_partition(v, syms, d, inner_sim, outer_sim)
        sd = merge_labels(blocks, n)
    validate(sd, syms, d, inner_sim, outer_sim)
    return sd
