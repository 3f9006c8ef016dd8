import random

import pytest

from oracles import brute_match_sets, random_ast
from reparse.automata import accepts, as_symbols, beta_sym, build_tnfa
from reparse.decomposition import decompose
from reparse.kernel import KernelSim
from reparse.strdecomp import (
    INNER,
    OUTER,
    InternalInvariantError,
    compute_match_sets,
    compute_valid_pairs,
    label_partition,
    merge_labels,
    outer_symbols,
    string_decomposition,
    validate,
)
from reparse.syntax import Concat, Star, parse_pattern, walk

# A worked mixed-block instance: the inner half is (acd)*, the rest loops
# single a's and ab's around it.  Same shape as the motivating example:
# ambiguity right after a prefix of a's, with acd runs only the inner half
# can take and ab runs only the outer half can take.
R_MIXED = "((acd)*|(a|(ab)))*"
Q_MIXED = b"aaacdaabaacdacdaabab"


def mixed_fixture():
    ast = parse_pattern(R_MIXED)
    a = build_tnfa(ast)
    inner_star = [n for n in walk(ast) if isinstance(n, Star)][1]
    d = decompose(a, separator=inner_star, beta_id=0)
    return a, d


def pipeline(a, d, q):
    sim = KernelSim(a)
    syms = as_symbols(q)
    ms = compute_match_sets(sim, d, syms)
    v = compute_valid_pairs(sim, d, syms, ms)
    inner_sim, outer_sim = KernelSim(d.inner), KernelSim(d.outer)
    blocks = label_partition(v, syms, d, inner_sim, outer_sim)
    sd = merge_labels(blocks, len(syms))
    validate(sd, syms, d, inner_sim, outer_sim)
    return syms, ms, v, blocks, sd


def test_mixed_fixture_has_both_stitch_edges():
    _, d = mixed_fixture()
    assert d.inner_accepts_eps
    assert d.eps_back_path_in_outer


def test_match_sets_after_two_characters():
    a, d = mixed_fixture()
    _, ms, _, _, _ = pipeline(a, d, Q_MIXED)
    # After the aa prefix both boundary states lie on accepting paths.
    assert (ms.match_theta >> 2) & 1
    assert (ms.match_phi >> 2) & 1
    # Mid-run positions of an acd block are dead for both.
    assert not (ms.match_theta >> 3) & 1
    assert not (ms.match_phi >> 3) & 1
    assert not (ms.match_theta >> 4) & 1


def test_match_is_prefix_and_suffix_intersection():
    a, d = mixed_fixture()
    _, ms, _, _, _ = pipeline(a, d, Q_MIXED)
    assert ms.match_theta == ms.prefix_theta & ms.suffix_theta
    assert ms.match_phi == ms.prefix_phi & ms.suffix_phi


def test_match_sets_empty_string():
    ast = parse_pattern("(a|(ba))*")
    a = build_tnfa(ast)
    d = decompose(a, beta_id=0)
    sim = KernelSim(a)
    ms = compute_match_sets(sim, d, as_symbols(b""))
    start = sim.start()
    assert bool(ms.prefix_theta & 1) == sim.contains(start, d.theta_parent)
    assert bool(ms.prefix_phi & 1) == sim.contains(start, d.phi_parent)


def test_match_sets_vs_brute_force():
    rng = random.Random(31)
    checked = 0
    while checked < 40:
        ast = random_ast(rng, rng.randint(2, 10))
        a = build_tnfa(ast)
        if a.k <= 2:
            continue
        d = decompose(a)
        q = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 7)))
        if not accepts(a, q):
            continue
        checked += 1
        syms = as_symbols(q)
        sim = KernelSim(a)
        ms = compute_match_sets(sim, d, syms)
        brute = brute_match_sets(a, d, syms)
        n = len(q)
        for state, (pre_bits, suf_bits) in (
            (d.theta_parent, (ms.prefix_theta, ms.suffix_theta)),
            (d.phi_parent, (ms.prefix_phi, ms.suffix_phi)),
        ):
            want_pre, want_suf = brute[state]
            assert {i for i in range(n + 1) if (pre_bits >> i) & 1} == want_pre
            assert {i for i in range(n + 1) if (suf_bits >> i) & 1} == want_suf


def test_valid_pair_positions_include_ambiguous_points():
    a, d = mixed_fixture()
    _, _, v, _, _ = pipeline(a, d, Q_MIXED)
    by_pos = dict(v.pairs())
    assert by_pos.get(2) == 3, "both boundary states after the aa prefix"
    assert by_pos.get(6) == 3, "both boundary states after aaacda"


def test_valid_pairs_properties_random():
    rng = random.Random(32)
    checked = 0
    while checked < 50:
        ast = random_ast(rng, rng.randint(2, 12))
        a = build_tnfa(ast)
        if a.k <= 2:
            continue
        q = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 9)))
        if not accepts(a, q):
            continue
        checked += 1
        d = decompose(a)
        syms = as_symbols(q)
        sim = KernelSim(a)
        ms = compute_match_sets(sim, d, syms)
        v = compute_valid_pairs(sim, d, syms, ms)
        positions = list(v.positions)
        assert positions == sorted(set(positions)), "strictly increasing"
        for pos, flags in v.pairs():
            assert flags, "pairs are nonempty"
            if flags & 1:
                assert (ms.match_theta >> pos) & 1
            if flags & 2:
                assert (ms.match_phi >> pos) & 1
        # Replaying the collapsed simulation still accepts.
        state = sim.start()
        pair_at = dict(v.pairs())
        for i in range(len(q) + 1):
            if i:
                state = sim.step(state, syms[i - 1])
            flags = pair_at.get(i)
            if flags:
                keep = []
                if flags & 1:
                    keep.append(d.theta_parent)
                if flags & 2:
                    keep.append(d.phi_parent)
                state = sim.inject(keep)
        assert sim.contains(state, a.phi)


def test_pure_outer_parse_gives_empty_sequence():
    # The accepting path can avoid the inner half entirely.
    ast = parse_pattern("(ab)|c")
    a = build_tnfa(ast)
    ab = next(n for n in walk(ast) if isinstance(n, Concat))
    d = decompose(a, separator=ab, beta_id=0)
    sim = KernelSim(a)
    syms = as_symbols(b"c")
    ms = compute_match_sets(sim, d, syms)
    v = compute_valid_pairs(sim, d, syms, ms)
    assert len(v) == 0
    blocks = label_partition(v, syms, d, KernelSim(d.inner), KernelSim(d.outer))
    sd = merge_labels(blocks, 1)
    assert sd.ell == 0 and sd.ranges == [(0, 1)]


def test_labels_on_mixed_fixture():
    a, d = mixed_fixture()
    _, _, _, blocks, sd = pipeline(a, d, Q_MIXED)
    by_range = {(s, e): lab for s, e, lab in blocks}
    assert by_range[(2, 5)] is INNER  # acd after the aa prefix
    assert by_range[(6, 8)] is OUTER  # ab after aaacda
    # Adjacent inner runs merge into one inner substring via the back edge.
    assert (9, 15) in sd.ranges
    assert sd.ranges == [(0, 2), (2, 5), (5, 9), (9, 15), (15, 20)]
    assert sd.ell == 2


def test_forced_labels_single_boundary_pairs():
    # entry->exit single pairs force inner; exit->entry force outer.
    a, d = mixed_fixture()
    syms, ms, v, blocks, _ = pipeline(a, d, Q_MIXED)
    for (s, e, lab), (pos_l, f_l), (pos_r, f_r) in zip(
        blocks[1:-1], list(v.pairs())[:-1], list(v.pairs())[1:]
    ):
        if f_l == 1 and f_r == 2:
            assert lab is INNER
        if f_l == 2 and f_r == 1:
            assert lab is OUTER


def test_ambiguous_block_with_back_path_goes_inner():
    ast = parse_pattern("((ab)*|(ab))*")
    a = build_tnfa(ast)
    inner_star = [n for n in walk(ast) if isinstance(n, Star)][1]
    d = decompose(a, separator=inner_star, beta_id=0)
    assert d.eps_back_path_in_outer
    syms, ms, v, blocks, sd = pipeline(a, d, b"abab")
    # every ab run is accepted by both halves; with the back path they all
    # go inner and merge
    middle = [lab for s, e, lab in blocks if e > s]
    assert middle and all(lab is INNER for lab in middle)
    assert sd.ranges == [(0, 0), (0, 4), (4, 4)]


def test_ambiguous_block_without_back_path_goes_outer():
    ast = parse_pattern("(a(b*a*)b)*")
    a = build_tnfa(ast)
    sep = next(
        n
        for n in walk(ast)
        if isinstance(n, Concat)
        and isinstance(n.left, Star)
        and isinstance(n.right, Star)
    )
    d = decompose(a, separator=sep, beta_id=0)
    assert d.inner_accepts_eps and not d.eps_back_path_in_outer
    syms, ms, v, blocks, sd = pipeline(a, d, b"ababab")
    # the ba run after the first a is accepted by both halves; without an
    # epsilon way back it must be labeled outer
    assert (1, 3, OUTER) in blocks


def test_merge_examples():
    # labels [O, I, I, O] merge to a single inner flanked by outers
    blocks = [(0, 2, OUTER), (2, 4, INNER), (4, 6, INNER), (6, 8, OUTER)]
    sd = merge_labels(blocks, 8)
    assert sd.ranges == [(0, 2), (2, 6), (6, 8)]
    assert sd.ell == 1
    # all-outer labels give the single outer string
    sd = merge_labels([(0, 3, OUTER), (3, 5, OUTER)], 5)
    assert sd.ranges == [(0, 5)] and sd.ell == 0
    # leading inner gets an empty outer before it
    sd = merge_labels([(0, 0, OUTER), (0, 3, INNER), (3, 3, OUTER)], 3)
    assert sd.ranges == [(0, 0), (0, 3), (3, 3)]


def test_outer_symbols_joins_with_placeholder():
    a, d = mixed_fixture()
    syms, _, _, _, sd = pipeline(a, d, Q_MIXED)
    joined = outer_symbols(sd, syms, beta_sym(d.beta_id))
    b = beta_sym(d.beta_id)
    expect = list(b"aa") + [b] + list(b"aaba") + [b] + list(b"aabab")
    assert list(joined) == expect


def test_full_invariants_random():
    rng = random.Random(33)
    checked = 0
    while checked < 60:
        ast = random_ast(rng, rng.randint(2, 12))
        a = build_tnfa(ast)
        if a.k <= 2:
            continue
        q = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 10)))
        if not accepts(a, q):
            continue
        checked += 1
        d = decompose(a)
        syms = as_symbols(q)
        sim = KernelSim(a)
        inner_sim, outer_sim = KernelSim(d.inner), KernelSim(d.outer)
        sd = string_decomposition(sim, d, syms, inner_sim, outer_sim)
        # validate() ran inside; assert the shape invariants again here
        assert 2 * sd.ell <= len(q) + 1
        covered = []
        for s, e in sd.ranges:
            covered.extend(range(s, e))
        assert covered == list(range(len(q)))
        for s, e in sd.inner_ranges():
            assert e > s
            assert accepts(d.inner, bytes(q[s:e]))
        assert accepts(d.outer, outer_symbols(sd, syms, beta_sym(d.beta_id)))


def test_determinism():
    a, d = mixed_fixture()
    runs = [pipeline(a, d, Q_MIXED)[4].ranges for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_debug_dump():
    from reparse.strdecomp import describe

    a, d = mixed_fixture()
    _, _, v, blocks, _ = pipeline(a, d, Q_MIXED)
    text = describe(v, blocks)
    assert "2 {entry,exit}" in text
    assert "[2,5) inner" in text
    assert "[6,8) outer" in text
