import itertools
import random

import pytest

from oracles import lang_accepts, random_ast
from reparse.automata import (
    PSEUDO_BASE,
    accepts,
    as_symbols,
    build_tnfa,
    is_char_sym,
)
from reparse.bitparallel import (
    ClosureTable,
    ForestSim,
    GLOBAL_TABLE,
    build_micro_forest,
    decode_encoding,
    fast_match,
    fast_parse,
    fast_parse_base,
    fast_step,
    get_sim,
    two_pass_audit,
)
from reparse.engine import parse, replay, replay_positions
from reparse.kernel import KernelSim, impl
from reparse.syntax import parse_pattern, unparse


def owned_states(micro):
    pseudo = sum(
        2 for _, _, sym, _ in micro.tnfa.transitions if sym >= PSEUDO_BASE
    )
    return micro.tnfa.k - pseudo


def to_global_int(forest, kernel_mask, k):
    bits = 0
    for s in range(k):
        if (kernel_mask >> s) & 1:
            for mi, bit in forest.copies[s]:
                bits |= 1 << (forest.micros[mi].offset + bit)
    return bits


def from_global_int(forest, state, k):
    out = 0
    for s in range(k):
        mi, bit = forest.primary[s]
        if (state >> (forest.micros[mi].offset + bit)) & 1:
            out |= 1 << s
    return out


def test_single_micro_when_t_covers_automaton():
    a = build_tnfa(parse_pattern("(a|(ba))*"))
    forest = build_micro_forest(a, 64)
    assert forest.micro_count() == 1
    assert forest.micros[0].tnfa.k == a.k


def test_worked_pattern_t4_micro_sizes():
    a = build_tnfa(parse_pattern("(a|(ba))*"))
    forest = build_micro_forest(a, 4)
    assert forest.micro_count() >= 2
    assert all(owned_states(m) <= 4 for m in forest.micros)
    # language equivalence up to length 5
    sim = ForestSim(forest)
    for length in range(6):
        for tup in itertools.product(b"ab", repeat=length):
            s = bytes(tup)
            assert sim.accepts(as_symbols(s)) == accepts(a, s)


def test_rejects_tiny_t():
    a = build_tnfa(parse_pattern("ab"))
    with pytest.raises(ValueError):
        build_micro_forest(a, 2)


def test_micro_count_is_linear_in_k_over_t():
    rng = random.Random(51)
    worst = 0.0
    for _ in range(100):
        ast = random_ast(rng, rng.randint(2, 30))
        a = build_tnfa(ast)
        for t in (3, 5, 8):
            forest = build_micro_forest(a, t)
            assert all(owned_states(m) <= t for m in forest.micros)
            ratio = forest.micro_count() / -(-a.k // t)
            worst = max(worst, ratio)
    assert worst <= 6.0, worst  # measured headroom over the 100-pattern corpus


def test_every_state_owned_once_and_shared_copies_linked():
    rng = random.Random(52)
    for _ in range(40):
        a = build_tnfa(random_ast(rng, rng.randint(2, 16)))
        t = rng.choice([3, 4, 5, 6, 7, 8])
        forest = build_micro_forest(a, t)
        assert sorted(
            sum(
                (
                    [m.local_to_global[i] for i in range(m.tnfa.k)]
                    for m in forest.micros
                ),
                [],
            )
        ) != []
        # primary covers every global state exactly once
        assert len(forest.primary) == a.k
        for s in range(a.k):
            assert (forest.primary[s] in forest.copies[s]) or forest.copies[
                s
            ][0] == forest.primary[s]
        # child boundary states appear in exactly two micros
        for m in forest.micros:
            for lth, lph, ci, cth, cph in forest.links[m.index]:
                child = forest.micros[ci]
                assert m.local_to_global[lth] == child.local_to_global[cth]
                assert m.local_to_global[lph] == child.local_to_global[cph]


def test_fast_step_equals_plain_step_bit_for_bit():
    rng = random.Random(53)
    for _ in range(40):
        ast = random_ast(rng, rng.randint(2, 14))
        a = build_tnfa(ast)
        ks = KernelSim(a)
        for t in (3, 4, 5, 6, 7, 8):
            forest = build_micro_forest(a, t)
            for _ in range(6):
                states = [s for s in range(a.k) if rng.random() < 0.3]
                mask = ks.inject(states)
                fstate = to_global_int(forest, mask, a.k)
                for sym in (ord("a"), ord("b")):
                    got = fast_step(forest, fstate, sym)
                    want = ks.step(mask, sym)
                    assert from_global_int(forest, got, a.k) == want


def test_fast_step_empty_is_empty():
    a = build_tnfa(parse_pattern("(a|(ba))*"))
    forest = build_micro_forest(a, 4)
    assert fast_step(forest, 0, ord("a")) == 0


def test_reversed_direction_equals_reversed_kernel():
    rng = random.Random(54)
    for _ in range(30):
        a = build_tnfa(random_ast(rng, rng.randint(2, 12)))
        ks = KernelSim(a)
        t = rng.choice([3, 5, 8])
        sim = ForestSim(build_micro_forest(a, t))
        for _ in range(6):
            states = [s for s in range(a.k) if rng.random() < 0.3]
            mask = ks.rclosure_of(states)
            fstate = sim.rclosure_of(states)
            for s in range(a.k):
                assert ks.contains(mask, s) == sim.contains(fstate, s)
            for sym in (ord("a"), ord("b")):
                want = impl.step(ks.rev_prog, mask, sym)
                got = sim.rstep(fstate, sym)
                for s in range(a.k):
                    assert bool((want >> s) & 1) == sim.contains(got, s)


def test_closure_table_entries_match_decoded_oracle():
    # audit every memoized entry: decode the encoding, rebuild, close by
    # plain search, compare
    table = ClosureTable()
    rng = random.Random(55)
    for _ in range(25):
        a = build_tnfa(random_ast(rng, rng.randint(2, 12)))
        t = rng.choice([3, 4, 5, 6])
        forest = build_micro_forest(a, t, table=table)
        sim = ForestSim(forest)
        for _ in range(5):
            s = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 8)))
            sim.accepts(as_symbols(s))
    from oracles import floyd_warshall_eps_closure
    from reparse.automata import reverse as rev_auto

    checked = 0
    for reversed_dir, enc, bits, closed in table.entries():
        decoded = decode_encoding(enc)
        if reversed_dir:
            decoded = rev_auto(decoded)
        states = [i for i in range(decoded.k) if (bits >> i) & 1]
        want = floyd_warshall_eps_closure(decoded, states)
        assert {i for i in range(decoded.k) if (closed >> i) & 1} == want
        checked += 1
    assert checked >= 100


def test_closure_table_idempotent_entries():
    from reparse.automata import reverse as rev_auto

    table = ClosureTable()
    a = build_tnfa(parse_pattern("((ab)*c|d)*"))
    forest = build_micro_forest(a, 4, table=table)
    sim = ForestSim(forest)
    sim.accepts(as_symbols(b"ababcd"))
    for reversed_dir, enc, bits, closed in list(table.entries()):
        decoded = decode_encoding(enc)
        prog = (rev_auto(decoded) if reversed_dir else decoded).prog()
        again = table.closure(enc, prog, closed, reversed_dir)
        assert again == closed  # closing a closed set changes nothing


def test_two_pass_sufficiency_audit():
    rng = random.Random(56)
    with two_pass_audit() as audit:
        for _ in range(25):
            ast = random_ast(rng, rng.randint(2, 14))
            pattern = unparse(ast)
            q = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 10)))
            parse(pattern, q, "bitparallel", t=rng.randint(3, 8))
    assert audit["count"] > 200


def test_fast_match_examples_and_random():
    a = build_tnfa(parse_pattern("(a|(ba))*"))
    assert fast_match(a, b"aaba", 32)
    assert not fast_match(a, b"b", 32)
    rng = random.Random(57)
    cases = 0
    while cases < 500:
        ast = random_ast(rng, rng.randint(1, 12))
        a = build_tnfa(ast)
        q = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 8)))
        t = rng.randint(3, 8)
        assert fast_match(a, q, t) == accepts(a, q), (unparse(ast), q, t)
        cases += 1


def test_fast_parse_base_examples():
    a = build_tnfa(parse_pattern("(a|(ba))*"))
    sim = get_sim(a, 32)
    assert len(fast_parse_base(sim, b"")) == 0
    path = fast_parse_base(sim, b"aaba")
    assert path.positions() == [1, 1, 2, 3]
    assert replay(a, b"aaba", path)


def test_fast_parse_base_random_replay():
    rng = random.Random(58)
    checked = 0
    while checked < 80:
        ast = random_ast(rng, rng.randint(1, 10))
        a = build_tnfa(ast)
        q = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 7)))
        want = lang_accepts(ast, q)
        sim = get_sim(a, rng.randint(3, 8))
        path = fast_parse_base(sim, q)
        assert (path is not None) == want
        if path is not None:
            assert replay(a, q, path)
            checked += 1


def test_fast_parse_examples():
    assert fast_parse("(a|(ba))*", b"aaba", 32) == [1, 1, 2, 3]
    assert fast_parse("", b"", 32) == []
    for t in (3, 4, 5, 6, 7, 8):
        assert fast_parse("(a|(ba))*", b"aaba", t) == [1, 1, 2, 3]


def test_fast_parse_agrees_with_linear():
    rng = random.Random(59)
    agree = 0
    while agree < 300:
        ast = random_ast(rng, rng.randint(1, 12))
        pattern = unparse(ast)
        q = bytes(rng.choice(b"ab") for _ in range(rng.randint(0, 8)))
        t = rng.randint(3, 8)
        rl = parse(pattern, q, "linear")
        rb = fast_parse(pattern, q, t)
        assert (rl is None) == (rb is None), (pattern, q, t)
        if rb is not None:
            a = build_tnfa(parse_pattern(pattern))
            assert replay_positions(a, q, rb)
        agree += 1


def test_shared_table_is_actually_shared():
    before = GLOBAL_TABLE.size()
    a1 = build_tnfa(parse_pattern("(ab)*"))
    a2 = build_tnfa(parse_pattern("(cd)*"))  # same shape, different bytes
    s1 = ForestSim(build_micro_forest(a1, 4))
    s1.accepts(as_symbols(b"abab"))
    mid = GLOBAL_TABLE.size()
    s2 = ForestSim(build_micro_forest(a2, 4))
    s2.accepts(as_symbols(b"cdcd"))
    after = GLOBAL_TABLE.size()
    # the second automaton reuses the first one's encodings
    assert after - mid < mid - before + 5
