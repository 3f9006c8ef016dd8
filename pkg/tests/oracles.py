"""Independent reference implementations the tests check the engines against.

Everything here computes answers from first principles (recursive language
semantics, dense reachability, exhaustive path search) and stays
deliberately ignorant of how the engines work.
"""

import itertools

from reparse.automata import EPS, beta_sym, is_char_sym
from reparse.syntax import Beta, Concat, Epsilon, Literal, Star, Union


def lang_accepts(ast, s) -> bool:
    """Membership by direct recursive language semantics.

    ``ends(node, i)`` is the set of positions reachable by matching the
    node's language starting at i; stars iterate to a fixpoint.
    """
    memo = {}

    def ends(node, i):
        key = (id(node), i)
        got = memo.get(key)
        if got is not None:
            return got
        memo[key] = frozenset()  # cycle guard while the star iterates
        if isinstance(node, Literal):
            out = frozenset([i + 1]) if i < len(s) and s[i] == node.byte else frozenset()
        elif isinstance(node, Epsilon):
            out = frozenset([i])
        elif isinstance(node, Beta):
            want = beta_sym(node.beta_id)
            out = frozenset([i + 1]) if i < len(s) and s[i] == want else frozenset()
        elif isinstance(node, Concat):
            out = frozenset(
                k for j in ends(node.left, i) for k in ends(node.right, j)
            )
        elif isinstance(node, Union):
            out = ends(node.left, i) | ends(node.right, i)
        else:  # Star
            reach = {i}
            frontier = {i}
            while frontier:
                new = set()
                for j in frontier:
                    new |= ends(node.child, j)
                frontier = new - reach
                reach |= new
            out = frozenset(reach)
        memo[key] = out
        return out

    return len(s) in ends(ast, 0)


def floyd_warshall_eps_closure(tnfa, states) -> set:
    """Dense transitive closure over epsilon edges; O(k^3) on purpose."""
    k = tnfa.k
    reach = [[False] * k for _ in range(k)]
    for i in range(k):
        reach[i][i] = True
    for src, dst, sym, _ in tnfa.transitions:
        if sym == EPS:
            reach[src][dst] = True
    for mid in range(k):
        for i in range(k):
            if reach[i][mid]:
                row, midrow = reach[i], reach[mid]
                for j in range(k):
                    if midrow[j]:
                        row[j] = True
    out = set()
    for s in states:
        out.update(j for j in range(k) if reach[s][j])
    return out


def one_symbol_paths(tnfa, states, sym) -> set:
    """States reachable by paths matching exactly one symbol, found by
    enumerating epsilon*-symbol-epsilon* paths with the dense closure."""
    closed = floyd_warshall_eps_closure(tnfa, states)
    hit = {
        dst
        for src, dst, label, _ in tnfa.transitions
        if label == sym and src in closed
    }
    return floyd_warshall_eps_closure(tnfa, hit)


def brute_match_sets(tnfa, d, syms):
    """Valid-pair positions for the boundary states by direct simulation
    of both substring constraints; O(n^2 m)."""
    from reparse.kernel import KernelSim

    sim = KernelSim(tnfa)
    n = len(syms)
    out = {}
    for state in (d.theta_parent, d.phi_parent):
        prefix = set()
        suffix = set()
        cur = sim.start()
        for i in range(n + 1):
            if i:
                cur = sim.step(cur, syms[i - 1])
            if sim.contains(cur, state):
                prefix.add(i)
        for i in range(n + 1):
            tail = sim.inject([state])
            ok = True
            for j in range(i, n):
                tail = sim.step(tail, syms[j])
                if not tail:
                    ok = False
                    break
            if ok and sim.contains(tail, tnfa.phi):
                suffix.add(i)
        out[state] = (prefix, suffix)
    return out


def language_strings(ast, alphabet, max_len):
    """All strings over ``alphabet`` up to ``max_len`` in the AST's language."""
    out = []
    for length in range(max_len + 1):
        for tup in itertools.product(alphabet, repeat=length):
            s = bytes(tup)
            if lang_accepts(ast, s):
                out.append(s)
    return out


def substitution_accepts(d, s, inner_accepts_cache=None) -> bool:
    """Whether the decomposed pair accepts ``s``: search over outer paths
    where each placeholder transition consumes some inner-accepted
    substring."""
    from reparse.automata import accepts
    from reparse.kernel import impl

    cache = inner_accepts_cache if inner_accepts_cache is not None else {}

    def inner_ok(sub):
        if sub not in cache:
            cache[sub] = accepts(d.inner, sub)
        return cache[sub]

    prog = d.outer.prog()
    bsym = beta_sym(d.beta_id)
    seen = set()

    def search(state, i):
        if (state, i) in seen:
            return False
        seen.add((state, i))
        if i == len(s) and (state >> d.outer.phi) & 1:
            return True
        if i < len(s):
            nxt = impl.step(prog, state, s[i])
            if nxt and search(nxt, i + 1):
                return True
        nxt = impl.step(prog, state, bsym)
        if nxt:
            for j in range(i, len(s) + 1):
                if inner_ok(s[i:j]) and search(nxt, j):
                    return True
        return False

    return search(impl.closure(prog, 1 << d.outer.theta), 0)


def random_ast(rng, budget, alphabet=b"ab", star_weight=0.25, eps_weight=0.1):
    """Random pattern AST with about ``budget`` literals."""
    from reparse.syntax import parse_pattern, unparse

    counter = itertools.count(1)

    def build(b, depth=0):
        if b <= 1 or depth > 40:
            if rng.random() < eps_weight:
                return Epsilon()
            return Literal(rng.choice(alphabet), next(counter))
        r = rng.random()
        if r < star_weight:
            return Star(build(b, depth + 1))
        left = rng.randint(1, b - 1)
        a = build(left, depth + 1)
        c = build(b - left, depth + 1)
        return Concat(a, c) if r < (1 + star_weight) / 2 else Union(a, c)

    tree = build(budget)
    # Round-trip to get canonical position numbering.
    return parse_pattern(unparse(tree))
