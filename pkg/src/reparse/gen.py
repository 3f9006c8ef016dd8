"""Deterministic random instances for tests and benchmarks.

An instance is a pattern with roughly the requested number of literals and
a subject string near the requested length: either sampled from the
pattern's language (guaranteed match) or such a sample with a few edits
(usually a reject).  Everything derives from one seeded RNG, so a seed
fully determines the instance.

Patterns lean on unions and stars; pure concatenation produces automata
with few epsilon edges and trivial decompositions, which would make the
benchmarks flatter than real workloads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import Ast, Concat, Epsilon, Literal, Star, Union, literal_count, unparse

ALPHABETS = (b"ab", b"abc", b"abcd")
FOREIGN_BYTE = 0x7A  # 'z': never in a generated alphabet


@dataclass(frozen=True)
class GeneratedInstance:
    pattern: bytes
    text: bytes
    from_walk: bool  # True: sampled from the language, so it matches


class _Gen:
    def __init__(self, rng: random.Random, alphabet: bytes):
        self.rng = rng
        self.alphabet = alphabet
        self.next_pos = 1

    def literal(self) -> Literal:
        node = Literal(self.rng.choice(self.alphabet), self.next_pos)
        self.next_pos += 1
        return node

    def build(self, budget: int, depth: int = 0) -> Ast:
        rng = self.rng
        if budget <= 1 or depth > 60:
            if rng.random() < 0.06:
                return Epsilon()
            return self.literal()
        r = rng.random()
        if r < 0.27:
            return Star(self.build(budget, depth + 1))
        left = rng.randint(1, budget - 1)
        a = self.build(left, depth + 1)
        b = self.build(budget - left, depth + 1)
        return Concat(a, b) if r < 0.67 else Union(a, b)


def _measure(ast: Ast):
    """Per-node (minimum, expected-ish) language lengths, memoized by id."""
    memo = {}

    def m(node):
        got = memo.get(id(node))
        if got is not None:
            return got
        if isinstance(node, Literal):
            out = (1, 1.0)
        elif isinstance(node, Epsilon):
            out = (0, 0.0)
        elif isinstance(node, Concat):
            (la, ea), (lb, eb) = m(node.left), m(node.right)
            out = (la + lb, ea + eb)
        elif isinstance(node, Union):
            (la, ea), (lb, eb) = m(node.left), m(node.right)
            out = (min(la, lb), (ea + eb) / 2)
        else:  # Star
            _, ea = m(node.child)
            out = (0, ea)
        memo[id(node)] = out
        return out

    m(ast)
    return memo


def _walk(node: Ast, target: float, rng: random.Random, out: bytearray, memo):
    """Sample a language member, steering lengths toward ``target``."""
    if isinstance(node, Literal):
        out.append(node.byte)
    elif isinstance(node, Epsilon):
        pass
    elif isinstance(node, Concat):
        _, ea = memo[id(node.left)]
        _, eb = memo[id(node.right)]
        total = ea + eb
        share = target * (ea / total) if total > 0 else 0.0
        before = len(out)
        _walk(node.left, share, rng, out, memo)
        _walk(node.right, target - (len(out) - before), rng, out, memo)
    elif isinstance(node, Union):
        if rng.random() < 0.25:
            pick = node.left if rng.random() < 0.5 else node.right
        else:
            pick = min(
                (node.left, node.right),
                key=lambda c: abs(memo[id(c)][1] - target),
            )
        _walk(pick, target, rng, out, memo)
    else:  # Star
        _, ec = memo[id(node.child)]
        if ec <= 0 or target < ec / 2:
            return
        # Repeat adaptively until the produced length approaches the
        # target; expectation estimates drift too much on deep trees to
        # fix a repetition count up front.
        start = len(out)
        empty_streak = 0
        while len(out) - start < target - ec / 2:
            before = len(out)
            _walk(node.child, min(ec, target - (len(out) - start)), rng, out, memo)
            if len(out) == before:
                empty_streak += 1
                if empty_streak >= 8:
                    break  # the child only produces empty runs
            else:
                empty_streak = 0


def _perturb(text: bytes, rng: random.Random, alphabet: bytes) -> bytes:
    data = bytearray(text)
    edits = rng.randint(1, 4)
    for _ in range(edits):
        kind = rng.random()
        byte = FOREIGN_BYTE if rng.random() < 0.4 else rng.choice(alphabet)
        if not data or kind < 0.25:
            data.insert(rng.randint(0, len(data)), byte)
        elif kind < 0.75:
            data[rng.randrange(len(data))] = byte
        else:
            del data[rng.randrange(len(data))]
    return bytes(data)


def gen_instance(seed: int, m_target: int, n_target: int,
                 kind: str = "auto") -> GeneratedInstance:
    """Build the instance a seed determines.

    ``kind``: "walk" (guaranteed match), "perturbed" (edited walk, usually
    a reject), or "auto" (a seeded coin picks one).
    """
    rng = random.Random(seed)
    alphabet = rng.choice(ALPHABETS)
    gen = _Gen(rng, alphabet)
    body = gen.build(max(1, m_target))
    # Long subjects need unbounded repetition somewhere; a top-level star
    # guarantees it.
    ast = Star(body) if n_target > 2 * max(1, m_target) else body
    pattern = unparse(ast)

    memo = _measure(ast)
    out = bytearray()
    _walk(ast, float(n_target), rng, out, memo)
    walk_text = bytes(out)

    if kind == "auto":
        kind = "walk" if rng.random() < 0.5 else "perturbed"
    if kind == "walk":
        return GeneratedInstance(pattern, walk_text, True)
    if kind == "perturbed":
        return GeneratedInstance(pattern, _perturb(walk_text, rng, alphabet), False)
    raise ValueError(f"unknown kind {kind!r}")


def instance_literals(inst: GeneratedInstance) -> int:
    from .syntax import parse_pattern

    return literal_count(parse_pattern(inst.pattern))
