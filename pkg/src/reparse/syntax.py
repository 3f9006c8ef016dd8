"""Pattern syntax: concrete grammar, AST, and position labelling.

The accepted grammar is deliberately small:

    pattern := alt
    alt     := cat ('|' cat)*
    cat     := rep*
    rep     := atom '*'*
    atom    := '(' alt ')' | escaped-byte | plain-byte

An empty ``cat`` denotes the empty string, so ``""`` and ``(a|)`` are legal.
The alphabet is raw bytes 0..255; the metacharacters ``( ) | * \\`` must be
escaped with a backslash.  There is no sugar (``+``, ``?``, classes): every
literal byte of the pattern occupies exactly one leaf, and leaves are numbered
1..m in left-to-right order.  That numbering is what a parse of a subject
string reports, so it must be stable.
"""

from __future__ import annotations

from dataclasses import dataclass

METACHARS = frozenset(b"()|*\\")


class PatternSyntaxError(ValueError):
    """Raised for a malformed pattern; carries the byte offset of the fault."""

    def __init__(self, offset: int, reason: str):
        super().__init__(f"at offset {offset}: {reason}")
        self.offset = offset
        self.reason = reason


class Ast:
    """Base class for pattern AST nodes.

    Nodes are immutable and compared by identity (structural comparison is
    ``ast_equal``); identity semantics let them serve as dict keys when an
    automaton annotates its tree.
    """

    __slots__ = ()


@dataclass(frozen=True, eq=False)
class Literal(Ast):
    byte: int
    pos: int  # 1-based index among the pattern's literal leaves


@dataclass(frozen=True, eq=False)
class Epsilon(Ast):
    pass


@dataclass(frozen=True, eq=False)
class Beta(Ast):
    """Sentinel leaf standing for a spliced-out inner subautomaton.

    Never produced by the parser; decomposition builds these.  The beta
    symbol is a real input symbol for the outer half's subproblem.
    """

    beta_id: int


@dataclass(frozen=True, eq=False)
class Pseudo(Ast):
    """Placeholder leaf for a micro-automaton's split-out child.

    Unlike Beta, a pseudo transition never matches any input symbol; it
    only marks where the child's boundary states sit in the parent micro.
    """

    pseudo_id: int


@dataclass(frozen=True, eq=False)
class Concat(Ast):
    left: Ast
    right: Ast


@dataclass(frozen=True, eq=False)
class Union(Ast):
    left: Ast
    right: Ast


@dataclass(frozen=True, eq=False)
class Star(Ast):
    child: Ast


class _Parser:
    def __init__(self, data: bytes):
        self.data = data
        self.i = 0
        self.next_pos = 1

    def parse(self) -> Ast:
        node = self.alt()
        if self.i < len(self.data):
            # alt() only stops early at ')'
            raise PatternSyntaxError(self.i, "unbalanced ')'")
        return node

    def alt(self) -> Ast:
        node = self.cat()
        while self.peek() == 0x7C:  # '|'
            self.i += 1
            node = Union(node, self.cat())
        return node

    def cat(self) -> Ast:
        parts = []
        while True:
            c = self.peek()
            if c is None or c == 0x29 or c == 0x7C:  # ')' '|'
                break
            parts.append(self.rep())
        if not parts:
            return Epsilon()
        node = parts[0]
        for part in parts[1:]:
            node = Concat(node, part)
        return node

    def rep(self) -> Ast:
        node = self.atom()
        while self.peek() == 0x2A:  # '*'
            self.i += 1
            node = Star(node)
        return node

    def atom(self) -> Ast:
        c = self.peek()
        if c is None:
            raise PatternSyntaxError(self.i, "expected an atom")
        if c == 0x28:  # '('
            open_at = self.i
            self.i += 1
            node = self.alt()
            if self.peek() != 0x29:
                raise PatternSyntaxError(open_at, "unbalanced '('")
            self.i += 1
            return node
        if c == 0x2A:  # '*'
            raise PatternSyntaxError(self.i, "'*' with nothing to repeat")
        if c == 0x5C:  # backslash
            if self.i + 1 >= len(self.data):
                raise PatternSyntaxError(self.i, "invalid escape: dangling '\\'")
            byte = self.data[self.i + 1]
            self.i += 2
            return self.literal(byte)
        self.i += 1
        return self.literal(c)

    def literal(self, byte: int) -> Literal:
        node = Literal(byte, self.next_pos)
        self.next_pos += 1
        return node

    def peek(self):
        if self.i >= len(self.data):
            return None
        return self.data[self.i]


def parse_pattern(pattern) -> Ast:
    """Parse a pattern (bytes, or str encoded as UTF-8) into an AST.

    Literal leaves are numbered 1..m left to right.  Raises
    PatternSyntaxError on malformed input.
    """
    if isinstance(pattern, str):
        pattern = pattern.encode("utf-8")
    data = bytes(pattern)
    # The descent parser needs ~4 frames per nesting level; deep patterns
    # ("(((...)))") are legal, so give it room.
    import sys

    old = sys.getrecursionlimit()
    need = 8 * len(data) + 1000
    if need > old:
        sys.setrecursionlimit(need)
    try:
        return _Parser(data).parse()
    finally:
        if need > old:
            sys.setrecursionlimit(old)


def children(ast: Ast) -> tuple:
    if isinstance(ast, (Concat, Union)):
        return (ast.left, ast.right)
    if isinstance(ast, Star):
        return (ast.child,)
    return ()


def walk(ast: Ast):
    """Yield every node, preorder, without recursing (trees can be deep)."""
    stack = [ast]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def unparse(ast: Ast) -> bytes:
    """Render an AST back to pattern syntax, fully parenthesized.

    The output reparses to a structurally identical tree (same shape, same
    literal numbering).
    """
    out = bytearray()
    # (node, emit-stage) work stack; stages insert the surrounding syntax.
    work = [(ast, 0)]
    while work:
        node, stage = work.pop()
        if isinstance(node, Literal):
            if node.byte in METACHARS:
                out.append(0x5C)
            out.append(node.byte)
        elif isinstance(node, Epsilon):
            out += b"()"
        elif isinstance(node, Beta):
            raise ValueError("beta leaves have no concrete syntax")
        elif isinstance(node, Star):
            if stage == 0:
                work.append((node, 1))
                work.append((node.child, 0))
            else:
                out.append(0x2A)  # '*'
        elif stage == 0:  # Concat / Union, opening
            out.append(0x28)
            work.append((node, 1))
            work.append((node.left, 0))
        elif stage == 1:  # between the children
            if isinstance(node, Union):
                out.append(0x7C)
            work.append((node, 2))
            work.append((node.right, 0))
        else:
            out.append(0x29)
    return bytes(out)


def literal_count(ast: Ast) -> int:
    """Number of literal leaves (the m of a pattern)."""
    return sum(1 for node in walk(ast) if isinstance(node, Literal))


def real_node_count(ast: Ast) -> int:
    """Node count excluding pseudo leaves (they own no states of their own)."""
    return sum(1 for node in walk(ast) if not isinstance(node, Pseudo))


def node_count(ast: Ast) -> int:
    """Total node count of the tree."""
    return sum(1 for _ in walk(ast))


def ast_equal(a: Ast, b: Ast) -> bool:
    """Structural equality, including literal positions and beta ids."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if type(x) is not type(y):
            return False
        if isinstance(x, Literal):
            if x.byte != y.byte or x.pos != y.pos:
                return False
        elif isinstance(x, Beta):
            if x.beta_id != y.beta_id:
                return False
        else:
            stack.extend(zip(children(x), children(y)))
    return True
