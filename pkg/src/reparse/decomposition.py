"""Splitting an automaton into nested inner/outer subautomata.

The split follows a balanced separator edge of the pattern tree: the
subtree below the edge becomes the inner automaton, and the rest becomes
the outer automaton with the subtree replaced by a single beta-labelled
placeholder edge.  Because every tree node owns exactly two states, both
halves stay within ceil(2k/3) + 8 states of a k-state parent.

Two conditional epsilon edges stitch the halves together:

  * outer gets ``entry -> exit`` of the placeholder when the inner accepts
    the empty string (the placeholder may be skipped);
  * inner gets ``exit -> entry`` when the outer has an epsilon path from
    the placeholder's exit back to its entry (consecutive inner visits may
    then be served by one inner run).

Both are added as single epsilon transitions.  Post-construction edges are
always a single node's (entry, exit) pair in one direction or the other,
which is what lets nested decompositions reassign them to the correct
half later.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import kernel
from .automata import Tnfa, build_tnfa
from .syntax import Ast, Beta, Concat, Star, Union, children, node_count, walk


class TooSmallError(ValueError):
    """Decomposition needs more than two states to split."""


_fallback_beta_ids = itertools.count(1_000_000)


@dataclass
class Decomposition:
    """The two halves plus the bookkeeping to relate them to the parent."""

    inner: Tnfa
    outer: Tnfa
    beta_id: int
    theta_parent: int  # boundary states in the parent's numbering
    phi_parent: int
    theta_outer: int  # the same two states in the outer's numbering
    phi_outer: int
    inner_accepts_eps: bool
    eps_back_path_in_outer: bool
    inner_state_map: list  # inner state -> parent state
    outer_state_map: list  # outer state -> parent state (placeholder
    #                        entry/exit map to the boundary states)

    @property
    def theta_inner(self) -> int:
        return self.inner.theta

    @property
    def phi_inner(self) -> int:
        return self.inner.phi


def subtree_sizes(tree: Ast):
    """Node count per subtree plus preorder numbering, without recursion."""
    preorder = {}
    order = []
    stack = [tree]
    while stack:
        node = stack.pop()
        preorder[node] = len(preorder)
        order.append(node)
        stack.extend(reversed(children(node)))
    sizes = {}
    for node in reversed(order):
        sizes[node] = 1 + sum(sizes[c] for c in children(node))
    return sizes, preorder


def find_separator(tree: Ast) -> Ast:
    """Pick the separator edge, returned as the subtree below it.

    Both sides of the cut have at most 2v/3 + 1 nodes.  Among qualifying
    edges the one minimizing the larger side wins, with the smallest
    preorder index breaking ties, so the choice is deterministic.
    """
    sizes, preorder = subtree_sizes(tree)
    v = sizes[tree]
    if v < 2:
        raise ValueError("cannot split a single-node tree")
    bound = (2 * v) / 3 + 1
    best = None
    best_key = None
    for node, size in sizes.items():
        if node is tree:
            continue
        larger = max(size, v - size)
        if size <= bound and v - size <= bound:
            key = (larger, preorder[node])
            if best_key is None or key < best_key:
                best, best_key = node, key
    assert best is not None, "binary trees always admit a balanced edge"
    return best


def _replace_subtree(tree: Ast, target: Ast, replacement: Ast):
    """Path-copy ``tree`` with ``target`` swapped out.

    Returns the new root and the old->new mapping for the rebuilt
    ancestors; untouched subtrees are shared.
    """
    parent = {}
    for node in walk(tree):
        for c in children(node):
            parent[c] = node
    path = [target]
    while path[-1] is not tree:
        path.append(parent[path[-1]])
    new_for_old = {}
    new_node = replacement
    prev_old = target
    for old in path[1:]:
        if isinstance(old, Concat):
            new_node = Concat(
                new_node if old.left is prev_old else old.left,
                new_node if old.right is prev_old else old.right,
            )
        elif isinstance(old, Union):
            new_node = Union(
                new_node if old.left is prev_old else old.left,
                new_node if old.right is prev_old else old.right,
            )
        elif isinstance(old, Star):
            new_node = Star(new_node)
        else:
            raise AssertionError("separator target must hang off an inner node")
        new_for_old[old] = new_node
        prev_old = old
    return new_node, new_for_old


def _owner_of_state(tnfa: Tnfa):
    owner = {}
    for node, (theta, phi) in tnfa.node_states.items():
        owner[theta] = node
        owner[phi] = node
    return owner


def _eps_reaches(tnfa: Tnfa, src: int, dst: int) -> bool:
    reach = kernel.impl.closure(tnfa.prog(), 1 << src)
    return bool((reach >> dst) & 1)


def decompose(tnfa: Tnfa, tree: Ast = None, *, separator: Ast = None,
              beta_id: int = None) -> Decomposition:
    """Split ``tnfa`` along a separator edge of its tree.

    ``separator`` (a subtree root) overrides the balanced choice; tests
    use that to pin a particular inner part.  Raises TooSmallError for
    automata of two or fewer states.
    """
    if tnfa.k <= 2:
        raise TooSmallError("automaton too small to decompose")
    tree = tree or tnfa.tree
    if tree is None:
        raise ValueError("automaton carries no tree (reversed automata "
                         "cannot be decomposed)")
    if beta_id is None:
        beta_id = next(_fallback_beta_ids)
    u = separator if separator is not None else find_separator(tree)
    assert u is not tree, "separator must be a proper subtree"
    theta_parent, phi_parent = tnfa.node_states[u]

    inner_nodes = set(map(id, walk(u)))
    beta_leaf = Beta(beta_id)
    outer_tree, new_for_old = _replace_subtree(tree, u, beta_leaf)

    inner = build_tnfa(u)
    outer = build_tnfa(outer_tree)

    # State correspondence child -> parent, via the node identity that owns
    # each state pair.
    inner_state_map = [0] * inner.k
    for node, (t, p) in inner.node_states.items():
        pt, pp = tnfa.node_states[node]
        inner_state_map[t] = pt
        inner_state_map[p] = pp
    old_for_new = {id(new): old for old, new in new_for_old.items()}
    old_for_new[id(beta_leaf)] = u
    outer_state_map = [0] * outer.k
    for node, (t, p) in outer.node_states.items():
        old = old_for_new.get(id(node), node)
        pt, pp = tnfa.node_states[old]
        outer_state_map[t] = pt
        outer_state_map[p] = pp
    theta_outer, phi_outer = outer.node_states[beta_leaf]

    # Reassign post-construction epsilon edges of the parent.  Each one is a
    # single node's (entry, exit) pair, so side and direction are readable
    # from the owning node.
    owner = _owner_of_state(tnfa)
    for src, dst in tnfa.extra_eps:
        w = owner[src]
        assert owner[dst] is w, "post-construction edge spans two nodes"
        wt, wp = tnfa.node_states[w]
        backward = src == wp
        if w is u:
            # Boundary pair: the edge lives in the outer half either way.
            if backward:
                outer.add_extra_eps(phi_outer, theta_outer)
            else:
                outer.add_extra_eps(theta_outer, phi_outer)
        elif id(w) in inner_nodes:
            it, ip = inner.node_states[w]
            inner.add_extra_eps(ip if backward else it, it if backward else ip)
        else:
            new_w = new_for_old.get(w, w)
            ot, op = outer.node_states[new_w]
            outer.add_extra_eps(op if backward else ot, ot if backward else op)

    # Conditional stitching edges; the eps-acceptance test runs on the raw
    # inner, the back-path test on the raw outer (the bypass edge points the
    # wrong way to create one).
    from .automata import accepts

    inner_accepts_eps = accepts(inner, b"")
    eps_back_path = _eps_reaches(outer, phi_outer, theta_outer)
    if inner_accepts_eps:
        outer.add_extra_eps(theta_outer, phi_outer)
    if eps_back_path:
        inner.add_extra_eps(inner.phi, inner.theta)

    bound = -(-2 * tnfa.k // 3) + 8  # ceil(2k/3) + 8
    assert inner.k <= bound, f"inner half too large: {inner.k} > {bound}"
    assert outer.k <= bound, f"outer half too large: {outer.k} > {bound}"

    return Decomposition(
        inner=inner,
        outer=outer,
        beta_id=beta_id,
        theta_parent=theta_parent,
        phi_parent=phi_parent,
        theta_outer=theta_outer,
        phi_outer=phi_outer,
        inner_accepts_eps=inner_accepts_eps,
        eps_back_path_in_outer=eps_back_path,
        inner_state_map=inner_state_map,
        outer_state_map=outer_state_map,
    )
