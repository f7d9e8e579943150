"""Implicit binary search tree over a contiguous range of arm indices.

A node is a triple (L, M, R) with M the floor midpoint; leaves are the nodes
with R == L + 1. Nodes are computed on demand, the tree is never stored.
"""
from __future__ import annotations

from typing import NamedTuple, Optional, Tuple

from .core import DegenerateProblem


class TreeNode(NamedTuple):
    L: int
    M: int
    R: int


def span_root(lo: int, hi: int) -> TreeNode:
    """Root of the tree over arms lo..hi (needs at least two arms)."""
    if hi - lo < 1:
        raise DegenerateProblem(f"tree needs at least two arms, got {lo}..{hi}")
    return TreeNode(lo, (lo + hi) // 2, hi)


def root_node(K: int) -> TreeNode:
    return span_root(1, K)


def is_leaf(v: TreeNode) -> bool:
    return v.R == v.L + 1


def children(v: TreeNode) -> Tuple[Optional[TreeNode], Optional[TreeNode]]:
    if is_leaf(v):
        return None, None
    left = TreeNode(v.L, (v.L + v.M) // 2, v.M)
    right = TreeNode(v.M, (v.M + v.R) // 2, v.R)
    return left, right


def depth_bound(n_arms: int) -> int:
    """Maximum depth of a root-derived path, floor(log2 n) + 1."""
    return n_arms.bit_length()
