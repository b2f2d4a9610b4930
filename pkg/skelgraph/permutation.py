r"""
Node relabellings.

A relabelling of ``n`` nodes is stored as an ``array('l')`` ``p`` such that
node ``i`` is renamed ``p[i]``. Partial injective maps use ``-1`` for nodes
without image. These are the correspondences used by graph relabelling and
by the exact graph edit distance.
"""
from __future__ import absolute_import
from six.moves import range

from array import array

from .env import random_state

def perm_check(l, n=None):
    r"""
    Check that ``l`` is a partial injective map of `\{0, 1, ..., n-1\}`
    into itself.

    EXAMPLES::

        >>> from skelgraph.permutation import perm_check
        >>> from array import array

        >>> perm_check(array('l', [1, 0, 3, 2]), 4)
        True
        >>> perm_check(array('l', [-1, 3, -1, 1]), 4)
        True
        >>> perm_check(array('l', [1, 0, 1]))
        False
        >>> perm_check([1, 0])
        False
    """
    if not isinstance(l, array):
        return False
    if n is None:
        n = len(l)
    if len(l) != n:
        return False
    images = [x for x in l if x != -1]
    return all(0 <= x < n for x in images) and len(set(images)) == len(images)

def perm_id(n):
    r"""
    EXAMPLES::

        >>> from skelgraph.permutation import perm_id
        >>> perm_id(4)
        array('l', [0, 1, 2, 3])
    """
    return array('l', range(n))

def perm_init(data):
    r"""
    EXAMPLES::

        >>> from skelgraph.permutation import perm_init
        >>> perm_init([3, 1, None, 0])
        array('l', [3, 1, -1, 0])
        >>> perm_init([])
        array('l')
    """
    return array('l', (-1 if x is None else int(x) for x in data))

def perm_invert(p):
    r"""
    EXAMPLES::

        >>> from skelgraph.permutation import perm_invert
        >>> perm_invert([2, 0, 1])
        array('l', [1, 2, 0])
    """
    q = array('l', [-1] * len(p))
    for i, j in enumerate(p):
        if j != -1:
            q[j] = i
    return q

def perm_compose(p1, p2):
    r"""
    Return the map ``i -> p2[p1[i]]`` (first ``p1`` then ``p2``).

    EXAMPLES::

        >>> from skelgraph.permutation import perm_compose
        >>> perm_compose([1, 2, 0], [1, 2, 0])
        array('l', [2, 0, 1])
    """
    return array('l', (-1 if j == -1 else p2[j] for j in p1))

def perm_random(n, seed=None):
    r"""
    Return a uniformly random permutation of ``n`` nodes.

    EXAMPLES::

        >>> from skelgraph.permutation import perm_random, perm_check
        >>> perm_check(perm_random(13, 0), 13)
        True
        >>> perm_random(5, 1) == perm_random(5, 1)
        True
    """
    rng = random_state(0 if seed is None else seed)
    return array('l', (int(i) for i in rng.permutation(n)))

def partial_injective_maps(n, m):
    r"""
    Iterate through the partial injective maps from `\{0, ..., n-1\}` into
    `\{0, ..., m-1\}`; ``-1`` marks a node without image.

    EXAMPLES::

        >>> from skelgraph.permutation import partial_injective_maps
        >>> sorted(list(p) for p in partial_injective_maps(1, 2))
        [[-1], [0], [1]]
        >>> sum(1 for _ in partial_injective_maps(2, 2))
        7
    """
    used = [False] * m
    cur = array('l', [-1] * n)

    def rec(i):
        if i == n:
            yield array('l', cur)
            return
        cur[i] = -1
        for p in rec(i + 1):
            yield p
        for j in range(m):
            if not used[j]:
                used[j] = True
                cur[i] = j
                for p in rec(i + 1):
                    yield p
                used[j] = False
        cur[i] = -1

    return rec(0)

def edges_relabel(edges, p):
    r"""
    Relabel an undirected edge list by ``p``; edges touching a node without
    image are dropped. The output is sorted with ``i < j`` in each pair.

    EXAMPLES::

        >>> from skelgraph.permutation import edges_relabel
        >>> edges_relabel([(0, 1), (1, 2)], [2, 0, 1])
        [(0, 1), (0, 2)]
        >>> edges_relabel([(0, 1), (1, 2)], [0, -1, 1])
        []
    """
    out = []
    for i, j in edges:
        a = p[i]
        b = p[j]
        if a == -1 or b == -1:
            continue
        out.append((a, b) if a < b else (b, a))
    out.sort()
    return out
