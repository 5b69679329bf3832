"""Label algebra, union-find quotients, and small backtracking searches."""

from .errors import SizeLimitExceeded


def pair(*parts):
    """Canonical label for a tuple of labels. Deterministic and re-parseable
    as a single GDF token (no whitespace, '.', or '=')."""
    return "(" + ",".join(parts) + ")"


def cls_label(rep):
    """Canonical label for a quotient class: its lexicographically least member."""
    return "{" + rep + "}"


class UnionFind:
    """Union-find over label strings; class representative is the
    lexicographically least member, so quotient output is bit-stable."""

    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def classes(self):
        by_root = {}
        for x in self.parent:
            by_root.setdefault(self.find(x), []).append(x)
        return {min(members): sorted(members) for members in by_root.values()}

    def class_map(self):
        """item -> representative (lexicographic least of its class)."""
        out = {}
        for rep, members in self.classes().items():
            for m in members:
                out[m] = rep
        return out


def search_bijection(xs, ys, candidates, consistent, node_cap=10**6):
    """Backtracking search for a bijection f: xs -> ys.

    candidates(x) yields allowed images; consistent(partial, x, y) may veto an
    assignment given the partial map built so far. Returns a dict or None.
    Raises SizeLimitExceeded after node_cap explored nodes.
    """
    xs = list(xs)
    ys = set(ys)
    if len(xs) != len(ys):
        return None
    assignment = {}
    used = set()
    nodes = 0

    def extend(i):
        nonlocal nodes
        if i == len(xs):
            return True
        x = xs[i]
        for y in candidates(x):
            nodes += 1
            if nodes > node_cap:
                raise SizeLimitExceeded("bijection search nodes", nodes, node_cap)
            if y in used or y not in ys:
                continue
            if not consistent(assignment, x, y):
                continue
            assignment[x] = y
            used.add(y)
            if extend(i + 1):
                return True
            del assignment[x]
            used.discard(y)
        return False

    return dict(assignment) if extend(0) else None
