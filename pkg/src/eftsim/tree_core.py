"""Family Trees, finite networks and canonical codes.

A Family Tree (FT) is a directed tree in which every vertex has at most one
out-neighbour, its *parent*.  The objects of interest are usually infinite,
so a sampled tree is a finite *window*: vertices whose neighbourhood was cut
by truncation are flagged in ``boundary`` and ``valid_radius`` records the
largest radius around the root that the window reproduces exactly.

Generations
-----------
Every vertex carries an integer ``level``; children sit one level above
their parent (larger level = younger).  The generation offset used
throughout the package is

    generation_offset(v, w) = level[v] - level[w],

so an ancestor ``w`` of ``v`` has a *positive* offset from ``v``.  It is
antisymmetric and satisfies the cocycle identity by construction.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

INF_RADIUS = 1 << 30
MARK_SCALE = float(1 << 32)


class TruncationError(ValueError):
    """A statistic tried to read outside the exactly sampled window."""


class Generation(NamedTuple):
    vertices: np.ndarray
    complete: bool


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def child_csr(parent: np.ndarray, rank: np.ndarray):
    """Children lists in compressed form, each list sorted by rank."""
    n = len(parent)
    kids = np.flatnonzero(parent >= 0)
    order = np.lexsort((rank[kids], parent[kids]))
    idx = kids[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(parent[kids], minlength=n), out=ptr[1:])
    return ptr, idx


def expand(ptr, idx, frontier):
    """Children of every vertex in ``frontier``, with the frontier position of the owner."""
    starts = ptr[frontier]
    counts = ptr[frontier + 1] - starts
    owner = np.repeat(np.arange(len(frontier)), counts)
    offs = np.arange(owner.size) - np.repeat(np.cumsum(counts) - counts, counts)
    return idx[starts[owner] + offs], owner


def default_rank(parent: np.ndarray) -> np.ndarray:
    """Rank = order of appearance among siblings."""
    rank = np.zeros(len(parent), dtype=np.int64)
    kids = np.flatnonzero(parent >= 0)
    order = np.argsort(parent[kids], kind="stable")
    sorted_kids = kids[order]
    p = parent[sorted_kids]
    first = np.r_[True, p[1:] != p[:-1]]
    start = np.maximum.accumulate(np.where(first, np.arange(len(p)), 0))
    rank[sorted_kids] = np.arange(len(p)) - start
    return rank


def quantize_marks(marks) -> np.ndarray:
    return np.round(np.asarray(marks, dtype=float) * MARK_SCALE).astype(np.int64)


def _labels(vtype, marks):
    if vtype is None and marks is None:
        return None
    n = len(vtype) if vtype is not None else len(marks)
    q = quantize_marks(marks) if marks is not None else None
    out = []
    for i in range(n):
        parts = []
        if vtype is not None:
            parts.append(f"t{int(vtype[i])}")
        if q is not None:
            parts.append(f"m{int(q[i])}")
        out.append(("<" + ",".join(parts) + ">").encode())
    return out


def ball_code(parent, ptr, idx, boundary, labels, v: int, radius: int,
              ordered: bool = False) -> bytes:
    """Canonical code of the radius-``radius`` ball around ``v``.

    The ball is encoded as a tree rooted at ``v`` whose edges remember their
    direction: ``^`` introduces the parent of a vertex, the remaining
    sub-codes are its children.  In ordered mode the child we arrived from
    is written as ``*`` at its position; in unordered mode sibling codes are
    sorted.  Raises :class:`TruncationError` when the ball is not fully
    inside the window.
    """
    recs = []
    stack = [(int(v), -1, 0)]
    while stack:
        u, came, d = stack.pop()
        if d < radius:
            if boundary[u]:
                raise TruncationError(f"vertex {u} at distance {d} < {radius} is on the boundary")
            p = int(parent[u])
            up = p if (p >= 0 and p != came) else -1
            kids = idx[ptr[u]:ptr[u + 1]].tolist()
            recs.append((u, came, up, kids))
            if up >= 0:
                stack.append((up, u, d + 1))
            for c in kids:
                if c != came:
                    stack.append((c, u, d + 1))
        else:
            recs.append((u, came, -1, None))
    codes = {}
    for u, came, up, kids in reversed(recs):
        out = [b"("]
        if labels is not None:
            out.append(labels[u])
        if up >= 0:
            out.append(b"^")
            out.append(codes.pop(up))
        if kids:
            if ordered:
                out.extend(b"*" if c == came else codes.pop(c) for c in kids)
            else:
                out.extend(sorted(codes.pop(c) for c in kids if c != came))
        out.append(b")")
        codes[u] = b"".join(out)
    return codes[int(v)]


def parse_code(code: bytes) -> "FamilyTree":
    """Rebuild a finite Family Tree from a full (infinite-radius) code."""
    s = code.decode() if isinstance(code, (bytes, bytearray)) else code
    parent, rank, vt, mk = [], [], [], []
    pos = 0

    def node(came):
        nonlocal pos
        if s[pos] != "(":
            raise ValueError(f"bad code at {pos}")
        pos += 1
        u = len(parent)
        parent.append(-1)
        rank.append(None)
        vt.append(None)
        mk.append(None)
        if s[pos] == "<":
            end = s.index(">", pos)
            for part in s[pos + 1:end].split(","):
                if part[0] == "t":
                    vt[u] = int(part[1:])
                elif part[0] == "m":
                    mk[u] = int(part[1:]) / MARK_SCALE
            pos = end + 1
        if s[pos] == "^":
            pos += 1
            parent[u] = node(u)
        k = 0
        while s[pos] != ")":
            if s[pos] == "*":
                pos += 1
                rank[came] = k
            else:
                c = node(None)
                parent[c] = u
                rank[c] = k
            k += 1
        if came is not None and rank[came] is None:
            rank[came] = k
        pos += 1
        return u

    node(None)
    if pos != len(s):
        raise ValueError("trailing characters in code")
    rank = [0 if r is None else r for r in rank]
    vtype = np.array(vt, dtype=np.int64) if all(t is not None for t in vt) else None
    marks = np.array(mk, dtype=float) if all(m is not None for m in mk) else None
    return FamilyTree(np.array(parent, dtype=np.int64), 0, rank=np.array(rank, dtype=np.int64),
                      vtype=vtype, marks=marks)


def _levels_from_tops(parent, ptr, idx):
    n = len(parent)
    level = np.full(n, np.iinfo(np.int64).min, dtype=np.int64)
    frontier = np.flatnonzero(parent < 0)
    level[frontier] = 0
    seen = len(frontier)
    depth = 0
    while frontier.size:
        depth += 1
        frontier, _ = expand(ptr, idx, frontier)
        level[frontier] = depth
        seen += len(frontier)
        if seen > n:
            raise ValueError("parent pointers contain a cycle")
    if seen != n:
        raise ValueError("parent pointers contain a cycle")
    return level


def _bfs_dist(parent, ptr, idx, sources, cap=INF_RADIUS):
    n = len(parent)
    dist = np.full(n, -1, dtype=np.int64)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    dist[frontier] = 0
    d = 0
    while frontier.size and d < cap:
        d += 1
        up = parent[frontier]
        down, _ = expand(ptr, idx, frontier)
        nb = np.concatenate([up[up >= 0], down])
        nb = np.unique(nb[dist[nb] < 0])
        dist[nb] = d
        frontier = nb
    return dist


class FamilyTree:
    """Immutable rooted Family Tree (or a finite window of one).

    Parameters
    ----------
    parent : array of int
        Parent id per vertex, ``-1`` for the parentless vertex.
    root : int
        The root vertex ``o``.
    rank : array of int, optional
        Position of each vertex among its siblings.  Defaults to the order
        of appearance.
    boundary : array of bool, optional
        Vertices whose children or parent were cut by truncation.
    vtype, marks : arrays, optional
        Integer type labels and real marks.
    """

    __slots__ = ("parent", "rank", "root", "boundary", "vtype", "marks",
                 "ptr", "idx", "level", "_dist")

    def __init__(self, parent, root: int = 0, *, rank=None, boundary=None,
                 vtype=None, marks=None):
        parent = np.asarray(parent, dtype=np.int64)
        n = len(parent)
        if n == 0:
            raise ValueError("a tree needs at least one vertex")
        if not 0 <= root < n:
            raise ValueError("root out of range")
        if np.any(parent >= n) or np.any(parent < -1):
            raise ValueError("parent id out of range")
        if np.count_nonzero(parent < 0) != 1:
            raise ValueError("a connected Family Tree has exactly one parentless vertex")
        rank = default_rank(parent) if rank is None else np.asarray(rank, dtype=np.int64)
        boundary = np.zeros(n, dtype=bool) if boundary is None else np.asarray(boundary, dtype=bool)
        self.parent = _readonly(parent)
        self.rank = _readonly(rank)
        self.root = int(root)
        self.boundary = _readonly(boundary)
        self.vtype = None if vtype is None else _readonly(np.asarray(vtype, dtype=np.int64))
        self.marks = None if marks is None else _readonly(np.asarray(marks, dtype=float))
        ptr, idx = child_csr(parent, rank)
        self.ptr, self.idx = _readonly(ptr), _readonly(idx)
        level = _levels_from_tops(parent, ptr, idx)
        self.level = _readonly(level - level[root])
        self._dist = None

    # basic accessors
    @property
    def n(self) -> int:
        return len(self.parent)

    def __len__(self) -> int:
        return len(self.parent)

    def __repr__(self) -> str:
        vr = self.valid_radius
        return f"FamilyTree(n={self.n}, root={self.root}, valid_radius={'inf' if vr >= INF_RADIUS else vr})"

    @property
    def top(self) -> int:
        return int(np.flatnonzero(self.parent < 0)[0])

    @property
    def d1(self) -> np.ndarray:
        return np.diff(self.ptr)

    def children(self, v: int) -> np.ndarray:
        return self.idx[self.ptr[v]:self.ptr[v + 1]]

    @property
    def dist(self) -> np.ndarray:
        """Graph distance from the root."""
        if self._dist is None:
            self._dist = _readonly(_bfs_dist(self.parent, self.ptr, self.idx, [self.root]))
        return self._dist

    @property
    def valid_radius(self) -> int:
        if not self.boundary.any():
            return INF_RADIUS
        return int(self.dist[self.boundary].min())

    # generations
    def generation_offset(self, v: int, w: int) -> int:
        return int(self.level[v] - self.level[w])

    def ancestor(self, v: int, n: int) -> int:
        """``F^n(v)``, or -1 when it is not in the window."""
        for _ in range(n):
            v = int(self.parent[v])
            if v < 0:
                return -1
        return v

    def descendants_n(self, v: int, n: int) -> Generation:
        if n < 0:
            raise ValueError("n must be non-negative")
        frontier = np.array([v], dtype=np.int64)
        complete = True
        for _ in range(n):
            if self.boundary[frontier].any():
                complete = False
            frontier, _ = expand(self.ptr, self.idx, frontier)
        return Generation(np.sort(frontier), complete)

    def generation_members(self, o: int, n: int) -> Generation:
        """``L_n(o) = F^{-n}(F^n(o))``."""
        a = o
        for _ in range(n):
            p = int(self.parent[a])
            if p < 0:
                if self.boundary[a]:
                    return Generation(np.empty(0, dtype=np.int64), False)
                raise ValueError(f"F^{n}(o) does not exist: vertex {a} has no parent")
            a = p
        return self.descendants_n(a, n)

    def ball(self, v: int, r: int) -> np.ndarray:
        d = _bfs_dist(self.parent, self.ptr, self.idx, [v], cap=r)
        return np.flatnonzero(d >= 0)

    # transformations
    def reroot(self, v: int) -> "FamilyTree":
        return FamilyTree(self.parent, v, rank=self.rank, boundary=self.boundary,
                          vtype=self.vtype, marks=self.marks)

    def relabel(self, perm) -> "FamilyTree":
        """Vertex ``v`` becomes ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        par = self.parent[inv]
        par = np.where(par >= 0, perm[np.maximum(par, 0)], -1)
        return FamilyTree(par, int(perm[self.root]), rank=self.rank[inv],
                          boundary=self.boundary[inv],
                          vtype=None if self.vtype is None else self.vtype[inv],
                          marks=None if self.marks is None else self.marks[inv])

    def restrict(self, keep) -> "FamilyTree":
        """Induced sub-tree on ``keep`` (must contain the root and be connected)."""
        keep = np.asarray(keep, dtype=bool)
        if not keep[self.root]:
            raise ValueError("restriction must keep the root")
        new_id = np.cumsum(keep) - 1
        old = np.flatnonzero(keep)
        par = self.parent[old]
        ok = par >= 0
        ok[ok] = keep[par[ok]]
        par = np.where(ok, new_id[np.maximum(par, 0)], -1)
        return FamilyTree(par, int(new_id[self.root]), rank=self.rank[old],
                          boundary=self.boundary[old],
                          vtype=None if self.vtype is None else self.vtype[old],
                          marks=None if self.marks is None else self.marks[old])

    def with_boundary(self, boundary) -> "FamilyTree":
        return FamilyTree(self.parent, self.root, rank=self.rank, boundary=boundary,
                          vtype=self.vtype, marks=self.marks)

    # codes and serialization
    def canonicalize(self, radius: int | None = None, ordered: bool = False,
                     at: int | None = None, labelled: bool = True) -> bytes:
        r = INF_RADIUS if radius is None else radius
        labels = _labels(self.vtype, self.marks) if labelled else None
        return ball_code(self.parent, self.ptr, self.idx, self.boundary, labels,
                         self.root if at is None else at, r, ordered)

    def to_text(self) -> str:
        vr = self.valid_radius
        lines = [f"# root={self.root} valid_radius={'inf' if vr >= INF_RADIUS else vr} n={self.n}"]
        for v in range(self.n):
            t = "-" if self.vtype is None else str(int(self.vtype[v]))
            line = f"{v} {int(self.parent[v])} {t} {int(self.boundary[v])} {int(self.rank[v])}"
            if self.marks is not None:
                line += f" {float(self.marks[v])!r}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FamilyTree":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        head = dict(kv.split("=") for kv in rows[0][1:])
        body = rows[1:]
        parent = [int(r[1]) for r in body]
        vtype = None if body[0][2] == "-" else [int(r[2]) for r in body]
        marks = [float(r[5]) for r in body] if len(body[0]) > 5 else None
        return cls(parent, int(head["root"]), rank=[int(r[4]) for r in body],
                   boundary=[r[3] == "1" for r in body], vtype=vtype, marks=marks)

    def to_network(self) -> "Network":
        """Undirected view; the half-edge mark is 1 on the child side, 0 on the parent side."""
        kids = np.flatnonzero(self.parent >= 0)
        edges = np.stack([kids, self.parent[kids]], axis=1)
        hm = np.tile([1.0, 0.0], (len(kids), 1))
        vm = self.marks if self.marks is not None else None
        return Network(self.n, edges, vmarks=vm, hmarks=hm)


def generation_offset(tree: FamilyTree, v: int, w: int) -> int:
    """Number of generations from ``v`` up to ``w`` (positive when ``w`` is an ancestor)."""
    return tree.generation_offset(v, w)


def descendants_n(tree: FamilyTree, v: int, n: int) -> Generation:
    """``D_n(v)``; ``complete`` is False when truncation may have hidden descendants."""
    return tree.descendants_n(v, n)


def generation_members(tree: FamilyTree, o: int, n: int) -> Generation:
    return tree.generation_members(o, n)


def canonicalize(tree: FamilyTree, radius: int | None = None, ordered: bool = False) -> bytes:
    return tree.canonicalize(radius, ordered)


class TreeBatch:
    """Many Family Tree windows packed into shared arrays.

    Tree ``b`` owns the global vertex ids ``tree_ptr[b]:tree_ptr[b+1]``.
    ``level`` may carry an arbitrary offset per tree; only differences
    inside one tree are meaningful.
    """

    def __init__(self, parent, tree_ptr, roots, *, rank=None, boundary=None,
                 vtype=None, marks=None, level=None):
        self.parent = np.asarray(parent, dtype=np.int64)
        self.tree_ptr = np.asarray(tree_ptr, dtype=np.int64)
        self.roots = np.asarray(roots, dtype=np.int64)
        n = len(self.parent)
        self.rank = default_rank(self.parent) if rank is None else np.asarray(rank, dtype=np.int64)
        self.boundary = np.zeros(n, dtype=bool) if boundary is None else np.asarray(boundary, dtype=bool)
        self.vtype = None if vtype is None else np.asarray(vtype, dtype=np.int64)
        self.marks = None if marks is None else np.asarray(marks, dtype=float)
        self._level = None if level is None else np.asarray(level, dtype=np.int64)
        self._csr = None
        self._dist = None
        if len(self.roots) != len(self.tree_ptr) - 1:
            raise ValueError("one root per tree required")

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.tree_ptr)

    @property
    def tree_of(self) -> np.ndarray:
        return np.repeat(np.arange(len(self)), self.sizes)

    @property
    def ptr(self):
        if self._csr is None:
            self._csr = child_csr(self.parent, self.rank)
        return self._csr[0]

    @property
    def idx(self):
        if self._csr is None:
            self._csr = child_csr(self.parent, self.rank)
        return self._csr[1]

    @property
    def d1(self) -> np.ndarray:
        return np.diff(self.ptr)

    def children(self, v: int) -> np.ndarray:
        return self.idx[self.ptr[v]:self.ptr[v + 1]]

    @property
    def level(self) -> np.ndarray:
        if self._level is None:
            self._level = _levels_from_tops(self.parent, self.ptr, self.idx)
        return self._level

    @property
    def dist(self) -> np.ndarray:
        """Distance of every vertex from the root of its tree."""
        if self._dist is None:
            self._dist = _bfs_dist(self.parent, self.ptr, self.idx, self.roots)
        return self._dist

    @property
    def valid_radius(self) -> np.ndarray:
        vals = np.where(self.boundary, self.dist, INF_RADIUS)
        return np.minimum.reduceat(vals, self.tree_ptr[:-1])

    def require_radius(self, r: int) -> None:
        if len(self) and self.valid_radius.min() < r:
            bad = int(np.argmin(self.valid_radius))
            raise TruncationError(
                f"statistic needs radius {r} but tree {bad} is exact only to radius "
                f"{int(self.valid_radius[bad])}")

    def __getitem__(self, b: int) -> FamilyTree:
        lo, hi = self.tree_ptr[b], self.tree_ptr[b + 1]
        par = self.parent[lo:hi]
        par = np.where(par >= 0, par - lo, -1)
        return FamilyTree(par, int(self.roots[b] - lo), rank=self.rank[lo:hi],
                          boundary=self.boundary[lo:hi],
                          vtype=None if self.vtype is None else self.vtype[lo:hi],
                          marks=None if self.marks is None else self.marks[lo:hi])

    def __iter__(self):
        for b in range(len(self)):
            yield self[b]

    @classmethod
    def from_trees(cls, trees: Sequence[FamilyTree]) -> "TreeBatch":
        sizes = np.array([t.n for t in trees], dtype=np.int64)
        tree_ptr = np.r_[0, np.cumsum(sizes)]
        offs = tree_ptr[:-1]
        parent = np.concatenate([np.where(t.parent >= 0, t.parent + o, -1) for t, o in zip(trees, offs)])
        has_t = all(t.vtype is not None for t in trees)
        has_m = all(t.marks is not None for t in trees)
        return cls(parent, tree_ptr, np.array([t.root for t in trees]) + offs,
                   rank=np.concatenate([t.rank for t in trees]),
                   boundary=np.concatenate([t.boundary for t in trees]),
                   vtype=np.concatenate([t.vtype for t in trees]) if has_t else None,
                   marks=np.concatenate([t.marks for t in trees]) if has_m else None,
                   level=np.concatenate([t.level for t in trees]))

    @classmethod
    def concatenate(cls, batches: Sequence["TreeBatch"]) -> "TreeBatch":
        batches = [b for b in batches if len(b)]
        if not batches:
            raise ValueError("nothing to concatenate")
        offs = np.cumsum([0] + [b.n_vertices for b in batches[:-1]])
        parent = np.concatenate([np.where(b.parent >= 0, b.parent + o, -1) for b, o in zip(batches, offs)])
        tree_ptr = np.concatenate([[0]] + [b.tree_ptr[1:] + o for b, o in zip(batches, offs)])
        has_t = all(b.vtype is not None for b in batches)
        has_m = all(b.marks is not None for b in batches)
        return cls(parent, tree_ptr, np.concatenate([b.roots + o for b, o in zip(batches, offs)]),
                   rank=np.concatenate([b.rank for b in batches]),
                   boundary=np.concatenate([b.boundary for b in batches]),
                   vtype=np.concatenate([b.vtype for b in batches]) if has_t else None,
                   marks=np.concatenate([b.marks for b in batches]) if has_m else None,
                   level=np.concatenate([b.level for b in batches]))

    def reroot(self, new_roots) -> "TreeBatch":
        new_roots = np.asarray(new_roots, dtype=np.int64)
        if np.any(self.tree_of[new_roots] != np.arange(len(self))):
            raise ValueError("each new root must lie in its own tree")
        out = TreeBatch(self.parent, self.tree_ptr, new_roots, rank=self.rank,
                        boundary=self.boundary, vtype=self.vtype, marks=self.marks,
                        level=self._level)
        out._csr = self._csr
        return out

    def take(self, which) -> "TreeBatch":
        """Copy out trees ``which`` (repeats allowed), in that order."""
        which = np.asarray(which, dtype=np.int64)
        lo = self.tree_ptr[which]
        sizes = self.tree_ptr[which + 1] - lo
        new_ptr = np.r_[0, np.cumsum(sizes)]
        owner = np.repeat(np.arange(len(which)), sizes)
        old = lo[owner] + np.arange(new_ptr[-1]) - new_ptr[:-1][owner]
        shift = new_ptr[:-1] - lo
        par = self.parent[old]
        par = np.where(par >= 0, par + shift[owner], -1)
        return TreeBatch(par, new_ptr, self.roots[which] + shift,
                         rank=self.rank[old], boundary=self.boundary[old],
                         vtype=None if self.vtype is None else self.vtype[old],
                         marks=None if self.marks is None else self.marks[old],
                         level=self.level[old])

    def restrict(self, keep) -> "TreeBatch":
        """Keep vertices ``keep`` in every tree; kept parts must stay connected."""
        keep = np.asarray(keep, dtype=bool)
        if not keep[self.roots].all():
            raise ValueError("restriction must keep every root")
        new_id = np.cumsum(keep) - 1
        old = np.flatnonzero(keep)
        par = self.parent[old]
        ok = par >= 0
        ok[ok] = keep[par[ok]]
        par = np.where(ok, new_id[np.maximum(par, 0)], -1)
        counts = np.add.reduceat(keep.astype(np.int64), self.tree_ptr[:-1])
        return TreeBatch(par, np.r_[0, np.cumsum(counts)], new_id[self.roots],
                         rank=self.rank[old], boundary=self.boundary[old],
                         vtype=None if self.vtype is None else self.vtype[old],
                         marks=None if self.marks is None else self.marks[old],
                         level=self.level[old])

    # vectorised generation statistics
    def ancestors(self, n: int, v=None):
        """``F^n(v)`` per start vertex (default: roots).

        Returns ``(anc, cut)``: ``anc`` is -1 where the ancestor is missing,
        ``cut`` flags those misses caused by truncation rather than by a
        genuine top.
        """
        a = self.roots.copy() if v is None else np.asarray(v, dtype=np.int64).copy()
        cut = np.zeros(len(a), dtype=bool)
        for _ in range(n):
            alive = a >= 0
            p = np.full(len(a), -1, dtype=np.int64)
            p[alive] = self.parent[a[alive]]
            newly = alive & (p < 0)
            cut[newly] = self.boundary[a[newly]]
            a = p
        return a, cut

    def descendants(self, n: int, v=None):
        """Flattened ``D_n`` per start vertex: ``(vertices, owner, complete)``."""
        start = self.roots if v is None else np.asarray(v, dtype=np.int64)
        frontier = start.copy()
        owner = np.arange(len(start))
        complete = np.ones(len(start), dtype=bool)
        for _ in range(n):
            hit = self.boundary[frontier]
            complete[owner[hit]] = False
            frontier, pos = expand(self.ptr, self.idx, frontier)
            owner = owner[pos]
        return frontier, owner, complete

    def descendant_counts(self, n: int, v=None):
        if n == 1:
            start = self.roots if v is None else np.asarray(v, dtype=np.int64)
            return self.d1[start], ~self.boundary[start]
        verts, owner, complete = self.descendants(n, v)
        size = len(self.roots) if v is None else len(v)
        return np.bincount(owner, minlength=size), complete

    def codes(self, radius: int, ordered: bool = False, labelled: bool = True) -> list[bytes]:
        labels = _labels(self.vtype, self.marks) if labelled else None
        return [ball_code(self.parent, self.ptr, self.idx, self.boundary, labels, int(r),
                          radius, ordered) for r in self.roots]


class Network:
    """Finite multigraph with vertex marks and half-edge marks.

    Parameters
    ----------
    n : int
        Number of vertices ``0..n-1``.
    edges : array of shape (E, 2)
        Undirected edges; loops and parallel edges are allowed.
    vmarks : array, optional
        One real mark per vertex.
    hmarks : array of shape (E, 2), optional
        Half-edge marks; ``hmarks[e, 0]`` sits at ``edges[e, 0]``.
    """

    def __init__(self, n: int, edges, vmarks=None, hmarks=None, allow_disconnected=False):
        self.n = int(n)
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= n):
            raise ValueError("edge endpoint out of range")
        self.vmarks = None if vmarks is None else np.asarray(vmarks, dtype=float)
        self.hmarks = None if hmarks is None else np.asarray(hmarks, dtype=float).reshape(-1, 2)
        adj = [[] for _ in range(self.n)]
        for e, (a, b) in enumerate(self.edges.tolist()):
            adj[a].append((b, e, 0))
            if a != b:
                adj[b].append((a, e, 1))
        self.adj = adj
        self.connected = self._is_connected()
        if not self.connected and not allow_disconnected:
            raise ValueError("network is not connected; pass allow_disconnected=True")

    def _is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w, _, _ in self.adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def neighbors(self, v: int) -> list[int]:
        return [w for w, _, _ in self.adj[v]]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def half_mark(self, e: int, side: int) -> float:
        return 0.0 if self.hmarks is None else float(self.hmarks[e, side])

    def relabel(self, perm) -> "Network":
        """Vertex ``v`` becomes ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return Network(self.n, perm[self.edges],
                       vmarks=None if self.vmarks is None else self.vmarks[inv],
                       hmarks=self.hmarks, allow_disconnected=True)

    def to_networkx(self):
        import networkx as nx

        g = nx.MultiGraph()
        for v in range(self.n):
            g.add_node(v, mark=None if self.vmarks is None else int(quantize_marks(self.vmarks[v])))
        for e, (a, b) in enumerate(self.edges.tolist()):
            key = (a, b) if a <= b else (b, a)
            hm = (self.half_mark(e, 0), self.half_mark(e, 1))
            if a > b:
                hm = hm[::-1]
            g.add_edge(*key, hm=tuple(int(x) for x in quantize_marks(hm)))
        return g
