"""Vertex-shifts on finite networks and the foliation of their f-graphs.

A vertex-shift sends every vertex to a vertex, using only the structure
and marks of the network, so that relabelling the vertices commutes with
it.  Iterating a shift on a finite network gives a functional digraph whose
components each carry one cycle; the foils are the classes of
``x ~ y  iff  f^n(x) = f^n(y)`` for some ``n``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .parallel import as_generator
from .tree_core import FamilyTree, Network


@dataclass(frozen=True)
class VertexShift:
    """A named map ``(G, v) -> vertex``; returns -1 where the window cannot decide."""

    name: str
    apply: Callable

    def __call__(self, G, v: int) -> int:
        return int(self.apply(G, v))

    def image(self, G) -> np.ndarray:
        return np.array([self(G, v) for v in range(G.n)], dtype=np.int64)


def _identity(G, v):
    return v


def _parent(G, v):
    p = int(G.parent[v])
    return v if p < 0 else p


def _smallest_mark(G, v):
    nbrs = sorted({w for w, _, _ in G.adj[v] if w != v})
    if not nbrs:
        return v
    marks = G.vmarks[nbrs]
    lo = marks.min()
    hits = [w for w, mk in zip(nbrs, marks) if mk == lo]
    return hits[0] if len(hits) == 1 else v


def _smallest_edge_mark(G, v):
    if not G.adj[v]:
        return v
    marks = [G.half_mark(e, side) for _, e, side in G.adj[v]]
    lo = min(marks)
    hits = [w for (w, _, _), mk in zip(G.adj[v], marks) if mk == lo]
    return hits[0] if len(hits) == 1 else v


IDENTITY = VertexShift("identity", _identity)
PARENT = VertexShift("parent", _parent)
SMALLEST_MARK = VertexShift("smallest_mark_neighbor", _smallest_mark)
SMALLEST_EDGE_MARK = VertexShift("smallest_edge_mark_neighbor", _smallest_edge_mark)


def degree_increase(h: Callable | None = None) -> VertexShift:
    """Closest vertex with a larger value of ``h`` (default: degree); ties by smallest mark."""
    h = h or (lambda G, v: G.degree(v))

    def apply(G, v):
        hv = h(G, v)
        seen = {v}
        frontier = [v]
        while frontier:
            nxt = []
            for u in frontier:
                for w, _, _ in G.adj[u]:
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            better = [w for w in nxt if h(G, w) > hv]
            if better:
                marks = [float(G.vmarks[w]) for w in better]
                if len(set(marks)) != len(marks):
                    raise ValueError("degree-increase shift needs distinct vertex marks")
                return better[int(np.argmin(marks))]
            frontier = nxt
        return v

    return VertexShift("degree_increase", apply)


def _first_leaf(G, v):
    while True:
        if G.boundary[v]:
            return -1
        kids = G.children(v)
        if len(kids) == 0:
            return v
        v = int(kids[0])


def _royal(G, v, cyclic):
    p = int(G.parent[v])
    if p < 0:
        if G.boundary[v]:
            return -1
        return _first_leaf(G, v) if cyclic else -1
    if G.boundary[p]:
        return -1
    sib = G.children(p)
    k = int(np.flatnonzero(sib == v)[0])
    if k == len(sib) - 1:
        return p
    return _first_leaf(G, int(sib[k + 1]))


def royal_successor(tree: FamilyTree | None = None, cyclic: bool = False) -> VertexShift:
    """Successor in the post-order induced by the distinguished end.

    Children are visited in rank order and a subtree is finished before the
    next sibling, so a last child is followed by its parent and any other
    vertex by the first leaf below its next sibling.  Vertices whose
    successor is not determined by the window map to -1.  With ``cyclic``
    the top of a finite tree wraps to the first vertex, making the shift a
    cyclic permutation.
    """
    return VertexShift("royal_successor" + ("_cyclic" if cyclic else ""),
                       lambda G, v: _royal(G, v, cyclic))


@dataclass(frozen=True)
class FGraph:
    """Functional digraph ``x -> image[x]``."""

    image: np.ndarray

    @property
    def n(self) -> int:
        return len(self.image)

    @property
    def edges(self) -> np.ndarray:
        return np.stack([np.arange(self.n), self.image], axis=1)

    def power(self, k: int) -> np.ndarray:
        out = np.arange(self.n)
        base = self.image.copy()
        while k:
            if k & 1:
                out = base[out]
            base = base[base]
            k >>= 1
        return out


def build_f_graph(net, f: VertexShift) -> FGraph:
    img = f.image(net)
    if np.any(img < 0) or np.any(img >= net.n):
        raise ValueError(f"shift {f.name} is undefined on some vertex of this window")
    return FGraph(img)


def random_functional_graph(n: int, seed=None) -> FGraph:
    rng = as_generator(seed)
    return FGraph(rng.integers(0, n, n))


@dataclass
class ComponentFoliation:
    component_id: int
    vertices: np.ndarray
    cycles: list
    foils: list
    f_inf: np.ndarray

    @property
    def cycle(self) -> list:
        return self.cycles[0] if self.cycles else []

    @property
    def size(self) -> int:
        return len(self.vertices)

    def checks(self) -> dict:
        cyc = set(self.cycle)
        return {
            "one_cycle": len(self.cycles) == 1,
            "foils_eq_cycle_len": len(self.foils) == len(self.cycle),
            "foil_meets_cycle_once": all(len(cyc.intersection(f.tolist())) == 1 for f in self.foils),
            "f_inf_eq_cycle": set(self.f_inf.tolist()) == cyc,
            "foils_partition": sorted(np.concatenate(self.foils).tolist()) == sorted(self.vertices.tolist()),
        }


@dataclass
class FoliationResult:
    components: list = field(default_factory=list)

    def all_ok(self) -> bool:
        return all(all(c.checks().values()) for c in self.components)

    def foil_of(self) -> dict:
        out = {}
        for c in self.components:
            for i, f in enumerate(c.foils):
                for v in f.tolist():
                    out[v] = (c.component_id, i)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component_id", "size", "cycle_len", "n_foils", "foil_sizes"])
        for c in self.components:
            w.writerow([c.component_id, c.size, len(c.cycle), len(c.foils),
                        ";".join(str(len(f)) for f in c.foils)])
        return buf.getvalue()


def compute_foliation(fg: FGraph) -> FoliationResult:
    """Components, cycles, foils and ``f^inf`` of a finite functional graph."""
    n = fg.n
    img = fg.image
    adj = coo_matrix((np.ones(n), (np.arange(n), img)), shape=(n, n))
    n_comp, comp = connected_components(adj, directed=True, connection="weak")
    key = fg.power(n)
    on_cycle = np.zeros(n, dtype=bool)
    on_cycle[np.unique(key)] = True
    # f^inf from the definition: vertices with a preimage chain of every length <= n
    reach = np.ones(n, dtype=bool)
    for _ in range(n):
        nxt = np.zeros(n, dtype=bool)
        nxt[img[reach]] = True
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    cycles_of = {c: [] for c in range(n_comp)}
    seen = np.zeros(n, dtype=bool)
    for v in range(n):
        if on_cycle[v] and not seen[v]:
            cyc = [v]
            seen[v] = True
            u = int(img[v])
            while u != v:
                if seen[u]:
                    break
                cyc.append(u)
                seen[u] = True
                u = int(img[u])
            cycles_of[int(comp[v])].append(cyc)
    res = FoliationResult()
    for c in range(n_comp):
        verts = np.flatnonzero(comp == c)
        cycles = cycles_of[c]
        keys = key[verts]
        order = {}
        if cycles:
            # foils in cycle order, each keyed by the cycle vertex it reaches after n steps
            for i, u in enumerate(cycles[0]):
                order[int(key[u])] = i
        foils = []
        for k in sorted(set(keys.tolist()), key=lambda k: order.get(k, n + k)):
            foils.append(verts[keys == k])
        res.components.append(ComponentFoliation(c, verts, cycles, foils, verts[reach[verts]]))
    return res


def drainage_sim(width: int, height: int, rule: str = "iid_uniform", seed=None,
                 choices: np.ndarray | None = None):
    """Drainage network on the even checkerboard of a ``width x height`` torus.

    Each point ``(x, y)`` with ``x + y`` even drains to ``(x - 1, y - 1)`` or
    ``(x + 1, y - 1)`` (both coordinates wrap).  Returns the network, its
    shift and the ``(x, y)`` position of every vertex.  ``choices`` (+1/-1
    per vertex) overrides the random rule.
    """
    if width % 2 or height % 2 or width < 2 or height < 2:
        raise ValueError("width and height must be even and at least 2")
    pts = [(x, y) for y in range(height) for x in range(width) if (x + y) % 2 == 0]
    index = {p: i for i, p in enumerate(pts)}
    pos = np.array(pts, dtype=np.int64)
    n = len(pts)
    if choices is None:
        rng = as_generator(seed)
        if rule == "iid_uniform":
            choices = np.where(rng.random(n) < 0.5, -1, 1)
        elif rule == "stationary_block":
            offset = rng.integers(0, 4, height)
            choices = np.where(((pos[:, 0] + offset[pos[:, 1]]) // 2) % 2 == 0, -1, 1)
        else:
            raise ValueError(f"unknown drainage rule {rule!r}")
    choices = np.asarray(choices, dtype=np.int64)
    target = [index[((x + dx) % width, (y - 1) % height)] for (x, y), dx in zip(pts, choices)]
    edges = np.stack([np.arange(n), target], axis=1)
    hm = np.tile([1.0, 0.0], (n, 1))
    net = Network(n, edges, vmarks=None, hmarks=hm, allow_disconnected=True)
    return net, DRAIN, pos


def _drain(G, v):
    for w, e, side in G.adj[v]:
        if G.half_mark(e, side) == 1.0:
            return w
    return v


DRAIN = VertexShift("drain", _drain)


def shift_commutes(G, f: VertexShift, perm) -> bool:
    """Covariance: ``f`` on the relabelled object equals the relabelled ``f``."""
    perm = np.asarray(perm, dtype=np.int64)
    img = f.image(G)
    img2 = f.image(G.relabel(perm))
    expect = np.empty_like(img)
    expect[perm] = np.where(img >= 0, perm[np.maximum(img, 0)], -1)
    return bool(np.array_equal(img2, expect))
