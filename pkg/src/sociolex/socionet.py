"""Mutual-mention network, degree-preserving null ensembles, homophily.

The null model rewires the observed graph by attempted double-edge swaps
(two edges chosen uniformly, endpoints crossed, rejected whenever a
self-loop or duplicate edge would appear), which preserves every node's
degree exactly while erasing structural correlations.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

CATEGORIES = (
    "connected-same-class",
    "connected",
    "disconnected-same-class",
    "disconnected-random",
)


class MentionGraph:
    """Undirected simple graph over user ids, built from mutual mentions."""

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]]):
        self.node_ids: list[str] = sorted(set(nodes))
        self.index: dict[str, int] = {u: i for i, u in enumerate(self.node_ids)}
        pairs = set()
        for u, v in edges:
            if u == v:
                continue
            i, j = self.index[u], self.index[v]
            pairs.add((i, j) if i < j else (j, i))
        edge_list = sorted(pairs)
        self.us = np.array([e[0] for e in edge_list], dtype=np.int64)
        self.vs = np.array([e[1] for e in edge_list], dtype=np.int64)
        self._edge_set = pairs
        self._adj: Optional[list[set[int]]] = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.us)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(deg, self.us, 1)
        np.add.at(deg, self.vs, 1)
        return deg

    def has_edge(self, u: str, v: str) -> bool:
        i, j = self.index.get(u), self.index.get(v)
        if i is None or j is None or i == j:
            return False
        return ((i, j) if i < j else (j, i)) in self._edge_set

    def edges(self) -> Iterable[tuple[str, str]]:
        for i, j in zip(self.us, self.vs):
            yield self.node_ids[i], self.node_ids[j]

    def adjacency(self) -> list[set[int]]:
        if self._adj is None:
            adj: list[set[int]] = [set() for _ in range(self.n_nodes)]
            for i, j in zip(self.us, self.vs):
                adj[i].add(int(j))
                adj[j].add(int(i))
            self._adj = adj
        return self._adj


def build_network(posts: Iterable) -> MentionGraph:
    """Mutual-mention graph: edge {u,v} iff u mentioned v and v mentioned u.

    Accepts any records exposing author_id and mentioned_ids; self-mentions
    are ignored and the result is independent of post order.
    """
    directed: set[tuple[str, str]] = set()
    for post in posts:
        for target in post.mentioned_ids:
            if target != post.author_id:
                directed.add((post.author_id, target))
    edges = set()
    nodes = set()
    for u, v in directed:
        if u < v and (v, u) in directed:
            edges.add((u, v))
            nodes.add(u)
            nodes.add(v)
    return MentionGraph(nodes, edges)


def _build_csr(us: np.ndarray, vs: np.ndarray, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    deg = np.bincount(src, minlength=n_nodes)
    offsets = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(deg, out=offsets[1:])
    order = np.argsort(src, kind="stable")
    neigh = dst[order]
    return offsets, neigh


def _swap_attempts(us, vs, offsets, neigh, pick1, pick2, orient):
    """Run the attempted-swap chain in place; identical under numba or not."""
    n_att = pick1.shape[0]
    accepted = 0
    for t in range(n_att):
        i = pick1[t]
        j = pick2[t]
        if i == j:
            continue
        a = us[i]
        b = vs[i]
        c = us[j]
        d = vs[j]
        if orient[t] == 1:
            c, d = d, c
        # proposed edges (a,d) and (c,b)
        if a == d or c == b:
            continue
        clash = False
        for p in range(offsets[a], offsets[a + 1]):
            if neigh[p] == d:
                clash = True
                break
        if clash:
            continue
        for p in range(offsets[c], offsets[c + 1]):
            if neigh[p] == b:
                clash = True
                break
        if clash:
            continue
        for p in range(offsets[a], offsets[a + 1]):
            if neigh[p] == b:
                neigh[p] = d
                break
        for p in range(offsets[b], offsets[b + 1]):
            if neigh[p] == a:
                neigh[p] = c
                break
        for p in range(offsets[c], offsets[c + 1]):
            if neigh[p] == d:
                neigh[p] = b
                break
        for p in range(offsets[d], offsets[d + 1]):
            if neigh[p] == c:
                neigh[p] = a
                break
        us[i] = a
        vs[i] = d
        us[j] = c
        vs[j] = b
        accepted += 1
    return accepted


_swap_attempts_py = _swap_attempts
if _HAVE_NUMBA:
    _swap_attempts = njit(cache=True, nogil=True)(_swap_attempts)


def configuration_sample(graph: MentionGraph, swaps_per_edge: int,
                         rng: np.random.Generator,
                         _kernel: Callable = None) -> tuple[np.ndarray, np.ndarray]:
    """One degree-preserving randomization of the graph's edge set."""
    m = graph.n_edges
    if m < 2:
        raise ValueError("graph needs at least 2 edges to randomize")
    us = graph.us.copy()
    vs = graph.vs.copy()
    offsets, neigh = _build_csr(us, vs, graph.n_nodes)
    n_att = swaps_per_edge * m
    pick1 = rng.integers(0, m, size=n_att, dtype=np.int64)
    pick2 = rng.integers(0, m, size=n_att, dtype=np.int64)
    orient = rng.integers(0, 2, size=n_att, dtype=np.int64)
    kernel = _kernel if _kernel is not None else _swap_attempts
    kernel(us, vs, offsets, neigh, pick1, pick2, orient)
    return us, vs


def class_array(graph: MentionGraph, classes: Mapping[str, int]) -> np.ndarray:
    """Per-node 0-based class labels; -1 for nodes without a class."""
    arr = np.full(graph.n_nodes, -1, dtype=np.int64)
    for user, cls in classes.items():
        i = graph.index.get(user)
        if i is not None:
            arr[i] = cls - 1
    return arr


def count_class_mixing(us: np.ndarray, vs: np.ndarray,
                       class_arr: np.ndarray, k: int) -> np.ndarray:
    """Symmetric k x k matrix of per-class-pair edge counts.

    Each edge counts once at unordered (class_u, class_v); the diagonal is
    not doubled, so upper-triangle-plus-diagonal sums to the number of
    edges between classed nodes.
    """
    cu = class_arr[us]
    cv = class_arr[vs]
    mask = (cu >= 0) & (cv >= 0)
    lo = np.minimum(cu[mask], cv[mask])
    hi = np.maximum(cu[mask], cv[mask])
    flat = np.bincount(lo * k + hi, minlength=k * k)
    upper = flat.reshape(k, k).astype(np.float64)
    return upper + np.triu(upper, 1).T


@dataclass
class NullEnsemble:
    sample_counts: np.ndarray  # (n_samples, k, k)
    mean_counts: np.ndarray    # (k, k)
    n_samples: int
    swaps_per_edge: int
    seed: int
    k: int


def configuration_null(graph: MentionGraph, classes: Mapping[str, int], k: int,
                       n_samples: int = 100, swaps_per_edge: int = 10,
                       seed: int = 0, threads: int = 1) -> NullEnsemble:
    """Per-class-pair link counts over a configuration-model ensemble.

    Samples are generated independently from per-sample derived seeds, so
    the result is identical for any thread count.
    """
    if graph.n_edges < 2:
        raise ValueError("graph needs at least 2 edges")
    class_arr = class_array(graph, classes)
    children = np.random.SeedSequence(seed).spawn(n_samples)

    def one(idx: int) -> np.ndarray:
        rng = np.random.default_rng(children[idx])
        us, vs = configuration_sample(graph, swaps_per_edge, rng)
        return count_class_mixing(us, vs, class_arr, k)

    counts = np.empty((n_samples, k, k), dtype=np.float64)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for idx, mat in zip(range(n_samples), pool.map(one, range(n_samples))):
                counts[idx] = mat
    else:
        for idx in range(n_samples):
            counts[idx] = one(idx)
    return NullEnsemble(
        sample_counts=counts,
        mean_counts=counts.mean(axis=0),
        n_samples=n_samples,
        swaps_per_edge=swaps_per_edge,
        seed=seed,
        k=k,
    )


@dataclass
class HomophilyMatrix:
    observed: np.ndarray   # (k, k) symmetric counts
    null_mean: np.ndarray  # (k, k)
    ratio: np.ndarray      # (k, k); NaN where the null expects no links
    n_samples: int
    n_dropped_nodes: int
    k: int


def homophily_matrix(graph: MentionGraph, classes: Mapping[str, int],
                     null: NullEnsemble) -> HomophilyMatrix:
    """Observed-over-null connection matrix between socioeconomic classes."""
    k = null.k
    if classes and max(classes.values()) > k:
        raise ValueError("partition has more classes than the null ensemble")
    class_arr = class_array(graph, classes)
    dropped = int(np.sum(class_arr < 0))
    observed = count_class_mixing(graph.us, graph.vs, class_arr, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(null.mean_counts > 0, observed / null.mean_counts, np.nan)
    return HomophilyMatrix(
        observed=observed,
        null_mean=null.mean_counts,
        ratio=ratio,
        n_samples=null.n_samples,
        n_dropped_nodes=dropped,
        k=k,
    )


def chi_square_test(observed: np.ndarray, null: NullEnsemble) -> tuple[float, float]:
    """Chi-square distance of the observed mixing matrix from the null mean,
    with a Monte Carlo p-value from the ensemble's own per-sample statistics.

    Cells are the unordered class pairs (upper triangle and diagonal) whose
    null expectation is positive; p gets the +1/(n+1) correction.
    """
    k = null.k
    iu, ju = np.triu_indices(k)
    expected = null.mean_counts[iu, ju]
    keep = expected > 0
    if not np.any(keep):
        raise ValueError("null expectation is zero everywhere")
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least 2 non-empty cells")
    e = expected[keep]
    obs = observed[iu, ju][keep]
    stat = float(np.sum((obs - e) ** 2 / e))
    samples = null.sample_counts[:, iu, ju][:, keep]
    sample_stats = np.sum((samples - e) ** 2 / e, axis=1)
    p = (float(np.sum(sample_stats >= stat)) + 1.0) / (null.n_samples + 1.0)
    return stat, p


class PairSampler:
    """Seeded uniform sampler over one of the four user-pair categories."""

    def __init__(self, graph: MentionGraph, classes: Mapping[str, int],
                 category: str, seed: int = 0):
        if category not in CATEGORIES:
            raise ValueError(f"unknown category {category!r}")
        self.graph = graph
        self.category = category
        self.rng = np.random.default_rng(np.random.SeedSequence((seed, CATEGORIES.index(category))))
        self._class_arr = class_array(graph, classes)
        self._adj = graph.adjacency()
        m = graph.n_edges
        n = graph.n_nodes

        if category == "connected":
            if m == 0:
                raise ValueError("no edges: category 'connected' is empty")
        elif category == "connected-same-class":
            cu = self._class_arr[graph.us]
            cv = self._class_arr[graph.vs]
            sel = np.flatnonzero((cu >= 0) & (cu == cv))
            if sel.size == 0:
                raise ValueError("no same-class edges")
            self._same_edges = sel
        elif category == "disconnected-same-class":
            members: dict[int, np.ndarray] = {}
            weights = []
            labels = []
            within = self._within_class_edge_counts()
            for cls in sorted(set(int(c) for c in self._class_arr if c >= 0)):
                idxs = np.flatnonzero(self._class_arr == cls)
                total_pairs = idxs.size * (idxs.size - 1) // 2
                free = total_pairs - within.get(cls, 0)
                if free > 0:
                    members[cls] = idxs
                    weights.append(free)
                    labels.append(cls)
            if not labels:
                raise ValueError("no disconnected same-class pairs")
            self._dsc_members = members
            self._dsc_labels = labels
            w = np.array(weights, dtype=np.float64)
            self._dsc_weights = w / w.sum()
        else:  # disconnected-random
            if m >= n * (n - 1) // 2:
                raise ValueError("graph is complete: no disconnected pairs")

    def _within_class_edge_counts(self) -> dict[int, int]:
        cu = self._class_arr[self.graph.us]
        cv = self._class_arr[self.graph.vs]
        out: dict[int, int] = {}
        for c in cu[(cu >= 0) & (cu == cv)]:
            out[int(c)] = out.get(int(c), 0) + 1
        return out

    def draw(self) -> tuple[str, str]:
        g = self.graph
        rng = self.rng
        if self.category == "connected":
            e = int(rng.integers(0, g.n_edges))
            return g.node_ids[g.us[e]], g.node_ids[g.vs[e]]
        if self.category == "connected-same-class":
            e = int(self._same_edges[rng.integers(0, self._same_edges.size)])
            return g.node_ids[g.us[e]], g.node_ids[g.vs[e]]
        if self.category == "disconnected-same-class":
            while True:
                cls = self._dsc_labels[int(rng.choice(len(self._dsc_labels), p=self._dsc_weights))]
                idxs = self._dsc_members[cls]
                i, j = rng.integers(0, idxs.size, size=2)
                if i == j:
                    continue
                u, v = int(idxs[i]), int(idxs[j])
                if v not in self._adj[u]:
                    return g.node_ids[min(u, v)], g.node_ids[max(u, v)]
        while True:  # disconnected-random
            i, j = rng.integers(0, g.n_nodes, size=2)
            if i == j:
                continue
            u, v = int(i), int(j)
            if v not in self._adj[u]:
                return g.node_ids[min(u, v)], g.node_ids[max(u, v)]


def sample_pairs(graph: MentionGraph, classes: Mapping[str, int], category: str,
                 n: int = 10_000, seed: int = 0) -> list[tuple[str, str]]:
    """n pairs drawn uniformly (with replacement) from the category."""
    sampler = PairSampler(graph, classes, category, seed)
    return [sampler.draw() for _ in range(n)]
