"""Minimum-weight perfect-matching decoder over the space-time graphs.

Per sample, edge probabilities accumulated during the simulation are combined
into weights -log2(p_tot); decoding computes shortest paths among the
highlighted vertices (and to the boundary), solves an exact minimum-weight
perfect matching on the derived complete graph (boundary twins with
zero-weight pairing), and expands the matched paths into data-qubit
corrections.
"""

from __future__ import annotations

import math

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .lattice import SurfaceLayout
from .matchgraph import Edge, MatchingGraphs

_P_FLOOR = 1e-300  # probability floor keeping weights finite
_ENUM_LIMIT = 9    # below the measured crossover vs blossom matching


def edge_weights(graphs: MatchingGraphs, one_minus_2p: np.ndarray) -> np.ndarray:
    """Finalised edge weights from per-edge products of (1 - 2 p_i):
    w = -log2(p_tot), p_tot = (1 - prod) / 2."""
    p_tot = 0.5 * (1.0 - one_minus_2p)
    return -np.log2(np.clip(p_tot, _P_FLOOR, 0.5))


class GraphDecoder:
    """Decoder bound to one graph ('z' or 'x') of a MatchingGraphs set."""

    def __init__(self, graphs: MatchingGraphs, graph: str):
        self.graphs = graphs
        self.graph = graph
        self.edges: list[Edge] = graphs.graph_edges(graph)
        self.n_nodes = graphs.n_vertices + 1  # + boundary
        self.boundary = graphs.boundary
        u = np.array([e.u for e in self.edges], dtype=np.int32)
        v = np.array([e.v for e in self.edges], dtype=np.int32)
        self._rows = np.concatenate([u, v])
        self._cols = np.concatenate([v, u])
        self._edge_by_pair = {}
        for k, e in enumerate(self.edges):
            self._edge_by_pair[(e.u, e.v)] = k
            self._edge_by_pair[(e.v, e.u)] = k
        data = np.ones(2 * len(self.edges))
        csr = csr_matrix((data, (self._rows, self._cols)), shape=(self.n_nodes, self.n_nodes))
        csr.sum_duplicates()
        self._csr = csr
        # map each directed edge entry to its slot in csr.data
        order = np.lexsort((self._cols, self._rows))
        self._data_slot = np.empty(2 * len(self.edges), dtype=np.int64)
        self._data_slot[order] = np.arange(2 * len(self.edges))
        self._static_dist = None
        self._static_pred = None

    def _local_weights(self, weights_global: np.ndarray) -> np.ndarray:
        return np.array([weights_global[e.index] for e in self.edges])

    def set_static_weights(self, weights_global: np.ndarray) -> None:
        """Precompute all-pairs shortest paths for weights reused across many
        decodes (fault-injection campaigns)."""
        w = self._local_weights(weights_global)
        self._csr.data[self._data_slot] = np.tile(w, 2)
        dist, pred = dijkstra(self._csr, directed=False, return_predecessors=True)
        self._static_dist = dist
        self._static_pred = pred

    def clear_static_weights(self) -> None:
        self._static_dist = self._static_pred = None

    def decode(self, weights_global: np.ndarray, highlights) -> tuple[int, float]:
        """Match the highlighted vertices; returns (correction bitmask over
        data qubits, total matching weight)."""
        hi = sorted(set(int(h) for h in highlights))
        if not hi:
            return 0, 0.0
        if self._static_dist is not None:
            dist = self._static_dist[hi]
            pred = self._static_pred[hi]
        else:
            w = self._local_weights(weights_global)
            self._csr.data[self._data_slot] = np.tile(w, 2)
            dist, pred = dijkstra(
                self._csr, directed=False, indices=hi, return_predecessors=True
            )
        k = len(hi)
        pair_cost = dist[:, hi]
        bnd_cost = dist[:, self.boundary]
        pairs, total = _match_exact(pair_cost, bnd_cost)
        mask = 0
        for a, b in pairs:
            target = hi[b] if b >= 0 else self.boundary
            mask ^= self._path_mask(pred[a], hi[a], target)
        return mask, float(total)

    def _path_mask(self, pred_row: np.ndarray, source: int, target: int) -> int:
        mask = 0
        node = target
        while node != source:
            prev = pred_row[node]
            assert prev >= 0, "disconnected matching target"
            mask ^= self.edges[self._edge_by_pair[(int(prev), int(node))]].support
            node = prev
        return mask


def _match_exact(pair_cost: np.ndarray, bnd_cost: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Exact minimum-weight perfect matching of highlights, each allowed to
    match another highlight or its boundary twin. Returns pairs (i, j) with
    j = -1 for boundary, and the total weight.

    A pair edge costing at least both boundary routes can always be replaced
    by the two boundary matches, so such edges are pruned first; the
    surviving edges split the instance into independent components that are
    solved by enumeration (small) or blossom matching (large).
    """
    k = len(bnd_cost)
    if k == 0:
        return [], 0.0
    survives = pair_cost < (bnd_cost[:, None] + bnd_cost[None, :])
    comp = np.full(k, -1)
    components: list[list[int]] = []
    for s in range(k):
        if comp[s] >= 0:
            continue
        stack, members = [s], []
        comp[s] = len(components)
        while stack:
            u = stack.pop()
            members.append(u)
            for v in np.nonzero(survives[u])[0]:
                if comp[v] < 0:
                    comp[v] = comp[s]
                    stack.append(int(v))
        components.append(sorted(members))
    pairs: list[tuple[int, int]] = []
    total = 0.0
    for members in components:
        if len(members) == 1:
            i = members[0]
            pairs.append((i, -1))
            total += float(bnd_cost[i])
        elif len(members) <= _ENUM_LIMIT:
            sub_pairs, sub_total = _match_enumerate(
                pair_cost[np.ix_(members, members)], bnd_cost[members]
            )
            pairs += [
                (members[a], members[b] if b >= 0 else -1) for a, b in sub_pairs
            ]
            total += sub_total
        else:
            sub_pairs, sub_total = _match_blossom(pair_cost, bnd_cost, members)
            pairs += sub_pairs
            total += sub_total
    return pairs, total


def _match_blossom(pair_cost: np.ndarray, bnd_cost: np.ndarray, members: list[int]) -> tuple[list[tuple[int, int]], float]:
    """Blossom matching of one component. Each pair edge carries
    min(direct, both-to-boundary); an odd component gets one virtual boundary
    absorber node."""
    g = nx.Graph()
    for ai, a in enumerate(members):
        for b in members[ai + 1 :]:
            w = min(float(pair_cost[a, b]), float(bnd_cost[a] + bnd_cost[b]))
            g.add_edge(a, b, weight=-w)
        if len(members) % 2:
            g.add_edge(a, "virtual", weight=-float(bnd_cost[a]))
    mate = nx.max_weight_matching(g, maxcardinality=True)
    pairs: list[tuple[int, int]] = []
    total = 0.0
    for a, b in sorted(mate, key=str):  # deterministic accumulation order
        if b == "virtual":
            a, b = b, a
        if a == "virtual":
            pairs.append((b, -1))
            total += float(bnd_cost[b])
        elif bnd_cost[a] + bnd_cost[b] < pair_cost[a, b]:
            pairs.append((a, -1))
            pairs.append((b, -1))
            total += float(bnd_cost[a] + bnd_cost[b])
        else:
            pairs.append((min(a, b), max(a, b)))
            total += float(pair_cost[a, b])
    return pairs, total


def _match_enumerate(pair_cost: np.ndarray, bnd_cost: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    k = len(bnd_cost)

    def rec(unmatched: tuple[int, ...], acc: float, pairs: list[tuple[int, int]]):
        if acc >= rec.best_cost:
            return
        if not unmatched:
            rec.best_cost = acc
            rec.best_pairs = list(pairs)
            return
        i, rest = unmatched[0], unmatched[1:]
        # lowest-index-first exploration gives deterministic tie breaking
        pairs.append((i, -1))
        rec(rest, acc + float(bnd_cost[i]), pairs)
        pairs.pop()
        for pos, j in enumerate(rest):
            pairs.append((i, j))
            rec(rest[:pos] + rest[pos + 1 :], acc + float(pair_cost[i, j]), pairs)
            pairs.pop()

    rec.best_cost = math.inf
    rec.best_pairs = []
    rec(tuple(range(k)), 0.0, [])
    return rec.best_pairs, rec.best_cost


def highlights_from_bits(graphs: MatchingGraphs, bits: np.ndarray, graph: str) -> list[int]:
    """Vertices whose syndrome bit differs from the previous round.

    ``bits`` has shape (n_anc, rounds+1) in local ancilla order for the given
    graph; the round-0 reference is 0.
    """
    n_anc = graphs.n_anc
    prev = np.zeros(n_anc, dtype=bits.dtype)
    out = []
    for rnd in range(1, graphs.rounds + 2):
        cur = bits[:, rnd - 1]
        for a in np.nonzero(cur != prev)[0]:
            out.append(graphs.vertex(int(a), rnd))
        prev = cur
    return out


def detect_logical_error(
    layout: SurfaceLayout,
    x_residual: int,
    z_residual: int,
    x_correction: int,
    z_correction: int,
    verify: bool = True,
) -> tuple[bool, bool]:
    """Logical flags from residual Pauli parities after the ideal round and
    the decoder's corrections: logical X iff the X parity on the logical-Z
    support is odd (and symmetrically). With ``verify`` the corrected residual
    must satisfy every stabilizer, else a decoder/graph inconsistency is
    raised."""
    x_final = x_residual ^ x_correction
    z_final = z_residual ^ z_correction
    if verify:
        for m in layout.mz_ids:
            plaq = sum(1 << q for q in layout.plaquettes[m])
            if bin(x_final & plaq).count("1") % 2:
                raise RuntimeError("unsatisfied Z stabilizer after correction")
        for m in layout.mx_ids:
            plaq = sum(1 << q for q in layout.plaquettes[m])
            if bin(z_final & plaq).count("1") % 2:
                raise RuntimeError("unsatisfied X stabilizer after correction")
    z_support = sum(1 << q for q in layout.logical_z_support)
    x_support = sum(1 << q for q in layout.logical_x_support)
    logical_x = bin(x_final & z_support).count("1") % 2 == 1
    logical_z = bin(z_final & x_support).count("1") % 2 == 1
    return logical_x, logical_z
