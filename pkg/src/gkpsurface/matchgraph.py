"""Space-time matching graphs for the Z- and X-type syndrome histories.

Vertices are (measure qubit, round) syndrome comparisons over rounds 1..d+1
(round d+1 is the ideal readout); one virtual boundary vertex per graph.
Edges are derived by propagating every possible single Pauli fault of the
schedule at the lattice level (mod 2) through two rounds and recording which
syndrome comparisons it flips: 0 flips means the fault is harmless, 1 flip an
edge to the boundary, 2 flips an edge between those vertices. Fault classes
with identical endpoints share one edge and accumulate their probabilities
jointly; the edge's correction support is the smallest residual among its
fault classes, and every other member is verified to differ from it by a
stabilizer only.

Edge kinds follow the usual taxonomy: h (space-like, one data qubit),
v (time-like readout, no correction), d (space-time, one data qubit),
c (space-time, two alternative two-qubit corrections).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import Role, SurfaceLayout, build_layout

X, Z = 0, 1  # pauli codes: X = q shift, Z = p shift

VARIANTS = ("surface-gkp", "surface-4-gkp")


@dataclass(frozen=True)
class FaultSignature:
    graph: str                      # 'z' or 'x' (empty when harmless)
    detections: tuple[tuple[int, int], ...]  # (local ancilla, round offset)
    x_mask: int                     # residual data q-shift parities
    z_mask: int                     # residual data p-shift parities


def _propagate_fault(layout: SurfaceLayout, qubit: int, pauli: int, step: int) -> FaultSignature:
    """Two-round lattice-level propagation of a single fault injected after
    the gates of ``step`` (step 0 = before the round's first gate)."""
    n = layout.n_qubits
    nq = np.zeros(n, dtype=np.uint8)
    npp = np.zeros(n, dtype=np.uint8)
    measure_ids = list(layout.mz_ids) + list(layout.mx_ids)
    bits = np.zeros((3, len(measure_ids)), dtype=np.uint8)

    def inject():
        if pauli == X:
            nq[qubit] ^= 1
        else:
            npp[qubit] ^= 1

    for rnd in range(3):
        nq[measure_ids] = 0
        npp[measure_ids] = 0
        if rnd == 0 and step == 0:
            inject()
        for s in (1, 2, 3, 4):
            for g in layout.schedule[s]:
                if g.variant.base == "cz":
                    npp[g.measure] ^= nq[g.data]
                    npp[g.data] ^= nq[g.measure]
                else:
                    nq[g.measure] ^= npp[g.data]
                    nq[g.data] ^= npp[g.measure]
            if rnd == 0 and step == s:
                inject()
        for k, m in enumerate(measure_ids):
            bits[rnd, k] = npp[m] if layout.roles[m] is Role.MEASURE_Z else nq[m]

    assert np.array_equal(bits[2], bits[1]), "fault effect spans more than two rounds"
    detections = []
    for k, m in enumerate(measure_ids):
        if bits[0, k]:
            detections.append((m, 0))
        if bits[1, k] != bits[0, k]:
            detections.append((m, 1))
    graphs = {("z" if layout.roles[m] is Role.MEASURE_Z else "x") for m, _ in detections}
    assert len(graphs) <= 1, "fault detected in both graphs"
    assert len(detections) <= 2, "single fault produced more than two detections"
    x_mask = int(sum(1 << q for q in range(layout.n_data) if nq[q]))
    z_mask = int(sum(1 << q for q in range(layout.n_data) if npp[q]))
    local = {
        m: (m - layout.n_data if layout.roles[m] is Role.MEASURE_Z else m - layout.n_data - layout.n_mz)
        for m, _ in detections
    }
    return FaultSignature(
        graph=graphs.pop() if graphs else "",
        detections=tuple((local[m], off) for m, off in detections),
        x_mask=x_mask,
        z_mask=z_mask,
    )


@dataclass
class Edge:
    index: int                      # global index across both graphs
    graph: str                      # 'z' or 'x'
    kind: str                       # 'h', 'v', 'd', 'c'
    u: int                          # local vertex id
    v: int                          # local vertex id or boundary id
    support: int                    # data-correction bitmask
    alt_support: int | None = None  # valid alternative for c edges

    def support_ids(self) -> tuple[int, ...]:
        return _mask_to_ids(self.support)


def _mask_to_ids(mask: int) -> tuple[int, ...]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return tuple(out)


class MatchingGraphs:
    """Static decoding graphs plus fault-to-edge routing tables for one
    (layout, variant) pair with d noisy rounds and one ideal round."""

    def __init__(self, layout: SurfaceLayout, variant: str):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.layout = layout
        self.variant = variant
        self.rounds = layout.distance  # noisy rounds; round d+1 is ideal
        self.n_anc = layout.n_mz
        self.n_vertices = self.n_anc * (self.rounds + 1)
        self.boundary = self.n_vertices
        self.edges: list[Edge] = []
        self._by_key: dict[tuple[str, frozenset[int]], int] = {}
        d = layout.distance
        nq = layout.n_qubits
        # routing tables, -1 = no edge (harmless or perfectly detected fault)
        self.route_corr = np.full((d + 1, 5, nq, 2), -1, dtype=np.int64)
        self.route_readout = np.full((d + 1, nq), -1, dtype=np.int64)
        self.route_final = np.full((nq, 2), -1, dtype=np.int64)
        self._zsyn, self._xsyn = self._syndrome_masks()
        self._build()

    # -- construction ------------------------------------------------------

    def _syndrome_masks(self):
        lay = self.layout
        zsyn = [sum(1 << q for q in lay.plaquettes[m]) for m in lay.mz_ids]
        xsyn = [sum(1 << q for q in lay.plaquettes[m]) for m in lay.mx_ids]
        return zsyn, xsyn

    def vertex(self, local_anc: int, rnd: int) -> int:
        """Vertex id of ancilla ``local_anc`` at round ``rnd`` (1-based)."""
        return (rnd - 1) * self.n_anc + local_anc

    def _fault_steps(self, qubit: int) -> tuple[int, ...]:
        role = self.layout.roles[qubit]
        if self.variant == "surface-gkp":
            return (0,) if role in (Role.DATA_ODD, Role.DATA_EVEN) else ()
        if role in (Role.DATA_ODD, Role.DATA_EVEN):
            return (1, 2, 3, 4)
        return (1, 2, 3)  # measure qubits are read out instead after step 4

    def _build(self) -> None:
        lay = self.layout
        signatures: dict[tuple[int, int, int], FaultSignature] = {}
        for q in range(lay.n_qubits):
            for step in self._fault_steps(q):
                for pauli in (X, Z):
                    signatures[(q, step, pauli)] = _propagate_fault(lay, q, pauli, step)
        # readout misrounds behave like a fault on the measured quadrature
        # after step 4: measure-Z reads p (Z-type), measure-X reads q
        readout_sig = {}
        for m in lay.mz_ids:
            readout_sig[m] = _propagate_fault(lay, m, Z, 4)
        for m in lay.mx_ids:
            readout_sig[m] = _propagate_fault(lay, m, X, 4)
        final_sig = {
            (q, pauli): _propagate_fault(lay, q, pauli, 0)
            for q in range(lay.n_data)
            for pauli in (X, Z)
        }

        for rnd in range(1, self.rounds + 1):
            for (q, step, pauli), sig in signatures.items():
                self.route_corr[rnd, step, q, pauli] = self._edge_for(sig, rnd)
            for m, sig in readout_sig.items():
                self.route_readout[rnd, m] = self._edge_for(sig, rnd)
        for (q, pauli), sig in final_sig.items():
            # perfect corrections before the ideal readout: both detections
            # land in round d+1 itself
            self.route_final[q, pauli] = self._edge_for(sig, self.rounds + 1)
        self._finalize_kinds()
        self._check_variant_kinds()

    def _edge_for(self, sig: FaultSignature, rnd: int) -> int:
        if not sig.detections:
            assert self._is_trivial(sig), "undetected fault with nontrivial residual"
            return -1
        verts = []
        for anc, off in sig.detections:
            r = rnd + off
            assert 1 <= r <= self.rounds + 1
            verts.append(self.vertex(anc, r))
        if len(verts) == 1:
            verts.append(self.boundary)
        key = (sig.graph, frozenset(verts))
        mask = sig.x_mask if sig.graph == "z" else sig.z_mask
        if key not in self._by_key:
            edge = Edge(
                index=len(self.edges),
                graph=sig.graph,
                kind="?",
                u=min(verts),
                v=max(verts),
                support=mask,
            )
            self.edges.append(edge)
            self._by_key[key] = edge.index
        edge = self.edges[self._by_key[key]]
        # keep the smallest equivalent correction; verify equivalence
        diff = edge.support ^ mask
        assert self._is_stabilizer(sig.graph, diff), "inequivalent faults share an edge"
        if bin(mask).count("1") < bin(edge.support).count("1") or (
            bin(mask).count("1") == bin(edge.support).count("1") and mask < edge.support
        ):
            edge.support = mask
        return edge.index

    def _is_trivial(self, sig: FaultSignature) -> bool:
        return self._is_stabilizer("z", sig.x_mask) and self._is_stabilizer("x", sig.z_mask)

    def _is_stabilizer(self, graph: str, mask: int) -> bool:
        """The mask commutes with the opposite checks and carries no logical
        parity: it is a product of stabilizers of this CSS code."""
        lay = self.layout
        checks = self._zsyn if graph == "z" else self._xsyn
        support = lay.logical_z_support if graph == "z" else lay.logical_x_support
        if any(bin(mask & c).count("1") % 2 for c in checks):
            return False
        logical = sum(1 << q for q in support)
        return bin(mask & logical).count("1") % 2 == 0

    def _finalize_kinds(self) -> None:
        n_anc = self.n_anc
        for e in self.edges:
            popcount = bin(e.support).count("1")
            same_anc = (e.u % n_anc) == (e.v % n_anc) if e.v != self.boundary else False
            ru = e.u // n_anc
            rv = e.v // n_anc if e.v != self.boundary else None
            if popcount == 0 and same_anc and rv == ru + 1:
                e.kind = "v"
            elif popcount == 2:
                e.kind = "c"
                plaq = self._containing_plaquette(e.graph, e.support)
                if plaq is not None:
                    e.alt_support = e.support ^ plaq
            elif e.v == self.boundary or rv == ru:
                e.kind = "h"
            else:
                e.kind = "d"

    def _containing_plaquette(self, graph: str, mask: int):
        # the two alternative corrections of a c edge split one plaquette of
        # the stabilizer type matching the correction Pauli: Z-graph edges
        # apply X corrections (X-type plaquettes) and vice versa
        checks = self._xsyn if graph == "z" else self._zsyn
        for c in checks:
            if c & mask == mask and bin(c).count("1") == 4:
                return c
        return None

    def _check_variant_kinds(self) -> None:
        kinds = {(e.graph, e.kind) for e in self.edges}
        if self.variant == "surface-gkp":
            assert all(k in ("h", "v") for _, k in kinds), "unexpected space-time edges"

    # -- per-graph views ---------------------------------------------------

    def route_for(self, rnd: int, step: int, qubit: int, pauli: int) -> Edge | None:
        """Edge hosting the probability of a fault on ``qubit`` induced in
        the correction after ``step`` of round ``rnd`` (None when the fault
        is harmless). Combinations outside the variant's correction schedule
        raise a taxonomy error."""
        if not 1 <= rnd <= self.rounds:
            raise KeyError(f"round {rnd} outside 1..{self.rounds}")
        if step not in self._fault_steps(qubit) or pauli not in (X, Z):
            raise KeyError(
                f"no {self.variant} correction fault at (step={step}, "
                f"qubit={qubit}, pauli={pauli})"
            )
        idx = self.route_corr[rnd, step, qubit, pauli]
        return self.edges[idx] if idx >= 0 else None

    def graph_edges(self, graph: str) -> list[Edge]:
        return [e for e in self.edges if e.graph == graph]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def dump(self) -> str:
        """Adjacency text dump for debugging."""
        lines = []
        for g in ("z", "x"):
            lines.append(f"graph {g}: {self.n_vertices} vertices + boundary")
            for e in self.graph_edges(g):
                v = "boundary" if e.v == self.boundary else str(e.v)
                lines.append(
                    f"  edge[{e.index}] {e.kind} {e.u}-{v} support={e.support_ids()}"
                )
        return "\n".join(lines)


@lru_cache(maxsize=32)
def build_graphs(distance: int, variant: str) -> MatchingGraphs:
    """Matching graphs for a distance-d code under the given correction
    variant (cached; graphs are immutable and shared across samples)."""
    return MatchingGraphs(build_layout(distance), variant)
