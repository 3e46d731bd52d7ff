"""Symplectic-matrix toolkit for the measurement-based gate layer.

Matrices act on quadrature vectors ordered (q_1..q_N, p_1..p_N). A gate
induced by homodyne measurements on the teleportation circuit is returned as
(G, N, D): outputs = G @ inputs + N @ squeezed_noise + D @ outcomes, where the
squeezed noise operators have variance e^{-2r}/2 each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_TOL = 1e-10


def omega(n_modes: int) -> np.ndarray:
    """Standard symplectic form on (q-block, p-block) vectors."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def is_symplectic(mat: np.ndarray, tol: float = _TOL) -> bool:
    n = mat.shape[0] // 2
    return mat.shape[0] == mat.shape[1] and bool(
        np.allclose(mat @ omega(n) @ mat.T, omega(n), atol=tol)
    )


@dataclass
class SymplecticGate:
    """Measurement-induced gate: G on inputs, N on ancilla squeezed
    quadratures, D on measurement outcomes. Pure unitaries have empty N, D."""

    g: np.ndarray
    n_mat: np.ndarray = field(default=None)  # type: ignore[assignment]
    d_mat: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.g = np.asarray(self.g, dtype=float)
        dim = self.g.shape[0]
        if self.n_mat is None:
            self.n_mat = np.zeros((dim, 0))
        if self.d_mat is None:
            self.d_mat = np.zeros((dim, 0))
        # near-degenerate settings give large matrix norms; scale the check
        scale = max(1.0, float(np.max(np.abs(self.g))) ** 2)
        if not is_symplectic(self.g, tol=_TOL * scale):
            raise ValueError("G is not symplectic")

    @property
    def n_modes(self) -> int:
        return self.g.shape[0] // 2


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeeze(s: float) -> np.ndarray:
    """S(s) = exp(i ln(s) (qp + pq)/2): q -> q/s, p -> s p."""
    if s == 0:
        raise ValueError("degenerate squeeze s = 0")
    return np.array([[1.0 / s, 0.0], [0.0, s]])


def beam_splitter() -> np.ndarray:
    """Balanced beam-splitter on (q_i, q_j, p_i, p_j), arrow from i to j."""
    b = np.array([[1, -1], [1, 1]]) / math.sqrt(2.0)
    out = np.zeros((4, 4))
    out[:2, :2] = b
    out[2:, 2:] = b
    return out


def controlled_z(g: float) -> np.ndarray:
    out = np.eye(4)
    out[2, 1] = g  # p_i += g q_j
    out[3, 0] = g  # p_j += g q_i
    return out


def controlled_x(g: float) -> np.ndarray:
    out = np.eye(4)
    out[0, 3] = g  # q_i += g p_j
    out[1, 2] = g  # q_j += g p_i
    return out


def fourier() -> np.ndarray:
    return rotation(math.pi / 2.0)


def elementary(kind: str, param: float | None = None) -> SymplecticGate:
    """Elementary gates: "BS", "R" (angle), "S" (factor), "F", "CZ", "CX"."""
    if kind == "BS":
        return SymplecticGate(beam_splitter())
    if kind == "R":
        return SymplecticGate(rotation(param))
    if kind == "S":
        return SymplecticGate(squeeze(param))
    if kind == "F":
        return SymplecticGate(fourier())
    if kind == "CZ":
        return SymplecticGate(controlled_z(param))
    if kind == "CX":
        return SymplecticGate(controlled_x(param))
    raise ValueError(f"unknown gate kind {kind!r}")


def tensor(*singles: np.ndarray) -> np.ndarray:
    """Assemble single-mode 2x2 matrices into one (q-block, p-block) matrix."""
    n = len(singles)
    out = np.zeros((2 * n, 2 * n))
    for k, m in enumerate(singles):
        out[k, k] = m[0, 0]
        out[k, n + k] = m[0, 1]
        out[n + k, k] = m[1, 0]
        out[n + k, n + k] = m[1, 1]
    return out


def verify_identity(lhs: np.ndarray, rhs: np.ndarray, tol: float = _TOL) -> bool:
    """True iff two gate expressions have the same symplectic matrix."""
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    return lhs.shape == rhs.shape and bool(np.allclose(lhs, rhs, atol=tol))


@dataclass(frozen=True)
class BasisSetting:
    """Homodyne angles of one teleportation step.

    Single-wire settings carry (theta_a, theta_b); two-wire settings the four
    angles (theta_a_k, theta_b_k, theta_a_kj, theta_b_kj).
    """

    angles: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.angles) not in (2, 4):
            raise ValueError("settings require 2 or 4 homodyne angles")
        if not all(math.isfinite(a) for a in self.angles):
            raise ValueError("angles must be finite")
        if len(self.angles) == 2:
            minus = (-self.angles[0] + self.angles[1]) / 2.0
            if abs(math.sin(2.0 * minus)) < _TOL:
                raise ValueError("degenerate single-wire setting: sin(2 theta_-) = 0")


def table_settings(gate: str, g: float = 1.0) -> BasisSetting:
    """Published basis settings of the four dressed two-mode gates.

    Keys: "cz_post" = (F† ⊗ F) C_Z(g), "cz_pre" = C_Z(g) (F ⊗ F†),
    "cx_post" = (F ⊗ F†) C_X(g), "cx_pre" = C_X(g) (F† ⊗ F).
    """
    t = math.atan2(2.0, g)
    half = math.pi / 2.0
    if gate in ("cz_post", "cx_pre"):
        return BasisSetting((-t, 0.0, 0.0, t))
    if gate in ("cz_pre", "cx_post"):
        return BasisSetting((-half + t, half, -half, half - t))
    raise ValueError(f"unknown two-mode gate {gate!r}")


def dressed_gate(gate: str, g: float = 1.0) -> np.ndarray:
    """Symplectic matrix of a dressed two-mode gate (same keys as
    table_settings); tensor slot order is (earlier mode, later mode)."""
    f, fd = fourier(), rotation(-math.pi / 2.0)
    if gate == "cz_post":
        return tensor(fd, f) @ controlled_z(g)
    if gate == "cz_pre":
        return controlled_z(g) @ tensor(f, fd)
    if gate == "cx_post":
        return tensor(f, fd) @ controlled_x(g)
    if gate == "cx_pre":
        return controlled_x(g) @ tensor(fd, f)
    raise ValueError(f"unknown two-mode gate {gate!r}")


class _LinearCircuit:
    """Mode quadratures as linear forms over (inputs, squeezed ops, anti ops);
    homodyne projections are eliminated by solving for the anti-squeezed ops.
    """

    def __init__(self, n_inputs: int, n_resource: int):
        self.n_in = 2 * n_inputs
        self.n_s = n_resource
        self.n_a = n_resource
        self.width = self.n_in + self.n_s + self.n_a
        self.quads: dict[tuple[str, int], np.ndarray] = {}
        for k in range(n_inputs):
            for qi, quad in enumerate("qp"):
                row = np.zeros(self.width)
                row[2 * k + qi] = 1.0
                self.quads[(quad, k)] = row
        self._next_resource = 0
        self.measurements: list[np.ndarray] = []

    def add_resource_pair(self, out_mode: int, meas_mode: int) -> None:
        """Cluster-type resource pair: the output half squeezed along
        (q-p)/sqrt2, the measured half along (q+p)/sqrt2, interfered on a
        balanced beam-splitter with the arrow from the measured half to the
        output half."""
        su, au = self._new_resource()
        sv, av = self._new_resource()
        inv = 1.0 / math.sqrt(2.0)
        self.quads[("q", out_mode)] = inv * (au + su)
        self.quads[("p", out_mode)] = inv * (au - su)
        self.quads[("q", meas_mode)] = inv * (av + sv)
        self.quads[("p", meas_mode)] = inv * (sv - av)
        self.beam_splitter(meas_mode, out_mode)

    def _new_resource(self) -> tuple[np.ndarray, np.ndarray]:
        if self._next_resource >= self.n_s:
            raise ValueError("too many resource modes")
        s_row = np.zeros(self.width)
        s_row[self.n_in + self._next_resource] = 1.0
        a_row = np.zeros(self.width)
        a_row[self.n_in + self.n_s + self._next_resource] = 1.0
        self._next_resource += 1
        return s_row, a_row

    def beam_splitter(self, i: int, j: int) -> None:
        """Arrow from mode i to mode j."""
        inv = 1.0 / math.sqrt(2.0)
        for quad in "qp":
            a, b = self.quads[(quad, i)], self.quads[(quad, j)]
            self.quads[(quad, i)] = inv * (a - b)
            self.quads[(quad, j)] = inv * (a + b)

    def measure(self, mode: int, theta: float) -> None:
        """Project mode onto q cos(theta) + p sin(theta)."""
        row = math.cos(theta) * self.quads[("q", mode)] + math.sin(theta) * self.quads[("p", mode)]
        self.measurements.append(row)

    def eliminate(self, output_modes: list[int]) -> SymplecticGate:
        """Solve the measurement equations for the anti-squeezed operators and
        substitute into the output quadratures."""
        eqs = np.array(self.measurements)
        if eqs.shape[0] != self.n_a:
            raise ValueError("need one measurement per anti-squeezed operator")
        e_in = eqs[:, : self.n_in]
        e_s = eqs[:, self.n_in : self.n_in + self.n_s]
        e_a = eqs[:, self.n_in + self.n_s :]
        # exact linear solve with partial pivoting; reject degenerate settings
        if np.min(np.abs(np.linalg.svd(e_a, compute_uv=False))) < _TOL:
            raise ValueError("degenerate setting: measured quadratures are dependent")
        rows = []
        for m in output_modes:
            rows.append(self.quads[("q", m)])
        for m in output_modes:
            rows.append(self.quads[("p", m)])
        out = np.array(rows)
        o_in = out[:, : self.n_in]
        o_s = out[:, self.n_in : self.n_in + self.n_s]
        o_a = out[:, self.n_in + self.n_s :]
        sub = np.linalg.solve(e_a, np.hstack([e_in, e_s, np.eye(self.n_a)]))
        k_in, k_s, k_m = (
            sub[:, : self.n_in],
            sub[:, self.n_in : self.n_in + self.n_s],
            sub[:, self.n_in + self.n_s :],
        )
        g = _interleave_to_blocks(o_in - o_a @ k_in)
        n_mat = o_s - o_a @ k_s
        d_mat = o_a @ k_m
        return SymplecticGate(g=g, n_mat=n_mat, d_mat=d_mat)


def _interleave_to_blocks(mat: np.ndarray) -> np.ndarray:
    """Input columns are interleaved (q0, p0, q1, p1, ...); reorder them to
    (q-block, p-block). Output rows are already block ordered."""
    n = mat.shape[1] // 2
    order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return mat[:, order]


def induced_gate(setting: BasisSetting) -> SymplecticGate:
    """Gate enacted by one teleportation step at the given homodyne angles.

    Single-wire circuit: the input is joined with one half of a two-mode
    cluster resource on the measurement beam-splitter; both detectors fire at
    the given angles and the other resource half is the output. Two-wire: two
    such wires with the variable beam-splitter enabled between the A arm of
    the earlier wire and the B arm of the later wire (the delays of the
    measurement device bring those arms together). Beam-splitter orientations
    are the unique choice reproducing the published displacement matrices
    entrywise (see tests): resource pairs point from the measured half to the
    output half, the measurement beam-splitter from the input to the
    resource, and the variable beam-splitter from the A arm to the B arm.
    """
    if len(setting.angles) == 2:
        th_a, th_b = setting.angles
        circ = _LinearCircuit(n_inputs=1, n_resource=2)
        # modes: 0 = input, 1 = measured resource half, 2 = output half
        circ.add_resource_pair(out_mode=2, meas_mode=1)
        circ.beam_splitter(0, 1)
        circ.measure(0, th_a)
        circ.measure(1, th_b)
        return circ.eliminate([2])

    th_ak, th_bk, th_aj, th_bj = setting.angles
    circ = _LinearCircuit(n_inputs=2, n_resource=4)
    # modes: 0, 1 = wire inputs; 2, 3 = measured halves; 4, 5 = output halves
    circ.add_resource_pair(out_mode=4, meas_mode=2)
    circ.add_resource_pair(out_mode=5, meas_mode=3)
    circ.beam_splitter(0, 2)
    circ.beam_splitter(1, 3)
    circ.beam_splitter(0, 3)  # variable beam-splitter across the wires
    circ.measure(0, th_ak)
    circ.measure(2, th_bk)
    circ.measure(1, th_aj)
    circ.measure(3, th_bj)
    return circ.eliminate([4, 5])


def single_mode_gate(theta_a: float, theta_b: float) -> np.ndarray:
    """Reference form of the single-wire teleportation gate,
    R(theta_+) S(tan theta_-) R(theta_+) with theta_± = (±theta_a + theta_b)/2."""
    plus = (theta_a + theta_b) / 2.0
    minus = (-theta_a + theta_b) / 2.0
    return rotation(plus) @ squeeze(math.tan(minus)) @ rotation(plus)


def gate_noise_variance(setting: BasisSetting, r: float) -> float:
    """Variance of the ancilla-noise term per output quadrature for squeezed
    resources of variance e^{-2r}/2; symmetric across quadratures for all
    published settings."""
    gate = induced_gate(setting)
    sigma2 = math.exp(-2.0 * r) / 2.0
    per_quad = (gate.n_mat**2).sum(axis=1) * sigma2
    if np.ptp(per_quad) > _TOL * max(1.0, float(per_quad[0])):
        raise ValueError("gate noise is not quadrature symmetric for this setting")
    return float(per_quad[0])


# Published displacement matrices of the two-mode teleportation step
D_CZ_POST = np.array(
    [
        [-math.sqrt(5) / 2, 0, 1 / math.sqrt(2), math.sqrt(5) / 2],
        [-math.sqrt(5) / 2, -1 / math.sqrt(2), 0, -math.sqrt(5) / 2],
        [0, -math.sqrt(2), 0, 0],
        [0, 0, math.sqrt(2), 0],
    ]
)
D_CZ_PRE = np.array(
    [
        [0, -math.sqrt(2), 0, 0],
        [0, 0, -math.sqrt(2), 0],
        [math.sqrt(5) / 2, 0, -1 / math.sqrt(2), math.sqrt(5) / 2],
        [math.sqrt(5) / 2, -1 / math.sqrt(2), 0, -math.sqrt(5) / 2],
    ]
)
