"""Rotated surface code geometry of odd distance d: qubit roles, stabilizer
plaquettes, the 4-step two-mode gate schedule with its gate variants, and the
Fourier-byproduct cancellation check.

Data qubits sit on a d x d grid (row r, col c, id = r*d + c). Stabilizer
cells are indexed by their north-west data corner (R, C); cells with R+C odd
host measure-Z ancillas, cells with R+C even measure-X. Top/bottom boundaries
carry X half-cells only, left/right boundaries Z half-cells only. Gate order
within a round follows the zigzag pattern: measure-Z couples its corners in
(NE, SE, NW, SW) order over steps 1-4, measure-X in (NE, NW, SE, SW) order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Role(enum.Enum):
    DATA_ODD = "data_odd"
    DATA_EVEN = "data_even"
    MEASURE_Z = "measure_z"
    MEASURE_X = "measure_x"


# Eq.-10 byproduct placement: which Fourier factors dress the bare gate, and
# on which side. Slots are (earlier temporal mode, later temporal mode);
# exponents count powers of F (F = +1, F-dagger = -1).
_BYPRODUCT_SLOTS = {
    "post_fdag_f": (-1, +1),  # (F† ⊗ F) C_Z(1)        steps 1, 3
    "pre_f_fdag": (+1, -1),   # C_Z(1) (F ⊗ F†)        steps 2, 4
    "post_f_fdag": (+1, -1),  # (F ⊗ F†) C_X(±1)       steps 1, 3
    "pre_fdag_f": (-1, +1),   # C_X(±1) (F† ⊗ F)       steps 2, 4
}

_CZ_BYPRODUCT = {1: "post_fdag_f", 2: "pre_f_fdag", 3: "post_fdag_f", 4: "pre_f_fdag"}
_CX_BYPRODUCT = {1: "post_f_fdag", 2: "pre_fdag_f", 3: "post_f_fdag", 4: "pre_fdag_f"}
_CX_SIGN = {1: +1, 2: -1, 3: -1, 4: +1}

# corner order over steps 1..4 per stabilizer type
_Z_ORDER = ("ne", "se", "nw", "sw")
_X_ORDER = ("ne", "nw", "se", "sw")
_CORNER_DELTA = {"nw": (0, 0), "ne": (0, 1), "sw": (1, 0), "se": (1, 1)}
# corners east/south of the plaquette centre come earlier in the machine's
# temporal ordering, so there the measure qubit is the earlier tensor slot
_MEASURE_EARLIER = {"ne": True, "se": True, "nw": False, "sw": False}


@dataclass(frozen=True)
class GateVariant:
    base: str            # "cz" or "cx"
    sign: int            # coupling rate, +1 or -1
    byproduct: str       # key into _BYPRODUCT_SLOTS
    measure_earlier: bool

    def f_exponents(self) -> tuple[int, int]:
        """(measure, data) Fourier exponents of the byproduct factors."""
        first, second = _BYPRODUCT_SLOTS[self.byproduct]
        return (first, second) if self.measure_earlier else (second, first)


@dataclass(frozen=True)
class Gate:
    measure: int
    data: int
    variant: GateVariant


@dataclass
class SurfaceLayout:
    distance: int
    n_data: int
    n_mz: int
    n_mx: int
    roles: list[Role]                       # indexed by qubit id
    positions: list[tuple[int, int]]        # doubled coords, data at (2r, 2c)
    schedule: dict[int, list[Gate]]         # step 1..4
    plaquettes: dict[int, tuple[int, ...]]  # measure id -> data ids
    step_of: dict[tuple[int, int], int]     # (measure, data) -> step
    logical_z_support: tuple[int, ...]      # top row of data qubits
    logical_x_support: tuple[int, ...]      # left column of data qubits

    @property
    def n_qubits(self) -> int:
        return self.n_data + self.n_mz + self.n_mx

    @property
    def mz_ids(self) -> range:
        return range(self.n_data, self.n_data + self.n_mz)

    @property
    def mx_ids(self) -> range:
        return range(self.n_data + self.n_mz, self.n_qubits)

    def data_id(self, r: int, c: int) -> int:
        return r * self.distance + c

    def gates_of(self, qubit: int) -> list[tuple[int, Gate]]:
        """(step, gate) pairs involving the qubit, in step order."""
        out = []
        for step in (1, 2, 3, 4):
            for g in self.schedule[step]:
                if qubit in (g.measure, g.data):
                    out.append((step, g))
        return out


def _cells(d: int):
    """All stabilizer cells (R, C, type) with their in-grid corner sets."""
    for R in range(-1, d):
        for C in range(-1, d):
            kind = "x" if (R + C) % 2 == 0 else "z"
            corners = {
                name: (R + dr, C + dc)
                for name, (dr, dc) in _CORNER_DELTA.items()
                if 0 <= R + dr < d and 0 <= C + dc < d
            }
            if len(corners) == 4:
                yield R, C, kind, corners
            elif len(corners) == 2:
                # boundary half-cells: X on top/bottom rows, Z on left/right
                if (R in (-1, d - 1)) and kind == "x":
                    yield R, C, kind, corners
                elif (C in (-1, d - 1)) and kind == "z":
                    yield R, C, kind, corners


def build_layout(d: int) -> SurfaceLayout:
    """Construct the distance-d rotated surface code with its gate schedule."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {d}")

    n_data = d * d
    roles: list[Role] = []
    positions: list[tuple[int, int]] = []
    for r in range(d):
        for c in range(d):
            roles.append(Role.DATA_ODD if (r + c) % 2 == 0 else Role.DATA_EVEN)
            positions.append((2 * r, 2 * c))

    z_cells = sorted((R, C, corners) for R, C, kind, corners in _cells(d) if kind == "z")
    x_cells = sorted((R, C, corners) for R, C, kind, corners in _cells(d) if kind == "x")

    schedule: dict[int, list[Gate]] = {1: [], 2: [], 3: [], 4: []}
    plaquettes: dict[int, tuple[int, ...]] = {}
    step_of: dict[tuple[int, int], int] = {}

    def add_measure(cells, role, order, base):
        first_id = len(roles)
        for local, (R, C, corners) in enumerate(cells):
            mid = first_id + local
            roles.append(role)
            positions.append((2 * R + 1, 2 * C + 1))
            support = []
            for step, corner in enumerate(order, start=1):
                if corner not in corners:
                    continue
                r, c = corners[corner]
                did = r * d + c
                support.append(did)
                variant = GateVariant(
                    base=base,
                    sign=_CX_SIGN[step] if base == "cx" else +1,
                    byproduct=(_CZ_BYPRODUCT if base == "cz" else _CX_BYPRODUCT)[step],
                    measure_earlier=_MEASURE_EARLIER[corner],
                )
                schedule[step].append(Gate(mid, did, variant))
                step_of[(mid, did)] = step
            plaquettes[mid] = tuple(sorted(support))
        return first_id

    add_measure(z_cells, Role.MEASURE_Z, _Z_ORDER, "cz")
    add_measure(x_cells, Role.MEASURE_X, _X_ORDER, "cx")

    layout = SurfaceLayout(
        distance=d,
        n_data=n_data,
        n_mz=len(z_cells),
        n_mx=len(x_cells),
        roles=roles,
        positions=positions,
        schedule=schedule,
        plaquettes=plaquettes,
        step_of=step_of,
        logical_z_support=tuple(range(0, d)),
        logical_x_support=tuple(range(0, n_data, d)),
    )
    _validate(layout)
    return layout


def _validate(layout: SurfaceLayout) -> None:
    d = layout.distance
    assert layout.n_mz == layout.n_mx == (d * d - 1) // 2
    for step, gates in layout.schedule.items():
        seen: set[int] = set()
        for g in gates:
            assert g.measure not in seen and g.data not in seen, (
                f"qubit used twice in step {step}"
            )
            seen.update((g.measure, g.data))
            mp, dp = layout.positions[g.measure], layout.positions[g.data]
            assert abs(mp[0] - dp[0]) == 1 and abs(mp[1] - dp[1]) == 1, "non-adjacent gate"
            want = "cz" if layout.roles[g.measure] is Role.MEASURE_Z else "cx"
            assert g.variant.base == want
    for mid, support in layout.plaquettes.items():
        assert len(support) in (2, 4)
        for did in support:
            assert (mid, did) in layout.step_of
    # logical operators commute with every stabilizer and overlap once
    for mid in layout.mz_ids:
        assert len(set(layout.plaquettes[mid]) & set(layout.logical_x_support)) % 2 == 0
    for mid in layout.mx_ids:
        assert len(set(layout.plaquettes[mid]) & set(layout.logical_z_support)) % 2 == 0
    assert len(set(layout.logical_z_support) & set(layout.logical_x_support)) == 1


def fourier_byproduct_check(layout: SurfaceLayout) -> bool:
    """Verify the Fourier byproducts of the schedule cancel pairwise.

    Composing the Eq.-10 byproduct factors over step pairs (1,2) and (3,4),
    every qubit with gates in both steps of a pair must accumulate +identity
    on measure-Z and odd data qubits (F F-dagger) and -identity (F F or
    F-dagger F-dagger) on measure-X and even data qubits. Boundary qubits
    with a single gate in a pair are exempt.
    """
    exps: dict[int, dict[int, int]] = {q: {} for q in range(layout.n_qubits)}
    for step in (1, 2, 3, 4):
        for g in layout.schedule[step]:
            em, ed = g.variant.f_exponents()
            exps[g.measure][step] = exps[g.measure].get(step, 0) + em
            exps[g.data][step] = exps[g.data].get(step, 0) + ed
    plus = (Role.MEASURE_Z, Role.DATA_ODD)
    for q, per_step in exps.items():
        want = 0 if layout.roles[q] in plus else 2
        for a, b in ((1, 2), (3, 4)):
            if a in per_step and b in per_step:
                if (per_step[a] + per_step[b]) % 4 != want:
                    return False
    return True


def syndrome_matrix(layout: SurfaceLayout, kind: str) -> np.ndarray:
    """Binary parity-check matrix of the Z- or X-type stabilizers over data
    qubits (rows in local measure-qubit order)."""
    ids = layout.mz_ids if kind == "z" else layout.mx_ids
    mat = np.zeros((len(ids), layout.n_data), dtype=np.uint8)
    for row, mid in enumerate(ids):
        for did in layout.plaquettes[mid]:
            mat[row, did] = 1
    return mat
