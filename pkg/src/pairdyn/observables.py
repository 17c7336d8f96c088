"""Physical observables from computed propagator rows.

Starting from atomic vacuum, every first-order moment is a contraction of
two rows of the propagator blocks: the normal moment is the inner product
of two coupling-block rows, the anomalous moment pairs a diagonal-block
row with a coupling-block row, and the Glauber second-order correlations
are rational combinations of those.  Moments between other spin pairings
vanish identically and are never computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .condensate import Symmetry
from .errors import ValidationError
from .lattice import GridSpec, flatten_index, negate_index, unflatten_index
from .propagator import BlockRow, KrylovConfig, MRows, compute_rows
from .system_matrix import SystemOperator

OCCUPATION_FLOOR = 1e-30


def _check_same_time(row_a: MRows, row_b: MRows):
    if row_a.time != row_b.time:
        raise ValidationError(
            f"rows are at different times ({row_a.time} vs {row_b.time})"
        )


def normal_moment(row_k: MRows, row_k2: MRows) -> complex:
    """<a_k^dag a_k'> (spin independent): conj(M12 row k) . (M12 row k')."""
    _check_same_time(row_k, row_k2)
    return complex(np.vdot(row_k.m12_row, row_k2.m12_row))


def occupation(row_k: MRows) -> float:
    """n_k = sum |M12 row k|^2, real and nonnegative.

    Uses the same inner-product reduction as :func:`normal_moment` so the
    same-spin correlation at coinciding momenta is exactly 1 + q.
    """
    return float(np.real(np.vdot(row_k.m12_row, row_k.m12_row)))


def anomalous_moment(row_k: MRows, row_k2: MRows) -> complex:
    """<a_{k,1} a_{k',2}>: (M11 row k) . conj(M21 row k').

    For at least real condensates M21 = conj(M12) so the computed upper
    rows suffice; a general complex condensate needs the lower block-row of
    k' computed explicitly (MRows.m21 raises otherwise).
    """
    _check_same_time(row_k, row_k2)
    return complex(np.dot(row_k.m11_row, np.conj(row_k2.m21())))


def g2_same_spin(row_k: MRows, row_k2: MRows, q: int) -> float:
    """Glauber correlation of two same-spin atoms.

    1 + q |n_{k,k'}|^2 / (n_k n_k'); exactly 1 + q at coinciding momenta.
    Returns NaN (an explicit undefined marker downstream) when either
    occupation is below the underflow floor.
    """
    n_k = occupation(row_k)
    n_k2 = occupation(row_k2)
    if n_k < OCCUPATION_FLOOR or n_k2 < OCCUPATION_FLOOR:
        return float("nan")
    n_cross = normal_moment(row_k, row_k2)
    return float(1.0 + q * abs(n_cross) ** 2 / (n_k * n_k2))


def g2_opposite_spin(row_k: MRows, row_k2: MRows, q: int) -> float:
    """Glauber correlation of two opposite-spin atoms.

    1 + |m_{k,k'}|^2 / (n_k n_k'), always >= 1.
    """
    n_k = occupation(row_k)
    n_k2 = occupation(row_k2)
    if n_k < OCCUPATION_FLOOR or n_k2 < OCCUPATION_FLOOR:
        return float("nan")
    m = anomalous_moment(row_k, row_k2)
    return float(1.0 + abs(m) ** 2 / (n_k * n_k2))


@dataclass
class MomentTable:
    """First-order moments for requested momentum pairs at one time."""

    time: float
    pairs: list = field(default_factory=list)  # (m, m2, n complex, m complex)
    occupations: dict = field(default_factory=dict)  # linear index -> n_k

    def add_pair(self, m: int, m2: int, n: complex, anomalous: complex):
        self.pairs.append((m, m2, n, anomalous))


def moment_table(rows: dict, pairs, t: float, lower_rows: dict = None) -> MomentTable:
    """Assemble normal/anomalous moments for (m, m2) linear-index pairs.

    ``rows`` maps linear index -> upper MRows; ``lower_rows`` (only needed
    for general complex condensates) maps linear index -> lower MRows.
    """
    table = MomentTable(time=t)
    involved = set()
    for m, m2 in pairs:
        involved.update((m, m2))
    for m in sorted(involved):
        table.occupations[m] = occupation(rows[m])
    for m, m2 in pairs:
        row_b = rows[m2]
        if lower_rows and m2 in lower_rows:
            row_b = MRows(
                time=row_b.time,
                row_index=m2,
                block=row_b.block,
                symmetry=row_b.symmetry,
                m11_row=row_b.m11_row,
                m12_row=row_b.m12_row,
                m21_row=lower_rows[m2].m21_row,
                m22_row=lower_rows[m2].m22_row,
            )
        table.add_pair(
            m, m2, normal_moment(rows[m], rows[m2]), anomalous_moment(rows[m], row_b)
        )
    return table


def total_atom_number(
    op: SystemOperator,
    t: float,
    cfg: KrylovConfig = KrylovConfig(),
    threads: int = 1,
) -> float:
    """Atom number per spin: sum of n_k over the full lattice.

    Performs the complete row sweep (the squared Frobenius norm of the
    coupling block); the symmetry class trims the propagated set, and the
    reduction is an index-ordered pairwise sum for determinism.
    """
    norms = occupation_sweep(op, t, cfg, threads=threads)
    return float(np.sum(norms))


def occupation_sweep(
    op: SystemOperator,
    t: float,
    cfg: KrylovConfig = KrylovConfig(),
    threads: int = 1,
) -> np.ndarray:
    """n_k for every lattice index, as an array in linear-index order.

    Streams one propagated row at a time and keeps only its squared norm
    (row reconstruction by reversal or conjugation preserves norms), so the
    sweep runs in O(n) memory however large the grid.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .propagator import minimal_row_set, rows_of_M

    n = op.n
    requested = [(BlockRow.UPPER, m) for m in range(n)]
    plan = minimal_row_set(requested, op.symmetry, n)

    def norm_of(key):
        return occupation(rows_of_M(op, [key], t, cfg)[0])

    if threads > 1 and len(plan.computed) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            norms = list(pool.map(norm_of, plan.computed))
    else:
        norms = [norm_of(key) for key in plan.computed]
    pos = {key: i for i, key in enumerate(plan.computed)}
    out = np.empty(n, dtype=float)
    for m in range(n):
        key = (BlockRow.UPPER, m)
        src = key if key in pos else plan.recipe[key][0]
        out[m] = norms[pos[src]]
    return out


@dataclass
class ClSlice:
    """Collinear correlation slice along one axis through a reference mode."""

    time: float
    axis: int
    k_ref: np.ndarray  # multi-index of the reference mode
    k_values: np.ndarray  # varying physical momentum component (1/m)
    g2: np.ndarray  # same-spin g2 against the reference mode (NaN = undefined)
    occupations: np.ndarray  # n_k along the slice


def cl_slice(
    op: SystemOperator,
    direction_axis: int,
    k_ref,
    t: float,
    cfg: KrylovConfig = KrylovConfig(),
    threads: int = 1,
) -> ClSlice:
    """Same-spin g2 along the lattice line through k_ref parallel to an axis.

    The line holds every component of k_ref fixed except ``direction_axis``,
    which runs over the whole lattice; the reference row is one of the line's
    own rows.  Emits the points in axis order.
    """
    grid = op.grid
    if not 0 <= direction_axis < grid.D:
        raise ValidationError(
            f"axis {direction_axis} out of range for D={grid.D}"
        )
    k_ref = np.asarray(k_ref, dtype=int)
    m_ref = flatten_index(k_ref, grid)
    line = []
    for c in range(-grid.K, grid.K + 1):
        nvec = k_ref.copy()
        nvec[direction_axis] = c
        line.append(flatten_index(nvec, grid))
    requested = [(BlockRow.UPPER, m) for m in sorted(set(line + [m_ref]))]
    rows = compute_rows(op, requested, t, cfg, threads=threads)
    ref_row = rows[(BlockRow.UPPER, m_ref)]
    q = op.params.q
    g2 = np.array([g2_same_spin(rows[(BlockRow.UPPER, m)], ref_row, q) for m in line])
    occ = np.array([occupation(rows[(BlockRow.UPPER, m)]) for m in line])
    k_values = grid.dk * np.arange(-grid.K, grid.K + 1, dtype=float)
    return ClSlice(
        time=t,
        axis=direction_axis,
        k_ref=k_ref,
        k_values=k_values,
        g2=g2,
        occupations=occ,
    )
