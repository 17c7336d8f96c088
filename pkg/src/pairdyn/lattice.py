"""D-dimensional momentum lattice and its flattening bijection.

The lattice holds ``B = 2K+1`` points per axis with integer coordinates
``n_j`` in ``[-K, K]``; physical momenta are ``k = dk * n`` with
``dk = 2*pi/L``.  Multi-indices map to linear indices by base-B digits,
most significant axis first, so axis 1 is the slowest-varying.  Linear
indices are 0-based everywhere in this package (the classic convention
writes the same map 1-based; subtract one).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the cubic momentum lattice.

    Exactly one of ``L`` (box length, meters) or ``dk`` (lattice spacing,
    1/meters) must be supplied; the other is derived so that ``dk * L = 2*pi``
    holds to machine precision.
    """

    D: int
    K: int
    L: float = None
    dk: float = None

    def __post_init__(self):
        if self.D < 1:
            raise ValidationError(f"grid.D must be >= 1, got {self.D}")
        if self.K < 0:
            raise ValidationError(f"grid.K must be >= 0, got {self.K}")
        if (self.L is None) == (self.dk is None):
            raise ValidationError("grid: exactly one of L or dk must be given")
        if self.L is None:
            object.__setattr__(self, "L", TWO_PI / self.dk)
        else:
            object.__setattr__(self, "dk", TWO_PI / self.L)
        if not (self.L > 0.0):
            raise ValidationError(f"grid.L must be positive, got {self.L}")

    @property
    def B(self) -> int:
        """Points per axis, always odd."""
        return 2 * self.K + 1

    @property
    def n_total(self) -> int:
        return self.B**self.D

    @property
    def shape(self) -> tuple:
        return (self.B,) * self.D

    def multi_indices(self) -> np.ndarray:
        """All multi-indices as an (n_total, D) int array, in linear order."""
        axes = np.indices(self.shape).reshape(self.D, -1).T
        return axes - self.K


def flatten_index(n, grid: GridSpec) -> int:
    """Map a multi-index in [-K, K]^D to its 0-based linear index.

    The map is ``sum_j (n_j + K) * B**(D-j-1)``: a change of base from B
    to 10, strictly increasing in lexicographic order of the multi-index.
    """
    n = np.asarray(n)
    if n.shape[-1] != grid.D:
        raise ValidationError(
            f"multi-index has {n.shape[-1]} components, grid is {grid.D}-dimensional"
        )
    bad = np.abs(n) > grid.K
    if np.any(bad):
        axis = int(np.argwhere(bad)[0][-1])
        raise ValidationError(
            f"multi-index component {n.reshape(-1, grid.D)[0] if n.ndim > 1 else n} "
            f"out of range [-{grid.K}, {grid.K}] on axis {axis + 1}"
        )
    weights = grid.B ** np.arange(grid.D - 1, -1, -1)
    m = (n + grid.K) @ weights
    return int(m) if np.ndim(m) == 0 else m


def unflatten_index(m, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`flatten_index`.

    Satisfies ``unflatten_index(n_total - 1 - m) == -unflatten_index(m)``.
    """
    m_arr = np.asarray(m)
    if np.any((m_arr < 0) | (m_arr >= grid.n_total)):
        raise ValidationError(
            f"linear index {m} out of range [0, {grid.n_total})"
        )
    digits = []
    rem = m_arr.copy()
    for j in range(grid.D - 1, -1, -1):
        digits.append(rem % grid.B - grid.K)
        rem = rem // grid.B
    out = np.stack(digits[::-1], axis=-1)
    return out


def negate_index(m, grid: GridSpec):
    """Linear index of the negated multi-index: n_total - 1 - m."""
    m_arr = np.asarray(m)
    if np.any((m_arr < 0) | (m_arr >= grid.n_total)):
        raise ValidationError(f"linear index {m} out of range [0, {grid.n_total})")
    out = grid.n_total - 1 - m_arr
    return int(out) if np.ndim(out) == 0 else out


def momentum_of(m, grid: GridSpec) -> np.ndarray:
    """Physical momentum vector (1/meters) of a linear index."""
    return grid.dk * unflatten_index(m, grid)


def all_momenta(grid: GridSpec) -> np.ndarray:
    """(n_total, D) array of physical momenta in linear-index order."""
    return grid.dk * grid.multi_indices()
