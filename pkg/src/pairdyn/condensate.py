"""Condensate wave-functions and their momentum-space coefficients.

The condensate enters the dynamics only through its Fourier coefficients

    g_k = L**(-D/2) * integral( Psi0(x) * exp(-i k.x) dx )

evaluated here by midpoint quadrature on the B^D spatial grid, which a
centered DFT computes exactly.  The sample points are the cell midpoints
``x_j = (j + 1/2) * L/B - L/2``; for odd B this grid contains the origin
and is symmetric under x -> -x, so real fields give conjugate-symmetric
coefficients and real even fields give real coefficients, which is what
the downstream symmetry machinery relies on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .lattice import GridSpec, flatten_index

DEFAULT_SYMMETRY_TOL = 1e-10


class Symmetry(enum.Enum):
    """Symmetry class of the coefficient tensor, weakest to strongest."""

    GENERAL_COMPLEX = "general_complex"
    REAL_PSI = "real_psi"
    REAL_EVEN_PSI = "real_even_psi"
    UNIFORM = "uniform"

    @property
    def is_real_psi(self) -> bool:
        """True when the conjugation shortcut g_{-k} = conj(g_k) is available."""
        return self is not Symmetry.GENERAL_COMPLEX

    @property
    def is_real_even(self) -> bool:
        return self in (Symmetry.REAL_EVEN_PSI, Symmetry.UNIFORM)


@dataclass
class CondensateSpec:
    """What condensate to build: uniform, Thomas-Fermi, or explicit samples.

    ``rho0`` is the peak density (1/m^D), ``tf_radii`` the D Thomas-Fermi
    radii in meters, ``phase`` an optional array of phase samples theta(x)
    in radians on the spatial grid, and ``samples`` an explicit complex
    field for kind "grid_samples".
    """

    kind: str
    rho0: float = None
    tf_radii: tuple = None
    phase: np.ndarray = None
    samples: np.ndarray = None

    def validate(self, grid: GridSpec):
        if self.kind not in ("uniform", "thomas_fermi", "grid_samples"):
            raise ValidationError(f"condensate.kind unknown: {self.kind!r}")
        if self.kind in ("uniform", "thomas_fermi"):
            if self.rho0 is None or not self.rho0 > 0:
                raise ValidationError("condensate.rho0 must be > 0")
        if self.kind == "thomas_fermi":
            if self.tf_radii is None or len(self.tf_radii) != grid.D:
                raise ValidationError(
                    f"condensate.tf_radii must have length D={grid.D}"
                )
            if any(r <= 0 for r in self.tf_radii):
                raise ValidationError("condensate.tf_radii must all be > 0")
            if any(2.0 * r >= grid.L for r in self.tf_radii):
                raise ValidationError(
                    "condensate does not fit in the box (2*R >= L): "
                    "aliasing hazard; enlarge L or shrink the radii"
                )
        if self.kind == "grid_samples":
            if self.samples is None:
                raise ValidationError("condensate.samples required for grid_samples")
            if np.asarray(self.samples).size != grid.n_total:
                raise ValidationError(
                    f"condensate.samples has {np.asarray(self.samples).size} values, "
                    f"grid needs {grid.n_total}"
                )
        if self.phase is not None and np.asarray(self.phase).size != grid.n_total:
            raise ValidationError("condensate.phase must have one sample per site")


@dataclass
class FourierTensor:
    """Sparse momentum-space coefficients of the condensate wave-function.

    ``indices`` is an (nnz, D) int array of multi-indices in [-K, K]^D in
    increasing linear order, ``values`` the matching complex coefficients.
    Multi-indices outside the lattice are implicitly zero.
    """

    grid: GridSpec
    indices: np.ndarray
    values: np.ndarray
    symmetry: Symmetry
    leading_modulus: float

    @property
    def nnz(self) -> int:
        return len(self.values)

    def dense(self) -> np.ndarray:
        """Coefficients on the full (B,)*D grid (index = multi-index + K)."""
        out = np.zeros(self.grid.shape, dtype=complex)
        if self.nnz:
            out[tuple((self.indices + self.grid.K).T)] = self.values
        return out

    def value_at(self, n) -> complex:
        n = np.asarray(n)
        hit = np.all(self.indices == n, axis=1)
        if not hit.any():
            return 0.0 + 0.0j
        return complex(self.values[hit][0])


def spatial_axes(grid: GridSpec) -> list:
    """Midpoint sample coordinates per axis (length B each, meters)."""
    j = np.arange(grid.B)
    x = (j + 0.5) * grid.L / grid.B - grid.L / 2.0
    return [x] * grid.D


def build_condensate(spec: CondensateSpec, grid: GridSpec) -> np.ndarray:
    """Sample Psi0(x) = sqrt(rho0(x)) * exp(i theta(x)) on the spatial grid.

    Returns a complex array of shape (B,)*D.  Thomas-Fermi density is the
    inverted parabola rho0 * (1 - sum_j x_j^2/R_j^2) clipped at zero outside
    the ellipsoid.
    """
    spec.validate(grid)
    if spec.kind == "grid_samples":
        field_ = np.asarray(spec.samples, dtype=complex).reshape(grid.shape)
    elif spec.kind == "uniform":
        field_ = np.full(grid.shape, np.sqrt(spec.rho0), dtype=complex)
    else:
        axes = spatial_axes(grid)
        mesh = np.meshgrid(*axes, indexing="ij")
        r2 = sum(
            (mesh[j] / spec.tf_radii[j]) ** 2 for j in range(grid.D)
        )
        rho = spec.rho0 * np.clip(1.0 - r2, 0.0, None)
        field_ = np.sqrt(rho).astype(complex)
    if spec.phase is not None:
        field_ = field_ * np.exp(1j * np.asarray(spec.phase, dtype=float).reshape(grid.shape))
    return field_


def _midpoint_phases(grid: GridSpec) -> list:
    # exp(-i k x_j) = exp(-2*pi*i n j/B) * exp(i pi n (1 - 1/B)) per axis
    n = np.arange(-grid.K, grid.K + 1)
    return [np.exp(1j * np.pi * n * (1.0 - 1.0 / grid.B))] * grid.D


def _apply_axis_phases(arr: np.ndarray, phases: list, conj: bool = False) -> np.ndarray:
    out = arr
    for axis, ph in enumerate(phases):
        p = np.conj(ph) if conj else ph
        shape = [1] * arr.ndim
        shape[axis] = len(p)
        out = out * p.reshape(shape)
    return out


def fourier_coefficients(
    field: np.ndarray,
    grid: GridSpec,
    tol_sym: float = DEFAULT_SYMMETRY_TOL,
) -> FourierTensor:
    """Momentum-space coefficients of a sampled field, with symmetry class.

    Midpoint quadrature of the defining integral: g_n is the centered DFT of
    the samples times the midpoint phase factors, scaled by
    ``L**(-D/2) * (L/B)**D``.  The symmetry class is the strongest of
    {uniform, real_even_psi, real_psi, general_complex} that holds within
    ``tol_sym`` relative to the leading modulus.  Entries below 1e-13 of the
    leading modulus are DFT roundoff, not signal, and are not stored.
    """
    field = np.asarray(field, dtype=complex)
    if field.size != grid.n_total:
        raise ValidationError(
            f"field has {field.size} samples, grid needs {grid.n_total}"
        )
    field = field.reshape(grid.shape)
    G = np.fft.fftshift(np.fft.fftn(field))
    G = _apply_axis_phases(G, _midpoint_phases(grid))
    G *= grid.L ** (-grid.D / 2.0) * (grid.L / grid.B) ** grid.D

    leading = float(np.abs(G).max())
    symmetry = classify_symmetry(G, leading, tol_sym)

    flat = G.reshape(-1)
    keep = np.flatnonzero(np.abs(flat) > 1e-13 * leading)
    indices = grid.multi_indices()[keep]
    return FourierTensor(
        grid=grid,
        indices=indices,
        values=flat[keep].copy(),
        symmetry=symmetry,
        leading_modulus=leading,
    )


def classify_symmetry(dense: np.ndarray, leading: float, tol_sym: float) -> Symmetry:
    """Strongest symmetry class a dense coefficient array satisfies."""
    if leading == 0.0:
        return Symmetry.GENERAL_COMPLEX
    flipped = dense[(slice(None, None, -1),) * dense.ndim]
    conj_sym = np.abs(flipped - np.conj(dense)).max() <= tol_sym * leading
    if not conj_sym:
        return Symmetry.GENERAL_COMPLEX
    if np.abs(dense.imag).max() <= tol_sym * leading:
        above = np.abs(dense) > tol_sym * leading
        center = (dense.shape[0] // 2,) * dense.ndim
        if above.sum() == 1 and above[center]:
            return Symmetry.UNIFORM
        return Symmetry.REAL_EVEN_PSI
    return Symmetry.REAL_PSI


def truncate_coefficients(tensor: FourierTensor, rel_threshold: float) -> FourierTensor:
    """Drop entries with modulus below ``rel_threshold * leading_modulus``.

    Idempotent at fixed threshold; the modulus criterion is symmetric under
    k -> -k for real fields, so the symmetry class survives.
    """
    if not 0.0 <= rel_threshold < 1.0:
        raise ValidationError(
            f"rel_threshold must be in [0, 1), got {rel_threshold}"
        )
    keep = np.abs(tensor.values) >= rel_threshold * tensor.leading_modulus
    return FourierTensor(
        grid=tensor.grid,
        indices=tensor.indices[keep],
        values=tensor.values[keep],
        symmetry=tensor.symmetry,
        leading_modulus=tensor.leading_modulus,
    )


def reconstruct_density(tensor: FourierTensor, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`fourier_coefficients` (up to truncation loss)."""
    if tensor.grid.shape != grid.shape:
        raise ValidationError("tensor grid does not match the requested grid")
    G = tensor.dense()
    G = _apply_axis_phases(G, _midpoint_phases(grid), conj=True)
    G /= grid.L ** (-grid.D / 2.0) * (grid.L / grid.B) ** grid.D
    return np.fft.ifftn(np.fft.ifftshift(G))


def write_field_samples(path, field: np.ndarray, grid: GridSpec):
    """Write a sampled field as text: one ``n_1 .. n_D re im`` line per site."""
    flat = np.asarray(field, dtype=complex).reshape(-1)
    idx = grid.multi_indices()
    with open(path, "w") as fh:
        for n, v in zip(idx, flat):
            coords = " ".join(str(int(c)) for c in n)
            fh.write(f"{coords} {float(v.real)!r} {float(v.imag)!r}\n")


def read_field_samples(path, grid: GridSpec) -> np.ndarray:
    """Read a field written by :func:`write_field_samples` (flatten order)."""
    flat = np.zeros(grid.n_total, dtype=complex)
    seen = np.zeros(grid.n_total, dtype=bool)
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != grid.D + 2:
                raise ValidationError(
                    f"{path}:{lineno}: expected {grid.D} indices + re + im"
                )
            n = [int(p) for p in parts[: grid.D]]
            m = flatten_index(n, grid)
            flat[m] = float(parts[-2]) + 1j * float(parts[-1])
            seen[m] = True
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise ValidationError(f"{path}: missing sample for linear index {missing}")
    return flat


def write_tensor(path, tensor: FourierTensor):
    """Write nonzero coefficients in the field-sample text format."""
    with open(path, "w") as fh:
        for n, v in zip(tensor.indices, tensor.values):
            coords = " ".join(str(int(c)) for c in n)
            fh.write(f"{coords} {float(v.real)!r} {float(v.imag)!r}\n")


def tensor_from_entries(
    grid: GridSpec,
    entries: dict,
    tol_sym: float = DEFAULT_SYMMETRY_TOL,
) -> FourierTensor:
    """Build a tensor from an explicit {multi-index: coefficient} mapping."""
    dense = np.zeros(grid.shape, dtype=complex)
    for n, v in entries.items():
        n = np.atleast_1d(np.asarray(n, dtype=int))
        if n.size != grid.D or np.abs(n).max() > grid.K:
            raise ValidationError(f"entry index {tuple(n)} outside the lattice")
        dense[tuple(n + grid.K)] = v
    leading = float(np.abs(dense).max())
    symmetry = classify_symmetry(dense, leading, tol_sym)
    flat = dense.reshape(-1)
    keep = np.flatnonzero(flat != 0.0)
    return FourierTensor(
        grid=grid,
        indices=grid.multi_indices()[keep],
        values=flat[keep].copy(),
        symmetry=symmetry,
        leading_modulus=leading,
    )
