"""Implicit 2n x 2n system matrix for the linear pair-production dynamics.

The matrix is never materialized in production.  Its four n x n blocks are

    A11 = diag(-i delta),   A12(mR, mC) = q * gamma[f^-1(mR) + f^-1(mC)],
    A22 = conj(A11),        A21 = q * conj(A12),

where ``delta`` are dimensionless kinetic detunings and ``gamma`` the
dimensionless coupling coefficients (time measured in units of t0).  The
off-diagonal blocks depend only on the *sum* of row and column multi-indices:
a D-fold nested block-Hankel structure whose action on a vector is a
correlation, evaluated either directly over the stored sparse coefficients
or as an FFT convolution on a zero-padded grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .condensate import FourierTensor, Symmetry
from .errors import ValidationError
from .lattice import GridSpec

DENSE_CAP_DEFAULT = 4096
_NORM_SEED = 20250810


@dataclass(frozen=True)
class PhysicalParams:
    """Physical constants of a run, SI units.

    q = -1 for fermionic atom pairs, +1 for bosonic; m_a the atomic mass
    (kg); Omega the dissociation detuning (1/s, negative for spontaneous
    dissociation); chi the conversion coupling (m^{D/2}/s); t0 the
    characteristic time (s) used to make the dynamics dimensionless.
    """

    q: int
    m_a: float
    Omega: float
    chi: float
    t0: float
    hbar: float = 1.0545718176461565e-34

    def __post_init__(self):
        if self.q not in (-1, 1):
            raise ValidationError(f"physics.q must be -1 or +1, got {self.q}")
        if not self.m_a > 0:
            raise ValidationError("physics.m_a must be > 0")
        if self.chi < 0:
            raise ValidationError("physics.chi must be >= 0")
        if not self.t0 > 0:
            raise ValidationError("physics.t0 must be > 0")

    @property
    def resonance_momentum(self) -> float:
        """|k| where the kinetic detuning vanishes: sqrt(2 m |Omega| / hbar)."""
        return float(np.sqrt(2.0 * self.m_a * abs(self.Omega) / self.hbar))


class _FFTPlan:
    """Cached FFT data for the Hankel correlation on a zero-padded grid.

    The kernel box is the hull of the stored support and the origin, so the
    read window of the padded linear convolution never wraps.
    """

    def __init__(self, grid: GridSpec, indices: np.ndarray, values: np.ndarray):
        B, D = grid.B, grid.D
        if len(values):
            lo = np.minimum(indices.min(axis=0), 0)
            hi = np.maximum(indices.max(axis=0), 0)
        else:
            lo = np.zeros(D, dtype=int)
            hi = np.zeros(D, dtype=int)
        span = hi - lo + 1
        self.pad_shape = tuple(
            scipy.fft.next_fast_len(B + int(s) - 1) for s in span
        )
        kernel = np.zeros(self.pad_shape, dtype=complex)
        if len(values):
            kernel[tuple((indices - lo).T)] = values
        self.khat = scipy.fft.fftn(kernel, workers=1)
        if np.abs(kernel.imag).max() == 0.0:
            self.khat_conj = self.khat
        else:
            kernel_c = np.zeros(self.pad_shape, dtype=complex)
            kernel_c[tuple((indices - lo).T)] = np.conj(values)
            self.khat_conj = scipy.fft.fftn(kernel_c, workers=1)
        # read window: result index = input index - lo per axis
        self.out_slices = tuple(
            slice(-int(l), -int(l) + B) for l in lo
        )

    def correlate_pair(self, x_for_plain: np.ndarray, x_for_conj: np.ndarray):
        """Hankel products (plain kernel on first input, conj on second)."""
        batch = np.zeros((2,) + self.pad_shape, dtype=complex)
        flip = (slice(None, None, -1),) * x_for_plain.ndim
        embed = tuple(slice(0, s) for s in x_for_plain.shape)
        batch[(0,) + embed] = x_for_plain[flip]
        batch[(1,) + embed] = x_for_conj[flip]
        axes = tuple(range(1, 1 + x_for_plain.ndim))
        fhat = scipy.fft.fftn(batch, axes=axes, workers=1)
        fhat[0] *= self.khat
        fhat[1] *= self.khat_conj
        conv = scipy.fft.ifftn(fhat, axes=axes, workers=1)
        return conv[(0,) + self.out_slices], conv[(1,) + self.out_slices]


class SystemOperator:
    """Matrix-free representation of the dimensionless system matrix A.

    Immutable after construction; ``apply`` allocates its own scratch so
    concurrent applies on distinct vectors are safe.
    """

    def __init__(
        self,
        grid: GridSpec,
        params: PhysicalParams,
        delta: np.ndarray,
        coupling_indices: np.ndarray,
        coupling_values: np.ndarray,
        symmetry: Symmetry,
        matvec_mode: str = "auto",
    ):
        if matvec_mode not in ("auto", "direct", "fft"):
            raise ValidationError(f"matvec_mode unknown: {matvec_mode!r}")
        self.grid = grid
        self.params = params
        self.delta = np.asarray(delta, dtype=float)
        self.coupling_indices = np.asarray(coupling_indices, dtype=int).reshape(-1, grid.D)
        self.coupling_values = np.asarray(coupling_values, dtype=complex)
        self.symmetry = symmetry
        if matvec_mode == "auto":
            matvec_mode = "fft" if self.nnz > grid.n_total / 8 else "direct"
        self.matvec_mode = matvec_mode
        self._fft_plan = (
            _FFTPlan(grid, self.coupling_indices, self.coupling_values)
            if matvec_mode == "fft"
            else None
        )
        self._norm_est = None
        self._norm_est = self._power_iteration_norm()

    @property
    def n(self) -> int:
        return self.grid.n_total

    @property
    def nnz(self) -> int:
        return len(self.coupling_values)

    @property
    def norm_est(self) -> float:
        return self._norm_est

    @property
    def fft_pad_shape(self):
        return self._fft_plan.pad_shape if self._fft_plan is not None else None

    # -- matvec ---------------------------------------------------------

    def _hankel_direct(self, x: np.ndarray, conj_kernel: bool) -> np.ndarray:
        """y[n] = sum_s gamma_s * x[s - n], via shifted slices of flip(x)."""
        B = self.grid.B
        y = np.zeros(self.grid.shape, dtype=complex)
        xf = x[(slice(None, None, -1),) * self.grid.D]
        values = np.conj(self.coupling_values) if conj_kernel else self.coupling_values
        for s, g in zip(self.coupling_indices, values):
            dst = tuple(slice(max(0, c), min(B, B + c)) for c in s)
            src = tuple(slice(max(0, -c), min(B, B - c)) for c in s)
            y[dst] += g * xf[src]
        return y

    def _hankel_pair(self, x_for_plain: np.ndarray, x_for_conj: np.ndarray):
        if self._fft_plan is not None:
            return self._fft_plan.correlate_pair(x_for_plain, x_for_conj)
        return (
            self._hankel_direct(x_for_plain, conj_kernel=False),
            self._hankel_direct(x_for_conj, conj_kernel=True),
        )

    def apply(self, v: np.ndarray, transpose: bool = False) -> np.ndarray:
        """A @ v (or A.T @ v).  v has length 2n.

        The transpose swaps the off-diagonal blocks, which is exact because
        the Hankel blocks are symmetric and the diagonals are diagonal.
        """
        n = self.n
        v = np.asarray(v)
        if v.shape != (2 * n,):
            raise ValidationError(f"vector has shape {v.shape}, expected ({2 * n},)")
        v1 = v[:n].reshape(self.grid.shape)
        v2 = v[n:].reshape(self.grid.shape)
        q = self.params.q
        if not transpose:
            h_top, h_bot = self._hankel_pair(v2, v1)
            c_top, c_bot = q, 1.0
        else:
            h_bot, h_top = self._hankel_pair(v1, v2)
            c_top, c_bot = 1.0, q
        delta = self.delta.reshape(self.grid.shape)
        out = np.empty(2 * n, dtype=complex)
        out[:n] = (-1j * delta * v1 + c_top * h_top).reshape(-1)
        out[n:] = (1j * delta * v2 + c_bot * h_bot).reshape(-1)
        return out

    # -- dense oracle ----------------------------------------------------

    def dense_coupling_block(self) -> np.ndarray:
        """A12 as a dense n x n array (oracle use)."""
        n, K, D = self.n, self.grid.K, self.grid.D
        gamma_dense = np.zeros(self.grid.shape, dtype=complex)
        if self.nnz:
            gamma_dense[tuple((self.coupling_indices + K).T)] = self.coupling_values
        midx = self.grid.multi_indices()
        out = np.zeros((n, n), dtype=complex)
        block = max(1, 2**22 // max(n, 1))
        for start in range(0, n, block):
            rows = midx[start : start + block]
            sums = rows[:, None, :] + midx[None, :, :]
            valid = np.all(np.abs(sums) <= K, axis=-1)
            sums_clipped = np.clip(sums + K, 0, self.grid.B - 1)
            vals = gamma_dense[tuple(np.moveaxis(sums_clipped, -1, 0))]
            out[start : start + block] = np.where(valid, vals, 0.0)
        return self.params.q * out

    def materialize_dense(self, cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
        """Explicit 2n x 2n matrix; refuses above ``cap`` to guard memory."""
        n = self.n
        if n > cap:
            raise ValidationError(
                f"dense materialization refused: n={n} exceeds cap {cap}"
            )
        a12 = self.dense_coupling_block()
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        out[:n, :n] = np.diag(-1j * self.delta)
        out[n:, n:] = np.diag(1j * self.delta)
        out[:n, n:] = a12
        out[n:, :n] = self.params.q * np.conj(a12)
        return out

    # -- misc -------------------------------------------------------------

    def _power_iteration_norm(self, iterations: int = 10) -> float:
        rng = np.random.default_rng(_NORM_SEED)
        x = rng.standard_normal(2 * self.n) + 1j * rng.standard_normal(2 * self.n)
        x /= np.linalg.norm(x)
        est = 1.0
        for _ in range(iterations):
            y = self.apply(x)
            est = np.linalg.norm(y)
            if est == 0.0:
                return max(np.abs(self.delta).max(initial=0.0), 1e-30)
            x = y / est
        return float(est)


def build_operator(
    tensor: FourierTensor,
    params: PhysicalParams,
    grid: GridSpec,
    matvec_mode: str = "auto",
) -> SystemOperator:
    """Assemble the dimensionless operator from a coefficient tensor.

    delta_k = t0 * (Omega + hbar |k|^2 / (2 m_a)); the coupling coefficients
    are gamma_k = t0 * kappa * g_k with kappa = chi / L^{D/2}.
    """
    if tensor.grid.shape != grid.shape or tensor.grid.dk != grid.dk:
        raise ValidationError("tensor grid does not match the operator grid")
    k2 = np.sum((grid.dk * grid.multi_indices().astype(float)) ** 2, axis=1)
    delta = params.t0 * (params.Omega + params.hbar * k2 / (2.0 * params.m_a))
    kappa = params.chi / grid.L ** (grid.D / 2.0)
    gamma = params.t0 * kappa * tensor.values
    return SystemOperator(
        grid=grid,
        params=params,
        delta=delta,
        coupling_indices=tensor.indices,
        coupling_values=gamma,
        symmetry=tensor.symmetry,
        matvec_mode=matvec_mode,
    )


def skew_transpose(mat: np.ndarray) -> np.ndarray:
    """Transpose across the anti-diagonal: out[i, j] = mat[N-1-j, N-1-i].

    Equivalently S @ mat.T @ S with S the reversal permutation; satisfies
    (B1 @ B2)^SDT = B2^SDT @ B1^SDT.
    """
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"skew_transpose needs a square matrix, got {mat.shape}")
    return mat[::-1, ::-1].T


def export_debug(op: SystemOperator, coupling_path, delta_path):
    """Dump the coupling tensor (text) and the detuning diagonal, for debugging."""
    with open(coupling_path, "w") as fh:
        for s, g in zip(op.coupling_indices, op.coupling_values):
            coords = " ".join(str(int(c)) for c in s)
            fh.write(f"{coords} {g.real!r} {g.imag!r}\n")
    with open(delta_path, "w") as fh:
        for m, d in enumerate(op.delta):
            fh.write(f"{m} {d!r}\n")
