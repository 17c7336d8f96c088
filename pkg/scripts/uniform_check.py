#!/usr/bin/env python3
"""Quick confidence check: pipeline vs the uniform-field closed forms.

Builds a uniform condensate in one dimension, propagates every mode, and
prints the worst relative deviation of the occupations and pairing
amplitudes from their analytic values, for both statistics.
"""

import numpy as np

from pairdyn import (
    BlockRow,
    CondensateSpec,
    GridSpec,
    KrylovConfig,
    PhysicalParams,
    UniformSolution,
    anomalous_moment,
    build_condensate,
    build_operator,
    compute_rows,
    fourier_coefficients,
    negate_index,
    occupation,
    uniform_moments,
)


def main():
    grid = GridSpec(D=1, K=20, dk=1.1e5)
    tensor = fourier_coefficients(
        build_condensate(CondensateSpec(kind="uniform", rho0=1e20), grid), grid
    )
    cfg = KrylovConfig(tol=1e-12)
    for q in (-1, 1):
        params = PhysicalParams(
            q=q, m_a=6.642e-26, Omega=-4.0e3, chi=1.0e-7, t0=1.0e-3
        )
        op = build_operator(tensor, params, grid)
        gamma0 = float(op.coupling_values[0].real)
        for t in (0.25, 0.5, 1.0):
            rows = compute_rows(
                op, [("upper", m) for m in range(grid.n_total)], t, cfg
            )
            worst_n = worst_m = 0.0
            for m in range(grid.n_total):
                row = rows[(BlockRow.UPPER, m)]
                row_neg = rows[(BlockRow.UPPER, negate_index(m, grid))]
                n_ref, m_ref = uniform_moments(
                    UniformSolution(gamma0=gamma0, delta_k=float(op.delta[m]), q=q),
                    t,
                )
                worst_n = max(worst_n, abs(occupation(row) - n_ref) / n_ref)
                worst_m = max(
                    worst_m, abs(anomalous_moment(row, row_neg) - m_ref) / abs(m_ref)
                )
            print(
                f"q={q:+d} t/t0={t:4.2f}: worst rel n {worst_n:.2e}, "
                f"worst rel m {worst_m:.2e}"
            )


if __name__ == "__main__":
    main()
