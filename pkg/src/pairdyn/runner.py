"""Execution engine behind the CLI: row planning, sharding, tables, manifest.

A run resolves its observables into a deterministic ordered plan of rows to
propagate.  Rows whose full vectors feed moments or correlation slices are
retained; rows needed only for the total-number sweep contribute a single
squared norm and are dropped immediately, which keeps shard files small.
Sharding slices the plan by position; merged shards reproduce the
unsharded tables byte for byte because every row value is computed by the
same deterministic path and all reductions run in plan order.
"""

from __future__ import annotations

import json
import math
import os
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .condensate import (
    FourierTensor,
    build_condensate,
    fourier_coefficients,
    truncate_coefficients,
)
from .config import RunConfig
from .errors import ValidationError
from .lattice import flatten_index, negate_index, unflatten_index
from .observables import (
    anomalous_moment,
    g2_same_spin,
    normal_moment,
    occupation,
    total_atom_number,
)
from .oracles import (
    UniformSolution,
    cl_asymptote,
    golden_rule_rate,
    uniform_moments,
)
from .propagator import (
    BlockRow,
    MRows,
    compute_rows,
    minimal_row_set,
    reconstruct_row,
    rows_of_M,
)
from .system_matrix import build_operator

SHARD_DIR_NAME = "shards"


@dataclass
class BuiltRun:
    config: RunConfig
    field: np.ndarray
    tensor_raw: FourierTensor
    tensor: FourierTensor
    op: object
    plan: object
    full_requests: list  # (block, m) whose vectors are needed
    occupation_requests: list  # upper linear indices whose n_k is tabulated
    sweep: bool  # whether all upper rows are swept for the total number
    source_pos: dict  # request key -> plan position of its computed source
    full_source_pos: set  # plan positions whose vectors must be retained


def build_run(config: RunConfig) -> BuiltRun:
    grid = config.grid
    field_ = build_condensate(config.condensate, grid)
    tensor_raw = fourier_coefficients(field_, grid)
    tensor = truncate_coefficients(tensor_raw, config.truncation)
    op = build_operator(tensor, config.physics, grid, matvec_mode=config.matvec_mode)

    full = []
    occ = set()

    def want_full(block, m):
        key = (block, int(m))
        if key not in full:
            full.append(key)

    for s in config.observables.cl_slices:
        k_ref = np.asarray(s.k_ref, dtype=int)
        m_ref = flatten_index(k_ref, grid)
        want_full(BlockRow.UPPER, m_ref)
        occ.add(m_ref)
        for c in range(-grid.K, grid.K + 1):
            nvec = k_ref.copy()
            nvec[s.axis] = c
            m = flatten_index(nvec, grid)
            want_full(BlockRow.UPPER, m)
            occ.add(m)
    general = not op.symmetry.is_real_psi
    for ka, kb in config.observables.pairs:
        ma, mb = flatten_index(ka, grid), flatten_index(kb, grid)
        want_full(BlockRow.UPPER, ma)
        want_full(BlockRow.UPPER, mb)
        if general:
            want_full(BlockRow.LOWER, mb)  # anomalous moment needs M21 row
        occ.update((ma, mb))

    sweep = config.observables.total_number
    requests = list(full)
    if sweep:
        have = {key for key in requests}
        for m in range(grid.n_total):
            key = (BlockRow.UPPER, m)
            if key not in have:
                requests.append(key)

    plan = minimal_row_set(requests, op.symmetry, grid.n_total)
    pos_of = {key: i for i, key in enumerate(plan.computed)}
    source_pos = {}
    for key in requests:
        if key in pos_of:
            source_pos[key] = pos_of[key]
        else:
            src_key, _steps = plan.recipe[key]
            source_pos[key] = pos_of[src_key]
    full_source_pos = {source_pos[key] for key in full}

    return BuiltRun(
        config=config,
        field=field_,
        tensor_raw=tensor_raw,
        tensor=tensor,
        op=op,
        plan=plan,
        full_requests=full,
        occupation_requests=sorted(occ),
        sweep=sweep,
        source_pos=source_pos,
        full_source_pos=full_source_pos,
    )


# -- row store --------------------------------------------------------------


@dataclass
class RowStore:
    """Computed plan rows for every time: norms always, vectors selectively."""

    times: list
    plan_len: int
    norms: dict = field(default_factory=dict)  # time idx -> float array (plan_len)
    vectors: dict = field(default_factory=dict)  # (time idx, pos) -> (a, b)

    def row(self, run: BuiltRun, ti: int, key) -> MRows:
        """Materialize the MRows for a full request from stored vectors."""
        pos = run.source_pos[key]
        src_key = run.plan.computed[pos]
        a, b = self.vectors[(ti, pos)]
        src = MRows(
            time=run.config.times[ti],
            row_index=src_key[1],
            block=src_key[0],
            symmetry=run.op.symmetry,
        )
        if src_key[0] is BlockRow.UPPER:
            src.m11_row, src.m12_row = a, b
        else:
            src.m21_row, src.m22_row = a, b
        if key == src_key:
            return src
        _src_key, steps = run.plan.recipe[key]
        return reconstruct_row(src, steps, key[0], key[1])

    def occupation_of(self, run: BuiltRun, ti: int, m: int) -> float:
        return float(self.norms[ti][run.source_pos[(BlockRow.UPPER, m)]])


def compute_store(run: BuiltRun, positions=None) -> RowStore:
    """Propagate the planned rows (optionally a shard of plan positions)."""
    cfg = run.config
    plan = run.plan.computed
    if positions is None:
        positions = range(len(plan))
    positions = list(positions)
    store = RowStore(times=list(cfg.times), plan_len=len(plan))

    def one(args):
        ti, pos = args
        key = plan[pos]
        row = rows_of_M(run.op, [key], cfg.times[ti], cfg.krylov)[0]
        if key[0] is BlockRow.UPPER:
            norm = occupation(row)
            vecs = (row.m11_row, row.m12_row)
        else:
            norm = math.nan
            vecs = (row.m21_row, row.m22_row)
        keep = pos in run.full_source_pos
        return ti, pos, norm, vecs if keep else None

    work = [(ti, pos) for ti in range(len(cfg.times)) for pos in positions]
    for ti in range(len(cfg.times)):
        store.norms[ti] = np.full(len(plan), np.nan)
    if cfg.threads > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = pool.map(one, work)
            for ti, pos, norm, vecs in results:
                store.norms[ti][pos] = norm
                if vecs is not None:
                    store.vectors[(ti, pos)] = vecs
    else:
        for args in work:
            ti, pos, norm, vecs = one(args)
            store.norms[ti][pos] = norm
            if vecs is not None:
                store.vectors[(ti, pos)] = vecs
    return store


# -- shard files -------------------------------------------------------------


def shard_positions(run: BuiltRun) -> list:
    start, end = run.config.shard
    if start >= len(run.plan.computed) or end > len(run.plan.computed):
        raise ValidationError(
            f"shard range [{start}, {end}) outside the computed row plan "
            f"({len(run.plan.computed)} rows)"
        )
    return list(range(start, end))


def _shard_meta(run: BuiltRun) -> dict:
    return {
        "config_hash": run.config.config_hash(),
        "times": list(run.config.times),
        "symmetry": run.op.symmetry.value,
        "plan": [[key[0].value, key[1]] for key in run.plan.computed],
        "full_source_pos": sorted(run.full_source_pos),
        "version": __version__,
    }


def write_shard(run: BuiltRun, store: RowStore, positions, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    start, end = positions[0], positions[-1] + 1
    payload = {
        "meta": json.dumps(
            {**_shard_meta(run), "row_start": start, "row_end": end}, sort_keys=True
        )
    }
    for ti in range(len(run.config.times)):
        payload[f"t{ti}_norms"] = store.norms[ti][start:end]
        for pos in positions:
            if (ti, pos) in store.vectors:
                a, b = store.vectors[(ti, pos)]
                payload[f"t{ti}_pos{pos}_a"] = a
                payload[f"t{ti}_pos{pos}_b"] = b
    path = out_dir / f"rows_{start:08d}_{end:08d}.npz"
    np.savez_compressed(path, **payload)
    return path


def merge_shards(run: BuiltRun, shard_dir: Path) -> RowStore:
    """Validate coverage and reassemble a full RowStore from shard files."""
    files = sorted(Path(shard_dir).glob("rows_*.npz"))
    if not files:
        raise ValidationError(f"no shard files found in {shard_dir}")
    expect = _shard_meta(run)
    plan_len = len(run.plan.computed)
    store = RowStore(times=list(run.config.times), plan_len=plan_len)
    for ti in range(len(run.config.times)):
        store.norms[ti] = np.full(plan_len, np.nan)
    covered = np.zeros(plan_len, dtype=int)
    for f in files:
        with np.load(f) as data:
            meta = json.loads(str(data["meta"]))
            for key in ("config_hash", "times", "symmetry", "plan"):
                if meta.get(key) != expect[key]:
                    raise ValidationError(
                        f"shard {f.name}: {key} does not match this config"
                    )
            start, end = meta["row_start"], meta["row_end"]
            covered[start:end] += 1
            for ti in range(len(run.config.times)):
                store.norms[ti][start:end] = data[f"t{ti}_norms"]
                for pos in range(start, end):
                    a_key = f"t{ti}_pos{pos}_a"
                    if a_key in data:
                        store.vectors[(ti, pos)] = (
                            data[a_key],
                            data[f"t{ti}_pos{pos}_b"],
                        )
    missing = np.flatnonzero(covered == 0)
    if missing.size:
        raise ValidationError(
            f"shards do not cover plan rows {missing[:10].tolist()}"
            + ("..." if missing.size > 10 else "")
        )
    dup = np.flatnonzero(covered > 1)
    if dup.size:
        raise ValidationError(
            f"shards overlap on plan rows {dup[:10].tolist()}"
            + ("..." if dup.size > 10 else "")
        )
    return store


# -- tables ------------------------------------------------------------------


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "undefined"
    return repr(float(x))


def _time_tag(t: float) -> str:
    return f"t{t:.6g}"


def write_tables(run: BuiltRun, store: RowStore, out_dir: Path) -> list:
    """Emit the per-time observable tables; returns the written paths."""
    grid = run.config.grid
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def kcols(prefix=""):
        return [f"{prefix}k{j + 1}_per_m" for j in range(grid.D)]

    for ti, t in enumerate(run.config.times):
        tag = _time_tag(t)
        if run.occupation_requests:
            path = out_dir / f"occupations_{tag}.csv"
            with open(path, "w") as fh:
                fh.write(",".join(kcols() + ["t_over_t0", "n"]) + "\n")
                for m in run.occupation_requests:
                    k = grid.dk * unflatten_index(m, grid)
                    vals = [_fmt(c) for c in k] + [_fmt(t), _fmt(store.occupation_of(run, ti, m))]
                    fh.write(",".join(vals) + "\n")
            written.append(path)

        if run.config.observables.pairs:
            path = out_dir / f"moments_{tag}.csv"
            with open(path, "w") as fh:
                fh.write(
                    ",".join(
                        kcols() + kcols("p_") + ["t_over_t0", "n_re", "n_im", "m_re", "m_im"]
                    )
                    + "\n"
                )
                for ka, kb in run.config.observables.pairs:
                    ma, mb = flatten_index(ka, grid), flatten_index(kb, grid)
                    row_a = store.row(run, ti, (BlockRow.UPPER, ma))
                    row_b = store.row(run, ti, (BlockRow.UPPER, mb))
                    n_val = normal_moment(row_a, row_b)
                    if run.op.symmetry.is_real_psi:
                        m_val = anomalous_moment(row_a, row_b)
                    else:
                        row_b_low = store.row(run, ti, (BlockRow.LOWER, mb))
                        row_b.m21_row = row_b_low.m21_row
                        m_val = anomalous_moment(row_a, row_b)
                    vals = (
                        [_fmt(c) for c in grid.dk * np.asarray(ka, dtype=float)]
                        + [_fmt(c) for c in grid.dk * np.asarray(kb, dtype=float)]
                        + [_fmt(t), _fmt(n_val.real), _fmt(n_val.imag), _fmt(m_val.real), _fmt(m_val.imag)]
                    )
                    fh.write(",".join(vals) + "\n")
            written.append(path)

        for s in run.config.observables.cl_slices:
            path = out_dir / f"cl_slice_axis{s.axis}_{tag}.csv"
            k_ref = np.asarray(s.k_ref, dtype=int)
            m_ref = flatten_index(k_ref, grid)
            row_ref = store.row(run, ti, (BlockRow.UPPER, m_ref))
            q = run.config.physics.q
            with open(path, "w") as fh:
                head = [f"k{s.axis + 1}_per_m"] + [f"ref_{c}" for c in kcols()] + [
                    "t_over_t0",
                    "g2_same_spin",
                    "n",
                ]
                fh.write(",".join(head) + "\n")
                kref_phys = grid.dk * k_ref.astype(float)
                for c in range(-grid.K, grid.K + 1):
                    nvec = k_ref.copy()
                    nvec[s.axis] = c
                    m = flatten_index(nvec, grid)
                    row = store.row(run, ti, (BlockRow.UPPER, m))
                    g2 = g2_same_spin(row, row_ref, q)
                    vals = (
                        [_fmt(grid.dk * c)]
                        + [_fmt(x) for x in kref_phys]
                        + [_fmt(t), _fmt(g2), _fmt(store.occupation_of(run, ti, m))]
                    )
                    fh.write(",".join(vals) + "\n")
            written.append(path)

        if run.sweep:
            path = out_dir / f"total_number_{tag}.csv"
            occ_all = np.array(
                [store.occupation_of(run, ti, m) for m in range(grid.n_total)]
            )
            with open(path, "w") as fh:
                fh.write("t_over_t0,N_per_spin\n")
                fh.write(f"{_fmt(t)},{_fmt(float(np.sum(occ_all)))}\n")
            written.append(path)
    return written


def write_manifest(run: BuiltRun, out_dir: Path, extra: dict = None) -> Path:
    grid = run.config.grid
    op = run.op
    params = run.config.physics
    sample_weight = (grid.L / grid.B) ** grid.D
    n0 = float(np.sum(np.abs(run.field) ** 2) * sample_weight)
    manifest = {
        "config": run.config.raw,
        "config_hash": run.config.config_hash(),
        "version": __version__,
        "derived": {
            "L_m": grid.L,
            "dk_per_m": grid.dk,
            "L_derivation": "given" if "L_m" in run.config.raw.get("grid", {}) else "L = 2*pi/dk",
            "B": grid.B,
            "n_total": grid.n_total,
            "quadrature": "midpoint rule on the B^D spatial grid via centered DFT",
            "symmetry": op.symmetry.value,
            "coefficients_total": run.tensor_raw.nnz,
            "coefficients_kept": run.tensor.nnz,
            "leading_modulus": run.tensor.leading_modulus,
            "delta_at_k0_mode": float(op.delta[grid.n_total // 2]),
            "gamma_max": float(np.abs(op.coupling_values).max(initial=0.0)),
            "resonance_index_k0_over_dk": params.resonance_momentum / grid.dk,
            "molecule_number_N0": n0,
            "matvec_mode": op.matvec_mode,
            "fft_pad_shape": list(op.fft_pad_shape) if op.fft_pad_shape else None,
            "norm_est": op.norm_est,
            "krylov": {
                "subspace_dim": run.config.krylov.subspace_dim,
                "tol": run.config.krylov.tol,
                "max_substeps": run.config.krylov.max_substeps,
                "first_step": run.config.krylov.first_step,
            },
            "row_plan_length": len(run.plan.computed),
            "full_rows_retained": len(run.full_source_pos),
        },
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def resolve_output_dir(config: RunConfig, config_path=None) -> Path:
    if config.output_dir:
        return Path(config.output_dir)
    root = os.environ.get("PAIRDYN_OUTPUT_ROOT", "runs")
    stem = Path(config_path).stem if config_path else "run"
    return Path(root) / stem


def simulate(config: RunConfig, config_path=None, out_dir=None) -> Path:
    """Full pipeline: build, propagate, and write tables (or a shard file)."""
    t_start = _time.perf_counter()
    run = build_run(config)
    out = Path(out_dir) if out_dir else resolve_output_dir(config, config_path)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.yaml", "w") as fh:
        yaml.safe_dump(config.raw, fh, sort_keys=True)
    if config.shard is not None:
        positions = shard_positions(run)
        store = compute_store(run, positions)
        write_shard(run, store, positions, out / SHARD_DIR_NAME)
        write_manifest(run, out, extra={"shard": list(config.shard)})
    else:
        store = compute_store(run)
        write_tables(run, store, out)
        write_manifest(run, out)
    with open(out / "timing.json", "w") as fh:
        json.dump({"wall_seconds": _time.perf_counter() - t_start}, fh, indent=2)
        fh.write("\n")
    return out


def merge(config: RunConfig, shard_dir, out_dir) -> Path:
    """Merge shard files into tables byte-identical to an unsharded run."""
    run = build_run(config)
    store = merge_shards(run, Path(shard_dir))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_tables(run, store, out)
    write_manifest(run, out)
    return out


# -- oracle comparison --------------------------------------------------------


def compare_oracle(config: RunConfig, oracle: str, tolerances: dict = None) -> dict:
    """Residual report for one of the closed-form oracles.

    Raises ValidationError when the oracle does not apply to the config.
    """
    tol = dict(tolerances or {})
    if oracle == "uniform":
        return _compare_uniform(config, tol)
    if oracle == "golden_rule":
        return _compare_golden_rule(config, tol)
    if oracle == "cl_asymptote":
        return _compare_cl_asymptote(config, tol)
    raise ValidationError(f"unknown oracle {oracle!r}")


def _compare_uniform(config: RunConfig, tol: dict) -> dict:
    if config.condensate.kind != "uniform":
        raise ValidationError(
            "uniform oracle requires condensate.kind == uniform"
        )
    rel_tol = float(tol.get("rel_tol", 1e-8))
    run = build_run(config)
    op, grid = run.op, config.grid
    gamma0 = float(op.coupling_values[0].real)
    q = config.physics.q
    report = {"oracle": "uniform", "rel_tol": rel_tol, "times": []}
    ok = True
    for t in config.times:
        requested = [(BlockRow.UPPER, m) for m in range(grid.n_total)]
        rows = compute_rows(op, requested, t, config.krylov, threads=config.threads)
        max_n = max_m = 0.0
        for m in range(grid.n_total):
            row = rows[(BlockRow.UPPER, m)]
            row_neg = rows[(BlockRow.UPPER, negate_index(m, grid))]
            n_num = occupation(row)
            m_num = anomalous_moment(row, row_neg)
            n_ref, m_ref = uniform_moments(
                UniformSolution(gamma0=gamma0, delta_k=float(op.delta[m]), q=q), t
            )
            max_n = max(max_n, abs(n_num - n_ref) / max(abs(n_ref), 1e-300))
            max_m = max(max_m, abs(m_num - m_ref) / max(abs(m_ref), 1e-300))
        passed = max_n <= rel_tol and max_m <= rel_tol
        ok = ok and passed
        report["times"].append(
            {"t": t, "max_rel_n": max_n, "max_rel_m": max_m, "pass": passed}
        )
    report["pass"] = ok
    return report


def _compare_golden_rule(config: RunConfig, tol: dict) -> dict:
    if config.grid.D != 3:
        raise ValidationError("golden_rule oracle requires D == 3")
    factor = float(tol.get("slope_factor", 2.0))
    run = build_run(config)
    lam = golden_rule_rate(config.physics)
    sample_weight = (config.grid.L / config.grid.B) ** 3
    n0 = float(np.sum(np.abs(run.field) ** 2) * sample_weight)
    numbers = [
        total_atom_number(run.op, t, config.krylov, threads=config.threads)
        for t in config.times
    ]
    times_s = np.asarray(config.times) * config.physics.t0
    slope = float(np.polyfit(times_s, numbers, 1)[0]) if len(numbers) > 1 else (
        numbers[0] / times_s[0]
    )
    expected = n0 * lam
    ratio = slope / expected if expected else math.inf
    passed = (1.0 / factor) <= ratio <= factor
    return {
        "oracle": "golden_rule",
        "lambda_per_s": lam,
        "N0": n0,
        "expected_slope_per_s": expected,
        "measured_slope_per_s": slope,
        "ratio": ratio,
        "numbers": dict(zip([str(t) for t in config.times], numbers)),
        "slope_factor": factor,
        "pass": passed,
    }


def half_width_toward_zero(k_values, g2, k_ref_value) -> float:
    """Half width at half depth of |g2 - 1|, measured toward k = 0.

    Linear interpolation between lattice points; NaN when no crossing lies
    on-grid on that side.
    """
    depth = np.abs(np.asarray(g2) - 1.0)
    k_values = np.asarray(k_values)
    i_ref = int(np.nanargmin(np.abs(k_values - k_ref_value)))
    peak = depth[i_ref]
    if not np.isfinite(peak) or peak == 0.0:
        return math.nan
    half = peak / 2.0
    step = -1 if k_ref_value >= 0 else 1
    i = i_ref
    while 0 <= i + step < len(depth):
        j = i + step
        if not np.isfinite(depth[j]):
            return math.nan
        if depth[j] <= half:
            frac = (depth[i] - half) / (depth[i] - depth[j])
            k_half = k_values[i] + frac * (k_values[j] - k_values[i])
            return abs(k_ref_value - k_half)
        i = j
    return math.nan


def _compare_cl_asymptote(config: RunConfig, tol: dict) -> dict:
    if config.condensate.kind != "thomas_fermi":
        raise ValidationError("cl_asymptote oracle requires a thomas_fermi condensate")
    if not config.observables.cl_slices:
        raise ValidationError("cl_asymptote oracle requires at least one cl_slice")
    endpoint_tol = float(tol.get("endpoint_tol", 0.1))
    width_rel_tol = float(tol.get("width_rel_tol", 0.25))
    run = build_run(config)
    store = compute_store(run)
    q = config.physics.q
    grid = config.grid
    report = {"oracle": "cl_asymptote", "slices": [], "endpoint_tol": endpoint_tol,
              "width_rel_tol": width_rel_tol}
    ok = True
    for ti, t in enumerate(config.times):
        for s in config.observables.cl_slices:
            k_ref = np.asarray(s.k_ref, dtype=int)
            m_ref = flatten_index(k_ref, grid)
            row_ref = store.row(run, ti, (BlockRow.UPPER, m_ref))
            k_vals = grid.dk * np.arange(-grid.K, grid.K + 1, dtype=float)
            g2 = []
            for c in range(-grid.K, grid.K + 1):
                nvec = k_ref.copy()
                nvec[s.axis] = c
                row = store.row(run, ti, (BlockRow.UPPER, flatten_index(nvec, grid)))
                g2.append(g2_same_spin(row, row_ref, q))
            g2 = np.asarray(g2)
            radius = config.condensate.tf_radii[s.axis]
            k_ref_val = grid.dk * float(k_ref[s.axis])
            ana = np.array([cl_asymptote(k - k_ref_val, radius, q) for k in k_vals])
            finite = np.isfinite(g2)
            resid = np.abs(g2[finite] - ana[finite])
            width_num = half_width_toward_zero(k_vals, g2, k_ref_val)
            width_ana = 2.16 / radius
            endpoint = g2[np.argmin(np.abs(k_vals - k_ref_val))]
            endpoint_ok = abs(endpoint - (1.0 + q)) <= endpoint_tol
            width_ok = (
                math.isfinite(width_num)
                and abs(width_num - width_ana) <= width_rel_tol * width_ana
            )
            ok = ok and endpoint_ok and width_ok
            report["slices"].append(
                {
                    "t": t,
                    "axis": s.axis,
                    "max_abs_residual": float(resid.max()) if resid.size else math.nan,
                    "rms_residual": float(np.sqrt(np.mean(resid**2))) if resid.size else math.nan,
                    "endpoint_g2": float(endpoint),
                    "width_numeric_per_m": width_num,
                    "width_asymptote_per_m": width_ana,
                    "pass": bool(endpoint_ok and width_ok),
                }
            )
    report["pass"] = ok
    return report
