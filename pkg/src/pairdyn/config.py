"""Run configuration: YAML with explicit SI unit suffixes on physical fields.

SI values enter here and are converted to the dimensionless internal units
exactly once, when the operator is built; times in the config are already
in units of t0.  Validation errors name the offending field.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import yaml

from .condensate import CondensateSpec, read_field_samples
from .errors import ValidationError
from .lattice import GridSpec
from .propagator import KrylovConfig
from .system_matrix import PhysicalParams


@dataclass
class SliceRequest:
    axis: int
    k_ref: tuple  # multi-index of the reference mode


@dataclass
class ObservablesConfig:
    cl_slices: list = field(default_factory=list)
    pairs: list = field(default_factory=list)  # [(multi-index, multi-index), ...]
    total_number: bool = False


@dataclass
class RunConfig:
    grid: GridSpec
    physics: PhysicalParams
    condensate: CondensateSpec
    truncation: float
    times: list
    observables: ObservablesConfig
    krylov: KrylovConfig
    shard: tuple = None  # (row_start, row_end) over the computed row plan
    threads: int = 1
    matvec_mode: str = "auto"
    output_dir: str = None
    raw: dict = None  # parsed mapping, for the manifest echo and hashing

    def config_hash(self) -> str:
        """Hash of everything that affects computed values (not scheduling)."""
        echo = {k: v for k, v in self.raw.items() if k not in ("shard", "threads", "output_dir")}
        blob = json.dumps(echo, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _need(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ValidationError(f"{context}.{key} is required")
    return mapping[key]


def _opt_float(value, context: str):
    # YAML 1.1 reads "1.1e5" (no sign after e) as a string; coerce here
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{context} must be a number, got {value!r}")


def _multi_index(value, D: int, context: str) -> tuple:
    arr = np.asarray(value)
    if arr.shape != (D,):
        raise ValidationError(f"{context} must be a length-{D} multi-index")
    return tuple(int(c) for c in arr)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a mapping")
    return parse_config(raw, base_dir=None)


def parse_config(raw: dict, base_dir=None) -> RunConfig:
    g = _need(raw, "grid", "config")
    D = int(_need(g, "D", "grid"))
    K = int(_need(g, "K", "grid"))
    has_L = "L_m" in g
    has_dk = "dk_per_m" in g
    if has_L == has_dk:
        raise ValidationError("grid: exactly one of L_m or dk_per_m must be given")
    grid = GridSpec(
        D=D,
        K=K,
        L=_opt_float(g.get("L_m"), "grid.L_m"),
        dk=_opt_float(g.get("dk_per_m"), "grid.dk_per_m"),
    )

    p = _need(raw, "physics", "config")
    physics = PhysicalParams(
        q=int(_need(p, "q", "physics")),
        m_a=float(_need(p, "m_a_kg", "physics")),
        Omega=float(_need(p, "Omega_per_s", "physics")),
        chi=float(_need(p, "chi_si", "physics")),
        t0=float(_need(p, "t0_s", "physics")),
        hbar=float(p.get("hbar_Js", PhysicalParams.hbar)),
    )

    c = _need(raw, "condensate", "config")
    kind = _need(c, "kind", "condensate")
    samples = None
    phase = None
    if kind == "grid_samples":
        samples_path = _need(c, "samples_path", "condensate")
        samples = read_field_samples(samples_path, grid)
    if "phase_path" in c and c["phase_path"]:
        phase_field = read_field_samples(c["phase_path"], grid)
        phase = phase_field.real
    tf_radii = c.get("tf_radii_m")
    if tf_radii is not None:
        tf_radii = tuple(
            _opt_float(r, f"condensate.tf_radii_m[{i}]") for i, r in enumerate(tf_radii)
        )
    condensate = CondensateSpec(
        kind=kind,
        rho0=_opt_float(c.get("rho0_per_mD"), "condensate.rho0_per_mD"),
        tf_radii=tf_radii,
        phase=phase,
        samples=samples,
    )
    condensate.validate(grid)

    trunc = raw.get("truncation", {}) or {}
    rel_threshold = float(trunc.get("rel_threshold", 0.0))
    if not 0.0 <= rel_threshold < 1.0:
        raise ValidationError("truncation.rel_threshold must be in [0, 1)")

    times = [float(t) for t in _need(raw, "times", "config")]
    if any(t < 0 for t in times) or any(
        t2 <= t1 for t1, t2 in zip(times, times[1:])
    ):
        raise ValidationError("times must be strictly increasing and >= 0")

    obs_raw = raw.get("observables", {}) or {}
    slices = []
    for i, s in enumerate(obs_raw.get("cl_slices", []) or []):
        axis = int(_need(s, "axis", f"observables.cl_slices[{i}]"))
        if not 0 <= axis < D:
            raise ValidationError(
                f"observables.cl_slices[{i}].axis out of range for D={D}"
            )
        k_ref = _multi_index(
            _need(s, "k_ref", f"observables.cl_slices[{i}]"),
            D,
            f"observables.cl_slices[{i}].k_ref",
        )
        if max(abs(c_) for c_ in k_ref) > K:
            raise ValidationError(
                f"observables.cl_slices[{i}].k_ref not on the lattice"
            )
        slices.append(SliceRequest(axis=axis, k_ref=k_ref))
    pairs = []
    for i, pair in enumerate(obs_raw.get("pairs", []) or []):
        if len(pair) != 2:
            raise ValidationError(f"observables.pairs[{i}] must be a pair")
        ka = _multi_index(pair[0], D, f"observables.pairs[{i}][0]")
        kb = _multi_index(pair[1], D, f"observables.pairs[{i}][1]")
        for name, k in (("0", ka), ("1", kb)):
            if max(abs(c_) for c_ in k) > K:
                raise ValidationError(
                    f"observables.pairs[{i}][{name}] not on the lattice"
                )
        pairs.append((ka, kb))
    observables = ObservablesConfig(
        cl_slices=slices,
        pairs=pairs,
        total_number=bool(obs_raw.get("total_number", False)),
    )

    k_raw = raw.get("krylov", {}) or {}
    krylov = KrylovConfig(
        subspace_dim=int(k_raw.get("subspace_dim", 30)),
        tol=_opt_float(k_raw.get("tol", 1e-10), "krylov.tol"),
        max_substeps=int(k_raw.get("max_substeps", 500)),
        norm_est=_opt_float(k_raw.get("norm_est"), "krylov.norm_est"),
        first_step=_opt_float(k_raw.get("first_step"), "krylov.first_step"),
    )

    shard = None
    if raw.get("shard"):
        s = raw["shard"]
        shard = (int(_need(s, "row_start", "shard")), int(_need(s, "row_end", "shard")))
        if shard[0] < 0 or shard[1] <= shard[0]:
            raise ValidationError("shard: need 0 <= row_start < row_end")

    threads = int(raw.get("threads", 1))
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    matvec_mode = raw.get("matvec_mode", "auto")
    if matvec_mode not in ("auto", "direct", "fft"):
        raise ValidationError(f"matvec_mode unknown: {matvec_mode!r}")

    return RunConfig(
        grid=grid,
        physics=physics,
        condensate=condensate,
        truncation=rel_threshold,
        times=times,
        observables=observables,
        krylov=krylov,
        shard=shard,
        threads=threads,
        matvec_mode=matvec_mode,
        output_dir=raw.get("output_dir"),
        raw=raw,
    )
