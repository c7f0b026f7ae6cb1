"""Labeled scenario generation and dataset I/O.

Each of the six relations is realized by wiring a ground-truth system's
inputs and outputs onto the observed pair (theta, psi) plus an optional
latent stream v. The produced dataset carries the truth label and enough
ground truth (system, latent stream, recorded inputs) to validate the
identifiability rank condition; the classifier itself never reads those
fields.

Conventions: the observed driver occupies the leading input columns and the
latent stream the trailing `latent_dim` ones; for the common-cause case the
theta group occupies the leading `output_split` output rows.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    IdentifiabilityError,
    InputFormatError,
)
from .linalg import DEFAULT_TOL, ToleranceConfig, build_hankel, numerical_rank
from .lti import LtiSystem, compute_lag, default_x0, random_discoverable_system, simulate
from .relations import Relation

__all__ = [
    "LabeledDataset",
    "generate",
    "generate_identifiable",
    "check_identifiable",
    "export_dataset",
    "import_dataset",
]

IDENTIFIABILITY_RETRIES = 20


def _draw(dist, rng, shape):
    """dist is a (low, high) uniform pair or a callable (rng, shape) -> array."""
    if callable(dist):
        out = np.asarray(dist(rng, shape), dtype=float)
        if out.shape != shape:
            raise DimensionMismatchError(
                f"input_dist returned shape {out.shape}, expected {shape}")
        return out
    low, high = dist
    return rng.uniform(low, high, shape)


@dataclass
class LabeledDataset:
    theta: np.ndarray
    psi: np.ndarray
    relation: Relation
    T: int
    T_ini: int
    v: np.ndarray | None = None
    sys: LtiSystem | None = None
    # raw input matrix fed to sys, for exact re-simulation checks
    u: np.ndarray | None = None
    x0: np.ndarray | None = None
    latent_dim: int = 0
    mode: str = "system"
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.theta.shape[1]

    @property
    def p(self) -> int:
        return self.psi.shape[1]


def _stack_truth(ds: LabeledDataset):
    """The full signal whose Hankel rank decides identifiability.

    Directly driven pairs stack just (theta, psi); anything involving a
    latent stream stacks (theta, psi, v). Returns (w, input_count, order).
    """
    if ds.relation == Relation.INDEPENDENT:
        return np.hstack([ds.theta, ds.psi]), ds.m + ds.p, 0
    if ds.sys is None:
        raise DimensionMismatchError("dataset carries no ground-truth system")
    n = ds.sys.order
    if ds.relation in (Relation.THETA_TO_PSI, Relation.PSI_TO_THETA):
        k = ds.m if ds.relation == Relation.THETA_TO_PSI else ds.p
        return np.hstack([ds.theta, ds.psi]), k, n
    if ds.v is None:
        raise DimensionMismatchError("latent-cause dataset carries no latent stream")
    kv = ds.v.shape[1]
    if ds.relation == Relation.LATENT_COMMON_CAUSE:
        return np.hstack([ds.theta, ds.psi, ds.v]), kv, n
    k = ds.m if ds.relation == Relation.THETA_AND_LATENT_TO_PSI else ds.p
    return np.hstack([ds.theta, ds.psi, ds.v]), k + kv, n


def check_identifiable(ds: LabeledDataset, tol: ToleranceConfig = DEFAULT_TOL,
                       T_f: int = 2):
    """Hankel rank of the stacked truth == inputs*(T_ini+T_f) + order."""
    w, k, n = _stack_truth(ds)
    L = ds.T_ini + T_f
    rank = numerical_rank(build_hankel(w, L), tol)
    expected = k * L + n
    return rank == expected, {"rank": rank, "expected": expected,
                              "depth": L, "stacked_dim": w.shape[1]}


def generate(relation: Relation, T: int, rng, sys: LtiSystem | None = None,
             T_ini: int | None = None, x0=None, latent_dim: int = 0,
             output_split: int | None = None, stream_dims=(1, 1),
             driver_dist=(-1.0, 1.0), latent_dist=(-1.0, 1.0),
             psi_dist=(-1.0, 1.0), mode: str = "streams") -> LabeledDataset:
    """Simulate one labeled dataset.

    `driver_dist` draws the observed free input (theta for relations 2/4,
    psi for 3/5, both streams for relation 1 unless psi_dist differs),
    `latent_dist` draws v. For relation 1, mode "streams" emits two bare
    streams of dims `stream_dims` and mode "system" additionally feeds them
    into a discarded-output system (response stored as the latent v); the
    observed data is identical under both modes.
    """
    relation = Relation(relation)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng

    if relation == Relation.INDEPENDENT:
        m, p = stream_dims
        theta = _draw(driver_dist, rng, (T, m))
        psi = _draw(psi_dist, rng, (T, p))
        v = None
        if mode == "system":
            wired = sys
            if wired is None:
                n = 2
                wired = LtiSystem(np.eye(n) * 0.5, rng.uniform(-1, 1, (n, m + p)),
                                  rng.uniform(-1, 1, (1, n)), np.zeros((1, m + p)))
            if wired.input_dim != m + p:
                raise DimensionMismatchError(
                    "independent-mode system must take theta and psi as inputs")
            y, _ = simulate(wired, np.hstack([theta, psi]),
                            default_x0(wired.order) if x0 is None else x0)
            v = y  # latent, discarded by observation
        return LabeledDataset(theta=theta, psi=psi, relation=relation, T=T,
                              T_ini=T_ini if T_ini is not None else 1,
                              v=v, mode=mode)

    if sys is None:
        raise DimensionMismatchError(f"{relation.label} needs a generating system")
    x0 = default_x0(sys.order) if x0 is None else np.asarray(x0, float)
    lag = compute_lag(sys)
    if T_ini is None:
        T_ini = lag + 1  # minimal window strictly longer than the lag

    if relation in (Relation.THETA_TO_PSI, Relation.PSI_TO_THETA):
        u = _draw(driver_dist, rng, (T, sys.input_dim))
        y, _ = simulate(sys, u, x0, T)
        theta, psi = (u, y) if relation == Relation.THETA_TO_PSI else (y, u)
        return LabeledDataset(theta=theta, psi=psi, relation=relation,
                              T=T, T_ini=T_ini, sys=sys, u=u, x0=x0)

    if relation in (Relation.THETA_AND_LATENT_TO_PSI,
                    Relation.PSI_AND_LATENT_TO_THETA):
        if not (0 < latent_dim < sys.input_dim):
            raise DimensionMismatchError(
                f"latent_dim must split the {sys.input_dim} inputs, got {latent_dim}")
        md = sys.input_dim - latent_dim
        uo = _draw(driver_dist, rng, (T, md))
        v = _draw(latent_dist, rng, (T, latent_dim))
        u = np.hstack([uo, v])
        y, _ = simulate(sys, u, x0, T)
        theta, psi = ((uo, y) if relation == Relation.THETA_AND_LATENT_TO_PSI
                      else (y, uo))
        return LabeledDataset(theta=theta, psi=psi, relation=relation,
                              T=T, T_ini=T_ini, v=v, sys=sys, u=u, x0=x0,
                              latent_dim=latent_dim)

    if output_split is None or not (0 < output_split < sys.output_dim):
        raise DimensionMismatchError(
            f"output_split must split the {sys.output_dim} outputs, got {output_split}")
    v = _draw(latent_dist, rng, (T, sys.input_dim))
    y, _ = simulate(sys, v, x0, T)
    return LabeledDataset(theta=y[:, :output_split], psi=y[:, output_split:],
                          relation=relation, T=T, T_ini=T_ini, v=v, sys=sys,
                          u=v, x0=x0, latent_dim=sys.input_dim)


def generate_identifiable(relation: Relation, T: int, rng, order: int,
                          m: int = 1, p: int = 1, latent_dim: int = 1,
                          retries: int = IDENTIFIABILITY_RETRIES,
                          tol: ToleranceConfig = DEFAULT_TOL,
                          **gen_kwargs) -> LabeledDataset:
    """Draw (system, data) pairs until the identifiability rank holds.

    The rank condition fails only on measure-zero input draws, but floats
    are not measure theory, so a bounded retry loop with a fresh system and
    fresh inputs each round keeps the generator total. m and p are the
    observed dims of theta and psi.
    """
    relation = Relation(relation)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    last = None
    for _ in range(retries):
        if relation == Relation.INDEPENDENT:
            ds = generate(relation, T, rng, stream_dims=(m, p), **gen_kwargs)
        elif relation in (Relation.THETA_TO_PSI, Relation.PSI_TO_THETA):
            driver, response = (m, p) if relation == Relation.THETA_TO_PSI else (p, m)
            sys = random_discoverable_system(relation, order, driver, response,
                                             rng=rng)
            ds = generate(relation, T, rng, sys=sys, **gen_kwargs)
        elif relation in (Relation.THETA_AND_LATENT_TO_PSI,
                          Relation.PSI_AND_LATENT_TO_THETA):
            driver, response = ((m, p) if relation == Relation.THETA_AND_LATENT_TO_PSI
                                else (p, m))
            sys = random_discoverable_system(relation, order, driver, response,
                                             latent_dim, rng=rng)
            ds = generate(relation, T, rng, sys=sys, latent_dim=latent_dim,
                          **gen_kwargs)
        else:
            sys = random_discoverable_system(relation, order, m, p, latent_dim,
                                             rng=rng)
            ds = generate(relation, T, rng, sys=sys, output_split=m, **gen_kwargs)
        ok, last = check_identifiable(ds, tol)
        if ok:
            return ds
    raise IdentifiabilityError(
        f"identifiability rank failed {retries} times for {relation.label}: {last}")


# ---------------------------------------------------------------------------
# dataset files: CSV of samples plus a JSON sidecar with the labeling
# ---------------------------------------------------------------------------

def export_dataset(ds: LabeledDataset, csv_path, sidecar_path=None) -> Path:
    """One CSV row per time step, columns theta_0..theta_{m-1}, psi_0..psi_{p-1}.

    Floats are written with repr (shortest round-trip), so export is
    byte-deterministic given the data and import reproduces exact values.
    The latent stream is deliberately not exported; it is unobservable.
    """
    csv_path = Path(csv_path)
    sidecar_path = (csv_path.with_suffix(".json") if sidecar_path is None
                    else Path(sidecar_path))
    header = [f"theta_{i}" for i in range(ds.m)] + [f"psi_{i}" for i in range(ds.p)]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t in range(ds.T):
            row = [repr(float(v)) for v in ds.theta[t]]
            row += [repr(float(v)) for v in ds.psi[t]]
            writer.writerow(row)
    sidecar = {
        "relation": int(ds.relation),
        "relation_label": ds.relation.label,
        "T": ds.T,
        "T_ini": ds.T_ini,
        "m": ds.m,
        "p": ds.p,
        "mode": ds.mode,
        "seed": ds.seed,
        "system": ds.sys.to_text() if ds.sys is not None else None,
    }
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path


def import_dataset(csv_path, sidecar_path=None, dims=None):
    """Read an exported dataset back; returns (theta, psi, sidecar dict).

    The theta/psi column split comes from the sidecar when present, else
    from dims=(m, p). Parse problems name the offending row.
    """
    csv_path = Path(csv_path)
    sidecar_path = (csv_path.with_suffix(".json") if sidecar_path is None
                    else Path(sidecar_path))
    sidecar = {}
    if sidecar_path.exists():
        with open(sidecar_path) as fh:
            sidecar = json.load(fh)
    if dims is not None:
        m, p = dims
    elif "m" in sidecar and "p" in sidecar:
        m, p = int(sidecar["m"]), int(sidecar["p"])
    else:
        raise InputFormatError("no sidecar found; pass dims=(m, p)")

    rows = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputFormatError(f"{csv_path}: empty file")
        if len(header) < m + p:
            raise DimensionMismatchError(
                f"{csv_path}: {len(header)} columns cannot split into "
                f"m={m} theta and p={p} psi columns")
        try:
            rows.append([float(v) for v in header])
            header = [""] * len(header)  # headerless file: first row is data
        except ValueError:
            pass
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputFormatError(
                    f"{csv_path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise InputFormatError(f"{csv_path}:{lineno}: {exc}") from None
    if not rows:
        raise InputFormatError(f"{csv_path}: no data rows")
    data = np.asarray(rows)
    return data[:, :m], data[:, m:m + p], sidecar
