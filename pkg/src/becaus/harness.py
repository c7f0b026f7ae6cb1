"""Experiment drivers behind the CLI.

Four worked reproduction scenarios with asserted outcomes, a Monte-Carlo
sweep validating the classifier against generated ground truth, CSV
classification for user data, and the tanh-network probe study. Every
driver returns one report dict shaped by schemas/report.schema.json:
{schema_version, mode, seed, config, records, summary, timings}.

All drivers are deterministic given their seed: trials draw from a single
seeded generator in a fixed order.
"""
from __future__ import annotations

import time

import numpy as np

from .classifier import classify
from .datagen import (
    LabeledDataset,
    check_identifiable,
    generate,
    generate_identifiable,
    import_dataset,
)
from .exceptions import InputFormatError, OutcomeMismatchError
from .granger import granger_screen
from .linalg import DEFAULT_TOL, ToleranceConfig
from .lti import LtiSystem, simulate
from .probe import ProbeConfig, random_tanh_network, simulate_nonlinear, solve_probe
from .relations import Relation

__all__ = [
    "EXAMPLE_NUMBERS",
    "run_example",
    "run_montecarlo",
    "classify_csv",
    "run_probe_trials",
    "report_rows",
]

SCHEMA_VERSION = 1
EXAMPLE_NUMBERS = (1, 2, 3, 4)

# regression-stable default seeds; any seed must reproduce the relation
# labels, these also pin the shipped rank fixtures
_EXAMPLE_SEEDS = {1: 3, 2: 0, 3: 1, 4: 2}


def _report(mode, seed, config, records, summary, timings) -> dict:
    return {"schema_version": SCHEMA_VERSION, "mode": mode, "seed": seed,
            "config": config, "records": records, "summary": summary,
            "timings": timings}


# ---------------------------------------------------------------------------
# worked examples
# ---------------------------------------------------------------------------

def _example_dataset(n: int, rng, T: int) -> tuple[LabeledDataset, dict]:
    """The four shipped scenarios: matrices, input ranges, window lengths."""
    x0 = np.array([1.0, 0.0])
    if n == 1:
        ds = generate(Relation.INDEPENDENT, T, rng, T_ini=3,
                      driver_dist=(-1.0, 1.0), psi_dist=(-10.0, 10.0),
                      mode="streams")
        return ds, {"granger_expect": "independent"}
    if n == 2:
        sys = LtiSystem([[1.0, -0.5], [0.5, 1.0]], [[-0.5], [2.0]],
                        [[2.0, -2.0]], [[0.0]])
        ds = generate(Relation.THETA_TO_PSI, T, rng, sys=sys, x0=x0,
                      driver_dist=(0.0, 1.0))
        return ds, {"granger_expect": "miss_theta_to_psi"}
    if n == 3:
        sys = LtiSystem([[1.5, -0.5], [0.5, 0.8]], [[-0.5, 1.5], [2.0, -2.0]],
                        [[2.0, -2.0], [1.0, -1.0]], [[2.0, 2.0], [1.0, 1.0]])
        ds = generate(Relation.THETA_AND_LATENT_TO_PSI, T, rng, sys=sys, x0=x0,
                      latent_dim=1, driver_dist=(-1.0, 1.0),
                      latent_dist=(-10.0, 10.0))
        return ds, {"granger_expect": "miss_theta_to_psi"}
    if n == 4:
        # two structurally zero output rows keep the observed groups rank
        # deficient; they are part of the observed vectors on purpose
        sys = LtiSystem([[0.5, -0.5], [0.5, 0.5]], [[-0.5, 3.0], [-2.0, 1.0]],
                        [[1.0, -2.0], [0.0, 0.0], [2.0, 0.5], [0.0, 0.0]],
                        [[1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
        ds = generate(Relation.LATENT_COMMON_CAUSE, T, rng, sys=sys, x0=x0,
                      output_split=2, latent_dist=(0.0, 1.0))
        return ds, {"granger_expect": "bidirectional_false_positive"}
    raise InputFormatError(f"example number must be 1..4, got {n}")


_EXPECTED_RELATION = {1: Relation.INDEPENDENT, 2: Relation.THETA_TO_PSI,
                      3: Relation.THETA_AND_LATENT_TO_PSI,
                      4: Relation.LATENT_COMMON_CAUSE}


def _granger_verdict_ok(n: int, screen: dict) -> tuple[bool, str]:
    """Check the expected qualitative pattern on the lag sweep."""
    recs = screen["records"]

    def missed(cause, effect):
        return any(r.cause == cause and r.effect == effect and not r.verdict
                   for r in recs)

    def detected(cause, effect):
        return any(r.cause == cause and r.effect == effect and r.verdict
                   for r in recs)

    if n == 1:
        ok = not any(r.verdict for r in recs)
        return ok, "no causality detected in either direction"
    if n == 2:
        return missed("theta_0", "psi_0"), "theta->psi missed at >= 1 lag"
    if n == 3:
        ok = missed("theta_0", "psi_0") and missed("theta_0", "psi_1")
        return ok, "theta->psi_0 and theta->psi_1 missed at >= 1 lag"
    ok = detected("theta_0", "psi_0") and detected("psi_0", "theta_0")
    return ok, "spurious detection in both directions at >= 1 lag"


def run_example(n: int, seed: int | None = None, T: int = 50,
                tol: ToleranceConfig = DEFAULT_TOL, lags=(1, 2, 3, 4, 5),
                alpha: float = 0.05) -> dict:
    """Reproduce scenario n end to end and assert its qualitative outcome.

    The classifier must return the scenario's true relation, and the lag
    sweep of the F-test must show the documented pattern (clean miss, or
    spurious bidirectional hit for the common-cause case). Deviation raises
    OutcomeMismatchError, which the CLI maps to exit code 2.
    """
    if n not in EXAMPLE_NUMBERS:
        raise InputFormatError(f"example number must be 1..4, got {n}")
    seed = _EXAMPLE_SEEDS[n] if seed is None else seed
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    ds, expect = _example_dataset(n, rng, T)

    t1 = time.perf_counter()
    outcome = classify(ds.theta, ds.psi, ds.T_ini, tol)
    t2 = time.perf_counter()

    # the F-test sees the scalar observed components; for the common-cause
    # case that is the nonzero component of each group
    if n == 4:
        g_theta, g_psi = ds.theta[:, :1], ds.psi[:, :1]
    else:
        g_theta, g_psi = ds.theta, ds.psi
    screen = granger_screen(g_theta, g_psi, lags=lags, alpha=alpha)
    t3 = time.perf_counter()

    becaus_ok = outcome.relation == _EXPECTED_RELATION[n]
    granger_ok, granger_desc = _granger_verdict_ok(n, screen)

    ident_ok, ident = (None, None)
    if n != 1 or ds.relation == Relation.INDEPENDENT:
        ident_ok, ident = check_identifiable(ds, tol)

    records = [{
        "becaus": outcome.to_dict(),
        "granger": [r.to_dict() for r in screen["records"]],
        "stationarity": {k: v.to_dict() for k, v in screen["stationarity"].items()},
        "identifiable": ident_ok,
        "identifiability_ranks": ident,
    }]
    summary = {
        "relation_expected": int(_EXPECTED_RELATION[n]),
        "relation_found": int(outcome.relation),
        "becaus_ok": becaus_ok,
        "granger_ok": granger_ok,
        "granger_criterion": granger_desc,
        "granger_detected": screen["detected_any_lag"],
    }
    timings = {"generate_s": t1 - t0, "classify_s": t2 - t1, "granger_s": t3 - t2}
    report = _report(f"example{n}", seed,
                     {"T": T, "T_ini": ds.T_ini, "alpha": alpha,
                      "lags": list(lags), "rank_rtol": tol.rank_rtol},
                     records, summary, timings)
    if not (becaus_ok and granger_ok):
        raise OutcomeMismatchError(
            f"example {n}: classifier={outcome.relation.label} "
            f"(expected {_EXPECTED_RELATION[n].label}), "
            f"granger_ok={granger_ok} ({granger_desc}); report: {summary}")
    return report


# ---------------------------------------------------------------------------
# Monte-Carlo sweep
# ---------------------------------------------------------------------------

def _draw_trial_dims(rng, relation: Relation):
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 3))
    p = int(rng.integers(1, 3))
    kv = int(rng.integers(1, 3))
    if relation == Relation.THETA_AND_LATENT_TO_PSI:
        p = max(p, 2)
    elif relation == Relation.PSI_AND_LATENT_TO_THETA:
        m = max(m, 2)
    elif relation == Relation.LATENT_COMMON_CAUSE:
        m, p = max(m, 2), max(p, 2)
    return n, m, p, kv


def _granger_pattern_ok(relation: Relation, detected: dict) -> bool:
    """Truth-implied detection pattern for the baseline's accuracy metric."""
    t2p = any(v for k, v in detected.items()
              if k.startswith("theta") and "->psi" in k)
    p2t = any(v for k, v in detected.items()
              if k.startswith("psi") and "->theta" in k)
    if relation in (Relation.INDEPENDENT, Relation.LATENT_COMMON_CAUSE):
        return not t2p and not p2t
    if relation in (Relation.THETA_TO_PSI, Relation.THETA_AND_LATENT_TO_PSI):
        return t2p and not p2t
    return p2t and not t2p


def run_montecarlo(trials: int = 500, seed: int = 0,
                   relations=tuple(Relation(i) for i in range(1, 7)),
                   T_range=(50, 200), tol: ToleranceConfig = DEFAULT_TOL,
                   include_granger: bool = False, granger_lags=(1, 2),
                   alpha: float = 0.05, negative_control: bool = False) -> dict:
    """`trials` seeded draws per relation: generate, classify, aggregate.

    Every trial uses an admissible generating structure and identifiability-
    checked data, so any misclassification (Inconclusive included) is a
    defect; the summary carries all_correct for the CLI to turn into an
    exit code. With negative_control=True the directed-pair systems are
    drawn with a full-row-rank feedthrough instead (violating the
    recoverability condition on purpose); mismatches are then expected and
    only counted.
    """
    if trials < 1:
        raise InputFormatError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    records = []
    per_relation = {}
    relations = tuple(Relation(r) for r in relations)
    if negative_control:
        relations = tuple(r for r in relations
                          if r in (Relation.THETA_TO_PSI, Relation.PSI_TO_THETA))
        if not relations:
            raise InputFormatError(
                "negative control needs relation 2 or 3 in the sweep")

    for relation in relations:
        stats = {"trials": 0, "becaus_correct": 0, "inconclusive": 0,
                 "granger_correct": 0}
        for trial in range(trials):
            n, m, p, kv = _draw_trial_dims(rng, relation)
            T = int(rng.integers(T_range[0], T_range[1] + 1))
            if negative_control:
                ds = _negative_control_dataset(rng, relation, n, m, p, T)
            else:
                ds = generate_identifiable(relation, T, rng, order=n, m=m, p=p,
                                           latent_dim=kv, tol=tol)
            outcome = classify(ds.theta, ds.psi, ds.T_ini, tol)
            ok = outcome.relation == relation
            rec = {"relation_truth": int(relation), "relation_pred": int(outcome.relation),
                   "ok": ok, "t1": outcome.t1, "t2": outcome.t2,
                   "t3": outcome.t3, "t4": outcome.t4,
                   "T": T, "T_ini": ds.T_ini, "order": n, "m": m, "p": p,
                   "latent_dim": kv}
            stats["trials"] += 1
            stats["becaus_correct"] += ok
            stats["inconclusive"] += outcome.relation == Relation.INCONCLUSIVE
            if include_granger:
                screen = granger_screen(ds.theta, ds.psi, lags=granger_lags,
                                        alpha=alpha)
                g_ok = _granger_pattern_ok(relation, screen["detected_any_lag"])
                rec["granger_ok"] = g_ok
                stats["granger_correct"] += g_ok
            records.append(rec)
        per_relation[int(relation)] = {
            "trials": stats["trials"],
            "becaus_accuracy": stats["becaus_correct"] / stats["trials"],
            "inconclusive": stats["inconclusive"],
            **({"granger_accuracy": stats["granger_correct"] / stats["trials"]}
               if include_granger else {}),
        }

    all_correct = all(v["becaus_accuracy"] == 1.0 for v in per_relation.values())
    summary = {"per_relation": per_relation,
               "all_correct": all_correct,
               "negative_control": negative_control}
    timings = {"total_s": time.perf_counter() - t0}
    return _report("montecarlo", seed,
                   {"trials_per_relation": trials, "T_range": list(T_range),
                    "relations": [int(r) for r in relations],
                    "include_granger": include_granger,
                    "rank_rtol": tol.rank_rtol},
                   records, summary, timings)


def _negative_control_dataset(rng, relation, n, m, p, T) -> LabeledDataset:
    # directed pair with a random (generically full-row-rank) feedthrough:
    # the recoverability condition fails and the classifier owes nothing
    from .lti import _minimal, _spectral_cap  # shared internals on purpose

    driver, response = (m, p) if relation == Relation.THETA_TO_PSI else (p, m)
    while True:
        A = _spectral_cap(rng.uniform(-1, 1, (n, n)))
        B = rng.uniform(-1, 1, (n, driver))
        C = rng.uniform(-1, 1, (response, n))
        D = rng.uniform(-1, 1, (response, driver))
        if _minimal(A, B, C):
            break
    sys = LtiSystem(A, B, C, D)
    return generate(relation, T, rng, sys=sys)


# ---------------------------------------------------------------------------
# user data
# ---------------------------------------------------------------------------

def classify_csv(path, T_ini: int | None = None, dims=None,
                 tol: ToleranceConfig = DEFAULT_TOL) -> dict:
    """Classify an exported or user-supplied CSV dataset."""
    theta, psi, sidecar = import_dataset(path, dims=dims)
    if T_ini is None:
        T_ini = int(sidecar.get("T_ini", 0)) or None
    if T_ini is None:
        raise InputFormatError("no T_ini in sidecar; pass one explicitly")
    t0 = time.perf_counter()
    outcome = classify(theta, psi, T_ini, tol)
    summary = {"relation": int(outcome.relation),
               "relation_label": outcome.relation.label,
               "relation_arrow": outcome.relation.arrow,
               "tests": list(outcome.pattern)}
    return _report("classify", sidecar.get("seed"),
                   {"path": str(path), "T_ini": T_ini,
                    "m": theta.shape[1], "p": psi.shape[1],
                    "rank_rtol": tol.rank_rtol},
                   [outcome.to_dict()], summary,
                   {"classify_s": time.perf_counter() - t0})


# ---------------------------------------------------------------------------
# tanh-network probe study
# ---------------------------------------------------------------------------

def run_probe_trials(trials: int = 50, seed: int = 0, T: int = 50,
                     T_ini: int = 4, order: int = 4,
                     config: ProbeConfig | None = None) -> dict:
    """Seeded tanh networks driven by uniform input; probe each realization.

    The summary reports how often the theta-drive ratio exceeds the
    psi-drive ratio, i.e. how often the probe points at the true input.
    """
    if trials < 1:
        raise InputFormatError(f"trials must be >= 1, got {trials}")
    config = ProbeConfig() if config is None else config
    t0 = time.perf_counter()
    records = []
    hits = 0
    worst_feas = 0.0
    for trial in range(trials):
        net_rng = np.random.default_rng(seed * 1000 + trial)
        net = random_tanh_network(net_rng, order=order)
        theta = net_rng.uniform(-1, 1, (T, net.b.shape[1]))
        psi = simulate_nonlinear(net, theta)
        res = solve_probe(theta, psi, T_ini, config)
        hit = res.inferred_input == "theta"
        hits += hit
        worst_feas = max(worst_feas, res.psi_side.feasibility,
                         res.theta_side.feasibility)
        records.append({"trial": trial, "ratio_theta": res.ratio_theta,
                        "ratio_psi": res.ratio_psi,
                        "inferred_input": res.inferred_input, "correct": hit,
                        "feasibility": max(res.psi_side.feasibility,
                                           res.theta_side.feasibility)})
    summary = {"trials": trials, "input_identified": hits,
               "input_identified_rate": hits / trials,
               "worst_feasibility": worst_feas}
    return _report("nonlinear_probe", seed,
                   {"trials": trials, "T": T, "T_ini": T_ini, "order": order,
                    "r": config.r},
                   records, summary, {"total_s": time.perf_counter() - t0})


def probe_csv(path, T_ini: int = 4, dims=None,
              config: ProbeConfig | None = None) -> dict:
    """Probe a CSV dataset instead of a generated network."""
    theta, psi, sidecar = import_dataset(path, dims=dims)
    config = ProbeConfig() if config is None else config
    t0 = time.perf_counter()
    res = solve_probe(theta, psi, T_ini, config)
    return _report("nonlinear_probe", sidecar.get("seed"),
                   {"path": str(path), "T_ini": T_ini, "r": config.r},
                   [res.to_dict()],
                   {"inferred_input": res.inferred_input,
                    "ratio_theta": res.ratio_theta, "ratio_psi": res.ratio_psi},
                   {"total_s": time.perf_counter() - t0})


# ---------------------------------------------------------------------------
# tidy rows for --format csv
# ---------------------------------------------------------------------------

def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple)):
        out[prefix] = ";".join(str(v) for v in value)
    else:
        out[prefix] = "" if value is None else value


def report_rows(report: dict) -> tuple[list, list]:
    """One tidy row per record; returns (fieldnames, rows of dicts)."""
    rows = []
    for rec in report.get("records", []):
        flat = {}
        _flatten("", rec, flat)
        rows.append(flat)
    if not rows:
        return [], []
    names = sorted({k for row in rows for k in row})
    return names, rows
