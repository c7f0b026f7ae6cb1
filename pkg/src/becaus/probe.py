"""Fictitious-control probe for input/output asymmetry.

Two convex programs over the data's Hankel span, mirror images of each
other. The psi-drive program asks the second psi step to track a large
reference r while penalizing theta energy and the l1 norm of the Hankel
combination g; the theta-drive program swaps the roles. Each program's
result is summarized by the ratio ||step 2|| / ||step 1|| of the driven
variable (Euclidean norms): a variable that acts as a free input can jump
to the reference with a tiny first step, so its ratio explodes, while a
variable pinned down by dynamics cannot. The variable with the larger
ratio is inferred to be the input.

Numerical choices that matter (documented prominently on purpose):

* Each series is scaled to unit RMS before anything else. The ratio
  denominators are single data-pinned samples, so a raw scale imbalance
  between theta and psi (say one series lives at 1e1 and the other at 1e-1)
  would swamp the asymmetry the probe is after. Disable via
  ProbeConfig(normalize=False).
* The solve is performed on the exact reformulation g = r * g_tilde, which
  brings the objective to O(1) scale; raw r = 1000 problems otherwise sit
  near the solver's accuracy cliff.
* Among (near-)optimal solutions the problem can be flat in the driven
  variable's first step: that step appears in neither the tracking nor the
  energy term, so its optimal value is arbitrary on the optimal face. A
  second solve picks the canonical representative minimizing ||step 1||
  subject to the same constraints and objective <= v* + selection_rtol *
  (1 + |v*|). This realizes the question the ratio is meant to answer:
  does a small-first-step solution exist at all?

The primary solver is cvxpy (Clarabel). An independent cross-check route,
used by the tests on small instances, eliminates the equality constraints
onto the null space and minimizes the smoothed objective with
sqrt(g^2 + eps^2) in place of |g| under L-BFGS-B; the two routes must agree
on the objective to 1e-4 relative.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

import cvxpy as cp

from .exceptions import (
    DegenerateReferenceError,
    DimensionMismatchError,
    SolverFailureError,
)
from .classifier import partition
from .linalg import null_space_basis

__all__ = [
    "NonlinearSystem",
    "simulate_nonlinear",
    "random_tanh_network",
    "ProbeConfig",
    "ProbeSide",
    "ProbeResult",
    "solve_probe",
    "smooth_reference_objective",
]


@dataclass(frozen=True)
class NonlinearSystem:
    """x(t+1) = tanh(A x(t) + B theta(t)), psi(t) = C x(t), tanh componentwise."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name,
                               np.atleast_2d(np.asarray(getattr(self, name), float)))
        n = self.a.shape[0]
        if self.a.shape != (n, n) or self.b.shape[0] != n or self.c.shape[1] != n:
            raise DimensionMismatchError("inconsistent tanh-network dimensions")

    @property
    def order(self) -> int:
        return self.a.shape[0]


def simulate_nonlinear(sys: NonlinearSystem, theta, x0=None, T=None) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = theta[:, None]
    if theta.shape[1] != sys.b.shape[1]:
        raise DimensionMismatchError(
            f"input has {theta.shape[1]} components, network takes {sys.b.shape[1]}")
    if T is None:
        T = theta.shape[0]
    x = np.zeros(sys.order) if x0 is None else np.asarray(x0, float).ravel()
    psi = np.zeros((T, sys.c.shape[0]))
    for t in range(T):
        psi[t] = sys.c @ x
        x = np.tanh(sys.a @ x + sys.b @ theta[t])
    return psi


def random_tanh_network(rng, order: int = 4, input_dim: int = 1,
                        output_dim: int = 1, spectral_radius: float = 0.9,
                        ) -> NonlinearSystem:
    """Entries uniform on (-1, 1); A rescaled to the exact spectral radius."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    A = rng.uniform(-1, 1, (order, order))
    rho = max(abs(np.linalg.eigvals(A)))
    if rho > 0:
        A *= spectral_radius / rho
    B = rng.uniform(-1, 1, (order, input_dim))
    C = rng.uniform(-1, 1, (output_dim, order))
    return NonlinearSystem(A, B, C)


@dataclass(frozen=True)
class ProbeConfig:
    r: float = 1000.0
    tracking_weight: float = 1.0
    energy_weight: float = 1.0
    l1_weight: float = 1.0
    selection_rtol: float = 1e-4
    normalize: bool = True
    cross_check: bool = False

    def __post_init__(self):
        if (self.tracking_weight < 0 or self.energy_weight < 0
                or self.l1_weight < 0):
            raise ValueError("weights must be nonnegative")
        if self.selection_rtol <= 0:
            raise ValueError("selection_rtol must be positive")


DEFAULT_PROBE = ProbeConfig()


@dataclass(frozen=True)
class ProbeSide:
    """One program's solution summary; `driven` names the tracked variable."""

    driven: str
    ratio: float
    step1_norm: float
    step2_norm: float
    objective: float
    feasibility: float
    status: str
    selected: bool
    cross_check_rel: float | None = None


@dataclass(frozen=True)
class ProbeResult:
    ratio_psi: float
    ratio_theta: float
    inferred_input: str
    psi_side: ProbeSide
    theta_side: ProbeSide
    T_ini: int
    config: ProbeConfig = field(default_factory=ProbeConfig)

    def to_dict(self) -> dict:
        def side(s: ProbeSide) -> dict:
            return {"driven": s.driven, "ratio": s.ratio,
                    "step1_norm": s.step1_norm, "step2_norm": s.step2_norm,
                    "objective": s.objective, "feasibility": s.feasibility,
                    "status": s.status, "selected": s.selected,
                    "cross_check_rel": s.cross_check_rel}
        return {"ratio_psi": self.ratio_psi, "ratio_theta": self.ratio_theta,
                "inferred_input": self.inferred_input,
                "psi_probe": side(self.psi_side),
                "theta_probe": side(self.theta_side),
                "T_ini": self.T_ini, "r": self.config.r}


def _project_onto_constraints(g, E, b):
    # snap the iterate exactly onto E g = b; the correction is at solver
    # tolerance scale, so objective and ratios move negligibly
    corr, *_ = np.linalg.lstsq(E, E @ g - b, rcond=None)
    return g - corr


def _solve_scaled(Q, q0, E, b, l1, r, sel_rows, sel_rtol):
    """Two-stage solve of min ||Q g - q0||^2 + l1*||g||_1 s.t. E g = b.

    Stage 1 solves the r-rescaled problem; stage 2 reselects, among
    solutions within sel_rtol of the optimum, the one minimizing
    ||sel_rows @ g||. Returns (g, objective, status, selected).
    """
    scale = r if r != 0 else 1.0
    gt = cp.Variable(Q.shape[1])
    obj = cp.sum_squares(Q @ gt - q0 / scale) + (l1 / scale) * cp.norm1(gt)
    try:
        prob = cp.Problem(cp.Minimize(obj), [E @ gt == b / scale])
        prob.solve(solver=cp.CLARABEL)
    except cp.SolverError as exc:
        raise SolverFailureError(f"stage-1 solve failed: {exc}") from exc
    if gt.value is None:
        raise SolverFailureError(f"stage-1 solve returned status {prob.status}")
    g1 = scale * np.asarray(gt.value)
    v1 = float(prob.value)

    g2 = None
    if sel_rows.size:
        gs = cp.Variable(Q.shape[1])
        obj2 = cp.sum_squares(Q @ gs - q0 / scale) + (l1 / scale) * cp.norm1(gs)
        sel = cp.Problem(cp.Minimize(cp.sum_squares(sel_rows @ gs)),
                         [E @ gs == b / scale,
                          obj2 <= v1 + sel_rtol * (1.0 + abs(v1))])
        try:
            sel.solve(solver=cp.CLARABEL)
            if gs.value is not None:
                g2 = scale * np.asarray(gs.value)
        except cp.SolverError:
            g2 = None  # canonical selection is best effort; keep stage 1
    g = g2 if g2 is not None else g1
    g = _project_onto_constraints(g, E, b)
    return g, v1 * scale * scale, prob.status, g2 is not None


def smooth_reference_objective(Q, q0, E, b, l1=1.0, eps=None):
    """Independent solution route for cross-checking the convex solver.

    Eliminates E g = b exactly (particular solution plus null-space
    coordinates), replaces |g| with sqrt(g^2 + eps^2), and runs L-BFGS-B on
    the smooth surrogate. Returns the true (unsmoothed) objective at the
    minimizer. Intended for small instances; quality degrades with size.
    """
    gp, *_ = np.linalg.lstsq(E, b, rcond=None)
    Z = null_space_basis(E)
    if eps is None:
        eps = 1e-8 * max(1.0, float(np.abs(q0).max()) if q0.size else 1.0)

    def f(h):
        g = gp + Z @ h
        res = Q @ g - q0
        sm = np.sqrt(g * g + eps * eps)
        val = res @ res + l1 * sm.sum()
        grad = Z.T @ (2.0 * Q.T @ res + l1 * (g / sm))
        return val, grad

    out = minimize(f, np.zeros(Z.shape[1]), jac=True, method="L-BFGS-B",
                   options=dict(maxiter=20000, ftol=1e-15, gtol=1e-10, maxcor=30))
    g = gp + Z @ out.x
    res = Q @ g - q0
    return float(res @ res + l1 * float(np.abs(g).sum())), g


def _rms_normalize(w):
    rms = float(np.sqrt(np.mean(w ** 2)))
    return w / rms if rms > 0 else w


def solve_probe(theta_d, psi_d, T_ini: int = 4,
                config: ProbeConfig = DEFAULT_PROBE) -> ProbeResult:
    """Run both fictitious-drive programs and report the step ratios.

    theta_d, psi_d: observed series, (T,) or (T, dim). The returned sides
    carry the equality residual of the actually returned solution relative
    to 1 + ||rhs||; both solve stages impose the constraints exactly, so
    this is a verification quantity, not a knob.
    """
    theta = np.asarray(theta_d, dtype=float)
    psi = np.asarray(psi_d, dtype=float)
    if theta.ndim == 1:
        theta = theta[:, None]
    if psi.ndim == 1:
        psi = psi[:, None]
    if config.normalize:
        theta = _rms_normalize(theta)
        psi = _rms_normalize(psi)

    blocks = partition(theta, psi, T_ini, T_f=2)
    m, p = blocks.m, blocks.p
    E = blocks.past
    b = blocks.past_rhs
    if config.r == 0 and np.linalg.norm(b) <= 1e-12:
        raise DegenerateReferenceError(
            "reference r = 0 with a zero initial window: both programs have "
            "the all-zero solution and the ratios are undefined")

    wt = np.sqrt(config.tracking_weight)
    we = np.sqrt(config.energy_weight)
    b_scale = 1.0 + float(np.linalg.norm(b))

    def run(tag):
        if tag == "psi":
            track = blocks.psi_step(1)       # drive psi's second step to r
            energy = blocks.theta_f          # keep the whole theta future small
            first = blocks.psi_step(0)
            dim = p
        else:
            track = blocks.theta_step(1)
            energy = blocks.psi_f
            first = blocks.theta_step(0)
            dim = m
        Q = np.vstack([wt * track, we * energy])
        q0 = np.concatenate([wt * np.full(dim, config.r),
                             np.zeros(energy.shape[0])])
        g, obj, status, selected = _solve_scaled(
            Q, q0, E, b, config.l1_weight, config.r, first, config.selection_rtol)
        s1 = float(np.linalg.norm(first @ g))
        s2 = float(np.linalg.norm(track @ g))
        # a denominator this small means the step is numerically free;
        # the floor keeps the ratio finite and JSON-serializable
        ratio = s2 / max(s1, 1e-12 * (1.0 + s2))
        feas = float(np.linalg.norm(E @ g - b)) / b_scale
        check = None
        if config.cross_check:
            ref, _ = smooth_reference_objective(Q, q0, E, b, config.l1_weight)
            check = abs(obj - ref) / max(1.0, abs(obj))
        return ProbeSide(driven=tag, ratio=ratio, step1_norm=s1, step2_norm=s2,
                         objective=obj, feasibility=feas, status=status,
                         selected=selected, cross_check_rel=check)

    psi_side = run("psi")
    theta_side = run("theta")
    inferred = "theta" if theta_side.ratio > psi_side.ratio else "psi"
    return ProbeResult(ratio_psi=psi_side.ratio, ratio_theta=theta_side.ratio,
                       inferred_input=inferred, psi_side=psi_side,
                       theta_side=theta_side, T_ini=T_ini, config=config)
