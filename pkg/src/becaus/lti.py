"""Ground-truth LTI machinery.

Simulation, structural quantities (order, lag, observability, impulse
Toeplitz), the feedthrough-structure conditions under which the rank tests
provably recover the generating relation, and rejection-sampling of random
systems that satisfy them. Nothing here is visible to the classifier; it
exists to generate labeled data and to validate results against a known
truth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    GenerationExhaustedError,
    UnobservableSystemError,
)
from .linalg import DEFAULT_TOL, ToleranceConfig, numerical_rank
from .relations import Relation

__all__ = [
    "LtiSystem",
    "simulate",
    "observability_matrix",
    "toeplitz_matrix",
    "compute_lag",
    "DiscoverabilityReport",
    "check_discoverable",
    "random_discoverable_system",
    "StateReconstruction",
    "reconstruct_xini",
    "default_x0",
]

REJECTION_BOUND = 10_000
# conditioning margin for minimality: smallest/largest singular value of the
# controllability and observability matrices must exceed this
MINIMALITY_MARGIN = 1e-6
SPECTRAL_CAP = 1.05
FEEDTHROUGH_FLOOR = 0.1


@dataclass(frozen=True)
class LtiSystem:
    """Minimal state-space form x(t+1) = A x(t) + B u(t), y(t) = C x(t) + D u(t)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name,
                               np.atleast_2d(np.asarray(getattr(self, name), float)))
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise DimensionMismatchError(f"A must be square, got {self.a.shape}")
        if self.b.shape[0] != n or self.c.shape[1] != n:
            raise DimensionMismatchError("B rows and C cols must equal order")
        if self.d.shape != (self.c.shape[0], self.b.shape[1]):
            raise DimensionMismatchError(
                f"D must be {(self.c.shape[0], self.b.shape[1])}, got {self.d.shape}")

    @property
    def order(self) -> int:
        return self.a.shape[0]

    @property
    def input_dim(self) -> int:
        return self.b.shape[1]

    @property
    def output_dim(self) -> int:
        return self.c.shape[0]

    def to_text(self) -> str:
        """Self-describing fixture format: dims line then row-major entries."""
        lines = [f"lti {self.order} {self.input_dim} {self.output_dim}"]
        for name in ("a", "b", "c", "d"):
            M = getattr(self, name)
            lines.append(f"{name} " + " ".join(repr(float(v)) for v in M.ravel()))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "LtiSystem":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        tag, n, k, p = lines[0].split()
        if tag != "lti":
            raise DimensionMismatchError(f"expected 'lti' header, got {tag!r}")
        n, k, p = int(n), int(k), int(p)
        shapes = {"a": (n, n), "b": (n, k), "c": (p, n), "d": (p, k)}
        mats = {}
        for ln in lines[1:]:
            name, *vals = ln.split()
            mats[name] = np.array([float(v) for v in vals]).reshape(shapes[name])
        return LtiSystem(mats["a"], mats["b"], mats["c"], mats["d"])


def default_x0(order: int) -> np.ndarray:
    x0 = np.zeros(order)
    if order:
        x0[0] = 1.0
    return x0


def simulate(sys: LtiSystem, u, x0=None, T=None):
    """Roll the recursion forward; returns (y of shape (T, p), x of shape (T+1, n)).

    x[t] is the state entering step t, so x[0] = x0 and x[T] is the state
    one step past the last output.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[1] != sys.input_dim:
        raise DimensionMismatchError(
            f"input has {u.shape[1]} components, system takes {sys.input_dim}")
    if T is None:
        T = u.shape[0]
    if u.shape[0] < T:
        raise DimensionMismatchError(f"input length {u.shape[0]} < T={T}")
    x0 = default_x0(sys.order) if x0 is None else np.asarray(x0, float).ravel()
    x = np.zeros((T + 1, sys.order))
    x[0] = x0
    y = np.zeros((T, sys.output_dim))
    for t in range(T):
        y[t] = sys.c @ x[t] + sys.d @ u[t]
        x[t + 1] = sys.a @ x[t] + sys.b @ u[t]
    return y, x


def observability_matrix(sys: LtiSystem, tau: int) -> np.ndarray:
    """stack(C, CA, ..., CA^(tau-1))."""
    if tau < 1:
        raise DimensionMismatchError(f"tau must be >= 1, got {tau}")
    rows = []
    Ak = np.eye(sys.order)
    for _ in range(tau):
        rows.append(sys.c @ Ak)
        Ak = sys.a @ Ak
    return np.vstack(rows)


def toeplitz_matrix(sys: LtiSystem, tau: int) -> np.ndarray:
    """Block lower-triangular input-to-output map over tau steps.

    Block (i, j) is D on the diagonal, C A^(i-j-1) B below it, zero above.
    """
    if tau < 1:
        raise DimensionMismatchError(f"tau must be >= 1, got {tau}")
    p, k = sys.output_dim, sys.input_dim
    M = np.zeros((p * tau, k * tau))
    # markov parameters: D, CB, CAB, ...
    markov = [sys.d]
    Ak = np.eye(sys.order)
    for _ in range(tau - 1):
        markov.append(sys.c @ Ak @ sys.b)
        Ak = sys.a @ Ak
    for i in range(tau):
        for j in range(i + 1):
            M[i * p:(i + 1) * p, j * k:(j + 1) * k] = markov[i - j]
    return M


def compute_lag(sys: LtiSystem, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Smallest tau with full observability rank; raises if never reached."""
    n = sys.order
    if n == 0:
        return 0
    rows = []
    Ak = np.eye(n)
    for tau in range(1, n + 1):
        rows.append(sys.c @ Ak)
        if numerical_rank(np.vstack(rows), tol) == n:
            return tau
        Ak = sys.a @ Ak
    raise UnobservableSystemError(
        f"observability rank stalls at {numerical_rank(np.vstack(rows), tol)} < {n}")


@dataclass(frozen=True)
class DiscoverabilityReport:
    """Feedthrough-structure conditions for a generating system.

    strong_* are the general sufficient conditions stated for the two-block
    partition (first observed group vs second): both diagonal feedthrough
    blocks nonzero and neither stacked row block [C_i, D_i1, D_i2] of full
    row rank. weak_ok is the lighter per-relation condition actually used by
    the generator:

      Relation 2/3: D not of full row rank
      Relation 4/5: [C, D] not of full row rank
      Relation 6:   [C_1, D_1] and [C_2, D_2] each not of full row rank

    Relation 1 has no generating system, so weak_ok is vacuously true.
    """

    relation: Relation
    weak_ok: bool
    d11_nonzero: bool = False
    d22_nonzero: bool = False
    first_rows_deficient: bool = False
    second_rows_deficient: bool = False

    @property
    def strong_ok(self) -> bool:
        return (self.d11_nonzero and self.d22_nonzero
                and self.first_rows_deficient and self.second_rows_deficient)


def _row_rank_deficient(M, tol) -> bool:
    M = np.atleast_2d(M)
    if M.shape[0] == 0:
        return False
    return numerical_rank(M, tol) < M.shape[0]


def check_discoverable(sys: LtiSystem, relation: Relation,
                       output_split: int | None = None,
                       input_split: int | None = None,
                       tol: ToleranceConfig = DEFAULT_TOL) -> DiscoverabilityReport:
    """Evaluate the generating-side conditions for `relation`.

    output_split partitions the output rows into the (theta, psi) groups and
    is required for Relation 6; input_split partitions the input columns into
    (observed, latent) and defaults to all-observed for Relations 2/3, with
    the latent columns last for Relations 4/5.
    """
    relation = Relation(relation)
    C, D = sys.c, sys.d

    if relation == Relation.INDEPENDENT:
        return DiscoverabilityReport(relation, True)

    if relation in (Relation.THETA_TO_PSI, Relation.PSI_TO_THETA):
        weak = _row_rank_deficient(D, tol)
        return DiscoverabilityReport(relation, weak)

    if relation in (Relation.THETA_AND_LATENT_TO_PSI,
                    Relation.PSI_AND_LATENT_TO_THETA):
        weak = _row_rank_deficient(np.hstack([C, D]), tol)
        return DiscoverabilityReport(relation, weak)

    # common cause: outputs split into the two observed groups
    if output_split is None:
        raise DimensionMismatchError("output_split required for the common-cause case")
    s = output_split
    isplit = sys.input_dim if input_split is None else input_split
    C1, C2 = C[:s], C[s:]
    D1, D2 = D[:s], D[s:]
    D11, D12 = D1[:, :isplit], D1[:, isplit:]
    D21, D22 = D2[:, :isplit], D2[:, isplit:]
    weak = (_row_rank_deficient(np.hstack([C1, D1]), tol)
            and _row_rank_deficient(np.hstack([C2, D2]), tol))
    return DiscoverabilityReport(
        relation, weak,
        d11_nonzero=bool(D11.size) and bool(np.any(D11 != 0.0)),
        d22_nonzero=bool(D22.size) and bool(np.any(D22 != 0.0)),
        first_rows_deficient=_row_rank_deficient(np.hstack([C1, D11, D12]), tol),
        second_rows_deficient=_row_rank_deficient(np.hstack([C2, D21, D22]), tol),
    )


def _spectral_cap(A: np.ndarray, cap: float = SPECTRAL_CAP) -> np.ndarray:
    rho = max(abs(np.linalg.eigvals(A))) if A.size else 0.0
    if rho > cap:
        A = A * (cap / rho)
    return A


def _minimal(A, B, C, margin: float = MINIMALITY_MARGIN) -> bool:
    n = A.shape[0]
    ctrb = np.hstack([np.linalg.matrix_power(A, k) @ B for k in range(n)])
    obsv = np.vstack([C @ np.linalg.matrix_power(A, k) for k in range(n)])
    for M in (ctrb, obsv):
        if min(M.shape) < n:
            return False
        s = np.linalg.svd(M, compute_uv=False)
        if s[0] == 0 or s[-1] / s[0] < margin:
            return False
    return True


def _project_rows(parts, rng):
    """Kill one row direction of the stacked parts: M <- M - z (z^T M).

    The result has row rank exactly one short (generically), which is how
    the generator produces row-rank-deficient [C, D] blocks on demand.
    """
    M = np.hstack(parts)
    z = rng.normal(size=M.shape[0])
    z /= np.linalg.norm(z)
    M = M - np.outer(z, z @ M)
    out, c = [], 0
    for part in parts:
        out.append(M[:, c:c + part.shape[1]])
        c += part.shape[1]
    return out


def random_discoverable_system(relation: Relation, order: int,
                               driver_dim: int, response_dim: int,
                               latent_dim: int = 0, rng=None) -> LtiSystem:
    """Rejection-sample a minimal system satisfying the relation's weak condition.

    Dimensions are given in system roles, not observed roles: `driver_dim`
    inputs drive `response_dim` outputs (plus `latent_dim` extra latent
    inputs for the partial case; for the common-cause case driver_dim and
    response_dim are the two output group sizes and latent_dim the input
    count). The caller maps observed theta/psi onto these roles.
    """
    relation = Relation(relation)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    n, m, p, kv = order, driver_dim, response_dim, latent_dim

    if relation == Relation.INDEPENDENT:
        raise DimensionMismatchError("the independent relation has no generating system")
    if relation in (Relation.THETA_AND_LATENT_TO_PSI,
                    Relation.PSI_AND_LATENT_TO_THETA) and p < 2:
        raise GenerationExhaustedError(
            "partial-cause case needs >= 2 response components for a "
            "row-deficient [C, D]")
    if relation == Relation.LATENT_COMMON_CAUSE and (m < 2 or p < 2):
        raise GenerationExhaustedError(
            "common-cause case needs >= 2 components in each observed group")

    for _ in range(REJECTION_BOUND):
        A = _spectral_cap(rng.uniform(-1, 1, (n, n)))

        if relation in (Relation.THETA_TO_PSI, Relation.PSI_TO_THETA):
            B = rng.uniform(-1, 1, (n, m))
            C = rng.uniform(-1, 1, (p, n))
            if p == 1:
                D = np.zeros((1, m))  # only row-deficient 1-row D is the zero one
            else:
                D, = _project_rows([rng.uniform(-1, 1, (p, m))], rng)
            sys = LtiSystem(A, B, C, D)
            if _minimal(A, B, C) and check_discoverable(sys, relation).weak_ok:
                return sys

        elif relation in (Relation.THETA_AND_LATENT_TO_PSI,
                          Relation.PSI_AND_LATENT_TO_THETA):
            B = rng.uniform(-1, 1, (n, m + kv))
            C, D = _project_rows([rng.uniform(-1, 1, (p, n)),
                                  rng.uniform(-1, 1, (p, m + kv))], rng)
            if np.max(np.abs(D[:, m:])) < FEEDTHROUGH_FLOOR:
                continue  # latent must actually feed through
            sys = LtiSystem(A, B, C, D)
            if _minimal(A, B, C) and check_discoverable(sys, relation).weak_ok:
                return sys

        else:  # common cause
            B = rng.uniform(-1, 1, (n, kv))
            C1, Dth = _project_rows([rng.uniform(-1, 1, (m, n)),
                                     rng.uniform(-1, 1, (m, kv))], rng)
            C2, Dps = _project_rows([rng.uniform(-1, 1, (p, n)),
                                     rng.uniform(-1, 1, (p, kv))], rng)
            if (np.max(np.abs(Dth)) < FEEDTHROUGH_FLOOR
                    or np.max(np.abs(Dps)) < FEEDTHROUGH_FLOOR):
                continue
            C = np.vstack([C1, C2])
            D = np.vstack([Dth, Dps])
            sys = LtiSystem(A, B, C, D)
            if (_minimal(A, B, C)
                    and check_discoverable(sys, relation, output_split=m).weak_ok):
                return sys

    raise GenerationExhaustedError(
        f"no admissible system after {REJECTION_BOUND} draws for "
        f"{relation.label} with n={n}, dims=({m},{p},{kv})")


@dataclass(frozen=True)
class StateReconstruction:
    x_ini: np.ndarray
    unique: bool
    residual: float


def reconstruct_xini(sys: LtiSystem, u_ini, y_ini,
                     tol: ToleranceConfig = DEFAULT_TOL) -> StateReconstruction:
    """Recover the state at the start of an input/output window.

    Solves O_T x = vec(y) - Toe_T vec(u) in least squares. The answer is
    unique iff the window is at least as long as the lag; shorter windows
    return the minimum-norm candidate flagged unique=False. Used only for
    validation; the classifier never sees states.
    """
    u = np.asarray(u_ini, float)
    y = np.asarray(y_ini, float)
    if u.ndim == 1:
        u = u[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if u.shape[0] != y.shape[0]:
        raise DimensionMismatchError("input and output windows differ in length")
    T = u.shape[0]
    O = observability_matrix(sys, T)
    rhs = y.ravel() - toeplitz_matrix(sys, T) @ u.ravel()
    x, *_ = np.linalg.lstsq(O, rhs, rcond=None)
    residual = float(np.linalg.norm(O @ x - rhs))
    unique = numerical_rank(O, tol) == sys.order
    return StateReconstruction(x_ini=x, unique=unique, residual=residual)
