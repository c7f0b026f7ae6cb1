"""The BeCaus test: rank decisions on Hankel-partitioned data.

Only the two observed series and a past-window length enter; no system
matrices, no latent signals. Write P = stack(Theta_p, Psi_p) for the past
rows and split each future block into its step-1 and step-2 rows. With
r(.) the numerical rank, the four tests are decided as

  test1: r([P; Theta_f]) = r(P) + 2m  and  r([P; Theta_f; Psi_f]) = r([P; Theta_f])
  test2: the same with theta and psi exchanged
  test3: r([P; Tf1; Pf1; Pf2]) < r([P; Tf1; Pf1]) + p
  test4: r([P; Tf1; Pf1; Tf2]) < r([P; Tf1; Pf1]) + m

test1 says: any two-step theta continuation is feasible (the theta-future
map is onto, r(P)+2m) and the psi continuation is then pinned down (adding
Psi_f buys no rank). test3 says: after fixing one feasible step (witnessed
by the recorded data itself, which is a Hankel column by construction),
some second psi step admits no completion, i.e. the reachable set of
psi_f(2) over the solution set is a proper subspace. The boolean pattern
picks the relation:

  (F,F,F,F) -> 1   (T,F,T,F) -> 2   (F,T,F,T) -> 3
  (F,F,T,F) -> 4   (F,F,F,T) -> 5   (F,F,T,T) -> 6

Anything else is Inconclusive: the data violated an assumption (not
identifiable, or the generating system is not discoverable); it is
reported, never coerced into a nearest relation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataIntegrityError, DimensionMismatchError, LengthTooShortError
from .linalg import DEFAULT_TOL, ToleranceConfig, build_hankel, is_feasible, numerical_rank
from .relations import Relation

__all__ = ["HankelBlocks", "partition", "test1", "test2", "test3", "test4",
           "classify", "BecausOutcome", "PATTERN_TABLE"]

PATTERN_TABLE = {
    (False, False, False, False): Relation.INDEPENDENT,
    (True, False, True, False): Relation.THETA_TO_PSI,
    (False, True, False, True): Relation.PSI_TO_THETA,
    (False, False, True, False): Relation.THETA_AND_LATENT_TO_PSI,
    (False, False, False, True): Relation.PSI_AND_LATENT_TO_THETA,
    (False, False, True, True): Relation.LATENT_COMMON_CAUSE,
}


@dataclass(frozen=True)
class HankelBlocks:
    """Past/future row partition of the two series' depth-(T_ini+T_f) Hankels."""

    theta_p: np.ndarray
    theta_f: np.ndarray
    psi_p: np.ndarray
    psi_f: np.ndarray
    theta_ini: np.ndarray
    psi_ini: np.ndarray
    m: int
    p: int
    T_ini: int
    T_f: int

    @property
    def n_cols(self) -> int:
        return self.theta_p.shape[1]

    @property
    def past(self) -> np.ndarray:
        return np.vstack([self.theta_p, self.psi_p])

    @property
    def past_rhs(self) -> np.ndarray:
        return np.concatenate([self.theta_ini.ravel(), self.psi_ini.ravel()])

    def theta_step(self, i: int) -> np.ndarray:
        return self.theta_f[self.m * i:self.m * (i + 1)]

    def psi_step(self, i: int) -> np.ndarray:
        return self.psi_f[self.p * i:self.p * (i + 1)]


def _as_series(w, name):
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2 or w.shape[0] == 0:
        raise DimensionMismatchError(f"{name} must be a nonempty (T,) or (T, q) array")
    return w


def partition(theta_d, psi_d, T_ini: int, T_f: int = 2) -> HankelBlocks:
    """Build the past/future blocks from raw data.

    The first T_ini samples of each series double as the pinned initial
    window. T_f defaults to 2 (one committed step plus one probed step);
    larger values are accepted for experimentation but the relation table
    is only meaningful at 2.
    """
    theta = _as_series(theta_d, "theta_d")
    psi = _as_series(psi_d, "psi_d")
    if theta.shape[0] != psi.shape[0]:
        raise DimensionMismatchError(
            f"series lengths differ: {theta.shape[0]} vs {psi.shape[0]}")
    if T_ini < 1:
        raise LengthTooShortError(f"T_ini must be >= 1, got {T_ini}")
    if T_f < 1:
        raise LengthTooShortError(f"T_f must be >= 1, got {T_f}")
    L = T_ini + T_f
    if theta.shape[0] < L:
        raise LengthTooShortError(
            f"need at least T_ini + T_f = {L} samples, got {theta.shape[0]}")
    m, p = theta.shape[1], psi.shape[1]
    Ht = build_hankel(theta, L)
    Hp = build_hankel(psi, L)
    return HankelBlocks(
        theta_p=Ht[:m * T_ini], theta_f=Ht[m * T_ini:],
        psi_p=Hp[:p * T_ini], psi_f=Hp[p * T_ini:],
        theta_ini=theta[:T_ini].copy(), psi_ini=psi[:T_ini].copy(),
        m=m, p=p, T_ini=T_ini, T_f=T_f)


def _rank_profile(blocks: HankelBlocks, tol: ToleranceConfig) -> dict:
    P = blocks.past
    M1 = np.vstack([P, blocks.theta_step(0), blocks.psi_step(0)])
    return {
        "past": numerical_rank(P, tol),
        "past_theta": numerical_rank(np.vstack([P, blocks.theta_f]), tol),
        "past_psi": numerical_rank(np.vstack([P, blocks.psi_f]), tol),
        "full": numerical_rank(np.vstack([P, blocks.theta_f, blocks.psi_f]), tol),
        "one_step": numerical_rank(M1, tol),
        "one_step_psi2": numerical_rank(np.vstack([M1, blocks.psi_step(1)]), tol),
        "one_step_theta2": numerical_rank(np.vstack([M1, blocks.theta_step(1)]), tol),
    }


def _t1(r: dict, blocks: HankelBlocks) -> bool:
    free = blocks.m * blocks.T_f
    return (r["past_theta"] == r["past"] + free) and (r["full"] == r["past_theta"])


def _t2(r: dict, blocks: HankelBlocks) -> bool:
    free = blocks.p * blocks.T_f
    return (r["past_psi"] == r["past"] + free) and (r["full"] == r["past_psi"])


def _t3(r: dict, blocks: HankelBlocks) -> bool:
    return r["one_step_psi2"] < r["one_step"] + blocks.p


def _t4(r: dict, blocks: HankelBlocks) -> bool:
    return r["one_step_theta2"] < r["one_step"] + blocks.m


def test1(blocks: HankelBlocks, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Every theta future is feasible and pins a unique psi future."""
    return _t1(_rank_profile(blocks, tol), blocks)


def test2(blocks: HankelBlocks, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Every psi future is feasible and pins a unique theta future."""
    return _t2(_rank_profile(blocks, tol), blocks)


def test3(blocks: HankelBlocks, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """One feasible step taken, some second psi step has no completion."""
    return _t3(_rank_profile(blocks, tol), blocks)


def test4(blocks: HankelBlocks, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """One feasible step taken, some second theta step has no completion."""
    return _t4(_rank_profile(blocks, tol), blocks)


@dataclass(frozen=True)
class BecausOutcome:
    t1: bool
    t2: bool
    t3: bool
    t4: bool
    relation: Relation
    ranks: dict = field(default_factory=dict)
    T: int = 0
    T_ini: int = 0
    T_f: int = 2
    rank_rtol: float = DEFAULT_TOL.rank_rtol
    feasibility_rtol: float = DEFAULT_TOL.feasibility_rtol

    @property
    def pattern(self):
        return (self.t1, self.t2, self.t3, self.t4)

    def to_dict(self) -> dict:
        return {
            "t1": self.t1, "t2": self.t2, "t3": self.t3, "t4": self.t4,
            "relation": int(self.relation),
            "relation_label": self.relation.label,
            "relation_arrow": self.relation.arrow,
            "ranks": dict(self.ranks),
            "T": self.T, "T_ini": self.T_ini, "T_f": self.T_f,
            "tolerances": {"rank_rtol": self.rank_rtol,
                           "feasibility_rtol": self.feasibility_rtol},
        }


def classify(theta_d, psi_d, T_ini: int, tol: ToleranceConfig = DEFAULT_TOL,
             T_f: int = 2) -> BecausOutcome:
    """Run all four tests and map the pattern onto a relation.

    T_ini must exceed the generating system's lag (or an upper bound the
    caller trusts). The pinned past window is checked for membership in the
    data's own Hankel column space first; failure means the two series do
    not form one trajectory and raises rather than classifies.
    """
    blocks = partition(theta_d, psi_d, T_ini, T_f)
    if not is_feasible(blocks.past, blocks.past_rhs, tol):
        raise DataIntegrityError(
            "initial window is not in the Hankel column space of the data")
    r = _rank_profile(blocks, tol)
    pattern = (_t1(r, blocks), _t2(r, blocks), _t3(r, blocks), _t4(r, blocks))
    relation = (PATTERN_TABLE.get(pattern, Relation.INCONCLUSIVE)
                if T_f == 2 else Relation.INCONCLUSIVE)
    theta = _as_series(theta_d, "theta_d")
    return BecausOutcome(
        t1=pattern[0], t2=pattern[1], t3=pattern[2], t4=pattern[3],
        relation=relation, ranks=r,
        T=theta.shape[0], T_ini=T_ini, T_f=T_f,
        rank_rtol=tol.rank_rtol, feasibility_rtol=tol.feasibility_rtol)
