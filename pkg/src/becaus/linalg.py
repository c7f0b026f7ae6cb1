"""Numerical linear algebra under one tolerance policy.

Every feasibility or rank decision in the package funnels through this
module so the four causality tests can never disagree about what "zero"
means. Rank is decided in the spectral norm: singular values are compared
against rank_rtol * max(rows, cols) * sigma_max. Feasibility of M g = rhs
is decided by the least-squares residual relative to
feasibility_rtol * (1 + ||rhs||).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatchError, LengthTooShortError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "AffineSolutionSummary",
    "build_hankel",
    "numerical_rank",
    "null_space_basis",
    "is_feasible",
    "analyze_affine_system",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Relative thresholds for rank and feasibility decisions.

    rank_rtol scales the singular-value cutoff; feasibility_rtol scales the
    admissible least-squares residual. Both must lie strictly in (0, 1).
    Data here is exact (noise-free trajectories), so the defaults sit far
    above machine noise and far below signal scale.
    """

    rank_rtol: float = 1e-9
    feasibility_rtol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rtol", "feasibility_rtol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must be in (0, 1), got {v}")


DEFAULT_TOL = ToleranceConfig()


def _as_matrix(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size and not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def build_hankel(w, depth: int) -> np.ndarray:
    """Stack successive length-`depth` windows of `w` as columns.

    `w` is time-major: shape (T,) or (T, q). The result is
    (q * depth) x (T - depth + 1); column j holds w(j), ..., w(j+depth-1)
    with the q components of each sample contiguous.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2:
        raise DimensionMismatchError(f"series must be 1- or 2-d, got shape {w.shape}")
    T, q = w.shape
    if depth < 1:
        raise LengthTooShortError(f"depth must be >= 1, got {depth}")
    if T < depth:
        raise LengthTooShortError(f"series length {T} < depth {depth}")
    N = T - depth + 1
    H = np.empty((q * depth, N))
    for i in range(depth):
        H[i * q:(i + 1) * q] = w[i:i + N].T
    return H


def numerical_rank(M, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Singular values above rank_rtol * max(rows, cols) * sigma_max."""
    M = _as_matrix(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rtol * max(M.shape) * s[0]))


def null_space_basis(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of null(M) as columns; cols x nullity."""
    M = _as_matrix(M)
    if M.size == 0:
        return np.eye(M.shape[1])
    _, s, vt = np.linalg.svd(M)
    r = numerical_rank(M, tol)
    return vt[r:].T


def is_feasible(M, rhs, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Least-squares residual test for M g = rhs."""
    M = _as_matrix(M)
    rhs = np.asarray(rhs, dtype=float).ravel()
    if rhs.shape[0] != M.shape[0]:
        raise DimensionMismatchError(
            f"rhs length {rhs.shape[0]} != rows {M.shape[0]}")
    if M.size == 0:
        return float(np.linalg.norm(rhs)) <= tol.feasibility_rtol
    g, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    resid = float(np.linalg.norm(M @ g - rhs))
    return resid <= tol.feasibility_rtol * (1.0 + float(np.linalg.norm(rhs)))


@dataclass(frozen=True)
class AffineSolutionSummary:
    """What the solution set of M g = rhs looks like.

    image_dims[i] is the dimension of probes[i] applied to null(M), i.e.
    how much the i-th linear map can still vary over the solution set.
    augmented_rank is derived from the feasibility decision so that
    consistent <=> augmented_rank == coefficient_rank holds by construction.
    """

    coefficient_rank: int
    augmented_rank: int
    consistent: bool
    image_dims: tuple = field(default=())

    def image_dim_under(self, i: int = 0) -> int:
        return self.image_dims[i]


def analyze_affine_system(M, rhs, probes=(), tol: ToleranceConfig = DEFAULT_TOL,
                          ) -> AffineSolutionSummary:
    """Consistency, coefficient rank, and probe images for M g = rhs.

    For each probe P the reported dimension is rank of P restricted to
    null(M). The singular values of P @ null_basis are thresholded against
    the scale of the stacked matrix [M; P], not against the projected
    image's own largest singular value: the projection can shrink all
    directions uniformly, and rescaling by its own max would then promote
    noise back to full rank.
    """
    M = _as_matrix(M)
    rhs = np.asarray(rhs, dtype=float).ravel()
    if rhs.shape[0] != M.shape[0]:
        raise DimensionMismatchError(
            f"rhs length {rhs.shape[0]} != rows {M.shape[0]}")
    for P in probes:
        if _as_matrix(P).shape[1] != M.shape[1]:
            raise DimensionMismatchError(
                f"probe has {_as_matrix(P).shape[1]} cols, expected {M.shape[1]}")

    consistent = is_feasible(M, rhs, tol)
    r = numerical_rank(M, tol)
    Z = null_space_basis(M, tol)

    dims = []
    for P in probes:
        P = _as_matrix(P)
        if Z.shape[1] == 0 or P.size == 0:
            dims.append(0)
            continue
        stack = np.vstack([M, P]) if M.size else P
        smax = float(np.linalg.svd(stack, compute_uv=False)[0])
        if smax == 0.0:
            dims.append(0)
            continue
        s = np.linalg.svd(P @ Z, compute_uv=False)
        dims.append(int(np.sum(s > tol.rank_rtol * max(stack.shape) * smax)))

    return AffineSolutionSummary(
        coefficient_rank=r,
        augmented_rank=r if consistent else r + 1,
        consistent=consistent,
        image_dims=tuple(dims),
    )
