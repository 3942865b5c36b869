"""Conserved quantities along the correspondence and Poisson structure checks.

Two table families carry known integrals: ellipsoids conserve every pair norm
x_j^2 + y_j^2 (orbits live on Lagrangian tori), and graphs of homogeneous
cubics conserve all n components of P - grad F(Q). Both sets are polynomial,
so gradients are exact and Poisson brackets carry no finite-difference noise.

The invariance audit walks an orbit step by step in O(1) memory and, for
cubic graphs, also checks the endpoint value against the half tensor form
(1/2) third F(q)[w, w]. The Taylor expansion of grad F(q +/- w) fixes the
sign of that identity to minus; the audit records which sign the data
actually matched instead of hard-coding a convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import as_phase_vector, omega
from .errors import DomainError
from .manifolds import GeneratingGraph, ManifoldSpec, SymplecticEllipsoid
from .poly import Poly


@dataclass(frozen=True)
class PolyIntegral:
    """Scalar polynomial on phase space (interleaved coordinates) with exact gradient."""

    poly: Poly

    def __post_init__(self) -> None:
        object.__setattr__(self, "_grads", tuple(self.poly.diff(i) for i in range(self.poly.n)))

    def value(self, z) -> float:
        return float(self.poly(as_phase_vector(z)))

    def __call__(self, z) -> float:
        return self.value(z)

    def grad(self, z) -> np.ndarray:
        z = as_phase_vector(z)
        return np.array([float(g(z)) for g in self._grads])


@dataclass(frozen=True)
class IntegralSet:
    kind: str  # "ellipsoid" | "cubic-graph"
    evaluators: tuple[PolyIntegral, ...]

    def values(self, z) -> np.ndarray:
        z = as_phase_vector(z)
        return np.array([e.value(z) for e in self.evaluators])


def _lift_to_phase(p: Poly) -> Poly:
    """Reindex a polynomial in q onto phase space with q_i at interleaved slot 2i."""
    terms: dict[tuple[int, ...], float] = {}
    for exps, c in p.terms.items():
        key = [0] * (2 * p.n)
        for i, a in enumerate(exps):
            key[2 * i] = a
        terms[tuple(key)] = c
    return Poly(2 * p.n, terms)


def integrals_for(spec: ManifoldSpec) -> IntegralSet:
    """The known integral set of a table, or a domain error for unsupported kinds."""
    if spec.transform is not None:
        T = spec.transform
        if not (np.array_equal(T.S, np.eye(T.S.shape[0])) and not np.any(T.b)):
            raise DomainError(
                "no known integrals for a transformed table; work in the table's own frame"
            )
    table = spec.table
    if isinstance(table, SymplecticEllipsoid):
        d = table.d
        evs = []
        for j in range(d):
            kx = tuple(2 if i == 2 * j else 0 for i in range(2 * d))
            ky = tuple(2 if i == 2 * j + 1 else 0 for i in range(2 * d))
            evs.append(PolyIntegral(Poly(2 * d, {kx: 1.0, ky: 1.0})))
        return IntegralSet("ellipsoid", tuple(evs))
    if isinstance(table, GeneratingGraph) and table.is_homogeneous_cubic():
        n = table.n
        evs = []
        for i in range(n):
            ky = tuple(1 if k == 2 * i + 1 else 0 for k in range(2 * n))
            evs.append(PolyIntegral(Poly(2 * n, {ky: 1.0}) + _lift_to_phase(table.grad_polys[i]).scaled(-1.0)))
        return IntegralSet("cubic-graph", tuple(evs))
    raise DomainError(f"no known integrals for this table kind ({spec.kind})")


def _gradient_of(f, z: np.ndarray) -> np.ndarray:
    if isinstance(f, Poly):
        return np.array([float(f.diff(i)(z)) for i in range(f.n)])
    return np.asarray(f.grad(z), dtype=float)


def poisson_bracket(f, g, z) -> float:
    """{f, g}(z) = sum_i (df/dx_i dg/dy_i - df/dy_i dg/dx_i), gradients exact."""
    z = as_phase_vector(z)
    return float(omega(_gradient_of(f, z), _gradient_of(g, z)))


@dataclass(frozen=True)
class AuditReport:
    """Per-integral worst drift over an orbit, plus the tensor-form sign check."""

    max_drift: np.ndarray
    worst_step: int
    worst_drift: float
    steps: int
    matched_sign: str | None
    mismatch_minus: float | None
    mismatch_plus: float | None

    def as_dict(self) -> dict:
        return {
            "max_drift": [float(v) for v in self.max_drift],
            "worst_step": {"index": int(self.worst_step), "drift": float(self.worst_drift)},
            "steps": int(self.steps),
            "matched_sign": self.matched_sign,
            "mismatch_minus": self.mismatch_minus,
            "mismatch_plus": self.mismatch_plus,
        }


def _orbit_points(orbit: Iterable):
    it = iter(orbit)
    first = next(it, None)
    if first is None:
        return
    if hasattr(first, "source") and hasattr(first, "partner"):
        yield as_phase_vector(first.source)
        yield as_phase_vector(first.partner)
        for c in it:
            yield as_phase_vector(c.partner)
        return
    yield as_phase_vector(first)
    for p in it:
        yield as_phase_vector(p)


def audit_invariance(spec: ManifoldSpec, integrals: IntegralSet, orbit: Iterable) -> AuditReport:
    """Max |I(z_{k+1}) - I(z_k)| per integral over an orbit of verified steps.

    ``orbit`` is a sequence of phase points or of step candidates (chained by
    their partners). For cubic graphs every step also compares the endpoint
    values against +/- (1/2) third F(q)[w, w] at the step's midpoint offset;
    steps whose midpoint is off the graph, and degenerate steps with w = 0,
    are left out of that comparison.
    """
    pts = _orbit_points(orbit)
    try:
        prev = next(pts)
    except StopIteration:
        raise ValueError("orbit must contain at least one point") from None
    graph = spec.table if integrals.kind == "cubic-graph" else None
    vals_prev = integrals.values(prev)
    max_drift = np.zeros(len(integrals.evaluators))
    worst_step, worst_drift = 0, 0.0
    steps = 0
    mis_minus, mis_plus, audited = 0.0, 0.0, 0
    for z in pts:
        vals = integrals.values(z)
        drift = np.abs(vals - vals_prev)
        max_drift = np.maximum(max_drift, drift)
        big = float(np.max(drift))
        if big > worst_drift:
            worst_step, worst_drift = steps, big
        if graph is not None:
            mid = 0.5 * (prev + z)
            q = mid[0::2]
            w = prev[0::2] - q
            gq = graph.grad(q)
            on_graph = float(np.max(np.abs(gq - mid[1::2]))) <= 1e-8 * max(1.0, float(np.max(np.abs(gq))))
            if on_graph and float(np.linalg.norm(w)) > 1e-12:
                half = 0.5 * np.einsum("ijk,j,k->i", graph.third(q), w, w)
                mis_minus = max(mis_minus, float(np.max(np.abs(vals_prev + half))))
                mis_plus = max(mis_plus, float(np.max(np.abs(vals_prev - half))))
                audited += 1
        prev, vals_prev = z, vals
        steps += 1
    if graph is not None and audited > 0:
        sign = "-" if mis_minus <= mis_plus else "+"
        return AuditReport(max_drift, worst_step, worst_drift, steps, sign, mis_minus, mis_plus)
    return AuditReport(max_drift, worst_step, worst_drift, steps, None, None, None)
