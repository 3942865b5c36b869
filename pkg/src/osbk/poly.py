"""Exact multivariate polynomials as coefficient maps.

A polynomial in n variables is a finite map exponent-tuple -> coefficient.
Differentiation is symbolic (exact on the coefficients), so gradient,
Hessian and third-derivative tensors of generating functions carry no
finite-difference noise. Evaluation is vectorized over batches of points.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np


class Poly:
    """Immutable polynomial R^n -> R with exact coefficient arithmetic."""

    __slots__ = ("n", "terms", "_exps", "_coeffs")

    def __init__(self, n: int, terms: Mapping[tuple[int, ...], float]) -> None:
        if n < 1:
            raise ValueError("need at least one variable")
        clean: dict[tuple[int, ...], float] = {}
        for exps, c in terms.items():
            key = tuple(int(e) for e in exps)
            if len(key) != n or any(e < 0 for e in key):
                raise ValueError(f"bad exponent tuple {exps} for {n} variables")
            c = float(c)
            if c != 0.0:
                clean[key] = clean.get(key, 0.0) + c
        clean = {k: v for k, v in clean.items() if v != 0.0}
        self.n = n
        self.terms = dict(sorted(clean.items()))
        self._exps = np.array(list(self.terms.keys()), dtype=float).reshape(len(self.terms), n)
        self._coeffs = np.array(list(self.terms.values()), dtype=float)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(k) for k in self.terms)

    def is_homogeneous(self, deg: int | None = None) -> bool:
        if not self.terms:
            return True
        degs = {sum(k) for k in self.terms}
        if len(degs) != 1:
            return False
        return deg is None or degs == {deg}

    def __call__(self, q) -> float | np.ndarray:
        """Evaluate at a point (n,) or a batch (..., n)."""
        q = np.asarray(q, dtype=float)
        if q.shape[-1] != self.n:
            raise ValueError(f"expected last axis {self.n}, got {q.shape}")
        if not self.terms:
            return 0.0 if q.ndim == 1 else np.zeros(q.shape[:-1])
        vals = np.prod(q[..., None, :] ** self._exps, axis=-1) @ self._coeffs
        return float(vals) if q.ndim == 1 else vals

    def diff(self, i: int) -> "Poly":
        """Exact partial derivative in variable i."""
        if not 0 <= i < self.n:
            raise ValueError(f"variable index {i} out of range")
        out: dict[tuple[int, ...], float] = {}
        for exps, c in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            key = exps[:i] + (e - 1,) + exps[i + 1 :]
            out[key] = out.get(key, 0.0) + c * e
        return Poly(self.n, out)

    def __add__(self, other: "Poly") -> "Poly":
        if self.n != other.n:
            raise ValueError("variable counts differ")
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, 0.0) + v
        return Poly(self.n, merged)

    def scaled(self, a: float) -> "Poly":
        return Poly(self.n, {k: a * v for k, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.terms.items())))

    def __repr__(self) -> str:
        def mono(exps: tuple[int, ...]) -> str:
            parts = [f"q{i + 1}^{e}" if e > 1 else f"q{i + 1}" for i, e in enumerate(exps) if e]
            return "*".join(parts) or "1"

        body = " + ".join(f"{c:g}*{mono(e)}" for e, c in self.terms.items()) or "0"
        return f"Poly({self.n}, {body})"


def poly_from_pairs(n: int, pairs: Iterable[tuple[Iterable[int], float]]) -> Poly:
    """Build from [(exponents, coefficient), ...] pairs (the JSON encoding)."""
    return Poly(n, {tuple(int(e) for e in exps): float(c) for exps, c in pairs})


def gradient_polys(F: Poly) -> list[Poly]:
    return [F.diff(i) for i in range(F.n)]


def hessian_polys(F: Poly) -> list[list[Poly]]:
    g = gradient_polys(F)
    return [[g[i].diff(j) for j in range(F.n)] for i in range(F.n)]


def third_polys(F: Poly) -> list[list[list[Poly]]]:
    H = hessian_polys(F)
    return [[[H[i][j].diff(k) for k in range(F.n)] for j in range(F.n)] for i in range(F.n)]
