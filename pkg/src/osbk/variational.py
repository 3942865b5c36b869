"""Generating functions, orbit reconstruction, and critical-point searches.

Periodic odd-length midpoint polygons carry the quadratic generating function
F(Q) = 2 sum_{i<j} (-1)^{i+j-1} omega(Q_i, Q_j); chains between the coordinate
Lagrangian subspaces carry G(Q) = 2 sum q_i . q_i' + 4 sum_{i<j} (-1)^{j-i}
q_j . q_i'. Critical points of either restricted to M^n are orbits, and the
function value equals the symplectic area of the reconstructed polyline.

Even-length periodic polygons admit no generating function; those orbits are
found by least squares on the stacked closure and orthogonality residuals.

Everything here is deterministic given the seed; multi-start work is split
per-start with counter-derived generators so thread count cannot change
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from ._pool import parallel_map, task_rng
from .core import AffineLagrangian, AffineSymplectic, apply_J, normalize_lagrangian_pair, omega_pairwise
from .errors import ClosureError
from .manifolds import ManifoldSpec, TWO_PI
from .correspondence import orthogonality_residual

DEGENERACY_TOL = 1e-9  # consecutive-midpoint coincidence threshold
ORBIT_DEDUP = 1e-6


# -- polygons and polylines ---------------------------------------------------


@dataclass(frozen=True)
class MidpointPolygon:
    """n midpoint candidates: parameter points and their embeddings."""

    points: np.ndarray  # (n, 2d)
    params: np.ndarray | None = None  # (n, m) when tied to a table

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 1:
            raise ValueError("need at least one midpoint")
        object.__setattr__(self, "points", pts)
        if self.params is not None:
            object.__setattr__(self, "params", np.atleast_2d(np.asarray(self.params, dtype=float)))

    @classmethod
    def from_params(cls, spec: ManifoldSpec, params) -> "MidpointPolygon":
        params = np.atleast_2d(np.asarray(params, dtype=float))
        pts = np.array([spec.embed(u) for u in params])
        return cls(pts, params)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def validate_against(self, spec: ManifoldSpec, tol: float = 1e-12) -> None:
        if self.params is None:
            raise ValueError("polygon carries no parameters")
        for u, p in zip(self.params, self.points):
            err = float(np.max(np.abs(spec.embed(u) - p)))
            if err > tol:
                raise ValueError(f"point does not match embed(param): error {err:.2e}")


@dataclass(frozen=True)
class OrbitPolyline:
    """Reconstructed orbit: closed n-gon (periodic) or (n+1)-chain (boundary).

    ``max_residual`` is the worst correspondence residual across links when a
    table was involved, 0 for bare reconstructions. ``degenerate`` means some
    consecutive midpoints coincide (the polygon backtracks).
    """

    vertices: np.ndarray
    kind: str  # "periodic" | "boundary"
    area: float
    max_residual: float
    degenerate: bool


def orbit_midpoints(vertices: np.ndarray, kind: str) -> np.ndarray:
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    if kind == "periodic":
        return 0.5 * (vertices + np.roll(vertices, -1, axis=0))
    return 0.5 * (vertices[:-1] + vertices[1:])


def _is_degenerate(midpoints: np.ndarray, kind: str, scale: float = 1.0) -> bool:
    # Midpoints inherit cancellation noise ~ eps * |vertices|, so the gap
    # threshold must grow with the vertex scale or huge doubled chains
    # (vertices ~ 1e3, midpoint gaps ~ 1e-9 of pure float noise) pass as
    # non-degenerate.
    if midpoints.shape[0] < 2:
        return False
    nxt = np.roll(midpoints, -1, axis=0) if kind == "periodic" else midpoints[1:]
    cur = midpoints if kind == "periodic" else midpoints[:-1]
    gaps = np.linalg.norm(nxt - cur, axis=1)
    return bool(np.any(gaps < DEGENERACY_TOL * max(1.0, scale)))


def make_orbit(vertices, kind: str, max_residual: float = 0.0) -> OrbitPolyline:
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    if kind not in ("periodic", "boundary"):
        raise ValueError("kind must be 'periodic' or 'boundary'")
    mids = orbit_midpoints(vertices, kind)
    scale = float(np.max(np.abs(vertices))) if vertices.size else 1.0
    return OrbitPolyline(
        vertices=vertices,
        kind=kind,
        area=symplectic_area(vertices, kind),
        max_residual=float(max_residual),
        degenerate=_is_degenerate(mids, kind, scale),
    )


def symplectic_area(Z, kind: str | None = None) -> float:
    """(1/2) sum omega(z_i, z_{i+1}); cyclic for periodic, open for boundary."""
    if isinstance(Z, OrbitPolyline):
        kind = kind or Z.kind
        Z = Z.vertices
    if kind is None:
        raise ValueError("kind required for raw vertex arrays")
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    nxt = np.roll(Z, -1, axis=0) if kind == "periodic" else Z[1:]
    cur = Z if kind == "periodic" else Z[:-1]
    return 0.5 * float(np.sum(omega_pairwise(cur, nxt)))


# -- generating functions ------------------------------------------------------


def _points_of(Q) -> np.ndarray:
    if isinstance(Q, MidpointPolygon):
        return Q.points
    return np.atleast_2d(np.asarray(Q, dtype=float))


def gen_fun_periodic(Q) -> float:
    """2 sum_{i<j} (-1)^{i+j-1} omega(Q_i, Q_j) for odd-length polygons."""
    P = _points_of(Q)
    n = P.shape[0]
    if n % 2 == 0:
        raise ValueError("even-length periodic polygons admit no generating function")
    X, Y = P[:, 0::2], P[:, 1::2]
    W = X @ Y.T - Y @ X.T  # W[i, j] = omega(Q_i, Q_j)
    idx = np.arange(n)
    sign = (-1.0) ** (idx[:, None] + idx[None, :] + 1)  # (-1)^{i+j-1}, 1-based == 0-based+2
    upper = np.triu(np.ones((n, n)), k=1)
    return 2.0 * float(np.sum(sign * W * upper))


def gen_fun_boundary(Q) -> float:
    """2 sum_i q_i . q_i' + 4 sum_{i<j} (-1)^{j-i} q_j . q_i' for chains."""
    P = _points_of(Q)
    n = P.shape[0]
    X, Y = P[:, 0::2], P[:, 1::2]
    total = 2.0 * float(np.sum(X * Y))
    if n > 1:
        idx = np.arange(n)
        sign = (-1.0) ** (idx[None, :] - idx[:, None])  # (-1)^{j-i} at [i, j]
        inner = X @ Y.T  # inner[j, i] = q_j . q_i'
        upper = np.triu(np.ones((n, n)), k=1)
        total += 4.0 * float(np.sum(sign * upper * inner.T))
    return total


# -- reconstruction -------------------------------------------------------------


def closure_defect(Q) -> np.ndarray:
    """Alternating sum sum_i (-1)^i Q_i (1-based); zero iff an even polygon closes."""
    P = _points_of(Q)
    signs = np.array([(-1.0) ** (i + 1) for i in range(P.shape[0])])  # -,+,-,... 1-based
    return np.einsum("i,ij->j", signs, P)


def _reflect_chain(z1: np.ndarray, P: np.ndarray) -> np.ndarray:
    """z_{i+1} = 2 Q_i - z_i starting from z1; returns (n+1, 2d)."""
    n = P.shape[0]
    Z = np.empty((n + 1, P.shape[1]))
    Z[0] = z1
    for i in range(n):
        Z[i + 1] = 2.0 * P[i] - Z[i]
    return Z


def reconstruct_periodic(Q, z1=None, tol: float = 1e-9) -> OrbitPolyline:
    """Closed polygon whose midpoints are Q.

    Odd n: unique, z_1 = Q_1 - Q_2 + ... + Q_n (the fixed point of the
    composed point reflections). Even n: exists iff the closure defect
    vanishes, and then every z_1 works; a defect above tolerance raises a
    closure error carrying the defect vector.
    """
    P = _points_of(Q)
    n = P.shape[0]
    if n % 2 == 1:
        signs = np.array([(-1.0) ** i for i in range(n)])  # +,-,+,... from Q_1
        z1 = np.einsum("i,ij->j", signs, P)
    else:
        defect = closure_defect(P)
        dn = float(np.linalg.norm(defect))
        if dn >= tol:
            raise ClosureError(f"even polygon does not close: defect norm {dn:.3e}", defect)
        z1 = np.zeros(P.shape[1]) if z1 is None else np.asarray(z1, dtype=float)
    Z = _reflect_chain(np.asarray(z1, dtype=float), P)
    return make_orbit(Z[:-1], "periodic")


def reconstruct_boundary(Q) -> OrbitPolyline:
    """Chain z_1..z_{n+1} from the x-subspace to the y-subspace with midpoints Q.

    x_i = 2 sum_{j>=i} (-1)^{j-i} q_j with x_{n+1} = 0, and
    y_i = 2 sum_{j<i} (-1)^{i-j+1} q_j' with y_1 = 0.
    """
    P = _points_of(Q)
    n = P.shape[0]
    X, Y = P[:, 0::2], P[:, 1::2]
    Rx, Ry = _boundary_coefficients(n)
    Zx = Rx @ X
    Zy = Ry @ Y
    Z = np.empty((n + 1, P.shape[1]))
    Z[:, 0::2] = Zx
    Z[:, 1::2] = Zy
    return make_orbit(Z, "boundary")


def _boundary_coefficients(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(n+1, n) coefficient matrices: x-parts of z from q, y-parts from q'."""
    Rx = np.zeros((n + 1, n))
    Ry = np.zeros((n + 1, n))
    for i in range(1, n + 2):  # 1-based vertex index
        for j in range(1, n + 1):
            if i <= n and j >= i:
                Rx[i - 1, j - 1] = 2.0 * (-1.0) ** (j - i)
            if j <= i - 1:
                Ry[i - 1, j - 1] = 2.0 * (-1.0) ** (i - j + 1)
    return Rx, Ry


def _periodic_coefficients(n: int) -> np.ndarray:
    """(n+1, n) coefficients of Q in the reflection chain with the odd-n z_1."""
    rho = np.zeros((n + 1, n))
    for k in range(n):
        rho[0, k] = (-1.0) ** k
    for i in range(n):
        rho[i + 1] = -rho[i]
        rho[i + 1, i] += 2.0
    return rho


# -- gradients and Hessians ------------------------------------------------------


def _chain_vertices(P: np.ndarray, kind: str) -> np.ndarray:
    """(n+1, 2d) vertex chain of the reconstruction (periodic wraps z_{n+1}=z_1)."""
    if kind == "periodic":
        orb = reconstruct_periodic(P)
        return np.vstack([orb.vertices, orb.vertices[0]])
    return reconstruct_boundary(P).vertices


def ambient_gradients(Q, kind: str) -> np.ndarray:
    """Gradient of the generating function in each midpoint: -J(z_{i+1} - z_i)."""
    P = _points_of(Q)
    Z = _chain_vertices(P, kind)
    diffs = Z[1:] - Z[:-1]
    out = np.empty_like(diffs)
    for i, dz in enumerate(diffs):
        out[i] = -apply_J(dz)
    return out


def grad_gen_fun(spec: ManifoldSpec, Q: MidpointPolygon, kind: str) -> list[np.ndarray]:
    """Exact parameter-space gradients via the chain rule through embed."""
    if Q.params is None:
        raise ValueError("polygon must carry parameters")
    g = ambient_gradients(Q.points, kind)
    out = []
    for i, u in enumerate(Q.params):
        rows = spec.tangent_basis(u)
        out.append(rows @ g[i])
    return out


def _recon_diff(n: int, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """(n, n) scalar coefficients of Q_j in (z_{i+1} - z_i), split x/y parts."""
    if kind == "periodic":
        rho = _periodic_coefficients(n)
        D = rho[1:] - rho[:-1]
        return D, D
    Rx, Ry = _boundary_coefficients(n)
    return Rx[1:] - Rx[:-1], Ry[1:] - Ry[:-1]


def stationarity_hessian(spec: ManifoldSpec, params: np.ndarray, kind: str) -> np.ndarray:
    """Exact Hessian of the generating function in the stacked parameters."""
    params = np.atleast_2d(np.asarray(params, dtype=float))
    n, m = params.shape
    pts = np.array([spec.embed(u) for u in params])
    rows = [spec.tangent_basis(u) for u in params]  # each (m, 2d)
    hess = [spec.embed_hessian(u) for u in params]  # each (2d, m, m)
    g = ambient_gradients(pts, kind)
    Dx, Dy = _recon_diff(n, kind)
    H = np.zeros((n * m, n * m))
    for i in range(n):
        Xi, Yi = rows[i][:, 0::2], rows[i][:, 1::2]
        for j in range(n):
            Xj, Yj = rows[j][:, 0::2], rows[j][:, 1::2]
            # zeta_a^T (d g_i / d Q_j) zeta_b with the interleaved block structure
            B = Dy[i, j] * (Xi @ Yj.T) - Dx[i, j] * (Yi @ Xj.T)
            H[i * m : (i + 1) * m, j * m : (j + 1) * m] += B
        gauss = np.einsum("c,cab->ab", g[i], hess[i])
        H[i * m : (i + 1) * m, i * m : (i + 1) * m] += gauss
    return H


# -- critical-point search -------------------------------------------------------


@dataclass(frozen=True)
class FoundOrbit:
    orbit: OrbitPolyline
    params: np.ndarray  # (n, m)
    value: float  # generating-function value (area for even-n orbits)
    grad_norm: float
    vertices_ambient: np.ndarray | None = None  # boundary orbits: original frame

    def as_dict(self) -> dict:
        out = {
            "vertices": [[float(v) for v in row] for row in self.orbit.vertices],
            "midpoint_params": [[float(v) for v in row] for row in self.params],
            "area": float(self.orbit.area),
            "max_residual": float(self.orbit.max_residual),
            "degenerate": bool(self.orbit.degenerate),
            "objective": float(self.value),
            "grad_norm": float(self.grad_norm),
        }
        if self.vertices_ambient is not None:
            out["vertices_ambient"] = [[float(v) for v in row] for row in self.vertices_ambient]
        return out


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a multi-start search; never silently empty.

    ``failed`` is set when no start converged to a critical point;
    ``flat_objective`` when the objective is numerically constant on M^n
    (every point critical, no isolated orbits to report).
    """

    orbits: tuple[FoundOrbit, ...]
    best: FoundOrbit | None
    failed: bool
    flat_objective: bool
    message: str


def _wrap_params(U: np.ndarray, angular: bool) -> np.ndarray:
    return np.mod(U, TWO_PI) if angular else U


def _canonical_shift(U: np.ndarray) -> np.ndarray:
    """Cyclic shift minimizing lexicographic order of the rounded parameter list."""
    n = U.shape[0]
    best = None
    for s in range(n):
        cand = np.roll(U, -s, axis=0)
        key = tuple(np.round(cand.ravel(), 9))
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def _params_close(
    A: np.ndarray, B: np.ndarray, angular: bool, tol: float = ORBIT_DEDUP, shifts: bool = True
) -> bool:
    if A.shape != B.shape:
        return False
    n = A.shape[0]
    for s in range(n if shifts else 1):
        C = np.roll(B, -s, axis=0)
        d = np.abs(A - C)
        if angular:
            d = np.minimum(np.mod(d, TWO_PI), TWO_PI - np.mod(d, TWO_PI))
        if float(np.max(d)) < tol:
            return True
    return False


def _search_core(
    spec: ManifoldSpec,
    n: int,
    kind: str,
    starts: int,
    seed: int,
    sign: float,
    cyclic_dedup: bool,
) -> tuple[list[tuple[np.ndarray, float, float]], bool, int]:
    """Shared ascent+Newton driver. Returns (converged (params, value, gradnorm), flat, n_converged)."""
    m = spec.param_dim
    lo, hi = spec.box
    angular = spec.params_are_angles

    def objective(U: np.ndarray) -> float:
        pts = np.array([spec.embed(u) for u in U])
        return gen_fun_periodic(pts) if kind == "periodic" else gen_fun_boundary(pts)

    def gradient(U: np.ndarray) -> np.ndarray:
        pts = np.array([spec.embed(u) for u in U])
        g = ambient_gradients(pts, kind)
        out = np.empty((n, m))
        for i, u in enumerate(U):
            out[i] = spec.tangent_basis(u) @ g[i]
        return out

    def run_start(idx: int) -> tuple[np.ndarray, float, float] | None:
        rng = task_rng(seed, idx)
        U = rng.uniform(lo, hi, (n, m))
        f = objective(U)
        alpha = 0.5
        for _ in range(400):
            G = gradient(U)
            gn = float(np.linalg.norm(G))
            if gn <= 1e-9 * max(1.0, abs(f)):
                break
            step = alpha
            accepted = False
            while step > 1e-14:
                U2 = _wrap_params(U + sign * step * G, angular)
                f2 = objective(U2)
                if sign * (f2 - f) >= 1e-4 * step * gn * gn:
                    U, f = U2, f2
                    alpha = min(step * 2.0, 4.0)
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
        # Newton polish on the stationarity system
        for _ in range(40):
            G = gradient(U).ravel()
            gn = float(np.linalg.norm(G))
            if gn <= 1e-12 * max(1.0, abs(f)):
                break
            H = stationarity_hessian(spec, U, kind)
            sv = np.linalg.svd(H, compute_uv=False)
            if sv[-1] <= 1e-10 * max(1.0, sv[0]):
                delta, *_ = np.linalg.lstsq(H, -G, rcond=None)
            else:
                delta = np.linalg.solve(H, -G)
            if not np.all(np.isfinite(delta)):
                return None
            U = _wrap_params(U + delta.reshape(n, m), angular)
        G = gradient(U)
        gn = float(np.linalg.norm(G))
        f = objective(U)
        if gn > 1e-7 * max(1.0, abs(f)):
            return None
        return U, f, gn

    # flat-objective detection on the raw start sample
    probe_rng = task_rng(seed, 1 << 62)
    probe_vals = np.array(
        [objective(probe_rng.uniform(lo, hi, (n, m))) for _ in range(min(max(starts, 8), 64))]
    )
    spread = float(np.max(probe_vals) - np.min(probe_vals))
    if spread <= 1e-12 * max(1.0, float(np.max(np.abs(probe_vals)))):
        return [], True, 0

    results = [r for r in parallel_map(run_start, range(starts)) if r is not None]
    # deterministic merge: sort then dedup. Cyclic shifts are a symmetry of the
    # periodic generating function only; boundary chains must keep row order.
    def canon(U: np.ndarray) -> np.ndarray:
        W = _wrap_params(U, angular)
        return _canonical_shift(W) if cyclic_dedup else W

    results.sort(key=lambda r: (-sign * r[1], tuple(np.round(canon(r[0]).ravel(), 9))))
    kept: list[tuple[np.ndarray, float, float]] = []
    for U, f, gn in results:
        Uc = canon(U)
        if any(
            _params_close(Uc, K, angular) if cyclic_dedup else _params_close(Uc, K, angular, shifts=False)
            for K, _, _ in kept
        ):
            continue
        kept.append((Uc, f, gn))
    return kept, False, len(results)


def _orbit_residual(spec: ManifoldSpec, U: np.ndarray, vertices_chain: np.ndarray) -> float:
    worst = 0.0
    diffs = vertices_chain[1:] - vertices_chain[:-1]
    for i, u in enumerate(U):
        worst = max(worst, orthogonality_residual(diffs[i], spec.tangent_basis(u)))
    return worst


def find_periodic_orbit(
    spec: ManifoldSpec, n: int, starts: int = 64, seed: int = 0, mode: str = "max"
) -> SearchResult:
    """Multi-start search for odd-n periodic orbits as critical points of F."""
    if n % 2 == 0 or n < 3:
        raise ValueError("periodic search requires odd n >= 3; use search_even_periodic for even n")
    if mode not in ("max", "min"):
        raise ValueError("mode must be 'max' or 'min'")
    sign = 1.0 if mode == "max" else -1.0
    kept, flat, n_conv = _search_core(spec, n, "periodic", starts, seed, sign, cyclic_dedup=True)
    if flat:
        return SearchResult((), None, False, True, "flat objective: generating function is constant on M^n")
    found: list[FoundOrbit] = []
    for U, f, gn in kept:
        pts = np.array([spec.embed(u) for u in U])
        orb = reconstruct_periodic(pts)
        chain = np.vstack([orb.vertices, orb.vertices[0]])
        res = _orbit_residual(spec, U, chain)
        if res > 1e-8:
            continue
        orb = make_orbit(orb.vertices, "periodic", max_residual=res)
        found.append(FoundOrbit(orb, U, f, gn))
    if not found:
        return SearchResult((), None, True, False, f"search failed: {n_conv} of {starts} starts converged, none verified")
    found.sort(key=lambda o: -sign * o.value)
    return SearchResult(tuple(found), found[0], False, False, f"{len(found)} distinct critical orbits")


def find_boundary_orbit(
    spec: ManifoldSpec,
    L1: AffineLagrangian,
    L2: AffineLagrangian,
    n: int,
    starts: int = 64,
    seed: int = 0,
    mode: str = "both",
) -> "BoundarySearchResult":
    """Search for n-link chains from L1 to L2 as critical points of G.

    The pair is first normalized to the coordinate subspaces; returned orbits
    live in the normalized frame (where the area identity holds), with the
    original-frame vertices attached alongside.
    """
    if n < 1:
        raise ValueError("need n >= 1 links")
    if mode not in ("max", "min", "both"):
        raise ValueError("mode must be 'max', 'min' or 'both'")
    T = normalize_lagrangian_pair(L1, L2)
    combined = T.compose(spec.transform) if spec.transform else T
    nspec = ManifoldSpec(spec.table, combined)
    Tinv = T.inverse()

    modes = ("max", "min") if mode == "both" else (mode,)
    all_found: list[tuple[FoundOrbit, float]] = []
    flat = False
    n_conv = 0
    for mname in modes:
        sign = 1.0 if mname == "max" else -1.0
        kept, is_flat, conv = _search_core(nspec, n, "boundary", starts, seed, sign, cyclic_dedup=False)
        flat = flat or is_flat
        n_conv += conv
        for U, f, gn in kept:
            pts = np.array([nspec.embed(u) for u in U])
            orb = reconstruct_boundary(pts)
            res = _orbit_residual(nspec, U, orb.vertices)
            if res > 1e-8:
                continue
            orb = make_orbit(orb.vertices, "boundary", max_residual=res)
            amb = np.array([Tinv(v) for v in orb.vertices])
            all_found.append((FoundOrbit(orb, U, f, gn, vertices_ambient=amb), sign))
    if flat:
        return BoundarySearchResult((), None, None, False, True, "flat objective: G is constant on M^n", T)
    # dedup across the two mode runs
    uniq: list[tuple[FoundOrbit, float]] = []
    for fo, sign in all_found:
        if any(_params_close(fo.params, g.params, nspec.params_are_angles, shifts=False) for g, _ in uniq):
            continue
        uniq.append((fo, sign))
    if not uniq:
        return BoundarySearchResult(
            (), None, None, True, False, f"search failed: {n_conv} converged starts, none verified", T
        )
    orbits = tuple(fo for fo, _ in sorted(uniq, key=lambda p: -p[0].value))
    best_max = orbits[0] if mode in ("max", "both") else None
    best_min = orbits[-1] if mode in ("min", "both") else None
    return BoundarySearchResult(orbits, best_max, best_min, False, False, f"{len(orbits)} distinct critical orbits", T)


@dataclass(frozen=True)
class BoundarySearchResult:
    orbits: tuple[FoundOrbit, ...]
    best_max: FoundOrbit | None
    best_min: FoundOrbit | None
    failed: bool
    flat_objective: bool
    message: str
    normalization: AffineSymplectic


# -- even-length periodic search ---------------------------------------------------


@dataclass(frozen=True)
class EvenSearchResult:
    orbits: tuple[FoundOrbit, ...]
    nondegenerate: tuple[FoundOrbit, ...]
    converged: int
    message: str


def search_even_periodic(spec: ManifoldSpec, n: int, starts: int = 64, seed: int = 0) -> EvenSearchResult:
    """Least-squares search for even-n periodic orbits (no generating function).

    Unknowns are the n midpoint parameters plus z_1; residuals stack the
    closure defect with the omega-orthogonality at every midpoint, giving a
    square system solved by Levenberg-Marquardt with the analytic Jacobian.
    """
    if n % 2 == 1:
        raise ValueError("use find_periodic_orbit for odd n")
    m = spec.param_dim
    dim = spec.ambient_dim
    lo, hi = spec.box
    angular = spec.params_are_angles

    rho = np.zeros((n + 1, n))
    sigma = np.empty(n + 1)
    sigma[0] = 1.0
    for i in range(n):
        rho[i + 1] = -rho[i]
        rho[i + 1, i] += 2.0
        sigma[i + 1] = -sigma[i]
    drho = rho[1:] - rho[:-1]
    dsigma = sigma[1:] - sigma[:-1]

    def unpack(vec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return vec[: n * m].reshape(n, m), vec[n * m :]

    def residuals(vec: np.ndarray) -> np.ndarray:
        U, z1 = unpack(vec)
        pts = np.array([spec.embed(u) for u in U])
        Z = _reflect_chain(z1, pts)
        out = np.empty(dim + n * m)
        out[:dim] = Z[n] - z1  # closure (z1 cancels for even n)
        diffs = Z[1:] - Z[:-1]
        k = dim
        for i, u in enumerate(U):
            rows = spec.tangent_basis(u)
            out[k : k + m] = rows[:, 1::2] @ diffs[i][0::2] - rows[:, 0::2] @ diffs[i][1::2]
            k += m
        return out

    def jacobian(vec: np.ndarray) -> np.ndarray:
        U, z1 = unpack(vec)
        pts = np.array([spec.embed(u) for u in U])
        rows = [spec.tangent_basis(u) for u in U]
        hesses = [spec.embed_hessian(u) for u in U]
        Z = _reflect_chain(z1, pts)
        diffs = Z[1:] - Z[:-1]
        J = np.zeros((dim + n * m, n * m + dim))
        for j in range(n):
            for b in range(m):
                J[:dim, j * m + b] = rho[n, j] * rows[j][b]
        # closure: even chain cancels z1, so those columns stay zero
        for i in range(n):
            for a in range(m):
                r = dim + i * m + a
                zeta = rows[i][a]
                Jz = apply_J(zeta)
                for j in range(n):
                    if drho[i, j] != 0.0:
                        # d omega(diffs_i, zeta_a) / d u_jb via Q_j
                        for b in range(m):
                            J[r, j * m + b] += drho[i, j] * float(
                                rows[j][b][0::2] @ zeta[1::2] - rows[j][b][1::2] @ zeta[0::2]
                            )
                # through zeta_a(u_i)
                for b in range(m):
                    eta = hesses[i][:, a, b]
                    J[r, i * m + b] += float(diffs[i][0::2] @ eta[1::2] - diffs[i][1::2] @ eta[0::2])
                # through z1
                J[r, n * m :] += -dsigma[i] * Jz
        return J

    zscale = max(1.0, float(np.max(np.abs(spec.embed(np.full(m, 0.5 * (lo + hi)))))))

    def run_start(idx: int) -> tuple[np.ndarray, np.ndarray] | None:
        rng = task_rng(seed, idx)
        U0 = rng.uniform(lo, hi, (n, m))
        z10 = rng.uniform(-3.0 * zscale, 3.0 * zscale, dim)
        vec0 = np.concatenate([U0.ravel(), z10])
        sol = least_squares(residuals, vec0, jac=jacobian, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        r = residuals(sol.x)
        if float(np.linalg.norm(r)) > 1e-9 * zscale:
            return None
        U, z1 = unpack(sol.x)
        return _wrap_params(U, angular), z1

    results = [r for r in parallel_map(run_start, range(starts)) if r is not None]
    results.sort(key=lambda r: tuple(np.round(_canonical_shift(r[0]).ravel(), 9)))
    found: list[FoundOrbit] = []
    for U, z1 in results:
        if any(_params_close(_canonical_shift(U), _canonical_shift(f.params), angular) for f in found):
            continue
        pts = np.array([spec.embed(u) for u in U])
        Z = _reflect_chain(z1, pts)
        res = _orbit_residual(spec, U, Z)
        orb = make_orbit(Z[:-1], "periodic", max_residual=res)
        found.append(FoundOrbit(orb, U, orb.area, 0.0))
    nondeg = tuple(f for f in found if not f.orbit.degenerate)
    return EvenSearchResult(
        tuple(found), nondeg, len(results),
        f"{len(results)} converged starts, {len(found)} distinct solutions, {len(nondeg)} non-degenerate",
    )
