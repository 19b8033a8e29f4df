"""
Ambient space forms in flat embedding coordinates.

Euclidean space is R^n itself. Hyperbolic space H^n(kappa) is the upper sheet
of the hyperboloid <x,x>_L = -1/kappa in Minkowski space with signature
(-,+,...,+), and the open hemisphere S^n_+(kappa) is |x|^2 = 1/kappa, x0 > 0.
Every function here is pure and vectorized over a leading batch axis.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from staticineq.config import AMBIENT_DIM, HEMISPHERE_MARGIN, MODEL_TOL
from staticineq.errors import DomainError, UsageError

# arccosh/arccos arguments this far outside the domain are clamped, beyond it rejected
DISTANCE_ARG_TOL = 1e-10


class Kind(str, Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"
    SPHERICAL = "spherical"

    @classmethod
    def parse(cls, name: str) -> "Kind":
        aliases = {"hemisphere": "spherical", "sphere": "spherical", "flat": "euclidean"}
        key = aliases.get(name.strip().lower(), name.strip().lower())
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown space form kind '{name}'")


@dataclass(frozen=True, eq=False)
class SpaceForm:
    """Model descriptor. kappa is the curvature magnitude, k the signed value."""
    kind: Kind
    kappa: float = 1.0
    n: int = AMBIENT_DIM
    base_point: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind) if isinstance(self.kind, str) else self.kind)
        if self.kappa <= 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.n < 2:
            raise DomainError(f"dimension must be at least 2, got {self.n}")
        if self.base_point is None:
            object.__setattr__(self, "base_point", self.center)
        else:
            p = np.asarray(self.base_point, dtype=float)
            if p.shape != (self.dim,):
                raise DomainError(f"base point needs {self.dim} coordinates, got {p.shape}")
            check_points(self, p[None, :], what="base point")
            if self.kind != Kind.EUCLIDEAN:
                p = project_to_model(self, p)
            object.__setattr__(self, "base_point", p)

    @property
    def is_flat(self) -> bool:
        return self.kind == Kind.EUCLIDEAN

    @property
    def dim(self) -> int:
        """Embedding dimension."""
        return self.n if self.is_flat else self.n + 1

    @property
    def k(self) -> float:
        if self.kind == Kind.EUCLIDEAN:
            return 0.0
        return -self.kappa if self.kind == Kind.HYPERBOLIC else self.kappa

    @property
    def sqrt_kappa(self) -> float:
        return float(np.sqrt(self.kappa))

    @property
    def scalar_curvature(self) -> float:
        return self.n * (self.n - 1) * self.k

    @property
    def ricci_factor(self) -> float:
        """Ric = ricci_factor * g."""
        return (self.n - 1) * self.k

    @property
    def metric_diag(self) -> np.ndarray:
        g = np.ones(self.dim)
        if self.kind == Kind.HYPERBOLIC:
            g[0] = -1.0
        return g

    @property
    def center(self) -> np.ndarray:
        c = np.zeros(self.dim)
        if not self.is_flat:
            c[0] = 1.0 / self.sqrt_kappa
        return c

    @property
    def max_radius(self) -> float:
        """Largest admissible geodesic radius about the chart centre."""
        if self.kind == Kind.SPHERICAL:
            return (0.5 * np.pi - HEMISPHERE_MARGIN) / self.sqrt_kappa
        return np.inf

    def describe(self) -> str:
        if self.is_flat:
            return f"euclidean(n={self.n})"
        return f"{self.kind.value}(kappa={self.kappa:g}, n={self.n})"


# --- Embedding algebra ---

def ambient_inner(sf: SpaceForm, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Flat inner product of the embedding (Minkowski for the hyperboloid)."""
    return np.sum(np.asarray(x) * sf.metric_diag * np.asarray(y), axis=-1)


def _constraint_defect(sf: SpaceForm, X: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.sum(X * X, axis=-1), 1.0 / sf.kappa)
    q = ambient_inner(sf, X, X)
    target = -1.0 / sf.kappa if sf.kind == Kind.HYPERBOLIC else 1.0 / sf.kappa
    return np.abs(q - target) / scale


def on_model(sf: SpaceForm, X: np.ndarray, tol: float = MODEL_TOL) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[-1] != sf.dim:
        return np.zeros(X.shape[0], dtype=bool)
    if sf.is_flat:
        return np.all(np.isfinite(X), axis=-1)
    ok = _constraint_defect(sf, X) <= tol
    return ok & (X[:, 0] > 0)


def check_points(sf: SpaceForm, X: np.ndarray, what: str = "vertex", tol: float = MODEL_TOL) -> None:
    """Raise DomainError naming the first point that violates the model constraint."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[-1] != sf.dim:
        raise DomainError(f"{what} needs {sf.dim} coordinates for {sf.describe()}, got {X.shape[-1]}")
    bad = np.flatnonzero(~on_model(sf, X, tol))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"{what} {i} is not on the {sf.kind.value} model: {X[i].tolist()}")


def project_to_model(sf: SpaceForm, X: np.ndarray) -> np.ndarray:
    """Renormalize by the quadratic form to remove drift."""
    X = np.asarray(X, dtype=float)
    if sf.is_flat:
        return X
    q = ambient_inner(sf, X, X)
    if sf.kind == Kind.HYPERBOLIC:
        return X / (sf.sqrt_kappa * np.sqrt(-q))[..., None]
    return X / (sf.sqrt_kappa * np.sqrt(q))[..., None]


def tangent_project(sf: SpaceForm, X: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal (w.r.t. the flat form) projection of ambient vectors onto T_X."""
    if sf.is_flat:
        return np.asarray(v, dtype=float)
    coef = ambient_inner(sf, v, X) * sf.kappa
    if sf.kind == Kind.HYPERBOLIC:
        return v + coef[..., None] * X
    return v - coef[..., None] * X


def tangent_frames(sf: SpaceForm, X: np.ndarray) -> np.ndarray:
    """
    Orthonormal frames of the model tangent spaces, shape (N, dim, n).

    Built from the rotation (sphere) or boost (hyperboloid) carrying the
    chart centre to X, so at the centre the frame is (e1, ..., en).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, n = X.shape[0], sf.n
    if sf.is_flat:
        return np.broadcast_to(np.eye(n), (N, n, n)).copy()
    xh = X * sf.sqrt_kappa
    c, s = xh[:, 0], xh[:, 1:]
    frames = np.zeros((N, n + 1, n))
    eye = np.eye(n)
    if sf.kind == Kind.HYPERBOLIC:
        frames[:, 0, :] = s
        frames[:, 1:, :] = eye[None] + s[:, :, None] * s[:, None, :] / (c + 1.0)[:, None, None]
    else:
        frames[:, 0, :] = -s
        frames[:, 1:, :] = eye[None] - s[:, :, None] * s[:, None, :] / (c + 1.0)[:, None, None]
    return frames


def frame_coords(sf: SpaceForm, frames: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Components of tangent vectors v (N, dim) in orthonormal frames (N, dim, n)."""
    return np.einsum("nda,nd->na", frames, v * sf.metric_diag)


# --- Distance and charts ---

def geodesic_distance(sf: SpaceForm, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Geodesic distance, broadcasting over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    if sf.is_flat:
        return np.linalg.norm(d, axis=-1)

    arg = sf.kappa * ambient_inner(sf, x, y)
    if sf.kind == Kind.HYPERBOLIC:
        arg = -arg
        bad = arg < 1.0 - DISTANCE_ARG_TOL * np.maximum(1.0, np.abs(arg))
    else:
        bad = np.abs(arg) > 1.0 + DISTANCE_ARG_TOL
    if np.any(bad):
        raise DomainError(f"distance argument {float(np.asarray(arg)[bad].flat[0])!r} outside the domain of "
                          f"{'arccosh' if sf.kind == Kind.HYPERBOLIC else 'arccos'}: invalid point")

    # chord form: exact identity with arccosh/arccos, stable near the diagonal
    chord = np.sqrt(np.maximum(ambient_inner(sf, d, d), 0.0))
    half = 0.5 * sf.sqrt_kappa * chord
    if sf.kind == Kind.HYPERBOLIC:
        return 2.0 / sf.sqrt_kappa * np.arcsinh(half)
    return 2.0 / sf.sqrt_kappa * np.arcsin(np.minimum(half, 1.0))


def distance_from_base(sf: SpaceForm, X: np.ndarray, base: Optional[np.ndarray] = None) -> np.ndarray:
    p = sf.base_point if base is None else np.asarray(base, dtype=float)
    return geodesic_distance(sf, np.atleast_2d(X), p[None, :])


def radial_chart(sf: SpaceForm, direction: np.ndarray, rho: Union[float, np.ndarray],
                 base: Optional[np.ndarray] = None, check: bool = True) -> np.ndarray:
    """
    exp_p(rho * omega) for unit directions omega given in the frame at p.

    direction has shape (n,) or (N, n); rho broadcasts against it.
    """
    p = sf.base_point if base is None else np.asarray(base, dtype=float)
    omega = np.atleast_2d(np.asarray(direction, dtype=float))
    rho = np.broadcast_to(np.asarray(rho, dtype=float), omega.shape[:1]).astype(float)
    if np.any(rho < 0):
        raise DomainError("radius must be nonnegative")
    omega = omega / np.linalg.norm(omega, axis=1, keepdims=True)

    if sf.is_flat:
        X = p[None, :] + rho[:, None] * omega
    else:
        F = tangent_frames(sf, p[None, :])[0]
        w = omega @ F.T
        s = sf.sqrt_kappa * rho
        if sf.kind == Kind.HYPERBOLIC:
            X = np.cosh(s)[:, None] * p[None, :] + (np.sinh(s) / sf.sqrt_kappa)[:, None] * w
        else:
            X = np.cos(s)[:, None] * p[None, :] + (np.sin(s) / sf.sqrt_kappa)[:, None] * w
        X = project_to_model(sf, X)
        if check and sf.kind == Kind.SPHERICAL:
            _check_hemisphere(sf, X, rho)
    return X[0] if np.ndim(direction) == 1 else X


def _check_hemisphere(sf: SpaceForm, X: np.ndarray, rho: np.ndarray) -> None:
    # polar distance <= pi/2 - margin  <=>  sqrt(kappa) x0 >= sin(margin)
    limit = np.sin(HEMISPHERE_MARGIN) - 1e-14
    bad = np.flatnonzero(sf.sqrt_kappa * X[:, 0] < limit)
    if bad.size:
        i = int(bad[0])
        raise DomainError(
            f"radius {rho[i]:.6g} leaves the hemisphere margin "
            f"(max {sf.max_radius:.6g} = (pi/2 - {HEMISPHERE_MARGIN}) / sqrt(kappa)) at direction {i}")


def log_chart(sf: SpaceForm, X: np.ndarray, base: Optional[np.ndarray] = None) -> np.ndarray:
    """Inverse of radial_chart: frame coordinates of exp_p^{-1}(X), shape (N, n)."""
    p = sf.base_point if base is None else np.asarray(base, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if sf.is_flat:
        return X - p[None, :]
    r = geodesic_distance(sf, X, p[None, :])
    v = tangent_project(sf, np.broadcast_to(p, X.shape), X)
    F = tangent_frames(sf, p[None, :])[0]
    c = (v * sf.metric_diag) @ F
    norm = np.linalg.norm(c, axis=1)
    scale = np.divide(r, norm, out=np.zeros_like(r), where=norm > 0)
    return c * scale[:, None]


def sample_points(sf: SpaceForm, count: int, rng: np.random.Generator,
                  max_radius: Optional[float] = None) -> np.ndarray:
    if count <= 0:
        raise UsageError("sample set must be nonempty")
    if max_radius is None:
        max_radius = min(sf.max_radius, 2.0 if sf.is_flat else 1.5 / sf.sqrt_kappa)
    omega = rng.standard_normal((count, sf.n))
    rho = rng.uniform(0.0, max_radius, size=count)
    return radial_chart(sf, omega, rho, base=sf.center)


# --- Static potentials ---

def basis_coefficients(sf: SpaceForm, which: Union[int, np.ndarray, list, tuple]) -> np.ndarray:
    """Basis index -> unit coefficient vector; coefficient vectors pass through."""
    if isinstance(which, (int, np.integer)):
        if not 0 <= which <= sf.n:
            raise UsageError(f"basis index {which} out of range 0..{sf.n}")
        a = np.zeros(sf.n + 1)
        a[which] = 1.0
        return a
    a = np.asarray(which, dtype=float)
    if a.shape != (sf.n + 1,):
        raise UsageError(f"need {sf.n + 1} coefficients a0..a{sf.n}, got {a.size}")
    return a


def potential_value_grad_hess(sf: SpaceForm, which, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Value, model gradient (ambient tangent vector) and model Hessian in the
    tangent frame of a combination of basis potentials.

    Basis: {1, x1..xn} (Euclidean), {t, x1..xn} (hyperbolic), {x0, x1..xn}
    (spherical). The Hessian is D^2F - k DF[x] g with D^2F = 0 for these
    linear functions.
    """
    a = basis_coefficients(sf, which)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = X.shape[0]
    if sf.is_flat:
        value = a[0] + X @ a[1:]
        grad = np.broadcast_to(a[1:], X.shape).copy()
        hess = np.zeros((N, sf.n, sf.n))
        return value, grad, hess

    value = X @ a
    flat_grad = a * sf.metric_diag  # raise the index with G^{-1} = G
    grad = tangent_project(sf, X, np.broadcast_to(flat_grad, X.shape))
    first_order = X @ a  # DF[x]
    hess = -sf.k * first_order[:, None, None] * np.eye(sf.n)[None]
    return value, grad, hess


def static_residual(sf: SpaceForm, which, points: np.ndarray) -> Tuple[float, float]:
    """
    Max operator norm of -(Lap f) g + Hess f - f Ric over the samples, and the
    max trace residual |Lap f + R/(n-1) f|.
    """
    points = np.atleast_2d(points)
    if points.shape[0] == 0:
        raise UsageError("static residual needs at least one sample point")
    f, _, hess = potential_value_grad_hess(sf, which, points)
    lap = np.trace(hess, axis1=1, axis2=2)
    eye = np.eye(sf.n)[None]
    residual = -lap[:, None, None] * eye + hess - (f * sf.ricci_factor)[:, None, None] * eye
    op_norm = np.max(np.linalg.norm(residual, ord=2, axis=(1, 2)))
    trace_res = np.max(np.abs(lap + sf.scalar_curvature / (sf.n - 1) * f))
    return float(op_norm), float(trace_res)


def distinguished_potential(sf: SpaceForm, base: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Coefficients of V = cosh(sqrt(kappa) r) / cos(sqrt(kappa) r) / 1 with r
    the distance to the base point. At the chart centre this is sqrt(kappa) t
    (resp. sqrt(kappa) x0).
    """
    p = sf.base_point if base is None else np.asarray(base, dtype=float)
    if sf.is_flat:
        a = np.zeros(sf.n + 1)
        a[0] = 1.0
        return a
    if sf.kind == Kind.HYPERBOLIC:
        return -sf.kappa * sf.metric_diag * p
    return sf.kappa * p


def potential_from_distance(sf: SpaceForm, X: np.ndarray, base: Optional[np.ndarray] = None) -> np.ndarray:
    r = distance_from_base(sf, X, base)
    if sf.is_flat:
        return np.ones_like(r)
    if sf.kind == Kind.HYPERBOLIC:
        return np.cosh(sf.sqrt_kappa * r)
    return np.cos(sf.sqrt_kappa * r)


def normalization_label(sf: SpaceForm) -> str:
    return {
        Kind.EUCLIDEAN: "V = 1",
        Kind.HYPERBOLIC: "V = cosh(sqrt(kappa) r) = -kappa <x, p>_L",
        Kind.SPHERICAL: "V = cos(sqrt(kappa) r) = kappa <x, p>",
    }[sf.kind]
