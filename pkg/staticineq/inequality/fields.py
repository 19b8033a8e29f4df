"""
Closed-form fields on the ambient embedding: exact polynomials with value,
gradient and Hessian, the named catalog used by the CLI, and seeded random
polynomial ensembles.
"""
from dataclasses import dataclass
from itertools import product
from typing import Optional, Tuple

import numpy as np

from staticineq.config import DEFAULT_POLY_DEGREE
from staticineq.errors import UsageError
from staticineq.geometry.spaceform import SpaceForm


@dataclass(frozen=True, eq=False)
class Polynomial:
    """sum_p coeffs[p] * prod_i x_i ** exponents[p, i] in flat ambient coordinates."""
    exponents: np.ndarray   # (P, d) nonnegative ints
    coeffs: np.ndarray      # (P,)
    label: str = "poly"

    @property
    def dim(self) -> int:
        return self.exponents.shape[1]

    @property
    def degree(self) -> int:
        return int(self.exponents.sum(axis=1).max()) if len(self.coeffs) else 0

    def value(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise UsageError(f"field '{self.label}' expects {self.dim} coordinates, got {X.shape[1]}")
        if len(self.coeffs) == 0:
            return np.zeros(X.shape[0])
        monomials = np.prod(X[:, None, :] ** self.exponents[None, :, :], axis=2)
        return monomials @ self.coeffs

    def derivative(self, i: int) -> "Polynomial":
        e = self.exponents[:, i]
        keep = e > 0
        exps = self.exponents[keep].copy()
        exps[:, i] -= 1
        return Polynomial(exps, self.coeffs[keep] * e[keep], f"d{i}({self.label})")

    def gradient(self, X: np.ndarray) -> np.ndarray:
        return np.column_stack([self.derivative(i).value(X) for i in range(self.dim)])

    def hessian(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        out = np.empty((X.shape[0], self.dim, self.dim))
        for i in range(self.dim):
            di = self.derivative(i)
            for j in range(i, self.dim):
                out[:, i, j] = out[:, j, i] = di.derivative(j).value(X)
        return out

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.vstack([self.exponents, other.exponents]),
                          np.concatenate([self.coeffs, other.coeffs]), f"{self.label}+{other.label}")

    def scaled(self, c: float, label: Optional[str] = None) -> "Polynomial":
        return Polynomial(self.exponents, c * self.coeffs, label or f"{c:g}*{self.label}")


def monomial(dim: int, powers: dict, coeff: float = 1.0, label: str = "") -> Polynomial:
    e = np.zeros((1, dim), dtype=np.int64)
    for i, p in powers.items():
        e[0, i] = p
    return Polynomial(e, np.array([float(coeff)]), label)


def constant(dim: int, c: float) -> Polynomial:
    return monomial(dim, {}, c, f"const:{c:g}")


def monomial_exponents(dim: int, degree: int) -> np.ndarray:
    """All exponent vectors with total degree <= degree, in a fixed order."""
    exps = [e for e in product(range(degree + 1), repeat=dim) if sum(e) <= degree]
    exps.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    return np.array(exps, dtype=np.int64)


def random_polynomial(dim: int, degree: int, rng: np.random.Generator, label: str = "poly") -> Polynomial:
    exps = monomial_exponents(dim, degree)
    return Polynomial(exps, rng.standard_normal(len(exps)), label)


# --- Catalog ---

def coordinate_index(sf: SpaceForm, i: int) -> int:
    """x_i -> embedding column. Curved models put t (or x0) in column 0."""
    idx = i - 1 if sf.is_flat else i
    if not 0 <= idx < sf.dim:
        raise UsageError(f"coordinate x{i} does not exist for {sf.describe()}")
    return idx


def basis_combination(sf: SpaceForm, coeffs) -> Polynomial:
    """a0 * (1 | t | x0) + sum a_i x_i."""
    a = np.asarray(coeffs, dtype=float)
    if a.shape != (sf.n + 1,):
        raise UsageError(f"basis field needs {sf.n + 1} coefficients, got {a.size}")
    d = sf.dim
    label = "basis:" + ",".join(f"{c:g}" for c in a)
    if sf.is_flat:
        exps = np.vstack([np.zeros((1, d), dtype=np.int64), np.eye(d, dtype=np.int64)])
    else:
        exps = np.eye(d, dtype=np.int64)
    return Polynomial(exps, a, label)


def harmonic_x1sq(sf: SpaceForm) -> Polynomial:
    """x1^2 - (|x|^2 - 1)/3: harmonic in R^3, equal to x1^2 on the unit sphere."""
    d = sf.dim
    parts = [monomial(d, {0: 2}, 2.0 / 3.0)]
    parts += [monomial(d, {i: 2}, -1.0 / 3.0) for i in range(1, d)]
    parts.append(constant(d, 1.0 / 3.0))
    poly = parts[0]
    for p in parts[1:]:
        poly = poly + p
    return Polynomial(poly.exponents, poly.coeffs, "harmonic_x1sq")


def poly_degree(spec: str) -> int:
    """Degree of a 'poly:DEG' spec; 'poly:' alone means the default degree."""
    _, _, arg = spec.strip().partition(":")
    if not arg.strip():
        return DEFAULT_POLY_DEGREE
    try:
        degree = int(arg)
    except ValueError:
        raise UsageError(f"bad polynomial degree in '{spec}'")
    if degree < 0:
        raise UsageError(f"polynomial degree must be nonnegative in '{spec}'")
    return degree


def field_from_spec(spec: str, sf: SpaceForm, seed: Optional[int] = None) -> Polynomial:
    """
    Named closed forms: one, x1..xn, t/x0 (curved), r2, x1sq, linx2,
    harmonic_x1sq, const:c, basis:a0,...,an, poly:degree (needs seed).
    """
    name, _, arg = spec.strip().partition(":")
    d = sf.dim
    if name in ("one", "1"):
        return Polynomial(constant(d, 1.0).exponents, np.array([1.0]), "one")
    if name == "const":
        try:
            return constant(d, float(arg))
        except ValueError:
            raise UsageError(f"bad constant in '{spec}'")
    if name in ("t", "x0") and not sf.is_flat:
        return monomial(d, {0: 1}, 1.0, name)
    if len(name) >= 2 and name[0] == "x" and name[1:].isdigit():
        return monomial(d, {coordinate_index(sf, int(name[1:])): 1}, 1.0, name)
    if name == "r2":
        poly = monomial(d, {0: 2})
        for i in range(1, d):
            poly = poly + monomial(d, {i: 2})
        return Polynomial(poly.exponents, poly.coeffs, "r2")
    if name == "x1sq":
        return monomial(d, {coordinate_index(sf, 1): 2}, 1.0, "x1sq")
    if name == "linx2":
        poly = monomial(d, {coordinate_index(sf, 2): 1}) + constant(d, 2.0)
        return Polynomial(poly.exponents, poly.coeffs, "linx2")
    if name == "harmonic_x1sq":
        if not sf.is_flat:
            raise UsageError("harmonic_x1sq is a Euclidean field")
        return harmonic_x1sq(sf)
    if name == "basis":
        try:
            coeffs = [float(v) for v in arg.split(",")]
        except ValueError:
            raise UsageError(f"bad basis coefficients in '{spec}'")
        return basis_combination(sf, coeffs)
    if name == "poly":
        if seed is None:
            raise UsageError("random polynomial fields need a seed")
        degree = poly_degree(spec)
        return random_polynomial(d, degree, np.random.default_rng(seed), f"poly:{degree}:seed={seed}")
    raise UsageError(f"unknown field '{spec}'")


# --- Oracles ---

@dataclass(frozen=True)
class RadialHelmholtzOracle:
    """u = c R sinh(mu r) / (r sinh(mu R)), mu^2 = -n k: solves Lap u + n k u = 0, u = c on |x| = R."""
    c: float
    radius: float
    k: float
    n: int = 3

    @property
    def mu(self) -> float:
        return float(np.sqrt(-self.n * self.k))

    def value(self, X: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.atleast_2d(X), axis=1)
        mu, R = self.mu, self.radius
        if mu == 0.0:
            return np.full(r.shape, self.c)
        safe = np.where(r > 0, r, 1.0)
        out = self.c * R * np.sinh(mu * safe) / (safe * np.sinh(mu * R))
        return np.where(r > 0, out, self.c * R * mu / np.sinh(mu * R))


def extension_oracle(spec: str, sf: SpaceForm, k: float, radius: float = 1.0):
    """Exact extension of named boundary data on the ball, or None."""
    name, _, arg = spec.strip().partition(":")
    if name in ("one", "1", "const"):
        c = 1.0 if name != "const" else float(arg)
        return RadialHelmholtzOracle(c, radius, k, sf.n)
    if k != 0.0:
        return None
    if (name.startswith("x") and name[1:].isdigit()) or name in ("basis", "linx2", "harmonic_x1sq"):
        return field_from_spec(spec, sf)
    if name == "x1sq" and radius == 1.0:
        return harmonic_x1sq(sf)
    return None


def fd_consistency(field, points: np.ndarray, step: float = 1e-3) -> Tuple[float, float]:
    """Max deviation of gradient and Hessian from 4th-order central differences."""
    X = np.atleast_2d(points)
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    offsets = np.arange(-2, 3) * step
    d = X.shape[1]
    grad_fd = np.zeros_like(X)
    hess_fd = np.zeros((X.shape[0], d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        for w, o in zip(c, offsets):
            if w == 0.0:
                continue
            grad_fd[:, i] += w * field.value(X + o * e) / step
            hess_fd[:, :, i] += w * field.gradient(X + o * e) / step
    grad_err = float(np.max(np.abs(grad_fd - field.gradient(X))))
    H = field.hessian(X)
    hess_err = float(max(np.max(np.abs(hess_fd - H)), np.max(np.abs(H - np.transpose(H, (0, 2, 1))))))
    return grad_err, hess_err


def check_field(field, points: np.ndarray, tol: float = 1e-6) -> None:
    if not callable(getattr(field, "hessian", None)) or not callable(getattr(field, "gradient", None)):
        raise UsageError(f"field '{getattr(field, 'label', field)}' has no gradient and Hessian suppliers")
    grad_err, hess_err = fd_consistency(field, points)
    if grad_err > tol or hess_err > tol:
        raise UsageError(f"field '{field.label}' derivatives inconsistent: grad {grad_err:.2e}, hess {hess_err:.2e}")
