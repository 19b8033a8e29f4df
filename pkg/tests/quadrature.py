import numpy as np


def sphere_integral(func, radius: float = 1.0, n_lat: int = 48, n_lon: int = 96) -> float:
    """Gauss-Legendre in z times the trapezoid rule in longitude over the sphere |x| = radius."""
    z, w = np.polynomial.legendre.leggauss(n_lat)
    phi = 2.0 * np.pi * np.arange(n_lon) / n_lon
    Z, PHI = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1.0 - Z ** 2)
    X = radius * np.stack([s * np.cos(PHI), s * np.sin(PHI), Z], axis=-1).reshape(-1, 3)
    weights = (w[:, None] * np.full(n_lon, 2.0 * np.pi / n_lon)[None, :]).ravel() * radius ** 2
    return float(np.sum(weights * func(X)))
