"""Small planar-geometry helpers shared across the package.

Convention: positions are North-East coordinates (x = North, y = East),
headings are radians measured from North toward East.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return float((a + np.pi) % TWO_PI - np.pi)


def unit(v: np.ndarray) -> np.ndarray:
    """Unit vector along v; raises on (numerically) zero input."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def cross2(a: np.ndarray, b: np.ndarray) -> float:
    """Planar cross product a_x*b_y - a_y*b_x."""
    return float(a[0] * b[1] - a[1] * b[0])


def rotation(psi: float) -> np.ndarray:
    """2x2 rotation matrix mapping body coordinates to world coordinates."""
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s], [s, c]])
