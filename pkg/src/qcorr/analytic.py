"""Closed-form and quadrature values of conditional covariances.

Two routes are offered:

* the normal/Rademacher model ``(X, W X)`` has an explicit formula for the
  conditional covariance on any interior quantile box;
* for a vector with a copula density ``c`` and quantile functions
  ``Q_X, Q_Y`` the covariance is a ratio of integrals over the probability
  box, evaluated with tensor Gauss-Legendre quadrature.

The law of ``(X, W X)`` lives on the two lines ``y = x`` and ``y = -x`` and
has no density on the plane, so it is handled by its closed form (and by
simulation) only, never by the quadrature route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, EmptyConditionError
from .quantile import QuantileSplit, _as_split
from .special import gauss_legendre, norm_cdf, norm_pdf, norm_quantile

__all__ = [
    "BoundaryPoints",
    "NormalProductModel",
    "CopulaDensity",
    "product_copula",
    "gaussian_copula",
    "normal_product_boundaries",
    "normal_product_cov",
    "quadrature_cov",
    "v_c",
]


@dataclass(frozen=True)
class BoundaryPoints:
    """End points of the two pieces of the quantile box hit by ``(X, WX)``.

    ``[l, r]`` is the stretch of the diagonal branch (``W = 1``) and
    ``[l_hat, r_hat]`` the stretch of the anti-diagonal branch (``W = -1``),
    both expressed in ``X``.  An empty stretch collapses to ``0, 0``.
    """

    l: float
    r: float
    l_hat: float
    r_hat: float


def _interior(split, name):
    split = _as_split(split)
    if not split.is_interior:
        raise DomainError(f"{name}: splits must satisfy 0 < p < q < 1, got ({split.p}, {split.q})")
    return split


def normal_product_boundaries(split_x, split_y):
    sx = _interior(split_x, "normal_product_boundaries")
    sy = _interior(split_y, "normal_product_boundaries")
    p1, q1, p2, q2 = sx.p, sx.q, sy.p, sy.q
    ind = float(q1 > p2) * float(q2 > p1)
    ind_hat = float(q1 > 1.0 - q2) * float(1.0 - p2 > p1)
    qp1, qq1 = norm_quantile(p1), norm_quantile(q1)
    l = max(qp1, norm_quantile(p2)) * ind
    r = min(qq1, norm_quantile(q2)) * ind
    l_hat = max(qp1, norm_quantile(1.0 - q2)) * ind_hat
    r_hat = min(qq1, norm_quantile(1.0 - p2)) * ind_hat
    return BoundaryPoints(l=l, r=r, l_hat=l_hat, r_hat=r_hat)


def normal_product_cov(split_x, split_y):
    """Conditional covariance of ``(X, WX)`` on the quantile box.

    ``X`` standard normal, ``W`` an independent random sign.
    """
    b = normal_product_boundaries(split_x, split_y)
    F, f = norm_cdf, norm_pdf
    l, r, lh, rh = b.l, b.r, b.l_hat, b.r_hat
    denom = F(r) - F(l) + F(rh) - F(lh)
    if not denom > 0.0:
        raise EmptyConditionError("the quantile box misses the support of (X, WX)")
    second_diag = l * f(l) - r * f(r) + F(r) - F(l)
    second_anti = lh * f(lh) - rh * f(rh) + F(rh) - F(lh)
    mean_term = (f(l) - f(r)) ** 2 - (f(lh) - f(rh)) ** 2
    return second_diag / denom - second_anti / denom - mean_term / denom ** 2


class NormalProductModel:
    """The law of ``(X, WX)``: dependent, uncorrelated, standard normal margins.

    Its mass sits on the two lines ``y = x`` and ``y = -x`` so it has no
    planar density; use the closed form, not :func:`quadrature_cov`.
    """

    boundaries = staticmethod(normal_product_boundaries)
    cov = staticmethod(normal_product_cov)


@dataclass(frozen=True)
class CopulaDensity:
    """A copula density on (0, 1)^2 together with the marginal quantile maps.

    ``density``, ``q_x`` and ``q_y`` must accept numpy arrays.
    """

    density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    q_x: Callable[[np.ndarray], np.ndarray] = norm_quantile
    q_y: Callable[[np.ndarray], np.ndarray] = norm_quantile
    name: str = "copula"

    def __call__(self, u, v):
        return self.density(u, v)


def product_copula(q_x=norm_quantile, q_y=norm_quantile):
    """Independence copula, ``c == 1``."""

    def density(u, v):
        return np.ones(np.broadcast(np.asarray(u), np.asarray(v)).shape)

    return CopulaDensity(density=density, q_x=q_x, q_y=q_y, name="product")


def gaussian_copula(rho, q_x=norm_quantile, q_y=norm_quantile):
    if not -1.0 < rho < 1.0:
        raise DomainError(f"gaussian_copula: |rho| must be < 1, got {rho}")
    k = 1.0 - rho * rho
    norm_const = 1.0 / math.sqrt(k)

    def density(u, v):
        a = norm_quantile(np.asarray(u, dtype=float))
        b = norm_quantile(np.asarray(v, dtype=float))
        return norm_const * np.exp(-(rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * k))

    return CopulaDensity(density=density, q_x=q_x, q_y=q_y, name=f"gaussian(rho={rho:g})")


def quadrature_cov(copula, split_x, split_y, order=64):
    """Conditional covariance and box probability by tensor Gauss-Legendre quadrature.

    Returns ``(cov, p_A)``.
    """
    sx = _interior(split_x, "quadrature_cov")
    sy = _interior(split_y, "quadrature_cov")
    if order < 8:
        raise DomainError(f"quadrature_cov: order must be >= 8, got {order}")
    rule = gauss_legendre(order)
    u, wu = rule.mapped(sx.p, sx.q)
    v, wv = rule.mapped(sy.p, sy.q)
    c = np.asarray(copula.density(u[:, None], v[None, :]), dtype=float)
    qu = np.asarray(copula.q_x(u), dtype=float)
    qv = np.asarray(copula.q_y(v), dtype=float)
    cw = c * wu[:, None] * wv[None, :]
    p_a = float(cw.sum())
    if p_a < 1e-12:
        raise EmptyConditionError(f"quadrature_cov: box probability {p_a:.3e} is numerically zero")
    e_xy = float(qu @ cw @ qv) / p_a
    e_x = float(qu @ cw.sum(axis=1)) / p_a
    e_y = float(cw.sum(axis=0) @ qv) / p_a
    return e_xy - e_x * e_y, p_a


def v_c(copula, u1, v1, u2, v2):
    """``c(u1, v1) c(u2, v2) - c(u1, v2) c(u2, v1)``; identically zero iff independence."""
    c = copula.density if isinstance(copula, CopulaDensity) else copula
    a = c(u1, v1) * c(u2, v2)
    b = c(u1, v2) * c(u2, v1)
    out = np.asarray(a - b, dtype=float)
    return float(out) if out.ndim == 0 else out
