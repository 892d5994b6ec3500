"""Lagrange shape functions on the unit interval/square and Gauss rules.

Local node order on the square is tensor order ``b * n + a`` with ``a`` along
``z`` (first reference coordinate) and ``b`` along ``r``, matching
:mod:`layered_fsi.mesh`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def gauss_legendre(n: int):
    """``n``-point Gauss rule mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def lagrange_1d(order: int, x):
    """Values and derivatives of the 1D Lagrange basis on equispaced nodes of
    ``[0, 1]``. Returns arrays of shape ``(len(x), order + 1)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if order == 1:
        N = np.stack([1.0 - x, x], axis=-1)
        dN = np.stack([-np.ones_like(x), np.ones_like(x)], axis=-1)
    elif order == 2:
        N = np.stack([2.0 * (x - 0.5) * (x - 1.0), -4.0 * x * (x - 1.0), 2.0 * x * (x - 0.5)], axis=-1)
        dN = np.stack([4.0 * x - 3.0, 4.0 - 8.0 * x, 4.0 * x - 1.0], axis=-1)
    else:
        raise ValueError(f"unsupported order {order}")
    return N, dN


def lagrange_2d(order: int, xi, zeta):
    """Tensor-product basis at points ``(xi, zeta)``: values, d/dxi, d/dzeta."""
    Nx, dNx = lagrange_1d(order, xi)
    Nr, dNr = lagrange_1d(order, zeta)
    N = (Nr[:, :, None] * Nx[:, None, :]).reshape(len(Nx), -1)
    dxi = (Nr[:, :, None] * dNx[:, None, :]).reshape(len(Nx), -1)
    dzeta = (dNr[:, :, None] * Nx[:, None, :]).reshape(len(Nx), -1)
    return N, dxi, dzeta


@dataclass(frozen=True)
class QuadRule:
    """Tensor Gauss rule on the unit square plus tabulated Q2/Q1 bases."""

    xi: np.ndarray
    zeta: np.ndarray
    weights: np.ndarray
    N2: np.ndarray
    dN2_dxi: np.ndarray
    dN2_dzeta: np.ndarray
    N1: np.ndarray
    # 1D quadratic interface basis at the xi coordinate of every point
    L2: np.ndarray
    dL2: np.ndarray

    @property
    def n_points(self) -> int:
        return self.weights.size


def square_rule(n: int = 3) -> QuadRule:
    x, w = gauss_legendre(n)
    X, Z = np.meshgrid(x, x)
    W = np.outer(w, w)
    xi, zeta, weights = X.ravel(), Z.ravel(), W.ravel()
    N2, d2x, d2z = lagrange_2d(2, xi, zeta)
    N1, _, _ = lagrange_2d(1, xi, zeta)
    L2, dL2 = lagrange_1d(2, xi)
    return QuadRule(xi, zeta, weights, N2, d2x, d2z, N1, L2, dL2)


DEFAULT_RULE = square_rule(3)
