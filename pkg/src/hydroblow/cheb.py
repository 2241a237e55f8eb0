"""Chebyshev-Lobatto collocation utilities on an ascending grid [0, H].

The grid is z_j = H (1 - cos(pi j / N)) / 2, j = 0..N, so z_0 = 0 and
z_N = H.  Differentiation and antidifferentiation are exact for polynomials
of degree N; integration uses Clenshaw-Curtis weights.  All builders return
plain numpy arrays so callers can precompute and reuse them.
"""

from __future__ import annotations

import numpy as np


def lobatto_nodes(N: int, H: float) -> np.ndarray:
    """Ascending Chebyshev-Lobatto nodes on [0, H] (N+1 points)."""
    j = np.arange(N + 1)
    return H * (1.0 - np.cos(np.pi * j / N)) / 2.0


def diff_matrix(N: int, H: float) -> np.ndarray:
    """First-derivative collocation matrix on the ascending Lobatto grid."""
    j = np.arange(N + 1)
    xi = np.cos(np.pi * j / N)  # descending companion variable
    c = np.ones(N + 1)
    c[0] = c[N] = 2.0
    c *= (-1.0) ** j
    X = np.tile(xi, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    # z = H (1 - xi) / 2, so d/dz = -(2/H) d/dxi
    return -2.0 / H * D


def values_to_coeffs(N: int) -> np.ndarray:
    """Matrix taking Lobatto values to Chebyshev series coefficients."""
    j = np.arange(N + 1)
    M = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        cn = 2.0 if n in (0, N) else 1.0
        row = np.cos(np.pi * n * j / N).copy()
        row[0] *= 0.5
        row[N] *= 0.5
        M[n, :] = (2.0 / (N * cn)) * row
    return M


def antideriv_matrix(N: int, H: float) -> np.ndarray:
    """Matrix J with (J v)_j = integral of v from 0 to z_j.

    Built by integrating the Chebyshev series term by term, keeping the
    degree-N+1 term produced by integrating T_N, so (J v) is the exact
    antiderivative of the interpolant and the last row agrees with the
    Clenshaw-Curtis weights to rounding (w diagnostics rely on this).
    """
    B = np.zeros((N + 2, N + 1))
    B[1, 0] = 1.0
    if N >= 1:
        B[0, 1] = 0.25
        B[2, 1] = 0.25
    for n in range(2, N + 1):
        B[n + 1, n] = 0.5 / (n + 1)
        B[n - 1, n] = -0.5 / (n - 1)
    j = np.arange(N + 1)
    T = np.cos(np.pi * np.outer(j, np.arange(N + 2)) / N)  # T_n(xi_j), n <= N+1
    M = B @ values_to_coeffs(N)
    # integral over z from 0 (xi=1) to z_j is (H/2) * (I(1) - I(xi_j))
    ones = np.ones(N + 2)
    return (H / 2.0) * (np.outer(np.ones(N + 1), ones @ M) - T @ M)


def clenshaw_curtis_weights(N: int, H: float) -> np.ndarray:
    """Clenshaw-Curtis weights on the Lobatto grid, integrating over [0, H].

    Symmetric in the node index, so ascending/descending orientation does
    not matter.
    """
    theta = np.pi * np.arange(N + 1) / N
    v = np.ones(N - 1)
    if N % 2 == 0:
        w_end = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[1:-1]) / (4 * k * k - 1)
        v -= np.cos(N * theta[1:-1]) / (N**2 - 1)
    else:
        w_end = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[1:-1]) / (4 * k * k - 1)
    w = np.empty(N + 1)
    w[0] = w[N] = w_end
    w[1:-1] = 2.0 * v / N
    return w * (H / 2.0)
