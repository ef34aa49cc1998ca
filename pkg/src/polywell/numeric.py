"""Floating-point first-order solver used as a cross-check for the exact path.

The problem ``min_x D(Ax, b) + f(x)`` is split as ``g(x) + h(Kx)`` where ``K``
stacks the gradients of all pieces and the domain constraints.  For the
quadratic fidelity ``g`` has a cheap prox and plain primal-dual hybrid
gradient iterations are used; other smooth fidelities go through the
Condat-Vu variant that only needs a gradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SmoothFidelity:
    """``D(u, b)`` given by value and gradient in ``u`` plus a Lipschitz bound."""

    value: Callable[[np.ndarray, np.ndarray], float]
    gradient: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lipschitz: float


def quadratic_fidelity(sigma: np.ndarray) -> SmoothFidelity:
    S = np.asarray(sigma, dtype=float)
    return SmoothFidelity(
        value=lambda u, b: 0.5 * float((u - b) @ S @ (u - b)),
        gradient=lambda u, b: S @ (u - b),
        lipschitz=float(np.linalg.eigvalsh(S).max()) if S.size else 0.0,
    )


def _project_simplex(v: np.ndarray) -> np.ndarray:
    if v.size == 1:
        return np.ones(1)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    cond = u - (css - 1) / k > 0
    rho = k[cond][-1]
    theta = (css[rho - 1] - 1) / rho
    return np.maximum(v - theta, 0.0)


class _Split:
    def __init__(self, terms, G, h, E, e, n):
        blocks = []
        rows = []
        w = []
        for t in terms:
            start = len(rows)
            for v, wi in t:
                rows.append(v)
                w.append(wi)
            blocks.append((start, len(rows)))
        self.term_blocks = blocks
        self.g0 = len(rows)
        rows.extend(G)
        self.e0 = len(rows)
        rows.extend(E)
        self.K = np.array(rows, dtype=float).reshape(len(rows), n)
        self.w = np.array(w, dtype=float)
        self.h = np.array(h, dtype=float)
        self.e = np.array(e, dtype=float)

    def prox_conj(self, u: np.ndarray, s: float) -> np.ndarray:
        out = np.empty_like(u)
        for a, b in self.term_blocks:
            out[a:b] = _project_simplex(u[a:b] + s * self.w[a:b])
        out[self.g0 : self.e0] = np.maximum(0.0, u[self.g0 : self.e0] - s * self.h)
        out[self.e0 :] = u[self.e0 :] - s * self.e
        return out


@dataclass
class NumericResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


def pdhg(
    A: np.ndarray,
    b: np.ndarray,
    sigma: np.ndarray,
    terms,
    G,
    h,
    E,
    e,
    tol: float = 1e-9,
    max_iter: int = 200_000,
    fidelity: SmoothFidelity | None = None,
) -> NumericResult:
    m, n = A.shape if A.size else (A.shape[0], A.shape[1])
    split = _Split(terms, G, h, E, e, n)
    K = split.K
    normK = np.linalg.norm(K, 2) if K.size else 1.0
    normK = max(normK, 1e-12)
    x = np.zeros(n)
    y = np.zeros(K.shape[0])
    if fidelity is None:
        S = np.asarray(sigma, dtype=float)
        Q = A.T @ S @ A
        Atb = A.T @ S @ b
        tau = 1.0 / normK
        s = 1.0 / normK
        lhs = np.linalg.inv(tau * Q + np.eye(n))

        def primal(v):
            return lhs @ (v + tau * Atb)

        step_x = lambda x, Kty: primal(x - tau * Kty)
    else:
        L = fidelity.lipschitz * (np.linalg.norm(A, 2) ** 2 if A.size else 0.0)
        s = 1.0 / normK
        # 1/tau - s ||K||^2 >= L/2
        tau = 1.0 / (s * normK**2 + L / 2 + 1e-12) * 0.99

        def step_x(x, Kty):
            grad = A.T @ fidelity.gradient(A @ x, b)
            return x - tau * (grad + Kty)

    it = 0
    res = np.inf
    for it in range(1, max_iter + 1):
        x_new = step_x(x, K.T @ y)
        y_new = split.prox_conj(y + s * (K @ (2 * x_new - x)), s)
        dx = np.abs(x_new - x).max() if n else 0.0
        dy = np.abs(y_new - y).max() if y.size else 0.0
        x, y = x_new, y_new
        res = max(dx / tau, dy / s)
        if res < tol:
            return NumericResult(x, it, res, True)
    return NumericResult(x, it, res, False)
