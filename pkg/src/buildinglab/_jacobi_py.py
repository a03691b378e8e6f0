"""Pure-numpy Jacobi fallback.

Rotations are scheduled in round-robin (tournament) order: every round
applies ``n // 2`` rotations on disjoint index pairs at once, which numpy
can vectorise. A sweep is ``n - 1`` rounds and touches every pair once.
"""
from __future__ import annotations

import numpy as np


def tournament_rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def round_robin_jacobi(a: np.ndarray, v: np.ndarray, tol_off: float, max_sweeps: int):
    """Same contract as the compiled ``cyclic_jacobi``."""
    n = a.shape[0]
    rounds = tournament_rounds(n)
    off = _off_norm(a)
    for sweep in range(max_sweeps + 1):
        off = _off_norm(a)
        if off <= tol_off:
            return sweep, off
        if sweep == max_sweeps:
            break
        for P, Q in rounds:
            if P.size == 0:
                continue
            apq = a[P, Q]
            live = apq != 0.0
            if not live.any():
                continue
            P, Q, apq = P[live], Q[live], apq[live]
            with np.errstate(over="ignore", divide="ignore"):
                tau = (a[Q, Q] - a[P, P]) / (2.0 * apq)
                root = np.sqrt(1.0 + tau * tau)
                t = np.where(
                    np.abs(tau) > 1e150,
                    0.5 / tau,
                    np.sign(tau + (tau == 0)) / (np.abs(tau) + root),
                )
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            x, y = a[:, P], a[:, Q]
            a[:, P] = x * c - y * s
            a[:, Q] = x * s + y * c
            x, y = a[P, :], a[Q, :]
            a[P, :] = c[:, None] * x - s[:, None] * y
            a[Q, :] = s[:, None] * x + c[:, None] * y
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            x, y = v[:, P], v[:, Q]
            v[:, P] = x * c - y * s
            v[:, Q] = x * s + y * c
    return -1, off
