"""Reflecting-element vs sensor allocation under a shared budget.

With weights W_I per element and W_s per sensor and a total budget Q, the
single-antenna DoA bound is minimized by maximizing N^2 (K^3 - K) subject to
W_I * N + W_s * K = Q over continuous N, K.  Substituting N = Q/((1+s) W_I),
K = s Q/((1+s) W_s) reduces the problem to a scalar cubic in the split ratio
s, solved in closed form; a large-budget approximation and a grid search are
provided alongside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

BUDGET_RTOL = 1e-6


class AllocationDomainError(ArithmeticError):
    """The closed-form cubic root left its real domain."""


@dataclass(frozen=True)
class AllocationResult:
    n_cont: float               # continuous number of reflecting elements
    k_cont: float               # continuous number of sensors
    varsigma: float             # split ratio K W_s / (N W_I)
    mode: Literal["optimal", "suboptimal", "exhaustive"]
    objective: float            # N^2 (K^3 - K)

    def __post_init__(self):
        if self.n_cont <= 0 or self.k_cont <= 0:
            raise ValueError("allocation must be strictly positive")


def split_objective(n: float, k: float) -> float:
    """Array-gain product N^2 (K^3 - K) that the bound is inversely
    proportional to."""
    return n ** 2 * (k ** 3 - k)


def _check_budget(q_tot: float, w_i: float, w_s: float) -> None:
    if w_i <= 0 or w_s <= 0:
        raise ValueError("weights must be strictly positive")
    if q_tot <= w_i + 2.0 * w_s:
        raise ValueError(
            f"budget {q_tot} leaves no room for one element and two sensors "
            f"(needs more than {w_i + 2.0 * w_s})"
        )


def allocate_optimal(q_tot: float, w_i: float, w_s: float) -> AllocationResult:
    """Closed-form optimal continuous allocation.

    The split ratio is the unique stationary point of the gain product in
    (-2/beta4, inf), obtained from the cubic
    beta4 s^3 + 3 s^2 + beta5 = 0 by Cardano's formula.  For every budget
    with Q >> W_s the cubic has three real roots, so the two cube-root
    arguments are complex conjugates and their principal roots sum to a
    real number; the evaluation therefore runs in complex arithmetic and
    the residual of the recovered root is checked instead of the
    discriminant's sign.
    """
    _check_budget(q_tot, w_i, w_s)
    q2 = q_tot ** 2
    ws2 = w_s ** 2
    beta4 = -2.0 * (q2 - ws2) / (q2 + ws2)
    beta5 = -ws2 / (q2 + ws2)
    beta6 = -beta4 ** 2 * beta5 - 2.0
    disc = beta6 ** 2 - 4.0
    if disc >= 0.0:
        beta7 = np.sqrt(disc)
        varsigma = (-1.0 / beta4
                    + np.cbrt((beta6 + beta7) / (2.0 * beta4 ** 3))
                    + np.cbrt((beta6 - beta7) / (2.0 * beta4 ** 3)))
    else:
        # Conjugate cube-root pair; its principal value has twice the real
        # part equal to the stationary (largest) real root.
        beta7 = 1j * np.sqrt(-disc)
        root = ((beta6 + beta7) / (2.0 * beta4 ** 3)) ** (1.0 / 3.0)
        varsigma = -1.0 / beta4 + 2.0 * float(root.real)
    residual = split_cubic(varsigma, q_tot, w_s)
    if abs(residual) > 1e-8 or varsigma <= 0.0:
        raise AllocationDomainError(
            f"closed-form split ratio failed validation (root {varsigma:g}, "
            f"cubic residual {residual:g})"
        )
    n = q_tot / ((1.0 + varsigma) * w_i)
    k = varsigma * q_tot / ((1.0 + varsigma) * w_s)
    return AllocationResult(n_cont=float(n), k_cont=float(k),
                            varsigma=varsigma, mode="optimal",
                            objective=split_objective(n, k))


def allocate_suboptimal(q_tot: float, w_i: float, w_s: float) -> AllocationResult:
    """Large-budget approximation of the optimal split.

    Dropping the W_s^2/(Q^2 + W_s^2) term fixes the split ratio at
    3(Q^2 + W_s^2) / (2(Q^2 - W_s^2)), giving

        N = (2 Q^3 - 2 Q W_s^2) / ((5 Q^2 + W_s^2) W_I)
        K = (3 Q^3 + 3 Q W_s^2) / (5 Q^2 W_s + W_s^3)

    The N denominator groups (5 Q^2 + W_s^2) before the W_I factor; this is
    the only grouping under which W_I * N + W_s * K = Q holds identically,
    which the tests check.
    """
    _check_budget(q_tot, w_i, w_s)
    q2 = q_tot ** 2
    ws2 = w_s ** 2
    n = (2.0 * q_tot ** 3 - 2.0 * q_tot * ws2) / ((5.0 * q2 + ws2) * w_i)
    k = (3.0 * q_tot ** 3 + 3.0 * q_tot * ws2) / (5.0 * q2 * w_s + w_s ** 3)
    varsigma = 3.0 * (q2 + ws2) / (2.0 * (q2 - ws2))
    return AllocationResult(n_cont=float(n), k_cont=float(k),
                            varsigma=float(varsigma), mode="suboptimal",
                            objective=split_objective(n, k))


def allocate_exhaustive(q_tot: float, w_i: float, w_s: float,
                        step: float) -> AllocationResult:
    """Grid search over feasible continuous splits with the given step."""
    _check_budget(q_tot, w_i, w_s)
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    n_grid = np.arange(step, (q_tot - w_s) / w_i, step)
    k_grid = (q_tot - w_i * n_grid) / w_s
    feasible = k_grid > 1.0
    n_grid, k_grid = n_grid[feasible], k_grid[feasible]
    if n_grid.size == 0:
        raise ValueError("no feasible grid point; decrease the step")
    objective = n_grid ** 2 * (k_grid ** 3 - k_grid)
    best = int(np.argmax(objective))
    n, k = float(n_grid[best]), float(k_grid[best])
    return AllocationResult(n_cont=n, k_cont=k,
                            varsigma=(k * w_s) / (n * w_i), mode="exhaustive",
                            objective=float(objective[best]))


def split_cubic(varsigma: float, q_tot: float, w_s: float) -> float:
    """Stationarity cubic beta4 s^3 + 3 s^2 + beta5 whose root is the
    optimal split ratio."""
    q2 = q_tot ** 2
    ws2 = w_s ** 2
    beta4 = -2.0 * (q2 - ws2) / (q2 + ws2)
    beta5 = -ws2 / (q2 + ws2)
    return beta4 * varsigma ** 3 + 3.0 * varsigma ** 2 + beta5


def split_gain(varsigma: np.ndarray, q_tot: float, w_i: float,
               w_s: float) -> np.ndarray:
    """Gain product as a function of the split ratio (vectorized)."""
    s = np.asarray(varsigma, dtype=float)
    n = q_tot / ((1.0 + s) * w_i)
    k = s * q_tot / ((1.0 + s) * w_s)
    return n ** 2 * (k ** 3 - k)
