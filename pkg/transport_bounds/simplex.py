"""Dense bounded-variable revised simplex for small-row linear programs.

Solves

    min / max  c' x
    s.t.       row_lower <= A x <= row_upper
               lower <= x <= upper          (all bounds finite)

Each ranged row gets a slack s_i = (A x)_i bounded by the row range, so the
working problem is A x - s = 0 with every variable boxed. Phase one adds one
artificial per row and minimizes their sum; phase two pins the artificials to
zero and optimizes the real objective from the same basis. Rows and the
objective are equilibrated before solving. Pricing is Dantzig's rule with
smallest-index ties, falling back to Bland's rule after a run of degenerate
pivots, so a given input always follows the same pivot path.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import SolverError

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LPOptions:
    """Tolerances of the LP layer.

    Args:
        feasibility_tol: half-width used when an equality is enforced as a range
        max_feasibility_tol: largest half-width tried by adaptive relaxation
        primal_tol: phase-one objective (scaled units) accepted as feasible
        optimality_tol: reduced-cost threshold for entering candidates (scaled units)
        pivot_tol: smallest pivot element considered in the ratio test
        degenerate_limit: degenerate pivots in a row before switching to Bland's rule
        refactor_every: pivots between fresh inversions of the basis
        max_iter: iteration cap per phase (None: proportional to problem size)
    """
    feasibility_tol: float = 1e-6
    max_feasibility_tol: float = 1e-3
    primal_tol: float = 1e-9
    optimality_tol: float = 1e-11
    pivot_tol: float = 1e-11
    degenerate_limit: int = 50
    refactor_every: int = 32
    max_iter: int | None = None


@dataclass(frozen=True, eq=False)
class SimplexResult:
    """Outcome of :func:`bounded_simplex`, in the caller's units and sense.

    ``dual_objective`` is recomputed from the row multipliers and reduced costs;
    by weak duality it bounds the optimum, and it equals ``objective`` at an
    optimal basis. ``min_infeasibility`` is the largest row violation left by
    phase one (0 when feasible).
    """
    status: str
    x: np.ndarray
    objective: float
    row_activity: np.ndarray
    row_duals: np.ndarray
    dual_objective: float
    min_infeasibility: float
    iterations: int


def _invert(basis_matrix: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(basis_matrix)
    except np.linalg.LinAlgError as e:
        raise SolverError(f"Simplex basis became singular: {e}") from e


class _BoundedSimplex:
    """Working state: columns, bounds, values and the basis inverse."""

    def __init__(self, columns, lo, hi, values, at_upper, basis, options: LPOptions):
        self.columns = columns
        self.lo = lo
        self.hi = hi
        self.values = values
        self.at_upper = at_upper
        self.basis = basis
        self.options = options
        self.m, self.n = columns.shape
        self.basis_inverse = _invert(columns[:, basis])
        self.iterations = 0
        self._pivots = 0

    def refactor(self) -> None:
        self.basis_inverse = _invert(self.columns[:, self.basis])
        nonbasic = np.ones(self.n, dtype=bool)
        nonbasic[self.basis] = False
        rhs = -self.columns[:, nonbasic] @ self.values[nonbasic]
        self.values[self.basis] = self.basis_inverse @ rhs

    def reduced_costs(self, cost: np.ndarray):
        duals = cost[self.basis] @ self.basis_inverse
        reduced = cost - duals @ self.columns
        reduced[self.basis] = 0.0
        return duals, reduced

    def run(self, cost: np.ndarray) -> None:
        opts = self.options
        max_iter = opts.max_iter or 20 * (self.n + self.m) + 1000
        movable = self.hi > self.lo
        degenerate_run = 0

        for _ in range(max_iter):
            _, reduced = self.reduced_costs(cost)
            is_basic = np.zeros(self.n, dtype=bool)
            is_basic[self.basis] = True
            raise_it = ~self.at_upper & (reduced < -opts.optimality_tol)
            lower_it = self.at_upper & (reduced > opts.optimality_tol)
            candidates = np.flatnonzero((raise_it | lower_it) & movable & ~is_basic)
            if candidates.size == 0:
                return
            if degenerate_run >= opts.degenerate_limit:
                entering = int(candidates[0])
            else:
                entering = int(candidates[np.argmax(np.abs(reduced[candidates]))])
            self.iterations += 1

            direction = -1.0 if self.at_upper[entering] else 1.0
            alpha = self.basis_inverse @ self.columns[:, entering]
            t = direction * alpha
            basic_values = self.values[self.basis]
            limits = np.full(self.m, np.inf)
            falling = t > opts.pivot_tol
            rising = t < -opts.pivot_tol
            limits[falling] = (basic_values[falling] - self.lo[self.basis][falling]) / t[falling]
            limits[rising] = (self.hi[self.basis][rising] - basic_values[rising]) / -t[rising]
            limits = np.maximum(limits, 0.0)
            theta_basic = limits.min() if self.m else np.inf
            theta_flip = self.hi[entering] - self.lo[entering]

            if theta_flip <= theta_basic:
                if not np.isfinite(theta_flip):
                    raise SolverError("Linear program is unbounded")
                self.values[self.basis] -= theta_flip * t
                self.at_upper[entering] = direction > 0
                self.values[entering] = self.hi[entering] if direction > 0 else self.lo[entering]
                degenerate_run = 0
                continue

            if not np.isfinite(theta_basic):
                raise SolverError("Linear program is unbounded")
            ties = np.flatnonzero(limits <= theta_basic + 1e-12 * (1.0 + theta_basic))
            row = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            leaving = self.basis[row]
            leaves_at_upper = bool(t[row] < 0)

            self.values[self.basis] -= theta_basic * t
            self.values[entering] += direction * theta_basic
            self.values[leaving] = self.hi[leaving] if leaves_at_upper else self.lo[leaving]
            self.at_upper[leaving] = leaves_at_upper
            self.at_upper[entering] = False
            self.basis[row] = entering

            pivot_row = self.basis_inverse[row] / alpha[row]
            self.basis_inverse -= np.outer(alpha, pivot_row)
            self.basis_inverse[row] = pivot_row
            self._pivots += 1
            if self._pivots % opts.refactor_every == 0:
                self.refactor()
            degenerate_run = degenerate_run + 1 if theta_basic <= 1e-12 else 0

        raise SolverError(f"Simplex iteration limit ({max_iter}) reached")


def _equilibration(matrix: np.ndarray) -> np.ndarray:
    largest = np.abs(matrix).max(axis=1) if matrix.size else np.zeros(matrix.shape[0])
    return np.where(largest > 0, 1.0 / np.where(largest > 0, largest, 1.0), 1.0)


def bounded_simplex(
    c,
    A,
    row_lower,
    row_upper,
    lower,
    upper,
    sense: str = "min",
    options: LPOptions | None = None,
) -> SimplexResult:
    """Solve a ranged-row LP with boxed variables.

    Args:
        c: objective coefficients (n,)
        A: constraint matrix (m, n)
        row_lower, row_upper: row ranges (m,); equal entries give equalities
        lower, upper: finite variable bounds (n,)
        sense: "min" or "max"
        options: solver tolerances

    Returns:
        SimplexResult with status "optimal" or "infeasible".
    """
    options = options or LPOptions()
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    row_lower = np.asarray(row_lower, dtype=float)
    row_upper = np.asarray(row_upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or lower.shape != (n,) or upper.shape != (n,):
        raise ValueError("Objective and variable bounds must match the column count of A")
    if row_lower.shape != (m,) or row_upper.shape != (m,):
        raise ValueError("Row ranges must match the row count of A")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValueError("Variable bounds must be finite")
    if np.any(lower > upper) or np.any(row_lower > row_upper):
        raise ValueError("Lower bounds must not exceed upper bounds")

    row_scale = _equilibration(A)
    scaled = A * row_scale[:, None]
    sign = 1.0 if sense == "min" else -1.0
    largest_cost = np.abs(c).max() if n else 0.0
    cost_scale = 1.0 / largest_cost if largest_cost > 0 else 1.0
    cost = sign * c * cost_scale

    # Columns: x (n) | slacks (m) | artificials (m).
    identity = np.eye(m)
    columns = np.hstack([scaled, -identity, identity])
    lo = np.concatenate([lower, row_lower * row_scale, np.zeros(m)])
    hi = np.concatenate([upper, row_upper * row_scale, np.full(m, np.inf)])
    values = np.zeros(n + 2 * m)
    at_upper = np.zeros(n + 2 * m, dtype=bool)

    at_upper[:n] = cost < 0
    values[:n] = np.where(at_upper[:n], upper, lower)
    activity = scaled @ values[:n]
    slack_lo, slack_hi = lo[n:n + m], hi[n:n + m]
    slack_at_upper = np.abs(activity - slack_hi) < np.abs(activity - slack_lo)
    at_upper[n:n + m] = slack_at_upper
    values[n:n + m] = np.where(slack_at_upper, slack_hi, slack_lo)
    residual = values[n:n + m] - activity
    orientation = np.where(residual < 0, -1.0, 1.0)
    columns[:, n + m:] *= orientation
    values[n + m:] = np.abs(residual)
    basis = list(range(n + m, n + 2 * m))

    solver = _BoundedSimplex(columns, lo, hi, values, at_upper, basis, options)
    phase_one_cost = np.concatenate([np.zeros(n + m), np.ones(m)])
    solver.run(phase_one_cost)
    solver.refactor()

    artificial = np.maximum(solver.values[n + m:], 0.0)
    if artificial.sum() > options.primal_tol:
        violation = float((artificial / row_scale).max())
        logger.debug("Phase one ended infeasible, largest row violation %.3e", violation)
        x = solver.values[:n].copy()
        return SimplexResult(
            status=INFEASIBLE,
            x=x,
            objective=float(c @ x),
            row_activity=A @ x,
            row_duals=np.zeros(m),
            dual_objective=float("nan"),
            min_infeasibility=violation,
            iterations=solver.iterations,
        )

    solver.hi[n + m:] = 0.0
    solver.values[n + m:] = 0.0
    solver.refactor()
    phase_two_cost = np.concatenate([cost, np.zeros(2 * m)])
    solver.run(phase_two_cost)
    solver.refactor()

    x = np.clip(solver.values[:n], lower, upper)
    duals, reduced = solver.reduced_costs(phase_two_cost)
    finite_lo = np.where(np.isfinite(solver.lo), solver.lo, 0.0)
    finite_hi = np.where(np.isfinite(solver.hi), solver.hi, 0.0)
    dual_bound = np.sum(np.where(reduced >= 0, reduced * finite_lo, reduced * finite_hi))
    logger.debug("Simplex finished in %d iterations", solver.iterations)
    return SimplexResult(
        status=OPTIMAL,
        x=x,
        objective=float(c @ x),
        row_activity=A @ x,
        row_duals=sign * duals * row_scale / cost_scale,
        dual_objective=float(sign * dual_bound / cost_scale),
        min_infeasibility=0.0,
        iterations=solver.iterations,
    )
