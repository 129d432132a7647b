"""Budget-coupled allocations and constrained-minimizer solvers.

The feasible set is the hyperplane ``sum(x) == budget``.  Two solvers
compute the constrained minimizer of a separable roster of costs: a
closed form valid for quadratic rosters and a dual bisection valid for
any certified smooth strongly convex roster.  They are kept independent
on purpose (each is the cross-check of the other).

Sign convention: ``MinimizerResult.multiplier`` stores the common
stationary gradient value ``g = f_i'(x*_i)``, identical across agents
at the constrained optimum.  For quadratic rosters
``g = 2 * (budget - sum(mu)) / sum(1/theta)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FeasibilityError",
    "NonConvergenceError",
    "Allocation",
    "MinimizerResult",
    "minimizer_ball_radius",
    "check_in_ball",
    "closed_form_quadratic_minimizer",
    "dual_bisection_minimizer",
]

#: absolute slack allowed between sum(values) and the budget
FEASIBILITY_TOL = 1e-9


class FeasibilityError(ValueError):
    """An allocation does not satisfy its budget constraint."""


class NonConvergenceError(RuntimeError):
    """An iterative solver failed to close its bracket."""


@dataclass(frozen=True)
class Allocation:
    """Point on the budget hyperplane.

    Parameters
    ----------
    values : array_like, shape (n,)
        Per-agent estimates.
    budget : float
        Required value of ``sum(values)`` up to ``FEASIBILITY_TOL``.
    """

    values: np.ndarray
    budget: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise FeasibilityError("values must be a 1-D array with n >= 1")
        gap = abs(float(np.sum(v)) - self.budget)
        if not (gap <= FEASIBILITY_TOL):
            raise FeasibilityError(
                f"sum(values) misses budget by {gap:.3e} (> {FEASIBILITY_TOL:.0e})"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    @classmethod
    def uniform(cls, n, budget):
        """Equal split ``budget / n`` per agent."""
        return cls(np.full(n, budget / n), float(budget))


@dataclass(frozen=True)
class MinimizerResult:
    """Constrained minimizer plus its stationarity multiplier."""

    point: Allocation
    multiplier: float
    method: str = field(default="closed_form")


def minimizer_ball_radius(n, kappa, budget):
    """Radius of an origin-centred ball containing the constrained minimizer.

    Valid for any roster of certified costs with condition ratio at most
    ``kappa``, minimizers in ``[-1, 1]`` and the given budget.
    """
    n = int(n)
    if n < 1 or kappa < 1.0:
        raise ValueError("need n >= 1 and kappa >= 1")
    return math.sqrt(n) + (1.0 + abs(budget) / n) * math.sqrt(kappa * n)


def check_in_ball(x, radius):
    """True iff ``||x|| <= radius`` (boundary counts as inside)."""
    values = x.values if isinstance(x, Allocation) else np.asarray(x, dtype=np.float64)
    return bool(np.linalg.norm(values) <= radius)


def _roster_arrays(fs):
    try:
        theta = np.array([f.theta for f in fs], dtype=np.float64)
        mu = np.array([f.mu for f in fs], dtype=np.float64)
    except AttributeError as exc:
        raise TypeError("closed form needs a quadratic roster") from exc
    return theta, mu


def closed_form_quadratic_minimizer(fs, budget):
    """Constrained minimizer of a quadratic roster, in closed form.

    Solves ``min sum_i theta_i (x_i - mu_i)^2  s.t.  sum_i x_i = budget``
    via the stationarity system: every coordinate satisfies
    ``x_i = mu_i + t / theta_i`` with ``t = (budget - sum(mu)) / sum(1/theta)``.

    Parameters
    ----------
    fs : sequence of QuadraticFunction
    budget : float

    Returns
    -------
    MinimizerResult
    """
    budget = float(budget)
    if len(fs) == 1:
        # constraint pins the single coordinate exactly
        point = Allocation(np.array([budget]), budget)
        return MinimizerResult(point, float(fs[0].gradient(budget)), "closed_form")
    theta, mu = _roster_arrays(fs)
    inv = 1.0 / theta
    t = (budget - mu.sum()) / inv.sum()
    x = mu + t * inv
    return MinimizerResult(Allocation(x, budget), 2.0 * t, "closed_form")


def _inverse_gradient(f, nu, tol, max_iterations=200):
    """Solve ``f.gradient(z) == nu`` for z, to ``|gradient - nu| <= tol``.

    The curvature certificate brackets the root around the minimizer:
    ``z - minimizer`` lies between ``nu/beta`` and ``nu/alpha``.  Inside
    that bracket a safeguarded secant iteration does the work (exact in
    two steps for quadratics); every third step bisects so the bracket
    provably shrinks.
    """
    cert = f.certificate
    x0 = f.minimizer
    if nu >= 0.0:
        lo, hi = x0 + nu / cert.beta, x0 + nu / cert.alpha
    else:
        lo, hi = x0 + nu / cert.alpha, x0 + nu / cert.beta
    if lo >= hi:
        return x0 + nu / cert.beta
    z_prev = g_prev = None
    z = 0.5 * (lo + hi)
    for it in range(max_iterations):
        g = f.gradient(z) - nu
        if abs(g) <= tol:
            return z
        if g > 0.0:
            hi = z
        else:
            lo = z
        step = None
        if g_prev is not None and g != g_prev and it % 3 != 2:
            step = z - g * (z - z_prev) / (g - g_prev)
        z_prev, g_prev = z, g
        if step is None or not (lo < step < hi):
            step = 0.5 * (lo + hi)
        z = step
    raise NonConvergenceError(
        f"inverse gradient stalled at residual {f.gradient(z) - nu:.3e}"
    )


def dual_bisection_minimizer(fs, budget, tol=FEASIBILITY_TOL, max_iterations=200):
    """Constrained minimizer via bisection on the stationary gradient value.

    Works for any certified roster.  Searches the scalar ``nu`` with
    ``sum_i (f_i')^{-1}(nu) == budget``; the sum is nondecreasing in
    ``nu``, and the localization ball bounds the initial bracket.

    Parameters
    ----------
    fs : sequence of CostFunction
    budget : float
    tol : float
        Feasibility target ``|sum(x) - budget| <= tol``.
    max_iterations : int
        Bisection budget before :class:`NonConvergenceError`.

    Returns
    -------
    MinimizerResult
    """
    budget = float(budget)
    n = len(fs)
    if n == 1:
        point = Allocation(np.array([budget]), budget)
        return MinimizerResult(point, float(fs[0].gradient(budget)), "dual_bisection")

    kappa = max(f.certificate.kappa for f in fs)
    alpha_min = min(f.certificate.alpha for f in fs)
    radius = minimizer_ball_radius(n, kappa, budget)
    lo = min(f.gradient(-radius) for f in fs)
    hi = max(f.gradient(radius) for f in fs)

    # per-coordinate gradient residual small enough that n of them
    # cannot spend the feasibility budget
    inner_tol = 0.1 * tol * alpha_min / n

    def primal_sum(nu):
        return math.fsum(_inverse_gradient(f, nu, inner_tol) for f in fs)

    # the multiplier bracket must be tight enough for coordinatewise
    # agreement, not just feasibility of the sum
    width_target = 0.1 * tol * alpha_min

    nu = 0.5 * (lo + hi)
    for _ in range(max_iterations):
        nu = 0.5 * (lo + hi)
        total = primal_sum(nu)
        if abs(total - budget) <= 0.5 * tol and hi - lo <= width_target:
            break
        if total > budget:
            hi = nu
        else:
            lo = nu
    else:
        raise NonConvergenceError(
            f"dual bracket still [{lo}, {hi}] after {max_iterations} bisections"
        )

    x = np.array([_inverse_gradient(f, nu, inner_tol) for f in fs])
    return MinimizerResult(Allocation(x, budget), float(nu), "dual_bisection")
