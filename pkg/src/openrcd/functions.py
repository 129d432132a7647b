"""Scalar cost-function families with certified curvature intervals.

Every cost in this package is a one-dimensional function ``f`` that is
``alpha``-strongly convex and ``beta``-smooth, attains value zero at an
unconstrained minimizer inside ``[-1, 1]``, and carries its curvature
certificate ``(alpha, beta)`` explicitly.  Two concrete families ship:
quadratics (the workhorse for every statistic) and a quadratic plus a
log-cosh perturbation whose curvature interval is known analytically,
used to exercise the general-function code paths.

Replacement sampling draws new costs with uniform parameters; the
quantile helpers are shared with the vectorized simulator so that
scalar and batched draws produce bit-identical parameters from the
same uniform variates.
"""

import math
import sys
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParameterRangeError",
    "ConvexityCertificate",
    "CostFunction",
    "QuadraticFunction",
    "LogCoshQuadratic",
    "GeneralSmoothFunction",
    "make_quadratic",
    "make_logcosh_quadratic",
    "quadratic_quantiles",
    "logcosh_quantiles",
    "sample_replacement",
    "sample_logcosh_replacement",
    "CertificationResult",
    "certify",
]


class ParameterRangeError(ValueError):
    """A function parameter violates its certificate or domain box."""


@dataclass(frozen=True)
class ConvexityCertificate:
    """Curvature interval of a cost function.

    Parameters
    ----------
    alpha : float
        Strong-convexity modulus, positive.
    beta : float
        Smoothness modulus, ``beta >= alpha``.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= self.beta) or not math.isfinite(self.beta):
            raise ParameterRangeError(
                f"need 0 < alpha <= beta < inf, got ({self.alpha}, {self.beta})"
            )

    @property
    def kappa(self):
        """Condition ratio ``beta / alpha`` (always >= 1)."""
        return self.beta / self.alpha


class CostFunction:
    """Interface shared by all cost families.

    Concrete costs expose ``value(x)``, ``gradient(x)``, a
    ``certificate`` and the location ``minimizer`` of their
    unconstrained minimum (where the value is zero).
    """

    __slots__ = ()

    certificate: ConvexityCertificate

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    @property
    def minimizer(self):
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class QuadraticFunction(CostFunction):
    """Cost ``theta * (x - mu)**2`` with ``theta`` inside the certificate box.

    Parameters
    ----------
    theta : float
        Curvature weight; must lie in ``[alpha/2, beta/2]`` so that the
        second derivative ``2*theta`` stays inside the certificate.
    mu : float
        Minimizer location in ``[-1, 1]``.
    certificate : ConvexityCertificate
    """

    theta: float
    mu: float
    certificate: ConvexityCertificate

    def __post_init__(self):
        c = self.certificate
        if not (0.5 * c.alpha <= self.theta <= 0.5 * c.beta):
            raise ParameterRangeError(
                f"theta={self.theta} outside [{0.5 * c.alpha}, {0.5 * c.beta}]"
            )
        if not (-1.0 <= self.mu <= 1.0):
            raise ParameterRangeError(f"mu={self.mu} outside [-1, 1]")

    def value(self, x):
        d = x - self.mu
        return self.theta * d * d

    def gradient(self, x):
        return 2.0 * self.theta * (x - self.mu)

    @property
    def minimizer(self):
        return self.mu


def _logcosh(z):
    # log(cosh(z)) without overflow for large |z|
    az = abs(z)
    return az + math.log1p(math.exp(-2.0 * az)) - math.log(2.0)


@dataclass(frozen=True, slots=True)
class LogCoshQuadratic(CostFunction):
    """Cost ``theta*(x-mu)**2 + weight*logcosh(x-mu)``.

    The second derivative is ``2*theta + weight*sech(x-mu)**2``, which
    sweeps the interval ``(2*theta, 2*theta + weight]``; the certificate
    must contain it, i.e. ``2*theta >= alpha`` and
    ``2*theta + weight <= beta``.
    """

    theta: float
    mu: float
    weight: float
    certificate: ConvexityCertificate

    def __post_init__(self):
        c = self.certificate
        if self.weight < 0.0:
            raise ParameterRangeError(f"weight={self.weight} must be >= 0")
        # a couple of ulps of slack: the default weight beta - 2*theta
        # must never round itself out of the certificate
        ulps = 8.0 * sys.float_info.epsilon * max(1.0, c.beta)
        if 2.0 * self.theta < c.alpha - ulps or 2.0 * self.theta + self.weight > c.beta + ulps:
            raise ParameterRangeError(
                "curvature range (%g, %g] escapes certificate [%g, %g]"
                % (2.0 * self.theta, 2.0 * self.theta + self.weight, c.alpha, c.beta)
            )
        if not (-1.0 <= self.mu <= 1.0):
            raise ParameterRangeError(f"mu={self.mu} outside [-1, 1]")

    def value(self, x):
        d = x - self.mu
        return self.theta * d * d + self.weight * _logcosh(d)

    def gradient(self, x):
        d = x - self.mu
        return 2.0 * self.theta * d + self.weight * math.tanh(d)

    @property
    def minimizer(self):
        return self.mu


class GeneralSmoothFunction(CostFunction):
    """Cost built from caller-supplied callables.

    The minimizer identities (zero value and zero gradient at the
    declared minimizer, minimizer inside ``[-1, 1]``) are checked at
    construction to 1e-12; the curvature claim itself is only sampled,
    via :func:`certify`.
    """

    __slots__ = ("_value", "_gradient", "certificate", "_minimizer")

    def __init__(self, value, gradient, certificate, minimizer):
        if not (-1.0 <= minimizer <= 1.0):
            raise ParameterRangeError(f"minimizer={minimizer} outside [-1, 1]")
        if abs(value(minimizer)) > 1e-12:
            raise ParameterRangeError("value at the declared minimizer is not 0")
        if abs(gradient(minimizer)) > 1e-12:
            raise ParameterRangeError("gradient at the declared minimizer is not 0")
        self._value = value
        self._gradient = gradient
        self.certificate = certificate
        self._minimizer = minimizer

    def value(self, x):
        return self._value(x)

    def gradient(self, x):
        return self._gradient(x)

    @property
    def minimizer(self):
        return self._minimizer


def make_quadratic(theta, mu, certificate):
    """Build a :class:`QuadraticFunction`, validating parameter ranges."""
    return QuadraticFunction(float(theta), float(mu), certificate)


def make_logcosh_quadratic(theta, mu, certificate, weight=None):
    """Build a :class:`LogCoshQuadratic`.

    When ``weight`` is omitted it defaults to ``beta - 2*theta``, the
    largest perturbation the certificate admits.
    """
    theta = float(theta)
    if weight is None:
        weight = certificate.beta - 2.0 * theta
    return LogCoshQuadratic(theta, float(mu), float(weight), certificate)


def quadratic_quantiles(certificate, u_theta, u_mu):
    """Map uniform variates in ``[0, 1)`` to quadratic parameters.

    ``theta`` is uniform on ``[alpha/2, beta/2]`` and ``mu`` uniform on
    ``[-1, 1]``.  Works elementwise on scalars or arrays; the simulator
    relies on the arithmetic here being identical in both cases.
    """
    half_lo = 0.5 * certificate.alpha
    half_hi = 0.5 * certificate.beta
    theta = half_lo + (half_hi - half_lo) * u_theta
    # rounding in the affine map may poke past the top of the box
    theta = np.minimum(theta, half_hi)
    mu = 2.0 * u_mu - 1.0
    return theta, mu


def logcosh_quantiles(certificate, u_theta, u_mu):
    """Uniform variates to log-cosh parameters ``(theta, mu, weight)``.

    ``theta`` is uniform on ``[alpha/2, beta/2]`` and the perturbation
    weight is tied to it as ``beta - 2*theta`` so the certificate stays
    analytically exact.
    """
    theta, mu = quadratic_quantiles(certificate, u_theta, u_mu)
    weight = np.maximum(certificate.beta - 2.0 * theta, 0.0)
    return theta, mu, weight


def sample_replacement(rng, certificate):
    """Draw a fresh quadratic cost from the replacement distribution.

    Consumes exactly two uniforms from ``rng`` (theta quantile, then mu
    quantile).

    Parameters
    ----------
    rng : numpy.random.Generator
    certificate : ConvexityCertificate

    Returns
    -------
    QuadraticFunction
    """
    u = rng.random(2)
    theta, mu = quadratic_quantiles(certificate, u[0], u[1])
    return QuadraticFunction(float(theta), float(mu), certificate)


def sample_logcosh_replacement(rng, certificate):
    """Draw a fresh log-cosh cost; same two-uniform budget as the quadratic."""
    u = rng.random(2)
    theta, mu, weight = logcosh_quantiles(certificate, u[0], u[1])
    return LogCoshQuadratic(float(theta), float(mu), float(weight), certificate)


@dataclass(frozen=True)
class CertificationResult:
    """Outcome of a sampled curvature check; truthy iff it passed."""

    passed: bool
    witness: tuple | None = None  # (x, y, slope) for the first failing pair

    def __bool__(self):
        return self.passed


def certify(f, sample_count, rng, certificate=None, radius=None):
    """Check a curvature certificate on sampled secant slopes.

    Draws ``sample_count`` point pairs ``(x, y)`` and verifies
    ``alpha <= (gradient(x) - gradient(y)) / (x - y) <= beta`` for each,
    up to a relative slack of 1e-9.  Sampling covers ``[-radius, radius]``;
    the default radius is the single-agent zero-budget localization ball
    ``1 + sqrt(kappa)``.

    Parameters
    ----------
    f : CostFunction
    sample_count : int
    rng : numpy.random.Generator
    certificate : ConvexityCertificate, optional
        Claim to check; defaults to ``f.certificate``.
    radius : float, optional

    Returns
    -------
    CertificationResult
        Truthy on success; carries the first failing ``(x, y, slope)``
        triple otherwise.
    """
    cert = f.certificate if certificate is None else certificate
    if radius is None:
        radius = 1.0 + math.sqrt(cert.kappa)
    slack = 1e-9 * max(1.0, cert.beta)
    pairs = rng.uniform(-radius, radius, size=(int(sample_count), 2))
    for x, y in pairs:
        if abs(x - y) < 1e-9:
            continue
        slope = (f.gradient(x) - f.gradient(y)) / (x - y)
        if slope < cert.alpha - slack or slope > cert.beta + slack:
            return CertificationResult(False, (float(x), float(y), float(slope)))
    return CertificationResult(True, None)
