"""Bessel functions and the quadrature engines behind the radial integrals.

Integrals are composite Gauss-Legendre sums on uniform panels. Each result
is checked by doubling the node count; a rule that has not settled after
two doublings still returns its best value, with a warning attached.
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from spinmeter.errors import ConfigurationError, DomainError, NumericalError

log = logging.getLogger("spinmeter.core.specfun")

DEFAULT_TOLERANCE = 1e-9
DEFAULT_ORDER = 16
MIN_NODES = 64
MAX_REFINEMENTS = 2
# Gaussian damping e^{-k^2 w^2 / 4} is below 2e-16 past K = 12/w
TRUNCATION_WIDTHS = 12.0

Integrand = Callable[[np.ndarray], np.ndarray]


# ───── Bessel functions ─────


def bessel_j(order: int, z):
    """J_0 or J_1 for real z >= 0; scalar in, scalar out."""
    if order not in (0, 1):
        raise DomainError(f"Bessel order must be 0 or 1, got {order!r}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or not np.all(np.isfinite(z)):
        raise DomainError("Bessel argument must be finite and non-negative")
    values = special.j0(z) if order == 0 else special.j1(z)
    return float(values) if values.ndim == 0 else values


# ───── Quadrature specs and results ─────


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite rule on [0, cutoff] (or [-cutoff, cutoff])."""

    nodes: int
    cutoff: float
    tolerance: float = DEFAULT_TOLERANCE
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if self.nodes < MIN_NODES:
            raise ConfigurationError(f"quadrature needs at least {MIN_NODES} nodes")
        if self.nodes % self.order:
            raise ConfigurationError("quadrature nodes must be a multiple of the panel order")
        if not (math.isfinite(self.cutoff) and self.cutoff > 0):
            raise ConfigurationError("quadrature cutoff must be finite and positive")
        if self.tolerance <= 0:
            raise ConfigurationError("quadrature tolerance must be positive")

    @property
    def panels(self) -> int:
        return self.nodes // self.order

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.nodes, self.cutoff, self.tolerance, self.order)

    @classmethod
    def for_interval(cls, cutoff: float, panel_width: float,
                     tolerance: float = DEFAULT_TOLERANCE,
                     order: int = DEFAULT_ORDER) -> "QuadratureSpec":
        """Enough panels on [0, cutoff] that none is wider than panel_width."""
        panels = max(math.ceil(cutoff / panel_width), MIN_NODES // order)
        return cls(panels * order, cutoff, tolerance, order)

    @classmethod
    def for_gaussian(cls, w: float, frequency: float = 0.0, scale: float | None = None,
                     tolerance: float = DEFAULT_TOLERANCE) -> "QuadratureSpec":
        """Rule for integrands damped by e^{-k^2 w^2/4}.

        ``frequency`` is the largest oscillation rate of the integrand in k;
        ``scale`` the narrowest non-oscillatory feature. Panels span at
        most half a period and half a feature.
        """
        cutoff = TRUNCATION_WIDTHS / w
        width = 1.0 / w
        if frequency > 0:
            width = min(width, math.pi / frequency)
        if scale is not None and scale > 0:
            width = min(width, scale / 2)
        return cls.for_interval(cutoff, width, tolerance)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    nodes: int
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def converged(self) -> bool:
        return not self.warnings


# --- Internal ---


@functools.lru_cache(maxsize=8)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _rule(a: float, b: float, nodes: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, wts = _legendre(order)
    edges = np.linspace(a, b, nodes // order + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    points = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * wts[None, :]).ravel()
    return points, weights


def _sample(f: Integrand, points: np.ndarray) -> np.ndarray:
    values = np.broadcast_to(np.asarray(f(points)), points.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        node = float(points[np.argmax(bad)])
        raise NumericalError(f"non-finite integrand at node {node!r}", node=node)
    return values


def _integrate(f: Integrand, a: float, b: float, spec: QuadratureSpec) -> QuadratureResult:
    points, weights = _rule(a, b, spec.nodes, spec.order)
    value = np.dot(weights, _sample(f, points))
    nodes = spec.nodes
    error = math.inf
    for _ in range(MAX_REFINEMENTS):
        nodes *= 2
        points, weights = _rule(a, b, nodes, spec.order)
        finer = np.dot(weights, _sample(f, points))
        error = float(abs(finer - value))
        value = finer
        if error < spec.tolerance:
            return QuadratureResult(complex(value), error, nodes)

    msg = (f"quadrature did not converge on [{a:.6g}, {b:.6g}]: "
           f"change {error:.3g} after {nodes} nodes (target {spec.tolerance:.1g})")
    log.warning(msg)
    return QuadratureResult(complex(value), error, nodes, (msg,))


# --- Public API ---


def gaussian_weighted_integral(f: Integrand, w: float,
                               spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Integral of f(q) e^{-q^2 w^2/4} over the real line, truncated at |q| = 12/w."""
    if not (math.isfinite(w) and w > 0):
        raise ConfigurationError("w must be positive")
    spec = spec or QuadratureSpec.for_gaussian(w)
    K = spec.cutoff
    # the symmetric interval gets twice the nodes of [0, K]
    sym = QuadratureSpec(2 * spec.nodes, K, spec.tolerance, spec.order)
    return _integrate(lambda q: f(q) * np.exp(-q * q * w * w / 4.0), -K, K, sym)


def damped_oscillatory_integral(f: Integrand, spec: QuadratureSpec,
                                symmetric: bool = False) -> QuadratureResult:
    """Integral of an already-damped integrand over [0, K] or [-K, K]."""
    if symmetric:
        sym = QuadratureSpec(2 * spec.nodes, spec.cutoff, spec.tolerance, spec.order)
        return _integrate(f, -spec.cutoff, spec.cutoff, sym)
    return _integrate(f, 0.0, spec.cutoff, spec)


def quadrature_rule(spec: QuadratureSpec, symmetric: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the accepted rule, for callers that batch many integrands."""
    a = -spec.cutoff if symmetric else 0.0
    nodes = 2 * spec.nodes if symmetric else spec.nodes
    return _rule(a, spec.cutoff, nodes, spec.order)
