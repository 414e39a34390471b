"""
Odd Jacobi theta function f and the higher order theta utilities built on it.

f(λ) = sinh(λ) + Σ_{n≥1} (-1)^n q^{n(n+1)} sinh((2n+1)λ) with q = exp(iπτ). It is odd, entire and doubly
quasiperiodic:

    f(λ + iπ) = -f(λ)            f(λ + iπτ) = -exp(-2λ - iπτ) f(λ)

A context without τ is the trigonometric degeneration q = 0 where f is sinh.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from elliptic_sos.exceptions import DegenerateNodes, DegenerateParameter, InvalidContext, NonConvergence

logger = logging.getLogger('elliptic_sos.lattice.theta')

DEFAULT_SERIES_TOL = 1e-16
DEFAULT_MAX_TERMS = 64
DEFAULT_GUARD = 1e-12
MINIMUM_MAX_TERMS = 8
# The Pochhammer product converges like q^{2n}, much slower than the q^{n(n+1)} series.
POCHHAMMER_MAX_FACTORS = 4096

# Fixed evaluation grid for quasiperiodicity classification, kept away from the real and imaginary axes.
CLASSIFY_GRID = (
    0.113 + 0.071j,
    0.271 - 0.163j,
    -0.342 + 0.224j,
    0.057 - 0.291j,
    0.418 + 0.133j,
    -0.186 - 0.097j,
    0.331 + 0.287j,
    -0.054 + 0.149j,
    0.209 - 0.043j,
    -0.397 - 0.241j,
    0.462 - 0.208j,
    -0.128 + 0.306j,
)


@dataclass(frozen=True)
class EllipticContext:
    """
    Modular parameter plus the truncation policy of the theta series.

    tau=None selects the trigonometric degeneration (q = 0, f = sinh).
    """

    tau: Optional[complex] = None
    series_tol: float = DEFAULT_SERIES_TOL
    max_terms: int = DEFAULT_MAX_TERMS
    guard: float = DEFAULT_GUARD

    def __post_init__(self):
        if self.tau is not None:
            object.__setattr__(self, 'tau', complex(self.tau))
            if self.tau.imag <= 0:
                raise InvalidContext(f"Im(tau) must be positive, got tau={self.tau}")
        if not self.series_tol > 0:
            raise InvalidContext(f"series_tol must be positive, got {self.series_tol}")
        if int(self.max_terms) < MINIMUM_MAX_TERMS:
            raise InvalidContext(f"max_terms must be at least {MINIMUM_MAX_TERMS}, got {self.max_terms}")
        if not self.guard > 0:
            raise InvalidContext(f"guard must be positive, got {self.guard}")

    @property
    def trigonometric(self) -> bool:
        return self.tau is None

    @cached_property
    def q(self) -> complex:
        if self.trigonometric:
            return 0j
        return complex(np.exp(1j * np.pi * self.tau))

    @cached_property
    def fprime0(self) -> complex:
        return f_prime_zero(self)

    @property
    def guard_threshold(self) -> float:
        return self.guard * abs(self.fprime0)

    def describe(self) -> str:
        if self.trigonometric:
            return 'trigonometric'
        return f'tau={self.tau}'


def _reduction_shifts(ctx: EllipticContext, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # λ/(iπ) = a + bτ; n = nearest b, then m = nearest a of what is left
    w = -1j * lam / np.pi
    n = np.rint(w.imag / ctx.tau.imag)
    w = w - n * ctx.tau
    a = w.real - (w.imag / ctx.tau.imag) * ctx.tau.real
    m = np.rint(a)
    return m, n


def _reduce(ctx: EllipticContext, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    m, n = _reduction_shifts(ctx, lam)
    lam_red = lam - 1j * np.pi * (m + n * ctx.tau)
    sign = np.where(np.mod(m + n, 2) == 0, 1.0, -1.0)
    multiplier = sign * np.exp(-2 * n * lam_red - 1j * np.pi * ctx.tau * n * n)
    return lam_red, multiplier


def reduce_argument(ctx: EllipticContext, lam: complex) -> Tuple[complex, complex]:
    """
    Move λ into the fundamental cell around 0 and return (λ_red, multiplier) with f(λ) = multiplier·f(λ_red).
    """
    if ctx.trigonometric:
        raise InvalidContext("Argument reduction needs an elliptic context")
    lam_red, multiplier = _reduce(ctx, np.asarray(lam, dtype=complex))
    return complex(lam_red), complex(multiplier)


def theta_series(ctx: EllipticContext, lam) -> np.ndarray:
    """
    Sum the sinh form of the series until the newest term drops below series_tol relative to the partial sum.
    No argument reduction is done here.
    """
    x = np.asarray(lam, dtype=complex)
    total = np.sinh(x)
    for n in range(1, ctx.max_terms):
        coefficient = (-1) ** n * np.exp(1j * np.pi * ctx.tau * n * (n + 1))
        term = coefficient * np.sinh((2 * n + 1) * x)
        total = total + term
        if np.all(np.abs(term) <= ctx.series_tol * np.abs(total)):
            logger.debug(f"Theta series converged after {n + 1} terms for {ctx.describe()}")
            return total
    raise NonConvergence('theta series', ctx.max_terms)


def eval_f(ctx: EllipticContext, lam):
    """
    Evaluate f at a scalar or elementwise on an array of arguments.
    Scalars come back as python complex, arrays as complex ndarrays.
    """
    x = np.asarray(lam, dtype=complex)
    if ctx.trigonometric:
        result = np.sinh(x)
    else:
        lam_red, multiplier = _reduce(ctx, x)
        result = multiplier * theta_series(ctx, lam_red)
    if result.ndim == 0:
        return complex(result)
    return result


def f_prime_zero(ctx: EllipticContext) -> complex:
    """f'(0) = (q²; q²)_∞³, which is 1 in the trigonometric case."""
    if ctx.trigonometric:
        return 1 + 0j
    q2 = ctx.q**2
    product = 1 + 0j
    power = 1 + 0j
    for n in range(1, POCHHAMMER_MAX_FACTORS + 1):
        power *= q2
        product *= 1 - power
        if abs(power) < ctx.series_tol:
            return product**3
    raise NonConvergence("q-Pochhammer product", POCHHAMMER_MAX_FACTORS)


def bracket(ctx: EllipticContext, lams: Sequence) -> complex:
    """
    [λ_1, ..., λ_k] = ∏ f(λ_k). The empty product is 1.
    Entries may also be equally shaped arrays, in which case the product is elementwise.
    """
    if len(lams) == 0:
        return 1 + 0j
    return reduce(lambda left, right: left * right, (eval_f(ctx, lam) for lam in lams))


def require_generic(ctx: EllipticContext, argument, name: str):
    """Evaluate f(argument) and refuse values on (or too near) the zero lattice."""
    value = eval_f(ctx, argument)
    if np.any(np.abs(value) < ctx.guard_threshold):
        raise DegenerateParameter(name, value if np.ndim(value) == 0 else np.min(np.abs(value)))
    return value


def lattice_distance(ctx: EllipticContext, x: complex) -> float:
    """Distance from x to the nearest point of the zero lattice of f."""
    x = complex(x)
    if ctx.trigonometric:
        return abs(x - 1j * np.pi * np.rint(x.imag / np.pi))
    m, n = _reduction_shifts(ctx, np.asarray(x))
    distances = [abs(x - 1j * np.pi * ((m + dm) + (n + dn) * ctx.tau)) for dm in (-1, 0, 1) for dn in (-1, 0, 1)]
    return float(min(distances))


def addition_rule_residual(ctx: EllipticContext, lam1, lam2, lam3, lam4) -> float:
    """
    Residual of [λ1+λ2, λ1-λ2, λ3+λ4, λ3-λ4] = [λ1+λ3, λ1-λ3, λ2+λ4, λ2-λ4] - [λ1+λ4, λ1-λ4, λ2+λ3, λ2-λ3].
    """
    left = bracket(ctx, [lam1 + lam2, lam1 - lam2, lam3 + lam4, lam3 - lam4])
    first = bracket(ctx, [lam1 + lam3, lam1 - lam3, lam2 + lam4, lam2 - lam4])
    second = bracket(ctx, [lam1 + lam4, lam1 - lam4, lam2 + lam3, lam2 - lam3])
    scale = max(abs(left), abs(first), abs(second))
    if scale == 0:
        return 0.0
    return abs(left - first + second) / scale


def classify_order_norm(
    ctx: EllipticContext,
    function: Callable[[complex], complex],
    order: int,
    norm: complex,
    grid: Optional[Sequence[complex]] = None,
) -> Tuple[float, float]:
    """
    Check that `function` transforms like a theta function of the given order and norm:

        F(λ + iπ) = (-1)^N F(λ)        F(λ + iπτ) = e^{-2t} (-e^{-2λ} e^{-iπτ})^N F(λ)

    Each residual is the worst difference over the grid, normalized by the largest of |F(λ + shift)| and
    |factor·F(λ)|. For a trigonometric context there is no second period; the second residual is then the
    Fourier content of F(iφ) outside the degree window, see trig_degree_residual.
    """
    if grid is None:
        grid = CLASSIFY_GRID
    points = [complex(lam) for lam in grid]
    values = [complex(function(lam)) for lam in points]

    def worst(shift, factor):
        differences, scale = [], 0.0
        for lam, value in zip(points, values):
            shifted = complex(function(lam + shift))
            expected = factor(lam) * value
            differences.append(abs(shifted - expected))
            scale = max(scale, abs(shifted), abs(expected))
        if scale == 0:
            return 0.0
        return max(differences) / scale

    residual_pi = worst(1j * np.pi, lambda lam: (-1) ** order)
    if ctx.trigonometric:
        return residual_pi, trig_degree_residual(function, order)
    residual_pi_tau = worst(
        1j * np.pi * ctx.tau,
        lambda lam: np.exp(-2 * norm) * (-np.exp(-2 * lam) * np.exp(-1j * np.pi * ctx.tau)) ** order,
    )
    return residual_pi, residual_pi_tau


def trig_degree_residual(function: Callable[[complex], complex], order: int, samples: Optional[int] = None) -> float:
    """
    Fraction of the Fourier content of φ ↦ F(iφ) lying outside the frequencies {-N, -N+2, ..., N}.
    A trigonometric polynomial of degree N (a polynomial in e^{2λ} times e^{-Nλ}) gives 0.
    """
    if samples is None:
        samples = 4 * order + 8
    phis = 2 * np.pi * np.arange(samples) / samples
    values = np.array([complex(function(1j * phi)) for phi in phis])
    coefficients = np.fft.fft(values) / samples
    allowed = np.zeros(samples, dtype=bool)
    for frequency in range(-order, order + 1, 2):
        allowed[frequency % samples] = True
    total = np.sum(np.abs(coefficients) ** 2)
    if total == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(coefficients[~allowed]) ** 2) / total))


def interpolate_theta(ctx: EllipticContext, order: int, norm: complex, nodes: Sequence[complex], values: Sequence[complex], lam: complex) -> complex:
    """
    Rebuild a theta function of order N and norm t from its values at N generic nodes:

        F(λ) = Σ_n F(λ_n) [λ - λ_n + t + Σλ_m] / [t + Σλ_m] ∏_{m≠n} [λ - λ_m] / [λ_n - λ_m]
    """
    if order < 2:
        raise ValueError(f"Interpolation needs order >= 2, got {order}")
    if len(nodes) != order or len(values) != order:
        raise ValueError(f"Expected {order} nodes and values, got {len(nodes)} and {len(values)}")
    threshold = ctx.guard_threshold
    shift = norm + sum(nodes)
    denominator = eval_f(ctx, shift)
    if abs(denominator) < threshold:
        raise DegenerateNodes('[t + sum of nodes]', denominator)
    total = 0j
    for n, (node, value) in enumerate(zip(nodes, values)):
        term = value * eval_f(ctx, lam - node + shift) / denominator
        for m, other in enumerate(nodes):
            if m == n:
                continue
            difference = eval_f(ctx, node - other)
            if abs(difference) < threshold:
                raise DegenerateNodes(f'[node_{n + 1} - node_{m + 1}]', difference)
            term *= eval_f(ctx, lam - other) / difference
        total += term
    return total


@dataclass(frozen=True)
class HigherOrderTheta:
    """Ω·∏_n f(λ + t_n), a theta function of order N = len(zeros) and norm t = Σ t_n."""

    prefactor: complex
    zeros: Tuple[complex, ...]
    norm: complex = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, 'zeros', tuple(complex(t) for t in self.zeros))
        total = sum(self.zeros, 0j)
        if self.norm is None:
            object.__setattr__(self, 'norm', total)
        elif abs(total - self.norm) > 1e-12 * max(1.0, abs(self.norm)):
            raise ValueError(f"Zeros sum to {total}, which is not the norm {self.norm}")

    @property
    def order(self) -> int:
        return len(self.zeros)

    def evaluate(self, ctx: EllipticContext, lam):
        return self.prefactor * bracket(ctx, [lam + t for t in self.zeros])
