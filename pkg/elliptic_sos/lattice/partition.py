"""
The partition function with domain walls and one reflecting end, Z(λ_1..λ_L) = ⟨0̄| ℬ(λ_1)···ℬ(λ_L) |0⟩,
evaluated by three independent routes:

    algebraic      the operator product on W = V^{⊗L}
    symmetrized    Ω_L Σ_σ ∏_l [γ][2λ_σ(l)]/[2λ_σ(l)+γ] m_l(λ_σ(1..l)) ∏_{i<j} [λ_σ(i)-μ_j, λ_σ(i)+μ_j+γ]
    contour        the same sum as an L-fold contour integral, discretized with the trapezoid rule
"""

import logging
import time
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from elliptic_sos.exceptions import ContourTooLarge, DegenerateNodes, RouteDisagreement
from elliptic_sos.lattice.algebra import ModelInstance, apply_b, b_crossing_factor
from elliptic_sos.lattice.theta import eval_f, lattice_distance
from elliptic_sos.utils.summation import KahanSum

logger = logging.getLogger('elliptic_sos.lattice.partition')

DEFAULT_MAX_L = 8
DEFAULT_CONTOUR_MAX_L = 3
DEFAULT_CONTOUR_NODES = 128
DEFAULT_RADIUS_FRACTION = 0.05
CONTOUR_TOLERANCE = 1e-6

MAIN = 'MAIN'
ALT = 'ALT'
COEFFICIENT = 'COEFFICIENT'
SYMMETRIZED_VARIANTS = (MAIN, ALT, COEFFICIENT)

ALGEBRAIC_ROUTE = 'a'
SYMMETRIZED_ROUTE = 's'
CONTOUR_ROUTE = 'c'
ROUTES = {
    ALGEBRAIC_ROUTE: ('algebraic',),
    SYMMETRIZED_ROUTE: ('symmetrized', 'symmetrized_alt'),
    CONTOUR_ROUTE: ('contour',),
}


def _check_length(model: ModelInstance, point: Sequence[complex], max_l: int = DEFAULT_MAX_L) -> Tuple[complex, ...]:
    point = tuple(complex(lam) for lam in point)
    if len(point) != model.L:
        raise ValueError(f"Expected {model.L} spectral parameters, got {len(point)}")
    if model.L > max_l:
        raise ValueError(f"Dense routes are limited to L <= {max_l}, got L={model.L}")
    return point


def check_point(model: ModelInstance, point: Sequence[complex], strict: bool = False) -> Tuple[complex, ...]:
    """
    Refuse spectral points where a route divides by a vanishing bracket: [θ+ζ+λ_i], [2λ_i+γ], [λ_i-λ_j] and
    [λ_i+λ_j+γ]. strict additionally refuses [2λ_i], [λ_i-μ_j] and [λ_i+μ_j+γ], which are zeros rather than poles.
    """
    point = tuple(complex(lam) for lam in point)
    if len(point) != model.L:
        raise ValueError(f"Expected {model.L} spectral parameters, got {len(point)}")
    gamma = model.gamma
    for i, lam in enumerate(point, start=1):
        model.require(model.theta + model.zeta + lam, f'[theta+zeta+lambda_{i}]')
        model.require(2 * lam + gamma, f'[2*lambda_{i}+gamma]')
        if strict:
            model.require(2 * lam, f'[2*lambda_{i}]')
            for j, mu in enumerate(model.mu, start=1):
                model.require(lam - mu, f'[lambda_{i}-mu_{j}]')
                model.require(lam + mu + gamma, f'[lambda_{i}+mu_{j}+gamma]')
    for (i, first), (j, second) in combinations(enumerate(point, start=1), 2):
        model.require(first - second, f'[lambda_{i}-lambda_{j}]')
        model.require(first + second + gamma, f'[lambda_{i}+lambda_{j}+gamma]')
    return point


def z_algebraic(model: ModelInstance, point: Sequence[complex], max_l: int = DEFAULT_MAX_L) -> complex:
    """⟨0̄| ℬ(λ_1)···ℬ(λ_L) |0⟩, applying ℬ(λ_L) to the vacuum first."""
    point = _check_length(model, point, max_l)
    for i, lam in enumerate(point, start=1):
        model.require(model.theta + model.zeta + lam, f'[theta+zeta+lambda_{i}]')
    state = np.zeros(2**model.L, dtype=complex)
    state[0] = 1
    for lam in reversed(point):
        state = apply_b(model, lam, state)
    return complex(state[-1])


def z_bar(model: ModelInstance, point: Sequence[complex], max_l: int = DEFAULT_MAX_L) -> complex:
    """Z(λ)·∏_j [θ+ζ+λ_j], built from [θ+ζ+λ]ℬ(λ) so it stays finite at λ_j = -θ-ζ."""
    point = _check_length(model, point, max_l)
    state = np.zeros(2**model.L, dtype=complex)
    state[0] = 1
    for lam in reversed(point):
        state = apply_b(model, lam, state, normalized=True)
    return complex(state[-1])


def crossing_factor(model: ModelInstance, lam: complex) -> complex:
    """Z(..., -λ-γ, ...) / Z(..., λ, ...) for a single variable."""
    return b_crossing_factor(model, complex(lam))


def m_l(model: ModelInstance, l: int, z: Sequence, mu: Optional[Sequence[complex]] = None, check: bool = True):
    """
    The two-term function m_l(z_1..z_l) built from the first l entries of `mu` (model.mu by default). Entries of z
    may be arrays of equal shape; check=False skips the genericity guards for such evaluations.
    """
    if len(z) != l:
        raise ValueError(f"m_{l} takes {l} arguments, got {len(z)}")
    mu = model.mu if mu is None else tuple(complex(m) for m in mu)
    if len(mu) < l:
        raise ValueError(f"m_{l} needs {l} inhomogeneities, got {len(mu)}")
    theta, zeta, gamma = model.theta, model.zeta, model.gamma
    last, mu_l = z[l - 1], mu[l - 1]

    def f(argument):
        return eval_f(model.ctx, argument)

    if check:
        model.require(theta + zeta + last, f'[theta+zeta+z_{l}]')
        for j in range(l - 1):
            model.require(z[j] - last, f'[z_{j + 1}-z_{l}]')
            model.require(z[j] + last + gamma, f'[z_{j + 1}+z_{l}+gamma]')

    plus = f(last + mu_l + gamma)
    minus = f(last - mu_l)
    for zj, muj in zip(z[:l - 1], mu[:l - 1]):
        plus = plus * f(last - muj + gamma) * f(last + muj + gamma) * f(zj - last + gamma) * f(zj + last) / (f(zj - last) * f(zj + last + gamma))
        minus = minus * f(last - muj) * f(last + muj) * f(last - zj + gamma) * f(last + zj + 2 * gamma) / (f(last - zj) * f(last + zj + gamma))
    denominator = f(theta + zeta + last) * f(theta + (l - 1) * gamma)
    first = f(last + zeta) * f(theta + zeta - last) * f(theta + l * gamma + last - mu_l) / denominator * plus
    second = f(last - zeta + gamma) * f(theta + zeta + last + gamma) * f(theta + (l - 1) * gamma - last - mu_l) / denominator * minus
    return first - second


def omega_L(model: ModelInstance) -> complex:
    """Normalization of the symmetrized sum; independent of the spectral parameters."""
    theta, zeta, gamma, L = model.theta, model.zeta, model.gamma, model.L
    result = model.f(theta + (L + 1) * gamma) / model.f(theta + L * gamma)
    for mu in model.mu:
        result *= model.bracket(zeta - mu, theta + zeta + mu) / model.bracket(zeta + mu, theta + zeta - mu)
    for k in range(L // 2 + 1):
        result *= model.f(theta - (L - 2 * k) * gamma) / model.f(theta + (L - 2 * k + 1) * gamma)
    return result


def z_closed_l1(model: ModelInstance, lam: complex) -> complex:
    """Ω_1 [γ, ζ+μ_1][θ+ζ-μ_1, θ+γ][2λ] / [θ+ζ+λ, θ] for a single column."""
    if model.L != 1:
        raise ValueError(f"The closed form is for a single column, got L={model.L}")
    theta, zeta, gamma, mu = model.theta, model.zeta, model.gamma, model.mu[0]
    denominator = model.require(theta + zeta + lam, '[theta+zeta+lambda]') * model.f(theta)
    return omega_L(model) * model.bracket(gamma, zeta + mu, theta + zeta - mu, theta + gamma, 2 * lam) / denominator


def _cross_table(model: ModelInstance, point: Tuple[complex, ...]) -> np.ndarray:
    """table[a, j] = [λ_a - μ_j, λ_a + μ_j + γ]."""
    lam = np.array(point)[:, None]
    mu = np.array(model.mu)[None, :]
    return eval_f(model.ctx, lam - mu) * eval_f(model.ctx, lam + mu + model.gamma)


def _pole_factors(model: ModelInstance, point: Tuple[complex, ...]) -> np.ndarray:
    """[γ][2λ_a]/[2λ_a+γ]."""
    lam = np.array(point)
    return model.f(model.gamma) * eval_f(model.ctx, 2 * lam) / eval_f(model.ctx, 2 * lam + model.gamma)


def _main_sum(model, point):
    L = model.L
    cross, poles = _cross_table(model, point), _pole_factors(model, point)
    cache: Dict[Tuple[frozenset, int], complex] = {}
    total = KahanSum()
    for sigma in permutations(range(L)):
        term = 1 + 0j
        for l in range(1, L + 1):
            key = (frozenset(sigma[:l - 1]), sigma[l - 1])
            if key not in cache:
                cache[key] = m_l(model, l, [point[s] for s in sigma[:l]], check=False)
            term *= poles[sigma[l - 1]] * cache[key]
        for i in range(L):
            for j in range(i + 1, L):
                term *= cross[sigma[i], j]
        total.add(term)
    logger.debug(f"Symmetrized sum over {L} variables used {len(cache)} cached m_l values")
    return total.value


def _alt_sum(model, point):
    L = model.L
    cross, poles = _cross_table(model, point), _pole_factors(model, point)
    reversed_mu = [tuple(reversed(model.mu[l - 1:])) for l in range(1, L + 1)]
    cache: Dict[Tuple[frozenset, int], complex] = {}
    total = KahanSum()
    for sigma in permutations(range(L)):
        term = 1 + 0j
        for l in range(1, L + 1):
            key = (frozenset(sigma[l:]), sigma[l - 1])
            if key not in cache:
                arguments = [point[sigma[i]] for i in range(L - 1, l - 2, -1)]
                cache[key] = m_l(model, L - l + 1, arguments, mu=reversed_mu[l - 1], check=False)
            term *= poles[sigma[l - 1]] * cache[key]
        for i in range(L):
            for j in range(i):
                term *= cross[sigma[i], j]
        total.add(term)
    return total.value


def _coefficient_sum(model, point):
    from elliptic_sos.lattice.funceq import coefficient

    L, gamma = model.L, model.gamma
    sub_models = [model.with_inhomogeneities(model.mu[:l]) for l in range(1, L + 1)]
    cross = _cross_table(model, point)
    single = [z_closed_l1(sub_models[0], lam) for lam in point]
    cache: Dict[Tuple[frozenset, int], complex] = {}
    total = KahanSum()
    for sigma in permutations(range(L)):
        term = single[sigma[0]]
        for l in range(2, L + 1):
            key = (frozenset(sigma[:l - 1]), sigma[l - 1])
            if key not in cache:
                cache[key] = coefficient(sub_models[l - 1], l, model.mu[l - 1] - gamma, [point[s] for s in sigma[:l]])
            term *= cache[key]
        for i in range(L):
            for j in range(i + 1, L):
                term *= cross[sigma[i], j]
        total.add(term)
    return total.value / omega_L(sub_models[0])


def z_symmetrized(model: ModelInstance, point: Sequence[complex], variant: str = MAIN, max_l: int = DEFAULT_MAX_L) -> complex:
    """
    Ω_L times the symmetrized sum over S_L. MAIN builds the l-th factor from the first l variables, ALT from the
    last ones with the inhomogeneities reversed, and COEFFICIENT from the L=1 solution and the coefficients M_l
    of the functional equation for length l.
    """
    if variant not in SYMMETRIZED_VARIANTS:
        raise ValueError(f"Unknown variant {variant}, expected one of {SYMMETRIZED_VARIANTS}")
    _check_length(model, point, max_l)
    point = check_point(model, point)
    if variant == MAIN:
        total = _main_sum(model, point)
    elif variant == ALT:
        total = _alt_sum(model, point)
    else:
        total = _coefficient_sum(model, point)
    return omega_L(model) * total


def _singular_points(model: ModelInstance, point: Tuple[complex, ...], j: int):
    others = [lam for k, lam in enumerate(point) if k != j]
    crossed = [-lam - model.gamma for lam in point]
    return others + crossed + [-model.theta - model.zeta, -model.gamma / 2]


def enclosure_distance(model: ModelInstance, point: Sequence[complex]) -> float:
    """Smallest lattice distance from any λ_j to a singularity of the contour integrand other than λ_j itself."""
    point = tuple(complex(lam) for lam in point)
    return min(lattice_distance(model.ctx, lam - singular) for j, lam in enumerate(point) for singular in _singular_points(model, point, j))


def contour_nodes(point: Sequence[complex], radius: float, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Trapezoid nodes on one circle per λ_j and weights that already include dz/(2πi). Circle c is rotated by
    c/(L+1) of a node spacing.
    """
    L = len(point)
    nodes, weights = [], []
    for c, lam in enumerate(point):
        phi = (np.arange(n_nodes) + c / (L + 1)) * 2 * np.pi / n_nodes
        rotation = radius * np.exp(1j * phi)
        nodes.append(lam + rotation)
        weights.append(rotation / n_nodes)
    return np.concatenate(nodes), np.concatenate(weights)


def _contour_integrand(model: ModelInstance, point, z):
    """∏_{i≠j}[z_i-z_j] / ∏_{i,j}[z_i-λ_j] · ∏_{i<j}[z_i-μ_j, z_i+μ_j+γ] · ∏_l [2z_l]/[2z_l+γ] m_l(z_1..z_l)."""
    ctx, gamma, L = model.ctx, model.gamma, model.L
    value = np.ones(np.broadcast(*z).shape, dtype=complex)
    for i in range(L):
        for j in range(L):
            if i != j:
                value = value * eval_f(ctx, z[i] - z[j])
            value = value / eval_f(ctx, z[i] - point[j])
        for j in range(i + 1, L):
            value = value * eval_f(ctx, z[i] - model.mu[j]) * eval_f(ctx, z[i] + model.mu[j] + gamma)
    for l in range(1, L + 1):
        value = value * eval_f(ctx, 2 * z[l - 1]) / eval_f(ctx, 2 * z[l - 1] + gamma) * m_l(model, l, z[:l], check=False)
    return value


def _check_nodes(model: ModelInstance, point, nodes: np.ndarray):
    threshold = model.ctx.guard_threshold
    denominators = [nodes[:, None] - np.array(point)[None, :], 2 * nodes + model.gamma, model.theta + model.zeta + nodes]
    for values in denominators:
        smallest = float(np.min(np.abs(eval_f(model.ctx, values))))
        if smallest < threshold:
            raise DegenerateNodes('contour nodes', smallest)


def z_contour(
    model: ModelInstance,
    point: Sequence[complex],
    radius: Optional[float] = None,
    n_nodes: int = DEFAULT_CONTOUR_NODES,
    radius_fraction: float = DEFAULT_RADIUS_FRACTION,
    max_l: int = DEFAULT_CONTOUR_MAX_L,
) -> complex:
    """
    The L-fold contour integral over small circles around every λ_j, each variable running over all circles.
    The first variable is looped over so memory stays at (L·n_nodes)^(L-1) evaluations.
    """
    if model.L > max_l:
        raise ValueError(f"contour route limited to L <= {max_l}")
    point = check_point(model, point)
    distance = enclosure_distance(model, point)
    if radius is None:
        radius = radius_fraction * distance
    if not radius > 0 or 2 * radius >= distance:
        raise ContourTooLarge(f"Contour radius {radius:.3e} does not separate the poles, which are {distance:.3e} apart")
    nodes, weights = contour_nodes(point, radius, n_nodes)
    _check_nodes(model, point, nodes)
    L = model.L
    total = KahanSum()
    if L == 1:
        total.add(np.sum(weights * _contour_integrand(model, point, [nodes])))
    else:
        indices = np.arange(nodes.size)
        grids = np.meshgrid(*([indices] * (L - 1)), indexing='ij')
        rest = [grid.ravel() for grid in grids]
        rest_weights = np.prod([weights[index] for index in rest], axis=0)
        collision = np.zeros(rest[0].size, dtype=bool)
        for a, b in combinations(range(L - 1), 2):
            collision |= rest[a] == rest[b]
        for first in indices:
            coincide = collision.copy()
            for index in rest:
                coincide |= index == first
            z = [np.full(rest[0].size, nodes[first])] + [nodes[index] for index in rest]
            with np.errstate(divide='ignore', invalid='ignore'):
                values = _contour_integrand(model, point, z)
            # coinciding variables are zeros of the integrand
            values = np.where(coincide, 0, values)
            total.add(weights[first] * np.sum(rest_weights * values))
    prefactor = omega_L(model) * (model.f(model.gamma) * model.ctx.fprime0) ** L
    logger.debug(f"Contour quadrature with {nodes.size} nodes per variable, radius {radius:.3e}")
    return prefactor * total.value


def relative_deviation(first: complex, second: complex) -> float:
    scale = max(abs(first), abs(second))
    if scale == 0:
        return 0.0
    return float(abs(first - second) / scale)


@dataclass
class PartitionReport:
    point: Tuple[complex, ...]
    omega_L: complex
    z_algebraic: Optional[complex] = None
    z_symmetrized: Optional[complex] = None
    z_symmetrized_alt: Optional[complex] = None
    z_contour: Optional[complex] = None
    deviations: Dict[str, float] = field(default_factory=dict)
    diagnostics: Dict[str, float] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def values(self) -> Dict[str, complex]:
        names = ('algebraic', 'symmetrized', 'symmetrized_alt', 'contour')
        return {name: getattr(self, f'z_{name}') for name in names if getattr(self, f'z_{name}') is not None}

    def compute_deviations(self):
        values = self.values
        self.deviations = {f'{first}/{second}': relative_deviation(values[first], values[second]) for first, second in combinations(values, 2)}
        return self.deviations

    def disagreements(self, tolerance: float, contour_tolerance: float = CONTOUR_TOLERANCE) -> Dict[str, float]:
        """Pairs beyond tolerance; pairs that involve the contour route use the looser of the two tolerances."""
        failed = {}
        for pair, deviation in self.deviations.items():
            limit = max(tolerance, contour_tolerance) if 'contour' in pair else tolerance
            if deviation > limit:
                failed[pair] = deviation
        return failed

    def raise_for_disagreement(self, tolerance: float, contour_tolerance: float = CONTOUR_TOLERANCE):
        failed = self.disagreements(tolerance, contour_tolerance)
        if failed:
            raise RouteDisagreement(failed, tolerance)


def partition_report(
    model: ModelInstance,
    point: Sequence[complex],
    routes: Sequence[str] = (ALGEBRAIC_ROUTE, SYMMETRIZED_ROUTE),
    contour_radius: Optional[float] = None,
    contour_nodes_count: int = DEFAULT_CONTOUR_NODES,
    radius_fraction: float = DEFAULT_RADIUS_FRACTION,
    max_l: int = DEFAULT_MAX_L,
    contour_max_l: int = DEFAULT_CONTOUR_MAX_L,
) -> PartitionReport:
    """Evaluate the requested routes at one point, timing each, and compare them pairwise."""
    unknown = set(routes) - set(ROUTES)
    if unknown:
        raise ValueError(f"Unknown routes {sorted(unknown)}, expected a subset of {sorted(ROUTES)}")
    point = check_point(model, point)
    report = PartitionReport(point=point, omega_L=omega_L(model))

    def timed(name, function, *args, **kwargs):
        started = time.perf_counter()
        value = function(*args, **kwargs)
        report.timings[name] = time.perf_counter() - started
        setattr(report, f'z_{name}', value)
        return value

    if ALGEBRAIC_ROUTE in routes:
        value = timed('algebraic', z_algebraic, model, point, max_l=max_l)
        report.diagnostics['reverse_order'] = relative_deviation(value, z_algebraic(model, point[::-1], max_l=max_l))
    if SYMMETRIZED_ROUTE in routes:
        timed('symmetrized', z_symmetrized, model, point, MAIN, max_l=max_l)
        timed('symmetrized_alt', z_symmetrized, model, point, ALT, max_l=max_l)
    if CONTOUR_ROUTE in routes:
        timed(
            'contour', z_contour, model, point, radius=contour_radius, n_nodes=contour_nodes_count, radius_fraction=radius_fraction, max_l=contour_max_l
        )
    report.compute_deviations()
    logger.info(f"Evaluated routes {''.join(routes)} at L={model.L}: worst deviation {max(report.deviations.values(), default=0.0):.3e}")
    return report
