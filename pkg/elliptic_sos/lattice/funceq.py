"""
The linear functional equation Σ_ν M_ν(λ_0; λ) Z(λ_0, .., λ̂_ν, .., λ_L) = 0 satisfied by the partition function,
together with the machinery that reduces it from length L to length L-1.

Eigenvalues inside the coefficients always come from the closed forms, never from the operators.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from elliptic_sos.lattice.algebra import ModelInstance, lambda_a_cal, lambda_a_cal_bar, lambda_d_tilde
from elliptic_sos.lattice.partition import DEFAULT_MAX_L, m_l, z_algebraic
from elliptic_sos.utils.sampling import draw_complex

logger = logging.getLogger('elliptic_sos.lattice.funceq')

ZEval = Callable[[Tuple[complex, ...]], complex]

MINUS = 'MINUS'
PLUS = 'PLUS'
STARS = (MINUS, PLUS)

LAST = 'LAST'
FIRST = 'FIRST'
RECONSTRUCTION_ROUTES = (LAST, FIRST)

RESIDUE_EPSILONS = (1e-3, 1e-4, 1e-5)
RESIDUE_GROWTH_LIMIT = 10.0
NEARBY_OFFSETS = (0.05 + 0.03j, -0.04 + 0.02j)


@dataclass(frozen=True)
class CoefficientVector:
    lam0: complex
    point: Tuple[complex, ...]
    M: Tuple[complex, ...]

    def __len__(self):
        return len(self.M)

    def __getitem__(self, nu):
        return self.M[nu]


def _omit(values: Sequence[complex], index: int) -> Tuple[complex, ...]:
    return tuple(value for position, value in enumerate(values) if position != index)


def _exchange_product(model: ModelInstance, lam: complex, others: Sequence[complex]) -> complex:
    """∏_j [λ_j-λ+γ, λ_j+λ] / [λ_j-λ, λ_j+λ+γ]."""
    gamma = model.gamma
    result = 1 + 0j
    for j, other in enumerate(others, start=1):
        denominator = model.require(other - lam, f'[lambda_{j}-lambda]') * model.require(other + lam + gamma, f'[lambda_{j}+lambda+gamma]')
        result *= model.bracket(other - lam + gamma, other + lam) / denominator
    return result


def _crossed_exchange_product(model: ModelInstance, lam: complex, others: Sequence[complex]) -> complex:
    """∏_j [λ-λ_j+γ, λ+λ_j+2γ] / [λ-λ_j, λ+λ_j+γ]."""
    gamma = model.gamma
    result = 1 + 0j
    for other in others:
        result *= model.bracket(lam - other + gamma, lam + other + 2 * gamma) / model.bracket(lam - other, lam + other + gamma)
    return result


def coefficient(model: ModelInstance, nu: int, lam0: complex, point: Sequence[complex]) -> complex:
    """A single coefficient M_ν(λ_0; λ_1..λ_L) of the functional equation."""
    point = tuple(complex(lam) for lam in point)
    if len(point) != model.L:
        raise ValueError(f"Expected {model.L} spectral parameters, got {len(point)}")
    if not 0 <= nu <= model.L:
        raise ValueError(f"Coefficient index {nu} outside 0..{model.L}")
    lam0 = complex(lam0)
    theta, gamma, L = model.theta, model.gamma, model.L
    if nu == 0:
        return lambda_a_cal_bar(model, lam0) - lambda_a_cal(model, lam0) * _exchange_product(model, lam0, point)

    lam = point[nu - 1]
    others = _omit(point, nu - 1)
    f_theta_shift = model.f(theta + (L - 1) * gamma)
    pole = model.require(lam - lam0, f'[lambda_{nu}-lambda_0]')
    crossed_pole = model.require(lam + lam0 + gamma, f'[lambda_{nu}+lambda_0+gamma]')
    direct = (
        model.bracket(2 * lam, gamma, theta + (L - 1) * gamma + lam - lam0)
        / (model.require(2 * lam + gamma, f'[2*lambda_{nu}+gamma]') * pole * f_theta_shift)
        * lambda_a_cal(model, lam)
        * _exchange_product(model, lam, others)
    )
    crossed = (
        model.bracket(gamma, theta + (L - 2) * gamma - lam - lam0, theta - (L - 1) * gamma)
        / (crossed_pole * f_theta_shift * model.f(theta - L * gamma))
        * lambda_d_tilde(model, lam)
        * _crossed_exchange_product(model, lam, others)
    )
    return direct + crossed


def coefficients(model: ModelInstance, lam0: complex, point: Sequence[complex]) -> CoefficientVector:
    point = tuple(complex(lam) for lam in point)
    values = tuple(coefficient(model, nu, lam0, point) for nu in range(model.L + 1))
    return CoefficientVector(lam0=complex(lam0), point=point, M=values)


def fe_residual(model: ModelInstance, lam0: complex, point: Sequence[complex], z_eval: ZEval) -> Tuple[float, float]:
    """|Σ_ν M_ν Z(λ without ν)| and the largest single term, for the caller to compare."""
    M = coefficients(model, lam0, point)
    variables = (M.lam0,) + M.point
    terms = [M[nu] * z_eval(_omit(variables, nu)) for nu in range(model.L + 1)]
    return float(abs(sum(terms))), float(max(abs(term) for term in terms))


def swapped_row(model: ModelInstance, variables: Sequence[complex], rho: int) -> np.ndarray:
    """Coefficients of the equation with λ_0 and λ_ρ exchanged, re-indexed so column ν multiplies Z(λ without ν)."""
    M = coefficients(model, variables[rho], _omit(variables, rho))
    row = np.empty(len(variables), dtype=complex)
    for nu in range(len(variables)):
        if nu == rho:
            row[nu] = M[0]
        elif nu > rho:
            row[nu] = M[nu]
        else:
            row[nu] = M[nu + 1]
    return row


def swapped_matrix(model: ModelInstance, lam0: complex, point: Sequence[complex], rows: Optional[Sequence[int]] = None) -> np.ndarray:
    variables = (complex(lam0),) + tuple(complex(lam) for lam in point)
    rows = range(len(variables)) if rows is None else rows
    return np.array([swapped_row(model, variables, rho) for rho in rows])


def _det_with_scale(matrix: np.ndarray) -> Tuple[complex, float]:
    scale = float(np.prod(np.max(np.abs(matrix), axis=1)))
    return complex(np.linalg.det(matrix)), scale


def swapped_matrix_det(model: ModelInstance, lam0: complex, point: Sequence[complex]) -> Tuple[complex, float]:
    """Determinant of the (L+1)×(L+1) swapped matrix, which vanishes, and the product of its row max-norms."""
    return _det_with_scale(swapped_matrix(model, lam0, point))


def special_zero_pairs(model: ModelInstance, k: int) -> Tuple[Tuple[Tuple[complex, complex], ...], ...]:
    """pairs[a][b] = (λ_+, λ_-) with λ_+ ∈ (μ_k-γ, -μ_k) and λ_- ∈ (-μ_k-γ, μ_k)."""
    if not 1 <= k <= model.L:
        raise ValueError(f"Column index {k} outside 1..{model.L}")
    mu, gamma = model.mu[k - 1], model.gamma
    return tuple(tuple((plus, minus) for minus in (-mu - gamma, mu)) for plus in (mu - gamma, -mu))


def special_zero_scan(
    model: ModelInstance,
    z_eval: ZEval,
    k: int,
    rest: Optional[Sequence[complex]] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    |Z| with (λ_{L-1}, λ_L) at each of the four special zeros of column k, relative to |Z| at a nearby point.
    The other L-2 spectral parameters are `rest`, or drawn from rng.
    """
    if model.L < 2:
        raise ValueError("Special zeros need L >= 2")
    if rest is None:
        if rng is None:
            raise ValueError("Pass the remaining spectral parameters or an rng to draw them from")
        rest = draw_complex(rng, model.L - 2)
    rest = tuple(complex(lam) for lam in rest)
    ratios = np.empty((2, 2))
    for a, row in enumerate(special_zero_pairs(model, k)):
        for b, (plus, minus) in enumerate(row):
            nearby = abs(z_eval(rest + (plus + NEARBY_OFFSETS[0], minus + NEARBY_OFFSETS[1])))
            ratios[a, b] = abs(z_eval(rest + (plus, minus))) / nearby
    return ratios


def special_zero_matrix_det(
    model: ModelInstance, lam0: complex, rest: Sequence[complex], k: int, plus_index: int = 0, minus_index: int = 0
) -> Tuple[complex, float]:
    """
    The leading (L-1)×(L-1) block of the swapped matrix at (λ_0, .., λ_{L-2}, λ_+, λ_-), whose determinant is
    nonzero; combined with the vanishing of M_{L-1} and M_L there this forces Z to vanish at the special zeros.
    """
    if model.L < 2:
        raise ValueError("Special zeros need L >= 2")
    plus, minus = special_zero_pairs(model, k)[plus_index][minus_index]
    point = tuple(complex(lam) for lam in rest) + (plus, minus)
    matrix = swapped_matrix(model, lam0, point, rows=range(model.L - 1))[:, : model.L - 1]
    return _det_with_scale(matrix)


@dataclass(frozen=True)
class ReducedCoefficients:
    star: str
    lam_star: complex
    M: Tuple[complex, ...]

    def __getitem__(self, nu):
        return self.M[nu]


def star_value(model: ModelInstance, star: str) -> complex:
    if star == MINUS:
        return -model.mu[-1] - model.gamma
    if star == PLUS:
        return model.mu[-1]
    raise ValueError(f"Unknown choice {star}, expected one of {STARS}")


def reduced_model(model: ModelInstance, route: str = LAST) -> ModelInstance:
    if model.L < 2:
        raise ValueError("Reduction needs L >= 2")
    if route == LAST:
        return model.with_inhomogeneities(model.mu[:-1])
    if route == FIRST:
        return model.with_inhomogeneities(model.mu[1:])
    raise ValueError(f"Unknown route {route}, expected one of {RECONSTRUCTION_ROUTES}")


def reduced_coefficients(model: ModelInstance, lam0: complex, point: Sequence[complex], star: str = MINUS) -> ReducedCoefficients:
    """
    M̃_ν(λ_0; λ_1..λ_{L-1}) of the length L-1 equation obtained with λ_L = λ_*. The two choices of λ_* agree up to
    a constant overall factor.
    """
    if model.L < 2:
        raise ValueError("Reduction needs L >= 2")
    point = tuple(complex(lam) for lam in point)
    if len(point) != model.L - 1:
        raise ValueError(f"Expected {model.L - 1} spectral parameters, got {len(point)}")
    lam0, L, gamma, mu_L = complex(lam0), model.L, model.gamma, model.mu[-1]
    lam_star = star_value(model, star)
    variables = (lam0,) + point
    full = coefficients(model, lam0, point + (lam_star,))
    specialized = mu_L - gamma
    specialized_M = coefficients(model, specialized, variables)
    brackets = [model.bracket(lam - mu_L, lam + mu_L + gamma) for lam in variables]
    values = []
    for nu in range(L):
        first = full[nu] * coefficient(model, L, specialized, _omit(variables, nu) + (lam_star,))
        second = full[L] * specialized_M[nu + 1]
        values.append((first + second) * np.prod(_omit(brackets, nu)))
    return ReducedCoefficients(star=star, lam_star=lam_star, M=tuple(complex(value) for value in values))


def reduced_fe_residual(model: ModelInstance, lam0: complex, point: Sequence[complex], z_eval: ZEval, star: str = MINUS) -> Tuple[float, float]:
    """Residual of the reduced equation for a length L-1 candidate z_eval."""
    M = reduced_coefficients(model, lam0, point, star)
    variables = (complex(lam0),) + tuple(complex(lam) for lam in point)
    terms = [M[nu] * z_eval(_omit(variables, nu)) for nu in range(model.L)]
    return float(abs(sum(terms))), float(max(abs(term) for term in terms))


def reduced_matrix_det(model: ModelInstance, lam0: complex, point: Sequence[complex], star: str = MINUS) -> Tuple[complex, float]:
    """
    The swapped matrix for length L-1 with its last row replaced by M̃. Its determinant vanishes: the reduced
    equation is a combination of the swapped length L-1 equations.
    """
    matrix = swapped_matrix(reduced_model(model), lam0, point)
    matrix[-1] = reduced_coefficients(model, lam0, point, star).M
    return _det_with_scale(matrix)


def proportionality_spread(first: Sequence[complex], second: Sequence[complex]) -> float:
    """How far two vectors are from being proportional: spread of the componentwise ratios around the ratio of the largest pair."""
    first, second = np.asarray(first, dtype=complex), np.asarray(second, dtype=complex)
    reference = int(np.argmax(np.abs(second)))
    ratio = first[reference] / second[reference]
    return float(np.max(np.abs(first - ratio * second)) / np.max(np.abs(first)))


def _column(route: str, model: ModelInstance) -> int:
    return model.L if route == LAST else 1


def reduction_constant(model: ModelInstance, route: str, calibration_point: Sequence[complex], max_l: int = DEFAULT_MAX_L) -> complex:
    """
    Scale c between the reduced solution, Z at λ_L = μ_k-γ divided by ∏_j [λ_j-μ_k, λ_j+μ_k+γ], and the length L-1
    partition function of the reduced model, measured at one calibration point.
    """
    reduced = reduced_model(model, route)
    y = tuple(complex(lam) for lam in calibration_point)
    return restricted_solution(model, route, max_l=max_l)(y) / z_algebraic(reduced, y, max_l=max_l)


def restricted_solution(model: ModelInstance, route: str = LAST, max_l: int = DEFAULT_MAX_L) -> ZEval:
    """Z̃(y) = Z(y, μ_k-γ) / ∏_j [y_j-μ_k, y_j+μ_k+γ], a solution of the reduced equation with no free normalization."""
    if model.L < 2:
        raise ValueError("Reduction needs L >= 2")
    mu_k, gamma = model.mu[_column(route, model) - 1], model.gamma

    def evaluate(y):
        y = tuple(complex(lam) for lam in y)
        brackets = np.prod([model.bracket(lam - mu_k, lam + mu_k + gamma) for lam in y])
        return z_algebraic(model, y + (mu_k - gamma,), max_l=max_l) / brackets

    return evaluate


def omega_residual(model: ModelInstance, point: Sequence[complex], route: str = LAST) -> float:
    """Relative difference between M_0(μ_k-γ; λ) and the closed form Λ̄_𝒜(μ_k-γ) that fixes Ω = -1/Λ̄_𝒜(μ_k-γ)."""
    specialized = model.mu[_column(route, model) - 1] - model.gamma
    left = coefficient(model, 0, specialized, point)
    right = lambda_a_cal_bar(model, specialized)
    scale = max(abs(left), abs(right))
    return float(abs(left - right) / scale) if scale else 0.0


def reconstruct_from_reduction(
    model: ModelInstance,
    point: Sequence[complex],
    route: str = LAST,
    constant: Optional[complex] = None,
    calibration_point: Optional[Sequence[complex]] = None,
    max_l: int = DEFAULT_MAX_L,
) -> complex:
    """
    Z(λ) = Ω Σ_i M_i(μ_k-γ; λ) Z̃(λ without λ_i) ∏_{j≠i} [λ_j-μ_k, λ_j+μ_k+γ] with Ω = -1/Λ̄_𝒜(μ_k-γ).

    LAST (k = L) takes Z̃ as the restricted solution and uses Ω alone. FIRST (k = 1) takes Z̃ = c Z_{L-1}, the
    partition function of the model without the first column times a constant c that is either given or
    measured at calibration_point.
    """
    point = tuple(complex(lam) for lam in point)
    if len(point) != model.L:
        raise ValueError(f"Expected {model.L} spectral parameters, got {len(point)}")
    if route == LAST:
        z_tilde = restricted_solution(model, route, max_l=max_l)
        constant = 1.0
    else:
        reduced = reduced_model(model, route)
        if constant is None:
            if calibration_point is None:
                raise ValueError(f"The {route} route needs a constant or a calibration point")
            constant = reduction_constant(model, route, calibration_point, max_l=max_l)

        def z_tilde(y):
            return z_algebraic(reduced, y, max_l=max_l)

    mu_k, gamma = model.mu[_column(route, model) - 1], model.gamma
    specialized = mu_k - gamma
    omega = -1 / lambda_a_cal_bar(model, specialized)
    M = coefficients(model, specialized, point)
    brackets = [model.bracket(lam - mu_k, lam + mu_k + gamma) for lam in point]
    total = 0j
    for i in range(model.L):
        total += M[i + 1] * z_tilde(_omit(point, i)) * np.prod(_omit(brackets, i))
    logger.debug(f"Reconstructed Z for L={model.L} by the {route} route with constant {constant}")
    return complex(omega * constant * total)


def normalized_coefficients(model: ModelInstance, lam0: complex, point: Sequence[complex]) -> Tuple[complex, ...]:
    """M̄_ν = [θ+(L-1)γ, θ+ζ+λ_ν] M_ν ∏_ρ [2λ_ρ+γ] ∏_{j>ρ} [λ_j-λ_ρ, λ_j+λ_ρ+γ], ρ and j running over 0..L."""
    M = coefficients(model, lam0, point)
    variables = (M.lam0,) + M.point
    theta, zeta, gamma, L = model.theta, model.zeta, model.gamma, model.L
    common = model.f(theta + (L - 1) * gamma)
    for rho, lam in enumerate(variables):
        common *= model.f(2 * lam + gamma)
        for other in variables[rho + 1:]:
            common *= model.bracket(other - lam, other + lam + gamma)
    return tuple(complex(common * model.f(theta + zeta + variables[nu]) * M[nu]) for nu in range(L + 1))


def coefficient_m_residual(model: ModelInstance, z: Sequence[complex]) -> float:
    """
    Relative difference between M_l(μ_l-γ; z_1..z_l) for the first l columns and [γ][2z_l]/[2z_l+γ] m_l(z), l = len(z).
    """
    l = len(z)
    sub_model = model.with_inhomogeneities(model.mu[:l])
    z = tuple(complex(value) for value in z)
    left = coefficient(sub_model, l, sub_model.mu[-1] - model.gamma, z)
    last = z[-1]
    right = model.f(model.gamma) * model.f(2 * last) / model.f(2 * last + model.gamma) * m_l(sub_model, l, z)
    scale = max(abs(left), abs(right))
    return float(abs(left - right) / scale) if scale else 0.0


@dataclass(frozen=True)
class ResidueScan:
    index: int
    epsilons: Tuple[float, ...]
    divergent: Tuple[float, ...]
    combined: Tuple[float, ...]
    crossed_divergent: Tuple[float, ...]
    crossed_combined: Tuple[float, ...]

    @property
    def growth(self) -> float:
        """Largest growth of the two combinations over the scan, relative to the first ε."""
        return max(max(values) / values[0] for values in (self.combined, self.crossed_combined))

    @property
    def divergence(self) -> float:
        """Smallest growth of |M_0| from the first to the last ε at the two poles."""
        return min(values[-1] / values[0] for values in (self.divergent, self.crossed_divergent))

    @property
    def bounded(self) -> bool:
        return self.growth <= RESIDUE_GROWTH_LIMIT

    @property
    def diverges(self) -> bool:
        return self.divergence > RESIDUE_GROWTH_LIMIT

    def as_dict(self) -> Dict[str, object]:
        return {
            'index': self.index,
            'epsilons': list(self.epsilons),
            'divergent': list(self.divergent),
            'combined': list(self.combined),
            'crossed_divergent': list(self.crossed_divergent),
            'crossed_combined': list(self.crossed_combined),
        }


def residue_scan(model: ModelInstance, point: Sequence[complex], index: int, epsilons: Sequence[float] = RESIDUE_EPSILONS) -> ResidueScan:
    """
    Approach λ_0 → λ_i and λ_0 → -λ_i-γ. M_0 has simple poles at both; M_0 + M_i and M_0 - c M_i with
    c = [2λ_i+2γ, θ+ζ+λ_i]/[2λ_i, θ+ζ-λ_i-γ] stay bounded since the residues cancel.
    """
    point = tuple(complex(lam) for lam in point)
    if not 1 <= index <= model.L:
        raise ValueError(f"Index {index} outside 1..{model.L}")
    lam, theta, zeta, gamma = point[index - 1], model.theta, model.zeta, model.gamma
    crossing = model.bracket(2 * lam + 2 * gamma, theta + zeta + lam) / model.bracket(2 * lam, theta + zeta - lam - gamma)
    divergent, combined, crossed_divergent, crossed_combined = [], [], [], []
    for epsilon in epsilons:
        M = coefficients(model, lam + epsilon, point)
        divergent.append(abs(M[0]))
        combined.append(abs(M[0] + M[index]))
        M = coefficients(model, -lam - gamma + epsilon, point)
        crossed_divergent.append(abs(M[0]))
        crossed_combined.append(abs(M[0] - crossing * M[index]))
    return ResidueScan(
        index=index,
        epsilons=tuple(epsilons),
        divergent=tuple(divergent),
        combined=tuple(combined),
        crossed_divergent=tuple(crossed_divergent),
        crossed_combined=tuple(crossed_combined),
    )
