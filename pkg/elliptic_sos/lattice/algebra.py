"""
Monodromy matrices of the dynamical Yang-Baxter and reflection algebras, their generators and vacuum eigenvalues.

    T_0(λ, θ) = R_01(λ-μ_1, θ-γΣ_{i>1}h_i) ··· R_0L(λ-μ_L, θ)
    T̄_0(λ, θ) = R_L0(λ+μ_L, θ) ··· R_10(λ+μ_1, θ-γΣ_{i>1}h_i)
    𝒯_0(λ) = T_0(λ, θ) K_0(λ, θ) T̄_0(λ, θ) = [[𝒜, ℬ], [𝒞, 𝒟]]

Every operator is a dense numpy matrix; see elliptic_sos.lattice.operators for the basis conventions.
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from elliptic_sos.lattice.operators import SIGMA_Y, LatticeOperator, block, embed, relative_residual, total_weight
from elliptic_sos.lattice.theta import EllipticContext, bracket, eval_f, require_generic
from elliptic_sos.lattice.weights import dynamical_r_matrix, k_matrix

logger = logging.getLogger('elliptic_sos.lattice.algebra')

FORWARD = 'FORWARD'
BACKWARD = 'BACKWARD'

DYBA = 'DYBA'
DYBA_BAR = 'DYBA_BAR'
DYBA_TTBAR = 'DYBA_TTBAR'
DREA = 'DREA'
REL_BB = 'REL_BB'
REL_AB = 'REL_AB'
REL_DB = 'REL_DB'
REL_ABB = 'REL_ABB'
CBB = 'CBB'
BCC = 'BCC'
B_CROSSING = 'B_CROSSING'
RELATIONS = (DYBA, DYBA_BAR, DYBA_TTBAR, DREA, REL_BB, REL_AB, REL_DB, REL_ABB, CBB, BCC, B_CROSSING)


@dataclass(frozen=True)
class ModelInstance:
    """
    One SOS model with a reflecting end: L = len(mu) columns with inhomogeneities μ_j, crossing parameter γ,
    boundary parameter ζ and dynamical parameter θ. Construction refuses non-generic parameters.
    """

    ctx: EllipticContext
    gamma: complex
    zeta: complex
    theta: complex
    mu: Tuple[complex, ...]

    def __post_init__(self):
        for name in ('gamma', 'zeta', 'theta'):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, 'mu', tuple(complex(m) for m in self.mu))
        if len(self.mu) < 1:
            raise ValueError("A model needs at least one column")
        self.check_generic()

    @property
    def L(self) -> int:
        return len(self.mu)

    def f(self, argument):
        return eval_f(self.ctx, argument)

    def bracket(self, *arguments) -> complex:
        return bracket(self.ctx, arguments)

    def require(self, argument, name: str):
        return require_generic(self.ctx, argument, name)

    def check_generic(self):
        """Raise DegenerateParameter naming the first bracket that sits on the zero lattice."""
        theta, zeta, gamma = self.theta, self.zeta, self.gamma
        self.require(gamma, '[gamma]')
        for k in range(-self.L - 1, self.L + 2):
            self.require(theta + k * gamma, f'[theta{k:+d}*gamma]')
        for j, mu in enumerate(self.mu, start=1):
            self.require(theta + zeta + mu, f'[theta+zeta+mu_{j}]')
            self.require(theta + zeta - mu, f'[theta+zeta-mu_{j}]')
            self.require(zeta + mu, f'[zeta+mu_{j}]')
            self.require(zeta - mu, f'[zeta-mu_{j}]')
            for i, other in enumerate(self.mu[:j - 1], start=1):
                self.require(other - mu, f'[mu_{i}-mu_{j}]')
                self.require(other + mu, f'[mu_{i}+mu_{j}]')

    def with_inhomogeneities(self, mu: Sequence[complex]) -> 'ModelInstance':
        return replace(self, mu=tuple(mu))

    @cached_property
    def h_quantum(self) -> np.ndarray:
        """Eigenvalues of H = Σ_j h_j on the basis of W."""
        return total_weight(self.L)


def _site_legs(model: ModelInstance, first_site_leg: int) -> Tuple[int, ...]:
    return tuple(range(first_site_leg, first_site_leg + model.L))


def monodromy_factors(
    model: ModelInstance,
    lam: complex,
    direction: str,
    theta: Optional[complex] = None,
    n_legs: Optional[int] = None,
    aux_leg: int = 0,
    first_site_leg: int = 1,
    extra_shift_legs: Sequence[int] = (),
):
    """
    The R-matrix factors of T_0 (FORWARD) or T̄_0 (BACKWARD), leftmost first, embedded in an n_legs space whose
    sites occupy consecutive legs. extra_shift_legs shift θ of every factor, e.g. T_2(λ, θ - γh_1).
    """
    theta = model.theta if theta is None else complex(theta)
    sites = _site_legs(model, first_site_leg)
    if n_legs is None:
        n_legs = model.L + 1
    factors = []
    for j in range(model.L):
        shift_legs = tuple(extra_shift_legs) + sites[j + 1:]
        if direction == FORWARD:
            factors.append(dynamical_r_matrix(model.ctx, model.gamma, lam - model.mu[j], theta, n_legs, (aux_leg, sites[j]), shift_legs))
        elif direction == BACKWARD:
            factors.append(dynamical_r_matrix(model.ctx, model.gamma, lam + model.mu[j], theta, n_legs, (sites[j], aux_leg), shift_legs))
        else:
            raise ValueError(f"Unknown direction {direction}, expected {FORWARD} or {BACKWARD}")
    if direction == BACKWARD:
        factors.reverse()
    return factors


def _product(factors):
    result = factors[0]
    for factor in factors[1:]:
        result = result @ factor
    return result


def monodromy_matrix(model: ModelInstance, lam: complex, direction: str, theta: Optional[complex] = None, **placement) -> np.ndarray:
    return _product(monodromy_factors(model, lam, direction, theta=theta, **placement))


def build_monodromy(model: ModelInstance, lam: complex, direction: str = FORWARD, theta: Optional[complex] = None) -> LatticeOperator:
    return LatticeOperator(monodromy_matrix(model, lam, direction, theta=theta), model.L, auxiliary=True)


def _k_factor(model, lam, n_legs, aux_leg, normalized=False):
    if normalized:
        # [θ+ζ+λ]·K(λ, θ), finite at λ = -θ-ζ
        k_plus = model.bracket(model.zeta + lam, model.theta + model.zeta - lam)
        k_minus = model.bracket(model.zeta - lam, model.theta + model.zeta + lam)
        matrix = np.diag([k_plus, k_minus])
    else:
        matrix = k_matrix(model.ctx, model.gamma, model.zeta, lam, model.theta).matrix()
    return embed(n_legs, (aux_leg,), lambda weight: matrix)


def double_row_factors(model: ModelInstance, lam: complex, n_legs: Optional[int] = None, aux_leg: int = 0, first_site_leg: int = 1, normalized: bool = False):
    if n_legs is None:
        n_legs = model.L + 1
    placement = {'n_legs': n_legs, 'aux_leg': aux_leg, 'first_site_leg': first_site_leg}
    return (
        monodromy_factors(model, lam, FORWARD, **placement)
        + [_k_factor(model, lam, n_legs, aux_leg, normalized)]
        + monodromy_factors(model, lam, BACKWARD, **placement)
    )


def build_double_row(model: ModelInstance, lam: complex) -> LatticeOperator:
    return LatticeOperator(_product(double_row_factors(model, lam)), model.L, auxiliary=True)


def apply_b(model: ModelInstance, lam: complex, vector: np.ndarray, normalized: bool = False) -> np.ndarray:
    """
    ℬ(λ)·vector without forming ℬ: 𝒯(λ) acts on e_-⊗vector factor by factor and the auxiliary + half is kept.
    normalized=True applies [θ+ζ+λ]·ℬ(λ) instead.
    """
    size = 2**model.L
    state = np.zeros(2 * size, dtype=complex)
    state[size:] = vector
    for factor in reversed(double_row_factors(model, lam, normalized=normalized)):
        state = factor @ state
    return state[:size]


def extract_block(op: LatticeOperator, which: str) -> LatticeOperator:
    return op.block(which)


def _d_tilde_from_blocks(model: ModelInstance, lam: complex, a_cal: np.ndarray, d_cal: np.ndarray) -> np.ndarray:
    model.require(2 * lam + model.gamma, '[2*lambda+gamma]')
    f_gamma = model.f(model.gamma)
    denominator = model.f(2 * lam + model.gamma)
    h = model.h_quantum
    scalar = f_gamma * eval_f(model.ctx, model.theta - model.gamma * (h - 1) + 2 * lam) / (denominator * eval_f(model.ctx, model.theta - model.gamma * (h - 1)))
    return d_cal - scalar[:, None] * a_cal


def d_tilde(model: ModelInstance, lam: complex) -> LatticeOperator:
    """𝒟̃(λ) = 𝒟(λ) - [γ][θ-γ(H-1)+2λ] / ([2λ+γ][θ-γ(H-1)]) 𝒜(λ)."""
    double_row = build_double_row(model, lam).matrix
    return LatticeOperator(_d_tilde_from_blocks(model, lam, block(double_row, 'A'), block(double_row, 'D')), model.L)


@dataclass(frozen=True)
class VacuumEigenvalues:
    """
    Eigenvalues on the pseudovacua. a_cal, d_tilde are for |0⟩ and a_cal_bar for ⟨0̄| in the double-row algebra;
    a, a_bar, d, d_bar are the single-row eigenvalues of A, Ā, D, D̄ on |0⟩ and the dual_* fields those on ⟨0̄|.
    """

    a_cal: complex
    d_tilde: complex
    a_cal_bar: complex
    a: complex
    a_bar: complex
    d: complex
    d_bar: complex
    dual_a: complex
    dual_a_bar: complex
    dual_d: complex
    dual_d_bar: complex


def _products(model: ModelInstance, lam: complex):
    shifted = bracket(model.ctx, [lam - mu + model.gamma for mu in model.mu] + [lam + mu + model.gamma for mu in model.mu])
    plain = bracket(model.ctx, [lam - mu for mu in model.mu] + [lam + mu for mu in model.mu])
    return shifted, plain


def lambda_a_cal(model: ModelInstance, lam: complex) -> complex:
    """Λ_𝒜(λ) = [ζ+λ][θ+ζ-λ]/[θ+ζ+λ] ∏_j [λ-μ_j+γ, λ+μ_j+γ]."""
    theta, zeta = model.theta, model.zeta
    denominator = model.require(theta + zeta + lam, '[theta+zeta+lambda]')
    shifted, _ = _products(model, lam)
    return model.bracket(zeta + lam, theta + zeta - lam) / denominator * shifted


def lambda_d_tilde(model: ModelInstance, lam: complex) -> complex:
    """Λ_𝒟̃(λ) = [ζ-λ-γ][2λ, θ+ζ+λ+γ, θ-Lγ] / [2λ+γ, θ+ζ+λ, θ-(L-1)γ] ∏_j [λ-μ_j, λ+μ_j]."""
    theta, zeta, gamma, L = model.theta, model.zeta, model.gamma, model.L
    denominator = model.require(2 * lam + gamma, '[2*lambda+gamma]') * model.require(theta + zeta + lam, '[theta+zeta+lambda]') * model.f(theta - (L - 1) * gamma)
    _, plain = _products(model, lam)
    return model.bracket(zeta - lam - gamma, 2 * lam, theta + zeta + lam + gamma, theta - L * gamma) / denominator * plain


def lambda_a_cal_bar(model: ModelInstance, lam: complex) -> complex:
    """Λ̄_𝒜(λ), the two-term eigenvalue of 𝒜(λ) on ⟨0̄|."""
    theta, zeta, gamma, L = model.theta, model.zeta, model.gamma, model.L
    f_2lam_gamma = model.require(2 * lam + gamma, '[2*lambda+gamma]')
    f_theta_shift = model.f(theta + (L - 1) * gamma)
    shifted, plain = _products(model, lam)
    first = model.bracket(zeta - lam, gamma, theta + (L - 1) * gamma - 2 * lam) / (f_2lam_gamma * f_theta_shift) * shifted
    denominator = f_2lam_gamma * model.require(theta + zeta + lam, '[theta+zeta+lambda]') * f_theta_shift
    second = model.bracket(zeta + lam + gamma, 2 * lam, theta + zeta - lam - gamma, theta + L * gamma) / denominator * plain
    return first + second


def vacuum_eigenvalues_closed(model: ModelInstance, lam: complex) -> VacuumEigenvalues:
    theta, gamma, L = model.theta, model.gamma, model.L
    forward_shifted = bracket(model.ctx, [lam - mu + gamma for mu in model.mu])
    backward_shifted = bracket(model.ctx, [lam + mu + gamma for mu in model.mu])
    forward = bracket(model.ctx, [lam - mu for mu in model.mu])
    backward = bracket(model.ctx, [lam + mu for mu in model.mu])
    return VacuumEigenvalues(
        a_cal=lambda_a_cal(model, lam),
        d_tilde=lambda_d_tilde(model, lam),
        a_cal_bar=lambda_a_cal_bar(model, lam),
        a=forward_shifted,
        a_bar=backward_shifted,
        d=model.f(theta + gamma) / model.f(theta - (L - 1) * gamma) * forward,
        d_bar=model.f(theta - L * gamma) / model.f(theta) * backward,
        dual_a=model.f(theta - gamma) / model.f(theta + (L - 1) * gamma) * forward,
        dual_a_bar=model.f(theta + L * gamma) / model.f(theta) * backward,
        dual_d=forward_shifted,
        dual_d_bar=backward_shifted,
    )


def _ket_action(operator: np.ndarray) -> Tuple[complex, float]:
    column = operator[:, 0]
    norm = np.linalg.norm(column)
    return complex(column[0]), float(np.linalg.norm(column[1:]) / norm) if norm else 0.0


def _bra_action(operator: np.ndarray) -> Tuple[complex, float]:
    row = operator[-1, :]
    norm = np.linalg.norm(row)
    return complex(row[-1]), float(np.linalg.norm(row[:-1]) / norm) if norm else 0.0


def vacuum_eigenvalues_operator(model: ModelInstance, lam: complex) -> Tuple[VacuumEigenvalues, float]:
    """
    The same eigenvalues read off the operators acting on |0⟩ = e_+^{⊗L} and ⟨0̄| = e_-^{⊗L}. The second return
    value is the worst relative norm of the component orthogonal to the vacuum.
    """
    double_row = build_double_row(model, lam).matrix
    forward = monodromy_matrix(model, lam, FORWARD)
    backward = monodromy_matrix(model, lam, BACKWARD)
    a_cal = block(double_row, 'A')
    actions = {
        'a_cal': _ket_action(a_cal),
        'd_tilde': _ket_action(_d_tilde_from_blocks(model, lam, a_cal, block(double_row, 'D'))),
        'a_cal_bar': _bra_action(a_cal),
        'a': _ket_action(block(forward, 'A')),
        'a_bar': _ket_action(block(backward, 'A')),
        'd': _ket_action(block(forward, 'D')),
        'd_bar': _ket_action(block(backward, 'D')),
        'dual_a': _bra_action(block(forward, 'A')),
        'dual_a_bar': _bra_action(block(backward, 'A')),
        'dual_d': _bra_action(block(forward, 'D')),
        'dual_d_bar': _bra_action(block(backward, 'D')),
    }
    residual = max(leak for _, leak in actions.values())
    return VacuumEigenvalues(**{name: value for name, (value, _) in actions.items()}), residual


def vacuum_annihilation_residual(model: ModelInstance, lam: complex) -> float:
    """Largest of |C|0⟩| and |C̄|0⟩| relative to the norm of the monodromy matrix they come from."""
    worst = 0.0
    for direction in (FORWARD, BACKWARD):
        matrix = monodromy_matrix(model, lam, direction)
        worst = max(worst, float(np.linalg.norm(block(matrix, 'C')[:, 0]) / np.linalg.norm(matrix)))
    return worst


def monodromy_unitarity_residual(model: ModelInstance, lam: complex) -> float:
    """T_0(λ) T̄_0(-λ) = ∏_j [γ-λ+μ_j][γ+λ-μ_j]·Id."""
    left = monodromy_matrix(model, lam, FORWARD) @ monodromy_matrix(model, -lam, BACKWARD)
    scalar = bracket(model.ctx, [model.gamma - lam + mu for mu in model.mu] + [model.gamma + lam - mu for mu in model.mu])
    return relative_residual(left, scalar * np.eye(left.shape[0]))


def crossed_monodromy(model: ModelInstance, lam: complex) -> np.ndarray:
    """
    (-1)^L σ^y_0 :T^{t0}(-λ-γ, θ + γh_0): σ^y_0 f(θ - γH)/f(θ), which equals T̄_0(λ, θ).
    Rows with auxiliary sign a come from T^{t0}(-λ-γ, θ + γa); H acts on the input.
    """
    size = 2**model.L
    f_theta = model.require(model.theta, '[theta]')
    transposed = np.zeros((2 * size, 2 * size), dtype=complex)
    for sign, rows in ((1, slice(0, size)), (-1, slice(size, None))):
        matrix = monodromy_matrix(model, -lam - model.gamma, FORWARD, theta=model.theta + model.gamma * sign)
        partial = matrix.reshape(2, size, 2, size).transpose(2, 1, 0, 3).reshape(2 * size, 2 * size)
        transposed[rows] = partial[rows]
    sigma = np.kron(SIGMA_Y, np.eye(size))
    h = np.concatenate([model.h_quantum, model.h_quantum])
    dynamical = eval_f(model.ctx, model.theta - model.gamma * h) / f_theta
    return (-1) ** model.L * (sigma @ transposed @ sigma) * dynamical[None, :]


def monodromy_crossing_residual(model: ModelInstance, lam: complex) -> float:
    return relative_residual(crossed_monodromy(model, lam), monodromy_matrix(model, lam, BACKWARD))


class _Generators:
    """Blocks of 𝒯(λ) on W, built once per spectral parameter."""

    def __init__(self, model: ModelInstance):
        self.model = model
        self._cache: Dict[complex, Dict[str, np.ndarray]] = {}

    def __call__(self, lam: complex) -> Dict[str, np.ndarray]:
        lam = complex(lam)
        if lam not in self._cache:
            double_row = _product(double_row_factors(self.model, lam))
            blocks = {which: block(double_row, which) for which in 'ABCD'}
            blocks['Dt'] = _d_tilde_from_blocks(self.model, lam, blocks['A'], blocks['D'])
            self._cache[lam] = blocks
        return self._cache[lam]


def _h_scalar(model: ModelInstance, numerator, denominator) -> np.ndarray:
    """Diagonal of ∏[numerator(H)] / ∏[denominator(H)] where each entry maps the weight array to arguments."""
    h = model.h_quantum.astype(complex)
    top = np.ones_like(h)
    for argument in numerator:
        top = top * eval_f(model.ctx, argument(h))
    bottom = np.ones_like(h)
    for argument in denominator:
        bottom = bottom * eval_f(model.ctx, argument(h))
    return top / bottom


def _two_auxiliary_relation(model: ModelInstance, relation: str, lam1: complex, lam2: complex) -> float:
    ctx, gamma, theta, L = model.ctx, model.gamma, model.theta, model.L
    n_legs = L + 2
    sites = _site_legs(model, 2)

    def mono(lam, direction, aux_leg, shift=()):
        return monodromy_matrix(model, lam, direction, n_legs=n_legs, aux_leg=aux_leg, first_site_leg=2, extra_shift_legs=shift)

    def r12(lam, dynamical=False):
        return dynamical_r_matrix(ctx, gamma, lam, theta, n_legs, (0, 1), sites if dynamical else ())

    def r21(lam, dynamical=False):
        return dynamical_r_matrix(ctx, gamma, lam, theta, n_legs, (1, 0), sites if dynamical else ())

    if relation == DYBA:
        left = r12(lam1 - lam2, True) @ mono(lam1, FORWARD, 0) @ mono(lam2, FORWARD, 1, shift=(0,))
        right = mono(lam2, FORWARD, 1) @ mono(lam1, FORWARD, 0, shift=(1,)) @ r12(lam1 - lam2)
    elif relation == DYBA_BAR:
        left = r21(lam1 - lam2) @ mono(lam1, BACKWARD, 0, shift=(1,)) @ mono(lam2, BACKWARD, 1)
        right = mono(lam2, BACKWARD, 1, shift=(0,)) @ mono(lam1, BACKWARD, 0) @ r21(lam1 - lam2, True)
    elif relation == DYBA_TTBAR:
        left = mono(lam1, FORWARD, 0, shift=(1,)) @ r12(lam1 + lam2) @ mono(lam2, BACKWARD, 1, shift=(0,))
        right = mono(lam2, BACKWARD, 1) @ r12(lam1 + lam2, True) @ mono(lam1, FORWARD, 0)
    else:
        first = _product(double_row_factors(model, lam1, n_legs=n_legs, aux_leg=0, first_site_leg=2))
        second = _product(double_row_factors(model, lam2, n_legs=n_legs, aux_leg=1, first_site_leg=2))
        left = r12(lam1 - lam2, True) @ first @ r21(lam1 + lam2, True) @ second
        right = second @ r12(lam1 + lam2, True) @ first @ r21(lam1 - lam2, True)
    return relative_residual(left, right)


def _rel_ab(model, generators, lam0, lam1):
    theta, gamma = model.theta, model.gamma
    g0, g1 = generators(lam0), generators(lam1)
    exchange = model.bracket(lam1 - lam0 + gamma, lam1 + lam0) / model.bracket(lam1 - lam0, lam1 + lam0 + gamma)
    second = _h_scalar(
        model,
        [lambda h: gamma + 0 * h, lambda h: 2 * lam1 + 0 * h, lambda h: theta - gamma * (h + 1) + lam1 - lam0],
        [lambda h: lam1 - lam0 + 0 * h, lambda h: 2 * lam1 + gamma + 0 * h, lambda h: theta - gamma * (h + 1)],
    )
    third = _h_scalar(
        model,
        [lambda h: gamma + 0 * h, lambda h: theta - gamma * (h + 2) - lam1 - lam0],
        [lambda h: lam1 + lam0 + gamma + 0 * h, lambda h: theta - gamma * (h + 2)],
    )
    left = g0['A'] @ g1['B']
    right = exchange * g1['B'] @ g0['A'] - second[:, None] * (g0['B'] @ g1['A']) - third[:, None] * (g0['B'] @ g1['Dt'])
    return relative_residual(left, right)


def _rel_db(model, generators, lam0, lam1):
    theta, gamma = model.theta, model.gamma
    g0, g1 = generators(lam0), generators(lam1)
    first = _h_scalar(
        model,
        [lambda h: lam0 - lam1 + gamma + 0 * h, lambda h: lam1 + lam0 + 2 * gamma + 0 * h, lambda h: theta - gamma * h, lambda h: theta - gamma * (h + 1)],
        [lambda h: lam0 - lam1 + 0 * h, lambda h: lam1 + lam0 + gamma + 0 * h, lambda h: theta - gamma * (h - 1), lambda h: theta - gamma * (h + 2)],
    )
    second = _h_scalar(
        model,
        [lambda h: gamma + 0 * h, lambda h: 2 * lam0 + 2 * gamma + 0 * h, lambda h: theta - gamma * h, lambda h: theta - gamma * (h + 1) + lam0 - lam1],
        [lambda h: lam0 - lam1 + 0 * h, lambda h: 2 * lam0 + gamma + 0 * h, lambda h: theta - gamma * (h - 1), lambda h: theta - gamma * (h + 2)],
    )
    third = _h_scalar(
        model,
        [
            lambda h: 2 * lam0 + 2 * gamma + 0 * h,
            lambda h: 2 * lam1 + 0 * h,
            lambda h: gamma + 0 * h,
            lambda h: theta - gamma * h,
            lambda h: theta - gamma * h + lam0 + lam1,
        ],
        [
            lambda h: 2 * lam0 + gamma + 0 * h,
            lambda h: 2 * lam1 + gamma + 0 * h,
            lambda h: lam1 + lam0 + gamma + 0 * h,
            lambda h: theta - gamma * (h - 1),
            lambda h: theta - gamma * (h + 1),
        ],
    )
    left = g0['Dt'] @ g1['B']
    right = first[:, None] * (g1['B'] @ g0['Dt']) - second[:, None] * (g0['B'] @ g1['Dt']) + third[:, None] * (g0['B'] @ g1['A'])
    return relative_residual(left, right)


def _rel_abb(model, generators, lam0, lams):
    """𝒜_0 ∏_j ℬ_j expanded as in the derivation of the functional equation; needs len(lams) == L."""
    theta, gamma = model.theta, model.gamma
    n = len(lams)
    if n != model.L:
        raise ValueError(f"The A-B...B relation needs exactly L={model.L} spectral parameters, got {n}")
    all_lams = (lam0,) + tuple(lams)

    def b_product(skip):
        result = np.eye(2**model.L, dtype=complex)
        for nu, lam in enumerate(all_lams):
            if nu != skip:
                result = result @ generators(lam)['B']
        return result

    exchange = 1 + 0j
    for lam in lams:
        exchange *= model.bracket(lam - lam0 + gamma, lam + lam0) / model.bracket(lam - lam0, lam + lam0 + gamma)
    left = generators(lam0)['A'] @ b_product(0)
    right = exchange * b_product(0) @ generators(lam0)['A']
    outer = _h_scalar(model, [lambda h: theta - gamma * (h + 2 * n - 1)], [lambda h: theta - gamma * (h + 2 * n)])
    for i in range(1, n + 1):
        lam_i = all_lams[i]
        others = [all_lams[j] for j in range(1, n + 1) if j != i]
        a_product, d_product = 1 + 0j, 1 + 0j
        for lam_j in others:
            a_product *= model.bracket(lam_j - lam_i + gamma, lam_j + lam_i) / model.bracket(lam_j - lam_i, lam_j + lam_i + gamma)
            d_product *= model.bracket(lam_i - lam_j + gamma, lam_i + lam_j + 2 * gamma) / model.bracket(lam_i - lam_j, lam_i + lam_j + gamma)
        a_scalar = _h_scalar(
            model,
            [lambda h: gamma + 0 * h, lambda h: 2 * lam_i + 0 * h, lambda h: theta - gamma * (h + 1) + lam_i - lam0],
            [lambda h: lam_i - lam0 + 0 * h, lambda h: 2 * lam_i + gamma + 0 * h, lambda h: theta - gamma * (h + 1)],
        )
        d_scalar = _h_scalar(
            model,
            [lambda h: gamma + 0 * h, lambda h: theta - gamma * (h + 2) - lam_i - lam0],
            [lambda h: lam_i + lam0 + gamma + 0 * h, lambda h: theta - gamma * (h + 1)],
        )
        rest = b_product(i)
        right = right - (a_product * a_scalar)[:, None] * (rest @ generators(lam_i)['A'])
        right = right - (d_product * outer * d_scalar)[:, None] * (rest @ generators(lam_i)['Dt'])
    return relative_residual(left, right)


def _single_row_blocks(model, lam, theta):
    forward = monodromy_matrix(model, lam, FORWARD, theta=theta)
    backward = monodromy_matrix(model, lam, BACKWARD, theta=theta)
    blocks = {which: block(forward, which) for which in 'ABCD'}
    blocks.update({which + 'bar': block(backward, which) for which in 'ABCD'})
    return blocks


def _cbb(model, lam):
    theta, gamma = model.theta, model.gamma
    here = _single_row_blocks(model, lam, theta)
    up = _single_row_blocks(model, lam, theta + gamma)
    prefactor = model.f(gamma) / model.require(2 * lam + gamma, '[2*lambda+gamma]')
    dynamical = _h_scalar(model, [lambda h: theta - gamma * (h - 1) + 2 * lam], [lambda h: theta - gamma * (h - 1)])
    left = here['C'] @ here['Bbar']
    right = up['Bbar'] @ up['C'] + prefactor * (
        dynamical[:, None] * (up['Abar'] @ up['A']) - model.f(theta + gamma + 2 * lam) / model.f(theta + gamma) * (here['D'] @ here['Dbar'])
    )
    return relative_residual(left, right)


def _bcc(model, lam):
    theta, gamma = model.theta, model.gamma
    here = _single_row_blocks(model, lam, theta)
    down = _single_row_blocks(model, lam, theta - gamma)
    prefactor = model.f(gamma) / model.require(2 * lam + gamma, '[2*lambda+gamma]')
    dynamical = _h_scalar(model, [lambda h: theta - gamma * (h + 1) - 2 * lam], [lambda h: theta - gamma * (h + 1)])
    left = here['B'] @ here['Cbar']
    right = down['Cbar'] @ down['B'] + prefactor * (
        dynamical[:, None] * (down['Dbar'] @ down['D']) - model.f(theta - gamma - 2 * lam) / model.f(theta - gamma) * (here['A'] @ here['Abar'])
    )
    return relative_residual(left, right)


def b_crossing_factor(model: ModelInstance, lam: complex) -> complex:
    """ℬ(-λ-γ) = -[2λ+2γ, θ+ζ+λ] / [2λ, θ+ζ-λ-γ] ℬ(λ)."""
    theta, zeta, gamma = model.theta, model.zeta, model.gamma
    denominator = model.require(2 * lam, '[2*lambda]') * model.require(theta + zeta - lam - gamma, '[theta+zeta-lambda-gamma]')
    return -model.bracket(2 * lam + 2 * gamma, theta + zeta + lam) / denominator


def algebra_relation_residual(model: ModelInstance, relation: str, lam1: complex, lam2=None) -> float:
    """
    Normalized residual of one relation of the Yang-Baxter or reflection algebra, checked as a matrix identity.
    Functions of H multiply from the left. For REL_ABB lam2 is the sequence λ_1..λ_L; CBB, BCC and B_CROSSING
    only use lam1.
    """
    if relation not in RELATIONS:
        raise ValueError(f"Unknown relation {relation}, expected one of {RELATIONS}")
    logger.debug(f"Checking {relation} for L={model.L} at lambda={lam1}, {lam2}")
    if relation in (DYBA, DYBA_BAR, DYBA_TTBAR, DREA):
        return _two_auxiliary_relation(model, relation, complex(lam1), complex(lam2))
    if relation == CBB:
        return _cbb(model, complex(lam1))
    if relation == BCC:
        return _bcc(model, complex(lam1))
    generators = _Generators(model)
    if relation == B_CROSSING:
        lam = complex(lam1)
        return relative_residual(generators(-lam - model.gamma)['B'], b_crossing_factor(model, lam) * generators(lam)['B'])
    if relation == REL_BB:
        first, second = generators(lam1)['B'], generators(lam2)['B']
        return relative_residual(first @ second, second @ first)
    if relation == REL_AB:
        return _rel_ab(model, generators, complex(lam1), complex(lam2))
    if relation == REL_DB:
        return _rel_db(model, generators, complex(lam1), complex(lam2))
    return _rel_abb(model, generators, complex(lam1), tuple(complex(lam) for lam in lam2))


def double_row_weight_residuals(model: ModelInstance, lam: complex) -> Dict[str, float]:
    """Weight checks: 𝒯 commutes with h_0 + H, 𝒜 and 𝒟̃ have weight 0, ℬ weight -2 and 𝒞 weight +2."""
    operator = build_double_row(model, lam)
    residuals = {'T': operator.weight_residual()}
    for which in 'ABCD':
        residuals[which] = operator.block(which).weight_residual()
    residuals['Dt'] = d_tilde(model, lam).weight_residual()
    return residuals

