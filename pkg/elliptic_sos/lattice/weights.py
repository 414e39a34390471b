"""
Face weights, the dynamical R-matrix and the diagonal K-matrix, plus residuals of the local identities they satisfy.

R(λ, θ) acts on V ⊗ V in the basis (e_+e_+, e_+e_-, e_-e_+, e_-e_-), rows are outputs:

    a_+  0    0    0
    0    b_+  c_+  0
    0    c_-  b_-  0
    0    0    0    a_-
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from elliptic_sos.lattice.operators import PERMUTATION, SIGMA_Y, embed, partial_transpose, relative_residual
from elliptic_sos.lattice.theta import EllipticContext, eval_f, require_generic

DYBE = 'DYBE'
UNITARITY = 'UNITARITY'
CROSSING = 'CROSSING'
REFLECTION = 'REFLECTION'
LOCAL_IDENTITIES = (DYBE, UNITARITY, CROSSING, REFLECTION)


@dataclass(frozen=True)
class FaceWeights:
    a_plus: complex
    a_minus: complex
    b_plus: complex
    b_minus: complex
    c_plus: complex
    c_minus: complex

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.a_plus, 0, 0, 0],
                [0, self.b_plus, self.c_plus, 0],
                [0, self.c_minus, self.b_minus, 0],
                [0, 0, 0, self.a_minus],
            ],
            dtype=complex,
        )


@dataclass(frozen=True)
class KMatrix:
    k_plus: complex
    k_minus: complex

    def matrix(self) -> np.ndarray:
        return np.diag([self.k_plus, self.k_minus]).astype(complex)


def face_weights(ctx: EllipticContext, gamma: complex, lam: complex, theta: complex) -> FaceWeights:
    """a_± = [λ+γ], b_± = [λ][θ∓γ]/[θ], c_± = [θ∓λ][γ]/[θ]."""
    f_theta = require_generic(ctx, theta, '[theta]')
    a = eval_f(ctx, lam + gamma)
    f_lam = eval_f(ctx, lam)
    f_gamma = eval_f(ctx, gamma)
    return FaceWeights(
        a_plus=a,
        a_minus=a,
        b_plus=f_lam * eval_f(ctx, theta - gamma) / f_theta,
        b_minus=f_lam * eval_f(ctx, theta + gamma) / f_theta,
        c_plus=eval_f(ctx, theta - lam) * f_gamma / f_theta,
        c_minus=eval_f(ctx, theta + lam) * f_gamma / f_theta,
    )


def r_matrix(ctx: EllipticContext, gamma: complex, lam: complex, theta: complex) -> np.ndarray:
    return face_weights(ctx, gamma, lam, theta).matrix()


def r_matrix_21(ctx: EllipticContext, gamma: complex, lam: complex, theta: complex) -> np.ndarray:
    """R_21 = P R_12 P."""
    return PERMUTATION @ r_matrix(ctx, gamma, lam, theta) @ PERMUTATION


def k_matrix(ctx: EllipticContext, gamma: complex, zeta: complex, lam: complex, theta: complex) -> KMatrix:
    """k_+ = [ζ+λ][θ+ζ-λ]/[θ+ζ+λ], k_- = [ζ-λ]."""
    denominator = require_generic(ctx, theta + zeta + lam, '[theta+zeta+lambda]')
    return KMatrix(
        k_plus=eval_f(ctx, zeta + lam) * eval_f(ctx, theta + zeta - lam) / denominator,
        k_minus=eval_f(ctx, zeta - lam),
    )


def dynamical_r_matrix(ctx, gamma, lam, theta, n_legs, legs, shift_legs=(), swapped=False):
    """R(λ, θ - γ·w) on `legs` of an n_legs space, w the weight of `shift_legs`. swapped gives R_21."""
    cache = {}

    def factory(weight):
        if weight not in cache:
            build = r_matrix_21 if swapped else r_matrix
            cache[weight] = build(ctx, gamma, lam, theta - gamma * weight)
        return cache[weight]

    return embed(n_legs, legs, factory, shift_legs)


def _dybe_residual(ctx, gamma, theta, lambdas):
    lam1, lam2, lam3 = lambdas
    left = (
        dynamical_r_matrix(ctx, gamma, lam1 - lam2, theta, 3, (0, 1), shift_legs=(2,))
        @ dynamical_r_matrix(ctx, gamma, lam1 - lam3, theta, 3, (0, 2))
        @ dynamical_r_matrix(ctx, gamma, lam2 - lam3, theta, 3, (1, 2), shift_legs=(0,))
    )
    right = (
        dynamical_r_matrix(ctx, gamma, lam2 - lam3, theta, 3, (1, 2))
        @ dynamical_r_matrix(ctx, gamma, lam1 - lam3, theta, 3, (0, 2), shift_legs=(1,))
        @ dynamical_r_matrix(ctx, gamma, lam1 - lam2, theta, 3, (0, 1))
    )
    return relative_residual(left, right)


def _unitarity_residual(ctx, gamma, theta, lam):
    left = r_matrix(ctx, gamma, lam, theta) @ r_matrix_21(ctx, gamma, -lam, theta)
    right = eval_f(ctx, gamma + lam) * eval_f(ctx, gamma - lam) * np.eye(4)
    return relative_residual(left, right)


def crossed_r_matrix(ctx: EllipticContext, gamma: complex, lam: complex, theta: complex) -> np.ndarray:
    """
    -σ^y_1 :R^{t1}(-λ-γ, θ + γh_1): σ^y_1 f(θ - γh_2)/f(θ), which equals R_21(λ, θ).

    h_1 is read on the output leg of the transposed matrix, so rows with first-leg sign a come from
    R^{t1}(-λ-γ, θ + γa); f(θ - γh_2) acts on the input.
    """
    f_theta = require_generic(ctx, theta, '[theta]')
    transposed = np.zeros((4, 4), dtype=complex)
    for sign, rows in ((1, slice(0, 2)), (-1, slice(2, 4))):
        transposed[rows] = partial_transpose(r_matrix(ctx, gamma, -lam - gamma, theta + gamma * sign))[rows]
    sigma = np.kron(SIGMA_Y, np.eye(2))
    input_weights = np.array([1, -1, 1, -1])
    dynamical = np.diag([eval_f(ctx, theta - gamma * s) / f_theta for s in input_weights])
    return -sigma @ transposed @ sigma @ dynamical


def _crossing_residual(ctx, gamma, theta, lam):
    return relative_residual(crossed_r_matrix(ctx, gamma, lam, theta), r_matrix_21(ctx, gamma, lam, theta))


def _reflection_residual(ctx, gamma, theta, zeta, lambdas):
    lam1, lam2 = lambdas
    k1 = np.kron(k_matrix(ctx, gamma, zeta, lam1, theta).matrix(), np.eye(2))
    k2 = np.kron(np.eye(2), k_matrix(ctx, gamma, zeta, lam2, theta).matrix())
    left = r_matrix(ctx, gamma, lam1 - lam2, theta) @ k1 @ r_matrix_21(ctx, gamma, lam1 + lam2, theta) @ k2
    right = k2 @ r_matrix(ctx, gamma, lam1 + lam2, theta) @ k1 @ r_matrix_21(ctx, gamma, lam1 - lam2, theta)
    return relative_residual(left, right)


def local_identity_residual(
    ctx: EllipticContext,
    kind: str,
    *,
    gamma: complex,
    theta: complex,
    lambdas: Sequence[complex],
    zeta: Optional[complex] = None,
) -> float:
    """
    Normalized max-abs residual of one local identity:

    DYBE        lambdas = (λ1, λ2, λ3), on V⊗V⊗V with the dynamical shifts assembled per spectator sign
    UNITARITY   lambdas = (λ,)
    CROSSING    lambdas = (λ,)
    REFLECTION  lambdas = (λ1, λ2), needs zeta
    """
    lambdas = tuple(complex(lam) for lam in lambdas)
    if kind == DYBE:
        return _dybe_residual(ctx, gamma, theta, lambdas)
    if kind == UNITARITY:
        return _unitarity_residual(ctx, gamma, theta, lambdas[0])
    if kind == CROSSING:
        return _crossing_residual(ctx, gamma, theta, lambdas[0])
    if kind == REFLECTION:
        if zeta is None:
            raise ValueError("The reflection equation needs the boundary parameter zeta")
        return _reflection_residual(ctx, gamma, theta, zeta, lambdas)
    raise ValueError(f"Unknown local identity {kind}, expected one of {LOCAL_IDENTITIES}")
