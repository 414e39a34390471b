"""
Dense operators on tensor products of V = C², the two dimensional weight space with basis (e_+, e_-).

Basis states of n legs are integers whose bits read leg 0 as the most significant; bit 0 is e_+ (h = +1) and
bit 1 is e_- (h = -1). In the quantum space W = V^{⊗L} site j is leg j-1, and when an auxiliary leg is present it
is leg 0 in front of the sites.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PERMUTATION = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
BLOCKS = ('A', 'B', 'C', 'D')


def leg_bits(n_legs: int) -> np.ndarray:
    """bits[state, leg] for every basis state of n legs."""
    states = np.arange(2**n_legs)
    shifts = n_legs - 1 - np.arange(n_legs)
    return (states[:, None] >> shifts[None, :]) & 1


def leg_signs(n_legs: int) -> np.ndarray:
    return 1 - 2 * leg_bits(n_legs)


def total_weight(n_legs: int, legs: Optional[Sequence[int]] = None) -> np.ndarray:
    """Eigenvalue of Σ_{l in legs} h_l on every basis state (all legs when legs is None)."""
    signs = leg_signs(n_legs)
    if legs is None:
        return signs.sum(axis=1)
    if len(legs) == 0:
        return np.zeros(2**n_legs, dtype=int)
    return signs[:, list(legs)].sum(axis=1)


def embed(n_legs: int, legs: Sequence[int], factory: Callable[[int], np.ndarray], shift_legs: Sequence[int] = ()) -> np.ndarray:
    """
    Embed a matrix acting on `legs` (in that order) into the 2^n_legs dimensional space.

    The matrix may depend on the weight Σ_{l in shift_legs} h_l of spectator legs: factory(w) is called once per
    weight value that occurs, and the block for each spectator basis state uses the matrix for its weight. This is
    how dynamical shifts like R_12(λ, θ - γh_3) become plain matrices.
    """
    legs = list(legs)
    if set(legs) & set(shift_legs):
        raise ValueError(f"Shift legs {shift_legs} overlap the acting legs {legs}")
    k = len(legs)
    size = 2**n_legs
    bits = leg_bits(n_legs)
    states = np.arange(size)
    place = 1 << (n_legs - 1 - np.arange(n_legs))

    local = np.zeros(size, dtype=int)
    for position, leg in enumerate(legs):
        local += bits[:, leg] << (k - 1 - position)
    rest = states - (bits[:, legs] * place[legs]).sum(axis=1)
    offsets = np.zeros(2**k, dtype=int)
    local_bits = leg_bits(k)
    for position, leg in enumerate(legs):
        offsets += local_bits[:, position] * place[leg]

    weights = total_weight(n_legs, shift_legs)
    full = np.zeros((size, size), dtype=complex)
    for weight in np.unique(weights):
        matrix = np.asarray(factory(int(weight)), dtype=complex)
        columns = states[weights == weight]
        rows = rest[columns][:, None] + offsets[None, :]
        full[rows, columns[:, None]] = matrix[:, local[columns]].T
    return full


def weight_function(n_legs: int, function: Callable[[np.ndarray], np.ndarray], legs: Optional[Sequence[int]] = None) -> np.ndarray:
    """Diagonal operator g(H) where H = Σ h over `legs`; the vector of diagonal entries is returned."""
    return np.asarray(function(total_weight(n_legs, legs)), dtype=complex)


def partial_transpose(matrix: np.ndarray) -> np.ndarray:
    """Transpose of the first of two legs: (X^{t1})_{o1 o2, i1 i2} = X_{i1 o2, o1 i2}."""
    tensor = matrix.reshape(2, 2, 2, 2)
    return tensor.transpose(2, 1, 0, 3).reshape(4, 4)


def block(op: np.ndarray, which: str) -> np.ndarray:
    """Auxiliary space block of an operator on V_0 ⊗ W: A=(+,+), B=(+,-), C=(-,+), D=(-,-)."""
    if which not in BLOCKS:
        raise ValueError(f"Unknown block {which}, expected one of {BLOCKS}")
    half = op.shape[0] // 2
    rows = slice(0, half) if which in ('A', 'B') else slice(half, None)
    columns = slice(0, half) if which in ('A', 'C') else slice(half, None)
    return op[rows, columns]


def assemble(blocks: Dict[str, np.ndarray]) -> np.ndarray:
    return np.block([[blocks['A'], blocks['B']], [blocks['C'], blocks['D']]])


def relative_residual(left: np.ndarray, right: np.ndarray) -> float:
    """max |left - right| normalized by the larger of the two max-abs entries."""
    scale = max(np.max(np.abs(left)), np.max(np.abs(right)))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(left - right)) / scale)


@dataclass(frozen=True)
class LatticeOperator:
    """
    A dense operator on W = V^{⊗L}, or on V_0 ⊗ W when `auxiliary` is set, together with the weight it claims to
    carry: H·X - X·H = weight·X. For operators on V_0 ⊗ W the auxiliary leg counts towards H.
    """

    matrix: np.ndarray
    sites: int
    auxiliary: bool = False
    weight: int = 0

    @property
    def n_legs(self) -> int:
        return self.sites + 1 if self.auxiliary else self.sites

    @property
    def dim(self) -> int:
        return 2**self.n_legs

    def weight_residual(self) -> float:
        h = total_weight(self.n_legs).astype(complex)
        commutator = h[:, None] * self.matrix - self.matrix * h[None, :]
        scale = np.max(np.abs(self.matrix))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(commutator - self.weight * self.matrix)) / scale)

    def block(self, which: str) -> 'LatticeOperator':
        if not self.auxiliary:
            raise ValueError("Only operators with an auxiliary leg have blocks")
        weights = {'A': 0, 'B': -2, 'C': 2, 'D': 0}
        return LatticeOperator(block(self.matrix, which), self.sites, auxiliary=False, weight=self.weight + weights[which])
