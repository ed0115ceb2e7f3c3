"""Sparse-coding formulation of real-model MIMO detection.

Each of the 2Nt real symbols is written as a linear combination of the m
alphabet levels, x = S a, where S is block diagonal with one row of
alphabet levels per symbol and a carries m coefficients per symbol.
Ideally a is one-hot per block, so the block sums satisfy B a = 1 with B
the matching block-diagonal ones matrix. Folding the sum constraint into
the data term with weight mu gives one standard-form l1 problem

    min 0.5 * ||y_bar - H_bar a||^2 + l1_weight * ||a||_1

with y_bar = [y; sqrt(mu) 1] and H_bar = [H S; sqrt(mu) B], which is what
the ADMM core consumes. The l1 weight is half the user-facing sparsity
penalty ``lam`` carried over from the norm-0 relaxation.
"""

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SparseProblem:
    """The stacked l1 system for one channel realization.

    ``H_bar``/``y_bar`` are the stacked design matrix and target;
    ``S``, ``B`` and ``H_tilde = H @ S`` are kept for mapping coefficient
    vectors back to symbols and for tests.
    """

    S: np.ndarray  # (2Nt, n_vars) block-diagonal symbol rows
    B: np.ndarray  # (2Nt, n_vars) block-diagonal ones rows
    H_tilde: np.ndarray  # (2Nr, n_vars)
    H_bar: np.ndarray  # (2Nr + 2Nt, n_vars)
    y_bar: np.ndarray  # (2Nr + 2Nt,)
    l1_weight: float  # lam / 2
    mu: float

    @property
    def n_vars(self):
        return self.H_bar.shape[1]

    @property
    def n_blocks(self):
        return self.S.shape[0]

    def symbols_from(self, coef):
        """Collapse a coefficient vector to soft symbol values, S @ coef."""
        m = self.n_vars // self.n_blocks
        return coef.reshape(self.n_blocks, m) @ self.S[0, :m]


@dataclass(frozen=True)
class ActiveSet:
    """Partition of symbol indices into already-detected and still-open."""

    undetected: tuple  # ordered symbol indices still to be detected
    detected_values: dict  # symbol index -> quantized alphabet value

    def __post_init__(self):
        overlap = set(self.undetected) & set(self.detected_values)
        if overlap:
            raise ValueError(f"indices both detected and undetected: {sorted(overlap)}")


def symbol_matrix(n_blocks, alphabet):
    """Block-diagonal S with one row (s_1 ... s_m) per symbol block."""
    m = len(alphabet)
    S = np.zeros((n_blocks, n_blocks * m))
    rows = np.arange(n_blocks)[:, None]
    cols = rows * m + np.arange(m)[None, :]
    S[rows, cols] = alphabet
    return S


def selector_matrix(n_blocks, m):
    """Block-diagonal B with one row of m ones per symbol block."""
    B = np.zeros((n_blocks, n_blocks * m))
    rows = np.arange(n_blocks)[:, None]
    cols = rows * m + np.arange(m)[None, :]
    B[rows, cols] = 1.0
    return B


def _check_penalties(lam, mu):
    if lam <= 0:
        raise ValueError("lam must be positive")
    if mu <= 100.0 * (lam / 2.0):
        warnings.warn(
            f"mu={mu:g} is not much larger than the l1 weight {lam / 2.0:g}; "
            "the block-sum constraint may be poorly enforced",
            stacklevel=3,
        )


def stacked_design(H, constellation, lam, mu):
    """The y-independent part of the stacked system: (S, B, H_tilde, H_bar).

    Split out so a detector fitted to one channel can cache the design
    and its factorization across received vectors.
    """
    H = np.asarray(H, dtype=float)
    _check_penalties(lam, mu)
    chi = constellation.alphabet
    m = len(chi)
    n_blocks = H.shape[1]
    S = symbol_matrix(n_blocks, chi)
    B = selector_matrix(n_blocks, m)
    # H @ S expands each channel column across the alphabet levels
    H_tilde = (H[:, :, None] * chi[None, None, :]).reshape(H.shape[0], n_blocks * m)
    H_bar = np.concatenate([H_tilde, np.sqrt(mu) * B], axis=0)
    return S, B, H_tilde, H_bar


def stacked_design_t(H, constellation, lam, mu):
    """Transpose of the stacked design matrix, built C-contiguous in place.

    Row (i*m + j) holds channel column i scaled by alphabet level j,
    followed by the sqrt(mu) block-sum entry in constraint column i.
    Detectors cache this layout because the solver's inner products run
    along it.
    """
    H = np.asarray(H, dtype=float)
    _check_penalties(lam, mu)
    chi = constellation.alphabet
    m = len(chi)
    n_rows, n_blocks = H.shape
    n = n_blocks * m
    out = np.empty((n, n_rows + n_blocks))
    out[:, :n_rows] = (H.T[:, None, :] * chi[None, :, None]).reshape(n, n_rows)
    out[:, n_rows:] = 0.0
    out[np.arange(n), n_rows + np.repeat(np.arange(n_blocks), m)] = np.sqrt(mu)
    return out


def stack_target(y, n_blocks, mu):
    """The matching stacked target [y; sqrt(mu) 1]."""
    y = np.asarray(y, dtype=float).ravel()
    return np.concatenate([y, np.full(n_blocks, np.sqrt(mu))])


def build_sparse_problem(H, y, constellation, lam, mu):
    """Assemble the stacked l1 system for real channel ``H`` and received ``y``.

    ``lam`` is the sparsity penalty of the relaxed detection objective
    (the stacked problem uses lam / 2); ``mu`` weighs the block-sum
    constraint rows and must dominate both.
    """
    H = np.asarray(H, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if H.shape[0] != y.shape[0]:
        raise ValueError(f"H has {H.shape[0]} rows but y has length {y.shape[0]}")
    S, B, H_tilde, H_bar = stacked_design(H, constellation, lam, mu)
    return SparseProblem(
        S=S, B=B, H_tilde=H_tilde, H_bar=H_bar,
        y_bar=stack_target(y, H.shape[1], mu),
        l1_weight=lam / 2.0, mu=float(mu),
    )


def reduce_problem(H, y, active, constellation, lam, mu):
    """Stage-two system after cancelling the detected symbols' contribution.

    Subtracts H[:, i] * value for every detected (i, value) from ``y`` and
    rebuilds the stacked system over the undetected symbol blocks only.
    """
    if not active.detected_values:
        raise ValueError("active set has no detected symbols; stage two equals stage one")
    if not active.undetected:
        raise ValueError("active set has no undetected symbols; skip stage two")
    H = np.asarray(H, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    chi = set(constellation.alphabet)
    det_idx = sorted(active.detected_values)
    det_val = np.array([active.detected_values[i] for i in det_idx])
    if not all(v in chi for v in det_val):
        raise ValueError("detected values must be alphabet symbols")
    y_reduced = y - H[:, det_idx] @ det_val
    return build_sparse_problem(
        H[:, list(active.undetected)], y_reduced, constellation, lam, mu
    )
