"""MIMO detectors with a scikit-learn style estimator API.

Every detector is ``fit`` on one channel realization (the expensive,
y-independent work such as factorizations and candidate enumeration
happens here) and then detects received vectors with ``predict`` /
``detect``. All detectors accept the stacked real channel (2Nr x 2Nt) or
a complex (Nr, Nt) matrix, and real (2Nr,) or complex (Nr,) received
vectors.

``detect`` returns a :class:`DetectionResult` with per-symbol stage tags
and solver diagnostics; ``predict`` returns just the symbol array and
also accepts a batch of received vectors, one per row.
"""

import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .admm import AdmmConfig, factorize, iterate_from_factor, solve
from .admm import _matvec  # shared kernel keeps fit/detect bit-identical to solve()
from .constellation import make_constellation
from .sparse import ActiveSet, reduce_problem, stacked_design_t
from .validation import as_real_channel, as_real_received, check_fitted

STAGE_NA = 0
STAGE_ONE = 1
STAGE_TWO = 2


@dataclass
class DetectionResult:
    """Detected symbols plus per-symbol provenance and solver statistics.

    ``stage`` holds STAGE_ONE / STAGE_TWO per symbol for the staged
    detectors and STAGE_NA for single-shot ones. ``iterations`` and
    ``converged`` carry one entry per solver stage actually run (empty for
    detectors without an iterative solver).
    """

    symbols: np.ndarray
    stage: np.ndarray
    iterations: tuple
    converged: tuple
    elapsed: float

    @property
    def all_converged(self):
        return all(self.converged) if self.converged else True


def classify_gray_zone(value, constellation, tau):
    """Stage-one reliability decision for one soft symbol value.

    Returns the detected alphabet symbol, or None when the value falls in
    the gray zone: strictly between two adjacent levels and more than
    ``tau`` away from each. Values outside the alphabet range clip to the
    nearest extreme level regardless of ``tau`` (there is no second
    bracketing symbol to defer between).
    """
    if not np.isfinite(value):
        raise ValueError("cannot classify a non-finite value")
    chi = constellation.alphabet
    if value <= chi[0]:
        return chi[0]
    if value >= chi[-1]:
        return chi[-1]
    right = int(np.searchsorted(chi, value))
    s_left, s_right = chi[right - 1], chi[right]
    if value - s_left <= tau:
        return s_left
    if s_right - value <= tau:
        return s_right
    return None


class BaseDetector(BaseEstimator):
    """Shared fit/predict plumbing; subclasses implement ``_detect``."""

    def fit(self, H, noise_var=0.0):
        """Condition the detector on a channel realization.

        Parameters
        ----------
        H : array
            Channel matrix, complex (Nr, Nt) or stacked real (2Nr, 2Nt).
        noise_var : float
            Complex noise variance sigma^2 per receive antenna (used by
            the linear detectors; the SNR convention is
            SNR = Nt * Es / sigma^2).
        """
        self.H_ = as_real_channel(H)
        self.noise_var_ = float(noise_var)
        self.constellation_ = make_constellation(self.modulation)
        self._prepare()
        return self

    def _prepare(self):
        pass

    def detect(self, y):
        """Detect one received vector; returns a full :class:`DetectionResult`."""
        check_fitted(self)
        y = as_real_received(y, self.H_.shape[0])
        t0 = time.perf_counter()
        result = self._detect(y)
        result.elapsed = time.perf_counter() - t0
        return result

    def predict(self, y):
        """Detected symbol vector(s) for one received vector or a batch of rows."""
        check_fitted(self)
        y = np.asarray(y)
        if y.ndim == 2:
            return np.stack([self.detect(row).symbols for row in y])
        return self.detect(y).symbols


class LassoADMMDetector(BaseDetector):
    """Single-shot sparse-coding detector.

    Builds the stacked l1 system for the fitted channel, solves it with
    ADMM, collapses the coefficient vector to soft symbols and quantizes
    each to the nearest alphabet level.

    Parameters mirror the CLI flags: ``lam`` is the sparsity penalty of
    the relaxed objective, ``mu`` the block-sum constraint weight,
    ``rho``/``eps``/``max_iter`` the ADMM controls.
    """

    def __init__(self, modulation=4, lam=10.0, mu=1e6, rho=10.0, eps=1e-4,
                 max_iter=5000):
        self.modulation = modulation
        self.lam = lam
        self.mu = mu
        self.rho = rho
        self.eps = eps
        self.max_iter = max_iter

    def _admm_config(self):
        return AdmmConfig(rho=self.rho, eps=self.eps, max_iter=self.max_iter,
                          l1_weight=self.lam / 2.0)

    def _prepare(self):
        # everything y-independent happens once per channel: the stacked
        # design and the normal-matrix inversion are reused by every
        # subsequent detect
        n_rows, n_blocks = self.H_.shape
        self._design_T = stacked_design_t(self.H_, self.constellation_,
                                          self.lam, self.mu)
        self._factor = factorize(self._design_T.T, self.rho)
        self._y_bar = np.empty(n_rows + n_blocks)
        self._y_bar[n_rows:] = np.sqrt(self.mu)

    def _stage_one(self, y):
        self._y_bar[: y.size] = y
        Atb = _matvec(self._design_T, self._y_bar)
        coef, state = iterate_from_factor(self._factor, Atb, self._admm_config())
        chi = self.constellation_.alphabet
        soft = coef.reshape(-1, len(chi)) @ chi
        return soft, state

    def _detect(self, y):
        soft, state = self._stage_one(y)
        return DetectionResult(
            symbols=self.constellation_.quantize(soft),
            stage=np.full(soft.size, STAGE_ONE, dtype=np.int8),
            iterations=(state.n_iter,),
            converged=(state.converged,),
            elapsed=0.0,
        )


class TwoStageLassoDetector(LassoADMMDetector):
    """Two-shot sparse-coding detector with interference cancellation.

    Stage one solves the full system; soft symbols within ``tau`` of an
    adjacent alphabet level are committed, the rest are deferred. The
    committed symbols' channel contribution is subtracted from the
    received vector and a reduced system over the deferred symbols is
    solved cold-started; its quantized output fills the deferred
    positions. Stage two is skipped when nothing was deferred.
    """

    def __init__(self, modulation=4, lam=10.0, mu=1e6, rho=10.0, eps=1e-4,
                 max_iter=5000, tau=0.6):
        super().__init__(modulation=modulation, lam=lam, mu=mu, rho=rho,
                         eps=eps, max_iter=max_iter)
        self.tau = tau

    def _detect(self, y):
        c = self.constellation_
        soft, state = self._stage_one(y)
        n = soft.size
        symbols = np.empty(n)
        stage = np.full(n, STAGE_ONE, dtype=np.int8)
        detected = {}
        deferred = []
        for i, v in enumerate(soft):
            s = classify_gray_zone(v, c, self.tau)
            if s is None:
                deferred.append(i)
                stage[i] = STAGE_TWO
            else:
                symbols[i] = s
                detected[i] = s

        if not deferred:
            return DetectionResult(symbols=symbols, stage=stage,
                                   iterations=(state.n_iter,),
                                   converged=(state.converged,), elapsed=0.0)
        if not detected:
            # nothing to cancel: a fresh cold-started solve of the full
            # system would retrace stage one, so quantize its output
            return DetectionResult(symbols=c.quantize(soft), stage=stage,
                                   iterations=(state.n_iter,),
                                   converged=(state.converged,), elapsed=0.0)

        active = ActiveSet(undetected=tuple(deferred), detected_values=detected)
        problem = reduce_problem(self.H_, y, active, c, self.lam, self.mu)
        coef, state2 = solve(problem, self._admm_config())
        symbols[deferred] = c.quantize(problem.symbols_from(coef))
        return DetectionResult(
            symbols=symbols, stage=stage,
            iterations=(state.n_iter, state2.n_iter),
            converged=(state.converged, state2.converged), elapsed=0.0,
        )


class MMSEDetector(BaseDetector):
    """Linear minimum mean-square error detector, then quantization.

    Estimates x = (H^T H + (sigma^2 / Es) I)^{-1} H^T y; the regularizer
    is the per-real-dimension noise-to-signal ratio (sigma^2/2 noise and
    Es/2 signal energy per real component, so the halves cancel). With
    sigma^2 = 0 this degenerates to zero-forcing least squares.
    """

    def __init__(self, modulation=4):
        self.modulation = modulation

    def _prepare(self):
        H = self.H_
        n = H.shape[1]
        if self.noise_var_ > 0:
            reg = self.noise_var_ / self.constellation_.symbol_energy
            self._gram = H.T @ H + reg * np.eye(n)
        else:
            self._gram = None  # fall back to least squares

    def _estimate(self, y):
        if self._gram is None:
            return np.linalg.lstsq(self.H_, y, rcond=None)[0]
        return np.linalg.solve(self._gram, self.H_.T @ y)

    def _detect(self, y):
        soft = self._estimate(y)
        return DetectionResult(
            symbols=self.constellation_.quantize(soft),
            stage=np.full(soft.size, STAGE_NA, dtype=np.int8),
            iterations=(), converged=(), elapsed=0.0,
        )


class ZeroForcingDetector(MMSEDetector):
    """Unregularized least-squares inversion of the channel, then quantization."""

    def _prepare(self):
        self._gram = None


class MLDetector(BaseDetector):
    """Exhaustive maximum-likelihood search over the symbol lattice.

    Enumerates all M^Nt candidate real vectors and returns the minimizer
    of ||y - H x||^2. Exact, exponential; intended as an oracle on small
    systems (fit refuses search spaces beyond ``max_candidates``).
    """

    _CHUNK = 4096

    def __init__(self, modulation=4, max_candidates=2**20):
        self.modulation = modulation
        self.max_candidates = max_candidates

    def _prepare(self):
        chi = self.constellation_.alphabet
        m = len(chi)
        n = self.H_.shape[1]
        n_cand = m**n
        if n_cand > self.max_candidates:
            raise ValueError(
                f"ML search space {m}^{n} = {n_cand} exceeds the "
                f"{self.max_candidates} candidate cap"
            )
        grids = np.meshgrid(*([chi] * n), indexing="ij")
        self._candidates = np.stack([g.ravel() for g in grids], axis=1)

    def _detect(self, y):
        best_val = np.inf
        best = None
        H = self.H_
        for start in range(0, len(self._candidates), self._CHUNK):
            block = self._candidates[start:start + self._CHUNK]
            d = block @ H.T - y
            costs = np.einsum("ij,ij->i", d, d)
            i = int(np.argmin(costs))
            if costs[i] < best_val:
                best_val = float(costs[i])
                best = block[i]
        return DetectionResult(
            symbols=best.copy(),
            stage=np.full(H.shape[1], STAGE_NA, dtype=np.int8),
            iterations=(), converged=(), elapsed=0.0,
        )


DETECTORS = {
    "lasso": LassoADMMDetector,
    "2lasso": TwoStageLassoDetector,
    "mmse": MMSEDetector,
    "zf": ZeroForcingDetector,
    "ml": MLDetector,
}


def make_detector(name, modulation, params=None):
    """Instantiate a registered detector by CLI name with shared parameters.

    ``params`` may carry lam/mu/rho/eps/max_iter/tau; each detector picks
    the subset it understands.
    """
    if name not in DETECTORS:
        raise ValueError(f"unknown detector {name!r}; expected one of {sorted(DETECTORS)}")
    cls = DETECTORS[name]
    kwargs = {"modulation": modulation}
    if params:
        accepted = cls().get_params()
        kwargs.update({k: v for k, v in params.items() if k in accepted})
    return cls(**kwargs)
