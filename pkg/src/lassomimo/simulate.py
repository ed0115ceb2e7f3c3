"""Monte Carlo bit-error-rate campaigns over an SNR grid.

One trial is one block-fading realization: draw a fresh channel, draw one
random bit payload, modulate, transmit at the trial's noise level, run
every campaign detector on the same received vector, and count bit
errors. Trials are deterministic functions of (seed, snr_db, trial index)
through per-trial derived RNG streams, so campaign results do not depend
on how trials are scheduled across workers.

Trials execute in fixed-size batches; a point stops at the first batch
boundary where at least ``min_bits`` bits were sent and every detector
collected ``MIN_ERRORS_EARLY_STOP`` bit errors (or the trial cap is hit).
Evaluating the stopping rule only between batches keeps the executed
trial set, and therefore every count, identical for any worker count.
"""

import os
import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .channel import draw_channel, noise_var_for_snr, to_real, transmit, unstack_real
from .constellation import make_constellation
from .detectors import make_detector

MIN_ERRORS_EARLY_STOP = 100
TRIAL_BATCH = 128  # stopping-rule granularity; constant so results never depend on workers

WORKERS_ENV_VAR = "LASSOMIMO_WORKERS"


@dataclass(frozen=True)
class Campaign:
    """Full specification of one BER experiment."""

    n_tx: int = 16
    n_rx: int = 16
    modulation: int = 4
    detectors: tuple = ("lasso", "2lasso", "mmse")
    snr_db: tuple = tuple(float(s) for s in range(0, 17, 2))
    min_bits: int = 20000
    max_trials: int = 10000
    seed: int = 1
    params: dict = field(default_factory=dict)  # lam/mu/rho/tau/eps/max_iter

    def __post_init__(self):
        if not self.snr_db:
            raise ValueError("snr_db grid must be nonempty")
        if self.min_bits < 1000:
            raise ValueError("min_bits must be at least 1000")
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")

    @property
    def bits_per_trial(self):
        c = make_constellation(self.modulation)
        return 2 * self.n_tx * c.bits_per_pam


@dataclass
class BerPoint:
    """Aggregated result for one (snr, detector) pair."""

    snr_db: float
    detector: str
    bits_sent: int
    bit_errors: int
    avg_admm_iters: float
    avg_solve_ms: float
    nonconverged_count: int

    @property
    def ber(self):
        return self.bit_errors / self.bits_sent if self.bits_sent else 0.0

    @property
    def ci95(self):
        """Binomial 95% half-width under the normal approximation."""
        if not self.bits_sent:
            return 0.0
        p = self.ber
        return float(1.96 * np.sqrt(p * (1.0 - p) / self.bits_sent))


@dataclass
class TrialStats:
    """Per-detector outcome of a single trial."""

    bits: int = 0
    bit_errors: int = 0
    iterations: int = 0
    solve_seconds: float = 0.0
    nonconverged: int = 0

    def add(self, other):
        self.bits += other.bits
        self.bit_errors += other.bit_errors
        self.iterations += other.iterations
        self.solve_seconds += other.solve_seconds
        self.nonconverged += other.nonconverged


def _trial_rng(seed, snr_db, trial_index):
    # the dB value enters through its exact bit pattern so equal floats
    # always derive the same stream
    snr_key = int(np.float64(snr_db).view(np.uint64))
    return np.random.default_rng(np.random.SeedSequence([seed, snr_key, trial_index]))


def run_trial(campaign, snr_db, trial_index, detectors=None):
    """Run one trial; returns {detector name: TrialStats}.

    Deterministic given (campaign.seed, snr_db, trial_index). Detector
    instances may be passed in to amortize construction across trials;
    they are re-fit here. A detector that raises is recorded as a
    nonconverged zero-bit entry rather than aborting the campaign.
    """
    rng = _trial_rng(campaign.seed, snr_db, trial_index)
    c = make_constellation(campaign.modulation)
    sigma2 = noise_var_for_snr(snr_db, campaign.n_tx, c.symbol_energy)

    channel = draw_channel(campaign.n_tx, campaign.n_rx, rng, noise_var=sigma2)
    bits = rng.integers(0, 2, size=campaign.bits_per_trial)
    x = c.map_bits(bits)
    y_complex = transmit(channel, unstack_real(x), rng)
    model = to_real(channel, y_complex)

    if detectors is None:
        detectors = {
            name: make_detector(name, campaign.modulation, campaign.params)
            for name in campaign.detectors
        }
    out = {}
    for name, det in detectors.items():
        t0 = time.perf_counter()
        try:
            det.fit(model.H, noise_var=sigma2)
            result = det.detect(model.y)
        except Exception:
            out[name] = TrialStats(nonconverged=1)
            continue
        solve_seconds = time.perf_counter() - t0  # conditioning + detection
        detected_bits = c.demap_symbols(result.symbols)
        out[name] = TrialStats(
            bits=bits.size,
            bit_errors=int(np.sum(detected_bits != bits)),
            iterations=int(sum(result.iterations)),
            solve_seconds=solve_seconds,
            nonconverged=0 if result.all_converged else 1,
        )
    return out


def _run_batch(campaign, snr_db, start, stop):
    detectors = {
        name: make_detector(name, campaign.modulation, campaign.params)
        for name in campaign.detectors
    }
    totals = {name: TrialStats() for name in campaign.detectors}
    trial_count = 0
    for t in range(start, stop):
        for name, stats in run_trial(campaign, snr_db, t, detectors).items():
            totals[name].add(stats)
        trial_count += 1
    return totals, trial_count


def resolve_workers(workers=None):
    """Worker count: explicit argument, else $LASSOMIMO_WORKERS, else 1."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV_VAR)
    return max(1, int(env)) if env else 1


def run_campaign(campaign, workers=None, on_point=None):
    """Run every (snr, detector) point; returns a list of BerPoint.

    ``on_point`` is called with each completed BerPoint (the CLI uses it
    for progress and partial-result flushing). Aggregate bit and error
    counts are a pure function of the campaign, independent of
    ``workers``.
    """
    if not campaign.detectors:
        return []
    workers = resolve_workers(workers)
    pool = Parallel(n_jobs=workers) if workers > 1 else None
    points = []
    for snr_db in campaign.snr_db:
        totals = {name: TrialStats() for name in campaign.detectors}
        trials_done = 0
        bits_sent = 0
        while trials_done < campaign.max_trials:
            stop = min(trials_done + TRIAL_BATCH, campaign.max_trials)
            if pool is None:
                batches = [_run_batch(campaign, snr_db, trials_done, stop)]
            else:
                bounds = np.linspace(trials_done, stop, workers + 1).astype(int)
                batches = pool(
                    delayed(_run_batch)(campaign, snr_db, a, b)
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if b > a
                )
            for batch_totals, batch_trials in batches:
                for name in totals:
                    totals[name].add(batch_totals[name])
                trials_done += batch_trials
            bits_sent = max(s.bits for s in totals.values())
            if bits_sent >= campaign.min_bits and all(
                s.bit_errors >= MIN_ERRORS_EARLY_STOP for s in totals.values()
            ):
                break
        for name in campaign.detectors:
            s = totals[name]
            point = BerPoint(
                snr_db=float(snr_db),
                detector=name,
                bits_sent=s.bits,
                bit_errors=s.bit_errors,
                avg_admm_iters=s.iterations / trials_done if trials_done else 0.0,
                avg_solve_ms=1e3 * s.solve_seconds / trials_done if trials_done else 0.0,
                nonconverged_count=s.nonconverged,
            )
            points.append(point)
            if on_point is not None:
                on_point(point)
    return points
