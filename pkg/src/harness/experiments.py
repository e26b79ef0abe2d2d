"""
Experiment runners.

Monte-Carlo trials are seeded per (operating point, trial) and evaluated in
fixed-size batches; the early-stop rule is checked between batches, so the
set of trials that contributes to a result does not depend on the number of
workers.
"""
import logging
import time
import tracemalloc
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from threading import Lock
from typing import Callable, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from analysis import (
    CapacityMethod,
    EffectiveSpectrum,
    constrained_capacity,
    parallel_rate,
    predict_ber,
    se_fixed_point,
    se_trajectory,
)
from channel import ChannelMatrix, generate_channel, identity_channel
from detectors import DetectorVariant, LinearSolver, run_detector
from harness.seeding import complex_noise, trial_streams
from models.experiment_models import ChannelModel, ExperimentConfig, ExperimentKind, PaScheme
from models.result_models import ResultRecord
from power import (
    PowerProfile,
    channel_singular_values,
    optimize_pa_capacity,
    optimize_pa_map,
    water_filling,
    write_power_profile,
)
from prior import GaussianPrior, SignalPrior, make_prior
from transforms import concentration_slope, equivalent_operator, make_transform, universality_diagnostic
from utils.errors import MultipleFixedPointsError
from utils.formatting import db_to_linear, nats_to_bits

logger = logging.getLogger(__name__)

TRIAL_BATCH = 8
UNIFORM_DENSE_LIMIT = 4096
BENCH_TOL = 1e-300


def noise_variance(snr_db: float) -> float:
    """sigma^2 for unit-power symbols on a unit-energy channel."""
    return 1.0 / db_to_linear(snr_db)


def draw_channel(cfg: ExperimentConfig, channel_seed: int, n: Optional[int] = None,
                 dense_limit: int = UNIFORM_DENSE_LIMIT) -> ChannelMatrix:
    n = n or cfg.system.n
    if cfg.system.channel_model is ChannelModel.IDENTITY:
        return identity_channel(n)
    spec = cfg.system.channel.model_copy(update={"n": n, "seed": channel_seed})
    return generate_channel(spec, dense_limit=dense_limit)


def allocate_power(scheme, sigmas: np.ndarray, prior: SignalPrior, noise_var: float,
                   p_sum: Optional[float] = None) -> PowerProfile:
    """Power profile of one scheme over singular values ``sigmas``; P_sum defaults to N."""
    scheme = PaScheme(scheme)
    p_sum = float(sigmas.size) if p_sum is None else p_sum
    if scheme is PaScheme.AVERAGE:
        return PowerProfile.uniform(sigmas.size, p_sum)
    if scheme is PaScheme.MAP:
        return optimize_pa_map(sigmas, prior, noise_var, p_sum)
    if scheme is PaScheme.CAPACITY:
        return optimize_pa_capacity(sigmas, prior, noise_var, p_sum)
    return water_filling(sigmas ** 2 / noise_var, p_sum)


class ProfileCache:
    """Power profiles keyed by (scheme, noise variance, singular values), shared by worker threads."""

    def __init__(self, prior: SignalPrior):
        self.prior = prior
        self._profiles: Dict[tuple, PowerProfile] = {}
        self._lock = Lock()
        self.misses = 0

    def get(self, scheme, sigmas: np.ndarray, noise_var: float) -> PowerProfile:
        key = (PaScheme(scheme), float(noise_var), np.ascontiguousarray(sigmas, dtype=float).tobytes())
        with self._lock:
            cached = self._profiles.get(key)
        if cached is not None:
            return cached
        profile = allocate_power(scheme, sigmas, self.prior, noise_var)
        with self._lock:
            if key not in self._profiles:
                self.misses += 1
            return self._profiles.setdefault(key, profile)


def uniform_spectrum(channel: ChannelMatrix, noise_var: float) -> Optional[EffectiveSpectrum]:
    if channel.spectral.singular_values is None:
        return None
    sigmas = channel.spectral.padded_singular_values(channel.n)
    return EffectiveSpectrum.from_singular_values(sigmas, np.ones(channel.n), noise_var)


def _mean_stderr(values):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


@dataclass
class TrialOutcome:
    bit_errors: int
    bits: int
    mse: Optional[np.ndarray]
    predicted_ber: Optional[float]
    spectrum: Optional[EffectiveSpectrum]


class TrialRunner:
    """Batches trials over a thread pool with a tqdm bar."""

    def __init__(self, workers: int, progress: bool = True):
        self.workers = workers
        self.progress = progress

    def run(self, fn: Callable[[int], object], trials: int, stop=None, desc: str = "") -> list:
        outcomes = []
        with ThreadPoolExecutor(max_workers=self.workers) as pool, \
                tqdm(total=trials, desc=desc, leave=False, disable=None if self.progress else True) as bar:
            for start in range(0, trials, TRIAL_BATCH):
                batch = list(pool.map(fn, range(start, min(start + TRIAL_BATCH, trials))))
                outcomes.extend(batch)
                bar.update(len(batch))
                if stop is not None and stop(outcomes):
                    break
        return outcomes


def _safe_predict_ber(spectrum: EffectiveSpectrum, prior: SignalPrior) -> Optional[float]:
    try:
        return predict_ber(spectrum, prior)
    except MultipleFixedPointsError as e:
        logger.warning("replica BER skipped: %s", e)
        return None


def detection_trial(cfg: ExperimentConfig, prior: SignalPrior, scheme: PaScheme,
                    snr_index: int, noise_var: float, trial: int,
                    profiles: Optional[ProfileCache] = None) -> TrialOutcome:
    """Draw channel, transform, symbols and noise for one trial and detect."""
    streams = trial_streams(cfg.seed, snr_index, trial)
    n = cfg.system.n
    channel = draw_channel(cfg, streams.channel_seed)
    s, bits = prior.sample(n, streams.symbols)

    if scheme is PaScheme.AVERAGE:
        effective = channel
        spectrum = uniform_spectrum(channel, noise_var)
    else:
        sigmas = channel_singular_values(channel)
        if profiles is None:
            profile = allocate_power(scheme, sigmas, prior, noise_var)
        else:
            profile = profiles.get(scheme, sigmas, noise_var)
        amplitudes = sigmas * np.sqrt(profile.p)
        spectrum = EffectiveSpectrum.from_singular_values(sigmas, profile.p, noise_var)
        if scheme is PaScheme.SVD_PARALLEL:
            y = amplitudes * s + complex_noise(streams.noise, n, noise_var)
            scaled = np.divide(y, amplitudes, out=np.zeros(n, dtype=complex), where=amplitudes > 0.0)
            errors = int(np.sum(prior.hard_decide(scaled) != bits))
            predicted = float(np.mean(prior.map_ber(spectrum.gains)))
            return TrialOutcome(errors, bits.size, None, predicted, spectrum)
        effective = ChannelMatrix.from_diagonal(amplitudes)

    transform = make_transform(cfg.system.transform_kind, n, streams.transform_seed)
    y = effective.apply(transform.apply(s)) + complex_noise(streams.noise, effective.m, noise_var)
    trajectory = run_detector(y, effective, transform, prior, noise_var, cfg.detector, truth=s)
    errors = int(np.sum(trajectory.decisions != bits)) if trajectory.decisions is not None else 0
    predicted = None
    if spectrum is not None and prior.bits_per_symbol:
        predicted = _safe_predict_ber(spectrum, prior)
    return TrialOutcome(errors, bits.size, np.asarray(trajectory.mse), predicted, spectrum)


def _ber_experiment(cfg: ExperimentConfig, prior: SignalPrior, runner: TrialRunner, **_) -> List[ResultRecord]:
    records = []
    profiles = ProfileCache(prior)
    for scheme in cfg.schemes:
        for j, snr_db in enumerate(cfg.system.snr_grid_db):
            noise_var = noise_variance(snr_db)
            started = time.perf_counter()
            outcomes = runner.run(
                partial(detection_trial, cfg, prior, scheme, j, noise_var, profiles=profiles),
                cfg.trials,
                stop=lambda outs: sum(o.bit_errors for o in outs) >= cfg.max_bit_errors,
                desc=f"ber {scheme.value} {snr_db:g} dB",
            )
            wall_ms = 1e3 * (time.perf_counter() - started)
            errors = sum(o.bit_errors for o in outcomes)
            bits = sum(o.bits for o in outcomes)
            ber = errors / bits
            common = dict(experiment="ber", seed=cfg.seed, snr_db=snr_db, scheme=scheme.value,
                          trials=len(outcomes), wall_time_ms=wall_ms)
            records.append(ResultRecord(metric="ber", value=ber, stderr=float(np.sqrt(ber * (1.0 - ber) / bits)), **common))
            records.append(ResultRecord(metric="bit_errors", value=errors, **common))
            predicted = [o.predicted_ber for o in outcomes if o.predicted_ber is not None]
            if predicted:
                mean, stderr = _mean_stderr(predicted)
                records.append(ResultRecord(metric="predicted_ber", value=mean, stderr=stderr, **common))
            logger.info("ber %s %.1f dB: %d/%d bit errors over %d trials", scheme.value, snr_db, errors, bits, len(outcomes))
    return records


def _padded(mse: np.ndarray, length: int) -> np.ndarray:
    out = np.empty(length)
    k = min(length, mse.size)
    out[:k] = mse[:k]
    out[k:] = mse[k - 1] if k else np.nan
    return out


def _se_experiment(cfg: ExperimentConfig, prior: SignalPrior, runner: TrialRunner, **_) -> List[ResultRecord]:
    iterations = cfg.se_iterations
    detector = cfg.detector.model_copy(update={"max_iters": max(cfg.detector.max_iters, iterations)})
    run_cfg = cfg.model_copy(update={"detector": detector})
    profiles = ProfileCache(prior)
    records = []
    for j, snr_db in enumerate(cfg.system.snr_grid_db):
        noise_var = noise_variance(snr_db)
        started = time.perf_counter()
        outcomes = runner.run(partial(detection_trial, run_cfg, prior, cfg.pa_scheme, j, noise_var, profiles=profiles),
                              cfg.trials, desc=f"se {snr_db:g} dB")
        wall_ms = 1e3 * (time.perf_counter() - started)
        empirical = np.vstack([_padded(o.mse, iterations) for o in outcomes])
        common = dict(experiment="se", seed=cfg.seed, snr_db=snr_db, scheme=cfg.pa_scheme.value,
                      trials=len(outcomes), wall_time_ms=wall_ms)
        for t in range(iterations):
            mean, stderr = _mean_stderr(empirical[:, t])
            records.append(ResultRecord(metric="empirical_mse", value=mean, stderr=stderr, iteration=t + 1, **common))

        spectra = [o.spectrum for o in outcomes if o.spectrum is not None]
        if not spectra:
            continue
        predicted = np.mean([se_trajectory(spec, prior, iterations)[1] for spec in spectra], axis=0)
        for t in range(iterations):
            records.append(ResultRecord(metric="predicted_mse", value=predicted[t], iteration=t + 1, **common))
        gap = np.max(np.abs(empirical.mean(axis=0) - predicted) / np.maximum(predicted, 1e-300))
        records.append(ResultRecord(metric="max_relative_gap", value=gap, **common))
    return records


def _pa_experiment(cfg: ExperimentConfig, prior: SignalPrior, runner: TrialRunner,
                   profile_dir: Optional[Path] = None, **_) -> List[ResultRecord]:
    records = []
    for j, snr_db in enumerate(cfg.system.snr_grid_db):
        noise_var = noise_variance(snr_db)
        channel = draw_channel(cfg, trial_streams(cfg.seed, j, 0).channel_seed)
        sigmas = channel_singular_values(channel)
        for scheme in cfg.schemes:
            started = time.perf_counter()
            profile = allocate_power(scheme, sigmas, prior, noise_var)
            spectrum = EffectiveSpectrum.from_singular_values(sigmas, profile.p, noise_var)
            if scheme is PaScheme.SVD_PARALLEL:
                rho_star = None
                capacity = parallel_rate(spectrum, prior)
                ber = float(np.mean(prior.map_ber(spectrum.gains))) if prior.bits_per_symbol else None
            else:
                rho_star = se_fixed_point(spectrum, prior).rho_star
                capacity = constrained_capacity(spectrum, prior, CapacityMethod.AREA)
                ber = prior.map_ber(rho_star) if prior.bits_per_symbol else None
            wall_ms = 1e3 * (time.perf_counter() - started)

            common = dict(experiment="pa", seed=cfg.seed, snr_db=snr_db, scheme=scheme.value,
                          trials=1, wall_time_ms=wall_ms)
            if rho_star is not None:
                records.append(ResultRecord(metric="rho_star", value=rho_star, **common))
            if ber is not None:
                records.append(ResultRecord(metric="predicted_ber", value=ber, **common))
            records.append(ResultRecord(metric="capacity_nats", value=capacity, **common))
            records.append(ResultRecord(metric="capacity_bits", value=nats_to_bits(capacity), **common))
            records.append(ResultRecord(metric="p_min", value=profile.p.min(), **common))
            records.append(ResultRecord(metric="p_max", value=profile.p.max(), **common))
            if profile_dir is not None:
                write_power_profile(profile, sigmas, Path(profile_dir) / f"profile_{scheme.value}_snr{j}.csv")
    return records


def capacity_trial(cfg: ExperimentConfig, prior: SignalPrior, snr_index: int, noise_var: float,
                   trial: int) -> Dict[str, float]:
    """Rates in nats of every configured scheme on one channel draw."""
    channel = draw_channel(cfg, trial_streams(cfg.seed, snr_index, trial).channel_seed)
    sigmas = channel_singular_values(channel)
    rates = {}
    for scheme in cfg.schemes:
        profile = allocate_power(scheme, sigmas, prior, noise_var)
        spectrum = EffectiveSpectrum.from_singular_values(sigmas, profile.p, noise_var)
        if scheme is PaScheme.SVD_PARALLEL:
            rates["svd_parallel_gaussian"] = parallel_rate(spectrum, GaussianPrior())
            rates[scheme.value] = parallel_rate(spectrum, prior)
        else:
            rates[scheme.value] = constrained_capacity(spectrum, prior, CapacityMethod.AREA)
    return rates


def _capacity_experiment(cfg: ExperimentConfig, prior: SignalPrior, runner: TrialRunner, **_) -> List[ResultRecord]:
    records = []
    for j, snr_db in enumerate(cfg.system.snr_grid_db):
        started = time.perf_counter()
        outcomes = runner.run(partial(capacity_trial, cfg, prior, j, noise_variance(snr_db)),
                              cfg.trials, desc=f"capacity {snr_db:g} dB")
        wall_ms = 1e3 * (time.perf_counter() - started)
        for label in outcomes[0]:
            mean, stderr = _mean_stderr([o[label] for o in outcomes])
            common = dict(experiment="capacity", seed=cfg.seed, snr_db=snr_db, scheme=label,
                          trials=len(outcomes), wall_time_ms=wall_ms)
            records.append(ResultRecord(metric="rate_nats", value=mean, stderr=stderr, **common))
            records.append(ResultRecord(metric="rate_bits", value=nats_to_bits(mean),
                                        stderr=nats_to_bits(stderr), **common))
    return records


def universality_trial(cfg: ExperimentConfig, size_index: int, n: int, k: int, trial: int) -> float:
    streams = trial_streams(cfg.seed, size_index, trial)
    channel = draw_channel(cfg, streams.channel_seed, n=n, dense_limit=0)
    transform = make_transform(cfg.system.transform_kind, n, streams.transform_seed)
    return universality_diagnostic(equivalent_operator(channel, transform), k=k)


def _universality_experiment(cfg: ExperimentConfig, prior: SignalPrior, runner: TrialRunner, **_) -> List[ResultRecord]:
    records = []
    scheme = cfg.system.transform_kind.value
    for k in cfg.k_values:
        means = []
        for i, n in enumerate(cfg.sizes):
            started = time.perf_counter()
            values = runner.run(partial(universality_trial, cfg, i, n, k), cfg.trials, desc=f"universality k={k} N={n}")
            mean, stderr = _mean_stderr(values)
            means.append(mean)
            records.append(ResultRecord(
                experiment="universality", metric=f"diagnostic_k{k}_n{n}", value=mean, stderr=stderr,
                scheme=scheme, trials=len(values), seed=cfg.seed,
                wall_time_ms=1e3 * (time.perf_counter() - started),
            ))
        if len(cfg.sizes) >= 2 and min(means) > 0.0:
            records.append(ResultRecord(experiment="universality", metric=f"slope_k{k}",
                                        value=concentration_slope(cfg.sizes, means), scheme=scheme,
                                        trials=cfg.trials, seed=cfg.seed))
    return records


def _bench_run(cfg: ExperimentConfig, prior: SignalPrior, variant: DetectorVariant, size_index: int,
               n: int, trial: int, track_memory: bool = False):
    streams = trial_streams(cfg.seed, size_index, trial)
    channel = draw_channel(cfg, streams.channel_seed, n=n, dense_limit=0)
    transform = make_transform(cfg.system.transform_kind, n, streams.transform_seed)
    noise_var = noise_variance(cfg.system.snr_grid_db[0])
    s, _ = prior.sample(n, streams.symbols)
    y = channel.apply(transform.apply(s)) + complex_noise(streams.noise, channel.m, noise_var)
    solver = LinearSolver.SVD if variant is DetectorVariant.CD_OAMP else cfg.detector.linear_solver
    detector = cfg.detector.model_copy(update={"variant": variant, "convergence_tol": BENCH_TOL,
                                               "linear_solver": solver})
    if track_memory:
        tracemalloc.start()
    started = time.perf_counter()
    run_detector(y, channel, transform, prior, noise_var, detector)
    elapsed = time.perf_counter() - started
    peak = None
    if track_memory:
        peak = tracemalloc.get_traced_memory()[1]
        tracemalloc.stop()
    return elapsed, peak


def _bench_experiment(cfg: ExperimentConfig, prior: SignalPrior, runner: TrialRunner, **_) -> List[ResultRecord]:
    """Wall time against N at fixed K, T; timed runs are sequential."""
    records = []
    for variant in (DetectorVariant.CD_MAMP, DetectorVariant.CD_OAMP):
        sizes, times, peaks = [], [], []
        for i, n in enumerate(cfg.sizes):
            if variant is DetectorVariant.CD_OAMP and n > cfg.detector.svd_limit:
                logger.info("skipping dense CD-OAMP at N=%d (svd_limit %d)", n, cfg.detector.svd_limit)
                continue
            elapsed = [_bench_run(cfg, prior, variant, i, n, t)[0] for t in range(cfg.trials)]
            median = float(np.median(elapsed))
            _, stderr = _mean_stderr(elapsed)
            sizes.append(n)
            times.append(median)
            common = dict(experiment="bench", scheme=variant.value, trials=cfg.trials, seed=cfg.seed)
            records.append(ResultRecord(metric=f"wall_time_ms_n{n}", value=1e3 * median, stderr=1e3 * stderr,
                                        wall_time_ms=1e3 * sum(elapsed), **common))
            if variant is DetectorVariant.CD_MAMP:
                _, peak = _bench_run(cfg, prior, variant, i, n, 0, track_memory=True)
                peaks.append(peak)
                records.append(ResultRecord(metric=f"peak_bytes_n{n}", value=peak, **common))
        if len(sizes) >= 2:
            records.append(ResultRecord(experiment="bench", scheme=variant.value, metric="time_exponent",
                                        value=concentration_slope(sizes, times), seed=cfg.seed))
        if len(peaks) >= 2:
            records.append(ResultRecord(experiment="bench", scheme=variant.value, metric="memory_exponent",
                                        value=concentration_slope(sizes, peaks), seed=cfg.seed))
    return records


EXPERIMENTS = {
    ExperimentKind.BER: _ber_experiment,
    ExperimentKind.SE: _se_experiment,
    ExperimentKind.PA: _pa_experiment,
    ExperimentKind.CAPACITY: _capacity_experiment,
    ExperimentKind.UNIVERSALITY: _universality_experiment,
    ExperimentKind.BENCH: _bench_experiment,
}


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None, progress: bool = True,
                   profile_dir: Optional[Path] = None) -> List[ResultRecord]:
    """Dispatch on ``cfg.experiment``; metric values are deterministic given the seed."""
    prior = make_prior(cfg.system.constellation)
    runner = TrialRunner(workers or cfg.workers, progress)
    logger.info("Running %s experiment (N=%d, %d trials, seed %d)",
                cfg.experiment.value, cfg.system.n, cfg.trials, cfg.seed)
    return EXPERIMENTS[cfg.experiment](cfg, prior, runner, profile_dir=profile_dir)
