import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from discharge_scenarios.checksum import label_to_int
from discharge_scenarios.exceptions import AlignmentError, ConfigError, DataError
from discharge_scenarios.ingest import normalize
from discharge_scenarios.ingest.base import format_month, month_ordinal
from discharge_scenarios.netcore import forward
from discharge_scenarios.probloss import ln3_sample
from discharge_scenarios.scenario.base import SCENARIO_FLOOR, ScenarioSet

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"

logger = logging.getLogger(__name__)


def scenario_rng(seed, label, scenario):
    """Generator for one (trajectory, scenario) pair, independent of trajectory order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), label_to_int(label), int(scenario)]))


def _check_ensemble(checkpoint, ensemble):
    if ensemble.trajectories[0].grid_shape != checkpoint.grid_shape:
        raise DataError(f"ensemble grid {ensemble.trajectories[0].grid_shape} does not match checkpoint grid {checkpoint.grid_shape}")
    if not np.array_equal(ensemble.trajectories[0].mask, checkpoint.mask):
        raise DataError("ensemble basin mask does not match the checkpoint's mask")


def sample_trajectory(dist, n_scen, seed, label):
    """(scenario, month, plant) samples from one trajectory's DistSeq, floored."""
    samples = np.empty((n_scen,) + dist.shape)
    for s in range(n_scen):
        samples[s] = ln3_sample(dist.mu, dist.sigma, dist.theta, scenario_rng(seed, label, s))
    return samples


def spinup_state(checkpoint, forcing, start):
    """
    Hidden state after an eval run over the raw ``forcing`` record up to the
    month before ``start``, so a forecast continues the observed record.
    """
    if forcing.grid_shape != checkpoint.grid_shape or not np.array_equal(forcing.mask, checkpoint.mask):
        raise DataError("spin-up forcing grid does not match the checkpoint grid")
    first = month_ordinal(*forcing.months[0])
    last = month_ordinal(*start) - 1
    if not first <= last <= month_ordinal(*forcing.months[-1]):
        raise AlignmentError(
            f"spin-up forcing covers {format_month(forcing.months[0])} to {format_month(forcing.months[-1])}, "
            f"which does not include the month before the ensemble start {format_month(start)}"
        )
    prefix = normalize(forcing.slice(0, last - first + 1), checkpoint.norm_stats)
    _, hidden = forward(checkpoint.params, prefix)
    return hidden.h[-1].copy()


def generate(checkpoint, ensemble, n_scen, seed, workers=1, spinup=None):
    """
    Sample ``n_scen`` scenarios per ensemble trajectory.

    Each trajectory is normalized with the checkpoint's statistics and run
    once in eval mode. With ``spinup`` (the raw historical forcing) every
    trajectory starts from the hidden state the record leaves at the month
    before the ensemble; otherwise from zeros. Returns the ScenarioSet and
    one HiddenSeq per trajectory.
    """
    if n_scen < 1:
        raise ConfigError(f"n_scen must be at least 1, got {n_scen}")
    _check_ensemble(checkpoint, ensemble)
    h0 = None if spinup is None else spinup_state(checkpoint, spinup, ensemble.months[0])

    def work(item):
        label, trajectory = item
        dist, hidden = forward(checkpoint.params, normalize(trajectory, checkpoint.norm_stats), h0=h0)
        return sample_trajectory(dist, n_scen, seed, label), hidden

    items = list(zip(ensemble.labels, ensemble.trajectories))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(item) for item in items]

    values = np.stack([samples for samples, _ in results])
    clipped = int(np.count_nonzero(values < SCENARIO_FLOOR))
    if clipped:
        logger.warning("%d of %d scenario values fell below %g m³/s and were clipped", clipped, values.size, SCENARIO_FLOOR)
        values = np.maximum(values, SCENARIO_FLOOR)
    scenarios = ScenarioSet(
        values=values,
        months=ensemble.months,
        plants=checkpoint.plants,
        labels=ensemble.labels,
        provenance={"seed": int(seed), "n_scen": int(n_scen), "ensemble": ensemble.source_label, "reordered": False, "clipped": clipped, "spinup": spinup is not None},
    )
    logger.info("Generated %d scenarios for each of %d trajectories", n_scen, len(items))
    return scenarios, [hidden for _, hidden in results]
