"""
Full-sequence training with early stopping.

The network always runs from the first month of the series and only the
window's months are scored, so the validation window sees the hidden state
built up over the training years.
"""

import logging
import time

import numpy as np

from discharge_scenarios.exceptions import NumericFault, TrainingDiverged
from discharge_scenarios.netcore import backward, forward, forward_tape, project_nonneg
from discharge_scenarios.probloss import QuantileSet, pinball_loss
from discharge_scenarios.train.base import EpochRecord, TrainReport
from discharge_scenarios.train.optimizer import Adam

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"

logger = logging.getLogger(__name__)


def _scored(forcing, history, window):
    """Forcing from the series start through the window, and the window's observations."""
    history.check_aligned(forcing)
    i0, i1 = window.indices(forcing.months)
    return forcing.slice(0, i1), history.slice(i0, i1), i0


def _window_loss(params, forcing, observed, i0, qs):
    dist, _ = forward(params, forcing)
    loss, _ = pinball_loss(dist.slice(i0, forcing.n_months), observed, qs)
    return loss


def evaluate_loss(model, forcing, history, window, qs=None):
    """Eval-mode pinball loss over ``window``."""
    qs = qs or QuantileSet()
    run_forcing, observed, i0 = _scored(forcing, history, window)
    return _window_loss(model, run_forcing, observed, i0, qs)


def _first_bad_array(arrays):
    for name, value in arrays.items():
        if not np.all(np.isfinite(value)):
            return name
    return None


def train(model, forcing, history, cfg, on_step=None):
    """
    Train ``model`` on ``cfg.train_window`` and return ``(params, report)``
    where ``params`` is the snapshot with the lowest validation loss.
    ``forcing`` must be normalized. ``on_step(epoch, params)`` is called
    after every optimizer step and its projection.
    """
    qs = cfg.quantiles
    train_forcing, train_observed, t0 = _scored(forcing, history, cfg.train_window)
    valid_forcing, valid_observed, v0 = _scored(forcing, history, cfg.valid_window)
    n_train = train_forcing.n_months
    logger.info(
        "Training on %d months (%d scored), validating on %d months",
        n_train,
        train_observed.n_months,
        valid_observed.n_months,
    )

    rng = np.random.default_rng(cfg.seed)
    optimizer = Adam(cfg.learning_rate)
    params = model.copy()
    started = time.perf_counter()

    records = [
        EpochRecord(
            0,
            _window_loss(params, train_forcing, train_observed, t0, qs),
            _window_loss(params, valid_forcing, valid_observed, v0, qs),
        )
    ]
    best = params.copy()
    best_epoch = 0
    best_loss = records[0].valid_loss
    stale = 0
    stopped_early = False

    for epoch in range(1, cfg.max_epochs + 1):
        try:
            dist, _, tape = forward_tape(params, train_forcing, cfg.dropout_rate, "train", rng)
        except NumericFault as e:
            raise TrainingDiverged(f"epoch {epoch}: {e}", epoch=epoch, parameter=params.check_finite())
        loss, upstream = pinball_loss(dist.slice(t0, n_train), train_observed, qs)
        if not np.isfinite(loss):
            raise TrainingDiverged(f"epoch {epoch}: training loss is {loss}", epoch=epoch, parameter=params.check_finite())
        grads = backward(params, train_forcing, upstream.padded(n_train, t0), cfg.dropout_rate, "train", tape=tape)
        bad = _first_bad_array(grads.arrays)
        if bad is not None:
            raise TrainingDiverged(f"epoch {epoch}: non-finite gradient for {bad}", epoch=epoch, parameter=bad)

        params = project_nonneg(optimizer.step(params, grads))
        bad = params.check_finite()
        if bad is not None:
            raise TrainingDiverged(f"epoch {epoch}: parameter {bad} is no longer finite", epoch=epoch, parameter=bad)
        if on_step is not None:
            on_step(epoch, params)

        try:
            valid_loss = _window_loss(params, valid_forcing, valid_observed, v0, qs)
        except NumericFault as e:
            raise TrainingDiverged(f"epoch {epoch}: {e}", epoch=epoch)
        records.append(EpochRecord(epoch, loss, valid_loss))
        logger.debug("epoch %d: train %.6g valid %.6g", epoch, loss, valid_loss)

        if valid_loss < best_loss:
            best, best_epoch, best_loss = params.copy(), epoch, valid_loss
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                stopped_early = True
                logger.info("No validation improvement for %d epochs, stopping at epoch %d", cfg.patience, epoch)
                break

    report = TrainReport(
        epochs=records,
        selected_epoch=best_epoch,
        stopped_early=stopped_early,
        wall_time=time.perf_counter() - started,
    )
    logger.info("Selected epoch %d with validation loss %.6g", best_epoch, best_loss)
    return best.copy(), report
