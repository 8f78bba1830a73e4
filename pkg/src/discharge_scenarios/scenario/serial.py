"""
Serial-correlation restoration.

Scenarios are sampled independently month by month, so a scenario path has
no memory. A lag-one regression of discharge on the previous month's
discharge and the network's previous hidden state is fitted on history;
scenarios at month ``t`` are then relabeled so that, jointly, they are the
most likely continuations of the (already relabeled) scenarios at ``t-1``
under Gaussian residuals. That is a linear assignment on Mahalanobis costs.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from discharge_scenarios.exceptions import DataError, NumericFault, ShapeMismatch
from discharge_scenarios.netcore import forward
from discharge_scenarios.scenario.assignment import assignment_solve
from discharge_scenarios.scenario.base import DEFAULT_SHRINKAGE, SerialModel

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"

logger = logging.getLogger(__name__)

MIN_FIT_MONTHS = 24
RANK_DEFICIENT_SHRINKAGE = 0.5


def _shrunk_covariance(residuals, shrinkage):
    sample = np.atleast_2d(np.cov(residuals, rowvar=False))
    sample = 0.5 * (sample + sample.T)
    diag = np.diag(sample)
    theta = (1.0 - shrinkage) * sample + shrinkage * np.diag(diag)
    mean_diag = float(diag.mean())
    floor = 1e-8 * mean_diag if mean_diag > 0 else 1e-12
    np.fill_diagonal(theta, np.maximum(np.diag(theta), floor))
    return theta


def fit_serial_regression(values, hidden, shrinkage=DEFAULT_SHRINKAGE, diagonal=False):
    """
    Least-squares fit of ``values[t]`` on ``[1, values[t-1], hidden[t-1]]``.
    ``values`` is (month, plant), ``hidden`` (month, hidden_dim).
    """
    values = np.asarray(values, dtype=float)
    hidden = np.asarray(hidden, dtype=float)
    n_months, n_plants = values.shape
    if hidden.shape[0] != n_months:
        raise ShapeMismatch(f"{hidden.shape[0]} hidden states for {n_months} months")
    if n_months < MIN_FIT_MONTHS:
        raise DataError(f"serial regression needs at least {MIN_FIT_MONTHS} months, got {n_months}")

    target = values[1:]
    ones = np.ones((n_months - 1, 1))
    hidden_prev = hidden[:-1]
    hidden_dim = hidden.shape[1]
    rank_deficient = False

    intercept = np.empty(n_plants)
    phi_y = np.zeros((n_plants, n_plants))
    phi_h = np.empty((n_plants, hidden_dim))
    residuals = np.empty_like(target)
    if diagonal:
        for p in range(n_plants):
            design = np.hstack([ones, values[:-1, p : p + 1], hidden_prev])
            coef, _, rank, _ = np.linalg.lstsq(design, target[:, p], rcond=None)
            rank_deficient |= rank < design.shape[1]
            intercept[p] = coef[0]
            phi_y[p, p] = coef[1]
            phi_h[p] = coef[2:]
            residuals[:, p] = target[:, p] - design @ coef
    else:
        design = np.hstack([ones, values[:-1], hidden_prev])
        coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
        rank_deficient = rank < design.shape[1]
        intercept = coef[0]
        phi_y = coef[1 : 1 + n_plants].T
        phi_h = coef[1 + n_plants :].T
        residuals = target - design @ coef

    if rank_deficient and shrinkage < RANK_DEFICIENT_SHRINKAGE:
        logger.warning(
            "Serial regression design is rank deficient; raising covariance shrinkage from %g to %g",
            shrinkage,
            RANK_DEFICIENT_SHRINKAGE,
        )
        shrinkage = RANK_DEFICIENT_SHRINKAGE

    theta = _shrunk_covariance(residuals, shrinkage)
    return SerialModel(
        intercept=intercept,
        phi_y=phi_y,
        phi_h=np.array(phi_h),
        theta=theta,
        shrinkage=shrinkage,
        diagonal=diagonal,
    )


def fit_serial_model(model, forcing, history, window=None, shrinkage=DEFAULT_SHRINKAGE, diagonal=False):
    """
    Fit the lag-one regression on ``history`` over ``window`` (or the whole
    record), with hidden states from an eval-mode forward pass over the
    normalized ``forcing`` run from its first month.
    """
    history.check_aligned(forcing)
    i0, i1 = (0, history.n_months) if window is None else window.indices(history.months)
    _, hidden = forward(model, forcing.slice(0, i1))
    return fit_serial_regression(history.values[i0:i1], hidden.h[i0:i1], shrinkage=shrinkage, diagonal=diagonal)


def mahalanobis_cost(y_prev, h_prev, y_curr, sm):
    """
    ``cost[i, j] = d' theta^-1 d`` with ``d = y_curr[j] - prediction(y_prev[i], h_prev)``.
    """
    y_prev = np.asarray(y_prev, dtype=float)
    y_curr = np.asarray(y_curr, dtype=float)
    if y_prev.shape != y_curr.shape or y_prev.ndim != 2 or y_prev.shape[1] != sm.n_plants:
        raise ShapeMismatch(f"scenario blocks {y_prev.shape} and {y_curr.shape} do not fit a {sm.n_plants}-plant serial model")
    if np.shape(h_prev) != (sm.hidden_dim,):
        raise ShapeMismatch(f"hidden state has shape {np.shape(h_prev)}, serial model expects ({sm.hidden_dim},)")
    predicted = sm.predict(y_prev, h_prev)
    d = y_curr[None, :, :] - predicted[:, None, :]
    cost = np.einsum("ijp,pq,ijq->ij", d, sm.theta_inv, d)
    if not np.all(np.isfinite(cost)):
        raise NumericFault("Mahalanobis cost has non-finite entries")
    return cost


def reorder_trajectory(values, hidden, sm):
    """Relabel one trajectory's (scenario, month, plant) block month by month."""
    values = np.array(values, dtype=float)
    for t in range(1, values.shape[1]):
        cost = mahalanobis_cost(values[:, t - 1], hidden[t - 1], values[:, t], sm)
        perm = assignment_solve(cost)
        values[:, t] = values[perm, t]
    return values


def reorder(scenarios, hidden, sm, workers=1):
    """
    Return a new ScenarioSet whose scenario labels follow the serial model.
    ``hidden`` holds one HiddenSeq per trajectory, as returned by generate.
    Values at every (trajectory, month) are only permuted.
    """
    if len(hidden) != scenarios.n_traj:
        raise ShapeMismatch(f"{len(hidden)} hidden sequences for {scenarios.n_traj} trajectories")
    for seq in hidden:
        if seq.h.shape != (scenarios.horizon, sm.hidden_dim):
            raise ShapeMismatch(f"hidden sequence has shape {seq.h.shape}, expected {(scenarios.horizon, sm.hidden_dim)}")
    if scenarios.n_scen == 1:
        return scenarios.with_values(scenarios.values.copy(), reordered=True)

    def work(k):
        return reorder_trajectory(scenarios.values[k], hidden[k].h, sm)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(work, range(scenarios.n_traj)))
    else:
        blocks = [work(k) for k in range(scenarios.n_traj)]
    return scenarios.with_values(np.stack(blocks), reordered=True)
