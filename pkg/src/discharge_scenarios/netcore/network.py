"""
Forward and reverse passes of the scenario network.

Per month ``t`` the network computes::

    e_t = W_in_p @ precip_t + W_in_t @ temp_t          (embedding, no bias)
    e_t = dropout(e_t)                                  (train mode only)
    z_t = sigm(W_z @ e_t + U_z @ h_{t-1})
    r_t = sigm(W_r @ e_t + U_r @ h_{t-1})
    c_t = tanh(W_h @ e_t + U_h @ (r_t * h_{t-1}))
    h_t = (1 - z_t) * h_{t-1} + z_t * c_t
    mu_t = W_mu @ h_t + b_mu
    sigma_t = softplus(W_sigma @ h_t + b_sigma) + SIGMA_FLOOR
    theta_t = W_theta @ h_t + b_theta

starting from ``h_0 = 0``. The GRU cell has no bias terms.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from discharge_scenarios.exceptions import (
    ConfigError,
    ForwardBackwardMismatch,
    NumericFault,
    ShapeMismatch,
)
from discharge_scenarios.netcore.base import (
    PARAM_NAMES,
    SIGMA_FLOOR,
    DistSeq,
    Gradients,
    HiddenSeq,
    ModelParams,
)

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"

logger = logging.getLogger(__name__)

MODES = ("train", "eval")


def softplus(x):
    return np.logaddexp(0.0, x)


def inverse_softplus(y):
    return np.log(np.expm1(y))


def init_model(config, seed):
    """
    Uniform ``+-sqrt(1/fan_in)`` for every matrix, except ``W_in_p`` which is
    drawn from ``[0, sqrt(1/fan_in)]``. ``b_mu`` and ``b_theta`` start at 0
    and ``b_sigma`` at ``softplus^-1(0.5)``.
    """
    rng = np.random.default_rng(seed)
    arrays = {}
    for name, shape in config.shapes().items():
        if len(shape) == 1:
            continue
        bound = np.sqrt(1.0 / shape[1])
        low = 0.0 if name == "W_in_p" else -bound
        arrays[name] = rng.uniform(low, bound, size=shape)
    arrays["b_mu"] = np.zeros(config.n_plants)
    arrays["b_sigma"] = np.full(config.n_plants, inverse_softplus(0.5))
    arrays["b_theta"] = np.zeros(config.n_plants)
    return ModelParams(config, arrays)


def init_heads_from_history(params, history, window=None):
    """
    Return a copy of ``params`` whose head biases match the log-discharge
    climatology: ``b_mu`` is the mean of ``log y`` per plant and
    ``softplus(b_sigma)`` its standard deviation. ``b_theta`` is reset to 0.
    """
    if history.n_plants != params.config.n_plants:
        raise ShapeMismatch(f"history has {history.n_plants} plants, model expects {params.config.n_plants}")
    values = history.values
    if window is not None:
        i0, i1 = window.indices(history.months)
        values = values[i0:i1]
    log_values = np.log(values)
    spread = np.maximum(log_values.std(axis=0), 10 * SIGMA_FLOOR)
    out = params.copy()
    out.arrays["b_mu"] = log_values.mean(axis=0)
    out.arrays["b_sigma"] = inverse_softplus(spread)
    out.arrays["b_theta"] = np.zeros(params.config.n_plants)
    return out


def project_nonneg(params):
    """Clamp ``W_in_p`` at zero; every other array is left as is."""
    out = params.copy()
    out.arrays["W_in_p"] = np.maximum(out.arrays["W_in_p"], 0.0)
    return out


def embed(precip, temp, params):
    """
    Embedding of one month (vectors) or of many months (``(month, cell)``
    matrices). Zero precipitation contributes nothing.
    """
    precip = np.asarray(precip, dtype=float)
    temp = np.asarray(temp, dtype=float)
    config = params.config
    if precip.shape[-1] != config.n_precip_cells or temp.shape[-1] != config.n_temp_cells:
        raise ShapeMismatch(
            f"forcing has {precip.shape[-1]} precipitation and {temp.shape[-1]} temperature cells, "
            f"model expects {config.n_precip_cells} and {config.n_temp_cells}"
        )
    return precip @ params.W_in_p.T + temp @ params.W_in_t.T


def _gates(wz, wr, wh, h_prev, params):
    z = expit(wz + params.U_z @ h_prev)
    r = expit(wr + params.U_r @ h_prev)
    candidate = np.tanh(wh + params.U_h @ (r * h_prev))
    return z, r, candidate


def gru_cell(e_t, h_prev, params):
    e_t = np.asarray(e_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    if e_t.shape != (params.config.embedding_dim,) or h_prev.shape != (params.config.hidden_dim,):
        raise ShapeMismatch(f"gru_cell got embedding {e_t.shape} and hidden {h_prev.shape}")
    z, r, candidate = _gates(params.W_z @ e_t, params.W_r @ e_t, params.W_h @ e_t, h_prev, params)
    return (1.0 - z) * h_prev + z * candidate


@dataclass
class ForwardTape:
    """Everything backward needs from a forward pass."""

    mode: str
    dropout_rate: float
    months: list
    precip: np.ndarray
    temp: np.ndarray
    dropout_mask: np.ndarray
    embedded: np.ndarray
    h: np.ndarray
    z: np.ndarray
    r: np.ndarray
    candidate: np.ndarray
    sigma_pre: np.ndarray


def _check_run(forcing, dropout_rate, mode, rng):
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    if not 0.0 <= dropout_rate < 1.0:
        raise ConfigError(f"dropout_rate must lie in [0, 1), got {dropout_rate}")
    if mode == "train" and dropout_rate > 0 and rng is None:
        raise ConfigError("train mode with dropout needs an rng")
    if not forcing.normalized:
        raise ConfigError("the network expects normalized forcing")


def forward_tape(params, forcing, dropout_rate=0.0, mode="eval", rng=None, h0=None):
    """:func:`forward`, also returning the :class:`ForwardTape` for backward."""
    _check_run(forcing, dropout_rate, mode, rng)
    hidden_dim = params.config.hidden_dim
    if h0 is not None and np.shape(h0) != (hidden_dim,):
        raise ShapeMismatch(f"initial hidden state has shape {np.shape(h0)}, expected ({hidden_dim},)")
    precip = forcing.precip_cells()
    temp = forcing.temp_cells()
    embedded = embed(precip, temp, params)

    n_months = forcing.n_months
    mask = None
    if mode == "train" and dropout_rate > 0:
        keep = rng.random(embedded.shape) >= dropout_rate
        mask = keep / (1.0 - dropout_rate)
        embedded = embedded * mask

    wz = embedded @ params.W_z.T
    wr = embedded @ params.W_r.T
    wh = embedded @ params.W_h.T
    h = np.zeros((n_months + 1, hidden_dim))
    if h0 is not None:
        h[0] = h0
    z = np.empty((n_months, hidden_dim))
    r = np.empty((n_months, hidden_dim))
    candidate = np.empty((n_months, hidden_dim))
    for t in range(n_months):
        z[t], r[t], candidate[t] = _gates(wz[t], wr[t], wh[t], h[t], params)
        h[t + 1] = (1.0 - z[t]) * h[t] + z[t] * candidate[t]

    states = h[1:]
    mu = states @ params.W_mu.T + params.b_mu
    sigma_pre = states @ params.W_sigma.T + params.b_sigma
    theta = states @ params.W_theta.T + params.b_theta
    sigma = softplus(sigma_pre) + SIGMA_FLOOR

    finite = np.isfinite(mu) & np.isfinite(sigma) & np.isfinite(theta)
    if not finite.all():
        t = int(np.argwhere(~finite.all(axis=1))[0][0])
        year, month = forcing.months[t]
        raise NumericFault(f"network produced a non-finite distribution at {year:04d}-{month:02d}")

    dist = DistSeq(mu=mu, sigma=sigma, theta=theta, months=list(forcing.months))
    tape = ForwardTape(
        mode=mode,
        dropout_rate=dropout_rate,
        months=list(forcing.months),
        precip=precip,
        temp=temp,
        dropout_mask=mask,
        embedded=embedded,
        h=h,
        z=z,
        r=r,
        candidate=candidate,
        sigma_pre=sigma_pre,
    )
    return dist, HiddenSeq(h=states.copy()), tape


def forward(params, forcing, dropout_rate=0.0, mode="eval", rng=None, h0=None):
    """
    Run the network over ``forcing`` from ``h0`` (zeros when omitted).
    Returns the DistSeq and the HiddenSeq after every month.
    """
    dist, hidden, _ = forward_tape(params, forcing, dropout_rate, mode, rng, h0=h0)
    return dist, hidden


def backward(params, forcing, upstream, dropout_rate=0.0, mode="eval", rng=None, tape=None):
    """
    Exact gradient of a scalar loss with respect to every parameter, given
    the loss gradient ``upstream`` (a DistGrad) with respect to the
    forward's DistSeq. Backpropagates through the whole sequence.

    Without ``tape`` the forward pass is replayed, which draws the same
    dropout masks only when ``rng`` is in the state it had for the original
    forward.
    """
    if tape is None:
        _, _, tape = forward_tape(params, forcing, dropout_rate, mode, rng)
    elif tape.mode != mode or tape.dropout_rate != dropout_rate or tape.months != list(forcing.months):
        raise ForwardBackwardMismatch(
            f"tape was recorded in {tape.mode} mode with dropout {tape.dropout_rate} over {len(tape.months)} months, "
            f"backward asked for {mode} mode with dropout {dropout_rate} over {forcing.n_months} months"
        )

    n_months = len(tape.months)
    expected = (n_months, params.config.n_plants)
    for name in ("mu", "sigma", "theta"):
        if getattr(upstream, name).shape != expected:
            raise ForwardBackwardMismatch(f"upstream {name} has shape {getattr(upstream, name).shape}, forward produced {expected}")

    states = tape.h[1:]
    previous = tape.h[:-1]
    g_mu = upstream.mu
    g_sigma = upstream.sigma * expit(tape.sigma_pre)
    g_theta = upstream.theta

    grads = {
        "W_mu": g_mu.T @ states,
        "W_sigma": g_sigma.T @ states,
        "W_theta": g_theta.T @ states,
        "b_mu": g_mu.sum(axis=0),
        "b_sigma": g_sigma.sum(axis=0),
        "b_theta": g_theta.sum(axis=0),
    }
    d_states = g_mu @ params.W_mu + g_sigma @ params.W_sigma + g_theta @ params.W_theta

    hidden_dim = params.config.hidden_dim
    da_z = np.empty((n_months, hidden_dim))
    da_r = np.empty((n_months, hidden_dim))
    da_h = np.empty((n_months, hidden_dim))
    dh_next = np.zeros(hidden_dim)
    for t in reversed(range(n_months)):
        dh = d_states[t] + dh_next
        h_prev = previous[t]
        z, r, candidate = tape.z[t], tape.r[t], tape.candidate[t]
        dz = dh * (candidate - h_prev)
        da_h[t] = dh * z * (1.0 - candidate**2)
        d_reset_h = params.U_h.T @ da_h[t]
        da_z[t] = dz * z * (1.0 - z)
        da_r[t] = d_reset_h * h_prev * r * (1.0 - r)
        dh_next = dh * (1.0 - z) + d_reset_h * r + params.U_z.T @ da_z[t] + params.U_r.T @ da_r[t]

    grads["U_z"] = da_z.T @ previous
    grads["U_r"] = da_r.T @ previous
    grads["U_h"] = da_h.T @ (tape.r * previous)
    grads["W_z"] = da_z.T @ tape.embedded
    grads["W_r"] = da_r.T @ tape.embedded
    grads["W_h"] = da_h.T @ tape.embedded

    d_embedded = da_z @ params.W_z + da_r @ params.W_r + da_h @ params.W_h
    if tape.dropout_mask is not None:
        d_embedded = d_embedded * tape.dropout_mask
    grads["W_in_p"] = d_embedded.T @ tape.precip
    grads["W_in_t"] = d_embedded.T @ tape.temp

    return Gradients(params.config, {name: grads[name] for name in PARAM_NAMES})
