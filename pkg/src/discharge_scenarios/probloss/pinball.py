"""
Multi-quantile pinball loss on three-parameter log-normal quantile curves.

For each level q the error is ``err_q = observed - y_q`` and the term is
``max(q*err_q, (q-1)*err_q)``. Terms are summed over months, plants and
levels and divided by months*plants. The subgradient at ``err_q = 0`` is 0.
"""

import numpy as np

from discharge_scenarios.exceptions import AlignmentError, DataError
from discharge_scenarios.netcore.base import DistGrad


def _observed_values(dist, observed):
    values = np.asarray(getattr(observed, "values", observed), dtype=float)
    if values.shape != dist.shape:
        raise AlignmentError(f"observed shape {values.shape} does not match distribution shape {dist.shape}")
    months = getattr(observed, "months", None)
    if dist.months is not None and months is not None and list(dist.months) != list(months):
        raise AlignmentError("observed months do not match distribution months")
    return values


def pinball_terms(observed, predicted, q):
    err = observed - predicted
    return np.maximum(q * err, (q - 1.0) * err)


def pinball_loss(dist, observed, qs):
    """Return ``(loss, DistGrad)``."""
    values = _observed_values(dist, observed)
    n_terms = values.size
    if n_terms == 0:
        raise DataError("pinball loss over an empty window")

    growth = np.exp(dist.mu[..., None] + dist.sigma[..., None] * qs.z_values)
    predicted = growth + dist.theta[..., None]
    err = values[..., None] - predicted
    loss = float(np.maximum(qs.q * err, (qs.q - 1.0) * err).sum() / n_terms)

    # d(term)/d(predicted) = -d(term)/d(err)
    slope = np.where(err > 0, qs.q, np.where(err < 0, qs.q - 1.0, 0.0))
    g = -slope / n_terms
    grad = DistGrad(
        mu=(g * growth).sum(axis=-1),
        sigma=(g * growth * qs.z_values).sum(axis=-1),
        theta=g.sum(axis=-1),
    )
    return loss, grad
