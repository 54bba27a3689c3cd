"""Central finite-difference gradient oracle shared by the unit and
acceptance suites.  Entirely independent of the analytic backward passes it
checks: it only calls forward passes."""

import numpy as np

STEP = 1e-5


def finite_difference(loss_fn, param: np.ndarray, step: float = STEP) -> np.ndarray:
    """Central-difference gradient of ``loss_fn()`` w.r.t. ``param`` in place."""
    grad = np.zeros_like(param)
    it = np.nditer(param, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        original = param[idx]
        param[idx] = original + step
        upper = loss_fn()
        param[idx] = original - step
        lower = loss_fn()
        param[idx] = original
        grad[idx] = (upper - lower) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Norm-scaled disagreement; 0 when both are (near) zero."""
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def max_cell_gradient_error(cell, rng: np.random.Generator, steps: int = 4,
                            batch: int = 2) -> float:
    """Worst relative error across all parameters of a recurrent cell, using
    a random linear functional of every hidden state as the loss."""
    sequence = rng.standard_normal((batch, steps, cell.input_dim))
    coefficients = rng.standard_normal((batch, steps, cell.hidden_dim))

    def loss():
        _, states, _ = cell.forward(sequence)
        return float(np.sum(states * coefficients))

    _, _, cache = cell.forward(sequence)
    analytic = cell.backward(cache, coefficients)
    worst = 0.0
    for param, grad in zip(cell.parameters(), analytic):
        numeric = finite_difference(loss, param)
        worst = max(worst, relative_error(grad, numeric))
    return worst


def max_dense_gradient_error(layer, rng: np.random.Generator, batch: int = 3) -> float:
    """Worst relative error across a dense layer's weights and bias."""
    x = rng.standard_normal((batch, layer.in_dim))
    coefficients = rng.standard_normal((batch, layer.out_dim))

    def loss():
        return float(np.sum(layer.forward(x) * coefficients))

    out = layer.forward(x)
    _, grad_w, grad_b = layer.backward(x, out, coefficients)
    worst = relative_error(grad_w, finite_difference(loss, layer.weights))
    worst = max(worst, relative_error(grad_b, finite_difference(loss, layer.bias)))
    return worst
