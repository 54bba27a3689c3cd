"""Dense layers, recurrent cells, and the optimizer, all in plain numpy with
hand-written gradients.  Every backward pass here is checked against central
finite differences in the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

ACTIVATIONS = {
    "sigmoid": expit,
    "tanh": np.tanh,
    "identity": lambda z: z,
}

# derivatives expressed in terms of the activation output
_DERIV_FROM_OUT = {
    "sigmoid": lambda a: a * (1.0 - a),
    "tanh": lambda a: 1.0 - a * a,
    "identity": lambda a: np.ones_like(a),
}


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    fan_out, fan_in = shape
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


@dataclass
class DenseLayer:
    """Affine map plus pointwise activation; weights are (out, in)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @classmethod
    def initialize(cls, in_dim: int, out_dim: int, activation: str,
                   rng: np.random.Generator) -> "DenseLayer":
        return cls(
            weights=glorot_uniform(rng, (out_dim, in_dim)),
            bias=np.zeros(out_dim),
            activation=activation,
        )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """x is (batch, in) or (in,); output matches."""
        return ACTIVATIONS[self.activation](x @ self.weights.T + self.bias)

    def backward(self, x: np.ndarray, out: np.ndarray, grad_out: np.ndarray):
        """Gradients given the forward input and output.

        Returns ``(grad_x, grad_weights, grad_bias)``.
        """
        d_pre = grad_out * _DERIV_FROM_OUT[self.activation](out)
        return d_pre @ self.weights, d_pre.T @ x, d_pre.sum(axis=0)

    def parameters(self) -> list[np.ndarray]:
        return [self.weights, self.bias]


class GruCell:
    """Gated recurrent cell.

    z = sigmoid(Wz x + Uz h + bz)          update gate
    r = sigmoid(Wr x + Ur h + br)          reset gate
    c = tanh(Wc x + Uc (r*h) + bc)         candidate state
    h' = (1 - z) * h + z * c
    """

    kind = "gru"
    n_gates = 3

    def __init__(self, input_dim: int, hidden_dim: int,
                 rng: np.random.Generator | None = None):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        rng = rng or np.random.default_rng(0)
        self.w = {}
        self.u = {}
        self.b = {}
        for gate in ("update", "reset", "candidate"):
            self.w[gate] = glorot_uniform(rng, (hidden_dim, input_dim))
            self.u[gate] = glorot_uniform(rng, (hidden_dim, hidden_dim))
            self.b[gate] = np.zeros(hidden_dim)

    def parameters(self) -> list[np.ndarray]:
        out = []
        for gate in ("update", "reset", "candidate"):
            out += [self.w[gate], self.u[gate], self.b[gate]]
        return out

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, sequence: np.ndarray, h0: np.ndarray | None = None):
        """Run the cell over (batch, steps, input_dim).

        Returns ``(h_final, states, cache)`` where states is
        (batch, steps, hidden_dim).
        """
        batch, steps, _ = sequence.shape
        h = np.zeros((batch, self.hidden_dim)) if h0 is None else h0.copy()
        states = np.empty((batch, steps, self.hidden_dim))
        cache = {"sequence": sequence, "h0": h.copy(), "z": [], "r": [], "c": [], "h_prev": []}
        for t in range(steps):
            x = sequence[:, t, :]
            z = expit(x @ self.w["update"].T + h @ self.u["update"].T + self.b["update"])
            r = expit(x @ self.w["reset"].T + h @ self.u["reset"].T + self.b["reset"])
            c = np.tanh(x @ self.w["candidate"].T + (r * h) @ self.u["candidate"].T
                        + self.b["candidate"])
            cache["h_prev"].append(h)
            cache["z"].append(z)
            cache["r"].append(r)
            cache["c"].append(c)
            h = (1.0 - z) * h + z * c
            states[:, t, :] = h
        return h, states, cache

    def backward(self, cache: dict, grad_states: np.ndarray) -> list[np.ndarray]:
        """Backpropagate through time.

        ``grad_states`` is (batch, steps, hidden_dim): the loss gradient with
        respect to every hidden state (zeros except the last step when only
        the final state feeds the loss).  Returns gradients in
        ``parameters()`` order.
        """
        sequence = cache["sequence"]
        steps = sequence.shape[1]
        grads_w = {g: np.zeros_like(self.w[g]) for g in self.w}
        grads_u = {g: np.zeros_like(self.u[g]) for g in self.u}
        grads_b = {g: np.zeros_like(self.b[g]) for g in self.b}
        dh = np.zeros((sequence.shape[0], self.hidden_dim))
        for t in range(steps - 1, -1, -1):
            dh = dh + grad_states[:, t, :]
            x = sequence[:, t, :]
            h_prev = cache["h_prev"][t]
            z, r, c = cache["z"][t], cache["r"][t], cache["c"][t]

            dz = dh * (c - h_prev)
            dc = dh * z
            dh_prev = dh * (1.0 - z)

            da_c = dc * (1.0 - c * c)
            grads_w["candidate"] += da_c.T @ x
            grads_u["candidate"] += da_c.T @ (r * h_prev)
            grads_b["candidate"] += da_c.sum(axis=0)
            d_rh = da_c @ self.u["candidate"]
            dr = d_rh * h_prev
            dh_prev = dh_prev + d_rh * r

            da_z = dz * z * (1.0 - z)
            grads_w["update"] += da_z.T @ x
            grads_u["update"] += da_z.T @ h_prev
            grads_b["update"] += da_z.sum(axis=0)
            dh_prev = dh_prev + da_z @ self.u["update"]

            da_r = dr * r * (1.0 - r)
            grads_w["reset"] += da_r.T @ x
            grads_u["reset"] += da_r.T @ h_prev
            grads_b["reset"] += da_r.sum(axis=0)
            dh_prev = dh_prev + da_r @ self.u["reset"]

            dh = dh_prev
        out = []
        for gate in ("update", "reset", "candidate"):
            out += [grads_w[gate], grads_u[gate], grads_b[gate]]
        return out


class LstmCell:
    """Long short-term memory cell with the standard i/f/o/g gates."""

    kind = "lstm"
    n_gates = 4

    def __init__(self, input_dim: int, hidden_dim: int,
                 rng: np.random.Generator | None = None):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        rng = rng or np.random.default_rng(0)
        self.w = {}
        self.u = {}
        self.b = {}
        for gate in ("input", "forget", "output", "cell"):
            self.w[gate] = glorot_uniform(rng, (hidden_dim, input_dim))
            self.u[gate] = glorot_uniform(rng, (hidden_dim, hidden_dim))
            self.b[gate] = np.zeros(hidden_dim)

    def parameters(self) -> list[np.ndarray]:
        out = []
        for gate in ("input", "forget", "output", "cell"):
            out += [self.w[gate], self.u[gate], self.b[gate]]
        return out

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, sequence: np.ndarray, h0: np.ndarray | None = None):
        batch, steps, _ = sequence.shape
        h = np.zeros((batch, self.hidden_dim)) if h0 is None else h0.copy()
        cell = np.zeros((batch, self.hidden_dim))
        states = np.empty((batch, steps, self.hidden_dim))
        cache = {"sequence": sequence, "gates": [], "h_prev": [], "c_prev": [], "c_new": []}
        for t in range(steps):
            x = sequence[:, t, :]
            i = expit(x @ self.w["input"].T + h @ self.u["input"].T + self.b["input"])
            f = expit(x @ self.w["forget"].T + h @ self.u["forget"].T + self.b["forget"])
            o = expit(x @ self.w["output"].T + h @ self.u["output"].T + self.b["output"])
            g = np.tanh(x @ self.w["cell"].T + h @ self.u["cell"].T + self.b["cell"])
            cache["h_prev"].append(h)
            cache["c_prev"].append(cell)
            cell = f * cell + i * g
            cache["gates"].append((i, f, o, g))
            cache["c_new"].append(cell)
            h = o * np.tanh(cell)
            states[:, t, :] = h
        return h, states, cache

    def backward(self, cache: dict, grad_states: np.ndarray) -> list[np.ndarray]:
        sequence = cache["sequence"]
        steps = sequence.shape[1]
        grads_w = {g: np.zeros_like(self.w[g]) for g in self.w}
        grads_u = {g: np.zeros_like(self.u[g]) for g in self.u}
        grads_b = {g: np.zeros_like(self.b[g]) for g in self.b}
        batch = sequence.shape[0]
        dh = np.zeros((batch, self.hidden_dim))
        dc = np.zeros((batch, self.hidden_dim))
        for t in range(steps - 1, -1, -1):
            dh = dh + grad_states[:, t, :]
            x = sequence[:, t, :]
            h_prev = cache["h_prev"][t]
            c_prev = cache["c_prev"][t]
            c_new = cache["c_new"][t]
            i, f, o, g = cache["gates"][t]
            tanh_c = np.tanh(c_new)

            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dc = dc * f  # flows to c_prev

            dh_prev = np.zeros_like(dh)
            for gate, d_out, act in (
                ("input", di, i),
                ("forget", df, f),
                ("output", do, o),
            ):
                da = d_out * act * (1.0 - act)
                grads_w[gate] += da.T @ x
                grads_u[gate] += da.T @ h_prev
                grads_b[gate] += da.sum(axis=0)
                dh_prev = dh_prev + da @ self.u[gate]
            da = dg * (1.0 - g * g)
            grads_w["cell"] += da.T @ x
            grads_u["cell"] += da.T @ h_prev
            grads_b["cell"] += da.sum(axis=0)
            dh_prev = dh_prev + da @ self.u["cell"]

            dh = dh_prev
        out = []
        for gate in ("input", "forget", "output", "cell"):
            out += [grads_w[gate], grads_u[gate], grads_b[gate]]
        return out


CELL_KINDS = {"gru": GruCell, "lstm": LstmCell}


def make_cell(kind: str, input_dim: int, hidden_dim: int,
              rng: np.random.Generator | None = None):
    try:
        cls = CELL_KINDS[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown cell kind {kind!r}; expected one of {sorted(CELL_KINDS)}")
    return cls(input_dim, hidden_dim, rng)


def recurrent_forward(cell, sequence: np.ndarray, h0: np.ndarray | None = None):
    """Run one unbatched sequence (steps, input_dim) through a cell.

    Returns ``(final_hidden, states)`` with states (steps, hidden_dim).
    """
    sequence = np.asarray(sequence, dtype=np.float64)
    if sequence.ndim != 2:
        raise ValueError(f"expected (steps, input_dim), got shape {sequence.shape}")
    if sequence.shape[0] < 1:
        raise ValueError("sequence must have at least one step")
    if sequence.shape[1] != cell.input_dim:
        raise ValueError(
            f"sequence feature dim {sequence.shape[1]} != cell input dim {cell.input_dim}"
        )
    batch_h0 = None if h0 is None else np.asarray(h0, dtype=np.float64)[None, :]
    h, states, _ = cell.forward(sequence[None, :, :], batch_h0)
    return h[0], states[0]


class Adam:
    """Adaptive-moment gradient descent over a fixed list of arrays."""

    def __init__(self, params: list[np.ndarray], learning_rate: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = params
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        lr_t = self.learning_rate * (
            np.sqrt(1.0 - self.beta2**self.t) / (1.0 - self.beta1**self.t)
        )
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= lr_t * m / (np.sqrt(v) + self.epsilon)
