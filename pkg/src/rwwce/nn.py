"""Minimal dense feed-forward networks in numpy.

Enough machinery to train the small classifiers the experiment suites use:
Glorot-uniform init, forward pass with retained activations, backprop that
starts from a fused loss/logit gradient, an Adam optimizer written as a pure
function, a mini-batch training loop, and central-difference gradient
checking.  Everything is float64 and deterministic given a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .losses import (
    BINARY_VARIANTS,
    VARIANTS,
    LossSpec,
    fused_gradient_from_probs,
    loss_value,
    sigmoid,
    softmax,
)

ACTIVATIONS = ("relu", "sigmoid", "softmax", "identity")

# Topology spec: sequence of (in_dim, out_dim, activation) triples.
Topology = "list[tuple[int, int, str]]"


@dataclass
class DenseLayer:
    weights: np.ndarray  # (in_dim, out_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]


@dataclass
class Mlp:
    layers: list[DenseLayer]

    @property
    def weight_count(self) -> int:
        return sum(layer.weights.size for layer in self.layers)

    @property
    def bias_count(self) -> int:
        return sum(layer.bias.size for layer in self.layers)

    def copy(self) -> "Mlp":
        return Mlp(
            [DenseLayer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers]
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 100
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-7
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.adam_beta1 < 1 or not 0 <= self.adam_beta2 < 1:
            raise ValueError("adam betas must lie in [0, 1)")
        if not self.adam_epsilon > 0:
            raise ValueError("adam_epsilon must be > 0")


@dataclass
class AdamState:
    """First/second moment accumulators mirroring the model's parameters."""

    step: int
    m: list[tuple[np.ndarray, np.ndarray]]
    v: list[tuple[np.ndarray, np.ndarray]]

    @classmethod
    def for_mlp(cls, mlp: Mlp) -> "AdamState":
        zeros = lambda l: (np.zeros_like(l.weights), np.zeros_like(l.bias))
        return cls(step=0, m=[zeros(l) for l in mlp.layers], v=[zeros(l) for l in mlp.layers])


def init_mlp(topology, seed: int) -> Mlp:
    """Build a network with Glorot-uniform weights and zero biases.

    topology is a sequence of (in_dim, out_dim, activation) triples whose
    dimensions must chain.  Softmax is only valid on the final layer.
    Weights for layer (n_in, n_out) are drawn uniformly from
    [-sqrt(6/(n_in+n_out)), +sqrt(6/(n_in+n_out))] using a generator seeded
    with seed, so identical (topology, seed) gives bit-identical models.
    """
    topo = list(topology)
    if not topo:
        raise ValueError("topology must name at least one layer")
    for entry in topo:
        if len(entry) != 3:
            raise ValueError(f"layer spec must be (in_dim, out_dim, activation), got {entry!r}")
        n_in, n_out, act = entry
        if int(n_in) != n_in or int(n_out) != n_out or n_in < 1 or n_out < 1:
            raise ValueError(f"layer dimensions must be positive integers, got {entry!r}")
        if act not in ACTIVATIONS:
            raise ValueError(f"unknown activation {act!r}")
    for (_, out_prev, _), (in_next, _, _) in zip(topo, topo[1:]):
        if out_prev != in_next:
            raise ValueError(f"layer dimensions do not chain: {out_prev} feeds {in_next}")
    for _, _, act in topo[:-1]:
        if act == "softmax":
            raise ValueError("softmax is only supported on the final layer")

    rng = np.random.default_rng(seed)
    layers = []
    for n_in, n_out, act in topo:
        limit = math.sqrt(6.0 / (n_in + n_out))
        weights = rng.uniform(-limit, limit, size=(n_in, n_out))
        layers.append(DenseLayer(weights, np.zeros(n_out), act))
    return Mlp(layers)


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return sigmoid(z)
    if name == "softmax":
        return softmax(z)
    return z  # identity


def forward(mlp: Mlp, x) -> list[np.ndarray]:
    """Run the network, returning [input, activation_1, ..., output].

    The retained per-layer activations are exactly what backward() needs.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"input must be a 2-D batch, got shape {x.shape}")
    if not mlp.layers:
        raise ValueError("model has no layers")
    if x.shape[1] != mlp.layers[0].in_dim:
        raise ValueError(
            f"input has {x.shape[1]} features, first layer expects {mlp.layers[0].in_dim}"
        )
    activations = [x]
    for layer in mlp.layers:
        z = activations[-1] @ layer.weights + layer.bias
        activations.append(_apply_activation(layer.activation, z))
    return activations


def _activation_derivative(name: str, a: np.ndarray) -> np.ndarray:
    """Derivative of a hidden activation, recovered from its stored output."""
    if name == "relu":
        return (a > 0.0).astype(np.float64)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "identity":
        return np.ones_like(a)
    raise ValueError(f"cannot differentiate hidden activation {name!r}")


def backward(mlp: Mlp, activations: list[np.ndarray], output_gradient: np.ndarray):
    """Backpropagate a final-layer logit gradient to per-layer parameter grads.

    output_gradient is dJ/dz for the final layer, as produced by the fused
    loss gradients (the final activation's Jacobian is already folded in, and
    the 1/M batch factor is already carried).  Returns a list of
    (d_weights, d_bias) tuples, one per layer.
    """
    n = len(mlp.layers)
    if len(activations) != n + 1:
        raise ValueError(f"expected {n + 1} stored activations, got {len(activations)}")
    delta = np.asarray(output_gradient, dtype=np.float64)
    if delta.shape != activations[-1].shape:
        raise ValueError(
            f"output gradient shape {delta.shape} does not match output {activations[-1].shape}"
        )
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * n  # type: ignore[list-item]
    for i in reversed(range(n)):
        prev = activations[i]
        grads[i] = (prev.T @ delta, delta.sum(axis=0))
        if i > 0:
            hidden = mlp.layers[i - 1]
            delta = (delta @ mlp.layers[i].weights.T) * _activation_derivative(
                hidden.activation, activations[i]
            )
    return grads


def adam_step(mlp: Mlp, grads, state: AdamState, config: TrainConfig) -> tuple[Mlp, AdamState]:
    """One Adam update.  Pure: returns a new model and state, inputs untouched.

    Bias-corrected form: with t = state.step + 1,
      m <- b1 m + (1-b1) g,   v <- b2 v + (1-b2) g^2,
      theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
    """
    if len(grads) != len(mlp.layers):
        raise ValueError(f"expected {len(mlp.layers)} gradient pairs, got {len(grads)}")
    t = state.step + 1
    b1, b2 = config.adam_beta1, config.adam_beta2
    corr1 = 1.0 - b1**t
    corr2 = 1.0 - b2**t
    new_layers, new_m, new_v = [], [], []
    for layer, (gw, gb), (mw, mb), (vw, vb) in zip(mlp.layers, grads, state.m, state.v):
        if gw.shape != layer.weights.shape or gb.shape != layer.bias.shape:
            raise ValueError("gradient shapes do not mirror the model parameters")
        params = []
        moments = []
        for theta, g, m_old, v_old in ((layer.weights, gw, mw, vw), (layer.bias, gb, mb, vb)):
            m_new = b1 * m_old + (1.0 - b1) * g
            v_new = b2 * v_old + (1.0 - b2) * (g * g)
            theta_new = theta - config.learning_rate * (m_new / corr1) / (
                np.sqrt(v_new / corr2) + config.adam_epsilon
            )
            params.append(theta_new)
            moments.append((m_new, v_new))
        new_layers.append(DenseLayer(params[0], params[1], layer.activation))
        new_m.append((moments[0][0], moments[1][0]))
        new_v.append((moments[0][1], moments[1][1]))
    return Mlp(new_layers), AdamState(step=t, m=new_m, v=new_v)


def _check_pairing(mlp: Mlp, spec: LossSpec) -> None:
    final = mlp.layers[-1]
    if spec.is_binary:
        if final.activation != "sigmoid" or final.out_dim != 1:
            raise ValueError(
                f"{spec.variant} needs a 1-unit sigmoid output layer, "
                f"model ends in {final.out_dim}-unit {final.activation}"
            )
    else:
        if final.activation != "softmax":
            raise ValueError(
                f"{spec.variant} needs a softmax output layer, model ends in {final.activation}"
            )


def train(mlp: Mlp, train_set, loss_spec: LossSpec, config: TrainConfig) -> tuple[Mlp, list[float]]:
    """Mini-batch gradient descent with Adam.

    train_set provides arrays X (M, d) and Y (labels: (M,) binary or (M, K)
    one-hot).  Each epoch reshuffles with a generator seeded once from
    config.seed, walks the permutation in batch_size slices (final short
    batch included), and applies one Adam update per batch.  Returns the
    trained model and the per-epoch mean training loss (example-weighted, as
    observed during the epoch).  Bit-deterministic for fixed inputs.
    """
    x = np.asarray(train_set.X, dtype=np.float64)
    y = np.asarray(train_set.Y, dtype=np.float64)
    m = x.shape[0]
    if m == 0:
        raise ValueError("training set is empty")
    if y.shape[0] != m:
        raise ValueError(f"X has {m} rows but Y has {y.shape[0]}")
    _check_pairing(mlp, loss_spec)

    model = mlp
    state = AdamState.for_mlp(mlp)
    rng = np.random.default_rng(config.seed)
    history: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(m)
        weighted_total = 0.0
        for start in range(0, m, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = x[idx], y[idx]
            acts = forward(model, xb)
            probs = acts[-1]
            batch_loss = loss_value(loss_spec, probs, yb)
            dz = fused_gradient_from_probs(loss_spec, probs, yb)
            grads = backward(model, acts, dz)
            model, state = adam_step(model, grads, state, config)
            weighted_total += batch_loss * idx.shape[0]
        epoch_loss = weighted_total / m
        if not math.isfinite(epoch_loss):
            raise FloatingPointError(f"training loss became non-finite: {epoch_loss!r}")
        history.append(epoch_loss)
    return model, history


@dataclass
class GradCheckReport:
    max_rel_error: float
    tolerance: float
    passed: bool
    parameter_count: int


def gradcheck(
    mlp: Mlp, batch, loss_spec: LossSpec, step: float = 1e-5, tolerance: float = 1e-5
) -> GradCheckReport:
    """Compare backprop gradients against central finite differences.

    Perturbs every weight and bias entry by +-step, differences the composed
    loss, and reports the worst relative error
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
    Entries whose true magnitude sits near that floor are dominated by
    finite-difference cancellation noise, so keep the probe networks small
    and the batches moderate.
    """
    x, y = batch
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    acts = forward(mlp, x)
    analytic = backward(mlp, acts, fused_gradient_from_probs(loss_spec, acts[-1], y))

    work = mlp.copy()
    worst = 0.0
    count = 0
    for layer_index, layer in enumerate(work.layers):
        for which, arr in enumerate((layer.weights, layer.bias)):
            flat = arr.reshape(-1)
            ref = analytic[layer_index][which].reshape(-1)
            for j in range(flat.shape[0]):
                original = flat[j]
                flat[j] = original + step
                plus = loss_value(loss_spec, forward(work, x)[-1], y)
                flat[j] = original - step
                minus = loss_value(loss_spec, forward(work, x)[-1], y)
                flat[j] = original
                numeric = (plus - minus) / (2.0 * step)
                a = ref[j]
                rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-12)
                worst = max(worst, rel)
                count += 1
    return GradCheckReport(
        max_rel_error=worst, tolerance=tolerance, passed=worst < tolerance, parameter_count=count
    )


@dataclass
class GradCheckMatrixReport:
    worst_by_variant: dict[str, float]
    instances_per_variant: int
    tolerance: float
    passed: bool


def _sample_gradcheck_instance(variant: str, rng: np.random.Generator):
    """A small random (model, batch, loss spec) triple suitable for gradcheck.

    Batches are resampled while any relu pre-activation sits within 1e-3 of
    its kink (central differences straddle the kink there), any logit exceeds
    12 in magnitude (the loss clips saturated probabilities, so the analytic
    and numeric gradients legitimately diverge), or any analytic gradient
    entry is smaller than 1e-5 in magnitude (central differences carry around
    1e-11 of cancellation noise at the default step, so the relative-error
    metric cannot resolve such entries no matter how correct the gradient is).
    """
    binary = variant in BINARY_VARIANTS
    for _ in range(100):
        d0 = int(rng.integers(3, 7))
        hidden = int(rng.integers(4, 8))
        hidden_act = "relu" if rng.random() < 0.7 else "sigmoid"
        if binary:
            topology = [(d0, hidden, hidden_act), (hidden, 1, "sigmoid")]
        else:
            k = int(rng.integers(3, 6))
            topology = [(d0, hidden, hidden_act), (hidden, k, "softmax")]
        mlp = init_mlp(topology, seed=int(rng.integers(0, 2**31)))
        x = rng.normal(0.0, 1.0, size=(8, d0))

        if binary:
            y = rng.integers(0, 2, size=8).astype(np.float64)
            if variant == "bce":
                spec = LossSpec.bce()
            elif variant == "wbce":
                spec = LossSpec.wbce(float(rng.uniform(0.5, 5.0)))
            else:
                spec = LossSpec.rwwce_binary(
                    float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.5, 5.0))
                )
        else:
            labels = rng.integers(0, k, size=8)
            y = np.zeros((8, k))
            y[np.arange(8), labels] = 1.0
            if variant == "cce":
                spec = LossSpec.cce()
            elif variant == "wcce":
                spec = LossSpec.wcce(rng.uniform(0.5, 3.0, size=k))
            else:
                spec = LossSpec.rwwce_categorical(
                    rng.uniform(0.5, 3.0, size=k), rng.uniform(0.5, 3.0, size=(k, k))
                )

        ok = True
        a = x
        for layer in mlp.layers:
            z = a @ layer.weights + layer.bias
            if layer.activation == "relu" and np.abs(z).min() < 1e-3:
                ok = False
                break
            if np.abs(z).max() > 12.0:
                ok = False
                break
            a = _apply_activation(layer.activation, z)
        if not ok:
            continue
        acts = forward(mlp, x)
        grads = backward(mlp, acts, fused_gradient_from_probs(spec, acts[-1], y))
        smallest = min(float(np.abs(g).min()) for pair in grads for g in pair)
        if smallest < 1e-5:
            continue
        return mlp, (x, y), spec
    raise RuntimeError(f"could not sample a well-conditioned gradcheck instance for {variant}")


def gradcheck_matrix(
    seed: int = 0,
    instances_per_variant: int = 4,
    step: float = 1e-5,
    tolerance: float = 1e-5,
) -> GradCheckMatrixReport:
    """Gradient-check every loss variant on fresh random instances.

    Records the worst relative error seen per variant; passes only if every
    instance of every variant stays under tolerance.
    """
    if instances_per_variant < 1:
        raise ValueError("instances_per_variant must be >= 1")
    rng = np.random.default_rng(seed)
    worst_by_variant: dict[str, float] = {}
    for variant in VARIANTS:
        worst = 0.0
        for _ in range(instances_per_variant):
            mlp, batch, spec = _sample_gradcheck_instance(variant, rng)
            report = gradcheck(mlp, batch, spec, step=step, tolerance=tolerance)
            worst = max(worst, report.max_rel_error)
        worst_by_variant[variant] = worst
    passed = all(w < tolerance for w in worst_by_variant.values())
    return GradCheckMatrixReport(
        worst_by_variant=worst_by_variant,
        instances_per_variant=instances_per_variant,
        tolerance=tolerance,
        passed=passed,
    )
