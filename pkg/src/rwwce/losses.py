"""Cross-entropy loss family with real-world cost weighting.

Six loss variants share a common shape: a per-example sum of weighted log
terms, averaged over the batch and negated.  The plain and class-weighted
variants are the familiar binary/categorical cross-entropies; the
real-world-weight variants replace the class weights with marginal dollar
(or hour, or any unit) costs of false negatives and false positives, so the
training objective is denominated in the same units as the deployment cost.

All losses use natural log and clip each log argument below at EPSILON so a
saturated probability yields a large finite penalty instead of an infinity.
Each public loss function writes out its own formula; the weighted variants
degenerate to the unweighted ones exactly when their weights are 1 (and the
false-positive matrix is 0), and tests hold them to that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EPSILON = 1e-7

VARIANTS = ("bce", "wbce", "cce", "wcce", "rwwce_binary", "rwwce_categorical")
BINARY_VARIANTS = ("bce", "wbce", "rwwce_binary")
CATEGORICAL_VARIANTS = ("cce", "wcce", "rwwce_categorical")

ROW_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class BinaryCostModel:
    """Marginal real-world costs of the two binary error types.

    fn_cost is charged against the positive-label log term (missing a real
    positive), fp_cost against the negative-label term (a false alarm).
    Costs must be finite, nonnegative, and not both zero.
    """

    fn_cost: float
    fp_cost: float

    def __post_init__(self) -> None:
        for name in ("fn_cost", "fp_cost"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")
        if self.fn_cost == 0 and self.fp_cost == 0:
            raise ValueError("at least one of fn_cost, fp_cost must be positive")


@dataclass
class CategoricalCostModel:
    """Per-class false-negative costs and a per-pair false-positive cost matrix.

    fn_costs has length K.  fp_costs is K x K where fp_costs[k][k'] prices
    predicting class k' on an example whose true class is k.  The diagonal is
    never read: a correct prediction is not an error.
    """

    fn_costs: np.ndarray
    fp_costs: np.ndarray

    def __post_init__(self) -> None:
        self.fn_costs = np.asarray(self.fn_costs, dtype=np.float64)
        self.fp_costs = np.asarray(self.fp_costs, dtype=np.float64)
        if self.fn_costs.ndim != 1:
            raise ValueError("fn_costs must be a vector")
        k = self.fn_costs.shape[0]
        if k < 2:
            raise ValueError("need at least two classes")
        if self.fp_costs.shape != (k, k):
            raise ValueError(
                f"fp_costs must be {k}x{k} to match fn_costs, got {self.fp_costs.shape}"
            )
        for name, arr in (("fn_costs", self.fn_costs), ("fp_costs", self.fp_costs)):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"{name} entries must be finite and nonnegative")

    @property
    def num_classes(self) -> int:
        return self.fn_costs.shape[0]

    def fp_costs_off_diagonal(self) -> np.ndarray:
        """fp_costs with the (unread) diagonal forced to zero."""
        out = self.fp_costs.copy()
        np.fill_diagonal(out, 0.0)
        return out


@dataclass
class LegacyWeights:
    """Class weights for the standard weighted cross-entropies.

    positive scales the positive-label term of the binary loss; per_class
    scales each true-class term of the categorical loss.  Both must be
    strictly positive.
    """

    positive: float = 1.0
    per_class: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.positive) or self.positive <= 0:
            raise ValueError(f"positive weight must be finite and > 0, got {self.positive!r}")
        if self.per_class is not None:
            self.per_class = np.asarray(self.per_class, dtype=np.float64)
            if self.per_class.ndim != 1 or self.per_class.size < 2:
                raise ValueError("per_class must be a vector of length >= 2")
            if not np.all(np.isfinite(self.per_class)) or np.any(self.per_class <= 0):
                raise ValueError("per_class weights must be finite and > 0")


@dataclass
class LossSpec:
    """A loss variant plus whatever weight payload that variant needs."""

    variant: str
    weights: LegacyWeights | None = None
    binary_cost: BinaryCostModel | None = None
    categorical_cost: CategoricalCostModel | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown loss variant {self.variant!r}")
        if self.variant == "wbce" and (self.weights is None):
            raise ValueError("wbce requires LegacyWeights with a positive weight")
        if self.variant == "wcce" and (self.weights is None or self.weights.per_class is None):
            raise ValueError("wcce requires LegacyWeights with per_class weights")
        if self.variant == "rwwce_binary" and self.binary_cost is None:
            raise ValueError("rwwce_binary requires a BinaryCostModel")
        if self.variant == "rwwce_categorical" and self.categorical_cost is None:
            raise ValueError("rwwce_categorical requires a CategoricalCostModel")

    @property
    def is_binary(self) -> bool:
        return self.variant in BINARY_VARIANTS

    @classmethod
    def bce(cls) -> "LossSpec":
        return cls("bce")

    @classmethod
    def wbce(cls, positive_weight: float) -> "LossSpec":
        return cls("wbce", weights=LegacyWeights(positive=positive_weight))

    @classmethod
    def cce(cls) -> "LossSpec":
        return cls("cce")

    @classmethod
    def wcce(cls, per_class: Sequence[float] | np.ndarray) -> "LossSpec":
        return cls("wcce", weights=LegacyWeights(per_class=np.asarray(per_class, dtype=np.float64)))

    @classmethod
    def rwwce_binary(cls, fn_cost: float, fp_cost: float) -> "LossSpec":
        return cls("rwwce_binary", binary_cost=BinaryCostModel(fn_cost, fp_cost))

    @classmethod
    def rwwce_categorical(cls, fn_costs, fp_costs) -> "LossSpec":
        return cls(
            "rwwce_categorical",
            categorical_cost=CategoricalCostModel(np.asarray(fn_costs), np.asarray(fp_costs)),
        )


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction for stability."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"softmax expects a 2-D array of logits, got shape {z.shape}")
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _as_binary_pair(h, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate and normalize (probabilities, labels) to flat float64 vectors.

    Accepts shape (M,) or a single column (M, 1) for either argument.
    """
    h = np.asarray(h, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if h.ndim == 2 and h.shape[1] == 1:
        h = h[:, 0]
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if h.ndim != 1 or y.ndim != 1:
        raise ValueError(f"expected vectors, got shapes {h.shape} and {y.shape}")
    if h.shape != y.shape:
        raise ValueError(f"shape mismatch: {h.shape} probabilities vs {y.shape} labels")
    if h.size == 0:
        raise ValueError("empty batch")
    if np.any((y != 0.0) & (y != 1.0)):
        raise ValueError("binary labels must be exactly 0 or 1")
    if np.any(h < 0.0) or np.any(h > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return h, y


def _as_categorical_pair(h, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate (probability rows, one-hot rows); rows of h must sum to 1."""
    h = np.asarray(h, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if h.ndim != 2 or y.ndim != 2:
        raise ValueError(f"expected 2-D arrays, got shapes {h.shape} and {y.shape}")
    if h.shape != y.shape:
        raise ValueError(f"shape mismatch: {h.shape} probabilities vs {y.shape} labels")
    if h.shape[0] == 0:
        raise ValueError("empty batch")
    if h.shape[1] < 2:
        raise ValueError("categorical batch needs at least two classes")
    if np.any(h < 0.0) or np.any(h > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if np.any(np.abs(h.sum(axis=1) - 1.0) > ROW_SUM_TOLERANCE):
        raise ValueError("probability rows must sum to 1")
    if np.any((y != 0.0) & (y != 1.0)) or np.any(y.sum(axis=1) != 1.0):
        raise ValueError("labels must be exact one-hot rows")
    return h, y


def _clipped_logs(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log h, log(1-h)) with each log argument clipped below at EPSILON."""
    return (
        np.log(np.maximum(h, EPSILON)),
        np.log(np.maximum(1.0 - h, EPSILON)),
    )


def bce_loss(h, y) -> float:
    """Binary cross-entropy, averaged over the batch."""
    h, y = _as_binary_pair(h, y)
    log_h, log_not_h = _clipped_logs(h)
    return float(-np.mean(y * log_h + (1.0 - y) * log_not_h))


def wbce_loss(h, y, weights: LegacyWeights) -> float:
    """Binary cross-entropy with the positive-label term scaled by weights.positive."""
    h, y = _as_binary_pair(h, y)
    log_h, log_not_h = _clipped_logs(h)
    return float(-np.mean(weights.positive * y * log_h + (1.0 - y) * log_not_h))


def rwwce_binary_loss(h, y, cost: BinaryCostModel) -> float:
    """Binary cross-entropy with each error term priced at its marginal cost.

    The positive-label log term carries cost.fn_cost, the negative-label term
    cost.fp_cost, so the value is the batch-mean expected cost surrogate.
    """
    h, y = _as_binary_pair(h, y)
    log_h, log_not_h = _clipped_logs(h)
    return float(-np.mean(cost.fn_cost * y * log_h + cost.fp_cost * (1.0 - y) * log_not_h))


def cce_loss(h, y) -> float:
    """Categorical cross-entropy over probability rows and one-hot labels."""
    h, y = _as_categorical_pair(h, y)
    log_h = np.log(np.maximum(h, EPSILON))
    return float(-np.mean((y * log_h).sum(axis=1)))


def wcce_loss(h, y, weights: LegacyWeights) -> float:
    """Categorical cross-entropy with each true-class term scaled by its class weight."""
    h, y = _as_categorical_pair(h, y)
    if weights.per_class is None:
        raise ValueError("wcce requires per_class weights")
    if weights.per_class.shape[0] != h.shape[1]:
        raise ValueError(
            f"per_class has {weights.per_class.shape[0]} entries for {h.shape[1]} classes"
        )
    log_h = np.log(np.maximum(h, EPSILON))
    return float(-np.mean((weights.per_class * y * log_h).sum(axis=1)))


def rwwce_categorical_loss(h, y, cost: CategoricalCostModel) -> float:
    """Categorical cross-entropy priced by real-world costs.

    For an example of true class k the loss charges fn_costs[k] on the
    true-class log term and, for every other class k', fp_costs[k][k'] on
    log(1 - h_k'), penalizing probability parked on wrong classes that are
    expensive to confuse.  The diagonal of fp_costs is ignored.
    """
    h, y = _as_categorical_pair(h, y)
    if cost.num_classes != h.shape[1]:
        raise ValueError(f"cost model has {cost.num_classes} classes, batch has {h.shape[1]}")
    log_h, log_not_h = _clipped_logs(h)
    fp = cost.fp_costs_off_diagonal()
    fn_rows = (cost.fn_costs * y * log_h).sum(axis=1)
    fp_rows = ((y @ fp) * log_not_h).sum(axis=1)
    return float(-np.mean(fn_rows + fp_rows))


def loss_value(spec: LossSpec, h, y) -> float:
    """Evaluate the loss named by spec on a batch of predictions."""
    if spec.variant == "bce":
        return bce_loss(h, y)
    if spec.variant == "wbce":
        return wbce_loss(h, y, spec.weights)
    if spec.variant == "cce":
        return cce_loss(h, y)
    if spec.variant == "wcce":
        return wcce_loss(h, y, spec.weights)
    if spec.variant == "rwwce_binary":
        return rwwce_binary_loss(h, y, spec.binary_cost)
    return rwwce_categorical_loss(h, y, spec.categorical_cost)


def _binary_term_weights(spec: LossSpec) -> tuple[float, float]:
    """(positive-term, negative-term) multipliers for a binary variant."""
    if spec.variant == "bce":
        return 1.0, 1.0
    if spec.variant == "wbce":
        return spec.weights.positive, 1.0
    return spec.binary_cost.fn_cost, spec.binary_cost.fp_cost


def _categorical_term_weights(spec: LossSpec, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(true-class vector, off-diagonal fp matrix) multipliers for a categorical variant."""
    if spec.variant == "cce":
        return np.ones(k), np.zeros((k, k))
    if spec.variant == "wcce":
        w = spec.weights.per_class
        if w.shape[0] != k:
            raise ValueError(f"per_class has {w.shape[0]} entries for {k} classes")
        return w, np.zeros((k, k))
    cost = spec.categorical_cost
    if cost.num_classes != k:
        raise ValueError(f"cost model has {cost.num_classes} classes, batch has {k}")
    return cost.fn_costs, cost.fp_costs_off_diagonal()


def fused_gradient_from_probs(spec: LossSpec, h, y) -> np.ndarray:
    """Gradient of loss_value with respect to the final-layer logits,
    expressed through the activation outputs h (sigmoid or softmax rows).

    The sigmoid/softmax Jacobian is folded in analytically, which keeps the
    computation free of the 1/h and 1/(1-h) blowups a chain through the raw
    probability gradient would hit.  Returns an array shaped like h, already
    carrying the 1/M batch-mean factor.
    """
    given = np.asarray(h, dtype=np.float64)
    if spec.is_binary:
        hv, yv = _as_binary_pair(h, y)
        a, b = _binary_term_weights(spec)
        grad = (a * yv * (hv - 1.0) + b * (1.0 - yv) * hv) / hv.shape[0]
        return grad.reshape(given.shape)

    hm, ym = _as_categorical_pair(h, y)
    m, k = hm.shape
    a, fp = _categorical_term_weights(spec, k)
    # For row m with true class t:  u_t = -a_t,  u_j = fp[t,j] * h_j / (1-h_j).
    # Through the softmax Jacobian, dJ/dz_i = (u_i - h_i * sum_j u_j) / M.
    ratio = hm / np.maximum(1.0 - hm, EPSILON)
    u = -(ym * a) + (ym @ fp) * ratio
    s = u.sum(axis=1, keepdims=True)
    return (u - hm * s) / m


def fused_logit_gradient(spec: LossSpec, z, y) -> np.ndarray:
    """Gradient of loss_value(spec, activation(z), y) with respect to z.

    For binary variants z holds sigmoid logits, shape (M,) or (M, 1); for
    categorical variants z holds softmax logit rows, shape (M, K).  Matches
    central finite differences of the composed loss.
    """
    z = np.asarray(z, dtype=np.float64)
    if spec.is_binary:
        h = sigmoid(z)
    else:
        h = softmax(z)
    return fused_gradient_from_probs(spec, h, y)


def binary_cost_from_json(doc: dict) -> BinaryCostModel:
    """Build a BinaryCostModel from {"w_mcfn": number, "w_mcfp": number}."""
    if not isinstance(doc, dict) or set(doc) != {"w_mcfn", "w_mcfp"}:
        raise ValueError('binary cost document must have exactly the keys "w_mcfn", "w_mcfp"')
    return BinaryCostModel(float(doc["w_mcfn"]), float(doc["w_mcfp"]))


def categorical_cost_from_json(doc: dict) -> CategoricalCostModel:
    """Build a CategoricalCostModel from {"k": K, "w_fn": [...], "w_fp": [[...]]}."""
    if not isinstance(doc, dict) or set(doc) != {"k", "w_fn", "w_fp"}:
        raise ValueError('categorical cost document must have exactly the keys "k", "w_fn", "w_fp"')
    k = int(doc["k"])
    fn = np.asarray(doc["w_fn"], dtype=np.float64)
    fp = np.asarray(doc["w_fp"], dtype=np.float64)
    if fn.shape != (k,):
        raise ValueError(f'"w_fn" must be a list of {k} numbers')
    if fp.shape != (k, k):
        raise ValueError(f'"w_fp" must be a {k}x{k} matrix')
    return CategoricalCostModel(fn, fp)


def cost_model_from_json(text_or_doc) -> BinaryCostModel | CategoricalCostModel:
    """Parse a cost model from a JSON string or an already-decoded document."""
    doc = json.loads(text_or_doc) if isinstance(text_or_doc, str) else text_or_doc
    if isinstance(doc, dict) and "w_mcfn" in doc:
        return binary_cost_from_json(doc)
    return categorical_cost_from_json(doc)
