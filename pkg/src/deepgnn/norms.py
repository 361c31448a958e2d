"""Normalization layers applied to node embeddings after each convolution.

All of them are differentiable compositions of tensor primitives, so the
tape handles their gradients.  Divisions by a standard deviation clamp the
divisor to exactly 1 when the variance is below 1e-24 (std below 1e-12):
degenerate rows and columns pass through unscaled instead of being amplified
by the epsilon guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import ConfigError
from .rng import Rng
from .tensor import Tensor

KINDS = ("none", "pair", "node", "mean", "batch", "group", "comb")

_VAR_FLOOR = 1e-24


@dataclass
class NormSpec:
    """Which normalization to wrap around every conv layer.

    scale is PairNorm's target row norm s, power is NodeNorm's p, groups and
    skip_weight are GroupNorm's G and lambda (also used by comb).
    """

    kind: str = "none"
    scale: float = 1.0
    power: float = 2.0
    groups: int = 10
    skip_weight: float = 0.03

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown norm kind {self.kind!r}, expected one of {KINDS}")
        if self.scale <= 0:
            raise ConfigError(f"norm.scale must be positive, got {self.scale}")
        if self.power <= 0:
            raise ConfigError(f"norm.power must be positive, got {self.power}")
        if self.groups < 1:
            raise ConfigError(f"norm.groups must be >= 1, got {self.groups}")
        if self.skip_weight < 0:
            raise ConfigError(f"norm.skip_weight must be >= 0, got {self.skip_weight}")


def _safe_pow_of_var(var: Tensor, exponent: float) -> Tensor:
    """var**exponent where var is above the floor, exactly 1 elsewhere."""
    mask = (var.data > _VAR_FLOOR).astype(np.float64)
    safe = T.add(T.mul(var, Tensor(mask)), Tensor(1.0 - mask))
    return T.pow_const(safe, exponent)


def pair_norm(x: Tensor, scale: float = 1.0) -> Tensor:
    """Center rows around the global mean, rescale to mean squared row norm s^2."""
    xc = T.sub(x, T.col_mean(x))
    msq = T.scale(T.sum_all(T.mul(xc, xc)), 1.0 / x.shape[0])
    inv = T.pow_const(T.shift(msq, 1e-12), -0.5)
    return T.mul(xc, T.scale(inv, scale))


def node_norm(x: Tensor, power: float = 2.0) -> Tensor:
    """Divide each row by its own std**(1/p); rows are not centered."""
    m = T.row_mean(x)
    c = T.sub(x, m)
    var = T.row_mean(T.mul(c, c))
    return T.mul(x, _safe_pow_of_var(var, -0.5 / power))


def mean_norm(x: Tensor) -> Tensor:
    """Remove the per-feature (column) mean."""
    return T.sub(x, T.col_mean(x))


def batch_norm(x: Tensor, gamma: Tensor, beta: Tensor) -> Tensor:
    """Standardize each column with current-graph statistics, then affine.

    Full-graph training has no running averages; the same statistics are
    used in both modes.
    """
    mu = T.col_mean(x)
    c = T.sub(x, mu)
    var = T.col_mean(T.mul(c, c))
    return T.add(T.mul(T.mul(c, _safe_pow_of_var(var, -0.5)), gamma), beta)


def group_norm(x: Tensor, u: Tensor, gamma: Tensor, beta: Tensor,
               skip_weight: float) -> Tensor:
    """x + lambda * sum_g BN_g(softmax(xU)[:, g] * x).

    Soft assignment weights come from a learned projection; each group's
    BatchNorm has its own affine (rows g of gamma/beta).  lambda == 0 is a
    bit-exact identity.
    """
    if skip_weight == 0.0:
        return x
    n_groups = u.shape[1]
    scores = T.softmax_rows(T.matmul(x, u))
    acc = None
    eye = np.eye(n_groups)
    for g in range(n_groups):
        sel = T.matmul(scores, Tensor(eye[:, g:g + 1]))  # (n, 1) column of scores
        xg = T.mul(x, sel)
        bg = batch_norm(xg, _row(gamma, g), _row(beta, g))
        acc = bg if acc is None else T.add(acc, bg)
    return T.add(x, T.scale(acc, skip_weight))


def _row(t: Tensor, i: int) -> Tensor:
    return T.take_rows(t, np.array([i]))


def comb_norm(x: Tensor, spec: NormSpec, u: Tensor, gamma: Tensor, beta: Tensor) -> Tensor:
    """GroupNorm followed by NodeNorm."""
    return node_norm(group_norm(x, u, gamma, beta, spec.skip_weight), spec.power)


def init_norm_params(spec: NormSpec, width: int, rng: Rng) -> dict:
    """Learnable arrays for one layer instance of this norm (may be empty)."""
    if spec.kind == "batch":
        return {"gamma": np.ones((1, width)), "beta": np.zeros((1, width))}
    if spec.kind in ("group", "comb"):
        limit = np.sqrt(6.0 / (width + spec.groups))
        u = rng.uniform(width * spec.groups).reshape(width, spec.groups) * 2 * limit - limit
        return {"u": u,
                "gamma": np.ones((spec.groups, width)),
                "beta": np.zeros((spec.groups, width))}
    return {}


def apply_norm(spec: NormSpec, x: Tensor, params: dict) -> Tensor:
    """Dispatch on spec.kind; params holds this layer's tensors by name."""
    if spec.kind == "none":
        return x
    if spec.kind == "pair":
        return pair_norm(x, spec.scale)
    if spec.kind == "node":
        return node_norm(x, spec.power)
    if spec.kind == "mean":
        return mean_norm(x)
    if spec.kind == "batch":
        return batch_norm(x, params["gamma"], params["beta"])
    if spec.kind == "group":
        return group_norm(x, params["u"], params["gamma"], params["beta"], spec.skip_weight)
    if spec.kind == "comb":
        return comb_norm(x, spec, params["u"], params["gamma"], params["beta"])
    raise ConfigError(f"unknown norm kind {spec.kind!r}")
