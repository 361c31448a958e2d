"""Skip connections across conv layers and the COM combiners behind them.

History is the list of embeddings [X^0, X^1, ..., X^(l-1)] where X^0 is the
output of the input transform.  residual blends with the last entry, initial
with X^0, dense combines the whole stack every layer, jumping combines it
once after the final layer (during the loop it behaves like none).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import ConfigError
from .rng import Rng
from .tensor import Tensor

MODES = ("none", "residual", "initial", "dense", "jumping")
COMS = ("concat", "maxpool", "attention")


@dataclass
class SkipSpec:
    mode: str = "none"
    alpha: float = 0.1
    com: str = "concat"
    attention_softmax: bool = False  # default normalizes scores by their sum

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown skip mode {self.mode!r}, expected one of {MODES}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"skip.alpha must be in [0, 1], got {self.alpha}")
        if self.com not in COMS:
            raise ConfigError(f"unknown COM {self.com!r}, expected one of {COMS}")

    @property
    def uses_com(self) -> bool:
        return self.mode in ("dense", "jumping")


def init_com_params(spec: SkipSpec, width: int, n_inputs: int, rng: Rng) -> dict:
    """Learnable arrays for one COM application over a stack of n_inputs.

    concat re-projects the concatenation back to `width`; attention shares a
    single scoring vector, so n_inputs does not matter; maxpool is free.
    """
    if spec.com == "concat":
        fan_in = width * n_inputs
        limit = np.sqrt(6.0 / (fan_in + width))
        w = rng.uniform(fan_in * width).reshape(fan_in, width) * 2 * limit - limit
        return {"w": w}
    if spec.com == "attention":
        limit = np.sqrt(6.0 / (width + 1))
        return {"w": rng.uniform(width).reshape(width, 1) * 2 * limit - limit}
    return {}


def com_apply(spec: SkipSpec, stack: list, params: dict) -> Tensor:
    """Combine a stack of same-shape embeddings into one."""
    if len(stack) == 0:
        raise ConfigError("COM over an empty stack")
    if len(stack) == 1:
        return stack[0]
    if spec.com == "maxpool":
        out = stack[0]
        for x in stack[1:]:
            out = T.maximum(out, x)
        return out
    if spec.com == "concat":
        w = params.get("w")
        if w is None:
            raise ConfigError("concat COM is missing its projection weight")
        cat = T.concat_cols(stack)
        if w.shape[0] != cat.shape[1]:
            raise ConfigError(
                f"concat COM weight has {w.shape[0]} rows, stack concatenates to {cat.shape[1]}")
        return T.matmul(cat, w)
    if spec.com == "attention":
        w = params.get("w")
        if w is None:
            raise ConfigError("attention COM is missing its scoring vector")
        scores = T.concat_cols([T.sigmoid(T.matmul(x, w)) for x in stack])
        if spec.attention_softmax:
            weights = T.softmax_rows(scores)
        else:
            # sigmoid scores are strictly positive, so the sum never vanishes
            weights = T.mul(scores, T.pow_const(T.row_sum(scores), -1.0))
        eye = np.eye(len(stack))
        out = None
        for k, x in enumerate(stack):
            wk = T.matmul(weights, Tensor(eye[:, k:k + 1]))
            term = T.mul(x, wk)
            out = term if out is None else T.add(out, term)
        return out
    raise ConfigError(f"unknown COM {spec.com!r}")


def skip_combine(spec: SkipSpec, x: Tensor, history: list, com_params: dict | None = None) -> Tensor:
    """Produce layer output X^l from the conv output x and the history.

    jumping passes x through untouched here; its combination happens once
    after the loop via jumping_aggregate.
    """
    if spec.mode in ("none", "jumping"):
        return x
    if not history:
        raise ConfigError("skip_combine needs a non-empty history")
    if spec.mode == "residual":
        return T.add(T.scale(x, 1.0 - spec.alpha), T.scale(history[-1], spec.alpha))
    if spec.mode == "initial":
        return T.add(T.scale(x, 1.0 - spec.alpha), T.scale(history[0], spec.alpha))
    if spec.mode == "dense":
        return com_apply(spec, [*history, x], com_params or {})
    raise ConfigError(f"unknown skip mode {spec.mode!r}")


def jumping_aggregate(spec: SkipSpec, history: list, com_params: dict) -> Tensor:
    """Final combination over the full stack for jumping knowledge."""
    return com_apply(spec, history, com_params)
