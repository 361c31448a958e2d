"""Backbone layers and model assembly.

Architecture: input transform (with relu) projecting raw features to the
hidden width, then `depth` propagation layers wrapped with the configured
tricks, then an output transform to class logits.  Only the two end
transforms carry biases.  Per layer the order is

    dropout -> propagate -> weight (gcn only) -> norm -> relu (gcn only) -> skip

X^0, the skip connections' anchor, is the input transform's output.  SGC
keeps the end transforms trainable but has no per-layer weights and no
per-layer nonlinearity.
"""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .config import TrickConfig
from .dropping import DropPlan, feature_dropout
from .errors import ConfigError
from .graph import CsrGraph, spmm
from .norms import apply_norm, init_norm_params
from .rng import Rng
from .skips import com_apply, init_com_params, skip_combine
from .tensor import GradTape, Tensor


def identity_mapping_beta(lam: float, layer: int) -> float:
    """Weight retention factor beta_l = log(lambda / l + 1) for layer l >= 1."""
    if layer < 1:
        raise ConfigError(f"layer index must be >= 1, got {layer}")
    return math.log(lam / layer + 1.0)


def gcn_layer(op: CsrGraph, h: Tensor, w: Tensor, beta: float = 1.0) -> Tensor:
    """(R h)(beta W + (1-beta) I), computed as beta (Rh)W + (1-beta) Rh.

    beta=1 is the plain convolution; smaller beta shrinks the weight toward
    the identity.
    """
    p = spmm(op, h)
    z = T.matmul(p, w)
    if beta != 1.0:
        z = T.add(T.scale(z, beta), T.scale(p, 1.0 - beta))
    return z


def sgc_layer(op: CsrGraph, h: Tensor) -> Tensor:
    """One parameter-free propagation step."""
    return spmm(op, h)


class ModelParams:
    """Named parameter arrays in a fixed creation order.

    group is "hidden" or "output"; the trainer can decay the output
    transform separately.
    """

    def __init__(self):
        self._arrays = {}
        self._groups = {}

    def add(self, name, array, group="hidden"):
        if name in self._arrays:
            raise ConfigError(f"duplicate parameter name {name!r}")
        self._arrays[name] = np.asarray(array, dtype=np.float64)
        self._groups[name] = group

    def names(self):
        return list(self._arrays)

    def array(self, name):
        return self._arrays[name]

    def group(self, name):
        return self._groups[name]

    def count(self) -> int:
        return sum(a.size for a in self._arrays.values())

    def snapshot(self) -> dict:
        return {k: v.copy() for k, v in self._arrays.items()}

    def restore(self, snap: dict):
        for k, v in snap.items():
            np.copyto(self._arrays[k], v)


def _glorot(rng: Rng, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(fan_in * fan_out).reshape(fan_in, fan_out) * 2 * limit - limit


def build_model(cfg: TrickConfig, in_dim: int, n_classes: int, rng: Rng) -> ModelParams:
    """Create all parameters for the configured trick stack.

    Draw order is fixed (input transform, conv weights, COM, norms, output
    transform), so a given seed always produces the same initialization.
    """
    cfg.validate()
    h = cfg.hidden_dim
    params = ModelParams()
    params.add("w_in", _glorot(rng, in_dim, h))
    params.add("b_in", np.zeros((1, h)))
    if cfg.backbone == "gcn":
        for l in range(1, cfg.depth + 1):
            params.add(f"w_l{l}", _glorot(rng, h, h))
    if cfg.skip.mode == "dense":
        if cfg.skip.com == "concat":
            for l in range(1, cfg.depth + 1):
                p = init_com_params(cfg.skip, h, l + 1, rng)
                params.add(f"com_l{l}_w", p["w"])
        elif cfg.skip.com == "attention":
            params.add("com_w", init_com_params(cfg.skip, h, 2, rng)["w"])
    elif cfg.skip.mode == "jumping":
        if cfg.skip.com == "concat":
            p = init_com_params(cfg.skip, h, cfg.depth + 1, rng)
            params.add("com_w", p["w"])
        elif cfg.skip.com == "attention":
            params.add("com_w", init_com_params(cfg.skip, h, 2, rng)["w"])
    for l in range(1, cfg.depth + 1):
        for key, arr in init_norm_params(cfg.norm, h, rng).items():
            params.add(f"norm_l{l}_{key}", arr)
    params.add("w_out", _glorot(rng, h, n_classes), group="output")
    params.add("b_out", np.zeros((1, n_classes)), group="output")
    return params


def wrap_params(params: ModelParams, tape: GradTape | None) -> dict:
    """Tensor views of the arrays; leaves on the tape when one is given."""
    if tape is None:
        return {name: Tensor(params.array(name)) for name in params.names()}
    return {name: tape.leaf(params.array(name)) for name in params.names()}


def _com_params_for_layer(cfg: TrickConfig, t: dict, layer: int) -> dict:
    if not cfg.skip.uses_com:
        return {}
    if cfg.skip.com == "concat":
        key = f"com_l{layer}_w" if cfg.skip.mode == "dense" else "com_w"
        return {"w": t[key]}
    if cfg.skip.com == "attention":
        return {"w": t["com_w"]}
    return {}


def _norm_params_for_layer(cfg: TrickConfig, t: dict, layer: int) -> dict:
    if cfg.norm.kind == "batch":
        return {"gamma": t[f"norm_l{layer}_gamma"], "beta": t[f"norm_l{layer}_beta"]}
    if cfg.norm.kind in ("group", "comb"):
        return {"u": t[f"norm_l{layer}_u"],
                "gamma": t[f"norm_l{layer}_gamma"],
                "beta": t[f"norm_l{layer}_beta"]}
    return {}


def model_forward(cfg: TrickConfig, t: dict, x: Tensor, plan: DropPlan,
                  rng_feat: Rng | None = None, training: bool = False) -> Tensor:
    """Logits for every node.

    t maps parameter names to Tensors (see wrap_params), plan supplies each
    layer's effective adjacency, rng_feat drives feature dropout and is only
    consulted when training.
    """
    if training and cfg.drop.feature_dropout > 0.0 and rng_feat is None:
        raise ConfigError("training with feature dropout needs an rng")
    h = T.relu(T.add(T.matmul(x, t["w_in"]), t["b_in"]))
    history = [h]
    for l in range(1, cfg.depth + 1):
        hd = h
        if training and cfg.drop.feature_dropout > 0.0:
            hd = feature_dropout(h, cfg.drop.feature_dropout, rng_feat.substream(l), True)
        op = plan.effective_adjacency(l - 1)
        if cfg.backbone == "gcn":
            beta = identity_mapping_beta(cfg.identity_lambda, l) if cfg.identity_mapping else 1.0
            z = gcn_layer(op, hd, t[f"w_l{l}"], beta)
        else:
            z = sgc_layer(op, hd)
        z = apply_norm(cfg.norm, z, _norm_params_for_layer(cfg, t, l))
        if cfg.backbone == "gcn":
            z = T.relu(z)
        h = skip_combine(cfg.skip, z, history, _com_params_for_layer(cfg, t, l))
        history.append(h)
    if cfg.skip.mode == "jumping":
        h = com_apply(cfg.skip, history, _com_params_for_layer(cfg, t, 0))
    return T.add(T.matmul(h, t["w_out"]), t["b_out"])


def smoothness(x: np.ndarray, seed: int = 0, max_pairs: int = 1000) -> float:
    """Mean cosine similarity over sampled row pairs.

    Enumerates all pairs when there are at most max_pairs of them, otherwise
    samples that many (seeded, with replacement).  Zero rows contribute
    cosine 0 with any partner.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        return 0.0
    total = n * (n - 1) // 2
    if total <= max_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        rng = Rng(seed)
        ii = np.floor(rng.uniform(max_pairs) * n).astype(np.int64)
        jj = np.floor(rng.uniform(max_pairs) * n).astype(np.int64)
        ok = ii != jj
        ii, jj = ii[ok], jj[ok]
    norms = np.linalg.norm(x, axis=1)
    denom = norms[ii] * norms[jj]
    dots = np.einsum("ij,ij->i", x[ii], x[jj])
    cos = np.where(denom > 0.0, dots / np.where(denom > 0.0, denom, 1.0), 0.0)
    return float(cos.mean())
