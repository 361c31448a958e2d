"""Random dropping: feature dropout and the three graph sampling schemes.

A `DropPlan` is built once per training epoch and hands each layer its
effective propagation operator.  Masks for different layers come from
disjoint Rng substreams, so the sequence is reproducible bit for bit no
matter how layers interleave their draws.  Evaluation never drops anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import ConfigError
from .graph import (CsrGraph, drop_edge, drop_node_mask, ladies_probs,
                    ladies_sample, mask_cols, mask_rows_cols, sym_normalize)
from .rng import Rng
from .tensor import Tensor

SCHEMES = ("none", "drop_edge", "drop_node", "ladies")


@dataclass
class DropSpec:
    """feature_dropout is the element rate; graph_rate drives the scheme.

    layerwise=True draws a fresh graph mask per layer, False shares one mask
    across all layers within the epoch.  ladies is inherently layer-wise
    (its sets are defined by a backward recursion), so the flag is ignored
    there.  Rates are drop probabilities; keep probability is 1-rate.
    """

    feature_dropout: float = 0.0
    scheme: str = "none"
    graph_rate: float = 0.0
    layerwise: bool = True

    def validate(self):
        if not 0.0 <= self.feature_dropout < 1.0:
            raise ConfigError(f"feature_dropout must be in [0, 1), got {self.feature_dropout}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown drop scheme {self.scheme!r}, expected one of {SCHEMES}")
        if not 0.0 <= self.graph_rate <= 1.0:
            raise ConfigError(f"graph_rate must be in [0, 1], got {self.graph_rate}")


def feature_dropout(x: Tensor, rate: float, rng: Rng, training: bool) -> Tensor:
    """Inverted dropout: kept entries are scaled by 1/(1-rate)."""
    if not training or rate == 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    n, d = x.shape
    keep = rng.bernoulli_keep(1.0 - rate, n * d).reshape(n, d)
    mask = keep.astype(np.float64) * (1.0 / (1.0 - rate))
    return T.mul(x, Tensor(mask))


class DropPlan:
    """Per-epoch supplier of effective adjacencies, one per layer."""

    def __init__(self, spec: DropSpec, graph: CsrGraph, depth: int, rng: Rng | None):
        self.spec = spec
        self.graph = graph
        self.depth = depth
        self._cache = {}
        self._shared = None
        self._ladies_sets = None
        self._rng = rng
        if spec.scheme == "ladies" and rng is not None:
            self._ladies_sets = _ladies_node_sets(graph, depth, spec.graph_rate, rng)

    def effective_adjacency(self, layer: int) -> CsrGraph:
        """Normalized operator for `layer` (0-based propagation step)."""
        spec = self.spec
        if self._rng is None or spec.scheme == "none" or spec.graph_rate == 0.0:
            return self.graph.normalized()
        if layer in self._cache:
            return self._cache[layer]
        if spec.scheme == "ladies":
            sets = self._ladies_sets
            masked = mask_rows_cols(self.graph, sets[layer + 1], sets[layer])
            op = sym_normalize(masked)
        elif spec.layerwise:
            op = self._sample(self._rng.substream(layer))
        else:
            if self._shared is None:
                self._shared = self._sample(self._rng.substream(0))
            op = self._shared
        self._cache[layer] = op
        return op

    def _sample(self, rng: Rng) -> CsrGraph:
        spec = self.spec
        if spec.scheme == "drop_edge":
            return sym_normalize(drop_edge(self.graph, spec.graph_rate, rng))
        if spec.scheme == "drop_node":
            keep = drop_node_mask(self.graph.n, spec.graph_rate, rng)
            return sym_normalize(mask_cols(self.graph, keep))
        raise ConfigError(f"scheme {spec.scheme!r} cannot be sampled per layer")


def build_drop_plan(spec: DropSpec, graph: CsrGraph, depth: int,
                    rng: Rng | None, training: bool) -> DropPlan:
    """rng=None or training=False yields the no-op plan (cached R(A) everywhere)."""
    if not training:
        rng = None
    return DropPlan(spec, graph, depth, rng)


def _ladies_node_sets(graph: CsrGraph, depth: int, rate: float, rng: Rng):
    """Backward recursion over layers: S_depth = everything, then sample down.

    Set l is drawn from the squared column masses of the rows selected at
    l+1, with target size ceil((1-rate) * n); fewer come back when the
    distribution's support is smaller.
    """
    n = graph.n
    size = math.ceil((1.0 - rate) * n)
    sets = [None] * (depth + 1)
    sets[depth] = np.ones(n, dtype=bool)
    for l in range(depth - 1, -1, -1):
        p = ladies_probs(graph, sets[l + 1])
        idx = ladies_sample(p, size, rng.substream(l))
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        sets[l] = mask
    return sets
