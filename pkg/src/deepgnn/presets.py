"""Named experiment presets.

Two families:

* ``sweet-<dataset>``: the tuned baseline hyperparameters for a plain
  2-layer GCN on that dataset, no tricks.
* ``best-<dataset>``: the strongest known trick combination for that
  dataset, on top of the same tuned hyperparameters.

``get_preset`` returns a fresh ExperimentSpec each call, so callers may
mutate the result freely.
"""

from __future__ import annotations

from .config import ExperimentSpec, TrainConfig, TrickConfig
from .dropping import DropSpec
from .errors import ConfigError
from .norms import NormSpec
from .skips import SkipSpec

# dataset -> (lr, weight_decay, dropout, hidden_dim)
SWEET_POINTS = {
    "cora": (0.005, 5e-4, 0.6, 64),
    "citeseer": (0.005, 5e-4, 0.6, 256),
    "pubmed": (0.01, 5e-4, 0.5, 256),
    "arxiv": (0.005, 0.0, 0.1, 256),
}

# dataset -> (groups, scale) for the group/comb norms
GROUP_NORM_DEFAULTS = {
    "cora": (10, 0.03),
    "citeseer": (10, 0.005),
    "pubmed": (5, 0.01),
    "arxiv": (10, 0.005),
}

# dataset -> lambda for identity mapping
IDENTITY_LAMBDA_DEFAULTS = {
    "cora": 0.1,
    "citeseer": 0.1,
    "pubmed": 0.1,
    "arxiv": 0.5,
}

MAX_EPOCHS = 1000
PATIENCE = 100


def _train_cfg(dataset: str, label_smoothing: float = 0.0) -> TrainConfig:
    lr, wd, _, _ = SWEET_POINTS[dataset]
    return TrainConfig(lr=lr, weight_decay=wd, max_epochs=MAX_EPOCHS,
                       patience=PATIENCE, label_smoothing=label_smoothing)


def _sweet(dataset: str) -> ExperimentSpec:
    _, _, dropout, hidden = SWEET_POINTS[dataset]
    trick = TrickConfig(backbone="gcn", depth=2, hidden_dim=hidden,
                        drop=DropSpec(feature_dropout=dropout))
    return ExperimentSpec(dataset=dataset, trick=trick, train=_train_cfg(dataset))


def _best_cora() -> ExperimentSpec:
    # 64-layer SGC, initial-connection skips, baseline dropout, smoothed loss
    _, _, dropout, hidden = SWEET_POINTS["cora"]
    trick = TrickConfig(backbone="sgc", depth=64, hidden_dim=hidden,
                        skip=SkipSpec(mode="initial"),
                        drop=DropSpec(feature_dropout=dropout))
    return ExperimentSpec(dataset="cora", trick=trick,
                          train=_train_cfg("cora", label_smoothing=0.1))


def _best_pubmed() -> ExperimentSpec:
    # 32-layer SGC with jumping connections and no dropout
    hidden = SWEET_POINTS["pubmed"][3]
    trick = TrickConfig(backbone="sgc", depth=32, hidden_dim=hidden,
                        skip=SkipSpec(mode="jumping", com="concat"))
    return ExperimentSpec(dataset="pubmed", trick=trick, train=_train_cfg("pubmed"))


def _best_citeseer() -> ExperimentSpec:
    # 32-layer GCN, initial skips plus identity mapping, smoothed loss
    _, _, dropout, hidden = SWEET_POINTS["citeseer"]
    trick = TrickConfig(backbone="gcn", depth=32, hidden_dim=hidden,
                        skip=SkipSpec(mode="initial"),
                        drop=DropSpec(feature_dropout=dropout),
                        identity_mapping=True,
                        identity_lambda=IDENTITY_LAMBDA_DEFAULTS["citeseer"])
    return ExperimentSpec(dataset="citeseer", trick=trick,
                          train=_train_cfg("citeseer", label_smoothing=0.1))


def _best_arxiv() -> ExperimentSpec:
    # 16-layer GCN, initial skips, identity mapping, combined norm, light dropout
    _, _, dropout, hidden = SWEET_POINTS["arxiv"]
    groups, scale = GROUP_NORM_DEFAULTS["arxiv"]
    trick = TrickConfig(backbone="gcn", depth=16, hidden_dim=hidden,
                        skip=SkipSpec(mode="initial"),
                        norm=NormSpec(kind="comb", groups=groups, skip_weight=scale),
                        drop=DropSpec(feature_dropout=dropout),
                        identity_mapping=True,
                        identity_lambda=IDENTITY_LAMBDA_DEFAULTS["arxiv"])
    return ExperimentSpec(dataset="arxiv", trick=trick, train=_train_cfg("arxiv"))


_BUILDERS = {
    "sweet-cora": lambda: _sweet("cora"),
    "sweet-citeseer": lambda: _sweet("citeseer"),
    "sweet-pubmed": lambda: _sweet("pubmed"),
    "sweet-arxiv": lambda: _sweet("arxiv"),
    "best-cora": _best_cora,
    "best-citeseer": _best_citeseer,
    "best-pubmed": _best_pubmed,
    "best-arxiv": _best_arxiv,
}

PRESET_NAMES = tuple(sorted(_BUILDERS))


def get_preset(name: str) -> ExperimentSpec:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}") from None
    spec = builder()
    spec.validate()
    return spec
