"""Deep GNN training tricks: backbones, skip/norm/drop tricks, benchmark runner."""

__version__ = "0.1.0"

from .config import ExperimentSpec, TrainConfig, TrickConfig, parse_spec_file, parse_spec_text
from .data import Dataset, generate_sbm, load_dataset, store_dataset
from .dropping import DropSpec
from .graph import CsrGraph, sym_normalize
from .model import build_model, model_forward, smoothness, wrap_params
from .norms import NormSpec
from .presets import get_preset
from .rng import Rng
from .skips import SkipSpec
from .tensor import GradTape, Tensor
from .train import RunResult, aggregate_runs, train_run

__all__ = [
    "CsrGraph", "Dataset", "DropSpec", "ExperimentSpec", "GradTape", "NormSpec",
    "Rng", "RunResult", "SkipSpec", "Tensor", "TrainConfig", "TrickConfig",
    "aggregate_runs", "build_model", "generate_sbm", "get_preset", "load_dataset",
    "model_forward", "parse_spec_file", "parse_spec_text", "smoothness",
    "store_dataset", "sym_normalize", "train_run", "wrap_params", "__version__",
]
