"""Hateful-meme detection at desk scale: sensitive-text tagging, a
single-stream multimodal fusion classifier, from-scratch metrics and
ensembling, and dataset analyses, wired together by a CLI.
"""

from .analysis import IncidenceTable, correlation_matrix, incidence, phi, report
from .data import (DataFormatError, Example, FeatureBank, MemeRecord, SplitSet,
                   class_balance, join, load_features, load_jsonl, merge_dedup,
                   save_features, save_jsonl)
from .ensemble import (PredictionMatrix, RandomForestStacker, SearchSpace,
                       StackFeatures, average_vote, build_stack, majority_vote,
                       prediction_matrix, random_search_cv)
from .forest import Forest, RFConfig, rf_predict, rf_train
from .fusion import (FusionClassifier, LossSpec, ModelConfig, TrainConfig,
                     TrainedModel, load_checkpoint, lr_at, predict,
                     save_checkpoint, train)
from .fuzzy import LevenshteinAutomaton, levenshtein
from .metrics import accuracy, auroc
from .pipeline import PACKAGE_VERSION, ConfigError, PipelineConfig, load_config
from .predictions import PredictionSet, read_predictions, write_predictions
from .synth import (generate_split, placeholder_lexicon, simulate_hatexplain,
                    simulate_predictions)
from .tagging import (CATEGORIES, PROTECTED_CATEGORIES, Lexicon, TagVector,
                      TextTagger, attach_hatexplain, load_lexicon, normalize,
                      save_lexicon, tag_text)

__version__ = PACKAGE_VERSION

__all__ = [
    "IncidenceTable", "correlation_matrix", "incidence", "phi", "report",
    "DataFormatError", "Example", "FeatureBank", "MemeRecord", "SplitSet",
    "class_balance", "join", "load_features", "load_jsonl", "merge_dedup",
    "save_features", "save_jsonl",
    "PredictionMatrix", "RandomForestStacker", "SearchSpace", "StackFeatures",
    "average_vote", "build_stack", "majority_vote", "prediction_matrix",
    "random_search_cv",
    "Forest", "RFConfig", "rf_predict", "rf_train",
    "FusionClassifier", "LossSpec", "ModelConfig", "TrainConfig",
    "TrainedModel", "load_checkpoint", "lr_at", "predict", "save_checkpoint",
    "train",
    "LevenshteinAutomaton", "levenshtein",
    "accuracy", "auroc",
    "ConfigError", "PipelineConfig", "load_config",
    "PredictionSet", "read_predictions", "write_predictions",
    "generate_split", "placeholder_lexicon", "simulate_hatexplain",
    "simulate_predictions",
    "CATEGORIES", "PROTECTED_CATEGORIES", "Lexicon", "TagVector", "TextTagger",
    "attach_hatexplain", "load_lexicon", "normalize", "save_lexicon",
    "tag_text",
]
