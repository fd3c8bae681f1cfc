"""Contrastive sample generation and explanation for feed-forward tabular classifiers."""
__version__ = "0.1.0"

from .data import (Dataset, FeatureDomain, MinMaxNormalizer, Normalization, in_domain,
                   infer_domains, load_csv, load_manifest, normalize, project_to_domains, split)
from .discretize import MDLPDiscretizer, mdlp_cut_points
from .entropy import (SUMatrix, entropy, entropy_filter, info_gain, joint_entropy,
                      symmetrical_uncertainty)
from .exceptions import (ConfigError, DataError, DegenerateStepError, ExplanationError,
                         NoContrastiveClassError, ShapeError, SurrogateDegenerateError,
                         TrainingDivergedError)
from .explainer import Predicate, extract_predicate, influence_score, render_text
from .generator import ContrastiveExplainer, ContrastiveResult, GenerationConfig, grace
from .metrics import MetricsReport, baseline_deepfool, baseline_nearest_ct, compute_report
from .nn import (NeuralNet, NeuralNetClassifier, TrainConfig, class_gradient, forward,
                 load_model, save_model, train)
from .projection import contrastive_class, generate_contrastive, project_domain, projection_step
from .ranking import RankedFeatures, rank_features

__all__ = [n for n in dir() if not n.startswith("_")]
