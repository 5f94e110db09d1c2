"""Deterministic violation-of-expectation physical-reasoning benchmark.

Procedurally generates expected/surprising trial pairs in five event
categories, labels them with ground-truth features and prior/posterior rules,
trains two-stage tree reasoning models against a noisy feature oracle, and
evaluates surprise detection — plus a human-trial collection service.
"""

from .catalog import (Feat, PosteriorRule, PriorRule, IRRELEVANT, NO, YES,
                      catalog_schema)
from .core import (Body, EventCategory, Frame, InvalidSpecError, ScenarioSpec,
                   SubType, Trajectory, UnsatisfiableSubtypeError)
from .dataset import generate_dataset, load_manifest
from .metrics import (auc_roc, cohens_kappa, flipped_hit_rate, hit_rate,
                      human_hit_rate, z_normalize)
from .models import (OFModel, OFPRModel, OFPRTrainConfig, baseline_score,
                     load_model, random_score, save_model, score_surprise,
                     train_of, train_ofpr)
from .perception import PerceptionConfig, perceive
from .physics import (InvalidViolationError, extract_outcome,
                      simulate_expected, simulate_surprising)
from .rules import (engineer, eval_posterior, eval_prior, extract_features,
                    extract_raw_features)
from .scenarios import (TrialPair, build_trial, choose_violation, sample_spec,
                        sample_trial, subtype_allocation)
from .trees import MultiTargetTree, TrainConfig, fit_tree

__version__ = "0.1.0"
