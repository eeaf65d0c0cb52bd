"""probsim: how similar are two classification problems?

Datasets sampled from a problem are fingerprinted by the test accuracies
of six simple classifiers across five training sizes, embedded in 2D with
classical MDS and t-SNE, and meta-classified back to their problem of
origin with a 1-nearest-neighbour rule.
"""

from .classifiers import CLASSIFIER_KINDS, ClassifierSpec, TrainedModel, accuracy, default_specs, fit, predict
from .config import PipelineConfig
from .embedding import (
    DistanceMatrix,
    Embedding2D,
    TsneConfig,
    calibrate_row,
    joint_probabilities,
    mds_embed,
    pairwise_distances,
    tsne_best,
    tsne_run,
)
from .kernels import TREE_BACKEND
from .metaeval import ConfusionMatrix, LearningCurve, confusion, inverse_similarity, learning_curve, nn1_meta
from .metafeatures import (
    AccuracyGrid,
    MetaDataset,
    assemble_meta,
    collapse_grid,
    evaluate_grid,
    rank_row,
    znorm_row,
)
from .pipeline import RunManifest, run_pipeline
from .problems import (
    ClassificationProblem,
    DatasetInstance,
    SampleSet,
    balanced_subsample,
    load_problem_csv,
    subject_split,
    write_problem_csv,
)
from .rng import RngStream
from .synthetic import ProblemSpec, builtin_suite, generate_problem

__version__ = "0.1.0"
