"""Readability assessment experimentation toolkit.

Fuses handcrafted linguistic features with precomputed sentence embeddings
and evaluates classical classifiers (logistic regression, linear SVM,
random forest) under stratified cross-validation with weighted F1.
"""

from .corpus import (
    ABBREVIATIONS,
    PROFILES,
    CorpusStats,
    Document,
    LabeledCorpus,
    SegmentedDocument,
    corpus_stats,
    load_manifest,
    segment,
)
from .dataset import (
    MODES,
    PCA_PERCENTAGES,
    Dataset,
    FeatureScaler,
    VariancePCA,
    assemble,
    dataset_from_csv,
    dataset_to_csv,
)
from .embeddings import EmbeddingTable, align, load_embeddings, mean_pool, save_embeddings
from .errors import (
    AlignmentError,
    ConfigError,
    DataError,
    EmbeddingError,
    ManifestError,
    ReadabilityLabError,
)
from .evaluation import (
    EvalReport,
    FoldPlan,
    TestResult,
    cross_validate,
    mann_whitney_u,
    stratified_kfold,
    variance_equality,
    weighted_f1,
)
from .features import (
    COARSE_TAGS,
    GROUPS,
    AnnotationSet,
    FeatureRegistry,
    FeatureSpec,
    FeatureVector,
    bundled_lexicon_path,
    count_syllables,
    default_registry,
    export_features_csv,
    extract,
    extract_corpus,
    load_lexicon,
    remove_groups,
    tag_pos,
)
from .models import (
    ALGORITHMS,
    LinearSVM,
    ModelSpec,
    RandomForest,
    SoftmaxRegression,
    gini_impurity,
    load_model,
    make_model,
    save_model,
)
from .experiments import (
    ExperimentConfig,
    load_config,
    prepare,
    run_ablation,
    run_pca_sweep,
    run_substitution,
)
from .rng import SplitMix64, derive_seed, mix64

__version__ = "0.1.0"
