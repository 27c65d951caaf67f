"""Compact cluster prototypes from reverse k-NN graphs, with nearest-prototype classification."""

from .baselines import DeltaMedoidsParams, delta_medoids, full_cluster, random_fraction
from .crs import (
    CrsParams,
    Prototype,
    build_reverse_graph,
    format_prototypes,
    greedy_cover,
    parse_prototypes,
    read_prototypes,
    select_representatives,
)
from .dataset import (
    Cluster,
    LabeledDataset,
    gen_similarity_matrix,
    gen_synthetic,
    load_dense_csv,
    load_similarity_matrix,
    load_sparse_records,
    save_dense_csv,
    save_similarity_matrix,
    save_sparse_records,
    split_train_test,
    stratified_subset,
)
from .errors import ClusterRepsError, ConfigError, DataError, DomainError, FormatError, ParseError
from .harness import MetricsReport, run_eval, sweep_k, per_cluster_table
from .knn import KnnGraph, NnDescentParams, exact_knn, graph_recall, nn_descent
from .npc import PrototypeSet, batch_classify, classify
from .reverse import ReverseGraph, approx_homogeneity, homogeneity, reverse_and_prune
from .similarity import (
    CosineDense,
    CosineSparse,
    CountingSimilarity,
    MatrixSimilarity,
    NegEuclidean,
    cosine,
    s_ratio,
    similarity_for,
)

__version__ = "0.1.0"
