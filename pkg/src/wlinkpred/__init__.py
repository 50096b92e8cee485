"""Link and link-weight prediction on weighted networks with local similarity indices."""
from wlinkpred.evaluation import (LambdaFit, SplitResult, UndefinedCorrelation, fit_lambda,
                                  pearson, precision_at, predict_weights, split_edges)
from wlinkpred.experiment import (ExperimentConfig, ExperimentSummary, TrialResult,
                                  correlate_clustering_accuracy, emit_report,
                                  generate_clique_family, run_experiment, run_trial)
from wlinkpred.graph import (DatasetEntry, EdgeListError, WeightedGraph, average_degree, degree,
                             load_edge_list, local_clustering, network_clustering, read_manifest,
                             remove_edges, strength, write_edge_list)
from wlinkpred.similarity import (IndexKind, ScoreTable, candidate_pairs, regularize_weights,
                                  score_all, score_pair, unregularize_weight)

__version__ = "0.1.0"
