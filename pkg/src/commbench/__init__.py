"""Community-detection methods with a paired link-prediction / link-description
benchmark and over/under-fit diagnostics for corpora of sparse graphs."""

from .bench import (AccuracyCurve, SampledGraph, Task, TaskResult, accuracy_curve,
                    aggregate, auc_exact, auc_monte_carlo, best_fraction,
                    run_task, run_task_pair, sample_edges)
from .corpus import CorpusEntry, CorpusManifest, load_manifest, mini_corpus_path
from .detect import DetectError, DetectorResult, Method, detect
from .diagnose import (FitDiagnosis, FitLabel, SimilarityMatrix, classify_fit,
                       k_size_trend, method_similarity)
from .graph import (EdgeListParseError, EmptyGraphError, Graph, GraphError,
                    PlantedPartitionParams, generate_planted_partition,
                    largest_component, load_edge_list)
from .objectives import (ObjectiveUndefinedError, bayes_evidence,
                         description_length, map_equation, modularity)
from .partition import BlockStats, Partition, block_stats, canonicalize, compare
from .pipeline import Cache, ResultStore, RunConfig, run_pipeline
from .reports import emit_report
from .score import (AdjacencyIndicatorScorer, ScoreMode, ScoreModel,
                    ScoreModelError, build_score_model, score_block_dcsbm,
                    score_block_sbm, score_objective_delta, score_spectral_lowrank)
from .spectral import (EigensolverError, adjacency_factors, bethe_hessian_select,
                       nonbacktracking_select)

__version__ = "0.1.0"
