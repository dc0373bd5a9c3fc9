"""Active manifold learning: Gershgorin-circle landmark selection and label propagation."""

from .alignment import (AlignmentMatrix, RegularizedAlignment, build_alignment,
                        regularize_alignment)
from .bench import (ExperimentConfig, ExperimentReport, confidence_interval, emit_report,
                    relative_error, run_experiment)
from .data import Dataset, NoiseSpec, add_noise, generate_synthetic, load_dataset, pca, save_dataset
from .estimators import LandmarkSelector, SemiSupervisedManifoldRegressor
from .exceptions import (DisconnectedGraphError, InvalidArgumentError, NotPositiveDefiniteError,
                         ParseError, SingularSystemError)
from .graph import NeighborGraph, connected_components, geodesic_distances, knn_graph
from .landmark import (SelectionResult, approxdpp_select, baseline_select, gcls_select,
                       maxmingeo_select, mincond_select, select_landmarks)
from .spectral import (GershgorinState, block_l1_norms, brute_force_best_submatrix,
                       condition_number, error_bound, gershgorin_circles, surrogate_q,
                       sym_matrix_log)
from .ssml import LabelAssignment, embed, ls_learn, spec_learn

__version__ = "0.1.0"
