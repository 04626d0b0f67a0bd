"""Nonparametric spectral graph analysis built on the GraField kernel."""
from .bases import (GraField, OrthonormalBasis, bpf_basis, build_grafield,
                    char_basis, grafield_eval, grafield_from_graph, lp_basis,
                    lp_rank)
from .changepoint import (ChangePointReport, EventMatrix, detect_changepoints,
                          kmeans_1d, phi2_graph, planted_event_matrix)
from .engine import (GMatrix, GraphEmbedding, gmatrix, gmatrix_from,
                     lp_spectral, residual, residual_norm, solve_generalized,
                     unified_spectral)
from .errors import ConvergenceError, GraphDataError
from .graph import (Graph, NetworkDistribution, VertexDistribution,
                    build_graph, empirical_network_pmf, empirical_vertex_pmf,
                    quantile)
from .operators import (diffusion_map, engine_identities, laplacian,
                        laplacian_star, modularity, pagerank_matrix,
                        pagerank_scores, random_walk, reg_laplacian_type1,
                        reg_laplacian_type2)
from .smoothing import (TauChoice, good_turing, laplace_smooth_network,
                        laplace_smooth_vertex, resolve_tau, risk_curve,
                        stein_optimal_tau)

__version__ = "0.1.0"
