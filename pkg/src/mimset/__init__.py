"""m-connecting imsets for acyclic directed mixed graphs."""

from .gaussian import (GaussianModel, NumericalError, SampleMoments, ScoreResult, approx_loglik,
                       bic_mf, dag_bic, dag_mle_sigma, dominating_dag, gaussian_dimension,
                       gaussian_marginal_loglik_sum, multinomial_dimension, simulate)
from .graph import (Admg, GraphError, TotalOrder, ancestors, ancestral_sets, barren_subset,
                    children, collider_connected, consistent_order, descendants, district,
                    induced_subgraph, is_ancestral_set, is_collider_connecting_set,
                    is_directed_mag, latent_project, make_order, markov_boundary, markov_closure,
                    parents, parse_graph, siblings)
from .heads_tails import (HeadTail, ParamFamily, characteristic_imset, constrained_sets,
                          head_factorization, heads, m_imset, n_imset, parameterizing_sets,
                          head_partition, tail)
from .imset import (Imset, SemiElemCombination, delta, elementary, evaluate_certificate,
                    imset_factor_check, is_certified_structural, mobius_down, mobius_up,
                    semi_elementary, triple_family, zeta_down, zeta_up)
from .mec import (MecCatalog, RankReport, build_mec_catalog, enumerate_directed_mags,
                  markov_equivalent, rank_models, recovery_experiment)
from .inclusion_exclusion import NieResult, PairsResult, nie, nie_nonredundant, olmp, pairs, verify_decomposition
from .separation import (Triple, independence_model, m_connecting_exists, m_separated,
                         minimal_latent_set)

__version__ = "0.1.0"
