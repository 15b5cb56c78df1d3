"""Weighted planar networks, their rank certification, and the bump
configuration pipeline built on top of them."""

__version__ = "1.0.0"

from .network import (Network, NetworkError, forces, lengths, is_balanced,
                      is_connected, is_embedded, is_unitary, load_network,
                      save_network, edge_key)
from .catalog import (catalog, catalog_names, chain, regular_polygon,
                      triangle, polygon_center, n_v, n_y, n_c)
from .linearize import (adjointness_defect, build_differentials, certify,
                        lambda_matrix, lambda_ring_matrix, numerical_rank,
                        nv_closability_criterion)
from .balance import (balance_nearby, perturb_unbalanced, realize_triangle,
                      realized_triangle_network)
from .interaction import (InteractionTable, build_table, load_or_build,
                          ground_state_beta, upsilon_direct)
from .assembly import (Assembly, SubNetwork, verify_assembly, quantize,
                       coordinate_quantization, solve_master, generate_cloud,
                       neighbor_graph, save_cloud, load_cloud, chain_matrix,
                       chain_matrix_inverse, chain_correct,
                       diagnostic_chain_cloud, save_assembly, load_assembly)
from .fields import (FieldWindow, evaluate_field, residual, residual_norms,
                     project_force, predicted_force, pohozaev_defect, refine,
                     save_field, load_field)
from .builders import (assembly_catalog, assembly_names, example_5_1,
                       example_5_2, n_c_assembly, n_v_assembly)
