"""Multiple stochastic integrals of Levy processes on dyadic grids.

The package builds up, layer by layer, the finite combinatorics and the
simulation machinery needed to evaluate multiple Ito and Stratonovich
integrals driven by a Levy process, and to check the exact partition-sum
identity connecting them:

* partitions — the lattice of set partitions with its Moebius function;
* diagonals — index tuples, kernel partitions, diagonal sets;
* levy — simulation of Brownian, Poisson, compound Poisson and Gamma
  paths on dyadic grids, with variation and Teugels increments;
* measures — product and distinct-index measures of diagonal sets;
* integrals — multiple integrals of grid functions and the partition
  decomposition tying the two kinds together;
* special — Brownian trace form, Poisson dX/dt reduction, subordinator
  jump-list integrals;
* harness / cli — reproducible identity suites and Monte Carlo studies.
"""

from ._kernels import BACKEND
from .diagonals import (CellRectangle, IndexTuple, expand_q_sigma,
                        kernel_partition, permute_tuple, preimage_rectangle)
from .integrals import (GridFunction, HuMeyerTerm, hu_meyer_evaluate,
                        hu_meyer_symmetric_evaluate, hu_meyer_terms, ito_bound,
                        ito_integral, ito_integral_rows, iterated_form,
                        lambda_norm_sq, stratonovich_integral, symmetrize)
from .levy import (Brownian, CompensatedPoisson, CompoundPoisson, ConstantJumps,
                   ExponentialJumps, GammaSubordinator, LevyPath, MomentTable,
                   UniformJumps, coarsen, dump_path, load_path_dump, make_rng,
                   moments, replica_seed, simulate, teugels_increments,
                   variation_increments)
from .measures import (AtomFamily, DiagonalSpec, collapse_block_atoms,
                       diagonal_measure_refinement, ito_measure,
                       ito_measure_mobius_fast, mixed_variation_refinement,
                       mobius_recover_ito, product_measure,
                       product_measure_block_fast)
from .partitions import (Partition, Permutation, TypeVector, all_permutations,
                         bell_number, block_size_vector, collapse_interval,
                         count_by_type, enumerate_partitions, is_refinement,
                         mobius, mobius_recursive, one_partition, partition_type,
                         permute_partition, segment_type, type_vectors,
                         zero_partition)
from .special import (JumpMeasure, brownian_atoms, brownian_hu_meyer,
                      brownian_trace, hu_meyer_brownian_coefficient,
                      jump_measure_hu_meyer, jump_measure_ito,
                      jump_measure_stratonovich, poisson_pattern_integral,
                      poisson_reduce, truncation_bias_bound)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
