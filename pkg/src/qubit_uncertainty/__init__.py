"""Uncertainty regions, tight variance bounds, random-state densities and
entanglement criteria for qubit observables."""

__version__ = "0.1.0"

from .errors import (AngleConstraintViolated, DegenerateObservable, DimensionMismatch,
                     DomainError, LinearlyDependentFamily, OutOfBox, QubitUncertaintyError)
from .observables import (PAULI, SIGMA_X, SIGMA_Y, SIGMA_Z, FamilyDecomposition, GramMatrix,
                          QubitObservable, angles, decompose, eigenvalues, gram)
from .states import BlochState, char_fn, mean, sample_purified, sample_spectral, variance
from .regions import (RegionSpec, area_pair, boundary_pair, contains_n, contains_pair,
                      contains_triple, max_area, region_spec, volume_mc)
from .bounds import (BoundReport, brute_force_min, deviation_sum_bound_pair,
                     variance_sum_bound_n, variance_sum_bound_pair, variance_sum_bound_triple)
