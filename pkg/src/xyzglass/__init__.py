"""Ground-state entanglement of the disordered XYZ chain under quenched averaging."""

__version__ = "0.1.0"

from .model import (Boundary, CouplingRealization, Disorder, DisorderCase, ModelParams,
                    apply_hamiltonian, bond_list, build_hamiltonian, sample_couplings)
from .eigen import GroundStateResult, LanczosError, dense_ground_state, ground_state, lanczos_ground_state
from .observables import (ObservableSet, bipartition_count, bipartition_iterator, concurrence,
                          correlator, ggm, ggm_approx, magnetization_z, observable_set,
                          reduced_density_matrix)
from .quench import (EnhancementRecord, QuenchedEstimate, QuenchSettings, convergence_monitor,
                     enhancement_score, ordered_reference, quenched_average)
from .scan import (Axis, GridSpec, VenusRegion, critical_field, detect_venus, grid_scan,
                   line_scan, venus_from_scan)
