"""Donor gate statistics in silicon.

Pipelines: valley-interference exchange between donor pairs, viability
radii from thresholded interaction maps, analytic and Monte Carlo
densities of optically controlled entangling gates, and cluster spin
dynamics predicting the readout-magnetization signature of gate
operation.
"""

from .constants import j_dec
from .densities import (DensityCurve, DensityValue, bilayer_projection,
                        density_scan, gate_density, heis_ex_ex_density,
                        heis_ex_gd_density, isolated_density,
                        optimal_isolation_density, peak_density, sfg_density)
from .envelopes import contraction_factor, envelope
from .exchange import (ExchangeResult, IntegratorSettings, PairConfig,
                       SingularConfigurationError, exchange_component,
                       exchange_total)
from .geometry import (GateGeometry, RegionMeasure, ball_measures,
                       delta_outside, delta_overlap, exclusion_angle,
                       lens_measure, restricted_surface,
                       sampled_region_measure, triple_overlap_area)
from .maps import (EmptyZoneError, InteractionMap, PolarExchangeTable,
                   equivalent_radius, interaction_map)
from .mace import (Cluster, CouplingMatrix, SpinSystem, Trajectory,
                   build_couplings, evolve_cluster, excitation_peak_difference,
                   jackknife, mace_average, sample_spin_system, select_cluster)
from .phasegate import PhaseGateReport, phase_gate_sequence
from .pointsim import (GateTally, SimRegion, TrialStats, classify_gates,
                       mark_isolated, pair_gates, run_isolation_trials,
                       run_trials, sample_points)
from .presets import get_preset

__version__ = "0.1.0"
