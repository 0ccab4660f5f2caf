"""Simulator for complete hyperentangled Bell-state analysis in the
spatial and polarization degrees of freedom, assisted by time intervals
and an auxiliary frequency entanglement."""

__version__ = "0.1.0"

from .state import (ALL_INDICES, Delay, Label, TwoPhotonState, equal_up_to_global_phase,
                    make_custom, make_hyper_bell, norm, normalize)
from .elements import bs, fbs, fs, fs_on_x1, hwp, stage2_map, ui, lift, apply
from .circuit import Circuit, build_hbsa_circuit, run, stage_states
from .dsl import parse_circuit, serialize_circuit
from .measurement import (DetectionEvent, IntervalClass, analyze, classify,
                          detection_distribution, diff_tables, interval_class,
                          oracle_table, signature_table)
from .experiments import NoiseParams, confusion_matrix, group_count, perturbed_circuit, sample_events

__all__ = [name for name in dir() if not name.startswith("_")]
