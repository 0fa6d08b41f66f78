"""Binomial self-compensation of motion error in 3/4-step phase-shifting profilometry."""

from .core import (StreamState, WrapEventError, bsc_direct, bsc_pyramid, compensate, compensate_phases,
                   oplus, stream, stream_push)
from .fringe import FringeConfig, ImageFrame, NoiseConfig, PlaneScene, StepScene, ramp_phase, render_sequence
from .geometry import (CameraModel, GeometryError, ProjectorModel, Rig, SystemGeometry, desk_rig,
                       max_fringe_frequency, virtual_segment_length)
from .kinematics import DifferenceTable, MotionProfile, binomial_weights, finite_difference, sample_offsets
from .oracle import RippleDecomposition, fit_ripple, predict_bsc_harmonic, predict_error
from .phase import PhaseFrame, datum_correct, modulation_map, wrapped_phase

__version__ = "0.1.0"
