"""Entanglement, photodetection and erasure for a spontaneously decaying Lambda emitter."""
from .core import (Channel, ParameterError, Polarization, QubitDensityMatrix, SystemParams,
                   ThreeLevelState, UnequalWidthsError, hermitian_2x2_eigen, validate_params)
from .ww_dynamics import (EntanglementMode, LineshapeOverlap, eta, eta_asymptote, excited_amplitude,
                          excited_population, lineshape_overlap, photon_amplitude, photon_number,
                          rho_fo, rho_fp, rho_qubit, three_level_state, wavepacket_norms)
from .entropy import (EntropyCurve, EntropyKind, entropy_curve, entropy_fo, entropy_fo_asymptote,
                      entropy_fp, entropy_fp_asymptote, entropy_gap, post_detection_entropy, vn_entropy)
from .photodetect import (DetectorParams, channel_weights, conditional_probability,
                          cross_spectral_integral, detected_weight, detector_amplitude,
                          field_amplitude, rho_detected)
from .eraser import (PureQubitState, QuadratureError, ShutterRegimeError, ShutterSpec, blur_sweep,
                     check_eraser_regime, evolve_free, joint_probability, numeric_shutter_coherence,
                     purified_state, readout_state, rho_erased, shutter_weight)
from .dataset import CurveDataset
from .mode_oracle import (IntegrationError, ModeGrid, Trajectory, ValidationReport, build_grid,
                          integrate, validate)

__version__ = "0.1.0"
