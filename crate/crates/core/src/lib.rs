//! Spectral analysis and simulation of contrarian opinion dynamics on the
//! discrete torus `(Z/nZ)^m`.

pub mod dynamics;
pub mod equidist;
pub mod error;
pub mod export;
pub mod fft;
pub mod lattice;
pub mod limit_orbit;
pub mod mixed_model;
mod roots;
pub mod spectrum;

pub use dynamics::{
    hk_step, init_random, run_scaled, run_scaled_from, step, step_fft, Engine, OpinionState,
    Scaling, SimConfig, Snapshot, Stride, Trajectory,
};
pub use equidist::{
    dependence_scan, discrepancy_report, empirical_discrepancy, etk_bound, phase_sequence,
    DependenceReport, DiscrepancyReport, PhaseSequence, RotationVector,
};
pub use error::{Error, Result};
pub use export::{git_blob_id, OutputEntry, OutputSet, RunManifest};
pub use lattice::{inner_product, ConvolutionSet, GroupParams, LatticePoint, Stencil};
pub use limit_orbit::{
    approximation_error, attractor_dimension, attractor_sample, build_orbit_model, fourier_rows,
    system_approximation_error, system_deviation_from_limit, AttractorSample, ErrorSeries,
    FourierRows, OrbitModel,
};
pub use mixed_model::{
    cumulative_eigen, find_transition_q, mixed_run, mixed_spectrum, ratio_decay_check,
    IndexSequence, MixedOrbitModel, MixedSpectrum, MixtureSpec,
};
pub use spectrum::{
    cbasis_eigencheck, full_spectrum, full_spectrum_extended, monotonicity_scan, regularity,
    rotation_angle, speed_lower_bound, Eigenpair, RegularityVerdict, RotationAngle, SpectrumReport,
};
