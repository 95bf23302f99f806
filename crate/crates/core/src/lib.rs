//! Frequency-domain quantum noise spectra for two-tone driven
//! optomechanical cavities.
//!
//! The crate builds linearized Langevin models of a driven cavity coupled
//! to a mechanical oscillator ([`model`]), solves them for stationary
//! output spectra either directly ([`linres`]) or with the full
//! counter-rotating dynamics via a harmonic expansion ([`floquet`]), and
//! provides independent closed-form benchmarks ([`oracle`]) that the
//! solvers are tested against.

pub mod error;
pub mod floquet;
pub mod linres;
pub mod model;
pub mod oracle;

mod eigen;

pub use error::{Error, Result};
pub use floquet::{
    check_convergence, floquet_mean_response, floquet_mean_response_at, floquet_spectrum,
    floquet_spectrum_at, lift, ConvergenceReport, FloquetModel,
};
pub use linres::{
    mean_response, optimal_quadrature, spectrum_point, transfer, SpectrumPoint, TransferRows,
};
pub use model::{
    build_dissipative, build_lossy, build_measurement, build_phase_noise, build_ponderomotive,
    cooperativity, impedance_match, squeeze_parameter, stability_check, DriveConfig, LtiModel,
    MeasurementSignal, PhysParams, Scheme, SqueezeParameter, Stability, StabilityReport,
};
