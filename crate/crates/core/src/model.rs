//! Linearized models of a driven optomechanical cavity in the quadrature
//! picture.
//!
//! Every model here is a time-invariant Langevin system
//! `v̇ = A v + Σ_c B_c w_c(t)` over the fixed state basis
//! `(U1, U2, X1, X2)` — cavity amplitude/phase quadratures followed by the
//! mechanical quadratures — together with the input channels that drive it
//! and the output relation for the observed optical port. Counter-rotating
//! physics lives in [`crate::floquet`]; this module covers the
//! rotating-wave dynamics plus the non-rotating-mechanics radiation-pressure
//! model.
//!
//! Sign conventions: inputs enter with `+√rate`; the observed output obeys
//! `d_out = √κ_out · d − d_in`, so the empty-cavity reflection coefficient is
//! `κ χ_cav[ω] − 1`. Stationary spectra are invariant under the overall sign
//! of an input channel, so only this self-consistent pairing is observable.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};

/// Dimension of the quadrature state vector.
pub const STATE_DIM: usize = 4;

/// State ordering used by every builder and solver.
pub const BASIS_LABELS: [&str; STATE_DIM] = ["U1", "U2", "X1", "X2"];

/// Margin separating "stable" from "marginal" eigenvalue real parts.
pub const EPSILON_STABILITY: f64 = 1e-10;

const U1: usize = 0;
const U2: usize = 1;
const X1: usize = 2;
const X2: usize = 3;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Physical rates and occupations of the cavity/oscillator system.
///
/// All rates are dimensionless: the caller picks the unit (total cavity
/// decay or mechanical frequency) and supplies consistent numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Mechanical resonance frequency Ω.
    pub omega_m: f64,
    /// Decay rate through the observed (output-coupled) port.
    pub kappa_out: f64,
    /// Decay rate into unobserved internal loss channels.
    pub kappa_int: f64,
    /// Mechanical energy damping rate Γ_M.
    pub gamma_m: f64,
    /// Single-photon optomechanical coupling g0 (only the phase-noise model
    /// needs it; leave 0 otherwise).
    pub g0: f64,
    /// Thermal occupation of the mechanical bath (flat in frequency).
    pub n_th: f64,
    /// White laser-phase-noise rate Γ_L.
    pub gamma_l: f64,
}

impl PhysParams {
    /// Total cavity decay rate `kappa_out + kappa_int`.
    pub fn kappa_tot(&self) -> f64 {
        self.kappa_out + self.kappa_int
    }

    /// Check the parameter domain; builders call this before assembling.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_m,
            self.kappa_out,
            self.kappa_int,
            self.gamma_m,
            self.g0,
            self.n_th,
            self.gamma_l,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("phys_params", "all entries must be finite"));
        }
        if self.omega_m <= 0.0 {
            return Err(Error::invalid("omega_m", "must be > 0"));
        }
        if self.kappa_out < 0.0 || self.kappa_int < 0.0 {
            return Err(Error::invalid("kappa", "port rates must be >= 0"));
        }
        if self.kappa_tot() <= 0.0 {
            return Err(Error::invalid("kappa", "kappa_out + kappa_int must be > 0"));
        }
        if self.gamma_m <= 0.0 {
            return Err(Error::invalid("gamma_m", "must be > 0"));
        }
        if self.g0 < 0.0 {
            return Err(Error::invalid("g0", "must be >= 0"));
        }
        if self.n_th < 0.0 {
            return Err(Error::invalid("n_th", "must be >= 0"));
        }
        if self.gamma_l < 0.0 {
            return Err(Error::invalid("gamma_l", "must be >= 0"));
        }
        Ok(())
    }
}

/// Which linearized interaction the drive tones realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Two tones on the red/blue mechanical sidebands (rotating frame).
    Dissipative,
    /// Single resonant tone, mechanics kept in the lab frame.
    Ponderomotive,
    /// Sideband pair plus a resonant probe tone reading out a signal `z`.
    Measurement,
    /// Dissipative scheme with an unobserved internal-loss port.
    DissipativeLossy,
    /// Dissipative scheme with white laser phase noise on the drive tones.
    DissipativePhaseNoise,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Dissipative => "dissipative",
            Scheme::Ponderomotive => "ponderomotive",
            Scheme::Measurement => "measurement",
            Scheme::DissipativeLossy => "dissipative_lossy",
            Scheme::DissipativePhaseNoise => "dissipative_phase_noise",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Drive-enhanced coupling amplitudes, all real and in the caller's rate unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// Red-sideband (beam-splitter) coupling G−. For the ponderomotive
    /// scheme this is the single resonant coupling G.
    pub g_minus: f64,
    /// Blue-sideband (parametric) coupling G+.
    pub g_plus: f64,
    /// Probe-tone optomechanical coupling G0 (measurement scheme only;
    /// counter-rotating, so it only enters the harmonic solver).
    pub g_zero: f64,
    /// Probe-tone dispersive readout amplitude A0 (measurement scheme only).
    pub a_zero: f64,
    pub scheme: Scheme,
}

impl DriveConfig {
    pub fn dissipative(g_minus: f64, g_plus: f64) -> Self {
        DriveConfig {
            g_minus,
            g_plus,
            g_zero: 0.0,
            a_zero: 0.0,
            scheme: Scheme::Dissipative,
        }
    }

    pub fn ponderomotive(g: f64) -> Self {
        DriveConfig {
            g_minus: g,
            g_plus: 0.0,
            g_zero: 0.0,
            a_zero: 0.0,
            scheme: Scheme::Ponderomotive,
        }
    }

    pub fn lossy(g_minus: f64, g_plus: f64) -> Self {
        DriveConfig {
            scheme: Scheme::DissipativeLossy,
            ..Self::dissipative(g_minus, g_plus)
        }
    }

    pub fn phase_noise(g_minus: f64, g_plus: f64) -> Self {
        DriveConfig {
            scheme: Scheme::DissipativePhaseNoise,
            ..Self::dissipative(g_minus, g_plus)
        }
    }

    pub fn measurement(g_minus: f64, g_plus: f64, g_zero: f64, a_zero: f64) -> Self {
        DriveConfig {
            g_minus,
            g_plus,
            g_zero,
            a_zero,
            scheme: Scheme::Measurement,
        }
    }

    /// Difference coupling G− − G+ (drives the measured-quadrature pair).
    pub fn g_diff(&self) -> f64 {
        self.g_minus - self.g_plus
    }

    /// Sum coupling G− + G+ (drives the conjugate pair).
    pub fn g_sum(&self) -> f64 {
        self.g_minus + self.g_plus
    }

    /// Collective coupling 𝒢 = sqrt(G−² − G+²) entering the cavity self-energy.
    pub fn g_collective_sq(&self) -> f64 {
        self.g_minus * self.g_minus - self.g_plus * self.g_plus
    }

    /// Domain checks shared by the builders.
    pub fn validate(&self) -> Result<()> {
        let all = [self.g_minus, self.g_plus, self.g_zero, self.a_zero];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("drives", "all entries must be finite"));
        }
        if self.g_minus < 0.0 || self.g_plus < 0.0 || self.g_zero < 0.0 {
            return Err(Error::invalid(
                "drives",
                "coupling amplitudes must be >= 0",
            ));
        }
        match self.scheme {
            Scheme::Ponderomotive => {
                if self.g_plus != 0.0 || self.g_zero != 0.0 || self.a_zero != 0.0 {
                    return Err(Error::invalid(
                        "drives",
                        "ponderomotive scheme uses only g_minus; set g_plus, g_zero, a_zero to 0",
                    ));
                }
            }
            Scheme::Measurement => {
                if self.g_plus > self.g_minus {
                    return Err(Error::CouplingOrder {
                        g_minus: self.g_minus,
                        g_plus: self.g_plus,
                    });
                }
            }
            _ => {
                if self.g_plus > self.g_minus {
                    return Err(Error::CouplingOrder {
                        g_minus: self.g_minus,
                        g_plus: self.g_plus,
                    });
                }
                if self.g_zero != 0.0 || self.a_zero != 0.0 {
                    return Err(Error::invalid(
                        "drives",
                        "g_zero / a_zero belong to the measurement scheme",
                    ));
                }
            }
        }
        Ok(())
    }

    fn expect_scheme(&self, expected: Scheme) -> Result<()> {
        if self.scheme == expected {
            Ok(())
        } else {
            Err(Error::SchemeMismatch {
                expected: expected.name(),
                got: self.scheme.name(),
            })
        }
    }
}

/// The static signal read out by the measurement scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSignal {
    pub z: f64,
}

impl MeasurementSignal {
    pub fn validate(&self) -> Result<()> {
        if self.z.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("z", "must be finite"))
        }
    }
}

/// What a given input channel physically is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    /// Optical port in vacuum; `observed` marks the output-coupled one.
    OpticalVacuum { rate: f64, observed: bool },
    /// Mechanical bath at flat thermal occupation.
    Mechanical { rate: f64, n_th: f64 },
    /// Classical white force of the given spectral density on one state row.
    WhiteForce { psd: f64, row: usize },
}

/// One input channel: coupling columns (√rate included) and the
/// non-symmetrized correlation matrix of its quadrature components.
#[derive(Debug, Clone, PartialEq)]
pub struct InputChannel {
    pub label: &'static str,
    pub kind: ChannelKind,
    coupling: DMatrix<Complex64>,
    corr: DMatrix<Complex64>,
}

impl InputChannel {
    fn optical(label: &'static str, rate: f64, observed: bool) -> Self {
        let mut coupling = DMatrix::zeros(STATE_DIM, 2);
        coupling[(U1, 0)] = c(rate.sqrt());
        coupling[(U2, 1)] = c(rate.sqrt());
        let mut corr = DMatrix::zeros(2, 2);
        corr[(0, 0)] = c(0.5);
        corr[(0, 1)] = Complex64::new(0.0, 0.5);
        corr[(1, 0)] = Complex64::new(0.0, -0.5);
        corr[(1, 1)] = c(0.5);
        InputChannel {
            label,
            kind: ChannelKind::OpticalVacuum { rate, observed },
            coupling,
            corr,
        }
    }

    fn mechanical(rate: f64, n_th: f64) -> Self {
        let mut coupling = DMatrix::zeros(STATE_DIM, 2);
        coupling[(X1, 0)] = c(rate.sqrt());
        coupling[(X2, 1)] = c(rate.sqrt());
        let sym = 0.5 + n_th;
        let mut corr = DMatrix::zeros(2, 2);
        corr[(0, 0)] = c(sym);
        corr[(0, 1)] = Complex64::new(0.0, 0.5);
        corr[(1, 0)] = Complex64::new(0.0, -0.5);
        corr[(1, 1)] = c(sym);
        InputChannel {
            label: "mechanical",
            kind: ChannelKind::Mechanical { rate, n_th },
            coupling,
            corr,
        }
    }

    fn white_force(label: &'static str, psd: f64, row: usize) -> Self {
        let mut coupling = DMatrix::zeros(STATE_DIM, 1);
        coupling[(row, 0)] = c(psd.sqrt());
        InputChannel {
            label,
            kind: ChannelKind::WhiteForce { psd, row },
            coupling,
            corr: DMatrix::from_element(1, 1, c(1.0)),
        }
    }

    /// Number of scalar quadrature components carried by this channel.
    pub fn width(&self) -> usize {
        self.coupling.ncols()
    }

    pub fn coupling(&self) -> &DMatrix<Complex64> {
        &self.coupling
    }

    pub fn corr(&self) -> &DMatrix<Complex64> {
        &self.corr
    }
}

/// Stability verdict for a drift matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn name(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

/// Eigenvalue evidence behind a [`Stability`] verdict.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub verdict: Stability,
    pub max_real_part: f64,
    pub eigenvalues: Vec<Complex64>,
}

fn classify(max_re: f64) -> Stability {
    if max_re > EPSILON_STABILITY {
        Stability::Unstable
    } else if max_re >= -EPSILON_STABILITY {
        Stability::Marginal
    } else {
        Stability::Stable
    }
}

/// A time-invariant Langevin model: drift, input channels, observed port.
#[derive(Debug, Clone)]
pub struct LtiModel {
    drift: DMatrix<Complex64>,
    channels: Vec<InputChannel>,
    observed_port: usize,
    scheme: Scheme,
    stability: OnceLock<StabilityReport>,
}

impl LtiModel {
    /// Assemble a model from raw parts.
    ///
    /// This is the low-level entry used by the builders; it validates
    /// dimensions and that every correlation matrix has a positive
    /// semidefinite Hermitian part, but deliberately does not check
    /// stability (callers may want to *inspect* unstable drifts).
    pub fn from_parts(
        drift: DMatrix<Complex64>,
        channels: Vec<InputChannel>,
        observed_port: usize,
        scheme: Scheme,
    ) -> Result<Self> {
        if drift.nrows() != STATE_DIM || drift.ncols() != STATE_DIM {
            return Err(Error::invalid("drift", "must be 4x4"));
        }
        if channels.is_empty() {
            return Err(Error::invalid("channels", "at least one input channel required"));
        }
        let Some(port) = channels.get(observed_port) else {
            return Err(Error::invalid("observed_port", "index out of range"));
        };
        if !matches!(port.kind, ChannelKind::OpticalVacuum { observed: true, .. }) {
            return Err(Error::invalid(
                "observed_port",
                "must point at the observed optical vacuum channel",
            ));
        }
        for ch in &channels {
            let k = ch.width();
            if ch.coupling.nrows() != STATE_DIM || ch.corr.nrows() != k || ch.corr.ncols() != k {
                return Err(Error::invalid("channels", "coupling/corr dimension mismatch"));
            }
            // Hermitian part of the quantum correlator must be PSD.
            let herm = (ch.corr.clone() + ch.corr.adjoint()) * c(0.5);
            let min_eig = eigen::eigenvalues_complex(&herm)
                .iter()
                .map(|z| z.re)
                .fold(f64::INFINITY, f64::min);
            if min_eig < -1e-9 {
                return Err(Error::invalid(
                    "channels",
                    format!("correlator of `{}` is not PSD (min eig {min_eig:e})", ch.label),
                ));
            }
        }
        Ok(LtiModel {
            drift,
            channels,
            observed_port,
            scheme,
            stability: OnceLock::new(),
        })
    }

    pub fn drift(&self) -> &DMatrix<Complex64> {
        &self.drift
    }

    pub fn channels(&self) -> &[InputChannel] {
        &self.channels
    }

    /// Index of the observed optical channel within [`Self::channels`].
    pub fn observed_port(&self) -> usize {
        self.observed_port
    }

    /// Decay rate through the observed port.
    pub fn observed_rate(&self) -> f64 {
        match self.channels[self.observed_port].kind {
            ChannelKind::OpticalVacuum { rate, .. } => rate,
            _ => unreachable!("observed port validated at construction"),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Total number of scalar input components across all channels.
    pub fn n_components(&self) -> usize {
        self.channels.iter().map(InputChannel::width).sum()
    }

    /// Flattened component labels, in the order transfer coefficients use.
    pub fn component_labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.n_components());
        for ch in &self.channels {
            match ch.kind {
                ChannelKind::WhiteForce { row, .. } => {
                    out.push(format!("{}[{}]", ch.label, BASIS_LABELS[row]));
                }
                _ => {
                    out.push(format!("{}[{}]", ch.label, BASIS_LABELS[0]));
                    out.push(format!("{}[{}]", ch.label, BASIS_LABELS[1]));
                }
            }
        }
        out
    }

    /// Offset of a channel's first component in the flattened ordering.
    pub fn component_offset(&self, channel: usize) -> usize {
        self.channels[..channel].iter().map(InputChannel::width).sum()
    }

    /// Eigenvalue analysis of the drift, computed once and cached.
    pub fn stability_report(&self) -> &StabilityReport {
        self.stability.get_or_init(|| {
            let eigenvalues = eigen::eigenvalues_complex(&self.drift);
            let max_real_part = eigenvalues
                .iter()
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max);
            StabilityReport {
                verdict: classify(max_real_part),
                max_real_part,
                eigenvalues,
            }
        })
    }

    /// Error unless the drift is strictly stable.
    pub fn require_stable(&self) -> Result<()> {
        let report = self.stability_report();
        match report.verdict {
            Stability::Stable => Ok(()),
            other => Err(Error::NotStable {
                verdict: other.name(),
                max_re: report.max_real_part,
            }),
        }
    }
}

/// Classify the drift eigenvalues of a model.
///
/// Stable means every real part is below `-EPSILON_STABILITY`; real parts
/// inside `±EPSILON_STABILITY` are marginal; anything beyond is unstable.
pub fn stability_check(model: &LtiModel) -> Stability {
    model.stability_report().verdict
}

fn rwa_drift(params: &PhysParams, drives: &DriveConfig) -> DMatrix<Complex64> {
    let kappa = params.kappa_tot();
    let gd = drives.g_diff();
    let gs = drives.g_sum();
    let mut a = DMatrix::zeros(STATE_DIM, STATE_DIM);
    a[(U1, U1)] = c(-0.5 * kappa);
    a[(U1, X2)] = c(-gd);
    a[(U2, U2)] = c(-0.5 * kappa);
    a[(U2, X1)] = c(gs);
    a[(X1, X1)] = c(-0.5 * params.gamma_m);
    a[(X1, U2)] = c(-gd);
    a[(X2, X2)] = c(-0.5 * params.gamma_m);
    a[(X2, U1)] = c(gs);
    a
}

fn optical_channels(params: &PhysParams) -> Vec<InputChannel> {
    let mut channels = vec![InputChannel::optical("optical_out", params.kappa_out, true)];
    if params.kappa_int > 0.0 {
        channels.push(InputChannel::optical("optical_int", params.kappa_int, false));
    }
    channels
}

/// Two-tone sideband drive in the rotating frame: `U1` couples to `X2`
/// through G− − G+ while `U2` couples to `X1` through G− + G+, each pair
/// damped at its own rate. Rejects any internal loss — use
/// [`build_lossy`] for a second optical port.
pub fn build_dissipative(params: &PhysParams, drives: &DriveConfig) -> Result<LtiModel> {
    params.validate()?;
    drives.validate()?;
    drives.expect_scheme(Scheme::Dissipative)?;
    if params.kappa_int != 0.0 {
        return Err(Error::invalid(
            "kappa_int",
            "the single-port builder requires kappa_int = 0; use build_lossy",
        ));
    }
    let mut channels = optical_channels(params);
    channels.push(InputChannel::mechanical(params.gamma_m, params.n_th));
    LtiModel::from_parts(rwa_drift(params, drives), channels, 0, Scheme::Dissipative)
}

/// Same dynamics as [`build_dissipative`] with the cavity decay split into
/// an observed port and an unobserved internal-loss port, each in vacuum.
pub fn build_lossy(params: &PhysParams, drives: &DriveConfig) -> Result<LtiModel> {
    params.validate()?;
    drives.validate()?;
    drives.expect_scheme(Scheme::DissipativeLossy)?;
    let mut channels = optical_channels(params);
    channels.push(InputChannel::mechanical(params.gamma_m, params.n_th));
    LtiModel::from_parts(
        rwa_drift(params, drives),
        channels,
        0,
        Scheme::DissipativeLossy,
    )
}

/// Dissipative scheme with white laser phase noise.
///
/// Time-averaging the phase-noise force over the drive period leaves two
/// independent white force channels: spectral density
/// `2 Γ_L (G− − G+)² / g0²` on the `U1` equation and
/// `2 Γ_L (G− + G+)² / g0²` on `U2`. (The factor 2 Γ_L is the flat spectrum
/// of the instantaneous frequency; the sin²/cos² averaging halves it and the
/// quadrature amplitudes contribute 2 (G∓)²/g0².)
pub fn build_phase_noise(params: &PhysParams, drives: &DriveConfig) -> Result<LtiModel> {
    params.validate()?;
    drives.validate()?;
    drives.expect_scheme(Scheme::DissipativePhaseNoise)?;
    if params.gamma_l > 0.0 && params.g0 <= 0.0 {
        return Err(Error::invalid(
            "g0",
            "phase-noise spectral densities scale as 1/g0²; g0 must be > 0 when gamma_l > 0",
        ));
    }
    let mut channels = optical_channels(params);
    channels.push(InputChannel::mechanical(params.gamma_m, params.n_th));
    if params.gamma_l > 0.0 {
        let scale = 2.0 * params.gamma_l / (params.g0 * params.g0);
        let gd = drives.g_diff();
        let gs = drives.g_sum();
        channels.push(InputChannel::white_force("phase_noise", scale * gd * gd, U1));
        channels.push(InputChannel::white_force("phase_noise", scale * gs * gs, U2));
    }
    LtiModel::from_parts(
        rwa_drift(params, drives),
        channels,
        0,
        Scheme::DissipativePhaseNoise,
    )
}

/// Single resonant tone with the mechanics kept in the lab frame:
/// `U1` reflects untouched, radiation pressure `2G U1` drives the momentum
/// quadrature, and the oscillator imprints back onto `U2` via `2G X1`.
pub fn build_ponderomotive(params: &PhysParams, drives: &DriveConfig) -> Result<LtiModel> {
    params.validate()?;
    drives.validate()?;
    drives.expect_scheme(Scheme::Ponderomotive)?;
    if params.kappa_int != 0.0 {
        return Err(Error::invalid(
            "kappa_int",
            "the ponderomotive builder models a single-port cavity; kappa_int must be 0",
        ));
    }
    let kappa = params.kappa_tot();
    let g = drives.g_minus;
    let omega = params.omega_m;
    let mut a = DMatrix::zeros(STATE_DIM, STATE_DIM);
    a[(U1, U1)] = c(-0.5 * kappa);
    a[(U2, U2)] = c(-0.5 * kappa);
    a[(U2, X1)] = c(2.0 * g);
    a[(X1, X1)] = c(-0.5 * params.gamma_m);
    a[(X1, X2)] = c(omega);
    a[(X2, X1)] = c(-omega);
    a[(X2, X2)] = c(-0.5 * params.gamma_m);
    a[(X2, U1)] = c(2.0 * g);
    let mut channels = optical_channels(params);
    channels.push(InputChannel::mechanical(params.gamma_m, params.n_th));
    LtiModel::from_parts(a, channels, 0, Scheme::Ponderomotive)
}

/// Measurement scheme: the noise model is the dissipative one (the probe
/// tone's couplings are counter-rotating and average out here), plus a
/// static drive vector applying the force `−√2 A0 z` to the `U1` equation.
///
/// Returns the model together with that drive vector; with `z = 1` the
/// drive feeds [`crate::linres::mean_response`] the per-unit-signal slope.
pub fn build_measurement(
    params: &PhysParams,
    drives: &DriveConfig,
    signal: &MeasurementSignal,
) -> Result<(LtiModel, DVector<f64>)> {
    params.validate()?;
    drives.validate()?;
    drives.expect_scheme(Scheme::Measurement)?;
    signal.validate()?;
    let mut channels = optical_channels(params);
    channels.push(InputChannel::mechanical(params.gamma_m, params.n_th));
    let model = LtiModel::from_parts(rwa_drift(params, drives), channels, 0, Scheme::Measurement)?;
    let mut drive = DVector::zeros(STATE_DIM);
    drive[U1] = -std::f64::consts::SQRT_2 * drives.a_zero * signal.z;
    Ok((model, drive))
}

/// Blue-tone amplitude that makes the cold dissipative bath swallow the
/// cavity: `g_plus = sqrt(g_minus² − kappa_tot·gamma_m/4)`, i.e. the
/// zero-frequency induced damping equals the total cavity decay.
pub fn impedance_match(params: &PhysParams, g_minus: f64) -> Result<f64> {
    params.validate()?;
    if !g_minus.is_finite() || g_minus < 0.0 {
        return Err(Error::invalid("g_minus", "must be finite and >= 0"));
    }
    let floor = 0.25 * params.kappa_tot() * params.gamma_m;
    let g_plus_sq = g_minus * g_minus - floor;
    if g_plus_sq < 0.0 {
        return Err(Error::Unmatchable {
            g_minus,
            min_g_minus: floor.sqrt(),
        });
    }
    Ok(g_plus_sq.sqrt())
}

/// Squeeze parameter of the two-tone drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParameter {
    /// r = atanh(G+/G−).
    pub r: f64,
    /// exp(−2r) evaluated in the cancellation-free form (G−−G+)/(G−+G+).
    pub exp_minus_2r: f64,
}

/// tanh r = G+/G− with the exact exp(−2r); requires 0 ≤ g_plus < g_minus.
pub fn squeeze_parameter(g_minus: f64, g_plus: f64) -> Result<SqueezeParameter> {
    if !(g_minus.is_finite() && g_plus.is_finite()) {
        return Err(Error::invalid("couplings", "must be finite"));
    }
    if g_minus <= 0.0 || g_plus < 0.0 || g_plus >= g_minus {
        return Err(Error::invalid(
            "couplings",
            format!("need 0 <= g_plus < g_minus, got g_minus = {g_minus}, g_plus = {g_plus}"),
        ));
    }
    Ok(SqueezeParameter {
        r: (g_plus / g_minus).atanh(),
        exp_minus_2r: (g_minus - g_plus) / (g_minus + g_plus),
    })
}

/// Cooperativity C = 4g² / (kappa_tot · gamma_m).
pub fn cooperativity(params: &PhysParams, g: f64) -> f64 {
    4.0 * g * g / (params.kappa_tot() * params.gamma_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn base_params() -> PhysParams {
        PhysParams {
            omega_m: 10.0,
            kappa_out: 1.0,
            kappa_int: 0.0,
            gamma_m: 0.1,
            g0: 0.0,
            n_th: 0.0,
            gamma_l: 0.0,
        }
    }

    fn sorted_real_parts(model: &LtiModel) -> Vec<f64> {
        let mut re: Vec<f64> = model
            .stability_report()
            .eigenvalues
            .iter()
            .map(|z| z.re)
            .collect();
        re.sort_by(f64::total_cmp);
        re
    }

    #[test]
    fn dissipative_zero_coupling_eigenvalues() {
        let model =
            build_dissipative(&base_params(), &DriveConfig::dissipative(0.0, 0.0)).unwrap();
        let re = sorted_real_parts(&model);
        assert_relative_eq!(re[0], -0.5, epsilon = 1e-12);
        assert_relative_eq!(re[1], -0.5, epsilon = 1e-12);
        assert_relative_eq!(re[2], -0.05, epsilon = 1e-12);
        assert_relative_eq!(re[3], -0.05, epsilon = 1e-12);
        assert_eq!(stability_check(&model), Stability::Stable);
    }

    #[test]
    fn equal_tones_leave_u1_undriven_and_stable() {
        let params = base_params();
        let drives = DriveConfig::dissipative(0.4, 0.4);
        let model = build_dissipative(&params, &drives).unwrap();
        // g_minus = g_plus makes the U1/X2 pair triangular: U1 never hears
        // the mechanics even though X2 is strongly driven.
        assert_eq!(model.drift()[(U1, X2)], c(0.0));
        assert_relative_eq!(model.drift()[(X2, U1)].re, 0.8, epsilon = 1e-15);
        let re = sorted_real_parts(&model);
        assert_relative_eq!(re[0], -0.5, epsilon = 1e-12);
        assert_relative_eq!(re[3], -0.05, epsilon = 1e-12);
        assert_eq!(stability_check(&model), Stability::Stable);
    }

    #[test]
    fn inverted_tones_go_unstable_at_large_g_plus() {
        // The builders refuse g_plus > g_minus, so assemble the drift raw.
        let params = base_params();
        let mut drives = DriveConfig::dissipative(0.1, 0.0);
        drives.g_plus = 0.6; // past the threshold g_plus² − g_minus² > κΓ/4
        let channels = vec![
            InputChannel::optical("optical_out", params.kappa_out, true),
            InputChannel::mechanical(params.gamma_m, params.n_th),
        ];
        let model =
            LtiModel::from_parts(rwa_drift(&params, &drives), channels, 0, Scheme::Dissipative)
                .unwrap();
        assert_eq!(stability_check(&model), Stability::Unstable);
        assert!(model.require_stable().is_err());
    }

    #[test]
    fn builder_rejects_inverted_couplings() {
        let err = build_dissipative(&base_params(), &DriveConfig::dissipative(0.1, 0.2));
        assert!(matches!(err, Err(Error::CouplingOrder { .. })));
    }

    #[test]
    fn builder_rejects_nonpositive_mechanical_damping() {
        let mut params = base_params();
        params.gamma_m = 0.0;
        assert!(build_dissipative(&params, &DriveConfig::dissipative(0.1, 0.0)).is_err());
        params.gamma_m = -1.0;
        assert!(build_dissipative(&params, &DriveConfig::dissipative(0.1, 0.0)).is_err());
    }

    #[test]
    fn single_port_builder_rejects_internal_loss() {
        let mut params = base_params();
        params.kappa_int = 0.5;
        assert!(build_dissipative(&params, &DriveConfig::dissipative(0.1, 0.0)).is_err());
        assert!(build_lossy(&params, &DriveConfig::lossy(0.1, 0.0)).is_ok());
    }

    #[test]
    fn ponderomotive_drift_matches_equations_of_motion() {
        let params = base_params();
        let model = build_ponderomotive(&params, &DriveConfig::ponderomotive(0.3)).unwrap();
        let a = model.drift();
        assert_eq!(a[(U1, U1)], c(-0.5));
        assert_eq!(a[(U1, X1)], c(0.0));
        assert_eq!(a[(U2, X1)], c(0.6));
        assert_eq!(a[(X1, X2)], c(10.0));
        assert_eq!(a[(X2, X1)], c(-10.0));
        assert_eq!(a[(X2, U1)], c(0.6));
        // Radiation pressure on resonance never destabilizes: eigenvalues
        // are −κ/2 (twice) and −Γ/2 ± iΩ for any coupling.
        for g in [1e-3, 0.5, 7.0, 40.0] {
            let m = build_ponderomotive(&params, &DriveConfig::ponderomotive(g)).unwrap();
            assert_eq!(stability_check(&m), Stability::Stable);
        }
    }

    #[test]
    fn ponderomotive_accepts_only_a_single_red_tone() {
        // Zero coupling is a valid (empty-cavity) limit ...
        assert!(build_ponderomotive(&base_params(), &DriveConfig::ponderomotive(0.0)).is_ok());
        // ... but stray tones from the other schemes are not.
        let mut drives = DriveConfig::ponderomotive(0.1);
        drives.g_plus = 0.05;
        assert!(build_ponderomotive(&base_params(), &drives).is_err());
        let mut drives = DriveConfig::ponderomotive(0.1);
        drives.g_minus = -0.1;
        assert!(build_ponderomotive(&base_params(), &drives).is_err());
    }

    #[test]
    fn impedance_match_examples() {
        // At the matching floor the blue tone vanishes.
        let mut params = base_params();
        params.kappa_out = 2.0;
        params.gamma_m = 2.0;
        // κΓ/4 = 1 → g_minus = 2 matches at g_plus = √3.
        let g_plus = impedance_match(&params, 2.0).unwrap();
        assert_relative_eq!(g_plus, 3.0_f64.sqrt(), epsilon = 1e-15);
        // Exactly at threshold: g_plus = 0, r = 0.
        let g_at_floor = impedance_match(&params, 1.0).unwrap();
        assert_abs_diff_eq!(g_at_floor, 0.0);
        // Below threshold: explicit error carrying the floor.
        match impedance_match(&params, 0.5) {
            Err(Error::Unmatchable { min_g_minus, .. }) => {
                assert_relative_eq!(min_g_minus, 1.0, epsilon = 1e-15)
            }
            other => panic!("expected Unmatchable, got {other:?}"),
        }
    }

    #[test]
    fn matched_couplings_cancel_cavity_reflection_rate() {
        // κ = 1, Γ = 0.1, g_minus = 0.5 → g_plus = sqrt(0.225) and the
        // induced zero-frequency damping 4(g−²−g+²)/Γ equals κ.
        let mut params = base_params();
        params.gamma_m = 0.1;
        let g_plus = impedance_match(&params, 0.5).unwrap();
        assert_relative_eq!(g_plus, 0.225_f64.sqrt(), epsilon = 1e-15);
        let drives = DriveConfig::dissipative(0.5, g_plus);
        let kappa_tilde = 4.0 * drives.g_collective_sq() / params.gamma_m;
        assert_relative_eq!(kappa_tilde, params.kappa_tot(), epsilon = 1e-12);
    }

    #[test]
    fn matched_coupling_from_cooperativity_round_trips() {
        let params = PhysParams {
            gamma_m: 2e-5,
            ..base_params()
        };
        let c_target = 1e5;
        let g_minus = (c_target * params.kappa_tot() * params.gamma_m / 4.0).sqrt();
        assert_relative_eq!(cooperativity(&params, g_minus), c_target, max_relative = 1e-12);
        let g_plus = impedance_match(&params, g_minus).unwrap();
        assert_relative_eq!(
            g_plus / g_minus,
            (1.0 - 1.0 / c_target).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn squeeze_parameter_examples() {
        // g_plus = 0 → r = 0, exp(−2r) = 1.
        let s = squeeze_parameter(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(s.r, 0.0);
        assert_abs_diff_eq!(s.exp_minus_2r, 1.0);
        // tanh(1) ratio → r = 1.
        let s = squeeze_parameter(1.0, 1.0_f64.tanh()).unwrap();
        assert_relative_eq!(s.r, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.exp_minus_2r, (-2.0_f64).exp(), max_relative = 1e-12);
        // Ratio 1 − 9e-5 sits at r ≈ 5.0 (the deep-squeezing corner).
        let s = squeeze_parameter(1.0, 1.0 - 9e-5).unwrap();
        assert!((s.r - 5.0).abs() < 0.01, "r = {}", s.r);
        // Degenerate/inverted ratios are domain errors, not NaNs.
        assert!(squeeze_parameter(1.0, 1.0).is_err());
        assert!(squeeze_parameter(0.0, 0.0).is_err());
    }

    #[test]
    fn cooperativity_examples() {
        let mut params = base_params();
        params.kappa_out = 2.0;
        params.gamma_m = 0.5;
        // 4g²/(κΓ) with g² = κΓ/4 → C = 1.
        let g = (params.kappa_tot() * params.gamma_m / 4.0).sqrt();
        assert_relative_eq!(cooperativity(&params, g), 1.0, epsilon = 1e-14);
        // The 3 dB bound for n_th = 10 sits at C = (1+2·10)/2 = 10.5.
        assert_relative_eq!(
            cooperativity(&params, g * 10.5_f64.sqrt()),
            10.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn phase_noise_channels_carry_time_averaged_densities() {
        let mut params = base_params();
        params.g0 = 1e-2;
        params.gamma_l = 3.0;
        let drives = DriveConfig::phase_noise(0.5, 0.3);
        let model = build_phase_noise(&params, &drives).unwrap();
        assert_eq!(model.channels().len(), 4);
        let scale = 2.0 * params.gamma_l / (params.g0 * params.g0);
        match model.channels()[2].kind {
            ChannelKind::WhiteForce { psd, row } => {
                assert_eq!(row, U1);
                assert_relative_eq!(psd, scale * 0.04, max_relative = 1e-12);
            }
            _ => panic!("expected white force channel"),
        }
        match model.channels()[3].kind {
            ChannelKind::WhiteForce { psd, row } => {
                assert_eq!(row, U2);
                assert_relative_eq!(psd, scale * 0.64, max_relative = 1e-12);
            }
            _ => panic!("expected white force channel"),
        }
        // Quiet laser: no extra channels, model identical to dissipative.
        params.gamma_l = 0.0;
        let quiet = build_phase_noise(&params, &drives).unwrap();
        assert_eq!(quiet.channels().len(), 2);
        let plain =
            build_dissipative(&params, &DriveConfig::dissipative(0.5, 0.3)).unwrap();
        assert_eq!(quiet.drift(), plain.drift());
    }

    #[test]
    fn phase_noise_requires_g0_when_noisy() {
        let mut params = base_params();
        params.gamma_l = 1.0;
        params.g0 = 0.0;
        assert!(build_phase_noise(&params, &DriveConfig::phase_noise(0.5, 0.0)).is_err());
    }

    #[test]
    fn measurement_drive_vector() {
        let params = base_params();
        let drives = DriveConfig::measurement(0.5, 0.3, 0.0, 2.0);
        // z = 0 → no drive at all.
        let (_, drive) = build_measurement(&params, &drives, &MeasurementSignal { z: 0.0 }).unwrap();
        assert_eq!(drive, DVector::zeros(STATE_DIM));
        // Unit signal → force −√2·A0 on U1 only.
        let (model, drive) =
            build_measurement(&params, &drives, &MeasurementSignal { z: 1.0 }).unwrap();
        assert_relative_eq!(drive[U1], -std::f64::consts::SQRT_2 * 2.0, epsilon = 1e-15);
        assert_eq!(drive[U2], 0.0);
        // Noise model is the plain dissipative one.
        let plain = build_dissipative(&base_params(), &DriveConfig::dissipative(0.5, 0.3)).unwrap();
        assert_eq!(model.drift(), plain.drift());
    }

    #[test]
    fn component_labels_flatten_in_channel_order() {
        let mut params = base_params();
        params.kappa_int = 0.25;
        let model = build_lossy(&params, &DriveConfig::lossy(0.1, 0.0)).unwrap();
        let labels = model.component_labels();
        assert_eq!(labels.len(), 6);
        assert_eq!(labels[0], "optical_out[U1]");
        assert_eq!(labels[3], "optical_int[U2]");
        assert_eq!(model.component_offset(2), 4);
        assert_eq!(model.observed_rate(), 1.0);
    }
}
