//! Frequency-domain linear response and stationary noise spectra.
//!
//! For a stable model `v̇ = A v + Σ_c B_c w_c` the Fourier transform gives
//! `v[ω] = (−iωI − A)⁻¹ Σ_c B_c w_c[ω]`; composing with the output relation
//! of the observed port yields transfer rows over every input component,
//! and contracting those with the input correlators yields the symmetrized
//! output spectra `S_AB[ω] = Σ_jk T^A_j[ω] N_jk T^B_k[−ω]`. Spectra are
//! absolute: vacuum contributes 1/2 per quadrature.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::model::{LtiModel, STATE_DIM};

/// Relative tolerance for the reality/positivity checks on spectra.
const REALITY_TOL: f64 = 1e-8;

/// Transfer rows of the observed output quadratures at one frequency.
///
/// `rows` is 2×K over the flattened input components of
/// [`LtiModel::component_labels`]: row 0 maps inputs to the output `U1`
/// quadrature, row 1 to `U2`. Feedthrough (the `−w_in` part of the
/// input–output relation) is included on the observed port's components.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferRows {
    pub omega: f64,
    pub rows: DMatrix<Complex64>,
}

/// Solve the response problem at frequency `omega`.
pub fn transfer(model: &LtiModel, omega: f64) -> Result<TransferRows> {
    model.require_stable()?;
    let n_comp = model.n_components();
    let mut couplings = DMatrix::zeros(STATE_DIM, n_comp);
    let mut offset = 0;
    for ch in model.channels() {
        couplings
            .view_mut((0, offset), (STATE_DIM, ch.width()))
            .copy_from(ch.coupling());
        offset += ch.width();
    }
    let mut m = -model.drift();
    for i in 0..STATE_DIM {
        m[(i, i)] += Complex64::new(0.0, -omega);
    }
    let state_response = eigen::solve_complex(m, &couplings, omega)?;
    let sqrt_rate = model.observed_rate().sqrt();
    let mut rows = DMatrix::zeros(2, n_comp);
    for quad in 0..2 {
        rows.row_mut(quad)
            .copy_from(&(state_response.row(quad) * Complex64::new(sqrt_rate, 0.0)));
    }
    let own = model.component_offset(model.observed_port());
    rows[(0, own)] -= 1.0;
    rows[(1, own + 1)] -= 1.0;
    Ok(TransferRows { omega, rows })
}

/// Stationary output spectra at one frequency, with the quadrature-angle
/// analysis already performed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    /// Symmetrized spectrum of the output amplitude quadrature.
    pub s_u1: f64,
    /// Symmetrized spectrum of the output phase quadrature.
    pub s_u2: f64,
    /// Symmetrized cross-spectrum between them.
    pub s_u12: f64,
    /// Homodyne angle minimizing the quadrature spectrum, in (−π/2, π/2].
    pub phi_opt: f64,
    /// Spectrum at `phi_opt`.
    pub s_opt: f64,
    /// Effective thermal occupation implied by the product `s_u1·s_u2`;
    /// only meaningful when the quadratures are uncorrelated, `None`
    /// otherwise.
    pub n_eff: Option<f64>,
}

impl SpectrumPoint {
    /// Spectrum of the rotated quadrature `U1 cos φ + U2 sin φ`.
    pub fn at_angle(&self, phi: f64) -> f64 {
        let (s, c) = (phi.sin(), phi.cos());
        self.s_u1 * c * c + self.s_u2 * s * s + 2.0 * self.s_u12 * s * c
    }
}

fn noise_matrix(model: &LtiModel) -> DMatrix<Complex64> {
    let n_comp = model.n_components();
    let mut n = DMatrix::zeros(n_comp, n_comp);
    let mut offset = 0;
    for ch in model.channels() {
        let k = ch.width();
        n.view_mut((offset, offset), (k, k)).copy_from(ch.corr());
        offset += k;
    }
    n
}

fn contract(
    t_pos: &TransferRows,
    t_neg: &TransferRows,
    noise: &DMatrix<Complex64>,
    a: usize,
    b: usize,
) -> Complex64 {
    let row_a: RowDVector<Complex64> = t_pos.rows.row(a).into_owned();
    let row_b = t_neg.rows.row(b).transpose();
    (row_a * noise * row_b)[(0, 0)]
}

fn real_part_checked(value: Complex64, scale: f64, context: &'static str) -> Result<f64> {
    if value.im.abs() > REALITY_TOL * scale {
        return Err(Error::Numerical {
            context,
            reason: format!("imaginary residue {:e} at scale {:e}", value.im, scale),
        });
    }
    Ok(value.re)
}

/// Angle in (−π/2, π/2] minimizing `S(φ)`, and the minimum itself.
///
/// `S(φ) = (s1+s2)/2 + (s1−s2)/2·cos2φ + s12·sin2φ`, so the minimum sits a
/// quarter turn past the maximum at `atan2(2·s12, s1−s2)/2`. The minimum is
/// evaluated in the product form `(s1·s2 − s12²)/(mean + half-range)`,
/// which stays accurate when it is orders of magnitude below the mean.
/// When the spectrum is angle-independent the angle defaults to 0.
pub fn optimal_quadrature(s_u1: f64, s_u2: f64, s_u12: f64) -> (f64, f64) {
    let mean = 0.5 * (s_u1 + s_u2);
    let half_range = (0.25 * (s_u1 - s_u2) * (s_u1 - s_u2) + s_u12 * s_u12).sqrt();
    if half_range <= 1e-14 * mean {
        return (0.0, mean);
    }
    let mut phi = 0.5 * (2.0 * s_u12).atan2(s_u1 - s_u2) + std::f64::consts::FRAC_PI_2;
    if phi > std::f64::consts::FRAC_PI_2 {
        phi -= std::f64::consts::PI;
    }
    let s_opt = (s_u1 * s_u2 - s_u12 * s_u12) / (mean + half_range);
    (phi, s_opt)
}

/// Validate the raw complex auto/cross spectra and run the quadrature
/// analysis. Shared by the direct and harmonic-expansion solvers.
pub(crate) fn assemble_point(
    omega: f64,
    s11: Complex64,
    s22: Complex64,
    s12: Complex64,
) -> Result<SpectrumPoint> {
    let scale = s11.re.abs().max(s22.re.abs()).max(1e-300);
    let s_u1 = real_part_checked(s11, scale, "auto-spectrum U1")?;
    let s_u2 = real_part_checked(s22, scale, "auto-spectrum U2")?;
    if s_u1 < -REALITY_TOL * scale || s_u2 < -REALITY_TOL * scale {
        return Err(Error::Numerical {
            context: "auto-spectrum",
            reason: format!("negative spectrum: s_u1 = {s_u1:e}, s_u2 = {s_u2:e}"),
        });
    }
    let s_u1 = s_u1.max(0.0);
    let s_u2 = s_u2.max(0.0);
    // The symmetrized cross-spectrum is the real part; the imaginary part
    // is the (physical, nonzero) commutator piece, so it is not checked.
    let s_u12 = s12.re;
    let (phi_opt, s_opt) = optimal_quadrature(s_u1, s_u2, s_u12);
    let n_eff = if s_u12.abs() <= 1e-9 * 0.5 * (s_u1 + s_u2) {
        Some((s_u1 * s_u2).sqrt() - 0.5)
    } else {
        None
    };
    Ok(SpectrumPoint {
        omega,
        s_u1,
        s_u2,
        s_u12,
        phi_opt,
        s_opt,
        n_eff,
    })
}

/// Compute the full stationary spectrum analysis at `omega`.
pub fn spectrum_point(model: &LtiModel, omega: f64) -> Result<SpectrumPoint> {
    let t_pos = transfer(model, omega)?;
    let t_neg = transfer(model, -omega)?;
    let noise = noise_matrix(model);
    let s11 = contract(&t_pos, &t_neg, &noise, 0, 0);
    let s22 = contract(&t_pos, &t_neg, &noise, 1, 1);
    let s12 = contract(&t_pos, &t_neg, &noise, 0, 1);
    assemble_point(omega, s11, s22, s12)
}

/// Mean homodyne output `⟨I⟩ = κ_out ⟨U1⟩` produced by a static drive
/// vector on the state equations (steady state of `v̇ = A v + drive`).
pub fn mean_response(model: &LtiModel, drive: &DVector<f64>) -> Result<f64> {
    model.require_stable()?;
    if drive.len() != STATE_DIM {
        return Err(Error::invalid("drive", "must have one entry per state variable"));
    }
    let rhs = DMatrix::from_fn(STATE_DIM, 1, |i, _| Complex64::new(-drive[i], 0.0));
    let steady = eigen::solve_complex(model.drift().clone(), &rhs, 0.0)?;
    let mean = model.observed_rate() * steady[(0, 0)].re;
    Ok(mean)
}

/// Spectral density of the homodyne photocurrent measuring the output `U1`
/// quadrature: `S_II = 2 κ_out S_U1`.
pub fn homodyne_noise_density(kappa_out: f64, s_u1: f64) -> f64 {
    2.0 * kappa_out * s_u1
}

/// Measurement rate `Γ_meas = slope² / (2 S_II[0])` for a signal read out
/// through a mean photocurrent slope against a white noise floor.
pub fn measurement_rate(slope: f64, s_ii_zero: f64) -> Result<f64> {
    if s_ii_zero > 0.0 {
        Ok(slope * slope / (2.0 * s_ii_zero))
    } else {
        // Catches NaN as well as zero and negative floors.
        Err(Error::invalid("s_ii_zero", "noise floor must be > 0"))
    }
}
