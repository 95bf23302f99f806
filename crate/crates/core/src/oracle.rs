//! Closed-form benchmark values the numerical solvers are tested against.
//!
//! Everything here is evaluated from analytic formulas only — no matrix
//! inversions — so agreement with [`crate::linres`] / [`crate::floquet`] is
//! a genuine cross-check rather than the same computation twice.
//!
//! Unit conventions: susceptibilities are complex and carry their natural
//! rate units; every *spectrum-valued* function returns the symmetrized
//! output spectrum in units of the shot-noise floor, so vacuum = 1 (the
//! solvers report absolute spectra where vacuum = 1/2; multiply those by 2
//! before comparing). Asymptotic estimators return a [`RegimeChecked`]
//! that also says whether the requested parameters sit inside the regime
//! the formula was derived for.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An asymptotic estimate plus a flag for whether the closed form's
/// validity conditions hold at the requested parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeChecked {
    pub value: f64,
    pub in_regime: bool,
}

/// Lab-frame mechanical susceptibility `1 / (Ω² − ω² − iωΓ)`.
///
/// On resonance this reduces to `i / (Ω Γ)`.
pub fn mechanical_susceptibility(omega: f64, omega_m: f64, gamma_m: f64) -> Complex64 {
    1.0 / Complex64::new(omega_m * omega_m - omega * omega, -omega * gamma_m)
}

/// Rotating-frame cavity self-energy `Σ[ω] = −i 𝒢² / (−iω + Γ/2)`.
///
/// `g_collective_sq` is 𝒢² = G−² − G+². The imaginary part encodes the
/// induced damping: `Im Σ = −κ̃[ω]/2`.
pub fn self_energy(omega: f64, g_collective_sq: f64, gamma_m: f64) -> Complex64 {
    Complex64::new(0.0, -g_collective_sq) / Complex64::new(0.5 * gamma_m, -omega)
}

/// Mechanically induced cavity damping `κ̃[ω] = 𝒢² Γ / (Γ²/4 + ω²)`.
pub fn induced_damping(omega: f64, g_collective_sq: f64, gamma_m: f64) -> f64 {
    g_collective_sq * gamma_m / (0.25 * gamma_m * gamma_m + omega * omega)
}

/// Dressed cavity susceptibility `χ[ω] = 1 / (−iω + κ/2 + iΣ[ω])`.
pub fn cavity_susceptibility(omega: f64, kappa: f64, sigma: Complex64) -> Complex64 {
    1.0 / (Complex64::new(0.5 * kappa, -omega) + Complex64::new(0.0, 1.0) * sigma)
}

/// Which output quadrature a closed form refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Amplitude quadrature U1 (squeezed by the two-tone drive).
    U1,
    /// Phase quadrature U2 (anti-squeezed).
    U2,
}

/// Full two-tone output spectrum at any frequency, in shot-noise units:
///
/// `S[ω]/S_SN = |κχ − 1|² + κ Γ |χ|² g̃² (1 + 2n_th) / (Γ²/4 + ω²)`
///
/// with `g̃ = G− − G+` for `U1` and `G− + G+` for `U2`. The first term is
/// reflected vacuum filtered by the dressed cavity; the second is
/// transduced mechanical noise.
pub fn dissipative_spectrum(
    omega: f64,
    kappa: f64,
    gamma_m: f64,
    g_minus: f64,
    g_plus: f64,
    n_th: f64,
    quad: Quadrature,
) -> f64 {
    let g_sq = g_minus * g_minus - g_plus * g_plus;
    let chi = cavity_susceptibility(omega, kappa, self_energy(omega, g_sq, gamma_m));
    let reflection = (kappa * chi - 1.0).norm_sqr();
    let g_tilde = match quad {
        Quadrature::U1 => g_minus - g_plus,
        Quadrature::U2 => g_minus + g_plus,
    };
    let lorentz = 0.25 * gamma_m * gamma_m + omega * omega;
    let mechanical =
        kappa * gamma_m * chi.norm_sqr() * g_tilde * g_tilde * (1.0 + 2.0 * n_th) / lorentz;
    reflection + mechanical
}

/// Squeezed-quadrature spectrum on cavity resonance, in shot-noise units:
///
/// `[4 κ κ̃ (1+2n_th) e^{−2r} + (κ − κ̃)²] / (κ + κ̃)²`
///
/// where `κ̃` is the zero-frequency induced damping. Pass `exp(+2r)` as
/// `squeeze_factor` to get the conjugate quadrature instead. At the
/// impedance-matched point `κ̃ = κ` this collapses to `(1+2n_th) e^{−2r}`.
pub fn dissipative_resonance(
    kappa: f64,
    kappa_tilde: f64,
    n_th: f64,
    squeeze_factor: f64,
) -> f64 {
    let sum = kappa + kappa_tilde;
    let diff = kappa - kappa_tilde;
    (4.0 * kappa * kappa_tilde * (1.0 + 2.0 * n_th) * squeeze_factor + diff * diff) / (sum * sum)
}

/// Matched on-resonance squeezing with an internal-loss port:
/// `κ_int/κ_tot + (κ_out/κ_tot)(1+2n_th) e^{−2r}`.
pub fn lossy_resonance(kappa_out: f64, kappa_int: f64, n_th: f64, exp_minus_2r: f64) -> f64 {
    let kappa_tot = kappa_out + kappa_int;
    (kappa_int + kappa_out * (1.0 + 2.0 * n_th) * exp_minus_2r) / kappa_tot
}

/// Matched on-resonance squeezing with white laser phase noise:
/// `(1 + 2 n_th + Γ Γ_L / g0²) e^{−2r}` — the noise floor acts as an extra
/// mechanical occupation `Γ Γ_L / (2 g0²)`.
pub fn phase_noise_resonance(
    n_th: f64,
    gamma_m: f64,
    gamma_l: f64,
    g0: f64,
    exp_minus_2r: f64,
) -> f64 {
    (1.0 + 2.0 * n_th + gamma_m * gamma_l / (g0 * g0)) * exp_minus_2r
}

/// Location and depth of the off-resonant reflection minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMinimum {
    /// Positive-frequency location of the minimum.
    pub omega: f64,
    /// Spectrum value there, in shot-noise units.
    pub value: f64,
}

/// Deep-squeezing spectral minimum in the strong-coupling regime.
///
/// For `8𝒢² > κ² + Γ²` the reflected-vacuum term `|κχ − 1|²` has interior
/// minima at `ω² = 𝒢² − (κ² + Γ²)/8`; this returns that location and the
/// exact value of the reflection term there (the transduced mechanical term
/// is `O((1+2n_th) e^{−2r})` and neglected, so the value is the `r → ∞`,
/// cold-bath limit of the full spectrum).
pub fn strong_coupling_minimum(
    kappa: f64,
    gamma_m: f64,
    g_collective: f64,
) -> Result<SpectralMinimum> {
    let a = 0.5 * kappa;
    let b = 0.5 * gamma_m;
    let g_sq = g_collective * g_collective;
    let u_star = g_sq - 0.5 * (a * a + b * b);
    if u_star <= 0.0 {
        return Err(Error::invalid(
            "g_collective",
            format!(
                "strong-coupling minimum needs 8𝒢² > κ² + Γ² (got 𝒢² = {g_sq:e}, need > {:e})",
                0.5 * (a * a + b * b) * 2.0
            ),
        ));
    }
    // |κχ − 1|² = P(u)/Q(u) in u = ω²; both quadratics share the leading
    // and linear structure so the stationarity condition is linear in u.
    let p = a * b - g_sq;
    let q = -(a * b + g_sq);
    let s = (b - a) * (b - a);
    let t = (a + b) * (a + b);
    let num = (u_star + p) * (u_star + p) + s * u_star;
    let den = (u_star + q) * (u_star + q) + t * u_star;
    Ok(SpectralMinimum {
        omega: u_star.sqrt(),
        value: num / den,
    })
}

/// Reflection term `|κχ[ω] − 1|²` of the two-tone spectrum (shot units).
pub fn reflection_term(omega: f64, kappa: f64, gamma_m: f64, g_collective_sq: f64) -> f64 {
    let chi = cavity_susceptibility(omega, kappa, self_energy(omega, g_collective_sq, gamma_m));
    (kappa * chi - 1.0).norm_sqr()
}

/// Radiation-pressure cross-spectrum between the output quadratures
/// (shot-noise units):
///
/// `S12[ω] = 4 G² Ω κ / (κ²/4 + ω²) · Re[1/D(ω)]`, `D = (Γ/2 − iω)² + Ω²`.
///
/// `Re[1/D]` changes sign at `ω = sqrt(Ω² + Γ²/4)`, slightly above the
/// mechanical resonance — the frequency where the optimal homodyne angle
/// sweeps through zero.
pub fn ps_cross_spectrum(omega: f64, kappa: f64, omega_m: f64, gamma_m: f64, g: f64) -> f64 {
    let d = Complex64::new(0.5 * gamma_m, -omega).powi(2) + omega_m * omega_m;
    let lorentz = 0.25 * kappa * kappa + omega * omega;
    4.0 * g * g * omega_m * kappa / lorentz * (1.0 / d).re
}

/// Low-frequency optimal-quadrature deficit `1 − S_opt/S_SN ≈ 16 G²/(κΩ)`
/// of the radiation-pressure scheme; valid in the good-cavity limit.
pub fn ps_deficit_asymptote(g: f64, kappa: f64, omega_m: f64) -> RegimeChecked {
    RegimeChecked {
        value: 16.0 * g * g / (kappa * omega_m),
        in_regime: kappa <= 0.1 * omega_m,
    }
}

/// Cooperativity where two-tone squeezing crosses `target_ratio` of shot
/// noise at the matched resonance: `C = (1 + s̄)² / (4 s̄)` with
/// `s̄ = target_ratio / (1 + 2 n_th)`.
pub fn dissipative_threshold_cooperativity(n_th: f64, target_ratio: f64) -> Result<f64> {
    if target_ratio.is_nan() || target_ratio <= 0.0 {
        return Err(Error::invalid("target_ratio", "must be > 0"));
    }
    let s_bar = target_ratio / (1.0 + 2.0 * n_th);
    if s_bar > 1.0 {
        return Err(Error::invalid(
            "target_ratio",
            "already met at zero coupling; no threshold exists",
        ));
    }
    let one_plus = 1.0 + s_bar;
    Ok(one_plus * one_plus / (4.0 * s_bar))
}

/// Cooperativity the radiation-pressure scheme needs before its
/// near-sideband squeezing reaches 3 dB:
/// `C ≈ [(1 + 2 n_th)/2 + Ω/(√2 Γ)] / 4`. The `Ω/Γ` term is what makes
/// this scheme expensive for high-Q oscillators.
pub fn ps_threshold_cooperativity(n_th: f64, omega_m: f64, gamma_m: f64) -> RegimeChecked {
    RegimeChecked {
        value: (0.5 * (1.0 + 2.0 * n_th) + omega_m / (std::f64::consts::SQRT_2 * gamma_m)) / 4.0,
        in_regime: omega_m >= 100.0 * gamma_m,
    }
}

/// Counter-rotating squeezing floor `κ²/(32 Ω²)`: the matched two-tone
/// spectrum saturates here as the cooperativity grows, instead of falling
/// to zero as the rotating-wave result suggests.
pub fn bad_cavity_floor(kappa: f64, omega_m: f64) -> RegimeChecked {
    RegimeChecked {
        value: kappa * kappa / (32.0 * omega_m * omega_m),
        in_regime: kappa <= 0.1 * omega_m,
    }
}

/// Measurement-rate gain of the matched two-tone cavity over a bare cavity
/// at the same probe power: `e^{2r} / (4 (1 + 2 n_th))` with
/// `e^{2r} = (√C + √(C−1))²`.
pub fn measurement_enhancement(c: f64, n_th: f64) -> Result<RegimeChecked> {
    if c.is_nan() || c < 1.0 {
        return Err(Error::invalid(
            "c",
            "matched couplings need cooperativity >= 1",
        ));
    }
    let exp_2r = (c.sqrt() + (c - 1.0).sqrt()).powi(2);
    Ok(RegimeChecked {
        value: exp_2r / (4.0 * (1.0 + 2.0 * n_th)),
        in_regime: c >= 100.0,
    })
}

/// Counter-rotating ceiling on the measurement enhancement: `8 Ω²/κ²`.
pub fn measurement_enhancement_ceiling(kappa: f64, omega_m: f64) -> RegimeChecked {
    RegimeChecked {
        value: 8.0 * omega_m * omega_m / (kappa * kappa),
        in_regime: kappa <= 0.1 * omega_m,
    }
}

/// Measurement rate of a bare (uncoupled) cavity probed at amplitude `a0`:
/// `4 a0²/κ` — the reference the enhancement is quoted against.
pub fn linear_cavity_measurement_rate(kappa: f64, a_zero: f64) -> f64 {
    4.0 * a_zero * a_zero / kappa
}

/// Dimensionless backaction strength of the radiation-pressure scheme,
/// `S̃[ω] = 2 Ω G² κ Im χ_M[ω] / (κ²/4 + ω²)`; peaks near `±Ω` where the
/// mechanics responds in quadrature to the drive.
pub fn s_tilde(omega: f64, kappa: f64, omega_m: f64, gamma_m: f64, g: f64) -> f64 {
    let chi_m = mechanical_susceptibility(omega, omega_m, gamma_m);
    2.0 * omega_m * g * g * kappa * chi_m.im / (0.25 * kappa * kappa + omega * omega)
}

/// Excess noise parameter `δS = S̃ (S̃ + 1 + 2 n_th)` controlling how far
/// above shot noise the anti-squeezed quadrature sits near the mechanical
/// sideband.
pub fn delta_s(s_tilde: f64, n_th: f64) -> f64 {
    s_tilde * (s_tilde + 1.0 + 2.0 * n_th)
}
