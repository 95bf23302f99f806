//! Harmonic-expansion solver including the counter-rotating dynamics.
//!
//! In the frame rotating at the mechanical frequency the drive tones leave
//! time-periodic coefficients `A(t) = Σ_m A_m e^{imΩt}` (m ∈ {0,±1,±2}).
//! Truncating the ladder of coupled sidebands at `±N` harmonics turns the
//! Langevin equations into one block system
//! `𝕄_{n,n'}(ω) = −i(ω+nΩ) δ_{nn'} I − A_{n'−n}` over the ladder-operator
//! basis `(d, d†, b, b†)`; the stationary harmonic-0 output spectra follow
//! from `S_AB[ω] = Σ_n T^A_n(ω) · N · T^B_{−n}(−ω)ᵀ`. The expansion is
//! escalated until the spectra stop moving, so rotating-wave artifacts —
//! squeezing floors, measurement-rate ceilings — appear automatically.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::linres::{assemble_point, SpectrumPoint};
use crate::model::{DriveConfig, PhysParams, Scheme, Stability, EPSILON_STABILITY};

/// Ladder-basis state dimension: (d, d†, b, b†).
const DIM: usize = 4;
const D: usize = 0;
const DD: usize = 1;
const B: usize = 2;
const BD: usize = 3;

/// Starting truncation order of the harmonic ladder.
pub const N_HARMONICS_DEFAULT: u32 = 4;
/// Hard cap on the truncation order before reporting non-convergence.
pub const N_HARMONICS_MAX: u32 = 8;
/// Relative spectrum change between successive orders accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

fn im(v: f64) -> Complex64 {
    Complex64::new(0.0, v)
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// One input channel in the ladder basis: coupling columns (√rate
/// included) over `(w, w†)` and their non-symmetrized correlators.
#[derive(Debug, Clone)]
struct LadderChannel {
    coupling: DMatrix<Complex64>,
    corr: DMatrix<Complex64>,
}

impl LadderChannel {
    /// Bosonic bath at occupation `n`: ⟨w w†⟩ = n+1, ⟨w† w⟩ = n.
    fn bath(rate: f64, n: f64, row: usize) -> Self {
        let mut coupling = DMatrix::zeros(DIM, 2);
        coupling[(row, 0)] = re(rate.sqrt());
        coupling[(row + 1, 1)] = re(rate.sqrt());
        let mut corr = DMatrix::zeros(2, 2);
        corr[(0, 1)] = re(n + 1.0);
        corr[(1, 0)] = re(n);
        LadderChannel { coupling, corr }
    }

    fn width(&self) -> usize {
        self.coupling.ncols()
    }
}

/// Periodically driven model: harmonic blocks, ladder-basis channels, and
/// (for the measurement scheme) the static drive's harmonic components.
#[derive(Debug)]
pub struct FloquetModel {
    params: PhysParams,
    drives: DriveConfig,
    /// `blocks[m+2]` is `A_m`.
    blocks: [DMatrix<Complex64>; 5],
    channels: Vec<LadderChannel>,
    /// Drive harmonics `f_{−1}, f_0, f_{+1}` per unit signal.
    drive_harmonics: Option<[DVector<Complex64>; 3]>,
    /// Stability verdicts per truncation order, filled lazily.
    stability: Mutex<HashMap<u32, (Stability, f64)>>,
}

/// Expand a driven-cavity configuration into its harmonic blocks.
///
/// Supports the two-tone schemes (plain, lossy) and the measurement
/// scheme, whose probe tone adds `±1` blocks and a harmonic drive. The
/// rotating-wave block `A_0` is derived independently of the quadrature
/// builders; agreement between the two routes is checked in the tests.
pub fn lift(params: &PhysParams, drives: &DriveConfig) -> Result<FloquetModel> {
    params.validate()?;
    drives.validate()?;
    match drives.scheme {
        Scheme::Dissipative | Scheme::Measurement => {
            if params.kappa_int != 0.0 {
                return Err(Error::invalid(
                    "kappa_int",
                    "this scheme models a single-port cavity; use the lossy scheme instead",
                ));
            }
        }
        Scheme::DissipativeLossy => {}
        other => {
            return Err(Error::SchemeMismatch {
                expected: "dissipative, dissipative_lossy, or measurement",
                got: other.name(),
            })
        }
    }

    let kappa = params.kappa_tot();
    let (gm, gp, g0) = (drives.g_minus, drives.g_plus, drives.g_zero);

    // Rotating-wave block from H = −G−(d†b + db†) − G+(d†b† + db).
    let mut a0 = DMatrix::zeros(DIM, DIM);
    a0[(D, D)] = re(-0.5 * kappa);
    a0[(D, B)] = im(gm);
    a0[(D, BD)] = im(gp);
    a0[(DD, DD)] = re(-0.5 * kappa);
    a0[(DD, B)] = im(-gp);
    a0[(DD, BD)] = im(-gm);
    a0[(B, D)] = im(gm);
    a0[(B, DD)] = im(gp);
    a0[(B, B)] = re(-0.5 * params.gamma_m);
    a0[(BD, D)] = im(-gp);
    a0[(BD, DD)] = im(-gm);
    a0[(BD, BD)] = re(-0.5 * params.gamma_m);

    // Counter-rotating partners of the same tones oscillate at ±2Ω:
    // each coupling reappears with its RWA partner swapped.
    let mut a_plus2 = DMatrix::zeros(DIM, DIM);
    a_plus2[(D, BD)] = im(gm);
    a_plus2[(DD, BD)] = im(-gp);
    a_plus2[(B, D)] = im(gp);
    a_plus2[(B, DD)] = im(gm);
    let mut a_minus2 = DMatrix::zeros(DIM, DIM);
    a_minus2[(D, B)] = im(gp);
    a_minus2[(DD, B)] = im(-gm);
    a_minus2[(BD, D)] = im(-gm);
    a_minus2[(BD, DD)] = im(-gp);

    // Resonant probe tone: H = iG0 (d − d†)(b e^{−iΩt} + b† e^{iΩt})
    // lives entirely at ±1Ω — it has no rotating-wave part.
    let mut a_plus1 = DMatrix::zeros(DIM, DIM);
    a_plus1[(D, BD)] = re(-g0);
    a_plus1[(DD, BD)] = re(-g0);
    a_plus1[(B, D)] = re(g0);
    a_plus1[(B, DD)] = re(-g0);
    let mut a_minus1 = DMatrix::zeros(DIM, DIM);
    a_minus1[(D, B)] = re(-g0);
    a_minus1[(DD, B)] = re(-g0);
    a_minus1[(BD, D)] = re(-g0);
    a_minus1[(BD, DD)] = re(g0);

    let mut channels = vec![LadderChannel::bath(params.kappa_out, 0.0, D)];
    if params.kappa_int > 0.0 {
        channels.push(LadderChannel::bath(params.kappa_int, 0.0, D));
    }
    channels.push(LadderChannel::bath(params.gamma_m, params.n_th, B));

    let drive_harmonics = if drives.scheme == Scheme::Measurement {
        let a0_amp = drives.a_zero;
        let (a_minus, a_plus) = if g0 > 0.0 {
            (a0_amp * gm / g0, a0_amp * gp / g0)
        } else {
            (0.0, 0.0)
        };
        let f_zero = DVector::from_vec(vec![re(-a0_amp), re(-a0_amp), re(0.0), re(0.0)]);
        let f_plus = DVector::from_vec(vec![im(a_minus), im(-a_plus), re(0.0), re(0.0)]);
        let f_minus = DVector::from_vec(vec![im(a_plus), im(-a_minus), re(0.0), re(0.0)]);
        Some([f_minus, f_zero, f_plus])
    } else {
        None
    };

    Ok(FloquetModel {
        params: *params,
        drives: *drives,
        blocks: [a_minus2, a_minus1, a0, a_plus1, a_plus2],
        channels,
        drive_harmonics,
        stability: Mutex::new(HashMap::new()),
    })
}

impl FloquetModel {
    /// Harmonic block `A_m`, m ∈ [−2, 2].
    pub fn block(&self, m: i32) -> &DMatrix<Complex64> {
        &self.blocks[(m + 2) as usize]
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn drives(&self) -> &DriveConfig {
        &self.drives
    }

    /// Copy with every oscillating block removed — the rotating-wave
    /// limit, used to cross-check against the direct solver.
    pub fn without_cr_blocks(&self) -> FloquetModel {
        let zero = DMatrix::zeros(DIM, DIM);
        FloquetModel {
            params: self.params,
            drives: self.drives,
            blocks: [
                zero.clone(),
                zero.clone(),
                self.blocks[2].clone(),
                zero.clone(),
                zero,
            ],
            channels: self.channels.clone(),
            drive_harmonics: self.drive_harmonics.clone(),
            stability: Mutex::new(HashMap::new()),
        }
    }

    fn n_components(&self) -> usize {
        self.channels.iter().map(LadderChannel::width).sum()
    }

    /// Largest real part over the truncated Floquet exponents
    /// (eigenvalues of `G_{n,n'} = A_{n'−n} + inΩ δ_{nn'} I`).
    pub fn max_floquet_exponent(&self, n_harm: u32) -> f64 {
        self.stability_entry(n_harm).1
    }

    fn stability_entry(&self, n_harm: u32) -> (Stability, f64) {
        if let Some(&hit) = self.stability.lock().unwrap().get(&n_harm) {
            return hit;
        }
        let n = n_harm as i64;
        let dim = DIM * (2 * n_harm as usize + 1);
        let mut g = DMatrix::zeros(dim, dim);
        for (row_idx, nrow) in (-n..=n).enumerate() {
            for (col_idx, ncol) in (-n..=n).enumerate() {
                let m = ncol - nrow;
                if m.abs() <= 2 {
                    g.view_mut((DIM * row_idx, DIM * col_idx), (DIM, DIM))
                        .copy_from(self.block(m as i32));
                }
            }
            for i in 0..DIM {
                g[(DIM * row_idx + i, DIM * row_idx + i)] +=
                    im(nrow as f64 * self.params.omega_m);
            }
        }
        let max_re = eigen::max_real_part(&g);
        let verdict = if max_re > EPSILON_STABILITY {
            Stability::Unstable
        } else if max_re >= -EPSILON_STABILITY {
            Stability::Marginal
        } else {
            Stability::Stable
        };
        self.stability
            .lock()
            .unwrap()
            .insert(n_harm, (verdict, max_re));
        (verdict, max_re)
    }

    fn require_stable(&self, n_harm: u32) -> Result<()> {
        let (verdict, max_re) = self.stability_entry(n_harm);
        match verdict {
            Stability::Stable => Ok(()),
            other => Err(Error::NotStable {
                verdict: other.name(),
                max_re,
            }),
        }
    }

    /// Assemble `𝕄(ω)` at truncation `n_harm`.
    fn system_matrix(&self, omega: f64, n_harm: u32) -> DMatrix<Complex64> {
        let n = n_harm as i64;
        let dim = DIM * (2 * n_harm as usize + 1);
        let mut m = DMatrix::zeros(dim, dim);
        for (row_idx, nrow) in (-n..=n).enumerate() {
            for (col_idx, ncol) in (-n..=n).enumerate() {
                let shift = ncol - nrow;
                if shift.abs() <= 2 {
                    let mut view =
                        m.view_mut((DIM * row_idx, DIM * col_idx), (DIM, DIM));
                    view.copy_from(self.block(shift as i32));
                    view.neg_mut();
                }
            }
            let freq = omega + nrow as f64 * self.params.omega_m;
            for i in 0..DIM {
                m[(DIM * row_idx + i, DIM * row_idx + i)] += im(-freq);
            }
        }
        m
    }
}

/// Transfer rows of both output quadratures over every input component of
/// every harmonic: entry `(quad, n_idx·K + comp)` maps `w_comp[ω + nΩ]`
/// onto the harmonic-0 output quadrature, with `n_idx = n + n_harm`.
fn transfer_rows(fm: &FloquetModel, omega: f64, n_harm: u32) -> Result<DMatrix<Complex64>> {
    let blocks = 2 * n_harm as usize + 1;
    let dim = DIM * blocks;
    let zero_block = n_harm as usize;
    let sqrt_rate = fm.params.kappa_out.sqrt();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    // Output rows act on the harmonic-0 state block:
    // U1 = √κ (d + d†)/√2, U2 = √κ (−i d + i d†)/√2.
    let mut out_t = DMatrix::zeros(dim, 2);
    out_t[(DIM * zero_block + D, 0)] = re(sqrt_rate * inv_sqrt2);
    out_t[(DIM * zero_block + DD, 0)] = re(sqrt_rate * inv_sqrt2);
    out_t[(DIM * zero_block + D, 1)] = im(-sqrt_rate * inv_sqrt2);
    out_t[(DIM * zero_block + DD, 1)] = im(sqrt_rate * inv_sqrt2);

    // Row-block of the inverse via the transposed system.
    let m_t = fm.system_matrix(omega, n_harm).transpose();
    let response_t = eigen::solve_complex(m_t, &out_t, omega)?;

    let k_tot = fm.n_components();
    let mut rows = DMatrix::zeros(2, k_tot * blocks);
    for block in 0..blocks {
        let state_rows = response_t
            .view((DIM * block, 0), (DIM, 2))
            .transpose();
        let mut offset = 0;
        for ch in &fm.channels {
            let t = &state_rows * &ch.coupling;
            rows.view_mut((0, k_tot * block + offset), (2, ch.width()))
                .copy_from(&t);
            offset += ch.width();
        }
    }

    // Feedthrough −w_in on the observed port, harmonic 0 only:
    // U1 gets −(w + w†)/√2, U2 gets (i w − i w†)/√2.
    let own = k_tot * zero_block;
    rows[(0, own)] += re(-inv_sqrt2);
    rows[(0, own + 1)] += re(-inv_sqrt2);
    rows[(1, own)] += im(inv_sqrt2);
    rows[(1, own + 1)] += im(-inv_sqrt2);
    Ok(rows)
}

/// Stationary output spectra at a fixed truncation order.
pub fn floquet_spectrum_at(
    fm: &FloquetModel,
    omega: f64,
    n_harm: u32,
) -> Result<SpectrumPoint> {
    fm.require_stable(n_harm)?;
    let t_pos = transfer_rows(fm, omega, n_harm)?;
    let t_neg = transfer_rows(fm, -omega, n_harm)?;
    let blocks = 2 * n_harm as usize + 1;
    let k_tot = fm.n_components();
    let mut s = [Complex64::default(); 3]; // S11, S22, S12
    for block in 0..blocks {
        // w[ω + nΩ] pairs with w[−ω − nΩ]: mirror the harmonic index.
        let mirror = blocks - 1 - block;
        let mut offset = 0;
        for ch in &fm.channels {
            let k = ch.width();
            let a = t_pos.view((0, k_tot * block + offset), (2, k));
            let b = t_neg.view((0, k_tot * mirror + offset), (2, k));
            let cross = a * &ch.corr * b.transpose();
            s[0] += cross[(0, 0)];
            s[1] += cross[(1, 1)];
            s[2] += cross[(0, 1)];
            offset += k;
        }
    }
    assemble_point(omega, s[0], s[1], s[2])
}

/// Convergence evidence for one escalation step of the harmonic ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Truncation order of the finer of the two solutions compared.
    pub n_harm: u32,
    /// Squeezed-quadrature spectrum at `n_harm − 1`.
    pub previous: f64,
    /// Squeezed-quadrature spectrum at `n_harm`.
    pub latest: f64,
    /// Largest relative change over both quadrature spectra.
    pub rel_change: f64,
    pub converged: bool,
}

fn rel_change(coarse: &SpectrumPoint, fine: &SpectrumPoint) -> f64 {
    let r1 = (fine.s_u1 - coarse.s_u1).abs() / fine.s_u1.abs().max(1e-12);
    let r2 = (fine.s_u2 - coarse.s_u2).abs() / fine.s_u2.abs().max(1e-12);
    r1.max(r2)
}

/// Compare truncation orders `n_harm` and `n_harm + 1` at one frequency.
pub fn check_convergence(
    fm: &FloquetModel,
    omega: f64,
    n_harm: u32,
) -> Result<ConvergenceReport> {
    let coarse = floquet_spectrum_at(fm, omega, n_harm)?;
    let fine = floquet_spectrum_at(fm, omega, n_harm + 1)?;
    let rel = rel_change(&coarse, &fine);
    Ok(ConvergenceReport {
        n_harm: n_harm + 1,
        previous: coarse.s_u1,
        latest: fine.s_u1,
        rel_change: rel,
        converged: rel <= CONVERGENCE_TOL,
    })
}

/// Stationary output spectra with automatic escalation of the truncation
/// order until successive orders agree to [`CONVERGENCE_TOL`].
pub fn floquet_spectrum(fm: &FloquetModel, omega: f64) -> Result<SpectrumPoint> {
    let mut coarse = floquet_spectrum_at(fm, omega, N_HARMONICS_DEFAULT)?;
    let mut n = N_HARMONICS_DEFAULT;
    while n < N_HARMONICS_MAX {
        let fine = floquet_spectrum_at(fm, omega, n + 1)?;
        let rel = rel_change(&coarse, &fine);
        if rel <= CONVERGENCE_TOL {
            return Ok(fine);
        }
        coarse = fine;
        n += 1;
    }
    let last = floquet_spectrum_at(fm, omega, N_HARMONICS_MAX - 1)?;
    Err(Error::NonConvergence {
        n_harm: N_HARMONICS_MAX,
        previous: last.s_u1,
        latest: coarse.s_u1,
        rel_change: rel_change(&last, &coarse),
        demanded: CONVERGENCE_TOL,
    })
}

/// Mean homodyne output `⟨I⟩` for the static signal `z` at a fixed
/// truncation order; [`floquet_mean_response`] escalates this.
pub fn floquet_mean_response_at(fm: &FloquetModel, z: f64, n_harm: u32) -> Result<f64> {
    let Some(harmonics) = &fm.drive_harmonics else {
        return Err(Error::invalid(
            "scheme",
            "mean response requires the measurement scheme",
        ));
    };
    fm.require_stable(n_harm)?;
    let blocks = 2 * n_harm as usize + 1;
    let zero_block = n_harm as usize;
    let dim = DIM * blocks;
    // Row n of the harmonic system carries drive component f_{−n}·z.
    let mut rhs = DMatrix::zeros(dim, 1);
    for (m, f) in [(1_i64, &harmonics[0]), (0, &harmonics[1]), (-1, &harmonics[2])] {
        let row_block = (zero_block as i64 + m) as usize;
        for i in 0..DIM {
            rhs[(DIM * row_block + i, 0)] = f[i] * z;
        }
    }
    let m = fm.system_matrix(0.0, n_harm);
    let v = eigen::solve_complex(m, &rhs, 0.0)?;
    let d0 = v[(DIM * zero_block + D, 0)];
    let dd0 = v[(DIM * zero_block + DD, 0)];
    let mean = (d0 + dd0) * re(fm.params.kappa_out * std::f64::consts::FRAC_1_SQRT_2);
    if mean.im.abs() > 1e-8 * mean.re.abs().max(1e-300) {
        return Err(Error::Numerical {
            context: "harmonic mean response",
            reason: format!("imaginary residue {:e}", mean.im),
        });
    }
    Ok(mean.re)
}

/// Mean homodyne output `⟨I⟩` per the static signal `z`, including every
/// drive tone's harmonic response; escalates like [`floquet_spectrum`].
pub fn floquet_mean_response(fm: &FloquetModel, z: f64) -> Result<f64> {
    let mut coarse = floquet_mean_response_at(fm, z, N_HARMONICS_DEFAULT)?;
    let mut n = N_HARMONICS_DEFAULT;
    while n < N_HARMONICS_MAX {
        let fine = floquet_mean_response_at(fm, z, n + 1)?;
        let rel = (fine - coarse).abs() / fine.abs().max(1e-12);
        if rel <= CONVERGENCE_TOL {
            return Ok(fine);
        }
        coarse = fine;
        n += 1;
    }
    let previous = floquet_mean_response_at(fm, z, N_HARMONICS_MAX - 1)?;
    Err(Error::NonConvergence {
        n_harm: N_HARMONICS_MAX,
        previous,
        latest: coarse,
        rel_change: (coarse - previous).abs() / coarse.abs().max(1e-12),
        demanded: CONVERGENCE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linres;
    use crate::model::{
        build_dissipative, build_measurement, impedance_match, DriveConfig, MeasurementSignal,
    };
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(omega_m: f64, kappa_out: f64, gamma_m: f64, n_th: f64) -> PhysParams {
        PhysParams {
            omega_m,
            kappa_out,
            kappa_int: 0.0,
            gamma_m,
            g0: 0.0,
            n_th,
            gamma_l: 0.0,
        }
    }

    fn matched(p: &PhysParams, c: f64) -> (f64, f64) {
        let g_minus = (c * p.kappa_tot() * p.gamma_m / 4.0).sqrt();
        (g_minus, impedance_match(p, g_minus).unwrap())
    }

    /// Quadrature↔ladder change of basis, blockwise.
    fn basis_change() -> DMatrix<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = [
            [re(s), re(s)],
            [im(-s), im(s)],
        ];
        let mut m = DMatrix::zeros(4, 4);
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    m[(2 * b + i, 2 * b + j)] = t[i][j];
                }
            }
        }
        m
    }

    #[test]
    fn rotating_wave_block_transforms_to_quadrature_drift() {
        let p = params(10.0, 1.0, 0.1, 3.0);
        let drives = DriveConfig::dissipative(0.4, 0.15);
        let fm = lift(&p, &drives).unwrap();
        let s = basis_change();
        let transformed = &s * fm.block(0) * s.clone().try_inverse().unwrap();
        let quad = build_dissipative(&p, &drives).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(
                    transformed[(i, j)].re,
                    quad.drift()[(i, j)].re,
                    epsilon = 1e-14
                );
                assert_abs_diff_eq!(transformed[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn ladder_correlators_transform_to_quadrature_correlators() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = DMatrix::from_row_slice(2, 2, &[re(s), re(s), im(-s), im(s)]);
        // Optical vacuum: ⟨w w†⟩ = 1.
        let mut n_opt = DMatrix::zeros(2, 2);
        n_opt[(0, 1)] = re(1.0);
        let q = &t * n_opt * t.transpose();
        assert_abs_diff_eq!((q[(0, 0)] - re(0.5)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((q[(0, 1)] - im(0.5)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((q[(1, 0)] - im(-0.5)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((q[(1, 1)] - re(0.5)).norm(), 0.0, epsilon = 1e-15);
        // Thermal bath at n = 3.
        let mut n_mech = DMatrix::zeros(2, 2);
        n_mech[(0, 1)] = re(4.0);
        n_mech[(1, 0)] = re(3.0);
        let q = &t * n_mech * t.transpose();
        assert_abs_diff_eq!((q[(0, 0)] - re(3.5)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((q[(0, 1)] - im(0.5)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn harmonic_blocks_respect_conjugation_symmetry() {
        // A_{−m} must equal C·conj(A_{+m})·C with C swapping d↔d†, b↔b†,
        // or the time-domain equations would not be self-conjugate.
        let p = params(10.0, 1.0, 0.1, 3.0);
        let drives = DriveConfig::measurement(0.4, 0.15, 0.2, 0.0);
        let fm = lift(&p, &drives).unwrap();
        let swap = [1_usize, 0, 3, 2];
        for m in 1..=2_i32 {
            let plus = fm.block(m);
            let minus = fm.block(-m);
            for i in 0..4 {
                for j in 0..4 {
                    let expected = plus[(swap[i], swap[j])].conj();
                    assert_abs_diff_eq!((minus[(i, j)] - expected).norm(), 0.0, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn stripped_ladder_reproduces_the_direct_solver_exactly() {
        let p = params(10.0, 1.0, 0.01, 5.0);
        let (gm, gp) = matched(&p, 100.0);
        let drives = DriveConfig::dissipative(gm, gp);
        let fm = lift(&p, &drives).unwrap().without_cr_blocks();
        let direct = build_dissipative(&p, &drives).unwrap();
        for omega in [-1.2, 0.0, 0.3] {
            let harmonic = floquet_spectrum_at(&fm, omega, 2).unwrap();
            let exact = linres::spectrum_point(&direct, omega).unwrap();
            assert_relative_eq!(harmonic.s_u1, exact.s_u1, max_relative = 1e-10);
            assert_relative_eq!(harmonic.s_u2, exact.s_u2, max_relative = 1e-10);
            assert_abs_diff_eq!(
                harmonic.s_u12,
                exact.s_u12,
                epsilon = 1e-10 * (exact.s_u1 + exact.s_u2)
            );
        }
    }

    #[test]
    fn deep_good_cavity_corrections_are_negligible() {
        // κ/Ω = 10⁻³: counter-rotating corrections at O(κ²/Ω²) sit far
        // below the comparison tolerance.
        let p = params(1.0, 1e-3, 1e-8, 10.0);
        let (gm, gp) = matched(&p, 10.0);
        let drives = DriveConfig::dissipative(gm, gp);
        let fm = lift(&p, &drives).unwrap();
        let direct = build_dissipative(&p, &drives).unwrap();
        let harmonic = floquet_spectrum(&fm, 0.0).unwrap();
        let exact = linres::spectrum_point(&direct, 0.0).unwrap();
        assert_relative_eq!(harmonic.s_u1, exact.s_u1, max_relative = 1e-4);
        // The rotating-wave value itself: 21(√10 − 3)² of shot noise.
        assert_relative_eq!(
            2.0 * exact.s_u1,
            21.0 * (10.0_f64.sqrt() - 3.0).powi(2),
            max_relative = 1e-9
        );
    }

    #[test]
    fn bad_cavity_squeezing_saturates_at_the_floor() {
        // Large cooperativity: rotating-wave theory predicts 21·e^{−2r},
        // orders of magnitude below the counter-rotating floor κ²/(32Ω²).
        let p = params(1.0, 0.05, 1e-8, 10.0);
        let (gm, gp) = matched(&p, 1e7);
        let fm = lift(&p, &DriveConfig::dissipative(gm, gp)).unwrap();
        let pt = floquet_spectrum(&fm, 0.0).unwrap();
        let floor = crate::oracle::bad_cavity_floor(p.kappa_out, p.omega_m);
        assert!(floor.in_regime);
        let ratio = 2.0 * pt.s_u1 / floor.value;
        assert!(
            (0.75..1.25).contains(&ratio),
            "floquet floor {} vs asymptote {} (ratio {ratio})",
            2.0 * pt.s_u1,
            floor.value
        );
        // And the rotating-wave prediction is indeed far below it.
        let rwa = 21.0 * (gm - gp) / (gm + gp);
        assert!(rwa < 0.05 * floor.value);
    }

    #[test]
    fn convergence_report_tracks_escalation() {
        let p = params(1.0, 0.05, 1e-8, 10.0);
        let (gm, gp) = matched(&p, 1e5);
        let fm = lift(&p, &DriveConfig::dissipative(gm, gp)).unwrap();
        let report = check_convergence(&fm, 0.0, N_HARMONICS_DEFAULT).unwrap();
        assert_eq!(report.n_harm, N_HARMONICS_DEFAULT + 1);
        assert!(report.converged, "rel change {}", report.rel_change);
        assert!(report.rel_change <= CONVERGENCE_TOL);
        assert!(report.previous > 0.0 && report.latest > 0.0);
    }

    #[test]
    fn stability_is_cached_per_truncation_order() {
        let p = params(10.0, 1.0, 0.1, 0.0);
        let fm = lift(&p, &DriveConfig::dissipative(0.4, 0.2)).unwrap();
        assert!(fm.max_floquet_exponent(3) < 0.0);
        assert_eq!(fm.stability.lock().unwrap().len(), 1);
        let _ = fm.max_floquet_exponent(3);
        assert_eq!(fm.stability.lock().unwrap().len(), 1);
        let _ = fm.max_floquet_exponent(4);
        assert_eq!(fm.stability.lock().unwrap().len(), 2);
    }

    #[test]
    fn bare_cavity_mean_response_is_exact() {
        // No tones at all: the harmonic ladder decouples and the slope is
        // the bare-cavity value −2√2·A0·z.
        let p = params(1.0, 0.05, 1e-6, 0.0);
        let drives = DriveConfig::measurement(0.0, 0.0, 0.0, 1.5);
        let fm = lift(&p, &drives).unwrap();
        let slope = floquet_mean_response(&fm, 2.0).unwrap();
        assert_relative_eq!(
            slope / p.kappa_out,
            -2.0 * std::f64::consts::SQRT_2 * 1.5 * 2.0 / p.kappa_out,
            max_relative = 1e-10
        );
        // Cross-check against the direct solver.
        let (model, drive) =
            build_measurement(&p, &drives, &MeasurementSignal { z: 2.0 }).unwrap();
        let direct = linres::mean_response(&model, &drive).unwrap();
        assert_relative_eq!(slope, direct, max_relative = 1e-10);
    }

    #[test]
    fn good_cavity_mean_response_matches_the_direct_solver() {
        let p = params(1.0, 1e-3, 2e-8, 10.0);
        let (gm, gp) = matched(&p, 100.0);
        // Weak probe so the ±1 blocks act perturbatively.
        let g0 = 1e-6;
        let drives = DriveConfig::measurement(gm, gp, g0, 1.0);
        let fm = lift(&p, &drives).unwrap();
        let slope = floquet_mean_response(&fm, 1.0).unwrap();
        let (model, drive) =
            build_measurement(&p, &drives, &MeasurementSignal { z: 1.0 }).unwrap();
        let direct = linres::mean_response(&model, &drive).unwrap();
        assert_relative_eq!(slope, direct, max_relative = 1e-3);
    }

    #[test]
    fn unsupported_schemes_are_refused() {
        let p = params(10.0, 1.0, 0.1, 0.0);
        let err = lift(&p, &DriveConfig::ponderomotive(0.3));
        assert!(matches!(err, Err(Error::SchemeMismatch { .. })));
        let lossy_params = PhysParams {
            kappa_int: 0.5,
            ..p
        };
        assert!(lift(&lossy_params, &DriveConfig::dissipative(0.1, 0.0)).is_err());
        assert!(lift(&lossy_params, &DriveConfig::lossy(0.1, 0.0)).is_ok());
        // Mean response needs the measurement lift.
        let fm = lift(&p, &DriveConfig::dissipative(0.1, 0.0)).unwrap();
        assert!(floquet_mean_response(&fm, 1.0).is_err());
    }
}
