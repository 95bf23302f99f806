//! Scalar searches over spectral observables: golden-section refinement of
//! band minima and bisection for cooperativity thresholds.

use twotone_core::linres;
use twotone_core::model::{build_dissipative, build_ponderomotive, DriveConfig, PhysParams, Scheme};

use crate::config::DriveSpec;
use crate::error::{CliError, Result};

/// Inverse golden ratio, the interval shrink factor per iteration.
const INVPHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_ITERS: u32 = 300;
const MAX_BISECT_ITERS: u32 = 200;
/// Termination criterion for threshold searches: |metric − target|.
pub const METRIC_TOL: f64 = 1e-6;
/// Pre-scan resolution and refinement tolerance for sideband minima.
const SIDEBAND_SCAN_POINTS: u32 = 201;
const SIDEBAND_REL_TOL: f64 = 1e-8;

/// Minimum of a unimodal `f` on `[a, b]` by golden-section search, to
/// relative tolerance `rel_tol` in the abscissa. Returns `(x_min, f_min)`.
pub fn golden_minimum<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let tol = (rel_tol * a.abs().max(b.abs())).max(f64::MIN_POSITIVE);
    let mut h = b - a;
    if h <= tol {
        let x = 0.5 * (a + b);
        return Ok((x, f(x)?));
    }
    let mut c = b - INVPHI * h;
    let mut d = a + INVPHI * h;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..MAX_GOLDEN_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            h = b - a;
            c = b - INVPHI * h;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            h = b - a;
            d = a + INVPHI * h;
            fd = f(d)?;
        }
        if h <= tol {
            return Ok(if fc < fd { (c, fc) } else { (d, fd) });
        }
    }
    Err(CliError::solver(format!(
        "golden-section search did not reach tolerance {tol:e} within {MAX_GOLDEN_ITERS} iterations"
    )))
}

/// Minimum of `f` over `[lo, hi]`: a linear pre-scan with `scan_points`
/// samples locates the global basin, then golden-section refines between
/// the gridded minimum's neighbors.
pub fn band_minimum<F>(f: F, lo: f64, hi: f64, scan_points: u32, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    if scan_points < 3 {
        return Err(CliError::validation(
            "band minimum needs at least 3 scan points",
        ));
    }
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        return Err(CliError::validation(format!(
            "band minimum needs an increasing interval, got [{lo}, {hi}]"
        )));
    }
    let n = scan_points as usize;
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    let mut xs = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + step * i as f64;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(CliError::solver(format!(
                "band minimum scan produced a non-finite value at {x}"
            )));
        }
        if v < best.1 {
            best = (i, v);
        }
        xs.push(x);
    }
    let a = xs[best.0.saturating_sub(1)];
    let b = xs[(best.0 + 1).min(n - 1)];
    let (x, v) = golden_minimum(&f, a, b, rel_tol)?;
    Ok(if v < best.1 { (x, v) } else { (xs[best.0], best.1) })
}

/// Result of a threshold search: the crossing cooperativity and the metric
/// value achieved there.
#[derive(Debug, Clone, Copy)]
pub struct Threshold {
    pub c: f64,
    pub metric: f64,
}

/// Cooperativity at which a noise ratio `metric`, decreasing in `c`, first
/// reaches `target`, found by bisection in log-cooperativity. The bracket
/// endpoints must straddle the target and the decrease is spot-checked at
/// the geometric midpoint before bisecting.
pub fn threshold_cooperativity<F>(metric: F, target: f64, c_lo: f64, c_hi: f64) -> Result<Threshold>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(target > 0.0 && target < 1.0) {
        return Err(CliError::validation(format!(
            "threshold target must be a noise ratio in (0, 1), got {target}"
        )));
    }
    if !(c_lo > 0.0 && c_hi > c_lo) {
        return Err(CliError::validation(format!(
            "threshold bracket must satisfy 0 < c_lo < c_hi, got [{c_lo}, {c_hi}]"
        )));
    }
    let m_lo = metric(c_lo)?;
    let m_hi = metric(c_hi)?;
    if !(m_lo > target && target > m_hi) {
        return Err(CliError::validation(format!(
            "threshold bracket failure: metric is {m_lo} at c = {c_lo} and {m_hi} at c = {c_hi}, \
             which does not straddle the target {target}"
        )));
    }
    let mid = (c_lo * c_hi).sqrt();
    let m_mid = metric(mid)?;
    if !(m_mid < m_lo && m_mid > m_hi) {
        return Err(CliError::validation(format!(
            "threshold bracket failure: metric is not decreasing across the bracket \
             (metric at c = {mid} is {m_mid}, outside ({m_hi}, {m_lo}))"
        )));
    }
    let (mut lo, mut hi) = (c_lo, c_hi);
    let mut last = (mid, m_mid);
    for _ in 0..MAX_BISECT_ITERS {
        let c = (lo * hi).sqrt();
        let m = metric(c)?;
        last = (c, m);
        if (m - target).abs() < METRIC_TOL {
            return Ok(Threshold { c, metric: m });
        }
        if m > target {
            lo = c;
        } else {
            hi = c;
        }
    }
    Err(CliError::solver(format!(
        "threshold search did not reach |metric - target| < {METRIC_TOL:e} within \
         {MAX_BISECT_ITERS} bisections; last c = {}, metric = {}",
        last.0, last.1
    )))
}

/// Output noise ratio (relative to shot noise) at dc for the two-tone
/// scheme with impedance-matched drives at cooperativity `c`.
pub fn matched_ratio_at_dc(params: &PhysParams, c: f64) -> Result<f64> {
    let spec = DriveSpec {
        auto_match_c: Some(c),
        g_minus: 0.0,
        g_plus: 0.0,
        g_zero: 0.0,
        a_zero: 0.0,
    };
    let drives = spec.resolve(Scheme::Dissipative, params)?;
    let model = build_dissipative(params, &drives)?;
    Ok(2.0 * linres::spectrum_point(&model, 0.0)?.s_u1)
}

/// Best output noise ratio near the mechanical sideband for the
/// single-tone radiation-pressure scheme at cooperativity `c`, minimizing
/// the optimal quadrature over a window of ±20 mechanical linewidths.
pub fn ponderomotive_sideband_ratio(params: &PhysParams, c: f64) -> Result<f64> {
    let g = (c * params.kappa_tot() * params.gamma_m / 4.0).sqrt();
    let drives = DriveConfig::ponderomotive(g);
    let model = build_ponderomotive(params, &drives)?;
    let lo = params.omega_m - 20.0 * params.gamma_m;
    let hi = params.omega_m + 20.0 * params.gamma_m;
    let (_, s) = band_minimum(
        |w| Ok(2.0 * linres::spectrum_point(&model, w)?.s_opt),
        lo,
        hi,
        SIDEBAND_SCAN_POINTS,
        SIDEBAND_REL_TOL,
    )?;
    Ok(s)
}

/// Output noise ratio of the optimal quadrature at dc (the mean optical
/// frequency) for the single-tone radiation-pressure scheme at
/// cooperativity `c`.
pub fn ponderomotive_resonance_ratio(params: &PhysParams, c: f64) -> Result<f64> {
    let g = (c * params.kappa_tot() * params.gamma_m / 4.0).sqrt();
    let drives = DriveConfig::ponderomotive(g);
    let model = build_ponderomotive(params, &drives)?;
    Ok(2.0 * linres::spectrum_point(&model, 0.0)?.s_opt)
}

/// Threshold cooperativity for the two-tone scheme: smallest matched `c`
/// whose dc output noise reaches `target_ratio` times shot noise.
pub fn dissipative_threshold(
    params: &PhysParams,
    target_ratio: f64,
    c_max: f64,
) -> Result<Threshold> {
    threshold_cooperativity(|c| matched_ratio_at_dc(params, c), target_ratio, 1.0, c_max)
}

/// Threshold cooperativity for the single-tone radiation-pressure scheme:
/// smallest `c` whose sideband-window noise minimum reaches `target_ratio`
/// times shot noise.
pub fn ponderomotive_threshold(
    params: &PhysParams,
    target_ratio: f64,
    c_max: f64,
) -> Result<Threshold> {
    threshold_cooperativity(
        |c| ponderomotive_sideband_ratio(params, c),
        target_ratio,
        1.0,
        c_max,
    )
}
