//! Scenario configuration: a flat `key = value` grammar, also accepted as
//! a flat JSON object with the same keys.
//!
//! Keys mirror the library's parameter field names (`omega_m`,
//! `kappa_out`, `g_minus`, …) plus grid, solver, output, and sweep
//! controls. `#` starts a comment; blank lines are ignored. Values are
//! numbers, except `scheme`, `grid_scale`, `solver`, `outputs`,
//! `sweep_var`/`sweep2_var`, `sweep_scale`/`sweep2_scale`, and `unit`,
//! which take words.

use std::path::Path;

use serde_json::Value;
use twotone_core::model::{DriveConfig, PhysParams, Scheme};

use crate::error::{CliError, Result};

/// Axis spacing for frequency grids and parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn from_key(key: &str, word: &str) -> Result<Scale> {
        match word {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(CliError::validation(format!(
                "config key `{key}`: expected `linear` or `log`, got `{other}`"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }

    /// `points` values spanning `[min, max]` with this spacing.
    pub fn values(&self, min: f64, max: f64, points: u32) -> Vec<f64> {
        let n = points as usize;
        if n == 1 {
            return vec![min];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self {
                    Scale::Linear => min + t * (max - min),
                    Scale::Log => min * (max / min).powf(t),
                }
            })
            .collect()
    }
}

/// Frequency window the spectrum is evaluated on.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: u32,
    pub scale: Scale,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        self.scale.values(self.min, self.max, self.points)
    }
}

/// Solver backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    /// Direct solution of the rotating-wave model.
    Rwa,
    /// Harmonic expansion including counter-rotating dynamics.
    Floquet,
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Rwa => "rwa",
            SolverChoice::Floquet => "floquet",
        }
    }

    pub fn from_name(word: &str) -> Result<SolverChoice> {
        match word {
            "rwa" => Ok(SolverChoice::Rwa),
            "floquet" => Ok(SolverChoice::Floquet),
            other => Err(CliError::validation(format!(
                "solver: expected `rwa` or `floquet`, got `{other}`"
            ))),
        }
    }
}

/// Drive amplitudes, either explicit or derived from a cooperativity via
/// the impedance-matching condition.
#[derive(Debug, Clone, Copy)]
pub struct DriveSpec {
    /// When set, `g_minus`/`g_plus` are computed so the induced mechanical
    /// damping equals the total cavity decay at dc.
    pub auto_match_c: Option<f64>,
    pub g_minus: f64,
    pub g_plus: f64,
    pub g_zero: f64,
    pub a_zero: f64,
}

impl DriveSpec {
    /// Resolve to concrete drive amplitudes for `scheme` under `params`.
    pub fn resolve(&self, scheme: Scheme, params: &PhysParams) -> Result<DriveConfig> {
        let (g_minus, g_plus) = match self.auto_match_c {
            Some(c) => {
                if scheme == Scheme::Ponderomotive {
                    return Err(CliError::validation(
                        "auto_match_c applies to the two-tone schemes, not ponderomotive",
                    ));
                }
                if c.is_nan() || c < 1.0 {
                    return Err(CliError::validation(format!(
                        "auto_match_c = {c} is below 1; no matched drive pair exists"
                    )));
                }
                // Matched pair at cooperativity c: collective coupling
                // sqrt(kappa gamma_m)/4, tones scaled by sqrt(c) and
                // sqrt(c-1). The tones become nearly equal at large c, so
                // the dc damping check multiplies their difference and sum
                // in forms that do not cancel.
                let g_coll = (params.kappa_tot() * params.gamma_m).sqrt() / 2.0;
                let g_minus = g_coll * c.sqrt();
                let g_plus = g_coll * (c - 1.0).sqrt();
                let diff = g_coll / (c.sqrt() + (c - 1.0).sqrt());
                let ratio =
                    4.0 * diff * (g_minus + g_plus) / (params.kappa_tot() * params.gamma_m);
                if (ratio - 1.0).abs() > 1e-12 {
                    return Err(CliError::solver(format!(
                        "auto-match failed: induced damping over cavity decay is {ratio} at dc"
                    )));
                }
                (g_minus, g_plus)
            }
            None => (self.g_minus, self.g_plus),
        };
        let drives = DriveConfig {
            g_minus,
            g_plus,
            g_zero: self.g_zero,
            a_zero: self.a_zero,
            scheme,
        };
        drives.validate()?;
        Ok(drives)
    }
}

/// One CSV output column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Omega,
    SU1,
    SU2,
    SU12,
    SOpt,
    PhiOpt,
    NEff,
    Solver,
    Converged,
}

impl Column {
    pub const ALL: [Column; 9] = [
        Column::Omega,
        Column::SU1,
        Column::SU2,
        Column::SU12,
        Column::SOpt,
        Column::PhiOpt,
        Column::NEff,
        Column::Solver,
        Column::Converged,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Column::Omega => "omega",
            Column::SU1 => "s_u1",
            Column::SU2 => "s_u2",
            Column::SU12 => "s_u12",
            Column::SOpt => "s_opt",
            Column::PhiOpt => "phi_opt",
            Column::NEff => "n_eff",
            Column::Solver => "solver",
            Column::Converged => "converged",
        }
    }

    fn from_key(word: &str) -> Result<Column> {
        Column::ALL
            .iter()
            .copied()
            .find(|c| c.key() == word)
            .ok_or_else(|| {
                CliError::validation(format!("config key `outputs`: unknown column `{word}`"))
            })
    }
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    GMinus,
    GPlus,
    GZero,
    AZero,
    NTh,
    GammaM,
    GammaL,
    G0,
    KappaOut,
    KappaInt,
    OmegaM,
    AutoMatchC,
    Z,
}

impl SweepVar {
    const ALL: [SweepVar; 13] = [
        SweepVar::GMinus,
        SweepVar::GPlus,
        SweepVar::GZero,
        SweepVar::AZero,
        SweepVar::NTh,
        SweepVar::GammaM,
        SweepVar::GammaL,
        SweepVar::G0,
        SweepVar::KappaOut,
        SweepVar::KappaInt,
        SweepVar::OmegaM,
        SweepVar::AutoMatchC,
        SweepVar::Z,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            SweepVar::GMinus => "g_minus",
            SweepVar::GPlus => "g_plus",
            SweepVar::GZero => "g_zero",
            SweepVar::AZero => "a_zero",
            SweepVar::NTh => "n_th",
            SweepVar::GammaM => "gamma_m",
            SweepVar::GammaL => "gamma_l",
            SweepVar::G0 => "g0",
            SweepVar::KappaOut => "kappa_out",
            SweepVar::KappaInt => "kappa_int",
            SweepVar::OmegaM => "omega_m",
            SweepVar::AutoMatchC => "auto_match_c",
            SweepVar::Z => "z",
        }
    }

    fn from_key(key: &str, word: &str) -> Result<SweepVar> {
        SweepVar::ALL
            .iter()
            .copied()
            .find(|v| v.key() == word)
            .ok_or_else(|| {
                CliError::validation(format!(
                    "config key `{key}`: `{word}` is not a sweepable parameter"
                ))
            })
    }

    /// Write `value` into the per-point working copy.
    pub fn apply(&self, value: f64, params: &mut PhysParams, drives: &mut DriveSpec, z: &mut f64) {
        match self {
            SweepVar::GMinus => drives.g_minus = value,
            SweepVar::GPlus => drives.g_plus = value,
            SweepVar::GZero => drives.g_zero = value,
            SweepVar::AZero => drives.a_zero = value,
            SweepVar::NTh => params.n_th = value,
            SweepVar::GammaM => params.gamma_m = value,
            SweepVar::GammaL => params.gamma_l = value,
            SweepVar::G0 => params.g0 = value,
            SweepVar::KappaOut => params.kappa_out = value,
            SweepVar::KappaInt => params.kappa_int = value,
            SweepVar::OmegaM => params.omega_m = value,
            SweepVar::AutoMatchC => drives.auto_match_c = Some(value),
            SweepVar::Z => *z = value,
        }
    }
}

/// One sweep axis.
#[derive(Debug, Clone, Copy)]
pub struct SweepAxis {
    pub var: SweepVar,
    pub min: f64,
    pub max: f64,
    pub points: u32,
    pub scale: Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        self.scale.values(self.min, self.max, self.points)
    }
}

/// A fully validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub scheme: Scheme,
    pub params: PhysParams,
    pub drives: DriveSpec,
    pub z: f64,
    pub grid: Grid,
    pub solver: SolverChoice,
    /// Starting truncation order for the harmonic solver.
    pub harmonics: Option<u32>,
    pub outputs: Vec<Column>,
    /// Zero, one, or two sweep axes; with sweeps, spectra are evaluated at
    /// [`Self::omega_eval`] instead of over the grid.
    pub sweeps: Vec<SweepAxis>,
    pub omega_eval: f64,
    /// Declarative note naming the rate unit the numbers are expressed in.
    pub unit: Option<String>,
}

/// All raw keys of the grammar, prior to cross-validation.
#[derive(Debug, Default)]
struct RawConfig {
    scheme: Option<String>,
    omega_m: Option<f64>,
    kappa_out: Option<f64>,
    kappa_int: Option<f64>,
    gamma_m: Option<f64>,
    g0: Option<f64>,
    n_th: Option<f64>,
    gamma_l: Option<f64>,
    g_minus: Option<f64>,
    g_plus: Option<f64>,
    g_zero: Option<f64>,
    a_zero: Option<f64>,
    z: Option<f64>,
    auto_match_c: Option<f64>,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    points: Option<u32>,
    grid_scale: Option<String>,
    solver: Option<String>,
    harmonics: Option<u32>,
    outputs: Option<String>,
    omega_eval: Option<f64>,
    sweep_var: Option<String>,
    sweep_min: Option<f64>,
    sweep_max: Option<f64>,
    sweep_points: Option<u32>,
    sweep_scale: Option<String>,
    sweep2_var: Option<String>,
    sweep2_min: Option<f64>,
    sweep2_max: Option<f64>,
    sweep2_points: Option<u32>,
    sweep2_scale: Option<String>,
    unit: Option<String>,
}

fn number(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| CliError::validation(format!("config key `{key}`: expected a number")))
}

fn count(key: &str, v: &Value) -> Result<u32> {
    v.as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| {
            CliError::validation(format!("config key `{key}`: expected a whole number"))
        })
}

fn word(key: &str, v: &Value) -> Result<String> {
    v.as_str().map(str::to_owned).ok_or_else(|| {
        CliError::validation(format!("config key `{key}`: expected a word, not a number"))
    })
}

impl RawConfig {
    fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        match key {
            "scheme" => self.scheme = Some(word(key, v)?),
            "omega_m" => self.omega_m = Some(number(key, v)?),
            "kappa_out" => self.kappa_out = Some(number(key, v)?),
            "kappa_int" => self.kappa_int = Some(number(key, v)?),
            "gamma_m" => self.gamma_m = Some(number(key, v)?),
            "g0" => self.g0 = Some(number(key, v)?),
            "n_th" => self.n_th = Some(number(key, v)?),
            "gamma_l" => self.gamma_l = Some(number(key, v)?),
            "g_minus" => self.g_minus = Some(number(key, v)?),
            "g_plus" => self.g_plus = Some(number(key, v)?),
            "g_zero" => self.g_zero = Some(number(key, v)?),
            "a_zero" => self.a_zero = Some(number(key, v)?),
            "z" => self.z = Some(number(key, v)?),
            "auto_match_c" => self.auto_match_c = Some(number(key, v)?),
            "omega_min" => self.omega_min = Some(number(key, v)?),
            "omega_max" => self.omega_max = Some(number(key, v)?),
            "points" => self.points = Some(count(key, v)?),
            "grid_scale" => self.grid_scale = Some(word(key, v)?),
            "solver" => self.solver = Some(word(key, v)?),
            "harmonics" => self.harmonics = Some(count(key, v)?),
            "outputs" => self.outputs = Some(word(key, v)?),
            "omega_eval" => self.omega_eval = Some(number(key, v)?),
            "sweep_var" => self.sweep_var = Some(word(key, v)?),
            "sweep_min" => self.sweep_min = Some(number(key, v)?),
            "sweep_max" => self.sweep_max = Some(number(key, v)?),
            "sweep_points" => self.sweep_points = Some(count(key, v)?),
            "sweep_scale" => self.sweep_scale = Some(word(key, v)?),
            "sweep2_var" => self.sweep2_var = Some(word(key, v)?),
            "sweep2_min" => self.sweep2_min = Some(number(key, v)?),
            "sweep2_max" => self.sweep2_max = Some(number(key, v)?),
            "sweep2_points" => self.sweep2_points = Some(count(key, v)?),
            "sweep2_scale" => self.sweep2_scale = Some(word(key, v)?),
            "unit" => self.unit = Some(word(key, v)?),
            other => {
                return Err(CliError::validation(format!(
                    "unknown config key `{other}`"
                )))
            }
        }
        Ok(())
    }
}

/// Parse one `key = value` text value into a JSON-ish scalar.
fn scalar(text: &str) -> Value {
    if let Ok(i) = text.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(x) = text.parse::<f64>() {
        return Value::from(x);
    }
    Value::from(text)
}

fn parse_kv(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::validation(format!(
                "config line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(CliError::validation(format!(
                "config key `{key}`: empty value"
            )));
        }
        raw.set(key, &scalar(value))?;
    }
    Ok(raw)
}

fn parse_json(text: &str) -> Result<RawConfig> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::validation(format!("config is not valid JSON: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::validation(
            "JSON config must be a flat object of key/value pairs",
        ));
    };
    let mut raw = RawConfig::default();
    for (key, v) in &map {
        raw.set(key, v)?;
    }
    Ok(raw)
}

/// Parse config text, auto-detecting the JSON form.
pub fn parse(text: &str) -> Result<Scenario> {
    let raw = if text.trim_start().starts_with('{') {
        parse_json(text)?
    } else {
        parse_kv(text)?
    };
    Scenario::from_raw(raw)
}

/// Load and validate a scenario from a config file.
pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read config `{}`: {e}", path.display()))
    })?;
    parse(&text)
}

fn require<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| CliError::validation(format!("missing required config key `{key}`")))
}

fn scheme_from_name(name: &str) -> Result<Scheme> {
    let all = [
        Scheme::Dissipative,
        Scheme::Ponderomotive,
        Scheme::Measurement,
        Scheme::DissipativeLossy,
        Scheme::DissipativePhaseNoise,
    ];
    all.iter()
        .copied()
        .find(|s| s.name() == name)
        .ok_or_else(|| {
            CliError::validation(format!(
                "config key `scheme`: unknown scheme `{name}` (expected one of {})",
                all.map(|s| s.name()).join(", ")
            ))
        })
}

impl Scenario {
    fn from_raw(mut raw: RawConfig) -> Result<Scenario> {
        let scheme = scheme_from_name(&require(raw.scheme.take(), "scheme")?)?;
        let params = PhysParams {
            omega_m: require(raw.omega_m, "omega_m")?,
            kappa_out: require(raw.kappa_out, "kappa_out")?,
            kappa_int: raw.kappa_int.unwrap_or(0.0),
            gamma_m: require(raw.gamma_m, "gamma_m")?,
            g0: raw.g0.unwrap_or(0.0),
            n_th: raw.n_th.unwrap_or(0.0),
            gamma_l: raw.gamma_l.unwrap_or(0.0),
        };
        params.validate()?;

        let sweeps = Self::sweeps_from_raw(&raw)?;
        let sweeping_match = sweeps.iter().any(|a| a.var == SweepVar::AutoMatchC);
        if (raw.auto_match_c.is_some() || sweeping_match)
            && (raw.g_minus.is_some() || raw.g_plus.is_some())
        {
            return Err(CliError::validation(
                "auto_match_c computes g_minus and g_plus; remove the explicit values",
            ));
        }
        let drives = DriveSpec {
            auto_match_c: raw.auto_match_c,
            g_minus: raw.g_minus.unwrap_or(0.0),
            g_plus: raw.g_plus.unwrap_or(0.0),
            g_zero: raw.g_zero.unwrap_or(0.0),
            a_zero: raw.a_zero.unwrap_or(0.0),
        };
        let z = raw.z.unwrap_or(0.0);
        if z != 0.0 && scheme != Scheme::Measurement {
            return Err(CliError::validation(
                "config key `z`: the static signal applies to the measurement scheme",
            ));
        }

        let grid = Grid {
            min: require(raw.omega_min, "omega_min")?,
            max: require(raw.omega_max, "omega_max")?,
            points: require(raw.points, "points")?,
            scale: match raw.grid_scale {
                Some(w) => Scale::from_key("grid_scale", &w)?,
                None => Scale::Linear,
            },
        };
        validate_axis("omega_min/omega_max/points", grid.min, grid.max, grid.points, grid.scale)?;

        let solver = match raw.solver.as_deref() {
            None => SolverChoice::Rwa,
            Some(word) => SolverChoice::from_name(word).map_err(|_| {
                CliError::validation(format!(
                    "config key `solver`: expected `rwa` or `floquet`, got `{word}`"
                ))
            })?,
        };
        let harmonics = raw.harmonics;
        validate_solver(solver, harmonics)?;

        let outputs = match raw.outputs {
            None => Column::ALL.to_vec(),
            Some(list) => {
                let cols: Result<Vec<Column>> =
                    list.split(',').map(|w| Column::from_key(w.trim())).collect();
                let cols = cols?;
                if cols.is_empty() {
                    return Err(CliError::validation("config key `outputs`: empty list"));
                }
                for (i, c) in cols.iter().enumerate() {
                    if cols[..i].contains(c) {
                        return Err(CliError::validation(format!(
                            "config key `outputs`: duplicate column `{}`",
                            c.key()
                        )));
                    }
                }
                cols
            }
        };

        Ok(Scenario {
            scheme,
            params,
            drives,
            z,
            grid,
            solver,
            harmonics,
            outputs,
            sweeps,
            omega_eval: raw.omega_eval.unwrap_or(0.0),
            unit: raw.unit,
        })
    }

    fn sweeps_from_raw(raw: &RawConfig) -> Result<Vec<SweepAxis>> {
        let mut sweeps = Vec::new();
        if let Some(var) = &raw.sweep_var {
            sweeps.push(axis_from_raw(
                "sweep",
                var,
                raw.sweep_min,
                raw.sweep_max,
                raw.sweep_points,
                raw.sweep_scale.as_deref(),
            )?);
        } else if raw.sweep_min.is_some() || raw.sweep_max.is_some() || raw.sweep_points.is_some()
        {
            return Err(CliError::validation(
                "sweep_min/sweep_max/sweep_points require `sweep_var`",
            ));
        }
        if let Some(var) = &raw.sweep2_var {
            if sweeps.is_empty() {
                return Err(CliError::validation("sweep2_var requires `sweep_var`"));
            }
            sweeps.push(axis_from_raw(
                "sweep2",
                var,
                raw.sweep2_min,
                raw.sweep2_max,
                raw.sweep2_points,
                raw.sweep2_scale.as_deref(),
            )?);
            if sweeps[0].var == sweeps[1].var {
                return Err(CliError::validation(format!(
                    "both sweep axes vary `{}`",
                    sweeps[0].var.key()
                )));
            }
        } else if raw.sweep2_min.is_some()
            || raw.sweep2_max.is_some()
            || raw.sweep2_points.is_some()
        {
            return Err(CliError::validation(
                "sweep2_min/sweep2_max/sweep2_points require `sweep2_var`",
            ));
        }
        Ok(sweeps)
    }
}

fn axis_from_raw(
    prefix: &str,
    var: &str,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<u32>,
    scale: Option<&str>,
) -> Result<SweepAxis> {
    let axis = SweepAxis {
        var: SweepVar::from_key(&format!("{prefix}_var"), var)?,
        min: require(min, &format!("{prefix}_min"))?,
        max: require(max, &format!("{prefix}_max"))?,
        points: require(points, &format!("{prefix}_points"))?,
        scale: match scale {
            Some(w) => Scale::from_key(&format!("{prefix}_scale"), w)?,
            None => Scale::Linear,
        },
    };
    validate_axis(prefix, axis.min, axis.max, axis.points, axis.scale)?;
    Ok(axis)
}

fn validate_axis(what: &str, min: f64, max: f64, points: u32, scale: Scale) -> Result<()> {
    if !min.is_finite() || !max.is_finite() {
        return Err(CliError::validation(format!("{what}: bounds must be finite")));
    }
    if max <= min {
        return Err(CliError::validation(format!(
            "{what}: max must exceed min (got [{min}, {max}])"
        )));
    }
    if points < 2 {
        return Err(CliError::validation(format!(
            "{what}: at least 2 points required"
        )));
    }
    if scale == Scale::Log && min <= 0.0 {
        return Err(CliError::validation(format!(
            "{what}: log spacing requires positive bounds"
        )));
    }
    Ok(())
}

/// Shared by config loading and the `--harmonics` CLI override.
pub fn validate_solver(solver: SolverChoice, harmonics: Option<u32>) -> Result<()> {
    match harmonics {
        None => Ok(()),
        Some(_) if solver == SolverChoice::Rwa => Err(CliError::validation(
            "`harmonics` applies to the floquet solver; set `solver = floquet`",
        )),
        Some(n) if !(1..=twotone_core::floquet::N_HARMONICS_MAX).contains(&n) => {
            Err(CliError::validation(format!(
                "`harmonics` must be between 1 and {}",
                twotone_core::floquet::N_HARMONICS_MAX
            )))
        }
        Some(_) => Ok(()),
    }
}
