//! Named preset datasets: curated parameter points of the two-tone and
//! single-tone squeezing schemes, rendered to CSV files for plotting.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use twotone_core::floquet::{self, FloquetModel, N_HARMONICS_DEFAULT, N_HARMONICS_MAX};
use twotone_core::model::{
    build_dissipative, build_ponderomotive, DriveConfig, PhysParams, Scheme,
};
use twotone_core::{linres, oracle, Error as CoreError};

use crate::config::{Column, DriveSpec, Grid, Scale, Scenario, SolverChoice};
use crate::csvout::{self, fmt_float, Field, Table};
use crate::error::{CliError, Result};
use crate::optimize;
use crate::run;

/// One of the named preset datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigTarget {
    /// Output noise of both schemes near zero frequency.
    TwoA,
    /// Output noise of both schemes near the mechanical sideband.
    TwoB,
    /// Broadband view of the same two models.
    TwoC,
    /// Best noise versus cooperativity for each scheme and solver.
    Three,
    /// Measurement-rate enhancement over drive and probe cooperativities.
    Four,
    /// Twin spectral minima in the strong-coupling regime.
    Five,
}

impl FigTarget {
    pub const ALL: [FigTarget; 6] = [
        FigTarget::TwoA,
        FigTarget::TwoB,
        FigTarget::TwoC,
        FigTarget::Three,
        FigTarget::Four,
        FigTarget::Five,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigTarget::TwoA => "2a",
            FigTarget::TwoB => "2b",
            FigTarget::TwoC => "2c",
            FigTarget::Three => "3",
            FigTarget::Four => "4",
            FigTarget::Five => "5",
        }
    }

    pub fn from_name(word: &str) -> Result<FigTarget> {
        FigTarget::ALL
            .into_iter()
            .find(|t| t.name() == word)
            .ok_or_else(|| {
                CliError::validation(format!(
                    "unknown preset `{word}`; expected one of 2a, 2b, 2c, 3, 4, 5"
                ))
            })
    }
}

/// Render the preset `target` into `out_dir`, returning the files written.
/// `harmonics` overrides the starting truncation order of the harmonic
/// solver where a preset uses it.
pub fn emit(target: FigTarget, out_dir: &Path, harmonics: Option<u32>) -> Result<Vec<PathBuf>> {
    match target {
        FigTarget::TwoA => fig2(out_dir, "fig2a", -4e-4, 4e-4),
        FigTarget::TwoB => fig2(out_dir, "fig2b", 10.0 - 4e-4, 10.0 + 4e-4),
        FigTarget::TwoC => fig2(out_dir, "fig2c", -2.0, 2.0),
        FigTarget::Three => fig3(out_dir, harmonics),
        FigTarget::Four => fig4(out_dir, harmonics),
        FigTarget::Five => fig5(out_dir),
    }
}

/// Sideband-resolved reference cavity shared by the comparison presets:
/// rates in units of the output coupling, hot mechanical bath.
fn sideband_params() -> PhysParams {
    PhysParams {
        omega_m: 10.0,
        kappa_out: 1.0,
        kappa_int: 0.0,
        gamma_m: 2e-5,
        g0: 0.0,
        n_th: 10.0,
        gamma_l: 0.0,
    }
}

/// Drive cooperativity of the head-to-head comparison presets.
const COMPARISON_C: f64 = 1e5;

fn no_drives() -> DriveSpec {
    DriveSpec {
        auto_match_c: None,
        g_minus: 0.0,
        g_plus: 0.0,
        g_zero: 0.0,
        a_zero: 0.0,
    }
}

fn matched_drives(params: &PhysParams, c: f64) -> Result<DriveConfig> {
    DriveSpec {
        auto_match_c: Some(c),
        ..no_drives()
    }
    .resolve(Scheme::Dissipative, params)
}

/// Single-tone coupling at cooperativity `c`.
fn coupling_for(params: &PhysParams, c: f64) -> f64 {
    (c * params.kappa_tot() * params.gamma_m / 4.0).sqrt()
}

fn base_scenario(scheme: Scheme, params: PhysParams, drives: DriveSpec, grid: Grid) -> Scenario {
    Scenario {
        scheme,
        params,
        drives,
        z: 0.0,
        grid,
        solver: SolverChoice::Rwa,
        harmonics: None,
        outputs: Column::ALL.to_vec(),
        sweeps: Vec::new(),
        omega_eval: 0.0,
        unit: Some("kappa_out".to_string()),
    }
}

fn write(dir: &Path, name: &str, table: &Table, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    csvout::write_file(&path, table)?;
    files.push(path);
    Ok(())
}

fn params_line(p: &PhysParams) -> String {
    format!(
        "omega_m = {}, kappa_out = {}, kappa_int = {}, gamma_m = {}, n_th = {}",
        fmt_float(p.omega_m),
        fmt_float(p.kappa_out),
        fmt_float(p.kappa_int),
        fmt_float(p.gamma_m),
        fmt_float(p.n_th)
    )
}

/// The two schemes at equal cooperativity over one frequency window.
fn fig2(dir: &Path, stem: &str, omega_min: f64, omega_max: f64) -> Result<Vec<PathBuf>> {
    let params = sideband_params();
    let grid = Grid {
        min: omega_min,
        max: omega_max,
        points: 401,
        scale: Scale::Linear,
    };
    let mut files = Vec::new();

    let matched = DriveSpec {
        auto_match_c: Some(COMPARISON_C),
        ..no_drives()
    };
    let sc = base_scenario(Scheme::Dissipative, params, matched, grid);
    write(
        dir,
        &format!("{stem}_dissipative.csv"),
        &run::run_scenario(&sc)?,
        &mut files,
    )?;

    let single = DriveSpec {
        g_minus: coupling_for(&params, COMPARISON_C),
        ..no_drives()
    };
    let sc = base_scenario(Scheme::Ponderomotive, params, single, grid);
    write(
        dir,
        &format!("{stem}_ponderomotive.csv"),
        &run::run_scenario(&sc)?,
        &mut files,
    )?;
    Ok(files)
}

fn fig3_table(series: &str, params: &PhysParams) -> Table {
    let mut columns = vec!["c"];
    columns.extend(Column::ALL.iter().map(Column::key));
    let mut table = Table::new(columns);
    table.comment("output noise versus drive cooperativity");
    table.comment(format!("series: {series}"));
    table.comment(params_line(params));
    table.comment("c: drive cooperativity, 4 g^2 / (kappa gamma_m)");
    table.comment("spectral densities are absolute: vacuum (shot noise) level is 0.5");
    table
}

/// Best output noise versus cooperativity: the two-tone scheme at dc (both
/// solvers) and the single-tone scheme at dc and at its sideband minimum.
fn fig3(dir: &Path, harmonics: Option<u32>) -> Result<Vec<PathBuf>> {
    let params = sideband_params();
    let cs = Scale::Log.values(1.0, 1e7, 57);
    let start = harmonics.unwrap_or(N_HARMONICS_DEFAULT);
    let mut files = Vec::new();

    {
        let mut table = fig3_table(
            "two-tone impedance-matched drive, dc output noise, rotating-wave solver",
            &params,
        );
        let rows: Result<Vec<Vec<Field>>> = cs
            .par_iter()
            .map(|&c| {
                let drives = matched_drives(&params, c)?;
                let model = build_dissipative(&params, &drives)?;
                let pt = linres::spectrum_point(&model, 0.0)?;
                let mut row = vec![Field::Num(c)];
                run::point_fields(&mut row, &Column::ALL, 0.0, &pt, "rwa", true);
                Ok(row)
            })
            .collect();
        table.rows = rows?;
        write(dir, "fig3_dissipative_rwa.csv", &table, &mut files)?;
    }

    {
        let mut table = fig3_table(
            "two-tone impedance-matched drive, dc output noise, harmonic-expansion solver",
            &params,
        );
        table.comment("counter-rotating dynamics included; rows without a stable stationary state have empty spectrum cells");
        let rows: Result<Vec<Vec<Field>>> = cs
            .par_iter()
            .map(|&c| {
                let drives = matched_drives(&params, c)?;
                let mut row = vec![Field::Num(c)];
                match floquet::lift(&params, &drives)
                    .and_then(|fm| run::escalate(&fm, 0.0, start))
                {
                    Ok((pt, converged)) => {
                        run::point_fields(&mut row, &Column::ALL, 0.0, &pt, "floquet", converged);
                    }
                    Err(CoreError::NotStable { .. }) => {
                        run::empty_fields(&mut row, &Column::ALL, 0.0, "floquet");
                    }
                    Err(e) => return Err(e.into()),
                }
                Ok(row)
            })
            .collect();
        table.rows = rows?;
        write(dir, "fig3_dissipative_floquet.csv", &table, &mut files)?;
    }

    {
        let mut table = fig3_table("single-tone resonant drive, dc output noise", &params);
        let rows: Result<Vec<Vec<Field>>> = cs
            .par_iter()
            .map(|&c| {
                let drives = DriveConfig::ponderomotive(coupling_for(&params, c));
                let model = build_ponderomotive(&params, &drives)?;
                let pt = linres::spectrum_point(&model, 0.0)?;
                let mut row = vec![Field::Num(c)];
                run::point_fields(&mut row, &Column::ALL, 0.0, &pt, "rwa", true);
                Ok(row)
            })
            .collect();
        table.rows = rows?;
        write(dir, "fig3_ponderomotive_zero.csv", &table, &mut files)?;
    }

    {
        let mut table = fig3_table(
            "single-tone resonant drive, best output noise near the mechanical sideband",
            &params,
        );
        table.comment(
            "omega holds the location of the optimal-quadrature minimum within \
             20 mechanical linewidths of the sideband",
        );
        let lo = params.omega_m - 20.0 * params.gamma_m;
        let hi = params.omega_m + 20.0 * params.gamma_m;
        let rows: Result<Vec<Vec<Field>>> = cs
            .par_iter()
            .map(|&c| {
                let drives = DriveConfig::ponderomotive(coupling_for(&params, c));
                let model = build_ponderomotive(&params, &drives)?;
                let (w_min, _) = optimize::band_minimum(
                    |w| Ok(linres::spectrum_point(&model, w)?.s_opt),
                    lo,
                    hi,
                    201,
                    1e-8,
                )?;
                let pt = linres::spectrum_point(&model, w_min)?;
                let mut row = vec![Field::Num(c)];
                run::point_fields(&mut row, &Column::ALL, w_min, &pt, "rwa", true);
                Ok(row)
            })
            .collect();
        table.rows = rows?;
        write(dir, "fig3_ponderomotive_sideband.csv", &table, &mut files)?;
    }

    Ok(files)
}

/// Measurement rate against spectral noise for one grid cell, with the
/// escalation policy of scenario runs: unconverged results are returned
/// flagged rather than as errors.
fn fig4_cell(
    params: &PhysParams,
    drives: &DriveConfig,
    a_zero: f64,
    start: u32,
) -> twotone_core::Result<(f64, bool)> {
    let fm = floquet::lift(params, drives)?;
    let (pt, spectrum_ok) = run::escalate(&fm, 0.0, start)?;
    let (slope, slope_ok) = escalate_mean_response(&fm, start)?;
    let s_ii = linres::homodyne_noise_density(params.kappa_out, pt.s_u1);
    let rate = linres::measurement_rate(slope, s_ii)?;
    let enhancement = rate / oracle::linear_cavity_measurement_rate(params.kappa_out, a_zero);
    Ok((enhancement, spectrum_ok && slope_ok))
}

/// Mean-response analog of [`run::escalate`]: refine the truncation order
/// from `start`, flagging instead of failing when the cap is reached.
fn escalate_mean_response(fm: &FloquetModel, start: u32) -> twotone_core::Result<(f64, bool)> {
    let mut n = start.clamp(1, N_HARMONICS_MAX);
    let mut coarse = floquet::floquet_mean_response_at(fm, 1.0, n)?;
    while n < N_HARMONICS_MAX {
        let fine = floquet::floquet_mean_response_at(fm, 1.0, n + 1)?;
        if (fine - coarse).abs() / fine.abs().max(1e-12) <= floquet::CONVERGENCE_TOL {
            return Ok((fine, true));
        }
        coarse = fine;
        n += 1;
    }
    Ok((coarse, false))
}

/// Measurement-rate enhancement over the drive and probe cooperativities.
fn fig4(dir: &Path, harmonics: Option<u32>) -> Result<Vec<PathBuf>> {
    let params = PhysParams {
        omega_m: 1.0,
        kappa_out: 0.05,
        kappa_int: 0.0,
        gamma_m: 2e-6,
        g0: 0.0,
        n_th: 10.0,
        gamma_l: 0.0,
    };
    let a_zero = 1.0;
    let start = harmonics.unwrap_or(N_HARMONICS_DEFAULT);
    let cs = Scale::Log.values(1e-1, 1e7, 33);
    let c0s = Scale::Log.values(1e-4, 1e2, 25);
    let cells: Vec<(f64, f64)> = cs
        .iter()
        .flat_map(|&c| c0s.iter().map(move |&c0| (c, c0)))
        .collect();

    let rows: Result<Vec<Vec<Field>>> = cells
        .par_iter()
        .map(|&(c, c0)| {
            let (g_minus, g_plus) = if c >= 1.0 {
                let d = matched_drives(&params, c)?;
                (d.g_minus, d.g_plus)
            } else {
                (coupling_for(&params, c), 0.0)
            };
            let g_zero = coupling_for(&params, c0);
            let drives = DriveConfig::measurement(g_minus, g_plus, g_zero, a_zero);
            drives.validate()?;
            match fig4_cell(&params, &drives, a_zero, start) {
                Ok((enhancement, converged)) => Ok(vec![
                    Field::Num(c),
                    Field::Num(c0),
                    Field::Num(enhancement),
                    Field::Flag(converged),
                ]),
                Err(CoreError::NotStable { .. }) => Ok(vec![
                    Field::Num(c),
                    Field::Num(c0),
                    Field::MaybeNum(None),
                    Field::Flag(false),
                ]),
                Err(e) => Err(e.into()),
            }
        })
        .collect();

    let mut table = Table::new(vec!["c", "c0", "enhancement", "converged"]);
    table.comment("mechanical measurement-rate enhancement over a resonant single-probe cavity");
    table.comment(params_line(&params));
    table.comment("rates expressed in units of `omega_m`");
    table.comment(format!("probe amplitude a_zero = {}", fmt_float(a_zero)));
    table.comment(
        "c: two-tone drive cooperativity; drives are impedance-matched for c >= 1 \
         and a single lower tone below that",
    );
    table.comment("c0: probe cooperativity, g_zero = sqrt(c0 kappa gamma_m / 4)");
    table.comment(
        "enhancement: mechanical measurement rate over the resonant-cavity rate \
         4 a_zero^2 / kappa at equal probe power",
    );
    table.comment("cells without a stable stationary state have an empty enhancement");
    table.rows = rows?;
    let mut files = Vec::new();
    write(dir, "fig4_enhancement.csv", &table, &mut files)?;
    Ok(files)
}

/// Twin spectral minima of the strongly coupled two-tone scheme.
fn fig5(dir: &Path) -> Result<Vec<PathBuf>> {
    let params = PhysParams {
        omega_m: 1000.0,
        kappa_out: 1.0,
        kappa_int: 0.0,
        gamma_m: 0.1,
        g0: 0.0,
        n_th: 10.0,
        gamma_l: 0.0,
    };
    let r = 5.0_f64;
    let g_collective = 0.5_f64;
    let drives = DriveSpec {
        g_minus: g_collective * r.cosh(),
        g_plus: g_collective * r.sinh(),
        ..no_drives()
    };
    let grid = Grid {
        min: -0.8,
        max: 0.8,
        points: 801,
        scale: Scale::Linear,
    };
    let sc = base_scenario(Scheme::Dissipative, params, drives, grid);
    let mut table = run::run_scenario(&sc)?;
    table.comment(
        "drive tones chosen self-consistently to realize collective coupling 0.5 \
         and squeeze parameter r = 5",
    );
    table.comment(
        "hybridization splits the noise minimum: twin minima sit near omega = +/-0.3518, \
         separated by sqrt(8g^2 - kappa^2 - gamma_m^2)/sqrt(2)",
    );
    let mut files = Vec::new();
    write(dir, "fig5_spectrum.csv", &table, &mut files)?;
    Ok(files)
}
