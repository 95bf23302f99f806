//! Scenario execution: build the requested model, evaluate spectra over
//! the frequency grid or parameter sweep, and assemble the CSV table.
//! Points are computed concurrently and collected in deterministic order.

use rayon::prelude::*;
use twotone_core::floquet::{self, FloquetModel, N_HARMONICS_DEFAULT, N_HARMONICS_MAX};
use twotone_core::linres;
use twotone_core::model::{
    build_dissipative, build_lossy, build_measurement, build_phase_noise, build_ponderomotive,
    DriveConfig, LtiModel, MeasurementSignal, PhysParams, Scheme,
};
use twotone_core::{Error as CoreError, SpectrumPoint};

use crate::config::{Column, Scenario, SolverChoice};
use crate::csvout::{fmt_float, Field, Table};
use crate::error::{CliError, Result};

/// A solver bound to one concrete model.
pub enum Engine {
    Rwa(LtiModel),
    Floquet(Box<FloquetModel>, u32),
}

/// Build the model for `scheme` and wrap it in the chosen solver.
pub fn engine(
    scheme: Scheme,
    params: &PhysParams,
    drives: &DriveConfig,
    z: f64,
    solver: SolverChoice,
    harmonics: Option<u32>,
) -> twotone_core::Result<Engine> {
    match solver {
        SolverChoice::Rwa => {
            let model = match scheme {
                Scheme::Dissipative => build_dissipative(params, drives)?,
                Scheme::Ponderomotive => build_ponderomotive(params, drives)?,
                Scheme::DissipativeLossy => build_lossy(params, drives)?,
                Scheme::DissipativePhaseNoise => build_phase_noise(params, drives)?,
                Scheme::Measurement => {
                    build_measurement(params, drives, &MeasurementSignal { z })?.0
                }
            };
            Ok(Engine::Rwa(model))
        }
        SolverChoice::Floquet => Ok(Engine::Floquet(
            Box::new(floquet::lift(params, drives)?),
            harmonics.unwrap_or(N_HARMONICS_DEFAULT),
        )),
    }
}

/// Escalate the harmonic truncation from `start`; when the hard cap is hit
/// without convergence, return the finest solution flagged unconverged.
pub fn escalate(
    fm: &FloquetModel,
    omega: f64,
    start: u32,
) -> twotone_core::Result<(SpectrumPoint, bool)> {
    let mut n = start.clamp(1, N_HARMONICS_MAX);
    let mut coarse = floquet::floquet_spectrum_at(fm, omega, n)?;
    while n < N_HARMONICS_MAX {
        let fine = floquet::floquet_spectrum_at(fm, omega, n + 1)?;
        let r1 = (fine.s_u1 - coarse.s_u1).abs() / fine.s_u1.abs().max(1e-12);
        let r2 = (fine.s_u2 - coarse.s_u2).abs() / fine.s_u2.abs().max(1e-12);
        if r1.max(r2) <= floquet::CONVERGENCE_TOL {
            return Ok((fine, true));
        }
        coarse = fine;
        n += 1;
    }
    Ok((coarse, false))
}

impl Engine {
    pub fn solver_name(&self) -> &'static str {
        match self {
            Engine::Rwa(_) => "rwa",
            Engine::Floquet(..) => "floquet",
        }
    }

    /// Spectrum at one frequency plus its convergence flag.
    pub fn spectrum(&self, omega: f64) -> twotone_core::Result<(SpectrumPoint, bool)> {
        match self {
            Engine::Rwa(model) => Ok((linres::spectrum_point(model, omega)?, true)),
            Engine::Floquet(fm, start) => escalate(fm, omega, *start),
        }
    }
}

/// Stability failures name the couplings that caused them.
fn describe(e: CoreError, drives: &DriveConfig) -> CliError {
    match &e {
        CoreError::NotStable { .. } => CliError::solver(format!(
            "{e} (g_minus = {}, g_plus = {})",
            drives.g_minus, drives.g_plus
        )),
        _ => e.into(),
    }
}

pub(crate) fn point_fields(
    out: &mut Vec<Field>,
    columns: &[Column],
    omega: f64,
    pt: &SpectrumPoint,
    solver: &'static str,
    converged: bool,
) {
    for col in columns {
        out.push(match col {
            Column::Omega => Field::Num(omega),
            Column::SU1 => Field::Num(pt.s_u1),
            Column::SU2 => Field::Num(pt.s_u2),
            Column::SU12 => Field::Num(pt.s_u12),
            Column::SOpt => Field::Num(pt.s_opt),
            Column::PhiOpt => Field::Num(pt.phi_opt),
            Column::NEff => Field::MaybeNum(pt.n_eff),
            Column::Solver => Field::Text(solver),
            Column::Converged => Field::Flag(converged),
        });
    }
}

/// Placeholder cells for a sweep point with no stable stationary state:
/// spectrum cells empty, `converged` false.
pub(crate) fn empty_fields(out: &mut Vec<Field>, columns: &[Column], omega: f64, solver: &'static str) {
    for col in columns {
        out.push(match col {
            Column::Omega => Field::Num(omega),
            Column::Solver => Field::Text(solver),
            Column::Converged => Field::Flag(false),
            _ => Field::MaybeNum(None),
        });
    }
}

fn header(table: &mut Table, sc: &Scenario, drives: Option<&DriveConfig>) {
    table.comment("two-tone optomechanical cavity output spectra");
    table.comment(format!("scheme = {}", sc.scheme.name()));
    if let Some(u) = &sc.unit {
        table.comment(format!("rates expressed in units of `{u}`"));
    }
    let p = &sc.params;
    table.comment(format!(
        "omega_m = {}, kappa_out = {}, kappa_int = {}, gamma_m = {}, g0 = {}, n_th = {}, gamma_l = {}",
        fmt_float(p.omega_m),
        fmt_float(p.kappa_out),
        fmt_float(p.kappa_int),
        fmt_float(p.gamma_m),
        fmt_float(p.g0),
        fmt_float(p.n_th),
        fmt_float(p.gamma_l)
    ));
    match (drives, sc.drives.auto_match_c) {
        (Some(d), Some(c)) => table.comment(format!(
            "drives impedance-matched at cooperativity {}: g_minus = {}, g_plus = {}",
            fmt_float(c),
            fmt_float(d.g_minus),
            fmt_float(d.g_plus)
        )),
        (Some(d), None) => table.comment(format!(
            "g_minus = {}, g_plus = {}, g_zero = {}, a_zero = {}",
            fmt_float(d.g_minus),
            fmt_float(d.g_plus),
            fmt_float(d.g_zero),
            fmt_float(d.a_zero)
        )),
        (None, _) => table.comment(
            "drives resolved per sweep point (impedance-matched where auto_match_c applies)",
        ),
    }
    table.comment(format!("solver = {}", sc.solver.name()));
    table.comment("spectral densities are absolute: vacuum (shot noise) level is 0.5");
}

/// Run a validated scenario to an in-memory table.
pub fn run_scenario(sc: &Scenario) -> Result<Table> {
    if sc.sweeps.is_empty() {
        grid_table(sc)
    } else {
        sweep_table(sc)
    }
}

fn grid_table(sc: &Scenario) -> Result<Table> {
    let drives = sc.drives.resolve(sc.scheme, &sc.params)?;
    let eng = engine(sc.scheme, &sc.params, &drives, sc.z, sc.solver, sc.harmonics)
        .map_err(|e| describe(e, &drives))?;
    let omegas = sc.grid.values();
    let points: Result<Vec<(SpectrumPoint, bool)>> = omegas
        .par_iter()
        .map(|&w| eng.spectrum(w).map_err(|e| describe(e, &drives)))
        .collect();
    let points = points?;

    let mut table = Table::new(sc.outputs.iter().map(Column::key).collect());
    header(&mut table, sc, Some(&drives));
    table.comment(format!(
        "grid: omega in [{}, {}], {} points, {}",
        fmt_float(sc.grid.min),
        fmt_float(sc.grid.max),
        sc.grid.points,
        sc.grid.scale.name()
    ));
    for (w, (pt, converged)) in omegas.iter().zip(&points) {
        let mut row = Vec::with_capacity(sc.outputs.len());
        point_fields(&mut row, &sc.outputs, *w, pt, eng.solver_name(), *converged);
        table.rows.push(row);
    }
    Ok(table)
}

fn with_sweep_context(e: CliError, values: &[f64]) -> CliError {
    let at = values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(", ");
    match e {
        CliError::Validation(m) => CliError::validation(format!("sweep point ({at}): {m}")),
        CliError::Solver(m) => CliError::solver(format!("sweep point ({at}): {m}")),
    }
}

/// One row of a sweep: axis values plus the spectrum at `omega_eval`.
fn sweep_point(sc: &Scenario, values: &[f64]) -> Result<Vec<Field>> {
    let mut params = sc.params;
    let mut drives = sc.drives;
    let mut z = sc.z;
    for (axis, &v) in sc.sweeps.iter().zip(values) {
        axis.var.apply(v, &mut params, &mut drives, &mut z);
    }
    let context = |e: CliError| with_sweep_context(e, values);
    params.validate().map_err(|e| context(e.into()))?;
    let resolved = drives.resolve(sc.scheme, &params).map_err(context)?;

    let mut row: Vec<Field> = values.iter().map(|&v| Field::Num(v)).collect();
    let solver_name = match sc.solver {
        SolverChoice::Rwa => "rwa",
        SolverChoice::Floquet => "floquet",
    };
    // A sweep may legitimately cross an instability boundary; flag such
    // rows instead of failing the whole table.
    let eng = match engine(sc.scheme, &params, &resolved, z, sc.solver, sc.harmonics) {
        Ok(eng) => eng,
        Err(CoreError::NotStable { .. }) => {
            empty_fields(&mut row, &sc.outputs, sc.omega_eval, solver_name);
            return Ok(row);
        }
        Err(e) => return Err(context(e.into())),
    };
    match eng.spectrum(sc.omega_eval) {
        Ok((pt, converged)) => {
            point_fields(&mut row, &sc.outputs, sc.omega_eval, &pt, solver_name, converged);
            Ok(row)
        }
        Err(CoreError::NotStable { .. }) => {
            empty_fields(&mut row, &sc.outputs, sc.omega_eval, solver_name);
            Ok(row)
        }
        Err(e) => Err(context(e.into())),
    }
}

fn sweep_table(sc: &Scenario) -> Result<Table> {
    let outer = sc.sweeps[0].values();
    let inner: Vec<f64> = match sc.sweeps.get(1) {
        Some(axis) => axis.values(),
        None => Vec::new(),
    };
    let mut tuples: Vec<Vec<f64>> = Vec::new();
    for &a in &outer {
        if inner.is_empty() {
            tuples.push(vec![a]);
        } else {
            for &b in &inner {
                tuples.push(vec![a, b]);
            }
        }
    }

    let rows: Result<Vec<Vec<Field>>> =
        tuples.par_iter().map(|vals| sweep_point(sc, vals)).collect();
    let rows = rows?;

    let mut columns: Vec<&'static str> = sc.sweeps.iter().map(|a| a.var.key()).collect();
    columns.extend(sc.outputs.iter().map(Column::key));
    let mut table = Table::new(columns);
    header(&mut table, sc, None);
    for axis in &sc.sweeps {
        table.comment(format!(
            "sweep: {} in [{}, {}], {} points, {}",
            axis.var.key(),
            fmt_float(axis.min),
            fmt_float(axis.max),
            axis.points,
            axis.scale.name()
        ));
    }
    table.comment(format!(
        "spectra evaluated at omega = {}",
        fmt_float(sc.omega_eval)
    ));
    table.comment("rows without a stable stationary state have empty spectrum cells");
    table.rows = rows;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;
    use approx::assert_relative_eq;

    fn scenario(text: &str) -> Scenario {
        config::parse(text).unwrap()
    }

    const BASE: &str = "
        scheme = dissipative
        omega_m = 10
        kappa_out = 1
        gamma_m = 0.01
        n_th = 0
        omega_min = -0.5
        omega_max = 0.5
        points = 5
    ";

    #[test]
    fn zero_coupling_grid_is_shot_noise() {
        let sc = scenario(BASE);
        let table = run_scenario(&sc).unwrap();
        assert_eq!(table.rows.len(), 5);
        for row in &table.rows {
            match (row[1], row[2], row[3]) {
                (Field::Num(s1), Field::Num(s2), Field::Num(s12)) => {
                    assert_relative_eq!(s1, 0.5, epsilon = 1e-14);
                    assert_relative_eq!(s2, 0.5, epsilon = 1e-14);
                    assert!(s12.abs() < 1e-14);
                }
                other => panic!("unexpected fields {other:?}"),
            }
        }
    }

    #[test]
    fn matched_thermal_sweep_scales_linearly() {
        // At matched drive the squeezed output is (1+2n)·e^{−2r}/2, linear
        // in the bath occupation.
        let text = format!(
            "{BASE}\nauto_match_c = 100\nsweep_var = n_th\nsweep_min = 0\nsweep_max = 10\nsweep_points = 3\n"
        );
        let sc = scenario(&text);
        let table = run_scenario(&sc).unwrap();
        assert_eq!(table.columns[0], "n_th");
        assert_eq!(table.rows.len(), 3);
        let s = |i: usize| match table.rows[i][2] {
            Field::Num(x) => x,
            _ => unreachable!(),
        };
        assert_relative_eq!(s(1) / s(0), 11.0, max_relative = 1e-9);
        assert_relative_eq!(s(2) / s(0), 21.0, max_relative = 1e-9);
    }

    #[test]
    fn coupling_order_violation_in_sweep_is_validation_error() {
        let text = format!(
            "{BASE}\ng_minus = 0.1\nsweep_var = g_plus\nsweep_min = 0\nsweep_max = 0.2\nsweep_points = 3\n"
        );
        let sc = scenario(&text);
        let err = run_scenario(&sc).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("g_plus"), "{err}");
    }

    #[test]
    fn outputs_subset_controls_columns() {
        let text = format!("{BASE}\noutputs = omega, s_u1\n");
        let table = run_scenario(&scenario(&text)).unwrap();
        assert_eq!(table.columns, vec!["omega", "s_u1"]);
        assert_eq!(table.rows[0].len(), 2);
    }

    #[test]
    fn two_axis_sweep_row_order_is_outer_then_inner() {
        let text = format!(
            "{BASE}\nauto_match_c = 4\nsweep_var = n_th\nsweep_min = 0\nsweep_max = 1\nsweep_points = 2\nsweep2_var = kappa_int\nsweep2_min = 0\nsweep2_max = 0.5\nsweep2_points = 2\n"
        );
        let text = text.replace("scheme = dissipative", "scheme = dissipative_lossy");
        let sc = scenario(&text);
        let table = run_scenario(&sc).unwrap();
        assert_eq!(table.rows.len(), 4);
        let at = |r: usize, c: usize| match table.rows[r][c] {
            Field::Num(x) => x,
            _ => unreachable!(),
        };
        assert_eq!((at(0, 0), at(0, 1)), (0.0, 0.0));
        assert_eq!((at(1, 0), at(1, 1)), (0.0, 0.5));
        assert_eq!((at(2, 0), at(2, 1)), (1.0, 0.0));
        assert_eq!((at(3, 0), at(3, 1)), (1.0, 0.5));
    }

    #[test]
    fn unstable_sweep_rows_are_flagged_not_fatal() {
        // With a sideband resolution this poor, strong enough driving
        // destabilizes the harmonic-expansion dynamics; those rows must
        // come back flagged, not abort the sweep.
        let text = "
            scheme = dissipative
            omega_m = 1
            kappa_out = 0.4
            gamma_m = 0.01
            omega_min = -0.5
            omega_max = 0.5
            points = 3
            solver = floquet
            sweep_var = g_minus
            sweep_min = 0.05
            sweep_max = 0.65
            sweep_points = 5
        ";
        let table = run_scenario(&scenario(text)).unwrap();
        assert_eq!(table.rows.len(), 5);
        let flagged: Vec<bool> = table
            .rows
            .iter()
            .map(|row| matches!(row.last(), Some(Field::Flag(false))))
            .collect();
        assert!(!flagged[0], "weak driving should be stable");
        assert!(flagged[4], "strongest driving should be flagged");
        for row in table.rows.iter().filter(|r| matches!(r.last(), Some(Field::Flag(false)))) {
            assert!(matches!(row[2], Field::MaybeNum(None)), "{row:?}");
        }
    }

    #[test]
    fn grid_run_reports_instability_with_couplings() {
        // Past collective coupling ~omega_m/2 the counter-rotating terms
        // destabilize the driven cavity; a base (non-sweep) run must refuse
        // with exit code 3, naming the couplings.
        let text = "
            scheme = dissipative
            omega_m = 1
            kappa_out = 0.4
            gamma_m = 0.01
            g_minus = 0.8
            omega_min = -0.5
            omega_max = 0.5
            points = 3
            solver = floquet
        ";
        let err = run_scenario(&scenario(text)).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let msg = err.to_string();
        assert!(msg.contains("g_minus = 0.8"), "{msg}");
    }
}
