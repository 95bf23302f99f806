//! Deterministic CSV rendering: fixed 17-significant-digit floats, LF line
//! endings, `#`-prefixed header comments, no timestamps. Tables render
//! fully in memory and are written in one call, so failed runs never leave
//! partial files behind.

use std::path::Path;

use crate::error::{CliError, Result};

/// One CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Field {
    Num(f64),
    /// Optional value; `None` renders as an empty cell.
    MaybeNum(Option<f64>),
    Text(&'static str),
    Flag(bool),
}

/// An in-memory CSV table with leading comment lines.
#[derive(Debug, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

/// Fixed float format: `{:.16e}`, 17 significant digits round-trip for f64.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    format!("{x:.16e}")
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Table {
        Table {
            comments: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    /// Render the full file content, rejecting non-finite numbers.
    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(CliError::solver(format!(
                    "row {i} has {} fields for {} columns",
                    row.len(),
                    self.columns.len()
                )));
            }
            let mut first = true;
            for field in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match field {
                    Field::Num(x) => {
                        check_finite(i, *x)?;
                        out.push_str(&fmt_float(*x));
                    }
                    Field::MaybeNum(Some(x)) => {
                        check_finite(i, *x)?;
                        out.push_str(&fmt_float(*x));
                    }
                    Field::MaybeNum(None) => {}
                    Field::Text(t) => out.push_str(t),
                    Field::Flag(b) => out.push_str(if *b { "true" } else { "false" }),
                }
            }
            out.push('\n');
        }
        Ok(out)
    }
}

fn check_finite(row: usize, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::solver(format!(
            "row {row} contains a non-finite value; refusing to write"
        )))
    }
}

/// Render and write in one step; nothing touches the filesystem on error.
pub fn write_file(path: &Path, table: &Table) -> Result<()> {
    let content = table.render()?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_comments_header_and_rows() {
        let mut t = Table::new(vec!["omega", "s_u1", "n_eff", "solver", "converged"]);
        t.comment("demo");
        t.rows.push(vec![
            Field::Num(0.5),
            Field::Num(-1.25e-7),
            Field::MaybeNum(None),
            Field::Text("rwa"),
            Field::Flag(true),
        ]);
        let s = t.render().unwrap();
        assert_eq!(
            s,
            "# demo\nomega,s_u1,n_eff,solver,converged\n\
             5.0000000000000000e-1,-1.2499999999999999e-7,,rwa,true\n"
        );
    }

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for &x in &[0.1 + 0.2, 1.0 / 3.0, 5.25e-5, -0.0, f64::MIN_POSITIVE] {
            let printed = fmt_float(x);
            let back: f64 = printed.parse().unwrap();
            let x = if x == 0.0 { 0.0 } else { x };
            assert_eq!(back, x, "{printed}");
        }
    }

    #[test]
    fn non_finite_values_abort_rendering() {
        let mut t = Table::new(vec!["x"]);
        t.rows.push(vec![Field::Num(f64::NAN)]);
        assert_eq!(t.render().unwrap_err().exit_code(), 3);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new(vec!["a", "b"]);
        t.rows.push(vec![Field::Num(1.0)]);
        assert!(t.render().is_err());
    }
}
