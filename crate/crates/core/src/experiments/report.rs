//! Experiment reports and their on-disk artifacts: `report.csv`, `slopes.txt`, `plot.gp`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::stats::SlopeFit;

use super::config::SlopeBounds;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub param: f64,
    pub error: f64,
    pub ci: f64,
    pub cost: f64,
    /// Values for [`RateReport::extra_columns`], in order.
    pub extras: Vec<f64>,
    /// Whether the row enters the slope fit.
    pub in_fit: bool,
}

/// A named pass/fail assertion with a human-readable detail line.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub name: String,
    /// Label of the `param` column, e.g. `n` or `eps0`.
    pub param_name: String,
    pub extra_columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub fit: Option<SlopeFit>,
    pub slope_bounds: SlopeBounds,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl RateReport {
    pub fn new(name: &str, param_name: &str, extra_columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            param_name: param_name.into(),
            extra_columns: extra_columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            fit: None,
            slope_bounds: SlopeBounds::default(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn fitted_slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Regression standard error of the slope.
    pub fn slope_ci(&self) -> Option<f64> {
        self.fit.map(|f| f.slope_se)
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn extra(&self, row: &ReportRow, column: &str) -> Option<f64> {
        let i = self.extra_columns.iter().position(|c| c == column)?;
        row.extras.get(i).copied()
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("param,error,ci,cost");
        for c in &self.extra_columns {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{},{},{}", r.param, r.error, r.ci, r.cost);
            for v in &r.extras {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn slopes_text(&self) -> String {
        let mut s = format!("experiment: {}\n", self.name);
        match &self.fit {
            Some(f) => {
                let _ = writeln!(
                    s,
                    "fit: log(error) vs log({}) over {} points",
                    self.param_name, f.points
                );
                let _ = writeln!(s, "slope = {:.4} +/- {:.4} (1 s.e.)", f.slope, f.slope_se);
                if self.slope_bounds.is_bounded() {
                    let _ = writeln!(s, "target: {} (empirical ceiling)", self.slope_bounds.describe());
                } else {
                    s.push_str("target: none, fit is informational\n");
                }
            }
            None => s.push_str("fit: none\n"),
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "overall: {}", if self.pass() { "PASS" } else { "FAIL" });
        s
    }

    pub fn gnuplot(&self) -> String {
        format!(
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set logscale xy\n\
             set xlabel '{p}'\n\
             set ylabel 'error'\n\
             set title '{name}'\n\
             plot 'report.csv' using 1:2:3 with yerrorbars title 'error', \\\n\
             \x20    '' using 1:2 with lines notitle\n",
            p = self.param_name,
            name = self.name
        )
    }

    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), self.csv())?;
        fs::write(dir.join("slopes.txt"), self.slopes_text())?;
        fs::write(dir.join("plot.gp"), self.gnuplot())
    }
}

/// All reports of one experiment run; the first one is the headline report.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub reports: Vec<RateReport>,
}

impl ExperimentOutput {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(RateReport::pass)
    }

    pub fn main(&self) -> &RateReport {
        &self.reports[0]
    }

    /// Headline report in `dir`, the others in `dir/<name>/`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        for (i, r) in self.reports.iter().enumerate() {
            if i == 0 {
                r.write_to(dir)?;
            } else {
                r.write_to(&dir.join(&r.name))?;
            }
        }
        Ok(())
    }
}
