//! Parameter sweeps, figure presets and their CSV form.
//!
//! Sweeps are plain `f64` plumbing on top of the generic numerics. A table has
//! one axis column and, for every value column, a companion `_se` column
//! (Monte Carlo standard error or the analytic error estimate).

use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{
    mean_snrs, params_from_db, SystemParams, REFERENCE_NOISE_E_DBM, REFERENCE_NOISE_M_DBM,
    REFERENCE_SIGMA_E2_DB, REFERENCE_SIGMA_M2_DB,
};
use crate::error::{domain, Error, Result};
use crate::montecarlo::{run_asc_mc, McConfig};
use crate::secrecy::{asc_closed_form, asc_quadrature, AscMethod};
use crate::wfrft;

/// Experiment parameters as entered: powers in dBm, gains in dB.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbParams {
    pub power_dbm: f64,
    pub sigma_m2_db: f64,
    pub sigma_e2_db: f64,
    pub noise_m_dbm: f64,
    pub noise_e_dbm: f64,
    pub rho: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub delta_alpha: f64,
}

impl DbParams {
    /// Reference losses and noise floors.
    pub fn reference(power_dbm: f64, rho: f64, n_a: usize, n_b: usize, delta_alpha: f64) -> Self {
        Self {
            power_dbm,
            sigma_m2_db: REFERENCE_SIGMA_M2_DB,
            sigma_e2_db: REFERENCE_SIGMA_E2_DB,
            noise_m_dbm: REFERENCE_NOISE_M_DBM,
            noise_e_dbm: REFERENCE_NOISE_E_DBM,
            rho,
            n_a,
            n_b,
            delta_alpha,
        }
    }

    pub fn to_params(&self) -> Result<SystemParams<f64>> {
        params_from_db(
            self.power_dbm,
            self.sigma_m2_db,
            self.sigma_e2_db,
            self.noise_m_dbm,
            self.noise_e_dbm,
            self.rho,
            self.n_a,
            self.n_b,
            self.delta_alpha,
        )
    }

    /// Replaces the swept parameter. The antennas axis sets `N_A = value`,
    /// `N_B = 1`.
    pub fn with_axis(mut self, axis: Axis, value: f64) -> Result<Self> {
        match axis {
            Axis::DeltaAlpha => self.delta_alpha = value,
            Axis::Rho => self.rho = value,
            Axis::PowerDbm => self.power_dbm = value,
            Axis::Antennas => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(domain("sweep", format!("antenna count must be a positive integer, got {value}")));
                }
                self.n_a = value as usize;
                self.n_b = 1;
            }
        }
        Ok(self)
    }
}

/// Optional replacements for [`DbParams`] fields, as given on a command line
/// or in a config file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParamOverrides {
    pub power_dbm: Option<f64>,
    pub sigma_m2_db: Option<f64>,
    pub sigma_e2_db: Option<f64>,
    pub noise_m_dbm: Option<f64>,
    pub noise_e_dbm: Option<f64>,
    pub rho: Option<f64>,
    pub n_a: Option<usize>,
    pub n_b: Option<usize>,
    pub delta_alpha: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, mut p: DbParams) -> DbParams {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        set!(power_dbm, sigma_m2_db, sigma_e2_db, noise_m_dbm, noise_e_dbm, rho, n_a, n_b, delta_alpha);
        p
    }

    /// Later values win.
    pub fn merge(self, over: Self) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { Self { $( $f: over.$f.or(self.$f), )* } };
        }
        pick!(power_dbm, sigma_m2_db, sigma_e2_db, noise_m_dbm, noise_e_dbm, rho, n_a, n_b, delta_alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    DeltaAlpha,
    Rho,
    PowerDbm,
    Antennas,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Self::DeltaAlpha => "delta_alpha",
            Self::Rho => "rho",
            Self::PowerDbm => "power_dbm",
            Self::Antennas => "antennas",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "delta_alpha" => Ok(Self::DeltaAlpha),
            "rho" => Ok(Self::Rho),
            "power_dbm" => Ok(Self::PowerDbm),
            "antennas" => Ok(Self::Antennas),
            other => Err(Error::Parse(format!("unknown axis '{other}'"))),
        }
    }
}

/// `lo, lo+step, ...` up to and including `hi` (within rounding). Points are
/// rounded to 12 decimals so that e.g. `0.95` comes out as written.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub fixed: DbParams,
    pub methods: Vec<AscMethod>,
    pub mc: McConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(domain("sweep", "grid must not be empty"));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("sweep", "grid must be strictly increasing"));
        }
        if self.methods.is_empty() {
            return Err(domain("sweep", "at least one method is required"));
        }
        for &x in &self.grid {
            self.fixed.with_axis(self.axis, x)?.to_params()?;
        }
        self.mc.validate()
    }
}

/// Evaluates one method at one parameter point: `(value, error)`.
pub fn evaluate(params: &SystemParams<f64>, method: AscMethod, mc: &McConfig) -> Result<(f64, f64)> {
    match method {
        AscMethod::ClosedForm => {
            let r = asc_closed_form(params)?;
            Ok((r.value, r.diagnostics.error_estimate))
        }
        AscMethod::Quadrature => {
            let r = asc_quadrature(params)?;
            Ok((r.value, r.diagnostics.error_estimate))
        }
        AscMethod::MonteCarlo => {
            let r = run_asc_mc(params, mc)?;
            Ok((r.mean, r.std_error))
        }
    }
}

/// Numeric table with an axis and `(value, error)` column pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub axis: String,
    pub x: Vec<f64>,
    pub columns: Vec<String>,
    /// `values[c][i]` is column `c` at `x[i]`.
    pub values: Vec<Vec<f64>>,
    pub errors: Vec<Vec<f64>>,
}

// Shortest round-trip form, switching to exponent notation for tiny or huge values.
fn csv_number(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e9).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

impl SweepTable {
    pub fn new(axis: impl Into<String>, x: Vec<f64>) -> Self {
        Self {
            axis: axis.into(),
            x,
            columns: Vec::new(),
            values: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>, errors: Vec<f64>) -> Result<()> {
        if values.len() != self.x.len() || errors.len() != self.x.len() {
            return Err(domain("sweep table", "column length does not match the axis"));
        }
        self.columns.push(name.into());
        self.values.push(values);
        self.errors.push(errors);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.values[i].as_slice())
    }

    pub fn errors_of(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.errors[i].as_slice())
    }

    /// CSV with header `axis,col,col_se,...` and LF line endings. Numbers use
    /// the shortest representation that parses back to the same `f64`.
    /// Every number is written in a form that parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec![self.axis.clone()];
        for c in &self.columns {
            header.push(c.clone());
            header.push(format!("{c}_se"));
        }
        // Writing into a Vec cannot fail.
        w.write_record(&header).expect("in-memory CSV write");
        for (i, x) in self.x.iter().enumerate() {
            let mut row = vec![x.to_string()];
            for (v, e) in self.values.iter().zip(&self.errors) {
                row.push(csv_number(v[i]));
                row.push(csv_number(e[i]));
            }
            w.write_record(&row).expect("in-memory CSV write");
        }
        let bytes = w.into_inner().expect("in-memory CSV flush");
        String::from_utf8(bytes).expect("CSV fields are ASCII")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let parse_err = |e: csv::Error| Error::Parse(e.to_string());
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let names: Vec<String> = r.headers().map_err(parse_err)?.iter().map(String::from).collect();
        if names.is_empty() || names[0].is_empty() {
            return Err(Error::Parse("empty CSV".into()));
        }
        if names.len() % 2 != 1 {
            return Err(Error::Parse("header must be axis followed by value/_se pairs".into()));
        }
        let mut table = Self::new(names[0].clone(), Vec::new());
        for pair in names[1..].chunks(2) {
            if pair[1] != format!("{}_se", pair[0]) {
                return Err(Error::Parse(format!("expected '{}_se' after '{}'", pair[0], pair[0])));
            }
            table.columns.push(pair[0].clone());
            table.values.push(Vec::new());
            table.errors.push(Vec::new());
        }
        for (ln, rec) in r.records().enumerate() {
            let rec = rec.map_err(parse_err)?;
            let fields: Vec<f64> = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {}: '{f}': {e}", ln + 1)))
                })
                .collect::<Result<_>>()?;
            table.x.push(fields[0]);
            for (c, pair) in fields[1..].chunks(2).enumerate() {
                table.values[c].push(pair[0]);
                table.errors[c].push(pair[1]);
            }
        }
        Ok(table)
    }
}

/// Runs every method over the grid. Analytic points are evaluated in
/// parallel; Monte Carlo points run one after another, each using the
/// configured workers.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let params: Vec<SystemParams<f64>> = spec
        .grid
        .iter()
        .map(|&x| spec.fixed.with_axis(spec.axis, x)?.to_params())
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new(spec.axis.name(), spec.grid.clone());
    for &m in &spec.methods {
        let pts: Vec<(f64, f64)> = if m == AscMethod::MonteCarlo {
            params.iter().map(|p| evaluate(p, m, &spec.mc)).collect::<Result<_>>()?
        } else {
            params.par_iter().map(|p| evaluate(p, m, &spec.mc)).collect::<Result<_>>()?
        };
        let (v, e) = pts.into_iter().unzip();
        table.push_column(m.name(), v, e)?;
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig4,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
}

impl Figure {
    pub const ALL: [Figure; 6] = [Self::Fig4, Self::Fig7, Self::Fig8, Self::Fig9, Self::Fig10, Self::Fig11];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig4 => "fig4",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
            Self::Fig9 => "fig9",
            Self::Fig10 => "fig10",
            Self::Fig11 => "fig11",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Self::Fig4 => "WFRFT weight powers vs order",
            Self::Fig7 => "Eavesdropper mean SNR vs order bias",
            Self::Fig8 => "Average secrecy capacity vs order bias, by antenna count",
            Self::Fig9 => "Average secrecy capacity vs channel correlation",
            Self::Fig10 => "Average secrecy capacity vs order bias, by correlation",
            Self::Fig11 => "Average secrecy capacity vs transmit power",
        }
    }

    pub fn y_label(self) -> &'static str {
        match self {
            Self::Fig4 => "|w_p(alpha)|^2",
            Self::Fig7 => "mean eavesdropper SNR",
            _ => "average secrecy capacity (bits/s/Hz)",
        }
    }

    /// Base parameters of the preset before overrides.
    pub fn defaults(self) -> DbParams {
        match self {
            Self::Fig4 | Self::Fig7 | Self::Fig8 => DbParams::reference(20.0, 0.5, 1, 1, 0.0),
            Self::Fig9 => DbParams::reference(10.0, 0.0, 1, 1, 1.0),
            Self::Fig10 => DbParams::reference(10.0, 0.0, 2, 2, 0.0),
            Self::Fig11 => DbParams::reference(0.0, 0.5, 2, 2, 0.0),
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown figure '{s}' (expected fig4, fig7, fig8, fig9, fig10 or fig11)")))
    }
}

pub const FIG8_ANTENNAS: [usize; 4] = [1, 2, 4, 16];
pub const FIG10_RHOS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const FIG11_DELTAS: [f64; 4] = [0.2, 0.5, 0.8, 1.0];

/// One curve of a capacity figure: a label and the parameters it fixes.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    pub fixed: DbParams,
}

/// Axis, grid and curves of a capacity figure after overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureSpec {
    pub figure: Figure,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub curves: Vec<Curve>,
}

/// Resolves a capacity figure (fig8 to fig11). The swept and per-curve
/// parameters ignore overrides; everything else takes them.
pub fn figure_spec(figure: Figure, overrides: &ParamOverrides) -> Result<FigureSpec> {
    let base = overrides.apply(figure.defaults());
    let (axis, grid, curves) = match figure {
        Figure::Fig4 | Figure::Fig7 => {
            return Err(domain("figure_spec", format!("{} is not a capacity sweep", figure.name())))
        }
        Figure::Fig8 | Figure::Fig9 => {
            let (axis, grid) = if figure == Figure::Fig8 {
                (Axis::DeltaAlpha, linear_grid(0.0, 4.0, 0.05))
            } else {
                (Axis::Rho, linear_grid(0.0, 0.95, 0.05))
            };
            let curves = FIG8_ANTENNAS
                .iter()
                .map(|&n| Curve {
                    label: format!("n{n}"),
                    fixed: DbParams { n_a: n, n_b: 1, ..base },
                })
                .collect();
            (axis, grid, curves)
        }
        Figure::Fig10 => {
            let curves = FIG10_RHOS
                .iter()
                .map(|&rho| Curve {
                    label: format!("rho{rho}"),
                    fixed: DbParams { rho, ..base },
                })
                .collect();
            (Axis::DeltaAlpha, linear_grid(0.0, 4.0, 0.05), curves)
        }
        Figure::Fig11 => {
            let curves = FIG11_DELTAS
                .iter()
                .map(|&delta_alpha| Curve {
                    label: format!("da{delta_alpha}"),
                    fixed: DbParams { delta_alpha, ..base },
                })
                .collect();
            (Axis::PowerDbm, linear_grid(0.0, 30.0, 2.0), curves)
        }
    };
    Ok(FigureSpec {
        figure,
        axis,
        grid,
        curves,
    })
}

/// Builds the table of a figure. Capacity figures get one column per
/// `(method, curve)`, named `{method}_{curve}`.
pub fn run_figure(
    figure: Figure,
    overrides: &ParamOverrides,
    methods: &[AscMethod],
    mc: &McConfig,
) -> Result<SweepTable> {
    match figure {
        Figure::Fig4 => {
            let grid = linear_grid(0.0, 3.99, 0.01);
            let mut t = SweepTable::new("alpha", grid.clone());
            for p in 0..4 {
                let v = grid.iter().map(|&a| wfrft::weights(a).powers()[p]).collect();
                t.push_column(format!("w{p}"), v, vec![0.0; grid.len()])?;
            }
            Ok(t)
        }
        Figure::Fig7 => {
            let base = overrides.apply(figure.defaults());
            let grid = linear_grid(0.0, 4.0, 0.01);
            let v = grid
                .iter()
                .map(|&d| Ok(mean_snrs(&DbParams { delta_alpha: d, ..base }.to_params()?)?.1))
                .collect::<Result<Vec<f64>>>()?;
            let mut t = SweepTable::new("delta_alpha", grid.clone());
            t.push_column("gamma_e_bar", v, vec![0.0; grid.len()])?;
            Ok(t)
        }
        _ => {
            let spec = figure_spec(figure, overrides)?;
            let mut table = SweepTable::new(spec.axis.name(), spec.grid.clone());
            for curve in &spec.curves {
                let sweep = SweepSpec {
                    axis: spec.axis,
                    grid: spec.grid.clone(),
                    fixed: curve.fixed,
                    methods: methods.to_vec(),
                    mc: *mc,
                };
                let t = run_sweep(&sweep)?;
                for (i, m) in t.columns.iter().enumerate() {
                    table.push_column(
                        format!("{m}_{}", curve.label),
                        t.values[i].clone(),
                        t.errors[i].clone(),
                    )?;
                }
            }
            Ok(table)
        }
    }
}

/// Standalone matplotlib script that plots `csv_name` (looked up next to the
/// script) with error bars where the error column is nonzero.
pub fn plot_script(table: &SweepTable, csv_name: &str, title: &str, y_label: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Plots {csv_name}. Usage: python3 this_script.py [out.png]
import csv, os, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "{csv_name}"), newline="") as f:
    rows = list(csv.reader(f))
header, data = rows[0], [[float(v) for v in r] for r in rows[1:] if r]
x = [r[0] for r in data]
fig, ax = plt.subplots(figsize=(7, 4.5))
for i in range(1, len(header), 2):
    y = [r[i] for r in data]
    se = [r[i + 1] for r in data]
    if header[i].startswith("monte_carlo"):
        ax.errorbar(x, y, yerr=[3 * s for s in se], fmt="o", ms=3, label=header[i])
    else:
        ax.plot(x, y, label=header[i])
ax.set_xlabel("{axis}")
ax.set_ylabel("{y_label}")
ax.set_title("{title}")
ax.grid(True, alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "{stem}.png")
fig.savefig(out, dpi=150)
"#,
        axis = table.axis,
        stem = csv_name.trim_end_matches(".csv"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(linear_grid(0.0, 4.0, 0.05).len(), 81);
        assert_eq!(linear_grid(0.0, 0.95, 0.05).len(), 20);
        assert_eq!(linear_grid(0.0, 30.0, 2.0).last(), Some(&30.0));
    }

    #[test]
    fn presets_match_tables() {
        let s = figure_spec(Figure::Fig8, &ParamOverrides::default()).unwrap();
        assert!(s.curves.iter().all(|c| c.fixed.rho == 0.5 && c.fixed.power_dbm == 20.0));
        let s = figure_spec(Figure::Fig9, &ParamOverrides::default()).unwrap();
        assert!(s.curves.iter().all(|c| c.fixed.delta_alpha == 1.0 && c.fixed.power_dbm == 10.0));
        assert_eq!(*s.grid.last().unwrap(), 0.95);
        let s = figure_spec(Figure::Fig10, &ParamOverrides::default()).unwrap();
        assert!(s.curves.iter().all(|c| c.fixed.n_a * c.fixed.n_b == 4 && c.fixed.power_dbm == 10.0));
        let s = figure_spec(Figure::Fig11, &ParamOverrides::default()).unwrap();
        assert!(s.curves.iter().all(|c| c.fixed.rho == 0.5 && c.fixed.n_a * c.fixed.n_b == 4));
        for c in &s.curves {
            assert_eq!(c.fixed.sigma_m2_db, -95.0);
            assert_eq!(c.fixed.sigma_e2_db, -100.0);
            assert_eq!(c.fixed.noise_m_dbm, -100.0);
            assert_eq!(c.fixed.noise_e_dbm, -100.0);
        }
    }

    #[test]
    fn overrides_leave_curve_parameter_alone() {
        let o = ParamOverrides {
            rho: Some(0.2),
            power_dbm: Some(5.0),
            ..Default::default()
        };
        let s = figure_spec(Figure::Fig10, &o).unwrap();
        assert_eq!(s.curves[0].fixed.rho, 0.1);
        assert_eq!(s.curves[0].fixed.power_dbm, 5.0);
    }

    #[test]
    fn sweep_spec_validation() {
        let spec = SweepSpec {
            axis: Axis::Rho,
            grid: vec![0.1, 0.1],
            fixed: DbParams::reference(10.0, 0.0, 1, 1, 0.0),
            methods: vec![AscMethod::ClosedForm],
            mc: McConfig::new(10, 1),
        };
        assert!(spec.validate().is_err());
        let bad_rho = SweepSpec {
            grid: vec![0.5, 1.0],
            ..spec.clone()
        };
        assert!(bad_rho.validate().is_err());
    }

    #[test]
    fn csv_rejects_malformed() {
        assert!(SweepTable::from_csv("").is_err());
        assert!(SweepTable::from_csv("x,a\n1,2\n").is_err());
        assert!(SweepTable::from_csv("x,a,a_se\n1,2\n").is_err());
        assert!(SweepTable::from_csv("x,a,a_se\n1,2,zz\n").is_err());
    }
}
