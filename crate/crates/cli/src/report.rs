//! Serialized report layouts and their text renderings.
//!
//! Every JSON report carries `schema_version` and `kind`. Fields are never
//! omitted: missing values (such as `tau` of two-parameter heads) are `null`.

use std::fmt::{self, Write as _};

use bicomp::copula::BivariateParams;
use bicomp::estimation::Evaluation;
use bicomp::ingest::{Histogram, PairHistogram, RowRejection, SummaryStats};
use bicomp::{CompositeParams, FitReport, HeadFamily, OptimizerConfig};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const JOINT_NOTE: &str =
    "joint refinement maximizes the full likelihood from the two-stage estimates; \
     it is an extension, not part of the two-stage method";

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub source: String,
    pub n: usize,
    pub columns: [String; 2],
    pub rejected_rows: Vec<RowRejection>,
}

#[derive(Debug, Serialize)]
pub struct FitOutput {
    pub schema_version: u32,
    pub kind: &'static str,
    pub seed: u64,
    pub input: InputInfo,
    pub optimizer: OptimizerConfig,
    /// Family tags, best first (AIC, then BIC, then fixed family order).
    pub ranking: Vec<HeadFamily>,
    pub models: Vec<ModelEntry>,
    pub joint_refinement: Option<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct ModelEntry {
    pub rank: usize,
    pub family: HeadFamily,
    pub params: BivariateParams,
    /// Mixing weight `r` of each marginal.
    pub weights: [f64; 2],
    pub fit: FitReport,
}

/// The part of a fit report that `simulate` and `eval` read back.
#[derive(Debug, Deserialize)]
pub struct FitFile {
    pub models: Vec<FitFileEntry>,
}

#[derive(Debug, Deserialize)]
pub struct FitFileEntry {
    pub family: HeadFamily,
    pub params: BivariateParams,
}

#[derive(Debug, Serialize)]
pub struct EvalOutput {
    pub schema_version: u32,
    pub kind: &'static str,
    pub input: InputInfo,
    pub params: BivariateParams,
    pub weights: [f64; 2],
    pub metrics: Evaluation,
    pub overlay: [Overlay; 2],
}

/// Plot data for one coordinate: a log-binned histogram scaled to a density
/// and the fitted density on a log-spaced grid.
#[derive(Debug, Serialize)]
pub struct Overlay {
    pub coordinate: &'static str,
    pub histogram: Histogram,
    pub bin_density: Vec<f64>,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Trapezoid integral of `density` over `grid`.
    pub grid_integral: f64,
}

#[derive(Debug, Serialize)]
pub struct SummaryOutput {
    pub schema_version: u32,
    pub kind: &'static str,
    pub input: InputInfo,
    pub stats: SummaryStats,
}

#[derive(Debug, Serialize)]
pub struct HistogramOutput {
    pub schema_version: u32,
    pub kind: &'static str,
    pub input: InputInfo,
    pub histogram: PairHistogram,
}

/// Aligned plain-text table; the first column is left-aligned.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, &w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            writeln!(f, "{}", cells.join("  ").trim_end())?;
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e6).contains(&a) {
        format!("{v:.4}")
    } else {
        format!("{v:.4e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), num)
}

fn model_label(p: &BivariateParams) -> String {
    let (a, b) = (p.marginal1.family(), p.marginal2.family());
    if a == b {
        a.to_string()
    } else {
        format!("{a}/{b}")
    }
}

fn param_rows(table: &mut Table, label: &str, p: &CompositeParams, r: f64) {
    table.row(vec![
        label.to_string(),
        num(p.head.mu()),
        num(p.head.sigma()),
        opt(p.head.tau()),
        num(p.tail.alpha()),
        num(p.tail.gamma()),
        num(p.theta),
        num(r),
    ]);
}

const PARAM_HEADER: [&str; 8] = ["", "mu", "sigma", "tau", "alpha", "gamma", "theta", "r"];

fn input_line(out: &mut String, input: &InputInfo) {
    let _ = writeln!(
        out,
        "input: {} (n = {}, columns {} and {}, {} rows skipped)",
        input.source,
        input.n,
        input.columns[0],
        input.columns[1],
        input.rejected_rows.len()
    );
}

impl FitOutput {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        input_line(&mut out, &self.input);
        let _ = writeln!(out, "seed: {}\n", self.seed);

        let mut cmp = Table::new(&[
            "rank",
            "model",
            "loglik",
            "df",
            "AIC",
            "BIC",
            "reduced df",
            "reduced AIC",
            "reduced BIC",
            "converged",
        ]);
        for m in &self.models {
            let e = &m.fit.metrics;
            cmp.row(vec![
                m.rank.to_string(),
                m.family.to_string(),
                format!("{:.2}", e.log_likelihood.total),
                e.criteria.df.to_string(),
                format!("{:.2}", e.criteria.aic),
                format!("{:.2}", e.criteria.bic),
                e.reduced.df.to_string(),
                format!("{:.2}", e.reduced.aic),
                format!("{:.2}", e.reduced.bic),
                m.fit.converged.to_string(),
            ]);
        }
        let _ = writeln!(out, "Model comparison (ranked by AIC, then BIC)\n{cmp}");

        for m in &self.models {
            let mut t = Table::new(&PARAM_HEADER);
            param_rows(&mut t, "claim1", &m.params.marginal1, m.weights[0]);
            param_rows(&mut t, "claim2", &m.params.marginal2, m.weights[1]);
            let _ = writeln!(
                out,
                "Estimates: {}\n{t}phi = {}{}\n",
                m.family,
                num(m.params.phi.phi()),
                if m.fit.copula.at_boundary {
                    " (independence boundary)"
                } else {
                    ""
                }
            );
            if let Some(j) = &m.fit.joint {
                let mut t = Table::new(&PARAM_HEADER);
                let w = |p: &CompositeParams| {
                    bicomp::CompositeModel::new(*p).map_or(f64::NAN, |m| m.weight())
                };
                param_rows(&mut t, "claim1", &j.marginal1, w(&j.marginal1));
                param_rows(&mut t, "claim2", &j.marginal2, w(&j.marginal2));
                let _ = writeln!(
                    out,
                    "Joint refinement: {} (loglik {:.2}, AIC {:.2}, BIC {:.2})\n{t}phi = {}\n",
                    m.family,
                    j.log_likelihood,
                    j.criteria.aic,
                    j.criteria.bic,
                    num(j.phi)
                );
            }
        }

        let mut tau = Table::new(&["model", "fitted tau", "empirical tau"]);
        for m in &self.models {
            tau.row(vec![
                m.family.to_string(),
                format!("{:.4}", m.fit.metrics.model_kendall_tau),
                format!("{:.4}", m.fit.metrics.empirical_kendall_tau),
            ]);
        }
        let _ = write!(out, "Kendall's tau\n{tau}");
        if let Some(note) = self.joint_refinement {
            let _ = writeln!(out, "\nnote: {note}");
        }
        out
    }
}

impl EvalOutput {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        input_line(&mut out, &self.input);
        let e = &self.metrics;
        let _ = writeln!(out, "model: {}\n", model_label(&self.params));

        let mut t = Table::new(&PARAM_HEADER);
        param_rows(&mut t, "claim1", &self.params.marginal1, self.weights[0]);
        param_rows(&mut t, "claim2", &self.params.marginal2, self.weights[1]);
        let _ = writeln!(out, "{t}phi = {}\n", num(self.params.phi.phi()));

        let mut ll = Table::new(&["term", "loglik"]);
        for (name, v) in [
            ("claim1", e.log_likelihood.marginal1),
            ("claim2", e.log_likelihood.marginal2),
            ("copula", e.log_likelihood.copula),
            ("total", e.log_likelihood.total),
        ] {
            ll.row(vec![name.to_string(), format!("{v:.4}")]);
        }
        let _ = writeln!(out, "{ll}");

        let mut ic = Table::new(&["count", "df", "AIC", "BIC"]);
        for (name, c) in [
            ("all parameters", e.criteria),
            ("reduced", e.reduced),
        ] {
            ic.row(vec![
                name.to_string(),
                c.df.to_string(),
                format!("{:.2}", c.aic),
                format!("{:.2}", c.bic),
            ]);
        }
        let _ = writeln!(out, "{ic}");
        let _ = writeln!(
            out,
            "Kendall's tau: fitted {:.4}, empirical {:.4}",
            e.model_kendall_tau, e.empirical_kendall_tau
        );
        let _ = writeln!(
            out,
            "KS distance: claim1 {:.4}, claim2 {:.4}",
            e.ks_statistic[0], e.ks_statistic[1]
        );
        for o in &self.overlay {
            let _ = writeln!(
                out,
                "density grid {}: {} points on [{}, {}], integral {:.6}",
                o.coordinate,
                o.grid.len(),
                num(o.grid[0]),
                num(o.grid[o.grid.len() - 1]),
                o.grid_integral
            );
        }
        out
    }
}

impl SummaryOutput {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        input_line(&mut out, &self.input);
        let mut t = Table::new(&[
            "", "min", "q1", "median", "mean", "q3", "max", "skewness", "kurtosis",
        ]);
        for (name, s) in [
            ("claim1", &self.stats.claim1),
            ("claim2", &self.stats.claim2),
        ] {
            t.row(vec![
                name.to_string(),
                num(s.min),
                num(s.q1),
                num(s.median),
                num(s.mean),
                num(s.q3),
                num(s.max),
                num(s.skewness),
                num(s.kurtosis),
            ]);
        }
        let _ = write!(out, "\n{t}");
        out
    }
}

impl HistogramOutput {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        input_line(&mut out, &self.input);
        for (name, h) in [
            ("claim1", &self.histogram.claim1),
            ("claim2", &self.histogram.claim2),
        ] {
            let mut t = Table::new(&["bin", "from", "to", "count"]);
            for (k, c) in h.counts.iter().enumerate() {
                t.row(vec![
                    k.to_string(),
                    num(h.edges[k]),
                    num(h.edges[k + 1]),
                    c.to_string(),
                ]);
            }
            let _ = write!(out, "\n{name}\n{t}");
        }
        out
    }
}
