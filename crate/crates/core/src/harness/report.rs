use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Method, TrialRow};
use crate::error::{Error, Result};

use super::config::{ExperimentConfig, ExperimentKind};
use super::ARTIFACT_VERSION;

/// How `measured` is compared with `bound`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `measured ≤ bound + tolerance`
    AtMost,
    /// `measured ≥ bound − tolerance`
    AtLeast,
    /// `measured < bound`
    Below,
    /// `measured > bound`
    Above,
    /// `|measured − bound| ≤ tolerance`
    Near,
    /// No bound applies; always passes.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub check: String,
    pub q: Option<u32>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub measured: f64,
    pub relation: Relation,
    pub bound: Option<f64>,
    pub tolerance: f64,
    /// Confidence interval of `measured` when it is a rate.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub fwd_queries: Option<f64>,
    pub inv_queries: Option<f64>,
    pub pass: bool,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(experiment: ExperimentKind, check: impl Into<String>, measured: f64, seed: u64) -> Self {
        ResultRow {
            experiment,
            check: check.into(),
            q: None,
            d: None,
            n: None,
            eps: None,
            measured,
            relation: Relation::Report,
            bound: None,
            tolerance: 0.0,
            lo: None,
            hi: None,
            fwd_queries: None,
            inv_queries: None,
            pass: true,
            seed,
        }
    }

    pub fn at(mut self, q: Option<u32>, d: Option<usize>, n: Option<usize>, eps: Option<f64>) -> Self {
        self.q = q;
        self.d = d;
        self.n = n;
        self.eps = eps;
        self
    }

    /// Sets the bound and recomputes the pass flag.
    pub fn bounded(mut self, relation: Relation, bound: f64, tolerance: f64) -> Self {
        self.relation = relation;
        self.bound = Some(bound);
        self.tolerance = tolerance;
        self.pass = self.satisfied();
        self
    }

    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.lo = Some(lo);
        self.hi = Some(hi);
        self
    }

    /// Uses the attached interval's extent on the side of the bound as the
    /// tolerance, so a rate passes when its interval reaches the bound.
    pub fn interval_margin(mut self) -> Self {
        let (Some(lo), Some(hi)) = (self.lo, self.hi) else {
            return self;
        };
        self.tolerance = match self.relation {
            Relation::AtLeast => hi - self.measured,
            Relation::AtMost => self.measured - lo,
            _ => self.tolerance,
        };
        self.pass = self.satisfied();
        self
    }

    pub fn with_queries(mut self, fwd: f64, inv: f64) -> Self {
        self.fwd_queries = Some(fwd);
        self.inv_queries = Some(inv);
        self
    }

    /// Whether `measured` satisfies the relation within the tolerance.
    pub fn satisfied(&self) -> bool {
        let m = self.measured;
        let Some(b) = self.bound else {
            return self.relation == Relation::Report;
        };
        if m.is_nan() {
            return false;
        }
        match self.relation {
            Relation::AtMost => m <= b + self.tolerance,
            Relation::AtLeast => m >= b - self.tolerance,
            Relation::Below => m < b,
            Relation::Above => m > b,
            Relation::Near => (m - b).abs() <= self.tolerance,
            Relation::Report => true,
        }
    }
}

/// One distinguisher trial with its cell coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub eps: f64,
    pub d: usize,
    pub q: u32,
    pub trial: usize,
    pub b: u8,
    pub b_hat: u8,
    pub a_hat: f64,
    pub fwd_queries: u64,
    pub inv_queries: u64,
    pub seed: u64,
}

impl TrialRecord {
    pub fn new(method: Method, eps: f64, d: usize, q: u32, r: &TrialRow) -> Self {
        TrialRecord {
            method,
            eps,
            d,
            q,
            trial: r.trial,
            b: r.b,
            b_hat: r.b_hat,
            a_hat: r.a_hat,
            fwd_queries: r.fwd_queries,
            inv_queries: r.inv_queries,
            seed: r.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub trials: Vec<TrialRecord>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    fn header(&self) -> Result<String> {
        let mut h = format!("# invq {ARTIFACT_VERSION}\n# experiment: {}\n", self.config.kind.name());
        for line in self.config.to_toml()?.lines() {
            h.push_str("# ");
            h.push_str(line);
            h.push('\n');
        }
        Ok(h)
    }

    pub fn to_csv(&self) -> Result<String> {
        with_header(self.header()?, &self.rows)
    }

    pub fn trials_csv(&self) -> Result<String> {
        with_header(self.header()?, &self.trials)
    }

    /// Writes `<kind>.csv` (and `<kind>_trials.csv` when there are trial
    /// rows) into `dir`, returning the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let name = self.config.kind.name();
        let main = dir.join(format!("{name}.csv"));
        std::fs::write(&main, self.to_csv()?)?;
        let mut out = vec![main];
        if !self.trials.is_empty() {
            let t = dir.join(format!("{name}_trials.csv"));
            std::fs::write(&t, self.trials_csv()?)?;
            out.push(t);
        }
        Ok(out)
    }
}

fn with_header<T: Serialize>(header: String, rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(header.into_bytes());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parameter(e.to_string()))
}

/// Wilson score interval at `z = 1.96` for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = n as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Least-squares slope of `ln y` against `ln x`, over the points where both
/// are positive. `None` with fewer than two such points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
