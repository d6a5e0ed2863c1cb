use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algorithms::{run_trials, Method};
use crate::biased_ft::{alpha_sq_bound, alpha_sq_bound_loose, predicted_spectrum, singular_values, BiasedBasis};
use crate::ensembles::{
    calibrated_dimension, expected_normalized_trace, hoeffding_tail, sample_traces, EnsembleKind, EnsembleSpec,
};
use crate::error::{param, Error, Result};
use crate::oracle_sim::{
    advantage_from_purified, grover_family, matched_forward_family, random_forward_only, random_mixed, run_purified,
    QueryCircuit,
};
use crate::par::{self, Exec};
use crate::phase;
use crate::rng;

pub use crate::ensembles::CALIBRATED_C;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{loglog_slope, wilson_interval, Relation, Report, ResultRow, TrialRecord};

/// Circuit families of the separation sweep.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Random forward-only circuits.
    Forward,
    /// Random circuits with at least one inverse query.
    Mixed,
    /// Grover iterates of the trace-estimation preparation unitary.
    Grover,
    /// The Grover schedule with inverses replaced by forwards, plus random
    /// forward-only circuits.
    Matched,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Forward, Family::Mixed, Family::Grover, Family::Matched];

    pub fn name(self) -> &'static str {
        match self {
            Family::Forward => "forward",
            Family::Mixed => "mixed",
            Family::Grover => "grover",
            Family::Matched => "matched",
        }
    }

    pub fn forward_only(self) -> bool {
        matches!(self, Family::Forward | Family::Matched)
    }

    fn id(self) -> u64 {
        self as u64
    }

    /// The circuits of this family for one `(d, q, n)` cell.
    pub fn circuits(self, d: usize, q: u32, n: usize, trials: usize, seed: u64) -> Result<Vec<QueryCircuit>> {
        match self {
            Family::Forward => (0..trials)
                .map(|j| random_forward_only(d, 2, n, q, &mut rng::trial_stream(seed, &[j as u64])))
                .collect(),
            Family::Mixed => {
                (0..trials).map(|j| random_mixed(d, 2, n, q, &mut rng::trial_stream(seed, &[j as u64]))).collect()
            }
            Family::Grover => Ok(vec![grover_family(d, n, q)?]),
            Family::Matched => matched_forward_family(d, n, q, trials, seed),
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Estimation => "estimation",
        Method::Naive => "naive",
        Method::Amplification => "amplification",
        Method::Lifted => "lifted",
    }
}

/// Prefixes resource and parameter errors with the grid tuple that raised
/// them.
fn tag(e: Error, tuple: &str) -> Error {
    match e {
        Error::Resource(m) => Error::Resource(format!("{tuple}: {m}")),
        Error::Parameter(m) => Error::Parameter(format!("{tuple}: {m}")),
        Error::Degenerate { column, residual } => {
            Error::Resource(format!("{tuple}: Gram-Schmidt degeneracy at column {column} (residual {residual:e})"))
        }
        other => other,
    }
}

fn dims_for(cfg: &ExperimentConfig, eps: f64) -> Vec<usize> {
    if cfg.grid.d.is_empty() {
        vec![calibrated_dimension(eps)]
    } else {
        cfg.grid.d.clone()
    }
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    cfg.validate()?;
    if cfg.kind != kind {
        return param(format!("config is for {}, not {}", cfg.kind.name(), kind.name()));
    }
    Ok(())
}

/// Dispatches on `cfg.kind`. `circuit-run` needs a circuit and goes
/// through [`circuit_run`] instead.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<Report> {
    match cfg.kind {
        ExperimentKind::VerifyLemmas => cmd_verify_lemmas(cfg, exec),
        ExperimentKind::Separation => cmd_separation(cfg, exec),
        ExperimentKind::Endtoend => cmd_endtoend(cfg, exec),
        ExperimentKind::Concentration => cmd_concentration(cfg, exec),
        ExperimentKind::CircuitRun => param("circuit-run needs a circuit file"),
    }
}

fn lemma_cell(q: u32, eps: f64, seed: u64) -> Result<Vec<ResultRow>> {
    let k = ExperimentKind::VerifyLemmas;
    let at = |r: ResultRow| r.at(Some(q), None, None, Some(eps));
    let basis = BiasedBasis::build(q, eps)?;
    let spectrum = singular_values(basis.ftilde());
    let predicted = predicted_spectrum(q, eps)?;
    let mismatch = spectrum.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let qs = q as usize;
    let min_alpha_sq = (0..qs).map(|j| basis.alpha(j).norm_sqr()).fold(f64::INFINITY, f64::min);
    let max_overlap = (0..qs).map(|j| basis.overlap(j)).fold(0.0, f64::max);
    let linear = (phase::mean(eps, q)? - phase::mean(1.0, q)? * eps).norm();
    Ok(vec![
        at(ResultRow::new(k, "singular_min", spectrum[0], seed).bounded(Relation::AtLeast, (1.0 - eps).sqrt(), 1e-10)),
        at(ResultRow::new(k, "singular_max", spectrum[qs - 1], seed).bounded(
            Relation::AtMost,
            (1.0 + 2.0 * eps).sqrt(),
            1e-10,
        )),
        at(ResultRow::new(k, "singular_multiset", mismatch, seed).bounded(Relation::AtMost, 0.0, 1e-10)),
        at(ResultRow::new(k, "alpha_sq_min", min_alpha_sq, seed).bounded(Relation::AtLeast, alpha_sq_bound(eps), 1e-9)),
        at(ResultRow::new(k, "alpha_sq_min_loose", min_alpha_sq, seed).bounded(
            Relation::AtLeast,
            alpha_sq_bound_loose(eps),
            1e-12,
        )),
        at(ResultRow::new(k, "overlap_max", max_overlap, seed).bounded(
            Relation::AtMost,
            2.0 * eps * eps / (1.0 - eps),
            1e-10,
        )),
        at(ResultRow::new(k, "mean_linear", linear, seed).bounded(Relation::AtMost, 0.0, 1e-12)),
    ])
}

/// Spectrum, Gram–Schmidt and mean checks of the biased Fourier vectors
/// over the `q × ε` grid, plus the large-`q` limit of the right-half mean.
pub fn cmd_verify_lemmas(cfg: &ExperimentConfig, exec: Exec) -> Result<Report> {
    expect_kind(cfg, ExperimentKind::VerifyLemmas)?;
    let k = ExperimentKind::VerifyLemmas;
    let seed = cfg.seed;
    let cells: Vec<(u32, f64)> =
        cfg.grid.q.iter().flat_map(|&q| cfg.grid.eps.iter().map(move |&e| (q, e))).collect();
    let results = par::map_slice(exec, &cells, |&(q, eps)| {
        lemma_cell(q, eps, seed).map_err(|e| tag(e, &format!("(q={q}, eps={eps})")))
    });
    let mut rows = Vec::new();
    let mut results = results.into_iter();
    for &q in &cfg.grid.q {
        if q >= 100 {
            let m = phase::mean(1.0, q)?.re;
            let at = |r: ResultRow| r.at(Some(q), None, None, Some(1.0));
            rows.push(at(ResultRow::new(k, "mean_right_half_lower", m, seed).bounded(Relation::Above, 0.5, 0.0)));
            rows.push(at(ResultRow::new(k, "mean_right_half_upper", m, seed).bounded(Relation::Below, 1.0, 0.0)));
        }
        for _ in &cfg.grid.eps {
            rows.extend(results.next().expect("one result per cell")?);
        }
    }
    let big = 1_000_000;
    rows.push(
        ResultRow::new(k, "mean_limit", phase::mean(1.0, big)?.re, seed)
            .at(Some(big), None, None, Some(1.0))
            .bounded(Relation::Near, 2.0 / PI, 1e-5),
    );
    Ok(Report { config: cfg.clone(), rows, trials: vec![] })
}

/// Maximum distinguishing advantage over the circuits of one family cell,
/// for each `ε` in `eps`. Circuits are shared across `ε`.
#[allow(clippy::too_many_arguments)]
pub fn separation_cell(
    family: Family,
    d: usize,
    q: u32,
    n: usize,
    trials: usize,
    eps: &[f64],
    seed: u64,
    cap: usize,
    exec: Exec,
) -> Result<Vec<f64>> {
    let circuits = family.circuits(d, q, n, trials, seed)?;
    let per_circuit: Vec<Result<Vec<f64>>> = par::map_slice(exec, &circuits, |c| {
        let p = run_purified(c, &c.zero_state(), cap)?;
        eps.iter().map(|&e| advantage_from_purified(&p, e, q, Exec::Sequential).map(|a| a.distance)).collect()
    });
    let mut best = vec![0.0f64; eps.len()];
    for adv in per_circuit {
        for (b, a) in best.iter_mut().zip(adv?) {
            *b = b.max(a);
        }
    }
    Ok(best)
}

/// Advantage curves of forward-only and inverse-using circuit families
/// against the forward-only ceiling `4nε²`.
pub fn cmd_separation(cfg: &ExperimentConfig, exec: Exec) -> Result<Report> {
    expect_kind(cfg, ExperimentKind::Separation)?;
    let k = ExperimentKind::Separation;
    let g = &cfg.grid;
    let mut cells = Vec::new();
    for &d in &g.d {
        for &q in &g.q {
            for &n in &g.n {
                for f in Family::ALL {
                    let seed = rng::derive_seed(cfg.seed, &[d as u64, q as u64, n as u64, f.id()]);
                    cells.push((d, q, n, f, seed));
                }
            }
        }
    }
    let results = par::map_slice(exec, &cells, |&(d, q, n, f, seed)| {
        separation_cell(f, d, q, n, g.trials, &g.eps, seed, cfg.cap, exec)
            .map_err(|e| tag(e, &format!("(d={d}, q={q}, n={n}, family={})", f.name())))
    });
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (chunk, res) in cells.chunks(Family::ALL.len()).zip(results.chunks(Family::ALL.len())) {
        let mut best = Vec::new();
        for (&(d, q, n, f, seed), r) in chunk.iter().zip(res) {
            let adv = match r {
                Ok(a) => a.clone(),
                Err(e) => return Err(Error::Resource(e.to_string())),
            };
            for (&eps, &a) in g.eps.iter().zip(&adv) {
                let row = ResultRow::new(k, f.name(), a, seed).at(Some(q), Some(d), Some(n), Some(eps));
                rows.push(if f.forward_only() {
                    row.bounded(Relation::AtMost, 4.0 * n as f64 * eps * eps, 1e-9)
                } else {
                    row
                });
            }
            if let Some(s) = loglog_slope(&g.eps, &adv) {
                slopes.push(
                    ResultRow::new(k, format!("slope_{}", f.name()), s, seed).at(Some(q), Some(d), Some(n), None),
                );
            }
            best.push(adv);
        }
        let (d, q, n, _, seed) = chunk[2];
        for (i, &eps) in g.eps.iter().enumerate() {
            let matched = best[3][i];
            if matched > 0.0 {
                rows.push(
                    ResultRow::new(k, "grover_ratio", best[2][i] / matched, seed).at(Some(q), Some(d), Some(n), Some(eps)),
                );
            }
        }
    }
    rows.extend(slopes);
    Ok(Report { config: cfg.clone(), rows, trials: vec![] })
}

/// Success rates and query counts of the distinguishers.
pub fn cmd_endtoend(cfg: &ExperimentConfig, exec: Exec) -> Result<Report> {
    expect_kind(cfg, ExperimentKind::Endtoend)?;
    let k = ExperimentKind::Endtoend;
    let g = &cfg.grid;
    let methods = &cfg.options.methods;
    let mut cells = Vec::new();
    for &eps in &g.eps {
        if eps <= 0.0 {
            return param("endtoend needs eps > 0");
        }
        for d in dims_for(cfg, eps) {
            for &q in &g.q {
                for &m in methods {
                    let seed = rng::derive_seed(cfg.seed, &[m as u64, eps.to_bits(), d as u64, q as u64]);
                    cells.push((m, eps, d, q, seed));
                }
            }
        }
    }
    let mut rows = Vec::new();
    let mut trials = Vec::new();
    // (method, q, d-slot) -> [(1/ε, mean total)]
    type Slot = (Method, u32, Option<usize>);
    let mut curves: Vec<(Slot, Vec<(f64, f64)>)> = Vec::new();
    for &(m, eps, d, q, seed) in &cells {
        let out = run_trials(m, eps, d, q, g.trials, seed, cfg.options.engine, exec)
            .map_err(|e| tag(e, &format!("(method={}, eps={eps}, d={d}, q={q})", method_name(m))))?;
        let n = out.len();
        let correct = out.iter().filter(|r| r.correct()).count();
        let fwd = out.iter().map(|r| r.fwd_queries as f64).sum::<f64>() / n as f64;
        let inv = out.iter().map(|r| r.inv_queries as f64).sum::<f64>() / n as f64;
        let (lo, hi) = wilson_interval(correct, n);
        let at = |r: ResultRow| r.at(Some(q), Some(d), None, Some(eps));
        rows.push(at(ResultRow::new(k, method_name(m), correct as f64 / n as f64, seed)
            .bounded(Relation::AtLeast, 0.85, 0.0)
            .with_interval(lo, hi)
            .with_queries(fwd, inv)));
        let inv_row = ResultRow::new(k, format!("inverse_queries_{}", method_name(m)), inv, seed);
        rows.push(at(match m {
            Method::Estimation => inv_row.bounded(Relation::Above, 0.0, 0.0),
            Method::Naive => inv_row.bounded(Relation::AtMost, 0.0, 0.0),
            _ => inv_row,
        }));
        if m == Method::Estimation {
            rows.push(at(ResultRow::new(k, "query_ratio", 1.0 / (eps * eps) / (fwd + inv), seed)));
        }
        let slot = (m, q, (!g.d.is_empty()).then_some(d));
        match curves.iter_mut().find(|(key, _)| *key == slot) {
            Some((_, pts)) => pts.push((1.0 / eps, fwd + inv)),
            None => curves.push((slot, vec![(1.0 / eps, fwd + inv)])),
        }
        trials.extend(out.iter().map(|r| TrialRecord::new(m, eps, d, q, r)));
    }
    for ((m, q, d), pts) in curves {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let Some(s) = loglog_slope(&xs, &ys) else { continue };
        let row = ResultRow::new(k, format!("query_slope_{}", method_name(m)), s, cfg.seed).at(Some(q), d, None, None);
        rows.push(match m {
            Method::Estimation => row.bounded(Relation::Near, 1.0, 0.1),
            Method::Naive => row.bounded(Relation::Near, 2.0, 0.1),
            _ => row,
        });
    }
    Ok(Report { config: cfg.clone(), rows, trials })
}

/// Normalized-trace tail and gap rates at each `(ε, d, q)`, as Wilson
/// intervals against the 0.99 / 0.01 targets.
pub fn cmd_concentration(cfg: &ExperimentConfig, exec: Exec) -> Result<Report> {
    expect_kind(cfg, ExperimentKind::Concentration)?;
    let k = ExperimentKind::Concentration;
    let g = &cfg.grid;
    let mut rows = Vec::new();
    for &eps in &g.eps {
        if eps <= 0.0 {
            return param("concentration needs eps > 0");
        }
        for d in dims_for(cfg, eps) {
            for &q in &g.q {
                let seed = rng::derive_seed(cfg.seed, &[eps.to_bits(), d as u64, q as u64]);
                let tuple = format!("(eps={eps}, d={d}, q={q})");
                let s0 = EnsembleSpec::new(EnsembleKind::Unbiased0, d, q, eps).map_err(|e| tag(e, &tuple))?;
                let s1 = EnsembleSpec::new(EnsembleKind::Biased1, d, q, eps).map_err(|e| tag(e, &tuple))?;
                // same streams as trace_gap_check(eps, d, q, trials, seed)
                let (t0, t1) = par::join(
                    exec,
                    || sample_traces(&s0, g.trials, rng::derive_seed(seed, &[0]), exec),
                    || sample_traces(&s1, g.trials, rng::derive_seed(seed, &[1]), exec),
                );
                let (t0, t1) = (t0?, t1?);
                let m0 = expected_normalized_trace(&s0)?;
                let m1 = expected_normalized_trace(&s1)?;
                let n = g.trials;
                let count = |v: &[crate::C64], f: &dyn Fn(crate::C64) -> bool| v.iter().filter(|z| f(**z)).count();
                let t = 0.1 * eps;
                let th = (8.0 * 400f64.ln() / d as f64).sqrt();
                let at = |r: ResultRow| r.at(Some(q), Some(d), None, Some(eps));
                let rate = |name: &str, hits: usize, rel: Relation, bound: f64| {
                    let (lo, hi) = wilson_interval(hits, n);
                    at(ResultRow::new(k, name, hits as f64 / n as f64, seed)
                        .bounded(rel, bound, 0.0)
                        .with_interval(lo, hi)
                        .interval_margin())
                };
                rows.push(rate("unbiased_tail", count(&t0, &|z| (z - m0).norm() >= t), Relation::AtMost, 0.01));
                rows.push(rate("biased_tail", count(&t1, &|z| (z - m1).norm() >= t), Relation::AtMost, 0.01));
                rows.push(rate(
                    "hoeffding_tail",
                    count(&t1, &|z| (z - m1).norm() >= th),
                    Relation::AtMost,
                    hoeffding_tail(d, th),
                ));
                rows.push(rate("gap_unbiased_below", count(&t0, &|z| z.norm() < t), Relation::AtLeast, 0.99));
                rows.push(rate("gap_biased_above", count(&t1, &|z| z.norm() >= 2.0 * t), Relation::AtLeast, 0.99));
            }
        }
    }
    Ok(Report { config: cfg.clone(), rows, trials: vec![] })
}

/// Advantage of one circuit, started from `|0⟩`, at every `ε` of the grid.
pub fn circuit_run(circuit: &QueryCircuit, cfg: &ExperimentConfig, exec: Exec) -> Result<Report> {
    cfg.validate()?;
    let k = ExperimentKind::CircuitRun;
    let p = run_purified(circuit, &circuit.zero_state(), cfg.cap)?;
    let n = circuit.query_count();
    let q = circuit.q();
    let mut rows = Vec::new();
    rows.push(
        ResultRow::new(k, "histogram_keys", p.len() as f64, cfg.seed).at(Some(q), Some(circuit.d()), Some(n), None),
    );
    for &eps in &cfg.grid.eps {
        let a = advantage_from_purified(&p, eps, q, exec)?;
        let row =
            ResultRow::new(k, "advantage", a.distance, cfg.seed).at(Some(q), Some(circuit.d()), Some(n), Some(eps));
        rows.push(if circuit.is_forward_only() {
            row.bounded(Relation::AtMost, 4.0 * n as f64 * eps * eps, 1e-9)
        } else {
            row
        });
    }
    let mut config = cfg.clone();
    config.kind = k;
    Ok(Report { config, rows, trials: vec![] })
}
