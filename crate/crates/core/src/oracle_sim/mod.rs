//! Query circuits over diagonal oracles and their exact ensemble averages.
//!
//! A [`QueryCircuit`] acts on `R ⊗ S` with `R` the `d`-dimensional oracle
//! register and `S` an `aux`-dimensional workspace; basis index
//! `r·aux + s`. Steps are fixed unitaries on the whole space, forward
//! queries `U ⊗ I` and inverse queries `U† ⊗ I`.
//!
//! [`run_purified`] expands the output over Feynman paths grouped by the
//! per-index query histogram, and [`average_density`] contracts that
//! expansion with the phase moments to get `E_U[|alg_U⟩⟨alg_U|]` exactly.

mod examples;
mod families;
mod purified;

pub use examples::{example_pair_distance, example_reduced, example_state, ExampleState};
pub use families::{grover_family, matched_forward_family, random_forward_only, random_mixed};
pub use purified::{
    advantage_from_purified, average_density, biased_ft_rotate, brute_force_average,
    distinguishing_advantage, materialize_purification, run_purified, Advantage, AveragedOutput,
    PurifiedState, RotatedPurification, DEFAULT_KEY_CAP, MAX_ENUMERATION,
};

use crate::ensembles::DiagonalOracle;
use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, CMat, CVec, StateVector, TOL};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Gate(CMat),
    Forward,
    Inverse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryCircuit {
    d: usize,
    q: u32,
    aux: usize,
    steps: Vec<Step>,
}

impl QueryCircuit {
    pub fn new(d: usize, q: u32, aux: usize) -> Result<Self> {
        if d == 0 || aux == 0 {
            return Err(Error::Parameter("circuit registers must be non-empty".into()));
        }
        if q < 2 {
            return Err(Error::Parameter(format!("group order must be at least 2, got {q}")));
        }
        Ok(Self { d, q, aux, steps: Vec::new() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn aux(&self) -> usize {
        self.aux
    }

    /// Dimension of `R ⊗ S`.
    pub fn dim(&self) -> usize {
        self.d * self.aux
    }

    pub fn register_dims(&self) -> Vec<usize> {
        vec![self.d, self.aux]
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn push_gate(&mut self, gate: CMat) -> Result<&mut Self> {
        let n = self.dim();
        if gate.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "gate is {}x{}, circuit space has dimension {n}",
                gate.nrows(),
                gate.ncols()
            )));
        }
        let defect = unitarity_defect(&gate);
        if defect > TOL {
            return Err(Error::Parameter(format!("gate is not unitary (defect {defect:e})")));
        }
        self.steps.push(Step::Gate(gate));
        Ok(self)
    }

    pub fn push_forward(&mut self) -> &mut Self {
        self.steps.push(Step::Forward);
        self
    }

    pub fn push_inverse(&mut self) -> &mut Self {
        self.steps.push(Step::Inverse);
        self
    }

    pub fn forward_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Forward)).count()
    }

    pub fn inverse_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Inverse)).count()
    }

    pub fn query_count(&self) -> usize {
        self.forward_count() + self.inverse_count()
    }

    pub fn is_forward_only(&self) -> bool {
        self.inverse_count() == 0
    }

    /// `|0⟩` on `R ⊗ S`.
    pub fn zero_state(&self) -> StateVector {
        StateVector::zero(self.register_dims())
    }

    pub(crate) fn check_initial(&self, initial: &StateVector) -> Result<()> {
        if initial.dims() != [self.d, self.aux] {
            return Err(Error::Dimension(format!(
                "initial state has registers {:?}, circuit expects [{}, {}]",
                initial.dims(),
                self.d,
                self.aux
            )));
        }
        Ok(())
    }

    /// Runs the circuit against one concrete oracle.
    pub fn simulate(&self, oracle: &DiagonalOracle, initial: &StateVector) -> Result<StateVector> {
        self.check_initial(initial)?;
        if oracle.dim() != self.d {
            return Err(Error::Dimension(format!(
                "oracle dimension {} does not match circuit register {}",
                oracle.dim(),
                self.d
            )));
        }
        let entries = oracle.entries();
        let mut psi = initial.amplitudes().clone();
        for step in &self.steps {
            match step {
                Step::Gate(g) => psi = g * &psi,
                Step::Forward => scale_blocks(&mut psi, &entries, self.aux, false),
                Step::Inverse => scale_blocks(&mut psi, &entries, self.aux, true),
            }
        }
        StateVector::unnormalized(psi, self.register_dims())
    }

    /// Line format: header `d q aux`, then `G <re,im ...>` (row-major),
    /// `Q+` or `Q-` per step. Floats use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.d, self.q, self.aux);
        for step in &self.steps {
            match step {
                Step::Gate(g) => {
                    out.push('G');
                    for i in 0..g.nrows() {
                        for j in 0..g.ncols() {
                            let z = g[(i, j)];
                            out.push_str(&format!(" {},{}", z.re, z.im));
                        }
                    }
                    out.push('\n');
                }
                Step::Forward => out.push_str("Q+\n"),
                Step::Inverse => out.push_str("Q-\n"),
            }
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty circuit file".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line: hl, msg: "header must be `d q aux`".into() });
        }
        let bad = |what: &str| Error::Parse { line: hl, msg: format!("bad {what} in header") };
        let d: usize = fields[0].parse().map_err(|_| bad("d"))?;
        let q: u32 = fields[1].parse().map_err(|_| bad("q"))?;
        let aux: usize = fields[2].parse().map_err(|_| bad("aux"))?;
        let mut c = Self::new(d, q, aux).map_err(|e| Error::Parse { line: hl, msg: e.to_string() })?;
        let n = c.dim();
        for (ln, line) in lines {
            match line {
                "Q+" => {
                    c.push_forward();
                }
                "Q-" => {
                    c.push_inverse();
                }
                _ if line.starts_with('G') => {
                    let entries: Vec<&str> = line[1..].split_whitespace().collect();
                    if entries.len() != n * n {
                        return Err(Error::Parse {
                            line: ln,
                            msg: format!("gate has {} entries, expected {}", entries.len(), n * n),
                        });
                    }
                    let mut vals = Vec::with_capacity(n * n);
                    for e in entries {
                        let (re, im) = e
                            .split_once(',')
                            .ok_or_else(|| Error::Parse { line: ln, msg: format!("bad entry `{e}`") })?;
                        let p = |s: &str| {
                            s.parse::<f64>().map_err(|_| Error::Parse { line: ln, msg: format!("bad number `{s}`") })
                        };
                        vals.push(C64::new(p(re)?, p(im)?));
                    }
                    c.push_gate(CMat::from_row_slice(n, n, &vals))
                        .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
                }
                other => {
                    return Err(Error::Parse { line: ln, msg: format!("unknown step `{other}`") });
                }
            }
        }
        Ok(c)
    }
}

fn scale_blocks(psi: &mut CVec, entries: &[C64], block: usize, inverse: bool) {
    for (chunk, u) in psi.as_mut_slice().chunks_mut(block).zip(entries) {
        let u = if inverse { u.conj() } else { *u };
        for a in chunk {
            *a *= u;
        }
    }
}
