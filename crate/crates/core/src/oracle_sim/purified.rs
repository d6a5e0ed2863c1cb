use std::collections::BTreeMap;

use crate::biased_ft::BiasedBasis;
use crate::error::{Error, Result};
use crate::linalg::{trace_distance, CMat, CVec, DensityMatrix, StateVector, ZERO};
use crate::par::{self, Exec};
use crate::phase::{MomentTable, PhaseDistribution};
use crate::C64;

use super::{scale_blocks, QueryCircuit, Step};

/// Default bound on the number of histogram keys.
pub const DEFAULT_KEY_CAP: usize = 200_000;

/// Largest `q^d` accepted by [`brute_force_average`].
pub const MAX_ENUMERATION: u64 = 10_000;

/// Output of a query circuit expanded over query histograms:
/// `|alg_U⟩ = Σ_e (Π_i U_i^{e_i}) |v_e⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PurifiedState {
    d: usize,
    aux: usize,
    queries: usize,
    components: BTreeMap<Vec<i32>, CVec>,
}

impl PurifiedState {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn aux(&self) -> usize {
        self.aux
    }

    /// Number of query steps the circuit made.
    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn components(&self) -> &BTreeMap<Vec<i32>, CVec> {
        &self.components
    }

    pub fn get(&self, key: &[i32]) -> Option<&CVec> {
        self.components.get(key)
    }

    /// `Σ_e ‖v_e‖²`.
    pub fn norm_squared(&self) -> f64 {
        self.components.values().map(|v| v.norm_squared()).sum()
    }

    /// Largest `|e_i|` over all keys.
    pub fn max_abs_exponent(&self) -> usize {
        self.components
            .keys()
            .flat_map(|k| k.iter().map(|e| e.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
    }

    /// The common coordinate sum of all keys, if they share one.
    pub fn key_sum(&self) -> Option<i64> {
        let mut sums = self.components.keys().map(|k| k.iter().map(|&e| e as i64).sum::<i64>());
        let first = sums.next()?;
        sums.all(|s| s == first).then_some(first)
    }

    fn columns(&self) -> (Vec<&Vec<i32>>, CMat) {
        let keys: Vec<&Vec<i32>> = self.components.keys().collect();
        let n = self.d * self.aux;
        let mut v = CMat::zeros(n, keys.len());
        for (j, c) in self.components.values().enumerate() {
            v.set_column(j, c);
        }
        (keys, v)
    }
}

/// Expands `circuit` applied to `initial` over query histograms. A forward
/// query moves the block of each component on `|x⟩_R` from key `e` to
/// `e + 1_x`; an inverse query to `e − 1_x`. Blocks that are exactly zero
/// create no key.
pub fn run_purified(circuit: &QueryCircuit, initial: &StateVector, cap: usize) -> Result<PurifiedState> {
    circuit.check_initial(initial)?;
    let (d, aux) = (circuit.d(), circuit.aux());
    let mut comps: BTreeMap<Vec<i32>, CVec> = BTreeMap::new();
    comps.insert(vec![0; d], initial.amplitudes().clone());
    for step in circuit.steps() {
        match step {
            Step::Gate(g) => {
                for v in comps.values_mut() {
                    *v = g * &*v;
                }
            }
            Step::Forward | Step::Inverse => {
                let delta = if matches!(step, Step::Forward) { 1 } else { -1 };
                let mut next: BTreeMap<Vec<i32>, CVec> = BTreeMap::new();
                for (key, v) in &comps {
                    for x in 0..d {
                        let block = v.rows(x * aux, aux);
                        if block.iter().all(|z| *z == ZERO) {
                            continue;
                        }
                        let mut k = key.clone();
                        k[x] += delta;
                        let slot = next.entry(k).or_insert_with(|| CVec::zeros(d * aux));
                        let mut target = slot.rows_mut(x * aux, aux);
                        target += block;
                    }
                }
                if next.len() > cap {
                    return Err(Error::Resource(format!(
                        "purified state needs {} histogram keys, cap is {cap}",
                        next.len()
                    )));
                }
                comps = next;
            }
        }
    }
    Ok(PurifiedState { d, aux, queries: circuit.query_count(), components: comps })
}

#[derive(Clone, Debug)]
pub struct AveragedOutput {
    pub density: DensityMatrix,
    pub eps: f64,
    pub q: u32,
}

fn finish(mut rho: CMat, dims: Vec<usize>, eps: f64, q: u32) -> Result<AveragedOutput> {
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    Ok(AveragedOutput { density: DensityMatrix::new(rho, dims)?, eps, q })
}

/// `ρ = Σ_{e,e'} M(e − e') |v_e⟩⟨v_{e'}|` with `M(m) = Π_i E_{μ_ε}[g^{m_i}]`.
pub fn average_density(p: &PurifiedState, eps: f64, q: u32, exec: Exec) -> Result<AveragedOutput> {
    let table = MomentTable::new(eps, q, 2 * p.max_abs_exponent())?;
    let (keys, v) = p.columns();
    let k = keys.len();
    let rows: Vec<Vec<C64>> = par::map_range(exec, k, |a| {
        (0..k)
            .map(|b| {
                keys[a].iter().zip(keys[b]).fold(C64::new(1.0, 0.0), |acc, (&x, &y)| {
                    acc * table.get(x as i64 - y as i64)
                })
            })
            .collect()
    });
    let w = CMat::from_fn(k, k, |a, b| rows[a][b]);
    let rho = &v * w * v.adjoint();
    finish(rho, vec![p.d, p.aux], eps, q)
}

/// Averages `|alg_U⟩⟨alg_U|` over every oracle in `{ω^j}^d`, weighted by
/// `Π_i μ_ε(U_i)`.
pub fn brute_force_average(
    circuit: &QueryCircuit,
    initial: &StateVector,
    eps: f64,
    q: u32,
    exec: Exec,
) -> Result<AveragedOutput> {
    circuit.check_initial(initial)?;
    let d = circuit.d();
    let total = (q as u64).checked_pow(d as u32).filter(|&t| t <= MAX_ENUMERATION).ok_or_else(|| {
        Error::Resource(format!("{q}^{d} oracles exceed the enumeration limit {MAX_ENUMERATION}"))
    })? as usize;
    let dist = PhaseDistribution::new(eps, q)?;
    let roots: Vec<C64> = (0..q as i64).map(|k| crate::phase::root_of_unity(k, q)).collect();
    let n = circuit.dim();
    let chunks = 64.min(total);
    let partials: Vec<CMat> = par::map_range(exec, chunks, |c| {
        let mut acc = CMat::zeros(n, n);
        let mut entries = vec![ZERO; d];
        for o in (c * total / chunks)..((c + 1) * total / chunks) {
            let mut rest = o;
            let mut w = 1.0;
            for e in entries.iter_mut() {
                let j = rest % q as usize;
                rest /= q as usize;
                w *= dist.pmf()[j];
                *e = roots[j];
            }
            if w == 0.0 {
                continue;
            }
            let mut psi = initial.amplitudes().clone();
            for step in circuit.steps() {
                match step {
                    Step::Gate(g) => psi = g * &psi,
                    Step::Forward => scale_blocks(&mut psi, &entries, circuit.aux(), false),
                    Step::Inverse => scale_blocks(&mut psi, &entries, circuit.aux(), true),
                }
            }
            acc.ger(C64::new(w, 0.0), &psi, &psi.conjugate(), C64::new(1.0, 0.0));
        }
        acc
    });
    let rho = partials.into_iter().fold(CMat::zeros(n, n), |a, b| a + b);
    finish(rho, circuit.register_dims(), eps, q)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Advantage {
    /// Trace distance between the unbiased and biased averaged outputs.
    pub distance: f64,
    /// Upper bound `1/2 + distance/2` on the success probability of any
    /// measurement distinguishing the two ensembles.
    pub success_bound: f64,
}

/// Distance between the bias-0 and bias-`ε` averages of one purification.
pub fn advantage_from_purified(p: &PurifiedState, eps: f64, q: u32, exec: Exec) -> Result<Advantage> {
    let (r0, r1) = par::join(exec, || average_density(p, 0.0, q, exec), || average_density(p, eps, q, exec));
    let distance = trace_distance(&r0?.density, &r1?.density)?;
    Ok(Advantage { distance, success_bound: 0.5 + distance / 2.0 })
}

pub fn distinguishing_advantage(
    circuit: &QueryCircuit,
    initial: &StateVector,
    eps: f64,
    q: u32,
    cap: usize,
    exec: Exec,
) -> Result<Advantage> {
    let p = run_purified(circuit, initial, cap)?;
    advantage_from_purified(&p, eps, q, exec)
}

/// A forward-only purification after `(F^{(ε)})^{⊗d}` on the purification
/// register.
#[derive(Clone, Debug)]
pub struct RotatedPurification {
    pub keys: Vec<Vec<i32>>,
    /// `Π_i α_{h_i}(h_i)` per key.
    pub retained: Vec<f64>,
    /// `‖v_h‖²` per key.
    pub weights: Vec<f64>,
    /// Reduced state computed from the rotated purification.
    pub density: DensityMatrix,
}

impl RotatedPurification {
    pub fn min_retained_sq(&self) -> f64 {
        self.retained.iter().map(|a| a * a).fold(1.0, f64::min)
    }

    /// `Σ_h ‖v_h‖² (1 − retained_h²)`: mass outside the diagonal labels.
    pub fn error_mass(&self) -> f64 {
        self.weights.iter().zip(&self.retained).map(|(w, a)| w * (1.0 - a * a)).sum()
    }
}

/// Rotates the purification register of a forward-only purification by the
/// biased Fourier transform. Key `h` picks up label state
/// `⊗_i Σ_ℓ α_ℓ(h_i)|ℓ⟩`; the reduced state is rebuilt from those label
/// overlaps.
pub fn biased_ft_rotate(p: &PurifiedState, eps: f64, q: u32) -> Result<RotatedPurification> {
    let max = p.max_abs_exponent();
    if p.components.keys().flatten().any(|&e| e < 0 || e as u64 >= q as u64) {
        return Err(Error::Parameter(format!(
            "biased transform needs exponents in 0..{q}; purification reaches {max}"
        )));
    }
    let basis = BiasedBasis::build(q, eps)?;
    let alpha = basis.alpha_matrix();
    let m = max + 1;
    let overlaps = CMat::from_fn(m, m, |a, b| alpha.column(a).dotc(&alpha.column(b)));
    let (keys, v) = p.columns();
    let k = keys.len();
    let w = CMat::from_fn(k, k, |a, b| {
        keys[a].iter().zip(keys[b]).fold(C64::new(1.0, 0.0), |acc, (&x, &y)| acc * overlaps[(y as usize, x as usize)])
    });
    let rho = &v * w * v.adjoint();
    let retained = keys.iter().map(|h| h.iter().map(|&x| basis.alpha(x as usize).re).product()).collect();
    let weights = p.components.values().map(|c| c.norm_squared()).collect();
    let density = finish(rho, vec![p.d, p.aux], eps, q)?.density;
    Ok(RotatedPurification { keys: keys.into_iter().cloned().collect(), retained, weights, density })
}

/// The purification as an explicit vector on `(R ⊗ S) ⊗ P` with
/// `P = C^{q^d}`: `Σ_e |v_e⟩ ⊗ (⊗_i |F̃_{e_i}⟩)`.
pub fn materialize_purification(p: &PurifiedState, eps: f64, q: u32) -> Result<StateVector> {
    let n = p.d * p.aux;
    let pd = (q as usize).checked_pow(p.d as u32).filter(|&x| x * n <= 1 << 16).ok_or_else(|| {
        Error::Resource("explicit purification larger than 2^16 amplitudes".into())
    })?;
    let dist = PhaseDistribution::new(eps, q)?;
    let label = |k: i32| -> CVec {
        CVec::from_fn(q as usize, |g, _| crate::phase::root_of_unity(g as i64 * k as i64, q) * dist.pmf()[g].sqrt())
    };
    let mut out = CVec::zeros(n * pd);
    for (key, v) in &p.components {
        let mut lab = CVec::from_element(1, C64::new(1.0, 0.0));
        for &e in key {
            lab = lab.kronecker(&label(e));
        }
        for r in 0..n {
            if v[r] == ZERO {
                continue;
            }
            let mut seg = out.rows_mut(r * pd, pd);
            seg.axpy(v[r], &lab, C64::new(1.0, 0.0));
        }
    }
    StateVector::unnormalized(out, vec![n, pd])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dft_matrix, partial_trace, random_unitary, UnitaryGate};
    use crate::oracle_sim::{random_forward_only, random_mixed};
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn uniform_input(d: usize) -> (QueryCircuit, StateVector) {
        let c = QueryCircuit::new(d, 5, 1).unwrap();
        let psi = StateVector::new(dft_matrix(d).column(0).into_owned(), vec![d, 1]).unwrap();
        (c, psi)
    }

    #[test]
    fn zero_queries_give_single_key() {
        let mut r = rng::stream(61);
        let mut c = QueryCircuit::new(2, 5, 2).unwrap();
        let g = random_unitary(4, &mut r);
        c.push_gate(g.clone()).unwrap();
        let p = run_purified(&c, &c.zero_state(), DEFAULT_KEY_CAP).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p.get(&[0, 0]).unwrap() - g.column(0)).norm() < 1e-15);
        for eps in [0.0, 0.4] {
            let rho = average_density(&p, eps, 5, Exec::Sequential).unwrap();
            let pure = DensityMatrix::from_pure(&StateVector::new(g.column(0).into_owned(), vec![2, 2]).unwrap());
            assert!((rho.density.entries() - pure.entries()).norm() < 1e-12);
        }
    }

    #[test]
    fn one_query_on_uniform_input_splits_keys() {
        let (mut c, psi) = uniform_input(2);
        c.push_forward();
        let p = run_purified(&c, &psi, DEFAULT_KEY_CAP).unwrap();
        assert_eq!(p.len(), 2);
        assert_abs_diff_eq!(p.get(&[1, 0]).unwrap().norm_squared(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(&[0, 1]).unwrap().norm_squared(), 0.5, epsilon = 1e-15);
        assert_eq!(p.key_sum(), Some(1));
    }

    #[test]
    fn forward_then_inverse_cancels() {
        let (mut c, psi) = uniform_input(3);
        c.push_forward().push_inverse();
        let p = run_purified(&c, &psi, DEFAULT_KEY_CAP).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p.get(&[0, 0, 0]).unwrap() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn key_cap_is_enforced() {
        let (mut c, psi) = uniform_input(3);
        c.push_forward();
        c.push_gate(dft_matrix(3)).unwrap();
        c.push_forward();
        assert!(matches!(run_purified(&c, &psi, 5), Err(Error::Resource(_))));
        assert_eq!(run_purified(&c, &psi, 6).unwrap().len(), 6);
    }

    #[test]
    fn unbiased_forward_only_average_decoheres() {
        let mut r = rng::stream(62);
        let c = random_forward_only(3, 2, 3, 7, &mut r).unwrap();
        let p = run_purified(&c, &c.zero_state(), DEFAULT_KEY_CAP).unwrap();
        let rho = average_density(&p, 0.0, 7, Exec::Sequential).unwrap();
        let mix = p.components().values().fold(CMat::zeros(6, 6), |acc, v| acc + v * v.adjoint());
        assert!((rho.density.entries() - mix).norm() < 1e-12);
    }

    #[test]
    fn hand_averages_for_sign_oracles() {
        // q = 2, d = 1: U = ±1 is a global phase, so the average is the
        // pure gate-evolved state.
        let h = dft_matrix(2);
        let mut c = QueryCircuit::new(1, 2, 2).unwrap();
        c.push_gate(h.clone()).unwrap().push_forward().push_gate(h.clone()).unwrap();
        let bf = brute_force_average(&c, &c.zero_state(), 0.0, 2, Exec::Sequential).unwrap();
        let mut want = CMat::zeros(2, 2);
        want[(0, 0)] = C64::new(1.0, 0.0);
        assert!((bf.density.entries() - want).norm() < 1e-15);

        // q = 2, d = 2 on the uniform input: the four sign patterns kill the
        // coherence, leaving I/2.
        let (mut c, psi) = uniform_input(2);
        c.push_forward();
        let bf = brute_force_average(&c, &psi, 0.0, 2, Exec::Sequential).unwrap();
        assert!((bf.density.entries() - CMat::identity(2, 2) * C64::new(0.5, 0.0)).norm() < 1e-15);
        let p = run_purified(&c, &psi, DEFAULT_KEY_CAP).unwrap();
        let avg = average_density(&p, 0.0, 2, Exec::Sequential).unwrap();
        assert!((avg.density.entries() - bf.density.entries()).norm() < 1e-15);
    }

    #[test]
    fn purified_matches_brute_force() {
        let mut r = rng::stream(63);
        for (q, d, n) in [(3u32, 2usize, 3usize), (2, 3, 2)] {
            for mixed in [false, true] {
                let c = if mixed {
                    random_mixed(d, 2, n, q, &mut r).unwrap()
                } else {
                    random_forward_only(d, 2, n, q, &mut r).unwrap()
                };
                let p = run_purified(&c, &c.zero_state(), DEFAULT_KEY_CAP).unwrap();
                assert_abs_diff_eq!(p.norm_squared(), 1.0, epsilon = 1e-12);
                for eps in [0.0, 0.3, 1.0] {
                    let a = average_density(&p, eps, q, Exec::Parallel).unwrap();
                    let b = brute_force_average(&c, &c.zero_state(), eps, q, Exec::Parallel).unwrap();
                    assert!((a.density.entries() - b.density.entries()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn enumeration_guard() {
        let c = QueryCircuit::new(5, 8, 1).unwrap();
        assert!(matches!(
            brute_force_average(&c, &c.zero_state(), 0.1, 8, Exec::Sequential),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn rotation_reproduces_average() {
        let mut r = rng::stream(64);
        let c = random_forward_only(3, 2, 3, 17, &mut r).unwrap();
        let p = run_purified(&c, &c.zero_state(), DEFAULT_KEY_CAP).unwrap();
        let rot = biased_ft_rotate(&p, 0.2, 17).unwrap();
        let avg = average_density(&p, 0.2, 17, Exec::Sequential).unwrap();
        assert!((rot.density.entries() - avg.density.entries()).norm() < 1e-9);
        assert!(rot.min_retained_sq() >= 1.0 - 4.0 * 3.0 * 0.04);
        assert!(rot.error_mass() <= 4.0 * 3.0 * 0.04);
        let flat = biased_ft_rotate(&p, 0.0, 17).unwrap();
        assert!(flat.retained.iter().all(|&a| (a - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rotation_rejects_negative_keys() {
        let (mut c, psi) = uniform_input(2);
        c.push_inverse();
        let p = run_purified(&c, &psi, DEFAULT_KEY_CAP).unwrap();
        assert!(biased_ft_rotate(&p, 0.1, 5).is_err());
    }

    #[test]
    fn explicit_purification_is_basis_independent() {
        let mut r = rng::stream(65);
        let (q, d) = (3u32, 2usize);
        let c = random_mixed(d, 2, 3, q, &mut r).unwrap();
        let p = run_purified(&c, &c.zero_state(), DEFAULT_KEY_CAP).unwrap();
        let eps = 0.35;
        let big = materialize_purification(&p, eps, q).unwrap();
        let avg = average_density(&p, eps, q, Exec::Sequential).unwrap();
        let direct = partial_trace(&DensityMatrix::from_pure(&big), 1).unwrap();
        assert!((direct.entries() - avg.density.entries()).norm() < 1e-10);
        let u = UnitaryGate::new(random_unitary(9, &mut r), vec![1]).unwrap();
        let turned = crate::linalg::apply_gate(&big, &u).unwrap();
        let after = partial_trace(&DensityMatrix::from_pure(&turned), 1).unwrap();
        assert!((after.entries() - avg.density.entries()).norm() < 1e-10);
    }
}
