use rand::Rng;

use crate::algorithms::reduction::{flag_gate, lift_r, uniform_reflection};
use crate::error::Result;
use crate::linalg::{random_unitary, CMat, ONE};
use crate::rng;

use super::QueryCircuit;

/// `G Q G Q … G` with Haar-random gates on `R ⊗ S` and `n` forward queries.
pub fn random_forward_only<R: Rng + ?Sized>(d: usize, aux: usize, n: usize, q: u32, rng: &mut R) -> Result<QueryCircuit> {
    random_circuit(d, aux, n, q, rng, false)
}

/// As [`random_forward_only`] but each query is forward or inverse with
/// equal probability, with at least one inverse when `n ≥ 1`.
pub fn random_mixed<R: Rng + ?Sized>(d: usize, aux: usize, n: usize, q: u32, rng: &mut R) -> Result<QueryCircuit> {
    random_circuit(d, aux, n, q, rng, true)
}

fn random_circuit<R: Rng + ?Sized>(
    d: usize,
    aux: usize,
    n: usize,
    q: u32,
    rng: &mut R,
    mixed: bool,
) -> Result<QueryCircuit> {
    let mut kinds: Vec<bool> = (0..n).map(|_| mixed && rng.random::<bool>()).collect();
    if mixed && n > 0 && !kinds.iter().any(|&k| k) {
        kinds[n - 1] = true;
    }
    let mut c = QueryCircuit::new(d, q, aux)?;
    let dim = c.dim();
    c.push_gate(random_unitary(dim, rng))?;
    for inverse in kinds {
        if inverse {
            c.push_inverse();
        } else {
            c.push_forward();
        }
        c.push_gate(random_unitary(dim, rng))?;
    }
    Ok(c)
}

/// Grover iterates on the trace-estimation preparation unitary
/// `X = Z·T†·U·T` (`aux = 2`, good flag `S = 1`): `X`, then repetitions of
/// `S_good`, `X†`, `S_0`, `X`, cut off after `n` queries. Every `X†` costs an
/// inverse query.
pub fn grover_family(d: usize, n: usize, q: u32) -> Result<QueryCircuit> {
    grover_like(d, n, q, true)
}

/// The Grover schedule of [`grover_family`] with every inverse query
/// replaced by a forward one, followed by `count` random forward-only
/// circuits of the same shape. Member `i ≥ 1` uses the stream derived from
/// `(seed, i)`.
pub fn matched_forward_family(d: usize, n: usize, q: u32, count: usize, seed: u64) -> Result<Vec<QueryCircuit>> {
    let mut out = vec![grover_like(d, n, q, false)?];
    for i in 1..=count {
        let mut r = rng::trial_stream(seed, &[i as u64]);
        out.push(random_forward_only(d, 2, n, q, &mut r)?);
    }
    Ok(out)
}

fn grover_like(d: usize, n: usize, q: u32, use_inverse: bool) -> Result<QueryCircuit> {
    let t = lift_r(&uniform_reflection(d), 2);
    let z = flag_gate(d, &[0]);
    let dim = 2 * d;
    let mut s_good = CMat::identity(dim, dim);
    let mut s_zero = CMat::identity(dim, dim);
    for r in 0..d {
        s_good[(2 * r + 1, 2 * r + 1)] = -ONE;
    }
    s_zero[(0, 0)] = -ONE;
    // X = post · U · pre, X† = pre† · U† · post†
    let pre = t.clone();
    let post = &z * t.adjoint();

    let mut c = QueryCircuit::new(d, q, 2)?;
    let mut pending = pre.clone();
    let mut made = 0;
    let mut forward_next = true;
    while made < n {
        c.push_gate(pending.clone())?;
        if forward_next {
            c.push_forward();
            // after X: S_good, then the start of X†
            pending = post.adjoint() * &s_good * &post;
        } else {
            if use_inverse {
                c.push_inverse();
            } else {
                c.push_forward();
            }
            // after X†: S_0, then the start of X
            pending = &pre * &s_zero * pre.adjoint();
        }
        made += 1;
        forward_next = !forward_next;
    }
    // finish the last X or X†
    let tail = if forward_next { pre.adjoint() } else { post };
    c.push_gate(if n == 0 { pending * pre.adjoint() } else { tail })?;
    Ok(c)
}
