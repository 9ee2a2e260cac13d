//! Seeded random streams and the structured vectors that seed every search
//! and verification suite.
//!
//! Each independent unit of work (a start, a batch, a sample) draws from its
//! own ChaCha stream keyed by `(seed, index)`, so results never depend on
//! how the work is scheduled.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::spaces::{FiniteNormedSpace, Vector};

/// Number of samples drawn from one RNG stream.
pub const BATCH_SIZE: usize = 1024;

/// The RNG for stream `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f(rng, i)` for `i in 0..count`, batch `b` drawing from stream
/// `b` of `seed`, and keeps the largest value (lowest index on ties).
/// Batches run in parallel; the result does not depend on scheduling.
pub fn batch_max<W, F>(seed: u64, count: usize, f: F) -> Result<Option<(f64, usize, W)>>
where
    W: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Result<(f64, W)> + Sync,
{
    let batches = count.div_ceil(BATCH_SIZE);
    let best = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let mut best: Option<(f64, usize, W)> = None;
            for i in (b * BATCH_SIZE)..((b + 1) * BATCH_SIZE).min(count) {
                let (v, w) = f(&mut rng, i)?;
                best = pick(best, Some((v, i, w)));
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(best.into_iter().fold(None, pick))
}

/// The larger of two candidates, preferring the lower index on ties.
pub fn pick<W>(a: Option<(f64, usize, W)>, b: Option<(f64, usize, W)>) -> Option<(f64, usize, W)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => match a.0.total_cmp(&b.0) {
            std::cmp::Ordering::Greater => Some(a),
            std::cmp::Ordering::Less => Some(b),
            std::cmp::Ordering::Equal => Some(if a.1 <= b.1 { a } else { b }),
        },
    }
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// A Gaussian vector of `space`: complex Gaussian entries for Schatten
/// matrices, real Gaussian entries otherwise.
pub fn gaussian_vector<R: Rng + ?Sized>(space: &FiniteNormedSpace, rng: &mut R) -> Vector {
    let d = space.dim();
    if space.supports_complex() {
        Vector::complex(
            (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        )
    } else {
        Vector::real(gaussian_vec(rng, d))
    }
}

pub fn ones(d: usize) -> Vector {
    Vector::real(vec![1.0; d])
}

/// `(1, -1, 1, -1, ..)`.
pub fn alternating(d: usize) -> Vector {
    Vector::real((0..d).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect())
}

/// Basis vectors, all-ones and alternating signs. For Schatten spaces the
/// basis vectors are the matrix units and ones/alternating live on the
/// diagonal.
pub fn structured_vectors(space: &FiniteNormedSpace) -> Vec<Vector> {
    let n = space.dim();
    let mut out: Vec<Vector> = (0..n).map(|i| Vector::basis(n, i)).collect();
    match space {
        FiniteNormedSpace::Schatten { d, .. } => {
            let diag = |f: &dyn Fn(usize) -> f64| {
                let mut v = vec![0.0; n];
                for i in 0..*d {
                    v[i * d + i] = f(i);
                }
                Vector::real(v)
            };
            out.push(diag(&|_| 1.0));
            if *d > 1 {
                out.push(diag(&|i| if i % 2 == 0 { 1.0 } else { -1.0 }));
            }
        }
        _ => {
            if n > 1 {
                out.push(ones(n));
                out.push(alternating(n));
            }
        }
    }
    out
}

/// Structured pairs: `(e_i, e_j)` for `i <= j`, `(ones, alternating)` and
/// `(ones, ones)`, each followed by its `(x + y, x - y)` transform.
pub fn structured_pairs(space: &FiniteNormedSpace) -> Vec<(Vector, Vector)> {
    let vs = structured_vectors(space);
    let n = space.dim();
    let mut base = Vec::new();
    for i in 0..n.min(vs.len()) {
        for j in i..n.min(vs.len()) {
            base.push((vs[i].clone(), vs[j].clone()));
        }
    }
    if vs.len() > n {
        base.push((vs[n].clone(), vs[n].clone()));
    }
    if vs.len() > n + 1 {
        base.push((vs[n].clone(), vs[n + 1].clone()));
    }
    let mut out = Vec::with_capacity(2 * base.len());
    for (x, y) in base {
        let (u, v) = (x.add(&y), x.sub(&y));
        out.push((x, y));
        if !u.is_zero() || !v.is_zero() {
            out.push((u, v));
        }
    }
    out
}
