//! The Jordan-von Neumann constant
//! `a(X) = sup (||x+y||^2 + ||x-y||^2) / (2 (||x||^2 + ||y||^2))`
//! and the per-block diagnostics `alpha_n`, `beta_n` of Nakano sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::pow_q;
use crate::nakano::{nakano_modular, BlockVector, NakanoSpec};
use crate::sampling::{gaussian_vector, pick, stream_rng, structured_pairs};
use crate::spaces::{dual_exponent, FiniteNormedSpace, Vector};

/// A pair together with its ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub x: Vector,
    pub y: Vector,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JvnEstimate {
    pub lower_bound: f64,
    pub witness: WitnessPair,
    /// Structured plus random starts.
    pub starts: usize,
    pub ascent_steps: usize,
    pub evaluations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JvnOptions {
    /// Random starts, run in addition to the structured ones.
    pub budget: usize,
    pub max_steps: usize,
    /// Finite-difference step relative to the parameter scale.
    pub fd_step: f64,
}

impl Default for JvnOptions {
    fn default() -> Self {
        Self {
            budget: 64,
            max_steps: 200,
            fd_step: 1e-6,
        }
    }
}

/// `(||x+y||^2 + ||x-y||^2) / (2 (||x||^2 + ||y||^2))`.
pub fn jvn_ratio(space: &FiniteNormedSpace, x: &Vector, y: &Vector) -> Result<f64> {
    let (nx, ny) = (space.norm(x)?, space.norm(y)?);
    let den = 2.0 * (nx * nx + ny * ny);
    if den == 0.0 {
        return Err(Error::ZeroPair);
    }
    let (s, d) = (space.norm(&x.add(y))?, space.norm(&x.sub(y))?);
    Ok((s * s + d * d) / den)
}

/// `2^{2 |1/2 - 1/p|}`, an upper bound for `a(X)` whenever `X` satisfies the
/// Clarkson-type inequality at exponent `p`.
pub fn jvn_upper_bound_clarkson(p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::ExponentOutOfRange(p));
    }
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok(2f64.powf(2.0 * (0.5 - inv).abs()))
}

/// An upper bound for `a(E)`: exact for Hilbert spaces and lines, the
/// Clarkson bound for `l_p` and Schatten classes, the universal cap 2
/// otherwise.
pub fn jvn_upper_bound(space: &FiniteNormedSpace) -> Result<f64> {
    if space.dim() <= 1 {
        return Ok(1.0);
    }
    match space {
        FiniteNormedSpace::Euclid { .. } => Ok(1.0),
        FiniteNormedSpace::Lp { p, .. } | FiniteNormedSpace::Schatten { p, .. } => jvn_upper_bound_clarkson(*p),
        _ => Ok(2.0),
    }
}

struct Ascent<'a> {
    space: &'a FiniteNormedSpace,
    n: usize,
    opts: &'a JvnOptions,
}

struct StartResult {
    value: f64,
    params: Vec<f64>,
    steps: usize,
    evals: usize,
}

impl Ascent<'_> {
    fn split(&self, params: &[f64]) -> (Vector, Vector) {
        (
            self.space.vector_from_params(&params[..self.n]),
            self.space.vector_from_params(&params[self.n..]),
        )
    }

    fn eval(&self, params: &[f64]) -> f64 {
        let (x, y) = self.split(params);
        jvn_ratio(self.space, &x, &y).unwrap_or(f64::NEG_INFINITY)
    }

    /// Rescales to `||x||^2 + ||y||^2 = 1`; `None` for the zero pair.
    fn normalize(&self, params: &mut [f64]) -> Option<()> {
        let (x, y) = self.split(params);
        let nx = self.space.norm(&x).ok()?;
        let ny = self.space.norm(&y).ok()?;
        let s = (nx * nx + ny * ny).sqrt();
        if !(s > 0.0 && s.is_finite()) {
            return None;
        }
        params.iter_mut().for_each(|v| *v /= s);
        Some(())
    }

    fn run(&self, mut params: Vec<f64>) -> Option<StartResult> {
        self.normalize(&mut params)?;
        let mut value = self.eval(&params);
        let mut evals = 1;
        let mut steps = 0;
        let mut t: f64 = 1.0;
        let scale = params.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
        let h = self.opts.fd_step * scale;
        while steps < self.opts.max_steps {
            let mut grad = vec![0.0; params.len()];
            for i in 0..params.len() {
                let mut p = params.clone();
                p[i] += h;
                let up = self.eval(&p);
                p[i] -= 2.0 * h;
                let down = self.eval(&p);
                grad[i] = (up - down) / (2.0 * h);
            }
            evals += 2 * params.len();
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !(gnorm > 1e-12) || !gnorm.is_finite() {
                break;
            }
            let mut improved = false;
            t = (2.0 * t).min(1.0);
            while t > 1e-12 {
                let mut cand: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p + t * g / gnorm).collect();
                if self.normalize(&mut cand).is_some() {
                    let v = self.eval(&cand);
                    evals += 1;
                    if v > value {
                        improved = v - value > 1e-15;
                        params = cand;
                        value = v;
                        break;
                    }
                }
                t *= 0.5;
            }
            steps += 1;
            if !improved {
                break;
            }
        }
        Some(StartResult {
            value,
            params,
            steps,
            evals,
        })
    }
}

/// Multi-start local ascent for a lower bound on `a(X)` with the default
/// options and `budget` random starts.
pub fn jvn_lower_bound(space: &FiniteNormedSpace, budget: usize, seed: u64) -> Result<JvnEstimate> {
    jvn_lower_bound_with(
        space,
        &JvnOptions {
            budget,
            ..JvnOptions::default()
        },
        seed,
    )
}

/// Starts are the structured pairs, then `budget` Gaussian pairs (start `i`
/// uses stream `i` of `seed`), then the `(x+y, x-y)` transform of the best
/// pair found. Each start is normalized and improved by finite-difference
/// gradient ascent with backtracking.
pub fn jvn_lower_bound_with(space: &FiniteNormedSpace, opts: &JvnOptions, seed: u64) -> Result<JvnEstimate> {
    space.validate()?;
    if opts.budget == 0 {
        return Err(Error::Precondition("budget must be at least 1".into()));
    }
    let ascent = Ascent {
        space,
        n: space.param_dim(),
        opts,
    };
    let to_params = |x: &Vector, y: &Vector| {
        let mut p = space.vector_params(x);
        p.extend(space.vector_params(y));
        p
    };
    let mut starts: Vec<Vec<f64>> = structured_pairs(space).iter().map(|(x, y)| to_params(x, y)).collect();
    starts.extend((0..opts.budget).map(|i| {
        let mut rng = stream_rng(seed, i as u64);
        let x = gaussian_vector(space, &mut rng);
        let y = gaussian_vector(space, &mut rng);
        to_params(&x, &y)
    }));

    let results: Vec<Option<StartResult>> = starts.into_par_iter().map(|p| ascent.run(p)).collect();
    let mut steps = 0;
    let mut evals = 0;
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let count = results.len();
    for (i, r) in results.into_iter().enumerate() {
        if let Some(r) = r {
            steps += r.steps;
            evals += r.evals;
            best = pick(best, Some((r.value, i, r.params)));
        }
    }
    let (_, _, params) = best.ok_or(Error::ZeroPair)?;
    let (x, y) = ascent.split(&params);
    let transformed = to_params(&x.add(&y), &x.sub(&y));
    let mut best_params = params;
    let mut starts_used = count;
    if let Some(r) = ascent.run(transformed) {
        starts_used += 1;
        steps += r.steps;
        evals += r.evals;
        if r.value > ascent.eval(&best_params) {
            best_params = r.params;
        }
    }
    let (x, y) = ascent.split(&best_params);
    let value = jvn_ratio(space, &x, &y)?;
    Ok(JvnEstimate {
        lower_bound: value,
        witness: WitnessPair { x, y, value },
        starts: starts_used,
        ascent_steps: steps,
        evaluations: evals,
        seed,
    })
}

/// `|a(l_p^d) - a(l_{p'}^d)|` as seen by the estimator; the exact constants
/// agree by duality.
pub fn duality_gap(p: f64, d: usize, budget: usize, seed: u64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange(p));
    }
    let a = jvn_lower_bound(&FiniteNormedSpace::lp(p, d)?, budget, seed)?;
    let b = jvn_lower_bound(&FiniteNormedSpace::lp(dual_exponent(p)?, d)?, budget, seed)?;
    Ok((a.lower_bound - b.lower_bound).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    /// Block indices the entries refer to.
    pub n: Vec<usize>,
    pub exponents: Vec<f64>,
    pub jvn_values: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Bound on `alpha_k` for every index past the horizon, when certified.
    pub tail_bound: Option<f64>,
}

/// `alpha = a^{p/2} max(1, 2^{p-2})`.
pub fn alpha(p: f64, a: f64) -> f64 {
    pow_q(a, p / 2.0) * 2f64.powf(p - 2.0).max(1.0)
}

/// `alpha_n` and the suffix maxima `beta_n = max_{k >= n} alpha_k` over the
/// given horizon, for blocks numbered from 1.
pub fn alpha_beta(exponents: &[f64], jvn_values: &[f64]) -> Result<AsymptoticsReport> {
    if exponents.len() != jvn_values.len() {
        return Err(Error::LengthMismatch {
            left: exponents.len(),
            right: jvn_values.len(),
        });
    }
    if exponents.is_empty() {
        return Err(Error::EmptySamples);
    }
    for &p in exponents {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::ExponentOutOfRange(p));
        }
    }
    for &a in jvn_values {
        if !(a >= 1.0 - 1e-9 && a.is_finite()) {
            return Err(Error::Precondition(format!("constant {a} is below 1")));
        }
    }
    let alpha: Vec<f64> = exponents.iter().zip(jvn_values).map(|(&p, &a)| alpha(p, a)).collect();
    Ok(AsymptoticsReport {
        n: (1..=exponents.len()).collect(),
        exponents: exponents.to_vec(),
        jvn_values: jvn_values.to_vec(),
        beta: suffix_max(&alpha, f64::NEG_INFINITY),
        alpha,
        tail_bound: None,
    })
}

fn suffix_max(values: &[f64], tail: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut m = tail;
    for i in (0..values.len()).rev() {
        m = m.max(values[i]);
        out[i] = m;
    }
    out
}

/// `alpha_n`, `beta_n` for blocks `1..=horizon` of a Nakano sum, with the
/// block constants bounded by [`jvn_upper_bound`]. For formula exponent
/// families with `l_p`-matching or scalar blocks, `alpha_{horizon+1}` bounds
/// the whole tail (the deviation `|p_n - 2|` is nonincreasing and `alpha` is
/// monotone in it), and that certificate enters every `beta_n`.
pub fn alpha_beta_for_spec(spec: &NakanoSpec, horizon: usize) -> Result<AsymptoticsReport> {
    spec.validate()?;
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be positive".into()));
    }
    let mut exps = Vec::with_capacity(horizon);
    let mut jvn = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        exps.push(spec.exponents.at(n)?);
        jvn.push(jvn_upper_bound(&spec.block(n)?)?);
    }
    let mut report = alpha_beta(&exps, &jvn)?;
    let certified = spec.exponents.is_formula_family()
        && !matches!(spec.blocks, crate::nakano::BlockFamily::List { .. })
        && spec.exponents.deviation_nonincreasing(horizon, horizon + 1)?;
    if certified {
        let tail = alpha(
            spec.exponents.at(horizon + 1)?,
            jvn_upper_bound(&spec.block(horizon + 1)?)?,
        );
        report.beta = suffix_max(&report.alpha, tail);
        report.tail_bound = Some(tail);
    }
    Ok(report)
}

/// `(Theta(x+y) + Theta(x-y)) / (2 (Theta(x) + Theta(y)))`.
pub fn tail_parallelogram_ratio(spec: &NakanoSpec, x: &BlockVector, y: &BlockVector) -> Result<f64> {
    let den = 2.0 * (nakano_modular(spec, x)? + nakano_modular(spec, y)?);
    if den == 0.0 {
        return Err(Error::ZeroPair);
    }
    let s = nakano_modular(spec, &x.axpy(1.0, y)?)?;
    let d = nakano_modular(spec, &x.axpy(-1.0, y)?)?;
    Ok((s + d) / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDefectReport {
    pub cutoff: usize,
    pub samples: usize,
    pub max_ratio: f64,
    pub witness: (BlockVector, BlockVector),
    /// `beta_cutoff` from [`alpha_beta_for_spec`].
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSampling {
    /// Number of consecutive blocks (from the cutoff) a sample may occupy.
    pub width: usize,
    /// Horizon used for `beta`.
    pub horizon: usize,
}

impl Default for TailSampling {
    fn default() -> Self {
        Self { width: 6, horizon: 1000 }
    }
}

/// Seeded pairs supported on blocks `cutoff..cutoff+width`: Gaussian
/// blocks, each dropped with probability 1/3, with the two vectors rescaled
/// by independent factors in `[1/8, 8]`.
pub fn tail_samples(
    spec: &NakanoSpec,
    cutoff: usize,
    samples: usize,
    seed: u64,
    sampling: &TailSampling,
) -> Result<Vec<(BlockVector, BlockVector)>> {
    use rand::Rng;
    if cutoff == 0 {
        return Err(Error::InvalidSupport("block indices start at 1".into()));
    }
    let blocks: Vec<(usize, FiniteNormedSpace)> = (cutoff..cutoff + sampling.width.max(1))
        .map_while(|n| spec.block(n).ok().map(|b| (n, b)))
        .collect();
    if blocks.is_empty() {
        return Err(Error::InvalidSupport(format!("no block at index {cutoff}")));
    }
    (0..samples)
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                let scale = 2f64.powf(rng.random_range(-3.0..3.0));
                let mut support = Vec::new();
                for (n, b) in &blocks {
                    let v = gaussian_vector(b, rng);
                    if rng.random_range(0..3) != 0 {
                        support.push((*n, v.scale(scale)));
                    }
                }
                BlockVector::new(support)
            };
            let x = draw(&mut rng)?;
            let mut y = draw(&mut rng)?;
            if x.entries().is_empty() && y.entries().is_empty() {
                let (n, b) = &blocks[0];
                y = BlockVector::new(vec![(*n, crate::sampling::ones(b.dim()))])?;
            }
            Ok((x, y))
        })
        .collect()
}

/// Largest tail ratio over explicit pairs supported on blocks `>= cutoff`,
/// with `beta_cutoff` for comparison.
pub fn tail_parallelogram_defect_on(
    spec: &NakanoSpec,
    cutoff: usize,
    pairs: &[(BlockVector, BlockVector)],
    horizon: usize,
) -> Result<TailDefectReport> {
    if pairs.is_empty() {
        return Err(Error::EmptySamples);
    }
    for (x, y) in pairs {
        if let Some(n) = x.indices().chain(y.indices()).find(|&n| n < cutoff) {
            return Err(Error::InvalidSupport(format!("block {n} lies below the cutoff {cutoff}")));
        }
    }
    let ratios = pairs
        .par_iter()
        .map(|(x, y)| tail_parallelogram_ratio(spec, x, y))
        .collect::<Result<Vec<_>>>()?;
    let (max_ratio, i) = ratios
        .iter()
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |(m, j), (i, &r)| if r > m { (r, i) } else { (m, j) });
    let report = alpha_beta_for_spec(spec, horizon.max(cutoff))?;
    Ok(TailDefectReport {
        cutoff,
        samples: pairs.len(),
        max_ratio,
        witness: pairs[i].clone(),
        beta: report.beta[cutoff - 1],
    })
}

/// Seeded version of [`tail_parallelogram_defect_on`].
pub fn tail_parallelogram_defect(
    spec: &NakanoSpec,
    cutoff: usize,
    samples: usize,
    seed: u64,
) -> Result<TailDefectReport> {
    let sampling = TailSampling::default();
    let pairs = tail_samples(spec, cutoff, samples, seed, &sampling)?;
    tail_parallelogram_defect_on(spec, cutoff, &pairs, sampling.horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nakano::{BlockFamily, ExponentSequence};

    #[test]
    fn ratio_examples() {
        let e = FiniteNormedSpace::euclid(3).unwrap();
        let x = Vector::real(vec![1.0, -2.0, 0.5]);
        let y = Vector::real(vec![0.3, 0.0, 4.0]);
        assert!((jvn_ratio(&e, &x, &y).unwrap() - 1.0).abs() < 1e-15);

        let l1 = FiniteNormedSpace::lp(1.0, 2).unwrap();
        assert_eq!(jvn_ratio(&l1, &Vector::basis(2, 0), &Vector::basis(2, 1)).unwrap(), 2.0);

        let l4 = FiniteNormedSpace::lp(4.0, 2).unwrap();
        let r = jvn_ratio(&l4, &Vector::real(vec![1.0, 1.0]), &Vector::real(vec![1.0, -1.0])).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);

        let z = Vector::zeros(2);
        assert_eq!(jvn_ratio(&l4, &z, &z), Err(Error::ZeroPair));
    }

    #[test]
    fn ratio_scale_invariant() {
        let l3 = FiniteNormedSpace::lp(3.0, 3).unwrap();
        let x = Vector::real(vec![1.0, 0.2, -0.7]);
        let y = Vector::real(vec![-0.4, 1.5, 0.1]);
        let r = jvn_ratio(&l3, &x, &y).unwrap();
        for t in [-3.0, 0.01, 250.0] {
            assert!((jvn_ratio(&l3, &x.scale(t), &y.scale(t)).unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn clarkson_bound() {
        assert_eq!(jvn_upper_bound_clarkson(2.0).unwrap(), 1.0);
        assert!((jvn_upper_bound_clarkson(4.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(jvn_upper_bound_clarkson(1.0).unwrap(), 2.0);
        assert_eq!(jvn_upper_bound_clarkson(f64::INFINITY).unwrap(), 2.0);
        assert!(jvn_upper_bound_clarkson(0.5).is_err());
    }

    #[test]
    fn estimator_examples() {
        let est = jvn_lower_bound(&FiniteNormedSpace::euclid(5).unwrap(), 8, 1).unwrap();
        assert!((est.lower_bound - 1.0).abs() < 1e-9);
        let est = jvn_lower_bound(&FiniteNormedSpace::lp(1.0, 2).unwrap(), 8, 1).unwrap();
        assert!((est.lower_bound - 2.0).abs() < 1e-6);
        let l4 = FiniteNormedSpace::lp(4.0, 2).unwrap();
        let est = jvn_lower_bound(&l4, 16, 3).unwrap();
        assert!((est.lower_bound - 2f64.sqrt()).abs() < 1e-6);
        let w = &est.witness;
        assert!((jvn_ratio(&l4, &w.x, &w.y).unwrap() - w.value).abs() < 1e-10);
        assert_eq!(est, jvn_lower_bound(&l4, 16, 3).unwrap());
    }

    #[test]
    fn alpha_beta_examples() {
        let r = alpha_beta(&[2.0, 4.0], &[1.0, 2f64.sqrt()]).unwrap();
        assert_eq!(r.alpha[0], 1.0);
        assert!((r.alpha[1] - 8.0).abs() < 1e-12);
        assert_eq!(r.beta, vec![r.alpha[1], r.alpha[1]]);
        assert!(matches!(alpha_beta(&[2.0], &[1.0, 1.0]), Err(Error::LengthMismatch { .. })));
        assert!(alpha_beta(&[2.0], &[0.5]).is_err());
    }

    #[test]
    fn alpha_beta_family() {
        let spec = NakanoSpec {
            exponents: ExponentSequence::Power { a: 1.0, s: 1.0 },
            blocks: BlockFamily::LpMatching { d: 2 },
        };
        let r = alpha_beta_for_spec(&spec, 1000).unwrap();
        for n in 0..999 {
            assert!(r.beta[n + 1] <= r.beta[n]);
            assert!(r.beta[n] >= r.alpha[n]);
        }
        assert!((r.beta[9] - 2f64.powf(0.15)).abs() < 1e-12);
        assert!(r.beta[999] - 1.0 < 0.01);
        assert!(r.tail_bound.is_some());
    }

    #[test]
    fn tail_ratio_hilbert() {
        let spec = NakanoSpec {
            exponents: ExponentSequence::Constant { p: 2.0 },
            blocks: BlockFamily::Uniform {
                space: FiniteNormedSpace::euclid(2).unwrap(),
            },
        };
        let pairs = tail_samples(&spec, 3, 50, 9, &TailSampling::default()).unwrap();
        for (x, y) in &pairs {
            assert!((tail_parallelogram_ratio(&spec, x, y).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
