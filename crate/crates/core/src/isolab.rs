//! Isometric embeddings into `E0 (+)_2 H`, 2-projections and the iteration
//! `x -> P T x` that separates the two.
//!
//! Maps are real matrices between coordinate spaces. A codomain of the form
//! `TwoSum([E0, Euclid(h)])` carries the split: `P` keeps the first
//! `dim E0` coordinates and `Q` the remaining `h`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns, symmetric_eigenvalues, Matrix};
use crate::sampling::{batch_max, gaussian_vec, gaussian_vector, pick, stream_rng, structured_vectors};
use crate::spaces::{FiniteNormedSpace, Vector};

/// Default dimension of the Hilbert part `H`.
pub const DEFAULT_H_DIM: usize = 4;
/// Residual below which a 2-summand counts as found.
pub const SUMMAND_TOL: f64 = 1e-8;
/// Window of the Cauchy test on `||(PT)^n x||`.
pub const CAUCHY_LAG: usize = 5;
pub const CAUCHY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub matrix: Matrix,
    pub domain: FiniteNormedSpace,
    pub codomain: FiniteNormedSpace,
}

impl LinearMap {
    pub fn new(matrix: Matrix, domain: FiniteNormedSpace, codomain: FiniteNormedSpace) -> Result<Self> {
        domain.validate()?;
        codomain.validate()?;
        if matrix.cols() != domain.dim() || matrix.rows() != codomain.dim() {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {}x{}, spaces need {}x{}",
                matrix.rows(),
                matrix.cols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(Self {
            matrix,
            domain,
            codomain,
        })
    }

    pub fn identity(space: &FiniteNormedSpace) -> Result<Self> {
        Self::new(Matrix::identity(space.dim()), space.clone(), space.clone())
    }

    /// `x -> (U x, 0)` from `E0` into `E0 (+)_2 Euclid(h)`.
    pub fn embedding(e0: &FiniteNormedSpace, u: &Matrix, h: usize) -> Result<Self> {
        let k = e0.dim();
        if u.rows() != k || u.cols() != k {
            return Err(Error::ShapeMismatch(format!("map on E0 must be {k}x{k}")));
        }
        let mut m = Matrix::zeros(k + h, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = u[(i, j)];
            }
        }
        Self::new(m, e0.clone(), split_codomain(e0, h)?)
    }

    /// The inclusion `E0 -> E0 (+)_2 Euclid(h)`.
    pub fn inclusion(e0: &FiniteNormedSpace, h: usize) -> Result<Self> {
        Self::embedding(e0, &Matrix::identity(e0.dim()), h)
    }

    /// `(E0, h)` when the codomain is `E0 (+)_2 Euclid(h)` over the domain `E0`.
    pub fn split(&self) -> Result<(&FiniteNormedSpace, usize)> {
        if let FiniteNormedSpace::TwoSum { parts } = &self.codomain {
            if let [e0, FiniteNormedSpace::Euclid { d }] = parts.as_slice() {
                if *e0 == self.domain {
                    return Ok((e0, *d));
                }
            }
        }
        Err(Error::ShapeMismatch("codomain is not the domain (+)_2 Euclid(h)".into()))
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        match x {
            Vector::Real(v) => Vector::real(self.matrix.matvec(v)),
            Vector::Complex(z) => {
                let re: Vec<f64> = z.iter().map(|c| c.re).collect();
                let im: Vec<f64> = z.iter().map(|c| c.im).collect();
                let (re, im) = (self.matrix.matvec(&re), self.matrix.matvec(&im));
                Vector::complex(re.into_iter().zip(im).map(|(a, b)| num_complex::Complex64::new(a, b)).collect())
            }
        }
    }
}

fn split_codomain(e0: &FiniteNormedSpace, h: usize) -> Result<FiniteNormedSpace> {
    if h == 0 {
        return Err(Error::InvalidDimension(0));
    }
    FiniteNormedSpace::two_sum(vec![e0.clone(), FiniteNormedSpace::euclid(h)?])
}

/// On `E0 = E1 (+)_2 R`: the identity on `E1` and `xi0 -> first unit vector
/// of H`, as a map into `E0 (+)_2 Euclid(h)`. It is isometric but its range
/// leaves `E0`.
pub fn build_counterexample_embedding(e1: &FiniteNormedSpace, h: usize) -> Result<LinearMap> {
    let e0 = FiniteNormedSpace::two_sum(vec![e1.clone(), FiniteNormedSpace::euclid(1)?])?;
    let k = e1.dim();
    let mut m = Matrix::zeros(k + 1 + h, k + 1);
    for i in 0..k {
        m[(i, i)] = 1.0;
    }
    m[(k + 1, k)] = 1.0;
    LinearMap::new(m, e0.clone(), split_codomain(&e0, h)?)
}

/// `xi0`, the unit vector of the scalar summand of the counterexample domain.
pub fn counterexample_xi0(t: &LinearMap) -> Vector {
    let n = t.domain.dim();
    Vector::basis(n, n - 1)
}

/// Structured vectors of `space` followed by `samples` Gaussian vectors
/// (vector `i` from stream `i` of `seed`).
pub fn sample_vectors(space: &FiniteNormedSpace, samples: usize, seed: u64) -> Vec<Vector> {
    let mut out = structured_vectors(space);
    out.extend((0..samples).map(|i| gaussian_vector(space, &mut stream_rng(seed, i as u64))));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub isometric: bool,
    pub max_deviation: f64,
    pub witness: Vector,
    pub samples: usize,
}

fn relative_deviation(t: &LinearMap, x: &Vector) -> Result<f64> {
    let nx = t.domain.norm(x)?;
    if nx == 0.0 {
        return Ok(0.0);
    }
    Ok((t.codomain.norm(&t.apply(x))? - nx).abs() / nx)
}

/// `max |‖Tx‖ − ‖x‖| / ‖x‖` over structured and Gaussian samples.
pub fn is_isometric_embedding(t: &LinearMap, samples: usize, seed: u64, tol: f64) -> Result<IsometryReport> {
    let structured = structured_vectors(&t.domain);
    let mut best = None;
    for (i, x) in structured.iter().enumerate() {
        best = pick(best, Some((relative_deviation(t, x)?, i, x.clone())));
    }
    let offset = structured.len();
    let random = batch_max(seed, samples, |rng, _| {
        let x = gaussian_vector(&t.domain, rng);
        Ok((relative_deviation(t, &x)?, x))
    })?;
    best = pick(best, random.map(|(v, i, x)| (v, i + offset, x)));
    let (max_deviation, _, witness) = best.ok_or(Error::EmptySamples)?;
    Ok(IsometryReport {
        isometric: max_deviation <= tol,
        max_deviation,
        witness,
        samples: offset + samples,
    })
}

/// Rank-one projection `x -> phi(x) xi` with `||xi|| = 1`, `phi(xi) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoProjectionCandidate {
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn real_space(space: &FiniteNormedSpace) -> Result<()> {
    if space.supports_complex() {
        Err(Error::ComplexUnsupported)
    } else {
        space.validate()
    }
}

impl TwoProjectionCandidate {
    pub fn new(space: &FiniteNormedSpace, xi: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        real_space(space)?;
        if xi.len() != space.dim() || phi.len() != space.dim() {
            return Err(Error::InvalidCandidate("length differs from the dimension".into()));
        }
        let n = space.norm(&Vector::real(xi.clone()))?;
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidCandidate(format!("||xi|| = {n}")));
        }
        let f = dot(&phi, &xi);
        if (f - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidCandidate(format!("phi(xi) = {f}")));
        }
        Ok(Self { xi, phi })
    }

    /// `xi = u / ||u||`, `phi = w / <w, xi>`.
    pub fn from_directions(space: &FiniteNormedSpace, u: &[f64], w: &[f64]) -> Result<Self> {
        let n = space.norm(&Vector::real(u.to_vec()))?;
        if !(n > 0.0) {
            return Err(Error::InvalidCandidate("zero direction".into()));
        }
        let xi: Vec<f64> = u.iter().map(|v| v / n).collect();
        let f = dot(w, &xi);
        if !(f.abs() > 1e-12) {
            return Err(Error::InvalidCandidate("functional vanishes on the direction".into()));
        }
        Ok(Self {
            xi,
            phi: w.iter().map(|v| v / f).collect(),
        })
    }

    /// `|‖x‖² − (|φ(x)|² + ‖x − φ(x)ξ‖²)| / ‖x‖²`.
    pub fn defect(&self, space: &FiniteNormedSpace, x: &[f64]) -> Result<f64> {
        let nx = space.norm(&Vector::real(x.to_vec()))?;
        if nx == 0.0 {
            return Ok(0.0);
        }
        let f = dot(&self.phi, x);
        let rest: Vec<f64> = x.iter().zip(&self.xi).map(|(a, b)| a - f * b).collect();
        let nr = space.norm(&Vector::real(rest))?;
        Ok((nx * nx - (f * f + nr * nr)).abs() / (nx * nx))
    }

    /// Largest defect over a test set.
    pub fn residual(&self, space: &FiniteNormedSpace, test_set: &[Vec<f64>]) -> Result<f64> {
        test_set
            .iter()
            .try_fold(0.0f64, |m, x| Ok(m.max(self.defect(space, x)?)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledMax {
    pub value: f64,
    pub witness: Vector,
    pub samples: usize,
}

/// Largest 2-projection defect of the candidate over structured and
/// Gaussian samples.
pub fn two_projection_violation(
    space: &FiniteNormedSpace,
    cand: &TwoProjectionCandidate,
    samples: usize,
    seed: u64,
) -> Result<SampledMax> {
    let cand = TwoProjectionCandidate::new(space, cand.xi.clone(), cand.phi.clone())?;
    let xs = sample_vectors(space, samples, seed);
    let mut best = None;
    for (i, x) in xs.iter().enumerate() {
        let v = cand.defect(space, x.as_real().expect("real space"))?;
        best = pick(best, Some((v, i, x.clone())));
    }
    let (value, _, witness) = best.ok_or(Error::EmptySamples)?;
    Ok(SampledMax {
        value,
        witness,
        samples: xs.len(),
    })
}

/// The fixed test set used by the 2-summand search: structured vectors and
/// `count` Gaussian vectors.
pub fn summand_test_set(space: &FiniteNormedSpace, seed: u64, count: usize) -> Vec<Vec<f64>> {
    sample_vectors(space, count, seed)
        .into_iter()
        .map(|v| v.as_real().expect("real space").to_vec())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummandSearch {
    pub found: Option<(TwoProjectionCandidate, f64)>,
    /// Smallest residual reached by any start.
    pub floor: f64,
    pub starts: usize,
    pub test_set_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummandOptions {
    /// Random starts after the structured ones.
    pub budget: usize,
    pub max_steps: usize,
    pub test_vectors: usize,
}

impl Default for SummandOptions {
    fn default() -> Self {
        Self {
            budget: 16,
            max_steps: 200,
            test_vectors: 64,
        }
    }
}

/// Central finite-difference gradient of the norm at `u`.
fn norm_gradient(space: &FiniteNormedSpace, u: &[f64]) -> Result<Vec<f64>> {
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    let h = 1e-6 * scale;
    (0..u.len())
        .map(|i| {
            let mut a = u.to_vec();
            a[i] += h;
            let up = space.norm(&Vector::real(a.clone()))?;
            a[i] -= 2.0 * h;
            let down = space.norm(&Vector::real(a))?;
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

struct Descent<'a> {
    space: &'a FiniteNormedSpace,
    test_set: &'a [Vec<f64>],
    d: usize,
}

impl Descent<'_> {
    fn candidate(&self, params: &[f64]) -> Option<TwoProjectionCandidate> {
        TwoProjectionCandidate::from_directions(self.space, &params[..self.d], &params[self.d..]).ok()
    }

    /// Sum of squared defects over the test set.
    fn objective(&self, params: &[f64]) -> f64 {
        let Some(c) = self.candidate(params) else {
            return f64::INFINITY;
        };
        self.test_set
            .iter()
            .map(|x| c.defect(self.space, x).map_or(f64::INFINITY, |v| v * v))
            .sum()
    }

    fn run(&self, mut params: Vec<f64>, max_steps: usize) -> Option<(TwoProjectionCandidate, f64)> {
        let mut value = self.objective(&params);
        if !value.is_finite() {
            return None;
        }
        let mut t: f64 = 0.1;
        for _ in 0..max_steps {
            if value == 0.0 {
                break;
            }
            let scale = params.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
            let h = 1e-7 * scale;
            let grad: Vec<f64> = (0..params.len())
                .map(|i| {
                    let mut p = params.clone();
                    p[i] += h;
                    let up = self.objective(&p);
                    p[i] -= 2.0 * h;
                    (up - self.objective(&p)) / (2.0 * h)
                })
                .collect();
            let gnorm = dot(&grad, &grad).sqrt();
            if !(gnorm > 1e-14 && gnorm.is_finite()) {
                break;
            }
            t = (2.0 * t).min(1.0) * scale;
            let mut improved = false;
            while t > 1e-14 * scale {
                let cand: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - t * g / gnorm).collect();
                let v = self.objective(&cand);
                if v < value {
                    improved = value - v > 1e-16 * value.max(1e-300);
                    params = cand;
                    value = v;
                    break;
                }
                t *= 0.5;
            }
            t /= scale;
            if !improved {
                break;
            }
        }
        let c = self.candidate(&params)?;
        let r = c.residual(self.space, self.test_set).ok()?;
        Some((c, r))
    }
}

/// Searches for a one-dimensional 2-summand: minimizes the squared
/// 2-projection defects over `(xi, phi)` from structured starts (each
/// structured vector paired with its norming functional and with itself),
/// then `budget` random starts. Returns a candidate when its largest
/// defect is at most [`SUMMAND_TOL`]; structured starts stop at the first
/// success.
pub fn find_one_dim_two_summand(space: &FiniteNormedSpace, budget: usize, seed: u64) -> Result<SummandSearch> {
    find_one_dim_two_summand_with(
        space,
        &SummandOptions {
            budget,
            ..SummandOptions::default()
        },
        seed,
    )
}

pub fn find_one_dim_two_summand_with(
    space: &FiniteNormedSpace,
    opts: &SummandOptions,
    seed: u64,
) -> Result<SummandSearch> {
    real_space(space)?;
    if opts.budget == 0 {
        return Err(Error::Precondition("budget must be at least 1".into()));
    }
    let test_set = summand_test_set(space, seed, opts.test_vectors);
    let d = space.dim();
    let descent = Descent {
        space,
        test_set: &test_set,
        d,
    };
    let mut floor = f64::INFINITY;
    let mut starts = 0;
    for s in structured_vectors(space) {
        let s = s.as_real().expect("real space").to_vec();
        for w in [norm_gradient(space, &s)?, s.clone()] {
            let mut params = s.clone();
            params.extend(w);
            starts += 1;
            if let Some((c, r)) = descent.run(params, opts.max_steps) {
                floor = floor.min(r);
                if r <= SUMMAND_TOL {
                    return Ok(SummandSearch {
                        found: Some((c, r)),
                        floor,
                        starts,
                        test_set_size: test_set.len(),
                    });
                }
            }
        }
    }
    let results: Vec<Option<(TwoProjectionCandidate, f64)>> = (0..opts.budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed ^ 0x5eed_5eed, i as u64);
            let u = gaussian_vec(&mut rng, d);
            let mut params = u.clone();
            params.extend(norm_gradient(space, &u).ok()?);
            descent.run(params, opts.max_steps)
        })
        .collect();
    starts += opts.budget;
    let mut found = None;
    for (c, r) in results.into_iter().flatten() {
        floor = floor.min(r);
        if found.is_none() && r <= SUMMAND_TOL {
            found = Some((c, r));
        }
    }
    Ok(SummandSearch {
        found,
        floor,
        starts,
        test_set_size: test_set.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// `||(PT)^n x||` for `n = 0..=n_max`.
    pub norms: Vec<f64>,
    /// `||QT(PT)^k x||^2` for `k = 0..n_max`.
    pub residuals: Vec<f64>,
    /// `|‖x‖² − ‖(PT)^n x‖² − Σ_{k<n} ‖QT(PT)^k x‖²| / ‖x‖²` for `n = 0..=n_max`.
    pub telescoping_defects: Vec<f64>,
}

/// Iterates `z -> P T z` from `x`, recording the norms, the mass moved into
/// `H` and the defect of the telescoping identity.
pub fn pt_iterate(t: &LinearMap, x: &Vector, n_max: usize) -> Result<IterationTrace> {
    let (e0, _) = t.split()?;
    let k = e0.dim();
    let h_space = FiniteNormedSpace::euclid(t.codomain.dim() - k)?;
    let n0 = e0.norm(x)?;
    let scale = if n0 > 0.0 { n0 * n0 } else { 1.0 };
    let mut z = x.clone();
    let mut norms = vec![n0];
    let mut residuals = Vec::with_capacity(n_max);
    let mut defects = vec![0.0];
    let mut moved = 0.0;
    for _ in 0..n_max {
        let tz = t.apply(&z);
        let q = h_space.norm(&tz.slice(k, tz.dim()))?;
        z = tz.slice(0, k);
        let nz = e0.norm(&z)?;
        residuals.push(q * q);
        moved += q * q;
        norms.push(nz);
        defects.push((n0 * n0 - nz * nz - moved).abs() / scale);
    }
    Ok(IterationTrace {
        norms,
        residuals,
        telescoping_defects: defects,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleLimit {
    pub x: Vector,
    pub norm: f64,
    pub limit: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheckReport {
    pub samples: Vec<SampleLimit>,
    pub all_pass: bool,
    /// Whether the search found a one-dimensional 2-summand of `E0`; only
    /// run when every sample passes.
    pub e0_has_summand: Option<bool>,
    /// `max |‖PTx‖ − ‖Tx‖| / ‖x‖`, checked when every sample passes and `E0`
    /// has no 2-summand.
    pub range_defect: Option<f64>,
    pub range_in_e0: Option<bool>,
}

/// For each sample, whether `lim ||(PT)^n x||` (read at `n_max` after a
/// Cauchy test over the last [`CAUCHY_LAG`] steps) equals `||x||` within
/// `tol` relative.
pub fn limit_isometry_check(
    t: &LinearMap,
    samples: &[Vector],
    n_max: usize,
    tol: f64,
    summand_budget: usize,
    seed: u64,
) -> Result<LimitCheckReport> {
    if n_max < CAUCHY_LAG {
        return Err(Error::Precondition(format!("n_max must be at least {CAUCHY_LAG}")));
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut out = Vec::with_capacity(samples.len());
    for x in samples {
        let trace = pt_iterate(t, x, n_max)?;
        let (cur, prev) = (trace.norms[n_max], trace.norms[n_max - CAUCHY_LAG]);
        if (cur - prev).abs() > CAUCHY_TOL {
            return Err(Error::NonCauchy {
                n: n_max,
                current: cur,
                previous: prev,
                threshold: CAUCHY_TOL,
            });
        }
        let norm = trace.norms[0];
        out.push(SampleLimit {
            x: x.clone(),
            norm,
            limit: cur,
            passes: (cur - norm).abs() <= tol * norm.max(f64::MIN_POSITIVE),
        });
    }
    let all_pass = out.iter().all(|s| s.passes);
    let mut report = LimitCheckReport {
        samples: out,
        all_pass,
        e0_has_summand: None,
        range_defect: None,
        range_in_e0: None,
    };
    if all_pass {
        let (e0, _) = t.split()?;
        let has = find_one_dim_two_summand(e0, summand_budget, seed)?.found.is_some();
        report.e0_has_summand = Some(has);
        if !has {
            let k = e0.dim();
            let mut worst: f64 = 0.0;
            for x in samples {
                let nx = e0.norm(x)?;
                if nx == 0.0 {
                    continue;
                }
                let tx = t.apply(x);
                worst = worst.max((e0.norm(&tx.slice(0, k))? - t.codomain.norm(&tx)?).abs() / nx);
            }
            report.range_defect = Some(worst);
            report.range_in_e0 = Some(worst <= tol);
        }
    }
    Ok(report)
}

/// Numerical dimension of `T(E0) ∩ H`: the number of eigenvalues of
/// `Q_Eᵀ Q_E` at most `tol`, where the columns of `Q` are an orthonormal
/// basis of the range and `Q_E` their `E0` coordinates (each eigenvalue is
/// the squared `E0` part of a unit range vector in a principal direction).
pub fn range_intersection_dim(t: &LinearMap, tol: f64) -> Result<usize> {
    let (e0, _) = t.split()?;
    let k = e0.dim();
    let q = orthonormal_columns(&t.matrix, 1e-12);
    let r = q.len();
    let mut g = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            g[i * r + j] = dot(&q[i][..k], &q[j][..k]);
        }
    }
    let eig = symmetric_eigenvalues(g, r);
    if let Some(&v) = eig.iter().find(|&&v| v > tol && v <= 10.0 * tol) {
        return Err(Error::AmbiguousRank { value: v, tol });
    }
    Ok(eig.iter().filter(|&&v| v <= tol).count())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BlockCheckOutcome {
    /// `T` is isometric and maps the `F` part into `F`.
    Holds,
    NotIsometric { deviation: f64 },
    /// `T` is isometric but some `(0, f)` picks up an `E` component.
    Violated { max_e_component: f64 },
}

impl BlockCheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, BlockCheckOutcome::Holds)
    }
}

/// On `X = E (+) F` (any norm on the concatenated coordinates, first
/// `e_dim` of them spanning `E`), assembles `T = [[U, K], [0, V]]`, checks
/// it is isometric on samples and then that `T(0, f)` has no `E` component,
/// measured as `max |(K f)_i| / max |f_j|`.
pub fn block_isometry_check(
    space: &FiniteNormedSpace,
    e_dim: usize,
    u: &Matrix,
    k: &Matrix,
    v: &Matrix,
    samples: usize,
    seed: u64,
) -> Result<BlockCheckOutcome> {
    let f_dim = space
        .dim()
        .checked_sub(e_dim)
        .ok_or_else(|| Error::ShapeMismatch("E part larger than the space".into()))?;
    let shapes = [
        (u, e_dim, e_dim, "U"),
        (k, e_dim, f_dim, "K"),
        (v, f_dim, f_dim, "V"),
    ];
    for (m, r, c, name) in shapes {
        if m.rows() != r || m.cols() != c {
            return Err(Error::ShapeMismatch(format!("{name} must be {r}x{c}")));
        }
    }
    let t = LinearMap::new(Matrix::block(u, k, &Matrix::zeros(f_dim, e_dim), v)?, space.clone(), space.clone())?;
    let iso = is_isometric_embedding(&t, samples, seed, 1e-10)?;
    if !iso.isometric {
        return Ok(BlockCheckOutcome::NotIsometric {
            deviation: iso.max_deviation,
        });
    }
    let mut worst: f64 = 0.0;
    for x in sample_vectors(&FiniteNormedSpace::euclid(f_dim.max(1))?, samples, seed) {
        let f = x.as_real().expect("real samples");
        let scale = f.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if scale == 0.0 || f_dim == 0 {
            continue;
        }
        let kf = k.matvec(f);
        worst = worst.max(kf.iter().fold(0.0f64, |m, a| m.max(a.abs())) / scale);
    }
    Ok(if worst <= 1e-12 {
        BlockCheckOutcome::Holds
    } else {
        BlockCheckOutcome::Violated { max_e_component: worst }
    })
}
