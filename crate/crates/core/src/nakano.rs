//! Nakano sequence spaces and Nakano direct sums at finite support.
//!
//! Exponent sequences and block families are generators evaluated at the
//! indices actually requested; vectors are always finitely supported with
//! an explicit support list. Block indices start at 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{self, pow_q, ConvexModular, ModularPoint};
use crate::spaces::{FiniteNormedSpace, Vector};

/// The exponent sequence `(p_n)_{n >= 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentSequence {
    Constant { p: f64 },
    /// `p_1, p_2, ..`; indices past the end are undefined.
    Explicit { values: Vec<f64> },
    /// `p_n = 2 + a / n^s`.
    Power { a: f64, s: f64 },
    /// `p_n = 2 + a / ln(n + b)`.
    Log { a: f64, b: f64 },
    /// `p_n = 2 + a / ln(ln(n + b))`.
    LogLog { a: f64, b: f64 },
}

impl ExponentSequence {
    pub fn is_formula_family(&self) -> bool {
        matches!(
            self,
            ExponentSequence::Power { .. } | ExponentSequence::Log { .. } | ExponentSequence::LogLog { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| if v.is_finite() { Ok(()) } else { Err(Error::ExponentOutOfRange(v)) };
        match self {
            ExponentSequence::Constant { p } => check_p(*p).map(|_| ()),
            ExponentSequence::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::Precondition("empty exponent list".into()));
                }
                values.iter().try_for_each(|&p| check_p(p).map(|_| ()))
            }
            ExponentSequence::Power { a, s } => {
                finite(*a)?;
                if !(s.is_finite() && *s > 0.0) {
                    return Err(Error::Precondition(format!("power family needs s > 0, got {s}")));
                }
                self.at(1).map(|_| ())
            }
            ExponentSequence::Log { a, b } => {
                finite(*a)?;
                if !(b.is_finite() && *b > 0.0) {
                    return Err(Error::Precondition(format!("log family needs b > 0, got {b}")));
                }
                self.at(1).map(|_| ())
            }
            ExponentSequence::LogLog { a, b } => {
                finite(*a)?;
                if !(b.is_finite() && 1.0 + b > std::f64::consts::E) {
                    return Err(Error::Precondition(format!(
                        "log-log family needs b > e - 1, got {b}"
                    )));
                }
                self.at(1).map(|_| ())
            }
        }
    }

    /// `p_n` for `n >= 1`.
    pub fn at(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidSupport("block indices start at 1".into()));
        }
        let x = n as f64;
        let p = match self {
            ExponentSequence::Constant { p } => *p,
            ExponentSequence::Explicit { values } => *values.get(n - 1).ok_or_else(|| {
                Error::InvalidSupport(format!("exponent list has {} entries, index {n} requested", values.len()))
            })?,
            ExponentSequence::Power { a, s } => 2.0 + a / x.powf(*s),
            ExponentSequence::Log { a, b } => 2.0 + a / (x + b).ln(),
            ExponentSequence::LogLog { a, b } => 2.0 + a / (x + b).ln().ln(),
        };
        check_p(p)
    }

    /// `[inf p_n, sup p_n]` over all indices. Formula families deviate from 2
    /// monotonically, so the extremes are `p_1` and the limit 2.
    pub fn range(&self) -> Result<(f64, f64)> {
        match self {
            ExponentSequence::Constant { p } => Ok((*p, *p)),
            ExponentSequence::Explicit { values } => {
                self.validate()?;
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((lo, hi))
            }
            _ => {
                let p1 = self.at(1)?;
                Ok((p1.min(2.0), p1.max(2.0)))
            }
        }
    }

    /// Whether `|p_n - 2|` is nonincreasing on `from..=to`.
    pub fn deviation_nonincreasing(&self, from: usize, to: usize) -> Result<bool> {
        let mut prev = (self.at(from)? - 2.0).abs();
        for n in (from + 1)..=to {
            let cur = (self.at(n)? - 2.0).abs();
            if cur > prev {
                return Ok(false);
            }
            prev = cur;
        }
        Ok(true)
    }
}

fn check_p(p: f64) -> Result<f64> {
    if p.is_finite() && p >= 1.0 {
        Ok(p)
    } else {
        Err(Error::ExponentOutOfRange(p))
    }
}

/// The block spaces `E_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockFamily {
    /// Scalar Nakano space: every block is one-dimensional with `|.|`.
    Scalar,
    Uniform { space: FiniteNormedSpace },
    /// `E_1, E_2, ..`; indices past the end are undefined.
    List { spaces: Vec<FiniteNormedSpace> },
    /// `E_n = l_{p_n}^d`, following the exponent sequence.
    LpMatching { d: usize },
}

/// Exponents plus block spaces of a Nakano direct sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NakanoSpec {
    pub exponents: ExponentSequence,
    pub blocks: BlockFamily,
}

impl NakanoSpec {
    pub fn scalar(exponents: ExponentSequence) -> Self {
        Self {
            exponents,
            blocks: BlockFamily::Scalar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.exponents.validate()?;
        match &self.blocks {
            BlockFamily::Scalar => Ok(()),
            BlockFamily::Uniform { space } => space.validate(),
            BlockFamily::List { spaces } => {
                if spaces.is_empty() {
                    return Err(Error::Precondition("empty block list".into()));
                }
                spaces.iter().try_for_each(FiniteNormedSpace::validate)
            }
            BlockFamily::LpMatching { d } => {
                if *d == 0 {
                    Err(Error::InvalidDimension(0))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The block space `E_n`.
    pub fn block(&self, n: usize) -> Result<FiniteNormedSpace> {
        if n == 0 {
            return Err(Error::InvalidSupport("block indices start at 1".into()));
        }
        match &self.blocks {
            BlockFamily::Scalar => Ok(FiniteNormedSpace::Euclid { d: 1 }),
            BlockFamily::Uniform { space } => Ok(space.clone()),
            BlockFamily::List { spaces } => spaces.get(n - 1).cloned().ok_or_else(|| {
                Error::InvalidSupport(format!("block list has {} entries, index {n} requested", spaces.len()))
            }),
            BlockFamily::LpMatching { d } => Ok(FiniteNormedSpace::Lp {
                p: self.exponents.at(n)?,
                d: *d,
            }),
        }
    }

    /// Checks that `x` is a valid finitely supported vector of this sum.
    pub fn check(&self, x: &BlockVector) -> Result<()> {
        let mut prev = 0;
        for (n, v) in &x.support {
            if *n <= prev {
                return Err(Error::InvalidSupport(format!(
                    "indices must be distinct, positive and increasing (saw {n} after {prev})"
                )));
            }
            prev = *n;
            let block = self.block(*n)?;
            if block.dim() != v.dim() {
                return Err(Error::InvalidSupport(format!(
                    "block {n} has dimension {}, vector has {}",
                    block.dim(),
                    v.dim()
                )));
            }
            self.exponents.at(*n)?;
        }
        Ok(())
    }

    /// A norm-one vector of block `n` (first coordinate direction, rescaled).
    pub fn unit_vector(&self, n: usize) -> Result<Vector> {
        let block = self.block(n)?;
        let e = Vector::basis(block.dim(), 0);
        let norm = block.norm(&e)?;
        Ok(e.scale(1.0 / norm))
    }

    pub fn modular(&self) -> ConvexModular {
        ConvexModular::Nakano { spec: self.clone() }
    }
}

/// Finitely supported block vector `x = sum_n e_n (x) x(n)`, kept sorted
/// by block index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVector {
    support: Vec<(usize, Vector)>,
}

impl BlockVector {
    pub fn new(mut support: Vec<(usize, Vector)>) -> Result<Self> {
        support.sort_by_key(|(n, _)| *n);
        for w in support.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSupport(format!("block {} listed twice", w[0].0)));
            }
        }
        if support.iter().any(|(n, _)| *n == 0) {
            return Err(Error::InvalidSupport("block indices start at 1".into()));
        }
        Ok(Self { support })
    }

    pub fn empty() -> Self {
        Self { support: Vec::new() }
    }

    /// Scalar block vector with value `values[i]` at block `indices[i]`.
    pub fn scalar(entries: &[(usize, f64)]) -> Result<Self> {
        Self::new(entries.iter().map(|&(n, v)| (n, Vector::real(vec![v]))).collect())
    }

    pub fn entries(&self) -> &[(usize, Vector)] {
        &self.support
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().map(|(n, _)| *n)
    }

    pub fn contains(&self, n: usize) -> bool {
        self.support.iter().any(|(m, _)| *m == n)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            support: self.support.iter().map(|(n, v)| (*n, v.scale(s))).collect(),
        }
    }

    /// `self + t * other`, merging supports.
    pub fn axpy(&self, t: f64, other: &BlockVector) -> Result<Self> {
        let mut out: Vec<(usize, Vector)> = self.support.clone();
        for (n, v) in &other.support {
            match out.iter_mut().find(|(m, _)| m == n) {
                Some((_, w)) => {
                    if w.dim() != v.dim() {
                        return Err(Error::InvalidSupport(format!("block {n} dimensions differ")));
                    }
                    *w = w.axpy(t, v);
                }
                None => out.push((*n, v.scale(t))),
            }
        }
        Self::new(out)
    }

    /// Sum of two vectors with disjoint supports.
    pub fn disjoint_sum(&self, other: &BlockVector) -> Result<Self> {
        if let Some(n) = self.indices().find(|n| other.contains(*n)) {
            return Err(Error::OverlappingSupport(n));
        }
        self.axpy(1.0, other)
    }

    /// `P_n x`: the blocks with index at most `n`.
    pub fn truncate(&self, n: usize) -> Self {
        Self {
            support: self.support.iter().filter(|(m, _)| *m <= n).cloned().collect(),
        }
    }

    /// `x - P_n x`.
    pub fn tail(&self, n: usize) -> Self {
        Self {
            support: self.support.iter().filter(|(m, _)| *m > n).cloned().collect(),
        }
    }
}

/// `Theta(x) = sum_n ||x(n)||_{E_n}^{p_n}` over the support.
pub fn nakano_modular(spec: &NakanoSpec, x: &BlockVector) -> Result<f64> {
    spec.check(x)?;
    let mut total = 0.0;
    for (n, v) in x.entries() {
        total += pow_q(spec.block(*n)?.norm(v)?, spec.exponents.at(*n)?);
    }
    Ok(total)
}

/// Luxemburg norm of the Nakano modular.
pub fn nakano_norm(spec: &NakanoSpec, x: &BlockVector) -> Result<f64> {
    modular::luxemburg_norm(&spec.modular(), &ModularPoint::Blocks(x.clone()))
}

/// `|Theta(x + y) - Theta(x) - Theta(y)|` for disjointly supported `x, y`.
pub fn disjoint_additivity_check(spec: &NakanoSpec, x: &BlockVector, y: &BlockVector) -> Result<f64> {
    let sum = x.disjoint_sum(y)?;
    let whole = nakano_modular(spec, &sum)?;
    Ok((whole - nakano_modular(spec, x)? - nakano_modular(spec, y)?).abs())
}

/// `(Theta(x + t u_n), Theta(x) + |t|^{p_n})` for a unit vector `u_n` of
/// block `n` outside the support of `x`.
pub fn weakly_null_surrogate(spec: &NakanoSpec, x: &BlockVector, t: f64, n: usize) -> Result<(f64, f64)> {
    if x.contains(n) {
        return Err(Error::OverlappingSupport(n));
    }
    let u = BlockVector::new(vec![(n, spec.unit_vector(n)?)])?;
    let moved = x.axpy(t, &u)?;
    let lhs = nakano_modular(spec, &moved)?;
    let rhs = nakano_modular(spec, x)? + pow_q(t.abs(), spec.exponents.at(n)?);
    Ok((lhs, rhs))
}

/// `(|Theta(lambda x) - |lambda|^2 Theta(x)|, max_k ||lambda|^{p_k} - |lambda|^2| Theta(x))`
/// for `x` supported on blocks `>= cutoff`; the max runs over the support.
pub fn homogeneity_defect(spec: &NakanoSpec, x: &BlockVector, lambda: f64, cutoff: usize) -> Result<(f64, f64)> {
    if let Some(n) = x.indices().find(|&n| n < cutoff) {
        return Err(Error::InvalidSupport(format!(
            "block {n} lies below the cutoff {cutoff}"
        )));
    }
    let l = lambda.abs();
    let theta = nakano_modular(spec, x)?;
    let defect = (nakano_modular(spec, &x.scale(lambda))? - l * l * theta).abs();
    let mut worst: f64 = 0.0;
    for n in x.indices() {
        worst = worst.max((pow_q(l, spec.exponents.at(n)?) - l * l).abs());
    }
    Ok((defect, worst * theta))
}

/// Terms `t_n = c^{2 p_n / |p_n - 2|}` of the hilbertian-equivalence series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NakanoTerms {
    pub c: f64,
    pub n: Vec<usize>,
    /// May underflow to 0; `log_terms` keeps the exact magnitude.
    pub terms: Vec<f64>,
    pub log_terms: Vec<f64>,
    /// Local slope of `ln t_n` against `ln n` (forward difference, backward
    /// at the last index).
    pub log_slopes: Vec<f64>,
}

fn log_term(exponents: &ExponentSequence, c: f64, n: usize) -> Result<f64> {
    let p = exponents.at(n)?;
    if p == 2.0 {
        return Err(Error::ExponentIsTwo { index: n });
    }
    Ok(2.0 * p / (p - 2.0).abs() * c.ln())
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("c must lie in (0, 1), got {c}")))
    }
}

/// The first `count` terms of `sum_n c^{2 p_n / |p_n - 2|}`.
pub fn nakano_condition_terms(exponents: &ExponentSequence, c: f64, count: usize) -> Result<NakanoTerms> {
    check_c(c)?;
    if count == 0 {
        return Err(Error::Precondition("term count must be positive".into()));
    }
    let n: Vec<usize> = (1..=count).collect();
    let log_terms = n.iter().map(|&k| log_term(exponents, c, k)).collect::<Result<Vec<_>>>()?;
    let terms = log_terms.iter().map(|l| l.exp()).collect();
    let slope = |i: usize, j: usize| (log_terms[j] - log_terms[i]) / ((n[j] as f64).ln() - (n[i] as f64).ln());
    let log_slopes = (0..count)
        .map(|i| {
            if count == 1 {
                f64::NAN
            } else if i + 1 < count {
                slope(i, i + 1)
            } else {
                slope(i - 1, i)
            }
        })
        .collect();
    Ok(NakanoTerms {
        c,
        n,
        terms,
        log_terms,
        log_slopes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum GridVerdict {
    /// Smallest grid value of `c` whose series was judged convergent.
    SomeConverges { c: f64 },
    NoneInGrid,
}

/// Tail window and decision margin for the fitted-slope series test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTestConfig {
    pub window: (usize, usize),
    /// Number of logarithmically spaced indices sampled in the window.
    pub points: usize,
    pub margin: f64,
}

impl Default for SeriesTestConfig {
    fn default() -> Self {
        Self {
            window: (1_000, 1_000_000),
            points: 64,
            margin: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVerdict {
    pub c: f64,
    pub slope: f64,
    pub verdict: SeriesVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NakanoVerdictReport {
    pub per_c: Vec<CVerdict>,
    pub overall: GridVerdict,
    pub config: SeriesTestConfig,
}

fn log_spaced(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..points)
        .map(|k| {
            let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
            (a + t * (b - a)).exp().round() as usize
        })
        .collect();
    out.dedup();
    out
}

/// Least-squares slope of `ln t_n` against `ln n` over the tail window.
pub fn fitted_log_slope(exponents: &ExponentSequence, c: f64, cfg: &SeriesTestConfig) -> Result<f64> {
    check_c(c)?;
    let (lo, hi) = cfg.window;
    if lo == 0 || hi <= lo || cfg.points < 2 {
        return Err(Error::Precondition(format!(
            "invalid window {lo}..{hi} with {} points",
            cfg.points
        )));
    }
    let idx = log_spaced(lo, hi, cfg.points);
    let xs: Vec<f64> = idx.iter().map(|&n| (n as f64).ln()).collect();
    let ys = idx.iter().map(|&n| log_term(exponents, c, n)).collect::<Result<Vec<_>>>()?;
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Heuristic convergence verdict for every `c` in the grid. A fitted slope
/// below `-(1 + margin)` reads as convergent (faster than `n^{-1}`), above
/// `-(1 - margin)` as divergent. "None in grid" is weaker than "no `c`
/// exists".
pub fn nakano_condition_verdict(
    exponents: &ExponentSequence,
    c_grid: &[f64],
    cfg: &SeriesTestConfig,
) -> Result<NakanoVerdictReport> {
    if c_grid.is_empty() {
        return Err(Error::Precondition("empty c grid".into()));
    }
    if !(cfg.margin >= 0.0 && cfg.margin < 1.0) {
        return Err(Error::Precondition(format!("margin must lie in [0, 1), got {}", cfg.margin)));
    }
    let mut per_c = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        let slope = fitted_log_slope(exponents, c, cfg)?;
        let verdict = if slope < -(1.0 + cfg.margin) {
            SeriesVerdict::Converges
        } else if slope > -(1.0 - cfg.margin) {
            SeriesVerdict::Diverges
        } else {
            SeriesVerdict::Inconclusive
        };
        per_c.push(CVerdict { c, slope, verdict });
    }
    let overall = per_c
        .iter()
        .filter(|v| v.verdict == SeriesVerdict::Converges)
        .map(|v| v.c)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))))
        .map_or(GridVerdict::NoneInGrid, |c| GridVerdict::SomeConverges { c });
    Ok(NakanoVerdictReport {
        per_c,
        overall,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_spec(values: &[f64]) -> NakanoSpec {
        NakanoSpec::scalar(ExponentSequence::Explicit { values: values.to_vec() })
    }

    #[test]
    fn modular_examples() {
        let spec = scalar_spec(&[2.0, 3.0]);
        let x = BlockVector::scalar(&[(1, 1.0), (2, 1.0)]).unwrap();
        assert_eq!(nakano_modular(&spec, &x).unwrap(), 2.0);
        assert_eq!(nakano_modular(&spec, &BlockVector::empty()).unwrap(), 0.0);

        let spec = NakanoSpec {
            exponents: ExponentSequence::Explicit { values: vec![4.0, 2.0] },
            blocks: BlockFamily::List {
                spaces: vec![FiniteNormedSpace::lp(4.0, 2).unwrap(), FiniteNormedSpace::euclid(2).unwrap()],
            },
        };
        let x = BlockVector::new(vec![(1, Vector::real(vec![1.0, 1.0]))]).unwrap();
        assert!((nakano_modular(&spec, &x).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn norm_examples() {
        let spec = NakanoSpec {
            exponents: ExponentSequence::Constant { p: 2.0 },
            blocks: BlockFamily::Uniform { space: FiniteNormedSpace::euclid(1).unwrap() },
        };
        let x = BlockVector::scalar(&[(1, 3.0), (4, 4.0)]).unwrap();
        assert!((nakano_norm(&spec, &x).unwrap() - 5.0).abs() < 1e-14);

        let spec = scalar_spec(&[2.0, 4.0]);
        let x = BlockVector::scalar(&[(1, 1.0), (2, 1.0)]).unwrap();
        assert!((nakano_norm(&spec, &x).unwrap() - 1.2720196495).abs() < 1e-10);

        let spec = NakanoSpec {
            exponents: ExponentSequence::Power { a: 1.0, s: 1.0 },
            blocks: BlockFamily::LpMatching { d: 3 },
        };
        let v = Vector::real(vec![0.5, -2.0, 1.0]);
        let x = BlockVector::new(vec![(2, v.clone())]).unwrap();
        let block = spec.block(2).unwrap();
        assert!((nakano_norm(&spec, &x).unwrap() - block.norm(&v).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn invalid_support() {
        let spec = scalar_spec(&[2.0, 3.0]);
        assert!(BlockVector::scalar(&[(1, 1.0), (1, 2.0)]).is_err());
        let far = BlockVector::scalar(&[(5, 1.0)]).unwrap();
        assert!(nakano_modular(&spec, &far).is_err());
        let wrong_dim = BlockVector::new(vec![(1, Vector::real(vec![1.0, 2.0]))]).unwrap();
        assert!(nakano_modular(&spec, &wrong_dim).is_err());
    }

    #[test]
    fn additivity() {
        let spec = NakanoSpec::scalar(ExponentSequence::Power { a: 1.0, s: 1.0 });
        let x = BlockVector::scalar(&[(1, 0.3), (3, -1.1)]).unwrap();
        let y = BlockVector::scalar(&[(2, 2.0), (5, 0.7)]).unwrap();
        assert!(disjoint_additivity_check(&spec, &x, &y).unwrap() <= 1e-12);
        assert_eq!(disjoint_additivity_check(&spec, &BlockVector::empty(), &y).unwrap(), 0.0);
        assert_eq!(
            disjoint_additivity_check(&spec, &x, &x),
            Err(Error::OverlappingSupport(1))
        );
    }

    #[test]
    fn surrogate() {
        let spec = NakanoSpec::scalar(ExponentSequence::Explicit { values: vec![3.0, 2.5, 2.5] });
        let x = BlockVector::scalar(&[(1, 0.8)]).unwrap();
        let (a, b) = weakly_null_surrogate(&spec, &x, 1.0, 2).unwrap();
        let theta = nakano_modular(&spec, &x).unwrap();
        assert!((a - (theta + 1.0)).abs() < 1e-12 && (b - (theta + 1.0)).abs() < 1e-12);
        let (a, b) = weakly_null_surrogate(&spec, &x, 0.5, 3).unwrap();
        assert!((b - theta - 0.176777).abs() < 1e-6);
        assert!((a - b).abs() < 1e-12);
        assert!(weakly_null_surrogate(&spec, &x, 0.5, 1).is_err());
    }

    #[test]
    fn homogeneity() {
        let spec = NakanoSpec::scalar(ExponentSequence::Power { a: 1.0, s: 1.0 });
        let x = BlockVector::scalar(&[(5, 0.4), (7, 1.3)]).unwrap();
        let (d, _) = homogeneity_defect(&spec, &x, -1.0, 5).unwrap();
        assert!(d < 1e-15);
        let flat = NakanoSpec::scalar(ExponentSequence::Constant { p: 2.0 });
        let (d, b) = homogeneity_defect(&flat, &x, 3.7, 1).unwrap();
        assert!(d < 1e-13 && b == 0.0);
        assert!(homogeneity_defect(&spec, &x, 2.0, 6).is_err());

        // exponents 2.2 and 2.1, Theta(x) = 1
        let spec = NakanoSpec::scalar(ExponentSequence::Explicit { values: vec![2.2, 2.1] });
        let x = BlockVector::scalar(&[(1, 0.5f64.powf(1.0 / 2.2)), (2, 0.5f64.powf(1.0 / 2.1))]).unwrap();
        let (d, b) = homogeneity_defect(&spec, &x, 2.0, 1).unwrap();
        assert!((nakano_modular(&spec, &x).unwrap() - 1.0).abs() < 1e-14);
        assert!((b - (2f64.powf(2.2) - 4.0)).abs() < 1e-12);
        assert!((b - 0.594793).abs() < 1e-6);
        assert!(d <= b + 1e-12);
    }

    #[test]
    fn terms_geometric_ratio() {
        let e = ExponentSequence::Power { a: 1.0, s: 1.0 };
        let t = nakano_condition_terms(&e, 0.5, 40).unwrap();
        for i in 10..39 {
            let ratio = (t.log_terms[i + 1] - t.log_terms[i]).exp();
            assert!((ratio - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!((t.log_terms[0] - 6.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn terms_reject_two() {
        let e = ExponentSequence::Explicit { values: vec![2.5, 2.0] };
        assert_eq!(nakano_condition_terms(&e, 0.5, 2), Err(Error::ExponentIsTwo { index: 2 }));
        assert!(nakano_condition_terms(&e, 1.5, 1).is_err());
    }

    #[test]
    fn family_ranges() {
        let e = ExponentSequence::Power { a: -0.5, s: 1.0 };
        assert_eq!(e.range().unwrap(), (1.5, 2.0));
        assert!(e.deviation_nonincreasing(1, 100).unwrap());
        assert!(ExponentSequence::Power { a: -1.5, s: 1.0 }.validate().is_err());
        assert!(ExponentSequence::LogLog { a: 1.0, b: 1.0 }.validate().is_err());
        assert!(ExponentSequence::LogLog { a: 1.0, b: 3.0 }.validate().is_ok());
    }

    #[test]
    fn truncation_tail() {
        let spec = NakanoSpec::scalar(ExponentSequence::Power { a: 1.0, s: 1.0 });
        let x = BlockVector::scalar(&[(1, 1.0), (2, 0.5), (4, 0.25)]).unwrap();
        let mut prev = f64::INFINITY;
        for n in 0..=5 {
            let t = nakano_modular(&spec, &x.tail(n)).unwrap();
            assert!(t <= prev);
            prev = t;
        }
        assert_eq!(prev, 0.0);
        assert_eq!(x.truncate(2).entries().len(), 2);
    }
}
