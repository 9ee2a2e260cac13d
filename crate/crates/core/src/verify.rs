//! Sampled and grid verification of two-point inequalities.
//!
//! Every check is a [`Check`] value: it knows how to score a single
//! [`Witness`], so the worst witness of a report can always be re-evaluated.
//! Positive violations mean the inequality fails at that witness; unless
//! stated otherwise they are relative to the bounding side, with an absolute
//! floor of [`RELATIVE_FLOOR`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{modular_sum_norm_with_scalar, pow_q};
use crate::nakano::{nakano_norm, BlockVector, NakanoSpec};
use crate::sampling::{batch_max, gaussian_vector, pick, structured_pairs};
use crate::spaces::{FiniteNormedSpace, Vector};

pub const RELATIVE_FLOOR: f64 = 1e-14;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
}

/// A single input to a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Pair { x: Vector, y: Vector },
    Scalar { lambda: f64 },
    ScalarPair { x: f64, y: f64 },
}

/// An inequality with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    /// `||x+y||^2 + ||x-y||^2 >= 2 (||x||^p + ||y||^p)^{2/p}`, `p > 2`.
    ClarksonLower { space: FiniteNormedSpace, p: f64 },
    /// `||x+y||^2 + ||x-y||^2 <= 2 (||x||^p + ||y||^p)^{2/p}`, `p < 2`.
    ClarksonUpper { space: FiniteNormedSpace, p: f64 },
    /// `||x + lambda y||^p = 1 + |lambda|^p`, scored by the absolute gap.
    LpPair {
        space: FiniteNormedSpace,
        x: Vector,
        y: Vector,
        p: f64,
    },
    /// `(|x+y|^p + |x-y|^p)/2 <= ((|x+C y|^2 + |x-C y|^2)/2)^{p/2}`,
    /// `C = sqrt(p-1)`, on real scalars.
    Beckner { p: f64 },
    /// `||x+y||^2 + ||x-y||^2 <= 2 (||x||^2 + C^2 ||y||^2)`.
    TwoSmooth { space: FiniteNormedSpace, c: f64 },
    /// `(||x+y||^2 + ||x-y||^2)/2 >= max(||x||, ||y||)^2` in `S_inf^d`.
    SchattenInf { d: usize },
    /// `||x+y||^2 + ||x-y||^2 = 2 (||x||^2 + ||y||^2)`, scored by the gap
    /// relative to the right-hand side.
    Parallelogram { space: FiniteNormedSpace },
}

fn rel(excess: f64, scale: f64) -> f64 {
    excess / scale.abs().max(RELATIVE_FLOOR)
}

fn sq(a: f64) -> f64 {
    a * a
}

fn pair(w: &Witness) -> Result<(&Vector, &Vector)> {
    match w {
        Witness::Pair { x, y } => Ok((x, y)),
        _ => Err(Error::Precondition("check expects a vector pair".into())),
    }
}

/// `||x+y||^2 + ||x-y||^2`.
fn sum_sq(space: &FiniteNormedSpace, x: &Vector, y: &Vector) -> Result<f64> {
    Ok(sq(space.norm(&x.add(y))?) + sq(space.norm(&x.sub(y))?))
}

impl Check {
    pub fn violation(&self, w: &Witness) -> Result<f64> {
        match self {
            Check::ClarksonLower { space, p } | Check::ClarksonUpper { space, p } => {
                let (x, y) = pair(w)?;
                let lhs = sum_sq(space, x, y)?;
                let bound = 2.0 * pow_q(pow_q(space.norm(x)?, *p) + pow_q(space.norm(y)?, *p), 2.0 / p);
                let excess = if matches!(self, Check::ClarksonLower { .. }) {
                    bound - lhs
                } else {
                    lhs - bound
                };
                Ok(rel(excess, bound))
            }
            Check::LpPair { space, x, y, p } => {
                let Witness::Scalar { lambda } = w else {
                    return Err(Error::Precondition("lp-pair check expects a scalar".into()));
                };
                let lhs = pow_q(space.norm(&x.axpy(*lambda, y))?, *p);
                Ok((lhs - (1.0 + pow_q(lambda.abs(), *p))).abs())
            }
            Check::Beckner { p } => {
                let Witness::ScalarPair { x, y } = w else {
                    return Err(Error::Precondition("Beckner check expects a scalar pair".into()));
                };
                let c = (p - 1.0).sqrt();
                let lhs = (pow_q((x + y).abs(), *p) + pow_q((x - y).abs(), *p)) / 2.0;
                let rhs = pow_q((sq(x + c * y) + sq(x - c * y)) / 2.0, p / 2.0);
                Ok(rel(lhs - rhs, rhs))
            }
            Check::TwoSmooth { space, c } => {
                let (x, y) = pair(w)?;
                let lhs = sum_sq(space, x, y)?;
                let rhs = 2.0 * (sq(space.norm(x)?) + sq(c * space.norm(y)?));
                Ok(rel(lhs - rhs, rhs))
            }
            Check::SchattenInf { d } => {
                let (x, y) = pair(w)?;
                let space = FiniteNormedSpace::Schatten { p: f64::INFINITY, d: *d };
                let lhs = sum_sq(&space, x, y)? / 2.0;
                let bound = sq(space.norm(x)?.max(space.norm(y)?));
                Ok(rel(bound - lhs, bound))
            }
            Check::Parallelogram { space } => {
                let (x, y) = pair(w)?;
                let rhs = 2.0 * (sq(space.norm(x)?) + sq(space.norm(y)?));
                Ok(rel((sum_sq(space, x, y)? - rhs).abs(), rhs))
            }
        }
    }

    fn space(&self) -> Option<FiniteNormedSpace> {
        match self {
            Check::ClarksonLower { space, .. }
            | Check::ClarksonUpper { space, .. }
            | Check::LpPair { space, .. }
            | Check::TwoSmooth { space, .. }
            | Check::Parallelogram { space } => Some(space.clone()),
            Check::SchattenInf { d } => Some(FiniteNormedSpace::Schatten { p: f64::INFINITY, d: *d }),
            Check::Beckner { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub check: Check,
    pub samples: usize,
    pub max_violation: f64,
    pub worst_witness: Witness,
    pub tolerance: f64,
    pub seed: Option<u64>,
    pub verdict: Verdict,
}

impl ViolationReport {
    fn new(check: Check, samples: usize, best: (f64, Witness), tolerance: f64, seed: Option<u64>) -> Self {
        let verdict = if best.0 > tolerance {
            Verdict::Violated
        } else {
            Verdict::Holds
        };
        Self {
            check,
            samples,
            max_violation: best.0,
            worst_witness: best.1,
            tolerance,
            seed,
            verdict,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// Re-scores the worst witness.
    pub fn reevaluate(&self) -> Result<f64> {
        self.check.violation(&self.worst_witness)
    }
}

/// Scores `check` on the structured pairs of its space and on `samples`
/// Gaussian pairs; the second vector of a random pair is rescaled by a
/// factor `2^u`, `u` uniform in `[-3, 3]`.
pub fn run_pair_check(check: Check, samples: usize, seed: u64, tolerance: f64) -> Result<ViolationReport> {
    use rand::Rng;
    let space = check
        .space()
        .ok_or_else(|| Error::Precondition("check does not sample vector pairs".into()))?;
    let structured = structured_pairs(&space);
    let mut best: Option<(f64, usize, Witness)> = None;
    for (i, (x, y)) in structured.iter().enumerate() {
        let w = Witness::Pair {
            x: x.clone(),
            y: y.clone(),
        };
        best = pick(best, Some((check.violation(&w)?, i, w)));
    }
    let offset = structured.len();
    let random = batch_max(seed, samples, |rng, _| {
        let x = gaussian_vector(&space, rng);
        let y = gaussian_vector(&space, rng).scale(2f64.powf(rng.random_range(-3.0..3.0)));
        let w = Witness::Pair { x, y };
        Ok((check.violation(&w)?, w))
    })?;
    best = pick(best, random.map(|(v, i, w)| (v, i + offset, w)));
    let (v, _, w) = best.ok_or(Error::EmptySamples)?;
    Ok(ViolationReport::new(check, offset + samples, (v, w), tolerance, Some(seed)))
}

fn clarkson_space(space: &FiniteNormedSpace, p: f64) -> Result<()> {
    match space {
        FiniteNormedSpace::Lp { p: q, .. } | FiniteNormedSpace::Schatten { p: q, .. } if *q == p => Ok(()),
        FiniteNormedSpace::Lp { .. } | FiniteNormedSpace::Schatten { .. } => Err(Error::Precondition(format!(
            "the space exponent differs from p = {p}"
        ))),
        _ => Err(Error::Unsupported("Clarkson checks need an l_p or Schatten space".into())),
    }
}

pub fn verify_clarkson_lower(space: &FiniteNormedSpace, p: f64, samples: usize, seed: u64) -> Result<ViolationReport> {
    if !(p > 2.0) {
        return Err(Error::ExponentOutOfRange(p));
    }
    clarkson_space(space, p)?;
    run_pair_check(
        Check::ClarksonLower {
            space: space.clone(),
            p,
        },
        samples,
        seed,
        DEFAULT_TOLERANCE,
    )
}

pub fn verify_clarkson_upper(space: &FiniteNormedSpace, p: f64, samples: usize, seed: u64) -> Result<ViolationReport> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::ExponentOutOfRange(p));
    }
    clarkson_space(space, p)?;
    run_pair_check(
        Check::ClarksonUpper {
            space: space.clone(),
            p,
        },
        samples,
        seed,
        DEFAULT_TOLERANCE,
    )
}

/// `-2, -1.75, .., 2`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=16).map(|i| -2.0 + 0.25 * i as f64).collect()
}

/// Worst absolute gap `|‖x + λy‖^p − (1 + |λ|^p)|` over real `λ` in the grid.
pub fn verify_lp_pair(
    space: &FiniteNormedSpace,
    x: &Vector,
    y: &Vector,
    p: f64,
    lambda_grid: &[f64],
) -> Result<ViolationReport> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptySamples);
    }
    let nx = space.norm(x)?;
    if (nx - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("||x|| = {nx}, expected 1")));
    }
    space.norm(y)?;
    let check = Check::LpPair {
        space: space.clone(),
        x: x.clone(),
        y: y.clone(),
        p,
    };
    let mut best = None;
    for (i, &lambda) in lambda_grid.iter().enumerate() {
        let w = Witness::Scalar { lambda };
        best = pick(best, Some((check.violation(&w)?, i, w)));
    }
    let (v, _, w) = best.expect("nonempty grid");
    Ok(ViolationReport::new(check, lambda_grid.len(), (v, w), DEFAULT_TOLERANCE, None))
}

/// Evenly spaced `n x n` grid over `[lo, hi]^2`.
pub fn scalar_grid(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let at = |i: usize| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    (0..n).flat_map(|i| (0..n).map(move |j| (at(i), at(j)))).collect()
}

/// Beckner's two-point inequality on the grid (default: 401 x 401 over
/// `[-2, 2]^2`), tolerance `1e-12`.
pub fn verify_beckner(p: f64, grid: Option<&[(f64, f64)]>) -> Result<ViolationReport> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange(p));
    }
    let default;
    let grid = match grid {
        Some(g) => g,
        None => {
            default = scalar_grid(-2.0, 2.0, 401);
            &default
        }
    };
    if grid.is_empty() {
        return Err(Error::EmptySamples);
    }
    let check = Check::Beckner { p };
    let best = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let w = Witness::ScalarPair { x, y };
            Ok(Some((check.violation(&w)?, i, w)))
        })
        .try_reduce(|| None, |a, b| Ok(pick(a, b)))?;
    let (v, _, w) = best.expect("nonempty grid");
    Ok(ViolationReport::new(check, grid.len(), (v, w), 1e-12, None))
}

/// 2-uniform smoothness with constant `c` (for `l_p` and Schatten classes,
/// `c = sqrt(p-1)` suffices when `p >= 2`).
pub fn verify_2smooth(space: &FiniteNormedSpace, c: f64, samples: usize, seed: u64) -> Result<ViolationReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Precondition(format!("constant must be positive, got {c}")));
    }
    run_pair_check(
        Check::TwoSmooth {
            space: space.clone(),
            c,
        },
        samples,
        seed,
        DEFAULT_TOLERANCE,
    )
}

pub fn verify_schatten_inf(d: usize, samples: usize, seed: u64) -> Result<ViolationReport> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    run_pair_check(Check::SchattenInf { d }, samples, seed, DEFAULT_TOLERANCE)
}

pub fn verify_parallelogram(space: &FiniteNormedSpace, samples: usize, seed: u64) -> Result<ViolationReport> {
    space.validate()?;
    run_pair_check(
        Check::Parallelogram { space: space.clone() },
        samples,
        seed,
        DEFAULT_TOLERANCE,
    )
}

/// The parallelogram identity for the `p = 2` members of the scales.
pub fn verify_endpoint_2(space: &FiniteNormedSpace, samples: usize, seed: u64) -> Result<ViolationReport> {
    match space {
        FiniteNormedSpace::Lp { p, .. } | FiniteNormedSpace::Schatten { p, .. } if *p == 2.0 => {}
        FiniteNormedSpace::Euclid { .. } => {}
        FiniteNormedSpace::Lp { p, .. } | FiniteNormedSpace::Schatten { p, .. } => {
            return Err(Error::ExponentOutOfRange(*p))
        }
        _ => return Err(Error::Unsupported("endpoint check needs an l_2 or Schatten-2 space".into())),
    }
    verify_parallelogram(space, samples, seed)
}

/// `|‖x + t u_n‖ − ‖(x, t)‖|` for each block `n` of the schedule, where
/// `u_n` is a unit vector of block `n` and the second norm is taken in the
/// modular sum with the scalars carrying `|t|^2`.
pub fn weakly_null_limit_gaps(spec: &NakanoSpec, x: &BlockVector, t: f64, schedule: &[usize]) -> Result<Vec<f64>> {
    spec.check(x)?;
    if let Some(&n) = schedule.iter().find(|&&n| x.contains(n)) {
        return Err(Error::OverlappingSupport(n));
    }
    let limit = modular_sum_norm_with_scalar(&spec.modular(), &crate::modular::ModularPoint::Blocks(x.clone()), t)?;
    schedule
        .iter()
        .map(|&n| {
            let u = BlockVector::new(vec![(n, spec.unit_vector(n)?)])?;
            Ok((nakano_norm(spec, &x.axpy(t, &u)?)? - limit).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nakano::ExponentSequence;

    fn lp(p: f64, d: usize) -> FiniteNormedSpace {
        FiniteNormedSpace::lp(p, d).unwrap()
    }

    fn pw(x: &[f64], y: &[f64]) -> Witness {
        Witness::Pair {
            x: Vector::real(x.to_vec()),
            y: Vector::real(y.to_vec()),
        }
    }

    #[test]
    fn clarkson_examples() {
        let check = Check::ClarksonLower { space: lp(4.0, 2), p: 4.0 };
        let v = check.violation(&pw(&[1.0, 1.0], &[1.0, -1.0])).unwrap();
        // 2 (||x||^4 + ||y||^4)^{1/2} with ||x||^4 = ||y||^4 = 2
        let rhs = 4.0;
        assert!((v - (rhs - 8.0) / rhs).abs() < 1e-12);

        let check = Check::ClarksonLower { space: lp(3.0, 2), p: 3.0 };
        let v = check.violation(&pw(&[1.0, 0.0], &[1.0, 0.0])).unwrap();
        assert!((v - (2f64.powf(1.0 + 2.0 / 3.0) - 4.0) / 2f64.powf(1.0 + 2.0 / 3.0)).abs() < 1e-12);

        let check = Check::ClarksonUpper { space: lp(1.0, 2), p: 1.0 };
        assert_eq!(check.violation(&pw(&[1.0, 0.0], &[0.0, 1.0])).unwrap(), 0.0);

        let r = verify_clarkson_lower(&lp(3.0, 5), 3.0, 2000, 42).unwrap();
        assert!(r.holds() && r.max_violation <= 1e-12);
        assert_eq!(r.reevaluate().unwrap(), r.max_violation);
        assert!(verify_clarkson_lower(&lp(2.0, 2), 2.0, 10, 0).is_err());
        assert!(verify_clarkson_upper(&lp(2.0, 2), 2.0, 10, 0).is_err());
    }

    #[test]
    fn lp_pair_examples() {
        let grid = default_lambda_grid();
        let (e1, e2) = (Vector::basis(2, 0), Vector::basis(2, 1));
        for p in [1.5, 2.0, 2.5, 4.0] {
            let r = verify_lp_pair(&lp(p, 2), &e1, &e2, p, &grid).unwrap();
            assert!(r.max_violation <= 1e-12, "{p}");
        }
        let r = verify_lp_pair(&lp(4.0, 2), &e1, &e1, 4.0, &grid).unwrap();
        assert!(!r.holds());
        assert!((r.max_violation - 64.0).abs() < 1e-12);
        assert_eq!(r.worst_witness, Witness::Scalar { lambda: 2.0 });
        assert!((r.check.violation(&Witness::Scalar { lambda: 1.0 }).unwrap() - 14.0).abs() < 1e-12);
        assert!(verify_lp_pair(&lp(4.0, 2), &e1.scale(2.0), &e2, 4.0, &grid).is_err());
    }

    #[test]
    fn beckner_examples() {
        let check = Check::Beckner { p: 4.0 };
        let v = check.violation(&Witness::ScalarPair { x: 1.0, y: 1.0 }).unwrap();
        assert!((v - (8.0 - 16.0) / 16.0).abs() < 1e-12);
        let r = verify_beckner(2.0, None).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert_eq!(r.samples, 401 * 401);
        assert!(verify_beckner(1.5, None).is_err());
    }

    #[test]
    fn two_smooth_examples() {
        let r = verify_2smooth(&FiniteNormedSpace::euclid(3).unwrap(), 1.0, 500, 1).unwrap();
        assert!(r.max_violation.abs() <= 1e-12);
        let r = verify_2smooth(&lp(4.0, 3), 0.5 * 3f64.sqrt(), 100, 1).unwrap();
        assert!(!r.holds());
    }

    #[test]
    fn schatten_inf_examples() {
        let check = Check::SchattenInf { d: 2 };
        let v = check.violation(&pw(&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(v.abs() < 1e-12);
        let v = check.violation(&pw(&[1.0, 2.0, 0.0, 1.0], &[1.0, 2.0, 0.0, 1.0])).unwrap();
        assert!(v < 0.0);
    }

    #[test]
    fn parallelogram_examples() {
        let r = verify_parallelogram(&lp(4.0, 2), 200, 3).unwrap();
        assert!(!r.holds());
        assert!((r.max_violation - (2f64.sqrt() - 1.0)).abs() < 1e-9);
        let check = Check::Parallelogram { space: lp(4.0, 2) };
        let v = check.violation(&pw(&[1.0, 1.0], &[1.0, -1.0])).unwrap();
        assert!((v * 4.0 * 2f64.sqrt() - (8.0 - 4.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(verify_parallelogram(&FiniteNormedSpace::euclid(4).unwrap(), 500, 3).unwrap().holds());
        assert!(verify_endpoint_2(&lp(3.0, 2), 10, 0).is_err());
        let s2 = FiniteNormedSpace::schatten(2.0, 2).unwrap();
        assert!(verify_endpoint_2(&s2, 500, 0).unwrap().max_violation <= 1e-10);
    }

    #[test]
    fn limit_gaps() {
        let spec = NakanoSpec::scalar(ExponentSequence::Power { a: 1.0, s: 1.0 });
        let x = BlockVector::scalar(&[(1, 1.0)]).unwrap();
        let gaps = weakly_null_limit_gaps(&spec, &x, 1.0, &[5, 10, 20, 40]).unwrap();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        let zero = weakly_null_limit_gaps(&spec, &x, 0.0, &[5, 10]).unwrap();
        assert!(zero.iter().all(|&g| g == 0.0));
        assert!(weakly_null_limit_gaps(&spec, &x, 1.0, &[1]).is_err());
    }
}
