//! Convex modulars and the Luxemburg norm they induce.
//!
//! Every modular handled here evaluates on a point `x` as a finite sum
//! `sum_i a_i^{q_i}` of powers of nonnegative weights (a norm raised to a
//! power, or per-block norms raised to the block exponent). Scaling the
//! point by `1/lambda` scales every weight, so the Luxemburg equation
//! `Theta(x/lambda) = 1` only needs the list of `(a_i, q_i)` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nakano::{self, BlockVector, ExponentSequence, NakanoSpec};
use crate::spaces::{lp_norm_of_abs, FiniteNormedSpace, Vector};

/// Relative bracket width at which the Luxemburg bisection stops.
pub const BISECTION_REL_WIDTH: f64 = 1e-13;

/// Library-wide bound on `|Theta(x / ||x||) - 1|`.
pub const LUXEMBURG_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexModular {
    /// `Theta(x) = ||x||^q`.
    Power { space: FiniteNormedSpace, q: f64 },
    /// `Theta(x) = ||x||^2`.
    Square { space: FiniteNormedSpace },
    /// `Theta(x_1, .., x_k) = sum_i Theta_i(x_i)`.
    DirectSum { parts: Vec<ConvexModular> },
    /// Nakano modular `sum_n ||x(n)||^{p_n}` of a block sequence.
    Nakano { spec: NakanoSpec },
}

/// A point of the space carrying a modular; its shape mirrors the modular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModularPoint {
    Atom(Vector),
    Blocks(BlockVector),
    Sum(Vec<ModularPoint>),
}

impl ModularPoint {
    pub fn scale(&self, s: f64) -> ModularPoint {
        match self {
            ModularPoint::Atom(v) => ModularPoint::Atom(v.scale(s)),
            ModularPoint::Blocks(b) => ModularPoint::Blocks(b.scale(s)),
            ModularPoint::Sum(parts) => ModularPoint::Sum(parts.iter().map(|p| p.scale(s)).collect()),
        }
    }
}

impl ConvexModular {
    pub fn power(space: FiniteNormedSpace, q: f64) -> Result<Self> {
        let m = ConvexModular::Power { space, q };
        m.validate()?;
        Ok(m)
    }

    pub fn square(space: FiniteNormedSpace) -> Result<Self> {
        let m = ConvexModular::Square { space };
        m.validate()?;
        Ok(m)
    }

    /// Rejects an empty list of parts.
    pub fn direct_sum(parts: Vec<ConvexModular>) -> Result<Self> {
        let m = ConvexModular::DirectSum { parts };
        m.validate()?;
        Ok(m)
    }

    pub fn nakano(spec: NakanoSpec) -> Result<Self> {
        let m = ConvexModular::Nakano { spec };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexModular::Power { space, q } => {
                if !(q.is_finite() && *q >= 1.0) {
                    return Err(Error::ExponentOutOfRange(*q));
                }
                space.validate()
            }
            ConvexModular::Square { space } => space.validate(),
            ConvexModular::DirectSum { parts } => {
                if parts.is_empty() {
                    return Err(Error::ShapeMismatch("direct sum with zero parts".into()));
                }
                parts.iter().try_for_each(ConvexModular::validate)
            }
            ConvexModular::Nakano { spec } => spec.validate(),
        }
    }

    /// `[q_min, q_max]`: the range of exponents the modular can exhibit.
    pub fn exponent_range(&self) -> Result<(f64, f64)> {
        match self {
            ConvexModular::Power { q, .. } => Ok((*q, *q)),
            ConvexModular::Square { .. } => Ok((2.0, 2.0)),
            ConvexModular::DirectSum { parts } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for part in parts {
                    let (a, b) = part.exponent_range()?;
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                Ok((lo, hi))
            }
            ConvexModular::Nakano { spec } => spec.exponents.range(),
        }
    }

    /// Coordinate count when the modular lives on a flat vector.
    pub fn flat_dim(&self) -> Result<usize> {
        match self {
            ConvexModular::Power { space, .. } | ConvexModular::Square { space } => Ok(space.dim()),
            ConvexModular::DirectSum { parts } => parts.iter().map(Self::flat_dim).sum(),
            ConvexModular::Nakano { spec } => Ok(Self::nakano_flat_blocks(spec)?.iter().sum()),
        }
    }

    /// Block dimensions of a Nakano modular read as a flat vector: only a
    /// finite explicit exponent list fixes the block count.
    fn nakano_flat_blocks(spec: &NakanoSpec) -> Result<Vec<usize>> {
        match &spec.exponents {
            ExponentSequence::Explicit { values } => {
                (1..=values.len()).map(|n| spec.block(n).map(|b| b.dim())).collect()
            }
            _ => Err(Error::Unsupported(
                "an infinite exponent family acts on block vectors; use an explicit list for flat vectors".into(),
            )),
        }
    }

    /// Splits a flat vector into the point shape expected by the modular.
    pub fn split_flat(&self, x: &Vector) -> Result<ModularPoint> {
        let d = self.flat_dim()?;
        if x.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.dim(),
            });
        }
        Ok(self.split_flat_at(x, 0).0)
    }

    fn split_flat_at(&self, x: &Vector, offset: usize) -> (ModularPoint, usize) {
        match self {
            ConvexModular::DirectSum { parts } => {
                let mut off = offset;
                let mut pts = Vec::with_capacity(parts.len());
                for part in parts {
                    let (pt, next) = part.split_flat_at(x, off);
                    pts.push(pt);
                    off = next;
                }
                (ModularPoint::Sum(pts), off)
            }
            ConvexModular::Nakano { spec } => {
                let dims = Self::nakano_flat_blocks(spec).unwrap_or_default();
                let mut off = offset;
                let mut support = Vec::with_capacity(dims.len());
                for (i, d) in dims.into_iter().enumerate() {
                    support.push((i + 1, x.slice(off, off + d)));
                    off += d;
                }
                let blocks = BlockVector::new(support).expect("indices are distinct and positive");
                (ModularPoint::Blocks(blocks), off)
            }
            _ => {
                let k = self.flat_dim().unwrap_or(0);
                (ModularPoint::Atom(x.slice(offset, offset + k)), offset + k)
            }
        }
    }

    fn shape_error(&self) -> Error {
        let kind = match self {
            ConvexModular::Power { .. } => "power",
            ConvexModular::Square { .. } => "square",
            ConvexModular::DirectSum { .. } => "direct_sum",
            ConvexModular::Nakano { .. } => "nakano",
        };
        Error::ShapeMismatch(format!("point does not match a {kind} modular"))
    }

    /// Flattened `(weight, exponent)` terms with `Theta(s x) = sum (s a)^q`.
    pub(crate) fn terms(&self, x: &ModularPoint, out: &mut Vec<(f64, f64)>) -> Result<()> {
        match (self, x) {
            (ConvexModular::Power { space, q }, ModularPoint::Atom(v)) => {
                out.push((space.norm(v)?, *q));
                Ok(())
            }
            (ConvexModular::Square { space }, ModularPoint::Atom(v)) => {
                out.push((space.norm(v)?, 2.0));
                Ok(())
            }
            (ConvexModular::DirectSum { parts }, ModularPoint::Sum(pts)) => {
                if parts.len() != pts.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "direct sum of {} parts given a point with {} parts",
                        parts.len(),
                        pts.len()
                    )));
                }
                parts.iter().zip(pts).try_for_each(|(m, p)| m.terms(p, out))
            }
            (ConvexModular::Nakano { spec }, ModularPoint::Blocks(b)) => {
                spec.check(b)?;
                for (n, v) in b.entries() {
                    out.push((spec.block(*n)?.norm(v)?, spec.exponents.at(*n)?));
                }
                Ok(())
            }
            _ => Err(self.shape_error()),
        }
    }
}

#[inline]
pub(crate) fn pow_q(a: f64, q: f64) -> f64 {
    if q == 2.0 {
        a * a
    } else if q == 1.0 {
        a
    } else {
        a.powf(q)
    }
}

/// `Theta(x)`. Direct sums are evaluated part by part, in order.
pub fn modular_eval(theta: &ConvexModular, x: &ModularPoint) -> Result<f64> {
    match (theta, x) {
        (ConvexModular::Power { space, q }, ModularPoint::Atom(v)) => Ok(pow_q(space.norm(v)?, *q)),
        (ConvexModular::Square { space }, ModularPoint::Atom(v)) => {
            let n = space.norm(v)?;
            Ok(n * n)
        }
        (ConvexModular::DirectSum { parts }, ModularPoint::Sum(pts)) => {
            if parts.len() != pts.len() {
                return Err(Error::ShapeMismatch(format!(
                    "direct sum of {} parts given a point with {} parts",
                    parts.len(),
                    pts.len()
                )));
            }
            let mut total = 0.0;
            for (m, p) in parts.iter().zip(pts) {
                total += modular_eval(m, p)?;
            }
            Ok(total)
        }
        (ConvexModular::Nakano { spec }, ModularPoint::Blocks(b)) => nakano::nakano_modular(spec, b),
        _ => Err(theta.shape_error()),
    }
}

/// `C = 2^{q_max}`, the doubling constant in `Theta(2x) <= C Theta(x)`.
pub fn delta2_constant(theta: &ConvexModular) -> Result<f64> {
    let (_, q_max) = theta.exponent_range()?;
    if !q_max.is_finite() {
        return Err(Error::ExponentOutOfRange(q_max));
    }
    Ok(2f64.powf(q_max))
}

/// Solves `sum_i (a_i / lambda)^{q_i} = 1` for `lambda > 0` (0 when every
/// weight vanishes).
pub(crate) fn solve_luxemburg(terms: &[(f64, f64)]) -> Result<f64> {
    let eval = |lambda: f64| -> f64 { terms.iter().map(|&(a, q)| pow_q(a / lambda, q)).sum() };

    let theta = eval(1.0);
    if !theta.is_finite() {
        return Err(Error::NonFiniteModular);
    }
    if theta == 0.0 {
        return Ok(0.0);
    }

    let mut q_min = f64::INFINITY;
    let mut q_max = f64::NEG_INFINITY;
    for &(a, q) in terms {
        if a > 0.0 {
            q_min = q_min.min(q);
            q_max = q_max.max(q);
        }
    }
    if q_min == q_max {
        // Homogeneous case: lambda = (sum a_i^q)^{1/q}.
        let weights: Vec<f64> = terms.iter().filter(|t| t.0 > 0.0).map(|t| t.0).collect();
        return Ok(lp_norm_of_abs(&weights, q_min));
    }

    let r1 = theta.powf(1.0 / q_max);
    let r2 = theta.powf(1.0 / q_min);
    let mut lo = r1.min(r2);
    let mut hi = r1.max(r2);
    // The bracket is exact in real arithmetic; nudge it outward if
    // rounding leaves an endpoint on the wrong side.
    for _ in 0..64 {
        if eval(lo) >= 1.0 {
            break;
        }
        lo *= 1.0 - 1e-12;
    }
    for _ in 0..64 {
        if eval(hi) <= 1.0 {
            break;
        }
        hi *= 1.0 + 1e-12;
    }

    while hi - lo > BISECTION_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Luxemburg norm `inf { lambda > 0 : Theta(x / lambda) <= 1 }`, with
/// `||0|| = 0`.
pub fn luxemburg_norm(theta: &ConvexModular, x: &ModularPoint) -> Result<f64> {
    let mut terms = Vec::new();
    theta.terms(x, &mut terms)?;
    solve_luxemburg(&terms)
}

/// `|Theta(x / ||x||) - 1|`, or 0 for `x = 0`.
pub fn luxemburg_residual(theta: &ConvexModular, x: &ModularPoint) -> Result<f64> {
    let n = luxemburg_norm(theta, x)?;
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok((modular_eval(theta, &x.scale(1.0 / n))? - 1.0).abs())
}

/// Norm of `(x, t)` in the modular sum of `theta` with the scalars carrying
/// `|t|^2`.
pub fn modular_sum_norm_with_scalar(theta: &ConvexModular, x: &ModularPoint, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite(0));
    }
    let mut terms = Vec::new();
    theta.terms(x, &mut terms)?;
    terms.push((t.abs(), 2.0));
    solve_luxemburg(&terms)
}

/// `(||x + 1||_m - 1) / (Theta(x) / 2)`, which tends to 1 as `x -> 0`.
pub fn scalar_perturbation_ratio(theta: &ConvexModular, x: &ModularPoint) -> Result<f64> {
    let value = modular_eval(theta, x)?;
    if value == 0.0 {
        return Err(Error::Precondition("Theta(x) = 0".into()));
    }
    if value > 0.1 {
        return Err(Error::Precondition(format!(
            "Theta(x) = {value} exceeds the small-argument cap 0.1"
        )));
    }
    let n = modular_sum_norm_with_scalar(theta, x, 1.0)?;
    Ok((n - 1.0) / (0.5 * value))
}
