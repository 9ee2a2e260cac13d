//! Concrete finite-dimensional normed spaces.
//!
//! Vectors are real, except in Schatten spaces where the `d x d` matrix
//! (stored row-major as a vector of length `d^2`) may have complex entries.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMatrix};
use crate::modular::ConvexModular;

/// An element of a finite-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Vector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Vector {
    pub fn real(entries: Vec<f64>) -> Self {
        Vector::Real(entries)
    }

    pub fn complex(entries: Vec<Complex64>) -> Self {
        Vector::Complex(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector::Real(vec![0.0; dim])
    }

    /// The `i`-th coordinate unit vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector::Real(v)
    }

    pub fn dim(&self) -> usize {
        match self {
            Vector::Real(v) => v.len(),
            Vector::Complex(v) => v.len(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Vector::Complex(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Vector::Real(v) => v.iter().all(|&x| x == 0.0),
            Vector::Complex(v) => v.iter().all(|z| z.re == 0.0 && z.im == 0.0),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        let bad = match self {
            Vector::Real(v) => v.iter().position(|x| !x.is_finite()),
            Vector::Complex(v) => v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())),
        };
        match bad {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Vector::Real(v) => Some(v),
            Vector::Complex(_) => None,
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Vector::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Vector::Complex(v) => v.clone(),
        }
    }

    /// Absolute values of the entries.
    pub fn abs_entries(&self) -> Vec<f64> {
        match self {
            Vector::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Vector::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        }
    }

    /// `a * self + b * other`. Panics when the dimensions differ.
    pub fn lin_comb(&self, a: f64, other: &Vector, b: f64) -> Vector {
        assert_eq!(self.dim(), other.dim(), "lin_comb: dimension mismatch");
        match (self, other) {
            (Vector::Real(x), Vector::Real(y)) => {
                Vector::Real(x.iter().zip(y).map(|(u, v)| a * u + b * v).collect())
            }
            _ => {
                let x = self.to_complex();
                let y = other.to_complex();
                Vector::Complex(x.iter().zip(&y).map(|(u, v)| u * a + v * b).collect())
            }
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.lin_comb(1.0, other, -1.0)
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &Vector) -> Vector {
        self.lin_comb(1.0, other, t)
    }

    pub fn scale(&self, s: f64) -> Vector {
        match self {
            Vector::Real(v) => Vector::Real(v.iter().map(|x| s * x).collect()),
            Vector::Complex(v) => Vector::Complex(v.iter().map(|z| z * s).collect()),
        }
    }

    /// Coordinates `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Vector {
        match self {
            Vector::Real(v) => Vector::Real(v[start..end].to_vec()),
            Vector::Complex(v) => Vector::Complex(v[start..end].to_vec()),
        }
    }

    /// Concatenation of the parts; complex if any part is complex.
    pub fn concat(parts: &[Vector]) -> Vector {
        if parts.iter().any(Vector::is_complex) {
            Vector::Complex(parts.iter().flat_map(Vector::to_complex).collect())
        } else {
            Vector::Real(
                parts
                    .iter()
                    .flat_map(|p| p.as_real().unwrap().iter().copied())
                    .collect(),
            )
        }
    }

    /// Real pairing `sum_i w_i x_i`; only defined on real vectors.
    pub fn pair_real(&self, w: &[f64]) -> Result<f64> {
        let x = self.as_real().ok_or(Error::ComplexUnsupported)?;
        if x.len() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: w.len(),
                got: x.len(),
            });
        }
        Ok(x.iter().zip(w).map(|(a, b)| a * b).sum())
    }
}

pub type NormFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// User-supplied norm on real vectors of a fixed dimension.
#[derive(Clone)]
pub struct CustomNorm {
    pub name: String,
    pub dim: usize,
    pub norm: NormFn,
}

impl CustomNorm {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        norm: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            norm: Arc::new(norm),
        }
    }
}

impl fmt::Debug for CustomNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNorm")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CustomNorm {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && Arc::ptr_eq(&self.norm, &other.norm)
    }
}

/// Descriptor of a finite-dimensional normed space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiniteNormedSpace {
    /// `l_p^d`, `p` in `[1, inf]`.
    Lp {
        #[serde(with = "exponent_serde")]
        p: f64,
        d: usize,
    },
    /// Schatten class `S_p^d` of `d x d` matrices (ambient dimension `d^2`).
    Schatten {
        #[serde(with = "exponent_serde")]
        p: f64,
        d: usize,
    },
    Euclid { d: usize },
    /// 2-direct sum of the parts: `||(x_1, .., x_k)||^2 = sum ||x_i||^2`.
    TwoSum { parts: Vec<FiniteNormedSpace> },
    /// Space normed by the Luxemburg norm of a flat convex modular.
    Luxemburg { modular: Box<ConvexModular> },
    #[serde(skip)]
    Custom(CustomNorm),
}

impl FiniteNormedSpace {
    pub fn lp(p: f64, d: usize) -> Result<Self> {
        let s = FiniteNormedSpace::Lp { p, d };
        s.validate()?;
        Ok(s)
    }

    pub fn schatten(p: f64, d: usize) -> Result<Self> {
        let s = FiniteNormedSpace::Schatten { p, d };
        s.validate()?;
        Ok(s)
    }

    pub fn euclid(d: usize) -> Result<Self> {
        let s = FiniteNormedSpace::Euclid { d };
        s.validate()?;
        Ok(s)
    }

    pub fn two_sum(parts: Vec<FiniteNormedSpace>) -> Result<Self> {
        let s = FiniteNormedSpace::TwoSum { parts };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FiniteNormedSpace::Lp { p, d } | FiniteNormedSpace::Schatten { p, d } => {
                check_exponent(*p)?;
                if *d == 0 {
                    return Err(Error::InvalidDimension(0));
                }
                Ok(())
            }
            FiniteNormedSpace::Euclid { d } => {
                if *d == 0 {
                    return Err(Error::InvalidDimension(0));
                }
                Ok(())
            }
            FiniteNormedSpace::TwoSum { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidDimension(0));
                }
                parts.iter().try_for_each(FiniteNormedSpace::validate)
            }
            FiniteNormedSpace::Luxemburg { modular } => {
                modular.validate()?;
                modular.flat_dim().map(|_| ())
            }
            FiniteNormedSpace::Custom(c) => {
                if c.dim == 0 {
                    return Err(Error::InvalidDimension(0));
                }
                Ok(())
            }
        }
    }

    /// Ambient (coordinate) dimension: `d^2` for Schatten spaces.
    pub fn dim(&self) -> usize {
        match self {
            FiniteNormedSpace::Lp { d, .. } | FiniteNormedSpace::Euclid { d } => *d,
            FiniteNormedSpace::Schatten { d, .. } => d * d,
            FiniteNormedSpace::TwoSum { parts } => parts.iter().map(Self::dim).sum(),
            FiniteNormedSpace::Luxemburg { modular } => modular.flat_dim().unwrap_or(0),
            FiniteNormedSpace::Custom(c) => c.dim,
        }
    }

    pub fn supports_complex(&self) -> bool {
        matches!(self, FiniteNormedSpace::Schatten { .. })
    }

    /// Number of real parameters describing a vector (twice the dimension
    /// for complex Schatten matrices).
    pub fn param_dim(&self) -> usize {
        if self.supports_complex() {
            2 * self.dim()
        } else {
            self.dim()
        }
    }

    /// Inverse of [`param_dim`](Self::param_dim): real parts first, then
    /// imaginary parts.
    pub fn vector_from_params(&self, params: &[f64]) -> Vector {
        debug_assert_eq!(params.len(), self.param_dim());
        if self.supports_complex() {
            let n = self.dim();
            Vector::Complex(
                (0..n)
                    .map(|i| Complex64::new(params[i], params[n + i]))
                    .collect(),
            )
        } else {
            Vector::Real(params.to_vec())
        }
    }

    /// Real parameters of `x`, the inverse of
    /// [`vector_from_params`](Self::vector_from_params).
    pub fn vector_params(&self, x: &Vector) -> Vec<f64> {
        if self.supports_complex() {
            let z = x.to_complex();
            z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect()
        } else {
            x.to_complex().iter().map(|c| c.re).collect()
        }
    }

    /// The norm of `x`.
    pub fn norm(&self, x: &Vector) -> Result<f64> {
        let d = self.dim();
        if x.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.dim(),
            });
        }
        x.check_finite()?;
        if x.is_complex() && !self.supports_complex() {
            // A TwoSum may still contain Schatten parts.
            if !matches!(self, FiniteNormedSpace::TwoSum { .. }) {
                return Err(Error::ComplexUnsupported);
            }
        }
        self.norm_unchecked(x)
    }

    fn norm_unchecked(&self, x: &Vector) -> Result<f64> {
        match self {
            FiniteNormedSpace::Lp { p, .. } => Ok(lp_norm_of_abs(&x.abs_entries(), *p)),
            FiniteNormedSpace::Euclid { .. } => Ok(lp_norm_of_abs(&x.abs_entries(), 2.0)),
            FiniteNormedSpace::Schatten { p, d } => schatten_norm(x, *p, *d),
            FiniteNormedSpace::TwoSum { parts } => {
                let mut offset = 0;
                let mut norms = Vec::with_capacity(parts.len());
                for part in parts {
                    let k = part.dim();
                    norms.push(part.norm(&x.slice(offset, offset + k))?);
                    offset += k;
                }
                Ok(lp_norm_of_abs(&norms, 2.0))
            }
            FiniteNormedSpace::Luxemburg { modular } => {
                let point = modular.split_flat(x)?;
                crate::modular::luxemburg_norm(modular, &point)
            }
            FiniteNormedSpace::Custom(c) => {
                let v = x.as_real().ok_or(Error::ComplexUnsupported)?;
                let n = (c.norm)(v);
                if !n.is_finite() || n < 0.0 {
                    return Err(Error::Precondition(format!(
                        "custom norm '{}' returned {n}",
                        c.name
                    )));
                }
                Ok(n)
            }
        }
    }
}

/// `p`-norm of a list of nonnegative numbers, scaled by the largest entry
/// to stay clear of overflow and underflow.
pub fn lp_norm_of_abs(abs: &[f64], p: f64) -> f64 {
    let m = abs.iter().fold(0.0_f64, |acc, &a| acc.max(a));
    if m == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return m;
    }
    if p == 2.0 {
        let s: f64 = abs.iter().map(|&a| (a / m) * (a / m)).sum();
        return m * s.sqrt();
    }
    if p == 1.0 {
        return abs.iter().sum();
    }
    let s: f64 = abs.iter().map(|&a| (a / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

fn schatten_norm(x: &Vector, p: f64, d: usize) -> Result<f64> {
    // S_2 is the Frobenius norm; no decomposition needed.
    if p == 2.0 {
        return Ok(lp_norm_of_abs(&x.abs_entries(), 2.0));
    }
    let m = CMatrix::from_row_major(d, d, x.to_complex())?;
    let s = singular_values(&m)?;
    Ok(lp_norm_of_abs(&s, p))
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::ExponentOutOfRange(p));
    }
    Ok(())
}

/// Conjugate exponent `p'` with `1/p + 1/p' = 1` (`1 <-> inf`).
pub fn dual_exponent(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

/// Banach-Mazur distance between `l_p^d` and `l_2^d`: `d^{|1/2 - 1/p|}`.
pub fn banach_mazur_lp_vs_hilbert(p: f64, d: usize) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Err(Error::ExponentOutOfRange(p));
    }
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok((d as f64).powf((0.5 - 1.0 / p).abs()))
}

/// Serde helper accepting a number or the strings `"inf"`/`"infinity"`.
pub mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\", got \"{other}\""
                ))),
            },
        }
    }
}
