//! The piecewise-linear cosine/sine analogues and their ridge versions.
//!
//! `C(t) = 4|t - 1/2| - 1` and `S(t) = |2 - 4|t - 1/4|| - 1` on `[0, 1)`,
//! extended 1-periodically. A basis element is either the constant 1 or
//! `C(α·x)` / `S(α·x)` for a sign-normalized integer frequency vector `α`,
//! optionally scaled by `√3` so that it has unit `L₂` norm.
//!
//! The periodic wrap is `t - floor(t)` in double precision, so accuracy
//! degrades once `|α·x|` approaches `2⁵²`; frequencies are capped at
//! `‖α‖₁ <= 2²⁰`.

use std::fmt;

use crate::error::{Error, Result};
use crate::numtheory::is_sign_normalized;

/// Largest supported `‖α‖₁`.
pub const MAX_L1_NORM: u64 = 1 << 20;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `C` on the real line (1-periodic). NaN propagates.
#[inline]
pub fn cos_like(t: f64) -> f64 {
    let u = t - t.floor();
    if u < 0.5 {
        1.0 - 4.0 * u
    } else {
        4.0 * u - 3.0
    }
}

/// `S` on the real line (1-periodic). NaN propagates.
#[inline]
pub fn sin_like(t: f64) -> f64 {
    let u = t - t.floor();
    if u < 0.25 {
        4.0 * u
    } else if u < 0.75 {
        2.0 - 4.0 * u
    } else {
        4.0 * u - 4.0
    }
}

pub fn eval_c(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite(t));
    }
    Ok(cos_like(t))
}

pub fn eval_s(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite(t));
    }
    Ok(sin_like(t))
}

/// Nonzero integer frequency vector whose first nonzero entry is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RidgeIndex(Vec<i64>);

impl RidgeIndex {
    pub fn new(alpha: Vec<i64>) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().all(|&a| a == 0) {
            return Err(Error::ZeroVector);
        }
        if !is_sign_normalized(&alpha) {
            return Err(Error::NotNormalized(alpha));
        }
        let norm = l1_norm(&alpha);
        if norm > MAX_L1_NORM {
            return Err(Error::FrequencyTooLarge {
                norm,
                cap: MAX_L1_NORM,
            });
        }
        Ok(RidgeIndex(alpha))
    }

    /// Sign-normalizes `alpha`; the flag reports whether it was negated.
    pub fn normalize(mut alpha: Vec<i64>) -> Result<(Self, bool)> {
        let flipped = alpha
            .iter()
            .copied()
            .find(|&a| a != 0)
            .is_some_and(|a| a < 0);
        if flipped {
            alpha.iter_mut().for_each(|a| *a = -*a);
        }
        Ok((RidgeIndex::new(alpha)?, flipped))
    }

    pub fn univariate(k: i64) -> Result<Self> {
        RidgeIndex::new(vec![k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn l1_norm(&self) -> u64 {
        l1_norm(&self.0)
    }

    /// `α·x`, accumulated left to right.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &xi)| a as f64 * xi).sum()
    }
}

impl fmt::Display for RidgeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub(crate) fn l1_norm(alpha: &[i64]) -> u64 {
    alpha.iter().map(|a| a.unsigned_abs()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Constant,
    CosLike(RidgeIndex),
    SinLike(RidgeIndex),
}

/// One element of the system: the constant, `C(α·x)` or `S(α·x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisFunction {
    pub shape: Shape,
    /// `√3` factor applied (unit norm). Meaningless for the constant.
    pub normalized: bool,
}

impl BasisFunction {
    pub fn constant() -> Self {
        BasisFunction {
            shape: Shape::Constant,
            normalized: true,
        }
    }

    pub fn cos(index: RidgeIndex) -> Self {
        BasisFunction {
            shape: Shape::CosLike(index),
            normalized: false,
        }
    }

    pub fn sin(index: RidgeIndex) -> Self {
        BasisFunction {
            shape: Shape::SinLike(index),
            normalized: false,
        }
    }

    /// Univariate `C_k`.
    pub fn c(k: i64) -> Result<Self> {
        Ok(BasisFunction::cos(RidgeIndex::univariate(k)?))
    }

    /// Univariate `S_k`.
    pub fn s(k: i64) -> Result<Self> {
        Ok(BasisFunction::sin(RidgeIndex::univariate(k)?))
    }

    pub fn normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    pub fn raw(mut self) -> Self {
        self.normalized = false;
        self
    }

    pub fn index(&self) -> Option<&RidgeIndex> {
        match &self.shape {
            Shape::Constant => None,
            Shape::CosLike(a) | Shape::SinLike(a) => Some(a),
        }
    }

    /// Input dimension; `None` for the constant, which fits any dimension.
    pub fn dim(&self) -> Option<usize> {
        self.index().map(RidgeIndex::dim)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, Shape::Constant)
    }

    /// Multiplier applied on top of the raw shape.
    pub fn scale(&self) -> f64 {
        match self.shape {
            Shape::Constant => 1.0,
            _ if self.normalized => SQRT3,
            _ => 1.0,
        }
    }

    /// Evaluation without the dimension check.
    #[inline]
    pub(crate) fn value_at(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Constant => 1.0,
            Shape::CosLike(a) => self.scale() * cos_like(a.dot(x)),
            Shape::SinLike(a) => self.scale() * sin_like(a.dot(x)),
        }
    }

    /// Univariate evaluation at `t` (the function of `α t` for `d = 1`).
    #[inline]
    pub(crate) fn value_at_1d(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Constant => 1.0,
            Shape::CosLike(a) => self.scale() * cos_like(a.as_slice()[0] as f64 * t),
            Shape::SinLike(a) => self.scale() * sin_like(a.as_slice()[0] as f64 * t),
        }
    }
}

impl fmt::Display for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.normalized && !self.is_constant() {
            "sqrt3*"
        } else {
            ""
        };
        match &self.shape {
            Shape::Constant => write!(f, "const"),
            Shape::CosLike(a) => write!(f, "{prefix}C:{a}"),
            Shape::SinLike(a) => write!(f, "{prefix}S:{a}"),
        }
    }
}

/// Evaluates `f` at `x`. The constant accepts any dimension.
pub fn eval_ridge(f: &BasisFunction, x: &[f64]) -> Result<f64> {
    if let Some(d) = f.dim() {
        if d != x.len() {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
    }
    if let Some(&bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    Ok(f.value_at(x))
}

/// All `α ∈ ℤ^d` with `‖α‖_∞ <= max_inf_norm` and positive leading entry,
/// in lexicographic order.
pub fn enumerate_indices(d: usize, max_inf_norm: u32) -> Vec<RidgeIndex> {
    if d == 0 {
        return Vec::new();
    }
    let m = max_inf_norm as i64;
    let mut out = Vec::new();
    let mut current = vec![-m; d];
    loop {
        if is_sign_normalized(&current) {
            out.push(RidgeIndex(current.clone()));
        }
        // odometer increment, last coordinate fastest
        let mut pos = d;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] < m {
                current[pos] += 1;
                for c in current.iter_mut().skip(pos + 1) {
                    *c = -m;
                }
                break;
            }
        }
    }
}

/// Sorted breakpoints of `C_k` on `[0, 1]`: the points `j / (2k)`.
pub fn breakpoints_c(k: u64) -> Vec<f64> {
    assert!(k >= 1);
    let denom = (2 * k) as f64;
    (0..=2 * k).map(|j| j as f64 / denom).collect()
}

/// Sorted breakpoints of `S_k` on `[0, 1]`: `0`, the points `(2j + 1) / (4k)`, and `1`.
pub fn breakpoints_s(k: u64) -> Vec<f64> {
    assert!(k >= 1);
    let denom = (4 * k) as f64;
    let mut out = Vec::with_capacity(2 * k as usize + 2);
    out.push(0.0);
    out.extend((0..2 * k).map(|j| (2 * j + 1) as f64 / denom));
    out.push(1.0);
    out
}

/// Breakpoints of a univariate basis function on `[0, 1]`.
pub fn breakpoints(f: &BasisFunction) -> Result<Vec<f64>> {
    match &f.shape {
        Shape::Constant => Ok(vec![0.0, 1.0]),
        Shape::CosLike(a) | Shape::SinLike(a) => {
            if a.dim() != 1 {
                return Err(Error::UnsupportedDimension(a.dim()));
            }
            let k = a.as_slice()[0] as u64;
            Ok(match f.shape {
                Shape::CosLike(_) => breakpoints_c(k),
                _ => breakpoints_s(k),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_c(0.0).unwrap(), 1.0);
        assert_eq!(eval_c(0.5).unwrap(), -1.0);
        assert!(close(eval_c(2.4).unwrap(), -0.6, 1e-12));
        assert_eq!(eval_s(0.25).unwrap(), 1.0);
        assert_eq!(eval_s(0.0).unwrap(), 0.0);
        assert_eq!(eval_s(7.0 / 8.0).unwrap(), -0.5);
        assert!(eval_c(f64::NAN).is_err());
        assert!(eval_s(f64::INFINITY).is_err());
    }

    #[test]
    fn ridge_examples() {
        let c11 = BasisFunction::cos(RidgeIndex::new(vec![1, 1]).unwrap());
        assert_eq!(eval_ridge(&c11, &[0.25, 0.25]).unwrap(), -1.0);
        let s5 = BasisFunction::s(5).unwrap();
        assert!(close(eval_ridge(&s5, &[0.05]).unwrap(), 1.0, 1e-12));
        assert_eq!(
            eval_ridge(&BasisFunction::constant(), &[0.3, 0.1, 0.9]).unwrap(),
            1.0
        );
        assert!(matches!(
            eval_ridge(&c11, &[0.1]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        let n = BasisFunction::c(1).unwrap().normalized();
        assert!(close(eval_ridge(&n, &[0.0]).unwrap(), SQRT3, 0.0));
    }

    #[test]
    fn ridge_index_validation() {
        assert_eq!(RidgeIndex::new(vec![0, 0]), Err(Error::ZeroVector));
        assert!(matches!(
            RidgeIndex::new(vec![0, -1]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            RidgeIndex::new(vec![1 << 20, 1]),
            Err(Error::FrequencyTooLarge { .. })
        ));
        let (idx, flipped) = RidgeIndex::normalize(vec![0, -2, 3]).unwrap();
        assert_eq!(idx.as_slice(), &[0, 2, -3]);
        assert!(flipped);
    }

    #[test]
    fn enumerate_examples() {
        let one: Vec<Vec<i64>> = enumerate_indices(1, 3)
            .iter()
            .map(|a| a.0.clone())
            .collect();
        assert_eq!(one, vec![vec![1], vec![2], vec![3]]);
        let two: Vec<Vec<i64>> = enumerate_indices(2, 1)
            .iter()
            .map(|a| a.0.clone())
            .collect();
        assert_eq!(two, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        for m in 1..=6u32 {
            let side = 2 * m as usize + 1;
            assert_eq!(enumerate_indices(2, m).len(), (side * side - 1) / 2);
            assert_eq!(enumerate_indices(3, m).len(), (side.pow(3) - 1) / 2);
        }
    }

    #[test]
    fn enumerate_matches_brute_force() {
        let m = 2i64;
        let mut brute = Vec::new();
        for a in -m..=m {
            for b in -m..=m {
                for c in -m..=m {
                    let v = vec![a, b, c];
                    if is_sign_normalized(&v) {
                        brute.push(v);
                    }
                }
            }
        }
        brute.sort();
        let got: Vec<Vec<i64>> = enumerate_indices(3, 2).into_iter().map(|a| a.0).collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn breakpoint_examples() {
        assert_eq!(breakpoints_c(1), vec![0.0, 0.5, 1.0]);
        assert_eq!(breakpoints_s(1), vec![0.0, 0.25, 0.75, 1.0]);
        assert_eq!(breakpoints_c(2), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn periodicity_symmetry_and_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let t: f64 = rng.gen_range(-5.0..5.0);
            // one ulp of the shifted argument moves the value by at most 4 ulps
            let tol = 8.0 * f64::EPSILON * (t.abs() + 1.0);
            assert!(close(cos_like(t), cos_like(t + 1.0), tol));
            assert!(close(sin_like(t), sin_like(t + 1.0), tol));
            assert!(cos_like(t).abs() <= 1.0 && sin_like(t).abs() <= 1.0);
            assert!(close(cos_like(-t), cos_like(t), tol));
            assert!(close(sin_like(-t), -sin_like(t), tol));
            assert!(close(sin_like(t), cos_like(t - 0.25), tol));
        }
    }

    #[test]
    fn piecewise_affine_between_breakpoints() {
        for k in [1u64, 2, 3, 7, 16] {
            for (bps, f) in [
                (breakpoints_c(k), BasisFunction::c(k as i64).unwrap()),
                (breakpoints_s(k), BasisFunction::s(k as i64).unwrap()),
            ] {
                for w in bps.windows(2) {
                    let h = (w[1] - w[0]) / 64.0;
                    for i in 1..63 {
                        let x = w[0] + i as f64 * h;
                        let second =
                            f.value_at_1d(x - h) - 2.0 * f.value_at_1d(x) + f.value_at_1d(x + h);
                        assert!(second.abs() < 1e-12, "k={k} x={x} second={second}");
                    }
                }
            }
        }
    }

    #[test]
    fn mean_zero_by_breakpoint_midpoints() {
        // affine between breakpoints, so the midpoint rule per piece is exact
        for k in 1..=64u64 {
            for (bps, f) in [
                (breakpoints_c(k), BasisFunction::c(k as i64).unwrap()),
                (breakpoints_s(k), BasisFunction::s(k as i64).unwrap()),
            ] {
                let integral: f64 = bps
                    .windows(2)
                    .map(|w| (w[1] - w[0]) * f.value_at_1d(0.5 * (w[0] + w[1])))
                    .sum();
                assert!(integral.abs() < 1e-14, "k={k}");
            }
        }
    }
}
