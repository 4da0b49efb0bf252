//! Trigonometric expansions of the piecewise-linear system and the
//! Möbius-coefficient inverse decomposition.
//!
//! With `c_n(x) = √2 cos(2πnx)` and `s_n(x) = √2 sin(2πnx)`,
//!
//! ```text
//! √3 C_k = μ Σ_m c_{(2m+1)k} / (2m+1)²,   √3 S_k = μ Σ_m (-1)^m s_{(2m+1)k} / (2m+1)²,
//! ```
//!
//! with `μ = √96 / π²`. Inverting over odd harmonics with the Möbius function:
//!
//! ```text
//! c_1 = Σ_{l odd} μ(l)/l² · C̄_l,   s_1 = Σ_{l odd} (-1)^((l-1)/2) μ(l)/l² · S̄_l,
//! ```
//!
//! where `C̄_l = √3 C_l / μ` and `S̄_l = √3 S_l / μ`.

use std::collections::BTreeMap;

use crate::basis::{BasisFunction, RidgeIndex, Shape};
use crate::error::{Error, Result};
use crate::numtheory::moebius;

/// `μ = √96 / π²`.
pub fn mu_constant() -> f64 {
    96f64.sqrt() / (std::f64::consts::PI * std::f64::consts::PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    CosLike,
    SinLike,
}

/// Leading terms of the trigonometric series of a non-constant basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierExpansion {
    pub base_frequency: RidgeIndex,
    pub parity: Parity,
    /// `(2m+1, coefficient)`; the harmonic multiplies the base frequency.
    pub terms: Vec<(u64, f64)>,
}

impl FourierExpansion {
    /// Partial sum at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let t = self.base_frequency.dot(x);
        let two_pi = 2.0 * std::f64::consts::PI;
        self.terms
            .iter()
            .map(|&(h, c)| {
                let arg = two_pi * h as f64 * t;
                let wave = match self.parity {
                    Parity::CosLike => arg.cos(),
                    Parity::SinLike => arg.sin(),
                };
                c * std::f64::consts::SQRT_2 * wave
            })
            .sum()
    }

    /// `L₂` norm of the partial sum (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }
}

pub fn fourier_expansion(f: &BasisFunction, truncation: usize) -> Result<FourierExpansion> {
    let (index, parity) = match &f.shape {
        Shape::Constant => {
            return Err(Error::InvalidArgument(
                "the constant has no oscillating expansion".into(),
            ))
        }
        Shape::CosLike(a) => (a.clone(), Parity::CosLike),
        Shape::SinLike(a) => (a.clone(), Parity::SinLike),
    };
    if truncation == 0 {
        return Err(Error::InvalidArgument("truncation must be positive".into()));
    }
    let mu = mu_constant();
    let scale = if f.normalized {
        1.0
    } else {
        1.0 / crate::basis::SQRT3
    };
    let terms = (0..truncation as u64)
        .map(|m| {
            let h = 2 * m + 1;
            let sign = if parity == Parity::SinLike && m % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            (h, sign * scale * mu / (h * h) as f64)
        })
        .collect();
    Ok(FourierExpansion {
        base_frequency: index,
        parity,
        terms,
    })
}

/// Coefficients of `c_1` (or `s_1`) in the rescaled system `C̄_l` (`S̄_l`).
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionSeries {
    pub target: Parity,
    /// `(l, coefficient)` over odd `l <= L`; zero exactly when `l` is not square-free.
    pub terms: Vec<(u64, f64)>,
}

impl DecompositionSeries {
    /// The partial sum as `(coefficient, √3-normalized function)` pairs,
    /// with the `1/μ` of the rescaling folded into the coefficient.
    pub fn combination(&self) -> Vec<(f64, BasisFunction)> {
        let mu = mu_constant();
        self.terms
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|&(l, c)| {
                let f = match self.target {
                    Parity::CosLike => BasisFunction::c(l as i64),
                    Parity::SinLike => BasisFunction::s(l as i64),
                };
                (c / mu, f.expect("positive index").normalized())
            })
            .collect()
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.combination()
            .iter()
            .map(|(c, f)| c * f.value_at_1d(t))
            .sum()
    }
}

/// `χ(l) = (-1)^((l-1)/2)` for odd `l`.
fn odd_character(l: u64) -> i64 {
    if (l / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn decomposition_coefficients(target: Parity, truncation: u64) -> Result<DecompositionSeries> {
    if truncation == 0 {
        return Err(Error::InvalidArgument("truncation must be positive".into()));
    }
    let terms = (1..=truncation)
        .step_by(2)
        .map(|l| {
            let mut beta = moebius(l) as i64;
            if target == Parity::SinLike {
                beta *= odd_character(l);
            }
            (l, beta as f64 / (l * l) as f64)
        })
        .collect();
    Ok(DecompositionSeries { target, terms })
}

/// `Σ_{lm=n} β_l α_m` with `β_l = μ(l)` on odd `l` (0 on even) and `α_m` the
/// odd indicator, in exact integer arithmetic.
pub fn convolution_sum(n: u64) -> i64 {
    let mut total = 0i64;
    let mut l = 1;
    while l * l <= n {
        if n.is_multiple_of(l) {
            let m = n / l;
            total += term(l, m);
            if m != l {
                total += term(m, l);
            }
        }
        l += 1;
    }
    total
}

fn term(l: u64, m: u64) -> i64 {
    if l % 2 == 1 && m % 2 == 1 {
        moebius(l) as i64
    } else {
        0
    }
}

/// The convolution sum equals `1` at `n = 1` and `0` for `n >= 2`.
pub fn convolution_identity_check(n: u64) -> bool {
    match n {
        0 => false,
        1 => convolution_sum(1) == 1,
        _ => convolution_sum(n) == 0,
    }
}

/// Factor of the 2D tensor product `f₁(k₁x₁) f₂(k₂x₂)` with `f ∈ {c, s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Cos,
    Sin,
}

/// Ridge expansion of `f₁(k₁ x₁) f₂(k₂ x₂)` (each factor `√2 cos` or `√2 sin`)
/// truncated at odd harmonic `truncation`. Entries are
/// `(√3-normalized ridge function, coefficient)`, index-normalized and merged.
pub fn tensor_decomposition_2d(
    kinds: (Factor, Factor),
    frequencies: (u64, u64),
    truncation: u64,
) -> Result<Vec<(BasisFunction, f64)>> {
    if frequencies.0 == 0 || frequencies.1 == 0 {
        return Err(Error::InvalidArgument(
            "frequencies must be positive".into(),
        ));
    }
    if truncation == 0 {
        return Err(Error::InvalidArgument("truncation must be positive".into()));
    }
    let kinds = [kinds.0, kinds.1];
    let sin_count = kinds.iter().filter(|k| **k == Factor::Sin).count();
    let prefactor = if (sin_count / 2) % 2 == 0 { 0.5 } else { -0.5 };
    let sin_result = sin_count % 2 == 1;
    let mu = mu_constant();
    let mut merged: BTreeMap<BasisFunction, f64> = BTreeMap::new();
    for e in [[1i64, 1], [1, -1], [-1, 1], [-1, -1]] {
        let weight: i64 = kinds
            .iter()
            .zip(e)
            .filter(|(k, _)| **k == Factor::Sin)
            .map(|(_, s)| s)
            .product();
        for l in (1..=truncation).step_by(2) {
            let mut beta = moebius(l) as i64;
            if beta == 0 {
                continue;
            }
            if sin_result {
                beta *= odd_character(l);
            }
            let alpha = vec![
                l as i64 * e[0] * frequencies.0 as i64,
                l as i64 * e[1] * frequencies.1 as i64,
            ];
            let (index, flipped) = RidgeIndex::normalize(alpha)?;
            let mut coefficient = prefactor * (weight * beta) as f64
                / (l * l) as f64
                / (std::f64::consts::SQRT_2 * mu);
            let f = if sin_result {
                if flipped {
                    coefficient = -coefficient;
                }
                BasisFunction::sin(index)
            } else {
                BasisFunction::cos(index)
            };
            *merged.entry(f.normalized()).or_insert(0.0) += coefficient;
        }
    }
    Ok(merged.into_iter().filter(|(_, c)| *c != 0.0).collect())
}
