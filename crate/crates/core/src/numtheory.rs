//! Exact integer primitives: gcd, 2-adic valuation, the Möbius function,
//! primitive directions of integer vectors, odd-ratio detection for
//! co-linear frequency vectors, and partial Euler products.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// Sieve bound of the shared Möbius table.
pub const DEFAULT_MOEBIUS_BOUND: usize = 1_000_000;

/// Prime bounds up to this value are evaluated in exact rational arithmetic.
pub const EXACT_EULER_BOUND: u64 = 10_000;

pub fn gcd(mut i: u64, mut j: u64) -> u64 {
    while j != 0 {
        let r = i % j;
        i = j;
        j = r;
    }
    i
}

/// Largest `e` with `2^e | n`. `n` must be positive.
pub fn two_adic_valuation(n: u64) -> u32 {
    debug_assert!(n > 0);
    n.trailing_zeros()
}

/// Precomputed Möbius values on `1..=bound`, filled by a linear sieve.
#[derive(Debug, Clone)]
pub struct MoebiusTable {
    values: Vec<i8>,
}

impl MoebiusTable {
    pub fn new(bound: usize) -> Self {
        let mut values = vec![0i8; bound + 1];
        let mut composite = vec![false; bound + 1];
        let mut primes: Vec<usize> = Vec::new();
        if bound >= 1 {
            values[1] = 1;
        }
        for i in 2..=bound {
            if !composite[i] {
                primes.push(i);
                values[i] = -1;
            }
            for &p in &primes {
                let ip = i * p;
                if ip > bound {
                    break;
                }
                composite[ip] = true;
                if i % p == 0 {
                    values[ip] = 0;
                    break;
                }
                values[ip] = -values[i];
            }
        }
        MoebiusTable { values }
    }

    pub fn bound(&self) -> usize {
        self.values.len() - 1
    }

    /// μ(n), falling back to trial division above the sieve bound.
    pub fn get(&self, n: u64) -> i8 {
        assert!(n >= 1, "moebius is defined for n >= 1");
        match self.values.get(n as usize) {
            Some(&v) if n as usize <= self.bound() => v,
            _ => moebius_by_factorization(n),
        }
    }
}

fn shared_table() -> &'static MoebiusTable {
    static TABLE: OnceLock<MoebiusTable> = OnceLock::new();
    TABLE.get_or_init(|| MoebiusTable::new(DEFAULT_MOEBIUS_BOUND))
}

/// Möbius function μ(n) for `n >= 1`.
pub fn moebius(n: u64) -> i8 {
    shared_table().get(n)
}

/// μ(n) by trial-division factorization.
pub fn moebius_by_factorization(mut n: u64) -> i8 {
    assert!(n >= 1, "moebius is defined for n >= 1");
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// A nonzero integer vector written as `content * direction`, where
/// `direction` has content 1 and a positive first nonzero entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimitiveDecomposition {
    pub direction: Vec<i64>,
    pub content: u64,
    /// The input had a negative leading entry and was negated.
    pub flipped: bool,
}

pub fn primitive_decompose(alpha: &[i64]) -> Result<PrimitiveDecomposition> {
    let lead = alpha
        .iter()
        .copied()
        .find(|&a| a != 0)
        .ok_or(Error::ZeroVector)?;
    let flipped = lead < 0;
    let content = alpha.iter().fold(0u64, |g, &a| gcd(g, a.unsigned_abs()));
    let c = content as i64;
    let direction = alpha
        .iter()
        .map(|&a| if flipped { -a / c } else { a / c })
        .collect();
    Ok(PrimitiveDecomposition {
        direction,
        content,
        flipped,
    })
}

/// Reduced fraction `p_num / q_den` of two odd positive coprime integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OddRatio {
    pub p_num: u64,
    pub q_den: u64,
}

impl OddRatio {
    pub fn new(p_num: u64, q_den: u64) -> Result<Self> {
        if p_num.is_multiple_of(2) || q_den.is_multiple_of(2) || gcd(p_num, q_den) != 1 {
            return Err(Error::InvalidArgument(format!(
                "{p_num}/{q_den} is not a reduced ratio of odd integers"
            )));
        }
        Ok(OddRatio { p_num, q_den })
    }

    pub fn inverse(self) -> Self {
        OddRatio {
            p_num: self.q_den,
            q_den: self.p_num,
        }
    }
}

pub(crate) fn is_sign_normalized(alpha: &[i64]) -> bool {
    alpha
        .iter()
        .copied()
        .find(|&a| a != 0)
        .is_some_and(|a| a > 0)
}

/// Returns `t = p/q` (odd, coprime) with `alpha = t * beta`, or `None` when
/// the vectors are not co-linear or their ratio is not a quotient of odd
/// integers. Both vectors must be sign-normalized.
pub fn odd_ratio(alpha: &[i64], beta: &[i64]) -> Result<Option<OddRatio>> {
    for v in [alpha, beta] {
        if v.iter().all(|&a| a == 0) {
            return Err(Error::ZeroVector);
        }
        if !is_sign_normalized(v) {
            return Err(Error::NotNormalized(v.to_vec()));
        }
    }
    if alpha.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: beta.len(),
        });
    }
    let a = primitive_decompose(alpha)?;
    let b = primitive_decompose(beta)?;
    if a.direction != b.direction {
        return Ok(None);
    }
    let g = gcd(a.content, b.content);
    let (p, q) = (a.content / g, b.content / g);
    if p % 2 == 1 && q % 2 == 1 {
        Ok(Some(OddRatio { p_num: p, q_den: q }))
    } else {
        Ok(None)
    }
}

/// Primes `<= bound` by the sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| p.then_some(k as u64))
        .collect()
}

/// Partial Euler product `∏ (1 + p⁻²) / (1 - p⁻²)` over primes `p <= prime_bound`.
#[derive(Debug, Clone)]
pub struct EulerProduct {
    pub prime_bound: u64,
    pub include_two: bool,
    pub primes_used: usize,
    /// Value rounded to double precision.
    pub value: f64,
    /// Low-order correction: `value + correction` carries roughly 32 digits.
    pub correction: f64,
    /// Exact value, present when `prime_bound <= EXACT_EULER_BOUND`.
    pub exact: Option<BigRational>,
}

pub fn euler_product_partial(prime_bound: u64, include_two: bool) -> Result<EulerProduct> {
    if prime_bound < 2 {
        return Err(Error::InvalidArgument(format!(
            "prime bound must be at least 2, got {prime_bound}"
        )));
    }
    let primes: Vec<u64> = primes_up_to(prime_bound)
        .into_iter()
        .filter(|&p| include_two || p != 2)
        .collect();
    if prime_bound <= EXACT_EULER_BOUND {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for &p in &primes {
            let p2 = BigInt::from(p * p);
            num *= &p2 + 1u32;
            den *= &p2 - 1u32;
        }
        let exact = BigRational::new(num, den);
        let value = exact.to_f64().unwrap_or(f64::NAN);
        let residual = &exact - BigRational::from_float(value).expect("finite");
        let correction = residual.to_f64().unwrap_or(0.0);
        return Ok(EulerProduct {
            prime_bound,
            include_two,
            primes_used: primes.len(),
            value,
            correction,
            exact: Some(exact),
        });
    }
    let mut acc = DoubleDouble::ONE;
    for &p in &primes {
        let d = (p * p - 1) as f64;
        // 1 + 2/(p² - 1), with the quotient carried to double-double.
        let q = 2.0 / d;
        let r = (-q).mul_add(d, 2.0);
        let factor = DoubleDouble::from_sum(1.0, q).add_f64(r / d);
        acc = acc.mul(factor);
    }
    Ok(EulerProduct {
        prime_bound,
        include_two,
        primes_used: primes.len(),
        value: acc.hi,
        correction: acc.lo,
        exact: None,
    })
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    fn from_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        DoubleDouble { hi: s, lo: err }
    }

    fn renormalize(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        DoubleDouble {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add_f64(self, b: f64) -> Self {
        let s = DoubleDouble::from_sum(self.hi, b);
        DoubleDouble::renormalize(s.hi, s.lo + self.lo)
    }

    fn mul(self, other: Self) -> Self {
        let p = self.hi * other.hi;
        let err = self.hi.mul_add(other.hi, -p);
        let lo = err + (self.hi * other.lo + self.lo * other.hi);
        DoubleDouble::renormalize(p, lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(1, 7), 1);
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(1 << 20, 3 << 20), 1 << 20);
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(two_adic_valuation(7), 0);
        assert_eq!(two_adic_valuation(12), 2);
        assert_eq!(two_adic_valuation(1), 0);
    }

    #[test]
    fn moebius_examples() {
        assert_eq!(moebius(1), 1);
        assert_eq!(moebius(30), -1);
        assert_eq!(moebius(12), 0);
        // beyond the shared sieve
        assert_eq!(moebius(1_000_003), -1);
        assert_eq!(moebius(2 * 1_000_003), 1);
        assert_eq!(moebius(9 * 1_000_003), 0);
    }

    #[test]
    fn sieve_agrees_with_factorization() {
        let t = MoebiusTable::new(5000);
        for n in 1..=5000u64 {
            assert_eq!(t.get(n), moebius_by_factorization(n), "n = {n}");
        }
        // small table falls back above its bound
        let small = MoebiusTable::new(10);
        assert_eq!(small.get(30), -1);
    }

    #[test]
    fn moebius_is_multiplicative() {
        for m in 1..=200u64 {
            for n in 1..=200u64 {
                if gcd(m, n) == 1 {
                    assert_eq!(moebius(m * n), moebius(m) * moebius(n));
                }
            }
        }
    }

    #[test]
    fn divisor_sums_vanish() {
        let n_max = 10_000usize;
        let mut sums = vec![0i64; n_max + 1];
        for d in 1..=n_max {
            let mu = moebius(d as u64) as i64;
            for k in (d..=n_max).step_by(d) {
                sums[k] += mu;
            }
        }
        assert_eq!(sums[1], 1);
        assert!(sums[2..].iter().all(|&s| s == 0));
    }

    #[test]
    fn primitive_decompose_examples() {
        let p = primitive_decompose(&[2, -4, 6]).unwrap();
        assert_eq!(p.direction, vec![1, -2, 3]);
        assert_eq!(p.content, 2);
        assert!(!p.flipped);
        let p = primitive_decompose(&[-3, 6]).unwrap();
        assert_eq!(p.direction, vec![1, -2]);
        assert_eq!(p.content, 3);
        assert!(p.flipped);
        let p = primitive_decompose(&[5]).unwrap();
        assert_eq!(p.direction, vec![1]);
        assert_eq!(p.content, 5);
        assert_eq!(primitive_decompose(&[0, 0]), Err(Error::ZeroVector));
    }

    #[test]
    fn odd_ratio_examples() {
        assert_eq!(
            odd_ratio(&[1, 2], &[3, 6]).unwrap(),
            Some(OddRatio { p_num: 1, q_den: 3 })
        );
        assert_eq!(odd_ratio(&[1, 0], &[0, 1]).unwrap(), None);
        assert_eq!(odd_ratio(&[1], &[2]).unwrap(), None);
        assert_eq!(odd_ratio(&[0], &[2]), Err(Error::ZeroVector));
        assert!(matches!(
            odd_ratio(&[-1, 2], &[1, 2]),
            Err(Error::NotNormalized(_))
        ));
        assert!(OddRatio::new(3, 9).is_err());
        assert!(OddRatio::new(2, 3).is_err());
    }

    #[test]
    fn euler_small_bounds_exact() {
        let e = euler_product_partial(10, true).unwrap();
        assert_eq!(
            e.exact.clone().unwrap(),
            BigRational::new(8125.into(), 3456.into())
        );
        assert!((e.value - 8125.0 / 3456.0).abs() < 1e-15);
        let e = euler_product_partial(2, true).unwrap();
        assert_eq!(e.exact.unwrap(), BigRational::new(5.into(), 3.into()));
        assert!(euler_product_partial(1, true).is_err());
    }

    #[test]
    fn euler_exact_and_extended_paths_agree() {
        // compare the exact rational with the double-double route at the switch point
        let exact = euler_product_partial(EXACT_EULER_BOUND, true).unwrap();
        let primes = primes_up_to(EXACT_EULER_BOUND);
        let mut acc = DoubleDouble::ONE;
        for &p in &primes {
            let d = (p * p - 1) as f64;
            let q = 2.0 / d;
            let r = (-q).mul_add(d, 2.0);
            acc = acc.mul(DoubleDouble::from_sum(1.0, q).add_f64(r / d));
        }
        assert!(((acc.hi - exact.value) + (acc.lo - exact.correction)).abs() < 1e-28);
    }

    #[test]
    fn euler_monotone_and_limits() {
        let mut prev = 0.0;
        for bound in [2, 3, 10, 100, 1000, 10_000, 20_000, 100_000] {
            let v = euler_product_partial(bound, true).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        assert!((prev - 2.5).abs() < 1e-3);
        let odd = euler_product_partial(100_000, false).unwrap().value;
        assert!((odd - 1.5).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn odd_ratio_is_antisymmetric(a in prop::collection::vec(-6i64..=6, 3), s in 1i64..=9, t in 1i64..=9) {
            prop_assume!(a.iter().any(|&x| x != 0));
            let base = primitive_decompose(&a).unwrap().direction;
            let alpha: Vec<i64> = base.iter().map(|x| x * s).collect();
            let beta: Vec<i64> = base.iter().map(|x| x * t).collect();
            let fwd = odd_ratio(&alpha, &beta).unwrap();
            let back = odd_ratio(&beta, &alpha).unwrap();
            prop_assert_eq!(fwd.map(OddRatio::inverse), back);
            prop_assert_eq!(odd_ratio(&alpha, &alpha).unwrap(), Some(OddRatio { p_num: 1, q_den: 1 }));
        }

        #[test]
        fn primitive_decomposition_reconstructs(a in prop::collection::vec(-50i64..=50, 1..5)) {
            prop_assume!(a.iter().any(|&x| x != 0));
            let p = primitive_decompose(&a).unwrap();
            let sign = if p.flipped { -1 } else { 1 };
            let rebuilt: Vec<i64> = p.direction.iter().map(|&x| sign * x * p.content as i64).collect();
            prop_assert_eq!(rebuilt, a);
            prop_assert_eq!(p.direction.iter().fold(0u64, |g, &x| gcd(g, x.unsigned_abs())), 1);
            prop_assert!(is_sign_normalized(&p.direction));
        }
    }
}
