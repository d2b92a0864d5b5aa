//! Arithmetic consequences of the period parity.
//!
//! Odd period: |delta| and |omega| at the middle index give the
//! representation N = x^2 + y^2. Even period: |delta| at index (tau-2)/2
//! divides 4N, so its gcd with N splits N whenever the factor is proper;
//! the unit offers gcd(A +- 1, N) as a second route.

use crate::arith::gcd_abs;
use crate::cf::SurdExpansion;
use crate::forms::{FormSequence, PellUnit, QuadInt};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReprError {
    #[error("period {period} of sqrt({n}) is even; use the midpoint factor instead")]
    EvenPeriod { n: BigUint, period: usize },
    #[error("period {period} of sqrt({n}) is odd; no midpoint factor exists")]
    OddPeriod { n: BigUint, period: usize },
}

/// A verified representation n = x^2 + y^2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSquares {
    pub n: BigUint,
    pub x: BigUint,
    pub y: BigUint,
}

/// Where a divisor came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSource {
    /// |delta| at the middle of an even period.
    Midpoint,
    /// gcd(A_{tau-1} + 1, n).
    UnitPlus,
    /// gcd(A_{tau-1} - 1, n).
    UnitMinus,
    /// no proper factor was exposed.
    Trivial,
}

/// A (possibly trivial) splitting n = factor * cofactor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub n: BigUint,
    pub factor: BigUint,
    pub cofactor: BigUint,
    pub source: SplitSource,
}

impl SplitResult {
    pub fn is_nontrivial(&self) -> bool {
        self.factor > BigUint::one() && self.factor < self.n
    }

    fn trivial(n: &BigUint) -> Self {
        SplitResult {
            n: n.clone(),
            factor: BigUint::one(),
            cofactor: n.clone(),
            source: SplitSource::Trivial,
        }
    }

    fn from_factor(n: &BigUint, f: BigUint, source: SplitSource) -> Self {
        if f.is_one() || &f == n {
            return SplitResult::trivial(n);
        }
        let cofactor = n / &f;
        SplitResult {
            n: n.clone(),
            factor: f,
            cofactor,
            source,
        }
    }
}

/// Sum of two squares from the middle of an odd period:
/// x = |delta_{(tau-1)/2}|, y = |omega_{(tau-1)/2}|.
pub fn sum_of_two_squares(exp: &SurdExpansion, fs: &FormSequence) -> Result<TwoSquares, ReprError> {
    let tau = exp.period();
    if tau % 2 == 0 {
        return Err(ReprError::EvenPeriod {
            n: exp.n().clone(),
            period: tau,
        });
    }
    let mid = (tau - 1) / 2;
    let x = fs.delta(mid).magnitude().clone();
    let y = fs.omega(mid).magnitude().clone();
    debug_assert_eq!(&(&x * &x + &y * &y), exp.n());
    Ok(TwoSquares {
        n: exp.n().clone(),
        x,
        y,
    })
}

/// The midpoint divisor of an even period: gcd(|delta_{(tau-2)/2}|, n).
/// The delta value itself always divides 4n; the gcd strips the 2-part.
pub fn midpoint_factor(exp: &SurdExpansion, fs: &FormSequence) -> Result<SplitResult, ReprError> {
    let tau = exp.period();
    if tau % 2 == 1 {
        return Err(ReprError::OddPeriod {
            n: exp.n().clone(),
            period: tau,
        });
    }
    let mid = (tau - 2) / 2;
    let d = fs.delta(mid);
    let n = exp.n();
    debug_assert!(midpoint_divides_4n(exp, fs));
    let f = gcd_abs(&d, n);
    Ok(SplitResult::from_factor(n, f, SplitSource::Midpoint))
}

/// delta at the even-period midpoint divides 4n (exact check).
pub fn midpoint_divides_4n(exp: &SurdExpansion, fs: &FormSequence) -> bool {
    let tau = exp.period();
    if tau % 2 == 1 {
        return false;
    }
    let d = fs.delta((tau - 2) / 2);
    let four_n = BigInt::from(exp.n().clone()) << 2u32;
    (four_n % &d).is_zero()
}

/// Split via the unit: gcd(A_{tau-1} - 1, n), then gcd(A_{tau-1} + 1, n).
pub fn unit_split(n: &BigUint, unit: &PellUnit) -> Result<SplitResult, ReprError> {
    if unit.norm != 1 {
        // norm -1 happens exactly when the period is odd
        return Err(ReprError::OddPeriod {
            n: n.clone(),
            period: 0,
        });
    }
    let a = BigInt::from(unit.numer.clone());
    let minus = gcd_abs(&(&a - BigInt::one()), n);
    if !minus.is_one() && &minus != n {
        return Ok(SplitResult::from_factor(n, minus, SplitSource::UnitMinus));
    }
    let plus = gcd_abs(&(&a + BigInt::one()), n);
    if !plus.is_one() && &plus != n {
        return Ok(SplitResult::from_factor(n, plus, SplitSource::UnitPlus));
    }
    Ok(SplitResult::trivial(n))
}

/// For even period, omega_{tau-1} = -a0, omega_tau = a0 and
/// delta_tau = delta_{tau-2}.
pub fn midperiod_lemma_holds(exp: &SurdExpansion, fs: &FormSequence) -> bool {
    let tau = exp.period();
    if tau % 2 == 1 {
        return true; // nothing to check for odd periods
    }
    let a0 = BigInt::from(exp.a0().clone());
    fs.omega(tau - 1) == -&a0 && fs.omega(tau) == a0 && fs.delta(tau) == fs.delta(tau - 2)
}

/// Exact check of the gamma product identity for even period.
///
/// With gamma = prod_{m=0}^{tau-1} (sqrt(n) + (-1)^m omega_m), the telescoping
/// of (sqrt(n) + (-1)^m omega_m)/((-1)^m delta_m) gives
///
/// ```text
/// gamma = (prod_{m=0}^{tau-1} (-1)^{m-1} delta_m) * (A_{tau-1} + B_{tau-1} sqrt(n)),
/// ```
///
/// where the integer product on the right is positive. Both this identity
/// and the derived conjugate relation gamma * sigma(unit) = sigma(gamma) * unit
/// are verified by cross multiplication in Z[sqrt(n)], with no division.
/// (The quotient gamma/sigma(gamma) itself equals the square of the unit,
/// since sigma(unit) = 1/unit when the norm is +1.)
pub fn check_gamma_lemma(fs: &FormSequence, unit: &PellUnit) -> bool {
    if fs.period() % 2 == 1 {
        return true;
    }
    let n = BigInt::from(fs.n().clone());
    let mut gamma = QuadInt::one();
    let mut delta_prod = BigInt::one();
    for m in 0..fs.period() {
        let o = fs.omega(m);
        let signed_o = if m % 2 == 0 { o } else { -o };
        gamma = gamma.mul(&QuadInt::new(signed_o, BigInt::one()), &n);
        let d = fs.delta(m);
        delta_prod *= if m % 2 == 0 { -d } else { d };
    }
    let u = QuadInt::new(
        BigInt::from(unit.numer.clone()),
        BigInt::from(unit.denom.clone()),
    );
    let scaled = QuadInt::new(&delta_prod * &u.a, &delta_prod * &u.b);
    let telescoped = gamma == scaled;
    let conjugate = gamma.mul(&u.conj(), &n) == gamma.conj().mul(&u, &n);
    telescoped && conjugate
}

/// Brute-force two-squares oracle: search x <= sqrt(n/2), exact arithmetic.
/// Lives here for use by verification suites; independent of the midpoint
/// route above.
pub fn two_squares_brute_force(n: u64) -> Option<(u64, u64)> {
    let mut x = 1u64;
    while x * x * 2 <= n {
        let rest = n - x * x;
        let y = crate::arith::isqrt_u64(rest);
        if y * y == rest {
            return Some((x.min(y), x.max(y)));
        }
        x += 1;
    }
    None
}
