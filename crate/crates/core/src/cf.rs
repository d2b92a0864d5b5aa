//! Continued-fraction expansion of sqrt(N) with period detection.
//!
//! The expansion is computed with the classical integer recursion on the
//! auxiliary sequences (c, r):
//!
//! ```text
//! c_0 = a_0,  r_0 = N - a_0^2,
//! a_{m+1} = floor((a_0 + c_m)/r_m),
//! c_{m+1} = a_{m+1} r_m - c_m,
//! r_{m+1} = (N - c_{m+1}^2)/r_m     (always an exact division),
//! ```
//!
//! stopping at the first partial quotient equal to 2*a_0, which closes the
//! period. Everything here is exact integer arithmetic.

use crate::arith::isqrt;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfError {
    #[error("{0} is a perfect square; sqrt({0}) has no periodic expansion")]
    PerfectSquare(BigUint),
    #[error("period not closed within {max_terms} terms; raise the cap")]
    PeriodNotFound { max_terms: usize },
}

/// One full period of the continued fraction of sqrt(n).
///
/// Stores the partial quotients a_1..a_tau and the (c, r) sequences for
/// indices 0..=tau; positions beyond the period are resolved by modular
/// lookup since the sequences repeat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurdExpansion {
    n: BigUint,
    a0: BigUint,
    partials: Vec<BigUint>,
    c_seq: Vec<BigUint>,
    r_seq: Vec<BigUint>,
    period: usize,
}

/// Numerator/denominator pair of the m-th convergent A_m/B_m.
///
/// Index -1 is the conventional seed (A,B) = (1,0). gcd(A_m, B_m) = 1 for
/// every m, and A_m + B_m*sqrt(N) is the associated element of Z[sqrt(N)].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub index: i64,
    pub numer: BigUint,
    pub denom: BigUint,
}

/// Outcome of one identity check over a range of indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckItem {
    pub name: &'static str,
    pub pass: bool,
    pub first_failure: Option<usize>,
}

/// Pass/fail data for a family of identity checks; failures are data here,
/// not errors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|c| c.pass)
    }

    pub fn push_pass(&mut self, name: &'static str) {
        self.items.push(CheckItem {
            name,
            pass: true,
            first_failure: None,
        });
    }

    pub fn push_fail(&mut self, name: &'static str, index: usize) {
        self.items.push(CheckItem {
            name,
            pass: false,
            first_failure: Some(index),
        });
    }

    pub fn record(&mut self, name: &'static str, first_bad: Option<usize>) {
        match first_bad {
            None => self.push_pass(name),
            Some(i) => self.push_fail(name, i),
        }
    }
}

/// Default expansion cap: comfortably above the Kraitchik bound
/// 0.72 sqrt(N) ln N, so one full period always fits.
pub fn default_max_terms(n: &BigUint) -> usize {
    let bits = n.bits() as f64;
    // over-approximate sqrt(N) ln N using only the bit length when N is huge
    let nf = num_traits::ToPrimitive::to_f64(n).unwrap_or(f64::MAX);
    let est = if nf.is_finite() {
        nf.sqrt() * nf.ln()
    } else {
        2f64.powf(bits / 2.0) * bits * std::f64::consts::LN_2
    };
    let capped = est.min(1e18);
    capped.ceil() as usize + 16
}

/// Expand sqrt(n) until the period closes or `max_terms` is hit.
pub fn expand_sqrt(n: &BigUint, max_terms: usize) -> Result<SurdExpansion, CfError> {
    let a0 = isqrt(n);
    if &(&a0 * &a0) == n {
        return Err(CfError::PerfectSquare(n.clone()));
    }
    let two_a0 = &a0 << 1u32;
    let mut c = a0.clone();
    let mut r = n - &a0 * &a0;
    let mut partials = Vec::new();
    let mut c_seq = vec![c.clone()];
    let mut r_seq = vec![r.clone()];

    for _ in 0..max_terms {
        let a = (&a0 + &c) / &r;
        let c_next = &a * &r - &c;
        let num = n - &c_next * &c_next;
        debug_assert!((&num % &r).is_zero(), "inexact division in the cf recursion");
        let r_next = num / &r;
        partials.push(a.clone());
        c_seq.push(c_next.clone());
        r_seq.push(r_next.clone());
        c = c_next;
        r = r_next;
        if a == two_a0 {
            let period = partials.len();
            // the (c, r) state returns to its start when the period closes
            debug_assert_eq!(c_seq[period], c_seq[0]);
            debug_assert_eq!(r_seq[period], r_seq[0]);
            return Ok(SurdExpansion {
                n: n.clone(),
                a0,
                partials,
                c_seq,
                r_seq,
                period,
            });
        }
    }
    Err(CfError::PeriodNotFound { max_terms })
}

/// Expand with the default term cap.
pub fn expand_sqrt_default(n: &BigUint) -> Result<SurdExpansion, CfError> {
    expand_sqrt(n, default_max_terms(n))
}

impl SurdExpansion {
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn a0(&self) -> &BigUint {
        &self.a0
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Partial quotients a_1..a_tau of one period.
    pub fn partials(&self) -> &[BigUint] {
        &self.partials
    }

    /// a_m for any m >= 0, extending periodically (a_{m+tau} = a_m for m >= 1).
    pub fn partial(&self, m: usize) -> &BigUint {
        if m == 0 {
            &self.a0
        } else {
            &self.partials[(m - 1) % self.period]
        }
    }

    /// c_m of the auxiliary sequence, periodic with period tau from m = 0.
    pub fn c(&self, m: usize) -> &BigUint {
        &self.c_seq[m % self.period]
    }

    /// r_m of the auxiliary sequence, periodic with period tau from m = 0.
    pub fn r(&self, m: usize) -> &BigUint {
        &self.r_seq[m % self.period]
    }

    pub fn c_seq(&self) -> &[BigUint] {
        &self.c_seq
    }

    pub fn r_seq(&self) -> &[BigUint] {
        &self.r_seq
    }
}

/// Convergents (A_m, B_m) for m = -1..=upto via the second-order recurrence,
/// using the periodic extension of the partial quotients.
pub fn convergents(exp: &SurdExpansion, upto: usize) -> Vec<Convergent> {
    let mut out = Vec::with_capacity(upto + 2);
    out.push(Convergent {
        index: -1,
        numer: BigUint::one(),
        denom: BigUint::zero(),
    });
    out.push(Convergent {
        index: 0,
        numer: exp.a0().clone(),
        denom: BigUint::one(),
    });
    for m in 1..=upto {
        let a = exp.partial(m);
        let numer = a * &out[m].numer + &out[m - 1].numer;
        let denom = a * &out[m].denom + &out[m - 1].denom;
        out.push(Convergent {
            index: m as i64,
            numer,
            denom,
        });
    }
    out
}

/// Borrow A_m (numerator) from a convergent list produced by [`convergents`].
pub(crate) fn numer(conv: &[Convergent], m: i64) -> &BigUint {
    &conv[(m + 1) as usize].numer
}

pub(crate) fn denom(conv: &[Convergent], m: i64) -> &BigUint {
    &conv[(m + 1) as usize].denom
}

fn sign_pow(m: i64) -> BigInt {
    if m.rem_euclid(2) == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

fn to_int(u: &BigUint) -> BigInt {
    BigInt::from(u.clone())
}

/// Check the convergent identities over indices up to `upto` (at least one
/// full period). Covers the cross products of consecutive convergents, the
/// period-end relations and the reflection sums.
pub fn verify_identities(exp: &SurdExpansion, upto: usize) -> CheckReport {
    let upto = upto.max(exp.period());
    let conv = convergents(exp, upto);
    verify_identities_on(exp, &conv)
}

/// Same as [`verify_identities`] but on a caller-supplied convergent list;
/// lets tests inject corrupted data and watch the report catch it.
pub fn verify_identities_on(exp: &SurdExpansion, conv: &[Convergent]) -> CheckReport {
    let mut report = CheckReport::default();
    let n = to_int(exp.n());
    let tau = exp.period() as i64;
    let upto = (conv.len() - 2) as i64;
    let a = |m: i64| to_int(numer(conv, m));
    let b = |m: i64| to_int(denom(conv, m));

    // A_m B_{m-1} - A_{m-1} B_m = (-1)^{m-1}
    let mut bad = None;
    for m in 0..=upto {
        if a(m) * b(m - 1) - a(m - 1) * b(m) != sign_pow(m - 1) {
            bad = Some(m as usize);
            break;
        }
    }
    report.record("cross_product_consecutive", bad);

    // A_m B_{m-2} - A_{m-2} B_m = (-1)^m a_m
    let mut bad = None;
    for m in 1..=upto {
        let am = to_int(exp.partial(m as usize));
        if a(m) * b(m - 2) - a(m - 2) * b(m) != sign_pow(m) * am {
            bad = Some(m as usize);
            break;
        }
    }
    report.record("cross_product_skip_one", bad);

    if upto >= tau {
        // A_tau = 2 a0 A_{tau-1} + A_{tau-2}, same for B
        let two_a0 = to_int(exp.a0()) * 2;
        let ok = a(tau) == &two_a0 * a(tau - 1) + a(tau - 2)
            && b(tau) == two_a0 * b(tau - 1) + b(tau - 2);
        report.record("period_end_recurrence", (!ok).then_some(tau as usize));

        // the three cross products at the period end
        let ok = a(tau) * b(tau - 1) - a(tau - 1) * b(tau) == sign_pow(tau - 1)
            && a(tau - 1) * b(tau - 2) - a(tau - 2) * b(tau - 1) == sign_pow(tau)
            && a(tau) * b(tau - 2) - a(tau - 2) * b(tau) == sign_pow(tau) * to_int(exp.a0()) * 2;
        report.record("period_end_cross_products", (!ok).then_some(tau as usize));

        // A_{tau-2} = -a0 A_{tau-1} + N B_{tau-1}, B_{tau-2} = A_{tau-1} - a0 B_{tau-1}
        let a0 = to_int(exp.a0());
        let ok = a(tau - 2) == -&a0 * a(tau - 1) + &n * b(tau - 1)
            && b(tau - 2) == a(tau - 1) - &a0 * b(tau - 1);
        report.record("period_end_reflection", (!ok).then_some(tau as usize));

        // A_tau = a0 A_{tau-1} + N B_{tau-1}, B_tau = A_{tau-1} + a0 B_{tau-1}
        let ok = a(tau) == &a0 * a(tau - 1) + &n * b(tau - 1)
            && b(tau) == a(tau - 1) + &a0 * b(tau - 1);
        report.record("period_translation_seed", (!ok).then_some(tau as usize));

        // reflection sums: A_j A_{tau-j-1} + A_{j-1} A_{tau-j-2}
        //                  = N (B_j B_{tau-j-1} + B_{j-1} B_{tau-j-2})
        let mut bad = None;
        let check_j = |j: i64| -> bool {
            a(j) * a(tau - j - 1) + a(j - 1) * a(tau - j - 2)
                == &n * (b(j) * b(tau - j - 1) + b(j - 1) * b(tau - j - 2))
        };
        if !check_j(0) {
            bad = Some(0);
        }
        if bad.is_none() && tau >= 2 && !check_j(1) {
            bad = Some(1);
        }
        if bad.is_none() {
            for j in 3..=(tau - 3) {
                if !check_j(j) {
                    bad = Some(j as usize);
                    break;
                }
            }
        }
        report.record("reflection_sums", bad);
    }

    report
}

/// Exact check of |A_m/B_m - sqrt(N)| <= 1/(B_m B_{m+1}) by cross
/// multiplication: with x = A_m B_{m+1}, y = B_m B_{m+1}, the inequality is
/// equivalent to (x-1)^2 <= N y^2 (or x <= 1) and N y^2 <= (x+1)^2.
pub fn approximation_within_bound(exp: &SurdExpansion, conv: &[Convergent], m: i64) -> bool {
    let x = to_int(numer(conv, m)) * to_int(denom(conv, m + 1));
    let y = to_int(denom(conv, m)) * to_int(denom(conv, m + 1));
    let ny2 = to_int(exp.n()) * &y * &y;
    let upper = (&x + BigInt::one()).pow(2);
    let lower_ok = x <= BigInt::one() || (&x - BigInt::one()).pow(2) <= ny2;
    lower_ok && ny2 <= upper
}

/// The partial quotients a_1..a_{tau-1} form a palindrome and a_tau = 2 a_0.
pub fn palindrome_holds(exp: &SurdExpansion) -> bool {
    let p = exp.partials();
    let tau = exp.period();
    if p[tau - 1] != (exp.a0() << 1u32) {
        return false;
    }
    (0..tau - 1).all(|i| p[i] == p[tau - 2 - i])
}

/// Kraitchik's bound tau <= 0.72 sqrt(N) ln N for N > 7.
pub fn kraitchik_bound_holds(exp: &SurdExpansion) -> bool {
    let nf = match num_traits::ToPrimitive::to_f64(exp.n()) {
        Some(v) => v,
        None => return true, // bound is astronomically loose at that size
    };
    if nf <= 7.0 {
        return true;
    }
    (exp.period() as f64) <= 0.72 * nf.sqrt() * nf.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(n: u64) -> SurdExpansion {
        expand_sqrt_default(&BigUint::from(n)).unwrap()
    }

    #[test]
    fn golden_period_21945() {
        let exp = expand(21945);
        assert_eq!(exp.a0(), &BigUint::from(148u32));
        assert_eq!(exp.period(), 10);
        let partials: Vec<u64> = exp
            .partials()
            .iter()
            .map(|a| num_traits::ToPrimitive::to_u64(a).unwrap())
            .collect();
        assert_eq!(partials, vec![7, 4, 2, 18, 14, 18, 2, 4, 7, 296]);
    }

    #[test]
    fn small_expansions() {
        let exp = expand(7);
        assert_eq!(exp.a0(), &BigUint::from(2u32));
        assert_eq!(exp.period(), 4);
        let partials: Vec<u64> = exp
            .partials()
            .iter()
            .map(|a| num_traits::ToPrimitive::to_u64(a).unwrap())
            .collect();
        assert_eq!(partials, vec![1, 1, 1, 4]);

        let exp2 = expand(2);
        assert_eq!(exp2.period(), 1);
        assert_eq!(exp2.partial(1), &BigUint::from(2u32));

        let exp13 = expand(13);
        assert_eq!(exp13.period(), 5);
    }

    #[test]
    fn perfect_square_rejected() {
        for sq in [0u64, 1, 25, 49, 10000] {
            match expand_sqrt_default(&BigUint::from(sq)) {
                Err(CfError::PerfectSquare(n)) => assert_eq!(n, BigUint::from(sq)),
                other => panic!("expected PerfectSquare, got {other:?}"),
            }
        }
    }

    #[test]
    fn period_not_found_signals_cap() {
        let n = BigUint::from(21945u32);
        match expand_sqrt(&n, 3) {
            Err(CfError::PeriodNotFound { max_terms: 3 }) => {}
            other => panic!("expected PeriodNotFound, got {other:?}"),
        }
    }

    #[test]
    fn convergent_values() {
        let exp = expand(21945);
        let conv = convergents(&exp, 9);
        assert_eq!(numer(&conv, 9), &BigUint::from(3004586089u64));
        assert_eq!(denom(&conv, 9), &BigUint::from(20282284u64));
        assert_eq!(numer(&conv, 0), exp.a0());
        assert_eq!(denom(&conv, 0), &BigUint::one());

        let exp13 = expand(13);
        let conv13 = convergents(&exp13, 2);
        assert_eq!(numer(&conv13, 2), &BigUint::from(7u32));
        assert_eq!(denom(&conv13, 2), &BigUint::from(2u32));
    }

    #[test]
    fn identities_pass_and_fault_detected() {
        for n in [7u64, 13, 21945] {
            let exp = expand(n);
            let report = verify_identities(&exp, 2 * exp.period());
            assert!(report.all_pass(), "{n}: {report:?}");
        }
        // corrupt one convergent and watch the report point at it
        let exp = expand(21945);
        let mut conv = convergents(&exp, 12);
        conv[6].numer += BigUint::one(); // index m = 5
        let report = verify_identities_on(&exp, &conv);
        assert!(!report.all_pass());
        let item = report
            .items
            .iter()
            .find(|c| c.name == "cross_product_consecutive")
            .unwrap();
        assert_eq!(item.first_failure, Some(5));
    }

    #[test]
    fn palindrome_and_bounds() {
        for n in (2u64..200).filter(|n| !crate::arith::is_square(&BigUint::from(*n))) {
            let exp = expand(n);
            assert!(palindrome_holds(&exp), "palindrome fails for {n}");
            assert!(kraitchik_bound_holds(&exp), "kraitchik fails for {n}");
            let conv = convergents(&exp, 2 * exp.period() + 1);
            for m in 0..=(2 * exp.period() as i64) {
                assert!(
                    approximation_within_bound(&exp, &conv, m),
                    "approximation bound fails for {n} at {m}"
                );
            }
        }
    }

    #[test]
    fn cr_sequence_window() {
        // 0 < c_m <= a0 and 0 < r_m <= 2 a0, and r_m r_{m+1} = n - c_{m+1}^2
        for n in [7u64, 13, 33, 1045, 21945] {
            let exp = expand(n);
            let a0 = exp.a0();
            let two_a0 = a0 << 1u32;
            for m in 0..exp.period() {
                assert!(exp.c(m) > &BigUint::zero() && exp.c(m) <= a0);
                assert!(exp.r(m) > &BigUint::zero() && exp.r(m) <= &two_a0);
                let lhs = exp.r(m) * exp.r(m + 1);
                let c1 = exp.c(m + 1);
                assert_eq!(lhs, exp.n() - c1 * c1);
            }
        }
    }
}
