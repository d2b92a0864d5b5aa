//! The norm sequences attached to the convergents of sqrt(N).
//!
//! For the m-th convergent (A_m, B_m) let
//!
//! ```text
//! delta_m = A_m^2 - N B_m^2          (the field norm of A_m + B_m sqrt(N))
//! omega_m = A_m A_{m-1} - N B_m B_{m-1}
//! ```
//!
//! These satisfy omega_{m+1}^2 - delta_m delta_{m+1} = N, alternate in sign,
//! and are periodic with period tau (tau even) or 2*tau (tau odd). The triple
//! (delta_m, 2 omega_m, delta_{m-1}) is a binary quadratic form of
//! discriminant 4N; the walk along these forms is what the infrastructure
//! machinery navigates.
//!
//! Both the direct definition and the integer recurrence are evaluated and
//! compared, so an inconsistency can only come from a bug, never from input.

use crate::arith::{icbrt, isqrt};
use crate::cf::{convergents, denom, numer, CheckReport, Convergent, SurdExpansion};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("direct and recurrent norm sequences disagree at index {index} (implementation bug)")]
    Inconsistent { index: usize },
}

/// Element a + b*sqrt(n) of Z[sqrt(n)], used for exact products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadInt {
    pub a: BigInt,
    pub b: BigInt,
}

impl QuadInt {
    pub fn new(a: BigInt, b: BigInt) -> Self {
        QuadInt { a, b }
    }

    pub fn one() -> Self {
        QuadInt {
            a: BigInt::one(),
            b: BigInt::zero(),
        }
    }

    pub fn mul(&self, rhs: &QuadInt, n: &BigInt) -> QuadInt {
        QuadInt {
            a: &self.a * &rhs.a + n * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }

    /// Galois conjugate a - b*sqrt(n).
    pub fn conj(&self) -> QuadInt {
        QuadInt {
            a: self.a.clone(),
            b: -&self.b,
        }
    }

    pub fn pow(&self, mut k: u64, n: &BigInt) -> QuadInt {
        let mut base = self.clone();
        let mut acc = QuadInt::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base, n);
            }
            base = base.mul(&base, n);
            k >>= 1;
        }
        acc
    }
}

/// One period of the delta/omega sequences plus the convergents that
/// generated them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormSequence {
    n: BigUint,
    delta: Vec<BigInt>, // delta_0 ..= delta_tau
    omega: Vec<BigInt>, // omega_0 ..= omega_tau, omega_0 = a0
    period: usize,
    conv: Vec<Convergent>, // indices -1 ..= tau
}

/// Binary quadratic form a x^2 + b2 x y + c y^2 with even middle coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticForm {
    pub a: BigInt,
    pub b2: BigInt,
    pub c: BigInt,
}

impl QuadraticForm {
    pub fn discriminant(&self) -> BigInt {
        &self.b2 * &self.b2 - BigInt::from(4) * &self.a * &self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b2).gcd(&self.c).is_one()
    }
}

/// Smallest positive solution of x^2 - N y^2 = +-1, read off the end of the
/// period. It is the fundamental unit of Z[sqrt(N)], and `is_cube` reports
/// whether it is the cube of a unit of the maximal order (in which case the
/// field regulator is one third of ln of this unit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PellUnit {
    pub numer: BigUint,
    pub denom: BigUint,
    pub n: BigUint,
    pub norm: i8,
    pub is_cube: bool,
}

fn to_int(u: &BigUint) -> BigInt {
    BigInt::from(u.clone())
}

/// Build the delta/omega sequences for one full period, verifying the
/// recurrence against the direct definition and both against the (c, r)
/// sequences of the expansion.
pub fn form_sequence(exp: &SurdExpansion) -> Result<FormSequence, FormError> {
    let tau = exp.period();
    let n = to_int(exp.n());
    let conv = convergents(exp, tau);

    let mut delta = Vec::with_capacity(tau + 1);
    let mut omega = Vec::with_capacity(tau + 1);
    for m in 0..=tau as i64 {
        let am = to_int(numer(&conv, m));
        let bm = to_int(denom(&conv, m));
        let ap = to_int(numer(&conv, m - 1));
        let bp = to_int(denom(&conv, m - 1));
        delta.push(&am * &am - &n * &bm * &bm);
        omega.push(&am * &ap - &n * &bm * &bp);
    }

    // recurrence with seeds delta_{-1} = 1, omega_0 = a0
    let mut d_prev = BigInt::one();
    let mut d_cur = delta[0].clone();
    let mut o_cur = omega[0].clone();
    for m in 0..tau {
        let a_next = to_int(exp.partial(m + 1));
        let d_next = &a_next * &a_next * &d_cur + BigInt::from(2) * &a_next * &o_cur + &d_prev;
        let o_next = &o_cur + &a_next * &d_cur;
        if d_next != delta[m + 1] || o_next != omega[m + 1] {
            return Err(FormError::Inconsistent { index: m + 1 });
        }
        d_prev = d_cur;
        d_cur = d_next;
        o_cur = o_next;
    }

    // |delta_m| = r_m and |omega_m| = c_m against the expansion's own state
    for m in 0..=tau {
        debug_assert_eq!(delta[m].magnitude(), exp.r(m), "r misaligned at {m}");
        debug_assert_eq!(omega[m].magnitude(), exp.c(m), "c misaligned at {m}");
    }

    Ok(FormSequence {
        n: exp.n().clone(),
        delta,
        omega,
        period: tau,
        conv,
    })
}

impl FormSequence {
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// delta_m for any m >= 0; period tau when tau is even, 2*tau when odd.
    pub fn delta(&self, m: usize) -> BigInt {
        let q = m / self.period;
        let rem = m % self.period;
        if self.period % 2 == 0 || q % 2 == 0 {
            self.delta[rem].clone()
        } else {
            -&self.delta[rem]
        }
    }

    /// omega_m for any m >= 0, same periodicity as delta.
    pub fn omega(&self, m: usize) -> BigInt {
        let q = m / self.period;
        let rem = m % self.period;
        if self.period % 2 == 0 || q % 2 == 0 {
            self.omega[rem].clone()
        } else {
            -&self.omega[rem]
        }
    }

    pub fn deltas(&self) -> &[BigInt] {
        &self.delta
    }

    pub fn omegas(&self) -> &[BigInt] {
        &self.omega
    }

    pub(crate) fn convergents(&self) -> &[Convergent] {
        &self.conv
    }
}

/// The m-th quadratic form (delta_m, 2 omega_m, delta_{m-1}), m >= 1.
pub fn form_at(fs: &FormSequence, m: usize) -> QuadraticForm {
    assert!(m >= 1, "forms are indexed from 1");
    QuadraticForm {
        a: fs.delta(m),
        b2: fs.omega(m) << 1,
        c: fs.delta(m - 1),
    }
}

/// Symmetry of one period: delta_m = (-1)^tau delta_{tau-m-2}, the mirrored
/// omega relation, and the reflection of the convergents through the unit.
pub fn check_symmetry(fs: &FormSequence) -> CheckReport {
    let mut report = CheckReport::default();
    let tau = fs.period;
    let n = to_int(&fs.n);
    let even = tau % 2 == 0;

    let mut bad = None;
    if tau >= 2 {
        for m in 0..=tau - 2 {
            let rhs = if even {
                fs.delta[tau - m - 2].clone()
            } else {
                -&fs.delta[tau - m - 2]
            };
            if fs.delta[m] != rhs {
                bad = Some(m);
                break;
            }
        }
    }
    report.record("delta_symmetry", bad);

    let mut bad = None;
    for m in 1..=tau.saturating_sub(2) {
        if tau < 3 { break; }
        let rhs = if even {
            -&fs.omega[m]
        } else {
            fs.omega[m].clone()
        };
        if fs.omega[tau - m - 1] != rhs {
            bad = Some(m);
            break;
        }
    }
    report.record("omega_symmetry", bad);

    // A_{tau-m-2} = (-1)^{m-1} (A_{tau-1} A_m - N B_{tau-1} B_m)
    // B_{tau-m-2} = (-1)^{m-1} (B_{tau-1} A_m - A_{tau-1} B_m)
    let conv = &fs.conv;
    let a = |m: i64| to_int(numer(conv, m));
    let b = |m: i64| to_int(denom(conv, m));
    let taui = tau as i64;
    let mut bad = None;
    for m in 0..=taui - 2 {
        let sign = if (m - 1).rem_euclid(2) == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        let lhs_a = a(taui - m - 2);
        let lhs_b = b(taui - m - 2);
        let rhs_a = &sign * (a(taui - 1) * a(m) - &n * b(taui - 1) * b(m));
        let rhs_b = &sign * (b(taui - 1) * a(m) - a(taui - 1) * b(m));
        if lhs_a != rhs_a || lhs_b != rhs_b {
            bad = Some(m as usize);
            break;
        }
    }
    report.record("convergent_reflection", bad);

    report
}

/// True iff the tau form triples within one period are pairwise distinct.
pub fn check_uniqueness(fs: &FormSequence) -> bool {
    let mut seen = HashSet::new();
    (1..=fs.period).all(|m| seen.insert(form_at(fs, m)))
}

/// Matrix form of the recurrence: the column vector
/// (delta_{m+1}, 2 omega_{m+1}, delta_m) equals T(a_{m+1}) applied to
/// (delta_m, 2 omega_m, delta_{m-1}) with
/// T(a) = [[a^2, a, 1], [2a, 1, 0], [1, 0, 0]].
///
/// This is a verification path only; the plain recurrence is the
/// production path.
pub fn t_matrix_reproduces(exp: &SurdExpansion, fs: &FormSequence) -> bool {
    let tau = fs.period;
    for m in 1..tau {
        let a = to_int(exp.partial(m + 1));
        let lam = [fs.delta[m].clone(), &fs.omega[m] << 1, fs.delta[m - 1].clone()];
        let next = [
            &a * &a * &lam[0] + &a * &lam[1] + &lam[2],
            BigInt::from(2) * &a * &lam[0] + &lam[1],
            lam[0].clone(),
        ];
        if next[0] != fs.delta[m + 1] || next[1] != (&fs.omega[m + 1] << 1) || next[2] != fs.delta[m]
        {
            return false;
        }
    }
    true
}

/// Tightened bounds (a_{m+1} |delta_m|)^2 < 4N and omega_m^2 < N for m >= 1,
/// checked in exact arithmetic.
pub fn bounds_hold(exp: &SurdExpansion, fs: &FormSequence) -> bool {
    let n = to_int(&fs.n);
    let four_n = BigInt::from(4) * &n;
    for m in 1..=fs.period {
        let scaled = to_int(exp.partial(m + 1)) * &fs.delta[m];
        if &scaled * &scaled >= four_n {
            return false;
        }
        if &fs.omega[m] * &fs.omega[m] >= n {
            return false;
        }
    }
    true
}

/// omega_{m+1}^2 - delta_m delta_{m+1} = N for all m up to `upto`.
pub fn norm_relation_holds(fs: &FormSequence, upto: usize) -> bool {
    let n = to_int(&fs.n);
    (0..upto).all(|m| {
        let o = fs.omega(m + 1);
        &o * &o - fs.delta(m) * fs.delta(m + 1) == n
    })
}

fn cube_root_in_half_integers(a: &BigUint, b: &BigUint, n: &BigUint) -> bool {
    // Look for x + y sqrt(n) with 2x, 2y integral and (x + y sqrt(n))^3 = a + b sqrt(n).
    // Writing u = 2x, v = 2y the conditions are u^3 + 3 u v^2 n = 8a and
    // 3 u^2 v + v^3 n = 8b. Since sigma of the unit is +-1/unit, the real cube
    // root is close to cbrt(2a), so u is within a couple of icbrt(8a)/...
    let eight_a = a << 3u32;
    let center = icbrt(&(a << 1u32));
    let lo = center.to_i128().map(|c| (c - 3).max(1)).unwrap_or(1);
    let hi = center.to_i128().map(|c| c + 3).unwrap_or(4);
    let n_int = to_int(n);
    for u in lo..=hi {
        let u_big = BigInt::from(u);
        let u3 = &u_big * &u_big * &u_big;
        let rem = to_int(&eight_a) - &u3;
        if rem <= BigInt::zero() {
            continue;
        }
        let den = BigInt::from(3) * &n_int * &u_big;
        let (q, r) = rem.div_rem(&den);
        if !r.is_zero() || q < BigInt::zero() {
            continue;
        }
        let v = isqrt(q.magnitude());
        if &v * &v != *q.magnitude() {
            continue;
        }
        let v_big = to_int(&v);
        // exact verification of the cube
        let lhs_a = &u3 + BigInt::from(3) * &u_big * &v_big * &v_big * &n_int;
        let lhs_b = BigInt::from(3) * &u_big * &u_big * &v_big + &v_big * &v_big * &v_big * &n_int;
        if lhs_a == to_int(&eight_a) && lhs_b == to_int(&(b << 3u32)) {
            return true;
        }
    }
    false
}

/// The unit (A_{tau-1}, B_{tau-1}) with its norm (-1)^tau and cube test.
pub fn pell_unit(exp: &SurdExpansion) -> PellUnit {
    let tau = exp.period();
    let conv = convergents(exp, tau.saturating_sub(1).max(0));
    let a = numer(&conv, tau as i64 - 1).clone();
    let b = denom(&conv, tau as i64 - 1).clone();
    let n = exp.n().clone();
    let norm_val = to_int(&a) * to_int(&a) - to_int(&n) * to_int(&b) * to_int(&b);
    debug_assert!(norm_val.magnitude().is_one());
    let norm = if norm_val.is_negative() { -1 } else { 1 };
    debug_assert_eq!(norm == 1, tau % 2 == 0);
    let is_cube = cube_root_in_half_integers(&a, &b, &n);
    PellUnit {
        numer: a,
        denom: b,
        n,
        norm,
        is_cube,
    }
}

/// Multiply a convergent by the k-th power of the unit in Z[sqrt(N)];
/// this translates index m to m + k*tau.
pub fn translate(conv: &Convergent, unit: &PellUnit, tau: usize, k: u64) -> Convergent {
    let n = to_int(&unit.n);
    let base = QuadInt::new(to_int(&unit.numer), to_int(&unit.denom));
    let pk = base.pow(k, &n);
    let me = QuadInt::new(to_int(&conv.numer), to_int(&conv.denom));
    let res = me.mul(&pk, &n);
    debug_assert!(!res.a.is_negative() && !res.b.is_negative());
    Convergent {
        index: conv.index + (k as i64) * (tau as i64),
        numer: res.a.magnitude().clone(),
        denom: res.b.magnitude().clone(),
    }
}
