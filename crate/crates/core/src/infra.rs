//! Reduced quadratic forms of discriminant 4N with distance bookkeeping.
//!
//! A form a x^2 + 2b xy + c y^2 is reduced here when, with k = min(|a|, |c|),
//! sqrt(N) - |b| < k < sqrt(N) + |b| and the sign of b is opposite to the
//! sign of a. The forms attached to the convergents of sqrt(N) are exactly
//! of this kind, and single steps along that cycle are the operators rho+
//! and rho-. Gauss composition followed by reduction provides giant steps.
//!
//! Distances are logarithmic positions along the cycle. A baby step from a
//! form with middle coefficient 2b advances by (1/2) ln((sqrt N + |b|)/(sqrt N - |b|));
//! one full period advances by ln(A_{tau-1} + B_{tau-1} sqrt N) exactly.
//! Distance values carry an accumulated rounding-error bound; the separate
//! structural drift of composed distances (of order ln N) is compensated by
//! the neighborhood search in the factoring driver, not folded into the
//! rounding bound.

use crate::arith::isqrt;
 
use crate::forms::{FormSequence, PellUnit, QuadraticForm};
use crate::real::{to_f64_approx, RealCtx};
use astro_float::BigFloat;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfraError {
    #[error("form is not reduced")]
    NotReduced,
    #[error("forms have different discriminants")]
    IncompatibleForms,
    #[error("accumulated error {err_bound} exceeds tolerance {tolerance}; retry at higher precision")]
    PrecisionExhausted { err_bound: f64, tolerance: f64 },
    #[error("reduction did not terminate (implementation bug)")]
    ReductionDiverged,
}

/// Reduced binary quadratic form (a, 2b, c) of discriminant 4n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedForm {
    a: BigInt,
    b2: BigInt,
    c: BigInt,
    n: BigUint,
}

/// Logarithmic position along the cycle, with a rounding-error bound.
#[derive(Debug, Clone)]
pub struct Distance {
    pub value: BigFloat,
    pub err_bound: f64,
}

impl Distance {
    pub fn zero(ctx: &RealCtx) -> Self {
        Distance {
            value: ctx.zero(),
            err_bound: 0.0,
        }
    }

    pub fn plus(&self, other: &Distance, ctx: &RealCtx) -> Distance {
        let value = ctx.add(&self.value, &other.value);
        let err_bound =
            self.err_bound + other.err_bound + ctx.eps() * (to_f64_approx(&value).abs() + 1.0);
        Distance { value, err_bound }
    }

    pub fn minus(&self, other: &Distance, ctx: &RealCtx) -> Distance {
        let value = ctx.sub(&self.value, &other.value);
        let err_bound =
            self.err_bound + other.err_bound + ctx.eps() * (to_f64_approx(&value).abs() + 1.0);
        Distance { value, err_bound }
    }

    pub fn approx(&self) -> f64 {
        to_f64_approx(&self.value)
    }
}

/// A reduced form together with its distance from the cycle start.
#[derive(Debug, Clone)]
pub struct Cursor {
    pub form: ReducedForm,
    pub dist: Distance,
}

fn to_int(u: &BigUint) -> BigInt {
    BigInt::from(u.clone())
}

impl ReducedForm {
    /// Validates the discriminant and the reduction conditions.
    pub fn new(a: BigInt, b2: BigInt, c: BigInt, n: BigUint) -> Result<Self, InfraError> {
        if !b2.is_even() {
            return Err(InfraError::IncompatibleForms);
        }
        let disc = &b2 * &b2 - BigInt::from(4) * &a * &c;
        if disc != (to_int(&n) << 2u32) {
            return Err(InfraError::IncompatibleForms);
        }
        if !is_reduced_coeffs(&a, &b2, &c, &n) {
            return Err(InfraError::NotReduced);
        }
        Ok(ReducedForm { a, b2, c, n })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b2(&self) -> &BigInt {
        &self.b2
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// Half middle coefficient b.
    fn b(&self) -> BigInt {
        &self.b2 >> 1u32
    }

    pub fn as_quadratic_form(&self) -> QuadraticForm {
        QuadraticForm {
            a: self.a.clone(),
            b2: self.b2.clone(),
            c: self.c.clone(),
        }
    }

    /// Leading coefficient is +-1, i.e. the form sits at a multiple of the
    /// period.
    pub fn is_principal(&self) -> bool {
        self.a.magnitude().is_one()
    }
}

/// Reduction conditions in exact integer arithmetic. The outer coefficients
/// must straddle zero (equivalently |b| < sqrt(n), since b^2 - ac = n);
/// without that clause the window conditions also admit forms far off any
/// cycle, with middle coefficient beyond sqrt(4n).
pub fn is_reduced_coeffs(a: &BigInt, b2: &BigInt, c: &BigInt, n: &BigUint) -> bool {
    if a.is_zero() || c.is_zero() || b2.is_zero() {
        return false;
    }
    let b = b2 >> 1u32;
    if b.sign() == a.sign() || a.sign() == c.sign() {
        return false;
    }
    let n_int = to_int(n);
    let kappa = a.magnitude().min(c.magnitude());
    let kappa = BigInt::from(kappa.clone());
    let abs_b = BigInt::from(b.magnitude().clone());
    // sqrt(n) < kappa + |b|
    let upper = &kappa + &abs_b;
    if n_int >= &upper * &upper {
        return false;
    }
    // kappa - |b| < sqrt(n)
    let diff = &kappa - &abs_b;
    if diff.is_positive() && &diff * &diff >= n_int {
        return false;
    }
    true
}

/// The form (1, -2 a0, a0^2 - n) of discriminant 4n: the reduced principal
/// form that marks the start of each period.
pub fn principal_form(n: &BigUint) -> ReducedForm {
    let a0 = isqrt(n);
    let a0i = to_int(&a0);
    ReducedForm::new(
        BigInt::one(),
        -(&a0i << 1u32),
        &a0i * &a0i - to_int(n),
        n.clone(),
    )
    .expect("principal form is reduced for non-square n")
}

/// The first form of the cycle, (delta_1, 2 omega_1, delta_0), computed from
/// the first two expansion steps only.
pub fn first_form(n: &BigUint) -> ReducedForm {
    let a0 = isqrt(n);
    let r0 = n - &a0 * &a0;
    assert!(!r0.is_zero(), "n must not be a perfect square");
    let a1 = (&a0 << 1u32) / &r0;
    let c1 = &a1 * &r0 - &a0;
    let r1 = (n - &c1 * &c1) / &r0;
    ReducedForm::new(
        to_int(&r1),
        -(to_int(&c1) << 1u32),
        -to_int(&r0),
        n.clone(),
    )
    .expect("first cycle form is reduced")
}

/// One-step-forward operator: (a, 2b, c) -> ((b1^2 - n)/a, 2 b1, a) where
/// b1 = b (mod |a|), sign(b1) = sign(a), and |b1| lies in the window
/// (sqrt(n) - |a|, sqrt(n)).
pub fn rho_forward(f: &ReducedForm) -> Result<ReducedForm, InfraError> {
    if !is_reduced_coeffs(&f.a, &f.b2, &f.c, &f.n) {
        return Err(InfraError::NotReduced);
    }
    let (a_new, b1) = rho_step(&f.a, &f.b(), &f.n, false)?;
    Ok(ReducedForm {
        a: a_new,
        b2: b1 << 1u32,
        c: f.a.clone(),
        n: f.n.clone(),
    })
}

/// One-step-backward operator: (a, 2b, c) -> (c, 2 b1, (b1^2 - n)/c) with the
/// mirrored window (sign(b1) = -sign(c)).
pub fn rho_backward(f: &ReducedForm) -> Result<ReducedForm, InfraError> {
    if !is_reduced_coeffs(&f.a, &f.b2, &f.c, &f.n) {
        return Err(InfraError::NotReduced);
    }
    let (c_new, b1) = rho_step(&f.c, &f.b(), &f.n, true)?;
    Ok(ReducedForm {
        a: f.c.clone(),
        b2: b1 << 1u32,
        c: c_new,
        n: f.n.clone(),
    })
}

/// Shared window arithmetic: choose b1 = b (mod |m|) inside the length-|m|
/// interval whose positive end is at a0 = floor(sqrt n): [a0 - |m| + 1, a0]
/// when the step sign is positive, mirrored when negative. On cycle forms
/// with |m| <= a0 this makes sign(b1) = sign(m) (or its mirror); for larger
/// |m| the interval may cross zero. Returns ((b1^2 - n)/m, b1).
fn rho_step(
    modulus: &BigInt,
    b: &BigInt,
    n: &BigUint,
    mirror: bool,
) -> Result<(BigInt, BigInt), InfraError> {
    let a0 = to_int(&isqrt(n));
    let m_abs = to_int(modulus.magnitude());
    let sign = if modulus.is_negative() { -1 } else { 1 };
    let sign = if mirror { -sign } else { sign };
    let b1 = if sign > 0 {
        &a0 - (&a0 - b).mod_floor(&m_abs)
    } else {
        -&a0 + (b + &a0).mod_floor(&m_abs)
    };
    if b1.is_zero() {
        // a middle coefficient of zero cannot sit on any cycle
        return Err(InfraError::NotReduced);
    }
    let num = &b1 * &b1 - to_int(n);
    let (q, r) = num.div_rem(modulus);
    debug_assert!(r.is_zero(), "inexact division in rho step");
    Ok((q, b1))
}

/// (1/2) ln((sqrt n + w)/(sqrt n - w)) with a conservative rounding bound;
/// this is the distance advanced by one forward step from a form whose
/// middle coefficient is +-2w.
pub fn half_ln_ratio(sqrt_n: &BigFloat, w: &BigUint, n_f64: f64, ctx: &mut RealCtx) -> Distance {
    let wf = ctx.from_biguint(w);
    let num = ctx.add(sqrt_n, &wf);
    let den = ctx.sub(sqrt_n, &wf);
    let ratio = ctx.div(&num, &den);
    let ln_ratio = ctx.ln(&ratio);
    let value = ctx.half(&ln_ratio);
    let err_bound = (4.0 * n_f64 + 16.0 + 8.0 * to_f64_approx(&value).abs()) * ctx.eps();
    Distance { value, err_bound }
}

/// Distance of the single step from position m to m + 1 in the cycle.
pub fn step_distance(fs: &FormSequence, m: usize, ctx: &mut RealCtx) -> Distance {
    let w = fs.omega(m).magnitude().clone();
    let sqrt_n = ctx.sqrt_uint(fs.n());
    let n_f64 = to_f64_approx(&ctx.from_biguint(fs.n()));
    let d = half_ln_ratio(&sqrt_n, &w, n_f64, ctx);
    debug_assert!(d.value.is_positive());
    d
}

/// Sum of the step distances over one full period. Asserts the regulator
/// identity |sum - ln(A + B sqrt n)| <= err bound and fails with
/// `PrecisionExhausted` if the accumulated bound is worse than `tolerance`.
pub fn period_distance(
    fs: &FormSequence,
    unit: &PellUnit,
    ctx: &mut RealCtx,
    tolerance: f64,
) -> Result<Distance, InfraError> {
    let sqrt_n = ctx.sqrt_uint(fs.n());
    let n_f64 = to_f64_approx(&ctx.from_biguint(fs.n()));
    let mut total = Distance::zero(ctx);
    for m in 0..fs.period() {
        let w = fs.omega(m).magnitude().clone();
        let step = half_ln_ratio(&sqrt_n, &w, n_f64, ctx);
        total = total.plus(&step, ctx);
    }
    let ln_unit = ctx.ln_surd(&unit.numer, &unit.denom, fs.n());
    let ln_err = (to_f64_approx(&ln_unit).abs() + 4.0 * n_f64 + 16.0) * ctx.eps();
    let combined = total.err_bound + ln_err;
    if combined > tolerance {
        return Err(InfraError::PrecisionExhausted {
            err_bound: combined,
            tolerance,
        });
    }
    let defect = ctx.sub(&total.value, &ln_unit);
    assert!(
        to_f64_approx(&defect).abs() <= combined,
        "period distance misses ln(unit) by {} (bound {})",
        to_f64_approx(&defect),
        combined
    );
    Ok(Distance {
        value: total.value,
        err_bound: combined,
    })
}

impl Cursor {
    /// Anchor at the first cycle form with distance
    /// (1/2) ln((sqrt n + a0)/(sqrt n - a0)).
    pub fn start(n: &BigUint, ctx: &mut RealCtx) -> Cursor {
        let form = first_form(n);
        let sqrt_n = ctx.sqrt_uint(n);
        let n_f64 = to_f64_approx(&ctx.from_biguint(n));
        let dist = half_ln_ratio(&sqrt_n, &isqrt(n), n_f64, ctx);
        Cursor { form, dist }
    }

    /// rho+ with distance update (advances by the current form's step).
    pub fn advance(&self, ctx: &mut RealCtx) -> Result<Cursor, InfraError> {
        let w = self.form.b().magnitude().clone();
        let sqrt_n = ctx.sqrt_uint(&self.form.n);
        let n_f64 = to_f64_approx(&ctx.from_biguint(&self.form.n));
        let step = half_ln_ratio(&sqrt_n, &w, n_f64, ctx);
        let form = rho_forward(&self.form)?;
        Ok(Cursor {
            form,
            dist: self.dist.plus(&step, ctx),
        })
    }

    /// rho- with distance update (retreats by the resulting form's step).
    pub fn retreat(&self, ctx: &mut RealCtx) -> Result<Cursor, InfraError> {
        let form = rho_backward(&self.form)?;
        let w = form.b().magnitude().clone();
        let sqrt_n = ctx.sqrt_uint(&self.form.n);
        let n_f64 = to_f64_approx(&ctx.from_biguint(&self.form.n));
        let step = half_ln_ratio(&sqrt_n, &w, n_f64, ctx);
        Ok(Cursor {
            form,
            dist: self.dist.minus(&step, ctx),
        })
    }
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    // returns (g, x, y) with g = a x + b y, g >= 0
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut x0, mut x1) = (BigInt::one(), BigInt::zero());
    let (mut y0, mut y1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let x2 = &x0 - &q * &x1;
        x0 = std::mem::replace(&mut x1, x2);
        let y2 = &y0 - &q * &y1;
        y0 = std::mem::replace(&mut y1, y2);
    }
    if r0.is_negative() {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

fn ext_gcd3(a: &BigInt, b: &BigInt, c: &BigInt) -> (BigInt, BigInt, BigInt, BigInt) {
    // g = u a + v b + w c
    let (g1, u1, v1) = ext_gcd(a, b);
    let (g, s, w) = ext_gcd(&g1, c);
    (g, &s * u1, s * v1, w)
}

/// Gauss composition of two forms of discriminant 4n (full middle
/// coefficients), before reduction: with d = gcd(a1, a2, (b1+b2)/2) and
/// Bezout coefficients d = u a1 + v a2 + w (b1+b2)/2,
///
/// ```text
/// a3 = a1 a2 / d^2,
/// b3 = b2 + 2 (a2/d) (v (b1-b2)/2 - w c2)   (mod 2 a3),
/// c3 = (b3^2 - 4n) / (4 a3).
/// ```
fn compose_raw(f: &ReducedForm, g: &ReducedForm) -> (BigInt, BigInt, BigInt) {
    // operands are canonicalized to (|a|, 2|b|, -|c|): the ideal attached to a
    // cycle form is Z|a| + Z(|b| + sqrt n) regardless of the alternating signs,
    // and composing the signed forms directly lands on the conjugate half of
    // the cycle for half of the inputs
    let a1 = BigInt::from(f.a.magnitude().clone());
    let b1 = BigInt::from(f.b2.magnitude().clone());
    let a2 = BigInt::from(g.a.magnitude().clone());
    let b2 = BigInt::from(g.b2.magnitude().clone());
    let c2 = -BigInt::from(g.c.magnitude().clone());
    let (a1, b1) = (&a1, &b1);
    let (a2, b2, c2) = (&a2, &b2, &c2);
    let disc = to_int(&f.n) << 2u32;

    let half_sum = (b1 + b2) >> 1u32;
    let (d, _u, v, w) = ext_gcd3(a1, a2, &half_sum);
    let a3 = a1 * a2 / (&d * &d);
    let half_diff = (b1 - b2) >> 1u32;
    let inner = &v * &half_diff - &w * c2;
    let b_raw = b2 + ((a2 / &d) * &inner << 1u32);
    let two_a3 = &a3 << 1u32;
    let b3 = if two_a3.is_zero() {
        b_raw
    } else {
        b_raw.mod_floor(&two_a3)
    };
    let num = &b3 * &b3 - &disc;
    let den = &a3 << 2u32;
    let (c3, rem) = num.div_rem(&den);
    debug_assert!(rem.is_zero(), "composition produced a non-integral form");
    (a3, b3, c3)
}

/// Reduce an arbitrary form of discriminant 4n to a reduced one, stepping in
/// the rho+ direction. Deterministic: when the leading coefficient is still
/// large the middle coefficient is minimized, afterwards the cycle window is
/// used.
fn reduce_form(
    mut a: BigInt,
    mut b2: BigInt,
    mut c: BigInt,
    n: &BigUint,
) -> Result<ReducedForm, InfraError> {
    let a0 = isqrt(n);
    let a0i = to_int(&a0);
    let n_int = to_int(n);
    let max_iter = 128 + 4 * n.bits() as usize;
    for _ in 0..max_iter {
        if is_reduced_coeffs(&a, &b2, &c, n) {
            return Ok(ReducedForm {
                a,
                b2,
                c,
                n: n.clone(),
            });
        }
        if a.is_zero() {
            return Err(InfraError::ReductionDiverged);
        }
        let b = &b2 >> 1u32;
        let m_abs = to_int(a.magnitude());
        let b1 = if m_abs > a0i {
            // minimize |b1| over b1 = b (mod |a|)
            let r = b.mod_floor(&m_abs);
            if (&r << 1u32) > m_abs {
                r - &m_abs
            } else {
                r
            }
        } else {
            // cycle window, as in a forward step
            let sign = if a.is_negative() { -1 } else { 1 };
            let target = if sign < 0 { -&b } else { b.clone() };
            let u = &a0i - (&a0i - target).mod_floor(&m_abs);
            if sign < 0 {
                -u
            } else {
                u
            }
        };
        let num = &b1 * &b1 - &n_int;
        let (q, rem) = num.div_rem(&a);
        debug_assert!(rem.is_zero(), "inexact division during reduction");
        // the step output is ((b1^2 - n)/a_old, 2 b1, a_old)
        c = a;
        a = q;
        b2 = b1 << 1u32;
    }
    Err(InfraError::ReductionDiverged)
}

/// Gauss composition followed by reduction, on bare forms.
pub fn compose_forms(f: &ReducedForm, g: &ReducedForm) -> Result<ReducedForm, InfraError> {
    if f.n != g.n {
        return Err(InfraError::IncompatibleForms);
    }
    let (a3, b3, c3) = compose_raw(f, g);
    reduce_form(a3, b3, c3, &f.n)
}

/// Composition with distance ledger: the result's distance is the sum of the
/// operands' distances; the structural offset of order ln n introduced by
/// reduction is left to the caller's neighborhood search.
pub fn compose(f: &Cursor, g: &Cursor, ctx: &RealCtx) -> Result<Cursor, InfraError> {
    let form = compose_forms(&f.form, &g.form)?;
    Ok(Cursor {
        form,
        dist: f.dist.plus(&g.dist, ctx),
    })
}
