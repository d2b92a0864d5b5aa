//! High-precision real arithmetic context.
//!
//! Thin layer over `astro_float` that fixes the working precision per call
//! site, converts exact integers losslessly, and provides the few helpers
//! (sqrt of a radicand, ln of a big integer pair, Euler's constant) the rest
//! of the crate needs. Precision is always an explicit parameter carried by
//! the context value, never global state.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

/// Euler-Mascheroni constant to 330 decimal digits, enough for any working
/// precision up to ~1090 bits.
const EULER_GAMMA_330: &str = "5.77215664901532860606512090082402431042159335939923598805767234884867726777664670936947063291746749514631447249807082480960504014486542836224173997644923536253500333742937337737673942792595258247094916008735203948165670853233151776611528621199501507984793745085705740029921354786146694029604325421519058775535267331399254012967421e-1";

/// Maximum precision for which the embedded constants stay exact.
pub const MAX_PRECISION_BITS: usize = 1024;

/// Working context: precision in bits plus the shared constants cache.
pub struct RealCtx {
    bits: usize,
    rm: RoundingMode,
    consts: Consts,
}

impl RealCtx {
    pub fn new(bits: usize) -> Self {
        assert!(
            (64..=MAX_PRECISION_BITS).contains(&bits),
            "precision must be between 64 and {MAX_PRECISION_BITS} bits"
        );
        RealCtx {
            bits,
            rm: RoundingMode::ToEven,
            consts: Consts::new().expect("constants cache"),
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn rm(&self) -> RoundingMode {
        self.rm
    }

    /// Relative rounding error bound of a single arithmetic operation.
    pub fn eps(&self) -> f64 {
        2f64.powi(1 - self.bits as i32)
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_u64(0, self.bits)
    }

    pub fn from_u64(&self, v: u64) -> BigFloat {
        BigFloat::from_u64(v, self.bits)
    }

    pub fn from_f64(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.bits)
    }

    /// Lossless integer conversion followed by rounding to working precision.
    pub fn from_biguint(&self, v: &BigUint) -> BigFloat {
        self.from_biguint_prec(v, self.bits)
    }

    fn from_biguint_prec(&self, v: &BigUint, p: usize) -> BigFloat {
        if v.is_zero() {
            return BigFloat::from_u64(0, p);
        }
        let words = v.to_u64_digits();
        let e = (words.len() * 64) as astro_float::Exponent;
        let mut f = BigFloat::from_words(&words, Sign::Pos, e);
        f.set_precision(p.max(64), self.rm).expect("set_precision");
        f
    }

    pub fn from_bigint(&self, v: &BigInt) -> BigFloat {
        let mut f = self.from_biguint(v.magnitude());
        if v.sign() == num_bigint::Sign::Minus {
            f.inv_sign();
        }
        f
    }

    pub fn pi(&mut self) -> BigFloat {
        let bits = self.bits;
        self.consts.pi(bits, self.rm)
    }

    /// Euler's gamma at working precision.
    pub fn euler_gamma(&mut self) -> BigFloat {
        let (bits, rm) = (self.bits, self.rm);
        BigFloat::parse(EULER_GAMMA_330, Radix::Dec, bits, rm, &mut self.consts)
    }

    pub fn sqrt(&self, x: &BigFloat) -> BigFloat {
        x.sqrt(self.bits, self.rm)
    }

    /// sqrt(n) for an exact integer radicand.
    pub fn sqrt_uint(&self, n: &BigUint) -> BigFloat {
        // compute the square root from an argument carrying guard bits so the
        // final rounding is the only loss
        self.from_biguint_prec(n, self.bits + 64).sqrt(self.bits, self.rm)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        let (bits, rm) = (self.bits, self.rm);
        x.ln(bits, rm, &mut self.consts)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        let (bits, rm) = (self.bits, self.rm);
        x.exp(bits, rm, &mut self.consts)
    }

    pub fn sin(&mut self, x: &BigFloat) -> BigFloat {
        let (bits, rm) = (self.bits, self.rm);
        x.sin(bits, rm, &mut self.consts)
    }

    pub fn cos(&mut self, x: &BigFloat) -> BigFloat {
        let (bits, rm) = (self.bits, self.rm);
        x.cos(bits, rm, &mut self.consts)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, self.rm)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, self.rm)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, self.rm)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, self.rm)
    }

    pub fn half(&self, a: &BigFloat) -> BigFloat {
        a.div(&self.from_u64(2), self.bits, self.rm)
    }

    /// ln(a + b*sqrt(n)) for exact non-negative integers a, b.
    pub fn ln_surd(&mut self, a: &BigUint, b: &BigUint, n: &BigUint) -> BigFloat {
        let s = self.sqrt_uint(n);
        let v = self.add(&self.from_biguint(a), &self.mul(&self.from_biguint(b), &s));
        self.ln(&v)
    }

    /// Format a value as a decimal scientific string.
    pub fn to_decimal(&mut self, x: &BigFloat) -> String {
        format!("{x}")
    }
}

/// Approximate f64 view of a BigFloat, saturating on exponent overflow.
/// Used only for error-budget bookkeeping and reports, never for results.
pub fn to_f64_approx(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    match x.as_raw_parts() {
        Some((words, _n, sign, e, _inexact)) => {
            let top = *words.last().unwrap_or(&0);
            // value = 0.mantissa * 2^e with the top mantissa bit set
            let frac = top as f64 / 2f64.powi(64);
            let mag = if e > 1023 {
                f64::INFINITY
            } else if e < -1020 {
                0.0
            } else {
                frac * 2f64.powi(e)
            };
            if sign == Sign::Neg {
                -mag
            } else {
                mag
            }
        }
        None => f64::NAN,
    }
}
