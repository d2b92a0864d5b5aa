//! Exact integer helpers: integer roots, primality, small-prime tables.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::OnceLock;

/// Largest `s` with `s*s <= n`, computed by Newton iteration on integers.
///
/// No floating point is involved, so the result is exact for any size of `n`.
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    if let Some(small) = n.to_u64() {
        return BigUint::from(isqrt_u64(small));
    }
    // Initial guess: 2^ceil(bits/2) >= sqrt(n), then Newton descends monotonically.
    let mut x = BigUint::one() << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1u32;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// `isqrt` specialised to machine words.
pub fn isqrt_u64(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64 + 1;
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map(|s| s <= n).unwrap_or(false) {
        x += 1;
    }
    x
}

/// Largest `s` with `s^3 <= n`.
pub fn icbrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    let mut x = BigUint::one() << n.bits().div_ceil(3);
    let two = BigUint::from(2u32);
    loop {
        let y = (&two * &x + n / (&x * &x)) / BigUint::from(3u32);
        if y >= x {
            break;
        }
        x = y;
    }
    // Newton can stop one off in either direction; fix up exactly.
    while &x * &x * &x > *n {
        x -= BigUint::one();
    }
    loop {
        let x1 = &x + BigUint::one();
        if &x1 * &x1 * &x1 <= *n {
            x = x1;
        } else {
            break;
        }
    }
    x
}

/// True iff `n` is a perfect square.
pub fn is_square(n: &BigUint) -> bool {
    let s = isqrt(n);
    &s * &s == *n
}

/// Primes below 1000, used for trial division and sieving helpers.
pub fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let bound = 1000usize;
        let mut sieve = vec![true; bound];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..bound {
            if sieve[i] {
                for j in (i * i..bound).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        (2..bound).filter(|&i| sieve[i]).map(|i| i as u64).collect()
    })
}

fn mulmod_u128(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_u128(acc, b, m);
        }
        b = mulmod_u128(b, b, m);
        e >>= 1;
    }
    acc
}

fn miller_rabin_u64(n: u64, base: u64) -> bool {
    // returns true if n passes the strong probable prime test to `base`
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    let mut x = powmod_u64(base, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mulmod_u128(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic Miller-Rabin for 64-bit inputs.
///
/// The base set {2,3,5,7,11,13,17,19,23,29,31,37} is known to be exact
/// below 3.3 * 10^24, which covers the whole u64 range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
        .iter()
        .all(|&b| miller_rabin_u64(n, b))
}

fn powmod_big(base: &BigUint, exp: &BigUint, m: &BigUint) -> BigUint {
    base.modpow(exp, m)
}

fn miller_rabin_big(n: &BigUint, base: u64) -> bool {
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let b = BigUint::from(base) % n;
    if b.is_zero() {
        return true;
    }
    let mut x = powmod_big(&b, &d, n);
    if x == one || x == nm1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == nm1 {
            return true;
        }
    }
    false
}

/// Primality test: deterministic for inputs fitting in 64 bits, a strong
/// probable prime test over the first 25 prime bases beyond that.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let bases = [
        2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97,
    ];
    for &p in &bases {
        if (n % BigUint::from(p)).is_zero() {
            return false;
        }
    }
    bases.iter().all(|&b| miller_rabin_big(n, b))
}

/// gcd of a signed magnitude and an unsigned value.
pub fn gcd_abs(a: &num_bigint::BigInt, n: &BigUint) -> BigUint {
    a.magnitude().gcd(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&BigUint::from(21945u32)), BigUint::from(148u32));
        assert_eq!(isqrt(&BigUint::zero()), BigUint::zero());
        assert_eq!(isqrt(&BigUint::from(49u32)), BigUint::from(7u32));
        assert_eq!(isqrt(&BigUint::from(48u32)), BigUint::from(6u32));
        assert_eq!(isqrt(&BigUint::from(50u32)), BigUint::from(7u32));
    }

    #[test]
    fn icbrt_examples() {
        assert_eq!(icbrt(&BigUint::from(8u32)), BigUint::from(2u32));
        assert_eq!(icbrt(&BigUint::from(7u32)), BigUint::from(1u32));
        assert_eq!(icbrt(&BigUint::from(27000u32)), BigUint::from(30u32));
        let big = BigUint::parse_bytes(b"1000000000000000000000000000000", 10).unwrap();
        assert_eq!(
            icbrt(&big),
            BigUint::parse_bytes(b"10000000000", 10).unwrap()
        );
    }

    #[test]
    fn primality_small() {
        let primes: Vec<u64> = (2..100).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
        );
        assert!(is_prime_u64(4229));
        assert!(!is_prime_u64(21945));
        assert!(is_prime(&BigUint::from(3004586111u64)));
        assert!(is_prime(&BigUint::from(3004586089u64)));
        assert!(!is_prime(&BigUint::from(3004586089u64 * 4229)));
    }

    #[test]
    fn prime_big_strong_probable() {
        // 2^89 - 1 is a Mersenne prime
        let m89 = (BigUint::one() << 89u32) - BigUint::one();
        assert!(is_prime(&m89));
        let composite = &m89 * BigUint::from(3u32);
        assert!(!is_prime(&composite));
    }

    proptest! {
        #[test]
        fn isqrt_is_floor_sqrt(n in 0u64..u64::MAX) {
            let s = isqrt_u64(n);
            prop_assert!(s as u128 * s as u128 <= n as u128);
            prop_assert!((s as u128 + 1) * (s as u128 + 1) > n as u128);
        }

        #[test]
        fn isqrt_big_matches_reference(n in 0u128..u128::MAX) {
            let b = BigUint::from_u128(n).unwrap();
            prop_assert_eq!(isqrt(&b), b.sqrt());
        }

        #[test]
        fn icbrt_is_floor_cbrt(n in 0u64..u64::MAX) {
            let b = BigUint::from(n);
            let c = icbrt(&b);
            prop_assert!(&c * &c * &c <= b);
            let c1 = &c + BigUint::one();
            prop_assert!(&c1 * &c1 * &c1 > b);
        }
    }
}
