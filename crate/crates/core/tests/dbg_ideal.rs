use cfract_core::cf::*;
use cfract_core::infra::*;
use cfract_core::real::*;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut x0, mut x1) = (BigInt::one(), BigInt::zero());
    let (mut y0, mut y1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1; r0 = std::mem::replace(&mut r1, r2);
        let x2 = &x0 - &q * &x1; x0 = std::mem::replace(&mut x1, x2);
        let y2 = &y0 - &q * &y1; y0 = std::mem::replace(&mut y1, y2);
    }
    if r0.is_negative() { (-r0, -x0, -y0) } else { (r0, x0, y0) }
}

// ideal multiply: I3 = I1*I2 / d, returns (q3, p3)
fn ideal_mul(q1: &BigInt, p1: &BigInt, q2: &BigInt, p2: &BigInt, n: &BigInt) -> (BigInt, BigInt) {
    let sum = p1 + p2;
    let (g1, u, v) = ext_gcd(q1, q2);
    let (d, s, w) = ext_gcd(&g1, &sum);
    let u = &s * u; let v = s * v;
    let q3 = (q1 * q2) / (&d * &d);
    let num = &u * q1 * p2 + &v * q2 * p1 + &w * (p1 * p2 + n);
    debug_assert!((&num % &d).is_zero());
    let p3 = (num / &d).mod_floor(&q3);
    (q3, p3)
}

// reduce ideal (q possibly signed/large) to the cycle
fn ideal_reduce(mut q: BigInt, mut p: BigInt, a0: &BigInt, n: &BigInt) -> (BigInt, BigInt, usize) {
    let mut steps = 0;
    loop {
        let qa = BigInt::from(q.magnitude().clone());
        let reduced = q.is_positive()
            && p.is_positive()
            && &p <= a0
            && q <= a0 + &p
            && &q + &p > *a0;
        if reduced { return (q, p, steps); }
        // step: p' = -p mod |q|, windowed; negative q needs |p'| > sqrt(n)
        // so the next q is positive again
        let p_new = if &qa > &(a0 + a0) {
            let r = (-&p).mod_floor(&qa);
            if (&r << 1u32) > qa { r - &qa } else { r }
        } else if q.is_negative() {
            a0 + BigInt::from(1u32) + (-&p - a0 - BigInt::from(1u32)).mod_floor(&qa)
        } else {
            a0 - (a0 + &p).mod_floor(&qa)
        };
        let q_new = (n - &p_new * &p_new) / &q;
        q = q_new; p = p_new;
        steps += 1;
        assert!(steps < 10000, "ideal reduction diverged");
    }
}

#[test]
fn dbg() {
    let n = 610177u64;
    let nn = BigUint::from(n);
    let n_int = BigInt::from(n);
    let a0 = BigInt::from(781u32);
    let mut ctx = RealCtx::new(128);
    let exp = expand_sqrt_default(&nn).unwrap();
    let tau = exp.period();
    let r_cycle = 1134.8671f64;
    // chain: position of ideal (r_m, c_m) using the cursor walk distances
    let mut pos: HashMap<(BigInt, BigInt), f64> = HashMap::new();
    let mut cur = Cursor::start(&nn, &mut ctx);
    let mut chain: Vec<(BigInt, BigInt, f64)> = Vec::new();
    for m in 1..=tau {
        let key = (BigInt::from(exp.r(m).clone()), BigInt::from(exp.c(m).clone()));
        pos.insert(key.clone(), cur.dist.approx());
        chain.push((key.0, key.1, cur.dist.approx()));
        cur = cur.advance(&mut ctx).unwrap();
    }
    let mut worst: f64 = 0.0;
    for &(i, j) in &[(0usize,0usize),(1,1),(2,2),(3,3),(4,4),(7,7),(16,16),(64,64),(128,128),(200,200),(0,1),(1,2),(2,3),(2,16),(64,200),(128,911),(500,700)] {
        let (q1, p1, x) = (&chain[i].0, &chain[i].1, chain[i].2);
        let (q2, p2, y) = (&chain[j].0, &chain[j].1, chain[j].2);
        let (q3, p3) = ideal_mul(q1, p1, q2, p2, &n_int);
        let (qr, pr, steps) = ideal_reduce(q3, p3, &a0, &n_int);
        match pos.get(&(qr.clone(), pr.clone())) {
            Some(&t) => {
                let mut defect = t - (x + y);
                while defect > r_cycle/2.0 { defect -= r_cycle; }
                while defect < -r_cycle/2.0 { defect += r_cycle; }
                if defect.abs() > worst { worst = defect.abs(); }
                println!("({i:>3},{j:>3}) x+y={:>8.3} true={:>8.3} defect={:+8.4} steps={steps}", x+y, t, defect);
            }
            None => println!("({i:>3},{j:>3}) landed OFF-CHAIN (q={qr}, p={pr})"),
        }
    }
    println!("worst |defect| = {worst:.4}");
}
