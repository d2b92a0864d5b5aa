//! Factoring drivers.
//!
//! Small cofactors fall to trial division; square-free composites with an
//! even period split at the midpoint of the period (or through the unit);
//! larger ones are attacked through the infrastructure: navigate to distance
//! h R / 2^l (and 3 h R / 2^l) along the cycle of reduced forms and look for
//! a form whose leading coefficient shares a factor with n. Finding the
//! principal form there instead means h is even, so the target is halved
//! again. Every divisor emitted is checked to divide n exactly.

use crate::analytic::{default_series_terms, hr_fast_series, hr_sine_sum, HRProduct};
use crate::arith::{is_prime, is_square, isqrt, small_primes};
use crate::cf::{expand_sqrt_default, CfError};
use crate::forms::{form_sequence, pell_unit, FormError};
use crate::infra::{compose, rho_backward, Cursor, InfraError, ReducedForm};
use crate::real::{to_f64_approx, RealCtx};
use crate::repr::{midpoint_factor, unit_split, SplitResult, SplitSource};
use astro_float::BigFloat;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("sqrt({n}) has odd period {period}; no even-period machinery applies")]
    NoEvenPeriod { n: BigUint, period: usize },
    #[error("all halving levels exhausted for {n} without a nontrivial divisor")]
    Exhausted { n: BigUint },
    #[error(transparent)]
    Precision(#[from] InfraError),
    #[error(transparent)]
    Expansion(#[from] CfError),
    #[error(transparent)]
    Forms(#[from] FormError),
    #[error("factorization of {n} incomplete; composite cofactor {cofactor} resisted all methods")]
    Incomplete {
        n: BigUint,
        cofactor: BigUint,
        partial: FactorizationResult,
    },
    #[error("input {0} is smaller than 2")]
    TooSmall(BigUint),
}

/// Which machinery produced a divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub divisor: BigUint,
    pub method: &'static str,
}

/// Complete factorization with per-divisor provenance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactorizationResult {
    pub n: BigUint,
    pub factors: Vec<(BigUint, u32)>,
    pub method_trace: Vec<TraceRecord>,
}

impl FactorizationResult {
    /// Recompose the factorization; must equal n.
    pub fn product(&self) -> BigUint {
        let mut acc = BigUint::one();
        for (p, e) in &self.factors {
            acc *= p.pow(*e);
        }
        acc
    }
}

/// Strategy for splitting composite cofactors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitEngine {
    /// period walk first (midpoint, then unit), trial division as fallback
    Walk,
    /// infrastructure navigation first
    Infrastructure,
    /// trial division first, then walk, then infrastructure
    Auto,
}

/// Split n by expanding sqrt(n) to the midpoint of its (even) period;
/// falls back to gcd(A_{tau-1} -+ 1, n) when the midpoint divisor is trivial.
pub fn factor_by_period_walk(n: &BigUint) -> Result<SplitResult, FactorError> {
    let exp = expand_sqrt_default(n)?;
    if exp.period() % 2 == 1 {
        return Err(FactorError::NoEvenPeriod {
            n: n.clone(),
            period: exp.period(),
        });
    }
    let fs = form_sequence(&exp)?;
    let split = midpoint_factor(&exp, &fs).expect("period checked even");
    if split.is_nontrivial() {
        return Ok(split);
    }
    let unit = pell_unit(&exp);
    Ok(unit_split(n, &unit).expect("norm is +1 for even period"))
}

/// Navigation plan: the target position, halving level, the largest giant
/// step used, and the error allowance the landing must satisfy.
#[derive(Debug, Clone)]
pub struct BsgsPlan {
    pub target_distance: BigFloat,
    pub halving_level: u32,
    pub giant_form: ReducedForm,
    pub tolerance: f64,
}

/// Smallest possible baby step, (1/2) ln((sqrt n + 1)/(sqrt n - 1)) ~ 1/sqrt n;
/// the navigation ledger must stay well inside this resolution.
fn baby_step_scale(n: &BigUint) -> f64 {
    let nf = n.to_f64().unwrap_or(f64::MAX);
    0.5 / nf.sqrt().max(2.0)
}

/// Walk to a form whose ledger distance brackets `target`: repeated squaring
/// of the first form for giant steps, greedy binary descent, then baby-step
/// corrections. Returns the nearer of the two bracketing forms.
pub fn navigate_to_distance(
    n: &BigUint,
    target: &BigFloat,
    ctx: &mut RealCtx,
) -> Result<(Cursor, BsgsPlan), FactorError> {
    assert!(target.is_positive(), "target distance must be positive");
    let tolerance = baby_step_scale(n);
    let start = Cursor::start(n, ctx);
    let target_f = to_f64_approx(target);

    // giant-step ladder by repeated squaring
    let mut ladder = vec![start.clone()];
    while ladder.last().unwrap().dist.approx() * 2.0 < target_f && ladder.len() < 64 {
        let top = ladder.last().unwrap();
        ladder.push(compose(top, top, ctx)?);
    }

    // greedy descent: add the largest giant that keeps the ledger below target
    let mut cur = start.clone();
    for g in ladder.iter().rev() {
        while cur.dist.approx() + g.dist.approx() <= target_f {
            cur = compose(&cur, g, ctx)?;
        }
    }

    // baby steps up to the target, keeping the previous position
    let mut prev = cur.clone();
    let mut guard = 0usize;
    while cur.dist.approx() < target_f {
        prev = cur.clone();
        cur = cur.advance(ctx)?;
        guard += 1;
        assert!(guard < 100_000, "baby-step walk ran away");
    }
    if cur.dist.err_bound >= tolerance {
        return Err(FactorError::Precision(InfraError::PrecisionExhausted {
            err_bound: cur.dist.err_bound,
            tolerance,
        }));
    }
    let nearer = if (cur.dist.approx() - target_f).abs() < (target_f - prev.dist.approx()).abs() {
        cur
    } else {
        prev
    };
    let plan = BsgsPlan {
        target_distance: target.clone(),
        halving_level: 0,
        giant_form: ladder.last().unwrap().form.clone(),
        tolerance,
    };
    Ok((nearer, plan))
}

/// Inspect the cycle around `center` (width baby steps on both sides) for a
/// form exposing a divisor of n; reports whether the principal form was seen.
fn scan_neighborhood(
    center: &Cursor,
    n: &BigUint,
    width: usize,
) -> Result<(Option<BigUint>, bool), FactorError> {
    let mut principal_seen = false;
    let mut check = |form: &ReducedForm| -> Option<BigUint> {
        if form.is_principal() {
            principal_seen = true;
        }
        let g = form.a().magnitude().gcd(n);
        (!g.is_one() && &g != n).then_some(g)
    };
    // rewind to the left edge, then sweep right
    let mut left = center.form.clone();
    for _ in 0..width {
        left = rho_backward(&left)?;
    }
    let mut f = left;
    for _ in 0..=2 * width {
        if let Some(g) = check(&f) {
            return Ok((Some(g), principal_seen));
        }
        f = crate::infra::rho_forward(&f)?;
    }
    Ok((None, principal_seen))
}

/// Default halving budget: h R / 2^l falls below a crude regulator lower
/// bound ln(2 sqrt n) after about log2(hr / ln(2 sqrt n)) levels.
pub fn default_max_halvings(n: &BigUint, hr: &HRProduct) -> u32 {
    let nf = n.to_f64().unwrap_or(f64::MAX);
    let r_lower = (2.0 * nf.sqrt()).ln();
    let v = to_f64_approx(&hr.value);
    if v <= r_lower {
        return 1;
    }
    ((v / r_lower).log2().ceil() as u32 + 2).clamp(1, 64)
}

/// Factor through the infrastructure: for each halving level l probe the
/// positions hr/2^l and 3 hr/2^l (and their 1/3 scalings when the unit is
/// known to be a cube), scanning ceil(ln n) baby steps around each landing.
pub fn factor_by_infrastructure(
    n: &BigUint,
    hr: &HRProduct,
    max_halvings: u32,
    ctx: &mut RealCtx,
) -> Result<SplitResult, FactorError> {
    let nf = n.to_f64().unwrap_or(f64::MAX);
    let width = (nf.ln().ceil() as usize).max(4);
    let min_target = baby_step_scale(n) * 4.0;
    // cheap cube hint for desk-scale n: the regulator may be a third of the
    // cycle length, in which case scaled targets are also worth probing
    let cube_hint = n.bits() <= 40 && expand_sqrt_default(n)
        .ok()
        .map(|exp| pell_unit(&exp).is_cube)
        .unwrap_or(false);

    let three = ctx.from_u64(3);
    for level in 1..=max_halvings {
        let denom = ctx.from_u64(1u64 << level.min(63));
        let base = ctx.div(&hr.value, &denom);
        let mut targets = vec![base.clone(), ctx.mul(&base, &three)];
        if cube_hint {
            targets.push(ctx.div(&base, &three));
        }
        for target in targets {
            if !target.is_positive() || to_f64_approx(&target) < min_target {
                continue;
            }
            let (landing, mut plan) = navigate_to_distance(n, &target, ctx)?;
            plan.halving_level = level;
            let (divisor, _principal) = scan_neighborhood(&landing, n, width)?;
            if let Some(g) = divisor {
                debug_assert!((n % &g).is_zero());
                let cofactor = n / &g;
                return Ok(SplitResult {
                    n: n.clone(),
                    factor: g,
                    cofactor,
                    source: SplitSource::Midpoint,
                });
            }
            // principal or nothing: halve again either way
        }
    }
    Err(FactorError::Exhausted { n: n.clone() })
}

/// h R for the factoring pipeline: the exact finite sum where it is
/// affordable, the fast series beyond — truncated far enough that the tail
/// stays below the baby-step resolution, unlike the looser default used for
/// plain evaluation.
pub fn hr_for_factoring(n: &BigUint, ctx: &mut RealCtx) -> HRProduct {
    if n.to_u64().map(|v| v <= 1_000_000).unwrap_or(false) {
        hr_sine_sum(n, ctx)
    } else {
        let terms = series_terms_for_tolerance(n, baby_step_scale(n) / 16.0)
            .max(default_series_terms(n));
        hr_fast_series(n, terms, ctx).expect("terms >= 1")
    }
}

/// Smallest truncation point whose tail bound drops below `tol`.
fn series_terms_for_tolerance(n: &BigUint, tol: f64) -> u64 {
    let d = crate::analytic::discriminant_for(n)
        .to_f64()
        .unwrap_or(f64::MAX);
    let mut x = 16.0f64;
    while crate::analytic::fast_series_tail_bound(d, x) > tol && x < 1e9 {
        x *= 1.25;
    }
    x.ceil() as u64
}

fn push_factor(factors: &mut Vec<(BigUint, u32)>, p: BigUint) {
    if let Some(slot) = factors.iter_mut().find(|(q, _)| *q == p) {
        slot.1 += 1;
    } else {
        factors.push((p, 1));
    }
}

/// Try to split a composite cofactor with the engine's method order;
/// trial division is always available as the last resort for small factors.
fn split_composite(
    m: &BigUint,
    engine: SplitEngine,
    trace: &mut Vec<TraceRecord>,
    ctx: &mut RealCtx,
) -> Option<(BigUint, BigUint)> {
    let by_walk = |trace: &mut Vec<TraceRecord>| -> Option<(BigUint, BigUint)> {
        match factor_by_period_walk(m) {
            Ok(split) if split.is_nontrivial() => {
                let method = match split.source {
                    SplitSource::Midpoint => "midpoint",
                    SplitSource::UnitMinus => "unit-minus",
                    SplitSource::UnitPlus => "unit-plus",
                    SplitSource::Trivial => unreachable!(),
                };
                trace.push(TraceRecord {
                    divisor: split.factor.clone(),
                    method,
                });
                Some((split.factor, split.cofactor))
            }
            _ => None,
        }
    };
    let by_infra = |trace: &mut Vec<TraceRecord>, ctx: &mut RealCtx| {
        let hr = hr_for_factoring(m, ctx);
        let budget = default_max_halvings(m, &hr);
        match factor_by_infrastructure(m, &hr, budget, ctx) {
            Ok(split) if split.is_nontrivial() => {
                trace.push(TraceRecord {
                    divisor: split.factor.clone(),
                    method: "infrastructure",
                });
                Some((split.factor, split.cofactor))
            }
            _ => None,
        }
    };
    let by_trial = |trace: &mut Vec<TraceRecord>| -> Option<(BigUint, BigUint)> {
        for &p in small_primes() {
            let pb = BigUint::from(p);
            if (m % &pb).is_zero() {
                trace.push(TraceRecord {
                    divisor: pb.clone(),
                    method: "trial",
                });
                return Some((pb.clone(), m / &pb));
            }
        }
        None
    };
    match engine {
        SplitEngine::Walk => by_walk(trace)
            .or_else(|| by_trial(trace))
            .or_else(|| by_infra(trace, ctx)),
        SplitEngine::Infrastructure => by_infra(trace, ctx)
            .or_else(|| by_walk(trace))
            .or_else(|| by_trial(trace)),
        SplitEngine::Auto => by_trial(trace)
            .or_else(|| by_walk(trace))
            .or_else(|| by_infra(trace, ctx)),
    }
}

/// Recursive factorization driver.
pub fn factor_with(
    n: &BigUint,
    engine: SplitEngine,
    ctx: &mut RealCtx,
) -> Result<FactorizationResult, FactorError> {
    if n < &BigUint::from(2u32) {
        return Err(FactorError::TooSmall(n.clone()));
    }
    let mut result = FactorizationResult {
        n: n.clone(),
        factors: Vec::new(),
        method_trace: Vec::new(),
    };
    let mut stack = vec![n.clone()];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            push_factor(&mut result.factors, m);
            continue;
        }
        // the expansion machinery needs a non-square radicand; peel squares
        if is_square(&m) {
            let root = isqrt(&m);
            result.method_trace.push(TraceRecord {
                divisor: root.clone(),
                method: "square",
            });
            stack.push(root.clone());
            stack.push(root);
            continue;
        }
        match split_composite(&m, engine, &mut result.method_trace, ctx) {
            Some((f, cof)) => {
                debug_assert_eq!(&f * &cof, m);
                stack.push(f);
                stack.push(cof);
            }
            None => {
                result.factors.sort();
                return Err(FactorError::Incomplete {
                    n: n.clone(),
                    cofactor: m,
                    partial: result,
                });
            }
        }
    }
    result.factors.sort();
    debug_assert_eq!(result.product(), *n);
    debug_assert!(result.factors.iter().all(|(p, _)| is_prime(p)));
    Ok(result)
}

/// Trial division, square extraction, primality screening, then the
/// period-walk and infrastructure splitters, recursively.
pub fn full_factorization(n: &BigUint, ctx: &mut RealCtx) -> Result<FactorizationResult, FactorError> {
    factor_with(n, SplitEngine::Auto, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn period_walk_examples() {
        let s = factor_by_period_walk(&b(21945)).unwrap();
        assert_eq!(s.factor, b(21));
        assert_eq!(s.source, SplitSource::Midpoint);

        let s33 = factor_by_period_walk(&b(33)).unwrap();
        assert!(s33.factor == b(3) || s33.factor == b(11));

        match factor_by_period_walk(&b(13)) {
            Err(FactorError::NoEvenPeriod { period: 5, .. }) => {}
            other => panic!("expected NoEvenPeriod, got {other:?}"),
        }
    }

    #[test]
    fn navigation_finds_period_and_midpoint() {
        let mut ctx = RealCtx::new(128);
        let n = b(21945);
        // ln(c_9): landing at the full period must be the principal form
        let exp = expand_sqrt_default(&n).unwrap();
        let fs = form_sequence(&exp).unwrap();
        let unit = pell_unit(&exp);
        let pd = crate::infra::period_distance(&fs, &unit, &mut ctx, 1e-9).unwrap();
        let (landing, plan) = navigate_to_distance(&n, &pd.value, &mut ctx).unwrap();
        assert!(plan.tolerance > 0.0);
        let mut found_principal = landing.form.is_principal();
        let mut f = landing.form.clone();
        for _ in 0..3 {
            f = crate::infra::rho_forward(&f).unwrap();
            found_principal |= f.is_principal();
        }
        let mut f = landing.form.clone();
        for _ in 0..3 {
            f = rho_backward(&f).unwrap();
            found_principal |= f.is_principal();
        }
        assert!(found_principal, "period-distance landing missed the principal form");

        // half the period: the midpoint form with |a| = 21 is nearby
        let half = ctx.half(&pd.value);
        let (landing, _) = navigate_to_distance(&n, &half, &mut ctx).unwrap();
        let mut near_midpoint = false;
        let mut f = landing.form.clone();
        for _ in 0..4 {
            near_midpoint |= f.a().magnitude() == &b(21);
            f = crate::infra::rho_forward(&f).unwrap();
        }
        let mut f = landing.form.clone();
        for _ in 0..4 {
            near_midpoint |= f.a().magnitude() == &b(21);
            f = rho_backward(&f).unwrap();
        }
        assert!(near_midpoint, "half-period landing missed the midpoint form");
    }

    #[test]
    fn infrastructure_splits_examples() {
        let mut ctx = RealCtx::new(128);
        for n in [21945u64, 33, 1045] {
            let nn = b(n);
            let hr = hr_for_factoring(&nn, &mut ctx);
            let budget = default_max_halvings(&nn, &hr);
            let split = factor_by_infrastructure(&nn, &hr, budget, &mut ctx).unwrap();
            assert!(split.is_nontrivial(), "no split for {n}");
            assert!((&nn % &split.factor).is_zero());
        }
        // prime: exhausted without a divisor
        let p = b(999983);
        let hr = hr_for_factoring(&p, &mut ctx);
        match factor_by_infrastructure(&p, &hr, 6, &mut ctx) {
            Err(FactorError::Exhausted { .. }) => {}
            other => panic!("expected Exhausted for a prime, got {other:?}"),
        }
    }

    #[test]
    fn full_factorization_examples() {
        let mut ctx = RealCtx::new(128);
        let r = full_factorization(&b(21945), &mut ctx).unwrap();
        let primes: Vec<u64> = r.factors.iter().map(|(p, _)| p.to_u64().unwrap()).collect();
        assert_eq!(primes, vec![3, 5, 7, 11, 19]);

        let r21 = full_factorization(&b(21), &mut ctx).unwrap();
        let primes: Vec<u64> = r21.factors.iter().map(|(p, _)| p.to_u64().unwrap()).collect();
        assert_eq!(primes, vec![3, 7]);

        let r13 = full_factorization(&b(13), &mut ctx).unwrap();
        assert_eq!(r13.factors, vec![(b(13), 1)]);

        // squares are peeled before the expansion machinery
        let r = full_factorization(&b(44100), &mut ctx).unwrap(); // (2*3*5*7)^2
        assert_eq!(r.product(), b(44100));
        assert!(r.factors.iter().all(|(_, e)| *e == 2));

        assert!(matches!(
            full_factorization(&b(1), &mut ctx),
            Err(FactorError::TooSmall(_))
        ));
    }

    #[test]
    fn walk_engine_traces_midpoint() {
        let mut ctx = RealCtx::new(128);
        let r = factor_with(&b(21945), SplitEngine::Walk, &mut ctx).unwrap();
        assert_eq!(r.product(), b(21945));
        assert!(
            r.method_trace.iter().any(|t| t.method == "midpoint"),
            "walk engine must surface a midpoint split: {:?}",
            r.method_trace
        );
    }

    #[test]
    fn semiprime_beyond_trial_division() {
        // 1019 * 1031: both primes exceed the trial-division bound and are
        // 3 mod 4, so the period is even and the walk must split it
        let mut ctx = RealCtx::new(128);
        let n = b(1019 * 1031);
        let r = factor_with(&n, SplitEngine::Walk, &mut ctx).unwrap();
        assert_eq!(r.factors, vec![(b(1019), 1), (b(1031), 1)]);
        let auto = full_factorization(&n, &mut ctx).unwrap();
        assert_eq!(auto.factors, r.factors);
    }
}
