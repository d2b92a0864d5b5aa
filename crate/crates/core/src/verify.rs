//! Batch verification suites: every structural identity and invariant of the
//! library, swept over ranges of radicands. The CLI `verify` command and the
//! acceptance tests both drive these.

use crate::analytic::{class_number_hypothesis, hr_fast_series, hr_sine_sum};
use crate::arith::is_square;
use crate::cf::{
    approximation_within_bound, convergents, expand_sqrt_default, kraitchik_bound_holds,
    palindrome_holds, verify_identities,
};
use crate::forms::{
    bounds_hold, check_symmetry, check_uniqueness, form_at, form_sequence, norm_relation_holds,
    pell_unit, t_matrix_reproduces, translate,
};
use crate::infra::{period_distance, rho_forward, ReducedForm};
use crate::real::{to_f64_approx, RealCtx};
use crate::repr::{
    check_gamma_lemma, midperiod_lemma_holds, midpoint_divides_4n, midpoint_factor,
    sum_of_two_squares, two_squares_brute_force,
};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Result of one named suite: how many inputs were checked and which failed.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checked: u64,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub upto: u64,
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.suites.iter().all(|s| s.pass())
    }
}

/// Smallest-prime-factor sieve, for square-free tests and prime enumeration.
pub fn smallest_prime_factor_sieve(bound: usize) -> Vec<u32> {
    let mut spf = vec![0u32; bound + 1];
    for i in 2..=bound {
        if spf[i] == 0 {
            for j in (i..=bound).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

pub fn is_square_free(mut n: u64, spf: &[u32]) -> bool {
    while n > 1 {
        let p = spf[n as usize] as u64;
        n /= p;
        if n % p == 0 {
            return false;
        }
    }
    true
}

struct Suite {
    out: SuiteOutcome,
    cap: usize,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            out: SuiteOutcome {
                name,
                checked: 0,
                failures: Vec::new(),
            },
            cap: 8,
        }
    }

    fn record(&mut self, ok: bool, n: u64, detail: &str) {
        self.out.checked += 1;
        if !ok && self.out.failures.len() < self.cap {
            self.out.failures.push(format!("n={n}: {detail}"));
        }
    }
}

/// Run every module's invariant suite for all non-square 2 <= n <= upto.
pub fn run_suites(upto: u64, ctx: &mut RealCtx) -> VerifyReport {
    let mut expansion = Suite::new("expansion-structure");
    let mut identities = Suite::new("convergent-identities");
    let mut approximation = Suite::new("convergent-approximation");
    let mut norms = Suite::new("norm-sequences");
    let mut symmetry = Suite::new("symmetry-uniqueness");
    let mut translation = Suite::new("period-translation");
    let mut parity = Suite::new("period-parity-consequences");
    let mut cycle = Suite::new("rho-cycle");
    let mut regulator = Suite::new("regulator-identity");

    for n in 2..=upto {
        let nn = BigUint::from(n);
        if is_square(&nn) {
            continue;
        }
        let exp = expand_sqrt_default(&nn).expect("non-square expands");
        let tau = exp.period();

        let two_a0 = exp.a0() << 1u32;
        let structure_ok = palindrome_holds(&exp)
            && kraitchik_bound_holds(&exp)
            && exp.partials()[tau - 1] == two_a0
            && exp.partials()[..tau - 1].iter().all(|a| *a < two_a0)
            && (1..=tau).all(|m| {
                exp.partial(m) == exp.partial(m + tau) && exp.c(m) == exp.c(m + tau)
            });
        expansion.record(structure_ok, n, "palindrome/period-end/extension");

        let report = verify_identities(&exp, 2 * tau);
        identities.record(report.all_pass(), n, &format!("{report:?}"));

        let conv = convergents(&exp, 3 * tau + 7);
        let approx_ok =
            (0..=2 * tau as i64).all(|m| approximation_within_bound(&exp, &conv, m));
        approximation.record(approx_ok, n, "1/(B_m B_{m+1}) bound");

        let fs = match form_sequence(&exp) {
            Ok(fs) => fs,
            Err(e) => {
                norms.record(false, n, &format!("{e}"));
                continue;
            }
        };
        let norms_ok = norm_relation_holds(&fs, 2 * tau)
            && bounds_hold(&exp, &fs)
            && t_matrix_reproduces(&exp, &fs)
            && (1..=tau).all(|m| form_at(&fs, m).is_primitive());
        norms.record(norms_ok, n, "norm relation / bounds / matrix form");

        let sym = check_symmetry(&fs);
        symmetry.record(
            sym.all_pass() && check_uniqueness(&fs),
            n,
            &format!("{sym:?}"),
        );

        let unit = pell_unit(&exp);
        let trans_ok = (0..tau.min(6)).all(|m| {
            (1..=2u64).all(|k| {
                let t = translate(&conv[m + 1], &unit, tau, k);
                t == conv[m + 1 + (k as usize) * tau]
            })
        });
        translation.record(trans_ok, n, "c_{m+k tau} = c_m c_{tau-1}^k");

        if tau % 2 == 1 {
            let ts = sum_of_two_squares(&exp, &fs).expect("odd period");
            let exact = &ts.x * &ts.x + &ts.y * &ts.y == nn;
            parity.record(exact, n, "two-squares identity");
        } else {
            let lemmas = midperiod_lemma_holds(&exp, &fs)
                && check_gamma_lemma(&fs, &unit)
                && midpoint_divides_4n(&exp, &fs);
            let split = midpoint_factor(&exp, &fs).expect("even period");
            let divides = (&nn % &split.factor).to_u32() == Some(0) || split.factor == BigUint::from(1u32);
            parity.record(lemmas && divides, n, "mid-period lemmas");
        }

        // the rho orbit retraces the form sequence (kept to modest n: the
        // walk is linear in the period)
        if n <= 600 {
            let cycle_len = if tau % 2 == 0 { tau } else { 2 * tau };
            let mut ok = true;
            let q1 = form_at(&fs, 1);
            let mut f = ReducedForm::new(q1.a, q1.b2, q1.c, nn.clone()).expect("cycle form");
            for m in 1..=cycle_len {
                let qm = form_at(&fs, m);
                if f.as_quadratic_form() != qm {
                    ok = false;
                    break;
                }
                f = match rho_forward(&f) {
                    Ok(next) => next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                };
            }
            ok = ok && f.as_quadratic_form() == form_at(&fs, 1);
            cycle.record(ok, n, "rho orbit vs form sequence");
        }

        match period_distance(&fs, &unit, ctx, 1e-12) {
            Ok(pd) => regulator.record(pd.err_bound < 1e-20, n, "error bound"),
            Err(e) => regulator.record(false, n, &format!("{e}")),
        }
    }

    VerifyReport {
        upto,
        suites: vec![
            expansion,
            identities,
            approximation,
            norms,
            symmetry,
            translation,
            parity,
            cycle,
            regulator,
        ]
        .into_iter()
        .map(|s| s.out)
        .collect(),
    }
}

/// Odd-period two-squares sweep over primes p = 1 (mod 4) up to `bound`,
/// cross-checked against brute force.
pub fn two_squares_prime_sweep(bound: u64) -> SuiteOutcome {
    let spf = smallest_prime_factor_sieve(bound as usize);
    let mut suite = Suite::new("two-squares-primes");
    for p in (5..=bound).step_by(4) {
        if spf[p as usize] as u64 != p {
            continue;
        }
        let nn = BigUint::from(p);
        let exp = expand_sqrt_default(&nn).expect("prime expands");
        if exp.period() % 2 == 0 {
            suite.record(false, p, "period is even for p = 1 mod 4");
            continue;
        }
        let fs = form_sequence(&exp).expect("forms");
        let ts = sum_of_two_squares(&exp, &fs).expect("odd period");
        let exact = &ts.x * &ts.x + &ts.y * &ts.y == nn;
        let brute = two_squares_brute_force(p).expect("p = 1 mod 4 is a sum of two squares");
        let x = ts.x.to_u64().unwrap_or(0);
        let y = ts.y.to_u64().unwrap_or(0);
        let matches = (x.min(y), x.max(y)) == brute;
        suite.record(exact && matches, p, "midpoint vs brute force");
    }
    suite.out
}

/// Even-period sweep up to `bound`: semiprimes p*q with p = q = 3 (mod 4)
/// must split at the midpoint, and the midpoint delta divides 4n for every
/// square-free even-period n.
pub fn even_period_split_sweep(bound: u64) -> (SuiteOutcome, SuiteOutcome) {
    let spf = smallest_prime_factor_sieve(bound as usize);
    let mut semis = Suite::new("semiprime-midpoint-split");
    let mut divides = Suite::new("midpoint-divides-4n");
    for n in 2..=bound {
        if !is_square_free(n, &spf) {
            continue;
        }
        let p = spf[n as usize] as u64;
        let q = n / p;
        let is_semi = q > p && spf[q as usize] as u64 == q;
        let both_3_mod_4 = is_semi && p % 4 == 3 && q % 4 == 3;

        let nn = BigUint::from(n);
        if is_square(&nn) {
            continue;
        }
        let exp = expand_sqrt_default(&nn).expect("expands");
        if both_3_mod_4 && exp.period() % 2 == 1 {
            semis.record(false, n, "period odd for p = q = 3 mod 4 semiprime");
            continue;
        }
        if exp.period() % 2 == 1 {
            continue;
        }
        let fs = form_sequence(&exp).expect("forms");
        divides.record(midpoint_divides_4n(&exp, &fs), n, "delta at midpoint | 4n");
        if both_3_mod_4 {
            let split = midpoint_factor(&exp, &fs).expect("even period");
            semis.record(split.is_nontrivial(), n, "trivial midpoint factor");
        }
    }
    (semis.out, divides.out)
}

/// Theorem-7 sweep: |sum of step distances - ln(unit)| < tol for all
/// non-square n up to `bound`, at the context precision.
pub fn regulator_sweep(bound: u64, tol: f64, ctx: &mut RealCtx) -> SuiteOutcome {
    let mut suite = Suite::new("regulator-sweep");
    for n in 2..=bound {
        let nn = BigUint::from(n);
        if is_square(&nn) {
            continue;
        }
        let exp = expand_sqrt_default(&nn).expect("expands");
        let fs = form_sequence(&exp).expect("forms");
        let unit = pell_unit(&exp);
        match period_distance(&fs, &unit, ctx, tol) {
            Ok(pd) => {
                let ln_unit = ctx.ln_surd(&unit.numer, &unit.denom, &nn);
                let defect = to_f64_approx(&ctx.sub(&pd.value, &ln_unit)).abs();
                suite.record(defect < tol, n, &format!("defect {defect:e}"));
            }
            Err(e) => suite.record(false, n, &format!("{e}")),
        }
    }
    suite.out
}

/// Dirichlet sweep: the two h*R routes agree to `rel_tol`, and h*R divided by
/// the period distance is within `rel_tol` of k or k/3 for an integer
/// k <= k_max, over square-free n up to `bound`.
pub fn dirichlet_sweep(bound: u64, rel_tol: f64, k_max: u64, ctx: &mut RealCtx) -> SuiteOutcome {
    let spf = smallest_prime_factor_sieve(bound as usize);
    let mut suite = Suite::new("dirichlet-cross-check");
    for n in 2..=bound {
        if !is_square_free(n, &spf) {
            continue;
        }
        let nn = BigUint::from(n);
        let sine = hr_sine_sum(&nn, ctx);
        let terms = 50 * (n as f64).ln().ceil() as u64;
        let fast = hr_fast_series(&nn, terms.max(1), ctx).expect("terms >= 1");
        let rel = {
            let diff = ctx.sub(&sine.value, &fast.value);
            (to_f64_approx(&diff) / to_f64_approx(&sine.value)).abs()
        };

        let exp = expand_sqrt_default(&nn).expect("square-free non-square");
        let fs = form_sequence(&exp).expect("forms");
        let unit = pell_unit(&exp);
        let pd = period_distance(&fs, &unit, ctx, 1e-12).expect("regulator");
        let hypothesis = class_number_hypothesis(&sine, &pd.value, rel_tol, k_max);

        suite.record(
            rel <= rel_tol && hypothesis.is_some(),
            n,
            &format!("rel {rel:e}, hypothesis {hypothesis:?}"),
        );
    }
    suite.out
}

/// Quick textual summary, one line per suite.
pub fn summarize(report: &VerifyReport) -> String {
    let mut s = String::new();
    for suite in &report.suites {
        let status = if suite.pass() { "pass" } else { "FAIL" };
        s.push_str(&format!(
            "{:<32} {:>8} checked   {}\n",
            suite.name, suite.checked, status
        ));
        for f in &suite.failures {
            s.push_str(&format!("    {f}\n"));
        }
    }
    s
}
