use cfract_core::cf::*;
use cfract_core::factor::*;
use cfract_core::forms::*;
use cfract_core::infra::*;
use cfract_core::real::*;
use num_bigint::BigUint;

#[test]
fn dbg() {
    let n = 610177u64;
    let nn = BigUint::from(n);
    let mut ctx = RealCtx::new(128);
    let hr = hr_for_factoring(&nn, &mut ctx);
    let half = ctx.half(&hr.value);
    let (landing, _) = navigate_to_distance(&nn, &half, &mut ctx).unwrap();
    println!("landing ledger={:.4} form=({}, {}, {})", landing.dist.approx(), landing.form.a(), landing.form.b2(), landing.form.c());
    // walk the whole cycle recording true distance of that form
    let exp = expand_sqrt_default(&nn).unwrap();
    let tau = exp.period();
    let mut cur = Cursor::start(&nn, &mut ctx);
    let mut found = None;
    for _ in 0..tau {
        if cur.form == landing.form {
            found = Some(cur.dist.approx());
        }
        cur = cur.advance(&mut ctx).unwrap();
    }
    println!("true position of landed form: {:?} (target was {:.4})", found, to_f64_approx(&half));
    // also: compose drift of the ladder nodes
    let start = Cursor::start(&nn, &mut ctx);
    let mut g = start.clone();
    for i in 0..9 {
        let next = compose(&g, &g, &ctx).unwrap();
        // true position of next.form
        let mut cur = Cursor::start(&nn, &mut ctx);
        let mut t = None;
        let r = 1134.8671;
        for _ in 0..tau {
            if cur.form == next.form { t = Some(cur.dist.approx()); }
            cur = cur.advance(&mut ctx).unwrap();
        }
        let ledger_mod = next.dist.approx() % r;
        println!("ladder {}: ledger={:.4} (mod R = {:.4}) true={:?}", i, next.dist.approx(), ledger_mod, t);
        g = next;
    }
}
