//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! with the measured numbers and then asserts the verdict.
//!
//! Run with `cargo test --release -p sapt-exchange --test acceptance -- --nocapture`
//! to see the report lines.

use rug::Float;
use sapt_exchange::accel::{extrapolate_j, levin_u, LevinInput};
use sapt_exchange::asymptotics::{fit_jk, FitInput};
use sapt_exchange::basis::enumerate_basis;
use sapt_exchange::exchange::{
    asymptotic_j, compute_point, first_order_closed_form, reference_jk, sapt_corrections, ExchangeRecord, Formula,
    OrderTag, PointRequest, PointResult,
};
use sapt_exchange::perturbation::{HsStop, Method, PerturbationSystem};
use sapt_exchange::{PrecisionContext, Real};

fn report(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn rel(a: &Real, b: &Real) -> f64 {
    let d = Float::with_val(a.prec(), a - b);
    (d / b).abs().to_f64()
}

fn converged(records: &[ExchangeRecord], method: Method, formula: Formula) -> Real {
    records
        .iter()
        .find(|r| r.method == method && r.formula == formula && r.order == OrderTag::Converged)
        .expect("converged record")
        .j
        .clone()
}

fn point(r: f64, omega: u32, methods: &[Method], formulas: &[Formula]) -> PointResult {
    let ctx = PrecisionContext::for_distance(r);
    let req = PointRequest { methods: methods.to_vec(), formulas: formulas.to_vec(), ..PointRequest::default() };
    compute_point(&ctx, r, omega, &req).expect("point computes")
}

#[test]
fn c1_first_order_closed_form() {
    let ctx = PrecisionContext::new(50).unwrap();
    let tol = ctx.tolerance(15).to_f64();
    let mut worst: f64 = 0.0;
    for r in [10.0, 20.0, 40.0] {
        let sys = PerturbationSystem::new(&enumerate_basis(&ctx, 0, r)).unwrap();
        let series = sys.rs_expand(2);
        let j1 = &sapt_corrections(&ctx, &sys.matrices, &series, 1)[1];
        worst = worst.max(rel(j1, &first_order_closed_form(&ctx, &ctx.f64(r))));
    }
    report(1, worst < tol, &format!("max relative deviation {worst:.2e} (bound {tol:.0e})"));
}

/// `E_g = -1/2 + (V_aa + V_ab)/(1 + S)`, `E_u = -1/2 + (V_aa - V_ab)/(1 - S)`
/// from hydrogenic 1s integrals.
fn lcao_energies(ctx: &PrecisionContext, r: f64) -> (Real, Real) {
    let b = ctx.bits();
    let rr = ctx.f64(r);
    let e1 = ctx.exp(&Float::with_val(b, -&rr));
    let e2 = Float::with_val(b, e1.square_ref());
    let s = Float::with_val(b, (Float::with_val(b, rr.square_ref()) / 3u32 + &rr + 1u32) * &e1);
    let inv = Float::with_val(b, rr.recip_ref());
    let vaa = Float::with_val(b, &inv + 1u32) * &e2;
    let vab = Float::with_val(b, &s * &inv) - Float::with_val(b, &rr + 1u32) * &e1;
    let g = Float::with_val(b, &vaa + &vab) / Float::with_val(b, &s + 1u32) - 0.5f64;
    let u = Float::with_val(b, &vaa - &vab) / Float::with_val(b, 1u32 - &s) - 0.5f64;
    (g, u)
}

#[test]
fn c2_minimal_basis_variational_oracle() {
    let ctx = PrecisionContext::new(50).unwrap();
    let mut worst: f64 = 0.0;
    for r in [5.0, 10.0, 20.0] {
        let sys = PerturbationSystem::new(&enumerate_basis(&ctx, 0, r)).unwrap();
        let s = sys.hs_expand(HsStop::Orders(150));
        let (g, u) = lcao_energies(&ctx, r);
        worst = worst.max(rel(&s.energy_g_sum(150), &g)).max(rel(&s.energy_u_sum(150), &u));
    }
    report(2, worst < 1e-30, &format!("max relative deviation {worst:.2e} (bound 1e-30)"));
}

#[test]
fn c3_desk_scale_asymptotic_constants() {
    let fit_ctx = PrecisionContext::for_distance(150.0);
    let mut train = Vec::new();
    for i in 0..16 {
        let r = 60.0 + 6.0 * i as f64;
        let ctx = PrecisionContext::for_distance(r);
        let ladder: Vec<ExchangeRecord> =
            (7..=12).map(|o| point(r, o, &[Method::Hs], &[Formula::Volume]).records.remove(0)).collect();
        let ex = extrapolate_j(&ctx, &ladder).unwrap();
        train.push((r, fit_ctx.from_ref(&ex.j)));
    }
    let fit = fit_jk(&fit_ctx, &FitInput::new(train, vec![], 8).unwrap()).unwrap();
    let reference = reference_jk(&fit_ctx);
    let j = &fit.j;
    let dev = [
        rel(&j[0], &reference[0]),
        Float::with_val(fit_ctx.bits(), &j[1] - &reference[1]).abs().to_f64(),
        rel(&j[2], &reference[2]),
        rel(&j[3], &fit_ctx.parse("2.7291667").unwrap()),
    ];
    let bounds = [1e-5, 1e-4, 1e-3, 1e-2];
    let ok = dev.iter().zip(bounds).all(|(d, b)| *d < b);
    let vals: Vec<String> = j[..4].iter().map(|x| format!("{:.10}", x.to_f64())).collect();
    report(
        3,
        ok,
        &format!("j0..j3 = [{}], deviations {:.1e} {:.1e} {:.1e} {:.1e}", vals.join(", "), dev[0], dev[1], dev[2], dev[3]),
    );
}

#[test]
fn c4_omega_convergence_law() {
    let r = 60.0;
    let j = |o| point(r, o, &[Method::Hs], &[Formula::Volume]).records.remove(0).j;
    let reference = j(14);
    let errs: Vec<f64> = [5, 8, 11].iter().map(|&o| rel(&j(o), &reference)).collect();
    let drops = [(errs[0] / errs[1]).log10(), (errs[1] / errs[2]).log10()];
    let ok = drops.iter().all(|d| *d >= 1.5);
    report(
        4,
        ok,
        &format!(
            "errors {:.2e} {:.2e} {:.2e}; decades gained per 3 shells {:.2} {:.2}",
            errs[0], errs[1], errs[2], drops[0], drops[1]
        ),
    );
}

#[test]
fn c5_srs_ratio_plateau() {
    let res = point(40.0, 10, &[Method::Rs], &[Formula::Volume]);
    let corr = res.rs_corrections.expect("RS corrections");
    let n_crit = res.n_crit.expect("plateau onset found");
    let ratio = |n: usize| Float::with_val(corr[n].prec(), &corr[n + 1] / &corr[n]).to_f64();
    let low: Vec<(usize, f64)> =
        (12..n_crit.saturating_sub(2)).map(|n| (n, ratio(n))).filter(|(_, q)| !(0.40..=0.60).contains(q)).collect();
    let high: Vec<(usize, f64)> =
        (n_crit + 3..=n_crit + 10).map(|n| (n, ratio(n))).filter(|(_, q)| !(0.90..=1.10).contains(q)).collect();
    let near: Vec<String> = (n_crit.saturating_sub(5)..=n_crit + 1).map(|n| format!("{n}:{:.3}", ratio(n))).collect();
    report(
        5,
        low.is_empty() && high.is_empty(),
        &format!(
            "n_crit = {n_crit}; outside [0.40, 0.60]: {low:?}; outside [0.90, 1.10]: {high:?}; ratios near onset {}",
            near.join(" ")
        ),
    );
}

#[test]
fn c6_surface_formula_degeneracy() {
    let res = point(60.0, 10, &[Method::Hs, Method::Rs], &[Formula::Surface]);
    let hs = converged(&res.records, Method::Hs, Formula::Surface);
    let rs = converged(&res.records, Method::Rs, Formula::Surface);
    let d = rel(&hs, &rs);
    report(
        6,
        d < 1e-15 && res.n_crit.is_some() && res.hs_converged_at.is_some(),
        &format!("|J_surf(HS)/J_surf(RS) - 1| = {d:.2e}; n_crit = {:?}; HS stop = {:?}", res.n_crit, res.hs_converged_at),
    );
}

#[test]
fn c7_volume_beats_surface() {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [80.0, 100.0, 120.0] {
        let ctx = PrecisionContext::for_distance(r);
        let res = point(r, 10, &[Method::Hs], &[Formula::Volume, Formula::Surface]);
        let exact = asymptotic_j(&ctx, &ctx.f64(r), &reference_jk(&ctx));
        let ev = rel(&converged(&res.records, Method::Hs, Formula::Volume), &exact);
        let es = rel(&converged(&res.records, Method::Hs, Formula::Surface), &exact);
        ok &= ev < es;
        parts.push(format!("R={r}: volume {ev:.2e} surface {es:.2e}"));
    }
    report(7, ok, &parts.join("; "));
}

#[test]
fn c8_levin_exactness() {
    let ctx = PrecisionContext::new(64).unwrap();
    let tol = ctx.tolerance(10);
    let mut worst = ctx.zero();
    for (a, q) in [(1.0, 0.5), (-3.0, 0.9), (0.25, -0.7), (7.0, 0.1)] {
        for n in 2..10 {
            let qv = ctx.f64(q);
            let mut term = ctx.f64(a);
            let mut s = ctx.zero();
            let mut z = Vec::new();
            for _ in 0..=n {
                s += &term;
                z.push(s.clone());
                term *= &qv;
            }
            let limit = ctx.f64(a) / Float::with_val(ctx.bits(), 1u32 - &qv);
            let u = levin_u(&ctx, &LevinInput::from_partial_sums(z)).unwrap();
            let d = Float::with_val(ctx.bits(), &u - &limit).abs();
            worst.max_mut(&d);
        }
    }
    let c = ctx.parse("-1.2345678901234567890123456789").unwrap();
    let fixed = levin_u(&ctx, &LevinInput::from_partial_sums(vec![c.clone(); 7])).unwrap() == c;
    report(
        8,
        worst < tol && fixed,
        &format!("max geometric error {:.2e} (bound {:.0e}); constant fixed point {fixed}", worst.to_f64(), tol.to_f64()),
    );
}
