//! Converged HS exchange energy at one distance, both formulas, compared with
//! the eight-term large-R expansion.
//!
//! ```text
//! cargo run --release -p sapt-exchange --example single_point -- 40 10
//! ```

use std::time::Instant;

use rug::Float;
use sapt_exchange::exchange::{asymptotic_j, compute_point, reference_jk, Formula, PointRequest};
use sapt_exchange::mpkernel::to_scientific;
use sapt_exchange::PrecisionContext;

fn main() {
    let mut args = std::env::args().skip(1);
    let r: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(40.0);
    let omega: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let ctx = PrecisionContext::for_distance(r);
    let req = PointRequest { formulas: vec![Formula::Volume, Formula::Surface], ..PointRequest::default() };
    let t = Instant::now();
    let res = compute_point(&ctx, r, omega, &req).expect("point computes");
    let reference = asymptotic_j(&ctx, &ctx.f64(r), &reference_jk(&ctx));
    println!("R = {r}, Omega = {omega}, {} digits, HS stopped at order {:?}", ctx.digits(), res.hs_converged_at);
    for rec in &res.records {
        let rel = Float::with_val(ctx.bits(), &rec.j / &reference) - 1u32;
        println!("{:>8}: J = {}  (J/J_asym - 1 = {:.2e})", rec.formula.label(), to_scientific(&rec.j, 25), rel.to_f64());
    }
    println!("{:.2?}", t.elapsed());
}
