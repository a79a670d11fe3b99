//! Levin `u`-transformation for basis-set extrapolation.
//!
//! `U_n = [sum_i (-1)^i C(n,i) (i+1)^{n-2} Z_i/A_i] / [sum_i (-1)^i C(n,i) (i+1)^{n-2} / A_i]`,
//! evaluated with Weniger's recursion for the numerator and denominator,
//! `X_{k+1}^{(m)} = X_k^{(m+1)} - (b+m)(b+m+k)^{k-1}/(b+m+k+1)^k X_k^{(m)}`
//! with `b = 1` and remainder estimates `w_m = (m+1) A_m`.

use rug::Float;

use crate::error::{Error, Result};
use crate::exchange::{ExchangeRecord, OmegaTag};
use crate::mpkernel::{PrecisionContext, Real};

/// Partial sums `Z_0..Z_n` and their increments.
#[derive(Clone, Debug)]
pub struct LevinInput {
    pub partial_sums: Vec<Real>,
    pub increments: Vec<Real>,
}

impl LevinInput {
    /// `A_0 = Z_0`, `A_i = Z_i - Z_{i-1}`.
    pub fn from_partial_sums(z: Vec<Real>) -> Self {
        let mut a = Vec::with_capacity(z.len());
        for i in 0..z.len() {
            if i == 0 {
                a.push(z[0].clone());
            } else {
                a.push(Float::with_val(z[i].prec(), &z[i] - &z[i - 1]));
            }
        }
        Self { partial_sums: z, increments: a }
    }

    /// Explicit increments, e.g. the terms of a series whose partial sums
    /// are `z`. Only checked for length.
    pub fn with_increments(z: Vec<Real>, a: Vec<Real>) -> Result<Self> {
        if z.len() != a.len() {
            return Err(Error::Dimension(format!("{} partial sums vs {} increments", z.len(), a.len())));
        }
        Ok(Self { partial_sums: z, increments: a })
    }

    /// Transformation order `n` (one less than the number of partial sums).
    pub fn order(&self) -> usize {
        self.partial_sums.len().saturating_sub(1)
    }
}

/// Levin `u`-transform `U_n` of all supplied partial sums.
///
/// A sequence whose increments `A_1..A_n` all vanish is already constant and
/// is returned unchanged; a single vanishing increment otherwise is an error.
pub fn levin_u(ctx: &PrecisionContext, input: &LevinInput) -> Result<Real> {
    let z = &input.partial_sums;
    let a = &input.increments;
    if z.is_empty() {
        return Err(Error::Invalid("Levin transform needs at least one partial sum".into()));
    }
    let n = input.order();
    if a[1..].iter().all(|x| x.is_zero()) {
        return Ok(ctx.from_ref(&z[n]));
    }
    if let Some(i) = a.iter().position(|x| x.is_zero()) {
        return Err(Error::ZeroIncrement(i));
    }
    let bits = ctx.bits();
    let beta = 1u32;
    let mut num: Vec<Real> = Vec::with_capacity(n + 1);
    let mut den: Vec<Real> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let w = Float::with_val(bits, &a[m] * (m as u32 + 1));
        den.push(Float::with_val(bits, w.recip_ref()));
        num.push(Float::with_val(bits, &z[m] / &w));
    }
    let scale = num.iter().chain(den.iter()).map(|x| Float::with_val(bits, x.abs_ref())).fold(ctx.zero(), |acc, x| acc.max(&x));
    for k in 0..n {
        for m in 0..n - k {
            // (b+m)(b+m+k)^{k-1} / (b+m+k+1)^k
            let bm = ctx.int((beta as usize + m) as i64);
            let ratio = ctx.ratio((beta as usize + m + k) as i64, (beta as usize + m + k + 1) as i64);
            let mut f = ctx.powi(&ratio, k as i32 - 1);
            f /= (beta as usize + m + k + 1) as u32;
            f *= &bm;
            let t = Float::with_val(bits, &f * &num[m]);
            num[m] = Float::with_val(bits, &num[m + 1] - &t);
            let t = Float::with_val(bits, &f * &den[m]);
            den[m] = Float::with_val(bits, &den[m + 1] - &t);
        }
    }
    // the recursion scales both sums by the same positive factor; compare
    // the denominator against the largest initial term carried through it
    let d = Float::with_val(bits, den[0].abs_ref());
    let direct_scale = levin_scale(ctx, n);
    if d < Float::with_val(bits, &scale * &direct_scale) * ctx.tolerance(5) {
        let r = Float::with_val(bits, &d / &scale).to_f64();
        return Err(Error::DegenerateDenominator(r));
    }
    Ok(Float::with_val(bits, &num[0] / &den[0]))
}

/// Factor between the recursion result and the direct binomial sum,
/// `1 / (b+n)^{n-1}` with `b = 1`, used to scale the degeneracy test.
fn levin_scale(ctx: &PrecisionContext, n: usize) -> Real {
    if n == 0 {
        return ctx.one();
    }
    let b = ctx.int(n as i64 + 1);
    let p = ctx.powi(&b, n as i32 - 1);
    Float::with_val(ctx.bits(), p.recip_ref())
}

/// Direct evaluation of the binomial sums (reference implementation).
pub fn levin_u_direct(ctx: &PrecisionContext, input: &LevinInput) -> Result<Real> {
    let z = &input.partial_sums;
    let a = &input.increments;
    let n = input.order();
    if let Some(i) = a.iter().position(|x| x.is_zero()) {
        return Err(Error::ZeroIncrement(i));
    }
    let bits = ctx.bits();
    let mut num = ctx.zero();
    let mut den = ctx.zero();
    for i in 0..=n {
        let mut w = ctx.binomial(n as u32, i as u32);
        w *= ctx.powi(&ctx.int(i as i64 + 1), n as i32 - 2);
        if i % 2 == 1 {
            w = -w;
        }
        w /= &a[i];
        num += Float::with_val(bits, &w * &z[i]);
        den += w;
    }
    Ok(num / den)
}

/// Applies the transform to records at consecutive Omega (same `R`, method,
/// formula and order) and returns a record tagged as extrapolated.
pub fn extrapolate_j(ctx: &PrecisionContext, records: &[ExchangeRecord]) -> Result<ExchangeRecord> {
    if records.len() < 2 {
        return Err(Error::Invalid("extrapolation needs at least two records".into()));
    }
    let mut sorted: Vec<&ExchangeRecord> = records.iter().collect();
    sorted.sort_by_key(|r| match r.omega {
        OmegaTag::Value(o) => o,
        OmegaTag::Extrapolated => u32::MAX,
    });
    let first = sorted[0];
    let mut omegas = Vec::new();
    for (k, rec) in sorted.iter().enumerate() {
        let OmegaTag::Value(o) = rec.omega else {
            return Err(Error::Invalid("cannot extrapolate an already extrapolated record".into()));
        };
        if rec.r != first.r || rec.method != first.method || rec.formula != first.formula || rec.order != first.order {
            return Err(Error::Invalid("records differ in R, method, formula or order".into()));
        }
        if k > 0 && omegas.last() != Some(&(o - 1)) {
            return Err(Error::Invalid(format!("Omega ladder is not consecutive at {o}")));
        }
        omegas.push(o);
    }
    let z: Vec<Real> = sorted.iter().map(|r| ctx.from_ref(&r.j)).collect();
    let j = levin_u(ctx, &LevinInput::from_partial_sums(z))?;
    Ok(ExchangeRecord {
        omega: OmegaTag::Extrapolated,
        j,
        digits: ctx.digits(),
        provenance: Some(format!("levin_u(Omega={}..{})", omegas[0], omegas[omegas.len() - 1])),
        ..first.clone()
    })
}
