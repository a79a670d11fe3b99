//! One-dimensional exponential moments that the separable elliptic
//! integrals reduce to.
//!
//! * `A[n](alpha) = int_1^inf xi^n e^{-alpha xi} dxi`
//! * `B[n](beta)  = int_{-1}^{1} eta^n e^{-beta eta} deta`
//! * `Bhalf[n](beta) = int_0^1 eta^n e^{-beta eta} deta`
//!
//! `Bhalf` is evaluated from the all-positive series
//! `e^{-beta} sum_k beta^k / ((n+1)(n+2)...(n+k+1))` at the top order and
//! recurred downward, which is stable for every `beta >= 0`. `B` is split as
//! `Bhalf[n](beta) + (-1)^n int_0^1 eta^n e^{beta eta}`, the second piece again
//! a positive series.

use rug::Float;

use crate::error::{Error, Result};
use crate::mpkernel::{PrecisionContext, Real};

/// `A[0..=nmax](alpha)` by upward recurrence `alpha A[n] = e^{-alpha} + n A[n-1]`.
pub fn aux_a_table(ctx: &PrecisionContext, nmax: usize, alpha: &Real) -> Result<Vec<Real>> {
    if *alpha <= 0 {
        return Err(Error::Domain(format!("A[n](alpha) needs alpha > 0, got {}", alpha.to_f64())));
    }
    let e = ctx.exp(&Float::with_val(ctx.bits(), -alpha));
    let mut out = Vec::with_capacity(nmax + 1);
    let mut prev = Float::with_val(ctx.bits(), &e / alpha);
    out.push(prev.clone());
    for n in 1..=nmax {
        let mut next = Float::with_val(ctx.bits(), &prev * n as u32);
        next += &e;
        next /= alpha;
        out.push(next.clone());
        prev = next;
    }
    check_finite(&out, "A")?;
    Ok(out)
}

pub fn aux_a(ctx: &PrecisionContext, n: usize, alpha: &Real) -> Result<Real> {
    Ok(aux_a_table(ctx, n, alpha)?.pop().expect("non-empty table"))
}

/// `Bhalf[0..=nmax](beta)` for `beta >= 0`.
pub fn aux_bhalf_table(ctx: &PrecisionContext, nmax: usize, beta: &Real) -> Result<Vec<Real>> {
    if *beta < 0 {
        return Err(Error::Domain(format!("Bhalf[n](beta) needs beta >= 0, got {}", beta.to_f64())));
    }
    let bits = ctx.bits();
    let mut out = vec![ctx.zero(); nmax + 1];
    if beta.is_zero() {
        for (n, v) in out.iter_mut().enumerate() {
            *v = ctx.ratio(1, n as i64 + 1);
        }
        return Ok(out);
    }
    let e = ctx.exp(&Float::with_val(bits, -beta));
    // top order from the positive series
    let mut term = Float::with_val(bits, 1u32) / (nmax as u32 + 1);
    let mut sum = term.clone();
    let tol = ctx.tolerance(-5);
    let mut k = 1u32;
    loop {
        term *= beta;
        term /= nmax as u32 + k + 1;
        sum += &term;
        // terms decrease monotonically once n + k + 1 > beta
        if (nmax as f64 + k as f64 + 1.0) > beta.to_f64() && Float::with_val(bits, &term / &sum) < tol {
            break;
        }
        k += 1;
    }
    out[nmax] = sum * &e;
    for n in (1..=nmax).rev() {
        let mut v = Float::with_val(bits, beta * &out[n]);
        v += &e;
        v /= n as u32;
        out[n - 1] = v;
    }
    check_finite(&out, "Bhalf")?;
    Ok(out)
}

pub fn aux_bhalf(ctx: &PrecisionContext, n: usize, beta: &Real) -> Result<Real> {
    Ok(aux_bhalf_table(ctx, n, beta)?.swap_remove(n))
}

/// `int_0^1 eta^n e^{b eta} deta = sum_k b^k / (k! (n+k+1))` for `b >= 0`.
fn growing_half(ctx: &PrecisionContext, n: usize, b: &Real) -> Real {
    let bits = ctx.bits();
    let mut pow = ctx.one();
    let mut sum = Float::with_val(bits, 1u32) / (n as u32 + 1);
    let tol = ctx.tolerance(-5);
    let mut k = 1u32;
    loop {
        pow *= b;
        pow /= k;
        let t = Float::with_val(bits, &pow / (n as u32 + k + 1));
        sum += &t;
        if k as f64 > b.to_f64() && Float::with_val(bits, &t / &sum) < tol {
            break;
        }
        k += 1;
    }
    sum
}

/// `B[0..=nmax](beta)`. Negative `beta` is handled by the parity
/// `B[n](-beta) = (-1)^n B[n](beta)`.
pub fn aux_b_table(ctx: &PrecisionContext, nmax: usize, beta: &Real) -> Result<Vec<Real>> {
    if beta.is_zero() {
        return Ok((0..=nmax).map(|n| if n % 2 == 0 { ctx.ratio(2, n as i64 + 1) } else { ctx.zero() }).collect());
    }
    let abs = Float::with_val(ctx.bits(), beta.abs_ref());
    let half = aux_bhalf_table(ctx, nmax, &abs)?;
    let mut out = Vec::with_capacity(nmax + 1);
    for (n, h) in half.into_iter().enumerate() {
        let g = growing_half(ctx, n, &abs);
        let mut v = if n % 2 == 0 { h + g } else { h - g };
        if *beta < 0 && n % 2 == 1 {
            v = -v;
        }
        out.push(v);
    }
    check_finite(&out, "B")?;
    Ok(out)
}

pub fn aux_b(ctx: &PrecisionContext, n: usize, beta: &Real) -> Result<Real> {
    Ok(aux_b_table(ctx, n, beta)?.swap_remove(n))
}

/// `int_1^inf int_{-1}^{1} xi^p eta^q e^{-alpha xi - beta eta} = A[p](alpha) B[q](beta)`.
pub fn monomial_integral(ctx: &PrecisionContext, p: usize, q: usize, alpha: &Real, beta: &Real) -> Result<Real> {
    let a = aux_a(ctx, p, alpha)?;
    let b = aux_b(ctx, q, beta)?;
    Ok(a * b)
}

fn check_finite(v: &[Real], name: &str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(n) => Err(Error::Overflow(format!("{name}[{n}]"))),
        None => Ok(()),
    }
}
