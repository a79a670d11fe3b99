//! Integrals between functions on the same center, in spherical coordinates
//! about that center. The other nucleus enters only through `1/r_b`, which is
//! handled by the Laplace expansion
//! `1/r_b = sum_l r_<^l / r_>^{l+1} P_l(cos theta_a)`.

use rug::Float;

use super::aux::{aux_a_table, aux_bhalf_table};
use crate::basis::{BasisFunction, RadialAngular};
use crate::error::Result;
use crate::mpkernel::{DenseMatrix, PolynomialCoeffs, PrecisionContext, Real};

/// `int_0^inf r^n e^{-2r} dr = n! / 2^{n+1}`.
fn moment(ctx: &PrecisionContext, n: usize) -> Real {
    let mut m = ctx.factorial(n as u32);
    m >>= n as u32 + 1;
    m
}

/// `int_{-1}^{1} P_a P_b P_c dx = 2 (a b c; 0 0 0)^2`.
pub fn gaunt(ctx: &PrecisionContext, a: u32, b: u32, c: u32) -> Real {
    let l = a + b + c;
    if l % 2 == 1 || c > a + b || a > b + c || b > a + c {
        return ctx.zero();
    }
    let g = l / 2;
    let mut t = ctx.factorial(l - 2 * a);
    t *= ctx.factorial(l - 2 * b);
    t *= ctx.factorial(l - 2 * c);
    t /= ctx.factorial(l + 1);
    let mut s = ctx.factorial(g);
    s /= ctx.factorial(g - a);
    s /= ctx.factorial(g - b);
    s /= ctx.factorial(g - c);
    t *= Float::with_val(ctx.bits(), s.square_ref());
    t * 2u32
}

/// Same-center blocks `S_aa`, `T_aa`, `<a|1/r_a|a>` and `<a|1/r_b|a>`.
pub struct OneCenterBlocks {
    pub s: DenseMatrix,
    pub t: DenseMatrix,
    pub u_own: DenseMatrix,
    pub u_other: DenseMatrix,
}

/// `sum_{s,t} g_s h_t w(s + t)`.
fn radial_pair(g: &PolynomialCoeffs, h: &PolynomialCoeffs, w: impl Fn(usize) -> Real) -> Real {
    let prec = g.coeffs()[0].prec();
    let mut acc = Float::new(prec);
    for (s, gs) in g.coeffs().iter().enumerate() {
        if gs.is_zero() {
            continue;
        }
        for (t, ht) in h.coeffs().iter().enumerate() {
            if ht.is_zero() {
                continue;
            }
            acc += Float::with_val(prec, gs * ht) * w(s + t);
        }
    }
    acc
}

pub fn one_center_blocks(ctx: &PrecisionContext, funcs: &[BasisFunction], r: &Real) -> Result<OneCenterBlocks> {
    let n = funcs.len();
    let ra: Vec<RadialAngular> = funcs.iter().map(|f| f.radial_angular(ctx)).collect();
    let lap: Vec<PolynomialCoeffs> = funcs.iter().map(|f| f.laplacian_radial(ctx)).collect();
    let max_deg = ra.iter().map(|x| x.radial.degree()).max().unwrap_or(0);
    let max_m = ra.iter().map(|x| x.m).max().unwrap_or(0) as usize;

    let moments: Vec<Real> = (0..=2 * max_deg + 4).map(|k| moment(ctx, k)).collect();
    let four_pi = Float::with_val(ctx.bits(), ctx.pi() * 4u32);
    let angular = |m: u32| Float::with_val(ctx.bits(), &four_pi / (2 * m + 1));

    // `int_0^R r^j e^{-2r} = R^{j+1} Bhalf[j](2R)` and the tail
    // `int_R^inf r^j e^{-2r} = R^{j+1} A[j](2R)`; combined below as
    // `R^n (Bhalf[n+l] + A[n-l-1])` for the radial power `n = s + t + 2`.
    let two_r = Float::with_val(ctx.bits(), r * 2u32);
    let top = 2 * max_deg + 2 + 2 * max_m;
    let bhalf = aux_bhalf_table(ctx, top, &two_r)?;
    let a_tab = aux_a_table(ctx, top, &two_r)?;
    let r_pows: Vec<Real> = {
        let mut v = vec![ctx.one()];
        for k in 1..=2 * max_deg + 2 {
            let next = Float::with_val(ctx.bits(), &v[k - 1] * r);
            v.push(next);
        }
        v
    };
    let gaunts: Vec<Vec<Vec<Real>>> = (0..=max_m as u32)
        .map(|a| (0..=max_m as u32).map(|b| (0..=2 * max_m as u32).map(|l| gaunt(ctx, a, b, l)).collect()).collect())
        .collect();
    let two_pi = ctx.pi() * 2u32;

    let s = DenseMatrix::symmetric_from_fn(n, |i, j| {
        if ra[i].m != ra[j].m {
            return ctx.zero();
        }
        radial_pair(&ra[i].radial, &ra[j].radial, |k| moments[k + 2].clone()) * angular(ra[i].m)
    });
    // lap[j] coefficient t sits on r^{t-1}, so the radial power is s + t + 1.
    let t = DenseMatrix::symmetric_from_fn(n, |i, j| {
        if ra[i].m != ra[j].m {
            return ctx.zero();
        }
        let v = radial_pair(&ra[i].radial, &lap[j], |k| moments[k + 1].clone()) * angular(ra[i].m);
        v / -2i32
    });
    let u_own = DenseMatrix::symmetric_from_fn(n, |i, j| {
        if ra[i].m != ra[j].m {
            return ctx.zero();
        }
        radial_pair(&ra[i].radial, &ra[j].radial, |k| moments[k + 1].clone()) * angular(ra[i].m)
    });
    let u_other = DenseMatrix::symmetric_from_fn(n, |i, j| {
        let (mi, mj) = (ra[i].m, ra[j].m);
        let lo = mi.abs_diff(mj);
        let mut acc = ctx.zero();
        let mut l = lo;
        while l <= mi + mj {
            let g = &gaunts[mi as usize][mj as usize][l as usize];
            let radial = radial_pair(&ra[i].radial, &ra[j].radial, |k| {
                let nn = k + 2;
                let mut v = bhalf[nn + l as usize].clone();
                v += &a_tab[nn - l as usize - 1];
                v * &r_pows[nn]
            });
            acc += radial * g;
            l += 2;
        }
        acc * &two_pi
    });
    Ok(OneCenterBlocks { s, t, u_own, u_other })
}
