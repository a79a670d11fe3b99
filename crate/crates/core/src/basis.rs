//! Two-center Laguerre–Legendre basis
//! `chi_c^{N,M} = Norm_{N,M} e^{-r_c} L_N^{2M+2}(2 r_c) r_c^M P_M(cos theta_c)`
//! truncated by `N + M <= Omega`.
//!
//! `theta_a` and `theta_b` are the interior angles of the triangle formed by
//! the electron and the two nuclei, so the reflection in the median plane maps
//! `chi_a^{N,M}` onto `chi_b^{N,M}`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::mpkernel::{laguerre_coeffs, legendre_coeffs, PolynomialCoeffs, PrecisionContext, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Center {
    A,
    B,
}

impl Center {
    pub fn mirror(self) -> Self {
        match self {
            Center::A => Center::B,
            Center::B => Center::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Center::A => "a",
            Center::B => "b",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisFunction {
    pub center: Center,
    /// Radial (Laguerre) index.
    pub n: u32,
    /// Angular (Legendre) index.
    pub m: u32,
    pub norm: Real,
}

/// One term `coeff * r^r_power * cos^cos_power(theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub r_power: i32,
    pub cos_power: u32,
    pub coeff: Real,
}

/// A function `e^{-r_c} * sum(terms)` on one center.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MonomialExpansion {
    pub terms: Vec<Monomial>,
}

impl MonomialExpansion {
    /// Value at distance `r` from the center and angle cosine `cos`, including
    /// the `e^{-r}` factor.
    pub fn eval(&self, r: &Real, cos: &Real) -> Real {
        let prec = r.prec();
        let mut acc = Float::new(prec);
        for t in &self.terms {
            let mut v = Float::with_val(prec, &t.coeff * Float::with_val(prec, r.pow_ref_i32(t.r_power)));
            v *= Float::with_val(prec, cos.pow_ref_i32(t.cos_power as i32));
            acc += v;
        }
        acc * Float::with_val(prec, (-r.clone()).exp_ref())
    }

    pub fn min_r_power(&self) -> i32 {
        self.terms.iter().map(|t| t.r_power).min().unwrap_or(0)
    }

    pub fn max_r_power(&self) -> i32 {
        self.terms.iter().map(|t| t.r_power).max().unwrap_or(0)
    }
}

trait PowI32 {
    fn pow_ref_i32(&self, n: i32) -> Real;
}

impl PowI32 for Real {
    fn pow_ref_i32(&self, n: i32) -> Real {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(n))
    }
}

/// Radial factor `Norm * L_N^{2M+2}(2r) r^M` as a polynomial in `r`, and the
/// angular index `M`: `chi = e^{-r} radial(r) P_M(cos theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialAngular {
    pub radial: PolynomialCoeffs,
    pub m: u32,
}

/// `Norm_{N,M}` making `<chi|chi> = 1`:
/// `Norm^-2 = (N+2M+2)! / (N! 2^{2M+3}) * 4 pi / (2M+1)`.
pub fn normalization_constant(ctx: &PrecisionContext, n: u32, m: u32) -> Real {
    let mut inv = ctx.factorial(n + 2 * m + 2);
    inv /= ctx.factorial(n);
    inv >>= 2 * m + 3;
    inv *= ctx.pi();
    inv *= 4;
    inv /= 2 * m + 1;
    let mut v = inv.recip_sqrt();
    v.set_prec(ctx.bits());
    v
}

impl BasisFunction {
    pub fn new(ctx: &PrecisionContext, center: Center, n: u32, m: u32) -> Self {
        Self { center, n, m, norm: normalization_constant(ctx, n, m) }
    }

    /// Image under the reflection in the median plane.
    pub fn mirror(&self) -> Self {
        Self { center: self.center.mirror(), ..self.clone() }
    }

    pub fn radial_angular(&self, ctx: &PrecisionContext) -> RadialAngular {
        let two = ctx.int(2);
        let radial = laguerre_coeffs(ctx, self.n, 2 * self.m + 2).scale_argument(&two).shift_up(self.m as usize);
        let scaled = PolynomialCoeffs::new(radial.coeffs().iter().map(|c| Float::with_val(ctx.bits(), c * &self.norm)).collect());
        RadialAngular { radial: scaled, m: self.m }
    }

    /// Expansion in `r^k cos^m(theta)`; `(N+1)(floor(M/2)+1)` terms.
    pub fn to_monomials(&self, ctx: &PrecisionContext) -> MonomialExpansion {
        let ra = self.radial_angular(ctx);
        expand(ctx, &ra.radial, 0, ra.m)
    }

    /// Expansion of `laplacian(chi)` (still with the common `e^{-r}`).
    ///
    /// For `chi = e^{-r} g(r) P_M`, the Laplacian is
    /// `e^{-r} P_M sum_k g_k [(k(k+1) - M(M+1)) r^{k-2} - 2(k+1) r^{k-1} + r^k]`;
    /// the `r^{M-2}` coefficient vanishes, so powers start at `r^{M-1}`.
    pub fn laplacian_monomials(&self, ctx: &PrecisionContext) -> MonomialExpansion {
        let lap = self.laplacian_radial(ctx);
        expand(ctx, &lap, -1, self.m)
    }

    /// Radial factor of the Laplacian as coefficients of `r^{k-1}`, i.e.
    /// `laplacian(chi) = e^{-r} P_M(cos) * sum_k out[k] r^{k-1}`.
    pub fn laplacian_radial(&self, ctx: &PrecisionContext) -> PolynomialCoeffs {
        let ra = self.radial_angular(ctx);
        let g = ra.radial.coeffs();
        let mm = (self.m * (self.m + 1)) as i64;
        // index shift by one: out[j] multiplies r^{j-1}
        let mut out = vec![ctx.zero(); g.len() + 2];
        for (k, gk) in g.iter().enumerate() {
            if gk.is_zero() {
                continue;
            }
            let kk = k as i64;
            let c2 = kk * (kk + 1) - mm;
            if c2 != 0 {
                // r^{k-2} -> out[k-1]
                out[k - 1] += Float::with_val(ctx.bits(), gk * c2);
            }
            out[k] -= Float::with_val(ctx.bits(), gk * (2 * (kk + 1)));
            out[k + 1] += gk;
        }
        PolynomialCoeffs::new(out)
    }
}

/// Multiplies a radial polynomial (coefficient `i` on `r^{i + offset}`) by
/// `P_M(cos)` and flattens into monomials.
fn expand(ctx: &PrecisionContext, radial: &PolynomialCoeffs, offset: i32, m: u32) -> MonomialExpansion {
    let leg = legendre_coeffs(ctx, m);
    let mut terms = Vec::new();
    for (j, pj) in leg.coeffs().iter().enumerate() {
        if pj.is_zero() {
            continue;
        }
        for (i, ci) in radial.coeffs().iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            terms.push(Monomial {
                r_power: i as i32 + offset,
                cos_power: j as u32,
                coeff: Float::with_val(ctx.bits(), ci * pj),
            });
        }
    }
    MonomialExpansion { terms }
}

/// The basis of one `(Omega, R)` point: all functions with `N + M <= Omega`
/// on both centers. Center `a` comes first, then center `b`; within a center
/// functions are ordered by `(M, N)`, so index 0 is `1s_a` (the unperturbed
/// function) and index `i + half` is the mirror image of index `i`.
#[derive(Clone, Debug)]
pub struct BasisSet {
    omega: u32,
    r: f64,
    ctx: PrecisionContext,
    functions: Vec<BasisFunction>,
}

impl BasisSet {
    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn distance(&self) -> f64 {
        self.r
    }

    pub fn distance_real(&self) -> Real {
        self.ctx.f64(self.r)
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Number of functions per center, `(Omega+1)(Omega+2)/2`.
    pub fn per_center(&self) -> usize {
        self.functions.len() / 2
    }

    pub fn center_block(&self, c: Center) -> &[BasisFunction] {
        let h = self.per_center();
        match c {
            Center::A => &self.functions[..h],
            Center::B => &self.functions[h..],
        }
    }

    /// Index permutation of the median-plane reflection: `mirror[i]` is the
    /// index of the image of function `i`.
    pub fn mirror_permutation(&self) -> Vec<usize> {
        let h = self.per_center();
        (0..self.len()).map(|i| if i < h { i + h } else { i - h }).collect()
    }
}

/// Distance to the nucleus of `center` and the cosine of the angle measured
/// toward the other nucleus, for the point at cylinder radius `rho` and
/// height `z` (nucleus `a` at `z = -R/2`, `b` at `z = R/2`).
pub fn center_coords(ctx: &PrecisionContext, center: Center, r: &Real, rho: &Real, z: &Real) -> (Real, Real) {
    let half = Float::with_val(ctx.bits(), r / 2u32);
    // signed height above the nucleus, positive toward the other one
    let h = match center {
        Center::A => Float::with_val(ctx.bits(), z + &half),
        Center::B => Float::with_val(ctx.bits(), &half - z),
    };
    let mut d = Float::with_val(ctx.bits(), rho.square_ref());
    d += Float::with_val(ctx.bits(), h.square_ref());
    let d = d.sqrt();
    let cos = Float::with_val(ctx.bits(), &h / &d);
    (d, cos)
}

impl BasisSet {
    /// Value of function `i` at `(rho, z)`.
    pub fn eval_function(&self, i: usize, rho: &Real, z: &Real) -> Real {
        let f = &self.functions[i];
        let (d, cos) = center_coords(&self.ctx, f.center, &self.distance_real(), rho, z);
        f.to_monomials(&self.ctx).eval(&d, &cos)
    }
}

pub fn basis_size(omega: u32) -> usize {
    ((omega + 1) * (omega + 2)) as usize
}

/// Enumerates the `Omega` basis at internuclear distance `r` (bohr).
pub fn enumerate_basis(ctx: &PrecisionContext, omega: u32, r: f64) -> BasisSet {
    assert!(r > 0.0, "internuclear distance must be positive");
    let mut a_block = Vec::new();
    for m in 0..=omega {
        for n in 0..=(omega - m) {
            a_block.push(BasisFunction::new(ctx, Center::A, n, m));
        }
    }
    let b_block: Vec<BasisFunction> = a_block.iter().map(BasisFunction::mirror).collect();
    let mut functions = a_block;
    functions.extend(b_block);
    BasisSet { omega, r, ctx: *ctx, functions }
}
