//! Two-center products in prolate spheroidal coordinates
//! `xi = (r_a + r_b)/R`, `eta = (r_a - r_b)/R`.
//!
//! A monomial `r_a^k cos^m theta_a` equals
//! `(R/2)^k (xi + eta)^{k-m} (1 + xi eta)^m`; on center `b` the same
//! polynomial with `eta -> -eta`. After the exponentials combine, every matrix
//! element is a finite sum of `A[p] B[q]` products.

use rug::Float;

use crate::basis::MonomialExpansion;
use crate::mpkernel::{PrecisionContext, Real};

/// Dense polynomial `sum c[p][q] xi^p eta^q`.
#[derive(Clone, Debug)]
pub struct Poly2 {
    np: usize,
    nq: usize,
    c: Vec<Real>,
}

impl Poly2 {
    pub fn zeros(ctx: &PrecisionContext, np: usize, nq: usize) -> Self {
        Self { np, nq, c: vec![ctx.zero(); np * nq] }
    }

    pub fn get(&self, p: usize, q: usize) -> &Real {
        &self.c[p * self.nq + q]
    }

    fn at(&mut self, p: usize, q: usize) -> &mut Real {
        &mut self.c[p * self.nq + q]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.np, self.nq)
    }

    /// Elliptic image of `r_a^extra * expansion / e^{-r_a}`. Every term must
    /// satisfy `k + extra >= m`.
    pub fn from_expansion(ctx: &PrecisionContext, e: &MonomialExpansion, extra: i32, r: &Real) -> Self {
        let half_r = Float::with_val(ctx.bits(), r / 2u32);
        let kmax = (e.max_r_power() + extra).max(0) as usize;
        let mut out = Self::zeros(ctx, kmax + 1, kmax + 1);
        for t in &e.terms {
            let k = t.r_power + extra;
            let m = t.cos_power as i32;
            assert!(k >= m, "r^{k} cos^{m} is not polynomial in elliptic coordinates");
            let a = (k - m) as u32;
            let m = m as u32;
            let mut scale = ctx.powi(&half_r, k);
            scale *= &t.coeff;
            for j in 0..=m {
                let cj = ctx.binomial(m, j);
                for s in 0..=a {
                    let mut v = Float::with_val(ctx.bits(), &cj * ctx.binomial(a, s));
                    v *= &scale;
                    *out.at((j + s) as usize, (j + a - s) as usize) += v;
                }
            }
        }
        out
    }

    /// `eta -> -eta`.
    pub fn mirror(&self) -> Self {
        let mut out = self.clone();
        for p in 0..self.np {
            for q in (1..self.nq).step_by(2) {
                let v = out.at(p, q);
                *v = Float::with_val(v.prec(), -&*v);
            }
        }
        out
    }

    /// Product with a small integer polynomial given as `(p, q, coeff)` terms.
    pub fn mul_small(&self, ctx: &PrecisionContext, f: &[(usize, usize, i32)]) -> Self {
        let dp = f.iter().map(|t| t.0).max().unwrap_or(0);
        let dq = f.iter().map(|t| t.1).max().unwrap_or(0);
        let mut out = Self::zeros(ctx, self.np + dp, self.nq + dq);
        for p in 0..self.np {
            for q in 0..self.nq {
                let v = self.get(p, q);
                if v.is_zero() {
                    continue;
                }
                for &(fp, fq, fc) in f {
                    *out.at(p + fp, q + fq) += Float::with_val(ctx.bits(), v * fc);
                }
            }
        }
        out
    }

    /// `eta`-power `0` and `1` coefficients as functions of `xi`:
    /// the value and `d/d eta` of the polynomial on `eta = 0`.
    pub fn on_median_plane(&self, ctx: &PrecisionContext) -> (Vec<Real>, Vec<Real>) {
        let val = (0..self.np).map(|p| self.get(p, 0).clone()).collect();
        let der = (0..self.np).map(|p| if self.nq > 1 { self.get(p, 1).clone() } else { ctx.zero() }).collect();
        (val, der)
    }
}

/// `xi^2 - eta^2`
pub const XI2_MINUS_ETA2: [(usize, usize, i32); 2] = [(2, 0, 1), (0, 2, -1)];
/// `xi + eta`
pub const XI_PLUS_ETA: [(usize, usize, i32); 2] = [(1, 0, 1), (0, 1, 1)];
/// `xi - eta`
pub const XI_MINUS_ETA: [(usize, usize, i32); 2] = [(1, 0, 1), (0, 1, -1)];

/// `out[i][j] = factor * sum F_i[p][q] W_j[p'][q'] a[p+p'] b[q+q']`.
///
/// The `W_j` side is contracted with the tables first
/// (`Gt_j[p][q] = sum W_j[p'][q'] a[p+p'] b[q+q']`), so the per-pair cost is a
/// single dot product. With `symmetric`, only `i <= j` is evaluated and the
/// lower triangle is left as zero.
pub fn contract(
    ctx: &PrecisionContext,
    rows: &[Poly2],
    cols: &[Poly2],
    a: &[Real],
    b: &[Real],
    factor: &Real,
    symmetric: bool,
) -> Vec<Vec<Real>> {
    let np = rows.iter().map(|f| f.np).max().unwrap_or(0);
    let nq = rows.iter().map(|f| f.nq).max().unwrap_or(0);
    let bits = ctx.bits();
    let gts: Vec<Vec<Real>> = cols
        .iter()
        .map(|w| {
            // stage 1: T1[p][q'] = sum_p' a[p+p'] W[p'][q']
            let mut t1 = vec![Float::new(bits); np * w.nq];
            for p in 0..np {
                for pp in 0..w.np {
                    let ap = &a[p + pp];
                    for qq in 0..w.nq {
                        let wv = w.get(pp, qq);
                        if !wv.is_zero() {
                            t1[p * w.nq + qq] += ap * wv;
                        }
                    }
                }
            }
            // stage 2: Gt[p][q] = sum_q' b[q+q'] T1[p][q']
            let mut gt = vec![Float::new(bits); np * nq];
            for p in 0..np {
                for q in 0..nq {
                    let acc = &mut gt[p * nq + q];
                    for qq in 0..w.nq {
                        let bv = &b[q + qq];
                        if !bv.is_zero() {
                            *acc += bv * &t1[p * w.nq + qq];
                        }
                    }
                }
            }
            gt
        })
        .collect();
    rows.iter()
        .enumerate()
        .map(|(i, f)| {
            gts.iter()
                .enumerate()
                .map(|(j, gt)| {
                    if symmetric && j < i {
                        return Float::new(bits);
                    }
                    let mut acc = Float::new(bits);
                    for p in 0..f.np {
                        for q in 0..f.nq {
                            let fv = f.get(p, q);
                            if !fv.is_zero() {
                                acc += fv * &gt[p * nq + q];
                            }
                        }
                    }
                    acc * factor
                })
                .collect()
        })
        .collect()
}

/// `out[i][j] = factor * sum u_i[p] v_j[p'] a[p+p']`.
pub fn contract_line(ctx: &PrecisionContext, u: &[Vec<Real>], v: &[Vec<Real>], a: &[Real], factor: &Real) -> Vec<Vec<Real>> {
    let bits = ctx.bits();
    let n = u.iter().map(|x| x.len()).max().unwrap_or(0);
    let vt: Vec<Vec<Real>> = v
        .iter()
        .map(|vj| {
            (0..n)
                .map(|p| {
                    let mut acc = Float::new(bits);
                    for (pp, x) in vj.iter().enumerate() {
                        acc += x * &a[p + pp];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    u.iter()
        .map(|ui| {
            vt.iter()
                .map(|vtj| {
                    let mut acc = Float::new(bits);
                    for (x, y) in ui.iter().zip(vtj) {
                        acc += x * y;
                    }
                    acc * factor
                })
                .collect()
        })
        .collect()
}
