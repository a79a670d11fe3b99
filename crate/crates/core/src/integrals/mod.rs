//! Matrix representation of the operators in the two-center basis.
//!
//! Same-center blocks are evaluated in spherical coordinates about their own
//! nucleus, cross-center blocks in elliptic coordinates; the `bb` blocks and
//! the transposed cross blocks follow from the mirror symmetry of the basis.

mod aux;
mod elliptic;
mod onecenter;

pub use aux::{aux_a, aux_a_table, aux_b, aux_b_table, aux_bhalf, aux_bhalf_table, monomial_integral};
pub use elliptic::Poly2;
pub use onecenter::gaunt;

use rug::Float;

use crate::basis::{BasisSet, Center};
use crate::error::{Error, Result};
use crate::mpkernel::{DenseMatrix, DenseVector, PrecisionContext, Real};
use elliptic::{contract, contract_line, XI2_MINUS_ETA2, XI_MINUS_ETA, XI_PLUS_ETA};

/// Operator matrices over one [`BasisSet`].
///
/// `h0 = t - ua` is the Hamiltonian of the atom on `a`, `v = -ub + s/R` the
/// interaction with nucleus `b`; only their sum is invariant under the
/// exchange permutation `perm`.
#[derive(Clone, Debug)]
pub struct OperatorMatrices {
    pub s: DenseMatrix,
    pub t: DenseMatrix,
    pub ua: DenseMatrix,
    pub ub: DenseMatrix,
    pub h0: DenseMatrix,
    pub v: DenseMatrix,
    /// `perm[i]` is the index of the mirror image of function `i`.
    pub perm: Vec<usize>,
}

impl OperatorMatrices {
    pub fn dim(&self) -> usize {
        self.s.rows()
    }

    /// The permutation as an explicit 0/1 matrix with `(P x)_i = x_{perm[i]}`.
    pub fn p_matrix(&self, ctx: &PrecisionContext) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| if self.perm[i] == j { ctx.one() } else { ctx.zero() })
    }

    /// Coefficients of the mirrored function.
    pub fn apply_p(&self, x: &DenseVector) -> DenseVector {
        DenseVector(self.perm.iter().map(|&j| x[j].clone()).collect())
    }
}

/// Elliptic polynomials of one center block: the function itself and
/// `r_c` times its Laplacian.
struct EllipticBlock {
    value: Vec<Poly2>,
    r_laplacian: Vec<Poly2>,
}

fn elliptic_block(ctx: &PrecisionContext, basis: &BasisSet, r: &Real) -> EllipticBlock {
    let funcs = basis.center_block(Center::A);
    let value = funcs.iter().map(|f| Poly2::from_expansion(ctx, &f.to_monomials(ctx), 0, r)).collect();
    let r_laplacian = funcs.iter().map(|f| Poly2::from_expansion(ctx, &f.laplacian_monomials(ctx), 1, r)).collect();
    EllipticBlock { value, r_laplacian }
}

fn max_xi_degree(polys: &[Poly2]) -> usize {
    polys.iter().map(|p| p.dims().0).max().unwrap_or(1)
}

fn assemble(
    aa: &DenseMatrix,
    ab: &[Vec<Real>],
    ba_t: &[Vec<Real>],
    bb: &DenseMatrix,
    symmetric: bool,
) -> DenseMatrix {
    let h = aa.rows();
    let f = |i: usize, j: usize| -> Real {
        match (i < h, j < h) {
            (true, true) => aa[(i, j)].clone(),
            (true, false) => ab[i][j - h].clone(),
            (false, true) => ba_t[j][i - h].clone(),
            (false, false) => bb[(i - h, j - h)].clone(),
        }
    };
    if symmetric {
        DenseMatrix::symmetric_from_fn(2 * h, f)
    } else {
        DenseMatrix::from_fn(2 * h, 2 * h, f)
    }
}

/// Mirrors the upper triangle of a square block onto the lower one.
fn symmetrize_upper(block: &mut [Vec<Real>]) {
    for i in 0..block.len() {
        for j in 0..i {
            block[i][j] = block[j][i].clone();
        }
    }
}

/// Assembles `S, T, Ua, Ub, H0, V` and the exchange permutation.
pub fn build_matrices(basis: &BasisSet) -> Result<OperatorMatrices> {
    let ctx = basis.context();
    let bits = ctx.bits();
    let r = basis.distance_real();
    let one = onecenter::one_center_blocks(ctx, basis.center_block(Center::A), &r)?;
    let eb = elliptic_block(ctx, basis, &r);
    let mirrored: Vec<Poly2> = eb.value.iter().map(Poly2::mirror).collect();
    let mirrored_lap: Vec<Poly2> = eb.r_laplacian.iter().map(Poly2::mirror).collect();

    let s_cols: Vec<Poly2> = mirrored.iter().map(|g| g.mul_small(ctx, &XI2_MINUS_ETA2)).collect();
    let t_cols: Vec<Poly2> = mirrored_lap.iter().map(|g| g.mul_small(ctx, &XI_PLUS_ETA)).collect();
    let u_cols: Vec<Poly2> = mirrored.iter().map(|g| g.mul_small(ctx, &XI_MINUS_ETA)).collect();

    let top = max_xi_degree(&eb.value) + max_xi_degree(&s_cols).max(max_xi_degree(&t_cols));
    let a_tab = aux_a_table(ctx, top, &r)?;
    let b_tab = aux_b_table(ctx, top, &ctx.zero())?;

    let pi = ctx.pi();
    let r2 = Float::with_val(bits, r.square_ref());
    let r3 = Float::with_val(bits, &r2 * &r);
    // volume 2 pi (R^3/8)(xi^2 - eta^2); one power of R/2 is absorbed by 1/r_c
    let f_s = Float::with_val(bits, &pi * &r3) / 4u32;
    let f_u = Float::with_val(bits, &pi * &r2) / 2u32;
    let f_t = Float::with_val(bits, &f_u / -2i32);

    let mut s_ab = contract(ctx, &eb.value, &s_cols, &a_tab, &b_tab, &f_s, true);
    symmetrize_upper(&mut s_ab);
    let mut t_ab = contract(ctx, &eb.value, &t_cols, &a_tab, &b_tab, &f_t, true);
    symmetrize_upper(&mut t_ab);
    let ua_ab = contract(ctx, &eb.value, &u_cols, &a_tab, &b_tab, &f_u, false);
    // <a_i|1/r_b|b_j> = <b_i|1/r_a|a_j> = ua_ab[j][i]
    let ub_ab: Vec<Vec<Real>> = (0..ua_ab.len()).map(|i| (0..ua_ab.len()).map(|j| ua_ab[j][i].clone()).collect()).collect();

    let s = assemble(&one.s, &s_ab, &s_ab, &one.s, true);
    let t = assemble(&one.t, &t_ab, &t_ab, &one.t, true);
    // the ba block of a symmetric matrix is the transpose of its ab block
    let ua = assemble(&one.u_own, &ua_ab, &ua_ab, &one.u_other, true);
    let ub = assemble(&one.u_other, &ub_ab, &ub_ab, &one.u_own, true);

    let inv_r = Float::with_val(bits, r.recip_ref());
    let one_r = ctx.one();
    let minus_one = ctx.int(-1);
    let h0 = t.combine(&one_r, &ua, &minus_one);
    let v = ub.combine(&minus_one, &s, &inv_r);
    for m in [&s, &t, &ua, &ub] {
        if m.row(0).iter().any(|x| !x.is_finite()) {
            return Err(Error::Overflow("matrix assembly".into()));
        }
    }
    Ok(OperatorMatrices { s, t, ua, ub, h0, v, perm: basis.mirror_permutation() })
}

/// Bilinear forms of the surface formula: the overlap restricted to the
/// half-space `eta > 0` (nearer `b`) and the flux through the median plane
/// with the normal pointing toward `b`.
#[derive(Clone, Debug)]
pub struct SurfaceMatrices {
    pub half: DenseMatrix,
    pub flux: DenseMatrix,
}

pub fn build_surface_matrices(basis: &BasisSet) -> Result<SurfaceMatrices> {
    let ctx = basis.context();
    let bits = ctx.bits();
    let r = basis.distance_real();
    let one = onecenter::one_center_blocks(ctx, basis.center_block(Center::A), &r)?;
    let eb = elliptic_block(ctx, basis, &r);
    let h = eb.value.len();
    let a_cols: Vec<Poly2> = eb.value.iter().map(|g| g.mul_small(ctx, &XI2_MINUS_ETA2)).collect();
    let b_cols: Vec<Poly2> = eb.value.iter().map(|g| g.mirror().mul_small(ctx, &XI2_MINUS_ETA2)).collect();
    let top = max_xi_degree(&eb.value) + max_xi_degree(&a_cols);
    let a_tab = aux_a_table(ctx, top, &r)?;
    let bh_r = aux_bhalf_table(ctx, top, &r)?;
    let bh_0 = aux_bhalf_table(ctx, top, &ctx.zero())?;
    let r3 = Float::with_val(bits, r.square_ref()) * &r;
    let f_s = Float::with_val(bits, ctx.pi() * r3) / 4u32;

    let mut h_aa = contract(ctx, &eb.value, &a_cols, &a_tab, &bh_r, &f_s, true);
    symmetrize_upper(&mut h_aa);
    let h_ab = contract(ctx, &eb.value, &b_cols, &a_tab, &bh_0, &f_s, false);
    let h_aa = DenseMatrix::from_rows(h_aa)?;
    let h_bb = DenseMatrix::from_fn(h, h, |i, j| Float::with_val(bits, &one.s[(i, j)] - &h_aa[(i, j)]));
    let half = assemble(&h_aa, &h_ab, &h_ab, &h_bb, true);

    // on eta = 0: chi_a = e^{-R xi/2} F(xi, 0), d/d eta chi_a = e^{-R xi/2}(-R/2 F + dF/d eta)
    let half_r = Float::with_val(bits, &r / 2u32);
    let mut vals = Vec::with_capacity(2 * h);
    let mut ders = Vec::with_capacity(2 * h);
    for sign in [1i32, -1] {
        for f in &eb.value {
            let (val, d) = f.on_median_plane(ctx);
            let der: Vec<Real> = val
                .iter()
                .zip(&d)
                .map(|(v, dv)| {
                    let mut x = Float::with_val(bits, v * &half_r);
                    x -= dv;
                    // a: -(R/2) F + F_eta ; b (eta mirrored): (R/2) F - F_eta
                    x * -sign
                })
                .collect();
            vals.push(val);
            ders.push(der);
        }
    }
    let top = vals.iter().map(Vec::len).max().unwrap_or(1) * 2;
    let a_plane = aux_a_table(ctx, top, &r)?;
    let f_plane = Float::with_val(bits, ctx.pi() * &r);
    let flux = DenseMatrix::from_rows(contract_line(ctx, &vals, &ders, &a_plane, &f_plane))?;
    Ok(SurfaceMatrices { half, flux })
}

/// `int_{eta > 0} u(x) v(x) dV` for coefficient vectors `u`, `v`.
pub fn half_space_overlap(m: &SurfaceMatrices, u: &DenseVector, v: &DenseVector) -> Real {
    u.dot(&m.half.matvec(v))
}

/// `int_M u (n . grad v) dS` over the median plane, normal toward `b`.
pub fn median_plane_flux(m: &SurfaceMatrices, u: &DenseVector, v: &DenseVector) -> Real {
    u.dot(&m.flux.matvec(v))
}

#[cfg(test)]
mod tests;
