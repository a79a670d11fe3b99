//! Rayleigh–Schrödinger (polarization) and Hirschfelder–Silbey expansions of
//! the primitive function in the matrix representation.
//!
//! All expansions share one bordered factorization of the reduced resolvent
//! `R0 = (1 - P0)(H0 - E0)^{-1}(1 - P0)` at `E0 = -1/2`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::integrals::{build_matrices, OperatorMatrices};
use crate::mpkernel::{DenseMatrix, DenseVector, LuDecomposition, PrecisionContext, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RS")]
    Rs,
    #[serde(rename = "HS")]
    Hs,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Rs => "RS",
            Method::Hs => "HS",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RS" => Ok(Method::Rs),
            "HS" => Ok(Method::Hs),
            _ => Err(Error::Invalid(format!("unknown method {s:?}"))),
        }
    }
}

/// Factorization of `[[H0 - E0 S, S e0], [e0^T S, 0]]`.
#[derive(Clone, Debug)]
pub struct ResolventSolver {
    lu: LuDecomposition,
    s_e0: DenseVector,
    n: usize,
}

impl ResolventSolver {
    pub fn new(ctx: &PrecisionContext, m: &OperatorMatrices) -> Result<Self> {
        let n = m.dim();
        let e0 = ctx.ratio(-1, 2);
        let s_e0 = DenseVector(m.s.row(0).to_vec());
        let bordered = DenseMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
            (true, true) => {
                let mut v = Float::with_val(ctx.bits(), &m.s[(i, j)] * &e0);
                v = Float::with_val(ctx.bits(), &m.h0[(i, j)] - &v);
                v
            }
            (true, false) => s_e0[i].clone(),
            (false, true) => s_e0[j].clone(),
            (false, false) => ctx.zero(),
        });
        let lu = LuDecomposition::factor(ctx, &bordered)?;
        Ok(Self { lu, s_e0, n })
    }

    /// `x = R0 f` given the dual vector `y_i = <chi_i|f>`: solves
    /// `(H0 - E0 S) x = (1 - S e0 e0^T) y` subject to `e0^T S x = 0`.
    pub fn apply(&self, y: &DenseVector) -> DenseVector {
        let mut rhs = y.clone();
        let y0 = y[0].clone();
        for i in 0..self.n {
            let t = Float::with_val(y0.prec(), &self.s_e0[i] * &y0);
            rhs[i] -= t;
        }
        rhs.0.push(Float::new(y0.prec()));
        let mut x = self.lu.solve(&rhs);
        x.0.truncate(self.n);
        x
    }
}

/// The matrices of one `(R, Omega)` point together with the resolvent.
#[derive(Clone, Debug)]
pub struct PerturbationSystem {
    ctx: PrecisionContext,
    r: f64,
    omega: u32,
    pub matrices: OperatorMatrices,
    pub resolvent: ResolventSolver,
}

/// Orders `phi[n]` and energies of one expansion.
///
/// `phi[0] = e0` is the unperturbed function; every correction satisfies
/// `e0^T S phi[n] = 0`. For RS only `e_rs` is filled, for HS `e_g`/`e_u`;
/// index 0 holds `E0 = -1/2`.
#[derive(Clone, Debug)]
pub struct PerturbationSeries {
    pub method: Method,
    pub r: f64,
    pub omega: u32,
    pub phi: Vec<DenseVector>,
    pub e_rs: Vec<Real>,
    pub e_g: Vec<Real>,
    pub e_u: Vec<Real>,
    /// HS only: first order at which the stopping rule held.
    pub converged_at: Option<usize>,
}

impl PerturbationSeries {
    pub fn max_order(&self) -> usize {
        self.phi.len() - 1
    }

    /// `sum_{k<=n} phi[k]`
    pub fn partial_sum(&self, n: usize) -> DenseVector {
        let mut acc = self.phi[0].clone();
        let one = Float::with_val(acc[0].prec(), 1);
        for p in &self.phi[1..=n.min(self.max_order())] {
            acc.axpy(&one, p);
        }
        acc
    }

    fn energy_sum(e: &[Real], n: usize) -> Real {
        let mut s = Float::new(e[0].prec());
        for x in &e[..=n.min(e.len() - 1)] {
            s += x;
        }
        s
    }

    pub fn energy_g_sum(&self, n: usize) -> Real {
        Self::energy_sum(&self.e_g, n)
    }

    pub fn energy_u_sum(&self, n: usize) -> Real {
        Self::energy_sum(&self.e_u, n)
    }

    pub fn energy_rs_sum(&self, n: usize) -> Real {
        Self::energy_sum(&self.e_rs, n)
    }
}

/// How far an HS expansion runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HsStop {
    /// Exactly this many orders.
    Orders(usize),
    /// Until `|E_g^(n)| / |sum_{k=1..n} E_g^(k)| < 10^(shift - digits)`, at
    /// most `cap` orders.
    Converged { cap: usize, shift: i32 },
}

impl HsStop {
    pub const DEFAULT_SHIFT: i32 = 20;

    pub fn converged(cap: usize) -> Self {
        HsStop::Converged { cap, shift: Self::DEFAULT_SHIFT }
    }
}

impl PerturbationSystem {
    pub fn new(basis: &BasisSet) -> Result<Self> {
        let ctx = *basis.context();
        let matrices = build_matrices(basis)?;
        let resolvent = ResolventSolver::new(&ctx, &matrices)?;
        Ok(Self { ctx, r: basis.distance(), omega: basis.omega(), matrices, resolvent })
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn distance(&self) -> f64 {
        self.r
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.matrices.dim()
    }

    fn empty_series(&self, method: Method) -> PerturbationSeries {
        let e0 = self.ctx.ratio(-1, 2);
        PerturbationSeries {
            method,
            r: self.r,
            omega: self.omega,
            phi: vec![DenseVector::unit(&self.ctx, self.dim(), 0)],
            e_rs: if method == Method::Rs { vec![e0.clone()] } else { Vec::new() },
            e_g: if method == Method::Hs { vec![e0.clone()] } else { Vec::new() },
            e_u: if method == Method::Hs { vec![e0] } else { Vec::new() },
            converged_at: None,
        }
    }

    /// `phi[n] = -R0 V phi[n-1] + sum_{k=1}^{n} E^(k) R0 phi[n-k]`,
    /// `E^(n) = <phi0|V phi[n-1]>`.
    pub fn rs_expand(&self, max_order: usize) -> PerturbationSeries {
        let m = &self.matrices;
        let mut series = self.empty_series(Method::Rs);
        let mut s_phi = vec![m.s.matvec(&series.phi[0])];
        for n in 1..=max_order {
            let v_prev = m.v.matvec(&series.phi[n - 1]);
            series.e_rs.push(v_prev[0].clone());
            let mut y = v_prev;
            y.scale(&self.ctx.int(-1));
            // the k = n term is R0 phi0 = 0
            for k in 1..n {
                y.axpy(&series.e_rs[k], &s_phi[n - k]);
            }
            let x = self.resolvent.apply(&y);
            s_phi.push(m.s.matvec(&x));
            series.phi.push(x);
        }
        series
    }

    /// Hirschfelder–Silbey: as RS with `R0 phi` replaced by
    /// `E_g R0 A_g phi + E_u R0 A_u phi`, `A_{g,u} = (1 +- P)/2`, and
    /// `E_nu^(n) = (<phi0|V A_nu phi[n-1]> - sum_{k=1}^{n-1} E_nu^(k) <phi0|A_nu phi[n-k]>) / <phi0|A_nu phi0>`.
    pub fn hs_expand(&self, stop: HsStop) -> PerturbationSeries {
        let ctx = &self.ctx;
        let bits = ctx.bits();
        let m = &self.matrices;
        let mut series = self.empty_series(Method::Hs);
        let (cap, tol) = match stop {
            HsStop::Orders(n) => (n, None),
            HsStop::Converged { cap, shift } => (cap, Some(ctx.tolerance(shift))),
        };
        let p0 = m.apply_p(&series.phi[0]);
        let mut s_phi = vec![m.s.matvec(&series.phi[0])];
        let mut sp_phi = vec![m.s.matvec(&p0)];
        // <phi0|P phi[k]> and <phi0|V P phi[k]> via the first rows
        let v_row = m.v.row_vector(0);
        let overlap0 = &s_phi[0][0];
        let overlap_p0 = &sp_phi[0][0];
        let d_g = Float::with_val(bits, overlap0 + overlap_p0) / 2u32;
        let d_u = Float::with_val(bits, overlap0 - overlap_p0) / 2u32;
        let mut sum_g = ctx.zero();
        for n in 1..=cap {
            let prev = &series.phi[n - 1];
            let v_prev = m.v.matvec(prev);
            let vp_prev = v_row.dot(&m.apply_p(prev));
            let mut e_g = Float::with_val(bits, &v_prev[0] + &vp_prev) / 2u32;
            let mut e_u = Float::with_val(bits, &v_prev[0] - &vp_prev) / 2u32;
            for k in 1..n {
                let (a, b) = (&s_phi[n - k][0], &sp_phi[n - k][0]);
                let ag = Float::with_val(bits, a + b) / 2u32;
                let au = Float::with_val(bits, a - b) / 2u32;
                e_g -= ag * &series.e_g[k];
                e_u -= au * &series.e_u[k];
            }
            e_g /= &d_g;
            e_u /= &d_u;
            series.e_g.push(e_g);
            series.e_u.push(e_u);

            let mut y = v_prev;
            y.scale(&ctx.int(-1));
            for k in 1..=n {
                let plus = Float::with_val(bits, &series.e_g[k] + &series.e_u[k]) / 2u32;
                let minus = Float::with_val(bits, &series.e_g[k] - &series.e_u[k]) / 2u32;
                y.axpy(&plus, &s_phi[n - k]);
                y.axpy(&minus, &sp_phi[n - k]);
            }
            let x = self.resolvent.apply(&y);
            s_phi.push(m.s.matvec(&x));
            sp_phi.push(m.s.matvec(&m.apply_p(&x)));
            series.phi.push(x);

            sum_g += &series.e_g[n];
            if let Some(tol) = &tol {
                let ratio = Float::with_val(bits, series.e_g[n].abs_ref()) / Float::with_val(bits, sum_g.abs_ref());
                if ratio < *tol {
                    series.converged_at = Some(n);
                    break;
                }
            }
        }
        series
    }
}

/// `<phi0|phi>_S` for each order; zero for `n >= 1` by construction.
pub fn intermediate_normalization(m: &OperatorMatrices, series: &PerturbationSeries) -> Vec<Real> {
    let row = m.s.row_vector(0);
    series.phi.iter().map(|p| row.dot(p)).collect()
}

/// Smallest `n > 10` whose ratio `J^(n+1)/J^(n)` exceeds 0.75 and stays
/// above it for the next three ratios. `corrections[k]` holds `J^(k)`
/// (index 0 unused).
pub fn detect_ncrit(corrections: &[Real]) -> Option<usize> {
    const THRESHOLD: f64 = 0.75;
    const FOLLOW: usize = 3;
    let ratio = |n: usize| -> Option<f64> {
        let (a, b) = (corrections.get(n)?, corrections.get(n + 1)?);
        if a.is_zero() {
            return None;
        }
        Some(Float::with_val(a.prec(), b / a).to_f64())
    };
    let last = corrections.len().checked_sub(2 + FOLLOW)?;
    (11..=last).find(|&n| (0..=FOLLOW).all(|d| ratio(n + d).is_some_and(|q| q > THRESHOLD)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_basis;

    fn ctx50() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    fn rel(a: &Real, b: &Real) -> f64 {
        let d = Float::with_val(a.prec(), a - b).abs();
        (d / Float::with_val(a.prec(), b.abs_ref())).to_f64()
    }

    #[test]
    fn resolvent_annihilates_phi0() {
        let c = ctx50();
        let sys = PerturbationSystem::new(&enumerate_basis(&c, 3, 8.0)).unwrap();
        let y = sys.matrices.s.matvec(&DenseVector::unit(&c, sys.dim(), 0));
        assert!(sys.resolvent.apply(&y).max_abs().to_f64() < 1e-40);
    }

    #[test]
    fn resolvent_defining_identity() {
        let c = ctx50();
        let sys = PerturbationSystem::new(&enumerate_basis(&c, 3, 8.0)).unwrap();
        let m = &sys.matrices;
        let n = sys.dim();
        let y = DenseVector::from_f64(&c, &(0..n).map(|i| ((i * 37 % 17) as f64 - 8.0) / 5.0).collect::<Vec<_>>());
        let x = sys.resolvent.apply(&y);
        // (H0 - E0 S) x = (1 - S e0 e0^T) y and e0^T S x = 0
        let half = c.ratio(1, 2);
        let lhs = m.h0.matvec(&x);
        let mut lhs2 = lhs.clone();
        lhs2.axpy(&half, &m.s.matvec(&x));
        let mut rhs = y.clone();
        let y0 = Float::with_val(c.bits(), -&y[0]);
        rhs.axpy(&y0, &m.s.row_vector(0));
        for i in 0..n {
            let d = Float::with_val(c.bits(), &lhs2[i] - &rhs[i]).abs().to_f64();
            assert!(d < 1e-38, "{i}: {d}");
        }
        assert!(m.s.row_vector(0).dot(&x).to_f64().abs() < 1e-40);
    }

    /// 2x2 bordered system by hand: with S = [[1, s], [s, 1]] and
    /// H0 - E0 S = [[0, 0], [0, d]] the solution of the projected equation
    /// is x = (-s x1, x1) with x1 = (y1 - s y0) / d.
    #[test]
    fn omega_zero_by_hand() {
        let c = ctx50();
        let sys = PerturbationSystem::new(&enumerate_basis(&c, 0, 6.0)).unwrap();
        let m = &sys.matrices;
        let half = c.ratio(1, 2);
        let s = m.s[(0, 1)].clone();
        let d = Float::with_val(c.bits(), &m.h0[(1, 1)] + Float::with_val(c.bits(), &half * &m.s[(1, 1)]));
        let y = DenseVector::from_f64(&c, &[0.3, -1.25]);
        let x = sys.resolvent.apply(&y);
        let x1 = Float::with_val(c.bits(), &y[1] - Float::with_val(c.bits(), &s * &y[0])) / &d;
        let x0 = -Float::with_val(c.bits(), &s * &x1);
        assert!(rel(&x[1], &x1) < 1e-40);
        assert!(rel(&x[0], &x0) < 1e-40);
    }

    #[test]
    fn rs_first_order_and_normalization() {
        let c = ctx50();
        for rv in [5.0, 12.0] {
            let sys = PerturbationSystem::new(&enumerate_basis(&c, 3, rv)).unwrap();
            let s = sys.rs_expand(8);
            let r = c.f64(rv);
            let mut e1 = Float::with_val(c.bits(), r.recip_ref()) + 1u32;
            e1 *= c.exp(&Float::with_val(c.bits(), &r * -2i32));
            assert!(Float::with_val(c.bits(), &s.e_rs[1] - &e1).abs().to_f64() < 1e-46);
            for (n, v) in intermediate_normalization(&sys.matrices, &s).iter().enumerate() {
                let expect = if n == 0 { 1.0 } else { 0.0 };
                assert!((v.to_f64() - expect).abs() < 1e-40);
            }
        }
    }

    #[test]
    fn rs_second_order_polarization() {
        let c = PrecisionContext::new(40).unwrap();
        // E2 R^4 = -9/4 + O(1/R^2) (the R^-5 term vanishes: no quadrupole from a point charge)
        let mut vals = Vec::new();
        for rv in [40.0, 60.0, 80.0] {
            let sys = PerturbationSystem::new(&enumerate_basis(&c, 6, rv)).unwrap();
            let s = sys.rs_expand(2);
            vals.push((rv, s.e_rs[2].to_f64() * rv.powi(4)));
        }
        // extrapolate in 1/R^2 through the last two points
        let (r1, v1) = vals[1];
        let (r2, v2) = vals[2];
        let (x1, x2) = (1.0 / (r1 * r1), 1.0 / (r2 * r2));
        let lim = v2 - (v1 - v2) / (x1 - x2) * x2;
        assert!((lim + 2.25).abs() < 1e-3, "{vals:?} -> {lim}");
        assert!(vals.iter().all(|(_, v)| (v + 2.25).abs() < 0.05));
    }

    #[test]
    fn hs_first_order_closed_form() {
        let c = ctx50();
        let rv = 7.0;
        let sys = PerturbationSystem::new(&enumerate_basis(&c, 2, rv)).unwrap();
        let m = &sys.matrices;
        let h = sys.dim() / 2;
        let s = sys.hs_expand(HsStop::Orders(3));
        let sab = &m.s[(0, h)];
        let num = Float::with_val(c.bits(), &m.v[(0, 0)] + &m.v[(0, h)]);
        let e_g = num / Float::with_val(c.bits(), sab + 1u32);
        assert!(rel(&s.e_g[1], &e_g) < 1e-45);
        assert!(s.e_u[1] > s.e_g[1]);
        for (n, v) in intermediate_normalization(m, &s).iter().enumerate().skip(1) {
            assert!(v.to_f64().abs() < 1e-40, "order {n}");
        }
    }

    #[test]
    fn lcao_splitting_sign() {
        let c = ctx50();
        for rv in [2.5, 5.0, 20.0] {
            let sys = PerturbationSystem::new(&enumerate_basis(&c, 0, rv)).unwrap();
            let s = sys.hs_expand(HsStop::Orders(1));
            assert!(s.e_u[1] > s.e_g[1], "R={rv}");
        }
    }

    /// Lowest roots of the generalized eigenproblem of (H0 + V, S)
    /// restricted to the gerade and ungerade subspaces, by bisection on the
    /// sign changes of det(H - E S) along the symmetric basis.
    fn symmetric_subspace_ground(c: &PrecisionContext, m: &OperatorMatrices, sign: i32) -> Real {
        let h = m.dim() / 2;
        let one = c.one();
        let full = m.h0.combine(&one, &m.v, &one);
        let proj = |a: &DenseMatrix| {
            DenseMatrix::from_fn(h, h, |i, j| {
                let mut v = Float::with_val(c.bits(), &a[(i, j + h)] * sign);
                v += &a[(i, j)];
                v += Float::with_val(c.bits(), &a[(i + h, j)] * sign);
                v += &a[(i + h, j + h)];
                v / 2u32
            })
        };
        let hh = proj(&full);
        let ss = proj(&m.s);
        // count eigenvalues below e by the inertia of H - e S (LDL^T without pivoting
        // is fine: S is positive definite and we only need the sign pattern)
        let below = |e: &Real| -> usize {
            let a = hh.combine(&one, &ss, &Float::with_val(c.bits(), -e));
            let mut a: Vec<Vec<Real>> = (0..h).map(|i| a.row(i).to_vec()).collect();
            let mut neg = 0;
            for k in 0..h {
                let piv = a[k][k].clone();
                if piv < 0 {
                    neg += 1;
                }
                for i in k + 1..h {
                    let f = Float::with_val(c.bits(), &a[i][k] / &piv);
                    for j in k..h {
                        let t = Float::with_val(c.bits(), &f * &a[k][j]);
                        a[i][j] -= t;
                    }
                }
            }
            neg
        };
        let (mut lo, mut hi) = (c.int(-2), c.int(0));
        for _ in 0..200 {
            let mid = Float::with_val(c.bits(), &lo + &hi) / 2u32;
            if below(&mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    #[test]
    fn hs_converges_to_variational_energies() {
        let c = ctx50();
        for (omega, rv) in [(0u32, 6.0), (2, 8.0)] {
            let sys = PerturbationSystem::new(&enumerate_basis(&c, omega, rv)).unwrap();
            let s = sys.hs_expand(HsStop::Orders(150));
            for (sign, sum) in [(1, s.energy_g_sum(150)), (-1, s.energy_u_sum(150))] {
                let ev = symmetric_subspace_ground(&c, &sys.matrices, sign);
                assert!(rel(&sum, &ev) < 1e-35, "omega={omega} R={rv} sign={sign}: {sum} vs {ev}");
            }
        }
    }

    #[test]
    fn hs_stopping_rule_fires() {
        let c = PrecisionContext::new(30).unwrap();
        let sys = PerturbationSystem::new(&enumerate_basis(&c, 2, 10.0)).unwrap();
        let s = sys.hs_expand(HsStop::converged(200));
        let n = s.converged_at.expect("converged");
        assert_eq!(s.max_order(), n);
        let ratio = Float::with_val(c.bits(), &s.e_g[n] / (s.energy_g_sum(n) + 0.5f64)).abs();
        assert!(ratio < c.tolerance(20));
    }

    #[test]
    fn ncrit_synthetic() {
        let c = ctx50();
        let j: Vec<Real> = (0..60).map(|n| c.f64(0.5f64.powi(n.min(30)))).collect();
        assert_eq!(detect_ncrit(&j), Some(30));
        let geometric: Vec<Real> = (0..60).map(|n| c.f64(0.5f64.powi(n))).collect();
        assert_eq!(detect_ncrit(&geometric), None);
        assert_eq!(detect_ncrit(&j[..5]), None);
    }
}
