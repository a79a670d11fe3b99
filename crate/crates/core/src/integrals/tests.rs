use super::*;
use crate::basis::enumerate_basis;

fn ctx50() -> PrecisionContext {
    PrecisionContext::new(50).unwrap()
}

fn rel(a: &Real, b: &Real) -> f64 {
    let d = Float::with_val(a.prec(), a - b).abs();
    (d / Float::with_val(a.prec(), b.abs_ref())).to_f64()
}

fn exp_neg(c: &PrecisionContext, x: &Real) -> Real {
    c.exp(&Float::with_val(c.bits(), -x))
}

/// `e^{-R}(1 + R + R^2/3)`
fn s_closed(c: &PrecisionContext, r: &Real) -> Real {
    let mut p = Float::with_val(c.bits(), r.square_ref()) / 3u32;
    p += r;
    p += 1u32;
    p * exp_neg(c, r)
}

#[test]
fn hydrogenic_closed_forms() {
    let c = ctx50();
    for rv in [2.0, 10.0, 40.0] {
        let b = enumerate_basis(&c, 3, rv);
        let h = b.per_center();
        let m = build_matrices(&b).unwrap();
        let r = c.f64(rv);
        let s = s_closed(&c, &r);
        assert!(rel(&m.s[(0, h)], &s) < 1e-44, "S at R={rv}");
        let ex = Float::with_val(c.bits(), &r + 1u32) * exp_neg(&c, &r);
        assert!(rel(&m.ua[(0, h)], &ex) < 1e-44);
        assert!(rel(&m.ub[(0, h)], &ex) < 1e-44);
        // T b = -b/2 + b/r_b
        let t = Float::with_val(c.bits(), &ex - Float::with_val(c.bits(), &s / 2u32));
        assert!(rel(&m.t[(0, h)], &t) < 1e-42, "T at R={rv}");
        assert!(rel(&m.h0[(0, 0)], &c.ratio(-1, 2)) < 1e-48);
        // <a|V|a> = e^{-2R}(1 + 1/R) is only meaningful relative to 1/R
        let mut vaa = Float::with_val(c.bits(), r.recip_ref()) + 1u32;
        vaa *= exp_neg(&c, &Float::with_val(c.bits(), &r * 2u32));
        let d = Float::with_val(c.bits(), &m.v[(0, 0)] - &vaa).abs().to_f64();
        assert!(d < 1e-47, "V_aa at R={rv}");
        // <a|V|b> = -e^{-R}(1+R) + S/R
        let vab = Float::with_val(c.bits(), &s / &r) - &ex;
        assert!(rel(&m.v[(0, h)], &vab) < 1e-42);
    }
    // the quoted number at R = 2
    let b = enumerate_basis(&c, 0, 2.0);
    let m = build_matrices(&b).unwrap();
    assert!((m.s[(0, 1)].to_f64() - 13.0 / 3.0 * (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn exact_symmetry_and_mirror() {
    let c = PrecisionContext::new(40).unwrap();
    let b = enumerate_basis(&c, 4, 12.0);
    let m = build_matrices(&b).unwrap();
    for x in [&m.s, &m.t, &m.ua, &m.ub] {
        assert!(x.is_symmetric());
    }
    let tol = c.tolerance(10).to_f64();
    let p = &m.perm;
    assert!(m.ua.permuted(p).max_abs_diff(&m.ub).to_f64() <= tol);
    assert!(m.s.permuted(p).max_abs_diff(&m.s).to_f64() <= tol);
    let one = c.one();
    let full = m.h0.combine(&one, &m.v, &one);
    assert!(full.permuted(p).max_abs_diff(&full).to_f64() <= tol);
    // and H0 alone is not symmetric under P
    assert!(m.h0.permuted(p).max_abs_diff(&m.h0).to_f64() > 1e-3);
    // P^2 = I
    assert!(p.iter().enumerate().all(|(i, &j)| p[j] == i));
    let pm = m.p_matrix(&c);
    let pspt = pm.transpose().matmul(&m.s).matmul(&pm);
    assert!(pspt.max_abs_diff(&m.s).to_f64() <= tol);
}

#[test]
fn same_center_orthonormal_up_to_omega_4() {
    let c = ctx50();
    for omega in 0..=4 {
        let b = enumerate_basis(&c, omega, 9.0);
        let m = build_matrices(&b).unwrap();
        let h = b.per_center();
        for i in 0..2 * h {
            for j in 0..2 * h {
                if (i < h) != (j < h) {
                    continue;
                }
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((m.s[(i, j)].to_f64() - e).abs() < 1e-40);
            }
        }
    }
}

#[test]
fn kinetic_cross_block_hermitian() {
    let c = PrecisionContext::new(40).unwrap();
    let b = enumerate_basis(&c, 3, 7.0);
    let r = b.distance_real();
    let eb = elliptic_block(&c, &b, &r);
    let cols: Vec<Poly2> = eb.r_laplacian.iter().map(|g| g.mirror().mul_small(&c, &XI_PLUS_ETA)).collect();
    let a = aux_a_table(&c, 20, &r).unwrap();
    let bt = aux_b_table(&c, 20, &c.zero()).unwrap();
    let full = contract(&c, &eb.value, &cols, &a, &bt, &c.one(), false);
    for i in 0..full.len() {
        for j in 0..full.len() {
            let d = Float::with_val(c.bits(), &full[i][j] - &full[j][i]).abs().to_f64();
            assert!(d < 1e-30, "({i},{j})");
        }
    }
}

/// Elliptic 2-D Gauss–Legendre quadrature (f64) of `<chi_i|chi_j>` and
/// `<chi_i|1/r_a|chi_j>` for cross-center pairs.
#[test]
fn cross_blocks_against_quadrature() {
    let c = PrecisionContext::new(30).unwrap();
    let rv = 4.0;
    let b = enumerate_basis(&c, 2, rv);
    let m = build_matrices(&b).unwrap();
    let h = b.per_center();
    let (x, w) = gauss_legendre(48);
    let eval = |i: usize, xi: f64, eta: f64| {
        let rho = rv / 2.0 * ((xi * xi - 1.0) * (1.0 - eta * eta)).max(0.0).sqrt();
        let z = rv / 2.0 * xi * eta;
        b.eval_function(i, &c.f64(rho), &c.f64(z)).to_f64()
    };
    for (i, j) in [(0, h), (1, h + 3), (4, h + 2), (5, h + 5)] {
        let (mut s, mut u) = (0.0, 0.0);
        // xi = 1 + t/(1-t) on [0,1)
        for (tk, wk) in x.iter().zip(&w) {
            let t = 0.5 * (tk + 1.0);
            let xi = 1.0 + t / (1.0 - t);
            let jac = 0.5 / (1.0 - t).powi(2);
            for (ek, vk) in x.iter().zip(&w) {
                let vol = 2.0 * std::f64::consts::PI * rv.powi(3) / 8.0 * (xi * xi - ek * ek);
                let f = eval(i, xi, *ek) * eval(j, xi, *ek) * vol * wk * vk * jac;
                s += f;
                u += f / (rv / 2.0 * (xi + ek));
            }
        }
        assert!((s - m.s[(i, j)].to_f64()).abs() < 1e-9, "S({i},{j}) {s} vs {}", m.s[(i, j)]);
        assert!((u - m.ua[(i, j)].to_f64()).abs() < 1e-9, "Ua({i},{j})");
    }
}

pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let dp = {
                    let (mut p0, mut p1) = (1.0, z);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    n as f64 * (z * p1 - p0) / (z * z - 1.0)
                };
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

#[test]
fn half_space_examples() {
    let c = ctx50();
    for rv in [5.0, 20.0] {
        let b = enumerate_basis(&c, 2, rv);
        let h = b.per_center();
        let n = b.len();
        let sm = build_surface_matrices(&b).unwrap();
        let m = build_matrices(&b).unwrap();
        let r = b.distance_real();
        let a = DenseVector::unit(&c, n, 0);
        let bb = DenseVector::unit(&c, n, h);
        // (1/2) e^{-R} (1 + R/2)
        let expect = Float::with_val(c.bits(), &r / 2u32) + 1u32;
        let expect = expect * exp_neg(&c, &r) / 2u32;
        assert!(rel(&half_space_overlap(&sm, &a, &a), &expect) < 1e-40);
        let ab = half_space_overlap(&sm, &a, &bb);
        let s_half = Float::with_val(c.bits(), &m.s[(0, h)] / 2u32);
        assert!(rel(&ab, &s_half) < 1e-40);
        let mut g = DenseVector::zeros(&c, n);
        let norm = Float::with_val(c.bits(), &m.s[(0, h)] * 2u32) + 2u32;
        let coef = norm.recip_sqrt();
        g[0] = coef.clone();
        g[h] = coef;
        let half = half_space_overlap(&sm, &g, &g);
        assert!((half.to_f64() - 0.5).abs() < 1e-40);
    }
}

#[test]
fn half_space_consistency_random_vectors() {
    let c = PrecisionContext::new(40).unwrap();
    let b = enumerate_basis(&c, 3, 15.0);
    let sm = build_surface_matrices(&b).unwrap();
    let m = build_matrices(&b).unwrap();
    let n = b.len();
    let u = DenseVector::from_f64(&c, &(0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect::<Vec<_>>());
    let v = DenseVector::from_f64(&c, &(0..n).map(|i| ((i * 5 + 1) % 13) as f64 * 0.3 - 1.0).collect::<Vec<_>>());
    let lhs = half_space_overlap(&sm, &u, &v) + half_space_overlap(&sm, &m.apply_p(&u), &m.apply_p(&v));
    let rhs = u.dot(&m.s.matvec(&v));
    assert!(Float::with_val(c.bits(), lhs - rhs).abs().to_f64() < 1e-30);
}

#[test]
fn flux_examples() {
    let c = ctx50();
    let rv = 8.0;
    let b = enumerate_basis(&c, 2, rv);
    let h = b.per_center();
    let n = b.len();
    let sm = build_surface_matrices(&b).unwrap();
    let r = b.distance_real();
    let a = DenseVector::unit(&c, n, 0);
    let expect = Float::with_val(c.bits(), &r / -2i32) * exp_neg(&c, &r);
    assert!(rel(&median_plane_flux(&sm, &a, &a), &expect) < 1e-40);
    // gerade function: zero normal derivative on the plane
    for k in 0..h {
        let mut g = DenseVector::zeros(&c, n);
        g[k] = c.one();
        g[k + h] = c.one();
        let fl = sm.flux.matvec(&g);
        assert!(fl.max_abs().to_f64() < 1e-45);
    }
    // bilinearity
    let u = DenseVector::from_f64(&c, &(0..n).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>());
    let three = c.int(3);
    let mut u3 = u.clone();
    u3.scale(&three);
    let f1 = median_plane_flux(&sm, &u, &u);
    let f3 = median_plane_flux(&sm, &u3, &u);
    assert!(rel(&f3, &(f1 * 3u32)) < 1e-45);
}

/// Plane quadrature with a central-difference normal derivative (f64).
#[test]
fn flux_against_plane_quadrature() {
    let c = PrecisionContext::new(30).unwrap();
    let rv = 8.0;
    let b = enumerate_basis(&c, 2, rv);
    let h = b.per_center();
    let sm = build_surface_matrices(&b).unwrap();
    let (x, w) = gauss_legendre(60);
    for (i, j) in [(0, 0), (1, 4), (4, h + 1), (h + 2, 3)] {
        let mut s = 0.0;
        for (tk, wk) in x.iter().zip(&w) {
            // rho in [0, 30]
            let rho = 15.0 * (tk + 1.0);
            let dz = 1e-5;
            let f = |z: f64| b.eval_function(j, &c.f64(rho), &c.f64(z)).to_f64();
            let d = (f(dz) - f(-dz)) / (2.0 * dz);
            let v = b.eval_function(i, &c.f64(rho), &c.zero()).to_f64();
            s += wk * 15.0 * 2.0 * std::f64::consts::PI * rho * v * d;
        }
        let an = sm.flux[(i, j)].to_f64();
        assert!((s - an).abs() < 1e-8 * an.abs().max(1e-4), "({i},{j}) {s} vs {an}");
    }
}

/// Green's identity on the half-space `eta > 0` for same-center pairs:
/// `int (a_i lap a_j - a_j lap a_i) = -(F_ij - F_ji)` (outward normal
/// points toward `a`).
#[test]
fn flux_green_identity() {
    let c = ctx50();
    let b = enumerate_basis(&c, 3, 10.0);
    let r = b.distance_real();
    let sm = build_surface_matrices(&b).unwrap();
    let eb = elliptic_block(&c, &b, &r);
    let cols: Vec<Poly2> = eb.r_laplacian.iter().map(|g| g.mul_small(&c, &XI_MINUS_ETA)).collect();
    let a = aux_a_table(&c, 30, &r).unwrap();
    let bh = aux_bhalf_table(&c, 30, &r).unwrap();
    let f = Float::with_val(c.bits(), c.pi() * Float::with_val(c.bits(), r.square_ref())) / 2u32;
    let lap = contract(&c, &eb.value, &cols, &a, &bh, &f, false);
    let h = b.per_center();
    for i in 0..h {
        for j in 0..h {
            let lhs = Float::with_val(c.bits(), &lap[i][j] - &lap[j][i]);
            let rhs = Float::with_val(c.bits(), &sm.flux[(j, i)] - &sm.flux[(i, j)]);
            let d = Float::with_val(c.bits(), &lhs - &rhs).abs().to_f64();
            assert!(d < 1e-40, "({i},{j}): {lhs} vs {rhs}");
        }
    }
}
