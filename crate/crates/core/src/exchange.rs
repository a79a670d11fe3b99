//! Exchange splitting `J = (E_g - E_u)/2` from a primitive function: the
//! volume-integral formula, its order-by-order expansion, the
//! Holstein–Herring surface formula and the local-energy diagnostic.

use std::fmt;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::basis::{center_coords, BasisSet, Center};
use crate::error::{Error, Result};
use crate::integrals::{build_surface_matrices, half_space_overlap, median_plane_flux, OperatorMatrices, SurfaceMatrices};
use crate::mpkernel::{DenseVector, PrecisionContext, Real};
use crate::perturbation::{detect_ncrit, HsStop, Method, PerturbationSeries, PerturbationSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Volume,
    Surface,
}

impl Formula {
    pub fn label(self) -> &'static str {
        match self {
            Formula::Volume => "volume",
            Formula::Surface => "surface",
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "volume" => Ok(Formula::Volume),
            "surface" => Ok(Formula::Surface),
            _ => Err(Error::Invalid(format!("unknown formula {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OmegaTag {
    Value(u32),
    Extrapolated,
}

impl fmt::Display for OmegaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaTag::Value(v) => write!(f, "{v}"),
            OmegaTag::Extrapolated => f.write_str("extrapolated"),
        }
    }
}

impl std::str::FromStr for OmegaTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "extrapolated" {
            return Ok(OmegaTag::Extrapolated);
        }
        s.parse().map(OmegaTag::Value).map_err(|_| Error::Invalid(format!("bad Omega {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrderTag {
    Order(usize),
    Converged,
}

impl fmt::Display for OrderTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderTag::Order(n) => write!(f, "{n}"),
            OrderTag::Converged => f.write_str("converged"),
        }
    }
}

impl std::str::FromStr for OrderTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "converged" {
            return Ok(OrderTag::Converged);
        }
        s.parse().map(OrderTag::Order).map_err(|_| Error::Invalid(format!("bad order {s:?}")))
    }
}

/// One computed value of `J` (hartree).
#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeRecord {
    pub r: f64,
    pub omega: OmegaTag,
    pub method: Method,
    pub formula: Formula,
    pub order: OrderTag,
    pub j: Real,
    pub digits: u32,
    /// Free-form origin note, e.g. the Omega ladder of an extrapolation.
    pub provenance: Option<String>,
}

/// `<phi0|phi>`, `<phi0|V phi>`, `<phi0|V P phi>` and `<phi0|P phi>`.
#[derive(Clone, Debug)]
pub struct Brackets {
    pub norm: Real,
    pub v: Real,
    pub vp: Real,
    pub p: Real,
}

impl Brackets {
    pub fn new(m: &OperatorMatrices, phi: &DenseVector) -> Self {
        let pphi = m.apply_p(phi);
        let s0 = m.s.row_vector(0);
        let v0 = m.v.row_vector(0);
        Self { norm: s0.dot(phi), v: v0.dot(phi), vp: v0.dot(&pphi), p: s0.dot(&pphi) }
    }
}

/// `(<phi0|V P phi> - <phi0|V phi><phi0|P phi>) / (1 - <phi0|P phi>^2)`.
pub fn volume_j(ctx: &PrecisionContext, m: &OperatorMatrices, phi: &DenseVector) -> Result<Real> {
    volume_j_from_brackets(ctx, &Brackets::new(m, phi))
}

pub fn volume_j_from_brackets(ctx: &PrecisionContext, b: &Brackets) -> Result<Real> {
    let bits = ctx.bits();
    let dev = Float::with_val(bits, &b.norm - 1u32).abs();
    if dev > ctx.tolerance(10) {
        return Err(Error::NotIntermediateNormalized(b.norm.to_f64()));
    }
    let mut den = Float::with_val(bits, b.p.square_ref());
    den = Float::with_val(bits, 1u32 - &den);
    // 10^(-digits/2)
    let guard = ctx.tolerance(ctx.digits() as i32 / 2);
    if Float::with_val(bits, den.abs_ref()) < guard {
        return Err(Error::Singularity(den.to_f64()));
    }
    let mut num = Float::with_val(bits, &b.v * &b.p);
    num = Float::with_val(bits, &b.vp - &num);
    Ok(num / den)
}

/// `J^(n) = <phi0|V P phi[n-1]> - sum_{k=0}^{n-1} <phi0|V phi[k]><phi0|P phi[n-1-k]>`
/// for `n = 1..=max_order`; index 0 of the result is zero.
pub fn sapt_corrections(ctx: &PrecisionContext, m: &OperatorMatrices, series: &PerturbationSeries, max_order: usize) -> Vec<Real> {
    let top = max_order.min(series.max_order() + 1);
    let b: Vec<Brackets> = series.phi[..top].iter().map(|p| Brackets::new(m, p)).collect();
    let mut out = vec![ctx.zero()];
    for n in 1..=top {
        let mut j = b[n - 1].vp.clone();
        for k in 0..n {
            j -= Float::with_val(ctx.bits(), &b[k].v * &b[n - 1 - k].p);
        }
        out.push(j);
    }
    out
}

/// Holstein–Herring surface formula,
/// `J = flux(phi, phi) / int_{eta<0} phi^2`, with the flux through the
/// median plane oriented toward `b`.
pub fn surface_j(ctx: &PrecisionContext, m: &OperatorMatrices, sm: &SurfaceMatrices, phi: &DenseVector) -> Result<Real> {
    let bits = ctx.bits();
    let total = phi.dot(&m.s.matvec(phi));
    let right = half_space_overlap(sm, phi, phi);
    let left = Float::with_val(bits, &total - &right);
    let quarter = Float::with_val(bits, &total / 4u32);
    if left < quarter {
        return Err(Error::Localization { left: left.to_f64(), total: total.to_f64() });
    }
    Ok(median_plane_flux(sm, phi, phi) / left)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    G,
    U,
    /// The primitive function itself, unsymmetrized.
    Primitive,
}

/// Which operator the local energy applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hamiltonian {
    /// `-lap/2 - 1/r_a - 1/r_b + 1/R`
    Full,
    /// `-lap/2 - 1/r_a`
    Unperturbed,
}

/// `E_loc(eta)` on the internuclear axis `xi = 1`.
#[derive(Clone, Debug)]
pub struct LocalEnergyProfile {
    pub eta: Vec<f64>,
    pub e_loc: Vec<Real>,
    pub e_ref: Option<Real>,
}

impl LocalEnergyProfile {
    /// `|E_loc - E_ref|` per grid point.
    pub fn errors(&self) -> Option<Vec<Real>> {
        let e = self.e_ref.as_ref()?;
        Some(self.e_loc.iter().map(|x| Float::with_val(x.prec(), x - e).abs()).collect())
    }
}

/// Local energy `(H psi)/psi` of `psi = A_sym phi` at the axis points `eta`
/// (`-1 < eta < 1`, nucleus `a` at `eta = -1`).
pub fn local_energy(
    basis: &BasisSet,
    phi: &DenseVector,
    symmetry: Symmetry,
    eta: &[f64],
    hamiltonian: Hamiltonian,
    e_ref: Option<Real>,
) -> Result<LocalEnergyProfile> {
    let ctx = basis.context();
    let bits = ctx.bits();
    let r = basis.distance_real();
    let n = basis.len();
    if phi.len() != n {
        return Err(Error::Dimension(format!("phi has {} entries for a basis of {n}", phi.len())));
    }
    let perm = basis.mirror_permutation();
    // psi coefficients c_i = (phi_i +- phi_{P i}) / 2
    let coeffs: Vec<Real> = (0..n)
        .map(|i| match symmetry {
            Symmetry::Primitive => phi[i].clone(),
            Symmetry::G => Float::with_val(bits, &phi[i] + &phi[perm[i]]) / 2u32,
            Symmetry::U => Float::with_val(bits, &phi[i] - &phi[perm[i]]) / 2u32,
        })
        .collect();
    let monos: Vec<_> = basis.functions().iter().map(|f| (f.to_monomials(ctx), f.laplacian_monomials(ctx))).collect();
    let guard = ctx.tolerance(ctx.digits() as i32 / 2);
    let inv_r = Float::with_val(bits, r.recip_ref());
    let mut out = Vec::with_capacity(eta.len());
    for &e in eta {
        if !(e > -1.0 && e < 1.0) {
            return Err(Error::Domain(format!("axis point eta = {e} must lie strictly between the nuclei")));
        }
        let z = Float::with_val(bits, &r * ctx.f64(e)) / 2u32;
        let rho = ctx.zero();
        let (ra, ca) = center_coords(ctx, Center::A, &r, &rho, &z);
        let (rb, cb) = center_coords(ctx, Center::B, &r, &rho, &z);
        let mut psi = ctx.zero();
        let mut lap = ctx.zero();
        for (i, f) in basis.functions().iter().enumerate() {
            if coeffs[i].is_zero() {
                continue;
            }
            let (d, c) = match f.center {
                Center::A => (&ra, &ca),
                Center::B => (&rb, &cb),
            };
            psi += Float::with_val(bits, &coeffs[i] * monos[i].0.eval(d, c));
            lap += Float::with_val(bits, &coeffs[i] * monos[i].1.eval(d, c));
        }
        if Float::with_val(bits, psi.abs_ref()) < guard {
            return Err(Error::VanishingWavefunction(psi.to_f64()));
        }
        let mut h = Float::with_val(bits, &lap / -2i32);
        let mut pot = -Float::with_val(bits, ra.recip_ref());
        if hamiltonian == Hamiltonian::Full {
            pot -= Float::with_val(bits, rb.recip_ref());
            pot += &inv_r;
        }
        h += Float::with_val(bits, &pot * &psi);
        out.push(h / psi);
    }
    Ok(LocalEnergyProfile { eta: eta.to_vec(), e_loc: out, e_ref })
}

/// What to compute at one `(R, Omega)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRequest {
    pub methods: Vec<Method>,
    pub formulas: Vec<Formula>,
    /// Integer orders to report (the formula evaluated on the partial sum).
    pub orders: Vec<usize>,
    /// Also report the converged value.
    pub converged: bool,
    /// Order cap for the HS stopping rule.
    pub hs_cap: usize,
    /// Number of RS orders generated; `n_crit` is searched within them.
    pub rs_orders: usize,
}

impl Default for PointRequest {
    fn default() -> Self {
        Self {
            methods: vec![Method::Hs],
            formulas: vec![Formula::Volume],
            orders: Vec::new(),
            converged: true,
            hs_cap: 200,
            rs_orders: 200,
        }
    }
}

/// Everything computed at one point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub records: Vec<ExchangeRecord>,
    /// `J^(n)` from the RS series, when RS was requested.
    pub rs_corrections: Option<Vec<Real>>,
    pub n_crit: Option<usize>,
    /// HS order at which the stopping rule held.
    pub hs_converged_at: Option<usize>,
}

/// Runs the expansions at `(R, Omega)` and evaluates the requested formulas.
///
/// The converged HS value uses the partial sum at the stopping order (or the
/// cap); the converged RS value uses the partial sum up to `n_crit`, or all
/// generated orders if no plateau was found.
pub fn compute_point(ctx: &PrecisionContext, r: f64, omega: u32, req: &PointRequest) -> Result<PointResult> {
    let basis = crate::basis::enumerate_basis(ctx, omega, r);
    let sys = PerturbationSystem::new(&basis)?;
    let surface = if req.formulas.contains(&Formula::Surface) { Some(build_surface_matrices(&basis)?) } else { None };
    let max_int = req.orders.iter().copied().max().unwrap_or(0);
    let mut records = Vec::new();
    let mut rs_corr = None;
    let mut n_crit = None;
    let mut hs_conv = None;
    for &method in &req.methods {
        let (series, conv_order) = match method {
            Method::Hs => {
                let stop = if req.converged { HsStop::converged(req.hs_cap.max(max_int)) } else { HsStop::Orders(max_int) };
                let mut s = sys.hs_expand(stop);
                if s.max_order() < max_int {
                    s = sys.hs_expand(HsStop::Orders(max_int));
                }
                hs_conv = s.converged_at;
                let conv = s.converged_at.unwrap_or(req.hs_cap.max(max_int).min(s.max_order()));
                (s, conv)
            }
            Method::Rs => {
                let s = sys.rs_expand(req.rs_orders.max(max_int));
                let corr = sapt_corrections(ctx, &sys.matrices, &s, s.max_order());
                n_crit = detect_ncrit(&corr);
                let conv = n_crit.unwrap_or(s.max_order());
                rs_corr = Some(corr);
                (s, conv)
            }
        };
        let mut targets: Vec<(OrderTag, usize)> = req.orders.iter().map(|&n| (OrderTag::Order(n), n)).collect();
        if req.converged {
            targets.push((OrderTag::Converged, conv_order));
        }
        for (tag, n) in targets {
            let phi = series.partial_sum(n);
            for &formula in &req.formulas {
                let j = match formula {
                    Formula::Volume => volume_j(ctx, &sys.matrices, &phi)?,
                    Formula::Surface => surface_j(ctx, &sys.matrices, surface.as_ref().expect("built above"), &phi)?,
                };
                records.push(ExchangeRecord {
                    r,
                    omega: OmegaTag::Value(omega),
                    method,
                    formula,
                    order: tag,
                    j,
                    digits: ctx.digits(),
                    provenance: None,
                });
            }
        }
    }
    Ok(PointResult { records, rs_corrections: rs_corr, n_crit, hs_converged_at: hs_conv })
}

/// `e^{-R}(1 + R + R^2/3)`, `<1s_a|V|1s_a>` and `<1s_a|V|1s_b>` combined
/// into the first-order exchange correction
/// `<a|V|b> - <a|V|a> S`.
pub fn first_order_closed_form(ctx: &PrecisionContext, r: &Real) -> Real {
    let bits = ctx.bits();
    let e = ctx.exp(&Float::with_val(bits, -r));
    let mut s = Float::with_val(bits, r.square_ref()) / 3u32;
    s += r;
    s += 1u32;
    s *= &e;
    let inv = Float::with_val(bits, r.recip_ref());
    let mut vaa = Float::with_val(bits, &inv + 1u32);
    vaa *= Float::with_val(bits, e.square_ref());
    let mut vab = Float::with_val(bits, &s * &inv);
    vab -= Float::with_val(bits, r + 1u32) * &e;
    vab - vaa * s
}

/// `2 e^{-R-1} R sum_k j_k R^{-k}` with the given constants.
pub fn asymptotic_j(ctx: &PrecisionContext, r: &Real, jk: &[Real]) -> Real {
    let bits = ctx.bits();
    let inv = Float::with_val(bits, r.recip_ref());
    let mut acc = ctx.zero();
    for j in jk.iter().rev() {
        acc *= &inv;
        acc += j;
    }
    let pre = ctx.exp(&Float::with_val(bits, -Float::with_val(bits, r + 1u32)));
    acc * pre * r * 2u32
}

/// `j_0..j_7` of the large-`R` expansion of the exact `J`: `j_3 = 131/48`
/// exactly, `j_4..j_7` to the printed digits of the published table.
pub fn reference_jk(ctx: &PrecisionContext) -> Vec<Real> {
    let mut out: Vec<Real> = ["-1", "-0.5", "3.125"].iter().map(|s| ctx.parse(s).expect("literal")).collect();
    out.push(ctx.ratio(131, 48));
    out.extend(["10.2161", "37.86", "113.26", "789.2"].iter().map(|s| ctx.parse(s).expect("literal")));
    out
}
