//! Least-squares extraction of the large-`R` constants.
//!
//! Values are scaled as `f(R) = J(R) e^{R+1} / (2R)` and fitted by
//! `f(R) = sum_{k<=L} j_k R^{-k}`. The relative difference of two exchange
//! energies, `J_RS/J_HS - 1`, is fitted by `sum_k w_k R^{-k}` from `k = 4`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpkernel::{least_squares, to_scientific, DenseMatrix, DenseVector, PrecisionContext, Real};

/// Smallest distance accepted by the fits.
pub const MIN_DISTANCE: f64 = 5.0;

/// `J e^{R+1} / (2R)`
pub fn scale_j(ctx: &PrecisionContext, r: f64, j: &Real) -> Real {
    let rr = ctx.f64(r);
    let e = ctx.exp(&Float::with_val(ctx.bits(), &rr + 1u32));
    Float::with_val(ctx.bits(), j * &e) / Float::with_val(ctx.bits(), &rr * 2u32)
}

/// Inverse of [`scale_j`].
pub fn unscale_j(ctx: &PrecisionContext, r: f64, f: &Real) -> Real {
    let rr = ctx.f64(r);
    let e = ctx.exp(&Float::with_val(ctx.bits(), -(Float::with_val(ctx.bits(), &rr + 1u32))));
    Float::with_val(ctx.bits(), f * &e) * Float::with_val(ctx.bits(), &rr * 2u32)
}

/// `sum_k c_k R^{-(k + first)}`
pub fn eval_inverse_powers(ctx: &PrecisionContext, coeffs: &[Real], first: i32, r: f64) -> Real {
    let inv = Float::with_val(ctx.bits(), ctx.f64(r).recip_ref());
    let mut acc = ctx.zero();
    for c in coeffs.iter().rev() {
        acc *= &inv;
        acc += c;
    }
    acc * ctx.powi(&inv, first)
}

#[derive(Clone, Debug)]
pub struct FitInput {
    /// `(R, J)` on the training grid, unscaled.
    pub train: Vec<(f64, Real)>,
    /// Held-out `(R, J)` used only to judge the fit.
    pub test: Vec<(f64, Real)>,
    pub degree: usize,
}

impl FitInput {
    pub fn new(train: Vec<(f64, Real)>, test: Vec<(f64, Real)>, degree: usize) -> Result<Self> {
        let input = Self { train, test, degree };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((r, _)) = self.train.iter().chain(&self.test).find(|(r, _)| *r < MIN_DISTANCE) {
            return Err(Error::Domain(format!("R = {r} below {MIN_DISTANCE}")));
        }
        if let Some((r, _)) = self.test.iter().find(|(rt, _)| self.train.iter().any(|(r, _)| r == rt)) {
            return Err(Error::Invalid(format!("R = {r} is in both training and test grids")));
        }
        if self.train.len() < self.degree + 5 {
            return Err(Error::Invalid(format!(
                "{} training points for degree {} (need at least {})",
                self.train.len(),
                self.degree,
                self.degree + 5
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub degree: usize,
    /// `j_0..j_L`
    pub j: Vec<Real>,
    pub train_r: Vec<f64>,
    pub test_r: Vec<f64>,
    /// Largest absolute residual of the scaled training values.
    pub train_residual: Real,
    /// `|model - f| / |f|` at each test point.
    pub test_residuals: Vec<f64>,
    pub condition: f64,
}

impl FitResult {
    pub fn max_test_residual(&self) -> f64 {
        self.test_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Scaled model `sum_k j_k R^{-k}`.
    pub fn model(&self, ctx: &PrecisionContext, r: f64) -> Real {
        eval_inverse_powers(ctx, &self.j, 0, r)
    }

    pub fn summary(&self, method: &str, formula: &str, digits: u32) -> FitSummary {
        FitSummary {
            method: method.to_string(),
            formula: formula.to_string(),
            l: self.degree,
            j: self.j.iter().map(|x| to_scientific(x, digits)).collect(),
            test_residuals: self.test_residuals.clone(),
            train_residual: to_scientific(&self.train_residual, 6),
            condition: self.condition,
            grid: FitGrid { train: self.train_r.clone(), test: self.test_r.clone() },
        }
    }
}

/// JSON form of a [`FitResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub method: String,
    pub formula: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub j: Vec<String>,
    pub test_residuals: Vec<f64>,
    pub train_residual: String,
    pub condition: f64,
    pub grid: FitGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitGrid {
    pub train: Vec<f64>,
    pub test: Vec<f64>,
}

fn design(ctx: &PrecisionContext, rs: &[f64], first: i32, ncols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rs.len(), ncols, |i, k| ctx.powi(&ctx.f64(rs[i]), -(first + k as i32)))
}

fn relative(ctx: &PrecisionContext, model: &Real, value: &Real) -> f64 {
    let d = Float::with_val(ctx.bits(), model - value);
    if value.is_zero() {
        return d.abs().to_f64();
    }
    (d / value).abs().to_f64()
}

pub fn fit_jk(ctx: &PrecisionContext, input: &FitInput) -> Result<FitResult> {
    input.validate()?;
    let train_r: Vec<f64> = input.train.iter().map(|(r, _)| *r).collect();
    let test_r: Vec<f64> = input.test.iter().map(|(r, _)| *r).collect();
    let a = design(ctx, &train_r, 0, input.degree + 1);
    let b = DenseVector(input.train.iter().map(|(r, j)| scale_j(ctx, *r, j)).collect());
    let ls = least_squares(ctx, &a, &b)?;
    let train_residual = ls.residual.max_abs();
    let j = ls.x.0;
    let test_residuals = input
        .test
        .iter()
        .map(|(r, jv)| relative(ctx, &eval_inverse_powers(ctx, &j, 0, *r), &scale_j(ctx, *r, jv)))
        .collect();
    Ok(FitResult { degree: input.degree, j, train_r, test_r, train_residual, test_residuals, condition: ls.condition })
}

/// Degree with the smallest maximum relative test residual.
///
/// Residuals below `10^(15-digits)` count as equal, so among fits that all
/// reproduce the test set to working precision the lowest degree wins.
/// Degrees that cannot be fitted are skipped.
pub fn select_degree(ctx: &PrecisionContext, candidates: &[usize], train: &[(f64, Real)], test: &[(f64, Real)]) -> Result<usize> {
    if candidates.len() < 2 {
        return Err(Error::Invalid("degree selection needs at least two candidates".into()));
    }
    if test.is_empty() {
        return Err(Error::Invalid("degree selection needs test points".into()));
    }
    let floor = ctx.tolerance(15).to_f64();
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(usize, f64)> = None;
    for &l in &sorted {
        let Ok(input) = FitInput::new(train.to_vec(), test.to_vec(), l) else { continue };
        let Ok(fit) = fit_jk(ctx, &input) else { continue };
        let res = fit.max_test_residual().max(floor);
        if best.is_none_or(|(_, b)| res < b) {
            best = Some((l, res));
        }
    }
    best.map(|(l, _)| l).ok_or_else(|| Error::Invalid("no candidate degree could be fitted".into()))
}

/// Coefficients `w_k`, `k = 4..4+count`, of `J_RS/J_HS - 1`.
#[derive(Clone, Debug)]
pub struct WkFit {
    pub first_power: i32,
    pub w: Vec<Real>,
    pub residual: Real,
    pub condition: f64,
}

/// `points` holds `(R, J_RS, J_HS)`.
pub fn fit_wk(ctx: &PrecisionContext, points: &[(f64, Real, Real)], count: usize) -> Result<WkFit> {
    if count == 0 {
        return Err(Error::Invalid("need at least one w_k".into()));
    }
    if points.len() < count + 5 {
        return Err(Error::Invalid(format!("{} points for {count} coefficients", points.len())));
    }
    if let Some((r, ..)) = points.iter().find(|(r, ..)| *r < MIN_DISTANCE) {
        return Err(Error::Domain(format!("R = {r} below {MIN_DISTANCE}")));
    }
    let rs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let first = 4;
    let a = design(ctx, &rs, first, count);
    let mut y = Vec::with_capacity(points.len());
    for (r, rs_j, hs_j) in points {
        if hs_j.is_zero() {
            return Err(Error::Singularity(*r));
        }
        y.push(Float::with_val(ctx.bits(), rs_j / hs_j) - 1u32);
    }
    let ls = least_squares(ctx, &a, &DenseVector(y))?;
    Ok(WkFit { first_power: first, residual: ls.residual.max_abs(), w: ls.x.0, condition: ls.condition })
}
