//! Univariate polynomials and the classical orthogonal families used by the
//! basis.

use rug::Float;

use super::precision::{PrecisionContext, Real};

/// Dense univariate polynomial, `coeffs[i]` multiplies `x^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialCoeffs {
    coeffs: Vec<Real>,
}

impl PolynomialCoeffs {
    /// Trailing zero coefficients are dropped so the leading one is nonzero;
    /// the zero polynomial keeps a single zero coefficient.
    pub fn new(mut coeffs: Vec<Real>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(c: Real) -> Self {
        Self::new(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&Real> {
        self.coeffs.get(i)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Real) -> Real {
        let mut acc = Float::new(x.prec());
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(Float::new(self.coeffs[0].prec()));
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| Float::with_val(c.prec(), c * i as u32)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.coeffs[0].prec();
        let mut out = vec![Float::new(prec); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `p(c x)`
    pub fn scale_argument(&self, c: &Real) -> Self {
        let mut pow = Float::with_val(c.prec(), 1);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(Float::with_val(a.prec(), a * &pow));
            pow *= c;
        }
        Self::new(out)
    }

    /// `x^k p(x)`
    pub fn shift_up(&self, k: usize) -> Self {
        let prec = self.coeffs[0].prec();
        let mut out = vec![Float::new(prec); k];
        out.extend(self.coeffs.iter().cloned());
        Self::new(out)
    }
}

/// Generalized Laguerre polynomial `L_N^alpha(x)` (Abramowitz–Stegun
/// normalization, `L_N^alpha(0) = C(N+alpha, N)`), built from the three-term
/// recurrence
/// `(k+1) L_{k+1} = (2k + 1 + alpha - x) L_k - (k + alpha) L_{k-1}`.
pub fn laguerre_coeffs(ctx: &PrecisionContext, n: u32, alpha: u32) -> PolynomialCoeffs {
    let mut prev: Vec<Real> = vec![ctx.one()];
    if n == 0 {
        return PolynomialCoeffs::new(prev);
    }
    let mut cur: Vec<Real> = vec![ctx.int(1 + alpha as i64), ctx.int(-1)];
    for k in 1..n {
        let mut next = vec![ctx.zero(); cur.len() + 1];
        let a = (2 * k + 1 + alpha) as i64;
        let b = (k + alpha) as i64;
        for (i, c) in cur.iter().enumerate() {
            next[i] += Float::with_val(c.prec(), c * a);
            next[i + 1] -= c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= Float::with_val(c.prec(), c * b);
        }
        for x in &mut next {
            *x /= k + 1;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    PolynomialCoeffs::new(cur)
}

/// Legendre polynomial `P_M(x)` with `P_M(1) = 1`, from Bonnet's recurrence
/// `(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}`.
pub fn legendre_coeffs(ctx: &PrecisionContext, m: u32) -> PolynomialCoeffs {
    let mut prev: Vec<Real> = vec![ctx.one()];
    if m == 0 {
        return PolynomialCoeffs::new(prev);
    }
    let mut cur: Vec<Real> = vec![ctx.zero(), ctx.one()];
    for k in 1..m {
        let mut next = vec![ctx.zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += Float::with_val(c.prec(), c * (2 * k + 1));
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= Float::with_val(c.prec(), c * k);
        }
        for x in &mut next {
            *x /= k + 1;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    PolynomialCoeffs::new(cur)
}
