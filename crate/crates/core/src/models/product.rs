use std::fmt;
use std::sync::Arc;

use super::{index_from_lower, IndexKind, LowerOracle, Model};
use crate::error::{GsiError, Result};
use crate::subset::{SubsetMask, MAX_DIM};

const SQRT_12: f64 = 3.464_101_615_137_754_6;
const QUAD_POINTS: usize = 10_000;
const MOMENT_TOL: f64 = 1e-3;

/// The per-coordinate shape `g` in `mu_j + tau_j g(x_j)`.
#[derive(Clone, Default)]
pub enum BaseFunction {
    /// `g(x) = sqrt(12) (x - 1/2)`.
    #[default]
    ScaledCenteredUniform,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl BaseFunction {
    /// Accepts a user `g` only if `∫g ≈ 0`, `∫g² ≈ 1` and `∫g⁴` is finite,
    /// checked by midpoint quadrature.
    pub fn custom(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let h = 1.0 / QUAD_POINTS as f64;
        let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
        for i in 0..QUAD_POINTS {
            let v = g((i as f64 + 0.5) * h);
            m1 += v;
            m2 += v * v;
            m4 += v * v * v * v;
        }
        let (m1, m2, m4) = (m1 * h, m2 * h, m4 * h);
        if !m1.is_finite() || m1.abs() > MOMENT_TOL {
            return Err(GsiError::InvalidBaseFunction(format!("mean {m1:.3e} is not 0")));
        }
        if !m2.is_finite() || (m2 - 1.0).abs() > MOMENT_TOL {
            return Err(GsiError::InvalidBaseFunction(format!("second moment {m2:.6} is not 1")));
        }
        if !m4.is_finite() {
            return Err(GsiError::InvalidBaseFunction("fourth moment is not finite".into()));
        }
        Ok(BaseFunction::Custom(Arc::new(g)))
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            BaseFunction::ScaledCenteredUniform => SQRT_12 * (x - 0.5),
            BaseFunction::Custom(g) => g(x),
        }
    }
}

impl fmt::Debug for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseFunction::ScaledCenteredUniform => f.write_str("ScaledCenteredUniform"),
            BaseFunction::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// `f(x) = prod_j (mu_j + tau_j g(x_j))`.
#[derive(Clone, Debug)]
pub struct ProductModel {
    mu: Vec<f64>,
    tau: Vec<f64>,
    g: BaseFunction,
}

impl ProductModel {
    pub fn new(mu: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        Self::with_base(mu, tau, BaseFunction::default())
    }

    pub fn with_base(mu: Vec<f64>, tau: Vec<f64>, g: BaseFunction) -> Result<Self> {
        if mu.len() != tau.len() {
            return Err(GsiError::DimensionMismatch { left: mu.len(), right: tau.len() });
        }
        let d = mu.len();
        if d == 0 || d > MAX_DIM {
            return Err(GsiError::DimensionOutOfRange(d));
        }
        if mu.iter().chain(&tau).any(|v| !v.is_finite()) {
            return Err(GsiError::InvalidParameter("mu and tau must be finite".into()));
        }
        Ok(Self { mu, tau, g })
    }

    /// All `mu_j = 1`.
    pub fn unit_mean(tau: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0; tau.len()], tau)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn base(&self) -> &BaseFunction {
        &self.g
    }

    fn check(&self, u: SubsetMask) -> Result<()> {
        if u.dim() != self.mu.len() {
            return Err(GsiError::DimensionMismatch { left: self.mu.len(), right: u.dim() });
        }
        Ok(())
    }

    fn prod(&self, mut term: impl FnMut(usize, f64, f64) -> f64) -> f64 {
        self.mu.iter().zip(&self.tau).enumerate().map(|(j, (&m, &t))| term(j, m * m, t * t)).product()
    }

    pub fn total_variance(&self) -> f64 {
        self.prod(|_, m2, t2| m2 + t2) - self.prod(|_, m2, _| m2)
    }

    /// `sigma2_u = prod_{u} tau² prod_{-u} mu²`.
    pub fn sigma(&self, u: SubsetMask) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        Ok(self.prod(|j, m2, t2| if u.contains_bit(j) { t2 } else { m2 }))
    }

    /// `Upsilon2_w = prod_{w} tau² prod_{-w} (mu² + tau²)`; `w = ∅` gives `sigma2`.
    pub fn superset(&self, w: SubsetMask) -> Result<f64> {
        self.check(w)?;
        if w.is_empty() {
            return Ok(self.total_variance());
        }
        Ok(self.prod(|j, m2, t2| if w.contains_bit(j) { t2 } else { m2 + t2 }))
    }

    pub fn exact_index(&self, kind: IndexKind, u: SubsetMask) -> Result<f64> {
        self.check(u)?;
        match kind {
            IndexKind::Sigma => self.sigma(u),
            IndexKind::Superset => self.superset(u),
            IndexKind::TotalVariance => Ok(self.total_variance()),
            _ => index_from_lower(self, kind, u),
        }
    }
}

impl LowerOracle for ProductModel {
    fn oracle_dim(&self) -> usize {
        self.mu.len()
    }

    fn mean(&self) -> f64 {
        self.mu.iter().product()
    }

    /// `prod_{-u} mu² (prod_u (mu² + tau²) - prod_u mu²)`.
    fn lower(&self, u: SubsetMask) -> Result<f64> {
        self.check(u)?;
        let outside = self.prod(|j, m2, _| if u.contains_bit(j) { 1.0 } else { m2 });
        let inside_full = self.prod(|j, m2, t2| if u.contains_bit(j) { m2 + t2 } else { 1.0 });
        let inside_mean = self.prod(|j, m2, _| if u.contains_bit(j) { m2 } else { 1.0 });
        Ok(outside * (inside_full - inside_mean))
    }
}

impl Model for ProductModel {
    fn dim(&self) -> usize {
        self.mu.len()
    }

    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 1.0;
        for ((&xj, &m), &t) in x.iter().zip(&self.mu).zip(&self.tau) {
            acc *= m + t * self.g.apply(xj);
        }
        acc
    }
}
