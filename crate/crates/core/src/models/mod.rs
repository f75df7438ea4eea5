//! Test functions on the unit cube and their exact ANOVA quantities.

mod config;
mod grid;
mod min;
mod product;

use std::fmt;
use std::str::FromStr;

pub use config::{parse_grid_csv, ModelDoc, Numbers};
pub use grid::{brute_force_anova, brute_force_theta, AnovaTable, GridFunction, ANOVA_CAP, THETA_CAP};
pub use min::MinModel;
pub use product::{BaseFunction, ProductModel};

use crate::error::{GsiError, Result};
use crate::subset::{check_enumerable, SubsetMap, SubsetMask};

/// A square-integrable function on `[0,1]^d`.
pub trait Model: Send + Sync {
    fn dim(&self) -> usize;

    /// Evaluates without range checks. The sampler only produces points in `[0,1)^d`.
    fn value(&self, x: &[f64]) -> f64;

    /// Evaluates after checking length and range.
    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.dim())?;
        Ok(self.value(x))
    }
}

pub fn check_point(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(GsiError::WrongLength { expected: d, got: x.len() });
    }
    for (i, &v) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(GsiError::CoordinateOutOfRange { index: i + 1, value: v });
        }
    }
    Ok(())
}

/// Wraps a closure as a [`Model`].
pub struct FnModel<F> {
    d: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnModel<F> {
    pub fn new(d: usize, f: F) -> Self {
        Self { d, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Model for FnModel<F> {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Which exact quantity to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexKind {
    Mean,
    TotalVariance,
    Sigma,
    Lower,
    Upper,
    Superset,
    /// Normalized: `sum_u |u| sigma2_u / sigma2`. Ignores the set argument.
    MeanDimension,
}

impl IndexKind {
    pub const ALL: [IndexKind; 7] = [
        IndexKind::Mean,
        IndexKind::TotalVariance,
        IndexKind::Sigma,
        IndexKind::Lower,
        IndexKind::Upper,
        IndexKind::Superset,
        IndexKind::MeanDimension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Mean => "mean",
            IndexKind::TotalVariance => "total_variance",
            IndexKind::Sigma => "sigma",
            IndexKind::Lower => "lower",
            IndexKind::Upper => "upper",
            IndexKind::Superset => "superset",
            IndexKind::MeanDimension => "mean_dimension",
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndexKind {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        IndexKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GsiError::Parse(format!("unknown index kind `{s}`")))
    }
}

/// Anything that can report `mu` and lower indices exactly.
pub trait LowerOracle {
    fn oracle_dim(&self) -> usize;
    fn mean(&self) -> f64;
    fn lower(&self, u: SubsetMask) -> Result<f64>;
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Derives every [`IndexKind`] from lower indices alone, by Moebius sums.
pub fn index_from_lower(oracle: &dyn LowerOracle, kind: IndexKind, u: SubsetMask) -> Result<f64> {
    let d = oracle.oracle_dim();
    if u.dim() != d {
        return Err(GsiError::DimensionMismatch { left: d, right: u.dim() });
    }
    let full = SubsetMask::full(d)?;
    match kind {
        IndexKind::Mean => Ok(oracle.mean()),
        IndexKind::TotalVariance => oracle.lower(full),
        IndexKind::Lower => oracle.lower(u),
        IndexKind::Upper => Ok(oracle.lower(full)? - oracle.lower(u.complement())?),
        IndexKind::Sigma => {
            check_enumerable(u.cardinality().max(1))?;
            let mut acc = 0.0;
            for v in u.subsets() {
                acc += sign(u.cardinality() - v.cardinality()) * oracle.lower(v)?;
            }
            Ok(acc)
        }
        IndexKind::Superset => {
            check_enumerable(d)?;
            let rest = u.complement();
            let mut acc = 0.0;
            for v in u.subsets() {
                acc += sign(u.cardinality() - v.cardinality()) * oracle.lower(v.union(rest)?)?;
            }
            Ok(acc)
        }
        IndexKind::MeanDimension => {
            let total = oracle.lower(full)?;
            let mut acc = 0.0;
            for j in 1..=d {
                let minus_j = SubsetMask::singleton(j, d)?.complement();
                acc += total - oracle.lower(minus_j)?;
            }
            Ok(acc / total)
        }
    }
}

/// `mu` plus the lower index of every subset.
#[derive(Clone, Debug, PartialEq)]
pub struct SobolTable {
    pub d: usize,
    pub mu: f64,
    pub lower: SubsetMap,
}

impl SobolTable {
    /// Tabulates every subset from an oracle. Requires `d <= MAX_ENUM_DIM`.
    pub fn from_oracle(oracle: &dyn LowerOracle) -> Result<Self> {
        let d = oracle.oracle_dim();
        let mut lower = SubsetMap::new();
        for u in SubsetMask::all(d)? {
            lower.insert(u, oracle.lower(u)?);
        }
        Ok(Self { d, mu: oracle.mean(), lower })
    }

    pub fn total_variance(&self) -> f64 {
        SubsetMask::full(self.d).ok().and_then(|f| self.lower.get(&f).copied()).unwrap_or(0.0)
    }
}

impl LowerOracle for SobolTable {
    fn oracle_dim(&self) -> usize {
        self.d
    }

    fn mean(&self) -> f64 {
        self.mu
    }

    fn lower(&self, u: SubsetMask) -> Result<f64> {
        self.lower.get(&u).copied().ok_or(GsiError::MissingSubset(u))
    }
}

/// The models the CLI and FFI can construct.
#[derive(Clone, Debug)]
pub enum AnyModel {
    Product(ProductModel),
    Min(MinModel),
    Grid(GridFunction),
}

impl AnyModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AnyModel::Product(_) => "product",
            AnyModel::Min(_) => "min",
            AnyModel::Grid(_) => "grid",
        }
    }

    /// Closed-form index. Grid functions go through [`brute_force_anova`] instead.
    pub fn exact_index(&self, kind: IndexKind, u: SubsetMask) -> Result<f64> {
        match self {
            AnyModel::Product(p) => p.exact_index(kind, u),
            AnyModel::Min(m) => m.exact_index(kind, u),
            AnyModel::Grid(_) => Err(GsiError::Unsupported {
                model: "grid".into(),
                kind: kind.name().into(),
            }),
        }
    }

    /// An exact oracle for any model: closed forms where they exist, the
    /// brute-force ANOVA otherwise.
    pub fn oracle(&self) -> Result<Oracle<'_>> {
        Ok(match self {
            AnyModel::Product(p) => Oracle::Product(p),
            AnyModel::Min(m) => Oracle::Min(m),
            AnyModel::Grid(g) => Oracle::Table(brute_force_anova(g)?.sobol_table()?),
        })
    }
}

impl Model for AnyModel {
    fn dim(&self) -> usize {
        match self {
            AnyModel::Product(p) => p.dim(),
            AnyModel::Min(m) => m.dim(),
            AnyModel::Grid(g) => g.dim(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            AnyModel::Product(p) => p.value(x),
            AnyModel::Min(m) => m.value(x),
            AnyModel::Grid(g) => g.value(x),
        }
    }
}

/// Borrowed or tabulated exact oracle, see [`AnyModel::oracle`].
pub enum Oracle<'a> {
    Product(&'a ProductModel),
    Min(&'a MinModel),
    Table(SobolTable),
}

impl LowerOracle for Oracle<'_> {
    fn oracle_dim(&self) -> usize {
        match self {
            Oracle::Product(p) => p.oracle_dim(),
            Oracle::Min(m) => m.oracle_dim(),
            Oracle::Table(t) => t.oracle_dim(),
        }
    }

    fn mean(&self) -> f64 {
        match self {
            Oracle::Product(p) => p.mean(),
            Oracle::Min(m) => m.mean(),
            Oracle::Table(t) => t.mean(),
        }
    }

    fn lower(&self, u: SubsetMask) -> Result<f64> {
        match self {
            Oracle::Product(p) => p.lower(u),
            Oracle::Min(m) => m.lower(u),
            Oracle::Table(t) => t.lower(u),
        }
    }
}
