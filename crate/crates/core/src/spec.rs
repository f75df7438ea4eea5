//! Generalized Sobol' index specifications: sparse coefficient matrices over
//! pairs of subsets, their classification, cost and exact expectation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};
use crate::models::LowerOracle;
use crate::subset::{nxor_set, SubsetMap, SubsetMask};

/// Coefficients of a linear combination `sum_u c_u f(x_u:z_-u)`.
pub type Coeffs = SubsetMap;

/// Sparse `Omega`, keyed by `(u, v)`.
pub type Weights = BTreeMap<(SubsetMask, SubsetMask), f64>;

/// How the engine evaluates the per-pair term.
#[derive(Clone, Debug, PartialEq)]
pub enum SpecForm {
    /// `sum_uv Omega_uv F(u) F(v)`.
    General,
    /// `(sum_u lambda_u F(u)) (sum_v gamma_v F(v))`.
    Bilinear { lambda: Coeffs, gamma: Coeffs },
    /// `sum_r (sum_u lambda_ru F(u))²`. One row is a plain square.
    Squares { rows: Vec<Coeffs> },
}

/// The serialized kind tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecKind {
    General,
    Square,
    Bilinear,
}

impl SpecKind {
    pub fn name(self) -> &'static str {
        match self {
            SpecKind::General => "general",
            SpecKind::Square => "square",
            SpecKind::Bilinear => "bilinear",
        }
    }
}

/// One generalized Sobol' index: `scale * tr(Omega^T Theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GsiSpec {
    d: usize,
    scale: f64,
    weights: Weights,
    form: SpecForm,
}

const REL_TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn check_dims<'a>(d: usize, sets: impl IntoIterator<Item = &'a SubsetMask>) -> Result<()> {
    for s in sets {
        if s.dim() != d {
            return Err(GsiError::DimensionMismatch { left: d, right: s.dim() });
        }
    }
    Ok(())
}

fn prune(c: &Coeffs) -> Coeffs {
    c.iter().filter(|(_, &w)| w != 0.0).map(|(&u, &w)| (u, w)).collect()
}

fn common_dim(maps: &[&Coeffs]) -> Result<usize> {
    let first = maps
        .iter()
        .flat_map(|m| m.keys())
        .next()
        .ok_or(GsiError::EmptyCoefficients)?;
    let d = first.dim();
    for m in maps {
        check_dims(d, m.keys())?;
    }
    Ok(d)
}

fn outer(lambda: &Coeffs, gamma: &Coeffs, weights: &mut Weights) {
    for (&u, &a) in lambda {
        for (&v, &b) in gamma {
            *weights.entry((u, v)).or_insert(0.0) += a * b;
        }
    }
}

impl GsiSpec {
    /// Builds a general spec. Repeated `(u, v)` entries are summed; zeros are dropped.
    pub fn general(d: usize, entries: impl IntoIterator<Item = (SubsetMask, SubsetMask, f64)>) -> Result<Self> {
        SubsetMask::empty(d)?;
        let mut weights = Weights::new();
        for (u, v, w) in entries {
            check_dims(d, [&u, &v])?;
            if !w.is_finite() {
                return Err(GsiError::InvalidParameter(format!("coefficient at ({u},{v}) is not finite")));
            }
            *weights.entry((u, v)).or_insert(0.0) += w;
        }
        weights.retain(|_, w| *w != 0.0);
        Ok(Self { d, scale: 1.0, weights, form: SpecForm::General })
    }

    /// `Omega = lambda gamma^T`.
    pub fn bilinear(lambda: &Coeffs, gamma: &Coeffs) -> Result<Self> {
        let (lambda, gamma) = (prune(lambda), prune(gamma));
        let d = common_dim(&[&lambda, &gamma])?;
        if lambda.is_empty() || gamma.is_empty() {
            return Err(GsiError::EmptyCoefficients);
        }
        let mut weights = Weights::new();
        outer(&lambda, &gamma, &mut weights);
        Ok(Self { d, scale: 1.0, weights, form: SpecForm::Bilinear { lambda, gamma } })
    }

    /// `Omega = sum_r lambda_r lambda_r^T`.
    pub fn sum_of_squares(rows: &[Coeffs]) -> Result<Self> {
        let rows: Vec<Coeffs> = rows.iter().map(prune).filter(|r| !r.is_empty()).collect();
        let d = common_dim(&rows.iter().collect::<Vec<_>>())?;
        let mut weights = Weights::new();
        for r in &rows {
            outer(r, r, &mut weights);
        }
        weights.retain(|_, w| *w != 0.0);
        Ok(Self { d, scale: 1.0, weights, form: SpecForm::Squares { rows } })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn form(&self) -> &SpecForm {
        &self.form
    }

    pub fn kind(&self) -> SpecKind {
        match self.form {
            SpecForm::General => SpecKind::General,
            SpecForm::Bilinear { .. } => SpecKind::Bilinear,
            SpecForm::Squares { .. } => SpecKind::Square,
        }
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// `sum_uv Omega_uv`, the multiplier of `mu²` in the expectation.
    pub fn mu_sq_multiplier(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Whether the coefficients sum to zero. Small-integer weights sum exactly;
    /// other inputs get a relative tolerance of 1e-12.
    pub fn is_contrast(&self) -> bool {
        let total = self.mu_sq_multiplier();
        let mass: f64 = self.weights.values().map(|w| w.abs()).sum();
        total.abs() <= REL_TOL * mass.max(1.0)
    }

    /// All coefficients in one row or one column.
    pub fn is_simple(&self) -> bool {
        let rows: BTreeSet<_> = self.weights.keys().map(|k| k.0).collect();
        let cols: BTreeSet<_> = self.weights.keys().map(|k| k.1).collect();
        rows.len() <= 1 || cols.len() <= 1
    }

    /// A single square `lambda lambda^T`.
    pub fn is_square(&self) -> bool {
        matches!(&self.form, SpecForm::Squares { rows } if rows.len() == 1)
    }

    pub fn is_sum_of_squares(&self) -> bool {
        matches!(self.form, SpecForm::Squares { .. })
    }

    pub fn is_bilinear(&self) -> bool {
        matches!(self.form, SpecForm::Bilinear { .. }) || self.is_square()
    }

    /// Short class label for listings.
    pub fn class_label(&self) -> String {
        let mut parts = vec![match &self.form {
            SpecForm::General => "general",
            SpecForm::Bilinear { .. } if self.is_simple() => "simple",
            SpecForm::Bilinear { .. } => "bilinear",
            SpecForm::Squares { rows } if rows.len() == 1 => "square",
            SpecForm::Squares { .. } => "sum-of-squares",
        }];
        if self.is_contrast() {
            parts.push("contrast");
        }
        parts.join(" ")
    }

    pub fn row_support(&self) -> BTreeSet<SubsetMask> {
        self.weights.keys().map(|k| k.0).collect()
    }

    pub fn col_support(&self) -> BTreeSet<SubsetMask> {
        self.weights.keys().map(|k| k.1).collect()
    }

    /// Every subset whose hybrid point the spec needs, ascending.
    pub fn support(&self) -> BTreeSet<SubsetMask> {
        let mut s = self.row_support();
        s.extend(self.col_support());
        s
    }

    /// Distinct function evaluations per `(x, z)` pair.
    pub fn cost(&self) -> usize {
        self.support().len()
    }

    /// `sum_uv Omega_uv²`, excluding `scale`.
    pub fn proxy_variance(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum()
    }

    fn check_oracle(&self, oracle: &dyn LowerOracle) -> Result<()> {
        if oracle.oracle_dim() != self.d {
            return Err(GsiError::DimensionMismatch { left: self.d, right: oracle.oracle_dim() });
        }
        Ok(())
    }

    /// `scale * sum_uv Omega_uv (mu² + lower[nxor(u,v)])`, the estimand of the plug-in estimator.
    pub fn expected_value(&self, oracle: &dyn LowerOracle) -> Result<f64> {
        self.check_oracle(oracle)?;
        let mu2 = oracle.mean() * oracle.mean();
        let mut acc = 0.0;
        for (&(u, v), &w) in &self.weights {
            acc += w * (mu2 + oracle.lower(nxor_set(u, v)?)?);
        }
        Ok(self.scale * acc)
    }

    /// `scale * sum_uv Omega_uv lower[nxor(u,v)]`, the mean-corrected estimand.
    /// Equal to [`GsiSpec::expected_value`] for contrasts.
    pub fn centered_value(&self, oracle: &dyn LowerOracle) -> Result<f64> {
        self.check_oracle(oracle)?;
        let mut acc = 0.0;
        for (&(u, v), &w) in &self.weights {
            acc += w * oracle.lower(nxor_set(u, v)?)?;
        }
        Ok(self.scale * acc)
    }

    pub fn to_doc(&self) -> SpecDoc {
        let terms = self
            .weights
            .iter()
            .map(|(&(u, v), &w)| TermDoc { u: u.indices(), v: v.indices(), w })
            .collect();
        let coefs = |c: &Coeffs| c.iter().map(|(&u, &w)| CoefDoc { u: u.indices(), w }).collect::<Vec<_>>();
        let factors = match &self.form {
            SpecForm::General => None,
            SpecForm::Bilinear { lambda, gamma } => Some(vec![coefs(lambda), coefs(gamma)]),
            SpecForm::Squares { rows } => Some(rows.iter().map(coefs).collect()),
        };
        SpecDoc { d: self.d, scale: self.scale, kind: self.kind().name().to_string(), terms, factors }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("spec documents always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("spec documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SpecDoc>(text)?.build()
    }

    /// One spec or a JSON array of specs.
    pub fn many_from_json(text: &str) -> Result<Vec<Self>> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value {
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(|v| serde_json::from_value::<SpecDoc>(v)?.build())
                .collect(),
            other => Ok(vec![serde_json::from_value::<SpecDoc>(other)?.build()?]),
        }
    }

    fn same_weights(&self, other: &Weights) -> bool {
        self.weights.len() == other.len()
            && self.weights.iter().all(|(k, &w)| other.get(k).is_some_and(|&x| close(w, x)))
    }
}

impl fmt::Display for GsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} d={} scale={}", self.kind().name(), self.d, self.scale)?;
        for (&(u, v), &w) in &self.weights {
            write!(f, " {w:+}·{u}{v}")?;
        }
        Ok(())
    }
}

/// `Omega_{u,anchor} = lambda_u`: one column of coefficients.
pub fn compose_simple(anchor: SubsetMask, lambda: &Coeffs) -> Result<GsiSpec> {
    GsiSpec::bilinear(lambda, &Coeffs::from([(anchor, 1.0)]))
}

pub fn compose_bilinear(lambda: &Coeffs, gamma: &Coeffs) -> Result<GsiSpec> {
    GsiSpec::bilinear(lambda, gamma)
}

pub fn compose_square(lambda: &Coeffs) -> Result<GsiSpec> {
    GsiSpec::sum_of_squares(std::slice::from_ref(lambda))
}

/// Shared-evaluation cost of a batch: the size of the union of supports.
pub fn batch_cost(specs: &[GsiSpec]) -> Result<usize> {
    Ok(batch_support(specs)?.len())
}

pub fn batch_support(specs: &[GsiSpec]) -> Result<BTreeSet<SubsetMask>> {
    let mut all = BTreeSet::new();
    if let Some(first) = specs.first() {
        for s in specs {
            if s.d != first.d {
                return Err(GsiError::DimensionMismatch { left: first.d, right: s.d });
            }
            all.extend(s.support());
        }
    }
    Ok(all)
}

/// Serialized form of a [`GsiSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    pub d: usize,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "general")]
    pub kind: String,
    #[serde(default)]
    pub terms: Vec<TermDoc>,
    /// `[lambda, gamma]` for bilinear specs, the squared rows for square specs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<CoefDoc>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefDoc {
    pub u: Vec<usize>,
    pub w: f64,
}

fn one() -> f64 {
    1.0
}

fn general() -> String {
    "general".into()
}

impl SpecDoc {
    pub fn build(&self) -> Result<GsiSpec> {
        let d = self.d;
        if !self.scale.is_finite() {
            return Err(GsiError::Parse("scale must be finite".into()));
        }
        let mut entries = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            entries.push((SubsetMask::from_indices(&t.u, d)?, SubsetMask::from_indices(&t.v, d)?, t.w));
        }
        let plain = GsiSpec::general(d, entries)?;
        let factors = match &self.factors {
            Some(f) => Some(
                f.iter()
                    .map(|row| {
                        let mut c = Coeffs::new();
                        for e in row {
                            *c.entry(SubsetMask::from_indices(&e.u, d)?).or_insert(0.0) += e.w;
                        }
                        Ok(c)
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let built = match (self.kind.as_str(), factors) {
            ("general", None) => plain.clone(),
            ("general", Some(_)) => return Err(GsiError::Parse("general specs take no factors".into())),
            ("bilinear", Some(f)) => match f.as_slice() {
                [l, g] => GsiSpec::bilinear(l, g)?,
                _ => return Err(GsiError::Parse("bilinear factors must be [lambda, gamma]".into())),
            },
            ("bilinear", None) => {
                let (l, g) = rank_one(&plain.weights)
                    .ok_or_else(|| GsiError::Parse("bilinear terms are not rank one".into()))?;
                GsiSpec::bilinear(&l, &g)?
            }
            ("square", Some(rows)) => GsiSpec::sum_of_squares(&rows)?,
            ("square", None) => {
                let l = symmetric_rank_one(&plain.weights)
                    .ok_or_else(|| GsiError::Parse("square terms are not of the form lambda lambda^T".into()))?;
                compose_square(&l)?
            }
            (other, _) => return Err(GsiError::Parse(format!("unknown spec kind `{other}`"))),
        };
        if built.d != d {
            return Err(GsiError::DimensionMismatch { left: d, right: built.d });
        }
        // terms may be omitted when factors are given; if present they must agree
        if !(self.terms.is_empty() && self.factors.is_some()) && !built.same_weights(&plain.weights) {
            return Err(GsiError::Parse("terms disagree with factors".into()));
        }
        Ok(built.with_scale(self.scale))
    }
}

/// Factors `weights` as `lambda gamma^T` if it has rank one.
pub fn rank_one(weights: &Weights) -> Option<(Coeffs, Coeffs)> {
    let (&(u0, v0), &pivot) = weights.iter().next()?;
    let lambda: Coeffs = weights.iter().filter(|(k, _)| k.1 == v0).map(|(k, &w)| (k.0, w)).collect();
    let gamma: Coeffs = weights.iter().filter(|(k, _)| k.0 == u0).map(|(k, &w)| (k.1, w / pivot)).collect();
    let ok = weights.len() == lambda.len() * gamma.len()
        && weights.iter().all(|(&(u, v), &w)| match (lambda.get(&u), gamma.get(&v)) {
            (Some(a), Some(b)) => close(a * b, w),
            _ => false,
        });
    ok.then_some((lambda, gamma))
}

/// Factors `weights` as `lambda lambda^T` if possible.
pub fn symmetric_rank_one(weights: &Weights) -> Option<Coeffs> {
    let p = weights.keys().find(|k| k.0 == k.1)?.0;
    let diag = weights[&(p, p)];
    if diag <= 0.0 {
        return None;
    }
    let root = diag.sqrt();
    let lambda: Coeffs = weights.iter().filter(|(k, _)| k.1 == p).map(|(k, &w)| (k.0, w / root)).collect();
    let ok = weights.len() == lambda.len() * lambda.len()
        && weights.iter().all(|(&(u, v), &w)| match (lambda.get(&u), lambda.get(&v)) {
            (Some(a), Some(b)) => close(a * b, w),
            _ => false,
        });
    ok.then_some(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LowerOracle, ProductModel, SobolTable};

    fn s(ix: &[usize], d: usize) -> SubsetMask {
        SubsetMask::from_indices(ix, d).unwrap()
    }

    fn coeffs(items: &[(&[usize], f64)], d: usize) -> Coeffs {
        items.iter().map(|(ix, w)| (s(ix, d), *w)).collect()
    }

    #[test]
    fn empty_spec_is_a_contrast() {
        let e = GsiSpec::general(3, []).unwrap();
        assert!(e.is_contrast());
        assert_eq!(e.cost(), 0);
        assert_eq!(e.proxy_variance(), 0.0);
    }

    #[test]
    fn general_merges_and_prunes() {
        let d = 3;
        let full = SubsetMask::full(d).unwrap();
        let spec = GsiSpec::general(d, [(full, s(&[1], d), 1.0), (full, s(&[1], d), -1.0), (full, full, 2.0)]).unwrap();
        assert_eq!(spec.nnz(), 1);
        assert!(GsiSpec::general(d, [(full, s(&[1], 4), 1.0)]).is_err());
    }

    #[test]
    fn bilinear_factors() {
        let d = 5;
        let w_c = s(&[4, 5], d);
        let lambda = coeffs(&[(&[], 1.0), (&[1], -1.0)], d);
        let gamma: Coeffs = [(&[][..], 1.0), (&[2][..], -1.0), (&[3][..], -1.0), (&[2, 3][..], 1.0)]
            .iter()
            .map(|(ix, w)| (s(ix, d).union(w_c).unwrap(), *w))
            .collect();
        let spec = compose_bilinear(&lambda, &gamma).unwrap();
        assert_eq!(spec.nnz(), 8);
        assert_eq!(spec.cost(), 6);
        assert_eq!(spec.proxy_variance(), 8.0);
        let (l, g) = rank_one(spec.weights()).unwrap();
        assert_eq!(l.len() * g.len(), 8);
    }

    #[test]
    fn unit_outer_product() {
        let full = SubsetMask::full(3).unwrap();
        let unit = Coeffs::from([(full, 1.0)]);
        let spec = compose_bilinear(&unit, &unit).unwrap();
        assert_eq!(spec.weights().len(), 1);
        assert_eq!(spec.weights()[&(full, full)], 1.0);
        assert!(compose_bilinear(&Coeffs::new(), &unit).is_err());
    }

    #[test]
    fn square_of_single_entry() {
        let m = ProductModel::unit_mean(vec![1.0, 0.5]).unwrap();
        let full = SubsetMask::full(2).unwrap();
        let spec = compose_square(&Coeffs::from([(full, 3.0)])).unwrap();
        let want = 9.0 * (1.0 + m.lower(full).unwrap());
        assert!((spec.expected_value(&m).unwrap() - want).abs() < 1e-12);
        assert!(spec.is_square());
    }

    #[test]
    fn upper_index_square() {
        let m = ProductModel::unit_mean(vec![1.0, 0.5, 0.25]).unwrap();
        let d = 3;
        let u = s(&[1, 3], d);
        let lam = Coeffs::from([(SubsetMask::full(d).unwrap(), 1.0), (u.complement(), -1.0)]);
        let spec = compose_square(&lam).unwrap().with_scale(0.5);
        let want = m.lower(SubsetMask::full(d).unwrap()).unwrap() - m.lower(u.complement()).unwrap();
        assert!((spec.expected_value(&m).unwrap() - want).abs() < 1e-12);
        assert!(spec.is_contrast());
    }

    #[test]
    fn simple_orientation() {
        let d = 3;
        let spec = compose_simple(SubsetMask::empty(d).unwrap(), &coeffs(&[(&[1], 2.0), (&[2], 3.0)], d)).unwrap();
        assert!(spec.is_simple());
        assert_eq!(spec.weights()[&(s(&[1], d), s(&[], d))], 2.0);
        let single = compose_simple(s(&[1], d), &coeffs(&[(&[2], 1.0)], d)).unwrap();
        assert!(single.cost() <= 2);
        assert!(rank_one(single.weights()).is_some());
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let d = 5;
        let spec = compose_square(&coeffs(&[(&[1, 2, 3, 4, 5], 1.0), (&[2], -1.0)], d)).unwrap().with_scale(0.5);
        let text = spec.to_json();
        assert_eq!(GsiSpec::from_json(&text).unwrap(), spec);
        let bad = r#"{"d":5,"kind":"general","terms":[{"u":[7],"v":[],"w":1.0}]}"#;
        assert!(GsiSpec::from_json(bad).is_err());
        let not_rank_one = r#"{"d":2,"kind":"bilinear","terms":[{"u":[1],"v":[1],"w":1.0},{"u":[2],"v":[2],"w":1.0}]}"#;
        assert!(GsiSpec::from_json(not_rank_one).is_err());
        let factored = r#"{"d":2,"kind":"bilinear","terms":[{"u":[1],"v":[2],"w":2.0}]}"#;
        let b = GsiSpec::from_json(factored).unwrap();
        assert!(b.is_bilinear());
        let square = r#"{"d":2,"kind":"square","terms":[{"u":[1],"v":[1],"w":4.0},{"u":[1],"v":[],"w":-2.0},{"u":[],"v":[1],"w":-2.0},{"u":[],"v":[],"w":1.0}]}"#;
        let sq = GsiSpec::from_json(square).unwrap();
        assert!(sq.is_square() && sq.is_contrast() == false);
        let clash = r#"{"d":2,"kind":"bilinear","terms":[{"u":[1],"v":[2],"w":3.0}],"factors":[[{"u":[1],"w":1.0}],[{"u":[2],"w":2.0}]]}"#;
        assert!(GsiSpec::from_json(clash).is_err());
        assert!(GsiSpec::from_json(r#"{"d":2,"kind":"cubic","terms":[]}"#).is_err());
        let many = GsiSpec::many_from_json(&format!("[{text},{text}]")).unwrap();
        assert_eq!(many.len(), 2);
    }

    #[test]
    fn expected_value_needs_table_entries() {
        let d = 2;
        let full = SubsetMask::full(d).unwrap();
        let spec = GsiSpec::general(d, [(full, s(&[1], d), 1.0)]).unwrap();
        let table = SobolTable { d, mu: 1.0, lower: SubsetMap::new() };
        assert!(matches!(spec.expected_value(&table), Err(GsiError::MissingSubset(_))));
    }

    #[test]
    fn batch_cost_unions() {
        let d = 4;
        let full = SubsetMask::full(d).unwrap();
        let a = GsiSpec::general(d, [(full, s(&[1], d), 1.0)]).unwrap();
        let b = GsiSpec::general(d, [(s(&[2], d), s(&[3], d), 1.0)]).unwrap();
        assert_eq!(batch_cost(&[a.clone()]).unwrap(), a.cost());
        assert_eq!(batch_cost(&[a.clone(), b.clone()]).unwrap(), 4);
        assert_eq!(batch_cost(&[a.clone(), a.clone()]).unwrap(), 2);
        let c = GsiSpec::general(3, []).unwrap();
        assert!(batch_cost(&[a, c]).is_err());
    }
}
