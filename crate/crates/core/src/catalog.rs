//! Named estimators and the spec builders behind them.

use crate::error::{GsiError, Result};
use crate::spec::{compose_simple, Coeffs, GsiSpec};
use crate::subset::SubsetMask;

/// A built spec with a short label such as `upper[1,2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedSpec {
    pub label: String,
    pub spec: GsiSpec,
}

impl NamedSpec {
    fn new(label: impl Into<String>, spec: GsiSpec) -> Self {
        Self { label: label.into(), spec }
    }
}

/// Parameters a catalog entry may read. Sets must have dimension `d`.
#[derive(Clone, Debug, Default)]
pub struct Params {
    pub d: usize,
    pub u: Option<SubsetMask>,
    pub w: Option<SubsetMask>,
    pub w1: Option<SubsetMask>,
    /// Adds the pairwise lower indices to `saltelli_first_second`.
    pub extended: bool,
}

impl Params {
    pub fn new(d: usize) -> Self {
        Self { d, ..Self::default() }
    }

    pub fn with_u(mut self, u: SubsetMask) -> Self {
        self.u = Some(u);
        self
    }

    pub fn with_w(mut self, w: SubsetMask) -> Self {
        self.w = Some(w);
        self
    }

    pub fn with_w1(mut self, w1: SubsetMask) -> Self {
        self.w1 = Some(w1);
        self
    }

    pub fn with_extended(mut self, extended: bool) -> Self {
        self.extended = extended;
        self
    }

    fn set(&self, s: Option<SubsetMask>, name: &str) -> Result<SubsetMask> {
        let s = s.ok_or_else(|| GsiError::InvalidParameter(format!("missing parameter {name}")))?;
        if s.dim() != self.d {
            return Err(GsiError::DimensionMismatch { left: self.d, right: s.dim() });
        }
        Ok(s)
    }
}

/// One row of the catalog listing.
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub target: &'static str,
    pub cost: &'static str,
    pub class: &'static str,
    pub identity: &'static str,
    pub batch: bool,
    build: fn(&Params) -> Result<Vec<NamedSpec>>,
}

impl CatalogEntry {
    pub fn build(&self, p: &Params) -> Result<Vec<NamedSpec>> {
        SubsetMask::empty(p.d)?;
        (self.build)(p)
    }
}

fn one(label: &str, spec: Result<GsiSpec>) -> Result<Vec<NamedSpec>> {
    Ok(vec![NamedSpec::new(label, spec?)])
}

static CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "lower_index",
        params: "u",
        target: "τ̲²_u (mean-corrected)",
        cost: "2",
        class: "simple",
        identity: "Θ_{D,u} = μ² + τ̲²_u",
        batch: false,
        build: |p| one("lower", lower_index(p.set(p.u, "u")?)),
    },
    CatalogEntry {
        name: "upper_index",
        params: "u",
        target: "τ̄²_u",
        cost: "2",
        class: "square contrast",
        identity: "½(f(x) − f(x_{−u}:z_u))²",
        batch: false,
        build: |p| one("upper", upper_index(p.set(p.u, "u")?)),
    },
    CatalogEntry {
        name: "mauntz_lower",
        params: "u",
        target: "τ̲²_u",
        cost: "3",
        class: "bilinear contrast",
        identity: "f(x)(f(x_u:z_{−u}) − f(z))",
        batch: false,
        build: |p| one("mauntz", mauntz_lower(p.set(p.u, "u")?)),
    },
    CatalogEntry {
        name: "variance_component_simple",
        params: "w",
        target: "σ²_w",
        cost: "2^|w| + 1",
        class: "simple contrast",
        identity: "f(z) Σ_{v⊆w} (−1)^{|w−v|} f(x_{−v}:z_v)",
        batch: false,
        build: |p| one("simple", variance_component_simple(p.set(p.w, "w")?)),
    },
    CatalogEntry {
        name: "variance_component_bilinear",
        params: "w, w1 (default: first ⌊|w|/2⌋ of w)",
        target: "σ²_w",
        cost: "2^|w1| + 2^|w2|",
        class: "bilinear contrast",
        identity: "Σ_{u1⊆w1} Σ_{u2⊆w2} (−1)^{|u1|+|u2|} Θ_{u1, u2+w^c}",
        batch: false,
        build: |p| one("bilinear", variance_component_bilinear(p.set(p.w, "w")?, p.w1)),
    },
    CatalogEntry {
        name: "superset_square",
        params: "w",
        target: "Υ²_w",
        cost: "2^|w|",
        class: "square contrast",
        identity: "2^{−|w|} (Σ_{v⊆w} (−1)^{|w−v|} f(x_v:z_{−v}))²",
        batch: false,
        build: |p| one("square", superset_square(p.set(p.w, "w")?)),
    },
    CatalogEntry {
        name: "superset_bilinear",
        params: "w, w1 (default: first ⌊|w|/2⌋ of w)",
        target: "Υ²_w",
        cost: "2^|w1| + 2^|w2| − 1",
        class: "bilinear contrast",
        identity: "Σ_{u1⊆w1} Σ_{u2⊆w2} (−1)^{|u1|+|u2|} Θ_{w^c+u1, w^c+u2}",
        batch: false,
        build: |p| one("bilinear", superset_bilinear(p.set(p.w, "w")?, p.w1)),
    },
    CatalogEntry {
        name: "mean_dimension",
        params: "d",
        target: "Σ_u |u| σ²_u",
        cost: "d+1",
        class: "sum-of-squares contrast",
        identity: "½ Σ_j (f(x) − f(x_{−j}:z_j))²",
        batch: false,
        build: |p| one("mean_dimension", mean_dimension(p.d)),
    },
    CatalogEntry {
        name: "first_order_total",
        params: "d",
        target: "Σ_{|u|=1} σ²_u",
        cost: "d+2",
        class: "simple contrast",
        identity: "f(z)(Σ_j f(x_{−j}:z_j) − d f(x))",
        batch: false,
        build: |p| one("first_order_total", first_order_total(p.d)),
    },
    CatalogEntry {
        name: "second_order_total",
        params: "d",
        target: "Σ_{|u|=2} σ²_u",
        cost: "2d+2",
        class: "bilinear contrast",
        identity: "½ λ^T Θ γ, λ = 1_{|u|=1} − d 1_{u=∅}, γ = 1_{|v|=d−1} − (d−2) 1_{v=D}",
        batch: false,
        build: |p| one("second_order_total", second_order_total(p.d)),
    },
    CatalogEntry {
        name: "mean_square_dimension",
        params: "d",
        target: "Σ_u |u|² σ²_u",
        cost: "d+1",
        class: "bilinear contrast",
        identity: "λ^T Θ γ, λ = 1_{|u|=1} − d 1_{u=∅}, γ = 1_{|v|=1} − (d−1) 1_{v=∅}",
        batch: false,
        build: |p| one("mean_square_dimension", mean_square_dimension(p.d)),
    },
    CatalogEntry {
        name: "trunc_tail_weight",
        params: "d",
        target: "Σ_u (d − ⌈u⌉) σ²_u",
        cost: "d+1",
        class: "simple contrast",
        identity: "Σ_{j<d} (Θ_{(0,j],D} − Θ_{∅,D})",
        batch: false,
        build: |p| one("trunc_tail_weight", trunc_tail_weight(p.d)),
    },
    CatalogEntry {
        name: "trunc_head_weight",
        params: "d",
        target: "Σ_u (⌊u⌋ − 1) σ²_u",
        cost: "d+1",
        class: "simple contrast",
        identity: "Σ_{j<d} (Θ_{(j,d],D} − Θ_{∅,D})",
        batch: false,
        build: |p| one("trunc_head_weight", trunc_head_weight(p.d)),
    },
    CatalogEntry {
        name: "index_spread",
        params: "d",
        target: "Σ_u (⌈u⌉ − ⌊u⌋) σ²_u",
        cost: "2d",
        class: "simple contrast",
        identity: "Σ_{j<d} (Θ_{D,D} − Θ_{(0,j],D} − Θ_{(j,d],D} + Θ_{∅,D})",
        batch: false,
        build: |p| one("index_spread", index_spread(p.d)),
    },
    CatalogEntry {
        name: "segment_pairs",
        params: "d",
        target: "Σ_u ⌊u⌋ (d − ⌈u⌉ + 1) σ²_u (mean-corrected)",
        cost: "2d−1",
        class: "general",
        identity: "Σ_{0≤j<k≤d} Θ_{(0,j],(k,d]} − d(d+1)/2 μ²",
        batch: false,
        build: |p| one("segment_pairs", segment_pairs(p.d)),
    },
    CatalogEntry {
        name: "saltelli_first_second",
        params: "d, extended",
        target: "all τ̲²_j, τ̄²_j, τ̄²_{jk} (and τ̲²_{jk} if extended)",
        cost: "d+2 (2d+2 extended)",
        class: "batch",
        identity: "supports ∅, D, −j (plus {j} if extended)",
        batch: true,
        build: |p| saltelli_first_second(p.d, p.extended),
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}

pub fn find(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

/// Builds a catalog entry by name.
pub fn build(name: &str, params: &Params) -> Result<Vec<NamedSpec>> {
    find(name).ok_or_else(|| GsiError::UnknownEstimator(name.to_string()))?.build(params)
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn nonempty(s: SubsetMask, what: &'static str) -> Result<()> {
    if s.is_empty() {
        return Err(GsiError::EmptySet(what));
    }
    Ok(())
}

fn need_dim(d: usize, min: usize) -> Result<()> {
    SubsetMask::empty(d)?;
    if d < min {
        return Err(GsiError::InvalidParameter(format!("needs d >= {min}, got {d}")));
    }
    Ok(())
}

fn full(d: usize) -> SubsetMask {
    SubsetMask::full(d).expect("dimension already validated")
}

fn empty(d: usize) -> SubsetMask {
    SubsetMask::empty(d).expect("dimension already validated")
}

fn single(j: usize, d: usize) -> SubsetMask {
    SubsetMask::singleton(j, d).expect("index already validated")
}

fn segment_head(j: usize, d: usize) -> SubsetMask {
    SubsetMask::prefix(j, d).expect("segment already validated")
}

fn segment_tail(j: usize, d: usize) -> SubsetMask {
    SubsetMask::suffix(j, d).expect("segment already validated")
}

/// Default split: the `⌊|w|/2⌋` smallest indices of `w`.
pub fn default_split(w: SubsetMask) -> SubsetMask {
    let ix = w.indices();
    SubsetMask::from_indices(&ix[..ix.len() / 2], w.dim()).expect("subset of a valid mask")
}

fn split(w: SubsetMask, w1: Option<SubsetMask>) -> Result<(SubsetMask, SubsetMask)> {
    let w1 = w1.unwrap_or_else(|| default_split(w));
    if !w1.is_subset_of(w) {
        return Err(GsiError::InvalidSplit { w, w1 });
    }
    Ok((w1, w.difference(w1)?))
}

/// `Omega_{D,u} = 1`: raw `E f(x) f(x_u:z_-u) = mu² + lower_u`.
pub fn lower_index(u: SubsetMask) -> Result<GsiSpec> {
    GsiSpec::general(u.dim(), [(full(u.dim()), u, 1.0)])
}

/// `½ (f(x) − f(x_-u:z_u))²`.
pub fn upper_index(u: SubsetMask) -> Result<GsiSpec> {
    nonempty(u, "upper_index")?;
    let lam = Coeffs::from([(full(u.dim()), 1.0), (u.complement(), -1.0)]);
    Ok(crate::spec::compose_square(&lam)?.with_scale(0.5))
}

/// `f(x) (f(x_u:z_-u) − f(z))`.
pub fn mauntz_lower(u: SubsetMask) -> Result<GsiSpec> {
    nonempty(u, "mauntz_lower")?;
    let d = u.dim();
    GsiSpec::bilinear(&Coeffs::from([(full(d), 1.0)]), &Coeffs::from([(u, 1.0), (empty(d), -1.0)]))
}

/// Simple estimator of `sigma2_w` anchored on `f(z)`:
/// `Omega_{-v, ∅} = (−1)^{|w−v|}` for `v ⊆ w`.
pub fn variance_component_simple(w: SubsetMask) -> Result<GsiSpec> {
    nonempty(w, "variance_component_simple")?;
    let lam: Coeffs = w.subsets().map(|v| (v.complement(), sign(w.cardinality() - v.cardinality()))).collect();
    compose_simple(empty(w.dim()), &lam)
}

/// The same estimand anchored on `f(x)`: `Omega_{D, v} = (−1)^{|w−v|}`.
pub fn variance_component_simple_fx(w: SubsetMask) -> Result<GsiSpec> {
    nonempty(w, "variance_component_simple_fx")?;
    let gam: Coeffs = w.subsets().map(|v| (v, sign(w.cardinality() - v.cardinality()))).collect();
    GsiSpec::bilinear(&Coeffs::from([(full(w.dim()), 1.0)]), &gam)
}

/// Bilinear estimator of `sigma2_w` with `w = w1 + w2`:
/// `lambda_{u1} = (−1)^{|u1|}`, `gamma_{u2 + w^c} = (−1)^{|u2|}`.
pub fn variance_component_bilinear(w: SubsetMask, w1: Option<SubsetMask>) -> Result<GsiSpec> {
    nonempty(w, "variance_component_bilinear")?;
    let (w1, w2) = split(w, w1)?;
    let rest = w.complement();
    let lam: Coeffs = w1.subsets().map(|u1| (u1, sign(u1.cardinality()))).collect();
    let gam: Coeffs = w2.subsets().map(|u2| (u2.union(rest).expect("same d"), sign(u2.cardinality()))).collect();
    GsiSpec::bilinear(&lam, &gam)
}

/// `2^{-|w|} (sum_{v ⊆ w} (−1)^{|w−v|} f(x_v:z_-v))²`.
pub fn superset_square(w: SubsetMask) -> Result<GsiSpec> {
    nonempty(w, "superset_square")?;
    let lam: Coeffs = w.subsets().map(|v| (v, sign(w.cardinality() - v.cardinality()))).collect();
    Ok(crate::spec::compose_square(&lam)?.with_scale(0.5f64.powi(w.cardinality() as i32)))
}

/// `lambda_{w^c+u1} = (−1)^{|u1|}`, `gamma_{w^c+u2} = (−1)^{|u2|}`.
pub fn superset_bilinear(w: SubsetMask, w1: Option<SubsetMask>) -> Result<GsiSpec> {
    nonempty(w, "superset_bilinear")?;
    let (w1, w2) = split(w, w1)?;
    let rest = w.complement();
    let side = |part: SubsetMask| -> Coeffs {
        part.subsets().map(|s| (s.union(rest).expect("same d"), sign(s.cardinality()))).collect()
    };
    GsiSpec::bilinear(&side(w1), &side(w2))
}

/// `½ sum_j (f(x) − f(x_-j:z_j))²`, expectation `sum_u |u| sigma2_u`.
pub fn mean_dimension(d: usize) -> Result<GsiSpec> {
    need_dim(d, 1)?;
    let rows: Vec<Coeffs> =
        (1..=d).map(|j| Coeffs::from([(full(d), 1.0), (single(j, d).complement(), -1.0)])).collect();
    Ok(GsiSpec::sum_of_squares(&rows)?.with_scale(0.5))
}

/// `f(z) (sum_j f(x_-j:z_j) − d f(x))`, expectation `sum_{|u|=1} sigma2_u`.
pub fn first_order_total(d: usize) -> Result<GsiSpec> {
    need_dim(d, 1)?;
    let mut lam: Coeffs = (1..=d).map(|j| (single(j, d).complement(), 1.0)).collect();
    *lam.entry(full(d)).or_insert(0.0) -= d as f64;
    compose_simple(empty(d), &lam)
}

/// Half of `lambda^T Theta gamma` with `lambda = 1_{|u|=1} − d 1_{u=∅}` and
/// `gamma = 1_{|v|=d−1} − (d−2) 1_{v=D}`; expectation `sum_{|u|=2} sigma2_u`.
pub fn second_order_total(d: usize) -> Result<GsiSpec> {
    need_dim(d, 2)?;
    let mut lam: Coeffs = (1..=d).map(|j| (single(j, d), 1.0)).collect();
    lam.insert(empty(d), -(d as f64));
    let mut gam: Coeffs = (1..=d).map(|k| (single(k, d).complement(), 1.0)).collect();
    *gam.entry(full(d)).or_insert(0.0) -= d as f64 - 2.0;
    Ok(GsiSpec::bilinear(&lam, &gam)?.with_scale(0.5))
}

/// `lambda^T Theta gamma` with `lambda = 1_{|u|=1} − d 1_{u=∅}` and
/// `gamma = 1_{|v|=1} − (d−1) 1_{v=∅}`; expectation `sum_u |u|² sigma2_u`.
/// With `−(d−2)` and a factor ½ the expectation would be `sum_u C(|u|,2) sigma2_u`.
pub fn mean_square_dimension(d: usize) -> Result<GsiSpec> {
    need_dim(d, 1)?;
    let singles = || (1..=d).map(|j| (single(j, d), 1.0));
    let mut lam: Coeffs = singles().collect();
    lam.insert(empty(d), -(d as f64));
    let mut gam: Coeffs = singles().collect();
    gam.insert(empty(d), -(d as f64 - 1.0));
    GsiSpec::bilinear(&lam, &gam)
}

fn segment_contrast(d: usize, seg: fn(usize, usize) -> SubsetMask) -> Result<GsiSpec> {
    need_dim(d, 2)?;
    let mut lam: Coeffs = (1..d).map(|j| (seg(j, d), 1.0)).collect();
    *lam.entry(empty(d)).or_insert(0.0) -= (d - 1) as f64;
    compose_simple(full(d), &lam)
}

/// `sum_{j<d} (Theta_{(0,j],D} − Theta_{∅,D})`, expectation `sum_u (d − ⌈u⌉) sigma2_u`.
pub fn trunc_tail_weight(d: usize) -> Result<GsiSpec> {
    segment_contrast(d, segment_head)
}

/// `sum_{j<d} (Theta_{(j,d],D} − Theta_{∅,D})`, expectation `sum_u (⌊u⌋ − 1) sigma2_u`.
pub fn trunc_head_weight(d: usize) -> Result<GsiSpec> {
    segment_contrast(d, segment_tail)
}

/// `sum_{j<d} (Theta_{D,D} − Theta_{(0,j],D} − Theta_{(j,d],D} + Theta_{∅,D})`,
/// expectation `sum_u (⌈u⌉ − ⌊u⌋) sigma2_u`.
pub fn index_spread(d: usize) -> Result<GsiSpec> {
    need_dim(d, 2)?;
    let mut lam = Coeffs::new();
    for j in 1..d {
        for (set, w) in [(full(d), 1.0), (segment_head(j, d), -1.0), (segment_tail(j, d), -1.0), (empty(d), 1.0)] {
            *lam.entry(set).or_insert(0.0) += w;
        }
    }
    compose_simple(full(d), &lam)
}

/// `sum_{0≤j<k≤d} Theta_{(0,j],(k,d]}`. Not a contrast: the `mu²`
/// multiplier is `d(d+1)/2`; mean-corrected it estimates
/// `sum_u ⌊u⌋ (d − ⌈u⌉ + 1) sigma2_u`.
pub fn segment_pairs(d: usize) -> Result<GsiSpec> {
    need_dim(d, 1)?;
    let mut entries = Vec::new();
    for j in 0..d {
        for k in j + 1..=d {
            entries.push((segment_head(j, d), segment_tail(k, d), 1.0));
        }
    }
    GsiSpec::general(d, entries)
}

/// All `lower_j`, `upper_j`, `upper_{jk}` from the `d+2` hybrid points
/// `∅, D, -j`; with `extended`, all `lower_{jk}` from `Theta_{{j},-k}` and
/// `Theta_{{k},-j}` as well (`2d+2`).
pub fn saltelli_first_second(d: usize, extended: bool) -> Result<Vec<NamedSpec>> {
    need_dim(d, 2)?;
    let (full, empty) = (full(d), empty(d));
    let minus = |j: usize| single(j, d).complement();
    let mut out = Vec::new();
    for j in 1..=d {
        let spec = GsiSpec::bilinear(&Coeffs::from([(empty, 1.0)]), &Coeffs::from([(minus(j), 1.0), (full, -1.0)]))?;
        out.push(NamedSpec::new(format!("lower[{j}]"), spec));
    }
    for j in 1..=d {
        let lam = Coeffs::from([(full, 1.0), (minus(j), -1.0)]);
        out.push(NamedSpec::new(format!("upper[{j}]"), crate::spec::compose_square(&lam)?.with_scale(0.5)));
    }
    for j in 1..=d {
        for k in j + 1..=d {
            let lam = Coeffs::from([(minus(j), 1.0), (minus(k), -1.0)]);
            out.push(NamedSpec::new(format!("upper[{j},{k}]"), crate::spec::compose_square(&lam)?.with_scale(0.5)));
        }
    }
    if extended {
        for j in 1..=d {
            for k in j + 1..=d {
                // both orientations estimate the same index; averaging them touches every {j}
                let spec = GsiSpec::general(
                    d,
                    [(single(j, d), minus(k), 0.5), (single(k, d), minus(j), 0.5), (empty, full, -1.0)],
                )?;
                out.push(NamedSpec::new(format!("lower[{j},{k}]"), spec));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{MinModel, ProductModel};
    use crate::spec::batch_cost;

    fn s(ix: &[usize], d: usize) -> SubsetMask {
        SubsetMask::from_indices(ix, d).unwrap()
    }

    fn table2() -> ProductModel {
        ProductModel::unit_mean(vec![1.0, 1.0, 0.5, 0.5, 0.25, 0.25]).unwrap()
    }

    #[test]
    fn documented_costs() {
        let d = 5;
        let w = s(&[1, 2, 3], d);
        assert_eq!(variance_component_simple(w).unwrap().cost(), 9);
        assert_eq!(variance_component_simple_fx(w).unwrap().cost(), 9);
        assert_eq!(variance_component_bilinear(w, Some(s(&[1], d))).unwrap().cost(), 6);
        assert_eq!(variance_component_bilinear(w, None).unwrap().cost(), 6);
        let w8 = s(&[1, 2, 3, 4], 8);
        assert_eq!(superset_bilinear(w8, None).unwrap().cost(), 7);
        assert_eq!(superset_square(w8).unwrap().cost(), 16);
        for d in [4, 5, 6, 8] {
            assert_eq!(mean_dimension(d).unwrap().cost(), d + 1);
            assert_eq!(first_order_total(d).unwrap().cost(), d + 2);
            assert_eq!(second_order_total(d).unwrap().cost(), 2 * d + 2);
            assert_eq!(mean_square_dimension(d).unwrap().cost(), d + 1);
            assert_eq!(trunc_tail_weight(d).unwrap().cost(), d + 1);
            assert_eq!(trunc_head_weight(d).unwrap().cost(), d + 1);
            assert_eq!(index_spread(d).unwrap().cost(), 2 * d);
            assert_eq!(segment_pairs(d).unwrap().cost(), 2 * d - 1);
            let batch: Vec<GsiSpec> = saltelli_first_second(d, false).unwrap().into_iter().map(|n| n.spec).collect();
            assert_eq!(batch_cost(&batch).unwrap(), d + 2);
            let ext: Vec<GsiSpec> = saltelli_first_second(d, true).unwrap().into_iter().map(|n| n.spec).collect();
            assert_eq!(batch_cost(&ext).unwrap(), 2 * d + 2);
        }
    }

    #[test]
    fn proxy_variances() {
        let u = s(&[1, 2], 6);
        assert_eq!(mauntz_lower(u).unwrap().proxy_variance(), 2.0);
        assert_eq!(lower_index(u).unwrap().proxy_variance(), 1.0);
        let w = s(&[1, 2, 3], 5);
        assert_eq!(variance_component_simple(w).unwrap().proxy_variance(), 8.0);
        assert_eq!(variance_component_bilinear(w, None).unwrap().proxy_variance(), 8.0);
    }

    #[test]
    fn contrast_classification() {
        let d = 6;
        let u = s(&[1, 2], d);
        assert!(!lower_index(u).unwrap().is_contrast());
        assert!(!segment_pairs(d).unwrap().is_contrast());
        assert_eq!(segment_pairs(d).unwrap().mu_sq_multiplier(), 21.0);
        for spec in [
            upper_index(u).unwrap(),
            mauntz_lower(u).unwrap(),
            variance_component_simple(u).unwrap(),
            variance_component_bilinear(u, None).unwrap(),
            superset_square(u).unwrap(),
            superset_bilinear(u, None).unwrap(),
            mean_dimension(d).unwrap(),
            first_order_total(d).unwrap(),
            second_order_total(d).unwrap(),
            mean_square_dimension(d).unwrap(),
            trunc_tail_weight(d).unwrap(),
            trunc_head_weight(d).unwrap(),
            index_spread(d).unwrap(),
        ] {
            assert!(spec.is_contrast(), "{spec}");
        }
    }

    #[test]
    fn table2_expectations() {
        let m = table2();
        let u = s(&[1, 2], 6);
        assert!((lower_index(u).unwrap().expected_value(&m).unwrap() - 4.0).abs() < 1e-12);
        assert!((mauntz_lower(u).unwrap().expected_value(&m).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_function_targets() {
        let m = MinModel::new(5).unwrap();
        let w = s(&[1, 2, 3], 5);
        for w1 in [s(&[1], 5), s(&[2], 5), s(&[3], 5), s(&[], 5), w] {
            let e = variance_component_bilinear(w, Some(w1)).unwrap().expected_value(&m).unwrap();
            assert!((e - 1.0 / 5940.0).abs() < 1e-15, "{w1}");
        }
        let md = mean_dimension(5).unwrap().expected_value(&m).unwrap();
        assert!((md - 5.0 / 168.0).abs() < 1e-15);
    }

    #[test]
    fn second_order_on_product() {
        let m = table2();
        let t2: Vec<f64> = m.tau().iter().map(|t| t * t).collect();
        let mut want = 0.0;
        for j in 0..6 {
            for k in j + 1..6 {
                want += t2[j] * t2[k];
            }
        }
        let got = second_order_total(6).unwrap().expected_value(&m).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn truncation_weight_vanishes_for_last_coordinate_only() {
        use crate::models::{LowerOracle, SobolTable};
        let d = 5;
        let last = d;
        let lower = SubsetMask::all(d).unwrap().map(|u| (u, if u.contains(last) { 2.0 } else { 0.0 })).collect();
        let table = SobolTable { d, mu: 0.3, lower };
        assert_eq!(table.mean(), 0.3);
        assert!(trunc_tail_weight(d).unwrap().expected_value(&table).unwrap().abs() < 1e-15);
    }

    #[test]
    fn parameter_errors() {
        let d = 5;
        let w = s(&[1, 2], d);
        assert!(matches!(variance_component_bilinear(w, Some(s(&[3], d))), Err(GsiError::InvalidSplit { .. })));
        assert!(matches!(superset_square(s(&[], d)), Err(GsiError::EmptySet(_))));
        assert!(mean_dimension(0).is_err());
        assert!(mean_dimension(21).is_err());
        assert!(matches!(build("nope", &Params::new(3)), Err(GsiError::UnknownEstimator(_))));
        assert!(build("upper_index", &Params::new(3)).is_err());
        assert!(build("upper_index", &Params::new(3).with_u(s(&[1], 4))).is_err());
    }

    #[test]
    fn default_split_takes_lowest_half() {
        assert_eq!(default_split(s(&[2, 4, 5], 6)), s(&[2], 6));
        assert_eq!(default_split(s(&[1, 2, 3, 4], 8)), s(&[1, 2], 8));
        assert_eq!(default_split(s(&[3], 3)), s(&[], 3));
    }

    #[test]
    fn every_entry_builds() {
        let d = 6;
        let p = Params::new(d).with_u(s(&[1, 2], d)).with_w(s(&[1, 2, 3], d)).with_w1(s(&[1], d));
        for e in catalog() {
            let built = e.build(&p).unwrap();
            assert!(!built.is_empty(), "{}", e.name);
            assert_eq!(built.len() > 1, e.batch, "{}", e.name);
        }
    }
}
