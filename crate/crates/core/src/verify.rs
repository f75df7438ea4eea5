//! Self-checks against brute-force oracles, run by `gsi verify`.

use std::time::Instant;

use serde::Serialize;

use crate::catalog::{self, NamedSpec, Params};
use crate::engine::{estimate_batch, estimate_on_pairs, Correction, PairSet, SampleConfig};
use crate::error::{GsiError, Result};
use crate::models::{brute_force_anova, brute_force_theta, AnyModel, GridFunction, IndexKind, LowerOracle, MinModel, ProductModel};
use crate::spec::{batch_cost, GsiSpec};
use crate::subset::{lower_from_sigma, nxor_set, sigma_from_lower, SubsetMap, SubsetMask};

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    /// Largest absolute discrepancy seen (0 for exact integer checks).
    pub max_error: f64,
    /// First failure, if any.
    pub detail: Option<String>,
    pub millis: u128,
}

struct Tally {
    checks: usize,
    max_error: f64,
    detail: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self { checks: 0, max_error: 0.0, detail: None }
    }

    fn close(&mut self, what: impl FnOnce() -> String, got: f64, want: f64, tol: f64) {
        self.checks += 1;
        let err = (got - want).abs();
        if err.is_nan() || err > self.max_error {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
        if !(err <= tol) && self.detail.is_none() {
            self.detail = Some(format!("{}: got {got:e}, want {want:e}", what()));
        }
    }

    fn exact(&mut self, what: impl FnOnce() -> String, got: usize, want: usize) {
        self.checks += 1;
        if got != want && self.detail.is_none() {
            self.detail = Some(format!("{}: got {got}, want {want}", what()));
        }
    }
}

fn run_suite(name: &'static str, seed: u64, suite: fn(u64) -> Result<Tally>) -> SuiteResult {
    let start = Instant::now();
    let (passed, checks, max_error, detail) = match suite(seed) {
        Ok(t) => (t.detail.is_none(), t.checks, t.max_error, t.detail),
        Err(e) => (false, 0, f64::INFINITY, Some(e.to_string())),
    };
    SuiteResult { name, passed, checks, max_error, detail, millis: start.elapsed().as_millis() }
}

const SUITES: &[(&str, fn(u64) -> Result<Tally>)] = &[
    ("theta_matrix", theta_matrix),
    ("moebius_roundtrip", moebius_roundtrip),
    ("anova_identity", anova_identity),
    ("bilinear_expectations", bilinear_expectations),
    ("catalog_targets", catalog_targets),
    ("exhaustive_unbiasedness", exhaustive_unbiasedness),
    ("cost_accounting", cost_accounting),
    ("analytic_models", analytic_models),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs every suite with a fixed seed for the random test functions.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    SUITES.iter().map(|&(name, f)| run_suite(name, seed, f)).collect()
}

pub fn run_one(name: &str, seed: u64) -> Result<SuiteResult> {
    SUITES
        .iter()
        .find(|s| s.0 == name)
        .map(|&(name, f)| run_suite(name, seed, f))
        .ok_or_else(|| GsiError::InvalidParameter(format!("unknown suite `{name}`")))
}

/// `sum_u weight(u) sigma2_u`.
pub fn weighted_sigma(sigma: &SubsetMap, weight: impl Fn(SubsetMask) -> f64) -> f64 {
    sigma.iter().filter(|(u, _)| !u.is_empty()).map(|(&u, &s)| weight(u) * s).sum()
}

/// The quantity a labeled catalog spec targets, written as a weighted sum of
/// variance components. `sigma` must cover every subset.
pub fn catalog_target(entry: &str, label: &str, p: &Params, sigma: &SubsetMap) -> Result<f64> {
    let d = p.d as f64;
    let need = |s: Option<SubsetMask>| s.ok_or_else(|| GsiError::InvalidParameter(format!("{entry} needs a set")));
    let card = |u: SubsetMask| u.cardinality() as f64;
    let hi = |u: SubsetMask| u.max_index().unwrap_or(0) as f64;
    let lo = |u: SubsetMask| u.min_index().unwrap_or(0) as f64;
    let lower = |u: SubsetMask| weighted_sigma(sigma, |v| if v.is_subset_of(u) { 1.0 } else { 0.0 });
    let upper = |u: SubsetMask| weighted_sigma(sigma, |v| if v.intersection(u).map_or(false, |x| !x.is_empty()) { 1.0 } else { 0.0 });
    Ok(match entry {
        "lower_index" | "mauntz_lower" => lower(need(p.u)?),
        "upper_index" => upper(need(p.u)?),
        "variance_component_simple" | "variance_component_bilinear" => {
            let w = need(p.w)?;
            sigma.get(&w).copied().unwrap_or(0.0)
        }
        "superset_square" | "superset_bilinear" => {
            let w = need(p.w)?;
            weighted_sigma(sigma, |v| if w.is_subset_of(v) { 1.0 } else { 0.0 })
        }
        "mean_dimension" => weighted_sigma(sigma, card),
        "first_order_total" => weighted_sigma(sigma, |u| if u.cardinality() == 1 { 1.0 } else { 0.0 }),
        "second_order_total" => weighted_sigma(sigma, |u| if u.cardinality() == 2 { 1.0 } else { 0.0 }),
        "mean_square_dimension" => weighted_sigma(sigma, |u| card(u) * card(u)),
        "trunc_tail_weight" => weighted_sigma(sigma, |u| d - hi(u)),
        "trunc_head_weight" => weighted_sigma(sigma, |u| lo(u) - 1.0),
        "index_spread" => weighted_sigma(sigma, |u| hi(u) - lo(u)),
        "segment_pairs" => weighted_sigma(sigma, |u| lo(u) * (d - hi(u) + 1.0)),
        "saltelli_first_second" => {
            let (kind, set) = label.split_once('[').ok_or_else(|| GsiError::Parse(label.into()))?;
            let u = SubsetMask::parse(set.trim_end_matches(']'), p.d)?;
            match kind {
                "lower" => lower(u),
                "upper" => upper(u),
                _ => return Err(GsiError::Parse(label.into())),
            }
        }
        other => return Err(GsiError::UnknownEstimator(other.into())),
    })
}

/// Parameters exercising every catalog entry in dimension `d >= 3`.
pub fn default_params(d: usize, extended: bool) -> Result<Params> {
    Ok(Params::new(d)
        .with_u(SubsetMask::from_indices(&[1, 2], d)?)
        .with_w(SubsetMask::from_indices(&[1, 2, 3], d)?)
        .with_extended(extended))
}

/// Averages an estimator over every equally likely sample of `n` pairs drawn
/// from the cell midpoints of `grid`.
pub fn exhaustive_average(spec: &GsiSpec, grid: &GridFunction, n: usize, correction: Correction) -> Result<f64> {
    let (d, m) = (grid.dim(), grid.levels());
    let slots = 2 * d * n;
    let outcomes = (m as u128).checked_pow(slots as u32).filter(|&c| c <= 1 << 24).ok_or(GsiError::SizeCap {
        size: (m as u128).saturating_pow(slots as u32),
        cap: 1 << 24,
    })?;
    let model = AnyModel::Grid(grid.clone());
    let mut digits = vec![0usize; slots];
    let mid = |k: usize| (k as f64 + 0.5) / m as f64;
    let mut acc = 0.0;
    for _ in 0..outcomes {
        let mut pairs = PairSet::new(d);
        for p in 0..n {
            let base = &digits[2 * d * p..2 * d * (p + 1)];
            let x: Vec<f64> = base[..d].iter().map(|&k| mid(k)).collect();
            let z: Vec<f64> = base[d..].iter().map(|&k| mid(k)).collect();
            pairs.push(&x, &z);
        }
        acc += estimate_on_pairs(spec, &model, &pairs, correction)?.estimate;
        for digit in digits.iter_mut() {
            *digit += 1;
            if *digit < m {
                break;
            }
            *digit = 0;
        }
    }
    Ok(acc / outcomes as f64)
}

fn theta_matrix(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for i in 0..24u64 {
        let d = 1 + (i % 3) as usize;
        let m = 2 + (i % 3) as usize;
        let g = GridFunction::random(d, m, seed.wrapping_add(i))?;
        let anova = brute_force_anova(&g)?;
        let table = anova.sobol_table()?;
        for u in SubsetMask::all(d)? {
            for v in SubsetMask::all(d)? {
                let want = table.mu * table.mu + table.lower(nxor_set(u, v)?)?;
                t.close(|| format!("d={d} m={m} Theta[{u}][{v}]"), brute_force_theta(&g, u, v)?, want, 1e-10);
            }
        }
    }
    Ok(t)
}

fn moebius_roundtrip(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for i in 0..10u64 {
        let d = 2 + (i % 3) as usize;
        let g = GridFunction::random(d, 3, seed.wrapping_add(100 + i))?;
        let anova = brute_force_anova(&g)?;
        let lower = lower_from_sigma(&anova.sigma)?;
        let back = sigma_from_lower(&lower)?;
        for (u, s) in &anova.sigma {
            t.close(|| format!("sigma[{u}] roundtrip"), back[u], *s, 1e-12);
        }
        let table = anova.sobol_table()?;
        for (u, l) in &lower {
            t.close(|| format!("lower[{u}] against tabulated"), *l, table.lower(*u)?, 1e-12);
        }
    }
    Ok(t)
}

fn anova_identity(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for i in 0..10u64 {
        let d = 1 + (i % 4) as usize;
        let g = GridFunction::random(d, 3, seed.wrapping_add(200 + i))?;
        let anova = brute_force_anova(&g)?;
        let n = g.values().len() as f64;
        let mean = g.values().iter().sum::<f64>() / n;
        let var = g.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let summed: f64 = anova.sigma.iter().filter(|(u, _)| !u.is_empty()).map(|(_, s)| s).sum();
        t.close(|| format!("d={d} sum of components"), summed, var, 1e-10);
        t.close(|| format!("d={d} mean"), anova.mu, mean, 1e-12);
    }
    Ok(t)
}

fn bilinear_expectations(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let d = 4;
    for i in 0..5u64 {
        let g = GridFunction::random(d, 3, seed.wrapping_add(300 + i))?;
        let anova = brute_force_anova(&g)?;
        let table = anova.sobol_table()?;
        for w in SubsetMask::all(d)?.filter(|w| !w.is_empty()) {
            for w1 in w.subsets() {
                let vc = catalog::variance_component_bilinear(w, Some(w1))?;
                t.close(|| format!("sigma2 {w} split {w1}"), vc.expected_value(&table)?, anova.sigma[&w], 1e-10);
                let sb = catalog::superset_bilinear(w, Some(w1))?;
                t.close(|| format!("superset {w} split {w1}"), sb.expected_value(&table)?, anova.superset(w), 1e-10);
            }
        }
    }
    Ok(t)
}

fn catalog_targets(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for d in [3, 4, 5] {
        let g = GridFunction::random(d, 2, seed.wrapping_add(400 + d as u64))?;
        let anova = brute_force_anova(&g)?;
        let table = anova.sobol_table()?;
        let p = default_params(d, true)?;
        for entry in catalog::catalog() {
            for NamedSpec { label, spec } in entry.build(&p)? {
                let want = catalog_target(entry.name, &label, &p, &anova.sigma)?;
                t.close(|| format!("d={d} {} {label}", entry.name), spec.centered_value(&table)?, want, 1e-10);
                if spec.is_contrast() {
                    t.close(|| format!("d={d} {} {label} contrast", entry.name), spec.expected_value(&table)?, want, 1e-10);
                }
            }
        }
    }
    Ok(t)
}

fn exhaustive_unbiasedness(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let g = GridFunction::random(2, 2, seed.wrapping_add(500))?;
    let table = brute_force_anova(&g)?.sobol_table()?;
    let (u, full) = (SubsetMask::singleton(1, 2)?, SubsetMask::full(2)?);
    let contrast = catalog::mauntz_lower(u)?;
    let got = exhaustive_average(&contrast, &g, 2, Correction::None)?;
    t.close(|| "contrast plug-in".into(), got, table.lower(u)?, 1e-12);
    let simple = catalog::lower_index(u)?;
    let got = exhaustive_average(&simple, &g, 2, Correction::BiasCorrected)?;
    t.close(|| "bias-corrected lower index".into(), got, table.lower(u)?, 1e-12);
    let empty = SubsetMask::empty(2)?;
    let general = GsiSpec::general(2, [(full, u, 1.5), (u, u.complement(), -0.5), (empty, full, 2.0)])?;
    let got = exhaustive_average(&general, &g, 2, Correction::BiasCorrected)?;
    t.close(|| "bias-corrected general spec".into(), got, general.centered_value(&table)?, 1e-12);
    Ok(t)
}

fn cost_accounting(seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for d in [4, 5, 6, 8] {
        let model = AnyModel::Grid(GridFunction::random(d, 2, seed.wrapping_add(600 + d as u64))?);
        let cfg = SampleConfig::new(16, seed);
        for extended in [false, true] {
            let p = default_params(d, extended)?;
            for entry in catalog::catalog() {
                let specs: Vec<GsiSpec> = entry.build(&p)?.into_iter().map(|n| n.spec).collect();
                let batch = estimate_batch(&specs, &model, &cfg)?;
                t.exact(|| format!("d={d} {}", entry.name), batch.evals_per_pair, batch_cost(&specs)?);
                t.exact(|| format!("d={d} {} total", entry.name), batch.total_evals as usize, 16 * batch_cost(&specs)?);
            }
        }
        let build = |name: &str, p: &Params| -> Result<usize> {
            let specs: Vec<GsiSpec> = catalog::build(name, p)?.into_iter().map(|n| n.spec).collect();
            batch_cost(&specs)
        };
        let p = default_params(d, false)?;
        let w4 = p.clone().with_w(SubsetMask::from_indices(&[1, 2, 3, 4], d)?);
        t.exact(|| format!("d={d} simple sigma2_123"), build("variance_component_simple", &p)?, 9);
        t.exact(|| format!("d={d} bilinear sigma2_123"), build("variance_component_bilinear", &p)?, 6);
        t.exact(|| format!("d={d} superset square"), build("superset_square", &w4)?, 16);
        t.exact(|| format!("d={d} superset bilinear"), build("superset_bilinear", &w4)?, 7);
        t.exact(|| format!("d={d} mean dimension"), build("mean_dimension", &p)?, d + 1);
        t.exact(|| format!("d={d} mean square dimension"), build("mean_square_dimension", &p)?, d + 1);
        t.exact(|| format!("d={d} first order total"), build("first_order_total", &p)?, d + 2);
        t.exact(|| format!("d={d} saltelli"), build("saltelli_first_second", &p)?, d + 2);
        let ext = p.clone().with_extended(true);
        t.exact(|| format!("d={d} saltelli extended"), build("saltelli_first_second", &ext)?, 2 * d + 2);
    }
    Ok(t)
}

fn analytic_models(_seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let min = MinModel::new(5)?;
    let w = SubsetMask::from_indices(&[1, 2, 3], 5)?;
    t.close(|| "min sigma2_123".into(), min.exact_index(IndexKind::Sigma, w)?, 1.0 / 5940.0, 1e-15);
    let full = SubsetMask::full(5)?;
    t.close(|| "min mean dimension".into(), min.exact_index(IndexKind::MeanDimension, full)?, 1.5, 1e-12);

    // closed forms against the lattice ANOVA of a product with a two-level base
    let g = crate::models::BaseFunction::custom(|x| if x < 0.5 { -1.0 } else { 1.0 })?;
    let prod = ProductModel::with_base(vec![1.0, 0.5, -0.7], vec![0.4, 1.1, 0.3], g)?;
    let grid = GridFunction::from_model(&prod, 2)?;
    let anova = brute_force_anova(&grid)?;
    for u in SubsetMask::all(3)? {
        t.close(|| format!("product lower[{u}]"), prod.lower(u)?, anova.sobol_table()?.lower(u)?, 1e-12);
        t.close(|| format!("product superset[{u}]"), prod.superset(u)?, anova.superset(u), 1e-12);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for r in run_all(11) {
            assert!(r.passed, "{}: {:?}", r.name, r.detail);
            assert!(r.checks > 0, "{}", r.name);
        }
        assert!(suite_names().len() >= 6);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_one("nope", 1).is_err());
        assert!(run_one("anova_identity", 1).unwrap().passed);
    }

    #[test]
    fn exhaustive_average_rejects_huge_enumerations() {
        let g = GridFunction::random(3, 4, 1).unwrap();
        let spec = catalog::mauntz_lower(SubsetMask::singleton(1, 3).unwrap()).unwrap();
        assert!(exhaustive_average(&spec, &g, 3, Correction::None).is_err());
    }
}
