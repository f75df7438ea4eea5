use serde::Serialize;

use super::{accumulate, compile, finish, streams, Correction, SampleConfig, Welford};
use crate::error::{GsiError, Result};
use crate::models::Model;
use crate::spec::{batch_cost, GsiSpec};

/// One estimator in a replicate study.
#[derive(Clone, Debug)]
pub struct StudyEstimator {
    pub name: String,
    pub spec: GsiSpec,
    pub correction: Correction,
    /// Exact value of the estimand, when known.
    pub truth: Option<f64>,
}

impl StudyEstimator {
    pub fn new(name: impl Into<String>, spec: GsiSpec, correction: Correction) -> Self {
        Self { name: name.into(), spec, correction, truth: None }
    }

    pub fn with_truth(mut self, truth: f64) -> Self {
        self.truth = Some(truth);
        self
    }
}

/// Replicate summary of one estimator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub name: String,
    pub correction: Correction,
    pub truth: Option<f64>,
    pub mean: f64,
    pub bias: Option<f64>,
    /// Standard deviation across replicates (`NaN` with one replicate).
    pub sd: f64,
    /// Average per-pair standard error within a replicate.
    pub mean_se: f64,
    pub prop_negative: f64,
    pub cost: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl StudyRow {
    /// The spread used for efficiency: the replicate SD, or the per-pair
    /// standard error when there is only one replicate.
    pub fn spread(&self) -> f64 {
        if self.values.len() > 1 {
            self.sd
        } else {
            self.mean_se
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyReport {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Distinct evaluations per pair shared by all estimators.
    pub batch_cost: usize,
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn row(&self, name: &str) -> Result<&StudyRow> {
        self.rows
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| GsiError::UnknownEstimator(name.to_string()))
    }

    /// `(cost_baseline / cost_other) · (sd_baseline / sd_other)²`: above 1 when `other` is better.
    pub fn efficiency(&self, baseline: &str, other: &str) -> Result<f64> {
        let (b, o) = (self.row(baseline)?, self.row(other)?);
        let ratio = b.spread() / o.spread();
        Ok(b.cost as f64 / o.cost as f64 * ratio * ratio)
    }
}

/// Runs every estimator on each of `cfg.replicates` independent streams. All
/// estimators share one evaluation pass per replicate.
pub fn replicate_study(estimators: &[StudyEstimator], model: &dyn Model, cfg: &SampleConfig) -> Result<StudyReport> {
    let bias = estimators.iter().any(|e| e.correction == Correction::BiasCorrected);
    cfg.validate(if bias { 2 } else { 1 })?;
    let specs: Vec<&GsiSpec> = estimators.iter().map(|e| &e.spec).collect();
    let c = compile(&specs, model)?;
    let stats = accumulate(&c, model, &streams(cfg, c.d, cfg.replicates), cfg.workers)?;
    let owned: Vec<GsiSpec> = estimators.iter().map(|e| e.spec.clone()).collect();

    let rows = estimators
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut values = Vec::with_capacity(stats.len());
            let mut w = Welford::default();
            let mut se_sum = 0.0;
            for st in &stats {
                let (v, se) = finish(&c.specs[i], st, i, e.correction);
                values.push(v);
                w.push(v);
                se_sum += se;
            }
            let r = values.len() as f64;
            StudyRow {
                name: e.name.clone(),
                correction: e.correction,
                truth: e.truth,
                mean: w.mean,
                bias: e.truth.map(|t| w.mean - t),
                sd: if values.len() > 1 { w.sample_var().sqrt() } else { f64::NAN },
                mean_se: se_sum / r,
                prop_negative: values.iter().filter(|&&v| v < 0.0).count() as f64 / r,
                cost: e.spec.cost(),
                values,
            }
        })
        .collect();
    Ok(StudyReport {
        n: cfg.n,
        replicates: cfg.replicates,
        seed: cfg.seed,
        batch_cost: batch_cost(&owned)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::engine::estimate;
    use crate::models::{FnModel, ProductModel};
    use crate::subset::SubsetMask;

    #[test]
    fn constant_model_has_no_spread() {
        let m = FnModel::new(2, |_: &[f64]| 1.0);
        let u = SubsetMask::from_indices(&[1], 2).unwrap();
        let est = vec![
            StudyEstimator::new("cont", catalog::mauntz_lower(u).unwrap(), Correction::None).with_truth(0.0),
            StudyEstimator::new("simp", catalog::lower_index(u).unwrap(), Correction::MeanCorrected).with_truth(0.0),
        ];
        let rep = replicate_study(&est, &m, &SampleConfig::new(100, 1).with_replicates(2)).unwrap();
        for row in &rep.rows {
            assert_eq!(row.sd, 0.0);
            assert_eq!(row.bias, Some(0.0));
        }
    }

    #[test]
    fn squares_are_never_negative() {
        let m = ProductModel::unit_mean(vec![1.0, 0.1, 0.1]).unwrap();
        let w = SubsetMask::from_indices(&[2, 3], 3).unwrap();
        let est = vec![
            StudyEstimator::new("sq", catalog::superset_square(w).unwrap(), Correction::None),
            StudyEstimator::new("bil", catalog::superset_bilinear(w, None).unwrap(), Correction::None),
        ];
        let rep = replicate_study(&est, &m, &SampleConfig::new(50, 2).with_replicates(40)).unwrap();
        assert_eq!(rep.row("sq").unwrap().prop_negative, 0.0);
        assert!(rep.row("bil").unwrap().prop_negative > 0.0);
        assert!(rep.efficiency("bil", "sq").unwrap() > 0.0);
        assert!(rep.row("nope").is_err());
    }

    #[test]
    fn replicate_zero_matches_estimate() {
        let m = ProductModel::unit_mean(vec![1.0, 0.5]).unwrap();
        let u = SubsetMask::from_indices(&[1], 2).unwrap();
        let spec = catalog::mauntz_lower(u).unwrap();
        let cfg = SampleConfig::new(3000, 21);
        let rep = replicate_study(&[StudyEstimator::new("c", spec.clone(), Correction::None)], &m, &cfg.with_replicates(3))
            .unwrap();
        assert_eq!(rep.rows[0].values[0], estimate(&spec, &m, &cfg).unwrap().estimate);
        assert!(rep.rows[0].values[1] != rep.rows[0].values[0]);
    }
}
