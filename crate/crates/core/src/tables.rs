//! The three published comparison studies, rerun at a chosen scale.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::catalog;
use crate::engine::{replicate_study, Correction, SampleConfig, StudyEstimator, StudyReport, StudyRow};
use crate::error::{GsiError, Result};
use crate::models::{IndexKind, LowerOracle, MinModel, ProductModel};
use crate::subset::SubsetMask;

/// Which study to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Table {
    /// `sigma2_{1,2,3}` of `min(x)` in `d = 5`: simple versus three bilinear splits.
    One,
    /// Lower indices of a 6-dimensional product: Mauntz contrast versus the
    /// mean-corrected simple estimator.
    Two,
    /// Superset importance in an 8-dimensional product: square versus bilinear.
    Three,
}

impl Table {
    pub fn number(self) -> u8 {
        match self {
            Table::One => 1,
            Table::Two => 2,
            Table::Three => 3,
        }
    }

    /// Full-scale `(n, R)`. Table 1 uses `10^6` pairs for every estimator,
    /// which reproduces the published standard errors.
    pub fn full_scale(self) -> (usize, usize) {
        match self {
            Table::One => (1_000_000, 1),
            Table::Two => (10_000, 10_000),
            Table::Three => (1_000_000, 1),
        }
    }
}

impl FromStr for Table {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Table::One),
            "2" => Ok(Table::Two),
            "3" => Ok(Table::Three),
            _ => Err(GsiError::Parse(format!("unknown table `{s}`, expected 1, 2 or 3"))),
        }
    }
}

/// Sizing for a table run.
#[derive(Clone, Copy, Debug)]
pub struct TableOptions {
    /// Divides the full-scale `n` (and `R` when above 1).
    pub scale: f64,
    pub n: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { scale: 1.0, n: None, replicates: None, seed: 2013, workers: 1 }
    }
}

impl TableOptions {
    pub fn sample_config(&self, table: Table) -> Result<SampleConfig> {
        if !(self.scale.is_finite() && self.scale >= 1.0) {
            return Err(GsiError::InvalidParameter(format!("scale must be at least 1, got {}", self.scale)));
        }
        let (n0, r0) = table.full_scale();
        let n = self.n.unwrap_or(((n0 as f64 / self.scale).ceil() as usize).max(2));
        let min_r = if r0 > 1 { 2 } else { 1 };
        let r = self.replicates.unwrap_or(((r0 as f64 / self.scale).ceil() as usize).max(min_r));
        Ok(SampleConfig::new(n, self.seed).with_replicates(r).with_workers(self.workers))
    }
}

/// A group of estimators compared against each other.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    /// The target set, e.g. `[1,2]`.
    pub set: String,
    pub baseline: String,
    pub other: String,
    /// `(cost_baseline / cost_other) (spread_baseline / spread_other)²`.
    pub efficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRun {
    pub table: u8,
    pub report: StudyReport,
    pub comparisons: Vec<Comparison>,
}

fn set(ix: &[usize], d: usize) -> Result<SubsetMask> {
    SubsetMask::from_indices(ix, d)
}

fn compare(report: &StudyReport, set: SubsetMask, baseline: String, other: String) -> Result<Comparison> {
    let efficiency = report.efficiency(&baseline, &other)?;
    Ok(Comparison { set: set.to_string(), baseline, other, efficiency })
}

pub fn table1_estimators() -> Result<Vec<StudyEstimator>> {
    let d = 5;
    let model = MinModel::new(d)?;
    let w = set(&[1, 2, 3], d)?;
    let truth = model.exact_index(IndexKind::Sigma, w)?;
    let mut out = vec![StudyEstimator::new("simple", catalog::variance_component_simple(w)?, Correction::None)
        .with_truth(truth)];
    for j in 1..=3 {
        let spec = catalog::variance_component_bilinear(w, Some(SubsetMask::singleton(j, d)?))?;
        out.push(StudyEstimator::new(format!("bilinear[{j}]"), spec, Correction::None).with_truth(truth));
    }
    Ok(out)
}

pub fn table2_model() -> Result<ProductModel> {
    ProductModel::unit_mean(vec![1.0, 1.0, 0.5, 0.5, 0.25, 0.25])
}

pub fn table2_sets() -> Result<Vec<SubsetMask>> {
    [[1, 2], [3, 4], [5, 6]].iter().map(|ix| set(ix, 6)).collect()
}

pub fn table2_estimators() -> Result<Vec<StudyEstimator>> {
    let model = table2_model()?;
    let mut out = Vec::new();
    for u in table2_sets()? {
        let truth = model.lower(u)?;
        out.push(StudyEstimator::new(format!("cont{u}"), catalog::mauntz_lower(u)?, Correction::None).with_truth(truth));
        out.push(
            StudyEstimator::new(format!("simp{u}"), catalog::lower_index(u)?, Correction::MeanCorrected)
                .with_truth(truth),
        );
    }
    Ok(out)
}

pub fn table3_model() -> Result<ProductModel> {
    ProductModel::unit_mean([4.0, 4.0, 3.0, 3.0, 2.0, 2.0, 1.0, 1.0].map(|t| t / 4.0).to_vec())
}

/// `(w, w1)` for each target.
pub fn table3_sets() -> Result<Vec<(SubsetMask, SubsetMask)>> {
    Ok(vec![(set(&[1, 2, 3, 4], 8)?, set(&[1, 2], 8)?), (set(&[5, 6, 7, 8], 8)?, set(&[5, 6], 8)?)])
}

pub fn table3_estimators() -> Result<Vec<StudyEstimator>> {
    let model = table3_model()?;
    let mut out = Vec::new();
    for (w, w1) in table3_sets()? {
        let truth = model.superset(w)?;
        out.push(
            StudyEstimator::new(format!("bilinear{w}"), catalog::superset_bilinear(w, Some(w1))?, Correction::None)
                .with_truth(truth),
        );
        out.push(StudyEstimator::new(format!("square{w}"), catalog::superset_square(w)?, Correction::None).with_truth(truth));
    }
    Ok(out)
}

pub fn run_table(table: Table, opts: &TableOptions) -> Result<TableRun> {
    let cfg = opts.sample_config(table)?;
    let (report, comparisons) = match table {
        Table::One => {
            let report = replicate_study(&table1_estimators()?, &MinModel::new(5)?, &cfg)?;
            let w = set(&[1, 2, 3], 5)?;
            let comparisons = (1..=3)
                .map(|j| compare(&report, w, "simple".into(), format!("bilinear[{j}]")))
                .collect::<Result<_>>()?;
            (report, comparisons)
        }
        Table::Two => {
            let report = replicate_study(&table2_estimators()?, &table2_model()?, &cfg)?;
            let comparisons = table2_sets()?
                .into_iter()
                .map(|u| compare(&report, u, format!("simp{u}"), format!("cont{u}")))
                .collect::<Result<_>>()?;
            (report, comparisons)
        }
        Table::Three => {
            let report = replicate_study(&table3_estimators()?, &table3_model()?, &cfg)?;
            let comparisons = table3_sets()?
                .into_iter()
                .map(|(w, _)| compare(&report, w, format!("bilinear{w}"), format!("square{w}")))
                .collect::<Result<_>>()?;
            (report, comparisons)
        }
    };
    Ok(TableRun { table: table.number(), report, comparisons })
}

/// One CSV line per estimator.
#[derive(Serialize)]
struct CsvRow<'a> {
    table: u8,
    estimator: &'a str,
    correction: &'a str,
    n: usize,
    replicates: usize,
    seed: u64,
    cost: usize,
    truth: Option<f64>,
    mean: f64,
    bias: Option<f64>,
    sd: f64,
    mean_se: f64,
    prop_negative: f64,
}

impl TableRun {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table runs serialize")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.report.rows {
            w.serialize(CsvRow {
                table: self.table,
                estimator: &r.name,
                correction: r.correction.name(),
                n: self.report.n,
                replicates: self.report.replicates,
                seed: self.report.seed,
                cost: r.cost,
                truth: r.truth,
                mean: r.mean,
                bias: r.bias,
                sd: r.sd,
                mean_se: r.mean_se,
                prop_negative: r.prop_negative,
            })
            .map_err(|e| GsiError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| GsiError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| GsiError::Io(e.to_string()))
    }

    /// Aligned text in the layout of the published table.
    pub fn to_text(&self) -> String {
        let rep = &self.report;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Table {}: n = {}, R = {}, seed = {}, evaluations per pair = {}",
            self.table, rep.n, rep.replicates, rep.seed, rep.batch_cost
        );
        match self.table {
            1 => {
                let rows: Vec<&StudyRow> = rep.rows.iter().collect();
                grid(&mut out, "Estimator", &rows, &[
                    ("True", &|r| r.truth.map(sci).unwrap_or_default()),
                    ("Mean", &|r| sci(r.mean)),
                    ("Standard error", &|r| sci(r.mean_se)),
                ]);
                if rep.replicates > 1 {
                    grid(&mut out, "", &rows, &[("S.Dev", &|r| sci(r.sd))]);
                }
                let _ = writeln!(out);
                for c in &self.comparisons {
                    let _ = writeln!(out, "Efficiency of {} over {}: {:.2}", c.other, c.baseline, c.efficiency);
                }
            }
            2 => {
                let rows: Vec<&StudyRow> = rep.rows.iter().collect();
                grid(&mut out, "", &rows, &[
                    ("True", &|r| r.truth.map(|t| format!("{t:.4}")).unwrap_or_default()),
                    ("Avg.", &|r| format!("{:.4}", r.mean)),
                    ("Bias", &|r| r.bias.map(|b| format!("{b:.4}")).unwrap_or_default()),
                    ("S.Dev", &|r| format!("{:.4}", r.spread())),
                    ("Neg", &|r| if r.prop_negative == 0.0 { "-".into() } else { format!("{:.4}", r.prop_negative) }),
                ]);
                let cells: Vec<String> = self.comparisons.iter().map(|c| format!("{} {:.2}", c.set, c.efficiency)).collect();
                let _ = writeln!(out, "{:<8}{}", "Eff.", cells.join("   "));
            }
            _ => {
                let _ = writeln!(out, "Standard errors x 1e3");
                let mut header = format!("{:<12}", "");
                let mut bil = format!("{:<12}", "Bilinear");
                let mut sq = format!("{:<12}", "Square");
                let mut eff = format!("{:<12}", "Efficiency");
                for c in &self.comparisons {
                    let b = rep.row(&c.baseline).map(|r| r.spread()).unwrap_or(f64::NAN);
                    let s = rep.row(&c.other).map(|r| r.spread()).unwrap_or(f64::NAN);
                    let _ = write!(header, "{:>14}", c.set);
                    let _ = write!(bil, "{:>14.3}", b * 1e3);
                    let _ = write!(sq, "{:>14.3}", s * 1e3);
                    let _ = write!(eff, "{:>14.1}", c.efficiency);
                }
                for line in [header, bil, sq, eff] {
                    let _ = writeln!(out, "{}", line.trim_end());
                }
            }
        }
        out
    }
}

type Cell<'a> = (&'a str, &'a dyn Fn(&StudyRow) -> String);

fn grid(out: &mut String, corner: &str, rows: &[&StudyRow], cells: &[Cell<'_>]) {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(12) + 2;
    if !corner.is_empty() || !rows.is_empty() {
        let _ = write!(out, "{corner:<16}");
        for r in rows {
            let _ = write!(out, "{:>width$}", r.name);
        }
        let _ = writeln!(out);
    }
    for (label, f) in cells {
        let _ = write!(out, "{label:<16}");
        for r in rows {
            let _ = write!(out, "{:>width$}", f(r));
        }
        let _ = writeln!(out);
    }
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_shrinks_n_and_replicates() {
        let opts = TableOptions { scale: 100.0, ..TableOptions::default() };
        let cfg = opts.sample_config(Table::Two).unwrap();
        assert_eq!((cfg.n, cfg.replicates), (100, 100));
        let cfg = opts.sample_config(Table::Three).unwrap();
        assert_eq!((cfg.n, cfg.replicates), (10_000, 1));
        let opts = TableOptions { scale: 1e9, ..TableOptions::default() };
        assert_eq!(opts.sample_config(Table::Two).unwrap().replicates, 2);
        let bad = TableOptions { scale: 0.5, ..TableOptions::default() };
        assert!(bad.sample_config(Table::One).is_err());
    }

    #[test]
    fn table_numbers_parse() {
        assert_eq!("2".parse::<Table>().unwrap(), Table::Two);
        assert!("4".parse::<Table>().is_err());
    }

    #[test]
    fn estimator_costs() {
        let t1: Vec<usize> = table1_estimators().unwrap().iter().map(|e| e.spec.cost()).collect();
        assert_eq!(t1, vec![9, 6, 6, 6]);
        let t3: Vec<usize> = table3_estimators().unwrap().iter().map(|e| e.spec.cost()).collect();
        assert_eq!(t3, vec![7, 16, 7, 16]);
    }

    #[test]
    fn small_runs_render() {
        let opts = TableOptions { n: Some(500), replicates: Some(3), ..TableOptions::default() };
        for t in [Table::One, Table::Two, Table::Three] {
            let run = run_table(t, &opts).unwrap();
            assert!(run.to_text().starts_with(&format!("Table {}", t.number())));
            let csv = run.to_csv().unwrap();
            assert_eq!(csv.lines().count(), run.report.rows.len() + 1);
            let json: serde_json::Value = serde_json::from_str(&run.to_json()).unwrap();
            assert_eq!(json["table"], t.number());
        }
    }
}
