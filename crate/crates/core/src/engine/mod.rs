//! Pick-and-freeze Monte Carlo estimation of generalized Sobol' indices.
//!
//! Pairs are processed in chunks of [`CHUNK`]; every chunk produces partial
//! moments that are merged in chunk order, so results do not depend on the
//! number of worker threads.

mod rng;
mod study;

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use rng::{draw_pair, unit_f64, PairSet, PairSource, StreamSource};
pub use study::{replicate_study, StudyEstimator, StudyReport, StudyRow};

use crate::catalog::lower_index;
use crate::error::{GsiError, Result};
use crate::models::Model;
use crate::spec::{batch_support, GsiSpec, SpecForm};
use crate::subset::SubsetMask;

/// Pairs per reduction chunk.
pub const CHUNK: usize = 4096;

/// Sampling parameters shared by all estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    /// `(x, z)` pairs per run.
    pub n: usize,
    pub seed: u64,
    /// Independent runs; used by bias-corrected estimates and studies.
    pub replicates: usize,
    pub workers: usize,
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed, replicates: 1, workers: 1 }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self, min_n: usize) -> Result<()> {
        if self.n < min_n {
            return Err(GsiError::SampleSize { n: self.n, min: min_n });
        }
        if self.replicates == 0 {
            return Err(GsiError::InvalidParameter("replicates must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(GsiError::InvalidParameter("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// How a spec's sample value is turned into an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    /// The raw sample GSI `tr(Omega^T Theta_hat)`.
    None,
    /// Subtracts `sum(Omega) mu_hat²`, with `mu_hat` pooled over every evaluation of the spec.
    MeanCorrected,
    /// The unbiased estimator of `sum_uv Omega_uv (Theta_uv − mu²)` built from per-subset means and variances.
    BiasCorrected,
}

impl Correction {
    /// No correction for contrasts, mean correction otherwise.
    pub fn auto(spec: &GsiSpec) -> Self {
        if spec.is_contrast() {
            Correction::None
        } else {
            Correction::MeanCorrected
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Correction::None => "none",
            Correction::MeanCorrected => "mean",
            Correction::BiasCorrected => "bias",
        }
    }
}

impl FromStr for Correction {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Correction::None),
            "mean" => Ok(Correction::MeanCorrected),
            "bias" => Ok(Correction::BiasCorrected),
            _ => Err(GsiError::Parse(format!("unknown correction `{s}` (none|mean|bias)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    PlugIn,
    SquareForm,
    MeanCorrected,
    BiasCorrected,
}

impl EstimatorKind {
    fn for_spec(spec: &GsiSpec, correction: Correction) -> Self {
        match correction {
            Correction::None if spec.is_sum_of_squares() => EstimatorKind::SquareForm,
            Correction::None => EstimatorKind::PlugIn,
            Correction::MeanCorrected => EstimatorKind::MeanCorrected,
            Correction::BiasCorrected => EstimatorKind::BiasCorrected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub estimate: f64,
    /// Per-pair standard error, or the replicate standard error for
    /// bias-corrected estimates (`NaN` with a single replicate).
    pub std_error: f64,
    pub n: usize,
    pub replicates: usize,
    pub evals_per_pair: usize,
    pub total_evals: u64,
    pub kind: EstimatorKind,
}

/// Results of one shared-evaluation pass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchResult {
    pub results: Vec<EstimateResult>,
    /// Distinct evaluations per pair over the union of supports.
    pub evals_per_pair: usize,
    pub total_evals: u64,
}

#[derive(Clone, Debug)]
enum Form {
    General,
    Bilinear(Vec<(usize, f64)>, Vec<(usize, f64)>),
    Squares(Vec<Vec<(usize, f64)>>),
}

#[derive(Clone, Debug)]
struct CompiledSpec {
    form: Form,
    /// `(a, b, Omega)` in support-index space.
    pairs: Vec<(usize, usize, f64)>,
    members: Vec<usize>,
    scale: f64,
    mu_mult: f64,
    cost: usize,
}

impl CompiledSpec {
    #[inline]
    fn raw(&self, f: &[f64]) -> f64 {
        let dot = |c: &[(usize, f64)]| c.iter().map(|&(k, w)| w * f[k]).sum::<f64>();
        match &self.form {
            Form::General => self.pairs.iter().map(|&(a, b, w)| w * f[a] * f[b]).sum(),
            Form::Bilinear(l, g) => dot(l) * dot(g),
            Form::Squares(rows) => rows
                .iter()
                .map(|r| {
                    let s = dot(r);
                    s * s
                })
                .sum(),
        }
    }

    #[inline]
    fn member_mean(&self, f: &[f64]) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        self.members.iter().map(|&k| f[k]).sum::<f64>() / self.members.len() as f64
    }
}

#[derive(Clone, Debug)]
struct Compiled {
    d: usize,
    support: Vec<SubsetMask>,
    specs: Vec<CompiledSpec>,
}

fn compile(specs: &[&GsiSpec], model: &dyn Model) -> Result<Compiled> {
    let d = model.dim();
    for s in specs {
        if s.dim() != d {
            return Err(GsiError::DimensionMismatch { left: s.dim(), right: d });
        }
    }
    let owned: Vec<GsiSpec> = specs.iter().map(|s| (*s).clone()).collect();
    let support: Vec<SubsetMask> = batch_support(&owned)?.into_iter().collect();
    let at = |u: &SubsetMask| support.binary_search(u).expect("support contains every referenced subset");
    let coeffs = |c: &crate::spec::Coeffs| c.iter().map(|(u, &w)| (at(u), w)).collect::<Vec<_>>();
    let compiled = specs
        .iter()
        .map(|s| {
            let form = match s.form() {
                SpecForm::General => Form::General,
                SpecForm::Bilinear { lambda, gamma } => Form::Bilinear(coeffs(lambda), coeffs(gamma)),
                SpecForm::Squares { rows } => Form::Squares(rows.iter().map(coeffs).collect()),
            };
            CompiledSpec {
                form,
                pairs: s.weights().iter().map(|(&(u, v), &w)| (at(&u), at(&v), w)).collect(),
                members: s.support().iter().map(at).collect(),
                scale: s.scale(),
                mu_mult: s.mu_sq_multiplier(),
                cost: s.cost(),
            }
        })
        .collect();
    Ok(Compiled { d, support, specs: compiled })
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let dx = x - self.mean;
        self.mean += dx / self.n;
        self.m2 += dx * (x - self.mean);
    }

    fn merge(&mut self, o: &Welford) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        self.mean += delta * o.n / n;
        self.m2 += o.m2 + delta * delta * self.n * o.n / n;
        self.n = n;
    }

    fn sample_var(&self) -> f64 {
        self.m2 / (self.n - 1.0)
    }
}

/// Joint moments of the per-pair term `t` and the per-pair mean evaluation `m`.
#[derive(Clone, Copy, Debug, Default)]
struct Joint {
    t: Welford,
    m: Welford,
    cov: f64,
}

impl Joint {
    #[inline]
    fn push(&mut self, t: f64, m: f64) {
        let dm = m - self.m.mean;
        self.t.push(t);
        self.m.push(m);
        // uses the updated mean of t and the old mean of m
        self.cov += (t - self.t.mean) * dm;
    }

    fn merge(&mut self, o: &Joint) {
        if o.t.n == 0.0 {
            return;
        }
        let n = self.t.n + o.t.n;
        let (dt, dm) = (o.t.mean - self.t.mean, o.m.mean - self.m.mean);
        self.cov += o.cov + dt * dm * self.t.n * o.t.n / n;
        self.t.merge(&o.t);
        self.m.merge(&o.m);
    }
}

#[derive(Clone, Debug)]
struct Stats {
    pairs: u64,
    evals: u64,
    specs: Vec<Joint>,
    support: Vec<Welford>,
}

impl Stats {
    fn new(c: &Compiled) -> Self {
        Self {
            pairs: 0,
            evals: 0,
            specs: vec![Joint::default(); c.specs.len()],
            support: vec![Welford::default(); c.support.len()],
        }
    }

    fn merge(&mut self, o: &Stats) {
        self.pairs += o.pairs;
        self.evals += o.evals;
        for (a, b) in self.specs.iter_mut().zip(&o.specs) {
            a.merge(b);
        }
        for (a, b) in self.support.iter_mut().zip(&o.support) {
            a.merge(b);
        }
    }
}

/// Evaluates every support subset at every pair of one chunk.
fn run_chunk<S: PairSource + ?Sized>(c: &Compiled, model: &dyn Model, src: &S, start: usize, count: usize) -> Stats {
    let d = c.d;
    let (mut x, mut z) = (vec![0.0; count * d], vec![0.0; count * d]);
    src.fill(start, count, &mut x, &mut z);
    let mut stats = Stats::new(c);
    let mut y = vec![0.0; d];
    let mut f = vec![0.0; c.support.len()];
    for p in 0..count {
        let (xp, zp) = (&x[p * d..(p + 1) * d], &z[p * d..(p + 1) * d]);
        for (k, &u) in c.support.iter().enumerate() {
            for j in 0..d {
                y[j] = if u.contains_bit(j) { xp[j] } else { zp[j] };
            }
            f[k] = model.value(&y);
            stats.evals += 1;
        }
        for (w, &v) in stats.support.iter_mut().zip(&f) {
            w.push(v);
        }
        for (j, s) in stats.specs.iter_mut().zip(&c.specs) {
            j.push(s.raw(&f), s.member_mean(&f));
        }
        stats.pairs += 1;
    }
    stats
}

fn chunks(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n.div_ceil(CHUNK)).map(move |i| (i * CHUNK, CHUNK.min(n - i * CHUNK)))
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers <= 1 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| GsiError::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// One [`Stats`] per source, each reduced in chunk order.
fn accumulate<S: PairSource>(c: &Compiled, model: &dyn Model, sources: &[S], workers: usize) -> Result<Vec<Stats>> {
    let jobs: Vec<(usize, usize, usize)> = sources
        .iter()
        .enumerate()
        .flat_map(|(r, s)| chunks(s.len()).map(move |(a, n)| (r, a, n)))
        .collect();
    let run = |&(r, a, n): &(usize, usize, usize)| run_chunk(c, model, &sources[r], a, n);
    let parts: Vec<Stats> = if workers <= 1 {
        jobs.iter().map(run).collect()
    } else {
        with_pool(workers, || jobs.par_iter().map(run).collect())?
    };
    let mut out: Vec<Stats> = sources.iter().map(|_| Stats::new(c)).collect();
    for ((r, _, _), part) in jobs.iter().zip(&parts) {
        out[*r].merge(part);
    }
    Ok(out)
}

fn streams(cfg: &SampleConfig, d: usize, replicates: usize) -> Vec<StreamSource> {
    (0..replicates as u64).map(|r| StreamSource { seed: cfg.seed, replicate: r, d, n: cfg.n }).collect()
}

/// Point value and per-pair standard error of one spec in one run.
fn finish(spec: &CompiledSpec, st: &Stats, idx: usize, correction: Correction) -> (f64, f64) {
    let j = &st.specs[idx];
    let n = j.t.n;
    let per_pair = |var: f64| spec.scale.abs() * (var.max(0.0) / n).sqrt();
    match correction {
        Correction::None => (spec.scale * j.t.mean, per_pair(j.t.sample_var())),
        Correction::MeanCorrected => {
            let mu = j.m.mean;
            let c = 2.0 * spec.mu_mult * mu;
            // delta method: influence of pair i is t_i − 2 M mu m_i
            let var = (j.t.m2 - 2.0 * c * j.cov + c * c * j.m.m2) / (n - 1.0);
            (spec.scale * (j.t.mean - spec.mu_mult * mu * mu), per_pair(var))
        }
        Correction::BiasCorrected => {
            let mut acc = j.t.mean;
            for &(a, b, w) in &spec.pairs {
                let (ua, ub) = (&st.support[a], &st.support[b]);
                let half = 0.5 * (ua.mean + ub.mean);
                acc -= w * (half * half - (ua.sample_var() + ub.sample_var()) / (4.0 * n));
            }
            (spec.scale * 2.0 * n / (2.0 * n - 1.0) * acc, f64::NAN)
        }
    }
}

fn observed_evals(st: &Stats) -> usize {
    if st.pairs == 0 {
        0
    } else {
        (st.evals / st.pairs) as usize
    }
}

fn single_result(spec: &GsiSpec, cs: &CompiledSpec, st: &Stats, correction: Correction) -> EstimateResult {
    let (estimate, std_error) = finish(cs, st, 0, correction);
    EstimateResult {
        estimate,
        std_error,
        n: st.pairs as usize,
        replicates: 1,
        evals_per_pair: observed_evals(st),
        total_evals: st.evals,
        kind: EstimatorKind::for_spec(spec, correction),
    }
}

/// The plug-in sample GSI on replicate stream 0: `scale · mean_i sum_uv Omega_uv F_i(u) F_i(v)`.
/// Square specs are evaluated as squared sums. `cfg.replicates` is not used.
pub fn estimate(spec: &GsiSpec, model: &dyn Model, cfg: &SampleConfig) -> Result<EstimateResult> {
    estimate_with(spec, model, cfg, Correction::None)
}

/// Mean-corrected estimate on replicate stream 0; see [`Correction::MeanCorrected`].
pub fn estimate_mean_corrected(spec: &GsiSpec, model: &dyn Model, cfg: &SampleConfig) -> Result<EstimateResult> {
    estimate_with(spec, model, cfg, Correction::MeanCorrected)
}

/// Dispatches on `correction`. Bias-corrected runs average `cfg.replicates` streams.
pub fn estimate_with(
    spec: &GsiSpec,
    model: &dyn Model,
    cfg: &SampleConfig,
    correction: Correction,
) -> Result<EstimateResult> {
    if correction == Correction::BiasCorrected {
        return estimate_bias_corrected(spec, model, cfg);
    }
    cfg.validate(1)?;
    let c = compile(&[spec], model)?;
    let st = accumulate(&c, model, &streams(cfg, c.d, 1), cfg.workers)?;
    Ok(single_result(spec, &c.specs[0], &st[0], correction))
}

/// Shared-evaluation estimates: each result equals [`estimate`] on the same config.
pub fn estimate_batch(specs: &[GsiSpec], model: &dyn Model, cfg: &SampleConfig) -> Result<BatchResult> {
    cfg.validate(1)?;
    let refs: Vec<&GsiSpec> = specs.iter().collect();
    let c = compile(&refs, model)?;
    let st = &accumulate(&c, model, &streams(cfg, c.d, 1), cfg.workers)?[0];
    let results = specs
        .iter()
        .zip(&c.specs)
        .enumerate()
        .map(|(i, (spec, cs))| {
            let (estimate, std_error) = finish(cs, st, i, Correction::None);
            EstimateResult {
                estimate,
                std_error,
                n: cfg.n,
                replicates: 1,
                evals_per_pair: cs.cost,
                total_evals: (cfg.n * cs.cost) as u64,
                kind: EstimatorKind::for_spec(spec, Correction::None),
            }
        })
        .collect();
    Ok(BatchResult { results, evals_per_pair: observed_evals(st), total_evals: st.evals })
}

/// Unbiased estimate of `scale · sum_uv Omega_uv (Theta_uv − mu²)`, averaged over
/// `cfg.replicates` independent streams; the standard error is the replicate
/// standard deviation over `sqrt(R)`. Contrasts need no correction and go to [`estimate`].
pub fn estimate_bias_corrected(spec: &GsiSpec, model: &dyn Model, cfg: &SampleConfig) -> Result<EstimateResult> {
    if spec.is_contrast() {
        return estimate(spec, model, cfg);
    }
    cfg.validate(2)?;
    let c = compile(&[spec], model)?;
    let stats = accumulate(&c, model, &streams(cfg, c.d, cfg.replicates), cfg.workers)?;
    let mut values = Welford::default();
    let mut evals = 0;
    for st in &stats {
        values.push(finish(&c.specs[0], st, 0, Correction::BiasCorrected).0);
        evals += st.evals;
    }
    let r = cfg.replicates as f64;
    Ok(EstimateResult {
        estimate: values.mean,
        std_error: if cfg.replicates > 1 { (values.sample_var() / r).sqrt() } else { f64::NAN },
        n: cfg.n,
        replicates: cfg.replicates,
        evals_per_pair: observed_evals(&stats[0]),
        total_evals: evals,
        kind: EstimatorKind::BiasCorrected,
    })
}

/// Unbiased two-evaluation estimate of the lower index of `u`.
pub fn lower_index_unbiased(u: SubsetMask, model: &dyn Model, cfg: &SampleConfig) -> Result<EstimateResult> {
    estimate_bias_corrected(&lower_index(u)?, model, cfg)
}

/// Any correction on explicit pairs; used for exhaustive checks.
pub fn estimate_on_pairs(
    spec: &GsiSpec,
    model: &dyn Model,
    pairs: &PairSet,
    correction: Correction,
) -> Result<EstimateResult> {
    if pairs.dim() != model.dim() {
        return Err(GsiError::DimensionMismatch { left: pairs.dim(), right: model.dim() });
    }
    let min = if correction == Correction::BiasCorrected { 2 } else { 1 };
    if pairs.n() < min {
        return Err(GsiError::SampleSize { n: pairs.n(), min });
    }
    let c = compile(&[spec], model)?;
    let st = accumulate(&c, model, std::slice::from_ref(pairs), 1)?;
    Ok(single_result(spec, &c.specs[0], &st[0], correction))
}

/// The scaled per-pair terms of replicate stream 0, in pair order.
pub fn pair_terms(spec: &GsiSpec, model: &dyn Model, cfg: &SampleConfig) -> Result<Vec<f64>> {
    cfg.validate(1)?;
    let c = compile(&[spec], model)?;
    let src = StreamSource { seed: cfg.seed, replicate: 0, d: c.d, n: cfg.n };
    let cs = &c.specs[0];
    let mut out = Vec::with_capacity(cfg.n);
    let (mut y, mut f) = (vec![0.0; c.d], vec![0.0; c.support.len()]);
    for (start, count) in chunks(cfg.n) {
        let (mut x, mut z) = (vec![0.0; count * c.d], vec![0.0; count * c.d]);
        src.fill(start, count, &mut x, &mut z);
        for p in 0..count {
            for (k, &u) in c.support.iter().enumerate() {
                for j in 0..c.d {
                    y[j] = if u.contains_bit(j) { x[p * c.d + j] } else { z[p * c.d + j] };
                }
                f[k] = model.value(&y);
            }
            out.push(cs.scale * cs.raw(&f));
        }
    }
    Ok(out)
}
