//! Disorder ensembles.
//!
//! Realization `r` (0-based) of an ensemble uses seed `base_seed + r`. Each
//! realization is one task; results are folded into per-cell compensated
//! sums strictly in realization order, so the output does not depend on the
//! number of workers.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{realize, DisorderKind, RingSize, MAX_DELTA};
use crate::spectral::eigendecompose;
use crate::wigner::{
    finite_time_average, trapezoid_schedule, wigner_at, wigner_longtime, GridMeta,
    PhaseSpaceGrid, TimeLabel,
};

/// Default number of disorder realizations per ensemble.
pub const DEFAULT_REALIZATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub n: RingSize,
    pub j: usize,
    pub kind: DisorderKind,
    pub delta: f64,
    pub r: usize,
    pub base_seed: u64,
    pub times: Vec<f64>,
    /// Absolute degeneracy tolerance; `None` picks a relative default.
    pub eps_deg: Option<f64>,
    /// Permit strengths above 1/2.
    pub uncapped: bool,
}

impl EnsembleSpec {
    pub fn new(
        n: RingSize,
        j: usize,
        kind: DisorderKind,
        delta: f64,
        r: usize,
        base_seed: u64,
    ) -> Self {
        Self {
            n,
            j,
            kind,
            delta,
            r,
            base_seed,
            times: Vec::new(),
            eps_deg: None,
            uncapped: false,
        }
    }

    pub fn with_times(mut self, times: impl Into<Vec<f64>>) -> Self {
        self.times = times.into();
        self
    }

    pub fn seed_for(&self, realization: usize) -> u64 {
        self.base_seed.wrapping_add(realization as u64)
    }

    pub fn validate(&self) -> Result<()> {
        self.n.check_node(self.j)?;
        if self.r == 0 {
            return Err(Error::InvalidSpec("realization count must be at least 1".into()));
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(Error::InvalidDelta(self.delta));
        }
        if !self.uncapped && self.delta > MAX_DELTA {
            return Err(Error::DeltaOutOfRange(self.delta));
        }
        if let Some(t) = self.times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidSpec(format!("invalid time {t}")));
        }
        Ok(())
    }

    fn meta(&self, time: TimeLabel, r: usize) -> GridMeta {
        GridMeta {
            n: self.n.get(),
            j: self.j,
            time,
            kind: self.kind,
            delta: self.delta,
            seed: self.base_seed,
            r,
        }
    }
}

/// Ensemble means, one grid per requested time (in request order), followed
/// by the long-time grid when it was requested.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub grids: Vec<PhaseSpaceGrid>,
    pub r_completed: usize,
    pub spec: EnsembleSpec,
}

impl EnsembleResult {
    pub fn grid(&self, time: TimeLabel) -> Option<&PhaseSpaceGrid> {
        self.grids.iter().find(|g| g.meta.time == time)
    }

    pub fn longtime(&self) -> Option<&PhaseSpaceGrid> {
        self.grid(TimeLabel::LongTime)
    }

    /// Weighted mean of two partial results over disjoint realizations.
    pub fn merge(&self, other: &EnsembleResult) -> Result<EnsembleResult> {
        if self.grids.len() != other.grids.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grids.len(),
                got: other.grids.len(),
            });
        }
        let total = self.r_completed + other.r_completed;
        let (wa, wb) = (
            self.r_completed as f64 / total as f64,
            other.r_completed as f64 / total as f64,
        );
        let grids = self
            .grids
            .iter()
            .zip(&other.grids)
            .map(|(a, b)| {
                let mut meta = a.meta.clone();
                meta.r = total;
                let w = a.values().iter().zip(b.values()).map(|(x, y)| wa * x + wb * y).collect();
                PhaseSpaceGrid::from_values(meta, w)
            })
            .collect::<Result<_>>()?;
        let mut spec = self.spec.clone();
        spec.r = total;
        Ok(EnsembleResult {
            grids,
            r_completed: total,
            spec,
        })
    }
}

/// Per-cell Neumaier-compensated running sum.
#[derive(Debug, Clone)]
pub struct GridAccumulator {
    sum: Vec<f64>,
    comp: Vec<f64>,
    count: usize,
}

impl GridAccumulator {
    pub fn new(cells: usize) -> Self {
        Self {
            sum: vec![0.0; cells],
            comp: vec![0.0; cells],
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.sum.len(), "accumulator size mismatch");
        for ((s, c), &v) in self.sum.iter_mut().zip(&mut self.comp).zip(values) {
            neumaier(s, c, v);
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &GridAccumulator) {
        assert_eq!(other.sum.len(), self.sum.len(), "accumulator size mismatch");
        for i in 0..self.sum.len() {
            neumaier(&mut self.sum[i], &mut self.comp[i], other.sum[i]);
            neumaier(&mut self.sum[i], &mut self.comp[i], other.comp[i]);
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> Vec<f64> {
        let inv = 1.0 / self.count.max(1) as f64;
        self.sum.iter().zip(&self.comp).map(|(s, c)| (s + c) * inv).collect()
    }
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

/// Progress hook, called with `(realizations_done, total)` from the reducing
/// thread in realization order.
pub type Progress<'a> = dyn Fn(usize, usize) + Sync + 'a;

/// Execution options for ensemble sweeps.
#[derive(Default, Clone, Copy)]
pub struct EnsembleRunner<'a> {
    workers: Option<usize>,
    progress: Option<&'a Progress<'a>>,
}

impl<'a> EnsembleRunner<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Caps the worker count; `None` or `0` uses all available cores.
    pub fn workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers.filter(|&w| w > 0);
        self
    }

    pub fn on_progress(mut self, progress: &'a Progress<'a>) -> Self {
        self.progress = Some(progress);
        self
    }

    /// Ensemble-mean snapshots at `spec.times`.
    pub fn snapshot(&self, spec: &EnsembleSpec) -> Result<EnsembleResult> {
        if spec.times.is_empty() {
            return Err(Error::InvalidSpec("no times requested".into()));
        }
        self.run(spec, false)
    }

    /// Ensemble mean of exact per-realization long-time averages.
    pub fn longtime(&self, spec: &EnsembleSpec) -> Result<EnsembleResult> {
        let mut spec = spec.clone();
        spec.times.clear();
        self.run(&spec, true)
    }

    /// Snapshots at `spec.times` plus the long-time grid from the same
    /// eigendecompositions.
    pub fn full(&self, spec: &EnsembleSpec) -> Result<EnsembleResult> {
        self.run(spec, true)
    }

    fn run(&self, spec: &EnsembleSpec, with_longtime: bool) -> Result<EnsembleResult> {
        spec.validate()?;
        let n_grids = spec.times.len() + usize::from(with_longtime);
        let accs = self.fold(spec, 0..spec.r, n_grids, |index| {
            let seed = spec.seed_for(index);
            let h = realize(spec.n, spec.kind, spec.delta, seed, spec.uncapped)?;
            let es = eigendecompose(&h, spec.eps_deg)?;
            let mut out = Vec::with_capacity(n_grids);
            for &t in &spec.times {
                out.push(wigner_at(&es, spec.j, t)?.values().to_vec());
            }
            if with_longtime {
                out.push(wigner_longtime(&es, spec.j)?.values().to_vec());
            }
            Ok(out)
        })?;
        let labels = spec
            .times
            .iter()
            .map(|&t| TimeLabel::At(t))
            .chain(with_longtime.then_some(TimeLabel::LongTime));
        let grids = labels
            .zip(&accs)
            .map(|(label, acc)| PhaseSpaceGrid::from_values(spec.meta(label, spec.r), acc.mean()))
            .collect::<Result<_>>()?;
        Ok(EnsembleResult {
            grids,
            r_completed: spec.r,
            spec: spec.clone(),
        })
    }

    /// Evaluates `task` for every realization index in `range` and folds its
    /// grids into accumulators in index order.
    fn fold<F>(
        &self,
        spec: &EnsembleSpec,
        range: Range<usize>,
        n_grids: usize,
        task: F,
    ) -> Result<Vec<GridAccumulator>>
    where
        F: Fn(usize) -> Result<Vec<Vec<f64>>> + Sync,
    {
        let cells = spec.n.get() * spec.n.get();
        let mut accs = vec![GridAccumulator::new(cells); n_grids];
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            builder = builder.num_threads(w);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
        // Bounded batches keep peak memory proportional to the worker count.
        let batch = 8 * pool.current_num_threads();
        let total = range.len();
        let mut done = 0;
        let indices: Vec<usize> = range.collect();
        for chunk in indices.chunks(batch) {
            let results: Vec<Result<Vec<Vec<f64>>>> =
                pool.install(|| chunk.par_iter().map(|&i| task(i)).collect());
            for (&index, result) in chunk.iter().zip(results) {
                let grids = result.map_err(|e| Error::Realization {
                    index,
                    source: Box::new(e),
                })?;
                for (acc, g) in accs.iter_mut().zip(&grids) {
                    acc.add(g);
                }
                done += 1;
                if let Some(p) = self.progress {
                    p(done, total);
                }
            }
        }
        Ok(accs)
    }
}

pub fn ensemble_snapshot(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    EnsembleRunner::new().snapshot(spec)
}

pub fn ensemble_longtime(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    EnsembleRunner::new().longtime(spec)
}

/// Outcome of [`verify_interchange`].
#[derive(Debug, Clone)]
pub struct InterchangeReport {
    pub max_dev: f64,
    /// Ensemble mean of per-realization time averages.
    pub mean_of_time_averages: PhaseSpaceGrid,
    /// Time average of ensemble-mean snapshots.
    pub time_average_of_means: PhaseSpaceGrid,
}

/// Largest ring accepted by [`verify_interchange`].
pub const INTERCHANGE_MAX_N: usize = 31;
/// Largest ensemble accepted by [`verify_interchange`].
pub const INTERCHANGE_MAX_R: usize = 50;

/// Compares the two orders of taking the finite-window time average and the
/// ensemble average over the same sample times.
pub fn verify_interchange(
    spec: &EnsembleSpec,
    t_max: f64,
    n_samples: usize,
) -> Result<InterchangeReport> {
    spec.validate()?;
    if spec.n.get() > INTERCHANGE_MAX_N || spec.r > INTERCHANGE_MAX_R {
        return Err(Error::InvalidSpec(format!(
            "interchange check is limited to N <= {INTERCHANGE_MAX_N} and R <= {INTERCHANGE_MAX_R}"
        )));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) || n_samples < 2 {
        return Err(Error::InvalidSpec(format!(
            "time window needs t_max >= 0 and at least 2 samples (got {t_max}, {n_samples})"
        )));
    }
    let runner = EnsembleRunner::new();

    let accs = runner.fold(spec, 0..spec.r, 1, |index| {
        let h = realize(spec.n, spec.kind, spec.delta, spec.seed_for(index), spec.uncapped)?;
        let es = eigendecompose(&h, spec.eps_deg)?;
        Ok(vec![finite_time_average(&es, spec.j, t_max, n_samples)?.values().to_vec()])
    })?;
    let label = TimeLabel::Average(t_max);
    let mean_of_time_averages = PhaseSpaceGrid::from_values(spec.meta(label, spec.r), accs[0].mean())?;

    let schedule = trapezoid_schedule(t_max, n_samples);
    let snap_spec = spec.clone().with_times(schedule.iter().map(|p| p.0).collect::<Vec<_>>());
    let snaps = runner.snapshot(&snap_spec)?;
    let mut time_average_of_means = PhaseSpaceGrid::zeros(spec.meta(label, spec.r));
    for ((_, weight), g) in schedule.iter().zip(&snaps.grids) {
        for (o, v) in time_average_of_means.values_mut().iter_mut().zip(g.values()) {
            *o += weight * v;
        }
    }

    let max_dev = mean_of_time_averages.max_abs_diff(&time_average_of_means);
    Ok(InterchangeReport {
        max_dev,
        mean_of_time_averages,
        time_average_of_means,
    })
}
