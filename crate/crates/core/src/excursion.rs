//! Return times of the restricted chain, increment symbols of threshold
//! counts, and regenerative sampling of the stationary law.
//!
//! Started empty, the chain restricted to `[0, q]` makes i.i.d. excursions
//! away from the empty set. For `q < p_c` their mean length is
//! `1 / (1 + ln(1 - q))`, or `1 / (1 - t)` with `t = -ln(1 - q)`, and every
//! functional of the stationary law is a ratio of per-cycle sums.

use serde::{Serialize, Serializer};

use crate::engine::{FullConfig, RestrictedArrival, RestrictedConfig};
use crate::error::{Error, Result};
use crate::position::{to_exp, ExpPos, UnitPos, P_C};
use crate::rng::RngStream;
use crate::stats::{map_blocks, BatchMeans, EstimateWithCI, IntMoments, DEFAULT_BATCHES};

/// Default cap on a single excursion, in restricted steps.
pub const DEFAULT_HORIZON: u64 = 100_000_000;

/// Excursions per parallel work unit.
const BLOCK: u64 = 4096;

/// Return-time values tallied individually (`tau = 1..=PMF_CAP`).
pub const PMF_CAP: usize = 64;

/// Expected return time, which is infinite from the critical point on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanReturn {
    Finite(f64),
    Infinite,
}

impl MeanReturn {
    pub fn finite(self) -> Option<f64> {
        match self {
            MeanReturn::Finite(x) => Some(x),
            MeanReturn::Infinite => None,
        }
    }
}

impl Serialize for MeanReturn {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MeanReturn::Finite(x) => s.serialize_f64(*x),
            MeanReturn::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `E[tau_q] = 1 / (1 + ln(1 - q))` for `q < p_c`, infinite otherwise.
pub fn closed_form_mean_return(q: f64) -> Result<MeanReturn> {
    let q = UnitPos::new(q)?;
    if q.value() >= P_C {
        return Ok(MeanReturn::Infinite);
    }
    Ok(MeanReturn::Finite(1.0 / (1.0 + (-q.value()).ln_1p())))
}

/// One excursion of the restricted chain away from the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExcursionSample {
    /// Return time; equals the horizon when censored.
    pub length: u64,
    pub peak_size: usize,
    /// The horizon was reached before the chain emptied.
    pub censored: bool,
}

/// Reusable excursion runner; keeps its particle buffer between excursions.
pub(crate) struct Excursions {
    cfg: RestrictedConfig,
}

impl Excursions {
    pub fn new(q: UnitPos) -> Self {
        Excursions {
            cfg: RestrictedConfig::new(q),
        }
    }

    /// Runs one excursion. With `stop_when_certain`, the run ends as soon as
    /// the current size exceeds the remaining budget: each step removes at
    /// most one particle, so such a run is censored for sure. The reported
    /// peak is then the peak so far.
    #[inline]
    pub fn run(&mut self, rng: &mut RngStream, horizon: u64, stop_when_certain: bool) -> ExcursionSample {
        let q = self.cfg.cutoff();
        self.cfg.clear();
        let mut peak = 0;
        for k in 1..=horizon {
            self.cfg.apply(RestrictedArrival::from_uniform(rng.uniform(), q));
            let size = self.cfg.len();
            if size == 0 {
                return ExcursionSample {
                    length: k,
                    peak_size: peak,
                    censored: false,
                };
            }
            peak = peak.max(size);
            if stop_when_certain && size as u64 > horizon - k {
                break;
            }
        }
        ExcursionSample {
            length: horizon,
            peak_size: peak,
            censored: true,
        }
    }
}

/// Runs one excursion of the chain restricted to `[0, q]` from the empty
/// state, for at most `horizon` steps.
pub fn sample_return_time(rng: &mut RngStream, q: f64, horizon: u64) -> Result<ExcursionSample> {
    let q = UnitPos::new(q)?;
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    Ok(Excursions::new(q).run(rng, horizon, false))
}

/// Tallies over a batch of excursions. Merging is exact and ordered.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnTimeTally {
    /// Moments of the completed (uncensored) lengths.
    pub completed: IntMoments,
    pub censored: u64,
    pub max_peak: usize,
    /// `pmf_counts[k - 1]` = number of excursions with `tau = k`.
    pub pmf_counts: Vec<u64>,
}

impl Default for ReturnTimeTally {
    fn default() -> Self {
        ReturnTimeTally {
            completed: IntMoments::default(),
            censored: 0,
            max_peak: 0,
            pmf_counts: vec![0; PMF_CAP],
        }
    }
}

impl ReturnTimeTally {
    fn push(&mut self, s: &ExcursionSample) {
        self.max_peak = self.max_peak.max(s.peak_size);
        if s.censored {
            self.censored += 1;
            return;
        }
        self.completed.push(s.length);
        if let Some(c) = self.pmf_counts.get_mut(s.length as usize - 1) {
            *c += 1;
        }
    }

    fn merge(mut self, other: ReturnTimeTally) -> Self {
        self.completed = self.completed.merge(other.completed);
        self.censored += other.censored;
        self.max_peak = self.max_peak.max(other.max_peak);
        for (a, b) in self.pmf_counts.iter_mut().zip(other.pmf_counts) {
            *a += b;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.completed.n + self.censored
    }
}

/// Runs excursions `0..n`, excursion `i` drawing from `RngStream::new(seed, i)`.
pub fn tally_return_times(q: f64, n: u64, seed: u64, horizon: u64) -> Result<ReturnTimeTally> {
    let q = UnitPos::new(q)?;
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let parts = map_blocks(n, BLOCK, |range| {
        let mut runner = Excursions::new(q);
        let mut tally = ReturnTimeTally::default();
        for i in range {
            let mut rng = RngStream::new(seed, i);
            // Censored excursions count at the horizon whether or not
            // they run to it, so stopping once survival is certain is exact.
            tally.push(&runner.run(&mut rng, horizon, true));
        }
        tally
    });
    Ok(parts.into_iter().fold(ReturnTimeTally::default(), ReturnTimeTally::merge))
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnTimeReport {
    pub q: f64,
    pub t: f64,
    pub n: u64,
    pub horizon: u64,
    pub closed_form: MeanReturn,
    pub estimate: EstimateWithCI,
    pub censored: u64,
    /// Censored excursions were counted at the horizon, so the mean is
    /// only a lower bound.
    pub lower_bound: bool,
    /// Largest excursion size seen; censored excursions stop growing once
    /// their survival is certain.
    pub max_peak: usize,
    #[serde(skip)]
    pub pmf_counts: Vec<u64>,
    pub warnings: Vec<String>,
}

impl ReturnTimeReport {
    /// Empirical `P[tau = k]` for `k <= PMF_CAP`.
    pub fn empirical_pmf(&self, k: usize) -> f64 {
        self.pmf_counts.get(k - 1).map_or(0.0, |&c| c as f64 / self.n as f64)
    }
}

/// Mean return time from `n` i.i.d. excursions with a plain standard error.
pub fn estimate_mean_return(q: f64, n: u64, seed: u64, horizon: u64) -> Result<ReturnTimeReport> {
    if n < 2 {
        return Err(Error::Precondition(format!("need at least 2 excursions, got {n}")));
    }
    let closed_form = closed_form_mean_return(q)?;
    let mut warnings = Vec::new();
    if closed_form == MeanReturn::Infinite {
        warnings.push(format!(
            "q = {q} is not below p_c = {P_C:.6}; the mean return time is infinite"
        ));
    }
    let tally = tally_return_times(q, n, seed, horizon)?;
    let mut all = tally.completed;
    for _ in 0..tally.censored {
        all.push(horizon);
    }
    if tally.censored > 0 {
        warnings.push(format!(
            "{} of {n} excursions hit the horizon {horizon}; the estimate is a lower bound",
            tally.censored
        ));
    }
    Ok(ReturnTimeReport {
        q,
        t: to_exp(q)?.value(),
        n,
        horizon,
        closed_form,
        estimate: all.estimate(),
        censored: tally.censored,
        lower_bound: tally.censored > 0,
        max_peak: tally.max_peak,
        pmf_counts: tally.pmf_counts,
        warnings,
    })
}

/// The four-valued increment of a threshold count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaSymbol {
    /// Empty before and after.
    Under0,
    /// Non-empty and unchanged.
    Over0,
    Minus1,
    Plus1,
}

impl DeltaSymbol {
    pub const ALL: [DeltaSymbol; 4] = [
        DeltaSymbol::Under0,
        DeltaSymbol::Over0,
        DeltaSymbol::Minus1,
        DeltaSymbol::Plus1,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[inline]
pub fn classify_delta(prev: u64, now: u64) -> Result<DeltaSymbol> {
    match (prev, now) {
        (0, 0) => Ok(DeltaSymbol::Under0),
        (p, n) if p == n => Ok(DeltaSymbol::Over0),
        (p, n) if n + 1 == p => Ok(DeltaSymbol::Minus1),
        (p, n) if p + 1 == n => Ok(DeltaSymbol::Plus1),
        (prev, now) => Err(Error::CorruptedStream { prev, now }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaDensities {
    pub under0: f64,
    pub over0: f64,
    pub minus1: f64,
    pub plus1: f64,
}

impl DeltaDensities {
    pub fn get(&self, s: DeltaSymbol) -> f64 {
        match s {
            DeltaSymbol::Under0 => self.under0,
            DeltaSymbol::Over0 => self.over0,
            DeltaSymbol::Minus1 => self.minus1,
            DeltaSymbol::Plus1 => self.plus1,
        }
    }

    fn from_array(a: [f64; 4]) -> Self {
        DeltaDensities {
            under0: a[0],
            over0: a[1],
            minus1: a[2],
            plus1: a[3],
        }
    }

    pub fn sum(&self) -> f64 {
        self.under0 + self.over0 + self.minus1 + self.plus1
    }
}

/// Stationary symbol densities at level `t < 1`:
/// `((1-t)e^{-t}, 1-(1+t)e^{-t}, te^{-t}, te^{-t})`.
pub fn closed_form_delta_densities(t: ExpPos) -> Result<DeltaDensities> {
    let t = t.value();
    if t >= 1.0 {
        return Err(Error::OutOfRange {
            what: "t (stationary densities exist only below t_c)",
            value: t,
            range: "[0, 1)",
        });
    }
    let e = (-t).exp();
    Ok(DeltaDensities {
        under0: (1.0 - t) * e,
        over0: 1.0 - (1.0 + t) * e,
        minus1: t * e,
        plus1: t * e,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaDensityEstimate {
    pub t: f64,
    pub q: f64,
    pub densities: DeltaDensities,
    /// Batch-means standard errors per symbol.
    pub stderr: DeltaDensities,
    pub counts: [u64; 4],
    pub closed_form: DeltaDensities,
    /// Count at the threshold at the end of burn-in and at the end.
    pub count_after_burnin: u64,
    pub final_count: u64,
}

impl DeltaDensityEstimate {
    pub fn max_abs_deviation(&self) -> f64 {
        DeltaSymbol::ALL
            .iter()
            .map(|&s| (self.densities.get(s) - self.closed_form.get(s)).abs())
            .fold(0.0, f64::max)
    }
}

/// Symbol frequencies of the threshold counts `F_t(k) = |X_k ∩ [0, q(t)]|`
/// of one full chain started empty (stream `(seed, 0)`), over `steps`
/// steps after `burnin` discarded ones.
pub fn estimate_delta_densities(
    t_grid: &[f64],
    steps: u64,
    burnin: u64,
    seed: u64,
) -> Result<Vec<DeltaDensityEstimate>> {
    if steps == 0 {
        return Err(Error::Precondition("steps must be at least 1".into()));
    }
    let mut grid = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let t = ExpPos::new(t)?;
        grid.push((t, t.to_unit(), closed_form_delta_densities(t)?));
    }
    let mut cfg = FullConfig::with_thresholds(grid.iter().map(|g| g.1).collect());
    let slot: Vec<usize> = {
        let idx = cfg.thresholds().expect("index enabled");
        grid.iter()
            .map(|g| idx.thresholds().binary_search(&g.1).expect("threshold present"))
            .collect()
    };
    let n_idx = cfg.thresholds().map_or(0, |i| i.len());
    let mut rng = RngStream::new(seed, 0);

    for _ in 0..burnin {
        cfg.try_step(rng.uniform())?;
    }
    let mut prev = Vec::with_capacity(n_idx);
    cfg.thresholds().expect("index enabled").counts_into(&mut prev);
    let after_burnin = prev.clone();
    let mut now = Vec::with_capacity(n_idx);
    let mut counts = vec![[0u64; 4]; n_idx];
    let mut batches: Vec<[BatchMeans; 4]> = (0..n_idx)
        .map(|_| std::array::from_fn(|_| BatchMeans::new(steps, DEFAULT_BATCHES)))
        .collect();

    for _ in 0..steps {
        cfg.try_step(rng.uniform())?;
        cfg.thresholds().expect("index enabled").counts_into(&mut now);
        for j in 0..n_idx {
            let sym = classify_delta(prev[j], now[j])?.index();
            counts[j][sym] += 1;
            for (s, bm) in batches[j].iter_mut().enumerate() {
                bm.push(if s == sym { 1.0 } else { 0.0 });
            }
        }
        std::mem::swap(&mut prev, &mut now);
    }

    Ok(grid
        .iter()
        .zip(&slot)
        .map(|(&(t, q, closed_form), &j)| {
            let dens = counts[j].map(|c| c as f64 / steps as f64);
            let se: [f64; 4] = std::array::from_fn(|s| batches[j][s].estimate().stderr);
            DeltaDensityEstimate {
                t: t.value(),
                q: q.value(),
                densities: DeltaDensities::from_array(dens),
                stderr: DeltaDensities::from_array(se),
                counts: counts[j],
                closed_form,
                count_after_burnin: after_burnin[j],
                final_count: prev[j],
            }
        })
        .collect())
}

/// Per-run bookkeeping of regenerative sampling.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CycleCounts {
    pub cycles: u64,
    pub states: u64,
    pub empty_states: u64,
}

impl CycleCounts {
    fn merge(mut self, o: CycleCounts) -> Self {
        self.cycles += o.cycles;
        self.states += o.states;
        self.empty_states += o.empty_states;
        self
    }
}

fn check_subcritical(q: f64) -> Result<UnitPos> {
    let q = UnitPos::new(q)?;
    if q.value() >= P_C {
        return Err(Error::Precondition(format!(
            "stationary sampling needs q < p_c = {P_C:.6}, got {}",
            q.value()
        )));
    }
    Ok(q)
}

fn run_cycles<F: FnMut(&RestrictedConfig)>(
    q: UnitPos,
    cycles: std::ops::Range<u64>,
    seed: u64,
    horizon: u64,
    visit: &mut F,
) -> Result<CycleCounts> {
    let mut cfg = RestrictedConfig::new(q);
    let mut out = CycleCounts::default();
    for c in cycles {
        let mut rng = RngStream::new(seed, c);
        cfg.clear();
        visit(&cfg);
        out.states += 1;
        out.empty_states += 1;
        let mut k = 0u64;
        loop {
            cfg.apply(RestrictedArrival::from_uniform(rng.uniform(), q));
            k += 1;
            if cfg.is_empty() {
                break;
            }
            if k >= horizon {
                return Err(Error::Censored { cycle: c, horizon });
            }
            visit(&cfg);
            out.states += 1;
        }
        out.cycles += 1;
    }
    Ok(out)
}

/// Runs complete excursions from the empty state and hands every visited
/// state to `visit`, once per visit: the empty start of each cycle and every
/// non-empty state before the return. The empirical law of the visited
/// states is an unbiased ratio estimator of the unique invariant law.
///
/// Cycle `c` draws from `RngStream::new(seed, c)`.
pub fn sample_stationary_states<F: FnMut(&RestrictedConfig)>(
    q: f64,
    cycles: u64,
    seed: u64,
    horizon: u64,
    mut visit: F,
) -> Result<StationarySummary> {
    let q = check_subcritical(q)?;
    if cycles == 0 {
        return Err(Error::Precondition("cycles must be at least 1".into()));
    }
    let counts = run_cycles(q, 0..cycles, seed, horizon, &mut visit)?;
    StationarySummary::new(q, counts)
}

/// Parallel fold over the states of cycles `0..cycles`. Cycles are grouped
/// into fixed blocks, each folded from `init()`, and the block results are
/// merged in block order.
pub fn fold_stationary_states<A, I, V, M>(
    q: f64,
    cycles: u64,
    seed: u64,
    horizon: u64,
    init: I,
    visit: V,
    merge: M,
) -> Result<(A, StationarySummary)>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &RestrictedConfig) + Sync,
    M: Fn(A, A) -> A,
{
    let q = check_subcritical(q)?;
    if cycles == 0 {
        return Err(Error::Precondition("cycles must be at least 1".into()));
    }
    let parts = map_blocks(cycles, BLOCK, |range| {
        let mut acc = init();
        let counts = run_cycles(q, range, seed, horizon, &mut |s| visit(&mut acc, s))?;
        Ok((acc, counts))
    });
    let mut acc = init();
    let mut counts = CycleCounts::default();
    for part in parts {
        let (a, c) = part?;
        acc = merge(acc, a);
        counts = counts.merge(c);
    }
    Ok((acc, StationarySummary::new(q, counts)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarySummary {
    pub q: f64,
    pub t: f64,
    #[serde(flatten)]
    pub counts: CycleCounts,
    pub empty_fraction: f64,
    /// `1 - t`, the stationary probability of the empty state.
    pub empty_fraction_target: f64,
    pub mean_cycle_length: f64,
    pub closed_form_mean_return: MeanReturn,
}

impl StationarySummary {
    fn new(q: UnitPos, counts: CycleCounts) -> Result<Self> {
        let t = q.to_exp().value();
        Ok(StationarySummary {
            q: q.value(),
            t,
            empty_fraction: counts.empty_states as f64 / counts.states as f64,
            empty_fraction_target: 1.0 - t,
            mean_cycle_length: counts.states as f64 / counts.cycles as f64,
            closed_form_mean_return: closed_form_mean_return(q.value())?,
            counts,
        })
    }
}

/// Grid points for the minimum's tail function.
pub const MIN_LAW_GRID: usize = 100;

#[derive(Clone, Debug, Serialize)]
pub struct MinLawReport {
    pub q: f64,
    /// Cutoff in exponential coordinates; the empty state sits here.
    pub t_plus: f64,
    pub summary: StationarySummary,
    /// `sup_s |P[N > s] - (1 - s)|` over the grid.
    pub max_deviation: f64,
    pub grid: Vec<MinLawPoint>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MinLawPoint {
    pub s: f64,
    pub empirical: f64,
    pub target: f64,
}

/// Compares the stationary law of the restricted minimum `N` (exponential
/// coordinates, empty state at `t_+`) with `P[N > s] = 1 - s` on a
/// 100-point grid of `[0, t_+)`. Runs whole cycles, in waves of fixed
/// blocks, until at least `n_samples` states have been emitted.
pub fn stationary_min_uniformity(q: f64, n_samples: u64, seed: u64, horizon: u64) -> Result<MinLawReport> {
    let qp = check_subcritical(q)?;
    let t_plus = qp.to_exp().value();
    // For q = 0 the interval [0, t_+) is empty and so is the grid.
    let grid: Vec<f64> = if t_plus > 0.0 {
        (0..MIN_LAW_GRID)
            .map(|i| t_plus * i as f64 / MIN_LAW_GRID as f64)
            .collect()
    } else {
        Vec::new()
    };

    // bins[b] = number of states with exactly b grid points strictly below N.
    let bin_of = |s: &RestrictedConfig| -> usize {
        let n = s.minimum_exp().map_or(t_plus, |e| e.value());
        grid.partition_point(|&g| g < n)
    };

    const WAVE: u64 = 16;
    let mut bins = vec![0u64; MIN_LAW_GRID + 1];
    let mut counts = CycleCounts::default();
    let mut next_block = 0u64;
    while counts.states < n_samples.max(1) {
        let first = next_block;
        let parts = map_blocks(WAVE, 1, |r| {
            let block = first + r.start;
            let mut local = vec![0u64; MIN_LAW_GRID + 1];
            let c = run_cycles(qp, block * BLOCK..(block + 1) * BLOCK, seed, horizon, &mut |s| {
                local[bin_of(s)] += 1
            })?;
            Ok::<_, Error>((local, c))
        });
        for part in parts {
            let (local, c) = part?;
            for (a, b) in bins.iter_mut().zip(local) {
                *a += b;
            }
            counts = counts.merge(c);
            next_block += 1;
            if counts.states >= n_samples {
                break;
            }
        }
    }

    let total = counts.states as f64;
    let mut above = counts.states;
    let mut points = Vec::with_capacity(MIN_LAW_GRID);
    let mut max_deviation = 0.0f64;
    for (i, &s) in grid.iter().enumerate() {
        // States with N > grid[i] are those with more than i grid points below N.
        above -= bins[i];
        let empirical = above as f64 / total;
        let target = 1.0 - s;
        max_deviation = max_deviation.max((empirical - target).abs());
        points.push(MinLawPoint { s, empirical, target });
    }
    Ok(MinLawReport {
        q,
        t_plus,
        summary: StationarySummary::new(qp, counts)?,
        max_deviation,
        grid: points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, RunMode, RunSpec, StepRecord};

    fn finite(q: f64) -> f64 {
        closed_form_mean_return(q).unwrap().finite().unwrap()
    }

    #[test]
    fn closed_form_mean_examples() {
        assert_eq!(finite(0.0), 1.0);
        assert!((finite(0.5) - 3.258_891).abs() < 1e-6);
        assert!((finite(0.3) - 1.554_424).abs() < 1e-6);
        assert!((finite(0.6) - 11.946_109).abs() < 1e-6);
        assert_eq!(closed_form_mean_return(P_C).unwrap(), MeanReturn::Infinite);
        assert_eq!(closed_form_mean_return(0.9).unwrap(), MeanReturn::Infinite);
        assert!(closed_form_mean_return(1.0).is_err());
    }

    #[test]
    fn zero_cutoff_returns_immediately() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..1000 {
            let s = sample_return_time(&mut rng, 0.0, 10).unwrap();
            assert_eq!(s, ExcursionSample { length: 1, peak_size: 0, censored: false });
        }
        let r = estimate_mean_return(0.0, 1000, 1, 10).unwrap();
        assert_eq!(r.estimate.mean, 1.0);
        assert_eq!(r.estimate.stderr, 0.0);
    }

    #[test]
    fn censoring_is_flagged() {
        let mut rng = RngStream::new(3, 0);
        let mut saw = false;
        for _ in 0..200 {
            let s = sample_return_time(&mut rng, 0.6, 3).unwrap();
            assert!(s.length >= 1 && s.length <= 3);
            if s.censored {
                assert_eq!(s.length, 3);
                saw = true;
            }
        }
        assert!(saw);
        let r = estimate_mean_return(0.6, 2000, 5, 3).unwrap();
        assert!(r.lower_bound && r.censored > 0 && !r.warnings.is_empty());
        assert!(sample_return_time(&mut rng, 0.5, 0).is_err());
        assert!(estimate_mean_return(0.5, 1, 5, 10).is_err());
    }

    #[test]
    fn estimate_is_independent_of_block_scheduling() {
        let a = tally_return_times(0.5, 10_000, 77, DEFAULT_HORIZON).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| tally_return_times(0.5, 10_000, 77, DEFAULT_HORIZON).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn small_sample_mean_is_consistent() {
        let r = estimate_mean_return(0.5, 200_000, 11, DEFAULT_HORIZON).unwrap();
        assert!(r.estimate.z_score(finite(0.5)) < 4.0, "{:?}", r.estimate);
        // P[tau = 1] = 1 - q, P[tau = 2] = q (1 - q).
        let sd = crate::stats::binomial_sd(0.5, r.n);
        assert!((r.empirical_pmf(1) - 0.5).abs() < 4.0 * sd);
        let sd = crate::stats::binomial_sd(0.25, r.n);
        assert!((r.empirical_pmf(2) - 0.25).abs() < 4.0 * sd);
    }

    #[test]
    fn classify_examples() {
        use DeltaSymbol::*;
        assert_eq!(classify_delta(0, 0).unwrap(), Under0);
        assert_eq!(classify_delta(3, 3).unwrap(), Over0);
        assert_eq!(classify_delta(3, 2).unwrap(), Minus1);
        assert_eq!(classify_delta(3, 4).unwrap(), Plus1);
        assert_eq!(classify_delta(0, 1).unwrap(), Plus1);
        assert_eq!(classify_delta(1, 0).unwrap(), Minus1);
        assert!(matches!(classify_delta(3, 5), Err(Error::CorruptedStream { prev: 3, now: 5 })));
        assert!(classify_delta(2, 0).is_err());
    }

    #[test]
    fn closed_form_densities() {
        let d = closed_form_delta_densities(ExpPos::new(0.0).unwrap()).unwrap();
        assert_eq!((d.under0, d.over0, d.minus1, d.plus1), (1.0, 0.0, 0.0, 0.0));
        let d = closed_form_delta_densities(ExpPos::new(0.5).unwrap()).unwrap();
        assert!((d.under0 - 0.303_265).abs() < 1e-6);
        assert!((d.over0 - 0.090_204).abs() < 1e-6);
        assert!((d.minus1 - 0.303_265).abs() < 1e-6);
        assert!((d.plus1 - 0.303_265).abs() < 1e-6);
        for i in 0..1000 {
            let t = i as f64 / 1000.0;
            let d = closed_form_delta_densities(ExpPos::new(t).unwrap()).unwrap();
            assert!((d.sum() - 1.0).abs() < 1e-9);
            for s in DeltaSymbol::ALL {
                assert!((0.0..=1.0).contains(&d.get(s)));
            }
        }
        assert!(closed_form_delta_densities(ExpPos::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn symbol_bookkeeping_matches_final_count() {
        let q = crate::from_exp(0.7).unwrap();
        let spec = RunSpec {
            mode: RunMode::Full { thresholds: vec![q] },
            ..RunSpec::full(21, 50_000)
        };
        let mut prev = 0u64;
        let mut net = 0i64;
        let mut last = 0u64;
        let mut obs = |r: &StepRecord<'_>| {
            match classify_delta(prev, r.counts[0]).unwrap() {
                DeltaSymbol::Plus1 => net += 1,
                DeltaSymbol::Minus1 => net -= 1,
                _ => {}
            }
            prev = r.counts[0];
            last = r.counts[0];
        };
        run(&spec, &mut [&mut obs]).unwrap();
        assert_eq!(net, last as i64);
    }

    #[test]
    fn delta_estimates_close_at_moderate_length() {
        let est = estimate_delta_densities(&[0.5, 0.2], 400_000, 50_000, 4).unwrap();
        assert_eq!(est.len(), 2);
        for e in &est {
            assert!((e.densities.sum() - 1.0).abs() < 1e-12);
            assert!(e.max_abs_deviation() < 0.02, "{e:?}");
            let net = e.counts[3] as i64 - e.counts[2] as i64;
            assert_eq!(net, e.final_count as i64 - e.count_after_burnin as i64);
        }
        assert!(estimate_delta_densities(&[1.0], 10, 0, 4).is_err());
        assert!(estimate_delta_densities(&[0.5], 0, 0, 4).is_err());
    }

    #[test]
    fn zero_cutoff_stationary_states_are_empty() {
        let mut seen = 0;
        let s = sample_stationary_states(0.0, 100, 1, 10, |c| {
            assert!(c.is_empty());
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 100);
        assert_eq!(s.counts.states, 100);
        assert_eq!(s.empty_fraction, 1.0);
        let m = stationary_min_uniformity(0.0, 1000, 1, 10).unwrap();
        assert_eq!(m.max_deviation, 0.0);
        assert!(m.grid.is_empty());
    }

    #[test]
    fn stationary_sampling_rejects_bad_input() {
        assert!(sample_stationary_states(0.7, 10, 1, 10, |_| {}).is_err());
        assert!(sample_stationary_states(0.3, 0, 1, 10, |_| {}).is_err());
        let err = sample_stationary_states(0.6, 1000, 1, 2, |_| {}).unwrap_err();
        assert!(matches!(err, Error::Censored { horizon: 2, .. }));
    }

    #[test]
    fn stationary_renewal_identity_at_small_scale() {
        let q = crate::from_exp(0.5).unwrap().value();
        let mut sizes = 0u64;
        let s = sample_stationary_states(q, 50_000, 8, DEFAULT_HORIZON, |c| sizes += c.len() as u64)
            .unwrap();
        assert!((s.empty_fraction - 0.5).abs() < 0.02, "{s:?}");
        assert!((s.mean_cycle_length - 2.0).abs() < 0.1, "{s:?}");
        assert!(sizes > 0);
        let (acc, par) = fold_stationary_states(
            q, 50_000, 8, DEFAULT_HORIZON,
            || 0u64, |a, c| *a += c.len() as u64, |a, b| a + b,
        )
        .unwrap();
        assert_eq!(acc, sizes);
        assert_eq!(par.counts, s.counts);
    }

    #[test]
    fn min_law_grid_targets() {
        let q = crate::from_exp(0.5).unwrap().value();
        let m = stationary_min_uniformity(q, 100_000, 2, DEFAULT_HORIZON).unwrap();
        assert!((m.t_plus - 0.5).abs() < 1e-12);
        assert_eq!(m.grid.len(), MIN_LAW_GRID);
        let p = m.grid[50];
        assert!((p.s - 0.25).abs() < 1e-12 && (p.target - 0.75).abs() < 1e-12);
        assert_eq!(m.grid[0].empirical, 1.0);
        assert!(m.summary.counts.states >= 100_000);
        assert!(m.max_deviation < 0.03, "{}", m.max_deviation);
    }
}
