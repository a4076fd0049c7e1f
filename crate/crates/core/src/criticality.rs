//! Transience and recurrence diagnostics around `p_c = 1 - e^{-1}`.
//!
//! Survival is observed as `tau > horizon`, which overestimates
//! `P[tau = inf]` at any finite horizon. An excursion whose size exceeds the
//! remaining step budget is certain to survive and is stopped early.
//!
//! All estimators share replica streams across `q`: excursion `i` draws from
//! `RngStream::new(seed, i)` whatever the cutoff. Under this coupling the
//! chain at a smaller cutoff is the restriction of the one at a larger
//! cutoff, so survival is pathwise monotone in `q`.

use serde::Serialize;

use crate::engine::FullConfig;
use crate::error::{Error, Result};
use crate::excursion::Excursions;
use crate::position::{from_exp, ExpPos, UnitPos, P_C};
use crate::rng::RngStream;
use crate::stats::{fit_line, map_blocks, wilson_interval, LineFit, Z_95};

const BLOCK: u64 = 256;

/// Survival level separating the two probe classes.
pub const SURVIVAL_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub q: f64,
    pub horizon: u64,
    pub replicas: u64,
    pub survivors: u64,
    pub surviving_fraction: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_halfwidth: f64,
}

impl SurvivalEstimate {
    fn new(q: f64, horizon: u64, replicas: u64, survivors: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(survivors, replicas, Z_95);
        SurvivalEstimate {
            q,
            horizon,
            replicas,
            survivors,
            surviving_fraction: survivors as f64 / replicas as f64,
            ci_low,
            ci_high,
            ci_halfwidth: (ci_high - ci_low) / 2.0,
        }
    }
}

fn check_replicas(replicas: u64) -> Result<()> {
    if replicas == 0 {
        return Err(Error::Precondition("replicas must be at least 1".into()));
    }
    Ok(())
}

/// Fraction of excursions from the empty set that are still alive after
/// `horizon` steps. A zero horizon is survived by every excursion.
pub fn estimate_survival(q: f64, horizon: u64, replicas: u64, seed: u64) -> Result<SurvivalEstimate> {
    let cutoff = UnitPos::new(q)?;
    check_replicas(replicas)?;
    if horizon == 0 {
        return Ok(SurvivalEstimate::new(q, 0, replicas, replicas));
    }
    let survivors = map_blocks(replicas, BLOCK, |range| {
        let mut runner = Excursions::new(cutoff);
        range
            .filter(|&i| runner.run(&mut RngStream::new(seed, i), horizon, true).censored)
            .count() as u64
    })
    .into_iter()
    .sum();
    Ok(SurvivalEstimate::new(q, horizon, replicas, survivors))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeClass {
    Recurrent,
    Transient,
}

impl ProbeClass {
    pub fn label(self) -> &'static str {
        match self {
            ProbeClass::Recurrent => "recurrent",
            ProbeClass::Transient => "transient",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub survival: SurvivalEstimate,
    pub class: ProbeClass,
    /// Decided by the point estimate after the replica doubling was still
    /// inconclusive.
    pub tie_break: bool,
}

/// Classifies `q`: recurrent when the upper 95% bound on survival is below
/// [`SURVIVAL_THRESHOLD`], transient when the lower bound is above it.
/// Otherwise the replica count is doubled once, and if that is still
/// inconclusive the point estimate decides.
pub fn classify(q: f64, horizon: u64, replicas: u64, seed: u64) -> Result<Probe> {
    let decide = |s: &SurvivalEstimate| {
        if s.ci_high < SURVIVAL_THRESHOLD {
            Some(ProbeClass::Recurrent)
        } else if s.ci_low > SURVIVAL_THRESHOLD {
            Some(ProbeClass::Transient)
        } else {
            None
        }
    };
    let first = estimate_survival(q, horizon, replicas, seed)?;
    if let Some(class) = decide(&first) {
        return Ok(Probe {
            survival: first,
            class,
            tie_break: false,
        });
    }
    let second = estimate_survival(q, horizon, 2 * replicas, seed)?;
    match decide(&second) {
        Some(class) => Ok(Probe {
            survival: second,
            class,
            tie_break: false,
        }),
        None => {
            let class = if second.surviving_fraction > SURVIVAL_THRESHOLD {
                ProbeClass::Transient
            } else {
                ProbeClass::Recurrent
            };
            Ok(Probe {
                survival: second,
                class,
                tie_break: true,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalParams {
    pub lo: f64,
    pub hi: f64,
    /// Bisection probes after the two endpoint checks.
    pub max_probes: usize,
    pub tolerance: f64,
    pub horizon: u64,
    pub replicas: u64,
    pub seed: u64,
}

impl Default for CriticalParams {
    fn default() -> Self {
        CriticalParams {
            lo: 0.5,
            hi: 0.75,
            max_probes: 16,
            tolerance: 0.005,
            horizon: 100_000,
            replicas: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPointEstimate {
    pub bracket: (f64, f64),
    pub estimate: f64,
    pub replicas_per_probe: u64,
    pub horizon: u64,
    pub probes: Vec<Probe>,
}

/// Locates the recurrence/transience transition by bisection.
pub fn estimate_critical_point(p: &CriticalParams) -> Result<CriticalPointEstimate> {
    let (mut lo, mut hi) = (p.lo, p.hi);
    UnitPos::new(lo)?;
    UnitPos::new(hi)?;
    if lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if !(p.tolerance > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    check_replicas(p.replicas)?;
    if p.horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let done = |lo: f64, hi: f64, probes: Vec<Probe>| CriticalPointEstimate {
        bracket: (lo, hi),
        estimate: lo + (hi - lo) / 2.0,
        replicas_per_probe: p.replicas,
        horizon: p.horizon,
        probes,
    };
    if hi - lo <= p.tolerance {
        return Ok(done(lo, hi, Vec::new()));
    }

    let probe = |q| classify(q, p.horizon, p.replicas, p.seed);
    let at_lo = probe(lo)?;
    let at_hi = probe(hi)?;
    if at_lo.class != ProbeClass::Recurrent || at_hi.class != ProbeClass::Transient {
        return Err(Error::BracketNotStraddling {
            lo,
            hi,
            lo_class: at_lo.class.label(),
            hi_class: at_hi.class.label(),
        });
    }
    let mut probes = vec![at_lo, at_hi];
    for _ in 0..p.max_probes {
        if hi - lo <= p.tolerance {
            break;
        }
        let mid = lo + (hi - lo) / 2.0;
        let result = probe(mid)?;
        match result.class {
            ProbeClass::Recurrent => lo = mid,
            ProbeClass::Transient => hi = mid,
        }
        probes.push(result);
    }
    Ok(done(lo, hi, probes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailVerdict {
    PowerLaw,
    NonPowerLaw,
    /// Survival plateaus at a positive level.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub k: u64,
    pub survivors: u64,
    pub survival: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub label: &'static str,
    pub q: f64,
    pub replicas: u64,
    /// `-slope` of `log P[tau > k]` against `log k`.
    pub exponent: Option<f64>,
    /// Bootstrap standard error of the exponent.
    pub stderr: Option<f64>,
    pub k_range: Option<(u64, u64)>,
    /// `R^2` of the log-log fit.
    pub fit_quality: Option<f64>,
    pub verdict: TailVerdict,
    /// Grid points used by the fit.
    pub points: Vec<TailPoint>,
    pub warnings: Vec<String>,
}

pub const TAIL_LABEL: &str =
    "conjecture check: k^(-1/2) tail decay at q = p_c is conjectured, not proved";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailOptions {
    /// Drop grid points below ten times the smallest one.
    pub discard_first_decade: bool,
    /// Grid points with fewer survivors are dropped.
    pub min_survivors: u64,
    pub bootstrap: usize,
    /// Verdicts below this `R^2` are non-power-law.
    pub min_fit_quality: f64,
    /// A late-half slope flatter than this, with survivors left, is a plateau.
    pub plateau_slope: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            discard_first_decade: true,
            min_survivors: 20,
            bootstrap: 200,
            min_fit_quality: 0.99,
            plateau_slope: 0.1,
        }
    }
}

/// Powers of two from `2^lo` to `2^hi`.
pub fn geometric_grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

const BOOTSTRAP_DOMAIN: u64 = 0xb007_57a9_b007_57a9;

fn log_log(points: &[(u64, f64)]) -> Option<LineFit> {
    let xs: Vec<f64> = points.iter().map(|&(k, _)| (k as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, s)| s.ln()).collect();
    fit_line(&xs, &ys)
}

/// Fits `P[tau > k] ~ k^{-exponent}` over `k_grid`.
pub fn estimate_tail_exponent(
    q: f64,
    k_grid: &[u64],
    replicas: u64,
    seed: u64,
    opts: &TailOptions,
) -> Result<TailFit> {
    let cutoff = UnitPos::new(q)?;
    check_replicas(replicas)?;
    if k_grid.is_empty() || k_grid[0] == 0 || k_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "k grid must be non-empty, positive and strictly increasing".into(),
        ));
    }
    let horizon = *k_grid.last().unwrap();

    // levels[i] = number of grid points that excursion i outlived.
    let levels: Vec<u8> = map_blocks(replicas, BLOCK, |range| {
        let mut runner = Excursions::new(cutoff);
        range
            .map(|i| {
                let s = runner.run(&mut RngStream::new(seed, i), horizon, true);
                if s.censored {
                    k_grid.len() as u8
                } else {
                    k_grid.partition_point(|&k| k < s.length) as u8
                }
            })
            .collect::<Vec<u8>>()
    })
    .concat();
    let survivors_from = |levels: &mut dyn Iterator<Item = u8>| {
        let mut counts = vec![0u64; k_grid.len() + 1];
        levels.for_each(|l| counts[l as usize] += 1);
        // survivors at k_j = #{level > j}
        let mut s = vec![0u64; k_grid.len()];
        let mut acc = 0;
        for j in (0..k_grid.len()).rev() {
            acc += counts[j + 1];
            s[j] = acc;
        }
        s
    };
    let survivors = survivors_from(&mut levels.iter().copied());

    let mut warnings = Vec::new();
    let first = k_grid[0];
    let mut keep: Vec<usize> = (0..k_grid.len())
        .filter(|&j| !opts.discard_first_decade || k_grid[j] >= 10 * first)
        .collect();
    let dropped: Vec<u64> = keep
        .iter()
        .filter(|&&j| survivors[j] < opts.min_survivors)
        .map(|&j| k_grid[j])
        .collect();
    if !dropped.is_empty() {
        warnings.push(format!(
            "grid truncated: {} point(s) from k = {} on have fewer than {} survivors",
            dropped.len(),
            dropped[0],
            opts.min_survivors
        ));
        keep.retain(|&j| survivors[j] >= opts.min_survivors);
    }

    let n = replicas as f64;
    let points: Vec<TailPoint> = keep
        .iter()
        .map(|&j| TailPoint {
            k: k_grid[j],
            survivors: survivors[j],
            survival: survivors[j] as f64 / n,
        })
        .collect();
    let pairs: Vec<(u64, f64)> = points.iter().map(|p| (p.k, p.survival)).collect();
    let fit = log_log(&pairs);

    let mut out = TailFit {
        label: TAIL_LABEL,
        q,
        replicas,
        exponent: fit.map(|f| -f.slope),
        stderr: None,
        k_range: fit.map(|_| (pairs[0].0, pairs[pairs.len() - 1].0)),
        fit_quality: fit.map(|f| f.r_squared),
        verdict: TailVerdict::NonPowerLaw,
        points,
        warnings,
    };
    let Some(fit) = fit else {
        out.warnings.push("fewer than two usable grid points; no fit".into());
        return Ok(out);
    };

    let late = log_log(&pairs[pairs.len() / 2..]).unwrap_or(fit);
    let last_survival = pairs[pairs.len() - 1].1;
    out.verdict = if late.slope.abs() < opts.plateau_slope && last_survival > 0.0 {
        TailVerdict::Degenerate
    } else if pairs.len() < 3 || fit.r_squared < opts.min_fit_quality {
        TailVerdict::NonPowerLaw
    } else {
        TailVerdict::PowerLaw
    };

    // Bootstrap over replicas.
    let slopes: Vec<f64> = (0..opts.bootstrap as u64)
        .filter_map(|b| {
            let mut rng = RngStream::new(seed ^ BOOTSTRAP_DOMAIN, b);
            let s = survivors_from(
                &mut (0..replicas).map(|_| levels[rng.below(replicas) as usize]),
            );
            let resampled: Vec<(u64, f64)> = keep
                .iter()
                .map(|&j| (k_grid[j], s[j] as f64 / n))
                .collect();
            if resampled.iter().any(|&(_, p)| p == 0.0) {
                return None;
            }
            log_log(&resampled).map(|f| f.slope)
        })
        .collect();
    if slopes.len() >= 2 {
        let m = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let var = slopes.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (slopes.len() - 1) as f64;
        out.stderr = Some(var.sqrt());
    }
    Ok(out)
}

/// `sup_{s in [0, 1)} (e^{-s} - e^{-t}) - (1 - s)` on a grid of this many
/// points.
pub const GROWTH_GRID: usize = 1_000_000;

/// Lower bound on the linear growth rate of the number of particles left
/// of `t > 1` in the full chain.
pub fn growth_bound(t: ExpPos) -> Result<f64> {
    let t = t.value();
    if t <= 1.0 {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            range: "(1, inf)",
        });
    }
    let e_t = (-t).exp();
    Ok((0..GROWTH_GRID)
        .map(|i| {
            let s = i as f64 / GROWTH_GRID as f64;
            ((-s).exp() - e_t) - (1.0 - s)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub t: f64,
    pub q: f64,
    pub steps: u64,
    /// Particles in `[0, q]` after `steps` steps from the empty set.
    pub count: u64,
    pub rate: f64,
    pub bound: f64,
}

/// Runs the full chain for `steps` steps with stream `(seed, 0)` and
/// reports the count left of `t` per step.
pub fn empirical_growth(t: ExpPos, steps: u64, seed: u64) -> Result<GrowthReport> {
    let bound = growth_bound(t)?;
    if steps == 0 {
        return Err(Error::Precondition("steps must be at least 1".into()));
    }
    let q = from_exp(t.value())?;
    let mut cfg = FullConfig::new();
    let mut rng = RngStream::new(seed, 0);
    for _ in 0..steps {
        cfg.try_step(rng.uniform())?;
    }
    let count = cfg.count_in_range(UnitPos::new(0.0)?, q)? as u64;
    Ok(GrowthReport {
        t: t.value(),
        q: q.value(),
        steps,
        count,
        rate: count as f64 / steps as f64,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunningMax {
    pub seed: u64,
    pub steps: u64,
    pub window_start: u64,
    /// `max_{window_start <= k <= steps} M_k`, uniform coordinates.
    pub value: f64,
    pub p_c: f64,
}

/// Largest value of the full chain's minimum over a late window of steps.
pub fn running_max_min(seed: u64, steps: u64, window_start: u64) -> Result<RunningMax> {
    if window_start >= steps {
        return Err(Error::Precondition(format!(
            "window start {window_start} must be below steps {steps}"
        )));
    }
    let mut cfg = FullConfig::new();
    let mut rng = RngStream::new(seed, 0);
    let mut value = if window_start == 0 { cfg.minimum() } else { 0.0 };
    for k in 1..=steps {
        cfg.try_step(rng.uniform())?;
        if k >= window_start {
            value = value.max(cfg.minimum());
        }
    }
    Ok(RunningMax {
        seed,
        steps,
        window_start,
        value,
        p_c: P_C,
    })
}
