//! Multi-limit behaviour of the adaptive toy sampler: independent runs from
//! spread-out `θ₀`, grouped by the root of `a(θ) = target` they settle on.

use lagwin_core::chains::{toy_acceptance_roots, toy_adaptive_rwm, SamplerConfig};
use lagwin_core::lagwindow::{gamma_n_sq, Bandwidth};
use lagwin_core::seed::{derive_seed, label};
use lagwin_core::stats::{mean, variance};
use lagwin_core::WeightKernel;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::par_map;

pub const MIN_SEEDS: usize = 20;
/// Trace checkpoints per run (before de-duplication).
pub const TRACE_POINTS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyStudyConfig {
    pub n_seeds: usize,
    pub sampler: SamplerConfig,
    /// Starting widths, one per seed; `None` spreads them geometrically over
    /// the adaptation bounds.
    pub theta0: Option<Vec<f64>>,
    /// Maximum distance of a terminal `θₙ` from its root.
    pub tolerance: f64,
    pub bandwidth: Bandwidth,
    pub base_seed: u64,
}

impl ToyStudyConfig {
    /// `2·10⁶` iterations, `10⁵` burn-in, target 0.23, `cₙ = n^{1/3}`.
    pub fn new(n_seeds: usize, base_seed: u64) -> Self {
        let mut sampler = SamplerConfig::toy(2_000_000, 100_000);
        sampler.trace_every = 1000;
        ToyStudyConfig {
            n_seeds,
            sampler,
            theta0: None,
            tolerance: 0.05,
            bandwidth: Bandwidth::Power(1.0 / 3.0),
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_seeds < MIN_SEEDS {
            return Err(Error::Config(format!("need at least {MIN_SEEDS} seeds, got {}", self.n_seeds)));
        }
        if let Some(t) = &self.theta0 {
            if t.len() != self.n_seeds {
                return Err(Error::Config(format!("{} starting widths for {} seeds", t.len(), self.n_seeds)));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.bandwidth.is_full() {
            return Err(Error::Config("the toy study uses a classical bandwidth".into()));
        }
        self.sampler.validate()?;
        Ok(())
    }

    /// Starting width of seed `i`.
    pub fn start(&self, i: usize) -> f64 {
        match &self.theta0 {
            Some(t) => t[i],
            None => {
                let (lo, hi) = self.sampler.bounds;
                lo * (hi / lo).powf((i as f64 + 0.5) / self.n_seeds as f64)
            }
        }
    }
}

/// One run of the study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToySeedResult {
    pub index: usize,
    pub seed: u64,
    pub theta0: f64,
    pub terminal_theta: f64,
    pub root: f64,
    pub distance: f64,
    pub gamma_sq: f64,
    pub acceptance: f64,
}

/// Runs that settled on the same root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyCluster {
    pub root: f64,
    pub count: usize,
    pub mean_gamma_sq: f64,
    /// Standard error of the cluster mean (NaN for a single run).
    pub se_gamma_sq: f64,
}

/// One point of a `θₙ` / `Γ²ₙ` trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyTraceRow {
    pub seed: u64,
    pub iteration: usize,
    pub theta: f64,
    pub gamma_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyReport {
    pub config: ToyStudyConfig,
    pub roots: Vec<f64>,
    pub runs: Vec<ToySeedResult>,
    pub clusters: Vec<ToyCluster>,
    pub traces: Vec<ToyTraceRow>,
}

impl ToyReport {
    pub fn all_within_tolerance(&self) -> bool {
        self.runs.iter().all(|r| r.distance <= self.config.tolerance)
    }

    pub fn occupied(&self) -> usize {
        self.clusters.len()
    }

    /// Every pair of occupied clusters has `|m̄ᵢ − m̄ⱼ| > 3·√(seᵢ² + seⱼ²)`.
    /// Fewer than two clusters, or a cluster of one run, is not separated.
    pub fn clusters_separated(&self) -> bool {
        if self.clusters.len() < 2 || self.clusters.iter().any(|c| c.count < 2) {
            return false;
        }
        self.clusters.iter().enumerate().all(|(i, a)| {
            self.clusters[i + 1..].iter().all(|b| {
                (a.mean_gamma_sq - b.mean_gamma_sq).abs() > 3.0 * (a.se_gamma_sq.powi(2) + b.se_gamma_sq.powi(2)).sqrt()
            })
        })
    }
}

/// Iterations at which traces are recorded: about [`TRACE_POINTS`]
/// geometrically spaced multiples of `trace_every` after burn-in.
pub fn checkpoints(config: &SamplerConfig) -> Vec<usize> {
    let step = config.trace_every;
    let first = (config.burn_in / step + 1) * step;
    let last = config.n_total / step * step;
    if first > last {
        return Vec::new();
    }
    let ratio = (last as f64 / first as f64).max(1.0);
    let mut pts: Vec<usize> = (0..TRACE_POINTS)
        .map(|i| {
            let t = first as f64 * ratio.powf(i as f64 / (TRACE_POINTS - 1) as f64);
            ((t / step as f64).round() as usize * step).clamp(first, last)
        })
        .collect();
    pts.dedup();
    pts
}

/// `Γ²` of every prefix `x[..len]`, `len ∈ lens` (ascending), at bandwidth
/// `rule`, from one pass of running lagged products.
///
/// With `Sₖ = Σ xᵢxᵢ₊ₖ`, `Aₖ = Σ_{i<len−k} xᵢ` and `Bₖ = Σ_{i≥k} xᵢ` over the
/// prefix, `n·γₖ = Sₖ − x̄(Aₖ + Bₖ) + (len − k)x̄²`.
pub fn prefix_gamma_sq(x: &[f64], lens: &[usize], rule: Bandwidth, kernel: &WeightKernel) -> Result<Vec<f64>> {
    if lens.windows(2).any(|w| w[1] <= w[0]) || lens.first().is_some_and(|&l| l < 2) || lens.last().is_some_and(|&l| l > x.len()) {
        return Err(Error::Config("prefix lengths must be ascending within [2, n]".into()));
    }
    let Some(&longest) = lens.last() else { return Ok(Vec::new()) };
    let c_of = |len: usize| rule.resolve(len).min(len - 1);
    let max_lag = c_of(longest);
    let mut prefix = vec![0.0; longest + 1];
    for (i, v) in x[..longest].iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let mut s = vec![0.0; max_lag];
    let mut out = Vec::with_capacity(lens.len());
    let mut next = lens.iter().peekable();
    for j in 0..longest {
        for (k, sk) in s.iter_mut().enumerate().take(j + 1) {
            *sk += x[j - k] * x[j];
        }
        while next.peek().is_some_and(|&&len| len == j + 1) {
            let len = *next.next().unwrap();
            let n = len as f64;
            let m = prefix[len] / n;
            let c = c_of(len);
            let gamma = |k: usize| (s[k] - m * (prefix[len - k] + prefix[len] - prefix[k]) + (len - k) as f64 * m * m) / n;
            let mut g = gamma(0);
            for k in 1..c {
                g += 2.0 * kernel.eval(k as f64 / c as f64) * gamma(k);
            }
            out.push(g);
        }
    }
    Ok(out)
}

pub fn toy_multilimit_study(config: &ToyStudyConfig) -> Result<ToyReport> {
    config.validate()?;
    let roots = toy_acceptance_roots(config.sampler.target_rate)?;
    if roots.is_empty() {
        return Err(Error::Config(format!("a(θ) = {} has no solution", config.sampler.target_rate)));
    }
    let kernel = WeightKernel::bartlett();
    let marks = checkpoints(&config.sampler);
    let study = label("toy");
    let per_seed = par_map(config.n_seeds, |i| -> Result<(ToySeedResult, Vec<ToyTraceRow>)> {
        let seed = derive_seed(config.base_seed, &[study, i as u64]);
        let mut sampler = config.sampler.clone();
        sampler.initial_theta = Some(config.start(i));
        let run = toy_adaptive_rwm(&sampler, seed)?;
        let kept: Vec<usize> = marks.iter().map(|&k| k - run.burn_in).collect();
        let trace_gamma = prefix_gamma_sq(&run.h_path, &kept, config.bandwidth, &kernel)?;
        let terminal_theta = run.terminal_theta()[0];
        let root = *roots
            .iter()
            .min_by(|a, b| (*a - terminal_theta).abs().total_cmp(&(*b - terminal_theta).abs()))
            .expect("roots are non-empty");
        let traces = marks
            .iter()
            .zip(trace_gamma)
            .map(|(&k, gamma_sq)| ToyTraceRow { seed, iteration: k, theta: run.theta(k / run.trace_every - 1)[0], gamma_sq })
            .collect();
        let result = ToySeedResult {
            index: i,
            seed,
            theta0: sampler.initial_theta.unwrap(),
            terminal_theta,
            root,
            distance: (terminal_theta - root).abs(),
            gamma_sq: {
                let n = run.h_path.len();
                gamma_n_sq(&run.h_path, config.bandwidth.resolve(n).min(n - 1), &kernel)?.gamma_sq
            },
            acceptance: run.late_acceptance[0],
        };
        Ok((result, traces))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let (runs, traces): (Vec<_>, Vec<_>) = per_seed.into_iter().unzip();
    let clusters = roots
        .iter()
        .filter_map(|&root| {
            let g: Vec<f64> = runs.iter().filter(|r| r.root == root).map(|r| r.gamma_sq).collect();
            (!g.is_empty()).then(|| ToyCluster {
                root,
                count: g.len(),
                mean_gamma_sq: mean(&g),
                se_gamma_sq: if g.len() > 1 { (variance(&g) / g.len() as f64).sqrt() } else { f64::NAN },
            })
        })
        .collect();
    Ok(ToyReport { config: config.clone(), roots, runs, clusters, traces: traces.concat() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(target: f64) -> ToyStudyConfig {
        let mut c = ToyStudyConfig::new(20, 11);
        c.sampler.n_total = 200_000;
        c.sampler.burn_in = 20_000;
        c.sampler.target_rate = target;
        c.tolerance = 0.2;
        c
    }

    #[test]
    fn prefix_gamma_matches_direct() {
        let x = lagwin_core::chains::ar1_chain(0.7, 5000, 3).unwrap().h_path;
        let lens = [2, 10, 333, 1000, 4999, 5000];
        let k = WeightKernel::bartlett();
        for rule in [Bandwidth::Power(1.0 / 3.0), Bandwidth::Power(0.8), Bandwidth::Fixed(7)] {
            let fast = prefix_gamma_sq(&x, &lens, rule, &k).unwrap();
            for (&len, g) in lens.iter().zip(fast) {
                let direct = gamma_n_sq(&x[..len], rule.resolve(len).min(len - 1), &k).unwrap().gamma_sq;
                assert!((g - direct).abs() <= 1e-9 * direct.abs().max(1.0), "{rule} {len}: {g} vs {direct}");
            }
        }
        assert!(prefix_gamma_sq(&x, &[10, 5], Bandwidth::Full, &k).is_err());
    }

    #[test]
    fn starts_spread_over_bounds() {
        let c = ToyStudyConfig::new(20, 0);
        let s: Vec<f64> = (0..20).map(|i| c.start(i)).collect();
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(s[0] > 1.6 && s[19] < 40.0);
    }

    #[test]
    fn checkpoint_grid() {
        let c = ToyStudyConfig::new(20, 0);
        let k = checkpoints(&c.sampler);
        assert!(k.len() > 20 && k.len() <= TRACE_POINTS);
        assert!(k.windows(2).all(|w| w[0] < w[1]));
        assert!(k.iter().all(|&i| i % 1000 == 0 && i > 100_000 && i <= 2_000_000));
        assert_eq!(*k.last().unwrap(), 2_000_000);
    }

    #[test]
    fn three_root_target_occupies_two_clusters() {
        let rep = toy_multilimit_study(&short(0.30)).unwrap();
        assert_eq!(rep.roots.len(), 3);
        assert_eq!(rep.runs.len(), 20);
        assert!(rep.occupied() >= 2, "{:?}", rep.clusters);
        assert_eq!(rep.clusters.iter().map(|c| c.count).sum::<usize>(), 20);
        assert!(!rep.traces.is_empty());
    }

    #[test]
    fn separation_rule() {
        let mut rep = toy_multilimit_study(&short(0.23)).unwrap();
        assert_eq!(rep.occupied(), 1);
        assert!(!rep.clusters_separated());
        let c = |root, count, m, se| ToyCluster { root, count, mean_gamma_sq: m, se_gamma_sq: se };
        rep.clusters = vec![c(1.7, 5, 10.0, 1.0), c(3.3, 15, 1.0, 0.1)];
        assert!(rep.clusters_separated());
        rep.clusters = vec![c(1.7, 5, 10.0, 3.0), c(3.3, 15, 1.0, 0.1)];
        assert!(!rep.clusters_separated());
        rep.clusters = vec![c(1.7, 1, 10.0, f64::NAN), c(3.3, 19, 1.0, 0.1)];
        assert!(!rep.clusters_separated());
    }

    #[test]
    fn validation() {
        assert!(ToyStudyConfig::new(19, 0).validate().is_err());
        let mut c = ToyStudyConfig::new(20, 0);
        c.theta0 = Some(vec![2.0; 3]);
        assert!(c.validate().is_err());
    }
}
