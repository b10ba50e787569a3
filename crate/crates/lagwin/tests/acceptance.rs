//! Acceptance suite: one PASS/FAIL line per criterion, at fixed seeds chosen
//! before the first run. A criterion listed in `KNOWN_FAILURES` is reported
//! but does not fail the run; any other failure does.

use std::process::ExitCode;
use std::time::Instant;

use lagwin::cli::{table_seed, DEFAULT_SEED};
use lagwin::experiments::{
    coverage_study, rate_study, toy_multilimit_study, CoverageConfig, CoverageReport, ModelSpec, RateConfig,
    ToyStudyConfig,
};
use lagwin::parallel;
use lagwin_core::chains::toy_acceptance_roots;
use lagwin_core::fixedb::{self, draw_many, ks_test, t_values};
use lagwin_core::lagwindow::{autocovariances_direct, autocovariances_fft, gamma_n_sq, Bandwidth};
use lagwin_core::mercer::nystrom_decompose;
use lagwin_core::quadrature::adaptive_simpson_split;
use lagwin_core::seed::{derive_seed, label, stream_rng};
use lagwin_core::{KernelId, WeightKernel};
use rand::Rng;
use rand_distr::{Cauchy, StandardNormal};

const SEED: u64 = DEFAULT_SEED;

/// For the uniform-window toy sampler `a(θ) ≥ 0.2808` on `(1.5, 3.5]`
/// (local minimum at θ ≈ 2.06, local maximum 0.3139 at θ ≈ 2.87) and
/// `a(θ) = 1/θ` beyond, so `a(θ) = 0.23` has the single solution 1/0.23 and
/// the multi-limit criterion cannot hold as stated. Three solutions exist
/// only for targets in (0.281, 0.314); 0.30 is reported as a note.
const KNOWN_FAILURES: &[&str] = &["Toy multi-limit"];

type Outcome = Result<(bool, String), String>;

struct Suite {
    unexpected: Vec<&'static str>,
}

impl Suite {
    fn check(&mut self, name: &'static str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_FAILURES.contains(&name);
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && known { " [known]" } else { "" };
        println!("{tag} {name}{note}: {detail} ({:.1}s)", start.elapsed().as_secs_f64());
        if !pass && !known {
            self.unexpected.push(name);
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn critical_values() -> Outcome {
    let levels = [0.05, 0.025];
    let b = parallel::quantile_table(&WeightKernel::bartlett(), &levels, 1_000_000, table_seed(SEED, "bartlett"))
        .map_err(|e| e.to_string())?;
    let q = parallel::quantile_table(&WeightKernel::quadratic(), &levels, 1_000_000, table_seed(SEED, "quadratic"))
        .map_err(|e| e.to_string())?;
    let cv = |t: &fixedb::FixedBQuantileTable, l: f64| t.critical_value(l).unwrap();
    let cauchy = |a: f64| 6f64.sqrt() * (std::f64::consts::PI * (0.5 - a)).tan();
    let checks = [
        (cv(&b, 0.05), 3.796, 0.02),
        (cv(&b, 0.025), 4.784, 0.025),
        (cv(&q, 0.05), cauchy(0.05), 0.01),
        (cv(&q, 0.025), cauchy(0.025), 0.015),
    ];
    let pass = checks.iter().all(|&(v, target, tol)| rel(v, target) <= tol);
    let detail = checks
        .iter()
        .map(|&(v, t, tol)| format!("{v:.3} vs {t:.3} (rel {:.4} ≤ {tol})", rel(v, t)))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((pass, detail))
}

fn mercer_checks() -> Outcome {
    let q = nystrom_decompose(&WeightKernel::quadratic(), 500, 1.0).map_err(|e| e.to_string())?;
    let b = nystrom_decompose(&WeightKernel::bartlett(), 500, 1.0).map_err(|e| e.to_string())?;
    let a1 = q.eigenvalues[0];
    let pass = q.eigenvalues.len() == 1 && (a1 - 1.0 / 6.0).abs() <= 1e-4 && (b.positive_trace - 1.0 / 3.0).abs() <= 1e-3;
    Ok((
        pass,
        format!(
            "quadratic: {} eigenvalue(s), α₁ = {a1:.8}; bartlett positive sum {:.6} (|Δ| = {:.2e})",
            q.eigenvalues.len(),
            b.positive_trace,
            (b.positive_trace - 1.0 / 3.0).abs()
        ),
    ))
}

fn kernel_identities() -> Outcome {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let (mut closed, mut row, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    for k in [WeightKernel::bartlett(), WeightKernel::quadratic()] {
        for &s in &grid {
            for &t in &grid {
                let a = k.rho_star(s, t).unwrap();
                closed = closed.max((a - k.rho_star_generic(s, t).unwrap()).abs());
                sym = sym.max((a - k.rho_star(t, s).unwrap()).abs());
            }
            row = row.max(adaptive_simpson_split(|t| k.rho_star(s, t).unwrap(), 0.0, 1.0, &[s], 1e-12).abs());
        }
    }
    let pass = closed <= 1e-10 && row <= 1e-8 && sym <= 1e-12;
    Ok((pass, format!("closed-form gap {closed:.1e}, row integral {row:.1e}, asymmetry {sym:.1e}")))
}

fn quadratic_form(h: &[f64], c: usize, kernel: &WeightKernel) -> f64 {
    let n = h.len();
    let nf = n as f64;
    let w: Vec<f64> = (0..n).map(|d| kernel.eval(d as f64 / c as f64)).collect();
    let (mut quad, mut u, mut vh) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (mut row, mut v) = (0.0, 0.0);
        for j in 0..n {
            row += w[k.abs_diff(j)] * h[j];
            v += w[k.abs_diff(j)];
        }
        quad += h[k] * row;
        u += v;
        vh += v / nf * h[k];
    }
    let sum: f64 = h.iter().sum();
    quad / nf - 2.0 / nf * sum * vh + u / (nf * nf) / nf * sum * sum
}

fn estimator_equivalence() -> Outcome {
    let mut rng = stream_rng(derive_seed(SEED, &[label("gamh2")]), 0);
    let kernels = [WeightKernel::bartlett(), WeightKernel::quadratic()];
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.random_range(2..=1024usize);
        let c = rng.random_range(1..=n);
        let x: Vec<f64> = (0..n).map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal)).collect();
        let k = &kernels[i % 2];
        let g = gamma_n_sq(&x, c, k).unwrap().gamma_sq;
        worst = worst.max(rel(g, quadratic_form(&x, c, k)));
    }
    let mut fft_gap: f64 = 0.0;
    for n in [3usize, 17, 256, 1001] {
        let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let d = autocovariances_direct(&x, n - 1).unwrap();
        let f = autocovariances_fft(&x, n - 1).unwrap();
        fft_gap = fft_gap.max(d.iter().zip(&f).map(|(a, b)| (a - b).abs() / d[0]).fold(0.0, f64::max));
    }
    Ok((worst <= 1e-10 && fft_gap <= 1e-10, format!("quadratic form rel {worst:.1e} (100 cases), FFT/direct {fft_gap:.1e}")))
}

fn rmse_rate() -> Outcome {
    let mut c = RateConfig::new(0.5, (12..=16).map(|p| 1usize << p).collect(), 500, SEED);
    c.rules = vec![Bandwidth::Power(1.0 / 3.0), Bandwidth::Power(2.0 / 3.0)];
    let r = rate_study(&c).map_err(|e| e.to_string())?;
    let slope = r.slope(Bandwidth::Power(1.0 / 3.0)).unwrap();
    let lo = r.rmse(Bandwidth::Power(1.0 / 3.0), 1 << 16).unwrap();
    let hi = r.rmse(Bandwidth::Power(2.0 / 3.0), 1 << 16).unwrap();
    Ok((
        (-0.45..=-0.20).contains(&slope) && hi > lo,
        format!("slope(n^1/3) = {slope:.3} ∈ [-0.45, -0.20]; RMSE at 2^16: n^2/3 {hi:.4} > n^1/3 {lo:.4}"),
    ))
}

fn wasserstein_convergence() -> Outcome {
    // The grid needs four geometric points; the criterion reads 2^9..2^13.
    let mut c = RateConfig::new(0.5, vec![1 << 7, 1 << 9, 1 << 11, 1 << 13], 2000, SEED);
    c.rules = vec![Bandwidth::Full];
    let r = rate_study(&c).map_err(|e| e.to_string())?;
    let d: Vec<(usize, f64)> = r.wasserstein().into_iter().filter(|&(n, _)| n >= 1 << 9).collect();
    let pass = d.len() == 3 && d.windows(2).all(|w| w[1].1 < w[0].1);
    let detail = d.iter().map(|(n, w)| format!("d1(n={n}) = {w:.5}")).collect::<Vec<_>>().join(" > ");
    Ok((pass, detail))
}

fn cross_validation() -> Outcome {
    let cv = fixedb::crossvalidate_routes(&WeightKernel::bartlett(), 512, 10_000, derive_seed(SEED, &[label("routes")]))
        .map_err(|e| e.to_string())?;
    let (sampler, _) = fixedb::default_eigen_sampler(&WeightKernel::quadratic()).map_err(|e| e.to_string())?;
    let (t_eig, _) = t_values(&draw_many(&sampler, derive_seed(SEED, &[label("routes"), label("eigen")]), 10_000));
    let mut rng = stream_rng(derive_seed(SEED, &[label("routes"), label("cauchy")]), 0);
    let cauchy = Cauchy::new(0.0, 6f64.sqrt()).unwrap();
    let direct: Vec<f64> = (0..10_000).map(|_| rng.sample(cauchy)).collect();
    let q = ks_test(&t_eig, &direct);
    Ok((
        cv.ks.passed && q.passed,
        format!(
            "bartlett itô/eigen D = {:.4} ≤ {:.4}; quadratic eigen/√6·Cauchy D = {:.4} ≤ {:.4}",
            cv.ks.distance, cv.ks.threshold, q.distance, q.threshold
        ),
    ))
}

fn orderings(rep: &CoverageReport) -> (bool, String) {
    let best = rep.best_classical().unwrap();
    let b = rep.fixedb(KernelId::Bartlett).unwrap();
    let q = rep.fixedb(KernelId::Quadratic).unwrap();
    let pass = b.coverage >= best.coverage - 0.02 && b.mean_halfwidth >= best.mean_halfwidth && q.mean_halfwidth > b.mean_halfwidth;
    (
        pass,
        format!(
            "{}: fixed-b {:.3} vs best δ={} {:.3}; halfwidth {:.4} ≥ {:.4}; quadratic {:.4} > {:.4}",
            rep.model_id, b.coverage, best.delta, best.coverage, b.mean_halfwidth, best.mean_halfwidth, q.mean_halfwidth, b.mean_halfwidth
        ),
    )
}

fn coverage_orderings() -> Outcome {
    let tables = [KernelId::Bartlett, KernelId::Quadratic]
        .iter()
        .map(|&id| {
            let k = WeightKernel::from_id(id).unwrap();
            parallel::quantile_table(&k, &[0.025], 1_000_000, table_seed(SEED, id.as_str()))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut pass = true;
    let mut detail = Vec::new();
    for model in [ModelSpec::Toy { target_rate: 0.23 }, ModelSpec::logistic_default()] {
        let rep = coverage_study(&CoverageConfig::new(model, 4096 + 1000, 1000, 200, SEED), &tables).map_err(|e| e.to_string())?;
        let (p, d) = orderings(&rep);
        pass &= p;
        detail.push(d);
    }
    Ok((pass, detail.join("; ")))
}

fn toy_multilimit() -> Outcome {
    let roots = toy_acceptance_roots(0.23).map_err(|e| e.to_string())?;
    let rep = toy_multilimit_study(&ToyStudyConfig::new(20, SEED)).map_err(|e| e.to_string())?;
    let pass = roots.len() == 3 && rep.all_within_tolerance() && rep.occupied() >= 2 && rep.clusters_separated();
    Ok((
        pass,
        format!(
            "roots of a(θ)=0.23: {} ({:?}); all 20 within 0.05: {}; occupied: {}; separated: {}",
            roots.len(),
            roots.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
            rep.all_within_tolerance(),
            rep.occupied(),
            rep.clusters_separated()
        ),
    ))
}

fn toy_three_roots_note() {
    let mut c = ToyStudyConfig::new(20, SEED);
    c.sampler.target_rate = 0.30;
    match toy_multilimit_study(&c) {
        Ok(rep) => {
            let clusters = rep
                .clusters
                .iter()
                .map(|c| format!("θ*={:.2}: {} runs, Γ² {:.2} ± {:.2}", c.root, c.count, c.mean_gamma_sq, c.se_gamma_sq))
                .collect::<Vec<_>>()
                .join("; ");
            println!(
                "note toy multi-limit at target 0.30: {} roots; within 0.05: {}; separated: {}; {clusters}",
                rep.roots.len(),
                rep.all_within_tolerance(),
                rep.clusters_separated()
            );
        }
        Err(e) => println!("note toy multi-limit at target 0.30: error {e}"),
    }
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_lagwin");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: &[&[&str]] = &[
        &["quantiles", "--kernel", "bartlett", "--draws", "100000"],
        &["cdf", "--kernel", "bartlett,quadratic", "--draws", "20000"],
        &["eigs", "--kernel", "quadratic", "--grid", "200"],
        &["chain", "--model", "ar1", "--n", "4096"],
        &["chain", "--model", "toy", "--n", "4096", "--burn-in", "100"],
        &["coverage", "--model", "ar1", "--n", "1000", "--burn-in", "100", "--reps", "20", "--table-draws", "100000"],
        &["rate", "--n-grid", "64,128,256,512", "--reps", "500", "--reference-draws", "5000"],
        &["toy", "--n-total", "60000", "--burn-in", "10000"],
    ];
    let mut compared = 0;
    for (i, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for (run, workers) in [(0, "1"), (1, "1"), (2, "3")] {
            let out = dir.path().join(format!("{i}-{run}"));
            let status = std::process::Command::new(exe)
                .args(["--seed", "7", "--workers", workers, "--out"])
                .arg(&out)
                .args(*args)
                .stdout(std::process::Stdio::null())
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Ok((false, format!("`{}` exited with {status}", args.join(" "))));
            }
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .map_err(|e| e.to_string())?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            files.sort();
            outputs.push(files);
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2] {
            return Ok((false, format!("`{}` output differs between runs", args.join(" "))));
        }
        compared += outputs[0].len();
    }
    Ok((true, format!("{} commands, {compared} CSV files byte-identical across 2 runs and 1 vs 3 workers", commands.len())))
}

fn main() -> ExitCode {
    let mut s = Suite { unexpected: Vec::new() };
    s.check("Fixed-b critical values", critical_values);
    s.check("Mercer checks", mercer_checks);
    s.check("Kernel identities", kernel_identities);
    s.check("Estimator equivalence", estimator_equivalence);
    s.check("Classical-bandwidth RMSE rate", rmse_rate);
    s.check("Fixed-b Wasserstein convergence", wasserstein_convergence);
    s.check("Distributional cross-validation", cross_validation);
    s.check("Coverage orderings", coverage_orderings);
    s.check("Toy multi-limit", toy_multilimit);
    toy_three_roots_note();
    s.check("Determinism", determinism);
    if s.unexpected.is_empty() {
        println!("acceptance: all criteria met except known failures {KNOWN_FAILURES:?}");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {:?}", s.unexpected);
        ExitCode::FAILURE
    }
}
