//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p lppl-cli --test acceptance -- --nocapture` (the
//! flag is accepted and ignored). `LPPL_ACCEPTANCE_ONLY=1,4` restricts the
//! run to the listed criteria. Criterion 10 needs `LPPL_PRICE_CSV` pointing at
//! a daily oil price file (`date,value`, USD) through 2008-05-27.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use lppl::calibrate::{fit_window, log_samples, slave_linear_params, FitConfig, Nonlinear};
use lppl::models::{
    eval_landau, eval_simple, eval_weierstrass, Harmonic, LandauParams, LpplParams, ModelKind, SimpleLpplParams,
    WeierstrassParams,
};
use lppl::scanner::{scan, ScanConfig};
use lppl::significance::{
    bootstrap_tc_distribution, false_alarm_level, logperiodicity_test, lomb_periodogram, synth_generate,
    BootstrapConfig, FreqGrid, NoiseSpec, TestOutcome,
};
use lppl::supply_demand::{agency_discrepancy, load_flows, regime_flag, Quarter};
use lppl::timeseries::{business_days, load_csv, slice_window, years_between, CsvSchema, PricePoint};
use lppl::{PriceSeries, TimeWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

enum Verdict {
    Pass,
    Fail,
    Info,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn gate(ok: bool, detail: String) -> Outcome {
    Outcome {
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

/// Two years of business days ending on the common last date.
fn dates() -> Vec<NaiveDate> {
    business_days(date("2006-05-29"), date("2008-05-27"))
}

fn times(dates: &[NaiveDate]) -> Vec<f64> {
    dates.iter().map(|d| years_between(dates[0], *d)).collect()
}

fn t_last() -> f64 {
    *times(&dates()).last().unwrap()
}

fn bubble(c: f64) -> LpplParams<f64> {
    SimpleLpplParams {
        tc: t_last() + 0.2,
        m: 0.5,
        omega: 7.0,
        phi: 1.0,
        a: 4.6,
        b: -1.0,
        c,
    }
    .into()
}

fn full_window() -> TimeWindow {
    let d = dates();
    TimeWindow::new(d[0], *d.last().unwrap()).unwrap()
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn c1_synthetic_recovery() -> Outcome {
    let truth = bubble(0.05);
    let config = FitConfig::<f64>::default();
    let start = Instant::now();
    let (mut tc_ok, mut mw_ok) = (0, 0);
    for seed in 0..100 {
        let series = synth_generate(&truth, &dates(), &NoiseSpec::iid(0.005), seed).unwrap();
        let Ok(fit) = fit_window::<f64>(&series, &full_window(), &config, ModelKind::Simple) else {
            continue;
        };
        tc_ok += usize::from((fit.tc() - truth.tc()).abs() <= 0.02);
        mw_ok += usize::from((fit.params.m() - 0.5).abs() <= 0.05 && (fit.params.omega() - 7.0).abs() <= 0.5);
    }
    let elapsed = start.elapsed();
    gate(
        tc_ok >= 90 && mw_ok >= 80 && elapsed < Duration::from_secs(300),
        format!("tc within 0.02y: {tc_ok}/100 (need 90), m and omega: {mw_ok}/100 (need 80), {elapsed:.1?} single-threaded"),
    )
}

fn c2_slaving_exactness() -> Outcome {
    let ts = times(&dates());
    let tl = *ts.last().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_coeff, mut worst_rmse) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let tc = tl + rng.random_range(0.05..1.0);
        let m = rng.random_range(0.1..0.9);
        let omega = rng.random_range(4.0..15.0);
        let truth = [
            rng.random_range(2.0..6.0),
            rng.random_range(-2.0..-0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
        ];
        let data: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| {
                let tau: f64 = tc - t;
                let f = tau.powf(m);
                let x = omega * tau.ln();
                (t, truth[0] + truth[1] * f + truth[2] * f * x.cos() + truth[3] * f * x.sin())
            })
            .collect();
        let fit = slave_linear_params(ModelKind::Simple, &Nonlinear::new(tc, m, omega), &data, 0, 1e12).unwrap();
        for (got, want) in fit.coeffs.iter().zip(truth) {
            worst_coeff = worst_coeff.max((got - want).abs());
        }
        worst_rmse = worst_rmse.max(fit.rmse);
    }
    gate(
        worst_coeff <= 1e-8 && worst_rmse < 1e-10,
        format!("10 draws: max coefficient error {worst_coeff:.1e} (tol 1e-8), max rmse {worst_rmse:.1e} (tol 1e-10)"),
    )
}

fn c3_model_limits() -> Outcome {
    let ts = times(&dates());
    let window = *ts.last().unwrap();
    let (tc, m, omega, phi, a, b, c) = (window + 0.2, 0.5, 7.0, 1.0, 4.6, -1.0, 0.05);
    let simple = SimpleLpplParams { tc, m, omega, phi, a, b, c };
    let weier = WeierstrassParams {
        tc,
        m,
        omega,
        a,
        b,
        harmonics: vec![Harmonic { c: b * c, phi }],
    };
    let landau = LandauParams {
        tc,
        m,
        omega,
        phi,
        a,
        b,
        c,
        delta_t: 1e6 * window,
        delta_omega: 0.0,
    };
    let (mut w_err, mut l_err) = (0.0f64, 0.0f64);
    for &t in &ts {
        let s = eval_simple(&simple, t).unwrap();
        w_err = w_err.max((eval_weierstrass(&weier, t).unwrap() - s).abs());
        l_err = l_err.max(((eval_landau(&landau, t).unwrap() - s) / s).abs());
    }
    gate(
        w_err <= 1e-12 && l_err <= 1e-6,
        format!("weierstrass N=1 (C1 = B*C) max abs diff {w_err:.1e} (tol 1e-12); landau dt=1e6*window max rel diff {l_err:.1e} (tol 1e-6)"),
    )
}

fn c4_lomb_correctness() -> Outcome {
    let grid = FreqGrid::default();
    let freqs = grid.values().unwrap();
    let tc = t_last() + 0.2;
    let xs: Vec<f64> = times(&dates()).iter().map(|t| (tc - t).ln()).collect();
    let cosine: Vec<(f64, f64)> = xs.iter().map(|&x| (x, (6.36 * x).cos())).collect();
    let peak = lomb_periodogram(&cosine, &freqs).unwrap().peak.0;
    let peak_ok = (peak - 6.36).abs() <= grid.step + 1e-12;

    let sub: Vec<f64> = xs.iter().step_by(5).take(100).copied().collect();
    let mut below = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let noise: Vec<(f64, f64)> = sub.iter().map(|&x| (x, rng.sample(StandardNormal))).collect();
        let s = lomb_periodogram(&noise, &freqs).unwrap();
        below += usize::from(s.peak.1 <= false_alarm_level(0.01, s.n_samples));
    }
    gate(
        peak_ok && below >= 95,
        format!("cosine peak at {peak:.2} (target 6.36 +- {}); white noise below 99% level in {below}/100 (need 95)", grid.step),
    )
}

fn lp_outcome(params: &LpplParams<f64>, seed: u64) -> TestOutcome {
    let series = synth_generate(params, &dates(), &NoiseSpec::iid(0.005), seed).unwrap();
    let config = FitConfig::<f64>::default();
    let Ok(fit) = fit_window::<f64>(&series, &full_window(), &config, ModelKind::Simple) else {
        return TestOutcome::Fail;
    };
    let data = log_samples::<f64>(&series);
    logperiodicity_test(&fit, &data, &FreqGrid::default()).map_or(TestOutcome::Fail, |t| t.outcome)
}

fn c5_logperiodicity_power_and_size() -> Outcome {
    let lppl = bubble(0.1);
    let power_law = bubble(0.0);
    let passes = (0..100).filter(|&s| lp_outcome(&lppl, 5000 + s) == TestOutcome::Pass).count();
    let fails = (0..100).filter(|&s| lp_outcome(&power_law, 6000 + s) != TestOutcome::Pass).count();
    gate(
        passes >= 90 && fails >= 95,
        format!("LPPL (C=0.1) passes {passes}/100 (need 90); pure power law fails {fails}/100 (need 95)"),
    )
}

fn c6_bootstrap_coverage() -> Outcome {
    let truth = bubble(0.05);
    let config = FitConfig::<f64>::default();
    let start = Instant::now();
    let mut covered = 0;
    for trial in 0..50 {
        let series = synth_generate(&truth, &dates(), &NoiseSpec::iid(0.005), 7000 + trial).unwrap();
        let Ok(fit) = fit_window::<f64>(&series, &full_window(), &config, ModelKind::Simple) else {
            continue;
        };
        let data = log_samples::<f64>(&series);
        let boot = BootstrapConfig {
            n_replicas: 50,
            seed: trial,
            ..BootstrapConfig::default()
        };
        if let Ok(summary) = bootstrap_tc_distribution(&fit, &data, &boot, &config, workers()) {
            let q = summary.quantiles;
            covered += usize::from(q.q05 <= truth.tc() && truth.tc() <= q.q95);
        }
    }
    let elapsed = start.elapsed();
    gate(
        covered >= 40 && elapsed < Duration::from_secs(900),
        format!("90% interval covers true tc in {covered}/50 trials (need 40), {elapsed:.1?} on {} workers", workers()),
    )
}

fn random_walk(seed: u64) -> PriceSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_price = 100f64.ln();
    let points = dates()
        .into_iter()
        .map(|date| {
            let p = PricePoint {
                date,
                value: log_price.exp(),
            };
            log_price += 0.02 * rng.sample::<f64, _>(StandardNormal);
            p
        })
        .collect();
    PriceSeries::new("random walk", points).unwrap()
}

fn c7_control_false_positives() -> Outcome {
    let config = FitConfig::<f64>::default();
    let (mut qualified, mut joint) = (0, 0);
    for seed in 0..100 {
        let series = random_walk(5000 + seed);
        let Ok(fit) = fit_window::<f64>(&series, &full_window(), &config, ModelKind::Simple) else {
            continue;
        };
        if !fit.qualified {
            continue;
        }
        qualified += 1;
        let data = log_samples::<f64>(&series);
        if logperiodicity_test(&fit, &data, &FreqGrid::default()).is_ok_and(|t| t.outcome == TestOutcome::Pass) {
            joint += 1;
        }
    }
    gate(
        qualified <= 30 && joint <= 10,
        format!("100 geometric random walks: qualified {qualified}/100 (max 30), qualified and log-periodic {joint}/100 (max 10)"),
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn cli(out: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_lppl"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .is_ok_and(|o| o.status.success())
}

fn c8_determinism() -> Outcome {
    let series = synth_generate(&bubble(0.05), &dates(), &NoiseSpec::iid(0.005), 8).unwrap();
    let mut scan_config = ScanConfig::<f64>::new(date("2006-05-29"), date("2007-05-29"), date("2008-05-27"));
    scan_config.step = 60;
    let scan_bytes = |workers: usize| {
        let r = scan(&series, &scan_config, workers).unwrap();
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        (csv, serde_json::to_vec(&r).unwrap())
    };
    let lib_scan = scan_bytes(1) == scan_bytes(1) && scan_bytes(1) == scan_bytes(4);

    let config = FitConfig::<f64>::default();
    let fit = fit_window(&series, &full_window(), &config, ModelKind::Simple).unwrap();
    let data = log_samples::<f64>(&series);
    let boot = BootstrapConfig {
        n_replicas: 16,
        seed: 42,
        ..BootstrapConfig::default()
    };
    let boot_bytes = |workers: usize| {
        serde_json::to_vec(&bootstrap_tc_distribution(&fit, &data, &boot, &config, workers).unwrap()).unwrap()
    };
    let lib_boot = boot_bytes(1) == boot_bytes(1) && boot_bytes(1) == boot_bytes(3);

    let tmp = tempfile::TempDir::new().unwrap();
    let input = tmp.path().join("prices.csv");
    let mut text = String::from("date,value\n");
    for p in series.points() {
        text.push_str(&format!("{},{}\n", p.date, p.value));
    }
    std::fs::write(&input, text).unwrap();
    let input = input.to_str().unwrap();
    let run = |name: &str, args: &[&str]| -> Option<Vec<(String, Vec<u8>)>> {
        let out: PathBuf = tmp.path().join(name);
        cli(&out, args).then(|| dir_bytes(&out))
    };
    let scan_args = |w: &'static str| {
        vec!["--workers", w, "scan", "-i", input, "--t-start-min", "2006-05-29", "--t-start-max", "2007-05-29", "--step", "90"]
    };
    let boot_args = |w: &'static str| vec!["--workers", w, "--seed", "9", "bootstrap", "-i", input, "--replicas", "12"];
    let cli_scan = {
        let a = run("s1", &scan_args("1"));
        a.is_some() && a == run("s1b", &scan_args("1")) && a == run("s4", &scan_args("4"))
    };
    let cli_boot = {
        let a = run("b1", &boot_args("1"));
        a.is_some() && a == run("b1b", &boot_args("1")) && a == run("b4", &boot_args("4"))
    };
    gate(
        lib_scan && lib_boot && cli_scan && cli_boot,
        format!(
            "byte-identical across runs and workers: library scan {lib_scan}, library bootstrap {lib_boot}, cli scan {cli_scan}, cli bootstrap {cli_boot}"
        ),
    )
}

fn c9_supply_demand() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/supply_demand_reconstructed.csv");
    let flows = load_flows(&path).unwrap();
    let cutoff: Quarter = "2006Q1".parse().unwrap();
    let since: Vec<f64> = agency_discrepancy(&flows, "IEA", "EIA")
        .unwrap()
        .into_iter()
        .filter(|d| d.quarter >= cutoff)
        .map(|d| d.supply_mbd)
        .collect();
    let worst = since.iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
    let eia = regime_flag(&flows, "EIA", cutoff).unwrap();
    let iea = regime_flag(&flows, "IEA", cutoff).unwrap();
    gate(
        !since.is_empty() && worst <= 0.1 && eia.pre == 1.0 && iea.pre == 1.0,
        format!(
            "IEA - EIA supply on {} quarters from 2006: max |d - 1.0| = {worst:.3} (tol 0.1); pre-2006 surplus fraction EIA {} IEA {}",
            since.len(),
            eia.pre,
            iea.pre
        ),
    )
}

fn c10_oil_scan() -> Outcome {
    let Ok(path) = std::env::var("LPPL_PRICE_CSV") else {
        return Outcome {
            verdict: Verdict::Info,
            detail: "skipped: set LPPL_PRICE_CSV to a daily USD price file through 2008-05-27".into(),
        };
    };
    let info = |detail: String| Outcome {
        verdict: Verdict::Info,
        detail,
    };
    let series = match load_csv(&path, &CsvSchema::default()) {
        Ok(l) => l.series,
        Err(e) => return info(format!("could not load {path}: {e}")),
    };
    let t_last = date("2008-05-27");
    let Ok(series) = slice_window(&series, &TimeWindow::new(series.first_date(), t_last).unwrap(), 30) else {
        return info("no data before 2008-05-27".into());
    };
    let start = series.first_date().max(date("2005-01-03"));
    let config = ScanConfig::<f64> {
        step: 10,
        ..ScanConfig::new(start, date("2007-06-01").max(start), t_last)
    };
    match scan(&series, &config, workers()) {
        Ok(r) => {
            let s = &r.summary[0];
            let last = lppl::timeseries::decimal_year(series.last_date());
            let consistent = s.median_tc.is_some_and(|m| m > last && m <= last + 1.0);
            info(format!(
                "{} of {} windows qualified, median tc {:?} (last observation {last:.3}); {}",
                s.n_qualified,
                s.n_fits,
                s.median_tc,
                if consistent { "within one year after t_last" } else { "not within one year after t_last" }
            ))
        }
        Err(e) => info(format!("scan failed: {e}")),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "synthetic recovery (simple LPPL)", c1_synthetic_recovery),
        (2, "linear slaving exactness", c2_slaving_exactness),
        (3, "model limit equivalences", c3_model_limits),
        (4, "Lomb correctness", c4_lomb_correctness),
        (5, "log-periodicity test power and size", c5_logperiodicity_power_and_size),
        (6, "bootstrap coverage", c6_bootstrap_coverage),
        (7, "control false-positive rate", c7_control_false_positives),
        (8, "determinism", c8_determinism),
        (9, "supply-demand fixtures", c9_supply_demand),
        (10, "oil price scan (informational)", c10_oil_scan),
    ];
    let only: Option<Vec<u32>> = std::env::var("LPPL_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());

    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let outcome = run();
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed.push(id);
                "FAIL"
            }
            Verdict::Info => "INFO",
        };
        println!("{tag} {id:>2} {name}: {}", outcome.detail);
    }
    if failed.is_empty() {
        println!("acceptance: all gating criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
