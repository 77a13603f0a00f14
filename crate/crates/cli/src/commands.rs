use std::path::Path;

use lppl::calibrate::{fit_window, log_samples, FitConfig, FitResult, Interval};
use lppl::models::{LpplParams, SimpleLpplParams};
use lppl::scanner::{scan, ScanConfig};
use lppl::significance::{
    bootstrap_tc_distribution, logperiodicity_test, lomb_periodogram, synth_generate, BootstrapConfig, FreqGrid,
    LombSpectrum, NoiseSpec, TestOutcome,
};
use lppl::supply_demand::{agency_discrepancy, gap_series, load_flows, regime_flag};
use lppl::timeseries::{
    business_days, convert_currency, decimal_year, load_csv, slice_window, years_between, CsvSchema, PriceSeries,
};
use lppl::{Error, ModelKind, Result, TimeWindow};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::*;
use crate::output::{digest_file, FileDigest, Outputs, RunManifest};

/// How a command ended when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    /// Outputs were written but the statistical test is undefined.
    Undefined,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    workers: Option<usize>,
    step: Option<u32>,
    fit: FitConfig<f64>,
    bootstrap: BootstrapConfig,
    freq: Option<FreqGrid<f64>>,
}

struct Context<'a> {
    cli: &'a Cli,
    file: ConfigFile,
    seed: u64,
    workers: usize,
    inputs: Vec<FileDigest>,
}

impl<'a> Context<'a> {
    fn new(cli: &'a Cli) -> Result<Self> {
        let mut inputs = Vec::new();
        let file = match &cli.config {
            Some(path) => {
                inputs.push(digest_file(path)?);
                read_config(path)?
            }
            None => ConfigFile::default(),
        };
        let seed = cli.seed.or(file.seed).unwrap_or(0);
        let workers = cli.workers.or(file.workers).unwrap_or(1).max(1);
        Ok(Self {
            cli,
            file,
            seed,
            workers,
            inputs,
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(digest_file(path)?);
        Ok(())
    }

    fn finish(self, command: &'static str, config: serde_json::Value, out: Outputs) -> Result<()> {
        let manifest = RunManifest {
            tool: "lppl",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.seed,
            config,
            inputs: self.inputs,
            outputs: Vec::new(),
        };
        for path in out.finish(manifest)? {
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn outputs(&self) -> Outputs {
        Outputs::new(&self.cli.out_dir)
    }

    fn fit_config(&self, args: &FitArgs) -> Result<FitConfig<f64>> {
        apply_fit_args(&self.file.fit, args)
    }

    fn freq_grid(&self, args: &FreqArgs) -> FreqGrid<f64> {
        let mut g = self.file.freq.unwrap_or_default();
        g.min = args.freq_min.unwrap_or(g.min);
        g.max = args.freq_max.unwrap_or(g.max);
        g.step = args.freq_step.unwrap_or(g.step);
        g
    }
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

fn widen(search: &mut Interval<f64>, bound: Interval<f64>) {
    search.lo = search.lo.min(bound.lo);
    search.hi = search.hi.max(bound.hi);
}

/// Flag overrides on top of `base`. The search box is widened to cover any
/// widened acceptance bound.
pub fn apply_fit_args(base: &FitConfig<f64>, a: &FitArgs) -> Result<FitConfig<f64>> {
    let mut c = base.clone();
    if let Some(h) = a.harmonics {
        c.harmonics = h;
    }
    c.bounds.m.lo = a.m_min.unwrap_or(c.bounds.m.lo);
    c.bounds.m.hi = a.m_max.unwrap_or(c.bounds.m.hi);
    c.bounds.omega.lo = a.omega_min.unwrap_or(c.bounds.omega.lo);
    c.bounds.omega.hi = a.omega_max.unwrap_or(c.bounds.omega.hi);
    c.bounds.tc_offset.hi = a.tc_max_years.unwrap_or(c.bounds.tc_offset.hi);
    c.top_k = a.top_k.unwrap_or(c.top_k);
    c.max_iter = a.max_iter.unwrap_or(c.max_iter);
    c.min_points = a.min_points.unwrap_or(c.min_points);
    widen(&mut c.search.m, c.bounds.m);
    widen(&mut c.search.omega, c.bounds.omega);
    c.search.tc_offset.hi = c.search.tc_offset.hi.max(c.bounds.tc_offset.hi);
    c.validate()?;
    Ok(c)
}

fn schema(args: &CsvArgs) -> CsvSchema {
    CsvSchema {
        date_col: args.date_col.clone(),
        value_col: args.value_col.clone(),
        date_format: args.date_format.clone(),
    }
}

fn load_prices(ctx: &mut Context, path: &Path, args: &CsvArgs) -> Result<PriceSeries> {
    let loaded = load_csv(path, &schema(args))?;
    if loaded.skipped > 0 {
        eprintln!("{}: skipped {} rows with empty values", path.display(), loaded.skipped);
    }
    ctx.input(path)?;
    Ok(loaded.series)
}

fn resolve_window(series: &PriceSeries, w: &WindowArgs) -> Result<TimeWindow> {
    TimeWindow::new(
        w.t_start.unwrap_or(series.first_date()),
        w.t_last.unwrap_or(series.last_date()),
    )
}

pub fn run(cli: &Cli) -> Result<Status> {
    let mut ctx = Context::new(cli)?;
    match &cli.command {
        Command::Fit(cmd) => fit(&mut ctx, cmd),
        Command::Scan(cmd) => scan_cmd(&mut ctx, cmd),
        Command::Bootstrap(cmd) => bootstrap(&mut ctx, cmd),
        Command::Lomb(cmd) => lomb(&mut ctx, cmd),
        Command::Supply(cmd) => supply(&mut ctx, cmd),
        Command::Convert(cmd) => convert(&mut ctx, cmd),
        Command::Synth(cmd) => synth(&mut ctx, cmd),
    }
    .and_then(|(status, command, config, out)| {
        ctx.finish(command, config, out)?;
        Ok(status)
    })
}

type Run = Result<(Status, &'static str, serde_json::Value, Outputs)>;

#[derive(Serialize)]
struct FitReport<'a> {
    model: ModelKind,
    window: TimeWindow,
    tc_date: Option<chrono::NaiveDate>,
    tc_decimal_year: Option<f64>,
    fit: &'a FitResult<f64>,
}

fn report(fit: &FitResult<f64>, window: TimeWindow) -> FitReport<'_> {
    FitReport {
        model: fit.params.kind(),
        window,
        tc_date: fit.tc_date(),
        tc_decimal_year: fit.tc_decimal_year(),
        fit,
    }
}

fn describe(fit: &FitResult<f64>) -> String {
    let verdict = if fit.qualified {
        "qualified".to_string()
    } else {
        let reasons: Vec<String> = fit.reasons.iter().map(|r| r.to_string()).collect();
        format!("not qualified ({})", reasons.join(", "))
    };
    format!(
        "{}: tc {} ({}), m {:.3}, omega {:.3}, rmse {:.5}, {verdict}",
        fit.params.kind(),
        fit.tc_decimal_year().map_or("-".into(), |y| format!("{y:.3}")),
        fit.tc_date().map_or("-".into(), |d| d.to_string()),
        fit.params.m(),
        fit.params.omega(),
        fit.rmse,
    )
}

fn fit(ctx: &mut Context, cmd: &FitCmd) -> Run {
    let config = ctx.fit_config(&cmd.fit)?;
    let series = load_prices(ctx, &cmd.input, &cmd.csv)?;
    let window = resolve_window(&series, &cmd.window)?;
    let result = fit_window(&series, &window, &config, cmd.model)?;
    println!("{}", describe(&result));

    let slice = slice_window(&series, &window, config.min_points)?;
    let origin = slice.first_date();
    let mut out = ctx.outputs();
    out.json("fit.json", &report(&result, window))?;
    out.csv("fit.csv", |w| {
        w.write_record([
            "model", "t_start", "t_last", "tc", "tc_date", "m", "omega", "A", "B", "rmse", "n_points", "converged",
            "qualified", "reasons",
        ])?;
        let reasons: Vec<String> = result.reasons.iter().map(|r| r.to_string()).collect();
        w.write_record([
            result.params.kind().to_string(),
            window.t_start.to_string(),
            window.t_last.to_string(),
            result.tc_decimal_year().map(|y| y.to_string()).unwrap_or_default(),
            result.tc_date().map(|d| d.to_string()).unwrap_or_default(),
            result.params.m().to_string(),
            result.params.omega().to_string(),
            result.params.a().to_string(),
            result.params.b().to_string(),
            result.rmse.to_string(),
            result.n_points.to_string(),
            result.converged.to_string(),
            result.qualified.to_string(),
            reasons.join("; "),
        ])?;
        Ok(())
    })?;
    out.csv("curve.csv", |w| {
        w.write_record(["date", "t", "observed", "model"])?;
        for p in slice.points() {
            let t = years_between(origin, p.date);
            let model = result.params.eval(t)?;
            w.write_record([p.date.to_string(), t.to_string(), p.value.ln().to_string(), model.to_string()])?;
        }
        Ok(())
    })?;
    let resolved = json!({ "model": cmd.model, "window": window, "csv": schema(&cmd.csv), "fit": config });
    Ok((Status::Done, "fit", resolved, out))
}

fn scan_cmd(ctx: &mut Context, cmd: &ScanCmd) -> Run {
    let fit = ctx.fit_config(&cmd.fit)?;
    let series = load_prices(ctx, &cmd.input, &cmd.csv)?;
    let mut config = ScanConfig::new(cmd.t_start_min, cmd.t_start_max, cmd.t_last.unwrap_or(series.last_date()));
    config.step = cmd.step.or(ctx.file.step).unwrap_or(config.step);
    config.variants = cmd.models.clone();
    config.fit = fit;
    let result = scan(&series, &config, ctx.workers)?;
    for s in &result.summary {
        println!(
            "{}: {} of {} windows qualified, median tc {}, IQR {}",
            s.variant,
            s.n_qualified,
            s.n_fits,
            s.median_tc.map_or("-".into(), |v| format!("{v:.3}")),
            s.iqr_tc.map_or("-".into(), |v| format!("{v:.3}")),
        );
    }
    if !result.skips.is_empty() {
        eprintln!("{} windows skipped (see scan.json)", result.skips.len());
    }
    let mut out = ctx.outputs();
    let mut csv_bytes = Vec::new();
    result.write_csv(&mut csv_bytes)?;
    out.raw("scan.csv", csv_bytes);
    out.json("scan.json", &result)?;
    let resolved = json!({ "csv": schema(&cmd.csv), "scan": config });
    Ok((Status::Done, "scan", resolved, out))
}

#[derive(Serialize)]
struct BootstrapReport<'a> {
    fit: FitReport<'a>,
    config: BootstrapConfig,
    n_replicas: usize,
    n_qualified: usize,
    /// Critical-time quantiles in decimal years.
    tc_q05: f64,
    tc_q50: f64,
    tc_q95: f64,
}

fn bootstrap(ctx: &mut Context, cmd: &BootstrapCmd) -> Run {
    let fit_config = ctx.fit_config(&cmd.fit)?;
    let mut config = ctx.file.bootstrap;
    config.n_replicas = cmd.replicas.unwrap_or(config.n_replicas);
    config.block_len = cmd.block_len.unwrap_or(config.block_len);
    config.seed = ctx.seed;
    config.validate()?;
    let series = load_prices(ctx, &cmd.input, &cmd.csv)?;
    let window = resolve_window(&series, &cmd.window)?;
    let fit = fit_window(&series, &window, &fit_config, cmd.model)?;
    println!("{}", describe(&fit));
    let slice = slice_window(&series, &window, fit_config.min_points)?;
    let data = log_samples::<f64>(&slice);
    let summary = bootstrap_tc_distribution(&fit, &data, &config, &fit_config, ctx.workers)?;
    let year0 = decimal_year(slice.first_date());
    let q = summary.quantiles;
    println!(
        "{} of {} replicas qualified; tc 5% {:.3}, median {:.3}, 95% {:.3}",
        summary.n_qualified,
        summary.replicas.len(),
        year0 + q.q05,
        year0 + q.q50,
        year0 + q.q95
    );

    let mut out = ctx.outputs();
    out.csv("bootstrap.csv", |w| {
        w.write_record(["replica", "tc", "qualified"])?;
        for r in &summary.replicas {
            w.write_record([
                r.index.to_string(),
                r.tc.map(|t| (year0 + t).to_string()).unwrap_or_default(),
                r.qualified.to_string(),
            ])?;
        }
        Ok(())
    })?;
    out.json(
        "bootstrap.json",
        &BootstrapReport {
            fit: report(&fit, window),
            config,
            n_replicas: summary.replicas.len(),
            n_qualified: summary.n_qualified,
            tc_q05: year0 + q.q05,
            tc_q50: year0 + q.q50,
            tc_q95: year0 + q.q95,
        },
    )?;
    let resolved = json!({
        "model": cmd.model, "window": window, "csv": schema(&cmd.csv), "fit": fit_config, "bootstrap": config,
    });
    Ok((Status::Done, "bootstrap", resolved, out))
}

fn spectrum_csv(out: &mut Outputs, spectrum: &LombSpectrum<f64>) -> Result<()> {
    out.csv("spectrum.csv", |w| {
        w.write_record(["omega", "power"])?;
        for (f, p) in spectrum.freqs.iter().zip(&spectrum.power) {
            w.write_record([f.to_string(), p.to_string()])?;
        }
        Ok(())
    })
}

fn read_samples(path: &Path, x_col: &str, y_col: &str) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (xi, yi) = (col(x_col)?, col(y_col)?);
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let cell = |i: usize, what: &'static str| -> Result<f64> {
            let v = record.get(i).unwrap_or("");
            v.parse().map_err(|_| Error::Parse {
                row,
                what,
                value: v.to_string(),
            })
        };
        samples.push((cell(xi, "x")?, cell(yi, "y")?));
    }
    Ok(samples)
}

#[derive(Serialize)]
struct LombReport {
    n_samples: usize,
    peak_omega: f64,
    peak_power: f64,
    p_value: f64,
    degenerate: bool,
}

#[derive(Serialize)]
struct LogPeriodicityReport<'a> {
    fit: FitReport<'a>,
    outcome: TestOutcome,
    peak_omega: f64,
    peak_power: f64,
    p_value: f64,
    fitted_omega: f64,
    power_law_tc: f64,
    power_law_m: f64,
}

fn lomb(ctx: &mut Context, cmd: &LombCmd) -> Run {
    let grid = ctx.freq_grid(&cmd.freq);
    let freqs = grid.values()?;
    let mut out = ctx.outputs();
    if let Some(path) = &cmd.samples {
        let samples = read_samples(path, &cmd.x_col, &cmd.y_col)?;
        ctx.input(path)?;
        let spectrum = lomb_periodogram(&samples, &freqs)?;
        let (peak_omega, peak_power) = spectrum.peak;
        let p_value = spectrum.peak_false_alarm();
        println!("peak omega {peak_omega:.3}, power {peak_power:.3}, false-alarm p {p_value:.3e}");
        spectrum_csv(&mut out, &spectrum)?;
        out.json(
            "lomb.json",
            &LombReport {
                n_samples: spectrum.n_samples,
                peak_omega,
                peak_power,
                p_value,
                degenerate: spectrum.degenerate,
            },
        )?;
        let status = if spectrum.degenerate {
            eprintln!("spectrum is degenerate (no variance in y)");
            Status::Undefined
        } else {
            Status::Done
        };
        let resolved = json!({ "mode": "samples", "x_col": cmd.x_col, "y_col": cmd.y_col, "freq": grid });
        return Ok((status, "lomb", resolved, out));
    }

    let input = cmd.input.as_ref().ok_or_else(|| Error::InvalidInput("need --samples or --input".into()))?;
    let fit_config = ctx.fit_config(&cmd.fit)?;
    let series = load_prices(ctx, input, &cmd.csv)?;
    let window = resolve_window(&series, &cmd.window)?;
    let fit = fit_window(&series, &window, &fit_config, cmd.model)?;
    println!("{}", describe(&fit));
    let data = log_samples::<f64>(&slice_window(&series, &window, fit_config.min_points)?);
    let test = logperiodicity_test(&fit, &data, &grid)?;
    println!(
        "log-periodicity {:?}: peak omega {:.3} (fitted {:.3}), false-alarm p {:.3e}",
        test.outcome, test.peak_omega, test.fitted_omega, test.p_value
    );
    spectrum_csv(&mut out, &test.spectrum)?;
    out.json(
        "lomb.json",
        &LogPeriodicityReport {
            fit: report(&fit, window),
            outcome: test.outcome,
            peak_omega: test.peak_omega,
            peak_power: test.peak_power,
            p_value: test.p_value,
            fitted_omega: test.fitted_omega,
            power_law_tc: test.power_law.tc,
            power_law_m: test.power_law.m,
        },
    )?;
    let status = if test.outcome == TestOutcome::Undefined {
        Status::Undefined
    } else {
        Status::Done
    };
    let resolved = json!({
        "mode": "fit", "model": cmd.model, "window": window, "csv": schema(&cmd.csv), "fit": fit_config, "freq": grid,
    });
    Ok((status, "lomb", resolved, out))
}

fn supply(ctx: &mut Context, cmd: &SupplyCmd) -> Run {
    let flows = load_flows(&cmd.input)?;
    ctx.input(&cmd.input)?;
    let (a, b) = (cmd.agency_a.as_str(), cmd.agency_b.as_str());
    let gaps_a = gap_series(&flows, a)?;
    let gaps_b = gap_series(&flows, b)?;
    let discrepancy = agency_discrepancy(&flows, a, b)?;
    let regime_a = regime_flag(&flows, a, cmd.cutoff)?;
    let regime_b = regime_flag(&flows, b, cmd.cutoff)?;
    let since: Vec<_> = discrepancy.iter().filter(|d| d.quarter >= cmd.cutoff).collect();
    let mean_supply_since = if since.is_empty() {
        None
    } else {
        Some(since.iter().map(|d| d.supply_mbd).sum::<f64>() / since.len() as f64)
    };
    println!(
        "{a} - {b} supply since {}: {}",
        cmd.cutoff,
        mean_supply_since.map_or("-".into(), |v| format!("{v:+.2} Mb/d"))
    );
    for (name, r) in [(a, &regime_a), (b, &regime_b)] {
        println!(
            "{name}: supply above demand in {:.0}% of quarters before {}, {:.0}% after",
            100.0 * r.pre,
            cmd.cutoff,
            100.0 * r.post
        );
    }

    let mut out = ctx.outputs();
    out.csv("supply_gaps.csv", |w| {
        w.write_record(["quarter", "agency", "gap_mbd"])?;
        for (name, gaps) in [(a, &gaps_a), (b, &gaps_b)] {
            for g in gaps {
                w.write_record([g.quarter.to_string(), name.to_string(), g.gap_mbd.to_string()])?;
            }
        }
        Ok(())
    })?;
    out.csv("supply_discrepancy.csv", |w| {
        w.write_record(["quarter", "supply_mbd", "demand_mbd"])?;
        for d in &discrepancy {
            w.write_record([d.quarter.to_string(), d.supply_mbd.to_string(), d.demand_mbd.to_string()])?;
        }
        Ok(())
    })?;
    out.json(
        "supply.json",
        &json!({
            "agency_a": a,
            "agency_b": b,
            "cutoff": cmd.cutoff,
            "mean_supply_discrepancy_since_cutoff": mean_supply_since,
            "regime_a": regime_a,
            "regime_b": regime_b,
        }),
    )?;
    let resolved = json!({ "agency_a": a, "agency_b": b, "cutoff": cmd.cutoff });
    Ok((Status::Done, "supply", resolved, out))
}

fn write_series(out: &mut Outputs, name: &str, series: &PriceSeries) -> Result<()> {
    out.csv(name, |w| {
        w.write_record(["date", "value"])?;
        for p in series.points() {
            w.write_record([p.date.to_string(), p.value.to_string()])?;
        }
        Ok(())
    })
}

fn convert(ctx: &mut Context, cmd: &ConvertCmd) -> Run {
    let prices = load_prices(ctx, &cmd.input, &cmd.csv)?;
    let mut fx_args = cmd.csv.clone();
    fx_args.value_col = cmd.fx_value_col.clone();
    let fx = load_prices(ctx, &cmd.fx, &fx_args)?;
    let converted = convert_currency(&prices, &fx, &cmd.currency)?;
    println!(
        "{}: {} dates ({}..{})",
        converted.label(),
        converted.len(),
        converted.first_date(),
        converted.last_date()
    );
    let mut out = ctx.outputs();
    write_series(&mut out, &cmd.output, &converted)?;
    let resolved = json!({ "currency": cmd.currency, "csv": schema(&cmd.csv), "fx_value_col": cmd.fx_value_col });
    Ok((Status::Done, "convert", resolved, out))
}

fn synth(ctx: &mut Context, cmd: &SynthCmd) -> Run {
    let dates = business_days(cmd.start, cmd.end);
    if dates.len() < 2 {
        return Err(Error::InvalidInput(format!("no business days between {} and {}", cmd.start, cmd.end)));
    }
    let params: LpplParams<f64> = match &cmd.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            ctx.input(path)?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => SimpleLpplParams {
            tc: years_between(dates[0], dates[dates.len() - 1]) + cmd.tc_offset,
            m: cmd.m,
            omega: cmd.omega,
            phi: cmd.phi,
            a: cmd.a,
            b: cmd.b,
            c: cmd.c,
        }
        .into(),
    };
    let noise = match cmd.noise {
        NoiseArg::None => NoiseSpec::none(),
        NoiseArg::Iid => NoiseSpec::iid(cmd.sigma),
        NoiseArg::Ar1 => NoiseSpec::ar1(cmd.sigma, cmd.rho),
    };
    let series = synth_generate(&params, &dates, &noise, ctx.seed)?;
    let tc_date = lppl::timeseries::date_after(dates[0], params.tc());
    println!("{} business days, true tc {tc_date}", series.len());
    let mut out = ctx.outputs();
    write_series(&mut out, &cmd.output, &series)?;
    out.json("synth.json", &json!({ "params": params, "origin": dates[0], "tc_date": tc_date, "noise": noise }))?;
    let resolved = json!({ "start": cmd.start, "end": cmd.end, "params": params, "noise": noise });
    Ok((Status::Done, "synth", resolved, out))
}
