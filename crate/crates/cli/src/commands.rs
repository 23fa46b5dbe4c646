//! Subcommand implementations: resolve the configuration, run the library,
//! stream the tables, and write the manifest.

use std::f64::consts::FRAC_PI_2;

use serde_json::{Map, Value};

use fractal_walk::{
    alpha_diagram, analytic_interference_oracle, asymptotic_mean_entropy, default_entropy_t0,
    default_fit_window, evolve, initial_interference, initial_state, interference_degree,
    loglog_fit_with, position_distribution, split_stationary, step, trace_distance_series, Cadence,
    CoinParams, Mode, Observers, Parallelism, PatternRow, PowerLawFit, RunSpec,
    DEFAULT_FIT_SAMPLES,
};

use crate::config::{
    AlphaDiagramArgs, CarpetArgs, Cli, CoinArgs, Command, EntropyMapArgs, FileConfig,
    InterferenceArgs, ModeArg, OracleCheckArgs, Resolver, SpreadArgs, StartArgs, TraceDistanceArgs,
};
use crate::output::{write_json, Cell, Manifest, TableWriter};
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Carpet(a) => carpet(a),
        Command::Spread(a) => spread(a),
        Command::AlphaDiagram(a) => alpha_diagram_cmd(a),
        Command::Interference(a) => interference(a),
        Command::EntropyMap(a) => entropy_map(a),
        Command::TraceDistance(a) => trace_distance_cmd(a),
        Command::OracleCheck(a) => oracle_check(a),
    }
}

/// Resolve the initial state and horizon; angles stay in degrees here (the
/// manifest records CLI-facing units) and are converted at the `RunSpec`
/// boundary.
fn resolve_start(
    r: &mut Resolver,
    start: &StartArgs,
    default_t_max: u64,
) -> Result<(f64, f64, i64, u64), CliError> {
    let gamma = r.f64("gamma_deg", start.gamma_deg, 90.0)?;
    let phi = r.f64("phi_deg", start.phi_deg, 90.0)?;
    let x0 = r.i64("x0", start.x0, 0)?;
    let t_max = r.u64("t_max", start.t_max, default_t_max)?;
    if t_max < 1 {
        return Err(CliError::usage("t_max must be at least 1"));
    }
    Ok((gamma, phi, x0, t_max))
}

fn resolve_spec(
    r: &mut Resolver,
    coin: &CoinArgs,
    start: &StartArgs,
    default_t_max: u64,
    parallelism: Parallelism,
) -> Result<RunSpec, CliError> {
    let mode = r.mode("mode", coin.mode, ModeArg::Fractal)?;
    let theta_h = r.f64("theta_h_deg", coin.theta_h_deg, 45.0)?;
    let theta_f = r.f64("theta_f_deg", coin.theta_f_deg, 45.0)?;
    let (gamma, phi, x0, t_max) = resolve_start(r, start, default_t_max)?;
    let mut spec = RunSpec::new(
        mode.to_mode(),
        CoinParams::new(theta_h.to_radians(), theta_f.to_radians()),
        t_max,
    );
    spec.gamma = gamma.to_radians();
    spec.phi = phi.to_radians();
    spec.x0 = x0;
    spec.parallelism = parallelism;
    Ok(spec)
}

fn resolve_fit(
    r: &mut Resolver,
    fit: &crate::config::FitArgs,
    t_max: u64,
) -> Result<((u64, u64), usize), CliError> {
    let default = default_fit_window(t_max);
    let lo = r.u64("fit_lo", fit.fit_lo, default.0)?;
    let hi = r.u64("fit_hi", fit.fit_hi, default.1)?;
    if lo >= hi {
        return Err(CliError::usage(format!("empty fit window [{lo}, {hi}]")));
    }
    if hi > t_max {
        return Err(CliError::usage(format!(
            "fit window edge {hi} lies beyond t_max = {t_max}"
        )));
    }
    let n = r.usize("fit_samples", fit.fit_samples, DEFAULT_FIT_SAMPLES)?;
    Ok(((lo, hi), n))
}

fn fit_json(fit: &PowerLawFit, exponent_name: &str, exponent_value: f64) -> Value {
    let mut obj = Map::new();
    obj.insert(exponent_name.to_string(), Value::from(exponent_value));
    obj.insert("slope".to_string(), Value::from(fit.exponent));
    obj.insert("intercept".to_string(), Value::from(fit.intercept));
    obj.insert("stderr".to_string(), Value::from(fit.exponent_stderr));
    obj.insert(
        "window".to_string(),
        Value::from(vec![fit.window.0, fit.window.1]),
    );
    obj.insert("n_samples".to_string(), Value::from(fit.n_samples() as u64));
    Value::Object(obj)
}

fn carpet(a: CarpetArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(FileConfig::load(a.common.config.as_deref())?);
    let parallelism = r.workers(a.common.workers)?;
    let format = r.format("format", a.common.format)?;
    let spec = resolve_spec(&mut r, &a.coin, &a.start, 100, parallelism)?;
    let cap = r.u64("cap", a.cap, 2000)?;
    if spec.t_max > cap {
        return Err(CliError::usage(format!(
            "t_max {} exceeds the matrix export cap {cap}; raise --cap to export anyway",
            spec.t_max
        )));
    }
    let out_dir = r.out_dir(a.common.out_dir);
    let mut manifest = Manifest::start("carpet", r.manifest, parallelism, &out_dir)?;

    let mut prob = TableWriter::create(
        manifest.dir(),
        "carpet_probability",
        format,
        &["t", "x", "value"],
    )?;
    let mut bits = TableWriter::create(manifest.dir(), "carpet_bits", format, &["t", "x", "bit"])?;

    let mut state = initial_state(spec.gamma, spec.phi, spec.x0);
    let mut row = PatternRow::seed();
    let x_lo = spec.x0 - spec.t_max as i64;
    let x_hi = spec.x0 + spec.t_max as i64;
    for t in 0..=spec.t_max {
        let p = position_distribution(&state);
        let max = p.max_value();
        for x in x_lo..=x_hi {
            let v = if max > 0.0 { p.value_at(x) / max } else { 0.0 };
            prob.row(&[Cell::U64(t), Cell::I64(x), Cell::F64(v)])?;
            bits.row(&[Cell::U64(t), Cell::I64(x), Cell::U64(row.bit(x) as u64)])?;
        }
        if t < spec.t_max {
            let row_arg = (spec.mode == Mode::Fractal).then_some(&row);
            state = step(&state, row_arg, &spec.params, spec.mode)?;
            row = row.next();
        }
    }
    let (name, rows) = prob.finish()?;
    manifest.add_output(name);
    let (name, _) = bits.finish()?;
    manifest.add_output(name);
    manifest.write()?;
    println!("carpet: {rows} cells over t <= {}", spec.t_max);
    Ok(())
}

fn spread(a: SpreadArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(FileConfig::load(a.common.config.as_deref())?);
    let parallelism = r.workers(a.common.workers)?;
    let format = r.format("format", a.common.format)?;
    let spec = resolve_spec(&mut r, &a.coin, &a.start, 10_000, parallelism)?;
    let (window, n_samples) = resolve_fit(&mut r, &a.fit, spec.t_max)?;
    let out_dir = r.out_dir(a.common.out_dir);
    let mut manifest = Manifest::start("spread", r.manifest, parallelism, &out_dir)?;

    let cadence = Cadence::LogSpaced {
        lo: window.0,
        hi: window.1,
        n: n_samples,
    };
    let observers = Observers::at(cadence, spec.t_max).with_second_moment();
    let out = evolve(&spec, &observers)?;
    let series = out
        .series
        .second_moment
        .expect("second moment was recorded");

    let mut table = TableWriter::create(manifest.dir(), "spread", format, &["t", "second_moment"])?;
    for (t, v) in series.iter() {
        table.row(&[Cell::U64(t), Cell::F64(v)])?;
    }
    let (name, rows) = table.finish()?;
    manifest.add_output(name);

    let fit = loglog_fit_with(&series.pairs(), window, n_samples)?;
    write_json(
        manifest.dir(),
        "spread_fit.json",
        &fit_json(&fit, "alpha", fit.exponent),
    )?;
    manifest.add_output("spread_fit.json".to_string());
    manifest.write()?;
    println!(
        "spread: {rows} samples, alpha = {:.4} +/- {:.4} over [{}, {}]",
        fit.exponent, fit.exponent_stderr, window.0, window.1
    );
    Ok(())
}

fn alpha_diagram_cmd(a: AlphaDiagramArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(FileConfig::load(a.common.config.as_deref())?);
    let parallelism = r.workers(a.common.workers)?;
    let format = r.format("format", a.common.format)?;
    let thetas_deg = r.deg_list(
        "thetas_deg",
        a.thetas_deg.as_deref(),
        &[15.0, 30.0, 45.0, 60.0, 75.0, 90.0],
    )?;
    let (gamma, phi, x0, t_max) = resolve_start(&mut r, &a.start, 10_000)?;
    let (window, n_samples) = resolve_fit(&mut r, &a.fit, t_max)?;
    let out_dir = r.out_dir(a.common.out_dir);
    let mut manifest = Manifest::start("alpha-diagram", r.manifest, parallelism, &out_dir)?;

    let mut base = RunSpec::new(Mode::Fractal, CoinParams::new(0.0, 0.0), t_max);
    base.gamma = gamma.to_radians();
    base.phi = phi.to_radians();
    base.x0 = x0;
    base.parallelism = parallelism;
    let thetas_rad: Vec<f64> = thetas_deg.iter().map(|d| d.to_radians()).collect();
    let points = alpha_diagram(&thetas_rad, &base, Some(window), n_samples);

    let mut table = TableWriter::create(
        manifest.dir(),
        "alpha_diagram",
        format,
        &["theta_deg", "alpha", "stderr", "error"],
    )?;
    let mut ok = 0usize;
    for (deg, point) in thetas_deg.iter().zip(&points) {
        match &point.fit {
            Ok(fit) => {
                ok += 1;
                table.row(&[
                    Cell::F64(*deg),
                    Cell::F64(fit.exponent),
                    Cell::F64(fit.exponent_stderr),
                    Cell::Null,
                ])?;
            }
            Err(e) => table.row(&[
                Cell::F64(*deg),
                Cell::Null,
                Cell::Null,
                Cell::Str(e.to_string()),
            ])?,
        }
    }
    let (name, _) = table.finish()?;
    manifest.add_output(name);
    manifest.write()?;
    println!(
        "alpha-diagram: {ok}/{} fits ok (t_max = {t_max})",
        thetas_deg.len()
    );
    Ok(())
}

fn interference(a: InterferenceArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(FileConfig::load(a.common.config.as_deref())?);
    let parallelism = r.workers(a.common.workers)?;
    let format = r.format("format", a.common.format)?;
    let spec = resolve_spec(&mut r, &a.coin, &a.start, 100, parallelism)?;
    let cap = r.u64("cap", a.cap, 2000)?;
    if spec.t_max > cap {
        return Err(CliError::usage(format!(
            "t_max {} exceeds the matrix export cap {cap}; raise --cap to export anyway",
            spec.t_max
        )));
    }
    let out_dir = r.out_dir(a.common.out_dir);
    let mut manifest = Manifest::start("interference", r.manifest, parallelism, &out_dir)?;

    let mut table =
        TableWriter::create(manifest.dir(), "interference", format, &["t", "x", "value"])?;
    let mut state = initial_state(spec.gamma, spec.phi, spec.x0);
    let mut row = PatternRow::seed();
    let mut field = initial_interference(spec.x0);
    let x_lo = spec.x0 - spec.t_max as i64;
    let x_hi = spec.x0 + spec.t_max as i64;
    for t in 0..=spec.t_max {
        for x in x_lo..=x_hi {
            table.row(&[Cell::U64(t), Cell::I64(x), Cell::F64(field.value_at(x))])?;
        }
        if t < spec.t_max {
            let row_arg = (spec.mode == Mode::Fractal).then_some(&row);
            field = interference_degree(&state, row_arg, &spec.params, spec.mode)?;
            state = step(&state, row_arg, &spec.params, spec.mode)?;
            row = row.next();
        }
    }
    let (name, rows) = table.finish()?;
    manifest.add_output(name);
    manifest.write()?;
    println!("interference: {rows} cells over t <= {}", spec.t_max);
    Ok(())
}

fn entropy_map(a: EntropyMapArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(FileConfig::load(a.common.config.as_deref())?);
    let parallelism = r.workers(a.common.workers)?;
    let format = r.format("format", a.common.format)?;
    let mode = r.mode("mode", a.mode, ModeArg::Fractal)?;
    let default_grid = [0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0];
    let th_list = r.deg_list("theta_h_degs", a.theta_h_degs.as_deref(), &default_grid)?;
    let tf_list = r.deg_list("theta_f_degs", a.theta_f_degs.as_deref(), &default_grid)?;
    let (gamma, phi, x0, t_max) = resolve_start(&mut r, &a.start, 2000)?;
    let t0 = r.u64("t0", a.t0, default_entropy_t0(t_max))?;
    if t0 > t_max {
        return Err(CliError::usage(format!(
            "averaging start t0 = {t0} lies beyond t_max = {t_max}"
        )));
    }
    let out_dir = r.out_dir(a.common.out_dir);
    let mut manifest = Manifest::start("entropy-map", r.manifest, parallelism, &out_dir)?;

    let mut jobs = Vec::with_capacity(th_list.len() * tf_list.len());
    for &th in &th_list {
        for &tf in &tf_list {
            jobs.push((th, tf));
        }
    }
    let results = parallelism.map(&jobs, |&(th, tf)| -> Result<f64, fractal_walk::Error> {
        let mut spec = RunSpec::new(
            mode.to_mode(),
            CoinParams::new(th.to_radians(), tf.to_radians()),
            t_max,
        );
        spec.gamma = gamma.to_radians();
        spec.phi = phi.to_radians();
        spec.x0 = x0;
        let observers = Observers::at(Cadence::EveryStep, t_max).with_entropy();
        let out = evolve(&spec, &observers)?;
        let series: Vec<(u64, f64)> = out
            .series
            .entropy
            .expect("entropy was recorded")
            .iter()
            .collect();
        asymptotic_mean_entropy(&series, t0)
    });

    let mut table = TableWriter::create(
        manifest.dir(),
        "entropy_map",
        format,
        &["theta_h_deg", "theta_f_deg", "mean_entropy"],
    )?;
    for ((th, tf), result) in jobs.iter().zip(results) {
        let mean = result?;
        table.row(&[Cell::F64(*th), Cell::F64(*tf), Cell::F64(mean)])?;
    }
    let (name, rows) = table.finish()?;
    manifest.add_output(name);
    manifest.write()?;
    println!("entropy-map: {rows} grid points (t_max = {t_max}, t0 = {t0})");
    Ok(())
}

fn trace_distance_cmd(a: TraceDistanceArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(FileConfig::load(a.common.config.as_deref())?);
    let parallelism = r.workers(a.common.workers)?;
    let format = r.format("format", a.common.format)?;
    let spec = resolve_spec(&mut r, &a.coin, &a.start, 10_000, parallelism)?;
    let (window, n_samples) = resolve_fit(&mut r, &a.fit, spec.t_max)?;
    let out_dir = r.out_dir(a.common.out_dir);
    let mut manifest = Manifest::start("trace-distance", r.manifest, parallelism, &out_dir)?;

    let series = trace_distance_series(&spec, window, n_samples)?;
    let mut table = TableWriter::create(
        manifest.dir(),
        "trace_distance",
        format,
        &["t", "trace_distance"],
    )?;
    for (t, v) in series.iter() {
        table.row(&[Cell::U64(t), Cell::F64(v)])?;
    }
    let (name, rows) = table.finish()?;
    manifest.add_output(name);

    // Stationary samples mean the coin state did not move between steps;
    // they are excluded from the log fit and reported separately.
    let (points, n_stationary) = split_stationary(&series);
    let (fit_value, summary) = match loglog_fit_with(&points, window, n_samples) {
        Ok(fit) => {
            let mut v = fit_json(&fit, "beta", fit.decay_exponent());
            v.as_object_mut()
                .expect("fit_json builds an object")
                .insert("n_stationary".to_string(), Value::from(n_stationary as u64));
            let summary = format!(
                "beta = {:.4} +/- {:.4} over [{}, {}]",
                fit.decay_exponent(),
                fit.exponent_stderr,
                window.0,
                window.1
            );
            (v, summary)
        }
        // Too few moving samples to fit because the state barely moves:
        // that is a result, not a configuration error.
        Err(e) if n_stationary > 0 => {
            let mut obj = Map::new();
            obj.insert("beta".to_string(), Value::Null);
            obj.insert("error".to_string(), Value::from(e.to_string()));
            obj.insert("n_stationary".to_string(), Value::from(n_stationary as u64));
            (Value::Object(obj), format!("fit skipped ({e})"))
        }
        Err(e) => return Err(e.into()),
    };
    write_json(manifest.dir(), "trace_distance_fit.json", &fit_value)?;
    manifest.add_output("trace_distance_fit.json".to_string());
    manifest.write()?;
    println!("trace-distance: {rows} samples, {summary}");
    Ok(())
}

fn oracle_check(a: OracleCheckArgs) -> Result<(), CliError> {
    let mut r = Resolver::new(FileConfig::load(a.common.config.as_deref())?);
    let parallelism = r.workers(a.common.workers)?;
    let format = r.format("format", a.common.format)?;
    let thetas_deg = r.deg_list(
        "thetas_deg",
        a.thetas_deg.as_deref(),
        &[5.0, 15.0, 30.0, 45.0, 60.0, 85.0],
    )?;
    let t_max = r.u64("t_max", a.t_max, 5)?;
    if t_max > 5 {
        return Err(CliError::usage(format!(
            "closed-form interference values stop at t = 5 (requested t_max = {t_max})"
        )));
    }
    let tolerance = r.f64("tolerance", a.tolerance, 1e-12)?;
    // The comparison context is fixed by the closed forms themselves.
    r.manifest
        .insert("theta_f_deg".to_string(), Value::from(0.0));
    r.manifest
        .insert("gamma_deg".to_string(), Value::from(90.0));
    r.manifest.insert("phi_deg".to_string(), Value::from(0.0));
    if a.perturb != 0.0 {
        r.manifest
            .insert("perturb".to_string(), Value::from(a.perturb));
    }
    let out_dir = r.out_dir(a.common.out_dir);
    let mut manifest = Manifest::start("oracle-check", r.manifest, parallelism, &out_dir)?;

    let mut table = TableWriter::create(
        manifest.dir(),
        "oracle_check",
        format,
        &["theta_deg", "t", "max_abs_diff", "worst_x", "pass"],
    )?;
    let mut all_pass = true;
    for &deg in &thetas_deg {
        let theta = deg.to_radians();
        let params = CoinParams::new(theta, 0.0);
        let mut state = initial_state(FRAC_PI_2, 0.0, 0);
        let mut row = PatternRow::seed();
        let mut field = initial_interference(0);
        for t in 0..=t_max {
            let oracle = analytic_interference_oracle(theta, t)?;
            let mut max_diff = 0.0f64;
            let mut worst_x = 0i64;
            for x in -(t as i64)..=(t as i64) {
                let diff = (field.value_at(x) + a.perturb - oracle.value_at(x)).abs();
                if diff > max_diff {
                    max_diff = diff;
                    worst_x = x;
                }
            }
            let pass = max_diff <= tolerance;
            all_pass &= pass;
            table.row(&[
                Cell::F64(deg),
                Cell::U64(t),
                Cell::F64(max_diff),
                Cell::I64(worst_x),
                Cell::Bool(pass),
            ])?;
            if !pass {
                eprintln!(
                    "oracle mismatch: theta = {deg} deg, t = {t}: |diff| = {max_diff:.3e} at x = {worst_x}"
                );
            }
            if t < t_max {
                field = interference_degree(&state, Some(&row), &params, Mode::Fractal)?;
                state = step(&state, Some(&row), &params, Mode::Fractal)?;
                row = row.next();
            }
        }
    }
    let (name, rows) = table.finish()?;
    manifest.add_output(name);
    manifest.write()?;
    if all_pass {
        println!(
            "oracle check passed: {rows} comparisons across {} angles, t <= {t_max}",
            thetas_deg.len()
        );
        Ok(())
    } else {
        Err(CliError::Violation(anyhow::anyhow!(
            "oracle check failed: simulated interference deviates beyond {tolerance:.1e}"
        )))
    }
}
