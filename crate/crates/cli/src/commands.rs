use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bicomp::copula::BivariateParams;
use bicomp::estimation::{evaluate, refine_joint};
use bicomp::ingest::{self, BinScale, ClaimPairSample, LoadOptions};
use bicomp::{fit_bivariate, BivariateModel, CompositeModel, FitReport, HeadFamily};
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{
    Command, EvalArgs, FitArgs, Format, HistogramArgs, InputArgs, OutputArgs, SimulateArgs,
    SummaryArgs,
};
use crate::error::CliError;
use crate::report::{
    EvalOutput, FitFile, FitOutput, HistogramOutput, InputInfo, ModelEntry, Overlay, SummaryOutput,
    JOINT_NOTE, SCHEMA_VERSION,
};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fit(a) => fit(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Eval(a) => eval(&a),
        Command::Summary(a) => summary(&a),
        Command::Histogram(a) => histogram(&a),
    }
}

fn load(args: &InputArgs) -> Result<(ClaimPairSample, InputInfo), CliError> {
    let options: LoadOptions = args.load_options().map_err(CliError::Input)?;
    let outcome = ingest::load_csv(&args.input, &options)?;
    let info = InputInfo {
        source: outcome.sample.source().to_string(),
        n: outcome.sample.len(),
        columns: [
            options.columns.first.to_string(),
            options.columns.second.to_string(),
        ],
        rejected_rows: outcome.rejected,
    };
    if !info.rejected_rows.is_empty() {
        eprintln!(
            "warning: skipped {} invalid rows (first at line {})",
            info.rejected_rows.len(),
            info.rejected_rows[0].row
        );
    }
    Ok((outcome.sample, info))
}

fn emit<T: Serialize>(
    value: &T,
    text: impl FnOnce(&T) -> String,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let rendered = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value)
                .map_err(|e| CliError::Estimation(format!("cannot serialize report: {e}")))?;
            s.push('\n');
            s
        }
        Format::Text => text(value),
    };
    write_output(rendered.as_bytes(), output.out.as_deref())
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn fit(args: &FitArgs) -> Result<(), CliError> {
    let (sample, input) = load(&args.input)?;
    let config = args.optimizer.config();
    config.validate()?;
    let pairs = sample.pairs();

    let families = args.family.families();
    let results: Vec<Result<FitReport, bicomp::Error>> = families
        .par_iter()
        .map(|&f| {
            let mut report = fit_bivariate(pairs, [f, f], &config)?;
            if args.joint_refine {
                report.joint =
                    Some(refine_joint(pairs, &report, &config).map_err(|e| e.in_stage("joint"))?);
            }
            Ok(report)
        })
        .collect();

    let mut reports = Vec::with_capacity(families.len());
    for (&family, result) in families.iter().zip(results) {
        let report = result.map_err(|e| CliError::from(e.in_stage(family.tag())))?;
        if !report.converged {
            let msg =
                format!("{family}: marginal search did not converge within the iteration cap");
            if args.strict_convergence {
                return Err(CliError::Estimation(msg));
            }
            eprintln!("warning: {msg}");
        }
        reports.push((family, report));
    }

    // stable sort keeps the fixed family order for exact ties
    reports.sort_by(|a, b| {
        let (x, y) = (&a.1.metrics.criteria, &b.1.metrics.criteria);
        x.aic.total_cmp(&y.aic).then(x.bic.total_cmp(&y.bic))
    });
    let models: Vec<ModelEntry> = reports
        .into_iter()
        .enumerate()
        .map(|(i, (family, fit))| ModelEntry {
            rank: i + 1,
            family,
            params: fit.model().params(),
            weights: [fit.marginal1.weight, fit.marginal2.weight],
            fit,
        })
        .collect();

    let output = FitOutput {
        schema_version: SCHEMA_VERSION,
        kind: "fit",
        seed: config.seed,
        input,
        optimizer: config,
        ranking: models.iter().map(|m| m.family).collect(),
        models,
        joint_refinement: args.joint_refine.then_some(JOINT_NOTE),
    };
    emit(&output, FitOutput::to_text, &args.output)
}

/// Reads model parameters from a parameter file or a fit report.
fn read_params(path: &PathBuf, model: Option<HeadFamily>) -> Result<BivariateParams, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Input(format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    if value.get("kind").and_then(|k| k.as_str()) != Some("fit") {
        if model.is_some() {
            return Err(CliError::Input(
                "--model only applies to fit reports".to_string(),
            ));
        }
        return serde_json::from_value(value).map_err(bad);
    }
    let file: FitFile = serde_json::from_value(value).map_err(bad)?;
    let entry = match model {
        Some(f) => file
            .models
            .into_iter()
            .find(|m| m.family == f)
            .ok_or_else(|| {
                CliError::Input(format!(
                    "{}: no {f} model in the fit report",
                    path.display()
                ))
            })?,
        None => file.models.into_iter().next().ok_or_else(|| {
            CliError::Input(format!("{}: fit report has no models", path.display()))
        })?,
    };
    Ok(entry.params)
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Input("--n must be at least 1".to_string()));
    }
    let params = read_params(&args.params, None)?;
    let model = BivariateModel::from_params(&params)?;
    let pairs = model.sample_pairs(args.n, args.seed)?;
    let sample = ClaimPairSample::new(pairs, "simulated")?;
    let compact = serde_json::to_string(&params)
        .map_err(|e| CliError::Estimation(format!("cannot serialize parameters: {e}")))?;
    let metadata = [
        format!("bicomp simulate {}", env!("CARGO_PKG_VERSION")),
        format!("seed: {}", args.seed),
        format!("n: {}", args.n),
        format!("params: {compact}"),
    ];
    let mut buf = Vec::new();
    ingest::write_csv(&sample, &mut buf, ["claim1", "claim2"], &metadata)?;
    write_output(&buf, args.out.as_deref())
}

fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let params = read_params(&args.params, args.model)?;
    let (sample, input) = load(&args.input)?;
    if args.grid < 2 {
        return Err(CliError::Input("--grid must be at least 2".to_string()));
    }
    let model = BivariateModel::from_params(&params)?;
    let metrics = evaluate(&model, sample.pairs())?;
    let overlay = [
        overlay("claim1", &model.marginal1, &sample.claim1(), args)?,
        overlay("claim2", &model.marginal2, &sample.claim2(), args)?,
    ];
    let output = EvalOutput {
        schema_version: SCHEMA_VERSION,
        kind: "eval",
        input,
        params,
        weights: [model.marginal1.weight(), model.marginal2.weight()],
        metrics,
        overlay,
    };
    emit(&output, EvalOutput::to_text, &args.output)
}

/// Quantile range of the fitted density that the grid spans.
const GRID_TAIL: f64 = 1e-6;

fn overlay(
    coordinate: &'static str,
    model: &CompositeModel,
    values: &[f64],
    args: &EvalArgs,
) -> Result<Overlay, CliError> {
    let histogram =
        ingest::histogram(values, args.bins, BinScale::Log).map_err(|e| e.in_stage(coordinate))?;
    let n = values.len() as f64;
    let bin_density = histogram
        .counts
        .iter()
        .zip(histogram.edges.windows(2))
        .map(|(&c, e)| {
            let width = e[1] - e[0];
            if width > 0.0 {
                c as f64 / (n * width)
            } else {
                0.0
            }
        })
        .collect();

    let (lo, hi) = (
        model.quantile(GRID_TAIL)?.ln(),
        model.quantile(1.0 - GRID_TAIL)?.ln(),
    );
    let steps = (args.grid - 1) as f64;
    let mut grid: Vec<f64> = (0..args.grid)
        .map(|k| (lo + (hi - lo) * k as f64 / steps).exp())
        .collect();
    // the density has a kink at the threshold; keep it on the grid
    let theta = model.theta();
    if theta > grid[0] && theta < grid[grid.len() - 1] {
        let at = grid.partition_point(|&y| y < theta);
        if grid[at] != theta {
            grid.insert(at, theta);
        }
    }
    let density: Vec<f64> = grid
        .iter()
        .map(|&y| model.pdf(y))
        .collect::<Result<_, _>>()?;
    let grid_integral = grid
        .windows(2)
        .zip(density.windows(2))
        .map(|(y, f)| 0.5 * (y[1] - y[0]) * (f[0] + f[1]))
        .sum();
    Ok(Overlay {
        coordinate,
        histogram,
        bin_density,
        grid,
        density,
        grid_integral,
    })
}

fn summary(args: &SummaryArgs) -> Result<(), CliError> {
    let (sample, input) = load(&args.input)?;
    let output = SummaryOutput {
        schema_version: SCHEMA_VERSION,
        kind: "summary",
        input,
        stats: ingest::summarize(&sample)?,
    };
    emit(&output, SummaryOutput::to_text, &args.output)
}

fn histogram(args: &HistogramArgs) -> Result<(), CliError> {
    let (sample, input) = load(&args.input)?;
    let output = HistogramOutput {
        schema_version: SCHEMA_VERSION,
        kind: "histogram",
        input,
        histogram: ingest::histogram_export(&sample, args.bins, args.scale.into())?,
    };
    emit(&output, HistogramOutput::to_text, &args.output)
}
