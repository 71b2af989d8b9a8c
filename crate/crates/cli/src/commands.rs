use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde_json::json;
use stagewise::data::IndexBy;
use stagewise::experiment::{
    compare_paths, epsilon_sweep, gen_block, gen_block_holdout, gen_sine, halving, holdout_seed, rss_profile,
    test_mse, Basis,
};
use stagewise::io::{self as sio, Coordinates};
use stagewise::monotone::{check_condition, exhaustive_check, ExhaustiveOptions, ExhaustiveOutcome, SignedSubset};
use stagewise::stagewise::{
    default_response, fs_epsilon, generalized_incremental, integrate_monotone_path, monotone_incremental,
};
use stagewise::{
    kkt_certify, logistic_loss, solve_path, squared_error_loss, Dataset, Error, ExpandedDesign, LossModel, Mode,
    Parallelism, PiecewiseLinearPath,
};

use crate::args::*;
use crate::config::{report, FileConfig};

/// A path failed its optimality certificate.
#[derive(Debug)]
pub struct CertificationFailed(pub usize);

impl std::fmt::Display for CertificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} vertices failed the optimality check", self.0)
    }
}

impl std::error::Error for CertificationFailed {}

fn load(input: &InputArgs) -> anyhow::Result<(Dataset, ExpandedDesign)> {
    let data = sio::read_dataset_file(&input.input, input.response_col)
        .with_context(|| format!("reading {}", input.input.display()))?;
    let design = ExpandedDesign::new(data.standardize()?);
    Ok((data, design))
}

fn emit_path(path: &PiecewiseLinearPath, design: &ExpandedDesign, out: &OutputArgs) -> anyhow::Result<()> {
    let coords = if out.original_scale {
        Coordinates::OriginalScale(design.base())
    } else {
        Coordinates::Expanded
    };
    match &out.out {
        Some(file) => sio::write_path_file(path, file, coords)
            .with_context(|| format!("writing {}", file.display()))?,
        None => sio::write_path_json(io::stdout().lock(), path, coords)?,
    }
    Ok(())
}

/// Write the partial path of a step-budget failure before reporting it.
fn emit_result(
    result: stagewise::Result<PiecewiseLinearPath>,
    design: &ExpandedDesign,
    out: &OutputArgs,
) -> anyhow::Result<()> {
    match result {
        Ok(path) => emit_path(&path, design, out),
        Err(Error::StepBudget { steps, partial }) => {
            if out.out.is_some() {
                emit_path(&partial, design, out)?;
                log::warn!("wrote truncated path after {steps} steps");
            }
            Err(Error::StepBudget { steps, partial }.into())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn solve(args: &SolveArgs, file: &FileConfig) -> anyhow::Result<()> {
    let mut cfg = file.solver.clone().unwrap_or_default();
    if let Some(m) = args.method {
        cfg.mode = match m {
            MethodArg::Lar => Mode::Lar,
            MethodArg::Lasso => Mode::Lasso,
            MethodArg::Fs0 => Mode::Fs0,
        };
    }
    if args.stop_norm.is_some() {
        cfg.stop_l1_norm = args.stop_norm;
    }
    if args.stop_lambda.is_some() {
        cfg.stop_lambda = args.stop_lambda;
    }
    if args.max_steps.is_some() {
        cfg.max_steps = args.max_steps;
    }
    report(
        "solve",
        &json!({
            "input": args.input.input,
            "response_col": args.input.response_col,
            "out": args.output.out,
            "original_scale": args.output.original_scale,
            "solver": cfg,
        }),
    );
    cfg.validate()?;
    let (_, design) = load(&args.input)?;
    emit_result(solve_path(&design, &cfg), &design, &args.output)
}

pub fn stagewise(args: &StagewiseArgs, file: &FileConfig) -> anyhow::Result<()> {
    let mut cfg = file.stagewise.clone().unwrap_or_default();
    let mut icfg = file.integrator.clone().unwrap_or_default();
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
        icfg.step = e;
        icfg.min_step = icfg.min_step.min(e);
    }
    if let Some(m) = args.max_iter {
        cfg.max_iterations = m;
        icfg.max_steps = m;
    }
    if let Some(s) = args.stride {
        cfg.record_stride = s;
    }
    let algorithm = match (args.integrate, args.sweep, args.loss, args.monotone) {
        (true, ..) => "integrate",
        (false, Some(_), ..) => "sweep",
        (false, None, LossArg::Logistic, _) => "generalized-incremental",
        (false, None, LossArg::Squared, true) => "monotone-incremental",
        (false, None, LossArg::Squared, false) => "fs-epsilon",
    };
    report(
        "stagewise",
        &json!({
            "input": args.input.input,
            "response_col": args.input.response_col,
            "out": args.output.out,
            "original_scale": args.output.original_scale,
            "loss": format!("{:?}", args.loss).to_lowercase(),
            "algorithm": algorithm,
            "sweep_levels": args.sweep,
            "stagewise": cfg,
            "integrator": if args.integrate { Some(&icfg) } else { None },
        }),
    );
    if args.loss == LossArg::Logistic && args.output.original_scale {
        return Err(Error::Config("--original-scale is only defined for squared loss".into()).into());
    }
    let (_, design) = load(&args.input)?;
    let loss: Box<dyn LossModel> = match args.loss {
        LossArg::Squared => Box::new(squared_error_loss()),
        LossArg::Logistic => Box::new(logistic_loss()),
    };

    if let Some(levels) = args.sweep {
        if args.loss != LossArg::Squared {
            return Err(Error::Config("--sweep compares against the squared-loss path".into()).into());
        }
        if levels == 0 {
            return Err(Error::Config("--sweep needs at least one level".into()).into());
        }
        let reference = solve_path(&design, &stagewise::SolverConfig::new(Mode::Fs0))?;
        let rows = epsilon_sweep(design.base(), &reference, &halving(cfg.epsilon, levels), &cfg)?;
        let mut w = BufWriter::new(io::stdout().lock());
        writeln!(w, "epsilon,steps,sup_distance,truncated")?;
        for r in rows {
            writeln!(w, "{},{},{},{}", r.epsilon, r.steps, r.sup_distance, r.truncated)?;
        }
        w.flush()?;
        return Ok(());
    }

    let response = default_response(&design, loss.as_ref());
    let result = if args.integrate {
        integrate_monotone_path(&design, loss.as_ref(), response.view(), &icfg)
    } else {
        match (args.loss, args.monotone) {
            (LossArg::Logistic, _) => generalized_incremental(&design, loss.as_ref(), response.view(), &cfg),
            (LossArg::Squared, true) => monotone_incremental(&design, &cfg),
            (LossArg::Squared, false) => fs_epsilon(design.base(), &cfg),
        }
    };
    emit_result(result, &design, &args.output)
}

fn write_json<T: serde::Serialize>(value: &T, file: Option<&Path>) -> anyhow::Result<()> {
    match file {
        Some(f) => {
            let mut w = BufWriter::new(File::create(f).with_context(|| format!("creating {}", f.display()))?);
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn check_monotone(args: &CheckArgs, parallelism: Parallelism) -> anyhow::Result<()> {
    let options = ExhaustiveOptions {
        max_subset_size: args.max_subset,
        allow_large: args.allow_large,
        parallelism,
        ..ExhaustiveOptions::default()
    };
    report(
        "check-monotone",
        &json!({
            "input": args.input.input,
            "response_col": args.input.response_col,
            "subset": args.subset,
            "signs": args.signs,
            "max_subset": args.max_subset,
            "allow_large": args.allow_large,
            "limit": options.limit.to_string(),
            "parallel": parallelism.is_parallel(),
            "emit_violation": args.emit_violation,
        }),
    );
    let (_, design) = load(&args.input)?;
    let violation = match &args.subset {
        Some(indices) => {
            let signs = args.signs.clone().unwrap_or_else(|| vec![1; indices.len()]);
            let report = check_condition(design.base(), &SignedSubset::new(indices.clone(), signs)?)?;
            write_json(&report, None)?;
            (!report.pass).then_some(report)
        }
        None => {
            let outcome = exhaustive_check(design.base(), &options)?;
            write_json(&outcome, None)?;
            match outcome {
                ExhaustiveOutcome::Violation(r) => Some(r),
                ExhaustiveOutcome::Pass { .. } => None,
            }
        }
    };
    if let (Some(report), Some(file)) = (violation, &args.emit_violation) {
        write_json(&report, Some(file))?;
    }
    Ok(())
}

fn write_dataset_to(data: &Dataset, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(f) => sio::write_dataset(File::create(f).with_context(|| format!("creating {}", f.display()))?, data)?,
        None => sio::write_dataset(io::stdout().lock(), data)?,
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs, file: &FileConfig) -> anyhow::Result<()> {
    match args.kind {
        SimKind::Sine => {
            let mut spec = file.sine.clone().unwrap_or_default();
            if let Some(s) = args.seed {
                spec.seed = s;
            }
            if let Some(n) = args.n {
                spec.n = n;
            }
            if let Some(b) = args.basis {
                spec.basis = match b {
                    BasisArg::PiecewiseLinear => Basis::PiecewiseLinear,
                    BasisArg::PiecewiseConstant => Basis::PiecewiseConstant,
                };
            }
            if let Some(k) = &args.knots {
                spec.knots = k.clone();
            }
            if let Some(s) = args.noise_scale {
                spec.noise_scale = s;
            }
            if args.holdout_out.is_some() {
                bail!(Error::Config("--holdout-out applies to block data only".into()));
            }
            report("simulate", &json!({ "kind": "sine", "out": args.out, "sine": spec }));
            write_dataset_to(&gen_sine(&spec)?, args.out.as_deref())
        }
        SimKind::Block => {
            let mut spec = file.block.clone().unwrap_or_default();
            if let Some(s) = args.seed {
                spec.seed = s;
            }
            if let Some(n) = args.n {
                spec.n = n;
            }
            if let Some(p) = args.p {
                spec.p = p;
            }
            if let Some(b) = args.block {
                spec.block = b;
            }
            if let Some(r) = args.rho {
                spec.rho = r;
            }
            if let Some(s) = args.sigma2 {
                spec.sigma2 = s;
            }
            report(
                "simulate",
                &json!({
                    "kind": "block",
                    "out": args.out,
                    "holdout_out": args.holdout_out,
                    "holdout_rows": args.holdout_rows,
                    "block": spec,
                    "noise_to_signal": spec.noise_to_signal(),
                }),
            );
            let sample = gen_block(&spec)?;
            write_dataset_to(&sample.data, args.out.as_deref())?;
            if let Some(h) = &args.holdout_out {
                let (x, f) = gen_block_holdout(&spec, &sample.beta, args.holdout_rows, holdout_seed(spec.seed))?;
                let names = sample.data.feature_names.clone().unwrap_or_default();
                let holdout = Dataset::new(x, f)?.with_feature_names(names)?;
                write_dataset_to(&holdout, Some(h))?;
            }
            Ok(())
        }
    }
}

fn read_paths(files: &[std::path::PathBuf]) -> anyhow::Result<Vec<PiecewiseLinearPath>> {
    files
        .iter()
        .map(|f| sio::read_path_file(f).with_context(|| format!("reading path {}", f.display())))
        .collect()
}

fn training_design(args: &DiagnoseArgs) -> anyhow::Result<ExpandedDesign> {
    let Some(input) = &args.input else {
        bail!(Error::Config("--input (the training data) is required".into()));
    };
    load(&InputArgs {
        input: input.clone(),
        response_col: args.response_col,
    })
    .map(|(_, d)| d)
}

pub fn diagnose(args: &DiagnoseArgs) -> anyhow::Result<()> {
    let by = match args.index {
        IndexArg::Norm => IndexBy::Norm,
        IndexArg::Arclength => IndexBy::ArcLength,
    };
    let mode = if args.rss {
        "rss"
    } else if args.compare {
        "compare"
    } else {
        "mse"
    };
    report(
        "diagnose",
        &json!({
            "mode": mode,
            "input": args.input,
            "response_col": args.response_col,
            "paths": args.paths,
            "holdout": args.holdout,
            "index": by,
            "grid": args.grid,
        }),
    );
    let paths = read_paths(&args.paths)?;
    let mut w = BufWriter::new(io::stdout().lock());
    match mode {
        "rss" => {
            let design = training_design(args)?;
            writeln!(w, "path,index,rss")?;
            for (k, path) in paths.iter().enumerate() {
                for pt in rss_profile(&design, path, by, args.grid) {
                    writeln!(w, "{k},{},{}", pt.index, pt.value)?;
                }
            }
        }
        "compare" => {
            if paths.len() != 2 {
                bail!(Error::Config(format!("--compare takes two paths, got {}", paths.len())));
            }
            let cmp = compare_paths(&paths[0], &paths[1], by)?;
            serde_json::to_writer_pretty(&mut w, &cmp)?;
            writeln!(w)?;
        }
        _ => {
            let design = training_design(args)?;
            let Some(holdout) = &args.holdout else {
                bail!(Error::Config("--mse needs --holdout".into()));
            };
            let h = sio::read_dataset_file(holdout, None).with_context(|| format!("reading {}", holdout.display()))?;
            writeln!(w, "path,fraction,mse")?;
            for (k, path) in paths.iter().enumerate() {
                for pt in test_mse(design.base(), path, h.x.view(), h.y.view(), args.grid)? {
                    writeln!(w, "{k},{},{}", pt.index, pt.value)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn certify(args: &CertifyArgs) -> anyhow::Result<()> {
    report(
        "certify",
        &json!({
            "input": args.input.input,
            "response_col": args.input.response_col,
            "path": args.path,
            "tolerance": args.tolerance,
        }),
    );
    let (_, design) = load(&args.input)?;
    let path = sio::read_path_file(&args.path).with_context(|| format!("reading path {}", args.path.display()))?;
    if path.p != design.p() {
        bail!(Error::Dimension(format!(
            "path has {} predictors, data has {}",
            path.p,
            design.p()
        )));
    }
    let mut failed = 0;
    let mut w = BufWriter::new(io::stdout().lock());
    writeln!(w, "vertex,ell,lambda,worst_violation,pass")?;
    for (k, (v, ell)) in path.vertices.iter().zip(&path.breakpoints).enumerate() {
        let lambda = match path.max_correlations.get(k) {
            Some(&l) if l.is_finite() => l,
            _ => design.correlations(v).iter().copied().fold(0.0, f64::max),
        };
        let r = kkt_certify(&design, v, lambda, args.tolerance);
        if !r.pass {
            failed += 1;
        }
        writeln!(w, "{k},{ell},{lambda},{},{}", r.worst_violation, r.pass)?;
    }
    w.flush()?;
    if failed > 0 {
        return Err(CertificationFailed(failed).into());
    }
    Ok(())
}
