use nalgebra::DMatrix;
use ripjl::analysis::{
    distortion, rip_constant_exact_with_cap, rip_constant_lower_bound, RipEstimate,
};
use ripjl::constructions::{
    apply_batch, randomize_signs, EmbeddingOperator, LinearOperator, SignedOperator,
};
use ripjl::harness::{sweep_epsilon, sweep_m, Construction, SearchRange, TrialConfig};
use ripjl::primitives::{PointSet, SignPattern};
use ripjl::Error;
use serde_json::json;

use crate::args::{AxisArg, Command, EmbedArgs, MethodArg, RipArgs, SweepArgs};
use crate::error::{CliError, CliResult};
use crate::io::{format_rows, read_rows};
use crate::manifest::{report, write_with_manifest, RunManifest};

/// Sweep trials are rooted here; all variation enters through the three
/// seed flags.
const SWEEP_ROOT: u64 = 0;

fn warn_if_expanding(m: usize, n: usize) {
    if m > n {
        eprintln!("warning: m={m} exceeds N={n}; the operator does not reduce dimension");
    }
}

pub fn embed(args: &EmbedArgs, params: &Command) -> CliResult<()> {
    let points = PointSet::new(read_rows(&args.input, &args.format)?)?;
    let n = points.dim();
    if let Some(expected) = args.n.filter(|&e| e != n) {
        return Err(Error::dim(format!(
            "input points have dimension {n}, --n says {expected}"
        ))
        .into());
    }
    let construction = args.construction.resolve();
    let m = match (args.m, construction) {
        (Some(m), _) => m,
        (None, Construction::Identity) => n,
        (None, _) => return Err(Error::param("--m is required for this construction").into()),
    };
    warn_if_expanding(m, n);
    let base = construction.build(m, n, args.seeds.matrix_seed)?;
    // the identity is a pass-through test operator: no sign flips
    let op = if construction == Construction::Identity {
        SignedOperator::new(base, SignPattern::all_positive(n))?
    } else {
        randomize_signs(base, args.seeds.sign_seed)
    };
    let mode = args.mode.resolve();
    let images = apply_batch(&op, &points, mode)?;
    let max = distortion(&op, &points, mode)?;
    let text = format_rows(
        images.points().iter().map(Vec::as_slice),
        &args.format.delimiter,
    );
    write_with_manifest(&args.output, &text, &RunManifest::new(params))?;
    println!("max_distortion\t{max}");
    Ok(())
}

fn rip_matrix(args: &RipArgs) -> CliResult<DMatrix<f64>> {
    if let Some(path) = &args.input {
        let rows = read_rows(path, &args.format)?;
        let (m, n) = (rows.len(), rows[0].len());
        return Ok(DMatrix::from_row_iterator(m, n, rows.into_iter().flatten()));
    }
    let n = args
        .n
        .ok_or_else(|| Error::param("--n is required without --input"))?;
    let construction = args.construction.resolve();
    let m = match (args.m, construction) {
        (Some(m), _) => m,
        (None, Construction::Identity) => n,
        (None, _) => return Err(Error::param("--m is required without --input").into()),
    };
    warn_if_expanding(m, n);
    let op: EmbeddingOperator = construction.build(m, n, args.seeds.matrix_seed)?;
    Ok(op.densify()?)
}

fn estimate_record(e: &RipEstimate) -> serde_json::Value {
    json!({
        "k": e.k,
        "delta": e.delta,
        "method": e.method,
        "witness": e.witness,
        "supports": e.supports,
    })
}

pub fn rip(args: &RipArgs, params: &Command) -> CliResult<()> {
    let phi = rip_matrix(args)?;
    let estimate = match args.method {
        MethodArg::Exact => rip_constant_exact_with_cap(&phi, args.k, args.cap as u128)?,
        MethodArg::MonteCarlo => {
            rip_constant_lower_bound(&phi, args.k, args.trials, args.seeds.data_seed)?
        }
    };
    let manifest = RunManifest::new(params);
    let summary = json!({
        "rows": phi.nrows(),
        "columns": phi.ncols(),
        "k": estimate.k,
        "delta": estimate.delta,
        "method": estimate.method,
        "lower_bound_only": matches!(args.method, MethodArg::MonteCarlo),
    });
    let text = report(&manifest, vec![estimate_record(&estimate)], summary);
    match &args.output {
        Some(path) => write_with_manifest(path, &text, &manifest)?,
        None => print!("{text}"),
    }
    println!("delta\t{}", estimate.delta);
    println!("witness\t{:?}", estimate.witness);
    Ok(())
}

pub fn sweep(args: &SweepArgs, params: &Command) -> CliResult<()> {
    let template = TrialConfig {
        pointset: args.pointset(),
        mode: args.mode.resolve(),
        eta: args.eta,
        matrix_seed: args.seeds.matrix_seed,
        sign_seed: args.seeds.sign_seed,
        data_seed: args.seeds.data_seed,
        ..TrialConfig::new(
            args.n,
            args.n,
            args.p,
            args.epsilon,
            args.construction.resolve(),
        )
    };
    if args.trials == 0 {
        return Err(Error::param("--trials must be positive").into());
    }
    let report_data = match args.axis {
        AxisArg::M => {
            let ms = args
                .values
                .iter()
                .map(|&v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::param(format!(
                            "m value {v} is not a positive integer"
                        )))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            template.validate()?;
            sweep_m(&template, &ms, args.trials, SWEEP_ROOT)?
        }
        AxisArg::Epsilon => {
            let range = SearchRange {
                min: args.m_min,
                max: args.m_max.unwrap_or(args.n),
            };
            sweep_epsilon(
                &template,
                &args.values,
                range,
                args.trials,
                SWEEP_ROOT,
                args.fit,
            )?
        }
    };
    let records = report_data
        .points
        .iter()
        .map(|p| {
            json!({
                "value": p.value,
                "m": p.m,
                "failures": p.failures,
                "trials": p.trials,
                "rate": p.rate,
                "interval": [p.interval.0, p.interval.1],
            })
        })
        .collect();
    let summary = json!({
        "axis": report_data.axis,
        "points": report_data.points.len(),
        "slope": report_data.slope,
    });
    let manifest = RunManifest::new(params);
    write_with_manifest(
        &args.output,
        &report(&manifest, records, summary),
        &manifest,
    )?;
    for p in &report_data.points {
        println!("{}\tm={}\trate={}", p.value, p.m, p.rate);
    }
    if let Some(slope) = report_data.slope {
        println!("slope\t{slope}");
    }
    Ok(())
}

pub fn ensure(pass: bool, what: impl FnOnce() -> String) -> CliResult<()> {
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(what()))
    }
}
