//! The invariant suites behind `ripjl verify`.
//!
//! Every record carries `check`, `measured`, `bound` and `pass`; extra fields
//! identify the instance.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use ripjl::analysis::{
    expansion_terms, expansion_terms_dense, max_disjoint_coherence, min_sparsity_for_points,
    proof_term_check, prop_c_check_with_delta, prop_c_quantities, rip_constant_exact,
    rip_upper_bound_gershgorin, tail_check, TailInstance, DEFAULT_PAIR_CAP,
};
use ripjl::constructions::{randomize_signs, LinearOperator, SignedOperator};
use ripjl::harness::{failure_rate, TrialConfig};
use ripjl::primitives::{decreasing_arrangement, norm, SignPattern};
use ripjl::seed::{self, Stream};
use ripjl::{Error, DETERMINISTIC_SLACK};
use serde_json::{json, Value};

use crate::args::{Command, Suite, VerifyArgs};
use crate::commands::ensure;
use crate::error::CliResult;
use crate::manifest::{report, write_with_manifest, RunManifest};

const TAIL_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

struct Sizes {
    m: usize,
    n: usize,
    trials: usize,
}

fn sizes(args: &VerifyArgs) -> Sizes {
    let theorem = args.suite == Suite::Theorem;
    Sizes {
        m: args.m.unwrap_or(if theorem { 256 } else { 20 }),
        n: args.n.unwrap_or(if theorem { 1024 } else { 40 }),
        trials: args.trials.unwrap_or(if theorem { 200 } else { 100_000 }),
    }
}

fn instance_matrix(args: &VerifyArgs, sz: &Sizes, i: usize) -> CliResult<DMatrix<f64>> {
    let op = args.construction.resolve().build(
        sz.m,
        sz.n,
        seed::derive(args.seeds.matrix_seed, i as u64),
    )?;
    Ok(op.densify()?)
}

fn gaussian_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed, Stream::Vectors);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit_decreasing(n: usize, seed: u64) -> CliResult<Vec<f64>> {
    let x = gaussian_vector(n, seed);
    let nx = norm(&x);
    let unit: Vec<f64> = x.iter().map(|v| v / nx).collect();
    Ok(decreasing_arrangement(&unit)?.0)
}

fn exact_delta(phi: &DMatrix<f64>, s: usize) -> CliResult<f64> {
    Ok(rip_constant_exact(phi, (2 * s).min(phi.ncols()))?.delta)
}

fn prop53(args: &VerifyArgs, sz: &Sizes) -> CliResult<Vec<Value>> {
    (0..args.instances)
        .map(|i| {
            let phi = instance_matrix(args, sz, i)?;
            let delta = exact_delta(&phi, args.s)?;
            let scan = max_disjoint_coherence(&phi, args.s, DEFAULT_PAIR_CAP)?;
            Ok(json!({
                "check": "disjoint-block-coherence",
                "instance": i,
                "pairs": scan.pairs,
                "witness": [scan.witness.0, scan.witness.1],
                "measured": scan.max_coherence,
                "bound": delta,
                "pass": scan.max_coherence <= delta + DETERMINISTIC_SLACK,
            }))
        })
        .collect()
}

fn prop54(args: &VerifyArgs, sz: &Sizes) -> CliResult<Vec<Value>> {
    let names = ["chaos-spectral", "chaos-frobenius", "cross-vector"];
    let mut records = Vec::new();
    for i in 0..args.instances {
        let phi = instance_matrix(args, sz, i)?;
        let delta = exact_delta(&phi, args.s)?;
        let mut worst = [0.0f64; 3];
        let mut violations = [0usize; 3];
        let mut bounds = [0.0; 3];
        for j in 0..args.samples {
            let idx = (i * args.samples + j) as u64;
            let x = unit_decreasing(sz.n, seed::derive(args.seeds.data_seed, idx))?;
            let b = SignPattern::random(args.s, seed::derive(args.seeds.sign_seed, idx));
            let r = prop_c_check_with_delta(&phi, &x, args.s, b.as_slice(), delta)?;
            let measured = [r.norm_c_spectral, r.norm_c_frobenius, r.norm_v];
            bounds = r.bounds;
            for q in 0..3 {
                worst[q] = worst[q].max(measured[q]);
                violations[q] += usize::from(!r.pass[q]);
            }
        }
        for q in 0..3 {
            records.push(json!({
                "check": names[q],
                "instance": i,
                "samples": args.samples,
                "delta": delta,
                "violations": violations[q],
                "measured": worst[q],
                "bound": bounds[q],
                "pass": violations[q] == 0,
            }));
        }
    }
    Ok(records)
}

fn expansion(args: &VerifyArgs, sz: &Sizes) -> CliResult<Vec<Value>> {
    let mut records = Vec::new();
    for i in 0..args.instances {
        let base = args.construction.resolve().build(
            sz.m,
            sz.n,
            seed::derive(args.seeds.matrix_seed, i as u64),
        )?;
        let phi = base.densify()?;
        let mut worst_dense: f64 = 0.0;
        let mut worst_fast: f64 = 0.0;
        for j in 0..args.samples {
            let idx = (i * args.samples + j) as u64;
            let x = gaussian_vector(sz.n, seed::derive(args.seeds.data_seed, idx));
            let sign_seed = seed::derive(args.seeds.sign_seed, idx);
            let op: SignedOperator = randomize_signs(base.clone(), sign_seed);
            let dense = expansion_terms_dense(&phi, op.signs().as_slice(), &x, args.s)?;
            let fast = expansion_terms(&op, &x, args.s)?;
            worst_dense = worst_dense.max(dense.residual());
            worst_fast = worst_fast.max(fast.residual());
        }
        for (check, worst) in [
            ("additivity-dense", worst_dense),
            ("additivity-operator", worst_fast),
        ] {
            records.push(json!({
                "check": check,
                "instance": i,
                "samples": args.samples,
                "measured": worst,
                "bound": DETERMINISTIC_SLACK,
                "pass": worst <= DETERMINISTIC_SLACK,
            }));
        }
    }
    Ok(records)
}

/// Hoeffding on the cross vector `v` and chaos on the matrix `C` that the
/// block estimates produce for a random matrix and decreasing unit vector.
fn tails(args: &VerifyArgs, sz: &Sizes) -> CliResult<Vec<Value>> {
    let mut records = Vec::new();
    for i in 0..args.instances {
        let phi = instance_matrix(args, sz, i)?;
        let x = unit_decreasing(sz.n, seed::derive(args.seeds.data_seed, i as u64))?;
        let b = SignPattern::random(args.s, seed::derive(args.seeds.sign_seed, i as u64));
        let (c, v) = prop_c_quantities(&phi, &x, args.s, b.as_slice())?;
        let scale_v = norm(&v);
        let scale_c = c.norm();
        if scale_v == 0.0 || scale_c == 0.0 {
            return Err(Error::param("block size leaves no cross terms to test").into());
        }
        let instances = [
            ("hoeffding", TailInstance::Hoeffding(v), scale_v),
            ("chaos", TailInstance::Chaos(c), scale_c),
        ];
        for (q, (check, instance, scale)) in instances.iter().enumerate() {
            for (g, factor) in TAIL_GRID.iter().enumerate() {
                let t = factor * scale;
                let parent = seed::derive(args.seeds.sign_seed, i as u64);
                let stream = seed::derive(parent, (1 + q * TAIL_GRID.len() + g) as u64);
                let r = tail_check(instance, t, sz.trials, stream)?;
                records.push(json!({
                    "check": check,
                    "instance": i,
                    "t": t,
                    "trials": r.trials,
                    "exceedances": r.exceedances,
                    "measured": r.empirical,
                    "bound": r.bound.min(1.0) + r.slack,
                    "pass": r.pass,
                }));
            }
        }
    }
    Ok(records)
}

/// Proof-internal magnitudes with a certified δ, plus the embedding success
/// rate at the requested size.
fn theorem(args: &VerifyArgs, sz: &Sizes) -> CliResult<Vec<Value>> {
    let (k, s) = min_sparsity_for_points(args.p, args.eta)?;
    let mut records = Vec::new();
    for i in 0..args.instances {
        let phi = instance_matrix(args, sz, i)?;
        let s = s.min(sz.n);
        let delta = rip_upper_bound_gershgorin(&phi, k.min(sz.n))?;
        let trial_seed = seed::derive(args.seeds.data_seed, i as u64);
        let r = proof_term_check(&phi, delta, s, args.eta, args.samples, trial_seed)?;
        records.push(json!({
            "check": "proof-terms",
            "instance": i,
            "s": s,
            "delta_certificate": delta,
            "second_term_exceedances": r.second_term_exceedances,
            "third_term_exceedances": r.third_term_exceedances,
            "measured": r.combined_rate(),
            "bound": r.eta + r.slack,
            "pass": r.pass,
        }));
    }
    let cfg = TrialConfig {
        eta: args.eta,
        matrix_seed: args.seeds.matrix_seed,
        sign_seed: args.seeds.sign_seed,
        data_seed: args.seeds.data_seed,
        ..TrialConfig::new(
            sz.n,
            sz.m,
            args.p,
            args.epsilon,
            args.construction.resolve(),
        )
    };
    let est = failure_rate(&cfg, sz.trials, 0)?;
    records.push(json!({
        "check": "embedding-success",
        "trials": est.trials,
        "failures": est.failures,
        "interval": [est.interval.0, est.interval.1],
        "max_distortion": est.max_distortion,
        "measured": est.success_rate(),
        "bound": 1.0 - args.eta,
        "pass": est.success_rate() >= 1.0 - args.eta,
    }));
    Ok(records)
}

pub fn verify(args: &VerifyArgs, params: &Command) -> CliResult<()> {
    let sz = sizes(args);
    if args.instances == 0 || args.samples == 0 {
        return Err(Error::param("--instances and --samples must be positive").into());
    }
    let records = match args.suite {
        Suite::Prop53 => prop53(args, &sz)?,
        Suite::Prop54 => prop54(args, &sz)?,
        Suite::Expansion => expansion(args, &sz)?,
        Suite::Tails => tails(args, &sz)?,
        Suite::Theorem => theorem(args, &sz)?,
    };
    let failed = records.iter().filter(|r| r["pass"] != json!(true)).count();
    let summary = json!({
        "suite": args.suite,
        "checks": records.len(),
        "failed": failed,
        "pass": failed == 0,
    });
    let checks = records.len();
    let manifest = RunManifest::new(params);
    let text = report(&manifest, records, summary);
    match &args.output {
        Some(path) => write_with_manifest(path, &text, &manifest)?,
        None => print!("{text}"),
    }
    println!("{checks} checks, {failed} failed");
    ensure(failed == 0, || format!("{failed} check(s) failed"))
}
