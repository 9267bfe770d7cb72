//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the console; exits nonzero on any
//! failure.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use ripjl::analysis::{
    disjoint_block_coherence, expansion_terms, expansion_terms_dense, frobenius_norm,
    hoeffding_bound, max_disjoint_coherence, prop_c_check_with_delta, prop_c_quantities,
    rip_constant_exact, tail_check, TailInstance, DEFAULT_PAIR_CAP,
};
use ripjl::constructions::{
    build_partial_circulant, build_partial_fourier, build_partial_hadamard_with, build_subgaussian,
    randomize_signs, EmbeddingOperator, LinearOperator, Sampling, Variant,
};
use ripjl::harness::{
    failure_rate, minimal_m, scaling_exponent, Construction, SearchRange, TrialConfig,
};
use ripjl::primitives::{decreasing_arrangement, norm, norm_sq, SignPattern};
use ripjl::seed::{self, Stream};
use ripjl::transforms::{
    circular_convolve, circular_convolve_direct, fwht, naive_hadamard_multiply,
};

type Outcome = Result<String, String>;

const ORACLE_TOL: f64 = 1e-9;
const APPLY_TOL: f64 = 1e-10;
const EXACT_TOL: f64 = 1e-12;
const INEQUALITY_SLACK: f64 = 1e-10;
const TAIL_TRIALS: usize = 100_000;

fn gaussian_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed, Stream::Vectors);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    build_subgaussian(m, n, Variant::Gaussian, seed)
        .and_then(|op| op.densify())
        .expect("gaussian matrix")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!(
            "took {:.1}s, limit {}s",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn transform_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(101, Stream::Vectors);
    let mut worst_wht: f64 = 0.0;
    let mut worst_conv: f64 = 0.0;
    for i in 0..100u64 {
        let n = 1 << rng.random_range(1..=10);
        let x = gaussian_vector(n, seed::derive(1, i));
        worst_wht = worst_wht.max(max_abs_diff(
            &fwht(&x).unwrap(),
            &naive_hadamard_multiply(&x).unwrap(),
        ));

        let n = rng.random_range(2..=1024);
        let c = gaussian_vector(n, seed::derive(2, i));
        let x = gaussian_vector(n, seed::derive(3, i));
        let fast = circular_convolve(&c, &x).unwrap();
        worst_conv = worst_conv.max(max_abs_diff(
            &fast,
            &circular_convolve_direct(&c, &x).unwrap(),
        ));
    }
    let detail =
        format!("max |fwht − naive| = {worst_wht:.2e}, max |fast − direct| = {worst_conv:.2e}");
    if worst_wht > ORACLE_TOL || worst_conv > ORACLE_TOL {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(detail)
}

fn operator_oracles() -> Outcome {
    let mut rng = seed::rng(202, Stream::Vectors);
    let mut worst: f64 = 0.0;
    let families = ["gaussian", "rademacher", "hadamard", "fourier", "circulant"];
    for family in families {
        for i in 0..50u64 {
            let matrix_seed = seed::derive(family.len() as u64, i);
            let op: EmbeddingOperator = match family {
                "gaussian" | "rademacher" => {
                    let n = rng.random_range(1..=128);
                    let m = rng.random_range(1..=n);
                    let variant = if family == "gaussian" {
                        Variant::Gaussian
                    } else {
                        Variant::Rademacher
                    };
                    build_subgaussian(m, n, variant, matrix_seed)
                }
                "hadamard" => {
                    let n = 1 << rng.random_range(0..=7);
                    let m = rng.random_range(1..=n);
                    let sampling = if i % 2 == 0 {
                        Sampling::WithReplacement
                    } else {
                        Sampling::WithoutReplacement
                    };
                    build_partial_hadamard_with(m, n, sampling, matrix_seed)
                }
                "fourier" => {
                    let n = rng.random_range(2..=128);
                    let m = 2 * rng.random_range(1..=n / 2);
                    build_partial_fourier(m, n, matrix_seed)
                }
                _ => {
                    let n = rng.random_range(1..=128);
                    let m = rng.random_range(1..=n);
                    let variant = if i % 2 == 0 {
                        Variant::Gaussian
                    } else {
                        Variant::Rademacher
                    };
                    build_partial_circulant(m, n, variant, matrix_seed)
                }
            }
            .map_err(|e| format!("{family}: {e}"))?;
            let x = gaussian_vector(op.input_dim(), seed::derive(9, i));
            let fast = op.apply(&x).unwrap();
            let dense = op.densify().unwrap() * DVector::from_vec(x);
            worst = worst.max(max_abs_diff(&fast, dense.as_slice()));
        }
    }
    let detail = format!("5 families × 50 instances, max |apply − densify·x| = {worst:.2e}");
    if worst > APPLY_TOL {
        return Err(detail);
    }
    Ok(detail)
}

fn exact_rip_sanity() -> Outcome {
    for n in 1..=6 {
        let id = DMatrix::<f64>::identity(n, n);
        for k in 1..=n {
            let d = rip_constant_exact(&id, k).unwrap().delta;
            if d.abs() > EXACT_TOL {
                return Err(format!("δ_{k}(I_{n}) = {d}"));
            }
        }
    }
    let ones = rip_constant_exact(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), 2)
        .unwrap()
        .delta;
    let two = rip_constant_exact(&DMatrix::from_row_slice(1, 1, &[2.0]), 1)
        .unwrap()
        .delta;
    if (ones - 1.0).abs() > EXACT_TOL || (two - 3.0).abs() > EXACT_TOL {
        return Err(format!("δ_2([1,1]) = {ones}, δ_1([2]) = {two}"));
    }
    for i in 0..100u64 {
        let phi = gaussian_matrix(8, 16, seed::derive(303, i));
        let d: Vec<f64> = (1..=3)
            .map(|k| rip_constant_exact(&phi, k).unwrap().delta)
            .collect();
        if d.windows(2).any(|w| w[0] > w[1] + EXACT_TOL) {
            return Err(format!("matrix {i}: δ_1..3 = {d:?} not monotone"));
        }
    }
    Ok(format!(
        "identity, analytic cases exact; 100 matrices monotone; δ_2([1,1]) = {ones}"
    ))
}

/// Twenty-by-forty Gaussian matrices with their exact δ₄, shared by the
/// block-estimate criteria.
fn block_matrices() -> Vec<(DMatrix<f64>, f64)> {
    (0..100u64)
        .map(|i| {
            let phi = gaussian_matrix(20, 40, seed::derive(404, i));
            let delta = rip_constant_exact(&phi, 4).unwrap().delta;
            (phi, delta)
        })
        .collect()
}

fn disjoint_coherence(matrices: &[(DMatrix<f64>, f64)], setup: Duration) -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    let mut pairs = 0;
    for (phi, delta) in matrices {
        let scan = max_disjoint_coherence(phi, 2, DEFAULT_PAIR_CAP).unwrap();
        // the scan's closed form against a direct SVD at its witness
        let svd = disjoint_block_coherence(phi, &scan.witness.0, &scan.witness.1).unwrap();
        if (svd - scan.max_coherence).abs() > EXACT_TOL {
            return Err(format!(
                "closed form {} disagrees with SVD {svd}",
                scan.max_coherence
            ));
        }
        pairs += scan.pairs;
        tightest = tightest.max(scan.max_coherence / delta);
        violations += usize::from(scan.max_coherence > delta + INEQUALITY_SLACK);
    }
    let detail = format!(
        "{pairs} disjoint pairs, {violations} violations, max coherence/δ₄ = {tightest:.3}"
    );
    if violations > 0 {
        return Err(detail);
    }
    within(setup + start.elapsed(), Duration::from_secs(60))?;
    Ok(detail)
}

fn unit_decreasing(n: usize, seed: u64) -> Vec<f64> {
    let x = gaussian_vector(n, seed);
    let nx = norm(&x);
    decreasing_arrangement(&x.iter().map(|v| v / nx).collect::<Vec<_>>())
        .unwrap()
        .0
}

fn block_bounds(matrices: &[(DMatrix<f64>, f64)]) -> Outcome {
    let start = Instant::now();
    let mut violations = [0usize; 3];
    let mut ratio = [0.0f64; 3];
    for (i, (phi, delta)) in matrices.iter().enumerate() {
        for j in 0..1000u64 {
            let idx = (i as u64) << 32 | j;
            let x = unit_decreasing(40, seed::derive(505, idx));
            let b = SignPattern::random(2, seed::derive(506, idx));
            let r = prop_c_check_with_delta(phi, &x, 2, b.as_slice(), *delta).unwrap();
            let measured = [r.norm_c_spectral, r.norm_c_frobenius, r.norm_v];
            for q in 0..3 {
                violations[q] += usize::from(measured[q] > r.bounds[q] + INEQUALITY_SLACK);
                ratio[q] = ratio[q].max(measured[q] / r.bounds[q]);
            }
        }
    }
    let detail = format!(
        "100k instances, violations {violations:?}, max measured/bound ‖C‖ {:.3} ‖C‖_F {:.3} ‖v‖ {:.3}",
        ratio[0], ratio[1], ratio[2]
    );
    if violations.iter().any(|&v| v > 0) {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(detail)
}

fn expansion_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let base = build_subgaussian(20, 40, Variant::Gaussian, seed::derive(606, i)).unwrap();
        let phi = base.densify().unwrap();
        let op = randomize_signs(base, seed::derive(607, i));
        let x = gaussian_vector(40, seed::derive(608, i));
        let dense = expansion_terms_dense(&phi, op.signs().as_slice(), &x, 2).unwrap();
        let fast = expansion_terms(&op, &x, 2).unwrap();
        // an independent evaluation of the total
        let direct = norm_sq(&op.apply(&x).unwrap());
        worst = worst
            .max(dense.residual())
            .max(fast.residual())
            .max((dense.term1 + dense.term2 + dense.term3 - direct).abs());
    }
    let detail = format!("1000 instances, max residual {worst:.2e}");
    if worst > INEQUALITY_SLACK {
        return Err(detail);
    }
    Ok(detail)
}

fn random_chaos(n: usize, seed: u64) -> DMatrix<f64> {
    let g = gaussian_vector(n * n, seed);
    DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Less => g[i * n + j],
        std::cmp::Ordering::Greater => g[j * n + i],
    })
}

fn tail_bounds() -> Outcome {
    let start = Instant::now();
    let grid = [0.5, 1.0, 2.0, 4.0];
    let phi = gaussian_matrix(20, 40, 707);
    let (c, v) = prop_c_quantities(&phi, &unit_decreasing(40, 708), 2, &[1.0, -1.0]).unwrap();
    let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let hoeffding = [gaussian_vector(64, 709), vec![1.0; 64], v];
    let chaos = [random_chaos(40, 710), c, swap];
    let mut checks = 0;
    let mut worst_margin = f64::INFINITY;
    let mut run = |instance: TailInstance, scale: f64, tag: u64| -> Result<(), String> {
        for (g, factor) in grid.iter().enumerate() {
            let r = tail_check(
                &instance,
                factor * scale,
                TAIL_TRIALS,
                seed::derive(tag, g as u64),
            )
            .unwrap();
            checks += 1;
            worst_margin = worst_margin.min(r.bound.min(1.0) + r.slack - r.empirical);
            if !r.pass {
                return Err(format!("instance {tag}, t = {factor}·scale: {r:?}"));
            }
        }
        Ok(())
    };
    for (i, x) in hoeffding.into_iter().enumerate() {
        let scale = norm(&x);
        // at t = ‖x‖ the bound is 2e^{-1/2}
        if (hoeffding_bound(&x, scale).unwrap() - 1.213_061_319_425_267).abs() > EXACT_TOL {
            return Err("hoeffding bound formula".into());
        }
        run(TailInstance::Hoeffding(x), scale, 710 + i as u64)?;
    }
    for (i, x) in chaos.into_iter().enumerate() {
        let scale = frobenius_norm(&x);
        run(TailInstance::Chaos(x), scale, 720 + i as u64)?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{checks} grid points at 10^5 draws, smallest margin {worst_margin:.4}"
    ))
}

fn theorem_desk_scale() -> Outcome {
    let start = Instant::now();
    let cfg = TrialConfig::new(1024, 256, 100, 0.5, Construction::Gaussian);
    let est = failure_rate(&cfg, 200, 808).unwrap();
    let detail = format!(
        "success {:.3} over 200 seeds, worst distortion {:.3}",
        est.success_rate(),
        est.max_distortion
    );
    if est.success_rate() < 0.95 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(detail)
}

fn epsilon_scaling() -> Outcome {
    let start = Instant::now();
    let range = SearchRange { min: 8, max: 1024 };
    let measure = |epsilon: f64| -> Result<f64, String> {
        let cfg = TrialConfig::new(1024, 8, 100, epsilon, Construction::Gaussian);
        minimal_m(&cfg, 1.0 - cfg.eta, range, 200, 909)
            .map(|r| r.m as f64)
            .map_err(|e| format!("ε = {epsilon}: {e}"))
    };
    let ratio = measure(0.25)? / measure(0.5)?;
    let eps = [0.2, 0.3, 0.45, 0.67, 1.0];
    let ms = eps
        .iter()
        .map(|&e| measure(e))
        .collect::<Result<Vec<_>, _>>()?;
    let slope = scaling_exponent(&eps, &ms).unwrap();
    let detail = format!("m*(0.25)/m*(0.5) = {ratio:.2}, slope {slope:.3}, m* = {ms:?}");
    if !(2.5..=6.0).contains(&ratio) || !(-2.5..=-1.5).contains(&slope) {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(1800))?;
    Ok(detail)
}

fn null_space() -> Outcome {
    let op = build_partial_hadamard_with(512, 1024, Sampling::WithoutReplacement, 1010).unwrap();
    let phi = op.densify().unwrap();
    let q = phi.transpose().qr().q();
    let z = DVector::from_vec(gaussian_vector(1024, 1011));
    let x = &z - &q * (q.transpose() * &z);
    let x = x.as_slice().to_vec();
    let nx = norm(&x);
    let residual = norm(&op.apply(&x).unwrap()) / nx;
    if residual > 1e-9 {
        return Err(format!("‖Φx‖/‖x‖ = {residual:.2e}"));
    }
    let mean = (0..1000u64)
        .map(|i| {
            let signed = randomize_signs(op.clone(), seed::derive(1012, i));
            norm_sq(&signed.apply(&x).unwrap()) / (nx * nx)
        })
        .sum::<f64>()
        / 1000.0;
    let detail = format!("‖Φx‖/‖x‖ = {residual:.2e}, mean ‖ΦD_ξx‖²/‖x‖² = {mean:.4}");
    if !(0.8..=1.2).contains(&mean) {
        return Err(detail);
    }
    Ok(detail)
}

fn ripjl(dir: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_ripjl"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&status.stderr)
        ))
    }
}

fn replay_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(
        dir.path().join("points.csv"),
        "1,2,3,4,5,6,7,8\n0.5,-1,0,2,0,0,1,-3\n-2,0.25,1,1,1,0,0,4\n",
    )
    .map_err(|e| e.to_string())?;
    let runs: [&[&str]; 4] = [
        &[
            "embed",
            "--input",
            "points.csv",
            "--construction",
            "hadamard",
            "--m",
            "4",
            "--output",
            "embed.csv",
        ],
        &[
            "rip", "--n", "12", "--m", "6", "--k", "3", "--output", "rip.json",
        ],
        &[
            "verify",
            "--suite",
            "expansion",
            "--instances",
            "3",
            "--samples",
            "20",
            "--output",
            "verify.json",
        ],
        &[
            "sweep",
            "--axis",
            "m",
            "--values",
            "16,32,64",
            "--n",
            "64",
            "--p",
            "10",
            "--trials",
            "20",
            "--output",
            "sweep.json",
        ],
    ];
    for args in runs {
        ripjl(dir.path(), args)?;
        let output = args[args.len() - 1];
        let original = std::fs::read(dir.path().join(output)).map_err(|e| e.to_string())?;
        let replayed = format!("replayed-{output}");
        let manifest = format!("{output}.manifest.json");
        ripjl(
            dir.path(),
            &["--jobs", "2", "replay", &manifest, "--output", &replayed],
        )?;
        // and in place, at the recorded path
        ripjl(dir.path(), &["replay", &manifest])?;
        for path in [replayed.as_str(), output] {
            let again = std::fs::read(dir.path().join(path)).map_err(|e| e.to_string())?;
            if again != original {
                return Err(format!("{} replay of {output} differs", args[0]));
            }
        }
    }
    Ok("embed, rip, verify, sweep replayed byte-identically".into())
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id:>2}] {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{id:>2}] {name}: {detail} ({secs:.1}s)");
            }
        }
    };
    let t = Instant::now();
    report(1, "transform oracles", t, transform_oracles());
    let t = Instant::now();
    report(2, "operator oracles", t, operator_oracles());
    let t = Instant::now();
    report(3, "exact RIP sanity", t, exact_rip_sanity());
    let t = Instant::now();
    let matrices = block_matrices();
    report(
        4,
        "disjoint block coherence",
        t,
        disjoint_coherence(&matrices, t.elapsed()),
    );
    let t = Instant::now();
    report(
        5,
        "chaos matrix and cross vector bounds",
        t,
        block_bounds(&matrices),
    );
    let t = Instant::now();
    report(6, "three-term expansion", t, expansion_identity());
    let t = Instant::now();
    report(7, "Rademacher tail bounds", t, tail_bounds());
    let t = Instant::now();
    report(
        8,
        "embedding success at desk scale",
        t,
        theorem_desk_scale(),
    );
    let t = Instant::now();
    report(9, "epsilon scaling of minimal m", t, epsilon_scaling());
    let t = Instant::now();
    report(10, "null space and random signs", t, null_space());
    let t = Instant::now();
    report(11, "manifest replay determinism", t, replay_determinism());
    println!("acceptance: {} of 11 criteria passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
