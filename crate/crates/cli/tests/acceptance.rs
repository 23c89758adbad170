//! Acceptance suite. Runs each criterion in turn, prints one PASS/FAIL line
//! per criterion, and exits non-zero if any failed.

use std::f64::consts::E;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use conevol::bounds::{
    binom_entropy_bound, binomial, choose_k, moment_binomial, moment_binomial_root, ln_big, convex_volume_bound,
};
use conevol::forms::HomogeneousForm;
use conevol::geometry::{gauge, orthonormal_basis, volume_ratio, GaugeKind, GaugeOracle};
use conevol::membership::{is_convex, is_nonneg, sos_project, GramStatus, SolverConfig};
use conevol::sphere::{sphere_mean, MetricTag};
use conevol_cli::verify::run_checks;
use conevol_cli::volume::{sweep, Cone, NRange, SweepPlan, SweepRow};
use conevol_cli::RunManifest;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const GRID: [(usize, u32); 6] = [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2), (4, 3)];

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let identities = [
        "product_sphere_two_paths",
        "stokes_identity_harmonic",
        "laplacian_eigen_identity",
        "hessian_trace_equals_laplacian",
        "radial_biform_closed_form",
    ];
    let mut worst = 0.0f64;
    for (n, d) in GRID {
        let report = conevol_cli::verify::verify(n, d, 100, 42, RunManifest::new("verify", 42));
        for name in identities {
            let c = report.checks.iter().find(|c| c.name == name).ok_or(format!("missing check {name}"))?;
            ensure(c.passed, || format!("{name} failed at n={n} 2d={}: residual {:e}", 2 * d, c.worst_residual))?;
            worst = worst.max(c.worst_residual);
        }
        ensure(report.passed, || format!("verify reported a failure at n={n} 2d={}", 2 * d))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s, limit 60s"))?;
    Ok(format!("6 (n, 2d) cells, worst identity residual {worst:.2e}, {secs:.1}s"))
}

fn inequality_suite() -> Outcome {
    let mut violations = 0usize;
    let mut cases = 0usize;
    for (n, d) in GRID {
        for c in run_checks(n, d, 100, 42) {
            if c.name == "dirichlet_gradient_bound" || c.name == "hessian_metric_bound" {
                ensure(c.cases == 1000, || format!("{} ran {} cases", c.name, c.cases))?;
                cases += c.cases;
                if !c.passed {
                    violations += 1;
                }
            }
        }
    }
    let c = conevol::bounds::metric_ratio(3, 2);
    ensure((c - 387.2).abs() < 1e-9, || format!("metric constant at (3,2) is {c}"))?;
    ensure(violations == 0, || format!("{violations} failing checks"))?;
    Ok(format!("{cases} random forms, zero violations, metric constant(3,2) = {c}"))
}

fn moment_constant() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=20 {
        for d in 1..=5 {
            let k = choose_k(n, d);
            ensure(k == (n as f64 * (2.0 * d as f64 + 1.0).ln()).ceil() as u64, || format!("k at ({n},{d})"))?;
            // Exact comparison: C^{1/2k} <= 3e  iff  ln C <= 2k ln(3e).
            let ln_c = ln_big(&moment_binomial(n, d, k));
            ensure(ln_c <= 2.0 * k as f64 * (3.0 * E).ln(), || format!("C^(1/2k) > 3e at ({n},{d})"))?;
            worst = worst.max(moment_binomial_root(n, d, k) / (3.0 * E));
        }
    }
    let mut checked = 0;
    for a in 1..=60u64 {
        for b in 0..=a {
            let lhs = ln_big(&binomial(a, b));
            let rhs = binom_entropy_bound(a, b).map_err(|e| e.to_string())?.ln();
            ensure(lhs <= rhs + 1e-12, || format!("C({a},{b}) above its entropy bound"))?;
            checked += 1;
        }
    }
    Ok(format!("max C^(1/2k)/(3e) = {worst:.4}; entropy bound holds for {checked} pairs"))
}

fn section_volume() -> Outcome {
    let basis = orthonormal_basis(3, 2, MetricTag::Hessian).map_err(|e| e.to_string())?;
    let oracle = GaugeOracle::new(GaugeKind::XSection, 3, 2);
    let est = volume_ratio(&oracle, &basis, 20_000, 7).map_err(|e| e.to_string())?;
    let s = est.estimator;
    let bound = convex_volume_bound(3, 2);
    ensure(s.power_mean_root >= 0.0121 && s.power_mean_root >= bound, || {
        format!("power_mean_root {} below {bound}", s.power_mean_root)
    })?;
    ensure(s.power_mean_root >= s.inverse_mean && s.inverse_mean >= s.harmonic_mean, || {
        format!("chain broken: {} {} {}", s.power_mean_root, s.inverse_mean, s.harmonic_mean)
    })?;
    Ok(format!(
        "power_mean_root {:.4} (CI {:.4}..{:.4}) >= {bound:.5}; {:.4} >= {:.4} >= {:.4}; flagged {:.3}",
        s.power_mean_root, est.ci[0], est.ci[1], s.power_mean_root, s.inverse_mean, s.harmonic_mean, est.flagged_fraction
    ))
}

fn zero_mean(rng: &mut ChaCha8Rng) -> HomogeneousForm {
    let p = HomogeneousForm::random(3, 4, rng);
    let m = sphere_mean(&p);
    p.try_sub(&HomogeneousForm::radial(3, 2).scale(m)).expect("same space")
}

fn sandwich() -> Outcome {
    let x = GaugeOracle::new(GaugeKind::XSection, 3, 2);
    let k = GaugeOracle::new(GaugeKind::KTilde, 3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut lo_slack, mut hi_slack) = (f64::INFINITY, f64::INFINITY);
    for i in 0..100 {
        let p = zero_mean(&mut rng);
        let gx = gauge(&x, &p).map_err(|e| e.to_string())?;
        let gk = gauge(&k, &p).map_err(|e| e.to_string())?;
        let (a, b) = (gk - gx / 12.0, gx / 4.0 - gk);
        ensure(a >= -1e-6 && b >= -1e-6, || format!("direction {i}: Ga_X = {gx}, Ga_K = {gk}"))?;
        lo_slack = lo_slack.min(a);
        hi_slack = hi_slack.min(b);
    }
    let basis = orthonormal_basis(3, 2, MetricTag::Hessian).map_err(|e| e.to_string())?;
    let vx = volume_ratio(&x, &basis, 2000, 13).map_err(|e| e.to_string())?;
    let vk = volume_ratio(&k, &basis, 2000, 13).map_err(|e| e.to_string())?;
    let (kl, kh) = (vk.ci[0], vk.ci[1]);
    ensure(4.0 * vx.ci[0] <= kh && kl <= 12.0 * vx.ci[1], || {
        format!("v(K) CI {:?} misses [4, 12] x v(X) CI {:?}", vk.ci, vx.ci)
    })?;
    let ratio = vk.estimator.power_mean_root / vx.estimator.power_mean_root;
    Ok(format!(
        "min slack {lo_slack:.3e} / {hi_slack:.3e} over 100 directions; v(K)/v(X) = {ratio:.3} (2000 samples each)"
    ))
}

fn read_form(name: &str) -> Result<HomogeneousForm, String> {
    let path = data(name);
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn membership() -> Outcome {
    let cfg = SolverConfig::default();
    let status = |p: &HomogeneousForm| sos_project(p, &cfg).map(|c| c.status).map_err(|e| e.to_string());
    let err = |e: conevol::Error| e.to_string();

    let motzkin = read_form("motzkin.json")?;
    ensure(is_nonneg(&motzkin, 1e-9).map_err(err)?.holds, || "Motzkin not nonnegative".into())?;
    ensure(status(&motzkin)? == GramStatus::Infeasible, || "Motzkin not rejected as SOS".into())?;
    ensure(!is_convex(&motzkin, 1e-9).map_err(err)?.holds, || "Motzkin convex".into())?;

    let r4 = read_form("radial_quartic.json")?;
    ensure(status(&r4)? == GramStatus::Feasible, || "(x1^2+x2^2)^2 not SOS".into())?;
    ensure(is_convex(&r4, 1e-9).map_err(err)?.holds, || "(x1^2+x2^2)^2 not convex".into())?;

    let xy = read_form("x1x2_squared.json")?;
    let dec = is_convex(&xy, 1e-9).map_err(err)?;
    ensure(!dec.holds && dec.margin <= -1.0, || format!("x1^2 x2^2 margin {}", dec.margin))?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let r = HomogeneousForm::radial(3, 2);
    let (mut convex, mut sos, mut nonneg, mut undecided) = (0, 0, 0, 0);
    for i in 0..500 {
        let g = HomogeneousForm::random(3, 4, &mut rng);
        let shift = rng.random_range(0.0..4.0) * g.max_abs_coefficient();
        let p = g.try_add(&r.scale(shift)).expect("same space");
        let nn = is_nonneg(&p, 1e-9).map_err(err)?.holds;
        let cv = is_convex(&p, 1e-9).map_err(err)?.holds;
        let sq = status(&p)?;
        nonneg += nn as usize;
        convex += cv as usize;
        sos += (sq == GramStatus::Feasible) as usize;
        undecided += (sq == GramStatus::Undecided) as usize;
        ensure(!cv || nn, || format!("form {i} convex but not nonnegative"))?;
        ensure(sq != GramStatus::Feasible || nn, || format!("form {i} SOS but not nonnegative"))?;
    }
    Ok(format!(
        "regressions hold (x1^2 x2^2 margin {:.12}); chain on 500 forms: {nonneg} nonneg, {convex} convex, {sos} sos, {undecided} undecided",
        dec.margin
    ))
}

fn well_formed(rows: &[SweepRow], text: &str) -> Result<(), String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let required = [
        "n",
        "cone",
        "power_mean_root",
        "inverse_mean",
        "harmonic_mean",
        "ci_low",
        "ci_high",
        "lower_bound",
        "reference_exponent",
    ];
    ensure(header[..required.len()] == required, || format!("header {header:?}"))?;
    let parsed: Vec<SweepRow> = reader.deserialize().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure(parsed.len() == rows.len(), || "row count differs after parsing".into())?;
    for row in &parsed {
        ensure(row.error.is_none(), || format!("cell n={} {} failed: {:?}", row.n, row.cone, row.error))?;
        for v in [row.power_mean_root, row.inverse_mean, row.harmonic_mean, row.ci_low, row.ci_high] {
            ensure(v.is_some_and(f64::is_finite), || format!("missing value in n={} {}", row.n, row.cone))?;
        }
    }
    Ok(())
}

fn sweep_trend() -> Outcome {
    let plan = SweepPlan {
        cones: vec![Cone::Pos, Cone::Convex, Cone::Sos],
        n_range: NRange { lo: 3, hi: 5 },
        d: 2,
        samples: 500,
        sos_samples: 100,
        seed: 21,
    };
    let mut buf = Vec::new();
    let rows = sweep(&plan, &mut buf).map_err(|e| format!("{e:#}"))?;
    let text = String::from_utf8(buf).map_err(|e| e.to_string())?;
    ensure(rows.len() == 9, || format!("{} rows, expected 9", rows.len()))?;
    well_formed(&rows, &text)?;
    for row in rows.iter().filter(|r| r.cone == "convex") {
        let (v, b) = (row.power_mean_root.unwrap_or(0.0), row.lower_bound.unwrap_or(f64::INFINITY));
        ensure(v >= b, || format!("convex n={}: {v} < {b}", row.n))?;
    }
    let ratios: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.cone == "sos")
        .map(|r| (r.n, r.ratio_to_pos.unwrap_or(f64::NAN)))
        .collect();
    ensure(ratios.iter().all(|(_, r)| r.is_finite()), || "ratio column missing".into())?;
    // Least-squares slope of ln ratio against ln n, for the annotation only.
    let pts: Vec<(f64, f64)> = ratios.iter().map(|&(n, r)| ((n as f64).ln(), r.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let shown: Vec<String> = ratios.iter().map(|(n, r)| format!("n={n}: {r:.3}")).collect();
    Ok(format!(
        "9 rows; convex rows above bound; v(Sq)/v(Pos) {}; fitted exponent {slope:.2} (reference -1, not asserted)",
        shown.join(", ")
    ))
}

fn run_binary(args: &[&str], threads: &str) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_conevol"))
        .args(args)
        .env("CONEVOL_THREADS", threads)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    status.code().ok_or_else(|| "killed by signal".to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let motzkin = data("motzkin.json");
    let motzkin = motzkin.to_str().ok_or("non-UTF-8 path")?;
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("verify.json", vec!["verify", "--n", "3", "--degree", "4", "--trials", "20", "--seed", "9"]),
        ("bounds.json", vec!["bounds", "--n", "4", "--degree", "4"]),
        ("volume.json", vec!["volume", "--cone", "pos", "--n", "3", "--degree", "4", "--samples", "200", "--seed", "3"]),
        ("sweep.csv", vec!["sweep", "--n", "3..3", "--degree", "4", "--cones", "pos,convex", "--samples", "100", "--seed", "3"]),
        ("membership.json", vec!["membership", "--form", motzkin, "--tests", "nonneg,sos"]),
    ];
    let mut compared = 0;
    for (file, args) in &commands {
        // Same output path for both runs, so manifests match too.
        let out = dir.path().join(file);
        let out_s = out.to_str().ok_or("non-UTF-8 path")?.to_string();
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let mut full: Vec<&str> = args.clone();
            full.extend(["--out", &out_s]);
            let code = run_binary(&full, threads)?;
            ensure(code == 0, || format!("{file} exited with {code} at {threads} threads"))?;
            let mut bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
            if file.ends_with(".csv") {
                bytes.extend(std::fs::read(conevol_cli::manifest_path(&out)).map_err(|e| e.to_string())?);
            }
            outputs.push(bytes);
        }
        ensure(outputs[0] == outputs[1], || format!("{file} differs between 1 and 4 threads"))?;
        compared += 1;
    }
    Ok(format!("{compared} commands byte-identical at CONEVOL_THREADS=1 and 4"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("exact identities", identity_suite),
        ("inequalities", inequality_suite),
        ("moment constant and entropy bound", moment_constant),
        ("convex section volume bound", section_volume),
        ("sandwich", sandwich),
        ("membership regressions", membership),
        ("volume sweep", sweep_trend),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {} PASS [{name}] ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} FAIL [{name}] ({secs:.1}s): {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
