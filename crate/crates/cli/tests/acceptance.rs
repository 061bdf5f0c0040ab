//! The acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use geodesible::catalog::{hopf_bundle, hopf_perturbed_alpha, s3_chain};
use geodesible::checks::{abbondandolo_suite, volume_invariance, ANALYTIC_TOL};
use geodesible::error::CheckError;
use geodesible::seifert::{chi_orb, euler_number, integrality_certificate, stb_invariants};
use geodesible::{Orbifold2D, QuadratureSpec, RationalQ, SeifertData};

type Outcome = Result<String, String>;

fn cli(args: &[&str]) -> (i32, Value) {
    let argv: Vec<String> = std::iter::once("geodesible").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = geodesible_cli::run(&argv, &mut out, &mut err);
    let doc = serde_json::from_slice(&out).unwrap_or_else(|_| panic!("no JSON for {args:?}: {}", String::from_utf8_lossy(&err)));
    (code, doc)
}

fn num(doc: &Value, key: &str) -> f64 {
    doc["result"][key].as_f64().unwrap_or(f64::NAN)
}

fn report<'a>(doc: &'a Value, name: &str) -> &'a Value {
    doc["reports"].as_array().and_then(|r| r.iter().find(|r| r["name"] == name)).unwrap_or(&Value::Null)
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, format!("{label}: {got} vs {want} (tol {tol:e})"))
}

fn hopf_volume() -> Outcome {
    let t = Instant::now();
    let (code, doc) = cli(&["hopf", "--what", "volume", "--order", "32"]);
    let dt = t.elapsed();
    let v = num(&doc, "volume");
    within("volume", v, 1.0, 1e-8)?;
    ensure(code == 0, format!("exit code {code}"))?;
    ensure(dt < Duration::from_secs(5), format!("took {dt:?}"))?;
    Ok(format!("volume = {v:.15}, {dt:.2?}"))
}

fn hopf_section() -> Outcome {
    let (code, doc) = cli(&["hopf", "--what", "section", "--r-max", "1000"]);
    let v = num(&doc, "integral");
    let bound = num(&doc, "truncation_bound");
    within("section integral", v, 1.0, 1e-5)?;
    ensure(bound.is_finite() && bound > 0.0, format!("truncation bound {bound}"))?;
    ensure(code == 0, format!("exit code {code}"))?;
    Ok(format!("integral = {v:.12}, truncation bound = {bound:e}"))
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn seifert_invariants() -> Outcome {
    let q = |n, d| RationalQ::new(n, d).unwrap();
    let e1 = euler_number(&SeifertData::new(0, vec![(1, 1)]).unwrap());
    ensure(e1 == q(-1, 1), format!("e(0;(1,1)) = {e1}"))?;
    let e2 = euler_number(&SeifertData::new(0, vec![(2, 1), (3, 1), (5, 1)]).unwrap());
    ensure(e2 == q(-31, 30), format!("e(0;(2,1),(3,1),(5,1)) = {e2}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data: Vec<SeifertData> = (0..10_000)
        .map(|_| {
            let pairs = (0..10)
                .map(|_| {
                    let a = rng.random_range(1..=50i64);
                    loop {
                        let b = rng.random_range(-100..=100i64);
                        if b != 0 && gcd(a, b) == 1 {
                            break (a, b);
                        }
                    }
                })
                .collect();
            SeifertData::new(rng.random_range(0..=5), pairs).unwrap()
        })
        .collect();
    let t = Instant::now();
    let failures = data
        .iter()
        .filter(|s| !integrality_certificate(s).map(|(_, p)| p.is_integer()).unwrap_or(false))
        .count();
    let dt = t.elapsed();
    ensure(failures == 0, format!("{failures} integrality failures"))?;
    ensure(dt < Duration::from_secs(1), format!("integrality took {dt:?}"))?;
    Ok(format!("e = {e1}, {e2}; 10000 certificates in {dt:.2?}, 0 failures"))
}

fn stb_matches_chi() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..1000 {
        let n = rng.random_range(0..=6);
        let cones = (0..n).map(|_| rng.random_range(2..=12i64)).collect();
        let o = Orbifold2D::new(rng.random_range(0..=5), cones).unwrap();
        let (e, chi) = (euler_number(&stb_invariants(&o)), chi_orb(&o));
        ensure(e == chi, format!("case {i}: {o:?}: {e} vs {chi}"))?;
    }
    Ok("1000 random orbifolds, exact equality".into())
}

fn identity_residual() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for (dim, n) in [(3, 0), (3, 1), (5, 0), (5, 1), (5, 2)] {
        let r = abbondandolo_suite(dim, n, 50, 20, ANALYTIC_TOL).map_err(|e| e.to_string())?;
        ensure(r.passed, format!("dim {dim}, n {n}: {:?}", r.computed))?;
        worst = worst.max(r.computed.distance(&r.expected));
    }
    ensure(
        matches!(abbondandolo_suite(3, 2, 1, 1, ANALYTIC_TOL), Err(CheckError::DimensionTooSmall { .. })),
        "dim 3, n 2 must be rejected".into(),
    )?;
    let dt = t.elapsed();
    ensure(dt < Duration::from_secs(30), format!("took {dt:?}"))?;
    Ok(format!("worst relative residual {worst:e}, {dt:.2?}; (3, 2) rejected"))
}

fn volume_invariance_check() -> Outcome {
    let h = hopf_bundle();
    let beta = hopf_perturbed_alpha(0.1).map_err(|e| e.to_string())?;
    let r = volume_invariance(&h.alpha, &beta, &h.x, &s3_chain(&h.chart), 1, &QuadratureSpec::default()).map_err(|e| e.to_string())?;
    let (a, b) = (r.computed.distance(&geodesible::Quantity::real(0.0)), r.expected.distance(&geodesible::Quantity::real(0.0)));
    within("alpha vs beta", a, b, 1e-6)?;
    within("alpha", a, 1.0, 1e-6)?;
    within("beta", b, 1.0, 1e-6)?;
    Ok(format!("int alpha = {a:.12}, int beta = {b:.12}"))
}

fn disc() -> Outcome {
    let mut lines = Vec::new();
    for (h, closed) in [("1", Some(PI)), ("2-u", Some(2.0 * PI)), ("1+u^2/8", None)] {
        let (code, doc) = cli(&["disc", "--H", h, "--method", "both"]);
        let (d, r) = (num(&doc, "direct"), num(&doc, "return_time"));
        within(&format!("H = {h}: direct vs return time"), d, r, 1e-6)?;
        if let Some(c) = closed {
            within(&format!("H = {h}: direct vs closed form"), d, c, 1e-8)?;
            within(&format!("H = {h}: return time vs closed form"), r, c, 1e-8)?;
        }
        ensure(code == 0, format!("H = {h}: exit code {code}"))?;
        lines.push(format!("{h}: {d:.10}"));
    }
    Ok(lines.join(", "))
}

fn gauss_bonnet() -> Outcome {
    let (c1, sphere) = cli(&["gauss-bonnet", "--profile", "sin(r)", "--length", "pi", "--alpha1", "1", "--alpha2", "1", "--tolerance", "1e-8"]);
    let (c2, football) = cli(&[
        "gauss-bonnet",
        "--profile",
        "sin(r)*(1/2 - r/(6*pi))",
        "--length",
        "pi",
        "--alpha1",
        "2",
        "--alpha2",
        "3",
        "--tolerance",
        "1e-6",
    ]);
    let s = sphere["result"]["total_curvature"]["value"].as_f64().unwrap_or(f64::NAN);
    let f = football["result"]["total_curvature"]["value"].as_f64().unwrap_or(f64::NAN);
    within("sphere", s, 4.0 * PI, 1e-8)?;
    within("football", f, 5.0 * PI / 3.0, 1e-6)?;
    for (doc, chi) in [(&sphere, "2"), (&football, "5/6")] {
        ensure(doc["result"]["chi_orb"] == chi, format!("chi_orb {} vs {chi}", doc["result"]["chi_orb"]))?;
        ensure(report(doc, "chi_orb_from_cone_orders")["passed"] == true, "exact chi_orb report failed".into())?;
    }
    ensure(c1 == 0 && c2 == 0, format!("exit codes {c1}, {c2}"))?;
    Ok(format!("sphere {s:.12}, football {f:.12}; expected 2*pi*chi_orb with chi_orb exact"))
}

fn poincare_hopf() -> Outcome {
    let cases = [
        (vec!["--genus", "0", "--zeros", "1:0,1:0"], "2"),
        (vec!["--genus", "0", "--cones", "2,3", "--zeros", "2:0,3:0"], "5/6"),
        (vec!["--genus", "1"], "0"),
    ];
    for (args, chi) in cases {
        let mut argv = vec!["poincare-hopf"];
        argv.extend(args.iter().copied());
        let (code, doc) = cli(&argv);
        let r = report(&doc, "poincare_hopf");
        ensure(code == 0 && r["passed"] == true && r["tolerance"] == 0.0, format!("{args:?}: {r}"))?;
        ensure(doc["result"]["chi_orb"] == chi, format!("{args:?}: chi_orb {}", doc["result"]["chi_orb"]))?;
    }
    Ok("sphere (2 smooth zeros), spindle(2,3) (cone zeros), torus (no zeros): exact".into())
}

fn beltrami() -> Outcome {
    let (c1, pull) = cli(&["beltrami", "--a1", "1.2", "--a2", "0.8", "--check", "pullback", "--points", "100"]);
    let (c2, geo) = cli(&["beltrami", "--a1", "1.2", "--a2", "0.8", "--check", "geodesible", "--points", "100"]);
    let p = num(&pull, "pullback_max_entry_defect");
    let w = num(&geo, "wadsley_residual");
    ensure(p < 1e-8, format!("pullback defect {p:e}"))?;
    ensure(w < 1e-5, format!("geodesibility residual {w:e}"))?;
    ensure(c1 == 0 && c2 == 0, format!("exit codes {c1}, {c2}"))?;
    Ok(format!("pullback defect {p:e}, geodesibility residual {w:e}"))
}

fn cartan() -> Outcome {
    let (code, doc) = cli(&["cartan", "--check", "all", "--points", "100"]);
    let residual = doc["result"]["structure_residual"]["value"].as_f64().unwrap_or(f64::NAN);
    let alpha = num(&doc, "alpha_defect");
    let bott = report(&doc, "bott_relation");
    let (re, vol) = (bott["computed"]["re"].as_f64().unwrap_or(f64::NAN), bott["expected"]["re"].as_f64().unwrap_or(f64::NAN));
    ensure(residual < 1e-8, format!("structure residual {residual:e}"))?;
    ensure(alpha < 1e-8, format!("alpha defect {alpha:e}"))?;
    within("Bott vs -vol", re, vol, 1e-8)?;
    ensure(code == 0, format!("exit code {code}"))?;
    Ok(format!("residual {residual:e}, alpha defect {alpha:e}, Bott {re:.10} = -vol"))
}

fn raw(args: &[&str]) -> Vec<u8> {
    let argv: Vec<String> = std::iter::once("geodesible").chain(args.iter().copied()).map(String::from).collect();
    let mut out = Vec::new();
    geodesible_cli::run(&argv, &mut out, &mut Vec::new());
    // drop the timestamp line
    String::from_utf8_lossy(&out)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

fn determinism() -> Outcome {
    let argv = ["identity", "--dim", "3", "--seeds", "5", "--points", "5", "--seed", "17"];
    let (a, b) = (raw(&argv), raw(&argv));
    ensure(!a.is_empty() && a == b, "outputs differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("hopf volume", hopf_volume),
        ("hopf section", hopf_section),
        ("seifert invariants", seifert_invariants),
        ("unit tangent bundle", stb_matches_chi),
        ("identity residual", identity_residual),
        ("volume invariance", volume_invariance_check),
        ("disc volumes", disc),
        ("gauss-bonnet", gauss_bonnet),
        ("poincare-hopf", poincare_hopf),
        ("beltrami", beltrami),
        ("cartan / bott", cartan),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("[PASS] {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
