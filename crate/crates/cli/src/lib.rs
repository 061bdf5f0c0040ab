//! Command-line front end. [`run`] takes the full argv and a writer and
//! returns the process exit code: 0 when every report passes, 1 when a check
//! fails, 2 on usage or input errors.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use geodesible::catalog::{self, DiscMethod};
use geodesible::checks;
use geodesible::error::{CheckError, InvariantError};
use geodesible::expr::{self, ParsedExpr};
use geodesible::forms::{ext_d, interior, wedge};
use geodesible::integrate::{integrate_box, IntegrationResult, QuadratureSpec};
use geodesible::riemannian::wadsley_residual;
use geodesible::seifert::{self, Orbifold2D, RationalQ, SeifertData, ZeroDatum};
use geodesible::{CheckReport, Provenance, Quantity};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "geodesible", version, about = "Checks for geodesible vector fields and Seifert invariants")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write an (x, y) CSV table for the command's profile.
    #[arg(long, global = true)]
    pub plot_data: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Gauss-Legendre order per axis.
    #[arg(long, global = true, default_value_t = geodesible::integrate::DEFAULT_GL_ORDER)]
    pub order: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopfWhat {
    Volume,
    Section,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscMethodArg {
    Direct,
    ReturnTime,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeltramiCheck {
    Pullback,
    Geodesible,
    Contact,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CartanCheck {
    Residual,
    Alpha,
    Bott,
    All,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Randomized check of the α∧(dα)ⁿ − β∧(dβ)ⁿ identity.
    Identity {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Single power; all admissible powers when omitted.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// The Hopf fibration: contact volume, section integral, Euler number.
    Hopf {
        #[arg(long, value_enum, default_value = "volume")]
        what: HopfWhat,
        /// Truncation radius for the section integral.
        #[arg(long, default_value_t = 1e3)]
        r_max: f64,
    },
    /// Euler number, volume and integrality of Seifert invariants read from JSON.
    Seifert {
        #[arg(long)]
        json: PathBuf,
    },
    /// Orbifold Euler characteristic and unit tangent bundle invariants.
    Orbifold {
        #[arg(long, default_value_t = 0)]
        genus: i64,
        /// Comma-separated cone orders, e.g. "2,3,5".
        #[arg(long, default_value = "")]
        cones: String,
    },
    /// Poincaré-Hopf on a 2-orbifold.
    PoincareHopf {
        #[arg(long, default_value_t = 0)]
        genus: i64,
        #[arg(long, default_value = "")]
        cones: String,
        /// Zeros as "order:k" pairs; order 1 is a smooth point.
        #[arg(long, default_value = "")]
        zeros: String,
    },
    /// Gauss-Bonnet for dr² + f(r)² dφ².
    GaussBonnet {
        /// f as an expression in r.
        #[arg(long, default_value = "sin(r)")]
        profile: String,
        /// Length, a constant expression such as "pi".
        #[arg(long, default_value = "pi")]
        length: String,
        #[arg(long, default_value_t = 1)]
        alpha1: i64,
        #[arg(long, default_value_t = 1)]
        alpha2: i64,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Contact volume of the disc example H(r²)dθ + (r²/2)dφ.
    Disc {
        /// H as an expression in u.
        #[arg(long = "H", default_value = "1")]
        h: String,
        #[arg(long, value_enum, default_value = "both")]
        method: DiscMethodArg,
    },
    /// The Beltrami family g_{a1,a2} on S³.
    Beltrami {
        #[arg(long, default_value_t = 1.2)]
        a1: f64,
        #[arg(long, default_value_t = 0.8)]
        a2: f64,
        #[arg(long, value_enum, default_value = "all")]
        check: BeltramiCheck,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Cartan structure of the quaternionic coframe.
    Cartan {
        #[arg(long, value_enum, default_value = "all")]
        check: CartanCheck,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

/// Failure that stops a command before it produces reports.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Failure {
        match e {
            CheckError::Precondition { .. } | CheckError::RankDeficient { .. } | CheckError::Metric(_) => {
                Failure::Check(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<geodesible::MetricError> for Failure {
    fn from(e: geodesible::MetricError) -> Failure {
        Failure::Check(e.to_string())
    }
}

impl From<InvariantError> for Failure {
    fn from(e: InvariantError) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<geodesible::FormError> for Failure {
    fn from(e: geodesible::FormError) -> Failure {
        Failure::Check(e.to_string())
    }
}

impl From<geodesible::IntegrationError> for Failure {
    fn from(e: geodesible::IntegrationError) -> Failure {
        Failure::Check(e.to_string())
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Map<String, Value>,
    pub provenance: Map<String, Value>,
    pub reports: Vec<CheckReport>,
    pub plot: Option<(String, String, Vec<(f64, f64)>)>,
}

impl Outcome {
    fn put(&mut self, key: &str, value: Value, provenance: &Provenance) {
        self.result.insert(key.to_string(), value);
        self.provenance
            .insert(key.to_string(), serde_json::to_value(provenance).expect("serializable"));
    }

    fn put_integral(&mut self, key: &str, r: &IntegrationResult) {
        self.put(key, json!(r.value), &Provenance::Quadrature { error_estimate: r.error_estimate });
    }
}

fn spec(cli: &Cli) -> Result<QuadratureSpec, Failure> {
    let s = QuadratureSpec::GaussLegendre { order: cli.order };
    s.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(s)
}

fn parse_list(s: &str, what: &str) -> Result<Vec<i64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Failure::Usage(format!("bad {what} entry '{t}'"))))
        .collect()
}

fn parse_zeros(s: &str) -> Result<Vec<ZeroDatum>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (a, k) = t
                .split_once(':')
                .ok_or_else(|| Failure::Usage(format!("zero '{t}' is not of the form order:k")))?;
            let a: i64 = a.trim().parse().map_err(|_| Failure::Usage(format!("bad order in '{t}'")))?;
            let k: i64 = k.trim().parse().map_err(|_| Failure::Usage(format!("bad k in '{t}'")))?;
            Ok(if a == 1 { ZeroDatum::smooth(k) } else { ZeroDatum::cone(a, k)? })
        })
        .collect()
}

fn constant_expr(s: &str) -> Result<f64, Failure> {
    let e = ParsedExpr::parse(s, "r").map_err(|e| Failure::Usage(format!("'{s}': {e}")))?;
    if e.expr.has_var() {
        return Err(Failure::Usage(format!("'{s}' must be a constant")));
    }
    Ok(e.eval(0.0))
}

fn exact_str(q: &RationalQ) -> Value {
    Value::String(q.to_string())
}

fn identity(dim: usize, n: Option<usize>, seeds: usize, points: usize) -> Result<Outcome, Failure> {
    let ns: Vec<usize> = match n {
        Some(n) => vec![n],
        None => (0..=(dim.saturating_sub(1)) / 2).collect(),
    };
    let mut out = Outcome::default();
    let mut residuals = Map::new();
    for n in ns {
        let r = checks::abbondandolo_suite(dim, n, seeds, points, checks::ANALYTIC_TOL)?;
        residuals.insert(n.to_string(), serde_json::to_value(&r.computed).expect("serializable"));
        out.reports.push(r);
    }
    out.put("dim", json!(dim), &Provenance::Exact);
    out.put(
        "max_relative_residual",
        Value::Object(residuals),
        &Provenance::Sampled { points: seeds * points },
    );
    Ok(out)
}

fn hopf(what: HopfWhat, r_max: f64, spec: &QuadratureSpec) -> Result<Outcome, Failure> {
    let mut out = Outcome::default();
    match what {
        HopfWhat::Volume => {
            let v = catalog::hopf_volume(spec)?;
            out.put_integral("volume", &v);
            out.put("evaluations", json!(v.evaluations), &Provenance::Exact);
            out.reports.push(CheckReport::new(
                "hopf_volume",
                Quantity::real(v.value),
                Quantity::real(1.0),
                1e-8,
                "int_{S^3} alpha ^ d alpha for the Hopf connection form",
                Provenance::Quadrature { error_estimate: v.error_estimate },
            ));
        }
        HopfWhat::Section => {
            if !(r_max > 0.0 && r_max <= catalog::SECTION_CHART_RADIUS) {
                return Err(Failure::Usage(format!(
                    "--r-max must lie in (0, {}]",
                    catalog::SECTION_CHART_RADIUS
                )));
            }
            let t = catalog::hopf_section_integral(r_max, spec, true)?;
            out.put_integral("integral", &t.result);
            out.put("r_max", json!(t.r_max), &Provenance::Exact);
            out.put("truncation_bound", json!(t.truncation_error), &Provenance::Exact);
            let err = t.result.error_estimate + t.truncation_error;
            out.reports.push(CheckReport::new(
                "hopf_section",
                Quantity::real(t.result.value),
                Quantity::real(1.0),
                1e-5,
                format!("int_{{r <= {r_max}}} s^* d alpha; tail bound 1/(1+R^2) = {:e}", t.truncation_error),
                Provenance::Quadrature { error_estimate: err },
            ));
            let h = catalog::hopf_bundle();
            let curv = geodesible::pullback(&catalog::hopf_section(), &ext_d(&h.alpha)?)?;
            let mut plot = Vec::new();
            for i in 0..=200 {
                let r = r_max.min(10.0) * i as f64 / 200.0;
                plot.push((r, curv.eval_at(&[r, 0.0])?.coeffs[0]));
            }
            out.plot = Some(("r".into(), "density".into(), plot));
        }
        HopfWhat::Euler => {
            let s = SeifertData::new(0, vec![(1, 1)])?;
            let e = seifert::euler_number(&s);
            out.put("euler", exact_str(&e), &Provenance::Exact);
            out.reports.push(CheckReport::exact(
                "hopf_euler",
                e.clone(),
                RationalQ::integer(-1),
                "(0; (1, 1))",
            ));
            let t = catalog::hopf_section_integral(catalog::SECTION_CHART_RADIUS, spec, true)?;
            out.put_integral("section_integral", &t.result);
            out.reports.push(CheckReport::new(
                "hopf_section_vs_euler",
                Quantity::real(t.result.value),
                Quantity::real(-e.to_f64()),
                1e-8,
                "int s^* d alpha = -e over the whole section",
                Provenance::Quadrature {
                    error_estimate: t.result.error_estimate + t.truncation_error,
                },
            ));
        }
    }
    Ok(out)
}

fn seifert_cmd(path: &PathBuf) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let s: SeifertData = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let e = seifert::euler_number(&s);
    let vol = seifert::vol_from_seifert(&s);
    let (m, product) = seifert::integrality_certificate(&s)?;
    let mut out = Outcome::default();
    out.put("euler", exact_str(&e), &Provenance::Exact);
    out.put("vol", exact_str(&vol), &Provenance::Exact);
    let m_value = m.to_string().parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::String(m.to_string()));
    out.put("m", m_value, &Provenance::Exact);
    out.put("m_vol", exact_str(&product), &Provenance::Exact);
    let rounded: RationalQ = product.as_big().round().to_string().parse().expect("integer text");
    out.reports.push(CheckReport::exact(
        "integrality",
        product,
        rounded,
        "m * vol is an integer, m = lcm of the multiplicities",
    ));
    Ok(out)
}

fn orbifold_cmd(genus: i64, cones: &str) -> Result<Outcome, Failure> {
    let o = Orbifold2D::new(genus, parse_list(cones, "cone")?)?;
    let chi = seifert::chi_orb(&o);
    let stb = seifert::stb_invariants(&o);
    let e = seifert::euler_number(&stb);
    let mut out = Outcome::default();
    out.put("chi_orb", exact_str(&chi), &Provenance::Exact);
    out.put("stb", serde_json::to_value(&stb).expect("serializable"), &Provenance::Exact);
    out.put("stb_euler", exact_str(&e), &Provenance::Exact);
    out.reports.push(CheckReport::exact(
        "stb_euler_vs_chi_orb",
        e,
        chi,
        "euler number of the unit tangent bundle equals chi_orb",
    ));
    Ok(out)
}

fn poincare_hopf_cmd(genus: i64, cones: &str, zeros: &str) -> Result<Outcome, Failure> {
    let o = Orbifold2D::new(genus, parse_list(cones, "cone")?)?;
    let z = parse_zeros(zeros)?;
    let report = seifert::poincare_hopf_check(&o, &z)?;
    let mut out = Outcome::default();
    out.put("chi_orb", exact_str(&seifert::chi_orb(&o)), &Provenance::Exact);
    out.put("index_sum", serde_json::to_value(&report.computed).expect("serializable"), &Provenance::Exact);
    out.reports.push(report);
    Ok(out)
}

fn gauss_bonnet_cmd(profile: &str, length: &str, a1: i64, a2: i64, tol: f64, spec: &QuadratureSpec) -> Result<Outcome, Failure> {
    let length = constant_expr(length)?;
    let p = expr::revolution_profile(profile, length, a1, a2).map_err(|e| Failure::Usage(e.to_string()))?;
    let chi = catalog::revolution_chi(&p);
    let report = catalog::gauss_bonnet_revolution(&p, spec, tol)?;
    let mut out = Outcome::default();
    out.put("chi_orb", exact_str(&chi), &Provenance::Exact);
    out.put("total_curvature", serde_json::to_value(&report.computed).expect("serializable"), &report.provenance);
    out.put("expected", json!(2.0 * PI * chi.to_f64()), &Provenance::Exact);
    // Σ(1 − 1/αᵢ) from the cone orders, compared exactly with the orbifold's χ
    let defect = [a1, a2]
        .iter()
        .map(|&a| RationalQ::one() - RationalQ::new(1, a).expect("validated"))
        .sum::<RationalQ>();
    out.reports.push(CheckReport::exact(
        "chi_orb_from_cone_orders",
        RationalQ::integer(2) - defect,
        chi,
        "expected total curvature is 2*pi*chi_orb with chi_orb = 2 - sum(1 - 1/alpha_i)",
    ));
    out.reports.push(report);
    let plot = (0..=200)
        .map(|i| {
            let r = length * (0.005 + 0.99 * i as f64 / 200.0);
            (r, p.curvature(r))
        })
        .collect();
    out.plot = Some(("r".into(), "curvature".into(), plot));
    Ok(out)
}

fn disc_cmd(h: &str, method: DiscMethodArg, spec: &QuadratureSpec) -> Result<Outcome, Failure> {
    let profile = expr::h_profile(h).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut out = Outcome::default();
    // π ∫₀¹ τ(u) du
    let tau_int = integrate_box(&[(0.0, 1.0)], spec, |u| Ok(profile.tau_value(u[0])))?;
    let closed = PI * tau_int.value;
    out.put("closed_form", json!(closed), &Provenance::Quadrature { error_estimate: PI * tau_int.error_estimate });
    let mut values = Vec::new();
    if matches!(method, DiscMethodArg::Direct | DiscMethodArg::Both) {
        let v = catalog::disc_volume(&profile, DiscMethod::Direct, spec)?;
        out.put_integral("direct", &v);
        values.push(("direct", v));
    }
    if matches!(method, DiscMethodArg::ReturnTime | DiscMethodArg::Both) {
        let v = catalog::disc_volume(&profile, DiscMethod::ReturnTime, spec)?;
        out.put_integral("return_time", &v);
        values.push(("return_time", v));
    }
    for (name, v) in &values {
        out.reports.push(CheckReport::new(
            format!("disc_{name}_vs_closed_form"),
            Quantity::real(v.value),
            Quantity::real(closed),
            1e-8,
            "closed form pi * int_0^1 (H - u H') du",
            Provenance::Quadrature {
                error_estimate: v.error_estimate + PI * tau_int.error_estimate,
            },
        ));
    }
    if values.len() == 2 {
        let (a, b) = (&values[0].1, &values[1].1);
        out.reports.push(CheckReport::new(
            "disc_direct_vs_return_time",
            Quantity::real(a.value),
            Quantity::real(b.value),
            1e-6,
            "int alpha ^ d alpha vs int_D tau d alpha",
            Provenance::Quadrature {
                error_estimate: a.error_estimate + b.error_estimate,
            },
        ));
    }
    let plot = (0..=200)
        .map(|i| {
            let u = i as f64 / 200.0;
            (u, profile.tau_value(u))
        })
        .collect();
    out.plot = Some(("u".into(), "tau".into(), plot));
    Ok(out)
}

/// Sampling margin for the Beltrami and Cartan checks, which involve tan η and cot η.
pub const S3_CHECK_MARGIN: f64 = 0.05;

fn beltrami_cmd(a1: f64, a2: f64, check: BeltramiCheck, points: usize, seed: u64) -> Result<Outcome, Failure> {
    let fam = catalog::beltrami_family(a1, a2)?;
    let pts = catalog::s3_samples(points, seed, S3_CHECK_MARGIN);
    let mut out = Outcome::default();
    let sampled = Provenance::Sampled { points };
    let all = check == BeltramiCheck::All;
    if all || check == BeltramiCheck::Pullback {
        let pb = catalog::beltrami_pullback_metric(&fam.chart, a1, a2)?;
        let (mut worst, mut worst_displayed): (f64, f64) = (0.0, 0.0);
        for p in &pts {
            let want = catalog::beltrami_chart_metric(a1, a2, &p.coords);
            let (m, d) = (pb.matrix(p)?, fam.g.matrix(p)?);
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max((m[(i, j)] - want[3 * i + j]).abs());
                    worst_displayed = worst_displayed.max((d[(i, j)] - want[3 * i + j]).abs());
                }
            }
        }
        out.put("pullback_max_entry_defect", json!(worst), &sampled);
        out.reports.push(CheckReport::residual(
            "beltrami_pullback",
            worst,
            1e-8,
            points,
            "max entrywise |phi^* g_round - closed form| in the (eta, phi1, phi2) chart",
        ));
        out.reports.push(CheckReport::residual(
            "beltrami_displayed_tensor",
            worst_displayed,
            1e-8,
            points,
            "max entrywise |iota^* (displayed tensor) - closed form|",
        ));
    }
    if all || check == BeltramiCheck::Geodesible {
        let u = fam.unit_field()?;
        let w = wadsley_residual(&fam.g, &u, &pts)?;
        out.put("wadsley_residual", json!(w), &sampled);
        out.reports.push(CheckReport::residual(
            "beltrami_geodesible",
            w,
            1e-5,
            points,
            "max |nabla_X X| for X = X1/L with Christoffel symbols of g",
        ));
        let r = checks::geodesibility_residual(&fam.alpha, &u, &pts, Some(1e-5))?;
        out.put("form_residual", serde_json::to_value(&r.computed).expect("serializable"), &sampled);
        out.reports.push(r);
    }
    if all || check == BeltramiCheck::Contact {
        let vol = wedge(&fam.alpha, &ext_d(&fam.alpha)?)?;
        let u = fam.unit_field()?;
        let reeb = interior(&u, &ext_d(&fam.alpha)?)?;
        let mut signs = (0usize, 0usize);
        let mut min_abs = f64::INFINITY;
        let mut curl: f64 = 0.0;
        for p in &pts {
            let v = vol.eval(p)?.coeffs[0];
            min_abs = min_abs.min(v.abs());
            if v > 1e-12 {
                signs.0 += 1;
            } else if v < -1e-12 {
                signs.1 += 1;
            }
            curl = curl.max(reeb.eval(p)?.max_abs());
        }
        let same = signs.0.max(signs.1);
        out.put("min_abs_alpha_dalpha", json!(min_abs), &sampled);
        out.reports.push(CheckReport::exact(
            "beltrami_contact",
            RationalQ::new(same as i64, points.max(1) as i64).expect("nonzero"),
            RationalQ::one(),
            format!(
                "fraction of points where alpha ^ d alpha is nonzero with one sign; min |alpha ^ d alpha| = {min_abs:e}, max |i_X d alpha| = {curl:e}"
            ),
        ));
    }
    Ok(out)
}

fn cartan_cmd(check: CartanCheck, points: usize, seed: u64, spec: &QuadratureSpec) -> Result<Outcome, Failure> {
    let q = catalog::quaternionic_coframe()?;
    let pts = catalog::s3_samples(points, seed, S3_CHECK_MARGIN);
    let mut out = Outcome::default();
    let all = check == CartanCheck::All;
    if all || check == CartanCheck::Residual {
        let r = checks::cartan_residual(&q.b, &q.c, &pts, checks::ANALYTIC_TOL)?;
        out.put("structure_residual", serde_json::to_value(&r.computed).expect("serializable"), &r.provenance);
        out.reports.push(r);
    }
    if all || check == CartanCheck::Alpha {
        let mut worst: f64 = 0.0;
        for p in &pts {
            let s = checks::cartan_solve_alpha(&q.b, &q.c, p)?;
            let a = q.a.eval(p)?.coeffs;
            for i in 0..3 {
                worst = worst.max((s.alpha[i] - 2.0 * a[i]).abs());
            }
        }
        out.put("alpha_defect", json!(worst), &Provenance::Sampled { points });
        out.reports.push(CheckReport::residual(
            "cartan_alpha",
            worst,
            1e-8,
            points,
            "max |alpha_solved - 2a|: d b = c ^ alpha, d c = alpha ^ b",
        ));
    }
    if all || check == CartanCheck::Bott {
        let x = catalog::cartan_field(&q.chart);
        let r = checks::bott_relation(&q.b, &q.c, &x, &catalog::s3_chain(&q.chart), spec, 1e-8)?;
        out.put("bott", serde_json::to_value(&r.computed).expect("serializable"), &r.provenance);
        out.put("minus_vol", serde_json::to_value(&r.expected).expect("serializable"), &r.provenance);
        out.reports.push(r);
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let spec = spec(cli)?;
    match &cli.command {
        Command::Identity { dim, n, seeds, points } => identity(*dim, *n, *seeds, *points),
        Command::Hopf { what, r_max } => hopf(*what, *r_max, &spec),
        Command::Seifert { json } => seifert_cmd(json),
        Command::Orbifold { genus, cones } => orbifold_cmd(*genus, cones),
        Command::PoincareHopf { genus, cones, zeros } => poincare_hopf_cmd(*genus, cones, zeros),
        Command::GaussBonnet {
            profile,
            length,
            alpha1,
            alpha2,
            tolerance,
        } => gauss_bonnet_cmd(profile, length, *alpha1, *alpha2, *tolerance, &spec),
        Command::Disc { h, method } => disc_cmd(h, *method, &spec),
        Command::Beltrami { a1, a2, check, points } => beltrami_cmd(*a1, *a2, *check, *points, cli.seed),
        Command::Cartan { check, points } => cartan_cmd(*check, *points, cli.seed, &spec),
    }
}

fn quantity_text(q: &Quantity) -> String {
    match q {
        Quantity::Exact { value } => value.to_string(),
        Quantity::Real { value } => value.to_string(),
        Quantity::Complex { re, im } => format!("{re}{}{}i", if *im < 0.0 || im.is_sign_negative() { "-" } else { "+" }, im.abs()),
    }
}

fn provenance_text(p: &Provenance) -> String {
    match p {
        Provenance::Exact => "exact".into(),
        Provenance::Quadrature { error_estimate } => format!("quadrature:{error_estimate:e}"),
        Provenance::MonteCarlo { error_estimate } => format!("monte_carlo:{error_estimate:e}"),
        Provenance::Sampled { points } => format!("sampled:{points}"),
    }
}

fn render_csv(reports: &[CheckReport]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "computed", "expected", "tolerance", "passed", "provenance", "detail"])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            quantity_text(&r.computed),
            quantity_text(&r.expected),
            r.tolerance.to_string(),
            r.passed.to_string(),
            provenance_text(&r.provenance),
            r.detail.clone(),
        ])?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

fn write_plot(path: &PathBuf, plot: &(String, String, Vec<(f64, f64)>)) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record([plot.0.as_str(), plot.1.as_str()]).map_err(io)?;
    for (x, y) in &plot.2 {
        w.write_record([x.to_string(), y.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Assembles the JSON document for an outcome.
pub fn document(cli: &Cli, outcome: &Outcome, timestamp: &str) -> Value {
    let mut result = outcome.result.clone();
    result.insert("provenance".into(), Value::Object(outcome.provenance.clone()));
    json!({
        "tool_version": TOOL_VERSION,
        "config": {
            "command": serde_json::to_value(&cli.command).expect("serializable"),
            "seed": cli.seed,
            "order": cli.order,
            "format": cli.format,
        },
        "result": result,
        "reports": outcome.reports,
        "metadata": { "timestamp": timestamp },
    })
}

/// Runs the tool on `argv` (including the program name), writing the primary
/// output to `out` unless `--output` is given. Diagnostics go to `err`.
pub fn run<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            return 2;
        }
        Err(Failure::Check(m)) => {
            let mut o = Outcome::default();
            o.reports.push(CheckReport::new(
                "precondition",
                Quantity::real(f64::NAN),
                Quantity::real(0.0),
                0.0,
                m.clone(),
                Provenance::Exact,
            ));
            let _ = writeln!(err, "check failed: {m}");
            o
        }
    };
    if let (Some(path), Some(plot)) = (&cli.plot_data, &outcome.plot) {
        if let Err(Failure::Usage(m) | Failure::Check(m)) = write_plot(path, plot) {
            let _ = writeln!(err, "error: {m}");
            return 2;
        }
    }
    let timestamp = humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string();
    let bytes = match cli.format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&document(&cli, &outcome, &timestamp)).expect("serializable");
            b.push(b'\n');
            b
        }
        Format::Csv => match render_csv(&outcome.reports) {
            Ok(b) => b,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
        },
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(m) = written {
        let _ = writeln!(err, "error: {m}");
        return 2;
    }
    if outcome.reports.iter().all(|r| r.passed) {
        0
    } else {
        1
    }
}
