//! Verification engines. Each returns a [`CheckReport`] or a raw residual.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{check_same_chart, ChartDomain, Point, SAMPLING_MARGIN};
use crate::error::{CheckError, FormError};
use crate::forms::{ext_d, interior, wedge, KForm, ScalarField, VectorFieldRepr};
use crate::integrate::{integrate_form, IntegrationResult, ParametrizedChain, QuadratureSpec};
use crate::jet::Jet;
use crate::multi_index::binomial;
use crate::report::{CheckReport, Provenance, Quantity};

pub use crate::report::passes;

/// Default residual tolerance for forms with jet derivatives.
pub const ANALYTIC_TOL: f64 = 1e-8;
/// Default residual tolerance when finite differences are involved.
pub const FD_TOL: f64 = 1e-5;
/// Points used for the pointwise preconditions of integral checks.
pub const PRECONDITION_POINTS: usize = 200;

pub fn default_tolerance(analytic: bool) -> f64 {
    if analytic {
        ANALYTIC_TOL
    } else {
        FD_TOL
    }
}

/// Random forms with integer polynomial coefficients on `[-1, 1]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomFormSpec {
    pub dim: usize,
    pub degree: usize,
    pub polynomial_degree: usize,
    pub coefficient_range: (i64, i64),
    pub seed: u64,
}

impl RandomFormSpec {
    pub fn new(dim: usize, degree: usize, seed: u64) -> RandomFormSpec {
        RandomFormSpec {
            dim,
            degree,
            polynomial_degree: 2,
            coefficient_range: (-5, 5),
            seed,
        }
    }
}

pub fn cube_chart(dim: usize) -> Result<Arc<ChartDomain>, FormError> {
    let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    ChartDomain::new(format!("cube{dim}"), &refs, &vec![(-1.0, 1.0); dim], "")
}

fn exponents(nvars: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn rec(var: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if var == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[var] = e;
            rec(var + 1, left - e, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    rec(0, max_degree, &mut vec![0; nvars], &mut out);
    out
}

/// A random form per `spec` on `chart` (whose dimension must equal `spec.dim`).
pub fn random_form(spec: &RandomFormSpec, chart: &Arc<ChartDomain>) -> Result<KForm, FormError> {
    if chart.dim() != spec.dim {
        return Err(FormError::DimensionMismatch(format!(
            "spec dimension {} on a {}-chart",
            spec.dim,
            chart.dim()
        )));
    }
    let monomials = exponents(spec.dim, spec.polynomial_degree);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.coefficient_range;
    let ncoef = binomial(spec.dim, spec.degree);
    let coeffs: Vec<Vec<f64>> = (0..ncoef)
        .map(|_| monomials.iter().map(|_| rng.random_range(lo..=hi) as f64).collect())
        .collect();
    KForm::from_jets(chart, spec.degree, move |x| {
        coeffs
            .iter()
            .map(|cs| {
                let mut acc = Jet::zero(x[0].table());
                for (c, e) in cs.iter().zip(&monomials) {
                    if *c == 0.0 {
                        continue;
                    }
                    let mut term = Jet::constant(x[0].table(), *c);
                    for (v, &p) in e.iter().enumerate() {
                        for _ in 0..p {
                            term = &term * &x[v];
                        }
                    }
                    acc += &term;
                }
                acc
            })
            .collect()
    })
}

fn wedge_power(omega: &KForm, j: usize) -> Result<KForm, FormError> {
    let mut acc = ScalarField::constant(omega.chart(), 1.0).into_form();
    for _ in 0..j {
        acc = wedge(&acc, omega)?;
    }
    Ok(acc)
}

/// Absolute residual of the identity together with the coefficient scale of its sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub absolute: f64,
    pub scale: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.absolute / self.scale
        } else {
            self.absolute
        }
    }
}

fn identity_sides(alpha: &KForm, beta: &KForm, n: usize, exact_from: usize) -> Result<(KForm, KForm), CheckError> {
    check_same_chart(alpha.chart(), beta.chart())?;
    let dim = alpha.dim();
    if dim < 2 * n + 1 {
        return Err(CheckError::DimensionTooSmall { dim, needed: 2 * n + 1 });
    }
    let (da, db) = (ext_d(alpha)?, ext_d(beta)?);
    let lhs = wedge(alpha, &wedge_power(&da, n)?)?.sub(&wedge(beta, &wedge_power(&db, n)?)?)?;
    let mut sum = KForm::zero(alpha.chart(), 2 * n);
    for j in 0..=n {
        sum = sum.add(&wedge(&wedge_power(&da, j)?, &wedge_power(&db, n - j)?)?)?;
    }
    let mut rhs = wedge(&alpha.sub(beta)?, &sum)?;
    if n >= 1 && exact_from < n {
        let ab = wedge(alpha, beta)?;
        let mut inner = KForm::zero(alpha.chart(), 2 * n - 2);
        for j in exact_from..n {
            inner = inner.add(&wedge(&wedge_power(&da, j)?, &wedge_power(&db, n - 1 - j)?)?)?;
        }
        rhs = rhs.add(&ext_d(&wedge(&ab, &inner)?)?)?;
    }
    Ok((lhs, rhs))
}

fn identity_residual_from(
    alpha: &KForm,
    beta: &KForm,
    n: usize,
    points: &[Point],
    exact_from: usize,
) -> Result<IdentityResidual, CheckError> {
    let (lhs, rhs) = identity_sides(alpha, beta, n, exact_from)?;
    let mut out = IdentityResidual { absolute: 0.0, scale: 0.0 };
    for p in points {
        let (l, r) = (lhs.eval(p)?, rhs.eval(p)?);
        for (a, b) in l.coeffs.iter().zip(&r.coeffs) {
            out.absolute = out.absolute.max((a - b).abs());
        }
        out.scale = out.scale.max(l.max_abs()).max(r.max_abs());
    }
    Ok(out)
}

/// Residual of
/// `α∧(dα)ⁿ − β∧(dβ)ⁿ = (α−β)∧Σ_{j=0}^{n}(dα)^j∧(dβ)^{n−j} + d(α∧β∧Σ_{j=0}^{n−1}(dα)^j∧(dβ)^{n−1−j})`
/// at `points`, in coefficient max-norm.
pub fn abbondandolo_residual(alpha: &KForm, beta: &KForm, n: usize, points: &[Point]) -> Result<IdentityResidual, CheckError> {
    identity_residual_from(alpha, beta, n, points, 0)
}

/// Randomized identity suite: for each seed a random pair of 1-forms with
/// integer polynomial coefficients, evaluated at `points` random points.
/// The report carries the worst relative residual.
pub fn abbondandolo_suite(dim: usize, n: usize, seeds: usize, points: usize, tolerance: f64) -> Result<CheckReport, CheckError> {
    if dim < 2 * n + 1 {
        return Err(CheckError::DimensionTooSmall { dim, needed: 2 * n + 1 });
    }
    let chart = cube_chart(dim)?;
    let results: Vec<IdentityResidual> = (0..seeds as u64)
        .into_par_iter()
        .map(|seed| {
            let a = random_form(&RandomFormSpec::new(dim, 1, 2 * seed), &chart)?;
            let b = random_form(&RandomFormSpec::new(dim, 1, 2 * seed + 1), &chart)?;
            abbondandolo_residual(&a, &b, n, &chart.sample_points(points, seed, SAMPLING_MARGIN))
        })
        .collect::<Result<_, _>>()?;
    let worst = results.iter().map(IdentityResidual::relative).fold(0.0, f64::max);
    let abs = results.iter().map(|r| r.absolute).fold(0.0, f64::max);
    Ok(CheckReport::new(
        format!("abbondandolo[dim={dim},n={n}]"),
        Quantity::real(worst),
        Quantity::real(0.0),
        tolerance,
        format!("{seeds} seeds x {points} points, relative residual; max absolute {abs:e}"),
        Provenance::Sampled { points: seeds * points },
    ))
}

fn check_characteristic(alpha: &KForm, x: &VectorFieldRepr, points: &[Point], tol: f64, label: &str) -> Result<(), CheckError> {
    let ax = interior(x, alpha)?;
    let ixd = interior(x, &ext_d(alpha)?)?;
    for p in points {
        let v = ax.eval(p)?.coeffs[0];
        if !((v - 1.0).abs() <= tol) {
            return Err(CheckError::Precondition {
                hypothesis: format!("{label}(X) = 1"),
                coords: p.coords.clone(),
                deviation: (v - 1.0).abs(),
            });
        }
        let d = ixd.eval(p)?.max_abs();
        if !(d <= tol) {
            return Err(CheckError::Precondition {
                hypothesis: format!("i_X d{label} = 0"),
                coords: p.coords.clone(),
                deviation: d,
            });
        }
    }
    Ok(())
}

fn power_volume(alpha: &KForm, n: usize, chain: &ParametrizedChain, spec: &QuadratureSpec) -> Result<IntegrationResult, CheckError> {
    let top = wedge(alpha, &wedge_power(&ext_d(alpha)?, n)?)?;
    Ok(integrate_form(&top, chain, spec)?)
}

fn quadrature_provenance(spec: &QuadratureSpec, error: f64) -> Provenance {
    match spec {
        QuadratureSpec::GaussLegendre { .. } => Provenance::Quadrature { error_estimate: error },
        QuadratureSpec::MonteCarlo { .. } => Provenance::MonteCarlo { error_estimate: error },
    }
}

/// `∫α∧(dα)ⁿ` vs `∫β∧(dβ)ⁿ` for two characteristic forms of `X`.
pub fn volume_invariance(
    alpha: &KForm,
    beta: &KForm,
    x: &VectorFieldRepr,
    chain: &ParametrizedChain,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<CheckReport, CheckError> {
    let points = chain.target().sample_points(PRECONDITION_POINTS, 0, SAMPLING_MARGIN);
    check_characteristic(alpha, x, &points, ANALYTIC_TOL, "alpha")?;
    check_characteristic(beta, x, &points, ANALYTIC_TOL, "beta")?;
    let a = power_volume(alpha, n, chain, spec)?;
    let b = power_volume(beta, n, chain, spec)?;
    let err = a.error_estimate + b.error_estimate;
    Ok(CheckReport::new(
        "volume_invariance",
        Quantity::real(a.value),
        Quantity::real(b.value),
        err,
        format!("n = {n}; int alpha^(d alpha)^n vs int beta^(d beta)^n"),
        quadrature_provenance(spec, err),
    ))
}

fn basic_defect(gamma: &KForm, x: &VectorFieldRepr, points: &[Point]) -> Result<(f64, f64), CheckError> {
    check_same_chart(gamma.chart(), x.chart())?;
    let ig = if gamma.degree() == 0 { None } else { Some(interior(x, gamma)?) };
    let dg = ext_d(gamma)?;
    let idg = if dg.is_structurally_zero() { None } else { Some(interior(x, &dg)?) };
    let (mut a, mut b): (f64, f64) = (0.0, 0.0);
    for p in points {
        if let Some(f) = &ig {
            a = a.max(f.eval(p)?.max_abs());
        }
        if let Some(f) = &idg {
            b = b.max(f.eval(p)?.max_abs());
        }
    }
    Ok((a, b))
}

/// `max(|i_X γ|, |i_X dγ|)` over `points`; `None` picks the default tolerance.
pub fn basic_form_check(gamma: &KForm, x: &VectorFieldRepr, points: &[Point], tolerance: Option<f64>) -> Result<CheckReport, CheckError> {
    let (a, b) = basic_defect(gamma, x, points)?;
    let tol = tolerance.unwrap_or_else(|| default_tolerance(gamma.is_analytic() && x.is_analytic()));
    Ok(CheckReport::residual(
        "basic_form",
        a.max(b),
        tol,
        points.len(),
        format!("max |i_X gamma| = {a:e}, max |i_X d gamma| = {b:e}"),
    ))
}

/// `∫α∧σ` vs `∫α∧(σ + dτ)` for basic `σ`, `τ`.
pub fn pairing_invariance(
    alpha: &KForm,
    sigma: &KForm,
    tau: &KForm,
    x: &VectorFieldRepr,
    chain: &ParametrizedChain,
    spec: &QuadratureSpec,
) -> Result<CheckReport, CheckError> {
    let points = chain.target().sample_points(PRECONDITION_POINTS, 1, SAMPLING_MARGIN);
    for (form, name) in [(tau, "tau"), (sigma, "sigma")] {
        let r = basic_form_check(form, x, &points, None)?;
        if !r.passed {
            return Err(CheckError::Precondition {
                hypothesis: format!("{name} is basic"),
                coords: vec![],
                deviation: r.computed.distance(&Quantity::real(0.0)),
            });
        }
    }
    let a = integrate_form(&wedge(alpha, sigma)?, chain, spec)?;
    let b = integrate_form(&wedge(alpha, &sigma.add(&ext_d(tau)?)?)?, chain, spec)?;
    let err = a.error_estimate + b.error_estimate;
    Ok(CheckReport::new(
        "pairing_invariance",
        Quantity::real(a.value),
        Quantity::real(b.value),
        err,
        "int alpha^sigma vs int alpha^(sigma + d tau)",
        quadrature_provenance(spec, err),
    ))
}

/// `max(|α(X) − 1|, |i_X dα|)` over `points`.
pub fn geodesibility_residual(alpha: &KForm, x: &VectorFieldRepr, points: &[Point], tolerance: Option<f64>) -> Result<CheckReport, CheckError> {
    check_same_chart(alpha.chart(), x.chart())?;
    let ax = interior(x, alpha)?;
    let ixd = interior(x, &ext_d(alpha)?)?;
    let (mut norm, mut curl): (f64, f64) = (0.0, 0.0);
    for p in points {
        norm = norm.max((ax.eval(p)?.coeffs[0] - 1.0).abs());
        curl = curl.max(ixd.eval(p)?.max_abs());
    }
    let tol = tolerance.unwrap_or_else(|| default_tolerance(alpha.is_analytic() && x.is_analytic()));
    Ok(CheckReport::residual(
        "geodesibility",
        norm.max(curl),
        tol,
        points.len(),
        format!("max |alpha(X) - 1| = {norm:e}, max |i_X d alpha| = {curl:e}"),
    ))
}

fn require_dim3(form: &KForm) -> Result<(), CheckError> {
    if form.dim() != 3 {
        return Err(CheckError::InvalidParameter(format!(
            "Cartan structures live on 3-dimensional charts, got dimension {}",
            form.dim()
        )));
    }
    Ok(())
}

/// Relative defect of `ω₁∧dω₁ = ω₂∧dω₂ ≠ 0`, `ω₁∧dω₂ = ω₂∧dω₁ = 0`; a
/// vanishing witness `ω₁∧dω₁` makes the defect infinite.
pub fn cartan_residual(w1: &KForm, w2: &KForm, points: &[Point], tolerance: f64) -> Result<CheckReport, CheckError> {
    require_dim3(w1)?;
    check_same_chart(w1.chart(), w2.chart())?;
    let (d1, d2) = (ext_d(w1)?, ext_d(w2)?);
    let forms = [wedge(w1, &d1)?, wedge(w2, &d2)?, wedge(w1, &d2)?, wedge(w2, &d1)?];
    let mut worst: f64 = 0.0;
    let mut witness = f64::INFINITY;
    for p in points {
        let v: Vec<f64> = forms.iter().map(|f| f.eval(p).map(|x| x.coeffs[0])).collect::<Result<_, _>>()?;
        let res = (v[0] - v[1]).abs() + v[2].abs() + v[3].abs();
        witness = witness.min(v[0].abs());
        let rel = if v[0] == 0.0 { f64::INFINITY } else { res / v[0].abs() };
        worst = worst.max(rel);
    }
    Ok(CheckReport::residual(
        "cartan_residual",
        worst,
        tolerance,
        points.len(),
        format!("relative to |w1^dw1|; nonvanishing witness min |w1^dw1| = {witness:e}"),
    ))
}

/// Least-squares solution of `dω₁ = ω₂∧α`, `dω₂ = α∧ω₁` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanAlpha {
    pub alpha: Vec<f64>,
    pub residual: f64,
    pub singular_values: Vec<f64>,
}

pub const RANK_TOL: f64 = 1e-10;

fn solve_at(w1: &KForm, w2: &KForm, x: &[f64]) -> Result<CartanAlpha, CheckError> {
    let (o1, o2) = (w1.eval_at(x)?.coeffs, w2.eval_at(x)?.coeffs);
    let (d1, d2) = (ext_d(w1)?.eval_at(x)?.coeffs, ext_d(w2)?.eval_at(x)?.coeffs);
    // 2-form components on (01, 02, 12)
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut m = DMatrix::<f64>::zeros(6, 3);
    let mut rhs = DVector::<f64>::zeros(6);
    for (row, &(i, j)) in pairs.iter().enumerate() {
        // (ω₂∧α)_ij = ω₂_i α_j − ω₂_j α_i
        m[(row, j)] += o2[i];
        m[(row, i)] -= o2[j];
        rhs[row] = d1[row];
        // (α∧ω₁)_ij = α_i ω₁_j − α_j ω₁_i
        m[(row + 3, i)] += o1[j];
        m[(row + 3, j)] -= o1[i];
        rhs[row + 3] = d2[row];
    }
    let svd = m.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smin > RANK_TOL * smax.max(f64::MIN_POSITIVE)) {
        return Err(CheckError::RankDeficient {
            coords: x.to_vec(),
            singular_values: sv,
        });
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|e| CheckError::InvalidParameter(e.to_string()))?;
    let residual = (&m * &sol - &rhs).amax();
    Ok(CartanAlpha {
        alpha: sol.iter().copied().collect(),
        residual,
        singular_values: sv,
    })
}

pub fn cartan_solve_alpha(w1: &KForm, w2: &KForm, p: &Point) -> Result<CartanAlpha, CheckError> {
    require_dim3(w1)?;
    check_same_chart(w1.chart(), w2.chart())?;
    check_same_chart(w1.chart(), &p.chart)?;
    solve_at(w1, w2, &p.coords)
}

fn det3(m: &[[Jet; 3]; 3]) -> Jet {
    let minor = |i: usize, j: usize, k: usize, l: usize| &(&m[i][k] * &m[j][l]) - &(&m[i][l] * &m[j][k]);
    &(&(&m[0][0] * &minor(1, 2, 1, 2)) - &(&m[0][1] * &minor(1, 2, 0, 2))) + &(&m[0][2] * &minor(1, 2, 0, 1))
}

/// Jets of the least-squares `α` through the normal equations.
fn alpha_jets(w: &[KForm; 4], x: &[f64], order: usize) -> Result<Vec<Jet>, FormError> {
    let [o1, o2, d1, d2] = [
        w[0].jets(x, order)?,
        w[1].jets(x, order)?,
        w[2].jets(x, order)?,
        w[3].jets(x, order)?,
    ];
    let t = o1[0].table().clone();
    let zero = Jet::zero(&t);
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut m: Vec<[Jet; 3]> = Vec::with_capacity(6);
    let mut rhs = Vec::with_capacity(6);
    for (row, &(i, j)) in pairs.iter().enumerate() {
        let mut r = [zero.clone(), zero.clone(), zero.clone()];
        r[j] = &r[j] + &o2[i];
        r[i] = &r[i] - &o2[j];
        m.push(r);
        rhs.push(d1[row].clone());
    }
    for (row, &(i, j)) in pairs.iter().enumerate() {
        let mut r = [zero.clone(), zero.clone(), zero.clone()];
        r[i] = &r[i] + &o1[j];
        r[j] = &r[j] - &o1[i];
        m.push(r);
        rhs.push(d2[row].clone());
    }
    let mut n: [[Jet; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    let mut v: [Jet; 3] = std::array::from_fn(|_| zero.clone());
    for (row, b) in m.iter().zip(&rhs) {
        for a in 0..3 {
            v[a] += &(&row[a] * b);
            for c in 0..3 {
                n[a][c] += &(&row[a] * &row[c]);
            }
        }
    }
    let det = det3(&n);
    let inv = det.recip();
    Ok((0..3)
        .map(|col| {
            let mut k = n.clone();
            for a in 0..3 {
                k[a][col] = v[a].clone();
            }
            &det3(&k) * &inv
        })
        .collect())
}

/// The solved `α` as a form with jet derivatives.
pub fn cartan_alpha_form(w1: &KForm, w2: &KForm) -> Result<KForm, CheckError> {
    require_dim3(w1)?;
    check_same_chart(w1.chart(), w2.chart())?;
    let forms = [w1.clone(), w2.clone(), ext_d(w1)?, ext_d(w2)?];
    let analytic = w1.is_analytic() && w2.is_analytic();
    let source: Arc<crate::forms::JetSource> = Arc::new(move |x: &[f64], order: usize| alpha_jets(&forms, x, order));
    Ok(KForm::from_source(w1.chart(), 1, source, analytic))
}

/// `∫α_c∧dα_c` for `α_c = iα` (as a real/imaginary pair) against `(−vol_X, 0)`,
/// where `α` is solved from the Cartan pair and `vol_X = ∫α∧dα` is integrated separately.
pub fn bott_relation(
    w1: &KForm,
    w2: &KForm,
    x: &VectorFieldRepr,
    chain: &ParametrizedChain,
    spec: &QuadratureSpec,
    tolerance: f64,
) -> Result<CheckReport, CheckError> {
    let alpha = cartan_alpha_form(w1, w2)?;
    let points = chain.target().sample_points(20, 2, 0.05);
    let geo = geodesibility_residual(&alpha, x, &points, None)?;
    if !geo.passed {
        return Err(CheckError::Precondition {
            hypothesis: "alpha(X) = 1 and i_X d alpha = 0 for the solved alpha".into(),
            coords: vec![],
            deviation: geo.computed.distance(&Quantity::real(0.0)),
        });
    }
    let re = KForm::zero(alpha.chart(), 1);
    let im = alpha.clone();
    let (dre, dim) = (ext_d(&re)?, ext_d(&im)?);
    let real_part = wedge(&re, &dre)?.sub(&wedge(&im, &dim)?)?;
    let imag_part = wedge(&re, &dim)?.add(&wedge(&im, &dre)?)?;
    let r = integrate_form(&real_part, chain, spec)?;
    let i = integrate_form(&imag_part, chain, spec)?;
    let vol = power_volume(&alpha, 1, chain, spec)?;
    Ok(CheckReport::new(
        "bott_relation",
        Quantity::complex(r.value, i.value),
        Quantity::complex(-vol.value, 0.0),
        tolerance,
        format!("alpha_c = i alpha; vol_X = {}", vol.value),
        quadrature_provenance(spec, r.error_estimate + vol.error_estimate),
    ))
}

/// `∫ τσ` over a 2-chain.
pub fn return_time_volume(tau: &ScalarField, sigma: &KForm, chain: &ParametrizedChain, spec: &QuadratureSpec) -> Result<IntegrationResult, CheckError> {
    if sigma.degree() != 2 || chain.k() != 2 {
        return Err(crate::error::IntegrationError::DegreeMismatch {
            form: sigma.degree(),
            chain: chain.k(),
        }
        .into());
    }
    Ok(integrate_form(&sigma.mul_function(tau)?, chain, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_needs_the_j0_exact_term() {
        let chart = cube_chart(3).unwrap();
        let a = random_form(&RandomFormSpec::new(3, 1, 42), &chart).unwrap();
        let b = random_form(&RandomFormSpec::new(3, 1, 43), &chart).unwrap();
        let pts = chart.sample_points(20, 42, SAMPLING_MARGIN);
        let good = abbondandolo_residual(&a, &b, 1, &pts).unwrap();
        assert!(good.relative() < 1e-12, "{good:?}");
        let printed = identity_residual_from(&a, &b, 1, &pts, 1).unwrap();
        assert!(printed.relative() > 1e-3, "{printed:?}");
    }

    #[test]
    fn identity_trivial_cases() {
        let chart = cube_chart(3).unwrap();
        let a = random_form(&RandomFormSpec::new(3, 1, 1), &chart).unwrap();
        let b = random_form(&RandomFormSpec::new(3, 1, 2), &chart).unwrap();
        let pts = chart.sample_points(10, 3, SAMPLING_MARGIN);
        assert_eq!(abbondandolo_residual(&a, &b, 0, &pts).unwrap().absolute, 0.0);
        assert_eq!(abbondandolo_residual(&a, &a, 1, &pts).unwrap().absolute, 0.0);
        assert!(matches!(
            abbondandolo_residual(&a, &b, 2, &pts),
            Err(CheckError::DimensionTooSmall { dim: 3, needed: 5 })
        ));
    }

    fn torus() -> Arc<ChartDomain> {
        ChartDomain::new("T3", &["x", "y", "z"], &[(0.0, 2.0 * PI); 3], "").unwrap()
    }

    #[test]
    fn torus_volume_invariance_and_pairing() {
        let t = torus();
        let dz = KForm::differential(&t, 2).unwrap();
        let beta = KForm::from_jets(&t, 1, |x| vec![x[0].sin(), Jet::zero(x[0].table()), Jet::constant(x[0].table(), 1.0)]).unwrap();
        let x = VectorFieldRepr::coordinate(&t, 2).unwrap();
        let chain = ParametrizedChain::identity(&t, 1).unwrap();
        let r = volume_invariance(&dz, &beta, &x, &chain, 1, &QuadratureSpec::default()).unwrap();
        assert!(r.passed);
        assert!(r.computed.distance(&Quantity::real(0.0)) < 1e-12);
        let sigma = KForm::constant(&t, 2, vec![1.0, 0.0, 0.0]).unwrap();
        let tau = KForm::from_jets(&t, 1, |x| vec![Jet::zero(x[0].table()), x[0].sin(), Jet::zero(x[0].table())]).unwrap();
        let p = pairing_invariance(&dz, &sigma, &tau, &x, &chain, &QuadratureSpec::default()).unwrap();
        assert!(p.passed, "{p:?}");
        assert!(p.computed.distance(&p.expected) < 1e-8);
    }

    #[test]
    fn volume_invariance_names_failed_hypothesis() {
        let t = torus();
        let dz = KForm::differential(&t, 2).unwrap();
        let dx = KForm::differential(&t, 0).unwrap();
        let x = VectorFieldRepr::coordinate(&t, 2).unwrap();
        let chain = ParametrizedChain::identity(&t, 1).unwrap();
        match volume_invariance(&dz, &dx, &x, &chain, 1, &QuadratureSpec::default()) {
            Err(CheckError::Precondition { hypothesis, .. }) => assert_eq!(hypothesis, "beta(X) = 1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn geodesibility_designed_pass_and_fail() {
        let c = ChartDomain::new("disc", &["r", "phi", "theta"], &[(0.0, 1.0), (0.0, 2.0 * PI), (0.0, 1.0)], "").unwrap();
        let alpha = KForm::from_jets(&c, 1, |x| vec![Jet::zero(x[0].table()), x[0].clone(), Jet::constant(x[0].table(), 1.0)]).unwrap();
        let pts = c.sample_points(20, 1, SAMPLING_MARGIN);
        let dtheta = VectorFieldRepr::coordinate(&c, 2).unwrap();
        assert!(geodesibility_residual(&alpha, &dtheta, &pts, None).unwrap().passed);
        let mutated = VectorFieldRepr::constant(&c, vec![1.0, 0.0, 1.0]).unwrap();
        assert!(!geodesibility_residual(&alpha, &mutated, &pts, None).unwrap().passed);
        let g = KForm::differential(&c, 2).unwrap();
        let r = basic_form_check(&g, &dtheta, &pts, None).unwrap();
        assert!(!r.passed);
        assert_eq!(r.computed, Quantity::real(1.0));
    }

    #[test]
    fn cartan_designed_failures() {
        let t = torus();
        let pts = t.sample_points(10, 1, SAMPLING_MARGIN);
        let (dx, dy) = (KForm::differential(&t, 0).unwrap(), KForm::differential(&t, 1).unwrap());
        let r = cartan_residual(&dx, &dy, &pts, ANALYTIC_TOL).unwrap();
        assert!(!r.passed);
        assert_eq!(r.computed, Quantity::real(f64::INFINITY));
        // a contact form and twice itself
        let w = KForm::from_jets(&t, 1, |x| vec![x[2].cos(), x[2].sin(), Jet::zero(x[0].table())]).unwrap();
        let r = cartan_residual(&w, &w.scale(2.0), &pts, ANALYTIC_TOL).unwrap();
        assert!(!r.passed);
        let p = Point::new(&t, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(cartan_solve_alpha(&dx, &dy, &p), Ok(CartanAlpha { ref alpha, .. }) if alpha.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn return_time_of_unit_disc() {
        let c = ChartDomain::new("disc", &["r", "phi"], &[(0.0, 1.0), (0.0, 2.0 * PI)], "").unwrap();
        let sigma = KForm::from_jets(&c, 2, |x| vec![x[0].clone()]).unwrap();
        let chain = ParametrizedChain::identity(&c, 1).unwrap();
        let one = ScalarField::constant(&c, 1.0);
        let r = return_time_volume(&one, &sigma, &chain, &QuadratureSpec::default()).unwrap();
        assert!((r.value - PI).abs() < 1e-13);
        let three = ScalarField::constant(&c, 3.0);
        let r3 = return_time_volume(&three, &sigma, &chain, &QuadratureSpec::default()).unwrap();
        assert!((r3.value - 3.0 * r.value).abs() < 1e-13);
    }
}
