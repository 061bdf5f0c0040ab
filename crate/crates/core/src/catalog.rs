//! Named examples: the Hopf fibration, the disc-map contact form, the
//! Beltrami family on S³, a quaternionic coframe, and surfaces of
//! revolution with cone points.
//!
//! All S³ examples live on the chart `(η, φ₁, φ₂)` with
//! `(x₁, y₁, x₂, y₂) = (cos η cos φ₁, cos η sin φ₁, sin η cos φ₂, sin η sin φ₂)`.
//! On that box `α∧dα` of the Hopf connection form is a negative multiple of
//! `dη∧dφ₁∧dφ₂`, so the positively oriented S³ chain carries orientation −1.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::chart::{ChartDomain, Point};
use crate::error::{CheckError, FormError, IntegrationError};
use crate::forms::{ext_d, pullback, wedge, KForm, ScalarField, SmoothMap, VectorFieldRepr};
use crate::integrate::{integrate_box, integrate_form, integrate_truncated, IntegrationResult, ParametrizedChain, QuadratureSpec, TruncatedResult};
use crate::jet::{Jet, MonomialTable};
use crate::report::{CheckReport, Provenance, Quantity};
use crate::riemannian::{pullback_metric, MetricField};
use crate::seifert::{chi_orb, Orbifold2D, RationalQ};

/// Orientation of the `(η, φ₁, φ₂)` box relative to the standard orientation of S³.
pub const S3_CHART_ORIENTATION: i8 = -1;

/// Upper radial bound of the plane chart carrying the Hopf section.
pub const SECTION_CHART_RADIUS: f64 = 1e6;

/// A one-variable function evaluated on jets.
pub type ProfileFn = Arc<dyn Fn(&Jet) -> Jet + Send + Sync>;

pub fn hopf_chart() -> Arc<ChartDomain> {
    ChartDomain::new(
        "hopf",
        &["eta", "phi1", "phi2"],
        &[(0.0, PI / 2.0), (0.0, 2.0 * PI), (0.0, 2.0 * PI)],
        "eta = 0 and eta = pi/2 (the two core circles)",
    )
    .expect("static chart")
}

pub fn r4_chart() -> Arc<ChartDomain> {
    ChartDomain::new("r4", &["x1", "y1", "x2", "y2"], &[(-2.0, 2.0); 4], "").expect("static chart")
}

/// `ι`: the S³ chart into `(x₁, y₁, x₂, y₂)`.
pub fn s3_embedding(chart: &Arc<ChartDomain>) -> SmoothMap {
    SmoothMap::from_jets(chart, &r4_chart(), |x| {
        let (ce, se) = (x[0].cos(), x[0].sin());
        vec![&ce * &x[1].cos(), &ce * &x[1].sin(), &se * &x[2].cos(), &se * &x[2].sin()]
    })
}

/// The round metric of S³ in the Hopf chart: `dη² + cos²η dφ₁² + sin²η dφ₂²`.
pub fn round_s3_metric(chart: &Arc<ChartDomain>) -> MetricField {
    MetricField::from_jets(chart, |x| {
        let t = x[0].table().clone();
        let (c, s) = (x[0].cos(), x[0].sin());
        let z = Jet::zero(&t);
        vec![Jet::constant(&t, 1.0), z.clone(), z.clone(), z.clone(), &c * &c, z.clone(), z.clone(), z, &s * &s]
    })
}

#[derive(Debug, Clone)]
pub struct HopfBundle {
    pub chart: Arc<ChartDomain>,
    /// `2π(∂φ₁ + ∂φ₂)`, fibre period 1.
    pub x: VectorFieldRepr,
    /// `(cos²η dφ₁ + sin²η dφ₂)/2π`.
    pub alpha: KForm,
}

pub fn hopf_bundle() -> HopfBundle {
    let chart = hopf_chart();
    let x = VectorFieldRepr::constant(&chart, vec![0.0, 2.0 * PI, 2.0 * PI]).expect("dimension 3");
    let alpha = KForm::from_jets(&chart, 1, |x| {
        let (c, s) = (x[0].cos(), x[0].sin());
        vec![Jet::zero(x[0].table()), &(&c * &c) / (2.0 * PI), &(&s * &s) / (2.0 * PI)]
    })
    .expect("degree 1");
    HopfBundle { chart, x, alpha }
}

/// The positively oriented S³ chain over the whole Hopf box.
pub fn s3_chain(chart: &Arc<ChartDomain>) -> ParametrizedChain {
    ParametrizedChain::identity(chart, S3_CHART_ORIENTATION).expect("valid chain")
}

/// `∫_{S³} α∧dα` for the Hopf connection form.
pub fn hopf_volume(spec: &QuadratureSpec) -> Result<IntegrationResult, CheckError> {
    let h = hopf_bundle();
    let vol = wedge(&h.alpha, &ext_d(&h.alpha)?)?;
    Ok(integrate_form(&vol, &s3_chain(&h.chart), spec)?)
}

pub fn section_chart() -> Arc<ChartDomain> {
    ChartDomain::new(
        "plane",
        &["r", "phi"],
        &[(0.0, SECTION_CHART_RADIUS), (0.0, 2.0 * PI)],
        "r = 0",
    )
    .expect("static chart")
}

/// `(r, φ) ↦ (1, r e^{iφ})/√(1+r²)`, i.e. `η = atan r, φ₁ = 0, φ₂ = φ`.
pub fn hopf_section() -> SmoothMap {
    SmoothMap::from_jets(&section_chart(), &hopf_chart(), |x| {
        vec![x[0].atan(), Jet::zero(x[0].table()), x[1].clone()]
    })
}

/// The disc of radius `r_max` in the section chart, parametrized by
/// `(s, φ) ↦ (tan s, φ)` with `s ∈ [0, atan r_max]`.
pub fn truncated_plane_chain(r_max: f64) -> Result<ParametrizedChain, IntegrationError> {
    let params = ChartDomain::parameter_box("tan-disc", &[(0.0, r_max.atan()), (0.0, 2.0 * PI)])?;
    let map = SmoothMap::from_jets(&params, &section_chart(), |x| vec![x[0].tan(), x[1].clone()]);
    ParametrizedChain::new(map, 1)
}

/// `∫_{r ≤ R} section^* dα`; the tail beyond `R` is exactly `1/(1+R²)`, used
/// as the truncation bound when `analytic_tail` is set.
pub fn hopf_section_integral(r_max: f64, spec: &QuadratureSpec, analytic_tail: bool) -> Result<TruncatedResult, CheckError> {
    let h = hopf_bundle();
    let curvature = pullback(&hopf_section(), &ext_d(&h.alpha)?)?;
    let run = |r: f64| integrate_form(&curvature, &truncated_plane_chain(r)?, spec);
    let tail = |r: f64| 1.0 / (1.0 + r * r);
    let bound: Option<&dyn Fn(f64) -> f64> = if analytic_tail { Some(&tail) } else { None };
    Ok(integrate_truncated(run, r_max, bound)?)
}

/// Base chart `(η, ψ)` of the Hopf fibration, `ψ = φ₂ − φ₁`.
pub fn hopf_base_chart() -> Arc<ChartDomain> {
    ChartDomain::new(
        "hopf-base",
        &["eta", "psi"],
        &[(0.0, PI / 2.0), (-2.0 * PI, 2.0 * PI)],
        "eta = 0 and eta = pi/2 (the two poles)",
    )
    .expect("static chart")
}

pub fn hopf_projection() -> SmoothMap {
    SmoothMap::from_jets(&hopf_chart(), &hopf_base_chart(), |x| vec![x[0].clone(), &x[2] - &x[1]])
}

/// `ε sin²(2η)(1 + cos(ψ)/2) dψ` on the base; smooth on S² because the
/// prefactor vanishes to second order at both poles.
pub fn hopf_base_perturbation(epsilon: f64) -> KForm {
    KForm::from_jets(&hopf_base_chart(), 1, move |x| {
        let s = (&x[0] * 2.0).sin();
        let bump = &(&s * &s) * &(&x[1].cos() * 0.5 + 1.0);
        vec![Jet::zero(x[0].table()), &bump * epsilon]
    })
    .expect("degree 1")
}

/// `α + π^*γ` with `γ` from [`hopf_base_perturbation`]; also characteristic for `X`.
pub fn hopf_perturbed_alpha(epsilon: f64) -> Result<KForm, FormError> {
    let h = hopf_bundle();
    h.alpha.add(&pullback(&hopf_projection(), &hopf_base_perturbation(epsilon))?)
}

/// Profile `H(u)` of the disc example together with `H′`.
#[derive(Clone)]
pub struct HProfile {
    pub label: String,
    h: ProfileFn,
    h_prime: ProfileFn,
}

impl fmt::Debug for HProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HProfile({})", self.label)
    }
}

/// Number of sample points used to check `H − uH′ > 0` on `[0, 1]`.
pub const PROFILE_SAMPLES: usize = 1001;

impl HProfile {
    pub fn new(label: impl Into<String>, h: ProfileFn, h_prime: ProfileFn) -> Result<HProfile, CheckError> {
        let p = HProfile {
            label: label.into(),
            h,
            h_prime,
        };
        for i in 0..PROFILE_SAMPLES {
            let u = i as f64 / (PROFILE_SAMPLES - 1) as f64;
            let tau = p.tau_value(u);
            if !(tau > 0.0) {
                return Err(CheckError::Precondition {
                    hypothesis: "H(u) - u H'(u) > 0".into(),
                    coords: vec![u],
                    deviation: tau,
                });
            }
        }
        Ok(p)
    }

    /// `H(u) = Σ cᵢ uⁱ`.
    pub fn polynomial(coeffs: &[f64]) -> Result<HProfile, CheckError> {
        let c = coeffs.to_vec();
        let dc: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect();
        let label = coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{v}*u^{i}"))
            .collect::<Vec<_>>()
            .join(" + ");
        HProfile::new(label, poly(c), poly(dc))
    }

    fn value_at(f: &ProfileFn, u: f64) -> f64 {
        let t = MonomialTable::get(1, 0);
        f(&Jet::constant(&t, u)).value()
    }

    pub fn h(&self, u: f64) -> f64 {
        Self::value_at(&self.h, u)
    }

    pub fn h_prime(&self, u: f64) -> f64 {
        Self::value_at(&self.h_prime, u)
    }

    /// `τ(u) = H(u) − u H′(u)`.
    pub fn tau_value(&self, u: f64) -> f64 {
        self.h(u) - u * self.h_prime(u)
    }

    pub fn h_jet(&self, u: &Jet) -> Jet {
        (self.h)(u)
    }

    pub fn h_prime_jet(&self, u: &Jet) -> Jet {
        (self.h_prime)(u)
    }
}

fn poly(c: Vec<f64>) -> ProfileFn {
    Arc::new(move |u: &Jet| {
        let mut acc = Jet::constant(u.table(), 0.0);
        for v in c.iter().rev() {
            acc = &(&acc * u) + *v;
        }
        acc
    })
}

#[derive(Debug, Clone)]
pub struct DiscContact {
    pub chart: Arc<ChartDomain>,
    pub alpha: KForm,
    pub x: VectorFieldRepr,
    pub tau: ScalarField,
}

pub fn disc_chart() -> Arc<ChartDomain> {
    ChartDomain::new(
        "disc",
        &["r", "phi", "theta"],
        &[(0.0, 1.0), (0.0, 2.0 * PI), (0.0, 1.0)],
        "r = 0 (the binding orbit)",
    )
    .expect("static chart")
}

/// `α = H(r²) dθ + (r²/2) dφ`, `X = (∂θ − 2H′∂φ)/τ`, `τ = H − r²H′` on `(r, φ, θ)`.
pub fn disc_contact(h: &HProfile) -> DiscContact {
    let chart = disc_chart();
    let (h1, h2, h3) = (h.clone(), h.clone(), h.clone());
    let alpha = KForm::from_jets(&chart, 1, move |x| {
        let u = &x[0] * &x[0];
        vec![Jet::zero(x[0].table()), &u * 0.5, h1.h_jet(&u)]
    })
    .expect("degree 1");
    let tau_of = move |hp: &HProfile, x: &[Jet]| {
        let u = &x[0] * &x[0];
        hp.h_jet(&u) - &u * &hp.h_prime_jet(&u)
    };
    let x = VectorFieldRepr::from_jets(&chart, move |x| {
        let u = &x[0] * &x[0];
        let tau = tau_of(&h2, x);
        vec![Jet::zero(x[0].table()), &(&h2.h_prime_jet(&u) * -2.0) / &tau, tau.recip()]
    });
    let tau = ScalarField::from_jets(&chart, move |x| tau_of(&h3, x));
    DiscContact { chart, alpha, x, tau }
}

/// The disc `θ = 0`: `(r, φ) ↦ (r, φ, 0)`.
pub fn disc_section_chain() -> ParametrizedChain {
    let params = ChartDomain::new("unit-disc", &["r", "phi"], &[(0.0, 1.0), (0.0, 2.0 * PI)], "r = 0").expect("static chart");
    let map = SmoothMap::from_jets(&params, &disc_chart(), |x| vec![x[0].clone(), x[1].clone(), Jet::zero(x[0].table())]);
    ParametrizedChain::new(map, 1).expect("valid chain")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscMethod {
    /// `∫ α∧dα` over the solid torus.
    Direct,
    /// `∫_{D²} τ σ` with `σ = dα` on the disc `θ = 0`.
    ReturnTime,
}

pub fn disc_volume(h: &HProfile, method: DiscMethod, spec: &QuadratureSpec) -> Result<IntegrationResult, CheckError> {
    let d = disc_contact(h);
    match method {
        DiscMethod::Direct => {
            let vol = wedge(&d.alpha, &ext_d(&d.alpha)?)?;
            Ok(integrate_form(&vol, &ParametrizedChain::identity(&d.chart, 1)?, spec)?)
        }
        DiscMethod::ReturnTime => {
            crate::checks::return_time_volume(&d.tau, &ext_d(&d.alpha)?, &disc_section_chain(), spec)
        }
    }
}

#[derive(Debug, Clone)]
pub struct BeltramiFamily {
    pub a1: f64,
    pub a2: f64,
    pub chart: Arc<ChartDomain>,
    /// The displayed closed form of `g_{a₁,a₂}`, evaluated through the embedding.
    pub g: MetricField,
    /// `x₁∂x₂ − x₂∂x₁ + y₁∂y₂ − y₂∂y₁` in chart components.
    pub x1: VectorFieldRepr,
    pub l_squared: ScalarField,
    /// `(Lα)/L` from the displayed covector.
    pub alpha: KForm,
}

fn delta(a1: f64, a2: f64, c2: &Jet, s2: &Jet) -> Jet {
    &(c2 * (a1 * a1)) + &(s2 * (a2 * a2))
}

fn beltrami_ambient_metric(a1: f64, a2: f64) -> MetricField {
    MetricField::from_jets(&r4_chart(), move |x| {
        let t = x[0].table().clone();
        let r1 = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
        let r2 = &(&x[2] * &x[2]) + &(&x[3] * &x[3]);
        let d = delta(a1, a2, &r1, &r2);
        let dinv = d.recip();
        let d2inv = &dinv * &dinv;
        let diag = [a1 * a1, a1 * a1, a2 * a2, a2 * a2];
        let u1 = [x[0].clone(), x[1].clone(), Jet::zero(&t), Jet::zero(&t)];
        let u2 = [Jet::zero(&t), Jet::zero(&t), x[2].clone(), x[3].clone()];
        let mut out = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                let mut e = if i == j { &dinv * diag[i] } else { Jet::zero(&t) };
                let rank = &(&(&u1[i] * &u1[j]) * a1.powi(4)) + &(&(&u2[i] * &u2[j]) * a2.powi(4));
                let cross = &(&(&u1[i] * &u2[j]) + &(&u2[i] * &u1[j])) * (a1 * a1 * a2 * a2);
                e -= &(&(&rank + &cross) * &d2inv);
                out.push(e);
            }
        }
        out
    })
}

/// `φ_{a₁,a₂}(x) = Ax/|Ax|` with `A = diag(a₁, a₁, a₂, a₂)`, from the S³ chart.
pub fn beltrami_map(chart: &Arc<ChartDomain>, a1: f64, a2: f64) -> SmoothMap {
    SmoothMap::from_jets(chart, &r4_chart(), move |x| {
        let (ce, se) = (x[0].cos(), x[0].sin());
        let v = [
            &(&ce * &x[1].cos()) * a1,
            &(&ce * &x[1].sin()) * a1,
            &(&se * &x[2].cos()) * a2,
            &(&se * &x[2].sin()) * a2,
        ];
        let norm = (&(&(&v[0] * &v[0]) + &(&v[1] * &v[1])) + &(&(&v[2] * &v[2]) + &(&v[3] * &v[3]))).sqrt();
        let inv = norm.recip();
        v.iter().map(|c| c * &inv).collect()
    })
}

/// `φ^* g₀` for the round metric `g₀` (Euclidean metric restricted to S³).
pub fn beltrami_pullback_metric(chart: &Arc<ChartDomain>, a1: f64, a2: f64) -> Result<MetricField, FormError> {
    pullback_metric(&beltrami_map(chart, a1, a2), &MetricField::euclidean(&r4_chart()))
}

pub fn beltrami_family(a1: f64, a2: f64) -> Result<BeltramiFamily, CheckError> {
    if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
        return Err(CheckError::InvalidParameter(format!("a1 = {a1}, a2 = {a2} must be positive")));
    }
    let chart = hopf_chart();
    let g = pullback_metric(&s3_embedding(&chart), &beltrami_ambient_metric(a1, a2))?;
    let x1 = VectorFieldRepr::from_jets(&chart, |x| {
        let d = &x[1] - &x[2];
        let (c, s) = (d.cos(), d.sin());
        vec![c, &x[0].tan() * &s, &s / &x[0].tan()]
    });
    let l2 = move |x: &[Jet]| {
        let (c, s) = (x[0].cos(), x[0].sin());
        let (c2, s2) = (&c * &c, &s * &s);
        let d = delta(a1, a2, &c2, &s2);
        let w = &(&c * &s) * &(&x[1] - &x[2]).cos();
        let first = &(&(&s2 * (a1 * a1)) + &(&c2 * (a2 * a2))) / &d;
        let k = (a1 * a1 - a2 * a2).powi(2);
        &first - &(&(&(&w * &w) * k) / &(&d * &d))
    };
    let l_squared = ScalarField::from_jets(&chart, l2);
    let l_alpha_ambient = KForm::from_jets(&r4_chart(), 1, move |x| {
        let r1 = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
        let r2 = &(&x[2] * &x[2]) + &(&x[3] * &x[3]);
        let d = delta(a1, a2, &r1, &r2);
        let w = &(&x[0] * &x[2]) + &(&x[1] * &x[3]);
        let p = &w / &(&d * &d);
        let (k1, k2) = (a1.powi(4) - a1 * a1 * a2 * a2, a2.powi(4) - a1 * a1 * a2 * a2);
        vec![
            &(&(&x[2] / &d) * -(a1 * a1)) + &(&(&p * &x[0]) * k1),
            &(&(&x[3] / &d) * -(a1 * a1)) + &(&(&p * &x[1]) * k1),
            &(&(&x[0] / &d) * (a2 * a2)) - &(&(&p * &x[2]) * k2),
            &(&(&x[1] / &d) * (a2 * a2)) - &(&(&p * &x[3]) * k2),
        ]
    })?;
    let l_alpha = pullback(&s3_embedding(&chart), &l_alpha_ambient)?;
    let inv_l = l_squared.map(|j| j.powf(-0.5));
    let alpha = l_alpha.mul_function(&inv_l)?;
    Ok(BeltramiFamily {
        a1,
        a2,
        chart,
        g,
        x1,
        l_squared,
        alpha,
    })
}

impl BeltramiFamily {
    /// `X₁/L`, of unit `g`-length.
    pub fn unit_field(&self) -> Result<VectorFieldRepr, FormError> {
        self.x1.mul_function(&self.l_squared.map(|j| j.powf(-0.5)))
    }
}

#[derive(Debug, Clone)]
pub struct QuaternionicCoframe {
    pub chart: Arc<ChartDomain>,
    pub a: KForm,
    pub b: KForm,
    pub c: KForm,
}

/// Restrictions to S³ of the three standard left-invariant forms.
pub fn quaternionic_coframe() -> Result<QuaternionicCoframe, FormError> {
    let chart = hopf_chart();
    let r4 = r4_chart();
    let emb = s3_embedding(&chart);
    // coefficient vectors on (dx1, dx2, dx3, dx4) with (x1..x4) = (x1, y1, x2, y2)
    let a = KForm::from_jets(&r4, 1, |x| vec![-&x[1], x[0].clone(), -&x[3], x[2].clone()])?;
    let b = KForm::from_jets(&r4, 1, |x| vec![-&x[2], x[3].clone(), x[0].clone(), -&x[1]])?;
    let c = KForm::from_jets(&r4, 1, |x| vec![-&x[3], -&x[2], x[1].clone(), x[0].clone()])?;
    Ok(QuaternionicCoframe {
        a: pullback(&emb, &a)?,
        b: pullback(&emb, &b)?,
        c: pullback(&emb, &c)?,
        chart,
    })
}

/// Common kernel field of `b` and `c`, normalized by `2a(X) = 1`: `(∂φ₁ + ∂φ₂)/2`.
pub fn cartan_field(chart: &Arc<ChartDomain>) -> VectorFieldRepr {
    VectorFieldRepr::constant(chart, vec![0.0, 0.5, 0.5]).expect("dimension 3")
}

/// A rotationally symmetric metric `dr² + f(r)² dφ²` on `[0, L] × S¹`
/// closing up with cone points of orders `α₁` at `r = 0` and `α₂` at `r = L`.
#[derive(Clone)]
pub struct RevolutionProfile {
    pub label: String,
    f: ProfileFn,
    pub length: f64,
    pub alpha1: i64,
    pub alpha2: i64,
}

impl fmt::Debug for RevolutionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RevolutionProfile({}, L = {}, {}, {})", self.label, self.length, self.alpha1, self.alpha2)
    }
}

pub const CLOSING_TOL: f64 = 1e-8;

impl RevolutionProfile {
    pub fn new(label: impl Into<String>, f: ProfileFn, length: f64, alpha1: i64, alpha2: i64) -> Result<RevolutionProfile, CheckError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(CheckError::InvalidProfile(format!("length {length}")));
        }
        if alpha1 < 1 || alpha2 < 1 {
            return Err(CheckError::InvalidProfile(format!("cone orders {alpha1}, {alpha2} must be >= 1")));
        }
        let p = RevolutionProfile {
            label: label.into(),
            f,
            length,
            alpha1,
            alpha2,
        };
        let (f0, d0) = p.value_and_slope(0.0);
        let (fl, dl) = p.value_and_slope(length);
        let conditions = [
            ("f(0) = 0", f0, 0.0),
            ("f(L) = 0", fl, 0.0),
            ("f'(0) = 1/alpha1", d0, 1.0 / alpha1 as f64),
            ("f'(L) = -1/alpha2", dl, -1.0 / alpha2 as f64),
        ];
        for (name, got, want) in conditions {
            if !((got - want).abs() <= CLOSING_TOL) {
                return Err(CheckError::InvalidProfile(format!("{name}: got {got}, expected {want}")));
            }
        }
        for i in 1..PROFILE_SAMPLES - 1 {
            let r = length * i as f64 / (PROFILE_SAMPLES - 1) as f64;
            let v = p.value_and_slope(r).0;
            if !(v > 0.0) {
                return Err(CheckError::InvalidProfile(format!("f({r}) = {v} is not positive")));
            }
        }
        Ok(p)
    }

    fn jet_at(&self, r: f64, order: usize) -> Jet {
        let t = MonomialTable::get(1, order);
        (self.f)(&Jet::variable(&t, 0, r))
    }

    pub fn value_and_slope(&self, r: f64) -> (f64, f64) {
        let j = self.jet_at(r, 1);
        (j.value(), j.derivative(&[1]))
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.jet_at(r, 2).derivative(&[2])
    }

    /// Gaussian curvature `−f″/f`.
    pub fn curvature(&self, r: f64) -> f64 {
        let j = self.jet_at(r, 2);
        -j.derivative(&[2]) / j.value()
    }

    /// The orbifold: a sphere with a cone point for every order above 1.
    pub fn orbifold(&self) -> Orbifold2D {
        let cones = [self.alpha1, self.alpha2].into_iter().filter(|&a| a >= 2).collect();
        Orbifold2D::new(0, cones).expect("orders validated")
    }
}

/// Compares `∫K dA = −2π ∫₀^L f″ dr` with `2π χ_orb`.
pub fn gauss_bonnet_revolution(p: &RevolutionProfile, spec: &QuadratureSpec, tolerance: f64) -> Result<CheckReport, CheckError> {
    let r = integrate_box(&[(0.0, p.length)], spec, |x| Ok(p.second_derivative(x[0])))?;
    let total = -2.0 * PI * r.value;
    let chi = chi_orb(&p.orbifold());
    let expected = 2.0 * PI * chi.to_f64();
    Ok(CheckReport::new(
        format!("gauss_bonnet[{}]", p.label),
        Quantity::real(total),
        Quantity::real(expected),
        tolerance,
        format!(
            "cone orders ({}, {}), chi_orb = {} (exact), expected = 2*pi*chi_orb",
            p.alpha1, p.alpha2, chi
        ),
        Provenance::Quadrature {
            error_estimate: 2.0 * PI * r.error_estimate,
        },
    ))
}

/// `sin r` on `[0, π]`: the round sphere.
pub fn round_sphere_profile() -> RevolutionProfile {
    RevolutionProfile::new("sin(r)", Arc::new(|r: &Jet| r.sin()), PI, 1, 1).expect("valid profile")
}

/// `sin(r)(1/2 − r/(6π))` on `[0, π]`: cone orders 2 and 3.
pub fn football_profile() -> RevolutionProfile {
    RevolutionProfile::new(
        "sin(r)*(1/2 - r/(6*pi))",
        Arc::new(|r: &Jet| &r.sin() * &(&(r * (-1.0 / (6.0 * PI))) + 0.5)),
        PI,
        2,
        3,
    )
    .expect("valid profile")
}

/// `χ_orb` of the sphere with the profile's cone points, exact.
pub fn revolution_chi(p: &RevolutionProfile) -> RationalQ {
    chi_orb(&p.orbifold())
}

/// Points of the S³ chart at least `margin` away from the core circles.
pub fn s3_samples(count: usize, seed: u64, margin: f64) -> Vec<Point> {
    hopf_chart().sample_points(count, seed, margin)
}

/// The chart form of `g_{a₁,a₂}` at `(η, φ₁, φ₂)`, row-major; it is diagonal
/// and depends on `η` only.
pub fn beltrami_chart_metric(a1: f64, a2: f64, x: &[f64]) -> [f64; 9] {
    let (c, s) = (x[0].cos(), x[0].sin());
    let (c2, s2) = (c * c, s * s);
    let d = a1 * a1 * c2 + a2 * a2 * s2;
    let k = (a1 * a1 - a2 * a2).powi(2);
    let g_eta = (a1 * a1 * s2 + a2 * a2 * c2) / d - k * s2 * c2 / (d * d);
    [g_eta, 0.0, 0.0, 0.0, a1 * a1 * c2 / d, 0.0, 0.0, 0.0, a2 * a2 * s2 / d]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::interior;
    use crate::riemannian::wadsley_residual;

    fn gl() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn hopf_volume_and_characteristic_pair() {
        let v = hopf_volume(&gl()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-8, "{v:?}");
        let h = hopf_bundle();
        let ax = interior(&h.x, &h.alpha).unwrap();
        let ixd = interior(&h.x, &ext_d(&h.alpha).unwrap()).unwrap();
        for p in s3_samples(50, 3, 1e-3) {
            assert!((ax.eval(&p).unwrap().coeffs[0] - 1.0).abs() < 1e-13);
            assert!(ixd.eval(&p).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn hopf_section_pullback_and_integral() {
        let h = hopf_bundle();
        let curv = pullback(&hopf_section(), &ext_d(&h.alpha).unwrap()).unwrap();
        let v = curv.eval_at(&[1.0, 0.0]).unwrap().coeffs[0];
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-14, "{v}");
        let t = hopf_section_integral(1e3, &gl(), true).unwrap();
        assert!((t.result.value - (1.0 - 1.0 / (1.0 + 1e6))).abs() < 1e-12, "{t:?}");
        assert!((t.result.value - 1.0).abs() < 1e-5);
        assert!((t.truncation_error - 1.0 / (1.0 + 1e6)).abs() < 1e-15);
    }

    #[test]
    fn perturbed_alpha_stays_characteristic() {
        let h = hopf_bundle();
        let beta = hopf_perturbed_alpha(0.1).unwrap();
        let ax = interior(&h.x, &beta).unwrap();
        let ixd = interior(&h.x, &ext_d(&beta).unwrap()).unwrap();
        for p in s3_samples(50, 5, 1e-3) {
            assert!((ax.eval(&p).unwrap().coeffs[0] - 1.0).abs() < 1e-12);
            assert!(ixd.eval(&p).unwrap().max_abs() < 1e-10);
        }
        let vol = wedge(&beta, &ext_d(&beta).unwrap()).unwrap();
        let v = integrate_form(&vol, &s3_chain(&h.chart), &gl()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-8, "{v:?}");
    }

    #[test]
    fn disc_volumes() {
        let cases = [(vec![1.0], PI), (vec![2.0, -1.0], 2.0 * PI), (vec![1.0, 0.0, 0.125], 23.0 * PI / 24.0)];
        for (c, want) in cases {
            let h = HProfile::polynomial(&c).unwrap();
            let a = disc_volume(&h, DiscMethod::Direct, &gl()).unwrap();
            let b = disc_volume(&h, DiscMethod::ReturnTime, &gl()).unwrap();
            assert!((a.value - want).abs() < 1e-10, "{c:?} {a:?}");
            assert!((b.value - want).abs() < 1e-10, "{c:?} {b:?}");
        }
        assert!(HProfile::polynomial(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn disc_field_is_reeb() {
        let h = HProfile::polynomial(&[2.0, -1.0, 0.3]).unwrap();
        let d = disc_contact(&h);
        let pts = d.chart.sample_points(30, 1, 1e-3);
        let ax = interior(&d.x, &d.alpha).unwrap();
        let ixd = interior(&d.x, &ext_d(&d.alpha).unwrap()).unwrap();
        for p in &pts {
            assert!((ax.eval(p).unwrap().coeffs[0] - 1.0).abs() < 1e-12);
            assert!(ixd.eval(p).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn beltrami_round_case_and_closed_forms() {
        let f = beltrami_family(1.0, 1.0).unwrap();
        for p in s3_samples(20, 2, 0.05) {
            assert!((f.l_squared.eval(&p).unwrap() - 1.0).abs() < 1e-12);
        }
        let (a1, a2) = (1.2, 0.8);
        let f = beltrami_family(a1, a2).unwrap();
        let pb = beltrami_pullback_metric(&f.chart, a1, a2).unwrap();
        for p in s3_samples(50, 9, 0.05) {
            let want = beltrami_chart_metric(a1, a2, &p.coords);
            let (g, h) = (f.g.matrix(&p).unwrap(), pb.matrix(&p).unwrap());
            for i in 0..3 {
                for j in 0..3 {
                    assert!((g[(i, j)] - want[3 * i + j]).abs() < 1e-10, "{i}{j} {p:?}");
                    assert!((h[(i, j)] - want[3 * i + j]).abs() < 1e-10, "{i}{j} {p:?}");
                }
            }
        }
        let u = f.unit_field().unwrap();
        let pts = s3_samples(20, 4, 0.05);
        for p in &pts {
            assert!((f.g.norm(&u, p).unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(wadsley_residual(&f.g, &u, &pts).unwrap() < 1e-5);
        let ax = interior(&u, &f.alpha).unwrap();
        for p in &pts {
            assert!((ax.eval(p).unwrap().coeffs[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quaternionic_coframe_is_nondegenerate() {
        let q = quaternionic_coframe().unwrap();
        let top = wedge(&wedge(&q.a, &q.b).unwrap(), &q.c).unwrap();
        for p in s3_samples(20, 6, 0.05) {
            assert!(top.eval(&p).unwrap().max_abs() > 1e-3);
        }
        let x = cartan_field(&q.chart);
        let ax = interior(&x, &q.a).unwrap();
        for p in s3_samples(10, 7, 0.05) {
            assert!((ax.eval(&p).unwrap().coeffs[0] - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_bonnet_profiles() {
        let s = gauss_bonnet_revolution(&round_sphere_profile(), &gl(), 1e-8).unwrap();
        assert!(s.passed);
        assert!((s.computed.distance(&Quantity::real(4.0 * PI))) < 1e-8);
        let f = gauss_bonnet_revolution(&football_profile(), &gl(), 1e-6).unwrap();
        assert!(f.passed, "{f:?}");
        assert_eq!(revolution_chi(&football_profile()), RationalQ::new(5, 6).unwrap());
        assert!((f.computed.distance(&Quantity::real(5.0 * PI / 3.0))) < 1e-6);
    }

    #[test]
    fn bad_revolution_profile_is_rejected() {
        let r = RevolutionProfile::new("sin", Arc::new(|r: &Jet| r.sin()), PI, 2, 1);
        assert!(matches!(r, Err(CheckError::InvalidProfile(_))));
    }
}
