//! Quadrature of forms over parametrized chains.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{check_same_chart, ChartDomain};
use crate::error::IntegrationError;
use crate::forms::{pullback, KForm, ScalarField, SmoothMap};

pub const DEFAULT_GL_ORDER: usize = 32;

/// Quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum QuadratureSpec {
    /// Tensor-product Gauss–Legendre with `order` nodes per axis.
    GaussLegendre { order: usize },
    /// Uniform Monte Carlo; sample `i` draws from the stream `(seed, i)`.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::GaussLegendre {
            order: DEFAULT_GL_ORDER,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        match *self {
            QuadratureSpec::GaussLegendre { order } if order < 2 => Err(IntegrationError::InvalidSpec(format!(
                "Gauss-Legendre order must be at least 2, got {order}"
            ))),
            QuadratureSpec::MonteCarlo { samples, .. } if samples < 1 => {
                Err(IntegrationError::InvalidSpec("Monte Carlo needs at least one sample".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// An oriented k-dimensional box mapped into a chart.
#[derive(Debug, Clone)]
pub struct ParametrizedChain {
    pub param_domain: Vec<(f64, f64)>,
    pub map: SmoothMap,
    pub orientation: i8,
}

impl ParametrizedChain {
    /// Chain over the whole source chart of `map`.
    pub fn new(map: SmoothMap, orientation: i8) -> Result<ParametrizedChain, IntegrationError> {
        let bounds = map.source().bounds.clone();
        ParametrizedChain::with_domain(map, bounds, orientation)
    }

    pub fn with_domain(
        map: SmoothMap,
        param_domain: Vec<(f64, f64)>,
        orientation: i8,
    ) -> Result<ParametrizedChain, IntegrationError> {
        if orientation != 1 && orientation != -1 {
            return Err(IntegrationError::InvalidSpec(format!("orientation {orientation}")));
        }
        if param_domain.len() != map.source().dim() || param_domain.is_empty() {
            return Err(IntegrationError::InvalidSpec(format!(
                "{} parameter intervals for a {}-dimensional source",
                param_domain.len(),
                map.source().dim()
            )));
        }
        for &(lo, hi) in &param_domain {
            if !(lo < hi) {
                return Err(IntegrationError::InvalidSpec(format!("empty interval [{lo}, {hi}]")));
            }
        }
        Ok(ParametrizedChain {
            param_domain,
            map,
            orientation,
        })
    }

    /// The identity chain on a chart's own coordinate box.
    pub fn identity(chart: &Arc<ChartDomain>, orientation: i8) -> Result<ParametrizedChain, IntegrationError> {
        ParametrizedChain::new(SmoothMap::identity(chart), orientation)
    }

    pub fn k(&self) -> usize {
        self.param_domain.len()
    }

    pub fn target(&self) -> &Arc<ChartDomain> {
        self.map.target()
    }

    pub fn reversed(&self) -> ParametrizedChain {
        ParametrizedChain {
            orientation: -self.orientation,
            ..self.clone()
        }
    }

    /// Splits the parameter box at `at` along `axis`.
    pub fn split(&self, axis: usize, at: f64) -> Result<(ParametrizedChain, ParametrizedChain), IntegrationError> {
        let (lo, hi) = *self
            .param_domain
            .get(axis)
            .ok_or_else(|| IntegrationError::InvalidSpec(format!("axis {axis}")))?;
        if !(lo < at && at < hi) {
            return Err(IntegrationError::InvalidSpec(format!("split point {at} outside ({lo}, {hi})")));
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.param_domain[axis].1 = at;
        right.param_domain[axis].0 = at;
        Ok((left, right))
    }
}

fn legendre_nodes(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut x = vec![0.0; n];
            let mut w = vec![0.0; n];
            for i in 0..n.div_ceil(2) {
                let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, z);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                    let dz = p1 / dp;
                    z -= dz;
                    if dz.abs() < 1e-16 {
                        break;
                    }
                }
                x[i] = -z;
                x[n - 1 - i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                w[n - 1 - i] = w[i];
            }
            Arc::new((x, w))
        })
        .clone()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nw = legendre_nodes(n);
    (nw.0.clone(), nw.1.clone())
}

/// Pairwise summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn tensor_rule<F>(bounds: &[(f64, f64)], order: usize, f: &F) -> Result<(f64, f64, usize), IntegrationError>
where
    F: Fn(&[f64]) -> Result<f64, IntegrationError> + Sync,
{
    let (nodes, weights) = &*legendre_nodes(order);
    let k = bounds.len();
    let total = order.pow(k as u32);
    let terms: Vec<(f64, f64)> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut x = vec![0.0; k];
            let mut w = 1.0;
            for (axis, &(lo, hi)) in bounds.iter().enumerate() {
                let i = rest % order;
                rest /= order;
                let half = 0.5 * (hi - lo);
                x[axis] = lo + half * (nodes[i] + 1.0);
                w *= half * weights[i];
            }
            let v = f(&x)?;
            if !v.is_finite() {
                return Err(IntegrationError::NonFiniteIntegrand { node: x });
            }
            Ok((w * v, (w * v).abs()))
        })
        .collect::<Result<_, _>>()?;
    let (signed, abs): (Vec<f64>, Vec<f64>) = terms.into_iter().unzip();
    Ok((pairwise_sum(&signed), pairwise_sum(&abs), total))
}

/// Integrates `f` over a box with the given rule.
pub fn integrate_box<F>(bounds: &[(f64, f64)], spec: &QuadratureSpec, f: F) -> Result<IntegrationResult, IntegrationError>
where
    F: Fn(&[f64]) -> Result<f64, IntegrationError> + Sync,
{
    spec.validate()?;
    match *spec {
        QuadratureSpec::GaussLegendre { order } => {
            let (fine, abs_sum, n_fine) = tensor_rule(bounds, order, &f)?;
            let (coarse, _, n_coarse) = tensor_rule(bounds, (order / 2).max(1), &f)?;
            let rounding = 64.0 * f64::EPSILON * abs_sum;
            Ok(IntegrationResult {
                value: fine,
                error_estimate: (fine - coarse).abs().max(rounding),
                evaluations: n_fine + n_coarse,
            })
        }
        QuadratureSpec::MonteCarlo { samples, seed } => {
            let volume: f64 = bounds.iter().map(|(lo, hi)| hi - lo).product();
            let values: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect();
                    let v = f(&x)?;
                    if !v.is_finite() {
                        return Err(IntegrationError::NonFiniteIntegrand { node: x });
                    }
                    Ok(v)
                })
                .collect::<Result<_, _>>()?;
            let n = samples as f64;
            let mean = pairwise_sum(&values) / n;
            let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = if samples > 1 { pairwise_sum(&sq) / (n - 1.0) } else { 0.0 };
            Ok(IntegrationResult {
                value: volume * mean,
                error_estimate: volume * (var / n).sqrt(),
                evaluations: samples,
            })
        }
    }
}

/// Lebesgue integral of a function over its chart's coordinate box.
pub fn integrate_scalar(f: &ScalarField, spec: &QuadratureSpec) -> Result<IntegrationResult, IntegrationError> {
    let bounds = f.chart().bounds.clone();
    integrate_box(&bounds, spec, |x| Ok(f.eval_at(x)?))
}

/// `orientation · ∫ map^*ω` over the parameter box.
pub fn integrate_form(
    omega: &KForm,
    chain: &ParametrizedChain,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult, IntegrationError> {
    if omega.degree() != chain.k() {
        return Err(IntegrationError::DegreeMismatch {
            form: omega.degree(),
            chain: chain.k(),
        });
    }
    check_same_chart(chain.target(), omega.chart())?;
    let pulled = pullback(&chain.map, omega)?;
    let sign = chain.orientation as f64;
    let mut r = integrate_box(&chain.param_domain, spec, |y| Ok(pulled.jets(y, 0)?[0].value()))?;
    r.value *= sign;
    Ok(r)
}

/// An improper radial integral cut off at `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedResult {
    pub result: IntegrationResult,
    pub r_max: f64,
    pub truncation_error: f64,
    /// True when `truncation_error` comes from a supplied closed-form tail bound.
    pub analytic_bound: bool,
}

/// Evaluates `integral(r_max)`; the truncation error is `tail_bound(r_max)`
/// when available, otherwise `|I(2 r_max) − I(r_max)|`.
pub fn integrate_truncated<F>(
    integral: F,
    r_max: f64,
    tail_bound: Option<&dyn Fn(f64) -> f64>,
) -> Result<TruncatedResult, IntegrationError>
where
    F: Fn(f64) -> Result<IntegrationResult, IntegrationError>,
{
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(IntegrationError::InvalidSpec(format!("R_max = {r_max}")));
    }
    let result = integral(r_max)?;
    let (truncation_error, analytic_bound) = match tail_bound {
        Some(b) => (b(r_max), true),
        None => {
            let doubled = integral(2.0 * r_max)?;
            ((doubled.value - result.value).abs(), false)
        }
    };
    Ok(TruncatedResult {
        result,
        r_max,
        truncation_error,
        analytic_bound,
    })
}
