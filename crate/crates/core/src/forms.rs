//! Chart-based exterior algebra.
//!
//! Every object here is a lazily evaluated function of a chart point. Leaf
//! objects are built either from jet closures (analytic derivatives through
//! [`Jet`] arithmetic) or from plain `f64` closures, in which case
//! derivatives come from central finite differences with step
//! [`fd_step`]. Operations compose those closures, so `ext_d(wedge(a, b))`
//! evaluated at a point asks `a` and `b` for jets one order higher.
//!
//! Coefficients of a `k`-form are stored densely over the strictly
//! increasing multi-indices of the chart coordinates in lexicographic
//! order (see [`IndexBasis`]).

use std::fmt;
use std::sync::Arc;

use crate::chart::{check_same_chart, ChartDomain, Point};
use crate::error::FormError;
use crate::jet::{Jet, MonomialTable};
use crate::multi_index::{binomial, permutations, sort_sign, IndexBasis};

/// Maps a chart point and a derivative order to Taylor jets of the
/// components, expanded in the chart coordinates.
pub type JetSource = dyn Fn(&[f64], usize) -> Result<Vec<Jet>, FormError> + Send + Sync;

/// Central-difference step for first derivatives at coordinate `x`.
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

fn fd_step_second(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

/// Taylor jets of a value-only vector function by central differences.
///
/// Orders above two are not supported for finite-difference sources.
pub fn finite_difference_jets(
    f: &(dyn Fn(&[f64]) -> Vec<f64> + Send + Sync),
    x: &[f64],
    order: usize,
) -> Result<Vec<Jet>, FormError> {
    if order > 2 {
        return Err(FormError::UnsupportedDerivativeOrder { requested: order, max: 2 });
    }
    let n = x.len();
    let table = MonomialTable::get(n, order);
    let f0 = f(x);
    let m = f0.len();
    let mut coeffs = vec![vec![0.0; table.len()]; m];
    for (c, v) in coeffs.iter_mut().zip(&f0) {
        c[0] = *v;
    }
    let shifted = |offsets: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, d) in offsets {
            y[i] += d;
        }
        f(&y)
    };
    if order >= 1 {
        for i in 0..n {
            let h = fd_step(x[i]);
            let plus = shifted(&[(i, h)]);
            let minus = shifted(&[(i, -h)]);
            let mut e = vec![0u8; n];
            e[i] = 1;
            let k = table.position(&e).expect("first-order monomial");
            for r in 0..m {
                coeffs[r][k] = (plus[r] - minus[r]) / (2.0 * h);
            }
        }
    }
    if order >= 2 {
        for i in 0..n {
            for j in i..n {
                let mut e = vec![0u8; n];
                e[i] += 1;
                e[j] += 1;
                let k = table.position(&e).expect("second-order monomial");
                let hi = fd_step_second(x[i]);
                if i == j {
                    let plus = shifted(&[(i, hi)]);
                    let minus = shifted(&[(i, -hi)]);
                    for r in 0..m {
                        // Taylor coefficient is f_ii / 2
                        coeffs[r][k] = (plus[r] - 2.0 * f0[r] + minus[r]) / (hi * hi) / 2.0;
                    }
                } else {
                    let hj = fd_step_second(x[j]);
                    let pp = shifted(&[(i, hi), (j, hj)]);
                    let pm = shifted(&[(i, hi), (j, -hj)]);
                    let mp = shifted(&[(i, -hi), (j, hj)]);
                    let mm = shifted(&[(i, -hi), (j, -hj)]);
                    for r in 0..m {
                        coeffs[r][k] = (pp[r] - pm[r] - mp[r] + mm[r]) / (4.0 * hi * hj);
                    }
                }
            }
        }
    }
    Ok(coeffs
        .into_iter()
        .map(|c| Jet::from_coeffs(&table, c))
        .collect())
}

pub(crate) fn jet_source<F>(expected: usize, f: F) -> Arc<JetSource>
where
    F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
{
    Arc::new(move |x: &[f64], order: usize| {
        let seeds = Jet::seed(x, order);
        let out = f(&seeds);
        if out.len() != expected {
            return Err(FormError::CoefficientCount {
                got: out.len(),
                expected,
            });
        }
        Ok(out)
    })
}

pub(crate) fn value_source<F>(expected: usize, f: F) -> Arc<JetSource>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    let f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> = Arc::new(f);
    Arc::new(move |x: &[f64], order: usize| {
        let out = finite_difference_jets(f.as_ref(), x, order)?;
        if out.len() != expected {
            return Err(FormError::CoefficientCount {
                got: out.len(),
                expected,
            });
        }
        Ok(out)
    })
}

pub(crate) fn check_finite(values: &[f64], coords: &[f64], what: &str) -> Result<(), FormError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FormError::NonFinite {
            what: what.to_string(),
            coords: coords.to_vec(),
        })
    }
}

/// Coefficients of a form at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl FormValue {
    /// Coefficient on the strictly increasing index `index`.
    pub fn get(&self, index: &[usize]) -> f64 {
        IndexBasis::get(self.dim, self.degree)
            .position(index)
            .map(|k| self.coeffs[k])
            .unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// A differential form of fixed degree on one chart.
#[derive(Clone)]
pub struct KForm {
    chart: Arc<ChartDomain>,
    degree: usize,
    source: Arc<JetSource>,
    analytic: bool,
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KForm")
            .field("chart", &self.chart.name)
            .field("degree", &self.degree)
            .field("analytic", &self.analytic)
            .finish()
    }
}

impl KForm {
    fn checked_degree(chart: &Arc<ChartDomain>, degree: usize) -> Result<(), FormError> {
        if degree > chart.dim() {
            Err(FormError::DegreeOverflow {
                degree,
                dim: chart.dim(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn from_source(
        chart: &Arc<ChartDomain>,
        degree: usize,
        source: Arc<JetSource>,
        analytic: bool,
    ) -> KForm {
        KForm {
            chart: chart.clone(),
            degree,
            source,
            analytic,
        }
    }

    /// A form whose coefficients are computed from seeded coordinate jets.
    pub fn from_jets<F>(chart: &Arc<ChartDomain>, degree: usize, f: F) -> Result<KForm, FormError>
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        Self::checked_degree(chart, degree)?;
        Ok(KForm {
            chart: chart.clone(),
            degree,
            source: jet_source(binomial(chart.dim(), degree), f),
            analytic: true,
        })
    }

    /// A form given by coefficient values only; derivatives use finite differences.
    pub fn from_values<F>(chart: &Arc<ChartDomain>, degree: usize, f: F) -> Result<KForm, FormError>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::checked_degree(chart, degree)?;
        Ok(KForm {
            chart: chart.clone(),
            degree,
            source: value_source(binomial(chart.dim(), degree), f),
            analytic: false,
        })
    }

    /// Constant coefficients.
    pub fn constant(chart: &Arc<ChartDomain>, degree: usize, coeffs: Vec<f64>) -> Result<KForm, FormError> {
        Self::checked_degree(chart, degree)?;
        let expected = binomial(chart.dim(), degree);
        if coeffs.len() != expected {
            return Err(FormError::CoefficientCount {
                got: coeffs.len(),
                expected,
            });
        }
        Ok(KForm {
            chart: chart.clone(),
            degree,
            source: Arc::new(move |x: &[f64], order| {
                let table = MonomialTable::get(x.len(), order);
                Ok(coeffs.iter().map(|&c| Jet::constant(&table, c)).collect())
            }),
            analytic: true,
        })
    }

    /// The zero form of any degree. Degrees above the chart dimension give
    /// the structurally zero form with no coefficients.
    pub fn zero(chart: &Arc<ChartDomain>, degree: usize) -> KForm {
        let n = binomial(chart.dim(), degree);
        KForm {
            chart: chart.clone(),
            degree,
            source: Arc::new(move |x: &[f64], order| {
                let table = MonomialTable::get(x.len(), order);
                Ok(vec![Jet::zero(&table); n])
            }),
            analytic: true,
        }
    }

    /// The coordinate differential `dx_i`.
    pub fn differential(chart: &Arc<ChartDomain>, coordinate: usize) -> Result<KForm, FormError> {
        if coordinate >= chart.dim() {
            return Err(FormError::DimensionMismatch(format!(
                "coordinate {coordinate} on a {}-chart",
                chart.dim()
            )));
        }
        let mut coeffs = vec![0.0; chart.dim()];
        coeffs[coordinate] = 1.0;
        KForm::constant(chart, 1, coeffs)
    }

    pub fn chart(&self) -> &Arc<ChartDomain> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Whether every derivative comes from jet arithmetic rather than finite differences.
    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    /// True for forms of degree above the chart dimension.
    pub fn is_structurally_zero(&self) -> bool {
        self.degree > self.dim()
    }

    pub fn basis(&self) -> Arc<IndexBasis> {
        IndexBasis::get(self.dim(), self.degree)
    }

    /// Coefficient jets at `x` up to the given derivative order.
    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>, FormError> {
        (self.source)(x, order)
    }

    pub fn eval(&self, p: &Point) -> Result<FormValue, FormError> {
        check_same_chart(&self.chart, &p.chart)?;
        self.eval_at(&p.coords)
    }

    /// Evaluation at raw coordinates, without the chart check.
    pub fn eval_at(&self, x: &[f64]) -> Result<FormValue, FormError> {
        let coeffs: Vec<f64> = self.jets(x, 0)?.iter().map(Jet::value).collect();
        check_finite(&coeffs, x, "form coefficient")?;
        Ok(FormValue {
            dim: self.dim(),
            degree: self.degree,
            coeffs,
        })
    }

    fn combine(&self, other: &KForm, sign: f64) -> Result<KForm, FormError> {
        check_same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(FormError::DimensionMismatch(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        let (a, b) = (self.source.clone(), other.source.clone());
        Ok(KForm {
            chart: self.chart.clone(),
            degree: self.degree,
            source: Arc::new(move |x: &[f64], order| {
                let ja = a(x, order)?;
                let jb = b(x, order)?;
                Ok(ja
                    .into_iter()
                    .zip(jb)
                    .map(|(p, q)| if sign > 0.0 { p + q } else { p - q })
                    .collect())
            }),
            analytic: self.analytic && other.analytic,
        })
    }

    pub fn add(&self, other: &KForm) -> Result<KForm, FormError> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm, FormError> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, factor: f64) -> KForm {
        let a = self.source.clone();
        KForm {
            chart: self.chart.clone(),
            degree: self.degree,
            source: Arc::new(move |x: &[f64], order| {
                Ok(a(x, order)?
                    .into_iter()
                    .map(|mut j| {
                        j *= factor;
                        j
                    })
                    .collect())
            }),
            analytic: self.analytic,
        }
    }

    /// Pointwise product with a function.
    pub fn mul_function(&self, f: &ScalarField) -> Result<KForm, FormError> {
        wedge(f.as_form(), self)
    }
}

/// A smooth function on a chart (a 0-form).
#[derive(Clone, Debug)]
pub struct ScalarField(KForm);

impl ScalarField {
    pub fn from_jets<F>(chart: &Arc<ChartDomain>, f: F) -> ScalarField
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        ScalarField(KForm::from_jets(chart, 0, move |x| vec![f(x)]).expect("degree 0 always fits"))
    }

    pub fn from_values<F>(chart: &Arc<ChartDomain>, f: F) -> ScalarField
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField(KForm::from_values(chart, 0, move |x| vec![f(x)]).expect("degree 0 always fits"))
    }

    pub fn constant(chart: &Arc<ChartDomain>, value: f64) -> ScalarField {
        ScalarField(KForm::constant(chart, 0, vec![value]).expect("degree 0 always fits"))
    }

    pub fn from_form(form: KForm) -> Result<ScalarField, FormError> {
        if form.degree() != 0 {
            return Err(FormError::DimensionMismatch(format!(
                "expected a 0-form, got degree {}",
                form.degree()
            )));
        }
        Ok(ScalarField(form))
    }

    pub fn chart(&self) -> &Arc<ChartDomain> {
        self.0.chart()
    }

    pub fn as_form(&self) -> &KForm {
        &self.0
    }

    pub fn into_form(self) -> KForm {
        self.0
    }

    pub fn is_analytic(&self) -> bool {
        self.0.is_analytic()
    }

    pub fn eval(&self, p: &Point) -> Result<f64, FormError> {
        Ok(self.0.eval(p)?.coeffs[0])
    }

    pub fn eval_at(&self, x: &[f64]) -> Result<f64, FormError> {
        Ok(self.0.eval_at(x)?.coeffs[0])
    }

    pub fn jet(&self, x: &[f64], order: usize) -> Result<Jet, FormError> {
        Ok(self.0.jets(x, order)?.remove(0))
    }

    /// Gradient at `p`: jet derivatives for analytic fields, central differences otherwise.
    pub fn gradient(&self, p: &Point) -> Result<Vec<f64>, FormError> {
        check_same_chart(self.chart(), &p.chart)?;
        let g = self.jet(&p.coords, 1)?.gradient();
        check_finite(&g, &p.coords, "gradient")?;
        Ok(g)
    }

    /// Largest deviation between the gradient and central differences of the
    /// values over `points`, relative to `max(1, |grad|)`.
    pub fn gradient_consistency(&self, points: &[Point]) -> Result<f64, FormError> {
        let mut worst: f64 = 0.0;
        for p in points {
            let g = self.gradient(p)?;
            for (i, gi) in g.iter().enumerate() {
                let h = fd_step(p.coords[i]);
                let mut plus = p.coords.clone();
                let mut minus = p.coords.clone();
                plus[i] += h;
                minus[i] -= h;
                let fd = (self.eval_at(&plus)? - self.eval_at(&minus)?) / (2.0 * h);
                worst = worst.max((fd - gi).abs() / gi.abs().max(1.0));
            }
        }
        Ok(worst)
    }

    /// Pointwise `h ∘ self` for a function `h` acting on jets.
    pub fn map<F>(&self, h: F) -> ScalarField
    where
        F: Fn(&Jet) -> Jet + Send + Sync + 'static,
    {
        let src = self.0.source.clone();
        ScalarField(KForm {
            chart: self.0.chart.clone(),
            degree: 0,
            source: Arc::new(move |x: &[f64], order| Ok(vec![h(&src(x, order)?[0])])),
            analytic: self.0.analytic,
        })
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField, FormError> {
        Ok(ScalarField(wedge(&self.0, &other.0)?))
    }
}

/// Component functions of a vector field on a chart.
#[derive(Clone)]
pub struct VectorFieldRepr {
    chart: Arc<ChartDomain>,
    source: Arc<JetSource>,
    analytic: bool,
}

impl fmt::Debug for VectorFieldRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldRepr")
            .field("chart", &self.chart.name)
            .field("analytic", &self.analytic)
            .finish()
    }
}

impl VectorFieldRepr {
    pub fn from_jets<F>(chart: &Arc<ChartDomain>, f: F) -> VectorFieldRepr
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        VectorFieldRepr {
            chart: chart.clone(),
            source: jet_source(chart.dim(), f),
            analytic: true,
        }
    }

    pub fn from_values<F>(chart: &Arc<ChartDomain>, f: F) -> VectorFieldRepr
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        VectorFieldRepr {
            chart: chart.clone(),
            source: value_source(chart.dim(), f),
            analytic: false,
        }
    }

    pub fn constant(chart: &Arc<ChartDomain>, components: Vec<f64>) -> Result<VectorFieldRepr, FormError> {
        if components.len() != chart.dim() {
            return Err(FormError::CoefficientCount {
                got: components.len(),
                expected: chart.dim(),
            });
        }
        Ok(VectorFieldRepr {
            chart: chart.clone(),
            source: Arc::new(move |x: &[f64], order| {
                let table = MonomialTable::get(x.len(), order);
                Ok(components.iter().map(|&c| Jet::constant(&table, c)).collect())
            }),
            analytic: true,
        })
    }

    /// The coordinate field `∂/∂x_i`.
    pub fn coordinate(chart: &Arc<ChartDomain>, i: usize) -> Result<VectorFieldRepr, FormError> {
        let mut c = vec![0.0; chart.dim()];
        if i >= c.len() {
            return Err(FormError::DimensionMismatch(format!("coordinate {i}")));
        }
        c[i] = 1.0;
        VectorFieldRepr::constant(chart, c)
    }

    pub fn chart(&self) -> &Arc<ChartDomain> {
        &self.chart
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>, FormError> {
        (self.source)(x, order)
    }

    pub fn eval(&self, p: &Point) -> Result<Vec<f64>, FormError> {
        check_same_chart(&self.chart, &p.chart)?;
        self.eval_at(&p.coords)
    }

    pub fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>, FormError> {
        let v: Vec<f64> = self.jets(x, 0)?.iter().map(Jet::value).collect();
        check_finite(&v, x, "vector field component")?;
        Ok(v)
    }

    pub fn scale(&self, factor: f64) -> VectorFieldRepr {
        let s = self.source.clone();
        VectorFieldRepr {
            chart: self.chart.clone(),
            source: Arc::new(move |x: &[f64], order| {
                Ok(s(x, order)?
                    .into_iter()
                    .map(|mut j| {
                        j *= factor;
                        j
                    })
                    .collect())
            }),
            analytic: self.analytic,
        }
    }

    /// Pointwise product `f X`.
    pub fn mul_function(&self, f: &ScalarField) -> Result<VectorFieldRepr, FormError> {
        check_same_chart(&self.chart, f.chart())?;
        let s = self.source.clone();
        let g = f.as_form().source.clone();
        Ok(VectorFieldRepr {
            chart: self.chart.clone(),
            source: Arc::new(move |x: &[f64], order| {
                let fj = g(x, order)?.remove(0);
                Ok(s(x, order)?.into_iter().map(|j| &j * &fj).collect())
            }),
            analytic: self.analytic && f.is_analytic(),
        })
    }

    pub fn add(&self, other: &VectorFieldRepr) -> Result<VectorFieldRepr, FormError> {
        check_same_chart(&self.chart, &other.chart)?;
        let (a, b) = (self.source.clone(), other.source.clone());
        Ok(VectorFieldRepr {
            chart: self.chart.clone(),
            source: Arc::new(move |x: &[f64], order| {
                Ok(a(x, order)?.into_iter().zip(b(x, order)?).map(|(p, q)| p + q).collect())
            }),
            analytic: self.analytic && other.analytic,
        })
    }

    /// The directional derivative `X(f)`.
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField, FormError> {
        ScalarField::from_form(lie_derivative(self, f.as_form())?)
    }
}

/// A smooth map between charts.
#[derive(Clone)]
pub struct SmoothMap {
    source: Arc<ChartDomain>,
    target: Arc<ChartDomain>,
    components: Arc<JetSource>,
    analytic: bool,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("source", &self.source.name)
            .field("target", &self.target.name)
            .field("analytic", &self.analytic)
            .finish()
    }
}

impl SmoothMap {
    pub fn from_jets<F>(source: &Arc<ChartDomain>, target: &Arc<ChartDomain>, f: F) -> SmoothMap
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        SmoothMap {
            source: source.clone(),
            target: target.clone(),
            components: jet_source(target.dim(), f),
            analytic: true,
        }
    }

    pub fn from_values<F>(source: &Arc<ChartDomain>, target: &Arc<ChartDomain>, f: F) -> SmoothMap
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        SmoothMap {
            source: source.clone(),
            target: target.clone(),
            components: value_source(target.dim(), f),
            analytic: false,
        }
    }

    pub fn identity(chart: &Arc<ChartDomain>) -> SmoothMap {
        SmoothMap::from_jets(chart, chart, |x| x.to_vec())
    }

    pub fn source(&self) -> &Arc<ChartDomain> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ChartDomain> {
        &self.target
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn jets(&self, y: &[f64], order: usize) -> Result<Vec<Jet>, FormError> {
        (self.components)(y, order)
    }

    pub fn eval_at(&self, y: &[f64]) -> Result<Vec<f64>, FormError> {
        let v: Vec<f64> = self.jets(y, 0)?.iter().map(Jet::value).collect();
        check_finite(&v, y, "map component")?;
        Ok(v)
    }

    pub fn eval(&self, p: &Point) -> Result<Vec<f64>, FormError> {
        check_same_chart(&self.source, &p.chart)?;
        self.eval_at(&p.coords)
    }

    /// Jacobian rows `∂F_i/∂y_j`.
    pub fn jacobian(&self, p: &Point) -> Result<Vec<Vec<f64>>, FormError> {
        check_same_chart(&self.source, &p.chart)?;
        let jets = self.jets(&p.coords, 1)?;
        let rows: Vec<Vec<f64>> = jets.iter().map(Jet::gradient).collect();
        for r in &rows {
            check_finite(r, &p.coords, "Jacobian entry")?;
        }
        Ok(rows)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap, FormError> {
        check_same_chart(inner.target(), &self.source)?;
        let outer = self.components.clone();
        let inner_src = inner.components.clone();
        Ok(SmoothMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            components: Arc::new(move |y: &[f64], order| {
                let iy = inner_src(y, order)?;
                let x0: Vec<f64> = iy.iter().map(Jet::value).collect();
                check_finite(&x0, y, "map component")?;
                let shifted: Vec<Jet> = iy.iter().map(|j| j - j.value()).collect();
                Ok(outer(&x0, order)?.iter().map(|j| j.compose(&shifted)).collect())
            }),
            analytic: self.analytic && inner.analytic,
        })
    }
}

// ---------------------------------------------------------------------------
// Operations

/// Exterior product with the shuffle-sign convention.
pub fn wedge(omega: &KForm, eta: &KForm) -> Result<KForm, FormError> {
    check_same_chart(&omega.chart, &eta.chart)?;
    let dim = omega.dim();
    let (k, l) = (omega.degree, eta.degree);
    if k + l > dim {
        return Err(FormError::DegreeOverflow { degree: k + l, dim });
    }
    let left = IndexBasis::get(dim, k);
    let right = IndexBasis::get(dim, l);
    let out = IndexBasis::get(dim, k + l);
    let mut terms: Vec<(usize, usize, usize, f64)> = Vec::new();
    for (i, ii) in left.indices.iter().enumerate() {
        for (j, jj) in right.indices.iter().enumerate() {
            let concat: Vec<usize> = ii.iter().chain(jj).copied().collect();
            if let Some((sign, sorted)) = sort_sign(&concat) {
                let kk = out.position(&sorted).expect("sorted index is in basis");
                terms.push((i, j, kk, sign));
            }
        }
    }
    let n_out = out.len();
    let (a, b) = (omega.source.clone(), eta.source.clone());
    Ok(KForm {
        chart: omega.chart.clone(),
        degree: k + l,
        source: Arc::new(move |x: &[f64], order| {
            let ja = a(x, order)?;
            let jb = b(x, order)?;
            let table = MonomialTable::get(x.len(), order);
            let mut acc = vec![Jet::zero(&table); n_out];
            for &(i, j, kk, sign) in &terms {
                let prod = &ja[i] * &jb[j];
                if sign > 0.0 {
                    acc[kk] += &prod;
                } else {
                    acc[kk] -= &prod;
                }
            }
            Ok(acc)
        }),
        analytic: omega.analytic && eta.analytic,
    })
}

/// Exterior derivative. A top-degree input yields the structurally zero
/// form of degree `dim + 1` (check [`KForm::is_structurally_zero`]).
pub fn ext_d(omega: &KForm) -> Result<KForm, FormError> {
    let dim = omega.dim();
    let k = omega.degree;
    if k >= dim {
        return Ok(KForm::zero(&omega.chart, k + 1));
    }
    let src = IndexBasis::get(dim, k);
    let out = IndexBasis::get(dim, k + 1);
    let mut terms: Vec<(usize, usize, usize, f64)> = Vec::new();
    for (jdx, jj) in out.indices.iter().enumerate() {
        for (m, &var) in jj.iter().enumerate() {
            let mut rest = jj.clone();
            rest.remove(m);
            let s = src.position(&rest).expect("face index is in basis");
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((s, var, jdx, sign));
        }
    }
    let n_out = out.len();
    let a = omega.source.clone();
    Ok(KForm {
        chart: omega.chart.clone(),
        degree: k + 1,
        source: Arc::new(move |x: &[f64], order| {
            let ja = a(x, order + 1)?;
            let table = MonomialTable::get(x.len(), order);
            let mut acc = vec![Jet::zero(&table); n_out];
            for &(s, var, jdx, sign) in &terms {
                let d = ja[s].partial(var);
                if sign > 0.0 {
                    acc[jdx] += &d;
                } else {
                    acc[jdx] -= &d;
                }
            }
            Ok(acc)
        }),
        analytic: omega.analytic,
    })
}

/// Contraction `i_X ω` on the first slot.
pub fn interior(field: &VectorFieldRepr, omega: &KForm) -> Result<KForm, FormError> {
    check_same_chart(&field.chart, &omega.chart)?;
    let k = omega.degree;
    if k == 0 {
        return Err(FormError::InteriorOfFunction);
    }
    let dim = omega.dim();
    if k > dim {
        return Ok(KForm::zero(&omega.chart, k - 1));
    }
    let src = IndexBasis::get(dim, k);
    let out = IndexBasis::get(dim, k - 1);
    let mut terms: Vec<(usize, usize, usize, f64)> = Vec::new();
    for (s, ii) in src.indices.iter().enumerate() {
        for (pos, &var) in ii.iter().enumerate() {
            let mut rest = ii.clone();
            rest.remove(pos);
            let o = out.position(&rest).expect("face index is in basis");
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((s, var, o, sign));
        }
    }
    let n_out = out.len();
    let (xs, a) = (field.source.clone(), omega.source.clone());
    Ok(KForm {
        chart: omega.chart.clone(),
        degree: k - 1,
        source: Arc::new(move |x: &[f64], order| {
            let jx = xs(x, order)?;
            let ja = a(x, order)?;
            let table = MonomialTable::get(x.len(), order);
            let mut acc = vec![Jet::zero(&table); n_out];
            for &(s, var, o, sign) in &terms {
                let prod = &jx[var] * &ja[s];
                if sign > 0.0 {
                    acc[o] += &prod;
                } else {
                    acc[o] -= &prod;
                }
            }
            Ok(acc)
        }),
        analytic: field.analytic && omega.analytic,
    })
}

/// Cartan's formula `L_X ω = i_X dω + d(i_X ω)`.
pub fn lie_derivative(field: &VectorFieldRepr, omega: &KForm) -> Result<KForm, FormError> {
    check_same_chart(&field.chart, &omega.chart)?;
    if omega.degree > omega.dim() {
        return Ok(KForm::zero(&omega.chart, omega.degree));
    }
    let first = interior(field, &ext_d(omega)?)?;
    if omega.degree == 0 {
        return Ok(first);
    }
    first.add(&ext_d(&interior(field, omega)?)?)
}

fn jet_determinant(m: &[Vec<Jet>], table: &Arc<MonomialTable>) -> Jet {
    let n = m.len();
    if n == 0 {
        return Jet::constant(table, 1.0);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Jet::zero(table);
    for (sign, perm) in permutations(n).iter() {
        let mut term = m[0][perm[0]].clone();
        for (r, &c) in perm.iter().enumerate().skip(1) {
            term = &term * &m[r][c];
        }
        if *sign > 0.0 {
            acc += &term;
        } else {
            acc -= &term;
        }
    }
    acc
}

/// Pullback `F^*ω` along a smooth map.
pub fn pullback(map: &SmoothMap, omega: &KForm) -> Result<KForm, FormError> {
    check_same_chart(&map.target, &omega.chart)?;
    let k = omega.degree;
    let src_dim = map.source.dim();
    if k > src_dim {
        return Ok(KForm::zero(&map.source, k));
    }
    let tgt_basis = IndexBasis::get(map.target.dim(), k);
    let src_basis = IndexBasis::get(src_dim, k);
    let tgt_idx = tgt_basis.indices.clone();
    let src_idx = src_basis.indices.clone();
    let (f, a) = (map.components.clone(), omega.source.clone());
    Ok(KForm {
        chart: map.source.clone(),
        degree: k,
        source: Arc::new(move |y: &[f64], order| {
            let fy = f(y, order + 1)?;
            let x0: Vec<f64> = fy.iter().map(Jet::value).collect();
            check_finite(&x0, y, "map component")?;
            let shifted: Vec<Jet> = fy.iter().map(|j| j.truncate(order) - j.value()).collect();
            let coeffs_at_x: Vec<Jet> = a(&x0, order)?;
            let composed: Vec<Jet> = coeffs_at_x.iter().map(|c| c.compose(&shifted)).collect();
            let table = MonomialTable::get(y.len(), order);
            if k == 0 {
                return Ok(composed);
            }
            let jac: Vec<Vec<Jet>> = fy
                .iter()
                .map(|fi| (0..y.len()).map(|j| fi.partial(j)).collect())
                .collect();
            for row in &jac {
                let vals: Vec<f64> = row.iter().map(Jet::value).collect();
                check_finite(&vals, y, "Jacobian entry")?;
            }
            let mut out = Vec::with_capacity(src_idx.len());
            for jj in &src_idx {
                let mut acc = Jet::zero(&table);
                for (ci, ii) in tgt_idx.iter().enumerate() {
                    if composed[ci].max_abs_coeff() == 0.0 {
                        continue;
                    }
                    let minor: Vec<Vec<Jet>> = ii
                        .iter()
                        .map(|&r| jj.iter().map(|&c| jac[r][c].clone()).collect())
                        .collect();
                    let det = jet_determinant(&minor, &table);
                    acc += &(&composed[ci] * &det);
                }
                out.push(acc);
            }
            Ok(out)
        }),
        analytic: map.analytic && omega.analytic,
    })
}
