//! Metrics on a chart, Levi-Civita connection, and the unit-field identity
//! `L_X α = g(∇_X X, ·)` for `α = g(X, ·)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::{check_same_chart, ChartDomain, Point};
use crate::error::{FormError, MetricError};
use crate::forms::{check_finite, jet_source, lie_derivative, value_source, JetSource, KForm, SmoothMap, VectorFieldRepr};
use crate::jet::{Jet, MonomialTable};

/// Largest accepted condition number before a metric is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Tolerance on `|X|_g - 1` for unit-field preconditions.
pub const UNIT_LENGTH_TOL: f64 = 1e-6;

/// Christoffel symbols `gamma[k][i][j] = Γ^k_{ij}`.
pub type Christoffel = Vec<Vec<Vec<f64>>>;

/// A symmetric bilinear form field, entries row-major.
#[derive(Clone)]
pub struct MetricField {
    chart: Arc<ChartDomain>,
    source: Arc<JetSource>,
    analytic: bool,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("chart", &self.chart.name)
            .field("analytic", &self.analytic)
            .finish()
    }
}

impl MetricField {
    pub fn from_jets<F>(chart: &Arc<ChartDomain>, f: F) -> MetricField
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        let n = chart.dim();
        MetricField {
            chart: chart.clone(),
            source: jet_source(n * n, f),
            analytic: true,
        }
    }

    /// Entries from values; derivatives by central differences.
    pub fn from_values<F>(chart: &Arc<ChartDomain>, f: F) -> MetricField
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let n = chart.dim();
        MetricField {
            chart: chart.clone(),
            source: value_source(n * n, f),
            analytic: false,
        }
    }

    pub fn euclidean(chart: &Arc<ChartDomain>) -> MetricField {
        let n = chart.dim();
        MetricField::from_jets(chart, move |x| {
            let t = x[0].table().clone();
            (0..n * n)
                .map(|k| Jet::constant(&t, if k / n == k % n { 1.0 } else { 0.0 }))
                .collect()
        })
    }

    pub fn chart(&self) -> &Arc<ChartDomain> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>, FormError> {
        (self.source)(x, order)
    }

    pub fn matrix_at(&self, x: &[f64]) -> Result<DMatrix<f64>, FormError> {
        let n = self.dim();
        let v: Vec<f64> = self.jets(x, 0)?.iter().map(Jet::value).collect();
        check_finite(&v, x, "metric entry")?;
        Ok(DMatrix::from_row_slice(n, n, &v))
    }

    pub fn matrix(&self, p: &Point) -> Result<DMatrix<f64>, FormError> {
        check_same_chart(&self.chart, &p.chart)?;
        self.matrix_at(&p.coords)
    }

    /// `g(X, X)^{1/2}` at `p`.
    pub fn norm(&self, x: &VectorFieldRepr, p: &Point) -> Result<f64, MetricError> {
        check_same_chart(&self.chart, x.chart())?;
        let g = self.matrix(p)?;
        let v = nalgebra::DVector::from_vec(x.eval(p)?);
        Ok((v.dot(&(&g * &v))).sqrt())
    }

    /// Smallest eigenvalue of `g` and symmetry defect over `points`.
    pub fn definiteness(&self, points: &[Point]) -> Result<(f64, f64), MetricError> {
        let mut min_eig = f64::INFINITY;
        let mut asym: f64 = 0.0;
        for p in points {
            let g = self.matrix(p)?;
            asym = asym.max((&g - g.transpose()).amax());
            let sym = (&g + g.transpose()) * 0.5;
            min_eig = min_eig.min(sym.symmetric_eigenvalues().min());
        }
        Ok((min_eig, asym))
    }
}

fn inverse(g: &DMatrix<f64>, coords: &[f64]) -> Result<DMatrix<f64>, MetricError> {
    let sv = g.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(MetricError::Singular {
            coords: coords.to_vec(),
            condition,
        });
    }
    g.clone().lu().try_inverse().ok_or(MetricError::Singular {
        coords: coords.to_vec(),
        condition,
    })
}

/// The 1-form `g(X, ·)`.
pub fn flat(g: &MetricField, x: &VectorFieldRepr) -> Result<KForm, FormError> {
    check_same_chart(&g.chart, x.chart())?;
    let n = g.dim();
    let gs = g.source.clone();
    let xs = x.clone();
    let source: Arc<JetSource> = Arc::new(move |y: &[f64], order| {
        let gj = gs(y, order)?;
        let xj = xs.jets(y, order)?;
        let table = MonomialTable::get(y.len(), order);
        Ok((0..n)
            .map(|i| {
                let mut acc = Jet::zero(&table);
                for j in 0..n {
                    acc += &(&gj[i * n + j] * &xj[j]);
                }
                acc
            })
            .collect())
    });
    Ok(KForm::from_source(&g.chart, 1, source, g.analytic && x.is_analytic()))
}

/// `F^*g = Jᵀ g(F) J`. A rank-deficient Jacobian is not an error here; the
/// result is then only semi-definite (see [`MetricField::definiteness`]).
pub fn pullback_metric(map: &SmoothMap, g: &MetricField) -> Result<MetricField, FormError> {
    check_same_chart(map.target(), &g.chart)?;
    let m = g.dim();
    let n = map.source().dim();
    let gs = g.source.clone();
    let fm = map.clone();
    let source: Arc<JetSource> = Arc::new(move |y: &[f64], order| {
        let fy = fm.jets(y, order + 1)?;
        let x0: Vec<f64> = fy.iter().map(Jet::value).collect();
        check_finite(&x0, y, "map component")?;
        let shifted: Vec<Jet> = fy.iter().map(|j| j.truncate(order) - j.value()).collect();
        let gx: Vec<Jet> = gs(&x0, order)?.iter().map(|c| c.compose(&shifted)).collect();
        let jac: Vec<Vec<Jet>> = fy.iter().map(|f| (0..n).map(|j| f.partial(j)).collect()).collect();
        let table = MonomialTable::get(y.len(), order);
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Jet::zero(&table);
                for i in 0..m {
                    for j in 0..m {
                        acc += &(&(&jac[i][a] * &gx[i * m + j]) * &jac[j][b]);
                    }
                }
                out.push(acc);
            }
        }
        Ok(out)
    });
    Ok(MetricField {
        chart: map.source().clone(),
        source,
        analytic: map.is_analytic() && g.analytic,
    })
}

/// Levi-Civita symbols from first derivatives of `g` (jets when analytic,
/// central differences with step `fd_step` otherwise).
pub fn christoffel(g: &MetricField, p: &Point) -> Result<Christoffel, MetricError> {
    check_same_chart(&g.chart, &p.chart)?;
    let n = g.dim();
    let jets = g.jets(&p.coords, 1)?;
    let values: Vec<f64> = jets.iter().map(Jet::value).collect();
    check_finite(&values, &p.coords, "metric entry")?;
    let ginv = inverse(&DMatrix::from_row_slice(n, n, &values), &p.coords)?;
    // dg[l][i][j] = ∂_l g_ij
    let grads: Vec<Vec<f64>> = jets.iter().map(Jet::gradient).collect();
    for gr in &grads {
        check_finite(gr, &p.coords, "metric derivative")?;
    }
    let dg = |l: usize, i: usize, j: usize| grads[i * n + j][l];
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(k, l)] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                }
                gamma[k][i][j] = 0.5 * s;
                gamma[k][j][i] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// `∇_X X` at `p`.
pub fn cov_accel(g: &MetricField, x: &VectorFieldRepr, p: &Point) -> Result<Vec<f64>, MetricError> {
    check_same_chart(&g.chart, x.chart())?;
    let n = g.dim();
    let gamma = christoffel(g, p)?;
    let xj = x.jets(&p.coords, 1)?;
    let xv: Vec<f64> = xj.iter().map(Jet::value).collect();
    check_finite(&xv, &p.coords, "vector field component")?;
    let mut out = vec![0.0; n];
    for k in 0..n {
        let grad = xj[k].gradient();
        let mut s: f64 = (0..n).map(|i| xv[i] * grad[i]).sum();
        for i in 0..n {
            for j in 0..n {
                s += gamma[k][i][j] * xv[i] * xv[j];
            }
        }
        out[k] = s;
    }
    Ok(out)
}

/// Max over samples and coordinate directions of `|(L_X α − g(∇_X X, ·))(∂_i)|`
/// with `α = flat(g, X)`. Requires `|X|_g = 1` at every sample.
pub fn wadsley_residual(g: &MetricField, x: &VectorFieldRepr, samples: &[Point]) -> Result<f64, MetricError> {
    let alpha = flat(g, x)?;
    let lie = lie_derivative(x, &alpha)?;
    let mut worst: f64 = 0.0;
    for p in samples {
        let len = g.norm(x, p)?;
        if (len - 1.0).abs() > UNIT_LENGTH_TOL {
            return Err(MetricError::NotUnitLength {
                coords: p.coords.clone(),
                length: len,
            });
        }
        let l = lie.eval(p)?.coeffs;
        let acc = nalgebra::DVector::from_vec(cov_accel(g, x, p)?);
        let lowered = g.matrix(p)? * acc;
        for i in 0..l.len() {
            worst = worst.max((l[i] - lowered[i]).abs());
        }
    }
    Ok(worst)
}

/// Max over points of `|∂_i g_jk − Σ_l (Γ^l_ij g_lk + Γ^l_ik g_jl)|`.
pub fn metric_compatibility_defect(g: &MetricField, points: &[Point]) -> Result<f64, MetricError> {
    let n = g.dim();
    let mut worst: f64 = 0.0;
    for p in points {
        let gamma = christoffel(g, p)?;
        let jets = g.jets(&p.coords, 1)?;
        let m = g.matrix(p)?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d = jets[j * n + k].gradient()[i];
                    let s: f64 = (0..n).map(|l| gamma[l][i][j] * m[(l, k)] + gamma[l][i][k] * m[(j, l)]).sum();
                    worst = worst.max((d - s).abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn polar() -> (Arc<ChartDomain>, MetricField) {
        let c = ChartDomain::new("polar", &["r", "phi"], &[(0.0, 2.0), (0.0, 2.0 * PI)], "r = 0").unwrap();
        let g = MetricField::from_jets(&c, |x| {
            let t = x[0].table().clone();
            vec![Jet::constant(&t, 1.0), Jet::zero(&t), Jet::zero(&t), &x[0] * &x[0]]
        });
        (c, g)
    }

    #[test]
    fn euclidean_flat_and_christoffel() {
        let c = ChartDomain::new("e2", &["x", "y"], &[(-1.0, 1.0); 2], "").unwrap();
        let g = MetricField::euclidean(&c);
        let dx = flat(&g, &VectorFieldRepr::coordinate(&c, 0).unwrap()).unwrap();
        let p = Point::new(&c, vec![0.3, 0.1]).unwrap();
        assert_eq!(dx.eval(&p).unwrap().coeffs, vec![1.0, 0.0]);
        let gamma = christoffel(&g, &p).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|v| *v == 0.0));
        let x = VectorFieldRepr::constant(&c, vec![0.6, 0.8]).unwrap();
        assert_eq!(cov_accel(&g, &x, &p).unwrap(), vec![0.0, 0.0]);
        assert!(wadsley_residual(&g, &VectorFieldRepr::coordinate(&c, 0).unwrap(), &[p]).unwrap() < 1e-15);
    }

    #[test]
    fn polar_christoffel_symbols() {
        let (c, g) = polar();
        let p = Point::new(&c, vec![1.3, 0.4]).unwrap();
        let gamma = christoffel(&g, &p).unwrap();
        assert_abs_diff_eq!(gamma[0][1][1], -1.3, epsilon = 1e-14);
        assert_abs_diff_eq!(gamma[1][0][1], 1.0 / 1.3, epsilon = 1e-14);
        assert_eq!(gamma[1][0][1], gamma[1][1][0]);
    }

    #[test]
    fn sphere_christoffel_by_finite_differences() {
        let c = ChartDomain::new("s2", &["theta", "phi"], &[(0.0, PI), (0.0, 2.0 * PI)], "theta = 0, pi").unwrap();
        let g = MetricField::from_values(&c, |x| vec![1.0, 0.0, 0.0, x[0].sin().powi(2)]);
        let p = Point::new(&c, vec![0.7, 1.0]).unwrap();
        let gamma = christoffel(&g, &p).unwrap();
        assert_abs_diff_eq!(gamma[0][1][1], -(0.7f64).sin() * (0.7f64).cos(), epsilon = 1e-9);
        let defect = metric_compatibility_defect(&g, &c.sample_points(10, 3, 1e-3)).unwrap();
        assert!(defect < 1e-8, "{defect}");
    }

    #[test]
    fn singular_metric_is_refused() {
        let c = ChartDomain::new("e2", &["x", "y"], &[(-1.0, 1.0); 2], "").unwrap();
        let g = MetricField::from_values(&c, |_| vec![1.0, 1.0, 1.0, 1.0]);
        let p = Point::new(&c, vec![0.0, 0.0]).unwrap();
        assert!(matches!(christoffel(&g, &p), Err(MetricError::Singular { .. })));
    }

    #[test]
    fn non_unit_field_is_rejected() {
        let (c, g) = polar();
        let p = Point::new(&c, vec![1.0, 0.0]).unwrap();
        let x = VectorFieldRepr::constant(&c, vec![2.0, 0.0]).unwrap();
        assert!(matches!(wadsley_residual(&g, &x, &[p]), Err(MetricError::NotUnitLength { .. })));
    }

    #[test]
    fn pullback_of_euclidean_to_polar() {
        let (polar_chart, g_polar) = polar();
        let plane = ChartDomain::new("e2", &["x", "y"], &[(-3.0, 3.0); 2], "").unwrap();
        let f = SmoothMap::from_jets(&polar_chart, &plane, |x| vec![&x[0] * x[1].cos(), &x[0] * x[1].sin()]);
        let pulled = pullback_metric(&f, &MetricField::euclidean(&plane)).unwrap();
        for p in polar_chart.sample_points(10, 2, 1e-6) {
            let diff = pulled.matrix(&p).unwrap() - g_polar.matrix(&p).unwrap();
            assert!(diff.amax() < 1e-14);
        }
        let id = pullback_metric(&SmoothMap::identity(&polar_chart), &g_polar).unwrap();
        let p = Point::new(&polar_chart, vec![0.5, 0.5]).unwrap();
        assert_eq!(id.matrix(&p).unwrap(), g_polar.matrix(&p).unwrap());
    }

    #[test]
    fn radial_field_is_geodesic_in_polar_coordinates() {
        let (c, g) = polar();
        let x = VectorFieldRepr::coordinate(&c, 0).unwrap();
        let pts = c.sample_points(20, 4, 0.1);
        for p in &pts {
            let a = cov_accel(&g, &x, p).unwrap();
            assert!(a.iter().all(|v| v.abs() < 1e-14));
        }
        assert!(wadsley_residual(&g, &x, &pts).unwrap() < 1e-14);
    }
}
