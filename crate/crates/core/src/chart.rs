//! Coordinate charts, points, and reproducible interior sampling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::FormError;

/// Distance kept from every chart boundary when sampling interior points.
pub const SAMPLING_MARGIN: f64 = 1e-6;

/// A single coordinate chart: named coordinates ranging over a closed box.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    pub name: String,
    pub coordinate_names: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    /// Measure-zero singular loci of the coordinates, for documentation only.
    pub excluded_sets: String,
}

impl ChartDomain {
    pub fn new(
        name: impl Into<String>,
        coordinate_names: &[&str],
        bounds: &[(f64, f64)],
        excluded_sets: impl Into<String>,
    ) -> Result<Arc<ChartDomain>, FormError> {
        let name = name.into();
        if coordinate_names.is_empty() || coordinate_names.len() != bounds.len() {
            return Err(FormError::InvalidChart(format!(
                "{name}: {} coordinate names for {} intervals",
                coordinate_names.len(),
                bounds.len()
            )));
        }
        for (c, &(lo, hi)) in coordinate_names.iter().zip(bounds) {
            if !(lo < hi) {
                return Err(FormError::InvalidChart(format!(
                    "{name}: interval for {c} is [{lo}, {hi}]"
                )));
            }
        }
        Ok(Arc::new(ChartDomain {
            name,
            coordinate_names: coordinate_names.iter().map(|s| s.to_string()).collect(),
            bounds: bounds.to_vec(),
            excluded_sets: excluded_sets.into(),
        }))
    }

    /// The box `[lo_i, hi_i]` with generated coordinate names `s0, s1, ...`.
    pub fn parameter_box(name: &str, bounds: &[(f64, f64)]) -> Result<Arc<ChartDomain>, FormError> {
        let names: Vec<String> = (0..bounds.len()).map(|i| format!("s{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        ChartDomain::new(name, &refs, bounds, "")
    }

    pub fn dim(&self) -> usize {
        self.coordinate_names.len()
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim()
            && coords
                .iter()
                .zip(&self.bounds)
                .all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }

    pub fn coordinate_index(&self, name: &str) -> Option<usize> {
        self.coordinate_names.iter().position(|c| c == name)
    }

    /// `count` uniformly distributed points at least `margin` inside every bound.
    pub fn sample_points(self: &Arc<Self>, count: usize, seed: u64, margin: f64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let coords = self
                    .bounds
                    .iter()
                    .map(|&(lo, hi)| {
                        let m = margin.min(0.25 * (hi - lo));
                        rng.random_range((lo + m)..(hi - m))
                    })
                    .collect();
                Point {
                    chart: self.clone(),
                    coords,
                }
            })
            .collect()
    }
}

pub(crate) fn same_chart(a: &Arc<ChartDomain>, b: &Arc<ChartDomain>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_same_chart(a: &Arc<ChartDomain>, b: &Arc<ChartDomain>) -> Result<(), FormError> {
    if same_chart(a, b) {
        Ok(())
    } else {
        Err(FormError::ChartMismatch {
            left: a.name.clone(),
            right: b.name.clone(),
        })
    }
}

/// A point of a chart.
#[derive(Debug, Clone)]
pub struct Point {
    pub chart: Arc<ChartDomain>,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(chart: &Arc<ChartDomain>, coords: Vec<f64>) -> Result<Point, FormError> {
        if !chart.contains(&coords) {
            return Err(FormError::PointOutsideChart {
                chart: chart.name.clone(),
                coords,
            });
        }
        Ok(Point {
            chart: chart.clone(),
            coords,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}
