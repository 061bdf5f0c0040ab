//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients `D^a f(p) / a!` of a function of
//! `nvars` variables for every multi-index `a` with `|a| <= order`.
//! Arithmetic on jets is exact up to the truncation order, so composing
//! coefficient functions out of jets yields analytic derivatives without
//! finite-difference noise.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial bookkeeping shared by every jet with the same `(nvars, order)`.
#[derive(Debug)]
pub struct MonomialTable {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    degree: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
}

impl MonomialTable {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        for deg in 0..=order {
            let mut current = vec![0u8; nvars];
            push_compositions(&mut exps, &mut current, 0, deg);
        }
        let degree: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut products = Vec::new();
        for i in 0..exps.len() {
            for j in 0..exps.len() {
                if degree[i] + degree[j] > order {
                    continue;
                }
                let sum: Vec<u8> = exps[i].iter().zip(&exps[j]).map(|(a, b)| a + b).collect();
                let k = index[&sum];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        MonomialTable {
            nvars,
            order,
            exps,
            degree,
            index,
            products,
        }
    }

    /// Shared table for `(nvars, order)`.
    pub fn get(nvars: usize, order: usize) -> Arc<MonomialTable> {
        static TABLES: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialTable>>>> =
            OnceLock::new();
        let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = tables.lock().expect("monomial table cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(MonomialTable::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, k: usize) -> &[u8] {
        &self.exps[k]
    }

    pub fn position(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

// Exponent vectors of total degree `remaining` for positions `pos..`, in
// lexicographically decreasing order so `x_0` comes before `x_1`.
fn push_compositions(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 >= current.len() {
        if let Some(last) = current.last_mut() {
            *last = remaining as u8;
            out.push(current.clone());
            *current.last_mut().unwrap() = 0;
        } else if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u8;
        push_compositions(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// Truncated Taylor expansion of a scalar function around a point.
#[derive(Clone)]
pub struct Jet {
    table: Arc<MonomialTable>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.table.nvars)
            .field("order", &self.table.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(table: &Arc<MonomialTable>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; table.len()];
        coeffs[0] = value;
        Jet {
            table: table.clone(),
            coeffs,
        }
    }

    pub fn zero(table: &Arc<MonomialTable>) -> Jet {
        Jet::constant(table, 0.0)
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(table: &Arc<MonomialTable>, var: usize, value: f64) -> Jet {
        let mut jet = Jet::constant(table, value);
        if table.order > 0 {
            let mut e = vec![0u8; table.nvars];
            e[var] = 1;
            jet.coeffs[table.index[&e]] = 1.0;
        }
        jet
    }

    /// Seeds the coordinate functions of `point` as jets of the given order.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        let table = MonomialTable::get(point.len(), order);
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(&table, i, x))
            .collect()
    }

    /// Builds a jet directly from Taylor coefficients in table order.
    pub fn from_coeffs(table: &Arc<MonomialTable>, coeffs: Vec<f64>) -> Jet {
        assert_eq!(coeffs.len(), table.len(), "coefficient count mismatch");
        Jet {
            table: table.clone(),
            coeffs,
        }
    }

    pub fn table(&self) -> &Arc<MonomialTable> {
        &self.table
    }

    pub fn nvars(&self) -> usize {
        self.table.nvars
    }

    pub fn order(&self) -> usize {
        self.table.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Partial derivative `D^a f` at the expansion point.
    pub fn derivative(&self, exps: &[u8]) -> f64 {
        match self.table.position(exps) {
            Some(k) => {
                let factorial: f64 = exps.iter().map(|&e| factorial(e as usize)).product();
                self.coeffs[k] * factorial
            }
            None => 0.0,
        }
    }

    /// First partial derivatives at the expansion point.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars())
            .map(|i| {
                if self.order() == 0 {
                    return 0.0;
                }
                let mut e = vec![0u8; self.nvars()];
                e[i] = 1;
                self.coeffs[self.table.index[&e]]
            })
            .collect()
    }

    /// The jet of `∂f/∂x_var`, one order lower.
    ///
    /// Panics if the jet has order zero.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order() > 0, "cannot differentiate an order-0 jet");
        let lower = MonomialTable::get(self.nvars(), self.order() - 1);
        let mut coeffs = vec![0.0; lower.len()];
        let mut e = vec![0u8; self.nvars()];
        for (k, exps) in lower.exps.iter().enumerate() {
            e.copy_from_slice(exps);
            e[var] += 1;
            let src = self.table.index[&e];
            coeffs[k] = self.coeffs[src] * e[var] as f64;
        }
        Jet {
            table: lower,
            coeffs,
        }
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let lower = MonomialTable::get(self.nvars(), order);
        let coeffs = (0..lower.len()).map(|k| self.coeffs[k]).collect();
        Jet {
            table: lower,
            coeffs,
        }
    }

    fn same_shape(&self, other: &Jet) {
        assert!(
            self.table.nvars == other.table.nvars && self.table.order == other.table.order,
            "jet shape mismatch: ({}, {}) vs ({}, {})",
            self.table.nvars,
            self.table.order,
            other.table.nvars,
            other.table.order
        );
    }

    fn product(&self, other: &Jet) -> Jet {
        self.same_shape(other);
        let mut coeffs = vec![0.0; self.table.len()];
        if self.order() == 0 {
            coeffs[0] = self.coeffs[0] * other.coeffs[0];
        } else {
            for &(i, j, k) in &self.table.products {
                coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
            }
        }
        Jet {
            table: self.table.clone(),
            coeffs,
        }
    }

    /// Evaluates `sum_k taylor[k] * (self - self.value())^k`.
    pub fn compose_univariate(&self, taylor: &[f64]) -> Jet {
        let order = self.order();
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let top = order.min(taylor.len().saturating_sub(1));
        let mut result = Jet::constant(&self.table, taylor[top]);
        for k in (0..top).rev() {
            result = result.product(&h);
            result.coeffs[0] += taylor[k];
        }
        result
    }

    /// Substitutes `args[i] + x0_i` for the variables of `self`.
    ///
    /// `self` is expanded around `x0` in `args.len()` variables; every
    /// argument must have zero constant term. The result lives in the
    /// variables of the arguments.
    pub fn compose(&self, args: &[Jet]) -> Jet {
        assert_eq!(args.len(), self.nvars(), "argument count mismatch");
        let table = args[0].table.clone();
        let order = table.order.min(self.order());
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(args.len());
        for a in args {
            let mut h = a.clone();
            h.coeffs[0] = 0.0;
            let mut row = vec![Jet::constant(&table, 1.0)];
            for e in 1..=order {
                let next = row[e - 1].product(&h);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Jet::zero(&table);
        for (k, exps) in self.table.exps.iter().enumerate() {
            if self.table.degree[k] > order || self.coeffs[k] == 0.0 {
                continue;
            }
            let mut term = Jet::constant(&table, self.coeffs[k]);
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term = term.product(&powers[i][e as usize]);
                }
            }
            out += &term;
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let n = self.order();
        let mut t = vec![0.0; n + 1];
        let mut ak = 1.0 / a;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = if k % 2 == 0 { ak } else { -ak };
            ak /= a;
        }
        self.compose_univariate(&t)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let n = self.order();
        let mut t = vec![0.0; n + 1];
        t[0] = a.powf(p);
        for k in 1..=n {
            // binomial(p, k) a^(p - k)
            t[k] = t[k - 1] * (p - (k as f64 - 1.0)) / (k as f64 * a);
            if a == 0.0 {
                t[k] = binomial_real(p, k) * a.powf(p - k as f64);
            }
        }
        self.compose_univariate(&t)
    }

    pub fn powi(&self, p: i32) -> Jet {
        if p == 0 {
            return Jet::constant(&self.table, 1.0);
        }
        let base = if p < 0 { self.recip() } else { self.clone() };
        let mut result = base.clone();
        for _ in 1..p.unsigned_abs() {
            result = result.product(&base);
        }
        result
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let a = self.value().exp();
        let t: Vec<f64> = (0..=self.order()).map(|k| a / factorial(k)).collect();
        self.compose_univariate(&t)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut t = vec![a.ln()];
        let mut ak = 1.0;
        for k in 1..=self.order() {
            ak *= a;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * ak));
        }
        self.compose_univariate(&t)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let t: Vec<f64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose_univariate(&t)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let t: Vec<f64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose_univariate(&t)
    }

    pub fn tan(&self) -> Jet {
        self.sin() / self.cos()
    }

    pub fn atan(&self) -> Jet {
        let a = self.value();
        let n = self.order();
        // atan' = 1 / (1 + x^2); invert the series of 1 + (a + t)^2.
        let mut u = vec![0.0; n + 1];
        u[0] = 1.0 + a * a;
        if n >= 1 {
            u[1] = 2.0 * a;
        }
        if n >= 2 {
            u[2] = 1.0;
        }
        let v = series_recip(&u);
        let mut t = vec![a.atan()];
        for k in 1..=n {
            t.push(v[k - 1] / k as f64);
        }
        self.compose_univariate(&t)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn series_recip(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut v = vec![0.0; n];
    v[0] = 1.0 / u[0];
    for k in 1..n {
        let s: f64 = (1..=k).map(|j| u[j] * v[k - j]).sum();
        v[k] = -s / u[0];
    }
    v
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

fn binomial_real(p: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (p - j as f64) / (j as f64 + 1.0))
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                self.$method(&Jet::constant(&self.table, rhs))
            }
        }
        impl $trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::constant(&rhs.table, self).$method(rhs)
            }
        }
        impl $trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::constant(&rhs.table, self).$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| {
    a.same_shape(b);
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
    Jet {
        table: a.table.clone(),
        coeffs,
    }
});
jet_binop!(Sub, sub, |a, b| {
    a.same_shape(b);
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
    Jet {
        table: a.table.clone(),
        coeffs,
    }
});
jet_binop!(Mul, mul, |a, b| a.product(b));
jet_binop!(Div, div, |a, b| a.product(&b.recip()));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.same_shape(rhs);
        self.coeffs
            .iter_mut()
            .zip(&rhs.coeffs)
            .for_each(|(x, y)| *x += y);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.same_shape(rhs);
        self.coeffs
            .iter_mut()
            .zip(&rhs.coeffs)
            .for_each(|(x, y)| *x -= y);
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        self.coeffs.iter_mut().for_each(|x| *x *= rhs);
    }
}
