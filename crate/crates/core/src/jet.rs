//! Truncated multivariate Taylor polynomials ("jets") for forward-mode
//! differentiation to arbitrary order.
//!
//! A [`Jet`] stores the Taylor coefficients `c_a = (d^a f)(p) / a!` of a
//! function around a point `p` for every multi-index `a` with `|a| <= order`.
//! Products truncate at the lower order of the two operands, so a jet obtained
//! by differentiating (which loses one order) propagates its reduced accuracy
//! honestly through later arithmetic.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// Monomial tables shared by all jets over the same variables and order.
pub struct JetSpace {
    vars: usize,
    order: usize,
    exponents: Vec<Vec<u16>>,
    /// `degree_end[d]` = number of monomials of degree <= d.
    degree_end: Vec<usize>,
    /// `(i, j, k)` with `m_i * m_j = m_k`, sorted by the degree of `m_k`.
    products: Vec<(u32, u32, u32)>,
    product_end: Vec<usize>,
    /// Per variable: `(src, dst, factor)` so that `d/dv c[src] -> factor * c[src]` lands at `dst`.
    derivatives: Vec<Vec<(u32, u32, f64)>>,
    units: Vec<usize>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("vars", &self.vars)
            .field("order", &self.order)
            .field("monomials", &self.exponents.len())
            .finish()
    }
}

impl JetSpace {
    pub fn new(vars: usize, order: usize) -> Arc<Self> {
        // Graded enumeration of multi-indices.
        let mut exponents: Vec<Vec<u16>> = vec![vec![0; vars]];
        let mut degree_end = vec![1];
        let mut frontier = vec![vec![0u16; vars]];
        for _deg in 1..=order {
            let mut next = Vec::new();
            for m in &frontier {
                // Extend only at or after the last nonzero position to avoid duplicates.
                let start = m.iter().rposition(|&e| e > 0).unwrap_or(0);
                for v in start..vars {
                    let mut mm = m.clone();
                    mm[v] += 1;
                    next.push(mm);
                }
            }
            exponents.extend(next.iter().cloned());
            degree_end.push(exponents.len());
            frontier = next;
        }
        let index: HashMap<&[u16], usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice(), i))
            .collect();
        let degree = |e: &[u16]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut products = Vec::new();
        for (i, a) in exponents.iter().enumerate() {
            for (j, b) in exponents.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let sum: Vec<u16> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = index[sum.as_slice()];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        products.sort_by_key(|&(_, _, k)| (degree(&exponents[k as usize]), k));
        let mut product_end = vec![0; order + 1];
        for (d, end) in product_end.iter_mut().enumerate() {
            *end = products
                .iter()
                .take_while(|&&(_, _, k)| degree(&exponents[k as usize]) <= d)
                .count();
        }

        let mut derivatives = vec![Vec::new(); vars];
        for (src, e) in exponents.iter().enumerate() {
            for v in 0..vars {
                if e[v] > 0 {
                    let mut lowered = e.clone();
                    lowered[v] -= 1;
                    let dst = index[lowered.as_slice()];
                    derivatives[v].push((src as u32, dst as u32, e[v] as f64));
                }
            }
        }
        // unit monomials only exist from order 1 on
        let units = (0..if order >= 1 { vars } else { 0 })
            .map(|v| {
                let mut e = vec![0u16; vars];
                e[v] = 1;
                index[e.as_slice()]
            })
            .collect();

        Arc::new(Self {
            vars,
            order,
            exponents,
            degree_end,
            products,
            product_end,
            derivatives,
            units,
        })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn monomials(&self) -> usize {
        self.exponents.len()
    }

    fn len_for(&self, order: usize) -> usize {
        self.degree_end[order]
    }
}

#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    /// A constant, exact to the full order of the space.
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Self {
        let mut coeffs = vec![0.0; space.len_for(space.order)];
        coeffs[0] = value;
        Self {
            space: Arc::clone(space),
            order: space.order,
            coeffs,
        }
    }

    /// The independent variable `var` evaluated at `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Self {
        assert!(var < space.vars, "variable {var} out of range");
        let mut jet = Self::constant(space, value);
        if space.order >= 1 {
            jet.coeffs[space.units[var]] = 1.0;
        }
        jet
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Order up to which the coefficients are valid.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// First partial derivative with respect to `var` at the expansion point.
    pub fn first_partial(&self, var: usize) -> f64 {
        if self.order == 0 {
            return f64::NAN;
        }
        self.coeffs[self.space.units[var]]
    }

    /// The jet of `df/dvar`, valid to one order less.
    ///
    /// # Panics
    /// If the jet has order 0, since nothing is known about its derivatives.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let len = self.space.len_for(order);
        let mut coeffs = vec![0.0; len];
        for &(src, dst, factor) in &self.space.derivatives[var] {
            let (src, dst) = (src as usize, dst as usize);
            if src < self.coeffs.len() && dst < len {
                coeffs[dst] += factor * self.coeffs[src];
            }
        }
        Jet {
            space: Arc::clone(&self.space),
            order,
            coeffs,
        }
    }

    /// Same value, order lowered to `order` (no-op if already lower).
    pub fn truncate(mut self, order: usize) -> Jet {
        if order < self.order {
            self.order = order;
            self.coeffs.truncate(self.space.len_for(order));
        }
        self
    }

    pub fn lift(&self, value: f64) -> Jet {
        Jet::constant(&self.space, value)
    }

    /// `f(self)` given `derivs[k] = f^(k)(self.value())` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Jet {
            space: Arc::clone(&self.space),
            order: self.order,
            coeffs: vec![0.0; self.coeffs.len()],
        };
        out.coeffs[0] = derivs[0];
        let mut power = h.clone();
        let mut factorial = 1.0;
        for (k, d) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            factorial *= k as f64;
            let w = d / factorial;
            if w != 0.0 {
                for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                    *o += w * p;
                }
            }
            if k < self.order {
                power = &power * &h;
            }
        }
        out
    }

    pub fn powi(&self, n: i32) -> Jet {
        let x = self.value();
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut coef = 1.0;
        for k in 0..=self.order {
            let e = n - k as i32;
            derivs.push(if coef == 0.0 { 0.0 } else { coef * x.powi(e) });
            coef *= e as f64;
        }
        self.compose(&derivs)
    }

    pub fn recip(&self) -> Jet {
        self.powi(-1)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "jets from different spaces");
        let order = self.order.min(other.order);
        let len = self.space.len_for(order);
        let coeffs = self.coeffs[..len]
            .iter()
            .zip(&other.coeffs[..len])
            .map(|(a, b)| f(*a, *b))
            .collect();
        Jet {
            space: Arc::clone(&self.space),
            order,
            coeffs,
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "jets from different spaces");
        let order = self.order.min(other.order);
        let len = self.space.len_for(order);
        let mut coeffs = vec![0.0; len];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for &(i, j, k) in &self.space.products[..self.space.product_end[order]] {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet {
            space: Arc::clone(&self.space),
            order,
            coeffs,
        }
    }

    fn scaled(mut self, c: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|x| *x *= c);
        self
    }

    fn shifted(mut self, c: f64) -> Jet {
        self.coeffs[0] += c;
        self
    }
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
    };
}

jet_binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.product(b));
jet_binop!(Div, div, |a, b| a.product(&b.recip()));

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scaled(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.clone().scaled(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        self.shifted(c)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        self.shifted(-c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scaled(c)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.clone().scaled(c)
    }
}

/// Arithmetic shared by plain numbers and jets, so regressors can be written once.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant living in the same space as `self`.
    fn lift(&self, c: f64) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn lift(&self, c: f64) -> Self {
        Jet::lift(self, c)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
}
