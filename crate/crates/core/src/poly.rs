//! Dense bivariate polynomials with exact coefficient-level calculus.

use std::ops::{Add, Mul, Neg, Sub};

/// `Σ c[i][j] x^i y^j`, stored as a dense `(d+1) × (d+1)` coefficient grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    size: usize,
    coeffs: Vec<f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self {
            size: 1,
            coeffs: vec![0.0],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            size: 1,
            coeffs: vec![c],
        }
    }

    pub fn x() -> Self {
        Self::from_terms(&[(1, 0, 1.0)])
    }

    pub fn y() -> Self {
        Self::from_terms(&[(0, 1, 1.0)])
    }

    /// Builds a polynomial from `(i, j, c)` monomial terms `c x^i y^j`.
    /// Repeated monomials are summed.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let size = terms
            .iter()
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .unwrap_or(1);
        let mut p = Self {
            size,
            coeffs: vec![0.0; size * size],
        };
        for &(i, j, c) in terms {
            p.coeffs[i * size + j] += c;
        }
        p
    }

    fn with_size(size: usize) -> Self {
        Self {
            size: size.max(1),
            coeffs: vec![0.0; size.max(1) * size.max(1)],
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i < self.size && j < self.size {
            self.coeffs[i * self.size + j]
        } else {
            0.0
        }
    }

    /// Nonzero terms in lexicographic `(i, j)` order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.size).flat_map(move |i| {
            (0..self.size).filter_map(move |j| {
                let c = self.coeffs[i * self.size + j];
                (c != 0.0).then_some((i, j, c))
            })
        })
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.terms().map(|(i, j, _)| i + j).max().unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            size: self.size,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(1.0), |acc, _| &acc * self)
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::with_size(self.size);
        for (i, j, c) in self.terms() {
            if i > 0 {
                out.coeffs[(i - 1) * out.size + j] += c * i as f64;
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::with_size(self.size);
        for (i, j, c) in self.terms() {
            if j > 0 {
                out.coeffs[i * out.size + j - 1] += c * j as f64;
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        &self.dx().dx() + &self.dy().dy()
    }

    /// Nested Horner evaluation.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.size;
        let mut acc = 0.0;
        for i in (0..n).rev() {
            let row = &self.coeffs[i * n..(i + 1) * n];
            let inner = row.iter().rev().fold(0.0, |a, &c| a * y + c);
            acc = acc * x + inner;
        }
        acc
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let size = self.size.max(rhs.size);
        let mut out = Poly2::with_size(size);
        for (i, j, c) in self.terms().chain(rhs.terms()) {
            out.coeffs[i * size + j] += c;
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &(-rhs)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let size = self.size + rhs.size - 1;
        let mut out = Poly2::with_size(size);
        for (i, j, a) in self.terms() {
            for (k, l, b) in rhs.terms() {
                out.coeffs[(i + k) * size + j + l] += a * b;
            }
        }
        out
    }
}
