//! Symmetric triangle rules, collapsed Gauss rules for higher degrees, and
//! cell quadrature (quadrilaterals are split along the `v0 – v2` diagonal).

use crate::error::ElementError;
use crate::geometry::{signed_area, Point};

pub const MAX_DEGREE: usize = 40;

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`; weights sum to 1.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Smallest available rule exact for polynomials of total degree `degree`.
    pub fn new(degree: usize) -> Result<Self, ElementError> {
        let (points, weights) = match degree {
            0 | 1 => (vec![[1.0 / 3.0, 1.0 / 3.0]], vec![1.0]),
            2 => {
                let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
                (vec![[a, a], [b, a], [a, b]], vec![1.0 / 3.0; 3])
            }
            3..=5 => degree5(),
            6..=8 => degree8(),
            d if d <= MAX_DEGREE => collapsed_gauss(d),
            d => return Err(ElementError::UnsupportedDegree(d)),
        };
        Ok(Self {
            degree,
            points,
            weights,
        })
    }

    /// Maps the rule onto a physical triangle; weights sum to its area.
    pub fn on_triangle(&self, tri: [Point; 3], out: &mut Vec<(Point, f64)>) {
        let area = signed_area(&tri).abs();
        let (e1, e2) = (tri[1] - tri[0], tri[2] - tri[0]);
        for (p, w) in self.points.iter().zip(&self.weights) {
            out.push((tri[0] + e1 * p[0] + e2 * p[1], w * area));
        }
    }

    /// Points and weights on a cell given by its counterclockwise vertices.
    pub fn on_cell(&self, pts: &[Point]) -> Vec<(Point, f64)> {
        let mut out = Vec::with_capacity(self.points.len() * (pts.len() - 2));
        for k in 1..pts.len() - 1 {
            self.on_triangle([pts[0], pts[k], pts[k + 1]], &mut out);
        }
        out
    }
}

/// Convenience wrapper around [`TriangleRule::new`] + [`TriangleRule::on_cell`].
pub fn cell_quadrature(pts: &[Point], degree: usize) -> Result<Vec<(Point, f64)>, ElementError> {
    Ok(TriangleRule::new(degree)?.on_cell(pts))
}

fn orbit3(a: f64) -> [[f64; 2]; 3] {
    let b = 1.0 - 2.0 * a;
    [[a, a], [a, b], [b, a]]
}

fn orbit6(a: f64, b: f64) -> [[f64; 2]; 6] {
    let c = 1.0 - a - b;
    [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]]
}

fn degree5() -> (Vec<[f64; 2]>, Vec<f64>) {
    let r15 = 15f64.sqrt();
    let (a1, a2) = ((6.0 - r15) / 21.0, (6.0 + r15) / 21.0);
    let (w1, w2) = ((155.0 - r15) / 1200.0, (155.0 + r15) / 1200.0);
    let mut pts = vec![[1.0 / 3.0, 1.0 / 3.0]];
    let mut ws = vec![9.0 / 40.0];
    for (a, w) in [(a1, w1), (a2, w2)] {
        pts.extend(orbit3(a));
        ws.extend([w; 3]);
    }
    (pts, ws)
}

// 16-point rule, weights re-solved from the moment equations to full precision.
fn degree8() -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut pts = vec![[1.0 / 3.0, 1.0 / 3.0]];
    let mut ws = vec![0.144_315_607_677_787_17];
    for (a, w) in [
        (0.459_292_588_292_723_2, 0.095_091_634_267_284_62),
        (0.170_569_307_751_760_2, 0.103_217_370_534_718_25),
        (0.050_547_228_317_030_98, 0.032_458_497_623_198_08),
    ] {
        pts.extend(orbit3(a));
        ws.extend([w; 3]);
    }
    pts.extend(orbit6(0.008_394_777_409_957_605, 0.263_112_829_634_638_1));
    ws.extend([0.027_230_314_174_434_994; 6]);
    (pts, ws)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = 0.5 * (1.0 - x);
        ws[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

fn collapsed_gauss(degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let n = degree.div_ceil(2) + 1;
    let (xs, ws) = gauss_legendre(n);
    let mut pts = Vec::with_capacity(n * n);
    let mut wts = Vec::with_capacity(n * n);
    for (u, wu) in xs.iter().zip(&ws) {
        for (v, wv) in xs.iter().zip(&ws) {
            pts.push([*u, v * (1.0 - u)]);
            // Duffy Jacobian (1 − u); ×2 normalizes to unit total weight.
            wts.push(2.0 * wu * wv * (1.0 - u));
        }
    }
    (pts, wts)
}
