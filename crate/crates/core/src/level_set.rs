//! Implicit interface `Γ = {Φ = 0}` and segment intersection.
//!
//! Sign convention: `Φ > 0` in Ω₁ (outside), `Φ < 0` in Ω₂ (enclosed by Γ).

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::geometry::{Point, Segment, Vec2};
use crate::poly::Poly2;

/// Subdomain label. `One` is where the level set is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    One,
    Two,
}

impl Region {
    pub fn index(self) -> u8 {
        match self {
            Region::One => 1,
            Region::Two => 2,
        }
    }

    pub fn from_sign(value: f64) -> Option<Region> {
        if value > 0.0 {
            Some(Region::One)
        } else if value < 0.0 {
            Some(Region::Two)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LevelSet {
    Circle { center: Point, radius: f64 },
    Polynomial(Poly2),
}

/// A transversal root of `λ ↦ Φ(a + λ(b − a))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentRoot {
    pub lambda: f64,
    pub point: Point,
}

const SAMPLES: usize = 64;

impl LevelSet {
    pub fn circle(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(GeometryError::NonPositiveRadius(radius));
        }
        Ok(LevelSet::Circle { center, radius })
    }

    pub fn polynomial(p: Poly2) -> Self {
        LevelSet::Polynomial(p)
    }

    /// The circle as a polynomial `(x − cx)² + (y − cy)² − r²`.
    pub fn as_polynomial(&self) -> Poly2 {
        match self {
            LevelSet::Circle { center, radius } => {
                let dx = &Poly2::x() - &Poly2::constant(center.x);
                let dy = &Poly2::y() - &Poly2::constant(center.y);
                &(&dx.pow(2) + &dy.pow(2)) - &Poly2::constant(radius * radius)
            }
            LevelSet::Polynomial(p) => p.clone(),
        }
    }

    pub fn eval(&self, p: &Point) -> f64 {
        match self {
            LevelSet::Circle { center, radius } => {
                let dx = p.x - center.x;
                let dy = p.y - center.y;
                dx * dx + dy * dy - radius * radius
            }
            LevelSet::Polynomial(poly) => poly.eval(p.x, p.y),
        }
    }

    pub fn gradient(&self, p: &Point) -> Vec2 {
        match self {
            LevelSet::Circle { center, .. } => 2.0 * (p - center),
            LevelSet::Polynomial(poly) => {
                Vec2::new(poly.dx().eval(p.x, p.y), poly.dy().eval(p.x, p.y))
            }
        }
    }

    /// All transversal roots on the closed segment, sorted by parameter.
    ///
    /// Circle roots come from the quadratic in `λ` directly; polynomial roots
    /// are bracketed on a uniform sample and bisected. A double root in the
    /// segment interior is reported as [`GeometryError::TangentialContact`].
    pub fn roots_on_segment(
        &self,
        seg: &Segment,
        tol: f64,
    ) -> Result<Vec<SegmentRoot>, GeometryError> {
        assert!(tol > 0.0, "root tolerance must be positive");
        let lambdas = match self {
            LevelSet::Circle { center, radius } => circle_roots(seg, center, *radius, tol)?,
            LevelSet::Polynomial(_) => self.bracketed_roots(seg, tol)?,
        };
        Ok(lambdas
            .into_iter()
            .map(|lambda| SegmentRoot {
                lambda,
                point: seg.at(lambda),
            })
            .collect())
    }

    /// Subdomain containing `p`; points on Γ are rejected.
    pub fn region_of(&self, p: &Point) -> Result<Region, GeometryError> {
        let value = self.eval(p);
        if value.abs() <= 4.0 * f64::EPSILON * self.scale_at(p) {
            return Err(GeometryError::OnInterface {
                x: p.x,
                y: p.y,
                value,
            });
        }
        Ok(Region::from_sign(value).expect("nonzero value"))
    }

    fn scale_at(&self, p: &Point) -> f64 {
        match self {
            LevelSet::Circle { center, radius } => {
                radius * radius + (p - center).norm_squared()
            }
            LevelSet::Polynomial(poly) => poly
                .terms()
                .map(|(i, j, c)| (c * p.x.powi(i as i32) * p.y.powi(j as i32)).abs())
                .sum::<f64>()
                .max(f64::MIN_POSITIVE),
        }
    }

    fn bracketed_roots(&self, seg: &Segment, tol: f64) -> Result<Vec<f64>, GeometryError> {
        let f = |l: f64| self.eval(&seg.at(l));
        let scale = 1f64.max(f(0.0).abs()).max(f(1.0).abs());
        let grid: Vec<f64> = (0..=SAMPLES).map(|k| k as f64 / SAMPLES as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&l| f(l)).collect();
        let mut roots = Vec::new();
        for k in 0..=SAMPLES {
            if vals[k] == 0.0 {
                let left = (k > 0).then(|| vals[k - 1]);
                let right = (k < SAMPLES).then(|| vals[k + 1]);
                if let (Some(l), Some(r)) = (left, right) {
                    if l.signum() == r.signum() && l != 0.0 {
                        return Err(tangent(seg, grid[k]));
                    }
                }
                roots.push(grid[k]);
            }
        }
        for k in 0..SAMPLES {
            let (fa, fb) = (vals[k], vals[k + 1]);
            if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
                roots.push(bisect(&f, grid[k], grid[k + 1], fa));
            } else if fa != 0.0 && fa.signum() == fb.signum() {
                // Hidden double root: |Φ| dips to ~0 without a sign change.
                let (lm, vm) = golden_min(|l| f(l).abs(), grid[k], grid[k + 1]);
                if vm <= tol * scale && lm > 0.0 && lm < 1.0 {
                    return Err(tangent(seg, lm));
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        Ok(roots)
    }
}

fn tangent(seg: &Segment, lambda: f64) -> GeometryError {
    GeometryError::TangentialContact {
        ax: seg.a.x,
        ay: seg.a.y,
        bx: seg.b.x,
        by: seg.b.y,
        lambda,
    }
}

fn circle_roots(
    seg: &Segment,
    center: &Point,
    radius: f64,
    tol: f64,
) -> Result<Vec<f64>, GeometryError> {
    let d = seg.b - seg.a;
    let w = seg.a - center;
    let qa = d.norm_squared();
    let qb = 2.0 * d.dot(&w);
    let qc = w.norm_squared() - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    let vertex = -qb / (2.0 * qa);
    if disc < 0.0 {
        // The closest approach may still graze the circle within round-off.
        if vertex > 0.0 && vertex < 1.0 && (-disc).sqrt() / qa <= tol {
            return Err(tangent(seg, vertex));
        }
        return Ok(Vec::new());
    }
    let sq = disc.sqrt();
    if sq / qa <= tol && vertex > 0.0 && vertex < 1.0 {
        return Err(tangent(seg, vertex));
    }
    // Cancellation-free pair of roots.
    let q = -0.5 * (qb + qb.signum() * sq);
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / qa, qc / q)
    };
    let mut roots: Vec<f64> = [r1, r2]
        .into_iter()
        .filter(|l| *l >= -1e-15 && *l <= 1.0 + 1e-15)
        .map(|l| l.clamp(0.0, 1.0))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(roots)
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}
