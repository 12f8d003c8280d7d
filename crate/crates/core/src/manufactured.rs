//! Exact solutions with known forcing, used for convergence studies and patch tests.

use nalgebra::Matrix2;

use crate::error::AssemblyError;
use crate::geometry::{Point, Rect, Vec2};
use crate::level_set::{LevelSet, Region};
use crate::poly::Poly2;

/// Velocity gradients are stored row-per-component:
/// `grad[(i, j)] = ∂u_i / ∂x_j`.
///
/// The `_in` variants evaluate the smooth branch of a given subdomain, which
/// is defined on all of the domain. The plain methods pick the branch of the
/// subdomain actually containing the point.
pub trait ExactSolution: Sync {
    fn velocity_in(&self, region: Region, p: &Point) -> Vec2;
    fn velocity_gradient_in(&self, region: Region, p: &Point) -> Matrix2<f64>;
    fn pressure(&self, p: &Point) -> f64;
    fn forcing(&self, p: &Point) -> Vec2;
    /// Subdomain containing `p`; points on the interface count as region one.
    fn region_at(&self, p: &Point) -> Region;

    fn velocity(&self, p: &Point) -> Vec2 {
        self.velocity_in(self.region_at(p), p)
    }

    fn velocity_gradient(&self, p: &Point) -> Matrix2<f64> {
        self.velocity_gradient_in(self.region_at(p), p)
    }

    /// Level set of the interface across which the branches change, if any.
    fn interface(&self) -> Option<&LevelSet> {
        None
    }
}

/// Stream-function solution around a closed interface `Φ = 0`:
/// `θ = Φ² (x−1)² (y−1)²`, `u = curl θ / μ`, `p = x − x̄`.
///
/// For a circle `θ` has degree 8. Its monomial coefficients are computed once
/// in floating point (`r²` is irrational for the default radius).
#[derive(Clone, Debug)]
pub struct Example1 {
    pub mu1: f64,
    pub mu2: f64,
    pub level_set: LevelSet,
    pub domain: Rect,
    theta: Poly2,
    tx: Poly2,
    ty: Poly2,
    txx: Poly2,
    txy: Poly2,
    tyy: Poly2,
    lap_x: Poly2,
    lap_y: Poly2,
    x_mean: f64,
}

impl Example1 {
    pub fn new(mu1: f64, mu2: f64, level_set: LevelSet, domain: Rect) -> Result<Self, AssemblyError> {
        if !(mu1 > 0.0 && mu2 > 0.0) {
            return Err(AssemblyError::NonPositiveViscosity { mu1, mu2 });
        }
        let phi = level_set.as_polynomial();
        let xm1 = Poly2::from_terms(&[(1, 0, 1.0), (0, 0, -1.0)]);
        let ym1 = Poly2::from_terms(&[(0, 1, 1.0), (0, 0, -1.0)]);
        let weight = &xm1.pow(2) * &ym1.pow(2);
        let theta = &phi.pow(2) * &weight;
        let tx = theta.dx();
        let ty = theta.dy();
        let lap = theta.laplacian();
        Ok(Self {
            mu1,
            mu2,
            domain,
            x_mean: domain.center().x,
            txx: tx.dx(),
            txy: tx.dy(),
            tyy: ty.dy(),
            lap_x: lap.dx(),
            lap_y: lap.dy(),
            tx,
            ty,
            theta,
            level_set,
        })
    }

    pub fn stream_function(&self) -> &Poly2 {
        &self.theta
    }

    /// Viscosity of the true subdomain containing `p`; `Φ ≥ 0` is region one.
    pub fn mu_at(&self, p: &Point) -> f64 {
        self.mu(self.region_at(p))
    }

    pub fn mu(&self, region: Region) -> f64 {
        match region {
            Region::One => self.mu1,
            Region::Two => self.mu2,
        }
    }
}

impl ExactSolution for Example1 {
    fn velocity_in(&self, region: Region, p: &Point) -> Vec2 {
        Vec2::new(self.ty.eval(p.x, p.y), -self.tx.eval(p.x, p.y)) / self.mu(region)
    }

    fn velocity_gradient_in(&self, region: Region, p: &Point) -> Matrix2<f64> {
        let mu = self.mu(region);
        let (xx, xy, yy) = (
            self.txx.eval(p.x, p.y),
            self.txy.eval(p.x, p.y),
            self.tyy.eval(p.x, p.y),
        );
        Matrix2::new(xy, yy, -xx, -xy) / mu
    }

    fn pressure(&self, p: &Point) -> f64 {
        p.x - self.x_mean
    }

    fn forcing(&self, p: &Point) -> Vec2 {
        Vec2::new(1.0 - self.lap_y.eval(p.x, p.y), self.lap_x.eval(p.x, p.y))
    }

    fn region_at(&self, p: &Point) -> Region {
        Region::from_sign(self.level_set.eval(p)).unwrap_or(Region::One)
    }

    fn interface(&self) -> Option<&LevelSet> {
        Some(&self.level_set)
    }
}

/// `u = (y, x)`, `p = 0`, `μ = 1`: reproduced exactly by both local spaces.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearPatch;

impl ExactSolution for LinearPatch {
    fn velocity_in(&self, _region: Region, p: &Point) -> Vec2 {
        Vec2::new(p.y, p.x)
    }

    fn velocity_gradient_in(&self, _region: Region, _p: &Point) -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, 1.0, 0.0)
    }

    fn pressure(&self, _p: &Point) -> f64 {
        0.0
    }

    fn forcing(&self, _p: &Point) -> Vec2 {
        Vec2::zeros()
    }

    fn region_at(&self, _p: &Point) -> Region {
        Region::One
    }
}
