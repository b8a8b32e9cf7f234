use super::grid::{unit_sphere_area, Point};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; good to machine precision
/// for the node counts used here (< 1000).
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count >= 1);
    let n = count;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_with_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates a smooth function over `[a, b]` with a composite
/// Gauss-Legendre rule (`panels` subintervals, `nodes` points each).
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, nodes: usize) -> f64 {
    let (xs, ws) = gauss_legendre(nodes);
    let mut total = 0.0;
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Node counts for the sphere rules; the defaults give spectral accuracy
/// for smooth integrands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Uniform angles on the circle (n = 2).
    pub circle_nodes: usize,
    /// Gauss-Legendre nodes in the polar direction (n = 3).
    pub polar_nodes: usize,
    /// Uniform azimuthal angles (n = 3).
    pub azimuth_nodes: usize,
    /// Radial panels for ball and layer integrals.
    pub radial_panels: usize,
    /// Gauss-Legendre nodes per radial panel.
    pub radial_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            circle_nodes: 256,
            polar_nodes: 64,
            azimuth_nodes: 128,
            radial_panels: 4,
            radial_nodes: 16,
        }
    }
}

/// Directions and weights on the unit sphere `S^{n-1}`; weights sum to the
/// surface area `s_n`.
///
/// - n = 1: the two endpoints, weight 1 each;
/// - n = 2: uniform angles (trapezoid rule, spectrally accurate on the
///   circle);
/// - n = 3: Gauss-Legendre in the polar cosine times uniform azimuth.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    n: usize,
    directions: Vec<Point>,
    weights: Vec<f64>,
    /// Polynomial degree up to which the rule is exact.
    exact_degree: usize,
}

impl SphereQuadrature {
    pub fn new(n: usize, cfg: &QuadratureConfig) -> Result<Self> {
        match n {
            1 => Ok(Self {
                n,
                directions: vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
                weights: vec![1.0, 1.0],
                exact_degree: usize::MAX,
            }),
            2 => {
                let m = cfg.circle_nodes;
                if m < 4 {
                    return Err(Error::InvalidArgument(format!(
                        "circle rule needs at least 4 nodes, got {m}"
                    )));
                }
                let w = 2.0 * std::f64::consts::PI / m as f64;
                let mut directions = Vec::with_capacity(m);
                let mut weights = Vec::with_capacity(m);
                for j in 0..m {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    directions.push([th.cos(), th.sin(), 0.0]);
                    weights.push(w);
                }
                Ok(Self {
                    n,
                    directions,
                    weights,
                    exact_degree: m - 1,
                })
            }
            3 => {
                let np = cfg.polar_nodes;
                let na = cfg.azimuth_nodes;
                if np < 2 || na < 4 {
                    return Err(Error::InvalidArgument(format!(
                        "sphere rule needs >= 2 polar and >= 4 azimuth nodes, got {np} x {na}"
                    )));
                }
                let (cts, cws) = gauss_legendre(np);
                let wa = 2.0 * std::f64::consts::PI / na as f64;
                let mut directions = Vec::with_capacity(np * na);
                let mut weights = Vec::with_capacity(np * na);
                for (ct, cw) in cts.iter().zip(&cws) {
                    let st = (1.0 - ct * ct).max(0.0).sqrt();
                    for j in 0..na {
                        let ph = 2.0 * std::f64::consts::PI * j as f64 / na as f64;
                        directions.push([st * ph.cos(), st * ph.sin(), *ct]);
                        weights.push(cw * wa);
                    }
                }
                Ok(Self {
                    n,
                    directions,
                    weights,
                    exact_degree: (2 * np - 1).min(na - 1),
                })
            }
            _ => Err(Error::InvalidArgument(format!(
                "sphere quadrature tables ship for n <= 3, got {n}"
            ))),
        }
    }

    pub fn with_defaults(n: usize) -> Result<Self> {
        Self::new(n, &QuadratureConfig::default())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.directions
            .iter()
            .cloned()
            .zip(self.weights.iter().cloned())
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mean of `g` over the unit sphere.
    pub fn average(&self, g: impl Fn(Point) -> f64) -> f64 {
        let mut acc = 0.0;
        for (d, w) in self.iter() {
            acc += w * g(d);
        }
        acc / self.weight_sum()
    }
}

/// Quadrature of the surface integral of `g` over the sphere of radius `r`
/// around `x0`: `sum_j w_j r^{n-1} g(x0 + r d_j)`.
///
/// The sampler is evaluated off-node; bounds must be checked by the caller
/// (see `CartesianGrid::require_sphere`).
pub fn sphere_integral(
    g: impl Fn(Point) -> f64,
    x0: Point,
    r: f64,
    quad: &SphereQuadrature,
) -> f64 {
    let scale = r.powi(quad.n as i32 - 1);
    let mut acc = 0.0;
    for (d, w) in quad.iter() {
        let x = [x0[0] + r * d[0], x0[1] + r * d[1], x0[2] + r * d[2]];
        acc += w * g(x);
    }
    acc * scale
}

/// Quadrature of the volume integral of `g` over the ball of radius `r`
/// around `x0`, as a radial composite Gauss-Legendre rule nested with the
/// sphere rule. The sphere stays exactly on each integration shell, so
/// boundary-sensitive integrands see no staircase error.
pub fn ball_integral(
    g: impl Fn(Point) -> f64,
    x0: Point,
    r: f64,
    quad: &SphereQuadrature,
    cfg: &QuadratureConfig,
) -> f64 {
    annulus_integral(g, x0, 0.0, r, quad, cfg)
}

/// Same rule over the annulus `r_in <= |x - x0| <= r_out`.
pub fn annulus_integral(
    g: impl Fn(Point) -> f64,
    x0: Point,
    r_in: f64,
    r_out: f64,
    quad: &SphereQuadrature,
    cfg: &QuadratureConfig,
) -> f64 {
    integrate_1d(
        |rho| sphere_integral(&g, x0, rho, quad),
        r_in,
        r_out,
        cfg.radial_panels,
        cfg.radial_nodes,
    )
}
