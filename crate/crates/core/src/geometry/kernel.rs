use super::grid::{dist, Point, SpaceTimeGrid};
use super::quadrature::{ball_integral, QuadratureConfig, SphereQuadrature};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Reading of the backward kernel for `t > t0`, where the defining formula
/// `4*pi*(t0-t) |4*pi*(t0-t)|^{-n/2-1} exp(-|x-x0|^2 / (4(t0-t)))` has a
/// negative prefactor and a growing exponential.
///
/// `SignedAbsExponent` keeps the signed prefactor but puts `|t0 - t|` in
/// the exponent denominator so the kernel decays at infinity; `Literal`
/// evaluates the formula as written. For `t < t0` both agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelConvention {
    #[default]
    SignedAbsExponent,
    Literal,
}

/// Backward heat kernel centered at `(t0, x0)`, evaluated at `(t, x)`.
///
/// For `t < t0` this is the positive Gaussian
/// `(4*pi*(t0-t))^{-n/2} exp(-|x-x0|^2/(4(t0-t)))` with unit spatial mass.
/// For `t > t0` the value is negative and follows the chosen convention.
pub fn backward_heat_kernel(
    t: f64,
    x: Point,
    t0: f64,
    x0: Point,
    n: usize,
    convention: KernelConvention,
) -> Result<f64> {
    let tau = t0 - t;
    if tau == 0.0 {
        return Err(Error::SingularTime { t0 });
    }
    let d = dist(x, x0);
    Ok(kernel_value(tau, d, n, convention))
}

fn kernel_value(tau: f64, d: f64, n: usize, convention: KernelConvention) -> f64 {
    let abs_tau = tau.abs();
    let prefactor = tau.signum() * (4.0 * std::f64::consts::PI * abs_tau).powf(-(n as f64) / 2.0);
    let exponent = match convention {
        KernelConvention::SignedAbsExponent => -d * d / (4.0 * abs_tau),
        KernelConvention::Literal => -d * d / (4.0 * tau),
    };
    prefactor * exponent.exp()
}

/// Closed-form spatial gradient `(x - x0) G / (2 (t - t0))`.
///
/// Valid verbatim for `t < t0` and for the literal reading on `t > t0`;
/// under the decaying convention the same algebra applies with `|t - t0|`.
pub fn backward_heat_kernel_gradient(
    t: f64,
    x: Point,
    t0: f64,
    x0: Point,
    n: usize,
    convention: KernelConvention,
) -> Result<Point> {
    let g = backward_heat_kernel(t, x, t0, x0, n, convention)?;
    let denom = match convention {
        KernelConvention::Literal => 2.0 * (t - t0),
        // exponent uses |t0 - t|, so the chain rule differentiates -d^2/(4|tau|)
        KernelConvention::SignedAbsExponent => -2.0 * (t - t0).abs(),
    };
    Ok([
        (x[0] - x0[0]) * g / denom,
        (x[1] - x0[1]) * g / denom,
        (x[2] - x0[2]) * g / denom,
    ])
}

/// Spatial truncation radius: beyond it the Gaussian factor drops below
/// `tail_threshold` (default 1e-16).
pub fn truncation_radius(abs_tau: f64, tail_threshold: f64) -> f64 {
    (4.0 * abs_tau * (1.0 / tail_threshold).ln()).sqrt()
}

/// Kernel mass outside radius `r_cut`, computed by a radial quadrature of
/// the Gaussian tail. Used to report truncation bounds.
pub fn kernel_tail_mass(abs_tau: f64, r_cut: f64, n: usize) -> f64 {
    let norm = (4.0 * std::f64::consts::PI * abs_tau).powf(-(n as f64) / 2.0);
    let s_n = super::grid::unit_sphere_area(n);
    // The integrand is negligible a few standard deviations past r_cut.
    let r_far = r_cut + 40.0 * abs_tau.sqrt();
    super::quadrature::integrate_1d(
        |rho| rho.powi(n as i32 - 1) * (-rho * rho / (4.0 * abs_tau)).exp(),
        r_cut,
        r_far,
        8,
        16,
    ) * norm
        * s_n
}

/// Which layer relative to the center time `T`: `Minus` is
/// `(T - 4r^2, T - r^2)`, `Plus` is `(T + r^2, T + 4r^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSide {
    Minus,
    Plus,
}

impl LayerSide {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerSide::Minus => "minus",
            LayerSide::Plus => "plus",
        }
    }

    pub fn interval(self, center: f64, r: f64) -> (f64, f64) {
        match self {
            LayerSide::Minus => (center - 4.0 * r * r, center - r * r),
            LayerSide::Plus => (center + r * r, center + 4.0 * r * r),
        }
    }
}

/// A Gaussian-weighted layer integral together with its truncation
/// accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerIntegral {
    pub value: f64,
    /// Kernel mass left outside the spatial truncation radius, integrated
    /// over the layer. A bound on the error for integrands dominated by
    /// the kernel.
    pub tail_bound: f64,
    /// True when the grid box forced a truncation radius smaller than the
    /// tail threshold would ask for.
    pub clipped_by_grid: bool,
}

/// Space-time quadrature of `int_layer g * G_(T,x0)`.
///
/// Time: trapezoid over the grid slices inside the layer, with linear
/// interpolation onto the layer endpoints. Space: ball quadrature over
/// `|x - x0| <= R_cut(t)`, where the Gaussian has decayed to the tail
/// threshold, clipped to the largest ball inscribed in the grid.
pub struct LayerQuadrature<'a> {
    pub st_grid: &'a SpaceTimeGrid,
    pub sphere: &'a SphereQuadrature,
    pub quad_cfg: &'a QuadratureConfig,
    pub convention: KernelConvention,
    pub tail_threshold: f64,
}

impl<'a> LayerQuadrature<'a> {
    pub fn new(
        st_grid: &'a SpaceTimeGrid,
        sphere: &'a SphereQuadrature,
        quad_cfg: &'a QuadratureConfig,
        convention: KernelConvention,
    ) -> Self {
        Self {
            st_grid,
            sphere,
            quad_cfg,
            convention,
            tail_threshold: 1e-16,
        }
    }

    /// Integrates `g(t, x) * G_(T,x0)(t, x)` over the layer.
    pub fn integrate(
        &self,
        g: impl Fn(f64, Point) -> f64,
        center_time: f64,
        x0: Point,
        r: f64,
        side: LayerSide,
    ) -> Result<LayerIntegral> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "layer radius must be positive, got {r}"
            )));
        }
        let (t_lo, t_hi) = side.interval(center_time, r);
        self.st_grid.require_time_interval(t_lo, t_hi, r)?;

        let n = self.st_grid.space().dim();
        let r_grid = self.st_grid.space().max_inscribed_radius(x0);

        let mut value = 0.0;
        let mut tail = 0.0;
        let mut clipped = false;
        let times = self.time_nodes(t_lo, t_hi);
        for (t, wt) in times {
            let tau = center_time - t;
            let abs_tau = tau.abs();
            let r_want = truncation_radius(abs_tau, self.tail_threshold);
            let r_cut = r_want.min(r_grid);
            if r_cut < r_want {
                clipped = true;
            }
            let slice = ball_integral(
                |x| {
                    g(t, x) * kernel_value(tau, dist(x, x0), n, self.convention)
                },
                x0,
                r_cut,
                self.sphere,
                self.quad_cfg,
            );
            value += wt * slice;
            tail += wt * kernel_tail_mass(abs_tau, r_cut, n);
        }
        Ok(LayerIntegral {
            value,
            tail_bound: tail,
            clipped_by_grid: clipped,
        })
    }

    /// Trapezoid nodes and weights on `[t_lo, t_hi]` built from the grid
    /// slices, with the interval endpoints inserted where they fall
    /// between slices.
    fn time_nodes(&self, t_lo: f64, t_hi: f64) -> Vec<(f64, f64)> {
        let st = self.st_grid;
        let mut ts: Vec<f64> = Vec::new();
        ts.push(t_lo);
        let eps = 1e-12 * (1.0 + st.dt());
        for k in 0..st.slices() {
            let t = st.slice_time(k);
            if t > t_lo + eps && t < t_hi - eps {
                ts.push(t);
            }
        }
        ts.push(t_hi);
        let mut nodes = Vec::with_capacity(ts.len());
        for (i, &t) in ts.iter().enumerate() {
            let left = if i == 0 { t } else { ts[i - 1] };
            let right = if i + 1 == ts.len() { t } else { ts[i + 1] };
            nodes.push((t, 0.5 * (right - left)));
        }
        nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::CartesianGrid;
    use approx::assert_relative_eq;

    const CONV: KernelConvention = KernelConvention::SignedAbsExponent;

    #[test]
    fn prefactor_collapses_when_tau_is_quarter_inv_pi() {
        for n in 1..=3 {
            let tau = 1.0 / (4.0 * std::f64::consts::PI);
            let v = backward_heat_kernel(0.0, [0.0; 3], tau, [0.0; 3], n, CONV).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn singular_at_center_time() {
        let e = backward_heat_kernel(1.0, [0.0; 3], 1.0, [0.0; 3], 2, CONV).unwrap_err();
        assert!(matches!(e, Error::SingularTime { .. }));
    }

    // Oracle: Gaussian normalization. Truncated radial quadrature of the
    // kernel mass must reach 1 to 1e-8.
    #[test]
    fn unit_mass_for_past_times() {
        let cfg = QuadratureConfig::default();
        for n in 1..=3usize {
            let quad = SphereQuadrature::with_defaults(n).unwrap();
            for tau in [0.03, 0.4, 1.7] {
                let r_cut = truncation_radius(tau, 1e-16);
                let mass = ball_integral(
                    |x| kernel_value(tau, dist(x, [0.0; 3]), n, CONV),
                    [0.0; 3],
                    r_cut,
                    &quad,
                    &cfg,
                );
                assert_relative_eq!(mass, 1.0, epsilon = 1e-8);
            }
        }
    }

    // Oracle: Gaussian variance, second moment 2 * tau per coordinate.
    #[test]
    fn second_moment_equals_twice_tau() {
        let cfg = QuadratureConfig::default();
        let n = 2;
        let quad = SphereQuadrature::with_defaults(n).unwrap();
        let tau = 0.35;
        let x0 = [0.4, -0.1, 0.0];
        let r_cut = truncation_radius(tau, 1e-18);
        let m2 = ball_integral(
            |x| (x[0] - x0[0]).powi(2) * kernel_value(tau, dist(x, x0), n, CONV),
            x0,
            r_cut,
            &quad,
            &cfg,
        );
        assert_relative_eq!(m2, 2.0 * tau, epsilon = 1e-8);
    }

    // The analytic gradient must match (x - x0) G / (2 (t - t0)) pointwise.
    #[test]
    fn gradient_identity_holds_analytically() {
        let n = 3;
        let t0 = 0.7;
        let x0 = [0.1, -0.2, 0.3];
        for (t, x) in [
            (0.2, [0.5, 0.1, -0.4]),
            (0.69, [0.2, -0.2, 0.35]),
            (-1.0, [1.0, 1.0, 1.0]),
        ] {
            let g = backward_heat_kernel(t, x, t0, x0, n, CONV).unwrap();
            let grad = backward_heat_kernel_gradient(t, x, t0, x0, n, CONV).unwrap();
            for a in 0..n {
                let expected = (x[a] - x0[a]) * g / (2.0 * (t - t0));
                let denom = g.abs().max(1e-300);
                assert!(
                    ((grad[a] - expected) / denom).abs() < 1e-6,
                    "axis {a}: {} vs {expected}",
                    grad[a]
                );
            }
        }
    }

    // Finite-difference residual of dt G + Lap G, first order in dt and
    // second order in h, stays under 1e-4 at the default resolutions.
    #[test]
    fn heat_equation_residual_small() {
        let t0 = 0.0;
        let x0 = [0.0; 3];
        let dt = 1e-6;
        let h = 5e-3;
        for n in 1..=3usize {
            let mut worst: f64 = 0.0;
            for (t, mut x) in [
                (-1.0, [0.3, 0.1, -0.2]),
                (-0.5, [0.0, 0.0, 0.0]),
                (-0.25, [0.5, -0.4, 0.2]),
            ] {
                for a in n..3 {
                    x[a] = 0.0;
                }
                let g = |t: f64, x: Point| {
                    backward_heat_kernel(t, x, t0, x0, n, CONV).unwrap()
                };
                let gt = (g(t + dt, x) - g(t, x)) / dt;
                let mut lap = 0.0;
                for a in 0..n {
                    let mut xp = x;
                    let mut xm = x;
                    xp[a] += h;
                    xm[a] -= h;
                    lap += (g(t, xp) - 2.0 * g(t, x) + g(t, xm)) / (h * h);
                }
                worst = worst.max((gt + lap).abs());
            }
            assert!(worst < 1e-4, "n = {n}: residual {worst}");
        }
    }

    #[test]
    fn plus_side_conventions_differ_only_for_future_times() {
        let x = [0.8, 0.0, 0.0];
        let past = |c| backward_heat_kernel(-0.3, x, 0.0, [0.0; 3], 2, c).unwrap();
        assert_eq!(
            past(KernelConvention::SignedAbsExponent),
            past(KernelConvention::Literal)
        );
        let fut_signed =
            backward_heat_kernel(0.3, x, 0.0, [0.0; 3], 2, KernelConvention::SignedAbsExponent)
                .unwrap();
        let fut_literal =
            backward_heat_kernel(0.3, x, 0.0, [0.0; 3], 2, KernelConvention::Literal).unwrap();
        assert!(fut_signed < 0.0 && fut_literal < 0.0);
        // decaying reading is smaller in magnitude at distance
        assert!(fut_signed.abs() < fut_literal.abs());
    }

    #[test]
    fn layer_of_one_has_length_three_r_squared() {
        let space = CartesianGrid::centered(1, 6.0, 601).unwrap();
        let st = SpaceTimeGrid::new(space, -1.0, 1.0, 101).unwrap();
        let sphere = SphereQuadrature::with_defaults(1).unwrap();
        let cfg = QuadratureConfig::default();
        let lq = LayerQuadrature::new(&st, &sphere, &cfg, CONV);
        let r = 0.2;
        let out = lq
            .integrate(|_, _| 1.0, 0.5, [0.0; 3], r, LayerSide::Minus)
            .unwrap();
        assert_relative_eq!(out.value, 3.0 * r * r, max_relative = 1e-6);
        assert!(!out.clipped_by_grid);
        assert!(out.tail_bound < 1e-10);
    }

    // Oracle: Gaussian second moment per slice, int (x-x0)_1^2/(T-t) G = 2,
    // so the layer integral is 6 r^2.
    #[test]
    fn layer_second_moment_over_time() {
        let space = CartesianGrid::centered(1, 6.0, 601).unwrap();
        let st = SpaceTimeGrid::new(space, -1.0, 1.0, 201).unwrap();
        let sphere = SphereQuadrature::with_defaults(1).unwrap();
        let cfg = QuadratureConfig::default();
        let lq = LayerQuadrature::new(&st, &sphere, &cfg, CONV);
        let r = 0.15;
        let center = 0.5;
        let out = lq
            .integrate(
                |t, x| x[0] * x[0] / (center - t),
                center,
                [0.0; 3],
                r,
                LayerSide::Minus,
            )
            .unwrap();
        assert_relative_eq!(out.value, 6.0 * r * r, max_relative = 1e-6);
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let space = CartesianGrid::centered(1, 4.0, 201).unwrap();
        let st = SpaceTimeGrid::new(space, 0.0, 1.0, 51).unwrap();
        let sphere = SphereQuadrature::with_defaults(1).unwrap();
        let cfg = QuadratureConfig::default();
        let lq = LayerQuadrature::new(&st, &sphere, &cfg, CONV);
        let out = lq
            .integrate(|_, _| 0.0, 1.0, [0.0; 3], 0.2, LayerSide::Minus)
            .unwrap();
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn layer_outside_time_grid_is_rejected() {
        let space = CartesianGrid::centered(1, 4.0, 201).unwrap();
        let st = SpaceTimeGrid::new(space, 0.0, 0.1, 51).unwrap();
        let sphere = SphereQuadrature::with_defaults(1).unwrap();
        let cfg = QuadratureConfig::default();
        let lq = LayerQuadrature::new(&st, &sphere, &cfg, CONV);
        let e = lq
            .integrate(|_, _| 1.0, 0.1, [0.0; 3], 0.2, LayerSide::Minus)
            .unwrap_err();
        assert!(matches!(e, Error::LayerOutOfDomain { .. }));
    }

    #[test]
    fn clipping_by_small_grid_is_flagged() {
        let space = CartesianGrid::centered(1, 0.5, 51).unwrap();
        let st = SpaceTimeGrid::new(space, -1.0, 1.0, 101).unwrap();
        let sphere = SphereQuadrature::with_defaults(1).unwrap();
        let cfg = QuadratureConfig::default();
        let lq = LayerQuadrature::new(&st, &sphere, &cfg, CONV);
        let out = lq
            .integrate(|_, _| 1.0, 0.5, [0.0; 3], 0.3, LayerSide::Minus)
            .unwrap();
        assert!(out.clipped_by_grid);
        assert!(out.tail_bound > 1e-10);
    }
}
