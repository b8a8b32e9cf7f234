use super::grid::{dist, Point};

/// The C-infinity step built from `q(s) = exp(-1/s)`:
/// `S(s) = q(s) / (q(s) + q(1-s))`, exactly 0 for `s <= 0` and exactly 1
/// for `s >= 1`.
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Smooth bump around `x0`: exactly 1 on `|x - x0| <= 1/2`, exactly 0 on
/// `|x - x0| >= 3/4`, and `smoothstep((3/4 - d) / (1/4))` in between.
pub fn cutoff_phi(x: Point, x0: Point) -> f64 {
    cutoff_phi_radial(dist(x, x0))
}

pub fn cutoff_phi_radial(d: f64) -> f64 {
    smoothstep((0.75 - d) * 4.0)
}

/// Radial derivative of the bump, used for the cutoff annulus terms. Zero
/// off the transition annulus `1/2 < d < 3/4`.
pub fn cutoff_phi_radial_derivative(d: f64) -> f64 {
    let h = 1e-6;
    if d <= 0.5 || d >= 0.75 {
        return 0.0;
    }
    // The bump is smooth and O(1) on the open annulus; a central difference
    // at this step size carries ~1e-12 absolute error, far below the h^2
    // budget of every consumer.
    (cutoff_phi_radial(d + h) - cutoff_phi_radial(d - h)) / (2.0 * h)
}

/// Spatial gradient of the bump.
pub fn cutoff_phi_gradient(x: Point, x0: Point) -> Point {
    let d = dist(x, x0);
    if d <= 0.5 || d >= 0.75 {
        return [0.0; 3];
    }
    let dd = cutoff_phi_radial_derivative(d);
    [
        dd * (x[0] - x0[0]) / d,
        dd * (x[1] - x0[1]) / d,
        dd * (x[2] - x0[2]) / d,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plateau_and_support() {
        let x0 = [0.1, 0.2, 0.0];
        assert_eq!(cutoff_phi([0.5, 0.2, 0.0], x0), 1.0); // d = 0.4
        assert_eq!(cutoff_phi([0.9, 0.2, 0.0], x0), 0.0); // d = 0.8
        assert_eq!(cutoff_phi_radial(0.5), 1.0);
        assert_eq!(cutoff_phi_radial(0.75), 0.0);
    }

    // At d = 0.625 the step argument is 1/2 and the two exp(-1/s) branches
    // coincide, so the closed form gives exactly 1/2.
    #[test]
    fn midpoint_value_pinned() {
        let v = cutoff_phi_radial(0.625);
        assert!(v > 0.0 && v < 1.0);
        assert_relative_eq!(v, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn strictly_between_on_the_transition() {
        for d in [0.55, 0.6, 0.7, 0.74] {
            let v = cutoff_phi_radial(d);
            assert!(v > 0.0 && v < 1.0, "d = {d}: {v}");
        }
        assert!(cutoff_phi_radial(0.55) > cutoff_phi_radial(0.7));
    }

    #[test]
    fn gradient_vanishes_off_the_transition_annulus() {
        let x0 = [0.0; 3];
        let h = 1e-4;
        for d in [0.0, 0.2, 0.45, 0.8, 1.5] {
            let x = [d, 0.0, 0.0];
            let fd = (cutoff_phi([d + h, 0.0, 0.0], x0) - cutoff_phi([d - h, 0.0, 0.0], x0))
                / (2.0 * h);
            assert_eq!(fd, 0.0, "finite difference at d = {d}");
            assert_eq!(cutoff_phi_gradient(x, x0), [0.0; 3]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences_inside() {
        let x0 = [0.0; 3];
        for d in [0.55, 0.65, 0.72] {
            let x = [d, 0.0, 0.0];
            let h = 1e-5;
            let fd = (cutoff_phi([d + h, 0.0, 0.0], x0) - cutoff_phi([d - h, 0.0, 0.0], x0))
                / (2.0 * h);
            let g = cutoff_phi_gradient(x, x0)[0];
            assert_relative_eq!(g, fd, max_relative = 1e-5);
        }
    }
}
