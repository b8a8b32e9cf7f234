use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A spatial point. Only the first `n` coordinates are meaningful; the
/// rest are zero. Keeping a fixed-size array makes points `Copy` and keeps
/// the quadrature loops allocation-free.
pub type Point = [f64; 3];

pub const MAX_DIM: usize = 3;

pub fn point_from(coords: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..coords.len()].copy_from_slice(coords);
    p
}

pub fn dist(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

pub fn norm(a: Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Surface area of the unit sphere in `R^n`, n = 1, 2, 3.
///
/// n = 1 uses the counting measure on the two endpoints.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("dimension {n} not supported (quadrature tables ship for n <= 3)"),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n) / n as f64
}

/// A uniform tensor-product grid on an axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianGrid {
    n: usize,
    lo: [f64; 3],
    hi: [f64; 3],
    counts: [usize; 3],
    spacing: [f64; 3],
}

impl CartesianGrid {
    /// Builds a grid from per-axis extents and node counts.
    ///
    /// Each axis needs at least 3 nodes so that central differences are
    /// possible, and extents must be strictly ordered.
    pub fn new(extents: &[[f64; 2]], counts: &[usize]) -> Result<Self> {
        let n = extents.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "grid dimension must be between 1 and {MAX_DIM}, got {n}"
            )));
        }
        if counts.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} extents but {} node counts",
                n,
                counts.len()
            )));
        }
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        let mut cs = [1usize; 3];
        let mut spacing = [0.0; 3];
        for axis in 0..n {
            let [a, b] = extents[axis];
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "axis {axis}: extents [{a}, {b}] are not strictly ordered"
                )));
            }
            if counts[axis] < 3 {
                return Err(Error::InvalidArgument(format!(
                    "axis {axis}: need at least 3 nodes, got {}",
                    counts[axis]
                )));
            }
            lo[axis] = a;
            hi[axis] = b;
            cs[axis] = counts[axis];
            spacing[axis] = (b - a) / (counts[axis] - 1) as f64;
        }
        Ok(Self {
            n,
            lo,
            hi,
            counts: cs,
            spacing,
        })
    }

    /// Symmetric box `[-half, half]^n`.
    pub fn centered(n: usize, half: f64, count: usize) -> Result<Self> {
        let extents = vec![[-half, half]; n];
        let counts = vec![count; n];
        Self::new(&extents, &counts)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.n]
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.n]
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.n]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.n]
    }

    /// Largest spacing over the axes; the `h` entering error budgets.
    pub fn h_max(&self) -> f64 {
        self.spacing[..self.n]
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    pub fn node_count(&self) -> usize {
        self.counts[..self.n].iter().product()
    }

    /// Row-major linear index; the last axis varies fastest.
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        let mut lin = 0;
        for axis in 0..self.n {
            lin = lin * self.counts[axis] + idx[axis];
        }
        lin
    }

    pub fn multi_index(&self, mut lin: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.n).rev() {
            idx[axis] = lin % self.counts[axis];
            lin /= self.counts[axis];
        }
        idx
    }

    pub fn node_position(&self, idx: &[usize]) -> Point {
        let mut p = [0.0; 3];
        for axis in 0..self.n {
            p[axis] = self.lo[axis] + self.spacing[axis] * idx[axis] as f64;
        }
        p
    }

    /// Iterates node multi-indices in row-major order.
    pub fn iter_nodes(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let total = self.node_count();
        (0..total).map(move |lin| self.multi_index(lin))
    }

    pub fn contains_point(&self, x: Point, slack: f64) -> bool {
        (0..self.n).all(|a| x[a] >= self.lo[a] - slack && x[a] <= self.hi[a] + slack)
    }

    pub fn contains_ball(&self, x0: Point, r: f64) -> bool {
        (0..self.n).all(|a| x0[a] - r >= self.lo[a] - 1e-12 && x0[a] + r <= self.hi[a] + 1e-12)
    }

    /// Radius of the largest ball around `x0` inscribed in the box.
    pub fn max_inscribed_radius(&self, x0: Point) -> f64 {
        (0..self.n)
            .map(|a| (x0[a] - self.lo[a]).min(self.hi[a] - x0[a]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn require_sphere(&self, x0: Point, r: f64) -> Result<()> {
        if r > 0.0 && self.contains_ball(x0, r) {
            Ok(())
        } else {
            Err(Error::SphereOutOfDomain {
                center: x0[..self.n].to_vec(),
                radius: r,
            })
        }
    }

    pub fn require_ball(&self, x0: Point, r: f64) -> Result<()> {
        if r > 0.0 && self.contains_ball(x0, r) {
            Ok(())
        } else {
            Err(Error::BallOutOfDomain {
                center: x0[..self.n].to_vec(),
                radius: r,
            })
        }
    }
}

/// One-dimensional radial grid, the fast path for radially symmetric
/// profiles. Cell-centered by default: the first node sits at `dr/2`,
/// away from the coordinate singularity at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    n: usize,
    r_max: f64,
    count: usize,
    dr: f64,
    first_at_origin: bool,
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64, count: usize, first_at_origin: bool) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "radial grid dimension {n} out of range"
            )));
        }
        if !(r_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radial grid needs r_max > 0, got {r_max}"
            )));
        }
        if count < 3 {
            return Err(Error::InvalidArgument(format!(
                "radial grid needs at least 3 nodes, got {count}"
            )));
        }
        let dr = if first_at_origin {
            r_max / (count - 1) as f64
        } else {
            r_max / (count as f64 - 0.5)
        };
        Ok(Self {
            n,
            r_max,
            count,
            dr,
            first_at_origin,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn node(&self, i: usize) -> f64 {
        if self.first_at_origin {
            self.dr * i as f64
        } else {
            self.dr * (i as f64 + 0.5)
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.node(i))
    }
}

/// A spatial grid extruded over a uniform time partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    space: CartesianGrid,
    t1: f64,
    t2: f64,
    slices: usize,
    dt: f64,
}

impl SpaceTimeGrid {
    pub fn new(space: CartesianGrid, t1: f64, t2: f64, slices: usize) -> Result<Self> {
        if !(t1 < t2) {
            return Err(Error::InvalidArgument(format!(
                "time interval ({t1}, {t2}) is not strictly ordered"
            )));
        }
        if slices < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 time slices, got {slices}"
            )));
        }
        let dt = (t2 - t1) / (slices - 1) as f64;
        Ok(Self {
            space,
            t1,
            t2,
            slices,
            dt,
        })
    }

    pub fn space(&self) -> &CartesianGrid {
        &self.space
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn slice_time(&self, k: usize) -> f64 {
        self.t1 + self.dt * k as f64
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.t1 - 1e-12 * (1.0 + self.dt) && t <= self.t2 + 1e-12 * (1.0 + self.dt)
    }

    pub fn require_time_interval(&self, t_lo: f64, t_hi: f64, radius: f64) -> Result<()> {
        if self.contains_time(t_lo) && self.contains_time(t_hi) {
            Ok(())
        } else {
            Err(Error::LayerOutOfDomain {
                t_lo,
                t_hi,
                radius,
                t1: self.t1,
                t2: self.t2,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_rejects_bad_arguments() {
        assert!(CartesianGrid::new(&[[0.0, 1.0]], &[2]).is_err());
        assert!(CartesianGrid::new(&[[1.0, 0.0]], &[5]).is_err());
        assert!(CartesianGrid::new(&[[0.0, 1.0], [0.0, 1.0]], &[5]).is_err());
    }

    #[test]
    fn cartesian_indexing_roundtrip() {
        let g = CartesianGrid::new(&[[0.0, 1.0], [0.0, 2.0]], &[4, 5]).unwrap();
        assert_eq!(g.node_count(), 20);
        for lin in 0..20 {
            let idx = g.multi_index(lin);
            assert_eq!(g.linear_index(&idx[..2]), lin);
        }
        let p = g.node_position(&[3, 4]);
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!((p[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inscribed_radius_and_ball_checks() {
        let g = CartesianGrid::centered(2, 1.0, 11).unwrap();
        assert!(g.contains_ball([0.0, 0.0, 0.0], 1.0));
        assert!(!g.contains_ball([0.5, 0.0, 0.0], 0.75));
        assert!((g.max_inscribed_radius([0.25, 0.0, 0.0]) - 0.75).abs() < 1e-15);
        let err = g.require_sphere([0.5, 0.0, 0.0], 0.75).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0.75"), "error should name the radius: {msg}");
    }

    #[test]
    fn radial_grid_first_node_off_origin() {
        let g = RadialGrid::new(2, 1.0, 10, false).unwrap();
        assert!(g.node(0) > 0.0);
        assert!((g.node(9) - 1.0).abs() < 1e-14);
        let nodes: Vec<f64> = g.nodes().collect();
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn spacetime_slice_times_are_consistent() {
        let space = CartesianGrid::centered(1, 1.0, 5).unwrap();
        let st = SpaceTimeGrid::new(space, 0.0, 1.0, 11).unwrap();
        assert!((st.dt() * (st.slices() - 1) as f64 - 1.0).abs() < 1e-12);
        assert!((st.slice_time(10) - 1.0).abs() < 1e-12);
        assert!(st.require_time_interval(0.2, 0.9, 0.3).is_ok());
        assert!(st.require_time_interval(-0.1, 0.5, 0.3).is_err());
    }
}
