//! Discrete vector-valued solutions on spatial and space-time grids,
//! with multilinear sampling, cached node gradients and the text field
//! format in [`io`].

pub mod io;

use crate::error::{Error, Result};
use crate::geometry::{CartesianGrid, Point, SpaceTimeGrid};
use crate::models::ModelSpec;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Solved,
    Manufactured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub provenance: Provenance,
    pub model: ModelSpec,
    /// Final solver residual when provenance is `Solved`.
    pub residual: Option<f64>,
}

impl FieldMeta {
    pub fn exact(model: ModelSpec) -> Self {
        Self {
            provenance: Provenance::Exact,
            model,
            residual: None,
        }
    }

    pub fn manufactured() -> Self {
        Self {
            provenance: Provenance::Manufactured,
            model: ModelSpec::Zero { m: 1 },
            residual: None,
        }
    }
}

/// `m` components of node values on a Cartesian grid.
pub struct Field {
    grid: CartesianGrid,
    /// `values[component][node]`, row-major node order.
    values: Vec<Vec<f64>>,
    meta: FieldMeta,
    gradients: OnceLock<Vec<Vec<Vec<f64>>>>,
}

impl Clone for Field {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.clone(),
            meta: self.meta.clone(),
            gradients: OnceLock::new(),
        }
    }
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("n", &self.grid.dim())
            .field("m", &self.values.len())
            .field("nodes", &self.grid.node_count())
            .field("meta", &self.meta)
            .finish()
    }
}

impl Field {
    pub fn from_values(grid: CartesianGrid, values: Vec<Vec<f64>>, meta: FieldMeta) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "field needs at least one component".to_string(),
            ));
        }
        let nodes = grid.node_count();
        for (i, comp) in values.iter().enumerate() {
            if comp.len() != nodes {
                return Err(Error::InvalidArgument(format!(
                    "component {i} has {} values for {nodes} nodes",
                    comp.len()
                )));
            }
            if let Some(v) = comp.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "component {i} contains the non-finite value {v}"
                )));
            }
        }
        Ok(Self {
            grid,
            values,
            meta,
            gradients: OnceLock::new(),
        })
    }

    /// Samples `f` on every node. `f` writes the `m` component values.
    pub fn from_fn(
        grid: CartesianGrid,
        m: usize,
        meta: FieldMeta,
        f: impl Fn(Point, &mut [f64]),
    ) -> Result<Self> {
        let nodes = grid.node_count();
        let mut values = vec![vec![0.0; nodes]; m];
        let mut buf = vec![0.0; m];
        for lin in 0..nodes {
            let idx = grid.multi_index(lin);
            let x = grid.node_position(&idx[..grid.dim()]);
            f(x, &mut buf);
            for (comp, v) in values.iter_mut().zip(&buf) {
                comp[lin] = *v;
            }
        }
        Self::from_values(grid, values, meta)
    }

    pub fn from_scalar_fn(
        grid: CartesianGrid,
        meta: FieldMeta,
        f: impl Fn(Point) -> f64,
    ) -> Result<Self> {
        Self::from_fn(grid, 1, meta, |x, out| out[0] = f(x))
    }

    pub fn grid(&self) -> &CartesianGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut FieldMeta {
        &mut self.meta
    }

    pub fn node_values(&self, component: usize) -> &[f64] {
        &self.values[component]
    }

    pub fn node_value(&self, component: usize, lin: usize) -> f64 {
        self.values[component][lin]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Per-node central-difference gradients, one-sided second order at
    /// the boundary; built once on first use.
    fn gradient_tables(&self) -> &Vec<Vec<Vec<f64>>> {
        self.gradients.get_or_init(|| {
            self.values
                .iter()
                .map(|comp| gradient_table(&self.grid, comp))
                .collect()
        })
    }

    /// Multilinear interpolation of one component.
    pub fn value(&self, component: usize, x: Point) -> f64 {
        interpolate(&self.grid, &self.values[component], x)
    }

    pub fn values_at(&self, x: Point, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.value(i, x);
        }
    }

    /// Interpolated spatial gradient of one component.
    pub fn gradient(&self, component: usize, x: Point) -> Point {
        let tables = self.gradient_tables();
        let mut g = [0.0; 3];
        for axis in 0..self.grid.dim() {
            g[axis] = interpolate(&self.grid, &tables[component][axis], x);
        }
        g
    }

    /// `sum_i |grad u_i|^2` at `x`.
    pub fn grad_sq(&self, x: Point) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.components() {
            let g = self.gradient(c, x);
            acc += g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        }
        acc
    }

    /// `sum_i u_i^2` at `x`.
    pub fn u_sq(&self, x: Point) -> f64 {
        (0..self.components())
            .map(|c| {
                let v = self.value(c, x);
                v * v
            })
            .sum()
    }

    /// Checks every node against the model's admissible domain.
    pub fn check_admissible(&self, model: &crate::models::NonlinearityModel) -> Result<()> {
        let mut u = vec![0.0; self.components()];
        for lin in 0..self.grid.node_count() {
            for (c, comp) in self.values.iter().enumerate() {
                u[c] = comp[lin];
            }
            model.check_domain(&u)?;
        }
        Ok(())
    }
}

fn gradient_table(grid: &CartesianGrid, values: &[f64]) -> Vec<Vec<f64>> {
    let n = grid.dim();
    let nodes = grid.node_count();
    let mut out = vec![vec![0.0; nodes]; n];
    for lin in 0..nodes {
        let idx = grid.multi_index(lin);
        for (axis, table) in out.iter_mut().enumerate() {
            let h = grid.spacing()[axis];
            let count = grid.counts()[axis];
            let i = idx[axis];
            let at = |j: usize| {
                let mut id = idx;
                id[axis] = j;
                values[grid.linear_index(&id[..n])]
            };
            table[lin] = if i == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if i == count - 1 {
                (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h)
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            };
        }
    }
    out
}

fn interpolate(grid: &CartesianGrid, values: &[f64], x: Point) -> f64 {
    let n = grid.dim();
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for axis in 0..n {
        let h = grid.spacing()[axis];
        let count = grid.counts()[axis];
        let rel = (x[axis] - grid.lo()[axis]) / h;
        let mut cell = rel.floor() as isize;
        if cell < 0 {
            cell = 0;
        }
        if cell as usize >= count - 1 {
            cell = count as isize - 2;
        }
        base[axis] = cell as usize;
        frac[axis] = rel - cell as f64;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << n) {
        let mut weight = 1.0;
        let mut idx = base;
        for axis in 0..n {
            if corner & (1 << axis) != 0 {
                weight *= frac[axis];
                idx[axis] += 1;
            } else {
                weight *= 1.0 - frac[axis];
            }
        }
        if weight != 0.0 {
            acc += weight * values[grid.linear_index(&idx[..n])];
        }
    }
    acc
}

/// Per-slice fields over a space-time grid; slice grids are identical and
/// observe the grid's strict time ordering.
pub struct SpaceTimeField {
    st_grid: SpaceTimeGrid,
    slices: Vec<Field>,
    meta: FieldMeta,
    /// `dt_tables[slice][component][node]`.
    dt_tables: OnceLock<Vec<Vec<Vec<f64>>>>,
}

impl Clone for SpaceTimeField {
    fn clone(&self) -> Self {
        Self {
            st_grid: self.st_grid.clone(),
            slices: self.slices.clone(),
            meta: self.meta.clone(),
            dt_tables: OnceLock::new(),
        }
    }
}

impl std::fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpaceTimeField")
            .field("n", &self.st_grid.space().dim())
            .field("m", &self.components())
            .field("slices", &self.slices.len())
            .field("meta", &self.meta)
            .finish()
    }
}

impl SpaceTimeField {
    pub fn from_slices(st_grid: SpaceTimeGrid, slices: Vec<Field>, meta: FieldMeta) -> Result<Self> {
        if slices.len() != st_grid.slices() {
            return Err(Error::InvalidArgument(format!(
                "{} slices for a grid with {}",
                slices.len(),
                st_grid.slices()
            )));
        }
        let m = slices[0].components();
        for (k, s) in slices.iter().enumerate() {
            if s.grid() != st_grid.space() {
                return Err(Error::InvalidArgument(format!(
                    "slice {k} lives on a different spatial grid"
                )));
            }
            if s.components() != m {
                return Err(Error::InvalidArgument(format!(
                    "slice {k} has {} components, expected {m}",
                    s.components()
                )));
            }
        }
        Ok(Self {
            st_grid,
            slices,
            meta,
            dt_tables: OnceLock::new(),
        })
    }

    pub fn from_fn(
        st_grid: SpaceTimeGrid,
        m: usize,
        meta: FieldMeta,
        f: impl Fn(f64, Point, &mut [f64]),
    ) -> Result<Self> {
        let mut slices = Vec::with_capacity(st_grid.slices());
        for k in 0..st_grid.slices() {
            let t = st_grid.slice_time(k);
            let slice = Field::from_fn(st_grid.space().clone(), m, meta.clone(), |x, out| {
                f(t, x, out)
            })?;
            slices.push(slice);
        }
        Self::from_slices(st_grid, slices, meta)
    }

    pub fn st_grid(&self) -> &SpaceTimeGrid {
        &self.st_grid
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut FieldMeta {
        &mut self.meta
    }

    pub fn components(&self) -> usize {
        self.slices[0].components()
    }

    pub fn slice(&self, k: usize) -> &Field {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().fold(0.0f64, |a, s| a.max(s.max_abs()))
    }

    fn bracket(&self, t: f64) -> (usize, f64) {
        let dt = self.st_grid.dt();
        let rel = (t - self.st_grid.t1()) / dt;
        let mut k = rel.floor() as isize;
        let last = self.st_grid.slices() as isize - 2;
        if k < 0 {
            k = 0;
        }
        if k > last {
            k = last;
        }
        (k as usize, rel - k as f64)
    }

    /// Linear interpolation in time of the spatial interpolants.
    pub fn value(&self, component: usize, t: f64, x: Point) -> f64 {
        let (k, w) = self.bracket(t);
        (1.0 - w) * self.slices[k].value(component, x) + w * self.slices[k + 1].value(component, x)
    }

    pub fn spatial_gradient(&self, component: usize, t: f64, x: Point) -> Point {
        let (k, w) = self.bracket(t);
        let a = self.slices[k].gradient(component, x);
        let b = self.slices[k + 1].gradient(component, x);
        [
            (1.0 - w) * a[0] + w * b[0],
            (1.0 - w) * a[1] + w * b[1],
            (1.0 - w) * a[2] + w * b[2],
        ]
    }

    pub fn grad_sq(&self, t: f64, x: Point) -> f64 {
        let (k, w) = self.bracket(t);
        let mut acc = 0.0;
        for c in 0..self.components() {
            let a = self.slices[k].gradient(c, x);
            let b = self.slices[k + 1].gradient(c, x);
            for axis in 0..3 {
                let g = (1.0 - w) * a[axis] + w * b[axis];
                acc += g * g;
            }
        }
        acc
    }

    pub fn u_sq(&self, t: f64, x: Point) -> f64 {
        let (k, w) = self.bracket(t);
        let mut acc = 0.0;
        for c in 0..self.components() {
            let v = (1.0 - w) * self.slices[k].value(c, x) + w * self.slices[k + 1].value(c, x);
            acc += v * v;
        }
        acc
    }

    fn dt_table(&self) -> &Vec<Vec<Vec<f64>>> {
        self.dt_tables.get_or_init(|| {
            let dt = self.st_grid.dt();
            let ns = self.slices.len();
            let m = self.components();
            let nodes = self.st_grid.space().node_count();
            let mut out = vec![vec![vec![0.0; nodes]; m]; ns];
            for (k, table) in out.iter_mut().enumerate() {
                for (c, comp_table) in table.iter_mut().enumerate() {
                    let v = |j: usize| self.slices[j].node_values(c);
                    for node in 0..nodes {
                        comp_table[node] = if k == 0 {
                            (-3.0 * v(0)[node] + 4.0 * v(1)[node] - v(2)[node]) / (2.0 * dt)
                        } else if k == ns - 1 {
                            (3.0 * v(k)[node] - 4.0 * v(k - 1)[node] + v(k - 2)[node]) / (2.0 * dt)
                        } else {
                            (v(k + 1)[node] - v(k - 1)[node]) / (2.0 * dt)
                        };
                    }
                }
            }
            out
        })
    }

    /// Time derivative (central differences across slices, one-sided
    /// second order at the ends), interpolated in space and time.
    pub fn time_derivative(&self, component: usize, t: f64, x: Point) -> f64 {
        let tables = self.dt_table();
        let (k, w) = self.bracket(t);
        let a = interpolate(self.st_grid.space(), &tables[k][component], x);
        let b = interpolate(self.st_grid.space(), &tables[k + 1][component], x);
        (1.0 - w) * a + w * b
    }

    pub fn values_at(&self, t: f64, x: Point, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.value(c, t, x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn meta() -> FieldMeta {
        FieldMeta::manufactured()
    }

    #[test]
    fn interpolation_is_exact_for_multilinear_data() {
        let grid = CartesianGrid::new(&[[-1.0, 1.0], [-1.0, 1.0]], &[17, 17]).unwrap();
        let f = Field::from_scalar_fn(grid, meta(), |x| 2.0 + x[0] * x[1] - 3.0 * x[0]).unwrap();
        for (px, py) in [(0.13, -0.77), (0.999, 0.999), (-1.0, 1.0)] {
            let got = f.value(0, [px, py, 0.0]);
            assert_relative_eq!(got, 2.0 + px * py - 3.0 * px, epsilon = 1e-13);
        }
    }

    #[test]
    fn gradients_are_second_order() {
        let mut errs = Vec::new();
        for count in [41, 81] {
            let grid = CartesianGrid::new(&[[-1.0, 1.0]], &[count]).unwrap();
            let f = Field::from_scalar_fn(grid, meta(), |x| (2.0 * x[0]).sin()).unwrap();
            let mut worst: f64 = 0.0;
            for lin in 0..f.grid().node_count() {
                let x = f.grid().node_position(&f.grid().multi_index(lin)[..1]);
                let g = f.gradient(0, x)[0];
                worst = worst.max((g - 2.0 * (2.0 * x[0]).cos()).abs());
            }
            errs.push(worst);
        }
        let ratio = errs[0] / errs[1];
        assert!(
            ratio > 3.0 && ratio < 5.5,
            "halving h should quarter the gradient error, got {errs:?}"
        );
    }

    #[test]
    fn construction_rejects_non_finite_and_mismatched_values() {
        let grid = CartesianGrid::new(&[[0.0, 1.0]], &[5]).unwrap();
        assert!(Field::from_values(grid.clone(), vec![vec![0.0; 4]], meta()).is_err());
        assert!(
            Field::from_values(grid, vec![vec![0.0, 1.0, f64::NAN, 0.0, 1.0]], meta()).is_err()
        );
    }

    #[test]
    fn spacetime_sampling_and_time_derivative() {
        let space = CartesianGrid::new(&[[-1.0, 1.0]], &[21]).unwrap();
        let st = SpaceTimeGrid::new(space, 0.0, 1.0, 21).unwrap();
        // linear in t and x: interpolation and time differences are exact
        let f = SpaceTimeField::from_fn(st, 1, meta(), |t, x, out| {
            out[0] = 3.0 * t + 2.0 * x[0];
        })
        .unwrap();
        assert_relative_eq!(f.value(0, 0.37, [0.5, 0.0, 0.0]), 3.0 * 0.37 + 1.0, epsilon = 1e-12);
        assert_relative_eq!(f.time_derivative(0, 0.37, [0.5, 0.0, 0.0]), 3.0, epsilon = 1e-10);
        assert_relative_eq!(f.spatial_gradient(0, 0.9, [0.1, 0.0, 0.0])[0], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn spacetime_rejects_mismatched_slices() {
        let space = CartesianGrid::new(&[[-1.0, 1.0]], &[21]).unwrap();
        let other = CartesianGrid::new(&[[-1.0, 1.0]], &[22]).unwrap();
        let st = SpaceTimeGrid::new(space.clone(), 0.0, 1.0, 3).unwrap();
        let mk = |g: &CartesianGrid| Field::from_scalar_fn(g.clone(), meta(), |_| 0.0).unwrap();
        let bad = vec![mk(&space), mk(&other), mk(&space)];
        assert!(SpaceTimeField::from_slices(st, bad, meta()).is_err());
    }
}
