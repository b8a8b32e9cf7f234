//! The nonlinearity catalog: potentials `F` and gradients `f = grad F`
//! with admissibility metadata. Models are immutable after construction
//! and evaluation is pure.

pub mod expr;

use crate::error::{Error, Result};
use expr::Expression;
use serde::{Deserialize, Serialize};

/// Default positivity floor for models whose potential needs `u > 0`.
pub const DEFAULT_DELTA_FLOOR: f64 = 1e-8;

/// Admissible range of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ComponentDomain {
    /// The whole real line.
    All,
    /// `u >= 0`.
    NonNegative,
    /// `u >= floor` with a strictly positive floor.
    Floored(f64),
}

impl ComponentDomain {
    pub fn contains(self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self {
            ComponentDomain::All => true,
            ComponentDomain::NonNegative => v >= 0.0,
            ComponentDomain::Floored(floor) => v >= floor,
        }
    }
}

/// Plain-data description of a model, used in config files and field
/// metadata. `NonlinearityModel::from_spec` turns it into an evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Zero {
        #[serde(default = "one")]
        m: usize,
    },
    CoupledLinear {
        c: f64,
    },
    GinzburgLandau {
        epsilon: f64,
        #[serde(default = "one")]
        m: usize,
    },
    CoupledPower {
        p: f64,
        q: f64,
        c: f64,
    },
    SinglePower {
        p: f64,
    },
    LogPotential {
        c: f64,
    },
    Custom {
        /// Potential as an expression over `u1 .. um`.
        potential: String,
        /// Optional gradient expressions, one per component. When absent
        /// the gradient is taken by central differences of `potential`.
        #[serde(default)]
        gradient: Option<Vec<String>>,
        #[serde(default = "one")]
        m: usize,
    },
}

fn one() -> usize {
    1
}

enum Evaluator {
    Zero,
    CoupledLinear { c: f64 },
    GinzburgLandau { inv_eps2: f64 },
    CoupledPower { p: f64, q: f64, c: f64 },
    SinglePower { p: f64 },
    LogPotential { c: f64 },
    Custom { potential: Expression, gradient: Option<Vec<Expression>> },
}

/// A pair `(F, f)` with `f = grad F`, plus the admissible domain of `u`.
pub struct NonlinearityModel {
    spec: ModelSpec,
    eval: Evaluator,
    m: usize,
    domain: Vec<ComponentDomain>,
}

impl Clone for NonlinearityModel {
    fn clone(&self) -> Self {
        // spec -> model is deterministic, and custom models were already
        // cross-checked once
        Self::from_spec(&self.spec).expect("spec of an existing model rebuilds")
    }
}

impl std::fmt::Debug for NonlinearityModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NonlinearityModel({})", self.describe())
    }
}

impl NonlinearityModel {
    pub fn zero(m: usize) -> Self {
        Self::from_spec(&ModelSpec::Zero { m }).unwrap()
    }

    pub fn coupled_linear(c: f64) -> Self {
        Self::from_spec(&ModelSpec::CoupledLinear { c }).unwrap()
    }

    pub fn ginzburg_landau(epsilon: f64, m: usize) -> Result<Self> {
        Self::from_spec(&ModelSpec::GinzburgLandau { epsilon, m })
    }

    pub fn coupled_power(p: f64, q: f64, c: f64) -> Result<Self> {
        Self::from_spec(&ModelSpec::CoupledPower { p, q, c })
    }

    pub fn single_power(p: f64) -> Result<Self> {
        Self::from_spec(&ModelSpec::SinglePower { p })
    }

    pub fn log_potential(c: f64) -> Self {
        Self::from_spec(&ModelSpec::LogPotential { c }).unwrap()
    }

    pub fn custom(potential: &str, gradient: Option<Vec<&str>>, m: usize) -> Result<Self> {
        Self::from_spec(&ModelSpec::Custom {
            potential: potential.to_string(),
            gradient: gradient.map(|g| g.iter().map(|s| s.to_string()).collect()),
            m,
        })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let (eval, m, domain) = match spec {
            ModelSpec::Zero { m } => {
                require_m(*m)?;
                (Evaluator::Zero, *m, vec![ComponentDomain::All; *m])
            }
            ModelSpec::CoupledLinear { c } => (
                Evaluator::CoupledLinear { c: *c },
                2,
                vec![ComponentDomain::All; 2],
            ),
            ModelSpec::GinzburgLandau { epsilon, m } => {
                require_m(*m)?;
                if !(*epsilon > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "Ginzburg-Landau epsilon must be positive, got {epsilon}"
                    )));
                }
                (
                    Evaluator::GinzburgLandau {
                        inv_eps2: 1.0 / (epsilon * epsilon),
                    },
                    *m,
                    vec![ComponentDomain::All; *m],
                )
            }
            ModelSpec::CoupledPower { p, q, c } => {
                if !(*p >= 0.0 && *q >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "coupled power needs p, q >= 0, got p = {p}, q = {q}"
                    )));
                }
                (
                    Evaluator::CoupledPower { p: *p, q: *q, c: *c },
                    2,
                    vec![ComponentDomain::NonNegative; 2],
                )
            }
            ModelSpec::SinglePower { p } => {
                if *p == 1.0 || *p == -1.0 {
                    return Err(Error::InvalidArgument(
                        "single power requires p != +-1 (F = u^(p+1)/(p+1))".to_string(),
                    ));
                }
                // u^p over the reals needs u >= 0; negative powers also
                // need a floor away from 0.
                let dom = if *p >= 0.0 {
                    ComponentDomain::NonNegative
                } else {
                    ComponentDomain::Floored(DEFAULT_DELTA_FLOOR)
                };
                (Evaluator::SinglePower { p: *p }, 1, vec![dom])
            }
            ModelSpec::LogPotential { c } => (
                Evaluator::LogPotential { c: *c },
                1,
                vec![ComponentDomain::Floored(DEFAULT_DELTA_FLOOR)],
            ),
            ModelSpec::Custom { potential, gradient, m } => {
                require_m(*m)?;
                let pot = Expression::parse(potential)?;
                if pot.max_var() > *m {
                    return Err(Error::InvalidArgument(format!(
                        "potential references u{} but m = {m}",
                        pot.max_var()
                    )));
                }
                let grad = match gradient {
                    None => None,
                    Some(gs) => {
                        if gs.len() != *m {
                            return Err(Error::InvalidArgument(format!(
                                "{} gradient expressions for m = {m}",
                                gs.len()
                            )));
                        }
                        let mut parsed = Vec::with_capacity(gs.len());
                        for g in gs {
                            let e = Expression::parse(g)?;
                            if e.max_var() > *m {
                                return Err(Error::InvalidArgument(format!(
                                    "gradient references u{} but m = {m}",
                                    e.max_var()
                                )));
                            }
                            parsed.push(e);
                        }
                        Some(parsed)
                    }
                };
                let model = Self {
                    spec: spec.clone(),
                    eval: Evaluator::Custom {
                        potential: pot,
                        gradient: grad,
                    },
                    m: *m,
                    domain: vec![ComponentDomain::All; *m],
                };
                if let Evaluator::Custom { gradient: Some(_), .. } = &model.eval {
                    model.cross_check_custom()?;
                }
                return Ok(model);
            }
        };
        Ok(Self {
            spec: spec.clone(),
            eval,
            m,
            domain,
        })
    }

    /// Refuses custom pairs whose supplied gradient disagrees with the
    /// central-difference gradient of the potential on a sample.
    fn cross_check_custom(&self) -> Result<()> {
        let probes: &[f64] = &[0.3, 0.9, 1.7, -0.6, 2.4];
        let mut u = vec![0.0; self.m];
        let mut fd = vec![0.0; self.m];
        let mut given = vec![0.0; self.m];
        for (k, &base) in probes.iter().enumerate() {
            for i in 0..self.m {
                u[i] = base + 0.17 * (i as f64 + 1.0) * if k % 2 == 0 { 1.0 } else { -1.0 };
            }
            if self.potential(&u).is_err() {
                continue;
            }
            self.fd_gradient_into(&u, 1e-6, &mut fd)?;
            self.gradient_into(&u, &mut given)?;
            for i in 0..self.m {
                let dev = (fd[i] - given[i]).abs();
                let scale = 1.0 + fd[i].abs().max(given[i].abs());
                if !dev.is_finite() || dev > 1e-6 * scale {
                    return Err(Error::InconsistentCustomModel {
                        point: u.clone(),
                        deviation: dev,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> &[ComponentDomain] {
        &self.domain
    }

    pub fn describe(&self) -> String {
        match &self.spec {
            ModelSpec::Zero { m } => format!("zero(m={m})"),
            ModelSpec::CoupledLinear { c } => format!("coupled_linear(c={c})"),
            ModelSpec::GinzburgLandau { epsilon, m } => {
                format!("ginzburg_landau(epsilon={epsilon}, m={m})")
            }
            ModelSpec::CoupledPower { p, q, c } => format!("coupled_power(p={p}, q={q}, c={c})"),
            ModelSpec::SinglePower { p } => format!("single_power(p={p})"),
            ModelSpec::LogPotential { c } => format!("log_potential(c={c})"),
            ModelSpec::Custom { potential, .. } => format!("custom(F={potential})"),
        }
    }

    /// Rejects points outside the admissible domain, naming the offending
    /// component. Evaluation never clamps.
    pub fn check_domain(&self, u: &[f64]) -> Result<()> {
        debug_assert_eq!(u.len(), self.m);
        for (i, (&v, dom)) in u.iter().zip(&self.domain).enumerate() {
            if !dom.contains(v) {
                return Err(Error::ModelDomain {
                    model: self.describe(),
                    component: i,
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// The scalar potential `F(u)`.
    pub fn potential(&self, u: &[f64]) -> Result<f64> {
        self.check_domain(u)?;
        Ok(self.potential_unchecked(u))
    }

    fn potential_unchecked(&self, u: &[f64]) -> f64 {
        match &self.eval {
            Evaluator::Zero => 0.0,
            Evaluator::CoupledLinear { c } => u[0] * u[1] + c,
            Evaluator::GinzburgLandau { inv_eps2 } => {
                let s: f64 = u.iter().map(|v| v * v).sum();
                -0.25 * inv_eps2 * (1.0 - s) * (1.0 - s)
            }
            Evaluator::CoupledPower { p, q, c } => {
                u[0].powf(p + 1.0) * u[1].powf(q + 1.0) / ((p + 1.0) * (q + 1.0)) + c
            }
            Evaluator::SinglePower { p } => u[0].powf(p + 1.0) / (p + 1.0),
            Evaluator::LogPotential { c } => u[0].ln() + c,
            Evaluator::Custom { potential, .. } => potential.eval(u),
        }
    }

    /// The gradient `f(u) = grad F(u)`, componentwise.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.m];
        self.gradient_into(u, &mut out)?;
        Ok(out)
    }

    pub fn gradient_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_domain(u)?;
        debug_assert_eq!(out.len(), self.m);
        match &self.eval {
            Evaluator::Zero => out.fill(0.0),
            Evaluator::CoupledLinear { .. } => {
                out[0] = u[1];
                out[1] = u[0];
            }
            Evaluator::GinzburgLandau { inv_eps2 } => {
                let s: f64 = u.iter().map(|v| v * v).sum();
                let factor = inv_eps2 * (1.0 - s);
                for (o, &v) in out.iter_mut().zip(u) {
                    *o = factor * v;
                }
            }
            Evaluator::CoupledPower { p, q, .. } => {
                out[0] = u[0].powf(*p) * u[1].powf(q + 1.0) / (q + 1.0);
                out[1] = u[0].powf(p + 1.0) * u[1].powf(*q) / (p + 1.0);
            }
            Evaluator::SinglePower { p } => out[0] = u[0].powf(*p),
            Evaluator::LogPotential { .. } => out[0] = 1.0 / u[0],
            Evaluator::Custom { gradient, potential } => match gradient {
                Some(gs) => {
                    for (o, g) in out.iter_mut().zip(gs) {
                        *o = g.eval(u);
                    }
                }
                None => {
                    let mut tmp = vec![0.0; self.m];
                    // unchecked FD on purpose: domain already validated
                    fd_gradient(
                        |v| potential.eval(v),
                        u,
                        1e-6,
                        &mut tmp,
                    );
                    out.copy_from_slice(&tmp);
                }
            },
        }
        Ok(())
    }

    /// `sum_i u_i f_i(u)` without allocating.
    pub fn u_dot_f(&self, u: &[f64]) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match &self.eval {
            Evaluator::Zero => 0.0,
            Evaluator::CoupledLinear { .. } => 2.0 * u[0] * u[1],
            Evaluator::GinzburgLandau { inv_eps2 } => {
                let s: f64 = u.iter().map(|v| v * v).sum();
                inv_eps2 * (1.0 - s) * s
            }
            Evaluator::CoupledPower { p, q, .. } => {
                let prod = u[0].powf(p + 1.0) * u[1].powf(q + 1.0);
                prod / (q + 1.0) + prod / (p + 1.0)
            }
            Evaluator::SinglePower { p } => u[0].powf(p + 1.0),
            Evaluator::LogPotential { .. } => 1.0,
            Evaluator::Custom { .. } => {
                let mut f = vec![0.0; self.m];
                self.gradient_into(u, &mut f)?;
                u.iter().zip(&f).map(|(a, b)| a * b).sum()
            }
        })
    }

    /// The interior quantity `2 (beta - 1) F(u) - beta u . f(u)` whose sign
    /// drives admissibility of the index `beta`.
    pub fn interior_integrand(&self, beta: f64, u: &[f64]) -> Result<f64> {
        let f_val = self.potential(u)?;
        let udf = self.u_dot_f(u)?;
        Ok(2.0 * (beta - 1.0) * f_val - beta * udf)
    }

    /// Central-difference gradient of the potential; the consistency
    /// oracle for `gradient`.
    pub fn fd_gradient_into(&self, u: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        self.check_domain(u)?;
        let me = &self.eval;
        fd_gradient(
            |v| match me {
                Evaluator::Custom { potential, .. } => potential.eval(v),
                _ => self.potential_unchecked(v),
            },
            u,
            h,
            out,
        );
        Ok(())
    }

    /// Hessian of `F` by central differences of the gradient; used by the
    /// Newton solvers.
    pub fn hessian_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.m * self.m);
        let mut up = u.to_vec();
        let mut fp = vec![0.0; self.m];
        let mut fm = vec![0.0; self.m];
        for j in 0..self.m {
            let h = 1e-6 * (1.0 + u[j].abs());
            let orig = u[j];
            up[j] = orig + h;
            let plus_ok = self.gradient_into(&up, &mut fp).is_ok();
            up[j] = orig - h;
            let minus_ok = self.gradient_into(&up, &mut fm).is_ok();
            up[j] = orig;
            if plus_ok && minus_ok {
                for i in 0..self.m {
                    out[i * self.m + j] = (fp[i] - fm[i]) / (2.0 * h);
                }
            } else {
                // one-sided at the domain edge
                let mut f0 = vec![0.0; self.m];
                self.gradient_into(u, &mut f0)?;
                if plus_ok {
                    up[j] = orig + h;
                    self.gradient_into(&up, &mut fp)?;
                    up[j] = orig;
                    for i in 0..self.m {
                        out[i * self.m + j] = (fp[i] - f0[i]) / h;
                    }
                } else {
                    up[j] = orig - h;
                    self.gradient_into(&up, &mut fm)?;
                    up[j] = orig;
                    for i in 0..self.m {
                        out[i * self.m + j] = (f0[i] - fm[i]) / h;
                    }
                }
            }
        }
        Ok(())
    }
}

fn require_m(m: usize) -> Result<()> {
    if m >= 1 && m <= 8 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "component count m must be between 1 and 8, got {m}"
        )))
    }
}

fn fd_gradient(f: impl Fn(&[f64]) -> f64, u: &[f64], h: f64, out: &mut [f64]) {
    let mut v = u.to_vec();
    for j in 0..u.len() {
        let orig = v[j];
        v[j] = orig + h;
        let plus = f(&v);
        v[j] = orig - h;
        let minus = f(&v);
        v[j] = orig;
        out[j] = (plus - minus) / (2.0 * h);
    }
}

/// Per-beta admissibility over a probed box of `u` values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub betas: Vec<f64>,
    /// Minimum of the interior integrand over the probed box, per beta.
    pub min_interior: Vec<f64>,
    /// `min_interior >= -tolerance`, per beta.
    pub admissible: Vec<bool>,
    pub tolerance: f64,
    pub probed_box: Vec<[f64; 2]>,
    pub samples_per_axis: usize,
}

/// Scans `beta` over `[beta_lo, beta_hi]` (inclusive, `n_beta >= 2` nodes)
/// and minimizes the interior integrand over a dense sample of `u_box`.
pub fn pointwise_beta_interval(
    model: &NonlinearityModel,
    u_box: &[[f64; 2]],
    beta_lo: f64,
    beta_hi: f64,
    n_beta: usize,
    samples_per_axis: usize,
    tolerance: f64,
) -> Result<AdmissibilityReport> {
    let m = model.components();
    if u_box.len() != m {
        return Err(Error::InvalidArgument(format!(
            "u_box has {} intervals for m = {m}",
            u_box.len()
        )));
    }
    for (i, iv) in u_box.iter().enumerate() {
        if !(iv[0] <= iv[1]) {
            return Err(Error::InvalidArgument(format!(
                "u_box component {i} is empty: [{}, {}]",
                iv[0], iv[1]
            )));
        }
        for v in iv {
            if !model.domain()[i].contains(*v) {
                return Err(Error::ModelDomain {
                    model: model.describe(),
                    component: i,
                    value: *v,
                });
            }
        }
    }
    if n_beta < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 beta nodes, got {n_beta}"
        )));
    }
    if samples_per_axis < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 samples per axis".to_string(),
        ));
    }
    let total: usize = samples_per_axis.pow(m as u32);
    if total > 4_000_000 {
        return Err(Error::InvalidArgument(format!(
            "{total} box samples would be probed; lower samples_per_axis"
        )));
    }

    // (F, u.f) per sample is beta-independent; precompute once.
    let mut pairs = Vec::with_capacity(total);
    let mut u = vec![0.0; m];
    for flat in 0..total {
        let mut rem = flat;
        for i in 0..m {
            let k = rem % samples_per_axis;
            rem /= samples_per_axis;
            let frac = k as f64 / (samples_per_axis - 1) as f64;
            u[i] = u_box[i][0] + frac * (u_box[i][1] - u_box[i][0]);
        }
        pairs.push((model.potential(&u)?, model.u_dot_f(&u)?));
    }

    let mut betas = Vec::with_capacity(n_beta);
    let mut min_interior = Vec::with_capacity(n_beta);
    let mut admissible = Vec::with_capacity(n_beta);
    for k in 0..n_beta {
        let beta = beta_lo + (beta_hi - beta_lo) * k as f64 / (n_beta - 1) as f64;
        let mut min_val = f64::INFINITY;
        for &(fv, udf) in &pairs {
            let val = 2.0 * (beta - 1.0) * fv - beta * udf;
            if val < min_val {
                min_val = val;
            }
        }
        betas.push(beta);
        min_interior.push(min_val);
        admissible.push(min_val >= -tolerance);
    }
    Ok(AdmissibilityReport {
        betas,
        min_interior,
        admissible,
        tolerance,
        probed_box: u_box.to_vec(),
        samples_per_axis,
    })
}
