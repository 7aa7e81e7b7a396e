//! Finite-dimensional stand-ins for the Banach space `𝓑` and for
//! trajectories `φ ∈ Lᵖ(I; 𝓑)` on a uniform time grid.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Which norm the discretized space carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `max_i |v_i|`
    Sup,
    /// `(Σ |v_i|^p)^{1/p}`, `p ∈ [1, ∞)`
    PNorm(f64),
    /// Cell-weighted ℓ², approximating the L² norm of a grid function.
    GridL2 { cell_width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDescriptor {
    dim: usize,
    norm_kind: NormKind,
    label: String,
}

impl SpaceDescriptor {
    pub fn new(dim: usize, norm_kind: NormKind, label: impl Into<String>) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        match norm_kind {
            NormKind::PNorm(p) if !(p >= 1.0 && p.is_finite()) => {
                return Err(Error::invalid("p", format!("p-norm needs p in [1, inf), got {p}")));
            }
            NormKind::GridL2 { cell_width } if !(cell_width > 0.0 && cell_width.is_finite()) => {
                return Err(Error::invalid("cell_width", format!("must be positive, got {cell_width}")));
            }
            _ => {}
        }
        Ok(Arc::new(SpaceDescriptor { dim, norm_kind, label: label.into() }))
    }

    /// One-dimensional scalar space with the modulus as norm.
    pub fn scalar() -> Arc<Self> {
        Self::new(1, NormKind::Sup, "scalar").expect("valid scalar space")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Norm of a raw coordinate slice. Fails if the length does not match `dim`.
    pub fn norm_of(&self, coords: &[C64]) -> Result<f64> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: coords.len() });
        }
        Ok(self.norm_unchecked(coords))
    }

    pub(crate) fn norm_unchecked(&self, coords: &[C64]) -> f64 {
        match self.norm_kind {
            NormKind::Sup => coords.iter().map(|z| z.norm()).fold(0.0, f64::max),
            NormKind::PNorm(p) => {
                if p == 1.0 {
                    coords.iter().map(|z| z.norm()).sum()
                } else if p == 2.0 {
                    coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
                } else {
                    // scale by the largest modulus so that |z|^p cannot overflow
                    let scale = coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    if scale == 0.0 {
                        return 0.0;
                    }
                    let s: f64 = coords.iter().map(|z| (z.norm() / scale).powf(p)).sum();
                    scale * s.powf(1.0 / p)
                }
            }
            NormKind::GridL2 { cell_width } => {
                (cell_width * coords.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
            }
        }
    }

    fn ensure_same(&self, other: &SpaceDescriptor) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { left: self.label.clone(), right: other.label.clone() })
        }
    }
}

/// A vector in a [`SpaceDescriptor`]; the coordinate count always equals `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct BanachElement {
    coords: Vec<C64>,
    space: Arc<SpaceDescriptor>,
}

impl BanachElement {
    pub fn new(space: &Arc<SpaceDescriptor>, coords: Vec<C64>) -> Result<Self> {
        if coords.len() != space.dim {
            return Err(Error::DimensionMismatch { expected: space.dim, found: coords.len() });
        }
        Ok(BanachElement { coords, space: Arc::clone(space) })
    }

    pub fn zeros(space: &Arc<SpaceDescriptor>) -> Self {
        BanachElement { coords: vec![C64::new(0.0, 0.0); space.dim], space: Arc::clone(space) }
    }

    pub fn from_real(space: &Arc<SpaceDescriptor>, coords: &[f64]) -> Result<Self> {
        Self::new(space, coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [C64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.coords
    }

    pub fn space(&self) -> &Arc<SpaceDescriptor> {
        &self.space
    }

    pub fn norm(&self) -> f64 {
        self.space.norm_unchecked(&self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scale(&self, a: C64) -> BanachElement {
        BanachElement { coords: self.coords.iter().map(|&z| a * z).collect(), space: Arc::clone(&self.space) }
    }

    pub fn same_space(&self, other: &BanachElement) -> Result<()> {
        self.space.ensure_same(&other.space)
    }
}

/// Returns `a·x + y`.
pub fn axpy(a: C64, x: &BanachElement, y: &BanachElement) -> Result<BanachElement> {
    x.same_space(y)?;
    let coords = x.coords.iter().zip(&y.coords).map(|(&xi, &yi)| a * xi + yi).collect();
    Ok(BanachElement { coords, space: Arc::clone(&y.space) })
}

/// Exponent `p ∈ [1, ∞]` of a time-Lebesgue norm. Infinity is its own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(LpExponent::Infinity);
        }
        if !(p >= 1.0) {
            return Err(Error::invalid("p", format!("Lebesgue exponent must be >= 1, got {p}")));
        }
        Ok(LpExponent::Finite(p))
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> LpExponent {
        match self {
            LpExponent::Infinity => LpExponent::Finite(1.0),
            LpExponent::Finite(1.0) => LpExponent::Infinity,
            LpExponent::Finite(p) => LpExponent::Finite(p / (p - 1.0)),
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            LpExponent::Infinity => 0.0,
            LpExponent::Finite(p) => 1.0 / p,
        }
    }

    /// True for the two endpoint cases that share the `tⁿ/n!` majorant.
    pub fn is_endpoint(self) -> bool {
        matches!(self, LpExponent::Infinity) || self == LpExponent::Finite(1.0)
    }

    pub(crate) fn validate(self) -> Result<Self> {
        match self {
            LpExponent::Finite(p) => LpExponent::finite(p),
            LpExponent::Infinity => Ok(self),
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpExponent::Infinity => write!(f, "inf"),
            LpExponent::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl std::str::FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(LpExponent::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::invalid("p", format!("cannot parse `{s}`")))?;
                LpExponent::finite(p)
            }
        }
    }
}

/// Uniform grid `t_i = i·T/n`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("T", format!("must be positive and finite, got {horizon}")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        Ok(TimeGrid { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.horizon
        } else {
            i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |i| self.node(i))
    }

    /// Index of the node equal to `t` (within a small fraction of a step).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        if !(t >= -1e-9 * self.step() && t <= self.horizon + 1e-9 * self.step()) {
            return None;
        }
        let x = t / self.step();
        let i = x.round();
        ((x - i).abs() <= 1e-9).then_some(i as usize)
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.horizon;
        if t.is_finite() && t >= -slack && t <= self.horizon + slack {
            Ok(())
        } else {
            Err(Error::OutOfDomain { value: t, horizon: self.horizon })
        }
    }
}

/// Composite trapezoid over the first `upto + 1` samples with spacing `h`.
pub(crate) fn trapezoid(samples: impl IntoIterator<Item = f64>, upto: usize, h: f64) -> f64 {
    if upto == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (j, v) in samples.into_iter().take(upto + 1).enumerate() {
        let w = if j == 0 || j == upto { 0.5 } else { 1.0 };
        sum += w * v;
    }
    h * sum
}

/// A time-gridded function `I → 𝓑`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    space: Arc<SpaceDescriptor>,
    values: Vec<BanachElement>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, space: &Arc<SpaceDescriptor>, values: Vec<BanachElement>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::DimensionMismatch { expected: grid.n_nodes(), found: values.len() });
        }
        for v in &values {
            space.ensure_same(&v.space)?;
        }
        Ok(Trajectory { grid, space: Arc::clone(space), values })
    }

    pub fn zeros(grid: TimeGrid, space: &Arc<SpaceDescriptor>) -> Self {
        let values = (0..grid.n_nodes()).map(|_| BanachElement::zeros(space)).collect();
        Trajectory { grid, space: Arc::clone(space), values }
    }

    /// Samples `f(t)` at every node.
    pub fn from_fn(
        grid: TimeGrid,
        space: &Arc<SpaceDescriptor>,
        mut f: impl FnMut(f64) -> Vec<C64>,
    ) -> Result<Self> {
        let values = grid.nodes().map(|t| BanachElement::new(space, f(t))).collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { grid, space: Arc::clone(space), values })
    }

    /// The same element at every node.
    pub fn constant(grid: TimeGrid, value: &BanachElement) -> Self {
        Trajectory { grid, space: Arc::clone(&value.space), values: vec![value.clone(); grid.n_nodes()] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn space(&self) -> &Arc<SpaceDescriptor> {
        &self.space
    }

    pub fn values(&self) -> &[BanachElement] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &BanachElement {
        &self.values[i]
    }

    pub fn node_norms(&self) -> Vec<f64> {
        self.values.iter().map(BanachElement::norm).collect()
    }

    /// `‖φ‖_{Lᵖ(0,T; 𝓑)}`; for finite `p` the time integral is a composite trapezoid.
    pub fn lp_time_norm(&self, p: LpExponent) -> Result<f64> {
        self.lp_time_norm_upto(self.grid.n_steps, p)
    }

    /// Same norm restricted to `J = (0, t_upto)`.
    pub fn lp_time_norm_upto(&self, upto: usize, p: LpExponent) -> Result<f64> {
        let p = p.validate()?;
        if upto > self.grid.n_steps {
            return Err(Error::invalid("upto", format!("node {upto} beyond grid")));
        }
        let norms = self.values[..=upto].iter().map(BanachElement::norm);
        Ok(match p {
            LpExponent::Infinity => norms.fold(0.0, f64::max),
            LpExponent::Finite(p) => {
                let scale = self.values[..=upto].iter().map(BanachElement::norm).fold(0.0, f64::max);
                if scale == 0.0 {
                    return Ok(0.0);
                }
                let integral = trapezoid(norms.map(|n| (n / scale).powf(p)), upto, self.grid.step());
                scale * integral.powf(1.0 / p)
            }
        })
    }

    fn ensure_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        self.space.ensure_same(&other.space)
    }

    /// Node-wise `a·x + self`.
    pub fn axpy(&self, a: C64, x: &Trajectory) -> Result<Trajectory> {
        self.ensure_compatible(x)?;
        let values = x.values.iter().zip(&self.values).map(|(xi, yi)| axpy(a, xi, yi)).collect::<Result<_>>()?;
        Ok(Trajectory { grid: self.grid, space: Arc::clone(&self.space), values })
    }

    pub(crate) fn add_assign(&mut self, other: &Trajectory) -> Result<()> {
        self.ensure_compatible(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            for (x, y) in a.coords.iter_mut().zip(&b.coords) {
                *x += *y;
            }
        }
        Ok(())
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// `max_i ‖self(t_i) − other(t_i)‖`.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let diff: Vec<C64> = a.coords.iter().zip(&b.coords).map(|(x, y)| x - y).collect();
                self.space.norm_unchecked(&diff)
            })
            .fold(0.0, f64::max))
    }
}
