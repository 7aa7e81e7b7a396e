//! Free Schrödinger evolution on a periodic 1-D grid, the closed-form free
//! kernel, the Abel-regularized Poisson integral, and the Dyson kernel that
//! moves a bounded potential into a Volterra equation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::kernels::{KernelSpec, KernelVariant, PhysicalParams, PotentialSpec};
use crate::state_space::{BanachElement, NormKind, SpaceDescriptor, TimeGrid, Trajectory};
use crate::{Error, Result, C64};

/// Uniform periodic grid on `[x_min, x_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::invalid("x_max", format!("need x_max > x_min, got [{x_min}, {x_max}]")));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::invalid("n_points", format!("need a power of two >= 8, got {n_points}")));
        }
        Ok(SpatialGrid { x_min, x_max, n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Angular wavenumber of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n_points as isize;
        let m = if (j as isize) < n / 2 { j as isize } else { j as isize - n };
        2.0 * PI * m as f64 / self.length()
    }

    /// Banach space of grid functions with the cell-weighted L² norm.
    pub fn space(&self) -> Arc<SpaceDescriptor> {
        SpaceDescriptor::new(
            self.n_points,
            NormKind::GridL2 { cell_width: self.dx() },
            format!("L2[{}, {}; {}]", self.x_min, self.x_max, self.n_points),
        )
        .expect("grid parameters already validated")
    }
}

/// Spectral propagator `U_f(t)`; the FFT plans are shared read-only.
#[derive(Clone)]
pub struct FreePropagator {
    grid: SpatialGrid,
    params: PhysicalParams,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k_squared: Arc<Vec<f64>>,
}

impl fmt::Debug for FreePropagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FreePropagator").field("grid", &self.grid).field("params", &self.params).finish()
    }
}

impl PartialEq for FreePropagator {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.params == other.params
    }
}

impl FreePropagator {
    pub fn new(grid: SpatialGrid, params: PhysicalParams) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n_points);
        let inverse = planner.plan_fft_inverse(grid.n_points);
        let k_squared = (0..grid.n_points).map(|j| grid.wavenumber(j).powi(2)).collect();
        FreePropagator { grid, params, forward, inverse, k_squared: Arc::new(k_squared) }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// In-place `values ← U_f(t) values`: multiply mode `k` by `exp(−i a²k²t/ħ)`.
    pub fn evolve_in_place(&self, values: &mut [C64], t: f64) {
        assert_eq!(values.len(), self.grid.n_points, "wave length does not match grid");
        if t == 0.0 {
            return;
        }
        self.forward.process(values);
        let rate = self.params.a_squared() / self.params.hbar * t;
        let inv_n = 1.0 / self.grid.n_points as f64;
        for (z, &k2) in values.iter_mut().zip(self.k_squared.iter()) {
            *z *= C64::from_polar(inv_n, -rate * k2);
        }
        self.inverse.process(values);
    }
}

/// Values of a wavefunction on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub values: Vec<C64>,
    pub grid: SpatialGrid,
    pub params: PhysicalParams,
}

impl WaveState {
    pub fn new(values: Vec<C64>, grid: SpatialGrid, params: PhysicalParams) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::DimensionMismatch { expected: grid.n_points, found: values.len() });
        }
        Ok(WaveState { values, grid, params })
    }

    pub fn from_fn(grid: SpatialGrid, params: PhysicalParams, f: impl Fn(f64) -> C64) -> Self {
        WaveState { values: grid.points().map(f).collect(), grid, params }
    }

    pub fn zeros(grid: SpatialGrid, params: PhysicalParams) -> Self {
        WaveState { values: vec![C64::new(0.0, 0.0); grid.n_points], grid, params }
    }

    /// Discrete L² norm `(dx Σ|u_j|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn sup_distance(&self, other: &WaveState) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn to_element(&self, space: &Arc<SpaceDescriptor>) -> Result<BanachElement> {
        BanachElement::new(space, self.values.clone())
    }
}

/// Free kernel `(m/2πħit)^{n/2} exp(i m |x−y|²/2ħt)` as a function of `|x−y|²`.
pub fn free_kernel_nd(dist_sq: f64, t: f64, params: &PhysicalParams, n_dim: u32) -> Result<C64> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::invalid("t", "the free kernel is a distribution at t = 0"));
    }
    let base = C64::new(params.mass, 0.0) / C64::new(0.0, 2.0 * PI * params.hbar * t);
    let prefactor = base.powf(n_dim as f64 / 2.0);
    let phase = params.mass * dist_sq / (2.0 * params.hbar * t);
    Ok(prefactor * C64::from_polar(1.0, phase))
}

/// One-dimensional free kernel `K_f(x, y, t)`.
pub fn free_kernel(x: f64, y: f64, t: f64, params: &PhysicalParams) -> Result<C64> {
    free_kernel_nd((x - y) * (x - y), t, params, 1)
}

/// `U_f(t)ψ` by spectral evolution; exactly unitary on the grid up to rounding.
pub fn free_evolve(psi: &WaveState, t: f64) -> WaveState {
    let prop = FreePropagator::new(psi.grid, psi.params);
    let mut out = psi.clone();
    prop.evolve_in_place(&mut out.values, t);
    out
}

/// `∫ K_f(x−y, t) e^{−α|x−y|²/γ²} f(y) dy` on the grid, `γ² = 2ħ|t|/m`.
pub fn poisson_integral_quadrature(f: &WaveState, t: f64, alpha: f64) -> Result<WaveState> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("Abel factor must be positive, got {alpha}")));
    }
    let params = f.params;
    // validates t ≠ 0
    let prefactor = free_kernel_nd(0.0, t, &params, 1)?;
    let gamma_sq = 2.0 * params.hbar * t.abs() / params.mass;
    let phase_rate = params.mass / (2.0 * params.hbar * t);
    let grid = f.grid;
    let dx = grid.dx();
    let support: Vec<(f64, C64)> =
        grid.points().zip(&f.values).filter(|(_, v)| v.norm() > 0.0).map(|(y, &v)| (y, v)).collect();
    let values = grid
        .points()
        .map(|x| {
            let mut acc = C64::new(0.0, 0.0);
            for &(y, fy) in &support {
                let d2 = (x - y) * (x - y);
                let damp = (-alpha * d2 / gamma_sq).exp();
                acc += C64::from_polar(damp, phase_rate * d2) * fy;
            }
            prefactor * acc * dx
        })
        .collect();
    Ok(WaveState { values, grid, params })
}

/// Sup over the inner three quarters of the grid of `|U_f(t)f − f|`, per time.
pub fn initial_condition_sweep(f: &WaveState, times: &[f64]) -> Result<Vec<f64>> {
    for (k, &t) in times.iter().enumerate() {
        if !(t > 0.0) {
            return Err(Error::invalid("times", format!("entry {k} is not positive: {t}")));
        }
        if k > 0 && !(t < times[k - 1]) {
            return Err(Error::invalid("times", "must be strictly decreasing"));
        }
    }
    let prop = FreePropagator::new(f.grid, f.params);
    let n = f.grid.n_points;
    let (lo, hi) = (n / 8, n - n / 8);
    Ok(times
        .iter()
        .map(|&t| {
            let mut u = f.values.clone();
            prop.evolve_in_place(&mut u, t);
            (lo..hi).map(|j| (u[j] - f.values[j]).norm()).fold(0.0, f64::max)
        })
        .collect())
}

/// Gaussian wave packet `N exp(−(x−x₀)²/2σ² + ik₀x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianPacket {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
    /// Scale to unit L²(ℝ) norm.
    pub normalized: bool,
}

impl Default for GaussianPacket {
    fn default() -> Self {
        GaussianPacket::standard()
    }
}

impl GaussianPacket {
    pub fn standard() -> Self {
        GaussianPacket { center: 0.0, width: 1.0, momentum: 0.0, normalized: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid("sigma", format!("width must be positive, got {}", self.width)));
        }
        Ok(())
    }

    fn amplitude(&self) -> f64 {
        if self.normalized {
            (PI * self.width * self.width).powf(-0.25)
        } else {
            1.0
        }
    }

    /// Free evolution under `iħ∂ₜu = −a²∂ₓ²u`, i.e. `∂ₜu = iβ∂ₓ²u` with `β = a²/ħ`.
    ///
    /// The Gaussian variance parameter becomes `s = σ² + 2iβt`, the amplitude
    /// picks up `(σ²/s)^{1/2}` and the momentum shifts the centre by `2βk₀t`
    /// with phase `e^{ik₀x − iβk₀²t}`.
    pub fn evaluate(&self, x: f64, t: f64, params: &PhysicalParams) -> C64 {
        let beta = params.a_squared() / params.hbar;
        let sigma2 = self.width * self.width;
        let s = C64::new(sigma2, 2.0 * beta * t);
        let shift = x - self.center - 2.0 * beta * self.momentum * t;
        let envelope = (C64::new(sigma2, 0.0) / s).sqrt() * (-(shift * shift) / (2.0 * s)).exp();
        let phase = C64::from_polar(1.0, self.momentum * x - beta * self.momentum * self.momentum * t);
        self.amplitude() * envelope * phase
    }

    pub fn sample(&self, grid: SpatialGrid, params: PhysicalParams, t: f64) -> WaveState {
        WaveState::from_fn(grid, params, |x| self.evaluate(x, t, &params))
    }
}

/// Dyson kernel `A(t,τ)v = −(i/ħ) U_f(t−τ)[V(·,τ) v]` with declared bound `C/ħ`.
pub fn build_dyson_kernel(
    potential: PotentialSpec,
    grid: SpatialGrid,
    params: PhysicalParams,
    time_grid: TimeGrid,
) -> Result<KernelSpec> {
    potential.check_bound(&grid, &time_grid)?;
    let bound = potential.sup_bound() / params.hbar;
    let propagator = Arc::new(FreePropagator::new(grid, params));
    let variant = KernelVariant::DysonSchrodinger { potential, params, propagator };
    KernelSpec::new(variant, time_grid, grid.space())?.with_declared_bound(bound)
}

/// Source trajectory `t ↦ U_f(t)f₀` for the Dyson equation.
pub fn free_source(initial: &WaveState, time_grid: TimeGrid) -> Result<Trajectory> {
    let prop = FreePropagator::new(initial.grid, initial.params);
    let space = initial.grid.space();
    Trajectory::from_fn(time_grid, &space, |t| {
        let mut v = initial.values.clone();
        prop.evolve_in_place(&mut v, t);
        v
    })
}

/// Per-node check of `‖U_f f − u(t)‖ ≤ ħ⁻¹ t sup_{τ≤t} ‖V(τ)u(τ)‖`.
///
/// Returns `(gap, bound)` for every time node.
pub fn source_term_profile(
    solution: &Trajectory,
    free: &Trajectory,
    potential: &PotentialSpec,
    grid: &SpatialGrid,
    params: &PhysicalParams,
) -> Result<Vec<(f64, f64)>> {
    if solution.grid() != free.grid() {
        return Err(Error::GridMismatch);
    }
    let tg = *solution.grid();
    let space = solution.space();
    let mut running_sup: f64 = 0.0;
    let mut out = Vec::with_capacity(tg.n_nodes());
    for i in 0..tg.n_nodes() {
        let t = tg.node(i);
        let u = solution.at(i).coords();
        let vu: Vec<C64> = grid.points().zip(u).map(|(x, &z)| potential.eval(x, t) * z).collect();
        running_sup = running_sup.max(space.norm_of(&vu)?);
        let diff: Vec<C64> = free.at(i).coords().iter().zip(u).map(|(a, b)| a - b).collect();
        out.push((space.norm_of(&diff)?, t * running_sup / params.hbar));
    }
    Ok(out)
}
