//! Operator-valued Volterra kernels `A(t,τ): 𝓑 → 𝓑` with a uniform bound `D`.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::schrodinger::{FreePropagator, SpatialGrid};
use crate::state_space::{BanachElement, NormKind, SpaceDescriptor, TimeGrid};
use crate::{Error, Result, C64};

/// Anything the Picard engine can integrate against.
///
/// `apply_nodes` is only ever called with `j ≤ i` by the engine and the
/// collocation oracle; implementations may do anything for `j > i`.
pub trait VolterraKernel: Send + Sync {
    fn space(&self) -> &Arc<SpaceDescriptor>;

    fn time_grid(&self) -> &TimeGrid;

    /// `D` with `‖A(t,τ)‖ ≤ D` on the lower triangle `τ ≤ t`.
    fn uniform_bound(&self) -> f64;

    /// `out ← A(t_i, t_j) v`.
    fn apply_nodes(&self, i: usize, j: usize, v: &[C64], out: &mut [C64]);
}

/// `ħ` and `m`; `a² = ħ²/2m`. Defaults `ħ = 1`, `m = 1/2` so that `a² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams { hbar: 1.0, mass: 0.5 }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        PhysicalParams { hbar, mass }.validate()
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::invalid("hbar", format!("must be positive, got {}", self.hbar)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mass", format!("must be positive, got {}", self.mass)));
        }
        Ok(self)
    }

    pub fn a_squared(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

/// Named bounded real potentials `V(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialShape {
    Constant { value: f64 },
    /// `amplitude / (1 + (x/width)²)`
    Lorentzian { amplitude: f64, width: f64 },
    /// `amplitude · exp(−x²/width²) · cos(ωt)`
    GaussianPulse { amplitude: f64, width: f64, omega: f64 },
}

impl PotentialShape {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match *self {
            PotentialShape::Constant { value } => value,
            PotentialShape::Lorentzian { amplitude, width } => amplitude / (1.0 + (x / width).powi(2)),
            PotentialShape::GaussianPulse { amplitude, width, omega } => {
                amplitude * (-(x / width).powi(2)).exp() * (omega * t).cos()
            }
        }
    }

    fn analytic_sup(&self) -> f64 {
        match *self {
            PotentialShape::Constant { value } => value.abs(),
            PotentialShape::Lorentzian { amplitude, .. } | PotentialShape::GaussianPulse { amplitude, .. } => {
                amplitude.abs()
            }
        }
    }
}

/// A potential together with its sup bound `C = ‖V‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub shape: PotentialShape,
    sup_bound: f64,
}

impl PotentialSpec {
    pub fn new(shape: PotentialShape) -> Self {
        PotentialSpec { shape, sup_bound: shape.analytic_sup() }
    }

    /// Use an explicit `C`; it is checked against samples when a kernel is built.
    pub fn with_bound(shape: PotentialShape, sup_bound: f64) -> Result<Self> {
        if !(sup_bound >= 0.0 && sup_bound.is_finite()) {
            return Err(Error::invalid("sup_bound", format!("must be finite and nonnegative, got {sup_bound}")));
        }
        Ok(PotentialSpec { shape, sup_bound })
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.shape.eval(x, t)
    }

    /// `|V(x_j, t_i)| ≤ C` on every grid sample.
    pub fn check_bound(&self, grid: &SpatialGrid, time_grid: &TimeGrid) -> Result<()> {
        for t in time_grid.nodes() {
            for x in grid.points() {
                let v = self.eval(x, t);
                if !(v.abs() <= self.sup_bound * (1.0 + 1e-12)) {
                    return Err(Error::invalid(
                        "sup_bound",
                        format!("|V({x}, {t})| = {} exceeds declared bound {}", v.abs(), self.sup_bound),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Named scalar functions `k(t, τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothFn {
    Constant { value: C64 },
    /// `scale · Σ w_j exp(−r_j (t−τ))`: a completely monotone memory kernel.
    ExpMixture { scale: f64, weights: Vec<f64>, rates: Vec<f64> },
    /// `scale · cos(ω(t−τ))`
    Oscillating { scale: f64, omega: f64 },
    /// `scale · exp(a t + b τ)`
    Exponential { scale: f64, a: f64, b: f64 },
}

impl SmoothFn {
    pub fn eval(&self, t: f64, tau: f64) -> C64 {
        let re = |x: f64| C64::new(x, 0.0);
        match self {
            SmoothFn::Constant { value } => *value,
            SmoothFn::ExpMixture { scale, weights, rates } => {
                let s = t - tau;
                re(scale * weights.iter().zip(rates).map(|(w, r)| w * (-r * s).exp()).sum::<f64>())
            }
            SmoothFn::Oscillating { scale, omega } => re(scale * (omega * (t - tau)).cos()),
            SmoothFn::Exponential { scale, a, b } => re(scale * (a * t + b * tau).exp()),
        }
    }

    fn validate(&self) -> Result<()> {
        if let SmoothFn::ExpMixture { weights, rates, .. } = self {
            if weights.len() != rates.len() || weights.is_empty() {
                return Err(Error::invalid("weights", "exp_mixture needs equally many weights and rates"));
            }
        }
        Ok(())
    }

    fn sup_on_triangle(&self, grid: &TimeGrid) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..grid.n_nodes() {
            for j in 0..=i {
                best = best.max(self.eval(grid.node(i), grid.node(j)).norm());
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelVariant {
    ScalarConstant(C64),
    ScalarSmooth(SmoothFn),
    /// `A(t,τ) = g(t,τ)·B` with `B` row-major `dim × dim`.
    MatrixSeparable { matrix: Vec<C64>, g: SmoothFn },
    /// Samples `K(x_a, t_i; y_b, τ_j)`, laid out as `[i][j][a][b]` over all node pairs.
    /// `(A v)_a = w Σ_b K_ab v_b` with `w` the cell width of the space.
    HilbertSchmidtGrid { samples: Vec<C64> },
    DysonSchrodinger { potential: PotentialSpec, params: PhysicalParams, propagator: Arc<FreePropagator> },
}

/// A kernel bound to its time grid and Banach space.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    variant: KernelVariant,
    declared_bound: Option<f64>,
    grid: TimeGrid,
    space: Arc<SpaceDescriptor>,
    computed_bound: OnceLock<f64>,
}

impl KernelSpec {
    pub fn new(variant: KernelVariant, grid: TimeGrid, space: Arc<SpaceDescriptor>) -> Result<Self> {
        let dim = space.dim();
        match &variant {
            KernelVariant::ScalarConstant(_) | KernelVariant::ScalarSmooth(_) if dim != 1 => {
                return Err(Error::DimensionMismatch { expected: 1, found: dim });
            }
            KernelVariant::ScalarSmooth(g) => g.validate()?,
            KernelVariant::MatrixSeparable { matrix, g } => {
                g.validate()?;
                if matrix.len() != dim * dim {
                    return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.len() });
                }
            }
            KernelVariant::HilbertSchmidtGrid { samples } => {
                let expected = grid.n_nodes() * grid.n_nodes() * dim * dim;
                if samples.len() != expected {
                    return Err(Error::DimensionMismatch { expected, found: samples.len() });
                }
            }
            KernelVariant::DysonSchrodinger { propagator, .. } => {
                let n = propagator.grid().n_points();
                if dim != n || !matches!(space.norm_kind(), NormKind::GridL2 { .. }) {
                    return Err(Error::invalid("space", "Dyson kernel needs the grid L2 space of its propagator"));
                }
            }
            _ => {}
        }
        Ok(KernelSpec { variant, declared_bound: None, grid, space, computed_bound: OnceLock::new() })
    }

    pub fn scalar_constant(lambda: C64, grid: TimeGrid) -> Self {
        Self::new(KernelVariant::ScalarConstant(lambda), grid, SpaceDescriptor::scalar()).expect("scalar space")
    }

    pub fn scalar_smooth(g: SmoothFn, grid: TimeGrid) -> Result<Self> {
        Self::new(KernelVariant::ScalarSmooth(g), grid, SpaceDescriptor::scalar())
    }

    pub fn with_declared_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::invalid("declared_bound", format!("must be finite and nonnegative, got {bound}")));
        }
        self.declared_bound = Some(bound);
        Ok(self)
    }

    pub fn variant(&self) -> &KernelVariant {
        &self.variant
    }

    pub fn declared_bound(&self) -> Option<f64> {
        self.declared_bound
    }

    /// Mutable access to the sampled kernel at node pair `(i, j)`; `None` for
    /// other variants.
    pub fn hs_block_mut(&mut self, i: usize, j: usize) -> Option<&mut [C64]> {
        let n = self.grid.n_nodes();
        let d2 = self.space.dim() * self.space.dim();
        self.computed_bound = OnceLock::new();
        match &mut self.variant {
            KernelVariant::HilbertSchmidtGrid { samples } => {
                let start = (i * n + j) * d2;
                Some(&mut samples[start..start + d2])
            }
            _ => None,
        }
    }

    fn cell_weight(&self) -> f64 {
        match self.space.norm_kind() {
            NormKind::GridL2 { cell_width } => cell_width,
            _ => 1.0,
        }
    }

    fn hs_block<'a>(&self, samples: &'a [C64], i: usize, j: usize) -> &'a [C64] {
        let n = self.grid.n_nodes();
        let d2 = self.space.dim() * self.space.dim();
        let start = (i * n + j) * d2;
        &samples[start..start + d2]
    }

    /// `A(t,τ)v`, zero for `τ > t`.
    pub fn apply(&self, t: f64, tau: f64, v: &BanachElement) -> Result<BanachElement> {
        self.grid.check_time(t)?;
        self.grid.check_time(tau)?;
        if v.space().as_ref() != self.space.as_ref() {
            return Err(Error::SpaceMismatch { left: self.space.label().to_string(), right: v.space().label().to_string() });
        }
        let mut out = BanachElement::zeros(&self.space);
        if tau > t {
            return Ok(out);
        }
        if let KernelVariant::HilbertSchmidtGrid { samples } = &self.variant {
            let (i, j) = self.grid.index_of(t).zip(self.grid.index_of(tau)).ok_or_else(|| {
                Error::invalid("t", "sampled Hilbert-Schmidt kernels are defined on grid nodes only")
            })?;
            self.hs_apply(samples, i, j, v.coords(), out.coords_mut());
        } else {
            self.apply_at_times(t, tau, v.coords(), out.coords_mut());
        }
        Ok(out)
    }

    fn hs_apply(&self, samples: &[C64], i: usize, j: usize, v: &[C64], out: &mut [C64]) {
        let dim = self.space.dim();
        let w = self.cell_weight();
        let block = self.hs_block(samples, i, j);
        for (a, o) in out.iter_mut().enumerate() {
            let row = &block[a * dim..(a + 1) * dim];
            *o = w * row.iter().zip(v).map(|(k, x)| k * x).sum::<C64>();
        }
    }

    fn apply_at_times(&self, t: f64, tau: f64, v: &[C64], out: &mut [C64]) {
        match &self.variant {
            KernelVariant::ScalarConstant(lambda) => out[0] = lambda * v[0],
            KernelVariant::ScalarSmooth(g) => out[0] = g.eval(t, tau) * v[0],
            KernelVariant::MatrixSeparable { matrix, g } => {
                let dim = self.space.dim();
                let gv = g.eval(t, tau);
                for (a, o) in out.iter_mut().enumerate() {
                    let row = &matrix[a * dim..(a + 1) * dim];
                    *o = gv * row.iter().zip(v).map(|(b, x)| b * x).sum::<C64>();
                }
            }
            KernelVariant::HilbertSchmidtGrid { .. } => unreachable!("handled by node lookup"),
            KernelVariant::DysonSchrodinger { potential, params, propagator } => {
                let grid = propagator.grid();
                for ((o, x), &z) in out.iter_mut().zip(grid.points()).zip(v) {
                    *o = potential.eval(x, tau) * z;
                }
                propagator.evolve_in_place(out, t - tau);
                let factor = C64::new(0.0, -1.0 / params.hbar);
                for o in out.iter_mut() {
                    *o *= factor;
                }
            }
        }
    }

    fn compute_bound(&self) -> f64 {
        let grid = &self.grid;
        match &self.variant {
            KernelVariant::ScalarConstant(lambda) => lambda.norm(),
            KernelVariant::ScalarSmooth(g) => g.sup_on_triangle(grid),
            KernelVariant::MatrixSeparable { matrix, g } => {
                operator_two_norm(matrix, self.space.dim()) * g.sup_on_triangle(grid)
            }
            KernelVariant::HilbertSchmidtGrid { samples } => {
                let w = self.cell_weight();
                let mut best: f64 = 0.0;
                for i in 0..grid.n_nodes() {
                    for j in 0..=i {
                        let frob = self.hs_block(samples, i, j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        best = best.max(w * frob);
                    }
                }
                best
            }
            KernelVariant::DysonSchrodinger { potential, params, .. } => potential.sup_bound() / params.hbar,
        }
    }

    /// Discrete Hilbert–Schmidt norm of the sampled block at `(i, j)`.
    pub fn hs_norm_at(&self, i: usize, j: usize) -> Option<f64> {
        match &self.variant {
            KernelVariant::HilbertSchmidtGrid { samples } => Some(
                self.cell_weight()
                    * self.hs_block(samples, i, j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            ),
            _ => None,
        }
    }
}

impl VolterraKernel for KernelSpec {
    fn space(&self) -> &Arc<SpaceDescriptor> {
        &self.space
    }

    fn time_grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn uniform_bound(&self) -> f64 {
        if let Some(d) = self.declared_bound {
            return d;
        }
        *self.computed_bound.get_or_init(|| self.compute_bound())
    }

    fn apply_nodes(&self, i: usize, j: usize, v: &[C64], out: &mut [C64]) {
        if j > i {
            out.fill(C64::new(0.0, 0.0));
            return;
        }
        match &self.variant {
            KernelVariant::HilbertSchmidtGrid { samples } => self.hs_apply(samples, i, j, v, out),
            _ => self.apply_at_times(self.grid.node(i), self.grid.node(j), v, out),
        }
    }
}

impl<K: VolterraKernel + ?Sized> VolterraKernel for &K {
    fn space(&self) -> &Arc<SpaceDescriptor> {
        (**self).space()
    }

    fn time_grid(&self) -> &TimeGrid {
        (**self).time_grid()
    }

    fn uniform_bound(&self) -> f64 {
        (**self).uniform_bound()
    }

    fn apply_nodes(&self, i: usize, j: usize, v: &[C64], out: &mut [C64]) {
        (**self).apply_nodes(i, j, v, out)
    }
}

fn mat_vec(matrix: &[C64], dim: usize, v: &[C64]) -> Vec<C64> {
    (0..dim).map(|a| matrix[a * dim..(a + 1) * dim].iter().zip(v).map(|(m, x)| m * x).sum()).collect()
}

fn mat_h_vec(matrix: &[C64], dim: usize, v: &[C64]) -> Vec<C64> {
    (0..dim).map(|b| (0..dim).map(|a| matrix[a * dim + b].conj() * v[a]).sum()).collect()
}

/// Largest singular value of a row-major `dim × dim` matrix by power
/// iteration on `BᴴB`.
pub fn operator_two_norm(matrix: &[C64], dim: usize) -> f64 {
    assert_eq!(matrix.len(), dim * dim);
    if matrix.iter().all(|z| z.norm() == 0.0) {
        return 0.0;
    }
    // fixed, non-symmetric start so no singular direction is systematically missed
    let mut v: Vec<C64> = (0..dim).map(|k| C64::new(1.0 / (k + 1) as f64, 0.37 * (k as f64 + 0.5).sin())).collect();
    let mut estimate = 0.0;
    for _ in 0..10_000 {
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= nv);
        let w = mat_h_vec(matrix, dim, &mat_vec(matrix, dim, &v));
        let lambda = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if lambda == 0.0 {
            return 0.0;
        }
        let converged = (lambda - estimate).abs() <= 1e-15 * lambda;
        estimate = lambda;
        v = w;
        if converged {
            break;
        }
    }
    estimate.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;
    use crate::schrodinger::build_dyson_kernel;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0, 16).unwrap()
    }

    #[test]
    fn scalar_constant_examples() {
        let k = KernelSpec::scalar_constant(c(2.0, 0.0), grid());
        let s = SpaceDescriptor::scalar();
        let v = BanachElement::from_real(&s, &[3.0]).unwrap();
        assert_eq!(k.apply(0.5, 0.25, &v).unwrap().coords()[0], c(6.0, 0.0));
        assert!(k.apply(0.25, 0.5, &v).unwrap().is_zero());
        assert_eq!(KernelSpec::scalar_constant(c(-3.0, 0.0), grid()).uniform_bound(), 3.0);
        assert!(matches!(k.apply(1.5, 0.0, &v), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn every_variant_vanishes_above_the_diagonal() {
        let g = grid();
        let scalar = SpaceDescriptor::scalar();
        let s3 = SpaceDescriptor::new(3, NormKind::GridL2 { cell_width: 0.5 }, "s3").unwrap();
        let mut rng = SplitRng::new(3);
        let kernels = vec![
            KernelSpec::scalar_constant(c(1.0, 1.0), g),
            KernelSpec::scalar_smooth(SmoothFn::Oscillating { scale: 2.0, omega: 3.0 }, g).unwrap(),
            KernelSpec::new(
                KernelVariant::MatrixSeparable {
                    matrix: (0..9).map(|_| rng.unit_square()).collect(),
                    g: SmoothFn::Exponential { scale: 1.0, a: 0.3, b: -0.2 },
                },
                g,
                s3.clone(),
            )
            .unwrap(),
            KernelSpec::new(
                KernelVariant::HilbertSchmidtGrid { samples: (0..17 * 17 * 9).map(|_| rng.unit_square()).collect() },
                g,
                s3.clone(),
            )
            .unwrap(),
        ];
        for k in &kernels {
            let space = if k.space().dim() == 1 { &scalar } else { &s3 };
            let v = BanachElement::new(space, vec![c(1.0, -2.0); space.dim()]).unwrap();
            assert!(k.apply(0.25, 0.5, &v).unwrap().is_zero());
            let mut out = vec![c(9.0, 9.0); space.dim()];
            k.apply_nodes(3, 7, v.coords(), &mut out);
            assert!(out.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn dyson_diagonal_is_multiplication() {
        let sg = SpatialGrid::new(-8.0, 8.0, 64).unwrap();
        let params = PhysicalParams::default();
        let k = build_dyson_kernel(PotentialSpec::new(PotentialShape::Constant { value: 0.7 }), sg, params, grid())
            .unwrap();
        let space = sg.space();
        let v = BanachElement::new(&space, sg.points().map(|x| c((-x * x).exp(), x.sin())).collect()).unwrap();
        let out = k.apply(0.5, 0.5, &v).unwrap();
        for (o, z) in out.coords().iter().zip(v.coords()) {
            assert!((o - c(0.0, -0.7) * z).norm() < 1e-14);
        }
        assert!((k.uniform_bound() - 0.7).abs() < 1e-15);
        // constant potential and unit vector: the bound is attained
        let unit = v.scale(c(1.0 / v.norm(), 0.0));
        let moved = k.apply(0.9, 0.1, &unit).unwrap();
        assert!((moved.norm() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn matrix_norm_example_and_sampling_cross_check() {
        // diag(5, 1) rotated: 2-norm 5
        let (cs, sn) = (0.6, 0.8);
        let m = vec![c(5.0 * cs, 0.0), c(-sn, 0.0), c(5.0 * sn, 0.0), c(cs, 0.0)];
        assert!((operator_two_norm(&m, 2) - 5.0).abs() < 1e-12);
        let space = SpaceDescriptor::new(2, NormKind::PNorm(2.0), "c2").unwrap();
        let k = KernelSpec::new(
            KernelVariant::MatrixSeparable { matrix: m, g: SmoothFn::Constant { value: c(0.0, 2.0) } },
            grid(),
            space,
        )
        .unwrap();
        assert!((k.uniform_bound() - 10.0).abs() < 1e-11);

        let mut rng = SplitRng::new(11);
        for dim in 1..=3 {
            for _ in 0..5 {
                let m: Vec<C64> = (0..dim * dim).map(|_| rng.unit_square() * 2.0 - c(1.0, 1.0)).collect();
                let power = operator_two_norm(&m, dim);
                let mut sampled: f64 = 0.0;
                for _ in 0..20_000 {
                    let v: Vec<C64> = (0..dim).map(|_| rng.unit_square() * 2.0 - c(1.0, 1.0)).collect();
                    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    let mv = mat_vec(&m, dim, &v);
                    sampled = sampled.max(mv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / nv);
                }
                assert!(sampled <= power * (1.0 + 1e-12), "sampling exceeded power iteration");
                assert!(sampled >= power * 0.97, "dim {dim}: sampled {sampled} vs power {power}");
            }
        }
    }

    #[test]
    fn apply_respects_uniform_bound() {
        let g = grid();
        let s4 = SpaceDescriptor::new(4, NormKind::GridL2 { cell_width: 0.25 }, "s4").unwrap();
        let mut rng = SplitRng::new(5);
        let hs = KernelSpec::new(
            KernelVariant::HilbertSchmidtGrid { samples: (0..17 * 17 * 16).map(|_| rng.unit_square()).collect() },
            g,
            s4.clone(),
        )
        .unwrap();
        let sep = KernelSpec::new(
            KernelVariant::MatrixSeparable {
                matrix: (0..16).map(|_| rng.unit_square()).collect(),
                g: SmoothFn::Oscillating { scale: 1.5, omega: 2.0 },
            },
            g,
            s4.clone(),
        )
        .unwrap();
        for k in [&hs, &sep] {
            let d = k.uniform_bound();
            for i in 0..=16 {
                for j in 0..=i {
                    let v = BanachElement::new(&s4, (0..4).map(|_| rng.unit_square() - c(0.5, 0.5)).collect()).unwrap();
                    let out = k.apply(g.node(i), g.node(j), &v).unwrap();
                    assert!(out.norm() <= d * v.norm() * (1.0 + 1e-10));
                    if let Some(hs_norm) = k.hs_norm_at(i, j) {
                        assert!(out.norm() <= hs_norm * v.norm() * (1.0 + 1e-12));
                    }
                }
            }
        }
        assert!(hs.apply(0.03, 0.0, &BanachElement::zeros(&s4)).is_err());
    }

    #[test]
    fn constructor_rejects_inconsistent_shapes() {
        let s2 = SpaceDescriptor::new(2, NormKind::Sup, "s2").unwrap();
        assert!(KernelSpec::new(KernelVariant::ScalarConstant(c(1.0, 0.0)), grid(), s2.clone()).is_err());
        assert!(KernelSpec::new(
            KernelVariant::MatrixSeparable { matrix: vec![c(1.0, 0.0); 3], g: SmoothFn::Constant { value: c(1.0, 0.0) } },
            grid(),
            s2
        )
        .is_err());
        let bad = SmoothFn::ExpMixture { scale: 1.0, weights: vec![1.0], rates: vec![] };
        assert!(KernelSpec::scalar_smooth(bad, grid()).is_err());
    }

    #[test]
    fn potential_bound_check_catches_understatement() {
        let sg = SpatialGrid::new(-4.0, 4.0, 16).unwrap();
        let lor = PotentialShape::Lorentzian { amplitude: 0.5, width: 1.0 };
        assert!(PotentialSpec::new(lor).check_bound(&sg, &grid()).is_ok());
        assert!(PotentialSpec::with_bound(lor, 0.3).unwrap().check_bound(&sg, &grid()).is_err());
        assert!(PhysicalParams::new(0.0, 1.0).is_err());
        assert_eq!(PhysicalParams::default().a_squared(), 1.0);
    }
}
