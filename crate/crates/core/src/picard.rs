//! The discrete Volterra operator `Q̂φ(t) = ∫₀ᵗ A(t,τ)φ(τ)dτ` and the
//! Picard / Neumann iteration built on it.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{empirical_ratio, series_tail, simplex_excess, theorem_term_bound, MajorantQuery};
use crate::kernels::VolterraKernel;
use crate::state_space::{BanachElement, LpExponent, Trajectory};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub p: LpExponent,
    /// Stop once the certified tail drops below this.
    pub tol: f64,
    /// Maximum number of series terms `ψ₀ … ψ_{N}` summed (`N + 1 ≤ max_terms`).
    pub max_terms: usize,
    pub parallel: bool,
    /// Keep every `ψₙ` trajectory, not only its norm.
    pub keep_terms: bool,
}

impl SolveSettings {
    pub fn new(p: LpExponent, tol: f64, max_terms: usize) -> Result<Self> {
        SolveSettings { p, tol, max_terms, parallel: false, keep_terms: false }.validate()
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn keep_terms(mut self, keep: bool) -> Self {
        self.keep_terms = keep;
        self
    }

    pub fn validate(self) -> Result<Self> {
        self.p.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::invalid("max_terms", "must be at least 1"));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannReport {
    /// `‖ψₙ‖_{Lᵖ(I;𝓑)}`, `n = 0 … N`.
    pub term_norms: Vec<f64>,
    /// Theorem majorant for each term.
    pub majorants: Vec<f64>,
    /// Relative quadrature slack allowed on top of each majorant.
    pub quad_slack: Vec<f64>,
    /// `term_norms[n+1] / term_norms[n]`.
    pub ratios: Vec<f64>,
    pub certified_tail: f64,
    /// `‖S_N − Q̂S_N − f‖_{L^∞(I;𝓑)}`.
    pub residual: f64,
    pub terms_used: usize,
    pub converged: bool,
    /// The uniform kernel bound `D` used by the majorants.
    pub kernel_bound: f64,
}

impl NeumannReport {
    /// Indices `n` with `term_norms[n] > majorants[n]·(1 + quad_slack[n])`.
    pub fn majorant_violations(&self) -> Vec<usize> {
        self.term_norms
            .iter()
            .zip(&self.majorants)
            .zip(&self.quad_slack)
            .enumerate()
            .filter(|(_, ((t, m), s))| **t > **m * (1.0 + **s))
            .map(|(n, _)| n)
            .collect()
    }
}

/// Relative slack `10·h²·T²·D²·max(1, ‖ψ₀‖)` plus the exact excess of the
/// discrete simplex volume over `Tⁿ/n!`.
pub fn quad_slack(grid: &crate::TimeGrid, bound: f64, base_norm: f64, n_max: usize) -> Vec<f64> {
    let h = grid.step();
    let t = grid.horizon();
    let base = 10.0 * h * h * t * t * bound * bound * base_norm.max(1.0);
    simplex_excess(grid, n_max).into_iter().map(|e| base + e).collect()
}

fn check_compatible<K: VolterraKernel + ?Sized>(k: &K, phi: &Trajectory) -> Result<()> {
    if phi.grid() != k.time_grid() {
        return Err(Error::GridMismatch);
    }
    if phi.space().as_ref() != k.space().as_ref() {
        return Err(Error::SpaceMismatch {
            left: k.space().label().to_string(),
            right: phi.space().label().to_string(),
        });
    }
    Ok(())
}

/// Trapezoid sum `Σ_{j≤i} w_ij A(t_i,τ_j)φ(τ_j)`, ascending in `j`.
fn q_at_node<K: VolterraKernel + ?Sized>(k: &K, phi: &Trajectory, i: usize) -> Vec<C64> {
    let dim = k.space().dim();
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    if i == 0 {
        return acc;
    }
    let h = phi.grid().step();
    let mut tmp = vec![C64::new(0.0, 0.0); dim];
    for j in 0..=i {
        let w = if j == 0 || j == i { 0.5 * h } else { h };
        k.apply_nodes(i, j, phi.at(j).coords(), &mut tmp);
        for (a, t) in acc.iter_mut().zip(&tmp) {
            *a += w * t;
        }
    }
    acc
}

/// `Q̂φ` on the grid (serial).
pub fn apply_q<K: VolterraKernel + ?Sized>(k: &K, phi: &Trajectory) -> Result<Trajectory> {
    apply_q_with(k, phi, false)
}

/// `Q̂φ`, evaluating target nodes concurrently when `parallel` is set. The
/// per-node sum order is fixed, so both modes give identical bits.
pub fn apply_q_with<K: VolterraKernel + ?Sized>(k: &K, phi: &Trajectory, parallel: bool) -> Result<Trajectory> {
    check_compatible(k, phi)?;
    let space = k.space();
    let nodes = phi.grid().n_nodes();
    let coords: Vec<Vec<C64>> = if parallel {
        (0..nodes).into_par_iter().map(|i| q_at_node(k, phi, i)).collect()
    } else {
        (0..nodes).map(|i| q_at_node(k, phi, i)).collect()
    };
    let values = coords.into_iter().map(|c| BanachElement::new(space, c)).collect::<Result<Vec<_>>>()?;
    Trajectory::new(*phi.grid(), space, values)
}

/// `‖φ − Q̂φ − f‖_{L^∞(I;𝓑)}`.
pub fn residual<K: VolterraKernel + ?Sized>(k: &K, phi: &Trajectory, f: &Trajectory) -> Result<f64> {
    residual_with(k, phi, f, false)
}

pub fn residual_with<K: VolterraKernel + ?Sized>(
    k: &K,
    phi: &Trajectory,
    f: &Trajectory,
    parallel: bool,
) -> Result<f64> {
    check_compatible(k, f)?;
    let q = apply_q_with(k, phi, parallel)?;
    let lhs = phi.sub(&q)?;
    lhs.sup_distance(f)
}

/// Output of [`neumann_solve_detailed`].
#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub solution: Trajectory,
    pub report: NeumannReport,
    /// `ψ₀ … ψ_N` when requested via [`SolveSettings::keep_terms`].
    pub terms: Vec<Trajectory>,
}

/// Partial sum `S_N = Σ_{n≤N} ψₙ`, `ψ₀ = f`, `ψₙ₊₁ = Q̂ψₙ`.
///
/// Hitting `max_terms` before the certified tail drops below `tol` is not an
/// error: the report comes back with `converged = false`.
pub fn neumann_solve<K: VolterraKernel + ?Sized>(
    k: &K,
    f: &Trajectory,
    s: &SolveSettings,
) -> Result<(Trajectory, NeumannReport)> {
    let out = neumann_solve_detailed(k, f, s)?;
    Ok((out.solution, out.report))
}

pub fn neumann_solve_detailed<K: VolterraKernel + ?Sized>(
    k: &K,
    f: &Trajectory,
    s: &SolveSettings,
) -> Result<NeumannSolution> {
    let s = s.validate()?;
    check_compatible(k, f)?;
    let grid = *f.grid();
    let bound = k.uniform_bound();
    let horizon = grid.horizon();
    let base = f.lp_time_norm(s.p)?;

    let mut psi = f.clone();
    let mut sum = f.clone();
    let mut term_norms = vec![base];
    let mut terms = if s.keep_terms { vec![f.clone()] } else { Vec::new() };
    let mut n = 0usize;
    let (certified_tail, converged) = loop {
        if psi.values().iter().all(BanachElement::is_zero) {
            // every later term is exactly zero as well
            break (0.0, true);
        }
        let tail = series_tail(n as u64, bound, horizon, s.p, base, s.tol * 1e-3);
        if tail < s.tol {
            break (tail, true);
        }
        if n + 1 >= s.max_terms {
            break (tail, false);
        }
        psi = apply_q_with(k, &psi, s.parallel)?;
        sum.add_assign(&psi)?;
        term_norms.push(psi.lp_time_norm(s.p)?);
        if s.keep_terms {
            terms.push(psi.clone());
        }
        n += 1;
    };

    let majorants = (0..=n)
        .map(|m| theorem_term_bound(&MajorantQuery::new(m as f64, bound, horizon, s.p, base)))
        .collect();
    let residual = residual_with(k, &sum, f, s.parallel)?;
    let report = NeumannReport {
        ratios: empirical_ratio(&term_norms),
        quad_slack: quad_slack(&grid, bound, base, n),
        term_norms,
        majorants,
        certified_tail,
        residual,
        terms_used: n + 1,
        converged,
        kernel_bound: bound,
    };
    Ok(NeumannSolution { solution: sum, report, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelSpec, PhysicalParams, PotentialShape, PotentialSpec, SmoothFn};
    use crate::schrodinger::{build_dyson_kernel, free_source, GaussianPacket, SpatialGrid};
    use crate::state_space::{SpaceDescriptor, TimeGrid};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn scalar_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Trajectory {
        Trajectory::from_fn(grid, &SpaceDescriptor::scalar(), |t| vec![c(f(t))]).unwrap()
    }

    #[test]
    fn constant_kernel_on_constant_is_exact() {
        let grid = TimeGrid::new(2.0, 40).unwrap();
        let k = KernelSpec::scalar_constant(c(3.0), grid);
        let q = apply_q(&k, &scalar_fn(grid, |_| 1.0)).unwrap();
        for (i, v) in q.values().iter().enumerate() {
            assert!((v.coords()[0].re - 3.0 * grid.node(i)).abs() < 1e-13);
        }
        assert!(q.at(0).is_zero());
    }

    #[test]
    fn monomial_gains_one_power() {
        // D t^{n+1}/(n+1) up to O(h²)
        for n in [2.0, 2.5, 3.0] {
            let errs: Vec<f64> = [256, 512]
                .iter()
                .map(|&steps| {
                    let grid = TimeGrid::new(1.0, steps).unwrap();
                    let k = KernelSpec::scalar_constant(c(2.0), grid);
                    let q = apply_q(&k, &scalar_fn(grid, |t: f64| t.powf(n))).unwrap();
                    (q.at(steps).coords()[0].re - 2.0 / (n + 1.0)).abs()
                })
                .collect();
            assert!(errs[1] < 1e-5);
            assert!((errs[0] / errs[1] - 4.0).abs() < 0.1, "n={n}: {errs:?}");
        }
    }

    #[test]
    fn resolvent_of_unit_kernel_is_exponential() {
        let grid = TimeGrid::new(1.0, 512).unwrap();
        let k = KernelSpec::scalar_constant(c(1.0), grid);
        let f = scalar_fn(grid, |_| 1.0);
        let s = SolveSettings::new(LpExponent::Infinity, 1e-8, 100).unwrap();
        let (sol, report) = neumann_solve(&k, &f, &s).unwrap();
        assert!(report.converged);
        let err = sol.values().iter().enumerate().map(|(i, v)| (v.coords()[0].re - grid.node(i).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(report.majorant_violations().is_empty());
        assert!(report.certified_tail < 1e-8);
    }

    #[test]
    fn large_bound_still_converges() {
        // DT = 5: a geometric-series argument would not apply
        let grid = TimeGrid::new(1.0, 256).unwrap();
        let k = KernelSpec::scalar_constant(c(5.0), grid);
        let f = scalar_fn(grid, |t| (2.0 * t).cos());
        let (sol, report) = neumann_solve(&k, &f, &SolveSettings::new(LpExponent::Infinity, 1e-11, 200).unwrap()).unwrap();
        assert!(report.converged && report.terms_used > 20);
        assert!(report.residual < 1e-9, "{}", report.residual);
        assert!(sol.at(256).coords()[0].re.is_finite());
    }

    #[test]
    fn hitting_max_terms_is_flagged() {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let k = KernelSpec::scalar_constant(c(1.0), grid);
        let f = scalar_fn(grid, |_| 1.0);
        let (_, report) = neumann_solve(&k, &f, &SolveSettings::new(LpExponent::Infinity, 1e-12, 1).unwrap()).unwrap();
        assert!(!report.converged);
        assert_eq!(report.terms_used, 1);
        assert!(report.certified_tail > 1.0);
    }

    #[test]
    fn residual_identities() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let f = scalar_fn(grid, |t| 1.0 + t);
        let zero = KernelSpec::scalar_constant(c(0.0), grid);
        assert_eq!(residual(&zero, &f, &f).unwrap(), 0.0);
        let k = KernelSpec::scalar_smooth(SmoothFn::Oscillating { scale: 1.2, omega: 2.0 }, grid).unwrap();
        let qf = apply_q(&k, &f).unwrap();
        let r = residual(&k, &f, &f).unwrap();
        assert!((r - qf.lp_time_norm(LpExponent::Infinity).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn zero_potential_dyson_returns_free_evolution() {
        let sg = SpatialGrid::new(-10.0, 10.0, 64).unwrap();
        let tg = TimeGrid::new(0.5, 16).unwrap();
        let params = PhysicalParams::default();
        let k = build_dyson_kernel(PotentialSpec::new(PotentialShape::Constant { value: 0.0 }), sg, params, tg).unwrap();
        let f = free_source(&GaussianPacket::standard().sample(sg, params, 0.0), tg).unwrap();
        let (sol, report) = neumann_solve(&k, &f, &SolveSettings::new(LpExponent::Infinity, 1e-10, 10).unwrap()).unwrap();
        assert_eq!(sol, f);
        assert_eq!(report.terms_used, 1);
        assert!(report.converged);
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let k = KernelSpec::scalar_smooth(
            SmoothFn::ExpMixture { scale: 2.0, weights: vec![0.3, 0.7], rates: vec![1.0, 4.0] },
            grid,
        )
        .unwrap();
        let f = scalar_fn(grid, |t| t.sin() + 1.0);
        let s = SolveSettings::new(LpExponent::Finite(2.0), 1e-12, 100).unwrap();
        let (a, ra) = neumann_solve(&k, &f, &s).unwrap();
        let (b, rb) = neumann_solve(&k, &f, &s.parallel(true)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let other = TimeGrid::new(1.0, 9).unwrap();
        let k = KernelSpec::scalar_constant(c(1.0), grid);
        assert!(matches!(apply_q(&k, &scalar_fn(other, |_| 1.0)), Err(Error::GridMismatch)));
        assert!(SolveSettings::new(LpExponent::Infinity, 0.0, 3).is_err());
        assert!(SolveSettings::new(LpExponent::Infinity, 1e-3, 0).is_err());
    }
}
