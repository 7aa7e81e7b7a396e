//! Reference solutions that do not go through the Picard iteration:
//! node-by-node forward substitution of the discrete equation, and closed
//! forms for the analytic cases.

use crate::kernels::{KernelSpec, PhysicalParams, VolterraKernel};
use crate::schrodinger::{FreePropagator, GaussianPacket, SpatialGrid};
use crate::state_space::{BanachElement, SpaceDescriptor, TimeGrid, Trajectory};
use crate::{Error, Result, C64};

/// Solve `φ_i − Σ_{j≤i} w_ij A(t_i,t_j)φ_j = f_i` in increasing `i` with the
/// same trapezoid weights as [`crate::picard::apply_q`].
///
/// The diagonal system `(Id − (h/2)A(t_i,t_i))φ_i = rhs` is inverted exactly
/// in one dimension and by a Neumann expansion otherwise, which needs
/// `h·D/2 < 1`.
pub fn collocation_solve<K: VolterraKernel + ?Sized>(k: &K, f: &Trajectory) -> Result<Trajectory> {
    if f.grid() != k.time_grid() {
        return Err(Error::GridMismatch);
    }
    let space = k.space();
    if f.space().as_ref() != space.as_ref() {
        return Err(Error::SpaceMismatch { left: space.label().to_string(), right: f.space().label().to_string() });
    }
    let grid = *f.grid();
    let h = grid.step();
    let half = 0.5 * h;
    let bound = k.uniform_bound();
    if !(half * bound < 1.0) {
        return Err(Error::Precondition(format!("h*D/2 = {} >= 1; reduce h", half * bound)));
    }
    let dim = space.dim();
    let zero = C64::new(0.0, 0.0);
    let mut solved: Vec<Vec<C64>> = Vec::with_capacity(grid.n_nodes());
    solved.push(f.at(0).coords().to_vec());
    let mut tmp = vec![zero; dim];
    for i in 1..grid.n_nodes() {
        let mut rhs = f.at(i).coords().to_vec();
        for (j, phi_j) in solved.iter().enumerate() {
            let w = if j == 0 { half } else { h };
            k.apply_nodes(i, j, phi_j, &mut tmp);
            for (r, t) in rhs.iter_mut().zip(&tmp) {
                *r += w * t;
            }
        }
        let phi_i = if dim == 1 {
            k.apply_nodes(i, i, &[C64::new(1.0, 0.0)], &mut tmp);
            vec![rhs[0] / (C64::new(1.0, 0.0) - half * tmp[0])]
        } else {
            invert_diagonal(k, i, half, rhs, space)
        };
        solved.push(phi_i);
    }
    let values = solved.into_iter().map(|c| BanachElement::new(space, c)).collect::<Result<Vec<_>>>()?;
    Trajectory::new(grid, space, values)
}

/// `(Id − (h/2)A(t_i,t_i))⁻¹ rhs` summed until the next term is below rounding.
fn invert_diagonal<K: VolterraKernel + ?Sized>(
    k: &K,
    i: usize,
    half: f64,
    rhs: Vec<C64>,
    space: &SpaceDescriptor,
) -> Vec<C64> {
    let mut x = rhs.clone();
    let mut term = rhs;
    let mut next = vec![C64::new(0.0, 0.0); term.len()];
    for _ in 0..500 {
        k.apply_nodes(i, i, &term, &mut next);
        for z in next.iter_mut() {
            *z *= half;
        }
        std::mem::swap(&mut term, &mut next);
        for (a, t) in x.iter_mut().zip(&term) {
            *a += t;
        }
        let tn = space.norm_unchecked(&term);
        if tn == 0.0 || tn <= 1e-17 * space.norm_unchecked(&x) {
            break;
        }
    }
    x
}

/// Closed-form or brute-force reference trajectories.
#[derive(Debug, Clone)]
pub enum ReferenceCase {
    /// `u(t) = e^{λt}`, the solution of `u = 1 + λ∫₀ᵗu`.
    ResolventExponential { lambda: C64 },
    /// `u(t) = e^{−iV₀t/ħ} U_f(t) u₀`; a constant potential commutes with the free Hamiltonian.
    ConstantPotentialPhase { v0: f64, params: PhysicalParams, grid: SpatialGrid, packet: GaussianPacket },
    /// Dispersive Gaussian solving `iħ∂ₜu = −a²∂ₓ²u`.
    GaussianFreeEvolution { packet: GaussianPacket, params: PhysicalParams, grid: SpatialGrid },
    /// Forward substitution of the discrete equation for an explicit kernel and source.
    DiscreteCollocation { kernel: Box<KernelSpec>, source: Trajectory },
}

pub fn reference_solution(case: &ReferenceCase, grid: TimeGrid, space: &std::sync::Arc<SpaceDescriptor>) -> Result<Trajectory> {
    match case {
        ReferenceCase::ResolventExponential { lambda } => {
            if space.dim() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, found: space.dim() });
            }
            Trajectory::from_fn(grid, space, |t| vec![(lambda * t).exp()])
        }
        ReferenceCase::ConstantPotentialPhase { v0, params, grid: sg, packet } => {
            packet.validate()?;
            params.validate()?;
            check_spatial(space, sg)?;
            let prop = FreePropagator::new(*sg, *params);
            let initial = packet.sample(*sg, *params, 0.0).values;
            Trajectory::from_fn(grid, space, |t| {
                let mut u = initial.clone();
                prop.evolve_in_place(&mut u, t);
                let phase = C64::from_polar(1.0, -v0 * t / params.hbar);
                u.iter_mut().for_each(|z| *z *= phase);
                u
            })
        }
        ReferenceCase::GaussianFreeEvolution { packet, params, grid: sg } => {
            packet.validate()?;
            params.validate()?;
            check_spatial(space, sg)?;
            Trajectory::from_fn(grid, space, |t| packet.sample(*sg, *params, t).values)
        }
        ReferenceCase::DiscreteCollocation { kernel, source } => {
            if source.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            collocation_solve(kernel.as_ref(), source)
        }
    }
}

fn check_spatial(space: &SpaceDescriptor, sg: &SpatialGrid) -> Result<()> {
    if space.dim() != sg.n_points() {
        return Err(Error::DimensionMismatch { expected: sg.n_points(), found: space.dim() });
    }
    Ok(())
}
