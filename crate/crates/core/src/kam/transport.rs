//! Exact transport of a quadratic Hamiltonian through the time-one map of a
//! quadratic generator, computed pointwise on an angle grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{expm_frechet, symplectic_j, CMatrix};
use crate::quadham::{PolyMatrix, QuadHamiltonian};
use crate::scalar::{cplx, Real};
use crate::trigpoly::TorusGrid;

/// Largest grid side tried per torus dimension.
pub fn max_grid_side(dim: usize) -> usize {
    match dim {
        1 => 4096,
        2 => 256,
        _ => 64,
    }
}

pub(crate) fn initial_side(bandwidth: u32) -> usize {
    (8 * bandwidth as usize + 1).max(16).next_power_of_two()
}

/// iJ as a constant matrix.
pub fn ij<T: Real>() -> CMatrix<T> {
    symplectic_j::<T>(4).scale(cplx(T::zero(), T::one()))
}

/// X = iJ·S_χ, the matrix of the time-one map e^X of χ.
pub fn generator_matrix<T: Real>(chi: &QuadHamiltonian<T>) -> PolyMatrix<T> {
    chi.to_matrix().left_mul_const(&ij())
}

pub(crate) fn tail_tolerance<T: Real>(scale: T) -> T {
    T::lit(16.0) * T::precision() * scale.max(T::one())
}

/// Largest |coefficient| with |k|₁ > cutoff.
pub(crate) fn tail_above<T: Real>(m: &PolyMatrix<T>, cutoff: u32) -> T {
    m.entries()
        .iter()
        .map(|p| p.truncate(cutoff).1.max_abs_coeff())
        .fold(T::zero(), T::max)
}

/// Samples a pointwise matrix function on successively finer grids until the
/// Fourier tail above side/4 is at rounding level, then truncates there.
pub(crate) fn resolve<T: Real>(
    dim: usize,
    strip_width: T,
    bandwidth: u32,
    f: impl Fn(TorusGrid) -> Result<Vec<CMatrix<T>>>,
) -> Result<(PolyMatrix<T>, usize)> {
    let max_side = max_grid_side(dim);
    let mut side = initial_side(bandwidth).min(max_side);
    loop {
        let grid = TorusGrid::new(dim, side);
        let samples = f(grid)?;
        let cutoff = ((side - 1) / 2) as u32;
        let m = PolyMatrix::analyze(grid, &samples, cutoff, strip_width)?;
        let keep = (side / 4) as u32;
        let tail = tail_above(&m, keep);
        if tail <= tail_tolerance(m.max_abs_coeff()) {
            return Ok((m.map(|p| p.truncate(keep).0), side));
        }
        if side >= max_side {
            return Err(Error::Unresolved {
                max_grid: side,
                tail: tail.as_f64(),
            });
        }
        side *= 2;
    }
}

/// Result of one transport.
#[derive(Clone, Debug)]
pub struct Transported<T: Real> {
    /// The new Hamiltonian (full class, coefficients pruned at rounding level).
    pub h: QuadHamiltonian<T>,
    /// X = iJ·S_χ.
    pub x: PolyMatrix<T>,
    pub grid_side: usize,
    /// max over the grid of ‖X(θ)‖₁.
    pub x_sup: T,
}

/// S ↦ iJ·P⁻¹(iJ·S·P − ω·∂_θP) with P = e^{iJ S_χ}, P⁻¹ = −JPᵀJ.
/// To first order this is S + {ω·I + h, χ}.
pub fn transport<T: Real>(h: &QuadHamiltonian<T>, chi: &QuadHamiltonian<T>, omega: &[T]) -> Result<Transported<T>> {
    let dim = h.dim();
    let s = h.to_matrix();
    let x = generator_matrix(chi);
    let dx = x.map(|p| p.advect(omega));
    let j = symplectic_j::<T>(4);
    let ij = ij::<T>();
    let bandwidth = h.effective_cutoff().max(chi.effective_cutoff());
    let sigma = h.strip_width().min(chi.strip_width());
    let x_sup = std::sync::Mutex::new(T::zero());
    let (snew, side) = resolve(dim, sigma, bandwidth, |grid| {
        let ss = s.sample(grid);
        let xs = x.sample(grid);
        let ds = dx.sample(grid);
        let out: Vec<(CMatrix<T>, T)> = (0..grid.len())
            .into_par_iter()
            .map(|g| {
                let (p, dp) = expm_frechet(&xs[g], &ds[g]);
                let pinv = -&(&(&j * &p.transpose()) * &j);
                let inner = &(&(&ij * &ss[g]) * &p) - &dp;
                ((&ij * &(&pinv * &inner)).symmetrized(), xs[g].norm_one())
            })
            .collect();
        let mut sup = x_sup.lock().expect("poisoned");
        *sup = out.iter().fold(T::zero(), |a, (_, n)| a.max(*n));
        Ok(out.into_iter().map(|(m, _)| m).collect())
    })?;
    let scale = snew.max_abs_coeff().max(T::one());
    let snew = snew.map(|p| p.prune(T::lit(2.0) * tail_tolerance(scale)));
    Ok(Transported {
        h: QuadHamiltonian::from_matrix(&snew, crate::quadham::ClassTag::Full)?,
        x,
        grid_side: side,
        x_sup: x_sup.into_inner().expect("poisoned"),
    })
}
