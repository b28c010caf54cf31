//! A(θ) with e^{A(θ)} = e^{X₁(θ)}⋯e^{X_M(θ)}.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{expm_frechet, hamiltonian_defect, symplectic_defect, symplectic_j, CMatrix};
use crate::quadham::{PolyMatrix, RealChart};
use crate::scalar::Real;
use crate::trigpoly::TorusGrid;

use super::transport::resolve;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSeries<T: Real> {
    /// A(θ), Hamiltonian: AᵀJ + JA = 0.
    pub a: PolyMatrix<T>,
    /// Step generators X_m = iJ·S_{χ_m} in composition order.
    pub factors: Vec<PolyMatrix<T>>,
    pub grid_side: usize,
}

impl<T: Real> GeneratorSeries<T> {
    pub fn identity(dim: usize, strip_width: T) -> Self {
        Self {
            a: PolyMatrix::zero(dim, strip_width),
            factors: Vec::new(),
            grid_side: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// e^{A(θ)}.
    pub fn exp_at(&self, theta: &[T]) -> CMatrix<T> {
        self.a.at(theta).expm()
    }

    /// e^{A(θ)} and ω·∂_θ e^{A(θ)}.
    pub fn exp_with_derivative(&self, theta: &[T], omega: &[T]) -> (CMatrix<T>, CMatrix<T>) {
        let da = self.a.map(|p| p.advect(omega)).at(theta);
        expm_frechet(&self.a.at(theta), &da)
    }

    /// e^{X₁(θ)}⋯e^{X_M(θ)}.
    pub fn product_at(&self, theta: &[T]) -> CMatrix<T> {
        self.factors
            .iter()
            .fold(CMatrix::identity(4), |acc, x| &acc * &x.at(theta).expm())
    }

    /// max over coefficients of |AᵀJ + JA| = |JA − (JA)ᵀ|.
    pub fn hamiltonian_defect(&self) -> T {
        let ja = self.a.left_mul_const(&symplectic_j::<T>(4));
        let mut worst = T::zero();
        for i in 0..4 {
            for k in 0..4 {
                worst = worst.max((ja.get(i, k) - ja.get(k, i)).max_abs_coeff());
            }
        }
        worst
    }

    /// Max over a grid of ‖e^{A}ᵀJe^{A} − J‖ and of ‖A‖₁.
    pub fn grid_diagnostics(&self, side: usize) -> (T, T) {
        let grid = TorusGrid::new(self.dim(), side);
        let samples = self.a.sample(grid);
        samples.iter().fold((T::zero(), T::zero()), |(d, n), a| {
            (d.max(symplectic_defect(&a.expm())), n.max(a.norm_one()))
        })
    }

    /// Max over a grid and over sampled real states of the distance of
    /// e^{A}w from the fixed set of the involution.
    pub fn reality_defect(&self, chart: RealChart, side: usize) -> T {
        let grid = TorusGrid::new(self.dim(), side);
        let r = chart.involution::<T>();
        let states = chart.sample_states::<T>();
        let mut worst = T::zero();
        for a in self.a.sample(grid) {
            let p = a.expm();
            for w in &states {
                let v = p.mul_vec(w);
                let conj: Vec<_> = v.iter().map(|z| z.conj()).collect();
                let img = r.mul_vec(&conj);
                for (x, y) in img.iter().zip(&v) {
                    worst = worst.max((x - y).norm());
                }
            }
        }
        worst
    }
}

/// Logarithm of the composed product per grid point, Fourier-analyzed.
pub fn assemble_generator<T: Real>(factors: &[PolyMatrix<T>], dim: usize, strip_width: T) -> Result<GeneratorSeries<T>> {
    if factors.is_empty() {
        return Ok(GeneratorSeries::identity(dim, strip_width));
    }
    let bandwidth = factors.iter().map(|x| x.effective_cutoff()).max().unwrap_or(0);
    let (a, side) = resolve(dim, strip_width, bandwidth, |grid| {
        let sampled: Vec<Vec<CMatrix<T>>> = factors.iter().map(|x| x.sample(grid)).collect();
        (0..grid.len())
            .into_par_iter()
            .map(|g| {
                let p = sampled
                    .iter()
                    .fold(CMatrix::identity(4), |acc, xs| &acc * &xs[g].expm());
                p.logm()
            })
            .collect()
    })?;
    let series = GeneratorSeries {
        a,
        factors: factors.to_vec(),
        grid_side: side,
    };
    // e^A reproduces the product on the grid.
    let grid = TorusGrid::new(dim, side);
    let tol = T::lit(1e-10).max(T::precision() * T::lit(1e3));
    for (g, theta) in grid.points::<T>().iter().enumerate() {
        let d = (&series.exp_at(theta) - &series.product_at(theta)).max_abs();
        if !(d <= tol) {
            return Err(Error::Consistency {
                what: format!("e^A vs composed product at grid point {g}"),
                discrepancy: d.as_f64(),
                tolerance: tol.as_f64(),
            });
        }
    }
    Ok(series)
}

/// ‖AᵀJ + JA‖ at a point, for tests and diagnostics.
pub fn pointwise_hamiltonian_defect<T: Real>(a: &CMatrix<T>) -> T {
    hamiltonian_defect(a)
}
