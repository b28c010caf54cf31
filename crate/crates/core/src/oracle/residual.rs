use crate::error::{Error, Result};
use crate::kam::KamResult;
use crate::linalg::{symplectic_j, CMatrix};
use crate::quadham::GaugeSystem;
use crate::scalar::{cplx, Real};
use crate::trigpoly::TorusGrid;

/// max over a grid of ‖P⁻¹(L P − ω·∂_θP) − L∞‖ with L = −iJS(θ) the
/// physical generator in the working chart, P = e^{A(θ)} and L∞ the
/// generator of the normal form.
pub fn conjugation_residual<T: Real>(sys: &GaugeSystem<T>, result: &KamResult<T>, side: usize) -> Result<T> {
    if sys.gauge != result.gauge {
        return Err(Error::ClassMismatch("result belongs to another gauge".into()));
    }
    let dim = sys.dim();
    let j = symplectic_j::<T>(4);
    let mij = j.scale(cplx(T::zero(), -T::one()));
    let s = sys.hamiltonian().to_matrix();
    let s_inf = result
        .normal_form
        .to_quad(dim, sys.strip_width())
        .to_matrix()
        .at(&vec![T::zero(); dim]);
    let l_inf = &mij * &s_inf;
    let grid = TorusGrid::new(dim, side.max(1));
    let mut worst = T::zero();
    for theta in grid.points::<T>() {
        let l = &mij * &s.at(&theta);
        let (p, dp) = result.generator.exp_with_derivative(&theta, &result.omega);
        let pinv = -&(&(&j * &p.transpose()) * &j);
        let g: CMatrix<T> = &(&pinv * &(&(&l * &p) - &dp)) - &l_inf;
        worst = worst.max(g.max_abs());
    }
    Ok(worst)
}
