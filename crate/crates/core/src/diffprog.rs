//! Exact gradient of the training loss with respect to the circuit angles.
//!
//! The loss is differentiated by hand in reverse mode. The field part (velocity
//! extraction, central differences and the regularized norm) is adjointed
//! with respect to the four real fields `a₁, b₁, a₂, b₂`, which gives one
//! complex cotangent `∂L/∂Re ψ + i ∂L/∂Im ψ` per spinor entry. That cotangent is
//! then pulled back through each grid point's gate chain: for `w = U v`,
//! `∂L/∂p = Re⟨λ_w, (∂U/∂p) v⟩` and `λ_v = U† λ_w`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ansatz::{self, apply, apply_adjoint, CircuitSpec, Mat2, Spinor, PARAMS_PER_GATE};
use crate::error::Result;
use crate::field::{regularized_misfit, VelocityField, WaveField};
use crate::grid::Grid;

/// Points per parallel work unit. Fixed so the reduction order, and with it
/// every bit of the gradient, does not depend on the thread count.
const CHUNK: usize = 64;

/// Loss terms and their weights.
#[derive(Debug, Clone, Copy)]
pub struct LossParams {
    pub hbar: f64,
    pub eps: f64,
}

/// `(1/ℏ²)·regularized_misfit` of the circuit output, computed through the
/// plain (non-differentiable) path.
pub fn loss(spec: &CircuitSpec, theta: &[f64], u_target: &VelocityField, hbar: f64, eps: f64) -> Result<f64> {
    let grid = *u_target.grid();
    spec.check_grid(&grid)?;
    let psi = ansatz::decode(&ansatz::forward(spec, theta)?, &grid)?;
    Ok(regularized_misfit(&psi, u_target, hbar, eps)? / (hbar * hbar))
}

/// Loss and its gradient with respect to `theta`.
pub fn loss_and_grad(
    spec: &CircuitSpec,
    theta: &[f64],
    u_target: &VelocityField,
    hbar: f64,
    eps: f64,
) -> Result<(f64, Vec<f64>)> {
    let grid = *u_target.grid();
    spec.check_grid(&grid)?;
    let unitaries = spec.unitaries(theta)?;
    let derivs: Vec<[Mat2; 3]> =
        theta.chunks_exact(PARAMS_PER_GATE).map(|a| ansatz::gate_unitary_derivatives([a[0], a[1], a[2]])).collect();

    let spinors: Vec<Spinor> = (0..grid.len()).into_par_iter().map(|j| spec.point_spinor(&unitaries, j)).collect();
    let psi = WaveField::from_spinors(grid, &spinors)?;
    let (loss, cotangent) = field_adjoint(&psi, u_target, LossParams { hbar, eps });

    let partials: Vec<Vec<f64>> = cotangent
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, lambdas)| {
            let mut grad = vec![0.0; theta.len()];
            let mut trail = Vec::with_capacity(spec.gate_count());
            for (offset, lambda) in lambdas.iter().enumerate() {
                chain_adjoint(spec, &unitaries, &derivs, c * CHUNK + offset, *lambda, &mut trail, &mut grad);
            }
            grad
        })
        .collect();

    let mut grad = vec![0.0; theta.len()];
    for part in &partials {
        for (g, p) in grad.iter_mut().zip(part) {
            *g += p;
        }
    }
    Ok((loss, grad))
}

/// Replays the chain of gates acting on point `j`, then walks it backwards,
/// accumulating angle derivatives into `grad`.
fn chain_adjoint(
    spec: &CircuitSpec,
    unitaries: &[Mat2],
    derivs: &[[Mat2; 3]],
    j: usize,
    mut lambda: Spinor,
    trail: &mut Vec<(usize, Spinor)>,
    grad: &mut [f64],
) {
    trail.clear();
    let mut state = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    for (g, gate) in spec.gates().iter().enumerate() {
        if gate.acts_on(j) {
            trail.push((g, state));
            state = apply(&unitaries[g], &state);
        }
    }
    for &(g, input) in trail.iter().rev() {
        for (k, d) in derivs[g].iter().enumerate() {
            let dw = apply(d, &input);
            grad[PARAMS_PER_GATE * g + k] += (lambda[0].conj() * dw[0] + lambda[1].conj() * dw[1]).re;
        }
        lambda = apply_adjoint(&unitaries[g], &lambda);
    }
}

/// Loss of a wave field and the cotangent of every spinor entry.
fn field_adjoint(psi: &WaveField, u_target: &VelocityField, p: LossParams) -> (f64, Vec<Spinor>) {
    let grid: Grid = *psi.grid();
    let n = grid.len();
    let dim = grid.dim();
    let hbar = p.hbar;
    let weight = grid.cell_volume() / (hbar * hbar);
    let reg = p.eps * p.eps;

    let re = [&psi.a1, &psi.a2];
    let im = [&psi.b1, &psi.b2];
    let mut abar = [vec![0.0; n], vec![0.0; n]];
    let mut bbar = [vec![0.0; n], vec![0.0; n]];
    let mut misfit = 0.0;
    let mut penalty = 0.0;

    let mut da = [vec![0.0; n], vec![0.0; n]];
    let mut db = [vec![0.0; n], vec![0.0; n]];
    let mut da_bar = [vec![0.0; n], vec![0.0; n]];
    let mut db_bar = [vec![0.0; n], vec![0.0; n]];
    let mut scratch = vec![0.0; n];

    for axis in 0..dim {
        for i in 0..2 {
            grid.central_diff_into(re[i], axis, &mut da[i]);
            grid.central_diff_into(im[i], axis, &mut db[i]);
        }
        let target = u_target.component(axis);
        for j in 0..n {
            let u = hbar * (re[0][j] * db[0][j] - im[0][j] * da[0][j] + re[1][j] * db[1][j] - im[1][j] * da[1][j]);
            let diff = u - target[j];
            misfit += diff * diff;
            let mut u_bar = 2.0 * weight * diff;
            for i in 0..2 {
                let r = hbar * da[i][j] + u * im[i][j];
                let s = hbar * db[i][j] - u * re[i][j];
                penalty += r * r + s * s;
                let (r_bar, s_bar) = (2.0 * weight * reg * r, 2.0 * weight * reg * s);
                u_bar += r_bar * im[i][j] - s_bar * re[i][j];
                abar[i][j] -= s_bar * u;
                bbar[i][j] += r_bar * u;
                da_bar[i][j] = r_bar * hbar;
                db_bar[i][j] = s_bar * hbar;
            }
            for i in 0..2 {
                abar[i][j] += u_bar * hbar * db[i][j];
                bbar[i][j] -= u_bar * hbar * da[i][j];
                da_bar[i][j] -= u_bar * hbar * im[i][j];
                db_bar[i][j] += u_bar * hbar * re[i][j];
            }
        }
        // the periodic central difference is antisymmetric: Dᵀ = −D
        for i in 0..2 {
            grid.central_diff_into(&da_bar[i], axis, &mut scratch);
            abar[i].iter_mut().zip(&scratch).for_each(|(a, s)| *a -= s);
            grid.central_diff_into(&db_bar[i], axis, &mut scratch);
            bbar[i].iter_mut().zip(&scratch).for_each(|(b, s)| *b -= s);
        }
    }

    let loss = weight * (misfit + reg * penalty);
    let cotangent =
        (0..n).map(|j| [Complex64::new(abar[0][j], bbar[0][j]), Complex64::new(abar[1][j], bbar[1][j])]).collect();
    (loss, cotangent)
}

/// Largest relative deviation between the reverse-mode gradient and central
/// finite differences with step `h`. The denominator is floored at `1e-8`.
pub fn fd_check(
    spec: &CircuitSpec,
    theta: &[f64],
    u_target: &VelocityField,
    hbar: f64,
    eps: f64,
    h: f64,
) -> Result<f64> {
    let (_, grad) = loss_and_grad(spec, theta, u_target, hbar, eps)?;
    let fd = finite_difference_grad(spec, theta, u_target, hbar, eps, h)?;
    Ok(grad.iter().zip(&fd).map(|(g, f)| (g - f).abs() / f.abs().max(1e-8)).fold(0.0, f64::max))
}

/// Central-difference gradient of [`loss`].
pub fn finite_difference_grad(
    spec: &CircuitSpec,
    theta: &[f64],
    u_target: &VelocityField,
    hbar: f64,
    eps: f64,
    h: f64,
) -> Result<Vec<f64>> {
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            probe[k] = theta[k] + h;
            let up = loss(spec, &probe, u_target, hbar, eps)?;
            probe[k] = theta[k] - h;
            let down = loss(spec, &probe, u_target, hbar, eps)?;
            probe[k] = theta[k];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}
