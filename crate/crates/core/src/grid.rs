//! Periodic uniform lattice over `[0, 2π]^d`.
//!
//! Points are flattened with the first dimension varying fastest, so the flat
//! index `j = i₁ + N·i₂` is exactly the integer spelled by the position qubits
//! of the circuit (bit `k` of `j` lives on qubit `k`).

use std::f64::consts::TAU;

use crate::error::{Result, ScwfError};

/// Side length of the periodic box.
pub const DOMAIN_LENGTH: f64 = TAU;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    points_per_dim: usize,
    spacing: f64,
}

impl Grid {
    /// A `dim`-dimensional grid with `points_per_dim` points along each axis.
    ///
    /// `dim` must be 1 or 2 and `points_per_dim` a power of two no smaller than 2.
    pub fn new(dim: usize, points_per_dim: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(ScwfError::domain(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if points_per_dim < 2 || !points_per_dim.is_power_of_two() {
            return Err(ScwfError::domain(format!(
                "points per dimension must be a power of two >= 2, got {points_per_dim}"
            )));
        }
        Ok(Grid { dim, points_per_dim, spacing: DOMAIN_LENGTH / points_per_dim as f64 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn domain_length(&self) -> f64 {
        DOMAIN_LENGTH
    }

    /// Total number of points, `N^d`.
    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of position qubits needed to index every point, `log2(N^d)`.
    pub fn position_qubits(&self) -> usize {
        self.len().trailing_zeros() as usize
    }

    /// Weight of one point in a Riemann sum, `Δ^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn flat_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dim {
            return Err(ScwfError::domain(format!("expected {} coordinates, got {}", self.dim, coords.len())));
        }
        let mut j = 0;
        let mut stride = 1;
        for (axis, &i) in coords.iter().enumerate() {
            if i >= self.points_per_dim {
                return Err(ScwfError::domain(format!(
                    "coordinate {i} on axis {axis} outside [0, {})",
                    self.points_per_dim
                )));
            }
            j += i * stride;
            stride *= self.points_per_dim;
        }
        Ok(j)
    }

    /// Integer coordinate of flat index `j` along `axis`.
    pub fn coord_index(&self, j: usize, axis: usize) -> usize {
        (j / self.stride(axis)) % self.points_per_dim
    }

    /// Physical coordinate of flat index `j` along `axis`.
    pub fn coord(&self, j: usize, axis: usize) -> f64 {
        self.coord_index(j, axis) as f64 * self.spacing
    }

    fn stride(&self, axis: usize) -> usize {
        self.points_per_dim.pow(axis as u32)
    }

    /// Flat index of the periodic neighbour of `j` one step forward (`+1`)
    /// or backward (`-1`) along `axis`.
    #[inline]
    pub fn neighbor(&self, j: usize, axis: usize, forward: bool) -> usize {
        let stride = self.stride(axis);
        let n = self.points_per_dim;
        let i = (j / stride) % n;
        let base = j - i * stride;
        let k = if forward { (i + 1) & (n - 1) } else { (i + n - 1) & (n - 1) };
        base + k * stride
    }

    /// Second-order central difference along `axis` with periodic wraparound.
    pub fn central_diff(&self, field: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; field.len()];
        self.central_diff_into(field, axis, &mut out);
        out
    }

    pub fn central_diff_into(&self, field: &[f64], axis: usize, out: &mut [f64]) {
        assert!(axis < self.dim, "axis {axis} out of range for a {}-d grid", self.dim);
        assert_eq!(field.len(), self.len(), "field length does not match grid");
        assert_eq!(out.len(), self.len(), "output length does not match grid");
        let inv = 0.5 / self.spacing;
        for (j, o) in out.iter_mut().enumerate() {
            let fwd = field[self.neighbor(j, axis, true)];
            let bwd = field[self.neighbor(j, axis, false)];
            *o = (fwd - bwd) * inv;
        }
    }

    /// Evaluate `f` at every point's physical coordinates, in flat-index order.
    pub fn sample(&self, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
        let mut x = [0.0; 2];
        (0..self.len())
            .map(|j| {
                for (axis, xa) in x.iter_mut().enumerate().take(self.dim) {
                    *xa = self.coord(j, axis);
                }
                f(&x[..self.dim])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn flat_index_examples() {
        let g1 = Grid::new(1, 32).unwrap();
        assert_eq!(g1.flat_index(&[5]).unwrap(), 5);
        let g2 = Grid::new(2, 32).unwrap();
        assert_eq!(g2.flat_index(&[0, 0]).unwrap(), 0);
        assert_eq!(g2.flat_index(&[3, 2]).unwrap(), 67);
    }

    #[test]
    fn flat_index_rejects_out_of_range() {
        let g = Grid::new(2, 8).unwrap();
        assert!(g.flat_index(&[8, 0]).is_err());
        assert!(g.flat_index(&[0]).is_err());
    }

    #[test]
    fn flat_index_is_bijective() {
        let g = Grid::new(2, 8).unwrap();
        let mut seen = vec![false; g.len()];
        for i2 in 0..8 {
            for i1 in 0..8 {
                let j = g.flat_index(&[i1, i2]).unwrap();
                assert!(!seen[j]);
                seen[j] = true;
                assert_eq!(g.coord_index(j, 0), i1);
                assert_eq!(g.coord_index(j, 1), i2);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(3, 8).is_err());
        assert!(Grid::new(1, 12).is_err());
        assert!(Grid::new(1, 1).is_err());
    }

    #[test]
    fn spacing_times_n_is_length() {
        for n in [2, 16, 128, 1024] {
            let g = Grid::new(1, n).unwrap();
            assert!((g.spacing() * n as f64 - DOMAIN_LENGTH).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_is_annihilated() {
        let g = Grid::new(2, 16).unwrap();
        let f = vec![3.25; g.len()];
        for axis in 0..2 {
            assert!(g.central_diff(&f, axis).iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn sine_derivative_within_truncation_bound() {
        let g = Grid::new(1, 32).unwrap();
        let f = g.sample(|x| x[0].sin());
        let exact = g.sample(|x| x[0].cos());
        let bound = g.spacing().powi(2) / 6.0;
        assert!(bound < 0.0065);
        assert!(max_abs_diff(&g.central_diff(&f, 0), &exact) <= bound);
    }

    #[test]
    fn fourier_mode_gets_modified_wavenumber() {
        let g = Grid::new(1, 32).unwrap();
        let h = g.spacing();
        for q in [1.0f64, 3.0, 7.0, 15.0] {
            let re = g.sample(|x| (q * x[0]).cos());
            let im = g.sample(|x| (q * x[0]).sin());
            let k = (q * h).sin() / h;
            // d/dx e^{iqx} = i k e^{iqx}: re' = -k im, im' = k re
            let dre = g.central_diff(&re, 0);
            let dim = g.central_diff(&im, 0);
            for j in 0..g.len() {
                assert!((dre[j] + k * im[j]).abs() < 1e-12);
                assert!((dim[j] - k * re[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_axis_matches_first_after_transpose() {
        let g = Grid::new(2, 16).unwrap();
        let f = g.sample(|x| (x[0] + 2.0 * x[1]).sin() * x[1].cos());
        let ft: Vec<f64> = (0..g.len())
            .map(|j| {
                let (i1, i2) = (g.coord_index(j, 0), g.coord_index(j, 1));
                f[g.flat_index(&[i2, i1]).unwrap()]
            })
            .collect();
        let dy = g.central_diff(&f, 1);
        let dxt = g.central_diff(&ft, 0);
        for j in 0..g.len() {
            let (i1, i2) = (g.coord_index(j, 0), g.coord_index(j, 1));
            assert_eq!(dy[j], dxt[g.flat_index(&[i2, i1]).unwrap()]);
        }
    }

    #[test]
    fn second_order_convergence() {
        let err = |n: usize| {
            let g = Grid::new(1, n).unwrap();
            let f = g.sample(|x| x[0].sin());
            max_abs_diff(&g.central_diff(&f, 0), &g.sample(|x| x[0].cos()))
        };
        for n in [16, 32, 64] {
            let ratio = err(n) / err(2 * n);
            assert!((3.5..=4.5).contains(&ratio), "N={n}: ratio {ratio}");
        }
    }

    proptest! {
        #[test]
        fn shift_commutes_with_difference(
            values in prop::collection::vec(-10.0f64..10.0, 16),
            shift in 0usize..16,
        ) {
            let g = Grid::new(1, 16).unwrap();
            let n = values.len();
            let shifted: Vec<f64> = (0..n).map(|j| values[(j + shift) % n]).collect();
            let d = g.central_diff(&values, 0);
            let ds = g.central_diff(&shifted, 0);
            for j in 0..n {
                prop_assert_eq!(ds[j], d[(j + shift) % n]);
            }
        }

        #[test]
        fn difference_is_linear(
            f in prop::collection::vec(-10.0f64..10.0, 64),
            h in prop::collection::vec(-10.0f64..10.0, 64),
            alpha in -5.0f64..5.0,
            beta in -5.0f64..5.0,
        ) {
            let g = Grid::new(2, 8).unwrap();
            for axis in 0..2 {
                let combo: Vec<f64> = f.iter().zip(&h).map(|(a, b)| alpha * a + beta * b).collect();
                let lhs = g.central_diff(&combo, axis);
                let df = g.central_diff(&f, axis);
                let dh = g.central_diff(&h, axis);
                for j in 0..64 {
                    prop_assert!((lhs[j] - (alpha * df[j] + beta * dh[j])).abs() < 1e-12);
                }
            }
        }
    }
}
