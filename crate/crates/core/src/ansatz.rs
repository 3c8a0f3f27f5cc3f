//! The normalization-preserving state-preparation circuit.
//!
//! `n − 1` position qubits receive a Hadamard layer and are never touched
//! again; every parameterized gate is a singly-controlled `U(2)` rotation on
//! the component qubit (the highest qubit). Each gate therefore acts on the
//! two-component spinor of a grid point or leaves it alone, and the pointwise
//! norm stays exactly one for any parameters.
//!
//! Because of that structure the full `2^n` state never has to be simulated
//! gate by gate: each grid point's spinor is the product of the gates whose
//! control condition it satisfies, applied to `(1, 0)ᵀ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScwfError};
use crate::field::WaveField;
use crate::grid::Grid;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Spinor = [Complex64; 2];

pub const PARAMS_PER_GATE: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which control value triggers a gate: solid circles fire on `|1⟩`, open circles on `|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Open = 0,
    Solid = 1,
}

impl Polarity {
    pub fn bit(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSlot {
    pub control: usize,
    pub polarity: Polarity,
    pub group: usize,
}

impl GateSlot {
    /// Whether the gate acts on grid point `j`.
    #[inline]
    pub fn acts_on(&self, j: usize) -> bool {
        (j >> self.control) & 1 == self.polarity.bit()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSpec {
    qubits: usize,
    groups: usize,
    gates: Vec<GateSlot>,
}

impl CircuitSpec {
    /// Layout for `qubits` qubits and `groups` gate groups.
    ///
    /// Gates run group by group; inside a group control qubits ascend and the
    /// solid gate of each control precedes the open one.
    pub fn build(qubits: usize, groups: usize) -> Result<Self> {
        if qubits < 2 {
            return Err(ScwfError::domain(format!("circuit needs at least 2 qubits, got {qubits}")));
        }
        if groups < 1 {
            return Err(ScwfError::domain("circuit needs at least one gate group"));
        }
        if qubits > usize::BITS as usize - 1 {
            return Err(ScwfError::domain(format!("{qubits} qubits cannot be indexed")));
        }
        let gates = (0..groups)
            .flat_map(|group| {
                (0..qubits - 1).flat_map(move |control| {
                    [Polarity::Solid, Polarity::Open].map(|polarity| GateSlot { control, polarity, group })
                })
            })
            .collect();
        Ok(CircuitSpec { qubits, groups, gates })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn gates(&self) -> &[GateSlot] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn parameter_count(&self) -> usize {
        PARAMS_PER_GATE * self.gates.len()
    }

    /// Number of grid points addressed by the position register, `2^(n−1)`.
    pub fn positions(&self) -> usize {
        1 << (self.qubits - 1)
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_count() {
            return Err(ScwfError::domain(format!(
                "theta has {} entries, circuit needs {}",
                theta.len(),
                self.parameter_count()
            )));
        }
        Ok(())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.len() != self.positions() {
            return Err(ScwfError::domain(format!(
                "{} qubits address {} points but the grid has {}",
                self.qubits,
                self.positions(),
                grid.len()
            )));
        }
        Ok(())
    }

    /// Unitary of every gate for the given parameters.
    pub fn unitaries(&self, theta: &[f64]) -> Result<Vec<Mat2>> {
        self.check_theta(theta)?;
        Ok(theta.chunks_exact(PARAMS_PER_GATE).map(|a| gate_unitary([a[0], a[1], a[2]])).collect())
    }

    /// Spinor of grid point `j`.
    pub fn point_spinor(&self, unitaries: &[Mat2], j: usize) -> Spinor {
        let mut s = [ONE, ZERO];
        for (gate, u) in self.gates.iter().zip(unitaries) {
            if gate.acts_on(j) {
                s = apply(u, &s);
            }
        }
        s
    }

    /// Spinors of every grid point, in flat-index order.
    pub fn spinors(&self, theta: &[f64]) -> Result<Vec<Spinor>> {
        let unitaries = self.unitaries(theta)?;
        Ok((0..self.positions()).into_par_iter().map(|j| self.point_spinor(&unitaries, j)).collect())
    }
}

/// `Rz(β)·Ry(α)·Rz(γ)` for angles `(α, β, γ)`.
pub fn gate_unitary(angles: [f64; 3]) -> Mat2 {
    let [alpha, beta, gamma] = angles;
    let (s, c) = (alpha / 2.0).sin_cos();
    let sum = (beta + gamma) / 2.0;
    let diff = (beta - gamma) / 2.0;
    [
        [Complex64::from_polar(c, -sum), Complex64::from_polar(-s, -diff)],
        [Complex64::from_polar(s, diff), Complex64::from_polar(c, sum)],
    ]
}

/// Partial derivatives of [`gate_unitary`] with respect to `α`, `β` and `γ`.
pub fn gate_unitary_derivatives(angles: [f64; 3]) -> [Mat2; 3] {
    let [alpha, beta, gamma] = angles;
    let (s, c) = (alpha / 2.0).sin_cos();
    let sum = (beta + gamma) / 2.0;
    let diff = (beta - gamma) / 2.0;
    let d_alpha = [
        [Complex64::from_polar(-s / 2.0, -sum), Complex64::from_polar(-c / 2.0, -diff)],
        [Complex64::from_polar(c / 2.0, diff), Complex64::from_polar(-s / 2.0, sum)],
    ];
    let u = gate_unitary(angles);
    let half_i = Complex64::new(0.0, 0.5);
    // each entry carries a phase e^{±iβ/2} e^{±iγ/2}
    let d_beta = [[-half_i * u[0][0], -half_i * u[0][1]], [half_i * u[1][0], half_i * u[1][1]]];
    let d_gamma = [[-half_i * u[0][0], half_i * u[0][1]], [-half_i * u[1][0], half_i * u[1][1]]];
    [d_alpha, d_beta, d_gamma]
}

#[inline]
pub fn apply(m: &Mat2, s: &Spinor) -> Spinor {
    [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]]
}

/// `m† s`.
#[inline]
pub fn apply_adjoint(m: &Mat2, s: &Spinor) -> Spinor {
    [m[0][0].conj() * s[0] + m[1][0].conj() * s[1], m[0][1].conj() * s[0] + m[1][1].conj() * s[1]]
}

/// Full register of `2^n` amplitudes; amplitude `c·2^(n−1) + j` holds
/// component `c` of grid point `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if qubits == 0 || amplitudes.len() != 1 << qubits {
            return Err(ScwfError::domain(format!(
                "{} amplitudes do not form a {qubits}-qubit register",
                amplitudes.len()
            )));
        }
        Ok(StateVector { qubits, amplitudes })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Prepare `U(θ)|0⟩^{⊗n}`.
pub fn forward(spec: &CircuitSpec, theta: &[f64]) -> Result<StateVector> {
    let spinors = spec.spinors(theta)?;
    Ok(assemble(spec.qubits, &spinors))
}

fn assemble(qubits: usize, spinors: &[Spinor]) -> StateVector {
    let half = spinors.len();
    let scale = 1.0 / (half as f64).sqrt();
    let mut amplitudes = vec![ZERO; 2 * half];
    for (j, s) in spinors.iter().enumerate() {
        amplitudes[j] = s[0] * scale;
        amplitudes[half + j] = s[1] * scale;
    }
    StateVector { qubits, amplitudes }
}

/// Read the wave function off the register, undoing the `1/√(2^(n−1))` scaling.
pub fn decode(state: &StateVector, grid: &Grid) -> Result<WaveField> {
    let half = state.amplitudes.len() / 2;
    if half != grid.len() {
        return Err(ScwfError::domain(format!(
            "{}-qubit state holds {} points, grid has {}",
            state.qubits,
            half,
            grid.len()
        )));
    }
    let scale = (half as f64).sqrt();
    let spinors: Vec<Spinor> =
        (0..half).map(|j| [state.amplitudes[j] * scale, state.amplitudes[half + j] * scale]).collect();
    WaveField::from_spinors(*grid, &spinors)
}

/// Inverse of [`decode`].
pub fn encode(psi: &WaveField) -> StateVector {
    let grid = psi.grid();
    let spinors: Vec<Spinor> = (0..grid.len()).map(|j| psi.spinor(j)).collect();
    assemble(grid.position_qubits() + 1, &spinors)
}

/// Parameter checkpoint as stored in `theta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaCheckpoint {
    pub n: usize,
    pub groups: usize,
    pub theta: Vec<f64>,
}

impl ThetaCheckpoint {
    pub fn new(spec: &CircuitSpec, theta: &[f64]) -> Self {
        ThetaCheckpoint { n: spec.qubits, groups: spec.groups, theta: theta.to_vec() }
    }

    /// Rebuild the circuit layout, checking that the parameter count fits it.
    pub fn spec(&self) -> Result<CircuitSpec> {
        let spec = CircuitSpec::build(self.n, self.groups)?;
        spec.check_theta(&self.theta)?;
        Ok(spec)
    }
}
