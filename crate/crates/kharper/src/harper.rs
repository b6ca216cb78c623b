//! Kicked Harper map: parameters, the exact Floquet step, and its gate
//! cost model.
//!
//! One period is `U = exp(-iL·cos(I)/ħ) · exp(-iK·cos(θ)/ħ)` with
//! `ħ = 2π·m/N_H` held as the exact integer `m`. Phase space is either a
//! cylinder closed in θ (Q = 1, momentum unbounded) or a P×Q torus.
//! Grids: `θ_j = 2πQ·j/N_H`, `I_n = 2πP·n/N_H`; on the cylinder P = m,
//! so the momentum kick phase is `cos(2π·m·n/N_H)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{apply_qft_fast, qft_sequence, Gate, GateSequence, QuantumState, TAU};

/// Kick strengths, register size and the rational ħ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarperParams {
    pub k: f64,
    pub l: f64,
    pub n_r: usize,
    /// Numerator of ħ/(2π) = m/N_H. Always 1 ≤ m < N_H.
    pub m: u64,
    /// Momentum cells (torus) or m (cylinder).
    pub p_cells: u64,
    /// Position cells; 1 on the cylinder.
    pub q_cells: u64,
    /// Momentum unbounded in the classical map when true.
    pub cylinder: bool,
}

impl HarperParams {
    /// Cylinder geometry with ħ/(2π) set to the nearest fraction with
    /// denominator `2^{n_r}`.
    pub fn cylinder(k: f64, l: f64, n_r: usize, hbar_over_tau: f64) -> Result<Self> {
        let (m, _a, _m_odd) = nearest_hbar(n_r, hbar_over_tau)?;
        Ok(HarperParams { k, l, n_r, m, p_cells: m, q_cells: 1, cylinder: true })
    }

    /// P×Q torus; ħ = 2π·PQ/N_H.
    pub fn torus(k: f64, l: f64, n_r: usize, p_cells: u64, q_cells: u64) -> Result<Self> {
        let m = p_cells * q_cells;
        if m == 0 {
            return Err(Error::HbarUnderflow);
        }
        if m >= 1u64 << n_r {
            return Err(Error::InvalidConfig {
                field: "p_cells*q_cells".into(),
                reason: format!("m={m} must be below N_H=2^{n_r}"),
            });
        }
        Ok(HarperParams { k, l, n_r, m, p_cells, q_cells, cylinder: false })
    }

    pub fn n_states(&self) -> u64 {
        1u64 << self.n_r
    }

    pub fn hbar(&self) -> f64 {
        TAU * self.m as f64 / self.n_states() as f64
    }

    /// Mean level spacing 2π/N_H of the Floquet eigenphases.
    pub fn level_spacing(&self) -> f64 {
        TAU / self.n_states() as f64
    }

    pub fn theta(&self, j: u64) -> f64 {
        TAU * (self.q_cells * j) as f64 / self.n_states() as f64
    }

    pub fn momentum(&self, n: u64) -> f64 {
        TAU * (self.p_cells * n) as f64 / self.n_states() as f64
    }

    /// m = 2^a · m_odd.
    pub fn m_factored(&self) -> (u32, u64) {
        factor_pow2(self.m)
    }
}

/// Round `target·2^{n_r}` to the nearest integer, ties upward.
/// Returns `(m, a, m_odd)` with `m = 2^a · m_odd`.
pub fn nearest_hbar(n_r: usize, target: f64) -> Result<(u64, u32, u64)> {
    if !(0.0..1.0).contains(&target) || target <= 0.0 {
        return Err(Error::InvalidConfig {
            field: "hbar_over_tau".into(),
            reason: format!("{target} outside (0, 1)"),
        });
    }
    let m = (target * (1u64 << n_r) as f64 + 0.5).floor() as u64;
    if m == 0 {
        return Err(Error::HbarUnderflow);
    }
    let (a, m_odd) = factor_pow2(m);
    Ok((m, a, m_odd))
}

pub fn factor_pow2(m: u64) -> (u32, u64) {
    debug_assert!(m > 0);
    let a = m.trailing_zeros();
    (a, m >> a)
}

/// Fixed-point rounding to `n_p` fractional bits; `None` keeps full
/// double precision.
fn fix(x: f64, n_p: Option<u32>) -> f64 {
    match n_p {
        None => x,
        Some(b) => {
            let scale = (1u64 << b) as f64;
            (x * scale).round() / scale
        }
    }
}

/// Phase table for the position kick, `-K·⌊cos θ_j⌋_{n_p}/ħ`.
pub fn theta_kick_phases(params: &HarperParams, n_p: Option<u32>) -> Vec<f64> {
    let hbar = params.hbar();
    (0..params.n_states())
        .map(|j| -params.k * fix(params.theta(j).cos(), n_p) / hbar)
        .collect()
}

/// Phase table for the momentum kick, `-L·⌊cos I_n⌋_{n_p}/ħ`.
pub fn momentum_kick_phases(params: &HarperParams, n_p: Option<u32>) -> Vec<f64> {
    let hbar = params.hbar();
    (0..params.n_states())
        .map(|n| -params.l * fix(params.momentum(n).cos(), n_p) / hbar)
        .collect()
}

fn apply_phase_table(state: &mut QuantumState, n_r: usize, phases: &[f64]) {
    let gridmask = (1usize << n_r) - 1;
    for (i, a) in state.amps.iter_mut().enumerate() {
        *a *= Complex64::from_polar(1.0, phases[i & gridmask]);
    }
}

/// Multiply each θ-basis amplitude by `exp(-iK·⌊cos θ_j⌋_{n_p}/ħ)`.
/// Acts on the low `n_r` qubits; ancilla qubits pass through.
pub fn exact_kick_theta(state: &mut QuantumState, params: &HarperParams, n_p: Option<u32>) {
    apply_phase_table(state, params.n_r, &theta_kick_phases(params, n_p));
}

/// Momentum-representation kick `exp(-iL·⌊cos I_n⌋_{n_p}/ħ)`.
pub fn exact_kick_momentum(state: &mut QuantumState, params: &HarperParams, n_p: Option<u32>) {
    apply_phase_table(state, params.n_r, &momentum_kick_phases(params, n_p));
}

/// One Floquet period at full precision: kick in θ, Fourier to n, kick
/// in n, back to θ. State enters and leaves in the θ representation.
pub fn exact_step(state: &mut QuantumState, params: &HarperParams) {
    exact_kick_theta(state, params, None);
    apply_qft_fast(state, 0, params.n_r, false);
    exact_kick_momentum(state, params, None);
    apply_qft_fast(state, 0, params.n_r, true);
}

/// Precomputed tables for repeated [`exact_step`] application.
pub struct ExactStep {
    pub params: HarperParams,
    theta_phases: Vec<Complex64>,
    momentum_phases: Vec<Complex64>,
}

impl ExactStep {
    pub fn new(params: HarperParams) -> Self {
        let to_c = |v: Vec<f64>| -> Vec<Complex64> {
            v.into_iter().map(|p| Complex64::from_polar(1.0, p)).collect()
        };
        ExactStep {
            params,
            theta_phases: to_c(theta_kick_phases(&params, None)),
            momentum_phases: to_c(momentum_kick_phases(&params, None)),
        }
    }

    pub fn step(&self, state: &mut QuantumState) {
        let gridmask = (1usize << self.params.n_r) - 1;
        for (i, a) in state.amps.iter_mut().enumerate() {
            *a *= self.theta_phases[i & gridmask];
        }
        apply_qft_fast(state, 0, self.params.n_r, false);
        for (i, a) in state.amps.iter_mut().enumerate() {
            *a *= self.momentum_phases[i & gridmask];
        }
        apply_qft_fast(state, 0, self.params.n_r, true);
    }
}

/// Elementary-gate cost model for one exact period with an `n_p`-bit
/// cosine register: `c₃·n_r²·n_p` for the two compute/uncompute cosine
/// evaluations (c₃ = 2, one quadratic-cost fixed-point network per
/// kick), `2·n_p` phase kickback gates, and two transforms.
pub const EXACT_C3: u64 = 2;

pub fn exact_gate_count(n_r: usize, n_p: usize) -> u64 {
    let qft = (n_r * (n_r + 1) / 2 + n_r / 2) as u64;
    EXACT_C3 * (n_r * n_r * n_p) as u64 + 2 * qft + 2 * n_p as u64
}

/// One period as an accounted gate sequence. The two kicks are emitted
/// as diagonal table gates carrying the modeled cost split from
/// [`exact_gate_count`]; the transforms are elementary.
pub fn exact_step_sequence(params: &HarperParams, n_p: usize) -> GateSequence {
    let n_r = params.n_r;
    let kick_cost = EXACT_C3 * (n_r * n_r * n_p) as u64 / 2 + n_p as u64;
    let mut seq = GateSequence::new();
    seq.push(Gate::Diagonal {
        lo: 0,
        len: n_r,
        phases: Arc::new(theta_kick_phases(params, Some(n_p as u32))),
        cost: kick_cost,
    });
    seq.extend(&qft_sequence(0, n_r, false));
    seq.push(Gate::Diagonal {
        lo: 0,
        len: n_r,
        phases: Arc::new(momentum_kick_phases(params, Some(n_p as u32))),
        cost: kick_cost,
    });
    seq.extend(&qft_sequence(0, n_r, true));
    seq
}
