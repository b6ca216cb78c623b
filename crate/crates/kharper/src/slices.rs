//! Slice approximation of diagonal cosine kicks.
//!
//! An ancilla-mediated block
//! `M(α,U) = H C_U H e^{iα/2·σz} H C_{U⁻²} H e^{iα/2·σz} H C_U H`
//! (Hadamards and rotations on the ancilla, `C_U` the diagonal unitary
//! `U = exp(i·p_odd·2π·x̂/2^{n'})` controlled by the ancilla) equals
//! `exp(iα·cos φ̂)` on the ancilla-|0⟩ block up to O(α²). A kick
//! `exp(-ik·cos φ̂)` is `M(α,U)^{n_s}` with `α = -k/n_s`. The
//! symmetrized variant `M̃(α,U) = M(α/2,U)·M(α/2,U⁻¹)` is O(α³) per
//! block.
//!
//! Gate accounting uses the published per-kick budget
//! `4 + 2(n_r-a) + (n_s-1)(7 + 2(n_r-a))`; the emitted stream carries
//! noise weights that distribute exactly that budget over its gates, so
//! noisy runs see the accounted exposure regardless of how the stream
//! is grouped.

use crate::error::{Error, Result};
use crate::harper::{factor_pow2, HarperParams};
use crate::state::{
    apply_gate, apply_qft_fast, qft_sequence, Gate, GateSequence, QuantumState, TAU,
};

#[derive(Clone, Copy, Debug)]
pub struct SliceConfig {
    /// Slices per kick.
    pub n_s: usize,
    /// Use M̃ instead of M.
    pub symmetrized: bool,
}

impl SliceConfig {
    pub fn plain(n_s: usize) -> Self {
        SliceConfig { n_s, symmetrized: false }
    }
}

/// Two-qubit gates realizing `C_{U^s}`, `U = exp(i·p_odd·2π·x̂/2^{n'})`
/// on the low `n_prime` register qubits, controlled by `ancilla`.
/// Phases that are multiples of 2π (the top register qubit for |s|=2)
/// are dropped.
pub fn controlled_diagonal_gates(
    ancilla: usize,
    p_odd: u64,
    n_prime: usize,
    s: i64,
) -> Result<Vec<Gate>> {
    if p_odd % 2 == 0 {
        return Err(Error::EvenMultiplier { m: p_odd });
    }
    let np = 1u64 << n_prime;
    let mut gates = Vec::with_capacity(n_prime);
    for j in 0..n_prime {
        // multiple of 2π exactly when 2^j·|s|·p_odd ≡ 0 mod 2^{n'}
        let steps = (p_odd as i64 * s).unsigned_abs() << j;
        if steps % np == 0 {
            continue;
        }
        let phase = s as f64 * p_odd as f64 * TAU * (1u64 << j) as f64 / np as f64;
        gates.push(Gate::PhaseOnMask {
            mask: (1u64 << ancilla) | (1u64 << j),
            phase,
        });
    }
    Ok(gates)
}

/// Apply `C_{U^s}` directly.
pub fn controlled_diagonal_exp(
    state: &mut QuantumState,
    ancilla: usize,
    p_odd: u64,
    n_prime: usize,
    s: i64,
) -> Result<()> {
    for g in controlled_diagonal_gates(ancilla, p_odd, n_prime, s)? {
        apply_gate(state, &g)?;
    }
    Ok(())
}

/// Gate stream for one `M(α,U)` block; `invert_u` swaps `U ↔ U⁻¹`
/// (used by the symmetrized variant). Gates are listed in application
/// order.
pub fn slice_block_gates(
    ancilla: usize,
    p_odd: u64,
    n_prime: usize,
    alpha: f64,
    invert_u: bool,
) -> Result<Vec<Gate>> {
    let sgn: i64 = if invert_u { -1 } else { 1 };
    let mut gates = Vec::new();
    let cu = |g: &mut Vec<Gate>, s: i64| -> Result<()> {
        g.extend(controlled_diagonal_gates(ancilla, p_odd, n_prime, s)?);
        Ok(())
    };
    gates.push(Gate::Hadamard(ancilla));
    cu(&mut gates, sgn)?;
    gates.push(Gate::Hadamard(ancilla));
    gates.push(Gate::ZRotation(ancilla, alpha));
    gates.push(Gate::Hadamard(ancilla));
    cu(&mut gates, -2 * sgn)?;
    gates.push(Gate::Hadamard(ancilla));
    gates.push(Gate::ZRotation(ancilla, alpha));
    gates.push(Gate::Hadamard(ancilla));
    cu(&mut gates, sgn)?;
    gates.push(Gate::Hadamard(ancilla));
    Ok(gates)
}

/// Apply one block in place.
pub fn slice_block(
    state: &mut QuantumState,
    ancilla: usize,
    p_odd: u64,
    n_prime: usize,
    alpha: f64,
    symmetrized: bool,
) -> Result<()> {
    let blocks: Vec<Vec<Gate>> = if symmetrized {
        vec![
            slice_block_gates(ancilla, p_odd, n_prime, alpha / 2.0, false)?,
            slice_block_gates(ancilla, p_odd, n_prime, alpha / 2.0, true)?,
        ]
    } else {
        vec![slice_block_gates(ancilla, p_odd, n_prime, alpha, false)?]
    };
    for b in blocks {
        for g in &b {
            apply_gate(state, g)?;
        }
    }
    Ok(())
}

/// Published elementary-gate budget for one sliced kick.
pub fn slice_gate_count(n_r: usize, a: u32, n_s: usize) -> u64 {
    let np = 2 * (n_r - a as usize) as u64;
    4 + np + (n_s as u64 - 1) * (7 + np)
}

/// Accounted gate stream for `exp(-ik·cos φ̂)` via `n_s` blocks,
/// `p = 2^a·p_odd`, blocks on the low `n_r − a` qubits.
pub fn slice_kick_sequence(
    n_r: usize,
    ancilla: usize,
    k: f64,
    p: u64,
    config: &SliceConfig,
) -> Result<GateSequence> {
    if config.n_s == 0 {
        return Err(Error::ZeroSlices);
    }
    let (a, p_odd) = factor_pow2(p);
    let n_prime = n_r - a as usize;
    let alpha = -k / config.n_s as f64;
    let mut seq = GateSequence::new();
    for slice in 0..config.n_s {
        let mut gates = slice_block_gates(ancilla, p_odd, n_prime, if config.symmetrized { alpha / 2.0 } else { alpha }, false)?;
        if config.symmetrized {
            gates.extend(slice_block_gates(ancilla, p_odd, n_prime, alpha / 2.0, true)?);
        }
        let cost = if slice == 0 {
            4 + 2 * n_prime as u64
        } else {
            7 + 2 * n_prime as u64
        };
        seq.push_group(gates, cost);
    }
    debug_assert_eq!(seq.n_g, slice_gate_count(n_r, a, config.n_s));
    Ok(seq)
}

/// Apply one sliced kick in place.
pub fn slice_kick(
    state: &mut QuantumState,
    k: f64,
    p: u64,
    config: &SliceConfig,
) -> Result<u64> {
    let ancilla = state.ancilla.ok_or(Error::QubitOutOfRange {
        qubit: state.n_q,
        n_q: state.n_q,
    })?;
    let seq = slice_kick_sequence(state.n_r, ancilla, k, p, config)?;
    for (g, _) in &seq.gates {
        apply_gate(state, g)?;
    }
    Ok(seq.n_g)
}

/// One Floquet period by the slice method: sliced θ kick, Fourier to
/// momentum, sliced momentum kick (p = m·Q pattern, i.e. `p_cells`),
/// back to θ. The state needs the extra ancilla qubit.
pub struct SliceStep {
    pub params: HarperParams,
    pub config: SliceConfig,
    theta_seq: GateSequence,
    momentum_seq: GateSequence,
    /// Accounted gates per period: two kick budgets plus two transform
    /// circuits.
    pub n_g_per_step: u64,
}

impl SliceStep {
    pub fn new(params: HarperParams, config: SliceConfig) -> Result<Self> {
        let n_r = params.n_r;
        let hbar = params.hbar();
        let theta_seq =
            slice_kick_sequence(n_r, n_r, params.k / hbar, params.q_cells, &config)?;
        let momentum_seq =
            slice_kick_sequence(n_r, n_r, params.l / hbar, params.p_cells, &config)?;
        let qft_cost = qft_sequence(0, n_r, false).n_g;
        let n_g_per_step = theta_seq.n_g + momentum_seq.n_g + 2 * qft_cost;
        Ok(SliceStep { params, config, theta_seq, momentum_seq, n_g_per_step })
    }

    /// Full accounted sequence for one period, transforms as gates.
    pub fn sequence(&self) -> GateSequence {
        let n_r = self.params.n_r;
        let mut seq = GateSequence::new();
        seq.extend(&self.theta_seq);
        seq.extend(&qft_sequence(0, n_r, false));
        seq.extend(&self.momentum_seq);
        seq.extend(&qft_sequence(0, n_r, true));
        seq
    }

    /// Noiseless period with FFT transforms.
    pub fn step(&self, state: &mut QuantumState) -> Result<()> {
        let n_r = self.params.n_r;
        for (g, _) in &self.theta_seq.gates {
            apply_gate(state, g)?;
        }
        apply_qft_fast(state, 0, n_r, false);
        for (g, _) in &self.momentum_seq.gates {
            apply_gate(state, g)?;
        }
        apply_qft_fast(state, 0, n_r, true);
        Ok(())
    }
}
