//! Dense state-vector representation and elementary gate kernels.
//!
//! Qubit 0 is the least significant bit of the basis index. The forward
//! Fourier transform over a register maps the position representation to
//! the momentum representation with kernel `exp(+2πi jk/N)/√N`; the
//! inverse uses the conjugate kernel.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const TAU: f64 = std::f64::consts::TAU;

/// Normalized complex amplitude vector over `2^{n_q}` basis states.
///
/// The low `n_r` qubits form the system (Harper) register; one extra
/// qubit may be designated as the ancilla used by the slice method.
#[derive(Clone, Debug)]
pub struct QuantumState {
    pub n_q: usize,
    pub n_r: usize,
    pub ancilla: Option<usize>,
    pub amps: Vec<Complex64>,
}

impl QuantumState {
    /// Basis state `|index⟩` on `n_q` qubits.
    pub fn new_basis_state(n_q: usize, index: u64) -> Result<Self> {
        let dim = 1u64 << n_q;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, n_q });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim as usize];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n_q, n_r: n_q, ancilla: None, amps })
    }

    /// Basis state on a system register of `n_r` qubits plus one ancilla
    /// (initially `|0⟩`) at qubit index `n_r`.
    pub fn with_ancilla(n_r: usize, index: u64) -> Result<Self> {
        let mut s = Self::new_basis_state(n_r + 1, index)?;
        s.n_r = n_r;
        s.ancilla = Some(n_r);
        Ok(s)
    }

    pub fn from_amplitudes(n_q: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n_q {
            return Err(Error::SizeMismatch { left: n_q, right: amps.len() });
        }
        Ok(QuantumState { n_q, n_r: n_q, ancilla: None, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// `⟨self|other⟩` by direct summation.
    pub fn inner_product(&self, other: &QuantumState) -> Result<Complex64> {
        if self.n_q != other.n_q {
            return Err(Error::SizeMismatch { left: self.n_q, right: other.n_q });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }
}

/// Elementary gate vocabulary.
///
/// Every kind is unitary. One- and two-qubit gates carry an elementary
/// cost of 1; multi-controlled phases cost 1 as well (matching the gate
/// accounting used for the Chebyshev method, where each surviving
/// multi-controlled phase counts once). `OddMultiplyPermutation` and
/// `Diagonal` are compound operations carrying a modeled cost.
#[derive(Clone, Debug)]
pub enum Gate {
    Hadamard(usize),
    /// `exp(i·angle·σ_z/2)` on one qubit.
    ZRotation(usize, f64),
    /// Phase `exp(i·phase)` on basis states where all mask bits are set.
    /// A two-qubit controlled phase is the mask with two bits set.
    PhaseOnMask { mask: u64, phase: f64 },
    /// `exp(−i·angle·σ_x⊗σ_x)` on two qubits.
    XXRotation(usize, usize, f64),
    Swap(usize, usize),
    /// Basis permutation `|t⟩ → |m·t mod 2^len⟩` on the low `len` qubits
    /// starting at `lo`; `m` odd. Modeled cost of a controlled-adder
    /// network, `len²`.
    OddMultiplyPermutation { m: u64, lo: usize, len: usize },
    /// Diagonal phase table over the low `len` qubits at offset `lo`
    /// (index into `phases` is the register value). Used by the exact
    /// kick, whose circuit cost is modeled, not materialized.
    Diagonal { lo: usize, len: usize, phases: Arc<Vec<f64>>, cost: u64 },
}

impl Gate {
    pub fn cost(&self) -> u64 {
        match self {
            Gate::OddMultiplyPermutation { len, .. } => (*len as u64) * (*len as u64),
            Gate::Diagonal { cost, .. } => *cost,
            _ => 1,
        }
    }

    pub fn max_qubit(&self) -> usize {
        match self {
            Gate::Hadamard(q) | Gate::ZRotation(q, _) => *q,
            Gate::PhaseOnMask { mask, .. } => (63 - mask.leading_zeros().min(63)) as usize,
            Gate::XXRotation(a, b, _) | Gate::Swap(a, b) => (*a).max(*b),
            Gate::OddMultiplyPermutation { lo, len, .. } => lo + len - 1,
            Gate::Diagonal { lo, len, .. } => lo + len - 1,
        }
    }

    /// The gate with its unitary action inverted.
    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Hadamard(q) => Gate::Hadamard(*q),
            Gate::ZRotation(q, a) => Gate::ZRotation(*q, -a),
            Gate::PhaseOnMask { mask, phase } => Gate::PhaseOnMask { mask: *mask, phase: -phase },
            Gate::XXRotation(a, b, t) => Gate::XXRotation(*a, *b, -t),
            Gate::Swap(a, b) => Gate::Swap(*a, *b),
            Gate::OddMultiplyPermutation { m, lo, len } => Gate::OddMultiplyPermutation {
                m: mod_inverse_pow2(*m, *len),
                lo: *lo,
                len: *len,
            },
            Gate::Diagonal { lo, len, phases, cost } => Gate::Diagonal {
                lo: *lo,
                len: *len,
                phases: Arc::new(phases.iter().map(|p| -p).collect()),
                cost: *cost,
            },
        }
    }
}

/// Modular inverse of odd `m` modulo `2^len`.
pub fn mod_inverse_pow2(m: u64, len: usize) -> u64 {
    debug_assert!(m % 2 == 1);
    let modmask = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
    // Newton iteration doubles correct bits each round.
    let mut inv = 1u64;
    for _ in 0..7 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(m.wrapping_mul(inv)));
    }
    inv & modmask
}

/// Ordered elementary gates with exact per-gate accounting.
///
/// `n_g` is the accumulated elementary-gate cost. Each gate also carries
/// a noise weight: the number of elementary-gate time units `τ_g` the
/// static-imperfection Hamiltonian acts for after that gate. Weights sum
/// to `n_g`, so a compound or re-grouped emission keeps the total noise
/// exposure equal to its accounted cost.
#[derive(Clone, Debug, Default)]
pub struct GateSequence {
    pub gates: Vec<(Gate, f64)>,
    pub n_g: u64,
}

impl GateSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, gate: Gate) {
        let c = gate.cost();
        self.n_g += c;
        self.gates.push((gate, c as f64));
    }

    /// Append a gate group whose accounted cost is `total_cost`,
    /// distributing the noise weight uniformly over the group.
    pub fn push_group(&mut self, gates: Vec<Gate>, total_cost: u64) {
        if gates.is_empty() {
            return;
        }
        let w = total_cost as f64 / gates.len() as f64;
        self.n_g += total_cost;
        for g in gates {
            self.gates.push((g, w));
        }
    }

    pub fn extend(&mut self, other: &GateSequence) {
        self.n_g += other.n_g;
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn inverse(&self) -> GateSequence {
        let mut out = GateSequence::new();
        out.n_g = self.n_g;
        out.gates = self
            .gates
            .iter()
            .rev()
            .map(|(g, w)| (g.inverse(), *w))
            .collect();
        out
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Apply one gate in place.
pub fn apply_gate(state: &mut QuantumState, gate: &Gate) -> Result<()> {
    let n_q = state.n_q;
    if gate.max_qubit() >= n_q {
        return Err(Error::QubitOutOfRange { qubit: gate.max_qubit(), n_q });
    }
    let amps = &mut state.amps;
    match gate {
        Gate::Hadamard(q) => {
            let bit = 1usize << q;
            for base in indices_with_bit_clear(amps.len(), bit) {
                let a = amps[base];
                let b = amps[base | bit];
                amps[base] = (a + b) * FRAC_1_SQRT_2;
                amps[base | bit] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        Gate::ZRotation(q, angle) => {
            let bit = 1usize << q;
            let p0 = Complex64::from_polar(1.0, angle / 2.0);
            let p1 = p0.conj();
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & bit == 0 { p0 } else { p1 };
            }
        }
        Gate::PhaseOnMask { mask, phase } => {
            let mask = *mask as usize;
            let ph = Complex64::from_polar(1.0, *phase);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *a *= ph;
                }
            }
        }
        Gate::XXRotation(q1, q2, angle) => {
            let flip = (1usize << q1) | (1usize << q2);
            let (c, s) = (angle.cos(), angle.sin());
            let ms = Complex64::new(0.0, -s);
            for i in 0..amps.len() {
                let j = i ^ flip;
                if i < j {
                    let a = amps[i];
                    let b = amps[j];
                    amps[i] = a * c + b * ms;
                    amps[j] = b * c + a * ms;
                }
            }
        }
        Gate::Swap(q1, q2) => {
            let b1 = 1usize << q1;
            let b2 = 1usize << q2;
            for i in 0..amps.len() {
                let has1 = i & b1 != 0;
                let has2 = i & b2 != 0;
                if has1 && !has2 {
                    let j = (i & !b1) | b2;
                    amps.swap(i, j);
                }
            }
        }
        Gate::OddMultiplyPermutation { m, lo, len } => {
            if m % 2 == 0 {
                return Err(Error::EvenMultiplier { m: *m });
            }
            apply_register_permutation(amps, *lo, *len, |t| (m.wrapping_mul(t)) & ((1u64 << len) - 1));
        }
        Gate::Diagonal { lo, len, phases, .. } => {
            let regmask = ((1usize << len) - 1) << lo;
            for (i, a) in amps.iter_mut().enumerate() {
                let t = (i & regmask) >> lo;
                *a *= Complex64::from_polar(1.0, phases[t]);
            }
        }
    }
    Ok(())
}

fn indices_with_bit_clear(dim: usize, bit: usize) -> impl Iterator<Item = usize> {
    (0..dim).filter(move |i| i & bit == 0)
}

fn apply_register_permutation(
    amps: &mut [Complex64],
    lo: usize,
    len: usize,
    f: impl Fn(u64) -> u64,
) {
    let dim = amps.len();
    let regmask = ((1usize << len) - 1) << lo;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (i, &a) in amps.iter().enumerate() {
        let t = ((i & regmask) >> lo) as u64;
        let t2 = f(t) as usize;
        let j = (i & !regmask) | (t2 << lo);
        out[j] = a;
    }
    amps.copy_from_slice(&out);
}

pub fn apply_sequence(state: &mut QuantumState, seq: &GateSequence) -> Result<()> {
    for (g, _) in &seq.gates {
        apply_gate(state, g)?;
    }
    Ok(())
}

/// Gate decomposition of the Fourier transform over the `len` qubits
/// starting at `lo`, including the final swap network.
///
/// Gate count: `len(len+1)/2 + ⌊len/2⌋`.
pub fn qft_sequence(lo: usize, len: usize, inverse: bool) -> GateSequence {
    let mut seq = GateSequence::new();
    for i in (0..len).rev() {
        seq.push(Gate::Hadamard(lo + i));
        for j in (0..i).rev() {
            // controlled phase of angle 2π/2^{i-j+1} between qubits i and j
            let angle = TAU / (1u64 << (i - j + 1)) as f64;
            seq.push(Gate::PhaseOnMask {
                mask: (1u64 << (lo + i)) | (1u64 << (lo + j)),
                phase: angle,
            });
        }
    }
    for i in 0..len / 2 {
        seq.push(Gate::Swap(lo + i, lo + len - 1 - i));
    }
    if inverse {
        seq.inverse()
    } else {
        seq
    }
}

/// Apply the QFT over a register through its gate decomposition.
pub fn apply_qft(state: &mut QuantumState, lo: usize, len: usize, inverse: bool) -> Result<()> {
    let seq = qft_sequence(lo, len, inverse);
    apply_sequence(state, &seq)
}

/// FFT-backed QFT over the low `len` qubits, identical in action to
/// [`apply_qft`] up to floating-point roundoff. The forward transform
/// uses the kernel `exp(+2πi jk/N)/√N`.
pub fn apply_qft_fast(state: &mut QuantumState, lo: usize, len: usize, inverse: bool) {
    let n = 1usize << len;
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_forward(n) // exp(-2πi jk/N)
    } else {
        planner.plan_fft_inverse(n) // exp(+2πi jk/N)
    };
    let regmask = (n - 1) << lo;
    let dim = state.amps.len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    // iterate over all assignments of the qubits outside the register
    let mut outer = 0usize;
    loop {
        for t in 0..n {
            buf[t] = state.amps[outer | (t << lo)];
        }
        fft.process(&mut buf);
        for t in 0..n {
            state.amps[outer | (t << lo)] = buf[t] * scale;
        }
        // advance `outer` over indices with register bits clear
        let mut next = (outer | regmask) + 1;
        next &= !regmask;
        // carry bits through the register gap
        if next >= dim {
            break;
        }
        outer = next;
    }
}
