//! Static imperfections: a fixed disorder Hamiltonian
//! `H₁ = Σ_i (Δ₀+δ_i)σᶻ_i + Σ_i J_i σˣ_i σˣ_{i+1}` (circular chain)
//! acting unitarily for a time `τ_g` after every elementary gate.
//!
//! The disorder is frozen per realization: δ_i and J_i are drawn once,
//! uniformly from [-ε/2, ε/2] with τ_g normalized to 1, and reused for
//! the whole run. Gates are instantaneous; errors accumulate coherently.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::state::{apply_gate, Gate, GateSequence, QuantumState};

#[derive(Clone, Debug)]
pub struct StaticDisorder {
    pub n_q: usize,
    pub epsilon: f64,
    pub delta0: f64,
    pub tau_g: f64,
    pub delta: Vec<f64>,
    pub coupling: Vec<f64>,
    pub seed: u64,
}

/// Stable mix of a master seed and a realization index into one RNG
/// seed (splitmix64 finalizer).
pub fn mix_seed(master: u64, realization: u64) -> u64 {
    let mut z = master ^ realization.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draw one disorder realization, deterministic in `seed`.
pub fn sample_disorder(n_q: usize, epsilon: f64, seed: u64) -> StaticDisorder {
    assert!(epsilon >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_: usize| -> f64 {
        if epsilon == 0.0 {
            // keep the stream position independent of ε
            let _ = rng.gen::<f64>();
            0.0
        } else {
            rng.gen_range(-epsilon / 2.0..=epsilon / 2.0)
        }
    };
    let delta: Vec<f64> = (0..n_q).map(&mut draw).collect();
    let coupling: Vec<f64> = (0..n_q).map(&mut draw).collect();
    StaticDisorder { n_q, epsilon, delta0: 0.0, tau_g: 1.0, delta, coupling, seed }
}

/// Cached propagator tables for one disorder realization.
pub struct NoiseChannel {
    pub disorder: StaticDisorder,
    /// σᶻ energy per basis state, Σ_i (Δ₀+δ_i)·s_i, s_i = ±1 for bit 0/1.
    e_z: Vec<f64>,
    z_cache: HashMap<u64, Arc<Vec<Complex64>>>,
}

impl NoiseChannel {
    pub fn new(disorder: StaticDisorder) -> Self {
        let dim = 1usize << disorder.n_q;
        let mut e_z = vec![0.0f64; dim];
        for b in 0..dim {
            let mut e = 0.0;
            for (i, &d) in disorder.delta.iter().enumerate() {
                let s = if b >> i & 1 == 0 { 1.0 } else { -1.0 };
                e += (disorder.delta0 + d) * s;
            }
            e_z[b] = e;
        }
        NoiseChannel { disorder, e_z, z_cache: HashMap::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.disorder.epsilon == 0.0 && self.disorder.delta0 == 0.0
    }

    fn z_table(&mut self, duration: f64) -> Arc<Vec<Complex64>> {
        let key = duration.to_bits();
        if let Some(t) = self.z_cache.get(&key) {
            return t.clone();
        }
        let table: Arc<Vec<Complex64>> = Arc::new(
            self.e_z
                .iter()
                .map(|&e| Complex64::from_polar(1.0, -e * duration))
                .collect(),
        );
        self.z_cache.insert(key, table.clone());
        table
    }

    /// `exp(-iH₁·duration)` by second-order splitting: half the σᶻ part,
    /// the full σˣσˣ part (all its terms commute), the other σᶻ half.
    pub fn apply(&mut self, state: &mut QuantumState, duration: f64) {
        if self.is_trivial() || duration == 0.0 {
            return;
        }
        let n_q = self.disorder.n_q;
        let zt = self.z_table(duration / 2.0);
        for (b, a) in state.amps.iter_mut().enumerate() {
            *a *= zt[b];
        }
        if n_q >= 2 {
            for i in 0..n_q {
                let j = (i + 1) % n_q;
                if i == j {
                    continue;
                }
                let angle = self.disorder.coupling[i] * duration;
                if angle != 0.0 {
                    apply_gate(state, &Gate::XXRotation(i, j, angle)).unwrap();
                }
            }
        }
        for (b, a) in state.amps.iter_mut().enumerate() {
            *a *= zt[b];
        }
    }
}

/// Convenience wrapper applying `exp(-iH₁τ_g)` once.
pub fn apply_imperfection(state: &mut QuantumState, channel: &mut NoiseChannel) {
    let tau = channel.disorder.tau_g;
    channel.apply(state, tau);
}

/// Apply a gate stream with the disorder acting between gates. Each
/// gate's noise weight scales its exposure, so a stream whose weights
/// sum to `n_g` sees exactly `n_g·τ_g` of disorder evolution.
pub fn noisy_apply(
    state: &mut QuantumState,
    seq: &GateSequence,
    channel: &mut NoiseChannel,
) -> crate::error::Result<()> {
    let tau = channel.disorder.tau_g;
    for (g, w) in &seq.gates {
        apply_gate(state, g)?;
        channel.apply(state, w * tau);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harper::HarperParams;
    use crate::slices::{SliceConfig, SliceStep};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;

    fn random_state(n_q: usize, seed: u64) -> QuantumState {
        let mut rng = StdRng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..1usize << n_q)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let mut s = QuantumState::from_amplitudes(n_q, amps).unwrap();
        s.normalize();
        s
    }

    #[test]
    fn zero_epsilon_draws_zeros_and_acts_trivially() {
        let d = sample_disorder(6, 0.0, 42);
        assert!(d.delta.iter().chain(&d.coupling).all(|&x| x == 0.0));
        let mut ch = NoiseChannel::new(d);
        let s0 = random_state(6, 1);
        let mut s = s0.clone();
        apply_imperfection(&mut s, &mut ch);
        assert!(s0.fidelity(&s).unwrap() > 1.0 - 1e-15);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = sample_disorder(8, 1e-3, 7);
        let b = sample_disorder(8, 1e-3, 7);
        assert_eq!(a.delta, b.delta);
        assert_eq!(a.coupling, b.coupling);
        let c = sample_disorder(8, 1e-3, 8);
        assert_ne!(a.delta, c.delta);
    }

    #[test]
    fn disorder_statistics_within_bounds() {
        let eps = 0.02;
        let mut all = Vec::new();
        for seed in 0..1_250u64 {
            let d = sample_disorder(8, eps, mix_seed(99, seed));
            all.extend(d.delta);
        }
        assert_eq!(all.len(), 10_000);
        let (mn, mx) = all.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(mn >= -eps / 2.0 && mx <= eps / 2.0);
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        // σ of the mean is ε/√(12·10⁴) ≈ 5.8e-5; allow 4σ
        assert!(mean.abs() < 4.0 * eps / (12.0f64 * 1e4).sqrt(), "mean {mean}");
    }

    /// Dense `exp(-iH·τ)` by Taylor with scaling and squaring.
    fn dense_expm(h: &[Vec<Complex64>], tau: f64) -> Vec<Vec<Complex64>> {
        let n = h.len();
        let norm: f64 = h
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let s = ((norm * tau).log2().ceil().max(0.0)) as u32 + 4;
        let scale = Complex64::new(0.0, -tau / 2f64.powi(s as i32));
        let mut term: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect())
            .collect();
        let mut result = term.clone();
        for order in 1..=20 {
            // term = term·(scale·H)/order
            let mut next = vec![vec![Complex64::new(0.0, 0.0); n]; n];
            for i in 0..n {
                for k in 0..n {
                    let t = term[i][k] * scale / order as f64;
                    if t.norm_sqr() == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i][j] += t * h[k][j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    result[i][j] += next[i][j];
                }
            }
            term = next;
        }
        for _ in 0..s {
            let mut sq = vec![vec![Complex64::new(0.0, 0.0); n]; n];
            for i in 0..n {
                for k in 0..n {
                    let t = result[i][k];
                    for j in 0..n {
                        sq[i][j] += t * result[k][j];
                    }
                }
            }
            result = sq;
        }
        result
    }

    fn dense_h1(d: &StaticDisorder) -> Vec<Vec<Complex64>> {
        let n_q = d.n_q;
        let dim = 1usize << n_q;
        let mut h = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for b in 0..dim {
            let mut e = 0.0;
            for i in 0..n_q {
                let s = if b >> i & 1 == 0 { 1.0 } else { -1.0 };
                e += (d.delta0 + d.delta[i]) * s;
            }
            h[b][b] += Complex64::new(e, 0.0);
            for i in 0..n_q {
                let j = (i + 1) % n_q;
                if i == j {
                    continue;
                }
                let b2 = b ^ (1 << i) ^ (1 << j);
                h[b2][b] += Complex64::new(d.coupling[i], 0.0);
            }
        }
        h
    }

    #[test]
    fn splitting_error_third_order_in_duration() {
        // strong artificial disorder so the error is resolvable
        let mut d = sample_disorder(3, 0.8, 5);
        d.coupling = vec![0.31, -0.44, 0.27];
        d.delta = vec![0.4, -0.35, 0.22];
        let h = dense_h1(&d);
        let errs: Vec<f64> = [1.0f64, 0.5, 0.25]
            .iter()
            .map(|&tau| {
                let u = dense_expm(&h, tau);
                let s0 = random_state(3, 17);
                let mut s = s0.clone();
                let mut ch = NoiseChannel::new(d.clone());
                ch.apply(&mut s, tau);
                let mut err = 0.0;
                for i in 0..8 {
                    let mut expect = Complex64::new(0.0, 0.0);
                    for j in 0..8 {
                        expect += u[i][j] * s0.amps[j];
                    }
                    err += (s.amps[i] - expect).norm_sqr();
                }
                err.sqrt()
            })
            .collect();
        let slope = (errs[0] / errs[2]).ln() / 4f64.ln();
        assert!((slope - 3.0).abs() < 0.2, "splitting slope {slope}, errs {errs:?}");
    }

    #[test]
    fn small_epsilon_splitting_error_negligible() {
        let d = sample_disorder(4, 1e-3, 11);
        let h = dense_h1(&d);
        let u = dense_expm(&h, 1.0);
        let s0 = random_state(4, 23);
        let mut s = s0.clone();
        let mut ch = NoiseChannel::new(d);
        ch.apply(&mut s, 1.0);
        let mut err = 0.0;
        for i in 0..16 {
            let mut expect = Complex64::new(0.0, 0.0);
            for j in 0..16 {
                expect += u[i][j] * s0.amps[j];
            }
            err += (s.amps[i] - expect).norm_sqr();
        }
        assert!(err.sqrt() <= 1e-9, "per-application error {}", err.sqrt());
    }

    #[test]
    fn channel_is_unitary() {
        let d = sample_disorder(5, 0.3, 9);
        let mut ch = NoiseChannel::new(d);
        let mut s = random_state(5, 3);
        for _ in 0..200 {
            ch.apply(&mut s, 1.0);
        }
        assert_abs_diff_eq!(s.norm_sq(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_weights_equal_plain_application() {
        let params = HarperParams::cylinder(1.0, 5.0, 4, 0.3).unwrap();
        let stepper = SliceStep::new(params, SliceConfig::plain(5)).unwrap();
        let seq = stepper.sequence();
        let s0 = {
            let mut s = QuantumState::with_ancilla(4, 3).unwrap();
            s.normalize();
            s
        };
        let mut a = s0.clone();
        let mut b = s0.clone();
        let mut ch = NoiseChannel::new(sample_disorder(5, 0.0, 1));
        noisy_apply(&mut a, &seq, &mut ch).unwrap();
        crate::state::apply_sequence(&mut b, &seq).unwrap();
        assert!(a.fidelity(&b).unwrap() > 1.0 - 1e-13);
    }

    #[test]
    fn fidelity_decays_with_epsilon() {
        let params = HarperParams::cylinder(1.0, 5.0, 5, 0.3).unwrap();
        let stepper = SliceStep::new(params, SliceConfig::plain(10)).unwrap();
        let seq = stepper.sequence();
        let t = 10;
        let mean_fid = |eps: f64| -> f64 {
            let mut total = 0.0;
            for r in 0..10u64 {
                let mut clean = QuantumState::with_ancilla(5, 0).unwrap();
                let mut noisy = clean.clone();
                let mut ch = NoiseChannel::new(sample_disorder(6, eps, mix_seed(5, r)));
                for _ in 0..t {
                    crate::state::apply_sequence(&mut clean, &seq).unwrap();
                    noisy_apply(&mut noisy, &seq, &mut ch).unwrap();
                }
                total += clean.fidelity(&noisy).unwrap();
            }
            total / 10.0
        };
        let f_lo = mean_fid(1e-5);
        let f_mid = mean_fid(1e-4);
        let f_hi = mean_fid(1e-3);
        assert!(f_lo > f_mid && f_mid > f_hi, "fids {f_lo} {f_mid} {f_hi}");
        assert!(f_lo > 0.999);
    }
}
