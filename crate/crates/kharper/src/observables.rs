//! Measured quantities: momentum distributions, participation ratio,
//! moments, localization-length fits, Husimi phase-space grids, coarse
//! graining, and the analytic threshold predictors.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::harper::HarperParams;
use crate::state::{QuantumState, TAU};

use std::f64::consts::PI;

/// Probabilities over the momentum register, ancilla qubits traced out.
pub fn momentum_distribution(state: &QuantumState) -> Vec<f64> {
    let n_h = 1usize << state.n_r;
    let mut p = vec![0.0f64; n_h];
    for (i, a) in state.amps.iter().enumerate() {
        p[i & (n_h - 1)] += a.norm_sqr();
    }
    p
}

/// Inverse participation ratio `ξ = 1/Σ p(n)²`.
pub fn ipr(p: &[f64]) -> Result<f64> {
    let s: f64 = p.iter().map(|x| x * x).sum();
    if s <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(1.0 / s)
}

/// Variance `Σ p(n)(n−⟨n⟩)²`.
pub fn second_moment(p: &[f64]) -> f64 {
    let mean: f64 = p.iter().enumerate().map(|(n, &x)| n as f64 * x).sum();
    p.iter()
        .enumerate()
        .map(|(n, &x)| x * (n as f64 - mean) * (n as f64 - mean))
        .sum()
}

/// Probabilities decay as `p ~ e^{−2|n−m|/l}` around the peak (the
/// amplitude envelope decays as `e^{−|n−m|/l}`). Fits `log p` by least
/// squares on both flanks of the maximum within `±w`, skipping bins
/// below 1e−14, and averages the two flank slopes.
pub fn fit_localization_length(p: &[f64], w: usize) -> Result<f64> {
    const FLOOR: f64 = 1e-14;
    let n = p.len();
    let m = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
        .ok_or(Error::EmptyDistribution)?
        .0;
    let mut slopes = Vec::new();
    let mut usable = 0usize;
    for flank in [-1i64, 1] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for d in 0..=w as i64 {
            let idx = m as i64 + flank * d;
            if idx < 0 || idx >= n as i64 {
                break;
            }
            let v = p[idx as usize];
            if v < FLOOR {
                continue;
            }
            xs.push(d as f64);
            ys.push(v.ln());
        }
        usable += xs.len();
        if xs.len() >= 3 {
            let np = xs.len() as f64;
            let sx: f64 = xs.iter().sum();
            let sy: f64 = ys.iter().sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
            if slope < 0.0 {
                slopes.push(-slope);
            }
        }
    }
    if usable < 4 || slopes.is_empty() {
        return Err(Error::FitFailure(format!(
            "{usable} usable points, {} decaying flanks",
            slopes.len()
        )));
    }
    let mean_slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    Ok(2.0 / mean_slope)
}

/// Fit window from the participation ratio: `l ≈ ξ/2` for an
/// exponential profile, window `max(8, 4·l)`.
pub fn default_fit_window(xi: f64) -> usize {
    (2.0 * xi).round().max(8.0) as usize
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.fidelity(b)
}

/// Phase-space density on an N_θ×N_n grid.
#[derive(Clone, Debug)]
pub struct HusimiGrid {
    /// values[(θ index, n)], θ_k = 2πQ·k/N_θ.
    pub values: Array2<f64>,
    pub p_cells: u64,
    pub q_cells: u64,
}

/// Gaussian-smoothed phase-space density of a momentum-representation
/// wave function:
/// `h(θ,n) = √(2P/(QN³))·|Σ_m ψ(m)·e^{−πP(m−n)²/(NQ)}·e^{2πimΘ/N}|²`
/// with `Θ = Nθ/(2πQ)` and the gaussian truncated at distance N/2.
/// Evaluated on the full N×N grid, one FFT per momentum row.
pub fn husimi(psi: &[Complex64], params: &HarperParams) -> HusimiGrid {
    let n_h = psi.len();
    debug_assert_eq!(n_h, params.n_states() as usize);
    let pfac = params.p_cells as f64;
    let qfac = params.q_cells as f64;
    let pref = (2.0 * pfac / (qfac * (n_h as f64).powi(3))).sqrt();
    let width = PI * pfac / (n_h as f64 * qfac);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n_h); // kernel e^{+2πi mk/N}
    let mut values = Array2::zeros((n_h, n_h));
    let mut row = vec![Complex64::new(0.0, 0.0); n_h];
    let half = n_h as i64 / 2;
    for n in 0..n_h {
        for (j, r) in row.iter_mut().enumerate() {
            let mut d = j as i64 - n as i64;
            if d <= -half {
                d += n_h as i64;
            } else if d > half {
                d -= n_h as i64;
            }
            *r = psi[j] * (-width * (d * d) as f64).exp();
        }
        fft.process(&mut row);
        for k in 0..n_h {
            values[(k, n)] = pref * row[k].norm_sqr();
        }
    }
    HusimiGrid { values, p_cells: params.p_cells, q_cells: params.q_cells }
}

/// Sum probabilities over states sharing the top `k` register bits.
pub fn coarse_grain(p: &[f64], n_r: usize, k: usize) -> Vec<f64> {
    assert!(k <= n_r);
    let shift = n_r - k;
    let mut out = vec![0.0f64; 1 << k];
    for (n, &x) in p.iter().enumerate() {
        out[n >> shift] += x;
    }
    out
}

/// Relative error `δh = ⟨|h_ε − h₀|⟩ / ⟨h₀⟩` over masked cells.
pub fn husimi_error(h_eps: &HusimiGrid, h_ref: &HusimiGrid, mask: Option<&Array2<bool>>) -> Result<f64> {
    let mut diff = 0.0;
    let mut base = 0.0;
    let mut count = 0usize;
    for (idx, &v) in h_ref.values.indexed_iter() {
        if let Some(m) = mask {
            if !m[idx] {
                continue;
            }
        }
        diff += (h_eps.values[idx] - v).abs();
        base += v;
        count += 1;
    }
    if count == 0 || base == 0.0 {
        return Err(Error::EmptyMask);
    }
    Ok(diff / base)
}

/// Cells where a classical ensemble density exceeds the median of its
/// positive values; used as the in-web region for Husimi comparisons.
pub fn web_mask(density: &Array2<f64>) -> Array2<bool> {
    let mut positive: Vec<f64> = density.iter().copied().filter(|&x| x > 0.0).collect();
    if positive.is_empty() {
        return Array2::from_elem(density.dim(), false);
    }
    positive.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = positive[positive.len() / 2];
    density.map(|&x| x > median)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Localized,
    PartiallyDelocalized,
}

/// Fitted constants of the breakdown laws.
pub mod constants {
    /// Combined `C₁/√l` for the localized threshold.
    pub const C1_OVER_SQRT_L: f64 = 0.3;
    /// Delocalized threshold prefactor.
    pub const C2: f64 = 7.4;
    /// Husimi time-scale prefactor.
    pub const C_H: f64 = 0.007;
    /// Husimi time-scale exponents in ε and n_q.
    pub const ALPHA: f64 = 1.0;
    pub const BETA: f64 = 1.23;
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingPrediction {
    pub regime: Regime,
    pub epsilon_c: f64,
    /// Typical coupling matrix element.
    pub v_typ: f64,
    /// Energy spread ε·n_g·√n_q.
    pub sigma: f64,
    /// Golden-rule rate 2π·V_typ²/Δ_c.
    pub gamma: f64,
    /// Mean level spacing 2π/N.
    pub delta_n: f64,
    /// Spacing of directly coupled states.
    pub delta_c: f64,
}

/// Threshold strength where one period's perturbation mixes adjacent
/// Floquet states: `0.3/(n_g√n_q)` (localized, the `C₁/√l` combination
/// measured as 0.3) or `7.4/(n_g√n_q√N)` (delocalized).
pub fn epsilon_c(regime: Regime, n_g: f64, n_q: f64, n_states: f64) -> f64 {
    match regime {
        Regime::Localized => constants::C1_OVER_SQRT_L / (n_g * n_q.sqrt()),
        Regime::PartiallyDelocalized => constants::C2 / (n_g * n_q.sqrt() * n_states.sqrt()),
    }
}

/// Time until the Husimi error reaches one half:
/// `t_h ≈ C_h/(ε^α·n_q^β)`.
pub fn husimi_time(epsilon: f64, n_q: f64) -> f64 {
    constants::C_H / (epsilon.powf(constants::ALPHA) * n_q.powf(constants::BETA))
}

pub fn predict(
    regime: Regime,
    n_g: f64,
    n_q: f64,
    l: f64,
    n_states: f64,
    epsilon: f64,
) -> ScalingPrediction {
    let sigma = epsilon * n_g * n_q.sqrt();
    let (v_typ, delta_c) = match regime {
        Regime::Localized => (sigma / l.sqrt(), TAU / l),
        Regime::PartiallyDelocalized => (sigma / n_states.sqrt(), TAU / n_states),
    };
    ScalingPrediction {
        regime,
        epsilon_c: epsilon_c(regime, n_g, n_q, n_states),
        v_typ,
        sigma,
        gamma: TAU * v_typ * v_typ / delta_c,
        delta_n: TAU / n_states,
        delta_c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harper::ExactStep;
    use crate::state::{apply_qft_fast, QuantumState};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn distribution_marginalizes_ancilla() {
        let mut s = QuantumState::with_ancilla(3, 2).unwrap();
        // move some amplitude into ancilla |1⟩ on a different n
        s.amps[2] = Complex64::new(0.6, 0.0);
        s.amps[8 + 5] = Complex64::new(0.8, 0.0);
        let p = momentum_distribution(&s);
        assert_abs_diff_eq!(p[2], 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(p[5], 0.64, epsilon = 1e-15);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ipr_known_values() {
        assert_abs_diff_eq!(ipr(&[1.0, 0.0, 0.0]).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ipr(&[0.5, 0.5]).unwrap(), 2.0, epsilon = 1e-14);
        let uniform = vec![1.0 / 16.0; 16];
        assert_abs_diff_eq!(ipr(&uniform).unwrap(), 16.0, epsilon = 1e-12);
        assert!(ipr(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn ipr_permutation_invariant() {
        let mut rng = StdRng::seed_from_u64(1);
        let mut p: Vec<f64> = (0..32).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let a = ipr(&p).unwrap();
        p.reverse();
        p.rotate_left(7);
        assert_abs_diff_eq!(a, ipr(&p).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn second_moment_known_values() {
        let mut delta = vec![0.0; 16];
        delta[5] = 1.0;
        assert_abs_diff_eq!(second_moment(&delta), 0.0, epsilon = 1e-14);
        let mut pair = vec![0.0; 16];
        pair[4] = 0.5;
        pair[10] = 0.5; // n₀=7, d=3
        assert_abs_diff_eq!(second_moment(&pair), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn second_moment_grows_before_saturation() {
        let params = HarperParams::cylinder(1.0, 5.0, 8, 0.1312).unwrap();
        let stepper = ExactStep::new(params);
        let mut s = QuantumState::new_basis_state(8, 128).unwrap();
        apply_qft_fast(&mut s, 0, 8, true); // momentum basis state in θ rep
        let mut m2 = Vec::new();
        for _ in 0..6 {
            stepper.step(&mut s);
            let mut sm = s.clone();
            apply_qft_fast(&mut sm, 0, 8, false);
            m2.push(second_moment(&momentum_distribution(&sm)));
        }
        assert!(m2[5] > m2[0], "spread {m2:?}");
    }

    #[test]
    fn exponential_profile_recovers_length() {
        let l0 = 10.0;
        let n = 256;
        let n0 = 128i64;
        let mut p: Vec<f64> = (0..n)
            .map(|i| (-2.0 * (i as i64 - n0).abs() as f64 / l0).exp())
            .collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let l = fit_localization_length(&p, 40).unwrap();
        assert!((l - l0).abs() < 0.1, "l = {l}");
    }

    #[test]
    fn fit_scale_invariant() {
        let mut p: Vec<f64> = (0..128)
            .map(|i| (-2.0 * (i as i64 - 60).abs() as f64 / 7.0).exp())
            .collect();
        let l1 = fit_localization_length(&p, 20).unwrap();
        p.iter_mut().for_each(|x| *x *= 17.3);
        let l2 = fit_localization_length(&p, 20).unwrap();
        assert_abs_diff_eq!(l1, l2, epsilon = 1e-9);
    }

    #[test]
    fn fit_fails_on_too_few_points() {
        let mut p = vec![0.0; 32];
        p[10] = 1.0;
        assert!(fit_localization_length(&p, 8).is_err());
    }

    #[test]
    fn localized_run_fit_and_ipr_agree() {
        // K=1, L=5: fitted l and ξ/2 within a factor 2
        let params = HarperParams::cylinder(1.0, 5.0, 8, 0.1312).unwrap();
        let stepper = ExactStep::new(params);
        let mut s = QuantumState::new_basis_state(8, 128).unwrap();
        apply_qft_fast(&mut s, 0, 8, true);
        for _ in 0..1000 {
            stepper.step(&mut s);
        }
        apply_qft_fast(&mut s, 0, 8, false);
        let p = momentum_distribution(&s);
        let xi = ipr(&p).unwrap();
        let l_ipr = xi / 2.0;
        let l = fit_localization_length(&p, default_fit_window(xi)).unwrap();
        assert!(
            l / l_ipr < 2.0 && l_ipr / l < 2.0,
            "fit l = {l}, ipr l = {l_ipr}"
        );
    }

    #[test]
    fn coarse_grain_limits() {
        let mut rng = StdRng::seed_from_u64(3);
        let mut p: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        assert_eq!(coarse_grain(&p, 6, 6), p);
        let all = coarse_grain(&p, 6, 0);
        assert_abs_diff_eq!(all[0], 1.0, epsilon = 1e-12);
        let uniform = vec![1.0 / 64.0; 64];
        for b in coarse_grain(&uniform, 6, 3) {
            assert_abs_diff_eq!(b, 1.0 / 8.0, epsilon = 1e-12);
        }
        // top-k bits: adjacent fine bins share a coarse bin
        let mut p2 = vec![0.0; 8];
        p2[6] = 0.5;
        p2[7] = 0.5;
        let c = coarse_grain(&p2, 3, 2);
        assert_abs_diff_eq!(c[3], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn husimi_nonnegative_and_eigenstate_ridge() {
        let params = HarperParams::torus(0.5, 0.5, 6, 4, 4).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); 64];
        psi[20] = Complex64::new(1.0, 0.0);
        let h = husimi(&psi, &params);
        for &v in h.values.iter() {
            assert!(v >= 0.0);
        }
        // flat in θ, peaked at n = 20
        for k in 0..64 {
            assert_abs_diff_eq!(h.values[(k, 20)], h.values[(0, 20)], epsilon = 1e-12);
        }
        let peak = h.values[(0, 20)];
        assert!(h.values[(0, 40)] < 1e-6 * peak);
    }

    #[test]
    fn husimi_normalization_consistent() {
        let params = HarperParams::torus(0.5, 0.5, 6, 4, 4).unwrap();
        let mut sums = Vec::new();
        for seed in 0..20u64 {
            let mut rng = StdRng::seed_from_u64(100 + seed);
            let mut psi: Vec<Complex64> = (0..64)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= norm);
            sums.push(husimi(&psi, &params).values.sum());
        }
        let mean: f64 = sums.iter().sum::<f64>() / sums.len() as f64;
        for s in sums {
            assert!(
                (s - mean).abs() / mean < 5e-3,
                "grid sum {s} vs mean {mean}"
            );
        }
    }

    #[test]
    fn husimi_error_reference_values() {
        let params = HarperParams::torus(0.5, 0.5, 5, 4, 4).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let mut psi: Vec<Complex64> = (0..32)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        let h = husimi(&psi, &params);
        assert_abs_diff_eq!(husimi_error(&h, &h, None).unwrap(), 0.0, epsilon = 1e-14);
        let mut doubled = h.clone();
        doubled.values *= 2.0;
        assert_abs_diff_eq!(husimi_error(&doubled, &h, None).unwrap(), 1.0, epsilon = 1e-12);
        let empty = Array2::from_elem(h.values.dim(), false);
        assert!(husimi_error(&h, &h, Some(&empty)).is_err());
    }

    #[test]
    fn predictor_reference_values() {
        let th = husimi_time(1e-5, 10.0);
        assert!((th - 41.2).abs() < 0.5, "t_h = {th}");
        let ec = epsilon_c(Regime::Localized, 1000.0, 9.0, 256.0);
        assert_abs_diff_eq!(ec, 0.3 / (1000.0 * 3.0), epsilon = 1e-15);
        let ec2 = epsilon_c(Regime::PartiallyDelocalized, 1000.0, 9.0, 256.0);
        assert_abs_diff_eq!(ec2, 7.4 / (1000.0 * 3.0 * 16.0), epsilon = 1e-15);
    }

    #[test]
    fn predictions_monotone() {
        let base = predict(Regime::Localized, 1000.0, 9.0, 20.0, 256.0, 1e-4);
        let more_gates = predict(Regime::Localized, 2000.0, 9.0, 20.0, 256.0, 1e-4);
        let more_qubits = predict(Regime::Localized, 1000.0, 10.0, 20.0, 256.0, 1e-4);
        assert!(more_gates.epsilon_c < base.epsilon_c);
        assert!(more_qubits.epsilon_c < base.epsilon_c);
        assert!(husimi_time(1e-4, 10.0) < husimi_time(1e-4, 9.0));
        assert!(husimi_time(1e-3, 9.0) < husimi_time(1e-4, 9.0));
        let deloc_small = predict(Regime::PartiallyDelocalized, 1000.0, 9.0, 20.0, 256.0, 1e-4);
        let deloc_large = predict(Regime::PartiallyDelocalized, 1000.0, 9.0, 20.0, 512.0, 1e-4);
        assert!(deloc_large.epsilon_c < deloc_small.epsilon_c);
    }

    #[test]
    fn web_mask_thresholds_at_median() {
        let mut d = Array2::zeros((4, 4));
        d[(0, 0)] = 1.0;
        d[(1, 1)] = 2.0;
        d[(2, 2)] = 3.0;
        d[(3, 3)] = 4.0;
        let m = web_mask(&d);
        // median positive value is 3; only the strictly larger cell passes
        assert_eq!(m.iter().filter(|&&b| b).count(), 1);
        assert!(m[(3, 3)]);
    }

    #[test]
    fn localized_peak_present_after_long_run() {
        // exponential peak at t=1000 in the localized regime
        let params = HarperParams::cylinder(1.0, 5.0, 8, 0.1312).unwrap();
        let stepper = ExactStep::new(params);
        let mut s = QuantumState::new_basis_state(8, 128).unwrap();
        apply_qft_fast(&mut s, 0, 8, true);
        for _ in 0..1000 {
            stepper.step(&mut s);
        }
        apply_qft_fast(&mut s, 0, 8, false);
        let p = momentum_distribution(&s);
        let xi = ipr(&p).unwrap();
        // localized: ξ far below N_H
        assert!(xi < 64.0, "ξ = {xi}");
    }
}
