//! Floquet eigenphase extraction and comparison.
//!
//! Three routes: dense matrix build plus diagonalization, the
//! autocorrelation/Fourier time-series method, and the phase-estimation
//! circuit simulated on a time register + system register pair.
//! Eigenphase sets are compared after removing a global offset, in
//! units of the mean level spacing 2π/N_H.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::state::{QuantumState, TAU};

use std::f64::consts::PI;

/// Total simulated qubits allowed in phase estimation.
pub const PHASE_ESTIMATION_QUBIT_CAP: usize = 24;

#[derive(Clone, Debug)]
pub struct EigenphaseSet {
    /// Sorted phases in (−π, π].
    pub phases: Vec<f64>,
    pub method: String,
    /// Max | |λ| − 1 | before normalization (leakage/noise diagnostic).
    pub unitarity_deviation: f64,
}

fn principal(x: f64) -> f64 {
    let p = x.rem_euclid(TAU);
    if p > PI {
        p - TAU
    } else {
        p
    }
}

/// Dense matrix of an evolution procedure: column j is the image of
/// basis state |j⟩. When the procedure uses an ancilla, each column
/// starts with the ancilla in |0⟩ and the returned matrix is the
/// ancilla-|0⟩ block (leakage makes it slightly sub-unitary).
pub fn build_unitary<F>(n_r: usize, with_ancilla: bool, step: F) -> Array2<Complex64>
where
    F: Fn(&mut QuantumState) + Sync,
{
    let dim = 1usize << n_r;
    let column = |j: usize| -> Vec<Complex64> {
        let mut s = if with_ancilla {
            QuantumState::with_ancilla(n_r, j as u64).unwrap()
        } else {
            QuantumState::new_basis_state(n_r, j as u64).unwrap()
        };
        step(&mut s);
        s.amps[..dim].to_vec()
    };
    #[cfg(feature = "parallel")]
    let cols: Vec<Vec<Complex64>> = {
        use rayon::prelude::*;
        (0..dim).into_par_iter().map(column).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cols: Vec<Vec<Complex64>> = (0..dim).map(column).collect();

    let mut u = Array2::zeros((dim, dim));
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            u[(i, j)] = v;
        }
    }
    u
}

/// Largest |(U†U − I)| entry.
pub fn unitarity_defect(u: &Array2<Complex64>) -> f64 {
    let dim = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                s += u[(k, i)].conj() * u[(k, j)];
            }
            if i == j {
                s -= 1.0;
            }
            worst = worst.max(s.norm());
        }
    }
    worst
}

/// Eigenvalue arguments of an (approximately) unitary matrix, sorted.
/// Eigenvalues are normalized onto the unit circle; their radial
/// deviation is reported, not hidden.
pub fn eigenphases(u: &Array2<Complex64>) -> Result<EigenphaseSet> {
    let vals = eigenvalues(u)?;
    let unitarity_deviation = vals
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let mut phases: Vec<f64> = vals.iter().map(|v| principal(v.arg())).collect();
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(EigenphaseSet { phases, method: "diagonalization".into(), unitarity_deviation })
}

#[cfg(feature = "lapack")]
fn eigenvalues(u: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    Ok(zgeev_all(u, false)?.0)
}

/// Eigenvalues and right eigenvectors (columns). Vectors come back
/// unit-norm as LAPACK returns them.
#[cfg(feature = "lapack")]
pub fn eigenstates(u: &Array2<Complex64>) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    let (w, v) = zgeev_all(u, true)?;
    Ok((w, v.unwrap()))
}

#[cfg(feature = "lapack")]
fn zgeev_all(
    u: &Array2<Complex64>,
    vectors: bool,
) -> Result<(Vec<Complex64>, Option<Array2<Complex64>>)> {
    // zgeev over a column-major copy
    let n = u.nrows() as i32;
    let mut a: Vec<Complex64> = Vec::with_capacity((n * n) as usize);
    for j in 0..u.ncols() {
        a.extend(u.column(j).iter().copied());
    }
    let mut w = vec![Complex64::new(0.0, 0.0); n as usize];
    let mut vl = [Complex64::new(0.0, 0.0)];
    let jobvr = if vectors { b'V' } else { b'N' };
    let mut vr = vec![
        Complex64::new(0.0, 0.0);
        if vectors { (n * n) as usize } else { 1 }
    ];
    let ldvr = if vectors { n } else { 1 };
    let mut rwork = vec![0.0f64; (2 * n) as usize];
    let mut info = 0i32;
    let mut query = [Complex64::new(0.0, 0.0)];
    unsafe {
        lapack::zgeev(
            b'N', jobvr, n, &mut a, n, &mut w, &mut vl, 1, &mut vr, ldvr, &mut query, -1,
            &mut rwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolveFailed);
    }
    let lwork = query[0].re as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        lapack::zgeev(
            b'N', jobvr, n, &mut a, n, &mut w, &mut vl, 1, &mut vr, ldvr, &mut work, lwork,
            &mut rwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolveFailed);
    }
    let v = if vectors {
        let n = n as usize;
        // vr is column-major: column c starts at c*n
        Some(Array2::from_shape_fn((n, n), |(i, c)| vr[c * n + i]))
    } else {
        None
    };
    Ok((w, v))
}

/// LAPACK-free route: a near-unitary U is near-normal, so the Hermitian
/// combination H = (U+U†)/2 + μ·(U−U†)/(2i) shares its eigenvectors for
/// a generic μ. Jacobi-diagonalize H, then read each eigenvalue off the
/// Rayleigh quotient v†Uv.
#[cfg(not(feature = "lapack"))]
fn eigenvalues(u: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    Ok(eigenstates(u)?.0)
}

/// Eigenvalues and right eigenvectors (columns), LAPACK-free route.
#[cfg(not(feature = "lapack"))]
pub fn eigenstates(u: &Array2<Complex64>) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    let dim = u.nrows();
    let mu = 0.618_033_988_749_894_9;
    let mut h = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let a = (u[(i, j)] + u[(j, i)].conj()) / 2.0;
            let b = (u[(i, j)] - u[(j, i)].conj()) / Complex64::new(0.0, 2.0);
            h[(i, j)] = a + mu * b;
        }
    }
    let v = jacobi_eigenvectors(&mut h)?;
    let mut vals = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut uv = vec![Complex64::new(0.0, 0.0); dim];
        for i in 0..dim {
            for k in 0..dim {
                uv[i] += u[(i, k)] * v[(k, c)];
            }
        }
        let mut q = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            q += v[(i, c)].conj() * uv[i];
        }
        vals.push(q);
    }
    Ok((vals, v))
}

/// Cyclic complex Jacobi sweep; diagonalizes a Hermitian matrix in
/// place and returns the accumulated eigenvector matrix.
#[cfg(not(feature = "lapack"))]
fn jacobi_eigenvectors(h: &mut Array2<Complex64>) -> Result<Array2<Complex64>> {
    let dim = h.nrows();
    let mut v = Array2::<Complex64>::eye(dim);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += h[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-13 {
            return Ok(v);
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let hpq = h[(p, q)];
                if hpq.norm() < 1e-300 {
                    continue;
                }
                let app = h[(p, p)].re;
                let aqq = h[(q, q)].re;
                // unitary 2×2 rotation annihilating h[p][q]
                let phase = hpq / hpq.norm();
                let theta = 0.5 * (2.0 * hpq.norm()).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                let sp = phase * s;
                for k in 0..dim {
                    let hkp = h[(k, p)];
                    let hkq = h[(k, q)];
                    h[(k, p)] = hkp * c - hkq * sp.conj();
                    h[(k, q)] = hkp * sp + hkq * c;
                }
                for k in 0..dim {
                    let hpk = h[(p, k)];
                    let hqk = h[(q, k)];
                    h[(p, k)] = hpk * c - hqk * sp;
                    h[(q, k)] = hpk * sp.conj() + hqk * c;
                }
                for k in 0..dim {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * sp.conj();
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }
    Err(Error::EigensolveFailed)
}

/// Autocorrelation/Fourier spectrum: iterate the step, record
/// `c(t) = ⟨ψ₀|ψ(t)⟩`, Fourier transform, return local maxima as
/// `(phase, weight)` with quadratic peak interpolation.
pub fn time_series_spectrum<F>(
    psi0: &QuantumState,
    mut step: F,
    t_steps: usize,
) -> Vec<(f64, f64)>
where
    F: FnMut(&mut QuantumState),
{
    let mut s = psi0.clone();
    let mut c = Vec::with_capacity(t_steps);
    c.push(Complex64::new(1.0, 0.0) * psi0.inner_product(psi0).unwrap());
    for _ in 1..t_steps {
        step(&mut s);
        c.push(psi0.inner_product(&s).unwrap());
    }
    // c(t) = Σ_a w_a e^{iE_a t}; the conjugate-kernel transform puts the
    // peak for E_a at bin k ≈ T·E_a/2π. A Blackman window keeps spectral
    // leakage from a strong component below the detection floor, so the
    // local maxima are the real peaks and not sidelobes.
    let window: Vec<f64> = (0..t_steps)
        .map(|t| {
            let x = TAU * t as f64 / t_steps as f64;
            0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos()
        })
        .collect();
    let wsum: f64 = window.iter().sum();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(t_steps); // e^{-2πi tk/T}
    let mut buf: Vec<Complex64> = c.iter().zip(&window).map(|(z, w)| z * w).collect();
    fft.process(&mut buf);
    let mags: Vec<f64> = buf.iter().map(|z| z.norm() / wsum).collect();
    let mut peaks = Vec::new();
    let floor = 1e-3;
    for k in 0..t_steps {
        let prev = mags[(k + t_steps - 1) % t_steps];
        let next = mags[(k + 1) % t_steps];
        if mags[k] > prev && mags[k] >= next && mags[k] > floor {
            // quadratic interpolation around the bin maximum
            let denom = prev - 2.0 * mags[k] + next;
            let delta = if denom.abs() > 1e-300 {
                0.5 * (prev - next) / denom
            } else {
                0.0
            };
            let phase = principal(TAU * (k as f64 + delta) / t_steps as f64);
            // weight from the raw series projected at the interpolated
            // frequency: exact for an isolated component
            let weight = c
                .iter()
                .enumerate()
                .map(|(t, z)| z * Complex64::from_polar(1.0, -phase * t as f64))
                .sum::<Complex64>()
                .norm()
                / t_steps as f64;
            peaks.push((phase, weight));
        }
    }
    peaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    peaks
}

/// Phase estimation on a simulated time register: Hadamards, controlled
/// powers `U^{2^j}` (by repeated squaring of the dense step matrix), an
/// inverse transform on the time register, and the exact measurement
/// distribution over its 2^{n_t} outcomes.
pub fn phase_estimation(
    u: &Array2<Complex64>,
    psi0: &[Complex64],
    n_t: usize,
) -> Result<Vec<f64>> {
    let dim = u.nrows();
    let n_q = dim.trailing_zeros() as usize;
    if n_t + n_q > PHASE_ESTIMATION_QUBIT_CAP {
        return Err(Error::ResourceLimit {
            requested: n_t + n_q,
            cap: PHASE_ESTIMATION_QUBIT_CAP,
        });
    }
    let t_dim = 1usize << n_t;
    // after Hadamards: ψ_t = ψ₀/√T for every t
    let scale = 1.0 / (t_dim as f64).sqrt();
    let mut slices: Vec<Vec<Complex64>> = (0..t_dim)
        .map(|_| psi0.iter().map(|&a| a * scale).collect())
        .collect();
    // controlled-U^{2^j} on slices with time bit j set
    let mut u_pow = u.clone();
    for j in 0..n_t {
        for (t, slice) in slices.iter_mut().enumerate() {
            if t >> j & 1 == 1 {
                let v = apply_dense(&u_pow, slice);
                *slice = v;
            }
        }
        if j + 1 < n_t {
            u_pow = u_pow.dot(&u_pow);
        }
    }
    // inverse transform over t, kernel e^{-2πi tk/T}/√T
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(t_dim);
    let mut hist = vec![0.0f64; t_dim];
    let mut buf = vec![Complex64::new(0.0, 0.0); t_dim];
    for n in 0..dim {
        for t in 0..t_dim {
            buf[t] = slices[t][n];
        }
        fft.process(&mut buf);
        for k in 0..t_dim {
            hist[k] += buf[k].norm_sqr() / t_dim as f64;
        }
    }
    Ok(hist)
}

fn apply_dense(u: &Array2<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let a = Array1::from_vec(x.to_vec());
    u.dot(&a).to_vec()
}

/// Mean |ΔE| between two eigenphase sets in units of 2π/N_H, after
/// removing a global offset. Matching: both sets sorted on the circle,
/// all cyclic pairings tried, offset per pairing from the circular mean
/// of the differences.
pub fn align_and_compare(set_eps: &EigenphaseSet, set_ref: &EigenphaseSet) -> Result<f64> {
    let n = set_ref.phases.len();
    if set_eps.phases.len() != n {
        return Err(Error::SizeMismatch { left: set_eps.phases.len(), right: n });
    }
    let a = &set_eps.phases;
    let b = &set_ref.phases;
    let mut best = f64::MAX;
    for r in 0..n {
        // circular mean of a_i − b_{(i+r) mod n}
        let mut z = Complex64::new(0.0, 0.0);
        for i in 0..n {
            z += Complex64::from_polar(1.0, a[i] - b[(i + r) % n]);
        }
        let offset = z.arg();
        let mut mean = 0.0;
        for i in 0..n {
            mean += principal(a[i] - b[(i + r) % n] - offset).abs();
        }
        mean /= n as f64;
        best = best.min(mean);
    }
    let delta_n = TAU / n as f64;
    Ok(best / delta_n)
}

/// Mean deviation of a phase multiset from its own mirror image −E,
/// offset removed, in mean-spacing units.
pub fn mirror_asymmetry(set: &EigenphaseSet) -> Result<f64> {
    let mut mirrored: Vec<f64> = set.phases.iter().map(|&e| principal(-e)).collect();
    mirrored.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let m = EigenphaseSet {
        phases: mirrored,
        method: set.method.clone(),
        unitarity_deviation: set.unitarity_deviation,
    };
    align_and_compare(set, &m)
}
