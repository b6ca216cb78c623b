//! Classical limit of the kicked map and ensemble densities.
//!
//! One period: Ī = I + K·sin θ, then θ̄ = θ − L·sin Ī. The map is area
//! preserving. On the torus both coordinates fold onto [0, 2πP)×[0, 2πQ);
//! on the cylinder only θ folds.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::harper::HarperParams;
use crate::state::TAU;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalPoint {
    pub i: f64,
    pub theta: f64,
}

fn fold(x: f64, extent: f64) -> f64 {
    let r = x.rem_euclid(extent);
    // rem_euclid can return `extent` itself through rounding
    if r >= extent {
        r - extent
    } else {
        r
    }
}

/// Advance one period. `Ī` is computed before `θ̄` uses it.
pub fn classical_map_step(p: ClassicalPoint, params: &HarperParams) -> ClassicalPoint {
    let i_new = p.i + params.k * p.theta.sin();
    let theta_new = p.theta - params.l * i_new.sin();
    let theta_extent = TAU * params.q_cells as f64;
    let i = if params.cylinder {
        i_new
    } else {
        fold(i_new, TAU * params.p_cells as f64)
    };
    ClassicalPoint { i, theta: fold(theta_new, theta_extent) }
}

/// Gaussian cloud of `n` points around `center`, standard deviation
/// `sigma` in both coordinates, folded onto the phase-space extent.
pub fn gaussian_cloud(
    n: usize,
    center: ClassicalPoint,
    sigma: f64,
    params: &HarperParams,
    seed: u64,
) -> Vec<ClassicalPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta_extent = TAU * params.q_cells as f64;
    let i_extent = TAU * params.p_cells as f64;
    (0..n)
        .map(|_| {
            // Box-Muller
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..TAU);
            let r = (-2.0 * u1.ln()).sqrt() * sigma;
            let i = center.i + r * u2.cos();
            let theta = fold(center.theta + r * u2.sin(), theta_extent);
            let i = if params.cylinder { i } else { fold(i, i_extent) };
            ClassicalPoint { i, theta }
        })
        .collect()
}

/// Advance every point `t` periods and histogram the final positions on
/// a `rows × cols` grid over θ ∈ [0, 2πQ) (columns) and I over the
/// momentum extent (rows). Cylinder momenta are folded into one cell
/// span of 2πP for display.
pub fn classical_ensemble_evolve(
    points: &[ClassicalPoint],
    t: usize,
    params: &HarperParams,
    rows: usize,
    cols: usize,
) -> Array2<f64> {
    let theta_extent = TAU * params.q_cells as f64;
    let i_extent = TAU * params.p_cells as f64;
    let bin = |p: &ClassicalPoint| -> (usize, usize) {
        let r = (fold(p.i, i_extent) / i_extent * rows as f64) as usize;
        let c = (p.theta / theta_extent * cols as f64) as usize;
        (r.min(rows - 1), c.min(cols - 1))
    };

    let evolve_chunk = |chunk: &[ClassicalPoint]| -> Array2<f64> {
        let mut h = Array2::zeros((rows, cols));
        for &p0 in chunk {
            let mut p = p0;
            for _ in 0..t {
                p = classical_map_step(p, params);
            }
            let (r, c) = bin(&p);
            h[(r, c)] += 1.0;
        }
        h
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let chunk = (points.len() / (8 * rayon::current_num_threads().max(1))).max(1024);
        return points
            .par_chunks(chunk)
            .map(evolve_chunk)
            .reduce(|| Array2::zeros((rows, cols)), |a, b| a + b);
    }
    #[cfg(not(feature = "parallel"))]
    evolve_chunk(points)
}

/// Jacobian of one map step by central finite differences.
pub fn jacobian_det(p: ClassicalPoint, params: &HarperParams, h: f64) -> f64 {
    // unfolded variant so differences are not wrapped
    let step = |q: ClassicalPoint| -> (f64, f64) {
        let i_new = q.i + params.k * q.theta.sin();
        let theta_new = q.theta - params.l * i_new.sin();
        (i_new, theta_new)
    };
    let (ip, _) = step(ClassicalPoint { i: p.i + h, ..p });
    let (im, _) = step(ClassicalPoint { i: p.i - h, ..p });
    let (it, tt) = step(ClassicalPoint { theta: p.theta + h, ..p });
    let (is, ts) = step(ClassicalPoint { theta: p.theta - h, ..p });
    let (_, tp) = step(ClassicalPoint { i: p.i + h, ..p });
    let (_, tm) = step(ClassicalPoint { i: p.i - h, ..p });
    let di_di = (ip - im) / (2.0 * h);
    let di_dt = (it - is) / (2.0 * h);
    let dt_di = (tp - tm) / (2.0 * h);
    let dt_dt = (tt - ts) / (2.0 * h);
    di_di * dt_dt - di_dt * dt_di
}
