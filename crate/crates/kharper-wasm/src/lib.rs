//! Browser bindings: three interactive views onto the simulator, each
//! returning flat numeric buffers a canvas can render directly.
//!
//! Build with `wasm-pack build --target web crates/kharper-wasm`; the
//! page in `www/` loads the generated module. The `*_impl` functions
//! are plain Rust so they also run (and are tested) on the host.

use wasm_bindgen::prelude::*;

use kharper::classical::{classical_ensemble_evolve, gaussian_cloud, ClassicalPoint};
use kharper::harper::{exact_step, ExactStep, HarperParams};
use kharper::observables::husimi;
use kharper::spectrum::{build_unitary, eigenphases};
use kharper::{apply_qft_fast, QuantumState};

/// Husimi density of a momentum eigenstate evolved `t` periods.
/// Returns the N×N grid row-major (θ index major), N = 2^n_r.
#[wasm_bindgen]
pub fn husimi_map(
    k: f64,
    l: f64,
    n_r: usize,
    hbar_frac: f64,
    t: usize,
    initial_n: u32,
) -> Result<Vec<f64>, JsValue> {
    husimi_map_impl(k, l, n_r, hbar_frac, t, initial_n).map_err(|e| JsValue::from_str(&e))
}

pub fn husimi_map_impl(
    k: f64,
    l: f64,
    n_r: usize,
    hbar_frac: f64,
    t: usize,
    initial_n: u32,
) -> Result<Vec<f64>, String> {
    if n_r > 8 {
        return Err("n_r capped at 8 in the demo".into());
    }
    let params =
        HarperParams::cylinder(k, l, n_r, hbar_frac).map_err(|e| e.to_string())?;
    let stepper = ExactStep::new(params);
    let mut state = QuantumState::new_basis_state(n_r, initial_n as u64 % params.n_states())
        .map_err(|e| e.to_string())?;
    // |n⟩ into the θ representation the stepper works in
    apply_qft_fast(&mut state, 0, n_r, true);
    for _ in 0..t {
        stepper.step(&mut state);
    }
    apply_qft_fast(&mut state, 0, n_r, false);
    let grid = husimi(&state.amps, &params);
    Ok(grid.values.iter().copied().collect())
}

/// Eigenphase butterfly: all (ħ/2π, E_a) points for m = 1..2^n_r.
/// Returns interleaved pairs [hbar_frac, phase, ...].
#[wasm_bindgen]
pub fn butterfly_points(k: f64, l: f64, n_r: usize) -> Result<Vec<f64>, JsValue> {
    butterfly_points_impl(k, l, n_r).map_err(|e| JsValue::from_str(&e))
}

pub fn butterfly_points_impl(k: f64, l: f64, n_r: usize) -> Result<Vec<f64>, String> {
    if n_r > 6 {
        return Err("n_r capped at 6 in the demo".into());
    }
    let n_h = 1u64 << n_r;
    let mut out = Vec::new();
    for m in 1..n_h {
        let frac = m as f64 / n_h as f64;
        let params = HarperParams::cylinder(k, l, n_r, frac).map_err(|e| e.to_string())?;
        let u = build_unitary(n_r, false, |s| exact_step(s, &params));
        let set = eigenphases(&u).map_err(|e| e.to_string())?;
        for p in set.phases {
            out.push(frac);
            out.push(p);
        }
    }
    Ok(out)
}

/// Classical phase-space density after `t` kicks of a gaussian cloud,
/// on a `cells × cells` torus. Returns the grid row-major.
#[wasm_bindgen]
pub fn classical_density(
    k: f64,
    l: f64,
    cells: u32,
    t: usize,
    points: usize,
    grid: usize,
    seed: u32,
) -> Result<Vec<f64>, JsValue> {
    classical_density_impl(k, l, cells, t, points, grid, seed)
        .map_err(|e| JsValue::from_str(&e))
}

pub fn classical_density_impl(
    k: f64,
    l: f64,
    cells: u32,
    t: usize,
    points: usize,
    grid: usize,
    seed: u32,
) -> Result<Vec<f64>, String> {
    let points = points.min(500_000);
    let grid = grid.clamp(16, 512);
    // torus registers need n_r with 2^n_r > cells²; 7 covers cells ≤ 8
    let params =
        HarperParams::torus(k, l, 7, cells as u64, cells as u64).map_err(|e| e.to_string())?;
    let cloud = gaussian_cloud(
        points,
        ClassicalPoint { i: 0.5, theta: 4.0 },
        0.2,
        &params,
        seed as u64,
    );
    let density = classical_ensemble_evolve(&cloud, t, &params, grid, grid);
    Ok(density.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn husimi_map_shape_and_mass() {
        let grid = husimi_map_impl(1.0, 5.0, 5, 0.17, 3, 0).unwrap();
        assert_eq!(grid.len(), 32 * 32);
        assert!(grid.iter().all(|&v| v >= 0.0));
        assert!(grid.iter().sum::<f64>() > 0.0);
    }

    #[test]
    fn butterfly_points_pair_up() {
        let pts = butterfly_points_impl(1e-3, 1e-3, 4).unwrap();
        // 15 m values × 16 phases × 2 numbers
        assert_eq!(pts.len(), 15 * 16 * 2);
    }

    #[test]
    fn classical_density_conserves_points() {
        let d = classical_density_impl(0.5, 0.5, 4, 5, 10_000, 32, 1).unwrap();
        assert_eq!(d.len(), 32 * 32);
        assert_eq!(d.iter().sum::<f64>() as usize, 10_000);
    }

    #[test]
    fn demo_caps_are_enforced() {
        assert!(husimi_map_impl(1.0, 5.0, 9, 0.17, 1, 0).is_err());
        assert!(butterfly_points_impl(1.0, 5.0, 7).is_err());
    }
}
