//! Experiment orchestration: single runs with realization averaging,
//! the (K,L) delocalization sweep, transition-point and critical-noise
//! scans, eigenphase butterflies, and phase-space error tracking.
//!
//! Every job is keyed by (grid point, realization) and carries its own
//! derived seed, so results are independent of evaluation order and
//! re-running a config reproduces the same bytes.

use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use kharper::chebyshev::{chebyshev_coefficients, ChebyshevStep};
use kharper::harper::{exact_step, exact_step_sequence, ExactStep, HarperParams};
use kharper::noise::{mix_seed, noisy_apply, sample_disorder, NoiseChannel};
use kharper::observables::{
    self, default_fit_window, husimi, husimi_error, ipr, momentum_distribution, second_moment,
    web_mask, HusimiGrid,
};
use kharper::slices::{SliceConfig, SliceStep};
use kharper::spectrum::{build_unitary, eigenphases, eigenstates};
use kharper::state::GateSequence;
use kharper::{apply_qft_fast, Error, QuantumState, Result};

use crate::config::ConfigMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Slice,
    Chebyshev,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s {
            "exact" => Ok(Method::Exact),
            "slice" => Ok(Method::Slice),
            "chebyshev" => Ok(Method::Chebyshev),
            other => Err(Error::InvalidConfig {
                field: "method".into(),
                reason: format!("unknown method `{other}` (exact|slice|chebyshev)"),
            }),
        }
    }
}

/// Everything a run needs. Field names double as config keys.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub k: f64,
    pub l: f64,
    pub n_r: usize,
    /// target ħ/2π on the cylinder; ignored when torus cells are set
    pub hbar: f64,
    pub torus_p: Option<u64>,
    pub torus_q: Option<u64>,
    /// slices per half-kick (the budget doubles when symmetrized)
    pub slices: usize,
    pub symmetrized: bool,
    pub degree: usize,
    pub m_samples: usize,
    pub threshold: f64,
    /// cosine-register bits for the exact method's accounted circuit
    pub n_p: usize,
    pub epsilons: Vec<f64>,
    pub realizations: usize,
    pub t: usize,
    pub record_every: usize,
    pub seed: u64,
    pub initial_state: u64,
    pub save_distribution: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: Method::Slice,
            k: 1.0,
            l: 5.0,
            n_r: 8,
            hbar: (13.0 - 5.0f64.sqrt()) / 82.0,
            torus_p: None,
            torus_q: None,
            slices: 40,
            symmetrized: true,
            degree: 6,
            m_samples: 64,
            threshold: 1e-8,
            n_p: 24,
            epsilons: vec![0.0],
            realizations: 10,
            t: 1000,
            record_every: 10,
            seed: 1,
            initial_state: 0,
            save_distribution: false,
        }
    }
}

impl ExperimentConfig {
    /// Overlay values from a parsed key=value map onto the defaults.
    pub fn from_map(map: &ConfigMap) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let cfg = ExperimentConfig {
            method: match map.raw("method") {
                Some(s) => s.parse()?,
                None => d.method,
            },
            k: map.get_or("k", d.k)?,
            l: map.get_or("l", d.l)?,
            n_r: map.get_or("n_r", d.n_r)?,
            hbar: map.get_or("hbar", d.hbar)?,
            torus_p: map.get("torus_p")?,
            torus_q: map.get("torus_q")?,
            slices: map.get_or("slices", d.slices)?,
            symmetrized: map.get_or("symmetrized", d.symmetrized)?,
            degree: map.get_or("degree", d.degree)?,
            m_samples: map.get_or("m_samples", d.m_samples)?,
            threshold: map.get_or("threshold", d.threshold)?,
            n_p: map.get_or("n_p", d.n_p)?,
            epsilons: map.get_list("epsilons")?.unwrap_or(d.epsilons),
            realizations: map.get_or("realizations", d.realizations)?,
            t: map.get_or("t", d.t)?,
            record_every: map.get_or("record_every", d.record_every)?,
            seed: map.get_or("seed", d.seed)?,
            initial_state: map.get_or("initial_state", d.initial_state)?,
            save_distribution: map.get_or("save_distribution", d.save_distribution)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<HarperParams> {
        match (self.torus_p, self.torus_q) {
            (Some(p), Some(q)) => HarperParams::torus(self.k, self.l, self.n_r, p, q),
            (None, None) => HarperParams::cylinder(self.k, self.l, self.n_r, self.hbar),
            _ => Err(Error::InvalidConfig {
                field: "torus_p".into(),
                reason: "torus_p and torus_q must be set together".into(),
            }),
        }
    }

    /// All module preconditions are checked here, before any run.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Error::InvalidConfig {
            field: field.into(),
            reason,
        };
        if self.n_r == 0 || self.n_r > 14 {
            return Err(bad("n_r", format!("{} outside 1..=14", self.n_r)));
        }
        let params = self.params()?;
        if self.initial_state >= params.n_states() {
            return Err(bad(
                "initial_state",
                format!("{} outside the {}-state register", self.initial_state, params.n_states()),
            ));
        }
        if self.slices == 0 {
            return Err(bad("slices", "must be at least 1".into()));
        }
        if self.m_samples <= self.degree + 2 {
            return Err(bad(
                "m_samples",
                format!("{} must exceed degree+2 = {}", self.m_samples, self.degree + 2),
            ));
        }
        if self.threshold < 0.0 {
            return Err(bad("threshold", "must be non-negative".into()));
        }
        if self.realizations == 0 {
            return Err(bad("realizations", "must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(bad("record_every", "must be at least 1".into()));
        }
        if self.epsilons.is_empty() {
            return Err(bad("epsilons", "need at least one value".into()));
        }
        if self.epsilons.iter().any(|&e| e < 0.0) {
            return Err(bad("epsilons", "negative noise strength".into()));
        }
        Ok(())
    }
}

/// One period of the chosen method, in both a fast noiseless form and
/// an accounted gate stream for noisy evolution.
pub struct Engine {
    pub params: HarperParams,
    pub n_g_per_step: u64,
    pub ancilla: bool,
    seq: GateSequence,
    kind: EngineKind,
}

enum EngineKind {
    Exact(ExactStep),
    Slice(SliceStep),
    Chebyshev(ChebyshevStep),
}

impl Engine {
    pub fn new(cfg: &ExperimentConfig) -> Result<Engine> {
        let params = cfg.params()?;
        match cfg.method {
            Method::Exact => {
                let seq = exact_step_sequence(&params, cfg.n_p);
                Ok(Engine {
                    params,
                    n_g_per_step: seq.n_g,
                    ancilla: false,
                    seq,
                    kind: EngineKind::Exact(ExactStep::new(params)),
                })
            }
            Method::Slice => {
                let config = SliceConfig { n_s: cfg.slices, symmetrized: cfg.symmetrized };
                let step = SliceStep::new(params, config)?;
                Ok(Engine {
                    params,
                    n_g_per_step: step.n_g_per_step,
                    ancilla: true,
                    seq: step.sequence(),
                    kind: EngineKind::Slice(step),
                })
            }
            Method::Chebyshev => {
                let approx = chebyshev_coefficients(cfg.m_samples, cfg.degree);
                let step = ChebyshevStep::new(params, approx, cfg.threshold)?;
                Ok(Engine {
                    params,
                    n_g_per_step: step.n_g_per_step,
                    ancilla: false,
                    seq: step.sequence(),
                    kind: EngineKind::Chebyshev(step),
                })
            }
        }
    }

    /// Momentum eigenstate |n = index⟩ rotated into the θ representation
    /// the steppers work in.
    pub fn initial_state(&self, index: u64) -> Result<QuantumState> {
        let mut s = if self.ancilla {
            QuantumState::with_ancilla(self.params.n_r, index)?
        } else {
            QuantumState::new_basis_state(self.params.n_r, index)?
        };
        apply_qft_fast(&mut s, 0, self.params.n_r, true);
        Ok(s)
    }

    /// Copy of `state` in the momentum representation, where the
    /// transport observables are defined.
    pub fn momentum_side(&self, state: &QuantumState) -> QuantumState {
        let mut s = state.clone();
        apply_qft_fast(&mut s, 0, self.params.n_r, false);
        s
    }

    /// Total qubits the disorder Hamiltonian acts on.
    pub fn n_qubits(&self) -> usize {
        self.params.n_r + usize::from(self.ancilla)
    }

    pub fn clean_step(&self, state: &mut QuantumState) -> Result<()> {
        match &self.kind {
            EngineKind::Exact(s) => {
                s.step(state);
                Ok(())
            }
            EngineKind::Slice(s) => s.step(state),
            EngineKind::Chebyshev(s) => {
                s.step(state);
                Ok(())
            }
        }
    }

    pub fn noisy_step(&self, state: &mut QuantumState, channel: &mut NoiseChannel) -> Result<()> {
        noisy_apply(state, &self.seq, channel)
    }

    pub fn sequence(&self) -> &GateSequence {
        &self.seq
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ObsRow {
    pub t: usize,
    /// accounted gates applied so far
    pub n_g: u64,
    pub ipr: f64,
    /// IPR over the full register-plus-ancilla space (no trace); equal
    /// to `ipr` for methods without an ancilla and clean evolutions
    pub ipr_full: f64,
    pub second_moment: f64,
    pub loc_length: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub epsilon: f64,
    pub realization: u64,
    /// derived seed this realization actually used
    pub seed: u64,
    pub n_g_per_step: u64,
    pub rows: Vec<ObsRow>,
    pub final_distribution: Option<Vec<f64>>,
    pub wall_time_ms: f64,
}

fn observe(engine: &Engine, state: &QuantumState, t: usize, n_g: u64) -> ObsRow {
    let side = engine.momentum_side(state);
    let p = momentum_distribution(&side);
    let p_full: Vec<f64> = side.amps.iter().map(|a| a.norm_sqr()).collect();
    let xi = ipr(&p).unwrap_or(f64::NAN);
    let w = default_fit_window(xi);
    ObsRow {
        t,
        n_g,
        ipr: xi,
        ipr_full: ipr(&p_full).unwrap_or(f64::NAN),
        second_moment: second_moment(&p),
        loc_length: kharper::observables::fit_localization_length(&p, w).ok(),
    }
}

/// Map independent jobs, in parallel when the pool is available, and
/// return results in job order.
fn job_map<T, U, F>(jobs: Vec<T>, f: F) -> Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    jobs.into_iter().map(f).collect()
}

fn run_single(
    cfg: &ExperimentConfig,
    engine: &Engine,
    epsilon: f64,
    eps_index: usize,
    realization: u64,
) -> Result<RunRecord> {
    let started = Instant::now();
    let seed = mix_seed(cfg.seed, ((eps_index as u64) << 32) | realization);
    let mut state = engine.initial_state(cfg.initial_state)?;
    let mut channel = if epsilon > 0.0 {
        Some(NoiseChannel::new(sample_disorder(engine.n_qubits(), epsilon, seed)))
    } else {
        None
    };
    let mut rows = vec![observe(engine, &state, 0, 0)];
    for t in 1..=cfg.t {
        match channel.as_mut() {
            Some(ch) => engine.noisy_step(&mut state, ch)?,
            None => engine.clean_step(&mut state)?,
        }
        if t % cfg.record_every == 0 || t == cfg.t {
            rows.push(observe(engine, &state, t, engine.n_g_per_step * t as u64));
        }
    }
    let final_distribution =
        cfg.save_distribution.then(|| momentum_distribution(&engine.momentum_side(&state)));
    Ok(RunRecord {
        epsilon,
        realization,
        seed,
        n_g_per_step: engine.n_g_per_step,
        rows,
        final_distribution,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Evolve the configured initial state under every (ε, realization)
/// pair. ε = 0 runs once; noise is averaged over `realizations`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let engine = Engine::new(cfg)?;
    let mut jobs: Vec<(usize, f64, u64)> = Vec::new();
    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        let reps = if eps == 0.0 { 1 } else { cfg.realizations as u64 };
        for r in 0..reps {
            jobs.push((i, eps, r));
        }
    }
    job_map(jobs, |(i, eps, r)| run_single(cfg, &engine, eps, i, r))
}

/// Mean saturation IPR: average of recorded rows in the second half of
/// the run, then over realizations at each ε.
pub fn saturation_ipr(records: &[RunRecord], epsilon: f64, horizon: usize) -> f64 {
    saturation_stat(records, epsilon, horizon, |row| row.ipr)
}

/// Same tail average over the full-space IPR; the quantity the ε_c
/// scans track, since imperfections spread amplitude over the whole
/// register-plus-ancilla space.
pub fn saturation_ipr_full(records: &[RunRecord], epsilon: f64, horizon: usize) -> f64 {
    saturation_stat(records, epsilon, horizon, |row| row.ipr_full)
}

fn saturation_stat(
    records: &[RunRecord],
    epsilon: f64,
    horizon: usize,
    stat: impl Fn(&ObsRow) -> f64,
) -> f64 {
    let mut acc = 0.0;
    let mut n = 0usize;
    for rec in records.iter().filter(|r| r.epsilon == epsilon) {
        let tail: Vec<f64> = rec
            .rows
            .iter()
            .filter(|row| row.t * 2 >= horizon)
            .map(|row| stat(row))
            .collect();
        if !tail.is_empty() {
            acc += tail.iter().sum::<f64>() / tail.len() as f64;
            n += 1;
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        acc / n as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepMap {
    pub k_values: Vec<f64>,
    pub l_values: Vec<f64>,
    /// xi[(l index, k index)] = mean eigenstate IPR
    pub xi: Array2<f64>,
}

/// Mean eigenstate IPR over a (K,L) grid by direct diagonalization of
/// the exact one-period operator.
pub fn sweep_kl(
    k_values: &[f64],
    l_values: &[f64],
    n_r: usize,
    hbar: f64,
) -> Result<SweepMap> {
    if n_r > 9 {
        return Err(Error::InvalidConfig {
            field: "n_r".into(),
            reason: format!("{n_r} exceeds the diagonalization sweep cap of 9"),
        });
    }
    let mut jobs = Vec::new();
    for (li, &l) in l_values.iter().enumerate() {
        for (ki, &k) in k_values.iter().enumerate() {
            jobs.push((li, ki, k, l));
        }
    }
    let cells = job_map(jobs, |(li, ki, k, l)| {
        let params = HarperParams::cylinder(k, l, n_r, hbar)?;
        let u = build_unitary(n_r, false, |s| exact_step(s, &params));
        let (_vals, vecs) = eigenstates(&u)?;
        let dim = vecs.nrows();
        let mut mean = 0.0;
        for c in 0..dim {
            // columns are θ-representation; ξ lives in momentum
            let mut s = QuantumState::from_amplitudes(n_r, vecs.column(c).to_vec())?;
            apply_qft_fast(&mut s, 0, n_r, false);
            let p: Vec<f64> = s.amps.iter().map(|z| z.norm_sqr()).collect();
            let norm: f64 = p.iter().sum();
            let sum2: f64 = p.iter().map(|x| (x / norm).powi(2)).sum();
            mean += 1.0 / sum2;
        }
        Ok((li, ki, mean / dim as f64))
    })?;
    let mut xi = Array2::zeros((l_values.len(), k_values.len()));
    for (li, ki, v) in cells {
        xi[(li, ki)] = v;
    }
    Ok(SweepMap { k_values: k_values.to_vec(), l_values: l_values.to_vec(), xi })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionCurve {
    pub k_values: Vec<f64>,
    /// IPR averaged over realizations and the saturated half of each run
    pub ipr: Vec<f64>,
    pub threshold: f64,
    pub k_c: f64,
}

/// Scan K at fixed L and locate where the saturation IPR of a
/// zero-momentum wave packet crosses N_H/4, by linear interpolation
/// between scan points. The IPR at each K is averaged over the late
/// half of the run (record_every must divide into that window) to tame
/// its time fluctuations. `cfg.epsilons` must hold exactly one value.
pub fn transition_point(cfg: &ExperimentConfig, k_values: &[f64]) -> Result<TransitionCurve> {
    transition_point_with(cfg, k_values, None)
}

/// Like `transition_point`, but with an explicit crossing threshold.
/// At short horizons the saturation IPR is limited by how far the
/// packet can spread in `t` kicks rather than by the register size, so
/// a register-proportional threshold stops being reachable on large
/// registers; cross-register comparisons should pass a common
/// threshold, e.g. half the peak of the ε=0 curve.
pub fn transition_point_with(
    cfg: &ExperimentConfig,
    k_values: &[f64],
    threshold: Option<f64>,
) -> Result<TransitionCurve> {
    let curve = transition_curve(cfg, k_values)?;
    let threshold = match threshold {
        Some(v) => v,
        None => cfg.params()?.n_states() as f64 / 4.0,
    };
    let k_c = first_crossing(k_values, &curve, threshold).ok_or_else(|| {
        Error::NoCrossing(format!(
            "IPR stays on one side of {threshold:.1} over K ∈ [{}, {}]",
            k_values[0],
            k_values[k_values.len() - 1]
        ))
    })?;
    Ok(TransitionCurve { k_values: k_values.to_vec(), ipr: curve, threshold, k_c })
}

/// The raw saturation-IPR-vs-K scan behind `transition_point`.
pub fn transition_curve(cfg: &ExperimentConfig, k_values: &[f64]) -> Result<Vec<f64>> {
    if cfg.epsilons.len() != 1 {
        return Err(Error::InvalidConfig {
            field: "epsilons".into(),
            reason: format!("transition scan needs exactly one ε, got {}", cfg.epsilons.len()),
        });
    }
    if k_values.len() < 2 {
        return Err(Error::InvalidConfig {
            field: "k_values".into(),
            reason: "need at least two scan points".into(),
        });
    }
    job_map(k_values.to_vec(), |k| {
        let mut point = cfg.clone();
        point.k = k;
        let records = run_experiment(&point)?;
        // late-window average: smooths quasi-period fluctuations
        // without dragging in the early growth phase
        Ok(saturation_ipr(&records, point.epsilons[0], 9 * point.t / 5))
    })
}

/// First K where a scanned curve crosses `threshold`, linearly
/// interpolated between scan points.
pub fn first_crossing(k_values: &[f64], curve: &[f64], threshold: f64) -> Option<f64> {
    for i in 0..curve.len() - 1 {
        let (a, b) = (curve[i], curve[i + 1]);
        if (a - threshold) * (b - threshold) <= 0.0 && a != b {
            let f = (threshold - a) / (b - a);
            return Some(k_values[i] + f * (k_values[i + 1] - k_values[i]));
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonCScan {
    pub epsilons: Vec<f64>,
    pub sat_ipr: Vec<f64>,
    pub baseline: f64,
    pub epsilon_c: f64,
}

/// Critical noise strength: the ε where the saturation IPR doubles its
/// unperturbed value, interpolated on a log-ε axis. `cfg.epsilons` is
/// the scan grid (positive, increasing); the ε = 0 baseline runs extra.
pub fn epsilon_c_scan(cfg: &ExperimentConfig) -> Result<EpsilonCScan> {
    epsilon_c_scan_with(cfg, 2.0)
}

/// Same scan with the growth factor defining the threshold made
/// explicit. Useful where the unperturbed IPR already sits near its
/// ergodic ceiling and a doubling can never occur; any fixed factor on
/// the steep rise preserves the scaling of ε_c with system size.
pub fn epsilon_c_scan_with(cfg: &ExperimentConfig, factor: f64) -> Result<EpsilonCScan> {
    if !(factor > 1.0) {
        return Err(Error::InvalidConfig {
            field: "factor".into(),
            reason: format!("threshold growth factor must exceed 1, got {factor}"),
        });
    }
    if cfg.epsilons.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidConfig {
            field: "epsilons".into(),
            reason: "ε_c scan grid must be strictly positive".into(),
        });
    }
    if cfg.epsilons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig {
            field: "epsilons".into(),
            reason: "ε_c scan grid must increase".into(),
        });
    }
    let mut base_cfg = cfg.clone();
    base_cfg.epsilons = vec![0.0];
    let base_records = run_experiment(&base_cfg)?;
    let baseline = saturation_ipr_full(&base_records, 0.0, cfg.t);
    let records = run_experiment(cfg)?;
    let sat_ipr: Vec<f64> = cfg
        .epsilons
        .iter()
        .map(|&e| saturation_ipr_full(&records, e, cfg.t))
        .collect();
    let target = factor * baseline;
    let mut epsilon_c = None;
    for i in 0..sat_ipr.len() - 1 {
        let (a, b) = (sat_ipr[i], sat_ipr[i + 1]);
        if (a - target) * (b - target) <= 0.0 && a != b {
            let f = (target - a) / (b - a);
            let (la, lb) = (cfg.epsilons[i].ln(), cfg.epsilons[i + 1].ln());
            epsilon_c = Some((la + f * (lb - la)).exp());
            break;
        }
    }
    let epsilon_c = epsilon_c.ok_or_else(|| {
        Error::NoCrossing(format!(
            "saturation IPR never reaches {factor}x the ε=0 value {baseline:.3} on the given grid"
        ))
    })?;
    Ok(EpsilonCScan { epsilons: cfg.epsilons.clone(), sat_ipr, baseline, epsilon_c })
}

#[derive(Clone, Debug, Serialize)]
pub struct ButterflyPoint {
    pub m: u64,
    /// ħ/2π = m/N_H
    pub hbar_frac: f64,
    pub phases: Vec<f64>,
}

/// Eigenphases of the exact one-period operator for each ħ = 2πm/N_H.
pub fn butterfly_scan(k: f64, l: f64, n_r: usize, ms: &[u64]) -> Result<Vec<ButterflyPoint>> {
    let n_h = 1u64 << n_r;
    for &m in ms {
        if m == 0 || m >= n_h {
            return Err(Error::InvalidConfig {
                field: "m".into(),
                reason: format!("{m} outside 1..{n_h}"),
            });
        }
    }
    job_map(ms.to_vec(), |m| {
        let frac = m as f64 / n_h as f64;
        let params = HarperParams::cylinder(k, l, n_r, frac)?;
        debug_assert_eq!(params.m, m);
        let u = build_unitary(n_r, false, |s| exact_step(s, &params));
        let set = eigenphases(&u)?;
        Ok(ButterflyPoint { m, hbar_frac: frac, phases: set.phases })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HusimiTimeSeries {
    pub epsilon: f64,
    pub realization: u64,
    pub seed: u64,
    /// (t, δh) at each recorded time
    pub rows: Vec<(usize, f64)>,
    /// first crossing of δh = 1/2, linearly interpolated
    pub t_h: Option<f64>,
}

/// Track the relative phase-space error between a noisy and a clean
/// evolution of the same initial state. With `masked` set, the error is
/// restricted to the cells of a classical web estimate (the clean
/// density above its positive median at each time).
pub fn husimi_error_run(
    cfg: &ExperimentConfig,
    epsilon: f64,
    realization: u64,
    masked: bool,
) -> Result<HusimiTimeSeries> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidConfig {
            field: "epsilon".into(),
            reason: "phase-space error tracking needs ε > 0".into(),
        });
    }
    cfg.validate()?;
    let engine = Engine::new(cfg)?;
    let seed = mix_seed(cfg.seed, realization);
    let mut noisy = engine.initial_state(cfg.initial_state)?;
    let mut clean = noisy.clone();
    let mut channel = NoiseChannel::new(sample_disorder(engine.n_qubits(), epsilon, seed));
    let n_h = engine.params.n_states() as usize;
    let grid_of = |s: &QuantumState| -> HusimiGrid {
        // momentum representation, ancilla-|0⟩ block; leakage is a
        // property of the method itself
        let m = engine.momentum_side(s);
        husimi(&m.amps[..n_h], &engine.params)
    };
    let mut rows = Vec::new();
    let mut t_h = None;
    let mut prev: Option<(usize, f64)> = None;
    for t in 1..=cfg.t {
        engine.noisy_step(&mut noisy, &mut channel)?;
        engine.clean_step(&mut clean)?;
        if t % cfg.record_every == 0 || t == cfg.t {
            let h_ref = grid_of(&clean);
            let h_eps = grid_of(&noisy);
            let mask = masked.then(|| web_mask(&h_ref.values));
            let dh = husimi_error(&h_eps, &h_ref, mask.as_ref())?;
            rows.push((t, dh));
            if t_h.is_none() {
                if let Some((pt, pv)) = prev {
                    if pv < 0.5 && dh >= 0.5 {
                        let f = (0.5 - pv) / (dh - pv);
                        t_h = Some(pt as f64 + f * (t - pt) as f64);
                    }
                } else if dh >= 0.5 {
                    t_h = Some(t as f64);
                }
                prev = Some((t, dh));
            }
        }
    }
    Ok(HusimiTimeSeries { epsilon, realization, seed, rows, t_h })
}

/// Least-squares slope and intercept of ln(y) against ln(x).
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::FitFailure(format!(
            "need matching samples, at least 2: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::FitFailure("log-log fit needs positive finite data".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailure("degenerate abscissa".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Diffusion fit ⟨n²(t)⟩ ≈ D·t^power over `window` (inclusive time
/// bounds), returning D by least squares at fixed exponent.
pub fn fit_diffusion(rows: &[ObsRow], window: (usize, usize), power: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1 && r.t > 0)
        .map(|r| ((r.t as f64).powf(power), r.second_moment))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitFailure("diffusion window holds fewer than 2 samples".into()));
    }
    let num: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let den: f64 = pts.iter().map(|(x, _)| x * x).sum();
    Ok(num / den)
}

/// Noise-free observables plus the analytic scaling predictions for a
/// configured run; the bridge between measured curves and the
/// perturbative estimates.
pub fn predictions(cfg: &ExperimentConfig, regime: observables::Regime) -> Result<Vec<(f64, observables::ScalingPrediction)>> {
    let engine = Engine::new(cfg)?;
    let params = engine.params;
    // localization length of the unperturbed saturated state
    let mut clean = engine.initial_state(cfg.initial_state)?;
    for _ in 0..cfg.t {
        engine.clean_step(&mut clean)?;
    }
    let p = momentum_distribution(&engine.momentum_side(&clean));
    let xi = ipr(&p)?;
    let l = kharper::observables::fit_localization_length(&p, default_fit_window(xi))
        .unwrap_or(xi);
    Ok(cfg
        .epsilons
        .iter()
        .map(|&e| {
            (
                e,
                observables::predict(
                    regime,
                    engine.n_g_per_step as f64,
                    engine.n_qubits() as f64,
                    l,
                    params.n_states() as f64,
                    e,
                ),
            )
        })
        .collect())
}
