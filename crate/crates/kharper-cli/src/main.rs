//! Command-line driver: every experiment writes its artifacts under
//! `--out-dir` plus a manifest.json indexing them, and exits nonzero
//! with a one-line diagnostic on any failure.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kharper::classical::{gaussian_cloud, classical_ensemble_evolve, ClassicalPoint};
use kharper::noise::{mix_seed, sample_disorder, NoiseChannel};
use kharper::observables::{husimi, web_mask};
use kharper::spectrum::{
    align_and_compare, build_unitary, eigenphases, mirror_asymmetry, phase_estimation,
    time_series_spectrum,
};
use kharper_harness::io::{fmt_f64, write_csv, write_ndjson, write_ppm, Manifest};
use kharper_harness::{
    butterfly_scan, epsilon_c_scan, husimi_error_run, run_experiment, sweep_kl, transition_point,
    ConfigMap, Engine, ExperimentConfig, RunRecord,
};

#[derive(Parser)]
#[command(name = "kharper", about = "Kicked Harper quantum map simulator", version)]
struct Cli {
    /// flat key=value config file applied under the command-line flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    realizations: Option<usize>,

    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Ndjson,
}

/// Model and run parameters shared by the evolution-driven commands.
/// Precedence: built-in defaults < config file < these flags.
#[derive(Args, Clone)]
struct ModelArgs {
    /// exact | slice | chebyshev
    #[arg(long)]
    method: Option<String>,

    #[arg(short = 'K', long)]
    k: Option<f64>,

    #[arg(short = 'L', long)]
    l: Option<f64>,

    /// register qubits; N_H = 2^n_r
    #[arg(long)]
    n_r: Option<usize>,

    /// target ħ/2π on the cylinder
    #[arg(long)]
    hbar: Option<f64>,

    /// torus cells in momentum (with --torus-q)
    #[arg(long)]
    torus_p: Option<u64>,

    #[arg(long)]
    torus_q: Option<u64>,

    /// slices per half-kick
    #[arg(long)]
    slices: Option<usize>,

    #[arg(long)]
    symmetrized: Option<bool>,

    /// polynomial degree of the kick approximation
    #[arg(long)]
    degree: Option<usize>,

    #[arg(long)]
    m_samples: Option<usize>,

    /// phase-gate pruning threshold
    #[arg(long)]
    threshold: Option<f64>,

    /// cosine-register bits of the exact method's cost model
    #[arg(long)]
    n_p: Option<usize>,

    /// noise strengths, comma separated
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,

    /// map periods to evolve
    #[arg(short, long)]
    t: Option<usize>,

    #[arg(long)]
    record_every: Option<usize>,

    /// initial momentum eigenstate index
    #[arg(long)]
    initial_state: Option<u64>,
}

impl ModelArgs {
    fn overlay(&self, map: &mut ConfigMap) {
        fn set<T: ToString>(map: &mut ConfigMap, key: &str, v: &Option<T>) {
            if let Some(v) = v {
                map.set(key, v.to_string());
            }
        }
        set(map, "method", &self.method);
        set(map, "k", &self.k);
        set(map, "l", &self.l);
        set(map, "n_r", &self.n_r);
        set(map, "hbar", &self.hbar);
        set(map, "torus_p", &self.torus_p);
        set(map, "torus_q", &self.torus_q);
        set(map, "slices", &self.slices);
        set(map, "symmetrized", &self.symmetrized);
        set(map, "degree", &self.degree);
        set(map, "m_samples", &self.m_samples);
        set(map, "threshold", &self.threshold);
        set(map, "n_p", &self.n_p);
        if let Some(eps) = &self.epsilons {
            let joined: Vec<String> = eps.iter().map(|e| e.to_string()).collect();
            map.set("epsilons", joined.join(","));
        }
        set(map, "t", &self.t);
        set(map, "record_every", &self.record_every);
        set(map, "initial_state", &self.initial_state);
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a wave packet and record transport observables
    Evolve {
        #[command(flatten)]
        model: ModelArgs,

        /// also write the final momentum distribution
        #[arg(long)]
        save_distribution: bool,
    },
    /// Eigenphases of the one-period operator
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,

        /// diag | time-series | phase-estimation
        #[arg(long, default_value = "diag")]
        solver: String,

        /// time-register qubits for phase estimation
        #[arg(long, default_value_t = 6)]
        n_t: usize,
    },
    /// Eigenphase point cloud over a scan of ħ = 2πm/N_H
    Butterfly {
        #[command(flatten)]
        model: ModelArgs,

        /// m values, comma separated; default all of 1..N_H
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<u64>>,
    },
    /// Phase-space (Husimi) density of the evolved state
    Husimi {
        #[command(flatten)]
        model: ModelArgs,

        /// display gamma for the PPM
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
    },
    /// Classical web density and the noise-driven error inside it
    Web {
        #[command(flatten)]
        model: ModelArgs,

        /// classical trajectories in the ensemble
        #[arg(long, default_value_t = 200000)]
        points: usize,

        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
    },
    /// Mean eigenstate IPR over a (K,L) grid
    SweepKl {
        #[arg(long, default_value_t = 0.0)]
        k_min: f64,
        #[arg(long, default_value_t = 10.0)]
        k_max: f64,
        #[arg(long, default_value_t = 21)]
        k_steps: usize,
        #[arg(long, default_value_t = 0.0)]
        l_min: f64,
        #[arg(long, default_value_t = 10.0)]
        l_max: f64,
        #[arg(long, default_value_t = 21)]
        l_steps: usize,
        #[arg(long, default_value_t = 9)]
        n_r: usize,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
    },
    /// Locate the K where the IPR crosses N_H/4 at fixed L
    Transition {
        #[command(flatten)]
        model: ModelArgs,

        #[arg(long, default_value_t = 0.5)]
        k_min: f64,
        #[arg(long, default_value_t = 8.0)]
        k_max: f64,
        #[arg(long, default_value_t = 16)]
        k_steps: usize,
    },
    /// Critical noise strength where the saturation IPR doubles
    EpsilonC {
        #[command(flatten)]
        model: ModelArgs,

        #[arg(long, default_value_t = 1e-6)]
        eps_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        eps_max: f64,
        /// log-spaced grid points
        #[arg(long, default_value_t = 9)]
        eps_points: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("thread pool")?;
    }
    fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;

    let mut map = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ConfigMap::parse(&text)?
        }
        None => ConfigMap::default(),
    };
    if let Some(seed) = cli.seed {
        map.set("seed", seed);
    }
    if let Some(r) = cli.realizations {
        map.set("realizations", r);
    }

    match &cli.command {
        Command::Evolve { model, save_distribution } => {
            model.overlay(&mut map);
            if *save_distribution {
                map.set("save_distribution", "true");
            }
            cmd_evolve(&cli, &map)
        }
        Command::Spectrum { model, solver, n_t } => {
            model.overlay(&mut map);
            cmd_spectrum(&cli, &map, solver, *n_t)
        }
        Command::Butterfly { model, m } => {
            model.overlay(&mut map);
            cmd_butterfly(&cli, &map, m.as_deref())
        }
        Command::Husimi { model, gamma } => {
            model.overlay(&mut map);
            cmd_husimi(&cli, &map, *gamma)
        }
        Command::Web { model, points, gamma } => {
            model.overlay(&mut map);
            cmd_web(&cli, &map, *points, *gamma)
        }
        Command::SweepKl {
            k_min,
            k_max,
            k_steps,
            l_min,
            l_max,
            l_steps,
            n_r,
            hbar,
            gamma,
        } => cmd_sweep(
            &cli,
            &map,
            grid(*k_min, *k_max, *k_steps),
            grid(*l_min, *l_max, *l_steps),
            *n_r,
            *hbar,
            *gamma,
        ),
        Command::Transition { model, k_min, k_max, k_steps } => {
            model.overlay(&mut map);
            cmd_transition(&cli, &map, grid(*k_min, *k_max, *k_steps))
        }
        Command::EpsilonC { model, eps_min, eps_max, eps_points } => {
            model.overlay(&mut map);
            cmd_epsilon_c(&cli, &map, *eps_min, *eps_max, *eps_points)
        }
    }
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps < 2 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn config_from(map: &ConfigMap) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig::from_map(map)?)
}

/// Echo the effective config next to the artifacts.
fn write_config(dir: &Path, map: &ConfigMap, manifest: &mut Manifest) -> Result<()> {
    let path = dir.join("config.txt");
    fs::write(&path, map.to_text())?;
    manifest.add("config", Path::new("config.txt"), "config");
    Ok(())
}

fn records_out(cli: &Cli, records: &[RunRecord], manifest: &mut Manifest) -> Result<()> {
    match cli.format {
        Format::Csv => {
            let rows = records.iter().flat_map(|rec| {
                rec.rows.iter().map(move |row| {
                    vec![
                        rec.seed.to_string(),
                        rec.realization.to_string(),
                        row.t.to_string(),
                        row.n_g.to_string(),
                        fmt_f64(rec.epsilon),
                        fmt_f64(row.ipr),
                        fmt_f64(row.ipr_full),
                        fmt_f64(row.second_moment),
                        row.loc_length.map(fmt_f64).unwrap_or_default(),
                    ]
                })
            });
            let path = cli.out_dir.join("series.csv");
            write_csv(
                &path,
                &["seed", "realization", "t", "n_g", "epsilon", "ipr", "ipr_full", "second_moment", "loc_length"],
                rows,
            )?;
            manifest.add("series", Path::new("series.csv"), "csv");
        }
        Format::Ndjson => {
            let path = cli.out_dir.join("records.ndjson");
            write_ndjson(&path, records)?;
            manifest.add("records", Path::new("records.ndjson"), "ndjson");
        }
    }
    Ok(())
}

fn cmd_evolve(cli: &Cli, map: &ConfigMap) -> Result<()> {
    let cfg = config_from(map)?;
    let records = run_experiment(&cfg)?;
    let mut manifest = Manifest::new("evolve", cfg.seed);
    records_out(cli, &records, &mut manifest)?;
    if cfg.save_distribution {
        let rows = records.iter().flat_map(|rec| {
            rec.final_distribution.iter().flat_map(move |dist| {
                dist.iter().enumerate().map(move |(n, &p)| {
                    vec![
                        rec.seed.to_string(),
                        rec.realization.to_string(),
                        fmt_f64(rec.epsilon),
                        n.to_string(),
                        fmt_f64(p),
                    ]
                })
            })
        });
        let path = cli.out_dir.join("distribution.csv");
        write_csv(&path, &["seed", "realization", "epsilon", "n", "p"], rows)?;
        manifest.add("distribution", Path::new("distribution.csv"), "csv");
    }
    write_config(&cli.out_dir, map, &mut manifest)?;
    manifest.write(&cli.out_dir)?;
    println!("evolve: {} records -> {}", records.len(), cli.out_dir.display());
    Ok(())
}

fn cmd_spectrum(cli: &Cli, map: &ConfigMap, solver: &str, n_t: usize) -> Result<()> {
    let cfg = config_from(map)?;
    let engine = Engine::new(&cfg)?;
    let params = engine.params;
    let mut manifest = Manifest::new("spectrum", cfg.seed);

    let clean_u = build_unitary(params.n_r, engine.ancilla, |s| {
        engine.clean_step(s).expect("clean step");
    });
    let reference = eigenphases(&clean_u)?;

    match solver {
        "diag" => {
            // noiseless spectrum, then one realization per ε > 0
            let mut rows: Vec<Vec<String>> = reference
                .phases
                .iter()
                .map(|&p| {
                    vec![fmt_f64(0.0), "0".into(), params.m.to_string(), fmt_f64(params.hbar()), fmt_f64(p)]
                })
                .collect();
            let mut summary = Vec::new();
            for &eps in cfg.epsilons.iter().filter(|&&e| e > 0.0) {
                for r in 0..cfg.realizations as u64 {
                    let seed = mix_seed(cfg.seed, r);
                    let disorder = sample_disorder(engine.n_qubits(), eps, seed);
                    let u = build_unitary(params.n_r, engine.ancilla, |s| {
                        let mut ch = NoiseChannel::new(disorder.clone());
                        engine.noisy_step(s, &mut ch).expect("noisy step");
                    });
                    let set = eigenphases(&u)?;
                    let delta = align_and_compare(&set, &reference)?;
                    summary.push(vec![
                        fmt_f64(eps),
                        r.to_string(),
                        seed.to_string(),
                        fmt_f64(delta),
                        fmt_f64(set.unitarity_deviation),
                    ]);
                    rows.extend(set.phases.iter().map(|&p| {
                        vec![
                            fmt_f64(eps),
                            r.to_string(),
                            params.m.to_string(),
                            fmt_f64(params.hbar()),
                            fmt_f64(p),
                        ]
                    }));
                }
            }
            write_csv(
                cli.out_dir.join("eigenphases.csv"),
                &["epsilon", "realization", "m", "hbar", "phase"],
                rows,
            )?;
            manifest.add("eigenphases", Path::new("eigenphases.csv"), "csv");
            if !summary.is_empty() {
                write_csv(
                    cli.out_dir.join("spectral_error.csv"),
                    &["epsilon", "realization", "seed", "delta_e_mean_spacing", "unitarity_deviation"],
                    summary,
                )?;
                manifest.add("spectral_error", Path::new("spectral_error.csv"), "csv");
            }
        }
        "time-series" => {
            let mut psi0 = engine.initial_state(cfg.initial_state)?;
            psi0.normalize();
            let t = cfg.t.max(4 * params.n_states() as usize);
            let peaks = time_series_spectrum(&psi0, |s| {
                engine.clean_step(s).expect("clean step");
            }, t);
            write_csv(
                cli.out_dir.join("peaks.csv"),
                &["phase", "weight"],
                peaks.iter().map(|&(p, w)| vec![fmt_f64(p), fmt_f64(w)]),
            )?;
            manifest.add("peaks", Path::new("peaks.csv"), "csv");
        }
        "phase-estimation" => {
            let dim = params.n_states() as usize;
            let amp = 1.0 / (dim as f64).sqrt();
            let psi0 = vec![num_complex::Complex64::new(amp, 0.0); dim];
            let system = build_unitary(params.n_r, engine.ancilla, |s| {
                engine.clean_step(s).expect("clean step");
            });
            let hist = phase_estimation(&system, &psi0, n_t)?;
            write_csv(
                cli.out_dir.join("histogram.csv"),
                &["bin", "phase", "probability"],
                hist.iter().enumerate().map(|(b, &p)| {
                    let phase = std::f64::consts::TAU * b as f64 / hist.len() as f64;
                    vec![b.to_string(), fmt_f64(phase), fmt_f64(p)]
                }),
            )?;
            manifest.add("histogram", Path::new("histogram.csv"), "csv");
        }
        other => bail!("unknown solver `{other}` (diag|time-series|phase-estimation)"),
    }
    write_config(&cli.out_dir, map, &mut manifest)?;
    manifest.write(&cli.out_dir)?;
    println!(
        "spectrum: {} levels, unitarity deviation {:.2e} -> {}",
        reference.phases.len(),
        reference.unitarity_deviation,
        cli.out_dir.display()
    );
    Ok(())
}

fn cmd_butterfly(cli: &Cli, map: &ConfigMap, ms: Option<&[u64]>) -> Result<()> {
    let mut local = map.clone();
    if local.raw("k").is_none() {
        local.set("k", "0.001");
    }
    if local.raw("l").is_none() {
        local.set("l", "0.001");
    }
    let cfg = config_from(&local)?;
    let n_h = 1u64 << cfg.n_r;
    let all: Vec<u64>;
    let ms = match ms {
        Some(list) => list,
        None => {
            all = (1..n_h).collect();
            &all
        }
    };
    let points = butterfly_scan(cfg.k, cfg.l, cfg.n_r, ms)?;
    let mut manifest = Manifest::new("butterfly", cfg.seed);
    let mut rows = Vec::new();
    let mut asym_rows = Vec::new();
    for pt in &points {
        let set = kharper::spectrum::EigenphaseSet {
            phases: pt.phases.clone(),
            method: "diagonalization".into(),
            unitarity_deviation: 0.0,
        };
        asym_rows.push(vec![
            pt.m.to_string(),
            fmt_f64(pt.hbar_frac),
            fmt_f64(mirror_asymmetry(&set)?),
        ]);
        for &p in &pt.phases {
            rows.push(vec![pt.m.to_string(), fmt_f64(pt.hbar_frac), fmt_f64(p)]);
        }
    }
    write_csv(cli.out_dir.join("butterfly.csv"), &["m", "hbar_frac", "phase"], rows)?;
    manifest.add("butterfly", Path::new("butterfly.csv"), "csv");
    write_csv(
        cli.out_dir.join("asymmetry.csv"),
        &["m", "hbar_frac", "mirror_asymmetry"],
        asym_rows,
    )?;
    manifest.add("asymmetry", Path::new("asymmetry.csv"), "csv");
    write_config(&cli.out_dir, &local, &mut manifest)?;
    manifest.write(&cli.out_dir)?;
    println!("butterfly: {} m values -> {}", points.len(), cli.out_dir.display());
    Ok(())
}

fn cmd_husimi(cli: &Cli, map: &ConfigMap, gamma: f64) -> Result<()> {
    let cfg = config_from(map)?;
    let engine = Engine::new(&cfg)?;
    let mut state = engine.initial_state(cfg.initial_state)?;
    for _ in 0..cfg.t {
        engine.clean_step(&mut state)?;
    }
    let n_h = engine.params.n_states() as usize;
    let m = engine.momentum_side(&state);
    let grid = husimi(&m.amps[..n_h], &engine.params);
    let mut manifest = Manifest::new("husimi", cfg.seed);
    write_ppm(cli.out_dir.join("husimi.ppm"), &grid.values, gamma)?;
    manifest.add("husimi", Path::new("husimi.ppm"), "ppm");
    let rows = grid.values.indexed_iter().map(|((ti, n), &v)| {
        vec![ti.to_string(), n.to_string(), fmt_f64(v)]
    });
    write_csv(cli.out_dir.join("husimi.csv"), &["theta_index", "n", "h"], rows)?;
    manifest.add("husimi_values", Path::new("husimi.csv"), "csv");
    write_config(&cli.out_dir, map, &mut manifest)?;
    manifest.write(&cli.out_dir)?;
    println!("husimi: {n_h}x{n_h} grid after t={} -> {}", cfg.t, cli.out_dir.display());
    Ok(())
}

fn cmd_web(cli: &Cli, map: &ConfigMap, points: usize, gamma: f64) -> Result<()> {
    // anisotropic-web defaults: an 8x8-cell torus resolved by 7 qubits
    let mut local = map.clone();
    for (key, value) in [
        ("torus_p", "8"),
        ("torus_q", "8"),
        ("n_r", "7"),
        ("k", "0.5"),
        ("l", "0.5"),
        ("t", "20"),
        ("record_every", "2"),
    ] {
        if local.raw(key).is_none() {
            local.set(key, value);
        }
    }
    let cfg = config_from(&local)?;
    let engine = Engine::new(&cfg)?;
    let params = engine.params;
    let n_h = params.n_states() as usize;

    let cloud = gaussian_cloud(
        points,
        ClassicalPoint { i: 0.5, theta: 4.0 },
        0.2,
        &params,
        cfg.seed,
    );
    let density = classical_ensemble_evolve(&cloud, cfg.t, &params, n_h, n_h);
    let mask = web_mask(&density);

    let mut manifest = Manifest::new("web", cfg.seed);
    write_ppm(cli.out_dir.join("classical_density.ppm"), &density, gamma)?;
    manifest.add("classical_density", Path::new("classical_density.ppm"), "ppm");
    let mask_f = mask.map(|&b| if b { 1.0 } else { 0.0 });
    write_ppm(cli.out_dir.join("web_mask.ppm"), &mask_f, 1.0)?;
    manifest.add("web_mask", Path::new("web_mask.ppm"), "ppm");

    let eps: Vec<f64> = cfg.epsilons.iter().copied().filter(|&e| e > 0.0).collect();
    let mut rows = Vec::new();
    let mut t_h_rows = Vec::new();
    for &e in &eps {
        for r in 0..cfg.realizations as u64 {
            let series = husimi_error_run(&cfg, e, r, true)?;
            for &(t, dh) in &series.rows {
                rows.push(vec![
                    series.seed.to_string(),
                    r.to_string(),
                    fmt_f64(e),
                    t.to_string(),
                    fmt_f64(dh),
                ]);
            }
            t_h_rows.push(vec![
                series.seed.to_string(),
                r.to_string(),
                fmt_f64(e),
                series.t_h.map(fmt_f64).unwrap_or_default(),
            ]);
        }
    }
    if !rows.is_empty() {
        write_csv(
            cli.out_dir.join("web_error.csv"),
            &["seed", "realization", "epsilon", "t", "delta_h"],
            rows,
        )?;
        manifest.add("web_error", Path::new("web_error.csv"), "csv");
        write_csv(
            cli.out_dir.join("t_h.csv"),
            &["seed", "realization", "epsilon", "t_h"],
            t_h_rows,
        )?;
        manifest.add("t_h", Path::new("t_h.csv"), "csv");
    }
    write_config(&cli.out_dir, &local, &mut manifest)?;
    manifest.write(&cli.out_dir)?;
    println!("web: {points} trajectories, {} ε values -> {}", eps.len(), cli.out_dir.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    cli: &Cli,
    map: &ConfigMap,
    k_values: Vec<f64>,
    l_values: Vec<f64>,
    n_r: usize,
    hbar: Option<f64>,
    gamma: f64,
) -> Result<()> {
    let hbar = hbar
        .or(map.get("hbar")?)
        .unwrap_or(ExperimentConfig::default().hbar);
    let sweep = sweep_kl(&k_values, &l_values, n_r, hbar)?;
    let mut manifest = Manifest::new("sweep-kl", 0);
    let rows = sweep.xi.indexed_iter().map(|((li, ki), &xi)| {
        vec![fmt_f64(sweep.k_values[ki]), fmt_f64(sweep.l_values[li]), fmt_f64(xi)]
    });
    write_csv(cli.out_dir.join("sweep.csv"), &["k", "l", "xi"], rows)?;
    manifest.add("sweep", Path::new("sweep.csv"), "csv");
    write_ppm(cli.out_dir.join("sweep.ppm"), &sweep.xi, gamma)?;
    manifest.add("sweep_map", Path::new("sweep.ppm"), "ppm");
    manifest.write(&cli.out_dir)?;
    println!(
        "sweep-kl: {}x{} grid at n_r={n_r} -> {}",
        k_values.len(),
        l_values.len(),
        cli.out_dir.display()
    );
    Ok(())
}

fn cmd_transition(cli: &Cli, map: &ConfigMap, k_values: Vec<f64>) -> Result<()> {
    let mut local = map.clone();
    for (key, value) in [("l", "27"), ("t", "100"), ("record_every", "10")] {
        if local.raw(key).is_none() {
            local.set(key, value);
        }
    }
    let cfg = config_from(&local)?;
    let curve = transition_point(&cfg, &k_values)?;
    let mut manifest = Manifest::new("transition", cfg.seed);
    let rows = curve
        .k_values
        .iter()
        .zip(&curve.ipr)
        .map(|(&k, &x)| vec![fmt_f64(k), fmt_f64(x)]);
    write_csv(cli.out_dir.join("transition.csv"), &["k", "ipr"], rows)?;
    manifest.add("transition", Path::new("transition.csv"), "csv");
    write_csv(
        cli.out_dir.join("k_c.csv"),
        &["epsilon", "threshold", "k_c"],
        [vec![fmt_f64(cfg.epsilons[0]), fmt_f64(curve.threshold), fmt_f64(curve.k_c)]],
    )?;
    manifest.add("k_c", Path::new("k_c.csv"), "csv");
    write_config(&cli.out_dir, &local, &mut manifest)?;
    manifest.write(&cli.out_dir)?;
    println!("transition: K_c = {:.4} -> {}", curve.k_c, cli.out_dir.display());
    Ok(())
}

fn cmd_epsilon_c(
    cli: &Cli,
    map: &ConfigMap,
    eps_min: f64,
    eps_max: f64,
    eps_points: usize,
) -> Result<()> {
    let mut local = map.clone();
    let joined: Vec<String> = log_grid(eps_min, eps_max, eps_points)
        .iter()
        .map(|e| e.to_string())
        .collect();
    local.set("epsilons", joined.join(","));
    let cfg = config_from(&local)?;
    let scan = epsilon_c_scan(&cfg)?;
    let mut manifest = Manifest::new("epsilon-c", cfg.seed);
    let rows = scan
        .epsilons
        .iter()
        .zip(&scan.sat_ipr)
        .map(|(&e, &x)| vec![fmt_f64(e), fmt_f64(x)]);
    write_csv(cli.out_dir.join("epsilon_scan.csv"), &["epsilon", "saturation_ipr"], rows)?;
    manifest.add("epsilon_scan", Path::new("epsilon_scan.csv"), "csv");
    write_csv(
        cli.out_dir.join("epsilon_c.csv"),
        &["baseline_ipr", "epsilon_c"],
        [vec![fmt_f64(scan.baseline), fmt_f64(scan.epsilon_c)]],
    )?;
    manifest.add("epsilon_c", Path::new("epsilon_c.csv"), "csv");
    write_config(&cli.out_dir, &local, &mut manifest)?;
    manifest.write(&cli.out_dir)?;
    println!("epsilon-c: ε_c = {:.3e} -> {}", scan.epsilon_c, cli.out_dir.display());
    Ok(())
}
