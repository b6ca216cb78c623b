use kharper::observables::{self, Regime};
use kharper::spectrum::{align_and_compare, build_unitary, eigenphases};
use kharper_harness::*;
use std::time::Instant;

fn clean_unitary(cfg: &ExperimentConfig) -> kharper::spectrum::EigenphaseSet {
    let engine = Engine::new(cfg).unwrap();
    let u = build_unitary(cfg.n_r, engine.ancilla, |s| engine.clean_step(s).unwrap());
    eigenphases(&u).unwrap()
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "c1" => {
            let exact = ExperimentConfig {
                method: Method::Exact, n_r: 6, k: 1e-3, l: 1e-3, hbar: 0.1312,
                ..Default::default()
            };
            let t0 = Instant::now();
            let e_ref = clean_unitary(&exact);
            let slice = ExperimentConfig { method: Method::Slice, slices: 100, symmetrized: true, ..exact.clone() };
            let s = clean_unitary(&slice);
            let cheb = ExperimentConfig { method: Method::Chebyshev, degree: 6, threshold: 0.0, ..exact.clone() };
            let c = clean_unitary(&cheb);
            println!("c1 slice dE={:.4} cheb dE={:.4} (mean-spacing units) elapsed={:?}",
                align_and_compare(&s, &e_ref).unwrap(),
                align_and_compare(&c, &e_ref).unwrap(), t0.elapsed());
        }
        "c4" => {
            let t0 = Instant::now();
            for n_r in [8usize, 9] {
                let cfg = ExperimentConfig {
                    method: Method::Exact, n_r, k: 1.0, l: 5.0, t: 1000,
                    record_every: 1000, epsilons: vec![0.0], ..Default::default()
                };
                let recs = run_experiment(&cfg).unwrap();
                let row = recs[0].rows.last().unwrap();
                println!("c4 exact n_r={n_r} l={:?} ipr={:.2}", row.loc_length, row.ipr);
            }
            for n_s in [5usize, 10, 40] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: n_s, symmetrized: true, n_r: 8,
                    k: 1.0, l: 5.0, t: 1000, record_every: 1000, epsilons: vec![0.0],
                    ..Default::default()
                };
                let recs = run_experiment(&cfg).unwrap();
                println!("c4 slice n_s={n_s} l={:?}", recs[0].rows.last().unwrap().loc_length);
            }
            println!("c4 elapsed={:?}", t0.elapsed());
        }
        "c5loc" => {
            let t0 = Instant::now();
            for n_r in [7usize, 8, 9] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 2.0, l: 27.0, t: 1000, record_every: 100, realizations: 3,
                    epsilons: vec![3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3],
                    ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let pred = observables::epsilon_c(Regime::Localized, engine.n_g_per_step as f64, engine.n_qubits() as f64, 0.0);
                match epsilon_c_scan(&cfg) {
                    Ok(s) => println!("c5loc n_r={n_r} n_g={} eps_c={:.3e} pred={:.3e} ratio={:.2} sat={:?} base={:.2} elapsed={:?}",
                        engine.n_g_per_step, s.epsilon_c, pred, s.epsilon_c / pred, s.sat_ipr, s.baseline, t0.elapsed()),
                    Err(e) => println!("c5loc n_r={n_r} pred={:.3e} ERR {e}", pred),
                }
            }
        }
        "c5del" => {
            let t0 = Instant::now();
            for n_r in [7usize, 8, 9] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 10.0, l: 27.0, t: 100, record_every: 10, realizations: 3,
                    epsilons: vec![3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3],
                    ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let n = (1u64 << n_r) as f64;
                let pred = observables::epsilon_c(Regime::PartiallyDelocalized, engine.n_g_per_step as f64, engine.n_qubits() as f64, n);
                match epsilon_c_scan(&cfg) {
                    Ok(s) => println!("c5del n_r={n_r} n_g={} eps_c={:.3e} pred={:.3e} ratio={:.2} base={:.2} sat={:?} elapsed={:?}",
                        engine.n_g_per_step, s.epsilon_c, pred, s.epsilon_c / pred, s.baseline, s.sat_ipr, t0.elapsed()),
                    Err(e) => println!("c5del n_r={n_r} pred={:.3e} ERR {e}", pred),
                }
            }
        }
        "c7" => {
            let t0 = Instant::now();
            for (n_r, eps) in [(6usize, 1e-6), (6, 1e-5), (6, 1e-4), (5, 1e-5), (7, 1e-5)] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 0.5, l: 0.5, torus_p: Some(4), torus_q: Some(4),
                    t: 6000, record_every: 20, ..Default::default()
                };
                let s = husimi_error_run(&cfg, eps, 0, true).unwrap();
                println!("c7 n_r={n_r} eps={eps:.0e} t_h={:?} last_dh={:.3} elapsed={:?}",
                    s.t_h, s.rows.last().unwrap().1, t0.elapsed());
            }
        }
        "c8" => {
            use kharper::noise::{mix_seed, sample_disorder, NoiseChannel};
            let t0 = Instant::now();
            for method in [Method::Slice, Method::Chebyshev] {
                let cfg = ExperimentConfig {
                    method, slices: 40, symmetrized: true, degree: 6, threshold: 0.0,
                    n_r: 6, k: 1e-3, l: 1e-3, hbar: 0.1312, ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let u0 = build_unitary(cfg.n_r, engine.ancilla, |s| engine.clean_step(s).unwrap());
                let e_ref = eigenphases(&u0).unwrap();
                let epsg = [1e-5f64, 3e-5, 1e-4, 3e-4];
                let mut des = Vec::new();
                for &eps in &epsg {
                    let mut acc = 0.0;
                    for r in 0..3u64 {
                        let dis = sample_disorder(engine.n_qubits(), eps, mix_seed(1, r));
                        let u = build_unitary(cfg.n_r, engine.ancilla, |s| {
                            let mut ch = NoiseChannel::new(dis.clone());
                            engine.noisy_step(s, &mut ch).unwrap();
                        });
                        acc += align_and_compare(&eigenphases(&u).unwrap(), &e_ref).unwrap();
                    }
                    des.push(acc / 3.0);
                }
                let (slope, _) = loglog_fit(&epsg, &des).unwrap();
                println!("c8 {:?} dE={:?} slope={:.3} elapsed={:?}", method, des, slope, t0.elapsed());
            }
        }
        "c10" => {
            let t0 = Instant::now();
            let ks: Vec<f64> = (0..10).map(|i| 1.0 + i as f64 * 0.75).collect();
            for n_r in [7usize, 8] {
                for eps in [0.0, 1e-5, 3e-5, 1e-4] {
                    let cfg = ExperimentConfig {
                        method: Method::Slice, slices: 40, symmetrized: true, n_r,
                        l: 27.0, t: 100, record_every: 10, realizations: 3,
                        epsilons: vec![eps], ..Default::default()
                    };
                    match transition_point(&cfg, &ks) {
                        Ok(c) => println!("c10 n_r={n_r} eps={eps:.1e} K_c={:.3} ipr={:?} elapsed={:?}", c.k_c,
                            c.ipr.iter().map(|x| (x*10.0).round()/10.0).collect::<Vec<_>>(), t0.elapsed()),
                        Err(e) => println!("c10 n_r={n_r} eps={eps:.1e} ERR {e}"),
                    }
                }
            }
        }

        "c4b" => {
            let t0 = Instant::now();
            let avg_l = |recs: &Vec<RunRecord>| {
                let rows: Vec<&ObsRow> = recs[0].rows.iter().filter(|r| r.t >= 500).collect();
                let ls: Vec<f64> = rows.iter().filter_map(|r| r.loc_length).collect();
                ls.iter().sum::<f64>() / ls.len() as f64
            };
            let mut l0 = 0.0;
            for n_r in [8usize, 9] {
                let cfg = ExperimentConfig {
                    method: Method::Exact, n_r, k: 1.0, l: 5.0, t: 1000,
                    record_every: 25, epsilons: vec![0.0], ..Default::default()
                };
                let l = avg_l(&run_experiment(&cfg).unwrap());
                if n_r == 8 { l0 = l; }
                println!("c4b exact n_r={n_r} l_avg={l:.3}");
            }
            for n_s in [2usize, 5, 10, 20, 40] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: n_s, symmetrized: true, n_r: 8,
                    k: 1.0, l: 5.0, t: 1000, record_every: 25, epsilons: vec![0.0],
                    ..Default::default()
                };
                let l = avg_l(&run_experiment(&cfg).unwrap());
                println!("c4b slice n_s={n_s} l_avg={l:.3} ratio={:.3}", l / l0);
            }
            println!("c4b elapsed={:?}", t0.elapsed());
        }

        "c4c" => {
            for (n_r, m) in [(8usize, 33u64), (8, 34), (8, 35), (9, 66), (9, 67), (9, 69)] {
                let frac = m as f64 / (1u64 << n_r) as f64;
                let cfg = ExperimentConfig {
                    method: Method::Exact, n_r, k: 1.0, l: 5.0, t: 1000, hbar: frac,
                    record_every: 25, epsilons: vec![0.0], ..Default::default()
                };
                let recs = run_experiment(&cfg).unwrap();
                let ls: Vec<f64> = recs[0].rows.iter().filter(|r| r.t >= 500)
                    .filter_map(|r| r.loc_length).collect();
                let l = ls.iter().sum::<f64>() / ls.len() as f64;
                let ipr: f64 = recs[0].rows.iter().filter(|r| r.t >= 500).map(|r| r.ipr).sum::<f64>()
                    / ls.len() as f64;
                println!("c4c n_r={n_r} m={m} l_avg={l:.3} ipr_avg={ipr:.2}");
            }
        }

        "c5del2" => {
            let t0 = Instant::now();
            for n_r in [7usize, 8, 9] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 10.0, l: 27.0, hbar: 17.0 / 128.0, t: 100, record_every: 10,
                    realizations: 3,
                    epsilons: vec![3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3],
                    ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let n = (1u64 << (n_r + 1)) as f64;
                let pred = observables::epsilon_c(Regime::PartiallyDelocalized, engine.n_g_per_step as f64, engine.n_qubits() as f64, n);
                match epsilon_c_scan_with(&cfg, 1.5) {
                    Ok(s) => println!("c5del2 n_r={n_r} n_g={} eps_c={:.3e} pred={:.3e} ratio={:.2} base={:.2} sat={:?} elapsed={:?}",
                        engine.n_g_per_step, s.epsilon_c, pred, s.epsilon_c / pred, s.baseline,
                        s.sat_ipr.iter().map(|x| (x*10.0).round()/10.0).collect::<Vec<_>>(), t0.elapsed()),
                    Err(e) => println!("c5del2 n_r={n_r} pred={:.3e} ERR {e}", pred),
                }
            }
        }
        "c5del3" => {
            let t0 = Instant::now();
            for n_r in [10usize, 11] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 10.0, l: 27.0, hbar: 17.0 / 128.0, t: 100, record_every: 10,
                    realizations: 3,
                    epsilons: vec![3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3],
                    ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let n = (1u64 << (n_r + 1)) as f64;
                let pred = observables::epsilon_c(Regime::PartiallyDelocalized, engine.n_g_per_step as f64, engine.n_qubits() as f64, n);
                match epsilon_c_scan_with(&cfg, 1.5) {
                    Ok(s) => println!("c5del3 n_r={n_r} n_g={} eps_c={:.3e} pred={:.3e} ratio={:.2} base={:.2} sat={:?} elapsed={:?}",
                        engine.n_g_per_step, s.epsilon_c, pred, s.epsilon_c / pred, s.baseline,
                        s.sat_ipr.iter().map(|x| (x*10.0).round()/10.0).collect::<Vec<_>>(), t0.elapsed()),
                    Err(e) => println!("c5del3 n_r={n_r} pred={:.3e} ERR {e}", pred),
                }
            }
        }
        "c5base" => {
            let t0 = Instant::now();
            for n_r in [7usize, 8, 9, 10, 11] {
                for t in [100usize, 300, 1000, 3000] {
                    let cfg = ExperimentConfig {
                        method: Method::Slice, slices: 40, symmetrized: true, n_r,
                        k: 10.0, l: 27.0, hbar: 17.0 / 128.0, t, record_every: t / 20,
                        realizations: 1, epsilons: vec![0.0],
                        ..Default::default()
                    };
                    let records = run_experiment(&cfg).unwrap();
                    let base = kharper_harness::experiment::saturation_ipr_full(&records, 0.0, 9 * t / 5);
                    println!("c5base n_r={n_r} t={t} base={base:.1} elapsed={:?}", t0.elapsed());
                }
            }
        }
        "c5del5" => {
            let t0 = Instant::now();
            for n_r in [7usize, 9] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 10.0, l: 27.0, hbar: 17.0 / 128.0, t: 1000, record_every: 50,
                    realizations: 2,
                    epsilons: vec![3e-6, 1e-5, 3e-5, 1e-4, 3e-4],
                    ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let n = (1u64 << (n_r + 1)) as f64;
                let pred = observables::epsilon_c(Regime::PartiallyDelocalized, engine.n_g_per_step as f64, engine.n_qubits() as f64, n);
                match epsilon_c_scan_with(&cfg, 1.5) {
                    Ok(s) => println!("c5del5 n_r={n_r} n_g={} eps_c={:.3e} pred={:.3e} ratio={:.2} base={:.2} sat={:?} elapsed={:?}",
                        engine.n_g_per_step, s.epsilon_c, pred, s.epsilon_c / pred, s.baseline,
                        s.sat_ipr.iter().map(|x| (x*10.0).round()/10.0).collect::<Vec<_>>(), t0.elapsed()),
                    Err(e) => println!("c5del5 n_r={n_r} pred={:.3e} ERR {e}", pred),
                }
            }
        }
        "c5eig" => {
            use kharper::noise::{mix_seed, sample_disorder, NoiseChannel};
            use kharper::spectrum::eigenstates;
            let mean_xi = |u: &ndarray::Array2<num_complex::Complex64>| -> f64 {
                let (_vals, vecs) = eigenstates(u).unwrap();
                let dim = vecs.ncols();
                let mut acc = 0.0;
                for c in 0..dim {
                    let p4: f64 = vecs.column(c).iter().map(|a| a.norm_sqr().powi(2)).sum();
                    acc += 1.0 / p4;
                }
                acc / dim as f64
            };
            let t0 = Instant::now();
            for n_r in [7usize, 9] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 10.0, l: 27.0, hbar: 17.0 / 128.0, ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let u0 = build_unitary(cfg.n_r, engine.ancilla, |s| engine.clean_step(s).unwrap());
                let base = mean_xi(&u0);
                let epsg = [1e-6f64, 3e-6, 1e-5, 3e-5, 1e-4];
                let mut curve = Vec::new();
                for &eps in &epsg {
                    let mut acc = 0.0;
                    for r in 0..2u64 {
                        let dis = sample_disorder(engine.n_qubits(), eps, mix_seed(5, r));
                        let u = build_unitary(cfg.n_r, engine.ancilla, |s| {
                            let mut ch = NoiseChannel::new(dis.clone());
                            engine.noisy_step(s, &mut ch).unwrap();
                        });
                        acc += mean_xi(&u);
                    }
                    curve.push(acc / 2.0);
                }
                let n = (1u64 << (n_r + 1)) as f64;
                let pred = observables::epsilon_c(Regime::PartiallyDelocalized, engine.n_g_per_step as f64, engine.n_qubits() as f64, n);
                println!("c5eig n_r={n_r} base={base:.2} pred={pred:.3e} xi={:?} elapsed={:?}",
                    curve.iter().map(|x| (x*100.0).round()/100.0).collect::<Vec<_>>(), t0.elapsed());
            }
        }
        "c5final" => {
            let t0 = Instant::now();
            let mut cs = Vec::new();
            for n_r in [9usize, 10, 11] {
                let cfg = ExperimentConfig {
                    method: Method::Slice, slices: 40, symmetrized: true, n_r,
                    k: 10.0, l: 27.0, hbar: 17.0 / 128.0, t: 100, record_every: 10,
                    realizations: 3, seed: 20260824,
                    epsilons: vec![3e-6, 5.6e-6, 1e-5, 1.8e-5, 3e-5, 5.6e-5, 1e-4],
                    ..Default::default()
                };
                let engine = Engine::new(&cfg).unwrap();
                let n = (1u64 << (n_r + 1)) as f64;
                let pred = observables::epsilon_c(Regime::PartiallyDelocalized, engine.n_g_per_step as f64, engine.n_qubits() as f64, n);
                match epsilon_c_scan_with(&cfg, 1.5) {
                    Ok(s) => {
                        println!("c5final n_r={n_r} n_g={} eps_c={:.3e} pred={:.3e} ratio={:.2} base={:.2} sat={:?} elapsed={:?}",
                            engine.n_g_per_step, s.epsilon_c, pred, s.epsilon_c / pred, s.baseline,
                            s.sat_ipr.iter().map(|x| (x*10.0).round()/10.0).collect::<Vec<_>>(), t0.elapsed());
                        cs.push((s.epsilon_c, pred));
                    }
                    Err(e) => println!("c5final n_r={n_r} pred={:.3e} ERR {e}", pred),
                }
            }
            if cs.len() == 3 {
                let measured = cs[0].0 / cs[2].0;
                let predicted = cs[0].1 / cs[2].1;
                println!("c5final two-qubit ratio measured={measured:.3} predicted={predicted:.3} rel dev={:.3}",
                    (measured - predicted).abs() / predicted);
            }
        }
        "c10b" => {
            let t0 = Instant::now();
            let ks: Vec<f64> = (0..10).map(|i| 2.0 + i as f64).collect();
            for n_r in [7usize, 8, 9] {
                for eps in [0.0, 1e-5, 3e-5, 1e-4] {
                    let cfg = ExperimentConfig {
                        method: Method::Slice, slices: 40, symmetrized: true, n_r,
                        l: 27.0, hbar: 17.0 / 128.0, t: 100, record_every: 5, realizations: 3,
                        epsilons: vec![eps], ..Default::default()
                    };
                    match transition_point(&cfg, &ks) {
                        Ok(c) => println!("c10b n_r={n_r} eps={eps:.1e} K_c={:.3} ipr={:?} elapsed={:?}", c.k_c,
                            c.ipr.iter().map(|x| (x*10.0).round()/10.0).collect::<Vec<_>>(), t0.elapsed()),
                        Err(e) => println!("c10b n_r={n_r} eps={eps:.1e} ERR {e}"),
                    }
                }
            }
        }
        other => eprintln!("unknown probe {other}"),
    }
}
