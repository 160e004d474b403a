mod common;

use std::time::Instant;

use common::*;
use fhtc::averaged::{averaged_outage, averaged_outage_unshadowed, AveragedOutageInput, ShadowedConfig, SpatialEvaluator};
use fhtc::conditional::{conditional_outage, conditional_outage_rayleigh, hk_coefficients, ConditionalOutageInput};
use fhtc::cpfsk::{sinr_threshold, CapacityModel};
use fhtc::exec::Execution;
use fhtc::network::{normalized_powers, sample_topology, Annulus, ChannelParams, NormalizedPowers};
use fhtc::optimizer::{coordinate_search, optimize, NetworkScenario, OptimizeConfig, TcObjective, MAX_CYCLES};
use fhtc::oracle::{mc_conditional_curve, mc_spatial_outage, mc_topology_average, McConfig};
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const BETA_DB: f64 = 3.7;
const FIG1_SEED: u64 = 1;

fn fig1_powers(m0: u32, mi: f64) -> NormalizedPowers {
    let top = sample_topology(50, 0.25, 4.0, 1.0, FIG1_SEED).unwrap();
    normalized_powers(&top, &ChannelParams::uniform(3.0, m0, mi, 0.0, 50), FIG1_SEED).unwrap()
}

fn conditional_vs_mc(m0: u32, mi: f64, rayleigh_form: bool, seed: u64) -> (f64, Vec<String>) {
    let omega = fig1_powers(m0, mi);
    let mut m = vec![mi; 51];
    m[0] = f64::from(m0);
    let p = vec![1.0 / 200.0; 50];
    let gammas_db = [0.0, 5.0, 10.0, 15.0, 20.0];
    let gammas: Vec<f64> = gammas_db.iter().map(|&g| db(g)).collect();
    let mc = mc_conditional_curve(&omega, &m, &p, db(BETA_DB), &gammas, &McConfig::new(1_000_000, seed)).unwrap();
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for ((g_db, g), est) in gammas_db.iter().zip(&gammas).zip(&mc) {
        let inp = ConditionalOutageInput { omega: omega.clone(), m: m.clone(), p: p.clone(), beta: db(BETA_DB), gamma_snr: *g };
        let closed = if rayleigh_form { conditional_outage_rayleigh(&inp) } else { conditional_outage(&inp) }.unwrap();
        let z = (closed - est.value).abs() / est.std_error;
        worst = worst.max(z);
        lines.push(format!("Γ={g_db:>4} dB closed={closed:.6} mc={:.6} se={:.1e} z={z:.2}", est.value, est.std_error));
    }
    (worst, lines)
}

fn criterion_1() -> Outcome {
    let (worst, lines) = conditional_vs_mc(1, 1.0, true, 101);
    for l in &lines {
        println!("    {l}");
    }
    outcome(worst <= 3.0, format!("Rayleigh product form vs 10^6-trial MC, max |z| = {worst:.2}"))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for (m0, mi, seed) in [(4, 1.0, 102), (4, 4.0, 103)] {
        let (w, lines) = conditional_vs_mc(m0, mi, false, seed);
        println!("    (m0, mi) = ({m0}, {mi})");
        for l in &lines {
            println!("      {l}");
        }
        worst = worst.max(w);
    }
    outcome(worst <= 3.0, format!("Nakagami conditional vs 10^6-trial MC, max |z| = {worst:.2}"))
}

fn fig2_input(m: usize, l_eff: f64, sigma_s: f64) -> AveragedOutageInput {
    AveragedOutageInput::uniform(m, Annulus::new(0.25, 4.0).unwrap(), 1.0, 3.0, 4, 1.0, l_eff, db(BETA_DB), db(10.0), sigma_s)
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for (k, &m) in [10usize, 30, 50].iter().enumerate() {
        for (j, &l) in [50.0, 200.0].iter().enumerate() {
            let inp = fig2_input(m, l, 0.0);
            let closed = averaged_outage_unshadowed(&inp).unwrap();
            let mc = mc_topology_average(&inp, &McConfig::new(100_000, 300 + (2 * k + j) as u64)).unwrap();
            let z = (closed - mc.value).abs() / mc.std_error;
            worst = worst.max(z);
            println!("    M={m:>2} L'={l:>3} closed={closed:.6} mc={:.6} se={:.1e} z={z:.2}", mc.value, mc.std_error);
        }
    }
    outcome(worst <= 3.0, format!("unshadowed spatial average vs 10^5 topologies, max |z| = {worst:.2}"))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut seed = 400;
    for sigma in [2.0, 8.0] {
        for m in [10usize, 30, 50] {
            for l in [50.0, 200.0] {
                let inp = fig2_input(m, l, sigma);
                let semi = averaged_outage(&inp, &ShadowedConfig::default()).unwrap();
                seed += 1;
                let mc = mc_spatial_outage(&inp, &McConfig::new(1_000_000, seed)).unwrap();
                let se = (semi.std_error.powi(2) + mc.std_error.powi(2)).sqrt();
                let z = (semi.value - mc.value).abs() / se;
                worst = worst.max(z);
                println!(
                    "    σ={sigma} M={m:>2} L'={l:>3} semi={:.6}±{:.1e} mc={:.6}±{:.1e} z={z:.2}",
                    semi.value, semi.std_error, mc.value, mc.std_error
                );
            }
        }
    }
    let mut rel = 0.0f64;
    for m in [10usize, 30, 50] {
        for l in [50.0, 200.0] {
            let exact = averaged_outage_unshadowed(&fig2_input(m, l, 0.0)).unwrap();
            let small = averaged_outage(&fig2_input(m, l, 0.01), &ShadowedConfig::default()).unwrap().value;
            rel = rel.max((small - exact).abs() / exact);
        }
    }
    println!("    σ=0.01 vs closed form: max relative difference {rel:.2e}");
    outcome(
        worst <= 3.0 && rel <= 0.01,
        format!("shadowed semi-numerical vs 10^6-trial MC, max |z| = {worst:.2}; σ=0.01 rel diff {rel:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let sigmas = [0.0, 2.0, 4.0, 8.0];
    let ls = [50.0, 200.0];
    let mut eps = vec![vec![vec![0.0; 51]; ls.len()]; sigmas.len()];
    for (s, &sigma) in sigmas.iter().enumerate() {
        for m in 0..=50usize {
            let inp = fig2_input(m, 50.0, sigma);
            let ev = SpatialEvaluator::new(&inp, &ShadowedConfig::default()).unwrap();
            let mom = ev.moments(db(BETA_DB)).unwrap();
            for (j, &l) in ls.iter().enumerate() {
                eps[s][j][m] = ev.combine(&mom, &vec![1.0 / l; m]).unwrap().value;
            }
        }
    }
    let mut violations = Vec::new();
    for (s, &sigma) in sigmas.iter().enumerate() {
        for (j, &l) in ls.iter().enumerate() {
            for m in 1..=50 {
                if eps[s][j][m] < eps[s][j][m - 1] {
                    violations.push(format!("σ={sigma} L'={l}: ε(M={m}) < ε(M={})", m - 1));
                }
            }
        }
        for m in 0..=50 {
            if eps[s][1][m] > eps[s][0][m] {
                violations.push(format!("σ={sigma} M={m}: ε(L'=200) > ε(L'=50)"));
            }
        }
    }
    for j in 0..ls.len() {
        if eps[3][j][50] < eps[1][j][50] {
            violations.push(format!("L'={}: ε(σ=8) < ε(σ=2) at M=50", ls[j]));
        }
    }
    println!(
        "    M=50: ε(σ=0,2,4,8) at L'=50 = {:.4} {:.4} {:.4} {:.4}; at L'=200 = {:.4} {:.4} {:.4} {:.4}",
        eps[0][0][50], eps[1][0][50], eps[2][0][50], eps[3][0][50], eps[0][1][50], eps[1][1][50], eps[2][1][50], eps[3][1][50]
    );
    for v in violations.iter().take(10) {
        println!("    violation: {v}");
    }
    outcome(
        violations.is_empty(),
        format!("monotone in M and L' over M ≤ 50, L' ∈ {{50, 200}}, σ_s ∈ {{0, 2, 4, 8}}, shadowing ordering; {} violations", violations.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(600);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let m0 = rng.gen_range(1..=5usize);
        let omega: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-2.0..1.0))).collect();
        let m: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=4) as f64).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let beta0 = 10f64.powf(rng.gen_range(-1.0..1.5));
        let h = hk_coefficients(&omega, &m, &p, beta0, m0 - 1);
        for (k, &hk) in h.iter().enumerate() {
            let e = hk_by_enumeration(&omega, &m, &p, beta0, k);
            let rel = if e == 0.0 { hk.abs() } else { ((hk - e) / e).abs() };
            worst = worst.max(rel);
        }
    }
    outcome(worst <= 1e-12, format!("H_k convolution vs composition enumeration, 200 instances, max rel err {worst:.1e}"))
}

fn criterion_7(capacity: &CapacityModel) -> Outcome {
    let b0 = sinr_threshold(1.0, 0.5, 0.0, capacity).unwrap();
    let b1 = sinr_threshold(1.0, 0.5, 1.0, capacity).unwrap();
    outcome(
        (b0 - 3.7).abs() <= 0.3 && (b1 - 4.7).abs() <= 0.3,
        format!("β(h=1, R=1/2) = {b0:.3} dB, with 1 dB margin {b1:.3} dB"),
    )
}

fn criterion_8(capacity: &CapacityModel) -> Outcome {
    let configs: [(&str, NetworkScenario, ShadowedConfig); 4] = [
        ("r_net=2 σ=0 (1,1)", table_scenario(2.0, 0.0, 1, 1.0), ShadowedConfig::default()),
        ("r_net=4 σ=0 (4,1)", table_scenario(4.0, 0.0, 4, 1.0), ShadowedConfig::default()),
        ("r_net=2 σ=8 (4,4), 200 draws", table_scenario(2.0, 8.0, 4, 4.0), reduced_shadow(200)),
        ("r_net=4 σ=8 (1,1), 200 draws", table_scenario(4.0, 8.0, 1, 1.0), reduced_shadow(200)),
    ];
    let ls = lattice(2.0, 400.0, 2.0);
    let rs = lattice(0.05, 0.95, 0.01);
    let hs = lattice(0.40, 1.00, 0.01);
    let mut pass = true;
    for (name, scenario, shadow) in configs {
        let t = Instant::now();
        let mut obj = TcObjective::new(scenario.clone(), capacity, 0.0, &shadow).unwrap();
        let space = OptimizeConfig::default().space;
        let search = coordinate_search(&space, MAX_CYCLES, |p| Ok(obj.evaluate(p)?.tau_normalized)).unwrap();
        let monotone = search.trace.windows(2).all(|w| w[1].objective >= w[0].objective);
        let (grid_best, grid_value) = grid_oracle(&mut obj, &ls, &rs, &hs);
        let s = search.best;
        let close = (s.l_eff - grid_best.l_eff).abs() <= 2.0 + 1e-9
            && (s.rate - grid_best.rate).abs() <= 0.01 + 1e-9
            && (s.h - grid_best.h).abs() <= 0.01 + 1e-9;
        pass &= close && monotone;
        println!(
            "    {name}: search ({}, {}, {}) τ'={:.4}  grid ({}, {}, {}) τ'={:.4}  {} evals, {:.0} s{}",
            s.l_eff,
            s.rate,
            s.h,
            search.objective * 1e3,
            grid_best.l_eff,
            grid_best.rate,
            grid_best.h,
            grid_value * 1e3,
            search.evaluations,
            t.elapsed().as_secs_f64(),
            if monotone { "" } else { "  incumbent decreased" }
        );
    }
    outcome(pass, "optimizer within one grid step of the exhaustive grid optimum on 4 reduced configurations")
}

fn criterion_9(capacity: &CapacityModel) -> Outcome {
    let cfg = OptimizeConfig::default();
    let mut found = Vec::new();
    println!("    r_net σ_s m0 mi |   L'    R    h   τ'opt   τ'1  τ'sub |   ref: L'    R    h   τ'opt   τ'1  τ'sub | Δτ'opt");
    for row in REFERENCE_OPTIMA {
        let (r_net, sigma, m0, mi, l_p, r_p, h_p, t_p, t1_p, ts_p) = row;
        let rep = optimize(&table_scenario(r_net, sigma, m0, mi), capacity, &cfg).unwrap();
        let (t, t1, ts) = (rep.tau_opt * 1e3, rep.tau_with_margin * 1e3, rep.tau_sub.unwrap() * 1e3);
        println!(
            "    {r_net:>5} {sigma:>3} {m0:>2} {mi:>2} | {:>4} {:.2} {:.2} {t:7.2} {t1:5.2} {ts:6.2} |        {l_p:>2} {r_p:.2} {h_p:.2} {t_p:7.2} {t1_p:5.2} {ts_p:6.2} | {:+.1}%",
            rep.best.l_eff,
            rep.best.rate,
            rep.best.h,
            100.0 * (t / t_p - 1.0)
        );
        found.push((row, rep.best, t, t1, ts));
    }
    let mut checks: Vec<(String, bool)> = Vec::new();
    checks.push((
        "h* = 0.59 ± 0.05".into(),
        found.iter().all(|f| (f.1.h - 0.59).abs() <= 0.05 + 1e-9),
    ));
    let pair = |r: f64, s: f64, m0: u32, mi: f64| {
        found.iter().find(|f| f.0 .0 == r && f.0 .1 == s && f.0 .2 == m0 && f.0 .3 == mi).unwrap()
    };
    let fadings = [(1, 1.0), (4, 4.0), (4, 1.0)];
    let mut dense = true;
    let mut shadow = true;
    for &(m0, mi) in &fadings {
        for s in [0.0, 8.0] {
            let (a, b) = (pair(2.0, s, m0, mi), pair(4.0, s, m0, mi));
            dense &= a.1.l_eff > b.1.l_eff && a.1.rate > b.1.rate;
        }
        for r in [2.0, 4.0] {
            let (a, b) = (pair(r, 0.0, m0, mi), pair(r, 8.0, m0, mi));
            shadow &= b.1.rate > a.1.rate && b.1.l_eff < a.1.l_eff;
        }
    }
    checks.push(("L'* and R* larger for r_net=2 than r_net=4".into(), dense));
    checks.push(("σ_s=8: R* larger and L'* smaller than σ_s=0".into(), shadow));
    checks.push(("τ'_1 < τ'_opt".into(), found.iter().all(|f| f.3 < f.2)));
    checks.push(("τ'_opt/τ'_sub ≥ 4".into(), found.iter().all(|f| f.2 / f.4 >= 4.0)));
    let devs: Vec<f64> = found.iter().map(|f| f.2 / f.0 .7 - 1.0).collect();
    checks.push(("τ'_opt within ±25% of reference".into(), devs.iter().all(|d| d.abs() <= 0.25)));
    let mean_dev = devs.iter().sum::<f64>() / devs.len() as f64;
    let anchor = sinr_threshold(1.0, 0.5, 0.0, capacity).unwrap() - 3.7;
    println!("    mean τ'_opt offset {:+.1}%, capacity anchor residual {anchor:+.3} dB", 100.0 * mean_dev);
    for (name, ok) in &checks {
        println!("    [{}] {name}", if *ok { "ok" } else { "FAILED" });
    }
    outcome(checks.iter().all(|c| c.1), "reference optima reproduced (contingent on the capacity model)")
}

fn criterion_10(capacity: &CapacityModel) -> Outcome {
    let pools: Vec<rayon::ThreadPool> =
        [1, 3].iter().map(|&n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()).collect();
    let mut checks = Vec::new();

    let omega = fig1_powers(4, 1.0);
    let mut m = vec![1.0; 51];
    m[0] = 4.0;
    let p = vec![0.02; 50];
    let mc = |exec: Execution| {
        let cfg = McConfig { execution: exec, ..McConfig::new(100_000, 7) };
        mc_conditional_curve(&omega, &m, &p, db(BETA_DB), &[db(0.0), db(10.0)], &cfg)
            .unwrap()
            .iter()
            .map(|e| e.value.to_bits())
            .collect::<Vec<_>>()
    };
    let reference = mc(Execution::Sequential);
    checks.push(("conditional MC", pools.iter().all(|pool| pool.install(|| mc(Execution::Parallel)) == reference)));

    let inp = fig2_input(30, 50.0, 8.0);
    let semi = |exec: Execution| {
        let cfg = ShadowedConfig { execution: exec, draws: 2000, ..ShadowedConfig::default() };
        averaged_outage(&inp, &cfg).unwrap().value.to_bits()
    };
    let reference = semi(Execution::Sequential);
    checks.push(("shadowed semi-numerical", pools.iter().all(|pool| pool.install(|| semi(Execution::Parallel)) == reference)));

    let end_to_end = |exec: Execution| {
        let cfg = McConfig { execution: exec, ..McConfig::new(50_000, 9) };
        mc_spatial_outage(&inp, &cfg).unwrap().value.to_bits()
    };
    let reference = end_to_end(Execution::Sequential);
    checks.push(("end-to-end MC", pools.iter().all(|pool| pool.install(|| end_to_end(Execution::Parallel)) == reference)));

    let table = |exec: Execution| {
        CapacityModel::estimate(vec![0.5, 1.0], vec![0.0, 5.0], 5_000, 3, exec).unwrap().to_table()
    };
    let reference = table(Execution::Sequential);
    checks.push(("capacity table", pools.iter().all(|pool| pool.install(|| table(Execution::Parallel)) == reference)));

    let opt = |exec: Execution| {
        let cfg = OptimizeConfig { shadow: ShadowedConfig { execution: exec, draws: 200, ..ShadowedConfig::default() }, ..OptimizeConfig::default() };
        optimize(&table_scenario(4.0, 8.0, 4, 1.0), capacity, &cfg).unwrap()
    };
    let reference = opt(Execution::Sequential);
    checks.push(("optimizer report", pools.iter().all(|pool| pool.install(|| opt(Execution::Parallel)) == reference)));

    for (name, ok) in &checks {
        println!("    [{}] {name}: sequential, 1-thread and 3-thread runs bit-identical", if *ok { "ok" } else { "FAILED" });
    }
    outcome(checks.iter().all(|c| c.1), "determinism across execution modes and thread counts")
}

fn main() {
    // Respect `cargo test -- <filter>` style invocations that target other tests.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if args.iter().any(|a| !"acceptance".contains(a.as_str())) {
        return;
    }
    let capacity = CapacityModel::builtin();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1", Box::new(criterion_1)),
        ("2", Box::new(criterion_2)),
        ("3", Box::new(criterion_3)),
        ("4", Box::new(criterion_4)),
        ("5", Box::new(criterion_5)),
        ("6", Box::new(criterion_6)),
        ("7", Box::new(|| criterion_7(&capacity))),
        ("8", Box::new(|| criterion_8(&capacity))),
        ("9", Box::new(|| criterion_9(&capacity))),
        ("10", Box::new(|| criterion_10(&capacity))),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        println!("criterion {id}:");
        let t = Instant::now();
        let o = run();
        println!(
            "criterion {id:>2}: {} {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}
