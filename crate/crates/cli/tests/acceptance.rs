//! End-to-end acceptance suite. Each criterion prints one line:
//!
//!     cargo test -p symflow-cli --test acceptance -- --nocapture

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::process::Command;
use std::time::Instant;
use symflow::horseshoe::{self, HorseshoeOptions};
use symflow::linalg::Mat;
use symflow::lorenz::{self, LorenzModel, QuotientMap};
use symflow::spectrum;
use symflow::suspension::SuspensionSystem;
use symflow::thermo;
use symflow::witness::{self, WitnessTolerance};
use symflow::{InvariantMeasure, LocallyConstantFunction as Lcf, MarkovComponent, Sft};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn binary_entropy(a: f64) -> f64 {
    -a * a.ln() - (1.0 - a) * (1.0 - a).ln()
}

fn golden_log() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

fn indicator1(s: &Sft) -> Lcf {
    Lcf::symbol_indicator(s, 1).unwrap()
}

fn c1_entropy() -> Outcome {
    let start = Instant::now();
    let full = Sft::full_shift(2).topological_entropy(1e-12).map_err(|e| e.to_string())?;
    let golden = Sft::golden_mean().topological_entropy(1e-12).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let (e1, e2) = ((full - 2f64.ln()).abs(), (golden - golden_log()).abs());
    ensure(e1 <= 1e-10 && e2 <= 1e-10, format!("errors {e1:.2e}, {e2:.2e}"))?;
    ensure(elapsed < 1.0, format!("took {elapsed:.3} s"))?;
    Ok(format!("errors {e1:.1e}, {e2:.1e}; {elapsed:.4} s"))
}

fn c2_pressure() -> Outcome {
    let s = Sft::full_shift(2);
    let g = indicator1(&s);
    let words = s.admissible_words(3).unwrap();
    let (mut worst_p, mut worst_q) = (0.0f64, 0.0f64);
    for beta in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let p = thermo::pressure(&s, &g.scale(beta), 1e-13).map_err(|e| e.to_string())?;
        worst_p = worst_p.max((p.value - (1.0 + f64::exp(beta)).ln()).abs());
        let q = f64::exp(beta) / (1.0 + f64::exp(beta));
        let bern = InvariantMeasure::bernoulli(&s, &[1.0 - q, q]).unwrap();
        let eq = InvariantMeasure::new(vec![(1.0, p.equilibrium)]).unwrap();
        for w in words.iter().map(|w| &w.0[..]).chain([&[0usize][..], &[1][..]]) {
            worst_q = worst_q.max((eq.cylinder_prob(w) - bern.cylinder_prob(w)).abs());
        }
    }
    ensure(worst_p <= 1e-10, format!("pressure error {worst_p:.2e}"))?;
    ensure(worst_q <= 1e-8, format!("equilibrium error {worst_q:.2e}"))?;
    Ok(format!("pressure error {worst_p:.1e}, equilibrium cylinder error {worst_q:.1e}"))
}

fn random_chain(s: &Sft, rng: &mut ChaCha8Rng) -> MarkovComponent {
    let k = s.k();
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let raw: Vec<f64> =
                (0..k).map(|j| if s.allowed(i, j) { rng.gen_range(0.05..1.0) } else { 0.0 }).collect();
            let t: f64 = raw.iter().sum();
            raw.iter().map(|x| x / t).collect()
        })
        .collect();
    MarkovComponent::new(s, 1, Mat::from_rows(&rows).unwrap()).unwrap()
}

fn c3_variational() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = Sft::full_shift(3);
    let g = Lcf::from_fn(&s, 2, |w| ((w[0] * 3 + w[1]) as f64 * 0.37).sin()).unwrap();
    let p = thermo::pressure(&s, &g, 1e-13).map_err(|e| e.to_string())?;
    let mut min_gap = f64::INFINITY;
    for _ in 0..100 {
        let mu = random_chain(&s, &mut rng);
        min_gap = min_gap.min(p.value - (mu.entropy() + mu.integrate(&g)));
    }
    let eq_gap = (p.value - (p.equilibrium.entropy() + p.equilibrium.integrate(&g))).abs();
    ensure(min_gap >= -1e-9, format!("random measure beats pressure by {:.2e}", -min_gap))?;
    ensure(eq_gap <= 1e-8, format!("equilibrium gap {eq_gap:.2e}"))?;
    Ok(format!("min gap over 100 measures {min_gap:.3e}, equilibrium gap {eq_gap:.1e}"))
}

fn c4_spectrum() -> Outcome {
    let s = Sft::full_shift(2);
    let g = indicator1(&s);
    let mut worst = 0.0f64;
    for i in 1..=9 {
        let a = i as f64 / 10.0;
        let r = spectrum::conditional_entropy_spectrum(&s, &g, a, 1e-12).map_err(|e| e.to_string())?;
        worst = worst.max((r.value - binary_entropy(a)).abs());
    }
    ensure(worst <= 1e-8, format!("full-shift error {worst:.2e}"))?;
    // Golden mean: the memory-1 chains are Q = [[1−a, a], [1, 0]] with
    // frequency of 1 equal to a/(1+a), so the constraint set of the search
    // is the single chain a = α/(1−α), of entropy H_b(a)/(1+a).
    let sg = Sft::golden_mean();
    let gg = indicator1(&sg);
    let mut worst_g = 0.0f64;
    for alpha in [0.1, 0.2, 0.25, 0.3, 0.4] {
        let a = alpha / (1.0 - alpha);
        let q = Mat::from_rows(&[vec![1.0 - a, a], vec![1.0, 0.0]]).unwrap();
        let chain = MarkovComponent::new(&sg, 1, q).unwrap();
        ensure((chain.integrate(&gg) - alpha).abs() < 1e-12, "oracle chain misses the constraint")?;
        let best = chain.entropy();
        let r = spectrum::conditional_entropy_spectrum(&sg, &gg, alpha, 1e-12).map_err(|e| e.to_string())?;
        worst_g = worst_g.max((r.value - best).abs());
    }
    ensure(worst_g <= 1e-5, format!("golden-mean error {worst_g:.2e}"))?;
    Ok(format!("full-shift error {worst:.1e}, golden-mean error {worst_g:.1e}"))
}

fn c5_flow_entropy() -> Outcome {
    let s = Sft::full_shift(2);
    let two = SuspensionSystem::new(s.clone(), Lcf::constant(&s, 2.0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mu = InvariantMeasure::new(vec![(1.0, random_chain(&s, &mut rng))]).unwrap();
        worst = worst.max((two.abramov_entropy(&mu) - mu.entropy() / 2.0).abs());
    }
    let top2 = two.flow_top_entropy(1e-14).map_err(|e| e.to_string())?.value;
    worst = worst.max((top2 - 2f64.ln() / 2.0).abs());
    ensure(worst <= 1e-12, format!("constant roof error {worst:.2e}"))?;
    let roof = Lcf::from_symbol_values(&s, &[1.0, 2.0]).unwrap();
    let sys = SuspensionSystem::new(s, roof).unwrap();
    let h = sys.flow_top_entropy(1e-12).map_err(|e| e.to_string())?.value;
    let e = (h - golden_log()).abs();
    ensure(e <= 1e-8, format!("two-valued roof error {e:.2e}"))?;
    Ok(format!("constant roof error {worst:.1e}, two-valued roof error {e:.1e}"))
}

fn c6_theorem_a() -> Outcome {
    let start = Instant::now();
    let s = Sft::full_shift(2);
    let g = indicator1(&s);
    let tol = WitnessTolerance { mean: 1e-8, entropy: 1e-6 };
    let mut worst = (0.0f64, 0.0f64);
    for alpha in [0.2, 0.3, 0.4] {
        for frac in [0.25, 0.5, 0.75] {
            let c = frac * binary_entropy(alpha);
            let w = witness::intermediate_witness(&s, &g, alpha, c, None, None, tol).map_err(|e| e.to_string())?;
            let mu = InvariantMeasure::new(vec![(1.0, w.component)]).unwrap();
            ensure(mu.is_ergodic() && mu.support_is_full(), format!("({alpha}, {c}) not ergodic with full support"))?;
            let em = (mu.integrate(&g) - alpha).abs();
            let eh = (mu.entropy() - c).abs();
            worst = (worst.0.max(em), worst.1.max(eh));
            ensure(em <= 1e-6 && eh <= 1e-5, format!("({alpha}, {c}): mean error {em:.2e}, entropy error {eh:.2e}"))?;
            let report = witness::verify_measure(
                &mu,
                &[("g".into(), &g, alpha)],
                Some((c, None)),
                WitnessTolerance { mean: 1e-6, entropy: 1e-5 },
            );
            ensure(report.pass, format!("({alpha}, {c}): independent verification failed"))?;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 30.0, format!("took {elapsed:.1} s"))?;
    Ok(format!("9 witnesses, mean error {:.1e}, entropy error {:.1e}, {elapsed:.2} s", worst.0, worst.1))
}

fn c7_theorem_b() -> Outcome {
    let s = Sft::full_shift(2);
    let g = indicator1(&s);
    let h = Lcf::word_indicator(&s, &[0, 1]).unwrap();
    let mut worst = 0.0f64;
    for a in [[0.5, 0.25], [0.4, 0.2], [0.3, 0.1], [0.6, 0.2], [0.5, 0.1]] {
        let r = witness::birkhoff_witness_2d(&s, &g, &h, a, 1e-10).map_err(|e| e.to_string())?;
        let mu = InvariantMeasure::new(vec![(1.0, r.witness)]).unwrap();
        ensure(mu.is_ergodic() && mu.support_is_full(), format!("{a:?}: not ergodic with full support"))?;
        let e = (witness::cylinder_mean(&mu, &g) - a[0]).abs().max((witness::cylinder_mean(&mu, &h) - a[1]).abs());
        worst = worst.max(e);
    }
    ensure(worst <= 1e-5, format!("coordinate error {worst:.2e}"))?;
    Ok(format!("5 targets, worst coordinate error {worst:.1e}"))
}

fn c8_horseshoe() -> Outcome {
    let s = Sft::full_shift(2);
    let m = [
        InvariantMeasure::bernoulli(&s, &[0.8, 0.2]).unwrap(),
        InvariantMeasure::bernoulli(&s, &[0.2, 0.8]).unwrap(),
    ];
    let opts = HorseshoeOptions { eta: 0.15, zeta: 0.15, n_max: 20, seed: 0, samples: 500 };
    let pack = horseshoe::build_multi_horseshoe(&s, &m, &opts).map_err(|e| e.to_string())?;
    let cert = &pack.certificate;
    ensure(cert.horseshoes.pass, "horseshoe structure check failed")?;
    let margins = &cert.entropy.margins;
    ensure(
        margins.iter().all(|&x| x > 0.0) && cert.entropy.theta_margin > 0.0,
        format!("entropy margins {margins:?}, theta {}", cert.entropy.theta_margin),
    )?;
    ensure(cert.distance.pass && cert.distance.samples == 500, "statistical certificate failed")?;
    let roof = Lcf::from_symbol_values(&s, &[1.0, 2.0]).unwrap();
    let sys = SuspensionSystem::new(s, roof).unwrap();
    let flow = horseshoe::lift_pack_to_flow(&sys, &pack, 500, 0).map_err(|e| e.to_string())?;
    let id = &flow.identity;
    ensure(id.mixtures == 50 && id.pass && id.tolerance <= 1e-10, format!("identity gap {:.2e}", id.max_profile_gap))?;
    Ok(format!(
        "n = {}, entropy margins {:.4} / {:.4}, family distance {:.4} < {}, identity gap {:.1e}",
        pack.n, margins[0], margins[1], cert.distance.family_distance, cert.distance.zeta, id.max_profile_gap
    ))
}

fn c9_duality() -> Outcome {
    let s = Sft::full_shift(2);
    let phi = indicator1(&s);
    let rho = Lcf::from_symbol_values(&s, &[1.0, 2.0]).unwrap();
    let sys = SuspensionSystem::new(s.clone(), rho.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::NEG_INFINITY;
    for alpha in [0.1, 0.2, 0.25, 0.3, 0.4] {
        let r = spectrum::flow_conditional_spectrum(&sys, &phi, alpha, 1e-12).map_err(|e| e.to_string())?;
        let s_star = r.value;
        // Memory-1 chains [[1−a, a], [b, 1−b]] with π₁ = a/(a+b); the ratio
        // π₁/(1+π₁) = α fixes b given a.
        let p1 = alpha / (1.0 - alpha);
        let mut taken = 0;
        while taken < 200 {
            let a: f64 = rng.gen_range(1e-3..1.0);
            let b = a * (1.0 - p1) / p1;
            if !(b > 0.0 && b <= 1.0) {
                continue;
            }
            let q = Mat::from_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap();
            let mu = InvariantMeasure::new(vec![(1.0, MarkovComponent::new(&s, 1, q).unwrap())]).unwrap();
            let resid = (mu.integrate(&phi) - alpha * mu.integrate(&rho)).abs();
            if resid > 1e-9 {
                continue;
            }
            worst = worst.max(sys.abramov_entropy(&mu) - s_star);
            taken += 1;
        }
    }
    ensure(worst <= 1e-6, format!("sampled measure exceeds s* by {worst:.2e}"))?;
    Ok(format!("1000 constrained samples, largest excess {worst:.2e}"))
}

fn c10_lorenz() -> Outcome {
    let m = LorenzModel::example();
    let r = lorenz::validate_lorenz(&m, lorenz::DEFAULT_GRID);
    ensure(r.pass, format!("example fails {:?}", r.failing()))?;
    let min_df = r.get("f_derivative_above_sqrt2").unwrap().worst;
    let dy = r.get("fiber_contraction_y").unwrap().worst;
    ensure(min_df >= 1.48 && min_df > 2f64.sqrt(), format!("min f' = {min_df}"))?;
    ensure((dy - 0.25).abs() < 1e-12, format!("|dH/dy| = {dy}"))?;
    let variant = LorenzModel { f: QuotientMap { c: 1.5, gamma: 0.8 }, ..m };
    let failing = lorenz::validate_lorenz(&variant, lorenz::DEFAULT_GRID).failing().join(",");
    ensure(failing == "f_derivative_above_sqrt2", format!("variant fails [{failing}]"))?;
    let a = lorenz::simulate_return_map(&m, 0.3, 0.0, 1000).map_err(|e| e.to_string())?;
    let b = lorenz::simulate_return_map(&m, 0.3, 0.7, 1000).map_err(|e| e.to_string())?;
    ensure(a.points.len() == b.points.len() && a.xs() == b.xs(), "x tracks differ")?;
    for k in 0..a.points.len() - 1 {
        let (d0, d1) = ((a.points[k].1 - b.points[k].1).abs(), (a.points[k + 1].1 - b.points[k + 1].1).abs());
        ensure(d1 <= dy * d0 + 1e-15, format!("step {k}: |dy| {d0:.3e} -> {d1:.3e}"))?;
    }
    Ok(format!("min f' = {min_df:.4}, |dH/dy| = {dy}, variant fails only f' > sqrt 2, {} steps", a.points.len()))
}

fn symflow(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_symflow")).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn c11_determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = [
        ("full2.json", r#"{"k":2,"A":[[1,1],[1,1]]}"#),
        ("b2.json", r#"{"components":[{"weight":1,"memory":1,"Q":[[0.8,0.2],[0.8,0.2]],"pi":[0.8,0.2]}]}"#),
        ("b8.json", r#"{"components":[{"weight":1,"memory":1,"Q":[[0.2,0.8],[0.2,0.8]],"pi":[0.2,0.8]}]}"#),
        ("susp.json", r#"{"base":{"k":2,"A":[[1,1],[1,1]]},"roof":[1,2]}"#),
    ];
    // identical relative paths in separate directories, so the embedded
    // config hashes agree
    let mut outputs = Vec::new();
    for (tag, jobs) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let d = root.path().join(tag);
        std::fs::create_dir(&d).map_err(|e| e.to_string())?;
        for (name, body) in files {
            std::fs::write(d.join(name), body).map_err(|e| e.to_string())?;
        }
        symflow(
            &["horseshoe", "--sft", "full2.json", "--measure", "b2.json,b8.json", "--eta", "0.15", "--zeta", "0.15",
              "--seed", "0", "--jobs", jobs, "--out", "pack.json"],
            &d,
        )?;
        symflow(&["certify", "--pack", "pack.json", "--seed", "7", "--suspension", "susp.json", "--jobs", jobs, "--out", "cert.json"], &d)?;
        let read = |p: &str| std::fs::read(d.join(p)).map_err(|e| e.to_string());
        outputs.push((tag, read("pack.json")?, read("cert.json")?));
    }
    for (tag, pack, cert) in &outputs[1..] {
        ensure(*pack == outputs[0].1, format!("horseshoe output differs (run {tag})"))?;
        ensure(*cert == outputs[0].2, format!("certify output differs (run {tag})"))?;
    }
    Ok("horseshoe and certify byte-identical over 3 runs (1 and 4 threads)".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("entropy exactness", c1_entropy),
        ("pressure closed form", c2_pressure),
        ("variational identity", c3_variational),
        ("conditional spectrum vs oracle", c4_spectrum),
        ("Abramov and flow entropy", c5_flow_entropy),
        ("intermediate entropy witnesses", c6_theorem_a),
        ("two-observable witnesses", c7_theorem_b),
        ("multi-horseshoe certificate", c8_horseshoe),
        ("flow duality certificate", c9_duality),
        ("Lorenz model", c10_lorenz),
        ("determinism", c11_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
