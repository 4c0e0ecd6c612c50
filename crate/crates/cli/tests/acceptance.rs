//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p lfree-cli --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use common::{lfree, lfree_env, stub_cmd, Fixtures};
use lfree::brier::{brier_sample_estimate, combine_brier_lm, evaluate_corpus, expected_brier, EvalConfig};
use lfree::energy::{energy_loss, expected_energy_score, propriety_probe, DiscreteVectorDist, RealVector, VectorBatch};
use lfree::temp_batch::{batch_output_distribution, candidates, choose_from_counts, convergence_study};
use lfree::temp_exact::{cost_bound, exact_sample_many, expected_calls, stage2_acceptance_probe, FractionalExponent};
use lfree::{
    empirical_pmf, sample_categorical, tv_distance, ExplicitCategorical, InverseTemperature, Outcome, RandomSeed,
    SamplerSource,
};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pmf(probs: &[f64]) -> ExplicitCategorical {
    ExplicitCategorical::new(probs.iter().enumerate().map(|(i, &p)| (Outcome::token(i as u32), p))).unwrap()
}

/// Test pmfs as (name, outcomes, probabilities).
fn test_pmfs() -> Vec<(&'static str, ExplicitCategorical, Vec<f64>)> {
    let three = vec![0.5, 0.3, 0.2];
    let five = vec![0.4, 0.25, 0.15, 0.12, 0.08];
    let chunks = vec![0.1, 0.2, 0.3, 0.4];
    let chunk_dist = ExplicitCategorical::new(
        chunks
            .iter()
            .enumerate()
            .map(|(i, &p)| (Outcome::new(vec![i as u32, 7, (i * i) as u32]), p)),
    )
    .unwrap();
    vec![("three-atom", pmf(&three), three), ("five-atom", pmf(&five), five), ("chunked", chunk_dist, chunks)]
}

const GRID: [(u64, u64); 4] = [(2, 1), (5, 2), (3, 1), (10, 7)];

/// `p^e / Σ p^e`, in the iteration order of `dist`.
fn tempered_oracle(probs: &[f64], e: f64) -> Vec<f64> {
    let w: Vec<f64> = probs.iter().map(|p| p.powf(e)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// `(n + 1{α>0} Σ p^{e-1}) / Σ p^e` with `e = n + α`.
fn cost_oracle(probs: &[f64], num: u64, den: u64) -> f64 {
    let e = num as f64 / den as f64;
    let n = (num / den) as f64;
    let frac = if !num.is_multiple_of(den) {
        probs.iter().map(|p| p.powf(e - 1.0)).sum::<f64>()
    } else {
        0.0
    };
    (n + frac) / probs.iter().map(|p| p.powf(e)).sum::<f64>()
}

fn exact_law_and_cost() -> (Verdict, Verdict) {
    let mut law = Vec::new();
    let mut cost = Vec::new();
    let (mut law_ok, mut cost_ok) = (true, true);
    for (k, (name, dist, probs)) in test_pmfs().into_iter().enumerate() {
        // Outcomes of `dist` iterate in sorted order, which matches construction order here.
        let outcomes: Vec<Outcome> = dist.outcomes().cloned().collect();
        for (g, &(num, den)) in GRID.iter().enumerate() {
            let t = InverseTemperature::new(num, den).unwrap();
            let seed = RandomSeed(1000 + 10 * k as u64 + g as u64);
            let samples = exact_sample_many(&dist, t, 100_000, seed, u64::MAX).unwrap();
            let emp = empirical_pmf(samples.iter().map(|s| &s.outcome)).unwrap();
            let oracle = ExplicitCategorical::new(
                outcomes.iter().cloned().zip(tempered_oracle(&probs, num as f64 / den as f64)),
            )
            .unwrap();
            let d = tv_distance(&emp, &oracle);
            law_ok &= d < 0.01;
            law.push(format!("{name}@{t}:{d:.4}"));

            let theory = cost_oracle(&probs, num, den);
            let mean = samples.iter().map(|s| s.calls_used).sum::<u64>() as f64 / samples.len() as f64;
            let rel = (mean - theory).abs() / theory;
            let lib = expected_calls(&dist, t);
            let bound = cost_bound(&dist, t);
            let ok = rel < 0.02 && bound >= lib && (lib - theory).abs() <= 1e-9 * theory;
            cost_ok &= ok;
            cost.push(format!("{name}@{t}:rel={rel:.4},E={theory:.3}<=B={bound:.3}"));
        }
    }
    (
        check(law_ok, format!("TV < 0.01 at 1e5 samples [{}]", law.join(" "))),
        check(cost_ok, format!("mean calls within 2%, bound >= closed form [{}]", cost.join(" "))),
    )
}

fn stage2_factory() -> Verdict {
    let trials = 1_000_000u64;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, p) in [0.2, 0.5, 0.9].into_iter().enumerate() {
        for (j, (an, ad)) in [(1, 4), (1, 2), (3, 4)].into_iter().enumerate() {
            let alpha = FractionalExponent::new(an, ad).unwrap();
            let rate = stage2_acceptance_probe(p, alpha, trials, RandomSeed(2000 + 3 * i as u64 + j as u64)).unwrap();
            let want = p.powf(an as f64 / ad as f64);
            let sigma = (want * (1.0 - want) / trials as f64).sqrt();
            let z = (rate - want) / sigma;
            ok &= z.abs() <= 3.0;
            parts.push(format!("p={p},a={an}/{ad}:z={z:+.2}"));
        }
    }
    check(ok, format!("acceptance rate within 3 sigma of p^a at 1e6 trials [{}]", parts.join(" ")))
}

fn worked_example() -> Verdict {
    let letter = |c: char| Outcome::token(c as u32);
    let mut counts = BTreeMap::new();
    for c in "ACADBEAFBG".chars() {
        *counts.entry(letter(c)).or_insert(0u64) += 1;
    }
    let (m, weights) = candidates(&counts, 2);
    let want: BTreeMap<Outcome, f64> = [(letter('A'), 3.0), (letter('B'), 1.0)].into_iter().collect();
    let mut rng = RandomSeed(3000).rng();
    let trace = choose_from_counts(counts, 2, &mut rng);
    let probs = trace.choice_probabilities();
    let exact = m == 2
        && weights == want
        && probs.get(&letter('A')) == Some(&0.75)
        && probs.get(&letter('B')) == Some(&0.25)
        && probs.len() == 2;

    let repeats = 100_000u64;
    let mut a = 0u64;
    for _ in 0..repeats {
        let c = trace.resample_choice(&mut rng);
        assert!(c == letter('A') || c == letter('B'));
        a += u64::from(c == letter('A'));
    }
    let b = repeats - a;
    let (ea, eb) = (0.75 * repeats as f64, 0.25 * repeats as f64);
    let chi2 = (a as f64 - ea).powi(2) / ea + (b as f64 - eb).powi(2) / eb;
    let p_value = 1.0 - ChiSquared::new(1.0).unwrap().cdf(chi2);
    check(
        exact && p_value > 0.001,
        format!("weights {{A:3,B:1}} and choice probabilities {{3/4,1/4}} exact={exact}; chi2={chi2:.3}, p={p_value:.3} over 1e5 resamples"),
    )
}

/// Output law of the batch algorithm for `batch_size = 2`, by enumerating
/// all ordered batches and applying the fallback rule directly.
fn batch2_oracle(probs: &[f64], n: u64) -> Vec<f64> {
    let k = probs.len();
    let mut out = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            let pb = probs[i] * probs[j];
            let mut counts = vec![0u64; k];
            counts[i] += 1;
            counts[j] += 1;
            for m in (1..=n).rev() {
                let w: Vec<f64> = counts
                    .iter()
                    .map(|&c| if c >= m { (0..m).map(|r| (c - r) as f64 / (r + 1) as f64).product() } else { 0.0 })
                    .collect();
                let total: f64 = w.iter().sum();
                if total > 0.0 {
                    for (x, wx) in w.iter().enumerate() {
                        out[x] += pb * wx / total;
                    }
                    break;
                }
            }
        }
    }
    out
}

fn batch_convergence() -> Verdict {
    let probs = [0.5, 0.3, 0.2];
    let dist = pmf(&probs);
    let runs = 100_000u64;
    let target = tempered_oracle(&probs, 2.0);
    let points = convergence_study(&dist, 2, &[10, 100, 1000], runs, RandomSeed(4000)).unwrap();
    // A TV estimate from `runs` draws fluctuates by at most about ½ Σ sd of the cell frequencies.
    let noise = 3.0 * 0.5 * target.iter().map(|q| (q * (1.0 - q) / runs as f64).sqrt()).sum::<f64>();
    let monotone = points.windows(2).all(|w| w[1].tv_to_target <= w[0].tv_to_target + noise);
    let last = points.last().unwrap().tv_to_target;
    let tvs: Vec<String> = points.iter().map(|p| format!("N={}:{:.4}", p.batch_size, p.tv_to_target)).collect();

    let oracle = batch2_oracle(&probs, 2);
    let emp = batch_output_distribution(&dist, 2, 2, runs, RandomSeed(4001)).unwrap();
    let mut max_z: f64 = 0.0;
    for (i, o) in oracle.iter().enumerate() {
        let sigma = (o * (1.0 - o) / runs as f64).sqrt();
        max_z = max_z.max((emp.prob(&Outcome::token(i as u32)) - o).abs() / sigma);
    }
    let bias: f64 = 0.5 * oracle.iter().zip(&target).map(|(a, b)| (a - b).abs()).sum::<f64>();
    check(
        monotone && last < 0.02 && max_z <= 3.0,
        format!(
            "[{}] non-increasing within {noise:.4}, final < 0.02; N=2 enumeration vs simulation max |z|={max_z:.2}, exact N=2 bias TV={bias:.4}",
            tvs.join(" ")
        ),
    )
}

fn brier_unbiasedness() -> Verdict {
    let cases: Vec<(Vec<f64>, u32)> = vec![(vec![0.5, 0.3, 0.2], 0), (vec![0.5, 0.3, 0.2], 2), (vec![0.1, 0.1, 0.1, 0.7], 1)];
    let pairs = 1_000_000usize;
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, (probs, y)) in cases.into_iter().enumerate() {
        let dist = pmf(&probs);
        let y = Outcome::token(y);
        let py = probs[y.tokens()[0] as usize];
        let want = 2.0 * py - probs.iter().map(|p| p * p).sum::<f64>();
        // Exact variance by enumerating (x1, x2).
        let k = probs.len();
        let mut second = 0.0;
        for i in 0..k {
            for j in 0..k {
                let v = f64::from(u8::from(i == y.tokens()[0] as usize)) + f64::from(u8::from(j == y.tokens()[0] as usize))
                    - f64::from(u8::from(i == j));
                second += probs[i] * probs[j] * v * v;
            }
        }
        let sigma = ((second - want * want) / pairs as f64).sqrt();
        let draws = sample_categorical(&dist, 2 * pairs, RandomSeed(5000 + c as u64));
        let sum: i64 = draws
            .chunks(2)
            .map(|x| i64::from(brier_sample_estimate(&x[0], &x[1], &y).unwrap()))
            .sum();
        let mean = sum as f64 / pairs as f64;
        let z = (mean - want) / sigma;
        ok &= z.abs() <= 3.0;
        parts.push(format!("case{c}:mean={mean:.4},exact={want:.4},z={z:+.2}"));
    }

    // Decomposition on reports from an explicit chunk pmf over a small corpus.
    let chunk = ExplicitCategorical::new(vec![
        (Outcome::new(vec![1, 2, 3, 4]), 0.4),
        (Outcome::new(vec![1, 2, 1, 2]), 0.3),
        (Outcome::new(vec![3, 4, 1, 2]), 0.3),
    ])
    .unwrap();
    let corpus: Vec<u32> = (0..400).map(|i| [1, 2, 3, 4, 1, 2][i % 6]).collect();
    let mut identity = true;
    for s in 0..5 {
        let mut src = SamplerSource::explicit(&chunk);
        let r = evaluate_corpus(&mut src, &corpus, &EvalConfig::default(), RandomSeed(5100 + s)).unwrap();
        for (n, c) in &r.counts {
            identity &= r.brier_n[n] == 2.0 * r.accuracy[n] - r.collision[n];
            identity &= c.estimate_sum() == c.match1 as i64 + c.match2 as i64 - c.collision as i64;
        }
    }
    check(
        ok && identity,
        format!("1e6 paired draws within 3 sigma [{}]; brier = 2 acc - collision on every report: {identity}", parts.join(" ")),
    )
}

fn brier_lm_arithmetic() -> Verdict {
    let inputs = [0.2181, 0.0688, 0.0259, 0.0125];
    let by_order: BTreeMap<usize, f64> = inputs.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect();
    let lib = combine_brier_lm(&by_order).unwrap();
    let oracle = 100.0 * inputs.iter().product::<f64>().powf(0.25);
    let out = lfree(&["eval-brier", "--combine-only", "0.2181,0.0688,0.0259,0.0125"]);
    let cli: f64 = serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()["brier_lm"]
        .as_f64()
        .unwrap_or(f64::NAN);
    check(
        (lib - 4.70).abs() <= 0.01 && (cli - 4.70).abs() <= 0.01 && (lib - oracle).abs() < 1e-12,
        format!("library {lib:.4}, CLI {cli:.4}, direct {oracle:.4}; target 4.70 +/- 0.01"),
    )
}

fn brier_propriety() -> Verdict {
    let steps = 20u32;
    let mut mesh = Vec::new();
    for a in 0..=steps {
        for b in 0..=steps - a {
            let c = steps - a - b;
            mesh.push([a, b, c].map(|k| f64::from(k) / f64::from(steps)));
        }
    }
    let dists: Vec<ExplicitCategorical> = mesh.iter().map(|p| pmf(p)).collect();
    let mut ok = true;
    let mut min_gap = f64::INFINITY;
    for (qi, q) in dists.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        let mut argbest = Vec::new();
        for (pi, p) in dists.iter().enumerate() {
            let s = expected_brier(p, q);
            // Direct closed form: 2 Σ q p − Σ p².
            let direct: f64 = (0..3).map(|i| 2.0 * mesh[qi][i] * mesh[pi][i] - mesh[pi][i] * mesh[pi][i]).sum();
            ok &= (s - direct).abs() < 1e-12;
            if s > best + 1e-12 {
                best = s;
                argbest = vec![pi];
            } else if (s - best).abs() <= 1e-12 {
                argbest.push(pi);
            }
            if pi != qi {
                min_gap = min_gap.min(expected_brier(q, q) - s);
            }
        }
        ok &= argbest == vec![qi];
    }
    check(
        ok && min_gap > 0.0,
        format!("{} mesh points, maximizer unique and equal to truth; smallest gap {min_gap:.4}", mesh.len()),
    )
}

fn v(c: &[f64]) -> RealVector {
    RealVector::new(c.to_vec()).unwrap()
}

fn dist_of(atoms: &[(&[f64], f64)]) -> DiscreteVectorDist {
    DiscreteVectorDist::new(atoms.iter().map(|(c, p)| (v(c), *p)).collect()).unwrap()
}

fn norm_pow(a: &[f64], b: &[f64], alpha: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt().powf(alpha)
}

/// Loss of one batch straight from the pairwise definition, ordered pairs.
fn loss_oracle(model: &[&[f64]], target: &[&[f64]], alpha: f64) -> f64 {
    let (n, m) = (model.len() as f64, target.len() as f64);
    let mut cross = 0.0;
    for z in target {
        for x in model {
            cross += norm_pow(z, x, alpha);
        }
    }
    let mut within = 0.0;
    for (i, a) in model.iter().enumerate() {
        for (k, b) in model.iter().enumerate() {
            if i != k {
                within += norm_pow(a, b, alpha);
            }
        }
    }
    2.0 / (n * m) * cross - within / (n * (n - 1.0))
}

fn energy() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;

    let hand = VectorBatch::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[0.0, 0.0]]).unwrap();
    let h = energy_loss(&hand, 1.0).unwrap();
    let hand_ok = (h - (2.0 - 2f64.sqrt())).abs() < 1e-12;
    ok &= hand_ok;
    notes.push(format!("hand={h:.12}"));

    // Model P: 3 atoms, target Q: 2 atoms; batches of N=2 model and M=2 target samples.
    let p_atoms: [(&[f64], f64); 3] = [(&[0.0, 0.0], 0.5), (&[1.0, 0.0], 0.3), (&[0.0, 2.0], 0.2)];
    let q_atoms: [(&[f64], f64); 2] = [(&[0.5, 0.5], 0.6), (&[1.0, 1.0], 0.4)];
    let alpha = 1.0;
    let (mut mean, mut second) = (0.0, 0.0);
    for a in &p_atoms {
        for b in &p_atoms {
            for c in &q_atoms {
                for d in &q_atoms {
                    let w = a.1 * b.1 * c.1 * d.1;
                    let l = loss_oracle(&[a.0, b.0], &[c.0, d.0], alpha);
                    mean += w * l;
                    second += w * l * l;
                }
            }
        }
    }
    let batches = 100_000u64;
    let sigma = ((second - mean * mean) / batches as f64).sqrt();
    let mut rng = RandomSeed(6000).rng();
    let mut pick = |atoms: &[(&[f64], f64)]| -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (c, p) in atoms {
            acc += p;
            if u < acc {
                return c.to_vec();
            }
        }
        atoms.last().unwrap().0.to_vec()
    };
    let mut total = 0.0;
    for _ in 0..batches {
        let model = vec![v(&pick(&p_atoms)), v(&pick(&p_atoms))];
        let target = vec![v(&pick(&q_atoms)), v(&pick(&q_atoms))];
        total += energy_loss(&VectorBatch::new(model, target).unwrap(), alpha).unwrap();
    }
    let emp = total / batches as f64;
    let z = (emp - mean) / sigma;
    // Expected loss is minus the expected score of P under Q.
    let score = expected_energy_score(&dist_of(&p_atoms), &dist_of(&q_atoms), alpha).unwrap();
    let est_ok = z.abs() <= 3.0 && (mean + score).abs() < 1e-12;
    ok &= est_ok;
    notes.push(format!("estimator mean={emp:.4} exact={mean:.4} z={z:+.2}"));

    // Strict propriety against reweightings and shifted supports of the truth.
    let q = dist_of(&[(&[0.0, 0.0], 0.5), (&[1.0, 0.0], 0.3), (&[0.0, 1.0], 0.2)]);
    let mut candidates = Vec::new();
    for a in 0..=10u32 {
        for b in 0..=10 - a {
            let w = [a, b, 10 - a - b].map(|k| f64::from(k) / 10.0);
            if w == [0.5, 0.3, 0.2] {
                continue;
            }
            let atoms: Vec<(&[f64], f64)> = [&[0.0, 0.0][..], &[1.0, 0.0], &[0.0, 1.0]]
                .into_iter()
                .zip(w)
                .filter(|(_, p)| *p > 0.0)
                .collect();
            candidates.push(dist_of(&atoms));
        }
    }
    for shift in [0.1, 0.5, -0.3] {
        candidates.push(dist_of(&[(&[shift, 0.0], 0.5), (&[1.0 + shift, 0.0], 0.3), (&[shift, 1.0], 0.2)]));
    }
    candidates.push(dist_of(&[(&[0.3, 0.2], 1.0)]));
    for a in [0.5, 1.0, 1.5] {
        let r = propriety_probe(&q, &candidates, a).unwrap();
        let gap = r.candidate_scores.iter().map(|s| r.true_score - s).fold(f64::INFINITY, f64::min);
        ok &= r.truth_is_maximal(0.0) && gap > 1e-9;
        notes.push(format!("a={a}:min gap {gap:.6e}"));
    }

    // The exponent-2 degeneracy: equal means, equal expected scores.
    let spread = dist_of(&[(&[0.0], 0.5), (&[2.0], 0.5)]);
    let point = dist_of(&[(&[1.0], 1.0)]);
    let s_true = expected_energy_score(&spread, &spread, 2.0).unwrap();
    let s_point = expected_energy_score(&point, &spread, 2.0).unwrap();
    ok &= (s_true - s_point).abs() < 1e-12;
    notes.push(format!("a=2 scores {s_true} vs {s_point}"));

    check(ok, notes.join("; "))
}

fn cli_determinism() -> Verdict {
    let fx = Fixtures::new();
    let p = fx.pmf("p.json", &[&[0], &[1], &[2]], &[0.5, 0.3, 0.2]);
    let corpus = fx.write("c.txt", &"the cat sat on the mat. ".repeat(10));
    let batch = fx.write("b.json", r#"{"model_samples": [[1, 0], [0, 1]], "target_samples": [[0, 0]]}"#);
    let ext = stub_cmd("--mode uniform --k 4 --vocab 16");
    let bigram = stub_cmd(&format!("--mode bigram --corpus '{corpus}'"));
    let runs: Vec<Vec<&str>> = vec![
        vec!["sample", "--pmf", &p, "--inv-temp", "5/2", "--count", "2000", "--seed", "9"],
        vec!["sample", "--pmf", &p, "--inv-temp", "10/7", "--count", "500", "--seed", "9", "--output-format", "csv"],
        vec!["sample", "--pmf", &p, "--n", "3", "--batch-size", "50", "--count", "20", "--seed", "9"],
        vec!["sample", "--external", &ext, "--inv-temp", "2/1", "--count", "10", "--seed", "9"],
        vec!["sample", "--external", &ext, "--n", "2", "--batch-size", "30", "--count", "5", "--seed", "9"],
        vec!["eval-brier", "--corpus", &corpus, "--pmf", &p, "--max-order", "1", "--seed", "9"],
        vec!["eval-brier", "--corpus", &corpus, "--external", &bigram, "--seed", "9", "--output-format", "table"],
        vec!["cost-sim", "--pmf", &p, "--inv-temp-grid", "2/1,5/2,4/3", "--trials", "20000", "--seed", "9"],
        vec!["oracle", "--pmf", &p, "--inv-temp", "5/2"],
        vec!["energy", "--batch", &batch, "--alpha", "1.5"],
        vec!["eval-brier", "--combine-only", "0.2181,0.0688,0.0259,0.0125"],
    ];
    let mut failures = Vec::new();
    for args in &runs {
        let a = lfree(args);
        let b = lfree(args);
        // A third run pinned to one worker thread must agree as well.
        let c = lfree_env(args, &[("RAYON_NUM_THREADS", "1")]);
        if !a.status.success() || a.stdout.is_empty() || a.stdout != b.stdout || a.stdout != c.stdout {
            failures.push(format!("{} {}", args[0], args[1]));
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} seeded invocations bit-identical across runs and thread counts", runs.len())
        } else {
            format!("differing outputs: {failures:?}")
        },
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    let (law, cost) = exact_law_and_cost();
    results.push(("exact temperature sampling law", law));
    results.push(("expected sampler calls and bound", cost));
    results.push(("fractional-stage Bernoulli factory", stage2_factory()));
    results.push(("batch algorithm worked example", worked_example()));
    results.push(("batch algorithm asymptotic unbiasedness", batch_convergence()));
    results.push(("Brier estimator unbiasedness and decomposition", brier_unbiasedness()));
    results.push(("BrierLM arithmetic", brier_lm_arithmetic()));
    results.push(("Brier strict propriety", brier_propriety()));
    results.push(("energy loss", energy()));
    results.push(("CLI determinism", cli_determinism()));

    let mut failed = 0;
    for (name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
