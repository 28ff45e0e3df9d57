//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use chunkswarm::analysis::{
    check_drift_negative, check_lemma_sweep, download_distribution, drift_with, rate_profile, threshold_case1,
    threshold_main, threshold_two_chunk, two_chunk_states, Arithmetic, Lemma, LyapunovSpec, StateSampler, Threshold,
};
use chunkswarm::rules::decide_sampled;
use chunkswarm::sim::{monte_carlo_drift, run, InitialCondition, SimConfig, TimeSeries};
use chunkswarm::{ChunkSet, Rule, SwarmState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Steady-state band for the k = 20, λ = 10 runs, calibrated on pilot runs
/// (largest S seen over [100, 200] was 351).
const BAND_CAP: u64 = 600;
/// Two-sided 99% quantile of Student's t with 2 degrees of freedom.
const T_CRIT_2DF: f64 = 9.925;
const SEEDS: [u64; 3] = [1, 2, 3];

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    match out {
        Ok(msg) if took <= limit => Ok(format!("{msg}; {:.1}s", took.as_secs_f64())),
        Ok(msg) => Err(format!(
            "{msg}; took {:.1}s, limit {}s",
            took.as_secs_f64(),
            limit.as_secs()
        )),
        Err(msg) => Err(format!("{msg}; {:.1}s", took.as_secs_f64())),
    }
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn lemma_sweep(lemma: Lemma, peers: std::ops::RangeInclusive<u64>, seed: u64) -> Outcome {
    let states = StateSampler::new(vec![2, 3], peers).generate(1000, seed);
    let report = check_lemma_sweep(&states, Rule::BASE, lemma, Arithmetic::Exact).map_err(|e| e.to_string())?;
    ensure(
        report.passed() && report.evaluated == 1000,
        format!(
            "{} evaluated, {} skipped, {} violations, min margin {:.4e}",
            report.evaluated,
            report.skipped,
            report.violations.len(),
            report.min_margin.unwrap_or(f64::NAN)
        ),
    )
}

fn c1() -> Outcome {
    timed(Duration::from_secs(120), || lemma_sweep(Lemma::One, 1..=60, 101))
}

fn c2() -> Outcome {
    timed(Duration::from_secs(120), || lemma_sweep(Lemma::Two, 12..=60, 102))
}

fn c3() -> Outcome {
    let states = StateSampler::new(vec![2, 3, 4], 1..=40).generate(200, 103);
    let rules = [
        Rule::BASE,
        Rule::CommonChunk { m: 4 },
        Rule::RareChunk,
        Rule::RandomMatch,
    ];
    let mut worst_l1 = 0.0f64;
    let mut worst_combined = 0.0f64;
    for (i, s) in states.iter().enumerate() {
        let rule = rules[i % rules.len()];
        let r = rate_profile::<f64>(s, rule).map_err(|e| e.to_string())?.total;
        for lambda in [0.1, 1.0, 10.0] {
            let expected = s.k() as f64 * lambda - r;
            let scale = (s.k() as f64 * lambda).max(r);
            let exact = drift_with(s, rule, lambda, LyapunovSpec::L1, Arithmetic::Exact)
                .map_err(|e| e.to_string())?
                .value;
            worst_l1 = worst_l1.max((exact - expected).abs() / scale);

            let c = LyapunovSpec::combined(s.k());
            let LyapunovSpec::Combined { c: c_value } = c else {
                unreachable!()
            };
            let full = drift_with(s, rule, lambda, c, Arithmetic::Float)
                .map_err(|e| e.to_string())?
                .value;
            let rest = drift_with(s, rule, lambda, LyapunovSpec::Combined { c: 0.0 }, Arithmetic::Float)
                .map_err(|e| e.to_string())?
                .value;
            let scale = c_value * scale + rest.abs();
            worst_combined = worst_combined.max((full - rest - c_value * expected).abs() / scale);
        }
    }
    ensure(
        worst_l1 <= 1e-9 && worst_combined <= 1e-9,
        format!("600 evaluations, worst relative error L1 {worst_l1:.2e}, combined split {worst_combined:.2e}"),
    )
}

fn c4() -> Outcome {
    timed(Duration::from_secs(300), || {
        let floor = threshold_case1(2) as u64;
        let states = StateSampler::new(vec![2], floor + 1..=120).generate(500, 104);
        let report = check_drift_negative(&states, Rule::BASE, 0.15, LyapunovSpec::L1, Arithmetic::Exact, |s| {
            s.peers() > floor
        })
        .map_err(|e| e.to_string())?;
        let min = report.min_margin.unwrap_or(f64::NAN);
        ensure(
            report.passed() && report.evaluated == 500 && min > 0.03,
            format!(
                "{} states with S > {floor}, {} non-negative, min margin {min:.4}",
                report.evaluated,
                report.violations.len()
            ),
        )
    })
}

fn c5() -> Outcome {
    timed(Duration::from_secs(600), || {
        let lambda = 0.1;
        let floor = threshold_two_chunk(lambda);
        let states = two_chunk_states(floor.floor() as u64 + 1..=60);
        let report = check_drift_negative(
            &states,
            Rule::RareChunk,
            lambda,
            LyapunovSpec::TwoChunk,
            Arithmetic::Exact,
            |s| s.peers() as f64 > floor,
        )
        .map_err(|e| e.to_string())?;
        ensure(
            report.passed() && report.skipped == 0,
            format!(
                "{} states with {floor:.0} < S <= 60, {} non-negative, min margin {:.4}",
                report.evaluated,
                report.violations.len(),
                report.min_margin.unwrap_or(f64::NAN)
            ),
        )
    })
}

/// Draws `m` individuals uniformly with replacement, the seed included.
fn draw_individuals(state: &SwarmState, draws: usize, rng: &mut ChaCha8Rng) -> Vec<ChunkSet> {
    let mut pool: Vec<ChunkSet> = state
        .profiles()
        .flat_map(|(p, n)| std::iter::repeat_n(p, n as usize))
        .collect();
    pool.push(ChunkSet::full(state.k()));
    (0..draws).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let sampler = StateSampler::new(vec![2, 3], 2..=30);
    let rules = [
        Rule::BASE,
        Rule::CommonChunk { m: 5 },
        Rule::RareChunk,
        Rule::RandomMatch,
    ];
    let mut misses = Vec::new();
    let mut worst_z = 0.0f64;
    for i in 0..20u64 {
        let state = sampler.sample(&mut rng);
        let rule = rules[rng.gen_range(0..rules.len())];
        let spec = match rng.gen_range(0..3) {
            0 if state.k() == 2 => LyapunovSpec::TwoChunk,
            0 | 1 => LyapunovSpec::L1,
            _ => LyapunovSpec::combined(state.k()),
        };
        let lambda = [0.1, 1.0, 5.0][rng.gen_range(0..3)];
        let exact = drift_with(
            &state,
            rule,
            lambda,
            spec,
            Arithmetic::Auto {
                max_exact_population: 200,
            },
        )
        .map_err(|e| e.to_string())?
        .value;
        let mc = monte_carlo_drift(&state, rule, lambda, spec, 1_000_000, 1000 + i).map_err(|e| e.to_string())?;
        let gap = (mc.estimate - exact).abs();
        let z = if mc.std_error > 0.0 { gap / mc.std_error } else { 0.0 };
        worst_z = worst_z.max(z);
        if gap > 3.0 * mc.std_error + 1e-9 * exact.abs().max(1.0) {
            misses.push(format!("{spec} under {rule} at S={}: z={z:.2}", state.peers()));
        }
    }

    let mut worst_tv = 0.0f64;
    for _ in 0..8 {
        let state = sampler.sample(&mut rng);
        let k = state.k();
        let rule = rules[rng.gen_range(0..rules.len())];
        let profile = ChunkSet::from_bits(rng.gen_range(0..(1u64 << k) - 1), k).map_err(|e| e.to_string())?;
        let exact = download_distribution::<f64>(&state, profile, rule).map_err(|e| e.to_string())?;
        let draws = 100_000;
        let mut freq = vec![0u64; k + 1];
        for _ in 0..draws {
            let sample = draw_individuals(&state, rule.sample_size(profile, k), &mut rng);
            match decide_sampled(profile, &sample, rule, k, &mut rng).map_err(|e| e.to_string())? {
                Some(c) => freq[c] += 1,
                None => freq[k] += 1,
            }
        }
        let tv = 0.5
            * exact
                .chunks
                .iter()
                .chain(std::iter::once(&exact.none))
                .zip(&freq)
                .map(|(p, &n)| (p - n as f64 / draws as f64).abs())
                .sum::<f64>();
        worst_tv = worst_tv.max(tv);
    }

    ensure(
        misses.is_empty() && worst_tv < 0.01,
        format!(
            "{} of 20 drift estimates within 3 SE (worst z {worst_z:.2}){}; worst TV over 8 decision laws {worst_tv:.4}",
            20 - misses.len(),
            if misses.is_empty() { String::new() } else { format!(" misses: {}", misses.join(", ")) }
        ),
    )
}

fn ols_slope(series: &TimeSeries, from: f64, to: f64) -> f64 {
    let pts: Vec<(f64, f64)> = series.window(from, to).map(|r| (r.t, r.peers as f64)).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// One-sample t statistic of the per-seed slopes against zero.
fn slope_t(slopes: &[f64]) -> f64 {
    let n = slopes.len() as f64;
    let mean = slopes.iter().sum::<f64>() / n;
    let var = slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return if mean == 0.0 { 0.0 } else { f64::INFINITY };
    }
    mean / (var / n).sqrt()
}

struct RuleRuns {
    rule: Rule,
    series: Vec<TimeSeries>,
}

fn runs(rules: &[Rule], initial: InitialCondition) -> Result<Vec<RuleRuns>, String> {
    rules
        .iter()
        .map(|&rule| {
            let series = SEEDS
                .iter()
                .map(|&seed| {
                    let cfg = SimConfig::new(20, 10.0, rule, 200.0, seed).with_initial(initial);
                    run(&cfg).map(|o| o.series).map_err(|e| e.to_string())
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RuleRuns { rule, series })
        })
        .collect()
}

const BAND_RULES: [Rule; 4] = [
    Rule::CommonChunk { m: 3 },
    Rule::CommonChunk { m: 5 },
    Rule::CommonChunk { m: 10 },
    Rule::RareChunk,
];

/// Band membership over [100, 200] and a flat trend across seeds.
fn band_and_trend(all: &[RuleRuns]) -> (Vec<String>, Vec<String>) {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for rr in all {
        let max = rr
            .series
            .iter()
            .flat_map(|s| s.window(100.0, 200.0))
            .map(|r| r.peers)
            .max()
            .unwrap_or(0);
        let slopes: Vec<f64> = rr.series.iter().map(|s| ols_slope(s, 100.0, 200.0)).collect();
        let t = slope_t(&slopes);
        notes.push(format!("{}: max S {max}, t {t:.2}", rr.rule.label()));
        if max >= BAND_CAP {
            failures.push(format!("{} left the band (max S {max})", rr.rule.label()));
        }
        if t.abs() >= T_CRIT_2DF {
            failures.push(format!("{} trend t = {t:.2}", rr.rule.label()));
        }
    }
    (notes, failures)
}

fn mean_late_peers(rr: &RuleRuns) -> f64 {
    let rows: Vec<u64> = rr
        .series
        .iter()
        .flat_map(|s| s.window(100.0, 200.0))
        .map(|r| r.peers)
        .collect();
    rows.iter().sum::<u64>() as f64 / rows.len() as f64
}

fn c7() -> (Outcome, Outcome) {
    let all = match runs(&BAND_RULES, InitialCondition::Empty) {
        Ok(all) => all,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let (notes, failures) = band_and_trend(&all);
    let hard = ensure(
        failures.is_empty(),
        format!("cap {BAND_CAP}; {}{}", notes.join("; "), fmt_failures(&failures)),
    );

    let means: Vec<f64> = all.iter().map(mean_late_peers).collect();
    let soft = ensure(
        means[1..].iter().all(|&m| means[0] > m),
        format!(
            "mean S over [100, 200]: {}",
            all.iter()
                .zip(&means)
                .map(|(rr, m)| format!("{} {m:.0}", rr.rule.label()))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    (hard, soft)
}

fn fmt_failures(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; FAILED: {}", failures.join("; "))
    }
}

fn c8() -> Outcome {
    let initial = InitialCondition::Imbalanced {
        n: 1000,
        missing_chunk: 0,
    };
    let all = runs(&BAND_RULES, initial)?;
    let (notes, mut failures) = band_and_trend(&all);
    let mut recovered = Vec::new();
    for rr in &all {
        for (seed, s) in SEEDS.iter().zip(&rr.series) {
            let (first, last) = (&s.rows[0], s.rows.last().expect("non-empty series"));
            if !(first.peers == 1001 && first.min_holders == 1) {
                failures.push(format!("{} seed {seed} did not start imbalanced", rr.rule.label()));
            }
            if last.peers >= first.peers || last.peers >= BAND_CAP {
                failures.push(format!("{} seed {seed}: S(200) = {}", rr.rule.label(), last.peers));
            }
            if last.min_holders <= 1 {
                failures.push(format!(
                    "{} seed {seed}: min holders stuck at {}",
                    rr.rule.label(),
                    last.min_holders
                ));
            }
            recovered.push(last.min_holders);
        }
    }

    // the trend test must be able to see a swarm that keeps growing
    let control = runs(&[Rule::RandomMatch], initial)?;
    let slopes: Vec<f64> = control[0].series.iter().map(|s| ols_slope(s, 100.0, 200.0)).collect();
    let control_t = slope_t(&slopes);
    if control_t.abs() < T_CRIT_2DF {
        failures.push(format!("random-match control not flagged (t {control_t:.2})"));
    }

    ensure(
        failures.is_empty(),
        format!(
            "{}; min holders at t=200 in {}..={}; random-match control t {control_t:.1}{}",
            notes.join("; "),
            recovered.iter().min().unwrap_or(&0),
            recovered.iter().max().unwrap_or(&0),
            fmt_failures(&failures)
        ),
    )
}

fn c9() -> Outcome {
    let thresholds: Vec<Threshold> = [0.01, 0.1, 1.0].iter().map(|&l| threshold_main(2, l)).collect();
    let ln: Vec<String> = thresholds
        .iter()
        .map(|t| match t {
            Threshold::Unrepresentable { ln_value } => format!("ln {ln_value:.3e}"),
            Threshold::Finite { value } => format!("{value:.3e}"),
        })
        .collect();
    ensure(
        thresholds
            .iter()
            .all(|t| matches!(t, Threshold::Unrepresentable { .. })),
        format!(
            "general threshold at k=2 for λ in {{0.01, 0.1, 1}} is beyond f64 ({}); covered by criteria 3 to 5 instead",
            ln.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome, soft: bool| {
        let (tag, msg) = match (&outcome, soft) {
            (Ok(m), _) => ("PASS", m),
            (Err(m), true) => ("SOFT-FAIL", m),
            (Err(m), false) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag:<9} {name}: {msg}");
    };

    report("1 rate lower bound (all peers)", c1(), false);
    report("2 rate lower bound (S >= 12)", c2(), false);
    report("3 L1 drift identity", c3(), false);
    report("4 small-lambda drift", c4(), false);
    report("5 two-chunk drift", c5(), false);
    report("6 Monte-Carlo agreement", c6(), false);
    let (hard, soft) = c7();
    report("7 empty start steady band", hard, false);
    report("7 soft: m=3 hovers above", soft, true);
    report("8 imbalanced start recovers", c8(), false);
    report("9 NOTE general threshold", c9(), false);

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
