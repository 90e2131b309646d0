//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use vcop::dynamics::{count_oscillations, DynamicsConfig};
use vcop::fixtures;
use vcop::ingest::{parse_archive, ArchiveFormat};
use vcop::language::{emotionality, sentiment_score, Lexicon};
use vcop::mlm::{fit_lmm, percent_change, icc_from, Criterion, ModelFit, ModelSpec};
use vcop::netgraph::{betweenness, centralization};
use vcop::panel::{read_panel_csv, write_panel_csv, CorrelationReport, TABLE_VARIABLES};
use vcop::pipeline::{build_panel, compute_metrics, with_jobs};
use vcop::report::{render_report, RegressionTable, RunMetadata};
use vcop::synth::{generate_archive, reference_scale_spec, vocabulary, CommunitySpec, SynthSpec};

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn betweenness_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=7);
        let p = rng.gen::<f64>();
        let edges = random_edges(n, p, &mut rng);
        let fast = betweenness(&graph(n, &edges));
        let slow = brute_force_betweenness(n, &edges);
        for (a, b) in fast.raw.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 10.0,
        format!("100 graphs n<=7, max |diff| {worst:.1e} (tol 1e-9), {secs:.2}s (limit 10s)"),
    )
}

fn centralization_fixtures() -> Outcome {
    let gb = |n: usize, e: &[(usize, usize)]| centralization(&betweenness(&graph(n, e)).raw).unwrap();
    let stars = (3..=12).all(|n| gb(n, &star(n)) == 1.0);
    let cycles = (3..=8).all(|n| gb(n, &cycle(n)) == 0.0);
    let cliques = (3..=8).all(|n| gb(n, &complete(n)) == 0.0);
    let p4 = gb(4, &[(0, 1), (1, 2), (2, 3)]);
    let p4_ok = (p4 - 4.0 / 9.0).abs() <= 1e-12;
    outcome(
        stars && cycles && cliques && p4_ok,
        format!("star 3..12 = 1: {stars}; cycle 3..8 = 0: {cycles}; complete 3..8 = 0: {cliques}; P4 = {p4:.15} (4/9 ± 1e-12)"),
    )
}

fn oscillation_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x05C);
    let mut invariant = 0;
    let mut bounded = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(0..40);
        let levels = rng.gen_range(1..6);
        let series: Vec<f64> = (0..len).map(|_| rng.gen_range(0..levels) as f64 * 0.75).collect();
        let mapped: Vec<f64> = series.iter().map(|x| x.exp() + x.powi(3) - 7.0).collect();
        let c = count_oscillations(&series);
        if c == count_oscillations(&mapped) {
            invariant += 1;
        }
        if len < 2 || c <= len - 2 {
            bounded += 1;
        }
    }
    let example = count_oscillations(&[0.0, 2.0, 0.0, 2.0, 0.0]);
    outcome(
        invariant == 1000 && bounded == 1000 && example == 3,
        format!("monotone invariance {invariant}/1000, bound len-2 {bounded}/1000, [0,2,0,2,0] -> {example}"),
    )
}

fn language_fixtures() -> Outcome {
    let lex = Lexicon::builtin();
    let (common_words, _) = vocabulary();
    let pos: Vec<&str> = lex.positive().iter().take(5).map(String::as_str).collect();
    let neg: Vec<&str> = lex.negative().iter().take(5).map(String::as_str).collect();
    let neutral = sentiment_score(&common_words[..6].join(" "), &lex);
    let positive = sentiment_score(&pos.join(" "), &lex);
    let negative = sentiment_score(&neg.join(" "), &lex);
    let endpoints = neutral == 0.5 && positive == 1.0 && negative == 0.0;
    let emo = emotionality(&[0.0, 1.0]);

    let mut ordered = 0;
    for seed in 0..20 {
        let mut common = CommunitySpec::new(30, 4, 40.0, seed);
        common.id = Some("common".into());
        common.rare_fraction = 0.02;
        let mut rare = CommunitySpec::new(30, 4, 40.0, 1000 + seed);
        rare.id = Some("rare".into());
        rare.rare_fraction = 0.6;
        let spec = SynthSpec {
            start: "2010-01".parse().unwrap(),
            communities: vec![common, rare],
        };
        let archive = generate_archive(&spec).unwrap();
        let m = compute_metrics(&archive, &DynamicsConfig::default(), &lex).unwrap();
        let of = |id: &str| -> Vec<f64> {
            m.language
                .iter()
                .filter(|r| r.community_id == id)
                .filter_map(|r| r.complexity)
                .collect()
        };
        let (c, r) = (of("common"), of("rare"));
        let max_common = c.iter().cloned().fold(f64::MIN, f64::max);
        let min_rare = r.iter().cloned().fold(f64::MAX, f64::min);
        if c.len() == 4 && r.len() == 4 && max_common < min_rare {
            ordered += 1;
        }
    }
    outcome(
        endpoints && emo == Some(0.5) && ordered == 20,
        format!(
            "sentiment neutral/pos/neg = {neutral}/{positive}/{negative}; emotionality([0,1]) = {emo:?}; complexity ordered {ordered}/20 seeds"
        ),
    )
}

fn mixed_model_recovery() -> Outcome {
    let started = Instant::now();
    let truth = PanelTruth {
        groups: 16,
        per_group: 47,
        beta: (2.0, 0.5),
        var_u: 1.0,
        var_e: 4.0,
    };
    let spec = ModelSpec::new("x", "joiners", &["x"]);
    let fits: Vec<ModelFit> = (0..20)
        .map(|seed| fit_lmm(&synthetic_panel(&truth, seed), &spec, Criterion::Ml).unwrap())
        .collect();
    let col = |f: &dyn Fn(&ModelFit) -> f64| fits.iter().map(f).collect::<Vec<f64>>();
    let b0 = col(&|f| f.coefficients[0].estimate);
    let b1 = col(&|f| f.coefficients[1].estimate);
    let se0 = median(col(&|f| f.coefficients[0].std_error));
    let se1 = median(col(&|f| f.coefficients[1].std_error));
    let vu = col(&|f| f.variance_level2);
    let ve = col(&|f| f.variance_level1);
    let checks = [
        ("b0", median(b0.clone()), truth.beta.0, se0),
        ("b1", median(b1.clone()), truth.beta.1, se1),
        ("var_u", median(vu.clone()), truth.var_u, sd(&vu)),
        ("var_e", median(ve.clone()), truth.var_e, sd(&ve)),
    ];
    let recovered = checks.iter().all(|&(_, est, t, se)| (est - t).abs() <= 2.0 * se);
    let summary: Vec<String> = checks
        .iter()
        .map(|(n, est, t, se)| format!("{n} {est:.3} (truth {t}, 2SE {:.3})", 2.0 * se))
        .collect();

    let null_truth = PanelTruth { var_u: 0.0, ..truth };
    let rows = synthetic_panel(&null_truth, 7);
    let fit = fit_lmm(&rows, &spec, Criterion::Ml).unwrap();
    let (o0, o1) = ols(&rows);
    let gap = (fit.coefficients[0].estimate - o0)
        .abs()
        .max((fit.coefficients[1].estimate - o1).abs());
    let null_ok = fit.icc < 0.01 && gap <= 1e-6;
    let secs = started.elapsed().as_secs_f64();
    outcome(
        recovered && null_ok && secs < 60.0,
        format!(
            "16x47, 20 seeds: {}; var_u=0: ICC {:.4} (<0.01), |beta-OLS| {gap:.1e} (<=1e-6); {secs:.2}s (limit 60s)",
            summary.join(", "),
            fit.icc
        ),
    )
}

fn published_arithmetic() -> Outcome {
    let (v2, v1) = fixtures::NULL_VARIANCES;
    let icc = 100.0 * icc_from(v2, v1);
    let change2 = percent_change(1.748, v2).unwrap();
    let change1 = percent_change(19.340, v1).unwrap();
    let table = fixtures::correlations().render();
    let starred = table.lines().any(|l| l.starts_with("9 ") && l.contains(".374**"));
    outcome(
        (icc - 10.61).abs() <= 0.01 && (change2 + 39.11).abs() <= 0.01 && starred,
        format!(
            "ICC {icc:.4}% (10.61 ± 0.01); level-2 change {change2:.4}% (-39.11 ± 0.01); .374** at n=754: {starred}; level-1 change computes to {change1:.2}% (published -19.82%)"
        ),
    )
}

fn mean_of(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn dial_archive(centralization: f64, rotation: f64, seed: u64) -> vcop::pipeline::Metrics {
    let mut c = CommunitySpec::new(40, 4, 60.0, seed);
    c.centralization = centralization;
    c.rotation = rotation;
    let spec = SynthSpec {
        start: "2011-01".parse().unwrap(),
        communities: vec![c],
    };
    let archive = generate_archive(&spec).unwrap();
    compute_metrics(&archive, &DynamicsConfig::default(), &Lexicon::builtin()).unwrap()
}

fn dial_checks() -> Outcome {
    let mut central_wins = 0;
    let mut rotation_wins = 0;
    for seed in 0..20 {
        let gb = |c: f64| mean_of(dial_archive(c, 0.1, seed).network.iter().filter_map(|r| r.group_betweenness));
        if gb(0.9) > gb(0.2) {
            central_wins += 1;
        }
        let rl = |r: f64| mean_of(dial_archive(0.8, r, seed).dynamics.iter().map(|d| d.rotating_leadership));
        if rl(0.6) > rl(0.02) {
            rotation_wins += 1;
        }
    }

    let gb_coefficients = |coupling: f64| {
        let mut spec = reference_scale_spec(11);
        for c in &mut spec.communities {
            c.centralization_jitter = 0.3;
            c.joiner_coupling = coupling;
        }
        let archive = generate_archive(&spec).unwrap();
        let m = compute_metrics(&archive, &DynamicsConfig::default(), &Lexicon::builtin()).unwrap();
        let rows = build_panel(&m).unwrap().rows;
        let single = fit_lmm(&rows, &ModelSpec::new("gb", "joiners", &["group_betweenness"]), Criterion::Ml).unwrap();
        let full = fit_lmm(&rows, &ModelSpec::standard("full").unwrap(), Criterion::Ml).unwrap();
        (
            single.coefficient("group_betweenness").unwrap().estimate,
            full.coefficient("group_betweenness").unwrap().estimate,
        )
    };
    let (c_single, c_full) = gb_coefficients(30.0);
    let (u_single, u_full) = gb_coefficients(0.0);
    outcome(
        central_wins == 20 && rotation_wins >= 18 && c_single > 0.0 && c_full > 0.0,
        format!(
            "centralization {central_wins}/20 (need 20); rotation {rotation_wins}/20 (need 18); coupled GB coefficient {c_single:.3} alone, {c_full:.3} in full model (need > 0; uncoupled {u_single:.3}, {u_full:.3})"
        ),
    )
}

struct PipelineOutput {
    posts: usize,
    members: usize,
    panel_csv: Vec<u8>,
    fit_json: Vec<u8>,
    report: String,
}

/// Ingest through report on serialized bytes, as the staged CLI does.
fn full_pipeline(archive_bytes: &[u8]) -> PipelineOutput {
    let parsed = parse_archive(archive_bytes, ArchiveFormat::JsonLines).unwrap();
    let archive = parsed.archive;
    let members = archive
        .posts()
        .iter()
        .map(|p| p.author_id.as_str())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let metrics = compute_metrics(&archive, &DynamicsConfig::default(), &Lexicon::builtin()).unwrap();
    let build = build_panel(&metrics).unwrap();
    let mut panel_csv = Vec::new();
    write_panel_csv(&build.rows, &mut panel_csv).unwrap();
    let rows = read_panel_csv(panel_csv.as_slice()).unwrap();
    let fits: Vec<ModelFit> = ModelSpec::STANDARD
        .iter()
        .map(|name| fit_lmm(&rows, &ModelSpec::standard(name).unwrap(), Criterion::Ml).unwrap())
        .collect();
    let fit_json = serde_json::to_vec_pretty(&fits).unwrap();
    let correlations = CorrelationReport::compute(&rows, &TABLE_VARIABLES).unwrap();
    let meta = RunMetadata::new("report").input("panel.csv", &panel_csv);
    let report = render_report(&correlations, Some(&RegressionTable::from_fits(&fits)), &meta);
    PipelineOutput {
        posts: archive.len(),
        members,
        panel_csv,
        fit_json,
        report,
    }
}

fn archive_bytes(seed: u64) -> Vec<u8> {
    let archive = generate_archive(&reference_scale_spec(seed)).unwrap();
    let mut buf = Vec::new();
    archive.write_jsonl(&mut buf).unwrap();
    buf
}

fn performance() -> Outcome {
    let bytes = archive_bytes(2);
    let started = Instant::now();
    let out = with_jobs(1, || full_pipeline(&bytes));
    let secs = started.elapsed().as_secs_f64();
    outcome(
        secs < 60.0 && !out.report.is_empty(),
        format!(
            "{} posts, {} members, 16 communities, single thread: {secs:.2}s (limit 60s)",
            out.posts, out.members
        ),
    )
}

fn determinism() -> Outcome {
    let bytes = archive_bytes(5);
    let a = with_jobs(1, || full_pipeline(&bytes));
    let b = with_jobs(4, || full_pipeline(&archive_bytes(5)));
    let panel = a.panel_csv == b.panel_csv;
    let fits = a.fit_json == b.fit_json;
    outcome(
        panel && fits,
        format!(
            "panel csv identical: {panel} ({} bytes); fit json identical: {fits} ({} bytes)",
            a.panel_csv.len(),
            a.fit_json.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("betweenness oracle", betweenness_oracle),
        ("centralization fixtures", centralization_fixtures),
        ("oscillation properties", oscillation_properties),
        ("language fixtures", language_fixtures),
        ("mixed-model recovery", mixed_model_recovery),
        ("published-value arithmetic", published_arithmetic),
        ("end-to-end dial checks", dial_checks),
        ("performance", performance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
