//! Acceptance suite. Each test exercises one release criterion end to end at
//! its stated tolerance and prints one PASS line; any failure fails the
//! build. Run with:
//!
//! ```text
//! cargo test -p zebra-cli --test acceptance -- --nocapture
//! ```


use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zebra_core::analysis::{cluster, pca_project, tfidf_audit, Linkage};
use zebra_core::dataset::{InstructionRecord, ModelResponse};
use zebra_core::stats::{paired_t_test, permutation_test, PairedSample};
use zebra_core::{
    normalize, select_pair, similarity_matrix, AbilityProfile, BenchmarkTable, CandidateSet,
    SimilarityMatrix, Strategy, StrategyConfig,
};

const TABLE5_CSV: &str = include_str!("../../../../data/benchmarks.csv");

/// Published per-model average scores the profile run must reproduce.
const PUBLISHED_AVERAGES: [(&str, f64); 16] = [
    ("GPT-4", 0.99),
    ("GPT-3.5-turbo", 0.77),
    ("bard", 0.86),
    ("Llama-2-7b-chat", 0.41),
    ("Llama-2-13b-chat", 0.45),
    ("Llama-2-70b-chat", 0.58),
    ("UltraLM-13b", 0.40),
    ("WizardLM-7b", 0.34),
    ("WizardLM-13b", 0.45),
    ("WizardLM-70b", 0.58),
    ("Vicuna-33b", 0.57),
    ("Alpaca-7b", 0.16),
    ("Falcon-40b-instruct", 0.47),
    ("MPT-30b-chat", 0.38),
    ("Starchat", 0.05),
    ("Pythia-12b", 0.07),
];

fn pass(criterion: &str) {
    println!("acceptance {criterion}: PASS");
}

fn table_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/benchmarks.csv")
}

fn zebra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zebra"))
        .args(args)
        .output()
        .expect("spawn zebra")
}

fn table5_profiles() -> (Vec<AbilityProfile>, SimilarityMatrix) {
    let table = BenchmarkTable::from_csv_reader(TABLE5_CSV.as_bytes()).unwrap();
    let profiles = normalize(&table).unwrap();
    let sim = similarity_matrix(&profiles).unwrap();
    (profiles, sim)
}

fn write_synthetic_pool(path: &Path, models: &[&str], n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut file = std::fs::File::create(path).unwrap();
    for i in 0..n {
        let mut pick = models.to_vec();
        pick.shuffle(&mut rng);
        let k = rng.random_range(1..=pick.len().min(6));
        let record = InstructionRecord {
            instruction_id: format!("q{i:06}"),
            instruction: format!("synthetic instruction {i}"),
            responses: pick[..k]
                .iter()
                .map(|m| ModelResponse {
                    model: m.to_string(),
                    text: format!("{m} response {i}"),
                })
                .collect(),
        };
        serde_json::to_writer(&mut file, &record).unwrap();
        file.write_all(b"\n").unwrap();
    }
}

// Criterion 1: the profile command reproduces the published average-score
// column within +/- 0.01 for all 16 models, in under a second.
#[test]
fn c1_published_table_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profiles.json");
    let table = table_path();

    let started = Instant::now();
    let output = zebra(&[
        "profile",
        "--benchmarks",
        table.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert!(output.status.success(), "{output:?}");
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "profile took {elapsed:?}, budget is 1 s"
    );

    let set: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let models = set["models"].as_array().unwrap();
    assert_eq!(models.len(), 16);
    for (name, published) in PUBLISHED_AVERAGES {
        let entry = models
            .iter()
            .find(|m| m["model"] == name)
            .unwrap_or_else(|| panic!("missing {name}"));
        let mb_sup = entry["mb_sup"].as_f64().unwrap();
        assert!(
            (mb_sup - published).abs() <= 0.01,
            "{name}: mb_sup {mb_sup} vs published {published}"
        );
    }
    pass("criterion 1 (published average-score reproduction, < 1 s)");
}

// Criterion 2: MB-SIM orders the Llama-2 pair above the WizardLM pair, with
// the matrix verified against a brute-force cosine oracle.
#[test]
fn c2_similarity_ordering() {
    let (profiles, sim) = table5_profiles();
    for (i, p) in profiles.iter().enumerate() {
        for (j, q) in profiles.iter().enumerate() {
            let want = if i == j {
                1.0
            } else {
                oracles::cosine_brute(&p.vector, &q.vector)
            };
            assert!(
                (sim.sim[i][j] - want).abs() <= 1e-12,
                "sim[{i}][{j}] = {} vs oracle {want}",
                sim.sim[i][j]
            );
        }
    }
    let близко = sim.get("Llama-2-7b-chat", "Llama-2-13b-chat").unwrap();
    let далеко = sim.get("Llama-2-7b-chat", "WizardLM-7b").unwrap();
    assert!(
        близко > далеко,
        "expected sim(7b,13b) {близко} > sim(7b,WizardLM-7b) {далеко}"
    );
    pass("criterion 2 (similarity ordering vs cosine oracle)");
}

// Criterion 3: selection equals exhaustive enumeration on 1,000 seeded
// instructions with 2-8 candidates, for all three strategies, in under 5 s.
#[test]
fn c3_strategy_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let profiles: Vec<AbilityProfile> = (0..12)
        .map(|i| {
            let vector: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
            AbilityProfile {
                model: format!("model-{i:02}"),
                mb_sup: vector.iter().sum::<f64>() / vector.len() as f64,
                vector,
                imputed: vec![],
                note: None,
            }
        })
        .collect();
    let sim = similarity_matrix(&profiles).unwrap();
    let names: Vec<&str> = profiles.iter().map(|p| p.model.as_str()).collect();

    let started = Instant::now();
    let mut agreements = 0u32;
    for _ in 0..1000 {
        let mut pick = names.clone();
        pick.shuffle(&mut rng);
        let k = rng.random_range(2..=8usize);
        let cands = &pick[..k];
        let set = CandidateSet {
            instruction_id: "q".into(),
            candidates: cands
                .iter()
                .map(|m| ModelResponse {
                    model: m.to_string(),
                    text: String::new(),
                })
                .collect(),
        };
        for strategy in [Strategy::Sup, Strategy::Sim, Strategy::SupSim] {
            let cfg = StrategyConfig {
                strategy,
                ..StrategyConfig::default()
            };
            let got = select_pair(&set, &profiles, &sim, &cfg).unwrap();
            let want = oracles::select_oracle(cands, &profiles, &sim, &cfg);
            assert_eq!(got, want, "strategy {strategy} disagreed on {cands:?}");
            agreements += 1;
        }
    }
    let elapsed = started.elapsed();
    assert_eq!(agreements, 3000);
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "oracle sweep took {elapsed:?}, budget is 5 s"
    );
    pass("criterion 3 (strategy selection = exhaustive enumeration, 3000/3000, < 5 s)");
}

// Criteria 4 and 5: an independent validator pass over CLI-emitted JSONL
// finds zero gate or anchoring violations, and re-running the exact
// invocation yields byte-identical output.
#[test]
fn c4_c5_soundness_and_determinism_of_emitted_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let profiles_path = dir.path().join("profiles.json");
    let pool_path = dir.path().join("pool.jsonl");
    let table = table_path();

    let output = zebra(&[
        "profile",
        "--benchmarks",
        table.to_str().unwrap(),
        "--out",
        profiles_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());

    let (profiles, _) = table5_profiles();
    let names: Vec<&str> = profiles.iter().map(|p| p.model.as_str()).collect();
    write_synthetic_pool(&pool_path, &names, 800, 45);

    let tau = 0.1_f64;
    for strategy in ["sup", "sim", "sup-sim"] {
        let run = |suffix: &str| -> PathBuf {
            let out = dir.path().join(format!("pairs-{strategy}-{suffix}.jsonl"));
            let report = dir.path().join(format!("report-{strategy}-{suffix}.json"));
            let output = zebra(&[
                "binarize",
                "--pool",
                pool_path.to_str().unwrap(),
                "--profiles",
                profiles_path.to_str().unwrap(),
                "--strategy",
                strategy,
                "--tau",
                "0.1",
                "--out",
                out.to_str().unwrap(),
                "--report",
                report.to_str().unwrap(),
            ]);
            assert!(output.status.success(), "{strategy}: {output:?}");
            out
        };
        let first = run("a");
        let second = run("b");

        // Criterion 5: byte-identical reruns.
        let bytes_a = std::fs::read(&first).unwrap();
        let bytes_b = std::fs::read(&second).unwrap();
        assert_eq!(
            sha256_hex(&bytes_a),
            sha256_hex(&bytes_b),
            "{strategy}: reruns differ"
        );

        // Criterion 4: independent validator over the raw JSONL.
        let mut violations = 0usize;
        let mut lines = 0usize;
        for line in String::from_utf8(bytes_a).unwrap().lines() {
            lines += 1;
            let row: serde_json::Value = serde_json::from_str(line).unwrap();
            let chosen_sup = row["chosen"]["mb_sup"].as_f64().unwrap();
            let rejected_sup = row["rejected"]["mb_sup"].as_f64().unwrap();
            if chosen_sup < rejected_sup {
                violations += 1;
            }
            if row["chosen"]["model"] == row["rejected"]["model"] {
                violations += 1;
            }
            if strategy != "sup" && row["mb_sim"].as_f64().unwrap() < tau {
                violations += 1;
            }
        }
        assert!(lines > 0, "{strategy}: no pairs emitted");
        assert_eq!(violations, 0, "{strategy}: {violations} violations");
    }
    pass("criterion 4 (0 gate/anchoring violations in emitted JSONL)");
    pass("criterion 5 (byte-identical binarize reruns)");
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

// Criterion 6: t-test p-values match direct numerical integration to 1e-6 on
// ten synthetic samples; sampled permutation p stays within three binomial
// standard errors of the exhaustive value for n <= 12.
#[test]
fn c6_statistics_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);

    // Sanity-check the quadrature oracle itself against the df = 2 closed
    // form before trusting it.
    for t in [0.4, 1.3, 3.7] {
        let closed = 1.0 - t / (2.0f64 + t * t).sqrt();
        let quad = oracles::t_two_sided_p_quadrature(t, 2);
        assert!(
            (closed - quad).abs() < 1e-9,
            "oracle self-check: {quad} vs {closed}"
        );
    }

    for case in 0..10 {
        let n = rng.random_range(5..=25usize);
        let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|x| x + rng.random_range(-0.2..0.25))
            .collect();
        let sample = PairedSample::new(ids, a, b).unwrap();
        let result = paired_t_test(&sample).unwrap();
        let want = oracles::t_two_sided_p_quadrature(result.t_stat, n - 1);
        assert!(
            (result.p_t - want).abs() <= 1e-6,
            "case {case}: p_t {} vs quadrature {want}",
            result.p_t
        );
    }

    for (seed, n) in [(1u64, 5usize), (2, 8), (3, 10), (4, 12)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed * 31);
        let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|x| x + rng.random_range(-0.3..0.35))
            .collect();
        let sample = PairedSample::new(ids, a.clone(), b.clone()).unwrap();
        let exact = oracles::permutation_exact(&sample.diffs());
        let shuffles = 10_000u64;
        let sampled = permutation_test(&sample, shuffles, seed).unwrap();
        let se = (exact * (1.0 - exact) / shuffles as f64).sqrt();
        let slack = 3.0 * se + 2.0 / (shuffles + 1) as f64;
        assert!(
            (sampled - exact).abs() <= slack,
            "n={n}: sampled {sampled} vs exact {exact} (slack {slack})"
        );
    }
    pass("criterion 6 (t-test vs quadrature to 1e-6; permutation vs exhaustive within 3 SE)");
}

// Criterion 7: on a constructed pool, the max-MB-SIM pair's mean TF-IDF
// response similarity strictly exceeds the min-MB-SIM pair's.
#[test]
fn c7_tfidf_comparative_direction() {
    let mk = |model: &str, vector: &[f64]| AbilityProfile {
        model: model.into(),
        vector: vector.to_vec(),
        mb_sup: vector.iter().sum::<f64>() / vector.len() as f64,
        imputed: vec![],
        note: None,
    };
    // High-overlap pair (twin-a, twin-b) with near-identical vectors;
    // low-overlap pair (solo-c, solo-d) with orthogonal vectors.
    let profiles = vec![
        mk("twin-a", &[0.90, 0.80, 0.70]),
        mk("twin-b", &[0.88, 0.79, 0.72]),
        mk("solo-c", &[1.0, 0.0, 0.0]),
        mk("solo-d", &[0.0, 0.0, 1.0]),
    ];
    let sim = similarity_matrix(&profiles).unwrap();

    // Identify the extreme off-diagonal pairs from the matrix itself.
    let mut max_pair = (0, 1, f64::NEG_INFINITY);
    let mut min_pair = (0, 1, f64::INFINITY);
    for i in 0..4 {
        for j in (i + 1)..4 {
            if sim.sim[i][j] > max_pair.2 {
                max_pair = (i, j, sim.sim[i][j]);
            }
            if sim.sim[i][j] < min_pair.2 {
                min_pair = (i, j, sim.sim[i][j]);
            }
        }
    }
    assert_eq!(
        (&profiles[max_pair.0].model[..], &profiles[max_pair.1].model[..]),
        ("twin-a", "twin-b")
    );
    assert_eq!(
        (&profiles[min_pair.0].model[..], &profiles[min_pair.1].model[..]),
        ("solo-c", "solo-d")
    );

    let shared = [
        "gradient", "descent", "matrix", "vector", "theorem", "proof", "integral", "limit",
        "series", "bound",
    ];
    let pool: Vec<zebra_core::Result<InstructionRecord>> = (0..200)
        .map(|i| {
            let twin_a = format!(
                "{} {} {} {} answer {i}",
                shared[i % 10],
                shared[(i + 1) % 10],
                shared[(i + 2) % 10],
                shared[(i + 3) % 10],
            );
            // Mostly the same tokens, one private.
            let twin_b = format!(
                "{} {} {} private{i} answer {i}",
                shared[i % 10],
                shared[(i + 1) % 10],
                shared[(i + 2) % 10],
            );
            let solo_c = format!("carrot{i} cabbage{i} celery{i}");
            let solo_d = format!("dune{i} desert{i} dust{i}");
            Ok(InstructionRecord {
                instruction_id: format!("q{i:03}"),
                instruction: format!("prompt {i}"),
                responses: vec![
                    ModelResponse { model: "twin-a".into(), text: twin_a },
                    ModelResponse { model: "twin-b".into(), text: twin_b },
                    ModelResponse { model: "solo-c".into(), text: solo_c },
                    ModelResponse { model: "solo-d".into(), text: solo_d },
                ],
            })
        })
        .collect();

    let high = tfidf_audit(pool.iter().cloned(), "twin-a", "twin-b").unwrap();
    let low = tfidf_audit(pool.into_iter(), "solo-c", "solo-d").unwrap();
    assert_eq!(high.n_instructions, 200);
    assert!(
        high.mean_pair_similarity > low.mean_pair_similarity,
        "expected {} > {}",
        high.mean_pair_similarity,
        low.mean_pair_similarity
    );
    pass("criterion 7 (max-MB-SIM pair audits more similar than min-MB-SIM pair)");
}

// Criterion 8: the cost command reproduces the published cost rows within
// one dollar and prices the behavior-wise row at zero.
#[test]
fn c8_cost_table_reproduction() {
    let cases = [
        (64_000u64, 0.252, 16_128.0),
        (10_254, 0.063, 646.0),
        (989_000, 0.126, 124_614.0),
    ];
    for (pairs, unit_cost, published) in cases {
        let output = zebra(&[
            "cost",
            "--pairs",
            &pairs.to_string(),
            "--unit-cost",
            &unit_cost.to_string(),
        ]);
        assert!(output.status.success());
        let report: serde_json::Value =
            serde_json::from_slice(&output.stdout).unwrap();
        let rows = report["rows"].as_array().unwrap();
        let total = rows[0]["total"].as_f64().unwrap();
        assert!(
            (total - published).abs() <= 1.0,
            "{pairs} x {unit_cost}: total {total} vs published {published}"
        );
        assert_eq!(rows[1]["label"], "zebra");
        assert_eq!(rows[1]["total"].as_f64().unwrap(), 0.0);
    }
    pass("criterion 8 (published cost rows within ±1 USD; behavior-wise row is 0)");
}

// Criterion 9: dendrogram merges equal the naive O(n^3) linkage oracle on
// the published table, and PCA coordinates match power iteration to 1e-8.
#[test]
fn c9_clustering_and_pca_oracles() {
    let (profiles, _) = table5_profiles();
    let points: Vec<Vec<f64>> = profiles.iter().map(|p| p.vector.clone()).collect();
    let table = BenchmarkTable::from_csv_reader(TABLE5_CSV.as_bytes()).unwrap();

    let dendrogram = cluster(&profiles, &table.benchmarks, None, 0.4, Linkage::Average).unwrap();
    let want = oracles::linkage_oracle(&points, Linkage::Average);
    assert_eq!(dendrogram.merges.len(), want.len());
    for (step, (got, want)) in dendrogram.merges.iter().zip(&want).enumerate() {
        assert_eq!(
            (got.a, got.b, got.size),
            (want.a, want.b, want.size),
            "merge {step} differs"
        );
        assert!(
            (got.distance - want.distance).abs() <= 1e-9,
            "merge {step}: distance {} vs oracle {}",
            got.distance,
            want.distance
        );
    }
    let oracle_flat = oracles::flat_clusters_oracle(points.len(), &want, 0.4);
    for (leaf, model) in profiles.iter().enumerate() {
        assert_eq!(
            dendrogram.clusters[&model.model], oracle_flat[leaf],
            "flat cluster of {} differs",
            model.model
        );
    }

    let projection = pca_project(&profiles).unwrap();
    let oracle = oracles::pca_power_iteration_oracle(&points);
    assert!(
        oracle.residual < 1e-10,
        "power iteration did not converge: residual {}",
        oracle.residual
    );
    for k in 0..2 {
        assert!(
            (projection.explained_variance[k] - oracle.explained_variance[k]).abs() <= 1e-8
        );
    }
    for (i, (got, want)) in projection.coords.iter().zip(&oracle.coords).enumerate() {
        assert!(
            (got[0] - want[0]).abs() <= 1e-8 && (got[1] - want[1]).abs() <= 1e-8,
            "model {i}: coords {got:?} vs oracle {want:?}"
        );
    }
    pass("criterion 9 (linkage merges exact vs naive oracle; PCA coords to 1e-8)");
}

// Supporting check for criterion 4's "any generated dataset" phrasing: the
// report's frequency table equals an independent recount of the output file.
#[test]
fn report_frequencies_recount() {
    let dir = tempfile::tempdir().unwrap();
    let profiles_path = dir.path().join("profiles.json");
    let pool_path = dir.path().join("pool.jsonl");
    let pairs_path = dir.path().join("pairs.jsonl");
    let report_path = dir.path().join("report.json");
    let freq_path = dir.path().join("frequencies.json");
    let table = table_path();

    assert!(zebra(&[
        "profile",
        "--benchmarks",
        table.to_str().unwrap(),
        "--out",
        profiles_path.to_str().unwrap(),
    ])
    .status
    .success());

    let (profiles, _) = table5_profiles();
    let names: Vec<&str> = profiles.iter().map(|p| p.model.as_str()).collect();
    write_synthetic_pool(&pool_path, &names, 300, 77);

    assert!(zebra(&[
        "binarize",
        "--pool",
        pool_path.to_str().unwrap(),
        "--profiles",
        profiles_path.to_str().unwrap(),
        "--strategy",
        "sup",
        "--out",
        pairs_path.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ])
    .status
    .success());

    assert!(zebra(&[
        "analyze",
        "freq",
        "--pairs",
        pairs_path.to_str().unwrap(),
        "--out",
        freq_path.to_str().unwrap(),
    ])
    .status
    .success());

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    let freq: BTreeMap<String, serde_json::Value> =
        serde_json::from_slice(&std::fs::read(&freq_path).unwrap()).unwrap();
    let report_freq = report["frequencies"].as_object().unwrap();
    assert_eq!(report_freq.len(), freq.len());
    for (model, counts) in &freq {
        assert_eq!(&report_freq[model], counts, "{model} counts differ");
    }
}
