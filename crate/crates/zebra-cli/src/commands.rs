//! Command implementations: thin wrappers that wire files into the library.

use zebra_core::analysis::{cluster, frequency_report, pca_project, tfidf_audit, Linkage};
use zebra_core::dataset::{write_json, PairReader, PairWriter};
use zebra_core::stats::{compare, cost_report, PairedSample};
use zebra_core::{
    binarize_pool, convert_ultrafeedback as convert_uf, read_pool, BenchmarkTable, Category,
    Error, ProfileSet, Strategy, StrategyConfig, TieBreak,
};

use crate::runinfo::RunInfo;
use crate::{
    BinarizeArgs, CliError, CliResult, ClusterArgs, CompareArgs, ConvertArgs, CostArgs, FreqArgs,
    PcaArgs, ProfileArgs, TfidfArgs,
};

pub fn profile(args: ProfileArgs) -> CliResult {
    let mut table = BenchmarkTable::from_path(&args.benchmarks)?;
    if !args.exclude.is_empty() {
        table.exclude_models(&args.exclude);
        if table.models.is_empty() {
            return Err(Error::Schema("every model was excluded".into()).into());
        }
    }
    let set = ProfileSet::from_table(&table)?;
    write_json(&set, &args.out)?;
    RunInfo::new("profile")
        .arg("benchmarks", args.benchmarks.display().to_string())
        .arg("exclude", &args.exclude)
        .arg("out", args.out.display().to_string())
        .input(&args.benchmarks)?
        .output(&args.out)
        .write_beside(&args.out)?;
    println!(
        "profiled {} models over {} benchmarks -> {}",
        set.models.len(),
        set.benchmarks.len(),
        args.out.display()
    );
    Ok(())
}

pub fn binarize(args: BinarizeArgs) -> CliResult {
    let strategy: Strategy = args.strategy.parse()?;
    let tie_break: TieBreak = args.tie_break.parse()?;
    let cfg = StrategyConfig {
        strategy,
        tau: args.tau,
        lambda: args.lambda,
        tie_break,
        global_top2: args.global_top2,
    };
    cfg.validate()?;

    let set = ProfileSet::load(&args.profiles)?;
    let sim = set.similarity_matrix();
    let pool = read_pool(&args.pool)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.with_file_name("report.json"));

    let mut writer = PairWriter::create(&args.out)?;
    let report = binarize_pool(pool, &set.models, &sim, &cfg, args.strict, |pair| {
        writer.write(pair)
    })?;
    writer.finish()?;
    write_json(&report, &report_path)?;

    RunInfo::new("binarize")
        .arg("pool", args.pool.display().to_string())
        .arg("profiles", args.profiles.display().to_string())
        .arg("strategy", strategy.to_string())
        .arg("tau", args.tau)
        .arg("lambda", args.lambda)
        .arg("tie_break", &cfg.tie_break)
        .arg("global_top2", args.global_top2)
        .arg("strict", args.strict)
        .arg("out", args.out.display().to_string())
        .arg("report", report_path.display().to_string())
        .seed(args.seed)
        .input(&args.pool)?
        .input(&args.profiles)?
        .output(&args.out)
        .output(&report_path)
        .write_beside(&args.out)?;

    println!(
        "emitted {} pairs from {} instructions ({} skipped, {} errors) -> {}",
        report.pairs_emitted,
        report.instructions,
        report.no_pair.total(),
        report.errors.len(),
        args.out.display()
    );
    if report.pairs_emitted == 0 {
        return Err(CliError::empty_result("no pairs were emitted"));
    }
    Ok(())
}

pub fn convert_ultrafeedback(args: ConvertArgs) -> CliResult {
    let file = std::fs::File::open(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let reader = std::io::BufReader::new(file);
    let count = convert_uf(reader, &args.out)?;
    RunInfo::new("convert-ultrafeedback")
        .arg("input", args.input.display().to_string())
        .arg("out", args.out.display().to_string())
        .input(&args.input)?
        .output(&args.out)
        .write_beside(&args.out)?;
    println!("converted {count} rows -> {}", args.out.display());
    if count == 0 {
        return Err(CliError::empty_result("input contained no rows"));
    }
    Ok(())
}

pub fn analyze_pca(args: PcaArgs) -> CliResult {
    let set = ProfileSet::load(&args.profiles)?;
    let projection = pca_project(&set.models)?;
    write_json(&projection, &args.out)?;
    RunInfo::new("analyze-pca")
        .arg("profiles", args.profiles.display().to_string())
        .arg("out", args.out.display().to_string())
        .input(&args.profiles)?
        .output(&args.out)
        .write_beside(&args.out)?;
    println!(
        "projected {} models (explained variance {:.4}, {:.4}) -> {}",
        projection.models.len(),
        projection.explained_variance[0],
        projection.explained_variance[1],
        args.out.display()
    );
    Ok(())
}

pub fn analyze_cluster(args: ClusterArgs) -> CliResult {
    let set = ProfileSet::load(&args.profiles)?;
    let filter: Option<Category> = match &args.category {
        Some(s) => Some(s.parse()?),
        None => None,
    };
    let linkage: Linkage = args.linkage.parse()?;
    let dendrogram = cluster(
        &set.models,
        &set.benchmark_tags(),
        filter,
        args.cut,
        linkage,
    )?;
    write_json(&dendrogram, &args.out)?;
    RunInfo::new("analyze-cluster")
        .arg("profiles", args.profiles.display().to_string())
        .arg("category", &args.category)
        .arg("cut", args.cut)
        .arg("linkage", &linkage)
        .arg("out", args.out.display().to_string())
        .input(&args.profiles)?
        .output(&args.out)
        .write_beside(&args.out)?;
    let n_clusters = dendrogram
        .clusters
        .values()
        .collect::<std::collections::HashSet<_>>()
        .len();
    println!(
        "{} merges, {} clusters at cut {} -> {}",
        dendrogram.merges.len(),
        n_clusters,
        args.cut,
        args.out.display()
    );
    Ok(())
}

pub fn analyze_tfidf(args: TfidfArgs) -> CliResult {
    let pool = read_pool(&args.pool)?;
    let result = tfidf_audit(pool, &args.model_a, &args.model_b)?;
    write_json(&result, &args.out)?;
    RunInfo::new("analyze-tfidf")
        .arg("pool", args.pool.display().to_string())
        .arg("model_a", &args.model_a)
        .arg("model_b", &args.model_b)
        .arg("out", args.out.display().to_string())
        .input(&args.pool)?
        .output(&args.out)
        .write_beside(&args.out)?;
    println!(
        "mean response similarity {:.4} over {} instructions -> {}",
        result.mean_pair_similarity,
        result.n_instructions,
        args.out.display()
    );
    Ok(())
}

pub fn analyze_freq(args: FreqArgs) -> CliResult {
    let reader = PairReader::open(&args.pairs)?;
    let counts = frequency_report(reader)?;
    write_json(&counts, &args.out)?;
    RunInfo::new("analyze-freq")
        .arg("pairs", args.pairs.display().to_string())
        .arg("out", args.out.display().to_string())
        .input(&args.pairs)?
        .output(&args.out)
        .write_beside(&args.out)?;
    let total: u64 = counts.values().map(|c| c.chosen).sum();
    println!(
        "{} models over {} pairs -> {}",
        counts.len(),
        total,
        args.out.display()
    );
    Ok(())
}

pub fn stats_compare(args: CompareArgs) -> CliResult {
    let sample = PairedSample::from_csv_paths(&args.a, &args.b)?;
    let result = compare(&sample, args.permutations, args.seed)?;
    let rendered = serde_json::to_string_pretty(&result).map_err(Error::from)?;
    println!("{rendered}");
    if let Some(out) = &args.out {
        write_json(&result, out)?;
        RunInfo::new("stats-compare")
            .arg("a", args.a.display().to_string())
            .arg("b", args.b.display().to_string())
            .arg("permutations", args.permutations)
            .arg("out", out.display().to_string())
            .seed(args.seed)
            .input(&args.a)?
            .input(&args.b)?
            .output(out)
            .write_beside(out)?;
    }
    Ok(())
}

pub fn cost(args: CostArgs) -> CliResult {
    let report = cost_report(args.pairs, args.unit_cost)?;
    let rendered = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    println!("{rendered}");
    if let Some(out) = &args.out {
        write_json(&report, out)?;
        RunInfo::new("cost")
            .arg("pairs", args.pairs)
            .arg("unit_cost", args.unit_cost)
            .arg("out", out.display().to_string())
            .output(out)
            .write_beside(out)?;
    }
    Ok(())
}
