//! Command-line front end: corpus synthesis, sketching, pairwise
//! estimates, the estimator-error sweep, retrieval scoring, and the
//! statistical property suite.
//!
//! Every subcommand that writes a file is deterministic under fixed
//! flags: rerunning produces byte-identical output. The one exception is
//! the wall-clock column in the report CSVs, which `--no-timing` pins to
//! zero for golden-file comparisons. Progress and warnings go to stderr;
//! stdout carries only requested results.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use wjs::io::{
    corpus_digest, parse_sparse_file, read_fingerprints, write_fingerprints, write_sparse_file,
    FingerprintFile, FingerprintRecord, ParsedCorpus,
};
use wjs::props::run_default_checks;
use wjs::retrieval::{exact_topk, map_at_k, precision_at_k, topk, RetrievalResult};
use wjs::similarity::{estimate_similarity, generalized_jaccard, mse_experiment};
use wjs::sketch::{sketch, Algorithm, SparseWeightedSet};
use wjs::synth::{generate_corpus, SynthConfig, WeightLaw};
use wjs::variates::VariateScheme;

#[derive(Parser)]
#[command(
    name = "wjs",
    version,
    about = "Weighted-set fingerprints: generate, sketch, compare, benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sparse corpus
    Gen(GenArgs),
    /// Fingerprint every document of a corpus into one binary file
    Sketch(SketchArgs),
    /// Print exact similarity vs fingerprint estimate for one doc pair
    Estimate(EstimateArgs),
    /// Sweep fingerprint lengths and report estimator MSE and bias
    BenchMse(BenchMseArgs),
    /// Rank a database per query and score Precision@K / MAP@K
    Retrieve(RetrieveArgs),
    /// Run the statistical property suite (nonzero exit on any FAIL)
    Props(PropsArgs),
}

const ALL_ALGORITHMS: [&str; 8] = [
    "minhash",
    "wmh",
    "haeupler",
    "gollapudi",
    "icws",
    "li2015",
    "ccws",
    "i2cws",
];

#[derive(Args)]
struct GenArgs {
    /// Number of documents
    #[arg(long)]
    docs: usize,
    /// Size of the feature space
    #[arg(long)]
    features: u64,
    /// Fraction of the feature space present in each document
    #[arg(long, default_value_t = 0.05)]
    density: f64,
    /// Weight law: "uniform" or "pareto"
    #[arg(long, default_value = "uniform")]
    law: String,
    /// Uniform law: lower weight bound (exclusive)
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    /// Uniform law: upper weight bound (inclusive)
    #[arg(long, default_value_t = 1.0)]
    hi: f64,
    /// Pareto law: tail exponent
    #[arg(long, default_value_t = 3.0)]
    exponent: f64,
    /// Pareto law: scale (minimum weight)
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Corpus file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SketchArgs {
    /// Sparse corpus file to fingerprint
    #[arg(long)]
    corpus: PathBuf,
    /// One of: minhash, wmh, haeupler, gollapudi, icws, li2015, ccws, i2cws
    #[arg(long)]
    algo: String,
    /// Fingerprint length (samples per document)
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Quantization scale for wmh/haeupler
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    /// Activation bound for gollapudi (default: corpus max weight)
    #[arg(long)]
    w_max: Option<f64>,
    /// Fingerprint file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Corpus both documents live in
    #[arg(long)]
    corpus: PathBuf,
    /// Fingerprint file covering --doc-a (and --doc-b unless --fingerprints-b is given)
    #[arg(long)]
    fingerprints: PathBuf,
    /// Optional second fingerprint file covering --doc-b
    #[arg(long)]
    fingerprints_b: Option<PathBuf>,
    #[arg(long)]
    doc_a: u64,
    #[arg(long)]
    doc_b: u64,
}

#[derive(Args)]
struct BenchMseArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// "all" or a comma-separated subset of the algorithm names
    #[arg(long, default_value = "all")]
    algos: String,
    /// Comma-separated fingerprint lengths
    #[arg(long, default_value = "32,64,128,256,512")]
    d_list: String,
    /// Document pairs scored per algorithm
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    /// Independent fingerprint trials per pair
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Quantization scale for wmh/haeupler
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    /// Activation bound for gollapudi (default: corpus max weight)
    #[arg(long)]
    w_max: Option<f64>,
    /// Write zeros to the wall_ms column (golden-file mode)
    #[arg(long)]
    no_timing: bool,
    /// CSV report to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RetrieveArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// "all" or a comma-separated subset of the algorithm names
    #[arg(long, default_value = "all")]
    algos: String,
    /// Comma-separated fingerprint lengths
    #[arg(long, default_value = "512")]
    d_list: String,
    /// The first N corpus documents are the queries; the rest are the database
    #[arg(long, default_value_t = 20)]
    queries: usize,
    /// Comma-separated evaluation depths
    #[arg(long, default_value = "1,5,10")]
    k_list: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Quantization scale for wmh/haeupler
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    /// Activation bound for gollapudi (default: corpus max weight)
    #[arg(long)]
    w_max: Option<f64>,
    /// Write zeros to the wall_ms column (golden-file mode)
    #[arg(long)]
    no_timing: bool,
    /// CSV report to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PropsArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => run_gen(args)?,
        Command::Sketch(args) => run_sketch(args)?,
        Command::Estimate(args) => run_estimate(args)?,
        Command::BenchMse(args) => run_bench_mse(args)?,
        Command::Retrieve(args) => run_retrieve(args)?,
        Command::Props(args) => return run_props(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_gen(args: GenArgs) -> Result<()> {
    let (law, law_note) = match args.law.as_str() {
        "uniform" => (
            WeightLaw::Uniform {
                lo: args.lo,
                hi: args.hi,
            },
            format!("law=uniform lo={} hi={}", args.lo, args.hi),
        ),
        "pareto" => (
            WeightLaw::PowerLaw {
                exponent: args.exponent,
                scale: args.scale,
            },
            format!("law=pareto exponent={} scale={}", args.exponent, args.scale),
        ),
        other => bail!("unknown weight law {other:?} (expected \"uniform\" or \"pareto\")"),
    };
    let config = SynthConfig {
        doc_count: args.docs,
        feature_count: args.features,
        density: args.density,
        law,
        gen_seed: args.seed,
    };
    let docs = generate_corpus(&config)?;
    let comment = format!(
        "gen docs={} features={} density={} {} seed={}",
        args.docs, args.features, args.density, law_note, args.seed
    );
    write_sparse_file(&args.out, &docs, &[comment])
        .with_context(|| format!("writing corpus {}", args.out.display()))?;
    eprintln!("wrote {} documents to {}", docs.len(), args.out.display());
    Ok(())
}

fn run_sketch(args: SketchArgs) -> Result<()> {
    let docs = load_corpus(&args.corpus)?;
    let algorithm = algorithm_by_name(&args.algo, args.scale, args.w_max, &docs)?;
    let scheme = VariateScheme::new(args.seed, args.d)?;
    let mut records = Vec::with_capacity(docs.len());
    for doc in &docs {
        let fp = sketch(doc, &scheme, algorithm)?;
        records.push(FingerprintRecord {
            doc_id: doc.doc_id(),
            codes: fp.codes().to_vec(),
        });
    }
    let file = FingerprintFile {
        algorithm,
        d: args.d,
        seed: args.seed,
        corpus_digest: corpus_digest(&docs),
        records,
    };
    write_fingerprints(&args.out, &file)?;
    eprintln!(
        "wrote {} fingerprints ({} x D={}) to {}",
        file.records.len(),
        algorithm.name(),
        args.d,
        args.out.display()
    );
    Ok(())
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    let docs = load_corpus(&args.corpus)?;
    let digest = corpus_digest(&docs);
    let file_a = read_checked_fingerprints(&args.fingerprints, digest)?;
    let file_b = match &args.fingerprints_b {
        Some(path) => read_checked_fingerprints(path, digest)?,
        None => file_a.clone(),
    };
    let doc_a = doc_by_id(&docs, args.doc_a)?;
    let doc_b = doc_by_id(&docs, args.doc_b)?;
    let rec_a = file_a
        .find(args.doc_a)
        .with_context(|| format!("doc {} not in {}", args.doc_a, args.fingerprints.display()))?;
    let rec_b = file_b.find(args.doc_b).with_context(|| {
        format!(
            "doc {} not in {}",
            args.doc_b,
            args.fingerprints_b
                .as_deref()
                .unwrap_or(&args.fingerprints)
                .display()
        )
    })?;
    let exact = generalized_jaccard(doc_a, doc_b)?;
    let estimate = estimate_similarity(&file_a.fingerprint(rec_a), &file_b.fingerprint(rec_b))?;
    println!("exact {exact}");
    println!("estimate {estimate}");
    Ok(())
}

fn run_bench_mse(args: BenchMseArgs) -> Result<()> {
    let docs = load_corpus(&args.corpus)?;
    let algorithms = resolve_algorithms(&args.algos, args.scale, args.w_max, &docs)?;
    let d_list = parse_list::<u32>(&args.d_list, "--d-list")?;
    let mut out = report_writer(&args.out)?;
    writeln!(
        out,
        "# bench-mse algos={} d-list={} pairs={} trials={} seed={} scale={} \
         corpus-digest={:016x} no-timing={}",
        args.algos,
        args.d_list,
        args.pairs,
        args.trials,
        args.seed,
        args.scale,
        corpus_digest(&docs),
        args.no_timing
    )?;
    writeln!(
        out,
        "# wall_ms spans the algorithm's whole sweep; fingerprints are shared across D"
    )?;
    writeln!(out, "algorithm,D,pairs,trials,mse,bias,wall_ms")?;
    for &algorithm in &algorithms {
        let start = Instant::now();
        let rows = mse_experiment(&docs, algorithm, &d_list, args.pairs, args.trials, args.seed)?;
        let wall_ms = if args.no_timing {
            0
        } else {
            start.elapsed().as_millis() as u64
        };
        for row in rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.algorithm.name(),
                row.d,
                row.pairs,
                row.trials,
                row.mse,
                row.bias,
                wall_ms
            )?;
        }
    }
    out.flush()?;
    eprintln!("wrote estimator report to {}", args.out.display());
    Ok(())
}

fn run_retrieve(args: RetrieveArgs) -> Result<()> {
    let docs = load_corpus(&args.corpus)?;
    if args.queries == 0 {
        bail!("--queries must be at least 1");
    }
    if args.queries >= docs.len() {
        bail!(
            "--queries {} leaves no database documents (corpus holds {})",
            args.queries,
            docs.len()
        );
    }
    let algorithms = resolve_algorithms(&args.algos, args.scale, args.w_max, &docs)?;
    let d_list = parse_list::<u32>(&args.d_list, "--d-list")?;
    let k_list = parse_list::<usize>(&args.k_list, "--k-list")?;
    if k_list.contains(&0) {
        bail!("--k-list depths must be at least 1");
    }
    let &k_max = k_list.iter().max().expect("parse_list rejects empty lists");

    let (queries, db) = docs.split_at(args.queries);
    if k_max > db.len() {
        eprintln!(
            "warning: K={} exceeds the {}-document database; rankings are truncated",
            k_max,
            db.len()
        );
    }
    // Ground truth: exact-similarity rankings, shared by all algorithms.
    let mut exact_rankings = Vec::with_capacity(queries.len());
    for query in queries {
        exact_rankings.push(exact_topk(query, db, k_max)?.ranked_ids);
    }

    let mut out = report_writer(&args.out)?;
    writeln!(
        out,
        "# retrieve algos={} d-list={} queries={} k-list={} seed={} scale={} \
         corpus-digest={:016x} no-timing={}",
        args.algos,
        args.d_list,
        args.queries,
        args.k_list,
        args.seed,
        args.scale,
        corpus_digest(&docs),
        args.no_timing
    )?;
    writeln!(out, "algorithm,D,K,precision,map,wall_ms")?;
    for &algorithm in &algorithms {
        for &d in &d_list {
            let start = Instant::now();
            let scheme = VariateScheme::new(args.seed, d)?;
            let db_fps: Vec<(u64, wjs::sketch::Fingerprint)> = db
                .iter()
                .map(|doc| Ok((doc.doc_id(), sketch(doc, &scheme, algorithm)?)))
                .collect::<Result<_>>()?;
            let mut rankings: Vec<RetrievalResult> = Vec::with_capacity(queries.len());
            for query in queries {
                let fp = sketch(query, &scheme, algorithm)?;
                rankings.push(topk(query.doc_id(), &fp, &db_fps, k_max)?);
            }
            let wall_ms = if args.no_timing {
                0
            } else {
                start.elapsed().as_millis() as u64
            };
            for &k in &k_list {
                let truths: Vec<Vec<u64>> = exact_rankings
                    .iter()
                    .map(|ranking| ranking[..k.min(ranking.len())].to_vec())
                    .collect();
                let precision = rankings
                    .iter()
                    .zip(&truths)
                    .map(|(r, t)| precision_at_k(r, t, k))
                    .sum::<f64>()
                    / rankings.len() as f64;
                let map = map_at_k(&rankings, &truths, k);
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    algorithm.name(),
                    d,
                    k,
                    precision,
                    map,
                    wall_ms
                )?;
            }
        }
    }
    out.flush()?;
    eprintln!("wrote retrieval report to {}", args.out.display());
    Ok(())
}

fn run_props(args: PropsArgs) -> Result<ExitCode> {
    let outcomes = run_default_checks(args.seed);
    let mut failed = 0usize;
    for outcome in &outcomes {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {} — {}", outcome.name, outcome.detail);
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", outcomes.len(), failed);
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// Parse a corpus, report featureless lines on stderr, and reject an
/// entirely empty corpus.
fn load_corpus(path: &Path) -> Result<Vec<SparseWeightedSet>> {
    let parsed =
        parse_sparse_file(path).with_context(|| format!("reading corpus {}", path.display()))?;
    warn_skipped(&parsed, path);
    if parsed.docs.is_empty() {
        bail!("corpus {} holds no documents", path.display());
    }
    Ok(parsed.docs)
}

fn warn_skipped(parsed: &ParsedCorpus, path: &Path) {
    if parsed.skipped_lines.is_empty() {
        return;
    }
    let shown: Vec<String> = parsed
        .skipped_lines
        .iter()
        .take(8)
        .map(|l| l.to_string())
        .collect();
    let more = parsed.skipped_lines.len().saturating_sub(shown.len());
    let suffix = if more > 0 {
        format!(" (+{more} more)")
    } else {
        String::new()
    };
    eprintln!(
        "warning: {}: skipped {} featureless line(s): {}{}",
        path.display(),
        parsed.skipped_lines.len(),
        shown.join(", "),
        suffix
    );
}

fn read_checked_fingerprints(path: &Path, digest: u64) -> Result<FingerprintFile> {
    let file = read_fingerprints(path)
        .with_context(|| format!("reading fingerprints {}", path.display()))?;
    if file.corpus_digest != digest {
        bail!(
            "{} was built from a different corpus (digest {:016x}, corpus {:016x})",
            path.display(),
            file.corpus_digest,
            digest
        );
    }
    Ok(file)
}

fn doc_by_id(docs: &[SparseWeightedSet], id: u64) -> Result<&SparseWeightedSet> {
    docs.iter()
        .find(|d| d.doc_id() == id)
        .with_context(|| format!("doc {id} not in corpus (ids run 0..{})", docs.len()))
}

fn resolve_algorithms(
    selector: &str,
    scale: f64,
    w_max: Option<f64>,
    docs: &[SparseWeightedSet],
) -> Result<Vec<Algorithm>> {
    let names: Vec<&str> = if selector == "all" {
        ALL_ALGORITHMS.to_vec()
    } else {
        selector.split(',').map(str::trim).collect()
    };
    names
        .into_iter()
        .map(|name| algorithm_by_name(name, scale, w_max, docs))
        .collect()
}

fn algorithm_by_name(
    name: &str,
    scale: f64,
    w_max: Option<f64>,
    docs: &[SparseWeightedSet],
) -> Result<Algorithm> {
    Ok(match name {
        "minhash" => Algorithm::MinHash,
        "wmh" => Algorithm::Wmh { scale },
        "haeupler" => Algorithm::Haeupler { scale },
        "gollapudi" => {
            let bound = match w_max {
                Some(v) => v,
                None => {
                    let v = corpus_max_weight(docs)?;
                    eprintln!("note: gollapudi --w-max defaulted to corpus max weight {v}");
                    v
                }
            };
            Algorithm::Gollapudi { w_max: bound }
        }
        "icws" => Algorithm::Icws,
        "li2015" => Algorithm::Li2015,
        "ccws" => Algorithm::Ccws,
        "i2cws" => Algorithm::I2cws,
        other => bail!(
            "unknown algorithm {other:?} (expected one of: {})",
            ALL_ALGORITHMS.join(", ")
        ),
    })
}

fn corpus_max_weight(docs: &[SparseWeightedSet]) -> Result<f64> {
    docs.iter()
        .filter_map(|d| d.max_weight())
        .reduce(f64::max)
        .context("corpus has no weights to bound")
}

fn parse_list<T: std::str::FromStr>(raw: &str, flag: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let items: Result<Vec<T>> = raw
        .split(',')
        .map(|token| {
            token
                .trim()
                .parse::<T>()
                .with_context(|| format!("{flag}: bad entry {token:?}"))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        bail!("{flag} must not be empty");
    }
    Ok(items)
}

fn report_writer(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating report {}", path.display()))?;
    Ok(std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<SparseWeightedSet> {
        vec![
            SparseWeightedSet::new(0, [(1, 0.5), (4, 2.5)]).unwrap(),
            SparseWeightedSet::new(1, [(2, 7.25)]).unwrap(),
        ]
    }

    #[test]
    fn parse_list_trims_and_converts() {
        let ds = parse_list::<u32>(" 32, 64 ,128", "--d-list").unwrap();
        assert_eq!(ds, vec![32, 64, 128]);
    }

    #[test]
    fn parse_list_names_the_flag_on_bad_tokens() {
        let err = parse_list::<u32>("32,x", "--d-list").unwrap_err();
        assert!(format!("{err:#}").contains("--d-list: bad entry \"x\""));
    }

    #[test]
    fn all_algorithms_resolve_in_cli_order() {
        let algos = resolve_algorithms("all", 10.0, Some(3.0), &corpus()).unwrap();
        let names: Vec<&str> = algos.iter().map(|a| a.name()).collect();
        assert_eq!(names, ALL_ALGORITHMS);
    }

    #[test]
    fn parameters_reach_their_algorithms() {
        let algos = resolve_algorithms("wmh,gollapudi", 4.0, None, &corpus()).unwrap();
        assert_eq!(algos[0], Algorithm::Wmh { scale: 4.0 });
        // --w-max falls back to the corpus maximum
        assert_eq!(algos[1], Algorithm::Gollapudi { w_max: 7.25 });
    }

    #[test]
    fn unknown_algorithms_are_rejected_with_the_menu() {
        let err = resolve_algorithms("simhash", 10.0, None, &corpus()).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("simhash") && msg.contains("i2cws"));
    }

    #[test]
    fn doc_lookup_reports_the_id_range() {
        let docs = corpus();
        assert_eq!(doc_by_id(&docs, 1).unwrap().doc_id(), 1);
        let err = doc_by_id(&docs, 9).unwrap_err();
        assert!(format!("{err:#}").contains("ids run 0..2"));
    }
}
