//! Command-line front end: validate inputs, run the analysis, or generate
//! and cross-check a synthetic dataset.
//!
//! Exit codes: 0 success, 1 data error (bad records, empty analysis, failed
//! cross-check), 2 usage or configuration error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collabrank_core::{
    analyze, attribute_explicit, attribute_heuristic, coverage_csv, default_doc_allowlist,
    default_star_thresholds, export, format_pct, generate, oracle_recount, parse_corpus,
    parse_threshold, profiles_csv, ratio_pct, skew_report, stars, table_file_name, valid_country,
    AnalysisConfig, AnalysisOutput, AttributionSet, CollabProfile, Corpus, Format, GenConfig,
    Generated, Roster, StaffScope, Window,
};
use num::rational::Ratio;

#[derive(Parser)]
#[command(
    name = "collabrank",
    version,
    about = "Collaboration-rate analysis over publication corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check inputs and report every rejected record.
    Validate(InputArgs),
    /// Run the analysis and write the summary tables.
    Analyze(AnalyzeArgs),
    /// Generate a seeded synthetic dataset, analyze it, and cross-check the
    /// result against an independent brute-force recount.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Publication records, one JSON object per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Roster records, one JSON object per line.
    #[arg(long)]
    roster: PathBuf,
    /// Explicit attribution pairs; without this, bylines are matched
    /// heuristically.
    #[arg(long)]
    attributions: Option<PathBuf>,
    /// Publication year window, e.g. 2006-2010.
    #[arg(long)]
    window: String,
    /// Home country for the domestic/international split.
    #[arg(long, default_value = "IT")]
    home_country: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Minimum productive share an SDS needs to enter the analysis.
    #[arg(long, default_value = "0.5")]
    sds_threshold: String,
    /// Comma-separated retained document types.
    #[arg(long)]
    doc_types: Option<String>,
    /// Comma-separated significance thresholds, strictly decreasing.
    #[arg(long)]
    stars: Option<String>,
    /// Table format: csv or md.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads for classification; output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Generator configuration (TOML).
    #[arg(long)]
    gen_config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the generator configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Table format: csv or md.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads for classification; output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

enum CliError {
    /// Wrong invocation or configuration: exit 2.
    Usage(String),
    /// Inputs that parse as a request but fail on content: exit 1.
    Data(String),
}

type CliResult<T> = Result<T, CliError>;

fn usage<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Usage(format!("{context}: {e}"))
}

fn data<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn open(path: &Path) -> CliResult<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))
}

struct Inputs {
    corpus: Corpus,
    roster: Roster,
    attributions: AttributionSet,
    /// Human-readable description of where attributions came from.
    source: String,
    heuristic: bool,
    hard_errors: Vec<String>,
    duplicate_pairs: usize,
}

fn load_inputs(args: &InputArgs) -> CliResult<Inputs> {
    let window: Window =
        args.window.parse().map_err(usage("--window"))?;
    if !valid_country(&args.home_country) {
        return Err(CliError::Usage(format!(
            "--home-country must be two uppercase letters, got {:?}",
            args.home_country
        )));
    }

    let (corpus, corpus_issues) =
        parse_corpus(open(&args.corpus)?, window, &args.home_country).map_err(data("corpus"))?;
    let (roster, roster_issues) = load_roster_file(&args.roster)?;

    let mut hard_errors: Vec<String> = Vec::new();
    for issue in &corpus_issues {
        hard_errors.push(format!("{}: {issue}", args.corpus.display()));
    }
    for issue in &roster_issues {
        hard_errors.push(format!("{}: {issue}", args.roster.display()));
    }

    let mut duplicate_pairs = 0;
    let (attributions, source, heuristic) = match &args.attributions {
        Some(path) => {
            let (set, issues) =
                attribute_explicit(&corpus, &roster, open(path)?).map_err(data("attributions"))?;
            for issue in &issues {
                if issue.error.is_warning() {
                    duplicate_pairs += 1;
                } else {
                    hard_errors.push(format!("{}: {issue}", path.display()));
                }
            }
            let source = format!("explicit ({} pairs)", set.len());
            (set, source, false)
        }
        None => {
            let (set, report) = attribute_heuristic(&corpus, &roster);
            (
                set,
                format!(
                    "heuristic ({} links, {} ambiguous bylines dropped)",
                    report.linked, report.ambiguous
                ),
                true,
            )
        }
    };

    Ok(Inputs { corpus, roster, attributions, source, heuristic, hard_errors, duplicate_pairs })
}

fn load_roster_file(path: &Path) -> CliResult<(Roster, Vec<collabrank_core::RosterIssue>)> {
    collabrank_core::load_roster(open(path)?).map_err(data("roster"))
}

/// Heuristic-link counts vary with inputs; surface them so a run without an
/// attribution file is clearly marked in both stderr and the summary.
fn heuristic_banner(inputs: &Inputs) -> Option<String> {
    inputs
        .heuristic
        .then(|| format!("no attribution file given; byline matching used: {}", inputs.source))
}

fn cmd_validate(args: InputArgs) -> CliResult<()> {
    let inputs = load_inputs(&args)?;
    println!("publications accepted: {}", inputs.corpus.len());
    println!("academics accepted: {}", inputs.roster.len());
    println!("attribution source: {}", inputs.source);
    if inputs.duplicate_pairs > 0 {
        println!("duplicate attribution pairs ignored: {}", inputs.duplicate_pairs);
    }
    println!("rejected records: {}", inputs.hard_errors.len());
    for line in &inputs.hard_errors {
        println!("  {line}");
    }
    if inputs.hard_errors.is_empty() {
        println!("validation: PASS");
        Ok(())
    } else {
        println!("validation: FAIL");
        Err(CliError::Data(format!("{} rejected records", inputs.hard_errors.len())))
    }
}

fn parse_doc_types(raw: &Option<String>) -> CliResult<BTreeSet<String>> {
    match raw {
        None => Ok(default_doc_allowlist()),
        Some(text) => {
            let set: BTreeSet<String> = text
                .split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            if set.is_empty() {
                return Err(CliError::Usage("--doc-types needs at least one type".into()));
            }
            Ok(set)
        }
    }
}

fn parse_stars(raw: &Option<String>) -> CliResult<Vec<f64>> {
    let thresholds = match raw {
        None => default_star_thresholds(),
        Some(text) => text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(usage("--stars"))?,
    };
    // Surface bad threshold lists as configuration errors up front.
    stars(0.5, &thresholds).map_err(usage("--stars"))?;
    Ok(thresholds)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_analysis(
    dir: &Path,
    output: &AnalysisOutput,
    format: Format,
    banner: Option<&str>,
    summary_lines: &[String],
) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    write_file(dir, &table_file_name(1, "staff", format), &export(&output.staff, format))?;
    for (i, table) in output.tables.iter().enumerate() {
        let name = table_file_name(2 + i, table.form.label(), format);
        write_file(dir, &name, &export(table, format))?;
    }
    write_file(dir, "profiles.csv", &profiles_csv(&output.profiles))?;
    write_file(dir, "coverage.csv", &coverage_csv(&output.coverage))?;

    let mut summary = String::new();
    if let Some(banner) = banner {
        let _ = writeln!(summary, "WARNING: {banner}");
    }
    for line in summary_lines {
        let _ = writeln!(summary, "{line}");
    }
    write_file(dir, "run_summary.txt", &summary)
}

fn analysis_summary(inputs: &Inputs, output: &AnalysisOutput) -> Vec<String> {
    vec![
        format!("window: {}", inputs.corpus.window()),
        format!("home country: {}", inputs.corpus.home_country()),
        format!(
            "publications: {} analyzed, {} excluded by document type",
            inputs.corpus.len() - output.dropped_publications,
            output.dropped_publications
        ),
        format!("academics: {}", inputs.roster.len()),
        format!("attribution source: {}", inputs.source),
        format!("included SDS: {} of {}", output.included_sds.len(), output.coverage.len()),
        format!("productive academics profiled: {}", output.profiles.len()),
    ]
}

fn run_analysis(
    inputs: &Inputs,
    threshold_text: &str,
    doc_types: &Option<String>,
    stars_text: &Option<String>,
    workers: Option<usize>,
) -> CliResult<AnalysisOutput> {
    let config = AnalysisConfig {
        sds_threshold: parse_threshold(threshold_text).map_err(usage("--sds-threshold"))?,
        doc_allowlist: parse_doc_types(doc_types)?,
        star_thresholds: parse_stars(stars_text)?,
        staff_scope: StaffScope::PostFilter,
        workers,
    };
    analyze(&inputs.corpus, &inputs.roster, &inputs.attributions, &config)
        .map_err(|e| CliError::Data(e.to_string()))
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult<()> {
    let format: Format = args.format.parse().map_err(usage("--format"))?;
    let inputs = load_inputs(&args.input)?;
    if !inputs.hard_errors.is_empty() {
        let mut message = format!("{} rejected records:\n", inputs.hard_errors.len());
        for line in &inputs.hard_errors {
            let _ = writeln!(message, "  {line}");
        }
        return Err(CliError::Data(message));
    }
    let banner = heuristic_banner(&inputs);
    if let Some(banner) = &banner {
        eprintln!("WARNING: {banner}");
    }
    let output =
        run_analysis(&inputs, &args.sds_threshold, &args.doc_types, &args.stars, args.workers)?;
    let summary = analysis_summary(&inputs, &output);
    write_analysis(&args.out, &output, format, banner.as_deref(), &summary)
}

fn ground_truth_csv(generated: &Generated) -> String {
    let mut out = String::from("academic,p,cp,cip,cedp,cefp\n");
    for (academic, counts) in &generated.truth.realized {
        let _ = writeln!(
            out,
            "{academic},{},{},{},{},{}",
            counts.p, counts.cp, counts.cip, counts.cedp, counts.cefp
        );
    }
    out
}

fn targets_csv(generated: &Generated) -> String {
    let mut out = String::from("uda,rank,c,ci,ced,cef\n");
    for ((uda, rank), [c, ci, ced, cef]) in &generated.truth.targets {
        let _ = writeln!(out, "{uda},{},{c},{ci},{ced},{cef}", rank.label());
    }
    out
}

/// Compares the analysis profiles against the independent recount, and the
/// recount against the generator's realized counts. Any disagreement is a
/// data error.
fn cross_check(generated: &Generated, output: &AnalysisOutput) -> Result<(), String> {
    let oracle = oracle_recount(
        &generated.roster,
        &generated.corpus,
        &generated.attributions,
        generated.corpus.home_country(),
        &default_doc_allowlist(),
    );
    let mut profiles: Vec<(String, [u64; 5])> = output
        .profiles
        .iter()
        .map(|(a, p)| (a.academic_id.clone(), [p.p, p.cp, p.cip, p.cedp, p.cefp]))
        .collect();
    if std::env::var("COLLABRANK_TAMPER_PROFILES").as_deref() == Ok("1") {
        // Test hook: corrupt the comparison copy to prove the cross-check
        // would catch a wrong pipeline.
        if let Some((_, counts)) = profiles.first_mut() {
            counts[1] += 1;
        }
    }
    for (academic_id, counts) in &profiles {
        let recount = oracle[academic_id];
        if *counts != [recount.p, recount.cp, recount.cip, recount.cedp, recount.cefp] {
            return Err(format!("recount disagrees with pipeline for {academic_id}"));
        }
    }
    for (academic_id, realized) in &generated.truth.realized {
        let recount = oracle[academic_id];
        if (recount.p, recount.cp, recount.cip, recount.cedp, recount.cefp)
            != (realized.p, realized.cp, realized.cip, realized.cedp, realized.cefp)
        {
            return Err(format!("recount disagrees with ground truth for {academic_id}"));
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let format: Format = args.format.parse().map_err(usage("--format"))?;
    let text = fs::read_to_string(&args.gen_config)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", args.gen_config.display())))?;
    let mut config = GenConfig::parse_toml(&text).map_err(usage("--gen-config"))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate().map_err(usage("--gen-config"))?;
    let generated = generate(&config).map_err(data("generate"))?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    let mut corpus_bytes = Vec::new();
    generated.corpus.write_jsonl(&mut corpus_bytes).map_err(data("corpus.jsonl"))?;
    fs::write(args.out.join("corpus.jsonl"), corpus_bytes).map_err(data("corpus.jsonl"))?;
    let mut roster_bytes = Vec::new();
    generated.roster.write_jsonl(&mut roster_bytes).map_err(data("roster.jsonl"))?;
    fs::write(args.out.join("roster.jsonl"), roster_bytes).map_err(data("roster.jsonl"))?;
    let mut pair_bytes = Vec::new();
    generated.attributions.write_jsonl(&mut pair_bytes).map_err(data("attributions.jsonl"))?;
    fs::write(args.out.join("attributions.jsonl"), pair_bytes).map_err(data("attributions.jsonl"))?;
    write_file(&args.out, "ground_truth.csv", &ground_truth_csv(&generated))?;
    write_file(&args.out, "targets.csv", &targets_csv(&generated))?;

    let analysis_config = AnalysisConfig { workers: args.workers, ..Default::default() };
    let output = analyze(
        &generated.corpus,
        &generated.roster,
        &generated.attributions,
        &analysis_config,
    )
    .map_err(data("analysis"))?;

    let check = cross_check(&generated, &output);
    let check_line = match &check {
        Ok(()) => format!(
            "oracle cross-check: agreement on {} profiled academics and {} realized tallies",
            output.profiles.len(),
            generated.truth.realized.len()
        ),
        Err(e) => format!("oracle cross-check: FAILED ({e})"),
    };

    let mut summary_lines = vec![
        format!("seed: {}", config.seed),
        format!("academics: {}", generated.roster.len()),
        format!("publications: {}", generated.corpus.len()),
        format!("attribution pairs: {}", generated.attributions.len()),
        format!("bare-collaboration clamps: {}", generated.truth.clamped_bare),
        format!("coauthor byline fallbacks: {}", generated.truth.coauthor_fallbacks),
        check_line.clone(),
    ];

    let profile_refs: Vec<&CollabProfile> = output.profiles.iter().map(|(_, p)| p).collect();
    match skew_report(&profile_refs) {
        Ok(report) => {
            let mut skew = String::from("academics_pct,output_pct\n");
            for (people, share) in &report.curve {
                let _ = writeln!(skew, "{},{}", ratio_pct(*people), ratio_pct(*share));
            }
            write_file(&args.out, "skew.csv", &skew)?;

            let mut gaps = String::from("form,aggregate_pct,mean_pct,gap_pct\n");
            for (form, aggregate, mean, gap) in &report.gaps {
                let _ = writeln!(
                    gaps,
                    "{},{},{},{}",
                    form.label(),
                    format_pct(aggregate),
                    format_pct(mean),
                    format_pct(gap)
                );
            }
            write_file(&args.out, "estimator_gap.csv", &gaps)?;

            let top = report.top_share(Ratio::new(23, 100));
            summary_lines.push(format!("top-23% output share: {}%", ratio_pct(top)));
        }
        Err(e) => summary_lines.push(format!("skew report skipped: {e}")),
    }

    let summary = analysis_summary_for_simulate(&generated, &output);
    summary_lines.extend(summary);
    write_analysis(&args.out.join("analysis"), &output, format, None, &summary_lines)?;

    check.map_err(CliError::Data)
}

fn analysis_summary_for_simulate(generated: &Generated, output: &AnalysisOutput) -> Vec<String> {
    vec![
        format!("window: {}", generated.corpus.window()),
        format!("home country: {}", generated.corpus.home_country()),
        format!(
            "publications: {} analyzed, {} excluded by document type",
            generated.corpus.len() - output.dropped_publications,
            output.dropped_publications
        ),
        format!("included SDS: {} of {}", output.included_sds.len(), output.coverage.len()),
        format!("productive academics profiled: {}", output.profiles.len()),
    ]
}
