//! The `persuaide` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 resource or format error,
//! 3 parser adapter error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::adapter::{ParserAdapter, ParserAdapterConfig};
use crate::config::{DirectionPolicy, PipelineConfig};
use crate::conllu::parse_conllu;
use crate::matrix::RelationCounts;
use crate::pipeline::{ErrorKind, Pipeline, PipelineError, TransformInput, TransformTrace};
use crate::retrieval::index_quotes;
use crate::substitution::{matching_score, relations_containing, Role};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_ADAPTER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "persuaide", version, about = "Rewrite product descriptions into persuasive variants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count head/dependent lemma pairs over CoNLL-U files.
    BuildMatrix {
        /// CoNLL-U files, or directories searched for `*.conllu`.
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse a quote corpus (one expression per line) into an index directory.
    IndexQuotes {
        #[arg(long)]
        quotes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Parser adapter as JSON, e.g. '{"kind":"command","command":["my-parser"]}'.
        #[arg(long)]
        parser: String,
        /// Maximum concurrent parser calls.
        #[arg(long, default_value_t = 4, value_parser = positive)]
        concurrency: usize,
    },
    /// Transform one sentence and print its trace.
    Transform {
        #[command(flatten)]
        opts: RunOptions,
        #[arg(long, conflicts_with = "conllu", required_unless_present = "conllu")]
        text: Option<String>,
        /// Pre-parsed input; the first sentence is used.
        #[arg(long)]
        conllu: Option<PathBuf>,
        /// Print the full JSON trace instead of a summary.
        #[arg(long)]
        json: bool,
        #[arg(long, value_parser = positive)]
        top_k: Option<usize>,
        #[arg(long)]
        min_similarity: Option<f64>,
    },
    /// Transform every line of a file, writing one JSON trace per line.
    Batch {
        #[command(flatten)]
        opts: RunOptions,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the matching-score breakdown for one word and candidate.
    Score {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        conllu: PathBuf,
        /// 1-based token index of the word to replace.
        #[arg(long)]
        word: usize,
        #[arg(long)]
        candidate: String,
    },
}

#[derive(Debug, Args)]
struct RunOptions {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_sentiment: bool,
    #[arg(long, value_parser = parse_direction)]
    direction: Option<DirectionPolicy>,
    /// Leave stage timings out of the output.
    #[arg(long)]
    no_timings: bool,
    #[arg(long)]
    matrix: Option<PathBuf>,
}

fn parse_direction(s: &str) -> Result<DirectionPolicy, String> {
    s.parse()
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn resource(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_RESOURCE,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match e.kind {
            ErrorKind::Adapter => EXIT_ADAPTER,
            ErrorKind::Resource => EXIT_RESOURCE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the CLI with `argv` (including the program name), writing results
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            let code = match e.kind() {
                K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return if matches!(e.kind(), K::DisplayHelpOnMissingArgumentOrSubcommand) {
                EXIT_USAGE
            } else {
                code
            };
        }
    };
    match run(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::BuildMatrix { corpus, out: path } => build_matrix(&corpus, &path, out),
        Command::IndexQuotes {
            quotes,
            out: dir,
            parser,
            concurrency,
        } => {
            let cfg: ParserAdapterConfig = serde_json::from_str(&parser).map_err(|e| Failure {
                code: EXIT_USAGE,
                message: format!("--parser: {e}"),
            })?;
            let adapter = ParserAdapter::new(&cfg).map_err(|e| Failure {
                code: EXIT_ADAPTER,
                message: e.to_string(),
            })?;
            let text = std::fs::read_to_string(&quotes)
                .map_err(|e| Failure::resource(format!("{}: {e}", quotes.display())))?;
            let lines: Vec<&str> = text.lines().collect();
            let index = index_quotes(&lines, &adapter, concurrency).map_err(|e| match e {
                crate::retrieval::RetrievalError::Adapter { .. } => Failure {
                    code: EXIT_ADAPTER,
                    message: e.to_string(),
                },
                other => Failure::resource(other.to_string()),
            })?;
            index.save(&dir).map_err(|e| Failure::resource(e.to_string()))?;
            let _ = writeln!(out, "indexed {} quotes into {}", index.len(), dir.display());
            Ok(())
        }
        Command::Transform {
            opts,
            text,
            conllu,
            json,
            top_k,
            min_similarity,
        } => {
            let mut cfg = load_config(&opts)?;
            if let Some(k) = top_k {
                cfg.similarity.k = k;
            }
            if let Some(m) = min_similarity {
                cfg.min_similarity = m;
            }
            let input = match (text, conllu) {
                (Some(t), _) => TransformInput::Text(t),
                (None, Some(path)) => TransformInput::Parsed(read_first_sentence(&path)?),
                (None, None) => unreachable!("clap requires --text or --conllu"),
            };
            let pipeline = make_pipeline(cfg, opts.no_timings)?;
            let trace = pipeline.transform(input)?;
            if json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&trace).expect("trace serializes"));
            } else {
                print_summary(&trace, out);
            }
            Ok(())
        }
        Command::Batch { opts, input, out: path } => {
            let cfg = load_config(&opts)?;
            let pipeline = make_pipeline(cfg, opts.no_timings)?;
            let n = pipeline.run_batch_file(&input, &path)?;
            let _ = writeln!(out, "wrote {n} records to {}", path.display());
            Ok(())
        }
        Command::Score {
            matrix,
            conllu,
            word,
            candidate,
        } => {
            let m = RelationCounts::load_from_path(&matrix)
                .map_err(|e| Failure::resource(format!("{}: {e}", matrix.display())))?;
            let s = read_first_sentence(&conllu)?;
            let Some(token) = s.token(word) else {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: format!("--word {word} is outside the sentence (1..={})", s.len()),
                });
            };
            let ctx = relations_containing(&s, word);
            let score = matching_score(&m, &ctx, &candidate.to_lowercase());
            let _ = writeln!(out, "word {word} `{}` -> candidate `{candidate}`", token.surface);
            for (r, c) in ctx.relations.iter().zip(&score.contributions) {
                let role = match r.role {
                    Role::ChildOf => "child_of",
                    Role::ParentOf => "parent_of",
                };
                let _ = writeln!(
                    out,
                    "  {role} {:<14} f({}, {}) = {:<8} ln(f+1) = {:.6}",
                    r.other_lemma,
                    c.a,
                    c.b,
                    c.f,
                    (c.f as f64 + 1.0).ln()
                );
            }
            let _ = writeln!(out, "relations: {}", ctx.relations.len());
            let _ = writeln!(out, "score: {}", score.value);
            Ok(())
        }
    }
}

fn load_config(opts: &RunOptions) -> Result<PipelineConfig, Failure> {
    let mut cfg = PipelineConfig::load(&opts.config).map_err(|e| Failure::resource(e.to_string()))?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if opts.no_sentiment {
        cfg.sentiment = false;
    }
    if let Some(d) = opts.direction {
        cfg.direction_policy = d;
    }
    if let Some(m) = &opts.matrix {
        cfg.matrix_path = m.clone();
    }
    Ok(cfg)
}

fn make_pipeline(cfg: PipelineConfig, no_timings: bool) -> Result<Pipeline, Failure> {
    let pipeline = Pipeline::load(cfg)?;
    Ok(if no_timings {
        pipeline.without_timings()
    } else {
        pipeline
    })
}

fn read_first_sentence(path: &Path) -> Result<crate::conllu::ParsedSentence, Failure> {
    let f = std::fs::File::open(path).map_err(|e| Failure::resource(format!("{}: {e}", path.display())))?;
    parse_conllu(std::io::BufReader::new(f))
        .map_err(|e| Failure::resource(format!("{}: {e}", path.display())))?
        .into_iter()
        .next()
        .ok_or_else(|| Failure::resource(format!("{}: no sentence", path.display())))
}

fn collect_corpus(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .map_err(|e| Failure::resource(format!("{}: {e}", input.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "conllu"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn build_matrix(corpus: &[PathBuf], path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    use rayon::prelude::*;

    let files = collect_corpus(corpus)?;
    let parts: Vec<Result<RelationCounts, Failure>> = files
        .par_iter()
        .map(|file| {
            let f = std::fs::File::open(file).map_err(|e| Failure::resource(format!("{}: {e}", file.display())))?;
            let sentences = parse_conllu(std::io::BufReader::new(f))
                .map_err(|e| Failure::resource(format!("{}: {e}", file.display())))?;
            Ok(RelationCounts::build_parallel(&sentences))
        })
        .collect();
    let mut m = RelationCounts::new();
    for part in parts {
        m.merge_from(&part?);
    }
    m.save_to_path(path)
        .map_err(|e| Failure::resource(format!("{}: {e}", path.display())))?;
    let st = m.stats();
    let _ = writeln!(
        out,
        "{} sentences, {} lemmas, {} pairs, {} edges -> {}",
        st.sentences,
        st.vocab,
        st.relation_pairs,
        st.total_edges,
        path.display()
    );
    Ok(())
}

fn print_summary(trace: &TransformTrace, out: &mut dyn Write) {
    let quote = trace.matched_quotes.first().map(|q| q.text.as_str()).unwrap_or("-");
    let _ = writeln!(out, "Description:         {}", trace.input_text);
    let _ = writeln!(out, "Matching expression: {quote}");
    let _ = writeln!(out, "Transformed:         {}", trace.substituted_text);
    let _ = writeln!(out, "With sentiment:      {}", trace.final_text);
    if let Some(p) = &trace.chosen_pair {
        let _ = writeln!(out, "Chosen:              {} -> {} (score {:.6})", p.w.lemma, p.k, p.score);
    }
}
