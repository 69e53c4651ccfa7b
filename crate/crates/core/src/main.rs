use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lexcomp::assoc::{compute_association_measures, make_contingency, AssocScores};
use lexcomp::corpus_stats::{count_frequencies, read_corpus, tokenize, FrequencyModel};
use lexcomp::features::{
    assemble_matrix, dataset_task, load_dataset, FeatureConfig, FeatureGroup, FeatureMatrix,
    FeatureSchema, Resources, TargetInstance,
};
use lexcomp::gbdt::{GbdtModel, GbdtParams, Trainer};
use lexcomp::harness::{ablate, repetition_report, run_cv_matrix, AblationConfig, CvOptions};
use lexcomp::lexicon::Manifest;

#[derive(Parser)]
#[command(
    name = "lexcomp",
    version,
    about = "Lexical complexity prediction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count unigrams and bigrams of a one-sentence-per-line corpus.
    Count {
        #[arg(long)]
        input: PathBuf,
        /// Output prefix for .unigrams.tsv, .bigrams.tsv and .meta.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Score word pairs with the eight association measures.
    Assoc {
        #[arg(long)]
        counts: PathBuf,
        /// TSV with header and columns word1, word2
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the feature matrix of a dataset.
    Featurize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model on a labeled dataset.
    Train {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Predict with a saved model. `--data` is a feature matrix TSV unless
    /// `--schema` is given, in which case it is a dataset TSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-fold cross-validation.
    Cv {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        folds: FoldArgs,
        /// Also report r over pooled out-of-fold predictions
        #[arg(long)]
        pooled: bool,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feature-group ablation.
    Ablate {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        folds: FoldArgs,
        /// Groups to remove one at a time (length, corpus, norms, norm,
        /// psychometric, freq, assoc)
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "length,corpus,norms,freq,assoc"
        )]
        groups: Vec<String>,
        /// Groups to use alone, one configuration each
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Labeled held-out dataset for a test-set column
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descriptive dataset reports.
    Report {
        #[arg(long)]
        data: PathBuf,
        /// Target repetition table and gold-score ranges of repeated targets
        #[arg(long)]
        repeats: bool,
        /// Feature config, used for its score interval
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    data: PathBuf,
    /// Resource manifest; defaults to the one named in the feature config
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Feature config JSON (enabled groups, manifest, score interval)
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Booster parameters JSON; unspecified fields keep their defaults
    #[arg(long)]
    params: Option<PathBuf>,
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct FoldArgs {
    #[arg(long, default_value_t = 9)]
    folds: usize,
    /// Fold shuffling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deal folds within each source corpus
    #[arg(long)]
    stratify: bool,
    /// Keep all occurrences of a target in one fold
    #[arg(long)]
    group_by_target: bool,
}

impl FoldArgs {
    fn options(&self, pooled: bool) -> CvOptions {
        CvOptions {
            k: self.folds,
            seed: self.seed,
            stratify_by_corpus: self.stratify,
            group_by_target: self.group_by_target,
            pooled,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}

/// Joins the error chain, skipping causes already spelled out by their parent.
fn one_line(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let s = cause.to_string();
        if !msg.contains(&s) {
            msg.push_str(": ");
            msg.push_str(&s);
        }
    }
    msg.replace('\n', " ")
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut out = output(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn load_params(path: Option<&Path>) -> Result<GbdtParams> {
    let params = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("bad params in {}", p.display()))?
        }
        None => GbdtParams::default(),
    };
    params.validate()?;
    Ok(params)
}

struct Loaded {
    config: FeatureConfig,
    resources: Resources,
}

fn load_resources(manifest: Option<&Path>, schema: Option<&Path>) -> Result<Loaded> {
    let config = match schema {
        Some(p) => FeatureConfig::load(p)?,
        None => FeatureConfig::default(),
    };
    let manifest_path = manifest
        .map(Path::to_path_buf)
        .or_else(|| config.manifest.clone());
    let resources = match manifest_path {
        Some(p) => Resources::from_manifest(&Manifest::load(&p)?)?,
        None => Resources::default(),
    };
    Ok(Loaded { config, resources })
}

fn load_matrix(
    data: &Path,
    loaded: &Loaded,
) -> Result<(Vec<TargetInstance>, FeatureSchema, FeatureMatrix)> {
    let instances = load_dataset(data, loaded.config.score_interval)?;
    let task = dataset_task(&instances)?;
    let schema = FeatureSchema::build(task, &loaded.resources, &loaded.config.groups);
    let matrix = assemble_matrix(&instances, &loaded.resources, &schema)?;
    Ok((instances, schema, matrix))
}

fn require_gold(m: &FeatureMatrix, what: &str) -> Result<()> {
    if m.targets.is_none() {
        bail!("{what} needs a complexity score on every row");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Count { input, out } => {
            let sentences = read_corpus(&input)?;
            let model = count_frequencies(&sentences);
            model.dump(&out)?;
            eprintln!(
                "{} sentences, {} tokens, {} types",
                model.sentences(),
                model.total_unigrams(),
                model.unigram_counts().len()
            );
        }

        Command::Assoc { counts, pairs, out } => {
            let model = FrequencyModel::load(&counts)?;
            let file =
                File::open(&pairs).with_context(|| format!("cannot read {}", pairs.display()))?;
            let mut w = output(out.as_deref())?;
            writeln!(
                w,
                "word1\tword2\tf1\tf2\tf12\t{}",
                AssocScores::NAMES.join("\t")
            )?;
            for (i, line) in BufReader::new(file).lines().enumerate().skip(1) {
                let line = line?;
                let mut fields = line.split('\t');
                let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
                    bail!("{}:{}: expected word1<TAB>word2", pairs.display(), i + 1);
                };
                let norm = |s: &str| {
                    tokenize(s)
                        .first()
                        .map(|t| t.as_str().to_string())
                        .unwrap_or_default()
                };
                let (a, b) = (norm(a), norm(b));
                let (f1, f2, f12) = (model.unigram(&a), model.unigram(&b), model.bigram(&a, &b));
                let scores = make_contingency(f1, f2, f12, model.total_bigrams())
                    .map(|t| compute_association_measures(&t))
                    .unwrap_or_default();
                let cells: Vec<String> = scores
                    .values()
                    .iter()
                    .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                    .collect();
                writeln!(w, "{a}\t{b}\t{f1}\t{f2}\t{f12}\t{}", cells.join("\t"))?;
            }
            w.flush()?;
        }

        Command::Featurize { inputs, out } => {
            let loaded = load_resources(inputs.manifest.as_deref(), inputs.schema.as_deref())?;
            let (_, _, matrix) = load_matrix(&inputs.data, &loaded)?;
            let mut w = output(out.as_deref())?;
            matrix.write_tsv(&mut w)?;
            w.flush()?;
        }

        Command::Train {
            inputs,
            model,
            model_out,
        } => {
            let loaded = load_resources(inputs.manifest.as_deref(), inputs.schema.as_deref())?;
            let (_, _, matrix) = load_matrix(&inputs.data, &loaded)?;
            require_gold(&matrix, "training")?;
            let params = load_params(model.params.as_deref())?;
            let trained = Trainer::new(params).workers(model.workers).fit(&matrix)?;
            trained.save(&model_out)?;
        }

        Command::Predict {
            model,
            data,
            manifest,
            schema,
            out,
        } => {
            let model = GbdtModel::load(&model)?;
            let mut w = output(out.as_deref())?;
            if schema.is_some() || manifest.is_some() {
                let loaded = load_resources(manifest.as_deref(), schema.as_deref())?;
                let (instances, _, matrix) = load_matrix(&data, &loaded)?;
                let pred = model.predict(&matrix)?;
                writeln!(w, "id\tprediction")?;
                for (inst, p) in instances.iter().zip(pred) {
                    writeln!(w, "{}\t{p}", inst.id)?;
                }
            } else {
                let file =
                    File::open(&data).with_context(|| format!("cannot read {}", data.display()))?;
                let matrix = FeatureMatrix::read_tsv(file)?;
                writeln!(w, "prediction")?;
                for p in model.predict(&matrix)? {
                    writeln!(w, "{p}")?;
                }
            }
            w.flush()?;
        }

        Command::Cv {
            inputs,
            model,
            folds,
            pooled,
            json,
            out,
        } => {
            let loaded = load_resources(inputs.manifest.as_deref(), inputs.schema.as_deref())?;
            let (instances, _, matrix) = load_matrix(&inputs.data, &loaded)?;
            require_gold(&matrix, "cross-validation")?;
            let params = load_params(model.params.as_deref())?;
            let assignment = folds.options(pooled).folds_for(&instances)?;
            let report = in_pool(model.workers, || {
                run_cv_matrix(&matrix, &assignment, &params, pooled)
            })??;
            let text = if json {
                serde_json::to_string_pretty(&report)? + "\n"
            } else {
                report.to_tsv()
            };
            write_text(out.as_deref(), &text)?;
        }

        Command::Ablate {
            inputs,
            model,
            folds,
            groups,
            only,
            test,
            json,
            out,
        } => {
            let loaded = load_resources(inputs.manifest.as_deref(), inputs.schema.as_deref())?;
            let (instances, schema, matrix) = load_matrix(&inputs.data, &loaded)?;
            require_gold(&matrix, "ablation")?;
            let params = load_params(model.params.as_deref())?;
            let mut configs = Vec::new();
            for g in groups.iter().filter(|g| !g.trim().is_empty()) {
                configs.push(AblationConfig::without(
                    g.trim(),
                    FeatureGroup::parse_alias(g)?,
                ));
            }
            for g in only.iter().filter(|g| !g.trim().is_empty()) {
                configs.push(AblationConfig::only(
                    format!("only-{}", g.trim()),
                    FeatureGroup::parse_alias(g)?,
                ));
            }
            let test_matrix = match &test {
                Some(p) => {
                    let rows = load_dataset(p, loaded.config.score_interval)?;
                    let m = assemble_matrix(&rows, &loaded.resources, &schema)?;
                    require_gold(&m, "the test set")?;
                    Some(m)
                }
                None => None,
            };
            let assignment = folds.options(false).folds_for(&instances)?;
            let report = in_pool(model.workers, || {
                ablate(
                    &matrix,
                    &assignment,
                    &params,
                    &configs,
                    test_matrix.as_ref(),
                )
            })??;
            let text = if json {
                serde_json::to_string_pretty(&report)? + "\n"
            } else {
                report.to_tsv()
            };
            write_text(out.as_deref(), &text)?;
        }

        Command::Report {
            data,
            repeats: _,
            schema,
            json,
            out,
        } => {
            let config = match &schema {
                Some(p) => FeatureConfig::load(p)?,
                None => FeatureConfig::default(),
            };
            let instances = load_dataset(&data, config.score_interval)?;
            let report = repetition_report(&instances)?;
            let text = if json {
                serde_json::to_string_pretty(&report)? + "\n"
            } else {
                report.to_tsv()
            };
            write_text(out.as_deref(), &text)?;
        }
    }
    Ok(())
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    Ok(pool.install(f))
}
