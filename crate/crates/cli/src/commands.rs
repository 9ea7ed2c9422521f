use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;
use swarmsearch_core::experiment::{analyze_experiment, read_experiment_csv};
use swarmsearch_core::intent::{classify_all, load_lexicon, read_labels, write_labels, IntentLabel, NameLexicon, COMMON_SUFFIXES};
use swarmsearch_core::pheromone::{ExaminationTable, Flavor, PheromoneStore};
use swarmsearch_core::querylog::{
    dedup_consecutive, filter_dataset, partition, read_log_file, read_sessions, restrict_to, sessionize, span_days,
    write_sessions, Session, AOL_HEADER,
};
use swarmsearch_core::sim::{
    gen_synthetic_log, read_outcomes, run_monte_carlo, summarize, synthetic_page, train, write_outcomes, Report,
    RunConfig, SimOutcome, SyntheticConfig, TrainStats,
};
use swarmsearch_service::provider::ingest_corpus;
use swarmsearch_service::{SearchEngine, ServiceConfig};
use tracing::info;

use crate::error::{CliError, Result};
use crate::manifest::{beside, Manifest};
use crate::{Command, LexiconArgs, Subset};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn load_sessions(path: &Path) -> Result<Vec<Session>> {
    Ok(read_sessions(open(path)?)?)
}

fn save_sessions(sessions: &[Session], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_sessions(sessions, &mut w)?;
    finish(w, path)
}

fn exam_table(path: Option<&Path>) -> Result<ExaminationTable> {
    Ok(match path {
        Some(p) => ExaminationTable::load(p)?,
        None => ExaminationTable::bundled(),
    })
}

fn lexicon(args: &LexiconArgs) -> Result<NameLexicon> {
    let lex = load_lexicon(&args.names, args.suffixes.as_deref())?;
    Ok(if args.suffixes.is_some() {
        lex
    } else {
        NameLexicon::new(lex.names().iter(), COMMON_SUFFIXES.iter())
    })
}

fn run_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn config_json(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or_default()
}

/// Applies a dataset subset, returning the kept sessions.
pub fn apply_subset(sessions: &[Session], subset: Subset, span: Option<u32>) -> Result<Vec<Session>> {
    if subset == Subset::All {
        return Ok(sessions.to_vec());
    }
    let span = span.unwrap_or_else(|| span_days(sessions)).max(1);
    let sets = filter_dataset(sessions, span)?;
    let keys = match subset {
        Subset::All => unreachable!(),
        Subset::Union => &sets.union,
        Subset::Frequent => &sets.frequent,
        Subset::Easy => &sets.easy,
        Subset::Difficult => &sets.difficult,
    };
    Ok(restrict_to(sessions, keys))
}

/// Trains on the sessions before `cfg.partition` (unless a store is given)
/// and replays the rest.
pub fn simulate_run(
    sessions: &[Session],
    cfg: &RunConfig,
    table: &ExaminationTable,
    pretrained: Option<PheromoneStore>,
) -> Result<(Vec<SimOutcome>, TrainStats)> {
    let (train_set, test_set) = partition(sessions, cfg.partition);
    let (store, stats) = match pretrained {
        Some(s) => (s, TrainStats::default()),
        None => {
            let store = PheromoneStore::new(cfg.flavor, cfg.decay());
            let stats = train(&store, &train_set, cfg.key_mode, table)?;
            (store, stats)
        }
    };
    let outcomes = run_monte_carlo(&store, &test_set, cfg)?;
    info!(run = %cfg.name(), train = train_set.len(), test = test_set.len(), "run complete");
    Ok((outcomes, stats))
}

fn write_report(report: &Report, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    report.write_tsv(&mut w)?;
    finish(w, path)
}

fn load_labels(path: Option<&Path>) -> Result<HashMap<String, IntentLabel>> {
    match path {
        Some(p) => Ok(read_labels(open(p)?)?),
        None => Ok(HashMap::new()),
    }
}

fn labels_for(sessions: &[Session], lex: &NameLexicon) -> HashMap<String, IntentLabel> {
    classify_all(sessions.iter().map(|s| s.query.as_str()), lex)
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Sessionize { input, out, threshold, dedup } => {
            if threshold < 1 {
                return Err(CliError::Usage("--threshold must be positive".into()));
            }
            let (mut rows, stats) = read_log_file(&input)?;
            if dedup {
                rows = dedup_consecutive(rows);
            }
            let sessions = sessionize(&rows, threshold);
            save_sessions(&sessions, &out)?;
            eprintln!("{} rows read, {} skipped, {} sessions", stats.rows, stats.skipped, sessions.len());
            Manifest::new("sessionize", json!({ "threshold": threshold, "dedup": dedup }), None)
                .write(&beside(&out), &[input], &[out.clone()])
        }
        Command::Filter { input, out, subset, span_days } => {
            let sessions = load_sessions(&input)?;
            let kept = apply_subset(&sessions, subset, span_days)?;
            save_sessions(&kept, &out)?;
            eprintln!("kept {} of {} sessions", kept.len(), sessions.len());
            Manifest::new("filter", json!({ "subset": format!("{subset:?}").to_lowercase(), "span_days": span_days }), None)
                .write(&beside(&out), &[input], &[out.clone()])
        }
        Command::ClassifyIntent { input, queries, lexicon: lex_args, out } => {
            let lex = lexicon(&lex_args)?;
            let (labels, source) = match (input, queries) {
                (Some(i), None) => (labels_for(&load_sessions(&i)?, &lex), i),
                (None, Some(q)) => {
                    let text = std::fs::read_to_string(&q).map_err(|e| CliError::io(&q, e))?;
                    (classify_all(text.lines().filter(|l| !l.trim().is_empty()), &lex), q)
                }
                _ => return Err(CliError::Usage("give exactly one of --in or --queries".into())),
            };
            let mut w = create(&out)?;
            write_labels(&labels, &mut w)?;
            finish(w, &out)?;
            let nav = labels.values().filter(|l| **l == IntentLabel::Navigational).count();
            eprintln!("{} queries: {} navigational, {} non-navigational", labels.len(), nav, labels.len() - nav);
            let mut inputs = vec![source];
            inputs.extend(lex_args.names.iter().cloned());
            inputs.extend(lex_args.suffixes.iter().cloned());
            Manifest::new("classify-intent", json!({ "suffixes_builtin": lex_args.suffixes.is_none() }), None)
                .write(&beside(&out), &inputs, &[out.clone()])
        }
        Command::Train { input, config, out, exam_table: table_path, all } => {
            let cfg = run_config(Some(&config), None)?;
            let sessions = load_sessions(&input)?;
            let train_set = if all {
                let mut s = sessions;
                s.sort_by_key(|s| s.start_time);
                s
            } else {
                partition(&sessions, cfg.partition).0
            };
            let table = exam_table(table_path.as_deref())?;
            let store = PheromoneStore::new(cfg.flavor, cfg.decay());
            let stats = train(&store, &train_set, cfg.key_mode, &table)?;
            let mut w = create(&out)?;
            store.save_snapshot(&mut w)?;
            finish(w, &out)?;
            eprintln!("{} sessions, {} deposits, {} trails", stats.sessions, stats.deposits, store.len());
            let mut inputs = vec![input, config];
            inputs.extend(table_path);
            Manifest::new("train", json!({ "run": config_json(&cfg), "all": all }), Some(cfg.seed))
                .write(&beside(&out), &inputs, &[out.clone()])
        }
        Command::Simulate { input, config, matrix, store, seed, labels, exam_table: table_path, out_dir } => {
            let sessions = load_sessions(&input)?;
            let table = exam_table(table_path.as_deref())?;
            let label_map = load_labels(labels.as_deref())?;
            let runs = if matrix {
                RunConfig::preset_matrix(seed.unwrap_or(0))
            } else {
                vec![run_config(config.as_deref(), seed)?]
            };
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
            let mut outputs = Vec::new();
            for cfg in &runs {
                let pretrained = match &store {
                    Some(p) => Some(PheromoneStore::load_snapshot(cfg.flavor, cfg.decay(), open(p)?)?),
                    None => None,
                };
                let (outcomes, _) = simulate_run(&sessions, cfg, &table, pretrained)?;
                let outcomes_path = out_dir.join(format!("{}.outcomes.jsonl", cfg.name()));
                let mut w = create(&outcomes_path)?;
                write_outcomes(&outcomes, &mut w)?;
                finish(w, &outcomes_path)?;
                let report_path = out_dir.join(format!("{}.report.tsv", cfg.name()));
                match summarize(&[(cfg.flavor, outcomes)], &label_map, &cfg.cutoffs) {
                    Ok(report) => write_report(&report, &report_path)?,
                    Err(swarmsearch_core::Error::NoData(msg)) => {
                        let mut w = create(&report_path)?;
                        writeln!(w, "{}\n# {msg}", Report::TSV_HEADER).map_err(|e| CliError::io(&report_path, e))?;
                        finish(w, &report_path)?;
                    }
                    Err(e) => return Err(e.into()),
                }
                outputs.push(outcomes_path);
                outputs.push(report_path);
            }
            eprintln!("{} runs written to {}", runs.len(), out_dir.display());
            let mut inputs = vec![input];
            inputs.extend(config);
            inputs.extend(store);
            inputs.extend(labels);
            inputs.extend(table_path);
            let cfgs: Vec<serde_json::Value> = runs.iter().map(config_json).collect();
            Manifest::new("simulate", json!({ "runs": cfgs }), runs.first().map(|r| r.seed))
                .write(&out_dir.join("simulate.manifest.json"), &inputs, &outputs)
        }
        Command::Report { runs, labels, cutoffs, out } => {
            let label_map = load_labels(labels.as_deref())?;
            let mut loaded = Vec::new();
            for (flavor, path) in &runs {
                loaded.push((*flavor, read_outcomes(open(path)?)?));
            }
            let report = summarize(&loaded, &label_map, &cutoffs)?;
            write_report(&report, &out)?;
            print!("{report}");
            let mut inputs: Vec<PathBuf> = runs.iter().map(|(_, p)| p.clone()).collect();
            inputs.extend(labels);
            let names: Vec<&str> = runs.iter().map(|(f, _)| f.as_str()).collect();
            Manifest::new("report", json!({ "flavors": names, "cutoffs": cutoffs }), None)
                .write(&beside(&out), &inputs, &[out.clone()])
        }
        Command::Synth { users, relevant_rank, page_size, seed, exam_table: table_path, query, out } => {
            let table = exam_table(table_path.as_deref())?;
            let mut cfg = SyntheticConfig::new(users, synthetic_page(page_size), relevant_rank, table, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            cfg.query = query;
            let rows = gen_synthetic_log(&cfg)?;
            let mut w = create(&out)?;
            let io = |e| CliError::io(&out, e);
            writeln!(w, "{AOL_HEADER}").map_err(io)?;
            for r in &rows {
                writeln!(w, "{}", r.to_log_line()).map_err(io)?;
            }
            finish(w, &out)?;
            eprintln!("{} rows from {} users", rows.len(), users);
            let config = json!({
                "users": users, "relevant_rank": relevant_rank, "page_size": page_size, "query": cfg.query,
            });
            let inputs: Vec<PathBuf> = table_path.into_iter().collect();
            Manifest::new("synth", config, Some(seed)).write(&beside(&out), &inputs, &[out.clone()])
        }
        Command::Pipeline { log, config, subset, lexicon: lex_args, exam_table: table_path, seed, out_dir } => {
            let base = run_config(config.as_deref(), seed)?;
            let outputs = pipeline(&log, &base, subset, &lex_args, table_path.as_deref(), &out_dir)?;
            let mut inputs = vec![log];
            inputs.extend(config);
            inputs.extend(lex_args.names.iter().cloned());
            inputs.extend(lex_args.suffixes.iter().cloned());
            inputs.extend(table_path);
            let conf = json!({ "run": config_json(&base), "subset": format!("{subset:?}").to_lowercase() });
            Manifest::new("pipeline", conf, Some(base.seed)).write(&out_dir.join("manifest.json"), &inputs, &outputs)
        }
        Command::Serve { config, bind } => {
            let mut cfg = ServiceConfig::load(config.as_deref())?;
            if let Some(b) = bind {
                cfg.bind = b;
            }
            serve(cfg)
        }
        Command::Analyze { input, out } => {
            let records = read_experiment_csv(open(&input)?)?;
            let report = analyze_experiment(&records)?;
            match &out {
                Some(path) => {
                    let mut w = create(path)?;
                    report.write_tsv(&mut w)?;
                    finish(w, path)?;
                    Manifest::new("analyze", json!({}), None).write(&beside(path), &[input], &[path.clone()])?;
                }
                None => print!("{report}"),
            }
            Ok(())
        }
        Command::Ingest { dir } => {
            let (_, stats) = ingest_corpus(&dir)?;
            println!("{} files, {} documents, {} skipped", stats.files, stats.docs, stats.skipped);
            Ok(())
        }
    }
}

/// The whole offline evaluation in one go. Returns the files written.
pub fn pipeline(
    log: &Path,
    base: &RunConfig,
    subset: Subset,
    lex_args: &LexiconArgs,
    table_path: Option<&Path>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let (rows, _) = read_log_file(log)?;
    let all = sessionize(&rows, swarmsearch_core::querylog::DEFAULT_THRESHOLD);
    let sessions = apply_subset(&all, subset, None)?;
    let sessions_path = out_dir.join("sessions.jsonl");
    save_sessions(&sessions, &sessions_path)?;

    let lex = lexicon(lex_args)?;
    let labels = labels_for(&sessions, &lex);
    let labels_path = out_dir.join("labels.tsv");
    let mut w = create(&labels_path)?;
    write_labels(&labels, &mut w)?;
    finish(w, &labels_path)?;

    let table = exam_table(table_path)?;
    let mut runs = Vec::new();
    let mut outputs = vec![sessions_path, labels_path];
    for flavor in Flavor::ALL {
        let cfg = RunConfig { flavor, ..base.clone() };
        let (outcomes, _) = simulate_run(&sessions, &cfg, &table, None)?;
        let path = out_dir.join(format!("{}.outcomes.jsonl", cfg.name()));
        let mut w = create(&path)?;
        write_outcomes(&outcomes, &mut w)?;
        finish(w, &path)?;
        outputs.push(path);
        runs.push((flavor, outcomes));
    }
    let report = summarize(&runs, &labels, &base.cutoffs)?;
    let report_path = out_dir.join("report.tsv");
    write_report(&report, &report_path)?;
    print!("{report}");
    outputs.push(report_path);
    Ok(outputs)
}

fn serve(cfg: ServiceConfig) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Data(e.to_string()))?;
    runtime.block_on(async move {
        let bind = cfg.bind.clone();
        let engine = Arc::new(SearchEngine::from_config(cfg)?);
        let listener = tokio::net::TcpListener::bind(&bind).await.map_err(|e| CliError::Data(format!("{bind}: {e}")))?;
        eprintln!("listening on http://{}", listener.local_addr().map_err(|e| CliError::Data(e.to_string()))?);
        swarmsearch_service::http::serve(engine, listener, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| CliError::Data(e.to_string()))
    })
}
