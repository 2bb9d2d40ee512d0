//! Command-line front end. Every command reloads the knowledge base from its
//! canonical Turtle file, so runs are independent and reproducible.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::embed::{load_embeddings_file, EmbeddingTable};
use crate::ingest::{ingest_csv, CsvSchema, IngestError};
use crate::model::Taxonomy;
use crate::sim::{self, SimOptions};
use crate::store::{parse_turtle, CrisisFilter, KnowledgeBase};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Failure = 1,
    Rejections = 2,
}

#[derive(Debug, Parser)]
#[command(name = "crisim", version, about = "Crisis knowledge base and similarity ranking")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Word-vector file in whitespace text format.
    #[arg(long, global = true, env = "CRISIM_EMBEDDINGS", value_name = "PATH")]
    embeddings: Option<PathBuf>,
    /// Vector dimension; lets the loader skip a `count dims` header line.
    #[arg(long, global = true, value_name = "N")]
    dims: Option<usize>,
    /// TOML column map for CSV input (defaults to the EM-DAT headers).
    #[arg(long, global = true, value_name = "PATH")]
    columns: Option<PathBuf>,
    /// Min-max scale quantitative values per predicate before comparing.
    #[arg(long, global = true)]
    normalize_quant: bool,
    /// Worker threads for ranking and matrices.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// TOML file providing defaults for the flags above.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a CSV corpus and write the knowledge base as Turtle.
    Ingest {
        csv: PathBuf,
        kb: PathBuf,
        /// Merge into an existing knowledge base file instead of replacing it.
        #[arg(long)]
        append: bool,
    },
    /// Print structure and instance counts.
    Stats { kb: PathBuf },
    /// Write the knowledge base, or selected crises, as canonical Turtle.
    Export {
        kb: PathBuf,
        /// Crisis id to export; repeatable.
        #[arg(long = "id", value_name = "ID")]
        ids: Vec<String>,
        #[command(flatten)]
        filter: FilterArgs,
        /// Output file (default: stdout).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Score two crises against each other.
    Sim { kb: PathBuf, a: String, b: String },
    /// Rank the crises most similar to one crisis.
    Topk {
        kb: PathBuf,
        id: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// All-pairs combined scores as CSV.
    Matrix {
        kb: PathBuf,
        /// Comma-separated crisis ids (default: every crisis matching the filter).
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        ids: Vec<String>,
        #[command(flatten)]
        filter: FilterArgs,
        /// Output file (default: stdout).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Taxonomy class id, e.g. Flood or Hydrological.
    #[arg(long = "type", value_name = "CLASS")]
    type_id: Option<String>,
    #[arg(long)]
    country: Option<String>,
    /// Inclusive start-year range, e.g. 1990..2000 or 1999.
    #[arg(long, value_name = "FROM..TO")]
    years: Option<String>,
}

impl FilterArgs {
    fn is_empty(&self) -> bool {
        self.type_id.is_none() && self.country.is_none() && self.years.is_none()
    }

    fn to_filter(&self, taxonomy: &Taxonomy) -> Result<CrisisFilter> {
        if let Some(t) = &self.type_id {
            if taxonomy.node(t).is_none() {
                bail!("unknown taxonomy class {t:?}");
            }
        }
        let year_range = match &self.years {
            None => None,
            Some(s) => {
                let (lo, hi) = s.split_once("..").unwrap_or((s, s));
                let parse = |v: &str| v.trim().parse::<i32>().with_context(|| format!("bad year range {s:?}"));
                Some((parse(lo)?, parse(hi)?))
            }
        };
        Ok(CrisisFilter {
            type_id: self.type_id.clone(),
            country: self.country.clone(),
            year_range,
        })
    }
}

/// Settings readable from `--config`. Command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    embeddings: Option<PathBuf>,
    dims: Option<usize>,
    columns: Option<PathBuf>,
    normalize_quant: Option<bool>,
    workers: Option<usize>,
    json: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Effective settings after merging the config file and flags.
#[derive(Debug, Clone)]
pub struct Config {
    pub embeddings_path: Option<PathBuf>,
    pub dims: Option<usize>,
    pub column_map_path: Option<PathBuf>,
    pub normalize_quant: bool,
    pub output_format: OutputFormat,
    pub workers: usize,
}

impl Config {
    fn resolve(global: &GlobalArgs) -> Result<Config> {
        let file = match &global.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let workers = match global.workers.or(file.workers) {
            Some(0) => bail!("--workers must be at least 1"),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let json = global.json || file.json.unwrap_or(false);
        Ok(Config {
            embeddings_path: global.embeddings.clone().or(file.embeddings),
            dims: global.dims.or(file.dims),
            column_map_path: global.columns.clone().or(file.columns),
            normalize_quant: global.normalize_quant || file.normalize_quant.unwrap_or(false),
            output_format: if json { OutputFormat::Json } else { OutputFormat::Text },
            workers,
        })
    }

    fn sim_options(&self) -> SimOptions {
        SimOptions {
            normalize_quant: self.normalize_quant,
            workers: Some(self.workers),
        }
    }

    fn embeddings(&self) -> Result<EmbeddingTable> {
        let path = self
            .embeddings_path
            .as_ref()
            .ok_or_else(|| anyhow!("no embeddings given: pass --embeddings or set CRISIM_EMBEDDINGS"))?;
        let table = load_embeddings_file(path, self.dims).with_context(|| format!("loading {}", path.display()))?;
        for w in table.warnings() {
            eprintln!("warning: {}: {w}", path.display());
        }
        Ok(table)
    }

    fn csv_schema(&self) -> Result<CsvSchema> {
        match &self.column_map_path {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                CsvSchema::from_toml(&text).with_context(|| format!("column map {}", path.display()))
            }
            None => Ok(CsvSchema::emdat()),
        }
    }
}

fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_turtle(&text, Taxonomy::build()).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(bytes).context("writing to stdout"),
    }
}

fn cmd_ingest(config: &Config, csv: &Path, kb_path: &Path, append: bool) -> Result<Status> {
    let schema = config.csv_schema()?;
    let mut kb = if append && kb_path.exists() {
        load_kb(kb_path)?
    } else {
        KnowledgeBase::with_taxonomy(Taxonomy::build())
    };
    let file = fs::File::open(csv).with_context(|| format!("opening {}", csv.display()))?;
    let report = match ingest_csv(io::BufReader::new(file), &schema, &mut kb) {
        Ok(r) => r,
        Err(e @ IngestError::MalformedCsv { .. }) => bail!("{}: {e}", csv.display()),
        Err(e) => return Err(e).context(format!("ingesting {}", csv.display())),
    };
    let mut buf = Vec::new();
    kb.write_turtle(&mut buf)?;
    fs::write(kb_path, buf).with_context(|| format!("writing {}", kb_path.display()))?;
    match config.output_format {
        OutputFormat::Json => println!("{}", serde_json::to_string(&report)?),
        OutputFormat::Text => print!("{}", report.to_text()),
    }
    Ok(if report.rejected == 0 {
        Status::Success
    } else {
        Status::Rejections
    })
}

fn cmd_stats(config: &Config, kb_path: &Path) -> Result<Status> {
    let stats = load_kb(kb_path)?.stats();
    match config.output_format {
        OutputFormat::Json => println!("{}", serde_json::to_string(&stats)?),
        OutputFormat::Text => print!("{stats}"),
    }
    Ok(Status::Success)
}

fn selected_ids(kb: &KnowledgeBase, ids: &[String], filter: &FilterArgs) -> Result<Vec<String>> {
    if let Some(missing) = ids.iter().find(|id| !kb.contains_crisis(id)) {
        bail!("unknown crisis {missing:?}");
    }
    let matching = kb.list_crises(&filter.to_filter(kb.taxonomy())?);
    Ok(if ids.is_empty() {
        matching
    } else {
        ids.iter().filter(|id| matching.contains(id)).cloned().collect()
    })
}

fn cmd_export(kb_path: &Path, ids: &[String], filter: &FilterArgs, out: Option<&Path>) -> Result<Status> {
    let kb = load_kb(kb_path)?;
    let mut buf = Vec::new();
    if ids.is_empty() && filter.is_empty() {
        kb.write_turtle(&mut buf)?;
    } else {
        let mut triples = Vec::new();
        for id in selected_ids(&kb, ids, filter)? {
            triples.extend(kb.crisis_subgraph(&id)?.triples);
        }
        crate::store::write_turtle(&triples, kb.taxonomy(), &mut buf)?;
    }
    write_output(out, &buf)?;
    Ok(Status::Success)
}

fn cmd_sim(config: &Config, kb_path: &Path, a: &str, b: &str) -> Result<Status> {
    let kb = load_kb(kb_path)?;
    let sets = [a, b]
        .iter()
        .map(|id| kb.crisis_subgraph(id))
        .collect::<Result<Vec<_>, _>>()?;
    let table = config.embeddings()?;
    let engine = sim::engine_for(&kb, &table, &config.sim_options());
    let score = engine.score(&engine.prepare(&sets[0])?, &engine.prepare(&sets[1])?)?;
    match config.output_format {
        OutputFormat::Json => {
            let mut value = serde_json::to_value(score)?;
            value["a"] = a.into();
            value["b"] = b.into();
            println!("{value}");
        }
        OutputFormat::Text => {
            println!("combined: {:.6}", score.combined);
            println!("qualitative_avg: {:.6}", score.qualitative_avg);
            println!("quantitative_avg: {:.6}", score.quantitative_avg);
            println!("normalized: {:.6}", score.normalized);
            println!("L: {}", score.l);
            println!("H: {}", score.h);
        }
    }
    Ok(Status::Success)
}

fn cmd_topk(config: &Config, kb_path: &Path, id: &str, k: usize) -> Result<Status> {
    let kb = load_kb(kb_path)?;
    if !kb.contains_crisis(id) {
        bail!("unknown crisis {id:?}");
    }
    let table = config.embeddings()?;
    let ranked = sim::top_k(&kb, id, k, &table, &config.sim_options())?;
    let mut out = io::stdout().lock();
    for r in &ranked {
        writeln!(out, "{}", r.to_json_line(id))?;
    }
    Ok(Status::Success)
}

fn cmd_matrix(config: &Config, kb_path: &Path, ids: &[String], filter: &FilterArgs, out: Option<&Path>) -> Result<Status> {
    let kb = load_kb(kb_path)?;
    let ids = selected_ids(&kb, ids, filter)?;
    if ids.is_empty() {
        bail!("no crises selected");
    }
    let table = config.embeddings()?;
    let m = sim::matrix(&kb, &ids, &table, &config.sim_options())?;
    write_output(out, m.to_csv().as_bytes())?;
    if let Some(path) = out {
        println!("{}", path.display());
    }
    Ok(Status::Success)
}

fn dispatch(cli: Cli) -> Result<Status> {
    let config = Config::resolve(&cli.global)?;
    match &cli.command {
        Command::Ingest { csv, kb, append } => cmd_ingest(&config, csv, kb, *append),
        Command::Stats { kb } => cmd_stats(&config, kb),
        Command::Export { kb, ids, filter, out } => cmd_export(kb, ids, filter, out.as_deref()),
        Command::Sim { kb, a, b } => cmd_sim(&config, kb, a, b),
        Command::Topk { kb, id, k } => cmd_topk(&config, kb, id, *k),
        Command::Matrix { kb, ids, filter, out } => cmd_matrix(&config, kb, ids, filter, out.as_deref()),
    }
}

/// Parses arguments and runs one command. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Failure } else { Status::Success };
        }
    };
    match dispatch(cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::Failure
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("crisim.toml");
        fs::write(&path, "embeddings = \"a.txt\"\nworkers = 3\nnormalize_quant = true\n").unwrap();
        let cli = Cli::try_parse_from([
            "crisim",
            "--config",
            path.to_str().unwrap(),
            "--workers",
            "5",
            "stats",
            "kb.ttl",
        ])
        .unwrap();
        let c = Config::resolve(&cli.global).unwrap();
        assert_eq!(c.workers, 5);
        assert!(c.normalize_quant);
        assert_eq!(c.embeddings_path.as_deref(), Some(Path::new("a.txt")));
        assert_eq!(c.output_format, OutputFormat::Text);
    }

    #[test]
    fn zero_workers_rejected() {
        let cli = Cli::try_parse_from(["crisim", "--workers", "0", "stats", "kb.ttl"]).unwrap();
        assert!(Config::resolve(&cli.global).is_err());
    }

    #[test]
    fn year_ranges() {
        let tax = Taxonomy::build();
        let f = FilterArgs {
            type_id: None,
            country: None,
            years: Some("1990..2000".into()),
        };
        assert_eq!(f.to_filter(&tax).unwrap().year_range, Some((1990, 2000)));
        let f = FilterArgs {
            years: Some("1999".into()),
            ..f
        };
        assert_eq!(f.to_filter(&tax).unwrap().year_range, Some((1999, 1999)));
        let f = FilterArgs {
            type_id: Some("Nope".into()),
            country: None,
            years: None,
        };
        assert!(f.to_filter(&tax).is_err());
    }
}
