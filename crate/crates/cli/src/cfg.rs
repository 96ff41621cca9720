//! Config-file handling, report writing, and shared input loading.
//!
//! Every key of the JSON config file corresponds to a command-line
//! flag; flags override config keys. Reports embed the fully resolved
//! configuration and the seed, so any run can be reproduced from its
//! report alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sociotag::analysis::BenchmarkConfig;
use sociotag::corpus::LexicalResources;
use sociotag::error::{Error, Result};
use sociotag::numerics::fnv1a64;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Flat key space shared by all subcommands; unknown keys are rejected
/// so typos fail loudly.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub precision: Option<u32>,
    pub corpus: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub tagset: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub brown: Option<PathBuf>,
    pub dicts: Option<Vec<String>>,
    pub checkpoint: Option<PathBuf>,
    pub accuracies: Option<PathBuf>,
    pub model: Option<String>,
    pub mode: Option<String>,
    pub train_size: Option<usize>,
    pub dim: Option<usize>,
    pub order: Option<u8>,
    pub negatives: Option<usize>,
    pub samples: Option<usize>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
    pub dropout: Option<f64>,
    pub patience: Option<usize>,
    pub k: Option<usize>,
    pub gate: Option<String>,
    pub network: Option<String>,
    pub rewire_epochs: Option<Vec<usize>>,
    pub rewire_samples: Option<usize>,
    pub repeats: Option<usize>,
    pub svg: Option<bool>,
    pub benchmark: Option<BenchmarkConfig>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::usage(format!("bad config {}: {e}", path.display())))
            }
        }
    }
}

/// A required path flag: CLI value wins over the config key; the file
/// must exist before any work starts.
pub fn require_path(
    flag: Option<PathBuf>,
    from_config: Option<PathBuf>,
    name: &str,
) -> Result<PathBuf> {
    let path = flag
        .or(from_config)
        .ok_or_else(|| Error::usage(format!("missing required input --{name}")))?;
    if !path.exists() {
        return Err(Error::usage(format!(
            "--{name} path {} does not exist",
            path.display()
        )));
    }
    Ok(path)
}

pub fn optional_path(
    flag: Option<PathBuf>,
    from_config: Option<PathBuf>,
    name: &str,
) -> Result<Option<PathBuf>> {
    match flag.or(from_config) {
        None => Ok(None),
        Some(path) => {
            if !path.exists() {
                return Err(Error::usage(format!(
                    "--{name} path {} does not exist",
                    path.display()
                )));
            }
            Ok(Some(path))
        }
    }
}

#[derive(Serialize)]
pub struct Report<C: Serialize, M: Serialize> {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub config: C,
    pub config_hash: u64,
    pub metrics: M,
}

impl<C: Serialize, M: Serialize> Report<C, M> {
    pub fn new(experiment: &str, seed: u64, config: C, metrics: M) -> Self {
        let config_hash = sociotag::numerics::config_hash(&config);
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: experiment.to_string(),
            seed,
            config,
            config_hash,
            metrics,
        }
    }

    /// Writes `<out>/<experiment>.report.json` and returns the path.
    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out)?;
        let path = out.join(format!("{}.report.json", self.experiment));
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&path, json)?;
        Ok(path)
    }
}

/// Parses repeated `name=path` dictionary flags and loads everything
/// into one resource bundle.
pub fn load_resources(
    vectors: Option<&Path>,
    brown: Option<&Path>,
    dicts: &[String],
) -> Result<LexicalResources> {
    let mut resources = LexicalResources::empty();
    if let Some(path) = vectors {
        resources = resources.with_word_vectors(sociotag::corpus::load_word_vectors(path)?)?;
    }
    if let Some(path) = brown {
        resources = resources.with_brown_paths(sociotag::corpus::load_brown_clusters(path)?);
    }
    for spec in dicts {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| Error::usage(format!("--dict expects name=path, got {spec:?}")))?;
        if !Path::new(path).exists() {
            return Err(Error::usage(format!("--dict path {path} does not exist")));
        }
        resources = resources.add_tag_dict(
            name,
            sociotag::corpus::load_tag_dictionary(Path::new(path))?,
        );
    }
    Ok(resources)
}

/// FNV-1a of a file's bytes; identifies resource files in checkpoints.
pub fn file_hash(path: &Path) -> Result<u64> {
    Ok(fnv1a64(&fs::read(path)?))
}

/// Runs one job per item on up to `workers` threads, preserving input
/// order. Results are independent of the worker count because each job
/// owns its derived seed.
pub fn parallel_map<T, R, F>(items: Vec<T>, workers: usize, job: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.into_iter().map(job).collect();
    }
    let mut slots: Vec<Option<R>> = Vec::with_capacity(items.len());
    slots.resize_with(items.len(), || None);
    let jobs: Vec<(usize, T)> = items.into_iter().enumerate().collect();
    let queue = std::sync::Mutex::new(jobs.into_iter());
    let slot_refs = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let next = queue.lock().expect("queue lock").next();
                let Some((idx, item)) = next else { break };
                let result = job(item);
                slot_refs.lock().expect("slot lock")[idx] = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("job completed"))
        .collect()
}
