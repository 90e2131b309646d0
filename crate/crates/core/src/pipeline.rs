//! Archive → metric tables → panel, plus the csv handoff formats between
//! the staged commands.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Serialize};

use crate::dynamics::{community_dynamics, DynamicsConfig, DynamicsRow};
use crate::error::{Error, PanelError, Result};
use crate::ingest::{by_community, window_by_month, Archive};
use crate::language::{build_dictionary, language_row, LanguageRow, SentimentScorer};
use crate::netgraph::{betweenness, build_graph, centralization};
use crate::panel::{apply_maturity, assemble_panel, maturity_factor, MaturityFactor, NetworkRow, PanelRow};

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub dynamics: Vec<DynamicsRow>,
    pub language: Vec<LanguageRow>,
    pub network: Vec<NetworkRow>,
}

/// Computes every per-window metric. Communities are processed in parallel
/// on the current rayon pool; output order is community, then month.
pub fn compute_metrics(
    archive: &Archive,
    config: &DynamicsConfig,
    scorer: &dyn SentimentScorer,
) -> Result<Metrics> {
    let dictionary = build_dictionary(archive.posts().iter().map(|p| p.text.as_str()))?;
    let index = archive.index();
    let windows = window_by_month(archive);
    let communities: Vec<_> = by_community(&windows).into_values().collect();

    let per_community: Vec<Metrics> = communities
        .par_iter()
        .map(|windows| {
            let dynamics = community_dynamics(windows, &index, config);
            let mut language = Vec::with_capacity(windows.len());
            let mut network = Vec::with_capacity(windows.len());
            for w in windows.iter() {
                language.push(language_row(w, scorer, &dictionary));
                let graph = build_graph(w, &index);
                let scores = betweenness(&graph);
                network.push(NetworkRow {
                    community_id: w.community_id.to_string(),
                    month: w.month,
                    nodes: graph.node_count() as u64,
                    edges: graph.undirected_edge_count() as u64,
                    group_betweenness: centralization(&scores.raw),
                });
            }
            Metrics {
                dynamics,
                language,
                network,
            }
        })
        .collect();

    let mut out = Metrics {
        dynamics: Vec::new(),
        language: Vec::new(),
        network: Vec::new(),
    };
    for m in per_community {
        out.dynamics.extend(m.dynamics);
        out.language.extend(m.language);
        out.network.extend(m.network);
    }
    Ok(out)
}

/// Runs `f` on a rayon pool of `jobs` threads (0 = rayon default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Panel rows with the maturity factor filled in where it is defined.
#[derive(Debug)]
pub struct PanelBuild {
    pub rows: Vec<PanelRow>,
    pub maturity: std::result::Result<MaturityFactor, PanelError>,
}

pub fn build_panel(metrics: &Metrics) -> Result<PanelBuild> {
    let mut rows = assemble_panel(&metrics.dynamics, &metrics.language, &metrics.network)?;
    let maturity = maturity_factor(&rows);
    if let Ok(f) = &maturity {
        apply_maturity(&mut rows, f);
    }
    Ok(PanelBuild { rows, maturity })
}

pub const DYNAMICS_FILE: &str = "dynamics.csv";
pub const LANGUAGE_FILE: &str = "language.csv";
pub const NETWORK_FILE: &str = "network.csv";

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).map_err(PanelError::from)?;
    Ok(buf)
}

pub fn write_metrics(metrics: &Metrics, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = [
        (DYNAMICS_FILE, csv_bytes(&metrics.dynamics)?),
        (LANGUAGE_FILE, csv_bytes(&metrics.language)?),
        (NETWORK_FILE, csv_bytes(&metrics.network)?),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_metrics(dir: &Path) -> Result<Metrics> {
    fn load<T: DeserializeOwned>(path: PathBuf) -> Result<Vec<T>> {
        let file = fs::File::open(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok(read_rows(file).map_err(PanelError::from)?)
    }
    Ok(Metrics {
        dynamics: load(dir.join(DYNAMICS_FILE))?,
        language: load(dir.join(LANGUAGE_FILE))?,
        network: load(dir.join(NETWORK_FILE))?,
    })
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes one `from,to,weight` edge list per window as
/// `<community>_<YYYY-MM>.csv`.
pub fn dump_graphs(archive: &Archive, dir: &Path) -> Result<usize> {
    let index = archive.index();
    let mut count = 0;
    for w in window_by_month(archive) {
        let graph = build_graph(&w, &index);
        let mut buf = Vec::new();
        graph
            .write_edge_csv(&mut buf)
            .map_err(PanelError::from)?;
        let path = dir.join(format!("{}_{}.csv", sanitize(w.community_id), w.month));
        write_atomic(&path, &buf)?;
        count += 1;
    }
    Ok(count)
}
