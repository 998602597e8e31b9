//! Data-lake catalog: CSV ingestion, column access, profile persistence.
//!
//! A [`Catalog`] is an immutable directory listing of a lake: one
//! [`DatasetRef`] per `.csv` file plus one [`ColumnRef`] per column, with the
//! column kind inferred from a single ingest pass. Raw cell values are never
//! retained; [`Catalog::read_column`] and [`Catalog::read_dataset`] re-read a
//! file on demand and return null-filtered value multisets.
//!
//! CSV dialect: first row is the header, comma delimiter, `"` quoting with
//! doubled-quote escaping, UTF-8. Rows whose field count differs from the
//! header are skipped with a warning; unreadable files are skipped with a
//! warning and the catalog is built from the rest.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiler::ColumnProfile;

/// Inferred column kind. A column is numeric when at least 90% of its
/// non-null cells parse as numbers (see [`IngestOptions::numeric_threshold`]),
/// textual otherwise, and `other` when it has no non-null cells at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Textual,
    Numeric,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub id: String,
    pub path: PathBuf,
    pub name: String,
    pub row_count: u64,
    pub column_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub dataset_id: String,
    pub column_name: String,
    pub position: usize,
    pub kind: ColumnKind,
}

impl ColumnRef {
    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.dataset_id, self.column_name)
    }
}

/// Null-filtered multiset of the string cells of one column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnValues {
    counts: HashMap<String, u64>,
    total: u64,
}

impl ColumnValues {
    pub fn from_cells<I, S>(cells: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = ColumnValues::default();
        for cell in cells {
            v.insert_owned(cell.into());
        }
        v
    }

    pub fn insert(&mut self, cell: &str) {
        self.total += 1;
        if let Some(c) = self.counts.get_mut(cell) {
            *c += 1;
        } else {
            self.counts.insert(cell.to_owned(), 1);
        }
    }

    pub fn insert_owned(&mut self, cell: String) {
        self.total += 1;
        *self.counts.entry(cell).or_insert(0) += 1;
    }

    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn distinct_count(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn count_of(&self, value: &str) -> u64 {
        self.counts.get(value).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> impl Iterator<Item = (&String, &u64)> {
        self.counts.iter()
    }

    /// Distinct values with multiplicities, sorted by value. Downstream
    /// floating-point reductions iterate this to stay deterministic.
    pub fn sorted_counts(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.counts.iter().map(|(s, c)| (s.as_str(), *c)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Cell values treated as null, compared case-sensitively.
    pub null_tokens: Vec<String>,
    /// Minimum fraction of non-null cells that must parse as numbers for a
    /// column to be classified numeric.
    pub numeric_threshold: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            null_tokens: ["", "NA", "N/A", "null", "NULL", "-"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            numeric_threshold: 0.9,
        }
    }
}

impl IngestOptions {
    fn is_null(&self, cell: &str) -> bool {
        self.null_tokens.iter().any(|t| t == cell)
    }
}

/// Cheap pre-filter before attempting a full float parse.
fn looks_numeric(cell: &str) -> bool {
    let t = cell.trim();
    match t.as_bytes().first() {
        Some(b'0'..=b'9' | b'+' | b'-' | b'.') => t.parse::<f64>().is_ok(),
        _ => false,
    }
}

/// Immutable lake catalog. Safe to share across threads after ingest.
#[derive(Debug, Clone)]
pub struct Catalog {
    root: PathBuf,
    datasets: Vec<DatasetRef>,
    columns: Vec<ColumnRef>,
    options: IngestOptions,
    dataset_index: HashMap<String, usize>,
    column_index: HashMap<(String, String), usize>,
}

impl Catalog {
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn options(&self) -> &IngestOptions {
        &self.options
    }

    pub fn datasets(&self) -> &[DatasetRef] {
        &self.datasets
    }

    pub fn columns(&self) -> &[ColumnRef] {
        &self.columns
    }

    pub fn dataset(&self, id: &str) -> Option<&DatasetRef> {
        self.dataset_index.get(id).map(|&i| &self.datasets[i])
    }

    pub fn column(&self, dataset_id: &str, column_name: &str) -> Result<&ColumnRef> {
        self.column_index
            .get(&(dataset_id.to_string(), column_name.to_string()))
            .map(|&i| &self.columns[i])
            .ok_or_else(|| Error::ColumnNotFound {
                dataset: dataset_id.to_string(),
                column: column_name.to_string(),
            })
    }

    /// Read one column's values. The file is re-parsed; nothing is cached.
    pub fn read_column(&self, col: &ColumnRef) -> Result<ColumnValues> {
        let known = self.column(&col.dataset_id, &col.column_name)?;
        if known.position != col.position {
            return Err(Error::ColumnNotFound {
                dataset: col.dataset_id.clone(),
                column: col.column_name.clone(),
            });
        }
        let mut columns = self.read_dataset_inner(&col.dataset_id, Some(col.position))?;
        let values = columns.swap_remove(col.position).1;
        if values.total_count() == 0 {
            return Err(Error::EmptyColumn(col.qualified_name()));
        }
        Ok(values)
    }

    /// Read every column of a dataset in one file pass. Columns with no
    /// non-null cells are omitted (they cannot be profiled or joined).
    pub fn read_dataset(&self, dataset_id: &str) -> Result<Vec<(ColumnRef, ColumnValues)>> {
        Ok(self
            .read_dataset_inner(dataset_id, None)?
            .into_iter()
            .filter(|(_, v)| v.total_count() > 0)
            .collect())
    }

    /// Parse a dataset file into per-column multisets. When `only` is given,
    /// other columns are left empty to avoid the counting work.
    fn read_dataset_inner(
        &self,
        dataset_id: &str,
        only: Option<usize>,
    ) -> Result<Vec<(ColumnRef, ColumnValues)>> {
        let ds = self
            .dataset(dataset_id)
            .ok_or_else(|| Error::DatasetNotFound(dataset_id.to_string()))?;
        let mut reader = csv_reader(&ds.path)?;
        let headers = reader
            .headers()
            .map_err(|e| csv_err(&ds.path, e))?
            .clone();
        let ncols = headers.len();
        if ncols != ds.column_count {
            return Err(Error::Csv {
                path: ds.path.clone(),
                message: format!(
                    "file has {ncols} columns but the catalog recorded {}; re-ingest the lake",
                    ds.column_count
                ),
            });
        }
        let mut values: Vec<ColumnValues> = vec![ColumnValues::default(); ncols];

        let mut record = csv::StringRecord::new();
        loop {
            match reader.read_record(&mut record) {
                Ok(false) => break,
                Ok(true) => {
                    if record.len() != ncols {
                        continue; // arity mismatch, already warned at ingest
                    }
                    match only {
                        Some(pos) => {
                            if let Some(cell) = record.get(pos) {
                                if !self.options.is_null(cell) {
                                    values[pos].insert(cell);
                                }
                            }
                        }
                        None => {
                            for (pos, cell) in record.iter().enumerate() {
                                if !self.options.is_null(cell) {
                                    values[pos].insert(cell);
                                }
                            }
                        }
                    }
                }
                Err(e) => return Err(csv_err(&ds.path, e)),
            }
        }

        let refs: Vec<ColumnRef> = self
            .columns
            .iter()
            .filter(|c| c.dataset_id == dataset_id)
            .cloned()
            .collect();
        debug_assert_eq!(refs.len(), ncols);
        Ok(refs.into_iter().zip(values).collect())
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Build a catalog from every `.csv` file directly under `root`.
///
/// Files that cannot be parsed are skipped with a warning; the call fails
/// only when no file could be ingested at all. Ingestion runs per file in
/// parallel and the result is ordered lexicographically by path, so the same
/// directory content always yields the same catalog.
pub fn ingest_directory(root: &Path, options: IngestOptions) -> Result<Catalog> {
    let mut paths: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|e| e.eq_ignore_ascii_case("csv"))
                    .unwrap_or(false)
        })
        .collect();
    paths.sort();

    if paths.is_empty() {
        return Err(Error::EmptyLake(root.to_path_buf()));
    }

    let scanned: Vec<Option<(DatasetRef, Vec<ColumnRef>)>> = paths
        .par_iter()
        .map(|path| match scan_file(path, &options) {
            Ok(entry) => Some(entry),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                None
            }
        })
        .collect();

    let mut datasets = Vec::new();
    let mut columns = Vec::new();
    let mut dataset_index = HashMap::new();
    let mut column_index = HashMap::new();
    for (ds, cols) in scanned.into_iter().flatten() {
        if dataset_index.contains_key(&ds.id) {
            log::warn!(
                "skipping {}: duplicate dataset id `{}`",
                ds.path.display(),
                ds.id
            );
            continue;
        }
        dataset_index.insert(ds.id.clone(), datasets.len());
        for col in cols {
            column_index.insert(
                (col.dataset_id.clone(), col.column_name.clone()),
                columns.len(),
            );
            columns.push(col);
        }
        datasets.push(ds);
    }

    if datasets.is_empty() {
        return Err(Error::EmptyLake(root.to_path_buf()));
    }

    Ok(Catalog {
        root: root.to_path_buf(),
        datasets,
        columns,
        options,
        dataset_index,
        column_index,
    })
}

/// One ingest pass over a file: row count, per-column null/numeric tallies.
fn scan_file(path: &Path, options: &IngestOptions) -> Result<(DatasetRef, Vec<ColumnRef>)> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let ncols = headers.len();

    let mut non_null = vec![0u64; ncols];
    let mut numeric = vec![0u64; ncols];
    let mut rows = 0u64;
    let mut bad_arity = 0u64;

    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                if record.len() != ncols {
                    bad_arity += 1;
                    continue;
                }
                rows += 1;
                for (pos, cell) in record.iter().enumerate() {
                    if options.is_null(cell) {
                        continue;
                    }
                    non_null[pos] += 1;
                    if looks_numeric(cell) {
                        numeric[pos] += 1;
                    }
                }
            }
            Err(e) => return Err(csv_err(path, e)),
        }
    }
    if bad_arity > 0 {
        log::warn!(
            "{}: skipped {bad_arity} rows with field count != {ncols}",
            path.display()
        );
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ds = DatasetRef {
        id: name.clone(),
        path: path.to_path_buf(),
        name,
        row_count: rows,
        column_count: ncols,
    };
    let columns = headers
        .iter()
        .enumerate()
        .map(|(pos, header)| {
            let kind = if non_null[pos] == 0 {
                ColumnKind::Other
            } else if numeric[pos] as f64 / non_null[pos] as f64 >= options.numeric_threshold {
                ColumnKind::Numeric
            } else {
                ColumnKind::Textual
            };
            ColumnRef {
                dataset_id: ds.id.clone(),
                column_name: header.to_string(),
                position: pos,
                kind,
            }
        })
        .collect();
    Ok((ds, columns))
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    dataset: String,
    columns: Vec<ProfileFileColumn>,
}

#[derive(Serialize, Deserialize)]
struct ProfileFileColumn {
    name: String,
    position: usize,
    kind: ColumnKind,
    profile: ColumnProfile,
}

/// Write profiles to `dir`, one `<dataset>.profile.json` per dataset.
pub fn store_profiles(profiles: &[(ColumnRef, ColumnProfile)], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut by_dataset: BTreeMap<&str, Vec<&(ColumnRef, ColumnProfile)>> = BTreeMap::new();
    for entry in profiles {
        by_dataset.entry(&entry.0.dataset_id).or_default().push(entry);
    }
    for (dataset, mut entries) in by_dataset {
        entries.sort_by_key(|(c, _)| c.position);
        let file = ProfileFile {
            dataset: dataset.to_string(),
            columns: entries
                .into_iter()
                .map(|(c, p)| ProfileFileColumn {
                    name: c.column_name.clone(),
                    position: c.position,
                    kind: c.kind,
                    profile: p.clone(),
                })
                .collect(),
        };
        let path = dir.join(format!("{dataset}.profile.json"));
        let json = serde_json::to_string_pretty(&file).expect("profile serialization");
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Load every `*.profile.json` under `dir`, ordered by file name then column
/// position. An empty directory yields an empty list; a malformed profile
/// file is a fatal error naming the file.
pub fn load_profiles(dir: &Path) -> Result<Vec<(ColumnRef, ColumnProfile)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .map(|n| n.to_string_lossy().ends_with(".profile.json"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();

    let mut out = Vec::new();
    for path in paths {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let file: ProfileFile =
            serde_json::from_str(&text).map_err(|e| Error::MalformedProfile {
                path: path.clone(),
                message: e.to_string(),
            })?;
        let mut columns = file.columns;
        columns.sort_by_key(|c| c.position);
        for col in columns {
            out.push((
                ColumnRef {
                    dataset_id: file.dataset.clone(),
                    column_name: col.name,
                    position: col.position,
                    kind: col.kind,
                },
                col.profile,
            ));
        }
    }
    Ok(out)
}
