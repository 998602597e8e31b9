//! Synthetic data-lake generation with controlled column overlap.
//!
//! Each designated query column draws unique values from its own vocabulary
//! pool. Semantic candidates are offset slices of the same pool, sized so
//! that a scheduled containment and cardinality ratio hold exactly (up to
//! integer rounding). Syntactic decoys collide with the query pool but break
//! the multiset structure: either the full value set repeated many times, or
//! a tiny subset repeated heavily — both top classical set-overlap metrics
//! while staying poor joins under the multiset measure. Remaining files are
//! fillers over fresh pools.
//!
//! Values are two-word strings `<stem>b<bucket> <stem>v<index>`: the bucket
//! word is shared by a contiguous index range, so frequent-word sets reflect
//! how much two slices of a pool overlap, which is what makes the planted
//! overlaps learnable from profiles alone.
//!
//! Every file is padded to the configured size (within 5%) with a random
//! letter column, and the whole lake is a deterministic function of the seed.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::{ingest_directory, ColumnValues, IngestOptions};
use crate::error::{Error, Result};
use crate::eval::{write_ground_truth, ColumnKey, GroundTruthEntry, JoinLabel};
use crate::joinmetric::measure;

/// Overlap targets for one planted semantic pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSpec {
    /// Fraction of the candidate's values contained in the query, in [0, 1].
    pub containment: f64,
    /// Candidate distinct count over query distinct count, in (0, 1].
    pub cardinality_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticLakeConfig {
    pub n_files: usize,
    pub file_size_bytes: u64,
    /// Designated query columns, one vocabulary pool each.
    pub n_queries: usize,
    /// Planted joinable candidates per query.
    pub semantic_per_query: usize,
    /// Planted decoys per query, alternating full-set and subset styles.
    pub syntactic_per_query: usize,
    /// Cycled over the semantic plants of each query.
    pub schedule: Vec<OverlapSpec>,
    /// Distinct-count range of the query columns (spread evenly).
    pub query_cardinality: (u64, u64),
    /// Textual filler columns per filler file.
    pub filler_columns_per_file: usize,
    pub seed: u64,
    /// Re-read the written lake and check every planted pair's exact J and K
    /// against its targets.
    pub verify: bool,
}

impl SyntheticLakeConfig {
    /// The reference lake used by the bundled model and the benchmark-style
    /// tests: 20 query columns, 12 planted candidates and 4 decoys each,
    /// padded to 1 MiB per file.
    pub fn reference(seed: u64) -> Self {
        let mut schedule = Vec::new();
        for &containment in &[0.9, 0.65, 0.4] {
            for &cardinality_ratio in &[1.0, 0.8, 0.6, 0.4] {
                schedule.push(OverlapSpec {
                    containment,
                    cardinality_ratio,
                });
            }
        }
        SyntheticLakeConfig {
            n_files: 88,
            file_size_bytes: 1 << 20,
            n_queries: 20,
            semantic_per_query: 12,
            syntactic_per_query: 4,
            schedule,
            query_cardinality: (320, 800),
            filler_columns_per_file: 3,
            seed,
            verify: true,
        }
    }

    /// Number of files the planted columns require.
    pub fn files_needed(&self) -> usize {
        if self.n_queries == 0 {
            return 0;
        }
        self.n_queries.div_ceil(QUERIES_PER_FILE)
            + (self.n_queries * self.semantic_per_query).div_ceil(CANDIDATES_PER_FILE)
            + (self.n_queries * self.syntactic_per_query).div_ceil(DECOYS_PER_FILE)
    }

    /// Shrink the query count until the planted columns fit `n_files`.
    /// Stops at one query; a budget too small even for that still fails at
    /// generation time.
    pub fn scaled_to_files(mut self, n_files: usize) -> Self {
        self.n_files = n_files;
        while self.n_queries > 1 && self.files_needed() > n_files {
            self.n_queries -= 1;
        }
        self
    }

    /// A lake of identical filler files with no planted pairs; used for the
    /// footprint and scalability measurements.
    pub fn filler(n_files: usize, file_size_bytes: u64, seed: u64) -> Self {
        SyntheticLakeConfig {
            n_files,
            file_size_bytes,
            n_queries: 0,
            semantic_per_query: 0,
            syntactic_per_query: 0,
            schedule: Vec::new(),
            query_cardinality: (0, 0),
            filler_columns_per_file: 3,
            seed,
            verify: false,
        }
    }
}

/// One planted pair with its targets and (after verification) the measured
/// exact values.
#[derive(Debug, Clone)]
pub struct PlantedPair {
    pub query: ColumnKey,
    pub candidate: ColumnKey,
    pub label: JoinLabel,
    pub target_j: f64,
    pub target_k: f64,
    pub measured_j: f64,
    pub measured_k: f64,
}

#[derive(Debug)]
pub struct SyntheticLake {
    pub files: Vec<PathBuf>,
    pub truth: Vec<GroundTruthEntry>,
    /// `truth/ground_truth.csv` under the output directory, when pairs were
    /// planted.
    pub truth_path: Option<PathBuf>,
    pub planted: Vec<PlantedPair>,
}

const STEMS: [&str; 20] = [
    "amber", "basalt", "cedar", "dune", "ember", "fjord", "garnet", "heron", "iris", "jasper",
    "kelp", "lagoon", "maple", "nectar", "onyx", "prairie", "quartz", "reef", "sable", "tundra",
];

const QUERIES_PER_FILE: usize = 4;
const CANDIDATES_PER_FILE: usize = 6;
const DECOYS_PER_FILE: usize = 2;
const SUBSET_DECOY_DISTINCT: u64 = 20;
const PLANT_TOLERANCE: f64 = 0.05;
const MAX_PAD_WIDTH: u64 = 8000;

#[derive(Debug, Clone)]
struct PoolSpec {
    stem: String,
    bucket: u64,
}

impl PoolSpec {
    fn cell_len(&self) -> u64 {
        // "<stem>b<4 digits> <stem>v<7 digits>"
        2 * self.stem.len() as u64 + 14
    }

    fn write_cell<W: Write>(&self, w: &mut W, idx: u64) -> std::io::Result<()> {
        write!(
            w,
            "{stem}b{:04} {stem}v{idx:07}",
            idx / self.bucket,
            stem = self.stem
        )
    }
}

#[derive(Debug, Clone)]
enum ColumnContent {
    /// Row index; parses as a number.
    Id,
    /// Random letters of the file's pad width.
    Pad,
    /// Pool indices `start..start+len`, each repeated `repeat` times.
    Slice {
        pool: usize,
        start: u64,
        len: u64,
        repeat: u64,
    },
}

#[derive(Debug, Clone)]
struct PlannedColumn {
    name: String,
    content: ColumnContent,
}

#[derive(Debug, Clone)]
struct PlannedFile {
    name: String,
    columns: Vec<PlannedColumn>,
    rows: u64,
    pad_width: u64,
}

#[derive(Debug)]
struct LakePlan {
    pools: Vec<PoolSpec>,
    files: Vec<PlannedFile>,
    truth: Vec<GroundTruthEntry>,
    targets: Vec<(ColumnKey, ColumnKey, JoinLabel, f64, f64)>,
}

fn new_pool(pools: &mut Vec<PoolSpec>, cardinality: u64) -> usize {
    let idx = pools.len();
    pools.push(PoolSpec {
        stem: format!("{}{:03}", STEMS[idx % STEMS.len()], idx),
        bucket: (cardinality / 10).max(2),
    });
    idx
}

/// Sum of decimal digit counts of 0..n.
fn digit_sum(n: u64) -> u64 {
    let mut total = 0;
    let mut lo = 0u64;
    let mut digits = 1u64;
    let mut next = 10u64;
    while lo < n {
        let hi = n.min(next);
        total += (hi - lo) * digits;
        lo = hi;
        digits += 1;
        next = next.saturating_mul(10);
    }
    total
}

fn slice_cells(content: &ColumnContent) -> u64 {
    match content {
        ColumnContent::Slice { len, repeat, .. } => len * repeat,
        _ => 0,
    }
}

/// Fix row count and pad width so the file lands within 5% of the target
/// size; exact byte accounting, no materialization.
fn finish_file(
    name: String,
    mut columns: Vec<PlannedColumn>,
    pools: &[PoolSpec],
    target_bytes: u64,
) -> Result<PlannedFile> {
    columns.insert(
        0,
        PlannedColumn {
            name: "id".to_string(),
            content: ColumnContent::Id,
        },
    );
    columns.push(PlannedColumn {
        name: "pad".to_string(),
        content: ColumnContent::Pad,
    });

    let rows = columns.iter().map(|c| slice_cells(&c.content)).max().unwrap_or(0).max(1);

    let header: u64 =
        columns.iter().map(|c| c.name.len() as u64).sum::<u64>() + columns.len() as u64; // separators + newline
    let mut base = header + rows * (columns.len() as u64 - 1) + rows; // commas + newlines
    for col in &columns {
        base += match &col.content {
            ColumnContent::Id => digit_sum(rows),
            ColumnContent::Pad => 0,
            ColumnContent::Slice { pool, len, repeat, .. } => {
                pools[*pool].cell_len() * len * repeat
            }
        };
    }

    if base as f64 > target_bytes as f64 * 1.05 {
        return Err(Error::InfeasibleSchedule(format!(
            "file {name}: planted content needs {base} bytes, above the \
             {target_bytes}-byte file size (+5%)"
        )));
    }
    let pad_width = target_bytes.saturating_sub(base) / rows;
    if pad_width > MAX_PAD_WIDTH {
        return Err(Error::InfeasibleSchedule(format!(
            "file {name}: {rows} rows cannot be padded to {target_bytes} bytes; \
             raise the planted cardinalities or lower file_size_bytes"
        )));
    }

    Ok(PlannedFile {
        name,
        columns,
        rows,
        pad_width,
    })
}

fn plan_lake(cfg: &SyntheticLakeConfig) -> Result<LakePlan> {
    if cfg.n_queries > 0 {
        if cfg.schedule.is_empty() && cfg.semantic_per_query > 0 {
            return Err(Error::InfeasibleSchedule(
                "semantic plants requested with an empty schedule".to_string(),
            ));
        }
        for (i, s) in cfg.schedule.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.containment) {
                return Err(Error::InfeasibleSchedule(format!(
                    "schedule[{i}]: containment {} outside [0, 1]",
                    s.containment
                )));
            }
            if !(s.cardinality_ratio > 0.0 && s.cardinality_ratio <= 1.0) {
                return Err(Error::InfeasibleSchedule(format!(
                    "schedule[{i}]: cardinality ratio {} outside (0, 1]",
                    s.cardinality_ratio
                )));
            }
        }
        let (lo, hi) = cfg.query_cardinality;
        if lo < 2 * SUBSET_DECOY_DISTINCT || hi < lo {
            return Err(Error::InfeasibleSchedule(format!(
                "query cardinality range ({lo}, {hi}) must be ascending with \
                 lower bound >= {}",
                2 * SUBSET_DECOY_DISTINCT
            )));
        }
    }

    let mut pools = Vec::new();
    let mut truth = Vec::new();
    let mut targets = Vec::new();

    // Per-query column plans, grouped so files can be packed afterwards.
    let mut query_cols = Vec::new();
    let mut candidate_cols = Vec::new();
    let mut decoy_cols = Vec::new();

    for q in 0..cfg.n_queries {
        let (lo, hi) = cfg.query_cardinality;
        let nq = if cfg.n_queries == 1 {
            lo
        } else {
            lo + (hi - lo) * q as u64 / (cfg.n_queries as u64 - 1)
        };
        let pool = new_pool(&mut pools, nq);
        query_cols.push(PlannedColumn {
            name: format!("q{q:03}"),
            content: ColumnContent::Slice {
                pool,
                start: 0,
                len: nq,
                repeat: 1,
            },
        });

        for j in 0..cfg.semantic_per_query {
            let spec = cfg.schedule[j % cfg.schedule.len()];
            let nc = ((nq as f64 * spec.cardinality_ratio).round() as u64)
                .clamp(SUBSET_DECOY_DISTINCT, nq);
            let overlap = ((nc as f64 * spec.containment).round() as u64).min(nc);
            let start = nq - overlap;
            candidate_cols.push((
                q,
                PlannedColumn {
                    name: format!("s{q:03}x{j:02}"),
                    content: ColumnContent::Slice {
                        pool,
                        start,
                        len: nc,
                        repeat: 1,
                    },
                },
                overlap as f64 / (nq + nc) as f64, // target J
                nc as f64 / nq as f64,             // target K
            ));
        }

        for d in 0..cfg.syntactic_per_query {
            let col_name = format!("x{q:03}d{d}");
            if d % 2 == 0 {
                // Full value set, heavily repeated: tops set metrics, low J.
                let repeat = 12 + 3 * (d as u64 / 2);
                decoy_cols.push((
                    q,
                    PlannedColumn {
                        name: col_name,
                        content: ColumnContent::Slice {
                            pool,
                            start: 0,
                            len: nq,
                            repeat,
                        },
                    },
                    1.0 / (1.0 + repeat as f64),
                    1.0,
                ));
            } else {
                // Tiny subset, repeated even harder: full containment,
                // mismatched cardinality.
                let repeat = 300 + 50 * (d as u64 / 2);
                decoy_cols.push((
                    q,
                    PlannedColumn {
                        name: col_name,
                        content: ColumnContent::Slice {
                            pool,
                            start: 0,
                            len: SUBSET_DECOY_DISTINCT,
                            repeat,
                        },
                    },
                    SUBSET_DECOY_DISTINCT as f64
                        / (nq + SUBSET_DECOY_DISTINCT * repeat) as f64,
                    SUBSET_DECOY_DISTINCT as f64 / nq as f64,
                ));
            }
        }
    }

    let needed_files = cfg.files_needed();
    if cfg.n_files < needed_files {
        return Err(Error::InfeasibleSchedule(format!(
            "{} planted columns need at least {needed_files} files, config \
             allows {}",
            query_cols.len() + candidate_cols.len() + decoy_cols.len(),
            cfg.n_files
        )));
    }

    let mut files = Vec::new();
    let mut query_dataset = vec![String::new(); cfg.n_queries];
    for (f, chunk) in query_cols.chunks(QUERIES_PER_FILE).enumerate() {
        let name = format!("synq{f:02}");
        for col in chunk {
            let q: usize = col.name[1..].parse().expect("query column name");
            query_dataset[q] = name.clone();
        }
        files.push(finish_file(
            name,
            chunk.to_vec(),
            &pools,
            cfg.file_size_bytes,
        )?);
    }

    let mut plant =
        |files: &mut Vec<PlannedFile>,
         cols: &[(usize, PlannedColumn, f64, f64)],
         per_file: usize,
         prefix: &str,
         label: JoinLabel|
         -> Result<()> {
            for (f, chunk) in cols.chunks(per_file).enumerate() {
                let name = format!("{prefix}{f:03}");
                for (q, col, tj, tk) in chunk {
                    let query = ColumnKey::new(query_dataset[*q].clone(), format!("q{q:03}"));
                    let candidate = ColumnKey::new(name.clone(), col.name.clone());
                    truth.push(GroundTruthEntry {
                        query: query.clone(),
                        candidate: candidate.clone(),
                        label,
                    });
                    targets.push((query, candidate, label, *tj, *tk));
                }
                files.push(finish_file(
                    name,
                    chunk.iter().map(|(_, c, _, _)| c.clone()).collect(),
                    &pools,
                    cfg.file_size_bytes,
                )?);
            }
            Ok(())
        };
    plant(
        &mut files,
        &candidate_cols,
        CANDIDATES_PER_FILE,
        "sync",
        JoinLabel::Semantic,
    )?;
    plant(
        &mut files,
        &decoy_cols,
        DECOYS_PER_FILE,
        "synx",
        JoinLabel::Syntactic,
    )?;

    // Filler cardinality scales with the byte budget so the planted row
    // count stays well under the per-file size at any configured size.
    let filler_base = (cfg.file_size_bytes / 260).clamp(50, 20_000);
    for f in files.len()..cfg.n_files {
        let mut columns = Vec::new();
        for c in 0..cfg.filler_columns_per_file.max(1) {
            // Deterministic cardinality variation across filler columns.
            let n_fill = (filler_base * 2 / 5
                + ((f as u64 * 131 + c as u64 * 53) % 30) * (filler_base / 50).max(1))
            .max(20);
            let pool = new_pool(&mut pools, n_fill);
            columns.push(PlannedColumn {
                name: format!("t{c}"),
                content: ColumnContent::Slice {
                    pool,
                    start: 0,
                    len: n_fill,
                    repeat: 1,
                },
            });
        }
        files.push(finish_file(
            format!("synf{f:04}"),
            columns,
            &pools,
            cfg.file_size_bytes,
        )?);
    }

    Ok(LakePlan {
        pools,
        files,
        truth,
        targets,
    })
}

fn write_file(dir: &Path, plan: &PlannedFile, pools: &[PoolSpec], seed: u64) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", plan.name));
    let io = |e: std::io::Error| Error::io(&path, e);
    let file = std::fs::File::create(&path).map_err(io)?;
    let mut w = BufWriter::with_capacity(1 << 16, file);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pad = vec![0u8; plan.pad_width as usize];

    let names: Vec<&str> = plan.columns.iter().map(|c| c.name.as_str()).collect();
    writeln!(w, "{}", names.join(",")).map_err(io)?;

    for row in 0..plan.rows {
        for (i, col) in plan.columns.iter().enumerate() {
            if i > 0 {
                w.write_all(b",").map_err(io)?;
            }
            match &col.content {
                ColumnContent::Id => write!(w, "{row}").map_err(io)?,
                ColumnContent::Pad => {
                    if !pad.is_empty() {
                        rng.fill_bytes(&mut pad);
                        for b in &mut pad {
                            *b = b'a' + *b % 26;
                        }
                        w.write_all(&pad).map_err(io)?;
                    }
                }
                ColumnContent::Slice {
                    pool,
                    start,
                    len,
                    repeat,
                } => {
                    if row < len * repeat {
                        pools[*pool].write_cell(&mut w, start + row / repeat).map_err(io)?;
                    }
                }
            }
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(path)
}

/// Generate a synthetic lake under `out_dir`. See the module docs for the
/// construction; the ground truth of planted pairs is written to
/// `out_dir/truth/ground_truth.csv` and, when `verify` is set, every plant is
/// read back and its exact J and K checked against the targets.
pub fn generate_synthetic_lake(
    cfg: &SyntheticLakeConfig,
    out_dir: &Path,
) -> Result<SyntheticLake> {
    let plan = plan_lake(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let files: Vec<PathBuf> = plan
        .files
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            write_file(
                out_dir,
                f,
                &plan.pools,
                cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1)),
            )
        })
        .collect::<Result<_>>()?;

    let truth_path = if plan.truth.is_empty() {
        None
    } else {
        let path = out_dir.join("truth").join("ground_truth.csv");
        write_ground_truth(&plan.truth, &path)?;
        Some(path)
    };

    let mut planted = Vec::new();
    if !plan.targets.is_empty() && cfg.verify {
        let catalog = ingest_directory(out_dir, IngestOptions::default())?;
        let mut cache: std::collections::HashMap<ColumnKey, ColumnValues> =
            std::collections::HashMap::new();
        let mut values_of = |key: &ColumnKey| -> Result<ColumnValues> {
            if let Some(v) = cache.get(key) {
                return Ok(v.clone());
            }
            for (col, v) in catalog.read_dataset(&key.dataset)? {
                cache.insert(ColumnKey::new(col.dataset_id, col.column_name), v);
            }
            cache
                .get(key)
                .cloned()
                .ok_or_else(|| Error::ColumnNotFound {
                    dataset: key.dataset.clone(),
                    column: key.column.clone(),
                })
        };
        for (query, candidate, label, tj, tk) in &plan.targets {
            let m = measure(&values_of(query)?, &values_of(candidate)?)?;
            if (m.j - tj).abs() > PLANT_TOLERANCE || (m.k - tk).abs() > PLANT_TOLERANCE {
                return Err(Error::InfeasibleSchedule(format!(
                    "planted pair {query:?} -> {candidate:?} measured \
                     (J {:.4}, K {:.4}) against targets (J {tj:.4}, K {tk:.4})",
                    m.j, m.k
                )));
            }
            planted.push(PlantedPair {
                query: query.clone(),
                candidate: candidate.clone(),
                label: *label,
                target_j: *tj,
                target_k: *tk,
                measured_j: m.j,
                measured_k: m.k,
            });
        }
    } else {
        planted.extend(plan.targets.iter().map(|(q, c, l, tj, tk)| PlantedPair {
            query: q.clone(),
            candidate: c.clone(),
            label: *l,
            target_j: *tj,
            target_k: *tk,
            measured_j: f64::NAN,
            measured_k: f64::NAN,
        }));
    }

    Ok(SyntheticLake {
        files,
        truth: plan.truth,
        truth_path,
        planted,
    })
}
