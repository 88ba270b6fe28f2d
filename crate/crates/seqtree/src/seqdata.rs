//! Labeled fixed-length DNA sequence datasets: loading, synthesis, encoding,
//! and train/test splitting.
//!
//! Datasets are immutable after construction and safe to share across
//! threads. The encoders are pure functions over rows.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// The four nucleotide bases, in canonical column order.
pub const BASES: [u8; 4] = *b"ACGT";

/// Errors raised while loading, generating, or slicing datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("missing required column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}: label `{value}` is not 0 or 1")]
    InvalidLabel { row: usize, value: String },
    #[error("row {row}: sequence length {found} does not match expected {expected}")]
    RaggedLength {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("row {row}: invalid character `{ch}` (alphabet is A,C,G,T)")]
    InvalidChar { row: usize, ch: char },
    #[error("dataset is empty")]
    Empty,
    #[error("invalid motif: {0}")]
    BadMotif(String),
    #[error("requested {n} sequences; need at least 2")]
    TooFew { n: usize },
    #[error("balance unsatisfiable for motif `{motif}` after {attempts} attempts")]
    BalanceUnsatisfiable { motif: String, attempts: usize },
    #[error("k={k} out of range for seq_len={seq_len}")]
    KOutOfRange { k: usize, seq_len: usize },
    #[error("test fraction {0} must be strictly between 0 and 1")]
    BadTestFraction(f64),
    #[error("split produces an empty side (n={n}, test_frac={test_frac})")]
    DegenerateSplit { n: usize, test_frac: f64 },
}

/// A validated set of fixed-length DNA sequences with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDataset {
    sequences: Vec<String>,
    labels: Vec<u8>,
    seq_len: usize,
    name: String,
}

impl SequenceDataset {
    /// Build a dataset, validating lengths, alphabet, and label values.
    pub fn new(
        name: impl Into<String>,
        sequences: Vec<String>,
        labels: Vec<u8>,
    ) -> Result<Self, DataError> {
        if sequences.is_empty() {
            return Err(DataError::Empty);
        }
        assert_eq!(
            sequences.len(),
            labels.len(),
            "sequences and labels must be aligned"
        );
        let seq_len = sequences[0].len();
        for (row, seq) in sequences.iter().enumerate() {
            if seq.len() != seq_len {
                return Err(DataError::RaggedLength {
                    row,
                    found: seq.len(),
                    expected: seq_len,
                });
            }
            if let Some(ch) = seq.chars().find(|c| !matches!(c, 'A' | 'C' | 'G' | 'T')) {
                return Err(DataError::InvalidChar { row, ch });
            }
        }
        for (row, &label) in labels.iter().enumerate() {
            if label > 1 {
                return Err(DataError::InvalidLabel {
                    row,
                    value: label.to_string(),
                });
            }
        }
        Ok(Self {
            sequences,
            labels,
            seq_len,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sequence(&self, row: usize) -> &str {
        &self.sequences[row]
    }

    pub fn label(&self, row: usize) -> u8 {
        self.labels[row]
    }

    pub fn sequences(&self) -> &[String] {
        &self.sequences
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// A subset covering every row, in order.
    pub fn full_subset(&self) -> SubsetRef<'_> {
        SubsetRef {
            parent: self,
            indices: (0..self.len() as u32).collect(),
        }
    }

    /// Write the dataset as `raw_sequence,label` CSV.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let path = path.as_ref();
        let mut out = String::with_capacity(self.len() * (self.seq_len + 3) + 20);
        out.push_str("raw_sequence,label\n");
        for (seq, label) in self.sequences.iter().zip(&self.labels) {
            out.push_str(seq);
            out.push(',');
            out.push_str(if *label == 1 { "1" } else { "0" });
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// A view over a subset of a dataset's rows.
#[derive(Debug, Clone)]
pub struct SubsetRef<'a> {
    parent: &'a SequenceDataset,
    indices: Vec<u32>,
}

impl<'a> SubsetRef<'a> {
    /// Build a subset from explicit row indices. Indices must be unique and
    /// in range; this is the caller's responsibility.
    pub fn new(parent: &'a SequenceDataset, indices: Vec<u32>) -> Self {
        debug_assert!(indices.iter().all(|&i| (i as usize) < parent.len()));
        Self { parent, indices }
    }

    pub fn parent(&self) -> &'a SequenceDataset {
        self.parent
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn sequences(&self) -> impl Iterator<Item = &'a str> + '_ {
        self.indices
            .iter()
            .map(move |&i| self.parent.sequence(i as usize))
    }

    pub fn labels(&self) -> impl Iterator<Item = u8> + '_ {
        self.indices.iter().map(move |&i| self.parent.label(i as usize))
    }

    /// (count of label 0, count of label 1) over the subset.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones: usize = self.labels().map(|l| l as usize).sum();
        (self.len() - ones, ones)
    }
}

/// A dense row-major feature matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub col_names: Vec<String>,
}

impl EncodedMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }
}

impl fmt::Display for EncodedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EncodedMatrix[{}x{}]", self.rows, self.cols)
    }
}

/// Load a dataset from a CSV file with a `raw_sequence,label` header.
///
/// The sequence length is inferred from the first row; later rows must
/// match it exactly. Labels must parse as 0 or 1.
pub fn load_csv(path: impl AsRef<Path>) -> Result<SequenceDataset, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|source| match source.kind() {
            csv::ErrorKind::Io(_) => {
                if let csv::ErrorKind::Io(io) = source.into_kind() {
                    DataError::Io {
                        path: display.clone(),
                        source: io,
                    }
                } else {
                    unreachable!()
                }
            }
            _ => DataError::Csv {
                path: display.clone(),
                source,
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|source| DataError::Csv {
            path: display.clone(),
            source,
        })?
        .clone();
    let seq_col = headers
        .iter()
        .position(|h| h == "raw_sequence")
        .ok_or_else(|| DataError::MissingColumn("raw_sequence".into()))?;
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| DataError::MissingColumn("label".into()))?;

    let mut sequences = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|source| DataError::Csv {
            path: display.clone(),
            source,
        })?;
        let seq = record.get(seq_col).unwrap_or("").to_string();
        let label_text = record.get(label_col).unwrap_or("");
        let label = match label_text.trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(DataError::InvalidLabel {
                    row,
                    value: other.to_string(),
                })
            }
        };
        sequences.push(seq);
        labels.push(label);
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    SequenceDataset::new(name, sequences, labels)
}

/// Read just the `raw_sequence` column of a CSV; a `label` column is not
/// required. Used to feed prediction, which validates each sequence
/// against the tree itself.
pub fn load_csv_sequences(path: impl AsRef<Path>) -> Result<Vec<String>, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| DataError::Csv {
            path: display.clone(),
            source,
        })?;
    let headers = reader
        .headers()
        .map_err(|source| DataError::Csv {
            path: display.clone(),
            source,
        })?
        .clone();
    let seq_col = headers
        .iter()
        .position(|h| h == "raw_sequence")
        .ok_or_else(|| DataError::MissingColumn("raw_sequence".into()))?;
    let mut sequences = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| DataError::Csv {
            path: display.clone(),
            source,
        })?;
        sequences.push(record.get(seq_col).unwrap_or("").to_string());
    }
    Ok(sequences)
}

/// Options controlling [`synth_motif`] balance behavior.
#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    /// Uniform draws attempted per requested row before switching to the
    /// constructive sampler for whichever class is still short.
    pub draws_per_row: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { draws_per_row: 50 }
    }
}

/// Generate `n` random sequences of length `seq_len`, labeled 1 iff `motif`
/// occurs as a contiguous substring. Deterministic given `seed`.
///
/// With `balance` set, rows are drawn by rejection until each class quota
/// (`n/2` positives, the remainder negatives) is filled. If one class is too
/// rare for rejection to fill within the attempt budget, remaining rows of
/// that class are constructed directly: positives by planting the motif at a
/// random offset, negatives by mutating occurrences until the motif is
/// absent. Labels always equal substring presence on the emitted rows.
pub fn synth_motif(
    n: usize,
    seq_len: usize,
    motif: &str,
    balance: bool,
    seed: u64,
    options: SynthOptions,
) -> Result<SequenceDataset, DataError> {
    if motif.is_empty() || motif.len() > seq_len {
        return Err(DataError::BadMotif(format!(
            "motif length {} must be in 1..={}",
            motif.len(),
            seq_len
        )));
    }
    if motif.chars().any(|c| !matches!(c, 'A' | 'C' | 'G' | 'T')) {
        return Err(DataError::BadMotif(format!(
            "motif `{motif}` contains non-ACGT characters"
        )));
    }
    if n < 2 {
        return Err(DataError::TooFew { n });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let motif_bytes = motif.as_bytes();
    let name = format!("synth_{motif}_{seq_len}_{n}");

    if !balance {
        let mut sequences = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let seq = random_seq(&mut rng, seq_len);
            labels.push(contains_motif(seq.as_bytes(), motif_bytes) as u8);
            sequences.push(seq);
        }
        return SequenceDataset::new(name, sequences, labels);
    }

    let target_pos = n / 2;
    let target_neg = n - target_pos;
    let mut pos: Vec<String> = Vec::with_capacity(target_pos);
    let mut neg: Vec<String> = Vec::with_capacity(target_neg);
    let budget = options.draws_per_row.saturating_mul(n).max(n);
    let mut draws = 0usize;
    while (pos.len() < target_pos || neg.len() < target_neg) && draws < budget {
        draws += 1;
        let seq = random_seq(&mut rng, seq_len);
        if contains_motif(seq.as_bytes(), motif_bytes) {
            if pos.len() < target_pos {
                pos.push(seq);
            }
        } else if neg.len() < target_neg {
            neg.push(seq);
        }
    }
    while pos.len() < target_pos {
        pos.push(plant_motif(&mut rng, seq_len, motif_bytes));
    }
    while neg.len() < target_neg {
        neg.push(erase_motif(&mut rng, seq_len, motif_bytes).ok_or_else(|| {
            DataError::BalanceUnsatisfiable {
                motif: motif.to_string(),
                attempts: budget,
            }
        })?);
    }

    // Interleave deterministically, then shuffle so class order carries no
    // positional signal.
    let mut sequences: Vec<(String, u8)> = pos
        .into_iter()
        .map(|s| (s, 1u8))
        .chain(neg.into_iter().map(|s| (s, 0u8)))
        .collect();
    sequences.shuffle(&mut rng);
    let (sequences, labels) = sequences.into_iter().unzip();
    SequenceDataset::new(name, sequences, labels)
}

fn random_seq(rng: &mut ChaCha8Rng, seq_len: usize) -> String {
    let bytes: Vec<u8> = (0..seq_len)
        .map(|_| BASES[rng.gen_range(0..4)])
        .collect();
    String::from_utf8(bytes).expect("bases are ASCII")
}

/// Substring scan; used both for labeling and as the balance predicate.
fn contains_motif(seq: &[u8], motif: &[u8]) -> bool {
    seq.windows(motif.len()).any(|w| w == motif)
}

fn plant_motif(rng: &mut ChaCha8Rng, seq_len: usize, motif: &[u8]) -> String {
    let mut seq = random_seq(rng, seq_len).into_bytes();
    let at = rng.gen_range(0..=seq_len - motif.len());
    seq[at..at + motif.len()].copy_from_slice(motif);
    String::from_utf8(seq).expect("bases are ASCII")
}

fn erase_motif(rng: &mut ChaCha8Rng, seq_len: usize, motif: &[u8]) -> Option<String> {
    let mut seq = random_seq(rng, seq_len).into_bytes();
    for _ in 0..64 * seq_len {
        let Some(at) = (0..=seq.len() - motif.len()).find(|&p| &seq[p..p + motif.len()] == motif)
        else {
            return Some(String::from_utf8(seq).expect("bases are ASCII"));
        };
        // Flip one position inside the occurrence to a differing base.
        let p = at + rng.gen_range(0..motif.len());
        let current = seq[p];
        let replacement = loop {
            let b = BASES[rng.gen_range(0..4)];
            if b != current {
                break b;
            }
        };
        seq[p] = replacement;
    }
    None
}

/// One-hot encode each position. Column order is position-major with bases
/// ordered A,C,G,T: (pos0:A, pos0:C, pos0:G, pos0:T, pos1:A, ...).
pub fn one_hot(ds: &SequenceDataset) -> EncodedMatrix {
    let cols = 4 * ds.seq_len();
    let mut values = vec![0.0f64; ds.len() * cols];
    for (row, seq) in ds.sequences().iter().enumerate() {
        for (pos, &b) in seq.as_bytes().iter().enumerate() {
            let base_idx = base_index(b);
            values[row * cols + pos * 4 + base_idx] = 1.0;
        }
    }
    let col_names = (0..ds.seq_len())
        .flat_map(|p| BASES.iter().map(move |&b| format!("pos{}:{}", p, b as char)))
        .collect();
    EncodedMatrix {
        rows: ds.len(),
        cols,
        values,
        col_names,
    }
}

pub(crate) fn base_index(b: u8) -> usize {
    match b {
        b'A' => 0,
        b'C' => 1,
        b'G' => 2,
        b'T' => 3,
        _ => unreachable!("dataset alphabet is validated"),
    }
}

/// Count overlapping occurrences of every k-mer, columns in lexicographic
/// order. Row sums equal `seq_len - k + 1`.
pub fn kmer_counts(ds: &SequenceDataset, k: usize) -> Result<EncodedMatrix, DataError> {
    if k == 0 || k > ds.seq_len() {
        return Err(DataError::KOutOfRange {
            k,
            seq_len: ds.seq_len(),
        });
    }
    let cols = 4usize.pow(k as u32);
    let mut values = vec![0.0f64; ds.len() * cols];
    let mask = cols / 4; // high-digit divisor for the rolling code
    for (row, seq) in ds.sequences().iter().enumerate() {
        let bytes = seq.as_bytes();
        let mut code = 0usize;
        for (pos, &b) in bytes.iter().enumerate() {
            code = (code % mask) * 4 + base_index(b);
            if pos + 1 >= k {
                values[row * cols + code] += 1.0;
            }
        }
    }
    let col_names = (0..cols).map(|c| kmer_name(c, k)).collect();
    Ok(EncodedMatrix {
        rows: ds.len(),
        cols,
        values,
        col_names,
    })
}

/// The k-mer spelled by a lexicographic column index.
pub fn kmer_name(mut code: usize, k: usize) -> String {
    let mut out = vec![b'A'; k];
    for slot in out.iter_mut().rev() {
        *slot = BASES[code % 4];
        code /= 4;
    }
    String::from_utf8(out).expect("bases are ASCII")
}

/// Deterministically partition a dataset into (train, test).
///
/// The test side receives `round(n * test_frac)` rows chosen by a seeded
/// shuffle; indices are sorted within each side so row order is stable.
pub fn train_test_split(
    ds: &SequenceDataset,
    test_frac: f64,
    seed: u64,
) -> Result<(SequenceDataset, SequenceDataset), DataError> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(DataError::BadTestFraction(test_frac));
    }
    let n = ds.len();
    let test_n = (n as f64 * test_frac).round() as usize;
    if test_n == 0 || test_n >= n {
        return Err(DataError::DegenerateSplit { n, test_frac });
    }
    let mut ix: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ix.shuffle(&mut rng);
    let mut test_ix = ix[..test_n].to_vec();
    let mut train_ix = ix[test_n..].to_vec();
    test_ix.sort_unstable();
    train_ix.sort_unstable();

    let take = |ids: &[usize], suffix: &str| {
        let sequences = ids.iter().map(|&i| ds.sequence(i).to_string()).collect();
        let labels = ids.iter().map(|&i| ds.label(i)).collect();
        SequenceDataset::new(format!("{}_{suffix}", ds.name()), sequences, labels)
    };
    Ok((take(&train_ix, "train")?, take(&test_ix, "test")?))
}
