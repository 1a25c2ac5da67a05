//! Static word-vector lookup and padded review matrices.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::corpus::Vocabulary;
use crate::error::{NapError, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 300;
pub const DEFAULT_MAX_LEN: usize = 200;
/// Range of the uniform draw for words missing from the pretrained file.
pub const OOV_INIT_RANGE: f64 = 0.05;

/// `|V| x d` row-major table. Never mutated after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    rows: Vec<f64>,
}

impl EmbeddingTable {
    pub fn from_rows(dim: usize, rows: Vec<f64>) -> Result<Self> {
        if dim == 0 || !rows.len().is_multiple_of(dim) {
            return Err(NapError::shape(format!(
                "{} values do not form rows of width {dim}",
                rows.len()
            )));
        }
        Ok(Self { dim, rows })
    }

    /// Every row uniform in `[-0.05, 0.05]` except `<PAD>`, which is zero.
    pub fn random(vocab: &Vocabulary, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<f64> = (0..vocab.len() * dim)
            .map(|_| rng.gen_range(-OOV_INIT_RANGE..=OOV_INIT_RANGE))
            .collect();
        let pad = vocab.pad_index() as usize;
        rows[pad * dim..(pad + 1) * dim].fill(0.0);
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, idx: u32) -> Option<&[f64]> {
        let start = idx as usize * self.dim;
        self.rows.get(start..start + self.dim)
    }

    /// Content digest, used to show the table is untouched by training.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.rows {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Load a whitespace-separated `token v1 .. vd` text file.
///
/// Vocabulary tokens found in the file take their pretrained row. All other
/// rows (including the specials) keep a seeded uniform draw, and `<PAD>` is
/// zero.
pub fn load_embedding_table(
    path: &Path,
    vocab: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| NapError::io(path, e))?;
    let mut table = EmbeddingTable::random(vocab, dim, seed);
    let mut seen = vec![false; vocab.len()];
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| NapError::io(path, e))?;
        let mut cols = line.split_whitespace();
        let Some(token) = cols.next() else { continue };
        let values: Vec<&str> = cols.collect();
        let err = |message: String| NapError::Parse {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        if values.len() != dim {
            return Err(err(format!(
                "expected {dim} values for {token:?}, found {}",
                values.len()
            )));
        }
        let parsed = values
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| err(format!("non-numeric value for {token:?}: {e}")))?;
        if let Some(idx) = vocab.index_of(token) {
            let idx = idx as usize;
            if idx == vocab.pad_index() as usize || seen[idx] {
                continue;
            }
            seen[idx] = true;
            table.rows[idx * dim..(idx + 1) * dim].copy_from_slice(&parsed);
        }
    }
    Ok(table)
}

/// `max_len x d` review matrix with a padding mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewMatrix {
    dim: usize,
    data: Vec<f64>,
    mask: Vec<bool>,
    len: usize,
}

impl ReviewMatrix {
    pub fn from_rows(dim: usize, max_len: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() > max_len {
            return Err(NapError::shape("more rows than max_len"));
        }
        let mut data = vec![0.0; max_len * dim];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(NapError::shape(format!("row {i} has width {}", r.len())));
            }
            data[i * dim..(i + 1) * dim].copy_from_slice(r);
        }
        let mut mask = vec![false; max_len];
        mask[..rows.len()].fill(true);
        Ok(Self {
            dim,
            data,
            mask,
            len: rows.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_len(&self) -> usize {
        self.mask.len()
    }

    /// Number of real (unmasked) rows.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Look up each token row; keeps the first `max_len` tokens.
pub fn embed_review(tokens: &[u32], table: &EmbeddingTable, max_len: usize) -> Result<ReviewMatrix> {
    let dim = table.dim();
    let len = tokens.len().min(max_len);
    let mut data = vec![0.0; max_len * dim];
    for (i, &t) in tokens[..len].iter().enumerate() {
        let row = table
            .row(t)
            .ok_or_else(|| NapError::data(format!("token outside vocabulary: index {t}")))?;
        data[i * dim..(i + 1) * dim].copy_from_slice(row);
    }
    let mut mask = vec![false; max_len];
    mask[..len].fill(true);
    Ok(ReviewMatrix {
        dim,
        data,
        mask,
        len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;
    use std::io::Write;

    fn vocab() -> Vocabulary {
        let corpus = [vec!["cat".to_string(), "dog".to_string(), "cat".to_string()]];
        build_vocabulary(corpus.iter().map(Vec::as_slice), 10).unwrap()
    }

    #[test]
    fn loads_pretrained_rows_and_zero_pad() {
        let v = vocab();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "cat 0.1 0.2 0.3").unwrap();
        writeln!(f, "zebra 1 1 1").unwrap();
        let t = load_embedding_table(f.path(), &v, 3, 7).unwrap();
        assert_eq!(t.row(v.index_of("cat").unwrap()).unwrap(), &[0.1, 0.2, 0.3]);
        assert!(t.row(v.pad_index()).unwrap().iter().all(|&x| x == 0.0));
        let dog = t.row(v.index_of("dog").unwrap()).unwrap();
        assert!(dog.iter().all(|x| x.abs() <= OOV_INIT_RANGE));
        assert_eq!(t, load_embedding_table(f.path(), &v, 3, 7).unwrap());
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let v = vocab();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "cat 0.1 0.2 0.3").unwrap();
        writeln!(f, "dog 0.1 0.2").unwrap();
        let err = load_embedding_table(f.path(), &v, 3, 0).unwrap_err();
        assert!(matches!(err, NapError::Parse { line: 2, .. }), "{err}");

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "cat 0.1 x 0.3").unwrap();
        let err = load_embedding_table(f.path(), &v, 3, 0).unwrap_err();
        assert!(matches!(err, NapError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn embed_pads_and_truncates() {
        let v = vocab();
        let t = EmbeddingTable::random(&v, 4, 1);
        let cat = v.index_of("cat").unwrap();
        let dog = v.index_of("dog").unwrap();

        let x = embed_review(&[cat], &t, 5).unwrap();
        assert_eq!(x.row(0), t.row(cat).unwrap());
        assert_eq!(x.mask(), &[true, false, false, false, false]);
        assert!(x.as_slice()[4..].iter().all(|&v| v == 0.0));

        let x = embed_review(&[cat, dog, cat], &t, 2).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(x.row(1), t.row(dog).unwrap());

        let x = embed_review(&[], &t, 3).unwrap();
        assert!(x.is_empty() && x.mask().iter().all(|m| !m));

        assert!(embed_review(&[999], &t, 3).is_err());
    }
}
