//! Exact cosine search over dense embeddings.

use std::collections::HashMap;
use std::path::Path;

use crate::encoder::DenseEmbedding;
use crate::error::{Error, Result};
use crate::hits::{top_k, SearchHit};
use crate::io::{self, Reader};

const MAGIC: &[u8; 8] = b"HSVECIDX";
const VERSION: u32 = 1;

/// Stored vectors must be unit length within this tolerance.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    dim: usize,
    doc_ids: Vec<u32>,
    /// Row-major, one row per entry of `doc_ids`.
    data: Vec<f64>,
    norms: Vec<f64>,
    slots: HashMap<u32, usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl VectorIndex {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            doc_ids: Vec::new(),
            data: Vec::new(),
            norms: Vec::new(),
            slots: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    /// Doc ids in insertion order.
    pub fn doc_ids(&self) -> &[u32] {
        &self.doc_ids
    }

    pub fn get(&self, doc_id: u32) -> Option<&[f64]> {
        let slot = *self.slots.get(&doc_id)?;
        Some(&self.data[slot * self.dim..(slot + 1) * self.dim])
    }

    pub fn add_vector(&mut self, doc_id: u32, embedding: &DenseEmbedding) -> Result<()> {
        if embedding.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: embedding.dim(),
            });
        }
        if self.slots.contains_key(&doc_id) {
            return Err(Error::DuplicateDocument(doc_id));
        }
        let norm = embedding.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "embedding for document {doc_id} has norm {norm}, expected unit length"
            )));
        }
        self.slots.insert(doc_id, self.doc_ids.len());
        self.doc_ids.push(doc_id);
        self.data.extend_from_slice(embedding.values());
        self.norms.push(norm);
        Ok(())
    }

    /// Cosine similarity of `query` with every stored vector, best `k` first.
    pub fn search(&self, query: &DenseEmbedding, k: usize) -> Result<Vec<SearchHit>> {
        if query.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: query.dim(),
            });
        }
        let q_norm = query.norm();
        if q_norm == 0.0 {
            return Err(Error::DegenerateEmbedding);
        }
        let hits = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(slot, &doc_id)| {
                let row = &self.data[slot * self.dim..(slot + 1) * self.dim];
                SearchHit {
                    doc_id,
                    score: dot(query.values(), row) / (q_norm * self.norms[slot]),
                }
            })
            .collect();
        Ok(top_k(hits, k))
    }

    /// Header (magic, version, dimension, count) followed by
    /// `(doc id, dim × f64)` records in insertion order.
    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, |w| {
            io::write_header(w, MAGIC, VERSION)?;
            w.write_all(&(self.dim as u32).to_le_bytes())?;
            w.write_all(&(self.len() as u64).to_le_bytes())?;
            for (slot, doc_id) in self.doc_ids.iter().enumerate() {
                w.write_all(&doc_id.to_le_bytes())?;
                io::write_f64s(w, &self.data[slot * self.dim..(slot + 1) * self.dim])?;
            }
            Ok(())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = Reader::open(path)?;
        r.header(MAGIC, VERSION)?;
        let dim = r.u32()? as usize;
        let count = r.u64()? as usize;
        if count.saturating_mul(4 + dim * 8) != r.remaining() {
            return Err(r.fail("record count disagrees with file size"));
        }
        let mut index = VectorIndex::new(dim);
        for _ in 0..count {
            let doc_id = r.u32()?;
            let values = r.f64s(dim)?;
            index
                .add_vector(doc_id, &DenseEmbedding(values))
                .map_err(|e| Error::format(path, e.to_string()))?;
        }
        r.finish()?;
        Ok(index)
    }
}
