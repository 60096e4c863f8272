//! Problem container: free scalar variables against affine PSD blocks.

use ndarray::Array2;

use crate::{Error, Result};

/// Sparse real symmetric matrix stored as explicit `(row, col, value)`
/// triplets. Both triangles are stored; construction from a dense matrix
/// enforces symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    pub dim: usize,
    pub entries: Vec<(u32, u32, f64)>,
}

impl SparseSym {
    pub fn zeros(dim: usize) -> Self {
        SparseSym { dim, entries: Vec::new() }
    }

    /// Capture the nonzero pattern of a dense symmetric matrix.
    pub fn from_dense(m: &Array2<f64>, tol: f64) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::InvalidInput(format!("matrix is {r}x{c}, not square")));
        }
        let mut asym: f64 = 0.0;
        for i in 0..r {
            for j in 0..i {
                asym = asym.max((m[[i, j]] - m[[j, i]]).abs());
            }
        }
        if asym > tol {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric: max |M - M^T| = {asym:.3e}"
            )));
        }
        let mut entries = Vec::new();
        for i in 0..r {
            for j in 0..r {
                let v = 0.5 * (m[[i, j]] + m[[j, i]]);
                if v != 0.0 {
                    entries.push((i as u32, j as u32, v));
                }
            }
        }
        Ok(SparseSym { dim: r, entries })
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for &(i, j, v) in &self.entries {
            m[[i as usize, j as usize]] += v;
        }
        m
    }

    /// `out += scale * self`, with `out` in dense row-major storage.
    pub fn add_scaled_into(&self, out: &mut Array2<f64>, scale: f64) {
        for &(i, j, v) in &self.entries {
            out[[i as usize, j as usize]] += scale * v;
        }
    }

    /// Frobenius inner product with a dense matrix.
    pub fn dot_dense(&self, m: &Array2<f64>) -> f64 {
        let mut acc = 0.0;
        for &(i, j, v) in &self.entries {
            acc += v * m[[i as usize, j as usize]];
        }
        acc
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|&(_, _, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

/// Metadata attached to a block so downstream consumers can recognize what
/// the dual certificate of that block means.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockMeta {
    /// Human-readable tag, e.g. `"moment"` or `"pair(0,3)"`.
    pub label: String,
    /// Set when the block is the PSD constraint of a cluster pair.
    pub pair: Option<(usize, usize)>,
    /// True when the block is `embed_hermitian` of a complex Hermitian
    /// operator; the dual must be de-embedded before interpretation.
    pub complex_embedded: bool,
}

/// One affine PSD constraint `F0 + Σ_i x_i F_i ⪰ 0`.
#[derive(Debug, Clone)]
pub struct Block {
    pub dim: usize,
    pub f0: SparseSym,
    /// Sparse list of `(variable index, coefficient matrix)`.
    pub terms: Vec<(usize, SparseSym)>,
    pub meta: BlockMeta,
}

/// Dual-form block SDP: maximize `objective · x` subject to every block
/// being PSD.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<Block>,
}

impl ConicProblem {
    pub fn new(num_vars: usize, objective: Vec<f64>) -> Result<Self> {
        if objective.len() != num_vars {
            return Err(Error::InvalidInput(format!(
                "objective has length {} but num_vars is {num_vars}",
                objective.len()
            )));
        }
        Ok(ConicProblem { num_vars, objective, blocks: Vec::new() })
    }

    pub fn add_block(&mut self, block: Block) -> Result<()> {
        if block.dim == 0 {
            return Err(Error::InvalidInput("block dimension must be >= 1".into()));
        }
        if block.f0.dim != block.dim {
            return Err(Error::InvalidInput("F0 dimension mismatch".into()));
        }
        for (var, f) in &block.terms {
            if *var >= self.num_vars {
                return Err(Error::InvalidInput(format!(
                    "block references variable {var} out of {}",
                    self.num_vars
                )));
            }
            if f.dim != block.dim {
                return Err(Error::InvalidInput("coefficient matrix dimension mismatch".into()));
            }
        }
        self.blocks.push(block);
        Ok(())
    }

    /// The homogeneous tolerance scale `1 + max_k ||F0_k||_F`.
    pub fn scale(&self) -> f64 {
        1.0 + self
            .blocks
            .iter()
            .map(|b| b.f0.norm_fro())
            .fold(0.0, f64::max)
    }

    /// Every variable must be referenced by at least one block; a variable
    /// appearing only in the objective makes the problem unbounded.
    pub fn validate(&self) -> Result<()> {
        let mut referenced = vec![false; self.num_vars];
        for b in &self.blocks {
            for (var, _) in &b.terms {
                referenced[*var] = true;
            }
        }
        if let Some(i) = referenced.iter().position(|r| !r) {
            return Err(Error::InvalidInput(format!(
                "variable {i} is not referenced by any block"
            )));
        }
        if self.blocks.is_empty() {
            return Err(Error::InvalidInput("problem has no blocks".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn from_dense_rejects_asymmetric() {
        let m = array![[1.0, 2.0], [0.0, 1.0]];
        assert!(SparseSym::from_dense(&m, 1e-12).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let m = array![[1.0, 0.5, 0.0], [0.5, -2.0, 3.0], [0.0, 3.0, 0.25]];
        let s = SparseSym::from_dense(&m, 1e-12).unwrap();
        assert_eq!(s.to_dense(), m);
        assert_eq!(s.nnz(), 7);
    }

    #[test]
    fn validate_catches_unreferenced_variable() {
        let mut p = ConicProblem::new(2, vec![1.0, 0.0]).unwrap();
        let f = SparseSym::from_dense(&array![[1.0]], 1e-12).unwrap();
        p.add_block(Block {
            dim: 1,
            f0: SparseSym::zeros(1),
            terms: vec![(0, f)],
            meta: BlockMeta::default(),
        })
        .unwrap();
        assert!(p.validate().is_err());
    }
}
