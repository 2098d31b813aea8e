use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `n × K` matrix of ±1 codes, packed one bit per coordinate (set = +1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    n: usize,
    k_bits: usize,
    words: usize,
    bits: Vec<u64>,
}

impl CodeMatrix {
    /// Signs of `embeddings`, with `sign(0) = +1`.
    pub fn from_embeddings(embeddings: &Matrix) -> Self {
        let signs: Vec<Vec<bool>> = (0..embeddings.rows())
            .map(|r| embeddings.row(r).iter().map(|&x| x >= 0.0).collect())
            .collect();
        CodeMatrix::from_bools(embeddings.cols(), &signs).expect("rows share the embedding width")
    }

    /// Rows of `true` (+1) / `false` (−1).
    pub fn from_bools(k_bits: usize, rows: &[Vec<bool>]) -> Result<Self> {
        if k_bits == 0 {
            return Err(Error::invalid("codes need at least one bit"));
        }
        let words = k_bits.div_ceil(64);
        let mut bits = vec![0u64; rows.len() * words];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != k_bits {
                return Err(Error::invalid(format!("code row {r} has {} bits, expected {k_bits}", row.len())));
            }
            for (c, &b) in row.iter().enumerate() {
                if b {
                    bits[r * words + c / 64] |= 1 << (c % 64);
                }
            }
        }
        Ok(CodeMatrix {
            n: rows.len(),
            k_bits,
            words,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn k_bits(&self) -> usize {
        self.k_bits
    }

    /// Coordinate `c` of row `r` as ±1.
    pub fn get(&self, r: usize, c: usize) -> i8 {
        if self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn row_signs(&self, r: usize) -> Vec<i8> {
        (0..self.k_bits).map(|c| self.get(r, c)).collect()
    }

    pub fn row_bools(&self, r: usize) -> Vec<bool> {
        (0..self.k_bits).map(|c| self.get(r, c) == 1).collect()
    }

    /// Rows as `f64` ±1 values.
    pub fn to_matrix(&self) -> Matrix {
        let data = (0..self.n)
            .flat_map(|r| (0..self.k_bits).map(move |c| (r, c)))
            .map(|(r, c)| f64::from(self.get(r, c)))
            .collect();
        Matrix::from_vec(self.n, self.k_bits, data).expect("shape is n x K")
    }

    fn words_of(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    /// Hamming distance between row `r` here and row `s` of `other`.
    pub fn hamming(&self, r: usize, other: &CodeMatrix, s: usize) -> u32 {
        self.words_of(r)
            .iter()
            .zip(other.words_of(s))
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Same codes with coordinates reordered: new coordinate `c` is old `perm[c]`.
    pub fn permute_bits(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k_bits {
            return Err(Error::invalid("permutation length differs from K"));
        }
        let rows: Vec<Vec<bool>> = (0..self.n)
            .map(|r| perm.iter().map(|&p| self.get(r, p) == 1).collect())
            .collect();
        CodeMatrix::from_bools(self.k_bits, &rows)
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let rows: Vec<Vec<bool>> = indices.iter().map(|&r| self.row_bools(r)).collect();
        CodeMatrix::from_bools(self.k_bits, &rows).expect("rows come from a valid code matrix")
    }
}
