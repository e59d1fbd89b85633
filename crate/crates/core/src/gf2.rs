//! Dense matrices over GF(2), row-major, 64 columns per word.

use serde::{Deserialize, Serialize};

use crate::channel::{pack_bits, unpack_bits};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: Vec<u64>,
}

fn words_per_row(cols: usize) -> usize {
    cols.div_ceil(64)
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, words: vec![0; rows * words_per_row(cols)] }
    }

    pub fn from_rows(rows: &[Vec<bool>], cols: usize) -> Self {
        let mut words = Vec::with_capacity(rows.len() * words_per_row(cols));
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            words.extend(pack_words(row));
        }
        Self { rows: rows.len(), cols, words }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn wpr(&self) -> usize {
        words_per_row(self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        let w = self.words[r * self.wpr() + c / 64];
        (w >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let wpr = self.wpr();
        let w = &mut self.words[r * wpr + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `self · x` over GF(2).
    pub fn mul_vec(&self, x: &[bool]) -> Vec<bool> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        let packed = pack_words(x);
        let wpr = self.wpr();
        (0..self.rows)
            .map(|r| {
                let row = &self.words[r * wpr..(r + 1) * wpr];
                row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
            })
            .collect()
    }

    /// Submatrix keeping the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Rows of `self` followed by rows of `below`.
    pub fn stack(&self, below: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, below.cols, "column mismatch");
        let mut words = self.words.clone();
        words.extend_from_slice(&below.words);
        BitMatrix { rows: self.rows + below.rows, cols: self.cols, words }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce(None).len()
    }

    /// Gauss–Jordan elimination in place, optionally carrying a right-hand
    /// side. Returns the pivot column of each leading row.
    fn row_reduce(&mut self, mut rhs: Option<&mut Vec<bool>>) -> Vec<usize> {
        let wpr = self.wpr();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            if p != lead {
                for w in 0..wpr {
                    self.words.swap(p * wpr + w, lead * wpr + w);
                }
                if let Some(b) = rhs.as_deref_mut() {
                    b.swap(p, lead);
                }
            }
            for r in 0..self.rows {
                if r != lead && self.get(r, c) {
                    for w in 0..wpr {
                        let v = self.words[lead * wpr + w];
                        self.words[r * wpr + w] ^= v;
                    }
                    if let Some(b) = rhs.as_deref_mut() {
                        b[r] ^= b[lead];
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    /// Solution set of `self · x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[bool]) -> Option<AffineSolution> {
        assert_eq!(b.len(), self.rows, "rhs length mismatch");
        let mut m = self.clone();
        let mut rhs = b.to_vec();
        let pivots = m.row_reduce(Some(&mut rhs));
        if rhs[pivots.len()..].iter().any(|&v| v) {
            return None;
        }
        let mut particular = vec![false; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            particular[c] = rhs[r];
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let kernel = free
            .iter()
            .map(|&f| {
                let mut v = vec![false; self.cols];
                v[f] = true;
                for (r, &c) in pivots.iter().enumerate() {
                    v[c] = m.get(r, f);
                }
                v
            })
            .collect();
        Some(AffineSolution { particular, kernel })
    }

    /// Row-major bits, most significant bit first, continuous across rows.
    pub fn packed_bits(&self) -> Vec<u8> {
        let bits: Vec<bool> =
            (0..self.rows).flat_map(|r| (0..self.cols).map(move |c| (r, c))).map(|(r, c)| self.get(r, c)).collect();
        pack_bits(&bits)
    }

    pub fn from_packed_bits(rows: usize, cols: usize, bytes: &[u8]) -> Option<BitMatrix> {
        let bits = unpack_bits(bytes, rows * cols)?;
        let mut m = BitMatrix::zeros(rows, cols);
        for (i, b) in bits.into_iter().enumerate() {
            m.set(i / cols.max(1), i % cols.max(1), b);
        }
        Some(m)
    }
}

fn pack_words(x: &[bool]) -> Vec<u64> {
    let mut out = vec![0u64; words_per_row(x.len())];
    for (i, &b) in x.iter().enumerate() {
        if b {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

/// `particular + span(kernel)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<bool>,
    pub kernel: Vec<Vec<bool>>,
}

impl AffineSolution {
    /// Solution selected by `coeffs` (one bit per kernel vector).
    pub fn combine(&self, coeffs: &[bool]) -> Vec<bool> {
        let mut out = self.particular.clone();
        for (v, _) in self.kernel.iter().zip(coeffs).filter(|(_, &c)| c) {
            for (o, &b) in out.iter_mut().zip(v) {
                *o ^= b;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: &[&str]) -> BitMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.chars().map(|c| c == '1').collect()).collect();
        BitMatrix::from_rows(&rows, cols)
    }

    #[test]
    fn hand_product() {
        let a = matrix(&["10", "11"]);
        assert_eq!(a.mul_vec(&[true, true]), vec![true, false]);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(matrix(&["10", "01"]).rank(), 2);
        assert_eq!(matrix(&["11", "11"]).rank(), 1);
        assert_eq!(BitMatrix::zeros(3, 4).rank(), 0);
        assert_eq!(BitMatrix::zeros(0, 4).rank(), 0);
    }

    #[test]
    fn inconsistent_system() {
        let a = matrix(&["11", "11"]);
        assert!(a.solve(&[true, false]).is_none());
        let sol = a.solve(&[true, true]).unwrap();
        assert_eq!(sol.kernel.len(), 1);
    }

    #[test]
    fn wide_matrices_cross_word_boundaries() {
        let cols = 130;
        let mut a = BitMatrix::zeros(2, cols);
        a.set(0, 0, true);
        a.set(0, 129, true);
        a.set(1, 64, true);
        let mut x = vec![false; cols];
        x[129] = true;
        x[64] = true;
        assert_eq!(a.mul_vec(&x), vec![true, true]);
        let bytes = a.packed_bits();
        assert_eq!(BitMatrix::from_packed_bits(2, cols, &bytes).unwrap(), a);
    }

    proptest! {
        #[test]
        fn solutions_satisfy_system(
            rows in 1usize..6, cols in 1usize..8,
            seed in proptest::collection::vec(any::<bool>(), 48),
            x in proptest::collection::vec(any::<bool>(), 8),
            coeffs in proptest::collection::vec(any::<bool>(), 8),
        ) {
            let data: Vec<Vec<bool>> = (0..rows).map(|r| seed[r * cols..(r + 1) * cols].to_vec()).collect();
            let a = BitMatrix::from_rows(&data, cols);
            let x = &x[..cols];
            let b = a.mul_vec(x);
            let sol = a.solve(&b).expect("consistent by construction");
            prop_assert_eq!(sol.kernel.len(), cols - a.rank());
            let y = sol.combine(&coeffs[..sol.kernel.len()]);
            prop_assert_eq!(a.mul_vec(&y), b);
        }
    }
}
