//! Compressed-sparse-row storage and the few kernels the pipeline needs.

use nalgebra::DMatrix;

use crate::par;

/// Row-compressed sparse matrix of `f64`. Column indices within a row are
/// strictly increasing and no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Binary matrix with a one at every listed coordinate. Duplicates collapse.
    pub fn from_pattern(n_rows: usize, n_cols: usize, coords: &[(usize, usize)]) -> Self {
        let triplets: Vec<_> = coords.iter().map(|&(r, c)| (r, c, 1.0)).collect();
        Self::from_triplets(n_rows, n_cols, &triplets, false)
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed when
    /// `sum_duplicates` is set, otherwise the first one wins. Zeros are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
        sum_duplicates: bool,
    ) -> Self {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            assert!(r < n_rows && c < n_cols, "coordinate ({r}, {c}) out of bounds");
            counts[r + 1] += 1;
        }
        for r in 0..n_rows {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0f64; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }

        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..n_rows {
            let (lo, hi) = (counts[r], counts[r + 1]);
            order.clear();
            order.extend(lo..hi);
            // stable so "first wins" refers to input order
            order.sort_by_key(|&k| cols[k]);
            let row_start = indices.len();
            for &k in &order {
                if indices.len() > row_start && *indices.last().unwrap() == cols[k] {
                    if sum_duplicates {
                        *values.last_mut().unwrap() += vals[k];
                    }
                    continue;
                }
                indices.push(cols[k]);
                values.push(vals[k]);
            }
            // drop zeros produced by input or cancellation
            let mut w = row_start;
            for k in row_start..indices.len() {
                if values[k] != 0.0 {
                    indices[w] = indices[k];
                    values[w] = values[k];
                    w += 1;
                }
            }
            indices.truncate(w);
            values.truncate(w);
            indptr.push(indices.len());
        }
        CsrMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |k| vals[k])
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Same sparsity pattern with every stored value replaced by `f(row, col, value)`.
    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for r in 0..self.n_rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out.values[k] = f(r, self.indices[k], self.values[k]);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0f64; self.nnz()];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                indices[next[c]] = r;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            indptr: counts,
            indices,
            values,
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// `self * x` for a dense vector.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `self * x` for a dense column-major block; columns are processed in parallel.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.n_cols);
        let n_rows = self.n_rows;
        let mut y = DMatrix::zeros(n_rows, x.ncols());
        if n_rows == 0 {
            return y;
        }
        par::for_each_chunk_mut(y.as_mut_slice(), n_rows, |j, col| {
            let xj = x.column(j);
            for (r, out) in col.iter_mut().enumerate() {
                let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
                let mut acc = 0.0;
                for k in lo..hi {
                    acc += self.values[k] * xj[self.indices[k]];
                }
                *out = acc;
            }
        });
        y
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based indices).
    pub fn write_matrix_market<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pattern_dedups_and_sorts() {
        let m = CsrMatrix::from_pattern(2, 3, &[(0, 2), (0, 0), (0, 2), (1, 1)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.row(0).0, &[0, 2]);
        assert_eq!(m.get(1, 1), 1.0);
        assert_eq!(m.get(1, 2), 0.0);
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 0, -1.0), (0, 1, 2.0)], true);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 2.0);
    }

    #[test]
    fn matrix_market_header() {
        let m = CsrMatrix::from_pattern(2, 2, &[(1, 0)]);
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 1\n2 1 "));
    }

    fn arb_triplets() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
        (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
            let t = prop::collection::vec((0..r, 0..c, -3.0f64..3.0), 0..30);
            (Just(r), Just(c), t)
        })
    }

    proptest! {
        #[test]
        fn transpose_matches_dense((r, c, t) in arb_triplets()) {
            let m = CsrMatrix::from_triplets(r, c, &t, true);
            let mt = m.transpose();
            prop_assert_eq!(mt.to_dense(), m.to_dense().transpose());
            prop_assert_eq!(mt.transpose(), m);
        }

        #[test]
        fn mul_dense_matches_dense((r, c, t) in arb_triplets(), seed in 0u64..1000) {
            let m = CsrMatrix::from_triplets(r, c, &t, true);
            let x = DMatrix::from_fn(c, 3, |i, j| ((i * 7 + j * 3) as f64 + seed as f64).sin());
            let y = m.mul_dense(&x);
            let expect = m.to_dense() * &x;
            prop_assert!((y - expect).abs().max() < 1e-12);
            let v: Vec<f64> = x.column(0).iter().copied().collect();
            let mv = m.matvec(&v);
            let ev = m.to_dense() * nalgebra::DVector::from_vec(v);
            for (a, b) in mv.iter().zip(ev.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
