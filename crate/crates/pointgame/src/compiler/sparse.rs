//! Minimal real sparse matrices (row lists) with block-wise symmetric eigen checks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    /// Per row, `(col, value)` sorted by column, no explicit zeros.
    pub data: Vec<Vec<(usize, f64)>>,
}

impl SparseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMat { rows, cols, data: vec![vec![]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(v: &[f64]) -> Self {
        let mut m = Self::zeros(v.len(), v.len());
        for (i, x) in v.iter().enumerate() {
            if *x != 0.0 {
                m.data[i].push((i, *x));
            }
        }
        m
    }

    /// Duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, trips: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut data: Vec<Vec<(usize, f64)>> = vec![vec![]; rows];
        for (i, j, v) in trips {
            assert!(i < rows && j < cols, "triplet ({i},{j}) outside {rows}x{cols}");
            data[i].push((j, v));
        }
        for row in &mut data {
            row.sort_by_key(|e| e.0);
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match out.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => out.push((j, v)),
                }
            }
            out.retain(|e| e.1 != 0.0);
            *row = out;
        }
        SparseMat { rows, cols, data }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let trips = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| (i, j, m[(i, j)]));
        Self::from_triplets(m.nrows(), m.ncols(), trips.filter(|t| t.2 != 0.0).collect::<Vec<_>>())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, row) in self.data.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.data.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i].binary_search_by_key(&j, |e| e.0).map(|k| self.data[i][k].1).unwrap_or(0.0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(i, j, v)| (j, i, v)).collect::<Vec<_>>())
    }

    pub fn mul(&self, o: &SparseMat) -> SparseMat {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut acc = vec![0.0; o.cols];
        let mut seen = vec![false; o.cols];
        let mut touched: Vec<usize> = vec![];
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            for &(k, a) in row {
                for &(j, b) in &o.data[k] {
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &j in &touched {
                if acc[j] != 0.0 {
                    out.push((j, acc[j]));
                }
                acc[j] = 0.0;
                seen[j] = false;
            }
            touched.clear();
            data.push(out);
        }
        SparseMat { rows: self.rows, cols: o.cols, data }
    }

    /// `self + a·o`
    pub fn add_scaled(&self, o: &SparseMat, a: f64) -> SparseMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_triplets(self.rows, self.cols, self.triplets().chain(o.triplets().map(|(i, j, v)| (i, j, a * v))).collect::<Vec<_>>())
    }

    pub fn scale(&self, a: f64) -> SparseMat {
        Self::from_triplets(self.rows, self.cols, self.triplets().map(|(i, j, v)| (i, j, a * v)).collect::<Vec<_>>())
    }

    pub fn kron(&self, o: &SparseMat) -> SparseMat {
        let trips = self.triplets().flat_map(|(i, j, a)| o.triplets().map(move |(k, l, b)| (i * o.rows + k, j * o.cols + l, a * b)));
        Self::from_triplets(self.rows * o.rows, self.cols * o.cols, trips.collect::<Vec<_>>())
    }

    pub fn matvec(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(self.cols, v.len());
        DVector::from_iterator(self.rows, self.data.iter().map(|row| row.iter().map(|&(j, a)| a * v[j]).sum()))
    }

    /// Applies `self` to the left factor of a vector on `(self.cols) ⊗ right`.
    pub fn apply_left(&self, v: &DVector<f64>, right: usize) -> DVector<f64> {
        assert_eq!(self.cols * right, v.len());
        let mut out = DVector::zeros(self.rows * right);
        for (i, row) in self.data.iter().enumerate() {
            for &(j, a) in row {
                for r in 0..right {
                    out[i * right + r] += a * v[j * right + r];
                }
            }
        }
        out
    }

    /// Applies `self` to the right factor of a vector on `left ⊗ (self.cols)`.
    pub fn apply_right(&self, v: &DVector<f64>, left: usize) -> DVector<f64> {
        assert_eq!(self.cols * left, v.len());
        let mut out = DVector::zeros(self.rows * left);
        for l in 0..left {
            for (i, row) in self.data.iter().enumerate() {
                let mut s = 0.0;
                for &(j, a) in row {
                    s += a * v[l * self.cols + j];
                }
                out[l * self.rows + i] = s;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets().map(|t| t.2.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &SparseMat) -> f64 {
        self.add_scaled(o, -1.0).max_abs()
    }

    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.transpose())
    }

    /// Connected components of the symmetric sparsity graph (singletons included).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.rows;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for (i, j, _) in self.triplets() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }

    fn block(&self, idx: &[usize]) -> DMatrix<f64> {
        let pos: std::collections::HashMap<usize, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = DMatrix::zeros(idx.len(), idx.len());
        for (k, &i) in idx.iter().enumerate() {
            for &(j, v) in &self.data[i] {
                if let Some(&l) = pos.get(&j) {
                    m[(k, l)] = v;
                }
            }
        }
        m
    }

    /// Eigenpairs of a symmetric matrix, computed block by block.
    pub fn sym_eigen(&self) -> Vec<(f64, Vec<(usize, f64)>)> {
        let mut out = vec![];
        for comp in self.components() {
            if comp.len() == 1 {
                out.push((self.get(comp[0], comp[0]), vec![(comp[0], 1.0)]));
                continue;
            }
            let b = self.block(&comp);
            let sym = (&b + b.transpose()) * 0.5;
            let e = SymmetricEigen::new(sym);
            for k in 0..comp.len() {
                let v = e.eigenvectors.column(k);
                out.push((e.eigenvalues[k], comp.iter().zip(v.iter()).map(|(&i, &x)| (i, x)).collect()));
            }
        }
        out
    }

    /// Smallest eigenvalue of a symmetric matrix, block by block.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut best = f64::INFINITY;
        for comp in self.components() {
            let m = if comp.len() == 1 {
                self.get(comp[0], comp[0])
            } else {
                let b = self.block(&comp);
                let sym = (&b + b.transpose()) * 0.5;
                SymmetricEigen::new(sym).eigenvalues.min()
            };
            best = best.min(m);
        }
        best
    }

    /// Largest absolute eigenvalue of a symmetric matrix.
    pub fn spectral_norm_sym(&self) -> f64 {
        let mut best: f64 = 0.0;
        for comp in self.components() {
            let m = if comp.len() == 1 {
                self.get(comp[0], comp[0]).abs()
            } else {
                let b = self.block(&comp);
                let sym = (&b + b.transpose()) * 0.5;
                SymmetricEigen::new(sym).eigenvalues.amax()
            };
            best = best.max(m);
        }
        best
    }

    /// `‖AᵀA − I‖_max`
    pub fn orthogonality_error(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.transpose().mul(self).max_abs_diff(&SparseMat::identity(self.rows))
    }
}

/// JSON form: dense row-major `data`, or `triplets` for large sparse matrices.
#[derive(Serialize, Deserialize)]
struct MatJson {
    rows: usize,
    cols: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    data: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    triplets: Option<Vec<(usize, usize, f64)>>,
}

const DENSE_LIMIT: usize = 4096;

impl Serialize for SparseMat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let j = if self.rows * self.cols <= DENSE_LIMIT {
            MatJson { rows: self.rows, cols: self.cols, data: Some(self.to_dense().transpose().as_slice().to_vec()), triplets: None }
        } else {
            MatJson { rows: self.rows, cols: self.cols, data: None, triplets: Some(self.triplets().collect()) }
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseMat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = MatJson::deserialize(d)?;
        match (j.data, j.triplets) {
            (Some(data), None) => {
                if data.len() != j.rows * j.cols {
                    return Err(D::Error::custom("matrix data length does not match its shape"));
                }
                Ok(SparseMat::from_dense(&DMatrix::from_row_slice(j.rows, j.cols, &data)))
            }
            (None, Some(t)) => {
                if t.iter().any(|&(i, k, _)| i >= j.rows || k >= j.cols) {
                    return Err(D::Error::custom("triplet index outside the matrix"));
                }
                Ok(SparseMat::from_triplets(j.rows, j.cols, t))
            }
            _ => Err(D::Error::custom("matrix needs exactly one of \"data\" or \"triplets\"")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_kron() {
        let a = SparseMat::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]));
        let b = SparseMat::from_dense(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(a.mul(&b).to_dense(), a.to_dense() * b.to_dense());
        assert_eq!(a.kron(&b).to_dense(), a.to_dense().kronecker(&b.to_dense()));
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let i2 = SparseMat::identity(2);
        assert_eq!(a.apply_left(&v, 2), a.kron(&i2).matvec(&v));
        assert_eq!(a.apply_right(&v, 2), i2.kron(&a).matvec(&v));
    }

    #[test]
    fn blockwise_eigen() {
        let m = SparseMat::from_triplets(4, 4, vec![(0, 0, 2.0), (0, 3, 1.0), (3, 0, 1.0), (3, 3, 2.0), (1, 1, 5.0), (2, 2, -1.0)]);
        assert!((m.min_eigenvalue() + 1.0).abs() < 1e-12);
        assert_eq!(m.components().len(), 3);
        let mut ev: Vec<f64> = m.sym_eigen().into_iter().map(|e| e.0).collect();
        ev.sort_by(f64::total_cmp);
        let want = [-1.0, 1.0, 3.0, 5.0];
        for (x, y) in ev.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn json_forms() {
        let m = SparseMat::from_triplets(2, 3, vec![(0, 1, 0.5), (1, 2, -1.0)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":3,"data":[0.0,0.5,0.0,0.0,0.0,-1.0]}"#);
        assert_eq!(serde_json::from_str::<SparseMat>(&s).unwrap(), m);
        let big = SparseMat::identity(100);
        let s = serde_json::to_string(&big).unwrap();
        assert!(s.contains("triplets"));
        assert_eq!(serde_json::from_str::<SparseMat>(&s).unwrap(), big);
    }
}
