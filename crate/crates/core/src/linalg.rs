//! Dense element kernels and the sparse skeleton solver, on top of `faer`.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat, Triplet};
use faer::{Col, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub fn from_mat(m: MatRef<'_, f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Partial-pivoting LU of a square dense matrix.
pub struct DenseLu {
    lu: PartialPivLu<f64>,
    n: usize,
    /// Power-of-two equilibration: the factored matrix is `R A C`.
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl std::fmt::Debug for DenseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseLu").field("n", &self.n).finish()
    }
}

/// Factor `a`; a pivot below `n * eps * max|a|` counts as singular.
fn pow2_inverse(m: f64) -> f64 {
    if m > 0.0 && m.is_finite() {
        (-m.log2().round()).exp2()
    } else {
        1.0
    }
}

/// LU with partial pivoting after row and column equilibration. Pivots
/// below `n eps` of the equilibrated matrix count as singular.
pub fn dense_lu_factor_mat(a: MatRef<'_, f64>) -> Result<DenseLu> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid(format!("LU of non-square {}x{} matrix", n, a.ncols())));
    }
    let mut scaled = a.to_owned();
    let mut rmax = vec![0.0f64; n];
    for j in 0..n {
        for (r, &v) in rmax.iter_mut().zip(scaled.col_as_slice(j)) {
            if !v.is_finite() {
                return Err(Error::SingularMatrix { pivot: j });
            }
            *r = r.max(v.abs());
        }
    }
    if let Some(i) = rmax.iter().position(|&r| r == 0.0) {
        return Err(Error::SingularMatrix { pivot: i });
    }
    let row_scale: Vec<f64> = rmax.iter().map(|&m| pow2_inverse(m)).collect();
    let mut col_scale = Vec::with_capacity(n);
    let mut amax = 0.0f64;
    for j in 0..n {
        let col = scaled.col_as_slice_mut(j);
        let mut cmax = 0.0f64;
        for (v, r) in col.iter_mut().zip(&row_scale) {
            *v *= r;
            cmax = cmax.max(v.abs());
        }
        let cs = pow2_inverse(cmax);
        for v in col.iter_mut() {
            *v *= cs;
        }
        amax = amax.max(cmax * cs);
        col_scale.push(cs);
    }
    let lu = scaled.partial_piv_lu();
    let tol = n as f64 * f64::EPSILON * amax;
    let u = lu.U();
    for i in 0..n {
        if !(u[(i, i)].abs() > tol) {
            return Err(Error::SingularMatrix { pivot: i });
        }
    }
    Ok(DenseLu {
        lu,
        n,
        row_scale,
        col_scale,
    })
}

pub fn dense_lu_factor(a: &DenseBlock) -> Result<DenseLu> {
    dense_lu_factor_mat(a.to_mat().as_ref())
}

impl DenseLu {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Col::<f64>::from_fn(self.n, |i| b[i] * self.row_scale[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[i] * self.col_scale[i]).collect()
    }

    pub fn solve_mat(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        let rhs = Mat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * self.row_scale[i]);
        let mut x = self.lu.solve(&rhs);
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                x[(i, j)] *= self.col_scale[i];
            }
        }
        x
    }
}

pub fn dense_lu_solve(a: &DenseBlock, b: &[f64]) -> Result<Vec<f64>> {
    Ok(dense_lu_factor(a)?.solve(b))
}

/// Square sparse system in triplet form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub n: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

pub fn sparse_assemble(n: usize, triplets: Vec<(usize, usize, f64)>, rhs: Vec<f64>) -> Result<SparseSystem> {
    if rhs.len() != n {
        return Err(Error::invalid(format!("rhs length {} for dimension {n}", rhs.len())));
    }
    if let Some(&(i, j, _)) = triplets.iter().find(|t| t.0 >= n || t.1 >= n) {
        return Err(Error::OutOfRange {
            what: "sparse entry",
            index: i.max(j),
            len: n,
        });
    }
    Ok(SparseSystem { n, triplets, rhs })
}

impl SparseSystem {
    /// Compressed matrix with duplicates summed.
    pub fn to_csc(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self.triplets.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &t)
            .map_err(|e| Error::SolverSingular(format!("assembly: {e:?}")))
    }

    pub fn to_dense(&self) -> DenseBlock {
        let mut d = DenseBlock::zeros(self.n, self.n);
        for &(i, j, v) in &self.triplets {
            d.data[i * self.n + j] += v;
        }
        d
    }
}

pub fn sparse_lu_solve(system: &SparseSystem) -> Result<Vec<f64>> {
    let pairs: Vec<_> = system.triplets.iter().map(|t| (t.0, t.1)).collect();
    let pattern = SparsePattern::new(system.n, &pairs)?;
    let vals: Vec<_> = system.triplets.iter().map(|t| t.2).collect();
    pattern.factor(&vals)?.solve(&system.rhs)
}

/// Fixed sparsity pattern with a reusable symbolic factorization.
#[derive(Clone)]
pub struct SparsePattern {
    n: usize,
    n_entries: usize,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: Option<SymbolicLu<usize>>,
    /// Cholesky of `sign * A` for symmetric definite systems.
    llt: Option<(SymbolicLlt<usize>, f64)>,
}

impl std::fmt::Debug for SparsePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparsePattern")
            .field("n", &self.n)
            .field("entries", &self.n_entries)
            .finish()
    }
}

impl SparsePattern {
    /// Pattern from `(row, col)` pairs; values later come in the same order.
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if let Some(&(i, j)) = pairs.iter().find(|p| p.0 >= n || p.1 >= n) {
            return Err(Error::OutOfRange {
                what: "sparse entry",
                index: i.max(j),
                len: n,
            });
        }
        let idx: Vec<_> = pairs.iter().map(|&(row, col)| Pair { row, col }).collect();
        let (symbolic, argsort) = SymbolicSparseColMat::<usize>::try_new_from_indices(n, n, &idx)
            .map_err(|e| Error::SolverSingular(format!("pattern: {e:?}")))?;
        let lu = if n > 0 {
            Some(
                SymbolicLu::try_new(symbolic.as_ref())
                    .map_err(|e| Error::SolverSingular(format!("symbolic LU: {e:?}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            n,
            n_entries: pairs.len(),
            symbolic,
            argsort,
            lu,
            llt: None,
        })
    }

    /// Declare the values symmetric and definite with the given sign, so
    /// factorizations try Cholesky first and fall back to LU.
    pub fn with_definite(mut self, sign: f64) -> Result<Self> {
        if self.n > 0 {
            let sym = SymbolicLlt::try_new(self.symbolic.as_ref(), Side::Lower)
                .map_err(|e| Error::SolverSingular(format!("symbolic Cholesky: {e:?}")))?;
            self.llt = Some((sym, sign.signum()));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self, values: &[f64]) -> Result<SparseColMat<usize, f64>> {
        if values.len() != self.n_entries {
            return Err(Error::invalid(format!(
                "{} values for a pattern of {} entries",
                values.len(),
                self.n_entries
            )));
        }
        SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, values)
            .map_err(|e| Error::SolverSingular(format!("values: {e:?}")))
    }

    pub fn factor(&self, values: &[f64]) -> Result<SparseLu> {
        let mat = self.matrix(values)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverSingular("non-finite matrix entry".into()));
        }
        if let Some((sym, sign)) = &self.llt {
            let mut scaled = mat.clone();
            for v in scaled.val_mut() {
                *v *= sign;
            }
            if let Ok(llt) = Llt::try_new_with_symbolic(sym.clone(), scaled.as_ref(), Side::Lower) {
                return Ok(SparseLu {
                    mat,
                    factor: Some(Factor::Llt(llt, *sign)),
                });
            }
        }
        let factor = match &self.lu {
            Some(sym) => Some(Factor::Lu(
                Lu::try_new_with_symbolic(sym.clone(), mat.as_ref())
                    .map_err(|e| Error::SolverSingular(format!("{e:?}")))?,
            )),
            None => None,
        };
        Ok(SparseLu { mat, factor })
    }
}

enum Factor {
    Lu(Lu<usize, f64>),
    Llt(Llt<usize, f64>, f64),
}

/// Numeric sparse factorization together with its matrix.
pub struct SparseLu {
    mat: SparseColMat<usize, f64>,
    factor: Option<Factor>,
}

/// Largest accepted backward error `|r| / (|A| |x| + |b|)`.
const BACKWARD_TOL: f64 = 1e-9;

impl SparseLu {
    pub fn matrix(&self) -> &SparseColMat<usize, f64> {
        &self.mat
    }

    /// Whether the Cholesky path was taken.
    pub fn is_cholesky(&self) -> bool {
        matches!(self.factor, Some(Factor::Llt(..)))
    }

    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = b.to_vec();
        let m = self.mat.as_ref();
        for j in 0..m.ncols() {
            let xj = x[j];
            for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
                r[i] -= v * xj;
            }
        }
        r
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::<f64>::from_fn(b.len(), |i| b[i]);
        match self.factor.as_ref().expect("nonempty system") {
            Factor::Lu(lu) => {
                let x = lu.solve(&rhs);
                (0..b.len()).map(|i| x[i]).collect()
            }
            Factor::Llt(llt, sign) => {
                let x = llt.solve(&rhs);
                (0..b.len()).map(|i| sign * x[i]).collect()
            }
        }
    }

    /// Solve with up to two steps of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.mat.nrows();
        if b.len() != n {
            return Err(Error::invalid(format!("rhs length {} for dimension {n}", b.len())));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut x = self.raw_solve(b);
        let mut r = self.residual(&x, b);
        let mut rn = norm2(&r);
        for _ in 0..2 {
            if !rn.is_finite() || rn == 0.0 {
                break;
            }
            let dx = self.raw_solve(&r);
            let x2: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let r2 = self.residual(&x2, b);
            let rn2 = norm2(&r2);
            if rn2 < rn {
                x = x2;
                r = r2;
                rn = rn2;
            } else {
                break;
            }
        }
        let _ = r;
        if !rn.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverSingular("non-finite solution".into()));
        }
        let anorm = self.norm_inf();
        let scale = anorm * x.iter().fold(0.0f64, |m, v| m.max(v.abs())) * (n as f64).sqrt() + norm2(b);
        if rn > BACKWARD_TOL * scale {
            return Err(Error::SolverSingular(format!(
                "backward error {:.3e} exceeds tolerance",
                rn / scale
            )));
        }
        Ok(x)
    }

    fn norm_inf(&self) -> f64 {
        let m = self.mat.as_ref();
        let mut rows = vec![0.0f64; m.nrows()];
        for j in 0..m.ncols() {
            for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
                rows[i] += v.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
