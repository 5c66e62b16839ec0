//! Dense complex linear algebra.
//!
//! Vectors are row vectors and act on matrices from the left, so the image of
//! `v` under `m` is `v·m` and `m[i][j]` is the amplitude of moving from basis
//! state `i` to basis state `j`. Inner products are conjugate-linear in the
//! left argument: `⟨u|v⟩ = Σ conj(u_i)·v_i`.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Default structural tolerance for unitarity and orthonormality checks.
pub const STRUCTURAL_TOL: f64 = 1e-9;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn real(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// `e^{iθ}`
pub fn phase(theta: f64) -> Complex {
    Complex::from_polar(1.0, theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex>) -> Self {
        Self { entries }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| real(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![ZERO; dim])
    }

    pub fn ones(dim: usize) -> Self {
        Self::new(vec![ONE; dim])
    }

    /// The standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.entries.iter()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &ComplexVector) -> Complex {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).fold(0.0, |acc, x| acc + x)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.entries.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self::new(self.entries.iter().map(|z| z * factor).collect())
    }

    pub fn add(&self, other: &ComplexVector) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "cannot add vectors of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &ComplexVector) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| *z == ZERO)
    }

    pub fn direct_sum(&self, other: &ComplexVector) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(entries)
    }

    /// Kronecker product; component `i·dim(other) + j` is `self_i·other_j`.
    pub fn tensor(&self, other: &ComplexVector) -> Self {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        Self::new(entries)
    }

    /// Row vector times matrix.
    pub fn mul_matrix(&self, m: &ComplexMatrix) -> Result<Self> {
        if self.dim() != m.rows() {
            return Err(Error::Shape(format!(
                "vector of dimension {} cannot multiply a {}x{} matrix",
                self.dim(),
                m.rows(),
                m.cols()
            )));
        }
        let mut out = vec![ZERO; m.cols()];
        for (i, a) in self.entries.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, slot) in out.iter_mut().enumerate() {
                *slot += a * m[(i, j)];
            }
        }
        Ok(Self::new(out))
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex;

    fn index(&self, index: usize) -> &Complex {
        &self.entries[index]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, index: usize) -> &mut Complex {
        &mut self.entries[index]
    }
}

impl From<Vec<Complex>> for ComplexVector {
    fn from(entries: Vec<Complex>) -> Self {
        Self::new(entries)
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diag(entries: &[Complex]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Self::from_row_major(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| real(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> ComplexVector {
        ComplexVector::new(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex>> {
        self.data.chunks(self.cols.max(1)).map(<[_]>::to_vec).collect()
    }

    pub fn conjugate_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|m·m† − 1|`.
    pub fn unitarity_deviation(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "unitarity needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let product = self.mul(&self.conjugate_transpose())?;
        Ok(product.max_abs_diff(&Self::identity(self.rows)))
    }

    pub fn is_unitary(&self, tol: f64) -> Result<bool> {
        Ok(self.unitarity_deviation()? < tol)
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &ComplexMatrix) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }

    /// Kronecker product: entry `(i·p + k, j·q + l)` is `self[i][j]·other[k][l]`.
    pub fn tensor_product(&self, other: &ComplexMatrix) -> Self {
        let (p, q) = (other.rows, other.cols);
        let mut out = Self::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting. Fails when a
    /// pivot falls below `tol` relative to the largest entry.
    pub fn inverse(&self, tol: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 && n > 0 {
            return Err(Error::Singular("zero matrix".into()));
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)].norm() <= tol * scale {
                return Err(Error::Singular(format!("pivot {col} vanishes")));
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[(row, col)];
                if factor == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(row, j)] -= factor * ac;
                    inv[(row, j)] -= factor * ic;
                }
            }
        }
        Ok(inv)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(|z| format!("{z:.4}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// An orthonormal family of vectors spanning a subspace of `C^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<ComplexVector>,
    ambient_dim: usize,
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<ComplexVector>, ambient_dim: usize, tol: f64) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.dim() != ambient_dim {
                return Err(Error::InvalidBasis(format!(
                    "vector {i} has dimension {}, expected {ambient_dim}",
                    v.dim()
                )));
            }
            if (v.norm_sqr() - 1.0).abs() >= tol {
                return Err(Error::InvalidBasis(format!(
                    "vector {i} has squared norm {}",
                    v.norm_sqr()
                )));
            }
            for (j, u) in vectors[..i].iter().enumerate() {
                let overlap = u.inner(v).norm();
                if overlap >= tol {
                    return Err(Error::InvalidBasis(format!(
                        "vectors {j} and {i} overlap by {overlap}"
                    )));
                }
            }
        }
        Ok(Self {
            vectors,
            ambient_dim,
        })
    }

    /// Standard basis vectors `e_i` for the given indices.
    pub fn standard(ambient_dim: usize, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices
                .iter()
                .map(|&i| {
                    if i < ambient_dim {
                        Ok(ComplexVector::basis(ambient_dim, i))
                    } else {
                        Err(Error::InvalidBasis(format!(
                            "index {i} outside dimension {ambient_dim}"
                        )))
                    }
                })
                .collect::<Result<_>>()?,
            ambient_dim,
            STRUCTURAL_TOL,
        )
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            vectors: Vec::new(),
            ambient_dim,
        }
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Amplitudes `⟨h_i|v⟩` of `v` along each basis vector.
    pub fn coordinates(&self, v: &ComplexVector) -> Vec<Complex> {
        self.vectors.iter().map(|h| h.inner(v)).collect()
    }

    /// `|P v|²` for the projector onto the span.
    pub fn projected_norm_sqr(&self, v: &ComplexVector) -> f64 {
        self.coordinates(v).iter().map(|z| z.norm_sqr()).fold(0.0, |acc, x| acc + x)
    }

    pub fn project(&self, v: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.ambient_dim);
        for h in &self.vectors {
            let amp = h.inner(v);
            for (slot, x) in out.entries.iter_mut().zip(h.iter()) {
                *slot += amp * x;
            }
        }
        out
    }

    pub fn direct_sum(&self, other: &OrthonormalBasis) -> Self {
        let left = ComplexVector::zeros(self.ambient_dim);
        let right = ComplexVector::zeros(other.ambient_dim);
        let mut vectors: Vec<_> = self.vectors.iter().map(|h| h.direct_sum(&right)).collect();
        vectors.extend(other.vectors.iter().map(|h| left.direct_sum(h)));
        Self {
            vectors,
            ambient_dim: self.ambient_dim + other.ambient_dim,
        }
    }

    /// All pairwise tensors `h_i ⊗ g_j`, ordered lexicographically.
    pub fn tensor(&self, other: &OrthonormalBasis) -> Self {
        let vectors = self
            .vectors
            .iter()
            .flat_map(|h| other.vectors.iter().map(move |g| h.tensor(g)))
            .collect();
        Self {
            vectors,
            ambient_dim: self.ambient_dim * other.ambient_dim,
        }
    }

    /// Vectors of `self` followed by those of `other` in one family.
    pub fn union(&self, other: &OrthonormalBasis, tol: f64) -> Result<Self> {
        let mut vectors = self.vectors.clone();
        vectors.extend(other.vectors.iter().cloned());
        Self::new(vectors, self.ambient_dim, tol)
    }

    /// Orthonormal basis of the orthogonal complement, by Gram–Schmidt of the
    /// standard basis against `self`.
    pub fn orthonormal_complement(&self) -> Result<Self> {
        let d = self.ambient_dim;
        let target = d.checked_sub(self.len()).ok_or_else(|| {
            Error::InvalidBasis(format!("{} vectors in dimension {d}", self.len()))
        })?;
        let mut accepted: Vec<ComplexVector> = Vec::with_capacity(target);
        // Pick candidates in order of largest residual to keep the process stable.
        let mut remaining: Vec<usize> = (0..d).collect();
        while accepted.len() < target {
            let mut best: Option<(usize, ComplexVector, f64)> = None;
            for (pos, &i) in remaining.iter().enumerate() {
                let mut r = ComplexVector::basis(d, i);
                // two passes of classical Gram–Schmidt
                for _ in 0..2 {
                    for h in self.vectors.iter().chain(accepted.iter()) {
                        let amp = h.inner(&r);
                        for (slot, x) in r.entries.iter_mut().zip(h.iter()) {
                            *slot -= amp * x;
                        }
                    }
                }
                let norm = r.norm();
                if best.as_ref().is_none_or(|(_, _, n)| norm > *n) {
                    best = Some((pos, r, norm));
                }
            }
            match best {
                Some((pos, r, norm)) if norm > 1e-6 => {
                    remaining.remove(pos);
                    accepted.push(r.scale(real(1.0 / norm)));
                }
                _ => {
                    return Err(Error::InvalidBasis(
                        "input vectors are rank deficient".into(),
                    ))
                }
            }
        }
        Self::new(accepted, d, STRUCTURAL_TOL)
    }
}
