//! Pumping: powers of a unitary word matrix that return close to the identity.

use nalgebra::DMatrix;

use crate::algebra::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::word::Word;

use super::Qfa;

pub const PUMP_CAP_MIN: u64 = 1_000_000;
pub const PUMP_CAP_MAX: u64 = 100_000_000;

/// Eigenphases of a unitary matrix via its complex Schur form, which is
/// diagonal for normal matrices.
pub(crate) fn eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = u.rows();
    let m = DMatrix::from_row_slice(n, n, u.data());
    let schur = nalgebra::Schur::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| Error::Singular("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    for i in 0..n {
        for j in 0..i {
            if t[(i, j)].norm() > 1e-8 {
                return Err(Error::Singular(
                    "Schur form is not triangular; matrix is not normal".into(),
                ));
            }
        }
    }
    Ok((0..n).map(|i| t[(i, i)].arg()).collect())
}

fn search_cap(eps: f64, dim: usize) -> u64 {
    let bound = (eps / 4.0).powi(-(dim as i32)).ceil();
    let bound = if bound.is_finite() { bound } else { f64::MAX };
    (bound.max(PUMP_CAP_MIN as f64)).min(PUMP_CAP_MAX as f64) as u64
}

/// Smallest `k ≥ 1` such that every eigenvalue `λ` of `U_w` has
/// `|λ^k − 1| < √(1+eps) − 1`.
///
/// At that radius `‖U_w^k − 1‖ = δ` gives `|f(u w^k v) − f(u v)| ≤ 2δ + δ² = eps`
/// for every `u`, `v`.
pub fn find_pump(q: &Qfa, w: &Word, eps: f64) -> Result<u64> {
    if q.is_generalized() {
        return Err(Error::Mode("pumping needs a unitary machine".into()));
    }
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 2), got {eps}"
        )));
    }
    let radius = (1.0 + eps).sqrt() - 1.0;
    let phases = eigenphases(&q.word_matrix(w)?)?;
    let cap = search_cap(eps, q.dim());
    for k in 1..=cap {
        let kf = k as f64;
        // |e^{ikθ} − 1| = 2|sin(kθ/2)|
        if phases
            .iter()
            .all(|theta| 2.0 * (kf * theta / 2.0).sin().abs() < radius)
        {
            return Ok(k);
        }
    }
    Err(Error::SearchBound(format!(
        "no pumping constant below {cap} for eps = {eps}"
    )))
}

fn matrix_power(m: &ComplexMatrix, mut k: u64) -> Result<ComplexMatrix> {
    let mut result = ComplexMatrix::identity(m.rows());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = result.mul(&base)?;
        }
        base = base.mul(&base)?;
        k >>= 1;
    }
    Ok(result)
}

fn probability_through(q: &Qfa, prefix: &ComplexMatrix, suffix: &Word) -> Result<f64> {
    let mut v: ComplexVector = q.s_init().mul_matrix(prefix)?;
    for a in suffix {
        v = v.mul_matrix(q.transition(a)?)?;
    }
    Ok(q.accept_basis().projected_norm_sqr(&v))
}

/// True iff `|f(u w^k v) − f(u v)| < eps` for every sampled `(u, v)`.
pub fn verify_pump(q: &Qfa, w: &Word, k: u64, eps: f64, samples: &[(Word, Word)]) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidArgument("pumping constant must be at least 1".into()));
    }
    let pumped = matrix_power(&q.word_matrix(w)?, k)?;
    for (u, v) in samples {
        let uu = q.word_matrix(u)?;
        let with = probability_through(q, &uu.mul(&pumped)?, v)?;
        let without = probability_through(q, &uu, v)?;
        if (with - without).abs() >= eps {
            return Ok(false);
        }
    }
    Ok(true)
}
