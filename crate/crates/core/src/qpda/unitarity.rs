//! Unitarity checks on a finite window of configurations.

use std::collections::{BTreeMap, HashMap};

use crate::algebra::{Complex, ComplexMatrix, STRUCTURAL_TOL, ZERO};
use crate::error::{Error, Result};
use crate::word::Symbol;

use super::{Qpda, SparseState};

/// Largest number of configurations a window may contain.
pub const WINDOW_GUARD: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityReport {
    pub interior_unitary: bool,
    pub max_deviation: f64,
}

/// All configurations `(q, σ)` with `|σ| ≤ depth`, ordered by stack length.
pub fn basis_states(p: &Qpda, depth: usize) -> Result<Vec<(String, Vec<Symbol>)>> {
    let t = p.stack_alphabet().len();
    let mut count = 0usize;
    let mut layer = 1usize;
    for _ in 0..=depth {
        count = count.saturating_add(layer.saturating_mul(p.controls().len()));
        layer = layer.saturating_mul(t.max(1));
    }
    if count > WINDOW_GUARD {
        return Err(Error::OracleScale(format!(
            "window of depth {depth} has {count} configurations, limit is {WINDOW_GUARD}"
        )));
    }
    let mut stacks: Vec<Vec<Symbol>> = vec![vec![]];
    let mut frontier: Vec<Vec<Symbol>> = vec![vec![]];
    for _ in 0..depth {
        let next: Vec<Vec<Symbol>> = frontier
            .iter()
            .flat_map(|s| {
                p.stack_alphabet().iter().map(move |t| {
                    let mut v = vec![t.clone()];
                    v.extend_from_slice(s);
                    v
                })
            })
            .collect();
        stacks.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(stacks
        .into_iter()
        .flat_map(|s| p.controls().iter().map(move |q| (q.clone(), s.clone())))
        .collect())
}

/// A control together with a top-leftmost stack.
pub type Configuration = (String, Vec<Symbol>);

/// `U_a` restricted to the configurations with stacks of length at most
/// `depth`: entry `(i, j)` is the amplitude from basis state `i` to `j`.
pub fn materialize(
    p: &Qpda,
    a: &Symbol,
    depth: usize,
) -> Result<(Vec<Configuration>, ComplexMatrix)> {
    let basis = basis_states(p, depth)?;
    let index: HashMap<&(String, Vec<Symbol>), usize> =
        basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    p.check_input(a)?;
    let rules = p.index();
    let n = basis.len();
    let mut data = vec![ZERO; n * n];
    for (i, (q, s)) in basis.iter().enumerate() {
        let image = super::step_indexed(&rules, &SparseState::basis(q, s.clone()), a);
        for (key, z) in image.iter() {
            if let Some(&j) = index.get(key) {
                data[i * n + j] = *z;
            }
        }
    }
    Ok((basis.clone(), ComplexMatrix::from_row_major(n, n, data)?))
}

/// Largest deviation of a sparse Gram matrix from the identity on `members`.
fn gram_deviation(
    members: &[usize],
    vectors: &BTreeMap<usize, Vec<(usize, Complex)>>,
) -> f64 {
    // transpose: coordinate -> (member, value)
    let mut by_coord: HashMap<usize, Vec<(usize, Complex)>> = HashMap::new();
    for &m in members {
        for &(c, z) in vectors.get(&m).into_iter().flatten() {
            by_coord.entry(c).or_default().push((m, z));
        }
    }
    let mut gram: HashMap<(usize, usize), Complex> = HashMap::new();
    for entries in by_coord.values() {
        for &(i, x) in entries {
            for &(j, y) in entries {
                *gram.entry((i, j)).or_insert(ZERO) += x.conj() * y;
            }
        }
    }
    let mut dev: f64 = 0.0;
    for &m in members {
        let d = gram.get(&(m, m)).copied().unwrap_or(ZERO);
        dev = dev.max((d - 1.0).norm());
    }
    for (&(i, j), z) in &gram {
        if i != j {
            dev = dev.max(z.norm());
        }
    }
    dev
}

/// Checks every `U_a` on the window of stacks of length at most `depth`.
///
/// Images of basis states with `|σ| ≤ depth − 1` must be orthonormal, and so
/// must the preimage columns of those same states; configurations on the
/// boundary `|σ| = depth` only enter as coordinates. Images are computed
/// exactly, so nothing is lost by the truncation.
pub fn check_unitarity_truncated(p: &Qpda, depth: usize) -> Result<UnitarityReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let basis = basis_states(p, depth)?;
    let mut index: HashMap<(String, Vec<Symbol>), usize> =
        basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let interior: Vec<usize> = (0..basis.len()).filter(|&i| basis[i].1.len() < depth).collect();
    let rules = p.index();
    let mut max_deviation: f64 = 0.0;
    for a in p.input_alphabet() {
        let mut rows: BTreeMap<usize, Vec<(usize, Complex)>> = BTreeMap::new();
        let mut cols: BTreeMap<usize, Vec<(usize, Complex)>> = BTreeMap::new();
        for (i, (q, s)) in basis.iter().enumerate() {
            let image = super::step_indexed(&rules, &SparseState::basis(q, s.clone()), a);
            for (key, z) in image.iter() {
                let next = index.len();
                let j = *index.entry(key.clone()).or_insert(next);
                rows.entry(i).or_default().push((j, *z));
                cols.entry(j).or_default().push((i, *z));
            }
        }
        max_deviation = max_deviation
            .max(gram_deviation(&interior, &rows))
            .max(gram_deviation(&interior, &cols));
    }
    Ok(UnitarityReport {
        interior_unitary: max_deviation <= STRUCTURAL_TOL,
        max_deviation,
    })
}
