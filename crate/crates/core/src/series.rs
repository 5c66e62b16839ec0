//! Truncated length-generating functions `Σ_n a_n zⁿ`.

use std::collections::BTreeMap;

use crate::algebra::{Complex, ZERO};
use crate::error::{Error, Result};
use crate::grammar::{GSymbol, QuantumGrammar};
use crate::qfa::Qfa;
use crate::stochastic::{letter_sum, to_bilinear};
use crate::word::{words_of_length, Symbol, Word};

/// Largest number of words `quantum_language_coefficients` will enumerate.
pub const ENUMERATION_GUARD: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex>,
}

impl TruncatedSeries {
    /// Coefficients of degrees `0..=N`; at least one is required.
    pub fn new(coeffs: Vec<Complex>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a series needs at least the constant term".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self {
            coeffs: vec![ZERO; cutoff + 1],
        }
    }

    pub fn ones(cutoff: usize) -> Self {
        Self {
            coeffs: vec![Complex::new(1.0, 0.0); cutoff + 1],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    /// Real parts of the coefficients.
    pub fn real_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.re).collect()
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(Complex::conj).collect(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    fn scale(&self, c: Complex) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Cauchy product truncated at the common cutoff.
    fn mul(&self, other: &Self) -> Self {
        let n = self.cutoff();
        let mut coeffs = vec![ZERO; n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs }
    }

    /// Multiplication by `z`, dropping the coefficient pushed past the cutoff.
    fn shift(&self) -> Self {
        let mut coeffs = vec![ZERO; self.coeffs.len()];
        coeffs[1..].copy_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
        Self { coeffs }
    }
}

/// Coefficientwise product.
pub fn hadamard_product(s: &TruncatedSeries, t: &TruncatedSeries) -> Result<TruncatedSeries> {
    if s.cutoff() != t.cutoff() {
        return Err(Error::InvalidArgument(format!(
            "cutoff mismatch: {} vs {}",
            s.cutoff(),
            t.cutoff()
        )));
    }
    TruncatedSeries::new(s.coeffs.iter().zip(&t.coeffs).map(|(a, b)| a * b).collect())
}

/// `a_n = Σ_{|w|=n} f(w)`, computed as `π (Σ_a M_a)ⁿ η` on the bilinear form
/// without enumerating words.
pub fn qfa_length_coefficients(q: &Qfa, n_max: usize) -> TruncatedSeries {
    let form = to_bilinear(q);
    let sum = letter_sum(&form);
    let mut v = form.pi.clone();
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            v = v.mul_matrix(&sum).expect("same dimension");
        }
        let value: Complex = v.iter().zip(form.eta.iter()).map(|(x, y)| x * y).sum();
        coeffs.push(Complex::new(value.re, 0.0));
    }
    TruncatedSeries { coeffs }
}

/// Amplitude generating function `g_I` of coordinate `k`, with every
/// terminal replaced by `z`: the least solution of `g_v = Σ c_k(v → β) g_β`
/// found by synchronous iteration from zero.
pub fn grammar_amplitude_series(
    g: &QuantumGrammar,
    k: usize,
    n_max: usize,
) -> Result<TruncatedSeries> {
    if k >= g.dimensionality() {
        return Err(Error::InvalidArgument(format!(
            "coordinate {k} out of range for dimensionality {}",
            g.dimensionality()
        )));
    }
    let vars = g.variables();
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let prods: Vec<(usize, &[GSymbol], Complex)> = g
        .active_productions()
        .map(|p| (index[p.lhs.as_str()], p.rhs.as_slice(), p.amplitudes[k]))
        .filter(|(_, _, c)| *c != ZERO)
        .collect();
    let one = {
        let mut s = TruncatedSeries::zeros(n_max);
        s.coeffs[0] = Complex::new(1.0, 0.0);
        s
    };
    let mut current = vec![TruncatedSeries::zeros(n_max); vars.len()];
    let rounds = 2 * (n_max + 1);
    for _ in 0..rounds {
        let mut next = vec![TruncatedSeries::zeros(n_max); vars.len()];
        for (lhs, rhs, c) in &prods {
            let mut term = one.clone();
            for s in rhs.iter() {
                term = match s {
                    GSymbol::Term(_) => term.shift(),
                    GSymbol::Var(v) => term.mul(&current[index[v.as_str()]]),
                };
            }
            next[*lhs] = next[*lhs].add(&term.scale(*c));
        }
        if next == current {
            return Ok(current.swap_remove(index[g.initial()]));
        }
        current = next;
    }
    Err(Error::UnsupportedGrammar(format!(
        "amplitude series did not stabilise within {rounds} rounds"
    )))
}

/// `a_n = Σ_{|w|=n} f(w)` by explicit enumeration of all words.
pub fn quantum_language_coefficients<F>(
    mut f_eval: F,
    alphabet: &[Symbol],
    n_max: usize,
) -> Result<TruncatedSeries>
where
    F: FnMut(&Word) -> Result<f64>,
{
    let count = (alphabet.len() as f64).powi(n_max as i32);
    if count > ENUMERATION_GUARD {
        return Err(Error::OracleScale(format!(
            "{count} words of length {n_max} exceed the enumeration guard"
        )));
    }
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut total = 0.0;
        for w in words_of_length(alphabet, n) {
            total += f_eval(&w)?;
        }
        coeffs.push(Complex::new(total, 0.0));
    }
    TruncatedSeries::new(coeffs)
}
