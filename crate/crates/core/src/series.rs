//! The rational series `(S, u) = C (M_u - E) P^t` attached to a state subset `P`.
//!
//! `C` is the all-ones row and `P^t` the characteristic column of `P`, so the
//! value is the number of units of `M_u` in the columns of `P`, minus `|P|`.
//! `S_q` is the case `P = {q}`: for a word matrix it is the unit count of
//! column `q` minus one. That shortcut holds for word matrices only; for
//! arbitrary rational matrices use [`SeriesContext::evaluate_rational`].

use num_traits::Zero;

use crate::automaton::StateSet;
use crate::exactla::{Rational, RationalMatrix};
use crate::wordmatrix::{MatrixError, WordMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesContext {
    p: StateSet,
}

impl SeriesContext {
    pub fn new(p: StateSet) -> Self {
        SeriesContext { p }
    }

    /// The `S_q` context.
    pub fn sink(n: usize, q: usize) -> Self {
        SeriesContext { p: StateSet::singleton(n, q) }
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn set(&self) -> &StateSet {
        &self.p
    }

    /// The characteristic column `P^t` as 0/1 entries.
    pub fn characteristic(&self) -> Vec<u8> {
        (0..self.n()).map(|j| u8::from(self.p.contains(j))).collect()
    }

    fn check(&self, n: usize) -> Result<(), MatrixError> {
        if n != self.n() {
            return Err(MatrixError::DimensionMismatch { left: self.n(), right: n });
        }
        Ok(())
    }

    pub fn evaluate(&self, m: &WordMatrix) -> Result<i64, MatrixError> {
        self.check(m.n())?;
        let hits = m.images().iter().filter(|&&j| self.p.contains(j)).count();
        Ok(hits as i64 - self.p.len() as i64)
    }

    /// `C (M - E) P^t` for any rational matrix, by the full product.
    pub fn evaluate_rational(&self, m: &RationalMatrix) -> Result<Rational, MatrixError> {
        self.check(m.n())?;
        let n = self.n();
        let mut total = Rational::zero();
        for i in 0..n {
            for j in self.p.iter() {
                total += m.get(i, j);
                if i == j {
                    total -= Rational::from_integer(1.into());
                }
            }
        }
        Ok(total)
    }

    /// `Σ λ_j (S, u_j)`.
    pub fn evaluate_linear_combination(&self, terms: &[(Rational, WordMatrix)]) -> Result<Rational, MatrixError> {
        let mut total = Rational::zero();
        for (coef, m) in terms {
            total += coef * Rational::from_integer(self.evaluate(m)?.into());
        }
        Ok(total)
    }
}

pub fn evaluate(ctx: &SeriesContext, m: &WordMatrix) -> Result<i64, MatrixError> {
    ctx.evaluate(m)
}

pub fn evaluate_linear_combination(ctx: &SeriesContext, terms: &[(Rational, WordMatrix)]) -> Result<Rational, MatrixError> {
    ctx.evaluate_linear_combination(terms)
}

/// `(S_q, u)` for a word matrix: units in column `q`, minus one.
pub fn sink_value(m: &WordMatrix, q: usize) -> i64 {
    m.column_count(q) as i64 - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{integer, linear_combination};

    fn wm(images: &[usize]) -> WordMatrix {
        WordMatrix::from_images(images.to_vec()).unwrap()
    }

    #[test]
    fn identity_evaluates_to_zero() {
        for bits in 1..16u64 {
            let ctx = SeriesContext::new(StateSet::from_bits(4, bits).unwrap());
            assert_eq!(ctx.evaluate(&WordMatrix::identity(4)).unwrap(), 0);
        }
    }

    #[test]
    fn constant_matrix_in_sink_column() {
        let ctx = SeriesContext::sink(6, 0);
        assert_eq!(ctx.evaluate(&WordMatrix::constant(6, 0)).unwrap(), 5);
        assert_eq!(ctx.evaluate(&WordMatrix::constant(6, 3)).unwrap(), -1);
    }

    #[test]
    fn full_product_agrees_with_column_count() {
        let m = wm(&[2, 0, 0, 3, 2]);
        let ctx = SeriesContext::new(StateSet::from_states(5, [0, 2]));
        assert_eq!(ctx.evaluate(&m).unwrap(), 2);
        assert_eq!(ctx.evaluate_rational(&RationalMatrix::from(&m)).unwrap(), integer(2));
        assert!(ctx.evaluate(&WordMatrix::identity(4)).is_err());
    }

    #[test]
    fn combinations() {
        let ctx = SeriesContext::sink(3, 0);
        let a = wm(&[0, 0, 1]);
        let b = wm(&[0, 2, 0]);
        // single term
        assert_eq!(ctx.evaluate_linear_combination(&[(integer(1), a.clone())]).unwrap(), integer(1));
        // equal series values, coefficients summing to zero
        let zero = ctx.evaluate_linear_combination(&[(integer(1), a.clone()), (integer(-1), b.clone())]).unwrap();
        assert_eq!(zero, integer(0));
        // 2a - b has row sums one and is itself rational; full product agrees
        let terms = [(integer(2), RationalMatrix::from(&a)), (integer(-1), RationalMatrix::from(&b))];
        let combo = linear_combination(&terms).unwrap();
        assert_eq!(
            ctx.evaluate_rational(&combo).unwrap(),
            ctx.evaluate_linear_combination(&[(integer(2), a), (integer(-1), b)]).unwrap()
        );
    }
}
