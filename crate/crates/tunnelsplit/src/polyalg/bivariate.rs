use super::ComplexPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// F(p, q) = Σ c[i][j] p^i q^j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariatePoly {
    c: Vec<Vec<Complex64>>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl BivariatePoly {
    pub fn new(mut c: Vec<Vec<Complex64>>) -> Self {
        for row in c.iter_mut() {
            while row.last().is_some_and(|x| *x == ZERO) {
                row.pop();
            }
        }
        while c.last().is_some_and(|r| r.is_empty()) {
            c.pop();
        }
        Self { c }
    }

    pub fn from_terms(terms: &[(usize, usize, Complex64)]) -> Self {
        let mut out = Self::new(vec![]);
        for &(i, j, a) in terms {
            out.add_term(i, j, a);
        }
        out
    }

    pub fn from_real_terms(terms: &[(usize, usize, f64)]) -> Self {
        let t: Vec<_> = terms.iter().map(|&(i, j, a)| (i, j, Complex64::new(a, 0.0))).collect();
        Self::from_terms(&t)
    }

    /// Polynomial in q only, as a p^0 row.
    pub fn from_q_poly(q: &ComplexPoly) -> Self {
        Self::new(vec![q.coeffs().to_vec()])
    }

    pub fn add_term(&mut self, i: usize, j: usize, a: Complex64) {
        if self.c.len() <= i {
            self.c.resize(i + 1, vec![]);
        }
        if self.c[i].len() <= j {
            self.c[i].resize(j + 1, ZERO);
        }
        self.c[i][j] += a;
        *self = Self::new(std::mem::take(&mut self.c));
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.c.get(i).and_then(|r| r.get(j)).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree_p(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn degree_q(&self) -> usize {
        self.c.iter().map(|r| r.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.c.iter().enumerate().flat_map(|(i, r)| {
            r.iter().enumerate().filter(|(_, a)| **a != ZERO).map(move |(j, &a)| (i, j, a))
        })
    }

    pub fn is_real(&self) -> bool {
        self.terms().all(|(_, _, a)| a.im == 0.0)
    }

    /// Coefficient of p^i as a polynomial in q.
    pub fn row(&self, i: usize) -> ComplexPoly {
        ComplexPoly::new(self.c.get(i).cloned().unwrap_or_default())
    }

    pub fn eval(&self, p: Complex64, q: Complex64) -> Complex64 {
        self.c.iter().rev().fold(ZERO, |acc, r| {
            acc * p + r.iter().rev().fold(ZERO, |a, &x| a * q + x)
        })
    }

    /// F(·, q) as a polynomial in p.
    pub fn slice_at_q(&self, q: Complex64) -> ComplexPoly {
        ComplexPoly::new(
            self.c
                .iter()
                .map(|r| r.iter().rev().fold(ZERO, |a, &x| a * q + x))
                .collect(),
        )
    }

    /// F(p, ·) as a polynomial in q.
    pub fn slice_at_p(&self, p: Complex64) -> ComplexPoly {
        let mut acc = ComplexPoly::zero();
        for r in self.c.iter().rev() {
            acc = &acc.scale(p) + &ComplexPoly::new(r.clone());
        }
        acc
    }

    pub fn derivative_p(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, r)| r.iter().map(|&a| a * i as f64).collect())
                .collect(),
        )
    }

    pub fn derivative_q(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .map(|r| r.iter().enumerate().skip(1).map(|(j, &a)| a * j as f64).collect())
                .collect(),
        )
    }

    /// G(p, η) = η^{deg_q} F(p, 1/η), the curve seen from q = ∞.
    pub fn invert_q(&self) -> Self {
        let dq = self.degree_q();
        let mut out = vec![vec![ZERO; dq + 1]; self.c.len()];
        for (i, j, a) in self.terms() {
            out[i][dq - j] = a;
        }
        Self::new(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.c.iter().map(|r| r.iter().map(|&a| a * s).collect()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, j, a) in other.terms() {
            out.add_term(i, j, a);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut grid = vec![vec![ZERO; self.degree_q() + other.degree_q() + 1]; self.c.len() + other.c.len()];
        for (i, j, a) in self.terms() {
            for (k, l, b) in other.terms() {
                grid[i + k][j + l] += a * b;
            }
        }
        Self::new(grid)
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Self::from_terms(&[(0, 0, Complex64::new(1.0, 0.0))]);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Largest coefficient modulus, for relative tolerances.
    pub fn scale_norm(&self) -> f64 {
        self.terms().map(|(_, _, a)| a.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_slices_agree() {
        // F = p^2 - q^3 + 2pq
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 3, -1.0), (1, 1, 2.0)]);
        let (p, q) = (Complex64::new(0.3, -1.0), Complex64::new(1.5, 0.2));
        let v = f.eval(p, q);
        assert!((f.slice_at_q(q).eval(p) - v).norm() < 1e-14);
        assert!((f.slice_at_p(p).eval(q) - v).norm() < 1e-14);
        assert_eq!(f.degree_p(), 2);
        assert_eq!(f.degree_q(), 3);
    }

    #[test]
    fn derivatives() {
        let f = BivariatePoly::from_real_terms(&[(2, 1, 3.0), (0, 2, 1.0)]);
        assert_eq!(f.derivative_p().coeff(1, 1), Complex64::new(6.0, 0.0));
        assert_eq!(f.derivative_q().coeff(0, 1), Complex64::new(2.0, 0.0));
        assert_eq!(f.derivative_q().coeff(2, 0), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn inversion_round_trip() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 4, 1.0), (0, 1, -2.0)]);
        let g = f.invert_q();
        let (p, eta) = (Complex64::new(0.5, 0.1), Complex64::new(0.2, 0.3));
        let want = f.eval(p, 1.0 / eta) * eta.powu(4);
        assert!((g.eval(p, eta) - want).norm() < 1e-12);
    }
}
