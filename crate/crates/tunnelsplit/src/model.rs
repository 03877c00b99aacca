//! The Hamiltonian families the library knows how to analyse.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::polyalg::{BivariatePoly, ComplexPoly};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DoubleWell,
    TripleWell,
    NormalForm,
    Harmonic,
    Custom,
}

/// H(p, q) as a polynomial, with enough structure kept to pick solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// H = p²/2 + e_ref + Π (q − q_i): at E = e_ref the turning points are the q_i.
    MultiWell { roots: Vec<f64>, e_ref: f64 },
    /// H = ½(p² + x²) − ½(p² + x²)² − 2x²p² with x = 1 − q².
    NormalForm,
    /// H = p²/2 + ω²q²/2.
    Harmonic { omega: f64 },
    /// Σ c p^i q^j from (i, j, c) triples.
    Custom { terms: Vec<(usize, usize, f64)> },
}

impl Model {
    pub fn double_well(roots: [f64; 4]) -> Self {
        Model::MultiWell { roots: roots.to_vec(), e_ref: 0.0 }
    }

    pub fn triple_well(roots: [f64; 6]) -> Self {
        Model::MultiWell { roots: roots.to_vec(), e_ref: 0.0 }
    }

    pub fn family(&self) -> Family {
        match self {
            Model::MultiWell { roots, .. } if roots.len() == 4 => Family::DoubleWell,
            Model::MultiWell { roots, .. } if roots.len() == 6 => Family::TripleWell,
            Model::MultiWell { .. } => Family::Custom,
            Model::NormalForm => Family::NormalForm,
            Model::Harmonic { .. } => Family::Harmonic,
            Model::Custom { .. } => Family::Custom,
        }
    }

    /// V(q) for models of the form p²/2 + V(q).
    pub fn potential(&self) -> Option<ComplexPoly> {
        match self {
            Model::MultiWell { roots, e_ref } => {
                let rs: Vec<Complex64> = roots.iter().map(|&r| Complex64::new(r, 0.0)).collect();
                let v = ComplexPoly::from_roots(&rs, Complex64::new(1.0, 0.0));
                Some(&v + &ComplexPoly::constant(Complex64::new(*e_ref, 0.0)))
            }
            Model::Harmonic { omega } => Some(ComplexPoly::from_real(&[0.0, 0.0, 0.5 * omega * omega])),
            Model::Custom { terms } => {
                let h = self.hamiltonian();
                let kinetic_only = terms.iter().all(|&(i, _, _)| i == 0 || i == 2);
                let p2 = h.row(2);
                if kinetic_only && h.degree_p() == 2 && p2.degree() == 0 && (p2.coeff(0) - 0.5).norm() < 1e-15 {
                    Some(h.row(0))
                } else {
                    None
                }
            }
            Model::NormalForm => None,
        }
    }

    pub fn hamiltonian(&self) -> BivariatePoly {
        match self {
            Model::NormalForm => {
                // x = 1 − q²; coefficients of p⁰, p², p⁴
                let x2 = [1.0, 0.0, -2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
                let x4 = [1.0, 0.0, -4.0, 0.0, 6.0, 0.0, -4.0, 0.0, 1.0];
                let mut t = Vec::new();
                for j in 0..9 {
                    let c0 = 0.5 * x2[j] - 0.5 * x4[j];
                    let c2 = if j == 0 { 0.5 } else { 0.0 } - 3.0 * x2[j];
                    if c0 != 0.0 {
                        t.push((0, j, c0));
                    }
                    if c2 != 0.0 {
                        t.push((2, j, c2));
                    }
                }
                t.push((4, 0, -0.5));
                BivariatePoly::from_real_terms(&t)
            }
            Model::Custom { terms } => BivariatePoly::from_real_terms(terms),
            _ => {
                let v = self.potential().unwrap();
                let mut h = BivariatePoly::from_q_poly(&v);
                h.add_term(2, 0, Complex64::new(0.5, 0.0));
                h
            }
        }
    }

    /// F(p, q) = H(p, q) − E.
    pub fn curve_poly(&self, energy: f64) -> BivariatePoly {
        let mut h = self.hamiltonian();
        h.add_term(0, 0, Complex64::new(-energy, 0.0));
        h
    }

    pub fn curve(&self, energy: f64) -> Result<Curve> {
        Curve::new(self.curve_poly(energy))
    }

    /// H(p, q) = H(−p, −q).
    pub fn is_parity_symmetric(&self) -> bool {
        let h = self.hamiltonian();
        let scale = h.scale_norm();
        let symmetric = h.terms().all(|(i, j, c)| (i + j) % 2 == 0 || c.norm() <= 1e-14 * scale);
        symmetric
    }

    /// Default reference energy: the one the model was defined at.
    pub fn reference_energy(&self) -> f64 {
        match self {
            Model::MultiWell { e_ref, .. } => *e_ref,
            Model::NormalForm => NORMAL_FORM_ENERGY,
            _ => 0.0,
        }
    }

    /// Sorted real turning points of a p²/2 + V model at energy E.
    pub fn turning_points(&self, energy: f64) -> Result<Vec<f64>> {
        let v = self
            .potential()
            .ok_or_else(|| Error::UnsupportedModel("turning points need H = p²/2 + V(q)".into()))?;
        let f = &v - &ComplexPoly::constant(Complex64::new(energy, 0.0));
        let scale = 1.0 + f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut out: Vec<f64> = crate::polyalg::roots_flat(&f, 1e-14)?
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-9 * scale.sqrt())
            .map(|z| z.re)
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(out)
    }
}

/// Energy at which the normal-form doublets are studied.
pub const NORMAL_FORM_ENERGY: f64 = 6.19e-3;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn normal_form_matches_direct_evaluation() {
        let h = Model::NormalForm.hamiltonian();
        for &(p, q) in &[(0.3, 0.7), (-1.1, 0.2), (0.05, 1.3)] {
            let x: f64 = 1.0 - q * q;
            let s = p * p + x * x;
            let direct = 0.5 * s - 0.5 * s * s - 2.0 * x * x * p * p;
            assert!((h.eval(c(p), c(q)).re - direct).abs() < 1e-14);
        }
        assert!(Model::NormalForm.is_parity_symmetric());
    }

    #[test]
    fn multi_well_turning_points() {
        let m = Model::double_well([-2.0, -1.0, 1.0, 3.0]);
        let t = m.turning_points(0.0).unwrap();
        for (a, b) in t.iter().zip([-2.0, -1.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(!m.is_parity_symmetric());
        assert_eq!(m.family(), Family::DoubleWell);
    }
}
