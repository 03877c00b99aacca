use super::{BivariatePoly, ComplexPoly};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::f64::consts::TAU;

/// Sylvester resultant of F and G with p eliminated.
///
/// Real inputs go through exact fraction-free elimination over Q[q]
/// (every f64 is a dyadic rational); complex inputs are evaluated on a
/// circle and interpolated.
pub fn resultant_in_p(f: &BivariatePoly, g: &BivariatePoly) -> Result<ComplexPoly> {
    check(f, g)?;
    if f.is_real() && g.is_real() {
        Ok(resultant_exact(f, g))
    } else {
        Ok(resultant_interp(f, g))
    }
}

/// Resultant of F and ∂F/∂p: vanishes where sheets collide or the leading
/// coefficient in p drops.
pub fn discriminant_in_p(f: &BivariatePoly) -> Result<ComplexPoly> {
    resultant_in_p(f, &f.derivative_p())
}

fn check(f: &BivariatePoly, g: &BivariatePoly) -> Result<()> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    if f.degree_p() == 0 || g.degree_p() == 0 {
        return Err(Error::DegenerateInput("degree in p must be at least 1".into()));
    }
    Ok(())
}

type QPoly = Vec<BigRational>;

fn q_trim(mut a: QPoly) -> QPoly {
    while a.last().is_some_and(|x| x.is_zero()) {
        a.pop();
    }
    a
}

fn q_mul(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    q_trim(out)
}

fn q_sub(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    q_trim((0..n).map(|k| a.get(k).unwrap_or(&z) - b.get(k).unwrap_or(&z)).collect())
}

/// Exact division; the Bareiss recurrence guarantees a zero remainder.
fn q_div_exact(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_empty() {
        return vec![];
    }
    let mut rem = a.clone();
    let db = b.len() - 1;
    let lead = b.last().unwrap().clone();
    let mut quo = vec![BigRational::zero(); rem.len().saturating_sub(db).max(1)];
    while rem.len() > db && !rem.is_empty() {
        let k = rem.len() - 1 - db;
        let c = rem.last().unwrap() / &lead;
        for (j, bj) in b.iter().enumerate() {
            rem[k + j] -= &c * bj;
        }
        quo[k] = c;
        rem = q_trim(rem);
    }
    debug_assert!(rem.is_empty(), "inexact division in Bareiss elimination");
    q_trim(quo)
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

fn sylvester_rows<T: Clone>(fr: &[T], gr: &[T], zero: T) -> Vec<Vec<T>> {
    // fr, gr: coefficients of p^m..p^0 (descending)
    let m = fr.len() - 1;
    let n = gr.len() - 1;
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for s in 0..n {
        let mut row = vec![zero.clone(); size];
        for (k, a) in fr.iter().enumerate() {
            row[s + k] = a.clone();
        }
        rows.push(row);
    }
    for s in 0..m {
        let mut row = vec![zero.clone(); size];
        for (k, a) in gr.iter().enumerate() {
            row[s + k] = a.clone();
        }
        rows.push(row);
    }
    rows
}

pub fn resultant_exact(f: &BivariatePoly, g: &BivariatePoly) -> ComplexPoly {
    let conv = |b: &BivariatePoly| -> Vec<QPoly> {
        (0..=b.degree_p())
            .rev()
            .map(|i| q_trim(b.row(i).coeffs().iter().map(|c| to_rational(c.re)).collect()))
            .collect()
    };
    let mut m = sylvester_rows(&conv(f), &conv(g), vec![]);
    let n = m.len();
    let mut sign = 1i32;
    let mut prev: QPoly = vec![BigRational::from_integer(BigInt::from(1))];
    for k in 0..n - 1 {
        if m[k][k].is_empty() {
            match (k + 1..n).find(|&i| !m[i][k].is_empty()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return ComplexPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = q_sub(&q_mul(&m[k][k], &m[i][j]), &q_mul(&m[i][k], &m[k][j]));
                m[i][j] = q_div_exact(&t, &prev);
            }
            m[i][k] = vec![];
        }
        prev = m[k][k].clone();
    }
    let det = &m[n - 1][n - 1];
    ComplexPoly::new(
        det.iter()
            .map(|c| Complex64::new(sign as f64 * c.to_f64().unwrap_or(f64::NAN), 0.0))
            .collect(),
    )
}

pub fn resultant_interp(f: &BivariatePoly, g: &BivariatePoly) -> ComplexPoly {
    let (m, n) = (f.degree_p(), g.degree_p());
    let bound = n * f.degree_q() + m * g.degree_q();
    let npts = bound + 1;
    let rows_at = |b: &BivariatePoly, q: Complex64| -> Vec<Complex64> {
        (0..=b.degree_p()).rev().map(|i| b.row(i).eval(q)).collect()
    };
    let values: Vec<Complex64> = (0..npts)
        .map(|k| {
            let q = Complex64::from_polar(1.0, TAU * k as f64 / npts as f64);
            let rows = sylvester_rows(&rows_at(f, q), &rows_at(g, q), Complex64::zero());
            let size = rows.len();
            let mat = DMatrix::from_fn(size, size, |i, j| rows[i][j]);
            mat.determinant()
        })
        .collect();
    let coeffs: Vec<Complex64> = (0..npts)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -TAU * (j * k) as f64 / npts as f64))
                .sum::<Complex64>()
                / npts as f64
        })
        .collect();
    ComplexPoly::new(coeffs).trimmed(1e-11)
}
