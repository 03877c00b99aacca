use super::ComplexPoly;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

pub const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Distinct roots with multiplicities, sorted by (re, im).
pub fn roots(poly: &ComplexPoly, tol: f64) -> Result<Vec<Root>> {
    if poly.degree() == 0 {
        return Err(Error::DegenerateInput("constant polynomial has no roots".into()));
    }
    let flat = aberth(poly, None, tol)?;
    let mut clustered = cluster(&flat);
    for r in clustered.iter_mut().filter(|r| r.multiplicity > 1) {
        r.value = polish_multiple(poly, r.value, r.multiplicity);
    }
    clustered.sort_by(|a, b| lex(a.value, b.value));
    let repeated = expand(&clustered);
    let residual = reconstruction_residual(poly, &repeated);
    if residual > 100.0 * tol.max(1e-14) {
        log::debug!("root reconstruction residual {residual:.3e} above target");
    }
    Ok(clustered)
}

/// Roots repeated per multiplicity, sorted by (re, im).
pub fn roots_flat(poly: &ComplexPoly, tol: f64) -> Result<Vec<Complex64>> {
    Ok(expand(&roots(poly, tol)?))
}

fn expand(rs: &[Root]) -> Vec<Complex64> {
    rs.iter()
        .flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity))
        .collect()
}

pub(crate) fn lex(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap()
        .then(a.im.partial_cmp(&b.im).unwrap())
}

/// Relative coefficient mismatch between `poly` and the product over `roots`.
pub fn reconstruction_residual(poly: &ComplexPoly, roots: &[Complex64]) -> f64 {
    let rebuilt = ComplexPoly::from_roots(roots, poly.leading());
    let diff = &rebuilt - poly;
    diff.max_abs_coeff() / poly.max_abs_coeff()
}

/// Aberth–Ehrlich simultaneous iteration. `init` warm-starts the iteration
/// (it must have `degree` entries); otherwise a perturbed circle is used.
pub fn aberth(poly: &ComplexPoly, init: Option<&[Complex64]>, tol: f64) -> Result<Vec<Complex64>> {
    let n = poly.degree();
    let zero = Complex64::new(0.0, 0.0);
    // Exact zero roots are split off first; they would stall the relative test.
    let nz = poly.coeffs().iter().take_while(|c| **c == zero).count();
    if nz > 0 {
        let deflated = ComplexPoly::new(poly.coeffs()[nz..].to_vec());
        let mut out = vec![zero; nz];
        if deflated.degree() > 0 {
            let sub_init = init.map(|z| {
                let mut v: Vec<_> = z.to_vec();
                v.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
                v[nz..].to_vec()
            });
            out.extend(aberth(&deflated, sub_init.as_deref(), tol)?);
        }
        return Ok(out);
    }
    if n == 1 {
        return Ok(vec![-poly.coeff(0) / poly.coeff(1)]);
    }
    let dp = poly.derivative();
    let mut z: Vec<Complex64> = match init {
        Some(z0) if z0.len() == n => z0.to_vec(),
        _ => initial_circle(poly),
    };
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let zk = z[k];
            let pk = poly.eval(zk);
            if pk.norm() <= 16.0 * f64::EPSILON * poly.abs_eval(zk.norm()) {
                done[k] = true;
                continue;
            }
            let ratio = pk / dp.eval(zk);
            let mut s = zero;
            for (j, &zj) in z.iter().enumerate() {
                if j != k {
                    let d = zk - zj;
                    if d != zero {
                        s += 1.0 / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let step = if denom.norm() > 0.0 && denom.is_finite() { ratio / denom } else { ratio };
            let step = if step.is_finite() { step } else { Complex64::new(tol, tol) };
            z[k] = zk - step;
            if step.norm() < tol * (1.0 + z[k].norm()) {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Ok(z);
        }
    }
    let residual = reconstruction_residual(poly, &z);
    if residual <= 100.0 * tol.max(1e-14) {
        Ok(z)
    } else {
        Err(Error::NonConvergence { residual })
    }
}

fn initial_circle(poly: &ComplexPoly) -> Vec<Complex64> {
    let n = poly.degree();
    let an = poly.leading();
    let center = -poly.coeff(n - 1) / (an * n as f64);
    let shifted = poly.compose(&ComplexPoly::new(vec![center, Complex64::new(1.0, 0.0)]));
    // Fujiwara-type bound on the shifted root moduli.
    let mut r: f64 = 0.0;
    for k in 1..=n {
        let c = shifted.coeff(n - k).norm() / an.norm();
        if c > 0.0 {
            r = r.max(c.powf(1.0 / k as f64));
        }
    }
    if r == 0.0 || !r.is_finite() {
        r = 1.0;
    }
    (0..n)
        .map(|k| center + Complex64::from_polar(r, TAU * k as f64 / n as f64 + 0.4))
        .collect()
}

fn cluster(z: &[Complex64]) -> Vec<Root> {
    let scale = z.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let radius = 1e-7 * (1.0 + scale);
    let n = z.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while l[i] != i {
            l[i] = l[l[i]];
            i = l[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() < radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let g = find(&mut label, i);
        match groups.iter_mut().find(|(k, _)| *k == g) {
            Some((_, v)) => v.push(z[i]),
            None => groups.push((g, vec![z[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, v)| Root {
            value: v.iter().sum::<Complex64>() / v.len() as f64,
            multiplicity: v.len(),
        })
        .collect()
}

/// Newton on the (m-1)-th derivative, where an m-fold root is simple.
fn polish_multiple(poly: &ComplexPoly, z0: Complex64, m: usize) -> Complex64 {
    let mut f = poly.clone();
    for _ in 1..m {
        f = f.derivative();
    }
    let df = f.derivative();
    let mut z = z0;
    for _ in 0..8 {
        let d = df.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = f.eval(z) / d;
        if !step.is_finite() || step.norm() > 1e-6 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
        if step.norm() < 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic() {
        let r = roots(&ComplexPoly::from_real(&[-1.0, 0.0, 1.0]), 1e-12).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].value - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1].value - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn double_root_clustered() {
        let p = ComplexPoly::from_roots(&[c(2.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)], c(1.0, 0.0));
        let r = roots(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].multiplicity, 1);
        assert!((r[0].value - c(-3.0, 0.0)).norm() < 1e-10);
        assert_eq!(r[1].multiplicity, 2);
        assert!((r[1].value - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn zero_roots_split_off() {
        let p = ComplexPoly::from_real(&[0.0, 0.0, -4.0, 0.0, 1.0]);
        let r = roots_flat(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 4);
        assert!((r[0] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((r[3] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn double_well_turning_points() {
        // expanded (q+2)(q+1)(q-1)(q-2) = q^4 - 5q^2 + 4
        let p = ComplexPoly::from_real(&[4.0, 0.0, -5.0, 0.0, 1.0]);
        let r = roots_flat(&p, 1e-13).unwrap();
        for (got, want) in r.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn warm_start() {
        let p = ComplexPoly::from_roots(&[c(1.0, 1.0), c(-1.0, 0.5), c(0.0, -2.0)], c(2.0, 0.0));
        let init = [c(1.1, 0.9), c(-0.9, 0.4), c(0.1, -2.1)];
        let z = aberth(&p, Some(&init), 1e-14).unwrap();
        assert!((z[0] - c(1.0, 1.0)).norm() < 1e-12);
        assert!((z[2] - c(0.0, -2.0)).norm() < 1e-12);
    }
}
