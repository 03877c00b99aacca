use super::{roots_flat, BivariatePoly, ComplexPoly};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Center {
    Finite(Complex64),
    /// Expansion in η = 1/q.
    Infinity,
}

/// p = Σ_k coeffs[k] · z^{(offset + k)/w}, where z = q − q0 or z = 1/q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub center: Center,
    pub ramification: usize,
    pub offset: i64,
    pub coeffs: Vec<Complex64>,
}

impl SeriesExpansion {
    pub fn truncation_order(&self) -> i64 {
        self.offset + self.coeffs.len() as i64 - 1
    }

    /// Coefficient of z^{n/w}.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let k = n - self.offset;
        if k < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs.get(k as usize).copied().unwrap_or_default()
    }

    /// Exponent numerators n (in units of 1/w) carrying a nonzero coefficient.
    pub fn exponents(&self, cutoff: f64) -> Vec<i64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > cutoff)
            .map(|(k, _)| self.offset + k as i64)
            .collect()
    }

    pub fn has_negative_exponents(&self, cutoff: f64) -> bool {
        self.exponents(cutoff).iter().any(|&n| n < 0)
    }

    /// ∮ p dq over the closed loop on the surface: w turns counterclockwise
    /// around a finite centre, or once counterclockwise in η around infinity
    /// (clockwise in q).
    pub fn loop_integral(&self) -> Complex64 {
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        match self.center {
            Center::Finite(_) => two_pi_i * self.ramification as f64 * self.coeff(-(self.ramification as i64)),
            Center::Infinity => -two_pi_i * self.coeff(self.ramification as i64),
        }
    }

    /// Residue (1/2πi)·loop_integral.
    pub fn residue(&self) -> Complex64 {
        self.loop_integral() / Complex64::new(0.0, 2.0 * PI)
    }

    /// Evaluate at a local parameter t with z = t^w.
    pub fn eval_local(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * t.powi((self.offset + k as i64) as i32))
            .sum()
    }
}

/// Truncated power series product.
fn ser_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, &x) in a.iter().enumerate().take(n) {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Taylor coefficients of √(−W(η)) at η = 0, principal branch at the origin.
pub fn series_sqrt(w: &ComplexPoly, order: usize) -> Result<SeriesExpansion> {
    let f: Vec<Complex64> = (0..=order).map(|k| -w.coeff(k)).collect();
    if f[0] == Complex64::new(0.0, 0.0) {
        return Err(Error::BranchAtOrigin);
    }
    let mut c = vec![f[0].sqrt()];
    for k in 1..=order {
        let s: Complex64 = (1..k).map(|j| c[j] * c[k - j]).sum();
        c.push((f[k] - s) / (c[0] * 2.0));
    }
    Ok(SeriesExpansion {
        center: Center::Finite(Complex64::new(0.0, 0.0)),
        ramification: 1,
        offset: 0,
        coeffs: c,
    })
}

/// Coefficients a[i][j] of F(p0 + y, q0 + s) = Σ a_ij y^i s^j.
pub fn taylor_shift(f: &BivariatePoly, p0: Complex64, q0: Complex64) -> Vec<Vec<Complex64>> {
    let (dp, dq) = (f.degree_p(), f.degree_q());
    let mut a = vec![vec![Complex64::new(0.0, 0.0); dq + 1]; dp + 1];
    let binom = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    for (i, j, c) in f.terms() {
        for ii in 0..=i {
            let bp = binom(i, ii) * p0.powu((i - ii) as u32);
            for jj in 0..=j {
                a[ii][jj] += c * bp * binom(j, jj) * q0.powu((j - jj) as u32);
            }
        }
    }
    a
}

/// Local expansions of every sheet pair ramified over q0.
///
/// Only square-root branch points with finite p are expanded; anything else
/// is reported rather than guessed.
pub fn puiseux_at_branch(f: &BivariatePoly, q0: Complex64, order: usize) -> Result<Vec<SeriesExpansion>> {
    let slice = f.slice_at_q(q0);
    if slice.degree() < f.degree_p() || slice.leading().norm() < 1e-12 * f.scale_norm() {
        return Err(Error::ExpansionFailure("branch point coincides with a pole of p".into()));
    }
    let ps = roots_flat(&slice, 1e-14)?;
    let scale = 1.0 + ps.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let fp = f.derivative_p();
    let fpp = fp.derivative_p();
    let fq = f.derivative_q();
    let tiny = 1e-6 * f.scale_norm() * scale;
    // Pair up nearly coincident roots; each pair is one ramification point.
    let mut used = vec![false; ps.len()];
    let mut centers = Vec::new();
    for i in 0..ps.len() {
        if used[i] {
            continue;
        }
        let best = (0..ps.len())
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| (ps[a] - ps[i]).norm().partial_cmp(&(ps[b] - ps[i]).norm()).unwrap());
        if let Some(j) = best {
            if (ps[j] - ps[i]).norm() < 1e-5 * scale {
                used[i] = true;
                used[j] = true;
                let mut p0 = (ps[i] + ps[j]) * 0.5;
                // the double root of F is a simple root of F_p
                let fp_slice = fp.slice_at_q(q0);
                let dfp = fp_slice.derivative();
                for _ in 0..20 {
                    let step = fp_slice.eval(p0) / dfp.eval(p0);
                    if !step.is_finite() {
                        break;
                    }
                    p0 -= step;
                    if step.norm() < 1e-16 * scale {
                        break;
                    }
                }
                centers.push(p0);
            }
        }
    }
    let mut out = Vec::new();
    for p0 in centers {
        let a20 = fpp.eval(p0, q0) * 0.5;
        let a01 = fq.eval(p0, q0);
        if a01.norm() < tiny {
            return Err(Error::NotABranchPoint(q0));
        }
        if a20.norm() < tiny {
            return Err(Error::ExpansionFailure(format!(
                "more than two sheets meet at q = {q0}; only square-root branching is expanded"
            )));
        }
        let a = taylor_shift(f, p0, q0);
        let c1 = (-a01 / a20).sqrt();
        let n = order + 2;
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        y[1] = c1;
        for k in 2..=order {
            let phi = compose_shifted(&a, &y, n);
            y[k] = -phi[k + 1] / (a20 * c1 * 2.0);
        }
        y[0] = p0;
        y.truncate(order + 1);
        out.push(SeriesExpansion {
            center: Center::Finite(q0),
            ramification: 2,
            offset: 0,
            coeffs: y,
        });
    }
    if out.is_empty() {
        return Err(Error::NotABranchPoint(q0));
    }
    Ok(out)
}

/// Φ(t) = Σ a_ij Y(t)^i t^{2j} truncated to n terms (Y has no constant term).
fn compose_shifted(a: &[Vec<Complex64>], y: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut phi = vec![Complex64::new(0.0, 0.0); n];
    let mut ypow = vec![Complex64::new(0.0, 0.0); n];
    ypow[0] = Complex64::new(1.0, 0.0);
    for row in a.iter() {
        for (j, &c) in row.iter().enumerate() {
            if 2 * j >= n || c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n - 2 * j {
                phi[k + 2 * j] += c * ypow[k];
            }
        }
        ypow = ser_mul(&ypow, y, n);
    }
    phi
}

/// Growth exponents k (p ~ q^k) at infinity from the upper Newton-polygon
/// hull of F, each with the number of sheets it carries.
pub fn growth_at_infinity(f: &BivariatePoly) -> Vec<(f64, usize)> {
    // For each p-degree i, the highest q-degree present.
    let pts: Vec<(i64, i64)> = (0..=f.degree_p())
        .filter_map(|i| {
            let r = f.row(i);
            (!r.is_zero()).then(|| (i as i64, r.degree() as i64))
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = 0usize;
    while cur + 1 < pts.len() {
        // next vertex of the upper hull: steepest ascent, farthest on ties
        let (i0, j0) = pts[cur];
        let mut best = cur + 1;
        let mut best_k = f64::INFINITY;
        for (m, &(i, j)) in pts.iter().enumerate().skip(cur + 1) {
            let k = (j0 - j) as f64 / (i - i0) as f64;
            if k < best_k || (k == best_k && m > best) {
                best_k = k;
                best = m;
            }
        }
        out.push((best_k, (pts[best].0 - i0) as usize));
        cur = best;
    }
    out
}

/// Laurent expansion p = Σ_{n ≥ -k} c_n η^n at q = ∞ for the sheet whose
/// value at the large point `q_big` is `p_big`. Requires integer growth k and
/// simple roots of the leading-weight polynomial.
pub fn expand_at_infinity(
    f: &BivariatePoly,
    q_big: Complex64,
    p_big: Complex64,
    order: usize,
) -> Result<SeriesExpansion> {
    let mut best: Option<(f64, SeriesExpansion)> = None;
    for (k, _) in growth_at_infinity(f) {
        if (k - k.round()).abs() > 1e-12 {
            continue;
        }
        let k = k.round() as i64;
        // G(y, η) = η^M F(y/η^k, 1/η)
        let m = f.terms().map(|(i, j, _)| i as i64 * k + j as i64).max().unwrap();
        let mut g = vec![vec![Complex64::new(0.0, 0.0); 1]; f.degree_p() + 1];
        for (i, j, c) in f.terms() {
            let e = (m - i as i64 * k - j as i64) as usize;
            if g[i].len() <= e {
                g[i].resize(e + 1, Complex64::new(0.0, 0.0));
            }
            g[i][e] += c;
        }
        let g = BivariatePoly::new(g);
        let g0 = g.slice_at_q(Complex64::new(0.0, 0.0));
        if g0.degree() == 0 {
            continue;
        }
        let y0s = roots_flat(&g0, 1e-14)?;
        let eta_big = 1.0 / q_big;
        let target = p_big * eta_big.powi(k as i32);
        for (idx, &y0) in y0s.iter().enumerate() {
            if g0.coeff(0) == Complex64::new(0.0, 0.0) && y0.norm() < 1e-12 {
                // zero root belongs to a slower-growing edge
                continue;
            }
            let sep = y0s
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != idx)
                .map(|(_, z)| (z - y0).norm())
                .fold(f64::INFINITY, f64::min);
            if sep < 1e-8 * (1.0 + y0.norm()) {
                continue;
            }
            let coeffs = newton_lift(&g, y0, order + k as usize + 2)?;
            let ser = SeriesExpansion {
                center: Center::Infinity,
                ramification: 1,
                offset: -k,
                coeffs,
            };
            let val: Complex64 = ser.coeffs.iter().enumerate().map(|(j, c)| c * eta_big.powu(j as u32)).sum();
            let err = (val - target).norm() / (1.0 + target.norm());
            if best.as_ref().is_none_or(|(e, _)| err < *e) {
                best = Some((err, ser));
            }
        }
    }
    match best {
        Some((err, ser)) if err < 1e-3 => Ok(ser),
        Some((err, _)) => Err(Error::ExpansionFailure(format!(
            "no Laurent branch matches the sheet at infinity (mismatch {err:.2e})"
        ))),
        None => Err(Error::ExpansionFailure(
            "ramified or degenerate behaviour at infinity".into(),
        )),
    }
}

/// Power series y(η) with G(y(η), η) = 0 and y(0) = y0 a simple root.
fn newton_lift(g: &BivariatePoly, y0: Complex64, n: usize) -> Result<Vec<Complex64>> {
    let gy = g.derivative_p().eval(y0, Complex64::new(0.0, 0.0));
    if gy.norm() < 1e-14 * g.scale_norm() {
        return Err(Error::ExpansionFailure("multiple root of the leading-weight polynomial".into()));
    }
    let rows: Vec<Vec<Complex64>> = (0..=g.degree_p()).map(|i| g.row(i).coeffs().to_vec()).collect();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    y[0] = y0;
    for order in 1..n {
        // Horner in y with series coefficients
        let mut acc = vec![Complex64::new(0.0, 0.0); order + 1];
        for row in rows.iter().rev() {
            acc = ser_mul(&acc, &y[..order], order + 1);
            for (j, &c) in row.iter().enumerate().take(order + 1) {
                acc[j] += c;
            }
        }
        y[order] = -acc[order] / gy;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sqrt_of_constant() {
        let s = series_sqrt(&ComplexPoly::from_real(&[-1.0]), 5).unwrap();
        assert_eq!(s.coeffs[0], c(1.0, 0.0));
        assert!(s.coeffs[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn sqrt_squares_back() {
        let w = ComplexPoly::from_real(&[2.0, -1.0, 0.5, 3.0, -0.25]);
        let s = series_sqrt(&w, 12).unwrap();
        let sq = ser_mul(&s.coeffs, &s.coeffs, 13);
        for (k, v) in sq.iter().enumerate() {
            assert!((v + w.coeff(k)).norm() < 1e-12, "order {k}");
        }
    }

    #[test]
    fn sqrt_rejects_zero_origin() {
        let w = ComplexPoly::from_real(&[0.0, 1.0]);
        assert!(matches!(series_sqrt(&w, 3), Err(Error::BranchAtOrigin)));
    }

    #[test]
    fn puiseux_of_simple_square_root() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 1, -1.0), (0, 0, 1.0)]);
        let s = &puiseux_at_branch(&f, c(1.0, 0.0), 6).unwrap()[0];
        assert_eq!(s.ramification, 2);
        assert!((s.coeffs[1].norm() - 1.0).abs() < 1e-12);
        assert!(s.coeffs[2..].iter().all(|x| x.norm() < 1e-12));
        assert!(!s.has_negative_exponents(1e-14));
        assert_eq!(s.residue(), c(0.0, 0.0));
    }

    #[test]
    fn puiseux_rejects_regular_point() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 1, -1.0)]);
        assert!(matches!(puiseux_at_branch(&f, c(5.0, 0.0), 4), Err(Error::NotABranchPoint(_))));
    }

    #[test]
    fn puiseux_satisfies_curve() {
        // p^2/2 + (q^4 - 5 q^2 + 4) at q0 = 1
        let f = BivariatePoly::from_real_terms(&[(2, 0, 0.5), (0, 4, 1.0), (0, 2, -5.0), (0, 0, 4.0)]);
        let s = &puiseux_at_branch(&f, c(1.0, 0.0), 14).unwrap()[0];
        let t = c(0.05, 0.03);
        let p = s.eval_local(t);
        assert!(f.eval(p, c(1.0, 0.0) + t * t).norm() < 1e-12);
    }

    #[test]
    fn growth_of_normal_form_like_curve() {
        // p^4 + q^8 + p^2 q^4 -> all four sheets grow like q^2
        let f = BivariatePoly::from_real_terms(&[(4, 0, 1.0), (0, 8, 1.0), (2, 4, 1.0)]);
        assert_eq!(growth_at_infinity(&f), vec![(2.0, 4)]);
    }

    #[test]
    fn laurent_matches_sqrt_route() {
        // p^2/2 + (q+2)(q+1)(q-1)(q-3)
        let v = ComplexPoly::from_roots(&[c(-2.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)], c(1.0, 0.0));
        let mut f = BivariatePoly::from_q_poly(&v);
        f.add_term(2, 0, c(0.5, 0.0));
        let q_big = c(40.0, 0.0);
        let w = ComplexPoly::from_roots(&[c(-0.5, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(1.0 / 3.0, 0.0)], c(2.0 * 6.0, 0.0));
        let s = series_sqrt(&w, 8).unwrap();
        let p_big: Complex64 = s.coeffs.iter().enumerate().map(|(k, a)| a * q_big.powi(2 - k as i32)).sum();
        let l = expand_at_infinity(&f, q_big, p_big, 6).unwrap();
        assert_eq!(l.offset, -2);
        for k in 0..6 {
            assert!((l.coeffs[k] - s.coeffs[k]).norm() < 1e-12, "k={k}");
        }
    }
}
