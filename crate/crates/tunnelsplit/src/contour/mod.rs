//! Sheet-tracked continuation of p(q) and quadrature of ∫ p dq and ∫ dq/F_p.

mod path;
pub mod quad;
pub mod track;

pub use path::{PathSpec, Segment};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::polyalg::{expand_at_infinity, series_sqrt, BivariatePoly, ComplexPoly};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use track::{min_separation, track, Track};

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationResult {
    pub end_sheet: usize,
    pub action: Complex64,
    pub time: Complex64,
    pub error_estimate: f64,
    /// Values of all sheets at the end point, in start-sheet order.
    pub end_values: Vec<Complex64>,
}

/// ∫ p dq and ∫ dq/F_p over a tracked parameter range on one column.
pub fn integrate_track<Q, D>(
    poly: &BivariatePoly,
    qf: &Q,
    dqf: &D,
    tr: &Track,
    sheet: usize,
    tol: f64,
) -> Result<(Complex64, Complex64, f64)>
where
    Q: Fn(f64) -> Complex64,
    D: Fn(f64) -> Complex64,
{
    let fp = poly.derivative_p();
    let mut singular: Option<Complex64> = None;
    let mut f = |t: f64| {
        let q = qf(t);
        let p = track::eval_sheet(poly, qf, tr, sheet, t);
        let dq = dqf(t);
        let d = fp.eval(p, q);
        if d.norm() == 0.0 {
            singular = Some(q);
            return [p * dq, Complex64::new(0.0, 0.0)];
        }
        [p * dq, dq / d]
    };
    let (v, err) = quad::integrate_partition(&mut f, &tr.ts, tol);
    let (s, t_int) = (v[0], v[1]);
    if let Some(q) = singular {
        return Err(Error::TimeSingularity(q));
    }
    Ok((s, t_int, err))
}

/// Continue along `path` from explicit start values (all sheets), integrating
/// on column `sheet`.
pub fn continue_from(
    curve: &Curve,
    path: &PathSpec,
    start: Vec<Complex64>,
    sheet: usize,
    tol: f64,
) -> Result<(Complex64, Complex64, f64, Vec<Complex64>)> {
    let poly = curve.poly();
    let mut vals = start;
    let mut s = Complex64::new(0.0, 0.0);
    let mut t = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for seg in &path.segments {
        curve.check_clearance(seg)?;
        let qf = |x: f64| seg.point(x);
        let dqf = |x: f64| seg.deriv(x);
        let tr = track(poly, &qf, 0.0, 1.0, vals)?;
        let (a, b, e) = integrate_track(poly, &qf, &dqf, &tr, sheet, tol)?;
        s += a;
        t += b;
        err += e;
        vals = tr.last().to_vec();
    }
    Ok((s, t, err, vals))
}

/// ∮ p dq and ∮ dq/F_p along `path`, starting on `path.start_sheet` in the
/// global labeling; `end_sheet` is reported in the labeling at the end point.
pub fn continue_along(curve: &Curve, path: &PathSpec, tol: f64) -> Result<ContinuationResult> {
    let labels = curve.sheets_at(path.start())?;
    let (action, time, err, end_values) = continue_from(curve, path, labels.clone(), path.start_sheet, tol)?;
    let end_labels = if (path.end() - path.start()).norm() <= 1e-12 * (1.0 + path.start().norm()) {
        labels
    } else {
        curve.sheets_at(path.end())?
    };
    let end_sheet = Curve::nearest(&end_labels, end_values[path.start_sheet]);
    Ok(ContinuationResult { end_sheet, action, time, error_estimate: err, end_values })
}

/// How to pick the sheet for a real segment between turning points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BranchRule {
    /// Sheet index in the global labeling (upper-side boundary values).
    Sheet(usize),
    /// The colliding pair's member with p real and positive at the midpoint.
    PositiveReal,
    /// The colliding pair's member with p = +i|p| at the midpoint.
    PositiveImag,
    /// The sheet whose midpoint value is nearest to the given one.
    Nearest(Complex64),
}

/// ∫ p dq and ∫ dq/F_p between adjacent real turning points, with the
/// substitution q = m + h sin θ absorbing both square-root endpoints.
pub fn segment_integrals(curve: &Curve, qa: f64, qb: f64, rule: BranchRule, tol: f64) -> Result<(Complex64, Complex64)> {
    let spread = curve.spread();
    let (lo, hi) = (qa.min(qb), qa.max(qb));
    let strict = 1e-7 * spread;
    for s in curve.singular_points() {
        if s.im.abs() < 1e-9 * spread && s.re > lo + strict && s.re < hi - strict {
            return Err(Error::NotAdjacent);
        }
    }
    let poly = curve.poly();
    let m = 0.5 * (qa + qb);
    let h = 0.5 * (qb - qa);
    let qf = |t: f64| Complex64::new(m + h * (PI * (t - 0.5)).sin(), 0.0);
    let dqf = |t: f64| Complex64::new(PI * h * (PI * (t - 0.5)).cos(), 0.0);
    let mid = curve.sheets_at(Complex64::new(m, 0.0))?;
    // Near the ends E − V(q) suffers cancellation, so the last EPS of the
    // parameter is integrated from a cubic through interior samples.
    const EPS: f64 = 1e-3;
    const W: [f64; 4] = [55.0 / 24.0, -59.0 / 24.0, 37.0 / 24.0, -9.0 / 24.0];
    let left = track(poly, &qf, 0.5, EPS, mid.clone())?;
    let right = track(poly, &qf, 0.5, 1.0 - EPS, mid.clone())?;
    let pair = |tr: &Track| -> (usize, usize) {
        let v = tr.last();
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let d = (v[i] - v[j]).norm();
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        (best.0, best.1)
    };
    let (pl, pr) = (pair(&left), pair(&right));
    let colliding = if pl == pr { Some([pl.0, pl.1]) } else { None };
    let sheet = match rule {
        BranchRule::Sheet(k) => k,
        BranchRule::Nearest(p) => Curve::nearest(&mid, p),
        BranchRule::PositiveReal | BranchRule::PositiveImag => {
            let cand = colliding.ok_or_else(|| {
                Error::Numerical("segment endpoints are not ramified on a common sheet pair".into())
            })?;
            let key = |p: Complex64| if rule == BranchRule::PositiveReal { p.re } else { p.im };
            if key(mid[cand[0]]) >= key(mid[cand[1]]) {
                cand[0]
            } else {
                cand[1]
            }
        }
    };
    if min_separation(&mid) == 0.0 {
        return Err(Error::SheetCollision(Complex64::new(m, 0.0)));
    }
    let (s1, t1, _) = integrate_track(poly, &qf, &dqf, &left, sheet, tol)?;
    let (s2, t2, _) = integrate_track(poly, &qf, &dqf, &right, sheet, tol)?;
    let fp = poly.derivative_p();
    let end_piece = |tr: &Track, t0: f64, dir: f64| {
        let (mut s, mut t) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (k, w) in W.iter().enumerate() {
            let x = t0 + dir * EPS * (k as f64 + 1.0);
            let p = track::eval_sheet(poly, &qf, tr, sheet, x);
            let dq = dqf(x);
            s += p * dq * (w * EPS);
            t += dq / fp.eval(p, qf(x)) * (w * EPS);
        }
        (s, t)
    };
    let (sl, tl) = end_piece(&left, 0.0, 1.0);
    let (sr, tr_) = end_piece(&right, 1.0, -1.0);
    // `left` runs from the midpoint backwards
    Ok((s2 + sr - (s1 - sl), t2 + tr_ - (t1 - tl)))
}

pub fn segment_action(curve: &Curve, qa: f64, qb: f64, rule: BranchRule) -> Result<Complex64> {
    Ok(segment_integrals(curve, qa, qb, rule, 1e-12)?.0)
}

/// Sheet whose value at `q` belongs to the nearest-colliding pair, chosen by `rule`.
fn pick_from_pair(vals: &[Complex64], rule: BranchRule) -> usize {
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let d = (vals[i] - vals[j]).norm();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    let (a, b) = (best.0, best.1);
    match rule {
        BranchRule::Sheet(k) => k,
        BranchRule::Nearest(p) => Curve::nearest(vals, p),
        BranchRule::PositiveReal => {
            if vals[a].re >= vals[b].re {
                a
            } else {
                b
            }
        }
        BranchRule::PositiveImag => {
            if vals[a].im >= vals[b].im {
                a
            } else {
                b
            }
        }
    }
}

/// ∫ p dq and ∫ dq/F_p along a polygon whose first and last vertices are
/// square-root branch points. The integration starts on the sheet pair that
/// collides at the first vertex (member chosen by `rule` just off the vertex)
/// and must arrive on the pair colliding at the last one. The two end pieces
/// of length δ are added from the local square-root behaviour.
pub fn branch_path_integrals(
    curve: &Curve,
    waypoints: &[Complex64],
    rule: BranchRule,
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    let n = waypoints.len();
    if n < 2 {
        return Err(Error::DegenerateInput("path needs two vertices".into()));
    }
    let delta = 1e-5 * curve.spread();
    let u0 = (waypoints[1] - waypoints[0]) / (waypoints[1] - waypoints[0]).norm();
    let u1 = (waypoints[n - 1] - waypoints[n - 2]) / (waypoints[n - 1] - waypoints[n - 2]).norm();
    let a = waypoints[0] + u0 * delta;
    let b = waypoints[n - 1] - u1 * delta;
    let mut pts = vec![a];
    pts.extend_from_slice(&waypoints[1..n - 1]);
    pts.push(b);
    let vals = curve.sheets_at(a)?;
    let sheet = pick_from_pair(&vals, rule);
    let path = PathSpec::polygon(&pts, sheet, false);
    let (s, t, _, end) = continue_from(curve, &path, vals.clone(), sheet, tol)?;
    // the arriving value must be one of the pair colliding at the end vertex
    let mut close = (f64::INFINITY, 0);
    for (j, v) in end.iter().enumerate() {
        if j != sheet {
            let d = (v - end[sheet]).norm();
            if d < close.0 {
                close = (d, j);
            }
        }
    }
    let others = end
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != sheet && *j != close.1)
        .map(|(_, v)| (v - end[sheet]).norm())
        .fold(f64::INFINITY, f64::min);
    if close.0 > 0.1 * others {
        return Err(Error::Numerical("path does not end on a sheet ramified at its last vertex".into()));
    }
    let fp = curve.poly().derivative_p();
    let (pa, pb) = (vals[sheet], end[sheet]);
    let ds = u0 * delta;
    let de = u1 * delta;
    let s_ends = pa * ds * (2.0 / 3.0) + pb * de * (2.0 / 3.0);
    let t_ends = ds * 2.0 / fp.eval(pa, a) + de * 2.0 / fp.eval(pb, b);
    Ok((s + s_ends, t + t_ends))
}

/// ∮ ω_k along `path` for differentials ω_k = g_k(p, q) dq / F_p(p, q), on
/// column `sheet` of the start values. Returns the periods and end values.
pub fn periods<const N: usize, G>(
    curve: &Curve,
    path: &PathSpec,
    start: Vec<Complex64>,
    sheet: usize,
    forms: &G,
    tol: f64,
) -> Result<([Complex64; N], Vec<Complex64>)>
where
    G: Fn(Complex64, Complex64) -> [Complex64; N],
{
    let poly = curve.poly();
    let fp = poly.derivative_p();
    let mut vals = start;
    let mut acc = [Complex64::new(0.0, 0.0); N];
    for seg in &path.segments {
        curve.check_clearance(seg)?;
        let qf = |x: f64| seg.point(x);
        let tr = track(poly, &qf, 0.0, 1.0, vals)?;
        let mut f = |t: f64| {
            let q = seg.point(t);
            let p = track::eval_sheet(poly, &qf, &tr, sheet, t);
            let w = seg.deriv(t) / fp.eval(p, q);
            let mut g = forms(p, q);
            for x in g.iter_mut() {
                *x *= w;
            }
            g
        };
        let (v, _) = quad::integrate_partition(&mut f, &tr.ts, tol);
        for m in 0..N {
            acc[m] += v[m];
        }
        vals = tr.last().to_vec();
    }
    Ok((acc, vals))
}

/// Sheet value at a large real point q_big, continued from the anchor.
fn value_far_right(curve: &Curve, sheet: usize, q_big: f64) -> Result<Complex64> {
    let vals = curve.transport(&[curve.anchor(), Complex64::new(q_big, 0.0)], curve.anchor_sheets()?)?;
    Ok(vals[sheet])
}

/// ∮ p dq around q = ∞ (clockwise in q) on the anchor sheet `sheet`, from
/// the Laurent coefficient of the sheet's expansion in η = 1/q.
pub fn residue_at_infinity(curve: &Curve, sheet: usize) -> Result<Complex64> {
    let q_big = 4.0 * curve.infinity_radius();
    let p_big = value_far_right(curve, sheet, q_big)?;
    let ser = expand_at_infinity(curve.poly(), Complex64::new(q_big, 0.0), p_big, 8)?;
    Ok(ser.loop_integral())
}

/// Same quantity for curves a p² + b(q) = 0 with deg b = 2m, from the Taylor
/// coefficients C_k of √(−W(η)), W(η) = η^{2m} b(1/η)/a: S = ∓2πi C_{m+1}.
pub fn residue_at_infinity_sqrt(curve: &Curve, sheet: usize) -> Result<Complex64> {
    let poly = curve.poly();
    if poly.degree_p() != 2 || !poly.row(1).is_zero() || poly.row(2).degree() != 0 {
        return Err(Error::ExpansionFailure("not of the form a p^2 + b(q)".into()));
    }
    let a = poly.row(2).coeff(0);
    let b = poly.row(0);
    if b.degree() % 2 != 0 {
        return Err(Error::ExpansionFailure("odd degree: ramified at infinity".into()));
    }
    let m = b.degree() / 2;
    let w = ComplexPoly::new(b.coeffs().iter().rev().map(|c| c / a).collect());
    let ser = series_sqrt(&w, m + 2)?;
    let q_big = 4.0 * curve.infinity_radius();
    let p_big = value_far_right(curve, sheet, q_big)?;
    let y = p_big / Complex64::new(q_big, 0.0).powu(m as u32);
    let sign = if (y - ser.coeffs[0]).norm() <= (y + ser.coeffs[0]).norm() { 1.0 } else { -1.0 };
    Ok(Complex64::new(0.0, -2.0 * PI) * ser.coeffs[m + 1] * sign)
}

/// Large-circle quadrature of the same loop (clockwise, radius `r`).
pub fn residue_at_infinity_quadrature(curve: &Curve, sheet: usize, r: f64, tol: f64) -> Result<Complex64> {
    let start = value_far_right(curve, sheet, r)?;
    let vals = curve.transport(&[curve.anchor(), Complex64::new(r, 0.0)], curve.anchor_sheets()?)?;
    debug_assert!((vals[sheet] - start).norm() == 0.0);
    let path = PathSpec::circle(Complex64::new(0.0, 0.0), r, 0.0, -1.0, sheet);
    let (s, _, _, _) = continue_from(curve, &path, vals, sheet, tol)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_around_sqrt_branch_point_swaps_sheets() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 1, -1.0)]);
        let curve = Curve::new(f).unwrap();
        let path = PathSpec::circle(c(0.0, 0.0), 1.0, 0.0, 1.0, 1);
        let r = continue_along(&curve, &path, 1e-12).unwrap();
        assert_eq!(r.end_sheet, 0);
        // ∫ sqrt(q) dq once around the unit circle from +1: -4/3
        assert!((r.action - c(-4.0 / 3.0, 0.0)).norm() < 1e-10, "{}", r.action);
    }
}
