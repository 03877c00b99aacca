use crate::error::{Error, Result};
use crate::polyalg::{aberth, BivariatePoly};
use num_complex::Complex64;

/// A step is accepted only if no sheet moved by more than this fraction of
/// the smallest pairwise sheet distance at the previous point.
pub const SAFETY: f64 = 0.1;

const MIN_DT: f64 = 1e-14;

/// All p-roots of F(·, q), warm-started from `guess` when given.
pub fn sheet_values(poly: &BivariatePoly, q: Complex64, guess: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
    let slice = poly.slice_at_q(q);
    if slice.degree() < poly.degree_p() {
        return Err(Error::PathThroughSingularity(q));
    }
    aberth(&slice, guess, 1e-15)
}

pub fn min_separation(v: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            m = m.min((v[i] - v[j]).norm());
        }
    }
    m
}

/// Assign each old sheet the nearest new root; None unless a bijection.
fn match_roots(old: &[Complex64], new: &[Complex64]) -> Option<Vec<Complex64>> {
    let mut taken = vec![false; new.len()];
    let mut out = Vec::with_capacity(old.len());
    for &o in old {
        let (j, _) = new
            .iter()
            .enumerate()
            .map(|(j, &n)| (j, (n - o).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
        if taken[j] {
            return None;
        }
        taken[j] = true;
        out.push(new[j]);
    }
    Some(out)
}

/// Nodes of a continuation: parameter values with all sheet values, in the
/// order of the sheets at the first node.
#[derive(Debug, Clone)]
pub struct Track {
    pub ts: Vec<f64>,
    pub vals: Vec<Vec<Complex64>>,
}

impl Track {
    pub fn last(&self) -> &[Complex64] {
        self.vals.last().unwrap()
    }
}

/// Continue all sheets along q(t) from t0 to t1 with adaptive step control.
pub fn track<Q: Fn(f64) -> Complex64>(
    poly: &BivariatePoly,
    qf: &Q,
    t0: f64,
    t1: f64,
    start: Vec<Complex64>,
) -> Result<Track> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut ts = vec![t0];
    let mut vals = vec![start];
    let mut t = t0;
    let mut dt = span / 16.0;
    let mut prev_slope: Option<Vec<Complex64>> = None;
    while (t1 - t) * dir > 0.0 {
        let step = dt.min((t1 - t).abs());
        let tn = if step >= (t1 - t).abs() { t1 } else { t + dir * step };
        let old = vals.last().unwrap().clone();
        let guess: Vec<Complex64> = match &prev_slope {
            Some(s) => old.iter().zip(s).map(|(o, d)| o + d * (tn - t)).collect(),
            None => old.clone(),
        };
        let sep = min_separation(&old);
        let accepted = sheet_values(poly, qf(tn), Some(&guess))
            .ok()
            .and_then(|new| match_roots(&old, &new))
            .filter(|m| m.iter().zip(&old).all(|(a, b)| (a - b).norm() < SAFETY * sep));
        match accepted {
            Some(m) => {
                prev_slope = Some(m.iter().zip(&old).map(|(a, b)| (a - b) / (tn - t)).collect());
                t = tn;
                ts.push(t);
                vals.push(m);
                dt = (step * 1.5).min(span / 8.0);
            }
            None => {
                dt = step * 0.5;
                prev_slope = None;
                if dt < MIN_DT * (1.0 + t.abs()) {
                    return Err(Error::SheetCollision(qf(t)));
                }
            }
        }
    }
    Ok(Track { ts, vals })
}

/// Value of one tracked sheet at an arbitrary parameter inside the track.
pub fn eval_sheet<Q: Fn(f64) -> Complex64>(
    poly: &BivariatePoly,
    qf: &Q,
    tr: &Track,
    sheet: usize,
    t: f64,
) -> Complex64 {
    let n = tr.ts.len();
    let increasing = tr.ts[n - 1] >= tr.ts[0];
    let pos = if increasing {
        tr.ts.partition_point(|&x| x <= t)
    } else {
        tr.ts.partition_point(|&x| x >= t)
    };
    let k = pos.clamp(1, n - 1) - 1;
    let (ta, tb) = (tr.ts[k], tr.ts[k + 1]);
    let w = if tb != ta { ((t - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
    let interp: Vec<Complex64> = tr.vals[k].iter().zip(&tr.vals[k + 1]).map(|(a, b)| a + (b - a) * w).collect();
    let guess = interp[sheet];
    let q = qf(t);
    let sep = min_separation(&interp);
    // Newton from the interpolant; the step control keeps it inside the basin.
    let slice = poly.slice_at_q(q);
    let ds = slice.derivative();
    let mut p = guess;
    for _ in 0..30 {
        let d = ds.eval(p);
        if d.norm() == 0.0 {
            break;
        }
        let step = slice.eval(p) / d;
        if !step.is_finite() {
            break;
        }
        p -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + p.norm()) {
            break;
        }
    }
    if p.is_finite() && (p - guess).norm() < 0.3 * sep {
        return p;
    }
    match sheet_values(poly, q, Some(&interp)) {
        Ok(all) => *all
            .iter()
            .min_by(|a, b| (*a - guess).norm().partial_cmp(&(*b - guess).norm()).unwrap())
            .unwrap(),
        Err(_) => guess,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_swaps_around_origin() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 1, -1.0)]);
        let qf = |t: f64| Complex64::from_polar(1.0, std::f64::consts::TAU * t);
        let start = vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
        let tr = track(&f, &qf, 0.0, 1.0, start).unwrap();
        let end = tr.last();
        assert!((end[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((end[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let mid = eval_sheet(&f, &qf, &tr, 1, 0.25);
        assert!((mid - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-12);
    }
}
