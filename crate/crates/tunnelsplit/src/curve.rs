//! Riemann-surface data of F(p, q) = 0: sheets, branch points, monodromy, genus.

use crate::contour::track::{sheet_values, track};
use crate::contour::{integrate_track, Segment};
use crate::error::{Error, Result};
use crate::polyalg::{discriminant_in_p, roots, BivariatePoly, Root};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Sheet permutation: `self.0[i]` is the sheet reached by starting on sheet i.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(a, b);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Walk `self` first, then `other`.
    pub fn then(&self, other: &Self) -> Self {
        Self(self.0.iter().map(|&i| other.0[i]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut v = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            v[j] = i;
        }
        Self(v)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Cycles including fixed points, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for s in 0..self.0.len() {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut j = self.0[s];
            while j != s {
                seen[j] = true;
                c.push(j);
                j = self.0[j];
            }
            out.push(c);
        }
        out
    }

    /// Σ (cycle length − 1): the ramification carried by this permutation.
    pub fn ramification(&self) -> usize {
        self.cycles().iter().map(|c| c.len() - 1).sum()
    }

    pub fn from_cycle(n: usize, cycle: &[usize]) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        for k in 0..cycle.len() {
            v[cycle[k]] = cycle[(k + 1) % cycle.len()];
        }
        Self(v)
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let cyc: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cyc.is_empty() {
            return write!(f, "()");
        }
        for c in cyc {
            let s: Vec<String> = c.iter().map(|i| i.to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchKind {
    Finite,
    AtInfinity,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub location: Complex64,
    pub ramification: usize,
    /// The cycle of the local monodromy this ramification point carries.
    pub monodromy: Permutation,
    pub kind: BranchKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Puncture {
    /// None for points above q = ∞.
    pub location: Option<Complex64>,
    /// Sheets (anchor labeling) meeting at this point.
    pub sheets: Vec<usize>,
    /// ∮ p dq around the puncture (q-plane counterclockwise for finite
    /// points, clockwise for points above infinity).
    pub loop_action: Complex64,
    pub growth: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceTopology {
    pub sheet_count: usize,
    pub ramification_index: usize,
    pub genus: i64,
    pub genus_riemann_hurwitz: i64,
    pub branch_points: Vec<BranchPoint>,
    pub punctures: Vec<Puncture>,
    /// Local monodromies in product order (see `Curve::lasso_order`).
    pub local_monodromy: Vec<(Complex64, Permutation)>,
    pub monodromy_infinity: Permutation,
    pub transitive: bool,
    pub anchor: Complex64,
    pub anchor_sheets: Vec<Complex64>,
}

impl SurfaceTopology {
    pub fn holes(&self) -> usize {
        self.punctures.len() + self.branch_points.len()
    }

    /// Ordered product of all finite monodromies followed by infinity.
    pub fn monodromy_product(&self) -> Permutation {
        let mut acc = Permutation::identity(self.sheet_count);
        for (_, p) in &self.local_monodromy {
            acc = acc.then(p);
        }
        acc.then(&self.monodromy_infinity)
    }
}

/// Curve F = 0 with its discriminant data and the global sheet labeling.
#[derive(Debug, Clone)]
pub struct Curve {
    poly: BivariatePoly,
    disc: Vec<Root>,
    poles: Vec<Complex64>,
    anchor: Complex64,
    spread: f64,
    top: f64,
}

impl Curve {
    pub fn new(poly: BivariatePoly) -> Result<Self> {
        if poly.degree_p() == 0 {
            return Err(Error::DegenerateInput("curve must depend on p".into()));
        }
        let disc_poly = discriminant_in_p(&poly)?;
        if disc_poly.is_zero() || disc_poly.max_abs_coeff() == 0.0 {
            return Err(Error::DiscriminantDegenerate);
        }
        let disc = if disc_poly.degree() == 0 { vec![] } else { polish_discriminant_roots(&poly, roots(&disc_poly, 1e-14)?) };
        let lead = poly.row(poly.degree_p());
        let poles = if lead.degree() == 0 {
            vec![]
        } else {
            roots(&lead, 1e-14)?.into_iter().map(|r| r.value).collect()
        };
        let pts: Vec<Complex64> = disc.iter().map(|r| r.value).chain(poles.iter().copied()).collect();
        let mut spread: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                spread = spread.max((a - b).norm());
            }
        }
        let spread = if spread > 0.0 { spread } else { 1.0 };
        let margin = (0.5 * spread).max(0.5);
        let max_re = pts.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let max_im = pts.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let anchor = Complex64::new(if pts.is_empty() { 1.0 } else { max_re + margin }, 0.0);
        let top = if pts.is_empty() { 1.0 } else { max_im.max(0.0) + margin };
        Ok(Self { poly, disc, poles, anchor, spread, top })
    }

    pub fn poly(&self) -> &BivariatePoly {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree_p()
    }

    pub fn discriminant_roots(&self) -> &[Root] {
        &self.disc
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// Discriminant roots and poles: every point a path must avoid.
    pub fn singular_points(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.disc.iter().map(|r| r.value).collect();
        for &p in &self.poles {
            if v.iter().all(|z| (z - p).norm() > 1e-9 * self.spread) {
                v.push(p);
            }
        }
        v
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn clearance(&self) -> f64 {
        1e-6 * self.spread
    }

    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }

    /// Height of the horizontal corridor above every singular point.
    pub fn top(&self) -> f64 {
        self.top
    }

    /// Sheet values at the anchor, sorted by (re, im) with a tolerance on re.
    pub fn anchor_sheets(&self) -> Result<Vec<Complex64>> {
        let mut v = sheet_values(&self.poly, self.anchor, None)?;
        let scale = 1.0 + v.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let tol = 1e-9 * scale;
        v.sort_by(|a, b| {
            if (a.re - b.re).abs() <= tol {
                a.im.partial_cmp(&b.im).unwrap()
            } else {
                a.re.partial_cmp(&b.re).unwrap()
            }
        });
        Ok(v)
    }

    pub fn check_clearance(&self, seg: &Segment) -> Result<()> {
        for s in self.singular_points() {
            if seg.distance_to(s) < self.clearance() {
                return Err(Error::PathThroughSingularity(s));
            }
        }
        Ok(())
    }

    /// Continue all sheets (in the order given) along straight legs.
    pub fn transport(&self, pts: &[Complex64], start: Vec<Complex64>) -> Result<Vec<Complex64>> {
        let mut vals = start;
        for w in pts.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let seg = Segment::Line { a: w[0], b: w[1] };
            self.check_clearance(&seg)?;
            vals = track(&self.poly, &|t| seg.point(t), 0.0, 1.0, vals)?.last().to_vec();
        }
        Ok(vals)
    }

    /// Route from the anchor used to label sheets away from it: up the
    /// right edge, along the top corridor, then straight down to q. A descent
    /// that would graze a singular point is shifted to its right.
    pub fn route_from_anchor(&self, q: Complex64) -> Vec<Complex64> {
        let y = self.top.max(q.im);
        let top = Complex64::new(q.re, y);
        let drop = Segment::Line { a: top, b: q };
        let blocking: Vec<Complex64> = self
            .singular_points()
            .into_iter()
            .filter(|&s| drop.distance_to(s) < 1e-3 * self.spread && (s - q).norm() > 0.0)
            .filter(|&s| s.im < y && (s.im > q.im || (s - q).norm() < 1e-3 * self.spread))
            .collect();
        let mut route = vec![self.anchor, Complex64::new(self.anchor.re, y)];
        if blocking.is_empty() {
            route.extend([top, q]);
        } else {
            let d = blocking.iter().map(|&s| self.monodromy_radius(s)).fold(f64::INFINITY, f64::min) * 0.5;
            let x = q.re + d;
            route.extend([Complex64::new(x, y), Complex64::new(x, q.im), q]);
        }
        route
    }

    /// Sheet values at q in the global labeling.
    pub fn sheets_at(&self, q: Complex64) -> Result<Vec<Complex64>> {
        self.transport(&self.route_from_anchor(q), self.anchor_sheets()?)
    }

    /// Index of the labeled value nearest to `p`.
    pub fn nearest(vals: &[Complex64], p: Complex64) -> usize {
        vals.iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p).norm().partial_cmp(&(b.1 - p).norm()).unwrap())
            .unwrap()
            .0
    }

    fn permutation_between(start: &[Complex64], end: &[Complex64]) -> Result<Permutation> {
        let perm: Vec<usize> = end.iter().map(|&e| Self::nearest(start, e)).collect();
        let mut seen = vec![false; perm.len()];
        for &j in &perm {
            if seen[j] {
                return Err(Error::SheetCollision(Complex64::new(f64::NAN, f64::NAN)));
            }
            seen[j] = true;
        }
        Ok(Permutation(perm))
    }

    /// Monodromy radius: 0.4 × distance to the nearest other singular point.
    pub fn monodromy_radius(&self, q0: Complex64) -> f64 {
        let d = self
            .singular_points()
            .iter()
            .map(|s| (s - q0).norm())
            .filter(|&d| d > 1e-9 * self.spread)
            .fold(f64::INFINITY, f64::min);
        if d.is_finite() {
            0.4 * d
        } else {
            0.4 * self.spread
        }
    }

    fn circle_permutation(&self, q0: Complex64, radius: f64, start_angle: f64, start: &[Complex64]) -> Result<Permutation> {
        let seg = Segment::Arc { center: q0, radius, start: start_angle, sweep: TAU };
        self.check_clearance(&seg)?;
        let end = track(&self.poly, &|t| seg.point(t), 0.0, 1.0, start.to_vec())?;
        Self::permutation_between(start, end.last())
    }

    /// Base point for the lasso system: above every singular point, shifted
    /// so no two lasso rays are collinear.
    pub fn lasso_base(&self) -> Complex64 {
        let pts = self.singular_points();
        let center_re = if pts.is_empty() {
            0.0
        } else {
            pts.iter().map(|z| z.re).sum::<f64>() / pts.len() as f64
        };
        let mut best = (f64::NEG_INFINITY, Complex64::new(center_re, self.top));
        for k in 0..12 {
            let off = (0.0137 + 0.0291 * k as f64) * if k % 2 == 0 { 1.0 } else { -1.0 } * self.spread;
            let b = Complex64::new(center_re + off, self.top);
            // smallest distance from a ray to a foreign point, relative to its monodromy radius
            let mut worst = f64::INFINITY;
            for (i, &a) in pts.iter().enumerate() {
                let seg = Segment::Line { a: b, b: a };
                for (j, &s) in pts.iter().enumerate() {
                    if i != j {
                        worst = worst.min(seg.distance_to(s) / self.monodromy_radius(s));
                    }
                }
            }
            if worst > best.0 {
                best = (worst, b);
            }
            if worst > 1.5 {
                break;
            }
        }
        best.1
    }

    /// Discriminant roots (and poles) in lasso-product order: ascending
    /// argument of (q_i − b) as seen from the base point b above them.
    pub fn lasso_order(&self) -> Vec<Complex64> {
        let b = self.lasso_base();
        let mut pts = self.singular_points();
        pts.sort_by(|x, y| (x - b).arg().partial_cmp(&(y - b).arg()).unwrap());
        pts
    }

    /// Monodromy of the lasso from the base point around `q0`, in the global labeling.
    pub fn lasso_monodromy(&self, q0: Complex64, base_vals: &[Complex64]) -> Result<Permutation> {
        let b = self.lasso_base();
        let r = self.monodromy_radius(q0);
        let dir = (b - q0) / (b - q0).norm();
        let s = q0 + dir * r;
        let at_s = self.transport(&[b, s], base_vals.to_vec())?;
        let around = {
            let seg = Segment::Arc { center: q0, radius: r, start: dir.arg(), sweep: TAU };
            self.check_clearance(&seg)?;
            track(&self.poly, &|t| seg.point(t), 0.0, 1.0, at_s)?.last().to_vec()
        };
        let back = self.transport(&[s, b], around)?;
        Self::permutation_between(base_vals, &back)
    }

    /// Values at the lasso base in the global labeling.
    pub fn base_values(&self) -> Result<Vec<Complex64>> {
        let b = self.lasso_base();
        self.transport(
            &[self.anchor, Complex64::new(self.anchor.re, self.top), b],
            self.anchor_sheets()?,
        )
    }

    /// Radius in q of the circle used for the loop around infinity.
    pub fn infinity_radius(&self) -> f64 {
        let rmax = self.singular_points().iter().map(|z| z.norm()).fold(0.0, f64::max);
        (2.5 * rmax).max(self.anchor.re * 1.25).max(1.0)
    }

    /// Monodromy around q = ∞ from the inverted curve G(p, η) = η^m F(p, 1/η):
    /// one counterclockwise turn around η = 0 (clockwise in q), based at the anchor.
    pub fn monodromy_infinity(&self) -> Result<Permutation> {
        let r_q = self.infinity_radius();
        let rho = 1.0 / r_q;
        let start_q = Complex64::new(r_q, 0.0);
        let at_start = self.transport(&[self.anchor, start_q], self.anchor_sheets()?)?;
        let g = self.poly.invert_q();
        let seg = Segment::Arc { center: Complex64::new(0.0, 0.0), radius: rho, start: 0.0, sweep: TAU };
        let end = track(&g, &|t| seg.point(t), 0.0, 1.0, at_start.clone())?;
        Self::permutation_between(&at_start, end.last())
    }
}

/// Refine discriminant roots on the system F = F_p = 0, which stays regular at
/// square-root points even where the discriminant itself has a multiple root
/// (two sheet pairs meeting over the same q). Roots that converge to the same
/// point are merged.
fn polish_discriminant_roots(poly: &BivariatePoly, raw: Vec<Root>) -> Vec<Root> {
    let fp = poly.derivative_p();
    let fq = poly.derivative_q();
    let fpp = fp.derivative_p();
    let fpq = fp.derivative_q();
    let scale = 1.0 + raw.iter().map(|r| r.value.norm()).fold(0.0, f64::max);
    let mut out: Vec<Root> = Vec::new();
    for r in raw {
        let mut q = r.value;
        if let Ok(ps) = sheet_values(poly, q, None) {
            let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
            for i in 0..ps.len() {
                for j in i + 1..ps.len() {
                    let d = (ps[i] - ps[j]).norm();
                    if d < best.0 {
                        best = (d, 0.5 * (ps[i] + ps[j]));
                    }
                }
            }
            let (mut p, q_start) = (best.1, q);
            let mut converged = false;
            for _ in 0..50 {
                let (f, g) = (poly.eval(p, q), fp.eval(p, q));
                let (a, b, c, d) = (g, fq.eval(p, q), fpp.eval(p, q), fpq.eval(p, q));
                let det = a * d - b * c;
                if det.norm() == 0.0 {
                    break;
                }
                let dp = (d * f - b * g) / det;
                let dq = (a * g - c * f) / det;
                p -= dp;
                q -= dq;
                if !q.is_finite() {
                    break;
                }
                if dq.norm() <= 4.0 * f64::EPSILON * scale && dp.norm() <= 4.0 * f64::EPSILON * (1.0 + p.norm()) {
                    converged = true;
                    break;
                }
            }
            if !converged || (q - q_start).norm() > 1e-4 * scale {
                q = q_start;
            }
        }
        match out.iter_mut().find(|o| (o.value - q).norm() <= 1e-9 * scale) {
            Some(o) => o.multiplicity += r.multiplicity,
            None => out.push(Root { value: q, multiplicity: r.multiplicity }),
        }
    }
    out
}

/// Monodromy of one counterclockwise turn around q0, in the global labeling
/// (labels carried to the circle along `Curve::route_from_anchor`).
pub fn monodromy_at(curve: &Curve, q0: Complex64, radius: f64) -> Result<Permutation> {
    let start = q0 + radius;
    let vals = curve.sheets_at(start)?;
    curve.circle_permutation(q0, radius, 0.0, &vals)
}

/// Branch points: discriminant roots with nontrivial monodromy, one entry
/// per nontrivial cycle, plus any ramification above infinity.
pub fn branch_points(curve: &Curve) -> Result<Vec<BranchPoint>> {
    if curve.degree() < 2 {
        return Err(Error::DegenerateInput("need at least two sheets".into()));
    }
    Ok(topology(curve)?.branch_points)
}

pub fn topology(curve: &Curve) -> Result<SurfaceTopology> {
    let d = curve.degree();
    let base = curve.base_values()?;
    let mut local = Vec::new();
    let mut bps = Vec::new();
    for q in curve.lasso_order() {
        let perm = curve.lasso_monodromy(q, &base)?;
        for c in perm.cycles().into_iter().filter(|c| c.len() > 1) {
            bps.push(BranchPoint {
                location: q,
                ramification: c.len(),
                monodromy: Permutation::from_cycle(d, &c),
                kind: BranchKind::Finite,
            });
        }
        if perm.is_identity() && !curve.poles().iter().any(|p| (p - q).norm() < 1e-9 * curve.spread()) {
            log::info!("discriminant root {q} has trivial monodromy; discarded");
        }
        local.push((q, perm));
    }
    let inf = curve.monodromy_infinity()?;
    for c in inf.cycles().into_iter().filter(|c| c.len() > 1) {
        bps.push(BranchPoint {
            location: Complex64::new(f64::INFINITY, 0.0),
            ramification: c.len(),
            monodromy: Permutation::from_cycle(d, &c),
            kind: BranchKind::AtInfinity,
        });
    }
    let w: usize = bps.iter().map(|b| b.ramification - 1).sum();
    let genus = w as i64 / 2 - d as i64 + 1;
    let rh_total: usize = local.iter().map(|(_, p)| p.ramification()).sum::<usize>() + inf.ramification();
    // 2g − 2 = −2d + Σ (d − #cycles)
    let genus_rh = (rh_total as i64 - 2 * d as i64 + 2) / 2;
    if w % 2 != 0 {
        log::warn!("odd total ramification {w}; genus formula not integral");
    }
    // connectivity of the monodromy group
    let mut label: Vec<usize> = (0..d).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while l[i] != i {
            i = l[i];
        }
        i
    }
    for p in local.iter().map(|(_, p)| p).chain(std::iter::once(&inf)) {
        for i in 0..d {
            let (a, b) = (find(&mut label, i), find(&mut label, p.apply(i)));
            label[a] = b;
        }
    }
    let root0 = find(&mut label, 0);
    let transitive = (0..d).all(|i| find(&mut label, i) == root0);
    if !transitive {
        log::warn!("monodromy group is intransitive: the curve is reducible");
    }
    let punctures = punctures(curve, &local, &inf)?;
    Ok(SurfaceTopology {
        sheet_count: d,
        ramification_index: w,
        genus,
        genus_riemann_hurwitz: genus_rh,
        branch_points: bps,
        punctures,
        local_monodromy: local,
        monodromy_infinity: inf,
        transitive,
        anchor: curve.anchor(),
        anchor_sheets: curve.anchor_sheets()?,
    })
}

fn punctures(curve: &Curve, local: &[(Complex64, Permutation)], inf: &Permutation) -> Result<Vec<Puncture>> {
    let mut out = Vec::new();
    let poly = curve.poly();
    for &pole in curve.poles() {
        let perm = &local
            .iter()
            .find(|(q, _)| (q - pole).norm() < 1e-9 * curve.spread())
            .map(|x| x.1.clone())
            .unwrap_or_else(|| Permutation::identity(curve.degree()));
        let r = curve.monodromy_radius(pole);
        let start = pole + r;
        let vals = curve.sheets_at(start)?;
        for c in perm.cycles() {
            let turns = c.len() as f64;
            let seg = Segment::Arc { center: pole, radius: r, start: 0.0, sweep: TAU * turns };
            let (tr, qf) = (track(poly, &|t| seg.point(t), 0.0, 1.0, vals.clone())?, |t: f64| seg.point(t));
            let (s, _, _) = integrate_track(poly, &qf, &|t| seg.deriv(t), &tr, c[0], 1e-11)?;
            // local power of p on this sheet: p ~ (q − pole)^k
            let inner = pole + r * 0.5;
            let v2 = curve.transport(&[start, inner], vals.clone())?;
            let k = (v2[c[0]].norm() / vals[c[0]].norm()).ln() / 0.5f64.ln();
            if k < -1e-3 {
                out.push(Puncture { location: Some(pole), sheets: c.clone(), loop_action: s, growth: k });
            }
        }
    }
    // points above infinity
    let r_q = curve.infinity_radius();
    let start = Complex64::new(r_q, 0.0);
    let vals = curve.transport(&[curve.anchor(), start], curve.anchor_sheets()?)?;
    let vals2 = curve.transport(&[curve.anchor(), start * 2.0], curve.anchor_sheets()?)?;
    for c in inf.cycles() {
        let turns = c.len() as f64;
        let seg = Segment::Arc { center: Complex64::new(0.0, 0.0), radius: r_q, start: 0.0, sweep: -TAU * turns };
        let tr = track(poly, &|t| seg.point(t), 0.0, 1.0, vals.clone())?;
        let (s, _, _) = integrate_track(poly, &|t| seg.point(t), &|t| seg.deriv(t), &tr, c[0], 1e-11)?;
        let growth = (vals2[c[0]].norm() / vals[c[0]].norm()).log2();
        if growth > 1e-3 {
            out.push(Puncture { location: None, sheets: c.clone(), loop_action: s, growth });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn permutation_algebra() {
        let a = Permutation::transposition(3, 0, 1);
        let b = Permutation::transposition(3, 1, 2);
        let ab = a.then(&b);
        assert_eq!(ab.0, vec![2, 0, 1]);
        assert!(ab.then(&ab.inverse()).is_identity());
        assert_eq!(ab.cycles(), vec![vec![0, 2, 1]]);
        assert_eq!(ab.ramification(), 2);
        assert_eq!(format!("{a}"), "(0 1)");
    }

    #[test]
    fn sqrt_curve_monodromy() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 1, -1.0)]);
        let curve = Curve::new(f).unwrap();
        let m = monodromy_at(&curve, c(0.0, 0.0), 0.5).unwrap();
        assert_eq!(m, Permutation::transposition(2, 0, 1));
        let m = monodromy_at(&curve, c(5.0, 0.0), 0.5).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn sqrt_curve_topology() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 1, -1.0)]);
        let t = topology(&Curve::new(f).unwrap()).unwrap();
        // one finite branch point and one above infinity: a sphere
        assert_eq!(t.branch_points.len(), 2);
        assert_eq!(t.genus, 0);
        assert!(t.monodromy_product().is_identity());
    }

    #[test]
    fn reducible_curve_is_intransitive() {
        let f = BivariatePoly::from_real_terms(&[(2, 0, 1.0), (0, 2, -1.0)]);
        let t = topology(&Curve::new(f).unwrap()).unwrap();
        assert!(!t.transitive);
        assert!(t.branch_points.is_empty());
    }
}
