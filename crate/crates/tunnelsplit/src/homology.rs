//! Homology basis, named action catalog, action relations and the linear
//! composition of paths from basis loops.

use crate::contour::{
    branch_path_integrals, continue_from, periods, residue_at_infinity, segment_integrals, BranchRule, PathSpec,
};
use crate::curve::{topology, Curve, Permutation, SurfaceTopology};
use crate::error::{Error, Result};
use crate::model::{Family, Model};
use crate::polyalg::{roots_flat, BivariatePoly};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

type C = Complex64;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const RELATION_THRESHOLD: f64 = 1e-8;
pub const INTEGER_TOL: f64 = 1e-6;

/// Number of integrands carried along every loop: p dq plus up to nine
/// holomorphic differentials.
const NFORMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LoopClass {
    Alpha,
    Beta,
    GammaBranch,
    GammaPuncture,
}

/// A closed loop on the surface, based at the basis base point.
#[derive(Debug, Clone, Serialize)]
pub struct LoopSpec {
    pub name: String,
    pub class: LoopClass,
    #[serde(skip)]
    pub path: PathSpec,
    /// Excluded from winding maps: expressible through the other loops.
    pub dependent: bool,
    pub action: C,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomologyBasis {
    pub family: Family,
    pub base: C,
    pub base_sheet: usize,
    pub genus: usize,
    pub loops: Vec<LoopSpec>,
    /// Rank of the real period matrix of the α/β loops against the
    /// holomorphic differentials; equals 2g when the basis is certified.
    pub period_rank: usize,
}

impl HomologyBasis {
    pub fn get(&self, name: &str) -> Option<&LoopSpec> {
        self.loops.iter().find(|l| l.name == name)
    }

    pub fn count(&self, class: LoopClass) -> usize {
        self.loops.iter().filter(|l| l.class == class).count()
    }
}

/// Exponents (a, b) of the holomorphic differentials q^a p^b dq / F_p.
fn holomorphic_exponents(family: Family) -> Result<Vec<(usize, usize)>> {
    // p ~ q^k at infinity with d sheets: a + k b ≤ k (d − 1) − 2
    let (k, d) = match family {
        Family::DoubleWell => (2, 2),
        Family::TripleWell => (3, 2),
        Family::NormalForm => (2, 4),
        _ => return Err(Error::UnsupportedModel("basis needs a double-well, triple-well or normal-form model".into())),
    };
    let mut out = Vec::new();
    for b in 0..d {
        for a in 0..=(k * (d - 1)) {
            if a + k * b + 2 <= k * (d - 1) {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}

/// Integrand table [p F_p, q^a p^b …] to be multiplied by dq / F_p.
fn form_table(poly: &BivariatePoly, exps: &[(usize, usize)]) -> impl Fn(C, C) -> [C; NFORMS] {
    let fp = poly.derivative_p();
    let exps = exps.to_vec();
    move |p: C, q: C| {
        let mut g = [C::new(0.0, 0.0); NFORMS];
        g[0] = p * fp.eval(p, q);
        for (k, &(a, b)) in exps.iter().enumerate() {
            g[k + 1] = q.powu(a as u32) * p.powu(b as u32);
        }
        g
    }
}

/// A lasso from the base point around one singular location, with the
/// integrals of every form on every starting sheet.
struct Lasso {
    location: C,
    perm: Permutation,
    path: PathSpec,
    ints: Vec<[C; NFORMS]>,
}

fn lasso_path(curve: &Curve, q0: C) -> PathSpec {
    let b = curve.lasso_base();
    let r = curve.monodromy_radius(q0);
    let dir = (b - q0) / (b - q0).norm();
    let s = q0 + dir * r;
    PathSpec::polygon(&[b, s], 0, false)
        .then(&PathSpec::circle(q0, r, dir.arg(), 1.0, 0))
        .then(&PathSpec::polygon(&[s, b], 0, false))
}

fn build_lassos<G: Fn(C, C) -> [C; NFORMS]>(
    curve: &Curve,
    topo: &SurfaceTopology,
    base_vals: &[C],
    forms: &G,
    tol: f64,
) -> Result<Vec<Lasso>> {
    let mut out = Vec::new();
    for (q0, perm) in &topo.local_monodromy {
        let path = lasso_path(curve, *q0);
        let mut ints = Vec::new();
        for s in 0..curve.degree() {
            let (v, _) = periods::<NFORMS, _>(curve, &path, base_vals.to_vec(), s, forms, tol)?;
            ints.push(v);
        }
        out.push(Lasso { location: *q0, perm: perm.clone(), path, ints });
    }
    Ok(out)
}

/// Word in the lassos: (index, ±1).
type Word = Vec<(usize, i32)>;

fn word_values(lassos: &[Lasso], word: &[(usize, i32)], sheet: usize) -> ([C; NFORMS], usize) {
    let mut acc = [C::new(0.0, 0.0); NFORMS];
    let mut s = sheet;
    for &(i, e) in word {
        let l = &lassos[i];
        if e > 0 {
            for m in 0..NFORMS {
                acc[m] += l.ints[s][m];
            }
            s = l.perm.apply(s);
        } else {
            s = l.perm.inverse().apply(s);
            for m in 0..NFORMS {
                acc[m] -= l.ints[s][m];
            }
        }
    }
    (acc, s)
}

fn word_path(lassos: &[Lasso], word: &[(usize, i32)], sheet: usize) -> PathSpec {
    let mut segs = Vec::new();
    for &(i, e) in word {
        let p = if e > 0 { lassos[i].path.clone() } else { lassos[i].path.reversed() };
        segs.extend(p.segments);
    }
    PathSpec { segments: segs, start_sheet: sheet, closed: true }
}

fn invert_word(w: &[(usize, i32)]) -> Word {
    w.iter().rev().map(|&(i, e)| (i, -e)).collect()
}

/// Shortest lasso word carrying `from` to every other sheet.
fn sheet_connectors(lassos: &[Lasso], from: usize, d: usize) -> Vec<Option<Word>> {
    let mut out: Vec<Option<Word>> = vec![None; d];
    out[from] = Some(vec![]);
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for (i, l) in lassos.iter().enumerate() {
            let t = l.perm.apply(s);
            if out[t].is_none() {
                let mut w = out[s].clone().unwrap();
                w.push((i, 1));
                out[t] = Some(w);
                queue.push_back(t);
            }
        }
    }
    out
}

/// Incremental rank test on real vectors (modified Gram–Schmidt).
struct RankCertifier {
    ortho: Vec<Vec<f64>>,
}

impl RankCertifier {
    fn new() -> Self {
        Self { ortho: Vec::new() }
    }

    fn try_add(&mut self, v: &[f64]) -> bool {
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return false;
        }
        let mut w = v.to_vec();
        for _ in 0..2 {
            for u in &self.ortho {
                let dot: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
                for (x, y) in w.iter_mut().zip(u) {
                    *x -= dot * y;
                }
            }
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n <= 1e-6 * norm0 {
            return false;
        }
        self.ortho.push(w.into_iter().map(|x| x / n).collect());
        true
    }

    fn rank(&self) -> usize {
        self.ortho.len()
    }
}

fn real_period_vector(v: &[C; NFORMS], g: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * g);
    for x in &v[1..=g] {
        out.push(x.re);
    }
    for x in &v[1..=g] {
        out.push(x.im);
    }
    out
}

/// Sheet of the global labeling whose anchor value has Im p > 0 (the first
/// such in anchor order); the reference sheet for multi-well models.
fn upper_sheet(curve: &Curve) -> Result<usize> {
    let a = curve.anchor_sheets()?;
    Ok(a.iter().position(|p| p.im > 0.0).unwrap_or(0))
}

/// Thin rectangle around the real interval [ta, tb], reached from the base
/// point by straight connectors; counterclockwise.
fn cut_loop(curve: &Curve, base: C, ta: f64, tb: f64, sheet: usize) -> PathSpec {
    let rho = cut_height(curve, ta, tb);
    let m = 0.5 * (ta + tb);
    let top = C::new(m, rho);
    PathSpec::polygon(
        &[
            base,
            top,
            C::new(ta - rho, rho),
            C::new(ta - rho, -rho),
            C::new(tb + rho, -rho),
            C::new(tb + rho, rho),
            top,
            base,
        ],
        sheet,
        true,
    )
}

/// Half-height of a rectangle around [ta, tb] that keeps every singular point
/// not on the interval outside.
fn cut_height(curve: &Curve, ta: f64, tb: f64) -> f64 {
    let tol = 1e-9 * curve.spread();
    let mut d = tb - ta;
    for s in curve.singular_points() {
        let on = s.im.abs() <= tol && s.re >= ta - tol && s.re <= tb + tol;
        if on {
            continue;
        }
        let x = s.re.clamp(ta, tb);
        d = d.min((s - C::new(x, 0.0)).norm());
    }
    0.3 * d
}

/// Circle of radius R around the origin, reached radially from the base
/// point; `clockwise` in the q-plane when true.
fn infinity_loop(curve: &Curve, base: C, sheet: usize, clockwise: bool) -> PathSpec {
    let r = curve.infinity_radius().max(2.0 * base.norm());
    let u = base / base.norm();
    let far = u * r;
    let turns = if clockwise { -1.0 } else { 1.0 };
    PathSpec::polygon(&[base, far], sheet, false)
        .then(&PathSpec::circle(C::new(0.0, 0.0), r, u.arg(), turns, sheet))
        .then(&PathSpec::polygon(&[far, base], sheet, false))
}

fn loop_integrals<G: Fn(C, C) -> [C; NFORMS]>(
    curve: &Curve,
    path: &PathSpec,
    base_vals: &[C],
    forms: &G,
    tol: f64,
) -> Result<[C; NFORMS]> {
    let (v, end) = periods::<NFORMS, _>(curve, path, base_vals.to_vec(), path.start_sheet, forms, tol)?;
    let s = path.start_sheet;
    if (end[s] - base_vals[s]).norm() > 1e-6 * (1.0 + base_vals[s].norm()) {
        return Err(Error::Numerical("basis loop does not close on its sheet".into()));
    }
    Ok(v)
}

/// Real turning points of a multi-well model, checked against the number of
/// wells; reports the admissible energy interval otherwise.
fn multiwell_turning_points(model: &Model, energy: f64) -> Result<Vec<f64>> {
    let n = match model.family() {
        Family::DoubleWell => 4,
        Family::TripleWell => 6,
        _ => return Err(Error::UnsupportedModel("not a multi-well model".into())),
    };
    let (lo, hi) = admissible_interval(model)?;
    if !(energy > lo && energy < hi) {
        return Err(Error::EnergyOutOfRange { energy, lo, hi });
    }
    let t = model.turning_points(energy)?;
    if t.len() != n {
        return Err(Error::EnergyOutOfRange { energy, lo, hi });
    }
    Ok(t)
}

/// (max of the well minima, min of the barrier maxima) of V.
pub fn admissible_interval(model: &Model) -> Result<(f64, f64)> {
    let v = model
        .potential()
        .ok_or_else(|| Error::UnsupportedModel("admissible interval needs H = p²/2 + V(q)".into()))?;
    let dv = v.derivative();
    let ddv = dv.derivative();
    let scale = 1.0 + dv.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for z in roots_flat(&dv, 1e-14)? {
        if z.im.abs() > 1e-8 * scale {
            continue;
        }
        let x = C::new(z.re, 0.0);
        let val = v.eval(x).re;
        if ddv.eval(x).re > 0.0 {
            lo = lo.max(val);
        } else {
            hi = hi.min(val);
        }
    }
    Ok((lo, hi))
}

/// Homology basis for the three supported families.
pub fn build_basis(model: &Model, curve: &Curve, topo: &SurfaceTopology, tol: f64) -> Result<HomologyBasis> {
    let family = model.family();
    let exps = holomorphic_exponents(family)?;
    let g = topo.genus.max(0) as usize;
    if exps.len() != g {
        return Err(Error::Numerical(format!("{} holomorphic differentials for genus {g}", exps.len())));
    }
    let forms = form_table(curve.poly(), &exps);
    let base = curve.lasso_base();
    let base_vals = curve.base_values()?;
    let d = curve.degree();
    let lassos = build_lassos(curve, topo, &base_vals, &forms, tol)?;
    let base_sheet = if family == Family::NormalForm { 0 } else { upper_sheet(curve)? };
    let connectors = sheet_connectors(&lassos, base_sheet, d);

    let mut loops = Vec::new();
    let mut cert = RankCertifier::new();

    match family {
        Family::DoubleWell | Family::TripleWell => {
            let t: Vec<f64> = topo.branch_points.iter().map(|b| b.location.re).collect();
            let mut t = t;
            t.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let pairs: Vec<(&str, LoopClass, usize)> = if family == Family::DoubleWell {
                vec![("alpha", LoopClass::Alpha, 0), ("beta", LoopClass::Beta, 1)]
            } else {
                vec![
                    ("alpha1", LoopClass::Alpha, 0),
                    ("alpha2", LoopClass::Alpha, 4),
                    ("beta1", LoopClass::Beta, 1),
                    ("beta2", LoopClass::Beta, 3),
                ]
            };
            for (name, class, i) in pairs {
                let mut path = cut_loop(curve, base, t[i], t[i + 1], base_sheet);
                let mut v = loop_integrals(curve, &path, &base_vals, &forms, tol)?;
                let flip = match class {
                    LoopClass::Alpha => v[0].re < 0.0,
                    _ => v[0].im < 0.0,
                };
                if flip {
                    path = path.reversed();
                    for x in v.iter_mut() {
                        *x = -*x;
                    }
                }
                cert.try_add(&real_period_vector(&v, g));
                loops.push(LoopSpec { name: name.into(), class, path, dependent: false, action: v[0] });
            }
            // γ_i around the branch points from left to right, twice around
            let mut order: Vec<usize> = (0..lassos.len()).collect();
            order.sort_by(|&a, &b| lassos[a].location.re.partial_cmp(&lassos[b].location.re).unwrap());
            let n = order.len();
            for (k, &i) in order.iter().enumerate() {
                let w = vec![(i, 1), (i, 1)];
                let (v, end) = word_values(&lassos, &w, base_sheet);
                debug_assert_eq!(end, base_sheet);
                loops.push(LoopSpec {
                    name: format!("gamma{}", k + 1),
                    class: LoopClass::GammaBranch,
                    path: word_path(&lassos, &w, base_sheet),
                    dependent: k + 1 == n,
                    action: v[0],
                });
            }
            // the loop around +∞ is oriented so its action is S^(+∞)
            let clockwise = family == Family::TripleWell;
            for (name, sheet) in [("gamma_inf+", base_sheet), ("gamma_inf-", 1 - base_sheet)] {
                let conj = connectors[sheet].clone().ok_or_else(|| Error::Numerical("sheet not reachable".into()))?;
                let circle = infinity_loop(curve, base, sheet, clockwise);
                let mut v = loop_integrals(curve, &circle, &base_vals, &forms, tol)?;
                let (cv, _) = word_values(&lassos, &conj, base_sheet);
                let inv = invert_word(&conj);
                let (iv, _) = word_values(&lassos, &inv, sheet);
                for m in 0..NFORMS {
                    v[m] += cv[m] + iv[m];
                }
                let mut path = word_path(&lassos, &conj, base_sheet);
                path.segments.extend(circle.segments);
                path.segments.extend(word_path(&lassos, &inv, sheet).segments);
                loops.push(LoopSpec {
                    name: name.into(),
                    class: LoopClass::GammaPuncture,
                    path,
                    dependent: false,
                    action: v[0],
                });
            }
        }
        Family::NormalForm => {
            let (alphas, betas) = normal_form_handles(&lassos, d, g, &mut cert);
            for (k, (w, s, v)) in alphas.iter().enumerate() {
                loops.push(LoopSpec {
                    name: format!("alpha{}", k + 1),
                    class: LoopClass::Alpha,
                    path: word_path(&lassos, w, *s),
                    dependent: false,
                    action: v[0],
                });
            }
            for (k, (w, s, v)) in betas.iter().enumerate() {
                loops.push(LoopSpec {
                    name: format!("beta{}", k + 1),
                    class: LoopClass::Beta,
                    path: word_path(&lassos, w, *s),
                    dependent: false,
                    action: v[0],
                });
            }
            // one γ per ramified cycle: the lasso run around as often as the cycle is long
            let mut k = 0;
            for (i, l) in lassos.iter().enumerate() {
                for c in l.perm.cycles().into_iter().filter(|c| c.len() > 1) {
                    k += 1;
                    let w: Word = vec![(i, 1); c.len()];
                    let (v, _) = word_values(&lassos, &w, c[0]);
                    loops.push(LoopSpec {
                        name: format!("gamma{k}"),
                        class: LoopClass::GammaBranch,
                        path: word_path(&lassos, &w, c[0]),
                        dependent: false,
                        action: v[0],
                    });
                }
            }
            for (j, pc) in topo.punctures.iter().enumerate() {
                let sheet = pc.sheets[0];
                let circle = infinity_loop(curve, base, sheet, true);
                let v = loop_integrals(curve, &circle, &base_vals, &forms, tol)?;
                loops.push(LoopSpec {
                    name: format!("gamma_inf{}", j + 1),
                    class: LoopClass::GammaPuncture,
                    path: circle,
                    dependent: j + 1 == topo.punctures.len(),
                    action: v[0],
                });
            }
        }
        _ => unreachable!(),
    }
    Ok(HomologyBasis { family, base, base_sheet, genus: g, loops, period_rank: cert.rank() })
}

/// Greedy choice of 2g independent two-lasso loops for the normal form:
/// first those with real action, then those with imaginary action, then the
/// rest, keeping a loop only if its holomorphic periods raise the rank.
#[allow(clippy::type_complexity)]
fn normal_form_handles(
    lassos: &[Lasso],
    d: usize,
    g: usize,
    cert: &mut RankCertifier,
) -> (Vec<(Word, usize, [C; NFORMS])>, Vec<(Word, usize, [C; NFORMS])>) {
    let mut cands: Vec<(Word, usize, [C; NFORMS])> = Vec::new();
    let n = lassos.len();
    for i in 0..n {
        for j in i + 1..n {
            for e in [1, -1] {
                let w = vec![(i, 1), (j, e)];
                for s in 0..d {
                    let (v, end) = word_values(lassos, &w, s);
                    if end == s {
                        cands.push((w.clone(), s, v));
                    }
                }
            }
        }
    }
    let scale = cands.iter().map(|c| c.2[0].norm()).fold(0.0, f64::max).max(1e-300);
    let thr = 1e-8 * (1.0 + scale);
    let kind = |v: &C| {
        if v.norm() <= thr {
            2
        } else if v.im.abs() <= thr {
            0
        } else if v.re.abs() <= thr {
            1
        } else {
            2
        }
    };
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for pass in 0..3 {
        for (w, s, v) in &cands {
            if cert.rank() == 2 * g {
                break;
            }
            if kind(&v[0]) != pass {
                continue;
            }
            if cert.try_add(&real_period_vector(v, g)) {
                let (mut w, mut v) = (w.clone(), *v);
                let negative = if pass == 1 { v[0].im < 0.0 } else { v[0].re < 0.0 };
                if negative {
                    w = invert_word(&w);
                    v = v.map(|x| -x);
                }
                // loops of mixed or vanishing action fill whichever class is short
                if pass == 0 || (pass == 2 && alphas.len() < g) {
                    alphas.push((w, *s, v));
                } else {
                    betas.push((w, *s, v));
                }
            }
        }
    }
    (alphas, betas)
}

/// Named actions and periods at one energy.
#[derive(Debug, Clone, Serialize)]
pub struct ActionCatalog {
    pub family: Family,
    pub energy: f64,
    pub actions: BTreeMap<String, C>,
    pub periods: BTreeMap<String, C>,
    pub turning_points: Vec<f64>,
    /// Largest |∮ p dq| over small loops around single branch points.
    pub gamma_branch_max: f64,
    /// ∮ p dq around each puncture (see `curve::Puncture`).
    pub puncture_residues: Vec<C>,
}

impl ActionCatalog {
    pub fn action(&self, name: &str) -> Result<C> {
        self.actions.get(name).copied().ok_or_else(|| Error::UnknownLoop(name.into()))
    }

    pub fn period(&self, name: &str) -> Result<C> {
        self.periods.get(name).copied().ok_or_else(|| Error::UnknownLoop(name.into()))
    }

    pub fn max_abs_action(&self) -> f64 {
        self.actions.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Twice the segment integrals, oriented along the flow (Re T > 0 for real
/// periods) unless `imag` asks for Im S > 0.
fn doubled_segment(curve: &Curve, a: f64, b: f64, imag: bool, tol: f64) -> Result<(C, C)> {
    let rule = if imag { BranchRule::PositiveImag } else { BranchRule::PositiveReal };
    let (s, t) = segment_integrals(curve, a, b, rule, tol)?;
    let (s, t) = (2.0 * s, 2.0 * t);
    Ok(if !imag && t.re < 0.0 { (-s, -t) } else { (s, t) })
}

/// ∮ p dq and ∮ dq/F_p around a thin rectangle enclosing [qa, qb], starting
/// on the sheet with the largest real part above the midpoint; oriented so
/// that Re T > 0.
fn oval_integrals(curve: &Curve, qa: f64, qb: f64, tol: f64) -> Result<(C, C)> {
    let rho = cut_height(curve, qa, qb);
    let m = 0.5 * (qa + qb);
    let top = C::new(m, rho);
    let vals = curve.sheets_at(top)?;
    let sheet = (0..vals.len()).max_by(|&a, &b| vals[a].re.partial_cmp(&vals[b].re).unwrap()).unwrap();
    let path = PathSpec::polygon(
        &[top, C::new(qa - rho, rho), C::new(qa - rho, -rho), C::new(qb + rho, -rho), C::new(qb + rho, rho), top],
        sheet,
        true,
    );
    let (s, t, _, end) = continue_from(curve, &path, vals.clone(), sheet, tol)?;
    if (end[sheet] - vals[sheet]).norm() > 1e-6 * (1.0 + vals[sheet].norm()) {
        return Err(Error::Numerical("oval loop does not close".into()));
    }
    Ok(if t.re < 0.0 { (-s, -t) } else { (s, t) })
}

/// Largest |∮ p dq| around single branch points: each ramified cycle is
/// circled as often as it is long, on a circle of half the monodromy radius.
fn gamma_branch_max(curve: &Curve, topo: &SurfaceTopology, tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (q0, perm) in &topo.local_monodromy {
        let r = 0.5 * curve.monodromy_radius(*q0);
        let start = *q0 + r;
        let vals = curve.sheets_at(start)?;
        for c in perm.cycles().into_iter().filter(|c| c.len() > 1) {
            let path = PathSpec::circle(*q0, r, 0.0, c.len() as f64, c[0]);
            let (s, _, _, _) = continue_from(curve, &path, vals.clone(), c[0], tol)?;
            worst = worst.max(s.norm());
        }
    }
    Ok(worst)
}

/// Real discriminant roots of the normal form at E, ascending.
fn real_branch_points(curve: &Curve) -> Vec<f64> {
    let tol = 1e-9 * curve.spread();
    let mut v: Vec<f64> = curve
        .discriminant_roots()
        .iter()
        .filter(|r| r.value.im.abs() <= tol && r.multiplicity == 1)
        .map(|r| r.value.re)
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Evaluate the named catalog at energy E.
pub fn evaluate_catalog(model: &Model, energy: f64, tol: f64) -> Result<ActionCatalog> {
    let family = model.family();
    let mut actions = BTreeMap::new();
    let mut periods = BTreeMap::new();
    let turning_points;
    let curve;
    match family {
        Family::DoubleWell | Family::TripleWell => {
            let t = multiwell_turning_points(model, energy)?;
            curve = model.curve(energy)?;
            let reference = upper_sheet(&curve)?;
            let residue = residue_at_infinity(&curve, reference)?;
            let mut seg = |name: &str, a: f64, b: f64, imag: bool| -> Result<C> {
                let (s, tt) = doubled_segment(&curve, a, b, imag, tol)?;
                actions.insert(format!("S_{name}"), s);
                periods.insert(format!("T_{name}"), tt);
                Ok(s)
            };
            if family == Family::DoubleWell {
                let sl = seg("L", t[0], t[1], false)?;
                seg("R", t[2], t[3], false)?;
                let sb = seg("beta", t[1], t[2], true)?;
                actions.insert("S_alpha".into(), sl);
                periods.insert("T_alpha".into(), periods["T_L"]);
                // clockwise residue on the reference sheet is S_L − S_R
                actions.insert("S_inf+".into(), -residue);
                actions.insert("S_inf-".into(), residue);
                actions.insert("S_Gamma0".into(), 0.5 * sb);
            } else {
                let sl = seg("L", t[0], t[1], false)?;
                let sc = seg("C", t[2], t[3], false)?;
                let sr = seg("R", t[4], t[5], false)?;
                let b1 = seg("beta1", t[1], t[2], true)?;
                let b2 = seg("beta2", t[3], t[4], true)?;
                actions.insert("S_alpha1".into(), sl);
                actions.insert("S_alpha2".into(), sr);
                // clockwise residue on the reference sheet is −S_L + S_C − S_R
                actions.insert("S_inf+".into(), residue);
                actions.insert("S_inf-".into(), -residue);
                actions.insert("S_Gamma0".into(), 0.5 * (b1 + sc + b2));
            }
            turning_points = t;
        }
        Family::NormalForm => {
            curve = model.curve(energy)?;
            let r = real_branch_points(&curve);
            // outer oval [a, d] around the inner one [b, c] on each side
            if r.len() != 8 || !(r[4] > 0.0) {
                let (lo, hi) = normal_form_interval(model)?;
                return Err(Error::EnergyOutOfRange { energy, lo, hi });
            }
            let (a, b, c, d) = (r[4], r[5], r[6], r[7]);
            let (s_in, t_in) = doubled_segment(&curve, b, c, false, tol)?;
            let (s_out, t_out) = oval_integrals(&curve, a, d, tol)?;
            let s_oo = doubled_segment(&curve, -a, a, true, tol)?.0;
            let s_io = in_out_cycle(&curve, c, d, tol)?;
            actions.insert("S_in".into(), s_in);
            actions.insert("S_out".into(), s_out);
            actions.insert("S_in_out".into(), s_io);
            actions.insert("S_out_out".into(), s_oo);
            actions.insert("S_Gamma0".into(), s_io + 0.5 * s_oo);
            periods.insert("T_in".into(), t_in);
            periods.insert("T_out".into(), t_out);
            turning_points = r;
        }
        _ => return Err(Error::UnsupportedModel("catalog needs a double-well, triple-well or normal-form model".into())),
    }
    let topo = topology(&curve)?;
    let gmax = gamma_branch_max(&curve, &topo, tol)?;
    let puncture_residues = topo.punctures.iter().map(|p| p.loop_action).collect();
    Ok(ActionCatalog {
        family,
        energy,
        actions,
        periods,
        turning_points,
        gamma_branch_max: gmax,
        puncture_residues,
    })
}

/// The cycle that leaves the inner turning point c above the complex
/// branch points between c and the outer turning point d and returns below
/// them: ∮ p dq over the closed path, normalized to Im > 0.
fn in_out_cycle(curve: &Curve, c: f64, d: f64, tol: f64) -> Result<C> {
    let h = curve
        .singular_points()
        .iter()
        .filter(|s| s.re > c && s.re < d)
        .map(|s| s.im.abs())
        .fold(0.0, f64::max)
        .max(0.1 * (d - c))
        * 3.0;
    let up = [C::new(c, 0.0), C::new(c, h), C::new(d, h), C::new(d, 0.0)];
    let down: Vec<C> = up.iter().map(|z| z.conj()).collect();
    let (sa, _) = branch_path_integrals(curve, &up, BranchRule::PositiveReal, tol)?;
    let (sb, _) = branch_path_integrals(curve, &down, BranchRule::PositiveReal, tol)?;
    // both ends are square-root points, so either return sheet closes the path
    let v = if (sa - sb).re.abs() <= (sa + sb).re.abs() { sa - sb } else { sa + sb };
    Ok(if v.im < 0.0 { -v } else { v })
}

/// Energy window around the reference energy in which the normal form has its eight
/// real branch points, found by bisection on both sides.
fn normal_form_interval(model: &Model) -> Result<(f64, f64)> {
    let ok = |e: f64| -> bool {
        model.curve(e).map(|c| {
            let r = real_branch_points(&c);
            r.len() == 8 && r[4] > 0.0
        })
        .unwrap_or(false)
    };
    let e0 = model.reference_energy();
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if ok(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = edge(e0, -1.0);
    let hi = edge(e0, 1.0);
    Ok((lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct Relation {
    pub name: String,
    pub lhs: C,
    pub rhs: C,
    pub residual: f64,
    pub passed: bool,
}

/// Residuals of the action relations the family must satisfy.
pub fn verify_relations(cat: &ActionCatalog) -> Vec<Relation> {
    let thr = RELATION_THRESHOLD * (1.0 + cat.max_abs_action());
    let a = |n: &str| cat.actions.get(n).copied().unwrap_or(C::new(f64::NAN, f64::NAN));
    let mut out = Vec::new();
    let mut push = |name: &str, lhs: C, rhs: C| {
        let residual = (lhs - rhs).norm();
        out.push(Relation { name: name.into(), lhs, rhs, residual, passed: residual < thr });
    };
    match cat.family {
        Family::DoubleWell => {
            push("S_L = S_R - S_inf+", a("S_L"), a("S_R") - a("S_inf+"));
            push("S_inf- = -S_inf+", a("S_inf-"), -a("S_inf+"));
        }
        Family::TripleWell => {
            push("S_C = S_L + S_R + S_inf+", a("S_C"), a("S_L") + a("S_R") + a("S_inf+"));
            push("S_inf+ = -S_L + S_C - S_R", a("S_inf+"), -a("S_L") + a("S_C") - a("S_R"));
        }
        Family::NormalForm => {
            let z = C::new(0.0, 0.0);
            push("Re S_in_out = 0", C::new(a("S_in_out").re, 0.0), z);
            push("Re S_out_out = 0", C::new(a("S_out_out").re, 0.0), z);
            for (k, r) in cat.puncture_residues.iter().enumerate() {
                push(&format!("residue at puncture {} = 0", k + 1), *r, z);
            }
        }
        _ => {}
    }
    out
}

/// Γ = Γ_0 + Σ n_loop · loop, with the model's Maslov count.
#[derive(Debug, Clone, Serialize)]
pub struct PathComposition {
    pub base_action: C,
    pub windings: BTreeMap<String, i64>,
    /// None where the family has no loop-based counting rule.
    pub maslov: Option<i64>,
    pub action: C,
}

pub fn compose(basis: &HomologyBasis, base_action: C, windings: &BTreeMap<String, i64>) -> Result<PathComposition> {
    let mut total = base_action;
    for (name, &n) in windings {
        let l = basis.get(name).filter(|l| !l.dependent).ok_or_else(|| Error::UnknownLoop(name.clone()))?;
        total += l.action * n as f64;
    }
    let w = |n: &str| windings.get(n).copied().unwrap_or(0);
    let maslov = match basis.family {
        Family::DoubleWell => Some(2 * w("alpha") + 1),
        Family::TripleWell => {
            let n_c = w("gamma_inf+") - w("gamma_inf-");
            let n_l = w("alpha1") + w("alpha2") - 2 * n_c;
            Some(2 * n_l + 2 * n_c + 3)
        }
        _ => None,
    };
    Ok(PathComposition { base_action, windings: windings.clone(), maslov, action: total })
}

/// Direct integration of base_in · (loops) · base_out, where base_in ends and
/// base_out starts at the basis base point. The start sheet is the one that
/// arrives at the base point on the basis sheet. Returns (S_Γ, S_Γ0).
pub fn compose_direct(
    curve: &Curve,
    basis: &HomologyBasis,
    base_in: &PathSpec,
    base_out: &PathSpec,
    windings: &BTreeMap<String, i64>,
    tol: f64,
) -> Result<(C, C)> {
    let start_vals = curve.sheets_at(base_in.start())?;
    let (_, _, _, at_base) = continue_from(curve, base_in, start_vals.clone(), 0, tol)?;
    let base_vals = curve.base_values()?;
    let target = base_vals[basis.base_sheet];
    let sheet = Curve::nearest(&at_base, target);
    let mut path = base_in.clone().with_sheet(sheet);
    let base_only = path.then(base_out);
    for (name, &n) in windings {
        let l = basis.get(name).filter(|l| !l.dependent).ok_or_else(|| Error::UnknownLoop(name.clone()))?;
        let seg = if n >= 0 { l.path.clone() } else { l.path.reversed() };
        for _ in 0..n.unsigned_abs() {
            path.segments.extend(seg.segments.iter().cloned());
        }
    }
    path = path.then(base_out);
    let (s, _, _, _) = continue_from(curve, &path, start_vals.clone(), sheet, tol)?;
    let (s0, _, _, _) = continue_from(curve, &base_only, start_vals, sheet, tol)?;
    Ok((s, s0))
}

/// Whether Bohr–Sommerfeld quantization in one well forces it in the others.
#[derive(Debug, Clone, Serialize)]
pub struct QuantizationReport {
    pub hbar: f64,
    /// S_L / 2πħ − ½.
    pub m_left: f64,
    pub left_quantized: bool,
    /// S^(+∞) / 2πħ.
    pub m_infinity: f64,
    pub infinity_quantized: bool,
    /// S_R / 2πħ − ½.
    pub m_right: f64,
    pub right_quantized: bool,
    /// Triple well: S_C / 2πħ − ½.
    pub m_center: Option<f64>,
    /// Triple well with S_L = S_R forced by symmetry.
    pub symmetric_forces_equal: Option<bool>,
    pub simultaneous: bool,
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < INTEGER_TOL
}

pub fn simultaneous_quantization_check(cat: &ActionCatalog, hbar: f64) -> Result<QuantizationReport> {
    let unit = 2.0 * PI * hbar;
    let sl = cat.action("S_L")?.re;
    let sr = cat.action("S_R")?.re;
    let sinf = cat.action("S_inf+")?.re;
    let m_left = sl / unit - 0.5;
    let m_inf = sinf / unit;
    let m_right = sr / unit - 0.5;
    let (m_center, sym) = match cat.family {
        Family::DoubleWell => (None, None),
        Family::TripleWell => {
            let sc = cat.action("S_C")?.re;
            let equal = (sl - sr).abs() <= RELATION_THRESHOLD * (1.0 + sl.abs());
            (Some(sc / unit - 0.5), Some(equal))
        }
        _ => return Err(Error::UnsupportedModel("quantization check is for multi-well models".into())),
    };
    let (lq, iq, rq) = (near_integer(m_left), near_integer(m_inf), near_integer(m_right));
    let simultaneous = match m_center {
        None => lq && iq && rq,
        Some(mc) => lq && iq && rq && near_integer(mc),
    };
    Ok(QuantizationReport {
        hbar,
        m_left,
        left_quantized: lq,
        m_infinity: m_inf,
        infinity_quantized: iq,
        m_right,
        right_quantized: rq,
        m_center,
        symmetric_forces_equal: sym,
        simultaneous,
    })
}

/// Convenience: curve, topology and basis at one energy.
pub fn basis_at(model: &Model, energy: f64, tol: f64) -> Result<(Curve, SurfaceTopology, HomologyBasis)> {
    let curve = model.curve(energy)?;
    let topo = topology(&curve)?;
    let basis = build_basis(model, &curve, &topo, tol)?;
    Ok((curve, topo, basis))
}
