//! Exact quantum reference: parity-resolved spectra, doublet splittings and
//! the trace-ratio estimator.
//!
//! Multi-well models use a second-order finite-difference grid on the half
//! line with Richardson extrapolation in the step. Eigenvalues come from
//! Sturm-count bisection and the splitting of a doublet from the discrete
//! Green identity
//!
//!   (E⁻ − E⁺) Σ_{j≥1} ψ⁺_j ψ⁻_j = c ψ⁺_0 ψ⁻_1,   c = ħ²/2h²,
//!
//! which stays exact when ΔE is far below the rounding level of E.
//! Everything else is diagonalized in a Weyl-ordered Fock basis.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::semicl::{SplittingPoint, Source};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Grid,
    Oscillator,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumSpectrum {
    pub hbar: f64,
    pub energies_plus: Vec<f64>,
    pub energies_minus: Vec<f64>,
    pub basis: BasisKind,
    pub basis_size: usize,
    pub convergence_estimate: f64,
    #[serde(skip)]
    grid: Option<GridProblem>,
}

impl QuantumSpectrum {
    /// All levels with their parity (+1 even, −1 odd), ascending.
    pub fn levels(&self) -> Vec<(f64, i8)> {
        let mut v: Vec<(f64, i8)> = self
            .energies_plus
            .iter()
            .map(|&e| (e, 1))
            .chain(self.energies_minus.iter().map(|&e| (e, -1)))
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    }
}

// ---------------------------------------------------------------- grid

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

/// −(ħ²/2) d²/dq² + V on q_j = j h, j = 0..m−1, with ψ_m = 0 at q = L and
/// the reflection condition at the origin.
#[derive(Debug, Clone)]
struct GridProblem {
    hbar: f64,
    len: f64,
    m: usize,
    v: Vec<f64>,
    model: Model,
}

impl GridProblem {
    fn new(model: &Model, hbar: f64, len: f64, m: usize) -> Result<Self> {
        let pot = model.potential().ok_or_else(|| Error::UnsupportedModel("grid basis needs p²/2 + V".into()))?;
        let h = len / m as f64;
        let v = (0..m).map(|j| pot.eval_real(j as f64 * h).re).collect();
        Ok(Self { hbar, len, m, v, model: model.clone() })
    }

    fn refined(&self) -> Result<Self> {
        Self::new(&self.model, self.hbar, self.len, 2 * self.m)
    }

    fn h(&self) -> f64 {
        self.len / self.m as f64
    }

    fn k(&self, e: f64) -> impl Iterator<Item = f64> + '_ {
        let s = 2.0 * self.h() * self.h() / (self.hbar * self.hbar);
        self.v.iter().map(move |&v| s * (v - e))
    }

    /// Number of eigenvalues below e in the given parity block.
    fn count(&self, parity: Parity, e: f64) -> usize {
        let mut n = 0;
        let mut q = 0.0;
        for (j, k) in self.k(e).enumerate() {
            let d = 2.0 + k;
            q = match (parity, j) {
                (Parity::Even, 0) => d,
                (Parity::Even, 1) => d - 2.0 / q,
                (Parity::Odd, 0) => continue,
                (Parity::Odd, 1) => d,
                _ => d - 1.0 / q,
            };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                n += 1;
            }
        }
        n
    }

    fn size(&self, parity: Parity) -> usize {
        match parity {
            Parity::Even => self.m,
            Parity::Odd => self.m - 1,
        }
    }

    /// n-th eigenvalue (from 0) of a parity block by bisection.
    fn eigenvalue(&self, parity: Parity, n: usize) -> Result<f64> {
        if n >= self.size(parity) {
            return Err(Error::Numerical(format!("level {n} beyond grid size")));
        }
        let vmin = self.v.iter().copied().fold(f64::INFINITY, f64::min);
        let c = self.hbar * self.hbar / (self.h() * self.h());
        let mut lo = vmin - 1.0;
        let mut hi = self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * c + 1.0;
        debug_assert!(self.count(parity, lo) == 0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count(parity, mid) > n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `take` levels of `parity` nearest to e, closest first.
    fn nearest(&self, parity: Parity, e: f64, take: usize) -> Result<Vec<(usize, f64)>> {
        let k = self.count(parity, e);
        let mut out = Vec::new();
        for n in k.saturating_sub(take)..(k + take).min(self.size(parity)) {
            out.push((n, self.eigenvalue(parity, n)?));
        }
        out.sort_by(|a, b| (a.1 - e).abs().total_cmp(&(b.1 - e).abs()));
        out.truncate(take);
        if out.is_empty() {
            return Err(Error::NoDoubletNearTarget(e));
        }
        Ok(out)
    }

    /// Matching index: the inner turning point of the rightmost well.
    fn match_index(&self, e: f64) -> usize {
        let h = self.h();
        let pos: Vec<f64> = self
            .model
            .turning_points(e)
            .unwrap_or_default()
            .into_iter()
            .filter(|&t| t > 0.0)
            .collect();
        let t = if pos.len() >= 2 { pos[pos.len() - 2] } else { 0.9 * pos.last().copied().unwrap_or(0.5 * self.len) };
        ((t / h).round() as usize).clamp(2, self.m - 2)
    }

    /// Eigenvector at eigenvalue e as (sign, ln|ψ_j|), j = 0..m−1: the
    /// outward solution from the origin joined to the inward one from the
    /// wall at `mm`, both run in their growing direction.
    fn eigenvector(&self, parity: Parity, e: f64, mm: usize) -> Vec<(f64, f64)> {
        let k: Vec<f64> = self.k(e).collect();
        let m = self.m;
        let mut out = vec![(0.0, f64::NEG_INFINITY); m];
        // inward from the wall: t_j = ψ_{j−1}/ψ_j
        out[m - 1] = (1.0, 0.0);
        let mut t = 2.0 + k[m - 1];
        for j in (mm..m - 1).rev() {
            let (s, l) = out[j + 1];
            out[j] = (s * t.signum(), l + t.abs().ln());
            let mut tn = 2.0 + k[j] - 1.0 / t;
            if tn == 0.0 {
                tn = 1e-300;
            }
            t = tn;
        }
        // outward from the origin: σ_j = C_j/C_{j−1}
        let mut c = vec![(0.0, f64::NEG_INFINITY); mm + 1];
        let mut sigma;
        match parity {
            Parity::Even => {
                c[0] = (1.0, 0.0);
                sigma = 0.5 * (2.0 + k[0]);
                c[1] = (sigma.signum(), sigma.abs().ln());
            }
            Parity::Odd => {
                c[1] = (1.0, 0.0);
                sigma = f64::INFINITY;
            }
        }
        for j in 1..mm {
            let mut sn = 2.0 + k[j] - 1.0 / sigma;
            if sn == 0.0 {
                sn = 1e-300;
            }
            sigma = sn;
            let (s, l) = c[j];
            c[j + 1] = (s * sigma.signum(), l + sigma.abs().ln());
        }
        let (sr, lr) = out[mm];
        let (sc, lc) = c[mm];
        for j in 0..mm {
            let (s, l) = c[j];
            out[j] = (s * sc * sr, l - lc + lr);
        }
        out
    }

    /// (sign, ln|E⁻ − E⁺|) from the discrete Green identity.
    fn splitting(&self, e_plus: f64, e_minus: f64) -> (f64, f64) {
        let mid = 0.5 * (e_plus + e_minus);
        let mm = self.match_index(mid);
        let a = self.eigenvector(Parity::Even, e_plus, mm);
        let b = self.eigenvector(Parity::Odd, e_minus, mm);
        let lmax = (1..self.m).map(|j| a[j].1 + b[j].1).fold(f64::NEG_INFINITY, f64::max);
        let den: f64 = (1..self.m).map(|j| a[j].0 * b[j].0 * (a[j].1 + b[j].1 - lmax).exp()).sum();
        let c = self.hbar * self.hbar / (2.0 * self.h() * self.h());
        let sign = a[0].0 * b[1].0 * den.signum();
        (sign, c.ln() + a[0].1 + b[1].1 - lmax - den.abs().ln())
    }
}

/// Half-width of the grid: outer turning points at `e_cap` plus padding.
fn grid_half_width(model: &Model, e_cap: f64) -> Result<f64> {
    let t = model.turning_points(e_cap)?;
    let outer = t.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let roots = match model {
        Model::MultiWell { roots, .. } => roots.iter().map(|x| x.abs()).fold(0.0, f64::max),
        _ => 0.0,
    };
    Ok(outer.max(roots) + 2.0)
}

fn barrier_top(model: &Model) -> Result<f64> {
    let v = model.potential().ok_or(Error::NonSymmetricModel)?;
    let crit = crate::polyalg::roots_flat(&v.derivative(), 1e-14)?;
    let top = crit
        .iter()
        .filter(|z| z.im.abs() < 1e-8)
        .map(|z| v.eval_real(z.re).re)
        .filter(|_| true)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(top)
}

/// Grid steps per ħ at the starting resolution.
const STEPS_PER_HBAR: f64 = 10.0;
const MAX_GRID: usize = 1 << 21;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridDoublet {
    pub index_plus: usize,
    pub index_minus: usize,
    pub e_plus: f64,
    pub e_minus: f64,
    pub sign: f64,
    pub ln_delta_e: f64,
    pub grid_points: usize,
    /// Change of ln ΔE between the last two resolutions.
    pub convergence: f64,
}

fn grid_doublet_at(p: &GridProblem, ie: usize, io: usize) -> Result<(f64, f64, f64, f64)> {
    let ep = p.eigenvalue(Parity::Even, ie)?;
    let em = p.eigenvalue(Parity::Odd, io)?;
    let (s, l) = p.splitting(ep, em);
    Ok((ep, em, s, l))
}

/// Richardson-extrapolated doublet on grids m and 2m.
fn richardson_doublet(p: &GridProblem, ie: usize, io: usize) -> Result<(f64, f64, f64, f64)> {
    let a = grid_doublet_at(p, ie, io)?;
    let b = grid_doublet_at(&p.refined()?, ie, io)?;
    if a.2 != b.2 {
        return Err(Error::Numerical("doublet sign changes under refinement".into()));
    }
    let r = |x: f64, y: f64| (4.0 * y - x) / 3.0;
    Ok((r(a.0, b.0), r(a.1, b.1), b.2, r(a.3, b.3)))
}

/// Doublet of a symmetric multi-well model nearest to `target`, refined
/// until ln ΔE moves by less than 1e−4.
pub fn grid_doublet(model: &Model, hbar: f64, target: f64) -> Result<GridDoublet> {
    if !matches!(model, Model::MultiWell { .. }) {
        return Err(Error::UnsupportedModel("grid solver handles multi-well models".into()));
    }
    if !model.is_parity_symmetric() {
        return Err(Error::NonSymmetricModel);
    }
    let cap = barrier_top(model)?.max(target);
    let len = grid_half_width(model, cap)?;
    let m0 = ((STEPS_PER_HBAR * len / hbar).ceil() as usize).max(256).next_power_of_two();
    let mut p = GridProblem::new(model, hbar, len, m0)?;
    // the starting grid can shift levels by more than a resonance width, so
    // candidates are compared at extrapolated energies
    let q = p.refined()?;
    let extrapolated = |parity: Parity| -> Result<Vec<(usize, f64)>> {
        p.nearest(parity, target, 3)?
            .into_iter()
            .map(|(n, a)| Ok((n, (4.0 * q.eigenvalue(parity, n)? - a) / 3.0)))
            .collect()
    };
    let ((ie, _), (io, _)) = closest_pair(&extrapolated(Parity::Even)?, &extrapolated(Parity::Odd)?);
    check_doublet(&p, ie, io, target)?;
    let mut prev = richardson_doublet(&p, ie, io)?;
    loop {
        p = p.refined()?;
        let cur = richardson_doublet(&p, ie, io)?;
        let change = (cur.3 - prev.3).abs();
        if change < 1e-4 || 4 * p.m > MAX_GRID {
            if change >= 1e-4 {
                log::warn!("grid doublet not converged: ln ΔE moved {change:.2e}");
            }
            return Ok(GridDoublet {
                index_plus: ie,
                index_minus: io,
                e_plus: cur.0,
                e_minus: cur.1,
                sign: cur.2,
                ln_delta_e: cur.3,
                grid_points: 2 * p.m,
                convergence: change,
            });
        }
        prev = cur;
    }
}

/// Among the levels around the target, the opposite-parity pair with the
/// smallest gap. Near a resonance with another well the nearest single level
/// can belong to that well, so picking by distance alone mispairs.
fn closest_pair(plus: &[(usize, f64)], minus: &[(usize, f64)]) -> ((usize, f64), (usize, f64)) {
    let mut best = (plus[0], minus[0]);
    for &a in plus {
        for &b in minus {
            if (b.1 - a.1).abs() < (best.1 .1 - best.0 .1).abs() {
                best = (a, b);
            }
        }
    }
    best
}

/// A doublet must sit within five level spacings of the target and be
/// split by less than a quarter of the spacing. The spacing is the mean gap
/// to the neighbouring same-parity levels, since several families of states
/// interleave in the normal form.
fn check_doublet(p: &GridProblem, ie: usize, io: usize, target: f64) -> Result<()> {
    let ep = p.eigenvalue(Parity::Even, ie)?;
    let em = p.eigenvalue(Parity::Odd, io)?;
    let next = p.eigenvalue(Parity::Even, ie + 1)?;
    let spacing = match ie.checked_sub(1) {
        Some(i) => 0.5 * (next - p.eigenvalue(Parity::Even, i)?),
        None => next - ep,
    };
    doublet_window(ep, em, spacing, target)
}

fn doublet_window(ep: f64, em: f64, spacing: f64, target: f64) -> Result<()> {
    if (em - ep).abs() > 0.25 * spacing || (0.5 * (ep + em) - target).abs() > 5.0 * spacing {
        return Err(Error::NoDoubletNearTarget(target));
    }
    Ok(())
}

fn grid_spectrum(model: &Model, hbar: f64, basis_size: usize) -> Result<QuantumSpectrum> {
    if !model.is_parity_symmetric() {
        return Err(Error::NonSymmetricModel);
    }
    let cap = barrier_top(model)?;
    let len = grid_half_width(model, cap)?;
    let p = GridProblem::new(model, hbar, len, basis_size)?;
    let q = p.refined()?;
    let mut out = [Vec::new(), Vec::new()];
    let mut est: f64 = 0.0;
    for (slot, parity) in [Parity::Even, Parity::Odd].into_iter().enumerate() {
        let n = p.count(parity, cap).min(400);
        for i in 0..n {
            let a = p.eigenvalue(parity, i)?;
            let b = q.eigenvalue(parity, i)?;
            out[slot].push((4.0 * b - a) / 3.0);
            est = est.max((b - a).abs() / 3.0);
        }
    }
    let [plus, minus] = out;
    Ok(QuantumSpectrum {
        hbar,
        energies_plus: plus,
        energies_minus: minus,
        basis: BasisKind::Grid,
        basis_size,
        convergence_estimate: est,
        grid: Some(p),
    })
}

// ---------------------------------------------------------------- Fock

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Dense product restricted to the band: both factors have bandwidths
/// `ba` and `bb`.
fn band_mul(a: &DMatrix<f64>, ba: usize, b: &DMatrix<f64>, bb: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        let k0 = i.saturating_sub(ba);
        let k1 = (i + ba).min(n - 1);
        for k in k0..=k1 {
            let aik = a[(i, k)];
            if aik == 0.0 {
                continue;
            }
            let j0 = k.saturating_sub(bb);
            let j1 = (k + bb).min(n - 1);
            for j in j0..=j1 {
                c[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    c
}

/// Weyl-ordered H in the first n Fock states of frequency ω:
/// q^l p^m ↦ 2^{−l} Σ_k C(l, k) q^k p^m q^{l−k}.
pub fn fock_hamiltonian(model: &Model, hbar: f64, omega: f64, n: usize) -> Result<DMatrix<f64>> {
    let h = model.hamiltonian();
    let terms: Vec<(usize, usize, f64)> = h.terms().map(|(i, j, c)| (i, j, c.re)).collect();
    if terms.iter().any(|&(i, _, _)| i % 2 == 1) {
        return Err(Error::UnsupportedModel("odd powers of p are not supported in the Fock basis".into()));
    }
    let max_q = terms.iter().map(|t| t.1).max().unwrap_or(0);
    let max_p = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let size = n + max_q + max_p + 2;
    let mut q = DMatrix::zeros(size, size);
    let mut p2 = DMatrix::zeros(size, size);
    let sq = (hbar / (2.0 * omega)).sqrt();
    for k in 1..size {
        q[(k - 1, k)] = sq * (k as f64).sqrt();
        q[(k, k - 1)] = q[(k - 1, k)];
    }
    // p² = −(ħω/2)(a† − a)²
    for k in 0..size {
        let kf = k as f64;
        p2[(k, k)] = 0.5 * hbar * omega * (2.0 * kf + 1.0);
        if k + 2 < size {
            let v = -0.5 * hbar * omega * ((kf + 1.0) * (kf + 2.0)).sqrt();
            p2[(k, k + 2)] = v;
            p2[(k + 2, k)] = v;
        }
    }
    let mut qpow = vec![DMatrix::identity(size, size)];
    for l in 1..=max_q {
        let next = band_mul(&qpow[l - 1], l - 1, &q, 1);
        qpow.push(next);
    }
    let mut ppow = vec![DMatrix::identity(size, size)];
    for m in 1..=max_p / 2 {
        let next = band_mul(&ppow[m - 1], 2 * (m - 1), &p2, 2);
        ppow.push(next);
    }
    let mut out = DMatrix::zeros(size, size);
    for &(ip, jq, c) in &terms {
        let pm = &ppow[ip / 2];
        if jq == 0 {
            out += pm * c;
            continue;
        }
        let mut acc = DMatrix::zeros(size, size);
        for k in 0..=jq {
            let left = band_mul(&qpow[k], k, pm, ip);
            acc += band_mul(&left, k + ip, &qpow[jq - k], jq - k) * binomial(jq, k);
        }
        out += acc * (c / 2f64.powi(jq as i32));
    }
    Ok(out.view((0, 0), (n, n)).into_owned())
}

fn parity_blocks(h: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let ev: Vec<usize> = (0..n).step_by(2).collect();
    let od: Vec<usize> = (1..n).step_by(2).collect();
    let pick = |idx: &[usize]| DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
    (pick(&ev), pick(&od))
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Largest element coupling even and odd Fock states.
pub fn parity_mixing(h: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            if (i + j) % 2 == 1 {
                worst = worst.max(h[(i, j)].abs());
            }
        }
    }
    worst
}

fn oscillator_omega(model: &Model) -> f64 {
    match model {
        Model::Harmonic { omega } => *omega,
        _ => 1.0,
    }
}

fn fock_levels(model: &Model, hbar: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = fock_hamiltonian(model, hbar, oscillator_omega(model), n)?;
    let (e, o) = parity_blocks(&h);
    Ok((sorted_eigenvalues(e), sorted_eigenvalues(o)))
}

fn fock_spectrum(model: &Model, hbar: f64, basis_size: usize) -> Result<QuantumSpectrum> {
    if !model.is_parity_symmetric() {
        return Err(Error::NonSymmetricModel);
    }
    let (plus, minus) = fock_levels(model, hbar, basis_size)?;
    let (hp, hm) = fock_levels(model, hbar, basis_size / 2)?;
    // compare the levels of the smaller basis that sit in its lower half
    let est = plus
        .iter()
        .zip(&hp)
        .take(hp.len() / 2)
        .chain(minus.iter().zip(&hm).take(hm.len() / 2))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(QuantumSpectrum {
        hbar,
        energies_plus: plus,
        energies_minus: minus,
        basis: BasisKind::Oscillator,
        basis_size,
        convergence_estimate: est,
        grid: None,
    })
}

/// Parity-resolved spectrum. Multi-well models use the half-grid with
/// `basis_size` points (and its refinement); other models the Fock basis.
pub fn diagonalize(model: &Model, hbar: f64, basis_size: usize) -> Result<QuantumSpectrum> {
    if basis_size < 64 {
        return Err(Error::DegenerateInput("basis_size must be at least 64".into()));
    }
    if !(hbar > 0.0) {
        return Err(Error::DegenerateInput("ħ must be positive".into()));
    }
    match model {
        Model::MultiWell { .. } => grid_spectrum(model, hbar, basis_size),
        _ => fock_spectrum(model, hbar, basis_size),
    }
}

/// Doublet nearest the target: the closest-spaced even/odd pair among the two
/// nearest levels of each parity.
pub fn splitting_at_energy(spectrum: &QuantumSpectrum, target: f64) -> Result<SplittingPoint> {
    let plus = &spectrum.energies_plus;
    let minus = &spectrum.energies_minus;
    let nearest_two = |v: &[f64]| {
        let mut idx: Vec<(usize, f64)> = v.iter().copied().enumerate().collect();
        idx.sort_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()));
        idx.truncate(2);
        idx
    };
    let (ev, od) = (nearest_two(plus), nearest_two(minus));
    if ev.is_empty() || od.is_empty() {
        return Err(Error::NoDoubletNearTarget(target));
    }
    let ((ie, ep), (io, em)) = closest_pair(&ev, &od);
    let spacing = match (ie.checked_sub(1).map(|i| plus[i]), plus.get(ie + 1)) {
        (Some(a), Some(b)) => 0.5 * (b - a),
        (Some(a), None) => ep - a,
        (None, Some(b)) => b - ep,
        (None, None) => f64::INFINITY,
    };
    doublet_window(ep, em, spacing, target)?;
    let (sign, ln) = match &spectrum.grid {
        Some(g) => {
            let a = g.splitting(g.eigenvalue(Parity::Even, ie)?, g.eigenvalue(Parity::Odd, io)?);
            let r = g.refined()?;
            let b = r.splitting(r.eigenvalue(Parity::Even, ie)?, r.eigenvalue(Parity::Odd, io)?);
            (b.0, (4.0 * b.1 - a.1) / 3.0)
        }
        None => ((em - ep).signum(), (em - ep).abs().ln()),
    };
    Ok(point_from(spectrum.hbar, Source::Exact, 0.5 * (ep + em), sign, ln))
}

fn point_from(hbar: f64, source: Source, energy: f64, sign: f64, ln: f64) -> SplittingPoint {
    let mut p = SplittingPoint::failed(hbar, source, None, &Error::Numerical(String::new()));
    p.error = None;
    p.delta_e = ln.exp();
    p.ln_delta_e = ln;
    p.energy = energy;
    p.sign_flag = if sign < 0.0 { -1 } else { 1 };
    p
}

pub const FOCK_START: usize = 400;
pub const FOCK_CAP: usize = 1600;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FockDoublet {
    pub e_plus: f64,
    pub e_minus: f64,
    pub basis_size: usize,
    pub convergence: f64,
}

/// Doublet nearest `target` in the Fock basis, doubling the basis from 400
/// until ΔE moves by less than 1e−4 relative (cap 1600).
pub fn fock_doublet(model: &Model, hbar: f64, target: f64) -> Result<FockDoublet> {
    if !model.is_parity_symmetric() {
        return Err(Error::NonSymmetricModel);
    }
    let pick = |n: usize| -> Result<(f64, f64)> {
        let s = QuantumSpectrum {
            hbar,
            energies_plus: Vec::new(),
            energies_minus: Vec::new(),
            basis: BasisKind::Oscillator,
            basis_size: n,
            convergence_estimate: 0.0,
            grid: None,
        };
        let (p, m) = fock_levels(model, hbar, n)?;
        let s = QuantumSpectrum { energies_plus: p, energies_minus: m, ..s };
        let pt = splitting_at_energy(&s, target)?;
        Ok((pt.energy, pt.sign_flag as f64 * pt.delta_e))
    };
    let mut n = FOCK_START;
    let mut prev = pick(n)?;
    loop {
        let next = (2 * n).min(FOCK_CAP);
        let cur = pick(next)?;
        let change = ((cur.1 - prev.1) / cur.1).abs();
        if change < 1e-4 || next >= FOCK_CAP {
            if change >= 1e-4 {
                log::warn!("Fock doublet not converged at cap: relative change {change:.2e}");
            }
            return Ok(FockDoublet {
                e_plus: cur.0 - 0.5 * cur.1,
                e_minus: cur.0 + 0.5 * cur.1,
                basis_size: next,
                convergence: change,
            });
        }
        prev = cur;
        n = next;
    }
}

/// ΔE of the doublet nearest E, with the basis chosen per model.
pub fn exact_splitting(model: &Model, hbar: f64, target: f64) -> Result<SplittingPoint> {
    match model {
        Model::MultiWell { .. } => {
            let d = grid_doublet(model, hbar, target)?;
            Ok(point_from(hbar, Source::Exact, 0.5 * (d.e_plus + d.e_minus), d.sign, d.ln_delta_e))
        }
        _ => {
            let d = fock_doublet(model, hbar, target)?;
            let de = d.e_minus - d.e_plus;
            Ok(point_from(hbar, Source::Exact, 0.5 * (d.e_plus + d.e_minus), de.signum(), de.abs().ln()))
        }
    }
}

// ---------------------------------------------------------------- trace ratio

/// (2ħ/iT) Tr(Ŝ Π Û)/Tr(Π Û) with Û = e^{−i(Ĥ − E₀)T/ħ} from the matrix
/// exponential; the shift E₀ cancels in the ratio.
pub fn trace_ratio(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
    proj: &DMatrix<f64>,
    shift: f64,
    hbar: f64,
    t: Complex64,
) -> Result<Complex64> {
    let n = h.nrows();
    let scale = -Complex64::i() * t / hbar;
    let a = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { shift } else { 0.0 };
        scale * (h[(i, j)] - d)
    });
    let u = a.exp();
    let pc = proj.map(|x| Complex64::new(x, 0.0));
    let sc = s.map(|x| Complex64::new(x, 0.0));
    let pu = &pc * &u;
    let num = (&sc * &pu).trace();
    let den = pu.trace();
    if !num.is_finite() || !den.is_finite() || den.norm() == 0.0 {
        return Err(Error::Numerical("propagator overflow in trace ratio".into()));
    }
    Ok(2.0 * hbar / (Complex64::i() * t) * num / den)
}

/// Full (unreduced) matrix, reflection operator and basis label for the
/// trace-ratio check.
fn full_problem(model: &Model, hbar: f64, size: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    match model {
        Model::MultiWell { .. } => {
            let cap = barrier_top(model)?;
            let len = grid_half_width(model, cap)?;
            let v = model.potential().ok_or(Error::NonSymmetricModel)?;
            let half = size / 2;
            let n = 2 * half + 1;
            let h = len / (half + 1) as f64;
            let c = 0.5 * hbar * hbar / (12.0 * h * h);
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                let q = (i as f64 - half as f64) * h;
                m[(i, i)] = 30.0 * c + v.eval_real(q).re;
                if i + 1 < n {
                    m[(i, i + 1)] = -16.0 * c;
                    m[(i + 1, i)] = -16.0 * c;
                }
                if i + 2 < n {
                    m[(i, i + 2)] = c;
                    m[(i + 2, i)] = c;
                }
            }
            let s = DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 });
            Ok((m, s))
        }
        _ => {
            let m = fock_hamiltonian(model, hbar, oscillator_omega(model), size)?;
            let s = DMatrix::from_fn(size, size, |i, j| if i == j { if i % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 });
            Ok((m, s))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRatioResult {
    pub estimate: Complex64,
    /// E⁻ − E⁺ from the same matrix.
    pub direct: f64,
    /// |T| ΔE / 2ħ.
    pub validity: f64,
}

pub const TRACE_RATIO_SIZE: usize = 400;
pub const VALIDITY_BOUND: f64 = 0.1;

/// Trace-ratio estimate of the n-th doublet of a symmetric model.
pub fn trace_ratio_splitting(model: &Model, hbar: f64, n: usize, t: Complex64) -> Result<TraceRatioResult> {
    if !model.is_parity_symmetric() {
        return Err(Error::NonSymmetricModel);
    }
    let (h, s) = full_problem(model, hbar, TRACE_RATIO_SIZE)?;
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for &k in &order {
        let v = eig.eigenvectors.column(k);
        let par = (v.transpose() * &s * v)[(0, 0)];
        if par > 0.0 {
            even.push(k);
        } else {
            odd.push(k);
        }
    }
    let (&ke, &ko) = even.get(n).zip(odd.get(n)).ok_or(Error::NoDoubletNearTarget(f64::NAN))?;
    let ep = eig.eigenvalues[ke];
    let em = eig.eigenvalues[ko];
    let direct = em - ep;
    let validity = t.norm() * direct.abs() / (2.0 * hbar);
    if validity >= VALIDITY_BOUND {
        return Err(Error::ValidityViolation(format!("|T|ΔE/2ħ = {validity:.3e}")));
    }
    let ve = eig.eigenvectors.column(ke);
    let vo = eig.eigenvectors.column(ko);
    let proj = ve * ve.transpose() + vo * vo.transpose();
    let estimate = trace_ratio(&h, &s, &proj, 0.5 * (ep + em), hbar, t)?;
    Ok(TraceRatioResult { estimate, direct, validity })
}

/// Trace-ratio row for the doublet nearest E, with an imaginary time chosen
/// at a tenth of the validity bound.
pub fn trace_ratio_at_energy(model: &Model, hbar: f64, target: f64) -> Result<SplittingPoint> {
    let (h, s) = full_problem(model, hbar, TRACE_RATIO_SIZE)?;
    let (hp, hm) = parity_blocks_general(&h, &s);
    let spec = QuantumSpectrum {
        hbar,
        energies_plus: hp,
        energies_minus: hm,
        basis: BasisKind::Grid,
        basis_size: TRACE_RATIO_SIZE,
        convergence_estimate: f64::NAN,
        grid: None,
    };
    let pt = splitting_at_energy(&spec, target)?;
    let n = spec.energies_plus.iter().filter(|&&e| e < pt.energy).count();
    let tau = 0.01 * 2.0 * hbar / pt.delta_e;
    let r = trace_ratio_splitting(model, hbar, n, Complex64::new(0.0, -tau))?;
    Ok(point_from(hbar, Source::TraceRatio, pt.energy, r.estimate.re.signum(), r.estimate.norm().ln()))
}

fn parity_blocks_general(h: &DMatrix<f64>, s: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for k in 0..h.nrows() {
        let v = eig.eigenvectors.column(k);
        if (v.transpose() * s * v)[(0, 0)] > 0.0 {
            plus.push(eig.eigenvalues[k]);
        } else {
            minus.push(eig.eigenvalues[k]);
        }
    }
    plus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    minus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (plus, minus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_fock_is_exact() {
        let s = diagonalize(&Model::Harmonic { omega: 1.0 }, 1.0, 64).unwrap();
        for (k, e) in s.energies_plus.iter().take(10).enumerate() {
            assert!((e - (2 * k) as f64 - 0.5).abs() < 1e-10);
        }
        for (k, e) in s.energies_minus.iter().take(10).enumerate() {
            assert!((e - (2 * k + 1) as f64 - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn sturm_count_matches_dense() {
        let m = Model::double_well([-2.0, -1.0, 1.0, 2.0]);
        let p = GridProblem::new(&m, 0.3, 4.0, 80).unwrap();
        let h = p.h();
        let c = p.hbar * p.hbar / (2.0 * h * h);
        let n = p.m;
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            a[(j, j)] = 2.0 * c + p.v[j];
            if j + 1 < n {
                let off = if j == 0 { -(2.0f64).sqrt() * c } else { -c };
                a[(j, j + 1)] = off;
                a[(j + 1, j)] = off;
            }
        }
        let ev = sorted_eigenvalues(a);
        for k in 0..6 {
            assert!((p.eigenvalue(Parity::Even, k).unwrap() - ev[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn green_identity_matches_direct_difference() {
        // at large ħ the doublet is resolved by the eigenvalues themselves
        let m = Model::double_well([-2.0, -1.0, 1.0, 2.0]);
        let p = GridProblem::new(&m, 0.5, 4.0, 2000).unwrap();
        let ep = p.eigenvalue(Parity::Even, 0).unwrap();
        let em = p.eigenvalue(Parity::Odd, 0).unwrap();
        let (s, l) = p.splitting(ep, em);
        assert!(s > 0.0);
        assert!(((l.exp() - (em - ep)) / (em - ep)).abs() < 1e-7, "{} {}", l.exp(), em - ep);
    }

    #[test]
    fn two_level_trace_ratio() {
        let (ep, em, hbar) = (0.3, 0.3 + 1e-3, 0.1);
        let h = DMatrix::from_row_slice(2, 2, &[ep, 0.0, 0.0, em]);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p = DMatrix::identity(2, 2);
        let t = Complex64::new(7.0, 0.0);
        let est = trace_ratio(&h, &s, &p, 0.3, hbar, t).unwrap();
        let x: f64 = 1e-3 * 7.0 / (2.0 * hbar);
        assert!((est.re - 2.0 * hbar / 7.0 * x.tan()).abs() < 1e-12);
        assert!(est.im.abs() < 1e-12);
    }
}
