//! Bohr–Sommerfeld quantization of single wells and the closed-form
//! tunnelling-splitting predictions built from the action catalog.

use crate::contour::{segment_integrals, BranchRule};
use crate::error::{Error, Result};
use crate::homology::{evaluate_catalog, ActionCatalog, DEFAULT_TOL};
use crate::model::{Family, Model};
use crate::polyalg::roots_flat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Semiclassical,
    Exact,
    TraceRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Red,
    Blue,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantizationSolution {
    pub well: usize,
    pub n: usize,
    pub energy: f64,
    pub action: f64,
    pub period: f64,
    pub hbar: f64,
    /// |S(E_N) − (N + ½) 2πħ|.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingPoint {
    pub inv_hbar: f64,
    pub delta_e: f64,
    /// ln ΔE, kept separately so that underflowing splittings still fit.
    pub ln_delta_e: f64,
    pub source: Source,
    pub variant: Option<Variant>,
    pub energy: f64,
    /// +1 when E⁻ ≥ E⁺, −1 when the doublet is inverted.
    pub sign_flag: i8,
    pub resonance: bool,
    /// d log ΔE / d(1/ħ) of the exponential envelope at fixed energy.
    pub slope: Option<f64>,
    pub error: Option<String>,
}

impl SplittingPoint {
    fn new(hbar: f64, ln_delta_e: f64, source: Source, energy: f64) -> Self {
        Self {
            inv_hbar: 1.0 / hbar,
            delta_e: ln_delta_e.exp(),
            ln_delta_e,
            source,
            variant: None,
            energy,
            sign_flag: 1,
            resonance: false,
            slope: None,
            error: None,
        }
    }

    pub fn failed(hbar: f64, source: Source, variant: Option<Variant>, err: &Error) -> Self {
        let mut p = Self::new(hbar, f64::NAN, source, f64::NAN);
        p.variant = variant;
        p.error = Some(error_code(err).to_string());
        p
    }
}

/// Stable short identifier for an error, used in CSV rows.
pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::NonConvergence { .. } => "NonConvergence",
        Error::DegenerateInput(_) => "DegenerateInput",
        Error::BranchAtOrigin => "BranchAtOrigin",
        Error::NotABranchPoint(_) => "NotABranchPoint",
        Error::DiscriminantDegenerate => "DiscriminantDegenerate",
        Error::SheetCollision(_) => "SheetCollision",
        Error::PathThroughSingularity(_) => "PathThroughSingularity",
        Error::TimeSingularity(_) => "TimeSingularity",
        Error::NotAdjacent => "NotAdjacent",
        Error::ExpansionFailure(_) => "ExpansionFailure",
        Error::UnsupportedModel(_) => "UnsupportedModel",
        Error::EnergyOutOfRange { .. } => "EnergyOutOfRange",
        Error::NoBoundState(_) => "NoBoundState",
        Error::DivergentSum => "DivergentSum",
        Error::ResonanceSingularity(_) => "ResonanceSingularity",
        Error::NonSymmetricModel => "NonSymmetricModel",
        Error::NoDoubletNearTarget(_) => "NoDoubletNearTarget",
        Error::ValidityViolation(_) => "ValidityViolation",
        Error::UnknownLoop(_) => "UnknownLoop",
        Error::Numerical(_) => "Numerical",
    }
}

/// A potential well: its minimum and the energy where it stops being closed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Well {
    pub x_min: f64,
    pub v_min: f64,
    /// Lower of the two neighbouring barrier tops (∞ if unbounded).
    pub e_top: f64,
}

/// Wells of a p²/2 + V(q) model, left to right.
pub fn wells(model: &Model) -> Result<Vec<Well>> {
    let v = model
        .potential()
        .ok_or_else(|| Error::UnsupportedModel("quantization needs H = p²/2 + V(q)".into()))?;
    let dv = v.derivative();
    let ddv = dv.derivative();
    let scale = 1.0 + dv.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut crit: Vec<f64> = roots_flat(&dv, 1e-14)?
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-8 * scale)
        .map(|z| z.re)
        .collect();
    crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let val = |x: f64| v.eval(Complex64::new(x, 0.0)).re;
    let mut out = Vec::new();
    for (i, &x) in crit.iter().enumerate() {
        if ddv.eval(Complex64::new(x, 0.0)).re <= 0.0 {
            continue;
        }
        let left = if i > 0 { val(crit[i - 1]) } else { f64::INFINITY };
        let right = crit.get(i + 1).map(|&y| val(y)).unwrap_or(f64::INFINITY);
        out.push(Well { x_min: x, v_min: val(x), e_top: left.min(right) });
    }
    Ok(out)
}

fn curvature_at(model: &Model, x: f64) -> Result<f64> {
    let v = model
        .potential()
        .ok_or_else(|| Error::UnsupportedModel("quantization needs H = p²/2 + V(q)".into()))?;
    Ok(v.derivative().derivative().eval(Complex64::new(x, 0.0)).re)
}

/// Action ∮ p dq and period of the closed orbit in `well` at energy E.
pub fn well_action(model: &Model, well: &Well, energy: f64) -> Result<(f64, f64)> {
    if !(energy > well.v_min && energy < well.e_top) {
        return Err(Error::EnergyOutOfRange { energy, lo: well.v_min, hi: well.e_top });
    }
    let t = model.turning_points(energy)?;
    let a = t.iter().copied().filter(|&x| x < well.x_min).fold(f64::NEG_INFINITY, f64::max);
    let b = t.iter().copied().filter(|&x| x > well.x_min).fold(f64::INFINITY, f64::min);
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::EnergyOutOfRange { energy, lo: well.v_min, hi: well.e_top });
    }
    let curve = model.curve(energy)?;
    let (s, tt) = segment_integrals(&curve, a, b, BranchRule::PositiveReal, 1e-13)?;
    Ok((2.0 * s.re, 2.0 * tt.re))
}

/// E_N with S(E_N) = (N + ½) 2πħ in well number `well` (left to right).
pub fn quantize_well(model: &Model, well: usize, n: usize, hbar: f64) -> Result<QuantizationSolution> {
    let ws = wells(model)?;
    let w = *ws.get(well).ok_or_else(|| Error::DegenerateInput(format!("model has {} wells", ws.len())))?;
    let target = (n as f64 + 0.5) * 2.0 * PI * hbar;
    let mut lo = w.v_min;
    let mut hi = w.e_top;
    if !w.e_top.is_finite() {
        hi = w.v_min + 1.0;
        while well_action(model, &w, hi)?.0 < target {
            hi = w.v_min + 2.0 * (hi - w.v_min);
        }
    }
    // the action right below a barrier top is expensive (the turning points
    // merge), so start from the harmonic estimate and only reach the top if
    // the iteration is pushed there
    let omega = curvature_at(model, w.x_min)?.sqrt();
    let top = hi;
    let mut e = (w.v_min + target / (2.0 * PI) * omega).min(w.v_min + 0.5 * (hi - w.v_min));
    let tol = 1e-13 * 2.0 * PI * hbar;
    let mut last = (f64::NAN, f64::NAN);
    for _ in 0..200 {
        let (s, t) = well_action(model, &w, e)?;
        last = (s, t);
        let r = s - target;
        if r.abs() <= tol {
            break;
        }
        if r > 0.0 {
            hi = e;
        } else {
            lo = e;
        }
        let newton = e - r / t;
        e = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + e.abs()) || top - e < 1e-10 * (top - w.v_min) {
            if hi == top {
                return Err(Error::NoBoundState(n));
            }
            last = well_action(model, &w, e)?;
            break;
        }
    }
    Ok(QuantizationSolution {
        well,
        n,
        energy: e,
        action: last.0,
        period: last.1,
        hbar,
        residual: (last.0 - target).abs(),
    })
}

/// Symmetric partial sum Σ_{|n| ≤ K} (−1)^{μ+1} e^{i n S/ħ} with μ = 2n + 1
/// and K even: neighbouring windings cancel in pairs, leaving the n = 0 term
/// when S is quantized.
pub fn winding_sum_symmetric(action: f64, hbar: f64, cutoff: usize) -> Complex64 {
    let k = (cutoff / 2 * 2) as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -k..=k {
        let mu = 2 * n + 1;
        let sign = if (mu + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        acc += Complex64::from_polar(sign, n as f64 * action / hbar);
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubleWellPrediction {
    pub point: SplittingPoint,
    pub s_beta: f64,
    pub t: f64,
    /// Symmetric winding partial sum; ≈ 1 at a quantized energy.
    pub winding_sum: Complex64,
    /// d ΔE / dT at fixed ħ.
    pub d_delta_e_dt: f64,
}

/// Energy either given or obtained by quantizing the left well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySpec {
    Energy(f64),
    Level(usize),
}

fn resolve_energy(model: &Model, spec: EnergySpec, hbar: f64) -> Result<f64> {
    match spec {
        EnergySpec::Energy(e) => Ok(e),
        EnergySpec::Level(n) => Ok(quantize_well(model, 0, n, hbar)?.energy),
    }
}

/// (ħ/2T) e^{−|S_β|/2ħ}; T defaults to a quarter of the well period, which
/// gives the familiar (ħω/π) e^{−∫|p|dq/ħ}.
pub fn split_double_well(model: &Model, spec: EnergySpec, hbar: f64, t: Option<f64>) -> Result<DoubleWellPrediction> {
    if model.family() != Family::DoubleWell {
        return Err(Error::UnsupportedModel("not a double-well model".into()));
    }
    let e = resolve_energy(model, spec, hbar)?;
    let cat = evaluate_catalog(model, e, DEFAULT_TOL)?;
    split_double_well_from(&cat, hbar, t)
}

pub fn split_double_well_from(cat: &ActionCatalog, hbar: f64, t: Option<f64>) -> Result<DoubleWellPrediction> {
    let s_beta = cat.action("S_beta")?.norm();
    let s_alpha = cat.action("S_alpha")?.re;
    let t = t.unwrap_or(cat.period("T_alpha")?.re / 4.0);
    let ln = (hbar / (2.0 * t)).ln() - s_beta / (2.0 * hbar);
    let mut point = SplittingPoint::new(hbar, ln, Source::Semiclassical, cat.energy);
    let de = point.delta_e;
    point.slope = Some(-s_beta / 2.0 - hbar);
    Ok(DoubleWellPrediction {
        point,
        s_beta,
        t,
        winding_sum: winding_sum_symmetric(s_alpha, hbar, 200),
        d_delta_e_dt: -de / t,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleWellPrediction {
    pub point: SplittingPoint,
    /// Symmetric n_L partial sum.
    pub sum_l: Complex64,
    /// Damped partial sum over n_C ≥ 0 up to the cutoff.
    pub sum_c_partial: Complex64,
    /// Its geometric resummation in the undamped limit, 1 / (2 cos(S_C/2ħ)).
    pub sum_c_closed: Complex64,
    /// Resummation of the damped series, to compare with `sum_c_partial`.
    pub sum_c_damped_closed: Complex64,
    /// cos(S_C/2ħ): the resonance factor.
    pub resonance_factor: f64,
}

pub const RESONANCE_FLAG: f64 = 1e-3;

/// Σ over n_C ≥ 0 of (−1)^{n_C} e^{i(n_C + ½)S_C/ħ}: the sign is the phase
/// of the two turning points passed on every extra turn in the central well.
/// Partial sums are Abel-damped so the tail past the cutoff is below 1e−12.
fn central_sum(s_c: f64, hbar: f64, cutoff: usize) -> (Complex64, Complex64, Complex64) {
    let phi = s_c / hbar;
    let rho = (1e-12f64).powf(1.0 / cutoff as f64);
    let z = Complex64::from_polar(-rho, phi);
    let half = Complex64::from_polar(1.0, 0.5 * phi);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut term = half;
    for _ in 0..=cutoff {
        acc += term;
        term *= z;
    }
    let damped_closed = half / (Complex64::new(1.0, 0.0) - z);
    let closed = Complex64::new(0.5 / (0.5 * phi).cos(), 0.0);
    (acc, damped_closed, closed)
}

/// (ħ/2T) e^{−|S_β1|/ħ} |Σ_{n_L, n_C} …| for the symmetric triple well,
/// energy from quantizing the left well.
pub fn split_triple_well(
    model: &Model,
    spec: EnergySpec,
    hbar: f64,
    t: Option<f64>,
    cutoff: usize,
) -> Result<TripleWellPrediction> {
    if model.family() != Family::TripleWell {
        return Err(Error::UnsupportedModel("not a triple-well model".into()));
    }
    let e = resolve_energy(model, spec, hbar)?;
    let cat = evaluate_catalog(model, e, DEFAULT_TOL)?;
    split_triple_well_from(&cat, hbar, t, cutoff)
}

pub fn split_triple_well_from(cat: &ActionCatalog, hbar: f64, t: Option<f64>, cutoff: usize) -> Result<TripleWellPrediction> {
    if cutoff < 1 {
        return Err(Error::DegenerateInput("winding cutoff must be at least 1".into()));
    }
    let s_b1 = cat.action("S_beta1")?.norm();
    let s_l = cat.action("S_L")?.re;
    let s_c = cat.action("S_C")?.re;
    let t = t.unwrap_or(cat.period("T_L")?.re / 4.0);
    let sum_l = winding_sum_symmetric(s_l, hbar, cutoff);
    let (partial, damped_closed, closed) = central_sum(s_c, hbar, cutoff);
    let c = (0.5 * s_c / hbar).cos();
    // undamped partial sums oscillate with amplitude 1/|2 cos|
    if c.abs() < 1e-12 {
        return Err(Error::DivergentSum);
    }
    let ln = (hbar / (2.0 * t)).ln() - s_b1 / hbar + (sum_l.norm() * closed.norm()).ln();
    let mut point = SplittingPoint::new(hbar, ln, Source::Semiclassical, cat.energy);
    point.resonance = c.abs() < RESONANCE_FLAG;
    // d/d(1/ħ) of −S_β1/ħ + ln ħ − ln|cos(S_C/2ħ)|
    point.slope = Some(-s_b1 - hbar + 0.5 * s_c * (0.5 * s_c / hbar).tan());
    Ok(TripleWellPrediction {
        point,
        sum_l,
        sum_c_partial: partial,
        sum_c_closed: closed,
        sum_c_damped_closed: damped_closed,
        resonance_factor: c,
    })
}

pub const RESONANCE_SINGULARITY: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct NormalFormPrediction {
    pub point: SplittingPoint,
    /// ((T_out/T_in) S_in − S_out) / 2ħ.
    pub sin_argument: f64,
    pub sin_factor: f64,
    /// Coefficient of 1/ħ in the exponent.
    pub exponent: f64,
}

/// Exponent coefficient of the two time paths: the blue path crosses the
/// out-out manifold once (half its cycle), the red path adds a second,
/// reversed crossing.
pub fn normal_form_exponent(cat: &ActionCatalog, variant: Variant) -> Result<f64> {
    let s_io = cat.action("S_in_out")?.norm();
    let s_oo = cat.action("S_out_out")?.norm();
    Ok(match variant {
        Variant::Blue => s_io + 0.5 * s_oo,
        Variant::Red => s_io + s_oo,
    })
}

pub fn split_normal_form(model: &Model, energy: f64, hbar: f64, variant: Variant) -> Result<NormalFormPrediction> {
    if model.family() != Family::NormalForm {
        return Err(Error::UnsupportedModel("not the normal-form model".into()));
    }
    let cat = evaluate_catalog(model, energy, DEFAULT_TOL)?;
    split_normal_form_from(&cat, hbar, variant)
}

/// (2ħ/T_in) (e^{−S_io/2ħ} / sin(((T_out/T_in)S_in − S_out)/2ħ))² e^{−S_oo/2ħ}
/// for the blue variant; the red variant carries the red-path exponent.
pub fn split_normal_form_from(cat: &ActionCatalog, hbar: f64, variant: Variant) -> Result<NormalFormPrediction> {
    let s_in = cat.action("S_in")?.re;
    let s_out = cat.action("S_out")?.re;
    let t_in = cat.period("T_in")?.re;
    let t_out = cat.period("T_out")?.re;
    let arg = ((t_out / t_in) * s_in - s_out) / (2.0 * hbar);
    let sn = arg.sin();
    if sn.abs() < RESONANCE_SINGULARITY {
        return Err(Error::ResonanceSingularity(sn));
    }
    let expo = normal_form_exponent(cat, variant)?;
    let ln = (2.0 * hbar / t_in).ln() - expo / hbar - 2.0 * sn.abs().ln();
    let mut point = SplittingPoint::new(hbar, ln, Source::Semiclassical, cat.energy);
    point.variant = Some(variant);
    point.resonance = sn.abs() < RESONANCE_FLAG;
    point.slope = Some(-expo);
    Ok(NormalFormPrediction { point, sin_argument: arg, sin_factor: sn, exponent: expo })
}

/// The double sum over n_in, n'_in ≥ 0 with the factors 4(n+1)·4(n'+1), the
/// time-constrained phase per inner turn and the sign from μ, Abel-damped so
/// the tail past the cutoff is below 1e−12. `resummed` is its geometric
/// resummation (4/(1 − z)²)², `magnitude` the splitting it implies and
/// `closed_form` the closed-form prediction at the same ħ.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormSeries {
    pub partial: Complex64,
    pub resummed: Complex64,
    /// |resummed| e^{−(S_io + S_oo/2)/ħ} 2ħ/T_in, to set against the closed form.
    pub magnitude: f64,
    pub closed_form: f64,
}

pub fn normal_form_series(cat: &ActionCatalog, hbar: f64, cutoff: usize) -> Result<NormalFormSeries> {
    let s_in = cat.action("S_in")?.re;
    let s_out = cat.action("S_out")?.re;
    let t_in = cat.period("T_in")?.re;
    let t_out = cat.period("T_out")?.re;
    // n_out = (L − n_in T_in)/T_out leaves the phase −ψ per inner turn
    let psi = ((t_out / t_in) * s_in - s_out) / hbar;
    let rho = (1e-16f64).powf(1.0 / cutoff as f64);
    // μ = n_in + n_out + n'_in + n'_out + 7 contributes (−1)^{n_in} per side
    let z = Complex64::from_polar(-rho, -psi);
    let mut side = Complex64::new(0.0, 0.0);
    let mut zn = Complex64::new(1.0, 0.0);
    for n in 0..=cutoff {
        side += zn * (4.0 * (n as f64 + 1.0));
        zn *= z;
    }
    let one = Complex64::new(1.0, 0.0);
    let side_closed = 4.0 / ((one - z) * (one - z));
    let partial = side * side;
    let resummed = side_closed * side_closed;
    let blue = split_normal_form_from(cat, hbar, Variant::Blue)?;
    let env = 2.0 * hbar / t_in * (-blue.exponent / hbar).exp();
    Ok(NormalFormSeries { partial, resummed, magnitude: env * resummed.norm(), closed_form: blue.point.delta_e })
}

/// Grid of ħ values, one per point, ascending in 1/ħ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HbarGrid {
    pub inv_hbar: Vec<f64>,
}

impl HbarGrid {
    pub fn geometric(lo: f64, hi: f64, points: usize) -> Self {
        let r = if points > 1 { (hi / lo).powf(1.0 / (points - 1) as f64) } else { 1.0 };
        Self { inv_hbar: (0..points).map(|k| lo * r.powi(k as i32)).collect() }
    }

    pub fn linear(lo: f64, hi: f64, points: usize) -> Self {
        let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
        Self { inv_hbar: (0..points).map(|k| lo + step * k as f64).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.inv_hbar.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::DegenerateInput("1/ħ must be positive".into()));
        }
        if self.inv_hbar.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateInput("grid must increase strictly in 1/ħ".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOptions {
    pub spec: EnergySpec,
    pub sources: Vec<Source>,
    pub variants: Vec<Variant>,
    pub t: Option<f64>,
    pub cutoff: usize,
    /// Quadrature tolerance for the action catalogs.
    pub tol: f64,
}

/// One row per (grid point, source, variant), in grid order, then source,
/// then variant. Per-point failures are kept as rows with an error code.
pub fn sweep(model: &Model, grid: &HbarGrid, opts: &SweepOptions) -> Result<Vec<SplittingPoint>> {
    grid.validate()?;
    // the catalog depends only on E, so a fixed energy is evaluated once
    let fixed = match opts.spec {
        EnergySpec::Energy(e) => Some(evaluate_catalog(model, e, opts.tol)?),
        EnergySpec::Level(_) => None,
    };
    let rows: Vec<Vec<SplittingPoint>> = grid
        .inv_hbar
        .par_iter()
        .map(|&ih| {
            let hbar = 1.0 / ih;
            let mut out = Vec::new();
            let energy = resolve_energy(model, opts.spec, hbar);
            for &src in &opts.sources {
                match src {
                    Source::Semiclassical => {
                        let cat = match (&fixed, &energy) {
                            (Some(c), _) => Ok(c.clone()),
                            (None, Ok(e)) => evaluate_catalog(model, *e, opts.tol),
                            (None, Err(e)) => Err(e.clone()),
                        };
                        out.extend(semiclassical_rows(model, cat, hbar, opts));
                    }
                    Source::Exact => {
                        let r = energy.clone().and_then(|e| crate::qref::exact_splitting(model, hbar, e));
                        out.push(r.unwrap_or_else(|e| SplittingPoint::failed(hbar, Source::Exact, None, &e)));
                    }
                    Source::TraceRatio => {
                        let r = energy.clone().and_then(|e| crate::qref::trace_ratio_at_energy(model, hbar, e));
                        out.push(r.unwrap_or_else(|e| SplittingPoint::failed(hbar, Source::TraceRatio, None, &e)));
                    }
                }
            }
            out
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn semiclassical_rows(model: &Model, cat: Result<ActionCatalog>, hbar: f64, opts: &SweepOptions) -> Vec<SplittingPoint> {
    let src = Source::Semiclassical;
    match model.family() {
        Family::NormalForm => {
            let variants = if opts.variants.is_empty() { vec![Variant::Red, Variant::Blue] } else { opts.variants.clone() };
            variants
                .into_iter()
                .map(|v| {
                    cat.as_ref()
                        .map_err(|e| e.clone())
                        .and_then(|c| split_normal_form_from(c, hbar, v))
                        .map(|p| p.point)
                        .unwrap_or_else(|e| SplittingPoint::failed(hbar, src, Some(v), &e))
                })
                .collect()
        }
        Family::DoubleWell => vec![cat
            .and_then(|c| split_double_well_from(&c, hbar, opts.t))
            .map(|p| p.point)
            .unwrap_or_else(|e| SplittingPoint::failed(hbar, src, None, &e))],
        Family::TripleWell => vec![cat
            .and_then(|c| split_triple_well_from(&c, hbar, opts.t, opts.cutoff))
            .map(|p| p.point)
            .unwrap_or_else(|e| SplittingPoint::failed(hbar, src, None, &e))],
        _ => vec![SplittingPoint::failed(
            hbar,
            src,
            None,
            &Error::UnsupportedModel("no closed-form splitting for this model".into()),
        )],
    }
}

/// Least-squares slope of log ΔE against 1/ħ over finite positive rows.
pub fn fitted_slope(points: &[SplittingPoint]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.error.is_none() && p.ln_delta_e.is_finite())
        .map(|p| (p.inv_hbar, p.ln_delta_e))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_levels() {
        let m = Model::Harmonic { omega: 1.3 };
        for n in [0, 3, 10] {
            let q = quantize_well(&m, 0, n, 0.07).unwrap();
            assert!((q.energy - 0.07 * 1.3 * (n as f64 + 0.5)).abs() < 1e-10, "{}", q.energy);
        }
    }

    #[test]
    fn winding_pairs_cancel() {
        let s = 2.0 * PI * 0.1 * 3.5;
        let w = winding_sum_symmetric(s, 0.1, 10);
        assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn central_sum_resums() {
        let (partial, damped, closed) = central_sum(2.3, 0.1, 200);
        assert!((partial - damped).norm() < 1e-10);
        assert!((closed.re - 0.5 / (11.5f64).cos()).abs() < 1e-14);
    }

    #[test]
    fn geometric_grid_is_increasing() {
        let g = HbarGrid::geometric(20.0, 200.0, 40);
        g.validate().unwrap();
        assert!((g.inv_hbar[39] - 200.0).abs() < 1e-10);
        assert!(HbarGrid { inv_hbar: vec![2.0, 1.0] }.validate().is_err());
    }
}
