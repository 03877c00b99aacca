use crate::config::{EnergyChoice, RunConfig, DEFAULT_BASIS, DEFAULT_CUTOFF};
use crate::output::{num, source_name, variant_name, write_json, write_spectrum_csv, write_splitting_csv};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use tunnelsplit::curve::topology;
use tunnelsplit::homology::{evaluate_catalog, simultaneous_quantization_check, verify_relations, INTEGER_TOL};
use tunnelsplit::model::{Family, Model};
use tunnelsplit::qref::{diagonalize, splitting_at_energy, FOCK_CAP, FOCK_START, TRACE_RATIO_SIZE, VALIDITY_BOUND};
use tunnelsplit::semicl::{
    fitted_slope, quantize_well, sweep, EnergySpec, Source, SplittingPoint, SweepOptions, RESONANCE_FLAG,
    RESONANCE_SINGULARITY,
};
use tunnelsplit::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(Error),
    Io(std::io::Error),
    /// The curve splits into components.
    Intransitive,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Intransitive => write!(f, "monodromy group is intransitive: the curve is reducible"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(Error::ValidityViolation(_)) => 4,
            CliError::Run(Error::UnsupportedModel(_) | Error::DegenerateInput(_)) => 2,
            CliError::Run(_) | CliError::Intransitive => 3,
            CliError::Io(_) => 1,
        }
    }
}

pub struct Context {
    pub cfg: RunConfig,
    pub model: Model,
    pub out: PathBuf,
    pub tol: f64,
    pub command: &'static str,
}

impl Context {
    pub fn new(cfg: RunConfig, out: Option<PathBuf>, tol: Option<f64>, command: &'static str) -> Result<Self, CliError> {
        let model = cfg.model().map_err(|e| CliError::Config(e.0))?;
        let out = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
        let tol = tol.unwrap_or(cfg.tolerances.quadrature);
        if !(tol > 0.0) {
            return Err(CliError::Config("--tol must be positive".into()));
        }
        std::fs::create_dir_all(&out)?;
        Ok(Self { cfg, model, out, tol, command })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn spec(&self) -> EnergySpec {
        match self.cfg.energy_choice() {
            Ok(EnergyChoice::Level(n)) => EnergySpec::Level(n),
            Ok(EnergyChoice::Energy(e)) => EnergySpec::Energy(e),
            Err(_) => unreachable!("validated on load"),
        }
    }

    /// Energy for single-energy reports; a level needs an ħ to resolve.
    fn energy(&self) -> Result<f64, CliError> {
        match self.spec() {
            EnergySpec::Energy(e) => Ok(e),
            EnergySpec::Level(n) => {
                let hbar = self
                    .cfg
                    .single_hbar()
                    .ok_or_else(|| CliError::Config("a level needs hbar or hbar_grid to fix the energy".into()))?;
                Ok(quantize_well(&self.model, 0, n, hbar)?.energy)
            }
        }
    }

    fn manifest(&self, outputs: &[&str], extra: BTreeMap<&'static str, serde_json::Value>) -> Result<(), CliError> {
        let m = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            config: &self.cfg,
            model: &self.model,
            tolerances: ManifestTolerances {
                quadrature: self.tol,
                relation: self.cfg.tolerances.relation,
                integer: INTEGER_TOL,
                resonance_flag: RESONANCE_FLAG,
                resonance_singularity: RESONANCE_SINGULARITY,
                trace_ratio_validity: VALIDITY_BOUND,
            },
            basis: ManifestBasis {
                multi_well: "three-point finite differences on a symmetric half grid, Richardson-extrapolated over (m, 2m), doubled until ln dE moves by less than 1e-4",
                oscillator_start: FOCK_START,
                oscillator_cap: FOCK_CAP,
                operator_ordering: "weyl",
                trace_ratio_grid: TRACE_RATIO_SIZE,
            },
            conventions: ManifestConventions {
                anchor: "real point right of every finite singular point",
                sheet_labels: "p-values at the anchor sorted by (re, im)",
                loop_orientation: "real ovals along the Hamiltonian flow; barrier loops with Im S > 0; the loop around infinity clockwise in q",
                delta_e_sign: "E(odd) - E(even); delta_E column holds the magnitude, sign_flag the sign",
                default_t: "a quarter of the well period",
                winding_cutoff: self.cfg.cutoff.unwrap_or(DEFAULT_CUTOFF),
            },
            outputs: outputs.to_vec(),
            details: extra,
        };
        write_json(&self.path("manifest.json"), &m)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct ManifestTolerances {
    quadrature: f64,
    relation: f64,
    integer: f64,
    resonance_flag: f64,
    resonance_singularity: f64,
    trace_ratio_validity: f64,
}

#[derive(Serialize)]
struct ManifestBasis {
    multi_well: &'static str,
    oscillator_start: usize,
    oscillator_cap: usize,
    operator_ordering: &'static str,
    trace_ratio_grid: usize,
}

#[derive(Serialize)]
struct ManifestConventions {
    anchor: &'static str,
    sheet_labels: &'static str,
    loop_orientation: &'static str,
    delta_e_sign: &'static str,
    default_t: &'static str,
    winding_cutoff: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    model: &'a Model,
    tolerances: ManifestTolerances,
    basis: ManifestBasis,
    conventions: ManifestConventions,
    outputs: Vec<&'a str>,
    details: BTreeMap<&'static str, serde_json::Value>,
}

fn cplx(z: num_complex::Complex64) -> String {
    format!("{} {:+.15e}i", num(z.re), z.im)
}

pub fn topology_cmd(ctx: &Context) -> Result<String, CliError> {
    let e = ctx.energy()?;
    let t = topology(&ctx.model.curve(e)?)?;
    let mut s = String::new();
    writeln!(s, "model: {}", model_name(&ctx.model)).unwrap();
    writeln!(s, "energy: {}", num(e)).unwrap();
    writeln!(s, "sheets: {}", t.sheet_count).unwrap();
    writeln!(s, "ramification: {}", t.ramification_index).unwrap();
    writeln!(s, "genus: {}, holes: {}", t.genus, t.holes()).unwrap();
    writeln!(s, "genus_riemann_hurwitz: {}", t.genus_riemann_hurwitz).unwrap();
    writeln!(s, "transitive: {}", t.transitive).unwrap();
    writeln!(s, "anchor: {}", cplx(t.anchor)).unwrap();
    writeln!(s, "anchor_sheets:").unwrap();
    for (k, p) in t.anchor_sheets.iter().enumerate() {
        writeln!(s, "  {k}: {}", cplx(*p)).unwrap();
    }
    writeln!(s, "branch_points:").unwrap();
    for b in &t.branch_points {
        writeln!(s, "  - q: {}  ramification: {}  kind: {:?}  cycle: {}", cplx(b.location), b.ramification, b.kind, b.monodromy)
            .unwrap();
    }
    writeln!(s, "punctures:").unwrap();
    for p in &t.punctures {
        let at = p.location.map(cplx).unwrap_or_else(|| "infinity".into());
        writeln!(s, "  - q: {at}  sheets: {:?}  residue: {}", p.sheets, cplx(p.loop_action)).unwrap();
    }
    writeln!(s, "local_monodromy:").unwrap();
    for (q, m) in &t.local_monodromy {
        writeln!(s, "  - q: {}  permutation: {m}", cplx(*q)).unwrap();
    }
    writeln!(s, "monodromy_infinity: {}", t.monodromy_infinity).unwrap();
    writeln!(s, "monodromy_product_identity: {}", t.monodromy_product().is_identity()).unwrap();
    if !t.transitive {
        writeln!(s, "warning: intransitive monodromy, the curve is reducible").unwrap();
    }
    std::fs::write(ctx.path("topology.txt"), &s)?;
    let mut extra = BTreeMap::new();
    extra.insert("energy", serde_json::json!(e));
    ctx.manifest(&["topology.txt"], extra)?;
    if !t.transitive {
        return Err(CliError::Intransitive);
    }
    Ok(s)
}

fn model_name(m: &Model) -> &'static str {
    match m.family() {
        Family::DoubleWell => "double_well",
        Family::TripleWell => "triple_well",
        Family::NormalForm => "normal_form",
        _ => "custom_polynomial",
    }
}

pub fn actions_cmd(ctx: &Context) -> Result<String, CliError> {
    let e = ctx.energy()?;
    let cat = evaluate_catalog(&ctx.model, e, ctx.tol)?;
    let mut s = String::new();
    writeln!(s, "model: {}", model_name(&ctx.model)).unwrap();
    writeln!(s, "energy: {}", num(e)).unwrap();
    let tp: Vec<String> = cat.turning_points.iter().map(|x| num(*x)).collect();
    writeln!(s, "turning_points: [{}]", tp.join(", ")).unwrap();
    writeln!(s, "actions:").unwrap();
    for (k, v) in &cat.actions {
        writeln!(s, "  {k}: {}", cplx(*v)).unwrap();
    }
    writeln!(s, "periods:").unwrap();
    for (k, v) in &cat.periods {
        writeln!(s, "  {k}: {}", cplx(*v)).unwrap();
    }
    writeln!(s, "gamma_branch_max: {}", num(cat.gamma_branch_max)).unwrap();
    if !cat.puncture_residues.is_empty() {
        writeln!(s, "puncture_residues:").unwrap();
        for r in &cat.puncture_residues {
            writeln!(s, "  - {}", cplx(*r)).unwrap();
        }
    }
    let thr = ctx.cfg.tolerances.relation * (1.0 + cat.max_abs_action());
    writeln!(s, "relations:").unwrap();
    writeln!(s, "  relation | lhs | rhs | residual | pass").unwrap();
    let mut failed = 0;
    for r in verify_relations(&cat) {
        let pass = r.residual < thr;
        failed += usize::from(!pass);
        writeln!(s, "  {} | {} | {} | {} | {}", r.name, cplx(r.lhs), cplx(r.rhs), num(r.residual), pass).unwrap();
    }
    if matches!(cat.family, Family::DoubleWell | Family::TripleWell) {
        let hbars: Vec<f64> = match (&ctx.cfg.hbar_grid, ctx.cfg.hbar) {
            (_, Some(h)) => vec![h],
            (Some(_), None) => ctx.cfg.grid().map_err(|e| CliError::Config(e.0))?.inv_hbar.iter().map(|x| 1.0 / x).collect(),
            _ => Vec::new(),
        };
        if !hbars.is_empty() {
            writeln!(s, "simultaneous_quantization:").unwrap();
            writeln!(s, "  inv_hbar | m_left | m_infinity | m_right | m_center | left | infinity | right | simultaneous").unwrap();
        }
        for h in hbars {
            let q = simultaneous_quantization_check(&cat, h)?;
            let mc = q.m_center.map(num).unwrap_or_else(|| "-".into());
            writeln!(
                s,
                "  {} | {} | {} | {} | {mc} | {} | {} | {} | {}",
                num(1.0 / h),
                num(q.m_left),
                num(q.m_infinity),
                num(q.m_right),
                q.left_quantized,
                q.infinity_quantized,
                q.right_quantized,
                q.simultaneous
            )
            .unwrap();
        }
    }
    std::fs::write(ctx.path("actions.txt"), &s)?;
    let mut extra = BTreeMap::new();
    extra.insert("energy", serde_json::json!(e));
    extra.insert("failed_relations", serde_json::json!(failed));
    ctx.manifest(&["actions.txt"], extra)?;
    if failed > 0 {
        return Err(CliError::Run(Error::Numerical(format!("{failed} relation(s) above threshold"))));
    }
    Ok(s)
}

fn sweep_rows(ctx: &Context, sources: Vec<Source>) -> Result<Vec<SplittingPoint>, CliError> {
    let grid = ctx.cfg.grid().map_err(|e| CliError::Config(e.0))?;
    let opts = SweepOptions {
        spec: ctx.spec(),
        sources,
        variants: ctx.cfg.variants.clone(),
        t: ctx.cfg.t,
        cutoff: ctx.cfg.cutoff.unwrap_or(DEFAULT_CUTOFF),
        tol: ctx.tol,
    };
    Ok(sweep(&ctx.model, &grid, &opts)?)
}

/// Rows that failed only because of the validity condition make the run a
/// validity failure; any other failure of every row is a numerical failure.
fn row_status(rows: &[SplittingPoint]) -> Result<(), CliError> {
    let failed: Vec<&str> = rows.iter().filter_map(|r| r.error.as_deref()).collect();
    if !rows.is_empty() && failed.len() == rows.len() {
        if failed.iter().all(|c| *c == "ValidityViolation") {
            return Err(CliError::Run(Error::ValidityViolation("every row violates the validity condition".into())));
        }
        return Err(CliError::Run(Error::Numerical(format!("every row failed ({})", failed[0]))));
    }
    Ok(())
}

fn series_key(r: &SplittingPoint) -> String {
    match r.variant {
        Some(_) => format!("{}/{}", source_name(r.source), variant_name(r.variant)),
        None => source_name(r.source).to_string(),
    }
}

fn slopes(rows: &[SplittingPoint]) -> BTreeMap<String, Option<f64>> {
    let mut by: BTreeMap<String, Vec<SplittingPoint>> = BTreeMap::new();
    for r in rows {
        by.entry(series_key(r)).or_default().push(r.clone());
    }
    by.into_iter().map(|(k, v)| (k, fitted_slope(&v))).collect()
}

pub fn splitting_cmd(ctx: &Context) -> Result<String, CliError> {
    let sources = if ctx.cfg.sources.is_empty() { vec![Source::Semiclassical] } else { ctx.cfg.sources.clone() };
    let rows = sweep_rows(ctx, sources)?;
    write_splitting_csv(&ctx.path("splitting.csv"), &rows)?;
    let mut s = String::new();
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    let flagged = rows.iter().filter(|r| r.resonance).count();
    writeln!(s, "rows: {}, failed: {errors}, resonance-flagged: {flagged}", rows.len()).unwrap();
    for (k, v) in slopes(&rows) {
        writeln!(s, "slope {k}: {}", v.map(num).unwrap_or_else(|| "-".into())).unwrap();
    }
    let mut extra = BTreeMap::new();
    extra.insert("rows", serde_json::json!(rows.len()));
    extra.insert("failed_rows", serde_json::json!(errors));
    ctx.manifest(&["splitting.csv"], extra)?;
    row_status(&rows)?;
    Ok(s)
}

pub fn quantum_cmd(ctx: &Context) -> Result<String, CliError> {
    let hbar = ctx
        .cfg
        .single_hbar()
        .ok_or_else(|| CliError::Config("quantum needs hbar or hbar_grid".into()))?;
    let size = ctx.cfg.basis_size.unwrap_or(DEFAULT_BASIS);
    let spec = diagonalize(&ctx.model, hbar, size)?;
    let levels = spec.levels();
    write_spectrum_csv(&ctx.path("spectrum.csv"), &levels)?;
    let mut s = String::new();
    writeln!(s, "hbar: {}", num(hbar)).unwrap();
    writeln!(s, "basis: {:?}, size {}", spec.basis, spec.basis_size).unwrap();
    writeln!(s, "levels: {}", levels.len()).unwrap();
    writeln!(s, "convergence_estimate: {}", num(spec.convergence_estimate)).unwrap();
    let target = ctx.energy()?;
    match splitting_at_energy(&spec, target) {
        Ok(p) => writeln!(s, "doublet near {}: energy {}, delta_E {}, sign {}", num(target), num(p.energy), num(p.delta_e), p.sign_flag)
            .unwrap(),
        Err(e) => writeln!(s, "doublet near {}: {e}", num(target)).unwrap(),
    }
    let mut extra = BTreeMap::new();
    extra.insert("hbar", serde_json::json!(hbar));
    extra.insert("basis_kind", serde_json::json!(spec.basis));
    extra.insert("basis_size", serde_json::json!(spec.basis_size));
    extra.insert("convergence_estimate", serde_json::json!(spec.convergence_estimate));
    ctx.manifest(&["spectrum.csv"], extra)?;
    Ok(s)
}

pub fn compare_cmd(ctx: &Context) -> Result<String, CliError> {
    let mut sources = vec![Source::Semiclassical, Source::Exact];
    for s in &ctx.cfg.sources {
        if !sources.contains(s) {
            sources.push(*s);
        }
    }
    let rows = sweep_rows(ctx, sources)?;
    write_splitting_csv(&ctx.path("compare.csv"), &rows)?;
    let mut s = String::new();
    writeln!(s, "series slopes (d ln dE / d(1/hbar)):").unwrap();
    for (k, v) in slopes(&rows) {
        writeln!(s, "  {k}: {}", v.map(num).unwrap_or_else(|| "-".into())).unwrap();
    }
    // exact over semiclassical, point by point, per semiclassical series
    let mut ratios: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for chunk in rows.chunk_by(|a, b| a.inv_hbar == b.inv_hbar) {
        let exact = chunk.iter().find(|r| r.source == Source::Exact && r.error.is_none());
        for sc in chunk.iter().filter(|r| r.source == Source::Semiclassical && r.error.is_none()) {
            if let Some(ex) = exact {
                ratios.entry(series_key(sc)).or_default().push((ex.ln_delta_e - sc.ln_delta_e).exp());
            }
        }
    }
    writeln!(s, "exact / semiclassical:").unwrap();
    for (k, mut v) in ratios {
        v.sort_by(|a, b| a.total_cmp(b));
        let med = v[v.len() / 2];
        writeln!(s, "  {k}: min {} median {} max {} over {}", num(v[0]), num(med), num(v[v.len() - 1]), v.len()).unwrap();
    }
    std::fs::write(ctx.path("compare.txt"), &s)?;
    let mut extra = BTreeMap::new();
    extra.insert("rows", serde_json::json!(rows.len()));
    ctx.manifest(&["compare.csv", "compare.txt"], extra)?;
    row_status(&rows)?;
    Ok(s)
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    RunConfig::load(path).map_err(|e| CliError::Config(e.0))
}
