use serde::Serialize;
use std::io;
use std::path::Path;
use tunnelsplit::semicl::{Source, SplittingPoint, Variant};

/// 17 significant digits, round-trip exact.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn source_name(s: Source) -> &'static str {
    match s {
        Source::Semiclassical => "semiclassical",
        Source::Exact => "exact",
        Source::TraceRatio => "trace_ratio",
    }
}

pub fn variant_name(v: Option<Variant>) -> &'static str {
    match v {
        Some(Variant::Red) => "red",
        Some(Variant::Blue) => "blue",
        None => "",
    }
}

pub const SPLITTING_HEADER: [&str; 7] = ["inv_hbar", "source", "variant", "delta_E", "sign_flag", "error_code", "resonance"];

pub fn write_splitting_csv(path: &Path, rows: &[SplittingPoint]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SPLITTING_HEADER)?;
    for r in rows {
        let de = if r.error.is_some() { "nan".to_string() } else { num(r.delta_e) };
        w.write_record([
            num(r.inv_hbar),
            source_name(r.source).to_string(),
            variant_name(r.variant).to_string(),
            de,
            r.sign_flag.to_string(),
            r.error.clone().unwrap_or_default(),
            u8::from(r.resonance).to_string(),
        ])?;
    }
    w.flush()
}

pub fn write_spectrum_csv(path: &Path, levels: &[(f64, i8)]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "parity", "energy"])?;
    for (k, (e, p)) in levels.iter().enumerate() {
        w.write_record([k.to_string(), p.to_string(), num(*e)])?;
    }
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}
