//! JSON and CSV file formats, and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use heiskakeya_core::dimest::DimEstimate;
use heiskakeya_core::experiments::CoareaResult;
use heiskakeya_core::setgen::IfsSpec;
use heiskakeya_core::CodeFamily;
use serde::{Deserialize, Serialize};

/// Headline of a dimension estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub metric: String,
    pub label: String,
    pub seed: u64,
}

impl DimSummary {
    pub fn new(est: &DimEstimate, label: &str, seed: u64) -> Self {
        DimSummary {
            slope: est.slope,
            intercept: est.intercept,
            r2: est.r2,
            metric: est.metric.name().to_owned(),
            label: label.to_owned(),
            seed,
        }
    }
}

/// `delta,count,log2_inv_delta,log2_count`, one row per scale.
pub fn dim_csv(est: &DimEstimate) -> String {
    let mut out = String::from("delta,count,log2_inv_delta,log2_count\n");
    for (d, c) in est.deltas.iter().zip(&est.counts) {
        let _ = writeln!(out, "{d},{c},{},{}", -d.log2(), (*c as f64).log2());
    }
    out
}

/// `param,slope,r2,n_counts`, one row per angle or section.
pub fn param_csv<'a>(rows: impl IntoIterator<Item = (f64, &'a DimEstimate)>) -> String {
    let mut out = String::from("param,slope,r2,n_counts\n");
    for (p, est) in rows {
        let _ = writeln!(out, "{p},{},{},{}", est.slope, est.r2, est.counts.len());
    }
    out
}

/// `delta,alpha,lhs,rhs,ratio,bulk_count`, one row per scale.
pub fn coarea_csv(rows: &[CoareaResult]) -> String {
    let mut out = String::from("delta,alpha,lhs,rhs,ratio,bulk_count\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.delta, r.alpha, r.lhs, r.rhs, r.ratio(), r.bulk_count);
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

/// `path` with its extension replaced.
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Inline JSON when the text starts with `{`, otherwise a file path.
fn json_source(src: &str) -> Result<(String, String)> {
    let t = src.trim_start();
    if t.starts_with('{') {
        Ok((t.to_owned(), "inline JSON".to_owned()))
    } else {
        let text = fs::read_to_string(src).with_context(|| format!("reading {src}"))?;
        Ok((text, src.to_owned()))
    }
}

pub fn parse_family(text: &str) -> Result<CodeFamily> {
    Ok(serde_json::from_str(text)?)
}

/// A code family from a file path or inline JSON.
pub fn load_family(src: &str) -> Result<CodeFamily> {
    let (text, origin) = json_source(src)?;
    parse_family(&text).with_context(|| format!("parsing code family from {origin}"))
}

/// An IFS from a preset name (`CANTOR2`, `CANTOR4`), a file path or inline JSON.
pub fn load_ifs(src: &str) -> Result<IfsSpec> {
    if let Some(spec) = IfsSpec::preset(src) {
        return Ok(spec);
    }
    let (text, origin) = json_source(src)?;
    let spec: IfsSpec = serde_json::from_str(&text).with_context(|| format!("parsing IFS from {origin}"))?;
    spec.validate().with_context(|| format!("invalid IFS from {origin}"))?;
    Ok(spec)
}
