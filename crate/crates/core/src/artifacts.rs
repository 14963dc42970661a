//! Files a run emits: CSV series and tables, the JSON report, per-snapshot
//! graph JSON and SVG, and a manifest hashing all of them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::growth::{hex_digest, FiberGraph};
use crate::protocols::{ExperimentScript, Format, Report, Table};
use crate::render::{render_svg, SvgStyle};
use crate::script::serialize_script;

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub kind: &'static str,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(path: impl Into<String>, kind: &'static str, text: String) -> Self {
        Artifact { path: path.into(), kind, bytes: text.into_bytes() }
    }

    pub fn sha256(&self) -> String {
        hex_digest(&self.bytes)
    }
}

/// Integers print bare, NaN as `NaN`, everything else as `d.ddddddddde±x`.
pub fn csv_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.9e}")
    }
}

/// RFC 4180 text of `rows`, CRLF-terminated.
pub fn csv_text<R, F>(rows: impl IntoIterator<Item = R>) -> Result<String>
where
    R: IntoIterator<Item = F>,
    F: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).flexible(true).from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn table_csv(t: &Table) -> Result<String> {
    let head = std::iter::once(t.columns.clone());
    csv_text(head.chain(t.rows.iter().map(|r| r.iter().map(|&v| csv_number(v)).collect())))
}

/// Same-named per-seed tables stacked under a leading `seed` column.
fn stacked_csv(report: &Report, name: &str) -> Result<String> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    for run in &report.runs {
        let Some(t) = run.series(name) else { continue };
        if rows.is_empty() {
            rows.push(std::iter::once("seed".to_string()).chain(t.columns.iter().cloned()).collect());
        }
        for r in &t.rows {
            rows.push(std::iter::once(run.seed.to_string()).chain(r.iter().map(|&v| csv_number(v))).collect());
        }
    }
    csv_text(rows)
}

fn file_label(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn snapshot_stem(seed: u64, k: usize, label: &str) -> String {
    format!("snapshots/seed{seed}_{k:02}_{}", file_label(label))
}

/// Every artifact of `report` in the requested formats, in a fixed order.
pub fn build(report: &Report, script: &ExperimentScript, formats: &[Format], style: &SvgStyle) -> Result<Vec<Artifact>> {
    let mut out = vec![Artifact::new("script.exp", "script", serialize_script(script))];
    if formats.contains(&Format::Csv) {
        let mut names: Vec<&str> = Vec::new();
        for run in &report.runs {
            for t in &run.series {
                if !names.contains(&t.name.as_str()) {
                    names.push(&t.name);
                }
            }
        }
        for name in names {
            out.push(Artifact::new(format!("series/{}.csv", file_label(name)), "series", stacked_csv(report, name)?));
        }
        for t in &report.tables {
            out.push(Artifact::new(format!("tables/{}.csv", file_label(&t.name)), "table", table_csv(t)?));
        }
        let mut m = vec![["scope", "metric", "value"].map(String::from)];
        for (k, v) in &report.metrics {
            m.push(["ensemble".to_string(), k.clone(), csv_number(*v)]);
        }
        for run in &report.runs {
            for (k, v) in &run.metrics {
                m.push([format!("seed {}", run.seed), k.clone(), csv_number(*v)]);
            }
        }
        out.push(Artifact::new("metrics.csv", "metrics", csv_text(m)?));
        let mut c = vec![["criterion", "value", "passed"].map(String::from)];
        for r in &report.criteria {
            c.push([r.criterion.clone(), r.value.map_or(String::new(), csv_number), r.passed.to_string()]);
        }
        out.push(Artifact::new("criteria.csv", "criteria", csv_text(c)?));
    }
    if formats.contains(&Format::Json) {
        // graphs go to their own files
        let mut lean = report.clone();
        for run in &mut lean.runs {
            for s in &mut run.snapshots {
                s.graph = None;
            }
        }
        out.push(Artifact::new("report.json", "report", pretty(&lean)?));
    }
    for run in &report.runs {
        for (k, snap) in run.snapshots.iter().enumerate() {
            let Some(graph) = &snap.graph else { continue };
            let stem = snapshot_stem(run.seed, k, &snap.label);
            if formats.contains(&Format::Json) {
                out.push(Artifact::new(format!("{stem}.json"), "snapshot", pretty(graph)?));
            }
            if formats.contains(&Format::Svg) {
                let (domain, g) = FiberGraph::from_json(graph)?;
                out.push(Artifact::new(format!("{stem}.svg"), "snapshot", render_svg(&g, &domain, style)));
            }
        }
    }
    Ok(out)
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Manifest text: run summary, every snapshot's hash, and every artifact
/// with its SHA-256.
pub fn manifest(report: &Report, artifacts: &[Artifact]) -> Result<String> {
    let mut snaps = Vec::new();
    for run in &report.runs {
        for (k, s) in run.snapshots.iter().enumerate() {
            let files: Vec<String> = match &s.graph {
                Some(_) => {
                    let stem = snapshot_stem(run.seed, k, &s.label);
                    [format!("{stem}.json"), format!("{stem}.svg")]
                        .into_iter()
                        .filter(|p| artifacts.iter().any(|a| &a.path == p))
                        .collect()
                }
                None => Vec::new(),
            };
            snaps.push(json!({
                "seed": run.seed,
                "label": s.label,
                "t_s": s.t,
                "cycle": s.cycle,
                "graph_sha256": s.hash,
                "files": files,
            }));
        }
    }
    let files: Vec<_> = artifacts
        .iter()
        .map(|a| json!({ "path": a.path, "kind": a.kind, "bytes": a.bytes.len(), "sha256": a.sha256() }))
        .collect();
    pretty(&json!({
        "schema": 1,
        "experiment": report.experiment,
        "protocol": report.protocol,
        "script_hash": report.script_hash,
        "report_hash": report.hash(),
        "seeds": report.seeds,
        "passed": report.passed(),
        "failed_seeds": report.runs.iter().filter(|r| r.failed).map(|r| r.seed).collect::<Vec<_>>(),
        "criteria": report.criteria,
        "snapshots": snaps,
        "artifacts": files,
    }))
}

/// Writes the artifacts and then `manifest.json` under `dir`. On any
/// failure everything this call created is removed again.
pub fn write_all(dir: &Path, artifacts: &[Artifact], manifest_text: &str) -> Result<()> {
    let mut created_dirs: Vec<PathBuf> = Vec::new();
    let mut created_files: Vec<PathBuf> = Vec::new();
    let mkdir = |p: &Path, created: &mut Vec<PathBuf>| -> Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(p);
        while let Some(c) = cur {
            if c.as_os_str().is_empty() || c.exists() {
                break;
            }
            missing.push(c.to_path_buf());
            cur = c.parent();
        }
        for m in missing.into_iter().rev() {
            fs::create_dir(&m).map_err(|e| Error::Io(format!("{}: {e}", m.display())))?;
            created.push(m);
        }
        Ok(())
    };
    let result = (|| -> Result<()> {
        mkdir(dir, &mut created_dirs)?;
        let all = artifacts.iter().map(|a| (a.path.as_str(), a.bytes.as_slice())).chain([("manifest.json", manifest_text.as_bytes())]);
        for (rel, bytes) in all {
            let p = dir.join(rel);
            if let Some(parent) = p.parent() {
                mkdir(parent, &mut created_dirs)?;
            }
            let existed = p.exists();
            fs::write(&p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            if !existed {
                created_files.push(p);
            }
        }
        Ok(())
    })();
    if result.is_err() {
        for f in created_files.iter().rev() {
            let _ = fs::remove_file(f);
        }
        for d in created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_quoting() {
        assert_eq!(csv_number(3.0), "3");
        assert_eq!(csv_number(-0.0), "0");
        assert_eq!(csv_number(0.25), "2.500000000e-1");
        assert_eq!(csv_number(1.5e-9), "1.500000000e-9");
        assert_eq!(csv_number(f64::NAN), "NaN");
        assert_eq!(csv_text([["a,b", "say \"hi\"", "plain"]]).unwrap(), "\"a,b\",\"say \"\"hi\"\"\",plain\r\n");
        let mut t = Table::new("x", &["t_s", "g, S"]);
        t.push(vec![0.0, 0.5]);
        assert_eq!(table_csv(&t).unwrap(), "t_s,\"g, S\"\r\n0,5.000000000e-1\r\n");
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let base = std::env::temp_dir().join(format!("fdp-artifacts-{}", std::process::id()));
        let _ = fs::remove_dir_all(&base);
        fs::create_dir_all(&base).unwrap();
        // the second path needs a directory where the first wrote a file
        let arts = vec![
            Artifact::new("a.csv", "series", "1\r\n".into()),
            Artifact::new("a.csv/b.csv", "series", "2\r\n".into()),
        ];
        let out = base.join("out");
        assert!(write_all(&out, &arts, "{}").is_err());
        assert!(!out.exists());
        let arts = vec![Artifact::new("a.csv", "series", "1\r\n".into())];
        write_all(&out, &arts, "{}").unwrap();
        assert_eq!(fs::read(out.join("a.csv")).unwrap(), b"1\r\n");
        assert!(out.join("manifest.json").exists());
        fs::remove_dir_all(&base).unwrap();
    }
}
