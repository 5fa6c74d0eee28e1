//! Merges several traces of the same problem into one CSV keyed by `t`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use super::tracefile::TraceFile;
use crate::{Error, Result};

fn problem_identity(file: &TraceFile) -> BTreeMap<&str, &str> {
    file.summary
        .config
        .iter()
        .filter(|(k, _)| k.starts_with("problem."))
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect()
}

/// Merged CSV with a `t` column and one `<label>.<column>` group per trace.
/// Labels are the algorithm names, suffixed `#2`, `#3`, ... on repeats.
pub fn compare_traces(files: &[TraceFile]) -> Result<String> {
    if files.len() < 2 {
        return Err(Error::Precondition(format!(
            "comparison needs at least two traces, got {}",
            files.len()
        )));
    }
    let reference = problem_identity(&files[0]);
    for f in &files[1..] {
        let other = problem_identity(f);
        if other != reference {
            return Err(Error::MismatchedProblem(format!("{reference:?} vs {other:?}")));
        }
    }

    let mut labels = Vec::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for f in files {
        let c = counts.entry(f.summary.algorithm.as_str()).or_insert(0);
        *c += 1;
        labels.push(if *c == 1 {
            f.summary.algorithm.clone()
        } else {
            format!("{}#{}", f.summary.algorithm, c)
        });
    }

    let mut header = vec!["t".to_string()];
    let mut by_t: Vec<BTreeMap<u64, &Vec<Option<f64>>>> = Vec::new();
    let mut all_t = BTreeSet::new();
    for (f, label) in files.iter().zip(&labels) {
        let t_idx = f
            .table
            .columns
            .iter()
            .position(|c| c == "t")
            .ok_or_else(|| Error::InvalidConfig("trace has no 't' column".into()))?;
        for c in f.table.columns.iter().filter(|c| *c != "t") {
            header.push(format!("{label}.{c}"));
        }
        let mut rows = BTreeMap::new();
        for r in &f.table.rows {
            let t = r[t_idx].ok_or_else(|| Error::InvalidConfig("blank iteration index".into()))? as u64;
            all_t.insert(t);
            rows.insert(t, r);
        }
        by_t.push(rows);
    }

    let mut out = header.join(",");
    out.push('\n');
    for t in all_t {
        let mut fields = vec![t.to_string()];
        for (f, rows) in files.iter().zip(&by_t) {
            let width = f.table.columns.len();
            match rows.get(&t) {
                Some(r) => {
                    for (c, v) in f.table.columns.iter().zip(r.iter()) {
                        if c != "t" {
                            fields.push(v.map(|x| format!("{x:.16e}")).unwrap_or_default());
                        }
                    }
                }
                None => fields.extend(std::iter::repeat_n(String::new(), width - 1)),
            }
        }
        let _ = writeln!(out, "{}", fields.join(","));
    }
    Ok(out)
}

/// Reads the traces at `inputs` and writes the merged CSV to `out`.
pub fn compare_runs(inputs: &[&Path], out: &Path) -> Result<()> {
    let files = inputs.iter().map(|p| TraceFile::read(p)).collect::<Result<Vec<_>>>()?;
    let merged = compare_traces(&files)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(out, merged)?;
    Ok(())
}
