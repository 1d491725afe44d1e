//! Relative-performance tables over a completed run directory: methods are
//! ranked per metric and per k (lower loss is better, ties share the better
//! rank), then averaged.

use std::collections::BTreeMap;
use std::path::Path;

use graphanon::evaluate::LOSS_METRICS;
use graphanon::{GraphError, Result};

#[derive(Debug, Clone)]
struct Cell {
    method: String,
    k: usize,
    losses: BTreeMap<String, f64>,
}

fn read_cells(dir: &Path) -> Result<Vec<Cell>> {
    let entries = std::fs::read_dir(dir).map_err(|e| GraphError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut cells = Vec::new();
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    paths.sort();
    for p in paths {
        let report = p.join("report.json");
        if !report.is_file() {
            continue;
        }
        let text = std::fs::read_to_string(&report).map_err(|e| GraphError::Io {
            path: report.display().to_string(),
            source: e,
        })?;
        let json: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| GraphError::Parse {
                line: 0,
                msg: format!("{}: {e}", report.display()),
            })?;
        let (Some(method), Some(k)) = (
            json.get("method").and_then(|v| v.as_str()),
            json.get("k").and_then(|v| v.as_u64()),
        ) else {
            continue;
        };
        let Some(loss) = json.get("loss") else {
            continue; // errored cell: participates as a gap
        };
        let mut losses = BTreeMap::new();
        for &metric in &LOSS_METRICS {
            if let Some(v) = loss.get(metric).and_then(|v| v.as_f64()) {
                losses.insert(metric.to_string(), v);
            }
        }
        cells.push(Cell {
            method: method.to_string(),
            k: k as usize,
            losses,
        });
    }
    Ok(cells)
}

/// Competition rank of each value (1 = best/lowest); equal values share the
/// better rank.
fn ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|&v| 1 + values.iter().filter(|&&o| o < v).count())
        .collect()
}

pub fn cmd_rank(dir: &Path) -> Result<String> {
    let cells = read_cells(dir)?;
    if cells.is_empty() {
        return Err(GraphError::Config(format!(
            "no cell reports found under {}",
            dir.display()
        )));
    }
    let mut methods: Vec<String> = cells.iter().map(|c| c.method.clone()).collect();
    methods.sort();
    methods.dedup();
    let mut ks: Vec<usize> = cells.iter().map(|c| c.k).collect();
    ks.sort_unstable();
    ks.dedup();

    // rank_sum[method][metric] -> (sum of ranks, contests entered)
    let mut rank_sum: BTreeMap<&str, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    let mut firsts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut gaps: Vec<String> = Vec::new();

    for &metric in &LOSS_METRICS {
        for &k in &ks {
            let mut present: Vec<(&str, f64)> = Vec::new();
            for m in &methods {
                match cells
                    .iter()
                    .find(|c| c.method == *m && c.k == k)
                    .and_then(|c| c.losses.get(metric))
                {
                    Some(&v) => present.push((m.as_str(), v)),
                    None => {
                        let gap = format!("{m} k={k}");
                        if !gaps.contains(&gap) {
                            gaps.push(gap);
                        }
                    }
                }
            }
            if present.is_empty() {
                continue;
            }
            let values: Vec<f64> = present.iter().map(|&(_, v)| v).collect();
            let rs = ranks(&values);
            for ((m, _), r) in present.iter().zip(&rs) {
                let entry = rank_sum
                    .entry(m)
                    .or_default()
                    .entry(metric)
                    .or_insert((0.0, 0));
                entry.0 += *r as f64;
                entry.1 += 1;
                if *r == 1 {
                    *firsts.entry(m).or_insert(0) += 1;
                }
            }
        }
    }

    let mut out = String::new();
    out.push_str("mean rank per metric (lower is better)\n");
    out.push_str("method");
    for &metric in &LOSS_METRICS {
        out.push_str(&format!("\t{metric}"));
    }
    out.push_str("\tmean\n");
    for m in &methods {
        out.push_str(m);
        let mut total = 0.0;
        let mut count = 0usize;
        for &metric in &LOSS_METRICS {
            match rank_sum.get(m.as_str()).and_then(|row| row.get(metric)) {
                Some(&(sum, n)) if n > 0 => {
                    let mean = sum / n as f64;
                    total += sum;
                    count += n;
                    out.push_str(&format!("\t{mean:.2}"));
                }
                _ => out.push_str("\t-"),
            }
        }
        if count > 0 {
            out.push_str(&format!("\t{:.2}\n", total / count as f64));
        } else {
            out.push_str("\t-\n");
        }
    }
    out.push_str("\ntimes ranked first (ties both score)\n");
    for m in &methods {
        out.push_str(&format!(
            "{m}\t{}\n",
            firsts.get(m.as_str()).copied().unwrap_or(0)
        ));
    }
    if !gaps.is_empty() {
        out.push_str("\nincomplete grid, missing cells:\n");
        for gap in gaps {
            out.push_str(&format!("  {gap}\n"));
        }
    }
    Ok(out)
}
