//! The anonymization grid pipeline: one cell per (method, k), each producing
//! a published edge list, a private provenance sidecar and the report files.

use std::path::Path;

use graphanon::anonymize::{
    anonymize_clustering, anonymize_modification, build_context, verify_k_anonymity,
    AnonymizedGraph, Method, Provenance,
};
use graphanon::evaluate::{
    leak_estimate, loss_report, risk_report, LossReport, QueryId, RiskReport,
};
use graphanon::similarity::{load_weights, save_weights, train_weights, DistanceWeights, SaConfig};
use graphanon::{Graph, GraphError, Result};

use crate::config::RunConfig;

/// Reduced annealing schedule used when a run has to train weights inline;
/// `graphanon train` exposes the full schedule.
fn inline_sa_config() -> SaConfig {
    SaConfig {
        epochs: 20,
        proposals_per_epoch: 10,
        candidate_pool: 200,
        ..SaConfig::default()
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Private sidecar: method/k/seed header plus one `id: member,...` line per
/// supernode or equivalence class.
pub fn provenance_text(a: &AnonymizedGraph, seed: u64) -> String {
    let kind = match &a.provenance {
        Provenance::Supernodes(_) => "supernodes",
        Provenance::Classes(_) => "classes",
    };
    let mut s = format!(
        "# graphanon provenance method={} k={} seed={} kind={} original_nodes={} published_nodes={}\n",
        a.method, a.k, seed, kind, a.original_count, a.published.node_count()
    );
    if !a.excluded.is_empty() {
        let ids: Vec<String> = a.excluded.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("excluded: {}\n", ids.join(",")));
    }
    match &a.provenance {
        Provenance::Supernodes(supers) => {
            for sn in supers {
                let ids: Vec<String> = sn.contents.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!("{}: {}\n", sn.id, ids.join(",")));
            }
        }
        Provenance::Classes(classes) => {
            for (ci, class) in classes.iter().enumerate() {
                let ids: Vec<String> = class.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!("{}: {}\n", ci, ids.join(",")));
            }
        }
    }
    s
}

/// Rebuild the minimal AnonymizedGraph the risk evaluator needs from a
/// published graph plus its provenance sidecar.
pub fn parse_provenance(text: &str, published: Graph) -> Result<AnonymizedGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| GraphError::Parse {
        line: 1,
        msg: "empty provenance file".into(),
    })?;
    let mut method = None;
    let mut k = None;
    let mut kind = None;
    let mut original_nodes = None;
    let mut published_nodes = None;
    for token in header.trim_start_matches('#').split_whitespace() {
        if let Some((key, value)) = token.split_once('=') {
            match key {
                "method" => method = Some(Method::parse(value)?),
                "k" => k = value.parse().ok(),
                "kind" => kind = Some(value.to_string()),
                "original_nodes" => original_nodes = value.parse().ok(),
                "published_nodes" => published_nodes = value.parse().ok(),
                _ => {}
            }
        }
    }
    let (Some(method), Some(k), Some(kind), Some(original_count), Some(published_count)) =
        (method, k, kind, original_nodes, published_nodes)
    else {
        return Err(GraphError::Parse {
            line: 1,
            msg: "provenance header must carry method, k, kind, original_nodes, published_nodes"
                .into(),
        });
    };
    // the edge-list loader assigns dense ids by first appearance and cannot
    // represent isolated nodes; rebuild the published graph on its numeric
    // labels so the group ids below line up
    let published = {
        let mut edges = Vec::with_capacity(published.edge_count());
        for (u, v) in published.edges() {
            let iu: usize = published.label(u).parse().map_err(|_| GraphError::Parse {
                line: 1,
                msg: format!("published node label {:?} is not an id", published.label(u)),
            })?;
            let iv: usize = published.label(v).parse().map_err(|_| GraphError::Parse {
                line: 1,
                msg: format!("published node label {:?} is not an id", published.label(v)),
            })?;
            if iu >= published_count || iv >= published_count {
                return Err(GraphError::Parse {
                    line: 1,
                    msg: format!(
                        "published node id {} out of range (published_nodes={published_count})",
                        iu.max(iv)
                    ),
                });
            }
            edges.push((iu, iv));
        }
        Graph::from_edges(published_count, &edges)
    };
    let mut excluded = Vec::new();
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, tail) = line.split_once(':').ok_or_else(|| GraphError::Parse {
            line: idx + 1,
            msg: format!("expected `id: members`, got {line:?}"),
        })?;
        let members: Vec<usize> = tail
            .split(',')
            .map(|t| t.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| GraphError::Parse {
                line: idx + 1,
                msg: format!("bad member list: {e}"),
            })?;
        if head.trim() == "excluded" {
            excluded = members;
        } else {
            let id = head.trim().parse().map_err(|e| GraphError::Parse {
                line: idx + 1,
                msg: format!("bad group id: {e}"),
            })?;
            groups.push((id, members));
        }
    }
    let provenance = match kind.as_str() {
        "supernodes" => Provenance::Supernodes(
            groups
                .into_iter()
                .map(|(id, contents)| graphanon::graph::Supernode { id, contents })
                .collect(),
        ),
        "classes" => Provenance::Classes(groups.into_iter().map(|(_, m)| m).collect()),
        other => {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("unknown provenance kind {other:?}"),
            })
        }
    };
    Ok(AnonymizedGraph {
        published,
        method,
        k,
        provenance,
        excluded,
        node_map: Vec::new(),
        original_count,
    })
}

pub fn loss_csv(loss: &LossReport) -> String {
    let mut s = String::from("method,k,metric,value\n");
    for (name, value) in graphanon::evaluate::LOSS_METRICS
        .iter()
        .zip(loss.metric_values())
    {
        s.push_str(&format!("{},{},{},{}\n", loss.method, loss.k, name, value));
    }
    s
}

pub fn risk_csv(risks: &[RiskReport]) -> String {
    let mut s = String::from("method,k,query,bucket,fraction\n");
    for r in risks {
        for (label, fraction) in r.query.bucket_labels().iter().zip(r.fractions) {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.method, r.k, r.query, label, fraction
            ));
        }
    }
    s
}

struct CellOutcome {
    method: Method,
    k: usize,
    verified: bool,
    error: Option<String>,
    report: serde_json::Value,
}

fn run_cell(
    g: &Graph,
    cfg: &RunConfig,
    w: &DistanceWeights,
    weights_text: &str,
    method: Method,
    k: usize,
) -> Result<(bool, serde_json::Value)> {
    let cell_dir = cfg.out.join(format!("{method}_k{k}"));
    mkdir(&cell_dir)?;
    mkdir(&cell_dir.join(".private"))?;

    let ctx = build_context(g, k, cfg.seed, cfg.hub_pct, cfg.bridge_pct, w)?;
    let a = if method.is_clustering() {
        anonymize_clustering(g, k, method.strategy(), &ctx, w)?
    } else {
        anonymize_modification(g, k, method.strategy(), &ctx, w)?
    };

    let audit = verify_k_anonymity(&a);
    let mut verify_text = if audit.passed {
        String::from("pass\n")
    } else {
        String::from("fail\n")
    };
    for v in &audit.violations {
        verify_text.push_str(v);
        verify_text.push('\n');
    }

    let loss = loss_report(g, &a.published, method.name(), k, cfg.seed)?;
    let risks: Vec<RiskReport> = QueryId::ALL
        .iter()
        .map(|&q| risk_report(&a, q))
        .collect::<Result<_>>()?;
    let leak = leak_estimate(&ctx, g);

    a.published
        .write_edge_list(&cell_dir.join("published.txt"))?;
    write(
        &cell_dir.join(".private").join("provenance.txt"),
        &provenance_text(&a, cfg.seed),
    )?;
    write(&cell_dir.join("loss.csv"), &loss_csv(&loss))?;
    write(&cell_dir.join("risk.csv"), &risk_csv(&risks))?;
    write(&cell_dir.join("verify.txt"), &verify_text)?;
    write(&cell_dir.join("config.txt"), &cfg.snapshot())?;
    write(&cell_dir.join("weights.txt"), weights_text)?;

    let risk_json: serde_json::Value = risks
        .iter()
        .map(|r| {
            let buckets: serde_json::Map<String, serde_json::Value> = r
                .query
                .bucket_labels()
                .iter()
                .zip(r.fractions)
                .map(|(l, f)| (l.to_string(), f.into()))
                .collect();
            (
                r.query.name().to_string(),
                serde_json::Value::Object(buckets),
            )
        })
        .collect::<serde_json::Map<_, _>>()
        .into();
    let report = serde_json::json!({
        "method": method.name(),
        "k": k,
        "seed": cfg.seed,
        "verified": audit.passed,
        "violations": audit.violations,
        "loss": serde_json::to_value(&loss).expect("loss serializes"),
        "risk": risk_json,
        "leak": serde_json::to_value(&leak).expect("leak serializes"),
        "excluded_nodes": a.excluded.len(),
        "published_nodes": a.published.node_count(),
        "published_edges": a.published.edge_count(),
    });
    write(&cell_dir.join("report.json"), &format!("{:#}\n", report))?;
    Ok((audit.passed, report))
}

/// Run the full grid. Ok(true) when every cell ran and verified; Ok(false)
/// when any cell failed verification or errored (the grid still completes).
pub fn cmd_run(cfg: &RunConfig) -> Result<bool> {
    cfg.validate()?;
    let g = Graph::load_edge_list(&cfg.dataset)?;
    if g.node_count() == 0 {
        return Err(GraphError::Config(format!(
            "dataset {} is empty",
            cfg.dataset.display()
        )));
    }
    mkdir(&cfg.out)?;

    let weights = match &cfg.weights {
        Some(path) => load_weights(path, &g)?,
        None => {
            let sample = cfg.sample_size.min(g.node_count());
            if sample >= 2 && g.node_count() >= 4 {
                train_weights(&g, sample, &inline_sa_config(), cfg.seed)?.weights
            } else {
                DistanceWeights::uniform()
            }
        }
    };
    let weights_path = cfg.out.join("weights.txt");
    save_weights(&weights_path, &weights, &g)?;
    let weights_text = std::fs::read_to_string(&weights_path).map_err(|e| GraphError::Io {
        path: weights_path.display().to_string(),
        source: e,
    })?;
    write(&cfg.out.join("config.txt"), &cfg.snapshot())?;

    let mut outcomes: Vec<CellOutcome> = Vec::new();
    for &method in &cfg.methods {
        for &k in &cfg.k_grid {
            match run_cell(&g, cfg, &weights, &weights_text, method, k) {
                Ok((verified, report)) => outcomes.push(CellOutcome {
                    method,
                    k,
                    verified,
                    error: None,
                    report,
                }),
                Err(e) => outcomes.push(CellOutcome {
                    method,
                    k,
                    verified: false,
                    error: Some(e.to_string()),
                    report: serde_json::json!({
                        "method": method.name(),
                        "k": k,
                        "error": e.to_string(),
                    }),
                }),
            }
        }
    }

    let mut summary = String::from("method\tk\tstatus\n");
    for o in &outcomes {
        let status = match (&o.error, o.verified) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => "ok".to_string(),
            (None, false) => "verify-failed".to_string(),
        };
        summary.push_str(&format!("{}\t{}\t{}\n", o.method, o.k, status));
    }
    write(&cfg.out.join("summary.txt"), &summary)?;
    print!("{summary}");

    let run_report = serde_json::json!({
        "dataset": cfg.dataset.display().to_string(),
        "seed": cfg.seed,
        "weights_fingerprint": format!("{:016x}", g.fingerprint()),
        "version": env!("CARGO_PKG_VERSION"),
        "cells": outcomes.iter().map(|o| o.report.clone()).collect::<Vec<_>>(),
    });
    write(&cfg.out.join("report.json"), &format!("{:#}\n", run_report))?;

    Ok(outcomes.iter().all(|o| o.error.is_none() && o.verified))
}
