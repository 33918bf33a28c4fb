//! CSV ingestion and canonical serialization of temporal graphs.
//!
//! * `edges.csv`: `src,dst,t[,attr...]`, one row per edge occurrence.
//! * `nodes.csv`: `node,t,attr,value` (long format). The reserved attribute
//!   `__created__` carries the node's creation timestep in `value`.
//! * `labels.csv`: `node,t,label` for temporal tasks or `node,label` for
//!   static tasks.
//!
//! Lines starting with `#` are ignored.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, Labels, TemporalGraph, Timestep};

pub const CREATED_ATTR: &str = "__created__";

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    pub directed: bool,
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path)?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(file))
}

fn malformed(path: &Path, line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Malformed {
        file: path.display().to_string(),
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    malformed(path, line, "-", err.to_string())
}

fn headers(path: &Path, rdr: &mut csv::Reader<fs::File>) -> Result<Vec<String>> {
    Ok(rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect())
}

fn expect_prefix(path: &Path, got: &[String], want: &[&str]) -> Result<()> {
    if got.len() < want.len() || got.iter().zip(want).any(|(g, w)| g != w) {
        return Err(malformed(
            path,
            1,
            "header",
            format!("expected header starting with `{}`", want.join(",")),
        ));
    }
    Ok(())
}

fn parse_timestep(path: &Path, line: u64, column: &str, s: &str) -> Result<Timestep> {
    s.parse::<Timestep>().map_err(|_| {
        malformed(
            path,
            line,
            column,
            format!("`{s}` is not a non-negative integer timestep"),
        )
    })
}

fn nonempty<'a>(path: &Path, line: u64, column: &str, s: &'a str) -> Result<&'a str> {
    if s.is_empty() {
        Err(malformed(path, line, column, "empty value"))
    } else {
        Ok(s)
    }
}

/// Reads and validates a dataset. The time range is inferred from the
/// observed timesteps.
pub fn ingest_dataset(
    edges_path: &Path,
    nodes_path: &Path,
    labels_path: &Path,
    opts: IngestOptions,
) -> Result<TemporalGraph> {
    let mut b = GraphBuilder::new().directed(opts.directed);

    let mut rdr = reader(nodes_path)?;
    let h = headers(nodes_path, &mut rdr)?;
    expect_prefix(nodes_path, &h, &["node", "t", "attr", "value"])?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(nodes_path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let node = nonempty(nodes_path, line, "node", &rec[0])?;
        let t = parse_timestep(nodes_path, line, "t", &rec[1])?;
        let attr = nonempty(nodes_path, line, "attr", &rec[2])?;
        let value = &rec[3];
        if attr == CREATED_ATTR {
            let created = parse_timestep(nodes_path, line, "value", value)?;
            b.set_creation(node, created);
        } else {
            b.set_attr(node, t, attr, nonempty(nodes_path, line, "value", value)?);
        }
    }

    let mut rdr = reader(edges_path)?;
    let h = headers(edges_path, &mut rdr)?;
    expect_prefix(edges_path, &h, &["src", "dst", "t"])?;
    let attr_names: Vec<String> = h[3..].to_vec();
    let file_name = edges_path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(edges_path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let src = nonempty(edges_path, line, "src", &rec[0])?;
        let dst = nonempty(edges_path, line, "dst", &rec[1])?;
        let t = parse_timestep(edges_path, line, "t", &rec[2])?;
        for (column, name) in [("src", src), ("dst", dst)] {
            if !b.has_node(name) {
                return Err(Error::DanglingEndpoint {
                    location: format!("{file_name}:{line}:{column}: "),
                    src: src.to_string(),
                    dst: dst.to_string(),
                    t,
                    missing: name.to_string(),
                });
            }
        }
        let attrs = attr_names
            .iter()
            .zip(rec.iter().skip(3))
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect();
        b.add_edge_at(src, dst, t, attrs, format!("{file_name}:{line}: "));
    }

    let mut rdr = reader(labels_path)?;
    let h = headers(labels_path, &mut rdr)?;
    let temporal = match h.as_slice() {
        [n, t, l] if n == "node" && t == "t" && l == "label" => true,
        [n, l] if n == "node" && l == "label" => false,
        _ => {
            return Err(malformed(
                labels_path,
                1,
                "header",
                "expected `node,t,label` or `node,label`",
            ))
        }
    };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(labels_path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let node = nonempty(labels_path, line, "node", &rec[0])?;
        if !b.has_node(node) {
            return Err(Error::UnknownNode {
                location: format!("{}:{line}:node: ", labels_path.display()),
                node: node.to_string(),
            });
        }
        if temporal {
            let t = parse_timestep(labels_path, line, "t", &rec[1])?;
            let label = nonempty(labels_path, line, "label", &rec[2])?;
            b.set_label(node, t, label)?;
        } else {
            let label = nonempty(labels_path, line, "label", &rec[1])?;
            b.set_static_label(node, label)?;
        }
    }

    b.build()
}

/// Convenience wrapper reading `edges.csv`, `nodes.csv` and `labels.csv`
/// from one directory.
pub fn ingest_dir(dir: &Path, opts: IngestOptions) -> Result<TemporalGraph> {
    ingest_dataset(
        &dir.join("edges.csv"),
        &dir.join("nodes.csv"),
        &dir.join("labels.csv"),
        opts,
    )
}

/// Canonical CSV text for the three dataset files, in
/// `(edges, nodes, labels)` order.
pub fn serialize_dataset(g: &TemporalGraph) -> (String, String, String) {
    let edge_attr_names: Vec<&str> = g
        .edges()
        .iter()
        .flat_map(|e| e.attrs.iter().map(|(k, _)| k.as_str()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["src", "dst", "t"];
    header.extend(edge_attr_names.iter().copied());
    w.write_record(&header).expect("in-memory write");
    for e in g.edges() {
        let mut row = vec![
            g.node_name(e.src).to_string(),
            g.node_name(e.dst).to_string(),
            e.t.to_string(),
        ];
        for name in &edge_attr_names {
            row.push(
                e.attrs
                    .iter()
                    .find(|(k, _)| k == name)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_default(),
            );
        }
        w.write_record(&row).expect("in-memory write");
    }
    let edges = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");

    let mut rows: Vec<(String, Timestep, String, String)> = Vec::new();
    for v in g.nodes() {
        if let Some(c) = g.creation_time(v) {
            rows.push((
                g.node_name(v).to_string(),
                c,
                CREATED_ATTR.to_string(),
                c.to_string(),
            ));
        }
    }
    for attr in g.attributes() {
        for (&(v, t), &val) in &attr.values {
            rows.push((
                g.node_name(v).to_string(),
                t,
                attr.name.clone(),
                attr.render(val),
            ));
        }
    }
    rows.sort();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "t", "attr", "value"])
        .expect("in-memory write");
    for (n, t, a, v) in rows {
        w.write_record([n, t.to_string(), a, v])
            .expect("in-memory write");
    }
    let nodes = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");

    let mut w = csv::Writer::from_writer(Vec::new());
    match g.labels() {
        Labels::Static(m) => {
            w.write_record(["node", "label"]).expect("in-memory write");
            let mut rows: Vec<_> = m
                .iter()
                .map(|(&v, &c)| (g.node_name(v), g.classes()[c].as_str()))
                .collect();
            rows.sort();
            for (n, l) in rows {
                w.write_record([n, l]).expect("in-memory write");
            }
        }
        Labels::Temporal(m) => {
            w.write_record(["node", "t", "label"])
                .expect("in-memory write");
            let mut rows: Vec<_> = m
                .iter()
                .map(|(&(v, t), &c)| (g.node_name(v), t, g.classes()[c].as_str()))
                .collect();
            rows.sort();
            for (n, t, l) in rows {
                w.write_record([n, &t.to_string(), l])
                    .expect("in-memory write");
            }
        }
    }
    let labels = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    (edges, nodes, labels)
}

/// Writes `edges.csv`, `nodes.csv` and `labels.csv` into `dir`.
pub fn write_dataset(g: &TemporalGraph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (edges, nodes, labels) = serialize_dataset(g);
    fs::write(dir.join("edges.csv"), edges)?;
    fs::write(dir.join("nodes.csv"), nodes)?;
    fs::write(dir.join("labels.csv"), labels)?;
    Ok(())
}
