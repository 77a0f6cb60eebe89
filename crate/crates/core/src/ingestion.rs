//! Reading and writing graphs, admittance matrices and experiment tables.
//!
//! Edge lists hold one `u v` pair per line; `#` or `%` start comment lines
//! and a lone id declares a node without edges. Ids that are all integers
//! map to dense ids in numeric order; otherwise labels are opaque strings
//! numbered by first appearance. Files written here use 1-based ids.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::epidemics::EpidemicTrace;
use crate::error::{Error, Result};
use crate::graph::{Graph, MergeReport};
use crate::meanfield::DegreeHistogram;
use crate::metrics::{BetweennessResult, ScalingRow, ScoreHistogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadReport {
    pub nodes: usize,
    pub edges: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// External label of each dense id.
    pub labels: Vec<String>,
    /// False when any label failed to parse as an integer.
    pub integer_labels: bool,
    pub report: LoadReport,
}

fn is_comment(line: &str) -> bool {
    line.starts_with('#') || line.starts_with('%')
}

pub fn parse_edgelist<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut tokens: Vec<(String, Option<String>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || is_comment(line) {
            continue;
        }
        let mut parts = line.split_whitespace();
        let u = parts.next().expect("nonempty line").to_string();
        let v = parts.next().map(str::to_string);
        if parts.next().is_some() {
            return Err(Error::parse(lineno, format!("expected `u v`, got `{line}`")));
        }
        tokens.push((u, v));
    }
    if tokens.is_empty() {
        return Err(Error::parse(0, "edge list has no entries"));
    }

    let integer_labels = tokens
        .iter()
        .flat_map(|(u, v)| std::iter::once(u).chain(v))
        .all(|t| t.parse::<u64>().is_ok());
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    if integer_labels {
        let mut ids: Vec<u64> = tokens
            .iter()
            .flat_map(|(u, v)| std::iter::once(u).chain(v))
            .map(|t| t.parse::<u64>().expect("checked above"))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            index.insert(id.to_string(), labels.len());
            labels.push(id.to_string());
        }
        // "007" and "7" name the same node
        for (u, v) in &tokens {
            for t in std::iter::once(u).chain(v) {
                if !index.contains_key(t) {
                    let canon = t.parse::<u64>().expect("checked above").to_string();
                    let id = index[&canon];
                    index.insert(t.clone(), id);
                }
            }
        }
    } else {
        for t in tokens.iter().flat_map(|(u, v)| std::iter::once(u).chain(v)) {
            if !index.contains_key(t) {
                index.insert(t.clone(), labels.len());
                labels.push(t.clone());
            }
        }
    }

    let pairs = tokens
        .iter()
        .filter_map(|(u, v)| v.as_ref().map(|v| (index[u], index[v])));
    let (graph, MergeReport { self_loops, duplicates }) = Graph::from_edges(labels.len(), pairs);
    if self_loops > 0 {
        log::warn!("dropped {self_loops} self-loops");
    }
    let report = LoadReport {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        self_loops,
        duplicates,
    };
    Ok(LoadedGraph {
        graph,
        labels,
        integer_labels,
        report,
    })
}

pub fn load_edgelist(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edgelist(BufReader::new(file)).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Labels `1..=n`, the ids used when writing generated graphs.
pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

pub fn write_edgelist<W: Write>(mut w: W, g: &Graph) -> std::io::Result<()> {
    writeln!(w, "# nodes {} edges {}", g.node_count(), g.edge_count())?;
    for u in 0..g.node_count() {
        if g.degree(u) == 0 {
            writeln!(w, "{}", u + 1)?;
        }
    }
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", u + 1, v + 1)?;
    }
    w.flush()
}

pub fn save_graph(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_edgelist(BufWriter::new(file), g).map_err(|e| Error::io(path, e))
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(File::create(path).map_err(|e| Error::io(path, e))?);
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `id,label` sidecar for graphs read with non-integer labels.
pub fn save_label_map(path: impl AsRef<Path>, labels: &[String]) -> Result<()> {
    write_rows(
        path.as_ref(),
        &["id", "label"],
        labels.iter().enumerate().map(|(i, l)| (i + 1, l)),
    )
}

pub fn save_histogram(path: impl AsRef<Path>, h: &DegreeHistogram) -> Result<()> {
    write_rows(path.as_ref(), &["degree", "count"], h.iter())
}

pub fn load_histogram(path: impl AsRef<Path>) -> Result<DegreeHistogram> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let rows: Vec<(usize, u64)> = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))?;
    Ok(DegreeHistogram::from_counts(rows))
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    step: usize,
    #[serde(rename = "S_mean")]
    s_mean: f64,
    #[serde(rename = "I_mean")]
    i_mean: f64,
    #[serde(rename = "R_mean")]
    r_mean: f64,
    #[serde(rename = "I_std")]
    i_std: f64,
}

/// Trace CSV preceded by a `# nodes=N trials=T` comment line.
pub fn save_trace(path: impl AsRef<Path>, trace: &EpidemicTrace) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(file, "# nodes={} trials={}", trace.node_count, trace.trials)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for step in 0..trace.infected_mean.len() {
        w.serialize(TraceRow {
            step,
            s_mean: trace.susceptible_mean[step],
            i_mean: trace.infected_mean[step],
            r_mean: trace.removed_mean[step],
            i_std: trace.infected_std[step],
        })
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<EpidemicTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = text.lines().next().unwrap_or_default();
    let meta = |key: &str| -> Result<usize> {
        first
            .trim_start_matches('#')
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
            .ok_or_else(|| Error::parse(1, format!("missing `{key}=` in trace header")))
    };
    let node_count = meta("nodes")?;
    let trials = meta("trials")?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows: Vec<TraceRow> = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))?;
    Ok(EpidemicTrace {
        node_count,
        trials,
        susceptible_mean: rows.iter().map(|r| r.s_mean).collect(),
        infected_mean: rows.iter().map(|r| r.i_mean).collect(),
        removed_mean: rows.iter().map(|r| r.r_mean).collect(),
        infected_std: rows.iter().map(|r| r.i_std).collect(),
    })
}

pub fn save_node_scores(path: impl AsRef<Path>, labels: &[String], r: &BetweennessResult) -> Result<()> {
    write_rows(
        path.as_ref(),
        &["node", "score"],
        labels.iter().zip(&r.node_scores),
    )
}

pub fn save_edge_scores(path: impl AsRef<Path>, labels: &[String], r: &BetweennessResult) -> Result<()> {
    write_rows(
        path.as_ref(),
        &["u", "v", "score"],
        r.edges
            .iter()
            .zip(&r.edge_scores)
            .map(|(&(u, v), s)| (&labels[u], &labels[v], s)),
    )
}

pub fn save_score_histogram(path: impl AsRef<Path>, h: &ScoreHistogram) -> Result<()> {
    write_rows(path.as_ref(), &["lower", "upper", "mass"], h.rows())
}

pub fn save_scaling(path: impl AsRef<Path>, rows: &[ScalingRow]) -> Result<()> {
    write_rows(
        path.as_ref(),
        &["N", "mean_diameter", "std"],
        rows.iter().map(|r| (r.nodes, r.mean_diameter, r.std_diameter)),
    )
}

pub fn load_scaling(path: impl AsRef<Path>) -> Result<Vec<ScalingRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .map(|row| {
            let (nodes, mean_diameter, std_diameter): (usize, f64, f64) =
                row.map_err(|e| Error::csv(path, e))?;
            Ok(ScalingRow {
                nodes,
                mean_diameter,
                std_diameter,
            })
        })
        .collect()
}

/// `(degree, empirical_pdf, fitted_pdf)` rows.
pub fn save_fit_rows(path: impl AsRef<Path>, rows: &[(usize, f64, f64)]) -> Result<()> {
    write_rows(
        path.as_ref(),
        &["degree", "empirical_pdf", "fitted_pdf"],
        rows.iter().copied(),
    )
}

pub fn save_positions(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let Some(pos) = g.positions() else {
        return Err(Error::Document("graph has no positions".into()));
    };
    write_rows(
        path.as_ref(),
        &["node", "x", "y"],
        pos.iter().enumerate().map(|(i, p)| (i + 1, p.x, p.y)),
    )
}

/// Writes any serializable rows under a header; used for ad-hoc tables.
pub fn save_table<T: Serialize>(path: impl AsRef<Path>, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    write_rows(path.as_ref(), header, rows)
}

/// Sparse admittance matrix read from a Matrix Market coordinate file.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, re, im)` with 0-based indices.
    pub entries: Vec<(usize, usize, f64, f64)>,
}

/// Parses `%%MatrixMarket matrix coordinate {real|complex|integer|pattern}
/// {general|symmetric|hermitian|skew-symmetric}`. Pattern entries get unit
/// magnitude.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<AdmittanceMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, banner) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let banner = banner.map_err(|e| Error::parse(1, e.to_string()))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(Error::parse(1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    let width = match fields[3].as_str() {
        "real" | "integer" => 1,
        "complex" => 2,
        "pattern" => 0,
        other => return Err(Error::parse(1, format!("unsupported field `{other}`"))),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::parse(lineno, format!("non-numeric value `{s}`")))
        };
        let idx = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| Error::parse(lineno, format!("bad index `{s}`")))
        };
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(Error::parse(lineno, "expected `rows cols entries`"));
                }
                size = Some((idx(parts[0])?, idx(parts[1])?, parts[2].parse().map_err(|_| {
                    Error::parse(lineno, format!("bad entry count `{}`", parts[2]))
                })?));
            }
            Some((rows, cols, _)) => {
                if parts.len() != 2 + width {
                    return Err(Error::parse(lineno, format!("expected {} columns", 2 + width)));
                }
                let (r, c) = (idx(parts[0])?, idx(parts[1])?);
                if r > rows || c > cols {
                    return Err(Error::parse(lineno, "index out of range"));
                }
                let (re, im) = match width {
                    0 => (1.0, 0.0),
                    1 => (num(parts[2])?, 0.0),
                    _ => (num(parts[2])?, num(parts[3])?),
                };
                entries.push((r - 1, c - 1, re, im));
            }
        }
    }
    let (rows, cols, declared) = size.ok_or_else(|| Error::parse(0, "missing size line"))?;
    if entries.len() != declared {
        log::warn!("matrix declares {declared} entries but lists {}", entries.len());
    }
    Ok(AdmittanceMatrix { rows, cols, entries })
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<AdmittanceMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(BufReader::new(file))
}

/// Lines are the off-diagonal entries with `|Y_ij| > threshold`, symmetrized
/// by union. Every bus is a node.
pub fn adjacency_from_admittance(doc: &AdmittanceMatrix, threshold: f64) -> Result<Graph> {
    if doc.rows != doc.cols {
        return Err(Error::Document(format!(
            "admittance matrix must be square, got {}x{}",
            doc.rows, doc.cols
        )));
    }
    let pairs = doc
        .entries
        .iter()
        .filter(|&&(r, c, re, im)| r != c && re.hypot(im) > threshold)
        .map(|&(r, c, _, _)| (r, c));
    Ok(Graph::from_edges(doc.rows, pairs).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    fn parse(text: &str) -> Result<LoadedGraph> {
        parse_edgelist(text.as_bytes())
    }

    #[test]
    fn path_file() {
        let g = parse("1 2\n2 3\n").unwrap();
        assert_eq!(g.report, LoadReport { nodes: 3, edges: 2, self_loops: 0, duplicates: 0 });
        assert_eq!(g.graph, named::path(3));
    }

    #[test]
    fn reversed_duplicates_merge() {
        let g = parse("# header\n1 2\n2 1\n3 3\n").unwrap();
        assert_eq!(g.report.edges, 1);
        assert_eq!(g.report.duplicates, 1);
        assert_eq!(g.report.self_loops, 1);
        assert_eq!(g.report.nodes, 3);
    }

    #[test]
    fn malformed_and_empty() {
        match parse("1 2\n1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("").is_err());
        assert!(parse("# only comments\n\n").is_err());
    }

    #[test]
    fn string_labels_in_first_appearance_order() {
        let g = parse("bus_b bus_a\nbus_a bus_c\n").unwrap();
        assert!(!g.integer_labels);
        assert_eq!(g.labels, vec!["bus_b", "bus_a", "bus_c"]);
        assert!(g.graph.has_edge(0, 1) && g.graph.has_edge(1, 2));
    }

    #[test]
    fn integer_labels_sorted_numerically() {
        let g = parse("10 2\n2 007\n").unwrap();
        assert_eq!(g.labels, vec!["2", "7", "10"]);
        assert!(g.graph.has_edge(0, 2) && g.graph.has_edge(0, 1));
    }

    #[test]
    fn isolated_nodes_round_trip() {
        let (g, _) = Graph::from_edges(5, [(0, 1), (3, 4)]);
        let mut buf = Vec::new();
        write_edgelist(&mut buf, &g).unwrap();
        assert_eq!(parse_edgelist(buf.as_slice()).unwrap().graph, g);
    }

    #[test]
    fn admittance_examples() {
        let zero = "%%MatrixMarket matrix coordinate complex general\n2 2 2\n1 1 1.0 -2.0\n1 2 0 0\n";
        let g = adjacency_from_admittance(&parse_matrix_market(zero.as_bytes()).unwrap(), 0.0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 0));
        let line = "%%MatrixMarket matrix coordinate complex symmetric\n% comment\n2 2 3\n1 1 3 -9\n2 1 -3 9\n2 2 3 -9\n";
        let g = adjacency_from_admittance(&parse_matrix_market(line.as_bytes()).unwrap(), 0.0).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 abc\n";
        assert!(matches!(parse_matrix_market(bad.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn threshold_filters_weak_couplings() {
        let text = "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 2 0.5\n2 3 -2.0\n";
        let doc = parse_matrix_market(text.as_bytes()).unwrap();
        let g = adjacency_from_admittance(&doc, 1.0).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 2)]);
    }

    #[test]
    fn histogram_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let h = DegreeHistogram::from_counts([(1, 2), (2, 1)]);
        save_histogram(&path, &h).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "degree,count\n1,2\n2,1\n");
        assert_eq!(load_histogram(&path).unwrap(), h);
    }

    #[test]
    fn io_errors_carry_path() {
        let err = load_edgelist("/nonexistent/file.edges").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/file.edges"));
    }
}
