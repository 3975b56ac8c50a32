//! Line-delimited dataset files: one `{"n": .., "edges": [[i, j], ..]}` object
//! per line, edges with `i < j` listed in ascending pair order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{pair_index, DatasetSource, Graph, GraphDataset};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    n: usize,
    edges: Vec<[usize; 2]>,
}

pub fn write_dataset(ds: &GraphDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for g in &ds.graphs {
        let record = Record { n: g.node_count(), edges: g.edges().map(|(i, j)| [i, j]).collect() };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_record(line: &str) -> std::result::Result<Graph, String> {
    let record: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if record.n == 0 {
        return Err("n must be at least 1".into());
    }
    let mut g = Graph::empty(record.n);
    let mut last: Option<usize> = None;
    for [i, j] in record.edges {
        if i >= j {
            return Err(format!("edge [{i}, {j}] must satisfy i < j"));
        }
        if j >= record.n {
            return Err(format!("edge [{i}, {j}] references a node outside 0..{}", record.n));
        }
        let idx = pair_index(record.n, i, j);
        if last.is_some_and(|prev| idx <= prev) {
            return Err(format!("edge [{i}, {j}] is out of order or repeated"));
        }
        last = Some(idx);
        g.set_edge(i, j, true);
    }
    Ok(g)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<GraphDataset> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut graphs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let graph = parse_record(&line).map_err(|reason| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            reason,
        })?;
        graphs.push(graph);
    }
    if graphs.is_empty() {
        return Err(Error::Parse { path: path.to_path_buf(), line: 0, reason: "no graph records".into() });
    }
    GraphDataset::new(graphs, DatasetSource::File { path: path.display().to_string() })
}
