//! File formats. Every writer is atomic (temporary file in the target
//! directory, then rename); every reader reports malformed input with the
//! offending line number. Floats are written with 17 significant digits so
//! load∘save is bit-exact.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::data::{validate_items, Item, Split};
use crate::error::{Error, Result};
use crate::graph::{ClippedGraph, SparseWeightedGraph};
use crate::hashing::{CodeMatrix, HashModel};
use crate::synthesis::{PrivacyReceipt, SanitizedGraph};

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to `path` via write-then-rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("cannot parse {what} from {field:?}")))
}

// ---------------------------------------------------------------- features

/// CSV with header `id,label,img_0..img_{dI-1},txt_0..txt_{dT-1}`; the label
/// field holds `;`-separated label ids.
pub fn save_features(path: &Path, items: &[Item]) -> Result<()> {
    validate_items(items)?;
    let (di, dt) = items.first().map_or((0, 0), |it| (it.image.len(), it.text.len()));
    let mut out = String::from("id,label");
    (0..di).for_each(|c| out.push_str(&format!(",img_{c}")));
    (0..dt).for_each(|c| out.push_str(&format!(",txt_{c}")));
    out.push('\n');
    for it in items {
        out.push_str(&it.id.to_string());
        out.push(',');
        let labels: Vec<String> = it.labels.iter().map(u32::to_string).collect();
        out.push_str(&labels.join(";"));
        for v in it.image.iter().chain(&it.text) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_features(path: &Path) -> Result<Vec<Item>> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file, expected a header"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "id" || cols[1] != "label" {
        return Err(Error::parse(path, 1, "header must start with `id,label`"));
    }
    let di = cols.iter().filter(|c| c.starts_with("img_")).count();
    let dt = cols.iter().filter(|c| c.starts_with("txt_")).count();
    if di + dt + 2 != cols.len() {
        return Err(Error::parse(path, 1, "feature columns must be named img_* or txt_*"));
    }
    let mut items = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        let id: u64 = parse_num(path, lineno, fields[0], "id")?;
        let labels = if fields[1].trim().is_empty() {
            Vec::new()
        } else {
            fields[1]
                .split(';')
                .map(|l| parse_num(path, lineno, l, "label"))
                .collect::<Result<Vec<u32>>>()?
        };
        let values = fields[2..]
            .iter()
            .map(|f| parse_num::<f64>(path, lineno, f, "feature"))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::parse(path, lineno, format!("non-finite feature {v}")));
        }
        items.push(Item {
            id,
            image: values[..di].to_vec(),
            text: values[di..].to_vec(),
            labels,
        });
    }
    validate_items(&items).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    Ok(items)
}

/// Split file: item ids of each partition.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SplitIds {
    pub train: Vec<u64>,
    pub query: Vec<u64>,
}

impl SplitIds {
    pub fn from_split(items: &[Item], split: &Split) -> Self {
        SplitIds {
            train: split.train.iter().map(|&i| items[i].id).collect(),
            query: split.query.iter().map(|&i| items[i].id).collect(),
        }
    }
}

// ------------------------------------------------------------------ graphs

fn write_edges(out: &mut String, graph: &SparseWeightedGraph) {
    for (i, j, w) in graph.edges() {
        out.push_str(&format!("{i}\t{j}\t{}\n", fmt_f64(w)));
    }
}

fn parse_header(path: &Path, line: &str, tag: &str) -> Result<(usize, String)> {
    let rest = line
        .strip_prefix("#nodes=")
        .ok_or_else(|| Error::parse(path, 1, format!("header must look like `#nodes=<n> {tag}`")))?;
    let (n, tail) = rest.split_once(' ').unwrap_or((rest, ""));
    Ok((parse_num(path, 1, n, "node count")?, tail.trim().to_string()))
}

fn read_edges(path: &Path, text: &str, tag: &str) -> Result<(usize, String, Vec<(usize, usize, f64)>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file, expected a header"))?;
    let (n, tail) = parse_header(path, header, tag)?;
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, lineno, format!("expected `i<TAB>j<TAB>w`, found {} fields", fields.len())));
        }
        let i: usize = parse_num(path, lineno, fields[0], "node")?;
        let j: usize = parse_num(path, lineno, fields[1], "node")?;
        let w: f64 = parse_num(path, lineno, fields[2], "weight")?;
        if i >= n || j >= n || i == j {
            return Err(Error::parse(path, lineno, format!("bad edge ({i}, {j}) for {n} nodes")));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::parse(path, lineno, format!("weight {w} must be finite and positive")));
        }
        edges.push((i, j, w));
    }
    Ok((n, tail, edges))
}

/// TSV: header `#nodes=<n> dmax=<d>`, then one `i\tj\tw` line per edge, `i < j`.
pub fn save_graph(path: &Path, clipped: &ClippedGraph) -> Result<()> {
    let mut out = format!("#nodes={} dmax={}\n", clipped.graph.n_nodes(), clipped.d_max);
    write_edges(&mut out, &clipped.graph);
    write_atomic(path, out.as_bytes())
}

pub fn load_graph(path: &Path) -> Result<ClippedGraph> {
    let text = read_text(path)?;
    let (n, tail, edges) = read_edges(path, &text, "dmax=<d>")?;
    let d_max: usize = match tail.strip_prefix("dmax=") {
        Some(d) => parse_num(path, 1, d, "dmax")?,
        None => return Err(Error::parse(path, 1, "header is missing `dmax=<d>`")),
    };
    let graph = SparseWeightedGraph::from_edges(n, edges).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    ClippedGraph::new(graph, d_max)
}

/// Path of the receipt written next to a sanitized graph file.
pub fn receipt_path(sanitized_path: &Path) -> PathBuf {
    sanitized_path.with_extension("receipt.json")
}

/// TSV of the positive entries of `Ŵ` (header `#nodes=<n> sanitized`) plus a
/// JSON receipt sidecar at [`receipt_path`].
pub fn save_sanitized(path: &Path, sanitized: &SanitizedGraph) -> Result<()> {
    let mut out = format!("#nodes={} sanitized\n", sanitized.n_nodes());
    write_edges(&mut out, &sanitized.graph);
    write_atomic(path, out.as_bytes())?;
    save_json(&receipt_path(path), &sanitized.receipt)
}

pub fn load_sanitized(path: &Path) -> Result<SanitizedGraph> {
    let text = read_text(path)?;
    let (n, tail, edges) = read_edges(path, &text, "sanitized")?;
    if tail != "sanitized" {
        return Err(Error::parse(path, 1, "header must be `#nodes=<n> sanitized`"));
    }
    if let Some((i, j, w)) = edges.iter().find(|e| e.2 > 1.0) {
        return Err(Error::parse(path, 0, format!("entry ({i}, {j}) = {w} exceeds 1")));
    }
    let graph = SparseWeightedGraph::from_edges(n, edges).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    let receipt: PrivacyReceipt = load_json(&receipt_path(path))?;
    receipt.verify()?;
    Ok(SanitizedGraph { graph, receipt })
}

// ------------------------------------------------------------ model, codes

pub fn save_model(path: &Path, model: &HashModel) -> Result<()> {
    save_json(path, model)
}

pub fn load_model(path: &Path) -> Result<HashModel> {
    let model: HashModel = load_json(path)?;
    model.validate()?;
    Ok(model)
}

/// One `id\t<code>` line per item, the code written as `+`/`-` characters.
pub fn save_codes(path: &Path, ids: &[u64], codes: &CodeMatrix) -> Result<()> {
    if ids.len() != codes.len() {
        return Err(Error::invalid(format!("{} ids for {} codes", ids.len(), codes.len())));
    }
    let mut out = format!("#bits={}\n", codes.k_bits());
    for (r, id) in ids.iter().enumerate() {
        let code: String = codes.row_bools(r).iter().map(|&b| if b { '+' } else { '-' }).collect();
        out.push_str(&format!("{id}\t{code}\n"));
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_codes(path: &Path) -> Result<(Vec<u64>, CodeMatrix)> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file, expected a header"))?;
    let k: usize = match header.strip_prefix("#bits=") {
        Some(k) => parse_num(path, 1, k, "bit count")?,
        None => return Err(Error::parse(path, 1, "header must be `#bits=<K>`")),
    };
    let (mut ids, mut rows) = (Vec::new(), Vec::new());
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, code) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected `id<TAB>code`"))?;
        if code.len() != k || !code.chars().all(|c| c == '+' || c == '-') {
            return Err(Error::parse(path, lineno, format!("code must be {k} `+`/`-` characters")));
        }
        ids.push(parse_num(path, lineno, id, "id")?);
        rows.push(code.chars().map(|c| c == '+').collect());
    }
    Ok((ids, CodeMatrix::from_bools(k, &rows)?))
}
