//! Network files.
//!
//! JSON (`mlap-net/1`):
//!
//! ```json
//! {
//!   "schema": "mlap-net/1",
//!   "states": ["a", "b", "c"],
//!   "mu": [1.0, 1.0, 1.0],
//!   "edges": [{"u": "a", "v": "b", "w": 1.0}, {"u": "b", "v": "c", "w": 1.0}],
//!   "boundary": ["c"]
//! }
//! ```
//!
//! Each undirected edge is listed once; `u == v` places mass on the diagonal.
//! A dense `"w"` matrix may be given instead of `"edges"`. The CSV form is an
//! edge file `u,v,w` next to a `<stem>.states.csv` file `id,mu[,boundary]`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, ParseError, Result};
use crate::net::{Network, SetFamily};

pub const SCHEMA: &str = "mlap-net/1";

/// A validated network plus its optional boundary (state indices).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFile {
    pub network: Network,
    pub boundary: Option<Vec<usize>>,
}

impl NetworkFile {
    pub fn checksum(&self) -> String {
        network_checksum(&self.network, self.boundary.as_deref())
    }
}

/// Parsed but not yet validated network data.
#[derive(Debug, Clone, PartialEq)]
pub struct RawNetwork {
    pub states: Vec<String>,
    pub mu: Vec<f64>,
    pub w: DMatrix<f64>,
    pub boundary: Option<Vec<String>>,
}

impl RawNetwork {
    pub fn build(&self) -> Result<NetworkFile> {
        let network = Network::new(self.states.clone(), self.mu.clone(), self.w.clone())?;
        let boundary = match &self.boundary {
            None => None,
            Some(ids) => Some(
                ids.iter()
                    .map(|id| network.index_of(id).ok_or_else(|| Error::UnknownState(id.clone())))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(NetworkFile { network, boundary })
    }

    /// SHA-256 of the raw contents, usable before validation.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        hash_states(&mut h, &self.states);
        for x in &self.mu {
            h.update(x.to_bits().to_le_bytes());
        }
        for x in self.w.iter() {
            h.update(x.to_bits().to_le_bytes());
        }
        if let Some(b) = &self.boundary {
            hash_states(&mut h, b);
        }
        hex::encode(h.finalize())
    }
}

impl From<&NetworkFile> for RawNetwork {
    fn from(f: &NetworkFile) -> Self {
        let net = &f.network;
        RawNetwork {
            states: net.states().to_vec(),
            mu: net.mu().iter().copied().collect(),
            w: net.w().clone(),
            boundary: f.boundary.as_ref().map(|b| b.iter().map(|&i| net.states()[i].clone()).collect()),
        }
    }
}

fn hash_states(h: &mut Sha256, states: &[String]) {
    h.update((states.len() as u64).to_le_bytes());
    for s in states {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
}

/// SHA-256 over ids, masses, the coupling matrix and the boundary.
pub fn network_checksum(net: &Network, boundary: Option<&[usize]>) -> String {
    let raw = RawNetwork::from(&NetworkFile { network: net.clone(), boundary: boundary.map(<[usize]>::to_vec) });
    raw.checksum()
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    u: String,
    v: String,
    w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    states: Vec<String>,
    mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<EdgeJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<Vec<String>>,
}

fn state_index(states: &[String]) -> Result<HashMap<&str, usize>> {
    let mut map = HashMap::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        if map.insert(s.as_str(), i).is_some() {
            return Err(Error::DuplicateState(s.clone()));
        }
    }
    Ok(map)
}

/// Fills a symmetric matrix from an undirected edge list.
fn assemble_edges<'a>(
    states: &[String],
    edges: impl IntoIterator<Item = (&'a str, &'a str, f64)>,
) -> Result<DMatrix<f64>> {
    let index = state_index(states)?;
    let n = states.len();
    let mut w = DMatrix::zeros(n, n);
    let mut seen = HashSet::new();
    for (u, v, x) in edges {
        let i = *index.get(u).ok_or_else(|| Error::UnknownState(u.to_string()))?;
        let j = *index.get(v).ok_or_else(|| Error::UnknownState(v.to_string()))?;
        if !x.is_finite() {
            return Err(ParseError::Malformed(format!("edge ({u}, {v}) has non-finite weight")).into());
        }
        if x < 0.0 {
            return Err(ParseError::NegativeWeight(u.to_string(), v.to_string()).into());
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(ParseError::DuplicateEdge(u.to_string(), v.to_string()).into());
        }
        w[(i, j)] = x;
        w[(j, i)] = x;
    }
    Ok(w)
}

pub fn parse_json(text: &str) -> Result<RawNetwork> {
    let doc: NetJson = serde_json::from_str(text).map_err(|e| ParseError::Malformed(e.to_string()))?;
    if let Some(s) = &doc.schema {
        if s != SCHEMA {
            return Err(Error::SchemaVersion(s.clone()));
        }
    }
    let n = doc.states.len();
    let w = match (&doc.edges, &doc.w) {
        (Some(edges), None) => assemble_edges(&doc.states, edges.iter().map(|e| (e.u.as_str(), e.v.as_str(), e.w)))?,
        (None, Some(rows)) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(ParseError::Malformed(format!("`w` must be a {n}×{n} matrix")).into());
            }
            DMatrix::from_fn(n, n, |i, j| rows[i][j])
        }
        (Some(_), Some(_)) => return Err(ParseError::Malformed("give either `edges` or `w`, not both".into()).into()),
        (None, None) => return Err(ParseError::Malformed("missing `edges`".into()).into()),
    };
    Ok(RawNetwork { states: doc.states, mu: doc.mu, w, boundary: doc.boundary })
}

pub fn to_json(file: &NetworkFile) -> String {
    let net = &file.network;
    let states = net.states();
    let n = net.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i..n {
            let x = net.w()[(i, j)];
            if x != 0.0 {
                edges.push(EdgeJson { u: states[i].clone(), v: states[j].clone(), w: x });
            }
        }
    }
    let doc = NetJson {
        schema: Some(SCHEMA.to_string()),
        states: states.to_vec(),
        mu: net.mu().iter().copied().collect(),
        edges: Some(edges),
        w: None,
        boundary: file.boundary.as_ref().map(|b| b.iter().map(|&i| states[i].clone()).collect()),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
    out.push('\n');
    out
}

/// Sidecar path holding state ids and masses for a CSV edge file.
pub fn states_sidecar(edges: &Path) -> PathBuf {
    let stem = edges.file_stem().and_then(|s| s.to_str()).unwrap_or("network");
    edges.with_file_name(format!("{stem}.states.csv"))
}

#[derive(Debug, Serialize, Deserialize)]
struct StateRow {
    id: String,
    mu: f64,
    #[serde(default)]
    boundary: Option<u8>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    u: String,
    v: String,
    w: f64,
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => ParseError::Malformed(e.to_string()).into(),
    }
}

pub fn parse_csv(edges_text: &str, states_text: &str) -> Result<RawNetwork> {
    let mut states = Vec::new();
    let mut mu = Vec::new();
    let mut boundary = Vec::new();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(states_text.as_bytes());
    for row in rdr.deserialize::<StateRow>() {
        let row = row.map_err(csv_err)?;
        if row.boundary == Some(1) {
            boundary.push(row.id.clone());
        }
        states.push(row.id);
        mu.push(row.mu);
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(edges_text.as_bytes());
    let rows: Vec<EdgeRow> = rdr.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)?;
    let w = assemble_edges(&states, rows.iter().map(|e| (e.u.as_str(), e.v.as_str(), e.w)))?;
    let boundary = if boundary.is_empty() { None } else { Some(boundary) };
    Ok(RawNetwork { states, mu, w, boundary })
}

/// Returns `(edges.csv, states.csv)` contents.
pub fn to_csv(file: &NetworkFile) -> (String, String) {
    let net = &file.network;
    let states = net.states();
    let mut edges = csv::Writer::from_writer(Vec::new());
    for i in 0..net.len() {
        for j in i..net.len() {
            let w = net.w()[(i, j)];
            if w != 0.0 {
                edges.serialize(EdgeRow { u: states[i].clone(), v: states[j].clone(), w }).expect("in-memory write");
            }
        }
    }
    let mut nodes = csv::Writer::from_writer(Vec::new());
    for (i, id) in states.iter().enumerate() {
        let on_boundary = file.boundary.as_ref().map(|b| u8::from(b.contains(&i)));
        nodes.serialize(StateRow { id: id.clone(), mu: net.mu()[i], boundary: on_boundary }).expect("in-memory write");
    }
    let finish = |w: csv::Writer<Vec<u8>>| String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    (finish(edges), finish(nodes))
}

fn is_csv(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a JSON or CSV network without validating it.
pub fn load_raw(path: &Path) -> Result<RawNetwork> {
    if is_csv(path) {
        let edges = fs::read_to_string(path)?;
        let states = fs::read_to_string(states_sidecar(path))?;
        parse_csv(&edges, &states)
    } else {
        parse_json(&fs::read_to_string(path)?)
    }
}

pub fn load_network(path: &Path) -> Result<NetworkFile> {
    load_raw(path)?.build()
}

/// Writes JSON, or the CSV pair when `path` ends in `.csv`.
pub fn write_network(path: &Path, file: &NetworkFile) -> Result<()> {
    if is_csv(path) {
        let (edges, states) = to_csv(file);
        fs::write(path, edges)?;
        fs::write(states_sidecar(path), states)?;
    } else {
        fs::write(path, to_json(file))?;
    }
    Ok(())
}

fn resolve(net: &Network, v: &Value) -> Result<usize> {
    match v {
        Value::String(id) => net.index_of(id).ok_or_else(|| Error::UnknownState(id.clone())),
        other => Err(ParseError::Malformed(format!("expected a state id, found {other}")).into()),
    }
}

fn resolve_set(net: &Network, v: &Value) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| ParseError::Malformed("a set must be an array of state ids".into()))?
        .iter()
        .map(|s| resolve(net, s))
        .collect()
}

/// A family of sets as `[["a","b"], ...]`, `{"sets": [...]}` or with named
/// entries `{"name": "A", "states": [...]}`.
pub fn parse_family(net: &Network, text: &str) -> Result<SetFamily> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let list = match &doc {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("sets")
            .and_then(Value::as_array)
            .ok_or_else(|| ParseError::Malformed("missing `sets` array".into()))?,
        _ => return Err(ParseError::Malformed("expected an array of sets".into()).into()),
    };
    let mut sets = Vec::with_capacity(list.len());
    let mut names = Vec::with_capacity(list.len());
    for entry in list {
        match entry {
            Value::Object(o) => {
                names.push(o.get("name").and_then(Value::as_str).map(str::to_string));
                let members = o.get("states").ok_or_else(|| ParseError::Malformed("set entry without `states`".into()))?;
                sets.push(resolve_set(net, members)?);
            }
            other => {
                names.push(None);
                sets.push(resolve_set(net, other)?);
            }
        }
    }
    SetFamily::with_names(net.len(), sets, names)
}

/// A function on states as a number array in state order, `{"values": [...]}`,
/// or an object keyed by state id (missing ids read as 0).
pub fn parse_vector(net: &Network, text: &str) -> Result<DVector<f64>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let number = |v: &Value| v.as_f64().ok_or_else(|| Error::from(ParseError::Malformed(format!("expected a number, found {v}"))));
    let values = match &doc {
        Value::Array(a) => a.iter().map(number).collect::<Result<Vec<_>>>()?,
        Value::Object(o) if o.get("values").is_some_and(Value::is_array) => {
            o["values"].as_array().unwrap().iter().map(number).collect::<Result<Vec<_>>>()?
        }
        Value::Object(o) => {
            let mut out = vec![0.0; net.len()];
            for (id, v) in o {
                out[net.index_of(id).ok_or_else(|| Error::UnknownState(id.clone()))?] = number(v)?;
            }
            out
        }
        _ => return Err(ParseError::Malformed("expected an array or object of numbers".into()).into()),
    };
    let f = DVector::from_vec(values);
    net.check_vec(&f)?;
    Ok(f)
}

/// A list of state ids, e.g. a boundary given on the command line as `a,b`.
pub fn parse_state_list(net: &Network, text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|id| net.index_of(id).ok_or_else(|| Error::UnknownState(id.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const TRIANGLE: &str = r#"{"schema":"mlap-net/1","states":["a","b","c"],"mu":[1,1,1],
        "edges":[{"u":"a","v":"b","w":1},{"u":"a","v":"c","w":1},{"u":"b","v":"c","w":1}]}"#;

    #[test]
    fn parses_triangle() {
        let f = parse_json(TRIANGLE).unwrap().build().unwrap();
        assert_eq!(f.network, fixtures::triangle());
        assert_eq!(f.boundary, None);
    }

    #[test]
    fn parse_errors() {
        let neg = TRIANGLE.replace(r#""w":1}]"#, r#""w":-1}]"#);
        assert_eq!(parse_json(&neg), Err(ParseError::NegativeWeight("b".into(), "c".into()).into()));
        let dup = TRIANGLE.replace(r#"{"u":"b","v":"c""#, r#"{"u":"b","v":"a""#);
        assert_eq!(parse_json(&dup), Err(ParseError::DuplicateEdge("b".into(), "a".into()).into()));
        let schema = TRIANGLE.replace("mlap-net/1", "mlap-net/2");
        assert_eq!(parse_json(&schema), Err(Error::SchemaVersion("mlap-net/2".into())));
        assert!(matches!(parse_json("{"), Err(Error::Parse(ParseError::Malformed(_)))));
        let unknown = TRIANGLE.replace(r#""u":"a","v":"b""#, r#""u":"a","v":"z""#);
        assert_eq!(parse_json(&unknown), Err(Error::UnknownState("z".into())));
    }

    #[test]
    fn dense_asymmetric_input_fails_validation() {
        let text = r#"{"states":["a","b"],"mu":[1,1],"w":[[0,1],[2,0]]}"#;
        let raw = parse_json(text).unwrap();
        assert!(matches!(raw.build(), Err(Error::AsymmetricCoupling { .. })));
    }

    #[test]
    fn json_and_csv_round_trip() {
        for fx in fixtures::all() {
            let file = fx.file();
            let back = parse_json(&to_json(&file)).unwrap().build().unwrap();
            assert_eq!(back, file, "{}", fx.name);
            let (e, s) = to_csv(&file);
            let back = parse_csv(&e, &s).unwrap().build().unwrap();
            assert_eq!(back, file, "{}", fx.name);
        }
    }

    #[test]
    fn families_and_vectors() {
        let net = fixtures::triangle();
        let fam = parse_family(&net, r#"[["a"], {"name": "bc", "states": ["c", "b"]}]"#).unwrap();
        assert_eq!(fam.sets(), &[vec![0], vec![1, 2]]);
        assert_eq!(parse_vector(&net, "[1, 2, 3]").unwrap(), DVector::from_column_slice(&[1.0, 2.0, 3.0]));
        assert_eq!(parse_vector(&net, r#"{"b": 2}"#).unwrap(), DVector::from_column_slice(&[0.0, 2.0, 0.0]));
        assert!(matches!(parse_vector(&net, "[1]"), Err(Error::DimensionMismatch { .. })));
        assert_eq!(parse_state_list(&net, "c, a").unwrap(), vec![2, 0]);
    }

    #[test]
    fn checksum_is_stable_and_sensitive() {
        let a = fixtures::all()[0].file();
        assert_eq!(a.checksum(), a.checksum());
        let b = NetworkFile { boundary: None, ..a.clone() };
        assert_ne!(a.checksum(), b.checksum());
    }
}
