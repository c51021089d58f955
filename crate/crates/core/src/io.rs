//! Plain-text formats for point clouds, complexes and vertex maps.
//!
//! Points: a `# dim=<n> count=<N>` header, then one comma-separated point
//! per line. Complexes: a `# cech epsilon=<e> dmax=<d> nverts=<v>` header,
//! then one simplex of dimension ≥ 1 per line as space-separated vertex
//! indices. Maps: a `# map source=<path> target=<path>` header, then lines
//! `i -> j`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::complex::{CechNerve, ComplexError, Simplex, SimplicialComplex, SimplicialMap};
use crate::geometry::{GeometryError, PointCloud};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing or malformed header: {0}")]
    Header(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_header<'a>(line: Option<&'a str>, tag: &str) -> Result<HashMap<&'a str, &'a str>, FormatError> {
    let line = line.ok_or_else(|| FormatError::Header("empty input".into()))?;
    let rest = line
        .strip_prefix('#')
        .map(str::trim_start)
        .and_then(|l| if tag.is_empty() { Some(l) } else { l.strip_prefix(tag) })
        .ok_or_else(|| FormatError::Header(line.to_owned()))?;
    rest.split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| FormatError::Header(format!("expected key=value, got {kv}"))))
        .collect()
}

fn header_value<T: std::str::FromStr>(h: &HashMap<&str, &str>, key: &str) -> Result<T, FormatError> {
    h.get(key)
        .ok_or_else(|| FormatError::Header(format!("missing {key}")))?
        .parse()
        .map_err(|_| FormatError::Header(format!("bad value for {key}")))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().skip(1).map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn write_points(points: &PointCloud) -> String {
    let mut out = format!("# dim={} count={}\n", points.dim(), points.len());
    for p in points.iter() {
        let row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_points(text: &str) -> Result<PointCloud, FormatError> {
    let header = parse_header(text.lines().next(), "")?;
    let dim: usize = header_value(&header, "dim")?;
    let count: usize = header_value(&header, "count")?;
    let mut cloud = PointCloud::with_capacity(dim, count);
    for (line, l) in data_lines(text) {
        let row: Vec<f64> = l
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| FormatError::Parse { line, message: e.to_string() })?;
        if row.len() != dim || row.iter().any(|c| !c.is_finite()) {
            return Err(FormatError::Parse { line, message: format!("expected {dim} finite coordinates") });
        }
        cloud.push(&row)?;
    }
    if cloud.len() != count {
        return Err(FormatError::Header(format!("count={count} but {} points found", cloud.len())));
    }
    Ok(cloud)
}

pub fn write_complex(k: &SimplicialComplex, epsilon: f64) -> String {
    let mut out = format!("# cech epsilon={epsilon} dmax={} nverts={}\n", k.d_max(), k.num_vertices());
    for d in 1..=k.d_max() {
        for s in k.iter(d) {
            let row: Vec<String> = s.iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn write_nerve(nerve: &CechNerve) -> String {
    write_complex(&nerve.complex, nerve.epsilon)
}

/// Reads a complex and the radius recorded in its header. The listed
/// simplices are closed under faces.
pub fn read_complex(text: &str) -> Result<(SimplicialComplex, f64), FormatError> {
    let header = parse_header(text.lines().next(), "cech")?;
    let epsilon: f64 = header_value(&header, "epsilon")?;
    let d_max: usize = header_value(&header, "dmax")?;
    let nverts: usize = header_value(&header, "nverts")?;
    let mut simplices = Vec::new();
    for (line, l) in data_lines(text) {
        let verts: Vec<u32> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e: std::num::ParseIntError| FormatError::Parse { line, message: e.to_string() })?;
        simplices.push(Simplex::new(verts).map_err(|e| FormatError::Parse { line, message: e.to_string() })?);
    }
    Ok((SimplicialComplex::closure(nverts, d_max, simplices)?, epsilon))
}

pub fn write_map(phi: &SimplicialMap, source: &str, target: &str) -> String {
    let mut out = format!("# map source={source} target={target}\n");
    for (i, j) in phi.assignment().iter().enumerate() {
        let _ = writeln!(out, "{i} -> {j}");
    }
    out
}

/// Reads a vertex map and the source/target names from its header.
pub fn read_map(text: &str) -> Result<(SimplicialMap, String, String), FormatError> {
    let header = parse_header(text.lines().next(), "map")?;
    let source: String = header_value(&header, "source")?;
    let target: String = header_value(&header, "target")?;
    let mut assignment = Vec::new();
    for (line, l) in data_lines(text) {
        let bad = |m: &str| FormatError::Parse { line, message: m.to_owned() };
        let (i, j) = l.split_once("->").ok_or_else(|| bad("expected `i -> j`"))?;
        let i: usize = i.trim().parse().map_err(|_| bad("bad source index"))?;
        let j: u32 = j.trim().parse().map_err(|_| bad("bad target index"))?;
        if i != assignment.len() {
            return Err(bad("source indices must be listed in order from 0"));
        }
        assignment.push(j);
    }
    Ok((SimplicialMap::new(assignment), source, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let p = PointCloud::from_rows(&[[0.1, -2.5], [1e-17, 3.0]]).unwrap();
        let text = write_points(&p);
        assert!(text.starts_with("# dim=2 count=2\n"));
        assert_eq!(read_points(&text).unwrap(), p);
        assert!(read_points("# dim=2 count=1\n1,2,3\n").is_err());
        assert!(read_points("1,2\n").is_err());
    }

    #[test]
    fn complex_round_trip() {
        let k = SimplicialComplex::closure(4, 2, [Simplex::new(vec![0, 1, 2]).unwrap(), Simplex::new(vec![2, 3]).unwrap()])
            .unwrap();
        let text = write_complex(&k, 0.25);
        assert!(text.starts_with("# cech epsilon=0.25 dmax=2 nverts=4\n"));
        let (back, eps) = read_complex(&text).unwrap();
        assert_eq!(back, k);
        assert_eq!(eps, 0.25);
    }

    #[test]
    fn map_round_trip() {
        let phi = SimplicialMap::new(vec![2, 0, 1]);
        let text = write_map(&phi, "x.cx", "y.cx");
        assert!(text.contains("1 -> 0\n"));
        let (back, s, t) = read_map(&text).unwrap();
        assert_eq!((back, s.as_str(), t.as_str()), (phi, "x.cx", "y.cx"));
        assert!(read_map("# map source=a target=b\n1 -> 0\n").is_err());
    }
}
