//! ASCII Gmsh MSH v2.2 subset: `$MeshFormat`, `$Nodes`, `$Elements`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{BackgroundMesh, Cell, CellKind};
use crate::error::{Error, Result};

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

/// Topological dimension of a Gmsh element type, for the types we may meet.
fn gmsh_type_dim(t: u32) -> Option<usize> {
    match t {
        15 => Some(0),
        1 | 8 | 26 | 27 | 28 => Some(1),
        2 | 3 | 9 | 10 | 16 | 20 | 21 | 22 | 23 | 24 | 25 => Some(2),
        4..=7 | 11..=14 | 17..=19 | 29..=31 | 92 | 93 => Some(3),
        _ => None,
    }
}

fn supported_kind(t: u32) -> Option<CellKind> {
    match t {
        2 => Some(CellKind::Tri),
        3 => Some(CellKind::Quad),
        4 => Some(CellKind::Tet),
        5 => Some(CellKind::Hex),
        _ => None,
    }
}

pub fn read_msh(path: impl AsRef<Path>) -> Result<BackgroundMesh> {
    let text = std::fs::read_to_string(path)?;
    read_msh_str(&text)
}

struct RawElement {
    line: usize,
    kind_id: u32,
    tag: Option<u32>,
    nodes: Vec<u64>,
}

pub fn read_msh_str(text: &str) -> Result<BackgroundMesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| -> Result<(usize, &str)> {
        loop {
            match lines.next() {
                Some((_, "")) => continue,
                Some(l) => return Ok(l),
                None => return parse_err(0, format!("unexpected end of file, expected {what}")),
            }
        }
    };

    let mut saw_format = false;
    let mut nodes: Vec<[f64; 3]> = Vec::new();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut elements: Vec<RawElement> = Vec::new();
    let mut saw_nodes = false;
    let mut saw_elements = false;

    while let Ok((ln, l)) = next("section") {
        match l {
            "$MeshFormat" => {
                let (ln, header) = next("format header")?;
                let mut it = header.split_whitespace();
                let version = it.next().unwrap_or("");
                if !version.starts_with("2.") {
                    return parse_err(ln, format!("unsupported MSH version {version:?}"));
                }
                if it.next() != Some("0") {
                    return parse_err(ln, "only ASCII MSH files are supported");
                }
                let (ln, end) = next("$EndMeshFormat")?;
                if end != "$EndMeshFormat" {
                    return parse_err(ln, "expected $EndMeshFormat");
                }
                saw_format = true;
            }
            "$Nodes" => {
                if !saw_format {
                    return parse_err(ln, "$Nodes before $MeshFormat");
                }
                let (ln, count) = next("node count")?;
                let count: usize = count
                    .parse()
                    .or_else(|_| parse_err(ln, format!("bad node count {count:?}")))?;
                nodes.reserve(count);
                for _ in 0..count {
                    let (ln, l) = next("node")?;
                    let fields: Vec<&str> = l.split_whitespace().collect();
                    if fields.len() != 4 {
                        return parse_err(ln, "node line must be `id x y z`");
                    }
                    let id: u64 = fields[0]
                        .parse()
                        .or_else(|_| parse_err(ln, format!("bad node id {:?}", fields[0])))?;
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = fields[k + 1].parse().or_else(|_| {
                            parse_err(ln, format!("bad coordinate {:?}", fields[k + 1]))
                        })?;
                    }
                    if node_index.insert(id, nodes.len()).is_some() {
                        return parse_err(ln, format!("duplicate node {id}"));
                    }
                    nodes.push(p);
                }
                let (ln, end) = next("$EndNodes")?;
                if end != "$EndNodes" {
                    return parse_err(ln, "expected $EndNodes");
                }
                saw_nodes = true;
            }
            "$Elements" => {
                if !saw_format {
                    return parse_err(ln, "$Elements before $MeshFormat");
                }
                let (ln, count) = next("element count")?;
                let count: usize = count
                    .parse()
                    .or_else(|_| parse_err(ln, format!("bad element count {count:?}")))?;
                for _ in 0..count {
                    let (ln, l) = next("element")?;
                    let nums: Vec<u64> = l
                        .split_whitespace()
                        .map(|s| s.parse::<u64>())
                        .collect::<std::result::Result<_, _>>()
                        .or_else(|_| parse_err(ln, "element line must be integers"))?;
                    if nums.len() < 3 {
                        return parse_err(ln, "truncated element line");
                    }
                    let ntags = nums[2] as usize;
                    if nums.len() < 3 + ntags {
                        return parse_err(ln, "truncated element tags");
                    }
                    elements.push(RawElement {
                        line: ln,
                        kind_id: nums[1] as u32,
                        tag: (ntags > 0).then(|| nums[3] as u32),
                        nodes: nums[3 + ntags..].to_vec(),
                    });
                }
                let (ln, end) = next("$EndElements")?;
                if end != "$EndElements" {
                    return parse_err(ln, "expected $EndElements");
                }
                saw_elements = true;
            }
            s if s.starts_with('$') => {
                // skip unknown sections
                let end = format!("$End{}", &s[1..]);
                loop {
                    let (_, l) = next(&end)?;
                    if l == end {
                        break;
                    }
                }
            }
            _ => return parse_err(ln, format!("unexpected line {l:?}")),
        }
    }
    if !saw_format {
        return parse_err(1, "missing $MeshFormat header");
    }
    if !saw_nodes || !saw_elements {
        return parse_err(0, "missing $Nodes or $Elements section");
    }

    let mut top_dim = 0;
    for e in &elements {
        match gmsh_type_dim(e.kind_id) {
            Some(d) => top_dim = top_dim.max(d),
            None => return parse_err(e.line, format!("unknown element type {}", e.kind_id)),
        }
    }
    if top_dim < 2 {
        return parse_err(0, "no 2D or 3D elements");
    }

    let mut cells = Vec::new();
    let mut material = Vec::new();
    let mut any_tag = false;
    for e in elements.iter().filter(|e| gmsh_type_dim(e.kind_id) == Some(top_dim)) {
        let kind = match supported_kind(e.kind_id) {
            Some(k) => k,
            None => {
                return parse_err(e.line, format!("unsupported element type {}", e.kind_id))
            }
        };
        if e.nodes.len() != kind.n_vertices() {
            return parse_err(
                e.line,
                format!("element has {} nodes, expected {}", e.nodes.len(), kind.n_vertices()),
            );
        }
        let mut vertices = Vec::with_capacity(e.nodes.len());
        for n in &e.nodes {
            match node_index.get(n) {
                Some(&i) => vertices.push(i),
                None => return parse_err(e.line, format!("unknown node {n}")),
            }
        }
        any_tag |= e.tag.is_some();
        material.push(e.tag.unwrap_or(0));
        cells.push(Cell { kind, vertices });
    }
    if top_dim == 2 {
        for p in nodes.iter_mut() {
            p[2] = 0.0;
        }
    }
    BackgroundMesh::new(top_dim, nodes, cells, any_tag.then_some(material))
}

fn gmsh_type(kind: CellKind) -> u32 {
    match kind {
        CellKind::Tri => 2,
        CellKind::Quad => 3,
        CellKind::Tet => 4,
        CellKind::Hex => 5,
    }
}

pub fn write_msh(mesh: &BackgroundMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, msh_string(mesh))?;
    Ok(())
}

pub(crate) fn msh_string(mesh: &BackgroundMesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {:e} {:e} {:e}", i + 1, p[0], p[1], p[2]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.n_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        let tag = mesh.material().map_or(0, |m| m[c]);
        let _ = write!(s, "{} {} 2 {} {}", c + 1, gmsh_type(cell.kind), tag, tag);
        for v in &cell.vertices {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    }
    s.push_str("$EndElements\n");
    s
}
