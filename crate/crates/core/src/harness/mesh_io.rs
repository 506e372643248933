//! Mesh state files and OFF export of the discrete surface.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{Discretization, FeSpace};
use crate::geometry::chart::MacroSurface;
use crate::geometry::surfaces::SurfaceRegistry;
use crate::mesh::{ConformingMesh, DyadicPoint, ParametricSimplex, PointKey, DYADIC_BITS};

const STATE_MAGIC: &str = "surface-afem-state 1";

/// A saved leaf mesh with the surface it lives on and the polynomial degree.
#[derive(Debug, Clone)]
pub struct MeshState {
    pub surface: String,
    pub degree: usize,
    pub leaves: Vec<ParametricSimplex>,
}

impl MeshState {
    pub fn of(mesh: &ConformingMesh, surface: &MacroSurface, degree: usize) -> Self {
        MeshState {
            surface: surface.name.clone(),
            degree,
            leaves: mesh.leaves().iter().map(|&id| *mesh.element(id)).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{STATE_MAGIC}");
        let _ = writeln!(s, "surface {}", self.surface);
        let _ = writeln!(s, "degree {}", self.degree);
        let _ = writeln!(s, "leaves {}", self.leaves.len());
        for l in &self.leaves {
            let [a, b, c] = l.vertices;
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {}",
                l.macro_id, a.x, a.y, b.x, b.y, c.x, c.y
            );
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            col: 1,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| {
            lines
                .next()
                .map(|(i, l)| (i + 1, l))
                .ok_or_else(|| err(0, &format!("unexpected end of file, expected {what}")))
        };
        let (i, magic) = next("header")?;
        if magic.trim() != STATE_MAGIC {
            return Err(err(i, "not a mesh state file"));
        }
        let mut tagged = |tag: &str| -> Result<(usize, String)> {
            let (i, l) = next(tag)?;
            l.strip_prefix(tag)
                .and_then(|r| r.strip_prefix(' '))
                .map(|r| (i, r.trim().to_string()))
                .ok_or_else(|| err(i, &format!("expected `{tag} ...`")))
        };
        let (_, surface) = tagged("surface")?;
        let (i, degree) = tagged("degree")?;
        let degree = degree.parse().map_err(|_| err(i, "bad degree"))?;
        let (i, count) = tagged("leaves")?;
        let count: usize = count.parse().map_err(|_| err(i, "bad leaf count"))?;
        let mut leaves = Vec::with_capacity(count);
        for _ in 0..count {
            let (i, l) = next("leaf")?;
            let v: Vec<u64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(i, "bad leaf record"))?;
            if v.len() != 7 {
                return Err(err(i, "leaf record needs 7 integers"));
            }
            leaves.push(ParametricSimplex {
                macro_id: v[0] as usize,
                generation: 0,
                vertices: [
                    DyadicPoint::new(v[1], v[2]),
                    DyadicPoint::new(v[3], v[4]),
                    DyadicPoint::new(v[5], v[6]),
                ],
            });
        }
        Ok(MeshState {
            surface,
            degree,
            leaves,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            col: 0,
            msg: e.to_string(),
        })?;
        Self::parse(&text, path)
    }

    /// Resolves the surface by name and rebuilds the leaf mesh.
    pub fn restore(&self, registry: &SurfaceRegistry) -> Result<(MacroSurface, ConformingMesh)> {
        let surface = registry.get(&self.surface)?;
        let mesh =
            ConformingMesh::from_leaves(Arc::clone(surface.topology()), self.leaves.clone())?;
        Ok((surface, mesh))
    }
}

/// Identity of a tessellation vertex, shared between neighbouring leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum TessKey {
    Point(PointKey),
    Scaled { patch: usize, x: u64, y: u64 },
}

/// ASCII OFF text of `X_T(Ω)`, each leaf split into `4^level` flat triangles.
pub fn surface_off(
    mesh: &ConformingMesh,
    disc: &Discretization,
    space: &FeSpace,
    level: u32,
) -> Result<String> {
    if level > 62 - DYADIC_BITS {
        return Err(Error::Range {
            key: "level".into(),
            msg: format!("must be at most {}", 62 - DYADIC_BITS),
        });
    }
    let m = 1u64 << level;
    let one = 1u64 << (DYADIC_BITS + level);
    let topo = mesh.topology();
    let mut index: HashMap<TessKey, usize> = HashMap::new();
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (leaf, &id) in mesh.leaves().iter().enumerate() {
        let s = mesh.element(id);
        let nodes = space.interpolant.element_nodes(leaf);
        let [a, b, c] = s.vertices;
        let mut grid = |i: u64, j: u64| -> usize {
            let coord = |a: u64, b: u64, c: u64| -> u64 {
                let v = m as i128 * a as i128
                    + i as i128 * (b as i128 - a as i128)
                    + j as i128 * (c as i128 - a as i128);
                v as u64
            };
            let (x, y) = (coord(a.x, b.x, c.x), coord(a.y, b.y, c.y));
            let key = match topo.point_key_scaled(s.macro_id, x, y, one) {
                PointKey::Interior { .. } => TessKey::Scaled {
                    patch: s.macro_id,
                    x,
                    y,
                },
                k => TessKey::Point(k),
            };
            *index.entry(key).or_insert_with(|| {
                let xi = [i as f64 / m as f64, j as f64 / m as f64];
                let e = disc.basis.eval(xi);
                let p = (0..e.len).fold(nalgebra::Vector3::zeros(), |acc, k| {
                    acc + nodes[k] * e.values[k]
                });
                vertices.push([p.x, p.y, p.z]);
                vertices.len() - 1
            })
        };
        for j in 0..m {
            for i in 0..m - j {
                faces.push([grid(i, j), grid(i + 1, j), grid(i, j + 1)]);
                if i + j + 1 < m {
                    faces.push([grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)]);
                }
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "OFF");
    let _ = writeln!(out, "{} {} 0", vertices.len(), faces.len());
    for v in &vertices {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    for f in &faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    Ok(out)
}

pub fn export_surface_off(
    mesh: &ConformingMesh,
    disc: &Discretization,
    space: &FeSpace,
    path: &Path,
    level: u32,
) -> Result<()> {
    std::fs::write(path, surface_off(mesh, disc, space, level)?)?;
    Ok(())
}

/// Parsed OFF counts and data, for validating exports.
#[derive(Debug, Clone, PartialEq)]
pub struct OffMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

pub fn parse_off(text: &str) -> Result<OffMesh> {
    let bad = |msg: &str| Error::Parse {
        path: Default::default(),
        line: 0,
        col: 0,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some("OFF") {
        return Err(bad("missing OFF header"));
    }
    let counts: Vec<usize> = lines
        .next()
        .ok_or_else(|| bad("missing counts"))?
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("bad counts"))?;
    let [nv, nf, _] = counts[..] else {
        return Err(bad("counts line needs three integers"));
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let v: Vec<f64> = lines
            .next()
            .ok_or_else(|| bad("missing vertex"))?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("bad vertex"))?;
        let [x, y, z] = v[..] else {
            return Err(bad("vertex needs three coordinates"));
        };
        vertices.push([x, y, z]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let f: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing face"))?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("bad face"))?;
        let [3, a, b, c] = f[..] else {
            return Err(bad("face must be a triangle"));
        };
        if a.max(b).max(c) >= nv {
            return Err(bad("face index out of range"));
        }
        faces.push([a, b, c]);
    }
    if lines.next().is_some() {
        return Err(bad("trailing data"));
    }
    Ok(OffMesh { vertices, faces })
}
