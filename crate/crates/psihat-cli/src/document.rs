//! JSON documents for H-triangulations and state-sum results.

use std::collections::BTreeMap;

use num_complex::Complex64;
use psihat::cyclic_algebra::{group_inv, GroupElement, RootData};
use psihat::state_sum::{canonical_rep, qtilde_order, InvariantValue};
use psihat::triangulation::{
    Charge, GColoring, Gluing, HTriangulation, HamLink, Slot, TriComplex, EDGE_CORNERS,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetDoc {
    pub orientation: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingDoc {
    pub a: [usize; 2],
    pub b: [usize; 2],
    pub corner_map: [[usize; 2]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorDoc {
    pub edge: [usize; 2],
    pub from_corner: usize,
    pub g: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeDoc {
    pub tet: usize,
    pub edge_index: usize,
    pub doubled: i64,
}

/// A triangulation with its link and optional coloring and charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangulationDoc {
    pub tetrahedra: Vec<TetDoc>,
    pub gluings: Vec<GluingDoc>,
    /// Names of the corners of each tetrahedron; informative only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_labels: Option<Vec<[usize; 4]>>,
    /// Vertex order as a list of (tet, corner) representatives, lowest first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_order: Option<Vec<[usize; 2]>>,
    pub link: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<Vec<ColorDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<Vec<ChargeDoc>>,
}

fn bad(msg: String) -> CliError {
    CliError::input(msg)
}

fn cell(cx: &TriComplex, tet: usize, what: &str, idx: usize, limit: usize) -> Result<(), CliError> {
    if tet >= cx.n_tets() || idx >= limit {
        return Err(bad(format!("{what} [{tet}, {idx}] does not exist")));
    }
    Ok(())
}

impl TriangulationDoc {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(format!("cannot parse triangulation document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    /// Builds and validates the H-triangulation described by the document.
    pub fn load(&self) -> Result<HTriangulation, CliError> {
        let orientation = self.tetrahedra.iter().map(|t| t.orientation).collect();
        let gluings = self
            .gluings
            .iter()
            .map(|g| Gluing {
                a: Slot::new(g.a[0], g.a[1]),
                b: Slot::new(g.b[0], g.b[1]),
                corner_map: g.corner_map.map(|[x, y]| (x, y)),
            })
            .collect();
        let mut complex = TriComplex::from_parts(orientation, gluings)?;
        if let Some(labels) = &self.vertex_labels {
            if labels.len() != complex.n_tets() {
                return Err(bad(format!("vertex_labels has {} rows for {} tetrahedra", labels.len(), complex.n_tets())));
            }
        }
        if let Some(order) = &self.vertex_order {
            let mut classes = Vec::with_capacity(order.len());
            for &[t, c] in order {
                cell(&complex, t, "vertex", c, 4)?;
                classes.push(complex.vertex(t, c));
            }
            complex = complex.with_vertex_order(&classes)?;
        }
        let mut link = HamLink::default();
        for &[t, e] in &self.link {
            cell(&complex, t, "link edge", e, 6)?;
            link.edges.insert(complex.edge(t, e));
        }
        let coloring = match &self.coloring {
            None => None,
            Some(entries) => {
                let mut values: Vec<Option<(usize, GroupElement)>> = vec![None; complex.n_edges()];
                for c in entries {
                    let [t, e] = c.edge;
                    cell(&complex, t, "colored edge", e, 6)?;
                    let (p, q) = EDGE_CORNERS[e];
                    if c.from_corner != p && c.from_corner != q {
                        return Err(bad(format!("corner {} is not an end of edge [{t}, {e}]", c.from_corner)));
                    }
                    let class = complex.edge(t, e);
                    let g = GroupElement { x: c.g[0], y: c.g[1] };
                    let from = complex.vertex(t, c.from_corner);
                    let to = complex.vertex(t, p + q - c.from_corner);
                    let value = match values[class] {
                        Some((v, old)) => {
                            let seen = if v == from { g } else { group_inv(g) };
                            if !seen.approx_eq(old, 1e-10) || (v != from && v != to) {
                                return Err(bad(format!("edge [{t}, {e}] is colored inconsistently")));
                            }
                            (v, old)
                        }
                        None => (from, g),
                    };
                    values[class] = Some(value);
                }
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(e, v)| v.ok_or_else(|| bad(format!("edge class {e} has no color"))))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(GColoring { values })
            }
        };
        let charge = match &self.charge {
            None => None,
            Some(entries) => {
                let triples: Vec<(usize, usize, i64)> = entries.iter().map(|c| (c.tet, c.edge_index, c.doubled)).collect();
                Some(Charge::from_entries(complex.n_tets(), &triples)?)
            }
        };
        let h = HTriangulation { complex, link, charge, coloring };
        h.validate()?;
        Ok(h)
    }

    /// The document of an H-triangulation. Every cell is referred to by its first
    /// incidence, and the vertex order is written out.
    pub fn save(h: &HTriangulation) -> Self {
        let cx = &h.complex;
        let tetrahedra = cx.orientations().iter().map(|&o| TetDoc { orientation: o }).collect();
        let gluings = cx
            .gluings()
            .iter()
            .map(|g| GluingDoc {
                a: [g.a.tet, g.a.face],
                b: [g.b.tet, g.b.face],
                corner_map: g.corner_map.map(|(x, y)| [x, y]),
            })
            .collect();
        let mut first_corner: BTreeMap<usize, [usize; 2]> = BTreeMap::new();
        for t in 0..cx.n_tets() {
            for c in 0..4 {
                first_corner.entry(cx.vertex(t, c)).or_insert([t, c]);
            }
        }
        let vertex_labels = (0..cx.n_tets()).map(|t| [0, 1, 2, 3].map(|c| cx.rank(cx.vertex(t, c)))).collect();
        let vertex_order = cx.vertex_order().iter().map(|v| first_corner[v]).collect();
        let link = h
            .link
            .edges
            .iter()
            .map(|&e| {
                let (t, le) = cx.edge_incidences(e)[0];
                [t, le]
            })
            .collect();
        let coloring = h.coloring.as_ref().map(|phi| {
            (0..cx.n_edges())
                .map(|e| {
                    let (t, le) = cx.edge_incidences(e)[0];
                    let (p, q) = EDGE_CORNERS[le];
                    let g = phi.color(cx, t, p, q);
                    ColorDoc { edge: [t, le], from_corner: p, g: [g.x, g.y] }
                })
                .collect()
        });
        let charge = h.charge.as_ref().map(|c| {
            (0..cx.n_tets())
                .flat_map(|t| (0..3).map(move |e| (t, e)))
                .map(|(t, e)| ChargeDoc { tet: t, edge_index: e, doubled: c.doubled[t][e] })
                .collect()
        });
        Self {
            tetrahedra,
            gluings,
            vertex_labels: Some(vertex_labels),
            vertex_order: Some(vertex_order),
            link,
            coloring,
            charge,
        }
    }
}

/// The reported value of a state sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub value: [f64; 2],
    pub modulus: f64,
    pub reduced_arg: f64,
    pub qtilde_order: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

impl ResultDoc {
    pub fn new(v: &InvariantValue, rd: &RootData) -> Result<Self, CliError> {
        let (modulus, reduced_arg) = canonical_rep(v.value, rd)?;
        Ok(Self {
            value: [v.value.re, v.value.im],
            modulus,
            reduced_arg,
            qtilde_order: qtilde_order(rd, 1e-9),
            n: v.n,
        })
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value[0], self.value[1])
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(format!("cannot parse result document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}
