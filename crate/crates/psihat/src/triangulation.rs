//! Quasi-regular triangulations of closed oriented 3-manifolds with Hamiltonian
//! links, half-integer charges, G-colorings and gauges, and the H-Pachner and
//! H-bubble moves with charge and coloring transport.
//!
//! Local conventions: corners 0..3; face f is opposite corner f; edge indices
//! 0..5 enumerate the corner pairs (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) and edge e
//! is opposite edge 5 - e. A charge is stored per tetrahedron as three doubled
//! values, one per pair of opposite edges, indexed by `min(e, 5 - e)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cyclic_algebra::{group_inv, group_mul, random_element, well_inside, GroupElement};
use crate::error::{Error, Result};
use crate::intsolve::{min_norm_solution, reduce_norm, solve_integer};
use crate::psi_operators::HalfInt;

/// Corner pairs of the six local edges.
pub const EDGE_CORNERS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Tolerance of the cocycle condition, per coordinate and relative to the factors.
pub const COCYCLE_TOL: f64 = 1e-10;

/// Local index of the edge joining corners `a != b`.
pub fn edge_index(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("no edge between corners {a} and {b}"),
    }
}

pub fn opposite_edge(e: usize) -> usize {
    5 - e
}

/// Index of the pair of opposite edges containing `e`.
pub fn charge_pair(e: usize) -> usize {
    e.min(5 - e)
}

/// The corners of face `f` in increasing order.
pub fn face_corners(f: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for c in 0..4 {
        if c != f {
            out[k] = c;
            k += 1;
        }
    }
    out
}

/// Sign of a permutation of 0..4 given as its list of images.
pub fn perm_sign(p: &[usize; 4]) -> i8 {
    let mut s = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// A face of a tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub tet: usize,
    pub face: usize,
}

impl Slot {
    pub fn new(tet: usize, face: usize) -> Self {
        Self { tet, face }
    }
}

/// Identification of face `a` with face `b`; each pair maps a corner of `a.tet`
/// to a corner of `b.tet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gluing {
    pub a: Slot,
    pub b: Slot,
    pub corner_map: [(usize, usize); 3],
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Class ids numbered by first appearance in 0..n.
    fn classes(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut id = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut count = 0;
        for x in 0..n {
            let r = self.find(x);
            if id[r] == usize::MAX {
                id[r] = count;
                count += 1;
            }
            out[x] = id[r];
        }
        (out, count)
    }
}

/// A validated closed, oriented, quasi-regular triangulation with its cell classes
/// and a total order on its vertices.
#[derive(Debug, Clone)]
pub struct TriComplex {
    orientation: Vec<i8>,
    gluings: Vec<Gluing>,
    partner: Vec<[(Slot, [usize; 4]); 4]>,
    vertex_of: Vec<[usize; 4]>,
    edge_of: Vec<[usize; 6]>,
    face_of: Vec<[usize; 4]>,
    n_vertices: usize,
    n_edges: usize,
    n_faces: usize,
    edge_ends: Vec<(usize, usize)>,
    edge_incidences: Vec<Vec<(usize, usize)>>,
    face_slots: Vec<[Slot; 2]>,
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl TriComplex {
    /// Builds and validates a complex from orientations and gluings.
    pub fn from_parts(orientation: Vec<i8>, gluings: Vec<Gluing>) -> Result<Self> {
        let t = orientation.len();
        if t == 0 {
            return Err(Error::Invalid("a triangulation needs at least one tetrahedron".into()));
        }
        if let Some(i) = orientation.iter().position(|&o| o != 1 && o != -1) {
            return Err(Error::Invalid(format!("tetrahedron {i} has orientation {}", orientation[i])));
        }
        let mut partner: Vec<[Option<(Slot, [usize; 4])>; 4]> = vec![[None; 4]; t];
        for g in &gluings {
            for s in [g.a, g.b] {
                if s.tet >= t || s.face >= 4 {
                    return Err(Error::BadGluing { tet: s.tet, face: s.face });
                }
            }
            let bad = Error::BadGluing { tet: g.a.tet, face: g.a.face };
            if g.a == g.b {
                return Err(bad);
            }
            let mut pi = [usize::MAX; 4];
            pi[g.a.face] = g.b.face;
            for &(x, y) in &g.corner_map {
                if x >= 4 || y >= 4 || x == g.a.face || y == g.b.face || pi[x] != usize::MAX {
                    return Err(bad);
                }
                pi[x] = y;
            }
            let mut seen = [false; 4];
            for &y in &pi {
                if y >= 4 || seen[y] {
                    return Err(bad);
                }
                seen[y] = true;
            }
            if partner[g.a.tet][g.a.face].is_some() {
                return Err(bad);
            }
            if partner[g.b.tet][g.b.face].is_some() {
                return Err(Error::BadGluing { tet: g.b.tet, face: g.b.face });
            }
            if orientation[g.a.tet] * orientation[g.b.tet] * perm_sign(&pi) != -1 {
                return Err(Error::NotOrientable { tet: g.a.tet, face: g.a.face });
            }
            let mut inv = [0; 4];
            for (i, &y) in pi.iter().enumerate() {
                inv[y] = i;
            }
            partner[g.a.tet][g.a.face] = Some((g.b, pi));
            partner[g.b.tet][g.b.face] = Some((g.a, inv));
        }
        let mut full = Vec::with_capacity(t);
        for (tet, row) in partner.iter().enumerate() {
            let mut r = [(Slot::new(0, 0), [0; 4]); 4];
            for face in 0..4 {
                r[face] = row[face].ok_or(Error::NotClosed { tet, face })?;
            }
            full.push(r);
        }

        let mut vdsu = Dsu::new(4 * t);
        let mut edsu = Dsu::new(6 * t);
        for g in &gluings {
            let pi = full[g.a.tet][g.a.face].1;
            let fc = face_corners(g.a.face);
            for &c in &fc {
                vdsu.union(4 * g.a.tet + c, 4 * g.b.tet + pi[c]);
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    let (x, y) = (fc[i], fc[j]);
                    edsu.union(6 * g.a.tet + edge_index(x, y), 6 * g.b.tet + edge_index(pi[x], pi[y]));
                }
            }
        }
        let (vc, n_vertices) = vdsu.classes();
        let (ec, n_edges) = edsu.classes();
        let vertex_of: Vec<[usize; 4]> = (0..t).map(|i| [vc[4 * i], vc[4 * i + 1], vc[4 * i + 2], vc[4 * i + 3]]).collect();
        let edge_of: Vec<[usize; 6]> = (0..t)
            .map(|i| {
                let mut r = [0; 6];
                for e in 0..6 {
                    r[e] = ec[6 * i + e];
                }
                r
            })
            .collect();

        let mut face_of = vec![[usize::MAX; 4]; t];
        let mut face_slots = Vec::new();
        for tet in 0..t {
            for face in 0..4 {
                if face_of[tet][face] == usize::MAX {
                    let (p, _) = full[tet][face];
                    let id = face_slots.len();
                    face_of[tet][face] = id;
                    face_of[p.tet][p.face] = id;
                    face_slots.push([Slot::new(tet, face), p]);
                }
            }
        }

        for tet in 0..t {
            for (e, &(a, b)) in EDGE_CORNERS.iter().enumerate() {
                if vertex_of[tet][a] == vertex_of[tet][b] {
                    return Err(Error::NotQuasiRegular { tet, edge: e });
                }
            }
        }

        let mut edge_incidences = vec![Vec::new(); n_edges];
        let mut edge_ends = vec![(0, 0); n_edges];
        for tet in 0..t {
            for (e, &(a, b)) in EDGE_CORNERS.iter().enumerate() {
                let id = edge_of[tet][e];
                if edge_incidences[id].is_empty() {
                    edge_ends[id] = (vertex_of[tet][a], vertex_of[tet][b]);
                }
                edge_incidences[id].push((tet, e));
            }
        }

        // Each vertex link must be a 2-sphere: V - E + F = 2 with F corners, E = 3F/2.
        let mut corners = vec![0i64; n_vertices];
        for row in &vertex_of {
            for &v in row {
                corners[v] += 1;
            }
        }
        let mut degree = vec![0i64; n_vertices];
        for &(a, b) in &edge_ends {
            degree[a] += 1;
            degree[b] += 1;
        }
        for v in 0..n_vertices {
            let euler = degree[v] - corners[v] / 2;
            if corners[v] % 2 != 0 || euler != 2 {
                return Err(Error::NotManifold { vertex: v, euler });
            }
        }

        let order: Vec<usize> = (0..n_vertices).collect();
        Ok(Self {
            orientation,
            gluings,
            partner: full,
            vertex_of,
            edge_of,
            face_of,
            n_vertices,
            n_edges,
            n_faces: face_slots.len(),
            edge_ends,
            edge_incidences,
            face_slots,
            rank: order.clone(),
            order,
        })
    }

    pub fn n_tets(&self) -> usize {
        self.orientation.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn orientation(&self, tet: usize) -> i8 {
        self.orientation[tet]
    }

    pub fn orientations(&self) -> &[i8] {
        &self.orientation
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    /// The slot glued to `s` and the corner permutation from `s.tet` to it.
    pub fn partner(&self, s: Slot) -> (Slot, [usize; 4]) {
        self.partner[s.tet][s.face]
    }

    pub fn vertex(&self, tet: usize, corner: usize) -> usize {
        self.vertex_of[tet][corner]
    }

    pub fn edge(&self, tet: usize, e: usize) -> usize {
        self.edge_of[tet][e]
    }

    pub fn face(&self, tet: usize, f: usize) -> usize {
        self.face_of[tet][f]
    }

    /// Endpoints of an edge class, as seen from its first incidence.
    pub fn edge_ends(&self, edge: usize) -> (usize, usize) {
        self.edge_ends[edge]
    }

    /// All (tet, local edge) incidences of an edge class.
    pub fn edge_incidences(&self, edge: usize) -> &[(usize, usize)] {
        &self.edge_incidences[edge]
    }

    pub fn face_slots(&self, face: usize) -> [Slot; 2] {
        self.face_slots[face]
    }

    /// Vertex classes in increasing order.
    pub fn vertex_order(&self) -> &[usize] {
        &self.order
    }

    pub fn rank(&self, vertex: usize) -> usize {
        self.rank[vertex]
    }

    /// The same complex with another total order on the vertices.
    pub fn with_vertex_order(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_vertices];
        if order.len() != self.n_vertices {
            return Err(Error::Invalid(format!("vertex order has {} entries, expected {}", order.len(), self.n_vertices)));
        }
        for &v in order {
            if v >= self.n_vertices || seen[v] {
                return Err(Error::Invalid("vertex order is not a permutation".into()));
            }
            seen[v] = true;
        }
        let mut out = self.clone();
        out.order = order.to_vec();
        for (r, &v) in order.iter().enumerate() {
            out.rank[v] = r;
        }
        Ok(out)
    }

    /// Corners of `tet` sorted by the rank of their vertices.
    pub fn sorted_corners(&self, tet: usize) -> [usize; 4] {
        let mut c = [0, 1, 2, 3];
        c.sort_by_key(|&x| self.rank[self.vertex_of[tet][x]]);
        c
    }

    /// Orientation sign of the ordered corner tuple `c` of `tet`.
    pub fn tuple_orientation(&self, tet: usize, c: [usize; 4]) -> i8 {
        self.orientation[tet] * perm_sign(&c)
    }

    /// True when the corners in increasing vertex order form a positive basis.
    pub fn is_right_oriented(&self, tet: usize) -> bool {
        self.tuple_orientation(tet, self.sorted_corners(tet)) > 0
    }

    /// Edge classes of a vertex class, with their other endpoint.
    pub fn edges_at(&self, vertex: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (e, &(a, b)) in self.edge_ends.iter().enumerate() {
            if a == vertex {
                out.push((e, b));
            } else if b == vertex {
                out.push((e, a));
            }
        }
        out
    }
}

/// The boundary of the 4-simplex: tetrahedra T_r = {0..4} \ {r} with sorted
/// corners and orientation (-1)^r. Vertex classes are renumbered so that class v
/// is the simplex vertex v.
pub fn boundary_4simplex() -> TriComplex {
    let tets: Vec<Vec<usize>> = (0..5).map(|r| (0..5).filter(|&v| v != r).collect()).collect();
    let orientation: Vec<i8> = (0..5).map(|r| if r % 2 == 0 { 1 } else { -1 }).collect();
    let mut gluings = Vec::new();
    for r in 0..5 {
        for s in r + 1..5 {
            let fa = tets[r].iter().position(|&v| v == s).unwrap();
            let fb = tets[s].iter().position(|&v| v == r).unwrap();
            let mut map = [(0, 0); 3];
            for (k, &ca) in face_corners(fa).iter().enumerate() {
                let label = tets[r][ca];
                map[k] = (ca, tets[s].iter().position(|&v| v == label).unwrap());
            }
            gluings.push(Gluing { a: Slot::new(r, fa), b: Slot::new(s, fb), corner_map: map });
        }
    }
    let cx = TriComplex::from_parts(orientation, gluings).expect("boundary of the 4-simplex is valid");
    // Vertex classes appear in the order 1,2,3,4,0; order them by simplex label.
    let mut by_label = vec![0; 5];
    for (r, t) in tets.iter().enumerate() {
        for (c, &label) in t.iter().enumerate() {
            by_label[label] = cx.vertex(r, c);
        }
    }
    cx.with_vertex_order(&by_label).expect("permutation")
}

/// Vertex class of simplex label `v` in [`boundary_4simplex`].
pub fn boundary_4simplex_vertex(cx: &TriComplex, label: usize) -> usize {
    cx.vertex_order()[label]
}

/// The edge class joining two vertex classes, when it is unique.
pub fn edge_between(cx: &TriComplex, u: usize, v: usize) -> Option<usize> {
    let mut found = None;
    for (e, &(a, b)) in cx.edge_ends.iter().enumerate() {
        if (a == u && b == v) || (a == v && b == u) {
            if found.is_some() {
                return None;
            }
            found = Some(e);
        }
    }
    found
}

/// The 5-cycle link {01, 12, 23, 34, 40} on [`boundary_4simplex`].
pub fn boundary_4simplex_link(cx: &TriComplex) -> HamLink {
    let v = |l| boundary_4simplex_vertex(cx, l);
    let edges = (0..5).map(|i| edge_between(cx, v(i), v((i + 1) % 5)).expect("simplex edge")).collect();
    HamLink { edges }
}

/// The boundary of the 4-simplex with its 5-cycle link, a small charge and an
/// admissible coloring obtained as the coboundary of a random gauge.
pub fn boundary_4simplex_fixture<R: Rng + ?Sized>(rng: &mut R) -> Result<HTriangulation> {
    let complex = boundary_4simplex();
    let link = boundary_4simplex_link(&complex);
    let charge = find_charge(&complex, &link)?;
    let coloring = coboundary(&complex, &GGauge::random(complex.n_vertices(), rng));
    let coloring = make_admissible(&complex, &coloring, rng)?;
    Ok(HTriangulation { complex, link, charge: Some(charge), coloring: Some(coloring) })
}

/// A set of edge classes covering every vertex exactly twice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HamLink {
    pub edges: BTreeSet<usize>,
}

impl HamLink {
    pub fn contains(&self, edge: usize) -> bool {
        self.edges.contains(&edge)
    }
}

pub fn validate_link(cx: &TriComplex, link: &HamLink) -> Result<()> {
    let mut degree = vec![0; cx.n_vertices()];
    for &e in &link.edges {
        if e >= cx.n_edges() {
            return Err(Error::Invalid(format!("link edge {e} does not exist")));
        }
        let (a, b) = cx.edge_ends(e);
        degree[a] += 1;
        degree[b] += 1;
    }
    for v in cx.vertex_order().iter().copied() {
        if degree[v] != 2 {
            return Err(Error::NotHamiltonian { vertex: v, degree: degree[v] });
        }
    }
    Ok(())
}

/// A charge, stored as doubled values per tetrahedron and pair of opposite edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Charge {
    pub doubled: Vec<[i64; 3]>,
}

impl Charge {
    pub fn get(&self, tet: usize, e: usize) -> HalfInt {
        HalfInt::from_doubled(self.doubled[tet][charge_pair(e)])
    }

    /// Builds a charge from per-edge entries; opposite edges are filled in and must agree.
    pub fn from_entries(n_tets: usize, entries: &[(usize, usize, i64)]) -> Result<Self> {
        let mut vals: Vec<[Option<i64>; 3]> = vec![[None; 3]; n_tets];
        for &(t, e, d) in entries {
            if t >= n_tets || e >= 6 {
                return Err(Error::InvalidCharge(format!("entry ({t}, {e}) is out of range")));
            }
            let slot = &mut vals[t][charge_pair(e)];
            match slot {
                Some(old) if *old != d => {
                    return Err(Error::InvalidCharge(format!(
                        "tetrahedron {t}: edge {e} and its opposite carry different values"
                    )))
                }
                _ => *slot = Some(d),
            }
        }
        let doubled = vals
            .iter()
            .enumerate()
            .map(|(t, row)| {
                let mut r = [0; 3];
                for p in 0..3 {
                    r[p] = row[p].ok_or_else(|| {
                        Error::InvalidCharge(format!("tetrahedron {t}: edge {p} has no value"))
                    })?;
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { doubled })
    }
}

fn edge_target(link: &HamLink, e: usize) -> i64 {
    if link.contains(e) {
        0
    } else {
        2
    }
}

pub fn validate_charge(cx: &TriComplex, link: &HamLink, c: &Charge) -> Result<()> {
    if c.doubled.len() != cx.n_tets() {
        return Err(Error::InvalidCharge(format!(
            "charge covers {} tetrahedra, expected {}",
            c.doubled.len(),
            cx.n_tets()
        )));
    }
    for (t, row) in c.doubled.iter().enumerate() {
        if row.iter().sum::<i64>() != 1 {
            return Err(Error::InvalidCharge(format!("tetrahedron {t}: face sums are not 1/2")));
        }
    }
    for e in 0..cx.n_edges() {
        let s: i64 = cx.edge_incidences(e).iter().map(|&(t, le)| c.doubled[t][charge_pair(le)]).sum();
        if s != edge_target(link, e) {
            return Err(Error::InvalidCharge(format!(
                "edge {e}: charges sum to {}, expected {}",
                HalfInt::from_doubled(s),
                HalfInt::from_doubled(edge_target(link, e))
            )));
        }
    }
    Ok(())
}

/// The linear system of charges: unknowns (tet, pair) in row-major order.
fn charge_system(cx: &TriComplex, link: &HamLink) -> (Vec<Vec<i64>>, Vec<i64>) {
    let n = 3 * cx.n_tets();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for t in 0..cx.n_tets() {
        let mut r = vec![0; n];
        r[3 * t..3 * t + 3].copy_from_slice(&[1, 1, 1]);
        rows.push(r);
        rhs.push(1);
    }
    for e in 0..cx.n_edges() {
        let mut r = vec![0; n];
        for &(t, le) in cx.edge_incidences(e) {
            r[3 * t + charge_pair(le)] += 1;
        }
        rows.push(r);
        rhs.push(edge_target(link, e));
    }
    (rows, rhs)
}

fn to_charge(x: &[i64]) -> Charge {
    Charge { doubled: x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect() }
}

/// Some charge on (T, L), of small norm; the system is solved exactly over the integers.
pub fn find_charge(cx: &TriComplex, link: &HamLink) -> Result<Charge> {
    validate_link(cx, link)?;
    let (rows, rhs) = charge_system(cx, link);
    let sol = solve_integer(&rows, &rhs, 3 * cx.n_tets())
        .ok_or_else(|| Error::NoCharge("the charge equations have no half-integer solution".into()))?;
    let c = to_charge(&reduce_norm(&sol.particular, &sol.kernel));
    validate_charge(cx, link, &c)?;
    Ok(c)
}

/// A charge whose class takes the prescribed values on the given loops when this is
/// reachable, together with the values actually achieved.
pub fn find_charge_in_class(
    cx: &TriComplex,
    link: &HamLink,
    loops: &[Vec<Passage>],
    targets: &[u8],
) -> Result<(Charge, Vec<u8>)> {
    if loops.len() != targets.len() {
        return Err(Error::Invalid("one target value per loop is required".into()));
    }
    validate_link(cx, link)?;
    let n = 3 * cx.n_tets();
    let (rows, rhs) = charge_system(cx, link);
    let sol = solve_integer(&rows, &rhs, n)
        .ok_or_else(|| Error::NoCharge("the charge equations have no half-integer solution".into()))?;
    let class_of = |x: &[i64]| -> Result<Vec<u8>> { loops.iter().map(|l| loop_parity(cx, x, l)).collect() };
    let base = class_of(&sol.particular)?;
    let kernel_classes: Vec<Vec<u8>> = sol.kernel.iter().map(|k| class_of(k)).collect::<Result<_>>()?;
    // Solve sum_k t_k kernel_classes[k] = targets - base over Z/2.
    let want: Vec<u8> = base.iter().zip(targets).map(|(b, t)| (b ^ t) & 1).collect();
    let choice = solve_mod2(&kernel_classes, &want);
    let mut x = sol.particular.clone();
    if let Some(t) = &choice {
        for (k, &tk) in sol.kernel.iter().zip(t) {
            if tk == 1 {
                for (xi, ki) in x.iter_mut().zip(k) {
                    *xi += ki;
                }
            }
        }
    }
    // Even multiples of kernel vectors keep the class.
    let doubled_kernel: Vec<Vec<i64>> = sol.kernel.iter().map(|k| k.iter().map(|v| 2 * v).collect()).collect();
    let x = reduce_norm(&x, &doubled_kernel);
    let c = to_charge(&x);
    validate_charge(cx, link, &c)?;
    let achieved = class_of(&x)?;
    Ok((c, achieved))
}

/// Solves `sum_k t_k cols[k] = want` over Z/2.
fn solve_mod2(cols: &[Vec<u8>], want: &[u8]) -> Option<Vec<u8>> {
    let m = want.len();
    let d = cols.len();
    // Augmented rows: [a_{r,0} .. a_{r,d-1} | want_r]
    let mut a: Vec<Vec<u8>> = (0..m).map(|r| cols.iter().map(|c| c[r] & 1).chain([want[r] & 1]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..d {
        if let Some(p) = (row..m).find(|&r| a[r][col] == 1) {
            a.swap(row, p);
            for r in 0..m {
                if r != row && a[r][col] == 1 {
                    for k in 0..=d {
                        a[r][k] ^= a[row][k];
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
    }
    if (row..m).any(|r| a[r][d] == 1) {
        return None;
    }
    let mut t = vec![0; d];
    for (r, &c) in pivots.iter().enumerate() {
        t[c] = a[r][d];
    }
    Some(t)
}

/// The deformation vector d(e) in doubled units, per tetrahedron and pair.
///
/// In each tetrahedron around `e` with corners A, B on `e` (B the larger vertex)
/// and C, D chosen so that (A, C, D, B) is positively oriented, d(e) is -1/2 on
/// the pair {BC, AD} and +1/2 on the pair {BD, AC}.
pub fn d_vector(cx: &TriComplex, edge: usize) -> Vec<[i64; 3]> {
    let mut out = vec![[0i64; 3]; cx.n_tets()];
    for &(t, le) in cx.edge_incidences(edge) {
        let (p, q) = EDGE_CORNERS[le];
        let (a, b) = if cx.rank(cx.vertex(t, p)) < cx.rank(cx.vertex(t, q)) { (p, q) } else { (q, p) };
        let rest: Vec<usize> = (0..4).filter(|&x| x != a && x != b).collect();
        let (mut c, mut d) = (rest[0], rest[1]);
        if cx.tuple_orientation(t, [a, c, d, b]) < 0 {
            core::mem::swap(&mut c, &mut d);
        }
        out[t][charge_pair(edge_index(b, c))] -= 1;
        out[t][charge_pair(edge_index(b, d))] += 1;
    }
    out
}

/// `c + lambda d(e)`.
pub fn deform_charge(cx: &TriComplex, c: &Charge, edge: usize, lambda: i64) -> Charge {
    let d = d_vector(cx, edge);
    let doubled = c
        .doubled
        .iter()
        .zip(&d)
        .map(|(x, y)| [x[0] + lambda * y[0], x[1] + lambda * y[1], x[2] + lambda * y[2]])
        .collect();
    Charge { doubled }
}

/// One passage of a loop through a tetrahedron, entering and leaving through distinct faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Passage {
    pub tet: usize,
    pub entry: usize,
    pub exit: usize,
}

fn check_loop(cx: &TriComplex, lp: &[Passage]) -> Result<()> {
    for (i, p) in lp.iter().enumerate() {
        if p.tet >= cx.n_tets() || p.entry >= 4 || p.exit >= 4 {
            return Err(Error::BadLoop(format!("passage {i} is out of range")));
        }
        if p.entry == p.exit {
            return Err(Error::BadLoop(format!("passage {i} leaves through its entry face")));
        }
        let next = lp[(i + 1) % lp.len()];
        let (s, _) = cx.partner(Slot::new(p.tet, p.exit));
        if s != Slot::new(next.tet, next.entry) {
            return Err(Error::BadLoop(format!("passage {i} does not lead into passage {}", (i + 1) % lp.len())));
        }
    }
    Ok(())
}

fn loop_parity(cx: &TriComplex, x: &[i64], lp: &[Passage]) -> Result<u8> {
    check_loop(cx, lp)?;
    let mut s = 0i64;
    for p in lp {
        let rest: Vec<usize> = (0..4).filter(|&c| c != p.entry && c != p.exit).collect();
        s += x[3 * p.tet + charge_pair(edge_index(rest[0], rest[1]))];
    }
    Ok(s.rem_euclid(2) as u8)
}

/// The value of the class [c] in Z/2 on a closed loop of passages.
pub fn charge_class(cx: &TriComplex, c: &Charge, lp: &[Passage]) -> Result<u8> {
    let x: Vec<i64> = c.doubled.iter().flatten().copied().collect();
    loop_parity(cx, &x, lp)
}

/// The loop circling an edge class once, through the ring of tetrahedra around it.
pub fn edge_ring(cx: &TriComplex, edge: usize) -> Vec<Passage> {
    let (t0, le) = cx.edge_incidences(edge)[0];
    let (a, b) = EDGE_CORNERS[le];
    let rest: Vec<usize> = (0..4).filter(|&x| x != a && x != b).collect();
    // In the current tetrahedron the loop enters through the face opposite `d`
    // and leaves through the face opposite `c`.
    let (mut t, mut a, mut b, mut c, mut d) = (t0, a, b, rest[0], rest[1]);
    let start = (t0, d);
    let mut out = Vec::new();
    loop {
        out.push(Passage { tet: t, entry: d, exit: c });
        let (s, pi) = cx.partner(Slot::new(t, c));
        t = s.tet;
        a = pi[a];
        b = pi[b];
        c = pi[d];
        d = s.face;
        if (t, d) == start || out.len() > cx.edge_incidences(edge).len() {
            break;
        }
    }
    out
}

/// A G-coloring: per edge class, the vertex it is read from and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct GColoring {
    pub values: Vec<(usize, GroupElement)>,
}

impl GColoring {
    /// The value on the edge class `edge` oriented away from `from`.
    pub fn oriented(&self, edge: usize, from: usize) -> GroupElement {
        let (v, g) = self.values[edge];
        if v == from {
            g
        } else {
            group_inv(g)
        }
    }

    /// The value on the edge of `tet` oriented from corner `a` to corner `b`.
    pub fn color(&self, cx: &TriComplex, tet: usize, a: usize, b: usize) -> GroupElement {
        self.oriented(cx.edge(tet, edge_index(a, b)), cx.vertex(tet, a))
    }

    /// True when every edge value lies in I.
    pub fn is_admissible(&self) -> bool {
        self.values.iter().all(|(_, g)| g.in_i())
    }

    /// The product of the values along a path of (edge, start vertex) steps.
    pub fn holonomy(&self, path: &[(usize, usize)]) -> GroupElement {
        path.iter().fold(GroupElement::IDENTITY, |acc, &(e, v)| group_mul(acc, self.oriented(e, v)))
    }
}

fn approx_identity(g: GroupElement, scale: f64) -> bool {
    let tol = COCYCLE_TOL * scale.max(1.0);
    g.x.abs() <= tol && (g.y - 1.0).abs() <= tol
}

pub fn validate_coloring(cx: &TriComplex, phi: &GColoring) -> Result<()> {
    if phi.values.len() != cx.n_edges() {
        return Err(Error::InvalidColoring(format!(
            "coloring has {} edge values, expected {}",
            phi.values.len(),
            cx.n_edges()
        )));
    }
    for (e, &(v, g)) in phi.values.iter().enumerate() {
        let (a, b) = cx.edge_ends(e);
        if v != a && v != b {
            return Err(Error::InvalidColoring(format!("edge {e} is read from vertex {v}, not an endpoint")));
        }
        if !(g.y > 0.0) || !g.x.is_finite() || !g.y.is_finite() {
            return Err(Error::InvalidColoring(format!("edge {e} has value {g:?} outside G")));
        }
    }
    for t in 0..cx.n_tets() {
        for f in 0..4 {
            let [x, y, z] = face_corners(f);
            let (g1, g2, g3) = (phi.color(cx, t, x, y), phi.color(cx, t, y, z), phi.color(cx, t, z, x));
            let scale = [g1, g2, g3].iter().map(|g| g.x.abs().max(g.y)).fold(1.0, f64::max);
            if !approx_identity(group_mul(group_mul(g1, g2), g3), scale * scale * scale) {
                return Err(Error::InvalidColoring(format!("cocycle condition fails on face {f} of tetrahedron {t}")));
            }
        }
    }
    Ok(())
}

/// A G-gauge: one group element per vertex class.
#[derive(Debug, Clone, PartialEq)]
pub struct GGauge {
    pub values: Vec<GroupElement>,
}

impl GGauge {
    pub fn identity(n_vertices: usize) -> Self {
        Self { values: vec![GroupElement::IDENTITY; n_vertices] }
    }

    /// The gauge that is `g` at `v` and 1 elsewhere.
    pub fn point(n_vertices: usize, v: usize, g: GroupElement) -> Self {
        let mut s = Self::identity(n_vertices);
        s.values[v] = g;
        s
    }

    pub fn random<R: Rng + ?Sized>(n_vertices: usize, rng: &mut R) -> Self {
        Self { values: (0..n_vertices).map(|_| random_element(rng)).collect() }
    }

    /// The product gauge `(self other)(v) = self(v) other(v)`.
    pub fn compose(&self, other: &GGauge) -> GGauge {
        Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| group_mul(a, b)).collect() }
    }
}

/// `(delta Phi)(e) = delta(v-) Phi(e) delta(v+)^-1`.
pub fn gauge_transform(cx: &TriComplex, phi: &GColoring, delta: &GGauge) -> GColoring {
    let values = phi
        .values
        .iter()
        .enumerate()
        .map(|(e, &(from, g))| {
            let (a, b) = cx.edge_ends(e);
            let to = if from == a { b } else { a };
            (from, group_mul(group_mul(delta.values[from], g), group_inv(delta.values[to])))
        })
        .collect();
    GColoring { values }
}

/// The trivial coloring, all values (0, 1).
pub fn trivial_coloring(cx: &TriComplex) -> GColoring {
    GColoring { values: (0..cx.n_edges()).map(|e| (cx.edge_ends(e).0, GroupElement::IDENTITY)).collect() }
}

/// The gauge transform of the trivial coloring.
pub fn coboundary(cx: &TriComplex, delta: &GGauge) -> GColoring {
    gauge_transform(cx, &trivial_coloring(cx), delta)
}

fn bad_vertices(cx: &TriComplex, phi: &GColoring) -> Vec<usize> {
    let mut bad = BTreeSet::new();
    for (e, (_, g)) in phi.values.iter().enumerate() {
        if !well_inside(*g) {
            let (a, b) = cx.edge_ends(e);
            bad.insert(a);
            bad.insert(b);
        }
    }
    bad.into_iter().collect()
}

/// Applies random point gauges at bad vertices until every edge value is well inside I.
pub fn make_admissible<R: Rng + ?Sized>(cx: &TriComplex, phi: &GColoring, rng: &mut R) -> Result<GColoring> {
    const TRIES: usize = 1000;
    let mut cur = phi.clone();
    let mut tries = 0;
    while let Some(&v) = bad_vertices(cx, &cur).first() {
        let edges = cx.edges_at(v);
        loop {
            tries += 1;
            if tries > TRIES {
                return Err(Error::AdmissibilityFailed { tries: TRIES });
            }
            let g = random_element(rng);
            if edges.iter().all(|&(e, _)| well_inside(group_mul(g, cur.oriented(e, v)))) {
                cur = gauge_transform(cx, &cur, &GGauge::point(cx.n_vertices(), v, g));
                break;
            }
        }
    }
    Ok(cur)
}

/// An H-triangulation with optional charge and coloring.
#[derive(Debug, Clone)]
pub struct HTriangulation {
    pub complex: TriComplex,
    pub link: HamLink,
    pub charge: Option<Charge>,
    pub coloring: Option<GColoring>,
}

impl HTriangulation {
    pub fn validate(&self) -> Result<()> {
        validate_link(&self.complex, &self.link)?;
        if let Some(c) = &self.charge {
            validate_charge(&self.complex, &self.link, c)?;
        }
        if let Some(p) = &self.coloring {
            validate_coloring(&self.complex, p)?;
        }
        Ok(())
    }
}

/// A face slot of an old tetrahedron or of a tetrahedron created by a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SRef {
    Old(Slot),
    New(usize, usize),
}

/// A local rebuild: drop some tetrahedra and gluings, add tetrahedra whose
/// corners are named by vertex tokens (old vertex classes or fresh ids), and glue
/// faces by matching tokens.
struct Plan {
    removed: Vec<bool>,
    dropped: Vec<Slot>,
    new_tets: Vec<[usize; 4]>,
    gluings: Vec<(SRef, SRef)>,
    link_remove: Vec<usize>,
    link_add_old: Vec<usize>,
    link_add_new: Vec<(usize, usize, usize)>,
    color_seeds: Vec<(usize, usize, usize, GroupElement)>,
}

impl Plan {
    fn new(cx: &TriComplex) -> Self {
        Self {
            removed: vec![false; cx.n_tets()],
            dropped: Vec::new(),
            new_tets: Vec::new(),
            gluings: Vec::new(),
            link_remove: Vec::new(),
            link_add_old: Vec::new(),
            link_add_new: Vec::new(),
            color_seeds: Vec::new(),
        }
    }
}

fn face_tokens(tokens: &[usize; 4], f: usize) -> BTreeSet<usize> {
    face_corners(f).iter().map(|&c| tokens[c]).collect()
}

/// Glues every outer face of the removed tetrahedra to the unique new face with
/// the same tokens, and pairs the remaining new faces with each other.
fn auto_glue(cx: &TriComplex, plan: &mut Plan) -> Result<()> {
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let new_faces: Vec<((usize, usize), BTreeSet<usize>)> = plan
        .new_tets
        .iter()
        .enumerate()
        .flat_map(|(t, tok)| (0..4).map(move |f| ((t, f), face_tokens(tok, f))))
        .collect();
    let mut old_pairs: Vec<(Slot, Slot)> = Vec::new();
    for g in cx.gluings() {
        let (ra, rb) = (plan.removed[g.a.tet], plan.removed[g.b.tet]);
        if ra || rb {
            old_pairs.push((g.a, g.b));
        }
    }
    let match_new = |s: Slot, used: &BTreeSet<(usize, usize)>| -> Result<Option<(usize, usize)>> {
        let toks: BTreeSet<usize> = face_corners(s.face).iter().map(|&c| cx.vertex(s.tet, c)).collect();
        let cands: Vec<(usize, usize)> =
            new_faces.iter().filter(|(k, ft)| *ft == toks && !used.contains(k)).map(|(k, _)| *k).collect();
        match cands.len() {
            0 => Ok(None),
            1 => Ok(Some(cands[0])),
            _ => Err(Error::MoveNotApplicable("ambiguous face correspondence".into())),
        }
    };
    for (a, b) in old_pairs {
        let ra = if plan.removed[a.tet] { match_new(a, &used)? } else { None };
        let rb = if plan.removed[b.tet] { match_new(b, &used)? } else { None };
        let ea = if plan.removed[a.tet] { ra.map(|(t, f)| SRef::New(t, f)) } else { Some(SRef::Old(a)) };
        let eb = if plan.removed[b.tet] { rb.map(|(t, f)| SRef::New(t, f)) } else { Some(SRef::Old(b)) };
        match (ea, eb) {
            (Some(x), Some(y)) => {
                if let SRef::New(t, f) = x {
                    used.insert((t, f));
                }
                if let SRef::New(t, f) = y {
                    used.insert((t, f));
                }
                plan.gluings.push((x, y));
            }
            (None, None) => {}
            _ => return Err(Error::MoveNotApplicable("an outer face has no counterpart".into())),
        }
    }
    let rest: Vec<&((usize, usize), BTreeSet<usize>)> = new_faces.iter().filter(|(k, _)| !used.contains(k)).collect();
    let mut paired = vec![false; rest.len()];
    for i in 0..rest.len() {
        if paired[i] {
            continue;
        }
        let partners: Vec<usize> = (i + 1..rest.len()).filter(|&j| !paired[j] && rest[j].1 == rest[i].1).collect();
        if partners.len() != 1 {
            return Err(Error::MoveNotApplicable("inner faces do not pair up".into()));
        }
        let j = partners[0];
        paired[i] = true;
        paired[j] = true;
        plan.gluings.push((SRef::New(rest[i].0 .0, rest[i].0 .1), SRef::New(rest[j].0 .0, rest[j].0 .1)));
    }
    Ok(())
}

fn apply_plan(h: &HTriangulation, plan: Plan) -> Result<HTriangulation> {
    let cx = &h.complex;
    let old_t = cx.n_tets();
    let mut new_index = vec![usize::MAX; old_t];
    let mut tokens: Vec<[usize; 4]> = Vec::new();
    let mut orientation: Vec<i8> = Vec::new();
    for t in 0..old_t {
        if !plan.removed[t] {
            new_index[t] = tokens.len();
            tokens.push([cx.vertex(t, 0), cx.vertex(t, 1), cx.vertex(t, 2), cx.vertex(t, 3)]);
            orientation.push(cx.orientation(t));
        }
    }
    let first_new = tokens.len();
    for tok in &plan.new_tets {
        tokens.push(*tok);
        orientation.push(0);
    }
    let resolve = |r: SRef| -> Slot {
        match r {
            SRef::Old(s) => Slot::new(new_index[s.tet], s.face),
            SRef::New(t, f) => Slot::new(first_new + t, f),
        }
    };
    let mut pairs: Vec<(Slot, Slot)> = Vec::new();
    for g in cx.gluings() {
        if plan.removed[g.a.tet] || plan.removed[g.b.tet] || plan.dropped.contains(&g.a) || plan.dropped.contains(&g.b) {
            continue;
        }
        pairs.push((resolve(SRef::Old(g.a)), resolve(SRef::Old(g.b))));
    }
    for &(x, y) in &plan.gluings {
        pairs.push((resolve(x), resolve(y)));
    }
    let mut gluings = Vec::with_capacity(pairs.len());
    let mut perms = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let mut map = [(0, 0); 3];
        let mut pi = [usize::MAX; 4];
        pi[a.face] = b.face;
        for (k, &c) in face_corners(a.face).iter().enumerate() {
            let tok = tokens[a.tet][c];
            let d = face_corners(b.face)
                .into_iter()
                .find(|&d| tokens[b.tet][d] == tok)
                .ok_or_else(|| Error::MoveNotApplicable("glued faces carry different vertices".into()))?;
            map[k] = (c, d);
            pi[c] = d;
        }
        gluings.push(Gluing { a, b, corner_map: map });
        perms.push(pi);
    }
    // Orient the new tetrahedra by propagation across gluings.
    let mut progress = true;
    while progress {
        progress = false;
        for (g, pi) in gluings.iter().zip(&perms) {
            let (oa, ob) = (orientation[g.a.tet], orientation[g.b.tet]);
            if oa != 0 && ob == 0 {
                orientation[g.b.tet] = -oa * perm_sign(pi);
                progress = true;
            } else if ob != 0 && oa == 0 {
                orientation[g.a.tet] = -ob * perm_sign(pi);
                progress = true;
            }
        }
    }
    if orientation.iter().any(|&o| o == 0) {
        return Err(Error::MoveNotApplicable("new tetrahedra are not connected to the rest".into()));
    }
    let fresh = cx.n_vertices();
    let new_cx = TriComplex::from_parts(orientation, gluings).map_err(|e| Error::MoveNotApplicable(format!("{e}")))?;
    let nt = new_cx.n_tets();

    // Vertex classes: tokens map to new classes.
    let mut token_class: BTreeMap<usize, usize> = BTreeMap::new();
    for t in 0..nt {
        for c in 0..4 {
            let v = new_cx.vertex(t, c);
            if let Some(&old) = token_class.get(&tokens[t][c]) {
                if old != v {
                    return Err(Error::MoveNotApplicable("vertex tokens merge distinct classes".into()));
                }
            }
            token_class.insert(tokens[t][c], v);
        }
    }
    let mut order: Vec<usize> = cx.vertex_order().iter().filter_map(|v| token_class.get(v).copied()).collect();
    for (&tok, &v) in token_class.range(fresh..) {
        let _ = tok;
        order.push(v);
    }
    let new_cx = new_cx.with_vertex_order(&order)?;

    // Edge classes: through a surviving incidence, else through tokens inside new tetrahedra.
    let map_edge = |e: usize| -> Result<Option<usize>> {
        for &(t, le) in cx.edge_incidences(e) {
            if !plan.removed[t] {
                return Ok(Some(new_cx.edge(new_index[t], le)));
            }
        }
        let (a, b) = cx.edge_ends(e);
        let mut found: Option<usize> = None;
        for t in first_new..nt {
            for (le, &(x, y)) in EDGE_CORNERS.iter().enumerate() {
                let (tx, ty) = (tokens[t][x], tokens[t][y]);
                if (tx == a && ty == b) || (tx == b && ty == a) {
                    let cls = new_cx.edge(t, le);
                    if found.is_some_and(|f| f != cls) {
                        return Err(Error::MoveNotApplicable("ambiguous edge correspondence".into()));
                    }
                    found = Some(cls);
                }
            }
        }
        Ok(found)
    };
    let edge_map: Vec<Option<usize>> = (0..cx.n_edges()).map(map_edge).collect::<Result<_>>()?;
    let new_edge_by_tokens = |t: usize, a: usize, b: usize| -> Result<usize> {
        let tok = &tokens[first_new + t];
        let ca = (0..4).find(|&c| tok[c] == a);
        let cb = (0..4).find(|&c| tok[c] == b);
        match (ca, cb) {
            (Some(x), Some(y)) if x != y => Ok(new_cx.edge(first_new + t, edge_index(x, y))),
            _ => Err(Error::Invalid("link edge tokens are not in the new tetrahedron".into())),
        }
    };

    let mut link = HamLink::default();
    for &e in &h.link.edges {
        if plan.link_remove.contains(&e) {
            continue;
        }
        let ne = edge_map[e].ok_or_else(|| Error::MoveNotApplicable(format!("link edge {e} would disappear")))?;
        link.edges.insert(ne);
    }
    for &e in &plan.link_add_old {
        link.edges.insert(edge_map[e].ok_or_else(|| Error::Invalid("added link edge disappeared".into()))?);
    }
    for &(t, a, b) in &plan.link_add_new {
        link.edges.insert(new_edge_by_tokens(t, a, b)?);
    }
    validate_link(&new_cx, &link).map_err(|e| Error::MoveNotApplicable(format!("{e}")))?;

    let charge = match &h.charge {
        None => None,
        Some(c) => Some(transport_charge(&new_cx, &link, c, &new_index, first_new)?),
    };

    let coloring = match &h.coloring {
        None => None,
        Some(phi) => {
            let mut values: Vec<Option<(usize, GroupElement)>> = vec![None; new_cx.n_edges()];
            for (e, m) in edge_map.iter().enumerate() {
                if let Some(ne) = m {
                    let (from, g) = phi.values[e];
                    values[*ne] = Some((token_class[&from], g));
                }
            }
            for &(t, a, b, g) in &plan.color_seeds {
                let tt = first_new + t;
                values[new_cx.edge(tt, edge_index(a, b))] = Some((new_cx.vertex(tt, a), g));
            }
            Some(extend_coloring(&new_cx, values)?)
        }
    };
    let out = HTriangulation { complex: new_cx, link, charge, coloring };
    out.validate()?;
    Ok(out)
}

/// Fills unknown edge values from the cocycle condition on faces.
fn extend_coloring(cx: &TriComplex, mut values: Vec<Option<(usize, GroupElement)>>) -> Result<GColoring> {
    let get = |values: &Vec<Option<(usize, GroupElement)>>, t: usize, a: usize, b: usize| -> Option<GroupElement> {
        let e = cx.edge(t, edge_index(a, b));
        values[e].map(|(from, g)| if from == cx.vertex(t, a) { g } else { group_inv(g) })
    };
    let mut progress = true;
    while progress && values.iter().any(|v| v.is_none()) {
        progress = false;
        for t in 0..cx.n_tets() {
            for a in 0..4 {
                for b in 0..4 {
                    if a == b || values[cx.edge(t, edge_index(a, b))].is_some() {
                        continue;
                    }
                    for c in 0..4 {
                        if c == a || c == b {
                            continue;
                        }
                        if let (Some(x), Some(y)) = (get(&values, t, a, c), get(&values, t, c, b)) {
                            values[cx.edge(t, edge_index(a, b))] = Some((cx.vertex(t, a), group_mul(x, y)));
                            progress = true;
                            break;
                        }
                    }
                }
            }
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(e, v)| v.ok_or_else(|| Error::InvalidColoring(format!("edge {e} cannot be colored"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(GColoring { values })
}

/// Keeps the charge on surviving tetrahedra and solves for the new ones: all edge
/// sums must be valid, and among the solutions the one of minimal norm is chosen,
/// ties broken lexicographically in (tet, edge) order.
fn transport_charge(
    cx: &TriComplex,
    link: &HamLink,
    c: &Charge,
    new_index: &[usize],
    first_new: usize,
) -> Result<Charge> {
    let nt = cx.n_tets();
    let mut doubled = vec![[0i64; 3]; nt];
    for (old, &ni) in new_index.iter().enumerate() {
        if ni != usize::MAX {
            doubled[ni] = c.doubled[old];
        }
    }
    let k = nt - first_new;
    let n = 3 * k;
    if k > 0 {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for t in 0..k {
            let mut r = vec![0; n];
            r[3 * t..3 * t + 3].copy_from_slice(&[1, 1, 1]);
            rows.push(r);
            rhs.push(1);
        }
        for e in 0..cx.n_edges() {
            let inc = cx.edge_incidences(e);
            if !inc.iter().any(|&(t, _)| t >= first_new) {
                continue;
            }
            let mut r = vec![0; n];
            let mut fixed = 0;
            for &(t, le) in inc {
                if t >= first_new {
                    r[3 * (t - first_new) + charge_pair(le)] += 1;
                } else {
                    fixed += doubled[t][charge_pair(le)];
                }
            }
            rows.push(r);
            rhs.push(edge_target(link, e) - fixed);
        }
        let sol = solve_integer(&rows, &rhs, n)
            .ok_or_else(|| Error::NoCharge("the charge does not extend across the move".into()))?;
        let x = min_norm_solution(&sol.particular, &sol.kernel, 3, 4);
        for t in 0..k {
            doubled[first_new + t] = [x[3 * t], x[3 * t + 1], x[3 * t + 2]];
        }
    }
    let out = Charge { doubled };
    validate_charge(cx, link, &out)?;
    Ok(out)
}

/// Positive H-Pachner move: the two tetrahedra meeting at `slot` become three
/// tetrahedra around a new edge joining their opposite vertices.
pub fn pachner_2_3(h: &HTriangulation, slot: Slot) -> Result<HTriangulation> {
    let cx = &h.complex;
    if slot.tet >= cx.n_tets() || slot.face >= 4 {
        return Err(Error::MoveNotApplicable(format!("no face {slot:?}")));
    }
    let (other, _) = cx.partner(slot);
    if other.tet == slot.tet {
        return Err(Error::MoveNotApplicable("the face joins a tetrahedron to itself".into()));
    }
    let d = cx.vertex(slot.tet, slot.face);
    let e = cx.vertex(other.tet, other.face);
    if d == e {
        return Err(Error::MoveNotApplicable("the new edge would be a loop".into()));
    }
    let p = face_corners(slot.face).map(|c| cx.vertex(slot.tet, c));
    let mut plan = Plan::new(cx);
    plan.removed[slot.tet] = true;
    plan.removed[other.tet] = true;
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        plan.new_tets.push([d, e, p[a], p[b]]);
    }
    auto_glue(cx, &mut plan)?;
    apply_plan(h, plan)
}

/// Negative H-Pachner move: the three tetrahedra around an edge of degree three
/// not in the link become two tetrahedra.
pub fn pachner_3_2(h: &HTriangulation, edge: usize) -> Result<HTriangulation> {
    let cx = &h.complex;
    if edge >= cx.n_edges() {
        return Err(Error::MoveNotApplicable(format!("no edge {edge}")));
    }
    if h.link.contains(edge) {
        return Err(Error::MoveNotApplicable(format!("edge {edge} belongs to the link")));
    }
    let inc = cx.edge_incidences(edge);
    let tets: BTreeSet<usize> = inc.iter().map(|&(t, _)| t).collect();
    if inc.len() != 3 || tets.len() != 3 {
        return Err(Error::MoveNotApplicable(format!("edge {edge} lies in {} tetrahedra, expected 3", inc.len())));
    }
    let (a, b) = cx.edge_ends(edge);
    let mut others = BTreeSet::new();
    for &(t, le) in inc {
        let (x, y) = EDGE_CORNERS[le];
        for c in 0..4 {
            if c != x && c != y {
                others.insert(cx.vertex(t, c));
            }
        }
    }
    if others.len() != 3 {
        return Err(Error::MoveNotApplicable("the link of the edge does not have three distinct vertices".into()));
    }
    let p: Vec<usize> = others.into_iter().collect();
    let mut plan = Plan::new(cx);
    for &t in &tets {
        plan.removed[t] = true;
    }
    plan.new_tets.push([a, p[0], p[1], p[2]]);
    plan.new_tets.push([b, p[0], p[1], p[2]]);
    auto_glue(cx, &mut plan)?;
    apply_plan(h, plan)
}

/// Value on the new edge v1 -> v4 of a bubble move: the first candidate that makes
/// the three new edge values well inside I.
fn bubble_color(phi: &GColoring, cx: &TriComplex, slot: Slot, c1: usize, c2: usize, c3: usize) -> GroupElement {
    let g21 = phi.color(cx, slot.tet, c2, c1);
    let g31 = phi.color(cx, slot.tet, c3, c1);
    for k in 0..64 {
        let mag = 0.55 + 0.173 * k as f64;
        let x = if k % 2 == 0 { mag } else { -mag };
        let g = GroupElement { x, y: 1.0 + 0.05 * k as f64 };
        if [g, group_mul(g21, g), group_mul(g31, g)].iter().all(|&h| well_inside(h)) {
            return g;
        }
    }
    GroupElement { x: 0.55, y: 1.0 }
}

/// Positive H-bubble move on the face `slot`: a ball made of two tetrahedra with a
/// new vertex v4 is inserted, and the link edge v1v3 of the face is replaced by
/// v1v4 and v3v4. `link_edge` picks the link edge when the face has several.
pub fn bubble_plus(h: &HTriangulation, slot: Slot, link_edge: Option<usize>) -> Result<HTriangulation> {
    let cx = &h.complex;
    if slot.tet >= cx.n_tets() || slot.face >= 4 {
        return Err(Error::MoveNotApplicable(format!("no face {slot:?}")));
    }
    let fc = face_corners(slot.face);
    let mut choice = None;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let e = cx.edge(slot.tet, edge_index(fc[i], fc[j]));
        if h.link.contains(e) && link_edge.is_none_or(|l| l == e) {
            choice = Some((fc[i], fc[j], e));
            break;
        }
    }
    let (c1, c3, e13) = choice.ok_or_else(|| Error::MoveNotApplicable("the face has no link edge".into()))?;
    let c2 = fc.into_iter().find(|&c| c != c1 && c != c3).unwrap();
    let (v1, v2, v3) = (cx.vertex(slot.tet, c1), cx.vertex(slot.tet, c2), cx.vertex(slot.tet, c3));
    let v4 = cx.n_vertices();
    let (other, _) = cx.partner(slot);
    let mut plan = Plan::new(cx);
    plan.dropped = vec![slot, other];
    plan.new_tets = vec![[v1, v2, v3, v4], [v1, v2, v3, v4]];
    plan.gluings.push((SRef::Old(slot), SRef::New(0, 3)));
    plan.gluings.push((SRef::Old(other), SRef::New(1, 3)));
    for f in 0..3 {
        plan.gluings.push((SRef::New(0, f), SRef::New(1, f)));
    }
    plan.link_remove.push(e13);
    plan.link_add_new.push((0, v1, v4));
    plan.link_add_new.push((0, v3, v4));
    if let Some(phi) = &h.coloring {
        plan.color_seeds.push((0, 0, 3, bubble_color(phi, cx, slot, c1, c2, c3)));
    }
    apply_plan(h, plan)
}

/// Negative H-bubble move removing the vertex `vertex`, which must lie in exactly
/// two tetrahedra glued along their three faces at it, on two link edges.
pub fn bubble_minus(h: &HTriangulation, vertex: usize) -> Result<HTriangulation> {
    let cx = &h.complex;
    if vertex >= cx.n_vertices() {
        return Err(Error::MoveNotApplicable(format!("no vertex {vertex}")));
    }
    let mut corners = Vec::new();
    for t in 0..cx.n_tets() {
        for c in 0..4 {
            if cx.vertex(t, c) == vertex {
                corners.push((t, c));
            }
        }
    }
    if corners.len() != 2 || corners[0].0 == corners[1].0 {
        return Err(Error::MoveNotApplicable(format!("vertex {vertex} is not a bubble vertex")));
    }
    let (x, cx_) = corners[0];
    let (y, cy) = corners[1];
    for f in 0..4 {
        if f == cx_ {
            continue;
        }
        if cx.partner(Slot::new(x, f)).0.tet != y {
            return Err(Error::MoveNotApplicable(format!("vertex {vertex} is not a bubble vertex")));
        }
    }
    let px = cx.partner(Slot::new(x, cx_)).0;
    let py = cx.partner(Slot::new(y, cy)).0;
    if px.tet == x || px.tet == y || py.tet == x || py.tet == y {
        return Err(Error::MoveNotApplicable("the bubble has no outside".into()));
    }
    let at_v: Vec<(usize, usize)> = cx.edges_at(vertex);
    let link_at: Vec<usize> = at_v.iter().filter(|(e, _)| h.link.contains(*e)).map(|(_, o)| *o).collect();
    if link_at.len() != 2 {
        return Err(Error::MoveNotApplicable("the bubble vertex is not on two link edges".into()));
    }
    let (v1, v3) = (link_at[0], link_at[1]);
    let ca = (0..4).find(|&c| cx.vertex(x, c) == v1).unwrap();
    let cb = (0..4).find(|&c| cx.vertex(x, c) == v3).unwrap();
    let e13 = cx.edge(x, edge_index(ca, cb));
    if h.link.contains(e13) {
        return Err(Error::MoveNotApplicable("the opposite edge is already in the link".into()));
    }
    let mut plan = Plan::new(cx);
    plan.removed[x] = true;
    plan.removed[y] = true;
    plan.gluings.push((SRef::Old(px), SRef::Old(py)));
    plan.link_remove.extend(at_v.iter().map(|&(e, _)| e).filter(|&e| h.link.contains(e)));
    plan.link_add_old.push(e13);
    apply_plan(h, plan)
}

/// An isomorphism between two complexes preserving orientation, as a list of
/// (image tetrahedron, corner permutation) per tetrahedron of `a`.
pub fn find_isomorphism(a: &TriComplex, b: &TriComplex) -> Option<Vec<(usize, [usize; 4])>> {
    search_isomorphism(a, b, |_| true)
}

/// An isomorphism of H-triangulations, also carrying link and charge.
pub fn find_h_isomorphism(a: &HTriangulation, b: &HTriangulation) -> Option<Vec<(usize, [usize; 4])>> {
    search_isomorphism(&a.complex, &b.complex, |iso| isomorphism_preserves(a, b, iso))
}

fn search_isomorphism(
    a: &TriComplex,
    b: &TriComplex,
    accept: impl Fn(&[(usize, [usize; 4])]) -> bool,
) -> Option<Vec<(usize, [usize; 4])>> {
    if a.n_tets() != b.n_tets() || a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges() {
        return None;
    }
    let n = a.n_tets();
    let perms = all_perms();
    for t0 in 0..n {
        for sigma in &perms {
            if a.orientation(0) * perm_sign(sigma) != b.orientation(t0) {
                continue;
            }
            let mut map: Vec<Option<(usize, [usize; 4])>> = vec![None; n];
            let mut used = vec![false; n];
            map[0] = Some((t0, *sigma));
            used[t0] = true;
            let mut stack = vec![0];
            let mut ok = true;
            while let Some(t) = stack.pop() {
                let (tb, s) = map[t].unwrap();
                for f in 0..4 {
                    let (pa, pia) = a.partner(Slot::new(t, f));
                    let (pb, pib) = b.partner(Slot::new(tb, s[f]));
                    // image permutation for pa.tet: corner x of pa -> pib[s[pia^-1[x]]]
                    let mut inv = [0; 4];
                    for (i, &y) in pia.iter().enumerate() {
                        inv[y] = i;
                    }
                    let mut img = [0; 4];
                    for x in 0..4 {
                        img[x] = pib[s[inv[x]]];
                    }
                    match map[pa.tet] {
                        Some((u, p)) => {
                            if u != pb.tet || p != img {
                                ok = false;
                                break;
                            }
                        }
                        None => {
                            if used[pb.tet] {
                                ok = false;
                                break;
                            }
                            map[pa.tet] = Some((pb.tet, img));
                            used[pb.tet] = true;
                            stack.push(pa.tet);
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok && map.iter().all(|m| m.is_some()) {
                let iso: Vec<(usize, [usize; 4])> = map.into_iter().map(|m| m.unwrap()).collect();
                if accept(&iso) {
                    return Some(iso);
                }
            }
        }
    }
    None
}

fn all_perms() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&x| !core::mem::replace(&mut seen[x], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// True when `iso` carries the link and charge of `a` to those of `b`.
pub fn isomorphism_preserves(a: &HTriangulation, b: &HTriangulation, iso: &[(usize, [usize; 4])]) -> bool {
    for (t, &(u, s)) in iso.iter().enumerate() {
        for (e, &(x, y)) in EDGE_CORNERS.iter().enumerate() {
            let f = edge_index(s[x], s[y]);
            if a.link.contains(a.complex.edge(t, e)) != b.link.contains(b.complex.edge(u, f)) {
                return false;
            }
            if let (Some(ca), Some(cb)) = (&a.charge, &b.charge) {
                if ca.doubled[t][charge_pair(e)] != cb.doubled[u][charge_pair(f)] {
                    return false;
                }
            }
        }
    }
    true
}

/// Describes a complex in one line, for messages.
pub fn summary(cx: &TriComplex) -> String {
    format!("{} tetrahedra, {} faces, {} edges, {} vertices", cx.n_tets(), cx.n_faces(), cx.n_edges(), cx.n_vertices())
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simplex_h(seed: u64) -> HTriangulation {
        let complex = boundary_4simplex();
        let link = boundary_4simplex_link(&complex);
        let charge = find_charge(&complex, &link).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coloring = coboundary(&complex, &GGauge::random(complex.n_vertices(), &mut rng));
        let coloring = make_admissible(&complex, &coloring, &mut rng).unwrap();
        HTriangulation { complex, link, charge: Some(charge), coloring: Some(coloring) }
    }

    #[test]
    fn boundary_of_the_4_simplex() {
        let cx = boundary_4simplex();
        assert_eq!((cx.n_tets(), cx.n_faces(), cx.n_edges(), cx.n_vertices()), (5, 10, 10, 5));
        let incidences: usize = (0..cx.n_edges()).map(|e| cx.edge_incidences(e).len()).sum();
        assert_eq!(incidences, 6 * cx.n_tets());
        assert!((0..cx.n_edges()).all(|e| cx.edge_incidences(e).len() == 3));
        // Corner c of T_r is the simplex vertex at position c of {0..4} \ {r}.
        for r in 0..5 {
            let labels: Vec<usize> = (0..5).filter(|&v| v != r).collect();
            for c in 0..4 {
                assert_eq!(cx.vertex(r, c), boundary_4simplex_vertex(&cx, labels[c]));
            }
            assert_eq!(cx.sorted_corners(r), [0, 1, 2, 3]);
            assert_eq!(cx.is_right_oriented(r), r % 2 == 0);
        }
    }

    #[test]
    fn closedness_orientation_and_regularity_are_checked() {
        let cx = boundary_4simplex();
        let mut g = cx.gluings().to_vec();
        let dropped = g.pop().unwrap();
        assert!(matches!(
            TriComplex::from_parts(cx.orientations().to_vec(), g.clone()),
            Err(Error::NotClosed { .. })
        ));
        let mut o = cx.orientations().to_vec();
        o[0] = -o[0];
        g.push(dropped.clone());
        assert!(matches!(TriComplex::from_parts(o, g.clone()), Err(Error::NotOrientable { .. })));
        g.push(dropped);
        assert!(matches!(TriComplex::from_parts(cx.orientations().to_vec(), g), Err(Error::BadGluing { .. })));
        // One tetrahedron folded onto itself identifies corners 0 and 1.
        let folded = vec![
            Gluing { a: Slot::new(0, 0), b: Slot::new(0, 1), corner_map: [(1, 0), (2, 2), (3, 3)] },
            Gluing { a: Slot::new(0, 2), b: Slot::new(0, 3), corner_map: [(0, 0), (1, 1), (3, 2)] },
        ];
        assert!(matches!(TriComplex::from_parts(vec![1], folded), Err(Error::NotQuasiRegular { tet: 0, edge: 0 })));
    }

    #[test]
    fn two_tetrahedra_make_a_sphere() {
        let gl = (0..4)
            .map(|f| {
                let fc = face_corners(f);
                Gluing { a: Slot::new(0, f), b: Slot::new(1, f), corner_map: fc.map(|c| (c, c)) }
            })
            .collect();
        let cx = TriComplex::from_parts(vec![1, -1], gl).unwrap();
        assert_eq!((cx.n_faces(), cx.n_edges(), cx.n_vertices()), (4, 6, 4));
    }

    #[test]
    fn hamiltonian_links() {
        let cx = boundary_4simplex();
        let link = boundary_4simplex_link(&cx);
        validate_link(&cx, &link).unwrap();
        let mut short = link.clone();
        let first = *short.edges.iter().next().unwrap();
        short.edges.remove(&first);
        assert!(matches!(validate_link(&cx, &short), Err(Error::NotHamiltonian { degree: 1, .. })));
        assert!(matches!(validate_link(&cx, &HamLink::default()), Err(Error::NotHamiltonian { degree: 0, .. })));
    }

    #[test]
    fn charges_are_found_and_checked() {
        let cx = boundary_4simplex();
        let link = boundary_4simplex_link(&cx);
        let c = find_charge(&cx, &link).unwrap();
        validate_charge(&cx, &link, &c).unwrap();
        for t in 0..cx.n_tets() {
            for p in 0..3 {
                let mut bad = c.clone();
                bad.doubled[t][p] += 1;
                assert!(validate_charge(&cx, &link, &bad).is_err());
            }
        }
        let entries: Vec<(usize, usize, i64)> =
            (0..5).flat_map(|t| (0..6).map(move |e| (t, e, 0))).collect();
        assert!(Charge::from_entries(5, &entries).is_ok());
        let mut clash = entries.clone();
        clash[0].2 = 1;
        assert!(Charge::from_entries(5, &clash).is_err());
    }

    #[test]
    fn deformations_preserve_validity_and_class() {
        let cx = boundary_4simplex();
        let link = boundary_4simplex_link(&cx);
        let c = find_charge(&cx, &link).unwrap();
        let rings: Vec<Vec<Passage>> = (0..cx.n_edges()).map(|e| edge_ring(&cx, e)).collect();
        for e in 0..cx.n_edges() {
            assert_eq!(rings[e].len(), 3);
            for lambda in [-2, -1, 1, 3] {
                let d = deform_charge(&cx, &c, e, lambda);
                validate_charge(&cx, &link, &d).unwrap();
                assert_eq!(deform_charge(&cx, &d, e, -lambda), c);
                for lp in &rings {
                    assert_eq!(charge_class(&cx, &d, lp).unwrap(), charge_class(&cx, &c, lp).unwrap());
                }
            }
            assert_eq!(charge_class(&cx, &c, &rings[e]).unwrap(), 0);
        }
    }

    #[test]
    fn bad_loops_are_rejected() {
        let cx = boundary_4simplex();
        let c = find_charge(&cx, &boundary_4simplex_link(&cx)).unwrap();
        let mut ring = edge_ring(&cx, 0);
        ring[0].exit = ring[0].entry;
        assert!(matches!(charge_class(&cx, &c, &ring), Err(Error::BadLoop(_))));
        let mut ring = edge_ring(&cx, 0);
        ring.pop();
        assert!(matches!(charge_class(&cx, &c, &ring), Err(Error::BadLoop(_))));
    }

    #[test]
    fn charge_classes_can_be_targeted() {
        let cx = boundary_4simplex();
        let link = boundary_4simplex_link(&cx);
        let rings: Vec<Vec<Passage>> = (0..3).map(|e| edge_ring(&cx, e)).collect();
        let (c, achieved) = find_charge_in_class(&cx, &link, &rings, &[0, 0, 0]).unwrap();
        validate_charge(&cx, &link, &c).unwrap();
        assert_eq!(achieved, vec![0, 0, 0]);
        // On a sphere every loop bounds, so the class cannot be moved.
        let (_, achieved) = find_charge_in_class(&cx, &link, &rings, &[1, 0, 0]).unwrap();
        assert_eq!(achieved, vec![0, 0, 0]);
    }

    #[test]
    fn gauges_act_on_colorings() {
        let cx = boundary_4simplex();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phi = coboundary(&cx, &GGauge::random(5, &mut rng));
        validate_coloring(&cx, &phi).unwrap();
        let d1 = GGauge::random(5, &mut rng);
        let d2 = GGauge::random(5, &mut rng);
        let lhs = gauge_transform(&cx, &gauge_transform(&cx, &phi, &d2), &d1);
        let rhs = gauge_transform(&cx, &phi, &d1.compose(&d2));
        for (a, b) in lhs.values.iter().zip(&rhs.values) {
            assert_eq!(a.0, b.0);
            assert!(a.1.approx_eq(b.1, 1e-12));
        }
        let id = gauge_transform(&cx, &phi, &GGauge::identity(5));
        assert_eq!(id, phi);
        // Holonomy around a face is trivial.
        let (v0, v1, v2) = (0, 1, 2);
        let e01 = edge_between(&cx, v0, v1).unwrap();
        let e12 = edge_between(&cx, v1, v2).unwrap();
        let e20 = edge_between(&cx, v2, v0).unwrap();
        assert!(phi.holonomy(&[(e01, v0), (e12, v1), (e20, v2)]).approx_eq(GroupElement::IDENTITY, 1e-12));
        let mut bad = phi.clone();
        bad.values[e01].1.x += 0.5;
        assert!(validate_coloring(&cx, &bad).is_err());
    }

    #[test]
    fn trivial_coloring_is_made_admissible() {
        let cx = boundary_4simplex();
        let phi = trivial_coloring(&cx);
        assert!(!phi.is_admissible());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let adm = make_admissible(&cx, &phi, &mut rng).unwrap();
        validate_coloring(&cx, &adm).unwrap();
        assert!(adm.values.iter().all(|(_, g)| well_inside(*g)));
    }

    #[test]
    fn pachner_moves_round_trip() {
        let h = simplex_h(1);
        let up = pachner_2_3(&h, Slot::new(0, 0)).unwrap();
        assert_eq!((up.complex.n_tets(), up.complex.n_edges(), up.complex.n_vertices()), (6, 11, 5));
        up.validate().unwrap();
        let new_edge = (0..up.complex.n_edges()).find(|&e| up.complex.edge_incidences(e).len() == 3
            && up.complex.edge_incidences(e).iter().all(|&(t, _)| t >= 3)).unwrap();
        let down = pachner_3_2(&up, new_edge).unwrap();
        down.validate().unwrap();
        assert!(find_isomorphism(&h.complex, &down.complex).is_some());
        assert!(find_h_isomorphism(&h, &down).is_some());
        // A link edge cannot be removed.
        let link_edge = *h.link.edges.iter().next().unwrap();
        assert!(matches!(pachner_3_2(&h, link_edge), Err(Error::MoveNotApplicable(_))));
    }

    #[test]
    fn bubble_moves_round_trip() {
        let h = simplex_h(2);
        let cx = &h.complex;
        let (v0, v1, v3) = (0, 1, 3);
        let slot = (0..cx.n_tets())
            .flat_map(|t| (0..4).map(move |f| Slot::new(t, f)))
            .find(|s| {
                let vs: BTreeSet<usize> = face_corners(s.face).iter().map(|&c| cx.vertex(s.tet, c)).collect();
                vs == [v0, v1, v3].into_iter().collect()
            })
            .unwrap();
        let e01 = edge_between(cx, v0, v1).unwrap();
        assert!(h.link.contains(e01));
        let up = bubble_plus(&h, slot, Some(e01)).unwrap();
        assert_eq!((up.complex.n_tets(), up.complex.n_vertices()), (7, 6));
        up.validate().unwrap();
        assert!(up.coloring.as_ref().unwrap().values.iter().all(|(_, g)| g.in_i()));
        // The old face is still there and no longer has a link edge.
        assert!(matches!(bubble_plus(&up, slot, None), Err(Error::MoveNotApplicable(_))));
        let down = bubble_minus(&up, 5).unwrap();
        down.validate().unwrap();
        assert!(find_isomorphism(&h.complex, &down.complex).is_some());
        assert!(find_h_isomorphism(&h, &down).is_some());
        assert!(matches!(bubble_minus(&h, 0), Err(Error::MoveNotApplicable(_))));
    }

    proptest! {
        #[test]
        fn vertex_orders_keep_charges_valid(perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle(), e in 0usize..10, lambda in -3i64..4) {
            let cx = boundary_4simplex().with_vertex_order(&perm).unwrap();
            let link = boundary_4simplex_link(&cx);
            let c = find_charge(&cx, &link).unwrap();
            let d = deform_charge(&cx, &c, e, lambda);
            prop_assert!(validate_charge(&cx, &link, &d).is_ok());
        }

        #[test]
        fn pachner_moves_from_every_face(tet in 0usize..5, face in 0usize..4, seed in 0u64..50) {
            let h = simplex_h(seed);
            let up = pachner_2_3(&h, Slot::new(tet, face)).unwrap();
            prop_assert!(up.validate().is_ok());
            prop_assert_eq!(up.complex.n_tets(), 6);
        }
    }
}
