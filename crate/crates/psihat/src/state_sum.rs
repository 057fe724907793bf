//! The state sum K(T, L, Phi, c): one charged 6j tensor per tetrahedron, contracted
//! over face classes, times 1/N per link edge. Values are defined up to integer
//! powers of q~, so comparisons and reports go through `equal_mod_qtilde` and
//! `canonical_rep`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::cyclic_algebra::{GroupElement, RootData};
use crate::error::{Error, Result};
use crate::matrix::identity;
use crate::psi_operators::{op_block, q_scalar, qtilde, qtilde_pow, Block, Kind, Op};
use crate::sixj::{sixj_neg, sixj_pos, LabelSix, Sixj};
use crate::tensor::Tensor;
use crate::triangulation::{edge_index, validate_charge, validate_coloring, validate_link, HTriangulation};

/// Tolerance of the startup check of the q-lemma.
const Q_GUARD_TOL: f64 = 1e-8;

/// Tolerance used to find the multiplicative order of q~.
const ORDER_TOL: f64 = 1e-9;

/// The weight of one tetrahedron and the face class of each of its legs.
#[derive(Debug, Clone)]
pub struct TetraWeight {
    pub sixj: Sixj,
    pub faces: [usize; 4],
}

/// The value of a state sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantValue {
    pub value: Complex64,
    pub n: usize,
    pub qtilde: Complex64,
}

/// Order in which face classes are contracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Repeatedly contract the face whose two tensors give the smallest result,
    /// ties broken by face id.
    #[default]
    Greedy,
    /// Absorb the tetrahedra one by one in index order.
    TetOrder,
}

/// The weight of `tet`: sixj_pos on right-oriented tetrahedra and sixj_neg otherwise,
/// with labels read along the ordered edges and charges on v1v2 and v2v3.
pub fn tetra_weight(rd: &RootData, h: &HTriangulation, tet: usize) -> Result<TetraWeight> {
    let cx = &h.complex;
    let phi = h.coloring.as_ref().ok_or_else(|| Error::Invalid("the state sum needs a coloring".into()))?;
    let charge = h.charge.as_ref().ok_or_else(|| Error::Invalid("the state sum needs a charge".into()))?;
    let s = cx.sorted_corners(tet);
    let col = |a: usize, b: usize| phi.color(cx, tet, s[a], s[b]);
    let labels = LabelSix::new(col(0, 1), col(1, 2), col(0, 2), col(2, 3), col(0, 3), col(1, 3))?;
    let a = charge.get(tet, edge_index(s[0], s[1]));
    let c = charge.get(tet, edge_index(s[1], s[2]));
    let face = |k: usize| cx.face(tet, s[k]);
    if cx.is_right_oriented(tet) {
        let sixj = sixj_pos(rd, &labels, a, c)?;
        Ok(TetraWeight { sixj, faces: [face(1), face(3), face(0), face(2)] })
    } else {
        let sixj = sixj_neg(rd, &labels, a, c)?;
        Ok(TetraWeight { sixj, faces: [face(2), face(0), face(3), face(1)] })
    }
}

/// Checks that the operator q acts as q~ on hat blocks and q~^-1 on check blocks.
pub fn q_lemma_guard(rd: &RootData) -> Result<()> {
    let g = GroupElement { x: 0.7, y: 1.3 };
    let h = GroupElement { x: -1.1, y: 0.8 };
    for b in [Block::hat(g, h), Block::check(g, h)] {
        let q = op_block(rd, Op::Q, b)?;
        let expect = identity(rd.n()) * q_scalar(rd, b.kind);
        let residual = (&q.matrix - &expect).norm();
        if residual > Q_GUARD_TOL {
            return Err(Error::NotScalar { residual });
        }
    }
    let qt = qtilde(rd);
    if (q_scalar(rd, Kind::Check) * qt - Complex64::one()).norm() > Q_GUARD_TOL {
        return Err(Error::Invalid("q on check blocks is not the inverse of q~".into()));
    }
    Ok(())
}

/// Checks that every face class carries one hat and one check leg on the same block.
fn check_face_types(weights: &[TetraWeight], n_faces: usize) -> Result<()> {
    let mut seen: Vec<Vec<Block>> = vec![Vec::new(); n_faces];
    for w in weights {
        for (leg, b) in w.sixj.leg_blocks().iter().enumerate() {
            seen[w.faces[leg]].push(*b);
        }
    }
    for (face, legs) in seen.iter().enumerate() {
        match legs.as_slice() {
            [x, y] if x.kind != y.kind && x.dual().approx_eq(y) => {}
            [x, y] if x.kind != y.kind => {
                return Err(Error::BlockMismatch(format!("face {face} joins {x:?} and {y:?}")))
            }
            _ => return Err(Error::TypeMismatch { face }),
        }
    }
    Ok(())
}

/// A tensor of the network whose legs carry face classes.
struct Node {
    faces: Vec<usize>,
    t: Tensor,
}

impl Node {
    /// Traces out pairs of legs on the same face.
    fn self_trace(mut self, n: usize) -> Node {
        loop {
            let mut pair = None;
            'outer: for i in 0..self.faces.len() {
                for j in i + 1..self.faces.len() {
                    if self.faces[i] == self.faces[j] {
                        pair = Some((i, j));
                        break 'outer;
                    }
                }
            }
            let Some((i, j)) = pair else { return self };
            let delta = Tensor::from_fn(&[n, n], |x| if x[0] == x[1] { Complex64::one() } else { Complex64::zero() });
            let t = self.t.contract(&delta, &[(i, 0), (j, 1)]);
            self.faces = self.faces.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, &f)| f).collect();
            self.t = t;
        }
    }

    fn merge(&self, other: &Node) -> Node {
        let pairs: Vec<(usize, usize)> = self
            .faces
            .iter()
            .enumerate()
            .filter_map(|(i, f)| other.faces.iter().position(|g| g == f).map(|j| (i, j)))
            .collect();
        let faces = self
            .faces
            .iter()
            .filter(|f| !other.faces.contains(f))
            .chain(other.faces.iter().filter(|f| !self.faces.contains(f)))
            .copied()
            .collect();
        Node { faces, t: self.t.contract(&other.t, &pairs) }
    }

    fn shared(&self, other: &Node) -> usize {
        self.faces.iter().filter(|f| other.faces.contains(f)).count()
    }
}

/// Contracts the network of weights over all face classes.
pub fn contract_weights(weights: &[TetraWeight], n: usize, schedule: Schedule) -> Complex64 {
    let mut nodes: Vec<Option<Node>> = weights
        .iter()
        .map(|w| Some(Node { faces: w.faces.to_vec(), t: w.sixj.tensor.clone() }.self_trace(n)))
        .collect();
    match schedule {
        Schedule::TetOrder => {
            let mut acc = nodes[0].take().unwrap();
            for node in nodes.iter_mut().skip(1) {
                acc = acc.merge(&node.take().unwrap()).self_trace(n);
            }
            scalar_product(vec![acc])
        }
        Schedule::Greedy => {
            loop {
                // Pending faces: those with legs on two different live nodes.
                let live: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].is_some()).collect();
                let mut best: Option<(usize, usize, usize, usize)> = None;
                for (x, &i) in live.iter().enumerate() {
                    for &j in &live[x + 1..] {
                        let (a, b) = (nodes[i].as_ref().unwrap(), nodes[j].as_ref().unwrap());
                        let shared = a.shared(b);
                        if shared == 0 {
                            continue;
                        }
                        let cost = a.faces.len() + b.faces.len() - 2 * shared;
                        let face = *a.faces.iter().filter(|f| b.faces.contains(f)).min().unwrap();
                        if best.is_none_or(|(c, f, _, _)| (cost, face) < (c, f)) {
                            best = Some((cost, face, i, j));
                        }
                    }
                }
                let Some((_, _, i, j)) = best else { break };
                let b = nodes[j].take().unwrap();
                let a = nodes[i].take().unwrap();
                nodes[i] = Some(a.merge(&b));
            }
            scalar_product(nodes.into_iter().flatten().collect())
        }
    }
}

fn scalar_product(nodes: Vec<Node>) -> Complex64 {
    nodes.iter().fold(Complex64::one(), |acc, n| {
        debug_assert!(n.faces.is_empty(), "open legs left after contraction");
        acc * n.t.value()
    })
}

/// The state sum with the default greedy schedule.
pub fn state_sum(rd: &RootData, h: &HTriangulation) -> Result<InvariantValue> {
    state_sum_with(rd, h, Schedule::Greedy)
}

pub fn state_sum_with(rd: &RootData, h: &HTriangulation, schedule: Schedule) -> Result<InvariantValue> {
    let cx = &h.complex;
    validate_link(cx, &h.link)?;
    let charge = h.charge.as_ref().ok_or_else(|| Error::Invalid("the state sum needs a charge".into()))?;
    validate_charge(cx, &h.link, charge)?;
    let phi = h.coloring.as_ref().ok_or_else(|| Error::Invalid("the state sum needs a coloring".into()))?;
    validate_coloring(cx, phi)?;
    if !phi.is_admissible() {
        return Err(Error::InvalidColoring("some edge value lies outside I".into()));
    }
    q_lemma_guard(rd)?;
    let weights = (0..cx.n_tets()).map(|t| tetra_weight(rd, h, t)).collect::<Result<Vec<_>>>()?;
    check_face_types(&weights, cx.n_faces())?;
    let n = rd.n();
    // The state is unique for each coloring, so the sum over states has one term.
    let mut value = Complex64::zero();
    for _state in [()] {
        let link_weight = Complex64::new(1.0 / n as f64, 0.0).powi(h.link.edges.len() as i32);
        value += link_weight * contract_weights(&weights, n, schedule);
    }
    Ok(InvariantValue { value, n, qtilde: qtilde(rd) })
}

/// The smallest d >= 1 with |q~^d - 1| < tol.
pub fn qtilde_order(rd: &RootData, tol: f64) -> usize {
    let q = qtilde(rd);
    let mut p = q;
    for d in 1..=4 * rd.n() {
        if (p - Complex64::one()).norm() < tol {
            return d;
        }
        p *= q;
    }
    panic!("q~ is not a root of unity of order at most 4N")
}

/// The smallest relative distance `|z2 - q~^k z1| / max(|z1|, |z2|)` over k, with
/// the minimizing k. Both zero gives (0, 0); exactly one zero gives (1, 0).
pub fn distance_mod_qtilde(z1: Complex64, z2: Complex64, rd: &RootData) -> (f64, i64) {
    let (a, b) = (z1.norm(), z2.norm());
    if a == 0.0 && b == 0.0 {
        return (0.0, 0);
    }
    if a == 0.0 || b == 0.0 {
        return (1.0, 0);
    }
    let scale = a.max(b);
    let ord = qtilde_order(rd, ORDER_TOL);
    let mut best = (f64::INFINITY, 0);
    for k in 0..ord as i64 {
        let r = (z2 - qtilde_pow(rd, k) * z1).norm() / scale;
        if r < best.0 {
            best = (r, k);
        }
    }
    best
}

/// Whether `z2 = q~^k z1` up to relative tolerance `tol`, with the witness k.
pub fn equal_mod_qtilde(z1: Complex64, z2: Complex64, rd: &RootData, tol: f64) -> (bool, i64) {
    let (a, b) = (z1.norm(), z2.norm());
    if (a == 0.0) != (b == 0.0) {
        return (false, 0);
    }
    if (a - b).abs() > tol * a.max(b) {
        return (false, 0);
    }
    let (r, k) = distance_mod_qtilde(z1, z2, rd);
    (r <= tol, k)
}

/// A representative of the q~-orbit of `z`: its modulus and its argument reduced
/// to [0, 2 pi / ord(q~)).
pub fn canonical_rep(z: Complex64, rd: &RootData) -> Result<(f64, f64)> {
    if z.is_zero() {
        return Err(Error::ZeroValue);
    }
    let period = 2.0 * PI / qtilde_order(rd, ORDER_TOL) as f64;
    let mut theta = z.arg() % period;
    if theta < 0.0 {
        theta += period;
    }
    if theta >= period {
        theta -= period;
    }
    Ok((z.norm(), theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(seed: u64) -> HTriangulation {
        let complex = boundary_4simplex();
        let link = boundary_4simplex_link(&complex);
        let charge = find_charge(&complex, &link).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coloring = coboundary(&complex, &GGauge::random(complex.n_vertices(), &mut rng));
        let coloring = make_admissible(&complex, &coloring, &mut rng).unwrap();
        HTriangulation { complex, link, charge: Some(charge), coloring: Some(coloring) }
    }

    #[test]
    fn qtilde_comparisons() {
        let rd = RootData::new(3, 1).unwrap();
        let z = Complex64::new(0.3, -1.2);
        assert_eq!(equal_mod_qtilde(z, z * qtilde_pow(&rd, 3), &rd, 1e-12), (true, 3));
        assert!(!equal_mod_qtilde(z, z * 2.0, &rd, 1e-9).0);
        assert_eq!(equal_mod_qtilde(Complex64::zero(), Complex64::zero(), &rd, 1e-9), (true, 0));
        assert!(!equal_mod_qtilde(Complex64::zero(), z, &rd, 1e-9).0);
        let ord = qtilde_order(&rd, 1e-9);
        assert!(ord == 3 || ord == 6);
        let (m, t) = canonical_rep(z, &rd).unwrap();
        for k in 0..ord as i64 {
            let (m2, t2) = canonical_rep(z * qtilde_pow(&rd, k), &rd).unwrap();
            assert!((m - m2).abs() < 1e-12 && (t - t2).abs() < 1e-9);
        }
        assert!(t >= 0.0 && t < 2.0 * PI / ord as f64);
        assert_eq!(canonical_rep(Complex64::zero(), &rd), Err(Error::ZeroValue));
    }

    #[test]
    fn guard_holds() {
        for n in [3, 5, 7] {
            q_lemma_guard(&RootData::new(n, 1).unwrap()).unwrap();
        }
    }

    #[test]
    fn weights_pair_faces_by_type() {
        let rd = RootData::new(3, 1).unwrap();
        let h = fixture(11);
        let ws: Vec<TetraWeight> = (0..5).map(|t| tetra_weight(&rd, &h, t).unwrap()).collect();
        check_face_types(&ws, 10).unwrap();
        let mut bad = ws.clone();
        bad[0].faces.swap(0, 2);
        assert!(check_face_types(&bad, 10).is_err());
    }

    #[test]
    fn boundary_simplex_value_is_finite_and_schedule_free() {
        let rd = RootData::new(3, 1).unwrap();
        let h = fixture(5);
        let a = state_sum_with(&rd, &h, Schedule::Greedy).unwrap().value;
        let b = state_sum_with(&rd, &h, Schedule::TetOrder).unwrap().value;
        assert!(a.is_finite() && a.norm() > 1e-12, "K = {a}");
        assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn missing_data_is_rejected() {
        let rd = RootData::new(3, 1).unwrap();
        let mut h = fixture(5);
        h.charge = None;
        assert!(state_sum(&rd, &h).is_err());
        let mut h = fixture(5);
        h.coloring = Some(trivial_coloring(&h.complex));
        assert!(state_sum(&rd, &h).is_err());
    }
}
