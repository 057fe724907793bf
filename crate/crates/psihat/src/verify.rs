//! Seeded residual suites over the algebra, the operators, the 6j-symbols and the
//! moves, reported as one row per identity with its worst value over all trials.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclic_algebra::{algebra_identity_residuals, random_element, random_pair, RootData};
use crate::error::{Error, Result};
use crate::psi_operators::{operator_identity_residuals, q_scalar, sf_ba_cubed_scalar, Block, HalfInt};
use crate::sixj::{
    check_charged_inversion, check_charged_pentagon, check_fundamental_lemma, check_symmetry_relations,
    pentagon_residual, symmetry_residuals, LabelSix, PentagonCharges, PentagonLabels,
};
use crate::state_sum::{distance_mod_qtilde, state_sum, state_sum_with, Schedule};
use crate::triangulation::{
    boundary_4simplex_fixture, bubble_minus, bubble_plus, deform_charge, edge_index, face_corners,
    find_charge, find_h_isomorphism, gauge_transform, pachner_2_3, pachner_3_2, validate_charge, GGauge,
    HTriangulation, Slot,
};

/// Threshold a negative control has to exceed.
pub const CONTROL_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Algebra,
    Operators,
    Sixj,
    Moves,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Algebra => "algebra",
            Level::Operators => "operators",
            Level::Sixj => "sixj",
            Level::Moves => "moves",
        }
    }
}

/// How a row is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// The worst residual must stay at or below the bound.
    AtMost(f64),
    /// A negative control: the smallest value must exceed the bound.
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// Worst value: the maximum for `AtMost` rows and the minimum for `AtLeast` rows.
    pub value: f64,
    pub bound: Bound,
    pub samples: usize,
}

impl Row {
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(t) => self.value <= t,
            Bound::AtLeast(t) => self.value > t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub tol_strict: f64,
}

impl Config {
    pub fn new(n: usize) -> Self {
        Self { n, seed: 0, trials: 20, tol: 1e-8, tol_strict: 1e-10 }
    }
}

#[derive(Default)]
struct Table {
    rows: Vec<Row>,
}

impl Table {
    fn record(&mut self, name: &str, value: f64, bound: Bound) {
        // NaN is never within bounds.
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.rows.iter_mut().find(|r| r.name == name) {
            Some(r) => {
                r.value = match bound {
                    Bound::AtMost(_) => r.value.max(value),
                    Bound::AtLeast(_) => r.value.min(value),
                };
                r.samples += 1;
            }
            None => self.rows.push(Row { name: name.into(), value, bound, samples: 1 }),
        }
    }
}

/// Runs one suite. The random draws depend only on `cfg.seed`.
pub fn run_suite(level: Level, cfg: &Config) -> Result<Vec<Row>> {
    let rd = RootData::new(cfg.n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::default();
    match level {
        Level::Algebra => algebra(&rd, cfg, &mut rng, &mut t)?,
        Level::Operators => operators(&rd, cfg, &mut rng, &mut t)?,
        Level::Sixj => sixj(&rd, cfg, &mut rng, &mut t)?,
        Level::Moves => moves(&rd, cfg, &mut rng, &mut t)?,
    }
    Ok(t.rows)
}

fn algebra(rd: &RootData, cfg: &Config, rng: &mut ChaCha8Rng, t: &mut Table) -> Result<()> {
    for _ in 0..cfg.trials {
        let (g, h) = random_pair(rd, rng);
        for (name, r) in algebra_identity_residuals(rd, g, h)? {
            t.record(name, r, Bound::AtMost(cfg.tol));
        }
    }
    Ok(())
}

fn operators(rd: &RootData, cfg: &Config, rng: &mut ChaCha8Rng, t: &mut Table) -> Result<()> {
    for _ in 0..cfg.trials {
        let (g, h) = random_pair(rd, rng);
        for (name, r) in operator_identity_residuals(rd, g, h)? {
            let tol = if name.starts_with("q = ") { cfg.tol_strict } else { cfg.tol };
            t.record(name, r, Bound::AtMost(tol));
        }
        for b in [Block::check(g, h), Block::hat(g, h)] {
            let expect = q_scalar(rd, b.kind).powu(2);
            t.record("(sfB sfA)^3 = q^2", (sf_ba_cubed_scalar(rd, b)? - expect).norm(), Bound::AtMost(cfg.tol));
        }
    }
    Ok(())
}

fn half<R: Rng + ?Sized>(rng: &mut R) -> HalfInt {
    HalfInt::from_doubled(rng.random_range(-3..=3))
}

fn sixj(rd: &RootData, cfg: &Config, rng: &mut ChaCha8Rng, t: &mut Table) -> Result<()> {
    let on = Bound::AtMost(cfg.tol);
    let off = Bound::AtLeast(CONTROL_THRESHOLD);
    for _ in 0..cfg.trials {
        let labels = PentagonLabels::random(rd, rng);
        let ch = PentagonCharges::from_free(half(rng), half(rng), half(rng), half(rng), half(rng));
        t.record("charged pentagon", check_charged_pentagon(rd, &labels, &ch)?, on);
        let mut broken = ch;
        broken.c[2] = broken.c[2] + HalfInt::HALF;
        t.record("charged pentagon, c2 off by 1/2 (control)", pentagon_residual(rd, &labels, &broken)?, off);

        let six = LabelSix::random(rd, rng);
        let (a, b) = (half(rng), half(rng));
        let c = HalfInt::HALF - a - b;
        let (r1, r2) = check_charged_inversion(rd, &six, a, c)?;
        t.record("charged inversion (positive then negative)", r1, on);
        t.record("charged inversion (negative then positive)", r2, on);
        let [s01, s12, s23] = check_symmetry_relations(rd, &six, a, b, c)?;
        t.record("charged symmetry 01", s01, on);
        t.record("charged symmetry 12", s12, on);
        t.record("charged symmetry 23", s23, on);
        let [x01, x12, x23] = symmetry_residuals(rd, &six, a, b, c + HalfInt::HALF)?;
        t.record("charged symmetry, a+b+c = 1 (control)", x01.max(x12).max(x23), off);
        let [f01, f12, f23] = check_fundamental_lemma(rd, &six)?;
        t.record("fundamental lemma 01", f01, on);
        t.record("fundamental lemma 12", f12, on);
        t.record("fundamental lemma 23", f23, on);
    }
    Ok(())
}

fn k_of(rd: &RootData, h: &HTriangulation) -> Result<num_complex::Complex64> {
    Ok(state_sum(rd, h)?.value)
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn moves(rd: &RootData, cfg: &Config, rng: &mut ChaCha8Rng, t: &mut Table) -> Result<()> {
    let h = boundary_4simplex_fixture(rng)?;
    moves_on(rd, cfg, &h, rng, t)
}

/// Runs the moves suite on a given H-triangulation, which must carry an
/// admissible coloring and a charge. Random draws depend only on `cfg.seed`.
pub fn run_moves_on(h: &HTriangulation, cfg: &Config) -> Result<Vec<Row>> {
    let rd = RootData::new(cfg.n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::default();
    moves_on(&rd, cfg, h, &mut rng, &mut t)?;
    Ok(t.rows)
}

fn moves_on(rd: &RootData, cfg: &Config, h: &HTriangulation, rng: &mut ChaCha8Rng, t: &mut Table) -> Result<()> {
    let exact = Bound::AtMost(cfg.tol);
    let modq = Bound::AtMost(1e-7);
    let yes = Bound::AtMost(0.0);
    t.record("validators pass", flag(h.validate().is_ok()), yes);
    let found = find_charge(&h.complex, &h.link).and_then(|c| validate_charge(&h.complex, &h.link, &c));
    t.record("find_charge succeeds", flag(found.is_ok()), yes);
    let k0 = k_of(rd, h)?;
    t.record("K is finite and nonzero", flag(k0.is_finite() && k0.norm() > 0.0), yes);
    let other = state_sum_with(rd, h, Schedule::TetOrder)?.value;
    t.record("contraction schedules agree", (other - k0).norm() / k0.norm().max(1.0), Bound::AtMost(1e-9));

    let cx = &h.complex;
    let phi = h.coloring.as_ref().expect("fixture has a coloring");
    for v in 0..cx.n_vertices() {
        for _ in 0..cfg.trials.clamp(1, 4) {
            let moved = gauge_transform(cx, phi, &GGauge::point(cx.n_vertices(), v, random_element(rng)));
            if !moved.is_admissible() {
                continue;
            }
            let z = k_of(rd, &HTriangulation { coloring: Some(moved), ..h.clone() })?;
            t.record("gauge invariance (exact)", (z - k0).norm() / k0.norm(), exact);
        }
    }
    let charge = h.charge.as_ref().expect("fixture has a charge");
    for e in 0..cx.n_edges() {
        let g = HTriangulation { charge: Some(deform_charge(cx, charge, e, 1)), ..h.clone() };
        t.record("charge deformation d(e) (mod q~)", distance_mod_qtilde(k0, k_of(rd, &g)?, rd).0, modq);
    }
    for _ in 0..5 {
        let mut order = cx.vertex_order().to_vec();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let g = HTriangulation { complex: cx.with_vertex_order(&order)?, ..h.clone() };
        t.record("vertex reordering (mod q~)", distance_mod_qtilde(k0, k_of(rd, &g)?, rd).0, modq);
    }
    for tet in 0..cx.n_tets() {
        for f in 0..4 {
            let up = pachner_2_3(h, Slot::new(tet, f))?;
            t.record("positive Pachner (mod q~)", distance_mod_qtilde(k0, k_of(rd, &up)?, rd).0, modq);
            let new_edge = (0..up.complex.n_edges())
                .find(|&e| up.complex.edge_incidences(e).iter().all(|&(x, _)| x >= cx.n_tets() - 2))
                .ok_or_else(|| Error::Invalid("no new edge after a Pachner move".into()))?;
            let back = pachner_3_2(&up, new_edge)?;
            t.record("Pachner round trip is an isomorphism", flag(find_h_isomorphism(h, &back).is_some()), yes);
        }
    }
    for tet in 0..cx.n_tets() {
        for f in 0..4 {
            let fc = face_corners(f);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let e = cx.edge(tet, edge_index(fc[i], fc[j]));
                if !h.link.contains(e) {
                    continue;
                }
                let up = bubble_plus(h, Slot::new(tet, f), Some(e))?;
                t.record("positive bubble (mod q~)", distance_mod_qtilde(k0, k_of(rd, &up)?, rd).0, modq);
                let back = bubble_minus(&up, up.complex.n_vertices() - 1)?;
                t.record("bubble round trip is an isomorphism", flag(find_h_isomorphism(h, &back).is_some()), yes);
            }
        }
    }
    Ok(())
}

/// One line per row, for reports.
pub fn format_row(r: &Row) -> String {
    let (rel, b) = match r.bound {
        Bound::AtMost(b) => ("<=", b),
        Bound::AtLeast(b) => (">", b),
    };
    let status = if r.passed() { "ok" } else { "FAIL" };
    format!("{status:4} {:<46} {:>10.3e} {rel} {b:.0e}  ({} samples)", r.name, r.value, r.samples)
}
