//! The operators A, A*, B, B*, L, R, C, their square roots and the T-scalar q,
//! acting on the multiplicity spaces H^{g,h}_{gh} (check) and H_{g,h}^{gh} (hat).
//!
//! Every operator is realized blockwise: an N x N matrix from one labelled block
//! to the block dictated by the exchange inclusions, with the convention
//! `M[target_index, source_index]`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use num_traits::{Float, One};

use crate::cyclic_algebra::{
    coords, duality_morphisms, group_inv, group_mul, nu, pair_admissible, phi, phi_bar,
    psi_coeffs, psi_scalar, GroupElement, PairBasis, RootData,
};
use crate::error::{Error, Result};
use crate::matrix::{c64, identity, kron, mat_pow, residual, scalar_part, zeros, CMat};

/// Tolerance used when matching block labels.
pub const LABEL_TOL: f64 = 1e-9;

/// Which half of H a block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    /// H^{g,h}_{gh} = Hom(V_gh, V_g (x) V_h), basis e_i.
    Check,
    /// H_{g,h}^{gh} = Hom(V_g (x) V_h, V_gh), basis e*_i.
    Hat,
}

impl Kind {
    pub fn flip(self) -> Kind {
        match self {
            Kind::Check => Kind::Hat,
            Kind::Hat => Kind::Check,
        }
    }
}

/// One multiplicity space, labelled by its kind and the pair (g, h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub kind: Kind,
    pub g: GroupElement,
    pub h: GroupElement,
}

impl Block {
    pub fn check(g: GroupElement, h: GroupElement) -> Self {
        Self { kind: Kind::Check, g, h }
    }

    pub fn hat(g: GroupElement, h: GroupElement) -> Self {
        Self { kind: Kind::Hat, g, h }
    }

    pub fn gh(&self) -> GroupElement {
        group_mul(self.g, self.h)
    }

    /// The block with the same labels and the other kind; its basis is dual to ours.
    pub fn dual(&self) -> Self {
        Self { kind: self.kind.flip(), ..*self }
    }

    pub fn approx_eq(&self, other: &Block) -> bool {
        self.kind == other.kind
            && self.g.approx_eq(other.g, LABEL_TOL)
            && self.h.approx_eq(other.h, LABEL_TOL)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::Check => "check",
            Kind::Hat => "hat",
        };
        write!(f, "{k}[({}, {}), ({}, {})]", self.g.x, self.g.y, self.h.x, self.h.y)
    }
}

/// The named operators on H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    A,
    AStar,
    B,
    BStar,
    L,
    R,
    C,
    SqrtR,
    SqrtL,
    /// The involution A (sqrt L)^{-1}.
    SfA,
    /// The involution B (sqrt R)^{-1}.
    SfB,
    /// The T-scalar sqrt(R) B sqrt(L) B sqrt(L)^{-1}.
    Q,
}

impl Op {
    /// True for operators that map every block to itself.
    pub fn preserves_blocks(self) -> bool {
        !matches!(self, Op::A | Op::AStar | Op::B | Op::BStar | Op::SfA | Op::SfB)
    }
}

/// The block that `op` maps `b` into.
pub fn target(op: Op, b: Block) -> Block {
    match op {
        Op::A | Op::AStar | Op::SfA => Block { kind: b.kind.flip(), g: group_inv(b.g), h: b.gh() },
        Op::B | Op::BStar | Op::SfB => Block { kind: b.kind.flip(), g: b.gh(), h: group_inv(b.h) },
        _ => b,
    }
}

/// A linear map between two labelled blocks.
#[derive(Debug, Clone)]
pub struct BlockMap {
    pub source: Block,
    pub target: Block,
    pub matrix: CMat,
}

impl BlockMap {
    pub fn identity(block: Block, n: usize) -> Self {
        Self { source: block, target: block, matrix: identity(n) }
    }

    /// `next` after `self`; fails unless `next` starts where `self` ends.
    pub fn then(&self, next: &BlockMap) -> Result<BlockMap> {
        if !next.source.approx_eq(&self.target) {
            return Err(Error::BlockMismatch(format!(
                "cannot apply a map on {} to a vector in {}",
                next.source, self.target
            )));
        }
        Ok(BlockMap { source: self.source, target: next.target, matrix: &next.matrix * &self.matrix })
    }

    /// Residual against another map with the same source and target.
    pub fn residual(&self, other: &BlockMap) -> Result<f64> {
        if !self.source.approx_eq(&other.source) || !self.target.approx_eq(&other.target) {
            return Err(Error::BlockMismatch(format!(
                "comparing {} -> {} with {} -> {}",
                self.source, self.target, other.source, other.target
            )));
        }
        Ok(residual(&self.matrix, &other.matrix))
    }

    pub fn scale(mut self, s: Complex64) -> Self {
        self.matrix *= s;
        self
    }
}

/// Exact half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt {
    pub doubled: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { doubled: 0 };
    pub const HALF: HalfInt = HalfInt { doubled: 1 };

    pub fn from_doubled(doubled: i64) -> Self {
        Self { doubled }
    }

    pub fn from_int(v: i64) -> Self {
        Self { doubled: 2 * v }
    }

    pub fn value(self) -> f64 {
        self.doubled as f64 / 2.0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt { doubled: self.doubled + o.doubled }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt { doubled: self.doubled - o.doubled }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { doubled: -self.doubled }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.doubled % 2 == 0 {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

/// Scalars shared by the closed forms on one block.
struct BlockScalars {
    g: GroupElement,
    h: GroupElement,
    gs: GroupElement,
    hs: GroupElement,
    vg: f64,
    vgh: f64,
    l_ratio: f64,
}

impl BlockScalars {
    fn new(rd: &RootData, b: &Block) -> Result<Self> {
        if !pair_admissible(b.g, b.h) {
            return Err(Error::ZeroX { x: b.gh().x });
        }
        let (cg, ch, cgh) = (coords(b.g, rd)?, coords(b.h, rd)?, coords(b.gh(), rd)?);
        Ok(Self {
            g: b.g,
            h: b.h,
            gs: group_inv(b.g),
            hs: group_inv(b.h),
            vg: cg.v,
            vgh: cgh.v,
            l_ratio: cg.u * ch.v / cgh.v,
        })
    }

    /// Psi_{g*,gh}(eps_g w).
    fn psi1(&self, rd: &RootData) -> Result<Complex64> {
        let cf = psi_coeffs(self.gs, group_mul(self.g, self.h), rd)?;
        Ok(psi_scalar(&cf, rd, rd.omega() * coords(self.g, rd)?.eps_g()))
    }

    /// Psi_{g,h}(w / eps_g).
    fn psi2(&self, rd: &RootData) -> Result<Complex64> {
        let cf = psi_coeffs(self.g, self.h, rd)?;
        Ok(psi_scalar(&cf, rd, rd.omega() / coords(self.g, rd)?.eps_g()))
    }
}

/// `x^((N-1)/2)` for a real ratio `x`, a square root of the positive base `x^(N-1)`.
/// The sign of `x` is kept when `(N-1)/2` is odd.
fn half_power(x: f64, n: usize) -> Result<f64> {
    let base = x.powi(n as i32 - 1);
    if base.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
        return Err(Error::NegativeBase { base });
    }
    Ok(x.powi((n as i32 - 1) / 2))
}

fn closed_form(rd: &RootData, op: Op, b: Block) -> Result<CMat> {
    let n = rd.n();
    let ni = n as i64;
    let s = BlockScalars::new(rd, &b)?;
    let mut m = zeros(n, n);
    let idx = |k: i64| rd.residue(k);
    match (op, b.kind) {
        (Op::A, Kind::Check) => {
            let p1 = s.psi1(rd)?;
            for i in 0..ni {
                for j in 0..ni {
                    m[(idx(j), idx(i))] = p1 * phi(rd, s.gs, i - j);
                }
            }
        }
        (Op::A, Kind::Hat) => {
            let p2 = s.psi2(rd)?;
            for i in 0..ni {
                for j in 0..ni {
                    m[(idx(j), idx(i))] = phi_bar(rd, s.g, j - i) / (p2 * n as f64);
                }
            }
        }
        (Op::AStar, Kind::Check) => {
            let p2 = s.psi2(rd)?;
            for i in 0..ni {
                for j in 0..ni {
                    m[(idx(j), idx(i))] = p2 * phi(rd, s.g, j - i);
                }
            }
        }
        (Op::AStar, Kind::Hat) => {
            let p1 = s.psi1(rd)?;
            for i in 0..ni {
                for j in 0..ni {
                    m[(idx(j), idx(i))] = phi_bar(rd, s.gs, i - j) / (p1 * n as f64);
                }
            }
        }
        (Op::B, Kind::Check) => {
            let k = nu(c64(s.vgh / s.vg, 0.0), rd)?;
            for i in 0..ni {
                m[(idx(-i), idx(i))] = phi(rd, s.h, i) / k;
            }
        }
        (Op::B, Kind::Hat) => {
            let k = nu(c64(s.vg / s.vgh, 0.0), rd)?;
            for i in 0..ni {
                m[(idx(-i), idx(i))] = k * phi_bar(rd, s.hs, -i);
            }
        }
        (Op::BStar, Kind::Check) => {
            let k = nu(c64(s.vg / s.vgh, 0.0), rd)?;
            for i in 0..ni {
                m[(idx(-i), idx(i))] = phi(rd, s.hs, -i) / k;
            }
        }
        (Op::BStar, Kind::Hat) => {
            let k = nu(c64(s.vgh / s.vg, 0.0), rd)?;
            for i in 0..ni {
                m[(idx(-i), idx(i))] = k * phi_bar(rd, s.h, i);
            }
        }
        (Op::L, kind) => {
            let sc = c64(s.l_ratio.powi(ni as i32 - 1), 0.0);
            let step = if kind == Kind::Check { -1 } else { 1 };
            for i in 0..ni {
                m[(idx(i + step), idx(i))] = sc;
            }
        }
        (Op::R, _) => {
            let sc = (s.vg / s.vgh).powi(ni as i32 - 1);
            for i in 0..ni {
                m[(idx(i), idx(i))] = rd.w(-i) * sc;
            }
        }
        (Op::SqrtR, _) => {
            let sc = half_power(s.vg / s.vgh, n)?;
            for i in 0..ni {
                m[(idx(i), idx(i))] = rd.w(-((ni + 1) / 2) * i) * sc;
            }
        }
        (Op::SqrtL, kind) => {
            let sc = c64(half_power(s.l_ratio, n)?, 0.0);
            let half = (ni + 1) / 2;
            let step = if kind == Kind::Check { -half } else { half };
            for i in 0..ni {
                m[(idx(i + step), idx(i))] = sc;
            }
        }
        _ => unreachable!("composite operators are evaluated as words"),
    }
    Ok(m)
}

/// The restriction of `op` to one block.
pub fn op_block(rd: &RootData, op: Op, b: Block) -> Result<BlockMap> {
    match op {
        Op::C => eval_word(rd, &[(Op::A, 1), (Op::B, 1), (Op::A, 1), (Op::B, 1), (Op::A, 1), (Op::B, 1)], b),
        Op::SfA => eval_word(rd, &[(Op::A, 1), (Op::SqrtL, -1)], b),
        Op::SfB => eval_word(rd, &[(Op::B, 1), (Op::SqrtR, -1)], b),
        Op::Q => eval_word(rd, &[(Op::SqrtR, 1), (Op::B, 1), (Op::SqrtL, 1), (Op::B, 1), (Op::SqrtL, -1)], b),
        _ => Ok(BlockMap { source: b, target: target(op, b), matrix: closed_form(rd, op, b)? }),
    }
}

/// `op^p` on one block. Negative powers are allowed for block-preserving
/// operators and for the involutions A, B, 𝖠, 𝖡.
pub fn op_pow_block(rd: &RootData, op: Op, p: i64, b: Block) -> Result<BlockMap> {
    if p == 0 {
        return Ok(BlockMap::identity(b, rd.n()));
    }
    if op.preserves_blocks() {
        let m = op_block(rd, op, b)?;
        return Ok(BlockMap { source: b, target: b, matrix: mat_pow(&m.matrix, p)? });
    }
    if p < 0 && !matches!(op, Op::A | Op::B | Op::SfA | Op::SfB) {
        return Err(Error::BadOperands("negative powers of A* and B* are not provided"));
    }
    let mut acc = BlockMap::identity(b, rd.n());
    for _ in 0..p.unsigned_abs() {
        acc = acc.then(&op_block(rd, op, acc.target)?)?;
    }
    Ok(acc)
}

/// Evaluates a word of operator powers on a block. The rightmost factor acts first.
pub fn eval_word(rd: &RootData, word: &[(Op, i64)], b: Block) -> Result<BlockMap> {
    let mut acc = BlockMap::identity(b, rd.n());
    for &(op, p) in word.iter().rev() {
        acc = acc.then(&op_pow_block(rd, op, p, acc.target)?)?;
    }
    Ok(acc)
}

/// `(sqrt R)^(2c)` on a block.
pub fn pow_r_block(rd: &RootData, c: HalfInt, b: Block) -> Result<BlockMap> {
    op_pow_block(rd, Op::SqrtR, c.doubled, b)
}

/// `(sqrt L)^(2a)` on a block.
pub fn pow_l_block(rd: &RootData, a: HalfInt, b: Block) -> Result<BlockMap> {
    op_pow_block(rd, Op::SqrtL, a.doubled, b)
}

/// An operator restricted to the two blocks attached to a pair (g, h).
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub g: GroupElement,
    pub h: GroupElement,
    pub check_part: CMat,
    pub hat_part: CMat,
    pub check_target: Block,
    pub hat_target: Block,
}

impl BlockOperator {
    fn from_maps(g: GroupElement, h: GroupElement, c: BlockMap, t: BlockMap) -> Self {
        Self { g, h, check_part: c.matrix, hat_part: t.matrix, check_target: c.target, hat_target: t.target }
    }

    /// The operator `op^p` on the pair (g, h).
    pub fn new(rd: &RootData, op: Op, p: i64, g: GroupElement, h: GroupElement) -> Result<Self> {
        let c = op_pow_block(rd, op, p, Block::check(g, h))?;
        let t = op_pow_block(rd, op, p, Block::hat(g, h))?;
        Ok(Self::from_maps(g, h, c, t))
    }

    pub fn part(&self, kind: Kind) -> &CMat {
        match kind {
            Kind::Check => &self.check_part,
            Kind::Hat => &self.hat_part,
        }
    }
}

pub fn op_a(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::A, 1, g, h)
}

pub fn op_astar(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::AStar, 1, g, h)
}

pub fn op_b(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::B, 1, g, h)
}

pub fn op_bstar(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::BStar, 1, g, h)
}

pub fn op_l(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::L, 1, g, h)
}

pub fn op_r(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::R, 1, g, h)
}

pub fn op_sqrt_r(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::SqrtR, 1, g, h)
}

pub fn op_sqrt_l(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::SqrtL, 1, g, h)
}

pub fn pow_r(g: GroupElement, h: GroupElement, c: HalfInt, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::SqrtR, c.doubled, g, h)
}

pub fn pow_l(g: GroupElement, h: GroupElement, a: HalfInt, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::SqrtL, a.doubled, g, h)
}

pub fn op_c(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::C, 1, g, h)
}

pub fn op_sf_a(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::SfA, 1, g, h)
}

pub fn op_sf_b(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    BlockOperator::new(rd, Op::SfB, 1, g, h)
}

/// The eigenvalue of q on a block: `(-1)^((N-1)/2) w^(-a)` on hat and `w^(+a)` on check,
/// with `a = (N^2 - 1) / 8`.
pub fn q_scalar(rd: &RootData, kind: Kind) -> Complex64 {
    let n = rd.n() as i64;
    let a = (n * n - 1) / 8;
    let sign = if ((n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    match kind {
        Kind::Hat => rd.w(-a) * sign,
        Kind::Check => rd.w(a) * sign,
    }
}

/// q~, the eigenvalue of q on the hat half.
pub fn qtilde(rd: &RootData) -> Complex64 {
    q_scalar(rd, Kind::Hat)
}

/// `q~^k` for any integer `k`.
pub fn qtilde_pow(rd: &RootData, k: i64) -> Complex64 {
    let q = qtilde(rd);
    if k >= 0 {
        q.powu(k as u32)
    } else {
        q.inv().powu((-k) as u32)
    }
}

/// Coordinates of a check-side morphism `f` (N^2 x N) in the basis e_b of `pb`.
fn check_coords(pb: &PairBasis, f: &CMat) -> Result<Vec<Complex64>> {
    (0..pb.n()).map(|b| scalar_part(&(pb.hat(b) * f), 1e-8)).collect()
}

/// Coordinates of a hat-side morphism `f` (N x N^2) in the basis e*_b of `pb`.
fn hat_coords(pb: &PairBasis, f: &CMat) -> Result<Vec<Complex64>> {
    (0..pb.n()).map(|b| scalar_part(&(f * pb.check(b)), 1e-8)).collect()
}

/// A computed by bending legs with the duality morphisms, read off in the standard bases.
pub fn op_a_oracle(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    let n = rd.n();
    let id = identity(n);
    let src = PairBasis::new(g, h, rd)?;
    let gs = group_inv(g);
    let dst = PairBasis::new(gs, group_mul(g, h), rd)?;
    let (d_gs, b_gs) = duality_morphisms(gs, rd);
    let mut check_part = zeros(n, n);
    let mut hat_part = zeros(n, n);
    for a in 0..n {
        // (d_{g*} (x) Id)(Id (x) e_a): V_{g*} (x) V_gh -> V_h, a hat morphism.
        let f = kron(&d_gs, &id) * kron(&id, &src.check(a));
        for (b, z) in hat_coords(&dst, &f)?.into_iter().enumerate() {
            check_part[(b, a)] = z;
        }
        // (Id (x) e*_a)(b_{g*} (x) Id): V_h -> V_{g*} (x) V_gh, a check morphism.
        let f = kron(&id, &src.hat(a)) * kron(&b_gs, &id);
        for (b, z) in check_coords(&dst, &f)?.into_iter().enumerate() {
            hat_part[(b, a)] = z;
        }
    }
    let c = Block::check(g, h);
    let t = Block::hat(g, h);
    Ok(BlockOperator { g, h, check_part, hat_part, check_target: target(Op::A, c), hat_target: target(Op::A, t) })
}

/// B computed by bending legs with the duality morphisms, read off in the standard bases.
pub fn op_b_oracle(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<BlockOperator> {
    let n = rd.n();
    let id = identity(n);
    let src = PairBasis::new(g, h, rd)?;
    let hs = group_inv(h);
    let dst = PairBasis::new(group_mul(g, h), hs, rd)?;
    let (d_h, b_h) = duality_morphisms(h, rd);
    let mut check_part = zeros(n, n);
    let mut hat_part = zeros(n, n);
    for a in 0..n {
        // (Id (x) d_h)(e_a (x) Id): V_gh (x) V_{h*} -> V_g, a hat morphism.
        let f = kron(&id, &d_h) * kron(&src.check(a), &id);
        for (b, z) in hat_coords(&dst, &f)?.into_iter().enumerate() {
            check_part[(b, a)] = z;
        }
        // (e*_a (x) Id)(Id (x) b_h): V_g -> V_gh (x) V_{h*}, a check morphism.
        let f = kron(&src.hat(a), &id) * kron(&id, &b_h);
        for (b, z) in check_coords(&dst, &f)?.into_iter().enumerate() {
            hat_part[(b, a)] = z;
        }
    }
    let c = Block::check(g, h);
    let t = Block::hat(g, h);
    Ok(BlockOperator { g, h, check_part, hat_part, check_target: target(Op::B, c), hat_target: target(Op::B, t) })
}

fn word_vs_word(rd: &RootData, lhs: &[(Op, i64)], rhs: &[(Op, i64)], b: Block) -> Result<f64> {
    eval_word(rd, lhs, b)?.residual(&eval_word(rd, rhs, b)?)
}

fn word_vs_scalar(rd: &RootData, word: &[(Op, i64)], s: Complex64, b: Block) -> Result<f64> {
    let m = eval_word(rd, word, b)?;
    m.residual(&BlockMap::identity(b, rd.n()).scale(s))
}

/// Residuals of the operator identities on both blocks of the pair (g, h), as
/// `(identity name, residual)`. The maximum over both blocks is reported.
pub fn operator_identity_residuals(
    rd: &RootData,
    g: GroupElement,
    h: GroupElement,
) -> Result<Vec<(&'static str, f64)>> {
    use Op::*;
    let one = Complex64::one();
    let mut out: Vec<(&'static str, f64)> = Vec::new();
    let mut push = |name: &'static str, r: f64| match out.iter_mut().find(|(n, _)| *n == name) {
        Some(e) => e.1 = e.1.max(r),
        None => out.push((name, r)),
    };
    let a_closed = op_a(g, h, rd)?;
    let a_oracle = op_a_oracle(g, h, rd)?;
    let b_closed = op_b(g, h, rd)?;
    let b_oracle = op_b_oracle(g, h, rd)?;
    for kind in [Kind::Check, Kind::Hat] {
        push("A closed form = oracle", residual(a_closed.part(kind), a_oracle.part(kind)));
        push("B closed form = oracle", residual(b_closed.part(kind), b_oracle.part(kind)));
    }
    for b in [Block::check(g, h), Block::hat(g, h)] {
        let kind = b.kind;
        push("A^2 = Id", word_vs_scalar(rd, &[(A, 2)], one, b)?);
        push("B^2 = Id", word_vs_scalar(rd, &[(B, 2)], one, b)?);
        push("L = A*A", word_vs_word(rd, &[(L, 1)], &[(AStar, 1), (A, 1)], b)?);
        push("R = B*B", word_vs_word(rd, &[(R, 1)], &[(BStar, 1), (B, 1)], b)?);
        push("C = (AB)^3 = Id", word_vs_scalar(rd, &[(C, 1)], one, b)?);
        push("sqrtR^2 = R", word_vs_word(rd, &[(SqrtR, 2)], &[(R, 1)], b)?);
        push("sqrtL^2 = L", word_vs_word(rd, &[(SqrtL, 2)], &[(L, 1)], b)?);
        push(
            "sqrtL = BA sqrtR^-1 AB",
            word_vs_word(rd, &[(SqrtL, 1)], &[(B, 1), (A, 1), (SqrtR, -1), (A, 1), (B, 1)], b)?,
        );
        push("q = q-lemma scalar", word_vs_scalar(rd, &[(Q, 1)], q_scalar(rd, kind), b)?);
        push("ALA = L^-1", word_vs_word(rd, &[(A, 1), (L, 1), (A, 1)], &[(L, -1)], b)?);
        push("BRB = R^-1", word_vs_word(rd, &[(B, 1), (R, 1), (B, 1)], &[(R, -1)], b)?);
        push("ARA = L^-1 R", word_vs_word(rd, &[(A, 1), (R, 1), (A, 1)], &[(L, -1), (R, 1)], b)?);
        push("BLB = R^-1 L", word_vs_word(rd, &[(B, 1), (L, 1), (B, 1)], &[(R, -1), (L, 1)], b)?);
        push("sfA^2 = Id", word_vs_scalar(rd, &[(SfA, 2)], one, b)?);
        push("sfB^2 = Id", word_vs_scalar(rd, &[(SfB, 2)], one, b)?);
        let comm = match kind {
            Kind::Hat => rd.w(1),
            Kind::Check => rd.w(-1),
        };
        push("LRL^-1R^-1 = w^+-1", word_vs_scalar(rd, &[(L, 1), (R, 1), (L, -1), (R, -1)], comm, b)?);
        push("LRL^-1R^-1 = q^8", word_vs_scalar(rd, &[(L, 1), (R, 1), (L, -1), (R, -1)], q_scalar(rd, kind).powu(8), b)?);
        for x in [SqrtR, SqrtL] {
            push("sqrtR, sqrtL commute with C", word_vs_word(rd, &[(x, 1), (C, 1)], &[(C, 1), (x, 1)], b)?);
        }
        push("B sqrtR B = sqrtR^-1", word_vs_word(rd, &[(B, 1), (SqrtR, 1), (B, 1)], &[(SqrtR, -1)], b)?);
        push("A sqrtL A = sqrtL^-1", word_vs_word(rd, &[(A, 1), (SqrtL, 1), (A, 1)], &[(SqrtL, -1)], b)?);
        let q = eval_word(rd, &[(Q, 1)], b)?.matrix;
        push("q unitary", residual(&(&q * q.adjoint()), &identity(rd.n())));
    }
    Ok(out)
}

/// The scalar s with (𝖡𝖠)^3 = s Id on a block.
pub fn sf_ba_cubed_scalar(rd: &RootData, b: Block) -> Result<Complex64> {
    let m = eval_word(rd, &[(Op::SfB, 1), (Op::SfA, 1), (Op::SfB, 1), (Op::SfA, 1), (Op::SfB, 1), (Op::SfA, 1)], b)?;
    scalar_part(&m.matrix, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic_algebra::random_pair;
    use crate::matrix::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rd(n: usize) -> RootData {
        RootData::new(n, 1).unwrap()
    }

    #[test]
    fn all_operator_identities_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3, 5, 7] {
            let r = rd(n);
            for _ in 0..15 {
                let (g, h) = random_pair(&r, &mut rng);
                for (name, res) in operator_identity_residuals(&r, g, h).unwrap() {
                    assert!(res < 1e-9, "N={n} {name}: {res:e}");
                }
            }
        }
    }

    #[test]
    fn b_on_e0() {
        let r = rd(5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (g, h) = random_pair(&r, &mut rng);
        let b = op_b(g, h, &r).unwrap();
        let vg = coords(g, &r).unwrap().v;
        let vgh = coords(group_mul(g, h), &r).unwrap().v;
        let expect = nu(c64(vgh / vg, 0.0), &r).unwrap().inv();
        assert!((b.check_part[(0, 0)] - expect).norm() < 1e-12);
        for i in 1..5 {
            assert!(b.check_part[(i, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn oracle_b_is_antidiagonal() {
        let r = rd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (g, h) = random_pair(&r, &mut rng);
        let b = op_b_oracle(g, h, &r).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if (i + j) % 3 != 0 {
                    assert!(b.check_part[(j, i)].norm() < 1e-9);
                    assert!(b.hat_part[(j, i)].norm() < 1e-9);
                }
            }
        }
        let a = op_a_oracle(g, h, &r).unwrap();
        let a2 = eval_word(&r, &[(Op::A, 1)], a.check_target).unwrap();
        assert!(max_abs_diff(&(a2.matrix * &a.check_part), &identity(3)) < 1e-9);
    }

    #[test]
    fn structural_shapes() {
        let r = rd(5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (g, h) = random_pair(&r, &mut rng);
        let rr = op_r(g, h, &r).unwrap();
        let ll = op_l(g, h, &r).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(rr.check_part[(i, j)], Complex64::new(0.0, 0.0));
                }
                let shifted = (j + 4) % 5 == i;
                assert_eq!(ll.check_part[(i, j)].norm() > 0.0, shifted);
            }
        }
        let b = op_sf_b(g, h, &r).unwrap();
        assert_eq!(b.check_target.kind, Kind::Hat);
        assert_eq!(b.hat_target.kind, Kind::Check);
    }

    #[test]
    fn qtilde_at_three() {
        let r = rd(3);
        assert!((qtilde(&r) + r.w(-1)).norm() < 1e-15);
        assert!((q_scalar(&r, Kind::Check) * qtilde(&r) - 1.0).norm() < 1e-14);
        assert!((qtilde_pow(&r, -4) * qtilde_pow(&r, 4) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn word_evaluator_rejects_mismatched_blocks() {
        let r = rd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, h) = random_pair(&r, &mut rng);
        let a = op_block(&r, Op::A, Block::check(g, h)).unwrap();
        let l = op_block(&r, Op::L, Block::check(g, h)).unwrap();
        assert!(matches!(a.then(&l), Err(Error::BlockMismatch(_))));
        let lhs = eval_word(&r, &[(Op::A, 1)], Block::check(g, h)).unwrap();
        let rhs = eval_word(&r, &[(Op::B, 1)], Block::check(g, h)).unwrap();
        assert!(lhs.residual(&rhs).is_err());
        assert!(op_pow_block(&r, Op::AStar, -1, Block::check(g, h)).is_err());
    }

    #[test]
    fn sf_ba_cubed_is_q_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [3, 5] {
            let r = rd(n);
            for _ in 0..5 {
                let (g, h) = random_pair(&r, &mut rng);
                for b in [Block::check(g, h), Block::hat(g, h)] {
                    let s = sf_ba_cubed_scalar(&r, b).unwrap();
                    assert!((s - q_scalar(&r, b.kind).powu(2)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn half_int_arithmetic() {
        let a = HalfInt::from_doubled(3);
        assert_eq!((a + HalfInt::HALF).doubled, 4);
        assert_eq!((-a).value(), -1.5);
        assert_eq!(alloc::format!("{a}"), "3/2");
        assert_eq!(alloc::format!("{}", HalfInt::from_int(2)), "2");
    }
}
