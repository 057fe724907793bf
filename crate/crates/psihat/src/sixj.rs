//! The tetrahedral forms T and T-bar restricted to fixed labels, the charged
//! positive and negative 6j-symbols, and residual checkers for the pentagon,
//! inversion and symmetry identities.
//!
//! Leg conventions. A positive symbol for labels (i,j,k,l,m,n) is the tensor
//! `sj[a,b,c,d] = T(e*_a, e*_b, e_c, e_d)` with arguments in
//! `hat(k,l), hat(i,j), check(j,l), check(i,n)`; as a vector its legs live in the
//! dual blocks `check(k,l), check(i,j), hat(j,l), hat(i,n)`. A negative symbol is
//! `T-bar` on `hat(i,n), hat(j,l), check(i,j), check(k,l)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;

use crate::cyclic_algebra::{
    group_inv, group_mul, pair_admissible, psi_coeffs, random_element, well_inside, GroupElement, PairBasis,
    RootData,
};
use crate::error::{Error, Result};
use crate::matrix::{identity, kron, scalar_part, CMat};
use crate::psi_operators::{
    op_block, pow_l_block, pow_r_block, qtilde_pow, Block, BlockMap, HalfInt, Kind, Op,
    LABEL_TOL,
};
use crate::tensor::Tensor;

/// Tolerance for the scalar extraction of a composite endomorphism of V_m.
const SCALAR_TOL: f64 = 1e-9;

/// Six labels with k = ij, n = jl, m = kl = in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelSix {
    pub i: GroupElement,
    pub j: GroupElement,
    pub k: GroupElement,
    pub l: GroupElement,
    pub m: GroupElement,
    pub n: GroupElement,
}

impl LabelSix {
    /// Labels determined by i, j, l.
    pub fn from_ijl(i: GroupElement, j: GroupElement, l: GroupElement) -> Result<Self> {
        let k = group_mul(i, j);
        let n = group_mul(j, l);
        let m = group_mul(k, l);
        Self::new(i, j, k, l, m, n)
    }

    pub fn new(
        i: GroupElement,
        j: GroupElement,
        k: GroupElement,
        l: GroupElement,
        m: GroupElement,
        n: GroupElement,
    ) -> Result<Self> {
        let s = Self { i, j, k, l, m, n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("k = ij", group_mul(self.i, self.j), self.k),
            ("n = jl", group_mul(self.j, self.l), self.n),
            ("m = kl", group_mul(self.k, self.l), self.m),
            ("m = in", group_mul(self.i, self.n), self.m),
        ];
        for (name, lhs, rhs) in checks {
            if !lhs.approx_eq(rhs, LABEL_TOL) {
                return Err(Error::InvalidLabels(format!("{name} fails: {lhs:?} vs {rhs:?}")));
            }
        }
        for (name, g) in self.named() {
            if !g.in_i() {
                return Err(Error::InvalidLabels(format!("{name} = {g:?} is not in I")));
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, GroupElement); 6] {
        [("i", self.i), ("j", self.j), ("k", self.k), ("l", self.l), ("m", self.m), ("n", self.n)]
    }

    /// Random labels whose six entries stay well inside I.
    pub fn random<R: Rng + ?Sized>(rd: &RootData, rng: &mut R) -> Self {
        loop {
            let (i, j, l) = (random_element(rng), random_element(rng), random_element(rng));
            if let Ok(s) = Self::from_ijl(i, j, l) {
                if s.named().iter().all(|(_, g)| well_inside(*g)) && s.pairs_generic(rd) {
                    return s;
                }
            }
        }
    }

    fn pairs_generic(&self, rd: &RootData) -> bool {
        [(self.i, self.j), (self.j, self.l), (self.k, self.l), (self.i, self.n)]
            .iter()
            .all(|&(g, h)| psi_coeffs(g, h, rd).is_ok())
    }

    /// Argument blocks of T (positive) or T-bar (negative).
    pub fn form_slots(&self, sign: Sign) -> [Block; 4] {
        match sign {
            Sign::Positive => [
                Block::hat(self.k, self.l),
                Block::hat(self.i, self.j),
                Block::check(self.j, self.l),
                Block::check(self.i, self.n),
            ],
            Sign::Negative => [
                Block::hat(self.i, self.n),
                Block::hat(self.j, self.l),
                Block::check(self.i, self.j),
                Block::check(self.k, self.l),
            ],
        }
    }
}

/// Positive (T) or negative (T-bar) symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// A charged 6j-symbol: an N^4 tensor with its labels and charges.
#[derive(Debug, Clone)]
pub struct Sixj {
    pub sign: Sign,
    pub labels: LabelSix,
    pub a: HalfInt,
    pub c: HalfInt,
    pub tensor: Tensor,
}

impl Sixj {
    /// The blocks the vector legs live in (duals of the form arguments).
    pub fn leg_blocks(&self) -> [Block; 4] {
        self.labels.form_slots(self.sign).map(|b| b.dual())
    }

    pub fn leg_kinds(&self) -> [Kind; 4] {
        self.leg_blocks().map(|b| b.kind)
    }
}

/// Morphism entries of the bases of one pair, indexed as 3-tensors.
struct Bases {
    n: usize,
    pb: PairBasis,
}

impl Bases {
    fn new(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<Self> {
        Ok(Self { n: rd.n(), pb: PairBasis::new(g, h, rd)? })
    }

    /// e_i as `[p][q][c]` with p in V_g, q in V_h, c in V_gh.
    #[inline]
    fn check(&self, i: usize, p: usize, q: usize, c: usize) -> Complex64 {
        self.pb.s[(p * self.n + q, c * self.n + i)]
    }

    /// e*_i as `[s][a][b]` with s in V_gh, a in V_g, b in V_h.
    #[inline]
    fn hat(&self, i: usize, s: usize, a: usize, b: usize) -> Complex64 {
        self.pb.s_inv[(s * self.n + i, a * self.n + b)]
    }
}

fn require_pairs(labels: &LabelSix) -> Result<()> {
    labels.validate()?;
    for (g, h) in [(labels.i, labels.j), (labels.j, labels.l), (labels.k, labels.l), (labels.i, labels.n)] {
        if !pair_admissible(g, h) {
            return Err(Error::InvalidLabels(format!("pair ({g:?}, {h:?}) is not admissible")));
        }
    }
    Ok(())
}

fn extract(f: &CMat) -> Result<Complex64> {
    scalar_part(f, SCALAR_TOL)
}

/// T on basis vectors, composed as explicit matrices `u (v (x) id)(id (x) x) y`.
pub fn t_form(rd: &RootData, labels: &LabelSix, idx: [usize; 4]) -> Result<Complex64> {
    require_pairs(labels)?;
    let id = identity(rd.n());
    let u = PairBasis::new(labels.k, labels.l, rd)?.hat(idx[0]);
    let v = PairBasis::new(labels.i, labels.j, rd)?.hat(idx[1]);
    let x = PairBasis::new(labels.j, labels.l, rd)?.check(idx[2]);
    let y = PairBasis::new(labels.i, labels.n, rd)?.check(idx[3]);
    extract(&(u * kron(&v, &id) * kron(&id, &x) * y))
}

/// T-bar on basis vectors, composed as explicit matrices `u (id (x) v)(x (x) id) y`.
pub fn tbar_form(rd: &RootData, labels: &LabelSix, idx: [usize; 4]) -> Result<Complex64> {
    require_pairs(labels)?;
    let id = identity(rd.n());
    let u = PairBasis::new(labels.i, labels.n, rd)?.hat(idx[0]);
    let v = PairBasis::new(labels.j, labels.l, rd)?.hat(idx[1]);
    let x = PairBasis::new(labels.i, labels.j, rd)?.check(idx[2]);
    let y = PairBasis::new(labels.k, labels.l, rd)?.check(idx[3]);
    extract(&(u * kron(&id, &v) * kron(&x, &id) * y))
}

/// All N^4 values of T, with the (id (x) x) y stage shared across the outer indices.
pub fn t_tensor(rd: &RootData, labels: &LabelSix) -> Result<Tensor> {
    require_pairs(labels)?;
    let n = rd.n();
    let bu = Bases::new(labels.k, labels.l, rd)?;
    let bv = Bases::new(labels.i, labels.j, rd)?;
    let bx = Bases::new(labels.j, labels.l, rd)?;
    let by = Bases::new(labels.i, labels.n, rd)?;
    let mut out = Tensor::zeros(&[n, n, n, n]);
    let mut y1 = vec![Complex64::zero(); n * n * n * n];
    let mut y2 = vec![Complex64::zero(); n * n * n];
    let mut f = CMat::zeros(n, n);
    for d in 0..n {
        for g in 0..n {
            // y1[a][p][q][c] = sum_b x[p][q][b] y[a][b][c]
            for a in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        for c in 0..n {
                            let mut s = Complex64::zero();
                            for b in 0..n {
                                s += bx.check(g, p, q, b) * by.check(d, a, b, c);
                            }
                            y1[((a * n + p) * n + q) * n + c] = s;
                        }
                    }
                }
            }
            for be in 0..n {
                // y2[r][q][c] = sum_{a,p} v[r][a][p] y1[a][p][q][c]
                for r in 0..n {
                    for q in 0..n {
                        for c in 0..n {
                            let mut s = Complex64::zero();
                            for a in 0..n {
                                for p in 0..n {
                                    s += bv.hat(be, r, a, p) * y1[((a * n + p) * n + q) * n + c];
                                }
                            }
                            y2[(r * n + q) * n + c] = s;
                        }
                    }
                }
                for al in 0..n {
                    // f[s][c] = sum_{r,q} u[s][r][q] y2[r][q][c]
                    for s_ in 0..n {
                        for c in 0..n {
                            let mut s = Complex64::zero();
                            for r in 0..n {
                                for q in 0..n {
                                    s += bu.hat(al, s_, r, q) * y2[(r * n + q) * n + c];
                                }
                            }
                            f[(s_, c)] = s;
                        }
                    }
                    out.set(&[al, be, g, d], extract(&f)?);
                }
            }
        }
    }
    Ok(out)
}

/// All N^4 values of T-bar, with the (x (x) id) y stage shared across the outer indices.
pub fn tbar_tensor(rd: &RootData, labels: &LabelSix) -> Result<Tensor> {
    require_pairs(labels)?;
    let n = rd.n();
    let bu = Bases::new(labels.i, labels.n, rd)?;
    let bv = Bases::new(labels.j, labels.l, rd)?;
    let bx = Bases::new(labels.i, labels.j, rd)?;
    let by = Bases::new(labels.k, labels.l, rd)?;
    let mut out = Tensor::zeros(&[n, n, n, n]);
    let mut y1 = vec![Complex64::zero(); n * n * n * n];
    let mut y2 = vec![Complex64::zero(); n * n * n];
    let mut f = CMat::zeros(n, n);
    for d in 0..n {
        for g in 0..n {
            // y1[a][p][q][c] = sum_r x[a][p][r] y[r][q][c]
            for a in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        for c in 0..n {
                            let mut s = Complex64::zero();
                            for r in 0..n {
                                s += bx.check(g, a, p, r) * by.check(d, r, q, c);
                            }
                            y1[((a * n + p) * n + q) * n + c] = s;
                        }
                    }
                }
            }
            for be in 0..n {
                // y2[a][b][c] = sum_{p,q} v[b][p][q] y1[a][p][q][c]
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let mut s = Complex64::zero();
                            for p in 0..n {
                                for q in 0..n {
                                    s += bv.hat(be, b, p, q) * y1[((a * n + p) * n + q) * n + c];
                                }
                            }
                            y2[(a * n + b) * n + c] = s;
                        }
                    }
                }
                for al in 0..n {
                    // f[s][c] = sum_{a,b} u[s][a][b] y2[a][b][c]
                    for s_ in 0..n {
                        for c in 0..n {
                            let mut s = Complex64::zero();
                            for a in 0..n {
                                for b in 0..n {
                                    s += bu.hat(al, s_, a, b) * y2[(a * n + b) * n + c];
                                }
                            }
                            f[(s_, c)] = s;
                        }
                    }
                    out.set(&[al, be, g, d], extract(&f)?);
                }
            }
        }
    }
    Ok(out)
}

/// Twists an uncharged tensor by the charge operators, slot by slot.
fn apply_charges(rd: &RootData, sign: Sign, labels: &LabelSix, raw: Tensor, a: HalfInt, c: HalfInt) -> Result<Tensor> {
    let slots = labels.form_slots(sign);
    let ac = a.doubled * c.doubled;
    let lr = |b: Block| -> Result<CMat> {
        // L^{-a} R^{-c}: R acts first.
        let r = pow_r_block(rd, -c, b)?;
        Ok(r.then(&pow_l_block(rd, -a, b)?)?.matrix)
    };
    let ops: [CMat; 4] = match sign {
        Sign::Positive => [
            pow_r_block(rd, c, slots[0])?.matrix,
            pow_r_block(rd, -a, slots[1])?.matrix,
            lr(slots[2])?,
            identity(rd.n()),
        ],
        Sign::Negative => [
            identity(rd.n()),
            lr(slots[1])?,
            pow_r_block(rd, -a, slots[2])?.matrix,
            pow_r_block(rd, c, slots[3])?.matrix,
        ],
    };
    let mut t = raw;
    for (leg, m) in ops.iter().enumerate() {
        t = t.apply_transposed(leg, m);
    }
    // q^{+-4ac} on the first argument, which is a hat block: q acts there as qtilde.
    let k = if sign == Sign::Positive { ac } else { -ac };
    Ok(t.scale(qtilde_pow(rd, k)))
}

/// The charged positive symbol, the values of T(a, c) on basis vectors.
pub fn sixj_pos(rd: &RootData, labels: &LabelSix, a: HalfInt, c: HalfInt) -> Result<Sixj> {
    let raw = t_tensor(rd, labels)?;
    let tensor = apply_charges(rd, Sign::Positive, labels, raw, a, c)?;
    Ok(Sixj { sign: Sign::Positive, labels: *labels, a, c, tensor })
}

/// The charged negative symbol, the values of T-bar(a, c) on basis vectors.
pub fn sixj_neg(rd: &RootData, labels: &LabelSix, a: HalfInt, c: HalfInt) -> Result<Sixj> {
    let raw = tbar_tensor(rd, labels)?;
    let tensor = apply_charges(rd, Sign::Negative, labels, raw, a, c)?;
    Ok(Sixj { sign: Sign::Negative, labels: *labels, a, c, tensor })
}

/// Symbolic leg label used to match legs in small tensor networks.
type LegKey = (Kind, u8, u8);

/// A tensor whose legs carry symbolic keys.
#[derive(Debug, Clone)]
struct Keyed {
    keys: Vec<LegKey>,
    t: Tensor,
}

impl Keyed {
    fn sixj(s: &Sixj, names: [u8; 6]) -> Self {
        let [i, j, k, l, _m, n] = names;
        let keys = match s.sign {
            Sign::Positive => vec![(Kind::Check, k, l), (Kind::Check, i, j), (Kind::Hat, j, l), (Kind::Hat, i, n)],
            Sign::Negative => vec![(Kind::Check, i, n), (Kind::Check, j, l), (Kind::Hat, i, j), (Kind::Hat, k, l)],
        };
        Self { keys, t: s.tensor.clone() }
    }

    /// Contracts the legs with the given keys of `self` against the dual legs of `other`.
    fn contract(&self, other: &Keyed, keys: &[LegKey]) -> Keyed {
        let pairs: Vec<(usize, usize)> = keys
            .iter()
            .map(|k| {
                let a = self.keys.iter().position(|x| x == k).expect("key missing on left");
                let dual = (k.0.flip(), k.1, k.2);
                let b = other.keys.iter().position(|x| *x == dual).expect("dual key missing on right");
                (a, b)
            })
            .collect();
        let keys_out: Vec<LegKey> = self
            .keys
            .iter()
            .enumerate()
            .filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i))
            .map(|(_, k)| *k)
            .chain(other.keys.iter().enumerate().filter(|(i, _)| !pairs.iter().any(|p| p.1 == *i)).map(|(_, k)| *k))
            .collect();
        Keyed { keys: keys_out, t: self.t.contract(&other.t, &pairs) }
    }

    /// Reorders legs to match `order`.
    fn reorder(&self, order: &[LegKey]) -> Tensor {
        let sigma: Vec<usize> =
            self.keys.iter().map(|k| order.iter().position(|x| x == k).expect("key missing in order")).collect();
        self.t.permute(&sigma)
    }
}

/// Labels j0..j8 of the pentagon, all determined by j1..j4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PentagonLabels {
    pub j: [GroupElement; 9],
    /// The summation label j2 j3.
    pub jj: GroupElement,
}

impl PentagonLabels {
    pub fn from_free(j1: GroupElement, j2: GroupElement, j3: GroupElement, j4: GroupElement) -> Result<Self> {
        let j5 = group_mul(j1, j2);
        let jj = group_mul(j2, j3);
        let j6 = group_mul(j5, j3);
        let j8 = group_mul(j3, j4);
        let j7 = group_mul(jj, j4);
        let j0 = group_mul(j6, j4);
        let s = Self { j: [j0, j1, j2, j3, j4, j5, j6, j7, j8], jj };
        for g in s.j.iter().chain(core::iter::once(&s.jj)) {
            if !g.in_i() {
                return Err(Error::InvalidLabels(format!("pentagon label {g:?} is not in I")));
            }
        }
        Ok(s)
    }

    pub fn random<R: Rng + ?Sized>(rd: &RootData, rng: &mut R) -> Self {
        loop {
            let f = [random_element(rng), random_element(rng), random_element(rng), random_element(rng)];
            if let Ok(s) = Self::from_free(f[0], f[1], f[2], f[3]) {
                if s.j.iter().chain(core::iter::once(&s.jj)).all(|g| well_inside(*g))
                    && s.sixes().map(|l| l.map(|l| l.pairs_generic(rd)).unwrap_or(false)).iter().all(|&b| b)
                {
                    return s;
                }
            }
        }
    }

    /// The five label sets, in the order of the charges (a0..a4, c0..c4).
    fn sixes(&self) -> [Result<LabelSix>; 5] {
        let [j0, j1, j2, j3, j4, j5, j6, j7, j8] = self.j;
        let j = self.jj;
        [
            LabelSix::new(j1, j2, j5, j3, j6, j),
            LabelSix::new(j1, j2, j5, j8, j0, j7),
            LabelSix::new(j1, j, j6, j4, j0, j7),
            LabelSix::new(j5, j3, j6, j4, j0, j8),
            LabelSix::new(j2, j3, j, j4, j7, j8),
        ]
    }
}

/// Charges of the pentagon, indexed a0..a4 and c0..c4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PentagonCharges {
    pub a: [HalfInt; 5],
    pub c: [HalfInt; 5],
}

impl PentagonCharges {
    /// Charges satisfying the pentagon conditions from the free values a0, a2, a4, c0, c4.
    pub fn from_free(a0: HalfInt, a2: HalfInt, a4: HalfInt, c0: HalfInt, c4: HalfInt) -> Self {
        let a1 = a0 + a2;
        let a3 = a2 + a4;
        let c1 = c0 + a4;
        let c3 = a0 + c4;
        let c2 = c1 + c3;
        Self { a: [a0, a1, a2, a3, a4], c: [c0, c1, c2, c3, c4] }
    }

    pub fn check(&self) -> Result<()> {
        let [a0, a1, a2, a3, a4] = self.a;
        let [c0, c1, c2, c3, c4] = self.c;
        let conds = [
            ("a1 = a0 + a2", a1 == a0 + a2),
            ("a3 = a2 + a4", a3 == a2 + a4),
            ("c1 = c0 + a4", c1 == c0 + a4),
            ("c3 = a0 + c4", c3 == a0 + c4),
            ("c2 = c1 + c3", c2 == c1 + c3),
        ];
        for (name, ok) in conds {
            if !ok {
                return Err(Error::ChargeConstraint(format!("pentagon condition {name} fails")));
            }
        }
        Ok(())
    }
}

/// Residual of the charged pentagon identity without checking the charge conditions.
pub fn pentagon_residual(rd: &RootData, labels: &PentagonLabels, ch: &PentagonCharges) -> Result<f64> {
    let sixes = labels.sixes();
    let six = |t: usize| sixes[t].clone();
    // symbolic names: 0..8 for j0..j8 and 9 for the summation label j
    const J: u8 = 9;
    let s0 = Keyed::sixj(&sixj_pos(rd, &six(0)?, ch.a[0], ch.c[0])?, [1, 2, 5, 3, 6, J]);
    let s2 = Keyed::sixj(&sixj_pos(rd, &six(2)?, ch.a[2], ch.c[2])?, [1, J, 6, 4, 0, 7]);
    let s4 = Keyed::sixj(&sixj_pos(rd, &six(4)?, ch.a[4], ch.c[4])?, [2, 3, J, 4, 7, 8]);
    let s1 = Keyed::sixj(&sixj_pos(rd, &six(1)?, ch.a[1], ch.c[1])?, [1, 2, 5, 8, 0, 7]);
    let s3 = Keyed::sixj(&sixj_pos(rd, &six(3)?, ch.a[3], ch.c[3])?, [5, 3, 6, 4, 0, 8]);
    let order = [
        (Kind::Check, 5, 3),
        (Kind::Check, 1, 2),
        (Kind::Check, 6, 4),
        (Kind::Hat, 1, 7),
        (Kind::Hat, 3, 4),
        (Kind::Hat, 2, 8),
    ];
    let lhs = s0
        .contract(&s4, &[(Kind::Hat, 2, 3)])
        .contract(&s2, &[(Kind::Hat, 1, J), (Kind::Check, J, 4)])
        .reorder(&order);
    let rhs = s1.contract(&s3, &[(Kind::Check, 5, 8)]).reorder(&order);
    Ok(lhs.residual(&rhs))
}

/// Residual of the charged pentagon identity; the charges must satisfy the pentagon conditions.
pub fn check_charged_pentagon(rd: &RootData, labels: &PentagonLabels, ch: &PentagonCharges) -> Result<f64> {
    ch.check()?;
    pentagon_residual(rd, labels, ch)
}

/// `delta_{ad} delta_{bc}` on four legs of size N.
fn projector_pair(n: usize) -> Tensor {
    Tensor::from_fn(&[n, n, n, n], |x| {
        if x[0] == x[3] && x[1] == x[2] {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::zero()
        }
    })
}

/// Residuals of the two charged inversion identities.
pub fn check_charged_inversion(rd: &RootData, labels: &LabelSix, a: HalfInt, c: HalfInt) -> Result<(f64, f64)> {
    const NAMES: [u8; 6] = [0, 1, 2, 3, 4, 5];
    let (i, j, k, l, _m, n) = (0u8, 1u8, 2u8, 3u8, 4u8, 5u8);
    let pos = Keyed::sixj(&sixj_pos(rd, labels, a, c)?, NAMES);
    let neg = Keyed::sixj(&sixj_neg(rd, labels, -a, -c)?, NAMES);
    let expect = projector_pair(rd.n());
    let first = pos
        .contract(&neg, &[(Kind::Hat, j, l), (Kind::Hat, i, n)])
        .reorder(&[(Kind::Check, k, l), (Kind::Check, i, j), (Kind::Hat, i, j), (Kind::Hat, k, l)]);
    let second = neg
        .contract(&pos, &[(Kind::Hat, i, j), (Kind::Hat, k, l)])
        .reorder(&[(Kind::Check, i, n), (Kind::Check, j, l), (Kind::Hat, j, l), (Kind::Hat, i, n)]);
    Ok((first.residual(&expect), second.residual(&expect)))
}

/// `scalar * P_sigma(O_1 (x) .. (x) O_4)^T applied to t`: the right-hand side of
/// `T(P_sigma w) = Tbar(O_1 w_1, .., O_4 w_4)` as a tensor of values of T.
fn form_relation(
    t: &Tensor,
    ops: &[(usize, BlockMap)],
    slots: &[Block; 4],
    sigma: [usize; 4],
    scalar: Complex64,
) -> Result<Tensor> {
    let mut out = t.clone();
    for (slot, m) in ops {
        if !m.target.approx_eq(&slots[*slot]) {
            return Err(Error::BlockMismatch(format!(
                "operator on slot {} lands in {}, expected {}",
                slot + 1,
                m.target,
                slots[*slot]
            )));
        }
        out = out.apply_transposed(*slot, &m.matrix);
    }
    Ok(out.permute(&sigma).scale(scalar))
}

const P4321: [usize; 4] = [3, 0, 1, 2];
const P23: [usize; 4] = [0, 2, 1, 3];
const P1234: [usize; 4] = [1, 2, 3, 0];

fn op_on(rd: &RootData, op: Op, b: Block) -> Result<BlockMap> {
    op_block(rd, op, b)
}

/// Residuals of the three charged symmetry relations, for `a + b + c = 1/2`.
pub fn check_symmetry_relations(
    rd: &RootData,
    labels: &LabelSix,
    a: HalfInt,
    b: HalfInt,
    c: HalfInt,
) -> Result<[f64; 3]> {
    if (a + b + c).doubled != 1 {
        return Err(Error::ChargeConstraint(format!("a + b + c = {} must be 1/2", a + b + c)));
    }
    symmetry_residuals(rd, labels, a, b, c)
}

/// The charged symmetry residuals without checking `a + b + c = 1/2`.
pub fn symmetry_residuals(rd: &RootData, labels: &LabelSix, a: HalfInt, b: HalfInt, c: HalfInt) -> Result<[f64; 3]> {
    let LabelSix { i, j, k, l, m, n } = *labels;
    let (is, js, ls) = (group_inv(i), group_inv(j), group_inv(l));
    let lhs = sixj_pos(rd, labels, a, c)?.tensor;

    let l01 = LabelSix::new(is, k, j, l, n, m)?;
    let r01 = form_relation(
        &sixj_neg(rd, &l01, a, b)?.tensor,
        &[(0, op_on(rd, Op::SfA, Block::check(i, n))?), (2, op_on(rd, Op::SfA, Block::hat(i, j))?)],
        &l01.form_slots(Sign::Negative),
        P4321,
        qtilde_pow(rd, -a.doubled),
    )?;

    let l12 = LabelSix::new(k, js, i, n, m, l)?;
    let r12 = form_relation(
        &sixj_neg(rd, &l12, b, c)?.tensor,
        &[(1, op_on(rd, Op::SfA, Block::check(j, l))?), (2, op_on(rd, Op::SfB, Block::hat(i, j))?)],
        &l12.form_slots(Sign::Negative),
        P23,
        qtilde_pow(rd, c.doubled),
    )?;

    let l23 = LabelSix::new(i, n, m, ls, k, j)?;
    let r23 = form_relation(
        &sixj_neg(rd, &l23, a, b)?.tensor,
        &[(1, op_on(rd, Op::SfB, Block::check(j, l))?), (3, op_on(rd, Op::SfB, Block::hat(k, l))?)],
        &l23.form_slots(Sign::Negative),
        P1234,
        qtilde_pow(rd, -a.doubled),
    )?;
    Ok([lhs.residual(&r01), lhs.residual(&r12), lhs.residual(&r23)])
}

/// Residuals of the three uncharged relations of the fundamental lemma.
pub fn check_fundamental_lemma(rd: &RootData, labels: &LabelSix) -> Result<[f64; 3]> {
    let LabelSix { i, j, k, l, m, n } = *labels;
    let (is, js, ls) = (group_inv(i), group_inv(j), group_inv(l));
    let one = Complex64::new(1.0, 0.0);
    let lhs = t_tensor(rd, labels)?;

    let l01 = LabelSix::new(is, k, j, l, n, m)?;
    let r01 = form_relation(
        &tbar_tensor(rd, &l01)?,
        &[(0, op_on(rd, Op::AStar, Block::check(i, n))?), (2, op_on(rd, Op::A, Block::hat(i, j))?)],
        &l01.form_slots(Sign::Negative),
        P4321,
        one,
    )?;
    let l12 = LabelSix::new(k, js, i, n, m, l)?;
    let r12 = form_relation(
        &tbar_tensor(rd, &l12)?,
        &[(1, op_on(rd, Op::A, Block::check(j, l))?), (2, op_on(rd, Op::B, Block::hat(i, j))?)],
        &l12.form_slots(Sign::Negative),
        P23,
        one,
    )?;
    let l23 = LabelSix::new(i, n, m, ls, k, j)?;
    let r23 = form_relation(
        &tbar_tensor(rd, &l23)?,
        &[(1, op_on(rd, Op::B, Block::check(j, l))?), (3, op_on(rd, Op::BStar, Block::hat(k, l))?)],
        &l23.form_slots(Sign::Negative),
        P1234,
        one,
    )?;
    Ok([lhs.residual(&r01), lhs.residual(&r12), lhs.residual(&r23)])
}

/// Largest deviation of a basis composite from a multiple of the identity over all
/// N^4 index choices of T.
pub fn max_scalar_residual(rd: &RootData, labels: &LabelSix) -> Result<f64> {
    let n = rd.n();
    let id = identity(n);
    let pu = PairBasis::new(labels.k, labels.l, rd)?;
    let pv = PairBasis::new(labels.i, labels.j, rd)?;
    let px = PairBasis::new(labels.j, labels.l, rd)?;
    let py = PairBasis::new(labels.i, labels.n, rd)?;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let f = pu.hat(a) * kron(&pv.hat(b), &id) * kron(&id, &px.check(c)) * py.check(d);
                    let lambda = f.trace() / n as f64;
                    let off = &f - &id * lambda;
                    worst = worst.max(crate::matrix::frob(&off) / lambda.norm().max(1.0));
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use crate::psi_operators::eval_word;
    use rand_chacha::ChaCha8Rng;

    fn rd(n: usize) -> RootData {
        RootData::new(n, 1).unwrap()
    }

    fn h(d: i64) -> HalfInt {
        HalfInt::from_doubled(d)
    }

    #[test]
    fn batched_tensor_matches_single_entries() {
        let r = rd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let labels = LabelSix::random(&r, &mut rng);
        let t = t_tensor(&r, &labels).unwrap();
        let tb = tbar_tensor(&r, &labels).unwrap();
        for idx in [[0, 0, 0, 0], [1, 2, 0, 1], [2, 2, 2, 2], [0, 1, 2, 0], [2, 0, 1, 1]] {
            let a = t_form(&r, &labels, idx).unwrap();
            assert!((t.get(&idx) - a).norm() < 1e-10 * a.norm().max(1.0));
            let b = tbar_form(&r, &labels, idx).unwrap();
            assert!((tb.get(&idx) - b).norm() < 1e-10 * b.norm().max(1.0));
        }
        assert!(max_scalar_residual(&r, &labels).unwrap() < 1e-9);
    }

    #[test]
    fn zero_charge_is_raw_tensor() {
        let r = rd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let labels = LabelSix::random(&r, &mut rng);
        let s = sixj_pos(&r, &labels, HalfInt::ZERO, HalfInt::ZERO).unwrap();
        assert!(s.tensor.residual(&t_tensor(&r, &labels).unwrap()) < 1e-14);
        assert_eq!(s.leg_kinds(), [Kind::Check, Kind::Check, Kind::Hat, Kind::Hat]);
    }

    #[test]
    fn charged_entries_by_hand() {
        let r = rd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let labels = LabelSix::random(&r, &mut rng);
        let (a, c) = (h(1), h(-3));
        let s = sixj_pos(&r, &labels, a, c).unwrap();
        let slots = labels.form_slots(Sign::Positive);
        let m1 = pow_r_block(&r, c, slots[0]).unwrap().matrix;
        let m2 = pow_r_block(&r, -a, slots[1]).unwrap().matrix;
        let m3 = eval_word(&r, &[(Op::SqrtL, -a.doubled), (Op::SqrtR, -c.doubled)], slots[2]).unwrap().matrix;
        let q = qtilde_pow(&r, a.doubled * c.doubled);
        let raw = t_tensor(&r, &labels).unwrap();
        for idx in [[0, 1, 2, 0], [2, 2, 1, 1], [1, 0, 0, 2], [0, 0, 0, 0], [2, 1, 0, 1]] {
            let mut acc = Complex64::zero();
            for x in 0..3 {
                for y in 0..3 {
                    for z in 0..3 {
                        acc += m1[(x, idx[0])] * m2[(y, idx[1])] * m3[(z, idx[2])] * raw.get(&[x, y, z, idx[3]]);
                    }
                }
            }
            assert!((s.tensor.get(&idx) - acc * q).norm() < 1e-10);
        }
    }

    #[test]
    fn label_validation() {
        let g = |x, y| GroupElement::new(x, y).unwrap();
        let l = LabelSix::from_ijl(g(1.0, 1.0), g(0.5, 2.0), g(-0.3, 0.7)).unwrap();
        let bad = LabelSix::new(l.i, l.j, group_mul(l.k, g(0.2, 1.0)), l.l, l.m, l.n);
        assert!(matches!(bad, Err(Error::InvalidLabels(_))));
        assert!(LabelSix::from_ijl(g(1.0, 1.0), g(-1.0, 1.0), g(1.0, 1.0)).is_err());
    }

    #[test]
    fn identities_hold_at_three() {
        let r = rd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let labels = LabelSix::random(&r, &mut rng);
            for res in check_fundamental_lemma(&r, &labels).unwrap() {
                assert!(res < 1e-8, "fundamental lemma {res:e}");
            }
            let (a, b) = (h(rng.random_range(-3..=3)), h(rng.random_range(-3..=3)));
            let c = HalfInt::HALF - a - b;
            for res in check_symmetry_relations(&r, &labels, a, b, c).unwrap() {
                assert!(res < 1e-8, "symmetry {res:e} at a={a} b={b} c={c}");
            }
            let (r1, r2) = check_charged_inversion(&r, &labels, a, c).unwrap();
            assert!(r1 < 1e-8 && r2 < 1e-8, "inversion {r1:e} {r2:e}");
        }
    }

    #[test]
    fn pentagon_holds_and_detects_violations() {
        let r = rd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let labels = PentagonLabels::random(&r, &mut rng);
        let zero = PentagonCharges::from_free(HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO);
        assert!(check_charged_pentagon(&r, &labels, &zero).unwrap() < 1e-8);
        let ch = PentagonCharges::from_free(h(1), h(-2), h(3), h(-1), h(2));
        assert!(check_charged_pentagon(&r, &labels, &ch).unwrap() < 1e-8);
        let mut bad = ch;
        bad.c[2] = bad.c[2] + HalfInt::HALF;
        assert!(matches!(check_charged_pentagon(&r, &labels, &bad), Err(Error::ChargeConstraint(_))));
        assert!(pentagon_residual(&r, &labels, &bad).unwrap() > 1e-3);
    }
}
