//! The ax+b group, roots of unity, cyclic representations and the intertwiners
//! S_{g,h} that identify multiplicity spaces with C^N.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Float, One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{c64, identity, inverse, kron, mat_pow, odd_root, residual, zeros, CMat, TOL};

/// Minimal |x| for a group element to count as a member of I.
pub const I_MARGIN: f64 = 1e-6;

/// Relative gap below which a denominator of the psi recurrence counts as resonant.
const RESONANCE_TOL: f64 = 1e-10;

/// Odd order N, the chosen primitive root w = exp(2 pi i k / N) and its powers.
#[derive(Debug, Clone)]
pub struct RootData {
    n: usize,
    k: usize,
    powers: Vec<Complex64>,
}

impl RootData {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 || num_integer::gcd(n, k % n) != 1 {
            return Err(Error::InvalidRoot { n, k });
        }
        let powers = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * ((k * m) % n) as f64 / n as f64))
            .collect();
        Ok(Self { n, k, powers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Reduces `m` to `{0, .., N-1}`.
    #[inline]
    pub fn residue(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// The root of unity w.
    pub fn omega(&self) -> Complex64 {
        self.powers[1]
    }

    /// `w^m` for any integer `m`.
    #[inline]
    pub fn w(&self, m: i64) -> Complex64 {
        self.powers[self.residue(m)]
    }

    /// The fixed root of -1, which is -1 itself for odd N.
    pub fn eps(&self) -> f64 {
        -1.0
    }
}

/// A point (x, y) of G = R x R_{>0} with (x,y)(u,v) = (x + yu, yv).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub x: f64,
    pub y: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(Error::Invalid(alloc::format!("({x}, {y}) is not in G")));
        }
        Ok(Self { x, y })
    }

    pub fn mul(self, h: GroupElement) -> GroupElement {
        group_mul(self, h)
    }

    pub fn inv(self) -> GroupElement {
        group_inv(self)
    }

    pub fn in_i(self) -> bool {
        in_i(self)
    }

    /// Coordinatewise comparison, relative to the size of the coordinates.
    pub fn approx_eq(self, other: GroupElement, tol: f64) -> bool {
        let sx = 1.0f64.max(self.x.abs()).max(other.x.abs());
        let sy = 1.0f64.max(self.y.abs()).max(other.y.abs());
        (self.x - other.x).abs() <= tol * sx && (self.y - other.y).abs() <= tol * sy
    }
}

pub fn group_mul(g: GroupElement, h: GroupElement) -> GroupElement {
    GroupElement { x: g.x + g.y * h.x, y: g.y * h.y }
}

pub fn group_inv(g: GroupElement) -> GroupElement {
    GroupElement { x: -g.x / g.y, y: 1.0 / g.y }
}

pub fn in_i(g: GroupElement) -> bool {
    g.x.abs() >= I_MARGIN
}

pub fn pair_admissible(g: GroupElement, h: GroupElement) -> bool {
    in_i(g) && in_i(h) && in_i(group_mul(g, h))
}

/// The real coordinates u_g = y^(1/N), v_g = x^(1/N) and the sign component of g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coords {
    pub u: f64,
    pub v: f64,
    /// +1 on I_+ and -1 on I_-; the scalar eps_g is eps^(sign), which is -1 either way.
    pub sign: i8,
}

impl Coords {
    /// The scalar eps_g.
    pub fn eps_g(&self) -> f64 {
        -1.0
    }
}

pub fn coords(g: GroupElement, rd: &RootData) -> Result<Coords> {
    if !in_i(g) {
        return Err(Error::ZeroX { x: g.x });
    }
    let n = rd.n();
    Ok(Coords {
        u: g.y.powf(1.0 / n as f64),
        v: odd_root(g.x, n),
        sign: if g.x > 0.0 { 1 } else { -1 },
    })
}

/// Phi_{g,m} = (-eps_g)^m w^{m(m-1)/2}, well defined on residues for odd N.
pub fn phi(rd: &RootData, g: GroupElement, m: i64) -> Complex64 {
    let n = rd.n() as i64;
    let m = m.rem_euclid(n);
    // -eps_g = 1 for every g, so only the root of unity survives.
    let _ = g;
    rd.w((m * (m - 1) / 2) % n)
}

pub fn phi_bar(rd: &RootData, g: GroupElement, m: i64) -> Complex64 {
    phi(rd, g, m).inv()
}

/// Coefficients psi_{g,h,m}, m = 0..N-1, of the solution Psi_{g,h} normalized by psi_0 = 1.
pub fn psi_coeffs(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<Vec<Complex64>> {
    let gh = group_mul(g, h);
    let (cg, ch, cgh) = (coords(g, rd)?, coords(h, rd)?, coords(gh, rd)?);
    let num = c64(cg.u * ch.v / rd.eps(), 0.0);
    let scale = cg.v.abs() + cgh.v.abs();
    let mut out = Vec::with_capacity(rd.n());
    let mut cur = Complex64::one();
    out.push(cur);
    for m in 1..rd.n() {
        let den = cg.v - rd.w(m as i64) * cgh.v;
        if den.norm() < RESONANCE_TOL * scale {
            return Err(Error::Resonance { m, gap: den.norm() });
        }
        cur = cur * num / den;
        out.push(cur);
    }
    Ok(out)
}

/// Psi(E) = sum_m psi_m (eps E)^m at a scalar argument.
pub fn psi_scalar(coeffs: &[Complex64], rd: &RootData, e: Complex64) -> Complex64 {
    let z = e * rd.eps();
    let mut acc = Complex64::zero();
    let mut p = Complex64::one();
    for &c in coeffs {
        acc += c * p;
        p *= z;
    }
    acc
}

/// Psi(E) = sum_m psi_m (eps E)^m at a matrix argument.
pub fn psi_matrix(coeffs: &[Complex64], rd: &RootData, e: &CMat) -> CMat {
    let z = e * c64(rd.eps(), 0.0);
    let mut acc = zeros(e.nrows(), e.ncols());
    let mut p = identity(e.nrows());
    for &c in coeffs {
        acc += &p * c;
        p = &p * &z;
    }
    acc
}

/// nu(x) = (1 - x^N) / (N (1 - x)).
pub fn nu(x: Complex64, rd: &RootData) -> Result<Complex64> {
    let gap = (Complex64::one() - x).norm();
    if gap < 1e-12 {
        return Err(Error::NearOne { gap });
    }
    let n = rd.n();
    Ok((Complex64::one() - x.powu(n as u32)) / ((Complex64::one() - x) * n as f64))
}

/// The clock X e_i = w^i e_i and the shift Y e_i = e_{i+1}.
pub fn clock_shift(rd: &RootData) -> (CMat, CMat) {
    let n = rd.n();
    let mut x = zeros(n, n);
    let mut y = zeros(n, n);
    for i in 0..n {
        x[(i, i)] = rd.w(i as i64);
        y[((i + 1) % n, i)] = Complex64::one();
    }
    (x, y)
}

/// L(U, V) = (1/N) sum_{i,j} w^{ij} U^i V^j for commuting U, V of order N.
pub fn gauss_l(u: &CMat, v: &CMat, rd: &RootData) -> Result<CMat> {
    let n = rd.n();
    let d = u.nrows();
    if u.shape() != (d, d) || v.shape() != (d, d) {
        return Err(Error::BadOperands("operands must be square of equal size"));
    }
    let id = identity(d);
    if residual(&mat_pow(u, n as i64)?, &id) > TOL || residual(&mat_pow(v, n as i64)?, &id) > TOL {
        return Err(Error::BadOperands("operands must satisfy U^N = V^N = 1"));
    }
    if residual(&(u * v), &(v * u)) > TOL {
        return Err(Error::BadOperands("operands must commute"));
    }
    let mut vp = Vec::with_capacity(n);
    let mut p = id.clone();
    for _ in 0..n {
        vp.push(p.clone());
        p = &p * v;
    }
    let mut acc = zeros(d, d);
    let mut ui = id;
    for i in 0..n {
        for (j, vj) in vp.iter().enumerate() {
            acc += (&ui * vj) * rd.w((i * j) as i64);
        }
        ui = &ui * u;
    }
    Ok(acc / c64(n as f64, 0.0))
}

/// pi_g(a) = u_g X and pi_g(b) = v_g Y.
pub fn rep_matrices(g: GroupElement, rd: &RootData) -> Result<(CMat, CMat)> {
    let c = coords(g, rd)?;
    let (x, y) = clock_shift(rd);
    Ok((x * c64(c.u, 0.0), y * c64(c.v, 0.0)))
}

/// S_{g,h} = Psi_{g,h}(-Y^{-1}X (x) Y) L(Y (x) 1, 1 (x) X), an N^2 x N^2 matrix.
pub fn intertwiner_s(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<CMat> {
    if !pair_admissible(g, h) {
        return Err(Error::ZeroX { x: group_mul(g, h).x });
    }
    let coeffs = psi_coeffs(g, h, rd)?;
    let (x, y) = clock_shift(rd);
    let id = identity(rd.n());
    let yinv = y.transpose();
    let e = -kron(&(&yinv * &x), &y);
    let psi = psi_matrix(&coeffs, rd, &e);
    let l = gauss_l(&kron(&y, &id), &kron(&id, &x), rd)?;
    Ok(psi * l)
}

/// d_g as a 1 x N^2 row and b_g as an N^2 x 1 column, first tensor factor major.
pub fn duality_morphisms(g: GroupElement, rd: &RootData) -> (CMat, CMat) {
    let n = rd.n();
    let gs = group_inv(g);
    let mut d = zeros(1, n * n);
    let mut b = zeros(n * n, 1);
    for i in 0..n {
        let j = (n - i) % n;
        d[(0, i * n + j)] = phi(rd, g, i as i64);
        b[(i * n + j, 0)] = phi_bar(rd, gs, -(i as i64));
    }
    (d, b)
}

/// The intertwiner of an admissible pair with its inverse, and the dual bases
/// e_i of H^{g,h}_{gh} and e*_i of H_{g,h}^{gh} read off from them.
#[derive(Debug, Clone)]
pub struct PairBasis {
    pub g: GroupElement,
    pub h: GroupElement,
    pub gh: GroupElement,
    pub s: CMat,
    pub s_inv: CMat,
}

impl PairBasis {
    pub fn new(g: GroupElement, h: GroupElement, rd: &RootData) -> Result<Self> {
        let s = intertwiner_s(g, h, rd)?;
        let s_inv = inverse(&s)?;
        Ok(Self { g, h, gh: group_mul(g, h), s, s_inv })
    }

    pub fn n(&self) -> usize {
        self.s.nrows().isqrt()
    }

    /// e_i as the N^2 x N matrix of v -> S(v (x) e_i).
    pub fn check(&self, i: usize) -> CMat {
        let n = self.n();
        CMat::from_fn(n * n, n, |r, c| self.s[(r, c * n + i)])
    }

    /// e*_i as the N x N^2 matrix of (id (x) e_i^T) S^{-1}.
    pub fn hat(&self, i: usize) -> CMat {
        let n = self.n();
        CMat::from_fn(n, n * n, |r, c| self.s_inv[(r * n + i, c)])
    }
}

/// A random element of I with |x| in [0.1, 2] and y in [0.5, 2].
pub fn random_element<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    let mag: f64 = rng.random_range(0.1..2.0);
    let x = if rng.random_bool(0.5) { mag } else { -mag };
    GroupElement { x, y: rng.random_range(0.5..2.0) }
}

/// True when every coordinate of `g` is safely inside I for sampling purposes.
pub fn well_inside(g: GroupElement) -> bool {
    g.x.abs() >= 0.05
}

/// A random admissible pair with a well-conditioned product.
pub fn random_pair<R: Rng + ?Sized>(rd: &RootData, rng: &mut R) -> (GroupElement, GroupElement) {
    loop {
        let (g, h) = (random_element(rng), random_element(rng));
        if well_inside(group_mul(g, h)) && psi_coeffs(g, h, rd).is_ok() {
            return (g, h);
        }
    }
}

/// Relative residuals of the defining identities of the cyclic algebra for one pair:
/// zig-zag duality for g, the intertwining property of S_{g,h} for both
/// generators, duality morphisms as module maps, and the coordinate laws.
pub fn algebra_identity_residuals(rd: &RootData, g: GroupElement, h: GroupElement) -> Result<Vec<(&'static str, f64)>> {
    let n = rd.n();
    let id = identity(n);
    let gh = group_mul(g, h);
    let gs = group_inv(g);
    let rel = |a: &CMat, b: &CMat| residual(a, b);

    let (dg, bg) = duality_morphisms(g, rd);
    let (dgs, bgs) = duality_morphisms(gs, rd);
    let zig = rel(&(kron(&id, &dgs) * kron(&bg, &id)), &id);
    let zag = rel(&(kron(&dg, &id) * kron(&id, &bgs)), &id);

    let (ag, bbg) = rep_matrices(g, rd)?;
    let (ags, bbgs) = rep_matrices(gs, rd)?;
    let delta_a = kron(&ag, &ags);
    let delta_b = kron(&ag, &bbgs) + kron(&bbg, &id);
    let module_d = rel(&(&dg * &delta_a), &dg).max(residual(&(&dg * &delta_b), &zeros(1, n * n)));
    let module_b = rel(&(&delta_a * &bg), &bg).max(residual(&(&delta_b * &bg), &zeros(n * n, 1)));

    let s = intertwiner_s(g, h, rd)?;
    let (ah, bh) = rep_matrices(h, rd)?;
    let (agh, bgh) = rep_matrices(gh, rd)?;
    let inter_a = rel(&(kron(&ag, &ah) * &s), &(&s * kron(&agh, &id)));
    let inter_b = rel(&((kron(&ag, &bh) + kron(&bbg, &id)) * &s), &(&s * kron(&bgh, &id)));
    let s_inv = inverse(&s)?;
    let inv = rel(&(&s_inv * &s), &identity(n * n));

    let (cg, ch, cgh) = (coords(g, rd)?, coords(h, rd)?, coords(gh, rd)?);
    let u_law = (cgh.u - cg.u * ch.u).abs() / cgh.u.abs().max(1.0);
    let pn = |t: f64| t.powi(n as i32);
    let v_law = (pn(cgh.v) - pn(cg.v) - pn(cg.u) * pn(ch.v)).abs() / pn(cgh.v).abs().max(1.0);
    let rep_ab = rel(&(&ag * &bbg), &((&bbg * &ag) * rd.omega()));

    Ok(alloc::vec![
        ("zig-zag (id x d_g*)(b_g x id) = id", zig),
        ("zig-zag (d_g x id)(id x b_g*) = id", zag),
        ("d_g is a module map", module_d),
        ("b_g is a module map", module_b),
        ("S intertwines a", inter_a),
        ("S intertwines b", inter_b),
        ("S is invertible", inv),
        ("u_gh = u_g u_h", u_law),
        ("v_gh^N = v_g^N + u_g^N v_h^N", v_law),
        ("ab = w ba", rep_ab),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{max_abs_diff, frob};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rd(n: usize) -> RootData {
        RootData::new(n, 1).unwrap()
    }

    fn ge(x: f64, y: f64) -> GroupElement {
        GroupElement::new(x, y).unwrap()
    }

    #[test]
    fn root_data_rejects_even_and_non_coprime() {
        assert!(RootData::new(4, 1).is_err());
        assert!(RootData::new(1, 1).is_err());
        assert!(RootData::new(9, 3).is_err());
        let r = RootData::new(5, 2).unwrap();
        assert!((r.omega().powu(5) - 1.0).norm() < 1e-14);
        for k in 1..5 {
            assert!((r.w(k) - 1.0).norm() > 1e-3);
        }
        assert_eq!(r.eps(), -1.0);
    }

    #[test]
    fn group_law_examples() {
        assert_eq!(group_mul(GroupElement::IDENTITY, ge(3.0, 2.0)), ge(3.0, 2.0));
        assert_eq!(group_mul(ge(1.0, 2.0), ge(3.0, 1.0)), ge(7.0, 2.0));
        let g = ge(-1.5, 0.4);
        assert!(group_mul(g, group_inv(g)).approx_eq(GroupElement::IDENTITY, 1e-15));
        assert_eq!(group_inv(GroupElement::IDENTITY), GroupElement::IDENTITY);
        assert_eq!(group_inv(ge(2.0, 4.0)), ge(-0.5, 0.25));
        let g = ge(0.3, 2.0);
        assert!(group_inv(group_inv(g)).approx_eq(g, 1e-15));
    }

    #[test]
    fn membership_in_i() {
        assert!(!in_i(ge(0.0, 1.0)));
        assert!(!pair_admissible(ge(1.0, 1.0), ge(-1.0, 1.0)));
        assert!(pair_admissible(ge(1.0, 2.0), ge(3.0, 1.0)));
        assert!(GroupElement::new(1.0, 0.0).is_err());
    }

    #[test]
    fn coordinates_of_perfect_cubes() {
        let r = rd(3);
        let c = coords(ge(8.0, 1.0), &r).unwrap();
        assert!((c.u - 1.0).abs() < 1e-15 && (c.v - 2.0).abs() < 1e-14 && c.sign == 1);
        let c = coords(ge(-8.0, 1.0), &r).unwrap();
        assert!((c.v + 2.0).abs() < 1e-14 && c.sign == -1);
        assert!(matches!(coords(ge(0.0, 1.0), &r), Err(Error::ZeroX { .. })));
    }

    #[test]
    fn phi_values() {
        let r = rd(5);
        let g = ge(1.0, 1.0);
        assert!((phi(&r, g, 0) - 1.0).norm() < 1e-15);
        assert!((phi(&r, g, 1) - 1.0).norm() < 1e-15);
        for m in -7..7 {
            assert!((phi(&r, g, m) * phi_bar(&r, g, m) - 1.0).norm() < 1e-14);
            assert!((phi(&r, g, m) - phi(&r, g, m + 5)).norm() < 1e-14);
        }
        // Phi_{m+1} / Phi_m = (-eps_g) w^m
        for m in 0..5 {
            assert!((phi(&r, g, m + 1) / phi(&r, g, m) - r.w(m)).norm() < 1e-14);
        }
    }

    /// Independent evaluation of psi through the product formula
    /// w(x,y,z|m) = (y/z)^m / (w x/z; w)_m with x = v_gh, y = u_g v_h / eps, z = v_g.
    fn psi_product_form(g: GroupElement, h: GroupElement, r: &RootData) -> Vec<Complex64> {
        let gh = group_mul(g, h);
        let cg = coords(g, r).unwrap();
        let ch = coords(h, r).unwrap();
        let cgh = coords(gh, r).unwrap();
        let (x, y, z) = (cgh.v, cg.u * ch.v / r.eps(), cg.v);
        (0..r.n())
            .map(|m| {
                let mut poch = Complex64::one();
                for j in 0..m {
                    poch *= Complex64::one() - r.w(j as i64 + 1) * (x / z);
                }
                Complex64::new((y / z).powi(m as i32), 0.0) / poch
            })
            .collect()
    }

    #[test]
    fn psi_matches_product_form() {
        let r = rd(3);
        let (g, h) = (ge(1.0, 1.0), ge(1.0, 1.0));
        let a = psi_coeffs(g, h, &r).unwrap();
        let b = psi_product_form(g, h, &r);
        assert!((a[0] - 1.0).norm() < 1e-15);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-13, "{p} vs {q}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 5, 7] {
            let r = rd(n);
            for _ in 0..50 {
                let (g, h) = random_pair(&r, &mut rng);
                let a = psi_coeffs(g, h, &r).unwrap();
                let b = psi_product_form(g, h, &r);
                for (p, q) in a.iter().zip(&b) {
                    assert!((p - q).norm() < 1e-10 * q.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn psi_first_step() {
        let r = rd(5);
        let (g, h) = (ge(0.7, 1.3), ge(-0.4, 0.8));
        let gh = group_mul(g, h);
        let (cg, ch, cgh) = (coords(g, &r).unwrap(), coords(h, &r).unwrap(), coords(gh, &r).unwrap());
        let expect = c64(cg.u * ch.v / r.eps(), 0.0) / (cg.v - cgh.v * r.omega());
        assert!((psi_coeffs(g, h, &r).unwrap()[1] - expect).norm() < 1e-14);
    }

    #[test]
    fn psi_functional_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 5] {
            let r = rd(n);
            let (x, y) = clock_shift(&r);
            let e = -kron(&(y.transpose() * &x), &y);
            for _ in 0..20 {
                let (g, h) = random_pair(&r, &mut rng);
                let gh = group_mul(g, h);
                let cf = psi_coeffs(g, h, &r).unwrap();
                let lhs = psi_matrix(&cf, &r, &(&e * r.omega())) * inverse(&psi_matrix(&cf, &r, &e)).unwrap();
                let (cg, ch, cgh) = (coords(g, &r).unwrap(), coords(h, &r).unwrap(), coords(gh, &r).unwrap());
                let rhs = (identity(n * n) * c64(cg.v, 0.0) - &e * c64(cg.u * ch.v, 0.0)) / c64(cgh.v, 0.0);
                assert!(residual(&lhs, &rhs) < 1e-9);
            }
        }
    }

    #[test]
    fn nu_values() {
        let r = rd(5);
        assert!((nu(Complex64::zero(), &r).unwrap() - 0.2).norm() < 1e-15);
        assert!(nu(r.omega(), &r).unwrap().norm() < 1e-14);
        assert!(matches!(nu(Complex64::one(), &r), Err(Error::NearOne { .. })));
        let x = c64(0.3, -1.2);
        let v = nu(x, &r).unwrap();
        assert!((v * 5.0 * (Complex64::one() - x) + x.powu(5) - 1.0).norm() < 1e-13);
    }

    #[test]
    fn clock_and_shift() {
        let r = rd(5);
        let (x, y) = clock_shift(&r);
        let id = identity(5);
        assert!(residual(&mat_pow(&x, 5).unwrap(), &id) < 1e-13);
        assert!(residual(&mat_pow(&y, 5).unwrap(), &id) < 1e-13);
        assert!(max_abs_diff(&(&x * &y), &((&y * &x) * r.omega())) < 1e-14);
    }

    #[test]
    fn gauss_l_examples() {
        let r = rd(3);
        let (x, y) = clock_shift(&r);
        let id = identity(3);
        assert!(residual(&gauss_l(&id, &id, &r).unwrap(), &id) < 1e-14);
        // L(X, X) e_0 against the brute force double sum.
        let l = gauss_l(&x, &x, &r).unwrap();
        let mut e0 = zeros(3, 1);
        e0[(0, 0)] = Complex64::one();
        let mut brute = zeros(3, 1);
        for i in 0..3i64 {
            for j in 0..3i64 {
                brute += (mat_pow(&x, i).unwrap() * mat_pow(&x, j).unwrap() * &e0) * r.w(i * j);
            }
        }
        brute /= c64(3.0, 0.0);
        assert!(max_abs_diff(&(l * e0), &brute) < 1e-14);
        let big = gauss_l(&kron(&y, &id), &kron(&id, &x), &r).unwrap();
        assert!(big.determinant().norm() > 1e-6);
        assert!(matches!(gauss_l(&x, &y, &r), Err(Error::BadOperands(_))));
        assert!(matches!(gauss_l(&(&x * c64(2.0, 0.0)), &x, &r), Err(Error::BadOperands(_))));
    }

    #[test]
    fn representation_relations() {
        let r = rd(5);
        let g = ge(-1.3, 0.6);
        let (a, b) = rep_matrices(g, &r).unwrap();
        assert!(max_abs_diff(&(&a * &b), &((&b * &a) * r.omega())) < 1e-13);
        let c = coords(g, &r).unwrap();
        for i in 0..5 {
            assert!((a[(i, i)] - r.w(i as i64) * c.u).norm() < 1e-14);
        }
        assert!(residual(&mat_pow(&b, 5).unwrap(), &(identity(5) * c64(g.x, 0.0))) < 1e-13);
    }

    #[test]
    fn intertwiner_is_invertible_and_intertwines() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [3, 5] {
            let r = rd(n);
            let id = identity(n);
            for _ in 0..20 {
                let (g, h) = random_pair(&r, &mut rng);
                let s = intertwiner_s(g, h, &r).unwrap();
                assert!(s.determinant().norm() > 1e-12);
                let (ag, bg) = rep_matrices(g, &r).unwrap();
                let (ah, bh) = rep_matrices(h, &r).unwrap();
                let (agh, bgh) = rep_matrices(group_mul(g, h), &r).unwrap();
                let lhs_a = kron(&ag, &ah) * &s;
                let rhs_a = &s * kron(&agh, &id);
                assert!(frob(&(&lhs_a - &rhs_a)) / frob(&lhs_a) < 1e-9);
                let lhs_b = (kron(&ag, &bh) + kron(&bg, &id)) * &s;
                let rhs_b = &s * kron(&bgh, &id);
                assert!(frob(&(&lhs_b - &rhs_b)) / frob(&lhs_b) < 1e-9);
            }
        }
    }

    #[test]
    fn zig_zag_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = rd(5);
        let id = identity(5);
        for _ in 0..20 {
            let g = random_element(&mut rng);
            let gs = group_inv(g);
            let (dg, bg) = duality_morphisms(g, &r);
            let (dgs, bgs) = duality_morphisms(gs, &r);
            let z1 = kron(&id, &dgs) * kron(&bg, &id);
            assert!(max_abs_diff(&z1, &id) < 1e-12);
            let z2 = kron(&dg, &id) * kron(&id, &bgs);
            assert!(max_abs_diff(&z2, &id) < 1e-12);
            assert!((dg[(0, 0)] - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn duality_morphisms_are_module_maps() {
        let r = rd(3);
        let g = ge(0.8, 1.7);
        let gs = group_inv(g);
        let (dg, bg) = duality_morphisms(g, &r);
        let (ag, bbg) = rep_matrices(g, &r).unwrap();
        let (ags, bbgs) = rep_matrices(gs, &r).unwrap();
        let id = identity(3);
        let delta_a = kron(&ag, &ags);
        let delta_b = kron(&ag, &bbgs) + kron(&bbg, &id);
        // d o Delta(a) = d, d o Delta(b) = 0; Delta(a) b = b, Delta(b) b = 0.
        assert!(max_abs_diff(&(&dg * &delta_a), &dg) < 1e-13);
        assert!(max_abs_diff(&(&dg * &delta_b), &zeros(1, 9)) < 1e-13);
        assert!(max_abs_diff(&(&delta_a * &bg), &bg) < 1e-13);
        assert!(max_abs_diff(&(&delta_b * &bg), &zeros(9, 1)) < 1e-13);
    }

    #[test]
    fn dual_bases_pair_to_kronecker_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = rd(3);
        let (g, h) = random_pair(&r, &mut rng);
        let pb = PairBasis::new(g, h, &r).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let f = pb.hat(a) * pb.check(b);
                let expect = if a == b { identity(3) } else { zeros(3, 3) };
                assert!(max_abs_diff(&f, &expect) < 1e-10);
            }
        }
    }

    #[test]
    fn algebra_suite_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 5, 7] {
            let r = rd(n);
            for _ in 0..10 {
                let (g, h) = random_pair(&r, &mut rng);
                for (name, res) in algebra_identity_residuals(&r, g, h).unwrap() {
                    assert!(res < 1e-9, "{name}: {res:e} at N={n}");
                }
            }
        }
    }

}
