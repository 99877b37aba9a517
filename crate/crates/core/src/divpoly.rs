//! The division-polynomial system: `psi_m`, `phi_m`, `omega_m` as exact
//! polynomials in `Z[A, B, x]`, their recursions and degree laws, and
//! multiplication-by-m through the rational maps they define.
//!
//! Internally every `psi_m` is stored as `y^e * q_m(A, B, x)` with `e = 1`
//! exactly when `m` is even; all `y^2` occurrences are eliminated through the
//! curve equation `y^2 = x^3 + Ax + B`. In that representation the recursions
//! close over `Z[A, B, x]` without ever dividing by the curve polynomial:
//!
//! ```text
//! q_{2k}   = q_k (q_{k+2} q_{k-1}^2 - q_{k-2} q_{k+1}^2) / 2
//! q_{2k+1} = f^2 q_{k+2} q_k^3 - q_{k-1} q_{k+1}^3          (k even)
//! q_{2k+1} = q_{k+2} q_k^3 - f^2 q_{k-1} q_{k+1}^3          (k odd)
//! ```
//!
//! Degrees for large `m` are certified by a shadow computation that carries
//! only the x-degree and the exact leading coefficient through the very same
//! recursion; every subtraction the recursion performs has a nonzero leading
//! difference, so the shadow degrees are exact, not just upper bounds. The
//! shadow is cross-checked against fully expanded polynomials in the tests.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::curve::Point;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Sparse polynomials in Z[A, B, x]
// ---------------------------------------------------------------------------

/// Packed exponents: x in the high 32 bits, then A, then B.
fn pack(x: u32, a: u16, b: u16) -> u64 {
    ((x as u64) << 32) | ((a as u64) << 16) | b as u64
}

fn unpack(key: u64) -> (u32, u16, u16) {
    ((key >> 32) as u32, ((key >> 16) & 0xffff) as u16, (key & 0xffff) as u16)
}

/// A sparse polynomial in `Z[A, B, x]`, terms sorted by (x, A, B) exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    terms: Vec<(u64, BigInt)>,
}

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly { terms: Vec::new() }
    }

    pub fn constant(c: i64) -> MPoly {
        if c == 0 {
            return MPoly::zero();
        }
        MPoly {
            terms: vec![(pack(0, 0, 0), BigInt::from(c))],
        }
    }

    /// Single term `c * x^xe * A^ae * B^be`.
    pub fn term(c: i64, xe: u32, ae: u16, be: u16) -> MPoly {
        if c == 0 {
            return MPoly::zero();
        }
        MPoly {
            terms: vec![(pack(xe, ae, be), BigInt::from(c))],
        }
    }

    /// `x^3 + Ax + B`, the curve polynomial.
    pub fn curve_poly() -> MPoly {
        MPoly {
            terms: vec![
                (pack(0, 0, 1), BigInt::one()),
                (pack(1, 1, 0), BigInt::one()),
                (pack(3, 0, 0), BigInt::one()),
            ],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.merge(other, true)
    }

    fn merge(&self, other: &MPoly, negate: bool) -> MPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take_left = j >= other.terms.len()
                || (i < self.terms.len() && self.terms[i].0 <= other.terms[j].0);
            let take_right = i >= self.terms.len()
                || (j < other.terms.len() && other.terms[j].0 <= self.terms[i].0);
            if take_left && take_right {
                let (k, a) = &self.terms[i];
                let b = &other.terms[j].1;
                let c = if negate { a - b } else { a + b };
                if !c.is_zero() {
                    out.push((*k, c));
                }
                i += 1;
                j += 1;
            } else if take_left {
                out.push(self.terms[i].clone());
                i += 1;
            } else {
                let (k, b) = &other.terms[j];
                out.push((*k, if negate { -b } else { b.clone() }));
                j += 1;
            }
        }
        MPoly { terms: out }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        if self.is_zero() || other.is_zero() {
            return MPoly::zero();
        }
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: HashMap<u64, BigInt> =
            HashMap::with_capacity(small.terms.len() * large.terms.len() / 4 + 16);
        for (ka, ca) in &small.terms {
            for (kb, cb) in &large.terms {
                let key = ka + kb;
                let prod = ca * cb;
                match acc.entry(key) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += prod;
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        let mut terms: Vec<(u64, BigInt)> =
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|(k, _)| *k);
        MPoly { terms }
    }

    pub fn scale(&self, c: i64) -> MPoly {
        if c == 0 {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    /// Exact division by an integer (panics if any coefficient resists).
    pub fn div_exact(&self, c: i64) -> MPoly {
        let c = BigInt::from(c);
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| {
                    let (q, r) = num_integer::Integer::div_rem(v, &c);
                    assert!(r.is_zero(), "non-exact coefficient division");
                    (*k, q)
                })
                .collect(),
        }
    }

    /// Degree in x (A and B count 0); `None` for the zero polynomial.
    pub fn x_degree(&self) -> Option<u32> {
        self.terms.last().map(|(k, _)| unpack(*k).0)
    }

    /// Leading term with respect to the x-degree ordering.
    pub fn leading_term(&self) -> Option<((u32, u16, u16), &BigInt)> {
        self.terms.last().map(|(k, c)| (unpack(*k), c))
    }

    /// Evaluates at rational `(x, a, b)`.
    pub fn eval(&self, x: &BigRational, a: &BigRational, b: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (key, c) in &self.terms {
            let (xe, ae, be) = unpack(*key);
            let mut t = BigRational::from_integer(c.clone());
            t *= pow_rat(x, xe);
            t *= pow_rat(a, ae as u32);
            t *= pow_rat(b, be as u32);
            acc += t;
        }
        acc
    }

    /// Substitutes integers for A and B, returning dense univariate
    /// coefficients in x (index = degree).
    pub fn substitute_ab(&self, a: &BigInt, b: &BigInt) -> Vec<BigInt> {
        let deg = match self.x_degree() {
            Some(d) => d as usize,
            None => return Vec::new(),
        };
        let mut out = vec![BigInt::zero(); deg + 1];
        for (key, c) in &self.terms {
            let (xe, ae, be) = unpack(*key);
            out[xe as usize] += c * a.pow(ae as u32) * b.pow(be as u32);
        }
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }
}

fn pow_rat(x: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl fmt::Display for MPoly {
    /// Canonical sparse form, monomials in descending x-degree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (key, c)) in self.terms.iter().rev().enumerate() {
            let (xe, ae, be) = unpack(*key);
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || (xe == 0 && ae == 0 && be == 0) {
                parts.push(mag.to_string());
            }
            for (sym, e) in [("A", ae as u32), ("B", be as u32), ("x", xe)] {
                match e {
                    0 => {}
                    1 => parts.push(sym.to_string()),
                    _ => parts.push(format!("{sym}^{e}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The q_m table
// ---------------------------------------------------------------------------

fn q_cache() -> &'static RwLock<HashMap<i64, Arc<MPoly>>> {
    static CACHE: OnceLock<RwLock<HashMap<i64, Arc<MPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The y-free kernel `q_m` with `psi_m = y^(m mod 2 == 0) * q_m`.
fn q_poly(m: i64) -> Arc<MPoly> {
    if let Some(p) = q_cache().read().expect("cache lock").get(&m) {
        return Arc::clone(p);
    }
    let value = match m {
        -1 => MPoly::constant(-1),
        0 => MPoly::zero(),
        1 => MPoly::constant(1),
        2 => MPoly::constant(2),
        3 => MPoly::term(3, 4, 0, 0)
            .add(&MPoly::term(6, 2, 1, 0))
            .add(&MPoly::term(12, 1, 0, 1))
            .add(&MPoly::term(-1, 0, 2, 0)),
        4 => MPoly::term(1, 6, 0, 0)
            .add(&MPoly::term(5, 4, 1, 0))
            .add(&MPoly::term(20, 3, 0, 1))
            .add(&MPoly::term(-5, 2, 2, 0))
            .add(&MPoly::term(-4, 1, 1, 1))
            .add(&MPoly::term(-8, 0, 0, 2))
            .add(&MPoly::term(-1, 0, 3, 0))
            .scale(4),
        m if m % 2 == 0 => {
            let k = m / 2;
            let bracket = q_poly(k + 2)
                .mul(&q_poly(k - 1).mul(&q_poly(k - 1)))
                .sub(&q_poly(k - 2).mul(&q_poly(k + 1).mul(&q_poly(k + 1))));
            q_poly(k).mul(&bracket).div_exact(2)
        }
        m => {
            let k = (m - 1) / 2;
            let f2 = MPoly::curve_poly().mul(&MPoly::curve_poly());
            let t1 = q_poly(k + 2).mul(&cube(&q_poly(k)));
            let t2 = q_poly(k - 1).mul(&cube(&q_poly(k + 1)));
            if k % 2 == 0 {
                f2.mul(&t1).sub(&t2)
            } else {
                t1.sub(&f2.mul(&t2))
            }
        }
    };
    let arc = Arc::new(value);
    q_cache()
        .write()
        .expect("cache lock")
        .entry(m)
        .or_insert_with(|| Arc::clone(&arc))
        .clone()
}

fn cube(p: &MPoly) -> MPoly {
    p.mul(p).mul(p)
}

// ---------------------------------------------------------------------------
// Public polynomial surface
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Parity {
    Odd,
    Even,
}

/// The m-th division polynomial. For even `m` the stored body is
/// `psi_m / (2y)`; for odd `m` it is `psi_m` itself.
#[derive(Clone, Debug)]
pub struct DivisionPoly {
    pub m: u32,
    pub parity: Parity,
    pub body: MPoly,
}

impl fmt::Display for DivisionPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parity {
            Parity::Odd => write!(f, "{}", self.body),
            Parity::Even => write!(f, "2y*({})", self.body),
        }
    }
}

/// The polynomial `psi_m`, memoized.
pub fn psi(m: u32) -> Result<DivisionPoly> {
    if m < 1 {
        return Err(Error::BadParams("psi needs m >= 1".into()));
    }
    let q = q_poly(m as i64);
    if m % 2 == 0 {
        Ok(DivisionPoly {
            m,
            parity: Parity::Even,
            body: q.div_exact(2),
        })
    } else {
        Ok(DivisionPoly {
            m,
            parity: Parity::Odd,
            body: (*q).clone(),
        })
    }
}

/// `phi_m = x psi_m^2 - psi_{m+1} psi_{m-1}`, y-eliminated.
pub fn phi(m: u32) -> Result<MPoly> {
    if m < 1 {
        return Err(Error::BadParams("phi needs m >= 1".into()));
    }
    let m = m as i64;
    let x = MPoly::term(1, 1, 0, 0);
    let q = q_poly(m);
    let q_sq = q.mul(&q);
    let cross = q_poly(m + 1).mul(&q_poly(m - 1));
    Ok(if m % 2 == 1 {
        x.mul(&q_sq).sub(&MPoly::curve_poly().mul(&cross))
    } else {
        x.mul(&MPoly::curve_poly()).mul(&q_sq).sub(&cross)
    })
}

/// The y-free part of `omega_m` (`4y omega_m = psi_{m+2} psi_{m-1}^2 -
/// psi_{m-2} psi_{m+1}^2`). For odd `m` the polynomial is `omega_m / y`,
/// for even `m` it is `omega_m` itself; the flag says whether a factor `y`
/// was split off.
pub fn omega(m: u32) -> Result<(MPoly, bool)> {
    if m < 1 {
        return Err(Error::BadParams("omega needs m >= 1".into()));
    }
    let m = m as i64;
    let a = q_poly(m + 2).mul(&q_poly(m - 1).mul(&q_poly(m - 1)));
    let b = q_poly(m - 2).mul(&q_poly(m + 1).mul(&q_poly(m + 1)));
    Ok((a.sub(&b).div_exact(4), m % 2 == 1))
}

// ---------------------------------------------------------------------------
// Degree shadow
// ---------------------------------------------------------------------------

/// x-degree and exact leading coefficient of a polynomial, carried through
/// the recursion without expanding it.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Shadow {
    Zero,
    Term { deg: i64, lead: BigInt },
}

impl Shadow {
    fn of(deg: i64, lead: i64) -> Shadow {
        Shadow::Term {
            deg,
            lead: BigInt::from(lead),
        }
    }

    fn mul(&self, other: &Shadow) -> Shadow {
        match (self, other) {
            (Shadow::Zero, _) | (_, Shadow::Zero) => Shadow::Zero,
            (Shadow::Term { deg: d1, lead: l1 }, Shadow::Term { deg: d2, lead: l2 }) => {
                Shadow::Term {
                    deg: d1 + d2,
                    lead: l1 * l2,
                }
            }
        }
    }

    /// Subtraction; fails only if the leading terms cancel completely, which
    /// the recursion never produces (the failure is an internal bug signal).
    fn sub(&self, other: &Shadow) -> Result<Shadow> {
        Ok(match (self, other) {
            (Shadow::Zero, Shadow::Zero) => Shadow::Zero,
            (s, Shadow::Zero) => s.clone(),
            (Shadow::Zero, Shadow::Term { deg, lead }) => Shadow::Term {
                deg: *deg,
                lead: -lead,
            },
            (Shadow::Term { deg: d1, lead: l1 }, Shadow::Term { deg: d2, lead: l2 }) => {
                if d1 > d2 {
                    self.clone()
                } else if d2 > d1 {
                    Shadow::Term {
                        deg: *d2,
                        lead: -l2,
                    }
                } else if l1 != l2 {
                    Shadow::Term {
                        deg: *d1,
                        lead: l1 - l2,
                    }
                } else {
                    return Err(Error::CertificateViolation(
                        "degree shadow lost the leading term".into(),
                    ));
                }
            }
        })
    }

    fn div_int(&self, k: i64) -> Shadow {
        match self {
            Shadow::Zero => Shadow::Zero,
            Shadow::Term { deg, lead } => {
                let k = BigInt::from(k);
                let (q, r) = num_integer::Integer::div_rem(lead, &k);
                assert!(r.is_zero(), "shadow division must stay integral");
                Shadow::Term {
                    deg: *deg,
                    lead: q,
                }
            }
        }
    }

    fn deg(&self) -> Option<i64> {
        match self {
            Shadow::Zero => None,
            Shadow::Term { deg, .. } => Some(*deg),
        }
    }

    fn lead(&self) -> Option<&BigInt> {
        match self {
            Shadow::Zero => None,
            Shadow::Term { lead, .. } => Some(lead),
        }
    }
}

fn shadow_cache() -> &'static Mutex<HashMap<i64, Shadow>> {
    static CACHE: OnceLock<Mutex<HashMap<i64, Shadow>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn shadow_q(m: i64) -> Result<Shadow> {
    if let Some(s) = shadow_cache().lock().expect("cache lock").get(&m) {
        return Ok(s.clone());
    }
    let f = Shadow::of(3, 1);
    let value = match m {
        -1 => Shadow::of(0, -1),
        0 => Shadow::Zero,
        1 => Shadow::of(0, 1),
        2 => Shadow::of(0, 2),
        3 => Shadow::of(4, 3),
        4 => Shadow::of(6, 4),
        m if m % 2 == 0 => {
            let k = m / 2;
            let t1 = shadow_q(k + 2)?.mul(&shadow_q(k - 1)?.mul(&shadow_q(k - 1)?));
            let t2 = shadow_q(k - 2)?.mul(&shadow_q(k + 1)?.mul(&shadow_q(k + 1)?));
            shadow_q(k)?.mul(&t1.sub(&t2)?).div_int(2)
        }
        m => {
            let k = (m - 1) / 2;
            let f2 = f.mul(&f);
            let qk = shadow_q(k)?;
            let t1 = shadow_q(k + 2)?.mul(&qk.mul(&qk).mul(&qk));
            let qk1 = shadow_q(k + 1)?;
            let t2 = shadow_q(k - 1)?.mul(&qk1.mul(&qk1).mul(&qk1));
            if k % 2 == 0 {
                f2.mul(&t1).sub(&t2)?
            } else {
                t1.sub(&f2.mul(&t2))?
            }
        }
    };
    shadow_cache()
        .lock()
        .expect("cache lock")
        .insert(m, value.clone());
    Ok(value)
}

fn shadow_phi(m: i64) -> Result<Shadow> {
    let x = Shadow::of(1, 1);
    let f = Shadow::of(3, 1);
    let q = shadow_q(m)?;
    let q_sq = q.mul(&q);
    let cross = shadow_q(m + 1)?.mul(&shadow_q(m - 1)?);
    if m % 2 == 1 {
        x.mul(&q_sq).sub(&f.mul(&cross))
    } else {
        x.mul(&f).mul(&q_sq).sub(&cross)
    }
}

fn shadow_omega(m: i64) -> Result<Shadow> {
    let qm1 = shadow_q(m - 1)?;
    let qp1 = shadow_q(m + 1)?;
    let a = shadow_q(m + 2)?.mul(&qm1.mul(&qm1));
    let b = shadow_q(m - 2)?.mul(&qp1.mul(&qp1));
    Ok(a.sub(&b)?.div_int(4))
}

/// Measured x-degrees of `phi_m`, `psi_m^2`, `psi_m^3`, `omega_m`, checked
/// against the degree laws (`A` and `B` count as constants of degree 0).
#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub m: u32,
    pub d_phi: i64,
    pub d_psi_sq: i64,
    pub d_psi_cubed: i64,
    pub d_omega: i64,
    pub phi_leading_coeff: i64,
    pub psi_sq_leading_coeff: i64,
    /// Laws: `d_phi = m^2`, `d_psi_sq = m^2 - 1`, `d_psi_cubed <= (3m^2-1)/2`,
    /// `d_omega <= 3(m^2+1)/2`.
    pub laws_hold: bool,
}

/// Computes the degree report for `psi_m`/`phi_m`/`omega_m` via the exact
/// degree shadow (the expanded polynomials agree wherever both are computed).
pub fn degree_report(m: u32) -> Result<DegreeReport> {
    if m < 1 {
        return Err(Error::BadParams("degree report needs m >= 1".into()));
    }
    let mi = m as i64;
    let f = Shadow::of(3, 1);
    let q = shadow_q(mi)?;

    let phi_s = shadow_phi(mi)?;
    // psi^2 after y-elimination: q^2 (odd m) or f q^2 (even m).
    let psi_sq = if mi % 2 == 1 {
        q.mul(&q)
    } else {
        f.mul(&q).mul(&q)
    };
    // The y-free cofactor of psi^3: q^3 (odd) or f q^3 with a leftover y (even).
    let psi_cubed = if mi % 2 == 1 {
        q.mul(&q).mul(&q)
    } else {
        f.mul(&q).mul(&q).mul(&q)
    };
    let omega_s = shadow_omega(mi)?;

    let d_phi = phi_s.deg().ok_or_else(|| {
        Error::CertificateViolation("phi shadow collapsed".into())
    })?;
    let d_psi_sq = psi_sq
        .deg()
        .ok_or_else(|| Error::CertificateViolation("psi^2 shadow collapsed".into()))?;
    let d_psi_cubed = psi_cubed
        .deg()
        .ok_or_else(|| Error::CertificateViolation("psi^3 shadow collapsed".into()))?;
    let d_omega = omega_s
        .deg()
        .ok_or_else(|| Error::CertificateViolation("omega shadow collapsed".into()))?;

    let m_sq = mi * mi;
    let checks: [(&'static str, i64, i64, bool); 4] = [
        ("d_phi", d_phi, m_sq, d_phi == m_sq),
        ("d_psi_sq", d_psi_sq, m_sq - 1, d_psi_sq == m_sq - 1),
        ("d_psi_cubed", d_psi_cubed, (3 * m_sq - 1) / 2, 2 * d_psi_cubed <= 3 * m_sq - 1),
        ("d_omega", d_omega, (3 * (m_sq + 1)) / 2, 2 * d_omega <= 3 * (m_sq + 1)),
    ];
    for (what, measured, law, ok) in checks {
        if !ok {
            return Err(Error::DegreeLawViolation {
                m,
                what,
                measured,
                law,
            });
        }
    }

    let phi_lead = phi_s.lead().expect("nonzero").clone();
    let psi_sq_lead = psi_sq.lead().expect("nonzero").clone();
    Ok(DegreeReport {
        m,
        d_phi,
        d_psi_sq,
        d_psi_cubed,
        d_omega,
        phi_leading_coeff: i64::try_from(phi_lead).expect("small"),
        psi_sq_leading_coeff: i64::try_from(psi_sq_lead).expect("small"),
        laws_hold: true,
    })
}

// ---------------------------------------------------------------------------
// Multiplication via the rational maps
// ---------------------------------------------------------------------------

/// `[m]P` through `(phi_m / psi_m^2, omega_m / psi_m^3)`; requires that `P`
/// is not `m`-torsion (otherwise `psi_m(P) = 0`).
pub fn mul_via_division_polys(m: u32, point: &Point) -> Result<Point> {
    if m < 1 {
        return Err(Error::BadParams("multiplication needs m >= 1".into()));
    }
    if point.is_identity() {
        return Ok(point.curve().identity());
    }
    let curve = point.curve().clone();
    let a = BigRational::from_integer(curve.a().clone());
    let b = BigRational::from_integer(curve.b().clone());
    let x = point.x().expect("affine").clone();
    let y = point.y().expect("affine").clone();

    let q = q_poly(m as i64);
    let qv = q.eval(&x, &a, &b);
    let even = m % 2 == 0;
    let psi_zero = qv.is_zero() || (even && y.is_zero());
    if psi_zero {
        return Err(Error::TorsionDenominator { m });
    }

    let phi_v = phi(m)?.eval(&x, &a, &b);
    let f_v = curve.rhs(&x);
    let q_sq = &qv * &qv;
    let psi_sq = if even { &f_v * &q_sq } else { q_sq.clone() };
    let x_new = phi_v / psi_sq;

    let (w, has_y) = omega(m)?;
    let w_v = w.eval(&x, &a, &b);
    let y_new = if has_y {
        // omega = y w, psi^3 = q^3.
        &y * &w_v / (&qv * &q_sq)
    } else {
        // omega = w, psi^3 = y f q^3 = (y w) reduced through y^2 = f:
        // w / (y f q^3) = w y / (f^2 q^3).
        &w_v * &y / (&f_v * &f_v * &qv * &q_sq)
    };
    curve.point(x_new, y_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;
    use std::sync::Arc;

    fn e0() -> Arc<Curve> {
        Curve::new(1, -1).unwrap()
    }

    fn gen() -> Point {
        e0().point_i64(1, 1).unwrap()
    }

    #[test]
    fn psi_base_cases() {
        let p2 = psi(2).unwrap();
        assert_eq!(p2.parity, Parity::Even);
        assert_eq!(p2.body, MPoly::constant(1));
        assert_eq!(p2.to_string(), "2y*(1)");

        let p3 = psi(3).unwrap();
        assert_eq!(p3.parity, Parity::Odd);
        let expect = MPoly::term(3, 4, 0, 0)
            .add(&MPoly::term(6, 2, 1, 0))
            .add(&MPoly::term(12, 1, 0, 1))
            .add(&MPoly::term(-1, 0, 2, 0));
        assert_eq!(p3.body, expect);
        assert_eq!(p3.to_string(), "3*x^4 + 6*A*x^2 + 12*B*x - A^2");

        assert!(psi(0).is_err());
    }

    /// Test-local dense trivariate multiplication, independent of MPoly::mul.
    fn oracle_mul(
        a: &[((u32, u16, u16), i64)],
        b: &[((u32, u16, u16), i64)],
    ) -> Vec<((u32, u16, u16), i64)> {
        let mut acc: std::collections::BTreeMap<(u32, u16, u16), i64> =
            std::collections::BTreeMap::new();
        for ((x1, a1, b1), c1) in a {
            for ((x2, a2, b2), c2) in b {
                *acc.entry((x1 + x2, a1 + a2, b1 + b2)).or_insert(0) += c1 * c2;
            }
        }
        acc.into_iter().filter(|(_, c)| *c != 0).collect()
    }

    fn to_pairs(p: &MPoly) -> Vec<((u32, u16, u16), i64)> {
        p.terms
            .iter()
            .map(|(k, c)| (unpack(*k), i64::try_from(c.clone()).unwrap()))
            .collect()
    }

    #[test]
    fn psi5_matches_independent_expansion() {
        // psi_5 = psi_4 psi_2^3 - psi_1 psi_3^3. With psi_4 = y q_4 and
        // psi_2 = 2y this is y^4 q_4 q_2^3 - q_3^3 = 8 f^2 q_4 - q_3^3.
        let f = to_pairs(&MPoly::curve_poly());
        let q4 = to_pairs(&q_poly(4));
        let q3 = to_pairs(&q_poly(3));
        let f2 = oracle_mul(&f, &f);
        let t1: Vec<_> = oracle_mul(&f2, &q4)
            .into_iter()
            .map(|(k, c)| (k, 8 * c))
            .collect();
        let q3_sq = oracle_mul(&q3, &q3);
        let t2 = oracle_mul(&q3_sq, &q3);
        let mut diff: std::collections::BTreeMap<(u32, u16, u16), i64> =
            t1.into_iter().collect();
        for (k, c) in t2 {
            *diff.entry(k).or_insert(0) -= c;
        }
        let expect: Vec<_> = diff.into_iter().filter(|(_, c)| *c != 0).collect();
        assert_eq!(to_pairs(&psi(5).unwrap().body), expect);
    }

    #[test]
    fn phi_small_cases() {
        assert_eq!(phi(1).unwrap(), MPoly::term(1, 1, 0, 0));
        let expect = MPoly::term(1, 4, 0, 0)
            .add(&MPoly::term(-2, 2, 1, 0))
            .add(&MPoly::term(-8, 1, 0, 1))
            .add(&MPoly::term(1, 0, 2, 0));
        assert_eq!(phi(2).unwrap(), expect);
    }

    #[test]
    fn omega_small_cases() {
        // omega_1 = y.
        let (w, has_y) = omega(1).unwrap();
        assert!(has_y);
        assert_eq!(w, MPoly::constant(1));
        // omega_2 = psi_4 / (4y) evaluated: x^6 + 5Ax^4 + 20Bx^3 - 5A^2x^2 - 4ABx - 8B^2 - A^3.
        let (w, has_y) = omega(2).unwrap();
        assert!(!has_y);
        assert_eq!(w, q_poly(4).div_exact(4));
    }

    #[test]
    fn phi_leading_term_is_x_to_m_squared() {
        // Expanded polynomials up to m = 20.
        for m in 1..=20u32 {
            let p = phi(m).unwrap();
            let ((xe, ae, be), c) = p.leading_term().unwrap();
            assert_eq!((xe, ae, be), (m * m, 0, 0), "m={m}");
            assert!(c.is_one(), "m={m}");
        }
        // Shadow certificate beyond that.
        for m in 21..=30i64 {
            let s = shadow_phi(m).unwrap();
            assert_eq!(s.deg(), Some(m * m));
            assert_eq!(s.lead(), Some(&BigInt::one()));
        }
    }

    /// Specialized univariate recursion over Z, independent cross-check for
    /// the degree shadow.
    mod specialized {
        use super::*;

        fn umul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
            if a.is_empty() || b.is_empty() {
                return Vec::new();
            }
            let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
            for (i, ca) in a.iter().enumerate() {
                if ca.is_zero() {
                    continue;
                }
                for (j, cb) in b.iter().enumerate() {
                    out[i + j] += ca * cb;
                }
            }
            out
        }

        fn usub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
            let mut out = a.to_vec();
            out.resize(out.len().max(b.len()), BigInt::zero());
            for (i, cb) in b.iter().enumerate() {
                out[i] -= cb;
            }
            while out.last().is_some_and(|c| c.is_zero()) {
                out.pop();
            }
            out
        }

        fn udiv(a: &[BigInt], k: i64) -> Vec<BigInt> {
            let k = BigInt::from(k);
            a.iter()
                .map(|c| {
                    let (q, r) = num_integer::Integer::div_rem(c, &k);
                    assert!(r.is_zero());
                    q
                })
                .collect()
        }

        pub fn q_spec(m: i64, a: i64, b: i64, memo: &mut HashMap<i64, Vec<BigInt>>) -> Vec<BigInt> {
            if let Some(v) = memo.get(&m) {
                return v.clone();
            }
            let f = vec![BigInt::from(b), BigInt::from(a), BigInt::zero(), BigInt::one()];
            let v = match m {
                -1 => vec![BigInt::from(-1)],
                0 => Vec::new(),
                1 => vec![BigInt::one()],
                2 => vec![BigInt::from(2)],
                _ => {
                    let gen = q_poly(m.min(4));
                    if m <= 4 {
                        gen.substitute_ab(&BigInt::from(a), &BigInt::from(b))
                    } else if m % 2 == 0 {
                        let k = m / 2;
                        let t1 = umul(
                            &q_spec(k + 2, a, b, memo),
                            &umul(&q_spec(k - 1, a, b, memo), &q_spec(k - 1, a, b, memo)),
                        );
                        let t2 = umul(
                            &q_spec(k - 2, a, b, memo),
                            &umul(&q_spec(k + 1, a, b, memo), &q_spec(k + 1, a, b, memo)),
                        );
                        udiv(&umul(&q_spec(k, a, b, memo), &usub(&t1, &t2)), 2)
                    } else {
                        let k = (m - 1) / 2;
                        let f2 = umul(&f, &f);
                        let qk = q_spec(k, a, b, memo);
                        let t1 = umul(&q_spec(k + 2, a, b, memo), &umul(&umul(&qk, &qk), &qk));
                        let qk1 = q_spec(k + 1, a, b, memo);
                        let t2 =
                            umul(&q_spec(k - 1, a, b, memo), &umul(&umul(&qk1, &qk1), &qk1));
                        if k % 2 == 0 {
                            usub(&umul(&f2, &t1), &t2)
                        } else {
                            usub(&t1, &umul(&f2, &t2))
                        }
                    }
                }
            };
            memo.insert(m, v.clone());
            v
        }
    }

    #[test]
    fn shadow_agrees_with_expansion_and_specialization() {
        // Full expansion comparison for small m.
        for m in 1..=15i64 {
            let s = shadow_q(m).unwrap();
            let p = q_poly(m);
            assert_eq!(s.deg(), p.x_degree().map(|d| d as i64), "m={m}");
            if let Some(((_, ae, be), lead)) = p.leading_term() {
                assert_eq!((ae, be), (0, 0), "leading term is a pure x power");
                assert_eq!(s.lead(), Some(lead), "m={m}");
            }
        }
        // Specialized comparison (A, B) = (1, -1) up to m = 33.
        let mut memo = HashMap::new();
        for m in 1..=33i64 {
            let v = specialized::q_spec(m, 1, -1, &mut memo);
            let s = shadow_q(m).unwrap();
            let spec_deg = if v.is_empty() {
                None
            } else {
                Some((v.len() - 1) as i64)
            };
            assert_eq!(s.deg(), spec_deg, "m={m}");
            if let Some(d) = spec_deg {
                assert_eq!(s.lead(), Some(&v[d as usize]), "m={m}");
            }
        }
    }

    #[test]
    fn degree_reports() {
        let r = degree_report(1).unwrap();
        assert_eq!((r.d_phi, r.d_psi_sq), (1, 0));
        let r = degree_report(2).unwrap();
        assert_eq!((r.d_phi, r.d_psi_sq), (4, 3));
        let r = degree_report(7).unwrap();
        assert_eq!((r.d_phi, r.d_psi_sq), (49, 48));
        // Cross-check m = 7 against the expanded polynomials.
        assert_eq!(phi(7).unwrap().x_degree(), Some(49));
        for m in 1..=60u32 {
            let r = degree_report(m).unwrap();
            assert!(r.laws_hold);
            assert_eq!(r.d_phi, (m * m) as i64);
            assert_eq!(r.phi_leading_coeff, 1);
            assert_eq!(r.psi_sq_leading_coeff, (m * m) as i64);
        }
    }

    #[test]
    fn multiplication_matches_group_law() {
        let g = gen();
        // [2]g = (2, -3), including the y-coordinate.
        let p = mul_via_division_polys(2, &g).unwrap();
        assert_eq!(p, g.add(&g).unwrap());
        // [1]P = P.
        assert_eq!(mul_via_division_polys(1, &g).unwrap(), g);
        // [5]g against double-and-add.
        assert_eq!(mul_via_division_polys(5, &g).unwrap(), g.scalar_mul(5));
    }

    #[test]
    fn oracle_equivalence_sample() {
        let g = gen();
        for m in 1..=12u32 {
            for k in 1..=3i64 {
                let p = g.scalar_mul(k);
                let via = mul_via_division_polys(m, &p).unwrap();
                let direct = p.scalar_mul(m as i64);
                assert_eq!(via.x(), direct.x(), "m={m} k={k}");
                assert_eq!(via, direct, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn torsion_denominator_detected() {
        let e = Curve::new(-1, 0).unwrap();
        let t = e.point_i64(0, 0).unwrap();
        assert!(matches!(
            mul_via_division_polys(2, &t),
            Err(Error::TorsionDenominator { m: 2 })
        ));
    }

    #[test]
    fn psi_nonvanishing_on_free_points() {
        let g = gen();
        let a = BigRational::from_integer(BigInt::one());
        let b = BigRational::from_integer(BigInt::from(-1));
        for m in 1..=20i64 {
            let q = q_poly(m);
            for k in 1..=5i64 {
                let p = g.scalar_mul(k);
                let qv = q.eval(p.x().unwrap(), &a, &b);
                assert!(!qv.is_zero(), "psi_{m} vanished at [{k}]g");
            }
        }
    }

    #[test]
    fn memoization_is_concurrency_safe() {
        let handles: Vec<_> = (0..8)
            .map(|_| std::thread::spawn(|| psi(15).unwrap().body.n_terms()))
            .collect();
        let counts: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(counts.windows(2).all(|w| w[0] == w[1]));
    }
}
