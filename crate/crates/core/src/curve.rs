//! Exact chord-and-tangent arithmetic on an elliptic curve in short
//! Weierstrass form `y^2 = x^3 + Ax + B` over the rationals.
//!
//! All coordinates are arbitrary-precision rationals; no floating point
//! enters the group law, so on-curve membership and point equality are exact.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// An elliptic curve `y^2 = x^3 + Ax + B` with integer coefficients,
/// together with its discriminant and j-invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    a: BigInt,
    b: BigInt,
    delta: BigInt,
    j: BigRational,
}

impl Curve {
    /// Builds the curve, computing `delta = -16(4A^3 + 27B^2)` and
    /// `j = -1728 (4A)^3 / delta` exactly.
    pub fn new(a: i64, b: i64) -> Result<Arc<Curve>> {
        Curve::from_bigints(BigInt::from(a), BigInt::from(b))
    }

    pub fn from_bigints(a: BigInt, b: BigInt) -> Result<Arc<Curve>> {
        let delta: BigInt =
            BigInt::from(-16) * (BigInt::from(4) * a.pow(3) + BigInt::from(27) * b.pow(2));
        if delta.is_zero() {
            return Err(Error::SingularCurve);
        }
        let four_a_cubed: BigInt = (BigInt::from(4) * &a).pow(3);
        let j = BigRational::new(BigInt::from(-1728) * four_a_cubed, delta.clone());
        Ok(Arc::new(Curve { a, b, delta, j }))
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.delta
    }

    pub fn j_invariant(&self) -> &BigRational {
        &self.j
    }

    /// Right-hand side `x^3 + Ax + B` of the curve equation.
    pub fn rhs(&self, x: &BigRational) -> BigRational {
        x * x * x + BigRational::from_integer(self.a.clone()) * x
            + BigRational::from_integer(self.b.clone())
    }

    /// Exact on-curve test for affine coordinates.
    pub fn contains(&self, x: &BigRational, y: &BigRational) -> bool {
        y * y == self.rhs(x)
    }

    /// The identity element of the group.
    pub fn identity(self: &Arc<Self>) -> Point {
        Point {
            curve: Arc::clone(self),
            coords: None,
        }
    }

    /// Builds an affine point, checking the curve equation exactly.
    pub fn point(self: &Arc<Self>, x: BigRational, y: BigRational) -> Result<Point> {
        if !self.contains(&x, &y) {
            return Err(Error::NotOnCurve {
                x: x.to_string(),
                y: y.to_string(),
            });
        }
        Ok(Point {
            curve: Arc::clone(self),
            coords: Some((x, y)),
        })
    }

    pub fn point_i64(self: &Arc<Self>, x: i64, y: i64) -> Result<Point> {
        self.point(
            BigRational::from_integer(BigInt::from(x)),
            BigRational::from_integer(BigInt::from(y)),
        )
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + {}x + {}", self.a, self.b)
    }
}

/// A rational point on a [`Curve`]: either the identity or an affine pair.
///
/// Points are immutable and cheap to clone; the curve is shared by `Arc`.
#[derive(Clone, Debug)]
pub struct Point {
    curve: Arc<Curve>,
    coords: Option<(BigRational, BigRational)>,
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        *self.curve == *other.curve && self.coords == other.coords
    }
}

impl Eq for Point {}

impl Point {
    pub fn curve(&self) -> &Arc<Curve> {
        &self.curve
    }

    pub fn is_identity(&self) -> bool {
        self.coords.is_none()
    }

    pub fn x(&self) -> Option<&BigRational> {
        self.coords.as_ref().map(|(x, _)| x)
    }

    pub fn y(&self) -> Option<&BigRational> {
        self.coords.as_ref().map(|(_, y)| y)
    }

    /// Negation: `(x, y) -> (x, -y)`, identity fixed.
    pub fn neg(&self) -> Point {
        Point {
            curve: Arc::clone(&self.curve),
            coords: self.coords.as_ref().map(|(x, y)| (x.clone(), -y)),
        }
    }

    /// Chord-and-tangent sum `P + Q` with the standard sign convention
    /// `y3 = lambda (x1 - x3) - y1`.
    pub fn add(&self, other: &Point) -> Result<Point> {
        if *self.curve != *other.curve {
            return Err(Error::CurveMismatch);
        }
        let (x1, y1) = match &self.coords {
            None => return Ok(other.clone()),
            Some(c) => c,
        };
        let (x2, y2) = match &other.coords {
            None => return Ok(self.clone()),
            Some(c) => c,
        };
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return Ok(self.curve.identity());
            }
            // Tangent slope at a doubling.
            let three = BigRational::from_integer(BigInt::from(3));
            let a = BigRational::from_integer(self.curve.a.clone());
            (three * x1 * x1 + a) / (BigRational::from_integer(BigInt::from(2)) * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &lambda * &lambda - x1 - x2;
        let y3 = lambda * (x1 - &x3) - y1;
        debug_assert!(self.curve.contains(&x3, &y3));
        Ok(Point {
            curve: Arc::clone(&self.curve),
            coords: Some((x3, y3)),
        })
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        self.add(&other.neg())
    }

    /// `[m]P` by double-and-add; negative `m` negates the result.
    pub fn scalar_mul(&self, m: i64) -> Point {
        if m == 0 || self.is_identity() {
            return self.curve.identity();
        }
        let negate = m < 0;
        let mut k = m.unsigned_abs();
        let mut acc = self.curve.identity();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.add(&base).expect("same curve");
            }
            k >>= 1;
            if k > 0 {
                base = base.add(&base).expect("same curve");
            }
        }
        if negate {
            acc.neg()
        } else {
            acc
        }
    }
}

impl fmt::Display for Point {
    /// Points print as `x_num/x_den,y_num/y_den` or `O`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.coords {
            None => write!(f, "O"),
            Some((x, y)) => write!(
                f,
                "{}/{},{}/{}",
                x.numer(),
                x.denom(),
                y.numer(),
                y.denom()
            ),
        }
    }
}

/// Parses the serialized forms accepted for points: `O`, `x,y` with each
/// coordinate an integer or `num/den` fraction.
pub fn parse_point(curve: &Arc<Curve>, s: &str) -> Result<Point> {
    let s = s.trim();
    if s == "O" {
        return Ok(curve.identity());
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!(
            "expected `O` or `x,y`, got `{s}`"
        )));
    }
    let x = parse_rational(parts[0])?;
    let y = parse_rational(parts[1])?;
    curve.point(x, y)
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
    let den = BigInt::from_str(den).map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("`{s}`: zero denominator")));
    }
    Ok(BigRational::new(num, den))
}

/// Fast exact iteration of the x-coordinate duplication map
/// `x -> (x^4 - 2Ax^2 - 8Bx + A^2) / (4(x^3 + Ax + B))`.
///
/// Tracks the coordinate as a coprime integer pair. The gcd of the unreduced
/// numerator/denominator divides the resultant of the two duplication
/// polynomials, so full reduction only needs gcds against that fixed integer,
/// never between the growing values themselves.
pub(crate) struct XDoubler {
    a: BigInt,
    b: BigInt,
    res_bound: BigInt,
}

impl XDoubler {
    pub fn new(curve: &Curve) -> XDoubler {
        let res = duplication_resultant(&curve.a, &curve.b);
        assert!(!res.is_zero(), "nonsingular curve has nonzero resultant");
        XDoubler {
            a: curve.a.clone(),
            b: curve.b.clone(),
            res_bound: res.abs(),
        }
    }

    /// One duplication step on a coprime pair `(num, den)`, `den > 0`.
    /// Returns `None` when the input is the x-coordinate of a 2-torsion point
    /// (so the double is the identity).
    pub fn step(&self, num: &BigInt, den: &BigInt) -> Option<(BigInt, BigInt)> {
        let n2 = num * num;
        let d2 = den * den;
        let nd = num * den;
        // F = n^4 - 2A n^2 d^2 - 8B n d^3 + A^2 d^4
        let f: BigInt = &n2 * &n2
            - BigInt::from(2) * &self.a * &n2 * &d2
            - BigInt::from(8) * &self.b * &nd * &d2
            + self.a.pow(2) * d2.pow(2);
        // G = 4 d (n^3 + A n d^2 + B d^3)
        let cubic: BigInt = &n2 * num + &self.a * num * &d2 + &self.b * &d2 * den;
        if cubic.is_zero() {
            return None;
        }
        let g: BigInt = BigInt::from(4) * den * cubic;
        let mut gf = f.gcd_stein(&self.res_bound);
        gf = gf.gcd_stein(&g);
        let mut new_num = f / &gf;
        let mut new_den = g / gf;
        if new_den.is_negative() {
            new_num = -new_num;
            new_den = -new_den;
        }
        debug_assert!(new_num.gcd_stein(&new_den).is_one());
        Some((new_num, new_den))
    }
}

trait GcdExt {
    fn gcd_stein(&self, other: &BigInt) -> BigInt;
}

impl GcdExt for BigInt {
    fn gcd_stein(&self, other: &BigInt) -> BigInt {
        use num_integer::Integer;
        self.gcd(other)
    }
}

/// `|Res_x(x^4 - 2Ax^2 - 8Bx + A^2, 4(x^3 + Ax + B))|` via the Sylvester
/// matrix; bounds every common factor appearing in the duplication map.
fn duplication_resultant(a: &BigInt, b: &BigInt) -> BigInt {
    let p = [
        BigInt::one(),
        BigInt::zero(),
        BigInt::from(-2) * a,
        BigInt::from(-8) * b,
        a.pow(2),
    ];
    let q = [
        BigInt::from(4),
        BigInt::zero(),
        BigInt::from(4) * a,
        BigInt::from(4) * b,
    ];
    // Sylvester matrix of (deg 4, deg 3): 7x7.
    let mut m = vec![vec![BigInt::zero(); 7]; 7];
    for (row, mrow) in m.iter_mut().enumerate().take(3) {
        for (k, c) in p.iter().enumerate() {
            mrow[row + k] = c.clone();
        }
    }
    for (row, mrow) in m.iter_mut().enumerate().skip(3) {
        for (k, c) in q.iter().enumerate() {
            mrow[row - 3 + k] = c.clone();
        }
    }
    crate::lattice::int_det(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn e0() -> Arc<Curve> {
        Curve::new(1, -1).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn curve_invariants_match_known_values() {
        let e = e0();
        assert_eq!(*e.discriminant(), BigInt::from(-496));
        assert_eq!(*e.j_invariant(), rat(6912, 31));
        // j * delta = -1728 (4A)^3 exactly
        let lhs = e.j_invariant() * BigRational::from_integer(e.discriminant().clone());
        assert_eq!(lhs, rat(-1728 * 64, 1));
    }

    #[test]
    fn singular_curve_rejected() {
        assert!(matches!(Curve::new(0, 0), Err(Error::SingularCurve)));
    }

    #[test]
    fn minus_one_zero_curve() {
        let e = Curve::new(-1, 0).unwrap();
        assert_eq!(*e.discriminant(), BigInt::from(64));
        assert_eq!(*e.j_invariant(), rat(1728, 1));
    }

    #[test]
    fn doubling_generator() {
        let e = e0();
        let g = e.point_i64(1, 1).unwrap();
        let two_g = g.add(&g).unwrap();
        assert_eq!(two_g.x().unwrap(), &rat(2, 1));
        assert_eq!(two_g.y().unwrap(), &rat(-3, 1));
    }

    #[test]
    fn identity_and_inverse() {
        let e = e0();
        let g = e.point_i64(1, 1).unwrap();
        let o = e.identity();
        assert_eq!(g.add(&o).unwrap(), g);
        assert_eq!(g.add(&g.neg()).unwrap(), o);
        assert_eq!(o.neg(), o);
        assert_eq!(e.point_i64(2, -3).unwrap().neg(), e.point_i64(2, 3).unwrap());
    }

    #[test]
    fn curve_mismatch_detected() {
        let e = e0();
        let f = Curve::new(0, -2).unwrap();
        let p = e.point_i64(1, 1).unwrap();
        let q = f.point_i64(3, 5).unwrap();
        assert!(matches!(p.add(&q), Err(Error::CurveMismatch)));
    }

    #[test]
    fn scalar_mul_small_cases() {
        let e = e0();
        let g = e.point_i64(1, 1).unwrap();
        assert!(g.scalar_mul(0).is_identity());
        assert_eq!(g.scalar_mul(1), g);
        let triple = g.add(&g).unwrap().add(&g).unwrap();
        assert_eq!(g.scalar_mul(3), triple);
        assert_eq!(g.scalar_mul(-3), triple.neg());
    }

    /// Group-law fixtures: curves with a known rational point.
    fn fixtures() -> Vec<(Arc<Curve>, Point)> {
        let mut out = Vec::new();
        for (a, b, x, y) in [(1i64, -1i64, 1i64, 1i64), (0, -2, 3, 5), (-2, 5, 2, 3), (-7, 10, 1, 2)] {
            let e = Curve::new(a, b).unwrap();
            let p = e.point_i64(x, y).unwrap();
            out.push((e, p));
        }
        out
    }

    #[test]
    fn addition_commutes_and_associates() {
        for (e, g) in fixtures() {
            let pts: Vec<Point> = (-6..=6).map(|k| g.scalar_mul(k)).collect();
            for p in &pts {
                for q in &pts {
                    assert_eq!(p.add(q).unwrap(), q.add(p).unwrap());
                }
            }
            // Exhaustive associativity on the fixture multiples.
            for p in &pts {
                for q in &pts {
                    let pq = p.add(q).unwrap();
                    for r in &pts {
                        let qr = q.add(r).unwrap();
                        assert_eq!(pq.add(r).unwrap(), p.add(&qr).unwrap());
                    }
                }
            }
            let _ = e;
        }
    }

    #[test]
    fn results_stay_on_curve() {
        for (e, g) in fixtures() {
            for k in -6..=6 {
                let p = g.scalar_mul(k);
                if let (Some(x), Some(y)) = (p.x(), p.y()) {
                    assert!(e.contains(x, y));
                }
            }
        }
    }

    #[test]
    fn scalar_mul_is_additive() {
        for (_, g) in fixtures() {
            for m in -10i64..=10 {
                for n in [-10i64, -3, 0, 1, 7, 10] {
                    let lhs = g.scalar_mul(m + n);
                    let rhs = g.scalar_mul(m).add(&g.scalar_mul(n)).unwrap();
                    assert_eq!(lhs, rhs, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn serialization_round_trip() {
        let e = e0();
        for k in [-5i64, -1, 0, 1, 2, 5] {
            let p = e.point_i64(1, 1).unwrap().scalar_mul(k);
            let s = p.to_string();
            let back = parse_point(&e, &s).unwrap();
            assert_eq!(back, p);
        }
        assert_eq!(e.identity().to_string(), "O");
        // Short integer form accepted on input.
        assert_eq!(
            parse_point(&e, "1,1").unwrap(),
            e.point_i64(1, 1).unwrap()
        );
        assert!(parse_point(&e, "2,2").is_err());
    }

    #[test]
    fn x_doubler_matches_group_law() {
        let e = e0();
        let g = e.point_i64(1, 1).unwrap();
        let doubler = XDoubler::new(&e);
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        let mut p = g.clone();
        for _ in 0..6 {
            let (n2, d2) = doubler.step(&num, &den).unwrap();
            p = p.add(&p).unwrap();
            let x = p.x().unwrap();
            assert_eq!(x.numer(), &n2);
            assert_eq!(x.denom(), &d2);
            num = n2;
            den = d2;
        }
    }

    #[test]
    fn x_doubler_detects_two_torsion() {
        // (0,0) is 2-torsion on y^2 = x^3 - x.
        let e = Curve::new(-1, 0).unwrap();
        let doubler = XDoubler::new(&e);
        assert!(doubler.step(&BigInt::zero(), &BigInt::one()).is_none());
    }
}
