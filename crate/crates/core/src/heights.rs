//! Height functions over the rationals: the logarithmic Weil height, its
//! euclidean variant, the archimedean part, the height of a Weierstrass
//! equation, and a certified Néron-Tate height.
//!
//! The canonical height is normalized so that `h_NT(P) ~ h(x(P)) / 2`; it is
//! computed by repeated doubling with the explicit difference envelope as the
//! truncation certificate, so the returned interval always contains the true
//! value.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::curve::{Curve, Point, XDoubler};
use crate::numeric::{ln_abs_bigint, REAL_RELATIVE_TOL};
use crate::{Error, Result};

/// Default cap on the doubling depth of the canonical-height computation.
pub const DEFAULT_DEPTH_CAP: u32 = 20;

/// Smallest tolerance served by the doubling backend.
pub const MIN_TOL: f64 = 1e-4;

/// A certified enclosure `[lo, hi]` of a real height value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeightInterval {
    pub lo: f64,
    pub hi: f64,
}

impl HeightInterval {
    pub fn new(lo: f64, hi: f64) -> HeightInterval {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        HeightInterval { lo, hi }
    }

    pub fn zero() -> HeightInterval {
        HeightInterval { lo: 0.0, hi: 0.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn add(&self, other: &HeightInterval) -> HeightInterval {
        HeightInterval::new(self.lo + other.lo, self.hi + other.hi)
    }

    /// Scales by a nonnegative factor.
    pub fn scale(&self, f: f64) -> HeightInterval {
        assert!(f >= 0.0);
        HeightInterval::new(self.lo * f, self.hi * f)
    }

    fn widen_rel(&self, rel: f64) -> HeightInterval {
        let pad_lo = rel * self.lo.abs() + f64::MIN_POSITIVE;
        let pad_hi = rel * self.hi.abs() + f64::MIN_POSITIVE;
        HeightInterval::new(self.lo - pad_lo, self.hi + pad_hi)
    }

    fn clamp_nonneg(&self) -> HeightInterval {
        HeightInterval::new(self.lo.max(0.0), self.hi.max(0.0))
    }
}

// ---------------------------------------------------------------------------
// Projective heights over Q
// ---------------------------------------------------------------------------

/// Scales projective coordinates to coprime integers (unique up to sign).
fn clear_to_coprime(coords: &[BigRational]) -> Result<Vec<BigInt>> {
    if coords.is_empty() || coords.iter().all(|c| c.is_zero()) {
        return Err(Error::AllZero);
    }
    let mut lcm = BigInt::one();
    for c in coords {
        lcm = lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = coords
        .iter()
        .map(|c| c.numer() * &lcm / c.denom())
        .collect();
    let mut gcd = BigInt::zero();
    for v in &ints {
        gcd = gcd.gcd(v);
    }
    Ok(ints.into_iter().map(|v| v / &gcd).collect())
}

/// Logarithmic Weil height of a projective point over `Q`: after clearing to
/// coprime integers only the archimedean place contributes, `log max |v_i|`.
pub fn weil_height_projective(coords: &[BigRational]) -> Result<f64> {
    let ints = clear_to_coprime(coords)?;
    let max = ints.iter().map(|v| v.abs()).max().expect("nonempty");
    Ok(ln_abs_bigint(&max).max(0.0))
}

/// Modified height: the archimedean max is replaced by the euclidean norm,
/// `1/2 log sum v_i^2` on coprime integers.
pub fn h2_projective(coords: &[BigRational]) -> Result<f64> {
    let ints = clear_to_coprime(coords)?;
    let sum_sq: BigInt = ints.iter().map(|v| v * v).sum();
    Ok(0.5 * ln_abs_bigint(&sum_sq))
}

/// Weil height of a single rational, `h(x) = h((x : 1))`.
pub fn weil_height_rational(x: &BigRational) -> f64 {
    let max = x.numer().abs().max(x.denom().abs());
    ln_abs_bigint(&max).max(0.0)
}

/// Archimedean contribution to the Weil height: `log^+ |x|`.
pub fn h_infty(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    (ln_abs_bigint(x.numer()) - ln_abs_bigint(x.denom())).max(0.0)
}

/// Weil height of the Weierstrass equation, `h(1 : A^(1/2) : B^(1/3))`.
///
/// For integer coefficients the finite places contribute nothing, so the
/// value is `max(log|A|/2, log|B|/3, 0)`.
pub fn weierstrass_height(curve: &Curve) -> f64 {
    let mut h = 0f64;
    if !curve.a().is_zero() {
        h = h.max(ln_abs_bigint(curve.a()) / 2.0);
    }
    if !curve.b().is_zero() {
        h = h.max(ln_abs_bigint(curve.b()) / 3.0);
    }
    h
}

// ---------------------------------------------------------------------------
// Canonical height
// ---------------------------------------------------------------------------

/// The explicit envelope constants for `h_NT(P) - h(x(P))/2`:
/// the difference lies in `[-c_minus, c_plus]`.
#[derive(Clone, Copy, Debug)]
pub struct EnvelopeConstants {
    pub c_minus: f64,
    pub c_plus: f64,
}

pub fn envelope_constants(curve: &Curve) -> EnvelopeConstants {
    let j = curve.j_invariant();
    let h_j = weil_height_rational(j);
    let h_inf_j = h_infty(j);
    let h_delta = ln_abs_bigint(curve.discriminant());
    EnvelopeConstants {
        c_minus: h_j / 24.0 + h_delta / 12.0 + h_inf_j / 12.0 + 0.973,
        c_plus: h_delta / 12.0 + h_inf_j / 12.0 + 1.07,
    }
}

/// Certified Néron-Tate height with interval width at most `tol`.
pub fn neron_tate(point: &Point, tol: f64) -> Result<HeightInterval> {
    Ok(neron_tate_with_depth(point, tol, DEFAULT_DEPTH_CAP)?.0)
}

/// As [`neron_tate`], also reporting the doubling depth used.
pub fn neron_tate_with_depth(
    point: &Point,
    tol: f64,
    depth_cap: u32,
) -> Result<(HeightInterval, u32)> {
    if tol < MIN_TOL {
        return Err(Error::BadParams(format!(
            "doubling backend serves tol >= {MIN_TOL}, got {tol}"
        )));
    }
    if point.is_identity() {
        return Ok((HeightInterval::zero(), 0));
    }
    let curve = point.curve();
    let env = envelope_constants(curve);
    let cmax = env.c_minus.max(env.c_plus);
    let mut depth = 0u32;
    let mut scale = 1f64;
    while scale * cmax > tol / 2.0 {
        depth += 1;
        scale /= 4.0;
        if depth > depth_cap {
            return Err(Error::PrecisionUnreachable {
                needed: depth,
                cap: depth_cap,
            });
        }
    }

    let doubler = XDoubler::new(curve);
    let x = point.x().expect("affine");
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    for _ in 0..depth {
        match doubler.step(&num, &den) {
            Some((n, d)) => {
                num = n;
                den = d;
            }
            // Hit 2-torsion: the point is torsion, so its height is zero.
            None => return Ok((HeightInterval::zero(), depth)),
        }
    }
    let max_coord = num.abs().max(den.abs());
    let h_x = ln_abs_bigint(&max_coord).max(0.0);
    let half = h_x / 2.0;
    let interval = HeightInterval::new(
        (half - env.c_minus) * scale,
        (half + env.c_plus) * scale,
    )
    .widen_rel(REAL_RELATIVE_TOL)
    .clamp_nonneg();
    Ok((interval, depth))
}

/// Canonical height of a tuple of points: the interval sum of the coordinate
/// heights.
pub fn canonical_height_product(points: &[Point], tol: f64) -> Result<HeightInterval> {
    let mut acc = HeightInterval::zero();
    for p in points {
        acc = acc.add(&neron_tate(p, tol)?);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Comparison inequalities
// ---------------------------------------------------------------------------

/// Signed slacks of one two-sided envelope; both must be nonnegative up to
/// the interval width of the measured height.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnvelopeSlacks {
    pub lower: f64,
    pub upper: f64,
}

/// Evaluated comparison inequalities at one point: the `h <= h2 <= h + ...`
/// sandwich on the projective coordinates, and the two canonical-height
/// envelopes (skipped at the identity, whose x-coordinate is undefined).
#[derive(Clone, Debug, Serialize)]
pub struct HeightComparisonReport {
    pub h: f64,
    pub h2: f64,
    /// `h2 - h >= 0`.
    pub sandwich_lower: f64,
    /// `h + log(3)/2 - h2 >= 0` (points of `E` live in the projective plane).
    pub sandwich_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silverman: Option<EnvelopeSlacks>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zimmer: Option<EnvelopeSlacks>,
    pub interval_width: f64,
}

/// Projective coordinates of a point of `E` in the plane.
fn projective_coords(point: &Point) -> Vec<BigRational> {
    match (point.x(), point.y()) {
        (Some(x), Some(y)) => vec![x.clone(), y.clone(), BigRational::one()],
        _ => vec![
            BigRational::zero(),
            BigRational::one(),
            BigRational::zero(),
        ],
    }
}

pub fn height_comparison_report(point: &Point, tol: f64) -> Result<HeightComparisonReport> {
    let coords = projective_coords(point);
    let h = weil_height_projective(&coords)?;
    let h2 = h2_projective(&coords)?;
    let sandwich_lower = h2 - h;
    let sandwich_upper = h + 0.5 * 3f64.ln() - h2;

    let mut report = HeightComparisonReport {
        h,
        h2,
        sandwich_lower,
        sandwich_upper,
        silverman: None,
        zimmer: None,
        interval_width: 0.0,
    };

    if !point.is_identity() {
        let nt = neron_tate(point, tol)?;
        report.interval_width = nt.width();
        let curve = point.curve();
        let env = envelope_constants(curve);
        let hx = weil_height_rational(point.x().expect("affine"));
        let diff = nt.mid() - hx / 2.0;
        report.silverman = Some(EnvelopeSlacks {
            lower: diff + env.c_minus,
            upper: env.c_plus - diff,
        });
        let hw = weierstrass_height(curve);
        let q = h / 3.0 - nt.mid();
        report.zimmer = Some(EnvelopeSlacks {
            lower: q + hw / 2.0 + 7.0 / 6.0 * std::f64::consts::LN_2,
            upper: (hw + 2.0 * std::f64::consts::LN_2) - q,
        });
    }

    let tol_slack = report.interval_width + 1e-9 * (1.0 + h.abs());
    let violated = report.sandwich_lower < -tol_slack
        || report.sandwich_upper < -tol_slack
        || report
            .silverman
            .is_some_and(|s| s.lower < -tol_slack || s.upper < -tol_slack)
        || report
            .zimmer
            .is_some_and(|s| s.lower < -tol_slack || s.upper < -tol_slack);
    if violated {
        return Err(Error::EnvelopeViolation(format!("{report:?}")));
    }
    Ok(report)
}

/// Direction of the essential-minimum conversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuDirection {
    /// Upper bound: `mu <= 3 mu_hat + c3(E, N)`.
    Up,
    /// Lower bound: `mu >= 3 mu_hat - 3 c2(E, N)`.
    Down,
}

/// Converts between the two essential minima via
/// `3 mu_hat - 3 c2(E,N) <= mu <= 3 mu_hat + c3(E,N)`.
pub fn mu_conversion(mu_hat: f64, n: u32, curve: &Curve, direction: MuDirection) -> Result<f64> {
    let hw = weierstrass_height(curve);
    Ok(match direction {
        MuDirection::Up => 3.0 * mu_hat + crate::bounds::c3(n)?.eval(hw),
        MuDirection::Down => 3.0 * mu_hat - 3.0 * crate::bounds::c2(n)?.eval(hw),
    })
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

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn weil_height_examples() {
        assert_eq!(weil_height_projective(&[rat(1, 1), rat(1, 1)]).unwrap(), 0.0);
        let h = weil_height_projective(&[rat(2, 1), rat(3, 1)]).unwrap();
        assert!((h - 3f64.ln()).abs() < 1e-15);
        // Projective invariance: (1/2 : 1/3) scales to (3 : 2).
        let h = weil_height_projective(&[rat(1, 2), rat(1, 3)]).unwrap();
        assert!((h - 3f64.ln()).abs() < 1e-15);
        assert!(matches!(
            weil_height_projective(&[rat(0, 1), rat(0, 1)]),
            Err(Error::AllZero)
        ));
    }

    #[test]
    fn h2_examples() {
        let h = h2_projective(&[rat(1, 1), rat(1, 1)]).unwrap();
        assert!((h - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(h2_projective(&[rat(0, 1), rat(1, 1)]).unwrap(), 0.0);
        let h = h2_projective(&[rat(3, 1), rat(4, 1)]).unwrap();
        assert!((h - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn h_infty_examples() {
        let h = h_infty(&rat(6912, 31));
        assert!((h - (6912f64 / 31.0).ln()).abs() < 1e-12);
        assert_eq!(h_infty(&rat(1, 2)), 0.0);
        let h = h_infty(&rat(-3, 1));
        assert!((h - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn weierstrass_height_examples() {
        assert_eq!(weierstrass_height(&e0()), 0.0);
        let e = Curve::new(4, 1).unwrap();
        assert!((weierstrass_height(&e) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn neron_tate_identity_and_generator() {
        let o = e0().identity();
        assert_eq!(neron_tate(&o, 1e-3).unwrap(), HeightInterval::zero());

        let (nt, depth) = neron_tate_with_depth(&gen(), 1e-3, DEFAULT_DEPTH_CAP).unwrap();
        assert!(nt.width() <= 1e-3, "width {}", nt.width());
        // Canonical (h(x)/2-normalized) height of g; its doubling-limit twin
        // is twice this and clears 1/4.
        assert!(nt.lo > 0.12 && nt.hi < 0.13, "interval {nt:?}");
        assert!(2.0 * nt.lo >= 0.25, "doubled lower end {}", 2.0 * nt.lo);
        assert!(depth > 0);
    }

    #[test]
    fn neron_tate_quadraticity() {
        let g = gen();
        let tol = 1e-3;
        let base = neron_tate(&g, tol).unwrap();
        for m in 1..=10i64 {
            let nt = neron_tate(&g.scalar_mul(m), tol).unwrap();
            let err = (nt.mid() - (m * m) as f64 * base.mid()).abs();
            assert!(
                err <= ((m * m) as f64 + 1.0) * tol,
                "m={m}: err {err}"
            );
        }
    }

    #[test]
    fn neron_tate_of_torsion_is_zero() {
        let e = Curve::new(-1, 0).unwrap();
        let t = e.point_i64(0, 0).unwrap();
        assert_eq!(neron_tate(&t, 1e-3).unwrap(), HeightInterval::zero());
    }

    #[test]
    fn neron_tate_rejects_tiny_tol_and_caps_depth() {
        assert!(matches!(
            neron_tate(&gen(), 1e-6),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            neron_tate_with_depth(&gen(), 1e-4, 2),
            Err(Error::PrecisionUnreachable { .. })
        ));
    }

    #[test]
    fn product_height_examples() {
        let o = e0().identity();
        let z = canonical_height_product(&[o.clone(), o], 1e-3).unwrap();
        assert_eq!(z, HeightInterval::zero());

        let g = gen();
        let tol = 1e-3;
        let base = neron_tate(&g, tol).unwrap();
        let two = canonical_height_product(&[g.clone(), g.clone()], tol).unwrap();
        assert!((two.mid() - 2.0 * base.mid()).abs() < 2.0 * tol);
        let five = canonical_height_product(&[g.clone(), g.scalar_mul(2)], tol).unwrap();
        assert!((five.mid() - 5.0 * base.mid()).abs() < 5.0 * tol);
    }

    #[test]
    fn parallelogram_law() {
        let g = gen();
        let tol = 1e-3;
        for a in 1..=4i64 {
            for b in 1..=4i64 {
                let p = g.scalar_mul(a);
                let q = g.scalar_mul(b);
                let sum = neron_tate(&p.add(&q).unwrap(), tol).unwrap();
                let diff = neron_tate(&p.sub(&q).unwrap(), tol).unwrap();
                let hp = neron_tate(&p, tol).unwrap();
                let hq = neron_tate(&q, tol).unwrap();
                let lhs = sum.mid() + diff.mid();
                let rhs = 2.0 * hp.mid() + 2.0 * hq.mid();
                assert!((lhs - rhs).abs() <= 6.0 * tol, "a={a} b={b}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn comparison_report_examples() {
        let g = gen();
        let r = height_comparison_report(&g, 1e-3).unwrap();
        assert!(r.sandwich_lower >= 0.0 && r.sandwich_upper >= 0.0);
        let s = r.silverman.unwrap();
        assert!(s.lower >= 0.0 && s.upper >= 0.0);
        let z = r.zimmer.unwrap();
        assert!(z.lower >= 0.0 && z.upper >= 0.0);

        let r5 = height_comparison_report(&g.scalar_mul(5), 1e-3).unwrap();
        assert!(r5.silverman.unwrap().lower >= 0.0);

        let ro = height_comparison_report(&e0().identity(), 1e-3).unwrap();
        assert!(ro.silverman.is_none() && ro.zimmer.is_none());
        assert_eq!(ro.h, 0.0);
    }

    #[test]
    fn mu_conversion_examples() {
        let e = e0();
        let up = mu_conversion(0.0, 3, &e, MuDirection::Up).unwrap();
        assert!((up - crate::bounds::c3(3).unwrap().eval(0.0)).abs() < 1e-12);
        let down = mu_conversion(1.0, 2, &e, MuDirection::Down).unwrap();
        assert!((down - (3.0 - 3.0 * crate::bounds::c2(2).unwrap().eval(0.0))).abs() < 1e-12);
        // Monotone in mu_hat, and Up dominates Down.
        assert!(mu_conversion(2.0, 3, &e, MuDirection::Up).unwrap() > up);
        assert!(up > mu_conversion(0.0, 3, &e, MuDirection::Down).unwrap());
    }
}
