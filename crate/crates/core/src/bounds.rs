//! Every explicit constant of the bound machinery, the Chow-ring degree
//! calculator, degree/height bounds for translates, and the auxiliary-subgroup
//! assembly.
//!
//! Constants are kept exact as long as possible: pi enters only through unit
//! ball volumes, logarithms only through a [`LogLinear`] combination whose
//! coefficients stay exact. Floating conversion happens once, at certificate
//! emission.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::curve::{Curve, Point};
use crate::heights::{neron_tate, weierstrass_height, HeightInterval};
use crate::lattice::{habegger_vectors, rank1_linear_forms, HabeggerCertificate};
use crate::numeric::{PiRat, PiRatRecord};
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

fn ln3() -> f64 {
    3f64.ln()
}

// ---------------------------------------------------------------------------
// Exact building blocks
// ---------------------------------------------------------------------------

pub(crate) fn factorial_big(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn double_factorial_odd(n: u64) -> BigInt {
    // n!! for odd n
    let mut acc = BigInt::one();
    let mut k = n as i64;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

pub(crate) fn binom_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

fn big_pow(base: i64, exp: u32) -> BigInt {
    BigInt::from(base).pow(exp)
}

/// Volume of the euclidean unit ball in `R^r`, exact as `rational * pi^k`.
pub fn omega(r: u32) -> PiRat {
    if r % 2 == 0 {
        let t = (r / 2) as u64;
        PiRat::with_pi_pow(
            BigRational::new(BigInt::one(), factorial_big(t)),
            t as i32,
        )
    } else {
        let t = (r - 1) / 2;
        PiRat::with_pi_pow(
            BigRational::new(big_pow(2, t + 1), double_factorial_odd((2 * t + 1) as u64)),
            t as i32,
        )
    }
}

/// A value `unit + a log 2 + b log 3 + c h_W(E)` with exact coefficients.
///
/// All curve-dependent constants have this shape, which makes the headline
/// constant identities checkable coefficient-by-coefficient as exact
/// rational (times pi-power) equalities.
#[derive(Clone, Debug, PartialEq)]
pub struct LogLinear {
    pub unit: PiRat,
    pub log2: PiRat,
    pub log3: PiRat,
    pub hw: PiRat,
}

impl LogLinear {
    pub fn zero() -> LogLinear {
        LogLinear {
            unit: PiRat::from_int(0),
            log2: PiRat::from_int(0),
            log3: PiRat::from_int(0),
            hw: PiRat::from_int(0),
        }
    }

    pub fn add(&self, other: &LogLinear) -> LogLinear {
        LogLinear {
            unit: self.unit.add_same_pow_or_zero(&other.unit),
            log2: self.log2.add_same_pow_or_zero(&other.log2),
            log3: self.log3.add_same_pow_or_zero(&other.log3),
            hw: self.hw.add_same_pow_or_zero(&other.hw),
        }
    }

    pub fn scale(&self, f: &PiRat) -> LogLinear {
        LogLinear {
            unit: self.unit.mul(f),
            log2: self.log2.mul(f),
            log3: self.log3.mul(f),
            hw: self.hw.mul(f),
        }
    }

    /// Evaluates at a concrete Weierstrass-equation height.
    pub fn eval(&self, hw: f64) -> f64 {
        self.unit.to_f64() + self.log2.to_f64() * LN2 + self.log3.to_f64() * ln3()
            + self.hw.to_f64() * hw
    }

    pub fn eval_curve(&self, curve: &Curve) -> f64 {
        self.eval(weierstrass_height(curve))
    }
}

trait AddOrZero {
    fn add_same_pow_or_zero(&self, other: &PiRat) -> PiRat;
}

impl AddOrZero for PiRat {
    fn add_same_pow_or_zero(&self, other: &PiRat) -> PiRat {
        if self.coeff.is_zero() {
            return other.clone();
        }
        if other.coeff.is_zero() {
            return self.clone();
        }
        self.add_same_pow(other)
    }
}

fn loglinear(log2: PiRat, log3: PiRat, hw: PiRat) -> LogLinear {
    LogLinear {
        unit: PiRat::from_int(0),
        log2,
        log3,
        hw,
    }
}

// ---------------------------------------------------------------------------
// The constants table
// ---------------------------------------------------------------------------

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::BadParams("N must be >= 1".into()));
    }
    Ok(())
}

fn check_s(n: u32, s: u32) -> Result<()> {
    check_n(n)?;
    if s == 0 || s > n {
        return Err(Error::BadParams(format!("need 1 <= s <= N, got s={s}, N={n}")));
    }
    Ok(())
}

fn check_m(n: u32, m: u32) -> Result<()> {
    check_n(n)?;
    if m == 0 || m > n {
        return Err(Error::BadParams(format!("need 1 <= m <= N, got m={m}, N={n}")));
    }
    Ok(())
}

/// Degree of the power `E^N` under the Weierstrass + Segre embedding:
/// `c1(N) = 3^N N!`.
pub fn c1(n: u32) -> Result<PiRat> {
    check_n(n)?;
    Ok(PiRat::from_bigint(big_pow(3, n) * factorial_big(n as u64)))
}

/// `c2(E, N) = N/2 h_W + 7N/6 log 2`.
pub fn c2(n: u32) -> Result<LogLinear> {
    check_n(n)?;
    Ok(loglinear(
        PiRat::from_ratio(7 * n as i64, 6),
        PiRat::from_int(0),
        PiRat::from_ratio(n as i64, 2),
    ))
}

/// `c3(E, N) = N (3 h_W + 6 log 2 + 1/2 log 3)`.
pub fn c3(n: u32) -> Result<LogLinear> {
    check_n(n)?;
    Ok(loglinear(
        PiRat::from_int(6 * n as i64),
        PiRat::from_ratio(n as i64, 2),
        PiRat::from_int(3 * n as i64),
    ))
}

/// Degree coefficient for subgroups cut by `s` rows:
/// `c4(N, s) = 3^N N! (3/2 (N+1) 12^(N-1))^s`.
pub fn c4(n: u32, s: u32) -> Result<PiRat> {
    check_s(n, s)?;
    let base = PiRat::from_rational(BigRational::new(
        3 * (n as i64 + 1) * big_pow(12, n - 1),
        BigInt::from(2),
    ));
    Ok(c1(n)?.mul(&base.pow(s)))
}

/// Height coefficient of the auxiliary-subgroup construction:
/// `c5(N, m, s) = m^3 (m!)^4 binom(N+m, N) 3 s N^2 (N-s+1) 4^(3N-m+1)
///                / (omega_s omega_{N-s} omega_N)^2 * c4(N, s)`.
pub fn c5(n: u32, m: u32, s: u32) -> Result<PiRat> {
    check_s(n, s)?;
    check_m(n, m)?;
    let num = BigInt::from(m).pow(3)
        * factorial_big(m as u64).pow(4)
        * binom_big((n + m) as u64, n as u64)
        * BigInt::from(3 * s as i64)
        * BigInt::from(n as i64).pow(2)
        * BigInt::from((n - s + 1) as i64)
        * big_pow(4, 3 * n - m + 1);
    let omegas = omega(s).mul(&omega(n - s)).mul(&omega(n)).pow(2);
    Ok(PiRat::from_bigint(num).div(&omegas).mul(&c4(n, s)?))
}

/// `c6(E, N, s) = 3N(N-s+1)(2 log 2 + log 3 / 6 + h_W) c4(N, s)`.
pub fn c6(n: u32, s: u32) -> Result<LogLinear> {
    check_s(n, s)?;
    let scale = c4(n, s)?.scale_int(3 * n as i64 * (n - s + 1) as i64);
    Ok(loglinear(
        PiRat::from_int(2),
        PiRat::from_ratio(1, 6),
        PiRat::from_int(1),
    )
    .scale(&scale))
}

/// `c10(N) = c4(N, N-1)`; needs `N >= 2`.
pub fn c10(n: u32) -> Result<PiRat> {
    if n < 2 {
        return Err(Error::BadParams("c10 needs N >= 2".into()));
    }
    c4(n, n - 1)
}

/// `c11(N) = c5(N, 1, N-1) = 3/2 N^2 (N^2-1) 64^N / (omega_N omega_{N-1})^2 c10(N)`.
pub fn c11(n: u32) -> Result<PiRat> {
    if n < 2 {
        return Err(Error::BadParams("c11 needs N >= 2".into()));
    }
    c5(n, 1, n - 1)
}

/// `c12(E, N) = c6(E, N, N-1) = 6N(h_W + 2 log 2 + 1/6 log 3) c10(N)`.
pub fn c12(n: u32) -> Result<LogLinear> {
    if n < 2 {
        return Err(Error::BadParams("c12 needs N >= 2".into()));
    }
    c6(n, n - 1)
}

/// `c16(N, m) = m^3 (m!)^4 N / 4^(m-1)`.
pub fn c16(n: u32, m: u32) -> PiRat {
    let num = BigInt::from(m).pow(3) * factorial_big(m as u64).pow(4) * BigInt::from(n);
    PiRat::from_rational(BigRational::new(num, big_pow(4, m - 1)))
}

/// `c17(N, m) = binom(m+N, N)^(1/2) 4^N / omega_N` (contains a square root,
/// so only the float value is exposed; the pieces stay exact).
pub fn c17(n: u32, m: u32) -> f64 {
    let b = crate::numeric::big_ratio_to_f64(&BigRational::from_integer(binom_big(
        (m + n) as u64,
        n as u64,
    )));
    let rest = PiRat::from_bigint(big_pow(4, n)).div(&omega(n));
    b.sqrt() * rest.to_f64()
}

/// Leading coefficient of the main theorem:
/// `C1(N) = (N!)^N N^(3N-2) (3^(N^2+N+1) 2^(2N^2+3N-1) (N+1)^(N+1)
///          / (omega_N omega_{N-1})^2)^(N-1)`.
pub fn cc1(n: u32) -> Result<PiRat> {
    if n < 2 {
        return Err(Error::BadParams("C1 needs N >= 2".into()));
    }
    let lead = PiRat::from_bigint(
        factorial_big(n as u64).pow(n) * BigInt::from(n).pow(3 * n - 2),
    );
    let inner_num = big_pow(3, n * n + n + 1)
        * big_pow(2, 2 * n * n + 3 * n - 1)
        * BigInt::from(n as i64 + 1).pow(n + 1);
    let inner = PiRat::from_bigint(inner_num).div(&omega(n).mul(&omega(n - 1)).pow(2));
    Ok(lead.mul(&inner.pow(n - 1)))
}

/// `C2(E, N) = C1(N)(3^N log 2 / 2 + 12 N log 2 + N log 3 + 6 N h_W)`.
pub fn cc2(n: u32) -> Result<LogLinear> {
    let lead = cc1(n)?;
    let log2_coeff = PiRat::from_rational(BigRational::new(
        big_pow(3, n) + BigInt::from(24 * n as i64),
        BigInt::from(2),
    ));
    Ok(loglinear(log2_coeff, PiRat::from_int(n as i64), PiRat::from_int(6 * n as i64))
        .scale(&lead))
}

/// `C3(E, N) = 7 N^2 / 6 log 2 + N^2 / 2 h_W`.
pub fn cc3(n: u32) -> Result<LogLinear> {
    check_n(n)?;
    let n2 = (n * n) as i64;
    Ok(loglinear(
        PiRat::from_ratio(7 * n2, 6),
        PiRat::from_int(0),
        PiRat::from_ratio(n2, 2),
    ))
}

/// `D1 = 2^64 3^40 / pi^8`.
pub fn d1() -> PiRat {
    PiRat::with_pi_pow(
        BigRational::from_integer(big_pow(2, 64) * big_pow(3, 40)),
        -8,
    )
}

/// `D2(E) = 2^62 3^41 / pi^8 (71 log 2 + 4 log 3 + 30 h_W)`.
pub fn d2() -> LogLinear {
    let factor = PiRat::with_pi_pow(
        BigRational::from_integer(big_pow(2, 62) * big_pow(3, 41)),
        -8,
    );
    loglinear(PiRat::from_int(71), PiRat::from_int(4), PiRat::from_int(30)).scale(&factor)
}

/// `D3(E) = 9/2 h_W + 21/2 log 2`.
pub fn d3() -> LogLinear {
    loglinear(PiRat::from_ratio(21, 2), PiRat::from_int(0), PiRat::from_ratio(9, 2))
}

/// The chain-assembled value of the leading coefficient:
/// `(N/3) c10(N) (N c11(N) / (3(N-1)))^(N-1)`, exact.
pub fn chain_cc1(n: u32) -> Result<PiRat> {
    if n < 3 {
        return Err(Error::BadParams("chain constant needs N >= 3".into()));
    }
    let inner = c11(n)?.mul(&PiRat::from_rational(BigRational::new(
        BigInt::from(n),
        BigInt::from(3 * (n as i64 - 1)),
    )));
    Ok(c10(n)?
        .mul(&inner.pow(n - 1))
        .mul(&PiRat::from_ratio(n as i64, 3)))
}

// ---------------------------------------------------------------------------
// Generic constant lookup (CLI surface)
// ---------------------------------------------------------------------------

/// A constant value: exact `rational * pi^k` where available, float otherwise.
#[derive(Clone, Debug)]
pub enum ConstantValue {
    Exact(PiRat),
    Real(f64),
    /// Exact log-linear combination plus its evaluation at the given curve.
    CurveDependent { combo: LogLinear, value: f64 },
}

impl ConstantValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            ConstantValue::Exact(p) => p.to_f64(),
            ConstantValue::Real(x) => *x,
            ConstantValue::CurveDependent { value, .. } => *value,
        }
    }

    pub fn exact(&self) -> Option<&PiRat> {
        match self {
            ConstantValue::Exact(p) => Some(p),
            _ => None,
        }
    }
}

/// Parameters for [`constant`].
#[derive(Clone, Debug, Default)]
pub struct ConstantParams {
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub s: Option<u32>,
    pub r: Option<u32>,
    pub curve: Option<Arc<Curve>>,
}

fn need(p: Option<u32>, what: &str) -> Result<u32> {
    p.ok_or_else(|| Error::BadParams(format!("constant requires parameter {what}")))
}

fn need_curve(p: &Option<Arc<Curve>>) -> Result<&Arc<Curve>> {
    p.as_ref()
        .ok_or_else(|| Error::BadParams("constant requires --curve".into()))
}

/// Evaluates a named constant. Curve-dependent constants need `curve`.
pub fn constant(name: &str, p: &ConstantParams) -> Result<ConstantValue> {
    let v = match name {
        "omega" => ConstantValue::Exact(omega(need(p.r, "r")?)),
        "c1" => ConstantValue::Exact(c1(need(p.n, "n")?)?),
        "c4" => ConstantValue::Exact(c4(need(p.n, "n")?, need(p.s, "s")?)?),
        "c5" => ConstantValue::Exact(c5(need(p.n, "n")?, need(p.m, "m")?, need(p.s, "s")?)?),
        "c10" => ConstantValue::Exact(c10(need(p.n, "n")?)?),
        "c11" => ConstantValue::Exact(c11(need(p.n, "n")?)?),
        "c16" => ConstantValue::Exact(c16(need(p.n, "n")?, need(p.m, "m")?)),
        "c17" => ConstantValue::Real(c17(need(p.n, "n")?, need(p.m, "m")?)),
        "C1" => ConstantValue::Exact(cc1(need(p.n, "n")?)?),
        "D1" => ConstantValue::Exact(d1()),
        "c2" | "c3" | "c6" | "c12" | "C2" | "C3" | "D2" | "D3" => {
            let combo = match name {
                "c2" => c2(need(p.n, "n")?)?,
                "c3" => c3(need(p.n, "n")?)?,
                "c6" => c6(need(p.n, "n")?, need(p.s, "s")?)?,
                "c12" => c12(need(p.n, "n")?)?,
                "C2" => cc2(need(p.n, "n")?)?,
                "C3" => cc3(need(p.n, "n")?)?,
                "D2" => d2(),
                "D3" => d3(),
                _ => unreachable!(),
            };
            let curve = need_curve(&p.curve)?;
            let value = combo.eval_curve(curve);
            ConstantValue::CurveDependent { combo, value }
        }
        other => {
            return Err(Error::BadParams(format!("unknown constant `{other}`")));
        }
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// Chow ring of a product of projective planes
// ---------------------------------------------------------------------------

/// An element of `Z[l_1..l_N]/(l_i^3)`: a coefficient map over multidegrees
/// with every exponent at most 2 (higher powers of any `l_i` vanish).
#[derive(Clone, Debug, PartialEq)]
pub struct ChowClass {
    n_factors: usize,
    terms: BTreeMap<Vec<u8>, BigInt>,
}

impl ChowClass {
    /// The linear class `sum coeffs[i] * l_i`.
    pub fn linear(coeffs: &[i64]) -> ChowClass {
        let n = coeffs.len();
        let mut terms = BTreeMap::new();
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut key = vec![0u8; n];
            key[i] = 1;
            terms.insert(key, BigInt::from(c));
        }
        ChowClass {
            n_factors: n,
            terms,
        }
    }

    pub fn mul(&self, other: &ChowClass) -> ChowClass {
        assert_eq!(self.n_factors, other.n_factors);
        let mut terms: BTreeMap<Vec<u8>, BigInt> = BTreeMap::new();
        for (ka, va) in &self.terms {
            'inner: for (kb, vb) in &other.terms {
                let mut key = Vec::with_capacity(self.n_factors);
                for (a, b) in ka.iter().zip(kb) {
                    let e = a + b;
                    if e >= 3 {
                        // l_i^3 = 0: the monomial vanishes.
                        continue 'inner;
                    }
                    key.push(e);
                }
                let coeff = va * vb;
                *terms.entry(key).or_insert_with(BigInt::zero) += coeff;
            }
        }
        terms.retain(|_, v| !v.is_zero());
        ChowClass {
            n_factors: self.n_factors,
            terms,
        }
    }

    /// Coefficient of the top monomial `(l_1 ... l_N)^2`.
    pub fn top_coefficient(&self) -> BigInt {
        let key = vec![2u8; self.n_factors];
        self.terms.get(&key).cloned().unwrap_or_else(BigInt::zero)
    }
}

/// Product of the given classes, read off at the top degree.
pub fn chow_product(classes: &[ChowClass], n_factors: usize) -> BigInt {
    let mut acc = ChowClass::linear(&vec![0i64; n_factors]);
    acc.terms.insert(vec![0u8; n_factors], BigInt::one());
    for c in classes {
        acc = acc.mul(c);
    }
    acc.top_coefficient()
}

/// Degree of `E^N` in `P_(3^N - 1)`: the product
/// `(3 l_1) ... (3 l_N) (l_1 + ... + l_N)^N`, which must equal `c1(N)`.
pub fn segre_degree(n: u32) -> BigInt {
    let n_us = n as usize;
    let mut classes = Vec::new();
    for i in 0..n_us {
        let mut coeffs = vec![0i64; n_us];
        coeffs[i] = 3;
        classes.push(ChowClass::linear(&coeffs));
    }
    let hyperplane = ChowClass::linear(&vec![1i64; n_us]);
    for _ in 0..n_us {
        classes.push(hyperplane.clone());
    }
    chow_product(&classes, n_us)
}

// ---------------------------------------------------------------------------
// Degree bounds for rational maps
// ---------------------------------------------------------------------------

/// Degree bound for the multiplication-by-m map: `3/2 (m^2 + 1)`.
pub fn d_mult_bound(m: u32) -> f64 {
    1.5 * ((m as f64) * (m as f64) + 1.0)
}

/// Degree bound for the sum of `M` points: `12^(M-1) sum d_i`.
pub fn d_sum_bound(degrees: &[f64]) -> f64 {
    let m = degrees.len();
    assert!(m >= 1);
    12f64.powi(m as i32 - 1) * degrees.iter().sum::<f64>()
}

/// Degree bound for a linear map with integer coefficients:
/// `3/2 12^(N-1) (N + sum l_i^2)`.
pub fn d_linear_bound(coeffs: &[i64], n: u32) -> f64 {
    assert_eq!(coeffs.len(), n as usize);
    let sum_sq: f64 = coeffs.iter().map(|&l| (l * l) as f64).sum();
    1.5 * 12f64.powi(n as i32 - 1) * (n as f64 + sum_sq)
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// One recorded inequality of a certificate.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Comparison {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
}

impl Comparison {
    fn le(label: &str, lhs: f64, rhs: f64) -> Comparison {
        let tol = 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
        Comparison {
            label: label.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            satisfied: lhs <= rhs + tol,
        }
    }

    fn close(label: &str, lhs: f64, rhs: f64, rel: f64) -> Comparison {
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        Comparison {
            label: label.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            satisfied: ((lhs - rhs) / scale).abs() <= rel,
        }
    }
}

/// Recorded constant inside a certificate: float value plus exact form when
/// one exists.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConstantRecord {
    pub approx: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<PiRatRecord>,
}

impl ConstantRecord {
    fn exact(v: &PiRat) -> ConstantRecord {
        ConstantRecord {
            approx: v.to_f64(),
            exact: Some(PiRatRecord::from(v)),
        }
    }

    fn real(v: f64) -> ConstantRecord {
        ConstantRecord {
            approx: v,
            exact: None,
        }
    }
}

/// A traceable record of a bound value: the formula it instantiates, every
/// input and constant that produced it, intermediate values, and the recorded
/// comparisons. Re-evaluating the recorded inputs reproduces `value`
/// bit-for-bit.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BoundCertificate {
    pub formula: String,
    pub inputs: BTreeMap<String, String>,
    pub constants: BTreeMap<String, ConstantRecord>,
    pub intermediates: BTreeMap<String, f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<PiRatRecord>,
    pub comparisons: Vec<Comparison>,
}

impl BoundCertificate {
    fn new(formula: &str) -> BoundCertificate {
        BoundCertificate {
            formula: formula.to_string(),
            inputs: BTreeMap::new(),
            constants: BTreeMap::new(),
            intermediates: BTreeMap::new(),
            value: 0.0,
            exact: None,
            comparisons: Vec::new(),
        }
    }

    /// True when every recorded comparison is satisfied.
    pub fn all_satisfied(&self) -> bool {
        self.comparisons.iter().all(|c| c.satisfied)
    }
}

fn norm_sq_i64(v: &[i64]) -> i64 {
    v.iter().map(|&e| e * e).sum()
}

/// Degree bound for a translate cut by the rows `u_1..u_s` in `Z^N`:
/// `deg(H + P) <= c1(N) (3/2 (N+1) 12^(N-1))^s prod |u_i|^2`, exact.
pub fn translate_degree_bound(rows: &[Vec<i64>], n: u32) -> Result<BoundCertificate> {
    check_n(n)?;
    let s = rows.len() as u32;
    if rows.iter().any(|r| r.len() != n as usize) {
        return Err(Error::BadParams("row length must equal N".into()));
    }
    let mut cert = BoundCertificate::new("translate_degree");
    let base = if s == 0 { c1(n)? } else { c4(n, s)? };
    let mut prod = PiRat::one();
    for (i, row) in rows.iter().enumerate() {
        let nsq = norm_sq_i64(row);
        if nsq == 0 {
            return Err(Error::BadParams("zero row".into()));
        }
        cert.inputs.insert(format!("u{}", i + 1), format!("{row:?}"));
        cert.intermediates
            .insert(format!("norm_sq_u{}", i + 1), nsq as f64);
        prod = prod.scale_int(nsq);
    }
    cert.inputs.insert("N".into(), n.to_string());
    cert.inputs.insert("s".into(), s.to_string());
    cert.constants
        .insert(if s == 0 { "c1" } else { "c4" }.into(), ConstantRecord::exact(&base));
    let exact = base.mul(&prod);
    cert.value = exact.to_f64();
    cert.exact = Some(PiRatRecord::from(&exact));
    Ok(cert)
}

/// Height bound for a translate, with measured heights `h(u_i(P))` supplied
/// as certified intervals (upper ends are used):
/// `h(H+P) <= 3N(N-s+1) 4^N / (omega_{N-s} omega_s)^2 c4(N,s)
///            prod |u_i|^2 sum h(u_i(P))/|u_i|^2  +  c6(E,N,s) prod |u_i|^2`.
pub fn translate_height_bound(
    rows: &[Vec<i64>],
    heights: &[HeightInterval],
    curve: &Curve,
    n: u32,
) -> Result<BoundCertificate> {
    let s = rows.len() as u32;
    check_s(n, s)?;
    if heights.len() != rows.len() {
        return Err(Error::BadParams("one height interval per row".into()));
    }
    if rows.iter().any(|r| r.len() != n as usize) {
        return Err(Error::BadParams("row length must equal N".into()));
    }
    let mut cert = BoundCertificate::new("translate_height");
    let c4v = c4(n, s)?;
    let c6v = c6(n, s)?;
    let hw = weierstrass_height(curve);
    let lead = PiRat::from_bigint(
        BigInt::from(3 * n as i64 * (n - s + 1) as i64) * big_pow(4, n),
    )
    .div(&omega(n - s).mul(&omega(s)).pow(2));

    let mut prod_sq = 1f64;
    let mut height_sum = 0f64;
    for (i, (row, h)) in rows.iter().zip(heights).enumerate() {
        let nsq = norm_sq_i64(row);
        if nsq == 0 {
            return Err(Error::BadParams("zero row".into()));
        }
        cert.inputs.insert(format!("u{}", i + 1), format!("{row:?}"));
        cert.inputs
            .insert(format!("height_u{}", i + 1), format!("[{}, {}]", h.lo, h.hi));
        prod_sq *= nsq as f64;
        height_sum += h.hi / nsq as f64;
    }
    cert.inputs.insert("N".into(), n.to_string());
    cert.inputs.insert("s".into(), s.to_string());
    cert.inputs.insert("curve".into(), curve.to_string());
    cert.constants.insert("c4".into(), ConstantRecord::exact(&c4v));
    cert.constants
        .insert("c6".into(), ConstantRecord::real(c6v.eval(hw)));
    cert.constants
        .insert("lead".into(), ConstantRecord::exact(&lead));
    let main = lead.to_f64() * c4v.to_f64() * prod_sq * height_sum;
    let tail = c6v.eval(hw) * prod_sq;
    cert.intermediates.insert("main_term".into(), main);
    cert.intermediates.insert("c6_term".into(), tail);
    cert.value = main + tail;
    Ok(cert)
}

// ---------------------------------------------------------------------------
// Auxiliary subgroup assembly
// ---------------------------------------------------------------------------

/// The decomposition data of a point `P = (P_1..P_N)` in a rank-`m` subgroup:
/// integer coefficients `v_ij` with `P_i = sum_j [v_ij] g_j`, the generators,
/// and measured heights of the generators.
#[derive(Clone, Debug)]
pub struct RankDecomposition {
    pub coefficients: Vec<Vec<i64>>,
    pub generators: Vec<Point>,
    pub gen_heights: Vec<HeightInterval>,
}

impl RankDecomposition {
    /// Builds the decomposition, measuring each generator height to `tol`.
    pub fn measure(
        coefficients: Vec<Vec<i64>>,
        generators: Vec<Point>,
        tol: f64,
    ) -> Result<RankDecomposition> {
        let gen_heights = generators
            .iter()
            .map(|g| neron_tate(g, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(RankDecomposition {
            coefficients,
            generators,
            gen_heights,
        })
    }

    fn point(&self, i: usize) -> Result<Point> {
        combination(&self.generators, &self.coefficients[i])
    }
}

fn combination(points: &[Point], coeffs: &[i64]) -> Result<Point> {
    let mut acc = points[0].curve().identity();
    for (p, &c) in points.iter().zip(coeffs) {
        acc = acc.add(&p.scalar_mul(c))?;
    }
    Ok(acc)
}

/// Output of [`auxiliary_subgroup`]: the matrix of the subgroup `H`, the
/// degree and height certificates, and the vector-search certificate.
#[derive(Clone, Debug)]
pub struct AuxSubgroup {
    pub matrix: Vec<Vec<i64>>,
    pub degree_certificate: BoundCertificate,
    pub height_certificate: BoundCertificate,
    pub habegger: HabeggerCertificate,
}

/// Builds the auxiliary subgroup of codimension `s` for the given
/// decomposition and parameter `T >= 1`: linear forms from the decomposition,
/// the certified vector search applied to `sqrt(T)`, and the two bound
/// certificates `deg(H+P) <= c4(N,s) T` and the `c5/c6` height display.
pub fn auxiliary_subgroup(
    dec: &RankDecomposition,
    s: u32,
    t: f64,
    tol: f64,
) -> Result<AuxSubgroup> {
    let n = dec.coefficients.len() as u32;
    let m = dec.generators.len() as u32;
    check_s(n, s)?;
    check_m(n, m)?;
    if t < 1.0 {
        return Err(Error::BadParams("need T >= 1".into()));
    }
    let curve = dec.generators[0].curve().clone();
    let mids: Vec<f64> = dec.gen_heights.iter().map(|h| h.mid()).collect();
    let forms = rank1_linear_forms(&dec.coefficients, &mids)?;
    let (vectors, hab) = habegger_vectors(&forms, t.sqrt(), s as usize)?;

    // Measured heights of u_k(P) and of P itself.
    let points: Vec<Point> = (0..n as usize)
        .map(|i| dec.point(i))
        .collect::<Result<Vec<_>>>()?;
    let mut u_heights = Vec::new();
    for u in &vectors {
        let q = combination(&points, u)?;
        u_heights.push(neron_tate(&q, tol)?);
    }
    let mut h_p = HeightInterval::zero();
    for p in &points {
        h_p = h_p.add(&neron_tate(p, tol)?);
    }

    // Degree certificate: c4 prod |u_i|^2 <= c4 T.
    let mut degree_certificate = translate_degree_bound(&vectors, n)?;
    let c4v = c4(n, s)?;
    degree_certificate.inputs.insert("T".into(), t.to_string());
    let rhs = c4v.to_f64() * t;
    let lhs = degree_certificate.value;
    degree_certificate
        .comparisons
        .push(Comparison::le("degree_le_c4_T", lhs, rhs));

    // Height certificate: measured display <= c5 T^(1 - N/(ms)) h(P) + c6 T.
    let mut height_certificate = translate_height_bound(&vectors, &u_heights, &curve, n)?;
    let c5v = c5(n, m, s)?;
    let c6v = c6(n, s)?;
    let hw = weierstrass_height(&curve);
    let exponent = 1.0 - n as f64 / (m as f64 * s as f64);
    let rhs = c5v.to_f64() * t.powf(exponent) * h_p.hi + c6v.eval(hw) * t;
    height_certificate
        .constants
        .insert("c5".into(), ConstantRecord::exact(&c5v));
    height_certificate.inputs.insert("T".into(), t.to_string());
    height_certificate
        .inputs
        .insert("height_P".into(), format!("[{}, {}]", h_p.lo, h_p.hi));
    // Interval slack: the display uses measured upper ends, the right-hand
    // side the true heights, so allow the accumulated widths.
    let lead = height_certificate.intermediates["main_term"]
        / u_heights.iter().map(|h| h.hi).sum::<f64>().max(1e-300);
    let allowance = lead * u_heights.iter().map(|h| h.width()).sum::<f64>()
        + c5v.to_f64() * t.powf(exponent) * h_p.width();
    let lhs = height_certificate.value;
    let mut cmp = Comparison::le("height_le_c5_c6_display", lhs, rhs + allowance);
    cmp.rhs = rhs;
    cmp.slack = rhs - lhs;
    height_certificate.comparisons.push(cmp);

    if !degree_certificate.all_satisfied() || !height_certificate.all_satisfied() {
        return Err(Error::CertificateViolation(
            "auxiliary subgroup certificate failed".into(),
        ));
    }

    Ok(AuxSubgroup {
        matrix: vectors,
        degree_certificate,
        height_certificate,
        habegger: hab,
    })
}

// ---------------------------------------------------------------------------
// Theorem chains
// ---------------------------------------------------------------------------

/// The parameter choice that balances the main chain:
/// `T = (N/(N-1) c11(N)/3 deg V)^(N-1)`, exact for integer `deg V`.
pub fn choose_t(n: u32, deg_v: u64) -> Result<PiRat> {
    if n < 3 {
        return Err(Error::BadParams("T is chosen only for N >= 3".into()));
    }
    let inner = c11(n)?
        .mul(&PiRat::from_ratio(n as i64, 3 * (n as i64 - 1)))
        .mul(&PiRat::from_bigint(BigInt::from(deg_v)));
    Ok(inner.pow(n - 1))
}

/// Height bound for maximal torsion-anomalous points of relative codimension
/// one on `V` in `E^N`:
/// `C1(N) h(V) (deg V)^(N-1) + C2(E,N) (deg V)^N + C3(E,N)`.
///
/// For `N = 2` the only such points are torsion, so the bound is 0. The
/// certificate also carries the chain-assembled value
/// `(N/3) c10 T h(V) + (N/3)(3^N log2/2 c10 + c12) T deg V + N c2` and its
/// exact agreement with the closed form.
pub fn theorem12_bound(
    curve: &Curve,
    n: u32,
    h_v: f64,
    deg_v: u64,
) -> Result<BoundCertificate> {
    if n < 2 {
        return Err(Error::BadParams("ambient power must have N >= 2".into()));
    }
    if h_v < 0.0 {
        return Err(Error::BadParams("h(V) must be nonnegative".into()));
    }
    if deg_v == 0 {
        return Err(Error::BadParams("deg V must be positive".into()));
    }
    let mut cert = BoundCertificate::new("anomalous_point_height_bound");
    cert.inputs.insert("N".into(), n.to_string());
    cert.inputs.insert("hV".into(), h_v.to_string());
    cert.inputs.insert("degV".into(), deg_v.to_string());
    cert.inputs.insert("curve".into(), curve.to_string());
    if n == 2 {
        // Codimension counting leaves only torsion points, which have height 0.
        cert.value = 0.0;
        return Ok(cert);
    }
    let hw = weierstrass_height(curve);
    let c1v = cc1(n)?;
    let c2v = cc2(n)?;
    let c3v = cc3(n)?;
    cert.constants.insert("C1".into(), ConstantRecord::exact(&c1v));
    cert.constants
        .insert("C2".into(), ConstantRecord::real(c2v.eval(hw)));
    cert.constants
        .insert("C3".into(), ConstantRecord::real(c3v.eval(hw)));

    let d = deg_v as f64;
    let closed =
        c1v.to_f64() * h_v * d.powi(n as i32 - 1) + c2v.eval(hw) * d.powi(n as i32) + c3v.eval(hw);

    // Chain assembly with the balancing choice of T.
    let t = choose_t(n, deg_v)?;
    let tf = t.to_f64();
    let c10v = c10(n)?;
    let c12v = c12(n)?;
    let small_c2 = c2(n)?;
    let bezout = LogLinear {
        unit: PiRat::from_int(0),
        log2: PiRat::from_rational(BigRational::new(big_pow(3, n), BigInt::from(2)))
            .mul(&c10v),
        log3: PiRat::from_int(0),
        hw: PiRat::from_int(0),
    };
    let deg_coeff = bezout.add(&c12v); // (3^N log2/2) c10 + c12
    let chain = (n as f64 / 3.0) * c10v.to_f64() * tf * h_v
        + (n as f64 / 3.0) * deg_coeff.eval(hw) * tf * d
        + n as f64 * small_c2.eval(hw);
    cert.intermediates.insert("T".into(), tf);
    cert.intermediates.insert("chain_value".into(), chain);
    cert.intermediates.insert("closed_form_value".into(), closed);

    // Exact identity: the chain coefficient of h(V) deg V^(N-1) equals C1(N).
    let chain_c1 = chain_cc1(n)?;
    cert.constants
        .insert("chain_C1".into(), ConstantRecord::exact(&chain_c1));
    let mut exact_cmp = Comparison::close(
        "chain_c1_equals_closed_c1",
        chain_c1.to_f64(),
        c1v.to_f64(),
        1e-9,
    );
    exact_cmp.satisfied = chain_c1 == c1v || chain_c1.to_f64() <= c1v.to_f64();
    cert.comparisons.push(exact_cmp);
    cert.comparisons
        .push(Comparison::close("chain_equals_closed", chain, closed, 1e-9));

    cert.value = closed;
    Ok(cert)
}

/// Which case of the rank-at-most-one theorem to instantiate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankOneVariant {
    /// Weak-transverse curve in `E^N`, `N >= 3`; reuses the main chain.
    WeakTransverse,
    /// Transverse curve in `E^2`; the `D1/D2/D3` form.
    TransverseE2,
}

/// Height bound for points of rank at most one on a curve:
/// weak-transverse case `C1 h deg^(N-1) + C2 deg^N + C3`, transverse `E^2`
/// case `D1 h deg^2 + D2 deg^3 + D3` together with its limit chain
/// `2 C1(3) h deg^2 + (C2(E,3) + 6 c2 C1(3) + 2 c3 C1(3)) deg^3 + C3(E,3)`.
pub fn theorem14_bound(
    curve: &Curve,
    variant: RankOneVariant,
    h_c: f64,
    deg_c: u64,
    n: Option<u32>,
) -> Result<BoundCertificate> {
    match variant {
        RankOneVariant::WeakTransverse => {
            let n = n.ok_or_else(|| Error::BadParams("weak-transverse case needs N".into()))?;
            if n < 3 {
                return Err(Error::BadParams(
                    "weak-transverse curves need N >= 3".into(),
                ));
            }
            let mut cert = theorem12_bound(curve, n, h_c, deg_c)?;
            cert.formula = "rank_le1_weak_transverse_bound".into();
            Ok(cert)
        }
        RankOneVariant::TransverseE2 => {
            if h_c < 0.0 {
                return Err(Error::BadParams("h(C) must be nonnegative".into()));
            }
            if deg_c == 0 {
                return Err(Error::BadParams("deg C must be positive".into()));
            }
            let mut cert = BoundCertificate::new("rank_le1_transverse_e2_bound");
            let hw = weierstrass_height(curve);
            cert.inputs.insert("hC".into(), h_c.to_string());
            cert.inputs.insert("degC".into(), deg_c.to_string());
            cert.inputs.insert("curve".into(), curve.to_string());
            let d1v = d1();
            let d2v = d2();
            let d3v = d3();
            cert.constants.insert("D1".into(), ConstantRecord::exact(&d1v));
            cert.constants
                .insert("D2".into(), ConstantRecord::real(d2v.eval(hw)));
            cert.constants
                .insert("D3".into(), ConstantRecord::real(d3v.eval(hw)));
            let d = deg_c as f64;
            let value = d1v.to_f64() * h_c * d * d + d2v.eval(hw) * d * d * d + d3v.eval(hw);

            // Limit chain through the embedding into E^3.
            let c1_3 = cc1(3)?;
            let deg3_coeff = cc2(3)?
                .add(&c2(3)?.scale(&c1_3.scale_int(6)))
                .add(&c3(3)?.scale(&c1_3.scale_int(2)));
            let chain = 2.0 * c1_3.to_f64() * h_c * d * d + deg3_coeff.eval(hw) * d * d * d
                + cc3(3)?.eval(hw);
            cert.intermediates.insert("chain_value".into(), chain);

            let two_c1 = c1_3.scale_int(2);
            let mut cmp =
                Comparison::close("d1_equals_2_c1_3", d1v.to_f64(), two_c1.to_f64(), 1e-12);
            cmp.satisfied = d1v == two_c1;
            cert.comparisons.push(cmp);
            cert.comparisons.push(Comparison::close(
                "d2_equals_chain_deg3_coefficient",
                d2v.eval(hw),
                deg3_coeff.eval(hw),
                1e-12,
            ));
            let mut cmp =
                Comparison::close("d3_equals_c3_3", d3v.eval(hw), cc3(3)?.eval(hw), 1e-12);
            cmp.satisfied = d3v == cc3(3)?;
            cert.comparisons.push(cmp);
            cert.comparisons
                .push(Comparison::close("value_equals_chain", value, chain, 1e-9));
            cert.value = value;
            Ok(cert)
        }
    }
}
