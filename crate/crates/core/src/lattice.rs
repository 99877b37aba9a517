//! Exact integer-lattice toolkit.
//!
//! Successive minima are produced by certified ball enumeration: an LLL pass
//! only preconditions the basis, the returned minima always come from
//! exhaustive enumeration with exact integer norms.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::numeric::big_ratio_to_f64;
use crate::{bounds, Error, Result};

/// Default cap on the number of coefficient tuples visited by enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 50_000_000;

// ---------------------------------------------------------------------------
// Small exact linear algebra helpers
// ---------------------------------------------------------------------------

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(v: &[BigInt]) -> BigInt {
    dot(v, v)
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn int_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = val;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Rank of an integer matrix via exact rational elimination.
pub(crate) fn int_rank(m: &[Vec<BigInt>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut rows: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|e| BigRational::from_integer(e.clone())).collect())
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows.len()).find(|&i| !rows[i][col].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            if rows[i][col].is_zero() {
                continue;
            }
            let factor = &rows[i][col] / &rows[rank][col];
            for j in col..cols {
                let v = &rows[i][j] - &factor * &rows[rank][j];
                rows[i][j] = v;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn gram_matrix(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|a| rows.iter().map(|b| dot(a, b)).collect())
        .collect()
}

pub(crate) fn gram_det(rows: &[Vec<BigInt>]) -> BigInt {
    int_det(&gram_matrix(rows))
}

// ---------------------------------------------------------------------------
// IntegerMatrix and adjugate
// ---------------------------------------------------------------------------

/// An integer matrix with its computed rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: Vec<Vec<BigInt>>,
    rank: usize,
}

impl IntegerMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<IntegerMatrix> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::BadParams("empty matrix".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::BadParams("ragged matrix rows".into()));
        }
        let rank = int_rank(&rows);
        Ok(IntegerMatrix { rows, rank })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<IntegerMatrix> {
        IntegerMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&e| BigInt::from(e)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn det(&self) -> Result<BigInt> {
        if self.n_rows() != self.n_cols() {
            return Err(Error::NotSquare {
                rows: self.n_rows(),
                cols: self.n_cols(),
            });
        }
        Ok(int_det(&self.rows))
    }

    /// Adjugate (transposed cofactor matrix): `M * adj(M) = det(M) * Id`.
    pub fn adjugate(&self) -> Result<IntegerMatrix> {
        let n = self.n_rows();
        if n != self.n_cols() {
            return Err(Error::NotSquare {
                rows: n,
                cols: self.n_cols(),
            });
        }
        let mut adj = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<Vec<BigInt>> = (0..n)
                    .filter(|&r| r != i)
                    .map(|r| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(|c| self.rows[r][c].clone())
                            .collect()
                    })
                    .collect();
                let cof = int_det(&minor);
                adj[j][i] = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        IntegerMatrix::new(adj)
    }
}

// ---------------------------------------------------------------------------
// LLL preconditioning
// ---------------------------------------------------------------------------

fn round_rational(r: &BigRational) -> BigInt {
    // Nearest integer, ties away from zero are fine for size reduction.
    let two = BigInt::from(2);
    let num = r.numer() * &two + r.denom();
    num.div_floor(&(r.denom() * two))
}

fn gram_schmidt(basis: &[Vec<BigInt>]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = basis.len();
    let dim = basis[0].len();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut star_sq = vec![BigRational::zero(); n];
    for (i, row) in basis.iter().enumerate() {
        let mut v: Vec<BigRational> = row
            .iter()
            .map(|e| BigRational::from_integer(e.clone()))
            .collect();
        for j in 0..i {
            if star_sq[j].is_zero() {
                continue;
            }
            let mut proj = BigRational::zero();
            for (k, e) in row.iter().enumerate() {
                proj += BigRational::from_integer(e.clone()) * &star[j][k];
            }
            let m = proj / &star_sq[j];
            for k in 0..dim {
                let t = &v[k] - &m * &star[j][k];
                v[k] = t;
            }
            mu[i][j] = m;
        }
        star_sq[i] = v.iter().map(|e| e * e).sum();
        star.push(v);
    }
    (mu, star_sq)
}

/// In-place LLL reduction (delta = 3/4) over exact rationals. Used only to
/// precondition enumeration; results never feed certificates directly.
pub(crate) fn lll_reduce(basis: &mut Vec<Vec<BigInt>>) {
    let n = basis.len();
    if n <= 1 {
        return;
    }
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut k = 1;
    let mut guard = 0u32;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "LLL failed to terminate");
        let (mu, star_sq) = gram_schmidt(basis);
        // Size-reduce basis[k] against all previous vectors.
        let mut changed = false;
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let q = round_rational(&mu[k][j]);
                let prev = basis[j].clone();
                for (e, p) in basis[k].iter_mut().zip(&prev) {
                    *e -= &q * p;
                }
                changed = true;
            }
        }
        let (mu, star_sq) = if changed {
            gram_schmidt(basis)
        } else {
            (mu, star_sq)
        };
        let lhs = &star_sq[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &star_sq[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative());
    n.sqrt()
}

/// All nonzero lattice vectors with squared norm `<= r_sq`, one per `{v,-v}`
/// pair (first nonzero coordinate positive), sorted by (norm^2, coordinates).
fn enumerate_ball(
    basis: &[Vec<BigInt>],
    r_sq: &BigInt,
    budget: u64,
) -> Result<Vec<(BigInt, Vec<BigInt>)>> {
    let r = basis.len();
    let dim = basis[0].len();
    let gram = gram_matrix(basis);
    let det = int_det(&gram);
    assert!(det.is_positive(), "enumeration needs independent rows");
    let gm = IntegerMatrix::new(gram).expect("gram is well-formed");
    let adj = gm.adjugate().expect("square");
    // |c_i| <= sqrt(r_sq * adj_ii / det): exact integer bound.
    let mut bounds_c = Vec::with_capacity(r);
    let mut volume: u64 = 1;
    for i in 0..r {
        let v = (r_sq * &adj.rows()[i][i]).div_floor(&det);
        let b = isqrt(&v.max(BigInt::zero()));
        let b_u = b.to_u64().ok_or(Error::BudgetExceeded {
            examined: u64::MAX,
            budget,
        })?;
        volume = volume.saturating_mul(2 * b_u + 1);
        bounds_c.push(b_u as i64);
    }
    if volume > budget {
        return Err(Error::BudgetExceeded {
            examined: volume,
            budget,
        });
    }

    let mut out: Vec<(BigInt, Vec<BigInt>)> = Vec::new();
    let mut coeff = vec![0i64; r];
    let mut partial: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); dim]; r + 1];

    fn rec(
        level: usize,
        r: usize,
        bounds_c: &[i64],
        coeff: &mut [i64],
        basis: &[Vec<BigInt>],
        partial: &mut Vec<Vec<BigInt>>,
        r_sq: &BigInt,
        out: &mut Vec<(BigInt, Vec<BigInt>)>,
        leading_zero: bool,
    ) {
        if level == r {
            if leading_zero {
                return; // the zero vector
            }
            let v = partial[r].clone();
            let ns = norm_sq(&v);
            if ns.is_zero() || &ns > r_sq {
                return;
            }
            let canonical = match v.iter().find(|e| !e.is_zero()) {
                Some(first) if first.is_negative() => v.iter().map(|e| -e).collect(),
                _ => v,
            };
            out.push((ns, canonical));
            return;
        }
        // Restrict the first free coefficient to >= 0: -v is recorded anyway.
        let lo = if leading_zero { 0 } else { -bounds_c[level] };
        for c in lo..=bounds_c[level] {
            coeff[level] = c;
            let (head, tail) = partial.split_at_mut(level + 1);
            let prev = &head[level];
            let next = &mut tail[0];
            for k in 0..prev.len() {
                next[k] = &prev[k] + c * &basis[level][k];
            }
            rec(
                level + 1,
                r,
                bounds_c,
                coeff,
                basis,
                partial,
                r_sq,
                out,
                leading_zero && c == 0,
            );
        }
    }

    rec(
        0,
        r,
        &bounds_c,
        &mut coeff,
        basis,
        &mut partial,
        r_sq,
        &mut out,
        true,
    );
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out.dedup_by(|a, b| a.1 == b.1);
    Ok(out)
}

// ---------------------------------------------------------------------------
// IntegerLattice
// ---------------------------------------------------------------------------

/// Successive minima with achieving vectors; all norms exact squared integers.
#[derive(Clone, Debug)]
pub struct MinimaData {
    pub norms_sq: Vec<BigInt>,
    pub lambdas: Vec<f64>,
    pub vectors: Vec<Vec<BigInt>>,
}

/// A sublattice of `Z^n` generated by independent basis rows, with exact
/// cached determinant data and enumeration-backed successive minima.
#[derive(Debug)]
pub struct IntegerLattice {
    basis: Vec<Vec<BigInt>>,
    gram_det: BigInt,
    minima: OnceLock<MinimaData>,
}

impl IntegerLattice {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<IntegerLattice> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::BadParams("empty basis".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::BadParams("ragged basis rows".into()));
        }
        if rows.len() > cols {
            return Err(Error::BadParams("more rows than ambient dimension".into()));
        }
        let gd = gram_det(&rows);
        if !gd.is_positive() {
            return Err(Error::BadParams("basis rows are linearly dependent".into()));
        }
        Ok(IntegerLattice {
            basis: rows,
            gram_det: gd,
            minima: OnceLock::new(),
        })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<IntegerLattice> {
        IntegerLattice::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&e| BigInt::from(e)).collect())
                .collect(),
        )
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis[0].len()
    }

    /// Exact `det(B B^t)`; the lattice determinant is its square root.
    pub fn gram_det(&self) -> &BigInt {
        &self.gram_det
    }

    /// `det(Lambda) = sqrt(det(B B^t))` as a float.
    pub fn det(&self) -> f64 {
        big_ratio_to_f64(&BigRational::from_integer(self.gram_det.clone())).sqrt()
    }

    /// Exact successive minima via ball enumeration. The LLL pass only chooses
    /// the enumeration radius; the minima come from the exhaustive sweep.
    pub fn successive_minima(&self) -> Result<&MinimaData> {
        if let Some(d) = self.minima.get() {
            return Ok(d);
        }
        let data = self.compute_minima(DEFAULT_ENUMERATION_BUDGET)?;
        Ok(self.minima.get_or_init(|| data))
    }

    fn compute_minima(&self, budget: u64) -> Result<MinimaData> {
        let r = self.rank();
        if r > 6 {
            return Err(Error::BadParams(
                "exact enumeration supports rank <= 6".into(),
            ));
        }
        let mut reduced = self.basis.clone();
        lll_reduce(&mut reduced);
        // lambda_r <= max |b_i| over any basis, so this radius is certified.
        let r_sq = reduced
            .iter()
            .map(|row| norm_sq(row))
            .max()
            .expect("nonempty");
        let candidates = enumerate_ball(&reduced, &r_sq, budget)?;

        let mut vectors: Vec<Vec<BigInt>> = Vec::with_capacity(r);
        let mut norms_sq = Vec::with_capacity(r);
        for (ns, v) in candidates {
            if vectors.is_empty() || int_rank(&with_row(&vectors, &v)) > vectors.len() {
                norms_sq.push(ns);
                vectors.push(v);
                if vectors.len() == r {
                    break;
                }
            }
        }
        assert_eq!(vectors.len(), r, "radius certified to contain r minima");
        let lambdas = norms_sq
            .iter()
            .map(|n| big_ratio_to_f64(&BigRational::from_integer(n.clone())).sqrt())
            .collect();
        Ok(MinimaData {
            norms_sq,
            lambdas,
            vectors,
        })
    }

    /// The orthogonal lattice `{x in Z^n : x . v = 0 for all v in self}`,
    /// with basis reduced so it achieves the successive minima whenever the
    /// minima vectors generate (always at these ranks in practice).
    pub fn orthogonal_lattice(&self) -> Result<IntegerLattice> {
        if self.rank() >= self.ambient_dim() {
            return Err(Error::BadParams(
                "orthogonal lattice needs rank < ambient dimension".into(),
            ));
        }
        let kernel = integer_kernel(&self.basis, self.ambient_dim());
        assert_eq!(kernel.len(), self.ambient_dim() - self.rank());
        let lat = IntegerLattice::from_rows(kernel)?;
        let minima = lat.successive_minima()?.clone();
        // Use the minima vectors as the basis when they generate the lattice
        // (index 1 <=> equal Gram determinants).
        if gram_det(&minima.vectors) == lat.gram_det {
            let replaced = IntegerLattice {
                basis: minima.vectors.clone(),
                gram_det: lat.gram_det.clone(),
                minima: OnceLock::new(),
            };
            let _ = replaced.minima.set(minima);
            Ok(replaced)
        } else {
            Ok(lat)
        }
    }

    /// Minkowski's second theorem as a checkable certificate:
    /// `2^r/r! det <= omega_r * prod(lambda_i) <= 2^r det`.
    pub fn minkowski_certificate(&self) -> Result<MinkowskiCertificate> {
        let minima = self.successive_minima()?;
        let r = self.rank();
        let det = self.det();
        let mut factorial = 1f64;
        for i in 1..=r {
            factorial *= i as f64;
        }
        let two_r = 2f64.powi(r as i32);
        let lower = two_r / factorial * det;
        let upper = two_r * det;
        let omega = bounds::omega(r as u32).to_f64();
        let middle = omega * minima.lambdas.iter().product::<f64>();
        let cert = MinkowskiCertificate {
            rank: r,
            det,
            lambdas: minima.lambdas.clone(),
            lower,
            middle,
            upper,
            slack_lower: middle - lower,
            slack_upper: upper - middle,
        };
        let eps = 1e-9 * (1.0 + upper.abs());
        if cert.slack_lower < -eps || cert.slack_upper < -eps {
            return Err(Error::CertificateViolation(format!(
                "Minkowski bounds failed: {} <= {} <= {}",
                lower, middle, upper
            )));
        }
        Ok(cert)
    }
}

fn with_row(rows: &[Vec<BigInt>], extra: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut m = rows.to_vec();
    m.push(extra.to_vec());
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct MinkowskiCertificate {
    pub rank: usize,
    pub det: f64,
    pub lambdas: Vec<f64>,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
}

/// Basis of `{x in Z^n : rows . x = 0}` via unimodular row reduction of the
/// transposed matrix augmented with the identity.
fn integer_kernel(rows: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let r = rows.len();
    let mut work: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigInt> = (0..r).map(|j| rows[j][i].clone()).collect();
            for k in 0..n {
                row.push(if k == i { BigInt::one() } else { BigInt::zero() });
            }
            row
        })
        .collect();
    let mut pivot = 0usize;
    for col in 0..r {
        loop {
            let mut best: Option<usize> = None;
            for (i, row) in work.iter().enumerate().skip(pivot) {
                if !row[col].is_zero()
                    && best.is_none_or(|b| row[col].abs() < work[b][col].abs())
                {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            work.swap(pivot, b);
            let mut cleared = true;
            for i in pivot + 1..n {
                if work[i][col].is_zero() {
                    continue;
                }
                let q = &work[i][col] / &work[pivot][col];
                if !q.is_zero() {
                    let pivot_row = work[pivot].clone();
                    for (e, p) in work[i].iter_mut().zip(&pivot_row) {
                        *e -= &q * p;
                    }
                }
                if !work[i][col].is_zero() {
                    cleared = false;
                }
            }
            if cleared {
                pivot += 1;
                break;
            }
        }
    }
    work[pivot..]
        .iter()
        .map(|row| row[r..].to_vec())
        .collect()
}

// ---------------------------------------------------------------------------
// Linear-form system and the certified vector search
// ---------------------------------------------------------------------------

/// A family of real linear forms `L_1..L_m` in `N` variables with every
/// coefficient-vector norm at most 1, built from a coefficient matrix and
/// generator heights.
#[derive(Clone, Debug)]
pub struct LinearFormSystem {
    forms: Vec<Vec<f64>>,
    n_vars: usize,
    c16: f64,
}

impl LinearFormSystem {
    pub fn forms(&self) -> &[Vec<f64>] {
        &self.forms
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_forms(&self) -> usize {
        self.forms.len()
    }

    /// The combination constant `c16(N, m) = m^3 (m!)^4 N / 4^(m-1)`.
    pub fn c16(&self) -> f64 {
        self.c16
    }

    pub fn eval(&self, j: usize, t: &[i64]) -> f64 {
        self.forms[j]
            .iter()
            .zip(t)
            .map(|(c, &ti)| c * ti as f64)
            .sum()
    }

    pub fn norm(&self, j: usize) -> f64 {
        self.forms[j].iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Builds the norm-bounded linear forms attached to a rank-`m` decomposition:
/// given the integer coefficient matrix `v` (N rows, m columns) and positive
/// generator heights, form `L_j = sqrt(h_j / (N A)) (v_1j X_1 + ... + v_Nj X_N)`
/// with `A = max |v_ij|^2 h_j`.
pub fn rank1_linear_forms(
    coefficients: &[Vec<i64>],
    gen_heights: &[f64],
) -> Result<LinearFormSystem> {
    let n = coefficients.len();
    let m = gen_heights.len();
    if n == 0 || m == 0 {
        return Err(Error::BadParams("empty decomposition".into()));
    }
    if coefficients.iter().any(|row| row.len() != m) {
        return Err(Error::BadParams(
            "coefficient matrix must have one column per generator".into(),
        ));
    }
    if gen_heights.iter().any(|&h| h <= 0.0) {
        return Err(Error::BadParams("generator heights must be positive".into()));
    }
    let mut a_max = 0f64;
    for row in coefficients {
        for (j, &v) in row.iter().enumerate() {
            a_max = a_max.max((v as f64) * (v as f64) * gen_heights[j]);
        }
    }
    if a_max == 0.0 {
        return Err(Error::AllTorsion);
    }
    let forms: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let scale = (gen_heights[j] / (n as f64 * a_max)).sqrt();
            coefficients.iter().map(|row| scale * row[j] as f64).collect()
        })
        .collect();
    let system = LinearFormSystem {
        forms,
        n_vars: n,
        c16: bounds::c16(n as u32, m as u32).to_f64(),
    };
    for j in 0..m {
        assert!(
            system.norm(j) <= 1.0 + 1e-12,
            "construction keeps |L_j| <= 1"
        );
    }
    Ok(system)
}

#[derive(Clone, Debug, Serialize)]
pub struct HabeggerInequality {
    pub form: usize,
    pub vector: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Certificate for the vector tuple returned by [`habegger_vectors`]: every
/// inequality is recorded with both sides evaluated.
#[derive(Clone, Debug, Serialize)]
pub struct HabeggerCertificate {
    pub t: f64,
    pub s: usize,
    pub exponent: f64,
    pub c17: f64,
    pub norm_product: f64,
    pub norm_product_bound: f64,
    pub inequalities: Vec<HabeggerInequality>,
}

/// Finds linearly independent `u_1..u_s` in `Z^N` with `|u_1|...|u_s| <= T`
/// and, for every form `L_j` and every `k`,
/// `|u_1|...|u_s| |L_j(u_k)| / |u_k| <= c17(N, m) T^(1 - N/(m s))`.
///
/// The search enumerates primitive vectors by increasing norm (ties broken
/// lexicographically) and returns the first independent tuple meeting all
/// inequalities; any valid tuple lies inside `|u| <= T`, so exhausting the
/// radius without success signals a bug.
pub fn habegger_vectors(
    forms: &LinearFormSystem,
    t: f64,
    s: usize,
) -> Result<(Vec<Vec<i64>>, HabeggerCertificate)> {
    let n = forms.n_vars();
    let m = forms.n_forms();
    if n > 4 {
        return Err(Error::BadParams(
            "enumeration backend supports N <= 4".into(),
        ));
    }
    if s == 0 || s > n {
        return Err(Error::BadParams("need 1 <= s <= N".into()));
    }
    if t < 1.0 {
        return Err(Error::BadParams("need T >= 1".into()));
    }
    let exponent = 1.0 - (n as f64) / ((m * s) as f64);
    let c17 = bounds::c17(n as u32, m as u32);
    let rhs = c17 * t.powf(exponent);
    let t_sq = t * t * (1.0 + 1e-12);

    let candidates = primitive_vectors_sorted(n, t);
    let mut chosen: Vec<usize> = Vec::with_capacity(s);

    fn independent(candidates: &[(i64, Vec<i64>)], chosen: &[usize], next: usize) -> bool {
        let mut rows: Vec<Vec<i128>> = chosen
            .iter()
            .chain(std::iter::once(&next))
            .map(|&i| candidates[i].1.iter().map(|&e| e as i128).collect())
            .collect();
        rank_i128(&mut rows) == chosen.len() + 1
    }

    fn dfs(
        candidates: &[(i64, Vec<i64>)],
        forms: &LinearFormSystem,
        s: usize,
        t_sq: f64,
        rhs: f64,
        start: usize,
        prod_sq: f64,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if chosen.len() == s {
            let prod: f64 = chosen
                .iter()
                .map(|&i| (candidates[i].0 as f64).sqrt())
                .product();
            for k in chosen.iter() {
                let norm_k = (candidates[*k].0 as f64).sqrt();
                for j in 0..forms.n_forms() {
                    let lhs = prod * forms.eval(j, &candidates[*k].1).abs() / norm_k;
                    if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
                        return false;
                    }
                }
            }
            return true;
        }
        for i in start..candidates.len() {
            let next_prod = prod_sq * candidates[i].0 as f64;
            if next_prod > t_sq {
                break; // sorted by norm: everything further is larger
            }
            if !independent(candidates, chosen, i) {
                continue;
            }
            chosen.push(i);
            if dfs(candidates, forms, s, t_sq, rhs, i + 1, next_prod, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    if !dfs(&candidates, forms, s, t_sq, rhs, 0, 1.0, &mut chosen) {
        return Err(Error::SearchExhausted(format!(
            "no independent {s}-tuple with norm product <= {t} satisfies the bound {rhs}"
        )));
    }

    let vectors: Vec<Vec<i64>> = chosen.iter().map(|&i| candidates[i].1.clone()).collect();
    let norm_product: f64 = chosen
        .iter()
        .map(|&i| (candidates[i].0 as f64).sqrt())
        .product();
    let mut inequalities = Vec::new();
    for (k, &ci) in chosen.iter().enumerate() {
        let norm_k = (candidates[ci].0 as f64).sqrt();
        for j in 0..m {
            let lhs = norm_product * forms.eval(j, &candidates[ci].1).abs() / norm_k;
            inequalities.push(HabeggerInequality {
                form: j,
                vector: k,
                lhs,
                rhs,
                slack: rhs - lhs,
            });
        }
    }
    let cert = HabeggerCertificate {
        t,
        s,
        exponent,
        c17,
        norm_product,
        norm_product_bound: t,
        inequalities,
    };
    Ok((vectors, cert))
}

/// Primitive integer vectors with norm <= t, one per sign class, sorted by
/// (squared norm, lexicographic coordinates).
fn primitive_vectors_sorted(n: usize, t: f64) -> Vec<(i64, Vec<i64>)> {
    let rad = t.floor() as i64;
    let limit_sq = (t * t * (1.0 + 1e-12)).floor() as i64;
    let mut out: Vec<(i64, Vec<i64>)> = Vec::new();
    let mut v = vec![0i64; n];
    fn rec(
        level: usize,
        n: usize,
        rad: i64,
        limit_sq: i64,
        partial_sq: i64,
        leading_zero: bool,
        v: &mut Vec<i64>,
        out: &mut Vec<(i64, Vec<i64>)>,
    ) {
        if level == n {
            if leading_zero {
                return;
            }
            let g = v.iter().fold(0i64, |acc, &e| gcd_i64(acc, e.abs()));
            if g == 1 {
                out.push((partial_sq, v.clone()));
            }
            return;
        }
        let lo = if leading_zero { 0 } else { -rad };
        for c in lo..=rad {
            let nsq = partial_sq + c * c;
            if nsq > limit_sq {
                continue;
            }
            v[level] = c;
            rec(level + 1, n, rad, limit_sq, nsq, leading_zero && c == 0, v, out);
        }
        v[level] = 0;
    }
    rec(0, n, rad, limit_sq, 0, true, &mut v, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd_i64(b, a % b)
    }
}

fn rank_i128(rows: &mut Vec<Vec<i128>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            if rows[i][col] == 0 {
                continue;
            }
            // Fraction-free elimination; magnitudes stay tiny at these sizes.
            let (a, b) = (rows[rank][col], rows[i][col]);
            for j in 0..cols {
                rows[i][j] = rows[i][j] * a - rows[rank][j] * b;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(rows: &[Vec<i64>]) -> IntegerLattice {
        IntegerLattice::from_i64(rows).unwrap()
    }

    #[test]
    fn minima_of_standard_and_scaled_bases() {
        let z2 = lat(&[vec![1, 0], vec![0, 1]]);
        let m = z2.successive_minima().unwrap();
        assert_eq!(m.norms_sq, vec![BigInt::from(1), BigInt::from(1)]);

        let scaled = lat(&[vec![2, 0], vec![0, 3]]);
        let m = scaled.successive_minima().unwrap();
        assert_eq!(m.norms_sq, vec![BigInt::from(4), BigInt::from(9)]);
        assert_eq!(m.lambdas, vec![2.0, 3.0]);
    }

    #[test]
    fn minima_of_skew_basis() {
        let l = lat(&[vec![1, 1], vec![1, -1]]);
        let m = l.successive_minima().unwrap();
        assert_eq!(m.norms_sq, vec![BigInt::from(2), BigInt::from(2)]);
        assert!((l.det() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn determinants() {
        assert!((lat(&[vec![1, 0], vec![0, 1]]).det() - 1.0).abs() < 1e-12);
        assert!((lat(&[vec![3, 4]]).det() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_lattice_examples() {
        let l = lat(&[vec![1, 1, 1]]);
        let perp = l.orthogonal_lattice().unwrap();
        assert_eq!(perp.rank(), 2);
        assert_eq!(*perp.gram_det(), BigInt::from(3));
        for row in perp.basis() {
            assert!(dot(row, &[BigInt::one(), BigInt::one(), BigInt::one()]).is_zero());
        }

        let l = lat(&[vec![1, 0]]);
        let perp = l.orthogonal_lattice().unwrap();
        assert_eq!(perp.basis(), &[vec![BigInt::zero(), BigInt::one()]]);

        let l = lat(&[vec![1, 0, 0], vec![0, 1, 0]]);
        let perp = l.orthogonal_lattice().unwrap();
        assert_eq!(
            perp.basis(),
            &[vec![BigInt::zero(), BigInt::zero(), BigInt::one()]]
        );
    }

    #[test]
    fn adjugate_closed_forms() {
        let id = IntegerMatrix::from_i64(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(id.adjugate().unwrap(), id);

        let m = IntegerMatrix::from_i64(&[vec![2, 3], vec![5, 7]]).unwrap();
        let adj = m.adjugate().unwrap();
        assert_eq!(
            adj.rows(),
            &[
                vec![BigInt::from(7), BigInt::from(-3)],
                vec![BigInt::from(-5), BigInt::from(2)]
            ]
        );
        let not_square = IntegerMatrix::from_i64(&[vec![1, 2, 3]]).unwrap();
        assert!(matches!(
            not_square.adjugate(),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn adjugate_identity_on_random_matrix() {
        let m =
            IntegerMatrix::from_i64(&[vec![3, -1, 4], vec![1, 5, -9], vec![2, 6, 5]]).unwrap();
        let adj = m.adjugate().unwrap();
        let det = m.det().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let prod: BigInt = (0..3).map(|k| &m.rows()[i][k] * &adj.rows()[k][j]).sum();
                let expect = if i == j { det.clone() } else { BigInt::zero() };
                assert_eq!(prod, expect);
            }
        }
    }

    #[test]
    fn minkowski_certificates() {
        let z1 = lat(&[vec![1]]);
        let c = z1.minkowski_certificate().unwrap();
        assert!((c.lower - 2.0).abs() < 1e-12);
        assert!((c.middle - 2.0).abs() < 1e-12);
        assert!((c.upper - 2.0).abs() < 1e-12);

        let z2 = lat(&[vec![1, 0], vec![0, 1]]);
        let c = z2.minkowski_certificate().unwrap();
        assert!((c.lower - 2.0).abs() < 1e-12);
        assert!((c.middle - std::f64::consts::PI).abs() < 1e-12);
        assert!((c.upper - 4.0).abs() < 1e-12);

        let skew = lat(&[vec![1, 1], vec![1, -1]]);
        let c = skew.minkowski_certificate().unwrap();
        assert!((c.lower - 4.0).abs() < 1e-12);
        assert!((c.middle - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((c.upper - 8.0).abs() < 1e-12);
    }

    #[test]
    fn linear_forms_from_decomposition() {
        // N=2, m=1, v=(1,2), h(g)=1/4: A=1, L1 = sqrt(1/8)(X1+2X2).
        let sys = rank1_linear_forms(&[vec![1], vec![2]], &[0.25]).unwrap();
        let s = (1f64 / 8.0).sqrt();
        assert!((sys.forms()[0][0] - s).abs() < 1e-15);
        assert!((sys.forms()[0][1] - 2.0 * s).abs() < 1e-15);
        assert!((sys.norm(0) - (5f64 / 8.0).sqrt()).abs() < 1e-15);

        // N=3, m=1, v=(1,0,0): L1 = X1/sqrt(3).
        let sys = rank1_linear_forms(&[vec![1], vec![0], vec![0]], &[0.3]).unwrap();
        assert!((sys.forms()[0][0] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(sys.forms()[0][1], 0.0);
        // c16(3,1) = 3.
        assert!((sys.c16() - 3.0).abs() < 1e-15);

        assert!(matches!(
            rank1_linear_forms(&[vec![0], vec![0]], &[0.25]),
            Err(Error::AllTorsion)
        ));
    }

    #[test]
    fn habegger_simple_cases() {
        // L1 with coefficients (1,0), T=1, s=1: u1=(0,1) annihilates the form.
        let sys = rank1_linear_forms(&[vec![1], vec![0]], &[1.0]).unwrap();
        let (v, cert) = habegger_vectors(&sys, 1.0, 1).unwrap();
        assert_eq!(v, vec![vec![0, 1]]);
        assert!(cert.inequalities.iter().all(|i| i.slack >= 0.0));

        // Two independent vectors with norm product <= 4.
        let (v, cert) = habegger_vectors(&sys, 4.0, 2).unwrap();
        assert_eq!(v.len(), 2);
        assert!(cert.norm_product <= 4.0 + 1e-9);
        let mut rows: Vec<Vec<i128>> = v
            .iter()
            .map(|r| r.iter().map(|&e| e as i128).collect())
            .collect();
        assert_eq!(rank_i128(&mut rows), 2);
    }

    #[test]
    fn kernel_is_saturated() {
        // ker (2, 4) in Z^2 is generated by (2, -1), not (4, -2).
        let l = lat(&[vec![2, 4]]);
        let perp = l.orthogonal_lattice().unwrap();
        assert_eq!(*perp.gram_det(), BigInt::from(5));
    }

    #[test]
    fn budget_guard_trips() {
        // Very unbalanced minima force a large coefficient box for the first
        // basis vector.
        let rows: Vec<Vec<i64>> = (0..6)
            .map(|i| {
                let mut r = vec![0i64; 6];
                r[i] = if i == 0 { 1 } else { 100 };
                r
            })
            .collect();
        let l = lat(&rows);
        assert!(matches!(
            l.compute_minima(1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
