//! Finite codebooks carved from a lattice basis, CSV export, and the exhaustive
//! minimum-determinant search with exact reduced-norm certificates.

use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball::{CBall, RBall};
use super::cmat::CMat;
use super::lattice::{LatticeBasis, Mode};
use super::{Result, StError};
use crate::exactfield::FieldElement;

pub const MAX_CODEBOOK: usize = 4096;
pub const MAX_SEARCH_POINTS: u64 = 20_000_000;

/// Allowed integer values of each real coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constellation {
    /// {-m, ..., m}
    Symmetric(i64),
    /// {-1, 1}: 4-QAM per complex coordinate
    Qam4,
    /// {-3, -1, 1, 3}
    Qam16,
}

impl Constellation {
    pub fn parse(s: &str) -> Option<Constellation> {
        match s {
            "qam4" => Some(Constellation::Qam4),
            "qam16" => Some(Constellation::Qam16),
            _ => {
                let m: i64 = s.strip_prefix("sym")?.trim_start_matches(':').parse().ok()?;
                (m >= 1).then_some(Constellation::Symmetric(m))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Constellation::Symmetric(m) => format!("sym{m}"),
            Constellation::Qam4 => "qam4".into(),
            Constellation::Qam16 => "qam16".into(),
        }
    }

    pub fn points(&self) -> Vec<i64> {
        match self {
            Constellation::Symmetric(m) => (-m..=*m).collect(),
            Constellation::Qam4 => vec![-1, 1],
            Constellation::Qam16 => vec![-3, -1, 1, 3],
        }
    }

    /// Sorted set of differences of two points.
    pub fn differences(&self) -> Vec<i64> {
        let p = self.points();
        let mut d: Vec<i64> = p.iter().flat_map(|a| p.iter().map(move |b| a - b)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

fn checked_pow(base: usize, k: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}

/// Coordinates of point `idx` in mixed radix over `set`, first coordinate fastest.
pub fn decode_index(mut idx: u64, set: &[i64], k: usize) -> Vec<i64> {
    let b = set.len() as u64;
    (0..k)
        .map(|_| {
            let d = set[(idx % b) as usize];
            idx /= b;
            d
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Codebook {
    pub basis: LatticeBasis,
    pub constellation: Constellation,
    points: Vec<i64>,
    len: usize,
}

impl Codebook {
    pub fn new(basis: LatticeBasis, constellation: Constellation) -> Result<Codebook> {
        let points = constellation.points();
        let k = basis.rank();
        let size = checked_pow(points.len(), k).unwrap_or(u128::MAX);
        if size > MAX_CODEBOOK as u128 {
            return Err(StError::TooLarge { what: "codebook", size, limit: MAX_CODEBOOK as u128 });
        }
        Ok(Codebook { basis, constellation, points, len: size as usize })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        decode_index(idx as u64, &self.points, self.basis.rank())
    }

    pub fn matrix(&self, idx: usize) -> CMat {
        self.basis.float_matrix(&self.coords(idx))
    }

    pub fn matrices(&self) -> Vec<CMat> {
        (0..self.len).map(|i| self.matrix(i)).collect()
    }

    pub fn exact_element(&self, idx: usize) -> Result<crate::cda::AlgebraElement> {
        self.basis.element(&self.coords(idx))
    }

    /// Mean of ||X||_F^2 under a uniform prior, from the Gram matrix of the basis.
    pub fn avg_energy(&self) -> f64 {
        let n = self.points.len() as f64;
        let m1 = self.points.iter().sum::<i64>() as f64 / n;
        let m2 = self.points.iter().map(|a| a * a).sum::<i64>() as f64 / n;
        let b = &self.basis.matrices;
        let mut acc = 0.0;
        for i in 0..b.len() {
            for j in 0..b.len() {
                let g = b[i].real_inner(&b[j]);
                acc += if i == j { m2 * g } else { m1 * m1 * g };
            }
        }
        acc
    }

    /// CSV with `# key=value` header lines, then index, coordinates and
    /// interleaved re/im entries in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let k = self.basis.rank();
        let n = self.basis.size;
        writeln!(w, "# setup={}", self.basis.setup)?;
        writeln!(w, "# mode={}", self.basis.mode.name())?;
        writeln!(w, "# size={n}")?;
        writeln!(w, "# rank={k}")?;
        writeln!(w, "# constellation={}", self.constellation.name())?;
        let pts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        writeln!(w, "# points={}", pts.join(" "))?;
        writeln!(w, "# codewords={}", self.len)?;
        writeln!(w, "# avg_energy={}", self.avg_energy())?;
        writeln!(w, "# prec={}", self.basis.prec)?;
        let mut head = vec!["index".to_string()];
        head.extend((0..k).map(|j| format!("a{j}")));
        for r in 0..n {
            for c in 0..n {
                head.push(format!("re_{r}_{c}"));
                head.push(format!("im_{r}_{c}"));
            }
        }
        writeln!(w, "{}", head.join(","))?;
        for idx in 0..self.len {
            let coords = self.coords(idx);
            let m = self.basis.float_matrix(&coords);
            let mut row = vec![idx.to_string()];
            row.extend(coords.iter().map(|a| a.to_string()));
            for z in &m.data {
                row.push(format!("{}", z.re));
                row.push(format!("{}", z.im));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Exact |Nm_{L/Q}(nr(c))| for integer coordinates, in i128 with a BigInt
/// fallback. Values are numerators over the fixed scale `scale`.
pub struct NormEvaluator {
    m: usize,
    n_r: usize,
    l_deg: usize,
    /// m*m*m numerators of monomial products
    table: Vec<i128>,
    /// per basis element, n_r*n_r entries of m numerators
    mats: Vec<Vec<Vec<i128>>>,
    pub scale: BigInt,
}

fn lcm_all<'a>(it: impl Iterator<Item = &'a BigInt>) -> BigInt {
    it.fold(BigInt::one(), |acc, d| acc.lcm(d))
}

fn to_i128_vec(x: &FieldElement, den: &BigInt) -> Result<Vec<i128>> {
    let f = den / x.denominator();
    x.numerators()
        .iter()
        .map(|v| (v * &f).to_i128().ok_or_else(|| StError::Invalid("coefficient too large".into())))
        .collect()
}

impl NormEvaluator {
    pub fn new(basis: &LatticeBasis) -> Result<NormEvaluator> {
        let alg = &basis.algebra;
        let e = alg.e();
        let m = e.abs_degree();
        let l_deg = alg.l().abs_degree();
        let n_r = alg.index();
        let mono: Vec<FieldElement> = (0..m)
            .map(|a| {
                let mut v = vec![BigInt::zero(); m];
                v[a] = BigInt::one();
                e.from_numerators(v, BigInt::one())
            })
            .collect::<std::result::Result<_, _>>()?;
        let mut prods = Vec::with_capacity(m * m);
        for a in &mono {
            for b in &mono {
                prods.push(e.mul(a, b)?);
            }
        }
        let t = lcm_all(prods.iter().map(|p| p.denominator()));
        let mut table = Vec::with_capacity(m * m * m);
        for p in &prods {
            table.extend(to_i128_vec(p, &t)?);
        }
        let reps = basis
            .elements
            .iter()
            .map(|b| alg.left_representation(b))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let d = lcm_all(reps.iter().flatten().flatten().map(|x| x.denominator()));
        let mats = reps
            .iter()
            .map(|r| r.iter().flatten().map(|x| to_i128_vec(x, &d)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        // det numerators are over d^n_r t^(n_r-1); the norm matrix adds one more t
        let q0 = d.pow(n_r as u32) * t.pow(n_r as u32 - 1);
        let scale = (q0 * &t).pow(l_deg as u32);
        Ok(NormEvaluator { m, n_r, l_deg, table, mats, scale })
    }

    fn mul(&self, x: &[i128], y: &[i128]) -> Option<Vec<i128>> {
        let m = self.m;
        let mut out = vec![0i128; m];
        for (a, &xa) in x.iter().enumerate() {
            if xa == 0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate() {
                if yb == 0 {
                    continue;
                }
                let s = xa.checked_mul(yb)?;
                let row = &self.table[(a * m + b) * m..(a * m + b + 1) * m];
                for (o, &tc) in out.iter_mut().zip(row) {
                    if tc != 0 {
                        *o = o.checked_add(s.checked_mul(tc)?)?;
                    }
                }
            }
        }
        Some(out)
    }

    fn det(&self, x: &[Vec<i128>], rows: &[usize], cols: &[usize]) -> Option<Vec<i128>> {
        if rows.len() == 1 {
            return Some(x[rows[0] * self.n_r + cols[0]].clone());
        }
        let r0 = rows[0];
        let mut acc = vec![0i128; self.m];
        for (j, &c) in cols.iter().enumerate() {
            let entry = &x[r0 * self.n_r + c];
            if entry.iter().all(|v| *v == 0) {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
            let minor = self.det(x, &rows[1..], &rest)?;
            let p = self.mul(entry, &minor)?;
            for (a, v) in acc.iter_mut().zip(p) {
                *a = if j % 2 == 0 { a.checked_add(v)? } else { a.checked_sub(v)? };
            }
        }
        Some(acc)
    }

    /// Numerator of nr(c) (coordinates of E, zero beyond L).
    fn reduced_norm(&self, coords: &[i64]) -> Option<Vec<i128>> {
        let n2 = self.n_r * self.n_r;
        let mut x = vec![vec![0i128; self.m]; n2];
        for (a, mat) in coords.iter().zip(&self.mats) {
            if *a == 0 {
                continue;
            }
            let a = *a as i128;
            for (xe, me) in x.iter_mut().zip(mat) {
                for (v, w) in xe.iter_mut().zip(me) {
                    *v = v.checked_add(a.checked_mul(*w)?)?;
                }
            }
        }
        let idx: Vec<usize> = (0..self.n_r).collect();
        self.det(&x, &idx, &idx)
    }

    fn norm_matrix(&self, v: &[i128]) -> Option<Vec<Vec<i128>>> {
        let (m, l) = (self.m, self.l_deg);
        let mut out = vec![vec![0i128; l]; l];
        // column a holds v * mono_a
        for a in 0..l {
            for (b, &vb) in v.iter().enumerate().take(l) {
                if vb == 0 {
                    continue;
                }
                let t = &self.table[(a * m + b) * m..(a * m + b) * m + l];
                for (c, &tc) in t.iter().enumerate() {
                    if tc != 0 {
                        out[c][a] = out[c][a].checked_add(vb.checked_mul(tc)?)?;
                    }
                }
            }
        }
        Some(out)
    }

    /// |Nm_{L/Q}(nr(c))| * scale, or None on i128 overflow.
    pub fn abs_norm_fast(&self, coords: &[i64]) -> Option<i128> {
        let v = self.reduced_norm(coords)?;
        debug_assert!(v[self.l_deg..].iter().all(|x| *x == 0));
        bareiss_i128(self.norm_matrix(&v)?)?.checked_abs()
    }

    /// Same as `abs_norm_fast` with a BigInt fallback.
    pub fn abs_norm(&self, basis: &LatticeBasis, coords: &[i64]) -> Result<BigInt> {
        if let Some(v) = self.abs_norm_fast(coords) {
            return Ok(BigInt::from(v));
        }
        let alg = &basis.algebra;
        let c = basis.element(coords)?;
        let nr = alg.reduced_norm(&c)?;
        let nm = alg.l().absolute_norm(&nr)?.abs() * BigRational::from_integer(self.scale.clone());
        if !nm.is_integer() {
            return Err(StError::Invalid("norm scale is not a common denominator".into()));
        }
        Ok(nm.to_integer())
    }
}

/// Fraction-free determinant; None on overflow or a vanishing column.
fn bareiss_i128(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let n = a.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let p = (k + 1..n).find(|&r| a[r][k] != 0)?;
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
        }
        prev = a[k][k];
    }
    Some(sign * a[n - 1][n - 1])
}

/// Ball enclosure of |det X|^2 for X = sum a_j B_j, by cofactor expansion.
pub fn ball_abs2_det(basis: &LatticeBasis, coords: &[i64]) -> RBall {
    let n = basis.size;
    let prec = basis.prec;
    let mut x = vec![CBall::zero(prec); n * n];
    for (a, bs) in coords.iter().zip(&basis.balls) {
        if *a == 0 {
            continue;
        }
        let a = BigInt::from(*a);
        for (xe, be) in x.iter_mut().zip(bs) {
            *xe = xe.add(&be.scale_int(&a));
        }
    }
    fn cof(x: &[CBall], n: usize, rows: &[usize], cols: &[usize]) -> CBall {
        if rows.len() == 1 {
            return x[rows[0] * n + cols[0]].clone();
        }
        let mut acc = CBall::zero(x[0].prec());
        for (j, &c) in cols.iter().enumerate() {
            let e = &x[rows[0] * n + c];
            if e.abs_upper_raw().is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
            let t = e.mul(&cof(x, n, &rows[1..], &rest));
            acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    cof(&x, n, &idx, &idx).abs2()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinDetReport {
    pub setup: String,
    pub mode: Mode,
    pub coordinate_set: Vec<i64>,
    /// nonzero lattice points searched
    pub points: u64,
    /// points whose exact reduced norm vanishes
    pub zero_norm_points: u64,
    /// exact min |Nm_{L/Q}(nr)| over nonzero points
    pub min_abs_norm: String,
    pub min_norm_coords: Vec<i64>,
    /// min |det X|^2 in floating point
    pub delta_min_float: f64,
    pub delta_coords: Vec<i64>,
    /// exact Delta_min, when every determinant is a full conjugate product
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_min_exact: Option<String>,
    /// worst relative gap between float |det|^2 and the exact value
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_float_exact_rel_err: Option<f64>,
}

/// |det X|^2 as an exact rational when the basis determinant is
/// N_{L/F}(nr) (block mode, or L = F): |Nm_{L/Q}|^(2/[F:Q]).
pub fn exact_abs2(basis: &LatticeBasis, abs_norm: &BigRational) -> Option<BigRational> {
    let full = basis.mode == Mode::Block || basis.algebra.l().abs_degree() == basis.algebra.centre().abs_degree();
    if !full {
        return None;
    }
    match basis.centre_degree {
        1 => Some(abs_norm * abs_norm),
        2 => Some(abs_norm.clone()),
        _ => None,
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
    let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
    n / d
}

struct Acc {
    points: u64,
    zeros: u64,
    min_norm: Option<(BigInt, u64)>,
    min_delta: Option<(f64, u64)>,
    max_err: f64,
}

impl Acc {
    fn empty() -> Acc {
        Acc { points: 0, zeros: 0, min_norm: None, min_delta: None, max_err: 0.0 }
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.points += o.points;
        self.zeros += o.zeros;
        self.max_err = self.max_err.max(o.max_err);
        if let Some(b) = o.min_norm {
            if self.min_norm.as_ref().is_none_or(|a| (&b.0, b.1) < (&a.0, a.1)) {
                self.min_norm = Some(b);
            }
        }
        if let Some(b) = o.min_delta {
            if self.min_delta.is_none_or(|a| b.0 < a.0 || (b.0 == a.0 && b.1 < a.1)) {
                self.min_delta = Some(b);
            }
        }
        self
    }
}

/// Exhaustive search over nonzero points sum a_j B_j with every a_j in `set`.
/// Results do not depend on the thread count.
pub fn min_determinant(basis: &LatticeBasis, set: &[i64]) -> Result<MinDetReport> {
    if set.is_empty() || basis.rank() == 0 {
        return Err(StError::Empty);
    }
    let k = basis.rank();
    let total = checked_pow(set.len(), k).unwrap_or(u128::MAX);
    if total > MAX_SEARCH_POINTS as u128 {
        return Err(StError::TooLarge { what: "search space", size: total, limit: MAX_SEARCH_POINTS as u128 });
    }
    let total = total as u64;
    let eval = NormEvaluator::new(basis)?;
    let scale = BigRational::from_integer(eval.scale.clone());
    let chunk = 4096u64;
    let chunks = total.div_ceil(chunk);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|ci| -> Result<Acc> {
            let mut acc = Acc::empty();
            for idx in ci * chunk..((ci + 1) * chunk).min(total) {
                let coords = decode_index(idx, set, k);
                if coords.iter().all(|a| *a == 0) {
                    continue;
                }
                acc.points += 1;
                let nm = eval.abs_norm(basis, &coords)?;
                let fl = basis.float_matrix(&coords).det().norm_sqr();
                if nm.is_zero() {
                    acc.zeros += 1;
                } else if let Some(ex) = exact_abs2(basis, &(BigRational::from_integer(nm.clone()) / &scale)) {
                    let ex = ratio_f64(&ex);
                    acc.max_err = acc.max_err.max(((fl - ex) / ex).abs());
                }
                if acc.min_norm.as_ref().is_none_or(|(v, _)| nm < *v) {
                    acc.min_norm = Some((nm, idx));
                }
                if acc.min_delta.is_none_or(|(v, _)| fl < v) {
                    acc.min_delta = Some((fl, idx));
                }
            }
            Ok(acc)
        })
        .try_reduce(Acc::empty, |a, b| Ok(a.merge(b)))?;
    let (nm, ni) = acc.min_norm.ok_or(StError::Empty)?;
    let (dm, di) = acc.min_delta.ok_or(StError::Empty)?;
    let min_abs = BigRational::from_integer(nm) / &scale;
    let exact = exact_abs2(basis, &min_abs);
    Ok(MinDetReport {
        setup: basis.setup.clone(),
        mode: basis.mode,
        coordinate_set: set.to_vec(),
        points: acc.points,
        zero_norm_points: acc.zeros,
        min_abs_norm: crate::exactfield::rational_to_string(&min_abs),
        min_norm_coords: decode_index(ni, set, k),
        delta_min_float: dm,
        delta_coords: decode_index(di, set, k),
        delta_min_exact: exact.as_ref().map(crate::exactfield::rational_to_string),
        max_float_exact_rel_err: exact.map(|_| acc.max_err),
    })
}
