//! Lattice bases from the natural order, Gram matrix and volume, normalized
//! metrics, and the exact block-determinant identity.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball::{CBall, RBall};
use super::cmat::CMat;
use super::codebook::{min_determinant, Constellation, MAX_SEARCH_POINTS};
use super::embed::Embedding;
use super::{Result, StError};
use crate::catalog::{BaseField, Setup};
use crate::cda::{build_algebra, discriminant_formula, AlgebraElement, CyclicAlgebra};
use crate::exactfield::{linalg, Automorphism, FieldElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Symmetric,
    Block,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "symmetric" => Some(Mode::Symmetric),
            "block" | "block-diagonal" => Some(Mode::Block),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Symmetric => "symmetric",
            Mode::Block => "block",
        }
    }
}

/// Z-basis of the natural order together with its matrices.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    pub setup: String,
    pub mode: Mode,
    /// matrix size
    pub size: usize,
    /// number of tau-twisted blocks on the diagonal
    pub blocks: usize,
    /// block mode requested with a single block
    pub degenerate_block: bool,
    pub centre_degree: usize,
    pub prec: u32,
    pub algebra: CyclicAlgebra,
    pub elements: Vec<AlgebraElement>,
    pub exact: Vec<Vec<Vec<FieldElement>>>,
    pub balls: Vec<Vec<CBall>>,
    pub matrices: Vec<CMat>,
    taus: Vec<Automorphism>,
}

impl LatticeBasis {
    /// real rank k
    pub fn rank(&self) -> usize {
        self.elements.len()
    }

    /// Exact matrix of an algebra element in this basis's mode.
    pub fn exact_matrix(&self, c: &AlgebraElement) -> Result<Vec<Vec<FieldElement>>> {
        matrix_of(&self.algebra, &self.taus, self.size, c)
    }

    /// Element sum_j a_j b_j for integer coordinates.
    pub fn element(&self, coords: &[i64]) -> Result<AlgebraElement> {
        if coords.len() != self.rank() {
            return Err(StError::Invalid(format!("expected {} coordinates, got {}", self.rank(), coords.len())));
        }
        let f = self.algebra.centre();
        let cs: Vec<FieldElement> = coords.iter().map(|&a| f.from_int(a)).collect();
        Ok(self.algebra.combine(&self.elements, &cs)?)
    }

    /// Float matrix sum_j a_j B_j.
    pub fn float_matrix(&self, coords: &[i64]) -> CMat {
        let mut m = CMat::zeros(self.size, self.size);
        for (a, b) in coords.iter().zip(&self.matrices) {
            if *a != 0 {
                m.axpy(*a as f64, b);
            }
        }
        m
    }
}

fn matrix_of(alg: &CyclicAlgebra, taus: &[Automorphism], size: usize, c: &AlgebraElement) -> Result<Vec<Vec<FieldElement>>> {
    let rho = alg.left_representation(c)?;
    let nr = alg.index();
    let e = alg.e();
    let mut m = vec![vec![e.zero(); size]; size];
    for (t, tau) in taus.iter().enumerate() {
        for i in 0..nr {
            for j in 0..nr {
                m[t * nr + i][t * nr + j] = tau.apply(&rho[i][j]);
            }
        }
    }
    Ok(m)
}

/// O_F-basis of the natural order, doubled by i when the centre is Q(i).
pub fn z_basis(setup: &Setup, alg: &CyclicAlgebra) -> Result<Vec<AlgebraElement>> {
    let ob = alg.natural_order_basis()?;
    match setup.base {
        BaseField::Q => Ok(ob),
        BaseField::Qi => {
            let i = setup.f.generator(1);
            let mut out = Vec::with_capacity(2 * ob.len());
            for b in ob {
                let ib = alg.combine(std::slice::from_ref(&b), std::slice::from_ref(&i))?;
                out.push(b);
                out.push(ib);
            }
            Ok(out)
        }
    }
}

pub fn lattice_basis(setup: &Setup, mode: Mode, prec: u32) -> Result<LatticeBasis> {
    let alg = build_algebra(setup)?;
    let emb = Embedding::new(&setup.e, prec)?;
    let elements = z_basis(setup, &alg)?;
    let blocks = match mode {
        Mode::Symmetric => 1,
        Mode::Block => setup.n,
    };
    let taus = (0..blocks)
        .map(|t| setup.e.automorphism_pow(&setup.tau, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let size = blocks * setup.n_r;
    let exact = elements
        .iter()
        .map(|b| matrix_of(&alg, &taus, size, b))
        .collect::<Result<Vec<_>>>()?;
    let balls = exact
        .par_iter()
        .map(|m| m.iter().flatten().map(|x| emb.embed(x)).collect::<Result<Vec<CBall>>>())
        .collect::<Result<Vec<_>>>()?;
    let matrices = balls
        .iter()
        .map(|bs| CMat { rows: size, cols: size, data: bs.iter().map(|b| b.mid()).collect() })
        .collect();
    Ok(LatticeBasis {
        setup: setup.id.clone(),
        mode,
        size,
        blocks,
        degenerate_block: mode == Mode::Block && setup.n == 1,
        centre_degree: setup.base.degree(),
        prec,
        algebra: alg,
        elements,
        exact,
        balls,
        matrices,
        taus,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramVolume {
    pub k: usize,
    pub gram: Vec<Vec<f64>>,
    /// largest entry radius
    pub gram_radius: f64,
    pub det: f64,
    pub det_radius: f64,
    pub ln_det: f64,
    pub nu: f64,
    pub nu_radius: f64,
    pub ln_nu: f64,
    /// smallest elimination pivot, certified positive
    pub min_pivot: f64,
}

/// Gram matrix Re Tr(B_a B_b^H) in ball arithmetic; positive definiteness is
/// certified by strictly positive elimination pivots.
pub fn gram_and_volume(basis: &LatticeBasis) -> Result<GramVolume> {
    gram_from_balls(&basis.balls)
}

/// Ball enclosures of det(Gram) and nu = sqrt(det(Gram)).
#[derive(Clone, Debug)]
pub struct VolumeBalls {
    pub gram: Vec<Vec<RBall>>,
    pub det: RBall,
    pub nu: RBall,
    pub min_pivot: f64,
}

pub fn volume_balls(balls: &[Vec<CBall>]) -> Result<VolumeBalls> {
    let k = balls.len();
    if k == 0 {
        return Err(StError::Empty);
    }
    let dim = 2 * balls[0].len();
    if k > dim {
        return Err(StError::RankExceedsDimension { k, dim });
    }
    let prec = balls[0][0].prec();
    let rows: Vec<Vec<RBall>> = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| {
                    let mut acc = RBall::zero(prec);
                    for (x, y) in balls[a].iter().zip(&balls[b]) {
                        acc = acc.add(&x.re.mul(&y.re)).add(&x.im.mul(&y.im));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut a = rows.clone();
    let mut det = RBall::from_int(&1.into(), prec);
    let mut min_pivot = f64::INFINITY;
    for c in 0..k {
        let piv = a[c][c].clone();
        if !piv.is_positive() {
            return Err(StError::Singular { index: c });
        }
        min_pivot = min_pivot.min(piv.mid());
        det = det.mul(&piv);
        let pivot_row = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            let f = row[c].div(&piv).ok_or(StError::Singular { index: c })?;
            for s in c + 1..k {
                row[s] = row[s].sub(&f.mul(&pivot_row[s]));
            }
        }
    }
    let nu = det.sqrt().ok_or(StError::ZeroVolume)?;
    Ok(VolumeBalls { gram: rows, det, nu, min_pivot })
}

pub fn gram_from_balls(balls: &[Vec<CBall>]) -> Result<GramVolume> {
    let v = volume_balls(balls)?;
    Ok(GramVolume {
        k: balls.len(),
        gram: v.gram.iter().map(|r| r.iter().map(|x| x.mid()).collect()).collect(),
        gram_radius: v.gram.iter().flatten().map(|x| x.radius()).fold(0.0, f64::max),
        det: v.det.mid(),
        det_radius: v.det.radius(),
        ln_det: v.det.ln_mid(),
        nu: v.nu.mid(),
        nu_radius: v.nu.radius(),
        ln_nu: v.nu.ln_mid(),
        min_pivot: v.min_pivot,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMetrics {
    pub n: usize,
    pub k: usize,
    pub delta_min: f64,
    pub nu: f64,
    /// Delta / nu^(n/k)
    pub delta: f64,
    /// Delta^(k/n) / nu
    pub mu: f64,
    pub mu_pow: f64,
    pub identity_rel_error: f64,
}

/// Normalized minimum determinant and density from Delta and ln(nu).
pub fn normalized_metrics(n: usize, k: usize, delta_min: f64, ln_nu: f64) -> Result<NormalizedMetrics> {
    if !ln_nu.is_finite() || n == 0 || k == 0 {
        return Err(StError::ZeroVolume);
    }
    if !(delta_min > 0.0) {
        return Err(StError::Invalid(format!("minimum determinant {delta_min} is not positive")));
    }
    let r = n as f64 / k as f64;
    let ln_d = delta_min.ln();
    let delta = (ln_d - r * ln_nu).exp();
    let ln_mu = ln_d / r - ln_nu;
    let mu = ln_mu.exp();
    let mu_pow = mu.powf(r);
    Ok(NormalizedMetrics {
        n,
        k,
        delta_min,
        nu: ln_nu.exp(),
        delta,
        mu,
        mu_pow,
        identity_rel_error: ((delta - mu_pow) / delta).abs(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeMetrics {
    pub mode: Mode,
    pub size: usize,
    pub k: usize,
    pub degenerate_block: bool,
    pub gram_det: f64,
    pub gram_det_radius: f64,
    pub nu: f64,
    pub nu_radius: f64,
    pub min_gram_pivot: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_min: Option<f64>,
    /// "integral" (exact), "search-upper-bound" or "none"
    pub delta_min_certificate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<NormalizedMetrics>,
    /// nu / |disc(O_nat/O_F)|_C
    pub disc_ratio: f64,
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Metrics of the natural-order lattice in the given mode. Delta_min is exact
/// when every determinant lies in O_F (block mode, or L = F); otherwise a
/// search over coordinates in {-1,0,1} gives an upper bound when small enough.
pub fn lattice_metrics(setup: &Setup, mode: Mode, prec: u32) -> Result<LatticeMetrics> {
    let basis = lattice_basis(setup, mode, prec)?;
    let gv = gram_and_volume(&basis)?;
    let k = basis.rank();
    let (delta_min, cert) = if mode == Mode::Block || setup.n == 1 {
        (Some(1.0), "integral")
    } else if 3f64.powi(k as i32) <= MAX_SEARCH_POINTS as f64 {
        let r = min_determinant(&basis, &Constellation::Symmetric(1).differences())?;
        (Some(r.delta_min_float), "search-upper-bound")
    } else {
        (None, "none")
    };
    let normalized = delta_min.map(|d| normalized_metrics(basis.size, k, d, gv.ln_nu)).transpose()?;
    let disc = discriminant_formula(setup)?;
    let ln_disc_c = ln_biguint(&disc.value()) / setup.base.degree() as f64;
    Ok(LatticeMetrics {
        mode,
        size: basis.size,
        k,
        degenerate_block: basis.degenerate_block,
        gram_det: gv.det,
        gram_det_radius: gv.det_radius,
        nu: gv.nu,
        nu_radius: gv.nu_radius,
        min_gram_pivot: gv.min_pivot,
        delta_min,
        delta_min_certificate: cert.to_string(),
        normalized,
        disc_ratio: (gv.ln_nu - ln_disc_c).exp(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockIdentity {
    /// determinant of the block matrix, coordinates in F
    pub block_det: Vec<String>,
    pub reduced_norm: Vec<String>,
    /// N_{L/F}(nr(c)), coordinates in F
    pub relative_norm: Vec<String>,
    pub equals_conjugate_product: bool,
    pub equals_relative_norm: bool,
    pub in_ring_of_integers: bool,
    /// |det|^2 of the embedded block matrix
    pub float_abs2: f64,
}

impl BlockIdentity {
    pub fn holds(&self) -> bool {
        self.equals_conjugate_product && self.equals_relative_norm && self.in_ring_of_integers
    }
}

/// det diag(rho(c), tau rho(c), ...) against prod tau^i(nr(c)) and N_{L/F}(nr(c)), exactly.
pub fn block_determinant_identity(basis: &LatticeBasis, c: &AlgebraElement) -> Result<BlockIdentity> {
    if basis.mode != Mode::Block {
        return Err(StError::Invalid("block identity needs a block-mode basis".into()));
    }
    let alg = &basis.algebra;
    let (e, l, f) = (alg.e(), alg.l(), alg.centre());
    let m = basis.exact_matrix(c)?;
    let emb = Embedding::new(e, 64)?;
    let fm = CMat {
        rows: basis.size,
        cols: basis.size,
        data: m.iter().flatten().map(|x| emb.embed_f64(x)).collect::<Result<Vec<Complex64>>>()?,
    };
    let det = linalg::determinant(e, m)?;
    let nr = alg.reduced_norm(c)?;
    let nr_e = e.lift(&nr)?;
    let mut prod = e.one();
    for tau in &basis.taus {
        prod = e.mul(&prod, &tau.apply(&nr_e))?;
    }
    let rel = l.relative_norm(f, &nr)?;
    let rel_e = e.lift(&rel)?;
    let det_f = e.project(&det, f).ok();
    Ok(BlockIdentity {
        block_det: det_f.as_ref().map(|d| d.to_strings()).unwrap_or_default(),
        reduced_norm: nr.to_strings(),
        relative_norm: rel.to_strings(),
        equals_conjugate_product: det == prod,
        equals_relative_norm: det == rel_e,
        in_ring_of_integers: det_f.is_some() && f.is_integral(&rel)?,
        float_abs2: fm.det().norm_sqr(),
    })
}
