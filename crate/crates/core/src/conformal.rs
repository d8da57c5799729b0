//! Homothetic projections, equivalence of horizontal frames, and the
//! commutation analyzer for polynomial maps between nilpotent groups.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Metric;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{scalar_ratio, span_rank, Matrix, Rational};
use crate::operators::{Cometric, CoordinateGroup, DifferentialOperator};
use crate::poly::{PolyMap, PolyMatrix, Polynomial};

/// Linear map between two inner-product spaces, written in the bases in
/// which the two Gram matrices are given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    matrix: Matrix,
}

/// The factor found by each of the five equivalent characterizations of a
/// homothetic projection; `None` where the characterization fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Characterizations {
    pub transpose_embedding: Option<Rational>,
    pub kernel_projection: Option<Rational>,
    pub scalar_llt: Option<Rational>,
    pub kernel_isometry: Option<Rational>,
    pub dual_embedding: Option<Rational>,
}

impl Characterizations {
    pub fn all(&self) -> [&Option<Rational>; 5] {
        [
            &self.transpose_embedding,
            &self.kernel_projection,
            &self.scalar_llt,
            &self.kernel_isometry,
            &self.dual_embedding,
        ]
    }

    pub fn agree(&self) -> bool {
        let a = self.all();
        a.iter().all(|x| *x == a[0])
    }
}

fn positive(c: Option<Rational>) -> Option<Rational> {
    c.filter(|c| c.is_positive())
}

impl LinearMap {
    pub fn new(matrix: Matrix) -> Self {
        LinearMap { matrix }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn check(&self, gv: &Metric, gw: &Metric) -> Result<()> {
        check_dim(self.source_dim(), gv.dim())?;
        check_dim(self.target_dim(), gw.dim())
    }

    /// Matrix of the metric transpose `L^T: W -> V`.
    pub fn transpose(&self, gv: &Metric, gw: &Metric) -> Result<Matrix> {
        self.check(gv, gw)?;
        let gv_inv = gv.gram().inverse()?;
        Ok(&(&gv_inv * &self.matrix.transpose()) * gw.gram())
    }

    /// `lambda^2` when `L L^T = lambda^2 Id_W`, otherwise `None`.
    pub fn homothetic_factor(&self, gv: &Metric, gw: &Metric) -> Result<Option<Rational>> {
        let lt = self.transpose(gv, gw)?;
        let llt = &self.matrix * &lt;
        Ok(positive(scalar_ratio(
            &llt,
            &Matrix::identity(self.target_dim()),
        )))
    }

    /// `<L^T w1, L^T w2>_V = c <w1, w2>_W`.
    pub fn via_transpose_embedding(&self, gv: &Metric, gw: &Metric) -> Result<Option<Rational>> {
        let lt = self.transpose(gv, gw)?;
        let gram = &(&lt.transpose() * gv.gram()) * &lt;
        Ok(positive(scalar_ratio(&gram, gw.gram())))
    }

    /// `L` surjective and `L^T L = c * pi`, with `pi` the orthogonal
    /// projection onto the orthogonal complement of the kernel.
    pub fn via_kernel_projection(&self, gv: &Metric, gw: &Metric) -> Result<Option<Rational>> {
        let lt = self.transpose(gv, gw)?;
        if self.matrix.rank() < self.target_dim() {
            return Ok(None);
        }
        let inner = (&self.matrix * &lt).inverse()?;
        let pi = &(&lt * &inner) * &self.matrix;
        let ltl = &lt * &self.matrix;
        Ok(positive(scalar_ratio(&ltl, &pi)))
    }

    /// `L L^T = c Id_W`.
    pub fn via_scalar_llt(&self, gv: &Metric, gw: &Metric) -> Result<Option<Rational>> {
        self.homothetic_factor(gv, gw)
    }

    /// `v -> L v / sqrt(c)` is an isometry from the orthogonal complement of
    /// the kernel onto `W`.
    pub fn via_kernel_isometry(&self, gv: &Metric, gw: &Metric) -> Result<Option<Rational>> {
        self.check(gv, gw)?;
        let kernel = self.matrix.null_space();
        let complement = if kernel.is_empty() {
            Matrix::identity(self.source_dim())
        } else {
            let k = Matrix::from_columns(&kernel)?;
            let constraints = &k.transpose() * gv.gram();
            Matrix::from_columns(&constraints.null_space())?
        };
        if complement.ncols() != self.target_dim() {
            return Ok(None);
        }
        let image = &self.matrix * &complement;
        let lhs = &(&image.transpose() * gw.gram()) * &image;
        let rhs = &(&complement.transpose() * gv.gram()) * &complement;
        Ok(positive(scalar_ratio(&lhs, &rhs)))
    }

    /// The adjoint `L*: W* -> V*` is a homothetic embedding for the dual
    /// inner products.
    pub fn via_dual_embedding(&self, gv: &Metric, gw: &Metric) -> Result<Option<Rational>> {
        self.check(gv, gw)?;
        let gv_inv = gv.gram().inverse()?;
        let gw_inv = gw.gram().inverse()?;
        let gram = &(&self.matrix * &gv_inv) * &self.matrix.transpose();
        Ok(positive(scalar_ratio(&gram, &gw_inv)))
    }

    pub fn characterizations(&self, gv: &Metric, gw: &Metric) -> Result<Characterizations> {
        Ok(Characterizations {
            transpose_embedding: self.via_transpose_embedding(gv, gw)?,
            kernel_projection: self.via_kernel_projection(gv, gw)?,
            scalar_llt: self.via_scalar_llt(gv, gw)?,
            kernel_isometry: self.via_kernel_isometry(gv, gw)?,
            dual_embedding: self.via_dual_embedding(gv, gw)?,
        })
    }
}

/// `lambda^2` if `L` is a homothetic projection of factor `lambda`.
pub fn is_homothetic_projection(
    l: &LinearMap,
    gv: &Metric,
    gw: &Metric,
) -> Result<Option<Rational>> {
    l.homothetic_factor(gv, gw)
}

/// Outcome of comparing two horizontal frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameEquivalence {
    pub equivalent: bool,
    /// `Y_i = sum_j A[i][j] X_j`; orthogonal when the frames are equivalent.
    pub change_of_frame: Matrix,
}

impl FrameEquivalence {
    pub fn witness(&self) -> Option<&Matrix> {
        self.equivalent.then_some(&self.change_of_frame)
    }
}

/// Decides whether two frames of the same subspace are orthonormal for a
/// common scalar product, i.e. whether `sum X_i X_i^T = sum Y_i Y_i^T`.
pub fn frames_equivalent(x: &[Vec<Rational>], y: &[Vec<Rational>]) -> Result<FrameEquivalence> {
    let (Some(first), false) = (x.first(), y.is_empty()) else {
        return Err(Error::Invalid("empty frame".into()));
    };
    let dim = first.len();
    for v in x.iter().chain(y) {
        check_dim(dim, v.len())?;
    }
    if span_rank(x) != x.len() {
        return Err(Error::LinearlyDependent("first frame".into()));
    }
    if span_rank(y) != y.len() {
        return Err(Error::LinearlyDependent("second frame".into()));
    }
    let joint: Vec<Vec<Rational>> = x.iter().chain(y).cloned().collect();
    if x.len() != y.len() || span_rank(&joint) != x.len() {
        return Err(Error::DifferentSubspaces);
    }
    let xm = Matrix::from_columns(x)?;
    let ym = Matrix::from_columns(y)?;
    let gram_inv = (&xm.transpose() * &xm).inverse()?;
    let a = &(&ym.transpose() * &xm) * &gram_inv;
    let same = Cometric::of_frame(dim, x)? == Cometric::of_frame(dim, y)?;
    let orthogonal = &a * &a.transpose() == Matrix::identity(x.len());
    debug_assert_eq!(same, orthogonal);
    Ok(FrameEquivalence {
        equivalent: same && orthogonal,
        change_of_frame: a,
    })
}

/// A nonzero polynomial certifying a failed identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub label: String,
    pub polynomial: Polynomial,
}

impl Residual {
    fn new(label: impl Into<String>, polynomial: Polynomial) -> Self {
        Residual {
            label: label.into(),
            polynomial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub contact: bool,
    pub conformal: bool,
    pub lambda_sq: Option<Polynomial>,
    pub b: Option<Vec<Polynomial>>,
    pub residuals: Vec<Residual>,
}

impl CommutationReport {
    pub fn verdict(&self) -> &'static str {
        match (self.contact, self.conformal) {
            (_, true) => "conformal",
            (true, false) => "contact, not conformal",
            (false, false) => "not contact",
        }
    }
}

/// Rows spanning the annihilator of the target polarization.
fn annihilator(h: &CoordinateGroup) -> Result<Matrix> {
    let b = h.group().polarization().matrix();
    let rows = b.transpose().null_space();
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, h.dim()));
    }
    Matrix::from_rows(rows)
}

fn contact_residuals(
    df: &PolyMatrix,
    g: &CoordinateGroup,
    h: &CoordinateGroup,
) -> Result<Vec<Residual>> {
    let k = annihilator(h)?;
    let bg = g.group().polarization().matrix();
    let vertical = PolyMatrix::from_rational(&k).mul(&df.mul_rational(&bg));
    Ok(vertical
        .entries()
        .filter(|(_, _, p)| !p.is_zero())
        .map(|(i, j, p)| {
            Residual::new(
                format!(
                    "vertical component {} of DF applied to horizontal vector {}",
                    i + 1,
                    j + 1
                ),
                p.clone(),
            )
        })
        .collect())
}

/// `lambda^2` read off `C = lambda^2 q_H` at the first nonzero entry of
/// `q_H` in row-major order, with the entries where the identity fails.
fn conformal_factor(c: &PolyMatrix, q_h: &Matrix) -> (Polynomial, Vec<Residual>) {
    let n = q_h.nrows();
    let pivot = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .find(|&(a, b)| !q_h[(a, b)].is_zero());
    let lambda_sq = match pivot {
        Some((a, b)) => c.get(a, b).scale(&q_h[(a, b)].recip()),
        None => Polynomial::zero(),
    };
    let target = if lambda_sq.is_zero() {
        // a degenerate differential is never conformal; compare against q_H
        Polynomial::one()
    } else {
        lambda_sq.clone()
    };
    let diff = c.sub_scaled(&target, q_h);
    let residuals = diff
        .entries()
        .filter(|(_, _, p)| !p.is_zero())
        .map(|(a, b, p)| {
            Residual::new(
                format!("C - lambda^2 q_H at ({}, {})", a + 1, b + 1),
                p.clone(),
            )
        })
        .collect();
    (lambda_sq, residuals)
}

/// Polynomial probes on the target: monomials up to `degree` and squares of
/// the linear forms `x_i + x_j`, `x_i - x_j`.
pub fn probes(dim: usize, degree: u32) -> Vec<Polynomial> {
    let mut out = Polynomial::monomials_up_to(dim, degree);
    for i in 0..dim {
        for j in i + 1..dim {
            let s = &Polynomial::var(i) + &Polynomial::var(j);
            let d = &Polynomial::var(i) - &Polynomial::var(j);
            out.push(s.pow(2));
            out.push(d.pow(2));
        }
    }
    out
}

/// Checks `Δ_G(u∘F) = λ²(Δ_H u)∘F + Du[b]∘F` on every probe and returns the
/// nonzero residuals.
fn identity_residuals(
    f: &PolyMap,
    g: &CoordinateGroup,
    h: &CoordinateGroup,
    lambda_sq: &Polynomial,
    b: &[Polynomial],
    probe_degree: u32,
) -> Vec<Residual> {
    let lap_g: DifferentialOperator = g.sublaplacian();
    let lap_h: DifferentialOperator = h.sublaplacian();
    let comps = f.components();
    probes(h.dim(), probe_degree)
        .par_iter()
        .filter_map(|u| {
            let lhs = lap_g.apply(&u.compose(comps));
            let mut rhs = lambda_sq * &lap_h.apply(u).compose(comps);
            for (a, ba) in b.iter().enumerate() {
                if !ba.is_zero() {
                    rhs += &(ba * &h.chart().apply_basis_field(a, u).compose(comps));
                }
            }
            let r = lhs - rhs;
            (!r.is_zero()).then(|| Residual::new(format!("identity on probe {u}"), r))
        })
        .collect()
}

fn check_map(f: &PolyMap, g: &CoordinateGroup, h: &CoordinateGroup) -> Result<()> {
    check_dim(g.dim(), f.source_dim())?;
    check_dim(h.dim(), f.target_dim())
}

fn check_probe_degree(probe_degree: usize) -> Result<u32> {
    if probe_degree < 2 {
        return Err(Error::ProbeDegree(probe_degree));
    }
    u32::try_from(probe_degree).map_err(|_| Error::ProbeDegree(probe_degree))
}

/// Decides whether `F` is a conformal submersion and, if so, computes the
/// factor `lambda^2` and the first-order vector `b`, cross-checking the
/// commutation identity on polynomial probes.
pub fn analyze_commutation(
    f: &PolyMap,
    g: &CoordinateGroup,
    h: &CoordinateGroup,
    probe_degree: usize,
) -> Result<CommutationReport> {
    let degree = check_probe_degree(probe_degree)?;
    check_map(f, g, h)?;
    let df = g.lie_differential(f, h)?;
    let contact = contact_residuals(&df, g, h)?;
    if !contact.is_empty() {
        return Ok(CommutationReport {
            contact: false,
            conformal: false,
            lambda_sq: None,
            b: None,
            residuals: contact,
        });
    }
    let pullback = g.pullback_operator(f, h)?;
    let (lambda_sq, symbol) = conformal_factor(&pullback.p2, h.cometric().matrix());
    if !symbol.is_empty() {
        return Ok(CommutationReport {
            contact: true,
            conformal: false,
            lambda_sq: None,
            b: None,
            residuals: symbol,
        });
    }
    let b = first_order_vector(&pullback.p1, &lambda_sq, h);
    let residuals = identity_residuals(f, g, h, &lambda_sq, &b, degree);
    let conformal = residuals.is_empty();
    Ok(CommutationReport {
        contact: true,
        conformal,
        lambda_sq: Some(lambda_sq),
        b: Some(b),
        residuals,
    })
}

fn first_order_vector(
    p1: &[Polynomial],
    lambda_sq: &Polynomial,
    h: &CoordinateGroup,
) -> Vec<Polynomial> {
    let drift = h.modular_drift();
    p1.iter()
        .zip(&drift)
        .map(|(p, d)| {
            if d.is_zero() {
                p.clone()
            } else {
                p - &lambda_sq.scale(d)
            }
        })
        .collect()
}

/// The vector `b` of a conformal submersion with factor `lambda_sq`.
pub fn b_vector(
    f: &PolyMap,
    lambda_sq: &Polynomial,
    g: &CoordinateGroup,
    h: &CoordinateGroup,
) -> Result<Vec<Polynomial>> {
    check_map(f, g, h)?;
    let df = g.lie_differential(f, h)?;
    if !contact_residuals(&df, g, h)?.is_empty() || lambda_sq.is_zero() {
        return Err(Error::NotConformal);
    }
    let pullback = g.pullback_operator(f, h)?;
    if !pullback
        .p2
        .sub_scaled(lambda_sq, h.cometric().matrix())
        .is_zero()
    {
        return Err(Error::NotConformal);
    }
    Ok(first_order_vector(&pullback.p1, lambda_sq, h))
}

/// Checks a user-supplied `lambda^2` and `b` against the commutation
/// identity on probes.
pub fn verify_identity(
    f: &PolyMap,
    g: &CoordinateGroup,
    h: &CoordinateGroup,
    lambda_sq: &Polynomial,
    b: &[Polynomial],
    probe_degree: usize,
) -> Result<Vec<Residual>> {
    let degree = check_probe_degree(probe_degree)?;
    check_map(f, g, h)?;
    check_dim(h.dim(), b.len())?;
    Ok(identity_residuals(f, g, h, lambda_sq, b, degree))
}

/// `DF(p)` restricted to the polarizations, in polarization-basis
/// coordinates; fails when `DF(p)` is not horizontal.
pub fn restricted_differential(
    df_at_p: &Matrix,
    g: &CoordinateGroup,
    h: &CoordinateGroup,
) -> Result<LinearMap> {
    let images = df_at_p * &g.group().polarization().matrix();
    let pol = h.group().polarization();
    let cols = (0..images.ncols())
        .map(|j| {
            pol.coordinates_of(&images.column(j))
                .ok_or(Error::NotConformal)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = if cols.is_empty() {
        Matrix::zeros(pol.rank(), 0)
    } else {
        Matrix::from_columns(&cols)?
    };
    Ok(LinearMap::new(m))
}
