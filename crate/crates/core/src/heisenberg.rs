//! Heisenberg groups: symplectic spectra of (form, metric) pairs, the
//! isometry decision and an explicit isometry, and the standard groups with
//! metrics `g_r`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::{Signed, Zero};

use crate::algebra::{examples, Metric, Polarization, SubRiemannianGroup};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{int, to_f64, Matrix, Rational};
use crate::operators::DifferentialOperator;
use crate::poly::Polynomial;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Nonsingular alternating form on a `2n`-dimensional space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    omega: Matrix,
}

impl SymplecticForm {
    pub fn new(omega: Matrix) -> Result<Self> {
        if !omega.is_square() || omega.nrows() % 2 != 0 || omega.nrows() == 0 {
            return Err(Error::Invalid(format!(
                "symplectic form must be a nonempty even square matrix, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        if !omega.is_skew() {
            return Err(Error::Invalid(
                "symplectic form is not skew-symmetric".into(),
            ));
        }
        if omega.determinant().is_zero() {
            return Err(Error::Singular("symplectic form".into()));
        }
        Ok(SymplecticForm { omega })
    }

    /// `omega(X_i, Y_i) = 1` in the ordering `(X_1..X_n, Y_1..Y_n)`.
    pub fn standard(n: usize) -> Self {
        let mut omega = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            omega[(i, n + i)] = int(1);
            omega[(n + i, i)] = int(-1);
        }
        SymplecticForm { omega }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn scale(&self, zeta: &Rational) -> Result<Self> {
        SymplecticForm::new(self.omega.scale(zeta))
    }
}

/// `A` with `omega(v, w) = g(v, A w)`, i.e. `A = G^{-1} Omega`.
pub fn operator_a(omega: &SymplecticForm, g: &Metric) -> Result<Matrix> {
    check_dim(omega.dim(), g.dim())?;
    Ok(&g.gram().inverse()? * omega.matrix())
}

/// Sorted `r_1 <= ... <= r_n` with `-r_i^4` the eigenvalues of `A^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticSpectrum {
    pub r: Vec<f64>,
    pub tolerance: f64,
}

/// Float data of the pair after congruence to a `g`-orthonormal basis.
struct Orthonormalized {
    /// Cholesky factor, `G = L L^T`.
    l: DMatrix<f64>,
    /// `L^{-1} Omega L^{-T}`, skew.
    skew: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

fn to_dmatrix(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| to_f64(&m[(i, j)]))
}

fn orthonormalize(omega: &SymplecticForm, g: &Metric) -> Result<Orthonormalized> {
    check_dim(omega.dim(), g.dim())?;
    let l = to_dmatrix(g.gram())
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("metric".into()))?
        .l();
    let w = to_dmatrix(omega.matrix());
    let t = l
        .solve_lower_triangular(&w)
        .ok_or_else(|| Error::Singular("metric".into()))?;
    let skew = l
        .solve_lower_triangular(&t.transpose())
        .ok_or_else(|| Error::Singular("metric".into()))?
        .transpose();
    let skew = (&skew - skew.transpose()) * 0.5;
    let sym = skew.transpose() * &skew;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    Ok(Orthonormalized {
        l,
        skew,
        eigenvalues,
        eigenvectors,
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Computes the symplectic spectrum of `(omega, g)`.
pub fn symplectic_spectrum(
    omega: &SymplecticForm,
    g: &Metric,
    tolerance: f64,
) -> Result<SymplecticSpectrum> {
    let data = orthonormalize(omega, g)?;
    let mu = &data.eigenvalues;
    let scale = mu.last().copied().unwrap_or(0.0).max(1.0);
    if mu[0] <= tolerance * scale {
        return Err(Error::InvalidSpectrum(format!(
            "A^2 has eigenvalue {} which is not negative",
            -mu[0]
        )));
    }
    let mut r = Vec::with_capacity(mu.len() / 2);
    for pair in mu.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).abs() > 1e3 * tolerance * scale {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues {a} and {b} of -A^2 do not pair up"
            )));
        }
        r.push((0.5 * (a + b)).powf(0.25));
    }
    Ok(SymplecticSpectrum { r, tolerance })
}

/// `rho` with `r_1 = rho * r_2`, if the two spectra are proportional.
pub fn isometry_decision(
    s1: &SymplecticSpectrum,
    s2: &SymplecticSpectrum,
    tolerance: f64,
) -> Option<f64> {
    if s1.r.len() != s2.r.len() || s1.r.is_empty() {
        return None;
    }
    // the largest radii carry the smallest relative error
    let (a0, b0) = (s1.r[s1.r.len() - 1], s2.r[s2.r.len() - 1]);
    let proportional =
        s1.r.iter()
            .zip(&s2.r)
            .all(|(a, b)| close(a / a0, b / b0, tolerance));
    let num: f64 = s1.r.iter().zip(&s2.r).map(|(a, b)| a * b).sum();
    let den: f64 = s2.r.iter().map(|b| b * b).sum();
    proportional.then_some(num / den)
}

/// Columns `(X_1..X_n, Y_1..Y_n)` of a `g`-orthonormal basis in which
/// `omega(X_i, Y_i) = r_i^2` and all other pairings vanish.
fn normal_basis(omega: &SymplecticForm, g: &Metric, tolerance: f64) -> Result<DMatrix<f64>> {
    let spectrum = symplectic_spectrum(omega, g, tolerance)?;
    let data = orthonormalize(omega, g)?;
    let dim = omega.dim();
    let n = dim / 2;
    // input basis vectors written in orthonormal coordinates
    let seeds: Vec<DVector<f64>> = (0..dim).map(|k| data.l.row(k).transpose()).collect();
    let mut xs: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut ys: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && close(spectrum.r[end], spectrum.r[start], tolerance) {
            end += 1;
        }
        // eigenspace of -A^2 for this cluster, 2*(end-start) dimensional
        let space = data
            .eigenvectors
            .columns(2 * start, 2 * (end - start))
            .into_owned();
        let project = |v: &DVector<f64>| &space * (space.transpose() * v);
        let mut chosen: Vec<DVector<f64>> = Vec::new();
        for _ in start..end {
            let residuals: Vec<DVector<f64>> = seeds
                .iter()
                .map(|s| {
                    let mut v = project(s);
                    for c in &chosen {
                        v -= c * c.dot(&v);
                    }
                    v
                })
                .collect();
            let max = residuals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if max <= f64::EPSILON {
                return Err(Error::InvalidSpectrum("degenerate eigenspace".into()));
            }
            let e = residuals
                .into_iter()
                .find(|v| v.norm() >= 0.5 * max)
                .expect("maximum is attained");
            let x = e.normalize();
            let ax = &data.skew * &x;
            let mut y = -ax;
            for c in &chosen {
                y -= c * c.dot(&y);
            }
            let y = y.normalize();
            chosen.push(x.clone());
            chosen.push(y.clone());
            xs.push(x);
            ys.push(y);
        }
        start = end;
    }
    let ortho = DMatrix::from_columns(&xs.into_iter().chain(ys).collect::<Vec<_>>());
    data.l
        .transpose()
        .solve_upper_triangular(&ortho)
        .ok_or_else(|| Error::Singular("metric".into()))
}

/// An explicit linear isometry `Psi` with `Psi^T G1 Psi = G2` and
/// `Psi^T Omega1 Psi = rho^2 Omega2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub psi: DMatrix<f64>,
    pub rho: f64,
}

impl Isometry {
    /// Sup norms of `Psi^T G1 Psi - G2` and `Psi^T Omega1 Psi - rho^2 Omega2`.
    pub fn residuals(
        &self,
        o1: &SymplecticForm,
        g1: &Metric,
        o2: &SymplecticForm,
        g2: &Metric,
    ) -> (f64, f64) {
        let p = &self.psi;
        let dg = p.transpose() * to_dmatrix(g1.gram()) * p - to_dmatrix(g2.gram());
        let dw = p.transpose() * to_dmatrix(o1.matrix()) * p
            - to_dmatrix(o2.matrix()) * (self.rho * self.rho);
        (dg.amax(), dw.amax())
    }
}

pub fn build_isometry(
    o1: &SymplecticForm,
    g1: &Metric,
    o2: &SymplecticForm,
    g2: &Metric,
    tolerance: f64,
) -> Result<Isometry> {
    check_dim(o1.dim(), o2.dim())?;
    let s1 = symplectic_spectrum(o1, g1, tolerance)?;
    let s2 = symplectic_spectrum(o2, g2, tolerance)?;
    let rho = isometry_decision(&s1, &s2, tolerance).ok_or(Error::NoIsometry)?;
    let b1 = normal_basis(o1, g1, tolerance)?;
    let b2 = normal_basis(o2, g2, tolerance)?;
    let b2_inv = b2
        .try_inverse()
        .ok_or_else(|| Error::Singular("normal basis".into()))?;
    Ok(Isometry {
        psi: b1 * b2_inv,
        rho,
    })
}

fn check_radii(r: &[Rational]) -> Result<()> {
    if r.is_empty() {
        return Err(Error::Invalid("r must be nonempty".into()));
    }
    if r.iter().any(|x| !x.is_positive()) {
        return Err(Error::Invalid("r must be positive".into()));
    }
    if r.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Invalid("r must be nondecreasing".into()));
    }
    Ok(())
}

/// The metric `g_r`: `g(X_i, X_i) = g(Y_i, Y_i) = 1 / r_i^2`.
pub fn metric_r(r: &[Rational]) -> Result<Metric> {
    check_radii(r)?;
    let d: Vec<Rational> = r.iter().chain(r).map(|x| (x * x).recip()).collect();
    Metric::new(Matrix::diagonal(&d))
}

/// `H^n` in coordinates `(x_1..x_n, y_1..y_n, z)` with `[X_i, Y_i] = Z` and
/// metric `g_r` on the first layer.
pub fn heisenberg_group(r: &[Rational]) -> Result<SubRiemannianGroup> {
    let n = r.len();
    let metric = metric_r(r)?;
    let axes: Vec<usize> = (0..2 * n).collect();
    SubRiemannianGroup::new(
        examples::heisenberg(n),
        Polarization::coordinate(2 * n + 1, &axes)?,
        metric,
    )
}

/// `sum_i r_i^2 (X_i^2 + Y_i^2)` written out in coordinates:
/// `d_{x_i}^2 + d_{y_i}^2 + (x_i^2 + y_i^2)/4 d_z^2 + (x_i d_{y_i} - y_i d_{x_i}) d_z`.
pub fn coordinate_sublaplacian(r: &[Rational]) -> Result<DifferentialOperator> {
    check_radii(r)?;
    let n = r.len();
    let dim = 2 * n + 1;
    let z = 2 * n;
    let mut op = DifferentialOperator::zero(dim);
    let quarter = Rational::new(1.into(), 4.into());
    let half = Rational::new(1.into(), 2.into());
    for (i, ri) in r.iter().enumerate() {
        let w = ri * ri;
        let (x, y) = (Polynomial::var(i), Polynomial::var(n + i));
        op.second_order[i][i] += &Polynomial::constant(w.clone());
        op.second_order[n + i][n + i] += &Polynomial::constant(w.clone());
        op.second_order[z][z] += &(&x * &x + &y * &y).scale(&(&w * &quarter));
        let xy = x.scale(&(&w * &half));
        let yx = y.scale(&(-&w * &half));
        op.second_order[n + i][z] += &xy;
        op.second_order[z][n + i] += &xy;
        op.second_order[i][z] += &yx;
        op.second_order[z][i] += &yx;
    }
    Ok(op)
}

/// The standard form and `g_r`, whose spectrum is `r`.
pub fn standard_pair(r: &[Rational]) -> Result<(SymplecticForm, Metric)> {
    Ok((SymplecticForm::standard(r.len()), metric_r(r)?))
}
