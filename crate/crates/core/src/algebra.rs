//! Finite-dimensional Lie algebras given by exact structure constants, and
//! the sub-Riemannian data built on top of them: polarization, metric,
//! nilpotency step and stratification.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{greedy_independent, span_rank, Matrix, Rational};
use crate::poly::CoeffRing;

pub fn basis_vector(dim: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); dim];
    v[i] = Rational::one();
    v
}

/// Structure constants `[e_i, e_j] = sum_k c_ij^k e_k`.
///
/// The canonical table keeps only `i < j`; `[e_j, e_i]` is read as the
/// negation. Entries declared with `i >= j` are retained separately so that
/// [`LieAlgebra::validate`] can report inconsistent input.
#[derive(Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    dim: usize,
    constants: BTreeMap<(usize, usize), BTreeMap<usize, Rational>>,
    lower: BTreeMap<(usize, usize), BTreeMap<usize, Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntisymmetryViolation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c_ij: Rational,
    pub c_ji: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiViolation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub residual: Vec<Rational>,
}

/// Every violated axiom instance; empty iff the table defines a Lie algebra.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub antisymmetry: Vec<AntisymmetryViolation>,
    pub jacobi: Vec<JacobiViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.antisymmetry.is_empty() && self.jacobi.is_empty()
    }
}

impl LieAlgebra {
    /// Builds an algebra from declared entries `(i, j, k, c_ij^k)` (0-based).
    /// Repeated declarations of the same `(i, j, k)` are summed.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize, Rational)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("algebra dimension must be positive".into()));
        }
        let mut constants: BTreeMap<(usize, usize), BTreeMap<usize, Rational>> = BTreeMap::new();
        let mut lower: BTreeMap<(usize, usize), BTreeMap<usize, Rational>> = BTreeMap::new();
        let mut declared_upper = std::collections::BTreeSet::new();
        for (i, j, k, c) in entries {
            for idx in [i, j, k] {
                if idx >= dim {
                    return Err(Error::Invalid(format!(
                        "structure constant index {} out of range 1..={dim}",
                        idx + 1
                    )));
                }
            }
            if i < j {
                declared_upper.insert((i, j));
            }
            let table = if i < j { &mut constants } else { &mut lower };
            *table
                .entry((i, j))
                .or_default()
                .entry(k)
                .or_insert_with(Rational::zero) += c;
        }
        for table in [&mut constants, &mut lower] {
            for row in table.values_mut() {
                row.retain(|_, c| !c.is_zero());
            }
        }
        // Declared lower pairs stay even when zero so validation sees them.
        constants.retain(|_, row| !row.is_empty());
        // Pairs declared only as (j, i) with j > i feed the canonical table.
        for (&(j, i), row) in &lower {
            if j > i && !row.is_empty() && !declared_upper.contains(&(i, j)) {
                constants.insert((i, j), row.iter().map(|(&k, c)| (k, -c)).collect());
            }
        }
        Ok(LieAlgebra {
            dim,
            constants,
            lower,
        })
    }

    /// Builds from a dense table `c[i][j][k]`; every entry counts as declared.
    pub fn from_dense(table: &[Vec<Vec<Rational>>]) -> Result<Self> {
        let dim = table.len();
        let mut entries = Vec::new();
        for (i, row) in table.iter().enumerate() {
            check_dim(dim, row.len())?;
            for (j, v) in row.iter().enumerate() {
                check_dim(dim, v.len())?;
                for (k, c) in v.iter().enumerate() {
                    entries.push((i, j, k, c.clone()));
                }
            }
        }
        Self::from_entries(dim, entries)
    }

    pub fn abelian(dim: usize) -> Result<Self> {
        Self::from_entries(dim, [])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared constant `c_ij^k` as stored (no antisymmetry applied).
    pub fn declared(&self, i: usize, j: usize, k: usize) -> Rational {
        let table = if i < j { &self.constants } else { &self.lower };
        table
            .get(&(i, j))
            .and_then(|row| row.get(&k))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Canonical constant with antisymmetry applied on read.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> Rational {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.canonical(i, j, k),
            Greater => -self.canonical(j, i, k),
            Equal => Rational::zero(),
        }
    }

    fn canonical(&self, i: usize, j: usize, k: usize) -> Rational {
        self.constants
            .get(&(i, j))
            .and_then(|row| row.get(&k))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Canonical `(i, j, k, c)` entries with `i < j`.
    pub fn canonical_entries(&self) -> impl Iterator<Item = (usize, usize, usize, &Rational)> {
        self.constants
            .iter()
            .flat_map(|(&(i, j), row)| row.iter().map(move |(&k, c)| (i, j, k, c)))
    }

    /// Dense table `c[i][j][k]` of the declared (raw) constants.
    pub fn dense_declared(&self) -> Vec<Vec<Vec<Rational>>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| (0..self.dim).map(|k| self.declared(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    /// Dense table with antisymmetry applied.
    pub fn dense(&self) -> Vec<Vec<Vec<Rational>>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| (0..self.dim).map(|k| self.constant(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    /// Bilinear bracket over any coefficient ring (points or symbolic
    /// coordinates).
    pub fn bracket_generic<T: CoeffRing>(&self, x: &[T], y: &[T]) -> Vec<T> {
        assert_eq!(
            x.len(),
            self.dim,
            "bracket: left operand has wrong dimension"
        );
        assert_eq!(
            y.len(),
            self.dim,
            "bracket: right operand has wrong dimension"
        );
        let mut out = vec![T::ring_zero(); self.dim];
        for (&(i, j), row) in &self.constants {
            let a = x[i].ring_mul(&y[j]);
            let b = x[j].ring_mul(&y[i]);
            let w = a.ring_sub(&b);
            if w.is_ring_zero() {
                continue;
            }
            for (&k, c) in row {
                out[k] = out[k].ring_add(&w.ring_scale(c));
            }
        }
        out
    }

    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        Ok(self.bracket_generic(x, y))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (&(a, b), row) in &self.lower {
            if a == b {
                for (&k, c) in row {
                    report.antisymmetry.push(AntisymmetryViolation {
                        i: a,
                        j: a,
                        k,
                        c_ij: c.clone(),
                        c_ji: c.clone(),
                    });
                }
                continue;
            }
            // (a, b) with a > b: must be the negation of the canonical (b, a).
            for k in 0..self.dim {
                let c_ab = self.declared(a, b, k);
                let c_ba = self.canonical(b, a, k);
                if c_ab != -&c_ba {
                    report.antisymmetry.push(AntisymmetryViolation {
                        i: b,
                        j: a,
                        k,
                        c_ij: c_ba,
                        c_ji: c_ab,
                    });
                }
            }
        }
        let e: Vec<Vec<Rational>> = (0..self.dim).map(|i| basis_vector(self.dim, i)).collect();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let eij = self.bracket_generic(&e[i], &e[j]);
                for k in j + 1..self.dim {
                    let t1 = self.bracket_generic(&e[i], &self.bracket_generic(&e[j], &e[k]));
                    let t2 = self.bracket_generic(&e[j], &self.bracket_generic(&e[k], &e[i]));
                    let t3 = self.bracket_generic(&e[k], &eij);
                    let residual: Vec<Rational> =
                        (0..self.dim).map(|m| &t1[m] + &t2[m] + &t3[m]).collect();
                    if residual.iter().any(|c| !c.is_zero()) {
                        report.jacobi.push(JacobiViolation { i, j, k, residual });
                    }
                }
            }
        }
        report
    }

    /// Matrix of `ad_x`: column `j` is `[x, e_j]`.
    pub fn ad_matrix(&self, x: &[Rational]) -> Result<Matrix> {
        check_dim(self.dim, x.len())?;
        let cols: Vec<Vec<Rational>> = (0..self.dim)
            .map(|j| self.bracket_generic(x, &basis_vector(self.dim, j)))
            .collect();
        Matrix::from_columns(&cols)
    }

    /// `trace(ad_x)`, the derivative of the modular function along `x`.
    pub fn modular_trace(&self, x: &[Rational]) -> Result<Rational> {
        Ok(self.ad_matrix(x)?.trace())
    }

    pub fn is_unimodular(&self) -> bool {
        (0..self.dim).all(|i| {
            self.modular_trace(&basis_vector(self.dim, i))
                .map(|t| t.is_zero())
                .unwrap_or(false)
        })
    }

    /// Nilpotency step from the lower central series; `None` if not nilpotent.
    pub fn nilpotency_step(&self) -> Option<usize> {
        let mut current: Vec<Vec<Rational>> =
            (0..self.dim).map(|i| basis_vector(self.dim, i)).collect();
        let mut step = 1;
        loop {
            let next: Vec<Vec<Rational>> = (0..self.dim)
                .flat_map(|i| {
                    let e = basis_vector(self.dim, i);
                    current
                        .iter()
                        .map(move |w| (e.clone(), w.clone()))
                        .collect::<Vec<_>>()
                })
                .map(|(e, w)| self.bracket_generic(&e, &w))
                .filter(|v| v.iter().any(|c| !c.is_zero()))
                .collect();
            let picked = greedy_independent(&[], &next);
            if picked.is_empty() {
                return Some(step);
            }
            if picked.len() == current.len() {
                return None;
            }
            current = picked.into_iter().map(|i| next[i].clone()).collect();
            step += 1;
        }
    }

    /// Grows `V, V + [V,V], ...` until it stops growing or fills the algebra.
    pub fn bracket_generating(&self, pol: &Polarization) -> Result<(bool, Vec<usize>)> {
        check_dim(self.dim, pol.ambient_dim())?;
        let v = pol.basis();
        let mut span: Vec<Vec<Rational>> = v.to_vec();
        let mut dims = vec![span_rank(&span)];
        loop {
            let last = *dims.last().unwrap();
            if last == self.dim {
                return Ok((true, dims));
            }
            let new: Vec<Vec<Rational>> = v
                .iter()
                .flat_map(|a| {
                    span.iter()
                        .map(|w| self.bracket_generic(a, w))
                        .collect::<Vec<_>>()
                })
                .collect();
            let picked = greedy_independent(&span, &new);
            span.extend(picked.into_iter().map(|i| new[i].clone()));
            let d = span.len();
            dims.push(d);
            if d == last {
                return Ok((false, dims));
            }
        }
    }

    /// Builds layers `V_{k+1} = [V_1, V_k]`, picking each layer basis by greedy
    /// pivoting over the brackets in input order.
    pub fn stratify(&self, v1: &Polarization) -> Result<Strata> {
        check_dim(self.dim, v1.ambient_dim())?;
        let first = v1.basis().to_vec();
        let mut layers = vec![first.clone()];
        let mut all: Vec<Vec<Rational>> = first.clone();
        loop {
            if layers.len() > self.dim {
                return Err(Error::NotStratifiable(
                    "layer sequence does not terminate".into(),
                ));
            }
            let top = layers.last().unwrap();
            let brackets: Vec<Vec<Rational>> = first
                .iter()
                .flat_map(|a| {
                    top.iter()
                        .map(|w| self.bracket_generic(a, w))
                        .collect::<Vec<_>>()
                })
                .collect();
            let own = greedy_independent(&[], &brackets);
            if own.is_empty() {
                break;
            }
            let fresh = greedy_independent(&all, &brackets);
            if fresh.len() != own.len() {
                return Err(Error::NotStratifiable(format!(
                    "[V1, V{}] meets the lower layers",
                    layers.len()
                )));
            }
            let layer: Vec<Vec<Rational>> =
                fresh.into_iter().map(|i| brackets[i].clone()).collect();
            all.extend(layer.iter().cloned());
            layers.push(layer);
        }
        if all.len() != self.dim {
            return Err(Error::NotStratifiable(format!(
                "layers span dimension {} of {}",
                all.len(),
                self.dim
            )));
        }
        Ok(Strata { layers })
    }
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra(dim={}", self.dim)?;
        for (i, j, k, c) in self.canonical_entries() {
            write!(f, ", c[{},{}]^{}={}", i + 1, j + 1, k + 1, c)?;
        }
        write!(f, ")")
    }
}

/// Linearly independent vectors spanning the horizontal subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polarization {
    ambient: usize,
    basis: Vec<Vec<Rational>>,
}

impl Polarization {
    pub fn new(ambient: usize, basis: Vec<Vec<Rational>>) -> Result<Self> {
        for v in &basis {
            check_dim(ambient, v.len())?;
        }
        if span_rank(&basis) != basis.len() {
            return Err(Error::LinearlyDependent("polarization basis".into()));
        }
        Ok(Polarization { ambient, basis })
    }

    /// Span of the listed coordinate axes.
    pub fn coordinate(ambient: usize, axes: &[usize]) -> Result<Self> {
        Self::new(
            ambient,
            axes.iter().map(|&i| basis_vector(ambient, i)).collect(),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// `ambient x rank` matrix whose columns are the basis vectors.
    pub fn matrix(&self) -> Matrix {
        Matrix::from_columns(&self.basis).unwrap_or_else(|_| Matrix::zeros(self.ambient, 0))
    }

    /// Coordinates of `v` in this basis, if `v` lies in the span.
    pub fn coordinates_of(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        self.matrix().solve(v)
    }
}

/// Gram matrix of the scalar product on the polarization basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    gram: Matrix,
}

impl Metric {
    pub fn new(gram: Matrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotPositiveDefinite(
                "Gram matrix is not symmetric".into(),
            ));
        }
        if !gram.is_positive_definite() {
            return Err(Error::NotPositiveDefinite(
                "a leading principal minor is not positive".into(),
            ));
        }
        Ok(Metric { gram })
    }

    pub fn identity(n: usize) -> Self {
        Metric {
            gram: Matrix::identity(n),
        }
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strata {
    pub layers: Vec<Vec<Vec<Rational>>>,
}

impl Strata {
    pub fn dims(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// Dilation `delta_lambda` as a matrix on the algebra: `lambda^k` on `V_k`.
    pub fn dilation(&self, lambda: &Rational) -> Result<Matrix> {
        let cols: Vec<Vec<Rational>> = self.layers.iter().flatten().cloned().collect();
        let s = Matrix::from_columns(&cols)?;
        let weights: Vec<Rational> = self
            .layers
            .iter()
            .enumerate()
            .flat_map(|(k, l)| std::iter::repeat_n(num_traits::pow(lambda.clone(), k + 1), l.len()))
            .collect();
        Ok(&(&s * &Matrix::diagonal(&weights)) * &s.inverse()?)
    }
}

/// Lie algebra with polarization and scalar product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubRiemannianGroup {
    algebra: LieAlgebra,
    polarization: Polarization,
    metric: Metric,
    step: Option<usize>,
    strata: Option<Strata>,
}

impl SubRiemannianGroup {
    pub fn new(algebra: LieAlgebra, polarization: Polarization, metric: Metric) -> Result<Self> {
        let report = algebra.validate();
        if !report.is_valid() {
            return Err(Error::Invalid(format!(
                "structure constants violate {} antisymmetry and {} Jacobi instance(s)",
                report.antisymmetry.len(),
                report.jacobi.len()
            )));
        }
        check_dim(polarization.rank(), metric.dim())?;
        let (generating, dims) = algebra.bracket_generating(&polarization)?;
        if !generating {
            return Err(Error::Invalid(format!(
                "polarization is not bracket generating (filtration {dims:?})"
            )));
        }
        let step = algebra.nilpotency_step();
        let strata = algebra.stratify(&polarization).ok();
        Ok(SubRiemannianGroup {
            algebra,
            polarization,
            metric,
            step,
            strata,
        })
    }

    /// Abelian `R^n` with the standard metric.
    pub fn euclidean(n: usize) -> Result<Self> {
        let all: Vec<usize> = (0..n).collect();
        Self::new(
            LieAlgebra::abelian(n)?,
            Polarization::coordinate(n, &all)?,
            Metric::identity(n),
        )
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn step(&self) -> Option<usize> {
        self.step
    }

    pub fn strata(&self) -> Option<&Strata> {
        self.strata.as_ref()
    }

    pub fn is_carnot(&self) -> bool {
        self.step.is_some() && self.strata.is_some()
    }

    pub fn require_nilpotent(&self) -> Result<usize> {
        self.step.ok_or(Error::NotNilpotent)
    }

    pub fn with_metric(&self, metric: Metric) -> Result<Self> {
        Self::new(self.algebra.clone(), self.polarization.clone(), metric)
    }
}

/// Reference algebras used in tests, examples and the CLI.
pub mod examples {
    use super::*;
    use crate::linalg::int;

    /// Heisenberg algebra on `(X_1..X_n, Y_1..Y_n, Z)` with `[X_i, Y_i] = Z`.
    pub fn heisenberg(n: usize) -> LieAlgebra {
        let z = 2 * n;
        LieAlgebra::from_entries(2 * n + 1, (0..n).map(|i| (i, n + i, z, int(1))))
            .expect("valid heisenberg table")
    }

    /// Engel algebra: `[e1,e2] = e3`, `[e1,e3] = e4`.
    pub fn engel() -> LieAlgebra {
        LieAlgebra::from_entries(4, [(0, 1, 2, int(1)), (0, 2, 3, int(1))])
            .expect("valid engel table")
    }

    /// `sl_2` on `(X, Y, Z)`: `[X,Y] = Z`, `[Z,X] = 2X`, `[Z,Y] = -2Y`.
    pub fn sl2() -> LieAlgebra {
        LieAlgebra::from_entries(
            3,
            [(0, 1, 2, int(1)), (0, 2, 0, int(-2)), (1, 2, 1, int(2))],
        )
        .expect("valid sl2 table")
    }

    /// Two-dimensional non-unimodular algebra `[e1, e2] = e2`.
    pub fn affine_line() -> LieAlgebra {
        LieAlgebra::from_entries(2, [(0, 1, 1, int(1))]).expect("valid table")
    }

    /// `H^1` with the standard metric on `span(X, Y)`.
    pub fn heisenberg_group(n: usize) -> SubRiemannianGroup {
        let axes: Vec<usize> = (0..2 * n).collect();
        SubRiemannianGroup::new(
            heisenberg(n),
            Polarization::coordinate(2 * n + 1, &axes).unwrap(),
            Metric::identity(2 * n),
        )
        .expect("valid heisenberg group")
    }

    /// Engel group with orthonormal `V_1 = span(e1, e2)`.
    pub fn engel_group() -> SubRiemannianGroup {
        SubRiemannianGroup::new(
            engel(),
            Polarization::coordinate(4, &[0, 1]).unwrap(),
            Metric::identity(2),
        )
        .expect("valid engel group")
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;
    use crate::linalg::{int, rat};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn heisenberg_bracket() {
        let h = heisenberg(1);
        assert_eq!(
            h.bracket(&v(&[1, 0, 0]), &v(&[0, 1, 0])).unwrap(),
            v(&[0, 0, 1])
        );
        let x = v(&[3, -2, 5]);
        assert_eq!(h.bracket(&x, &x).unwrap(), v(&[0, 0, 0]));
        assert!(h.bracket(&v(&[1, 0]), &x).is_err());
    }

    #[test]
    fn sl2_bracket_and_ad() {
        let g = sl2();
        assert_eq!(
            g.bracket(&v(&[0, 0, 1]), &v(&[1, 0, 0])).unwrap(),
            v(&[2, 0, 0])
        );
        let ad_z = g.ad_matrix(&v(&[0, 0, 1])).unwrap();
        assert_eq!(ad_z, Matrix::diagonal(&v(&[2, -2, 0])));
    }

    #[test]
    fn ad_of_x_in_heisenberg() {
        let ad = heisenberg(1).ad_matrix(&v(&[1, 0, 0])).unwrap();
        let mut expected = Matrix::zeros(3, 3);
        expected[(2, 1)] = int(1);
        assert_eq!(ad, expected);
        assert!(heisenberg(1).ad_matrix(&v(&[0, 0, 0])).unwrap().is_zero());
    }

    #[test]
    fn validation() {
        assert!(heisenberg(1).validate().is_valid());
        assert!(heisenberg(2).validate().is_valid());
        assert!(engel().validate().is_valid());
        assert!(sl2().validate().is_valid());
    }

    #[test]
    fn one_sided_flip_is_an_antisymmetry_violation() {
        // c_12^3 = 1 declared, but c_21^3 declared as +1 as well.
        let bad = LieAlgebra::from_entries(3, [(0, 1, 2, int(1)), (1, 0, 2, int(1))]).unwrap();
        let report = bad.validate();
        assert_eq!(report.antisymmetry.len(), 1);
        let a = &report.antisymmetry[0];
        assert_eq!((a.i, a.j, a.k), (0, 1, 2));
        assert!(report.jacobi.is_empty());
    }

    #[test]
    fn consistent_two_sided_declaration_is_valid() {
        let ok = LieAlgebra::from_entries(3, [(0, 1, 2, int(1)), (1, 0, 2, int(-1))]).unwrap();
        assert!(ok.validate().is_valid());
        let dense = LieAlgebra::from_dense(&ok.dense_declared()).unwrap();
        assert!(dense.validate().is_valid());
        assert_eq!(ok.dense(), dense.dense());
    }

    #[test]
    fn jacobi_violation_detected() {
        let bad =
            LieAlgebra::from_entries(3, [(0, 1, 1, int(1)), (0, 2, 2, int(1)), (1, 2, 0, int(1))])
                .unwrap();
        let report = bad.validate();
        assert!(report.antisymmetry.is_empty());
        assert_eq!(report.jacobi.len(), 1);
        assert_eq!(report.jacobi[0].residual, v(&[-2, 0, 0]));
    }

    #[test]
    fn modular_traces() {
        let h = heisenberg(1);
        assert_eq!(h.modular_trace(&v(&[4, -1, 7])).unwrap(), int(0));
        assert_eq!(affine_line().modular_trace(&v(&[1, 0])).unwrap(), int(1));
        assert!(!affine_line().is_unimodular());
        assert_eq!(sl2().modular_trace(&v(&[1, 0, 0])).unwrap(), int(0));
        assert!(sl2().is_unimodular());
    }

    #[test]
    fn bracket_generating_sequences() {
        let h = heisenberg(1);
        let xy = Polarization::coordinate(3, &[0, 1]).unwrap();
        assert_eq!(h.bracket_generating(&xy).unwrap(), (true, vec![2, 3]));
        let x = Polarization::coordinate(3, &[0]).unwrap();
        assert_eq!(h.bracket_generating(&x).unwrap(), (false, vec![1, 1]));
        assert_eq!(sl2().bracket_generating(&xy).unwrap(), (true, vec![2, 3]));
    }

    #[test]
    fn nilpotency() {
        assert_eq!(heisenberg(2).nilpotency_step(), Some(2));
        assert_eq!(engel().nilpotency_step(), Some(3));
        assert_eq!(LieAlgebra::abelian(3).unwrap().nilpotency_step(), Some(1));
        assert_eq!(sl2().nilpotency_step(), None);
        assert_eq!(affine_line().nilpotency_step(), None);
    }

    #[test]
    fn stratifications() {
        let h = heisenberg(1);
        let s = h
            .stratify(&Polarization::coordinate(3, &[0, 1]).unwrap())
            .unwrap();
        assert_eq!(s.dims(), vec![2, 1]);
        let e = engel()
            .stratify(&Polarization::coordinate(4, &[0, 1]).unwrap())
            .unwrap();
        assert_eq!(e.dims(), vec![2, 1, 1]);
        let a = LieAlgebra::abelian(3).unwrap();
        assert_eq!(
            a.stratify(&Polarization::coordinate(3, &[0, 1, 2]).unwrap())
                .unwrap()
                .dims(),
            vec![3]
        );
    }

    #[test]
    fn stratify_failures() {
        let h = heisenberg(1);
        assert!(matches!(
            h.stratify(&Polarization::coordinate(3, &[0]).unwrap()),
            Err(Error::NotStratifiable(_))
        ));
        // [V1, V1] overlaps V1 when V1 already contains e3.
        assert!(engel()
            .stratify(&Polarization::coordinate(4, &[0, 1, 2]).unwrap())
            .is_err());
        assert!(sl2()
            .stratify(&Polarization::coordinate(3, &[0, 1]).unwrap())
            .is_err());
    }

    #[test]
    fn dilation_scales_layers() {
        let g = engel_group();
        let d = g.strata().unwrap().dilation(&int(2)).unwrap();
        assert_eq!(d, Matrix::diagonal(&v(&[2, 2, 4, 8])));
    }

    #[test]
    fn metric_checks() {
        assert!(Metric::new(Matrix::from_i64(&[&[1, 2], &[2, 1]])).is_err());
        assert!(Metric::new(Matrix::diagonal(&[rat(1, 4), int(3)])).is_ok());
    }

    #[test]
    fn group_construction() {
        let g = heisenberg_group(1);
        assert_eq!(g.step(), Some(2));
        assert!(g.is_carnot());
        let sl = SubRiemannianGroup::new(
            sl2(),
            Polarization::coordinate(3, &[0, 1]).unwrap(),
            Metric::identity(2),
        )
        .unwrap();
        assert_eq!(sl.step(), None);
        assert!(sl.require_nilpotent().is_err());
        assert!(SubRiemannianGroup::new(
            heisenberg(1),
            Polarization::coordinate(3, &[0]).unwrap(),
            Metric::identity(1)
        )
        .is_err());
    }
}
