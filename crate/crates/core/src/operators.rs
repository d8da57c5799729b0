//! Horizontal gradient, divergence and sub-Laplacian as exact operators with
//! polynomial coefficients in exponential coordinates.

use num_traits::Zero;

use crate::algebra::{basis_vector, SubRiemannianGroup};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Rational};
use crate::nilpotent::{ExpCoordinates, PolyVectorField};
use crate::poly::{PolyMap, PolyMatrix, Polynomial};

/// The tensor `sum_i X_i X_i^T` of a horizontal orthonormal frame, written on
/// the full algebra (zero outside the polarization).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cometric {
    q: Matrix,
}

impl Cometric {
    /// `B gram^{-1} B^T`, with `B` the polarization basis as columns.
    pub fn of_group(group: &SubRiemannianGroup) -> Result<Self> {
        let b = group.polarization().matrix();
        let ginv = group.metric().gram().inverse()?;
        Ok(Cometric {
            q: &(&b * &ginv) * &b.transpose(),
        })
    }

    /// `sum_i X_i X_i^T` for an explicit frame.
    pub fn of_frame(dim: usize, frame: &[Vec<Rational>]) -> Result<Self> {
        let mut q = Matrix::zeros(dim, dim);
        for x in frame {
            check_dim(dim, x.len())?;
            for a in 0..dim {
                for b in 0..dim {
                    q[(a, b)] += &x[a] * &x[b];
                }
            }
        }
        Ok(Cometric { q })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn rank(&self) -> usize {
        self.q.rank()
    }
}

/// `sum S^{cd} d_c d_d + sum f^d d_d + z`, with `S` symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialOperator {
    pub second_order: Vec<Vec<Polynomial>>,
    pub first_order: Vec<Polynomial>,
    pub zero_order: Polynomial,
}

impl DifferentialOperator {
    pub fn zero(dim: usize) -> Self {
        DifferentialOperator {
            second_order: vec![vec![Polynomial::zero(); dim]; dim],
            first_order: vec![Polynomial::zero(); dim],
            zero_order: Polynomial::zero(),
        }
    }

    pub fn new(
        second_order: Vec<Vec<Polynomial>>,
        first_order: Vec<Polynomial>,
        zero_order: Polynomial,
    ) -> Result<Self> {
        let n = first_order.len();
        check_dim(n, second_order.len())?;
        for (c, row) in second_order.iter().enumerate() {
            check_dim(n, row.len())?;
            for d in 0..c {
                if row[d] != second_order[d][c] {
                    return Err(Error::Invalid(format!(
                        "second-order coefficients not symmetric at ({}, {})",
                        c + 1,
                        d + 1
                    )));
                }
            }
        }
        Ok(DifferentialOperator {
            second_order,
            first_order,
            zero_order,
        })
    }

    pub fn dim(&self) -> usize {
        self.first_order.len()
    }

    pub fn apply(&self, u: &Polynomial) -> Polynomial {
        let n = self.dim();
        let mut out = &self.zero_order * u;
        for d in 0..n {
            let du = u.derivative(d);
            if du.is_zero() {
                continue;
            }
            if !self.first_order[d].is_zero() {
                out += &(&self.first_order[d] * &du);
            }
            for c in 0..n {
                let s = &self.second_order[c][d];
                if !s.is_zero() {
                    out += &(s * &du.derivative(c));
                }
            }
        }
        out
    }

    pub fn scale(&self, q: &Rational) -> Self {
        DifferentialOperator {
            second_order: self
                .second_order
                .iter()
                .map(|r| r.iter().map(|p| p.scale(q)).collect())
                .collect(),
            first_order: self.first_order.iter().map(|p| p.scale(q)).collect(),
            zero_order: self.zero_order.scale(q),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero_order.is_zero()
            && self.first_order.iter().all(Polynomial::is_zero)
            && self.second_order.iter().flatten().all(Polynomial::is_zero)
    }

    fn add_field_product(&mut self, x: &PolyVectorField, y: &PolyVectorField, c: &Rational) {
        // c * X (Y u) = c * (X^a Y^b d_a d_b u + X^a (d_a Y^b) d_b u)
        let n = self.dim();
        for a in 0..n {
            if x.components[a].is_zero() {
                continue;
            }
            for b in 0..n {
                if y.components[b].is_zero() {
                    continue;
                }
                let s = (&x.components[a] * &y.components[b]).scale(c);
                // symmetrize so the stored tensor stays symmetric
                let half = s.scale(&crate::linalg::rat(1, 2));
                self.second_order[a][b] += &half;
                self.second_order[b][a] += &half;
            }
        }
        for b in 0..n {
            let t = x.apply(&y.components[b]);
            if !t.is_zero() {
                self.first_order[b] += &t.scale(c);
            }
        }
    }

    fn add_field(&mut self, x: &PolyVectorField, c: &Rational) {
        for (f, comp) in self.first_order.iter_mut().zip(&x.components) {
            *f += &comp.scale(c);
        }
    }
}

/// A nilpotent sub-Riemannian group realized in exponential coordinates.
#[derive(Clone, Debug)]
pub struct CoordinateGroup {
    group: SubRiemannianGroup,
    chart: ExpCoordinates,
    cometric: Cometric,
}

impl CoordinateGroup {
    pub fn new(group: SubRiemannianGroup) -> Result<Self> {
        group.require_nilpotent()?;
        let chart = ExpCoordinates::of_group(&group)?;
        let cometric = Cometric::of_group(&group)?;
        Ok(CoordinateGroup {
            group,
            chart,
            cometric,
        })
    }

    pub fn group(&self) -> &SubRiemannianGroup {
        &self.group
    }

    pub fn chart(&self) -> &ExpCoordinates {
        &self.chart
    }

    pub fn cometric(&self) -> &Cometric {
        &self.cometric
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// `sum_{a,b} q^{ab} trace(ad_{e_a}) e_b`, the horizontal gradient of the
    /// modular function at the identity. Zero on every nilpotent group.
    pub fn modular_drift(&self) -> Vec<Rational> {
        let n = self.dim();
        let traces: Vec<Rational> = (0..n)
            .map(|a| {
                self.group
                    .algebra()
                    .modular_trace(&basis_vector(n, a))
                    .expect("basis vector has algebra dimension")
            })
            .collect();
        self.cometric.matrix().mul_vec(&traces)
    }

    /// Horizontal gradient of `u` in coordinates of the polarization basis:
    /// the unique `c` with `<sum c_k B_k, v>_G = Du[v]` for horizontal `v`.
    pub fn gradient(&self, u: &Polynomial) -> Vec<Polynomial> {
        let n = self.dim();
        let pol = self.group.polarization();
        let du: Vec<Polynomial> = pol
            .basis()
            .iter()
            .map(|b| {
                let mut acc = Polynomial::zero();
                for (j, c) in b.iter().enumerate() {
                    if !c.is_zero() {
                        acc += &self.chart.apply_basis_field(j, u).scale(c);
                    }
                }
                acc
            })
            .collect();
        let ginv = self
            .group
            .metric()
            .gram()
            .inverse()
            .expect("metric is positive definite");
        let _ = n;
        PolyMatrix::from_rational(&ginv).mul_poly_vec(&du)
    }

    /// Horizontal gradient written as an algebra vector.
    pub fn gradient_vector(&self, u: &Polynomial) -> Vec<Polynomial> {
        let c = self.gradient(u);
        let b = self.group.polarization().matrix();
        PolyMatrix::from_rational(&b).mul_poly_vec(&c)
    }

    /// Divergence with respect to Haar measure, which in exponential
    /// coordinates of a nilpotent group is Lebesgue measure.
    pub fn divergence(&self, x: &PolyVectorField) -> Result<Polynomial> {
        check_dim(self.dim(), x.dim())?;
        let mut acc = Polynomial::zero();
        for (c, comp) in x.components.iter().enumerate() {
            acc += &comp.derivative(c);
        }
        Ok(acc)
    }

    /// `sum q^{ab} E_a E_b` plus the constant modular drift.
    pub fn sublaplacian(&self) -> DifferentialOperator {
        let n = self.dim();
        let q = self.cometric.matrix();
        let mut op = DifferentialOperator::zero(n);
        let fields: Vec<PolyVectorField> = (0..n).map(|j| self.chart.basis_field(j)).collect();
        for a in 0..n {
            for b in 0..n {
                if !q[(a, b)].is_zero() {
                    op.add_field_product(&fields[a], &fields[b], &q[(a, b)]);
                }
            }
        }
        let drift = self.modular_drift();
        for (b, c) in drift.iter().enumerate() {
            if !c.is_zero() {
                op.add_field(&fields[b], c);
            }
        }
        op
    }

    /// `sum_i (X_i^2 + div(X_i) X_i)` for an explicit horizontal frame.
    pub fn sum_of_squares(&self, frame: &[Vec<Rational>]) -> Result<DifferentialOperator> {
        let n = self.dim();
        let mut op = DifferentialOperator::zero(n);
        for x in frame {
            let field = self.chart.left_invariant_field(x)?;
            op.add_field_product(&field, &field, &Rational::from_integer(1.into()));
            let div = self.divergence(&field)?;
            if let Some(c) = div.as_constant() {
                if !c.is_zero() {
                    op.add_field(&field, &c);
                }
            } else {
                for (f, comp) in op.first_order.iter_mut().zip(&field.components) {
                    *f += &(comp * &div);
                }
            }
        }
        Ok(op)
    }

    /// Lie differential of a map into `target`.
    pub fn lie_differential(&self, f: &PolyMap, target: &CoordinateGroup) -> Result<PolyMatrix> {
        self.chart.lie_differential(f, &target.chart)
    }

    /// Decomposition `Δ_G(u∘F) = P2 u + P1 u + P0 u` of the pulled-back
    /// sub-Laplacian, with the coefficients written in the target's
    /// left-invariant frame.
    pub fn pullback_operator(&self, f: &PolyMap, target: &CoordinateGroup) -> Result<Pullback> {
        let df = self.lie_differential(f, target)?;
        let d2 = self.chart.second_from_first(&df);
        let q = self.cometric.matrix();
        let p2 = df.mul_rational(q).mul(&df.transpose());
        let mut p1 = d2.contract(q);
        let drift = self.modular_drift();
        if drift.iter().any(|c| !c.is_zero()) {
            for (o, extra) in p1.iter_mut().zip(df.mul_vec(&drift)) {
                *o += &extra;
            }
        }
        Ok(Pullback {
            p2,
            p1,
            p0: Polynomial::zero(),
            map: f.clone(),
        })
    }
}

/// Coefficients of a pulled-back sub-Laplacian, in the target frame:
/// `(P2 u)(p) = sum P2^{ab}(p) (E_a E_b u)(F(p))`,
/// `(P1 u)(p) = sum P1^a(p) (E_a u)(F(p))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pullback {
    pub p2: PolyMatrix,
    pub p1: Vec<Polynomial>,
    pub p0: Polynomial,
    map: PolyMap,
}

impl Pullback {
    /// Evaluates `P2 u + P1 u + P0 u` as a polynomial on the source.
    pub fn apply(&self, u: &Polynomial, target: &CoordinateGroup) -> Polynomial {
        let m = target.dim();
        let chart = target.chart();
        let f = self.map.components();
        let first: Vec<Polynomial> = (0..m).map(|a| chart.apply_basis_field(a, u)).collect();
        let mut out = Polynomial::zero();
        for a in 0..m {
            for b in 0..m {
                let c = self.p2.get(a, b);
                if c.is_zero() {
                    continue;
                }
                let eab = chart.apply_basis_field(a, &first[b]);
                out += &(c * &eab.compose(f));
            }
            if !self.p1[a].is_zero() {
                out += &(&self.p1[a] * &first[a].compose(f));
            }
        }
        out += &(&self.p0 * &u.compose(f));
        out
    }
}
