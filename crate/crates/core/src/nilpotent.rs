//! Group calculus on simply connected nilpotent Lie groups in exponential
//! coordinates of the first kind.
//!
//! A point of the group is its logarithm, so `exp` and `log` are the
//! identity on coordinates and the product is the Baker-Campbell-Hausdorff
//! series, which terminates at the nilpotency step. Everything below is
//! exact: left-invariant fields, Lie differentials `DF` and `D^2F` come out as
//! polynomial matrices.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::Zero;

use crate::algebra::{LieAlgebra, SubRiemannianGroup};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{int, Rational};
use crate::poly::{CoeffRing, PolyMap, PolyMatrix, Polynomial};

/// Dynkin's series truncated at a given length: pairs of a coefficient and a
/// word over `{0 = left factor, 1 = right factor}`, to be read as the
/// right-nested bracket `[w_1, [w_2, ... [w_{m-1}, w_m]]]`.
#[derive(Debug)]
pub struct BchSeries {
    pub step: usize,
    pub terms: Vec<(Rational, Vec<u8>)>,
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).map(int).product()
}

impl BchSeries {
    fn generate(step: usize) -> BchSeries {
        let mut acc: HashMap<Vec<u8>, Rational> = HashMap::new();
        let mut blocks = Vec::new();
        Self::enumerate(step, &mut blocks, 0, &mut acc);
        let mut terms: Vec<(Rational, Vec<u8>)> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(w, c)| (c, w))
            .collect();
        terms.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.1.cmp(&b.1)));
        BchSeries { step, terms }
    }

    // Sequences of blocks X^r Y^s with r + s >= 1 and total length <= step.
    fn enumerate(
        step: usize,
        blocks: &mut Vec<(usize, usize)>,
        len: usize,
        acc: &mut HashMap<Vec<u8>, Rational>,
    ) {
        if !blocks.is_empty() {
            Self::record(blocks, len, acc);
        }
        for r in 0..=step - len {
            for s in 0..=step - len - r {
                if r + s == 0 {
                    continue;
                }
                blocks.push((r, s));
                Self::enumerate(step, blocks, len + r + s, acc);
                blocks.pop();
            }
        }
    }

    fn record(blocks: &[(usize, usize)], len: usize, acc: &mut HashMap<Vec<u8>, Rational>) {
        let n = blocks.len();
        let sign = if n % 2 == 1 { int(1) } else { int(-1) };
        let mut denom = int(n as i64) * int(len as i64);
        let mut word = Vec::with_capacity(len);
        for &(r, s) in blocks {
            denom *= factorial(r) * factorial(s);
            word.extend(std::iter::repeat_n(0u8, r));
            word.extend(std::iter::repeat_n(1u8, s));
        }
        let m = word.len();
        if m >= 2 && word[m - 1] == word[m - 2] {
            return;
        }
        let mut coeff = sign / denom;
        // [.., [y, x]] = -[.., [x, y]]
        if m >= 2 && word[m - 2] == 1 {
            word.swap(m - 2, m - 1);
            coeff = -coeff;
        }
        *acc.entry(word).or_insert_with(Rational::zero) += coeff;
    }

    /// Cached series for `step`; generated once and shared read-only.
    pub fn for_step(step: usize) -> Arc<BchSeries> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<BchSeries>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(s) = cache.read().expect("bch cache poisoned").get(&step) {
            return Arc::clone(s);
        }
        let mut w = cache.write().expect("bch cache poisoned");
        Arc::clone(
            w.entry(step)
                .or_insert_with(|| Arc::new(BchSeries::generate(step))),
        )
    }
}

/// Exponential coordinates on the simply connected group of a nilpotent
/// algebra, with the left-invariant frame precomputed.
#[derive(Debug, Clone)]
pub struct ExpCoordinates {
    algebra: LieAlgebra,
    step: usize,
    series: Arc<BchSeries>,
    /// Column `j` is the left-invariant field of `e_j` at `p`.
    frame: PolyMatrix,
    /// `d(L_q)^{-1}` at `q`: maps tangent vectors at `q` back to the algebra.
    coframe: PolyMatrix,
}

impl ExpCoordinates {
    pub fn new(algebra: &LieAlgebra) -> Result<Self> {
        let step = algebra.nilpotency_step().ok_or(Error::NotNilpotent)?;
        let series = BchSeries::for_step(step);
        let mut chart = ExpCoordinates {
            algebra: algebra.clone(),
            step,
            series,
            frame: PolyMatrix::zeros(0, 0),
            coframe: PolyMatrix::zeros(0, 0),
        };
        chart.frame = chart.compute_frame();
        chart.coframe = chart.compute_coframe();
        Ok(chart)
    }

    pub fn of_group(group: &SubRiemannianGroup) -> Result<Self> {
        Self::new(group.algebra())
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// BCH product over any coefficient ring.
    pub fn product_generic<T: CoeffRing>(&self, p: &[T], q: &[T]) -> Vec<T> {
        let mut suffix: HashMap<&[u8], Vec<T>> = HashMap::new();
        let mut out = vec![T::ring_zero(); self.dim()];
        for (c, word) in &self.series.terms {
            let v = self.nested(word, p, q, &mut suffix);
            for (o, x) in out.iter_mut().zip(&v) {
                if !x.is_ring_zero() {
                    *o = o.ring_add(&x.ring_scale(c));
                }
            }
        }
        out
    }

    fn nested<'w, T: CoeffRing>(
        &self,
        word: &'w [u8],
        p: &[T],
        q: &[T],
        memo: &mut HashMap<&'w [u8], Vec<T>>,
    ) -> Vec<T> {
        if word.len() == 1 {
            return if word[0] == 0 { p.to_vec() } else { q.to_vec() };
        }
        if let Some(v) = memo.get(word) {
            return v.clone();
        }
        let inner = self.nested(&word[1..], p, q, memo);
        let head = if word[0] == 0 { p } else { q };
        let v = self.algebra.bracket_generic(head, &inner);
        memo.insert(word, v.clone());
        v
    }

    pub fn product(&self, p: &[Rational], q: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim(), p.len())?;
        check_dim(self.dim(), q.len())?;
        Ok(self.product_generic(p, q))
    }

    pub fn inverse(&self, p: &[Rational]) -> Vec<Rational> {
        p.iter().map(|x| -x).collect()
    }

    /// Coordinates `x_1..x_n` as polynomials.
    pub fn coordinates(&self) -> Vec<Polynomial> {
        (0..self.dim()).map(Polynomial::var).collect()
    }

    /// Left translation `p -> a * p`.
    pub fn left_translation(&self, a: &[Rational]) -> PolyMap {
        let a: Vec<Polynomial> = a.iter().cloned().map(Polynomial::constant).collect();
        PolyMap::new(self.dim(), self.product_generic(&a, &self.coordinates()))
            .expect("translation stays in the chart")
    }

    /// Right translation `p -> p * a`.
    pub fn right_translation(&self, a: &[Rational]) -> PolyMap {
        let a: Vec<Polynomial> = a.iter().cloned().map(Polynomial::constant).collect();
        PolyMap::new(self.dim(), self.product_generic(&self.coordinates(), &a))
            .expect("translation stays in the chart")
    }

    // d/dt (x * t v) at t = 0, with t carried as the extra variable x_{n}.
    fn compute_frame(&self) -> PolyMatrix {
        let n = self.dim();
        let x = self.coordinates();
        let t = Polynomial::var(n);
        let cols = (0..n)
            .map(|j| {
                let mut tv = vec![Polynomial::zero(); n];
                tv[j] = t.clone();
                self.product_generic(&x, &tv)
                    .into_iter()
                    .map(|c| c.derivative(n).set_var(n, &Rational::zero()))
                    .collect()
            })
            .collect();
        PolyMatrix::from_columns(cols)
    }

    // d/ds ((-q) * (q + s w)) at s = 0.
    fn compute_coframe(&self) -> PolyMatrix {
        let n = self.dim();
        let q = self.coordinates();
        let minus_q: Vec<Polynomial> = q.iter().map(|c| -c).collect();
        let s = Polynomial::var(n);
        let cols = (0..n)
            .map(|j| {
                let mut moved = q.clone();
                moved[j] = &moved[j] + &s;
                self.product_generic(&minus_q, &moved)
                    .into_iter()
                    .map(|c| c.derivative(n).set_var(n, &Rational::zero()))
                    .collect()
            })
            .collect();
        PolyMatrix::from_columns(cols)
    }

    /// Matrix whose column `j` holds the coordinate components of the
    /// left-invariant field of `e_j`.
    pub fn frame(&self) -> &PolyMatrix {
        &self.frame
    }

    pub fn coframe(&self) -> &PolyMatrix {
        &self.coframe
    }

    /// Left-invariant vector field `p -> dL_p[x]`.
    pub fn left_invariant_field(&self, x: &[Rational]) -> Result<PolyVectorField> {
        check_dim(self.dim(), x.len())?;
        Ok(PolyVectorField::new(self.frame.mul_vec(x)))
    }

    pub fn basis_field(&self, j: usize) -> PolyVectorField {
        PolyVectorField::new(self.frame.column(j))
    }

    /// Applies the left-invariant field of `e_j` to `u`.
    pub fn apply_basis_field(&self, j: usize, u: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for c in 0..self.dim() {
            let coeff = self.frame.get(c, j);
            if !coeff.is_zero() {
                acc += &(coeff * &u.derivative(c));
            }
        }
        acc
    }

    /// Lie differential `DF(p)`, a `dim(target) x dim(self)` polynomial matrix
    /// with `DF(p)[v] = d/dt F(p)^{-1} F(p exp(tv))` at `t = 0`.
    pub fn lie_differential(&self, f: &PolyMap, target: &ExpCoordinates) -> Result<PolyMatrix> {
        check_dim(self.dim(), f.source_dim())?;
        check_dim(target.dim(), f.target_dim())?;
        let jac_cols: Vec<Vec<Polynomial>> = (0..self.dim())
            .map(|c| f.components().iter().map(|fc| fc.derivative(c)).collect())
            .collect();
        let jacobian = PolyMatrix::from_columns(jac_cols);
        let coframe_at_f = target.coframe.compose(f.components());
        Ok(coframe_at_f.mul(&jacobian).mul(&self.frame))
    }

    /// `D^2F(p)[e_j, e_k]`, returned as `d2[j][k]` (a target-algebra vector),
    /// computed as the left-invariant derivative along `e_k` of `DF(p)[e_j]`.
    pub fn second_lie_differential(
        &self,
        f: &PolyMap,
        target: &ExpCoordinates,
    ) -> Result<SecondDifferential> {
        let df = self.lie_differential(f, target)?;
        Ok(self.second_from_first(&df))
    }

    pub fn second_from_first(&self, df: &PolyMatrix) -> SecondDifferential {
        let n = self.dim();
        let entries = (0..n)
            .map(|j| {
                let col = df.column(j);
                (0..n)
                    .map(|k| col.iter().map(|c| self.apply_basis_field(k, c)).collect())
                    .collect()
            })
            .collect();
        SecondDifferential { entries }
    }
}

/// `D^2F(p)` as a bilinear array: `entries[j][k]` is `D^2F(p)[e_j, e_k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondDifferential {
    pub entries: Vec<Vec<Vec<Polynomial>>>,
}

impl SecondDifferential {
    pub fn is_zero(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .flatten()
            .all(Polynomial::is_zero)
    }

    /// `D^2F(p)[v, w]`.
    pub fn apply(&self, v: &[Rational], w: &[Rational]) -> Vec<Polynomial> {
        let m = self
            .entries
            .first()
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        let mut out = vec![Polynomial::zero(); m];
        for (j, vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            for (k, wk) in w.iter().enumerate() {
                if wk.is_zero() {
                    continue;
                }
                let c = vj * wk;
                for (o, e) in out.iter_mut().zip(&self.entries[j][k]) {
                    *o += &e.scale(&c);
                }
            }
        }
        out
    }

    /// `sum_{j,k} q[j][k] D^2F[e_j, e_k]`, i.e. the trace over an orthonormal
    /// horizontal frame when `q` is the cometric.
    pub fn contract(&self, q: &crate::linalg::Matrix) -> Vec<Polynomial> {
        let m = self
            .entries
            .first()
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        let mut out = vec![Polynomial::zero(); m];
        for j in 0..q.nrows() {
            for k in 0..q.ncols() {
                let c = &q[(j, k)];
                if c.is_zero() {
                    continue;
                }
                for (o, e) in out.iter_mut().zip(&self.entries[j][k]) {
                    *o += &e.scale(c);
                }
            }
        }
        out
    }
}

/// Vector field with polynomial coordinate components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVectorField {
    pub components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Self {
        PolyVectorField { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Derivative of `u` along the field.
    pub fn apply(&self, u: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for (c, comp) in self.components.iter().enumerate() {
            if !comp.is_zero() {
                acc += &(comp * &u.derivative(c));
            }
        }
        acc
    }

    /// Commutator `[self, other]` of vector fields.
    pub fn lie_bracket(&self, other: &PolyVectorField) -> PolyVectorField {
        PolyVectorField::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| &self.apply(b) - &other.apply(a))
                .collect(),
        )
    }

    pub fn scale_by(&self, f: &Polynomial) -> PolyVectorField {
        PolyVectorField::new(self.components.iter().map(|c| c * f).collect())
    }

    /// Values at a point.
    pub fn at(&self, p: &[Rational]) -> Vec<Rational> {
        self.components.iter().map(|c| c.eval(p)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }
}
