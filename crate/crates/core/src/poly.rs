//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Variables are indexed from zero internally and printed as `x1, x2, ...`.
//! Exponent vectors carry no trailing zeros, so equal polynomials always
//! have identical term maps regardless of how many variables were in play.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{format_rational, parse_rational, Rational};

/// Exponent vector with trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of variables up to the last one that occurs.
    pub fn width(&self) -> usize {
        self.0.len()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        Monomial(
            (0..n)
                .map(|i| self.exponent(i) + other.exponent(i))
                .collect(),
        )
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimal ring interface shared by rational scalars and polynomials, so the
/// bracket and BCH machinery can run on points and on symbolic coordinates.
pub trait CoeffRing: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn ring_zero() -> Self;
    fn is_ring_zero(&self) -> bool;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_scale(&self, q: &Rational) -> Self;

    fn ring_neg(&self) -> Self {
        self.ring_scale(&-Rational::one())
    }

    fn ring_sub(&self, other: &Self) -> Self {
        self.ring_add(&other.ring_neg())
    }
}

impl CoeffRing for Rational {
    fn ring_zero() -> Self {
        Zero::zero()
    }
    fn is_ring_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_scale(&self, q: &Rational) -> Self {
        self * q
    }
    fn ring_neg(&self) -> Self {
        -self
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        Self::term(Monomial::one(), q)
    }

    pub fn var(i: usize) -> Self {
        Self::term(Monomial::var(i), Rational::one())
    }

    pub fn term(m: Monomial, q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(m, q);
        }
        Polynomial { terms }
    }

    /// Linear form `sum_i coeffs[i] * x_i`.
    pub fn linear(coeffs: &[Rational]) -> Self {
        let mut p = Polynomial::zero();
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(i), c.clone());
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Returns the value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        self.is_constant().then(|| self.constant_term())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// One more than the highest variable index that occurs.
    pub fn nvars(&self) -> usize {
        self.terms.keys().map(Monomial::width).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, q: Rational) {
        if q.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(q);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += q;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, q: &Rational) -> Polynomial {
        if q.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.add_term(Monomial::new(exps), c * Rational::from_integer(e.into()));
        }
        out
    }

    /// Evaluates at a point; variables beyond `point.len()` must not occur.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert!(
            self.nvars() <= point.len(),
            "polynomial in {} variables evaluated at a point of length {}",
            self.nvars(),
            point.len()
        );
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    v *= num_traits::pow(point[i].clone(), e as usize);
                }
            }
            total += v;
        }
        total
    }

    /// Substitutes `subs[i]` for `x_i`.
    pub fn compose(&self, subs: &[Polynomial]) -> Polynomial {
        assert!(
            self.nvars() <= subs.len(),
            "composition needs {} substitutes, got {}",
            self.nvars(),
            subs.len()
        );
        let mut powers: Vec<Vec<Polynomial>> = vec![vec![Polynomial::one()]; subs.len()];
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut v = Polynomial::constant(c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &subs[i];
                    powers[i].push(next);
                }
                v = &v * &powers[i][e as usize];
            }
            out += &v;
        }
        out
    }

    /// Fixes variable `var` to `value`, leaving the others symbolic.
    pub fn set_var(&self, var: usize, value: &Rational) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] = 0;
            out.add_term(
                Monomial::new(exps),
                c * num_traits::pow(value.clone(), e as usize),
            );
        }
        out
    }

    /// Formats with custom variable names (index `i` printed as `names[i]`).
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                let name = names
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| format!("x{}", i + 1));
                match e {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            if factors.is_empty() {
                s.push_str(&format_rational(&a));
            } else {
                if !a.is_one() {
                    s.push_str(&format_rational(&a));
                    s.push('*');
                }
                s.push_str(&factors.join("*"));
            }
        }
        s
    }

    /// All monomials of total degree in `1..=max_degree` in `nvars` variables.
    pub fn monomials_up_to(nvars: usize, max_degree: u32) -> Vec<Polynomial> {
        let mut out = Vec::new();
        let mut exps = vec![0u32; nvars];
        fn rec(i: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Polynomial>) {
            if i == exps.len() {
                let m = Monomial::new(exps.clone());
                if m.degree() > 0 {
                    out.push(Polynomial::term(m, Rational::one()));
                }
                return;
            }
            for e in 0..=left {
                exps[i] = e;
                rec(i + 1, left - e, exps, out);
            }
            exps[i] = 0;
        }
        rec(0, max_degree, &mut exps, &mut out);
        out.sort_by(|a, b| a.terms.keys().cmp(b.terms.keys()));
        out
    }
}

impl CoeffRing for Polynomial {
    fn ring_zero() -> Self {
        Polynomial::zero()
    }
    fn is_ring_zero(&self) -> bool {
        Polynomial::is_zero(self)
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_scale(&self, q: &Rational) -> Self {
        Polynomial::scale(self, q)
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += &rhs;
        self
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        self -= &rhs;
        self
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl From<Rational> for Polynomial {
    fn from(q: Rational) -> Self {
        Polynomial::constant(q)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl FromStr for Polynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Parser::new(s).parse()
    }
}

impl serde::Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Recursive-descent parser for `+ - * / ^ ( )`, rational literals and
/// variables `x1, x2, ...`. Division is only allowed by constants.
struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            at: format!("column {} of {:?}", self.pos + 1, self.src),
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Polynomial> {
        let p = self.expr()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("unexpected trailing input");
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc += &self.term()?;
            } else if self.eat('-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                match d.as_constant() {
                    Some(q) if !q.is_zero() => acc = acc.scale(&q.recip()),
                    Some(_) => return self.err("division by zero"),
                    None => return self.err("division by a non-constant"),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let Ok(e) = self.src[start..self.pos].parse::<u32>() else {
                return self.err("expected a nonnegative integer exponent");
            };
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let p = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(p)
            }
            Some('x') => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                match self.src[start..self.pos].parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(Polynomial::var(i - 1)),
                    _ => self.err("variables are named x1, x2, ..."),
                }
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let q = parse_rational(&self.src[start..self.pos])?;
                Ok(Polynomial::constant(q))
            }
            Some(c) => self.err(format!("unexpected character {c:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Polynomial map `R^source_dim -> R^target_dim`, one component per target
/// coordinate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMap {
    source_dim: usize,
    components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(source_dim: usize, components: Vec<Polynomial>) -> Result<Self> {
        for c in &components {
            if c.nvars() > source_dim {
                return Err(Error::Invalid(format!(
                    "component {c} uses variables beyond x{source_dim}"
                )));
            }
        }
        Ok(PolyMap {
            source_dim,
            components,
        })
    }

    pub fn identity(n: usize) -> Self {
        PolyMap {
            source_dim: n,
            components: (0..n).map(Polynomial::var).collect(),
        }
    }

    /// The linear map `x -> m x`.
    pub fn linear(m: &crate::linalg::Matrix) -> Self {
        PolyMap {
            source_dim: m.ncols(),
            components: (0..m.nrows())
                .map(|i| Polynomial::linear(m.row(i)))
                .collect(),
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Polynomial> {
        self.components
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        crate::error::check_dim(self.source_dim, inner.target_dim())?;
        Ok(PolyMap {
            source_dim: inner.source_dim,
            components: self
                .components
                .iter()
                .map(|c| c.compose(&inner.components))
                .collect(),
        })
    }

    pub fn eval(&self, p: &[Rational]) -> Vec<Rational> {
        self.components.iter().map(|c| c.eval(p)).collect()
    }
}

/// Dense matrix of polynomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            data: vec![Polynomial::zero(); rows * cols],
        }
    }

    pub fn from_columns(cols: Vec<Vec<Polynomial>>) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols);
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), nrows, "ragged polynomial columns");
            for (i, p) in col.into_iter().enumerate() {
                m.data[i * ncols + j] = p;
            }
        }
        m
    }

    pub fn from_rational(m: &crate::linalg::Matrix) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.data[i * m.ncols() + j] = Polynomial::constant(m[(i, j)].clone());
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        self.data[i * self.cols + j] = p;
    }

    pub fn column(&self, j: usize) -> Vec<Polynomial> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> &[Polynomial] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Polynomial::is_zero)
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "polynomial matrix product dimension mismatch"
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn mul_rational(&self, rhs: &crate::linalg::Matrix) -> PolyMatrix {
        assert_eq!(
            self.cols,
            rhs.nrows(),
            "polynomial matrix product dimension mismatch"
        );
        let mut out = Self::zeros(self.rows, rhs.ncols());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols() {
                    if !rhs[(k, j)].is_zero() {
                        out.data[i * rhs.ncols() + j] += &a.scale(&rhs[(k, j)]);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Polynomial> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Polynomial::zero();
                for (j, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        acc += &self.get(i, j).scale(c);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul_poly_vec(&self, v: &[Polynomial]) -> Vec<Polynomial> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Polynomial::zero();
                for (j, p) in v.iter().enumerate() {
                    acc += &(self.get(i, j) * p);
                }
                acc
            })
            .collect()
    }

    /// Entrywise `self - c * rhs`.
    pub fn sub_scaled(&self, c: &Polynomial, rhs: &crate::linalg::Matrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (rhs.nrows(), rhs.ncols()));
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !rhs[(i, j)].is_zero() {
                    out.data[i * self.cols + j] -= &c.scale(&rhs[(i, j)]);
                }
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> PolyMatrix {
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn compose(&self, subs: &[Polynomial]) -> PolyMatrix {
        self.map(|p| p.compose(subs))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Polynomial)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, p)| (k / self.cols, k % self.cols, p))
    }

    pub fn eval(&self, p: &[Rational]) -> crate::linalg::Matrix {
        let rows = (0..self.rows)
            .map(|i| self.row(i).iter().map(|q| q.eval(p)).collect())
            .collect();
        crate::linalg::Matrix::from_rows(rows)
            .unwrap_or_else(|_| crate::linalg::Matrix::zeros(self.rows, self.cols))
    }
}
