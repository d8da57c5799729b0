//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sublaplace::algebra::examples;
use sublaplace::linalg::{int, rat};
use sublaplace::nilpotent::ExpCoordinates;
use sublaplace::operators::CoordinateGroup;
use sublaplace::{Matrix, PolyMap, Polynomial, Rational, SubRiemannianGroup};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_rat(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    rat(
        rng.gen_range(-max_num..=max_num),
        rng.gen_range(1..=max_den),
    )
}

pub fn rand_nonzero(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    loop {
        let q = rand_rat(rng, max_num, max_den);
        if !q.is_zero() {
            return q;
        }
    }
}

pub fn rand_vec(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| rand_rat(rng, 5, 4)).collect()
}

/// Rational orthogonal matrix `(I - S)(I + S)^{-1}` from a random skew `S`.
pub fn cayley(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let q = rand_rat(rng, 3, 3);
            s[(i, j)] = q.clone();
            s[(j, i)] = -q;
        }
    }
    let id = Matrix::identity(n);
    &(&id - &s)
        * &(&id + &s)
            .inverse()
            .expect("I + S is invertible for skew S")
}

pub fn rand_invertible(rng: &mut impl Rng, n: usize) -> Matrix {
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| rand_rat(rng, 3, 2)).collect())
            .collect();
        let m = Matrix::from_rows(rows).unwrap();
        if !m.determinant().is_zero() {
            return m;
        }
    }
}

/// Random rational positive-definite matrix `P^T P + I/4`.
pub fn rand_pd(rng: &mut impl Rng, n: usize) -> Matrix {
    let p = rand_invertible(rng, n);
    &(&p.transpose() * &p) + &Matrix::identity(n).scale(&rat(1, 4))
}

pub fn rand_poly(rng: &mut impl Rng, nvars: usize, degree: u32, terms: usize) -> Polynomial {
    let monomials = Polynomial::monomials_up_to(nvars, degree);
    let mut p = Polynomial::constant(rand_rat(rng, 3, 2));
    for _ in 0..terms {
        let m = &monomials[rng.gen_range(0..monomials.len())];
        p += &m.scale(&rand_nonzero(rng, 3, 3));
    }
    p
}

pub fn rand_map(rng: &mut impl Rng, source: usize, target: usize, degree: u32) -> PolyMap {
    PolyMap::new(
        source,
        (0..target)
            .map(|_| rand_poly(rng, source, degree, 3))
            .collect(),
    )
    .unwrap()
}

pub fn test_groups() -> Vec<(&'static str, SubRiemannianGroup)> {
    vec![
        ("H1", examples::heisenberg_group(1)),
        ("H2", examples::heisenberg_group(2)),
        ("Engel", examples::engel_group()),
    ]
}

pub fn coordinate_groups() -> Vec<(&'static str, CoordinateGroup)> {
    test_groups()
        .into_iter()
        .map(|(n, g)| (n, CoordinateGroup::new(g).unwrap()))
        .collect()
}

fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = int(1);
    m
}

/// Faithful matrix representation of the algebra by strictly upper
/// triangular matrices: `H^1` by 3x3 and Engel by 4x4.
pub struct MatrixModel {
    pub generators: Vec<Matrix>,
}

impl MatrixModel {
    pub fn heisenberg() -> Self {
        MatrixModel {
            generators: vec![unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)],
        }
    }

    pub fn engel() -> Self {
        MatrixModel {
            generators: vec![
                &unit(4, 0, 1) + &unit(4, 1, 2),
                unit(4, 2, 3),
                unit(4, 1, 3),
                unit(4, 0, 3),
            ],
        }
    }

    pub fn represent(&self, v: &[Rational]) -> Matrix {
        let n = self.generators[0].nrows();
        let mut m = Matrix::zeros(n, n);
        for (g, c) in self.generators.iter().zip(v) {
            m = &m + &g.scale(c);
        }
        m
    }

    /// Coordinates of a matrix in the span of the generators.
    pub fn coordinates(&self, m: &Matrix) -> Vec<Rational> {
        let n = m.nrows();
        let cols: Vec<Vec<Rational>> = self
            .generators
            .iter()
            .map(|g| {
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| g[(i, j)].clone())
                    .collect()
            })
            .collect();
        let a = Matrix::from_columns(&cols).unwrap();
        let b: Vec<Rational> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].clone())
            .collect();
        let x = (&a.transpose() * &a)
            .solve(&a.transpose().mul_vec(&b))
            .unwrap();
        assert_eq!(a.mul_vec(&x), b, "matrix outside the represented algebra");
        x
    }

    pub fn exp(&self, v: &[Rational]) -> Matrix {
        nilpotent_exp(&self.represent(v))
    }

    pub fn log(&self, m: &Matrix) -> Vec<Rational> {
        self.coordinates(&unipotent_log(m))
    }

    /// `log(exp(p) exp(q))`.
    pub fn product(&self, p: &[Rational], q: &[Rational]) -> Vec<Rational> {
        self.log(&(&self.exp(p) * &self.exp(q)))
    }
}

pub fn nilpotent_exp(n: &Matrix) -> Matrix {
    let size = n.nrows();
    let mut term = Matrix::identity(size);
    let mut out = Matrix::identity(size);
    for k in 1..=size {
        term = (&term * n).scale(&rat(1, k as i64));
        out = &out + &term;
    }
    out
}

pub fn unipotent_log(m: &Matrix) -> Matrix {
    let size = m.nrows();
    let n = m - &Matrix::identity(size);
    let mut power = Matrix::identity(size);
    let mut out = Matrix::zeros(size, size);
    for k in 1..=size {
        power = &power * &n;
        let sign = if k % 2 == 1 { 1 } else { -1 };
        out = &out + &power.scale(&rat(sign, k as i64));
    }
    out
}

/// Weights `w_k` with `f'(0) = sum w_k f(t_k)` for every polynomial `f` of
/// degree below the number of nodes.
pub fn derivative_weights(nodes: &[Rational]) -> Vec<Rational> {
    (0..nodes.len())
        .map(|k| {
            // L_k'(0) = sum_{m != k} prod_{l != k, m} (0 - t_l) / prod_{l != k} (t_k - t_l)
            let denom: Rational = (0..nodes.len())
                .filter(|&l| l != k)
                .fold(Rational::one(), |acc, l| acc * (&nodes[k] - &nodes[l]));
            let mut num = Rational::zero();
            for m in (0..nodes.len()).filter(|&m| m != k) {
                num += (0..nodes.len())
                    .filter(|&l| l != k && l != m)
                    .fold(Rational::one(), |acc, l| acc * -&nodes[l]);
            }
            num / denom
        })
        .collect()
}

pub fn nodes(count: usize) -> Vec<Rational> {
    (0..count)
        .map(|k| rat(k as i64 - (count as i64) / 2, 3))
        .collect()
}

fn axpy(acc: &mut [Rational], w: &Rational, v: &[Rational]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += w * x;
    }
}

fn scaled(v: &[Rational], t: &Rational) -> Vec<Rational> {
    v.iter().map(|x| x * t).collect()
}

/// `d/ds F(p)^{-1} F(p exp(s v))` at `s = 0`, by an exact stencil.
pub fn fd_lie_differential(
    source: &ExpCoordinates,
    target: &ExpCoordinates,
    f: &PolyMap,
    p: &[Rational],
    v: &[Rational],
    count: usize,
) -> Vec<Rational> {
    let ts = nodes(count);
    let ws = derivative_weights(&ts);
    let base_inv = target.inverse(&f.eval(p));
    let mut out = vec![Rational::zero(); target.dim()];
    for (t, w) in ts.iter().zip(&ws) {
        let moved = source.product(p, &scaled(v, t)).unwrap();
        let g = target.product(&base_inv, &f.eval(&moved)).unwrap();
        axpy(&mut out, w, &g);
    }
    out
}

/// `d/dt DF(p exp(t w))[v]` at `t = 0`, with both derivatives by stencils.
pub fn fd_second_lie_differential(
    source: &ExpCoordinates,
    target: &ExpCoordinates,
    f: &PolyMap,
    p: &[Rational],
    v: &[Rational],
    w: &[Rational],
    count: usize,
) -> Vec<Rational> {
    let ts = nodes(count);
    let ws = derivative_weights(&ts);
    let mut out = vec![Rational::zero(); target.dim()];
    for (t, wt) in ts.iter().zip(&ws) {
        let q = source.product(p, &scaled(w, t)).unwrap();
        let d = fd_lie_differential(source, target, f, &q, v, count);
        axpy(&mut out, wt, &d);
    }
    out
}
