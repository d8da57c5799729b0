//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use num_traits::{Signed, Zero};
use rand::Rng;

use sublaplace::algebra::examples;
use sublaplace::conformal::{analyze_commutation, b_vector, frames_equivalent, LinearMap};
use sublaplace::heisenberg::{
    build_isometry, isometry_decision, standard_pair, symplectic_spectrum, SymplecticForm,
};
use sublaplace::linalg::{int, rat, to_f64};
use sublaplace::operators::CoordinateGroup;
use sublaplace::{LieAlgebra, Matrix, Metric, PolyMap, Polynomial, Rational, SubRiemannianGroup};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const PROBE_DEGREE: usize = 4;

fn euclidean(n: usize) -> CoordinateGroup {
    CoordinateGroup::new(SubRiemannianGroup::euclidean(n).unwrap()).unwrap()
}

fn heisenberg(n: usize) -> CoordinateGroup {
    CoordinateGroup::new(examples::heisenberg_group(n)).unwrap()
}

fn engel() -> CoordinateGroup {
    CoordinateGroup::new(examples::engel_group()).unwrap()
}

fn map(source: usize, components: &[&str]) -> PolyMap {
    PolyMap::new(
        source,
        components
            .iter()
            .map(|c| c.parse().expect("polynomial"))
            .collect(),
    )
    .unwrap()
}

fn algebra_axioms() -> Outcome {
    let algebras = [
        ("H1", examples::heisenberg(1)),
        ("H2", examples::heisenberg(2)),
        ("Engel", examples::engel()),
        ("sl2", examples::sl2()),
    ];
    let mut r = rng(1);
    let mut rejected = 0;
    for (name, alg) in &algebras {
        ensure!(alg.validate().is_valid(), "{name} rejected");
        let dense = alg.dense();
        let n = alg.dim();
        for _ in 0..50 {
            let mut table = dense.clone();
            let (i, j, k) = (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..n));
            table[i][j][k] += rand_nonzero(&mut r, 5, 3);
            let mutated = LieAlgebra::from_dense(&table).unwrap();
            ensure!(
                !mutated.validate().is_valid(),
                "{name}: mutation at ({i},{j},{k}) accepted"
            );
            rejected += 1;
        }
    }
    Ok(format!(
        "4 algebras accepted, {rejected} mutations rejected"
    ))
}

fn bch_soundness() -> Outcome {
    let mut r = rng(2);
    for (name, g) in coordinate_groups() {
        let c = g.chart();
        let n = g.dim();
        for _ in 0..100 {
            let (p, q, s) = (
                rand_vec(&mut r, n),
                rand_vec(&mut r, n),
                rand_vec(&mut r, n),
            );
            let left = c.product(&c.product(&p, &q).unwrap(), &s).unwrap();
            let right = c.product(&p, &c.product(&q, &s).unwrap()).unwrap();
            ensure!(
                left == right,
                "{name}: associativity fails at {p:?}, {q:?}, {s:?}"
            );
            let minus: Vec<Rational> = p.iter().map(|x| -x).collect();
            ensure!(
                c.product(&p, &minus).unwrap().iter().all(Zero::is_zero),
                "{name}: p * (-p) != 0 at {p:?}"
            );
        }
    }
    Ok("300 triples".into())
}

fn field_brackets() -> Outcome {
    let mut pairs = 0;
    for (name, g) in coordinate_groups() {
        let c = g.chart();
        let n = g.dim();
        for i in 0..n {
            for j in 0..n {
                let lhs = c.basis_field(i).lie_bracket(&c.basis_field(j));
                let e = c
                    .algebra()
                    .bracket(
                        &sublaplace::algebra::basis_vector(n, i),
                        &sublaplace::algebra::basis_vector(n, j),
                    )
                    .unwrap();
                ensure!(
                    lhs == c.left_invariant_field(&e).unwrap(),
                    "{name}: [E{}, E{}] mismatch",
                    i + 1,
                    j + 1
                );
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} basis pairs"))
}

fn probe_monomials(n: usize) -> Vec<Polynomial> {
    Polynomial::monomials_up_to(n, 4)
}

fn left_invariance() -> Outcome {
    let mut r = rng(4);
    let mut checks = 0;
    for (name, g) in coordinate_groups() {
        let lap = g.sublaplacian();
        let monomials = probe_monomials(g.dim());
        let images: Vec<Polynomial> = monomials.iter().map(|u| lap.apply(u)).collect();
        for _ in 0..20 {
            let a = rand_vec(&mut r, g.dim());
            let la = g.chart().left_translation(&a);
            for (u, lu) in monomials.iter().zip(&images) {
                let lhs = lap.apply(&u.compose(la.components()));
                let rhs = lu.compose(la.components());
                ensure!(lhs == rhs, "{name}: residual {} for u = {u}", &lhs - &rhs);
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (monomial, g) pairs"))
}

fn dilation_covariance() -> Outcome {
    let mut checks = 0;
    for (name, g) in coordinate_groups() {
        let lap = g.sublaplacian();
        let strata = g.group().strata().expect("Carnot group");
        let monomials = probe_monomials(g.dim());
        for lambda in [rat(1, 2), int(2), int(3)] {
            let delta = PolyMap::linear(&strata.dilation(&lambda).unwrap());
            let l2 = &lambda * &lambda;
            for u in &monomials {
                let lhs = lap.apply(&u.compose(delta.components()));
                let rhs = lap.apply(u).compose(delta.components()).scale(&l2);
                ensure!(lhs == rhs, "{name}, lambda {lambda}: residual for u = {u}");
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} probes"))
}

fn quotient_map(n: usize) -> PolyMap {
    PolyMap::new(2 * n + 1, (0..2 * n).map(Polynomial::var).collect()).unwrap()
}

fn quotient_commutation() -> Outcome {
    for n in [1, 2] {
        let report = analyze_commutation(
            &quotient_map(n),
            &heisenberg(n),
            &euclidean(2 * n),
            PROBE_DEGREE,
        )
        .unwrap();
        ensure!(
            report.conformal,
            "H{n}: not conformal: {:?}",
            report.residuals
        );
        ensure!(
            report.lambda_sq == Some(Polynomial::one()),
            "H{n}: lambda^2 = {:?}",
            report.lambda_sq
        );
        let b = report.b.unwrap();
        ensure!(b.iter().all(Polynomial::is_zero), "H{n}: b = {b:?}");
        ensure!(report.residuals.is_empty(), "H{n}: residuals");
    }
    Ok("n = 1, 2".into())
}

/// Frame in algebra coordinates of `H^n` from polarization coordinates.
fn heisenberg_frame(p: &Matrix) -> Vec<Vec<Rational>> {
    (0..p.ncols())
        .map(|j| {
            let mut v = p.column(j);
            v.push(Rational::zero());
            v
        })
        .collect()
}

/// Metric for which the columns of `p` are orthonormal.
fn frame_metric(p: &Matrix) -> Metric {
    let inv = p.inverse().unwrap();
    Metric::new(&inv.transpose() * &inv).unwrap()
}

fn frame_equivalence() -> Outcome {
    let mut r = rng(7);
    for n in 1..=3 {
        let x = rand_invertible(&mut r, 2 * n);
        let y = &x * &cayley(&mut r, 2 * n);
        let eq = frames_equivalent(&heisenberg_frame(&x), &heisenberg_frame(&y)).unwrap();
        let a = eq.witness().ok_or("rotated frames rejected")?;
        ensure!(a * &a.transpose() == Matrix::identity(2 * n), "A A^T != Id");
    }
    let scaled = |r: &[i64]| {
        let d: Vec<Rational> = r.iter().chain(r).map(|&x| int(x)).collect();
        heisenberg_frame(&Matrix::diagonal(&d))
    };
    ensure!(
        !frames_equivalent(&scaled(&[1, 1]), &scaled(&[1, 2]))
            .unwrap()
            .equivalent,
        "(1,1) and (1,2) frames accepted"
    );
    let (o11, g11) = standard_pair(&[int(1), int(1)]).unwrap();
    let (o12, g12) = standard_pair(&[int(1), int(2)]).unwrap();
    let s11 = symplectic_spectrum(&o11, &g11, 1e-9).unwrap();
    let s12 = symplectic_spectrum(&o12, &g12, 1e-9).unwrap();
    ensure!(
        isometry_decision(&s11, &s12, 1e-9).is_none(),
        "(1,1) ~ (1,2) by spectrum"
    );

    let scales = [rat(1, 2), rat(3, 2), int(2)];
    let mut agreed = 0;
    for trial in 0..50 {
        let n = 1 + trial % 3;
        let x = rand_invertible(&mut r, 2 * n);
        let mut y = &x * &cayley(&mut r, 2 * n);
        if trial % 2 == 1 {
            y = y.scale(&scales[trial % 3]);
        }
        let verdict = frames_equivalent(&heisenberg_frame(&x), &heisenberg_frame(&y))
            .unwrap()
            .equivalent;
        let omega = SymplecticForm::standard(n);
        let s1 = symplectic_spectrum(&omega, &frame_metric(&x), 1e-9).unwrap();
        let s2 = symplectic_spectrum(&omega, &frame_metric(&y), 1e-9).unwrap();
        let isometric =
            isometry_decision(&s1, &s2, 1e-9).is_some_and(|rho| (rho - 1.0).abs() <= 1e-9);
        ensure!(
            verdict == isometric,
            "trial {trial}: frames {verdict}, spectrum {isometric}"
        );
        agreed += 1;
    }
    Ok(format!(
        "rotations, (1,1) vs (1,2), {agreed} random metrics agree"
    ))
}

fn homothetic_projection() -> Outcome {
    let mut r = rng(8);
    let mut positives = 0;
    let mut negatives = 0;
    for trial in 0..100 {
        let n = 2 + trial % 4;
        let k = r.gen_range(2..=n);
        let lambda = rat(r.gen_range(4..=64), 16);
        let sv = rand_invertible(&mut r, n);
        let sw = rand_invertible(&mut r, k);
        let mut core = Matrix::zeros(k, n);
        for i in 0..k {
            core[(i, i)] = lambda.clone();
        }
        let l =
            &(&(&sw.inverse().unwrap() * &cayley(&mut r, k)) * &core) * &(&cayley(&mut r, n) * &sv);
        let gv = Metric::new(&sv.transpose() * &sv).unwrap();
        let gw = Metric::new(&sw.transpose() * &sw).unwrap();
        let c = LinearMap::new(l.clone())
            .characterizations(&gv, &gw)
            .unwrap();
        let l2 = &lambda * &lambda;
        ensure!(
            c.all().iter().all(|v| v.as_ref() == Some(&l2)),
            "positive {trial}: expected {l2}, got {c:?}"
        );
        positives += 1;

        let mut bad = l;
        let (i, j) = (r.gen_range(0..k), r.gen_range(0..n));
        bad[(i, j)] += rand_nonzero(&mut r, 3, 7);
        let c = LinearMap::new(bad).characterizations(&gv, &gw).unwrap();
        ensure!(
            c.agree() && c.all().iter().all(|v| v.is_none()),
            "negative {trial}: {c:?}"
        );
        negatives += 1;
    }
    Ok(format!(
        "{positives} positives with exact lambda^2, {negatives} negatives"
    ))
}

fn spectrum_ground_truth() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = 1 + trial % 4;
        let mut radii: Vec<Rational> = (0..n).map(|_| rat(r.gen_range(4..=32), 8)).collect();
        radii.sort();
        let (omega, g) = standard_pair(&radii).unwrap();
        let s = symplectic_spectrum(&omega, &g, 1e-9).unwrap();
        for (got, want) in s.r.iter().zip(&radii) {
            let err = (got - to_f64(want)).abs();
            worst = worst.max(err);
            ensure!(err <= 1e-9, "r = {radii:?}: got {:?}", s.r);
        }
        let zeta = rand_nonzero(&mut r, 9, 4);
        let scaled = symplectic_spectrum(&omega.scale(&zeta).unwrap(), &g, 1e-9).unwrap();
        let factor = to_f64(&zeta.abs()).sqrt();
        for (a, b) in s.r.iter().zip(&scaled.r) {
            let err = (a * factor - b).abs();
            worst = worst.max(err);
            ensure!(err <= 1e-9, "scale law fails for zeta = {zeta}: {a} -> {b}");
        }
    }
    Ok(format!("50 radii vectors, max error {worst:.1e}"))
}

fn isometry_constructor() -> Outcome {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = 1 + trial % 3;
        let phi = rand_invertible(&mut r, 2 * n);
        let omega2 = {
            let s = rand_invertible(&mut r, 2 * n);
            SymplecticForm::new(&(&s.transpose() * SymplecticForm::standard(n).matrix()) * &s)
                .unwrap()
        };
        let g2 = Metric::new(rand_pd(&mut r, 2 * n)).unwrap();
        let rho = rat(r.gen_range(1..=8), r.gen_range(1..=4));
        let inv = phi.inverse().unwrap();
        let omega1 = SymplecticForm::new(
            (&(&inv.transpose() * omega2.matrix()) * &inv).scale(&(&rho * &rho)),
        )
        .unwrap();
        let g1 = Metric::new(&(&inv.transpose() * g2.gram()) * &inv).unwrap();
        let s1 = symplectic_spectrum(&omega1, &g1, 1e-9).unwrap();
        let s2 = symplectic_spectrum(&omega2, &g2, 1e-9).unwrap();
        let decided = isometry_decision(&s1, &s2, 1e-9).ok_or(format!("trial {trial}: no rho"))?;
        ensure!(
            (decided - to_f64(&rho)).abs() <= 1e-8 * decided.max(1.0),
            "trial {trial}: rho {decided} vs {rho}"
        );
        let iso = build_isometry(&omega1, &g1, &omega2, &g2, 1e-9).map_err(|e| e.to_string())?;
        let (dg, dw) = iso.residuals(&omega1, &g1, &omega2, &g2);
        worst = worst.max(dg).max(dw);
        ensure!(
            dg <= 1e-8 && dw <= 1e-8,
            "trial {trial}: residuals {dg:.2e}, {dw:.2e}"
        );
    }
    Ok(format!("50 pairs, max residual {worst:.1e}"))
}

fn analyzer_rejection() -> Outcome {
    let h1 = heisenberg(1);
    let h2 = heisenberg(2);
    let en = engel();
    let cases: Vec<(&str, PolyMap, &CoordinateGroup, CoordinateGroup)> = vec![
        ("H1->R2 square", map(3, &["x1^2", "x2"]), &h1, euclidean(2)),
        ("H1->R2 stretch", map(3, &["2*x1", "x2"]), &h1, euclidean(2)),
        (
            "H1->R2 shear",
            map(3, &["x1 + x2", "x2"]),
            &h1,
            euclidean(2),
        ),
        ("H1->R2 vertical", map(3, &["x1", "x3"]), &h1, euclidean(2)),
        (
            "H1->R2 product",
            map(3, &["x1*x2", "x1"]),
            &h1,
            euclidean(2),
        ),
        ("H1->R2 cubes", map(3, &["x1^3", "x2^3"]), &h1, euclidean(2)),
        (
            "H1->R2 mixed",
            map(3, &["x1 + x3", "x2"]),
            &h1,
            euclidean(2),
        ),
        (
            "H1->H1 tilt",
            map(3, &["x1", "x2", "x3 + x1"]),
            &h1,
            heisenberg(1),
        ),
        (
            "H1->H1 vertical stretch",
            map(3, &["x1", "x2", "2*x3"]),
            &h1,
            heisenberg(1),
        ),
        (
            "H1->H1 anisotropic",
            map(3, &["2*x1", "x2", "2*x3"]),
            &h1,
            heisenberg(1),
        ),
        (
            "H1->H1 swap",
            map(3, &["x2", "x1", "x3"]),
            &h1,
            heisenberg(1),
        ),
        (
            "H1->H1 square",
            map(3, &["x1^2", "x2", "x3"]),
            &h1,
            heisenberg(1),
        ),
        (
            "H2->H1 partial",
            map(5, &["x1", "x3", "x5"]),
            &h2,
            heisenberg(1),
        ),
        (
            "H2->R4 stretch",
            map(5, &["x1", "x2", "x3", "2*x4"]),
            &h2,
            euclidean(4),
        ),
        (
            "H2->R4 bend",
            map(5, &["x1", "x2", "x3", "x4 + x1^2"]),
            &h2,
            euclidean(4),
        ),
        ("H2->R2 stretch", map(5, &["x1", "2*x3"]), &h2, euclidean(2)),
        (
            "Engel->R2 bend",
            map(4, &["x1", "x2 + x1^2"]),
            &en,
            euclidean(2),
        ),
        (
            "Engel->Engel tilt",
            map(4, &["x1", "x2", "x3", "x4 + x1"]),
            &en,
            engel(),
        ),
        (
            "Engel->H1 skip",
            map(4, &["x1", "x2", "x4"]),
            &en,
            heisenberg(1),
        ),
        (
            "Engel->R2 stretch",
            map(4, &["3*x1", "x2"]),
            &en,
            euclidean(2),
        ),
    ];
    let mut rejected = 0;
    for (name, f, g, h) in &cases {
        let report = analyze_commutation(f, g, h, PROBE_DEGREE).unwrap();
        ensure!(!report.conformal, "{name} accepted");
        ensure!(
            !report.residuals.is_empty()
                && report.residuals.iter().all(|w| !w.polynomial.is_zero()),
            "{name}: no witness"
        );
        rejected += 1;
    }
    Ok(format!("{rejected} maps rejected with witnesses"))
}

fn rotation(r: &mut impl Rng) -> Matrix {
    cayley(r, 2)
}

/// Conformal automorphisms of the test groups, as algebra matrices.
fn automorphisms(name: &str, r: &mut impl Rng) -> Vec<Matrix> {
    match name {
        "H1" => {
            let q = rotation(r);
            let mut m = Matrix::identity(3);
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] = q[(i, j)].clone();
                }
            }
            vec![m, Matrix::diagonal(&[int(1), int(-1), int(-1)])]
        }
        "H2" => {
            // independent rotations of the (x_i, y_i) planes, and the pair swap
            let (q1, q2) = (rotation(r), rotation(r));
            let mut m = Matrix::identity(5);
            for (i, q) in [(0, &q1), (1, &q2)] {
                let idx = [i, i + 2];
                for a in 0..2 {
                    for b in 0..2 {
                        m[(idx[a], idx[b])] = q[(a, b)].clone();
                    }
                }
            }
            let swap = Matrix::from_i64(&[
                &[0, 1, 0, 0, 0],
                &[1, 0, 0, 0, 0],
                &[0, 0, 0, 1, 0],
                &[0, 0, 1, 0, 0],
                &[0, 0, 0, 0, 1],
            ]);
            vec![m, swap]
        }
        _ => vec![
            Matrix::diagonal(&[int(1), int(-1), int(-1), int(-1)]),
            Matrix::diagonal(&[int(-1), int(1), int(-1), int(1)]),
        ],
    }
}

fn check_b(
    name: &str,
    f: &PolyMap,
    g: &CoordinateGroup,
    h: &CoordinateGroup,
    affine: bool,
) -> Outcome {
    let report = analyze_commutation(f, g, h, PROBE_DEGREE).unwrap();
    ensure!(
        report.conformal,
        "{name}: not conformal: {:?}",
        report.residuals
    );
    let lambda_sq = report.lambda_sq.unwrap();
    let b = b_vector(f, &lambda_sq, g, h).map_err(|e| format!("{name}: {e}"))?;
    let p1 = g.pullback_operator(f, h).unwrap().p1;
    ensure!(b == p1, "{name}: b {b:?} != P1 {p1:?}");
    ensure!(Some(&b) == report.b.as_ref(), "{name}: analyzer b differs");
    if affine {
        ensure!(
            b.iter().all(Polynomial::is_zero),
            "{name}: affine map with b = {b:?}"
        );
    }
    Ok(String::new())
}

fn b_consistency() -> Outcome {
    let mut r = rng(12);
    let mut maps = 0;
    for (name, g) in coordinate_groups() {
        let strata = g.group().strata().unwrap();
        for lambda in [rat(1, 2), int(2), int(3)] {
            let delta = strata.dilation(&lambda).unwrap();
            check_b(
                &format!("{name} dilation {lambda}"),
                &PolyMap::linear(&delta),
                &g,
                &g,
                true,
            )?;
            maps += 1;
            for phi in automorphisms(name, &mut r) {
                let a = rand_vec(&mut r, g.dim());
                let f = PolyMap::linear(&(&delta * &phi))
                    .compose(&g.chart().left_translation(&a))
                    .unwrap();
                check_b(
                    &format!("{name} automorphism after translation"),
                    &f,
                    &g,
                    &g,
                    true,
                )?;
                maps += 1;
            }
        }
    }
    for n in [1, 2] {
        check_b(
            &format!("H{n} quotient"),
            &quotient_map(n),
            &heisenberg(n),
            &euclidean(2 * n),
            true,
        )?;
        maps += 1;
    }
    let cr = map(3, &["x3", "-1/4*x1^2 - 1/4*x2^2"]);
    check_b("CR map", &cr, &heisenberg(1), &euclidean(2), false)?;
    Ok(format!("{} maps", maps + 1))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "algebra axioms",
            limit: secs(1),
            run: algebra_axioms,
        },
        Criterion {
            id: 2,
            name: "BCH soundness",
            limit: secs(2),
            run: bch_soundness,
        },
        Criterion {
            id: 3,
            name: "vector-field brackets",
            limit: secs(1),
            run: field_brackets,
        },
        Criterion {
            id: 4,
            name: "left invariance of the sub-Laplacian",
            limit: secs(5),
            run: left_invariance,
        },
        Criterion {
            id: 5,
            name: "dilation covariance",
            limit: secs(5),
            run: dilation_covariance,
        },
        Criterion {
            id: 6,
            name: "quotient commutation",
            limit: secs(2),
            run: quotient_commutation,
        },
        Criterion {
            id: 7,
            name: "frame equivalence",
            limit: secs(5),
            run: frame_equivalence,
        },
        Criterion {
            id: 8,
            name: "homothetic projections",
            limit: secs(2),
            run: homothetic_projection,
        },
        Criterion {
            id: 9,
            name: "spectrum ground truth",
            limit: secs(3),
            run: spectrum_ground_truth,
        },
        Criterion {
            id: 10,
            name: "isometry constructor",
            limit: secs(3),
            run: isometry_constructor,
        },
        Criterion {
            id: 11,
            name: "analyzer rejection",
            limit: secs(3),
            run: analyzer_rejection,
        },
        Criterion {
            id: 12,
            name: "b-vector consistency",
            limit: secs(2),
            run: b_consistency,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {:>2} {} ({:.2} s, limit {} s): {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
