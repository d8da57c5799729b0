//! JSON spec files. Rationals are written as strings (`"3/4"`) so nothing is
//! rounded, and all indices in files are 1-based.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{LieAlgebra, Metric, Polarization, SubRiemannianGroup};
use crate::error::{Error, Result};
use crate::heisenberg::{standard_pair, SymplecticForm};
use crate::linalg::{format_rational, parse_rational, Matrix, Rational};
use crate::operators::DifferentialOperator;
use crate::poly::{PolyMap, Polynomial};

fn parse_err(at: impl Into<String>, msg: impl ToString) -> Error {
    Error::Parse {
        at: at.into(),
        msg: msg.to_string(),
    }
}

/// Parses JSON text, reporting syntax errors by line and column.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| parse_err(format!("line {}, column {}", e.line(), e.column()), e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("spec types always serialize")
}

fn rational_at(s: &str, at: impl Fn() -> String) -> Result<Rational> {
    parse_rational(s).map_err(|e| parse_err(at(), e))
}

fn vector_at(v: &[String], at: &str) -> Result<Vec<Rational>> {
    v.iter()
        .enumerate()
        .map(|(k, s)| rational_at(s, || format!("{at}[{k}]")))
        .collect()
}

fn matrix_at(rows: &[Vec<String>], at: &str) -> Result<Matrix> {
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| vector_at(r, &format!("{at}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows).map_err(|e| parse_err(at, e))
}

pub fn vector_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn matrix_strings(m: &Matrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| vector_strings(r)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    /// `k -> c_{ij}^k`
    pub coeffs: BTreeMap<usize, String>,
}

/// A polarized Lie algebra with a scalar product on the polarization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
    #[serde(default)]
    pub polarization: Vec<Vec<String>>,
    /// Gram matrix on the polarization basis; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
}

impl GroupSpec {
    pub fn from_group(group: &SubRiemannianGroup, name: Option<String>) -> Self {
        let mut brackets: Vec<BracketSpec> = Vec::new();
        for (i, j, k, c) in group.algebra().canonical_entries() {
            match brackets.last_mut() {
                Some(b) if b.i == i + 1 && b.j == j + 1 => {
                    b.coeffs.insert(k + 1, format_rational(c));
                }
                _ => brackets.push(BracketSpec {
                    i: i + 1,
                    j: j + 1,
                    coeffs: BTreeMap::from([(k + 1, format_rational(c))]),
                }),
            }
        }
        GroupSpec {
            name,
            dim: group.dim(),
            brackets,
            polarization: group
                .polarization()
                .basis()
                .iter()
                .map(|v| vector_strings(v))
                .collect(),
            metric: Some(matrix_strings(group.metric().gram())),
        }
    }

    /// The bracket table as written, without checking the Lie axioms.
    pub fn algebra(&self) -> Result<LieAlgebra> {
        if self.dim == 0 {
            return Err(parse_err("dim", "must be positive"));
        }
        let mut entries = Vec::new();
        for (n, b) in self.brackets.iter().enumerate() {
            let at = |field: &str| format!("brackets[{n}].{field}");
            for (idx, field) in [(b.i, "i"), (b.j, "j")] {
                if idx == 0 || idx > self.dim {
                    return Err(parse_err(
                        at(field),
                        format!("index {idx} outside 1..={}", self.dim),
                    ));
                }
            }
            for (k, c) in &b.coeffs {
                if *k == 0 || *k > self.dim {
                    return Err(parse_err(
                        at("coeffs"),
                        format!("index {k} outside 1..={}", self.dim),
                    ));
                }
                let c = rational_at(c, || at(&format!("coeffs.{k}")))?;
                entries.push((b.i - 1, b.j - 1, k - 1, c));
            }
        }
        LieAlgebra::from_entries(self.dim, entries).map_err(|e| parse_err("brackets", e))
    }

    pub fn polarization(&self) -> Result<Polarization> {
        let basis = self
            .polarization
            .iter()
            .enumerate()
            .map(|(n, v)| vector_at(v, &format!("polarization[{n}]")))
            .collect::<Result<Vec<_>>>()?;
        Polarization::new(self.dim, basis).map_err(|e| parse_err("polarization", e))
    }

    pub fn metric(&self) -> Result<Metric> {
        match &self.metric {
            None => Ok(Metric::identity(self.polarization.len())),
            Some(rows) => {
                Metric::new(matrix_at(rows, "metric")?).map_err(|e| parse_err("metric", e))
            }
        }
    }

    pub fn to_group(&self) -> Result<SubRiemannianGroup> {
        SubRiemannianGroup::new(self.algebra()?, self.polarization()?, self.metric()?)
    }
}

/// A polynomial map in variables `x1..xn`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyMapSpec {
    pub source_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_dim: Option<usize>,
    pub components: Vec<String>,
}

impl PolyMapSpec {
    pub fn from_map(f: &PolyMap) -> Self {
        PolyMapSpec {
            source_dim: f.source_dim(),
            target_dim: Some(f.target_dim()),
            components: f.components().iter().map(ToString::to_string).collect(),
        }
    }

    pub fn to_map(&self) -> Result<PolyMap> {
        if let Some(t) = self.target_dim {
            if t != self.components.len() {
                return Err(parse_err(
                    "target_dim",
                    format!("{t} does not match {} components", self.components.len()),
                ));
            }
        }
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(k, s)| {
                s.parse::<Polynomial>()
                    .map_err(|e| parse_err(format!("components[{k}]"), e))
            })
            .collect::<Result<Vec<_>>>()?;
        PolyMap::new(self.source_dim, comps).map_err(|e| parse_err("components", e))
    }
}

/// A (form, metric) pair on a `2n`-dimensional space: either explicit
/// matrices, or `r` for the standard form with the metric `g_r`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeisenbergSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<String>>>,
}

impl HeisenbergSpec {
    pub fn radii(&self) -> Result<Option<Vec<Rational>>> {
        self.r.as_ref().map(|r| vector_at(r, "r")).transpose()
    }

    pub fn to_pair(&self) -> Result<(SymplecticForm, Metric)> {
        match (self.radii()?, &self.omega) {
            (Some(_), Some(_)) => Err(parse_err("r", "give either r or omega, not both")),
            (Some(r), None) => standard_pair(&r).map_err(|e| parse_err("r", e)),
            (None, Some(omega)) => {
                let omega = SymplecticForm::new(matrix_at(omega, "omega")?)
                    .map_err(|e| parse_err("omega", e))?;
                let metric = match &self.gram {
                    Some(g) => {
                        Metric::new(matrix_at(g, "gram")?).map_err(|e| parse_err("gram", e))?
                    }
                    None => Metric::identity(omega.dim()),
                };
                Ok((omega, metric))
            }
            (None, None) => Err(parse_err("r", "missing both r and omega")),
        }
    }
}

/// Two horizontal frames, each a list of algebra vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramesSpec {
    pub x: Vec<Vec<String>>,
    pub y: Vec<Vec<String>>,
}

impl FramesSpec {
    pub fn frames(&self) -> Result<(Vec<Vec<Rational>>, Vec<Vec<Rational>>)> {
        let read = |f: &[Vec<String>], name: &str| {
            f.iter()
                .enumerate()
                .map(|(n, v)| vector_at(v, &format!("{name}[{n}]")))
                .collect::<Result<Vec<_>>>()
        };
        Ok((read(&self.x, "x")?, read(&self.y, "y")?))
    }
}

/// One term `coefficient * d^alpha` of an operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorTerm {
    pub derivative: Vec<u32>,
    pub coefficient: Polynomial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub dim: usize,
    pub terms: Vec<OperatorTerm>,
}

impl OperatorSpec {
    pub fn from_operator(op: &DifferentialOperator) -> Self {
        let n = op.dim();
        let index = |slots: &[usize]| {
            let mut alpha = vec![0u32; n];
            for &s in slots {
                alpha[s] += 1;
            }
            alpha
        };
        let mut terms = Vec::new();
        for c in 0..n {
            for d in c..n {
                let s = &op.second_order[c][d];
                if !s.is_zero() {
                    let coefficient = if c == d {
                        s.clone()
                    } else {
                        s.scale(&Rational::from_integer(2.into()))
                    };
                    terms.push(OperatorTerm {
                        derivative: index(&[c, d]),
                        coefficient,
                    });
                }
            }
        }
        for (d, f) in op.first_order.iter().enumerate() {
            if !f.is_zero() {
                terms.push(OperatorTerm {
                    derivative: index(&[d]),
                    coefficient: f.clone(),
                });
            }
        }
        if !op.zero_order.is_zero() {
            terms.push(OperatorTerm {
                derivative: vec![0; n],
                coefficient: op.zero_order.clone(),
            });
        }
        OperatorSpec { dim: n, terms }
    }

    pub fn to_operator(&self) -> Result<DifferentialOperator> {
        let n = self.dim;
        let mut op = DifferentialOperator::zero(n);
        let half = Rational::new(1.into(), 2.into());
        for (t, term) in self.terms.iter().enumerate() {
            let at = format!("terms[{t}].derivative");
            if term.derivative.len() != n {
                return Err(parse_err(at, format!("expected {n} entries")));
            }
            let slots: Vec<usize> = term
                .derivative
                .iter()
                .enumerate()
                .flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize))
                .collect();
            match slots[..] {
                [] => op.zero_order += &term.coefficient,
                [d] => op.first_order[d] += &term.coefficient,
                [c, d] if c == d => op.second_order[c][c] += &term.coefficient,
                [c, d] => {
                    let h = term.coefficient.scale(&half);
                    op.second_order[c][d] += &h;
                    op.second_order[d][c] += &h;
                }
                _ => return Err(parse_err(at, "order above 2")),
            }
        }
        Ok(op)
    }
}

/// Human-readable listing, one derivative per line.
pub fn operator_text(op: &DifferentialOperator) -> String {
    let spec = OperatorSpec::from_operator(op);
    if spec.terms.is_empty() {
        return "0\n".into();
    }
    let mut out = String::new();
    for t in &spec.terms {
        let d: Vec<String> = t
            .derivative
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    format!("d{}", i + 1)
                } else {
                    format!("d{}^{e}", i + 1)
                }
            })
            .collect();
        let d = if d.is_empty() {
            "1".to_string()
        } else {
            d.join(" ")
        };
        out.push_str(&format!("{d}: {}\n", t.coefficient));
    }
    out
}
