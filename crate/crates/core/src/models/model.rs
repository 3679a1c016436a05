//! Matrix models `π: C(G) → M_K(C(X))`, their transfer matrices and the
//! diagnostics built on them: truncated integrals, Cesàro limits and
//! stationarity.
//!
//! `(T_e)_{I,J} = ∫_X tr(U^{e₁}_{i₁j₁} ⋯ U^{e_p}_{i_pj_p})` with `tr` the
//! normalized trace, and `∫^r = (T_e^r)_{I,J}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::haar::{EasyGroupId, Factor, Haar, Monomial, Series};
use crate::linear_maps::digits;
use crate::matrix::Matrix;
use crate::partition::{Color, ColorWord};

use super::oracle::{ComplexRational, FiniteGroupOracle, GroupElement};
use super::sampler::{self, Classical, HaarSampler, McEstimate, Moments};

/// One point of a finite parameter space: its weight and the `KN × KN` block
/// matrix `[π(u_ij)(x)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePoint {
    pub weight: Rational,
    pub block: Matrix<ComplexRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatPoint {
    pub weight: f64,
    pub block: Matrix<Complex64>,
}

/// A coordinate `v_ij` of the `copy`-th independent Haar unitary, possibly conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub copy: usize,
    pub conj: bool,
}

impl Coordinate {
    fn conjugated(self) -> Coordinate {
        Coordinate {
            conj: !self.conj,
            ..self
        }
    }
}

/// `u_ij ↦ [[0, a_ij], [b_ij, 0]]` with `a`, `b` coordinates of independent
/// Haar unitaries in `U_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Antidiagonal {
    pub copies: usize,
    pub upper: Coordinate,
    pub lower: Coordinate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpace {
    /// Finitely many points with exact rational weights and exact entries.
    Finite(Vec<FinitePoint>),
    /// Finitely many points with floating point entries.
    Float(Vec<FloatPoint>),
    /// Polynomials in Haar unitary coordinates, integrated by Weingarten calculus.
    Haar(Antidiagonal),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixModel {
    pub name: String,
    pub k: usize,
    pub n: usize,
    pub space: ModelSpace,
}

/// Exact, floating point or Monte Carlo value.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelValue {
    Exact(ComplexRational),
    Float(Complex64),
    MonteCarlo(McEstimate),
}

impl ModelValue {
    pub fn is_exact(&self) -> bool {
        matches!(self, ModelValue::Exact(_))
    }

    pub fn to_f64(&self) -> Complex64 {
        match self {
            ModelValue::Exact(z) => complex_to_f64(z),
            ModelValue::Float(z) => *z,
            ModelValue::MonteCarlo(e) => e.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransferEntries {
    Exact(Matrix<ComplexRational>),
    Float(Matrix<Complex64>),
    MonteCarlo {
        mean: Matrix<Complex64>,
        stderr: Matrix<f64>,
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub word: ColorWord,
    pub n: usize,
    pub entries: TransferEntries,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.n.pow(self.word.len() as u32)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, TransferEntries::Exact(_))
    }

    pub fn to_f64(&self) -> Matrix<Complex64> {
        match &self.entries {
            TransferEntries::Exact(m) => m.map(complex_to_f64),
            TransferEntries::Float(m) => m.clone(),
            TransferEntries::MonteCarlo { mean, .. } => mean.clone(),
        }
    }

    /// `(T^r)_{I,J}`, by repeated row-vector products.
    pub fn power_entry(&self, r: usize, row: usize, col: usize) -> ModelValue {
        match &self.entries {
            TransferEntries::Exact(m) => ModelValue::Exact(power_row(m, r, row)[col].clone()),
            TransferEntries::Float(m) => ModelValue::Float(power_row(m, r, row)[col]),
            TransferEntries::MonteCarlo { mean, .. } => {
                ModelValue::Float(power_row(mean, r, row)[col])
            }
        }
    }
}

/// `e_row · M^r`.
fn power_row<T>(m: &Matrix<T>, r: usize, row: usize) -> Vec<T>
where
    T: Clone + Zero + One + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
{
    let d = m.rows();
    let mut v: Vec<T> = (0..d)
        .map(|i| if i == row { T::one() } else { T::zero() })
        .collect();
    for _ in 0..r {
        v = row_times(&v, m);
    }
    v
}

fn row_times<T>(v: &[T], m: &Matrix<T>) -> Vec<T>
where
    T: Clone + Zero + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
{
    let mut out = vec![T::zero(); m.cols()];
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (slot, y) in out.iter_mut().zip(m.row(i)) {
            if !y.is_zero() {
                *slot = slot.clone() + x.clone() * y.clone();
            }
        }
    }
    out
}

/// Outcome of a Cesàro average `(1/k) Σ_{r≤k} ∫^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroReport {
    pub value: Complex64,
    /// Mean at depth `k − 1`.
    pub previous: Complex64,
    pub depth: usize,
    pub tol: f64,
    pub converged: bool,
    pub exact_transfer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordVerdict {
    pub word: ColorWord,
    pub exact: bool,
    /// `max |(T² − T)_{IJ}|`.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub model: String,
    pub words: Vec<WordVerdict>,
    pub pass: bool,
}

pub fn complex_to_f64(z: &ComplexRational) -> Complex64 {
    Complex64::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

fn real(q: Rational) -> ComplexRational {
    Complex::new(q, Rational::zero())
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `(plain, starred)` `K × K` images of every coordinate, indexed `i·N + j`.
struct Blocks<T> {
    plain: Vec<Matrix<T>>,
    star: Vec<Matrix<T>>,
}

fn split_blocks<T: Clone>(
    block: &Matrix<T>,
    k: usize,
    n: usize,
    conj: impl Fn(&T) -> T,
) -> Blocks<T> {
    let mut plain = Vec::with_capacity(n * n);
    let mut star = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (i * k..(i + 1) * k).collect();
            let cols: Vec<usize> = (j * k..(j + 1) * k).collect();
            let b = block.select(&rows, &cols);
            star.push(b.transpose().map(&conj));
            plain.push(b);
        }
    }
    Blocks { plain, star }
}

/// Unnormalized trace of the product of the selected blocks.
fn trace_product<T>(
    blocks: &Blocks<T>,
    n: usize,
    rows: &[usize],
    cols: &[usize],
    stars: &[bool],
) -> T
where
    T: Clone + Zero + One + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
{
    let mut acc: Option<Matrix<T>> = None;
    for ((&i, &j), &s) in rows.iter().zip(cols).zip(stars) {
        let b = if s {
            &blocks.star[i * n + j]
        } else {
            &blocks.plain[i * n + j]
        };
        acc = Some(match acc {
            None => b.clone(),
            Some(a) => a.matmul(b),
        });
    }
    match acc {
        Some(m) => m.trace(),
        None => T::zero(),
    }
}

fn stars_of(word: &ColorWord) -> Vec<bool> {
    word.as_slice().iter().map(|&c| c == Color::Black).collect()
}

impl MatrixModel {
    /// Validates weights (nonnegative, summing to exactly 1), block sizes and
    /// exact unitarity of every block matrix.
    pub fn finite(
        name: impl Into<String>,
        k: usize,
        n: usize,
        points: Vec<FinitePoint>,
    ) -> Result<Self> {
        check_shape(k, n)?;
        if points.is_empty() {
            return Err(Error::InvalidParameter(
                "a model needs at least one point".into(),
            ));
        }
        let mut total = Rational::zero();
        for p in &points {
            if p.weight < Rational::zero() {
                return Err(Error::InvalidParameter(format!(
                    "negative weight {}",
                    p.weight
                )));
            }
            if p.block.rows() != k * n || p.block.cols() != k * n {
                return Err(Error::InvalidParameter(format!(
                    "point block is {}x{}, expected {}x{}",
                    p.block.rows(),
                    p.block.cols(),
                    k * n,
                    k * n
                )));
            }
            if !is_unitary_exact(&p.block) {
                return Err(Error::InvalidParameter(
                    "block matrix [pi(u_ij)] is not unitary at some point".into(),
                ));
            }
            total += &p.weight;
        }
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(MatrixModel {
            name: name.into(),
            k,
            n,
            space: ModelSpace::Finite(points),
        })
    }

    /// `K = 1` model evaluating `u_ij` at the given matrices.
    pub fn points(
        name: impl Into<String>,
        n: usize,
        points: Vec<(Rational, Matrix<ComplexRational>)>,
    ) -> Result<Self> {
        let points = points
            .into_iter()
            .map(|(weight, block)| FinitePoint { weight, block })
            .collect();
        MatrixModel::finite(name, 1, n, points)
    }

    /// Uniform point model on a list of group elements.
    pub fn group_points(
        name: impl Into<String>,
        n: usize,
        elements: &[GroupElement],
    ) -> Result<Self> {
        let w = Rational::new(BigInt::one(), BigInt::from(elements.len().max(1)));
        MatrixModel::points(
            name,
            n,
            elements.iter().map(|g| (w.clone(), g.matrix())).collect(),
        )
    }

    /// The counit `u_ij ↦ δ_ij`.
    pub fn counit(n: usize) -> Result<Self> {
        MatrixModel::points(
            format!("counit:{n}"),
            n,
            vec![(Rational::one(), Matrix::identity(n))],
        )
    }

    /// Point evaluations at the generators `(12)` and `(123)` of `S_3`, weight 1/2 each.
    pub fn s3_two_generator() -> Result<Self> {
        let transposition = GroupElement::permutation(vec![1, 0, 2]);
        let cycle = GroupElement::permutation(vec![1, 2, 0]);
        MatrixModel::group_points("s3points", 3, &[transposition, cycle])
    }

    /// Uniform model on every element of an enumerated finite group.
    pub fn finite_group(oracle: &FiniteGroupOracle) -> Result<Self> {
        MatrixModel::group_points(format!("group:{oracle}"), oracle.n(), oracle.elements())
    }

    /// `u_ij ↦ [[0, v_ij], [v̄_ij, 0]]` over `X = U_N`.
    pub fn on_star(n: usize) -> Result<Self> {
        check_model_n(n)?;
        Ok(MatrixModel {
            name: format!("ONstar:{n}"),
            k: 2,
            n,
            space: ModelSpace::Haar(Antidiagonal {
                copies: 1,
                upper: Coordinate {
                    copy: 0,
                    conj: false,
                },
                lower: Coordinate {
                    copy: 0,
                    conj: true,
                },
            }),
        })
    }

    /// `u_ij ↦ [[0, v_ij], [w_ij, 0]]` over `X = U_N × U_N`.
    pub fn un_star(n: usize) -> Result<Self> {
        check_model_n(n)?;
        Ok(MatrixModel {
            name: format!("UNstar:{n}"),
            k: 2,
            n,
            space: ModelSpace::Haar(Antidiagonal {
                copies: 2,
                upper: Coordinate {
                    copy: 0,
                    conj: false,
                },
                lower: Coordinate {
                    copy: 1,
                    conj: false,
                },
            }),
        })
    }

    /// The two-projection magic matrix of size 4, with rank-one projections
    /// in `C²` at angle `θ`.
    pub fn s4plus(theta: f64) -> Result<Self> {
        let blocks = s4plus_magic(theta)?;
        let mut block = Matrix::zeros(8, 8);
        for i in 0..4 {
            for j in 0..4 {
                let b = &blocks[i * 4 + j];
                for r in 0..2 {
                    for c in 0..2 {
                        block.set(2 * i + r, 2 * j + c, *b.get(r, c));
                    }
                }
            }
        }
        Ok(MatrixModel {
            name: format!("s4plus:{theta}"),
            k: 2,
            n: 4,
            space: ModelSpace::Float(vec![FloatPoint { weight: 1.0, block }]),
        })
    }

    pub fn known_ids() -> &'static str {
        "counit:<N>, s3points, s3group, group:<S:N|H:N|K<s>:N>, ONstar:<N>, UNstar:<N>, s4plus:<theta>"
    }

    /// Builds a model from its identifier.
    pub fn from_id(id: &str, bounds: &Bounds) -> Result<Self> {
        let id = id.trim();
        let unknown = || Error::UnknownId {
            kind: "model",
            given: id.to_string(),
            known: MatrixModel::known_ids().into(),
        };
        let parse_n = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad dimension in model '{id}'")))
        };
        match id {
            "s3points" => return MatrixModel::s3_two_generator(),
            "s3group" => {
                let oracle =
                    FiniteGroupOracle::new(super::oracle::OracleGroup::Symmetric, 3, bounds)?;
                return MatrixModel::finite_group(&oracle);
            }
            _ => {}
        }
        if let Some(rest) = id.strip_prefix("group:") {
            let (g, n) = super::oracle::parse_oracle_id(rest)?;
            return MatrixModel::finite_group(&FiniteGroupOracle::new(g, n, bounds)?);
        }
        let (name, arg) = id.split_once(':').ok_or_else(unknown)?;
        match name {
            "counit" => MatrixModel::counit(parse_n(arg)?),
            "ONstar" => MatrixModel::on_star(parse_n(arg)?),
            "UNstar" => MatrixModel::un_star(parse_n(arg)?),
            "s4plus" => MatrixModel::s4plus(
                arg.parse()
                    .map_err(|_| Error::Parse(format!("bad angle in model '{id}'")))?,
            ),
            _ => Err(unknown()),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.space, ModelSpace::Float(_))
    }

    fn check_dense(&self, p: usize, bounds: &Bounds) -> Result<usize> {
        let d = (self.n as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
        let cells = d.saturating_mul(d);
        if cells > bounds.max_cells {
            return Err(Error::CellBound {
                cells,
                bound: bounds.max_cells,
            });
        }
        Ok(d as usize)
    }

    fn check_monomial(&self, m: &Monomial, haar: &Haar) -> Result<()> {
        if m.degree() > haar.bounds().max_degree {
            return Err(Error::DegreeBound {
                degree: m.degree(),
                bound: haar.bounds().max_degree,
            });
        }
        m.check_indices(self.n)
    }

    /// `(tr ⊗ ∫_X) π(m)` evaluated directly, without assembling `T_e`.
    pub fn direct_integral(&self, haar: &Haar, m: &Monomial) -> Result<ModelValue> {
        self.check_monomial(m, haar)?;
        let rows: Vec<usize> = m.rows().iter().map(|x| x - 1).collect();
        let cols: Vec<usize> = m.cols().iter().map(|x| x - 1).collect();
        let stars = stars_of(&m.word());
        match &self.space {
            ModelSpace::Finite(points) => {
                let prepared = self.prepare_exact(points);
                Ok(ModelValue::Exact(
                    self.exact_entry(&prepared, &rows, &cols, &stars),
                ))
            }
            ModelSpace::Float(points) => {
                let prepared = self.prepare_float(points);
                Ok(ModelValue::Float(
                    self.float_entry(&prepared, &rows, &cols, &stars),
                ))
            }
            ModelSpace::Haar(a) => Ok(ModelValue::Exact(
                self.haar_entry(haar, a, &rows, &cols, &stars)?,
            )),
        }
    }

    fn prepare_exact(&self, points: &[FinitePoint]) -> Vec<(Rational, Blocks<ComplexRational>)> {
        points
            .iter()
            .map(|p| {
                (
                    p.weight.clone(),
                    split_blocks(&p.block, self.k, self.n, |z| z.conj()),
                )
            })
            .collect()
    }

    fn prepare_float(&self, points: &[FloatPoint]) -> Vec<(f64, Blocks<Complex64>)> {
        points
            .iter()
            .map(|p| {
                (
                    p.weight,
                    split_blocks(&p.block, self.k, self.n, |z| z.conj()),
                )
            })
            .collect()
    }

    fn exact_entry(
        &self,
        prepared: &[(Rational, Blocks<ComplexRational>)],
        rows: &[usize],
        cols: &[usize],
        stars: &[bool],
    ) -> ComplexRational {
        if rows.is_empty() {
            return ComplexRational::one();
        }
        let mut total = ComplexRational::zero();
        for (w, blocks) in prepared {
            let t = trace_product(blocks, self.n, rows, cols, stars);
            if !t.is_zero() {
                total += t * real(w.clone());
            }
        }
        total * real(Rational::new(BigInt::one(), BigInt::from(self.k)))
    }

    fn float_entry(
        &self,
        prepared: &[(f64, Blocks<Complex64>)],
        rows: &[usize],
        cols: &[usize],
        stars: &[bool],
    ) -> Complex64 {
        if rows.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        prepared
            .iter()
            .map(|(w, blocks)| trace_product(blocks, self.n, rows, cols, stars) * *w)
            .sum::<Complex64>()
            / self.k as f64
    }

    /// The two diagonal words of a product of antidiagonal blocks, as lists of
    /// coordinates; empty when the product has zero trace.
    fn antidiagonal_terms(a: &Antidiagonal, stars: &[bool]) -> Vec<Vec<Coordinate>> {
        let p = stars.len();
        if p % 2 == 1 {
            return Vec::new();
        }
        let pairs: Vec<(Coordinate, Coordinate)> = stars
            .iter()
            .map(|&s| {
                if s {
                    (a.lower.conjugated(), a.upper.conjugated())
                } else {
                    (a.upper, a.lower)
                }
            })
            .collect();
        let top = pairs
            .iter()
            .enumerate()
            .map(|(x, &(up, low))| if x % 2 == 0 { up } else { low })
            .collect();
        let bottom = pairs
            .iter()
            .enumerate()
            .map(|(x, &(up, low))| if x % 2 == 0 { low } else { up })
            .collect();
        vec![top, bottom]
    }

    fn haar_entry(
        &self,
        haar: &Haar,
        a: &Antidiagonal,
        rows: &[usize],
        cols: &[usize],
        stars: &[bool],
    ) -> Result<ComplexRational> {
        if rows.is_empty() {
            return Ok(ComplexRational::one());
        }
        let group = EasyGroupId::new(Series::U, self.n)?;
        let mut total = Rational::zero();
        for term in Self::antidiagonal_terms(a, stars) {
            let mut value = Rational::one();
            for copy in 0..a.copies {
                let factors = term
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.copy == copy)
                    .map(|(x, c)| Factor {
                        row: rows[x] + 1,
                        col: cols[x] + 1,
                        star: c.conj,
                    })
                    .collect();
                value *= haar.integrate(&group, &Monomial::new(factors))?;
                if value.is_zero() {
                    break;
                }
            }
            total += value;
        }
        Ok(real(total / int(self.k as i64)))
    }

    /// `T_e` for the word `e` (`∘` plain, `•` starred), exact whenever the
    /// space allows it.
    pub fn transfer_matrix(&self, haar: &Haar, word: &ColorWord) -> Result<TransferMatrix> {
        let p = word.len();
        let d = self.check_dense(p, haar.bounds())?;
        if p > haar.bounds().max_degree {
            return Err(Error::DegreeBound {
                degree: p,
                bound: haar.bounds().max_degree,
            });
        }
        let stars = stars_of(word);
        let n = self.n;
        let entries = match &self.space {
            ModelSpace::Finite(points) => {
                let prepared = self.prepare_exact(points);
                TransferEntries::Exact(assemble(d, |row, col| {
                    Ok(self.exact_entry(&prepared, &digits(row, n, p), &digits(col, n, p), &stars))
                })?)
            }
            ModelSpace::Float(points) => {
                let prepared = self.prepare_float(points);
                TransferEntries::Float(assemble(d, |row, col| {
                    Ok(self.float_entry(&prepared, &digits(row, n, p), &digits(col, n, p), &stars))
                })?)
            }
            ModelSpace::Haar(a) => TransferEntries::Exact(assemble(d, |row, col| {
                self.haar_entry(haar, a, &digits(row, n, p), &digits(col, n, p), &stars)
            })?),
        };
        Ok(TransferMatrix {
            word: word.clone(),
            n,
            entries,
        })
    }

    /// Monte Carlo `T_e` for Haar-parametrized models, with per-entry stderr.
    pub fn transfer_matrix_mc(
        &self,
        word: &ColorWord,
        seed: u64,
        samples: usize,
        bounds: &Bounds,
    ) -> Result<TransferMatrix> {
        let ModelSpace::Haar(a) = &self.space else {
            return Err(Error::NonIntegrable(format!(
                "model {} has a finite parameter space; use the exact transfer matrix",
                self.name
            )));
        };
        let p = word.len();
        let d = self.check_dense(p, bounds)?;
        let n = self.n;
        let terms = Self::antidiagonal_terms(a, &stars_of(word));
        let indices: Vec<Vec<usize>> = (0..d).map(|x| digits(x, n, p)).collect();
        let sampler = HaarSampler::new(Classical::Unitary, n, seed)?;
        let k = self.k as f64;
        let chunks = sampler.map_chunks(
            samples,
            || vec![Moments::default(); d * d],
            |acc, rng| {
                let us: Vec<Matrix<Complex64>> =
                    (0..a.copies).map(|_| sampler.sample(rng)).collect();
                for (row, ri) in indices.iter().enumerate() {
                    for (col, ci) in indices.iter().enumerate() {
                        let mut v = if p == 0 {
                            Complex64::new(k, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        for term in &terms {
                            v += term.iter().enumerate().fold(
                                Complex64::new(1.0, 0.0),
                                |z, (x, c)| {
                                    let e = *us[c.copy].get(ri[x], ci[x]);
                                    z * if c.conj { e.conj() } else { e }
                                },
                            );
                        }
                        acc[row * d + col].push(v / k);
                    }
                }
            },
        );
        let mut total = vec![Moments::default(); d * d];
        for chunk in &chunks {
            for (t, c) in total.iter_mut().zip(chunk) {
                t.merge(c);
            }
        }
        let est: Vec<McEstimate> = total.iter().map(Moments::estimate).collect();
        Ok(TransferMatrix {
            word: word.clone(),
            n,
            entries: TransferEntries::MonteCarlo {
                mean: Matrix::from_fn(d, d, |r, c| est[r * d + c].mean),
                stderr: Matrix::from_fn(d, d, |r, c| est[r * d + c].stderr),
                samples,
            },
        })
    }

    fn monomial_position(&self, m: &Monomial) -> (usize, usize) {
        let index = |xs: Vec<usize>| xs.iter().fold(0, |acc, &x| acc * self.n + (x - 1));
        (index(m.rows()), index(m.cols()))
    }

    /// `∫^r m = (T_e^r)_{I,J}`.
    pub fn truncated_integral(&self, haar: &Haar, r: usize, m: &Monomial) -> Result<ModelValue> {
        if r == 0 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        self.check_monomial(m, haar)?;
        let t = self.transfer_matrix(haar, &m.word())?;
        let (row, col) = self.monomial_position(m);
        Ok(t.power_entry(r, row, col))
    }

    /// Cesàro mean of `∫^1 … ∫^depth`, in floating point.
    pub fn cesaro_integral(
        &self,
        haar: &Haar,
        m: &Monomial,
        depth: usize,
        tol: f64,
    ) -> Result<CesaroReport> {
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        self.check_monomial(m, haar)?;
        let t = self.transfer_matrix(haar, &m.word())?;
        let (row, col) = self.monomial_position(m);
        let tf = t.to_f64();
        let mut v: Vec<Complex64> = (0..tf.rows())
            .map(|i| Complex64::new(if i == row { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut previous = Complex64::new(f64::NAN, f64::NAN);
        let mut value = Complex64::new(0.0, 0.0);
        for r in 1..=depth {
            v = row_times(&v, &tf);
            sum += v[col];
            previous = value;
            value = sum / r as f64;
        }
        let converged = depth >= 2 && (value - previous).norm() < tol;
        Ok(CesaroReport {
            value,
            previous,
            depth,
            tol,
            converged,
            exact_transfer: t.is_exact(),
        })
    }

    /// `T_e² = T_e` for every word of length `1..=p_max`: exact zero residual
    /// on exact paths, `≤ tol` otherwise.
    pub fn stationarity_check(
        &self,
        haar: &Haar,
        p_max: usize,
        tol: f64,
    ) -> Result<StationarityReport> {
        let mut words = Vec::new();
        for p in 1..=p_max {
            for word in ColorWord::all_colored(p) {
                let t = self.transfer_matrix(haar, &word)?;
                let verdict = match &t.entries {
                    TransferEntries::Exact(m) => {
                        let diff = &m.matmul(m) - m;
                        let residual = diff
                            .iter()
                            .map(|z| complex_to_f64(z).norm())
                            .fold(0.0, f64::max);
                        let pass = diff.iter().all(|z| z.is_zero());
                        WordVerdict {
                            word,
                            exact: true,
                            residual,
                            pass,
                        }
                    }
                    _ => {
                        let m = t.to_f64();
                        let diff = &m.matmul(&m) - &m;
                        let residual = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
                        WordVerdict {
                            word,
                            exact: false,
                            residual,
                            pass: residual <= tol,
                        }
                    }
                };
                words.push(verdict);
            }
        }
        let pass = words.iter().all(|w| w.pass);
        Ok(StationarityReport {
            model: self.name.clone(),
            words,
            pass,
        })
    }

    /// Largest `|(B*B − 1)_{ij}|` of the block matrix over the finite points,
    /// or over `samples` Haar draws for Haar-parametrized models.
    pub fn unitarity_residual(&self, seed: u64, samples: usize) -> Result<f64> {
        Ok(match &self.space {
            ModelSpace::Finite(points) => points
                .iter()
                .map(|p| sampler::unitarity_residual(&p.block.map(complex_to_f64)))
                .fold(0.0, f64::max),
            ModelSpace::Float(points) => points
                .iter()
                .map(|p| sampler::unitarity_residual(&p.block))
                .fold(0.0, f64::max),
            ModelSpace::Haar(a) => {
                let s = HaarSampler::new(Classical::Unitary, self.n, seed)?;
                let mut rng = s.chunk_rng(0);
                let mut worst = 0.0f64;
                for _ in 0..samples {
                    let us: Vec<Matrix<Complex64>> =
                        (0..a.copies).map(|_| s.sample(&mut rng)).collect();
                    worst = worst.max(sampler::unitarity_residual(
                        &self.antidiagonal_block(a, &us),
                    ));
                }
                worst
            }
        })
    }

    /// `[π(u_ij)]` at a concrete parameter `us` of a Haar-parametrized model.
    pub fn antidiagonal_block(
        &self,
        a: &Antidiagonal,
        us: &[Matrix<Complex64>],
    ) -> Matrix<Complex64> {
        let n = self.n;
        let coord = |c: Coordinate, i: usize, j: usize| {
            let z = *us[c.copy].get(i, j);
            if c.conj {
                z.conj()
            } else {
                z
            }
        };
        Matrix::from_fn(2 * n, 2 * n, |r, c| {
            let (i, j) = (r / 2, c / 2);
            match (r % 2, c % 2) {
                (0, 1) => coord(a.upper, i, j),
                (1, 0) => coord(a.lower, i, j),
                _ => Complex64::new(0.0, 0.0),
            }
        })
    }

    /// Serializes the model; finite exact models are written point by point,
    /// others by generator id.
    pub fn to_text(&self) -> String {
        let mut out = String::from("qwein-model/1\n");
        match &self.space {
            ModelSpace::Finite(points) => {
                out.push_str(&format!("name {}\nK {}\nN {}\n", self.name, self.k, self.n));
                for p in points {
                    out.push_str(&format!("point {}\n", p.weight));
                    for r in 0..p.block.rows() {
                        let row: Vec<String> = p.block.row(r).iter().map(format_complex).collect();
                        out.push_str(&row.join(" "));
                        out.push('\n');
                    }
                }
            }
            _ => out.push_str(&format!("generator {}\n", self.name)),
        }
        out
    }

    pub fn from_text(text: &str, bounds: &Bounds) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let bad = |why: String| Error::Parse(format!("model text: {why}"));
        if lines.next() != Some("qwein-model/1") {
            return Err(bad("missing 'qwein-model/1' header".into()));
        }
        let first = lines.next().ok_or_else(|| bad("empty model".into()))?;
        if let Some(id) = first.strip_prefix("generator ") {
            return MatrixModel::from_id(id, bounds);
        }
        let field = |line: Option<&str>, key: &str| -> Result<String> {
            line.and_then(|l| l.strip_prefix(key))
                .map(|v| v.trim().to_string())
                .ok_or_else(|| bad(format!("expected '{key}<value>'")))
        };
        let name = field(Some(first), "name ")?;
        let k: usize = field(lines.next(), "K ")?
            .parse()
            .map_err(|_| bad("bad K".into()))?;
        let n: usize = field(lines.next(), "N ")?
            .parse()
            .map_err(|_| bad("bad N".into()))?;
        check_shape(k, n)?;
        let size = k * n;
        let mut points = Vec::new();
        let mut lines = lines.peekable();
        while let Some(line) = lines.next() {
            let rest = line
                .strip_prefix("point ")
                .ok_or_else(|| bad(format!("expected 'point <weight>', got '{line}'")))?;
            let mut parts = rest.split_whitespace();
            let weight: Rational = parts
                .next()
                .ok_or_else(|| bad("missing weight".into()))?
                .parse()
                .map_err(|_| bad(format!("bad weight in '{line}'")))?;
            let block = if parts.next() == Some("perm") {
                if k != 1 {
                    return Err(bad("'perm' points need K = 1".into()));
                }
                let perm: Vec<usize> = parts
                    .map(|x| x.trim_matches(',').parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(format!("bad permutation in '{line}'")))?;
                if perm.len() != n || perm.iter().any(|&x| x == 0 || x > n) {
                    return Err(bad(format!("permutation must list {n} images in 1..={n}")));
                }
                GroupElement::permutation(perm.iter().map(|x| x - 1).collect()).matrix()
            } else {
                let mut data = Vec::with_capacity(size * size);
                for _ in 0..size {
                    let row = lines
                        .next()
                        .ok_or_else(|| bad("truncated point block".into()))?;
                    let entries: Vec<ComplexRational> = row
                        .split_whitespace()
                        .map(parse_complex)
                        .collect::<Result<_>>()?;
                    if entries.len() != size {
                        return Err(bad(format!(
                            "row '{row}' has {} entries, expected {size}",
                            entries.len()
                        )));
                    }
                    data.extend(entries);
                }
                Matrix::from_vec(size, size, data)
            };
            points.push(FinitePoint { weight, block });
        }
        MatrixModel::finite(name, k, n, points)
    }
}

impl fmt::Display for MatrixModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

fn check_shape(k: usize, n: usize) -> Result<()> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("K and N must be at least 1".into()));
    }
    Ok(())
}

fn check_model_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "N must be at least 2, got {n}"
        )));
    }
    Ok(())
}

fn assemble<T: Send + Clone>(
    d: usize,
    entry: impl Fn(usize, usize) -> Result<T> + Sync,
) -> Result<Matrix<T>> {
    let rows: Vec<Vec<T>> = (0..d)
        .into_par_iter()
        .map(|row| {
            (0..d)
                .map(|col| entry(row, col))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Matrix::from_vec(d, d, rows.into_iter().flatten().collect()))
}

fn is_unitary_exact(b: &Matrix<ComplexRational>) -> bool {
    let adjoint = b.transpose().map(|z| z.conj());
    adjoint.matmul(b) == Matrix::identity(b.rows())
}

/// The `4 × 4` magic matrix `[[p, 1−p, 0, 0], [1−p, p, 0, 0], [0, 0, q, 1−q], [0, 0, 1−q, q]]`
/// with `p`, `q` the projections onto `(1, 0)` and `(cos θ, sin θ)`; blocks
/// are listed row-major.
pub fn s4plus_magic(theta: f64) -> Result<Vec<Matrix<Complex64>>> {
    if !(0.0..std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, pi), got {theta}"
        )));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let proj = |v: [f64; 2]| Matrix::from_fn(2, 2, |r, s| c(v[r] * v[s]));
    let p = proj([1.0, 0.0]);
    let q = proj([theta.cos(), theta.sin()]);
    let id: Matrix<Complex64> = Matrix::identity(2);
    let zero: Matrix<Complex64> = Matrix::zeros(2, 2);
    let (pc, qc) = (&id - &p, &id - &q);
    Ok(vec![
        p.clone(),
        pc.clone(),
        zero.clone(),
        zero.clone(),
        pc,
        p,
        zero.clone(),
        zero.clone(),
        zero.clone(),
        zero.clone(),
        q.clone(),
        qc.clone(),
        zero.clone(),
        zero,
        qc,
        q,
    ])
}

/// Entries are self-adjoint idempotents and every row and column sums to 1.
pub fn is_magic(blocks: &[Matrix<Complex64>], n: usize, tol: f64) -> bool {
    if blocks.len() != n * n || n == 0 {
        return false;
    }
    let k = blocks[0].rows();
    let close = |a: &Matrix<Complex64>, b: &Matrix<Complex64>| {
        a.rows() == b.rows()
            && a.cols() == b.cols()
            && a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol)
    };
    let id: Matrix<Complex64> = Matrix::identity(k);
    let projections = blocks.iter().all(|b| {
        b.is_square()
            && b.rows() == k
            && close(&b.matmul(b), b)
            && close(&b.transpose().map(|z| z.conj()), b)
    });
    let sum = |idx: &mut dyn Iterator<Item = usize>| {
        idx.fold(Matrix::zeros(k, k), |acc: Matrix<Complex64>, x| {
            &acc + &blocks[x]
        })
    };
    projections
        && (0..n).all(|i| close(&sum(&mut (0..n).map(|j| i * n + j)), &id))
        && (0..n).all(|j| close(&sum(&mut (0..n).map(|i| i * n + j)), &id))
}

/// `a/b`, `a/b+c/di`, `c/di`, `i` or `-i`.
pub fn parse_complex(s: &str) -> Result<ComplexRational> {
    let bad = || Error::Parse(format!("bad complex rational '{s}'"));
    let t = s.trim();
    let q = |x: &str| Rational::from_str(x).map_err(|_| bad());
    let Some(body) = t.strip_suffix('i') else {
        return Ok(real(q(t)?));
    };
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(_, c)| c == '+' || c == '-')
        .map(|(x, _)| x)
        .last();
    let (re, im) = match split {
        Some(x) => (q(&body[..x])?, &body[x..]),
        None => (Rational::zero(), body),
    };
    let im = match im {
        "" | "+" => Rational::one(),
        "-" => -Rational::one(),
        other => q(other.strip_prefix('+').unwrap_or(other))?,
    };
    Ok(Complex::new(re, im))
}

pub fn format_complex(z: &ComplexRational) -> String {
    if z.im.is_zero() {
        return z.re.to_string();
    }
    if z.re.is_zero() {
        return format!("{}i", z.im);
    }
    if z.im < Rational::zero() {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn m(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn exact(v: ModelValue) -> ComplexRational {
        match v {
            ModelValue::Exact(z) => z,
            other => panic!("expected an exact value, got {other:?}"),
        }
    }

    #[test]
    fn s3_group_transfer_is_uniform() {
        let haar = Haar::default();
        let model = MatrixModel::from_id("s3group", &Bounds::default()).unwrap();
        let t = model.transfer_matrix(&haar, &ColorWord::white(1)).unwrap();
        let TransferEntries::Exact(e) = t.entries else {
            panic!()
        };
        assert!(e.iter().all(|z| *z == real(ratio(1, 3))));
    }

    #[test]
    fn counit_is_stationary() {
        let haar = Haar::default();
        let model = MatrixModel::counit(3).unwrap();
        let report = model.stationarity_check(&haar, 2, 1e-10).unwrap();
        assert!(report.pass);
        assert_eq!(report.words.len(), 6);
        assert_eq!(
            exact(
                model
                    .truncated_integral(&haar, 7, &m("u(1,1) u(2,2)"))
                    .unwrap()
            ),
            real(ratio(1, 1))
        );
    }

    #[test]
    fn s3_points_are_not_stationary() {
        let haar = Haar::default();
        let model = MatrixModel::s3_two_generator().unwrap();
        let report = model.stationarity_check(&haar, 1, 1e-10).unwrap();
        assert!(!report.pass);
        let v1 = exact(model.truncated_integral(&haar, 1, &m("v(1,1)")).unwrap());
        let v100 = exact(model.truncated_integral(&haar, 100, &m("v(1,1)")).unwrap());
        assert_eq!(v1, real(ratio(0, 1)));
        assert_ne!(v1, v100);
        let fixed = exact(model.truncated_integral(&haar, 1, &m("v(3,3)")).unwrap());
        assert_eq!(fixed, real(ratio(1, 2)));
    }

    #[test]
    fn on_star_examples() {
        let haar = Haar::default();
        let model = MatrixModel::on_star(2).unwrap();
        let report = model.stationarity_check(&haar, 2, 0.0).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(
            exact(model.direct_integral(&haar, &m("u(1,1) u(1,1)")).unwrap()),
            real(ratio(1, 2))
        );
        assert!(model.unitarity_residual(5, 50).unwrap() < 1e-12);
    }

    #[test]
    fn magic_checks() {
        for theta in [0.0, 0.3, 1.0, 2.5] {
            assert!(is_magic(&s4plus_magic(theta).unwrap(), 4, 1e-12));
        }
        let mut blocks = s4plus_magic(0.7).unwrap();
        blocks[0] = blocks[0].scale(&Complex64::new(2.0, 0.0));
        assert!(!is_magic(&blocks, 4, 1e-12));
        assert!(s4plus_magic(4.0).is_err());
        assert!(
            MatrixModel::s4plus(0.4)
                .unwrap()
                .unitarity_residual(0, 0)
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn complex_text() {
        for s in ["1/2", "-3", "1/2+1/3i", "2-i", "-1/4i", "i", "1-5/7i"] {
            let z = parse_complex(s).unwrap();
            assert_eq!(parse_complex(&format_complex(&z)).unwrap(), z);
        }
        assert_eq!(
            parse_complex("2-i").unwrap(),
            Complex::new(ratio(2, 1), ratio(-1, 1))
        );
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn model_text_round_trip() {
        let b = Bounds::default();
        let model = MatrixModel::s3_two_generator().unwrap();
        assert_eq!(MatrixModel::from_text(&model.to_text(), &b).unwrap(), model);
        let perm =
            "qwein-model/1\nname s3points\nK 1\nN 3\npoint 1/2 perm 2 1 3\npoint 1/2 perm 2 3 1\n";
        assert_eq!(MatrixModel::from_text(perm, &b).unwrap(), model);
        let gen = MatrixModel::on_star(3).unwrap();
        assert_eq!(MatrixModel::from_text(&gen.to_text(), &b).unwrap(), gen);
        let skewed = "qwein-model/1\nname x\nK 1\nN 1\npoint 1/3\n1\n";
        assert!(MatrixModel::from_text(skewed, &b).is_err());
        let nonunitary = "qwein-model/1\nname x\nK 1\nN 1\npoint 1\n2\n";
        assert!(MatrixModel::from_text(nonunitary, &b).is_err());
    }
}
