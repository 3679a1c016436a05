//! Partition maps on `(ℂᴺ)^{⊗k}`, their twisted (signed) versions, and the
//! exact Gram / Weingarten tables built from the fixed-point vectors `ξ_π`.
//!
//! Tensor indices are encoded big-endian: the tuple `(i₁, …, i_k)` with values
//! in `0..N` sits at position `i₁ N^{k-1} + … + i_k`, so that the tensor
//! product of maps is the Kronecker product of their matrices.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Pow, Zero};

use crate::bounds::Bounds;
use crate::category::CategorySpec;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::matrix::Matrix;
use crate::partition::{ColorWord, Partition, Sign};

/// The matrix of `T_π` or `T̄_π` on `N`-dimensional legs: `N^l` rows, `N^k` columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorMap {
    n: usize,
    in_legs: usize,
    out_legs: usize,
    entries: Matrix<i64>,
}

fn check_cells(n: usize, legs: usize, bound: u128) -> Result<()> {
    let cells = (n as u128).checked_pow(legs as u32).unwrap_or(u128::MAX);
    if cells > bound {
        return Err(Error::CellBound { cells, bound });
    }
    Ok(())
}

fn index_of(values: impl Iterator<Item = usize>, n: usize) -> usize {
    values.fold(0, |acc, v| acc * n + v)
}

/// Decodes a big-endian index into `len` digits base `n`.
pub fn digits(mut index: usize, n: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

/// Calls `f` with every assignment of values `0..n` to the `blocks` blocks.
fn for_each_assignment(blocks: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut vals = vec![0usize; blocks];
    loop {
        f(&vals);
        let mut i = blocks;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            vals[i] += 1;
            if vals[i] < n {
                break;
            }
            vals[i] = 0;
        }
    }
}

impl TensorMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn in_legs(&self) -> usize {
        self.in_legs
    }

    pub fn out_legs(&self) -> usize {
        self.out_legs
    }

    pub fn entries(&self) -> &Matrix<i64> {
        &self.entries
    }

    /// Entry at output tuple `j`, input tuple `i` (zero-based values).
    pub fn entry(&self, j: &[usize], i: &[usize]) -> i64 {
        *self.entries.get(
            index_of(j.iter().copied(), self.n),
            index_of(i.iter().copied(), self.n),
        )
    }

    pub fn tensor(&self, other: &TensorMap) -> TensorMap {
        assert_eq!(self.n, other.n);
        TensorMap {
            n: self.n,
            in_legs: self.in_legs + other.in_legs,
            out_legs: self.out_legs + other.out_legs,
            entries: self.entries.kron(&other.entries),
        }
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &TensorMap) -> TensorMap {
        assert_eq!(self.n, then.n);
        TensorMap {
            n: self.n,
            in_legs: self.in_legs,
            out_legs: then.out_legs,
            entries: then.entries.matmul(&self.entries),
        }
    }

    pub fn transpose(&self) -> TensorMap {
        TensorMap {
            n: self.n,
            in_legs: self.out_legs,
            out_legs: self.in_legs,
            entries: self.entries.transpose(),
        }
    }

    pub fn scale(&self, factor: i64) -> TensorMap {
        TensorMap {
            entries: self.entries.scale(&factor),
            ..self.clone()
        }
    }
}

/// `T_π`: entry `(j, i)` is `δ_π(i, j)`.
pub fn t_pi(p: &Partition, n: usize, bounds: &Bounds) -> Result<TensorMap> {
    check_n(n)?;
    check_cells(n, p.num_legs(), bounds.max_cells)?;
    let (k, l) = (p.k(), p.l());
    let mut entries = Matrix::zeros(n.pow(l as u32), n.pow(k as u32));
    let labels = p.labels();
    for_each_assignment(p.block_count(), n, |vals| {
        let i = index_of(labels[..k].iter().map(|&b| vals[b as usize]), n);
        let j = index_of(labels[k..].iter().map(|&b| vals[b as usize]), n);
        entries.set(j, i, 1);
    });
    Ok(TensorMap {
        n,
        in_legs: k,
        out_legs: l,
        entries,
    })
}

/// `T̄_π` for even `π`: entry `(j, i)` is `ε(ker(i, j))` when the kernel is a
/// coarsening of `π`, zero otherwise.
pub fn t_pi_twisted(p: &Partition, n: usize, bounds: &Bounds) -> Result<TensorMap> {
    check_n(n)?;
    p.signature()?;
    check_cells(n, p.num_legs(), bounds.max_cells)?;
    let (k, l) = (p.k(), p.l());
    let mut entries = Matrix::zeros(n.pow(l as u32), n.pow(k as u32));
    let labels = p.labels();
    let mut signs = SignCache::default();
    for_each_assignment(p.block_count(), n, |vals| {
        let legs: Vec<usize> = labels.iter().map(|&b| vals[b as usize]).collect();
        let i = index_of(legs[..k].iter().copied(), n);
        let j = index_of(legs[k..].iter().copied(), n);
        entries.set(j, i, signs.kernel_sign(p, &legs).value());
    });
    Ok(TensorMap {
        n,
        in_legs: k,
        out_legs: l,
        entries,
    })
}

/// Memoized signatures of index kernels, keyed by the kernel's label string.
#[derive(Debug, Default)]
pub(crate) struct SignCache(HashMap<Vec<u16>, Sign>);

impl SignCache {
    /// Signature of the kernel of the leg values; the kernel must be even.
    pub(crate) fn kernel_sign(&mut self, shape: &Partition, legs: &[usize]) -> Sign {
        let kernel = Partition::from_labels(shape.upper().clone(), shape.lower().clone(), legs)
            .expect("leg count matches");
        *self
            .0
            .entry(kernel.labels().to_vec())
            .or_insert_with(|| kernel.signature().expect("coarsening of an even partition"))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `ξ_π` (or `ξ̄_π`) for a partition without upper legs, as a dense vector.
pub fn fixed_vector(p: &Partition, n: usize, twisted: bool, bounds: &Bounds) -> Result<Vec<i64>> {
    if p.k() != 0 {
        return Err(Error::InvalidPartition(format!(
            "fixed vectors need a partition without upper legs, got {p}"
        )));
    }
    let map = if twisted {
        t_pi_twisted(p, n, bounds)?
    } else {
        t_pi(p, n, bounds)?
    };
    Ok(map.entries.as_slice().to_vec())
}

/// Gram matrix, its rank and (once computed) a reflexive generalized inverse,
/// for the fixed-point basis `D(0, word)` of a category at a given `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeingartenTable {
    pub category: String,
    pub word: ColorWord,
    pub n: usize,
    pub twisted: bool,
    pub basis: Vec<Partition>,
    pub gram: Matrix<Rational>,
    pub wg: Option<Matrix<Rational>>,
    pub rank: usize,
}

pub fn n_pow(n: usize, e: usize) -> Rational {
    Rational::from_integer(BigInt::from(n).pow(e as u32))
}

/// Gram table of `cat` on the lower word `word` at dimension `n`.
///
/// Untwisted entries are `N^{|π∨σ|}`; twisted entries are inner products of
/// the signed vectors `ξ̄_π`, computed densely.
pub fn gram(
    cat: &CategorySpec,
    word: &ColorWord,
    n: usize,
    twisted: bool,
    bounds: &Bounds,
) -> Result<WeingartenTable> {
    check_n(n)?;
    let basis = cat.enumerate(&ColorWord::empty(), word, bounds.max_legs)?;
    gram_for_basis(cat.to_string(), word, basis, n, twisted, bounds)
}

pub fn gram_for_basis(
    category: String,
    word: &ColorWord,
    basis: Vec<Partition>,
    n: usize,
    twisted: bool,
    bounds: &Bounds,
) -> Result<WeingartenTable> {
    let size = basis.len();
    let gram = if twisted {
        let vectors = basis
            .iter()
            .map(|p| fixed_vector(p, n, true, bounds))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_fn(size, size, |a, b| {
            let dot: i64 = vectors[a].iter().zip(&vectors[b]).map(|(x, y)| x * y).sum();
            exact::rational(dot)
        })
    } else {
        Matrix::from_fn(size, size, |a, b| {
            n_pow(n, basis[a].join_block_count(&basis[b]))
        })
    };
    let rank = exact::rank(&gram);
    Ok(WeingartenTable {
        category,
        word: word.clone(),
        n,
        twisted,
        basis,
        gram,
        wg: None,
        rank,
    })
}

/// Fills in the Weingarten matrix.
pub fn weingarten(mut table: WeingartenTable) -> WeingartenTable {
    if table.wg.is_none() {
        table.wg = Some(exact::reflexive_generalized_inverse(&table.gram));
    }
    table
}

/// Dimension of the span of the `ξ_π`: the rank of the Gram matrix.
pub fn fix_dim(
    cat: &CategorySpec,
    word: &ColorWord,
    n: usize,
    twisted: bool,
    bounds: &Bounds,
) -> Result<usize> {
    Ok(gram(cat, word, n, twisted, bounds)?.rank)
}

const TABLE_HEADER: &str = "qwein-weingarten/1";

impl WeingartenTable {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.rank == self.size()
    }

    /// Versioned text form: header, scalar fields, basis partitions, then matrices as fractions.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TABLE_HEADER}");
        let _ = writeln!(out, "category {}", self.category);
        let _ = writeln!(out, "word {}", self.word);
        let _ = writeln!(out, "n {}", self.n);
        let _ = writeln!(out, "twisted {}", self.twisted);
        let _ = writeln!(out, "rank {}", self.rank);
        let _ = writeln!(out, "basis {}", self.basis.len());
        for p in &self.basis {
            let _ = writeln!(out, "{p}");
        }
        write_matrix(&mut out, "gram", &self.gram);
        match &self.wg {
            Some(w) => write_matrix(&mut out, "wg", w),
            None => {
                let _ = writeln!(out, "wg none");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<WeingartenTable> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))
        };
        if next("header")? != TABLE_HEADER {
            return Err(Error::Parse(format!("expected header '{TABLE_HEADER}'")));
        }
        let field = |line: &str, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| {
                    r.strip_prefix(' ')
                        .or(if r.is_empty() { Some("") } else { None })
                })
                .map(|r| r.to_string())
                .ok_or_else(|| Error::Parse(format!("expected '{key}' line, got '{line}'")))
        };
        let category = field(next("category")?, "category")?;
        let word: ColorWord = field(next("word")?, "word")?.parse()?;
        let n = parse_num(&field(next("n")?, "n")?)?;
        let twisted = match field(next("twisted")?, "twisted")?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(Error::Parse(format!("bad twisted flag '{other}'"))),
        };
        let rank = parse_num(&field(next("rank")?, "rank")?)?;
        let size = parse_num(&field(next("basis")?, "basis")?)?;
        let basis = (0..size)
            .map(|_| next("basis partition")?.parse::<Partition>())
            .collect::<Result<Vec<_>>>()?;
        let gram_line = next("gram")?;
        if gram_line != "gram" {
            return Err(Error::Parse(format!("expected 'gram', got '{gram_line}'")));
        }
        let gram = read_matrix(size, &mut next)?;
        let wg = match next("wg")? {
            "wg none" => None,
            "wg" => Some(read_matrix(size, &mut next)?),
            other => return Err(Error::Parse(format!("expected 'wg', got '{other}'"))),
        };
        Ok(WeingartenTable {
            category,
            word,
            n,
            twisted,
            basis,
            gram,
            wg,
            rank,
        })
    }
}

fn parse_num(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Parse(format!("expected a nonnegative integer, got '{s}'")))
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix<Rational>) {
    let _ = writeln!(out, "{name}");
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

fn read_matrix<'a>(
    size: usize,
    next: &mut impl FnMut(&str) -> Result<&'a str>,
) -> Result<Matrix<Rational>> {
    let mut data = Vec::with_capacity(size * size);
    for _ in 0..size {
        let line = next("matrix row")?;
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<Rational>()
                    .map_err(|_| Error::Parse(format!("bad fraction '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != size {
            return Err(Error::Parse(format!(
                "matrix row has {} entries, expected {size}",
                row.len()
            )));
        }
        data.extend(row);
    }
    Ok(Matrix::from_vec(size, size, data))
}

/// `Σ_{a ∈ A} Σ_{b ∈ B} c_a d_b W[a][b]` for sparse signed coefficient lists.
pub(crate) fn weighted_sum(
    w: &Matrix<Rational>,
    left: &[(usize, i64)],
    right: &[(usize, i64)],
) -> Rational {
    let mut total = Rational::zero();
    for &(a, ca) in left {
        for &(b, cb) in right {
            let entry = w.get(a, b);
            if entry.is_zero() {
                continue;
            }
            if ca * cb == 1 {
                total += entry;
            } else {
                total -= entry;
            }
        }
    }
    total
}
