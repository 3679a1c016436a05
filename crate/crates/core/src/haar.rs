//! Haar-state integration of coordinate monomials over easy quantum groups.
//!
//! For a monomial `u_{i₁j₁}^{e₁} ⋯ u_{i_kj_k}^{e_k}` the colored word `e` selects
//! the fixed-point basis `D(0, e)` of the group's category, and the integral is
//! `Σ_{π,σ} δ_π(i) δ_σ(j) W(π, σ)` with `W` a generalized inverse of the Gram
//! matrix. The sum only depends on the kernels of `i` and `j`, so values are
//! memoized per kernel pair inside each cached table.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::bounds::Bounds;
use crate::category::{CategorySpec, Modulus, NamedCategory};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::linear_maps::{self, weighted_sum, SignCache, WeingartenTable};
use crate::partition::{canonical_labels, Color, ColorWord, Partition};

/// Series of easy quantum groups with a known category of partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    O,
    OStar,
    OPlus,
    U,
    UStar,
    UPlus,
    S,
    SPlus,
    H,
    HStar,
    HPlus,
    K,
    KStar,
    KPlus,
    /// `O_{N,S}`, the intermediate family between `O_N` and `U_N`.
    OS(Modulus),
}

const SERIES_IDS: [(&str, Series); 14] = [
    ("O", Series::O),
    ("O*", Series::OStar),
    ("O+", Series::OPlus),
    ("U", Series::U),
    ("U*", Series::UStar),
    ("U+", Series::UPlus),
    ("S", Series::S),
    ("S+", Series::SPlus),
    ("H", Series::H),
    ("H*", Series::HStar),
    ("H+", Series::HPlus),
    ("K", Series::K),
    ("K*", Series::KStar),
    ("K+", Series::KPlus),
];

impl Series {
    pub fn category(&self) -> NamedCategory {
        match self {
            Series::O => NamedCategory::P2,
            Series::OStar => NamedCategory::P2Star,
            Series::OPlus => NamedCategory::NC2,
            Series::U => NamedCategory::CP2,
            Series::UStar => NamedCategory::CP2Star,
            Series::UPlus => NamedCategory::CNC2,
            Series::S => NamedCategory::P,
            Series::SPlus => NamedCategory::NC,
            Series::H => NamedCategory::PEven,
            Series::HStar => NamedCategory::PEvenStar,
            Series::HPlus => NamedCategory::NCEven,
            Series::K => NamedCategory::CPEven,
            Series::KStar => NamedCategory::CPEvenStar,
            Series::KPlus => NamedCategory::CNCEven,
            Series::OS(s) => NamedCategory::P2ModS(*s),
        }
    }

    /// Self-adjoint coordinates: colors carry no information.
    pub fn is_orthogonal_type(&self) -> bool {
        matches!(
            self,
            Series::O
                | Series::OStar
                | Series::OPlus
                | Series::S
                | Series::SPlus
                | Series::H
                | Series::HStar
                | Series::HPlus
        )
    }

    pub fn admits_twist(&self) -> bool {
        matches!(self, Series::O | Series::OStar | Series::U | Series::UStar)
    }

    pub fn id(&self) -> String {
        match self {
            Series::OS(s) => format!("OS{s}"),
            other => SERIES_IDS
                .iter()
                .find(|(_, s)| s == other)
                .map(|(id, _)| id.to_string())
                .expect("every fixed series has an id"),
        }
    }
}

/// A concrete easy quantum group: series, dimension `N`, and twist flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EasyGroupId {
    pub series: Series,
    pub n: usize,
    pub twisted: bool,
}

impl EasyGroupId {
    pub fn new(series: Series, n: usize) -> Result<Self> {
        Self::build(series, n, false)
    }

    pub fn twisted(series: Series, n: usize) -> Result<Self> {
        Self::build(series, n, true)
    }

    fn build(series: Series, n: usize, twisted: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if twisted && !series.admits_twist() {
            return Err(Error::TwistUnsupported(series.id()));
        }
        Ok(EasyGroupId { series, n, twisted })
    }

    pub fn category(&self) -> CategorySpec {
        CategorySpec::Named(self.series.category())
    }

    pub fn is_orthogonal_type(&self) -> bool {
        self.series.is_orthogonal_type()
    }

    pub fn known_ids() -> String {
        let mut ids: Vec<String> = SERIES_IDS.iter().map(|(id, _)| id.to_string()).collect();
        ids.push("OS<S>".into());
        format!(
            "{} (as <series>:<N>, with a trailing ~ on O, O*, U, U* for the twist)",
            ids.join(", ")
        )
    }
}

impl fmt::Display for EasyGroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let twist = if self.twisted { "~" } else { "" };
        write!(f, "{}{}:{}", self.series.id(), twist, self.n)
    }
}

impl FromStr for EasyGroupId {
    type Err = Error;

    /// `<series>[~]:<N>`, e.g. `O+:3`, `U*~:2`, `OS3:4`, `OSinf:2`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "group",
            given: s.to_string(),
            known: EasyGroupId::known_ids(),
        };
        let (name, n) = s.trim().rsplit_once(':').ok_or_else(unknown)?;
        let n: usize = n
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension in group '{s}'")))?;
        let (name, twisted) = match name.strip_suffix('~') {
            Some(base) => (base, true),
            None => (name, false),
        };
        let series = if let Some(m) = name.strip_prefix("OS") {
            Series::OS(m.parse()?)
        } else {
            SERIES_IDS
                .iter()
                .find(|(id, _)| *id == name)
                .map(|(_, s)| *s)
                .ok_or_else(unknown)?
        };
        EasyGroupId::build(series, n, twisted)
    }
}

/// One coordinate `u_{ij}` or `u_{ij}^*` (indices from 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Factor {
    pub row: usize,
    pub col: usize,
    pub star: bool,
}

/// A product of coordinates; the empty product is the unit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn new(factors: Vec<Factor>) -> Self {
        Monomial { factors }
    }

    /// Monomial with plain exponents on the given `(row, col)` pairs.
    pub fn plain(indices: &[(usize, usize)]) -> Self {
        Monomial {
            factors: indices
                .iter()
                .map(|&(row, col)| Factor {
                    row,
                    col,
                    star: false,
                })
                .collect(),
        }
    }

    /// `u_{i₁j₁}^{e₁} ⋯` from index tuples and a colored word (`•` means starred).
    pub fn from_word(rows: &[usize], cols: &[usize], word: &ColorWord) -> Self {
        Monomial {
            factors: rows
                .iter()
                .zip(cols)
                .zip(word.as_slice())
                .map(|((&row, &col), &c)| Factor {
                    row,
                    col,
                    star: c == Color::Black,
                })
                .collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn rows(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.row).collect()
    }

    pub fn cols(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.col).collect()
    }

    /// Plain exponent ↦ `∘`, star ↦ `•`.
    pub fn word(&self) -> ColorWord {
        ColorWord::new(
            self.factors
                .iter()
                .map(|f| if f.star { Color::Black } else { Color::White })
                .collect(),
        )
    }

    pub fn check_indices(&self, n: usize) -> Result<()> {
        for f in &self.factors {
            for index in [f.row, f.col] {
                if index == 0 || index > n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (x, fac) in self.factors.iter().enumerate() {
            if x > 0 {
                write!(f, " ")?;
            }
            write!(f, "u({},{})", fac.row, fac.col)?;
            if fac.star {
                write!(f, "*")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Monomial {
    type Err = Error;

    /// Accepts `u(1,2) u(2,1)*`, `u*(2,1)`, any single-letter coordinate name,
    /// and `1` or the empty string for the unit.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("bad monomial '{s}': {why}"));
        let trimmed = s.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(Monomial::default());
        }
        let chars: Vec<char> = trimmed.chars().collect();
        let mut pos = 0;
        let mut factors = Vec::new();
        let skip_ws = |pos: &mut usize| {
            while *pos < chars.len() && chars[*pos].is_whitespace() {
                *pos += 1;
            }
        };
        let number = |pos: &mut usize| -> Result<usize> {
            let start = *pos;
            while *pos < chars.len() && chars[*pos].is_ascii_digit() {
                *pos += 1;
            }
            chars[start..*pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| bad("expected an index"))
        };
        loop {
            skip_ws(&mut pos);
            if pos >= chars.len() {
                break;
            }
            if !chars[pos].is_ascii_alphabetic() {
                return Err(bad("expected a coordinate name"));
            }
            pos += 1;
            let mut star = false;
            if chars.get(pos) == Some(&'*') {
                star = true;
                pos += 1;
            }
            if chars.get(pos) != Some(&'(') {
                return Err(bad("expected '('"));
            }
            pos += 1;
            skip_ws(&mut pos);
            let row = number(&mut pos)?;
            skip_ws(&mut pos);
            if chars.get(pos) != Some(&',') {
                return Err(bad("expected ','"));
            }
            pos += 1;
            skip_ws(&mut pos);
            let col = number(&mut pos)?;
            skip_ws(&mut pos);
            if chars.get(pos) != Some(&')') {
                return Err(bad("expected ')'"));
            }
            pos += 1;
            if chars.get(pos) == Some(&'*') {
                if star {
                    return Err(bad("double star"));
                }
                star = true;
                pos += 1;
            }
            factors.push(Factor { row, col, star });
        }
        Ok(Monomial { factors })
    }
}

/// Exact value or Monte Carlo estimate of some Haar quantity.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentValue {
    Exact(Rational),
    MonteCarlo {
        estimate: f64,
        stderr: f64,
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub group: EasyGroupId,
    pub quantity: String,
    pub value: MomentValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TableKey {
    category: NamedCategory,
    word: ColorWord,
    n: usize,
    twisted: bool,
}

type KernelPair = (Vec<u16>, Vec<u16>);
type Coefficients = Arc<Vec<(usize, i64)>>;

/// A Weingarten table plus memoized per-kernel coefficient lists and values.
#[derive(Debug)]
struct PreparedTable {
    table: WeingartenTable,
    coefficients: RwLock<HashMap<Vec<u16>, Coefficients>>,
    values: RwLock<HashMap<KernelPair, Rational>>,
}

impl PreparedTable {
    fn wg(&self) -> &crate::matrix::Matrix<Rational> {
        self.table.wg.as_ref().expect("prepared tables carry wg")
    }

    /// Basis elements `π` with `δ_π ≠ 0` on the kernel, with their (signed) values.
    fn coefficients(&self, kernel: &[u16]) -> Arc<Vec<(usize, i64)>> {
        if let Some(c) = self.coefficients.read().expect("lock").get(kernel) {
            return c.clone();
        }
        let mut signs = SignCache::default();
        let legs: Vec<usize> = kernel.iter().map(|&x| x as usize).collect();
        let list: Vec<(usize, i64)> = self
            .table
            .basis
            .iter()
            .enumerate()
            .filter(|(_, p)| p.refines_labels(kernel))
            .map(|(idx, p)| {
                let c = if self.table.twisted {
                    signs.kernel_sign(p, &legs).value()
                } else {
                    1
                };
                (idx, c)
            })
            .collect();
        let list = Arc::new(list);
        self.coefficients
            .write()
            .expect("lock")
            .insert(kernel.to_vec(), list.clone());
        list
    }

    fn value(&self, rows: &[u16], cols: &[u16]) -> Rational {
        let key = (rows.to_vec(), cols.to_vec());
        if let Some(v) = self.values.read().expect("lock").get(&key) {
            return v.clone();
        }
        let v = weighted_sum(
            self.wg(),
            &self.coefficients(rows),
            &self.coefficients(cols),
        );
        self.values.write().expect("lock").insert(key, v.clone());
        v
    }
}

/// Weingarten integrator with a shared table cache keyed by
/// `(category, word, N, twisted)`.
#[derive(Debug, Default)]
pub struct Haar {
    bounds: Bounds,
    cache: RwLock<HashMap<TableKey, Arc<PreparedTable>>>,
}

impl Haar {
    pub fn new(bounds: Bounds) -> Self {
        Haar {
            bounds,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// The word actually used for `g`: colors are erased for orthogonal-type series.
    pub fn effective_word(&self, g: &EasyGroupId, word: &ColorWord) -> ColorWord {
        if g.is_orthogonal_type() {
            word.erased()
        } else {
            word.clone()
        }
    }

    fn prepared(&self, g: &EasyGroupId, word: &ColorWord) -> Result<Arc<PreparedTable>> {
        let key = TableKey {
            category: g.series.category(),
            word: self.effective_word(g, word),
            n: g.n,
            twisted: g.twisted,
        };
        if let Some(t) = self.cache.read().expect("lock").get(&key) {
            return Ok(t.clone());
        }
        let table = linear_maps::weingarten(linear_maps::gram(
            &CategorySpec::Named(key.category),
            &key.word,
            key.n,
            key.twisted,
            &self.bounds,
        )?);
        let prepared = Arc::new(PreparedTable {
            table,
            coefficients: RwLock::new(HashMap::new()),
            values: RwLock::new(HashMap::new()),
        });
        Ok(self
            .cache
            .write()
            .expect("lock")
            .entry(key)
            .or_insert(prepared)
            .clone())
    }

    /// The Gram/Weingarten table used for monomials of the given word.
    pub fn table(&self, g: &EasyGroupId, word: &ColorWord) -> Result<WeingartenTable> {
        Ok(self.prepared(g, word)?.table.clone())
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.bounds.max_degree {
            return Err(Error::DegreeBound {
                degree,
                bound: self.bounds.max_degree,
            });
        }
        Ok(())
    }

    /// Exact Haar integral of a coordinate monomial.
    pub fn integrate(&self, g: &EasyGroupId, m: &Monomial) -> Result<Rational> {
        self.check_degree(m.degree())?;
        m.check_indices(g.n)?;
        if m.degree() == 0 {
            return Ok(Rational::one());
        }
        let table = self.prepared(g, &m.word())?;
        let rows: Vec<usize> = m.rows();
        let cols: Vec<usize> = m.cols();
        Ok(table.value(&canonical_labels(&rows), &canonical_labels(&cols)))
    }

    /// `∫ χ^{e}`: the sum of the integrals of all diagonal monomials of the word.
    pub fn char_moment(&self, g: &EasyGroupId, word: &ColorWord) -> Result<Rational> {
        self.diagonal_sum(g, word, g.n)
    }

    /// Moment of `χ_t = Σ_{i ≤ ⌊tN⌋} u_ii` along a colored word.
    pub fn truncated_char_moment_word(
        &self,
        g: &EasyGroupId,
        t: &Rational,
        word: &ColorWord,
    ) -> Result<Rational> {
        if !t.is_positive_fraction() {
            return Err(Error::InvalidParameter(format!(
                "t must lie in (0, 1], got {t}"
            )));
        }
        let m = (t * Rational::from_integer(BigInt::from(g.n)))
            .floor()
            .to_integer()
            .to_usize()
            .unwrap_or(0);
        if m == 0 {
            return Err(Error::InvalidParameter(format!(
                "floor(tN) = 0 for t = {t}, N = {}",
                g.n
            )));
        }
        self.diagonal_sum(g, word, m)
    }

    /// `∫ χ_t^k` with plain exponents.
    pub fn truncated_char_moment(
        &self,
        g: &EasyGroupId,
        t: &Rational,
        k: usize,
    ) -> Result<Rational> {
        self.truncated_char_moment_word(g, t, &ColorWord::white(k))
    }

    fn diagonal_sum(&self, g: &EasyGroupId, word: &ColorWord, range: usize) -> Result<Rational> {
        let k = word.len();
        self.check_degree(k)?;
        if k == 0 {
            return Ok(Rational::one());
        }
        let cells = (range as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if cells > self.bounds.max_cells {
            return Err(Error::CellBound {
                cells,
                bound: self.bounds.max_cells,
            });
        }
        let table = self.prepared(g, word)?;
        let mut counts: HashMap<Vec<u16>, u64> = HashMap::new();
        let mut tuple = vec![0usize; k];
        loop {
            *counts.entry(canonical_labels(&tuple)).or_insert(0) += 1;
            let mut i = k;
            loop {
                if i == 0 {
                    let mut total = Rational::zero();
                    for (kernel, count) in counts {
                        total += table.value(&kernel, &kernel)
                            * Rational::from_integer(BigInt::from(count));
                    }
                    return Ok(total);
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < range {
                    break;
                }
                tuple[i] = 0;
            }
        }
    }
}

trait PositiveFraction {
    fn is_positive_fraction(&self) -> bool;
}

impl PositiveFraction for Rational {
    fn is_positive_fraction(&self) -> bool {
        *self > Rational::zero() && *self <= Rational::one()
    }
}

/// Word used for the `k`-th character moment: plain for color-blind
/// categories, `∘•∘•…` otherwise.
pub fn moment_word(cat: &CategorySpec, k: usize) -> ColorWord {
    if cat.is_color_blind() {
        ColorWord::plain(k)
    } else {
        ColorWord::alternating(k)
    }
}

/// `|D(0, k)|` for `k = 0..=max_k`: the `N → ∞` moments of the main character.
pub fn asymptotic_char_moments(
    cat: &CategorySpec,
    max_k: usize,
    bounds: &Bounds,
) -> Result<Vec<u64>> {
    (0..=max_k)
        .map(|k| cat.count(&ColorWord::empty(), &moment_word(cat, k), bounds.max_legs))
        .collect()
}

/// `⌊t N⌋` helper exposed for reports.
pub fn truncation_size(t: &Rational, n: usize) -> usize {
    let (q, _) = (t.numer() * BigInt::from(n)).div_rem(t.denom());
    q.to_usize().unwrap_or(0)
}

/// The integral depends only on the pair of kernels; exposed for diagnostics.
pub fn kernel_pair(m: &Monomial) -> (Partition, Partition) {
    let w = ColorWord::plain(m.degree());
    let rows = Partition::from_labels(ColorWord::empty(), w.clone(), &m.rows()).expect("len");
    let cols = Partition::from_labels(ColorWord::empty(), w, &m.cols()).expect("len");
    (rows, cols)
}
