//! Colored two-row set partitions and the operations of the partition calculus.
//!
//! A [`Partition`] between an upper colored word of length `k` and a lower
//! colored word of length `l` is stored as a restricted growth string over the
//! `k + l` legs, upper legs first (left to right), then lower legs (left to
//! right). The restricted growth string is the canonical form: blocks are
//! numbered by their smallest leg, so two partitions are equal exactly when
//! their words and label strings agree.
//!
//! Several predicates work on the *flat* form, where legs are read
//! counterclockwise around the diagram: `u1 … uk` followed by `dl … d1`.
//! Lower legs change color when flattened, so a vertical string `∘ → ∘`
//! becomes a flat `∘ •` pair, exactly like a horizontal `∘ •` string.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Leg color. `Plain` is the uncolored symbol used by orthogonal-type contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
    Plain,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
            Color::Plain => Color::Plain,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Color::White => 'o',
            Color::Black => 'b',
            Color::Plain => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Color> {
        match c {
            'o' => Some(Color::White),
            'b' => Some(Color::Black),
            '-' => Some(Color::Plain),
            _ => None,
        }
    }
}

/// A word over the leg colors; the empty word is the unit object.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorWord(Vec<Color>);

impl ColorWord {
    pub fn new(colors: Vec<Color>) -> Self {
        ColorWord(colors)
    }

    pub fn empty() -> Self {
        ColorWord(Vec::new())
    }

    pub fn plain(len: usize) -> Self {
        ColorWord(vec![Color::Plain; len])
    }

    pub fn white(len: usize) -> Self {
        ColorWord(vec![Color::White; len])
    }

    /// `∘•∘•…` of the given length.
    pub fn alternating(len: usize) -> Self {
        ColorWord(
            (0..len)
                .map(|i| {
                    if i % 2 == 0 {
                        Color::White
                    } else {
                        Color::Black
                    }
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Color {
        self.0[i]
    }

    pub fn flipped(&self) -> ColorWord {
        ColorWord(self.0.iter().map(|c| c.flip()).collect())
    }

    pub fn erased(&self) -> ColorWord {
        ColorWord::plain(self.len())
    }

    pub fn concat(&self, other: &ColorWord) -> ColorWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ColorWord(v)
    }

    pub fn has_plain(&self) -> bool {
        self.0.contains(&Color::Plain)
    }

    /// Every word of the given length over `{∘, •}`, in lexicographic order.
    pub fn all_colored(len: usize) -> Vec<ColorWord> {
        (0..1usize << len)
            .map(|mask| {
                ColorWord(
                    (0..len)
                        .map(|i| {
                            if mask >> (len - 1 - i) & 1 == 0 {
                                Color::White
                            } else {
                                Color::Black
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

impl fmt::Display for ColorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{}", c.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for ColorWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                Color::from_symbol(c)
                    .ok_or_else(|| Error::Parse(format!("unknown color symbol '{c}' in '{s}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ColorWord)
    }
}

impl From<Vec<Color>> for ColorWord {
    fn from(v: Vec<Color>) -> Self {
        ColorWord(v)
    }
}

/// Value of the signature map on even partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_parity(odd: bool) -> Sign {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity((self == Sign::Minus) != (rhs == Sign::Minus))
    }
}

/// A leg of a two-row diagram, zero-based within its row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leg {
    Upper(usize),
    Lower(usize),
}

/// One step of Frobenius rotation: a leg at the edge of one row moves to the
/// same edge of the other row and changes color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    UpperLeftDown,
    UpperRightDown,
    LowerLeftUp,
    LowerRightUp,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [
        Rotation::UpperLeftDown,
        Rotation::UpperRightDown,
        Rotation::LowerLeftUp,
        Rotation::LowerRightUp,
    ];

    pub fn inverse(self) -> Rotation {
        match self {
            Rotation::UpperLeftDown => Rotation::LowerLeftUp,
            Rotation::LowerLeftUp => Rotation::UpperLeftDown,
            Rotation::UpperRightDown => Rotation::LowerRightUp,
            Rotation::LowerRightUp => Rotation::UpperRightDown,
        }
    }
}

/// Restricts enumeration to block sizes a category can contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockShape {
    Any,
    Even,
    Pairs,
}

/// A colored two-row set partition in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    upper: ColorWord,
    lower: ColorWord,
    labels: Vec<u16>,
}

/// Relabels blocks in order of first appearance.
pub(crate) fn canonical_labels<T: Copy + Eq + std::hash::Hash>(raw: &[T]) -> Vec<u16> {
    let mut seen: HashMap<T, u16> = HashMap::with_capacity(raw.len());
    raw.iter()
        .map(|x| {
            let next = seen.len() as u16;
            *seen.entry(*x).or_insert(next)
        })
        .collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl Partition {
    /// Builds a partition from arbitrary per-leg block labels (upper legs then lower).
    pub fn from_labels(upper: ColorWord, lower: ColorWord, labels: &[usize]) -> Result<Self> {
        if labels.len() != upper.len() + lower.len() {
            return Err(Error::InvalidPartition(format!(
                "{} labels for {} legs",
                labels.len(),
                upper.len() + lower.len()
            )));
        }
        if labels.len() > u16::MAX as usize {
            return Err(Error::InvalidPartition("too many legs".into()));
        }
        Ok(Partition {
            upper,
            lower,
            labels: canonical_labels(labels),
        })
    }

    /// Builds a partition from explicit blocks, which must cover every leg exactly once.
    pub fn from_blocks(upper: ColorWord, lower: ColorWord, blocks: &[Vec<Leg>]) -> Result<Self> {
        let k = upper.len();
        let n = k + lower.len();
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for leg in block {
                let pos = match *leg {
                    Leg::Upper(i) if i < k => i,
                    Leg::Lower(i) if i < lower.len() => k + i,
                    other => {
                        return Err(Error::InvalidPartition(format!(
                            "leg {other:?} does not exist"
                        )))
                    }
                };
                if labels[pos] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "leg {leg:?} appears in two blocks"
                    )));
                }
                labels[pos] = b;
            }
        }
        if let Some(pos) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "leg {:?} is not covered",
                Self::leg_at(k, pos)
            )));
        }
        Partition::from_labels(upper, lower, &labels)
    }

    /// Identity strings on the given word.
    pub fn identity(word: &ColorWord) -> Self {
        let k = word.len();
        let labels: Vec<usize> = (0..k).chain(0..k).collect();
        Partition::from_labels(word.clone(), word.clone(), &labels).expect("valid identity")
    }

    /// The empty partition between empty words.
    pub fn empty() -> Self {
        Partition {
            upper: ColorWord::empty(),
            lower: ColorWord::empty(),
            labels: Vec::new(),
        }
    }

    fn leg_at(k: usize, pos: usize) -> Leg {
        if pos < k {
            Leg::Upper(pos)
        } else {
            Leg::Lower(pos - k)
        }
    }

    pub fn upper(&self) -> &ColorWord {
        &self.upper
    }

    pub fn lower(&self) -> &ColorWord {
        &self.lower
    }

    /// Number of upper legs.
    pub fn k(&self) -> usize {
        self.upper.len()
    }

    /// Number of lower legs.
    pub fn l(&self) -> usize {
        self.lower.len()
    }

    pub fn num_legs(&self) -> usize {
        self.labels.len()
    }

    /// Canonical restricted growth string (upper legs then lower legs).
    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn block_count(&self) -> usize {
        self.labels
            .iter()
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.block_count()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Blocks as sorted leg lists, ordered by smallest leg.
    pub fn blocks(&self) -> Vec<Vec<Leg>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (pos, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(Self::leg_at(self.k(), pos));
        }
        blocks
    }

    pub fn leg_color(&self, pos: usize) -> Color {
        if pos < self.k() {
            self.upper.get(pos)
        } else {
            self.lower.get(pos - self.k())
        }
    }

    /// Leg positions in counterclockwise order: `u1 … uk`, then `dl … d1`.
    pub fn flat_positions(&self) -> Vec<usize> {
        let k = self.k();
        (0..k).chain((k..self.num_legs()).rev()).collect()
    }

    /// Block labels read along the flat order.
    pub fn flat_labels(&self) -> Vec<u16> {
        self.flat_positions()
            .into_iter()
            .map(|p| self.labels[p])
            .collect()
    }

    /// Colors read along the flat order, lower legs flipped.
    pub fn flat_colors(&self) -> Vec<Color> {
        self.flat_positions()
            .into_iter()
            .map(|p| {
                if p < self.k() {
                    self.upper.get(p)
                } else {
                    self.lower.get(p - self.k()).flip()
                }
            })
            .collect()
    }

    pub fn with_colors(&self, upper: ColorWord, lower: ColorWord) -> Result<Partition> {
        if upper.len() != self.k() || lower.len() != self.l() {
            return Err(Error::LegCountMismatch(
                self.k(),
                self.l(),
                upper.len(),
                lower.len(),
            ));
        }
        Ok(Partition {
            upper,
            lower,
            labels: self.labels.clone(),
        })
    }

    pub fn erase_colors(&self) -> Partition {
        Partition {
            upper: self.upper.erased(),
            lower: self.lower.erased(),
            labels: self.labels.clone(),
        }
    }

    pub fn is_pairing(&self) -> bool {
        self.block_sizes().iter().all(|&s| s == 2)
    }

    pub fn is_even(&self) -> bool {
        self.block_sizes().iter().all(|&s| s % 2 == 0)
    }

    /// True when the diagram can be drawn without crossing strings.
    pub fn is_noncrossing(&self) -> bool {
        let flat = self.flat_labels();
        let mut last = vec![0usize; self.block_count()];
        for (i, &l) in flat.iter().enumerate() {
            last[l as usize] = i;
        }
        let mut seen = vec![false; self.block_count()];
        let mut open: Vec<u16> = Vec::new();
        for (i, &l) in flat.iter().enumerate() {
            if seen[l as usize] {
                if open.last() != Some(&l) {
                    return false;
                }
                if last[l as usize] == i {
                    open.pop();
                }
            } else {
                seen[l as usize] = true;
                if last[l as usize] != i {
                    open.push(l);
                }
            }
        }
        true
    }

    /// Number of crossing string pairs of a pairing, counted on the flat form.
    pub fn crossings(&self) -> usize {
        let flat = self.flat_labels();
        let mut ends = vec![Vec::new(); self.block_count()];
        for (i, &l) in flat.iter().enumerate() {
            ends[l as usize].push(i);
        }
        let strings: Vec<(usize, usize)> = ends
            .iter()
            .filter(|e| e.len() == 2)
            .map(|e| (e[0], e[1]))
            .collect();
        let mut count = 0;
        for (x, &(a, b)) in strings.iter().enumerate() {
            for &(c, d) in &strings[x + 1..] {
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    count += 1;
                }
            }
        }
        count
    }

    /// `[πσ]`: σ placed to the right of π.
    pub fn horizontal_concat(&self, other: &Partition) -> Partition {
        let shift = self.block_count();
        let (k1, k2) = (self.k(), other.k());
        let mut labels = Vec::with_capacity(self.num_legs() + other.num_legs());
        labels.extend(self.labels[..k1].iter().map(|&x| x as usize));
        labels.extend(other.labels[..k2].iter().map(|&x| x as usize + shift));
        labels.extend(self.labels[k1..].iter().map(|&x| x as usize));
        labels.extend(other.labels[k2..].iter().map(|&x| x as usize + shift));
        Partition {
            upper: self.upper.concat(&other.upper),
            lower: self.lower.concat(&other.lower),
            labels: canonical_labels(&labels),
        }
    }

    /// Composition: `self` (k → l) is applied first, `then` (l → m) on top of it.
    ///
    /// Returns the composite (k → m) and the number of closed components left
    /// in the middle row, so that `T_then · T_self = N^loops · T_composite`.
    pub fn vertical_concat(&self, then: &Partition) -> Result<(Partition, usize)> {
        if self.l() != then.k() {
            return Err(Error::MiddleLengthMismatch {
                lower: self.l(),
                upper: then.k(),
            });
        }
        if let Some(position) = (0..self.l()).find(|&i| self.lower.get(i) != then.upper.get(i)) {
            return Err(Error::ColorMismatch {
                position: position + 1,
                lower: self.lower.get(position).symbol(),
                upper: then.upper.get(position).symbol(),
            });
        }
        let (k, l, m) = (self.k(), self.l(), then.l());
        // nodes: 0..k outer upper, k..k+l middle, k+l..k+l+m outer lower
        let mut uf = UnionFind::new(k + l + m);
        let mut first_of: Vec<Option<usize>> = vec![None; self.block_count()];
        for (pos, &b) in self.labels.iter().enumerate() {
            match first_of[b as usize] {
                Some(f) => uf.union(f, pos),
                None => first_of[b as usize] = Some(pos),
            }
        }
        let mut first_of: Vec<Option<usize>> = vec![None; then.block_count()];
        for (pos, &b) in then.labels.iter().enumerate() {
            let node = k + pos;
            match first_of[b as usize] {
                Some(f) => uf.union(f, node),
                None => first_of[b as usize] = Some(node),
            }
        }
        let outer: Vec<usize> = (0..k).chain(k + l..k + l + m).collect();
        let roots: Vec<usize> = outer.iter().map(|&x| uf.find(x)).collect();
        let mut middle_roots: Vec<usize> = (k..k + l).map(|x| uf.find(x)).collect();
        middle_roots.sort_unstable();
        middle_roots.dedup();
        let loops = middle_roots.iter().filter(|r| !roots.contains(r)).count();
        Ok((
            Partition {
                upper: self.upper.clone(),
                lower: then.lower.clone(),
                labels: canonical_labels(&roots),
            },
            loops,
        ))
    }

    /// Upside-down turning with color switch.
    pub fn adjoint(&self) -> Partition {
        let k = self.k();
        let raw: Vec<u16> = self.labels[k..]
            .iter()
            .chain(&self.labels[..k])
            .copied()
            .collect();
        Partition {
            upper: self.lower.flipped(),
            lower: self.upper.flipped(),
            labels: canonical_labels(&raw),
        }
    }

    pub fn rotate(&self, rotation: Rotation) -> Result<Partition> {
        let k = self.k();
        let mut upper: Vec<Color> = self.upper.as_slice().to_vec();
        let mut lower: Vec<Color> = self.lower.as_slice().to_vec();
        let mut up: Vec<u16> = self.labels[..k].to_vec();
        let mut down: Vec<u16> = self.labels[k..].to_vec();
        match rotation {
            Rotation::UpperLeftDown | Rotation::UpperRightDown if upper.is_empty() => {
                return Err(Error::EmptyRow("upper"))
            }
            Rotation::LowerLeftUp | Rotation::LowerRightUp if lower.is_empty() => {
                return Err(Error::EmptyRow("lower"))
            }
            Rotation::UpperLeftDown => {
                let c = upper.remove(0);
                let b = up.remove(0);
                lower.insert(0, c.flip());
                down.insert(0, b);
            }
            Rotation::UpperRightDown => {
                let c = upper.pop().expect("nonempty");
                let b = up.pop().expect("nonempty");
                lower.push(c.flip());
                down.push(b);
            }
            Rotation::LowerLeftUp => {
                let c = lower.remove(0);
                let b = down.remove(0);
                upper.insert(0, c.flip());
                up.insert(0, b);
            }
            Rotation::LowerRightUp => {
                let c = lower.pop().expect("nonempty");
                let b = down.pop().expect("nonempty");
                upper.push(c.flip());
                up.push(b);
            }
        }
        up.extend(down);
        Ok(Partition {
            upper: ColorWord(upper),
            lower: ColorWord(lower),
            labels: canonical_labels(&up),
        })
    }

    /// Shifts the flat form by one leg while keeping the row sizes.
    pub fn rotate_cyclic(&self) -> Result<Partition> {
        if self.num_legs() == 0 {
            return Err(Error::EmptyRow("upper"));
        }
        if self.k() > 0 {
            self.rotate(Rotation::UpperLeftDown)?
                .rotate(Rotation::LowerRightUp)
        } else {
            self.rotate(Rotation::LowerLeftUp)?
                .rotate(Rotation::UpperRightDown)
        }
    }

    /// Lattice join `π ∨ σ`; colors are taken from `self`.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        if self.k() != other.k() || self.l() != other.l() {
            return Err(Error::LegCountMismatch(
                self.k(),
                self.l(),
                other.k(),
                other.l(),
            ));
        }
        let n = self.num_legs();
        let offset = self.block_count();
        let mut uf = UnionFind::new(offset + other.block_count());
        for pos in 0..n {
            uf.union(
                self.labels[pos] as usize,
                offset + other.labels[pos] as usize,
            );
        }
        let roots: Vec<usize> = self.labels.iter().map(|&b| uf.find(b as usize)).collect();
        Ok(Partition {
            upper: self.upper.clone(),
            lower: self.lower.clone(),
            labels: canonical_labels(&roots),
        })
    }

    /// Number of blocks of `π ∨ σ`, without building the join.
    pub fn join_block_count(&self, other: &Partition) -> usize {
        debug_assert_eq!(self.num_legs(), other.num_legs());
        let offset = self.block_count();
        let total = offset + other.block_count();
        let mut uf = UnionFind::new(total);
        for pos in 0..self.num_legs() {
            uf.union(
                self.labels[pos] as usize,
                offset + other.labels[pos] as usize,
            );
        }
        (0..offset).filter(|&b| uf.find(b) == b).count()
    }

    /// Partition of the legs of `(i over j)` grouping equal index values.
    pub fn kernel(i: &[usize], j: &[usize]) -> Partition {
        let raw: Vec<usize> = i.iter().chain(j).copied().collect();
        Partition {
            upper: ColorWord::plain(i.len()),
            lower: ColorWord::plain(j.len()),
            labels: canonical_labels(&raw),
        }
    }

    /// Kronecker symbol: 1 when the indices are constant on every block.
    pub fn delta(&self, i: &[usize], j: &[usize]) -> Result<bool> {
        if i.len() != self.k() {
            return Err(Error::IndexLength {
                expected: self.k(),
                got: i.len(),
            });
        }
        if j.len() != self.l() {
            return Err(Error::IndexLength {
                expected: self.l(),
                got: j.len(),
            });
        }
        Ok(self.fits(i.iter().chain(j)))
    }

    /// δ on an index sequence covering all legs (upper then lower).
    pub(crate) fn fits<'a>(&self, values: impl Iterator<Item = &'a usize>) -> bool {
        let mut assigned: [usize; 64] = [usize::MAX; 64];
        let mut spill: Vec<usize>;
        let slots: &mut [usize] = if self.block_count() <= 64 {
            &mut assigned[..]
        } else {
            spill = vec![usize::MAX; self.block_count()];
            &mut spill[..]
        };
        for (&b, &v) in self.labels.iter().zip(values) {
            let slot = &mut slots[b as usize];
            if *slot == usize::MAX {
                *slot = v;
            } else if *slot != v {
                return false;
            }
        }
        true
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.refines_labels(&coarser.labels)
    }

    pub(crate) fn refines_labels(&self, coarser: &[u16]) -> bool {
        if coarser.len() != self.labels.len() {
            return false;
        }
        let mut image = vec![u16::MAX; self.block_count()];
        for (&fine, &coarse) in self.labels.iter().zip(coarser) {
            let slot = &mut image[fine as usize];
            if *slot == u16::MAX {
                *slot = coarse;
            } else if *slot != coarse {
                return false;
            }
        }
        true
    }

    /// Every partition obtained by merging blocks of `self`, itself included.
    pub fn coarsenings(&self) -> Vec<Partition> {
        set_partitions(self.block_count(), BlockShape::Any)
            .into_iter()
            .map(|merge| {
                let raw: Vec<u16> = self.labels.iter().map(|&b| merge[b as usize]).collect();
                Partition {
                    upper: self.upper.clone(),
                    lower: self.lower.clone(),
                    labels: canonical_labels(&raw),
                }
            })
            .collect()
    }

    /// Signature of an even partition: parity of the adjacent switches of legs
    /// from distinct blocks that sort the flat form into contiguous blocks.
    pub fn signature(&self) -> Result<Sign> {
        if let Some(&odd) = self.block_sizes().iter().find(|&&s| s % 2 == 1) {
            return Err(Error::OddBlock(odd));
        }
        Ok(Sign::from_parity(inversion_parity(&self.flat_labels())))
    }
}

/// Parity of the number of inversions of a label sequence.
pub(crate) fn inversion_parity(labels: &[u16]) -> bool {
    let max = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut seen_greater = vec![0usize; max];
    let mut odd = false;
    for &l in labels {
        // count earlier labels strictly greater than l
        let greater: usize = seen_greater[l as usize + 1..].iter().sum();
        odd ^= greater % 2 == 1;
        seen_greater[l as usize] += 1;
    }
    odd
}

/// Restricted growth strings of length `n` whose blocks fit `shape`, in lexicographic order.
pub fn set_partitions(n: usize, shape: BlockShape) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    for_each_set_partition(n, shape, &mut |labels| out.push(labels.to_vec()));
    out
}

/// Streams the strings of [`set_partitions`] without collecting them.
pub fn for_each_set_partition(n: usize, shape: BlockShape, visit: &mut dyn FnMut(&[u16])) {
    fn recurse(
        pos: usize,
        n: usize,
        shape: BlockShape,
        current: &mut Vec<u16>,
        sizes: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[u16]),
    ) {
        let remaining = n - pos;
        let deficient = match shape {
            BlockShape::Any => 0,
            BlockShape::Even => sizes.iter().filter(|&&s| s % 2 == 1).count(),
            BlockShape::Pairs => sizes.iter().filter(|&&s| s == 1).count(),
        };
        if deficient > remaining {
            return;
        }
        if remaining == 0 {
            visit(current);
            return;
        }
        for b in 0..=sizes.len() {
            if shape == BlockShape::Pairs && b < sizes.len() && sizes[b] >= 2 {
                continue;
            }
            if b == sizes.len() {
                sizes.push(0);
            }
            sizes[b] += 1;
            current.push(b as u16);
            recurse(pos + 1, n, shape, current, sizes, visit);
            current.pop();
            sizes[b] -= 1;
            if sizes[b] == 0 {
                sizes.pop();
            }
        }
    }
    recurse(
        0,
        n,
        shape,
        &mut Vec::with_capacity(n),
        &mut Vec::new(),
        visit,
    );
}

/// All partitions between `upper` and `lower` satisfying `predicate`, canonically ordered.
pub fn enumerate_all(
    upper: &ColorWord,
    lower: &ColorWord,
    max_legs: usize,
    predicate: impl Fn(&Partition) -> bool,
) -> Result<Vec<Partition>> {
    enumerate_shaped(upper, lower, max_legs, BlockShape::Any, predicate)
}

pub fn enumerate_shaped(
    upper: &ColorWord,
    lower: &ColorWord,
    max_legs: usize,
    shape: BlockShape,
    predicate: impl Fn(&Partition) -> bool,
) -> Result<Vec<Partition>> {
    let legs = upper.len() + lower.len();
    if legs > max_legs {
        return Err(Error::LegBound {
            legs,
            bound: max_legs,
        });
    }
    Ok(set_partitions(legs, shape)
        .into_iter()
        .map(|labels| Partition {
            upper: upper.clone(),
            lower: lower.clone(),
            labels,
        })
        .filter(|p| predicate(p))
        .collect())
}

/// Number of partitions [`enumerate_shaped`] would return, without storing them.
pub fn count_shaped(
    upper: &ColorWord,
    lower: &ColorWord,
    max_legs: usize,
    shape: BlockShape,
    predicate: impl Fn(&Partition) -> bool,
) -> Result<u64> {
    let legs = upper.len() + lower.len();
    if legs > max_legs {
        return Err(Error::LegBound {
            legs,
            bound: max_legs,
        });
    }
    let mut p = Partition {
        upper: upper.clone(),
        lower: lower.clone(),
        labels: Vec::new(),
    };
    let mut count = 0;
    for_each_set_partition(legs, shape, &mut |labels| {
        p.labels.clear();
        p.labels.extend_from_slice(labels);
        if predicate(&p) {
            count += 1;
        }
    });
    Ok(count)
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:", self.upper, self.lower)?;
        for block in self.blocks() {
            write!(f, "{{")?;
            for (x, leg) in block.iter().enumerate() {
                if x > 0 {
                    write!(f, ",")?;
                }
                match leg {
                    Leg::Upper(i) => write!(f, "u{}", i + 1)?,
                    Leg::Lower(i) => write!(f, "d{}", i + 1)?,
                }
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `colors_up:colors_down:blocks`, e.g. `ob:ob:{u1,d2}{u2,d1}`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut parts = s.splitn(3, ':');
        let (up, down, body) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(Error::Parse(format!(
                    "expected colors_up:colors_down:blocks, got '{s}'"
                )))
            }
        };
        let upper: ColorWord = up.parse()?;
        let lower: ColorWord = down.parse()?;
        let mut blocks = Vec::new();
        let mut rest = body.trim();
        while !rest.is_empty() {
            let inner_end = rest
                .find('}')
                .filter(|_| rest.starts_with('{'))
                .ok_or_else(|| Error::Parse(format!("malformed block list '{body}'")))?;
            let inner = &rest[1..inner_end];
            let block = inner
                .split(',')
                .map(|leg| parse_leg(leg.trim()))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
            rest = rest[inner_end + 1..].trim_start();
        }
        Partition::from_blocks(upper, lower, &blocks)
    }
}

fn parse_leg(s: &str) -> Result<Leg> {
    let (row, idx) = s.split_at(s.chars().next().map_or(0, |c| c.len_utf8()));
    let idx: usize = idx
        .parse()
        .map_err(|_| Error::Parse(format!("bad leg '{s}'")))?;
    if idx == 0 {
        return Err(Error::Parse(format!("legs are numbered from 1, got '{s}'")));
    }
    match row {
        "u" => Ok(Leg::Upper(idx - 1)),
        "d" => Ok(Leg::Lower(idx - 1)),
        _ => Err(Error::Parse(format!("bad leg '{s}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn horizontal_concat_of_strings() {
        let id = p("o:o:{u1,d1}");
        let both = id.horizontal_concat(&id);
        assert_eq!(both, p("oo:oo:{u1,d1}{u2,d2}"));

        let cap = p("ob::{u1,u2}");
        let cup = p(":ob:{d1,d2}");
        let joined = cap.horizontal_concat(&cup);
        assert_eq!(joined.to_string(), "ob:ob:{u1,u2}{d1,d2}");
        assert_eq!(joined.block_count(), 2);
        assert_eq!(joined.num_legs(), 4);
    }

    #[test]
    fn cup_then_cap_closes_one_loop() {
        let cup = p(":ob:{d1,d2}");
        let cap = p("ob::{u1,u2}");
        let (res, loops) = cup.vertical_concat(&cap).unwrap();
        assert_eq!(res, Partition::empty());
        assert_eq!(loops, 1);
    }

    #[test]
    fn crossing_squared_is_identity() {
        let cross = p("--:--:{u1,d2}{u2,d1}");
        let (res, loops) = cross.vertical_concat(&cross).unwrap();
        assert_eq!(res, p("--:--:{u1,d1}{u2,d2}"));
        assert_eq!(loops, 0);
    }

    #[test]
    fn identity_is_neutral_for_composition() {
        let pi = p("ob:bo-:{u1,d3}{u2,d1,d2}");
        let (a, la) = Partition::identity(pi.upper())
            .vertical_concat(&pi)
            .unwrap();
        let (b, lb) = pi
            .vertical_concat(&Partition::identity(pi.lower()))
            .unwrap();
        assert_eq!((a, la), (pi.clone(), 0));
        assert_eq!((b, lb), (pi, 0));
    }

    #[test]
    fn color_mismatch_names_position() {
        let a = p(":ob:{d1,d2}");
        let b = p("oo::{u1,u2}");
        match a.vertical_concat(&b) {
            Err(Error::ColorMismatch { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adjoint_swaps_rows_and_colors() {
        assert_eq!(p(":ob:{d1,d2}").adjoint(), p("bo::{u1,u2}"));
        assert_eq!(p("o:o:{u1,d1}").adjoint(), p("b:b:{u1,d1}"));
        let pi = p("oob:b:{u1,u3}{u2,d1}");
        assert_eq!(pi.adjoint().adjoint(), pi);
    }

    #[test]
    fn rotation_of_identity_string() {
        let id = p("o:o:{u1,d1}");
        let r = id.rotate(Rotation::UpperLeftDown).unwrap();
        assert_eq!(r, p(":bo:{d1,d2}"));
        assert_eq!(r.rotate(Rotation::LowerLeftUp).unwrap(), id);
        assert!(matches!(
            p(":o:{d1}").rotate(Rotation::UpperRightDown),
            Err(Error::EmptyRow(_))
        ));
    }

    #[test]
    fn cyclic_rotation_has_period_leg_count() {
        let pi = p("obo:bb:{u1,d2}{u2,u3}{d1}");
        let mut cur = pi.clone();
        for _ in 0..pi.num_legs() {
            cur = cur.rotate_cyclic().unwrap();
            assert_eq!((cur.k(), cur.l()), (3, 2));
        }
        assert_eq!(cur, pi);
    }

    #[test]
    fn join_examples() {
        let a = p(":----:{d1,d2}{d3,d4}");
        let b = p(":----:{d1,d3}{d2,d4}");
        let j = a.join(&b).unwrap();
        assert_eq!(j.block_count(), 1);
        assert_eq!(a.join(&a).unwrap(), a);
        let singletons = p(":----:{d1}{d2}{d3}{d4}");
        assert_eq!(a.join(&singletons).unwrap(), a);
        assert_eq!(a.join_block_count(&b), 1);
        assert!(a.join(&p(":---:{d1}{d2}{d3}")).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Partition::kernel(&[1, 1], &[1, 1]).block_count(), 1);
        assert_eq!(Partition::kernel(&[1, 2], &[3, 4]).block_count(), 4);
        assert_eq!(
            Partition::kernel(&[1, 2], &[2, 1]),
            p("--:--:{u1,d2}{u2,d1}")
        );
    }

    #[test]
    fn delta_examples() {
        let id = p("-:-:{u1,d1}");
        assert!(id.delta(&[3], &[3]).unwrap());
        assert!(!id.delta(&[3], &[5]).unwrap());
        let all = p("--:--:{u1,u2,d1,d2}");
        assert!(all.delta(&[2, 2], &[2, 2]).unwrap());
        assert!(id.delta(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn coarsening_counts() {
        assert_eq!(p(":--:{d1,d2}").coarsenings().len(), 1);
        let two = p(":----:{d1,d2}{d3,d4}").coarsenings();
        assert_eq!(two.len(), 2);
        assert_eq!(p(":---:{d1}{d2}{d3}").coarsenings().len(), 5);
    }

    #[test]
    fn signature_calibration_cases() {
        let transposition = p("--:--:{u1,d2}{u2,d1}");
        assert_eq!(transposition.signature().unwrap(), Sign::Minus);
        assert_eq!(p("--:--:{u1,d1}{u2,d2}").signature().unwrap(), Sign::Plus);
        assert_eq!(p(":----:{d1,d3}{d2,d4}").signature().unwrap(), Sign::Minus);
        assert_eq!(p(":----:{d1,d4}{d2,d3}").signature().unwrap(), Sign::Plus);
        assert!(matches!(
            p(":---:{d1,d2,d3}").signature(),
            Err(Error::OddBlock(3))
        ));
    }

    #[test]
    fn enumeration_counts() {
        let none = ColorWord::empty();
        let all4 = enumerate_all(&none, &ColorWord::plain(4), 12, |_| true).unwrap();
        assert_eq!(all4.len(), 15);
        let pairs6 = enumerate_all(&none, &ColorWord::plain(6), 12, |p| p.is_pairing()).unwrap();
        assert_eq!(pairs6.len(), 15);
        let nc6 = enumerate_all(&none, &ColorWord::plain(6), 12, |p| {
            p.is_pairing() && p.is_noncrossing()
        })
        .unwrap();
        assert_eq!(nc6.len(), 5);
        assert!(matches!(
            enumerate_all(&none, &ColorWord::plain(13), 12, |_| true),
            Err(Error::LegBound { bound: 12, .. })
        ));
    }

    #[test]
    fn shaped_generation_agrees_with_filter() {
        for n in 0..=8 {
            let pairs = set_partitions(n, BlockShape::Pairs);
            let evens = set_partitions(n, BlockShape::Even);
            let all = set_partitions(n, BlockShape::Any);
            let filt = |pred: &dyn Fn(&[usize]) -> bool| {
                all.iter()
                    .filter(|rgs| {
                        let mut sizes = vec![0; n];
                        for &b in rgs.iter() {
                            sizes[b as usize] += 1;
                        }
                        let nz: Vec<usize> = sizes.into_iter().filter(|&s| s > 0).collect();
                        pred(&nz)
                    })
                    .cloned()
                    .collect::<Vec<_>>()
            };
            assert_eq!(pairs, filt(&|s| s.iter().all(|&x| x == 2)));
            assert_eq!(evens, filt(&|s| s.iter().all(|&x| x % 2 == 0)));
        }
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "ob:ob:{u1,d2}{u2,d1}",
            "::",
            ":--:{d1,d2}",
            "obb:-:{u1,u3}{u2}{d1}",
        ] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("o:o:{d1,u1}").to_string(), "o:o:{u1,d1}");
        assert!("o:o:{u1}".parse::<Partition>().is_err());
        assert!("o:o:{u1,d1}{d1}".parse::<Partition>().is_err());
        assert!("x::".parse::<Partition>().is_err());
    }
}
