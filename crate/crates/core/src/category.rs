//! Categories of partitions: the named families, closures of generator sets,
//! and the intersection / generation operations.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::partition::{
    count_shaped, enumerate_shaped, BlockShape, Color, ColorWord, Partition, Rotation,
};

/// The `S` parameter of the `P₂^S` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modulus {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Finite(s) => write!(f, "{s}"),
            Modulus::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Modulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Modulus::Infinite),
            t => match t.parse::<u32>() {
                Ok(0) | Err(_) => Err(Error::Parse(format!(
                    "modulus must be a positive integer or 'inf', got '{s}'"
                ))),
                Ok(v) => Ok(Modulus::Finite(v)),
            },
        }
    }
}

/// The named categories. A `c` prefix marks the calligraphic (matching) variants,
/// `Star` the half-liberated ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedCategory {
    P,
    NC,
    P2,
    NC2,
    P2Star,
    CP2,
    CNC2,
    CP2Star,
    PEven,
    NCEven,
    PEvenStar,
    CPEven,
    CNCEven,
    CPEvenStar,
    P2ModS(Modulus),
}

const FIXED_IDS: [(&str, NamedCategory); 14] = [
    ("P2", NamedCategory::P2),
    ("NC2", NamedCategory::NC2),
    ("P2s", NamedCategory::P2Star),
    ("cP2", NamedCategory::CP2),
    ("cNC2", NamedCategory::CNC2),
    ("cP2s", NamedCategory::CP2Star),
    ("P", NamedCategory::P),
    ("NC", NamedCategory::NC),
    ("Peven", NamedCategory::PEven),
    ("NCeven", NamedCategory::NCEven),
    ("Pevens", NamedCategory::PEvenStar),
    ("cPeven", NamedCategory::CPEven),
    ("cNCeven", NamedCategory::CNCEven),
    ("cPevens", NamedCategory::CPEvenStar),
];

impl NamedCategory {
    /// The six categories of the basic unitary quantum groups.
    pub const BASIC: [NamedCategory; 6] = [
        NamedCategory::P2,
        NamedCategory::P2Star,
        NamedCategory::NC2,
        NamedCategory::CP2,
        NamedCategory::CP2Star,
        NamedCategory::CNC2,
    ];

    pub const REFLECTION: [NamedCategory; 6] = [
        NamedCategory::PEven,
        NamedCategory::PEvenStar,
        NamedCategory::NCEven,
        NamedCategory::CPEven,
        NamedCategory::CPEvenStar,
        NamedCategory::CNCEven,
    ];

    pub fn id(&self) -> String {
        match self {
            NamedCategory::P2ModS(s) => format!("P2modS:{s}"),
            other => FIXED_IDS
                .iter()
                .find(|(_, c)| c == other)
                .map(|(id, _)| id.to_string())
                .expect("every fixed category has an id"),
        }
    }

    pub fn known_ids() -> String {
        let mut ids: Vec<&str> = FIXED_IDS.iter().map(|(id, _)| *id).collect();
        ids.push("P2modS:<S>");
        ids.join(", ")
    }

    /// Color-blind categories decide membership without looking at leg colors.
    pub fn is_color_blind(&self) -> bool {
        match self {
            NamedCategory::CP2
            | NamedCategory::CNC2
            | NamedCategory::CP2Star
            | NamedCategory::CPEven
            | NamedCategory::CNCEven
            | NamedCategory::CPEvenStar => false,
            NamedCategory::P2ModS(s) => *s == Modulus::Finite(1),
            _ => true,
        }
    }

    /// Smallest block-shape class containing every member.
    pub fn shape(&self) -> BlockShape {
        match self {
            NamedCategory::P | NamedCategory::NC => BlockShape::Any,
            NamedCategory::PEven
            | NamedCategory::NCEven
            | NamedCategory::PEvenStar
            | NamedCategory::CPEven
            | NamedCategory::CNCEven
            | NamedCategory::CPEvenStar => BlockShape::Even,
            _ => BlockShape::Pairs,
        }
    }

    pub fn member(&self, p: &Partition) -> bool {
        if !self.is_color_blind() && (p.upper().has_plain() || p.lower().has_plain()) {
            return false;
        }
        match self {
            NamedCategory::P => true,
            NamedCategory::NC => p.is_noncrossing(),
            NamedCategory::P2 => p.is_pairing(),
            NamedCategory::NC2 => p.is_pairing() && p.is_noncrossing(),
            NamedCategory::P2Star => p.is_pairing() && alternates_in_each_block(p),
            NamedCategory::CP2 => p.is_pairing() && colors_match_in_each_block(p),
            NamedCategory::CNC2 => {
                p.is_pairing() && colors_match_in_each_block(p) && p.is_noncrossing()
            }
            NamedCategory::CP2Star => {
                p.is_pairing() && colors_match_in_each_block(p) && alternates_in_each_block(p)
            }
            NamedCategory::PEven => p.is_even(),
            NamedCategory::NCEven => p.is_even() && p.is_noncrossing(),
            NamedCategory::PEvenStar => p.is_even() && alternates_in_each_block(p),
            NamedCategory::CPEven => colors_match_in_each_block(p),
            NamedCategory::CNCEven => colors_match_in_each_block(p) && p.is_noncrossing(),
            NamedCategory::CPEvenStar => {
                colors_match_in_each_block(p) && alternates_in_each_block(p)
            }
            NamedCategory::P2ModS(s) => p.is_pairing() && color_balance_vanishes(p, *s),
        }
    }
}

impl fmt::Display for NamedCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for NamedCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("P2modS:") {
            return Ok(NamedCategory::P2ModS(rest.parse()?));
        }
        FIXED_IDS
            .iter()
            .find(|(id, _)| *id == s)
            .map(|(_, c)| *c)
            .ok_or_else(|| Error::UnknownId {
                kind: "category",
                given: s.to_string(),
                known: NamedCategory::known_ids(),
            })
    }
}

/// Each block holds as many even as odd flat positions (legs relabelled `∘•∘•…`).
fn alternates_in_each_block(p: &Partition) -> bool {
    let mut balance = vec![0i64; p.block_count()];
    for (i, l) in p.flat_labels().into_iter().enumerate() {
        balance[l as usize] += if i % 2 == 0 { 1 } else { -1 };
    }
    balance.iter().all(|&b| b == 0)
}

/// Each block holds as many `∘` as `•` in the flat coloring.
fn colors_match_in_each_block(p: &Partition) -> bool {
    let mut balance = vec![0i64; p.block_count()];
    for (l, c) in p.flat_labels().into_iter().zip(p.flat_colors()) {
        balance[l as usize] += match c {
            Color::White => 1,
            Color::Black => -1,
            Color::Plain => return false,
        };
    }
    balance.iter().all(|&b| b == 0)
}

fn color_balance_vanishes(p: &Partition, s: Modulus) -> bool {
    let diff: i64 = p
        .flat_colors()
        .into_iter()
        .map(|c| match c {
            Color::White => 1,
            Color::Black => -1,
            Color::Plain => 0,
        })
        .sum();
    match s {
        Modulus::Infinite => diff == 0,
        Modulus::Finite(m) => diff.rem_euclid(m as i64) == 0,
    }
}

/// Member table of a category generated up to a leg bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedCategory {
    generators: Vec<Partition>,
    leg_bound: usize,
    members: BTreeSet<Partition>,
}

impl GeneratedCategory {
    pub fn generators(&self) -> &[Partition] {
        &self.generators
    }

    pub fn leg_bound(&self) -> usize {
        self.leg_bound
    }

    pub fn members(&self) -> &BTreeSet<Partition> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A category of partitions, named or built from others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CategorySpec {
    Named(NamedCategory),
    Generated(Arc<GeneratedCategory>),
    Intersection(Box<CategorySpec>, Box<CategorySpec>),
    /// `⟨left, right⟩`, materialized as the closure of both member sets.
    Generation {
        left: Box<CategorySpec>,
        right: Box<CategorySpec>,
        table: Arc<GeneratedCategory>,
    },
}

impl From<NamedCategory> for CategorySpec {
    fn from(c: NamedCategory) -> Self {
        CategorySpec::Named(c)
    }
}

impl fmt::Display for CategorySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategorySpec::Named(c) => write!(f, "{c}"),
            CategorySpec::Generated(t) => {
                write!(
                    f,
                    "<{} generators, <= {} legs>",
                    t.generators.len(),
                    t.leg_bound
                )
            }
            CategorySpec::Intersection(a, b) => write!(f, "({a} & {b})"),
            CategorySpec::Generation { left, right, .. } => write!(f, "<{left}, {right}>"),
        }
    }
}

impl CategorySpec {
    pub fn named(c: NamedCategory) -> Self {
        CategorySpec::Named(c)
    }

    /// Bound of the generated table, if this spec is truncated.
    pub fn leg_bound(&self) -> Option<usize> {
        match self {
            CategorySpec::Named(_) => None,
            CategorySpec::Generated(t) => Some(t.leg_bound),
            CategorySpec::Generation { table, .. } => Some(table.leg_bound),
            CategorySpec::Intersection(a, b) => match (a.leg_bound(), b.leg_bound()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn is_color_blind(&self) -> bool {
        match self {
            CategorySpec::Named(c) => c.is_color_blind(),
            CategorySpec::Intersection(a, b) => a.is_color_blind() || b.is_color_blind(),
            _ => false,
        }
    }

    fn shape(&self) -> BlockShape {
        match self {
            CategorySpec::Named(c) => c.shape(),
            CategorySpec::Intersection(a, b) => match (a.shape(), b.shape()) {
                (BlockShape::Pairs, _) | (_, BlockShape::Pairs) => BlockShape::Pairs,
                (BlockShape::Even, _) | (_, BlockShape::Even) => BlockShape::Even,
                _ => BlockShape::Any,
            },
            _ => BlockShape::Any,
        }
    }

    pub fn member(&self, p: &Partition) -> Result<bool> {
        match self {
            CategorySpec::Named(c) => Ok(c.member(p)),
            CategorySpec::Generated(t) | CategorySpec::Generation { table: t, .. } => {
                if p.num_legs() > t.leg_bound {
                    Err(Error::GeneratedBound {
                        legs: p.num_legs(),
                        bound: t.leg_bound,
                    })
                } else {
                    Ok(t.members.contains(p))
                }
            }
            CategorySpec::Intersection(a, b) => Ok(a.member(p)? && b.member(p)?),
        }
    }

    /// Members between the two words, in canonical order.
    pub fn enumerate(
        &self,
        upper: &ColorWord,
        lower: &ColorWord,
        max_legs: usize,
    ) -> Result<Vec<Partition>> {
        let legs = upper.len() + lower.len();
        match self {
            CategorySpec::Generated(t) | CategorySpec::Generation { table: t, .. } => {
                if legs > t.leg_bound {
                    return Err(Error::GeneratedBound {
                        legs,
                        bound: t.leg_bound,
                    });
                }
                Ok(t.members
                    .iter()
                    .filter(|p| p.upper() == upper && p.lower() == lower)
                    .cloned()
                    .collect())
            }
            _ => {
                if let Some(bound) = self.leg_bound() {
                    if legs > bound {
                        return Err(Error::GeneratedBound { legs, bound });
                    }
                }
                let shape = self.shape();
                enumerate_shaped(upper, lower, max_legs, shape, |p| {
                    self.member(p).unwrap_or(false)
                })
            }
        }
    }

    /// `|D(upper, lower)|`, counted without materializing the members.
    pub fn count(&self, upper: &ColorWord, lower: &ColorWord, max_legs: usize) -> Result<u64> {
        match self {
            CategorySpec::Named(_) | CategorySpec::Intersection(..)
                if self.leg_bound().is_none() =>
            {
                let shape = self.shape();
                count_shaped(upper, lower, max_legs, shape, |p| {
                    self.member(p).unwrap_or(false)
                })
            }
            _ => Ok(self.enumerate(upper, lower, max_legs)?.len() as u64),
        }
    }

    /// Every member with at most `max_legs` legs, over all colorings (uncolored
    /// words are included for color-blind specs).
    pub fn members_up_to(&self, max_legs: usize, colored_only: bool) -> Result<Vec<Partition>> {
        let mut out = Vec::new();
        for (upper, lower) in leg_structures(max_legs, !colored_only && self.is_color_blind()) {
            out.extend(self.enumerate(&upper, &lower, max_legs)?);
        }
        Ok(out)
    }

    pub fn intersect(&self, other: &CategorySpec) -> CategorySpec {
        CategorySpec::Intersection(Box::new(self.clone()), Box::new(other.clone()))
    }

    /// `⟨self, other⟩`: the smallest category containing both, up to `leg_bound`.
    pub fn generate(&self, other: &CategorySpec, leg_bound: usize) -> Result<CategorySpec> {
        let mut gens = self.members_up_to(leg_bound, true)?;
        gens.extend(other.members_up_to(leg_bound, true)?);
        let table = closure_table(gens, leg_bound);
        Ok(CategorySpec::Generation {
            left: Box::new(self.clone()),
            right: Box::new(other.clone()),
            table: Arc::new(table),
        })
    }
}

/// All `(upper, lower)` colored word pairs with at most `max_legs` legs in total.
pub fn leg_structures(max_legs: usize, include_plain: bool) -> Vec<(ColorWord, ColorWord)> {
    let mut out = Vec::new();
    for n in 0..=max_legs {
        for k in 0..=n {
            for up in ColorWord::all_colored(k) {
                for down in ColorWord::all_colored(n - k) {
                    out.push((up.clone(), down));
                }
            }
            if include_plain {
                out.push((ColorWord::plain(k), ColorWord::plain(n - k)));
            }
        }
    }
    out
}

/// Identity strings and duality pairings of both colors.
fn unit_seeds() -> Vec<Partition> {
    let mut seeds = Vec::new();
    for c in [Color::White, Color::Black] {
        let w = ColorWord::new(vec![c]);
        seeds.push(Partition::identity(&w));
        let pair = ColorWord::new(vec![c, c.flip()]);
        seeds.push(Partition::from_labels(ColorWord::empty(), pair.clone(), &[0, 0]).expect("cup"));
        seeds.push(Partition::from_labels(pair, ColorWord::empty(), &[0, 0]).expect("cap"));
    }
    seeds.push(Partition::empty());
    seeds
}

/// Closes `generators` (plus identity strings and duality pairings) under
/// horizontal and vertical concatenation, adjoint and rotation, discarding
/// anything with more than `leg_bound` legs.
pub fn closure(generators: &[Partition], leg_bound: usize) -> CategorySpec {
    CategorySpec::Generated(Arc::new(closure_table(generators.to_vec(), leg_bound)))
}

fn closure_table(generators: Vec<Partition>, leg_bound: usize) -> GeneratedCategory {
    let mut known: Vec<Partition> = Vec::new();
    let mut seen: HashSet<Partition> = HashSet::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let push = |p: Partition,
                known: &mut Vec<Partition>,
                seen: &mut HashSet<Partition>,
                queue: &mut VecDeque<usize>| {
        if p.num_legs() <= leg_bound && seen.insert(p.clone()) {
            known.push(p);
            queue.push_back(known.len() - 1);
        }
    };

    for p in generators.iter().cloned().chain(unit_seeds()) {
        push(p, &mut known, &mut seen, &mut queue);
    }

    while let Some(idx) = queue.pop_front() {
        let p = known[idx].clone();
        let mut fresh = vec![p.adjoint()];
        fresh.extend(Rotation::ALL.iter().filter_map(|&r| p.rotate(r).ok()));
        for q in &known[..] {
            if p.num_legs() + q.num_legs() <= leg_bound {
                fresh.push(p.horizontal_concat(q));
                fresh.push(q.horizontal_concat(&p));
            }
            if let Ok((c, _)) = p.vertical_concat(q) {
                fresh.push(c);
            }
            if let Ok((c, _)) = q.vertical_concat(&p) {
                fresh.push(c);
            }
        }
        for f in fresh {
            push(f, &mut known, &mut seen, &mut queue);
        }
    }

    GeneratedCategory {
        generators,
        leg_bound,
        members: known.into_iter().collect(),
    }
}
