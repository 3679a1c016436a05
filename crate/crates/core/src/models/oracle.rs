//! Brute-force Haar integration over small finite groups of generalized
//! permutation matrices: `S_N`, `H_N` and `K_N^s = Z_s ≀ S_N`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::Zero;

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::haar::Monomial;
use crate::matrix::Matrix;

pub type ComplexRational = Complex<Rational>;

/// Which wreath product `Z_s ≀ S_N` is enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleGroup {
    /// Permutation matrices.
    Symmetric,
    /// Signed permutation matrices.
    Hyperoctahedral,
    /// Permutation matrices weighted by `s`-th roots of unity, `s ∈ {1, 2, 4}`.
    Reflection(u32),
}

impl OracleGroup {
    /// Order of the root of unity group.
    pub fn roots(&self) -> u32 {
        match self {
            OracleGroup::Symmetric => 1,
            OracleGroup::Hyperoctahedral => 2,
            OracleGroup::Reflection(s) => *s,
        }
    }
}

/// A generalized permutation matrix: column `j` has its only nonzero entry in
/// row `perm[j]`, equal to `i^{quarter_turns[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub perm: Vec<usize>,
    pub quarter_turns: Vec<u8>,
}

impl GroupElement {
    pub fn permutation(perm: Vec<usize>) -> Self {
        let n = perm.len();
        GroupElement {
            perm,
            quarter_turns: vec![0; n],
        }
    }

    /// Exact matrix, `v_{ij} = ω_j` when `σ(j) = i`.
    pub fn matrix(&self) -> Matrix<ComplexRational> {
        let n = self.perm.len();
        Matrix::from_fn(n, n, |i, j| {
            if self.perm[j] == i {
                quarter_turn(self.quarter_turns[j])
            } else {
                ComplexRational::zero()
            }
        })
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let perm = other.perm.iter().map(|&j| self.perm[j]).collect();
        let quarter_turns = other
            .perm
            .iter()
            .zip(&other.quarter_turns)
            .map(|(&j, &q)| (self.quarter_turns[j] + q) % 4)
            .collect();
        GroupElement {
            perm,
            quarter_turns,
        }
    }
}

fn quarter_turn(q: u8) -> ComplexRational {
    let (re, im) = match q % 4 {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    };
    Complex::new(
        Rational::from_integer(BigInt::from(re)),
        Rational::from_integer(BigInt::from(im)),
    )
}

/// Uniform measure on an explicitly enumerated finite group.
#[derive(Debug, Clone)]
pub struct FiniteGroupOracle {
    group: OracleGroup,
    n: usize,
    elements: Vec<GroupElement>,
}

impl FiniteGroupOracle {
    pub fn new(group: OracleGroup, n: usize, bounds: &Bounds) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        let s = group.roots();
        if !matches!(s, 1 | 2 | 4) {
            return Err(Error::InvalidParameter(format!(
                "roots of unity of order {s} are not exact rationals in Q(i); use s = 1, 2 or 4"
            )));
        }
        let elements = (1..=n as u128)
            .try_fold(1u128, |acc, k| acc.checked_mul(k)?.checked_mul(s as u128))
            .unwrap_or(u128::MAX);
        if elements > bounds.max_group_elements {
            return Err(Error::GroupBound {
                elements,
                bound: bounds.max_group_elements,
            });
        }
        let step = (4 / s) as u8;
        let mut out = Vec::with_capacity(elements as usize);
        for perm in permutations(n) {
            let mut phases = vec![0u32; n];
            loop {
                out.push(GroupElement {
                    perm: perm.clone(),
                    quarter_turns: phases.iter().map(|&a| a as u8 * step).collect(),
                });
                let Some(pos) = phases.iter().rposition(|&a| a + 1 < s) else {
                    break;
                };
                phases[pos] += 1;
                for a in &mut phases[pos + 1..] {
                    *a = 0;
                }
            }
        }
        Ok(FiniteGroupOracle {
            group,
            n,
            elements: out,
        })
    }

    pub fn group(&self) -> OracleGroup {
        self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Average of the monomial over all elements, exactly.
    pub fn exact_integral(&self, m: &Monomial) -> Result<ComplexRational> {
        m.check_indices(self.n)?;
        let mut counts = [0u64; 4];
        'elements: for g in &self.elements {
            let mut turns = 0u32;
            for f in &m.factors {
                let (i, j) = (f.row - 1, f.col - 1);
                if g.perm[j] != i {
                    continue 'elements;
                }
                let q = g.quarter_turns[j] as u32;
                turns += if f.star { 4 - q } else { q };
            }
            counts[(turns % 4) as usize] += 1;
        }
        let total = Rational::from_integer(BigInt::from(self.elements.len()));
        let part = |a: usize, b: usize| {
            Rational::from_integer(BigInt::from(counts[a]) - BigInt::from(counts[b])) / &total
        };
        Ok(Complex::new(part(0, 2), part(1, 3)))
    }

    /// Checks `g·h ∈ G` for every pair drawn from a strided sample.
    pub fn spot_check_closure(&self, samples: usize) -> bool {
        let len = self.elements.len();
        let stride = (len / samples.max(1)).max(1);
        let members: std::collections::HashSet<&GroupElement> = self.elements.iter().collect();
        self.elements.iter().step_by(stride).all(|g| {
            self.elements
                .iter()
                .step_by(stride)
                .all(|h| members.contains(&g.compose(h)))
        }) && self.elements.iter().any(|g| {
            g.perm.iter().enumerate().all(|(j, &i)| i == j)
                && g.quarter_turns.iter().all(|&q| q == 0)
        })
    }
}

impl fmt::Display for FiniteGroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.group {
            OracleGroup::Symmetric => "S".to_string(),
            OracleGroup::Hyperoctahedral => "H".to_string(),
            OracleGroup::Reflection(s) => format!("K{s}"),
        };
        write!(f, "{name}:{}", self.n)
    }
}

/// Parses `S:N`, `H:N` or `K<s>:N`.
pub fn parse_oracle_id(s: &str) -> Result<(OracleGroup, usize)> {
    let unknown = || Error::UnknownId {
        kind: "finite group",
        given: s.to_string(),
        known: "S:<N>, H:<N>, K<s>:<N> with s in {1, 2, 4}".into(),
    };
    let (name, n) = s.trim().split_once(':').ok_or_else(unknown)?;
    let n = usize::from_str(n).map_err(|_| Error::Parse(format!("bad dimension in '{s}'")))?;
    let group = match name {
        "S" => OracleGroup::Symmetric,
        "H" => OracleGroup::Hyperoctahedral,
        _ => {
            let s_val: u32 = name
                .strip_prefix('K')
                .and_then(|x| x.parse().ok())
                .ok_or_else(unknown)?;
            OracleGroup::Reflection(s_val)
        }
    };
    Ok((group, n))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn oracle(id: &str) -> FiniteGroupOracle {
        let (g, n) = parse_oracle_id(id).unwrap();
        FiniteGroupOracle::new(g, n, &Bounds::default()).unwrap()
    }

    fn real(p: i64, q: i64) -> ComplexRational {
        Complex::new(ratio(p, q), Rational::zero())
    }

    #[test]
    fn element_counts() {
        assert_eq!(oracle("S:4").len(), 24);
        assert_eq!(oracle("H:3").len(), 48);
        assert_eq!(oracle("K4:2").len(), 32);
        assert_eq!(oracle("K1:3").len(), 6);
        assert!(oracle("H:3").spot_check_closure(20));
        assert!(oracle("K4:2").spot_check_closure(32));
    }

    #[test]
    fn integral_examples() {
        let m = |s: &str| s.parse::<Monomial>().unwrap();
        assert_eq!(
            oracle("S:3").exact_integral(&m("v(1,1)")).unwrap(),
            real(1, 3)
        );
        assert_eq!(
            oracle("S:4").exact_integral(&m("v(1,1) v(2,2)")).unwrap(),
            real(1, 12)
        );
        assert_eq!(
            oracle("H:2").exact_integral(&m("u(1,1)")).unwrap(),
            real(0, 1)
        );
        assert_eq!(
            oracle("K4:2").exact_integral(&m("u(1,1) u(1,1)*")).unwrap(),
            real(1, 2)
        );
        assert_eq!(
            oracle("K4:2").exact_integral(&m("u(1,1) u(1,1)")).unwrap(),
            real(0, 1)
        );
    }

    #[test]
    fn bound_and_validation() {
        let tight = Bounds {
            max_group_elements: 100,
            ..Bounds::default()
        };
        assert!(matches!(
            FiniteGroupOracle::new(OracleGroup::Symmetric, 6, &tight),
            Err(Error::GroupBound { elements: 720, .. })
        ));
        assert!(FiniteGroupOracle::new(OracleGroup::Reflection(3), 2, &tight).is_err());
        assert!(parse_oracle_id("Q:3").is_err());
    }

    #[test]
    fn element_matrices_compose() {
        let o = oracle("K4:2");
        for g in o.elements() {
            for h in o.elements() {
                assert_eq!(g.compose(h).matrix(), g.matrix().matmul(&h.matrix()));
            }
        }
    }
}
