/// Desk-scale guardrails shared by enumeration, dense maps and integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum number of legs (upper plus lower) a partition enumeration may touch.
    pub max_legs: usize,
    /// Maximum degree of a monomial handed to the Weingarten integrator.
    pub max_degree: usize,
    /// Maximum number of cells of a dense tensor map or index sweep.
    pub max_cells: u128,
    /// Maximum element count of an enumerated finite group.
    pub max_group_elements: u128,
}

pub const DEFAULT_MAX_LEGS: usize = 12;
pub const DEFAULT_MAX_DEGREE: usize = 8;
pub const DEFAULT_MAX_CELLS: u128 = 10_000_000;
pub const DEFAULT_MAX_GROUP_ELEMENTS: u128 = 2_000_000;

/// Environment variable overriding [`Bounds::max_legs`].
pub const MAX_LEGS_ENV: &str = "QWEIN_MAX_LEGS";

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_legs: DEFAULT_MAX_LEGS,
            max_degree: DEFAULT_MAX_DEGREE,
            max_cells: DEFAULT_MAX_CELLS,
            max_group_elements: DEFAULT_MAX_GROUP_ELEMENTS,
        }
    }
}

impl Bounds {
    /// Defaults, with the leg bound taken from `QWEIN_MAX_LEGS` when it parses.
    pub fn from_env() -> Self {
        let mut bounds = Bounds::default();
        if let Some(v) = std::env::var(MAX_LEGS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            bounds.max_legs = v;
        }
        bounds
    }

    pub fn with_max_legs(mut self, max_legs: usize) -> Self {
        self.max_legs = max_legs;
        self
    }
}
