//! Logic selectors and modal operators for the five built-in instances.

use std::fmt;

use num::rational::Ratio;
use num::{One, Zero};

/// Exact rational used for probabilistic indices. Engine-internal linear
/// arithmetic widens to `BigRational` where intermediate values can grow.
pub type Rational = Ratio<i64>;

/// A set of agents out of `{1..=count}`, stored as a bitmask on bits `0..count`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AgentSet(pub u32);

impl AgentSet {
    pub fn empty() -> Self {
        AgentSet(0)
    }

    pub fn full(count: u32) -> Self {
        debug_assert!(count <= 32);
        if count == 32 {
            AgentSet(u32::MAX)
        } else {
            AgentSet((1u32 << count) - 1)
        }
    }

    pub fn from_agents<I: IntoIterator<Item = u32>>(agents: I) -> Self {
        let mut bits = 0u32;
        for a in agents {
            debug_assert!((1..=32).contains(&a));
            bits |= 1 << (a - 1);
        }
        AgentSet(bits)
    }

    pub fn contains(&self, agent: u32) -> bool {
        (1..=32).contains(&agent) && self.0 & (1 << (agent - 1)) != 0
    }

    pub fn is_subset(&self, other: &AgentSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(&self, other: &AgentSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=32).filter(move |a| self.contains(*a))
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for a in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The logic a session runs in. Fixes the functor, the modal similarity type
/// and the one-step rule set.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Logic {
    Kripke,
    Graded,
    Probabilistic,
    Coalition { agents: u32 },
    Monotone,
}

impl Logic {
    pub fn name(&self) -> &'static str {
        match self {
            Logic::Kripke => "kripke",
            Logic::Graded => "graded",
            Logic::Probabilistic => "probabilistic",
            Logic::Coalition { .. } => "coalition",
            Logic::Monotone => "monotone",
        }
    }

    pub fn agent_universe(&self) -> Option<AgentSet> {
        match self {
            Logic::Coalition { agents } => Some(AgentSet::full(*agents)),
            _ => None,
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Logic::Coalition { agents } => write!(f, "coalition:{agents}"),
            other => write!(f, "{}", other.name()),
        }
    }
}

/// A modal operator. Variants cover the similarity types of all five built-in
/// logics together with their duals; the signature decides which are legal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Modality {
    /// `box` (Kripke or monotone, depending on the signature).
    Box,
    /// `dia`, the dual of `Box`.
    Dia,
    /// `<n>`: holds in more than `n` successors.
    GradedDia(u64),
    /// `[n]`, the dual of `<n>`.
    GradedBox(u64),
    /// `<p>`: holds with probability at least `p`.
    ProbDia(Rational),
    /// `[p]`, the dual of `<p>`.
    ProbBox(Rational),
    /// `[C]`: coalition `C` can force the argument.
    CoalBox(AgentSet),
    /// `<C>`, the dual of `[C]`.
    CoalDia(AgentSet),
}

impl Modality {
    pub fn dual(&self) -> Modality {
        match *self {
            Modality::Box => Modality::Dia,
            Modality::Dia => Modality::Box,
            Modality::GradedDia(n) => Modality::GradedBox(n),
            Modality::GradedBox(n) => Modality::GradedDia(n),
            Modality::ProbDia(p) => Modality::ProbBox(p),
            Modality::ProbBox(p) => Modality::ProbDia(p),
            Modality::CoalBox(c) => Modality::CoalDia(c),
            Modality::CoalDia(c) => Modality::CoalBox(c),
        }
    }

    /// Whether the operator belongs to the primal similarity type (as opposed
    /// to being the dual of a primal operator). Primal operators are `box`
    /// (Kripke, monotone), `<n>` (graded), `<p>` (probabilistic) and `[C]`
    /// (coalition).
    pub fn is_primal(&self) -> bool {
        matches!(
            self,
            Modality::Box | Modality::GradedDia(_) | Modality::ProbDia(_) | Modality::CoalBox(_)
        )
    }

    /// Size contribution of the operator, with numeric indices counted in
    /// binary. An index of zero costs nothing.
    pub fn size_units(&self) -> u64 {
        fn bits(n: u64) -> u64 {
            // ceil(log2 n), with 0 and 1 costing nothing
            if n <= 1 {
                0
            } else {
                64 - (n - 1).leading_zeros() as u64
            }
        }
        match *self {
            Modality::Box | Modality::Dia => 0,
            Modality::GradedDia(n) | Modality::GradedBox(n) => bits(n),
            Modality::ProbDia(p) | Modality::ProbBox(p) => {
                bits(*p.numer() as u64) + bits(*p.denom() as u64) + 1
            }
            Modality::CoalBox(_) | Modality::CoalDia(_) => 1,
        }
    }

    /// Checks that the operator is valid for the given logic.
    pub fn valid_for(&self, logic: Logic) -> bool {
        match (self, logic) {
            (Modality::Box | Modality::Dia, Logic::Kripke | Logic::Monotone) => true,
            (Modality::GradedDia(_) | Modality::GradedBox(_), Logic::Graded) => true,
            (Modality::ProbDia(p) | Modality::ProbBox(p), Logic::Probabilistic) => {
                !p.is_negative() && *p <= Rational::one()
            }
            (Modality::CoalBox(c) | Modality::CoalDia(c), Logic::Coalition { agents }) => {
                c.is_subset(&AgentSet::full(agents))
            }
            _ => false,
        }
    }
}

trait IsNegative {
    fn is_negative(&self) -> bool;
}

impl IsNegative for Rational {
    fn is_negative(&self) -> bool {
        *self < Rational::zero()
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::Box => write!(f, "box"),
            Modality::Dia => write!(f, "dia"),
            Modality::GradedDia(n) => write!(f, "<{n}>"),
            Modality::GradedBox(n) => write!(f, "[{n}]"),
            Modality::ProbDia(p) => write!(f, "<{}/{}>", p.numer(), p.denom()),
            Modality::ProbBox(p) => write!(f, "[{}/{}]", p.numer(), p.denom()),
            Modality::CoalBox(c) => write!(f, "[{c}]"),
            Modality::CoalDia(c) => write!(f, "<{c}>"),
        }
    }
}
