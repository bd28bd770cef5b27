//! Error type shared by all modules.

use std::fmt;

/// Errors reported by kernel, potential, profile and field operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Evaluation of a singular kernel at the origin.
    SingularOrigin,
    /// A parameter is outside its admissible range.
    Domain(String),
    /// The first moment of the kernel is infinite, so the hat kernel has
    /// no finite mass.
    InfiniteHatMass,
    /// Profile tails do not match the wells of the potential; the energy
    /// diverges.
    InfiniteEnergy(String),
    /// `Q(t) = dW/dt + t` is not invertible; carries a witness interval on
    /// which `Q` decreases.
    QNonInvertible { from: f64, to: f64 },
    /// A profile meant to be strictly increasing has an interior plateau.
    FlatProfile { at: f64 },
    /// The slab width exceeds the well-separation threshold.
    SlabTooWide { rho: f64 },
    /// Brute-force search space exceeds the documented budget.
    BudgetExceeded { states: f64, budget: f64 },
    /// A refinement ladder failed to converge.
    NonConvergent(String),
    /// A solver exhausted its iteration budget.
    Unconverged { iterations: usize, residual: f64 },
    /// A recovery construction is missing a profile at a quadrature node.
    MissingProfile { node: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularOrigin => write!(f, "singular-origin: kernel evaluated at h = 0"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InfiniteHatMass => write!(f, "infinite-hat-mass: kernel first moment diverges"),
            Error::InfiniteEnergy(msg) => write!(f, "infinite-energy: {msg}"),
            Error::QNonInvertible { from, to } => {
                write!(f, "Q-noninvertible: Q decreases on [{from}, {to}]")
            }
            Error::FlatProfile { at } => {
                write!(f, "flat-profile: plateau at t = {at} in a strictly increasing profile")
            }
            Error::SlabTooWide { rho } => {
                write!(f, "slab-too-wide: well sets overlap at slab width {rho}")
            }
            Error::BudgetExceeded { states, budget } => {
                write!(f, "budget exceeded: {states:.3e} states > {budget:.3e}")
            }
            Error::NonConvergent(msg) => write!(f, "non-convergent refinement: {msg}"),
            Error::Unconverged { iterations, residual } => {
                write!(f, "unconverged after {iterations} iterations, residual {residual:.3e}")
            }
            Error::MissingProfile { node } => {
                write!(f, "missing profile at face node y = {node}")
            }
        }
    }
}

impl std::error::Error for Error {}
