use core::fmt;

/// Every failure the numerical pipeline can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand dimensions do not agree.
    DimensionMismatch { expected: usize, found: usize },
    /// The (sigma_x, sigma_y) block couples to the outer components.
    NotBlockDecoupled { coupling: f64 },
    /// Right eigenvector matrix is numerically singular: a Jordan block of
    /// size > 1 is present.
    NonDiagonalizable { condition: f64 },
    /// Shifted QR failed to converge.
    EigenNoConvergence,
    /// Two eigenvalue pairings between adjacent samples are equally good.
    AmbiguousMatching { margin: f64 },
    /// Block structure changed between adjacent samples.
    BlockStructureChanged,
    /// Halving the step moved the result by more than the allowed tolerance.
    StepTooLarge { change: f64, tolerance: f64 },
    /// `4(alpha1^2 + alpha2^2) = c2^2`: the dephasing family loses its eigenbasis.
    DegenerateFamily,
    /// `xi = (gamma_b^4 - omega^2)^(1/2)` vanishes.
    SingularXi,
    /// `2 alpha2 + c2 = 0` in the closed-form dephasing phase.
    VanishingK1,
    /// `<<E(0)|D(t)>>` vanished: the non-cyclic phase is undefined.
    VanishingOverlap { time: f64, modulus: f64 },
    /// The basis path does not close on itself.
    NotCyclic { mismatch: f64 },
    /// A block needed the Abelian formula but is degenerate.
    DegenerateBlock { block: usize, degeneracy: usize },
    /// Time grid is unusable.
    InvalidGrid,
    /// A parameter violates a documented precondition.
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotBlockDecoupled { coupling } => write!(
                f,
                "internal (sigma_x, sigma_y) block is coupled to the outer components (max coupling {coupling:e})"
            ),
            Error::NonDiagonalizable { condition } => write!(
                f,
                "matrix is not diagonalizable (eigenvector condition number {condition:e})"
            ),
            Error::EigenNoConvergence => write!(f, "eigenvalue iteration did not converge"),
            Error::AmbiguousMatching { margin } => write!(
                f,
                "eigenvalue matching between adjacent samples is ambiguous (margin {margin:e}); refine the grid"
            ),
            Error::BlockStructureChanged => {
                write!(f, "eigenvalue block structure changed between adjacent samples")
            }
            Error::StepTooLarge { change, tolerance } => write!(
                f,
                "step too large: halving the step changed the result by {change:e} (tolerance {tolerance:e})"
            ),
            Error::DegenerateFamily => write!(
                f,
                "invariant has no eigenbasis: 4(alpha1^2 + alpha2^2) must differ from c2^2"
            ),
            Error::SingularXi => write!(f, "xi = (gamma_b^4 - omega^2)^(1/2) vanishes"),
            Error::VanishingK1 => write!(f, "2*alpha2 + c2 vanishes"),
            Error::VanishingOverlap { time, modulus } => write!(
                f,
                "overlap <<E(0)|D(t)>> vanishes at t = {time} (|overlap| = {modulus:e})"
            ),
            Error::NotCyclic { mismatch } => {
                write!(f, "basis path is not cyclic (endpoint mismatch {mismatch:e})")
            }
            Error::DegenerateBlock { block, degeneracy } => write!(
                f,
                "block {block} is {degeneracy}-fold degenerate; use the non-Abelian phase"
            ),
            Error::InvalidGrid => write!(f, "invalid time grid"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonDiagonalizable { .. }
                | Error::EigenNoConvergence
                | Error::AmbiguousMatching { .. }
                | Error::BlockStructureChanged
                | Error::StepTooLarge { .. }
                | Error::VanishingOverlap { .. }
                | Error::NotCyclic { .. }
                | Error::SingularXi
        )
    }
}
