use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigenvalue within {tol:e} of -1: principal logarithm is ambiguous")]
    AmbiguousBranch { tol: f64 },

    #[error("logarithm branch failure: {0}")]
    BranchFailure(String),

    #[error("operation not supported for group {0}")]
    UnsupportedGroup(String),

    #[error("invalid rank {rank} for root system of type {kind}")]
    InvalidRank { kind: char, rank: usize },

    #[error("(w - I) is singular on the root span")]
    SingularSystem,

    #[error("vector is not in the root span (off-span norm {0:e})")]
    NotInSpan(f64),

    #[error("unsupported root system type {0} for this operation")]
    UnsupportedType(char),

    #[error("group elements come from different specs: {0}")]
    SpecMismatch(String),

    #[error("arity mismatch: {0}")]
    ArityError(String),

    #[error("surface with {k} crosscaps is excluded (k in {{1,2,4}})")]
    ExcludedSurface { k: u32 },

    #[error("no convergence after {restarts} restarts (best residual {best:e})")]
    NoConvergence { restarts: usize, best: f64 },

    #[error("target has |det - 1| = {0:e}: outside the image of the commutator map")]
    ImageViolation(f64),

    #[error("tuple is not a relation solution (residual {0:e})")]
    NotASolution(f64),

    #[error("orientable surface has no K-valued obstruction")]
    OrientableSurface,

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("class {k} has no central lift squaring to the identity in {group}")]
    NoInvolutiveLift { k: i8, group: String },

    #[error("projection value {0} is not in K = {{+1, -1}}")]
    ClassNotInK(String),

    #[error("central lift does not project to det(c): {0}")]
    InvalidLift(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Machine-readable reason code used in JSON refusals.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::AmbiguousBranch { .. } => "ambiguous_branch",
            Error::BranchFailure(_) => "branch_failure",
            Error::UnsupportedGroup(_) => "unsupported_group",
            Error::InvalidRank { .. } => "invalid_rank",
            Error::SingularSystem => "singular_system",
            Error::NotInSpan(_) => "not_in_span",
            Error::UnsupportedType(_) => "unsupported_type",
            Error::SpecMismatch(_) => "spec_mismatch",
            Error::ArityError(_) => "arity_error",
            Error::ExcludedSurface { .. } => "excluded_surface_k_in_{1,2,4}",
            Error::NoConvergence { .. } => "no_convergence",
            Error::ImageViolation(_) => "image_violation",
            Error::NotASolution(_) => "not_a_solution",
            Error::OrientableSurface => "orientable_surface",
            Error::UnsupportedCombination(_) => "unsupported_combination",
            Error::NoInvolutiveLift { .. } => "no_involutive_lift",
            Error::ClassNotInK(_) => "class_not_in_k",
            Error::InvalidLift(_) => "invalid_lift",
            Error::InvalidElement(_) => "invalid_element",
            Error::InvalidInput(_) => "invalid_input",
        }
    }

    /// Domain refusals: the input is well-formed but the mathematics says no.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::ExcludedSurface { .. }
                | Error::NoInvolutiveLift { .. }
                | Error::ImageViolation(_)
                | Error::ClassNotInK(_)
                | Error::OrientableSurface
                | Error::UnsupportedCombination(_)
                | Error::UnsupportedGroup(_)
                | Error::UnsupportedType(_)
                | Error::InvalidRank { .. }
                | Error::ArityError(_)
        )
    }

    /// Process exit code for the CLI: 2 for refusals, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_refusal() {
            2
        } else {
            1
        }
    }
}
