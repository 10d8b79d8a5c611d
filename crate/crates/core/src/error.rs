//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A codimension / dimension combination that does not describe a face.
    #[error("invalid codimension {codim} for dimension {dim}")]
    InvalidCodimension { dim: usize, codim: usize },

    /// Two configurations that were expected to share a dimension.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A concatenation coordinate outside `1..=n+1`.
    #[error("concatenation coordinate {coord} out of range for dimension {dim}")]
    InvalidCoordinate { dim: usize, coord: usize },

    /// An operation that needs an abelian carrier was handed something else.
    #[error("unsupported carrier: {0}")]
    UnsupportedCarrier(String),

    /// A requested dimension exceeds the configured cap.
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// An enumeration would exceed the configured size cap.
    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: String,
        needed: u128,
        cap: u128,
    },

    /// Group construction data that violates the group laws.
    #[error("not a group: {0}")]
    NotAGroup(String),

    /// A subgroup chain entry that is not a subgroup, or a chain that is not
    /// nested.
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    /// A point id outside the carrier, or an element id outside the group.
    #[error("id {id} out of range (size {size})")]
    OutOfRange { id: usize, size: usize },

    /// Mismatched groups or value groups in a binary operation.
    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    /// Averaging input whose spread exceeds the window.
    #[error("window violation: {0}")]
    WindowViolation(String),

    /// A space failed a nilspace axiom needed by the requested operation.
    /// The witness string pinpoints the offending configuration.
    #[error("not a nilspace: {axiom} fails; witness: {witness}")]
    NotANilspace { axiom: String, witness: String },

    /// Structure extraction (factor, structure group, section) failed.
    #[error("structure extraction failed: {0}")]
    StructureExtraction(String),

    /// A map that is not a bijection where one is required.
    #[error("not a bijection: {0}")]
    NotABijection(String),

    /// A map that fails the bundle-map conditions.
    #[error("not a bundle map: {0}")]
    NotABundleMap(String),

    /// A candidate cocycle that violates one of the cocycle axioms.
    #[error("not a cocycle: {axiom} fails; witness: {witness}")]
    NotACocycle { axiom: String, witness: String },

    /// A coboundary problem with no solution.  The certificate is an integer
    /// combination of input equations that reduces to an impossible congruence.
    #[error("coboundary system inconsistent: {0}")]
    Obstruction(ObstructionCertificate),

    /// The averaging solver would have to exceed its smallness budget.
    #[error("smallness budget exceeded: {0}")]
    SmallnessBudget(String),

    /// Malformed textual input (space specs, cocycle tables).
    #[error("parse error: {0}")]
    Parse(String),
}

/// Proof that a linear coboundary system has no solution: multiplying the
/// listed equations by the listed integer coefficients and summing produces
/// `0 = combined_rhs (mod modulus)` with `combined_rhs` not divisible by
/// `gcd`, the gcd of the combined left-hand side and the modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionCertificate {
    /// `(equation index, coefficient)` pairs; equation indices refer to the
    /// cube enumeration order of the system that was solved.
    pub combination: Vec<(usize, i64)>,
    /// Value of the combined right-hand side, as an integer residue.
    pub combined_rhs: i64,
    /// Modulus of the cyclic component in which the contradiction lives.
    pub modulus: i64,
    /// gcd of the combined left-hand side coefficients and the modulus;
    /// solvability would require it to divide `combined_rhs`.
    pub gcd: i64,
    /// Index of the cyclic component of the value group.
    pub component: usize,
}

impl std::fmt::Display for ObstructionCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "component {}: combination of {} equation(s) gives {} = {} (mod {}), but gcd {} does not divide {}",
            self.component,
            self.combination.len(),
            self.combination
                .iter()
                .map(|(i, c)| format!("{c}*eq[{i}]"))
                .collect::<Vec<_>>()
                .join(" + "),
            self.combined_rhs,
            self.modulus,
            self.gcd,
            self.combined_rhs,
        )
    }
}
