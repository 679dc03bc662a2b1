//! Tolerance tiers shared by every module.
//!
//! | Tier | Value | Used for |
//! |------|-------|----------|
//! | construction | 1e-12 | freshly built elements, exact identities |
//! | post-computation | 1e-9 | elements after long products, deserialized input |
//! | acceptance | 1e-6 | solver convergence, "is a solution" checks |

/// Unitarity and algebra-membership tolerance right after construction.
pub const CONSTRUCTION: f64 = 1e-12;

/// Tolerance after long chains of products or a JSON round trip.
pub const POST: f64 = 1e-9;

/// Solver acceptance and solution checks.
pub const ACCEPT: f64 = 1e-6;

/// Distance from -1 at which the principal logarithm is refused.
pub const BRANCH: f64 = 1e-12;

/// Relation residual bound for a certified path.
pub const PATH_RESIDUAL: f64 = 1e-8;

/// Endpoint error bound for a certified path.
pub const PATH_ENDPOINT: f64 = 1e-9;

/// Polish target once the acceptance tier is reached.
pub const POLISH: f64 = 1e-10;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::assertions_on_constants)]
    fn tiers_are_ordered() {
        assert!(CONSTRUCTION < POLISH);
        assert!(POLISH < POST);
        assert!(POST < PATH_RESIDUAL);
        assert!(PATH_RESIDUAL < ACCEPT);
    }
}
