//! Dense orbits of the expanding map `F_s(z) = √2·i·z + s·2√2π` on the
//! rectangle `(0, 2√2π) × (0, 4π)`, their push-forward to the slit annulus
//! through `exp`, and quantitative checks for ball packing, worst-case
//! volume growth and Lipschitz-graph domains.

pub mod conjugation;
pub mod density;
pub mod error;
pub mod expanding;
pub mod growth;
pub mod lipschitz;
pub mod numerics;
pub mod orbit;
pub mod packing;
pub mod report;

pub use conjugation::{push_orbit, push_points, DOrbit, SlitAnnulus};
pub use density::{coverage, density_profile, AnnulusDomain, CoverageReport, Domain, OmegaDomain};
pub use error::{Error, Result};
pub use expanding::{ProductSymbol, Symbol, SystemSpec, Word};
pub use growth::GrowthParams;
pub use lipschitz::{GraphSample, SpacePoint, StarCheckConfig, StarVerdict};
pub use numerics::{CPoint, CVec, Rect, SystemConstants, TolerancePolicy};
pub use orbit::{Checkpoint, Itinerary, OrbitRecord, Target};
pub use packing::{ExactGeometry, OpenSet, OracleSet, PackingResult, Shape};
