use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transversality::ConstructionKind;

/// Topological description of the constructed manifold, quoted rather than
/// computed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub total_space: String,
    pub euler_class: i64,
    pub fiber: String,
    pub status: String,
}

const REPORTED: &str = "reported, not computed";

/// Topology metadata of the circle-bundle and higher-dimensional
/// constructions. `rank` is the rank of the bundle (`n` in `RP^{n-1}`).
pub fn report_topology(
    construction: ConstructionKind,
    genus: u32,
    rank: usize,
) -> Result<TopologyReport> {
    let g = i64::from(genus);
    let (total_space, euler_class, fiber) = match construction {
        ConstructionKind::Rp3M => (
            "unit tangent bundle T^1 S".to_string(),
            2 * g - 2,
            "S^1".to_string(),
        ),
        ConstructionKind::Rp3Mprime => (
            "circle bundle over S".to_string(),
            6 * g - 6,
            "S^1".to_string(),
        ),
        ConstructionKind::ProjectiveUr => (
            "P x_SO(2) F^R".to_string(),
            2 * g - 2,
            format!("T^1 RP^{}", rank.saturating_sub(1)),
        ),
        ConstructionKind::ProjectiveUc => (
            "P x_SO(2) F^C".to_string(),
            2 * g - 2,
            format!("T^1 S^{} / U(1)", 2 * rank - 1),
        ),
        other => return Err(Error::UnsupportedConstruction(other.name().to_string())),
    };
    Ok(TopologyReport {
        total_space,
        euler_class,
        fiber,
        status: REPORTED.to_string(),
    })
}
