//! Geometric primitives and certificate search.

pub mod cone;
pub mod householder;
pub mod hyperplane;
pub mod projection;
pub mod sector;

pub use cone::{build_cone_frame, ConeFrame, MAX_CONE_RATIO};
pub use householder::householder_to_minus_e1;
pub use hyperplane::{find_separating_hyperplane, hull_distance_witness, HyperplaneCertificate};
pub use projection::{orthonormal_basis, projection_injectivity_check, INJECTIVITY_GAP};
pub use sector::{
    check_sector_containment, find_sector_certificate, ContainmentReport, SectorCertificate,
    SectorSearch,
};
