//! Comparator quantizers.
//!
//! Preclustering methods work on the 32x32x32 reduced histogram:
//! [`median_cut`], [`wan_split`] and [`wu_bipartition`]. The remaining
//! methods refine a palette iteratively over weighted samples: [`mmm`],
//! [`fuzzy_cmeans`] (FCM and PIM), [`fkm`] and [`skm`].

pub mod boxes;
pub mod fuzzy;
pub mod km_variants;
pub mod median_cut;
pub mod mmm;
pub mod wan;
pub mod wu;

pub use boxes::ColorBox;
pub use fuzzy::{fuzzy_cmeans, FuzzyOutcome, FuzzyParams};
pub use km_variants::{fkm, skm, SkmOutcome, SkmParams};
pub use median_cut::median_cut;
pub use mmm::mmm;
pub use wan::wan_split;
pub use wu::wu_bipartition;
