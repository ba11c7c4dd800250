//! Community detection by Louvain modularity maximization and
//! attribute–community association by normalized mutual information.

mod louvain;
mod nmi;
mod partition;

pub use louvain::{louvain, louvain_runs, LouvainResult, MIN_GAIN};
pub use nmi::{nmi, nmi_complete, NmiResult};
pub use partition::{modularity, modularity_of_partition, Partition};
