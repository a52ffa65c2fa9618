//! Dataset bundles, splits, attacker sampling and synthetic data.

mod bundle;
mod split;
mod synthetic;

pub use bundle::{load_bundle, write_bundle, BundleMeta, DatasetBundle};
pub use split::{
    make_full_split, make_shadow_split, sample_attacker_nodes, snowball_subsample, Split, SplitSpec,
};
pub use synthetic::{generate_citation_like, SyntheticSpec};

use crate::error::Result;

impl DatasetBundle {
    /// The bundle's own split if it has one, otherwise a fresh split with
    /// the default counts for its name.
    pub fn split_or_default(&self, seed: u64) -> Result<Split> {
        match &self.split {
            Some(s) => Ok(s.clone()),
            None => {
                let spec = SplitSpec::for_dataset(&self.name, self.graph.num_nodes(), self.num_classes);
                make_full_split(&self.graph, self.num_classes, &spec, seed)
            }
        }
    }
}
