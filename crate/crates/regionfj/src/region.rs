//! Regions: the atomic types of the analysis.
//!
//! A region is either `Null` (the region of the `null` literal) or
//! `Created@l` for an allocation label `l`, holding every object created by
//! the `new` expression carrying that label. Region *sets* are the values
//! environments and class tables assign to variables and fields.

use std::collections::BTreeSet;
use std::fmt;

use crate::names::Label;

/// An atomic type: `Null`, or all objects allocated at one labelled `new`.
///
/// The variant order makes the derived ordering agree with the lexicographic
/// order of the rendered forms (`Created@… < Null`), so sorted containers
/// iterate in display order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Region {
    Created(Label),
    Null,
}

impl Region {
    pub fn created(label: impl Into<Label>) -> Self {
        Region::Created(label.into())
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Null => f.write_str("Null"),
            Region::Created(l) => write!(f, "Created@{l}"),
        }
    }
}

/// A finite set of regions. The empty set is the least type, rendered `⊥`.
pub type RegionSet = BTreeSet<Region>;

/// Renders a region set with the joined, bare-singleton convention used
/// throughout the toolkit: `⊥` when empty, `A` for singletons, `A ∨ B`
/// otherwise (elements in their natural order).
pub fn render_region_set(set: &RegionSet) -> String {
    if set.is_empty() {
        return "⊥".to_string();
    }
    set.iter()
        .map(Region::to_string)
        .collect::<Vec<_>>()
        .join(" ∨ ")
}
