use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use segnet::attributes::{Attribute, AttributeTable, NodeAttributes};
use segnet::graph::NodeIds;
use segnet::ingest::{load_village_dir, write_village_dir, IngestConfig, VillageDataset};

fn attribute_value(attr: Attribute) -> BoxedStrategy<Option<u32>> {
    let max = if attr.is_numeric() {
        90
    } else {
        attr.category_count() as u32 - 1
    };
    prop::option::weighted(0.8, 0..=max).boxed()
}

fn node_attributes() -> impl Strategy<Value = NodeAttributes> {
    Attribute::ALL
        .iter()
        .map(|&a| attribute_value(a))
        .collect::<Vec<_>>()
        .prop_map(|values| {
            let mut row = NodeAttributes::missing();
            for (a, v) in Attribute::ALL.into_iter().zip(values) {
                row.set(a, v);
            }
            row
        })
}

fn dataset() -> impl Strategy<Value = VillageDataset> {
    (2usize..30)
        .prop_flat_map(|n| {
            (
                prop::collection::btree_set("[a-z]{1,3}[0-9]{0,3}", n..=n),
                prop::collection::vec(node_attributes(), n..=n),
                prop::collection::vec(((0..n, 0..n), 0..3usize), 0..60),
            )
        })
        .prop_map(|(ids, rows, edges)| {
            let node_ids = NodeIds::from_ids(ids.iter()).unwrap();
            let mut layers: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
            for ((a, b), layer) in edges {
                layers
                    .entry(format!("layer{layer}"))
                    .or_default()
                    .push((a, b));
            }
            VillageDataset::from_layers("v", node_ids, AttributeTable::new(rows), layers)
        })
}

type Keyed = (
    BTreeMap<String, BTreeSet<(String, String)>>,
    BTreeMap<String, NodeAttributes>,
);

/// Id-keyed view, independent of node order. Nodes that have neither ties
/// nor attributes do not survive a write, so they are left out.
fn keyed(d: &VillageDataset) -> Keyed {
    let id = |i: usize| d.node_ids.id(i).to_owned();
    let layers = d
        .layers
        .iter()
        .filter(|(_, e)| !e.is_empty())
        .map(|(name, edges)| {
            let set = edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (id(a), id(b));
                    if x < y {
                        (x, y)
                    } else {
                        (y, x)
                    }
                })
                .collect();
            (name.clone(), set)
        })
        .collect();
    let attrs = (0..d.node_ids.len())
        .filter(|&i| d.graph.degree(i) > 0 || !d.attributes.row(i).is_all_missing())
        .map(|i| (id(i), *d.attributes.row(i)))
        .collect();
    (layers, attrs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn write_then_load_preserves_dataset(d in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        write_village_dir(&d, dir.path()).unwrap();
        let back = load_village_dir(dir.path(), &IngestConfig::new("v")).unwrap();
        prop_assert_eq!(keyed(&back), keyed(&d));
        prop_assert_eq!(back.graph.edge_count(), d.graph.edge_count());
    }
}
