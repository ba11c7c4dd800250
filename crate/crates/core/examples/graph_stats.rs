//! Descriptive statistics of a small network and its largest component.

use segnet::graph::{build_graph, largest_connected_component, network_stats};

fn main() -> segnet::error::Result<()> {
    let edges = [
        ("ana", "ben"),
        ("ben", "cai"),
        ("cai", "ana"),
        ("cai", "dev"),
        ("dev", "eli"),
        ("eli", "fay"),
        ("fay", "dev"),
        ("gus", "hal"),
    ];
    let (graph, ids) = build_graph(&edges, None)?;
    let lcc = largest_connected_component(&graph)?;
    let stats = network_stats(&graph, &lcc.graph);
    println!("{stats:#?}");
    let members: Vec<&str> = lcc.new_to_old.iter().map(|&i| ids.id(i)).collect();
    println!("largest component: {members:?}");
    for (i, c) in graph.local_clustering().iter().enumerate() {
        println!(
            "{:>4}  degree {}  clustering {c:.3}",
            ids.id(i),
            graph.degree(i)
        );
    }
    Ok(())
}
