//! `Find` and `OFind` on a tree with real edge labels. Only the relative
//! order of the labels matters.

use minfact::labelling::{find_k, full_relabel, ofind_k, write_traces_csv};
use minfact::tree::{Edge, EvTree, PointedTree};
use minfact::Result;

fn main() -> Result<()> {
    let edges = [
        (0, 4, 0.4),
        (1, 2, 0.5),
        (1, 4, 0.7),
        (4, 5, 0.2),
        (3, 4, 0.9),
        (0, 9, 0.95),
        (0, 7, 0.6),
        (7, 8, 0.1),
        (7, 6, 0.8),
    ]
    .iter()
    .map(|&(u, v, label)| Edge { u, v, label })
    .collect();
    let tree = PointedTree::new(10, 0, edges)?;
    let bare = EvTree::unlabelled(tree.clone());

    let (found, lab) = find_k(&bare, 4)?;
    println!("Find_4 labels: {:?}", found.vlabels());
    write_traces_csv(std::io::stdout(), lab.find_traces())?;

    let (ofound, lab) = ofind_k(&bare, 4)?;
    println!("OFind_4 labels: {:?}", ofound.vlabels());
    write_traces_csv(std::io::stdout(), lab.ofind_traces())?;

    // Resuming: OFind on top of Find labels the rest of the tree.
    let (both, _) = ofind_k(&found, 5)?;
    println!("Find_4 then OFind_5: {:?}", both.vlabels());
    println!("full relabelling: {:?}", full_relabel(&tree)?.vlabels());
    Ok(())
}
