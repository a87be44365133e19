//! Canonical SMILES.
//!
//! Atoms are ranked by iterative refinement of graph invariants. Remaining
//! ties are broken by trying every member of the lowest tied class and
//! keeping the lexicographically smallest output, so the result depends
//! only on the graph and never on the input atom order.

use super::graph::{BondOrder, MolecularGraph};
use super::smiles::{default_hydrogens, is_organic_subset};

fn initial_classes(graph: &MolecularGraph) -> Vec<usize> {
    let keys: Vec<_> = (0..graph.atom_count())
        .map(|i| {
            let a = &graph.atoms[i];
            (
                a.element.atomic_number(),
                a.isotope.unwrap_or(0),
                a.charge,
                a.total_h(),
                a.aromatic,
                graph.degree(i),
            )
        })
        .collect();
    dense_ranks(&keys)
}

fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}

fn class_count(classes: &[usize]) -> usize {
    classes.iter().max().map_or(0, |m| m + 1)
}

/// Refines classes until the partition is stable. Refinement never merges
/// classes and preserves their relative order.
fn refine(graph: &MolecularGraph, mut classes: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(usize, u64)>)> = (0..graph.atom_count())
            .map(|i| {
                let mut env: Vec<(usize, u64)> = graph
                    .neighbors(i)
                    .iter()
                    .map(|&(n, k)| (classes[n], graph.bonds[k].order.code()))
                    .collect();
                env.sort_unstable();
                (classes[i], env)
            })
            .collect();
        let next = dense_ranks(&keys);
        if class_count(&next) == class_count(&classes) {
            return next;
        }
        classes = next;
    }
}

fn search(graph: &MolecularGraph, classes: Vec<usize>, best: &mut Option<String>) {
    let classes = refine(graph, classes);
    let n = graph.atom_count();
    if class_count(&classes) == n {
        let s = write_smiles(graph, &classes);
        if best.as_ref().is_none_or(|b| s < *b) {
            *best = Some(s);
        }
        return;
    }
    let mut counts = vec![0usize; n];
    for &c in &classes {
        counts[c] += 1;
    }
    let tied = counts.iter().position(|&c| c > 1).expect("a tied class exists");
    for candidate in (0..n).filter(|&i| classes[i] == tied) {
        let split: Vec<(usize, bool)> = classes
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, !(c == tied && i == candidate)))
            .collect();
        search(graph, dense_ranks(&split), best);
    }
}

/// Canonical SMILES of a graph.
pub fn canonicalize(graph: &MolecularGraph) -> String {
    if graph.is_empty() {
        return String::new();
    }
    let mut best = None;
    search(graph, initial_classes(graph), &mut best);
    best.expect("at least one labeling")
}

/// Canonical atom ranks (0 = first) from refinement with symmetric ties
/// broken by lowest original index. Only the class structure is canonical.
pub fn symmetry_classes(graph: &MolecularGraph) -> Vec<usize> {
    refine(graph, initial_classes(graph))
}

fn atom_token(graph: &MolecularGraph, i: usize) -> String {
    let a = &graph.atoms[i];
    let has_multiple = graph.neighbors(i).iter().any(|&(_, k)| {
        matches!(graph.bonds[k].order, BondOrder::Double | BondOrder::Triple)
    });
    let aromatic_symbol_ok = !a.aromatic || matches!(a.element.symbol(), "B" | "C" | "N" | "O" | "P" | "S");
    let organic = is_organic_subset(a.element)
        && a.isotope.is_none()
        && a.charge == 0
        && aromatic_symbol_ok
        && default_hydrogens(a.element, a.aromatic, graph.bond_valence_sum(i), has_multiple)
            == Some(a.total_h());
    let symbol = if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    if organic {
        return symbol;
    }
    let mut s = String::from("[");
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&symbol);
    match a.total_h() {
        0 => {}
        1 => s.push('H'),
        h => {
            s.push('H');
            s.push_str(&h.to_string());
        }
    }
    match a.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}

fn bond_symbol(graph: &MolecularGraph, k: usize) -> &'static str {
    let b = &graph.bonds[k];
    match b.order {
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => "",
        BondOrder::Single => {
            if graph.atoms[b.a].aromatic && graph.atoms[b.b].aromatic {
                "-"
            } else {
                ""
            }
        }
    }
}

fn ring_label(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

/// Writes SMILES following a total atom ranking: each component starts at
/// its lowest-ranked atom and neighbors are visited in rank order.
pub fn write_smiles(graph: &MolecularGraph, ranks: &[usize]) -> String {
    let n = graph.atom_count();
    let sorted_nbrs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut v = graph.neighbors(i).to_vec();
            v.sort_by_key(|&(nb, _)| ranks[nb]);
            v
        })
        .collect();

    // pass 1: DFS tree and ring-closure bonds
    let mut order = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut closures: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut is_tree = vec![false; graph.bonds.len()];
    let mut seen_closure = vec![false; graph.bonds.len()];
    let mut roots: Vec<usize> = Vec::new();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&i| ranks[i]);
    let mut counter = 0;
    for &root in &by_rank {
        if order[root] != usize::MAX {
            continue;
        }
        roots.push(root);
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        order[root] = counter;
        counter += 1;
        while let Some(top) = stack.last_mut() {
            let (v, parent) = (top.0, top.1);
            if top.2 == sorted_nbrs[v].len() {
                stack.pop();
                continue;
            }
            let (w, k) = sorted_nbrs[v][top.2];
            top.2 += 1;
            if Some(k) == parent || is_tree[k] || seen_closure[k] {
                continue;
            }
            if order[w] == usize::MAX {
                is_tree[k] = true;
                children[v].push((w, k));
                order[w] = counter;
                counter += 1;
                stack.push((w, Some(k), 0));
            } else {
                seen_closure[k] = true;
                closures[v].push((w, k));
                closures[w].push((v, k));
            }
        }
    }

    // pass 2: emit
    let mut w = Writer {
        graph,
        order: &order,
        children: &children,
        closures: &closures,
        digit_of_bond: vec![usize::MAX; graph.bonds.len()],
        in_use: vec![true],
        out: String::new(),
    };
    for (ci, &root) in roots.iter().enumerate() {
        if ci > 0 {
            w.out.push('.');
        }
        w.emit(root, None);
    }
    w.out
}

struct Writer<'a> {
    graph: &'a MolecularGraph,
    order: &'a [usize],
    children: &'a [Vec<(usize, usize)>],
    closures: &'a [Vec<(usize, usize)>],
    digit_of_bond: Vec<usize>,
    // index 0 is a sentinel; ring digits start at 1
    in_use: Vec<bool>,
    out: String,
}

impl Writer<'_> {
    fn emit(&mut self, v: usize, via: Option<usize>) {
        if let Some(k) = via {
            self.out.push_str(bond_symbol(self.graph, k));
        }
        self.out.push_str(&atom_token(self.graph, v));

        let mut rc = self.closures[v].clone();
        rc.sort_by_key(|&(w, _)| self.order[w]);
        let mut to_free = Vec::new();
        for &(w, k) in &rc {
            if self.order[w] < self.order[v] {
                let d = self.digit_of_bond[k];
                self.out.push_str(&ring_label(d));
                to_free.push(d);
            } else {
                let d = match self.in_use.iter().position(|u| !u) {
                    Some(p) => p,
                    None => {
                        self.in_use.push(false);
                        self.in_use.len() - 1
                    }
                };
                self.in_use[d] = true;
                self.digit_of_bond[k] = d;
                self.out.push_str(bond_symbol(self.graph, k));
                self.out.push_str(&ring_label(d));
            }
        }
        for d in to_free {
            self.in_use[d] = false;
        }

        let kids = &self.children[v];
        for (idx, &(w, k)) in kids.iter().enumerate() {
            if idx + 1 < kids.len() {
                self.out.push('(');
                self.emit(w, Some(k));
                self.out.push(')');
            } else {
                self.emit(w, Some(k));
            }
        }
    }
}
