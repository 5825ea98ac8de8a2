//! Directed-graph utilities on adjacency lists.

use std::collections::VecDeque;

/// Strongly connected components (Tarjan, iterative). Components are
/// returned in reverse topological order of the condensation.
pub fn sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (node, next edge position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

pub fn is_strongly_connected(adj: &[Vec<usize>]) -> bool {
    !adj.is_empty() && sccs(adj).len() == 1
}

/// Restriction of `adj` to `nodes`, relabelled to `0..nodes.len()`.
pub fn induced(adj: &[Vec<usize>], nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut pos = vec![usize::MAX; adj.len()];
    for (i, &v) in nodes.iter().enumerate() {
        pos[v] = i;
    }
    nodes
        .iter()
        .map(|&v| adj[v].iter().filter(|&&w| pos[w] != usize::MAX).map(|&w| pos[w]).collect())
        .collect()
}

/// Closed classes: SCCs with no edge leaving them.
pub fn closed_classes(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = sccs(adj);
    let mut comp_of = vec![0usize; adj.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    comps
        .iter()
        .enumerate()
        .filter(|(c, comp)| comp.iter().all(|&v| adj[v].iter().all(|&w| comp_of[w] == *c)))
        .map(|(_, comp)| comp.clone())
        .collect()
}

/// Period of a strongly connected graph (gcd of cycle lengths).
pub fn period(adj: &[Vec<usize>]) -> usize {
    if adj.is_empty() {
        return 0;
    }
    let mut level = vec![usize::MAX; adj.len()];
    level[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    let mut g = 0usize;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            } else {
                let diff = (level[v] + 1).abs_diff(level[w]);
                g = gcd(g, diff);
            }
        }
    }
    g
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Shortest path (in edges) from any node of `from` to any node of `to`,
/// returned as the node sequence. Internal nodes avoid both sets.
pub fn shortest_path_between(adj: &[Vec<usize>], from: &[usize], to: &[usize]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut is_target = vec![false; n];
    for &t in to {
        is_target[t] = true;
    }
    let mut pred = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in from {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if seen[w] && !is_target[w] {
                continue;
            }
            if is_target[w] && !from.contains(&w) {
                let mut path = vec![w, v];
                let mut cur = v;
                while pred[cur] != usize::MAX {
                    cur = pred[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            if !seen[w] {
                seen[w] = true;
                pred[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}
