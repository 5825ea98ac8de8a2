//! Minimum and maximum mean cycles (Karp).

use crate::sft::Word;

/// A simple cycle on a weighted digraph.
#[derive(Clone, Debug)]
pub struct MeanCycle {
    /// Mean edge weight along the returned cycle.
    pub value: f64,
    /// Karp's characterization value; agrees with `value` up to round-off.
    pub karp_value: f64,
    /// Edge indices in traversal order.
    pub edges: Vec<usize>,
}

/// Minimum mean cycle of the digraph on `n` nodes with edge list `edges`
/// and weights `w`. Returns `None` for an acyclic graph.
pub fn min_mean_cycle(n: usize, edges: &[(usize, usize)], w: &[f64]) -> Option<MeanCycle> {
    if n == 0 {
        return None;
    }
    let inf = f64::INFINITY;
    // d[k][v]: least weight of a k-edge walk ending at v
    let mut d = vec![vec![inf; n]; n + 1];
    let mut pred = vec![vec![usize::MAX; n]; n + 1];
    d[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=n {
        for (e, &(a, b)) in edges.iter().enumerate() {
            let cand = d[k - 1][a] + w[e];
            if cand < d[k][b] {
                d[k][b] = cand;
                pred[k][b] = e;
            }
        }
    }
    let mut karp = inf;
    for v in 0..n {
        if d[n][v] == inf {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| d[k][v] < inf)
            .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        karp = karp.min(worst);
    }
    if karp == inf {
        return None;
    }
    // every cycle on a critical n-walk is a candidate; keep the best
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut pos = vec![usize::MAX; n];
    for v in 0..n {
        if d[n][v] == inf {
            continue;
        }
        let mut walk = Vec::with_capacity(n);
        let mut cur = v;
        for k in (1..=n).rev() {
            let e = pred[k][cur];
            walk.push(e);
            cur = edges[e].0;
        }
        walk.reverse();
        let mut verts = vec![edges[walk[0]].0];
        let mut stack: Vec<usize> = Vec::new();
        pos[verts[0]] = 0;
        for &e in &walk {
            stack.push(e);
            let next = edges[e].1;
            if pos[next] != usize::MAX {
                let p = pos[next];
                let cyc: Vec<usize> = stack[p..].to_vec();
                let mean = cyc.iter().map(|&e| w[e]).sum::<f64>() / cyc.len() as f64;
                let better = match &best {
                    None => true,
                    Some((bm, bc)) => {
                        let tol = 1e-12 * (1.0 + bm.abs());
                        mean < bm - tol || (mean <= bm + tol && cyc.len() < bc.len())
                    }
                };
                if better {
                    best = Some((mean, cyc));
                }
                for &u in &verts[p + 1..] {
                    pos[u] = usize::MAX;
                }
                stack.truncate(p);
                verts.truncate(p + 1);
            } else {
                pos[next] = verts.len();
                verts.push(next);
            }
        }
        for &u in &verts {
            pos[u] = usize::MAX;
        }
    }
    best.map(|(value, edges)| MeanCycle { value, karp_value: karp, edges })
}

pub fn max_mean_cycle(n: usize, edges: &[(usize, usize)], w: &[f64]) -> Option<MeanCycle> {
    let neg: Vec<f64> = w.iter().map(|x| -x).collect();
    min_mean_cycle(n, edges, &neg).map(|c| MeanCycle { value: -c.value, karp_value: -c.karp_value, ..c })
}

/// Canonical form of a periodic word: primitive root, rotated to its
/// lexicographically least rotation.
pub fn canonical_cycle(w: &[usize]) -> Word {
    let n = w.len();
    let p = (1..=n).find(|&p| n % p == 0 && (0..n).all(|i| w[i] == w[i % p])).unwrap_or(n);
    let root = &w[..p];
    let best = (0..p)
        .map(|r| root[r..].iter().chain(&root[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default();
    Word(best)
}
