//! Brute-force reference implementations used as test oracles.
//!
//! Everything here is written for clarity over speed and shares no code with
//! the production crate: projections are checked by quadratic pair counting,
//! spanning trees by exhaustive enumeration, least squares by hand-rolled
//! normal equations, and F-distribution tails by numeric quadrature.

use std::collections::BTreeMap;

/// Count, for every unordered pair of items, how many sets contain both.
/// Quadratic in everything on purpose.
pub fn pair_counts(sets: &[Vec<usize>]) -> BTreeMap<(usize, usize), u64> {
    let mut counts = BTreeMap::new();
    for set in sets {
        for a in 0..set.len() {
            for b in 0..set.len() {
                let (i, j) = (set[a], set[b]);
                if i < j {
                    *counts.entry((i, j)).or_insert(0) += 1;
                }
            }
        }
    }
    counts
}

/// Union-find used only to check whether an edge subset is a spanning tree.
struct Components {
    parent: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

fn connected_components(node_count: usize, edges: &[(usize, usize, u64)]) -> Vec<Vec<usize>> {
    let mut comps = Components::new(node_count);
    for &(i, j, _) in edges {
        comps.union(i, j);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for node in 0..node_count {
        groups.entry(comps.find(node)).or_default().push(node);
    }
    groups.into_values().collect()
}

/// Maximum total weight over all spanning trees of one connected component,
/// found by enumerating every (k-1)-subset of the component's edges.
fn max_spanning_tree_weight(nodes: &[usize], edges: &[(usize, usize, u64)]) -> u64 {
    let k = nodes.len();
    if k <= 1 {
        return 0;
    }
    let node_pos: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(p, &n)| (n, p)).collect();
    let local: Vec<(usize, usize, u64)> = edges
        .iter()
        .filter(|(i, j, _)| node_pos.contains_key(i) && node_pos.contains_key(j))
        .map(|&(i, j, w)| (node_pos[&i], node_pos[&j], w))
        .collect();

    let need = k - 1;
    let mut best: Option<u64> = None;
    let mut chosen = vec![0usize; need];

    // Enumerate index combinations of size k-1 out of local.len().
    fn recurse(
        local: &[(usize, usize, u64)],
        k: usize,
        chosen: &mut Vec<usize>,
        depth: usize,
        start: usize,
        best: &mut Option<u64>,
    ) {
        if depth == chosen.len() {
            let mut comps = Components::new(k);
            let mut weight = 0;
            for &e in chosen.iter() {
                let (i, j, w) = local[e];
                if !comps.union(i, j) {
                    return; // cycle: not a tree
                }
                weight += w;
            }
            if best.map_or(true, |b| weight > b) {
                *best = Some(weight);
            }
            return;
        }
        for e in start..local.len() {
            chosen[depth] = e;
            recurse(local, k, chosen, depth + 1, e + 1, best);
        }
    }
    recurse(&local, k, &mut chosen, 0, 0, &mut best);
    best.expect("component is connected, so a spanning tree exists")
}

/// Maximum total weight of a spanning forest (a maximum spanning tree per
/// connected component), by exhaustive enumeration. Only usable for small
/// graphs.
pub fn max_spanning_forest_weight(node_count: usize, edges: &[(usize, usize, u64)]) -> u64 {
    connected_components(node_count, edges)
        .iter()
        .map(|nodes| max_spanning_tree_weight(nodes, edges))
        .sum()
}

/// Reference semantic feature vector: materialize the full per-hashtag
/// adjacency vectors, sum them, then normalize by the Euclidean norm.
pub fn semantic_vector_reference(
    user_set: &[usize],
    n: usize,
    edges: &[(usize, usize, u64)],
    audience: &[u64],
) -> Vec<f64> {
    let mut sum = vec![0.0; n];
    for &t in user_set {
        let mut row = vec![0.0; n];
        for i in 0..n {
            if i == t {
                row[i] = 1.0;
            } else {
                for &(a, b, w) in edges {
                    if (a, b) == (t.min(i), t.max(i)) {
                        row[i] = w as f64 / audience[t] as f64;
                    }
                }
            }
        }
        for i in 0..n {
            sum[i] += row[i];
        }
    }
    let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut sum {
            *v /= norm;
        }
    }
    sum
}

/// Ordinary least squares through explicit normal equations, solved by
/// Gaussian elimination with partial pivoting. `rows` are feature rows
/// without the intercept; the returned coefficients start with it.
/// Only valid for full-rank designs.
pub fn normal_equations_fit(rows: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let m = rows.len();
    assert_eq!(m, target.len());
    let p = rows.first().map_or(0, Vec::len) + 1;

    // xtx = Xᵀ X and xty = Xᵀ y with X = [1 | rows].
    let design_entry = |r: usize, c: usize| if c == 0 { 1.0 } else { rows[r][c - 1] };
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for a in 0..p {
        for b in 0..p {
            let mut s = 0.0;
            for r in 0..m {
                s += design_entry(r, a) * design_entry(r, b);
            }
            xtx[a][b] = s;
        }
        let mut s = 0.0;
        for r in 0..m {
            s += design_entry(r, a) * target[r];
        }
        xty[a] = s;
    }

    // Gaussian elimination with partial pivoting on [xtx | xty].
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&a, &b| xtx[a][col].abs().partial_cmp(&xtx[b][col].abs()).unwrap())
            .unwrap();
        xtx.swap(col, pivot);
        xty.swap(col, pivot);
        let diag = xtx[col][col];
        assert!(diag.abs() > 1e-12, "normal-equations oracle needs full rank");
        for row in 0..p {
            if row == col {
                continue;
            }
            let factor = xtx[row][col] / diag;
            for c in col..p {
                let v = xtx[col][c];
                xtx[row][c] -= factor * v;
            }
            xty[row] -= factor * xty[col];
        }
    }
    (0..p).map(|i| xty[i] / xtx[i][i]).collect()
}

/// R² for a fitted coefficient vector (intercept first) on the given data.
pub fn r_squared(rows: &[Vec<f64>], target: &[f64], coefficients: &[f64]) -> f64 {
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let mut rss = 0.0;
    let mut tss = 0.0;
    for (row, &y) in rows.iter().zip(target) {
        let pred = coefficients[0]
            + row
                .iter()
                .zip(&coefficients[1..])
                .map(|(x, c)| x * c)
                .sum::<f64>();
        rss += (y - pred) * (y - pred);
        tss += (y - mean) * (y - mean);
    }
    if tss == 0.0 {
        0.0
    } else {
        1.0 - rss / tss
    }
}

/// Upper-tail probability of the F(d1, d2) distribution at `x`, by adaptive
/// Simpson quadrature of the density. Integrates the lower tail of the
/// reciprocal when that is better conditioned.
pub fn f_upper_tail(d1: u64, d2: u64, x: f64) -> f64 {
    assert!(x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    // P(F(d1,d2) > x) = P(F(d2,d1) < 1/x): integrate the bounded lower tail.
    let density = |t: f64| f_density(d2 as f64, d1 as f64, t);
    simpson_adaptive(&density, 0.0, 1.0 / x, 1e-12, 40)
}

fn f_density(d1: f64, d2: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // ln f(x) via the log-gamma function to stay stable for large dof.
    let half1 = d1 / 2.0;
    let half2 = d2 / 2.0;
    let log_beta = ln_gamma(half1) + ln_gamma(half2) - ln_gamma(half1 + half2);
    let log_density = half1 * (d1 / d2).ln() + (half1 - 1.0) * x.ln()
        - (half1 + half2) * (1.0 + d1 * x / d2).ln()
        - log_beta;
    log_density.exp()
}

/// Lanczos approximation of ln Γ(x), g = 7, n = 9.
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let whole = simpson_rule(f, a, b);
    recurse_simpson(f, a, b, c, whole, eps, depth)
}

fn simpson_rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
}

fn recurse_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    c: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let left = simpson_rule(f, a, c);
    let right = simpson_rule(f, c, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        return left + right + (left + right - whole) / 15.0;
    }
    recurse_simpson(f, a, c, 0.5 * (a + c), left, eps / 2.0, depth - 1)
        + recurse_simpson(f, c, b, 0.5 * (c + b), right, eps / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_counts_small() {
        let counts = pair_counts(&[vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
        assert_eq!(counts[&(0, 1)], 2);
        assert_eq!(counts[&(0, 2)], 1);
        assert_eq!(counts[&(1, 2)], 2);
    }

    #[test]
    fn forest_weight_triangle() {
        let edges = [(0, 1, 2), (1, 2, 2), (0, 2, 1)];
        assert_eq!(max_spanning_forest_weight(3, &edges), 4);
    }

    #[test]
    fn forest_weight_disconnected() {
        let edges = [(0, 1, 5), (2, 3, 7), (2, 4, 1), (3, 4, 2)];
        assert_eq!(max_spanning_forest_weight(5, &edges), 5 + 9);
    }

    #[test]
    fn normal_equations_exact_line() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let target: Vec<f64> = (0..6).map(|i| 3.0 + 2.0 * i as f64).collect();
        let beta = normal_equations_fit(&rows, &target);
        assert!((beta[0] - 3.0).abs() < 1e-10);
        assert!((beta[1] - 2.0).abs() < 1e-10);
        assert!((r_squared(&rows, &target, &beta) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        assert!((ln_gamma(2.0)).abs() < 1e-12);
        let half = ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln();
        assert!(half.abs() < 1e-12);
        // Γ(11) = 10!
        assert!((ln_gamma(11.0) - (3628800.0f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn f_tail_median_is_half() {
        for d in [2, 10, 100] {
            let p = f_upper_tail(d, d, 1.0);
            assert!((p - 0.5).abs() < 1e-9, "d = {d}: p = {p}");
        }
    }

    #[test]
    fn f_tail_analytic_check() {
        // For d1 = d2 = 2 the upper tail is 1 / (1 + x).
        for x in [0.5, 1.0, 2.0, 5.0] {
            let p = f_upper_tail(2, 2, x);
            assert!((p - 1.0 / (1.0 + x)).abs() < 1e-9, "x = {x}: p = {p}");
        }
    }
}
