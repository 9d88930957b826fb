//! Exact linear minimization over a transportation polytope.
//!
//! Transportation simplex (MODI potentials) started from the north-west
//! corner basis. The basis is always a spanning tree of the bipartite
//! row/column graph with `m + n - 1` cells, degenerate cells included, so
//! the returned plan is a vertex.

/// Minimizes `<cost, X>` over `X >= 0` with row sums `supply` and column
/// sums `demand` (`cost` is row-major `supply.len() x demand.len()`).
/// Supply and demand totals must agree up to rounding.
pub fn transport_vertex(cost: &[f64], supply: &[f64], demand: &[f64]) -> Vec<f64> {
    let (m, n) = (supply.len(), demand.len());
    assert_eq!(cost.len(), m * n, "cost matrix shape");
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let mut basis = north_west_basis(supply, demand);
    let scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let eps = 1e-12 * scale;
    let max_pivots = 50 * (m + n) * (m + n) + 100;
    let mut x = plan_from_basis(&basis, supply, demand);
    for pivot in 0..max_pivots {
        let (u, v) = potentials(&basis, cost, m, n);
        // Dantzig's rule, falling back to Bland's rule against cycling.
        let bland = pivot > max_pivots / 2;
        let mut entering = None;
        let mut best = -eps;
        for i in 0..m {
            for j in 0..n {
                if basis.contains(&(i, j)) {
                    continue;
                }
                let reduced = cost[i * n + j] - u[i] - v[j];
                if reduced < best {
                    entering = Some((i, j));
                    if bland {
                        break;
                    }
                    best = reduced;
                }
            }
            if bland && entering.is_some() {
                break;
            }
        }
        let Some((ei, ej)) = entering else { break };
        let path = tree_path(&basis, m, n, ei, ej);
        // Path cells alternate -, +, -, ... starting next to the entering row.
        let mut theta = f64::INFINITY;
        let mut leave = 0;
        for (k, cell) in path.iter().enumerate().step_by(2) {
            let val = x[cell.0 * n + cell.1];
            if val < theta {
                theta = val;
                leave = k;
            }
        }
        let theta = theta.max(0.0);
        x[ei * n + ej] += theta;
        for (k, cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                x[cell.0 * n + cell.1] -= theta;
            } else {
                x[cell.0 * n + cell.1] += theta;
            }
        }
        let leaving = path[leave];
        basis.retain(|c| *c != leaving);
        basis.push((ei, ej));
        x[leaving.0 * n + leaving.1] = 0.0;
    }
    // Re-derive the plan from the final tree to shed accumulated rounding.
    plan_from_basis(&basis, supply, demand)
}

fn north_west_basis(supply: &[f64], demand: &[f64]) -> Vec<(usize, usize)> {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    let mut basis = Vec::with_capacity(m + n - 1);
    loop {
        let q = s[i].min(d[j]);
        s[i] -= q;
        d[j] -= q;
        basis.push((i, j));
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}

/// Solves the basic cells by repeatedly peeling tree leaves.
fn plan_from_basis(basis: &[(usize, usize)], supply: &[f64], demand: &[f64]) -> Vec<f64> {
    let (m, n) = (supply.len(), demand.len());
    let mut x = vec![0.0; m * n];
    let mut row_left = supply.to_vec();
    let mut col_left = demand.to_vec();
    let mut row_deg = vec![0usize; m];
    let mut col_deg = vec![0usize; n];
    for &(i, j) in basis {
        row_deg[i] += 1;
        col_deg[j] += 1;
    }
    let mut done = vec![false; basis.len()];
    let mut remaining = basis.len();
    while remaining > 0 {
        let mut progressed = false;
        for (k, &(i, j)) in basis.iter().enumerate() {
            if done[k] {
                continue;
            }
            let val = if row_deg[i] == 1 {
                row_left[i]
            } else if col_deg[j] == 1 {
                col_left[j]
            } else {
                continue;
            };
            let val = val.max(0.0);
            x[i * n + j] = val;
            row_left[i] -= val;
            col_left[j] -= val;
            row_deg[i] -= 1;
            col_deg[j] -= 1;
            done[k] = true;
            remaining -= 1;
            progressed = true;
        }
        assert!(progressed, "transport basis is not a spanning tree");
    }
    x
}

/// Dual potentials with `u[0] = 0` and `u[i] + v[j] = c[i][j]` on the tree.
fn potentials(basis: &[(usize, usize)], cost: &[f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut set = 1;
    while set < m + n {
        let before = set;
        for &(i, j) in basis {
            let c = cost[i * n + j];
            if !u[i].is_nan() && v[j].is_nan() {
                v[j] = c - u[i];
                set += 1;
            } else if u[i].is_nan() && !v[j].is_nan() {
                u[i] = c - v[j];
                set += 1;
            }
        }
        assert!(set > before, "transport basis is disconnected");
    }
    (u, v)
}

/// Tree path from row `from_row` to column `to_col`, as the list of basic
/// cells traversed.
fn tree_path(
    basis: &[(usize, usize)],
    m: usize,
    n: usize,
    from_row: usize,
    to_col: usize,
) -> Vec<(usize, usize)> {
    // Nodes: rows 0..m, columns m..m+n.
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
    for (k, &(i, j)) in basis.iter().enumerate() {
        adj[i].push((m + j, k));
        adj[m + j].push((i, k));
    }
    let mut via: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    let mut queue = std::collections::VecDeque::from([from_row]);
    seen[from_row] = true;
    while let Some(node) = queue.pop_front() {
        if node == m + to_col {
            break;
        }
        for &(next, k) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                via[next] = Some((node, k));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = m + to_col;
    while node != from_row {
        let (prev, k) = via[node].expect("entering cell closes a cycle");
        path.push(basis[k]);
        node = prev;
    }
    path.reverse();
    path
}
