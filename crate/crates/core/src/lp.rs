//! Strict-separation linear program used for vertex and hull-membership tests.
//!
//! For a target `p` and points `q_j` it solves
//!
//! ```text
//! maximize s  subject to  ⟨x, p − q_j⟩ ≥ s  ∀j,   ‖x‖∞ ≤ 1
//! ```
//!
//! The optimum is positive iff `p` lies outside `conv{q_j}` (or is a vertex
//! when `p` itself is left out of the `q_j`). With `x = x⁺ − x⁻` every
//! constraint has a nonnegative right-hand side, so the slack basis is feasible
//! and no phase one is needed. Bland's rule keeps degenerate pivots finite.

const PIVOT_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct Separation {
    pub margin: f64,
    pub direction: Vec<f64>,
}

pub(crate) fn max_separation(target: &[f64], others: &[&[f64]]) -> Separation {
    let n = target.len();
    if others.is_empty() {
        return Separation {
            margin: f64::INFINITY,
            direction: vec![0.0; n],
        };
    }
    // columns: x⁺ (n), x⁻ (n), s, slacks (rows); last column is rhs
    let rows = others.len() + 2 * n;
    let vars = 2 * n + 1;
    let width = vars + rows + 1;
    let mut t = vec![0.0; (rows + 1) * width];
    let at = |i: usize, j: usize| i * width + j;
    for (i, q) in others.iter().enumerate() {
        // s − ⟨d, x⁺⟩ + ⟨d, x⁻⟩ ≤ 0 with d = p − q
        for k in 0..n {
            let d = target[k] - q[k];
            t[at(i, k)] = -d;
            t[at(i, n + k)] = d;
        }
        t[at(i, 2 * n)] = 1.0;
    }
    for k in 0..n {
        let i = others.len() + 2 * k;
        t[at(i, k)] = 1.0;
        t[at(i, n + k)] = -1.0;
        t[at(i, width - 1)] = 1.0;
        t[at(i + 1, k)] = -1.0;
        t[at(i + 1, n + k)] = 1.0;
        t[at(i + 1, width - 1)] = 1.0;
    }
    for i in 0..rows {
        t[at(i, vars + i)] = 1.0;
    }
    // objective row stores −c
    t[at(rows, 2 * n)] = -1.0;
    let mut basis: Vec<usize> = (vars..vars + rows).collect();

    loop {
        let entering = (0..vars + rows).find(|&j| t[at(rows, j)] < -PIVOT_EPS);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let a = t[at(i, e)];
            if a > PIVOT_EPS {
                let ratio = t[at(i, width - 1)] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - PIVOT_EPS || (ratio <= lr + PIVOT_EPS && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // bounded by construction; bail out defensively if not
        let Some((l, _)) = leave else { break };
        let piv = t[at(l, e)];
        for j in 0..width {
            t[at(l, j)] /= piv;
        }
        for i in 0..=rows {
            if i == l {
                continue;
            }
            let f = t[at(i, e)];
            if f != 0.0 {
                for j in 0..width {
                    t[at(i, j)] -= f * t[at(l, j)];
                }
            }
        }
        basis[l] = e;
    }

    let mut value = vec![0.0; vars];
    for (i, &b) in basis.iter().enumerate() {
        if b < vars {
            value[b] = t[at(i, width - 1)];
        }
    }
    let direction = (0..n).map(|k| value[k] - value[n + k]).collect::<Vec<_>>();
    // recompute the margin from the direction to shed pivoting round-off
    let margin = others
        .iter()
        .map(|q| {
            (0..n)
                .map(|k| direction[k] * (target[k] - q[k]))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Separation { margin, direction }
}
