//! Reference computations that share no code with the library: dense
//! Gaussian elimination and exhaustive policy enumeration.

#![allow(dead_code)]

use mdpkit::MdpModel;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// `(I - αP_φ)⁻¹ c_φ` for finite costs and `α < 1`.
pub fn policy_value(model: &MdpModel, choice: &[usize], alpha: f64) -> Vec<f64> {
    let n = model.num_states();
    let mut a = vec![vec![0.0; n]; n];
    let mut c = vec![0.0; n];
    for x in 0..n {
        let act = &model.actions(x)[choice[x]];
        a[x][x] += 1.0;
        for &(z, p) in act.row.entries() {
            a[x][z] -= alpha * p;
        }
        c[x] = act.cost.get();
    }
    solve_dense(a, c)
}

/// Every action vector, by odometer.
pub fn all_choices(model: &MdpModel) -> Vec<Vec<usize>> {
    let counts: Vec<usize> = (0..model.num_states()).map(|x| model.actions(x).len()).collect();
    let mut out = vec![vec![0; counts.len()]];
    for (x, &k) in counts.iter().enumerate() {
        out = out
            .into_iter()
            .flat_map(|c| {
                (0..k).map(move |a| {
                    let mut c = c.clone();
                    c[x] = a;
                    c
                })
            })
            .collect();
    }
    out
}

/// Pointwise minimum over all deterministic stationary policies.
pub fn optimal_value(model: &MdpModel, alpha: f64) -> Vec<f64> {
    all_choices(model).iter().map(|c| policy_value(model, c, alpha)).fold(
        vec![f64::INFINITY; model.num_states()],
        |best, v| best.iter().zip(&v).map(|(a, b)| a.min(*b)).collect(),
    )
}

/// Optimal `T`-step discounted cost from `x`, expanding the whole decision
/// tree (feasible only for tiny models and horizons).
pub fn finite_horizon_bruteforce(model: &MdpModel, alpha: f64, horizon: usize, x: usize) -> f64 {
    if horizon == 0 {
        return 0.0;
    }
    model
        .actions(x)
        .iter()
        .map(|a| {
            let next: f64 = a
                .row
                .entries()
                .iter()
                .map(|&(z, p)| p * finite_horizon_bruteforce(model, alpha, horizon - 1, z))
                .sum();
            a.cost.get() + alpha * next
        })
        .fold(f64::INFINITY, f64::min)
}
