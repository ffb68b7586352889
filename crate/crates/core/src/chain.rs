//! The Markov chain induced by a stationary policy.
//!
//! Exact evaluation works class by class over the strongly connected
//! components of the transition graph, sinks first. Singleton components are
//! a direct backward step, so acyclic chains feeding absorbing states are
//! evaluated by a single pass in topological order; larger components get a
//! dense LU solve.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::Result;
use crate::ext::ExtNonnegReal;
use crate::model::{MdpModel, StationaryPolicy, TransitionRow};

const INF: ExtNonnegReal = ExtNonnegReal::INFINITY;

pub struct InducedChain<'a> {
    costs: Vec<ExtNonnegReal>,
    rows: Vec<&'a TransitionRow>,
    /// Components in reverse topological order (every component after the
    /// ones it can reach). Members sorted ascending.
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
}

impl<'a> InducedChain<'a> {
    pub fn new(model: &'a MdpModel, policy: &StationaryPolicy) -> Result<Self> {
        policy.check_feasible(model)?;
        let n = model.num_states();
        let mut costs = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        let mut graph = DiGraph::<(), ()>::with_capacity(n, n);
        for _ in 0..n {
            graph.add_node(());
        }
        for x in 0..n {
            let action = &model.actions(x)[policy[x]];
            costs.push(action.cost);
            rows.push(&action.row);
            for &(z, _) in action.row.entries() {
                graph.add_edge(NodeIndex::new(x), NodeIndex::new(z), ());
            }
        }
        let mut components: Vec<Vec<usize>> = tarjan_scc(&graph)
            .into_iter()
            .map(|c| {
                let mut members: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
                members.sort_unstable();
                members
            })
            .collect();
        components.shrink_to_fit();
        let mut component_of = vec![0; n];
        for (k, c) in components.iter().enumerate() {
            for &x in c {
                component_of[x] = k;
            }
        }
        Ok(Self { costs, rows, components, component_of })
    }

    pub fn num_states(&self) -> usize {
        self.costs.len()
    }

    fn is_closed(&self, k: usize) -> bool {
        self.components[k]
            .iter()
            .all(|&x| self.rows[x].entries().iter().all(|&(z, _)| self.component_of[z] == k))
    }

    /// Closed communicating classes (the recurrent classes of the chain).
    pub fn recurrent_classes(&self) -> Vec<&[usize]> {
        (0..self.components.len())
            .filter(|&k| self.is_closed(k))
            .map(|k| self.components[k].as_slice())
            .collect()
    }

    /// Expected total α-discounted cost from every state.
    ///
    /// For `α = 1` a closed class with any positive cost has value `+∞`; a
    /// zero-cost closed class has value 0.
    pub fn discounted(&self, alpha: f64) -> Vec<ExtNonnegReal> {
        let n = self.num_states();
        if alpha == 0.0 {
            return self.costs.clone();
        }
        let mut v = vec![ExtNonnegReal::ZERO; n];
        for (k, members) in self.components.iter().enumerate() {
            // Outside contribution c(x) + α Σ_{z ∉ C} p v(z), and the internal block.
            let mut rhs = Vec::with_capacity(members.len());
            let mut infinite = false;
            for &x in members {
                let mut acc = self.costs[x];
                for &(z, p) in self.rows[x].entries() {
                    if self.component_of[z] != k {
                        acc += v[z].scale(alpha * p);
                    }
                }
                infinite |= acc.is_infinite();
                rhs.push(acc.get());
            }
            // With α > 0 every member reaches every other with positive weight.
            if infinite {
                for &x in members {
                    v[x] = INF;
                }
                continue;
            }
            if alpha == 1.0 && self.is_closed(k) && self.has_cycle(k) {
                let value = if rhs.iter().all(|&c| c == 0.0) { ExtNonnegReal::ZERO } else { INF };
                for &x in members {
                    v[x] = value;
                }
                continue;
            }
            if let [x] = members[..] {
                let self_loop = self.self_loop(x);
                v[x] = ExtNonnegReal::finite((rhs[0] / (1.0 - alpha * self_loop)).max(0.0));
                continue;
            }
            let solved = self.solve_block(k, alpha, &rhs);
            for (&x, s) in members.iter().zip(solved.iter()) {
                v[x] = ExtNonnegReal::finite(s.max(0.0));
            }
        }
        v
    }

    /// Long-run average cost `lim (1/T) E Σ_{t<T} c` from every state.
    pub fn average_costs(&self) -> Vec<ExtNonnegReal> {
        let n = self.num_states();
        let mut g = vec![ExtNonnegReal::ZERO; n];
        for (k, members) in self.components.iter().enumerate() {
            if self.is_closed(k) {
                let gain = self.class_gain(k);
                for &x in members {
                    g[x] = gain;
                }
                continue;
            }
            // Transient: g = P g, i.e. (I - P_CC) g_C = P_{C,out} g_out.
            let mut rhs = Vec::with_capacity(members.len());
            let mut infinite = false;
            for &x in members {
                let mut acc = ExtNonnegReal::ZERO;
                for &(z, p) in self.rows[x].entries() {
                    if self.component_of[z] != k {
                        acc += g[z].scale(p);
                    }
                }
                infinite |= acc.is_infinite();
                rhs.push(acc.get());
            }
            if infinite {
                for &x in members {
                    g[x] = INF;
                }
                continue;
            }
            if let [x] = members[..] {
                g[x] = ExtNonnegReal::finite((rhs[0] / (1.0 - self.self_loop(x))).max(0.0));
                continue;
            }
            let solved = self.solve_block(k, 1.0, &rhs);
            for (&x, s) in members.iter().zip(solved.iter()) {
                g[x] = ExtNonnegReal::finite(s.max(0.0));
            }
        }
        g
    }

    /// Stationary distribution of closed class `k`, in member order.
    pub fn stationary_distribution(&self, members: &[usize]) -> Vec<f64> {
        let m = members.len();
        if m == 1 {
            return vec![1.0];
        }
        let local = |z: usize| members.binary_search(&z).ok();
        // Rows of (I - P)^T, with the last equation replaced by Σ π = 1.
        let mut a = DMatrix::<f64>::identity(m, m);
        for (i, &x) in members.iter().enumerate() {
            for &(z, p) in self.rows[x].entries() {
                if let Some(j) = local(z) {
                    a[(j, i)] -= p;
                }
            }
        }
        for j in 0..m {
            a[(m - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(m);
        b[m - 1] = 1.0;
        let pi = a.lu().solve(&b).expect("irreducible class has a unique stationary law");
        pi.iter().map(|p| p.max(0.0)).collect()
    }

    fn class_gain(&self, k: usize) -> ExtNonnegReal {
        let members = &self.components[k];
        let pi = self.stationary_distribution(members);
        members
            .iter()
            .zip(&pi)
            .map(|(&x, &p)| if self.costs[x].is_infinite() { INF } else { self.costs[x].scale(p) })
            .sum()
    }

    fn self_loop(&self, x: usize) -> f64 {
        self.rows[x].entries().iter().filter(|&&(z, _)| z == x).map(|&(_, p)| p).sum()
    }

    fn has_cycle(&self, k: usize) -> bool {
        let members = &self.components[k];
        members.len() > 1 || self.self_loop(members[0]) > 0.0
    }

    /// Solves `(I - α P_CC) y = rhs` on component `k`.
    fn solve_block(&self, k: usize, alpha: f64, rhs: &[f64]) -> Vec<f64> {
        let members = &self.components[k];
        let m = members.len();
        let mut a = DMatrix::<f64>::identity(m, m);
        for (i, &x) in members.iter().enumerate() {
            for &(z, p) in self.rows[x].entries() {
                if self.component_of[z] == k {
                    let j = members.binary_search(&z).expect("member of component");
                    a[(i, j)] -= alpha * p;
                }
            }
        }
        let b = DVector::from_column_slice(rhs);
        a.lu()
            .solve(&b)
            .expect("block is nonsingular for a leaking or discounted component")
            .iter()
            .copied()
            .collect()
    }
}
