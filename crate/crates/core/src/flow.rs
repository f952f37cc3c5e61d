//! Successive-shortest-path min-cost flow with exact rational costs.
//!
//! Only unit and small integer capacities are needed here (three disjoint
//! paths), so each augmentation pushes the bottleneck of one shortest path.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: u32,
    cost: Rational,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    original_cap: Vec<u32>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
            original_cap: Vec::new(),
        }
    }

    /// Adds an arc and its residual twin; returns the forward arc id.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: u32, cost: Rational) -> usize {
        debug_assert!(!cost.is_negative());
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to,
            cap,
            cost: cost.clone(),
        });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.original_cap.push(cap);
        self.original_cap.push(0);
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently carried by forward arc `id`.
    pub fn flow_on(&self, id: usize) -> u32 {
        self.original_cap[id] - self.arcs[id].cap
    }

    pub fn head(&self, id: usize) -> usize {
        self.arcs[id].to
    }

    pub fn out_arcs(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[node].iter().copied().filter(|&a| a % 2 == 0)
    }

    /// Pushes up to `limit` units from `s` to `t` at minimum cost. Returns
    /// the amount sent and its total cost. Initial arc costs must be
    /// nonnegative so zero potentials are feasible.
    pub fn min_cost_flow(&mut self, s: usize, t: usize, limit: u32) -> (u32, Rational) {
        let n = self.adj.len();
        let mut potential = vec![Rational::zero(); n];
        let mut sent = 0;
        let mut cost = Rational::zero();
        while sent < limit {
            let mut dist: Vec<Option<Rational>> = vec![None; n];
            let mut pred: Vec<Option<usize>> = vec![None; n];
            let mut done = vec![false; n];
            let mut heap = BinaryHeap::new();
            dist[s] = Some(Rational::zero());
            heap.push(Reverse((Rational::zero(), s)));
            while let Some(Reverse((d, x))) = heap.pop() {
                if done[x] {
                    continue;
                }
                done[x] = true;
                for &a in &self.adj[x] {
                    let arc = &self.arcs[a];
                    if arc.cap == 0 || done[arc.to] {
                        continue;
                    }
                    let reduced = &arc.cost + &potential[x] - &potential[arc.to];
                    debug_assert!(!reduced.is_negative());
                    let nd = &d + reduced;
                    if dist[arc.to].as_ref().is_none_or(|old| nd < *old) {
                        dist[arc.to] = Some(nd.clone());
                        pred[arc.to] = Some(a);
                        heap.push(Reverse((nd, arc.to)));
                    }
                }
            }
            if dist[t].is_none() {
                break;
            }
            for v in 0..n {
                if let Some(d) = &dist[v] {
                    potential[v] += d;
                }
            }
            let mut bottleneck = limit - sent;
            let mut at = t;
            while at != s {
                let a = pred[at].unwrap();
                bottleneck = bottleneck.min(self.arcs[a].cap);
                at = self.arcs[a ^ 1].to;
            }
            let mut at = t;
            while at != s {
                let a = pred[at].unwrap();
                self.arcs[a].cap -= bottleneck;
                self.arcs[a ^ 1].cap += bottleneck;
                cost += &self.arcs[a].cost * Rational::from_integer(bottleneck.into());
                at = self.arcs[a ^ 1].to;
            }
            sent += bottleneck;
        }
        (sent, cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn picks_cheapest_disjoint_routes() {
        // s=0, t=3; routes 0-1-3 (cost 2), 0-2-3 (cost 5), 0-3 (cost 4).
        let build = || {
            let mut net = FlowNetwork::new(4);
            net.add_arc(0, 1, 1, int(1));
            net.add_arc(1, 3, 1, int(1));
            net.add_arc(0, 2, 1, int(2));
            net.add_arc(2, 3, 1, int(3));
            net.add_arc(0, 3, 1, int(4));
            net
        };
        assert_eq!(build().min_cost_flow(0, 3, 2), (2, int(6)));
        assert_eq!(build().min_cost_flow(0, 3, 5), (3, int(11)));
    }

    #[test]
    fn reroutes_through_residual_arcs() {
        // Classic trap: the greedy first path must be partially undone.
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 1, int(1));
        net.add_arc(1, 2, 1, int(1));
        net.add_arc(2, 3, 1, int(1));
        net.add_arc(0, 2, 1, int(3));
        net.add_arc(1, 3, 1, int(3));
        assert_eq!(net.min_cost_flow(0, 3, 2), (2, int(8)));
        let a = 2; // arc 1->2
        assert_eq!(net.flow_on(a), 0);
    }
}
