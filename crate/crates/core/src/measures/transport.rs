//! Exact transport distance on `A × [0, 1]` under `d((y,u),(y',u')) = 1(y≠y') + |u−u'|`.
//!
//! This ground cost is the path metric of a graph with one line per letter over the
//! sorted atom positions, where switching lines costs 1 at any position. Transport is then
//! a min-cost flow on that sparse graph. Two letters admit a one-dimensional dynamic program
//! on the flow along one line (slope trick); more letters use successive shortest paths.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::measures::FiniteMeasure2D;

/// Largest support per side accepted by the general flow solver.
pub const FLOW_ATOM_BUDGET: usize = 4096;

const EPS: f64 = 1e-15;

/// Exact distance. Binary supports use the linear-time route at any size; otherwise both
/// supports must fit [`FLOW_ATOM_BUDGET`], and [`wasserstein_upper_bound`] is the fallback.
pub fn wasserstein_2d(p: &FiniteMeasure2D, q: &FiniteMeasure2D) -> Result<f64> {
    check_mass(p, q)?;
    if p.letter_span().max(q.letter_span()) <= 2 {
        return Ok(wasserstein_binary(p, q));
    }
    if p.len() > FLOW_ATOM_BUDGET || q.len() > FLOW_ATOM_BUDGET {
        return Err(Error::TooLarge {
            what: "transport support",
            size: p.len().max(q.len()),
            limit: FLOW_ATOM_BUDGET,
        });
    }
    Ok(wasserstein_flow(p, q))
}

fn check_mass(p: &FiniteMeasure2D, q: &FiniteMeasure2D) -> Result<()> {
    let sp: f64 = p.atoms().iter().map(|a| a.mass).sum();
    let sq: f64 = q.atoms().iter().map(|a| a.mass).sum();
    if (sp - sq).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!(
            "total masses differ: {sp} vs {sq}"
        )));
    }
    Ok(())
}

/// Sorted distinct positions of both supports and the signed excess `p − q` per (letter, position).
fn excess_grid(p: &FiniteMeasure2D, q: &FiniteMeasure2D, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut xs: Vec<f64> = p
        .atoms()
        .iter()
        .chain(q.atoms())
        .map(|a| a.position)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut e = vec![vec![0.0; xs.len()]; m];
    let idx = |x: f64| xs.partition_point(|&y| y < x);
    for a in p.atoms() {
        e[a.letter as usize][idx(a.position)] += a.mass;
    }
    for a in q.atoms() {
        e[a.letter as usize][idx(a.position)] -= a.mass;
    }
    (xs, e)
}

/// Convex piecewise-linear function `min + Σ_L w (l − x)⁺ + Σ_R w (x − r)⁺`.
/// Keys are stored relative to `shift`.
struct SlopeTrick {
    min: f64,
    left: BTreeMap<OrderedFloat<f64>, f64>,
    right: BTreeMap<OrderedFloat<f64>, f64>,
    left_total: f64,
    right_total: f64,
    shift: f64,
}

impl SlopeTrick {
    fn abs_at(c: f64) -> Self {
        let mut s = Self {
            min: 0.0,
            left: BTreeMap::new(),
            right: BTreeMap::new(),
            left_total: 0.0,
            right_total: 0.0,
            shift: 0.0,
        };
        s.add_left(c, 1.0);
        s.add_right(c, 1.0);
        s
    }

    fn key(&self, x: f64) -> OrderedFloat<f64> {
        OrderedFloat(x - self.shift)
    }

    /// Adds `w (x − c)⁺`.
    fn add_right(&mut self, c: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        *self.left.entry(self.key(c)).or_insert(0.0) += w;
        self.left_total += w;
        let mut need = w;
        while need > EPS {
            let Some(mut top) = self.left.last_entry() else { break };
            let l = top.key().0 + self.shift;
            let take = need.min(*top.get());
            self.min += take * (l - c);
            *top.get_mut() -= take;
            if *top.get() <= EPS {
                top.remove();
            }
            need -= take;
            self.left_total -= take;
            *self.right.entry(OrderedFloat(l - self.shift)).or_insert(0.0) += take;
            self.right_total += take;
        }
    }

    /// Adds `w (c − x)⁺`.
    fn add_left(&mut self, c: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        *self.right.entry(self.key(c)).or_insert(0.0) += w;
        self.right_total += w;
        let mut need = w;
        while need > EPS {
            let Some(mut bottom) = self.right.first_entry() else { break };
            let r = bottom.key().0 + self.shift;
            let take = need.min(*bottom.get());
            self.min += take * (c - r);
            *bottom.get_mut() -= take;
            if *bottom.get() <= EPS {
                bottom.remove();
            }
            need -= take;
            self.right_total -= take;
            *self.left.entry(OrderedFloat(r - self.shift)).or_insert(0.0) += take;
            self.left_total += take;
        }
    }

    /// `x ↦ f(x − e)`.
    fn translate(&mut self, e: f64) {
        self.shift += e;
    }

    /// Infimal convolution with `|·|`: slopes clamped to `[−1, 1]`.
    fn clamp_slopes(&mut self) {
        let mut excess = self.left_total - 1.0;
        while excess > EPS {
            let Some(mut low) = self.left.first_entry() else { break };
            let take = excess.min(*low.get());
            *low.get_mut() -= take;
            if *low.get() <= EPS {
                low.remove();
            }
            excess -= take;
            self.left_total -= take;
        }
        let mut excess = self.right_total - 1.0;
        while excess > EPS {
            let Some(mut high) = self.right.last_entry() else { break };
            let take = excess.min(*high.get());
            *high.get_mut() -= take;
            if *high.get() <= EPS {
                high.remove();
            }
            excess -= take;
            self.right_total -= take;
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let l: f64 = self
            .left
            .iter()
            .map(|(k, w)| w * (k.0 + self.shift - x).max(0.0))
            .sum();
        let r: f64 = self
            .right
            .iter()
            .map(|(k, w)| w * (x - k.0 - self.shift).max(0.0))
            .sum();
        self.min + l + r
    }
}

/// Two-letter exact solver. With `x` the flow along line 0 past position `j` and
/// `D_j` the cumulative total excess, line 1 carries `D_j − x`; the value function
/// is convex piecewise-linear in `x` and is propagated position by position.
pub fn wasserstein_binary(p: &FiniteMeasure2D, q: &FiniteMeasure2D) -> f64 {
    let (xs, e) = excess_grid(p, q, 2);
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    let mut f = SlopeTrick::abs_at(e[0][0]);
    let mut cum = e[0][0] + e[1][0];
    for j in 0..n - 1 {
        let gap = xs[j + 1] - xs[j];
        // cost of carrying x on line 0 and cum − x on line 1 across the gap
        f.add_right(0.0, gap);
        f.add_left(0.0, gap);
        f.add_right(cum, gap);
        f.add_left(cum, gap);
        f.translate(e[0][j + 1]);
        f.clamp_slopes();
        cum += e[0][j + 1] + e[1][j + 1];
    }
    f.eval(0.0).max(0.0)
}

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0, cost: -cost });
    }

    /// Successive shortest paths with Dijkstra on reduced costs.
    fn min_cost_flow(&mut self, s: usize, t: usize, demand: f64) -> f64 {
        let n = self.adj.len();
        let mut pot = vec![0.0f64; n];
        let mut total_cost = 0.0;
        let mut remaining = demand;
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        while remaining > 1e-14 {
            dist.fill(f64::INFINITY);
            prev.fill(usize::MAX);
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((OrderedFloat(0.0), s)));
            while let Some(Reverse((OrderedFloat(d), v))) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for &ei in &self.adj[v] {
                    let e = &self.edges[ei];
                    if e.cap <= 1e-15 {
                        continue;
                    }
                    let nd = d + e.cost + pot[v] - pot[e.to];
                    // reduced costs are nonnegative up to rounding
                    let nd = nd.max(d);
                    if nd < dist[e.to] - 1e-15 {
                        dist[e.to] = nd;
                        prev[e.to] = ei;
                        heap.push(Reverse((OrderedFloat(nd), e.to)));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    pot[v] += dist[v];
                }
            }
            let mut push = remaining;
            let mut v = t;
            while v != s {
                let ei = prev[v];
                push = push.min(self.edges[ei].cap);
                v = self.edges[ei ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let ei = prev[v];
                self.edges[ei].cap -= push;
                self.edges[ei ^ 1].cap += push;
                total_cost += push * self.edges[ei].cost;
                v = self.edges[ei ^ 1].to;
            }
            remaining -= push;
        }
        total_cost
    }
}

/// General-alphabet exact solver on the line-and-hub graph.
pub fn wasserstein_flow(p: &FiniteMeasure2D, q: &FiniteMeasure2D) -> f64 {
    let m = p.letter_span().max(q.letter_span()).max(1);
    let (xs, e) = excess_grid(p, q, m);
    let np = xs.len();
    if np == 0 {
        return 0.0;
    }
    let node = |y: usize, j: usize| y * np + j;
    let hub = |j: usize| m * np + j;
    let s = (m + 1) * np;
    let t = s + 1;
    let mut g = FlowGraph::new(t + 1);
    let inf = f64::INFINITY;
    let mut demand = 0.0;
    for y in 0..m {
        for j in 0..np {
            if j + 1 < np {
                let gap = xs[j + 1] - xs[j];
                g.add(node(y, j), node(y, j + 1), inf, gap);
                g.add(node(y, j + 1), node(y, j), inf, gap);
            }
            g.add(node(y, j), hub(j), inf, 0.5);
            g.add(hub(j), node(y, j), inf, 0.5);
            let x = e[y][j];
            if x > 0.0 {
                g.add(s, node(y, j), x, 0.0);
                demand += x;
            } else if x < 0.0 {
                g.add(node(y, j), t, -x, 0.0);
            }
        }
    }
    g.min_cost_flow(s, t, demand).max(0.0)
}

/// Cost of the north-west-corner coupling of the supports sorted by (letter, position).
/// Always an upper bound on the distance, never the distance itself.
pub fn wasserstein_upper_bound(p: &FiniteMeasure2D, q: &FiniteMeasure2D) -> Result<f64> {
    check_mass(p, q)?;
    let (a, b) = (p.atoms(), q.atoms());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (
        a.first().map_or(0.0, |x| x.mass),
        b.first().map_or(0.0, |x| x.mass),
    );
    let mut cost = 0.0;
    while i < a.len() && j < b.len() {
        let t = ra.min(rb);
        let d = if a[i].letter == b[j].letter { 0.0 } else { 1.0 };
        cost += t * (d + (a[i].position - b[j].position).abs());
        ra -= t;
        rb -= t;
        if ra <= EPS {
            i += 1;
            ra = a.get(i).map_or(0.0, |x| x.mass);
        }
        if rb <= EPS {
            j += 1;
            rb = b.get(j).map_or(0.0, |x| x.mass);
        }
    }
    Ok(cost)
}
