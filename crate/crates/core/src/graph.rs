//! The time-expanded DAG used by the exact solver and the static reachability
//! graph used by the learning and heuristic solvers.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{Point, SensorNode};
use crate::kinematics;
use crate::problem::Scenario;

/// Default cap on time-expanded vertices (memory guard).
pub const DEFAULT_MAX_VERTICES: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TeVertex {
    /// Requester color; `None` for the depot vertex.
    pub color: Option<usize>,
    pub sensor_id: u32,
    /// Bucket index within the sensor's window.
    pub k: u32,
    /// Bucket time: `t0 + k * step`, or the deadline for the last bucket.
    pub time: f64,
}

/// Bucketing of one requester's window `[t0, D]` into right-closed
/// intervals `(t^{k-1}, t^k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub t0: f64,
    pub step: f64,
    pub deadline: f64,
    /// Index of the last bucket (whose time is the deadline).
    pub last: u32,
}

impl Window {
    pub fn new(t0: f64, step: f64, deadline: f64) -> Self {
        let last = ((deadline - t0) / step).ceil().max(0.0) as u32;
        Window { t0, step, deadline, last }
    }

    pub fn buckets(&self) -> usize {
        self.last as usize + 1
    }

    pub fn time(&self, k: u32) -> f64 {
        if k >= self.last {
            self.deadline
        } else {
            self.t0 + k as f64 * self.step
        }
    }

    /// Smallest bucket whose time is at or after `arrival`, if the arrival
    /// meets the deadline.
    pub fn bucket_of(&self, arrival: f64) -> Option<u32> {
        if !(arrival <= self.deadline) {
            return None;
        }
        let mut k = ((arrival - self.t0) / self.step).ceil().max(0.0).min(self.last as f64) as u32;
        // settle rounding in the division so that time(k-1) < arrival <= time(k)
        while k > 0 && self.time(k - 1) >= arrival {
            k -= 1;
        }
        while self.time(k) < arrival {
            k += 1;
        }
        Some(k)
    }
}

#[derive(Clone, Debug)]
pub struct TimeExpandedGraph {
    /// Vertex 0 is the depot.
    pub vertices: Vec<TeVertex>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// First vertex id of each color's clique.
    clique_base: Vec<usize>,
    positions: Vec<Point>,
    depot: Point,
}

impl TimeExpandedGraph {
    pub const DEPOT: usize = 0;

    /// Builds a graph from explicit parts. Mainly for tests and tooling;
    /// `positions` is indexed by color.
    pub fn from_parts(
        vertices: Vec<TeVertex>,
        edges: &[(usize, usize)],
        positions: Vec<Point>,
        depot: Point,
    ) -> Self {
        let mut clique_base = vec![usize::MAX; positions.len()];
        for (v, vert) in vertices.iter().enumerate() {
            if let Some(c) = vert.color {
                clique_base[c] = clique_base[c].min(v);
            }
        }
        let (offsets, targets) = csr(vertices.len(), edges);
        TimeExpandedGraph {
            vertices,
            offsets,
            targets,
            clique_base,
            positions,
            depot,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| self.successors(u).iter().map(move |&v| (u, v as usize)))
    }

    /// Vertices of one requester across its buckets.
    pub fn clique(&self, color: usize) -> impl Iterator<Item = usize> + '_ {
        let base = self.clique_base[color];
        (base..self.num_vertices()).take_while(move |&v| self.vertices[v].color == Some(color))
    }

    fn point(&self, v: usize) -> &Point {
        match self.vertices[v].color {
            Some(c) => &self.positions[c],
            None => &self.depot,
        }
    }

    /// Travel distance along edge `u -> v`.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.point(u).distance(self.point(v))
    }

    /// Returns a copy with one extra edge; used to exercise cycle detection.
    pub fn with_extra_edge(&self, u: usize, v: usize) -> Self {
        let mut edges: Vec<(usize, usize)> = self.edges().collect();
        edges.push((u, v));
        let (offsets, targets) = csr(self.num_vertices(), &edges);
        TimeExpandedGraph {
            offsets,
            targets,
            ..self.clone()
        }
    }

    /// Edge list, one `src dst weight_m` line per edge. Sensor vertices are
    /// written `<id>@<bucket>`, the depot `v0`.
    pub fn dump(&self) -> String {
        let name = |v: usize| match self.vertices[v].color {
            Some(_) => format!("{}@{}", self.vertices[v].sensor_id, self.vertices[v].k),
            None => "v0".to_string(),
        };
        let mut out = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {} {}", name(u), name(v), self.weight(u, v));
        }
        out
    }
}

fn csr(n: usize, edges: &[(usize, usize)]) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; n + 1];
    for &(u, _) in edges {
        offsets[u + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; edges.len()];
    for &(u, v) in edges {
        targets[fill[u]] = v as u32;
        fill[u] += 1;
    }
    (offsets, targets)
}

pub fn build_time_expanded(scenario: &Scenario) -> Result<TimeExpandedGraph> {
    build_time_expanded_capped(scenario, DEFAULT_MAX_VERTICES)
}

/// One vertex per (requester, bucket); an edge from `v_i(t^k)` to
/// `v_j(t^k')` iff charging at i from bucket time `t^k` and driving to j
/// arrives inside `(t^{k'-1}, t^{k'}]` no later than `D_j`. The depot links
/// to the bucket holding the direct arrival time at each requester.
pub fn build_time_expanded_capped(scenario: &Scenario, max_vertices: usize) -> Result<TimeExpandedGraph> {
    let inst = &scenario.instance;
    let params = &inst.params;
    let m = scenario.demand.num_colors();
    let nodes: Vec<&SensorNode> = (0..m).map(|c| scenario.sensor_of_color(c)).collect();
    let windows: Vec<Window> = (0..m)
        .map(|c| Window::new(params.departure_time, params.time_step, scenario.deadline_of_color(c)))
        .collect();

    let total: usize = 1 + windows.iter().map(Window::buckets).sum::<usize>();
    if total > max_vertices || total > u32::MAX as usize {
        return Err(Error::BudgetExceeded(format!(
            "time-expanded graph needs {total} vertices (cap {max_vertices})"
        )));
    }

    let mut vertices = Vec::with_capacity(total);
    vertices.push(TeVertex {
        color: None,
        sensor_id: 0,
        k: 0,
        time: params.departure_time,
    });
    let mut clique_base = Vec::with_capacity(m);
    for (c, w) in windows.iter().enumerate() {
        clique_base.push(vertices.len());
        for k in 0..=w.last {
            vertices.push(TeVertex {
                color: Some(c),
                sensor_id: nodes[c].id,
                k,
                time: w.time(k),
            });
        }
    }

    let mut offsets = Vec::with_capacity(total + 1);
    let mut targets: Vec<u32> = Vec::new();
    offsets.push(0);
    // depot edges
    for (j, w) in windows.iter().enumerate() {
        if let Some(k) = kinematics::depart(nodes[j], w.deadline, params).and_then(|a| w.bucket_of(a)) {
            targets.push((clique_base[j] + k as usize) as u32);
        }
    }
    offsets.push(targets.len());
    for (i, wi) in windows.iter().enumerate() {
        for k in 0..=wi.last {
            let tau = wi.time(k);
            for (j, wj) in windows.iter().enumerate() {
                if j == i {
                    continue;
                }
                let Some(arrival) = kinematics::advance(tau, nodes[i], nodes[j], wj.deadline, params) else {
                    continue;
                };
                if let Some(kj) = wj.bucket_of(arrival) {
                    // strictly later bucket time keeps the graph acyclic even
                    // for zero-duration moves
                    if wj.time(kj) > tau {
                        targets.push((clique_base[j] + kj as usize) as u32);
                    }
                }
            }
            offsets.push(targets.len());
        }
    }

    Ok(TimeExpandedGraph {
        vertices,
        offsets,
        targets,
        clique_base,
        positions: nodes.iter().map(|n| n.position).collect(),
        depot: params.depot,
    })
}

/// Kahn's algorithm. Fails iff the graph has a cycle.
pub fn topological_order(g: &TimeExpandedGraph) -> Result<Vec<usize>> {
    let n = g.num_vertices();
    let mut indegree = vec![0u32; n];
    for &v in &g.targets {
        indegree[v as usize] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in g.successors(u) {
            let v = v as usize;
            indegree[v] -= 1;
            if indegree[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(Error::CycleDetected)
    }
}

/// Static graph over the depot (node 0) and chargeable requesters (node
/// `color + 1`). `i -> j` exists iff a full recharge of i starting at
/// departure plus the drive still meets `D_j`.
#[derive(Clone, Debug)]
pub struct ReachabilityGraph {
    n: usize,
    adjacent: Vec<bool>,
    points: Vec<Point>,
    ids: Vec<u32>,
}

impl ReachabilityGraph {
    pub const DEPOT: usize = 0;

    pub fn node_of_color(color: usize) -> usize {
        color + 1
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacent[from * self.n + to]
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&to| self.has_edge(from, to))
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.points[from].distance(&self.points[to])
    }

    pub fn num_edges(&self) -> usize {
        self.adjacent.iter().filter(|&&a| a).count()
    }

    pub fn dump(&self) -> String {
        let name = |v: usize| {
            if v == 0 {
                "v0".to_string()
            } else {
                self.ids[v - 1].to_string()
            }
        };
        let mut out = String::new();
        for u in 0..self.n {
            for v in self.successors(u) {
                let _ = writeln!(out, "{} {} {}", name(u), name(v), self.weight(u, v));
            }
        }
        out
    }
}

pub fn build_reachability(scenario: &Scenario) -> ReachabilityGraph {
    let params = &scenario.instance.params;
    let m = scenario.demand.num_colors();
    let n = m + 1;
    let nodes: Vec<&SensorNode> = (0..m).map(|c| scenario.sensor_of_color(c)).collect();
    let deadlines: Vec<f64> = (0..m).map(|c| scenario.deadline_of_color(c)).collect();
    let mut points = vec![params.depot];
    points.extend(nodes.iter().map(|s| s.position));

    let mut adjacent = vec![false; n * n];
    for j in 0..m {
        let travel = params.depot.distance(&nodes[j].position) / params.charger_speed;
        adjacent[j + 1] = params.departure_time + travel <= deadlines[j];
        // the depot has no deadline
        adjacent[(j + 1) * n] = true;
    }
    for i in 0..m {
        let charge = (params.battery_capacity - nodes[i].residual_at_t0) / params.transfer_rate;
        for j in 0..m {
            if i == j {
                continue;
            }
            let travel = nodes[i].position.distance(&nodes[j].position) / params.charger_speed;
            adjacent[(i + 1) * n + j + 1] = params.departure_time + charge + travel <= deadlines[j];
        }
    }
    ReachabilityGraph {
        n,
        adjacent,
        points,
        ids: scenario.demand.colors.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_buckets_are_right_closed() {
        let w = Window::new(0.0, 1.0, 3.0);
        assert_eq!(w.buckets(), 4);
        assert_eq!(w.bucket_of(0.0), Some(0));
        assert_eq!(w.bucket_of(0.5), Some(1));
        assert_eq!(w.bucket_of(1.0), Some(1));
        assert_eq!(w.bucket_of(1.0000001), Some(2));
        assert_eq!(w.bucket_of(3.0), Some(3));
        assert_eq!(w.bucket_of(3.0000001), None);
    }

    #[test]
    fn fractional_deadline_gets_its_own_last_bucket() {
        let w = Window::new(0.0, 1.0, 2.5);
        assert_eq!(w.last, 3);
        assert_eq!(w.time(2), 2.0);
        assert_eq!(w.time(3), 2.5);
        assert_eq!(w.bucket_of(2.2), Some(3));
    }

    #[test]
    fn chain_orders_forward() {
        let vert = |c: Option<usize>, t: f64| TeVertex {
            color: c,
            sensor_id: c.map_or(0, |c| c as u32 + 1),
            k: 0,
            time: t,
        };
        let g = TimeExpandedGraph::from_parts(
            vec![vert(None, 0.0), vert(Some(0), 1.0), vert(Some(1), 2.0)],
            &[(0, 1), (1, 2)],
            vec![Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            Point::new(0.0, 0.0),
        );
        assert_eq!(topological_order(&g).unwrap(), vec![0, 1, 2]);
        assert!(matches!(
            topological_order(&g.with_extra_edge(2, 1)),
            Err(Error::CycleDetected)
        ));
    }
}
