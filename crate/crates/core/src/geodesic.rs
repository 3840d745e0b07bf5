//! Intrinsic distances by shortest paths on a refined edge graph.
//!
//! Each edge carries extra nodes (by default its midpoint), and all nodes of
//! one element are joined pairwise by straight segments. Those segments lie
//! in the (flat) element, so every graph path is a path on the surface and the
//! graph distance is an upper bound for the polyhedral geodesic distance.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math::{self, Vec3};
use crate::surface::DiscreteHypersurface;

pub struct SurfaceGraph {
    positions: Vec<Vec3>,
    adjacency: Vec<Vec<(usize, f64)>>,
    vertices: usize,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed for a min-heap; ties broken by node index
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl SurfaceGraph {
    /// Graph with the edge midpoints as the only added nodes.
    pub fn build(mesh: &DiscreteHypersurface) -> Self {
        Self::with_steiner(mesh, 1)
    }

    /// Graph with `k >= 1` equally spaced extra nodes on every edge.
    pub fn with_steiner(mesh: &DiscreteHypersurface, k: usize) -> Self {
        let k = k.max(1);
        let mut positions: Vec<Vec3> = mesh.vertices().to_vec();
        let mut edge_nodes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        // first index of the k nodes on edge (a, b), ordered from min(a, b)
        let mut steiner = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> Vec<usize> {
            let key = (a.min(b), a.max(b));
            let first = *edge_nodes.entry(key).or_insert_with(|| {
                let first = positions.len();
                for i in 1..=k {
                    let t = i as f64 / (k + 1) as f64;
                    let p = math::add(
                        math::scale(positions[key.0], 1.0 - t),
                        math::scale(positions[key.1], t),
                    );
                    positions.push(p);
                }
                first
            });
            let mut ids: Vec<usize> = (first..first + k).collect();
            if a > b {
                ids.reverse();
            }
            ids
        };
        let mut cells: Vec<Vec<usize>> = Vec::with_capacity(mesh.num_elements());
        for el in mesh.elements() {
            if el.len() == 2 {
                let mut chain = vec![el[0]];
                chain.extend(steiner(el[0], el[1], &mut positions));
                chain.push(el[1]);
                cells.push(chain);
                continue;
            }
            let mut nodes: Vec<usize> = el.to_vec();
            for i in 0..3 {
                nodes.extend(steiner(el[i], el[(i + 1) % 3], &mut positions));
            }
            cells.push(nodes);
        }
        let mut adjacency = vec![Vec::new(); positions.len()];
        for (nodes, el) in cells.iter().zip(mesh.elements()) {
            if el.len() == 2 {
                for pair in nodes.windows(2) {
                    let (u, v) = (pair[0], pair[1]);
                    let w = math::dist(positions[u], positions[v]);
                    adjacency[u].push((v, w));
                    adjacency[v].push((u, w));
                }
                continue;
            }
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    let (u, v) = (nodes[i], nodes[j]);
                    let w = math::dist(positions[u], positions[v]);
                    adjacency[u].push((v, w));
                    adjacency[v].push((u, w));
                }
            }
        }
        SurfaceGraph {
            positions,
            adjacency,
            vertices: mesh.num_vertices(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.positions.len()
    }

    /// Graph distances from mesh vertex `source` to every mesh vertex;
    /// unreachable vertices get `f64::INFINITY`.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.positions.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry(nd, v));
                }
            }
        }
        dist.truncate(self.vertices);
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.vertices == 0 || self.distances_from(0).iter().all(|d| d.is_finite())
    }
}
