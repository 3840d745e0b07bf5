use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{map_indexed, Workers};
use crate::geodesic::SurfaceGraph;
use crate::math;
use crate::surface::DiscreteHypersurface;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordArcReport {
    pub gamma: f64,
    pub witness: (usize, usize),
    pub chord: f64,
    pub intrinsic: f64,
    pub sources: usize,
    pub steiner: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChordArcOptions {
    /// Number of source vertices; `>= V` uses all of them.
    pub sources: usize,
    pub seed: u64,
    /// Extra graph nodes per edge. One (the midpoint) overestimates flat
    /// distances by up to about 11%; the bias shrinks as this grows.
    pub steiner: usize,
}

impl Default for ChordArcOptions {
    fn default() -> Self {
        ChordArcOptions {
            sources: 64,
            seed: 0,
            steiner: 1,
        }
    }
}

/// Largest ratio of intrinsic (refined graph) to chord distance.
///
/// `opts.sources` distinct vertices are drawn with the seeded generator and
/// each is compared with every other vertex.
pub fn chord_arc_constant(
    mesh: &DiscreteHypersurface,
    opts: &ChordArcOptions,
    workers: Workers,
) -> Result<ChordArcReport> {
    let ChordArcOptions { sources, seed, steiner } = *opts;
    if steiner == 0 {
        return Err(invalid("chord-arc graph needs at least one node per edge"));
    }
    let graph = SurfaceGraph::with_steiner(mesh, steiner);
    if !graph.is_connected() {
        return Err(Error::DisconnectedMesh);
    }
    let n = mesh.num_vertices();
    let mut order: Vec<usize> = (0..n).collect();
    let k = sources.clamp(1, n);
    if k < n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..k {
            let j = rng.random_range(i..n);
            order.swap(i, j);
        }
    }
    order.truncate(k);
    let best = map_indexed(k, workers, |i| {
        let src = order[i];
        let d = graph.distances_from(src);
        let x = mesh.vertex(src);
        let mut top = (1.0f64, (src, src), 0.0, 0.0);
        for (v, &dv) in d.iter().enumerate() {
            if v == src {
                continue;
            }
            let chord = math::dist(x, mesh.vertex(v));
            let ratio = dv / chord;
            if ratio > top.0 {
                top = (ratio, (src, v), chord, dv);
            }
        }
        top
    });
    // first maximum in source order, so the witness is worker-independent
    let mut out = best[0];
    for b in &best[1..] {
        if b.0 > out.0 {
            out = *b;
        }
    }
    Ok(ChordArcReport {
        gamma: out.0,
        witness: out.1,
        chord: out.2,
        intrinsic: out.3,
        sources: k,
        steiner,
    })
}
