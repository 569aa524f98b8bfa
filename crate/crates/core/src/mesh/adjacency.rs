use super::IndexedMesh;
use crate::scalar::Real;

/// Compressed vertex neighbourhoods: the neighbours of `i` are
/// `neighbors[offsets[i]..offsets[i + 1]]`, sorted ascending, with matching
/// Euclidean edge lengths in `lengths`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexAdjacency<T> {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    lengths: Vec<T>,
}

impl<T: Real> VertexAdjacency<T> {
    pub fn vertex_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn lengths(&self, v: usize) -> &[T] {
        &self.lengths[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn edges(&self, v: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.neighbors(v)
            .iter()
            .zip(self.lengths(v))
            .map(|(&n, &l)| (n as usize, l))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }
}

/// Builds the deduplicated, undirected face-edge graph of `m`.
pub fn build_adjacency<T: Real>(m: &IndexedMesh<T>) -> VertexAdjacency<T> {
    let n = m.vertex_count();
    // Every face contributes both directions of its three edges.
    let mut counts = vec![0usize; n + 1];
    for f in &m.faces {
        for &v in f {
            counts[v as usize] += 2;
        }
    }
    let mut start = vec![0usize; n + 1];
    for i in 0..n {
        start[i + 1] = start[i] + counts[i];
    }
    let mut fill = start.clone();
    let mut raw = vec![0u32; start[n]];
    for f in &m.faces {
        for k in 0..3 {
            let a = f[k];
            let b = f[(k + 1) % 3];
            raw[fill[a as usize]] = b;
            fill[a as usize] += 1;
            raw[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
    }

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut neighbors = Vec::with_capacity(raw.len() / 2);
    for i in 0..n {
        let row = &mut raw[start[i]..start[i + 1]];
        row.sort_unstable();
        let mut last = None;
        for &j in row.iter() {
            if last != Some(j) {
                neighbors.push(j);
                last = Some(j);
            }
        }
        offsets.push(neighbors.len());
    }
    neighbors.shrink_to_fit();

    let mut lengths = Vec::with_capacity(neighbors.len());
    for i in 0..n {
        let p = m.positions[i];
        lengths.extend(
            neighbors[offsets[i]..offsets[i + 1]]
                .iter()
                .map(|&j| p.distance(m.positions[j as usize])),
        );
    }

    VertexAdjacency {
        offsets,
        neighbors,
        lengths,
    }
}
