//! Structured quadtree / octree meshes over axis-aligned boxes.
//!
//! Leaves are addressed by `(level, integer index at that level)`. Vertex
//! positions are stored on a fixed fine lattice of `2^MAX_LEVEL` steps per
//! axis so that coincident vertices of cells on different levels compare
//! exactly. The tree is kept 2:1 balanced across faces, edges and corners;
//! every vertex that lies inside an edge or face of a coarser neighbour is
//! recorded as a hanging node together with its interpolation weights.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};

/// Hard cap on the refinement depth.
pub const MAX_LEVEL: u32 = 14;

const FINE: u64 = 1 << MAX_LEVEL;

/// Geometry that attracts local refinement.
#[derive(Debug, Clone, PartialEq)]
pub enum Attractor {
    Point([f64; 3]),
    Polyline(Vec<[f64; 3]>),
}

impl Attractor {
    pub fn distance(&self, p: &[f64; 3]) -> f64 {
        match self {
            Attractor::Point(q) => dist(p, q),
            Attractor::Polyline(pts) => {
                if pts.len() == 1 {
                    return dist(p, &pts[0]);
                }
                pts.windows(2)
                    .map(|w| point_segment_distance(p, &w[0], &w[1]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSpec {
    pub base_level: u32,
    pub local_levels: u32,
    pub attractors: Vec<Attractor>,
    pub attractor_radius: f64,
}

impl RefinementSpec {
    pub fn uniform(level: u32) -> Self {
        Self { base_level: level, local_levels: 0, attractors: Vec::new(), attractor_radius: 0.0 }
    }
}

/// A leaf cell of the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub level: u32,
    pub index: [u32; 3],
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Corner vertices, lexicographic with x fastest; only the first `2^dim`
    /// entries are meaningful.
    pub nodes: [usize; 8],
}

impl Cell {
    pub fn center(&self) -> [f64; 3] {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
            0.5 * (self.lo[2] + self.hi[2]),
        ]
    }

    pub fn size(&self) -> [f64; 3] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1], self.hi[2] - self.lo[2]]
    }
}

/// A cell facet lying on the boundary of the root box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFace {
    pub cell: usize,
    /// Face id, numbered −x, +x, −y, +y, −z, +z = 0..5.
    pub face: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    origin: [f64; 3],
    extent: [f64; 3],
    cells: Vec<Cell>,
    nodes: Vec<[f64; 3]>,
    node_keys: Vec<[u64; 3]>,
    /// Hanging node -> free masters with weights (chains already resolved).
    hanging: BTreeMap<usize, Vec<(usize, f64)>>,
    boundary_faces: Vec<BoundaryFace>,
    leaf_index: HashMap<(u32, [u32; 3]), usize>,
    min_level: u32,
    max_level: u32,
}

type Key = (u32, [u32; 3]);

impl Mesh {
    /// Uniform refinement to `base_level`, then `local_levels` rounds of
    /// refining every cell whose center lies within `attractor_radius` of an
    /// attractor, restoring 2:1 balance after each round.
    pub fn build(dim: usize, origin: [f64; 3], extent: [f64; 3], spec: &RefinementSpec) -> Result<Mesh> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        if (0..dim).any(|k| !(extent[k] > 0.0) || !extent[k].is_finite()) {
            return Err(Error::InvalidInput(format!("extent must be positive, got {extent:?}")));
        }
        if spec.base_level < 1 {
            return Err(Error::InvalidInput("base_level must be at least 1".into()));
        }
        let requested = spec.base_level + spec.local_levels;
        if requested > MAX_LEVEL {
            return Err(Error::LevelCap { requested, cap: MAX_LEVEL });
        }
        if spec.local_levels > 0 && !(spec.attractor_radius >= 0.0) {
            return Err(Error::InvalidInput("attractor_radius must be non-negative".into()));
        }
        let mut origin = origin;
        let mut extent = extent;
        if dim == 2 {
            origin[2] = 0.0;
            extent[2] = 0.0;
        }

        let n = 1u32 << spec.base_level;
        let mut leaves: HashSet<Key> = HashSet::new();
        let zn = if dim == 3 { n } else { 1 };
        for k in 0..zn {
            for j in 0..n {
                for i in 0..n {
                    leaves.insert((spec.base_level, [i, j, k]));
                }
            }
        }

        let geom = Geometry { dim, origin, extent };
        for _ in 0..spec.local_levels {
            if spec.attractors.is_empty() {
                break;
            }
            let marked: Vec<Key> = leaves
                .iter()
                .filter(|key| {
                    let c = geom.center(key);
                    spec.attractors.iter().any(|a| a.distance(&c) <= spec.attractor_radius)
                })
                .copied()
                .collect();
            if marked.is_empty() {
                break;
            }
            for key in marked {
                refine(&mut leaves, key, dim);
            }
            balance(&mut leaves, dim);
        }

        Ok(Self::from_leaves(geom, leaves))
    }

    fn from_leaves(geom: Geometry, leaves: HashSet<Key>) -> Mesh {
        let dim = geom.dim;
        let mut keys: Vec<Key> = leaves.into_iter().collect();
        keys.sort_by_key(|&(level, idx)| {
            let s = MAX_LEVEL - level;
            let lo = [(idx[0] as u64) << s, (idx[1] as u64) << s, (idx[2] as u64) << s];
            (lo[2], lo[1], lo[0], level)
        });

        let n_corners = 1usize << dim;
        let mut corner_keys: Vec<[u64; 3]> = Vec::with_capacity(keys.len() * n_corners);
        for &(level, idx) in &keys {
            for a in 0..n_corners {
                corner_keys.push(corner_key(level, &idx, a));
            }
        }
        let mut node_keys = corner_keys.clone();
        node_keys.sort_by_key(|k| (k[2], k[1], k[0]));
        node_keys.dedup();
        let node_lookup: HashMap<[u64; 3], usize> =
            node_keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let nodes: Vec<[f64; 3]> = node_keys.iter().map(|k| geom.position(k)).collect();

        let mut cells = Vec::with_capacity(keys.len());
        let mut leaf_index = HashMap::with_capacity(keys.len());
        let mut boundary_faces = Vec::new();
        let (mut min_level, mut max_level) = (MAX_LEVEL, 0);
        for (ci, &(level, idx)) in keys.iter().enumerate() {
            let mut cnodes = [usize::MAX; 8];
            for (a, slot) in cnodes.iter_mut().enumerate().take(n_corners) {
                *slot = node_lookup[&corner_keys[ci * n_corners + a]];
            }
            let s = MAX_LEVEL - level;
            let lo_k = [(idx[0] as u64) << s, (idx[1] as u64) << s, (idx[2] as u64) << s];
            let hi_k = [lo_k[0] + (1 << s), lo_k[1] + (1 << s), lo_k[2] + (1 << s)];
            let lo = geom.position(&lo_k);
            let mut hi = geom.position(&hi_k);
            if dim == 2 {
                hi[2] = 0.0;
            }
            for k in 0..dim {
                if lo_k[k] == 0 {
                    boundary_faces.push(BoundaryFace { cell: ci, face: 2 * k });
                }
                if hi_k[k] == FINE {
                    boundary_faces.push(BoundaryFace { cell: ci, face: 2 * k + 1 });
                }
            }
            min_level = min_level.min(level);
            max_level = max_level.max(level);
            leaf_index.insert((level, idx), ci);
            cells.push(Cell { level, index: idx, lo, hi, nodes: cnodes });
        }

        let hanging = find_hanging(dim, &keys, &node_lookup);

        Mesh {
            dim,
            origin: geom.origin,
            extent: geom.extent,
            cells,
            nodes,
            node_keys,
            hanging,
            boundary_faces,
            leaf_index,
            min_level,
            max_level,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn extent(&self) -> [f64; 3] {
        self.extent
    }

    pub fn upper(&self) -> [f64; 3] {
        [
            self.origin[0] + self.extent[0],
            self.origin[1] + self.extent[1],
            self.origin[2] + self.extent[2],
        ]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of corners per cell, `2^dim`.
    pub fn nodes_per_cell(&self) -> usize {
        1 << self.dim
    }

    pub fn hanging_nodes(&self) -> &BTreeMap<usize, Vec<(usize, f64)>> {
        &self.hanging
    }

    pub fn is_hanging(&self, node: usize) -> bool {
        self.hanging.contains_key(&node)
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    pub fn min_level(&self) -> u32 {
        self.min_level
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// Box volume (area in 2D).
    pub fn volume(&self) -> f64 {
        self.extent[..self.dim].iter().product()
    }

    pub fn cell_volume(&self, cell: usize) -> f64 {
        let s = self.cells[cell].size();
        s[..self.dim].iter().product()
    }

    /// Diameter (longest diagonal) of the smallest cell.
    pub fn min_cell_diameter(&self) -> f64 {
        let scale = (1u64 << self.max_level) as f64;
        (0..self.dim).map(|k| (self.extent[k] / scale).powi(2)).sum::<f64>().sqrt()
    }

    /// Shortest cell edge on the mesh.
    pub fn min_cell_size(&self) -> f64 {
        let scale = (1u64 << self.max_level) as f64;
        (0..self.dim).map(|k| self.extent[k] / scale).fold(f64::INFINITY, f64::min)
    }

    /// Whether node `n` lies on the boundary face `face`.
    pub fn node_on_face(&self, node: usize, face: usize) -> bool {
        let axis = face / 2;
        if axis >= self.dim {
            return false;
        }
        let target = if face % 2 == 0 { 0 } else { FINE };
        self.node_keys[node][axis] == target
    }

    /// Area (length in 2D) of the boundary face `face` of the root box.
    pub fn face_area(&self, face: usize) -> Result<f64> {
        if face >= 2 * self.dim {
            return Err(Error::UnknownFace(face));
        }
        let axis = face / 2;
        Ok((0..self.dim).filter(|&k| k != axis).map(|k| self.extent[k]).product())
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        self.fine_coords(p).is_some()
    }

    /// Fine-lattice coordinates of `p`, or `None` outside the closed box.
    fn fine_coords(&self, p: &[f64; 3]) -> Option<[f64; 3]> {
        let mut t = [0.0; 3];
        for k in 0..self.dim {
            let v = (p[k] - self.origin[k]) / self.extent[k] * FINE as f64;
            let tol = 1e-9;
            if !(v >= -tol && v <= FINE as f64 + tol) {
                return None;
            }
            t[k] = v.clamp(0.0, FINE as f64);
        }
        Some(t)
    }

    fn leaf_containing(&self, fine: [u64; 3]) -> usize {
        for level in (self.min_level..=self.max_level).rev() {
            let s = MAX_LEVEL - level;
            let idx = [(fine[0] >> s) as u32, (fine[1] >> s) as u32, (fine[2] >> s) as u32];
            if let Some(&c) = self.leaf_index.get(&(level, idx)) {
                return c;
            }
        }
        unreachable!("leaves tile the root box")
    }

    /// Leaf cell containing `p`; points on shared facets resolve to the
    /// lowest cell index.
    pub fn locate_cell(&self, p: &[f64; 3]) -> Result<usize> {
        let t = self.fine_coords(p).ok_or(Error::OutsideDomain(*p))?;
        let mut cand: [[u64; 2]; 3] = [[0, 0]; 3];
        let mut count = [1usize; 3];
        for k in 0..self.dim {
            let f = t[k].floor();
            let fi = f as u64;
            if f == t[k] {
                let mut c = Vec::with_capacity(2);
                if fi > 0 {
                    c.push(fi - 1);
                }
                if fi < FINE {
                    c.push(fi);
                }
                count[k] = c.len();
                cand[k][..c.len()].copy_from_slice(&c);
            } else {
                cand[k][0] = fi.min(FINE - 1);
            }
        }
        let mut best = usize::MAX;
        for &z in &cand[2][..count[2]] {
            for &y in &cand[1][..count[1]] {
                for &x in &cand[0][..count[0]] {
                    best = best.min(self.leaf_containing([x, y, z]));
                }
            }
        }
        Ok(best)
    }

    /// Leaf cells whose closed box meets the closed axis-aligned box of
    /// half-width `radius` around `center`, in ascending index order.
    pub fn cells_in_ball(&self, center: &[f64; 3], radius: f64) -> Vec<usize> {
        let mut qlo = [0.0; 3];
        let mut qhi = [0.0; 3];
        for k in 0..self.dim {
            qlo[k] = center[k] - radius;
            qhi[k] = center[k] + radius;
        }
        let mut out = Vec::new();
        self.collect_box(0, [0, 0, 0], &qlo, &qhi, &mut out);
        out.sort_unstable();
        out
    }

    fn collect_box(&self, level: u32, idx: [u32; 3], qlo: &[f64; 3], qhi: &[f64; 3], out: &mut Vec<usize>) {
        let s = MAX_LEVEL - level;
        for k in 0..self.dim {
            let lo = self.origin[k] + self.extent[k] * (((idx[k] as u64) << s) as f64 / FINE as f64);
            let hi = self.origin[k] + self.extent[k] * ((((idx[k] as u64) + 1) << s) as f64 / FINE as f64);
            if lo > qhi[k] || hi < qlo[k] {
                return;
            }
        }
        if let Some(&c) = self.leaf_index.get(&(level, idx)) {
            out.push(c);
            return;
        }
        if level >= self.max_level {
            return;
        }
        for child in children(idx, self.dim) {
            self.collect_box(level + 1, child, qlo, qhi, out);
        }
    }

    /// Pairs of leaves that touch (share at least a vertex) and differ by
    /// more than one level. Empty on a balanced mesh.
    pub fn balance_violations(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for (ci, cell) in self.cells.iter().enumerate() {
            let lo = cell.lo;
            let hi = cell.hi;
            let pad = self.min_cell_size() * 1e-3;
            let mut qlo = [0.0; 3];
            let mut qhi = [0.0; 3];
            for k in 0..self.dim {
                qlo[k] = lo[k] - pad;
                qhi[k] = hi[k] + pad;
            }
            let mut near = Vec::new();
            self.collect_box(0, [0, 0, 0], &qlo, &qhi, &mut near);
            for cj in near {
                if cj > ci && self.cells[cj].level.abs_diff(cell.level) > 1 {
                    bad.push((ci, cj));
                }
            }
        }
        bad
    }
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    dim: usize,
    origin: [f64; 3],
    extent: [f64; 3],
}

impl Geometry {
    fn position(&self, key: &[u64; 3]) -> [f64; 3] {
        let mut p = [0.0; 3];
        for k in 0..self.dim {
            p[k] = self.origin[k] + self.extent[k] * (key[k] as f64 / FINE as f64);
        }
        p
    }

    fn center(&self, key: &Key) -> [f64; 3] {
        let (level, idx) = *key;
        let n = (1u64 << level) as f64;
        let mut p = [0.0; 3];
        for k in 0..self.dim {
            p[k] = self.origin[k] + self.extent[k] * ((idx[k] as f64 + 0.5) / n);
        }
        p
    }
}

fn corner_key(level: u32, idx: &[u32; 3], corner: usize) -> [u64; 3] {
    let s = MAX_LEVEL - level;
    let mut k = [0u64; 3];
    for (axis, slot) in k.iter_mut().enumerate() {
        let bit = ((corner >> axis) & 1) as u64;
        *slot = ((idx[axis] as u64) + bit) << s;
    }
    k
}

fn children(idx: [u32; 3], dim: usize) -> impl Iterator<Item = [u32; 3]> {
    (0..(1usize << dim)).map(move |c| {
        let mut out = [0u32; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = if k < dim { 2 * idx[k] + ((c >> k) & 1) as u32 } else { 0 };
        }
        out
    })
}

fn refine(leaves: &mut HashSet<Key>, key: Key, dim: usize) {
    if leaves.remove(&key) {
        for child in children(key.1, dim) {
            leaves.insert((key.0 + 1, child));
        }
    }
}

fn find_leaf(leaves: &HashSet<Key>, level: u32, idx: [u32; 3]) -> Option<Key> {
    (0..=level).rev().find_map(|l| {
        let s = level - l;
        let key = (l, [idx[0] >> s, idx[1] >> s, idx[2] >> s]);
        leaves.contains(&key).then_some(key)
    })
}

/// Refine until no two vertex-adjacent leaves differ by more than one level.
fn balance(leaves: &mut HashSet<Key>, dim: usize) {
    let offsets: Vec<[i64; 3]> = neighbor_offsets(dim);
    loop {
        let mut marked: Vec<Key> = Vec::new();
        for &(level, idx) in leaves.iter() {
            if level < 2 {
                continue;
            }
            let n = 1i64 << level;
            for off in &offsets {
                let mut nidx = [0u32; 3];
                let mut inside = true;
                for k in 0..dim {
                    let v = idx[k] as i64 + off[k];
                    if v < 0 || v >= n {
                        inside = false;
                        break;
                    }
                    nidx[k] = v as u32;
                }
                if !inside {
                    continue;
                }
                if let Some(found) = find_leaf(leaves, level, nidx) {
                    if found.0 + 1 < level {
                        marked.push(found);
                    }
                }
            }
        }
        if marked.is_empty() {
            break;
        }
        marked.sort_unstable();
        marked.dedup();
        for key in marked {
            refine(leaves, key, dim);
        }
    }
}

fn neighbor_offsets(dim: usize) -> Vec<[i64; 3]> {
    let zr: Vec<i64> = if dim == 3 { vec![-1, 0, 1] } else { vec![0] };
    let mut out = Vec::new();
    for &z in &zr {
        for y in -1..=1 {
            for x in -1..=1 {
                if x != 0 || y != 0 || z != 0 {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

/// Detect hanging vertices: vertices sitting at an edge midpoint or face
/// center of some leaf. Masters are that edge's endpoints or that face's
/// corners; chains through other hanging vertices are expanded afterwards.
fn find_hanging(dim: usize, keys: &[Key], lookup: &HashMap<[u64; 3], usize>) -> BTreeMap<usize, Vec<(usize, f64)>> {
    let mut raw: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &(level, idx) in keys {
        if level >= MAX_LEVEL {
            continue;
        }
        let corner = |a: usize| lookup[&corner_key(level, &idx, a)];
        let s = MAX_LEVEL - level;
        let half = 1u64 << (s - 1);
        let base = [(idx[0] as u64) << s, (idx[1] as u64) << s, (idx[2] as u64) << s];
        // edges: along axis k, the two endpoints differ in bit k
        for axis in 0..dim {
            for a in 0..(1usize << dim) {
                if (a >> axis) & 1 == 1 {
                    continue;
                }
                let b = a | (1 << axis);
                let mut mid = corner_key(level, &idx, a);
                mid[axis] += half;
                if let Some(&node) = lookup.get(&mid) {
                    raw.entry(node).or_insert_with(|| vec![(corner(a), 0.5), (corner(b), 0.5)]);
                }
            }
        }
        if dim == 3 {
            for axis in 0..3 {
                for side in 0..2u64 {
                    let mut c = [base[0] + half, base[1] + half, base[2] + half];
                    c[axis] = base[axis] + side * (1u64 << s);
                    if let Some(&node) = lookup.get(&c) {
                        let masters: Vec<(usize, f64)> = (0..8)
                            .filter(|a| ((a >> axis) & 1) as u64 == side)
                            .map(|a| (corner(a), 0.25))
                            .collect();
                        raw.entry(node).or_insert(masters);
                    }
                }
            }
        }
    }

    let mut resolved: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (&node, masters) in &raw {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut stack: Vec<(usize, f64)> = masters.clone();
        while let Some((m, w)) = stack.pop() {
            match raw.get(&m) {
                Some(sub) => stack.extend(sub.iter().map(|&(mm, ww)| (mm, w * ww))),
                None => *acc.entry(m).or_insert(0.0) += w,
            }
        }
        resolved.insert(node, acc.into_iter().collect());
    }
    resolved
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub(crate) fn point_segment_distance(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ap = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]];
    dist(p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, level: u32) -> Mesh {
        Mesh::build(dim, [0.0; 3], [1.0; 3], &RefinementSpec::uniform(level)).unwrap()
    }

    #[test]
    fn uniform_2d_level3() {
        let m = unit(2, 3);
        assert_eq!(m.n_cells(), 64);
        assert_eq!(m.n_nodes(), 81);
        assert!((m.min_cell_size() - 0.125).abs() < 1e-15);
        assert!(m.hanging_nodes().is_empty());
    }

    #[test]
    fn uniform_3d_level2() {
        let m = unit(3, 2);
        assert_eq!(m.n_cells(), 64);
        assert_eq!(m.n_nodes(), 125);
    }

    #[test]
    fn local_refinement_near_center() {
        let spec = RefinementSpec {
            base_level: 2,
            local_levels: 1,
            attractors: vec![Attractor::Point([0.5, 0.5, 0.0])],
            attractor_radius: 0.3,
        };
        let m = Mesh::build(2, [0.0; 3], [1.0; 3], &spec).unwrap();
        // the four central level-2 cells split, nothing else
        assert_eq!(m.n_cells(), 28);
        let c = m.locate_cell(&[0.45, 0.45, 0.0]).unwrap();
        assert!((m.cells()[c].size()[0] - 0.125).abs() < 1e-15);
        // midpoints of the refined block's outer edges hang
        assert_eq!(m.hanging_nodes().len(), 8);
        for masters in m.hanging_nodes().values() {
            assert_eq!(masters.len(), 2);
        }
    }

    #[test]
    fn level_cap() {
        let spec = RefinementSpec { base_level: 10, local_levels: 5, attractors: vec![], attractor_radius: 0.1 };
        assert_eq!(
            Mesh::build(2, [0.0; 3], [1.0; 3], &spec).unwrap_err(),
            Error::LevelCap { requested: 15, cap: MAX_LEVEL }
        );
    }

    #[test]
    fn rejects_bad_extent() {
        assert!(Mesh::build(2, [0.0; 3], [1.0, 0.0, 1.0], &RefinementSpec::uniform(2)).is_err());
    }

    #[test]
    fn locate_tie_break() {
        let m = unit(2, 1);
        let ur = m.locate_cell(&[0.51, 0.51, 0.0]).unwrap();
        assert_eq!(m.cells()[ur].index, [1, 1, 0]);
        assert_eq!(m.locate_cell(&[0.5, 0.5, 0.0]).unwrap(), 0);
        assert!(m.locate_cell(&[1.2, 0.5, 0.0]).is_err());
    }

    #[test]
    fn boundary_faces_marked_once() {
        let m = unit(3, 2);
        let mut count = [0usize; 6];
        for f in m.boundary_faces() {
            count[f.face] += 1;
        }
        assert_eq!(count, [16; 6]);
    }

    #[test]
    fn ball_query_extremes() {
        let m = unit(2, 3);
        assert_eq!(m.cells_in_ball(&[0.3, 0.3, 0.0], 0.0), vec![m.locate_cell(&[0.3, 0.3, 0.0]).unwrap()]);
        assert_eq!(m.cells_in_ball(&[0.3, 0.3, 0.0], 2.0).len(), 64);
    }

    #[test]
    fn hanging_chains_resolve_to_free_masters() {
        let spec = RefinementSpec {
            base_level: 2,
            local_levels: 3,
            attractors: vec![Attractor::Point([0.3, 0.6, 0.45])],
            attractor_radius: 0.2,
        };
        let m = Mesh::build(3, [0.0; 3], [1.0; 3], &spec).unwrap();
        assert!(m.balance_violations().is_empty());
        for masters in m.hanging_nodes().values() {
            let total: f64 = masters.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-14);
            assert!(masters.iter().all(|(n, _)| !m.is_hanging(*n)));
        }
        assert!(!m.hanging_nodes().is_empty());
    }
}
