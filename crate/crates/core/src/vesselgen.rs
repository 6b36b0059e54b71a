//! Synthetic vasculature: random non-overlapping vessel placements and
//! balancing-factor spanning trees.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::dist;
use crate::vessel::{PointVessel2D, VesselNetwork, VesselSegment3D};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based SplitMix64 stream.
///
/// `key = mix(master_seed ^ mix(stream_index + G))` and the `i`-th output
/// (from 0) is `mix(key + (i + 1) G)`, with `G = 0x9E3779B97F4A7C15` and
/// wrapping arithmetic. This is SplitMix64 seeded with `key`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { key: mix(master_seed ^ mix(stream_index.wrapping_add(GOLDEN))), counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Axis-aligned sampling region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub dim: usize,
    pub origin: [f64; 3],
    pub extent: [f64; 3],
}

impl BoxDomain {
    pub fn new(dim: usize, origin: [f64; 3], extent: [f64; 3]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        if (0..dim).any(|k| !(extent[k] > 0.0)) {
            return Err(Error::InvalidInput(format!("extent must be positive, got {extent:?}")));
        }
        Ok(Self { dim, origin, extent })
    }

    pub fn measure(&self) -> f64 {
        self.extent[..self.dim].iter().product()
    }

    /// The box moved inward by `margin` on every side.
    pub fn shrunk(&self, margin: f64) -> Result<Self> {
        let mut s = *self;
        for k in 0..self.dim {
            s.origin[k] += margin;
            s.extent[k] -= 2.0 * margin;
            if !(s.extent[k] > 0.0) {
                return Err(Error::InvalidInput(format!("margin {margin} leaves no room in the domain")));
            }
        }
        Ok(s)
    }

    pub fn center(&self) -> [f64; 3] {
        std::array::from_fn(|k| if k < self.dim { self.origin[k] + 0.5 * self.extent[k] } else { 0.0 })
    }

    fn sample(&self, rng: &mut RngStream) -> [f64; 3] {
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = rng.uniform_in(self.origin[k], self.origin[k] + self.extent[k]);
        }
        x
    }
}

pub const MAX_CONSECUTIVE_REJECTIONS: usize = 100_000;

/// Uniform centers in the margin-shrunk box with pairwise distance at least
/// `2 radius`.
pub fn sample_point_vessels(
    domain: &BoxDomain,
    n: usize,
    radius: f64,
    margin: f64,
    pressure: f64,
    rng: &mut RngStream,
) -> Result<Vec<PointVessel2D>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    if margin < radius {
        return Err(Error::InvalidInput(format!("margin {margin} is smaller than the radius {radius}")));
    }
    let occupied = if domain.dim == 2 { PI * radius * radius } else { 4.0 / 3.0 * PI * radius.powi(3) };
    if !(n as f64 * occupied < 0.5 * domain.measure()) {
        return Err(Error::InvalidInput(format!("{n} vessels of radius {radius} exceed half the domain")));
    }
    let region = domain.shrunk(margin)?;
    let min_d2 = 4.0 * radius * radius;
    let mut out: Vec<PointVessel2D> = Vec::with_capacity(n);
    while out.len() < n {
        let mut rejections = 0;
        loop {
            let x = region.sample(rng);
            let clear = out.iter().all(|v| {
                let d2: f64 = (0..3).map(|k| (v.center[k] - x[k]).powi(2)).sum();
                d2 >= min_d2
            });
            if clear {
                out.push(PointVessel2D { center: x, radius, pressure });
                break;
            }
            rejections += 1;
            if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::PackingTooDense(rejections));
            }
        }
    }
    Ok(out)
}

/// Straight vessels parallel to the z axis with non-overlapping
/// cross-sections. Footprints are sampled in the `(x, y)` face shrunk by
/// `margin`; each vessel runs from `margin` above the bottom face to
/// `margin` below the top face.
pub fn sample_aligned_vessels(
    domain: &BoxDomain,
    n: usize,
    radius: f64,
    margin: f64,
    pressure: f64,
    rng: &mut RngStream,
) -> Result<VesselNetwork> {
    if domain.dim != 3 {
        return Err(Error::InvalidInput("aligned vessels need a 3D box".into()));
    }
    let face = BoxDomain::new(2, domain.origin, [domain.extent[0], domain.extent[1], 0.0])?;
    let z0 = domain.origin[2] + margin;
    let z1 = domain.origin[2] + domain.extent[2] - margin;
    if !(z1 > z0) {
        return Err(Error::InvalidInput(format!("margin {margin} leaves no room in the domain")));
    }
    let segments = sample_point_vessels(&face, n, radius, margin, pressure, rng)?
        .into_iter()
        .map(|v| {
            let [x, y, _] = v.center;
            VesselSegment3D::straight([x, y, z0], [x, y, z1], radius, pressure)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VesselNetwork::new(segments))
}

/// `a = sqrt(β V / (π L))`.
pub fn radius_for_beta(total_length: f64, domain_volume: f64, target_beta: f64) -> Result<f64> {
    if !(total_length > 0.0 && domain_volume > 0.0 && target_beta > 0.0) {
        return Err(Error::InvalidInput("length, volume and target fraction must be positive".into()));
    }
    Ok((target_beta * domain_volume / (PI * total_length)).sqrt())
}

/// Root placement presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootPreset {
    /// Lower corner.
    LL,
    /// Box center.
    C,
    /// Center of the `-x` face.
    FC,
}

impl RootPreset {
    /// Root position inside `domain` shrunk by `margin`.
    pub fn position(&self, domain: &BoxDomain, margin: f64) -> Result<[f64; 3]> {
        let s = domain.shrunk(margin)?;
        Ok(match self {
            RootPreset::LL => s.origin,
            RootPreset::C => s.center(),
            RootPreset::FC => {
                let mut c = s.center();
                c[0] = s.origin[0];
                c
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConfig {
    /// Number of tree nodes including the root.
    pub n_points: usize,
    pub root: [f64; 3],
    pub balancing_factor: f64,
    pub target_beta: f64,
    pub domain: BoxDomain,
    /// Points are drawn from the domain shrunk by this amount.
    pub margin: f64,
    pub pressure: f64,
}

/// A grown tree: node 0 is the root, edges are listed in attachment order
/// as `(parent, child)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselTree {
    pub nodes: Vec<[f64; 3]>,
    pub parent: Vec<Option<usize>>,
    pub edges: Vec<(usize, usize)>,
    pub total_length: f64,
    pub radius: f64,
    pub network: VesselNetwork,
}

/// Grow a tree from explicit points (node 0 is the root). Each step
/// attaches the free node `i` and tree node `j` minimizing
/// `dist(i, j) + bf · pathlen(root → j)`; ties go to the smaller `j`, then
/// the smaller `i`.
pub fn grow_tree(nodes: &[[f64; 3]], bf: f64) -> Result<(Vec<Option<usize>>, Vec<(usize, usize)>)> {
    if !(0.0..=1.0).contains(&bf) {
        return Err(Error::InvalidInput(format!("balancing factor must lie in [0, 1], got {bf}")));
    }
    if nodes.is_empty() {
        return Err(Error::InvalidInput("tree needs at least the root".into()));
    }
    let n = nodes.len();
    let mut parent = vec![None; n];
    let mut in_tree = vec![false; n];
    let mut path = vec![0.0; n];
    in_tree[0] = true;
    // best attachment (cost, j) for each free node
    let mut best: Vec<(f64, usize)> = (0..n).map(|i| (dist(&nodes[i], &nodes[0]), 0)).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick: Option<(f64, usize, usize)> = None;
        for i in 1..n {
            if in_tree[i] {
                continue;
            }
            let (c, j) = best[i];
            let better = match pick {
                None => true,
                Some((pc, pj, pi)) => c < pc || (c == pc && (j < pj || (j == pj && i < pi))),
            };
            if better {
                pick = Some((c, j, i));
            }
        }
        let (_, j, i) = pick.expect("free node left");
        in_tree[i] = true;
        parent[i] = Some(j);
        path[i] = path[j] + dist(&nodes[i], &nodes[j]);
        edges.push((j, i));
        for k in 1..n {
            if in_tree[k] {
                continue;
            }
            let c = dist(&nodes[k], &nodes[i]) + bf * path[i];
            if c < best[k].0 || (c == best[k].0 && i < best[k].1) {
                best[k] = (c, i);
            }
        }
    }
    Ok((parent, edges))
}

/// Sample `n_points - 1` points uniformly in the margin-shrunk box, grow the
/// tree from `cfg.root` and size a constant radius for `target_beta`.
pub fn build_tree(cfg: &TreeConfig, rng: &mut RngStream) -> Result<VesselTree> {
    if cfg.n_points < 2 {
        return Err(Error::InvalidInput("a tree needs at least one point besides the root".into()));
    }
    if cfg.domain.dim != 3 {
        return Err(Error::InvalidInput("trees are grown in 3D".into()));
    }
    let region = cfg.domain.shrunk(cfg.margin)?;
    let mut nodes = Vec::with_capacity(cfg.n_points);
    nodes.push(cfg.root);
    for _ in 1..cfg.n_points {
        nodes.push(region.sample(rng));
    }
    tree_from_nodes(nodes, cfg)
}

pub fn tree_from_nodes(nodes: Vec<[f64; 3]>, cfg: &TreeConfig) -> Result<VesselTree> {
    let (parent, edges) = grow_tree(&nodes, cfg.balancing_factor)?;
    let total_length: f64 = edges.iter().map(|&(j, i)| dist(&nodes[j], &nodes[i])).sum();
    let radius = radius_for_beta(total_length, cfg.domain.measure(), cfg.target_beta)?;
    // segment k is the edge ending at child edges[k].1
    let mut seg_of_child = vec![None; nodes.len()];
    for (k, &(_, i)) in edges.iter().enumerate() {
        seg_of_child[i] = Some(k);
    }
    let mut segments = Vec::with_capacity(edges.len());
    let mut parents = Vec::with_capacity(edges.len());
    for &(j, i) in &edges {
        segments.push(VesselSegment3D::straight(nodes[j], nodes[i], radius, cfg.pressure)?);
        parents.push(seg_of_child[j]);
    }
    let network = VesselNetwork { segments, parents: Some(parents) };
    Ok(VesselTree { nodes, parent, edges, total_length, radius, network })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rng_is_reproducible_and_streams_differ() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let mut c = RngStream::new(7, 4);
        let xa: Vec<u64> = (0..10).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..10).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..10).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        for _ in 0..1000 {
            let u = a.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // SplitMix64 seeded with 0 (reference sequence of the algorithm)
        let mut r = RngStream { key: 0, counter: 0 };
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn aligned_vessels_span_the_box() {
        let d = BoxDomain::new(3, [0.0; 3], [1.0; 3]).unwrap();
        let mut rng = RngStream::new(5, 0);
        let net = sample_aligned_vessels(&d, 30, 0.01, 0.1, 1.0, &mut rng).unwrap();
        assert_eq!(net.segments.len(), 30);
        for s in &net.segments {
            let p = s.points();
            assert_eq!(p[0][2], 0.1);
            assert_eq!(p[1][2], 0.9);
            assert_eq!((p[0][0], p[0][1]), (p[1][0], p[1][1]));
            assert!((0..2).all(|k| (0.1..=0.9).contains(&p[0][k])));
        }
        assert_relative_eq!(net.total_length(), 30.0 * 0.8, epsilon = 1e-12);
        assert!(sample_aligned_vessels(&d, 3, 0.01, 0.5, 1.0, &mut rng).is_err());
    }

    fn unit_square() -> BoxDomain {
        BoxDomain::new(2, [0.0; 3], [1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn point_vessels() {
        let d = unit_square();
        let mut rng = RngStream::new(1, 0);
        let one = sample_point_vessels(&d, 1, 0.05, 0.1, 1.0, &mut rng).unwrap();
        assert!(one[0].center[..2].iter().all(|&x| (0.1..=0.9).contains(&x)));
        let r = 5.65e-3;
        let many = sample_point_vessels(&d, 500, r, r, 1.0, &mut RngStream::new(2, 0)).unwrap();
        assert_relative_eq!(500.0 * PI * r * r, 0.0501, epsilon = 1e-4);
        for i in 0..many.len() {
            for j in 0..i {
                assert!(dist(&many[i].center, &many[j].center) >= 2.0 * r);
            }
        }
        let again = sample_point_vessels(&d, 500, r, r, 1.0, &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(many, again);
        assert!(sample_point_vessels(&d, 100, 0.06, 0.06, 1.0, &mut rng).is_err());
        assert!(sample_point_vessels(&d, 1, 0.05, 0.01, 1.0, &mut rng).is_err());
    }

    #[test]
    fn packing_failure_is_reported() {
        let d = unit_square();
        // below the area guard, yet impossible to pack in the shrunk box
        let err = sample_point_vessels(&d, 10, 0.12, 0.3, 1.0, &mut RngStream::new(0, 0)).unwrap_err();
        assert_eq!(err, Error::PackingTooDense(MAX_CONSECUTIVE_REJECTIONS));
    }

    #[test]
    fn tree_examples() {
        let chain = [[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let (parent, _) = grow_tree(&chain, 0.0).unwrap();
        assert_eq!(parent, vec![None, Some(0), Some(1)]);
        let star = [[0.0; 3], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        let (parent, _) = grow_tree(&star, 1.0).unwrap();
        assert_eq!(parent, vec![None, Some(0), Some(0)]);
        let (parent, _) = grow_tree(&star, 0.0).unwrap();
        assert_eq!(parent, vec![None, Some(0), Some(1)]);
        assert!(grow_tree(&star, 1.5).is_err());
    }

    #[test]
    fn radius_examples() {
        let a = radius_for_beta(0.3839, 2.7e-8, 0.05).unwrap();
        assert!((a - 3.3455e-5).abs() / 3.3455e-5 < 5e-3);
        assert_relative_eq!(PI * a * a * 0.3839 / 2.7e-8, 0.05, max_relative = 1e-12);
        assert!(radius_for_beta(1.0, 1.0, 1e-12).unwrap() < 1e-6);
        assert!(radius_for_beta(0.0, 1.0, 0.05).is_err());
    }

    #[test]
    fn presets() {
        let d = BoxDomain::new(3, [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(RootPreset::LL.position(&d, 0.1).unwrap(), [0.1, 0.1, 0.1]);
        assert_eq!(RootPreset::C.position(&d, 0.1).unwrap(), [0.5, 0.5, 0.5]);
        assert_eq!(RootPreset::FC.position(&d, 0.1).unwrap(), [0.1, 0.5, 0.5]);
    }

    #[test]
    fn built_tree_structure() {
        let domain = BoxDomain::new(3, [0.0; 3], [1.0; 3]).unwrap();
        let cfg = TreeConfig {
            n_points: 40,
            root: [0.1, 0.1, 0.1],
            balancing_factor: 0.5,
            target_beta: 0.05,
            domain,
            margin: 0.1,
            pressure: 1.0,
        };
        let t = build_tree(&cfg, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(t.edges.len(), 39);
        assert_eq!(t.network.segments.len(), 39);
        assert_relative_eq!(t.network.total_length(), t.total_length, max_relative = 1e-12);
        assert_relative_eq!(t.network.vessel_volume(), 0.05, max_relative = 1e-12);
        let again = build_tree(&cfg, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(t.network.to_text(), again.network.to_text());
    }
}
