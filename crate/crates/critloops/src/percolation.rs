//! Critical Bernoulli site percolation on the triangular lattice: fair
//! two-coloring of sites, cluster labeling, oriented cluster-boundary
//! contour tracing (the ground truth the loop builder is checked against),
//! disjoint-crossing counts in annuli, and boundary event detectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};

use crate::hexlattice::{DirectedEdge, DiscreteDomain, HexCoord, HexVertex};
use crate::loopbuilder::OrientedLoop;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Yellow,
}

impl Color {
    pub fn swapped(self) -> Color {
        match self {
            Color::Blue => Color::Yellow,
            Color::Yellow => Color::Blue,
        }
    }

    pub fn is_blue(self) -> bool {
        matches!(self, Color::Blue)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D049BB133111EB);
    z ^= z >> 31;
    z
}

/// The color of one site under key (seed, stream), independent of any
/// sampling order: a counter-based generator keyed by the coordinates, so
/// lazy site-by-site queries and eager whole-region sampling agree bit
/// for bit.
pub fn site_color(seed: u64, stream: u64, h: HexCoord) -> Color {
    let pack = ((h.q as u32 as u64) << 32) | (h.r as u32 as u64);
    let k = mix64(mix64(mix64(seed) ^ stream) ^ pack);
    if k & 1 == 1 {
        Color::Blue
    } else {
        Color::Yellow
    }
}

/// A fair coloring of a finite site set, reproducible from (seed, stream).
#[derive(Debug, Clone)]
pub struct Coloring {
    pub region: Vec<HexCoord>,
    pub colors: HashMap<HexCoord, Color>,
    pub seed: u64,
    pub stream: u64,
}

impl Coloring {
    pub fn color(&self, h: HexCoord) -> Option<Color> {
        self.colors.get(&h).copied()
    }

    /// Color swap of the whole configuration.
    pub fn swapped(&self) -> Coloring {
        Coloring {
            region: self.region.clone(),
            colors: self.colors.iter().map(|(&h, &c)| (h, c.swapped())).collect(),
            seed: self.seed,
            stream: self.stream,
        }
    }
}

/// Sample i.i.d. fair colors on a region.
pub fn sample<I: IntoIterator<Item = HexCoord>>(region: I, seed: u64, stream: u64) -> Coloring {
    let mut region: Vec<HexCoord> = region.into_iter().collect();
    region.sort();
    region.dedup();
    let colors = region.iter().map(|&h| (h, site_color(seed, stream, h))).collect();
    Coloring { region, colors, seed, stream }
}

/// Connected monochromatic components.
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    pub label: HashMap<HexCoord, u32>,
    pub color_of: Vec<Color>,
}

impl ClusterLabeling {
    pub fn id(&self, h: HexCoord) -> Option<u32> {
        self.label.get(&h).copied()
    }

    pub fn n_clusters(&self) -> usize {
        self.color_of.len()
    }

    pub fn same_cluster(&self, a: HexCoord, b: HexCoord) -> bool {
        match (self.id(a), self.id(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    /// Member lists indexed by cluster id.
    pub fn members(&self) -> Vec<Vec<HexCoord>> {
        let mut out = vec![Vec::new(); self.color_of.len()];
        for (&h, &id) in &self.label {
            out[id as usize].push(h);
        }
        for m in &mut out {
            m.sort();
        }
        out
    }
}

/// Label maximal connected monochromatic components by union-find.
pub fn label_clusters(c: &Coloring) -> ClusterLabeling {
    label_by(&c.region, |h| c.colors[&h])
}

/// Union-find labeling with an arbitrary color source (used internally to
/// overlay boundary conditions).
pub(crate) fn label_by(region: &[HexCoord], color: impl Fn(HexCoord) -> Color) -> ClusterLabeling {
    let index: HashMap<HexCoord, u32> =
        region.iter().enumerate().map(|(i, &h)| (h, i as u32)).collect();
    let mut parent: Vec<u32> = (0..region.len() as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for (i, &h) in region.iter().enumerate() {
        let ch = color(h);
        for nb in h.neighbors() {
            if let Some(&j) = index.get(&nb) {
                if color(nb) == ch {
                    let (ri, rj) = (find(&mut parent, i as u32), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj) as usize] = ri.min(rj);
                    }
                }
            }
        }
    }
    let mut ids: HashMap<u32, u32> = HashMap::new();
    let mut label = HashMap::with_capacity(region.len());
    let mut color_of = Vec::new();
    for (i, &h) in region.iter().enumerate() {
        let root = find(&mut parent, i as u32);
        let id = *ids.entry(root).or_insert_with(|| {
            color_of.push(color(region[root as usize]));
            (color_of.len() - 1) as u32
        });
        label.insert(h, id);
    }
    ClusterLabeling { label, color_of }
}

/// The cluster-boundary contour ensemble of a colored window: simple,
/// mutually vertex-disjoint directed loops with blue on the right of
/// travel, plus the nesting forest (parent = the tightest enclosing loop).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourSet {
    pub loops: Vec<OrientedLoop>,
    pub nesting: Vec<Option<usize>>,
}

impl ContourSet {
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("contour set serializes")
    }
}

/// Trace all cluster contours of the window. Colors come from `c`; the
/// ring of exterior sites adjacent to the window takes `bc` when given,
/// otherwise its real colors (then contours of clusters touching the ring
/// cannot close inside the known region and are omitted). Every traced
/// loop is the full boundary between one cluster and the single
/// opposite-color cluster that surrounds it.
pub fn trace_contours(
    c: &Coloring,
    window: &DiscreteDomain,
    bc: Option<Color>,
) -> Result<ContourSet> {
    let ring: HashSet<HexCoord> = window.s_boundary.iter().copied().collect();
    let color_at = |h: HexCoord| -> Result<Color> {
        if window.contains_hex(h) {
            c.color(h).ok_or(Error::MissingBoundaryCondition)
        } else if ring.contains(&h) {
            match bc {
                Some(b) => Ok(b),
                None => c.color(h).ok_or(Error::MissingBoundaryCondition),
            }
        } else {
            Err(Error::MissingBoundaryCondition)
        }
    };
    let in_scope = |h: HexCoord| window.contains_hex(h) || ring.contains(&h);

    // all bichromatic edges with both flanks in scope, blue on the right
    let mut tails: HashMap<HexVertex, DirectedEdge> = HashMap::new();
    let mut all: Vec<DirectedEdge> = Vec::new();
    let mut scope: Vec<HexCoord> = window.hexes().to_vec();
    scope.extend(window.s_boundary.iter().copied());
    for &h in &scope {
        let ch = color_at(h)?;
        if ch != Color::Blue {
            continue;
        }
        for nb in h.neighbors() {
            if !in_scope(nb) {
                continue;
            }
            if color_at(nb)? == Color::Yellow {
                // direct the shared edge with blue h on the right
                let e = edge_with_right(h, nb);
                let prev = tails.insert(e.from, e);
                debug_assert!(prev.is_none(), "two interface edges leave one vertex");
                all.push(e);
            }
        }
    }
    all.sort();

    // stitch cycles; chains that leave the known region never close and
    // are dropped
    let mut visited: HashSet<DirectedEdge> = HashSet::new();
    let mut loops: Vec<OrientedLoop> = Vec::new();
    for &start in &all {
        if visited.contains(&start) {
            continue;
        }
        let mut chain = vec![start];
        visited.insert(start);
        let mut closed = false;
        loop {
            let head = chain.last().unwrap().to;
            if head == start.from {
                closed = true;
                break;
            }
            match tails.get(&head) {
                Some(&next) => {
                    if visited.contains(&next) {
                        break; // ran into an earlier discarded chain
                    }
                    visited.insert(next);
                    chain.push(next);
                }
                None => break,
            }
        }
        if closed {
            loops.push(OrientedLoop::from_edges(chain));
        }
    }
    loops.sort_by_key(|l| (l.edges[0].from, l.edges.len()));

    // nesting: the parent of a loop is the outer contour of the cluster
    // surrounding it
    let labeling = label_by(&scope, |h| color_at(h).expect("scope is colored"));
    let mut loop_of_inner: HashMap<u32, usize> = HashMap::new();
    let mut inner_outer: Vec<(u32, u32)> = Vec::new();
    for (i, l) in loops.iter().enumerate() {
        let e = l.edges[0];
        let (yellow_flank, blue_flank) = (e.left_hex(), e.right_hex());
        let (inner, outer) = match l.enclosed_color {
            Color::Yellow => (yellow_flank, blue_flank),
            Color::Blue => (blue_flank, yellow_flank),
        };
        let ii = labeling.id(inner).expect("flank labeled");
        let oi = labeling.id(outer).expect("flank labeled");
        loop_of_inner.insert(ii, i);
        inner_outer.push((ii, oi));
    }
    let nesting = inner_outer
        .iter()
        .map(|&(_, outer)| loop_of_inner.get(&outer).copied())
        .collect();

    Ok(ContourSet { loops, nesting })
}

/// Shared edge of adjacent opposite-colored cells, directed so the first
/// (blue) cell is on the right of travel.
pub(crate) fn edge_with_right(blue: HexCoord, yellow: HexCoord) -> DirectedEdge {
    let ca = blue.corners();
    let cb = yellow.corners();
    let mut shared = [HexVertex { x: 0, y: 0 }; 2];
    let mut n = 0;
    for v in ca {
        if cb.contains(&v) {
            shared[n] = v;
            n += 1;
        }
    }
    debug_assert_eq!(n, 2);
    let e = DirectedEdge::new(shared[0], shared[1]);
    if e.side_of(blue) < 0 {
        e
    } else {
        e.reversed()
    }
}

/// Disjoint-crossing counts of an annulus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmCount {
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
    pub blue_arms: usize,
    pub yellow_arms: usize,
    pub polychromatic: bool,
}

/// Maximum numbers of vertex-disjoint monochromatic crossings of the
/// annulus {r_inner < |z - center| < r_outer} (site centers at mesh δ),
/// one count per color, via unit-capacity max-flow. `polychromatic` flags
/// a six-arm event with both colors present (crossings of different
/// colors are automatically disjoint).
pub fn count_annulus_arms(
    c: &Coloring,
    center: Complex64,
    r_inner: f64,
    r_outer: f64,
    mesh: f64,
) -> ArmCount {
    assert!(r_inner < r_outer, "annulus radii out of order");
    let dist = |h: HexCoord| (h.center(mesh) - center).norm();
    let ann: Vec<HexCoord> = c
        .region
        .iter()
        .copied()
        .filter(|&h| {
            let d = dist(h);
            d > r_inner && d < r_outer
        })
        .collect();
    let in_ann: HashSet<HexCoord> = ann.iter().copied().collect();
    let arms = |color: Color| -> usize {
        let nodes: Vec<HexCoord> =
            ann.iter().copied().filter(|&h| c.color(h) == Some(color)).collect();
        let idx: HashMap<HexCoord, usize> =
            nodes.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let is_source = |h: HexCoord| {
            h.neighbors().iter().any(|&n| !in_ann.contains(&n) && dist(n) <= r_inner)
        };
        let is_sink = |h: HexCoord| h.neighbors().iter().any(|&n| dist(n) >= r_outer);
        max_vertex_disjoint_paths(&nodes, &idx, is_source, is_sink)
    };
    let blue_arms = arms(Color::Blue);
    let yellow_arms = arms(Color::Yellow);
    ArmCount {
        center: [center.re, center.im],
        r_inner,
        r_outer,
        blue_arms,
        yellow_arms,
        polychromatic: blue_arms + yellow_arms >= 6 && blue_arms >= 1 && yellow_arms >= 1,
    }
}

/// Max vertex-disjoint source→sink paths in the adjacency graph of
/// `nodes` (unit node capacities via node splitting, breadth-first
/// augmentation).
fn max_vertex_disjoint_paths(
    nodes: &[HexCoord],
    idx: &HashMap<HexCoord, usize>,
    is_source: impl Fn(HexCoord) -> bool,
    is_sink: impl Fn(HexCoord) -> bool,
) -> usize {
    let n = nodes.len();
    if n == 0 {
        return 0;
    }
    // node ids: in(v) = 2v, out(v) = 2v+1, source = 2n, sink = 2n+1
    let (src, snk) = (2 * n, 2 * n + 1);
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 2];
    let mut cap: HashMap<(usize, usize), i32> = HashMap::new();
    let add = |graph: &mut Vec<Vec<usize>>, cap: &mut HashMap<(usize, usize), i32>, a: usize, b: usize, c: i32| {
        if !graph[a].contains(&b) {
            graph[a].push(b);
            graph[b].push(a);
        }
        *cap.entry((a, b)).or_insert(0) += c;
        cap.entry((b, a)).or_insert(0);
    };
    for (i, &h) in nodes.iter().enumerate() {
        add(&mut graph, &mut cap, 2 * i, 2 * i + 1, 1);
        if is_source(h) {
            add(&mut graph, &mut cap, src, 2 * i, 1);
        }
        if is_sink(h) {
            add(&mut graph, &mut cap, 2 * i + 1, snk, 1);
        }
        for nb in h.neighbors() {
            if let Some(&j) = idx.get(&nb) {
                add(&mut graph, &mut cap, 2 * i + 1, 2 * j, 1);
            }
        }
    }
    let mut flow = 0usize;
    loop {
        // BFS for an augmenting path
        let mut prev: Vec<Option<usize>> = vec![None; 2 * n + 2];
        let mut queue = VecDeque::new();
        queue.push_back(src);
        prev[src] = Some(src);
        while let Some(u) = queue.pop_front() {
            if u == snk {
                break;
            }
            for &v in &graph[u] {
                if prev[v].is_none() && cap.get(&(u, v)).copied().unwrap_or(0) > 0 {
                    prev[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        if prev[snk].is_none() {
            break;
        }
        let mut v = snk;
        while v != src {
            let u = prev[v].unwrap();
            *cap.get_mut(&(u, v)).unwrap() -= 1;
            *cap.get_mut(&(v, u)).unwrap() += 1;
            v = u;
        }
        flow += 1;
    }
    flow
}

/// Outcome of the boundary shielding test at one boundary vertex, for
/// both color assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MushroomFlags {
    /// yellow reach from v shielded by a blue path through v
    pub yellow: bool,
    /// blue reach from v shielded by a yellow path through v
    pub blue: bool,
}

/// Detect, at boundary vertex v, a monochromatic path from v reaching
/// distance ≥ ε inside the domain while the opposite color passes through
/// v connecting boundary contact points at distance within [ε/8, ε/3] of
/// v on both sides along the boundary. Both color assignments are
/// reported. The discrete reading: the two in-domain cells at v must show
/// both colors; "reach" is attained by the cluster of the reaching-color
/// cell, and the shield by the cluster of the other cell touching
/// boundary edges inside the Euclidean annulus window on both sides of v
/// along the boundary cycle.
pub fn detect_mushroom(
    c: &Coloring,
    domain: &DiscreteDomain,
    v: HexVertex,
    eps: f64,
) -> MushroomFlags {
    let none = MushroomFlags { yellow: false, blue: false };
    let iv = match domain.cycle_index(v) {
        Some(i) => i,
        None => return none,
    };
    let in_hexes: Vec<HexCoord> =
        v.hexes().into_iter().filter(|&h| domain.contains_hex(h)).collect();
    if in_hexes.len() != 2 {
        return none;
    }
    let (c0, c1) = match (c.color(in_hexes[0]), c.color(in_hexes[1])) {
        (Some(a), Some(b)) => (a, b),
        _ => return none,
    };
    if c0 == c1 {
        return none;
    }
    let (h_yellow, h_blue) = if c0 == Color::Yellow {
        (in_hexes[0], in_hexes[1])
    } else {
        (in_hexes[1], in_hexes[0])
    };

    let labeling = label_by(domain.hexes(), |h| c.color(h).expect("domain colored"));
    let vp = v.pos(domain.mesh);
    let mesh = domain.mesh;

    let reaches = |h: HexCoord| -> bool {
        let id = labeling.id(h).unwrap();
        // breadth-first over the cluster with early exit at first success
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(h);
        queue.push_back(h);
        while let Some(x) = queue.pop_front() {
            if (x.center(mesh) - vp).norm() >= eps {
                return true;
            }
            for nb in x.neighbors() {
                if labeling.id(nb) == Some(id) && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        false
    };

    // boundary contact scan on each side of v along the cycle
    let shield = |h: HexCoord| -> bool {
        let id = labeling.id(h).unwrap();
        let n = domain.boundary_cycle.len();
        let lo = eps / 8.0;
        let hi = eps / 3.0;
        let max_steps = ((2.0 * hi / mesh).ceil() as usize + 2).min(n / 2);
        let mut side = [false, false];
        for (s, dir) in [(0usize, 1i64), (1usize, -1i64)] {
            for k in 1..=max_steps {
                let j = ((iv as i64 + dir * k as i64).rem_euclid(n as i64)) as usize;
                let e = domain.boundary_cycle[j];
                let mid = (e.from.pos(mesh) + e.to.pos(mesh)) * 0.5;
                let d = (mid - vp).norm();
                if d < lo || d > hi {
                    continue;
                }
                if labeling.id(e.left_hex()) == Some(id) {
                    side[s] = true;
                    break;
                }
            }
        }
        side[0] && side[1]
    };

    MushroomFlags {
        yellow: reaches(h_yellow) && shield(h_blue),
        blue: reaches(h_blue) && shield(h_yellow),
    }
}

/// True when the rectangle [x0,x1] × [y0,y1] carries both a blue and a
/// yellow vertical site-crossing (top cells to bottom cells through cells
/// whose centers lie in the rectangle).
pub fn rsw_bichromatic_vertical(
    c: &Coloring,
    rect: (f64, f64, f64, f64),
    mesh: f64,
) -> bool {
    let (x0, y0, x1, y1) = rect;
    let inside: Vec<HexCoord> = c
        .region
        .iter()
        .copied()
        .filter(|&h| {
            let z = h.center(mesh);
            z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1
        })
        .collect();
    let in_set: HashSet<HexCoord> = inside.iter().copied().collect();
    let crossing = |color: Color| -> bool {
        let mut queue: VecDeque<HexCoord> = VecDeque::new();
        let mut seen: HashSet<HexCoord> = HashSet::new();
        for &h in &inside {
            if c.color(h) == Some(color) && h.center(mesh).im + mesh >= y1 {
                queue.push_back(h);
                seen.insert(h);
            }
        }
        while let Some(h) = queue.pop_front() {
            if h.center(mesh).im - mesh <= y0 {
                return true;
            }
            for nb in h.neighbors() {
                if in_set.contains(&nb) && c.color(nb) == Some(color) && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        false
    };
    crossing(Color::Blue) && crossing(Color::Yellow)
}

const RLE_MAGIC: [u8; 4] = *b"TCLR";

/// Serialize a coloring as run-length-encoded binary: a 16-byte header
/// (magic, mesh as f32, axial bounding box as four i16) followed by
/// (value, count) pairs scanning the bounding box row-major in (r, q).
/// Values: 0 = absent, 1 = blue, 2 = yellow.
pub fn to_rle(c: &Coloring, mesh: f64) -> Result<Vec<u8>> {
    if c.region.is_empty() {
        return Err(Error::EmptySet);
    }
    let qmin = c.region.iter().map(|h| h.q).min().unwrap();
    let qmax = c.region.iter().map(|h| h.q).max().unwrap();
    let rmin = c.region.iter().map(|h| h.r).min().unwrap();
    let rmax = c.region.iter().map(|h| h.r).max().unwrap();
    for v in [qmin, qmax, rmin, rmax] {
        if v < i16::MIN as i32 || v > i16::MAX as i32 {
            return Err(Error::InvalidParameter("bounding box exceeds i16 range".into()));
        }
    }
    let mut out = Vec::new();
    out.extend_from_slice(&RLE_MAGIC);
    out.extend_from_slice(&(mesh as f32).to_le_bytes());
    for v in [qmin, qmax, rmin, rmax] {
        out.extend_from_slice(&(v as i16).to_le_bytes());
    }
    let mut run_val = 255u8;
    let mut run_len = 0u32;
    let flush = |out: &mut Vec<u8>, val: u8, len: u32| {
        if len > 0 {
            out.push(val);
            out.extend_from_slice(&len.to_le_bytes());
        }
    };
    for r in rmin..=rmax {
        for q in qmin..=qmax {
            let val = match c.color(HexCoord::new(q, r)) {
                None => 0u8,
                Some(Color::Blue) => 1,
                Some(Color::Yellow) => 2,
            };
            if val == run_val {
                run_len += 1;
            } else {
                flush(&mut out, run_val, run_len);
                run_val = val;
                run_len = 1;
            }
        }
    }
    flush(&mut out, run_val, run_len);
    Ok(out)
}

/// Decode a run-length-encoded coloring; the mesh it was written at is
/// returned alongside. Decoded colorings carry explicit colors with
/// seed = stream = 0.
pub fn from_rle(bytes: &[u8]) -> Result<(Coloring, f64)> {
    if bytes.len() < 16 || bytes[0..4] != RLE_MAGIC {
        return Err(Error::InvalidParameter("bad header".into()));
    }
    let mesh = f32::from_le_bytes(bytes[4..8].try_into().unwrap()) as f64;
    let mut bb = [0i16; 4];
    for (i, v) in bb.iter_mut().enumerate() {
        *v = i16::from_le_bytes(bytes[8 + 2 * i..10 + 2 * i].try_into().unwrap());
    }
    let (qmin, qmax, rmin, rmax) = (bb[0] as i32, bb[1] as i32, bb[2] as i32, bb[3] as i32);
    let width = (qmax - qmin + 1) as i64;
    let total = width * (rmax - rmin + 1) as i64;
    let mut colors = HashMap::new();
    let mut region = Vec::new();
    let mut pos = 16usize;
    let mut cell = 0i64;
    while pos < bytes.len() {
        if pos + 5 > bytes.len() {
            return Err(Error::InvalidParameter("truncated run".into()));
        }
        let val = bytes[pos];
        let len = u32::from_le_bytes(bytes[pos + 1..pos + 5].try_into().unwrap()) as i64;
        pos += 5;
        for k in 0..len {
            let lin = cell + k;
            if lin >= total {
                return Err(Error::InvalidParameter("runs exceed bounding box".into()));
            }
            let q = qmin + (lin % width) as i32;
            let r = rmin + (lin / width) as i32;
            let h = HexCoord::new(q, r);
            match val {
                0 => {}
                1 => {
                    colors.insert(h, Color::Blue);
                    region.push(h);
                }
                2 => {
                    colors.insert(h, Color::Yellow);
                    region.push(h);
                }
                _ => return Err(Error::InvalidParameter("bad run value".into())),
            }
        }
        cell += len;
    }
    if cell != total {
        return Err(Error::InvalidParameter("runs do not fill bounding box".into()));
    }
    region.sort();
    Ok((Coloring { region, colors, seed: 0, stream: 0 }, mesh))
}
