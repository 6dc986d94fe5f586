//! Triangular-lattice geometry: sites are the hexagonal cells of a scaled
//! honeycomb, with exact integer coordinates for cell centers and cell
//! corners so that adjacency, orientation, and extent comparisons never
//! touch floating point.
//!
//! Embedding: pointy-top hexagons, the cell (q, r) centered at
//! δ·(√3·(q + r/2), 3r/2) with circumradius δ. In integer units of
//! (√3·δ/2, δ/2) the center sits at (2q + r, 3r) and the six corners are
//! offset by (1,1), (0,2), (−1,1), (−1,−1), (0,−2), (1,−1) — corner k at
//! angle 30° + 60°·k counterclockwise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};

use crate::{Error, Result};

/// Axial coordinate of a triangular-lattice site (a hexagonal cell).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexCoord {
    pub q: i32,
    pub r: i32,
}

pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

impl HexCoord {
    pub fn new(q: i32, r: i32) -> Self {
        HexCoord { q, r }
    }

    /// The six adjacent sites, counterclockwise starting due "east".
    pub fn neighbors(self) -> [HexCoord; 6] {
        let mut out = [self; 6];
        for (i, (dq, dr)) in NEIGHBOR_OFFSETS.iter().enumerate() {
            out[i] = HexCoord::new(self.q + dq, self.r + dr);
        }
        out
    }

    /// Center position in integer units of (√3·δ/2, δ/2).
    pub fn ipos(self) -> (i64, i64) {
        (2 * self.q as i64 + self.r as i64, 3 * self.r as i64)
    }

    /// Center position in the plane at mesh δ.
    pub fn center(self, mesh: f64) -> Complex64 {
        let (x, y) = self.ipos();
        Complex64::new(x as f64 * SQRT3 * 0.5 * mesh, y as f64 * 0.5 * mesh)
    }

    /// The six cell corners, counterclockwise, corner k at angle 30°+60°k.
    pub fn corners(self) -> [HexVertex; 6] {
        let (x, y) = self.ipos();
        CORNER_OFFSETS.map(|(dx, dy)| HexVertex {
            x: x + dx,
            y: y + dy,
        })
    }

    /// Site containing the plane point `p` (cells are the Voronoi regions
    /// of their centers, so this is nearest-center rounding).
    pub fn from_point(p: Complex64, mesh: f64) -> HexCoord {
        let fr = p.im / (1.5 * mesh);
        let fq = p.re / (SQRT3 * mesh) - fr / 2.0;
        // cube-coordinate rounding
        let fs = -fq - fr;
        let (mut q, mut r, s) = (fq.round(), fr.round(), fs.round());
        let (dq, dr, ds) = ((q - fq).abs(), (r - fr).abs(), (s - fs).abs());
        if dq > dr && dq > ds {
            q = -r - s;
        } else if dr > ds {
            r = -q - s;
        }
        HexCoord::new(q as i32, r as i32)
    }
}

pub const SQRT3: f64 = 1.7320508075688772;

const CORNER_OFFSETS: [(i64, i64); 6] = [(1, 1), (0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1)];

/// A vertex of the honeycomb, identified by its exact integer position in
/// units of (√3·δ/2, δ/2). Every vertex has exactly three incident cells
/// and three incident edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexVertex {
    pub x: i64,
    pub y: i64,
}

impl HexVertex {
    /// Corner k (0..5) of a given cell.
    pub fn corner_of(c: HexCoord, k: usize) -> HexVertex {
        c.corners()[k]
    }

    /// 0 for "down"-type vertices (y ≡ 1 mod 3), 1 for "up"-type (y ≡ 2 mod 3).
    pub fn kind(self) -> u8 {
        match self.y.rem_euclid(3) {
            1 => 0,
            2 => 1,
            _ => unreachable!("not a honeycomb vertex"),
        }
    }

    /// The canonical (owner, corner) pair with corner in {0, 1}.
    pub fn owner_corner(self) -> (HexCoord, u8) {
        let k = self.kind();
        // kind 0: v = center(q,r) + (1,1); kind 1: v = center(q,r) + (0,2)
        let (cx, cy) = if k == 0 {
            (self.x - 1, self.y - 1)
        } else {
            (self.x, self.y - 2)
        };
        let r = cy / 3;
        let q = (cx - r) / 2;
        (HexCoord::new(q as i32, r as i32), k)
    }

    /// The three cells meeting at this vertex.
    pub fn hexes(self) -> [HexCoord; 3] {
        let (c, k) = self.owner_corner();
        if k == 0 {
            [c, HexCoord::new(c.q + 1, c.r), HexCoord::new(c.q, c.r + 1)]
        } else {
            [
                c,
                HexCoord::new(c.q - 1, c.r + 1),
                HexCoord::new(c.q, c.r + 1),
            ]
        }
    }

    /// The three adjacent vertices (one honeycomb edge away).
    pub fn neighbors(self) -> [HexVertex; 3] {
        let offs: [(i64, i64); 3] = if self.kind() == 0 {
            [(-1, 1), (1, 1), (0, -2)]
        } else {
            [(1, -1), (-1, -1), (0, 2)]
        };
        offs.map(|(dx, dy)| HexVertex {
            x: self.x + dx,
            y: self.y + dy,
        })
    }

    pub fn pos(self, mesh: f64) -> Complex64 {
        Complex64::new(
            self.x as f64 * SQRT3 * 0.5 * mesh,
            self.y as f64 * 0.5 * mesh,
        )
    }

    /// Exact squared distance between vertices in units of (δ/2)²: 3Δx² + Δy².
    pub fn dist2(self, other: HexVertex) -> i64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        3 * dx * dx + dy * dy
    }
}

/// A directed honeycomb edge; reversal is an involution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub from: HexVertex,
    pub to: HexVertex,
}

impl DirectedEdge {
    pub fn new(from: HexVertex, to: HexVertex) -> Self {
        debug_assert_eq!(from.dist2(to), 4, "edge endpoints must be adjacent");
        DirectedEdge { from, to }
    }

    pub fn reversed(self) -> Self {
        DirectedEdge {
            from: self.to,
            to: self.from,
        }
    }

    /// Undirected key: endpoints in sorted order.
    pub fn key(self) -> (HexVertex, HexVertex) {
        if self.from <= self.to {
            (self.from, self.to)
        } else {
            (self.to, self.from)
        }
    }

    /// The two cells flanking this edge.
    pub fn flanks(self) -> [HexCoord; 2] {
        let a = self.from.hexes();
        let b = self.to.hexes();
        let mut out = [HexCoord::new(0, 0); 2];
        let mut n = 0;
        for ha in a {
            if b.contains(&ha) {
                out[n] = ha;
                n += 1;
            }
        }
        debug_assert_eq!(n, 2);
        out
    }

    /// Positive if the cell lies to the left of travel, negative if right.
    pub fn side_of(self, h: HexCoord) -> i64 {
        let (cx, cy) = h.ipos();
        let dx = self.to.x - self.from.x;
        let dy = self.to.y - self.from.y;
        // doubled offset from edge midpoint to cell center; x carries √3
        let ex = 2 * cx - self.from.x - self.to.x;
        let ey = 2 * cy - self.from.y - self.to.y;
        dx * ey - dy * ex
    }

    /// Flanking cell on the left of travel.
    pub fn left_hex(self) -> HexCoord {
        let [a, b] = self.flanks();
        if self.side_of(a) > 0 {
            a
        } else {
            b
        }
    }

    /// Flanking cell on the right of travel.
    pub fn right_hex(self) -> HexCoord {
        let [a, b] = self.flanks();
        if self.side_of(a) < 0 {
            a
        } else {
            b
        }
    }

    /// At the head vertex, the cell incident to `to` that does not flank
    /// this edge (the "opposite" cell a walker at the head decides by).
    pub fn opposite_hex(self) -> HexCoord {
        let fl = self.flanks();
        for h in self.to.hexes() {
            if !fl.contains(&h) {
                return h;
            }
        }
        unreachable!()
    }
}

/// A parametrized closed boundary curve (positively oriented polyline) with
/// optional marked boundary points, used to specify continuum domains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Closed polyline: consecutive vertices joined, last joined to first.
    pub boundary: Vec<[f64; 2]>,
    #[serde(default)]
    pub marked_points: Vec<[f64; 2]>,
}

impl DomainSpec {
    pub fn new(mut boundary: Vec<[f64; 2]>, marked_points: Vec<[f64; 2]>) -> Result<Self> {
        if boundary.len() < 3 {
            return Err(Error::GeometryInvalid(
                "boundary needs at least 3 vertices".into(),
            ));
        }
        if signed_area(&boundary) < 0.0 {
            boundary.reverse();
        }
        Ok(DomainSpec {
            boundary,
            marked_points,
        })
    }

    pub fn disk(center: Complex64, radius: f64, segments: usize) -> Self {
        let boundary = (0..segments)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / segments as f64;
                [center.re + radius * t.cos(), center.im + radius * t.sin()]
            })
            .collect();
        DomainSpec {
            boundary,
            marked_points: vec![],
        }
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        DomainSpec {
            boundary: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            marked_points: vec![],
        }
    }

    /// Upper half-disk {|z| < r, Im z > 0}: the polyline walks the arc
    /// counterclockwise from +r to −r and closes along the diameter.
    pub fn half_disk(radius: f64, segments: usize) -> Self {
        let boundary: Vec<[f64; 2]> = (0..=segments)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / segments as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect();
        DomainSpec {
            boundary,
            marked_points: vec![],
        }
    }

    /// Square rotated 45°, vertices on the axes through (cx, cy).
    pub fn diamond(cx: f64, cy: f64, half: f64) -> Self {
        DomainSpec {
            boundary: vec![
                [cx + half, cy],
                [cx, cy + half],
                [cx - half, cy],
                [cx, cy - half],
            ],
            marked_points: vec![],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DomainSpec = serde_json::from_str(text)?;
        DomainSpec::new(spec.boundary, spec.marked_points)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    /// Strict interior test by winding number; points within `tol` of the
    /// boundary polyline count as outside.
    pub fn contains(&self, p: Complex64, tol: f64) -> bool {
        if self.boundary_distance(p) <= tol {
            return false;
        }
        self.winding(p) != 0
    }

    fn winding(&self, p: Complex64) -> i32 {
        let n = self.boundary.len();
        let mut w = 0;
        for i in 0..n {
            let a = self.boundary[i];
            let b = self.boundary[(i + 1) % n];
            if a[1] <= p.im {
                if b[1] > p.im && cross2(a, b, p) > 0.0 {
                    w += 1;
                }
            } else if b[1] <= p.im && cross2(a, b, p) < 0.0 {
                w -= 1;
            }
        }
        w
    }

    /// Distance from p to the boundary polyline.
    pub fn boundary_distance(&self, p: Complex64) -> f64 {
        let n = self.boundary.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.boundary[i];
            let b = self.boundary[(i + 1) % n];
            best = best.min(seg_dist(a, b, p));
        }
        best
    }

    /// Total boundary polyline length.
    pub fn perimeter(&self) -> f64 {
        let n = self.boundary.len();
        (0..n)
            .map(|i| {
                let a = self.boundary[i];
                let b = self.boundary[(i + 1) % n];
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Arclength coordinate (in [0, perimeter)) of the boundary point
    /// nearest to p — the representation used for prime-end bookkeeping.
    pub fn arclength_of(&self, p: Complex64) -> f64 {
        let n = self.boundary.len();
        let mut best = (f64::INFINITY, 0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.boundary[i];
            let b = self.boundary[(i + 1) % n];
            let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            let (d, t) = seg_proj(a, b, p);
            if d < best.0 {
                best = (d, acc + t * len);
            }
            acc += len;
        }
        best.1
    }

    /// Boundary point at a given arclength coordinate.
    pub fn point_at(&self, s: f64) -> Complex64 {
        let total = self.perimeter();
        let mut s = s.rem_euclid(total);
        let n = self.boundary.len();
        for i in 0..n {
            let a = self.boundary[i];
            let b = self.boundary[(i + 1) % n];
            let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            if s <= len {
                let t = if len > 0.0 { s / len } else { 0.0 };
                return Complex64::new(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]));
            }
            s -= len;
        }
        Complex64::new(self.boundary[0][0], self.boundary[0][1])
    }

    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let mut x0 = f64::INFINITY;
        let mut y0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for p in &self.boundary {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        (x0, y0, x1, y1)
    }
}

fn cross2(a: [f64; 2], b: [f64; 2], p: Complex64) -> f64 {
    (b[0] - a[0]) * (p.im - a[1]) - (b[1] - a[1]) * (p.re - a[0])
}

fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a[0] * b[1] - b[0] * a[1];
    }
    s / 2.0
}

fn seg_proj(a: [f64; 2], b: [f64; 2], p: Complex64) -> (f64, f64) {
    let vx = b[0] - a[0];
    let vy = b[1] - a[1];
    let wx = p.re - a[0];
    let wy = p.im - a[1];
    let len2 = vx * vx + vy * vy;
    let t = if len2 > 0.0 {
        ((wx * vx + wy * vy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = wx - t * vx;
    let dy = wy - t * vy;
    ((dx * dx + dy * dy).sqrt(), t)
}

fn seg_dist(a: [f64; 2], b: [f64; 2], p: Complex64) -> f64 {
    seg_proj(a, b, p).0
}

/// A Jordan set of lattice cells at mesh δ together with its derived
/// boundary data: the honeycomb boundary cycle ∂D (counterclockwise), the
/// external site boundary ΔD ordered as a closed site loop, and the
/// e-vertices (boundary vertices whose off-boundary edge lies in an
/// exterior cell), in cycle order.
#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    pub mesh: f64,
    hexes: Vec<HexCoord>,
    hex_set: HashSet<HexCoord>,
    pub s_boundary: Vec<HexCoord>,
    pub boundary_cycle: Vec<DirectedEdge>,
    boundary_pos: HashMap<HexVertex, u32>,
    pub e_vertices: Vec<HexVertex>,
    e_set: HashSet<HexVertex>,
}

impl DiscreteDomain {
    /// Build and validate a domain from its cell set.
    pub fn from_hexes<I: IntoIterator<Item = HexCoord>>(hexes: I, mesh: f64) -> Result<Self> {
        let hex_set: HashSet<HexCoord> = hexes.into_iter().collect();
        if hex_set.is_empty() {
            return Err(Error::EmptySet);
        }
        if mesh <= 0.0 {
            return Err(Error::InvalidParameter("mesh must be positive".into()));
        }
        if !is_connected(&hex_set) {
            return Err(Error::GeometryInvalid("cell set is not connected".into()));
        }

        // Boundary edges, directed with the interior on the left (ccw).
        let mut out_edges: HashMap<HexVertex, DirectedEdge> = HashMap::new();
        let mut n_edges = 0usize;
        for &h in &hex_set {
            for nb in h.neighbors() {
                if !hex_set.contains(&nb) {
                    let e = shared_edge_ccw(h, nb);
                    n_edges += 1;
                    if out_edges.insert(e.from, e).is_some() {
                        return Err(Error::GeometryInvalid(
                            "boundary is not a single simple cycle".into(),
                        ));
                    }
                }
            }
        }

        // Stitch the cycle starting from the vertex of maximal real part
        // (then maximal imaginary part).
        let start = *out_edges
            .keys()
            .max_by_key(|v| (v.x, v.y))
            .expect("nonempty boundary");
        let mut boundary_cycle = Vec::with_capacity(n_edges);
        let mut v = start;
        loop {
            let e = *out_edges.get(&v).ok_or_else(|| {
                Error::GeometryInvalid("boundary cycle broke during stitching".into())
            })?;
            boundary_cycle.push(e);
            v = e.to;
            if v == start {
                break;
            }
            if boundary_cycle.len() > n_edges {
                return Err(Error::GeometryInvalid("boundary stitching looped".into()));
            }
        }
        if boundary_cycle.len() != n_edges {
            return Err(Error::GeometryInvalid(
                "boundary splits into several cycles (domain or complement not simply connected)"
                    .into(),
            ));
        }

        // External site boundary in cycle order; a site reappearing in two
        // separated runs means ΔD is not a site loop (pinched exterior).
        let mut s_boundary: Vec<HexCoord> = Vec::new();
        for e in &boundary_cycle {
            let out = e.right_hex();
            if s_boundary.last() != Some(&out) {
                s_boundary.push(out);
            }
        }
        if s_boundary.len() > 1 && s_boundary.first() == s_boundary.last() {
            s_boundary.pop();
        }
        {
            let mut seen = HashSet::new();
            for h in &s_boundary {
                if !seen.insert(*h) {
                    return Err(Error::GeometryInvalid(
                        "external site boundary is pinched (not a site loop)".into(),
                    ));
                }
            }
        }

        let boundary_pos: HashMap<HexVertex, u32> = boundary_cycle
            .iter()
            .enumerate()
            .map(|(i, e)| (e.from, i as u32))
            .collect();

        let mut e_vertices = Vec::new();
        for e in &boundary_cycle {
            let v = e.from;
            let inside = v.hexes().iter().filter(|h| hex_set.contains(h)).count();
            if inside == 1 {
                e_vertices.push(v);
            }
        }
        let e_set: HashSet<HexVertex> = e_vertices.iter().copied().collect();

        let mut hexes: Vec<HexCoord> = hex_set.iter().copied().collect();
        hexes.sort();

        Ok(DiscreteDomain {
            mesh,
            hexes,
            hex_set,
            s_boundary,
            boundary_cycle,
            boundary_pos,
            e_vertices,
            e_set,
        })
    }

    pub fn hexes(&self) -> &[HexCoord] {
        &self.hexes
    }

    pub fn len(&self) -> usize {
        self.hexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hexes.is_empty()
    }

    pub fn contains_hex(&self, h: HexCoord) -> bool {
        self.hex_set.contains(&h)
    }

    pub fn hex_set(&self) -> &HashSet<HexCoord> {
        &self.hex_set
    }

    pub fn is_e_vertex(&self, v: HexVertex) -> bool {
        self.e_set.contains(&v)
    }

    pub fn is_boundary_vertex(&self, v: HexVertex) -> bool {
        self.boundary_pos.contains_key(&v)
    }

    /// Index in the ccw boundary cycle of the edge leaving v.
    pub fn cycle_index(&self, v: HexVertex) -> Option<usize> {
        self.boundary_pos.get(&v).map(|&i| i as usize)
    }

    /// Both boundary arcs from x to y: the right arc runs counterclockwise
    /// x→y along the cycle; the left arc also runs x→y but clockwise.
    pub fn boundary_arcs(
        &self,
        x: HexVertex,
        y: HexVertex,
    ) -> Result<(Vec<DirectedEdge>, Vec<DirectedEdge>)> {
        for v in [x, y] {
            if !self.e_set.contains(&v) {
                return Err(Error::NotEVertex(format!("({}, {})", v.x, v.y)));
            }
        }
        if x == y {
            return Err(Error::NotEVertex("endpoints must be distinct".into()));
        }
        let n = self.boundary_cycle.len();
        let ix = self.boundary_pos[&x] as usize;
        let iy = self.boundary_pos[&y] as usize;
        let mut right = Vec::new();
        let mut i = ix;
        while i != iy {
            right.push(self.boundary_cycle[i]);
            i = (i + 1) % n;
        }
        let mut left = Vec::new();
        let mut i = iy;
        while i != ix {
            left.push(self.boundary_cycle[i]);
            i = (i + 1) % n;
        }
        left.reverse();
        let left: Vec<DirectedEdge> = left.into_iter().map(|e| e.reversed()).collect();
        Ok((right, left))
    }

    /// The e-vertex nearest to p; ties resolved by the first hit walking
    /// clockwise from the cycle start (the vertex of maximal real part,
    /// then maximal imaginary part).
    pub fn nearest_e_vertex(&self, p: Complex64) -> HexVertex {
        assert!(!self.e_vertices.is_empty(), "domain has no e-vertices");
        let n = self.boundary_cycle.len();
        let mut best: Option<(f64, usize, HexVertex)> = None;
        for &v in &self.e_vertices {
            let d = (v.pos(self.mesh) - p).norm_sqr();
            let i = self.boundary_pos[&v] as usize;
            let cw_rank = (n - i) % n;
            match best {
                Some((bd, br, _)) if d > bd || (d == bd && cw_rank >= br) => {}
                _ => best = Some((d, cw_rank, v)),
            }
        }
        best.unwrap().2
    }

    /// Exact extents of the boundary-cycle vertices in integer units:
    /// (max Δx, max Δy) with x in units of √3·δ/2 and y in units of δ/2.
    pub fn iextents(&self) -> (i64, i64) {
        let mut x0 = i64::MAX;
        let mut x1 = i64::MIN;
        let mut y0 = i64::MAX;
        let mut y1 = i64::MIN;
        for e in &self.boundary_cycle {
            x0 = x0.min(e.from.x);
            x1 = x1.max(e.from.x);
            y0 = y0.min(e.from.y);
            y1 = y1.max(e.from.y);
        }
        (x1 - x0, y1 - y0)
    }

    /// Exact maximum of 3Δx² + Δy² over boundary-vertex pairs — the squared
    /// Euclidean diameter of the closed domain in units of (δ/2)².
    pub fn idiameter2(&self) -> i64 {
        let pts: Vec<(i64, i64)> = self
            .boundary_cycle
            .iter()
            .map(|e| (e.from.x, e.from.y))
            .collect();
        points_idiameter2(&pts)
    }

    /// Euclidean diameter of the closed domain.
    pub fn diameter(&self) -> f64 {
        (self.idiameter2() as f64).sqrt() * self.mesh * 0.5
    }

    /// Documented JSON layout: mesh, cell list, vertex table, and the
    /// boundary cycle as indices into the vertex table.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Layout<'a> {
            mesh: f64,
            hexes: &'a [HexCoord],
            vertices: Vec<(i64, i64)>,
            boundary_cycle: Vec<u32>,
        }
        let mut vertices = Vec::new();
        let mut index: HashMap<HexVertex, u32> = HashMap::new();
        let mut cycle = Vec::new();
        for e in &self.boundary_cycle {
            let id = *index.entry(e.from).or_insert_with(|| {
                vertices.push((e.from.x, e.from.y));
                (vertices.len() - 1) as u32
            });
            cycle.push(id);
        }
        serde_json::to_string(&Layout {
            mesh: self.mesh,
            hexes: &self.hexes,
            vertices,
            boundary_cycle: cycle,
        })
        .expect("domain serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Layout {
            mesh: f64,
            hexes: Vec<HexCoord>,
        }
        let layout: Layout = serde_json::from_str(text)?;
        DiscreteDomain::from_hexes(layout.hexes, layout.mesh)
    }
}

fn metric2(a: (i64, i64), b: (i64, i64)) -> i64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    3 * dx * dx + dy * dy
}

/// Exact maximum of 3Δx² + Δy² over pairs from a point set, via rotating
/// calipers on the convex hull (with a guard sweep, since the form is
/// anisotropic and hulls here are small).
pub(crate) fn points_idiameter2(pts: &[(i64, i64)]) -> i64 {
    let hull = convex_hull(pts);
    let m = hull.len();
    if m <= 1 {
        return 0;
    }
    if m == 2 {
        return metric2(hull[0], hull[1]);
    }
    let mut best = 0;
    let mut j = 1;
    for i in 0..m {
        let ni = (i + 1) % m;
        loop {
            let nj = (j + 1) % m;
            let cur = area2(hull[i], hull[ni], hull[j]);
            let nxt = area2(hull[i], hull[ni], hull[nj]);
            if nxt.abs() > cur.abs() {
                j = nj;
            } else {
                break;
            }
        }
        best = best.max(metric2(hull[i], hull[j]));
        best = best.max(metric2(hull[ni], hull[j]));
    }
    for a in 0..m {
        for b in (a + 1)..m {
            best = best.max(metric2(hull[a], hull[b]));
        }
    }
    best
}

fn area2(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn convex_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut p: Vec<(i64, i64)> = pts.to_vec();
    p.sort();
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &pt in &p {
        while lower.len() >= 2 && area2(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 0 {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &pt in p.iter().rev() {
        while upper.len() >= 2 && area2(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= 0 {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// The shared edge of adjacent cells, directed so the first cell lies on
/// the left (counterclockwise traversal when `inside` is the interior).
fn shared_edge_ccw(inside: HexCoord, outside: HexCoord) -> DirectedEdge {
    let ca = inside.corners();
    let cb = outside.corners();
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
    if e.side_of(inside) > 0 {
        e
    } else {
        e.reversed()
    }
}

fn is_connected(set: &HashSet<HexCoord>) -> bool {
    let start = match set.iter().next() {
        Some(&h) => h,
        None => return true,
    };
    let mut seen = HashSet::with_capacity(set.len());
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(h) = queue.pop_front() {
        for nb in h.neighbors() {
            if set.contains(&nb) && seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    seen.len() == set.len()
}

/// Largest connected component of a cell set.
fn largest_component(set: &HashSet<HexCoord>) -> HashSet<HexCoord> {
    let mut remaining: HashSet<HexCoord> = set.clone();
    let mut best: HashSet<HexCoord> = HashSet::new();
    while let Some(&start) = remaining.iter().next() {
        let mut comp = HashSet::new();
        let mut queue = VecDeque::new();
        comp.insert(start);
        remaining.remove(&start);
        queue.push_back(start);
        while let Some(h) = queue.pop_front() {
            for nb in h.neighbors() {
                if remaining.contains(&nb) {
                    remaining.remove(&nb);
                    comp.insert(nb);
                    queue.push_back(nb);
                }
            }
        }
        if comp.len() > best.len()
            || (comp.len() == best.len() && comp.iter().min() < best.iter().min())
        {
            best = comp;
        }
    }
    best
}

/// Bounded complement components ("holes") of a cell set, searched inside
/// its axial bounding box plus a margin.
fn holes(set: &HashSet<HexCoord>) -> Vec<HashSet<HexCoord>> {
    if set.is_empty() {
        return vec![];
    }
    let qmin = set.iter().map(|h| h.q).min().unwrap() - 2;
    let qmax = set.iter().map(|h| h.q).max().unwrap() + 2;
    let rmin = set.iter().map(|h| h.r).min().unwrap() - 2;
    let rmax = set.iter().map(|h| h.r).max().unwrap() + 2;
    let inside_box = |h: HexCoord| h.q >= qmin && h.q <= qmax && h.r >= rmin && h.r <= rmax;

    let mut outer: HashSet<HexCoord> = HashSet::new();
    let start = HexCoord::new(qmin, rmin);
    let mut queue = VecDeque::new();
    outer.insert(start);
    queue.push_back(start);
    while let Some(h) = queue.pop_front() {
        for nb in h.neighbors() {
            if inside_box(nb) && !set.contains(&nb) && outer.insert(nb) {
                queue.push_back(nb);
            }
        }
    }

    let mut seen: HashSet<HexCoord> = HashSet::new();
    let mut out = Vec::new();
    for q in qmin..=qmax {
        for r in rmin..=rmax {
            let h = HexCoord::new(q, r);
            if set.contains(&h) || outer.contains(&h) || seen.contains(&h) {
                continue;
            }
            let mut comp = HashSet::new();
            let mut queue = VecDeque::new();
            comp.insert(h);
            seen.insert(h);
            queue.push_back(h);
            while let Some(c) = queue.pop_front() {
                for nb in c.neighbors() {
                    if inside_box(nb)
                        && !set.contains(&nb)
                        && !outer.contains(&nb)
                        && seen.insert(nb)
                    {
                        comp.insert(nb);
                        queue.push_back(nb);
                    }
                }
            }
            out.push(comp);
        }
    }
    out
}

/// First exterior site that appears in two separated runs along the
/// boundary walk (a pinch preventing ΔD from being a site loop), if any.
fn find_pinch(set: &HashSet<HexCoord>) -> Option<HexCoord> {
    // walk all boundary edges grouped by cycles; a pinched site flanks
    // boundary edges in more than one maximal run
    let mut out_edges: HashMap<HexVertex, Vec<DirectedEdge>> = HashMap::new();
    for &h in set {
        for nb in h.neighbors() {
            if !set.contains(&nb) {
                let e = shared_edge_ccw(h, nb);
                out_edges.entry(e.from).or_default().push(e);
            }
        }
    }
    for v in out_edges.values() {
        if v.len() > 1 {
            // two outgoing boundary edges at one vertex: the exterior site
            // between them touches the set twice
            let h0 = v[0].right_hex();
            return Some(h0);
        }
    }
    let mut runs: HashMap<HexCoord, u32> = HashMap::new();
    let mut visited: HashSet<HexVertex> = HashSet::new();
    let firsts: Vec<HexVertex> = out_edges.keys().copied().collect();
    for start in firsts {
        if visited.contains(&start) {
            continue;
        }
        let mut v = start;
        let mut prev: Option<HexCoord> = None;
        let mut first_of_cycle: Option<HexCoord> = None;
        loop {
            let e = out_edges[&v][0];
            visited.insert(v);
            let out = e.right_hex();
            if prev != Some(out) {
                *runs.entry(out).or_insert(0) += 1;
                if first_of_cycle.is_none() {
                    first_of_cycle = Some(out);
                }
            }
            prev = Some(out);
            v = e.to;
            if v == start {
                // merge wraparound run
                if prev == first_of_cycle && runs.get(&prev.unwrap()).copied().unwrap_or(0) > 1 {
                    *runs.get_mut(&prev.unwrap()).unwrap() -= 1;
                }
                break;
            }
        }
    }
    runs.into_iter().find(|&(_, n)| n > 1).map(|(h, _)| h)
}

/// The largest Jordan set of cells whose closed cells lie inside the spec:
/// scan cells with all six corners strictly inside, take the largest
/// connected component, then peel cells (deterministically) until the
/// complement is connected and the exterior site boundary is a site loop.
pub fn delta_approximation(spec: &DomainSpec, mesh: f64) -> Result<DiscreteDomain> {
    let tol = 1e-12 * mesh;
    let mut set: HashSet<HexCoord> = HashSet::new();
    for h in candidate_cells(spec, mesh) {
        if h.corners().iter().all(|v| spec.contains(v.pos(mesh), tol)) {
            set.insert(h);
        }
    }
    loop {
        if set.is_empty() {
            return Err(Error::EmptyApproximation);
        }
        set = largest_component(&set);
        let hs = holes(&set);
        if !hs.is_empty() {
            // open each hole to the exterior by discarding one adjacent cell
            let mut victims: Vec<HexCoord> = Vec::new();
            for hole in &hs {
                let mut adj: Vec<HexCoord> = hole
                    .iter()
                    .flat_map(|h| h.neighbors())
                    .filter(|n| set.contains(n))
                    .collect();
                adj.sort();
                if let Some(&v) = adj.first() {
                    victims.push(v);
                }
            }
            for v in victims {
                set.remove(&v);
            }
            continue;
        }
        if let Some(pinch) = find_pinch(&set) {
            // discard the smallest in-set neighbor of the pinching site
            let mut adj: Vec<HexCoord> = pinch
                .neighbors()
                .into_iter()
                .filter(|n| set.contains(n))
                .collect();
            adj.sort();
            if let Some(&v) = adj.first() {
                set.remove(&v);
            } else {
                return Err(Error::EmptyApproximation);
            }
            continue;
        }
        break;
    }
    DiscreteDomain::from_hexes(set, mesh)
}

/// The smallest covering Jordan set: cells whose closed cell meets the
/// closed spec, with holes filled and pinches repaired by adding cells.
pub fn delta_cover(spec: &DomainSpec, mesh: f64) -> Result<DiscreteDomain> {
    let mut set: HashSet<HexCoord> = HashSet::new();
    for h in candidate_cells(spec, mesh) {
        if cell_meets_spec(spec, h, mesh) {
            set.insert(h);
        }
    }
    if set.is_empty() {
        return Err(Error::EmptyApproximation);
    }
    loop {
        set = largest_component(&set);
        let hs = holes(&set);
        if !hs.is_empty() {
            for hole in hs {
                set.extend(hole);
            }
            continue;
        }
        if let Some(pinch) = find_pinch(&set) {
            set.insert(pinch);
            continue;
        }
        break;
    }
    DiscreteDomain::from_hexes(set, mesh)
}

fn candidate_cells(spec: &DomainSpec, mesh: f64) -> Vec<HexCoord> {
    let (x0, y0, x1, y1) = spec.bbox();
    let rmin = ((y0 / (1.5 * mesh)).floor() as i32) - 2;
    let rmax = ((y1 / (1.5 * mesh)).ceil() as i32) + 2;
    let mut out = Vec::new();
    for r in rmin..=rmax {
        let qmin = (((x0 / (SQRT3 * mesh)) - r as f64 / 2.0).floor() as i32) - 2;
        let qmax = (((x1 / (SQRT3 * mesh)) - r as f64 / 2.0).ceil() as i32) + 2;
        for q in qmin..=qmax {
            out.push(HexCoord::new(q, r));
        }
    }
    out
}

fn cell_meets_spec(spec: &DomainSpec, h: HexCoord, mesh: f64) -> bool {
    let corners = h.corners();
    // any cell corner or the center inside the spec
    if spec.contains(h.center(mesh), 0.0) {
        return true;
    }
    if corners
        .iter()
        .any(|v| spec.contains(v.pos(mesh), 0.0) || spec.boundary_distance(v.pos(mesh)) == 0.0)
    {
        return true;
    }
    // any spec vertex inside the (convex) cell
    let cpts: Vec<Complex64> = corners.iter().map(|v| v.pos(mesh)).collect();
    for p in &spec.boundary {
        if point_in_convex(&cpts, Complex64::new(p[0], p[1])) {
            return true;
        }
    }
    // any boundary segment crossing any cell edge
    let n = spec.boundary.len();
    for i in 0..n {
        let a = spec.boundary[i];
        let b = spec.boundary[(i + 1) % n];
        for k in 0..6 {
            let u = cpts[k];
            let v = cpts[(k + 1) % 6];
            if segments_intersect(Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1]), u, v) {
                return true;
            }
        }
    }
    false
}

fn point_in_convex(poly: &[Complex64], p: Complex64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let cr = (b.re - a.re) * (p.im - a.im) - (b.im - a.im) * (p.re - a.re);
        if cr < 0.0 {
            return false;
        }
    }
    true
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let orient = |p: Complex64, q: Complex64, r: Complex64| -> f64 {
        (q.re - p.re) * (r.im - p.im) - (q.im - p.im) * (r.re - p.re)
    };
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    let on = |p: Complex64, q: Complex64, r: Complex64, o: f64| -> bool {
        o == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// e-vertices in boundary-cycle order (exposed as a standalone operation;
/// domains also carry the list precomputed).
pub fn classify_e_vertices(d: &DiscreteDomain) -> Vec<HexVertex> {
    d.e_vertices.clone()
}
