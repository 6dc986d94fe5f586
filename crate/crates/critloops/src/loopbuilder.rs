//! Incremental construction of the full cluster-boundary loop ensemble by
//! running chordal exploration processes in a priority queue of domain
//! pieces, with reconstruction of individual interfaces from the loops.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::exploration::{
    decompose_excursions, explore, split_domains, static_path, ColorSource, DomainPiece,
    ExplorationPath, PieceBc, Side,
};
use crate::hexlattice::{points_idiameter2, DirectedEdge, DiscreteDomain, HexCoord, HexVertex};
use crate::percolation::{trace_contours, Color, Coloring, ContourSet};
use crate::{Error, Result};

/// Winding sense of a closed loop in the plane (y axis pointing up).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopOrientation {
    Counterclockwise,
    Clockwise,
}

/// A simple closed directed cycle of lattice edges separating a cluster
/// from its surroundings. With the blue-on-the-right edge convention,
/// counterclockwise loops enclose yellow clusters and clockwise loops
/// enclose blue ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedLoop {
    pub edges: Vec<DirectedEdge>,
    pub orientation: LoopOrientation,
    pub enclosed_color: Color,
}

impl OrientedLoop {
    /// Build from a directed edge cycle, rotating to the canonical start
    /// (lexicographically smallest tail vertex) and deriving orientation
    /// and enclosed color from the winding sign.
    pub fn from_edges(mut edges: Vec<DirectedEdge>) -> Self {
        assert!(edges.len() >= 3, "a loop needs at least 3 edges");
        debug_assert_eq!(edges.first().unwrap().from, edges.last().unwrap().to);
        let start = edges
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| (e.from.x, e.from.y))
            .map(|(i, _)| i)
            .unwrap();
        edges.rotate_left(start);
        let area2: i64 = edges.iter().map(|e| e.from.x * e.to.y - e.to.x * e.from.y).sum();
        let orientation = if area2 > 0 {
            LoopOrientation::Counterclockwise
        } else {
            LoopOrientation::Clockwise
        };
        let enclosed_color = match orientation {
            LoopOrientation::Counterclockwise => Color::Yellow,
            LoopOrientation::Clockwise => Color::Blue,
        };
        OrientedLoop { edges, orientation, enclosed_color }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Tail vertices in cycle order.
    pub fn vertices(&self) -> impl Iterator<Item = HexVertex> + '_ {
        self.edges.iter().map(|e| e.from)
    }

    /// True when consecutive edges chain, the cycle closes, and no vertex
    /// repeats.
    pub fn is_simple(&self) -> bool {
        let n = self.edges.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            if self.edges[i].to != self.edges[(i + 1) % n].from {
                return false;
            }
        }
        let mut seen = std::collections::HashSet::new();
        self.vertices().all(|v| seen.insert(v))
    }

    /// Twice the signed area in integer units (positive = counterclockwise).
    pub fn signed_area2(&self) -> i64 {
        self.edges.iter().map(|e| e.from.x * e.to.y - e.to.x * e.from.y).sum()
    }

    /// Exact point-in-loop test for a lattice vertex not on the loop,
    /// by counting crossings of a horizontal ray at half-integer height.
    pub fn contains_vertex(&self, p: HexVertex) -> bool {
        // ray y = p.y + 1/2 rightward; doubled coordinates keep it integer
        let py2 = 2 * p.y + 1;
        let mut crossings = 0u32;
        for e in &self.edges {
            let y1 = 2 * e.from.y;
            let y2 = 2 * e.to.y;
            if (y1 < py2) == (y2 < py2) {
                continue;
            }
            // x at the crossing: x1 + (x2-x1)*(py2-y1)/(y2-y1) > p.x
            let dx = e.to.x - e.from.x;
            let dy = y2 - y1;
            let lhs = (e.from.x * dy + dx * (py2 - y1) - p.x * dy) * dy.signum();
            if lhs > 0 {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }

    /// Exact containment of a whole loop (loops here never share vertices).
    pub fn contains_loop(&self, other: &OrientedLoop) -> bool {
        self.contains_vertex(other.edges[0].from)
    }

    /// Square of the Euclidean diameter of the vertex set, in units of
    /// (δ/2)² where δ is the mesh.
    pub fn idiameter2(&self) -> i64 {
        let pts: Vec<(i64, i64)> = self.edges.iter().map(|e| (e.from.x, e.from.y)).collect();
        points_idiameter2(&pts)
    }
}

/// Square of the larger of the two axis extents of a domain's boundary,
/// in units of (δ/2)²: max(3·Δx², Δy²) over the integer vertex
/// coordinates. The extent measure below is δ/2 times its square root.
pub fn extent_key(d: &DiscreteDomain) -> i64 {
    let (dx, dy) = d.iextents();
    (3 * dx * dx).max(dy * dy)
}

/// The extent measure of a domain piece: the larger of its horizontal and
/// vertical extents, in plane units. Pieces are prioritized by this value.
pub fn dm(d: &DiscreteDomain) -> f64 {
    (extent_key(d) as f64).sqrt() * d.mesh * 0.5
}

/// Rank of the earliest point of the dyadic enumeration whose owning cell
/// belongs to the domain: points (j/2ⁿ, k/2ⁿ) ordered by level n, then by
/// (j, k). Distinct disjoint pieces get distinct ranks, so the rank breaks
/// priority ties deterministically.
fn dyadic_rank(d: &DiscreteDomain) -> (u32, i64, i64) {
    let mut x0 = f64::MAX;
    let mut y0 = f64::MAX;
    let mut x1 = f64::MIN;
    let mut y1 = f64::MIN;
    for &h in d.hexes() {
        let c = h.center(d.mesh);
        x0 = x0.min(c.re);
        x1 = x1.max(c.re);
        y0 = y0.min(c.im);
        y1 = y1.max(c.im);
    }
    let pad = d.mesh;
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
    for n in 0..48u32 {
        let scale = (1u64 << n) as f64;
        let j0 = (x0 * scale).ceil() as i64;
        let j1 = (x1 * scale).floor() as i64;
        let k0 = (y0 * scale).ceil() as i64;
        let k1 = (y1 * scale).floor() as i64;
        for j in j0..=j1 {
            for k in k0..=k1 {
                let p = Complex64::new(j as f64 / scale, k as f64 / scale);
                if d.contains_hex(HexCoord::from_point(p, d.mesh)) {
                    return (n, j, k);
                }
            }
        }
    }
    unreachable!("a nonempty cell set owns a dyadic point of bounded level");
}

/// Queue priority for unexplored pieces: larger extent first; exact ties
/// go to the piece containing the earlier point of the dyadic enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PriorityOrder {
    pub extent_key: i64,
    pub dyadic: (u32, i64, i64),
}

impl PriorityOrder {
    pub fn of(d: &DiscreteDomain) -> PriorityOrder {
        PriorityOrder { extent_key: extent_key(d), dyadic: dyadic_rank(d) }
    }
}

impl Ord for PriorityOrder {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.extent_key
            .cmp(&other.extent_key)
            .then_with(|| other.dyadic.cmp(&self.dyadic))
    }
}

impl PartialOrd for PriorityOrder {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

type CoordFn = fn(HexVertex) -> i64;

/// Which coordinate drives the choice of exploration endpoints on a
/// monochromatic piece. The loop ensemble produced is the same for every
/// rule; only the order of discovery changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum EndpointRule {
    /// Maximize the horizontal separation first, then the vertical.
    Standard,
    /// Maximize the vertical separation first, then the horizontal.
    ImFirst,
}

/// Choose exploration endpoints for a piece: a two-color piece uses the
/// vertices recorded where its boundary changes color; a monochromatic
/// piece takes a diameter-realizing pair of e-vertices — maximal
/// horizontal separation, then maximal vertical separation, ties broken
/// lexicographically — ordered bottom endpoint first.
pub fn select_endpoints(piece: &DomainPiece) -> Result<(HexVertex, HexVertex)> {
    select_endpoints_by(piece, EndpointRule::Standard)
}

pub(crate) fn select_endpoints_by(
    piece: &DomainPiece,
    rule: EndpointRule,
) -> Result<(HexVertex, HexVertex)> {
    if let PieceBc::PlusMinus = piece.bc {
        return piece.natural_endpoints.ok_or_else(|| {
            Error::DegeneratePiece("two-color piece without recorded color-change vertices".into())
        });
    }
    let (u, v) = extreme_pair(&piece.domain.e_vertices, rule).ok_or_else(|| {
        Error::DegeneratePiece("fewer than two e-vertices for endpoint selection".into())
    })?;
    // exploration starts at the bottom endpoint
    if (u.y, u.x) <= (v.y, v.x) {
        Ok((u, v))
    } else {
        Ok((v, u))
    }
}

/// The endpoint pair rule over an explicit candidate set: maximize the
/// primary coordinate separation, then the secondary separation among the
/// maximizers, then take the lexicographically smallest pair. Returns the
/// pair sorted by (x, y); None when fewer than two candidates exist.
fn extreme_pair(cands: &[HexVertex], rule: EndpointRule) -> Option<(HexVertex, HexVertex)> {
    if cands.len() < 2 {
        return None;
    }
    let (pc, sc): (CoordFn, CoordFn) = match rule {
        EndpointRule::Standard => (|v| v.x, |v| v.y),
        EndpointRule::ImFirst => (|v| v.y, |v| v.x),
    };
    let pmin = cands.iter().map(|&v| pc(v)).min().unwrap();
    let pmax = cands.iter().map(|&v| pc(v)).max().unwrap();
    // the primary separation is maximized exactly by pairs joining the two
    // extreme primary-coordinate classes; within each class the secondary
    // coordinate is injective, so only its extremes can achieve the
    // maximal secondary separation
    let class_extremes = |p: i64| -> Vec<HexVertex> {
        let members = cands.iter().copied().filter(|&v| pc(v) == p);
        let lo = members.clone().min_by_key(|&v| sc(v)).unwrap();
        let hi = members.max_by_key(|&v| sc(v)).unwrap();
        if lo == hi {
            vec![lo]
        } else {
            vec![lo, hi]
        }
    };
    let mut best: Option<(i64, (HexVertex, HexVertex))> = None;
    for &u in &class_extremes(pmin) {
        for &v in &class_extremes(pmax) {
            if u == v {
                continue;
            }
            let sep = (sc(u) - sc(v)).abs();
            let pair = if (u.x, u.y) <= (v.x, v.y) { (u, v) } else { (v, u) };
            let better = match &best {
                None => true,
                Some((s, p)) => sep > *s || (sep == *s && pair < *p),
            };
            if better {
                best = Some((sep, pair));
            }
        }
    }
    best.map(|(_, pair)| pair)
}

/// The loop ensemble produced by a construction run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopSet {
    pub mesh: f64,
    pub loops: Vec<OrientedLoop>,
    /// For each loop, the index of the innermost loop enclosing it, when
    /// one has been found.
    pub nesting: Vec<Option<usize>>,
}

impl LoopSet {
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn from_contours(cs: &ContourSet, mesh: f64) -> LoopSet {
        LoopSet { mesh, loops: cs.loops.clone(), nesting: cs.nesting.clone() }
    }

    /// JSON layout: a shared vertex table in integer lattice coordinates
    /// (x in units of √3δ/2, y in units of δ/2), then one record per loop
    /// with its vertex-index cycle, winding sense, enclosed color, and the
    /// index of its enclosing loop.
    pub fn to_json(&self) -> String {
        let mut verts: Vec<(i64, i64)> = Vec::new();
        let mut index: HashMap<HexVertex, usize> = HashMap::new();
        let mut loops = Vec::new();
        for (i, l) in self.loops.iter().enumerate() {
            let cycle: Vec<usize> = l
                .vertices()
                .map(|v| {
                    *index.entry(v).or_insert_with(|| {
                        verts.push((v.x, v.y));
                        verts.len() - 1
                    })
                })
                .collect();
            loops.push(json!({
                "cycle": cycle,
                "orientation": match l.orientation {
                    LoopOrientation::Counterclockwise => "counterclockwise",
                    LoopOrientation::Clockwise => "clockwise",
                },
                "enclosed_color": match l.enclosed_color {
                    Color::Yellow => "yellow",
                    Color::Blue => "blue",
                },
                "parent": self.nesting[i],
            }));
        }
        serde_json::to_string_pretty(&json!({
            "mesh": self.mesh,
            "vertices": verts,
            "loops": loops,
        }))
        .expect("loop set serializes")
    }

    /// Standalone SVG drawing of the ensemble: counterclockwise loops in
    /// gold, clockwise loops in blue, on a white background with the y
    /// axis pointing up.
    pub fn to_svg(&self) -> String {
        let mut x0 = f64::MAX;
        let mut y0 = f64::MAX;
        let mut x1 = f64::MIN;
        let mut y1 = f64::MIN;
        for l in &self.loops {
            for v in l.vertices() {
                let p = v.pos(self.mesh);
                x0 = x0.min(p.re);
                x1 = x1.max(p.re);
                y0 = y0.min(p.im);
                y1 = y1.max(p.im);
            }
        }
        if self.loops.is_empty() {
            x0 = 0.0;
            y0 = 0.0;
            x1 = 1.0;
            y1 = 1.0;
        }
        let m = 2.0 * self.mesh.max(1e-6);
        x0 -= m;
        y0 -= m;
        x1 += m;
        y1 += m;
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.4} {:.4} {:.4} {:.4}\" \
             width=\"800\" height=\"{:.0}\">\n<rect x=\"{:.4}\" y=\"{:.4}\" width=\"{:.4}\" \
             height=\"{:.4}\" fill=\"white\"/>\n",
            x0,
            -y1,
            x1 - x0,
            y1 - y0,
            800.0 * (y1 - y0) / (x1 - x0),
            x0,
            -y1,
            x1 - x0,
            y1 - y0,
        );
        for l in &self.loops {
            let mut d = String::new();
            for (i, v) in l.vertices().enumerate() {
                let p = v.pos(self.mesh);
                let cmd = if i == 0 { 'M' } else { 'L' };
                d.push_str(&format!("{}{:.4} {:.4}", cmd, p.re, -p.im));
            }
            d.push('Z');
            let color = match l.orientation {
                LoopOrientation::Counterclockwise => "#c9a227",
                LoopOrientation::Clockwise => "#2a6fbf",
            };
            svg.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.5}\" \
                 stroke-linejoin=\"round\"/>\n",
                d,
                color,
                0.35 * self.mesh,
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Where an emitted loop's enclosing loop will come from: either another
/// emitted loop directly, or the loop that a pending slot will produce.
#[derive(Debug, Clone, Copy)]
enum ParentRef {
    Loop(usize),
    Slot(usize),
}

/// A loop under construction: the excursion stretch already walked, the
/// boundary runs between consecutive gaps, and the gap interfaces filled
/// in as the corresponding two-color pieces are explored.
#[derive(Debug)]
struct Pending {
    prefix: Vec<DirectedEdge>,
    runs: Vec<Vec<DirectedEdge>>,
    filled: Vec<Option<Vec<DirectedEdge>>>,
    remaining: usize,
    outer_slot: Option<usize>,
    inner_color: Color,
    /// Upper bound for the finished loop's squared diameter: the hull of
    /// the known skeleton together with the gap pieces' boundaries.
    upper_diam2: i64,
    /// True when the loop may end up wider than the stopping threshold,
    /// so its gap pieces must be explored regardless of their own size.
    forced: bool,
}

/// An unexplored piece in the queue, with cached priority and the
/// bookkeeping linking it to the loops it participates in.
#[derive(Debug)]
pub struct QueuedPiece {
    pub piece: DomainPiece,
    pub priority: PriorityOrder,
    /// Squared diameter of the piece in units of (δ/2)².
    pub diam2: i64,
    outer_slot: Option<usize>,
    pending_ref: Option<(usize, usize)>,
    label: Option<u32>,
}

/// Incremental state of the loop construction: a priority queue of
/// unexplored monochromatic and two-color pieces, the loops already
/// emitted, and the pending loops awaiting their gap interfaces.
#[derive(Debug)]
pub struct ConstructionState {
    mesh: f64,
    endpoint_rule: EndpointRule,
    pub queue: Vec<QueuedPiece>,
    loops: Vec<OrientedLoop>,
    loop_parent: Vec<Option<ParentRef>>,
    pendings: Vec<Pending>,
    slot_loop: Vec<Option<usize>>,
    pub step_count: usize,
    /// Squared-diameter gate in units of (δ/2)²; pieces at or above it are
    /// explored. Zero until armed, which means everything is explored.
    gate_diam2: f64,
    label_key_thresh: Option<f64>,
    next_label: u32,
    /// For each label, the number of steps during which some queued piece
    /// still carried it.
    pub label_census: HashMap<u32, u32>,
    /// Number of explorations that produced at least one daughter piece.
    pub split_events: usize,
    /// Among those, how many saw every daughter's extent measure drop to
    /// at most two thirds of the parent's.
    pub shrink_events: usize,
}

impl ConstructionState {
    /// Start a construction on a whole domain with a monochromatic
    /// boundary condition.
    pub fn new(domain: DiscreteDomain, bc: Color) -> ConstructionState {
        let mesh = domain.mesh;
        let priority = PriorityOrder::of(&domain);
        let diam2 = domain.idiameter2();
        let piece = DomainPiece {
            domain,
            type_tag: 0,
            creating_excursion: None,
            bc: PieceBc::Mono(bc),
            natural_endpoints: None,
        };
        ConstructionState {
            mesh,
            endpoint_rule: EndpointRule::Standard,
            queue: vec![QueuedPiece {
                piece,
                priority,
                diam2,
                outer_slot: None,
                pending_ref: None,
                label: None,
            }],
            loops: Vec::new(),
            loop_parent: Vec::new(),
            pendings: Vec::new(),
            slot_loop: Vec::new(),
            step_count: 0,
            gate_diam2: 0.0,
            label_key_thresh: None,
            next_label: 1,
            label_census: HashMap::new(),
            split_events: 0,
            shrink_events: 0,
        }
    }

    #[cfg(test)]
    pub(crate) fn with_rule(mut self, rule: EndpointRule) -> ConstructionState {
        self.endpoint_rule = rule;
        self
    }

    /// Number of loops emitted so far.
    pub fn loops_found(&self) -> usize {
        self.loops.len()
    }

    /// Explore the highest-priority queued piece; false when the queue is
    /// empty. A monochromatic piece runs an exploration between its
    /// selected endpoints, splits into daughters, and opens one pending
    /// loop per excursion of the path away from the arc carrying the
    /// opposite fictitious color (emitted at once when it has no gaps). A
    /// two-color piece runs between its color-change vertices and fills
    /// one gap of its pending loop, which is emitted when the last gap
    /// closes. The coloring must cover the construction's root domain.
    pub fn step(&mut self, coloring: &Coloring) -> Result<bool> {
        match self.best(|_| true) {
            None => Ok(false),
            Some(i) => {
                self.process(i, coloring)?;
                Ok(true)
            }
        }
    }

    /// Run until every queued piece has diameter below `eps` (gap pieces
    /// of a pending loop whose eventual extent might reach `eps` are
    /// explored regardless of their own size, so every loop wider than
    /// `eps` is completed). Returns the ensemble found and the total
    /// number of exploration steps taken so far. With `eps = 0` the
    /// construction runs to exhaustion.
    pub fn run_until(&mut self, coloring: &Coloring, eps: f64) -> Result<(LoopSet, usize)> {
        self.arm(eps);
        loop {
            let gate = self.gate_diam2;
            let next = self.best(|q| {
                (q.diam2 as f64) >= gate
                    || q.pending_ref.is_some_and(|(s, _)| self.pendings[s].forced)
            });
            match next {
                None => break,
                Some(i) => self.process(i, coloring)?,
            }
        }
        Ok((self.loop_set(), self.step_count))
    }

    /// Set the stopping threshold: the size gate for pieces, the extent
    /// threshold below which pieces stop carrying labels, and the forcing
    /// flags of unfinished pending loops.
    fn arm(&mut self, eps: f64) {
        let unit = 2.0 * eps / self.mesh;
        self.gate_diam2 = unit * unit;
        // labels track pieces with extent measure at least eps/√2
        let key_thresh = 2.0 * eps * eps / (self.mesh * self.mesh);
        self.label_key_thresh = Some(key_thresh);
        for q in &mut self.queue {
            if q.label.is_none() && (q.priority.extent_key as f64) >= key_thresh {
                q.label = Some(self.next_label);
                self.label_census.insert(self.next_label, 0);
                self.next_label += 1;
            }
        }
        for s in 0..self.pendings.len() {
            if self.slot_loop[s].is_none() {
                self.pendings[s].forced = (self.pendings[s].upper_diam2 as f64) >= self.gate_diam2;
            }
        }
    }

    /// The finished ensemble: emitted loops with nesting resolved to the
    /// nearest enclosing loop that was itself emitted.
    pub fn loop_set(&self) -> LoopSet {
        let nesting = self.loop_parent.iter().map(|p| self.resolve_parent(*p)).collect();
        LoopSet { mesh: self.mesh, loops: self.loops.clone(), nesting }
    }

    fn resolve_parent(&self, p: Option<ParentRef>) -> Option<usize> {
        let mut cur = p;
        loop {
            match cur {
                None => return None,
                Some(ParentRef::Loop(i)) => return Some(i),
                Some(ParentRef::Slot(s)) => match self.slot_loop[s] {
                    Some(i) => return Some(i),
                    None => cur = self.pendings[s].outer_slot.map(ParentRef::Slot),
                },
            }
        }
    }

    fn best(&self, admit: impl Fn(&QueuedPiece) -> bool) -> Option<usize> {
        let mut out: Option<usize> = None;
        for (i, q) in self.queue.iter().enumerate() {
            if !admit(q) {
                continue;
            }
            match out {
                None => out = Some(i),
                Some(j) if q.priority > self.queue[j].priority => out = Some(i),
                _ => {}
            }
        }
        out
    }

    fn process(&mut self, i: usize, coloring: &Coloring) -> Result<()> {
        let q = self.queue.swap_remove(i);
        self.step_count += 1;
        match q.piece.bc {
            PieceBc::Mono(m) => self.process_mono(q, m, coloring)?,
            PieceBc::PlusMinus => self.process_gap(q, coloring)?,
        }
        if self.label_key_thresh.is_some() {
            let mut seen = HashSet::new();
            for qq in &self.queue {
                if let Some(l) = qq.label {
                    if seen.insert(l) {
                        *self.label_census.entry(l).or_insert(0) += 1;
                    }
                }
            }
        }
        Ok(())
    }

    fn process_mono(&mut self, q: QueuedPiece, m: Color, coloring: &Coloring) -> Result<()> {
        if q.piece.domain.len() < 3 {
            return self.absorb_mono(q, m, coloring);
        }
        let (u, v) = select_endpoints_by(&q.piece, self.endpoint_rule)?;
        let path = match explore(&q.piece.domain, u, v, ColorSource::Eager(coloring)) {
            Ok(p) => p,
            // the two fictitious arcs can collide on a boundary site of a
            // thin piece; such a piece is small and is read off directly
            Err(Error::InvalidParameter(ref msg)) if msg.contains("too close") => {
                return self.absorb_mono(q, m, coloring);
            }
            Err(e) => return Err(e),
        };
        let daughters = split_domains(&q.piece.domain, &path, m, m)?;
        self.enqueue_mono_split(q, m, &path, daughters)
    }

    /// Read off every contour inside a piece directly from the coloring:
    /// the fallback for pieces too small to run an exploration in.
    /// Equivalent to running the construction inside the piece to
    /// exhaustion.
    fn absorb_mono(&mut self, q: QueuedPiece, m: Color, coloring: &Coloring) -> Result<()> {
        let cs = trace_contours(coloring, &q.piece.domain, Some(m))?;
        let base = self.loops.len();
        for (j, l) in cs.loops.iter().enumerate() {
            self.loops.push(l.clone());
            self.loop_parent.push(match cs.nesting[j] {
                Some(p) => Some(ParentRef::Loop(base + p)),
                None => q.outer_slot.map(ParentRef::Slot),
            });
        }
        Ok(())
    }

    fn process_gap(&mut self, q: QueuedPiece, coloring: &Coloring) -> Result<()> {
        let (xp, yp) = q.piece.natural_endpoints.ok_or_else(|| {
            Error::DegeneratePiece("two-color piece without recorded color-change vertices".into())
        })?;
        let (slot, k) = q
            .pending_ref
            .ok_or_else(|| Error::GeometryInvalid("gap piece without a pending loop".into()))?;
        let source = ColorSource::Eager(coloring);
        let path = if q.piece.domain.len() < 3 {
            static_path(&q.piece.domain, xp, yp, &source)?
        } else {
            explore(&q.piece.domain, xp, yp, source)?
        };
        let daughters = split_domains(&q.piece.domain, &path, Color::Yellow, Color::Blue)?;
        let inner = self.pendings[slot].inner_color;
        let mut qps = Vec::new();
        for d in daughters {
            let outer = match d.bc {
                PieceBc::Mono(c) if c == inner => Some(slot),
                PieceBc::Mono(_) => q.outer_slot,
                PieceBc::PlusMinus => {
                    return Err(Error::GeometryInvalid(
                        "two-color daughter of a two-color piece".into(),
                    ));
                }
            };
            qps.push(Self::queued(d, outer, None));
        }
        self.bequeath_label(q.label, q.priority.extent_key, &mut qps);
        self.queue.extend(qps);
        let p = &mut self.pendings[slot];
        debug_assert!(p.filled[k].is_none(), "gap filled twice");
        p.filled[k] = Some(path.edges);
        p.remaining -= 1;
        if p.remaining == 0 {
            self.emit(slot)?;
        }
        Ok(())
    }

    fn queued(
        piece: DomainPiece,
        outer_slot: Option<usize>,
        pending_ref: Option<(usize, usize)>,
    ) -> QueuedPiece {
        let priority = PriorityOrder::of(&piece.domain);
        let diam2 = piece.domain.idiameter2();
        QueuedPiece { piece, priority, diam2, outer_slot, pending_ref, label: None }
    }

    fn enqueue_mono_split(
        &mut self,
        q: QueuedPiece,
        m: Color,
        path: &ExplorationPath,
        daughters: Vec<DomainPiece>,
    ) -> Result<()> {
        // the loops ride the arc carrying the fictitious opposite color:
        // the left (yellow) arc under blue conditions and vice versa
        let loop_side = if m == Color::Blue { Side::Left } else { Side::Right };
        let excursions = decompose_excursions(&q.piece.domain, path, loop_side)?;
        let range_to_exc: HashMap<(usize, usize), usize> = excursions
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.edge_range.start, e.edge_range.end), i))
            .collect();
        let exc_of = |d: &DomainPiece| -> Result<usize> {
            let exc = d.creating_excursion.as_ref().ok_or_else(|| {
                Error::GeometryInvalid("daughter piece without a creating excursion".into())
            })?;
            range_to_exc
                .get(&(exc.edge_range.start, exc.edge_range.end))
                .copied()
                .ok_or_else(|| {
                    Error::GeometryInvalid("creating excursion not on the loop side".into())
                })
        };
        let mut pocket_pieces: Vec<(DomainPiece, usize)> = Vec::new();
        let mut mono_pieces: Vec<(DomainPiece, Option<usize>)> = Vec::new();
        for d in daughters {
            match d.bc {
                PieceBc::PlusMinus => {
                    let ei = exc_of(&d)?;
                    pocket_pieces.push((d, ei));
                }
                PieceBc::Mono(c) if c == m => mono_pieces.push((d, None)),
                PieceBc::Mono(_) => {
                    let ei = exc_of(&d)?;
                    mono_pieces.push((d, Some(ei)));
                }
            }
        }

        // one pending loop per excursion: the excursion edges, then runs
        // along the parent boundary (counterclockwise under blue, which
        // keeps the enclosed cluster on the left; clockwise under yellow)
        // interleaved with the gaps under the pockets met along the walk
        let walk_ccw = m == Color::Blue;
        let inner_color = m.swapped();
        let domain = &q.piece.domain;
        let n = domain.boundary_cycle.len();
        let pos = |v: HexVertex| -> Result<usize> {
            domain.cycle_index(v).ok_or_else(|| {
                Error::GeometryInvalid("loop anchor is not on the boundary cycle".into())
            })
        };
        let mut new_slots: Vec<usize> = Vec::with_capacity(excursions.len());
        let mut pocket_meta: Vec<Option<(usize, usize)>> = vec![None; pocket_pieces.len()];
        for (ei, exc) in excursions.iter().enumerate() {
            let anchor = pos(exc.endpoints.1)?;
            let mut refs: Vec<(usize, usize)> = Vec::new();
            for (pi, (piece, pe)) in pocket_pieces.iter().enumerate() {
                if *pe != ei {
                    continue;
                }
                let (xp, _) = piece.natural_endpoints.ok_or_else(|| {
                    Error::GeometryInvalid("gap piece without color-change vertices".into())
                })?;
                let off = if walk_ccw {
                    (pos(xp)? + n - anchor) % n
                } else {
                    (anchor + n - pos(xp)?) % n
                };
                refs.push((off, pi));
            }
            refs.sort_unstable();
            let mut runs = Vec::with_capacity(refs.len() + 1);
            let mut cur = exc.endpoints.1;
            for &(_, pi) in &refs {
                let (xp, yp) = pocket_pieces[pi].0.natural_endpoints.unwrap();
                runs.push(cycle_run(domain, cur, xp, walk_ccw)?);
                cur = yp;
            }
            runs.push(cycle_run(domain, cur, exc.endpoints.0, walk_ccw)?);
            let prefix = path.edges[exc.edge_range.clone()].to_vec();
            let mut pts: Vec<(i64, i64)> = prefix
                .iter()
                .chain(runs.iter().flatten())
                .map(|e| (e.from.x, e.from.y))
                .collect();
            for &(_, pi) in &refs {
                pts.extend(
                    pocket_pieces[pi].0.domain.boundary_cycle.iter().map(|e| (e.from.x, e.from.y)),
                );
            }
            let upper_diam2 = points_idiameter2(&pts);
            let slot = self.pendings.len();
            self.pendings.push(Pending {
                prefix,
                runs,
                filled: vec![None; refs.len()],
                remaining: refs.len(),
                outer_slot: q.outer_slot,
                inner_color,
                upper_diam2,
                forced: (upper_diam2 as f64) >= self.gate_diam2,
            });
            self.slot_loop.push(None);
            for (j, &(_, pi)) in refs.iter().enumerate() {
                pocket_meta[pi] = Some((slot, j));
            }
            new_slots.push(slot);
        }

        let mut qps: Vec<QueuedPiece> = Vec::new();
        for (pi, (piece, _)) in pocket_pieces.into_iter().enumerate() {
            let meta = pocket_meta[pi].expect("every pocket was assigned to its excursion");
            qps.push(Self::queued(piece, q.outer_slot, Some(meta)));
        }
        for (piece, inside) in mono_pieces {
            let outer = match inside {
                Some(ei) => Some(new_slots[ei]),
                None => q.outer_slot,
            };
            qps.push(Self::queued(piece, outer, None));
        }
        self.bequeath_label(q.label, q.priority.extent_key, &mut qps);
        self.queue.extend(qps);

        for &s in &new_slots {
            if self.pendings[s].remaining == 0 {
                self.emit(s)?;
            }
        }
        Ok(())
    }

    /// Label inheritance at a split: the widest daughter still above the
    /// label threshold keeps the parent's label, the other qualifying
    /// daughters get fresh ones. Also records the shrinkage statistics.
    fn bequeath_label(
        &mut self,
        parent_label: Option<u32>,
        parent_key: i64,
        qps: &mut [QueuedPiece],
    ) {
        if !qps.is_empty() {
            self.split_events += 1;
            let max_key = qps.iter().map(|q| q.priority.extent_key).max().unwrap();
            if 9 * max_key <= 4 * parent_key {
                self.shrink_events += 1;
            }
        }
        let (Some(thresh), Some(l)) = (self.label_key_thresh, parent_label) else {
            return;
        };
        let mut eligible: Vec<usize> = (0..qps.len())
            .filter(|&i| (qps[i].priority.extent_key as f64) >= thresh)
            .collect();
        if eligible.is_empty() {
            return;
        }
        eligible.sort_by_key(|&i| std::cmp::Reverse(qps[i].priority.extent_key));
        qps[eligible[0]].label = Some(l);
        for &i in &eligible[1..] {
            qps[i].label = Some(self.next_label);
            self.label_census.insert(self.next_label, 0);
            self.next_label += 1;
        }
    }

    /// Paste a finished pending loop together and append it to the
    /// ensemble: excursion edges, then boundary runs interleaved with the
    /// filled gap interfaces.
    fn emit(&mut self, slot: usize) -> Result<()> {
        let (prefix, runs, filled) = {
            let p = &mut self.pendings[slot];
            (
                std::mem::take(&mut p.prefix),
                std::mem::take(&mut p.runs),
                std::mem::take(&mut p.filled),
            )
        };
        let mut edges = prefix;
        for (i, run) in runs.into_iter().enumerate() {
            edges.extend(run);
            if i < filled.len() {
                let gap = filled[i].as_ref().ok_or_else(|| {
                    Error::GeometryInvalid("pending loop emitted with an unfilled gap".into())
                })?;
                edges.extend(gap.iter().copied());
            }
        }
        for w in edges.windows(2) {
            if w[0].to != w[1].from {
                return Err(Error::GeometryInvalid("pending loop does not chain".into()));
            }
        }
        if edges.len() < 3 || edges.last().unwrap().to != edges[0].from {
            return Err(Error::GeometryInvalid("pending loop does not close".into()));
        }
        let l = OrientedLoop::from_edges(edges);
        let inner = self.pendings[slot].inner_color;
        if l.enclosed_color != inner {
            return Err(Error::GeometryInvalid("pasted loop winds the wrong way".into()));
        }
        self.slot_loop[slot] = Some(self.loops.len());
        self.loop_parent.push(self.pendings[slot].outer_slot.map(ParentRef::Slot));
        self.loops.push(l);
        Ok(())
    }
}

/// The boundary-cycle walk from one e-vertex to another, counterclockwise
/// (cycle edges forward) or clockwise (cycle edges reversed). Empty when
/// the endpoints coincide.
fn cycle_run(
    d: &DiscreteDomain,
    from: HexVertex,
    to: HexVertex,
    ccw: bool,
) -> Result<Vec<DirectedEdge>> {
    let mut out = Vec::new();
    if from == to {
        return Ok(out);
    }
    let cyc = &d.boundary_cycle;
    let n = cyc.len();
    let start = d
        .cycle_index(from)
        .ok_or_else(|| Error::GeometryInvalid("run start is not on the boundary cycle".into()))?;
    let mut j = if ccw { start } else { (start + n - 1) % n };
    loop {
        let e = if ccw { cyc[j] } else { cyc[j].reversed() };
        out.push(e);
        if e.to == to {
            return Ok(out);
        }
        j = if ccw { (j + 1) % n } else { (j + n - 1) % n };
        if out.len() > n {
            return Err(Error::GeometryInvalid("boundary run misses its endpoint".into()));
        }
    }
}

/// Rebuild the chordal interface between two boundary e-vertices of a
/// domain from a loop ensemble produced under blue boundary conditions on
/// the same coloring. Loops with diameter exceeding `eps` contribute their
/// edges away from the left boundary arc b→…→a; left-arc edges not covered
/// by a kept loop are walked in reverse; the unique chain from `a` is then
/// followed until it reaches `b`. Keeping every loop reproduces the
/// exploration path from `a` to `b` edge for edge; dropping small loops
/// shortcuts their excursions along the boundary.
pub fn reconstruct_chordal(
    domain: &DiscreteDomain,
    loops: &[OrientedLoop],
    a: HexVertex,
    b: HexVertex,
    eps: f64,
) -> Result<Vec<DirectedEdge>> {
    for v in [a, b] {
        if !domain.is_e_vertex(v) {
            return Err(Error::NotEVertex(format!("({}, {})", v.x, v.y)));
        }
    }
    if a == b {
        return Err(Error::InvalidParameter("reconstruction endpoints coincide".into()));
    }
    let n = domain.boundary_cycle.len();
    let ia = domain.cycle_index(a).expect("e-vertex lies on the boundary cycle");
    let ib = domain.cycle_index(b).expect("e-vertex lies on the boundary cycle");
    let mut left_ccw: HashSet<DirectedEdge> = HashSet::new();
    let mut j = ib;
    while j != ia {
        left_ccw.insert(domain.boundary_cycle[j]);
        j = (j + 1) % n;
    }
    let gate = (2.0 * eps / domain.mesh).powi(2);
    let mut out_edge: HashMap<HexVertex, DirectedEdge> = HashMap::new();
    let mut covered: HashSet<DirectedEdge> = HashSet::new();
    for l in loops {
        if (l.idiameter2() as f64) <= gate {
            continue;
        }
        for e in &l.edges {
            if left_ccw.contains(e) {
                covered.insert(*e);
            } else {
                out_edge.insert(e.from, *e);
            }
        }
    }
    for e in &left_ccw {
        if !covered.contains(e) {
            out_edge.insert(e.to, e.reversed());
        }
    }
    let mut out = Vec::new();
    let mut v = a;
    let bound = out_edge.len() + 2;
    while v != b {
        let e = *out_edge.get(&v).ok_or_else(|| {
            Error::GeometryInvalid("loop set leaves no continuation on the interface".into())
        })?;
        out.push(e);
        v = e.to;
        if out.len() > bound {
            return Err(Error::GeometryInvalid("interface reconstruction does not close".into()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexlattice::{delta_approximation, DomainSpec};
    use crate::percolation::sample;

    fn disk_domain(radius: f64, mesh: f64) -> DiscreteDomain {
        let spec = DomainSpec::disk(Complex64::new(0.0, 0.0), radius, 96);
        delta_approximation(&spec, mesh).expect("disk approximates")
    }

    fn rect_domain(x1: f64, y1: f64, mesh: f64) -> DiscreteDomain {
        let spec = DomainSpec::rectangle(0.0, 0.0, x1, y1);
        delta_approximation(&spec, mesh).expect("rectangle approximates")
    }

    fn constant_coloring(d: &DiscreteDomain, c: Color) -> Coloring {
        let mut col = sample(d.hexes().iter().copied(), 7, 7);
        for v in col.colors.values_mut() {
            *v = c;
        }
        col
    }

    /// Multiset of loops keyed by canonical edge cycle, mapped to
    /// (orientation, color, canonical key of the parent loop).
    type LoopKey = Vec<(i64, i64, i64, i64)>;
    fn canonical(ls: &LoopSet) -> HashMap<LoopKey, (LoopOrientation, Color, Option<LoopKey>)> {
        let key = |l: &OrientedLoop| -> LoopKey {
            l.edges.iter().map(|e| (e.from.x, e.from.y, e.to.x, e.to.y)).collect()
        };
        let mut out = HashMap::new();
        for (i, l) in ls.loops.iter().enumerate() {
            let parent = ls.nesting[i].map(|p| key(&ls.loops[p]));
            let prev = out.insert(key(l), (l.orientation, l.enclosed_color, parent));
            assert!(prev.is_none(), "duplicate loop in ensemble");
        }
        out
    }

    fn exhaustive(d: &DiscreteDomain, coloring: &Coloring, bc: Color) -> (LoopSet, usize) {
        let mut state = ConstructionState::new(d.clone(), bc);
        state.run_until(coloring, 0.0).expect("construction runs")
    }

    #[test]
    fn extent_measure_matches_idealized_shapes() {
        let mesh = 0.05;
        let rect = rect_domain(2.0, 1.0, mesh);
        assert!((dm(&rect) - 2.0).abs() < 3.0 * mesh, "dm = {}", dm(&rect));
        let disk = disk_domain(0.7, mesh);
        assert!((dm(&disk) - 1.4).abs() < 3.0 * mesh, "dm = {}", dm(&disk));
        // consistency with the integer key
        assert!((dm(&rect) - 0.5 * mesh * (extent_key(&rect) as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn priority_prefers_extent_then_dyadic_rank() {
        let mesh = 0.05;
        let near = disk_domain(0.3, mesh);
        // the exact same cell set far from the origin: equal extents, later
        // dyadic rank
        let shift = HexCoord::new(200, 0);
        let far_hexes: Vec<HexCoord> =
            near.hexes().iter().map(|h| HexCoord::new(h.q + shift.q, h.r + shift.r)).collect();
        let far = DiscreteDomain::from_hexes(far_hexes, mesh).expect("shifted set is valid");
        let p_near = PriorityOrder::of(&near);
        let p_far = PriorityOrder::of(&far);
        assert_eq!(p_near.extent_key, p_far.extent_key);
        assert!(p_near > p_far, "origin piece should win the tie");
        let big = disk_domain(0.5, mesh);
        assert!(PriorityOrder::of(&big) > p_near);
        assert!(PriorityOrder::of(&big) > p_far);
    }

    /// Brute-force restatement of the pair rule: enumerate every pair,
    /// maximize primary separation, then secondary, then smallest pair.
    fn extreme_pair_oracle(
        cands: &[HexVertex],
        rule: EndpointRule,
    ) -> Option<(HexVertex, HexVertex)> {
        let (pc, sc): (CoordFn, CoordFn) = match rule {
            EndpointRule::Standard => (|v| v.x, |v| v.y),
            EndpointRule::ImFirst => (|v| v.y, |v| v.x),
        };
        let mut best: Option<((i64, i64), (HexVertex, HexVertex))> = None;
        for (i, &u) in cands.iter().enumerate() {
            for &v in &cands[i + 1..] {
                if u == v {
                    continue;
                }
                let key = ((pc(u) - pc(v)).abs(), (sc(u) - sc(v)).abs());
                let pair = if (u.x, u.y) <= (v.x, v.y) { (u, v) } else { (v, u) };
                let better = match &best {
                    None => true,
                    Some((k, p)) => key > *k || (key == *k && pair < *p),
                };
                if better {
                    best = Some((key, pair));
                }
            }
        }
        best.map(|(_, p)| p)
    }

    #[test]
    fn endpoint_pair_rule_matches_exhaustive_enumeration() {
        // the four corners of an idealized 2×1 rectangle: the secondary
        // separations tie, so the smallest pair wins the diagonal choice
        let corners = [
            HexVertex { x: 0, y: 0 },
            HexVertex { x: 2, y: 0 },
            HexVertex { x: 0, y: 1 },
            HexVertex { x: 2, y: 1 },
        ];
        let got = extreme_pair(&corners, EndpointRule::Standard).unwrap();
        assert_eq!(got, (HexVertex { x: 0, y: 0 }, HexVertex { x: 2, y: 1 }));
        assert_eq!(got, extreme_pair_oracle(&corners, EndpointRule::Standard).unwrap());
        // pseudo-random candidate sets, both rules
        for seed in 0..6u64 {
            let mut x = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                x ^= x >> 31;
                x = x.wrapping_mul(0xd6e8feb86659fd93);
                x ^= x >> 27;
                (x % 21) as i64 - 10
            };
            let cands: Vec<HexVertex> = (0..40)
                .map(|_| HexVertex { x: next(), y: next() })
                .collect::<HashSet<_>>()
                .into_iter()
                .collect();
            for rule in [EndpointRule::Standard, EndpointRule::ImFirst] {
                assert_eq!(
                    extreme_pair(&cands, rule),
                    extreme_pair_oracle(&cands, rule),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn endpoint_selection_picks_extreme_corners_deterministically() {
        let mesh = 0.07;
        let d = rect_domain(2.0, 1.0, mesh);
        let piece = DomainPiece {
            domain: d,
            type_tag: 0,
            creating_excursion: None,
            bc: PieceBc::Mono(Color::Blue),
            natural_endpoints: None,
        };
        let (u, v) = select_endpoints(&piece).expect("selection succeeds");
        let (pu, pv) = (u.pos(mesh), v.pos(mesh));
        // a diameter-realizing corner pair: full horizontal and (up to the
        // ragged lattice boundary) full vertical separation
        assert!((pu.re - pv.re).abs() > 2.0 - 3.0 * mesh, "horizontal span: {pu} {pv}");
        assert!((pu.im - pv.im).abs() > 1.0 - 3.0 * mesh, "vertical span: {pu} {pv}");
        assert!(pu.im < pv.im, "exploration starts at the bottom endpoint");
        let again = select_endpoints(&piece).expect("selection repeats");
        assert_eq!((u, v), again);

        let degenerate = DomainPiece {
            domain: piece.domain.clone(),
            type_tag: 1,
            creating_excursion: None,
            bc: PieceBc::PlusMinus,
            natural_endpoints: None,
        };
        assert!(matches!(select_endpoints(&degenerate), Err(Error::DegeneratePiece(_))));
    }

    #[test]
    fn first_step_on_a_blue_field_splits_without_loops() {
        let d = disk_domain(0.6, 0.05);
        let coloring = constant_coloring(&d, Color::Blue);
        let mut state = ConstructionState::new(d.clone(), Color::Blue);
        assert!(state.step(&coloring).expect("step runs"));
        assert_eq!(state.loops_found(), 0, "a constant field has no contours");
        assert_eq!(state.queue.len(), 1, "one monochromatic daughter");
        let q = &state.queue[0];
        assert_eq!(q.piece.bc, PieceBc::Mono(Color::Blue));
        assert!(q.piece.domain.len() < d.len());
        // and the construction drains with no loops ever appearing
        let (ls, steps) = state.run_until(&coloring, 0.0).expect("drains");
        assert!(ls.is_empty());
        assert!(steps > 1);
    }

    #[test]
    fn emitted_loops_match_their_contours() {
        let d = disk_domain(0.8, 0.08);
        let coloring = sample(d.hexes().iter().copied(), 31, 0);
        let oracle = trace_contours(&coloring, &d, Some(Color::Blue)).expect("contours trace");
        let oracle_keys = canonical(&LoopSet::from_contours(&oracle, d.mesh));
        let mut state = ConstructionState::new(d.clone(), Color::Blue);
        while state.loops_found() < 3 {
            assert!(state.step(&coloring).expect("step runs"), "queue drained too early");
        }
        for (i, l) in state.loops.iter().enumerate() {
            let key: LoopKey =
                l.edges.iter().map(|e| (e.from.x, e.from.y, e.to.x, e.to.y)).collect();
            let (o, c, _) = oracle_keys.get(&key).unwrap_or_else(|| {
                panic!("emitted loop {i} is not a contour of the coloring")
            });
            assert_eq!(*o, l.orientation);
            assert_eq!(*c, l.enclosed_color);
        }
    }

    #[test]
    fn run_until_with_eps_above_the_domain_yields_nothing() {
        let d = disk_domain(0.5, 0.05);
        let coloring = sample(d.hexes().iter().copied(), 5, 0);
        let mut state = ConstructionState::new(d, Color::Blue);
        let (ls, steps) = state.run_until(&coloring, 10.0).expect("runs");
        assert!(ls.is_empty());
        assert_eq!(steps, 0);
        assert_eq!(state.queue.len(), 1, "the untouched root piece stays queued");
    }

    #[test]
    fn exhaustion_reproduces_every_contour_exactly() {
        for &(mesh, seed, bc) in &[
            (0.1, 1u64, Color::Blue),
            (0.1, 2, Color::Blue),
            (0.06, 3, Color::Blue),
            (0.06, 4, Color::Yellow),
            (0.04, 5, Color::Blue),
        ] {
            let d = disk_domain(1.0, mesh);
            let coloring = sample(d.hexes().iter().copied(), seed, 0);
            let (ls, steps) = exhaustive(&d, &coloring, bc);
            assert!(steps > 0);
            let oracle = trace_contours(&coloring, &d, Some(bc)).expect("contours trace");
            let want = canonical(&LoopSet::from_contours(&oracle, mesh));
            let got = canonical(&ls);
            for (k, v) in &want {
                let g = got.get(k).unwrap_or_else(|| {
                    panic!("missing contour (mesh {mesh}, seed {seed}): {} edges", k.len())
                });
                assert_eq!(g, v, "orientation/color/nesting differ (mesh {mesh}, seed {seed})");
            }
            assert_eq!(
                got.len(),
                want.len(),
                "extra loops emitted (mesh {mesh}, seed {seed})"
            );
            for l in &ls.loops {
                assert!(l.is_simple());
            }
        }
    }

    #[test]
    fn run_until_keeps_every_contour_wider_than_eps() {
        for &seed in &[4u64, 5] {
            let mesh = 0.06;
            let eps = 0.35;
            let d = disk_domain(1.0, mesh);
            let coloring = sample(d.hexes().iter().copied(), seed, 0);
            let mut state = ConstructionState::new(d.clone(), Color::Blue);
            let (ls, steps) = state.run_until(&coloring, eps).expect("runs");
            let (full, full_steps) = exhaustive(&d, &coloring, Color::Blue);
            assert!(steps <= full_steps, "the gated run must not do more work");
            let gate = (2.0 * eps / mesh).powi(2);
            let got = canonical(&ls);
            let keep = |l: &OrientedLoop| (l.idiameter2() as f64) > gate;
            // completeness: every wide contour was found
            for l in full.loops.iter().filter(|l| keep(l)) {
                let key: LoopKey =
                    l.edges.iter().map(|e| (e.from.x, e.from.y, e.to.x, e.to.y)).collect();
                assert!(got.contains_key(&key), "wide contour missing at eps = {eps}");
            }
            // soundness: everything emitted is a genuine contour
            let want = canonical(&full);
            for k in got.keys() {
                assert!(want.contains_key(k), "emitted loop is not a contour");
            }
            // the stopping rule: nothing big is left unexplored
            for q in &state.queue {
                assert!(
                    (q.diam2 as f64) < gate,
                    "queued piece of diameter {} ≥ eps remains",
                    (q.diam2 as f64).sqrt() * mesh * 0.5,
                );
            }
        }
    }

    #[test]
    fn endpoint_rule_coupling_leaves_the_loop_set_invariant() {
        let mesh = 0.08;
        let d = disk_domain(1.0, mesh);
        let coloring = sample(d.hexes().iter().copied(), 11, 0);
        let mut s1 = ConstructionState::new(d.clone(), Color::Blue);
        let mut s2 = ConstructionState::new(d.clone(), Color::Blue).with_rule(EndpointRule::ImFirst);
        let (l1, _) = s1.run_until(&coloring, 0.0).expect("standard rule runs");
        let (l2, _) = s2.run_until(&coloring, 0.0).expect("rotated rule runs");
        assert_eq!(canonical(&l1), canonical(&l2));
    }

    #[test]
    fn nested_loops_alternate_orientation() {
        let mesh = 0.05;
        let d = disk_domain(1.0, mesh);
        let coloring = sample(d.hexes().iter().copied(), 12, 0);
        let (ls, _) = exhaustive(&d, &coloring, Color::Blue);
        assert!(!ls.is_empty());
        let mut nested = 0;
        for (i, l) in ls.loops.iter().enumerate() {
            if let Some(p) = ls.nesting[i] {
                assert_ne!(
                    l.orientation, ls.loops[p].orientation,
                    "a loop and its innermost enclosing loop must wind oppositely"
                );
                assert!(ls.loops[p].contains_loop(l), "recorded parent must contain the loop");
                nested += 1;
            }
        }
        assert!(nested > 0, "expected at least one nested loop at this mesh");
        // chain of loops around a fixed deep cell alternates as well
        let center = HexCoord::new(0, 0);
        let cv = HexVertex { x: 0, y: 0 };
        let mut around: Vec<&OrientedLoop> =
            ls.loops.iter().filter(|l| l.contains_vertex(cv)).collect();
        around.sort_by_key(|l| l.signed_area2().abs());
        for w in around.windows(2) {
            assert_ne!(w[0].orientation, w[1].orientation);
        }
        let _ = center;
    }

    #[test]
    fn census_tracks_label_lifetimes() {
        let mesh = 0.05;
        let d = disk_domain(1.0, mesh);
        let coloring = sample(d.hexes().iter().copied(), 13, 0);
        let mut state = ConstructionState::new(d, Color::Blue);
        let (_, steps) = state.run_until(&coloring, 0.15).expect("runs");
        assert!(!state.label_census.is_empty());
        assert!(state.label_census.contains_key(&1), "the root piece carries the first label");
        assert!(state.label_census[&1] > 0);
        for (&l, &alive) in &state.label_census {
            assert!(l < state.next_label);
            assert!((alive as usize) <= steps);
        }
        assert!(state.split_events > 0);
        assert!(state.shrink_events <= state.split_events);
        assert!(state.shrink_events > 0, "some split shrinks to two thirds at this depth");
    }

    #[test]
    fn reconstruction_rides_the_boundary_without_loops() {
        let mesh = 0.06;
        let d = disk_domain(0.7, mesh);
        let a = d.nearest_e_vertex(Complex64::new(0.0, -0.7));
        let b = d.nearest_e_vertex(Complex64::new(0.0, 0.7));
        let path = reconstruct_chordal(&d, &[], a, b, 0.0).expect("reconstructs");
        let (_, left) = d.boundary_arcs(a, b).expect("arcs split");
        assert_eq!(path, left, "with no loops the interface is the left boundary arc");
    }

    #[test]
    fn reconstruction_reproduces_the_exploration_path() {
        for &seed in &[1u64, 2, 3, 4] {
            let mesh = 0.08;
            let d = disk_domain(1.0, mesh);
            let coloring = sample(d.hexes().iter().copied(), seed, 0);
            let (ls, _) = exhaustive(&d, &coloring, Color::Blue);
            let a = d.nearest_e_vertex(Complex64::new(0.0, -1.0));
            let b = d.nearest_e_vertex(Complex64::new(0.0, 1.0));
            let want =
                explore(&d, a, b, ColorSource::Eager(&coloring)).expect("exploration runs");
            let got = reconstruct_chordal(&d, &ls.loops, a, b, 0.5 * mesh)
                .expect("reconstruction runs");
            assert_eq!(got, want.edges, "seed {seed}: keeping all loops must recover the path");
        }
    }

    #[test]
    fn reconstruction_detours_shrink_with_eps() {
        let mesh = 0.08;
        let eps = 0.4;
        let d = disk_domain(1.0, mesh);
        let coloring = sample(d.hexes().iter().copied(), 2, 0);
        let (ls, _) = exhaustive(&d, &coloring, Color::Blue);
        let a = d.nearest_e_vertex(Complex64::new(0.0, -1.0));
        let b = d.nearest_e_vertex(Complex64::new(0.0, 1.0));
        let want = explore(&d, a, b, ColorSource::Eager(&coloring)).expect("exploration runs");
        let got = reconstruct_chordal(&d, &ls.loops, a, b, eps).expect("reconstruction runs");
        let pts = |edges: &[DirectedEdge]| -> Vec<Complex64> {
            edges.iter().map(|e| e.from.pos(mesh)).chain([edges.last().unwrap().to.pos(mesh)]).collect()
        };
        let (pw, pg) = (pts(&want.edges), pts(&got));
        let dir_haus = |xs: &[Complex64], ys: &[Complex64]| -> f64 {
            xs.iter()
                .map(|x| ys.iter().map(|y| (x - y).norm()).fold(f64::MAX, f64::min))
                .fold(0.0, f64::max)
        };
        let h = dir_haus(&pw, &pg).max(dir_haus(&pg, &pw));
        assert!(h <= eps + 4.0 * mesh, "detour distance {h} exceeds eps + 4δ");
        assert!(got.len() <= want.edges.len(), "shortcuts never lengthen the chain");
    }

    #[test]
    fn loopset_serialization_and_svg() {
        let mesh = 0.08;
        let d = disk_domain(0.8, mesh);
        let coloring = sample(d.hexes().iter().copied(), 21, 0);
        let (ls, _) = exhaustive(&d, &coloring, Color::Blue);
        assert!(!ls.is_empty());
        let v: serde_json::Value = serde_json::from_str(&ls.to_json()).expect("json parses");
        assert_eq!(v["loops"].as_array().unwrap().len(), ls.len());
        assert!(!v["vertices"].as_array().unwrap().is_empty());
        for (i, l) in v["loops"].as_array().unwrap().iter().enumerate() {
            if let Some(p) = l["parent"].as_u64() {
                assert!((p as usize) < ls.len());
                let _ = i;
            }
        }
        let svg = ls.to_svg();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<path").count(), ls.len());
        // round trip through the serde representation
        let back: LoopSet = serde_json::from_str(
            &serde_json::to_string(&ls).expect("serializes"),
        )
        .expect("deserializes");
        assert_eq!(back.loops, ls.loops);
        assert_eq!(back.nesting, ls.nesting);
    }
}
