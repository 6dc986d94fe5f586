//! The percolation exploration process: lazy interface growth between two
//! boundary e-vertices under fictitious two-arc boundary conditions,
//! excursion decomposition, splitting of the domain along the explored
//! set, and discrete fillings (hulls) of path prefixes.

use num_complex::Complex64;
use serde_json::json;
use std::collections::{HashMap, HashSet, VecDeque};

use crate::hexlattice::{DirectedEdge, DiscreteDomain, HexCoord, HexVertex};
use crate::percolation::{site_color, Color, Coloring};
use crate::{Error, Result};

/// Where site colors come from during exploration: a pre-sampled
/// configuration, or the keyed counter generator queried lazily. Both
/// agree site for site when built from the same key, so lazy exploration
/// and eager sampling are exchangeable.
#[derive(Debug, Clone, Copy)]
pub enum ColorSource<'a> {
    Eager(&'a Coloring),
    Keyed { seed: u64, stream: u64 },
}

impl ColorSource<'_> {
    pub fn color_of(&self, h: HexCoord) -> Result<Color> {
        match self {
            ColorSource::Eager(c) => c
                .color(h)
                .ok_or_else(|| Error::InvalidParameter("color source does not cover the domain".into())),
            ColorSource::Keyed { seed, stream } => Ok(site_color(*seed, *stream, h)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A completed exploration path from x to y, with the explored site sets:
/// blue hexagons adjacent on the right of travel, yellow on the left.
#[derive(Debug, Clone)]
pub struct ExplorationPath {
    pub edges: Vec<DirectedEdge>,
    pub gamma_b: HashSet<HexCoord>,
    pub gamma_y: HashSet<HexCoord>,
    pub start: HexVertex,
    pub target: HexVertex,
}

impl ExplorationPath {
    /// All explored hexagons Γ = Γ_B ∪ Γ_Y.
    pub fn gamma(&self) -> HashSet<HexCoord> {
        self.gamma_b.union(&self.gamma_y).copied().collect()
    }

    /// Ordered vertices from x to y.
    pub fn vertices(&self) -> Vec<HexVertex> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        if let Some(first) = self.edges.first() {
            out.push(first.from);
        }
        out.extend(self.edges.iter().map(|e| e.to));
        out
    }

    /// JSON export as an ordered vertex list in plane coordinates.
    pub fn to_json(&self, mesh: f64) -> String {
        let verts: Vec<[f64; 2]> = self
            .vertices()
            .iter()
            .map(|v| {
                let p = v.pos(mesh);
                [p.re, p.im]
            })
            .collect();
        json!({ "mesh": mesh, "vertices": verts }).to_string()
    }
}

/// A running exploration. `explored` holds exactly the revealed interior
/// hexagons (the flanks of the path so far); the fictitious arc colors
/// live separately so the same configuration can drive explorations in
/// nested subdomains.
pub struct ExplorationState<'a> {
    pub domain: &'a DiscreteDomain,
    pub start: HexVertex,
    pub target: HexVertex,
    pub path_so_far: Vec<DirectedEdge>,
    pub explored: HashMap<HexCoord, Color>,
    pub cursor: DirectedEdge,
    fiction: HashMap<HexCoord, Color>,
    source: ColorSource<'a>,
    finished: bool,
}

impl<'a> ExplorationState<'a> {
    pub fn new(
        domain: &'a DiscreteDomain,
        x: HexVertex,
        y: HexVertex,
        source: ColorSource<'a>,
    ) -> Result<Self> {
        if domain.len() < 3 {
            return Err(Error::InvalidParameter(
                "exploration needs a domain of at least 3 hexagons".into(),
            ));
        }
        for v in [x, y] {
            if !domain.is_e_vertex(v) {
                return Err(Error::NotEVertex(format!("({}, {})", v.x, v.y)));
            }
        }
        if x == y {
            return Err(Error::NotEVertex("endpoints must be distinct".into()));
        }

        // fictitious boundary colors: blue along the right arc x→y
        // (counterclockwise), yellow along the left arc
        let (right, left) = domain.boundary_arcs(x, y)?;
        let mut fiction: HashMap<HexCoord, Color> = HashMap::new();
        let mut assign = |h: HexCoord, c: Color| -> Result<()> {
            if let Some(&old) = fiction.get(&h) {
                if old != c {
                    return Err(Error::InvalidParameter(
                        "endpoints too close: a boundary site touches both arcs".into(),
                    ));
                }
            }
            fiction.insert(h, c);
            Ok(())
        };
        for e in &right {
            assign(e.right_hex(), Color::Blue)?;
        }
        for e in &left {
            // left-arc edges run clockwise, so the exterior site is on the left
            assign(e.left_hex(), Color::Yellow)?;
        }

        // entry edge: the outward edge at x, directed into the domain, with
        // the blue-arc site on the right of travel
        let w = x
            .neighbors()
            .into_iter()
            .find(|&w| {
                DirectedEdge::new(x, w)
                    .flanks()
                    .iter()
                    .all(|h| !domain.contains_hex(*h))
            })
            .expect("e-vertex has an outward edge");
        let cursor = DirectedEdge::new(w, x);
        let blue_at_x = right.first().expect("nonempty right arc").right_hex();
        debug_assert!(cursor.side_of(blue_at_x) < 0, "entry edge keeps blue on the right");

        Ok(ExplorationState {
            domain,
            start: x,
            target: y,
            path_so_far: Vec::new(),
            explored: HashMap::new(),
            cursor,
            fiction,
            source,
            finished: false,
        })
    }

    pub fn tip(&self) -> HexVertex {
        self.cursor.to
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn effective_color(&mut self, h: HexCoord) -> Result<Color> {
        if self.domain.contains_hex(h) {
            if let Some(&c) = self.explored.get(&h) {
                return Ok(c);
            }
            let c = self.source.color_of(h)?;
            self.explored.insert(h, c);
            Ok(c)
        } else {
            self.fiction.get(&h).copied().ok_or_else(|| {
                Error::GeometryInvalid("exploration reached an uncolored exterior site".into())
            })
        }
    }

    /// Advance by one edge. At the tip, the hexagon ahead decides: blue
    /// (or fictitiously blue) sends the path along the left outgoing edge,
    /// keeping the hexagon on the right; yellow sends it right. Returns
    /// true when the path has terminated at the target.
    pub fn step(&mut self) -> Result<bool> {
        if self.finished {
            return Ok(true);
        }
        let e = self.cursor;
        let v = e.to;
        let a = e.left_hex();
        let b = e.right_hex();
        let c = e.opposite_hex();
        let want = match self.effective_color(c)? {
            Color::Blue => (a, c),   // left edge: ahead stays on the right
            Color::Yellow => (c, b), // right edge: ahead stays on the left
        };
        let next = v
            .neighbors()
            .into_iter()
            .filter(|&w| w != e.from)
            .map(|w| DirectedEdge::new(v, w))
            .find(|ed| {
                let f = ed.flanks();
                f.contains(&want.0) && f.contains(&want.1)
            })
            .expect("tip has an outgoing edge between the chosen hexagons");
        if next.flanks().iter().all(|h| !self.domain.contains_hex(*h)) {
            // the chosen edge leaves the domain between the two arcs
            debug_assert_eq!(v, self.target, "exit can only happen at the target");
            self.finished = true;
            return Ok(true);
        }
        self.path_so_far.push(next);
        self.cursor = next;
        Ok(false)
    }

    pub fn into_path(self) -> ExplorationPath {
        let mut gamma_b = HashSet::new();
        let mut gamma_y = HashSet::new();
        for (&h, &c) in &self.explored {
            match c {
                Color::Blue => gamma_b.insert(h),
                Color::Yellow => gamma_y.insert(h),
            };
        }
        ExplorationPath {
            edges: self.path_so_far,
            gamma_b,
            gamma_y,
            start: self.start,
            target: self.target,
        }
    }
}

/// Run a full exploration from x to y.
pub fn explore(
    domain: &DiscreteDomain,
    x: HexVertex,
    y: HexVertex,
    source: ColorSource,
) -> Result<ExplorationPath> {
    let mut state = ExplorationState::new(domain, x, y, source)?;
    while !state.step()? {}
    Ok(state.into_path())
}

/// Advance until the predicate first holds after a step, or the path
/// terminates. The predicate must be monotone (once true, stays true as
/// the path grows).
pub fn explore_until<'a>(
    mut state: ExplorationState<'a>,
    mut stop: impl FnMut(&ExplorationState<'a>) -> bool,
) -> Result<ExplorationState<'a>> {
    loop {
        if state.step()? {
            return Ok(state);
        }
        if stop(&state) {
            return Ok(state);
        }
    }
}

/// Extract the chordal interface of a fully colorable domain without the
/// incremental cursor walk: the chain of blue-right bichromatic edges from
/// x to y under the usual fictitious arc colors. Equivalent to `explore`,
/// but works for domains of any size, including one or two cells.
pub(crate) fn static_path(
    domain: &DiscreteDomain,
    x: HexVertex,
    y: HexVertex,
    source: &ColorSource,
) -> Result<ExplorationPath> {
    let (right, left) = domain.boundary_arcs(x, y)?;
    let mut fiction: HashMap<HexCoord, Color> = HashMap::new();
    for e in &right {
        fiction.insert(e.right_hex(), Color::Blue);
    }
    for e in &left {
        if fiction.insert(e.left_hex(), Color::Yellow) == Some(Color::Blue) {
            return Err(Error::InvalidParameter(
                "endpoints too close: the two boundary arcs share a site".into(),
            ));
        }
    }
    let color_at = |h: HexCoord| -> Result<Option<Color>> {
        if domain.contains_hex(h) {
            source.color_of(h).map(Some)
        } else {
            Ok(fiction.get(&h).copied())
        }
    };
    let mut tails: HashMap<HexVertex, DirectedEdge> = HashMap::new();
    for &h in domain.hexes().iter().chain(domain.s_boundary.iter()) {
        if color_at(h)? != Some(Color::Blue) {
            continue;
        }
        for nb in h.neighbors() {
            if color_at(nb)? == Some(Color::Yellow) {
                let e = crate::percolation::edge_with_right(h, nb);
                tails.insert(e.from, e);
            }
        }
    }
    let mut edges = Vec::new();
    let mut gamma_b = HashSet::new();
    let mut gamma_y = HashSet::new();
    let bound = 6 * (domain.len() + domain.s_boundary.len());
    let mut v = x;
    while v != y {
        let e = *tails.get(&v).ok_or_else(|| {
            Error::GeometryInvalid("interface chain broke before reaching the target".into())
        })?;
        if domain.contains_hex(e.right_hex()) {
            gamma_b.insert(e.right_hex());
        }
        if domain.contains_hex(e.left_hex()) {
            gamma_y.insert(e.left_hex());
        }
        edges.push(e);
        v = e.to;
        if edges.len() > bound {
            return Err(Error::GeometryInvalid("interface chain does not terminate".into()));
        }
    }
    Ok(ExplorationPath { edges, gamma_b, gamma_y, start: x, target: y })
}

/// A maximal run of path edges avoiding one boundary arc's edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Excursion {
    pub side: Side,
    pub edge_range: std::ops::Range<usize>,
    /// First and last vertex in travel order.
    pub endpoints: (HexVertex, HexVertex),
}

/// Decompose a path into its maximal excursions away from the stated
/// boundary side (the left arc for `Side::Left`); excursions are disjoint,
/// ordered, and separated by runs of boundary edges of that side.
pub fn decompose_excursions(
    domain: &DiscreteDomain,
    p: &ExplorationPath,
    side: Side,
) -> Result<Vec<Excursion>> {
    let (right, left) = domain.boundary_arcs(p.start, p.target)?;
    let arc = match side {
        Side::Left => &left,
        Side::Right => &right,
    };
    let arc_keys: HashSet<(HexVertex, HexVertex)> = arc.iter().map(|e| e.key()).collect();
    let mut out = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, e) in p.edges.iter().enumerate() {
        if arc_keys.contains(&e.key()) {
            if let Some(s) = run_start.take() {
                out.push(Excursion {
                    side,
                    edge_range: s..i,
                    endpoints: (p.edges[s].from, p.edges[i - 1].to),
                });
            }
        } else if run_start.is_none() {
            run_start = Some(i);
        }
    }
    if let Some(s) = run_start {
        let n = p.edges.len();
        out.push(Excursion {
            side,
            edge_range: s..n,
            endpoints: (p.edges[s].from, p.edges[n - 1].to),
        });
    }
    Ok(out)
}

/// Boundary conditions carried by a split-off piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceBc {
    PlusMinus,
    Mono(Color),
}

/// One connected component of the domain minus the explored set.
#[derive(Debug)]
pub struct DomainPiece {
    pub domain: DiscreteDomain,
    /// 1: touches Γ_Y and the left arc; 2: touches Γ_B and the right arc;
    /// 3: touches only Γ_Y; 4: touches only Γ_B.
    pub type_tag: u8,
    pub creating_excursion: Option<Excursion>,
    pub bc: PieceBc,
    /// For two-color pieces, the e-vertices at the two edges separating
    /// the yellow and blue portions of the s-boundary, ordered so that the
    /// counterclockwise arc from the first to the second carries blue.
    pub natural_endpoints: Option<(HexVertex, HexVertex)>,
}

/// Split the domain along an exploration path into the connected
/// components of D ∖ Γ(γ), classifying each by the sets its s-boundary
/// meets. `left_color`/`right_color` give the actual boundary colors of
/// the two arcs of the parent domain (both blue for the monochromatic
/// blue ground configuration; yellow/blue when the parent was already
/// two-colored with the path run between its natural endpoints).
pub fn split_domains(
    domain: &DiscreteDomain,
    p: &ExplorationPath,
    left_color: Color,
    right_color: Color,
) -> Result<Vec<DomainPiece>> {
    let gamma = p.gamma();
    let (right_arc, left_arc) = domain.boundary_arcs(p.start, p.target)?;
    let left_hexes: HashSet<HexCoord> = left_arc.iter().map(|e| e.left_hex()).collect();
    let right_hexes: HashSet<HexCoord> = right_arc.iter().map(|e| e.right_hex()).collect();

    // flank index: explored hex → path edge indices it flanks
    let mut left_flank_edges: HashMap<HexCoord, Vec<usize>> = HashMap::new();
    let mut right_flank_edges: HashMap<HexCoord, Vec<usize>> = HashMap::new();
    for (i, e) in p.edges.iter().enumerate() {
        left_flank_edges.entry(e.left_hex()).or_default().push(i);
        right_flank_edges.entry(e.right_hex()).or_default().push(i);
    }

    let excursions_left = decompose_excursions(domain, p, Side::Left)?;
    let excursions_right = decompose_excursions(domain, p, Side::Right)?;

    // connected components of the unexplored interior
    let mut unassigned: HashSet<HexCoord> = domain
        .hexes()
        .iter()
        .copied()
        .filter(|h| !gamma.contains(h))
        .collect();
    let mut components: Vec<Vec<HexCoord>> = Vec::new();
    while let Some(&seed) = unassigned.iter().min() {
        let mut comp = Vec::new();
        let mut queue = VecDeque::new();
        unassigned.remove(&seed);
        queue.push_back(seed);
        while let Some(h) = queue.pop_front() {
            comp.push(h);
            for nb in h.neighbors() {
                if unassigned.remove(&nb) {
                    queue.push_back(nb);
                }
            }
        }
        comp.sort();
        components.push(comp);
    }
    components.sort_by_key(|c| c[0]);

    let effective = |h: HexCoord| -> Option<Color> {
        if p.gamma_y.contains(&h) {
            Some(Color::Yellow)
        } else if p.gamma_b.contains(&h) {
            Some(Color::Blue)
        } else if left_hexes.contains(&h) {
            Some(left_color)
        } else if right_hexes.contains(&h) {
            Some(right_color)
        } else {
            None
        }
    };

    let mut out = Vec::new();
    for comp in components {
        let piece_domain = DiscreteDomain::from_hexes(comp.iter().copied(), domain.mesh)?;
        let mut meets_gy = false;
        let mut meets_gb = false;
        let mut meets_left = false;
        let mut meets_right = false;
        for &s in &piece_domain.s_boundary {
            meets_gy |= p.gamma_y.contains(&s);
            meets_gb |= p.gamma_b.contains(&s);
            meets_left |= left_hexes.contains(&s);
            meets_right |= right_hexes.contains(&s);
        }
        let type_tag = match (meets_gy, meets_gb, meets_left, meets_right) {
            (true, false, true, _) => 1,
            (false, true, _, true) => 2,
            (true, false, false, false) => 3,
            (false, true, false, false) => 4,
            flags => {
                return Err(Error::GeometryInvalid(format!(
                    "component s-boundary meets an impossible set combination {:?}",
                    flags
                )))
            }
        };

        // boundary colors of the piece
        let mut has_blue = false;
        let mut has_yellow = false;
        for &s in &piece_domain.s_boundary {
            match effective(s).expect("piece s-boundary site is explored or on an arc") {
                Color::Blue => has_blue = true,
                Color::Yellow => has_yellow = true,
            }
        }
        let bc = match (has_yellow, has_blue) {
            (true, true) => PieceBc::PlusMinus,
            (false, true) => PieceBc::Mono(Color::Blue),
            (true, false) => PieceBc::Mono(Color::Yellow),
            (false, false) => unreachable!("piece has a nonempty s-boundary"),
        };

        // natural endpoints: the two transition vertices of the s-hex color
        // sequence along the piece's boundary cycle, the first one opening
        // the blue portion counterclockwise
        let natural_endpoints = if bc == PieceBc::PlusMinus {
            let cyc = &piece_domain.boundary_cycle;
            let n = cyc.len();
            let mut transitions = Vec::new();
            for i in 0..n {
                let here = effective(cyc[i].right_hex()).unwrap();
                let next = effective(cyc[(i + 1) % n].right_hex()).unwrap();
                if here != next {
                    transitions.push((cyc[i].to, next));
                }
            }
            if transitions.len() != 2 {
                return Err(Error::GeometryInvalid(format!(
                    "two-color piece has {} color transitions on its s-boundary",
                    transitions.len()
                )));
            }
            let (xp, yp) = if transitions[0].1 == Color::Blue {
                (transitions[0].0, transitions[1].0)
            } else {
                (transitions[1].0, transitions[0].0)
            };
            Some((xp, yp))
        } else {
            None
        };

        // the excursion this piece hangs off, when its flank edges lie in one
        let flank_map = if type_tag == 1 || type_tag == 3 {
            &left_flank_edges
        } else {
            &right_flank_edges
        };
        let excursions = if type_tag == 1 || type_tag == 3 {
            &excursions_left
        } else {
            &excursions_right
        };
        let gamma_side = if type_tag == 1 || type_tag == 3 { &p.gamma_y } else { &p.gamma_b };
        let mut idxs: Vec<usize> = piece_domain
            .s_boundary
            .iter()
            .filter(|s| gamma_side.contains(s))
            .filter_map(|s| flank_map.get(s))
            .flatten()
            .copied()
            .collect();
        idxs.sort_unstable();
        let creating_excursion = idxs.first().and_then(|&lo| {
            let hi = *idxs.last().unwrap();
            excursions
                .iter()
                .find(|x| x.edge_range.contains(&lo) && x.edge_range.contains(&hi))
                .cloned()
        });

        out.push(DomainPiece {
            domain: piece_domain,
            type_tag,
            creating_excursion,
            bc,
            natural_endpoints,
        });
    }
    Ok(out)
}

/// The filling (discrete hull) of a path prefix: everything explored plus
/// everything the explored set or the boundary cuts off from the target
/// vertex b.
#[derive(Debug, Clone)]
pub struct DiscreteFilling {
    pub hexes: HashSet<HexCoord>,
    pub tip: HexVertex,
    pub time_index: usize,
}

pub fn discrete_filling(
    domain: &DiscreteDomain,
    start: HexVertex,
    prefix: &[DirectedEdge],
    b: HexVertex,
) -> Result<DiscreteFilling> {
    let mut explored: HashSet<HexCoord> = HashSet::new();
    for e in prefix {
        for h in e.flanks() {
            if domain.contains_hex(h) {
                explored.insert(h);
            }
        }
    }
    // flood the unexplored region from the hexagons at b
    let mut reach: HashSet<HexCoord> = HashSet::new();
    let mut queue = VecDeque::new();
    for h in b.hexes() {
        if domain.contains_hex(h) && !explored.contains(&h) && reach.insert(h) {
            queue.push_back(h);
        }
    }
    while let Some(h) = queue.pop_front() {
        for nb in h.neighbors() {
            if domain.contains_hex(nb) && !explored.contains(&nb) && reach.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    let hexes = domain
        .hexes()
        .iter()
        .copied()
        .filter(|h| !reach.contains(h))
        .collect();
    Ok(DiscreteFilling {
        hexes,
        tip: prefix.last().map(|e| e.to).unwrap_or(start),
        time_index: prefix.len(),
    })
}

/// The unique piece whose hexagon contains z.
pub fn containing_piece<'p>(
    pieces: &'p [DomainPiece],
    p: &ExplorationPath,
    z: Complex64,
    mesh: f64,
) -> Result<&'p DomainPiece> {
    let h = HexCoord::from_point(z, mesh);
    if p.gamma_b.contains(&h) || p.gamma_y.contains(&h) {
        return Err(Error::OnExploredSet);
    }
    pieces
        .iter()
        .find(|piece| piece.domain.contains_hex(h))
        .ok_or_else(|| Error::InvalidParameter("point lies outside every piece".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexlattice::{delta_approximation, DomainSpec};
    use crate::percolation::{edge_with_right, sample};

    fn disk_domain(mesh: f64) -> DiscreteDomain {
        let spec = DomainSpec::disk(Complex64::new(0.0, 0.0), 1.0, 256);
        delta_approximation(&spec, mesh).unwrap()
    }

    fn south_north(d: &DiscreteDomain) -> (HexVertex, HexVertex) {
        (
            d.nearest_e_vertex(Complex64::new(0.0, -1.0)),
            d.nearest_e_vertex(Complex64::new(0.0, 1.0)),
        )
    }

    fn constant_coloring(d: &DiscreteDomain, color: Color) -> Coloring {
        let region: Vec<HexCoord> = d.hexes().to_vec();
        let colors = region.iter().map(|&h| (h, color)).collect();
        Coloring { region, colors, seed: 0, stream: 0 }
    }

    #[test]
    fn monochromatic_interiors_hug_the_boundary_arcs() {
        let d = disk_domain(0.11);
        let (x, y) = south_north(&d);
        let (right, left) = d.boundary_arcs(x, y).unwrap();

        let blue = constant_coloring(&d, Color::Blue);
        let p = explore(&d, x, y, ColorSource::Eager(&blue)).unwrap();
        assert_eq!(p.edges, left, "all-blue interior forces the path onto the left arc");

        let yellow = constant_coloring(&d, Color::Yellow);
        let p = explore(&d, x, y, ColorSource::Eager(&yellow)).unwrap();
        assert_eq!(p.edges, right, "all-yellow interior forces the path onto the right arc");
    }

    /// Static interface extraction from a fully sampled configuration: the
    /// chain of blue-right bichromatic edges from x, using the fictitious
    /// arc colors on the exterior ring.
    fn static_interface_oracle(
        d: &DiscreteDomain,
        x: HexVertex,
        y: HexVertex,
        c: &Coloring,
    ) -> Vec<DirectedEdge> {
        let (right, left) = d.boundary_arcs(x, y).unwrap();
        let mut fiction: HashMap<HexCoord, Color> = HashMap::new();
        for e in &right {
            fiction.insert(e.right_hex(), Color::Blue);
        }
        for e in &left {
            fiction.insert(e.left_hex(), Color::Yellow);
        }
        let color_at = |h: HexCoord| -> Option<Color> {
            if d.contains_hex(h) {
                c.color(h)
            } else {
                fiction.get(&h).copied()
            }
        };
        let mut tails: HashMap<HexVertex, DirectedEdge> = HashMap::new();
        for &h in d.hexes().iter().chain(d.s_boundary.iter()) {
            if color_at(h) != Some(Color::Blue) {
                continue;
            }
            for nb in h.neighbors() {
                if color_at(nb) == Some(Color::Yellow) {
                    let e = edge_with_right(h, nb);
                    tails.insert(e.from, e);
                }
            }
        }
        let mut out = Vec::new();
        let mut v = x;
        let bound = 6 * (d.len() + d.s_boundary.len());
        while v != y {
            let e = tails[&v];
            out.push(e);
            v = e.to;
            assert!(out.len() <= bound, "oracle walk did not terminate");
        }
        out
    }

    #[test]
    fn random_paths_match_static_interface_oracle() {
        for seed in 0..6u64 {
            let d = disk_domain(0.09);
            let (x, y) = south_north(&d);
            let c = sample(d.hexes().iter().copied(), seed, 1);
            let lazy = explore(&d, x, y, ColorSource::Keyed { seed, stream: 1 }).unwrap();
            let eager = explore(&d, x, y, ColorSource::Eager(&c)).unwrap();
            assert_eq!(lazy.edges, eager.edges, "lazy and eager sampling agree");
            assert_eq!(lazy.gamma_b, eager.gamma_b);
            assert_eq!(lazy.gamma_y, eager.gamma_y);
            let oracle = static_interface_oracle(&d, x, y, &c);
            assert_eq!(lazy.edges, oracle, "seed {}", seed);
        }
    }

    #[test]
    fn path_edge_colors_and_explored_adjacency() {
        let d = disk_domain(0.07);
        let (x, y) = south_north(&d);
        let seed = 31;
        let c = sample(d.hexes().iter().copied(), seed, 0);
        let p = explore(&d, x, y, ColorSource::Eager(&c)).unwrap();
        let (right, left) = d.boundary_arcs(x, y).unwrap();
        let mut fiction: HashMap<HexCoord, Color> = HashMap::new();
        for e in &right {
            fiction.insert(e.right_hex(), Color::Blue);
        }
        for e in &left {
            fiction.insert(e.left_hex(), Color::Yellow);
        }
        let eff = |h: HexCoord| -> Color {
            if d.contains_hex(h) {
                c.color(h).unwrap()
            } else {
                fiction[&h]
            }
        };
        let mut undirected = HashSet::new();
        for e in &p.edges {
            assert_eq!(eff(e.right_hex()), Color::Blue, "blue on the right");
            assert_eq!(eff(e.left_hex()), Color::Yellow, "yellow on the left");
            assert!(undirected.insert(e.key()), "edge repeated");
        }
        // vertex-simple: on a degree-3 lattice the path can never revisit
        let verts = p.vertices();
        let vert_set: HashSet<HexVertex> = verts.iter().copied().collect();
        assert_eq!(vert_set.len(), verts.len());
        assert_eq!(verts.first(), Some(&x));
        assert_eq!(verts.last(), Some(&y));
        // explored set = interior flanks of the path, exactly
        let mut flanks = HashSet::new();
        for e in &p.edges {
            for h in e.flanks() {
                if d.contains_hex(h) {
                    flanks.insert(h);
                }
            }
        }
        assert_eq!(p.gamma(), flanks);
        for &h in &p.gamma_b {
            assert_eq!(c.color(h), Some(Color::Blue));
        }
        for &h in &p.gamma_y {
            assert_eq!(c.color(h), Some(Color::Yellow));
        }
    }

    #[test]
    fn explore_until_stopping_rules() {
        let d = disk_domain(0.09);
        let (x, y) = south_north(&d);
        let seed = 8;
        let full = explore(&d, x, y, ColorSource::Keyed { seed, stream: 0 }).unwrap();

        // vacuous predicate: runs to the target
        let st = ExplorationState::new(&d, x, y, ColorSource::Keyed { seed, stream: 0 }).unwrap();
        let st = explore_until(st, |_| false).unwrap();
        assert!(st.is_finished());
        assert_eq!(st.path_so_far, full.edges);

        // a half-plane containing the start captures the tip immediately
        let st = ExplorationState::new(&d, x, y, ColorSource::Keyed { seed, stream: 0 }).unwrap();
        let cutoff = x.pos(d.mesh).im + 10.0 * d.mesh;
        let st = explore_until(st, |s| s.tip().pos(d.mesh).im <= cutoff).unwrap();
        assert_eq!(st.path_so_far.len(), 1);

        // first contact with a circular arc, against a replay oracle
        let hits = |v: HexVertex| (v.pos(d.mesh) - Complex64::new(0.2, 0.1)).norm() <= 0.3;
        let st = ExplorationState::new(&d, x, y, ColorSource::Keyed { seed, stream: 0 }).unwrap();
        let st = explore_until(st, |s| hits(s.tip())).unwrap();
        let oracle_len = (1..=full.edges.len())
            .find(|&k| hits(full.edges[k - 1].to))
            .expect("the full path crosses the disk");
        assert_eq!(st.path_so_far.len(), oracle_len);
        assert!(hits(st.tip()));
        for e in &st.path_so_far[..oracle_len - 1] {
            assert!(!hits(e.to), "no earlier prefix touches the stopping set");
        }
    }

    #[test]
    fn excursion_decomposition_reassembles_the_path() {
        let d = disk_domain(0.11);
        let (x, y) = south_north(&d);

        // path on the left boundary: no left excursions, one right excursion
        let blue = constant_coloring(&d, Color::Blue);
        let p = explore(&d, x, y, ColorSource::Eager(&blue)).unwrap();
        assert!(decompose_excursions(&d, &p, Side::Left).unwrap().is_empty());
        let right_exc = decompose_excursions(&d, &p, Side::Right).unwrap();
        assert_eq!(right_exc.len(), 1);
        assert_eq!(right_exc[0].edge_range, 0..p.edges.len());
        assert_eq!(right_exc[0].endpoints, (x, y));

        // random paths: excursions are disjoint, maximal, and interleave with
        // boundary runs to rebuild the full index set
        for seed in 0..5u64 {
            let p = explore(&d, x, y, ColorSource::Keyed { seed, stream: 2 }).unwrap();
            for side in [Side::Left, Side::Right] {
                let exc = decompose_excursions(&d, &p, side).unwrap();
                let (right, left) = d.boundary_arcs(x, y).unwrap();
                let arc: HashSet<(HexVertex, HexVertex)> = match side {
                    Side::Left => left.iter().map(|e| e.key()).collect(),
                    Side::Right => right.iter().map(|e| e.key()).collect(),
                };
                let mut covered = vec![false; p.edges.len()];
                let mut last_end = 0;
                for x in &exc {
                    assert!(x.edge_range.start >= last_end, "ordered and disjoint");
                    for i in x.edge_range.clone() {
                        assert!(!arc.contains(&p.edges[i].key()), "excursion avoids the arc");
                        covered[i] = true;
                    }
                    // maximality: neighbors outside the range are arc edges
                    if x.edge_range.start > 0 {
                        assert!(arc.contains(&p.edges[x.edge_range.start - 1].key()));
                    }
                    if x.edge_range.end < p.edges.len() {
                        assert!(arc.contains(&p.edges[x.edge_range.end].key()));
                    }
                    assert_eq!(x.endpoints.0, p.edges[x.edge_range.start].from);
                    assert_eq!(x.endpoints.1, p.edges[x.edge_range.end - 1].to);
                    last_end = x.edge_range.end;
                }
                for (i, e) in p.edges.iter().enumerate() {
                    assert_eq!(covered[i], !arc.contains(&e.key()), "edge {}", i);
                }
            }
        }
    }

    #[test]
    fn split_all_blue_leaves_one_type_two_piece() {
        let d = disk_domain(0.11);
        let (x, y) = south_north(&d);
        let blue = constant_coloring(&d, Color::Blue);
        let p = explore(&d, x, y, ColorSource::Eager(&blue)).unwrap();
        let pieces = split_domains(&d, &p, Color::Blue, Color::Blue).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].type_tag, 2);
        assert_eq!(pieces[0].bc, PieceBc::Mono(Color::Blue));
        assert!(pieces[0].natural_endpoints.is_none());
        assert_eq!(pieces[0].domain.len() + p.gamma().len(), d.len());
    }

    #[test]
    fn split_partitions_and_classifies() {
        for seed in 0..6u64 {
            let d = disk_domain(0.07);
            let (x, y) = south_north(&d);
            let p = explore(&d, x, y, ColorSource::Keyed { seed, stream: 5 }).unwrap();
            let pieces = split_domains(&d, &p, Color::Blue, Color::Blue).unwrap();

            // exact partition: pieces plus the explored set tile the domain
            let mut seen: HashSet<HexCoord> = p.gamma();
            for piece in &pieces {
                for &h in piece.domain.hexes() {
                    assert!(seen.insert(h), "hex in two pieces or explored");
                }
            }
            assert_eq!(seen.len(), d.len());

            let (right_arc, left_arc) = d.boundary_arcs(x, y).unwrap();
            let left_hexes: HashSet<HexCoord> = left_arc.iter().map(|e| e.left_hex()).collect();
            let right_hexes: HashSet<HexCoord> =
                right_arc.iter().map(|e| e.right_hex()).collect();

            for piece in &pieces {
                // brute-force reclassification from raw adjacency of the
                // piece's hexes (not via the piece's own s-boundary)
                let hexes: HashSet<HexCoord> = piece.domain.hexes().iter().copied().collect();
                let mut gy = false;
                let mut gb = false;
                let mut dl = false;
                let mut dr = false;
                for &h in &hexes {
                    for nb in h.neighbors() {
                        gy |= p.gamma_y.contains(&nb);
                        gb |= p.gamma_b.contains(&nb);
                        dl |= left_hexes.contains(&nb);
                        dr |= right_hexes.contains(&nb);
                    }
                }
                let expected = match (gy, gb, dl, dr) {
                    (true, false, true, _) => 1,
                    (false, true, _, true) => 2,
                    (true, false, false, false) => 3,
                    (false, true, false, false) => 4,
                    f => panic!("unclassifiable flags {:?}", f),
                };
                assert_eq!(piece.type_tag, expected);

                match piece.type_tag {
                    1 => {
                        assert_eq!(piece.bc, PieceBc::PlusMinus);
                        let (xp, yp) = piece.natural_endpoints.expect("two-color endpoints");
                        assert!(piece.domain.is_e_vertex(xp));
                        assert!(piece.domain.is_e_vertex(yp));
                        // the declared endpoints really separate the colors:
                        // blue along the piece's right arc, yellow left
                        let (pr, pl) = piece.domain.boundary_arcs(xp, yp).unwrap();
                        let eff = |h: HexCoord| -> Color {
                            if p.gamma_y.contains(&h) {
                                Color::Yellow
                            } else if p.gamma_b.contains(&h) {
                                Color::Blue
                            } else {
                                assert!(left_hexes.contains(&h) || right_hexes.contains(&h));
                                Color::Blue // parent ground is monochromatic blue
                            }
                        };
                        for e in &pr {
                            assert_eq!(eff(e.right_hex()), Color::Blue);
                        }
                        for e in &pl {
                            assert_eq!(eff(e.left_hex()), Color::Yellow);
                        }
                        let exc = piece.creating_excursion.as_ref().expect("created by an excursion");
                        assert_eq!(exc.side, Side::Left);
                    }
                    2 | 4 => assert_eq!(piece.bc, PieceBc::Mono(Color::Blue)),
                    3 => assert_eq!(piece.bc, PieceBc::Mono(Color::Yellow)),
                    _ => unreachable!(),
                }
            }

            // a path between natural endpoints of a two-colored parent makes
            // only monochromatic daughters
            if let Some(tp) = pieces.iter().find(|q| q.type_tag == 1) {
                if tp.domain.len() >= 3 {
                    let (xp, yp) = tp.natural_endpoints.unwrap();
                    let q = explore(&tp.domain, xp, yp, ColorSource::Keyed { seed, stream: 5 })
                        .unwrap();
                    let sub = split_domains(&tp.domain, &q, Color::Yellow, Color::Blue).unwrap();
                    for piece in &sub {
                        assert!(matches!(piece.bc, PieceBc::Mono(_)));
                    }
                }
            }
        }
    }

    #[test]
    fn daughter_s_boundaries_overlap_in_two_adjacent_sites_or_not_at_all() {
        for seed in 0..6u64 {
            let d = disk_domain(0.08);
            let (x, y) = south_north(&d);
            let p = explore(&d, x, y, ColorSource::Keyed { seed, stream: 9 }).unwrap();
            let pieces = split_domains(&d, &p, Color::Blue, Color::Blue).unwrap();
            let (right_arc, left_arc) = d.boundary_arcs(x, y).unwrap();
            let left_hexes: HashSet<HexCoord> = left_arc.iter().map(|e| e.left_hex()).collect();
            let right_hexes: HashSet<HexCoord> =
                right_arc.iter().map(|e| e.right_hex()).collect();
            for i in 0..pieces.len() {
                for j in i + 1..pieces.len() {
                    let a: HashSet<HexCoord> =
                        pieces[i].domain.s_boundary.iter().copied().collect();
                    let b: HashSet<HexCoord> =
                        pieces[j].domain.s_boundary.iter().copied().collect();
                    let shared: Vec<HexCoord> = a.intersection(&b).copied().collect();
                    if shared.is_empty() {
                        continue;
                    }
                    assert_eq!(shared.len(), 2, "pieces {} and {} share {:?}", i, j, shared);
                    assert!(
                        shared[0].neighbors().contains(&shared[1]),
                        "shared sites are adjacent"
                    );
                    // colors as the exploration saw them: revealed colors
                    // inside, the fictitious arc colors on the ring
                    let color_of = |h: HexCoord| -> Color {
                        if p.gamma_y.contains(&h) {
                            Color::Yellow
                        } else if p.gamma_b.contains(&h) {
                            Color::Blue
                        } else if left_hexes.contains(&h) {
                            Color::Yellow
                        } else {
                            assert!(right_hexes.contains(&h));
                            Color::Blue
                        }
                    };
                    assert_eq!(color_of(shared[0]), color_of(shared[1]), "same color");
                }
            }
        }
    }

    #[test]
    fn filling_is_monotone_and_matches_flood_oracle() {
        let d = disk_domain(0.09);
        let (x, y) = south_north(&d);
        let p = explore(&d, x, y, ColorSource::Keyed { seed: 3, stream: 4 }).unwrap();

        let empty = discrete_filling(&d, x, &p.edges[..0], y).unwrap();
        assert!(empty.hexes.is_empty());
        assert_eq!(empty.tip, x);
        assert_eq!(empty.time_index, 0);

        let full = discrete_filling(&d, x, &p.edges, y).unwrap();
        assert_eq!(full.hexes.len(), d.len(), "terminal filling swallows the domain");

        let mut prev: HashSet<HexCoord> = HashSet::new();
        for k in 0..=p.edges.len() {
            let f = discrete_filling(&d, x, &p.edges[..k], y).unwrap();
            assert!(prev.is_subset(&f.hexes), "filling grows monotonically");
            // oracle: reachability from y's interior hexagon by a fresh scan
            let explored: HashSet<HexCoord> = p.edges[..k]
                .iter()
                .flat_map(|e| e.flanks())
                .filter(|h| d.contains_hex(*h))
                .collect();
            let mut reach: HashSet<HexCoord> = HashSet::new();
            let mut stack: Vec<HexCoord> = y
                .hexes()
                .into_iter()
                .filter(|h| d.contains_hex(*h) && !explored.contains(h))
                .collect();
            while let Some(h) = stack.pop() {
                if !reach.insert(h) {
                    continue;
                }
                for nb in h.neighbors() {
                    if d.contains_hex(nb) && !explored.contains(&nb) && !reach.contains(&nb) {
                        stack.push(nb);
                    }
                }
            }
            for &h in d.hexes() {
                assert_eq!(f.hexes.contains(&h), !reach.contains(&h));
            }
            // the complement is connected
            if !reach.is_empty() {
                let seed_hex = *reach.iter().next().unwrap();
                let mut comp = HashSet::new();
                let mut stack = vec![seed_hex];
                while let Some(h) = stack.pop() {
                    if !comp.insert(h) {
                        continue;
                    }
                    for nb in h.neighbors() {
                        if reach.contains(&nb) && !comp.contains(&nb) {
                            stack.push(nb);
                        }
                    }
                }
                assert_eq!(comp.len(), reach.len());
            }
            prev = f.hexes;
        }
    }

    #[test]
    fn containing_piece_point_location() {
        let d = disk_domain(0.08);
        let (x, y) = south_north(&d);
        let p = explore(&d, x, y, ColorSource::Keyed { seed: 12, stream: 6 }).unwrap();
        let pieces = split_domains(&d, &p, Color::Blue, Color::Blue).unwrap();

        // a point in an explored hexagon errors
        let g = *p.gamma().iter().min().unwrap();
        let zc = g.center(d.mesh);
        assert!(matches!(
            containing_piece(&pieces, &p, zc, d.mesh),
            Err(Error::OnExploredSet)
        ));

        for piece in &pieces {
            let h = piece.domain.hexes()[0];
            let c0 = h.center(d.mesh);
            // two points of one hexagon land in the same piece
            let za = c0 + Complex64::new(0.2 * d.mesh, 0.1 * d.mesh);
            let zb = c0 - Complex64::new(0.1 * d.mesh, 0.2 * d.mesh);
            let pa = containing_piece(&pieces, &p, za, d.mesh).unwrap();
            let pb = containing_piece(&pieces, &p, zb, d.mesh).unwrap();
            assert!(std::ptr::eq(pa, pb));
            // and match a linear-scan oracle over all pieces
            let oracle = pieces
                .iter()
                .find(|q| q.domain.hexes().contains(&HexCoord::from_point(za, d.mesh)))
                .unwrap();
            assert!(std::ptr::eq(pa, oracle));
        }
    }
}
