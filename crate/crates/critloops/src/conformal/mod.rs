//! Conformal maps of Jordan polyline domains onto the unit disk, with the
//! supporting constructions used by crossing-probability evaluation:
//! normalized Riemann maps with certified round-trip residuals, Möbius frame
//! changes, semi-ball pullbacks, inner/outer Jordan approximants, and a
//! Carathéodory-style convergence report for map sequences.

mod mobius;
#[cfg(test)]
mod sc;
mod zipper;

pub use mobius::{halfplane_disk, MobiusTransform};
#[cfg(test)]
pub(crate) use sc::integrate;
#[cfg(test)]
pub(crate) use sc::square_map;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curvespace::{hausdorff_sets_euclid, Curve};
use crate::hexlattice::DomainSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Engine {
    /// Exact map for circular boundaries: u = (z − c)/r.
    Circle { center: Complex64, radius: f64 },
    /// General Jordan polyline: half-plane picture recentered by the real
    /// affine map w ↦ (w − shift)/scale before the Cayley transform, so the
    /// normalization center sits at the disk origin and the far field of the
    /// half-plane picture keeps its precision.
    Unzip {
        zip: zipper::Zipper,
        shift: f64,
        scale: f64,
    },
}

impl Engine {
    fn forward(&self, z: Complex64) -> Complex64 {
        match self {
            Engine::Circle { center, radius } => (z - center) / radius,
            Engine::Unzip { zip, shift, scale } => {
                let t = (zip.fwd(z) - shift) / scale;
                (t - Complex64::i()) / (t + Complex64::i())
            }
        }
    }

    fn backward(&self, u: Complex64) -> Complex64 {
        match self {
            Engine::Circle { center, radius } => center + radius * u,
            Engine::Unzip { zip, shift, scale } => {
                let t = Complex64::i() * (Complex64::new(1.0, 0.0) + u)
                    / (Complex64::new(1.0, 0.0) - u);
                zip.inv(scale * t + shift)
            }
        }
    }
}

/// Boundary correspondence sample: the boundary point at arclength
/// `arclength` (measured along the polyline from its first vertex) maps to
/// `angle` on the unit circle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TracePoint {
    pub arclength: f64,
    pub angle: f64,
}

/// Conformal map from the interior of a Jordan polyline domain onto the unit
/// disk, normalized so that `center` maps to 0 with positive derivative.
///
/// `tolerance` is the measured round-trip residual sup |inverse(forward(z)) −
/// z|, relative to the domain diameter, over interior samples kept a few
/// boundary-sample spacings away from the boundary: it certifies that the two
/// evaluators realize the same conformal map on that region. Fidelity of the
/// map to the polyline itself is controlled by the boundary sampling density
/// of the construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformalMap {
    pub domain: DomainSpec,
    pub center: Complex64,
    engine: Engine,
    u0: Complex64,
    rotation: f64,
    pub tolerance: f64,
    pub boundary_trace: Vec<TracePoint>,
}

/// Construction parameters for `riemann_map_with`.
#[derive(Debug, Clone, Copy)]
pub struct MapOptions {
    /// Target number of boundary samples after refinement.
    pub boundary_samples: usize,
    /// Maximum admissible round-trip residual (relative to the diameter).
    pub tolerance: f64,
    /// Trusted accuracy of the boundary correspondence, as a fraction of the
    /// boundary arclength; sets the slack in the monotonicity validation.
    pub boundary_tolerance: f64,
    /// Inward offset used when evaluating boundary correspondence,
    /// relative to the diameter.
    pub trace_offset: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            boundary_samples: 2048,
            tolerance: 1e-8,
            boundary_tolerance: 1e-4,
            trace_offset: 1e-6,
        }
    }
}

impl ConformalMap {
    /// Domain → disk.
    pub fn forward(&self, z: Complex64) -> Result<Complex64> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidParameter("map argument must be finite".into()));
        }
        let u = self.normalize(self.engine.forward(z));
        if !u.re.is_finite() || !u.im.is_finite() {
            return Err(Error::NonConvergence(
                "forward evaluation did not produce a finite value".into(),
            ));
        }
        Ok(u)
    }

    /// Disk → domain.
    pub fn inverse(&self, w: Complex64) -> Result<Complex64> {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::InvalidParameter("map argument must be finite".into()));
        }
        let u = Complex64::from_polar(1.0, -self.rotation) * w;
        let v = (u + self.u0) / (Complex64::new(1.0, 0.0) + self.u0.conj() * u);
        let z = self.engine.backward(v);
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonConvergence(
                "inverse evaluation did not produce a finite value".into(),
            ));
        }
        Ok(z)
    }

    fn normalize(&self, u: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.rotation) * (u - self.u0)
            / (Complex64::new(1.0, 0.0) - self.u0.conj() * u)
    }

    /// Unit-circle angle of the prime end at the boundary point nearest to
    /// `p`, computed by evaluating the map just inside the boundary.
    pub fn boundary_angle(&self, p: Complex64) -> Result<f64> {
        let spec = &self.domain;
        let s = spec.arclength_of(p);
        let diam = spec_diameter(spec);
        if spec.boundary_distance(p) > 1e-3 * diam {
            return Err(Error::GeometryInvalid(
                "point is not on the domain boundary".into(),
            ));
        }
        let h = 1e-6 * diam;
        let tangent = (spec.point_at(s + h) - spec.point_at(s - h)) / (2.0 * h);
        let t = tangent.norm();
        if t == 0.0 {
            return Err(Error::GeometryInvalid(
                "boundary tangent degenerates at the requested point".into(),
            ));
        }
        let inward = Complex64::i() * tangent / t;
        self.probe_angle(spec.point_at(s), inward, 1e-7 * diam, 2e-2 * diam)
    }

    /// Image angle of a probe placed just inside the boundary, deepening
    /// the probe until the image separates from the unit circle: a probe
    /// that falls outside the resolved curve (shallower than the boundary
    /// discretization allows) collapses onto the circle and carries no
    /// angle information.
    fn probe_angle(
        &self,
        base: Complex64,
        inward: Complex64,
        start_depth: f64,
        max_depth: f64,
    ) -> Result<f64> {
        let mut depth = start_depth;
        while depth <= max_depth {
            if let Ok(u) = self.forward(base + depth * inward) {
                if u.norm() < 0.5 {
                    return Err(Error::GeometryInvalid(
                        "nudged boundary point mapped deep inside the disk".into(),
                    ));
                }
                if 1.0 - u.norm() >= 1e-11 {
                    return Ok(u.arg());
                }
            }
            depth *= 4.0;
        }
        Err(Error::NonConvergence(
            "boundary probe never separated from the unit circle".into(),
        ))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Interior-pointing unit direction at `base` on a counterclockwise
/// boundary with neighbors `prev` and `next`: the inward rotation of the
/// angle-bisecting tangent. Built from unit vectors toward the neighbors,
/// so uneven sample spacing around a corner cannot tilt the direction out
/// of the interior wedge. `None` when the corner degenerates to a cusp.
fn inward_direction(prev: Complex64, base: Complex64, next: Complex64) -> Option<Complex64> {
    let ep = prev - base;
    let en = next - base;
    let (dp, dn) = (ep.norm(), en.norm());
    if dp == 0.0 || dn == 0.0 {
        return None;
    }
    let t = en / dn - ep / dp;
    let tn = t.norm();
    if tn < 1e-9 {
        return None;
    }
    Some(Complex64::i() * t / tn)
}

/// Normalized Riemann map with default construction parameters.
pub fn riemann_map(spec: &DomainSpec, center: Complex64) -> Result<ConformalMap> {
    riemann_map_with(spec, center, &MapOptions::default())
}

/// Normalized Riemann map with explicit construction parameters. Errors with
/// `NonConvergence` when the construction cannot certify its round-trip
/// residual or the boundary correspondence fails to be monotone.
pub fn riemann_map_with(
    spec: &DomainSpec,
    center: Complex64,
    opts: &MapOptions,
) -> Result<ConformalMap> {
    let diam = spec_diameter(spec);
    if !spec.contains(center, 1e-9 * diam) {
        return Err(Error::InvalidParameter(
            "map center must lie strictly inside the domain".into(),
        ));
    }
    let engine = match detect_circle(spec) {
        Some((c, r)) => Engine::Circle { center: c, radius: r },
        None => {
            let pts = refine_boundary(spec, opts.boundary_samples);
            let zip = zipper::Zipper::build(&pts, center)?;
            let wc = zip.fwd(center);
            if !wc.is_finite() || wc.im <= 0.0 {
                return Err(Error::NonConvergence(
                    "center did not map into the half-plane".into(),
                ));
            }
            Engine::Unzip {
                zip,
                shift: wc.re,
                scale: wc.im,
            }
        }
    };
    let u0 = engine.forward(center);
    if u0.norm().is_nan() || u0.norm() >= 1.0 {
        return Err(Error::NonConvergence(
            "center did not map inside the unit disk".into(),
        ));
    }

    // Rotation: estimate the derivative of the unrotated normalized map at
    // the center from two central differences.
    let h = 1e-5 * diam;
    let plain = |z: Complex64| -> Complex64 {
        let u = engine.forward(z);
        (u - u0) / (Complex64::new(1.0, 0.0) - u0.conj() * u)
    };
    let d1 = (plain(center + h) - plain(center - h)) / (2.0 * h);
    let ih = Complex64::new(0.0, h);
    let d2 = (plain(center + ih) - plain(center - ih)) / (2.0 * ih);
    let deriv = 0.5 * (d1 + d2);
    if deriv.norm() == 0.0 || !deriv.re.is_finite() || !deriv.im.is_finite() {
        return Err(Error::NonConvergence(
            "derivative at the center could not be estimated".into(),
        ));
    }
    let rotation = -deriv.arg();

    let mut map = ConformalMap {
        domain: spec.clone(),
        center,
        engine,
        u0,
        rotation,
        tolerance: f64::NAN,
        boundary_trace: Vec::new(),
    };

    // Boundary correspondence, evaluated just inside the boundary.
    let trace_pts = refine_boundary(spec, opts.boundary_samples.min(1024));
    let n = trace_pts.len();
    let mut trace = Vec::with_capacity(n);
    let mut arclength = 0.0;
    for k in 0..n {
        let prev = trace_pts[(k + n - 1) % n];
        let next = trace_pts[(k + 1) % n];
        if k > 0 {
            arclength += (trace_pts[k] - prev).norm();
        }
        let Some(inward) = inward_direction(prev, trace_pts[k], next) else {
            continue;
        };
        let angle = map.probe_angle(
            trace_pts[k],
            inward,
            opts.trace_offset * diam,
            2e-2 * diam,
        )?;
        trace.push(TracePoint { arclength, angle });
    }
    let slack = 2.0 * std::f64::consts::PI * opts.boundary_tolerance;
    let mut winding = 0.0;
    for k in 0..trace.len() {
        let a = trace[k].angle;
        let b = trace[(k + 1) % trace.len()].angle;
        let mut d = b - a;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        if d < -slack {
            return Err(Error::NonConvergence(
                "boundary correspondence is not monotone".into(),
            ));
        }
        winding += d;
    }
    if (winding - 2.0 * std::f64::consts::PI).abs() > 1e-3 {
        return Err(Error::NonConvergence(
            "boundary correspondence does not wind once around the circle".into(),
        ));
    }
    map.boundary_trace = trace;

    // Certify the round-trip residual on interior samples: a ring around the
    // center plus points at two depths inside the boundary. The constructed
    // boundary tracks the polyline at the scale of its sample spacing, so the
    // probe depths stay a few spacings inside.
    let resolution = match &map.engine {
        Engine::Circle { .. } => 0.0,
        Engine::Unzip { .. } => spec.perimeter() / opts.boundary_samples.max(4) as f64,
    };
    let depth_near = (2.0 * resolution).max(5e-3 * diam);
    let depth_far = (4.0 * resolution).max(2e-2 * diam);
    let mut residual = map.forward(center)?.norm();
    let ring = 0.5 * spec.boundary_distance(center);
    for k in 0..16 {
        let z = center + Complex64::from_polar(ring, 0.4 + k as f64 * 0.39);
        residual = residual.max(roundtrip(&map, z)?);
    }
    for depth in [depth_near, depth_far] {
        for k in (0..trace_pts.len()).step_by((trace_pts.len() / 64).max(1)) {
            let prev = trace_pts[(k + trace_pts.len() - 1) % trace_pts.len()];
            let next = trace_pts[(k + 1) % trace_pts.len()];
            let tangent = next - prev;
            if tangent.norm() == 0.0 {
                continue;
            }
            let z = trace_pts[k] + depth * (Complex64::i() * tangent / tangent.norm());
            if !spec.contains(z, 0.0) {
                continue;
            }
            residual = residual.max(roundtrip(&map, z)?);
        }
    }
    map.tolerance = residual / diam;
    if map.tolerance > opts.tolerance {
        return Err(Error::NonConvergence(format!(
            "round-trip residual {:.3e} exceeds the requested tolerance {:.3e}",
            map.tolerance, opts.tolerance
        )));
    }
    Ok(map)
}

fn roundtrip(map: &ConformalMap, z: Complex64) -> Result<f64> {
    Ok((map.inverse(map.forward(z)?)? - z).norm())
}

/// Report sup-norm deviations of each map in a sequence from a limit map
/// over a compact evaluation grid (all grid points must be interior to every
/// domain involved).
pub fn kernel_convergence_check(
    maps: &[ConformalMap],
    limit: &ConformalMap,
    grid: &[Complex64],
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::EmptySet);
    }
    maps.iter()
        .map(|m| {
            let mut worst = 0.0f64;
            for &z in grid {
                worst = worst.max((m.forward(z)? - limit.forward(z)?).norm());
            }
            Ok(worst)
        })
        .collect()
}

/// Polyline image of the half-plane semicircle {|w| = eps, Im w ≥ 0} under an
/// inverse evaluator ℍ → domain; the first and last vertices are images of
/// ±eps and land on the domain boundary.
pub fn semi_ball_pullback<F>(inverse_from_halfplane: F, eps: f64, samples: usize) -> Result<Curve>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if eps.is_nan() || eps <= 0.0 || samples < 2 {
        return Err(Error::InvalidParameter(
            "pullback needs eps > 0 and at least two samples".into(),
        ));
    }
    let mut pts = Vec::with_capacity(samples);
    for j in 0..samples {
        let th = std::f64::consts::PI * j as f64 / (samples - 1) as f64;
        let w = eps * Complex64::from_polar(1.0, th);
        let z = inverse_from_halfplane(w)?;
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::ToleranceExceeded(
                "pullback sample did not evaluate to a finite point".into(),
            ));
        }
        pts.push(z);
    }
    Ok(Curve::open(pts))
}

/// Jordan approximants of a domain from inside and outside: the inner
/// boundary is the image of a slightly shrunk circle under the Riemann map,
/// the outer one an outward normal offset of the boundary polyline. Both
/// boundaries stay within Hausdorff distance `eps` of the original and each
/// marked point is carried to a boundary point within `eps`.
pub fn inner_outer_approx(
    spec: &DomainSpec,
    marked: &[Complex64],
    eps: f64,
) -> Result<(DomainSpec, DomainSpec)> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let diam = spec_diameter(spec);
    let dense = refine_boundary(spec, 1024.max((8.0 * spec.perimeter() / eps) as usize).min(8192));

    // Inner approximant.
    let center = interior_point(spec)?;
    let map = riemann_map(spec, center)?;
    let m = 1024usize;
    let mut shrink = (eps / diam).min(0.3);
    let mut inner_pts = Vec::new();
    let mut ok = false;
    for _ in 0..30 {
        inner_pts.clear();
        for j in 0..m {
            let w = Complex64::from_polar(1.0 - shrink, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
            inner_pts.push(map.inverse(w)?);
        }
        if hausdorff_sets_euclid(&inner_pts, &dense)? <= eps {
            ok = true;
            break;
        }
        shrink *= 0.5;
    }
    if !ok {
        return Err(Error::NonConvergence(
            "inner approximant did not reach the requested distance".into(),
        ));
    }
    let inner_marked: Vec<[f64; 2]> = marked
        .iter()
        .map(|&p| nearest_point(&inner_pts, p))
        .map(|q| [q.re, q.im])
        .collect();
    let tilde = DomainSpec::new(
        inner_pts.iter().map(|p| [p.re, p.im]).collect(),
        inner_marked,
    )?;

    // Outer approximant.
    let base = refine_boundary(spec, 512.max((6.0 * spec.perimeter() / eps) as usize).min(4096));
    let mut eta = 0.5 * eps;
    let mut outer_spec = None;
    for _ in 0..30 {
        if let Some(outer_pts) = offset_polyline(&base, eta) {
            if polyline_is_simple(&outer_pts)
                && hausdorff_sets_euclid(&outer_pts, &dense)? <= eps
            {
                let outer_marked: Vec<[f64; 2]> = marked
                    .iter()
                    .map(|&p| nearest_point(&outer_pts, p))
                    .map(|q| [q.re, q.im])
                    .collect();
                let cand = DomainSpec::new(
                    outer_pts.iter().map(|p| [p.re, p.im]).collect(),
                    outer_marked,
                )?;
                if dense.iter().all(|&p| cand.contains(p, 0.0)) {
                    outer_spec = Some(cand);
                    break;
                }
            }
        }
        eta *= 0.5;
    }
    let hat = outer_spec.ok_or_else(|| {
        Error::NonConvergence("outer approximant did not reach the requested distance".into())
    })?;
    Ok((tilde, hat))
}

/// A strictly interior point of the domain, chosen to sit far from the
/// boundary (used as default normalization center).
pub(crate) fn interior_point(spec: &DomainSpec) -> Result<Complex64> {
    let (x0, y0, x1, y1) = spec.bbox();
    let mut best: Option<(f64, Complex64)> = None;
    let mut consider = |p: Complex64| {
        if spec.contains(p, 0.0) {
            let d = spec.boundary_distance(p);
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, p));
            }
        }
    };
    consider(polygon_centroid(spec));
    let steps = 24;
    for i in 1..steps {
        for j in 1..steps {
            consider(Complex64::new(
                x0 + (x1 - x0) * i as f64 / steps as f64,
                y0 + (y1 - y0) * j as f64 / steps as f64,
            ));
        }
    }
    match best {
        Some((d, p)) if d > 1e-6 * spec_diameter(spec) => Ok(p),
        _ => Err(Error::GeometryInvalid(
            "could not locate a strictly interior point".into(),
        )),
    }
}

pub(crate) fn spec_diameter(spec: &DomainSpec) -> f64 {
    let (x0, y0, x1, y1) = spec.bbox();
    ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
}

fn polygon_centroid(spec: &DomainSpec) -> Complex64 {
    let b = &spec.boundary;
    let n = b.len();
    let mut area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = b[i];
        let q = b[(i + 1) % n];
        let w = p[0] * q[1] - q[0] * p[1];
        area += w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    if area.abs() < 1e-300 {
        let (x0, y0, x1, y1) = spec.bbox();
        return Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    }
    Complex64::new(cx / (3.0 * area), cy / (3.0 * area))
}

/// Counterclockwise boundary samples with edges subdivided so that no
/// segment is longer than perimeter / target. Original vertices are kept.
pub(crate) fn refine_boundary(spec: &DomainSpec, target: usize) -> Vec<Complex64> {
    let mut verts: Vec<Complex64> = spec
        .boundary
        .iter()
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    if signed_area_c(&verts) < 0.0 {
        verts.reverse();
    }
    let perimeter: f64 = (0..verts.len())
        .map(|i| (verts[(i + 1) % verts.len()] - verts[i]).norm())
        .sum();
    let h = perimeter / target.max(4) as f64;
    let mut out = Vec::with_capacity(target + verts.len());
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let pieces = (len / h).ceil().max(1.0) as usize;
        for j in 0..pieces {
            let p = a + (b - a) * (j as f64 / pieces as f64);
            if out
                .last()
                .is_none_or(|&q: &Complex64| (p - q).norm() > 1e-15)
            {
                out.push(p);
            }
        }
    }
    out
}

fn signed_area_c(pts: &[Complex64]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        a += p.re * q.im - q.re * p.im;
    }
    0.5 * a
}

fn detect_circle(spec: &DomainSpec) -> Option<(Complex64, f64)> {
    let b = &spec.boundary;
    if b.len() < 8 {
        return None;
    }
    let c = b
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, p| acc + Complex64::new(p[0], p[1]))
        / b.len() as f64;
    let radii: Vec<f64> = b
        .iter()
        .map(|p| (Complex64::new(p[0], p[1]) - c).norm())
        .collect();
    let r = radii.iter().sum::<f64>() / radii.len() as f64;
    if r == 0.0 {
        return None;
    }
    if radii.iter().all(|&x| (x - r).abs() <= 1e-9 * r) {
        Some((c, r))
    } else {
        None
    }
}

fn nearest_point(pts: &[Complex64], p: Complex64) -> Complex64 {
    *pts.iter()
        .min_by(|a, b| {
            (*a - p)
                .norm()
                .partial_cmp(&(*b - p).norm())
                .expect("finite distances")
        })
        .expect("nonempty polyline")
}

/// Outward normal offset of a counterclockwise polyline; None when a vertex
/// normal degenerates.
fn offset_polyline(pts: &[Complex64], eta: f64) -> Option<Vec<Complex64>> {
    let n = pts.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let prev = pts[(k + n - 1) % n];
        let next = pts[(k + 1) % n];
        let t1 = pts[k] - prev;
        let t2 = next - pts[k];
        let n1 = t1.norm();
        let n2 = t2.norm();
        if n1 == 0.0 || n2 == 0.0 {
            return None;
        }
        let sum = t1 / n1 + t2 / n2;
        let s = sum.norm();
        if s < 1e-9 {
            return None;
        }
        // interior is left of a ccw tangent, so outward is the tangent
        // rotated by −90°
        let outward = -Complex64::i() * sum / s;
        out.push(pts[k] + eta * outward);
    }
    Some(out)
}

fn polyline_is_simple(pts: &[Complex64]) -> bool {
    let n = pts.len();
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    let orient = |a: Complex64, b: Complex64, c: Complex64| -> f64 {
        (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
    };
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue; // adjacent through the wraparound
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            let o1 = orient(a, b, c);
            let o2 = orient(a, b, d);
            let o3 = orient(c, d, a);
            let o4 = orient(c, d, b);
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                return false;
            }
        }
    }
    true
}
