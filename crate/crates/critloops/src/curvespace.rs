//! Metric spaces for curves and closed sets: the uniform distance between
//! curves modulo monotone reparametrization (realized as a discrete
//! Fréchet distance on canonicalized polylines), the induced Hausdorff
//! distance on finite curve collections, the geodesic metric of the
//! conformally compactified plane (density (1+|z|²)⁻¹, so the plane plus a
//! point at infinity becomes a sphere of diameter π/2·2), and the plain
//! Hausdorff distance between point sets.

use num_complex::Complex64;

use crate::{Error, Result};

/// A curve, stored as an ordered polyline sample. Curves are equal when
/// one is a monotone reparametrization of the other; computationally this
/// shows up as `uniform_dist == 0` after collinear-vertex canonicalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub vertices: Vec<Complex64>,
    pub closed: bool,
}

impl Curve {
    pub fn open(vertices: Vec<Complex64>) -> Self {
        assert!(!vertices.is_empty(), "curve needs at least one vertex");
        Curve { vertices, closed: false }
    }

    pub fn closed(vertices: Vec<Complex64>) -> Self {
        assert!(!vertices.is_empty(), "curve needs at least one vertex");
        Curve { vertices, closed: true }
    }

    fn scale(&self) -> f64 {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Complex64::new(lo.re.min(v.re), lo.im.min(v.im));
            hi = Complex64::new(hi.re.max(v.re), hi.im.max(v.im));
        }
        (hi - lo).norm()
    }

    /// Minimal vertex representation: interior vertices lying on the
    /// segment between their neighbors (up to a scale-relative tolerance)
    /// are dropped, so any two vertex re-samplings of one polyline
    /// canonicalize to identical vertex lists.
    pub fn simplified(&self) -> Curve {
        let tol = 1e-12 * self.scale();
        if self.vertices.len() <= 2 {
            let mut vs = self.vertices.clone();
            vs.dedup_by(|a, b| (*a - *b).norm() <= tol);
            return Curve { vertices: vs, closed: self.closed };
        }
        if !self.closed {
            let mut out = vec![self.vertices[0]];
            for i in 1..self.vertices.len() {
                let c = self.vertices[i];
                // drop a kept vertex while it sits on the chord to c
                while out.len() >= 2 {
                    let b = out[out.len() - 1];
                    let a = out[out.len() - 2];
                    if point_seg_dist(b, a, c) <= tol {
                        out.pop();
                    } else {
                        break;
                    }
                }
                if (c - *out.last().unwrap()).norm() > tol || i == self.vertices.len() - 1 {
                    out.push(c);
                }
            }
            if out.len() >= 2 {
                let n = out.len();
                if (out[n - 1] - out[n - 2]).norm() <= tol {
                    out.remove(n - 2);
                }
            }
            Curve { vertices: out, closed: false }
        } else {
            // rotate so the lexicographically extreme vertex (always a
            // genuine corner of the trace) starts the cycle
            let start = self
                .vertices
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| {
                    (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let n = self.vertices.len();
            let rotated: Vec<Complex64> =
                (0..n).map(|k| self.vertices[(start + k) % n]).collect();
            let open = Curve { vertices: rotated, closed: false }.simplified();
            let mut vs = open.vertices;
            // closing edge: the last vertex may be collinear across the wrap
            while vs.len() >= 3 {
                let m = vs.len();
                if point_seg_dist(vs[m - 1], vs[m - 2], vs[0]) <= tol
                    || (vs[m - 1] - vs[0]).norm() <= tol
                {
                    vs.pop();
                } else {
                    break;
                }
            }
            Curve { vertices: vs, closed: true }
        }
    }
}

fn point_seg_dist(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let v = b - a;
    let len2 = v.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a).re * v.re + (p - a).im * v.im) / len2).clamp(0.0, 1.0);
    (p - (a + v * t)).norm()
}

/// A finite collection of curves, carrying the Hausdorff construction
/// induced by the uniform curve distance.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub curves: Vec<Curve>,
}

/// Uniform distance between curves modulo monotone reparametrization:
/// the discrete Fréchet distance of the canonicalized polylines. For a
/// pair of closed curves the distance is minimized over cyclic base-point
/// shifts (at vertex granularity); orientation is never reversed.
pub fn uniform_dist(g1: &Curve, g2: &Curve) -> f64 {
    uniform_dist_with(g1, g2, |a, b| (a - b).norm())
}

/// Uniform distance with the compactified-plane metric as ground metric.
/// Never exceeds `uniform_dist` (the metric density is at most 1).
pub fn uniform_dist_sphere(g1: &Curve, g2: &Curve) -> f64 {
    uniform_dist_with(g1, g2, sphere_dist)
}

fn uniform_dist_with(
    g1: &Curve,
    g2: &Curve,
    ground: impl Fn(Complex64, Complex64) -> f64 + Copy,
) -> f64 {
    let a = g1.simplified();
    let b = g2.simplified();
    if a.closed && b.closed && b.vertices.len() > 1 {
        let m = b.vertices.len();
        let mut best = f64::INFINITY;
        let av = close_up(&a.vertices);
        for s in 0..m {
            let bv: Vec<Complex64> = (0..m).map(|k| b.vertices[(s + k) % m]).collect();
            let bv = close_up(&bv);
            best = best.min(frechet(&av, &bv, ground));
            if best == 0.0 {
                break;
            }
        }
        best
    } else if a.closed && b.closed {
        let av = close_up(&a.vertices);
        frechet(&av, &b.vertices, ground)
    } else {
        frechet(&a.vertices, &b.vertices, ground)
    }
}

fn close_up(v: &[Complex64]) -> Vec<Complex64> {
    let mut out = v.to_vec();
    if out.len() > 1 {
        out.push(out[0]);
    }
    out
}

fn frechet(
    p: &[Complex64],
    q: &[Complex64],
    ground: impl Fn(Complex64, Complex64) -> f64,
) -> f64 {
    let m = q.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, &pi) in p.iter().enumerate() {
        for j in 0..m {
            let c = ground(pi, q[j]);
            let reach = if i == 0 && j == 0 {
                0.0
            } else if i == 0 {
                cur[j - 1]
            } else if j == 0 {
                prev[j]
            } else {
                prev[j].min(prev[j - 1]).min(cur[j - 1])
            };
            cur[j] = reach.max(c);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Hausdorff distance between two finite curve collections under the
/// uniform curve distance: the smallest ε such that every curve of one
/// collection is within ε of some curve of the other, both ways.
pub fn hausdorff_curvesets(f1: &CurveSet, f2: &CurveSet) -> Result<f64> {
    if f1.curves.is_empty() || f2.curves.is_empty() {
        return Err(Error::EmptySet);
    }
    let one_sided = |a: &CurveSet, b: &CurveSet| -> f64 {
        a.curves
            .iter()
            .map(|g| {
                b.curves
                    .iter()
                    .map(|h| uniform_dist(g, h))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(one_sided(f1, f2).max(one_sided(f2, f1)))
}

/// Geodesic distance on the conformally compactified plane, metric
/// density (1+|z|²)⁻¹: under stereographic projection to a sphere of
/// radius 1/2 this is the great-circle distance, with closed form
/// arcsin of the chord. Points with non-finite coordinates denote ∞.
/// The distance is symmetric and bounded by π/2.
pub fn sphere_dist(u: Complex64, v: Complex64) -> f64 {
    // position vectors from the sphere center (0, 0, 1/2); the angle
    // between them via atan2 stays accurate even near antipodal pairs,
    // where the equivalent arcsin-of-chord form loses digits
    let pu = stereo(u);
    let pv = stereo(v);
    let a = (pu.0, pu.1, pu.2 - 0.5);
    let b = (pv.0, pv.1, pv.2 - 0.5);
    let cross = (
        a.1 * b.2 - a.2 * b.1,
        a.2 * b.0 - a.0 * b.2,
        a.0 * b.1 - a.1 * b.0,
    );
    let cross_norm = (cross.0 * cross.0 + cross.1 * cross.1 + cross.2 * cross.2).sqrt();
    let dot = a.0 * b.0 + a.1 * b.1 + a.2 * b.2;
    0.5 * cross_norm.atan2(dot)
}

fn stereo(z: Complex64) -> (f64, f64, f64) {
    if !z.re.is_finite() || !z.im.is_finite() {
        return (0.0, 0.0, 1.0);
    }
    let n2 = z.norm_sqr();
    if !n2.is_finite() {
        return (0.0, 0.0, 1.0);
    }
    let d = 1.0 + n2;
    (z.re / d, z.im / d, n2 / d)
}

/// Hausdorff distance between nonempty finite point sets under the
/// compactified-plane metric.
pub fn hausdorff_sets(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    hausdorff_sets_with(a, b, sphere_dist)
}

/// Hausdorff distance between nonempty finite point sets under the
/// Euclidean metric.
pub fn hausdorff_sets_euclid(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    hausdorff_sets_with(a, b, |u, v| (u - v).norm())
}

fn hausdorff_sets_with(
    a: &[Complex64],
    b: &[Complex64],
    ground: impl Fn(Complex64, Complex64) -> f64 + Copy,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let one = |x: &[Complex64], y: &[Complex64]| -> f64 {
        x.iter()
            .map(|&p| y.iter().map(|&q| ground(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one(a, b).max(one(b, a)))
}
