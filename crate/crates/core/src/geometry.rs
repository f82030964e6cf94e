//! Separating-axis overlap tests for convex polygons and parallelepipeds.

use crate::TriState;

type P2 = [f64; 2];
type P3 = [f64; 3];

fn project2(poly: &[P2], axis: P2) -> (f64, f64) {
    poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let t = p[0] * axis[0] + p[1] * axis[1];
        (lo.min(t), hi.max(t))
    })
}

/// Penetration depth of two convex polygons along their edge normals.
///
/// The result is the smallest overlap of the projections onto any (unit)
/// edge normal; a value `<= 0` means a separating axis exists, so the
/// interiors are disjoint. Vertices may be listed in either orientation.
pub fn convex_overlap_depth(p: &[P2], q: &[P2]) -> f64 {
    let mut depth = f64::INFINITY;
    for poly in [p, q] {
        let n = poly.len();
        for i in 0..n {
            let (u, v) = (poly[i], poly[(i + 1) % n]);
            let e = [v[0] - u[0], v[1] - u[1]];
            let len = e[0].hypot(e[1]);
            if len == 0.0 {
                continue;
            }
            let axis = [-e[1] / len, e[0] / len];
            let (a0, a1) = project2(p, axis);
            let (b0, b1) = project2(q, axis);
            depth = depth.min(a1.min(b1) - a0.max(b0));
        }
    }
    depth
}

/// `true` when the interiors of the two convex polygons meet, i.e. their
/// overlap depth exceeds `eps`. Boundary contact does not count.
pub fn convex_interiors_intersect(p: &[P2], q: &[P2], eps: f64) -> bool {
    convex_overlap_depth(p, q) > eps
}

/// Parallelepiped `{ origin + s e0 + t e1 + u e2 : s, t, u in [0,1] }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parallelepiped {
    pub origin: P3,
    pub edges: [P3; 3],
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

impl Parallelepiped {
    pub fn vertices(&self) -> [P3; 8] {
        let mut out = [[0.0; 3]; 8];
        for (k, v) in out.iter_mut().enumerate() {
            for j in 0..3 {
                let mut c = self.origin[j];
                for (bit, e) in self.edges.iter().enumerate() {
                    if k >> bit & 1 == 1 {
                        c += e[j];
                    }
                }
                v[j] = c;
            }
        }
        out
    }

    fn project(&self, axis: P3) -> (f64, f64) {
        self.vertices()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                let t = dot(v, axis);
                (lo.min(t), hi.max(t))
            })
    }

    /// Barycentric coordinates of `p` with respect to the edge frame, or
    /// `None` for a degenerate frame.
    fn local(&self, p: P3) -> Option<P3> {
        let [e0, e1, e2] = self.edges;
        let det = dot(e0, cross(e1, e2));
        if det.abs() < 1e-300 {
            return None;
        }
        let r = [p[0] - self.origin[0], p[1] - self.origin[1], p[2] - self.origin[2]];
        Some([
            dot(r, cross(e1, e2)) / det,
            dot(e0, cross(r, e2)) / det,
            dot(e0, cross(e1, r)) / det,
        ])
    }

    fn scale(&self) -> f64 {
        self.edges.iter().map(|&e| norm(e)).fold(0.0, f64::max)
    }
}

/// Decides whether the interiors of two parallelepipeds are disjoint using
/// the 15 separating axes (three face normals of each plus the nine edge
/// cross products).
///
/// Axes whose length is negligible relative to the edge lengths are skipped.
/// If a face normal is itself degenerate the test falls back to sampling a
/// 64^3 grid of interior points of `p`; it then returns `Fails` when a
/// sample lies strictly inside `q` and `Unknown` otherwise.
pub fn parallelepipeds_disjoint(p: &Parallelepiped, q: &Parallelepiped, eps: f64) -> TriState {
    let scale = p.scale().max(q.scale());
    if scale == 0.0 {
        return TriState::Holds;
    }
    let tiny = 1e-12 * scale * scale;
    let mut axes: Vec<P3> = Vec::with_capacity(15);
    let mut ill_conditioned = false;
    for s in [p, q] {
        let [e0, e1, e2] = s.edges;
        for n in [cross(e1, e2), cross(e2, e0), cross(e0, e1)] {
            if norm(n) <= tiny {
                ill_conditioned = true;
            } else {
                axes.push(n);
            }
        }
    }
    for &ep in &p.edges {
        for &eq in &q.edges {
            let n = cross(ep, eq);
            if norm(n) > tiny {
                axes.push(n);
            }
        }
    }
    for axis in &axes {
        let l = norm(*axis);
        let unit = [axis[0] / l, axis[1] / l, axis[2] / l];
        let (a0, a1) = p.project(unit);
        let (b0, b1) = q.project(unit);
        if a1.min(b1) - a0.max(b0) <= eps {
            return TriState::Holds;
        }
    }
    if !ill_conditioned {
        return TriState::Fails;
    }
    const GRID: usize = 64;
    for i in 0..GRID {
        for j in 0..GRID {
            for k in 0..GRID {
                let c = [
                    (i as f64 + 0.5) / GRID as f64,
                    (j as f64 + 0.5) / GRID as f64,
                    (k as f64 + 0.5) / GRID as f64,
                ];
                let mut x = p.origin;
                for (t, e) in c.iter().zip(&p.edges) {
                    for m in 0..3 {
                        x[m] += t * e[m];
                    }
                }
                if let Some(l) = q.local(x) {
                    if l.iter().all(|&v| v > eps && v < 1.0 - eps) {
                        return TriState::Fails;
                    }
                }
            }
        }
    }
    TriState::Unknown
}
