//! Incremental Bowyer-Watson Delaunay triangulation with exact predicates.

use robust::{incircle, orient2d, Coord};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    /// Counterclockwise vertex ids.
    v: [usize; 3],
    /// `nbr[i]` is the triangle across the edge opposite `v[i]`.
    nbr: [usize; 3],
    alive: bool,
}

fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

struct Triangulation {
    pts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    last: usize,
    /// Per-triangle visit stamp for cavity searches.
    stamp: Vec<u32>,
    epoch: u32,
}

impl Triangulation {
    fn orient(&self, a: usize, b: usize, c: usize) -> f64 {
        orient2d(coord(self.pts[a]), coord(self.pts[b]), coord(self.pts[c]))
    }

    fn in_circumcircle(&self, t: usize, p: usize) -> bool {
        let [a, b, c] = self.tris[t].v;
        incircle(
            coord(self.pts[a]),
            coord(self.pts[b]),
            coord(self.pts[c]),
            coord(self.pts[p]),
        ) > 0.0
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = tri;
            self.stamp[i] = 0;
            i
        } else {
            self.tris.push(tri);
            self.stamp.push(0);
            self.tris.len() - 1
        }
    }

    /// Visibility walk from the last created triangle.
    fn locate(&self, p: usize) -> usize {
        let mut t = self.last;
        let mut steps = 0usize;
        'walk: loop {
            let tri = &self.tris[t];
            for i in 0..3 {
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                if self.orient(a, b, p) < 0.0 && tri.nbr[i] != NONE {
                    t = tri.nbr[i];
                    steps += 1;
                    if steps > self.tris.len() {
                        break 'walk;
                    }
                    continue 'walk;
                }
            }
            return t;
        }
        // Walks can cycle on degenerate input; fall back to a scan.
        self.tris
            .iter()
            .enumerate()
            .find(|(_, tri)| tri.alive && (0..3).all(|i| self.orient(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], p) >= 0.0))
            .map(|(i, _)| i)
            .expect("point outside the super triangle")
    }

    fn insert(&mut self, p: usize) {
        let start = self.locate(p);

        self.epoch += 1;
        let epoch = self.epoch;
        let mut cavity = vec![start];
        self.stamp[start] = epoch;
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for i in 0..3 {
                let n = self.tris[t].nbr[i];
                if n != NONE && self.stamp[n] != epoch && self.in_circumcircle(n, p) {
                    self.stamp[n] = epoch;
                    cavity.push(n);
                }
            }
        }

        // boundary edges (a, b) of the cavity with the outside neighbour
        let mut rim = Vec::with_capacity(cavity.len() + 2);
        for &t in &cavity {
            let tri = self.tris[t];
            for i in 0..3 {
                let n = tri.nbr[i];
                if n == NONE || self.stamp[n] != epoch {
                    rim.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], n));
                }
            }
        }
        for &t in &cavity {
            self.tris[t].alive = false;
        }
        self.free.extend_from_slice(&cavity);

        // (tail vertex b, new triangle) pairs; the rim is a short cycle
        let mut by_tail: Vec<(usize, usize)> = Vec::with_capacity(rim.len());
        for &(a, b, outer) in &rim {
            let t = self.alloc(Tri {
                v: [p, a, b],
                nbr: [outer, NONE, NONE],
                alive: true,
            });
            if outer != NONE {
                let o = &mut self.tris[outer];
                for j in 0..3 {
                    if o.v[(j + 1) % 3] == b && o.v[(j + 2) % 3] == a {
                        o.nbr[j] = t;
                    }
                }
            }
            by_tail.push((b, t));
        }
        for &(_, t) in &by_tail {
            let a = self.tris[t].v[1];
            let prev = by_tail
                .iter()
                .find(|&&(b, _)| b == a)
                .map(|&(_, s)| s)
                .expect("open cavity rim");
            self.tris[t].nbr[2] = prev;
            self.tris[prev].nbr[1] = t;
        }
        self.last = by_tail.last().expect("empty cavity").1;
    }
}

/// Delaunay triangulation of `points`; returns counterclockwise triangles
/// covering their convex hull. Points must be pairwise distinct.
pub fn triangulate(points: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let n = points.len();
    if n < 3 {
        return Vec::new();
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let big = 1.0e3 * span;

    let mut pts = points.to_vec();
    pts.push([mid[0] - big, mid[1] - big]);
    pts.push([mid[0] + big, mid[1] - big]);
    pts.push([mid[0], mid[1] + big]);

    let mut tr = Triangulation {
        pts,
        tris: vec![Tri {
            v: [n, n + 1, n + 2],
            nbr: [NONE; 3],
            alive: true,
        }],
        free: Vec::new(),
        last: 0,
        stamp: vec![0],
        epoch: 0,
    };
    for p in 0..n {
        tr.insert(p);
    }

    tr.tris
        .iter()
        .filter(|t| t.alive && t.v.iter().all(|&v| v < n))
        .map(|t| t.v)
        .filter(|v| tr.orient(v[0], v[1], v[2]) > 0.0)
        .collect()
}
