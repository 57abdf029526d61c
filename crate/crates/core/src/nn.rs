//! Exact nearest-neighbour queries over a static point set, bucketed on a
//! uniform grid. Tolerates heavy duplication (every spoke starts at the
//! origin), which tree buckets handle poorly.

use crate::vec3::{sub, Vec3};

pub(crate) struct PointGrid {
    lo: Vec3,
    cell: f64,
    dims: [usize; 3],
    starts: Vec<u32>,
    order: Vec<u32>,
    pts: Vec<Vec3>,
}

impl PointGrid {
    /// Grid over `pts` whose box also contains `[box_lo, box_hi]`.
    pub(crate) fn new(pts: Vec<Vec3>, box_lo: Vec3, box_hi: Vec3, per_cell: f64) -> Self {
        assert!(!pts.is_empty());
        let mut lo = box_lo;
        let mut hi = box_hi;
        for p in &pts {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let span = sub(hi, lo).map(|s| s.max(1e-12));
        let volume = span[0] * span[1] * span[2];
        let mut cell = (volume * per_cell / pts.len() as f64).cbrt();
        // keep the table bounded when the box is very flat
        let max_cells = 8.0 * pts.len() as f64 + 64.0;
        loop {
            let n: f64 = span.iter().map(|s| (s / cell).ceil().max(1.0)).product();
            if n <= max_cells {
                break;
            }
            cell *= 1.25;
        }
        let dims = span.map(|s| ((s / cell).ceil() as usize).max(1));
        let ncell = dims[0] * dims[1] * dims[2];
        let mut counts = vec![0u32; ncell + 1];
        let cells: Vec<usize> = pts
            .iter()
            .map(|&p| {
                let c = Self::cell_of(lo, cell, dims, p);
                dims[1] * dims[2] * c[0] + dims[2] * c[1] + c[2]
            })
            .collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 0..ncell {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut order = vec![0u32; pts.len()];
        for (i, &c) in cells.iter().enumerate() {
            order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            lo,
            cell,
            dims,
            starts: counts,
            order,
            pts,
        }
    }

    fn cell_of(lo: Vec3, cell: f64, dims: [usize; 3], p: Vec3) -> [usize; 3] {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let v = ((p[a] - lo[a]) / cell).floor();
            c[a] = (v.max(0.0) as usize).min(dims[a] - 1);
        }
        c
    }

    pub(crate) fn len(&self) -> usize {
        self.pts.len()
    }

    /// Index of the point closest to `q`; ties go to the lowest index.
    pub(crate) fn nearest(&self, q: Vec3) -> usize {
        let c = Self::cell_of(self.lo, self.cell, self.dims, q);
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        let max_ring = *self.dims.iter().max().unwrap();
        for r in 0..=max_ring {
            let (r_lo, r_hi) = (
                c.map(|v| v.saturating_sub(r)),
                [0, 1, 2].map(|a| (c[a] + r).min(self.dims[a] - 1)),
            );
            for i in r_lo[0]..=r_hi[0] {
                for j in r_lo[1]..=r_hi[1] {
                    for k in r_lo[2]..=r_hi[2] {
                        let on_shell = i.abs_diff(c[0]) == r || j.abs_diff(c[1]) == r || k.abs_diff(c[2]) == r;
                        if !on_shell {
                            continue;
                        }
                        let cid = self.dims[1] * self.dims[2] * i + self.dims[2] * j + k;
                        for &pi in &self.order[self.starts[cid] as usize..self.starts[cid + 1] as usize] {
                            let p = self.pts[pi as usize];
                            let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
                            let pi = pi as usize;
                            if d < best_d || (d == best_d && pi < best) {
                                best_d = d;
                                best = pi;
                            }
                        }
                    }
                }
            }
            // every unvisited cell is at least r cells away from q's cell
            if best != usize::MAX && best_d.sqrt() <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}
