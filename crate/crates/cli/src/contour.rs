//! Marching squares on a rectangular grid.

pub type Segment = [(f64, f64); 2];

/// Values `z[j][i]` at `(xs[i], ys[j])`.
pub struct Grid<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub z: &'a [Vec<f64>],
}

fn lerp(p: (f64, f64), q: (f64, f64), zp: f64, zq: f64, level: f64) -> (f64, f64) {
    let s = if zq == zp { 0.5 } else { (level - zp) / (zq - zp) };
    (p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1))
}

/// Line segments of the level set `z = level`.
///
/// Saddle cells are split by the sign of the cell-center average.
pub fn march(g: &Grid, level: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    for j in 0..g.ys.len().saturating_sub(1) {
        for i in 0..g.xs.len().saturating_sub(1) {
            // corners counterclockwise from bottom-left
            let pts = [
                (g.xs[i], g.ys[j]),
                (g.xs[i + 1], g.ys[j]),
                (g.xs[i + 1], g.ys[j + 1]),
                (g.xs[i], g.ys[j + 1]),
            ];
            let zs = [g.z[j][i], g.z[j][i + 1], g.z[j + 1][i + 1], g.z[j + 1][i]];
            if zs.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let mut case = 0;
            for (k, z) in zs.iter().enumerate() {
                if *z > level {
                    case |= 1 << k;
                }
            }
            let edge = |e: usize| {
                let (a, b) = (e, (e + 1) % 4);
                lerp(pts[a], pts[b], zs[a], zs[b], level)
            };
            // edges: 0 bottom, 1 right, 2 top, 3 left
            let pairs: &[(usize, usize)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(2, 3)],
                5 | 10 => {
                    let center_above = zs.iter().sum::<f64>() / 4.0 > level;
                    if (case == 5) == center_above {
                        &[(0, 1), (2, 3)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                _ => unreachable!(),
            };
            for &(e1, e2) in pairs {
                out.push([edge(e1), edge(e2)]);
            }
        }
    }
    out
}
