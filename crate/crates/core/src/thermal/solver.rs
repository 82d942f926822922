//! Steady-state conduction on a layered finite-volume mesh.
//!
//! Each layer is one cell thick. The die is split into `res × res` equal
//! cells; layers wider than the die (spreaders) extend the mesh with rings
//! of geometrically growing cells so that the first ring cell matches the
//! die cell. Conductances between neighboring cells are series
//! half-cell resistances; the sink layer couples to ambient through the
//! convective resistance distributed by cell area. The outer mesh edges
//! are adiabatic.

use serde::{Deserialize, Serialize};

use super::{LayerStack, PowerMap, ThermalError, ThermalGrid};

/// Cells in each spreader ring, per side.
pub const RING_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative residual `‖b - Aθ‖ / ‖b‖` at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-8, max_iterations: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSolution {
    pub grid: ThermalGrid,
    pub iterations: usize,
    /// Final relative residual, recomputed from the solution.
    pub residual: f64,
    /// Heat leaving through the convective boundary, W.
    pub boundary_flux_w: f64,
    pub injected_w: f64,
}

/// Cell widths along one axis: ring, die, mirrored ring.
fn axis_cells(die: f64, res: usize, extent: f64) -> (Vec<f64>, usize) {
    let h0 = die / res as f64;
    let ext = 0.5 * (extent - die);
    if ext <= 1e-12 * die {
        return (vec![h0; res], 0);
    }
    let n = RING_CELLS;
    let ring: Vec<f64> = if h0 * n as f64 >= ext {
        vec![ext / n as f64; n]
    } else {
        // h0 (r^n - 1)/(r - 1) = ext
        let total = |r: f64| h0 * (r.powi(n as i32) - 1.0) / (r - 1.0);
        let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
        while total(hi) < ext {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) < ext {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let mut cells: Vec<f64> = (0..n).map(|i| h0 * r.powi(i as i32)).collect();
        // absorb the bisection residue in the outermost cell
        let sum: f64 = cells.iter().sum();
        cells[n - 1] += ext - sum;
        cells
    };
    let mut all: Vec<f64> = ring.iter().rev().copied().collect();
    all.extend(std::iter::repeat_n(h0, res));
    all.extend(ring.iter().copied());
    (all, n)
}

fn centers(widths: &[f64]) -> Vec<f64> {
    let mut x = 0.0;
    widths
        .iter()
        .map(|w| {
            let c = x + 0.5 * w;
            x += w;
            c
        })
        .collect()
}

struct Mesh {
    dx: Vec<f64>,
    dy: Vec<f64>,
    ring_x: usize,
    ring_y: usize,
    res: usize,
    /// Node index per (layer, iy, ix), `usize::MAX` where a layer is absent.
    node: Vec<usize>,
    n_nodes: usize,
}

impl Mesh {
    fn build(stack: &LayerStack, die_w: f64, die_h: f64, res: usize) -> Result<Mesh, ThermalError> {
        let mut extent = (die_w, die_h);
        for l in &stack.layers {
            if let Some(s) = l.side_mm {
                let s = s * 1e-3;
                if s < die_w * (1.0 - 1e-9) || s < die_h * (1.0 - 1e-9) {
                    return Err(ThermalError::LayerSmallerThanDie(l.name.clone()));
                }
                extent = (extent.0.max(s), extent.1.max(s));
            }
        }
        let (dx, ring_x) = axis_cells(die_w, res, extent.0);
        let (dy, ring_y) = axis_cells(die_h, res, extent.1);
        let (cx, cy) = (centers(&dx), centers(&dy));
        let (mx, my) = (0.5 * extent.0, 0.5 * extent.1);
        let (nx, ny) = (dx.len(), dy.len());
        let mut node = vec![usize::MAX; stack.layers.len() * nx * ny];
        let mut n_nodes = 0;
        for (li, l) in stack.layers.iter().enumerate() {
            for iy in 0..ny {
                for ix in 0..nx {
                    let inside = match l.side_mm {
                        None => (ring_y..ring_y + res).contains(&iy) && (ring_x..ring_x + res).contains(&ix),
                        Some(s) => {
                            let half = 0.5 * s * 1e-3;
                            (cx[ix] - mx).abs() < half && (cy[iy] - my).abs() < half
                        }
                    };
                    if inside {
                        node[(li * ny + iy) * nx + ix] = n_nodes;
                        n_nodes += 1;
                    }
                }
            }
        }
        Ok(Mesh { dx, dy, ring_x, ring_y, res, node, n_nodes })
    }

    fn nx(&self) -> usize {
        self.dx.len()
    }

    fn ny(&self) -> usize {
        self.dy.len()
    }

    fn at(&self, layer: usize, iy: usize, ix: usize) -> Option<usize> {
        let i = self.node[(layer * self.ny() + iy) * self.nx() + ix];
        (i != usize::MAX).then_some(i)
    }
}

/// Symmetric conductance matrix in CSR form plus the boundary diagonal.
struct System {
    diag: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    boundary: Vec<f64>,
}

impl System {
    fn assemble(stack: &LayerStack, mesh: &Mesh) -> System {
        let n = mesh.n_nodes;
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut boundary = vec![0.0; n];
        let (nx, ny) = (mesh.nx(), mesh.ny());
        for (li, l) in stack.layers.iter().enumerate() {
            let t = l.thickness_um * 1e-6;
            let k = l.conductivity;
            for iy in 0..ny {
                for ix in 0..nx {
                    let Some(a) = mesh.at(li, iy, ix) else { continue };
                    if ix + 1 < nx {
                        if let Some(b) = mesh.at(li, iy, ix + 1) {
                            let r = 0.5 * (mesh.dx[ix] + mesh.dx[ix + 1]) / (k * t * mesh.dy[iy]);
                            edges.push((a, b, 1.0 / r));
                        }
                    }
                    if iy + 1 < ny {
                        if let Some(b) = mesh.at(li, iy + 1, ix) {
                            let r = 0.5 * (mesh.dy[iy] + mesh.dy[iy + 1]) / (k * t * mesh.dx[ix]);
                            edges.push((a, b, 1.0 / r));
                        }
                    }
                    if li + 1 < stack.layers.len() {
                        if let Some(b) = mesh.at(li + 1, iy, ix) {
                            let area = mesh.dx[ix] * mesh.dy[iy];
                            let lo = &stack.layers[li + 1];
                            let r = 0.5 * t / (k * area) + 0.5 * lo.thickness_um * 1e-6 / (lo.conductivity * area);
                            edges.push((a, b, 1.0 / r));
                        }
                    }
                }
            }
        }
        let sink = stack.sink_layer();
        let sl = &stack.layers[sink];
        let mut sink_cells = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                if let Some(a) = mesh.at(sink, iy, ix) {
                    sink_cells.push((a, mesh.dx[ix] * mesh.dy[iy]));
                }
            }
        }
        let total_area: f64 = sink_cells.iter().map(|c| c.1).sum();
        for (a, area) in sink_cells {
            let r = 0.5 * sl.thickness_um * 1e-6 / (sl.conductivity * area)
                + stack.boundary.r_conv_k_per_w * total_area / area;
            boundary[a] = 1.0 / r;
        }

        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut diag = boundary.clone();
        for (a, b, g) in edges {
            adj[a].push((b, g));
            adj[b].push((a, g));
            diag[a] += g;
            diag[b] += g;
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for mut row in adj {
            row.sort_by_key(|e| e.0);
            for (c, g) in row {
                cols.push(c);
                vals.push(g);
            }
            row_start.push(cols.len());
        }
        System { diag, row_start, cols, vals, boundary }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = self.diag[i] * x[i];
            for k in self.row_start[i]..self.row_start[i + 1] {
                s -= self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
fn pcg(sys: &System, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, usize, f64), ThermalError> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let inv_d: Vec<f64> = sys.diag.iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_d).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 1..=opts.max_iterations {
        sys.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= opts.tolerance {
            // confirm against the true residual
            sys.apply(&x, &mut ap);
            let true_rel = ap.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt() / b_norm;
            if true_rel <= opts.tolerance {
                return Ok((x, it, true_rel));
            }
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_d[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(ThermalError::NotConverged { iterations: opts.max_iterations, residual: rel })
}

pub fn solve_steady(stack: &LayerStack, maps: &[PowerMap]) -> Result<ThermalSolution, ThermalError> {
    solve_steady_with(stack, maps, &SolverOptions::default())
}

/// Solves for the steady temperature of every layer. `maps` holds one
/// power map per powered layer, top to bottom, all on the same die grid.
pub fn solve_steady_with(
    stack: &LayerStack,
    maps: &[PowerMap],
    opts: &SolverOptions,
) -> Result<ThermalSolution, ThermalError> {
    stack.validate()?;
    let powered: Vec<usize> = stack.powered_layers().collect();
    if maps.len() != powered.len() {
        return Err(ThermalError::PowerMapCount { expected: powered.len(), actual: maps.len() });
    }
    let first = &maps[0];
    let res = first.resolution;
    for m in maps {
        if m.resolution != res
            || m.watts.len() != res * res
            || m.die_width_um != first.die_width_um
            || m.die_height_um != first.die_height_um
        {
            return Err(ThermalError::ResolutionMismatch);
        }
        if m.watts.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(ThermalError::NegativePower(
                m.watts.iter().copied().find(|w| !(w.is_finite() && *w >= 0.0)).unwrap(),
            ));
        }
    }
    if res == 0 {
        return Err(ThermalError::Resolution { resolution: 0, min: 1 });
    }
    let (die_w, die_h) = (first.die_width_um * 1e-6, first.die_height_um * 1e-6);
    let mesh = Mesh::build(stack, die_w, die_h, res)?;
    let sys = System::assemble(stack, &mesh);

    let mut b = vec![0.0; mesh.n_nodes];
    for (&li, map) in powered.iter().zip(maps) {
        for r in 0..res {
            for c in 0..res {
                let node = mesh.at(li, mesh.ring_y + r, mesh.ring_x + c).expect("die cells exist in every layer");
                b[node] += map.at(r, c);
            }
        }
    }
    let injected_w: f64 = b.iter().sum();
    let (theta, iterations, residual) = pcg(&sys, &b, opts)?;
    let boundary_flux_w = sys.boundary.iter().zip(&theta).map(|(g, t)| g * t).sum();

    let ambient = stack.boundary.ambient_c;
    let temps = (0..stack.layers.len())
        .map(|li| {
            let mut t = Vec::with_capacity(res * res);
            for r in 0..res {
                for c in 0..res {
                    let node = mesh.at(li, mesh.ring_y + r, mesh.ring_x + c).expect("die cell");
                    t.push(ambient + theta[node]);
                }
            }
            t
        })
        .collect();
    let grid = ThermalGrid {
        resolution: mesh.res,
        die_width_um: first.die_width_um,
        die_height_um: first.die_height_um,
        ambient_c: ambient,
        layer_names: stack.layers.iter().map(|l| l.name.clone()).collect(),
        temps,
    };
    Ok(ThermalSolution { grid, iterations, residual, boundary_flux_w, injected_w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::{Boundary, BoundarySide, Layer};

    #[test]
    fn ring_cells_fill_extent() {
        let (cells, ring) = axis_cells(7.3e-3, 64, 30e-3);
        assert_eq!(ring, RING_CELLS);
        let total: f64 = cells.iter().sum();
        assert!((total - 30e-3).abs() < 1e-12);
        let h0 = 7.3e-3 / 64.0;
        assert!((cells[ring] - h0).abs() < 1e-15);
        assert!((cells[ring - 1] - h0).abs() / h0 < 0.5);
        assert!(cells.windows(2).take(ring).all(|w| w[0] >= w[1]));
        let (cells, ring) = axis_cells(1e-3, 16, 1e-3);
        assert_eq!((cells.len(), ring), (16, 0));
    }

    fn slab_stack(r_conv: f64) -> LayerStack {
        LayerStack {
            layers: vec![Layer::new("si", 100.0, 120.0).powered(), Layer::new("tim", 20.0, 4.0)],
            boundary: Boundary { side: BoundarySide::Bottom, r_conv_k_per_w: r_conv, ambient_c: 20.0 },
        }
    }

    #[test]
    fn zero_power_stays_at_ambient() {
        let map = PowerMap::zeros(1000.0, 1000.0, 16);
        let sol = solve_steady(&slab_stack(1.0), &[map]).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.grid.temps.iter().flatten().all(|&t| t == 20.0));
    }

    #[test]
    fn uniform_slab_matches_series_resistance() {
        let stack = slab_stack(0.5);
        let map = PowerMap::uniform(2000.0, 2000.0, 16, 3.0);
        let sol = solve_steady(&stack, &[map]).unwrap();
        // laterally uniform: exact up to the half-layer convention
        let expect = 20.0 + 3.0 * stack.series_resistance_k_per_w(0, 4e-6);
        for &t in &sol.grid.temps[0] {
            assert!((t - expect).abs() < 1e-6, "{t} vs {expect}");
        }
        assert!((sol.boundary_flux_w - 3.0).abs() < 1e-6);
    }

    #[test]
    fn mismatched_inputs() {
        let stack = slab_stack(1.0);
        assert!(matches!(solve_steady(&stack, &[]), Err(ThermalError::PowerMapCount { .. })));
        let mut bad = PowerMap::zeros(1000.0, 1000.0, 16);
        bad.watts.pop();
        assert!(matches!(solve_steady(&stack, &[bad]), Err(ThermalError::ResolutionMismatch)));
        let mut stack = slab_stack(1.0);
        stack.layers[1].side_mm = Some(0.5);
        let map = PowerMap::uniform(1000.0, 1000.0, 16, 1.0);
        assert!(matches!(solve_steady(&stack, &[map]), Err(ThermalError::LayerSmallerThanDie(_))));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let map = PowerMap::uniform(1000.0, 1000.0, 16, 1.0);
        let mut stack = slab_stack(1.0);
        stack.layers.push(Layer::new("hsp", 1000.0, 400.0).with_side_mm(20.0));
        let err =
            solve_steady_with(&stack, &[map], &SolverOptions { tolerance: 1e-14, max_iterations: 3 }).unwrap_err();
        assert!(matches!(err, ThermalError::NotConverged { iterations: 3, residual } if residual > 0.0));
    }
}
