use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform space-time grid anchored at t = 0: nodes (x0 + j dx, n dt) for
/// j = 0..=nx, n = 0..=nt. Node coordinates are always computed as
/// `x0 + j as f64 * dx`, never accumulated, so they are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub dt: f64,
    pub nt: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, nx: usize, dt: f64, nt: usize) -> Result<Self> {
        if !(dx.is_finite() && dt.is_finite()) || dx <= 0.0 || dt <= 0.0 {
            return Err(Error::BadGridStep { dx, dt });
        }
        if !x0.is_finite() {
            return Err(Error::NonFinite { what: "grid origin" });
        }
        if nx == 0 || nt == 0 {
            return Err(Error::DimensionMismatch { what: "grid cells", expected: 1, got: 0 });
        }
        Ok(Grid { x0, dx, nx, dt, nt })
    }

    /// Smallest grid with steps (dx, dt) whose nodes sit on the lattice
    /// `anchor + k dx` and which covers [x_lo, x_hi] x [0, t_hi].
    pub fn covering(anchor: f64, dx: f64, dt: f64, x_lo: f64, x_hi: f64, t_hi: f64) -> Result<Self> {
        if !(dx > 0.0 && dt > 0.0 && dx.is_finite() && dt.is_finite()) {
            return Err(Error::BadGridStep { dx, dt });
        }
        if !(x_lo.is_finite() && x_hi.is_finite() && t_hi.is_finite()) || x_hi <= x_lo || t_hi <= 0.0 {
            return Err(Error::EmptyInterval { a: x_lo, b: x_hi });
        }
        let pad = 1e-9;
        let j_lo = ((x_lo - anchor) / dx + pad).floor();
        let j_hi = ((x_hi - anchor) / dx - pad).ceil();
        let x0 = anchor + j_lo * dx;
        let nx = (j_hi - j_lo).max(1.0) as usize;
        let nt = ((t_hi / dt - pad).ceil()).max(1.0) as usize;
        Grid::new(x0, dx, nx, dt, nt)
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.nx)
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.nt)
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.nt + 1)
    }

    /// Does [x_lo, x_hi] x [0, t_hi] fit inside, up to a relative whisker?
    pub fn covers(&self, x_lo: f64, x_hi: f64, t_hi: f64) -> bool {
        let sx = 1e-9 * (self.dx + x_lo.abs() + x_hi.abs());
        let st = 1e-9 * (self.dt + t_hi.abs());
        self.x0 <= x_lo + sx && self.x_end() >= x_hi - sx && self.t_end() >= t_hi - st
    }
}

/// Node samples of a scalar field on a [`Grid`], stored time-major.
/// `diverged_at` records the first time level containing a non-finite sample,
/// if any; fields produced by a run that blew through the guard carry it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
    diverged_at: Option<usize>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let expect = grid.node_count();
        if values.len() != expect {
            return Err(Error::DimensionMismatch { what: "field samples", expected: expect, got: values.len() });
        }
        let diverged_at = values
            .iter()
            .position(|v| !v.is_finite())
            .map(|pos| pos / (grid.nx + 1));
        Ok(GridField { grid, values, diverged_at })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.node_count();
        GridField { grid, values: vec![0.0; n], diverged_at: None }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.node_count());
        for n in 0..=grid.nt {
            let t = grid.t(n);
            for j in 0..=grid.nx {
                values.push(f(grid.x(j), t));
            }
        }
        GridField::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn diverged_at(&self) -> Option<usize> {
        self.diverged_at
    }

    #[inline]
    pub fn get(&self, j: usize, n: usize) -> f64 {
        debug_assert!(j <= self.grid.nx && n <= self.grid.nt);
        self.values[n * (self.grid.nx + 1) + j]
    }

    #[inline]
    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.grid.nx + 1;
        &self.values[n * w..(n + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise combination with another field on the same grid.
    pub fn combine(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        GridField::new(self.grid.clone(), values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation; zero outside the grid rectangle. Points within
    /// a sliver of the boundary are snapped inside first, so feet computed in
    /// floating point do not fall off the edge.
    pub fn sample_or_zero(&self, x: f64, t: f64) -> f64 {
        let g = &self.grid;
        let mut fx = (x - g.x0) / g.dx;
        let mut ft = t / g.dt;
        let eps = 1e-9;
        if fx < 0.0 {
            if fx > -eps { fx = 0.0 } else { return 0.0 }
        }
        if ft < 0.0 {
            if ft > -eps { ft = 0.0 } else { return 0.0 }
        }
        let (nxf, ntf) = (g.nx as f64, g.nt as f64);
        if fx > nxf {
            if fx < nxf + eps { fx = nxf } else { return 0.0 }
        }
        if ft > ntf {
            if ft < ntf + eps { ft = ntf } else { return 0.0 }
        }
        let j = (fx.floor() as usize).min(g.nx - 1);
        let n = (ft.floor() as usize).min(g.nt - 1);
        let ax = fx - j as f64;
        let at = ft - n as f64;
        let w = g.nx + 1;
        let base = n * w + j;
        let v00 = self.values[base];
        let v10 = self.values[base + 1];
        let v01 = self.values[base + w];
        let v11 = self.values[base + w + 1];
        v00 * (1.0 - ax) * (1.0 - at)
            + v10 * ax * (1.0 - at)
            + v01 * (1.0 - ax) * at
            + v11 * ax * at
    }

    /// Dump as `x,t,<name>` rows, 17 significant digits, time-major, taking
    /// every `stride`-th node along both axes (node 0 always included).
    pub fn write_csv<W: Write>(&self, out: &mut W, name: &str, stride: usize) -> std::io::Result<()> {
        let stride = stride.max(1);
        writeln!(out, "x,t,{name}")?;
        let g = &self.grid;
        let mut n = 0;
        while n <= g.nt {
            let t = g.t(n);
            let mut j = 0;
            while j <= g.nx {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", g.x(j), t, self.get(j, n))?;
                j += stride;
            }
            n += stride;
        }
        Ok(())
    }
}
