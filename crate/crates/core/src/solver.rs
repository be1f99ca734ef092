//! Explicit finite-difference solvers for `u_t + u u_x + u u_y = u_xx + u_yy`
//! in the original coordinates and for its transformed form
//!
//! ```text
//! u_t + u u_eta = K u_eta_eta + A u_xi_eta + 2 u_xi_xi + B u_eta
//! ```
//!
//! on uniform node-centred grids.
//!
//! Advection uses the local Lax–Friedrichs flux (or a centred flux for order
//! studies). In transformed coordinates `B u_eta` is folded into the flux
//! `g(u) = u^2/2 - B u`, and the mixed derivative uses the seven-point
//! stencil whose diagonal pair follows the sign of `A`. That stencil has
//! non-negative neighbour weights whenever `|A|/4 <= h_eta/h_xi <= 2K/|A|`,
//! so with the time-step bound below the scheme is monotone.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::analysis::{lp_norm, DecaySeries};
use crate::error::{Error, Result};
use crate::exactwave::{rarefaction_from_z, RiemannData};
use crate::geometry::Curve;
use crate::profiles::ViscousProfile;
use crate::transform::{coefficient_bounds, eval_kab, from_transformed, CoeffSample};

/// Uniform grid; nodes include both endpoints of each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub lo1: f64,
    pub hi1: f64,
    pub n1: usize,
    pub lo2: f64,
    pub hi2: f64,
    pub n2: usize,
}

impl Grid2D {
    pub fn new(b1: (f64, f64), n1: usize, b2: (f64, f64), n2: usize) -> Result<Self> {
        if n1 < 8 || n2 < 8 {
            return Err(Error::InvalidArgument(format!("grid needs at least 8 nodes per axis, got {n1} x {n2}")));
        }
        for (lo, hi) in [b1, b2] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidArgument(format!("invalid axis bounds [{lo}, {hi}]")));
            }
        }
        Ok(Self { lo1: b1.0, hi1: b1.1, n1, lo2: b2.0, hi2: b2.1, n2 })
    }

    pub fn h1(&self) -> f64 {
        (self.hi1 - self.lo1) / (self.n1 - 1) as f64
    }

    pub fn h2(&self) -> f64 {
        (self.hi2 - self.lo2) / (self.n2 - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n1 - 1 {
            self.hi1
        } else {
            self.lo1 + i as f64 * self.h1()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.n2 - 1 {
            self.hi2
        } else {
            self.lo2 + j as f64 * self.h2()
        }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    /// Boundary nodes as flat indices: bottom row, top row, then the left
    /// and right columns without corners.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let (n1, n2) = (self.n1, self.n2);
        let mut out = Vec::with_capacity(2 * (n1 + n2));
        out.extend((0..n1).map(|i| self.index(i, 0)));
        out.extend((0..n1).map(|i| self.index(i, n2 - 1)));
        for j in 1..n2 - 1 {
            out.push(self.index(0, j));
            out.push(self.index(n1 - 1, j));
        }
        out
    }
}

/// Grid function at one time; `values[j * n1 + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub time: f64,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: Grid2D, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for a {} x {} grid",
                values.len(),
                grid.n1,
                grid.n2
            )));
        }
        let f = Self { grid, time, values };
        f.check_finite()?;
        Ok(f)
    }

    pub fn from_fn(grid: Grid2D, time: f64, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| f(grid.x(k % grid.n1), grid.y(k / grid.n1)))
            .collect();
        Self { grid, time, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFiniteValue { i: k % self.grid.n1, j: k / self.grid.n1 }),
            None => Ok(()),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Writes the dump format: one text header line
    /// `t=<t> n1=<n1> n2=<n2> b1=<lo,hi> b2=<lo,hi>` followed by the values
    /// as little-endian `f64` in row-major order.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        writeln!(
            w,
            "t={} n1={} n2={} b1={},{} b2={},{}",
            self.time, g.n1, g.n2, g.lo1, g.hi1, g.lo2, g.hi2
        )?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut header = String::new();
        r.read_line(&mut header)?;
        let mut t = None;
        let (mut n1, mut n2, mut b1, mut b2) = (None, None, None, None);
        for tok in header.split_whitespace() {
            let (key, val) = tok.split_once('=').ok_or_else(|| Error::Format(format!("bad header token `{tok}`")))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{s}` in header")));
            let pair = |s: &str| -> Result<(f64, f64)> {
                let (a, b) = s.split_once(',').ok_or_else(|| Error::Format(format!("bad bounds `{s}`")))?;
                Ok((num(a)?, num(b)?))
            };
            let count = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad count `{s}`")));
            match key {
                "t" => t = Some(num(val)?),
                "n1" => n1 = Some(count(val)?),
                "n2" => n2 = Some(count(val)?),
                "b1" => b1 = Some(pair(val)?),
                "b2" => b2 = Some(pair(val)?),
                _ => return Err(Error::Format(format!("unknown header key `{key}`"))),
            }
        }
        let missing = |k: &str| Error::Format(format!("header is missing `{k}`"));
        let grid = Grid2D::new(
            b1.ok_or_else(|| missing("b1"))?,
            n1.ok_or_else(|| missing("n1"))?,
            b2.ok_or_else(|| missing("b2"))?,
            n2.ok_or_else(|| missing("n2"))?,
        )?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * grid.len() {
            return Err(Error::Format(format!("expected {} data bytes, found {}", 8 * grid.len(), bytes.len())));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Field2D::new(grid, t.ok_or_else(|| missing("t"))?, values)
    }

    /// CSV with columns `x1,x2,value`, one row per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1,x2,value")?;
        for j in 0..self.grid.n2 {
            for i in 0..self.grid.n1 {
                writeln!(w, "{},{},{}", self.grid.x(i), self.grid.y(j), self.get(i, j))?;
            }
        }
        Ok(())
    }

    pub fn save_dump(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advection {
    LocalLaxFriedrichs,
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    /// Diffusion implicit by direction splitting, advection explicit.
    /// Original coordinates with Dirichlet or frozen boundaries only.
    SemiImplicitDiffusion,
}

#[derive(Debug, Clone, Copy)]
struct Column {
    k: f64,
    a: f64,
    b: f64,
}

#[derive(Debug, Clone)]
enum Coords {
    Original,
    Transformed { curve: Curve, columns: Vec<Column>, k_max: f64, a_max: f64, b_max: f64 },
}

/// Spatial discretisation on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid2D,
    coords: Coords,
    advection: Advection,
    periodic: bool,
}

impl Stepper {
    /// Stepper for the original equation; axis 1 is `x`, axis 2 is `y`.
    pub fn original(grid: Grid2D, advection: Advection) -> Self {
        Self { grid, coords: Coords::Original, advection, periodic: false }
    }

    /// Stepper for the transformed equation; axis 1 is `xi`, axis 2 is `eta`.
    pub fn transformed(grid: Grid2D, curve: Curve, advection: Advection) -> Result<Self> {
        let columns = (0..grid.n1)
            .map(|i| {
                let c: CoeffSample = eval_kab(&curve, grid.x(i))?;
                Ok(Column { k: c.k, a: c.a, b: c.b })
            })
            .collect::<Result<Vec<_>>>()?;
        let bounds = coefficient_bounds(&curve);
        Ok(Self {
            grid,
            coords: Coords::Transformed {
                curve,
                columns,
                k_max: bounds.k_max,
                a_max: bounds.a_max,
                b_max: bounds.b_max,
            },
            advection,
            periodic: false,
        })
    }

    /// Periodic in both axes; the last node of each axis duplicates the first.
    pub fn with_periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn curve(&self) -> Option<&Curve> {
        match &self.coords {
            Coords::Original => None,
            Coords::Transformed { curve, .. } => Some(curve),
        }
    }

    /// Largest explicit step for advection speeds up to `a`.
    ///
    /// Original coordinates: `1 / (2/h1^2 + 2/h2^2 + a/h1 + a/h2)`.
    /// Transformed: `1 / (4/h1^2 + 2 K_max/h2^2 + 2 |A|_max/(h1 h2) + (a + |B|_max)/h2)`.
    pub fn stability_bound(&self, a: f64, scheme: Scheme) -> f64 {
        let (h1, h2) = (self.grid.h1(), self.grid.h2());
        match (&self.coords, scheme) {
            (Coords::Original, Scheme::Explicit) => 1.0 / (2.0 / (h1 * h1) + 2.0 / (h2 * h2) + a / h1 + a / h2),
            (Coords::Original, Scheme::SemiImplicitDiffusion) => 1.0 / (a / h1 + a / h2).max(1e-300),
            (Coords::Transformed { k_max, a_max, b_max, .. }, _) => {
                1.0 / (4.0 / (h1 * h1) + 2.0 * k_max / (h2 * h2) + 2.0 * a_max / (h1 * h2) + (a + b_max) / h2)
            }
        }
    }

    /// Whether every column satisfies `|A|/4 <= h2/h1 <= 2K/|A|`.
    pub fn mixed_stencil_monotone(&self) -> bool {
        match &self.coords {
            Coords::Original => true,
            Coords::Transformed { columns, .. } => {
                let r = self.grid.h2() / self.grid.h1();
                columns.iter().all(|c| c.a.abs() / 4.0 <= r * (1.0 + 1e-12) && r <= 2.0 * c.k / c.a.abs() * (1.0 + 1e-12))
            }
        }
    }

    fn neighbours(&self, i: usize, n: usize) -> (usize, usize) {
        if self.periodic {
            let m = n - 1;
            let i = i % m;
            ((i + m - 1) % m, (i + 1) % m)
        } else {
            (i - 1, i + 1)
        }
    }

    fn flux(&self, a: f64, b: f64, shift: f64) -> f64 {
        let g = |u: f64| 0.5 * u * u - shift * u;
        let central = 0.5 * (g(a) + g(b));
        match self.advection {
            LocalLaxFriedrichs => central - 0.5 * (a - shift).abs().max((b - shift).abs()) * (b - a),
            Centered => central,
        }
    }

    /// Right-hand side at interior node `(i, j)`.
    fn rhs(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let (h1, h2) = (g.h1(), g.h2());
        let (iw, ie) = self.neighbours(i, g.n1);
        let (js, jn) = self.neighbours(j, g.n2);
        let at = |i: usize, j: usize| u[j * g.n1 + i];
        let c = at(i, j);
        let (w, e, s, n) = (at(iw, j), at(ie, j), at(i, js), at(i, jn));
        match &self.coords {
            Coords::Original => {
                let diff = (e - 2.0 * c + w) / (h1 * h1) + (n - 2.0 * c + s) / (h2 * h2);
                let adv = (self.flux(c, e, 0.0) - self.flux(w, c, 0.0)) / h1 + (self.flux(c, n, 0.0) - self.flux(s, c, 0.0)) / h2;
                diff - adv
            }
            Coords::Transformed { columns, .. } => {
                let col = columns[i];
                let mixed = if col.a >= 0.0 {
                    at(ie, jn) - e - n + 2.0 * c - w - s + at(iw, js)
                } else {
                    -(at(ie, js) - e - s + 2.0 * c - w - n + at(iw, jn))
                };
                let diff = 2.0 * (e - 2.0 * c + w) / (h1 * h1)
                    + col.k * (n - 2.0 * c + s) / (h2 * h2)
                    + col.a * mixed / (2.0 * h1 * h2);
                let adv = (self.flux(c, n, col.b) - self.flux(s, c, col.b)) / h2;
                diff - adv
            }
        }
    }

    fn check_dt(&self, field: &Field2D, dt: f64, boundary: &[f64], scheme: Scheme) -> Result<()> {
        let a = boundary.iter().fold(field.max_abs(), |m: f64, v| m.max(v.abs()));
        let bound = self.stability_bound(a, scheme);
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, bound });
        }
        Ok(())
    }

    fn check_boundary_len(&self, boundary: &[f64]) -> Result<()> {
        let need = if self.periodic { 0 } else { 2 * (self.grid.n1 + self.grid.n2) - 4 };
        if boundary.len() != need {
            return Err(Error::InvalidArgument(format!("expected {need} boundary values, got {}", boundary.len())));
        }
        Ok(())
    }

    fn apply_boundary(&self, values: &mut [f64], boundary: &[f64]) {
        let g = &self.grid;
        if self.periodic {
            for j in 0..g.n2 {
                values[g.index(g.n1 - 1, j)] = values[g.index(0, j)];
            }
            for i in 0..g.n1 {
                values[g.index(i, g.n2 - 1)] = values[g.index(i, 0)];
            }
            return;
        }
        for (&k, &v) in g.boundary_nodes().iter().zip(boundary) {
            values[k] = v;
        }
    }

    /// One explicit Euler step. `boundary` holds the Dirichlet values at the
    /// new time in [`Grid2D::boundary_nodes`] order (empty when periodic).
    pub fn step(&self, field: &Field2D, dt: f64, boundary: &[f64]) -> Result<Field2D> {
        self.check_boundary_len(boundary)?;
        self.check_dt(field, dt, boundary, Scheme::Explicit)?;
        let g = self.grid;
        let u = &field.values;
        let (j_lo, j_hi) = if self.periodic { (0, g.n2 - 1) } else { (1, g.n2 - 1) };
        let (i_lo, i_hi) = if self.periodic { (0, g.n1 - 1) } else { (1, g.n1 - 1) };
        let mut out = u.clone();
        out.par_chunks_mut(g.n1).enumerate().for_each(|(j, row)| {
            if j < j_lo || j >= j_hi {
                return;
            }
            for (i, slot) in row.iter_mut().enumerate().take(i_hi).skip(i_lo) {
                *slot = u[j * g.n1 + i] + dt * self.rhs(u, i, j);
            }
        });
        self.apply_boundary(&mut out, boundary);
        let next = Field2D { grid: g, time: field.time + dt, values: out };
        next.check_finite()?;
        Ok(next)
    }

    /// One step with explicit advection and the diffusion
    /// `(I - dt Dxx)(I - dt Dyy)` solved implicitly.
    pub fn step_semi_implicit(&self, field: &Field2D, dt: f64, boundary: &[f64]) -> Result<Field2D> {
        if !matches!(self.coords, Coords::Original) || self.periodic {
            return Err(Error::InvalidArgument(
                "semi-implicit diffusion needs original coordinates with Dirichlet boundaries".into(),
            ));
        }
        self.check_boundary_len(boundary)?;
        self.check_dt(field, dt, boundary, Scheme::SemiImplicitDiffusion)?;
        let g = self.grid;
        let (h1, h2) = (g.h1(), g.h2());
        let u = &field.values;
        let mut rhs = u.clone();
        rhs.par_chunks_mut(g.n1).enumerate().for_each(|(j, row)| {
            if j == 0 || j == g.n2 - 1 {
                return;
            }
            for (i, slot) in row.iter_mut().enumerate().take(g.n1 - 1).skip(1) {
                let at = |i: usize, j: usize| u[j * g.n1 + i];
                let c = at(i, j);
                let adv = (self.flux(c, at(i + 1, j), 0.0) - self.flux(at(i - 1, j), c, 0.0)) / h1
                    + (self.flux(c, at(i, j + 1), 0.0) - self.flux(at(i, j - 1), c, 0.0)) / h2;
                *slot = c - dt * adv;
            }
        });
        self.apply_boundary(&mut rhs, boundary);
        // x sweeps on interior rows
        let rx = dt / (h1 * h1);
        let mut half = rhs.clone();
        half.par_chunks_mut(g.n1).enumerate().for_each(|(j, row)| {
            if j == 0 || j == g.n2 - 1 {
                return;
            }
            let solved = solve_dirichlet_line(row, rx);
            row.copy_from_slice(&solved);
        });
        // y sweeps on interior columns
        let ry = dt / (h2 * h2);
        let cols: Vec<Vec<f64>> = (1..g.n1 - 1)
            .into_par_iter()
            .map(|i| {
                let line: Vec<f64> = (0..g.n2).map(|j| half[g.index(i, j)]).collect();
                solve_dirichlet_line(&line, ry)
            })
            .collect();
        let mut out = half;
        for (c, col) in cols.iter().enumerate() {
            for j in 1..g.n2 - 1 {
                out[g.index(c + 1, j)] = col[j];
            }
        }
        self.apply_boundary(&mut out, boundary);
        let next = Field2D { grid: g, time: field.time + dt, values: out };
        next.check_finite()?;
        Ok(next)
    }
}

use Advection::{Centered, LocalLaxFriedrichs};

/// Solves `(1 + 2r) x_k - r (x_{k-1} + x_{k+1}) = b_k` on interior points
/// with `x_0 = b_0` and `x_{n-1} = b_{n-1}` (Thomas algorithm).
fn solve_dirichlet_line(b: &[f64], r: f64) -> Vec<f64> {
    let n = b.len();
    let m = n - 2;
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let diag = 1.0 + 2.0 * r;
    for k in 0..m {
        let mut rhs = b[k + 1];
        if k == 0 {
            rhs += r * b[0];
        }
        if k == m - 1 {
            rhs += r * b[n - 1];
        }
        let denom = if k == 0 { diag } else { diag + r * c[k - 1] };
        c[k] = -r / denom;
        d[k] = if k == 0 { rhs / denom } else { (rhs + r * d[k - 1]) / denom };
    }
    let mut x = b.to_vec();
    for k in (0..m).rev() {
        x[k + 1] = if k == m - 1 { d[k] } else { d[k] - c[k] * x[k + 2] };
    }
    x
}

/// Analytic compactly supported bump `amplitude * e * exp(-1 / (1 - r^2/R^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: (f64, f64),
    pub radius: f64,
}

impl Bump {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let s = (dx * dx + dy * dy) / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }
}

/// Reference wave evaluated on grid nodes.
#[derive(Debug, Clone)]
pub enum ReferenceKind {
    /// The inviscid wave `u^R`.
    Exact,
    /// The viscous profile `v(t, xi, eta)`.
    Viscous(ViscousProfile),
}

/// Node-wise evaluator of `u^R` or `v`, with the per-node geometry
/// (`xi`, `eta = Z`) solved once up front.
#[derive(Debug, Clone)]
pub struct Reference {
    data: RiemannData,
    kind: ReferenceKind,
    eta: Vec<f64>,
    k: Vec<f64>,
}

impl Reference {
    pub fn new(data: RiemannData, kind: ReferenceKind, stepper: &Stepper) -> Result<Self> {
        let g = stepper.grid;
        let transformed = matches!(stepper.coords, Coords::Transformed { .. });
        let eta: Vec<f64> = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (a, b) = (g.x(k % g.n1), g.y(k / g.n1));
                if transformed {
                    Ok(b)
                } else {
                    data.curve.z(a, b)
                }
            })
            .collect::<Result<_>>()?;
        let k = match &kind {
            ReferenceKind::Exact => Vec::new(),
            ReferenceKind::Viscous(_) => (0..g.len())
                .into_par_iter()
                .map(|k| {
                    let (a, b) = (g.x(k % g.n1), g.y(k / g.n1));
                    let xi = if transformed { a } else { a - b };
                    Ok(eval_kab(&data.curve, xi)?.k)
                })
                .collect::<Result<_>>()?,
        };
        Ok(Self { data, kind, eta, k })
    }

    pub fn data(&self) -> &RiemannData {
        &self.data
    }

    pub fn kind(&self) -> &ReferenceKind {
        &self.kind
    }

    /// `eta = Z` at every node.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Whether evaluation is cheap enough to repeat every time step.
    pub fn is_cheap(&self) -> bool {
        matches!(self.kind, ReferenceKind::Exact)
    }

    /// Values at the listed nodes. Viscous values sharing `(K, eta)`
    /// bitwise are computed once.
    pub fn eval_nodes(&self, t: f64, nodes: &[usize]) -> Result<Vec<f64>> {
        match &self.kind {
            ReferenceKind::Exact => Ok(nodes.iter().map(|&k| rarefaction_from_z(&self.data, t, self.eta[k])).collect()),
            ReferenceKind::Viscous(profile) => {
                let mut slot: HashMap<(u64, u64), usize> = HashMap::new();
                let mut keys = Vec::new();
                let index: Vec<usize> = nodes
                    .iter()
                    .map(|&n| {
                        let key = (self.k[n].to_bits(), self.eta[n].to_bits());
                        *slot.entry(key).or_insert_with(|| {
                            keys.push((self.k[n], self.eta[n]));
                            keys.len() - 1
                        })
                    })
                    .collect();
                let unique: Vec<f64> = keys
                    .par_iter()
                    .map(|&(k, e)| Ok(profile.hopf_cole(t, k, e)?.v))
                    .collect::<Result<_>>()?;
                Ok(index.iter().map(|&s| unique[s]).collect())
            }
        }
    }

    pub fn eval_all(&self, t: f64) -> Result<Vec<f64>> {
        let nodes: Vec<usize> = (0..self.eta.len()).collect();
        self.eval_nodes(t, &nodes)
    }
}

/// How boundary nodes are updated. Built once per run, so the large
/// variant is not boxed.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum Boundary {
    /// Dirichlet values taken from a reference wave.
    Dirichlet(Reference),
    /// Boundary values stay at their initial values.
    Frozen,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Safety factor applied to the stability bound, in (0, 1].
    pub cfl: f64,
    pub end_time: f64,
    /// Times at which snapshots and norms are recorded (increasing).
    pub snapshots: Vec<f64>,
    /// Norm orders recorded against the reference (`f64::INFINITY` allowed).
    pub norms: Vec<f64>,
    /// Relative spacing of the times at which expensive Dirichlet data are
    /// recomputed; values in between are interpolated linearly. Zero
    /// recomputes every step.
    pub boundary_refresh: f64,
    /// Keep snapshot fields in the output.
    pub keep_fields: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Explicit,
            cfl: 0.8,
            end_time: 1.0,
            snapshots: vec![1.0],
            norms: vec![f64::INFINITY, 2.0],
            boundary_refresh: 0.0,
            keep_fields: true,
        }
    }
}

impl SolverConfig {
    fn validate(&self, start: f64) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!("CFL factor {} outside (0, 1]", self.cfl)));
        }
        if !(self.end_time > start) {
            return Err(Error::InvalidArgument(format!("end time {} not after start {start}", self.end_time)));
        }
        let mut prev = start;
        for &s in &self.snapshots {
            if !(s >= prev && s <= self.end_time) {
                return Err(Error::InvalidArgument(format!("snapshot time {s} out of order or range")));
            }
            prev = s;
        }
        if self.boundary_refresh < 0.0 {
            return Err(Error::InvalidArgument("boundary refresh must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<Field2D>,
    /// Norms of `u - reference` (label `u_minus_ref`) and, in transformed
    /// coordinates, of its `xi` and `eta` differences.
    pub series: Vec<DecaySeries>,
    pub steps: usize,
    pub dt: f64,
    /// Largest excursion of any interior update outside the range of the
    /// previous field and the new boundary values.
    pub max_principle_excess: f64,
    pub final_field: Field2D,
}

struct BoundarySupply<'a> {
    boundary: &'a Boundary,
    nodes: Vec<usize>,
    frozen: Vec<f64>,
    refresh: f64,
    /// `(t0, v0, t1, v1)` bracketing the current time.
    knots: Option<(f64, Vec<f64>, f64, Vec<f64>)>,
}

impl BoundarySupply<'_> {
    fn values(&mut self, t: f64) -> Result<Vec<f64>> {
        let r = match self.boundary {
            Boundary::Periodic => return Ok(Vec::new()),
            Boundary::Frozen => return Ok(self.frozen.clone()),
            Boundary::Dirichlet(r) => r,
        };
        if r.is_cheap() || self.refresh == 0.0 {
            return r.eval_nodes(t, &self.nodes);
        }
        let stale = self.knots.as_ref().is_none_or(|k| t > k.2);
        if stale {
            let (t0, v0) = match self.knots.take() {
                Some((_, _, t1, v1)) if t <= t1 * (1.0 + self.refresh) => (t1, v1),
                _ => (t, r.eval_nodes(t, &self.nodes)?),
            };
            let t1 = (t0 * (1.0 + self.refresh)).max(t);
            let v1 = r.eval_nodes(t1, &self.nodes)?;
            self.knots = Some((t0, v0, t1, v1));
        }
        let (t0, v0, t1, v1) = self.knots.as_ref().expect("knots set above");
        if t1 <= t0 {
            return Ok(v1.clone());
        }
        let s = (t - t0) / (t1 - t0);
        Ok(v0.iter().zip(v1).map(|(a, b)| a + s * (b - a)).collect())
    }
}

/// Advances `initial` to `config.end_time`, recording norms of
/// `u - reference` at each snapshot time.
pub fn run(
    stepper: &Stepper,
    initial: Field2D,
    config: &SolverConfig,
    boundary: &Boundary,
    reference: Option<&Reference>,
) -> Result<RunOutput> {
    config.validate(initial.time)?;
    if initial.grid != stepper.grid {
        return Err(Error::InvalidArgument("initial field and stepper grids differ".into()));
    }
    if matches!(boundary, Boundary::Periodic) != stepper.periodic {
        return Err(Error::InvalidArgument("periodic boundary needs a periodic stepper and vice versa".into()));
    }
    let g = stepper.grid;
    let nodes = if stepper.periodic { Vec::new() } else { g.boundary_nodes() };
    let frozen: Vec<f64> = nodes.iter().map(|&k| initial.values[k]).collect();
    let mut supply = BoundarySupply { boundary, nodes, frozen, refresh: config.boundary_refresh, knots: None };

    // the step size is fixed up front from the data range; Dirichlet data
    // never leave [u-, u+]
    let a0 = match boundary {
        Boundary::Dirichlet(r) => initial.max_abs().max(r.data.u_minus.abs()).max(r.data.u_plus.abs()),
        _ => initial.max_abs(),
    };
    let dt_nominal = config.cfl * stepper.stability_bound(a0, config.scheme);

    let mut series: Vec<DecaySeries> = config.norms.iter().map(|&p| DecaySeries::new("u_minus_ref", p)).collect();
    let transformed = matches!(stepper.coords, Coords::Transformed { .. });
    if transformed && reference.is_some() {
        series.push(DecaySeries::new("pert_xi", 2.0));
        series.push(DecaySeries::new("pert_eta", 2.0));
    }
    let mut snapshots = Vec::new();
    let mut u = initial;
    let mut steps = 0usize;
    let mut excess: f64 = 0.0;
    let mut pending = config.snapshots.iter().copied().peekable();
    let record = |u: &Field2D, series: &mut Vec<DecaySeries>, snapshots: &mut Vec<Field2D>| -> Result<()> {
        if let Some(r) = reference {
            let rv = r.eval_all(u.time)?;
            let diff: Vec<f64> = u.values.iter().zip(&rv).map(|(a, b)| a - b).collect();
            for (s, &p) in series.iter_mut().zip(&config.norms) {
                s.push(u.time, lp_norm(&diff, g.cell_area(), p));
            }
            if transformed {
                let (dx, dy) = interior_gradients(&g, &diff);
                let n = config.norms.len();
                series[n].push(u.time, lp_norm(&dx, g.cell_area(), 2.0));
                series[n + 1].push(u.time, lp_norm(&dy, g.cell_area(), 2.0));
            }
        }
        if config.keep_fields {
            snapshots.push(u.clone());
        }
        Ok(())
    };
    while pending.peek().is_some_and(|&s| s <= u.time) {
        pending.next();
        record(&u, &mut series, &mut snapshots)?;
    }
    while u.time < config.end_time {
        let target = pending.peek().copied().unwrap_or(config.end_time).min(config.end_time);
        let remaining = target - u.time;
        let (dt, t_next) = if remaining <= dt_nominal * (1.0 + 1e-9) { (remaining, target) } else { (dt_nominal, u.time + dt_nominal) };
        let bc = supply.values(t_next)?;
        let (lo, hi) = bc.iter().fold(u.min_max(), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let mut next = match config.scheme {
            Scheme::Explicit => stepper.step(&u, dt, &bc)?,
            Scheme::SemiImplicitDiffusion => stepper.step_semi_implicit(&u, dt, &bc)?,
        };
        next.time = t_next;
        let (nlo, nhi) = next.min_max();
        excess = excess.max(lo - nlo).max(nhi - hi);
        u = next;
        steps += 1;
        while pending.peek().is_some_and(|&s| s <= u.time) {
            pending.next();
            record(&u, &mut series, &mut snapshots)?;
        }
    }
    Ok(RunOutput { snapshots, series, steps, dt: dt_nominal, max_principle_excess: excess, final_field: u })
}

/// Central differences of `f` in both axes at interior nodes (zero on the
/// boundary).
pub fn interior_gradients(g: &Grid2D, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut dx = vec![0.0; g.len()];
    let mut dy = vec![0.0; g.len()];
    let (h1, h2) = (g.h1(), g.h2());
    for j in 1..g.n2 - 1 {
        for i in 1..g.n1 - 1 {
            let k = g.index(i, j);
            dx[k] = (f[k + 1] - f[k - 1]) / (2.0 * h1);
            dy[k] = (f[k + g.n1] - f[k - g.n1]) / (2.0 * h2);
        }
    }
    (dx, dy)
}

/// `w0(Z(x, y)) + bump(x, y)` on the stepper's grid (mapped through the
/// inverse transform in transformed coordinates).
pub fn initial_field(stepper: &Stepper, data: &RiemannData, bump: Option<&Bump>, time: f64) -> Result<Field2D> {
    let profile = ViscousProfile::new(data.u_minus, data.u_plus)?;
    let g = stepper.grid;
    let transformed = stepper.curve().is_some();
    let values = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (a, b) = (g.x(k % g.n1), g.y(k / g.n1));
            let (x, y, eta) = if transformed {
                let (x, y) = from_transformed(&data.curve, a, b)?;
                (x, y, b)
            } else {
                (a, b, data.curve.z(a, b)?)
            };
            Ok(profile.w0(eta) + bump.map_or(0.0, |p| p.eval(x, y)))
        })
        .collect::<Result<Vec<_>>>()?;
    Field2D::new(g, time, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new((-1.0, 1.0), n, (-1.0, 1.0), n).unwrap()
    }

    #[test]
    fn grid_rejects_small_counts() {
        assert!(Grid2D::new((0.0, 1.0), 7, (0.0, 1.0), 8).is_err());
        assert!(Grid2D::new((1.0, 0.0), 8, (0.0, 1.0), 8).is_err());
    }

    #[test]
    fn boundary_node_count() {
        let g = Grid2D::new((0.0, 1.0), 9, (0.0, 1.0), 12).unwrap();
        let b = g.boundary_nodes();
        assert_eq!(b.len(), 2 * (9 + 12) - 4);
        let mut s = b.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), b.len());
    }

    #[test]
    fn constant_field_is_steady() {
        let g = grid(16);
        let s = Stepper::original(g, Advection::LocalLaxFriedrichs);
        let f = Field2D::from_fn(g, 0.0, |_, _| 0.7);
        let bc = vec![0.7; g.boundary_nodes().len()];
        let dt = 0.5 * s.stability_bound(0.7, Scheme::Explicit);
        let next = s.step(&f, dt, &bc).unwrap();
        assert!(next.values.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn constant_field_is_steady_in_transformed_coordinates() {
        let g = grid(16);
        let c = Curve::mollify_polyline(-0.2, 0.0, 0.2, 0.1, 0.5).unwrap();
        let s = Stepper::transformed(g, c, Advection::LocalLaxFriedrichs).unwrap();
        let f = Field2D::from_fn(g, 0.0, |_, _| -0.3);
        let bc = vec![-0.3; g.boundary_nodes().len()];
        let dt = 0.5 * s.stability_bound(0.3, Scheme::Explicit);
        let next = s.step(&f, dt, &bc).unwrap();
        assert!(next.values.iter().all(|&v| (v + 0.3).abs() < 1e-15));
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = grid(16);
        let s = Stepper::original(g, Advection::LocalLaxFriedrichs);
        let f = Field2D::from_fn(g, 0.0, |x, _| x);
        let bc: Vec<f64> = g.boundary_nodes().iter().map(|&k| f.values[k]).collect();
        let dt = 2.0 * s.stability_bound(1.0, Scheme::Explicit);
        assert!(matches!(s.step(&f, dt, &bc), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn dump_round_trip() {
        let g = Grid2D::new((-1.5, 2.0), 9, (0.0, 3.25), 11).unwrap();
        let f = Field2D::from_fn(g, 1.25, |x, y| x.sin() * y);
        let mut buf = Vec::new();
        f.write_dump(&mut buf).unwrap();
        let back = Field2D::read_dump(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn dump_header_format() {
        let g = Grid2D::new((0.0, 1.0), 8, (-2.0, 2.0), 8).unwrap();
        let f = Field2D::from_fn(g, 4.0, |_, _| 0.0);
        let mut buf = Vec::new();
        f.write_dump(&mut buf).unwrap();
        let header = buf.split(|&b| b == b'\n').next().unwrap();
        assert_eq!(std::str::from_utf8(header).unwrap(), "t=4 n1=8 n2=8 b1=0,1 b2=-2,2");
        assert_eq!(buf.len(), header.len() + 1 + 8 * 64);
    }

    #[test]
    fn thomas_solver_matches_direct_product() {
        let b = vec![1.0, 0.3, -0.2, 0.8, 0.1, 2.0];
        let r = 0.7;
        let x = solve_dirichlet_line(&b, r);
        assert_eq!((x[0], x[5]), (1.0, 2.0));
        for k in 1..5 {
            let lhs = (1.0 + 2.0 * r) * x[k] - r * (x[k - 1] + x[k + 1]);
            assert!((lhs - b[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn bump_is_compact() {
        let b = Bump { amplitude: 2.0, center: (1.0, -1.0), radius: 0.5 };
        assert_eq!(b.eval(1.0, -1.0), 2.0);
        assert_eq!(b.eval(1.5, -1.0), 0.0);
        assert!(b.eval(1.2, -1.0) > 0.0);
    }
}
