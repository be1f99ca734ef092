//! Independent one-dimensional reference solver shared by the integration
//! tests: Crank–Nicolson for `u_t + c (u^2/2)_s = nu u_ss` with Newton
//! iteration, centred differences, and Dirichlet or periodic boundaries.

#![allow(dead_code)]

pub struct Oracle1d {
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub h: f64,
    pub c: f64,
    pub nu: f64,
    pub periodic: bool,
}

impl Oracle1d {
    /// Dirichlet problem on `[lo, hi]` with `n` nodes; boundary nodes are
    /// overwritten by `bc(t)` at every step.
    pub fn dirichlet(lo: f64, hi: f64, n: usize, c: f64, nu: f64, init: impl Fn(f64) -> f64) -> Self {
        let h = (hi - lo) / (n - 1) as f64;
        let s: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        let u = s.iter().map(|&x| init(x)).collect();
        Self { s, u, h, c, nu, periodic: false }
    }

    /// Periodic problem on `[lo, lo + period)` with `n` distinct nodes.
    pub fn periodic(lo: f64, period: f64, n: usize, c: f64, nu: f64, init: impl Fn(f64) -> f64) -> Self {
        let h = period / n as f64;
        let s: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        let u = s.iter().map(|&x| init(x)).collect();
        Self { s, u, h, c, nu, periodic: true }
    }

    fn operator(&self, u: &[f64], i: usize) -> f64 {
        let n = u.len();
        let (l, r) = if self.periodic { ((i + n - 1) % n, (i + 1) % n) } else { (i - 1, i + 1) };
        let adv = self.c * (u[r] * u[r] - u[l] * u[l]) / (4.0 * self.h);
        let diff = self.nu * (u[r] - 2.0 * u[i] + u[l]) / (self.h * self.h);
        diff - adv
    }

    /// One Crank–Nicolson step; `bc` gives the new Dirichlet values.
    pub fn step(&mut self, dt: f64, bc: Option<(f64, f64)>) {
        let n = self.u.len();
        let old = self.u.clone();
        let explicit: Vec<f64> = (0..n)
            .map(|i| if !self.periodic && (i == 0 || i == n - 1) { 0.0 } else { self.operator(&old, i) })
            .collect();
        let mut u = old.clone();
        if let Some((a, b)) = bc {
            u[0] = a;
            u[n - 1] = b;
        }
        let (h, c, nu) = (self.h, self.c, self.nu);
        for _ in 0..50 {
            // residual F_i = u_i - old_i - dt/2 (L(u)_i + L(old)_i)
            let mut lower = vec![0.0; n];
            let mut diag = vec![1.0; n];
            let mut upper = vec![0.0; n];
            let mut res = vec![0.0; n];
            let interior: Vec<usize> = if self.periodic { (0..n).collect() } else { (1..n - 1).collect() };
            for &i in &interior {
                let (l, r) = if self.periodic { ((i + n - 1) % n, (i + 1) % n) } else { (i - 1, i + 1) };
                res[i] = u[i] - old[i] - 0.5 * dt * (self.operator(&u, i) + explicit[i]);
                diag[i] = 1.0 + dt * nu / (h * h);
                lower[i] = -0.5 * dt * (nu / (h * h) + c * u[l] / (2.0 * h));
                upper[i] = -0.5 * dt * (nu / (h * h) - c * u[r] / (2.0 * h));
            }
            let delta = if self.periodic {
                solve_cyclic(&lower, &diag, &upper, &res)
            } else {
                lower[n - 1] = 0.0;
                upper[0] = 0.0;
                solve_tridiagonal(&lower, &diag, &upper, &res)
            };
            let mut change: f64 = 0.0;
            for i in 0..n {
                u[i] -= delta[i];
                change = change.max(delta[i].abs());
            }
            if change < 1e-14 {
                break;
            }
        }
        self.u = u;
    }

    /// Advances by `duration` with steps no larger than `dt`.
    pub fn advance(&mut self, duration: f64, dt: f64, bc: impl Fn(f64) -> Option<(f64, f64)>, t0: f64) {
        let steps = (duration / dt).ceil() as usize;
        let dt = duration / steps as f64;
        for k in 0..steps {
            self.step(dt, bc(t0 + (k + 1) as f64 * dt));
        }
    }

    /// Linear interpolation at `s` (wrapping when periodic).
    pub fn sample(&self, s: f64) -> f64 {
        let n = self.u.len();
        let pos = (s - self.s[0]) / self.h;
        if self.periodic {
            let period = n as f64;
            let p = pos.rem_euclid(period);
            let k = p.floor() as usize % n;
            let f = p - p.floor();
            return self.u[k] * (1.0 - f) + self.u[(k + 1) % n] * f;
        }
        let k = (pos.floor().max(0.0) as usize).min(n - 2);
        let f = pos - k as f64;
        self.u[k] * (1.0 - f) + self.u[k + 1] * f
    }
}

pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve by Sherman–Morrison; `a[0]` couples to the
/// last unknown and `c[n-1]` to the first.
pub fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - a[0] * c[n - 1] / gamma;
    let mut aa = a.to_vec();
    let mut cc = c.to_vec();
    aa[0] = 0.0;
    cc[n - 1] = 0.0;
    let x = solve_tridiagonal(&aa, &bb, &cc, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = solve_tridiagonal(&aa, &bb, &cc, &u);
    let fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}
