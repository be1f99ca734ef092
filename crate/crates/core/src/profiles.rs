//! The smooth inviscid ansatz `w(t, eta)` and the viscous profile
//! `v(t, xi, eta)` solving `v_t + v v_eta = K(xi) v_eta_eta`, `v(0) = w0`.
//!
//! `v` is evaluated by the Hopf–Cole formula
//!
//! ```text
//! v = int (eta - y)/t e^E dy / int e^E dy,
//! E(y) = -(eta - y)^2 / (4 K t) - W0(y) / (2 K),
//! ```
//!
//! with `W0` the antiderivative of `w0`. Writing `<f>` for the average
//! against `e^E`, integration by parts gives `v = <w0>`, and every partial
//! derivative becomes a centred moment:
//!
//! ```text
//! v_eta      = Cov(w0, y) / (2 K t)
//! v_eta_eta  = <(w0 - <w0>)(y - <y>)^2> / (2 K t)^2
//! dv/dK      = Cov(w0, (eta - y)^2 / (4 K^2 t) + W0 / (2 K^2))
//! v_t        = Cov(w0, (eta - y)^2) / (4 K t^2)
//! ```

use std::collections::HashMap;
use std::f64::consts::FRAC_2_PI;

use rayon::prelude::*;

use crate::analysis::{lp_norm, DecaySeries};
use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::quadrature::GaussLegendre;
use crate::roots::{solve_monotone, NewtonOptions};
use crate::transform::eval_kab;

/// `(int_0^inf da / (1 + a^2))^-1`.
pub const KAPPA: f64 = FRAC_2_PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub u_minus: f64,
    pub u_plus: f64,
    /// Half-width of the quadrature window in units of `sqrt(K t)`.
    pub window: f64,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Absolute tolerance of the node-doubling test.
    pub tol: f64,
    /// Below this time `v` is replaced by `w0`.
    pub t_min: f64,
    pub max_doublings: usize,
}

impl ProfileParams {
    pub fn new(u_minus: f64, u_plus: f64) -> Self {
        Self { u_minus, u_plus, window: 12.0, order: 16, tol: 1e-11, t_min: 1e-3, max_doublings: 8 }
    }
}

/// Hopf–Cole moments at one `(t, K, eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfCole {
    pub v: f64,
    pub v_eta: f64,
    pub v_eta_eta: f64,
    pub dv_dk: f64,
    /// `v_t` from its own moment, independent of the PDE.
    pub v_t: f64,
    pub nodes: usize,
}

/// All first and second partials of `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VPartials {
    pub v: f64,
    pub v_t: f64,
    pub v_xi: f64,
    pub v_eta: f64,
    pub v_eta_eta: f64,
    pub v_xi_eta: f64,
    pub v_xi_xi: f64,
}

#[derive(Debug, Clone)]
pub struct ViscousProfile {
    params: ProfileParams,
    rule: GaussLegendre,
    mid: f64,
    half: f64,
}

impl ViscousProfile {
    /// Profile with default quadrature settings. Equal end states are
    /// allowed and give the constant profile.
    pub fn new(u_minus: f64, u_plus: f64) -> Result<Self> {
        Self::with_params(ProfileParams::new(u_minus, u_plus))
    }

    pub fn with_params(params: ProfileParams) -> Result<Self> {
        let ProfileParams { u_minus, u_plus, window, order, tol, t_min, .. } = params;
        if !(u_minus.is_finite() && u_plus.is_finite()) || u_minus > u_plus {
            return Err(Error::InvalidArgument(format!("need finite u_minus <= u_plus, got {u_minus}, {u_plus}")));
        }
        if !(window > 0.0 && tol > 0.0 && t_min >= 0.0 && order >= 2) {
            return Err(Error::InvalidArgument("invalid quadrature settings".into()));
        }
        Ok(Self {
            params,
            rule: GaussLegendre::new(order),
            mid: 0.5 * (u_plus + u_minus),
            half: 0.5 * (u_plus - u_minus),
        })
    }

    pub fn params(&self) -> &ProfileParams {
        &self.params
    }

    pub fn w0(&self, eta: f64) -> f64 {
        self.mid + self.half * KAPPA * eta.atan()
    }

    pub fn w0_prime(&self, eta: f64) -> f64 {
        self.half * KAPPA / (1.0 + eta * eta)
    }

    fn w0_second(&self, eta: f64) -> f64 {
        let q = 1.0 + eta * eta;
        -2.0 * eta * self.half * KAPPA / (q * q)
    }

    /// `int_0^y w0`.
    pub fn w0_antiderivative(&self, y: f64) -> f64 {
        self.mid * y + self.half * KAPPA * (y * y.atan() - 0.5 * (y * y).ln_1p())
    }

    /// Inviscid solution by characteristics: the root of `w = w0(eta - w t)`.
    pub fn eval_w(&self, t: f64, eta: f64) -> Result<f64> {
        check_time(t)?;
        if t == 0.0 || self.half == 0.0 {
            return Ok(self.w0(eta));
        }
        let r = solve_monotone(
            "eval_w",
            |w| (w - self.w0(eta - w * t), 1.0 + t * self.w0_prime(eta - w * t)),
            self.w0(eta),
            self.params.u_minus,
            self.params.u_plus,
            NewtonOptions { tol: 1e-13, ..Default::default() },
        )?;
        Ok(r.value)
    }

    /// Hopf–Cole moments with a given viscosity `k`.
    pub fn hopf_cole(&self, t: f64, k: f64, eta: f64) -> Result<HopfCole> {
        check_time(t)?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {k}")));
        }
        if self.half == 0.0 {
            return Ok(HopfCole { v: self.mid, v_eta: 0.0, v_eta_eta: 0.0, dv_dk: 0.0, v_t: 0.0, nodes: 0 });
        }
        if t < self.params.t_min {
            let (w, wp, wpp) = (self.w0(eta), self.w0_prime(eta), self.w0_second(eta));
            return Ok(HopfCole { v: w, v_eta: wp, v_eta_eta: wpp, dv_dk: 0.0, v_t: k * wpp - w * wp, nodes: 0 });
        }
        // the exponent is concave with its maximum where y + t w0(y) = eta
        let centre = solve_monotone(
            "hopf_cole_centre",
            |y| (y + t * self.w0(y) - eta, 1.0 + t * self.w0_prime(y)),
            eta - t * self.mid,
            eta - t * self.params.u_plus,
            eta - t * self.params.u_minus,
            NewtonOptions { tol: 1e-12 * (1.0 + eta.abs()), ..Default::default() },
        )?
        .value;
        let reach = self.params.window * (k * t).sqrt();
        let sigma = (2.0 * k * t / (1.0 + t * self.w0_prime(centre))).sqrt();
        let mut panels = ((reach / sigma).ceil() as usize).max(4);
        let mut coarse = self.moments(t, k, eta, centre, reach, panels);
        for _ in 0..self.params.max_doublings {
            panels *= 2;
            let fine = self.moments(t, k, eta, centre, reach, panels);
            let change = (fine.v - coarse.v).abs().max((fine.v_eta - coarse.v_eta).abs());
            if change <= self.params.tol {
                return Ok(fine);
            }
            coarse = fine;
        }
        let fine = self.moments(t, k, eta, centre, reach, panels * 2);
        let change = (fine.v - coarse.v).abs();
        Err(Error::QuadratureNotConverged { change, tol: self.params.tol })
    }

    fn moments(&self, t: f64, k: f64, eta: f64, centre: f64, reach: f64, panels: usize) -> HopfCole {
        let e_of = |y: f64, big_w: f64| -(eta - y) * (eta - y) / (4.0 * k * t) - big_w / (2.0 * k);
        let e_max = e_of(centre, self.w0_antiderivative(centre));
        let n = panels * self.rule.len();
        let mut wt = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut w0s = Vec::with_capacity(n);
        let mut big = Vec::with_capacity(n);
        let (a, b) = (centre - reach, centre + reach);
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let y = mid + 0.5 * width * x;
                let at = y.atan();
                let w0 = self.mid + self.half * KAPPA * at;
                let big_w = self.mid * y + self.half * KAPPA * (y * at - 0.5 * (y * y).ln_1p());
                wt.push(0.5 * width * w * (e_of(y, big_w) - e_max).exp());
                ys.push(y);
                w0s.push(w0);
                big.push(big_w);
            }
        }
        let mass: f64 = wt.iter().sum();
        let mean = |f: &dyn Fn(usize) -> f64| -> f64 { (0..n).map(|i| wt[i] * f(i)).sum::<f64>() / mass };
        let q = |i: usize| (eta - ys[i]) * (eta - ys[i]);
        let pk = |i: usize| q(i) / (4.0 * k * k * t) + big[i] / (2.0 * k * k);
        let v = mean(&|i| (eta - ys[i]) / t);
        let mw = mean(&|i| w0s[i]);
        let my = mean(&|i| ys[i]);
        let mq = mean(&|i| q(i));
        let mp = mean(&|i| pk(i));
        let cov_y = mean(&|i| (w0s[i] - mw) * (ys[i] - my));
        let third = mean(&|i| (w0s[i] - mw) * (ys[i] - my) * (ys[i] - my));
        let cov_p = mean(&|i| (w0s[i] - mw) * (pk(i) - mp));
        let cov_q = mean(&|i| (w0s[i] - mw) * (q(i) - mq));
        let s = 2.0 * k * t;
        HopfCole {
            v,
            v_eta: cov_y / s,
            v_eta_eta: third / (s * s),
            dv_dk: cov_p,
            v_t: cov_q / (4.0 * k * t * t),
            nodes: n,
        }
    }

    /// `v(t, xi, eta)` with viscosity `K(xi)` of `curve`.
    pub fn eval_v(&self, t: f64, xi: f64, eta: f64, curve: &Curve) -> Result<f64> {
        let k = eval_kab(curve, xi)?.k;
        Ok(self.hopf_cole(t, k, eta)?.v)
    }

    /// Step used for the `xi`-differences of `v_xi` and `v_eta`.
    pub fn xi_step(curve: &Curve) -> f64 {
        match curve.xi_strip() {
            Some((g1, g2)) => 1e-4 * (g2 - g1).max(1.0),
            None => 1e-4,
        }
    }

    pub fn v_partials(&self, t: f64, xi: f64, eta: f64, curve: &Curve) -> Result<VPartials> {
        let c = eval_kab(curve, xi)?;
        let hc = self.hopf_cole(t, c.k, eta)?;
        let v_xi = if c.k_prime == 0.0 { 0.0 } else { hc.dv_dk * c.k_prime };
        let h = Self::xi_step(curve);
        let (cm, cp) = (eval_kab(curve, xi - h)?, eval_kab(curve, xi + h)?);
        let (v_xi_eta, v_xi_xi) = if cm.k == c.k && cp.k == c.k {
            (0.0, 0.0)
        } else {
            let (lo, hi) = (self.hopf_cole(t, cm.k, eta)?, self.hopf_cole(t, cp.k, eta)?);
            (
                (hi.v_eta - lo.v_eta) / (2.0 * h),
                (hi.dv_dk * cp.k_prime - lo.dv_dk * cm.k_prime) / (2.0 * h),
            )
        };
        Ok(VPartials {
            v: hc.v,
            v_t: c.k * hc.v_eta_eta - hc.v * hc.v_eta,
            v_xi,
            v_eta: hc.v_eta,
            v_eta_eta: hc.v_eta_eta,
            v_xi_eta,
            v_xi_xi,
        })
    }

    /// Norms of `v - w`, `v_eta`, `v_xi` and `v_xi_eta` on `grid` at each
    /// time. Columns sharing a bitwise-equal `K` are computed once.
    pub fn measure_profile_decay(&self, curve: &Curve, times: &[f64], grid: &ProfileGrid) -> Result<Vec<DecaySeries>> {
        grid.validate()?;
        let xis = grid.xi_nodes();
        let etas = grid.eta_nodes();
        let (h_xi, h_eta) = (grid.xi_spacing(), grid.eta_spacing());
        let step = Self::xi_step(curve);
        let mut out = vec![
            DecaySeries::new("v_minus_w", f64::INFINITY),
            DecaySeries::new("v_eta", 1.0),
            DecaySeries::new("v_eta", 2.0),
            DecaySeries::new("v_eta", f64::INFINITY),
            DecaySeries::new("v_xi", 1.0),
            DecaySeries::new("v_xi", 2.0),
            DecaySeries::new("v_xi", f64::INFINITY),
            DecaySeries::new("v_xi_eta", 2.0),
        ];
        for &t in times {
            let w: Vec<f64> = etas.par_iter().map(|&e| self.eval_w(t, e)).collect::<Result<_>>()?;
            let mut cache: HashMap<u64, Vec<HopfCole>> = HashMap::new();
            let mut column = |k: f64| -> Result<Vec<HopfCole>> {
                if let Some(c) = cache.get(&k.to_bits()) {
                    return Ok(c.clone());
                }
                let c: Vec<HopfCole> = etas.par_iter().map(|&e| self.hopf_cole(t, k, e)).collect::<Result<_>>()?;
                cache.insert(k.to_bits(), c.clone());
                Ok(c)
            };
            let mut sup_vw: f64 = 0.0;
            let mut eta_norms = [0.0f64; 3];
            let mut v_xi_all = Vec::with_capacity(xis.len() * etas.len());
            let mut v_xi_eta_all = Vec::with_capacity(xis.len() * etas.len());
            for &xi in &xis {
                let c = eval_kab(curve, xi)?;
                let col = column(c.k)?;
                let v_eta: Vec<f64> = col.iter().map(|m| m.v_eta).collect();
                for (m, wv) in col.iter().zip(&w) {
                    sup_vw = sup_vw.max((m.v - wv).abs());
                }
                for (slot, p) in eta_norms.iter_mut().zip([1.0, 2.0, f64::INFINITY]) {
                    *slot = slot.max(lp_norm(&v_eta, h_eta, p));
                }
                let (cm, cp) = (eval_kab(curve, xi - step)?, eval_kab(curve, xi + step)?);
                if c.k_prime == 0.0 && cm.k == c.k && cp.k == c.k {
                    v_xi_all.extend(std::iter::repeat_n(0.0, etas.len()));
                    v_xi_eta_all.extend(std::iter::repeat_n(0.0, etas.len()));
                    continue;
                }
                let (lo, hi) = (column(cm.k)?, column(cp.k)?);
                for j in 0..etas.len() {
                    v_xi_all.push(if c.k_prime == 0.0 { 0.0 } else { col[j].dv_dk * c.k_prime });
                    v_xi_eta_all.push((hi[j].v_eta - lo[j].v_eta) / (2.0 * step));
                }
            }
            let area = h_xi * h_eta;
            let values = [
                sup_vw,
                eta_norms[0],
                eta_norms[1],
                eta_norms[2],
                lp_norm(&v_xi_all, area, 1.0),
                lp_norm(&v_xi_all, area, 2.0),
                lp_norm(&v_xi_all, area, f64::INFINITY),
                lp_norm(&v_xi_eta_all, area, 2.0),
            ];
            for (series, v) in out.iter_mut().zip(values) {
                series.push(t, v);
            }
        }
        Ok(out)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")))
    }
}

/// Uniform `(xi, eta)` sample grid for profile norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub xi: (f64, f64),
    pub n_xi: usize,
    pub eta: (f64, f64),
    pub n_eta: usize,
}

impl ProfileGrid {
    fn validate(&self) -> Result<()> {
        if self.n_xi < 2 || self.n_eta < 2 || !(self.xi.1 > self.xi.0) || !(self.eta.1 > self.eta.0) {
            return Err(Error::InvalidArgument("profile grid needs two nodes per axis and positive extent".into()));
        }
        Ok(())
    }

    pub fn xi_spacing(&self) -> f64 {
        (self.xi.1 - self.xi.0) / (self.n_xi - 1) as f64
    }

    pub fn eta_spacing(&self) -> f64 {
        (self.eta.1 - self.eta.0) / (self.n_eta - 1) as f64
    }

    pub fn xi_nodes(&self) -> Vec<f64> {
        (0..self.n_xi).map(|i| self.xi.0 + i as f64 * self.xi_spacing()).collect()
    }

    pub fn eta_nodes(&self) -> Vec<f64> {
        (0..self.n_eta).map(|j| self.eta.0 + j as f64 * self.eta_spacing()).collect()
    }
}
