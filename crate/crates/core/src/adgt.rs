//! Approximate duality gap machinery.
//!
//! The weight schedule `a_k, A_k`, the dual point `v_k` minimizing the
//! aggregated lower model `m_k`, the lower bound `L_k ≤ f(x*)` and the
//! anchor-free gap potential `Φ_k = A_k U_k − Σ a_i f(x_i) − m_k(v_k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Weight schedule with `a_0 = A_0 = 1` and `a_k² / (A_k (μ₀ + μ A_k)) = 1/L`,
/// where `μ₀ = L − μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    k: usize,
    a: f64,
    big_a: f64,
    prev_big_a: f64,
    a_prime: Option<f64>,
    mu0: f64,
    mu: f64,
    l: f64,
}

impl Schedule {
    /// Schedule at `k = 0`. Requires `0 ≤ μ < L`.
    pub fn new(mu: f64, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) || !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "schedule needs 0 <= mu and 0 < L (got mu = {mu}, L = {l})"
            )));
        }
        if mu >= l {
            return Err(Error::DegenerateConditioning { mu, l });
        }
        Ok(Schedule {
            k: 0,
            a: 1.0,
            big_a: 1.0,
            prev_big_a: 0.0,
            a_prime: None,
            mu0: l - mu,
            mu,
            l,
        })
    }

    /// The schedule at `k + 1`: `a_{k+1}` is the positive root of
    /// `(L − μ) a² − (μ₀ + 2μA_k) a − A_k(μ₀ + μA_k) = 0`.
    pub fn advance(&self) -> Schedule {
        let prev = self.big_a;
        let quad = self.l - self.mu;
        let lin = self.mu0 + 2.0 * self.mu * prev;
        let constant = prev * (self.mu0 + self.mu * prev);
        // All three coefficients are positive, so the '+' root has no cancellation.
        let a = (lin + (lin * lin + 4.0 * quad * constant).sqrt()) / (2.0 * quad);
        let big_a = prev + a;
        let a_prime = a * (self.mu0 + self.mu * prev) / (self.mu0 + self.mu * big_a);
        Schedule {
            k: self.k + 1,
            a,
            big_a,
            prev_big_a: prev,
            a_prime: Some(a_prime),
            ..*self
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `a_k`
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `A_k = Σ_{j ≤ k} a_j`
    pub fn cumulative(&self) -> f64 {
        self.big_a
    }

    /// `A_{k−1}` (zero at `k = 0`).
    pub fn prev_cumulative(&self) -> f64 {
        self.prev_big_a
    }

    /// `a′_k = a_k (μ₀ + μA_{k−1}) / (μ₀ + μA_k)`, undefined at `k = 0`.
    pub fn a_prime(&self) -> Option<f64> {
        self.a_prime
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Total quadratic weight `μ₀ + μA_k` of `m_k`.
    pub fn weight(&self) -> f64 {
        self.mu0 + self.mu * self.big_a
    }

    fn prev_weight(&self) -> f64 {
        self.mu0 + self.mu * self.prev_big_a
    }

    /// `a_k² / (A_k(μ₀ + μA_k))`, which the schedule pins to `1/L`.
    pub fn ratio(&self) -> f64 {
        self.a * self.a / (self.big_a * self.weight())
    }

    /// Coefficient of `‖∇f(x_k)‖²` in the per-step gap change bound.
    pub fn gradient_coefficient(&self) -> f64 {
        self.a * self.a / (2.0 * self.weight()) - self.big_a / (2.0 * self.l)
    }
}

/// Checked single step of the schedule recursion.
pub fn schedule_advance(s: &Schedule) -> Result<Schedule> {
    if s.mu >= s.l {
        return Err(Error::DegenerateConditioning { mu: s.mu, l: s.l });
    }
    Ok(s.advance())
}

/// Running dual state: `v_k`, `m_k(v_k)` and the weighted sums that define them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundState {
    pub v: Vector,
    pub m_at_v: f64,
    pub sum_af: f64,
    pub sum_agrad: Vector,
    pub sum_ax: Vector,
    pub x0: Vector,
    /// `m_k(v_k) − m_{k−1}(v_{k−1})` from the last update.
    pub last_dm: f64,
}

impl LowerBoundState {
    /// State before iteration 0: `v_{−1} = x₀` with `m_{−1}(v_{−1}) = 0`.
    pub fn new(x0: Vector) -> Self {
        let n = x0.len();
        LowerBoundState {
            v: x0.clone(),
            m_at_v: 0.0,
            sum_af: 0.0,
            sum_agrad: Vector::zeros(n),
            sum_ax: Vector::zeros(n),
            x0,
            last_dm: 0.0,
        }
    }

    /// Folds in the query `(x_k, ∇f(x_k), f(x_k))` with `s` already at step `k`.
    pub fn update(&self, s: &Schedule, x_k: &Vector, g_k: &Vector, f_xk: f64) -> LowerBoundState {
        let a = s.a();
        let w_prev = s.prev_weight();
        let w = s.weight();

        let mut v = self.v.scaled(w_prev / w);
        v.axpy(s.mu() * a / w, x_k);
        v.axpy(-a / w, g_k);

        let dv = v.distance_sq(&self.v);
        let vx = &v - x_k;
        let dm = 0.5 * w_prev * dv + a * g_k.dot(&vx) + 0.5 * a * s.mu() * vx.norm_sq();

        let mut sum_agrad = self.sum_agrad.clone();
        sum_agrad.axpy(a, g_k);
        let mut sum_ax = self.sum_ax.clone();
        sum_ax.axpy(a, x_k);

        LowerBoundState {
            v,
            m_at_v: self.m_at_v + dm,
            sum_af: self.sum_af + a * f_xk,
            sum_agrad,
            sum_ax,
            x0: self.x0.clone(),
            last_dm: dm,
        }
    }

    /// `v_k = (μ₀x₀ + μΣa_i x_i − Σa_i ∇f(x_i)) / (μ₀ + μA_k)` from the sums.
    pub fn closed_form_v(&self, s: &Schedule) -> Vector {
        let mut num = self.x0.scaled(s.mu0());
        num.axpy(s.mu(), &self.sum_ax);
        num.axpy(-1.0, &self.sum_agrad);
        num.scaled(1.0 / s.weight())
    }
}

/// Equivalent of [`LowerBoundState::update`] under the operation name used by the drivers.
pub fn v_update(state: &LowerBoundState, s: &Schedule, x_k: &Vector, g_k: &Vector, f_xk: f64) -> LowerBoundState {
    state.update(s, x_k, g_k, f_xk)
}

/// One gradient query kept for direct evaluation of `m_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub a: f64,
    pub x: Vector,
    pub g: Vector,
}

/// Direct evaluation `m_k(u) = Σ a_i(⟨g_i, u − x_i⟩ + μ/2‖u − x_i‖²) + μ₀/2‖u − x₀‖²`.
///
/// Also returns the sum of absolute term magnitudes, the natural scale for
/// comparing against the recursive value.
pub fn m_value_with_scale(history: &[QueryRecord], mu: f64, mu0: f64, x0: &Vector, u: &Vector) -> (f64, f64) {
    let mut total = 0.5 * mu0 * u.distance_sq(x0);
    let mut magnitude = total.abs();
    for q in history {
        let d = u - &q.x;
        let lin = q.a * q.g.dot(&d);
        let quad = 0.5 * q.a * mu * d.norm_sq();
        total += lin + quad;
        magnitude += lin.abs() + quad.abs();
    }
    (total, magnitude)
}

pub fn m_value(history: &[QueryRecord], s: &Schedule, x0: &Vector, u: &Vector) -> f64 {
    m_value_with_scale(history, s.mu(), s.mu0(), x0, u).0
}

/// `L_k = (Σa_i f(x_i) + m_k(v_k)) / A_k − μ₀/(2A_k) ‖x₀ − x*‖²`
pub fn lower_bound(state: &LowerBoundState, s: &Schedule, x_star: &Vector) -> f64 {
    let a = s.cumulative();
    (state.sum_af + state.m_at_v) / a - 0.5 * s.mu0() / a * state.x0.distance_sq(x_star)
}

/// `Φ_k = A_k U_k − Σ a_i f(x_i) − m_k(v_k)`; equals `A_k G_k − μ₀/2 ‖x₀ − x*‖²`.
///
/// Direct evaluation loses about `ε·A_k·|f|` to cancellation. The drivers
/// accumulate it through [`potential_step`] instead.
pub fn potential(state: &LowerBoundState, s: &Schedule, upper: f64) -> f64 {
    s.cumulative() * upper - state.sum_af - state.m_at_v
}

/// `Φ_k − Φ_{k−1}` from value differences measured at `x_k`:
/// `A_k(f(y_k) − f(x_k)) − A_{k−1}(f(y_{k−1}) − f(x_k)) − (m_k(v_k) − m_{k−1}(v_{k−1}))`.
pub fn potential_step(s: &Schedule, dy_k: f64, dy_prev: f64, dm: f64) -> f64 {
    s.cumulative() * dy_k - s.prev_cumulative() * dy_prev - dm
}

/// `⟨g_k, (A_{k−1} + a′_k) x_k − A_{k−1} y_{k−1} − a′_k v_{k−1}⟩`
pub fn coupling_residual(s: &Schedule, x_k: &Vector, g_k: &Vector, y_prev: &Vector, v_prev: &Vector) -> Result<f64> {
    let a_prime = s
        .a_prime()
        .ok_or_else(|| Error::InvalidInput("coupling residual is undefined at k = 0".into()))?;
    // Same vector as (A_{k−1} + a′)x − A_{k−1}y − a′v, without the large cancelling terms.
    let mut w = (x_k - y_prev).scaled(s.prev_cumulative());
    w.axpy(a_prime, &(x_k - v_prev));
    Ok(g_k.dot(&w))
}

/// Certificate values reported at one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub upper: f64,
    pub lower: Option<f64>,
    pub gap: Option<f64>,
    pub potential: f64,
    pub coupling_residual: Option<f64>,
    pub bound_rhs: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn schedule_rejects_degenerate_conditioning() {
        assert!(matches!(
            Schedule::new(2.0, 2.0),
            Err(Error::DegenerateConditioning { .. })
        ));
        assert!(Schedule::new(-1.0, 2.0).is_err());
        assert!(Schedule::new(0.0, 0.0).is_err());
    }

    #[test]
    fn schedule_smooth_case() {
        let s0 = Schedule::new(0.0, 3.7).unwrap();
        assert_eq!((s0.a(), s0.cumulative()), (1.0, 1.0));
        let s1 = schedule_advance(&s0).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(close(s1.a(), golden, 1e-15));
        assert!(close(s1.cumulative(), 1.0 + golden, 1e-15));
        // a² = A₁ + a → a₂ = (1 + √(1 + 4A₁))/2
        let s2 = s1.advance();
        let a2 = (1.0 + (1.0 + 4.0 * (1.0 + golden)).sqrt()) / 2.0;
        assert!(close(s2.a(), a2, 1e-14));
        assert!(close(s2.a(), 2.1935, 1e-4));
        assert!(close(s2.cumulative(), 4.8116, 1e-4));
        assert!(s2.cumulative() >= 3.0);
    }

    #[test]
    fn schedule_strongly_convex_case() {
        let s1 = Schedule::new(1.0, 2.0).unwrap().advance();
        let a1 = (3.0 + 17f64.sqrt()) / 2.0;
        assert!(close(s1.a(), a1, 1e-15));
        assert!(close(s1.cumulative(), 1.0 + a1, 1e-15));
        let ap = a1 * 2.0 / (1.0 + (1.0 + a1));
        assert!(close(s1.a_prime().unwrap(), ap, 1e-15));
        assert!(close(s1.a_prime().unwrap(), 1.28078, 1e-5));
    }

    #[test]
    fn initial_weight_satisfies_ratio() {
        let s = Schedule::new(0.3, 5.0).unwrap();
        assert!(close(s.ratio(), 1.0 / 5.0, 1e-16));
        assert!(s.a_prime().is_none());
    }

    fn diag12_k0() -> (Schedule, LowerBoundState) {
        // A = diag(1,2), b = 0, x₀ = (1,1), μ = 1, L = 2
        let s = Schedule::new(1.0, 2.0).unwrap();
        let x0 = Vector::new(vec![1.0, 1.0]);
        let g0 = Vector::new(vec![1.0, 2.0]);
        let st = LowerBoundState::new(x0.clone()).update(&s, &x0, &g0, 1.5);
        (s, st)
    }

    #[test]
    fn hand_checked_first_iteration() {
        let (s, st) = diag12_k0();
        assert_eq!(st.v, Vector::new(vec![0.5, 0.0]));
        assert!(close(st.m_at_v, -1.25, 1e-15));
        let lb = lower_bound(&st, &s, &Vector::zeros(2));
        assert!(close(lb, -0.75, 1e-15));
        let phi = potential(&st, &s, 0.125);
        assert!(close(phi, -0.125, 1e-15));
        let gap = 0.125 - lb;
        assert!(close(gap, 0.875, 1e-15));
        assert!(close(s.cumulative() * gap - phi, 1.0, 1e-15));
    }

    #[test]
    fn m_value_direct_matches_recursion() {
        let (s, st) = diag12_k0();
        let hist = vec![QueryRecord {
            a: 1.0,
            x: Vector::new(vec![1.0, 1.0]),
            g: Vector::new(vec![1.0, 2.0]),
        }];
        let x0 = Vector::new(vec![1.0, 1.0]);
        assert!(close(m_value(&hist, &s, &x0, &st.v), -1.25, 1e-15));
        // μ = 0, u = x₀ gives zero
        let s0 = Schedule::new(0.0, 2.0).unwrap();
        assert_eq!(m_value(&hist, &s0, &x0, &x0), 0.0);
        // v minimizes m
        let mut bumped = st.v.clone();
        bumped[0] += 1e-4;
        assert!(m_value(&hist, &s, &x0, &st.v) - m_value(&hist, &s, &x0, &bumped) <= 0.0);
    }

    #[test]
    fn v_recursion_collapses_when_mu_is_zero() {
        let s = Schedule::new(0.0, 4.0).unwrap().advance();
        let prev = LowerBoundState::new(Vector::new(vec![1.0, -1.0]));
        let x = Vector::new(vec![0.3, 0.2]);
        let g = Vector::new(vec![2.0, 1.0]);
        let next = v_update(&prev, &s, &x, &g, 0.0);
        let expected = Vector::lin_comb(1.0, &prev.v, -s.a() / 4.0, &g);
        assert!((&next.v - &expected).norm() < 1e-15);
    }

    #[test]
    fn coupling_residual_cases() {
        let s = Schedule::new(0.5, 3.0).unwrap().advance();
        let y = Vector::new(vec![1.0, 2.0]);
        let v = Vector::new(vec![-1.0, 0.5]);
        let ap = s.a_prime().unwrap();
        let prev = s.prev_cumulative();
        let x = Vector::lin_comb(prev / (prev + ap), &y, ap / (prev + ap), &v);
        let g = Vector::new(vec![0.7, -0.2]);
        assert!(coupling_residual(&s, &x, &g, &y, &v).unwrap().abs() < 1e-15);
        assert_eq!(coupling_residual(&s, &x, &Vector::zeros(2), &y, &v).unwrap(), 0.0);
        let s0 = Schedule::new(0.5, 3.0).unwrap();
        assert!(coupling_residual(&s0, &x, &g, &y, &v).is_err());
    }

    #[test]
    fn closed_form_v_matches_recursion() {
        let s0 = Schedule::new(0.25, 4.0).unwrap();
        let x0 = Vector::new(vec![1.0, 2.0, 3.0]);
        let mut st = LowerBoundState::new(x0.clone());
        let mut s = s0;
        for k in 0..20 {
            if k > 0 {
                s = s.advance();
            }
            let x = Vector::new(vec![(k as f64).sin(), (k as f64).cos(), 0.1 * k as f64]);
            let g = Vector::new(vec![x[1] - 0.5, x[0] + x[2], -x[1]]);
            st = st.update(&s, &x, &g, 0.0);
            let cf = st.closed_form_v(&s);
            assert!((&cf - &st.v).norm() <= 1e-10 * (1.0 + st.v.norm()));
        }
    }
}
