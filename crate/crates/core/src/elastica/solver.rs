//! Newton-KKT continuation solver for the clamped-pinned discrete elastica.
//!
//! All iterations run on the unit rod (`L = 1`, `R_f = 1`); results are mapped
//! back with `U = R_f / L * U_hat` and `f = R_f / L^2 * f_hat`, which makes the
//! length scaling law exact at fixed segment count.

use super::contact::friction_bound;
use super::{ContactSolution, RodShape, RodSpec, SolverConfig};
use crate::error::Error;
use crate::linalg::{Dense, SymTridiagonal};
use crate::scalar::{Real, Vec2};

/// Failure of [`solve_min_energy_shape`].
#[derive(Clone, Debug, PartialEq)]
pub enum SolveError<T> {
    UnreachableEndpoint {
        endpoint: Vec2<T>,
        length: T,
    },
    InvalidInput(String),
    /// The best iterate found, tagged `converged = false`.
    NoConvergence(Box<ContactSolution<T>>),
}

impl<T: Real> std::fmt::Display for SolveError<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        Error::from(self.clone()).fmt(f)
    }
}

impl<T: Real> std::error::Error for SolveError<T> {}

impl<T: Real> From<SolveError<T>> for Error {
    fn from(e: SolveError<T>) -> Self {
        match e {
            SolveError::UnreachableEndpoint { endpoint, length } => Error::UnreachableEndpoint {
                x: endpoint.x.to_f64_lossy(),
                z: endpoint.z.to_f64_lossy(),
                length: length.to_f64_lossy(),
            },
            SolveError::InvalidInput(msg) => Error::InvalidSpec(msg),
            SolveError::NoConvergence(best) => Error::NoConvergence {
                iterations: best.iterations,
                constraint_residual: best.constraint_residual.to_f64_lossy(),
                stationarity_residual: best.stationarity_residual.to_f64_lossy(),
            },
        }
    }
}

/// Minimum flexural energy shape with contact #2 pinned at `endpoint`.
///
/// Tracks the solution branch by walking the endpoint along a straight line
/// from the flat configuration `(L, 0)` to the target.
pub fn solve_min_energy_shape<T: Real>(
    rod: &RodSpec<T>,
    endpoint: Vec2<T>,
    cfg: &SolverConfig<T>,
) -> Result<ContactSolution<T>, SolveError<T>> {
    check_inputs(rod, endpoint, cfg)?;
    let start = State::flat(rod.segments);
    let target = endpoint.scale(rod.length.recip());
    let out = track(start, Vec2::new(T::one(), T::zero()), target, cfg, cfg.continuation_steps);
    finish(rod, endpoint, out, cfg)
}

/// Continues from an existing converged solution of the same rod to a new endpoint.
pub fn solve_from<T: Real>(
    rod: &RodSpec<T>,
    previous: &ContactSolution<T>,
    endpoint: Vec2<T>,
    cfg: &SolverConfig<T>,
) -> Result<ContactSolution<T>, SolveError<T>> {
    check_inputs(rod, endpoint, cfg)?;
    if previous.shape.segments() != rod.segments {
        return Err(SolveError::InvalidInput("previous solution has a different segment count".into()));
    }
    let scale_f = rod.length * rod.length / rod.rigidity;
    let start = State { phi: previous.shape.phi.clone(), mu: previous.contact_force.scale(scale_f), iterations: 0 };
    let from = previous.endpoint.scale(rod.length.recip());
    let target = endpoint.scale(rod.length.recip());
    let steps = steps_for_distance(from, target, cfg.continuation_steps);
    let out = track(start, from, target, cfg, steps);
    finish(rod, endpoint, out, cfg)
}

fn check_inputs<T: Real>(rod: &RodSpec<T>, endpoint: Vec2<T>, cfg: &SolverConfig<T>) -> Result<(), SolveError<T>> {
    rod.validate().map_err(|e| SolveError::InvalidInput(e.to_string()))?;
    cfg.validate().map_err(|e| SolveError::InvalidInput(e.to_string()))?;
    if !rod.reaches(endpoint, cfg.tol_c) {
        return Err(SolveError::UnreachableEndpoint { endpoint, length: rod.length });
    }
    Ok(())
}

/// Short warm-started hops need fewer homotopy steps than a solve from flat.
fn steps_for_distance<T: Real>(from: Vec2<T>, to: Vec2<T>, nominal: usize) -> usize {
    let d = (to - from).norm().to_f64_lossy();
    let per_step = 0.05;
    ((d / per_step).ceil() as usize).clamp(1, nominal.max(1))
}

fn finish<T: Real>(
    rod: &RodSpec<T>,
    endpoint: Vec2<T>,
    out: Tracked<T>,
    cfg: &SolverConfig<T>,
) -> Result<ContactSolution<T>, SolveError<T>> {
    let l = rod.length;
    let r = rod.rigidity;
    let shape = RodShape { phi: out.state.phi, seg_len: rod.seg_len() };
    let energy = shape.energy(r);
    let contact_force = out.state.mu.scale(r / (l * l));
    let mu_min = friction_bound(&shape, contact_force);
    let near_singular = endpoint.z > T::zero() && (l - endpoint.norm()) <= cfg.tol_c * l;
    let sol = ContactSolution {
        shape,
        endpoint,
        energy,
        contact_force,
        mu_min,
        constraint_residual: out.residuals.constraint,
        stationarity_residual: out.residuals.stationarity,
        iterations: out.state.iterations,
        converged: out.converged,
        near_singular,
    };
    if sol.converged {
        Ok(sol)
    } else {
        Err(SolveError::NoConvergence(Box::new(sol)))
    }
}

#[derive(Clone, Debug)]
struct State<T> {
    phi: Vec<T>,
    /// Endpoint multipliers on the unit rod.
    mu: Vec2<T>,
    iterations: usize,
}

impl<T: Real> State<T> {
    fn flat(n: usize) -> Self {
        Self { phi: vec![T::zero(); n + 1], mu: Vec2::zero(), iterations: 0 }
    }

    fn is_flat(&self) -> bool {
        self.phi.iter().all(|p| *p == T::zero())
    }
}

#[derive(Clone, Copy, Debug)]
struct Residuals<T> {
    constraint: T,
    stationarity: T,
}

struct Tracked<T> {
    state: State<T>,
    residuals: Residuals<T>,
    converged: bool,
}

/// Unit-rod problem: `min (N/2) sum dphi^2` s.t. `h sum (cos, sin)(phi_j) = target`.
struct Problem<'a, T> {
    n: usize,
    h: T,
    inv_h: T,
    target: Vec2<T>,
    cfg: &'a SolverConfig<T>,
}

struct Kkt<T> {
    /// Lagrangian gradient w.r.t. phi_1..phi_N.
    grad: Vec<T>,
    /// Endpoint mismatch G(phi) - target.
    gap: Vec2<T>,
}

impl<'a, T: Real> Problem<'a, T> {
    fn new(n: usize, target: Vec2<T>, cfg: &'a SolverConfig<T>) -> Self {
        let nn = T::from_usize_lossy(n);
        Self { n, h: nn.recip(), inv_h: nn, target, cfg }
    }

    fn endpoint(&self, phi: &[T]) -> Vec2<T> {
        phi[..self.n].iter().fold(Vec2::zero(), |r, &p| r + Vec2::from_angle(p)).scale(self.h)
    }

    fn energy(&self, phi: &[T]) -> T {
        let s = phi.windows(2).fold(T::zero(), |a, w| a + (w[1] - w[0]) * (w[1] - w[0]));
        T::lit(0.5) * self.inv_h * s
    }

    /// Gradient of the energy w.r.t. phi_1..phi_N.
    fn energy_grad(&self, phi: &[T]) -> Vec<T> {
        (1..=self.n)
            .map(|k| {
                let back = phi[k] - phi[k - 1];
                let fwd = if k < self.n { phi[k + 1] - phi[k] } else { T::zero() };
                self.inv_h * (back - fwd)
            })
            .collect()
    }

    /// Columns of the constraint Jacobian restricted to phi_1..phi_N.
    fn jacobian(&self, phi: &[T]) -> (Vec<T>, Vec<T>) {
        let mut jx = vec![T::zero(); self.n];
        let mut jz = vec![T::zero(); self.n];
        for k in 1..self.n {
            let (s, c) = phi[k].sin_cos();
            jx[k - 1] = -self.h * s;
            jz[k - 1] = self.h * c;
        }
        (jx, jz)
    }

    fn kkt(&self, phi: &[T], mu: Vec2<T>) -> Kkt<T> {
        let mut grad = self.energy_grad(phi);
        for k in 1..self.n {
            let (s, c) = phi[k].sin_cos();
            grad[k - 1] = grad[k - 1] - self.h * (-mu.x * s + mu.z * c);
        }
        Kkt { grad, gap: self.endpoint(phi) - self.target }
    }

    fn residuals(&self, k: &Kkt<T>) -> Residuals<T> {
        let g = k.grad.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        Residuals { constraint: k.gap.x.abs().max(k.gap.z.abs()), stationarity: g * self.inv_h }
    }

    fn merit(&self, k: &Kkt<T>) -> T {
        let g2 = k.grad.iter().fold(T::zero(), |a, v| a + *v * *v) * self.inv_h * self.inv_h;
        T::lit(0.5) * (g2 + k.gap.dot(k.gap))
    }

    fn converged(&self, r: &Residuals<T>) -> bool {
        r.constraint <= self.cfg.tol_c && r.stationarity <= self.cfg.tol_g
    }

    /// Hessian of the Lagrangian; tridiagonal because each constraint is separable.
    fn lagrangian_hessian(&self, phi: &[T], mu: Vec2<T>) -> SymTridiagonal<T> {
        let two = T::lit(2.0);
        let mut diag = vec![two * self.inv_h; self.n];
        diag[self.n - 1] = self.inv_h;
        for k in 1..self.n {
            let (s, c) = phi[k].sin_cos();
            diag[k - 1] = diag[k - 1] + self.h * (mu.x * c + mu.z * s);
        }
        SymTridiagonal { diag, off: vec![-self.inv_h; self.n - 1] }
    }

    /// Newton direction `(d_phi, d_mu)` for the KKT system.
    fn newton_direction(&self, phi: &[T], mu: Vec2<T>, k: &Kkt<T>) -> Option<(Vec<T>, Vec2<T>)> {
        let w = self.lagrangian_hessian(phi, mu);
        let (jx, jz) = self.jacobian(phi);
        if let Some(fac) = w.factor(T::lit(1e-12)) {
            let mut a = k.grad.clone();
            fac.solve_in_place(&mut a);
            let mut bx = jx.clone();
            fac.solve_in_place(&mut bx);
            let mut bz = jz.clone();
            fac.solve_in_place(&mut bz);
            let dot = |u: &[T], v: &[T]| u.iter().zip(v).fold(T::zero(), |s, (p, q)| s + *p * *q);
            let (sxx, sxz, szz) = (dot(&jx, &bx), dot(&jx, &bz), dot(&jz, &bz));
            let rx = dot(&jx, &a) - k.gap.x;
            let rz = dot(&jz, &a) - k.gap.z;
            let det = sxx * szz - sxz * sxz;
            let scale = (sxx * szz).abs() + sxz * sxz;
            if det.abs() > T::lit(1e-12) * scale && det.is_finite() {
                let dmx = (szz * rx - sxz * rz) / det;
                let dmz = (sxx * rz - sxz * rx) / det;
                let dphi = (0..self.n).map(|i| -a[i] + bx[i] * dmx + bz[i] * dmz).collect();
                return Some((dphi, Vec2::new(dmx, dmz)));
            }
            if scale > T::zero() && det.abs() <= T::lit(1e-12) * scale {
                // rank-deficient constraint Jacobian; the dense path cannot help either
                return None;
            }
        }
        self.dense_direction(&w, &jx, &jz, k)
    }

    fn dense_direction(&self, w: &SymTridiagonal<T>, jx: &[T], jz: &[T], k: &Kkt<T>) -> Option<(Vec<T>, Vec2<T>)> {
        let n = self.n;
        let mut m = Dense::zeros(n + 2);
        for i in 0..n {
            m.set(i, i, w.diag[i]);
            if i + 1 < n {
                m.set(i, i + 1, w.off[i]);
                m.set(i + 1, i, w.off[i]);
            }
            m.set(i, n, -jx[i]);
            m.set(i, n + 1, -jz[i]);
            m.set(n, i, jx[i]);
            m.set(n + 1, i, jz[i]);
        }
        let mut rhs: Vec<T> = k.grad.iter().map(|g| -*g).collect();
        rhs.push(-k.gap.x);
        rhs.push(-k.gap.z);
        m.lu_solve(&mut rhs)?;
        let dmu = Vec2::new(rhs[n], rhs[n + 1]);
        rhs.truncate(n);
        Some((rhs, dmu))
    }

    /// Damped Newton on the KKT residual. Returns the converged state.
    fn newton(&self, mut st: State<T>) -> Result<(State<T>, Residuals<T>), State<T>> {
        let mut k = self.kkt(&st.phi, st.mu);
        let mut res = self.residuals(&k);
        let mut merit = self.merit(&k);
        let mut polished = false;
        for _ in 0..self.cfg.max_iter {
            if self.converged(&res) && polished {
                return Ok((st, res));
            }
            let conv_before = self.converged(&res);
            let Some((dphi, dmu)) = self.newton_direction(&st.phi, st.mu, &k) else {
                return if conv_before { Ok((st, res)) } else { Err(st) };
            };
            st.iterations += 1;
            let mut alpha = T::one();
            let mut accepted = None;
            for _ in 0..40 {
                let mut phi = st.phi.clone();
                for i in 0..self.n {
                    phi[i + 1] = phi[i + 1] + alpha * dphi[i];
                }
                let mu = st.mu + dmu.scale(alpha);
                let kn = self.kkt(&phi, mu);
                let mn = self.merit(&kn);
                if mn.is_finite() && mn <= (T::one() - T::lit(1e-4) * alpha) * merit {
                    accepted = Some((phi, mu, kn, mn));
                    break;
                }
                if conv_before {
                    break;
                }
                alpha = alpha * T::lit(0.5);
            }
            match accepted {
                Some((phi, mu, kn, mn)) => {
                    st.phi = phi;
                    st.mu = mu;
                    res = self.residuals(&kn);
                    k = kn;
                    merit = mn;
                }
                None if conv_before => return Ok((st, res)),
                None => return Err(st),
            }
            if conv_before {
                polished = true;
            }
        }
        if self.converged(&res) {
            Ok((st, res))
        } else {
            Err(st)
        }
    }

    /// Augmented-Lagrangian descent used when Newton cannot start, e.g. from
    /// the taut flat rod where the constraint Jacobian loses rank.
    fn augmented_lagrangian(&self, mut st: State<T>) -> State<T> {
        let n = self.n;
        if st.is_flat() {
            // upward first buckling mode breaks the flat-state symmetry
            let amp = T::lit(1e-2);
            let two_pi = T::lit(2.0) * T::PI();
            for k in 1..=n {
                st.phi[k] = amp * (two_pi * T::from_usize_lossy(k) * self.h).sin();
            }
        }
        let mut rho = T::lit(1e2);
        let mut mu = st.mu;
        let mut prev_gap = T::infinity();
        for _outer in 0..30 {
            let phi_model = |phi: &[T], mu_t: Vec2<T>| -> T {
                let gap = self.endpoint(phi) - self.target;
                self.energy(phi) - mu_t.dot(gap) + T::lit(0.5) * rho * gap.dot(gap)
            };
            for _inner in 0..60 {
                let gap = self.endpoint(&st.phi) - self.target;
                let mu_t = mu - gap.scale(rho);
                let grad = self.kkt(&st.phi, mu_t).grad;
                let gnorm = grad.iter().fold(T::zero(), |m, v| m.max(v.abs())) * self.inv_h;
                if gnorm <= self.cfg.tol_g.max(T::lit(1e-9)) {
                    break;
                }
                let w = self.lagrangian_hessian(&st.phi, mu_t);
                let (jx, jz) = self.jacobian(&st.phi);
                let dir = self.penalised_direction(&w, &jx, &jz, rho, &grad);
                let Some(d) = dir else { break };
                let f0 = phi_model(&st.phi, mu);
                let slope = d.iter().zip(&grad).fold(T::zero(), |a, (p, q)| a + *p * *q);
                let mut alpha = T::one();
                let mut moved = false;
                for _ in 0..50 {
                    let mut phi = st.phi.clone();
                    for i in 0..n {
                        phi[i + 1] = phi[i + 1] + alpha * d[i];
                    }
                    if phi_model(&phi, mu) <= f0 + T::lit(1e-4) * alpha * slope {
                        st.phi = phi;
                        moved = true;
                        break;
                    }
                    alpha = alpha * T::lit(0.5);
                }
                st.iterations += 1;
                if !moved {
                    break;
                }
            }
            let gap = self.endpoint(&st.phi) - self.target;
            mu = mu - gap.scale(rho);
            let g = gap.x.abs().max(gap.z.abs());
            if g <= T::lit(1e-7) {
                break;
            }
            if g > T::lit(0.25) * prev_gap {
                rho = rho * T::lit(10.0);
            }
            prev_gap = g;
        }
        st.mu = mu;
        st
    }

    /// Solves `(W + shift I + rho J^T J) d = -grad` with the smallest shift
    /// from a geometric ladder that makes `W + shift I` positive definite.
    /// The rank-2 penalty term is folded in with the Woodbury identity.
    fn penalised_direction(&self, w: &SymTridiagonal<T>, jx: &[T], jz: &[T], rho: T, grad: &[T]) -> Option<Vec<T>> {
        let diag_max = w.diag.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut shift = T::zero();
        for _ in 0..40 {
            let shifted = SymTridiagonal { diag: w.diag.iter().map(|d| *d + shift).collect(), off: w.off.clone() };
            if let Some(fac) = shifted.factor(T::lit(1e-12)).filter(|f| f.negative_count() == 0) {
                let sr = rho.sqrt();
                let mut d: Vec<T> = grad.iter().map(|g| -*g).collect();
                fac.solve_in_place(&mut d);
                let mut ux: Vec<T> = jx.iter().map(|v| *v * sr).collect();
                let mut uz: Vec<T> = jz.iter().map(|v| *v * sr).collect();
                let (ux0, uz0) = (ux.clone(), uz.clone());
                fac.solve_in_place(&mut ux);
                fac.solve_in_place(&mut uz);
                let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (p, q)| s + *p * *q);
                // capacitance matrix I + U^T T^-1 U
                let (cxx, cxz, czz) = (T::one() + dot(&ux0, &ux), dot(&ux0, &uz), T::one() + dot(&uz0, &uz));
                let (rx, rz) = (dot(&ux0, &d), dot(&uz0, &d));
                let det = cxx * czz - cxz * cxz;
                let yx = (czz * rx - cxz * rz) / det;
                let yz = (cxx * rz - cxz * rx) / det;
                for i in 0..d.len() {
                    d[i] = d[i] - ux[i] * yx - uz[i] * yz;
                }
                if d.iter().all(|v| v.is_finite()) {
                    return Some(d);
                }
            }
            shift = if shift == T::zero() { T::lit(1e-6) * diag_max } else { shift * T::lit(10.0) };
        }
        None
    }

    /// Corrector: Newton first, augmented Lagrangian warm-up if Newton fails.
    fn correct(&self, st: State<T>) -> Result<(State<T>, Residuals<T>), State<T>> {
        let fallback_from = st.clone();
        if !st.is_flat() {
            if let Ok(done) = self.newton(st) {
                return Ok(done);
            }
        }
        let warm = self.augmented_lagrangian(fallback_from);
        self.newton(warm)
    }
}

fn track<T: Real>(start: State<T>, from: Vec2<T>, to: Vec2<T>, cfg: &SolverConfig<T>, steps: usize) -> Tracked<T> {
    let n = start.phi.len() - 1;
    let probe = Problem::new(n, from, cfg);
    let k0 = probe.kkt(&start.phi, start.mu);
    let mut residuals = probe.residuals(&k0);
    let mut state = start;
    if from == to && probe.converged(&residuals) {
        return Tracked { state, residuals, converged: true };
    }
    let nominal = T::from_usize_lossy(steps).recip();
    let min_step = nominal * T::lit(2f64.powi(-10));
    let budget = cfg.max_iter * (steps + 10);
    let mut s = T::zero();
    let mut ds = nominal;
    let mut prev: Option<(State<T>, T)> = None;
    let mut iterations = state.iterations;
    let mut best = state.clone();
    while s < T::one() {
        let s_next = (s + ds).min(T::one());
        let p = if s_next == T::one() { to } else { from + (to - from).scale(s_next) };
        let problem = Problem::new(n, p, cfg);
        // secant predictor from the last two accepted points
        let mut guess = state.clone();
        if let Some((ref old, s_old)) = prev {
            let r = (s_next - s) / (s - s_old);
            if r.is_finite() && r <= T::lit(2.0) {
                for i in 0..guess.phi.len() {
                    guess.phi[i] = state.phi[i] + r * (state.phi[i] - old.phi[i]);
                }
                guess.mu = state.mu + (state.mu - old.mu).scale(r);
            }
        }
        guess.iterations = 0;
        let mut outcome = problem.correct(guess);
        if outcome.is_err() && prev.is_some() {
            let mut plain = state.clone();
            plain.iterations = 0;
            outcome = problem.correct(plain);
        }
        match outcome {
            Ok((mut next, res)) => {
                iterations += next.iterations;
                next.iterations = iterations;
                prev = Some((state, s));
                state = next;
                best = state.clone();
                residuals = res;
                s = s_next;
                ds = (ds * T::lit(2.0)).min(nominal);
            }
            Err(failed) => {
                iterations += failed.iterations;
                ds = ds * T::lit(0.5);
                if ds < min_step || iterations > budget {
                    best.iterations = iterations;
                    let k = problem.kkt(&failed.phi, failed.mu);
                    let r = problem.residuals(&k);
                    let mut st = failed;
                    st.iterations = iterations;
                    // report the iterate closest to the requested endpoint
                    let (st, r) = if r.constraint.is_finite() { (st, r) } else { (best, residuals) };
                    return Tracked { state: st, residuals: r, converged: false };
                }
            }
        }
    }
    state.iterations = iterations;
    Tracked { state, residuals, converged: true }
}
