use num_complex::Complex64;

/// Source of the electromagnetic potentials.
///
/// The potential matrix acting on the spinor is `W(t,x) = V(t,x) I - A1(t,x) sigma1`;
/// samplers return the scalar pair `(V, A1)` and, for time-dependent
/// potentials, the analytic pair `(dV/dt, dA1/dt)`. Integrators skip the
/// derivative terms entirely when `is_time_independent` returns true, so a
/// time-independent sampler may leave `sample_dt` at its zero default.
pub trait PotentialSampler: Sync {
    fn sample(&self, t: f64, x: f64) -> (f64, f64);

    fn sample_dt(&self, _t: f64, _x: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn is_time_independent(&self) -> bool;
}

/// Free evolution, `V = A1 = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl PotentialSampler for ZeroPotential {
    fn sample(&self, _t: f64, _x: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn is_time_independent(&self) -> bool {
        true
    }
}

/// Sampler built from closures, mainly for tests and custom drivers.
pub struct ClosurePotential<F, G>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
    G: Fn(f64, f64) -> (f64, f64) + Sync,
{
    pub value: F,
    pub time_derivative: G,
    pub time_independent: bool,
}

impl<F, G> PotentialSampler for ClosurePotential<F, G>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
    G: Fn(f64, f64) -> (f64, f64) + Sync,
{
    fn sample(&self, t: f64, x: f64) -> (f64, f64) {
        (self.value)(t, x)
    }

    fn sample_dt(&self, t: f64, x: f64) -> (f64, f64) {
        (self.time_derivative)(t, x)
    }

    fn is_time_independent(&self) -> bool {
        self.time_independent
    }
}

/// Potentials sampled at the grid nodes for one time level.
#[derive(Debug, Clone)]
pub struct NodalPotential {
    pub v: Vec<f64>,
    pub a1: Vec<f64>,
}

impl NodalPotential {
    pub fn zeros(n: usize) -> NodalPotential {
        NodalPotential {
            v: vec![0.0; n],
            a1: vec![0.0; n],
        }
    }

    pub fn sample_into(
        &mut self,
        sampler: &dyn PotentialSampler,
        grid: &crate::grid::Grid,
        t: f64,
    ) {
        for (j, x) in grid.nodes().enumerate() {
            let (v, a1) = sampler.sample(t, x);
            self.v[j] = v;
            self.a1[j] = a1;
        }
    }

    pub fn sample_dt_into(
        &mut self,
        sampler: &dyn PotentialSampler,
        grid: &crate::grid::Grid,
        t: f64,
    ) {
        for (j, x) in grid.nodes().enumerate() {
            let (v, a1) = sampler.sample_dt(t, x);
            self.v[j] = v;
            self.a1[j] = a1;
        }
    }

    /// `out = scale * W * input`, componentwise over the planes:
    /// `(W u)_1 = V u_1 - A1 u_2`, `(W u)_2 = V u_2 - A1 u_1`.
    pub fn apply_w(
        &self,
        input: (&[Complex64], &[Complex64]),
        output: (&mut [Complex64], &mut [Complex64]),
        scale: f64,
    ) {
        let (iu, id) = input;
        let (ou, od) = output;
        for j in 0..self.v.len() {
            let v = scale * self.v[j];
            let a = scale * self.a1[j];
            ou[j] = v * iu[j] - a * id[j];
            od[j] = v * id[j] - a * iu[j];
        }
    }
}
