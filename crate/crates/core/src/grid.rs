use crate::error::{CoreError, Result};

/// Uniform periodic grid on the interval `(a, b)` with `m` nodes.
///
/// Node `j` sits at `x_j = a + j*h` for `j = 0..m-1` with `h = (b-a)/m`;
/// the node at `b` is identified with the one at `a`. `m` must be even so
/// the Fourier mode index runs symmetrically over `-m/2 .. m/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    m: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Grid> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(CoreError::InvalidGrid(format!(
                "need finite b > a, got a = {a}, b = {b}"
            )));
        }
        if m < 4 || m % 2 != 0 {
            return Err(CoreError::InvalidGrid(format!(
                "mode count must be even and at least 4, got {m}"
            )));
        }
        let h = (b - a) / m as f64;
        Ok(Grid { a, b, m, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of nodes (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh size `h = (b-a)/m`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Domain length `b - a`.
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Node coordinate `x_j`.
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j < self.m);
        self.a + j as f64 * self.h
    }

    /// All node coordinates in index order.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.node(j))
    }

    /// Signed Fourier mode index for storage slot `k` (natural FFT order):
    /// `k` for `k < m/2`, `k - m` otherwise.
    pub fn mode_index(&self, k: usize) -> i64 {
        debug_assert!(k < self.m);
        if k < self.m / 2 {
            k as i64
        } else {
            k as i64 - self.m as i64
        }
    }

    /// Spatial frequency `mu_l = 2*pi*l/(b-a)` for storage slot `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode_index(k) as f64 / self.length()
    }

    /// True when `other` refines this grid by an integer factor on the same
    /// interval, so that every node here is also a node of `other`.
    pub fn is_subgrid_of(&self, other: &Grid) -> bool {
        self.a == other.a && self.b == other.b && other.m % self.m == 0
    }
}
