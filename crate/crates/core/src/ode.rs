// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Classical fixed-step fourth-order Runge–Kutta.

use nalgebra::Vector3;

use crate::operator::{c, CMatrix};

/// A state that supports `self + a * other`.
pub trait OdeState: Clone {
    fn axpy(&self, a: f64, other: &Self) -> Self;
}

impl OdeState for CMatrix {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + other * c(a, 0.0)
    }
}

impl OdeState for Vector3<f64> {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + other * a
    }
}

impl<T: OdeState> OdeState for Vec<T> {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self.iter().zip(other).map(|(x, y)| x.axpy(a, y)).collect()
    }
}

/// One RK4 step of `dy/dt = f(t, y)`. Coefficients are sampled at `t`,
/// `t + h/2` (twice) and `t + h`.
pub fn rk4_step<T, E, F>(f: &F, t: f64, y: &T, h: f64) -> Result<T, E>
where
    T: OdeState,
    F: Fn(f64, &T) -> Result<T, E>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &y.axpy(0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &y.axpy(0.5 * h, &k2))?;
    let k4 = f(t + h, &y.axpy(h, &k3))?;
    Ok(y.axpy(h / 6.0, &k1)
        .axpy(h / 3.0, &k2)
        .axpy(h / 3.0, &k3)
        .axpy(h / 6.0, &k4))
}
