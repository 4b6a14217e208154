//! Second-order forward-mode scalars.
//!
//! A [`Jet`] carries a value together with the first and second derivative
//! along one curve parameter: evaluating a closed-form expression on jets
//! yields exact directional derivatives, with no truncation error. This is
//! the machinery behind the analytic derivative mode of the anisotropy and
//! surface evaluators: charts are always differentiated along a single
//! direction, so a one-parameter jet is all that is ever needed, and mixed
//! second derivatives are recovered by polarization,
//!
//!   ∂²f(u,v) = ½·(∂²f(u+v, u+v) − ∂²f(u,u) − ∂²f(v,v)).
//!
//! The [`Real`] trait abstracts over `f64` and [`Jet`] so the same
//! closed-form formula body serves both plain evaluation and
//! differentiation.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, first, and second derivative with respect to one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    /// f(t₀)
    pub v: f64,
    /// f′(t₀)
    pub d: f64,
    /// f″(t₀)
    pub dd: f64,
}

impl Jet {
    /// Constant jet: both derivatives vanish.
    pub fn constant(v: f64) -> Self {
        Jet { v, d: 0.0, dd: 0.0 }
    }

    /// The curve parameter itself: value `v`, slope 1.
    pub fn variable(v: f64) -> Self {
        Jet { v, d: 1.0, dd: 0.0 }
    }

    /// Jet with a prescribed first derivative (second derivative zero).
    /// This is the seed for a point moving along a straight line.
    pub fn linear(v: f64, d: f64) -> Self {
        Jet { v, d, dd: 0.0 }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d: self.d + o.d,
            dd: self.dd + o.dd,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            d: self.d - o.d,
            dd: self.dd - o.dd,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
            dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        // f = g/h  ⟹  f′ = (g′ − f·h′)/h,  f″ = (g″ − 2f′h′ − f·h″)/h
        let v = self.v / o.v;
        let d = (self.d - v * o.d) / o.v;
        let dd = (self.dd - 2.0 * d * o.d - v * o.dd) / o.v;
        Jet { v, d, dd }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            d: -self.d,
            dd: -self.dd,
        }
    }
}

/// Scalar abstraction shared by `f64` and [`Jet`].
///
/// Formula bodies written against this trait evaluate either plain values
/// or first/second directional derivatives, depending on the seed.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn sqrt(self) -> Self;
    /// Primal (zeroth-order) part, used for guards and diagnostics.
    fn primal(self) -> f64;

    /// Integer power by repeated multiplication (exponent ≥ 0).
    fn powi(self, k: u32) -> Self {
        let mut acc = Self::from_f64(1.0);
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn primal(self) -> f64 {
        self
    }
}

impl Real for Jet {
    fn from_f64(x: f64) -> Self {
        Jet::constant(x)
    }
    fn sqrt(self) -> Self {
        // f = √g  ⟹  f′ = g′/(2f),  f″ = g″/(2f) − g′²/(4f³)
        let v = self.v.sqrt();
        let d = self.d / (2.0 * v);
        let dd = self.dd / (2.0 * v) - self.d * self.d / (4.0 * v * v * v);
        Jet { v, d, dd }
    }
    fn primal(self) -> f64 {
        self.v
    }
}

/// Dot product of fixed-size arrays of scalars.
pub fn dot<T: Real, const D: usize>(a: &[T; D], b: &[T; D]) -> T {
    let mut acc = a[0] * b[0];
    for i in 1..D {
        acc = acc + a[i] * b[i];
    }
    acc
}

/// Euclidean norm of a fixed-size array of scalars.
pub fn norm<T: Real, const D: usize>(a: &[T; D]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Reference second derivative by central differences.
    fn fd2(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
    }

    fn fd1(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    #[test]
    fn product_quotient_sqrt_match_finite_differences() {
        // f(t) = √(1 + t·(2 + t)) / (3 − t)  at t = 0.4
        let f = |t: f64| (1.0 + t * (2.0 + t)).sqrt() / (3.0 - t);
        let t = Jet::variable(0.4);
        let one = Jet::constant(1.0);
        let two = Jet::constant(2.0);
        let three = Jet::constant(3.0);
        let j = (one + t * (two + t)).sqrt() / (three - t);

        assert_relative_eq!(j.v, f(0.4), max_relative = 1e-15);
        assert_relative_eq!(j.d, fd1(f, 0.4, 1e-6), max_relative = 1e-8);
        assert_relative_eq!(j.dd, fd2(f, 0.4, 1e-4), max_relative = 1e-6);
    }

    #[test]
    fn powi_matches_closed_form() {
        let t = Jet::variable(1.3);
        let p = t.powi(5);
        assert_relative_eq!(p.v, 1.3f64.powi(5), max_relative = 1e-15);
        assert_relative_eq!(p.d, 5.0 * 1.3f64.powi(4), max_relative = 1e-14);
        assert_relative_eq!(p.dd, 20.0 * 1.3f64.powi(3), max_relative = 1e-14);
    }

    #[test]
    fn norm_jet_along_line_recovers_curvature_of_distance() {
        // |x₀ + t·w| with x₀ ⊥ w, |x₀| = 2, |w| = 1:
        // value 2, first derivative 0, second derivative 1/2 at t = 0.
        let x = [Jet::linear(2.0, 0.0), Jet::linear(0.0, 1.0)];
        let n = norm(&x);
        assert_relative_eq!(n.v, 2.0, max_relative = 1e-15);
        assert!(n.d.abs() < 1e-15);
        assert_relative_eq!(n.dd, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn polarization_recovers_mixed_partials() {
        // f(u, v) = u²v + 3uv²: ∂u∂v f = 2u + 6v at (u,v) = (1, 2) → 14.
        let f = |seed_u: f64, seed_v: f64| {
            let u = Jet {
                v: 1.0,
                d: seed_u,
                dd: 0.0,
            };
            let v = Jet {
                v: 2.0,
                d: seed_v,
                dd: 0.0,
            };
            let three = Jet::constant(3.0);
            (u * u * v + three * u * v * v).dd
        };
        let mixed = 0.5 * (f(1.0, 1.0) - f(1.0, 0.0) - f(0.0, 1.0));
        assert_relative_eq!(mixed, 14.0, max_relative = 1e-14);
    }
}
