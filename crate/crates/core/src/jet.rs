//! First-order forward-mode derivatives along a single motion direction.
//!
//! A [`Jet`] carries a value and its time derivative; arithmetic applies the
//! product and quotient rules. The composite avoidance fields are built from
//! these so the frame rate is exact rather than finite-differenced.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::so3::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub v: Vec3,
    pub d: Vec3,
}

impl Jet {
    pub fn new(v: f64, d: f64) -> Self {
        Jet { v, d }
    }

    pub fn constant(v: f64) -> Self {
        Jet { v, d: 0.0 }
    }

    pub fn recip(self) -> Jet {
        Jet::new(1.0 / self.v, -self.d / (self.v * self.v))
    }

    /// Applies a scalar function given its value and derivative at `self.v`.
    pub fn map(self, f: f64, df: f64) -> Jet {
        Jet::new(f, df * self.d)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        Jet::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d)
    }
}

impl Jet3 {
    pub fn new(v: Vec3, d: Vec3) -> Self {
        Jet3 { v, d }
    }

    pub fn constant(v: Vec3) -> Self {
        Jet3 { v, d: Vec3::zeros() }
    }

    /// Value `f(p)` with derivative `J(p) * p_dot`.
    pub fn from_jacobian(v: Vec3, jac: &Mat3, p_dot: &Vec3) -> Self {
        Jet3 { v, d: jac * p_dot }
    }

    pub fn dot(&self, o: &Jet3) -> Jet {
        Jet::new(self.v.dot(&o.v), self.d.dot(&o.v) + self.v.dot(&o.d))
    }

    pub fn cross(&self, o: &Jet3) -> Jet3 {
        Jet3::new(self.v.cross(&o.v), self.d.cross(&o.v) + self.v.cross(&o.d))
    }

    pub fn scale(&self, s: Jet) -> Jet3 {
        Jet3::new(self.v * s.v, self.d * s.v + self.v * s.d)
    }

    pub fn norm(&self) -> Jet {
        let n = self.v.norm();
        Jet::new(n, self.v.dot(&self.d) / n)
    }

    pub fn normalized(&self) -> Jet3 {
        let n = self.v.norm();
        let u = self.v / n;
        Jet3::new(u, (self.d - u * u.dot(&self.d)) / n)
    }

    pub fn rotated(&self, r: &Mat3) -> Jet3 {
        Jet3::new(r * self.v, r * self.d)
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, o: Jet3) -> Jet3 {
        Jet3::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, o: Jet3) -> Jet3 {
        Jet3::new(self.v - o.v, self.d - o.d)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        Jet3::new(-self.v, -self.d)
    }
}
