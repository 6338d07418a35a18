//! Dense univariate polynomials with ascending coefficients.

use std::ops::{Add, Mul, Sub};

/// `Σ c[k] x^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly1 {
    pub c: Vec<f64>,
}

impl Poly1 {
    pub fn new(c: Vec<f64>) -> Self {
        Poly1 { c }
    }

    pub fn zero() -> Self {
        Poly1 { c: Vec::new() }
    }

    pub fn constant(v: f64) -> Self {
        Poly1 { c: vec![v] }
    }

    /// Coefficient of `x^k` (zero beyond the stored length).
    pub fn coef(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    pub fn derivative(&self) -> Poly1 {
        Poly1 { c: self.c.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect() }
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Poly1 {
        let mut c = Vec::with_capacity(self.c.len() + 1);
        c.push(0.0);
        c.extend(self.c.iter().enumerate().map(|(k, &v)| v / (k + 1) as f64));
        Poly1 { c }
    }

    /// `∫_a^b p(x) dx`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// `x·p(x)`.
    pub fn mul_x(&self) -> Poly1 {
        if self.c.is_empty() {
            return Poly1::zero();
        }
        let mut c = vec![0.0];
        c.extend_from_slice(&self.c);
        Poly1 { c }
    }

    /// `p(x)/x`, dropping the constant term; callers must ensure it vanishes.
    pub fn div_x(&self) -> Poly1 {
        Poly1 { c: self.c.iter().skip(1).copied().collect() }
    }

    pub fn scale(&self, s: f64) -> Poly1 {
        Poly1 { c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Add for &Poly1 {
    type Output = Poly1;
    fn add(self, o: &Poly1) -> Poly1 {
        let n = self.c.len().max(o.c.len());
        Poly1 { c: (0..n).map(|k| self.coef(k) + o.coef(k)).collect() }
    }
}

impl Sub for &Poly1 {
    type Output = Poly1;
    fn sub(self, o: &Poly1) -> Poly1 {
        let n = self.c.len().max(o.c.len());
        Poly1 { c: (0..n).map(|k| self.coef(k) - o.coef(k)).collect() }
    }
}

impl Mul<&Poly1> for f64 {
    type Output = Poly1;
    fn mul(self, p: &Poly1) -> Poly1 {
        p.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calculus() {
        let p = Poly1::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.derivative().c, vec![-2.0, 6.0]);
        assert!((p.integrate(0.0, 1.0) - (1.0 - 1.0 + 1.0)).abs() < 1e-15);
        assert_eq!(p.mul_x().div_x(), p);
        assert_eq!((&p - &p).max_abs_coef(), 0.0);
    }
}
