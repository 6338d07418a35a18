//! Symmetric rank-2 tensors and isotropic Hooke's law.
//!
//! Components are stored in the fixed order `[xx, yy, zz, xy, yz, xz]` with
//! tensor (not engineering) shear, so `xy` is `ε_xy` and never `2ε_xy`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Six unique components of a symmetric 3×3 tensor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensor2 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub yz: f64,
    pub xz: f64,
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2 { xx: 0.0, yy: 0.0, zz: 0.0, xy: 0.0, yz: 0.0, xz: 0.0 };
    pub const IDENTITY: SymTensor2 = SymTensor2 { xx: 1.0, yy: 1.0, zz: 1.0, xy: 0.0, yz: 0.0, xz: 0.0 };

    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64, yz: f64, xz: f64) -> Self {
        SymTensor2 { xx, yy, zz, xy, yz, xz }
    }

    pub fn diag(xx: f64, yy: f64, zz: f64) -> Self {
        SymTensor2 { xx, yy, zz, ..Self::ZERO }
    }

    /// Builds from the storage order `[xx, yy, zz, xy, yz, xz]`.
    pub fn from_array(c: [f64; 6]) -> Self {
        SymTensor2 { xx: c[0], yy: c[1], zz: c[2], xy: c[3], yz: c[4], xz: c[5] }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.xy, self.yz, self.xz]
    }

    /// Symmetric part of a full matrix.
    pub fn from_matrix(m: &[[f64; 3]; 3]) -> Self {
        SymTensor2 {
            xx: m[0][0],
            yy: m[1][1],
            zz: m[2][2],
            xy: 0.5 * (m[0][1] + m[1][0]),
            yz: 0.5 * (m[1][2] + m[2][1]),
            xz: 0.5 * (m[0][2] + m[2][0]),
        }
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        [[self.xx, self.xy, self.xz], [self.xy, self.yy, self.yz], [self.xz, self.yz, self.zz]]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// Full contraction `a:b = a_ij b_ij`.
    pub fn ddot(&self, other: &SymTensor2) -> f64 {
        self.xx * other.xx
            + self.yy * other.yy
            + self.zz * other.zz
            + 2.0 * (self.xy * other.xy + self.yz * other.yz + self.xz * other.xz)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `t·n` for a (not necessarily unit) vector.
    pub fn dot_vec(&self, n: [f64; 3]) -> [f64; 3] {
        [
            self.xx * n[0] + self.xy * n[1] + self.xz * n[2],
            self.xy * n[0] + self.yy * n[1] + self.yz * n[2],
            self.xz * n[0] + self.yz * n[1] + self.zz * n[2],
        ]
    }

    /// `ξᵀ t ξ`.
    pub fn quadratic_form(&self, v: [f64; 3]) -> f64 {
        let tv = self.dot_vec(v);
        tv[0] * v[0] + tv[1] * v[1] + tv[2] * v[2]
    }

    /// Swaps the roles of the x and y axes.
    pub fn swap_xy(&self) -> Self {
        SymTensor2 { xx: self.yy, yy: self.xx, zz: self.zz, xy: self.xy, yz: self.xz, xz: self.yz }
    }

    pub fn scale(&self, s: f64) -> Self {
        SymTensor2::from_array(self.to_array().map(|c| c * s))
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2 {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            yz: self.yz + o.yz,
            xz: self.xz + o.xz,
        }
    }
}

impl AddAssign for SymTensor2 {
    fn add_assign(&mut self, o: SymTensor2) {
        *self = *self + o;
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2 {
            xx: self.xx - o.xx,
            yy: self.yy - o.yy,
            zz: self.zz - o.zz,
            xy: self.xy - o.xy,
            yz: self.yz - o.yz,
            xz: self.xz - o.xz,
        }
    }
}

impl Neg for SymTensor2 {
    type Output = SymTensor2;
    fn neg(self) -> SymTensor2 {
        self.scale(-1.0)
    }
}

impl Mul<SymTensor2> for f64 {
    type Output = SymTensor2;
    fn mul(self, t: SymTensor2) -> SymTensor2 {
        t.scale(self)
    }
}

/// Isotropic linear elastic constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticModel {
    youngs_modulus: f64,
    poisson_ratio: f64,
}

impl ElasticModel {
    /// Fails unless `E > 0` and `-1 < ν < 0.5`; the bounds are where `C` becomes singular.
    pub fn new(youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        if !(youngs_modulus.is_finite() && youngs_modulus > 0.0) {
            return Err(Error::SingularModel(format!("Young's modulus must be positive, got {youngs_modulus}")));
        }
        if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
            return Err(Error::SingularModel(format!(
                "Poisson ratio must lie in (-1, 0.5), got {poisson_ratio}"
            )));
        }
        Ok(ElasticModel { youngs_modulus, poisson_ratio })
    }

    /// Tin bronze, E = 130 GPa, ν = 0.34.
    pub fn tin_bronze() -> Self {
        ElasticModel { youngs_modulus: 130e9, poisson_ratio: 0.34 }
    }

    /// Inconel-718, E = 208 GPa, ν = 0.28.
    pub fn inconel_718() -> Self {
        ElasticModel { youngs_modulus: 208e9, poisson_ratio: 0.28 }
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.poisson_ratio
    }

    /// Lamé's first parameter λ.
    pub fn lambda(&self) -> f64 {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    }

    /// Shear modulus μ.
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// `σ = C:ε`.
    pub fn apply_stiffness(&self, e: &SymTensor2) -> SymTensor2 {
        let (young, nu) = (self.youngs_modulus, self.poisson_ratio);
        let k = young / (1.0 + nu);
        let vol = nu / (1.0 - 2.0 * nu) * e.trace();
        SymTensor2 {
            xx: k * (vol + e.xx),
            yy: k * (vol + e.yy),
            zz: k * (vol + e.zz),
            xy: k * e.xy,
            yz: k * e.yz,
            xz: k * e.xz,
        }
    }

    /// `ε = S:σ`.
    pub fn apply_compliance(&self, s: &SymTensor2) -> SymTensor2 {
        let (young, nu) = (self.youngs_modulus, self.poisson_ratio);
        let tr = nu * s.trace();
        let k = (1.0 + nu) / young;
        SymTensor2 {
            xx: ((1.0 + nu) * s.xx - tr) / young,
            yy: ((1.0 + nu) * s.yy - tr) / young,
            zz: ((1.0 + nu) * s.zz - tr) / young,
            xy: k * s.xy,
            yz: k * s.yz,
            xz: k * s.xz,
        }
    }
}

/// Free-function form of [`ElasticModel::apply_stiffness`].
pub fn apply_stiffness(e: &SymTensor2, m: &ElasticModel) -> SymTensor2 {
    m.apply_stiffness(e)
}

/// Free-function form of [`ElasticModel::apply_compliance`].
pub fn apply_compliance(s: &SymTensor2, m: &ElasticModel) -> SymTensor2 {
    m.apply_compliance(s)
}

/// Weighting used by field inner products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// Plain `a:b` (the L² product).
    Identity,
    /// `(C:a):b`, the energy product.
    Stiffness(ElasticModel),
}

impl Weight {
    pub fn apply(&self, t: &SymTensor2) -> SymTensor2 {
        match self {
            Weight::Identity => *t,
            Weight::Stiffness(m) => m.apply_stiffness(t),
        }
    }
}
