//! Forward-mode dual numbers: `(value, derivative)` pairs propagated by the
//! chain rule. One sweep yields an exact first derivative with respect to a
//! single seed variable.

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    #[inline]
    pub fn constant(v: f64) -> Self {
        Self {
            value: v,
            deriv: 0.0,
        }
    }

    #[inline]
    pub fn seeded(v: f64) -> Self {
        Self {
            value: v,
            deriv: 1.0,
        }
    }

    #[inline]
    pub fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            deriv: self.deriv + rhs.deriv,
        }
    }

    #[inline]
    pub fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            deriv: self.deriv - rhs.deriv,
        }
    }

    #[inline]
    pub fn mul(self, rhs: Self) -> Self {
        Self {
            value: self.value * rhs.value,
            deriv: self.deriv * rhs.value + self.value * rhs.deriv,
        }
    }

    pub fn div(self, rhs: Self) -> Result<Self, EvalError> {
        if rhs.value == 0.0 {
            return Err(EvalError::Domain("division by zero".into()));
        }
        Ok(Self {
            value: self.value / rhs.value,
            deriv: (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value),
        })
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self {
            value: -self.value,
            deriv: -self.deriv,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self {
            value: e,
            deriv: self.deriv * e,
        }
    }

    pub fn ln(self) -> Result<Self, EvalError> {
        if self.value <= 0.0 {
            return Err(EvalError::Domain(format!(
                "log of non-positive value {}",
                self.value
            )));
        }
        Ok(Self {
            value: self.value.ln(),
            deriv: self.deriv / self.value,
        })
    }

    pub fn sin(self) -> Self {
        Self {
            value: self.value.sin(),
            deriv: self.deriv * self.value.cos(),
        }
    }

    pub fn cos(self) -> Self {
        Self {
            value: self.value.cos(),
            deriv: -self.deriv * self.value.sin(),
        }
    }

    pub fn sqrt(self) -> Result<Self, EvalError> {
        if self.value < 0.0 {
            return Err(EvalError::Domain(format!(
                "sqrt of negative value {}",
                self.value
            )));
        }
        let s = self.value.sqrt();
        let deriv = if self.deriv == 0.0 {
            0.0
        } else if self.value == 0.0 {
            return Err(EvalError::Domain(
                "derivative of sqrt at zero diverges".into(),
            ));
        } else {
            self.deriv / (2.0 * s)
        };
        Ok(Self { value: s, deriv })
    }

    /// `self ^ rhs`, differentiating whichever side carries a derivative.
    ///
    /// With a derivative-free exponent this reduces to the power rule, which
    /// also covers negative bases. A varying exponent needs a positive base.
    pub fn pow(self, rhs: Self) -> Result<Self, EvalError> {
        let value = self.value.powf(rhs.value);
        let deriv = if rhs.deriv == 0.0 {
            if self.deriv == 0.0 {
                0.0
            } else {
                rhs.value * self.value.powf(rhs.value - 1.0) * self.deriv
            }
        } else {
            if self.value <= 0.0 {
                return Err(EvalError::Domain(format!(
                    "power with varying exponent needs positive base, got {}",
                    self.value
                )));
            }
            value * (rhs.deriv * self.value.ln() + rhs.value * self.deriv / self.value)
        };
        Ok(Self { value, deriv })
    }
}
