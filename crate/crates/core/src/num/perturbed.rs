use super::scalar::{Elementary, NumError, NumResult, Scalar};

/// `value + ε delta` with `ε² = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed<S: Scalar = f64> {
    pub value: S,
    pub delta: S,
}

impl<S: Scalar> Perturbed<S> {
    pub fn new(value: S, delta: S) -> Self {
        Perturbed { value, delta }
    }

    /// Unperturbed lift of `value`.
    pub fn lift(value: S) -> Self {
        let delta = S::constant(&value.shape(), 0.0);
        Perturbed { value, delta }
    }

    /// `value + ε`.
    pub fn seed(value: S) -> Self {
        let delta = S::constant(&value.shape(), 1.0);
        Perturbed { value, delta }
    }

    /// `f(v + εd) = f(v) + ε f'(v) d` given `f(v)` and `f'(v)`.
    fn chain(&self, fv: S, dfv: S) -> NumResult<Self> {
        Ok(Perturbed { value: fv, delta: dfv.try_mul(&self.delta)? })
    }
}

impl<S: Scalar> Scalar for Perturbed<S> {
    type Shape = S::Shape;

    fn shape(&self) -> S::Shape {
        self.value.shape()
    }

    fn constant(shape: &S::Shape, c: f64) -> Self {
        Perturbed { value: S::constant(shape, c), delta: S::constant(shape, 0.0) }
    }

    fn re(&self) -> f64 {
        self.value.re()
    }

    fn try_add(&self, rhs: &Self) -> NumResult<Self> {
        Ok(Perturbed { value: self.value.try_add(&rhs.value)?, delta: self.delta.try_add(&rhs.delta)? })
    }

    fn try_sub(&self, rhs: &Self) -> NumResult<Self> {
        Ok(Perturbed { value: self.value.try_sub(&rhs.value)?, delta: self.delta.try_sub(&rhs.delta)? })
    }

    fn try_mul(&self, rhs: &Self) -> NumResult<Self> {
        let delta = self.value.try_mul(&rhs.delta)?.try_add(&self.delta.try_mul(&rhs.value)?)?;
        Ok(Perturbed { value: self.value.try_mul(&rhs.value)?, delta })
    }

    fn try_div(&self, rhs: &Self) -> NumResult<Self> {
        if rhs.value.re() == 0.0 {
            return Err(NumError::DivisionByZero);
        }
        let q = self.value.try_div(&rhs.value)?;
        let delta = self.delta.try_sub(&q.try_mul(&rhs.delta)?)?.try_div(&rhs.value)?;
        Ok(Perturbed { value: q, delta })
    }

    fn neg(&self) -> Self {
        Perturbed { value: self.value.neg(), delta: self.delta.neg() }
    }

    fn scale(&self, c: f64) -> Self {
        Perturbed { value: self.value.scale(c), delta: self.delta.scale(c) }
    }

    fn elem(&self, f: Elementary) -> NumResult<Self> {
        let v = &self.value;
        let one = S::constant(&v.shape(), 1.0);
        match f {
            Elementary::Sin => self.chain(v.elem(Elementary::Sin)?, v.elem(Elementary::Cos)?),
            Elementary::Cos => self.chain(v.elem(Elementary::Cos)?, v.elem(Elementary::Sin)?.neg()),
            Elementary::Exp => {
                let e = v.elem(Elementary::Exp)?;
                self.chain(e.clone(), e)
            }
            Elementary::Ln => {
                if v.re() <= 0.0 {
                    return Err(NumError::Domain { func: "log", at: v.re() });
                }
                self.chain(v.elem(Elementary::Ln)?, one.try_div(v)?)
            }
            Elementary::Sqrt => {
                if v.re() <= 0.0 {
                    return Err(NumError::Domain { func: "sqrt", at: v.re() });
                }
                let s = v.elem(Elementary::Sqrt)?;
                let ds = one.try_div(&s.scale(2.0))?;
                self.chain(s, ds)
            }
            Elementary::Tan => {
                let t = v.elem(Elementary::Tan)?;
                let dt = one.try_add(&t.try_mul(&t)?)?;
                self.chain(t, dt)
            }
            Elementary::Tanh => {
                let t = v.elem(Elementary::Tanh)?;
                let dt = one.try_sub(&t.try_mul(&t)?)?;
                self.chain(t, dt)
            }
        }
    }

    fn powf(&self, b: &Self) -> NumResult<Self> {
        if self.re() <= 0.0 {
            return Err(NumError::Domain { func: "pow", at: self.re() });
        }
        self.elem(Elementary::Ln)?.try_mul(b)?.elem(Elementary::Exp)
    }
}

/// `∂f/∂x^i` at `x` by seeding coordinate `i`.
pub fn perturb_derivative<S, F>(f: F, x: &[S], i: usize) -> NumResult<S>
where
    S: Scalar,
    F: Fn(&[Perturbed<S>]) -> NumResult<Perturbed<S>>,
{
    let args: Vec<Perturbed<S>> = x.iter().enumerate().map(|(j, v)| if j == i { Perturbed::seed(v.clone()) } else { Perturbed::lift(v.clone()) }).collect();
    Ok(f(&args)?.delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Taylor;
    use approx::assert_relative_eq;

    #[test]
    fn product_rule() {
        let d = perturb_derivative(|v| v[0].try_mul(&v[1]), &[2.0, 3.0], 0).unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn elementary_derivatives_at_a_point() {
        let x = 0.7_f64;
        let cases = [
            (Elementary::Sin, x.cos()),
            (Elementary::Cos, -x.sin()),
            (Elementary::Exp, x.exp()),
            (Elementary::Ln, 1.0 / x),
            (Elementary::Sqrt, 0.5 / x.sqrt()),
            (Elementary::Tan, 1.0 / (x.cos() * x.cos())),
            (Elementary::Tanh, 1.0 - x.tanh() * x.tanh()),
        ];
        for (f, expect) in cases {
            let d = perturb_derivative(|v| v[0].elem(f), &[x], 0).unwrap();
            assert_relative_eq!(d, expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn quotient_rule() {
        let d = perturb_derivative(|v| v[0].try_div(&v[1]), &[1.0, 2.0], 1).unwrap();
        assert_relative_eq!(d, -0.25);
    }

    #[test]
    fn nested_gives_derivative_of_each_coefficient() {
        // f(u, t) = sin(u t + u): ∂u of the series equals the series of ∂u f.
        let u = 0.3;
        let pt = Perturbed::new(Taylor::variable(4, 0.0), Taylor::constant(&(4, ()), 0.0));
        let pu = Perturbed::seed(Taylor::constant(&(4, ()), u));
        let f = pu.try_mul(&pt).unwrap().try_add(&pu).unwrap().elem(Elementary::Sin).unwrap();
        // ∂u f = (t + 1) cos(u t + u)
        let tt = Taylor::variable(4, 0.0);
        let inner = tt.scale(u).try_add(&Taylor::constant(&(4, ()), u)).unwrap();
        let expect = Taylor::variable(4, 1.0).try_mul(&inner.elem(Elementary::Cos).unwrap()).unwrap();
        for r in 0..=4 {
            assert_relative_eq!(*f.delta.coeff(r), *expect.coeff(r), epsilon = 1e-14);
        }
    }

    #[test]
    fn seeding_the_same_variable_twice_gives_second_derivative() {
        let x = Perturbed::new(Perturbed::seed(1.5), Perturbed::new(1.0, 0.0));
        let f = x.elem(Elementary::Exp).unwrap();
        assert_relative_eq!(f.delta.delta, 1.5f64.exp(), max_relative = 1e-15);
    }

    #[test]
    fn division_by_pure_perturbation_fails() {
        let a = Perturbed::new(1.0, 0.0);
        let b = Perturbed::new(0.0, 1.0);
        assert_eq!(a.try_div(&b), Err(NumError::DivisionByZero));
    }
}
