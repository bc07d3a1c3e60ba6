use smallvec::{smallvec, SmallVec};

use super::scalar::{Elementary, NumError, NumResult, Scalar};

/// Inline capacity covers jets up to degree 7 without allocating.
type Coeffs<S> = SmallVec<[S; 8]>;

/// Truncated Taylor series `Σ c_r t^r`, `r = 0..=degree`, with normalized
/// coefficients `c_r = f^(r)(0)/r!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor<S: Scalar = f64> {
    coeffs: Coeffs<S>,
}

impl<S: Scalar> Taylor<S> {
    /// Panics on an empty coefficient list.
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a Taylor series needs at least one coefficient");
        Taylor { coeffs: Coeffs::from_vec(coeffs) }
    }

    pub fn constant_of(degree: usize, c: S) -> Self {
        let zero = S::constant(&c.shape(), 0.0);
        let mut coeffs: Coeffs<S> = smallvec![zero; degree + 1];
        coeffs[0] = c;
        Taylor { coeffs }
    }

    /// `x0 + t`.
    pub fn variable(degree: usize, x0: S) -> Self {
        let one = S::constant(&x0.shape(), 1.0);
        let mut t = Self::constant_of(degree, x0);
        if degree > 0 {
            t.coeffs[1] = one;
        }
        t
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs.into_vec()
    }

    pub fn coeff(&self, r: usize) -> &S {
        &self.coeffs[r]
    }

    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    /// `r`-th derivative at zero, `r! c_r`.
    pub fn derivative_at_zero(&self, r: usize) -> S {
        self.coeffs[r].scale(super::factorial(r))
    }

    /// Drops every coefficient above `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        assert!(degree <= self.degree(), "cannot truncate upward");
        Taylor { coeffs: self.coeffs[..=degree].iter().cloned().collect() }
    }

    /// `d/dt` of the series; the degree drops by one. Degree-0 input gives 0.
    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Taylor { coeffs: smallvec![S::constant(&self.coeffs[0].shape(), 0.0)] };
        }
        let coeffs = self.coeffs[1..].iter().enumerate().map(|(j, c)| c.scale((j + 1) as f64)).collect();
        Taylor { coeffs }
    }

    /// Antiderivative vanishing at zero; the degree rises by one.
    pub fn integral(&self) -> Self {
        let mut coeffs = Coeffs::with_capacity(self.coeffs.len() + 1);
        coeffs.push(S::constant(&self.coeffs[0].shape(), 0.0));
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.scale(1.0 / (j + 1) as f64));
        }
        Taylor { coeffs }
    }

    /// Horner evaluation at a real time.
    pub fn eval(&self, t: f64) -> S {
        let mut acc = self.coeffs[self.degree()].clone();
        for c in self.coeffs[..self.degree()].iter().rev() {
            acc = acc.scale(t).try_add(c).expect("coefficients share a shape");
        }
        acc
    }

    fn check(&self, rhs: &Self) -> NumResult<()> {
        if self.degree() != rhs.degree() {
            return Err(NumError::DegreeMismatch { left: self.degree(), right: rhs.degree() });
        }
        Ok(())
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(&S, &S) -> NumResult<S>) -> NumResult<Self> {
        self.check(rhs)?;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| f(a, b)).collect::<NumResult<_>>()?;
        Ok(Taylor { coeffs })
    }

    fn zero_coeff(&self) -> S {
        S::constant(&self.coeffs[0].shape(), 0.0)
    }

    /// Joint recurrence for (sin, cos).
    fn sin_cos(&self) -> NumResult<(Self, Self)> {
        let a = &self.coeffs;
        let mut s: Coeffs<S> = smallvec![a[0].elem(Elementary::Sin)?];
        let mut c: Coeffs<S> = smallvec![a[0].elem(Elementary::Cos)?];
        for k in 1..a.len() {
            let mut sk = self.zero_coeff();
            let mut ck = self.zero_coeff();
            for j in 1..=k {
                let ja = a[j].scale(j as f64);
                sk = sk.try_add(&ja.try_mul(&c[k - j])?)?;
                ck = ck.try_sub(&ja.try_mul(&s[k - j])?)?;
            }
            s.push(sk.scale(1.0 / k as f64));
            c.push(ck.scale(1.0 / k as f64));
        }
        Ok((Taylor { coeffs: s }, Taylor { coeffs: c }))
    }

    /// `b' = (1 + sign b²) a'`, shared by tan (`sign = 1`) and tanh (`sign = -1`).
    fn tan_like(&self, b0: S, sign: f64) -> NumResult<Self> {
        let a = &self.coeffs;
        let one = S::constant(&b0.shape(), 1.0);
        let mut b: Coeffs<S> = smallvec![b0];
        let mut u: Coeffs<S> = smallvec![one.try_add(&b[0].try_mul(&b[0])?.scale(sign))?];
        for k in 1..a.len() {
            let mut bk = self.zero_coeff();
            for j in 1..=k {
                bk = bk.try_add(&a[j].scale(j as f64).try_mul(&u[k - j])?)?;
            }
            b.push(bk.scale(1.0 / k as f64));
            let mut sq = self.zero_coeff();
            for l in 0..=k {
                sq = sq.try_add(&b[l].try_mul(&b[k - l])?)?;
            }
            u.push(sq.scale(sign));
        }
        Ok(Taylor { coeffs: b })
    }
}

impl<S: Scalar> Scalar for Taylor<S> {
    type Shape = (usize, S::Shape);

    fn shape(&self) -> Self::Shape {
        (self.degree(), self.coeffs[0].shape())
    }

    fn constant(shape: &Self::Shape, c: f64) -> Self {
        Taylor::constant_of(shape.0, S::constant(&shape.1, c))
    }

    fn re(&self) -> f64 {
        self.coeffs[0].re()
    }

    fn try_add(&self, rhs: &Self) -> NumResult<Self> {
        self.zip_with(rhs, |a, b| a.try_add(b))
    }

    fn try_sub(&self, rhs: &Self) -> NumResult<Self> {
        self.zip_with(rhs, |a, b| a.try_sub(b))
    }

    fn try_mul(&self, rhs: &Self) -> NumResult<Self> {
        self.check(rhs)?;
        let (a, b) = (&self.coeffs, &rhs.coeffs);
        let mut coeffs = Coeffs::with_capacity(a.len());
        for k in 0..a.len() {
            let mut ck = a[0].try_mul(&b[k])?;
            for j in 1..=k {
                ck = ck.try_add(&a[j].try_mul(&b[k - j])?)?;
            }
            coeffs.push(ck);
        }
        Ok(Taylor { coeffs })
    }

    fn try_div(&self, rhs: &Self) -> NumResult<Self> {
        self.check(rhs)?;
        let (a, b) = (&self.coeffs, &rhs.coeffs);
        if b[0].re() == 0.0 {
            return Err(NumError::DivisionByZero);
        }
        let mut c: Coeffs<S> = Coeffs::with_capacity(a.len());
        for k in 0..a.len() {
            let mut num = a[k].clone();
            for j in 1..=k {
                num = num.try_sub(&b[j].try_mul(&c[k - j])?)?;
            }
            c.push(num.try_div(&b[0])?);
        }
        Ok(Taylor { coeffs: c })
    }

    fn neg(&self) -> Self {
        Taylor { coeffs: self.coeffs.iter().map(S::neg).collect() }
    }

    fn scale(&self, c: f64) -> Self {
        Taylor { coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect() }
    }

    fn elem(&self, f: Elementary) -> NumResult<Self> {
        let a = &self.coeffs;
        let n = a.len();
        match f {
            Elementary::Sin => Ok(self.sin_cos()?.0),
            Elementary::Cos => Ok(self.sin_cos()?.1),
            Elementary::Exp => {
                let mut b: Coeffs<S> = smallvec![a[0].elem(Elementary::Exp)?];
                for k in 1..n {
                    let mut bk = self.zero_coeff();
                    for j in 1..=k {
                        bk = bk.try_add(&a[j].scale(j as f64).try_mul(&b[k - j])?)?;
                    }
                    b.push(bk.scale(1.0 / k as f64));
                }
                Ok(Taylor { coeffs: b })
            }
            Elementary::Ln => {
                if a[0].re() <= 0.0 {
                    return Err(NumError::Domain { func: "log", at: a[0].re() });
                }
                let mut b: Coeffs<S> = smallvec![a[0].elem(Elementary::Ln)?];
                for k in 1..n {
                    let mut acc = self.zero_coeff();
                    for j in 1..k {
                        acc = acc.try_add(&b[j].scale(j as f64).try_mul(&a[k - j])?)?;
                    }
                    let num = a[k].try_sub(&acc.scale(1.0 / k as f64))?;
                    b.push(num.try_div(&a[0])?);
                }
                Ok(Taylor { coeffs: b })
            }
            Elementary::Sqrt => {
                if n > 1 && a[0].re() <= 0.0 {
                    return Err(NumError::Domain { func: "sqrt", at: a[0].re() });
                }
                let b0 = a[0].elem(Elementary::Sqrt)?;
                let two_b0 = b0.scale(2.0);
                let mut b: Coeffs<S> = smallvec![b0];
                for k in 1..n {
                    let mut num = a[k].clone();
                    for j in 1..k {
                        num = num.try_sub(&b[j].try_mul(&b[k - j])?)?;
                    }
                    b.push(num.try_div(&two_b0)?);
                }
                Ok(Taylor { coeffs: b })
            }
            Elementary::Tan => self.tan_like(a[0].elem(Elementary::Tan)?, 1.0),
            Elementary::Tanh => self.tan_like(a[0].elem(Elementary::Tanh)?, -1.0),
        }
    }

    fn powf(&self, b: &Self) -> NumResult<Self> {
        if self.re() <= 0.0 {
            return Err(NumError::Domain { func: "pow", at: self.re() });
        }
        self.elem(Elementary::Ln)?.try_mul(b)?.elem(Elementary::Exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn t(c: &[f64]) -> Taylor {
        Taylor::new(c.to_vec())
    }

    fn close(a: &Taylor, b: &[f64], tol: f64) {
        assert_eq!(a.degree() + 1, b.len());
        for (x, y) in a.coeffs().iter().zip(b) {
            assert_relative_eq!(*x, *y, epsilon = tol, max_relative = tol);
        }
    }

    #[test]
    fn product_of_two_lines() {
        let p = t(&[1.0, 2.0, 0.0]).try_mul(&t(&[3.0, 1.0, 0.0])).unwrap();
        close(&p, &[3.0, 7.0, 2.0], 0.0);
    }

    #[test]
    fn exp_of_identity_matches_reciprocal_factorials() {
        let e = Taylor::variable(4, 0.0).elem(Elementary::Exp).unwrap();
        close(&e, &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0], 1e-15);
    }

    #[test]
    fn sin_cos_of_identity() {
        let x = Taylor::variable(5, 0.0);
        close(&x.elem(Elementary::Sin).unwrap(), &[0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0], 1e-15);
        close(&x.elem(Elementary::Cos).unwrap(), &[1.0, 0.0, -0.5, 0.0, 1.0 / 24.0, 0.0], 1e-15);
    }

    #[test]
    fn log_of_one_plus_t() {
        let l = Taylor::variable(4, 1.0).elem(Elementary::Ln).unwrap();
        close(&l, &[0.0, 1.0, -0.5, 1.0 / 3.0, -0.25], 1e-15);
    }

    #[test]
    fn sqrt_of_one_plus_t() {
        let s = Taylor::variable(3, 1.0).elem(Elementary::Sqrt).unwrap();
        close(&s, &[1.0, 0.5, -0.125, 0.0625], 1e-15);
    }

    #[test]
    fn tan_and_tanh_of_identity() {
        let x = Taylor::variable(5, 0.0);
        close(&x.elem(Elementary::Tan).unwrap(), &[0.0, 1.0, 0.0, 1.0 / 3.0, 0.0, 2.0 / 15.0], 1e-15);
        close(&x.elem(Elementary::Tanh).unwrap(), &[0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 2.0 / 15.0], 1e-15);
    }

    #[test]
    fn reciprocal_of_one_minus_t_is_geometric() {
        let one = Taylor::constant(&(4, ()), 1.0);
        let q = one.try_div(&t(&[1.0, -1.0, 0.0, 0.0, 0.0])).unwrap();
        close(&q, &[1.0; 5], 0.0);
    }

    #[test]
    fn mixed_degree_is_rejected() {
        let err = t(&[1.0, 2.0]).try_add(&t(&[1.0, 2.0, 3.0])).unwrap_err();
        assert_eq!(err, NumError::DegreeMismatch { left: 1, right: 2 });
    }

    #[test]
    fn division_by_zero_constant_term_is_an_error() {
        assert_eq!(t(&[1.0, 1.0]).try_div(&t(&[0.0, 1.0])), Err(NumError::DivisionByZero));
    }

    #[test]
    fn log_of_nonpositive_constant_term_is_a_domain_error() {
        assert!(matches!(t(&[-1.0, 1.0]).elem(Elementary::Ln), Err(NumError::Domain { .. })));
    }

    #[test]
    fn integer_power_uses_squaring() {
        let x = Taylor::variable(3, 1.0);
        close(&x.powi(3).unwrap(), &[1.0, 3.0, 3.0, 1.0], 0.0);
        close(&x.powi(-1).unwrap(), &[1.0, -1.0, 1.0, -1.0], 1e-15);
    }

    #[test]
    fn real_power_via_exp_log() {
        let x = Taylor::variable(2, 4.0);
        let p = x.powf(&Taylor::constant(&(2, ()), 0.5)).unwrap();
        close(&p, &[2.0, 0.25, -1.0 / 64.0], 1e-14);
    }

    #[test]
    fn derivative_and_integral_round_trip() {
        let p = t(&[1.0, 2.0, 3.0, 4.0]);
        close(&p.derivative(), &[2.0, 6.0, 12.0], 0.0);
        close(&p.derivative().integral(), &[0.0, 2.0, 3.0, 4.0], 0.0);
        assert_eq!(p.derivative_at_zero(3), 24.0);
        assert_relative_eq!(p.eval(0.5), 1.0 + 1.0 + 0.75 + 0.5);
    }
}
