//! Small numerical kernels shared by the other modules.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().sum::<CompensatedSum>().value()
}

/// Truncated Taylor polynomial `c[0] + c[1] h + ... + c[p] h^p` around a point.
///
/// `c[k]` is `f^(k)(x0) / k!`. Used to get exact derivatives of the
/// plateau profile without symbolic differentiation.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The identity variable at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0) * factorial(k)
    }

    pub fn scale(&self, a: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|x| x * a).collect(),
        }
    }

    pub fn recip(&self) -> Jet {
        let p = self.order();
        let mut r = vec![0.0; p + 1];
        r[0] = 1.0 / self.c[0];
        for k in 1..=p {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.c[j] * r[k - j];
            }
            r[k] = -acc / self.c[0];
        }
        Jet { c: r }
    }

    pub fn exp(&self) -> Jet {
        // e' = e * g'  =>  k e_k = sum_{j=1..k} j g_j e_{k-j}
        let p = self.order();
        let mut e = vec![0.0; p + 1];
        e[0] = self.c[0].exp();
        for k in 1..=p {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Jet { c: e }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let p = self.order().min(o.order());
        let mut c = vec![0.0; p + 1];
        for i in 0..=p {
            for j in 0..=(p - i) {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat(1e-16).take(10_000));
        assert_relative_eq!(csum(v.iter().copied()), 1.0 + 1e-12, max_relative = 1e-15);
    }

    #[test]
    fn jet_exp_of_square_matches_closed_form() {
        // d^k/dx^k exp(x^2) at x = 0.3
        let x = Jet::variable(0.3, 4);
        let e = (&x * &x).exp();
        let f = (0.09f64).exp();
        assert_relative_eq!(e.derivative(0), f, max_relative = 1e-14);
        assert_relative_eq!(e.derivative(1), 0.6 * f, max_relative = 1e-14);
        assert_relative_eq!(e.derivative(2), (2.0 + 4.0 * 0.09) * f, max_relative = 1e-14);
        // (12x + 8x^3) e^{x^2}
        assert_relative_eq!(e.derivative(3), (3.6 + 8.0 * 0.027) * f, max_relative = 1e-13);
    }

    #[test]
    fn jet_recip() {
        let x = Jet::variable(2.0, 3);
        let r = x.recip();
        assert_relative_eq!(r.derivative(1), -0.25, max_relative = 1e-15);
        assert_relative_eq!(r.derivative(2), 2.0 / 8.0, max_relative = 1e-15);
        assert_relative_eq!(r.derivative(3), -6.0 / 16.0, max_relative = 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(int, 2.0 / 15.0, max_relative = 1e-13);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }
}
