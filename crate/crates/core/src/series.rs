//! Truncated power series in `t = x^{2/3}` for the singular startups.
//!
//! Both singular problems admit expansions whose exponents step by `2/3`:
//! `D = t²P(t)`, `u = U(t)`, `v = x·V(t)`. Substituting into the equations and
//! integrating twice term by term gives a fixed-point map on the coefficients
//! that gains at least one order per pass.

pub(crate) const TERMS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Series(pub [f64; TERMS]);

impl Series {
    pub fn zero() -> Self {
        Self([0.0; TERMS])
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = [0.0; TERMS];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().take(TERMS - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    /// Requires a positive constant term.
    pub fn sqrt(&self) -> Self {
        let a = &self.0;
        let mut s = [0.0; TERMS];
        s[0] = libm::sqrt(a[0]);
        for n in 1..TERMS {
            let mut acc = a[n];
            for k in 1..n {
                acc -= s[k] * s[n - k];
            }
            s[n] = acc / (2.0 * s[0]);
        }
        Self(s)
    }

    /// Requires a nonzero constant term.
    pub fn recip(&self) -> Self {
        let a = &self.0;
        let mut r = [0.0; TERMS];
        r[0] = 1.0 / a[0];
        for n in 1..TERMS {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += a[k] * r[n - k];
            }
            r[n] = -acc * r[0];
        }
        Self(r)
    }

    /// Divide by `t^k`; the dropped low coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        let mut out = [0.0; TERMS];
        out[..TERMS - k].copy_from_slice(&self.0[k..]);
        Self(out)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (n, c)| acc * t + n as f64 * c)
    }
}

/// `(4 + 2m)(1 + 2m)/9`: twice integrating `x^{−2/3 + 2m/3}` from 0.
fn rising(m: usize) -> f64 {
    let m = m as f64;
    (4.0 + 2.0 * m) * (1.0 + 2.0 * m) / 9.0
}

/// `(7 + 2m)(4 + 2m)/9`: twice integrating `x^{1/3 + 2m/3}` from 0.
fn rising_odd(m: usize) -> f64 {
    let m = m as f64;
    (7.0 + 2.0 * m) * (4.0 + 2.0 * m) / 9.0
}

/// Coefficients of `P` in `D = t²P(t)` for `D'' = jₓ(6√D + 2/√D − 4γ)`.
pub(crate) fn potential_series(j_x: f64, gamma: f64) -> Series {
    let lead = libm::cbrt(4.5 * j_x);
    let mut p = Series::zero();
    p.0[0] = lead * lead;
    for _ in 0..TERMS + 1 {
        let root = p.sqrt();
        let inv = root.recip();
        // R(t) = 2/√P − 4γt + 6t²√P multiplies t^{−1} = x^{−2/3}
        let mut r = Series::zero();
        for m in 0..TERMS {
            r.0[m] = 2.0 * inv.0[m];
            if m >= 1 {
                r.0[m] -= if m == 1 { 4.0 * gamma } else { 0.0 };
            }
            if m >= 2 {
                r.0[m] += 6.0 * root.0[m - 2];
            }
        }
        let mut next = Series::zero();
        for m in 0..TERMS {
            next.0[m] = j_x * r.0[m] / rising(m);
        }
        p = next;
    }
    p
}

/// Coefficients of `U`, `V` in `u = U(t)`, `v = x·V(t)` for the `(u, v)` system.
pub(crate) fn diode_series(j_x: f64, beta: f64) -> (Series, Series) {
    let lead = libm::cbrt(9.0 * j_x / (4.0 * core::f64::consts::SQRT_2));
    let mut u = Series::zero();
    u.0[0] = 1.0;
    u.0[2] = lead * lead;
    let mut v = Series::zero();
    v.0[0] = beta;
    for _ in 0..TERMS + 2 {
        // θ = U² − 1 − t³V² = t²Θ
        let mut theta = u.mul(&u);
        theta.0[0] -= 1.0;
        let vv = v.mul(&v);
        for m in 3..TERMS {
            theta.0[m] -= vv.0[m - 3];
        }
        let inv = theta.shift_down(2).sqrt().recip();
        let w = u.mul(&inv);
        let z = v.mul(&inv);
        let mut nu = Series::zero();
        nu.0[0] = 1.0;
        let mut nv = Series::zero();
        nv.0[0] = beta;
        for m in 0..TERMS - 2 {
            nu.0[m + 2] = j_x * w.0[m] / rising(m);
            nv.0[m + 2] = j_x * z.0[m] / rising_odd(m);
        }
        u = nu;
        v = nv;
    }
    (u, v)
}
