//! Truncated Taylor arithmetic used to differentiate the smooth bump profile
//! exactly up to order [`ORDER`].

pub const ORDER: usize = 6;

/// Normalized Taylor coefficients `f^(j)(x0) / j!` for `j = 0..=ORDER`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; ORDER + 1]);

impl Jet {
    pub fn variable(x: f64) -> Self {
        let mut t = [0.0; ORDER + 1];
        t[0] = x;
        t[1] = 1.0;
        Jet(t)
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut out = [0.0; ORDER + 1];
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = (0..=n).map(|k| self.0[k] * other.0[n - k]).sum();
        }
        Jet(out)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet(self.0.map(|v| v * s))
    }

    pub fn sub_from(&self, c: f64) -> Jet {
        let mut out = self.scale(-1.0);
        out.0[0] += c;
        out
    }

    pub fn recip(&self) -> Jet {
        let a0 = self.0[0];
        let mut r = [0.0; ORDER + 1];
        r[0] = 1.0 / a0;
        for n in 1..=ORDER {
            let s: f64 = (1..=n).map(|k| self.0[k] * r[n - k]).sum();
            r[n] = -s / a0;
        }
        Jet(r)
    }

    pub fn exp(&self) -> Jet {
        let mut e = [0.0; ORDER + 1];
        e[0] = self.0[0].exp();
        for n in 1..=ORDER {
            let s: f64 = (1..=n).map(|k| k as f64 * self.0[k] * e[n - k]).sum();
            e[n] = s / n as f64;
        }
        Jet(e)
    }

    /// The `j`-th derivative at the expansion point.
    pub fn derivative(&self, j: usize) -> f64 {
        let fact: f64 = (1..=j).map(|i| i as f64).product();
        self.0[j] * fact
    }
}
