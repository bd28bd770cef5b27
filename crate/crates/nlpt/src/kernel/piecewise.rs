//! Piecewise-analytic even 1D kernels.
//!
//! Every built-in 1D kernel (and every directional reduction of a separable
//! family) is a list of segments on `(0, inf)`, each with closed-form mass
//! and first-moment integrals. Tail quantities, conjugate kernels and cell
//! weights are assembled from these exact pieces, so power-law
//! singularities at the origin never meet point sampling.

use crate::num;

/// Analytic form of a kernel on one radial segment.
#[derive(Debug, Clone, PartialEq)]
pub enum SegForm {
    /// `J(s) = c`
    Const { c: f64 },
    /// `J(s) = coef * s^pow` (typically `pow = -(1 + eta)`)
    Power { coef: f64, pow: f64 },
    /// `J(s) = coef * exp(-rate * s)`
    Exp { coef: f64, rate: f64 },
    /// `J(s) = coef * exp(-s^2 / (2 sigma^2))`
    Gauss { coef: f64, sigma: f64 },
}

impl SegForm {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            SegForm::Const { c } => c,
            SegForm::Power { coef, pow } => coef * s.powf(pow),
            SegForm::Exp { coef, rate } => coef * (-rate * s).exp(),
            SegForm::Gauss { coef, sigma } => coef * (-s * s / (2.0 * sigma * sigma)).exp(),
        }
    }

    /// `int_p^q J(s) ds`, exact.
    pub fn mass(&self, p: f64, q: f64) -> f64 {
        debug_assert!(p <= q);
        match *self {
            SegForm::Const { c } => c * (q - p),
            SegForm::Power { coef, pow } => {
                if (pow + 1.0).abs() < 1e-12 {
                    coef * (q / p).ln()
                } else {
                    coef * (q.powf(pow + 1.0) - p.powf(pow + 1.0)) / (pow + 1.0)
                }
            }
            SegForm::Exp { coef, rate } => coef * ((-rate * p).exp() - (-rate * q).exp()) / rate,
            SegForm::Gauss { coef, sigma } => {
                coef * sigma * num::SQRT_2PI * (num::normal_tail(p, sigma) - num::normal_tail(q, sigma))
            }
        }
    }

    /// `int_p^q s J(s) ds`, exact.
    pub fn first_moment(&self, p: f64, q: f64) -> f64 {
        debug_assert!(p <= q);
        match *self {
            SegForm::Const { c } => 0.5 * c * (q * q - p * p),
            SegForm::Power { coef, pow } => {
                if (pow + 2.0).abs() < 1e-12 {
                    coef * (q / p).ln()
                } else {
                    coef * (q.powf(pow + 2.0) - p.powf(pow + 2.0)) / (pow + 2.0)
                }
            }
            SegForm::Exp { coef, rate } => {
                let at = |s: f64| {
                    if s.is_infinite() {
                        0.0
                    } else {
                        -(-rate * s).exp() * (s / rate + 1.0 / (rate * rate))
                    }
                };
                coef * (at(q) - at(p))
            }
            SegForm::Gauss { coef, sigma } => {
                let at = |s: f64| -sigma * sigma * (-s * s / (2.0 * sigma * sigma)).exp();
                coef * (at(q) - at(p))
            }
        }
    }

    /// Solve `J(s) = level` on a decreasing form, if a root exists.
    fn crossing(&self, level: f64) -> Option<f64> {
        match *self {
            SegForm::Const { .. } => None,
            SegForm::Power { coef, pow } => {
                if pow >= 0.0 {
                    None
                } else {
                    Some((level / coef).powf(1.0 / pow))
                }
            }
            SegForm::Exp { coef, rate } => {
                if level >= coef {
                    None
                } else {
                    Some((coef / level).ln() / rate)
                }
            }
            SegForm::Gauss { coef, sigma } => {
                if level >= coef {
                    None
                } else {
                    Some(sigma * (2.0 * (coef / level).ln()).sqrt())
                }
            }
        }
    }
}

/// One segment `[lo, hi)` of a piecewise kernel; `hi = inf` on the last.
#[derive(Debug, Clone)]
pub struct Seg {
    pub lo: f64,
    pub hi: f64,
    pub form: SegForm,
}

/// An even 1D kernel given by analytic segments on `(0, inf)`.
#[derive(Debug, Clone)]
pub struct Piecewise1d {
    pub segs: Vec<Seg>,
    /// Power-law exponent `eta` when the kernel is `~ s^{-1-eta}` at the
    /// origin (non-integrable).
    pub singular_eta: Option<f64>,
}

impl Piecewise1d {
    pub fn new(segs: Vec<Seg>, singular_eta: Option<f64>) -> Self {
        Self { segs, singular_eta }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        for seg in &self.segs {
            if s < seg.hi {
                return seg.form.eval(s);
            }
        }
        0.0
    }

    /// `int_p^q J` over `0 <= p <= q` on the positive half-line.
    pub fn mass(&self, p: f64, q: f64) -> f64 {
        self.piece_integral(p, q, |form, a, b| form.mass(a, b))
    }

    /// `int_p^q s J(s) ds` on the positive half-line.
    pub fn first_moment(&self, p: f64, q: f64) -> f64 {
        self.piece_integral(p, q, |form, a, b| form.first_moment(a, b))
    }

    fn piece_integral(&self, p: f64, q: f64, f: impl Fn(&SegForm, f64, f64) -> f64) -> f64 {
        debug_assert!(p >= 0.0 && q >= p);
        let mut total = 0.0;
        for seg in &self.segs {
            let a = p.max(seg.lo);
            let b = q.min(seg.hi);
            if a < b {
                total += f(&seg.form, a, b);
            }
        }
        total
    }

    /// `int_{s >= u} J(s) ds` for `u >= 0`.
    pub fn tail_mass(&self, u: f64) -> f64 {
        let hi = self.segs.last().map(|s| s.hi).unwrap_or(0.0);
        debug_assert!(hi.is_infinite(), "last segment must extend to infinity");
        self.mass(u.max(0.0), f64::INFINITY)
    }

    /// `int_{s >= u} s J(s) ds` for `u >= 0`.
    pub fn tail_first_moment(&self, u: f64) -> f64 {
        self.first_moment(u.max(0.0), f64::INFINITY)
    }

    /// Half-line mass `int_0^inf J`; `None` when the origin is singular.
    pub fn half_mass(&self) -> Option<f64> {
        if self.singular_eta.is_some() {
            None
        } else {
            Some(self.mass(0.0, f64::INFINITY))
        }
    }

    /// Full-line mass of the even extension.
    pub fn total_mass(&self) -> Option<f64> {
        self.half_mass().map(|m| 2.0 * m)
    }

    /// `int_R J(s) |s| ds` of the even extension.
    pub fn total_first_moment(&self) -> f64 {
        2.0 * self.first_moment(0.0, f64::INFINITY)
    }

    /// Pointwise truncation `J ∧ cap`, re-expressed in analytic segments.
    pub fn truncate(&self, cap: f64) -> Piecewise1d {
        assert!(cap > 0.0);
        let mut out = Vec::new();
        for seg in &self.segs {
            let top = if seg.lo > 0.0 { seg.form.eval(seg.lo) } else { f64::INFINITY };
            let bottom = if seg.hi.is_finite() { seg.form.eval(seg.hi) } else { 0.0 };
            if top <= cap {
                out.push(seg.clone());
            } else if bottom >= cap {
                out.push(Seg { lo: seg.lo, hi: seg.hi, form: SegForm::Const { c: cap } });
            } else {
                let s_star = seg
                    .form
                    .crossing(cap)
                    .expect("decreasing segment must cross the cap")
                    .clamp(seg.lo, seg.hi);
                out.push(Seg { lo: seg.lo, hi: s_star, form: SegForm::Const { c: cap } });
                out.push(Seg { lo: s_star, hi: seg.hi, form: seg.form.clone() });
            }
        }
        Piecewise1d::new(out, None)
    }
}
