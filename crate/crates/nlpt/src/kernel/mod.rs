//! Interaction kernels on R^m: families, rescaling, truncation, directional
//! reductions, fiber kernels, tail integrals and lattice cell weights.

pub mod piecewise;

use std::fmt;
use std::sync::Arc;

use crate::error::Error;
use crate::num;
use crate::Result;
use piecewise::{Piecewise1d, Seg, SegForm};

/// Kernel families. All built-ins are radial, hence even.
#[derive(Clone)]
pub enum Family {
    /// Normal density with width `sigma`; unit mass in any dimension.
    Gaussian { sigma: f64 },
    /// `c_m(rate) * exp(-rate |h|)`, normalized to unit mass (m <= 2).
    Exponential { rate: f64 },
    /// `lambda |h|^{-m-eta}` inside `B_rho`, exponential tail outside,
    /// continuous at the junction. Non-integrable at the origin.
    Fractional { eta: f64, lambda: f64, rho: f64, tail_rate: f64 },
    /// Pointwise cap `base ∧ cap`.
    Truncated { base: Box<KernelSpec>, cap: f64 },
    /// User radial density with a declared dominating exponential tail
    /// `tail_coef * exp(-tail_rate r)` valid for `r >= tail_from`.
    Custom {
        radial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        tail_coef: f64,
        tail_rate: f64,
        tail_from: f64,
        label: String,
    },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gaussian { sigma } => write!(f, "Gaussian {{ sigma: {sigma} }}"),
            Family::Exponential { rate } => write!(f, "Exponential {{ rate: {rate} }}"),
            Family::Fractional { eta, lambda, rho, tail_rate } => {
                write!(f, "Fractional {{ eta: {eta}, lambda: {lambda}, rho: {rho}, tail_rate: {tail_rate} }}")
            }
            Family::Truncated { base, cap } => write!(f, "Truncated {{ base: {base:?}, cap: {cap} }}"),
            Family::Custom { label, .. } => write!(f, "Custom {{ label: {label:?} }}"),
        }
    }
}

/// An even interaction kernel on R^m.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub dim: usize,
    pub family: Family,
}

impl KernelSpec {
    pub fn gaussian(dim: usize, sigma: f64) -> Self {
        assert!(dim >= 1 && sigma > 0.0);
        Self { dim, family: Family::Gaussian { sigma } }
    }

    pub fn exponential(dim: usize, rate: f64) -> Self {
        assert!((1..=2).contains(&dim) && rate > 0.0);
        Self { dim, family: Family::Exponential { rate } }
    }

    pub fn fractional(dim: usize, eta: f64, lambda: f64, rho: f64, tail_rate: f64) -> Self {
        assert!((1..=2).contains(&dim));
        assert!(eta > 0.0 && eta < 1.0, "eta must lie in (0,1)");
        assert!(lambda > 0.0 && lambda <= 1.0, "lambda must lie in (0,1]");
        assert!(rho > 0.0 && tail_rate > 0.0);
        Self { dim, family: Family::Fractional { eta, lambda, rho, tail_rate } }
    }

    pub fn custom(
        dim: usize,
        radial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        tail_coef: f64,
        tail_rate: f64,
        tail_from: f64,
        label: &str,
    ) -> Self {
        Self {
            dim,
            family: Family::Custom { radial, tail_coef, tail_rate, tail_from, label: label.to_string() },
        }
    }

    /// Pointwise truncation `J ∧ cap` (proof device of the existence and
    /// liminf arguments; integrable for every finite cap).
    pub fn truncate(&self, cap: f64) -> Result<Self> {
        if cap <= 0.0 {
            return Err(Error::Domain("truncation cap must be positive".into()));
        }
        Ok(Self { dim: self.dim, family: Family::Truncated { base: Box::new(self.clone()), cap } })
    }

    pub fn is_singular(&self) -> bool {
        match &self.family {
            Family::Fractional { .. } => true,
            Family::Truncated { .. } => false,
            Family::Custom { radial, .. } => !radial(1e-12).is_finite() || radial(1e-12) > 1e20,
            _ => false,
        }
    }

    /// Radial profile `J(|h|)`. Returns `inf` at a singular origin.
    pub fn eval_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.family {
            Family::Gaussian { sigma } => {
                let norm = (num::SQRT_2PI * sigma).powi(self.dim as i32);
                (-r * r / (2.0 * sigma * sigma)).exp() / norm
            }
            Family::Exponential { rate } => exp_norm(self.dim, *rate) * (-rate * r).exp(),
            Family::Fractional { eta, lambda, rho, tail_rate } => {
                if r == 0.0 {
                    f64::INFINITY
                } else if r <= *rho {
                    lambda * r.powf(-(self.dim as f64) - eta)
                } else {
                    lambda * rho.powf(-(self.dim as f64) - eta) * (-tail_rate * (r - rho)).exp()
                }
            }
            Family::Truncated { base, cap } => base.eval_radial(r).min(*cap),
            Family::Custom { radial, .. } => radial(r),
        }
    }

    /// Kernel value at a point of R^m.
    pub fn eval(&self, h: &[f64]) -> Result<f64> {
        if h.len() != self.dim {
            return Err(Error::Domain(format!("point has dimension {}, kernel has {}", h.len(), self.dim)));
        }
        let r = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 && self.is_singular() {
            return Err(Error::SingularOrigin);
        }
        Ok(self.eval_radial(r))
    }

    /// `J_eps(h) = eps^{-m} J(h/eps)`, expressed inside the same family.
    pub fn rescale(&self, eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::Domain("rescale parameter must be positive".into()));
        }
        let m = self.dim as f64;
        let family = match &self.family {
            Family::Gaussian { sigma } => Family::Gaussian { sigma: sigma * eps },
            Family::Exponential { rate } => Family::Exponential { rate: rate / eps },
            Family::Fractional { eta, lambda, rho, tail_rate } => Family::Fractional {
                eta: *eta,
                lambda: lambda * eps.powf(*eta),
                rho: rho * eps,
                tail_rate: tail_rate / eps,
            },
            Family::Truncated { base, cap } => Family::Truncated {
                base: Box::new(base.rescale(eps)?),
                cap: cap * eps.powf(-m),
            },
            Family::Custom { radial, tail_coef, tail_rate, tail_from, label } => {
                let base = radial.clone();
                Family::Custom {
                    radial: Arc::new(move |r| eps.powf(-m) * base(r / eps)),
                    tail_coef: tail_coef * eps.powf(-m),
                    tail_rate: tail_rate / eps,
                    tail_from: tail_from * eps,
                    label: format!("{label}/eps={eps}"),
                }
            }
        };
        Ok(Self { dim: self.dim, family })
    }

    /// Total mass when finite.
    pub fn mass(&self) -> Option<f64> {
        match (&self.family, self.dim) {
            (Family::Gaussian { .. }, _) => Some(1.0),
            (Family::Exponential { .. }, _) => Some(1.0),
            (Family::Fractional { .. }, _) => None,
            _ => {
                if self.is_singular() {
                    None
                } else if self.dim == 1 {
                    self.to_kern1d().ok()?.total_mass()
                } else {
                    // radial in 2D: 2 pi int r J(r) dr
                    let f = self.radial_closure();
                    let v = num::adaptive_quad_to_inf(0.0, self.tail_scale(), 1e-12, &|r| r * f(r));
                    Some(2.0 * std::f64::consts::PI * v)
                }
            }
        }
    }

    /// `int J(h) |h| dh` over R^m (condition K2 integral).
    pub fn first_moment(&self) -> Result<f64> {
        match self.dim {
            1 => Ok(self.to_kern1d()?.total_first_moment()),
            2 => {
                let f = self.radial_closure();
                let v = num::adaptive_quad_to_inf(0.0, self.tail_scale(), 1e-12, &|r| r * r * f(r));
                Ok(2.0 * std::f64::consts::PI * v)
            }
            _ => Err(Error::Domain("first moment implemented for m <= 2".into())),
        }
    }

    fn radial_closure(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        let spec = self.clone();
        Arc::new(move |r| spec.eval_radial(r))
    }

    /// Decay scale used to pace improper integrals.
    fn tail_scale(&self) -> f64 {
        match &self.family {
            Family::Gaussian { sigma } => *sigma,
            Family::Exponential { rate } => 1.0 / rate,
            Family::Fractional { rho, tail_rate, .. } => rho + 1.0 / tail_rate,
            Family::Truncated { base, .. } => base.tail_scale(),
            Family::Custom { tail_rate, tail_from, .. } => tail_from + 1.0 / tail_rate,
        }
    }

    /// Dominating exponential tail `(coef, rate, from)` of the radial profile.
    fn dominating_tail(&self) -> (f64, f64, f64) {
        match &self.family {
            Family::Gaussian { sigma } => {
                // exp(-r^2/2s^2) <= exp(1/2) exp(-r/s) for r >= s
                let norm = (num::SQRT_2PI * sigma).powi(self.dim as i32);
                (1.65 / norm, 1.0 / sigma, *sigma)
            }
            Family::Exponential { rate } => (exp_norm(self.dim, *rate), *rate, 0.0),
            Family::Fractional { eta, lambda, rho, tail_rate } => {
                (lambda * rho.powf(-(self.dim as f64) - eta) * (tail_rate * rho).exp(), *tail_rate, *rho)
            }
            Family::Truncated { base, .. } => base.dominating_tail(),
            Family::Custom { tail_coef, tail_rate, tail_from, .. } => (*tail_coef, *tail_rate, *tail_from),
        }
    }

    /// The 1D kernel itself (dimension must be 1).
    pub fn to_kern1d(&self) -> Result<Kern1d> {
        if self.dim != 1 {
            return Err(Error::Domain("to_kern1d requires a 1D kernel".into()));
        }
        match self.radial_piecewise() {
            Some(p) => Ok(Kern1d::Analytic(p)),
            None => Ok(Kern1d::Numeric(NumericSection::direct(self))),
        }
    }

    /// The radial profile as analytic segments, when the family allows it.
    fn radial_piecewise(&self) -> Option<Piecewise1d> {
        match &self.family {
            Family::Gaussian { sigma } => {
                let norm = (num::SQRT_2PI * sigma).powi(self.dim as i32);
                Some(Piecewise1d::new(
                    vec![Seg { lo: 0.0, hi: f64::INFINITY, form: SegForm::Gauss { coef: 1.0 / norm, sigma: *sigma } }],
                    None,
                ))
            }
            Family::Exponential { rate } => Some(Piecewise1d::new(
                vec![Seg { lo: 0.0, hi: f64::INFINITY, form: SegForm::Exp { coef: exp_norm(self.dim, *rate), rate: *rate } }],
                None,
            )),
            Family::Fractional { eta, lambda, rho, tail_rate } => {
                let a = lambda * rho.powf(-(self.dim as f64) - eta) * (tail_rate * rho).exp();
                Some(Piecewise1d::new(
                    vec![
                        Seg { lo: 0.0, hi: *rho, form: SegForm::Power { coef: *lambda, pow: -(self.dim as f64) - eta } },
                        Seg { lo: *rho, hi: f64::INFINITY, form: SegForm::Exp { coef: a, rate: *tail_rate } },
                    ],
                    Some(*eta),
                ))
            }
            Family::Truncated { base, cap } => base.radial_piecewise().map(|p| p.truncate(*cap)),
            Family::Custom { .. } => None,
        }
    }

    /// Directional kernel `J^xi(t) = int_{xi^perp} J(y + t xi) dy`.
    ///
    /// For m = 1 this is the kernel itself; the Gaussian reduces exactly;
    /// other 2D families integrate numerically with the singular part kept
    /// in power-law form.
    pub fn directional(&self, xi: &[f64]) -> Result<Kern1d> {
        if xi.len() != self.dim {
            return Err(Error::Domain("direction has wrong dimension".into()));
        }
        let n2 = xi.iter().map(|x| x * x).sum::<f64>();
        if (n2 - 1.0).abs() > 1e-8 {
            return Err(Error::Domain("direction must be a unit vector".into()));
        }
        match (self.dim, &self.family) {
            (1, _) => self.to_kern1d(),
            (_, Family::Gaussian { sigma }) => {
                Ok(Kern1d::Analytic(Piecewise1d::new(
                    vec![Seg {
                        lo: 0.0,
                        hi: f64::INFINITY,
                        form: SegForm::Gauss { coef: 1.0 / (num::SQRT_2PI * sigma), sigma: *sigma },
                    }],
                    None,
                )))
            }
            (2, _) => Ok(Kern1d::Numeric(NumericSection::codim1(self))),
            _ => Err(Error::Domain("directional kernels implemented for m <= 2".into())),
        }
    }

    /// Restriction `J^V(x) = int_{V^perp} J(y + x) dy` to a k-dimensional
    /// subspace. For radial kernels the result is radial on V.
    pub fn restrict(&self, k: usize) -> Result<KernelSpec> {
        if k >= self.dim || k == 0 {
            return Err(Error::Domain("restriction needs 0 < k < m".into()));
        }
        match &self.family {
            Family::Gaussian { sigma } => Ok(KernelSpec::gaussian(k, *sigma)),
            _ if self.dim == 2 && k == 1 => {
                let sect = NumericSection::codim1(self);
                let (tc, tr, tf) = {
                    let (c, r, f) = self.dominating_tail();
                    // one transverse integration costs a sqrt(2) on the rate
                    (2.0 * std::f64::consts::SQRT_2 * c / r, r / std::f64::consts::SQRT_2, f)
                };
                let label = format!("restrict({:?})", self.family);
                let eval = Arc::new(move |r: f64| sect.eval(r));
                Ok(KernelSpec::custom(1, eval, tc, tr, tf, &label))
            }
            _ => Err(Error::Domain("restriction implemented for m = 2 or Gaussian".into())),
        }
    }

    /// Fiber kernel `K^z(s) = J(s z) |s|^{m-1}` for `z` on the affine plane
    /// `V_xi = { y + xi : y in xi^perp }`.
    pub fn fiber(&self, z: &[f64]) -> Result<FiberKernel> {
        if z.len() != self.dim {
            return Err(Error::Domain("fiber point has wrong dimension".into()));
        }
        Ok(FiberKernel { spec: self.clone(), z: z.to_vec() })
    }

    /// Auxiliary hat kernel with `||hat J||_1 = int J|h| dh`.
    pub fn hat(&self) -> Result<HatKernel> {
        let total = self.first_moment()?;
        if !total.is_finite() {
            return Err(Error::InfiniteHatMass);
        }
        Ok(HatKernel { base: self.clone(), total_mass: total })
    }

    /// Samples the two-sided class bound on `B_rho \ {0}` and checks the
    /// K3 tail integral.
    pub fn verify_class(&self, eta: f64, lambda: f64, rho: f64) -> ClassReport {
        let m = self.dim as f64;
        let mut violations = Vec::new();
        // geometric radius lattice toward the origin
        let mut r = rho * 0.98;
        let tilde_bound = self.eval_radial(rho * 0.5).max(1.0);
        while r > rho * 1e-7 {
            let j = self.eval_radial(r);
            let low = lambda * r.powf(-m - eta);
            let high = r.powf(-m - eta) / lambda + tilde_bound;
            if j < low * (1.0 - 1e-12) {
                violations.push(ClassViolation { r, value: j, bound: low, side: BoundSide::Lower });
            }
            if j > high * (1.0 + 1e-12) {
                violations.push(ClassViolation { r, value: j, bound: high, side: BoundSide::Upper });
            }
            r *= 0.65;
        }
        let k3 = match self.dim {
            1 => self
                .to_kern1d()
                .map(|k| 2.0 * k.first_moment(rho, f64::INFINITY))
                .unwrap_or(f64::INFINITY),
            _ => {
                let f = self.radial_closure();
                2.0 * std::f64::consts::PI
                    * num::adaptive_quad_to_inf(rho, self.tail_scale(), 1e-10, &|s| s * s * f(s))
            }
        };
        ClassReport { in_class: violations.is_empty() && k3.is_finite(), violations, k3_tail_integral: k3 }
    }
}

fn exp_norm(dim: usize, rate: f64) -> f64 {
    match dim {
        1 => rate / 2.0,
        2 => rate * rate / (2.0 * std::f64::consts::PI),
        _ => panic!("exponential family supported for m <= 2"),
    }
}

/// Which side of the class bound a sample violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone)]
pub struct ClassViolation {
    pub r: f64,
    pub value: f64,
    pub bound: f64,
    pub side: BoundSide,
}

/// Report of `verify_class`.
#[derive(Debug, Clone)]
pub struct ClassReport {
    pub in_class: bool,
    pub violations: Vec<ClassViolation>,
    pub k3_tail_integral: f64,
}

/// Fiber kernel `K^z(s) = J(sz)|s|^{m-1}`.
#[derive(Debug, Clone)]
pub struct FiberKernel {
    spec: KernelSpec,
    z: Vec<f64>,
}

impl FiberKernel {
    pub fn eval(&self, s: f64) -> f64 {
        if s == 0.0 {
            return if self.spec.is_singular() { f64::INFINITY } else { 0.0 };
        }
        let zr = self.z.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.spec.eval_radial(s.abs() * zr) * s.abs().powi(self.spec.dim as i32 - 1)
    }
}

/// Hat kernel `hat J(h) = int_0^1 J(h/t)|h/t| dt/t^m`.
#[derive(Debug, Clone)]
pub struct HatKernel {
    base: KernelSpec,
    pub total_mass: f64,
}

impl HatKernel {
    /// Pointwise value; in 1D this is exactly the tail mass at `|h|`.
    pub fn eval(&self, h: &[f64]) -> Result<f64> {
        if h.len() != self.base.dim {
            return Err(Error::Domain("point has wrong dimension".into()));
        }
        let r = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(self.eval_radial(r))
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        if r == 0.0 {
            return f64::INFINITY;
        }
        match self.base.dim {
            1 => match self.base.to_kern1d() {
                Ok(k) => k.tail_mass(r),
                Err(_) => f64::NAN,
            },
            2 => {
                // (1/r) int_r^inf s J(s) ds
                match self.base.radial_piecewise() {
                    Some(p) => p.tail_first_moment(r) / r,
                    None => {
                        let f = self.base.radial_closure();
                        num::adaptive_quad_to_inf(r, self.base.tail_scale(), 1e-12, &|s| s * f(s)) / r
                    }
                }
            }
            _ => f64::NAN,
        }
    }
}

// ---------------------------------------------------------------------------
// 1D kernels: analytic or numeric radial sections
// ---------------------------------------------------------------------------

/// A 1D even kernel, analytic or obtained by transverse integration.
#[derive(Debug, Clone)]
pub enum Kern1d {
    Analytic(Piecewise1d),
    Numeric(NumericSection),
}

impl Kern1d {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Kern1d::Analytic(p) => p.eval(s),
            Kern1d::Numeric(n) => n.eval(s.abs()),
        }
    }

    pub fn singular_eta(&self) -> Option<f64> {
        match self {
            Kern1d::Analytic(p) => p.singular_eta,
            Kern1d::Numeric(n) => n.singular_eta,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular_eta().is_some()
    }

    /// `int_p^q J` on the positive half-line.
    pub fn mass(&self, p: f64, q: f64) -> f64 {
        match self {
            Kern1d::Analytic(pw) => pw.mass(p, q),
            Kern1d::Numeric(n) => n.mass(p, q),
        }
    }

    /// `int_p^q s J(s) ds` on the positive half-line.
    pub fn first_moment(&self, p: f64, q: f64) -> f64 {
        match self {
            Kern1d::Analytic(pw) => pw.first_moment(p, q),
            Kern1d::Numeric(n) => n.first_moment(p, q),
        }
    }

    /// `int_{s>=u} J` for real `u` (even extension); infinite for singular
    /// kernels when `u < 0`.
    pub fn tail_mass(&self, u: f64) -> f64 {
        if u >= 0.0 {
            self.mass(u, f64::INFINITY)
        } else {
            match self.total_mass() {
                Some(total) => total - self.mass(-u, f64::INFINITY),
                None => f64::INFINITY,
            }
        }
    }

    /// Conjugate kernel `K(u) = int_{s>=u} (s-u) J(s) ds = (J * max(-., 0))(u)`.
    pub fn conjugate(&self, u: f64) -> f64 {
        if u >= 0.0 {
            self.first_moment(u, f64::INFINITY) - u * self.mass(u, f64::INFINITY)
        } else {
            match self.total_mass() {
                Some(total) => self.conjugate(-u) - u * total,
                None => f64::INFINITY,
            }
        }
    }

    pub fn total_mass(&self) -> Option<f64> {
        match self {
            Kern1d::Analytic(p) => p.total_mass(),
            Kern1d::Numeric(n) => {
                if n.singular_eta.is_some() {
                    None
                } else {
                    Some(2.0 * n.mass(0.0, f64::INFINITY))
                }
            }
        }
    }

    /// `int_R J(s)|s| ds`.
    pub fn total_first_moment(&self) -> f64 {
        2.0 * self.first_moment(0.0, f64::INFINITY)
    }

    /// Cell weights on a uniform offset lattice.
    pub fn lattice(&self, dt: f64, k_max: usize) -> LatticeKernel {
        LatticeKernel::build(self, dt, k_max)
    }
}

/// Transverse integral of a radial 2D kernel along a line (codimension 1),
/// or a direct numeric wrapper of a custom 1D radial density.
#[derive(Clone)]
pub struct NumericSection {
    base: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    codim: usize,
    pub singular_eta: Option<f64>,
    dom_coef: f64,
    dom_rate: f64,
    dom_from: f64,
}

impl fmt::Debug for NumericSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumericSection {{ codim: {}, singular_eta: {:?} }}", self.codim, self.singular_eta)
    }
}

impl NumericSection {
    /// Wrap a custom 1D radial density directly.
    pub fn direct(spec: &KernelSpec) -> Self {
        let (c, r, from) = spec.dominating_tail();
        let f = spec.radial_closure();
        let eta = if spec.is_singular() { estimate_eta(&*f) } else { None };
        Self { base: f, codim: 0, singular_eta: eta, dom_coef: c, dom_rate: r, dom_from: from }
    }

    /// Section of a radial 2D kernel across a line through the origin.
    pub fn codim1(spec: &KernelSpec) -> Self {
        assert_eq!(spec.dim, 2);
        let (c, r, from) = spec.dominating_tail();
        let eta = match &spec.family {
            Family::Fractional { eta, .. } => Some(*eta),
            Family::Custom { radial, .. } => {
                if radial(1e-12) > 1e20 {
                    estimate_eta(&**radial)
                } else {
                    None
                }
            }
            _ => None,
        };
        Self {
            base: spec.radial_closure(),
            codim: 1,
            singular_eta: eta,
            dom_coef: 2.0 * std::f64::consts::SQRT_2 * c / r,
            dom_rate: r / std::f64::consts::SQRT_2,
            dom_from: from,
        }
    }

    /// Horizon beyond which the dominating tail is below 1e-17.
    fn horizon(&self) -> f64 {
        let c = self.dom_coef.max(1e-300);
        (self.dom_from + (c / (1e-17 * self.dom_rate)).ln().max(1.0) / self.dom_rate).max(1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        if self.codim == 0 {
            return (self.base)(t);
        }
        if t == 0.0 {
            return f64::INFINITY;
        }
        // int_{R} J_rad(sqrt(t^2 + y^2)) dy = 2 int_0^inf J_rad(t cosh u) t cosh u du
        let base = &self.base;
        let scale = (base(t) * t).abs();
        if scale < 1e-300 {
            return 0.0;
        }
        2.0 * num::adaptive_quad_to_inf(0.0, 1.0, 1e-13 * scale, &|u: f64| {
            let r = t * u.cosh();
            base(r) * t * u.cosh()
        })
    }

    /// `int_p^q J` with geometric panels toward a singular origin.
    pub fn mass(&self, p: f64, q: f64) -> f64 {
        if p <= 0.0 && self.singular_eta.is_some() {
            return f64::INFINITY;
        }
        self.integrate(p, q, |s, v| {
            let _ = s;
            v
        })
    }

    /// `int_p^q s J(s) ds`; finite from 0 even for singular sections.
    pub fn first_moment(&self, p: f64, q: f64) -> f64 {
        self.integrate(p, q, |s, v| s * v)
    }

    fn integrate(&self, p: f64, q: f64, weight: impl Fn(f64, f64) -> f64 + Copy) -> f64 {
        let hor = self.horizon();
        let q = q.min(hor);
        if q <= p {
            return 0.0;
        }
        let f = |s: f64| weight(s, self.eval(s));
        let mut total = 0.0f64;
        let mut hi = q;
        // geometric panels absorb the origin singularity
        while hi > p.max(1e-14) {
            let lo = (0.5 * hi).max(p);
            total += num::adaptive_quad(lo, hi, 1e-12 * (1.0 + total.abs()), &f);
            if lo <= p {
                break;
            }
            hi = lo;
            if hi < 1e-13 && p <= 0.0 {
                break;
            }
        }
        total
    }
}

fn estimate_eta(f: &(dyn Fn(f64) -> f64 + Send + Sync)) -> Option<f64> {
    // slope of log J against log s near the origin
    let (s1, s2) = (1e-6, 1e-7);
    let (v1, v2) = (f(s1), f(s2));
    if !v1.is_finite() || !v2.is_finite() || v1 <= 0.0 || v2 <= 0.0 {
        return None;
    }
    let p = (v2.ln() - v1.ln()) / (s2.ln() - s1.ln());
    let eta = -p - 1.0;
    if eta > 0.0 && eta < 1.0 {
        Some(eta)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Lattice cell weights
// ---------------------------------------------------------------------------

/// Exact cell aggregates of a 1D kernel on a uniform offset lattice.
///
/// `hat[k]` integrates the kernel against the unit tent at offset `k dt`
/// (used by energies: exact for the interaction of a step, second-order
/// consistent for smooth profiles). `inner[k]` aggregates the cell
/// `((k-1) dt, k dt]` attributed to its outer node (used by the
/// integro-difference operator; first-order consistent). The cell adjacent
/// to the origin is a first-moment average, so power-law singularities are
/// integrated in closed form and never sampled.
#[derive(Debug, Clone)]
pub struct LatticeKernel {
    pub dt: f64,
    pub k_max: usize,
    pub hat: Vec<f64>,
    pub inner: Vec<f64>,
    /// `hat_tail[k] = sum_{j>=k} hat[j]`, entries `1..=k_max+1`.
    pub hat_tail: Vec<f64>,
    /// `inner_suffix[k] = sum_{j=k..=k_max} inner[j]`.
    inner_suffix: Vec<f64>,
    /// `cum_hat_tail[k] = sum_{j>=k} hat_tail[j]`, entries `1..=k_max+2`.
    pub cum_hat_tail: Vec<f64>,
    /// `sum_{j > k_max} inner[j] = T(k_max dt)`.
    pub inner_tail_beyond: f64,
    /// Convolution weight at offset zero (finite for integrable kernels).
    pub conv_w0: f64,
    pub mass: Option<f64>,
    pub first_moment: f64,
    pub singular: bool,
    /// First offset whose suffix weight is below 1e-18; sums may close
    /// with the analytic tails from here.
    pub k_eff: usize,
}

impl LatticeKernel {
    pub fn build(k: &Kern1d, dt: f64, k_max: usize) -> Self {
        assert!(dt > 0.0 && k_max >= 2);
        let singular = k.is_singular();
        let mut inner = vec![0.0; k_max + 1];
        let mut hat = vec![0.0; k_max + 1];
        // per-cell mass and first moment
        let mut cell_mass = vec![0.0; k_max + 2];
        let mut cell_fm = vec![0.0; k_max + 2];
        for j in 1..=k_max + 1 {
            let (p, q) = ((j - 1) as f64 * dt, j as f64 * dt);
            cell_mass[j] = k.mass(p, q);
            cell_fm[j] = k.first_moment(p, q);
        }
        inner[1] = cell_fm[1] / dt;
        for j in 2..=k_max {
            inner[j] = cell_mass[j];
        }
        hat[0] = if singular {
            f64::INFINITY
        } else {
            2.0 * (cell_mass[1] - cell_fm[1] / dt)
        };
        for j in 1..=k_max {
            let rising = (cell_fm[j] - (j - 1) as f64 * dt * cell_mass[j]) / dt;
            let falling = ((j + 1) as f64 * dt * cell_mass[j + 1] - cell_fm[j + 1]) / dt;
            hat[j] = rising + falling;
        }
        // hat_tail[k] = ramp-weighted mass from (k-1) dt on
        let mut hat_tail = vec![0.0; k_max + 2];
        for j in 1..=k_max + 1 {
            let (p, q) = ((j - 1) as f64 * dt, j as f64 * dt);
            hat_tail[j] = (cell_fm[j] - p * cell_mass[j]) / dt + k.mass(q, f64::INFINITY);
        }
        // cumulative hat tails, with the analytic remainder past the table
        let mut remainder = 0.0;
        let mut j = k_max + 2;
        loop {
            let (p, q) = ((j - 1) as f64 * dt, j as f64 * dt);
            let hd = (k.first_moment(p, q) - p * k.mass(p, q)) / dt + k.mass(q, f64::INFINITY);
            remainder += hd;
            if hd < 1e-18 || j > k_max + 100_000 {
                break;
            }
            j += 1;
        }
        let mut cum_hat_tail = vec![0.0; k_max + 3];
        cum_hat_tail[k_max + 2] = remainder;
        for j in (1..=k_max + 1).rev() {
            cum_hat_tail[j] = cum_hat_tail[j + 1] + hat_tail[j];
        }
        let inner_tail_beyond = k.mass(k_max as f64 * dt, f64::INFINITY);
        let mut inner_suffix = vec![0.0; k_max + 2];
        for j in (1..=k_max).rev() {
            inner_suffix[j] = inner_suffix[j + 1] + inner[j];
        }
        let mass = k.total_mass();
        // tent weight at zero; with the tent partition of unity the
        // convolution weights resum exactly to the mass
        let conv_w0 = hat[0];
        let mut k_eff = k_max + 1;
        for (j, ht) in hat_tail.iter().enumerate().skip(1) {
            if *ht < 1e-18 {
                k_eff = j;
                break;
            }
        }
        LatticeKernel {
            dt,
            k_max,
            hat,
            inner,
            hat_tail,
            inner_suffix,
            cum_hat_tail,
            inner_tail_beyond,
            conv_w0,
            mass,
            first_moment: k.total_first_moment(),
            singular,
            k_eff,
        }
    }

    /// `sum_{j >= k, j <= k_max} inner[j]` (the analytic part past `k_max`
    /// is `inner_tail_beyond`).
    pub fn inner_suffix_from(&self, k: usize) -> f64 {
        if k > self.k_max {
            0.0
        } else {
            self.inner_suffix[k.max(1)]
        }
    }

    /// `sum_{j >= k} hat[j]` for `k >= 1`, table plus analytic remainder.
    pub fn hat_tail_from(&self, kk: usize) -> f64 {
        if kk <= self.k_max + 1 {
            self.hat_tail[kk.max(1)]
        } else {
            0.0
        }
    }

    /// Interaction of the two constant tails of a profile with `n` nodes:
    /// `sum_{i <= -1, j >= n} hat[j - i] = sum_{k >= n+1} hat_tail[k]`.
    pub fn cross_tail(&self, n: usize) -> f64 {
        let idx = (n + 1).min(self.k_max + 2);
        self.cum_hat_tail[idx]
    }
}
