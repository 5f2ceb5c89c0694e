//! Right-continuous functions of finite variation on `[0, T)` and their
//! Lebesgue–Stieltjes calculus.
//!
//! A function is stored as an initial value, an absolutely continuous
//! density and a finite list of atoms. There is no singular-continuous part.
//! Integrals against such a function split into a quadrature over the
//! density, with panel edges at every atom time, plus an exact sum over the
//! atoms.
//!
//! The Stieltjes exponential and logarithm map hazard-type functions
//! ([`AFunction`]) onto survival-type functions ([`MFunction`]) and back:
//!
//! ```text
//! F(t) = exp(-Λᵃᶜ(t)) · Π_{0<s≤t} (1 - ΔΛ(s))
//! Λ(dt) = -F(dt) / F(t-)
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A point mass of a finite-variation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub time: f64,
    pub size: f64,
}

impl Atom {
    pub fn new(time: f64, size: f64) -> Self {
        Self { time, size }
    }
}

/// Right-continuous function of finite variation: `g(t) = g(0) + ∫₀ᵗ ρ + Σ_{s≤t} Δg(s)`.
#[derive(Clone)]
pub struct FvFunction {
    domain_end: f64,
    density: Option<RealFn>,
    // Closed form of t ↦ ∫₀ᵗ density, when the caller knows one.
    cumulative: Option<RealFn>,
    atoms: Vec<Atom>,
    initial: f64,
}

impl fmt::Debug for FvFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FvFunction")
            .field("domain_end", &self.domain_end)
            .field("has_density", &self.density.is_some())
            .field("atoms", &self.atoms)
            .field("initial", &self.initial)
            .finish()
    }
}

impl FvFunction {
    pub fn new(
        domain_end: f64,
        density: Option<RealFn>,
        atoms: Vec<Atom>,
        initial: f64,
    ) -> Result<Self> {
        if !(domain_end > 0.0) {
            return Err(Error::InvalidFunction(format!(
                "domain end must be positive, got {domain_end}"
            )));
        }
        if !initial.is_finite() {
            return Err(Error::InvalidFunction(format!(
                "initial value must be finite, got {initial}"
            )));
        }
        let mut previous = 0.0;
        for atom in &atoms {
            if !(atom.time > previous) {
                return Err(Error::InvalidFunction(format!(
                    "atom times must be strictly increasing and positive (atom at {} after {previous})",
                    atom.time
                )));
            }
            if atom.time > domain_end {
                return Err(Error::InvalidFunction(format!(
                    "atom at {} lies beyond the domain end {domain_end}",
                    atom.time
                )));
            }
            if !atom.size.is_finite() {
                return Err(Error::InvalidFunction(format!(
                    "atom at {} has non-finite size {}",
                    atom.time, atom.size
                )));
            }
            previous = atom.time;
        }
        Ok(Self {
            domain_end,
            density,
            cumulative: None,
            atoms,
            initial,
        })
    }

    /// Lebesgue measure's distribution function `t ↦ t` on `[0, domain_end)`.
    pub fn lebesgue(domain_end: f64) -> Self {
        Self::new(domain_end, Some(Arc::new(|_| 1.0)), Vec::new(), 0.0)
            .expect("lebesgue is valid")
            .with_cumulative(Arc::new(|t| t))
    }

    pub fn zero(domain_end: f64) -> Self {
        Self::new(domain_end, None, Vec::new(), 0.0).expect("zero function is valid")
    }

    /// Pure-jump function with the given atoms.
    pub fn atoms_only(domain_end: f64, atoms: Vec<Atom>, initial: f64) -> Result<Self> {
        Self::new(domain_end, None, atoms, initial)
    }

    /// Attaches a closed form for `t ↦ ∫₀ᵗ density`. Evaluation then skips
    /// quadrature; integrals against the function still use the density.
    pub fn with_cumulative(mut self, cumulative: RealFn) -> Self {
        self.cumulative = Some(cumulative);
        self
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&RealFn> {
        self.density.as_ref()
    }

    pub fn density_at(&self, t: f64) -> f64 {
        self.density.as_ref().map_or(0.0, |d| d(t))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < 0.0 || t > self.domain_end || t.is_nan() {
            return Err(Error::OutsideDomain {
                t,
                killing_time: self.domain_end,
            });
        }
        Ok(())
    }

    fn atom_times_before(&self, t: f64) -> Vec<f64> {
        self.atoms
            .iter()
            .map(|a| a.time)
            .take_while(|&s| s < t)
            .collect()
    }

    /// `∫₀ᵗ density(s) ds`.
    pub fn ac_value(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if let Some(c) = &self.cumulative {
            return Ok(c(t));
        }
        match &self.density {
            None => Ok(0.0),
            Some(d) => quadrature::integral(&|s| d(s), 0.0, t, &self.atom_times_before(t)),
        }
    }

    /// Sum of atom sizes over `(0, t]`.
    pub fn pd_value(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.time <= t)
            .map(|a| a.size)
            .sum()
    }

    /// `g(t)`, right-continuous.
    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.initial + self.ac_value(t)? + self.pd_value(t))
    }

    /// `g(t-)`; equals `g(0)` at `t = 0`.
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        let jump = self.jump_at(t);
        Ok(self.value(t)? - jump)
    }

    /// Atom size at exactly `t` (zero when `t` carries no atom).
    pub fn jump_at(&self, t: f64) -> f64 {
        self.atoms
            .binary_search_by(|a| a.time.total_cmp(&t))
            .map(|i| self.atoms[i].size)
            .unwrap_or(0.0)
    }

    /// Total variation over `(0, t]`.
    pub fn total_variation(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let ac = match &self.density {
            None => 0.0,
            Some(d) => quadrature::integral(&|s| d(s).abs(), 0.0, t, &self.atom_times_before(t))?,
        };
        Ok(ac
            + self
                .atoms
                .iter()
                .take_while(|a| a.time <= t)
                .map(|a| a.size.abs())
                .sum::<f64>())
    }

    /// Lebesgue–Stieltjes integral `∫_{(0,t]} g dμ` with `μ = self`.
    pub fn integrate(&self, g: &dyn Fn(f64) -> f64, t: f64) -> Result<f64> {
        ls_integral(g, self, t)
    }

    /// Absolutely continuous part (density only, initial value zero).
    pub fn ac_part(&self) -> FvFunction {
        FvFunction {
            domain_end: self.domain_end,
            density: self.density.clone(),
            cumulative: self.cumulative.clone(),
            atoms: Vec::new(),
            initial: 0.0,
        }
    }

    /// Purely discontinuous part (atoms only, initial value zero).
    pub fn pd_part(&self) -> FvFunction {
        FvFunction {
            domain_end: self.domain_end,
            density: None,
            cumulative: None,
            atoms: self.atoms.clone(),
            initial: 0.0,
        }
    }
}

/// `∫_{(0,t]} g(s) μ(ds)`: adaptive quadrature over the density with a
/// panel edge at every atom, plus `Σ_{s_i ≤ t} g(s_i)·Δμ(s_i)` evaluated
/// exactly.
pub fn ls_integral(g: &dyn Fn(f64) -> f64, mu: &FvFunction, t: f64) -> Result<f64> {
    mu.check_time(t)?;
    let continuous = match &mu.density {
        None => 0.0,
        Some(d) => quadrature::integral(
            &|s| {
                let w = d(s);
                if w == 0.0 {
                    0.0
                } else {
                    g(s) * w
                }
            },
            0.0,
            t,
            &mu.atom_times_before(t),
        )?,
    };
    let mut discrete = 0.0;
    for atom in mu.atoms.iter().take_while(|a| a.time <= t) {
        let term = g(atom.time) * atom.size;
        if !term.is_finite() {
            return Err(Error::Integrability {
                lo: atom.time,
                hi: atom.time,
                value: term,
            });
        }
        discrete += term;
    }
    Ok(continuous + discrete)
}

/// Lebesgue decomposition `μ = μᵃᶜ + μᵖᵈ`. The initial value stays with the
/// absolutely continuous part so that the two parts sum to `μ` pointwise.
pub fn decompose(mu: &FvFunction) -> (FvFunction, FvFunction) {
    let mut ac = mu.ac_part();
    ac.initial = mu.initial;
    (ac, mu.pd_part())
}

/// Hazard-type function: nondecreasing, `Λ(0) = 0`, atoms in `(0, 1)`, with
/// an atom of size exactly one allowed only as the final atom at the domain
/// end.
#[derive(Clone, Debug)]
pub struct AFunction(FvFunction);

impl AFunction {
    pub fn new(inner: FvFunction) -> Result<Self> {
        if inner.initial != 0.0 {
            return Err(Error::InvalidFunction(format!(
                "A-function must start at 0, got {}",
                inner.initial
            )));
        }
        let n = inner.atoms.len();
        for (i, atom) in inner.atoms.iter().enumerate() {
            let terminal = i + 1 == n && atom.time == inner.domain_end;
            let ok = atom.size > 0.0 && (atom.size < 1.0 || (atom.size == 1.0 && terminal));
            if !ok {
                return Err(Error::InvalidFunction(format!(
                    "hazard atom at {} has size {} (must lie in (0,1), or equal 1 at the domain end)",
                    atom.time, atom.size
                )));
            }
        }
        if let Some(d) = &inner.density {
            let probe_end = if inner.domain_end.is_finite() {
                inner.domain_end
            } else {
                1e3
            };
            for k in 0..=32 {
                let t = probe_end * k as f64 / 32.0;
                let v = d(t);
                if v < 0.0 {
                    return Err(Error::InvalidFunction(format!(
                        "hazard density is negative ({v}) at t = {t}"
                    )));
                }
            }
        }
        Ok(Self(inner))
    }

    pub fn as_fv(&self) -> &FvFunction {
        &self.0
    }

    pub fn into_fv(self) -> FvFunction {
        self.0
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.0.value(t)
    }

    pub fn domain_end(&self) -> f64 {
        self.0.domain_end
    }

    /// Time of a terminal unit atom, if any.
    pub fn forced_end(&self) -> Option<f64> {
        self.0
            .atoms
            .last()
            .filter(|a| a.size == 1.0)
            .map(|a| a.time)
    }
}

#[derive(Clone, Debug)]
enum MRepr {
    Additive(FvFunction),
    ProductIntegral(AFunction),
}

/// Survival-type function: nonincreasing, `F(0) = 1`, values in `[0, 1]`.
///
/// Either stored additively (density of `F` plus negative atoms) or as the
/// Stieltjes exponential of a hazard, in which case evaluation uses the
/// product formula directly.
#[derive(Clone, Debug)]
pub struct MFunction(MRepr);

impl MFunction {
    /// Builds an M-function from an additive description. Atom sizes must
    /// satisfy `-F(t-) ≤ ΔF(t) ≤ 0`.
    pub fn new(inner: FvFunction) -> Result<Self> {
        if inner.initial != 1.0 {
            return Err(Error::InvalidFunction(format!(
                "M-function must start at 1, got {}",
                inner.initial
            )));
        }
        for atom in &inner.atoms {
            let before = inner.left_limit(atom.time)?;
            if atom.size > 0.0 || atom.size < -before - 1e-14 {
                return Err(Error::InvalidFunction(format!(
                    "survival atom at {} has size {} with F(t-) = {before}",
                    atom.time, atom.size
                )));
            }
        }
        Ok(Self(MRepr::Additive(inner)))
    }

    pub fn domain_end(&self) -> f64 {
        match &self.0 {
            MRepr::Additive(f) => f.domain_end,
            MRepr::ProductIntegral(l) => l.domain_end(),
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match &self.0 {
            MRepr::Additive(f) => f.value(t),
            MRepr::ProductIntegral(l) => product_value(l, t, true),
        }
    }

    pub fn left_limit(&self, t: f64) -> Result<f64> {
        match &self.0 {
            MRepr::Additive(f) => f.left_limit(t),
            MRepr::ProductIntegral(l) => product_value(l, t, false),
        }
    }

    /// `c = inf{t : F(t) = 0}`, infinite when `F` stays positive.
    pub fn killing_time(&self) -> Result<f64> {
        match &self.0 {
            MRepr::ProductIntegral(l) => Ok(l.forced_end().unwrap_or(f64::INFINITY)),
            MRepr::Additive(f) => {
                for atom in &f.atoms {
                    if f.value(atom.time)?.abs() <= 1e-14 {
                        return Ok(atom.time);
                    }
                }
                Ok(f64::INFINITY)
            }
        }
    }

    /// Additive representation. For a product-integral function the density
    /// is `-λ(t)F(t)` and the atom at `s` has size `-ΔΛ(s)F(s-)`.
    pub fn to_fv(&self) -> Result<FvFunction> {
        match &self.0 {
            MRepr::Additive(f) => Ok(f.clone()),
            MRepr::ProductIntegral(l) => {
                let mut atoms = Vec::with_capacity(l.0.atoms.len());
                for a in &l.0.atoms {
                    atoms.push(Atom::new(
                        a.time,
                        -a.size * product_value(l, a.time, false)?,
                    ));
                }
                let density = l.0.density.clone().map(|d| {
                    let hazard = l.clone();
                    Arc::new(move |t: f64| {
                        let lam = d(t);
                        if lam == 0.0 {
                            0.0
                        } else {
                            -lam * product_value(&hazard, t, true).unwrap_or(f64::NAN)
                        }
                    }) as RealFn
                });
                FvFunction::new(l.0.domain_end, density, atoms, 1.0)
            }
        }
    }
}

fn product_value(l: &AFunction, t: f64, inclusive: bool) -> Result<f64> {
    let mut value = (-l.0.ac_value(t)?).exp();
    for atom in &l.0.atoms {
        if atom.time > t || (!inclusive && atom.time == t) {
            break;
        }
        value *= 1.0 - atom.size;
    }
    Ok(value)
}

/// Stieltjes exponential `F = sexp Λ`.
pub fn sexp(hazard: &AFunction) -> MFunction {
    MFunction(MRepr::ProductIntegral(hazard.clone()))
}

/// Stieltjes logarithm `Λ = slog F` with `Λ(dt) = -F(dt)/F(t-)`.
///
/// If an atom of `F` drives it to zero at `c` the hazard ends there with a
/// unit atom and its domain is cut to `[0, c]`; evaluating it later than `c`
/// fails with an out-of-domain error naming `c`.
pub fn slog(f: &MFunction) -> Result<AFunction> {
    let fv = match &f.0 {
        MRepr::ProductIntegral(l) => return Ok(l.clone()),
        MRepr::Additive(fv) => fv,
    };
    let mut atoms = Vec::with_capacity(fv.atoms.len());
    let mut domain_end = fv.domain_end;
    for atom in &fv.atoms {
        let before = fv.left_limit(atom.time)?;
        if before <= 0.0 {
            return Err(Error::ZeroSurvival { at: atom.time });
        }
        let after = before + atom.size;
        if after.abs() <= 1e-14 * before.max(1.0) {
            atoms.push(Atom::new(atom.time, 1.0));
            domain_end = atom.time;
            break;
        }
        atoms.push(Atom::new(atom.time, -atom.size / before));
    }
    let density = fv.density.clone().map(|d| {
        let survival = fv.clone();
        Arc::new(move |t: f64| {
            let slope = d(t);
            if slope == 0.0 {
                return 0.0;
            }
            match survival.left_limit(t) {
                Ok(before) if before > 0.0 => -slope / before,
                _ => f64::NAN,
            }
        }) as RealFn
    });
    AFunction::new(FvFunction::new(domain_end, density, atoms, 0.0)?)
}
