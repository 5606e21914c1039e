//! Named closed-form backgrounds.

use super::config::BackgroundSpec;
use crate::conformal_geometry::{AmbientMetric, MapField, RadialProfile, ScalarField, TargetMetric};
use crate::error::{GeoError, Result};
use crate::mcf::Ambient;
use crate::rh_flow::{Background, BackgroundSlice, SelfSimilarBackground, StaticBackground};
use crate::soliton_ode::{SolitonClass, SolitonParams};

/// A registry background: either a self-similar soliton solution or fixed data.
#[derive(Debug, Clone)]
pub enum BuiltBackground {
    SelfSimilar(SelfSimilarBackground),
    Static(StaticBackground),
}

impl BuiltBackground {
    pub fn class(&self) -> Option<SolitonClass> {
        match self {
            BuiltBackground::SelfSimilar(bg) => Some(bg.params().class),
            BuiltBackground::Static(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BuiltBackground::SelfSimilar(bg) => bg.dim(),
            BuiltBackground::Static(bg) => bg.metric.dim(),
        }
    }

    pub fn self_similar(&self) -> Option<&SelfSimilarBackground> {
        match self {
            BuiltBackground::SelfSimilar(bg) => Some(bg),
            BuiltBackground::Static(_) => None,
        }
    }
}

impl Background for BuiltBackground {
    fn slice_at(&self, t: f64) -> Result<BackgroundSlice> {
        match self {
            BuiltBackground::SelfSimilar(bg) => bg.slice_at(t),
            BuiltBackground::Static(bg) => bg.slice_at(t),
        }
    }
    fn target(&self) -> &TargetMetric {
        match self {
            BuiltBackground::SelfSimilar(bg) => Background::target(bg),
            BuiltBackground::Static(bg) => Background::target(bg),
        }
    }
    fn is_steady_soliton(&self) -> bool {
        match self {
            BuiltBackground::SelfSimilar(bg) => bg.is_steady_soliton(),
            BuiltBackground::Static(bg) => bg.is_steady_soliton(),
        }
    }
    fn alpha(&self) -> f64 {
        match self {
            BuiltBackground::SelfSimilar(bg) => bg.alpha(),
            BuiltBackground::Static(bg) => bg.alpha(),
        }
    }
}

impl Ambient for BuiltBackground {
    fn metric_at(&self, t: f64) -> Result<AmbientMetric> {
        match self {
            BuiltBackground::SelfSimilar(bg) => bg.metric_at(t),
            BuiltBackground::Static(bg) => bg.metric_at(t),
        }
    }
}

/// Radial soliton data carried by a profile, for the ODE scenario.
#[derive(Debug, Clone)]
pub struct RadialSoliton {
    pub factor: RadialProfile,
    pub potential: RadialProfile,
    pub class: SolitonClass,
}

pub struct Profile {
    pub name: &'static str,
    pub description: &'static str,
    /// Classes the profile can represent; the first is the default.
    pub classes: &'static [SolitonClass],
    build: fn(&BackgroundSpec, SolitonClass) -> Result<BuiltBackground>,
    radial: Option<fn(SolitonClass) -> RadialSoliton>,
}

impl Profile {
    /// Builds the background after checking the requested class and dimension.
    pub fn build(&self, spec: &BackgroundSpec) -> Result<BuiltBackground> {
        let class = self.class_for(spec)?;
        (self.build)(spec, class)
    }

    pub fn class_for(&self, spec: &BackgroundSpec) -> Result<SolitonClass> {
        match spec.class {
            None => Ok(self.classes[0]),
            Some(c) if self.classes.contains(&c) => Ok(c),
            Some(c) => Err(GeoError::Precondition(format!("profile {} has no {c:?} form", self.name))),
        }
    }

    pub fn radial_soliton(&self, spec: &BackgroundSpec) -> Result<RadialSoliton> {
        let class = self.class_for(spec)?;
        self.radial
            .map(|r| r(class))
            .ok_or_else(|| GeoError::Precondition(format!("profile {} has no radial soliton", self.name)))
    }
}

const SHRINK_EXPAND: &[SolitonClass] = &[SolitonClass::Shrinking, SolitonClass::Expanding];
const STEADY: &[SolitonClass] = &[SolitonClass::Steady];

fn plane_only(spec: &BackgroundSpec, name: &str) -> Result<()> {
    if spec.dim != 2 {
        return Err(GeoError::Precondition(format!("profile {name} is two-dimensional, got dim = {}", spec.dim)));
    }
    Ok(())
}

fn gaussian_potential(class: SolitonClass) -> RadialProfile {
    let c2 = if class == SolitonClass::Expanding { -0.25 } else { 0.25 };
    RadialProfile::Quadratic { c0: 0.0, c2 }
}

fn soliton(metric: AmbientMetric, potential: ScalarField, spec: &BackgroundSpec, class: SolitonClass) -> Result<BuiltBackground> {
    let params = match class {
        SolitonClass::Steady => SolitonParams::steady(spec.alpha),
        c => SolitonParams::new(c, spec.alpha, spec.horizon)?,
    };
    Ok(BuiltBackground::SelfSimilar(SelfSimilarBackground::new(
        metric,
        TargetMetric::euclidean(1),
        MapField::Constant(vec![0.0]),
        potential,
        params,
    )?))
}

fn fixed(metric: AmbientMetric, spec: &BackgroundSpec) -> BuiltBackground {
    BuiltBackground::Static(StaticBackground { alpha: spec.alpha, ..StaticBackground::plain(metric) })
}

pub static PROFILES: &[Profile] = &[
    Profile {
        name: "euclidean",
        description: "flat ℝ^m, f ≡ 0 (static)",
        classes: STEADY,
        build: |s, _| Ok(fixed(AmbientMetric::euclidean(s.dim), s)),
        radial: Some(|class| RadialSoliton { factor: RadialProfile::Constant(1.0), potential: RadialProfile::Constant(0.0), class }),
    },
    Profile {
        name: "gaussian",
        description: "flat ℝ^m with f = ±|x|²/4: Gaussian shrinker or expander with horizon T",
        classes: SHRINK_EXPAND,
        build: |s, class| soliton(AmbientMetric::euclidean(s.dim), ScalarField::Radial(gaussian_potential(class)), s, class),
        radial: Some(|class| RadialSoliton { factor: RadialProfile::Constant(1.0), potential: gaussian_potential(class), class }),
    },
    Profile {
        name: "cigar",
        description: "Hamilton's cigar (1 + r²)⁻¹δ with f = −log(1 + r²), steady, m = 2",
        classes: STEADY,
        build: |s, class| {
            plane_only(s, "cigar")?;
            soliton(AmbientMetric::new(2, RadialProfile::Cigar)?, ScalarField::Radial(RadialProfile::LogOnePlusSquare { scale: -1.0 }), s, class)
        },
        radial: Some(|class| RadialSoliton {
            factor: RadialProfile::Cigar,
            potential: RadialProfile::LogOnePlusSquare { scale: -1.0 },
            class,
        }),
    },
    Profile {
        name: "round_sphere_chart",
        description: "unit sphere in the stereographic chart 4(1 + r²)⁻²δ, f ≡ 0 (static)",
        classes: STEADY,
        build: |s, _| Ok(fixed(AmbientMetric::new(s.dim, RadialProfile::RoundSphereChart)?, s)),
        radial: None,
    },
    Profile {
        name: "grim_reaper_f",
        description: "flat plane with f = −y, the translating background of the Grim Reaper",
        classes: STEADY,
        build: |s, class| {
            plane_only(s, "grim_reaper_f")?;
            soliton(AmbientMetric::euclidean(2), ScalarField::Affine { coeffs: vec![0.0, -1.0], offset: 0.0 }, s, class)
        },
        radial: None,
    },
    Profile {
        name: "linear_f",
        description: "flat ℝ^m with f = −c·x_m (background.slope = c), steady",
        classes: STEADY,
        build: |s, class| {
            let mut coeffs = vec![0.0; s.dim];
            coeffs[s.dim - 1] = -s.slope;
            soliton(AmbientMetric::euclidean(s.dim), ScalarField::Affine { coeffs, offset: 0.0 }, s, class)
        },
        radial: None,
    },
    Profile {
        name: "flat_cylinder",
        description: "the flat cylinder r⁻²(dr² + r²dθ²) on an annulus, f ≡ 0 (static), m = 2",
        classes: STEADY,
        build: |s, _| {
            plane_only(s, "flat_cylinder")?;
            Ok(fixed(AmbientMetric::new(2, RadialProfile::Linear { scale: 1.0 })?, s))
        },
        radial: None,
    },
];

pub fn lookup(name: &str) -> Option<&'static Profile> {
    PROFILES.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(profile: &str, dim: usize) -> BackgroundSpec {
        BackgroundSpec { profile: profile.into(), dim, alpha: 0.0, class: None, horizon: 1.0, slope: 1.0 }
    }

    #[test]
    fn every_profile_builds_in_its_dimension() {
        for p in PROFILES {
            let dim = if ["cigar", "grim_reaper_f", "flat_cylinder"].contains(&p.name) { 2 } else { 3 };
            let bg = p.build(&spec(p.name, dim)).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(bg.dim(), dim);
        }
    }

    #[test]
    fn class_mismatch_is_refused() {
        let mut s = spec("cigar", 2);
        s.class = Some(SolitonClass::Shrinking);
        assert!(lookup("cigar").unwrap().build(&s).is_err());
        s.profile = "gaussian".into();
        s.class = Some(SolitonClass::Expanding);
        assert_eq!(lookup("gaussian").unwrap().build(&s).unwrap().class(), Some(SolitonClass::Expanding));
    }

    #[test]
    fn planar_profiles_reject_other_dimensions() {
        assert!(lookup("cigar").unwrap().build(&spec("cigar", 3)).is_err());
    }
}
