//! Feedback laws: EPD IDA-PBC (closed forms and generic assembly) and the
//! Pomet/Astolfi comparison laws.

mod baselines;
mod epd;

pub use baselines::{astolfi_control, pomet_control, AstolfiParams};
pub use epd::{
    epd_control_chained, epd_control_generic, epd_control_integrator, in_local_ball,
    inadmissible_indicator, ph_field, CustomStructure, EpdStructure, StructureMatrices,
};

use crate::energy::EnergyParams;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::systems::SystemModel;

/// Which law drives the plant, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControllerSpec<T> {
    /// `u ≡ 0`.
    Zero,
    EpdIntegrator(EnergyParams<T>),
    EpdChained(EnergyParams<T>),
    /// `(SᵀS)⁻¹Sᵀ` assembly from [`EpdStructure`].
    EpdGeneric(EnergyParams<T>),
    Pomet,
    Astolfi(AstolfiParams<T>),
}

impl<T: Scalar> ControllerSpec<T> {
    pub fn control(&self, model: &SystemModel, x: &[T], t: T) -> Result<[T; 2]> {
        match self {
            Self::Zero => Ok([T::zero(), T::zero()]),
            Self::EpdIntegrator(p) => epd_control_integrator(x, p),
            Self::EpdChained(p) => epd_control_chained(x, p),
            Self::EpdGeneric(p) => {
                let mats = EpdStructure::new(model, *p);
                epd_control_generic(model, x, &mats, &model.partition_default())
            }
            Self::Pomet => pomet_control(x, t),
            Self::Astolfi(p) => astolfi_control(x, p),
        }
    }

    /// Parameters used for energy diagnostics; the non-EPD laws are judged
    /// against state regulation.
    pub fn energy_params(&self) -> EnergyParams<T> {
        match self {
            Self::EpdIntegrator(p) | Self::EpdChained(p) | Self::EpdGeneric(p) => *p,
            _ => EnergyParams::state_regulation(),
        }
    }

    pub fn is_epd(&self) -> bool {
        matches!(
            self,
            Self::EpdIntegrator(_) | Self::EpdChained(_) | Self::EpdGeneric(_)
        )
    }

    /// Whether the law only applies to the three-state integrator.
    pub fn integrator_only(&self) -> bool {
        matches!(
            self,
            Self::EpdIntegrator(_) | Self::Pomet | Self::Astolfi(_)
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::EpdIntegrator(_) => "epd_integrator",
            Self::EpdChained(_) => "epd_chained",
            Self::EpdGeneric(_) => "epd_generic",
            Self::Pomet => "pomet",
            Self::Astolfi(_) => "astolfi",
        }
    }
}
