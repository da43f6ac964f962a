//! Simulator for an electron microscope that accumulates specimen phase on a
//! Cooper-pair-box charge qubit, `k` electrons per readout.
//!
//! * [`qubit`]: two-level box state, gates and Hamiltonian.
//! * [`detector`]: projection of the electron–box pair on detection.
//! * [`protocol`]: electron rounds, readout and the phase estimator.
//! * [`imaging`]: raster imaging, the phase-contrast baseline and filters.
//! * [`feasibility`]: device-physics estimates and a go/no-go report.
//! * [`dose`]: dose-limited resolution scaling laws.
//! * [`scaling`]: Monte-Carlo precision sweep over `k`.

pub mod detector;
pub mod dose;
pub mod error;
pub mod feasibility;
pub mod imaging;
pub mod protocol;
pub mod qubit;
pub mod rng;
pub mod scaling;
pub mod stats;

pub use detector::{DetectorModel, Entangled, InelasticEvent};
pub use error::{Error, Result};
pub use feasibility::{feasibility_report, DeviceParams, FeasibilityReport, PlanckConvention};
pub use imaging::{BeamProfile, ImageKind, ImageResult, ScanPlan, SpecimenPhaseMap};
pub use protocol::{CorrectionMode, InelasticModel, ProtocolConfig};
pub use qubit::{CpbHamiltonianParams, CpbState};
pub use rng::{Domain, SimRng, StreamFactory};
pub use scaling::{scaling_sweep, ScalingConfig, ScalingResult};
