//! Differential-form toolkit for geodesible vector fields, contact and
//! stable Hamiltonian structures, and Seifert fibration invariants.

pub mod catalog;
pub mod chart;
pub mod checks;
pub mod error;
pub mod expr;
pub mod forms;
pub mod integrate;
pub mod jet;
pub mod multi_index;
pub mod report;
pub mod riemannian;
pub mod seifert;

pub use chart::{ChartDomain, Point, SAMPLING_MARGIN};
pub use error::{CheckError, FormError, IntegrationError, InvariantError, MetricError};
pub use forms::{ext_d, interior, lie_derivative, pullback, wedge, FormValue, KForm, ScalarField, SmoothMap, VectorFieldRepr};
pub use integrate::{integrate_form, integrate_scalar, IntegrationResult, ParametrizedChain, QuadratureSpec};
pub use jet::Jet;
pub use report::{CheckReport, Provenance, Quantity};
pub use seifert::{Orbifold2D, RationalQ, SeifertData, ZeroDatum};
