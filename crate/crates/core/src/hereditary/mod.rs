//! Hereditary properties: membership, member enumeration, closure checks and
//! exact speeds.

mod check;
mod members;
mod property;
mod speed;

pub use check::{check_hereditary, HereditaryReport, Violation, ViolationKind};
pub use members::{units, units_touching, MemberStore, Shape, Unit};
pub use property::{Builtin, HereditaryProperty, PropertySpec};
pub use speed::{speed, speed_table, speed_table_with, speed_with, SpeedEntry, SpeedMethod, SpeedTable};
pub(crate) use members::for_each_unit_subset;
