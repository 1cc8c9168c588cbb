pub mod bench;
pub mod cnl;
pub mod datagen;
pub mod engine;
pub mod keyword;
pub mod mmsr;
pub mod predicates;
pub mod registry;
pub mod ruleset;
pub mod spec;
#[cfg(any(test, feature = "testing"))]
pub mod testing;
pub mod value;

pub use engine::{ConformResult, Problem};
pub use keyword::{Keyword, KeywordError};
pub use registry::{Registry, SpecEntry, SpecError};
pub use spec::{Combinator, SpecForm, SpecMeta};
pub use value::{PathStep, Value};
