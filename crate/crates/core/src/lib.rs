//! Dimensional circuit synthesis.
//!
//! Compiles unit-annotated descriptions of a physical system's signals into
//! hardware that computes the system's dimensionless products:
//!
//! * [`dsl`] parses the Newton specification subset,
//! * [`dimension`] evaluates units to SI dimension vectors,
//! * [`pi`] derives a canonical Π basis with the target isolated,
//! * [`fixedpoint`] models the hardware number format,
//! * [`datapath`] lowers each Π to a serial multiply/divide schedule,
//! * [`rtl`] emits Verilog, a testbench and a manifest,
//! * [`sim`] executes the schedules bit-accurately against LFSR stimulus.

pub mod corpus;
pub mod datapath;
pub mod dimension;
pub mod dsl;
pub mod fixedpoint;
pub mod pi;
pub mod rtl;
pub mod sim;
