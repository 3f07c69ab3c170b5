//! Bundled demo circuits. The `.bench` sources live in `designs/` at the
//! repository root and are embedded here so library tests and downstream
//! tools can use them without touching the filesystem.

use crate::netlist::{parse_bench, Circuit};

pub const FIG_DEMO_BENCH: &str = include_str!("../../../designs/fig_demo.bench");
pub const C17_BENCH: &str = include_str!("../../../designs/c17.bench");

/// The two-cone worked-example circuit (6 inputs, 2 outputs, 3 key bits).
pub fn fig_demo() -> Circuit {
    parse_bench(FIG_DEMO_BENCH).expect("bundled fig_demo.bench parses")
}

/// ISCAS-85 c17.
pub fn c17() -> Circuit {
    parse_bench(C17_BENCH).expect("bundled c17.bench parses")
}
