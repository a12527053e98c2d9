//! Fixtures shared by the benchmarks.

use contrarian_core::{ConvolutionSet, GroupParams};

pub fn four_neighbour(n: u32) -> (GroupParams, ConvolutionSet) {
    let g = GroupParams::new(n, 2).expect("valid group");
    let c = ConvolutionSet::parse(&g, "(1,0);(0,1);(-1,0);(0,-1)").expect("valid set");
    (g, c)
}
