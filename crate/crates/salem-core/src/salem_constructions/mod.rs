//! Reduction machines built on the Kaufman levels, and the digit codec.

pub mod blocks;
pub mod codec;
pub mod g;
pub mod t_level;

pub use blocks::{
    big_f_level, big_f_weights, cantor_level, f_level, h_level, phi_saturate, radial_lift, BitMatrixPrefix,
    LowerRealPrefix, RadialSet,
};
pub use codec::{weihrauch_decode, weihrauch_encode};
pub use g::{g_construction_level, g_profile_trace, GStage, GTrace};
pub use t_level::{t_level, t_levels, TLevel};
