//! Forward math of the rotation-invariant encoder and the attention branch.
//!
//! Nothing here is trained: filter banks, bottleneck matrices and 1x1 mixers
//! are inputs, either loaded with [`tensor_io`] or drawn from a seeded stream.

mod arf;
mod attention;
pub mod tensor_io;

pub use arf::{
    arf_expand, orconv_forward, rotate_kernel, s_oralign, OrientedTensor, RotatingFilterBank,
    ORIENTATIONS,
};
pub use attention::{
    channel_excite, channel_squeeze, factorize_attention, modulate_features,
    ChannelAttentionWeights, Refinement, DEFAULT_REDUCTION,
};
