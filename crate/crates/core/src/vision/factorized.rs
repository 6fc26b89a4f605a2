//! Inception-style factorization of large 2-D kernels.
//!
//! A 5x5 convolution is replaced by two stacked 3x3 convolutions, and an
//! n x n convolution by a 1 x n followed by an n x 1. Both keep the receptive
//! field of the kernel they replace while doing fewer multiplies per output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{conv_forward, ConvSpec, Padding};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorizationMode {
    FiveAsTwoThrees,
    AsymmetricPair(usize),
}

impl FactorizationMode {
    /// Minimum spatial extent accepted by [`factorized_forward`].
    pub fn min_extent(self) -> usize {
        match self {
            FactorizationMode::FiveAsTwoThrees => 5,
            FactorizationMode::AsymmetricPair(n) => n,
        }
    }

    /// Kernel extents of the constituent convolutions, in application order.
    pub fn kernel_dims(self) -> [[usize; 2]; 2] {
        match self {
            FactorizationMode::FiveAsTwoThrees => [[3, 3], [3, 3]],
            FactorizationMode::AsymmetricPair(n) => [[1, n], [n, 1]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FactorizedBlock<T = f64> {
    mode: FactorizationMode,
    convs: [ConvSpec<T>; 2],
}

impl<T: Scalar> FactorizedBlock<T> {
    /// Checks that `convs` are 2-D, valid-padded, unit-stride, chain on
    /// channels and have the extents `mode` requires.
    pub fn new(mode: FactorizationMode, convs: [ConvSpec<T>; 2]) -> Result<Self> {
        if let FactorizationMode::AsymmetricPair(0) = mode {
            return Err(Error::InvalidConfig("asymmetric pair needs n >= 1".into()));
        }
        for (spec, want) in convs.iter().zip(mode.kernel_dims()) {
            spec.validate()?;
            if spec.spatial_rank() != 2 || spec.kernel_dims() != want {
                return Err(Error::shape(
                    "factorized block",
                    format!("{mode:?} needs a {want:?} kernel, got {:?}", spec.kernel.shape()),
                ));
            }
            if spec.padding != Padding::Valid || spec.stride != [1, 1] {
                return Err(Error::InvalidConfig(
                    "factorized convolutions use valid padding and unit stride".into(),
                ));
            }
        }
        if convs[0].out_channels() != convs[1].in_channels() {
            return Err(Error::shape(
                "factorized block",
                format!(
                    "first conv emits {} channels, second expects {}",
                    convs[0].out_channels(),
                    convs[1].in_channels()
                ),
            ));
        }
        Ok(FactorizedBlock { mode, convs })
    }

    pub fn mode(&self) -> FactorizationMode {
        self.mode
    }

    pub fn convs(&self) -> &[ConvSpec<T>; 2] {
        &self.convs
    }
}

/// Applies the block's convolutions in sequence to a `[C, H, W]` input.
pub fn factorized_forward<T: Scalar>(block: &FactorizedBlock<T>, input: &Tensor<T>) -> Result<Tensor<T>> {
    if input.rank() != 3 {
        return Err(Error::shape(
            "factorized block",
            format!("expected [C, H, W] input, got {:?}", input.shape()),
        ));
    }
    let need = block.mode.min_extent();
    let (h, w) = (input.shape()[1], input.shape()[2]);
    if h < need || w < need {
        return Err(Error::TooShort {
            context: "factorized block spatial extent",
            needed: need,
            got: h.min(w),
        });
    }
    let mid = conv_forward(input, &block.convs[0])?;
    conv_forward(&mid, &block.convs[1])
}

/// Multiplies per output element for a `kernel_h x kernel_w` convolution.
///
/// Unfactorized this is `h * w`. Factorized, a 5x5 kernel counts as two
/// stacked 3x3 kernels (18); any other kernel counts as the asymmetric pair
/// `1 x w` + `h x 1` (`h + w`, i.e. `2n` for square kernels).
pub fn multiply_count(kernel_h: usize, kernel_w: usize, factorized: bool) -> usize {
    if !factorized {
        kernel_h * kernel_w
    } else if kernel_h == 5 && kernel_w == 5 {
        9 + 9
    } else {
        kernel_h + kernel_w
    }
}
