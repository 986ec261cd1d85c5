#pragma once

#include <cstdint>

#include "spectraldip/image.hpp"

namespace spectraldip {

/// Procedurally generated desk-scale test images (grayscale, [0,1]).
/// All generators are deterministic in (size, seed).

/// Smooth gradients and wide blobs; almost all spectral mass at low
/// frequencies.
Image coarse_exemplar(int size = 128, std::uint64_t seed = 7);

/// Oriented high-frequency texture over a smooth base; a large share of
/// spectral mass in the upper frequency bands.
Image fine_exemplar(int size = 128, std::uint64_t seed = 11);

/// Texture family spanning coarse (0) / medium (1) / fine (2) classes;
/// idx varies the instance within a class.
Image texture_sample(int texture_class, int idx, int size = 128);

/// Smooth random field: a coarse random grid upsampled bicubically,
/// normalized to [0,1].
Image value_noise(int size, int grid, std::uint64_t seed);

}  // namespace spectraldip
