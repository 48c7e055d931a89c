#pragma once

#include <cstdint>
#include <vector>

#include "pccl/feature.hpp"

namespace pccl {

/// Raw activations of one backbone stage, channel-major (c, h, w).
struct LayerOutput {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> activations;
};

/// Backbone outputs for one image, finest layer first.
struct LayerStack {
  std::vector<LayerOutput> layers;
};

/// Turns backbone layer outputs into patch features.
///
/// Each layer is average-pooled over a `neighborhood` x `neighborhood` window
/// (stride 1, same-size output, only in-bounds cells are averaged), coarser
/// layers are resized to the target grid by nearest-neighbor sampling, and
/// channels are concatenated in layer order, so dim = sum of channels.
///
/// The target grid is the spatial size of the first layer. Throws
/// InvalidArgument on an empty stack, an even or zero neighborhood, malformed
/// activation buffers or non-finite values.
FeatureGrid aggregate_layers(const LayerStack& stack, std::uint32_t neighborhood,
                             ImageGeometry geometry = {});

} // namespace pccl
