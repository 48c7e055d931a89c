#include "pccl/aggregate.hpp"

#include <cmath>
#include <string>

#include "pccl/errors.hpp"

namespace pccl {

namespace {

// Mean over the in-bounds part of a (2r+1)^2 window, computed with a
// summed-area table per channel.
std::vector<double> box_average(const LayerOutput& layer, std::uint32_t radius) {
  const std::size_t h = layer.height, w = layer.width;
  std::vector<double> out(layer.activations.size());
  std::vector<double> sat((h + 1) * (w + 1));
  for (std::size_t c = 0; c < layer.channels; ++c) {
    const float* plane = layer.activations.data() + c * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      double row = 0.0;
      for (std::size_t x = 0; x < w; ++x) {
        row += plane[y * w + x];
        sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
      }
    }
    for (std::size_t y = 0; y < h; ++y) {
      const std::size_t y0 = y >= radius ? y - radius : 0;
      const std::size_t y1 = std::min(h, y + radius + 1);
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t x0 = x >= radius ? x - radius : 0;
        const std::size_t x1 = std::min(w, x + radius + 1);
        const double sum = sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] -
                           sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
        out[c * h * w + y * w + x] = sum / static_cast<double>((y1 - y0) * (x1 - x0));
      }
    }
  }
  return out;
}

void check_layer(const LayerOutput& layer, std::size_t index) {
  const std::string where = "layer " + std::to_string(index);
  if (layer.channels == 0 || layer.height == 0 || layer.width == 0)
    throw InvalidArgument(where + " has an empty shape");
  if (layer.activations.size() != std::size_t{layer.channels} * layer.height * layer.width)
    throw InvalidArgument(where + " activation count does not match its shape");
  for (float v : layer.activations)
    if (!std::isfinite(v)) throw InvalidArgument(where + " has non-finite activations");
}

} // namespace

FeatureGrid aggregate_layers(const LayerStack& stack, std::uint32_t neighborhood,
                             ImageGeometry geometry) {
  if (stack.layers.empty()) throw InvalidArgument("layer stack is empty");
  if (neighborhood == 0 || neighborhood % 2 == 0)
    throw InvalidArgument("neighborhood must be odd and positive, got " +
                          std::to_string(neighborhood));

  std::size_t dim = 0;
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    check_layer(stack.layers[i], i);
    dim += stack.layers[i].channels;
  }

  const std::uint32_t gh = stack.layers.front().height;
  const std::uint32_t gw = stack.layers.front().width;
  std::vector<float> data(std::size_t{gh} * gw * dim);

  std::size_t channel_offset = 0;
  for (const auto& layer : stack.layers) {
    const auto pooled = box_average(layer, neighborhood / 2);
    const std::size_t lh = layer.height, lw = layer.width;
    for (std::uint32_t y = 0; y < gh; ++y) {
      // nearest: floor(dst * in / out)
      const std::size_t sy = std::size_t{y} * lh / gh;
      for (std::uint32_t x = 0; x < gw; ++x) {
        const std::size_t sx = std::size_t{x} * lw / gw;
        float* cell = data.data() + (std::size_t{y} * gw + x) * dim + channel_offset;
        for (std::size_t c = 0; c < layer.channels; ++c)
          cell[c] = static_cast<float>(pooled[c * lh * lw + sy * lw + sx]);
      }
    }
    channel_offset += layer.channels;
  }

  FeatureGrid grid;
  grid.grid_h = gh;
  grid.grid_w = gw;
  grid.geometry = geometry;
  grid.patches = PatchMatrix(dim, std::move(data));
  return grid;
}

} // namespace pccl
