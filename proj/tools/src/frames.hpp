#pragma once

#include <cstddef>
#include <vector>

#include "con360/tensor.hpp"

namespace con360::cli {

// An NPY frame stack: (H, W) is one frame, (T, H, W) grayscale frames,
// (T, C, H, W) multi-channel frames.
class FrameStack {
 public:
  explicit FrameStack(TensorF data);

  std::size_t frames() const { return frames_; }
  TensorF frame(std::size_t t) const;  // (H, W) or (C, H, W)
  // Stacks per-frame outputs back into the input's layout.
  TensorF assemble(const std::vector<TensorF>& per_frame) const;

 private:
  TensorF data_;
  std::size_t frames_ = 1;
  Shape frame_shape_;
};

}  // namespace con360::cli
