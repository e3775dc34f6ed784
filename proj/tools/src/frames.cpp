#include "frames.hpp"

#include <algorithm>

namespace con360::cli {

FrameStack::FrameStack(TensorF data) : data_(std::move(data)) {
  switch (data_.rank()) {
    case 2:
      frame_shape_ = data_.shape();
      break;
    case 3:
    case 4:
      frames_ = data_.dim(0);
      frame_shape_.assign(data_.shape().begin() + 1, data_.shape().end());
      break;
    default:
      raise(ErrorKind::kShape, "frames must be (H, W), (T, H, W) or (T, C, H, W), got " +
                                   shape_to_string(data_.shape()));
  }
  if (frames_ == 0) raise(ErrorKind::kShape, "frame stack is empty");
}

TensorF FrameStack::frame(std::size_t t) const {
  if (data_.rank() == 2) return data_;
  const auto slab = data_.slab(t);
  return TensorF(frame_shape_, std::vector<float>(slab.begin(), slab.end()));
}

TensorF FrameStack::assemble(const std::vector<TensorF>& per_frame) const {
  if (data_.rank() == 2) return per_frame.front();
  Shape shape{per_frame.size()};
  const Shape& inner = per_frame.front().shape();
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<float> values;
  values.reserve(shape_numel(shape));
  for (const auto& f : per_frame) values.insert(values.end(), f.storage().begin(), f.storage().end());
  return TensorF(std::move(shape), std::move(values));
}

}  // namespace con360::cli
