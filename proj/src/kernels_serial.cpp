#include <algorithm>
#include <string>

#include "ftrack/kernels.hpp"

namespace ftrack::kernels {

void CheckBatch(const Network& net, std::span<const double> inputs,
                std::size_t batch) {
  if (inputs.size() != batch * net.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "batch input has " + std::to_string(inputs.size()) +
                    " values, expected " +
                    std::to_string(batch * net.input_dim()));
  }
}

void CheckBatch(const Network& net, std::span<const double> inputs,
                std::span<const double> upstream, std::size_t batch) {
  CheckBatch(net, inputs, batch);
  if (upstream.size() != batch * net.output_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "batch upstream has " + std::to_string(upstream.size()) +
                    " values, expected " +
                    std::to_string(batch * net.output_dim()));
  }
}

FrenetResult TransformOne(const ReferencePath& path, const CartesianState& c) {
  try {
    return {ToFrenet(path, c), std::nullopt};
  } catch (const Error& e) {
    return {FrenetState{}, e.code()};
  }
}

namespace serial {

std::vector<double> Forward(const Network& net, std::span<const double> inputs,
                            std::size_t batch) {
  CheckBatch(net, inputs, batch);
  const std::size_t in = net.input_dim();
  const std::size_t out = net.output_dim();
  std::vector<double> result(batch * out);
  Workspace ws;
  for (std::size_t i = 0; i < batch; ++i) {
    const auto y = net.Forward(inputs.subspan(i * in, in), ws);
    std::copy(y.begin(), y.end(), result.begin() + i * out);
  }
  return result;
}

BatchGradients Backward(const Network& net, std::span<const double> inputs,
                        std::span<const double> upstream, std::size_t batch,
                        bool want_input_grads) {
  CheckBatch(net, inputs, upstream, batch);
  const std::size_t in = net.input_dim();
  const std::size_t out = net.output_dim();
  BatchGradients result{Gradients::ZerosLike(net), {}};
  if (want_input_grads) result.input_grads.assign(batch * in, 0.0);
  Workspace ws;
  for (std::size_t i = 0; i < batch; ++i) {
    net.Forward(inputs.subspan(i * in, in), ws);
    std::span<double> dx;
    if (want_input_grads) dx = std::span<double>(result.input_grads).subspan(i * in, in);
    net.BackwardAccumulate(ws, upstream.subspan(i * out, out), result.params, dx);
  }
  return result;
}

std::vector<FrenetResult> ToFrenet(const ReferencePath& path,
                                   std::span<const CartesianState> states) {
  std::vector<FrenetResult> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = TransformOne(path, states[i]);
  return out;
}

}  // namespace serial
}  // namespace ftrack::kernels
