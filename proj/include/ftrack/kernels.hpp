#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ftrack/error.hpp"
#include "ftrack/frenet.hpp"
#include "ftrack/mlp.hpp"

// Batched data-parallel kernels. Each kernel has a serial reference in
// `serial` and an OpenMP version in `omp`. Batches are row-major: sample i
// occupies [i * dim, (i + 1) * dim).
namespace ftrack::kernels {

struct BatchGradients {
  Gradients params;                 // summed over the batch
  std::vector<double> input_grads;  // batch x input_dim, empty if not wanted
};

struct FrenetResult {
  FrenetState state;
  std::optional<ErrorCode> error;
};

// ToFrenet on one state with the failure captured instead of thrown.
FrenetResult TransformOne(const ReferencePath& path, const CartesianState& c);

// The OpenMP backward pass reduces over this many fixed sample ranges, in
// order, so its result does not depend on the thread count.
inline constexpr std::size_t kReductionChunks = 8;

namespace serial {

std::vector<double> Forward(const Network& net, std::span<const double> inputs,
                            std::size_t batch);

BatchGradients Backward(const Network& net, std::span<const double> inputs,
                        std::span<const double> upstream, std::size_t batch,
                        bool want_input_grads);

std::vector<FrenetResult> ToFrenet(const ReferencePath& path,
                                   std::span<const CartesianState> states);

}  // namespace serial

namespace omp {

std::vector<double> Forward(const Network& net, std::span<const double> inputs,
                            std::size_t batch);

BatchGradients Backward(const Network& net, std::span<const double> inputs,
                        std::span<const double> upstream, std::size_t batch,
                        bool want_input_grads);

std::vector<FrenetResult> ToFrenet(const ReferencePath& path,
                                   std::span<const CartesianState> states);

}  // namespace omp

// Shared argument checks; throws kDimensionMismatch.
void CheckBatch(const Network& net, std::span<const double> inputs,
                std::size_t batch);
void CheckBatch(const Network& net, std::span<const double> inputs,
                std::span<const double> upstream, std::size_t batch);

}  // namespace ftrack::kernels
