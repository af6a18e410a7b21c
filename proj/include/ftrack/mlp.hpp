#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ftrack {

enum class Activation { kIdentity, kRelu, kTanh };

std::string ToString(Activation a);
Activation ParseActivation(const std::string& name);

// Elementwise f(v) in place.
void Activate(Activation a, std::span<double> v);
// Multiplies delta in place by f'(pre), expressed through the output y = f(pre).
void ActivationGrad(Activation a, std::span<const double> y, std::span<double> delta);

struct NetworkSpec {
  std::vector<std::size_t> layer_sizes;  // input first, output last
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kIdentity;

  bool operator==(const NetworkSpec&) const = default;
};

// Throws kInvalidSpec.
void Validate(const NetworkSpec& spec);

// Dense layer y = W x + b with W stored row-major (rows = outputs).
struct Layer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> w;
  std::vector<double> b;

  bool operator==(const Layer&) const = default;
};

class Network;

// Parameter-shaped buffer; also used for accumulated batch gradients.
struct Gradients {
  std::vector<Layer> layers;

  static Gradients ZerosLike(const Network& net);
  void SetZero();
  void Add(const Gradients& other);
  void Scale(double factor);
  bool SameShape(const Network& net) const;
};

// Scratch activations for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[k] = layer k out
  std::vector<double> delta;
  std::vector<double> delta_prev;
};

class Network {
 public:
  Network() = default;
  // Throws kInvalidSpec if the layers do not match the NetworkSpec.
  Network(NetworkSpec spec, std::vector<Layer> layers);

  // Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases.
  static Network Init(const NetworkSpec& spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  std::size_t input_dim() const { return spec_.layer_sizes.front(); }
  std::size_t output_dim() const { return spec_.layer_sizes.back(); }
  std::size_t parameter_count() const;
  bool SameShape(const Network& other) const;

  // Throws kDimensionMismatch.
  std::vector<double> Forward(std::span<const double> x) const;

  // Allocation-free forward; the result is ws.act.back().
  std::span<const double> Forward(std::span<const double> x,
                                  Workspace& ws) const;

  // Reverse pass for the last Forward(x, ws): adds d(upstream . y)/dtheta into
  // grads and writes d(upstream . y)/dx into input_grad (if non-empty).
  void BackwardAccumulate(Workspace& ws, std::span<const double> upstream,
                          Gradients& grads, std::span<double> input_grad) const;

  bool operator==(const Network&) const = default;

 private:
  NetworkSpec spec_;
  std::vector<Layer> layers_;
};

struct BackwardResult {
  Gradients grads;
  std::vector<double> input_grad;
};

// Exact gradients of upstream . f(x) w.r.t. all parameters and x.
// Throws kDimensionMismatch.
BackwardResult Backward(const Network& net, std::span<const double> x,
                        std::span<const double> upstream);

// p <- p - lr * g for every parameter. Throws kDimensionMismatch or
// kInvalidParams (lr <= 0).
void SgdStep(Network& net, const Gradients& grads, double lr);

// Checkpoint document, format version 1.
inline constexpr int kNetworkFormatVersion = 1;
nlohmann::json Serialize(const Network& net);
// Throws kMalformedDocument or kVersionMismatch.
Network Deserialize(const nlohmann::json& doc);
// Parses checkpoint text; unparsable or truncated text is kMalformedDocument.
Network DeserializeText(std::string_view text);

}  // namespace ftrack
