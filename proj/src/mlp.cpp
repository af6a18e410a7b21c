#include "ftrack/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ftrack/error.hpp"

namespace ftrack {
namespace {

using json = nlohmann::json;

void RequireDim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " has length " + std::to_string(got) +
                    ", expected " + std::to_string(want));
  }
}

}  // namespace

void Activate(Activation a, std::span<double> v) {
  switch (a) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::kTanh:
      for (double& x : v) x = std::tanh(x);
      break;
  }
}

void ActivationGrad(Activation a, std::span<const double> y,
                    std::span<double> delta) {
  switch (a) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      // Subgradient at 0 is 0.
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) delta[i] = 0.0;
      }
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < y.size(); ++i) delta[i] *= 1.0 - y[i] * y[i];
      break;
  }
}

std::string ToString(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

Activation ParseActivation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw Error(ErrorCode::kInvalidSpec, "unknown activation '" + name + "'");
}

void Validate(const NetworkSpec& spec) {
  if (spec.layer_sizes.size() < 2) {
    throw Error(ErrorCode::kInvalidSpec, "need at least input and output sizes");
  }
  for (std::size_t n : spec.layer_sizes) {
    if (n < 1) throw Error(ErrorCode::kInvalidSpec, "layer size must be >= 1");
  }
}

Gradients Gradients::ZerosLike(const Network& net) {
  Gradients g;
  g.layers.reserve(net.layers().size());
  for (const Layer& l : net.layers()) {
    g.layers.push_back({l.rows, l.cols, std::vector<double>(l.w.size(), 0.0),
                        std::vector<double>(l.b.size(), 0.0)});
  }
  return g;
}

void Gradients::SetZero() {
  for (Layer& l : layers) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
}

void Gradients::Add(const Gradients& other) {
  if (other.layers.size() != layers.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient layer count differs");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Layer& a = layers[k];
    const Layer& b = other.layers[k];
    RequireDim(b.w.size(), a.w.size(), "gradient weights");
    RequireDim(b.b.size(), a.b.size(), "gradient biases");
    for (std::size_t i = 0; i < a.w.size(); ++i) a.w[i] += b.w[i];
    for (std::size_t i = 0; i < a.b.size(); ++i) a.b[i] += b.b[i];
  }
}

void Gradients::Scale(double factor) {
  for (Layer& l : layers) {
    for (double& v : l.w) v *= factor;
    for (double& v : l.b) v *= factor;
  }
}

bool Gradients::SameShape(const Network& net) const {
  if (layers.size() != net.layers().size()) return false;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& a = layers[k];
    const Layer& b = net.layers()[k];
    if (a.rows != b.rows || a.cols != b.cols || a.w.size() != b.w.size() ||
        a.b.size() != b.b.size()) {
      return false;
    }
  }
  return true;
}

Network::Network(NetworkSpec spec, std::vector<Layer> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
  Validate(spec_);
  if (layers_.size() + 1 != spec_.layer_sizes.size()) {
    throw Error(ErrorCode::kInvalidSpec, "layer count does not match spec");
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    if (l.cols != spec_.layer_sizes[k] || l.rows != spec_.layer_sizes[k + 1] ||
        l.w.size() != l.rows * l.cols || l.b.size() != l.rows) {
      throw Error(ErrorCode::kInvalidSpec,
                  "layer " + std::to_string(k) + " shape does not match spec");
    }
  }
}

Network Network::Init(const NetworkSpec& spec, std::uint64_t seed) {
  Validate(spec);
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < spec.layer_sizes.size(); ++k) {
    Layer l;
    l.cols = spec.layer_sizes[k];
    l.rows = spec.layer_sizes[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    l.w.resize(l.rows * l.cols);
    for (double& w : l.w) w = dist(rng);
    l.b.assign(l.rows, 0.0);
    layers.push_back(std::move(l));
  }
  return Network(spec, std::move(layers));
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

bool Network::SameShape(const Network& other) const {
  return spec_.layer_sizes == other.spec_.layer_sizes;
}

std::vector<double> Network::Forward(std::span<const double> x) const {
  Workspace ws;
  const std::span<const double> y = Forward(x, ws);
  return {y.begin(), y.end()};
}

std::span<const double> Network::Forward(std::span<const double> x,
                                         Workspace& ws) const {
  RequireDim(x.size(), input_dim(), "input");
  ws.act.resize(layers_.size() + 1);
  ws.act[0].assign(x.begin(), x.end());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    const std::vector<double>& in = ws.act[k];
    std::vector<double>& out = ws.act[k + 1];
    out.resize(l.rows);
    // Four rows at a time: independent accumulators, each summed in column order.
    std::size_t r = 0;
    for (; r + 4 <= l.rows; r += 4) {
      const double* w0 = l.w.data() + r * l.cols;
      const double* w1 = w0 + l.cols;
      const double* w2 = w1 + l.cols;
      const double* w3 = w2 + l.cols;
      double a0 = l.b[r], a1 = l.b[r + 1], a2 = l.b[r + 2], a3 = l.b[r + 3];
      for (std::size_t c = 0; c < l.cols; ++c) {
        const double v = in[c];
        a0 += w0[c] * v;
        a1 += w1[c] * v;
        a2 += w2[c] * v;
        a3 += w3[c] * v;
      }
      out[r] = a0;
      out[r + 1] = a1;
      out[r + 2] = a2;
      out[r + 3] = a3;
    }
    for (; r < l.rows; ++r) {
      const double* row = l.w.data() + r * l.cols;
      double acc = l.b[r];
      for (std::size_t c = 0; c < l.cols; ++c) acc += row[c] * in[c];
      out[r] = acc;
    }
    const bool last = (k + 1 == layers_.size());
    Activate(last ? spec_.output : spec_.hidden, out);
  }
  return ws.act.back();
}

void Network::BackwardAccumulate(Workspace& ws,
                                 std::span<const double> upstream,
                                 Gradients& grads,
                                 std::span<double> input_grad) const {
  RequireDim(upstream.size(), output_dim(), "upstream gradient");
  if (ws.act.size() != layers_.size() + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "workspace holds no forward pass");
  }
  if (!input_grad.empty()) RequireDim(input_grad.size(), input_dim(), "input gradient");
  if (!grads.SameShape(*this)) {
    throw Error(ErrorCode::kDimensionMismatch, "gradients do not match network");
  }

  auto& delta = ws.delta;
  auto& prev = ws.delta_prev;
  delta.assign(upstream.begin(), upstream.end());

  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Layer& l = layers_[k];
    Layer& g = grads.layers[k];
    const bool last = (k + 1 == layers_.size());
    ActivationGrad(last ? spec_.output : spec_.hidden, ws.act[k + 1], delta);

    const std::vector<double>& in = ws.act[k];
    for (std::size_t r = 0; r < l.rows; ++r) {
      const double d = delta[r];
      g.b[r] += d;
      double* grow = g.w.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) grow[c] += d * in[c];
    }
    if (k == 0 && input_grad.empty()) break;

    prev.assign(l.cols, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      const double d = delta[r];
      const double* row = l.w.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) prev[c] += row[c] * d;
    }
    delta.swap(prev);
  }
  if (!input_grad.empty()) std::copy(delta.begin(), delta.end(), input_grad.begin());
}

BackwardResult Backward(const Network& net, std::span<const double> x,
                        std::span<const double> upstream) {
  Workspace ws;
  net.Forward(x, ws);
  BackwardResult out{Gradients::ZerosLike(net),
                     std::vector<double>(net.input_dim(), 0.0)};
  net.BackwardAccumulate(ws, upstream, out.grads, out.input_grad);
  return out;
}

void SgdStep(Network& net, const Gradients& grads, double lr) {
  if (!(lr > 0.0)) throw Error(ErrorCode::kInvalidParams, "learning rate must be > 0");
  if (!grads.SameShape(net)) {
    throw Error(ErrorCode::kDimensionMismatch, "gradients do not match network");
  }
  for (std::size_t k = 0; k < grads.layers.size(); ++k) {
    Layer& p = net.mutable_layers()[k];
    const Layer& g = grads.layers[k];
    for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] -= lr * g.w[i];
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= lr * g.b[i];
  }
}

nlohmann::json Serialize(const Network& net) {
  json spec = {{"layer_sizes", net.spec().layer_sizes},
               {"hidden_activation", ToString(net.spec().hidden)},
               {"output_activation", ToString(net.spec().output)}};
  json layers = json::array();
  for (const Layer& l : net.layers()) {
    layers.push_back({{"rows", l.rows}, {"cols", l.cols}, {"w", l.w}, {"b", l.b}});
  }
  return {{"version", kNetworkFormatVersion}, {"spec", spec}, {"layers", layers}};
}

Network Deserialize(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("version")) {
    throw Error(ErrorCode::kMalformedDocument, "missing version field");
  }
  const json& version = doc.at("version");
  if (!version.is_number_integer() || version.get<int>() != kNetworkFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported network format version " + version.dump());
  }
  try {
    const json& s = doc.at("spec");
    NetworkSpec spec;
    spec.layer_sizes = s.at("layer_sizes").get<std::vector<std::size_t>>();
    spec.hidden = ParseActivation(s.at("hidden_activation").get<std::string>());
    spec.output = ParseActivation(s.at("output_activation").get<std::string>());
    std::vector<Layer> layers;
    for (const json& jl : doc.at("layers")) {
      Layer l;
      l.rows = jl.at("rows").get<std::size_t>();
      l.cols = jl.at("cols").get<std::size_t>();
      l.w = jl.at("w").get<std::vector<double>>();
      l.b = jl.at("b").get<std::vector<double>>();
      layers.push_back(std::move(l));
    }
    return Network(std::move(spec), std::move(layers));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

Network DeserializeText(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  return Deserialize(doc);
}

}  // namespace ftrack
