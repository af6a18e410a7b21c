#include <omp.h>

#include <algorithm>

#include "ftrack/kernels.hpp"

namespace ftrack::kernels {
namespace {

// Activations of one block of m samples, feature-major: act[k][f * m + i] is
// feature f of sample i after layer k (act[0] holds the inputs).
struct BlockWork {
  std::vector<std::vector<double>> act;
  std::vector<double> delta;
  std::vector<double> prev;
  std::vector<double> rows;  // sample-major copy of one layer input
};

// Each output is summed in column order, as in Network::Forward, so results
// match the per-sample pass bit for bit. The inner loops run over samples.
void ForwardBlock(const Network& net, std::span<const double> inputs, std::size_t begin,
                  std::size_t m, BlockWork& w) {
  const auto& layers = net.layers();
  const std::size_t in = net.input_dim();
  w.act.resize(layers.size() + 1);
  w.act[0].resize(in * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < in; ++c) w.act[0][c * m + i] = inputs[(begin + i) * in + c];
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    const double* x = w.act[k].data();
    std::vector<double>& out = w.act[k + 1];
    out.resize(l.rows * m);
    std::size_t r = 0;
    for (; r + 4 <= l.rows; r += 4) {
      double* o0 = out.data() + r * m;
      double* o1 = o0 + m;
      double* o2 = o1 + m;
      double* o3 = o2 + m;
      std::fill(o0, o0 + m, l.b[r]);
      std::fill(o1, o1 + m, l.b[r + 1]);
      std::fill(o2, o2 + m, l.b[r + 2]);
      std::fill(o3, o3 + m, l.b[r + 3]);
      const double* w0 = l.w.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) {
        const double a0 = w0[c], a1 = w0[l.cols + c], a2 = w0[2 * l.cols + c],
                     a3 = w0[3 * l.cols + c];
        const double* xc = x + c * m;
        for (std::size_t i = 0; i < m; ++i) {
          const double v = xc[i];
          o0[i] += a0 * v;
          o1[i] += a1 * v;
          o2[i] += a2 * v;
          o3[i] += a3 * v;
        }
      }
    }
    for (; r < l.rows; ++r) {
      double* o = out.data() + r * m;
      std::fill(o, o + m, l.b[r]);
      const double* wr = l.w.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) {
        const double a = wr[c];
        const double* xc = x + c * m;
        for (std::size_t i = 0; i < m; ++i) o[i] += a * xc[i];
      }
    }
    const bool last = (k + 1 == layers.size());
    Activate(last ? net.spec().output : net.spec().hidden, out);
  }
}

// g += sum over samples of d_i x_i^T, each entry summed in sample order.
// d is feature-major (rows x m), x sample-major (m x cols).
void AccumulateOuter(const double* d, const double* x, std::size_t rows, std::size_t cols,
                     std::size_t m, double* g) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = x + i * cols;
    for (std::size_t r = 0; r < rows; ++r) {
      const double dr = d[r * m + i];
      double* gr = g + r * cols;
      for (std::size_t c = 0; c < cols; ++c) gr[c] += dr * xi[c];
    }
  }
}

// Reverse pass over a block after ForwardBlock. Parameter gradients are added
// to grads; input gradients (if wanted) go to rows [begin, begin + m).
void BackwardBlock(const Network& net, std::span<const double> upstream, std::size_t begin,
                   std::size_t m, BlockWork& w, Gradients& grads,
                   std::vector<double>* input_grads) {
  const auto& layers = net.layers();
  const std::size_t out = net.output_dim();
  w.delta.resize(out * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < out; ++r) w.delta[r * m + i] = upstream[(begin + i) * out + r];
  }
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Layer& l = layers[k];
    Layer& g = grads.layers[k];
    const bool last = (k + 1 == layers.size());
    ActivationGrad(last ? net.spec().output : net.spec().hidden, w.act[k + 1], w.delta);

    for (std::size_t r = 0; r < l.rows; ++r) {
      double acc = g.b[r];
      for (std::size_t i = 0; i < m; ++i) acc += w.delta[r * m + i];
      g.b[r] = acc;
    }
    const std::vector<double>& x = w.act[k];
    w.rows.resize(l.cols * m);
    for (std::size_t c = 0; c < l.cols; ++c) {
      for (std::size_t i = 0; i < m; ++i) w.rows[i * l.cols + c] = x[c * m + i];
    }
    AccumulateOuter(w.delta.data(), w.rows.data(), l.rows, l.cols, m, g.w.data());
    if (k == 0 && input_grads == nullptr) break;

    // prev = W^T delta, each entry summed in row order.
    w.prev.assign(l.cols * m, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      const double* dr = w.delta.data() + r * m;
      const double* wr = l.w.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) {
        const double a = wr[c];
        double* pc = w.prev.data() + c * m;
        for (std::size_t i = 0; i < m; ++i) pc[i] += a * dr[i];
      }
    }
    w.delta.swap(w.prev);
  }
  if (input_grads != nullptr) {
    const std::size_t in = net.input_dim();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < in; ++c) {
        (*input_grads)[(begin + i) * in + c] = w.delta[c * m + i];
      }
    }
  }
}

}  // namespace

namespace omp {

std::vector<double> Forward(const Network& net, std::span<const double> inputs,
                            std::size_t batch) {
  CheckBatch(net, inputs, batch);
  const std::size_t out = net.output_dim();
  std::vector<double> result(batch * out);
  const std::size_t blocks = std::min(kReductionChunks, std::max<std::size_t>(batch, 1));
  const auto n_blocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel
  {
    BlockWork w;
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < n_blocks; ++b) {
      const auto k = static_cast<std::size_t>(b);
      const std::size_t begin = k * batch / blocks;
      const std::size_t m = (k + 1) * batch / blocks - begin;
      if (m == 0) continue;
      ForwardBlock(net, inputs, begin, m, w);
      const std::vector<double>& y = w.act.back();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t r = 0; r < out; ++r) result[(begin + i) * out + r] = y[r * m + i];
      }
    }
  }
  return result;
}

BatchGradients Backward(const Network& net, std::span<const double> inputs,
                        std::span<const double> upstream, std::size_t batch,
                        bool want_input_grads) {
  CheckBatch(net, inputs, upstream, batch);
  BatchGradients result{Gradients::ZerosLike(net), {}};
  if (want_input_grads) result.input_grads.assign(batch * net.input_dim(), 0.0);

  const std::size_t chunks = std::min(kReductionChunks, std::max<std::size_t>(batch, 1));
  std::vector<Gradients> partial(chunks, result.params);
  const auto n_chunks = static_cast<std::ptrdiff_t>(chunks);
  std::vector<double>* dx = want_input_grads ? &result.input_grads : nullptr;

#pragma omp parallel
  {
    BlockWork w;
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
      const auto k = static_cast<std::size_t>(c);
      const std::size_t begin = k * batch / chunks;
      const std::size_t m = (k + 1) * batch / chunks - begin;
      if (m == 0) continue;
      ForwardBlock(net, inputs, begin, m, w);
      BackwardBlock(net, upstream, begin, m, w, partial[k], dx);
    }
  }
  for (const Gradients& g : partial) result.params.Add(g);
  return result;
}

std::vector<FrenetResult> ToFrenet(const ReferencePath& path,
                                   std::span<const CartesianState> states) {
  std::vector<FrenetResult> out(states.size());
  const auto n = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = TransformOne(path, states[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace omp
}  // namespace ftrack::kernels
