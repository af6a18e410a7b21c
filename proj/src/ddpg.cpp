#include "ftrack/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ftrack/error.hpp"
#include "ftrack/kernels.hpp"
#include "json_util.hpp"

namespace ftrack {
namespace {

using json = nlohmann::json;

constexpr int kAgentFormatVersion = 1;

NetworkSpec ActorSpec(std::size_t obs_dim, std::size_t action_dim,
                      const std::vector<std::size_t>& hidden) {
  NetworkSpec spec;
  spec.layer_sizes.push_back(obs_dim);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(action_dim);
  spec.hidden = Activation::kRelu;
  spec.output = Activation::kTanh;
  return spec;
}

NetworkSpec CriticSpec(std::size_t obs_dim, std::size_t action_dim,
                       const std::vector<std::size_t>& hidden) {
  NetworkSpec spec;
  spec.layer_sizes.push_back(obs_dim + action_dim);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(1);
  spec.hidden = Activation::kRelu;
  spec.output = Activation::kIdentity;
  return spec;
}

// SplitMix64 finalizer; decorrelates the seeds of the two networks.
std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw Error(ErrorCode::kInvalidParams, "replay capacity must be positive");
  }
}

void ReplayBuffer::Push(Transition t) {
  if (!std::isfinite(t.reward)) {
    throw Error(ErrorCode::kInvalidParams, "non-finite reward");
  }
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

void Validate(const AgentConfig& cfg) {
  const bool ok = cfg.gamma >= 0.0 && cfg.gamma < 1.0 && cfg.tau > 0.0 &&
                  cfg.tau < 1.0 && cfg.actor_lr > 0.0 && cfg.critic_lr > 0.0 &&
                  cfg.batch_size >= 1 && cfg.noise_sigma >= 0.0 &&
                  cfg.noise_decay > 0.0 && cfg.noise_decay <= 1.0 &&
                  cfg.buffer_capacity >= 1;
  if (!ok) throw Error(ErrorCode::kInvalidParams, "invalid agent configuration");
  for (std::size_t h : cfg.hidden_sizes) {
    if (h == 0) throw Error(ErrorCode::kInvalidParams, "hidden size must be >= 1");
  }
}

void SoftUpdate(Network& target, const Network& source, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "tau must lie in (0, 1)");
  }
  if (!target.SameShape(source)) {
    throw Error(ErrorCode::kDimensionMismatch, "soft update between different shapes");
  }
  // theta' + tau (theta - theta'): exact at the fixed point theta' = theta.
  for (std::size_t k = 0; k < source.layers().size(); ++k) {
    Layer& t = target.mutable_layers()[k];
    const Layer& s = source.layers()[k];
    for (std::size_t i = 0; i < t.w.size(); ++i) t.w[i] += tau * (s.w[i] - t.w[i]);
    for (std::size_t i = 0; i < t.b.size(); ++i) t.b[i] += tau * (s.b[i] - t.b[i]);
  }
}

Agent::Agent(std::size_t obs_dim, std::size_t action_dim, AgentConfig cfg)
    : cfg_(std::move(cfg)), buffer_(cfg_.buffer_capacity), sigma_(cfg_.noise_sigma),
      rng_(Mix(cfg_.seed ^ 0x5eedULL)) {
  Validate(cfg_);
  actor_ = Network::Init(ActorSpec(obs_dim, action_dim, cfg_.hidden_sizes), Mix(cfg_.seed));
  critic_ = Network::Init(CriticSpec(obs_dim, action_dim, cfg_.hidden_sizes),
                          Mix(cfg_.seed + 1));
  target_actor_ = actor_;
  target_critic_ = critic_;
}

Agent::Agent(AgentConfig cfg, Network actor, Network critic,
             Network target_actor, Network target_critic, double noise_sigma)
    : cfg_(std::move(cfg)), actor_(std::move(actor)), critic_(std::move(critic)),
      target_actor_(std::move(target_actor)), target_critic_(std::move(target_critic)),
      buffer_(cfg_.buffer_capacity), sigma_(noise_sigma), rng_(Mix(cfg_.seed ^ 0x5eedULL)) {
  Validate(cfg_);
  const bool shapes = actor_.SameShape(target_actor_) && critic_.SameShape(target_critic_) &&
                      critic_.input_dim() == actor_.input_dim() + actor_.output_dim() &&
                      critic_.output_dim() == 1;
  if (!shapes) {
    throw Error(ErrorCode::kDimensionMismatch, "actor/critic/target shapes are inconsistent");
  }
}

std::vector<double> Agent::Policy(std::span<const double> obs) const {
  return actor_.Forward(obs);
}

std::vector<double> Agent::Act(std::span<const double> obs, bool explore) {
  std::vector<double> a = actor_.Forward(obs);
  if (explore) {
    std::normal_distribution<double> noise(0.0, 1.0);
    for (double& v : a) v = std::clamp(v + sigma_ * noise(rng_), -1.0, 1.0);
  }
  return a;
}

void Agent::RequireBatch(std::span<const Transition> batch) const {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "batch is empty");
  for (const Transition& t : batch) {
    if (t.obs.size() != obs_dim() || t.next_obs.size() != obs_dim() ||
        t.action.size() != action_dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "transition dimensions do not match agent");
    }
  }
}

std::vector<double> Agent::CriticInputs(std::span<const Transition> batch,
                                        std::span<const double> actions) const {
  const std::size_t od = obs_dim(), ad = action_dim();
  std::vector<double> in(batch.size() * (od + ad));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto row = in.begin() + static_cast<std::ptrdiff_t>(i * (od + ad));
    std::copy(batch[i].obs.begin(), batch[i].obs.end(), row);
    std::copy(actions.begin() + static_cast<std::ptrdiff_t>(i * ad),
              actions.begin() + static_cast<std::ptrdiff_t>((i + 1) * ad),
              row + static_cast<std::ptrdiff_t>(od));
  }
  return in;
}

std::vector<double> Agent::ComputeTargets(std::span<const Transition> batch) const {
  RequireBatch(batch);
  const std::size_t n = batch.size(), od = obs_dim(), ad = action_dim();
  std::vector<double> next_obs(n * od);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(batch[i].next_obs.begin(), batch[i].next_obs.end(),
              next_obs.begin() + static_cast<std::ptrdiff_t>(i * od));
  }
  const std::vector<double> next_actions = kernels::omp::Forward(target_actor_, next_obs, n);
  std::vector<double> q_in(n * (od + ad));
  for (std::size_t i = 0; i < n; ++i) {
    auto row = q_in.begin() + static_cast<std::ptrdiff_t>(i * (od + ad));
    std::copy(batch[i].next_obs.begin(), batch[i].next_obs.end(), row);
    std::copy(next_actions.begin() + static_cast<std::ptrdiff_t>(i * ad),
              next_actions.begin() + static_cast<std::ptrdiff_t>((i + 1) * ad),
              row + static_cast<std::ptrdiff_t>(od));
  }
  const std::vector<double> next_q = kernels::omp::Forward(target_critic_, q_in, n);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = batch[i].done ? batch[i].reward
                         : batch[i].reward + cfg_.gamma * next_q[i];
  }
  return y;
}

double Agent::CriticUpdate(std::span<const Transition> batch) {
  const std::vector<double> y = ComputeTargets(batch);
  const std::size_t n = batch.size(), ad = action_dim();
  std::vector<double> actions(n * ad);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(batch[i].action.begin(), batch[i].action.end(),
              actions.begin() + static_cast<std::ptrdiff_t>(i * ad));
  }
  const std::vector<double> inputs = CriticInputs(batch, actions);
  const std::vector<double> q = kernels::omp::Forward(critic_, inputs, n);

  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  std::vector<double> upstream(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double err = q[i] - y[i];
    loss += err * err;
    upstream[i] = 2.0 * err * inv_n;
  }
  loss *= inv_n;

  const kernels::BatchGradients g =
      kernels::omp::Backward(critic_, inputs, upstream, n, false);
  SgdStep(critic_, g.params, cfg_.critic_lr);
  return loss;
}

Gradients Agent::ActorObjectiveGradient(std::span<const Transition> batch,
                                        double* mean_q) const {
  RequireBatch(batch);
  const std::size_t n = batch.size(), od = obs_dim(), ad = action_dim();
  std::vector<double> obs(n * od);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(batch[i].obs.begin(), batch[i].obs.end(),
              obs.begin() + static_cast<std::ptrdiff_t>(i * od));
  }
  const std::vector<double> actions = kernels::omp::Forward(actor_, obs, n);
  const std::vector<double> inputs = CriticInputs(batch, actions);

  const double inv_n = 1.0 / static_cast<double>(n);
  if (mean_q != nullptr) {
    const std::vector<double> q = kernels::omp::Forward(critic_, inputs, n);
    double sum = 0.0;
    for (double v : q) sum += v;
    *mean_q = sum * inv_n;
  }

  // dJ/da_i from the critic's input gradient, then chained through the actor.
  const std::vector<double> upstream(n, inv_n);
  const kernels::BatchGradients critic_grad =
      kernels::omp::Backward(critic_, inputs, upstream, n, true);
  std::vector<double> dq_da(n * ad);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ad; ++j) {
      dq_da[i * ad + j] = critic_grad.input_grads[i * (od + ad) + od + j];
    }
  }
  return kernels::omp::Backward(actor_, obs, dq_da, n, false).params;
}

double Agent::ActorUpdate(std::span<const Transition> batch) {
  double mean_q = 0.0;
  Gradients g = ActorObjectiveGradient(batch, &mean_q);
  g.Scale(-1.0);  // ascent
  SgdStep(actor_, g, cfg_.actor_lr);
  return mean_q;
}

std::optional<TrainStats> Agent::TrainStep(Transition t) {
  buffer_.Push(std::move(t));
  if (buffer_.size() < std::max(cfg_.warmup_steps, cfg_.batch_size)) return std::nullopt;

  std::uniform_int_distribution<std::size_t> pick(0, buffer_.size() - 1);
  batch_.resize(cfg_.batch_size);
  for (Transition& slot : batch_) slot = buffer_[pick(rng_)];

  TrainStats stats;
  stats.critic_loss = CriticUpdate(batch_);
  stats.actor_objective = ActorUpdate(batch_);
  SoftUpdate(target_critic_, critic_, cfg_.tau);
  SoftUpdate(target_actor_, actor_, cfg_.tau);
  return stats;
}

json ToJson(const AgentConfig& cfg) {
  return {{"gamma", cfg.gamma},
          {"tau", cfg.tau},
          {"actor_lr", cfg.actor_lr},
          {"critic_lr", cfg.critic_lr},
          {"batch_size", cfg.batch_size},
          {"noise_sigma", cfg.noise_sigma},
          {"noise_decay", cfg.noise_decay},
          {"warmup_steps", cfg.warmup_steps},
          {"buffer_capacity", cfg.buffer_capacity},
          {"hidden_sizes", cfg.hidden_sizes},
          {"seed", cfg.seed}};
}

AgentConfig AgentConfigFromJson(const json& j, AgentConfig base) {
  detail::RejectUnknownKeys(j,
                            {"gamma", "tau", "actor_lr", "critic_lr", "batch_size",
                             "noise_sigma", "noise_decay", "warmup_steps",
                             "buffer_capacity", "hidden_sizes", "seed"},
                            "agent");
  detail::ReadField(j, "gamma", base.gamma);
  detail::ReadField(j, "tau", base.tau);
  detail::ReadField(j, "actor_lr", base.actor_lr);
  detail::ReadField(j, "critic_lr", base.critic_lr);
  detail::ReadField(j, "batch_size", base.batch_size);
  detail::ReadField(j, "noise_sigma", base.noise_sigma);
  detail::ReadField(j, "noise_decay", base.noise_decay);
  detail::ReadField(j, "warmup_steps", base.warmup_steps);
  detail::ReadField(j, "buffer_capacity", base.buffer_capacity);
  detail::ReadField(j, "hidden_sizes", base.hidden_sizes);
  detail::ReadField(j, "seed", base.seed);
  try {
    Validate(base);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  return base;
}

json SerializeAgent(const Agent& agent) {
  return {{"version", kAgentFormatVersion},
          {"config", ToJson(agent.config())},
          {"noise_sigma", agent.noise_sigma()},
          {"actor", Serialize(agent.actor())},
          {"critic", Serialize(agent.critic())},
          {"target_actor", Serialize(agent.target_actor())},
          {"target_critic", Serialize(agent.target_critic())}};
}

Agent DeserializeAgent(const json& doc) {
  if (!doc.is_object() || !doc.contains("version")) {
    throw Error(ErrorCode::kMalformedDocument, "missing version field");
  }
  const json& version = doc.at("version");
  if (!version.is_number_integer() || version.get<int>() != kAgentFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported agent format version " + version.dump());
  }
  for (const char* key : {"config", "noise_sigma", "actor", "critic", "target_actor",
                          "target_critic"}) {
    if (!doc.contains(key)) {
      throw Error(ErrorCode::kMalformedDocument, std::string("missing '") + key + "'");
    }
  }
  AgentConfig cfg;
  double sigma = 0.0;
  try {
    cfg = AgentConfigFromJson(doc.at("config"));
    sigma = doc.at("noise_sigma").get<double>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  try {
    return Agent(cfg, Deserialize(doc.at("actor")), Deserialize(doc.at("critic")),
                 Deserialize(doc.at("target_actor")), Deserialize(doc.at("target_critic")),
                 sigma);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDimensionMismatch) {
      throw Error(ErrorCode::kMalformedDocument, e.what());
    }
    throw;
  }
}

Agent DeserializeAgentText(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  return DeserializeAgent(doc);
}

}  // namespace ftrack
