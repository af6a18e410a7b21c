#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "ftrack/mlp.hpp"

namespace ftrack {

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;
};

// Fixed-capacity ring buffer; the oldest transition is overwritten when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void Push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Storage order, not insertion order.
  const Transition& operator[](std::size_t i) const { return data_[i]; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::size_t batch_size = 128;
  double noise_sigma = 0.1;
  double noise_decay = 0.999;
  std::size_t warmup_steps = 1000;
  std::size_t buffer_capacity = 100000;
  std::vector<std::size_t> hidden_sizes = {64, 64};
  std::uint64_t seed = 0;
};

// Throws kInvalidParams.
void Validate(const AgentConfig& cfg);

struct TrainStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

// theta' <- tau * theta + (1 - tau) * theta' for every parameter, evaluated as
// theta' + tau * (theta - theta').
// Throws kDimensionMismatch or kInvalidParams (tau outside (0, 1)).
void SoftUpdate(Network& target, const Network& source, double tau);

// Deep deterministic policy gradient agent. Actions live in [-1, 1]^n.
// Single writer: TrainStep and the update methods mutate the agent.
class Agent {
 public:
  Agent(std::size_t obs_dim, std::size_t action_dim, AgentConfig cfg);
  // Restores an agent from its networks; targets must match the online nets.
  Agent(AgentConfig cfg, Network actor, Network critic, Network target_actor,
        Network target_critic, double noise_sigma);

  std::size_t obs_dim() const { return actor_.input_dim(); }
  std::size_t action_dim() const { return actor_.output_dim(); }

  // Greedy actor output; read-only. Throws kDimensionMismatch.
  std::vector<double> Policy(std::span<const double> obs) const;
  // Policy plus N(0, sigma^2) noise clamped to [-1, 1] when explore is set.
  std::vector<double> Act(std::span<const double> obs, bool explore);

  // y_i = r_i + gamma * (1 - done_i) * Q'(s'_i, mu'(s'_i)). Reads target
  // networks only. Throws kEmptyBatch.
  std::vector<double> ComputeTargets(std::span<const Transition> batch) const;

  // One SGD step on the critic MSE; returns the pre-step loss.
  double CriticUpdate(std::span<const Transition> batch);

  // One gradient-ascent step on the mean of Q(s, mu(s)); returns the
  // pre-step mean. Critic parameters are not modified.
  double ActorUpdate(std::span<const Transition> batch);

  // Gradient of the mean Q objective w.r.t. actor parameters, as used by
  // ActorUpdate. Exposed for gradient checks.
  Gradients ActorObjectiveGradient(std::span<const Transition> batch,
                                   double* mean_q = nullptr) const;

  // Stores the transition and, once the buffer holds
  // max(warmup_steps, batch_size) entries, runs one critic update, one actor
  // update and a soft update of both targets on a uniformly sampled batch.
  std::optional<TrainStats> TrainStep(Transition t);

  // Applies the per-episode noise decay.
  void EndEpisode() { sigma_ *= cfg_.noise_decay; }

  const AgentConfig& config() const { return cfg_; }
  double noise_sigma() const { return sigma_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const Network& actor() const { return actor_; }
  const Network& critic() const { return critic_; }
  const Network& target_actor() const { return target_actor_; }
  const Network& target_critic() const { return target_critic_; }
  Network& mutable_actor() { return actor_; }
  Network& mutable_critic() { return critic_; }
  Network& mutable_target_actor() { return target_actor_; }
  Network& mutable_target_critic() { return target_critic_; }

 private:
  void RequireBatch(std::span<const Transition> batch) const;
  std::vector<double> CriticInputs(std::span<const Transition> batch,
                                   std::span<const double> actions) const;

  AgentConfig cfg_;
  Network actor_;
  Network critic_;
  Network target_actor_;
  Network target_critic_;
  ReplayBuffer buffer_;
  double sigma_;
  std::mt19937_64 rng_;
  std::vector<Transition> batch_;
};

// Agent checkpoint: the four network documents, config and noise sigma.
nlohmann::json SerializeAgent(const Agent& agent);
// Throws kMalformedDocument or kVersionMismatch.
Agent DeserializeAgent(const nlohmann::json& doc);
Agent DeserializeAgentText(std::string_view text);

nlohmann::json ToJson(const AgentConfig& cfg);
// Missing fields keep their defaults. Throws kConfigInvalid.
AgentConfig AgentConfigFromJson(const nlohmann::json& j,
                                AgentConfig base = AgentConfig{});

}  // namespace ftrack
