#include "ftrack/ddpg.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ftrack/error.hpp"

namespace ftrack {
namespace {

constexpr std::size_t kObs = 3;
constexpr std::size_t kAct = 2;

// Zero weights everywhere and the given output bias: a constant network.
void MakeConstant(Network& net, double value) {
  for (Layer& l : net.mutable_layers()) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  std::fill(net.mutable_layers().back().b.begin(), net.mutable_layers().back().b.end(), value);
}

std::vector<Transition> RandomBatch(std::size_t n, std::uint64_t seed, std::size_t obs = kObs,
                                    std::size_t act = kAct) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Transition> batch(n);
  for (Transition& t : batch) {
    t.obs.resize(obs);
    t.next_obs.resize(obs);
    t.action.resize(act);
    for (double& v : t.obs) v = u(rng);
    for (double& v : t.next_obs) v = u(rng);
    for (double& v : t.action) v = u(rng);
    t.reward = 3.0 * u(rng);
    t.done = u(rng) > 0.7;
  }
  return batch;
}

AgentConfig Config(std::uint64_t seed = 7) {
  AgentConfig c;
  c.seed = seed;
  return c;
}

double QValue(const Network& critic, const Transition& t, std::span<const double> action) {
  std::vector<double> in(t.obs);
  in.insert(in.end(), action.begin(), action.end());
  return critic.Forward(in)[0];
}

double MeanPolicyQ(const Network& actor, const Network& critic,
                   const std::vector<Transition>& batch) {
  double sum = 0.0;
  for (const Transition& t : batch) sum += QValue(critic, t, actor.Forward(t.obs));
  return sum / static_cast<double>(batch.size());
}

double CriticLoss(const Agent& a, const std::vector<Transition>& batch) {
  const auto y = a.ComputeTargets(batch);
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double r = y[i] - QValue(a.critic(), batch[i], batch[i].action);
    sum += r * r;
  }
  return sum / static_cast<double>(batch.size());
}

template <typename F>
void ForEachParam(Network& net, F&& f) {
  for (Layer& l : net.mutable_layers()) {
    for (double& w : l.w) f(w);
    for (double& b : l.b) f(b);
  }
}

std::vector<double> Flatten(const Network& net) {
  std::vector<double> v;
  for (const Layer& l : net.layers()) {
    v.insert(v.end(), l.w.begin(), l.w.end());
    v.insert(v.end(), l.b.begin(), l.b.end());
  }
  return v;
}

std::vector<double> Flatten(const Gradients& g) {
  std::vector<double> v;
  for (const Layer& l : g.layers) {
    v.insert(v.end(), l.w.begin(), l.w.end());
    v.insert(v.end(), l.b.begin(), l.b.end());
  }
  return v;
}

TEST(Agent, TargetsAreExactCopiesAtConstruction) {
  const Agent a(kObs, kAct, Config());
  EXPECT_EQ(a.actor(), a.target_actor());
  EXPECT_EQ(a.critic(), a.target_critic());
  EXPECT_EQ(a.actor().spec().output, Activation::kTanh);
  EXPECT_EQ(a.critic().input_dim(), kObs + kAct);
}

TEST(ComputeTargets, BellmanArithmetic) {
  Agent a(kObs, kAct, Config());
  MakeConstant(a.mutable_target_critic(), 2.0);
  auto batch = RandomBatch(1, 1);
  batch[0].reward = 1.0;
  batch[0].done = false;
  EXPECT_NEAR(a.ComputeTargets(batch)[0], 2.98, 1e-15);
}

TEST(ComputeTargets, TerminalMasking) {
  Agent a(kObs, kAct, Config());
  MakeConstant(a.mutable_target_critic(), 1e6);
  auto batch = RandomBatch(1, 2);
  batch[0].reward = -5.0;
  batch[0].done = true;
  EXPECT_EQ(a.ComputeTargets(batch)[0], -5.0);
}

TEST(ComputeTargets, ZeroDiscountReturnsRewards) {
  AgentConfig c = Config();
  c.gamma = 0.0;
  const Agent a(kObs, kAct, c);
  const auto batch = RandomBatch(40, 3);
  const auto y = a.ComputeTargets(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(y[i], batch[i].reward);
}

TEST(ComputeTargets, IgnoresOnlineNetworks) {
  Agent a(kObs, kAct, Config());
  const auto batch = RandomBatch(32, 4);
  const auto before = a.ComputeTargets(batch);
  ForEachParam(a.mutable_actor(), [](double& p) { p += 0.37; });
  ForEachParam(a.mutable_critic(), [](double& p) { p *= -2.0; });
  EXPECT_EQ(a.ComputeTargets(batch), before);
}

TEST(ComputeTargets, EmptyBatch) {
  const Agent a(kObs, kAct, Config());
  try {
    a.ComputeTargets({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyBatch);
  }
  Agent b(kObs, kAct, Config());
  EXPECT_THROW(b.CriticUpdate({}), Error);
  EXPECT_THROW(b.ActorUpdate({}), Error);
}

TEST(CriticUpdate, UnitLoss) {
  Agent a(kObs, kAct, Config());
  MakeConstant(a.mutable_critic(), 1.0);
  auto batch = RandomBatch(1, 5);
  batch[0].reward = 2.0;
  batch[0].done = true;
  EXPECT_EQ(a.CriticUpdate(batch), 1.0);
}

TEST(CriticUpdate, ZeroLossLeavesParametersUnchanged) {
  Agent a(kObs, kAct, Config());
  auto batch = RandomBatch(16, 6);
  for (Transition& t : batch) {
    t.done = true;
    t.reward = QValue(a.critic(), t, t.action);
  }
  const Network before = a.critic();
  EXPECT_EQ(a.CriticUpdate(batch), 0.0);
  EXPECT_EQ(a.critic(), before);
}

TEST(CriticUpdate, DescendsForSmallStep) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AgentConfig c = Config(seed);
    c.critic_lr = 1e-4;
    Agent a(kObs, kAct, c);
    const auto batch = RandomBatch(64, 100 + seed);
    const double pre = a.CriticUpdate(batch);
    EXPECT_NEAR(pre, CriticLoss(Agent(kObs, kAct, c), batch), 1e-12 * std::max(1.0, pre));
    EXPECT_LE(CriticLoss(a, batch), pre) << "seed " << seed;
  }
}

TEST(CriticUpdate, TouchesOnlyTheCritic) {
  Agent a(kObs, kAct, Config());
  const Network actor = a.actor(), ta = a.target_actor(), tc = a.target_critic();
  const Network critic = a.critic();
  a.CriticUpdate(RandomBatch(32, 7));
  EXPECT_EQ(a.actor(), actor);
  EXPECT_EQ(a.target_actor(), ta);
  EXPECT_EQ(a.target_critic(), tc);
  EXPECT_NE(a.critic(), critic);
}

TEST(ActorUpdate, ActionIndependentCriticIsAFixedPoint) {
  Agent a(kObs, kAct, Config());
  Layer& first = a.mutable_critic().mutable_layers().front();
  for (std::size_t r = 0; r < first.rows; ++r) {
    for (std::size_t c = kObs; c < first.cols; ++c) first.w[r * first.cols + c] = 0.0;
  }
  const Network before = a.actor();
  a.ActorUpdate(RandomBatch(32, 8));
  EXPECT_EQ(a.actor(), before);
}

TEST(ActorUpdate, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Agent a(kObs, kAct, Config(seed));
    const auto batch = RandomBatch(32, 200 + seed);
    double mean_q = 0.0;
    const auto g = Flatten(a.ActorObjectiveGradient(batch, &mean_q));
    EXPECT_NEAR(mean_q, MeanPolicyQ(a.actor(), a.critic(), batch), 1e-12);

    const double h = 1e-5;
    Network probe = a.actor();
    std::vector<double> fd;
    ForEachParam(probe, [&](double& p) {
      const double saved = p;
      p = saved + h;
      const double up = MeanPolicyQ(probe, a.critic(), batch);
      p = saved - h;
      const double down = MeanPolicyQ(probe, a.critic(), batch);
      p = saved;
      fd.push_back((up - down) / (2 * h));
    });
    ASSERT_EQ(fd.size(), g.size());
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err += (g[i] - fd[i]) * (g[i] - fd[i]);
      norm += fd[i] * fd[i];
    }
    EXPECT_LT(std::sqrt(err / norm), 1e-4) << "seed " << seed;

    const auto old_params = Flatten(a.actor());
    a.ActorUpdate(batch);
    const auto new_params = Flatten(a.actor());
    double inner = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) inner += (new_params[i] - old_params[i]) * fd[i];
    EXPECT_GT(inner, 0.0) << "seed " << seed;
  }
}

TEST(ActorUpdate, AscendsForSmallStep) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AgentConfig c = Config(seed);
    c.actor_lr = 1e-5;
    Agent a(kObs, kAct, c);
    const auto batch = RandomBatch(64, 300 + seed);
    const double pre = a.ActorUpdate(batch);
    EXPECT_GE(MeanPolicyQ(a.actor(), a.critic(), batch), pre - 1e-10) << "seed " << seed;
  }
}

TEST(ActorUpdate, TouchesOnlyTheActor) {
  Agent a(kObs, kAct, Config());
  const Network critic = a.critic(), ta = a.target_actor(), tc = a.target_critic();
  const Network actor = a.actor();
  a.ActorUpdate(RandomBatch(32, 9));
  EXPECT_EQ(a.critic(), critic);
  EXPECT_EQ(a.target_actor(), ta);
  EXPECT_EQ(a.target_critic(), tc);
  EXPECT_NE(a.actor(), actor);
}

Network Scalar(double v) {
  const NetworkSpec spec{{1, 1}, Activation::kRelu, Activation::kIdentity};
  return Network(spec, {Layer{1, 1, {v}, {v}}});
}

TEST(SoftUpdate, Examples) {
  Network target = Scalar(0.0);
  SoftUpdate(target, Scalar(1.0), 0.005);
  EXPECT_EQ(target.layers()[0].w[0], 0.005);
  EXPECT_EQ(target.layers()[0].b[0], 0.005);

  const Agent a(kObs, kAct, Config());
  Network same = a.actor();
  SoftUpdate(same, a.actor(), 0.005);
  EXPECT_EQ(same, a.actor());
}

// Largest deviation from the closed-form contraction over steps 1..k_max,
// relative to the parameter magnitude.
double ContractionError(int k_max, int every) {
  const Agent a(kObs, kAct, Config(1)), b(kObs, kAct, Config(2));
  const double tau = 0.005;
  const auto source = Flatten(a.critic());
  const auto start = Flatten(b.critic());
  Network target = b.critic();
  double worst = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    SoftUpdate(target, a.critic(), tau);
    if (k % every != 0) continue;
    const auto now = Flatten(target);
    const double factor = std::pow(1.0 - tau, k);
    for (std::size_t i = 0; i < now.size(); ++i) {
      const double expect = factor * (start[i] - source[i]);
      const double scale = std::max(std::abs(source[i]), std::abs(start[i]));
      if (scale == 0.0) continue;
      worst = std::max(worst, std::abs((now[i] - source[i]) - expect) / scale);
    }
  }
  return worst;
}

TEST(SoftUpdate, GeometricContraction) { EXPECT_LT(ContractionError(20, 1), 1e-15); }

TEST(SoftUpdate, LongHorizonRoundingStaysAtUlpScale) {
  EXPECT_LT(ContractionError(2000, 10), 4e-15);
}

TEST(SoftUpdate, Errors) {
  Network t = Scalar(0.0);
  EXPECT_THROW(SoftUpdate(t, Scalar(1.0), 0.0), Error);
  EXPECT_THROW(SoftUpdate(t, Scalar(1.0), 1.0), Error);
  const Agent a(kObs, kAct, Config());
  try {
    SoftUpdate(t, a.actor(), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Act, GreedyIsRepeatable) {
  Agent a(kObs, kAct, Config());
  const std::vector<double> obs = {0.3, -0.2, 0.9};
  const auto first = a.Act(obs, false);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.Act(obs, false), first);
  EXPECT_EQ(a.Policy(obs), first);
}

TEST(Act, ExplorationIsClampedAndUnbiased) {
  AgentConfig c = Config();
  c.noise_sigma = 0.4;
  Agent a(kObs, kAct, c);
  const std::vector<double> obs = {0.1, 0.2, -0.3};
  const auto greedy = a.Policy(obs);
  std::vector<double> mean(kAct, 0.0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto act = a.Act(obs, true);
    for (std::size_t j = 0; j < kAct; ++j) {
      ASSERT_GE(act[j], -1.0);
      ASSERT_LE(act[j], 1.0);
      mean[j] += act[j] / n;
    }
  }
  for (std::size_t j = 0; j < kAct; ++j) {
    EXPECT_NEAR(mean[j], greedy[j], 3 * c.noise_sigma / 100);
  }
}

TEST(Act, DimensionMismatch) {
  Agent a(kObs, kAct, Config());
  const std::vector<double> obs = {0.1, 0.2};
  EXPECT_THROW(a.Act(obs, false), Error);
}

TEST(Act, NoiseDecaysPerEpisode) {
  Agent a(kObs, kAct, Config());
  a.EndEpisode();
  a.EndEpisode();
  EXPECT_DOUBLE_EQ(a.noise_sigma(), 0.1 * 0.999 * 0.999);
}

TEST(ReplayBuffer, EvictsOldestWhenFull) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.reward = i;
    buf.Push(t);
    EXPECT_EQ(buf.size(), std::min<std::size_t>(i + 1, 3));
  }
  std::vector<double> rewards;
  for (std::size_t i = 0; i < buf.size(); ++i) rewards.push_back(buf[i].reward);
  std::sort(rewards.begin(), rewards.end());
  EXPECT_EQ(rewards, (std::vector<double>{2, 3, 4}));
}

TEST(TrainStep, WaitsForWarmup) {
  AgentConfig c = Config();
  c.warmup_steps = 10;
  c.batch_size = 4;
  Agent a(kObs, kAct, c);
  const auto stream = RandomBatch(12, 10);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto stats = a.TrainStep(stream[i]);
    EXPECT_EQ(stats.has_value(), i + 1 >= 10) << i;
  }
}

TEST(TrainStep, BatchSizeAlsoGatesLearning) {
  AgentConfig c = Config();
  c.warmup_steps = 0;
  c.batch_size = 5;
  Agent a(kObs, kAct, c);
  const auto stream = RandomBatch(6, 11);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    EXPECT_EQ(a.TrainStep(stream[i]).has_value(), i + 1 >= 5) << i;
  }
}

TEST(TrainStep, BufferStaysAtCapacity) {
  AgentConfig c = Config();
  c.buffer_capacity = 8;
  c.warmup_steps = 4;
  c.batch_size = 4;
  Agent a(kObs, kAct, c);
  for (const Transition& t : RandomBatch(20, 12)) a.TrainStep(t);
  EXPECT_EQ(a.buffer().size(), 8u);
}

TEST(TrainStep, DeterministicForEqualSeeds) {
  AgentConfig c = Config(42);
  c.warmup_steps = 16;
  c.batch_size = 16;
  Agent a(kObs, kAct, c), b(kObs, kAct, c);
  for (const Transition& t : RandomBatch(80, 13)) {
    const auto sa = a.TrainStep(t);
    const auto sb = b.TrainStep(t);
    ASSERT_EQ(sa.has_value(), sb.has_value());
    if (sa) {
      EXPECT_EQ(sa->critic_loss, sb->critic_loss);
      EXPECT_EQ(sa->actor_objective, sb->actor_objective);
    }
  }
  EXPECT_EQ(a.actor(), b.actor());
  EXPECT_EQ(a.critic(), b.critic());
  EXPECT_EQ(a.target_actor(), b.target_actor());
  EXPECT_EQ(a.target_critic(), b.target_critic());
  EXPECT_NE(a.actor(), Agent(kObs, kAct, c).actor());
}

TEST(Checkpoint, RoundTrip) {
  AgentConfig c = Config(9);
  c.warmup_steps = 8;
  c.batch_size = 8;
  Agent a(kObs, kAct, c);
  for (const Transition& t : RandomBatch(30, 14)) a.TrainStep(t);
  a.EndEpisode();
  const Agent b = DeserializeAgentText(SerializeAgent(a).dump());
  EXPECT_EQ(b.actor(), a.actor());
  EXPECT_EQ(b.critic(), a.critic());
  EXPECT_EQ(b.target_actor(), a.target_actor());
  EXPECT_EQ(b.target_critic(), a.target_critic());
  EXPECT_EQ(b.noise_sigma(), a.noise_sigma());
  EXPECT_EQ(b.config().gamma, a.config().gamma);
  EXPECT_EQ(b.config().seed, a.config().seed);
}

TEST(Checkpoint, MalformedText) {
  try {
    DeserializeAgentText("{\"actor\": ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedDocument);
  }
}

TEST(AgentConfig, JsonOverridesAndValidation) {
  const AgentConfig c = AgentConfigFromJson(nlohmann::json{{"gamma", 0.9}, {"batch_size", 32}});
  EXPECT_EQ(c.gamma, 0.9);
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.tau, 0.005);
  EXPECT_THROW(AgentConfigFromJson(nlohmann::json{{"gamma", 1.0}}), Error);
  EXPECT_THROW(AgentConfigFromJson(nlohmann::json{{"batch_size", 0}}), Error);
  EXPECT_THROW(AgentConfigFromJson(nlohmann::json{{"bogus", 1}}), Error);
}

}  // namespace
}  // namespace ftrack
