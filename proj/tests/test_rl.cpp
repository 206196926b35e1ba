#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <sstream>

#include "dplace/rl.hpp"
#include "dplace/simulation.hpp"
#include "support.hpp"

namespace dplace {
namespace {

constexpr double kH = 1e-5;
constexpr double kTol = 1e-4;

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

double objective(const Mlp& net, const Matrix& x, const Matrix& upstream) {
  return (net.forward_batch(x).array() * upstream.array()).sum();
}

// Central differences on every parameter and every input of
// sum(upstream .* net(x)).
void check_mlp_gradients(const Mlp& net, Rng& rng) {
  const Matrix x = random_matrix(net.inputs(), 3, rng);
  const Matrix up = random_matrix(net.outputs(), 3, rng);
  Matrix input_grad;
  const Mlp::Gradients g = net.backward(x, up, &input_grad);
  std::vector<double> analytic;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    analytic.insert(analytic.end(), g.w[l].data(), g.w[l].data() + g.w[l].size());
    analytic.insert(analytic.end(), g.b[l].data(), g.b[l].data() + g.b[l].size());
  }
  const std::vector<double> theta = net.flatten();
  ASSERT_EQ(analytic.size(), theta.size());
  Mlp probe = net;
  double worst = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> t = theta;
    t[i] = theta[i] + kH;
    probe.unflatten(t);
    const double fp = objective(probe, x, up);
    t[i] = theta[i] - kH;
    probe.unflatten(t);
    const double fm = objective(probe, x, up);
    worst = std::max(worst, rel_error(analytic[i], (fp - fm) / (2 * kH)));
  }
  EXPECT_LT(worst, kTol) << "parameter gradient";
  worst = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix xp = x;
    Matrix xm = x;
    xp.data()[i] += kH;
    xm.data()[i] -= kH;
    worst = std::max(worst, rel_error(input_grad.data()[i], (objective(net, xp, up) - objective(net, xm, up)) / (2 * kH)));
  }
  EXPECT_LT(worst, kTol) << "input gradient";
}

TEST(MlpGradient, LinearOutputMatchesFiniteDifferences) {
  Rng rng(1);
  Mlp net({7, 16, 16, 1});
  net.init_uniform(rng);
  check_mlp_gradients(net, rng);
}

TEST(MlpGradient, TanhOutputMatchesFiniteDifferences) {
  Rng rng(2);
  Mlp net({6, 12, 12, 5}, Mlp::Output::kTanh);
  net.init_uniform(rng);
  check_mlp_gradients(net, rng);
}

TEST(MlpGradient, SixtyFourHiddenCritic) {
  Rng rng(3);
  NetParams p = make_net_params(6, 4, 64, rng);
  check_mlp_gradients(p.critic, rng);
  check_mlp_gradients(p.actor, rng);
}

TEST(Mlp, ZeroNetAndSingleUnit) {
  Mlp zero({3, 4, 2});
  EXPECT_EQ(zero.forward(Vector::Ones(3)), Vector::Zero(2));
  Mlp unit({1, 1}, Mlp::Output::kTanh);
  unit.weight(0)(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(unit.forward(Vector::Constant(1, 0.7))(0), std::tanh(0.7));
  EXPECT_THROW(zero.forward(Vector::Ones(2)), std::invalid_argument);
}

TEST(Mlp, InitIsBoundedByFanIn) {
  Rng rng(4);
  Mlp net({16, 9, 1});
  net.init_uniform(rng);
  EXPECT_LE(net.weight(0).cwiseAbs().maxCoeff(), 0.25);
  EXPECT_LE(net.weight(1).cwiseAbs().maxCoeff(), 1.0 / 3.0);
  EXPECT_GT(net.weight(0).cwiseAbs().maxCoeff(), 0.0);
}

StateLayout small_layout() { return {3, 4}; }

// A state with datasets 1 and 3 pending.
Vector small_state(Rng& rng) {
  const StateLayout l = small_layout();
  Vector s = random_matrix(l.state_dim(), 1, rng).cwiseAbs();
  const Eigen::Index flags = l.num_datacenters + l.max_datasets * l.num_datacenters;
  for (int d = 0; d < l.max_datasets; ++d) s(flags + d) = (d == 1 || d == 3) ? 1.0 : 0.0;
  return s;
}

TEST(ActionCodec, MasksNonPendingRowsAndNormalizesPendingOnes) {
  Rng rng(5);
  const StateLayout l = small_layout();
  const Matrix s = small_state(rng);
  const Matrix a = random_matrix(l.action_dim(), 1, rng);
  const Matrix masked = mask_actions(l, s, a);
  for (int d = 0; d < 4; ++d)
    for (int k = 0; k < 3; ++k) EXPECT_EQ(masked(d * 3 + k, 0), (d == 1 || d == 3) ? a(d * 3 + k, 0) : 0.0);
  const ActionCodec codec{l, 0.1};
  const Matrix e = codec.encode(s, a);
  EXPECT_NEAR(e.block(3, 0, 3, 1).sum(), 1.0, 1e-12);
  EXPECT_NEAR(e.block(9, 0, 3, 1).sum(), 1.0, 1e-12);
  EXPECT_EQ(e.block(0, 0, 3, 1).sum(), 0.0);
  Eigen::Index arg_a = 0;
  Eigen::Index arg_e = 0;
  a.col(0).segment(3, 3).maxCoeff(&arg_a);
  e.col(0).segment(3, 3).maxCoeff(&arg_e);
  EXPECT_EQ(arg_a, arg_e);
}

// Gradient of sum(w .* net(state, codec(a))) w.r.t. a: the critic's action
// input gradient chained through the codec.
TEST(ActionCodec, CriticActionGradientMatchesFiniteDifferences) {
  Rng rng(6);
  const StateLayout l = small_layout();
  Mlp critic({l.state_dim() + l.action_dim(), 32, 32, 1});
  critic.init_uniform(rng);
  const Matrix s = small_state(rng);
  const Matrix a = random_matrix(l.action_dim(), 1, rng);
  for (double temperature : {0.0, 0.1, 0.5}) {
    const ActionCodec codec{l, temperature};
    auto q = [&](const Matrix& act) {
      Matrix x(l.state_dim() + l.action_dim(), 1);
      x << s, codec.encode(s, act);
      return critic.forward_batch(x)(0, 0);
    };
    Matrix x(l.state_dim() + l.action_dim(), 1);
    x << s, codec.encode(s, a);
    Matrix grad_in;
    critic.backward(x, Matrix::Ones(1, 1), &grad_in);
    const Matrix g = codec.backward(s, a, grad_in.bottomRows(l.action_dim()));
    double worst = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      Matrix ap = a;
      Matrix am = a;
      ap(i) += kH;
      am(i) -= kH;
      worst = std::max(worst, rel_error(g(i), (q(ap) - q(am)) / (2 * kH)));
    }
    EXPECT_LT(worst, kTol) << "temperature " << temperature;
  }
}

Transition random_transition(Rng& rng, const StateLayout& l) {
  Transition t;
  t.state = small_state(rng);
  t.next_state = small_state(rng);
  t.action = random_matrix(l.action_dim(), 1, rng);
  t.reward = std::uniform_real_distribution<double>(-1, 1)(rng);
  t.terminal = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  return t;
}

// One update, checked against finite differences of the critic loss (before
// the step) and of the actor objective under the updated critic.
void check_update(const ActionCodec* codec) {
  Rng rng(7);
  const StateLayout l = small_layout();
  NetParams p = make_net_params(l.state_dim(), l.action_dim(), 16, rng);
  // Targets differ from the online nets so the bootstrap term matters.
  p.critic_target.init_uniform(rng);
  p.actor_target.init_uniform(rng);
  std::vector<Transition> store;
  for (int i = 0; i < 6; ++i) store.push_back(random_transition(rng, l));
  std::vector<const Transition*> batch;
  for (const Transition& t : store) batch.push_back(&t);
  const double gamma = 0.9;
  const double lr_c = 1e-3;
  const double lr_a = 1e-3;

  auto seen = [&](const Matrix& states, const Matrix& acts) { return codec ? codec->encode(states, acts) : acts; };
  Matrix states(l.state_dim(), 6);
  Matrix actions(l.action_dim(), 6);
  for (int j = 0; j < 6; ++j) {
    states.col(j) = store[static_cast<std::size_t>(j)].state;
    actions.col(j) = store[static_cast<std::size_t>(j)].action;
  }
  const Vector y = critic_target(batch, gamma, p, codec);
  // Target oracle written out per transition.
  for (int j = 0; j < 6; ++j) {
    const Transition& t = store[static_cast<std::size_t>(j)];
    const Matrix ns = t.next_state;
    Matrix x(l.state_dim() + l.action_dim(), 1);
    x << ns, seen(ns, p.actor_target.forward_batch(ns));
    const double want = t.reward + (t.terminal ? 0.0 : gamma * p.critic_target.forward_batch(x)(0, 0));
    EXPECT_NEAR(y(j), want, 1e-12);
  }
  auto critic_loss = [&](const Mlp& c) {
    Matrix x(l.state_dim() + l.action_dim(), 6);
    x << states, seen(states, actions);
    return (c.forward_batch(x).row(0) - y.transpose()).squaredNorm() / 6.0;
  };
  const std::vector<double> c0 = p.critic.flatten();
  const std::vector<double> a0 = p.actor.flatten();
  NetParams after = p;
  update_networks(batch, after, lr_a, lr_c, gamma, codec);

  const std::vector<double> c1 = after.critic.flatten();
  Mlp probe = p.critic;
  double worst = 0;
  for (std::size_t i = 0; i < c0.size(); i += 7) {
    std::vector<double> t = c0;
    t[i] += kH;
    probe.unflatten(t);
    const double fp = critic_loss(probe);
    t[i] -= 2 * kH;
    probe.unflatten(t);
    const double fm = critic_loss(probe);
    worst = std::max(worst, rel_error((c0[i] - c1[i]) / lr_c, (fp - fm) / (2 * kH)));
  }
  EXPECT_LT(worst, kTol) << "critic step";

  auto actor_objective = [&](const Mlp& actor) {
    Matrix x(l.state_dim() + l.action_dim(), 6);
    x << states, seen(states, actor.forward_batch(states));
    return after.critic.forward_batch(x).sum() / 6.0;
  };
  const std::vector<double> a1 = after.actor.flatten();
  Mlp aprobe = p.actor;
  worst = 0;
  for (std::size_t i = 0; i < a0.size(); i += 5) {
    std::vector<double> t = a0;
    t[i] += kH;
    aprobe.unflatten(t);
    const double fp = actor_objective(aprobe);
    t[i] -= 2 * kH;
    aprobe.unflatten(t);
    const double fm = actor_objective(aprobe);
    worst = std::max(worst, rel_error((a1[i] - a0[i]) / lr_a, (fp - fm) / (2 * kH)));
  }
  EXPECT_LT(worst, kTol) << "actor step";
}

TEST(UpdateNetworks, RawActionsFollowExactGradients) { check_update(nullptr); }

TEST(UpdateNetworks, CodecActionsFollowExactGradients) {
  const ActionCodec codec{small_layout(), 0.1};
  check_update(&codec);
}

TEST(UpdateNetworks, RejectsEmptyBatch) {
  Rng rng(8);
  NetParams p = make_net_params(4, 2, 4, rng);
  std::vector<const Transition*> none;
  EXPECT_THROW(update_networks(none, p, 0.1, 0.1, 0.9), std::invalid_argument);
}

TEST(Reward, HandEvaluatedExamples) {
  EXPECT_NEAR(compute_reward(1, 500, 450, 400), 5.0, 1e-12);
  EXPECT_NEAR(compute_reward(2, 500, 405, 400), 0.5, 1e-12);
  EXPECT_NEAR(compute_reward(2, 500, 600, 400), -2.0, 1e-12);
  EXPECT_NEAR(compute_reward(3, 0, 410, 400), 0.01 * -10, 1e-12);  // 410 is not below 410
  EXPECT_NEAR(compute_reward(3, 0, 300, 400), 1 + 0.1 * 100, 1e-12);
}

TEST(Reward, ExactlyOneBranchFiresOverAGrid) {
  const RewardConstants c;
  int counts[4] = {0, 0, 0, 0};
  for (int episode : {1, 2, 3, 50}) {
    for (double prev = 0; prev <= 40; prev += 5) {
      for (double next = 0; next <= 40; next += 2.5) {
        for (double min_t = 0; min_t <= 40; min_t += 5) {
          const int branch = reward_branch(episode, next, min_t);
          ASSERT_GE(branch, 1);
          ASSERT_LE(branch, 3);
          ++counts[branch];
          double want = 0;
          int fired = 0;
          if (episode == 1) {
            want = 0.1 * (prev - next);
            ++fired;
          }
          if (episode != 1 && next < min_t + 10) {
            want = 1 + 0.1 * (min_t - next);
            ++fired;
          }
          if (episode != 1 && !(next < min_t + 10)) {
            want = 0.01 * (min_t - next);
            ++fired;
          }
          ASSERT_EQ(fired, 1);
          EXPECT_NEAR(compute_reward(episode, prev, next, min_t, std::nullopt, c), want, 1e-12);
        }
      }
    }
  }
  EXPECT_GT(counts[1], 0);
  EXPECT_GT(counts[2], 0);
  EXPECT_GT(counts[3], 0);
}

TEST(Reward, RunningAverageReferenceMovesTheThreshold) {
  // MinT 400, episode mean 500: 450 is near the mean but far from MinT.
  EXPECT_EQ(reward_branch(2, 450, 400), 3);
  EXPECT_EQ(reward_branch(2, 450, 500), 2);
  EXPECT_NEAR(compute_reward(2, 0, 450, 400, 500.0), 1 + 0.1 * -50, 1e-12);
}

TEST(SoftUpdate, ContractionIsExactOnDyadicValues) {
  Rng rng(9);
  std::uniform_int_distribution<int> q(-64, 64);
  for (double tau : {0.0, 0.25, 0.5, 1.0}) {
    Mlp online({3, 4, 2});
    Mlp target({3, 4, 2});
    std::vector<double> a(online.num_parameters());
    std::vector<double> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = q(rng) / 16.0;
      b[i] = q(rng) / 16.0;
    }
    online.unflatten(a);
    target.unflatten(b);
    soft_update(online, target, tau);
    const std::vector<double> after = target.flatten();
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(std::abs(after[i] - a[i]), (1 - tau) * std::abs(b[i] - a[i]));
      EXPECT_EQ(after[i], tau * a[i] + (1 - tau) * b[i]);
    }
  }
  Mlp one({1, 1});
  Mlp zero({1, 1});
  one.unflatten(std::vector<double>{1.0, 1.0});
  soft_update(one, zero, 0.01);
  EXPECT_EQ(zero.weight(0)(0, 0), 0.01);
  EXPECT_THROW(soft_update(Mlp({2, 1}), zero, 0.5), std::invalid_argument);
}

TEST(ReplayBuffer, RingSemanticsAgainstDequeModel) {
  Rng rng(10);
  std::uniform_int_distribution<int> cap_d(1, 20);
  std::uniform_int_distribution<int> op_d(0, 3);
  for (int seq = 0; seq < 10000; ++seq) {
    const auto cap = static_cast<std::size_t>(cap_d(rng));
    ReplayBuffer buf(cap);
    std::deque<double> model;
    double next_id = 0;
    const int ops = std::uniform_int_distribution<int>(1, 40)(rng);
    for (int op = 0; op < ops; ++op) {
      if (op_d(rng) != 0 || model.empty()) {
        Transition t;
        t.reward = next_id;
        buf.push(std::move(t));
        model.push_back(next_id);
        next_id += 1;
        if (model.size() > cap) model.pop_front();
      } else {
        const auto batch = std::uniform_int_distribution<std::size_t>(1, model.size())(rng);
        const auto picked = buf.sample(batch, rng);
        ASSERT_EQ(picked.size(), batch);
        std::set<double> ids;
        for (const Transition* t : picked) {
          ids.insert(t->reward);
          ASSERT_NE(std::find(model.begin(), model.end(), t->reward), model.end());
        }
        ASSERT_EQ(ids.size(), batch);
      }
      ASSERT_EQ(buf.size(), model.size());
      for (std::size_t i = 0; i < model.size(); ++i) ASSERT_EQ(buf.at(i).reward, model[i]);
    }
    EXPECT_THROW(buf.sample(model.size() + 1, rng), std::invalid_argument);
  }
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

TEST(ReplayBuffer, SamplingIsRoughlyUniform) {
  Rng rng(11);
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) {
    Transition t;
    t.reward = i;
    buf.push(std::move(t));
  }
  std::vector<int> hits(10, 0);
  for (int k = 0; k < 20000; ++k)
    for (const Transition* t : buf.sample(3, rng)) ++hits[static_cast<std::size_t>(t->reward)];
  for (int h : hits) EXPECT_NEAR(h / 60000.0, 0.1, 0.01);
}

TEST(Noise, ZeroScaleEqualsForwardAndSeedsRepeat) {
  Rng rng(12);
  Mlp actor({4, 8, 3}, Mlp::Output::kTanh);
  actor.init_uniform(rng);
  const Vector s = Vector::Constant(4, 0.3);
  EXPECT_EQ(act_with_noise(actor, s, 0.0, rng), actor.forward(s));
  Rng r1(5);
  Rng r2(5);
  EXPECT_EQ(act_with_noise(actor, s, 0.3, r1), act_with_noise(actor, s, 0.3, r2));
  EXPECT_NE(act_with_noise(actor, s, 0.3, r1), actor.forward(s));
}

Scenario five_dc_scenario() {
  testing::ScenarioBuilder b;
  b.cloud();
  for (int i = 0; i < 4; ++i) b.edge(1000);
  for (DcId i = 0; i < 5; ++i)
    for (DcId j = i + 1; j < 5; ++j) b.band(i, j, 10);
  b.dataset(400);
  b.dataset(300, DcId{3});
  b.dataset(100);
  return b.finish();
}

TEST(StateEncoding, OneHotRowsCapacitiesAndPendingFlags) {
  const Scenario s = five_dc_scenario();
  const StateLayout l{5, 4};
  const PlacementMap empty(3);
  const Vector e = encode_state(l, s, empty, {});
  EXPECT_EQ(e.head(5), Vector::Ones(5));
  EXPECT_EQ(e.tail(e.size() - 5).sum(), 0.0);

  PlacementMap p(3);
  p.place(0, 2);
  const DatasetId pending[] = {2};
  p.place(2, 2);
  const Vector v = encode_state(l, s, p, pending);
  EXPECT_EQ(v.segment(5, 5), (Vector(5) << 0, 0, 1, 0, 0).finished());
  EXPECT_DOUBLE_EQ(v(2), 0.5);
  EXPECT_EQ(v(0), 1.0);
  EXPECT_EQ(v(5 + 20 + 2), 1.0);
  EXPECT_EQ(v(5 + 20 + 0), 0.0);
  EXPECT_EQ(encode_state(l, s, p, pending), v);
  EXPECT_THROW(encode_state(StateLayout{5, 2}, s, p, pending), std::invalid_argument);
}

TEST(ActionDecoding, ArgmaxTiesShiftAndPrivates) {
  const Scenario s = five_dc_scenario();
  const StateLayout l{5, 3};
  const PlacementMap base(3);
  Vector a = Vector::Zero(l.action_dim());
  a.segment(0, 5) << 0.1, 0.9, 0.3, 0.2, 0.0;
  a.segment(5, 5) << 9, 9, 9, 9, 9;
  a.segment(10, 5) << 0.5, 0.2, 0.5, 0.1, 0.0;
  const DatasetId pending[] = {0, 1, 2};
  const DecodedAction d = decode_action(a, l, pending, s, base);
  EXPECT_EQ(d.choice, (std::vector<DcId>{1, 3, 0}));
  const Vector shifted = (a.array() + 3.5).matrix();
  EXPECT_EQ(decode_action(shifted, l, pending, s, base).choice, d.choice);
  EXPECT_EQ(d.placement.at(1), 3);
  EXPECT_TRUE(d.relocations.empty());
}

TEST(ActionDecoding, OverflowEvictsPendingFirst) {
  testing::ScenarioBuilder b;
  b.cloud();
  b.edge(1000);
  b.band(0, 1, 20);
  b.dataset(700);
  b.dataset(600);
  const Scenario s = b.finish();
  PlacementMap p(2);
  p.place(0, 1);
  const StateLayout l{2, 2};
  Vector a = Vector::Zero(4);
  a(3) = 1;  // dataset 1 to the edge
  const DatasetId pending[] = {1};
  const DecodedAction d = decode_action(a, l, pending, s, p);
  ASSERT_EQ(d.relocations.size(), 1u);
  EXPECT_EQ(d.relocations[0].dataset, 1);
  EXPECT_EQ(d.placement.at(0), 1);
  EXPECT_EQ(d.placement.at(1), 0);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  Rng rng(13);
  const StateLayout l{3, 4};
  const NetParams p = make_net_params(l.state_dim(), l.action_dim(), 8, rng);
  std::ostringstream first;
  save_checkpoint(first, p, l);
  std::istringstream in(first.str());
  StateLayout back_layout;
  const NetParams back = load_checkpoint(in, &back_layout);
  EXPECT_EQ(back_layout, l);
  EXPECT_EQ(back.actor, p.actor);
  EXPECT_EQ(back.critic_target, p.critic_target);
  std::ostringstream second;
  save_checkpoint(second, back, back_layout);
  EXPECT_EQ(second.str(), first.str());

  std::istringstream bad("dplace-checkpoint 2\n");
  EXPECT_THROW(load_checkpoint(bad, nullptr), std::runtime_error);
  std::string text = first.str();
  text.replace(text.find("layout 3 4"), 10, "layout 3 5");
  std::istringstream mismatched(text);
  EXPECT_THROW(load_checkpoint(mismatched, nullptr), std::runtime_error);
}

// A two-slot toy world: one generated dataset per slot.
Scenario chain_scenario() {
  testing::ScenarioBuilder b;
  b.cloud();
  b.edge(5000);
  b.edge(5000);
  b.band(0, 1, 20);
  b.band(0, 2, 20);
  b.band(1, 2, 100);
  const DatasetId raw = b.dataset(800);
  const DatasetId mid = b.dataset(600);
  const DatasetId out = b.dataset(300);
  const WorkflowId w = b.workflow();
  b.task(w, {raw}, {mid});
  b.task(w, {mid}, {out});
  b.task(w, {out});
  return b.finish();
}

TEST(Train, NoUpdateBeforeTheBufferFills) {
  const Scenario s = chain_scenario();
  PlacementMap build(3);
  build.place(0, 1);
  SimulationEnv env(s, build, StateLayout{3, 3});
  TrainConfig cfg;
  cfg.episodes = 1;
  cfg.maxstep = 1;
  const TrainResult r = train(env, cfg);
  EXPECT_EQ(r.updates, 0u);
  EXPECT_EQ(r.transitions, r.log.size());
  EXPECT_GE(r.transitions, 1u);
}

TEST(Train, SameSeedSameNetworks) {
  const Scenario s = chain_scenario();
  PlacementMap build(3);
  build.place(0, 1);
  TrainConfig cfg;
  cfg.episodes = 30;
  cfg.maxstep = 4;
  cfg.batch = 8;
  cfg.hidden = 8;
  SimulationEnv e1(s, build, StateLayout{3, 3});
  SimulationEnv e2(s, build, StateLayout{3, 3});
  const TrainResult a = train(e1, cfg);
  const TrainResult b = train(e2, cfg);
  EXPECT_GT(a.updates, 0u);
  EXPECT_EQ(a.params.actor, b.params.actor);
  EXPECT_EQ(a.params.critic, b.params.critic);
  EXPECT_EQ(a.min_t, b.min_t);
  // MinT only ever records the best time seen.
  for (const TrainLogRow& row : a.log) EXPECT_LE(a.min_t[static_cast<std::size_t>(row.slot)], row.t_avg + 1e-9);
  std::ostringstream log;
  write_train_log(log, a.log);
  EXPECT_EQ(log.str().substr(0, log.str().find('\n')), "episode,slot,reward,T_avg,MinT");
}

}  // namespace
}  // namespace dplace
