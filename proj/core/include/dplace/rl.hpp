#pragma once

// Actor-critic runtime placer: state/action encoding, reward, replay memory,
// small tanh MLPs with exact backpropagation, and the DDPG training loop.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dplace/model.hpp"
#include "dplace/optimizer.hpp"

namespace dplace {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Fully connected net; tanh on hidden layers, identity or tanh on the
// output layer.
class Mlp {
 public:
  enum class Output { kLinear, kTanh };

  Mlp() = default;
  // sizes = {inputs, hidden..., outputs}; parameters start at zero.
  explicit Mlp(std::vector<int> sizes, Output output = Output::kLinear);

  // Weights uniform in +-1/sqrt(fan_in), biases likewise.
  void init_uniform(Rng& rng);

  int inputs() const { return sizes_.front(); }
  int outputs() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Output output() const { return output_; }
  std::size_t layers() const { return w_.size(); }

  Matrix& weight(std::size_t l) { return w_[l]; }
  const Matrix& weight(std::size_t l) const { return w_[l]; }
  Vector& bias(std::size_t l) { return b_[l]; }
  const Vector& bias(std::size_t l) const { return b_[l]; }

  Vector forward(const Vector& x) const;
  // Columns of x are samples.
  Matrix forward_batch(const Matrix& x) const;

  struct Gradients {
    std::vector<Matrix> w;
    std::vector<Vector> b;
  };
  // Gradient of sum_{j,s} upstream(j, s) * output(j, s) for the batch x.
  // When input_grad is non-null it receives d/dx of the same objective.
  Gradients backward(const Matrix& x, const Matrix& upstream, Matrix* input_grad = nullptr) const;
  void apply(const Gradients& g, double step);

  std::size_t num_parameters() const;
  // Flat parameter view in layer order (weights column-major, then bias).
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<int> sizes_;
  Output output_ = Output::kLinear;
  std::vector<Matrix> w_;
  std::vector<Vector> b_;
};

struct NetParams {
  Mlp actor;
  Mlp critic;
  Mlp actor_target;
  Mlp critic_target;
};

// Actor: state -> action scores. Critic: [state; action] -> value.
NetParams make_net_params(int state_dim, int action_dim, int hidden, Rng& rng);

struct Transition {
  Vector state;
  Vector action;
  double reward = 0;
  Vector next_state;
  // The last refinement step of a decision does not bootstrap.
  bool terminal = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1500);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  void push(Transition t);
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  // Uniform sample of `batch` distinct transitions. Requires size() >= batch.
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

struct RewardConstants {
  double c1 = 0.1;
  double c2 = 1.0;
  double c3 = 0.1;
  double c4 = 0.01;
};

// 1: first-episode improvement branch, 2: near-record branch, 3: otherwise.
int reward_branch(int episode, double t_next, double threshold_ref, const RewardConstants& c = {});
// `threshold_ref` defaults to min_t; the running-average variant passes the
// episode mean instead.
double compute_reward(int episode, double t_prev, double t_next, double min_t,
                      std::optional<double> threshold_ref = std::nullopt, const RewardConstants& c = {});

struct StateLayout;
struct ActionCodec;

// y_j = r_j + gamma * (1 - terminal_j) * Q'(s'_j, mu'(s'_j)). A codec
// transforms mu'(s'_j) the same way update_networks does.
Vector critic_target(std::span<const Transition* const> batch, double gamma, const NetParams& targets,
                     const ActionCodec* codec = nullptr);

struct UpdateStats {
  double critic_loss = 0;
  double critic_loss_after = 0;
  double actor_objective = 0;
};

// One MSE gradient step on the critic, then one ascent step on mean
// Q(s, mu(s)) for the actor, evaluated with the updated critic. Throws
// std::runtime_error on non-finite values. With a codec the critic sees
// codec.encode(s, a) instead of the raw action and the actor gradient is
// chained through it.
UpdateStats update_networks(std::span<const Transition* const> batch, NetParams& params, double lr_actor,
                            double lr_critic, double gamma, const ActionCodec* codec = nullptr);

void soft_update(const Mlp& online, Mlp& target, double tau);

Vector act_with_noise(const Mlp& actor, const Vector& state, double noise_scale, Rng& rng);

// State = [remaining capacity fraction per datacenter]
//         [one-hot location per dataset slot, row-major max_datasets x |DC|]
//         [pending flag per dataset slot].
// Dataset d occupies slot d; the action has the same row layout.
struct StateLayout {
  int num_datacenters = 0;
  int max_datasets = 0;

  int state_dim() const { return num_datacenters + max_datasets * num_datacenters + max_datasets; }
  int action_dim() const { return max_datasets * num_datacenters; }
  friend bool operator==(const StateLayout&, const StateLayout&) = default;
};

Vector encode_state(const StateLayout& layout, const Scenario& scenario, const PlacementMap& placement,
                    std::span<const DatasetId> pending);

// Zeroes the action rows of datasets whose pending flag in `state` is off.
// Columns of `actions` pair with columns of `states`.
Matrix mask_actions(const StateLayout& layout, const Matrix& states, Matrix actions);

// What the critic sees of an action: rows of datasets that are not pending
// are zeroed, and with a positive temperature each pending row becomes
// softmax(scores / temperature), a smooth stand-in for its argmax.
struct ActionCodec {
  StateLayout layout;
  double temperature = 0;

  Matrix encode(const Matrix& states, const Matrix& actions) const;
  // Gradient w.r.t. the actions given the gradient w.r.t. encode(states, actions).
  Matrix backward(const Matrix& states, const Matrix& actions, const Matrix& grad) const;
};

struct DecodedAction {
  std::vector<DcId> choice;  // per pending dataset, before repair
  PlacementMap placement;    // pending datasets applied, then repaired
  std::vector<Relocation> relocations;
};

// Pending public datasets go to the argmax of their row (ties to the lowest
// index), private ones to their homes. `placement` must not contain them yet.
DecodedAction decode_action(const Vector& scores, const StateLayout& layout, std::span<const DatasetId> pending,
                            const Scenario& scenario, const PlacementMap& placement);

// Episodic decision process exposed by the simulation.
class DecisionEnv {
 public:
  virtual ~DecisionEnv() = default;
  virtual StateLayout layout() const = 0;
  virtual void reset() = 0;
  // Runs the simulation up to the next slot with pending datasets to place.
  // Returns false once the episode is over.
  virtual bool next_decision() = 0;
  virtual int slot() const = 0;
  virtual Vector state() const = 0;
  // Average slot time if the pending datasets stayed where they were produced.
  virtual double current_average() const = 0;

  struct Step {
    double average = 0;  // T_avg including this candidate
    Vector next_state;
  };
  virtual Step try_action(const Vector& scores) = 0;
  // Commits the best candidate tried for the current decision.
  virtual void commit() = 0;
};

enum class ThresholdMode { kMinT, kRunningAverage };

struct TrainConfig {
  int episodes = 200;
  int maxstep = 20;
  int hidden = 64;
  double gamma = 0.99;
  double tau = 0.01;
  double lr_actor = 0.001;
  double lr_critic = 0.001;
  std::size_t buffer = 1500;
  std::size_t batch = 32;
  double noise_start = 0.3;
  double noise_end = 0.01;
  ThresholdMode threshold = ThresholdMode::kMinT;
  // Times are divided by this before entering the reward.
  double time_scale = 1.0;
  // Store and train on actions restricted to the pending rows.
  bool mask_actions = true;
  // Softmax temperature of the critic's view of the action; 0 feeds raw scores.
  double action_temperature = 0.1;
  std::uint64_t seed = 1;
};

struct TrainLogRow {
  int episode = 0;
  int slot = 0;
  double reward = 0;
  double t_avg = 0;
  double min_t = 0;
};

struct TrainResult {
  NetParams params;
  StateLayout layout;
  // Indexed by slot; slots that never needed a decision hold +inf.
  std::vector<double> min_t;
  std::vector<TrainLogRow> log;
  std::size_t transitions = 0;
  std::size_t updates = 0;
};

TrainResult train(DecisionEnv& env, const TrainConfig& cfg);

void write_train_log(std::ostream& out, std::span<const TrainLogRow> rows);

// Text checkpoint: a shape header per tensor, values printed with %.17g.
void save_checkpoint(std::ostream& out, const NetParams& params, const StateLayout& layout);
void save_checkpoint(const std::filesystem::path& path, const NetParams& params, const StateLayout& layout);
NetParams load_checkpoint(std::istream& in, StateLayout* layout);
NetParams load_checkpoint(const std::filesystem::path& path, StateLayout* layout);

}  // namespace dplace
