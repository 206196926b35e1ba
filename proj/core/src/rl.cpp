#include "dplace/rl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dplace {

Mlp::Mlp(std::vector<int> sizes, Output output) : sizes_(std::move(sizes)), output_(output) {
  if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("MLP layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_.push_back(Matrix::Zero(sizes_[l + 1], sizes_[l]));
    b_.push_back(Vector::Zero(sizes_[l + 1]));
  }
}

void Mlp::init_uniform(Rng& rng) {
  for (std::size_t l = 0; l < w_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w_[l].cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < w_[l].cols(); ++j)
      for (Eigen::Index i = 0; i < w_[l].rows(); ++i) w_[l](i, j) = dist(rng);
    for (Eigen::Index i = 0; i < b_[l].size(); ++i) b_[l](i) = dist(rng);
  }
}

Vector Mlp::forward(const Vector& x) const {
  if (x.size() != inputs()) throw std::invalid_argument("MLP input size mismatch");
  Vector a = x;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Vector z = w_[l] * a + b_[l];
    a = l + 1 < w_.size() || output_ == Output::kTanh ? Vector(z.array().tanh()) : z;
  }
  return a;
}

Matrix Mlp::forward_batch(const Matrix& x) const {
  if (x.rows() != inputs()) throw std::invalid_argument("MLP input size mismatch");
  Matrix a = x;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Matrix z = (w_[l] * a).colwise() + b_[l];
    a = l + 1 < w_.size() || output_ == Output::kTanh ? Matrix(z.array().tanh()) : z;
  }
  return a;
}

Mlp::Gradients Mlp::backward(const Matrix& x, const Matrix& upstream, Matrix* input_grad) const {
  if (x.rows() != inputs() || upstream.rows() != outputs() || upstream.cols() != x.cols())
    throw std::invalid_argument("MLP backward shape mismatch");
  std::vector<Matrix> acts{x};
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Matrix z = (w_[l] * acts.back()).colwise() + b_[l];
    acts.push_back(l + 1 < w_.size() || output_ == Output::kTanh ? Matrix(z.array().tanh()) : z);
  }
  Gradients g;
  g.w.resize(w_.size());
  g.b.resize(w_.size());
  Matrix delta = upstream;
  if (output_ == Output::kTanh) delta = upstream.array() * (1.0 - acts.back().array().square());
  for (std::size_t l = w_.size(); l-- > 0;) {
    g.w[l] = delta * acts[l].transpose();
    g.b[l] = delta.rowwise().sum();
    if (l == 0 && input_grad == nullptr) break;
    Matrix back = w_[l].transpose() * delta;
    if (l == 0) {
      *input_grad = std::move(back);
    } else {
      delta = back.array() * (1.0 - acts[l].array().square());
    }
  }
  return g;
}

void Mlp::apply(const Gradients& g, double step) {
  for (std::size_t l = 0; l < w_.size(); ++l) {
    w_[l] += step * g.w[l];
    b_[l] += step * g.b[l];
  }
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) n += static_cast<std::size_t>(w_[l].size() + b_[l].size());
  return n;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(num_parameters());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    out.insert(out.end(), w_[l].data(), w_[l].data() + w_[l].size());
    out.insert(out.end(), b_[l].data(), b_[l].data() + b_[l].size());
  }
  return out;
}

void Mlp::unflatten(std::span<const double> values) {
  if (values.size() != num_parameters()) throw std::invalid_argument("parameter count mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(k), w_[l].size(), w_[l].data());
    k += static_cast<std::size_t>(w_[l].size());
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(k), b_[l].size(), b_[l].data());
    k += static_cast<std::size_t>(b_[l].size());
  }
}

bool operator==(const Mlp& a, const Mlp& b) {
  return a.sizes_ == b.sizes_ && a.output_ == b.output_ && a.flatten() == b.flatten();
}

NetParams make_net_params(int state_dim, int action_dim, int hidden, Rng& rng) {
  NetParams p;
  p.actor = Mlp({state_dim, hidden, hidden, action_dim});
  p.critic = Mlp({state_dim + action_dim, hidden, hidden, 1});
  p.actor.init_uniform(rng);
  p.critic.init_uniform(rng);
  p.actor_target = p.actor;
  p.critic_target = p.critic;
  return p;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay buffer index");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  const std::size_t n = items_.size();
  if (batch > n) throw std::invalid_argument("replay buffer holds fewer transitions than the batch");
  std::vector<std::size_t> picked;
  picked.reserve(batch);
  for (std::size_t j = n - batch; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    picked.push_back(std::find(picked.begin(), picked.end(), t) == picked.end() ? t : j);
  }
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i : picked) out.push_back(&items_[i]);
  return out;
}

int reward_branch(int episode, double t_next, double threshold_ref, const RewardConstants& c) {
  if (episode == 1) return 1;
  return t_next < threshold_ref + 1.0 / c.c3 ? 2 : 3;
}

double compute_reward(int episode, double t_prev, double t_next, double min_t, std::optional<double> threshold_ref,
                      const RewardConstants& c) {
  switch (reward_branch(episode, t_next, threshold_ref.value_or(min_t), c)) {
    case 1: return c.c1 * (t_prev - t_next);
    case 2: return c.c2 + c.c3 * (min_t - t_next);
    default: return c.c4 * (min_t - t_next);
  }
}

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::runtime_error(std::string("non-finite values in ") + what);
}

Matrix stack_columns(std::span<const Transition* const> batch, Vector Transition::*field) {
  const Eigen::Index rows = (batch.front()->*field).size();
  Matrix out(rows, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if ((batch[j]->*field).size() != rows) throw std::invalid_argument("inconsistent transition shapes");
    out.col(static_cast<Eigen::Index>(j)) = batch[j]->*field;
  }
  return out;
}

Matrix join_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

Matrix mask_actions(const StateLayout& layout, const Matrix& states, Matrix actions) {
  if (states.rows() != layout.state_dim() || actions.rows() != layout.action_dim() || states.cols() != actions.cols())
    throw std::invalid_argument("mask_actions shape mismatch");
  const Eigen::Index num_dc = layout.num_datacenters;
  const Eigen::Index flags = num_dc + static_cast<Eigen::Index>(layout.max_datasets) * num_dc;
  for (Eigen::Index j = 0; j < states.cols(); ++j)
    for (Eigen::Index d = 0; d < layout.max_datasets; ++d)
      if (states(flags + d, j) == 0.0) actions.block(d * num_dc, j, num_dc, 1).setZero();
  return actions;
}

Matrix ActionCodec::encode(const Matrix& states, const Matrix& actions) const {
  Matrix out = mask_actions(layout, states, actions);
  if (temperature <= 0) return out;
  const Eigen::Index num_dc = layout.num_datacenters;
  const Eigen::Index flags = num_dc + static_cast<Eigen::Index>(layout.max_datasets) * num_dc;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index d = 0; d < layout.max_datasets; ++d) {
      if (states(flags + d, j) == 0.0) continue;
      auto row = out.block(d * num_dc, j, num_dc, 1);
      const double top = row.maxCoeff();
      row = ((row.array() - top) / temperature).exp().matrix();
      row /= row.sum();
    }
  return out;
}

Matrix ActionCodec::backward(const Matrix& states, const Matrix& actions, const Matrix& grad) const {
  if (temperature <= 0) return mask_actions(layout, states, grad);
  const Matrix p = encode(states, actions);
  Matrix out = Matrix::Zero(grad.rows(), grad.cols());
  const Eigen::Index num_dc = layout.num_datacenters;
  const Eigen::Index flags = num_dc + static_cast<Eigen::Index>(layout.max_datasets) * num_dc;
  for (Eigen::Index j = 0; j < grad.cols(); ++j)
    for (Eigen::Index d = 0; d < layout.max_datasets; ++d) {
      if (states(flags + d, j) == 0.0) continue;
      const Vector pr = p.block(d * num_dc, j, num_dc, 1);
      const Vector gr = grad.block(d * num_dc, j, num_dc, 1);
      const double dot = pr.dot(gr);
      out.block(d * num_dc, j, num_dc, 1) = (pr.array() * (gr.array() - dot) / temperature).matrix();
    }
  return out;
}

Vector critic_target(std::span<const Transition* const> batch, double gamma, const NetParams& targets,
                     const ActionCodec* codec) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const Matrix next = stack_columns(batch, &Transition::next_state);
  Matrix next_action = targets.actor_target.forward_batch(next);
  if (codec != nullptr) next_action = codec->encode(next, next_action);
  const Matrix q = targets.critic_target.forward_batch(join_rows(next, next_action));
  Vector y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    y(k) = batch[j]->reward + (batch[j]->terminal ? 0.0 : gamma * q(0, k));
  }
  return y;
}

UpdateStats update_networks(std::span<const Transition* const> batch, NetParams& params, double lr_actor,
                            double lr_critic, double gamma, const ActionCodec* codec) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const Matrix states = stack_columns(batch, &Transition::state);
  Matrix actions = stack_columns(batch, &Transition::action);
  if (codec != nullptr) actions = codec->encode(states, actions);
  const Vector y = critic_target(batch, gamma, params, codec);
  UpdateStats stats;

  const Matrix sa = join_rows(states, actions);
  const Matrix q = params.critic.forward_batch(sa);
  const Eigen::RowVectorXd err = q.row(0) - y.transpose();
  stats.critic_loss = err.squaredNorm() * inv_b;
  if (!std::isfinite(stats.critic_loss)) throw std::runtime_error("non-finite critic loss");
  const Matrix upstream = 2.0 * inv_b * err;
  params.critic.apply(params.critic.backward(sa, upstream), -lr_critic);

  const Matrix mu = params.actor.forward_batch(states);
  const Matrix seen = codec != nullptr ? codec->encode(states, mu) : mu;
  const Matrix s_mu = join_rows(states, seen);
  stats.actor_objective = params.critic.forward_batch(s_mu).sum() * inv_b;
  Matrix grad_in;
  params.critic.backward(s_mu, Matrix::Constant(1, s_mu.cols(), inv_b), &grad_in);
  Matrix d_action = grad_in.bottomRows(mu.rows());
  if (codec != nullptr) d_action = codec->backward(states, mu, d_action);
  require_finite(d_action, "actor gradient");
  params.actor.apply(params.actor.backward(states, d_action), lr_actor);

  stats.critic_loss_after = (params.critic.forward_batch(sa).row(0) - y.transpose()).squaredNorm() * inv_b;
  if (!std::isfinite(stats.critic_loss_after) || !std::isfinite(stats.actor_objective))
    throw std::runtime_error("non-finite values after a network update");
  return stats;
}

void soft_update(const Mlp& online, Mlp& target, double tau) {
  if (online.sizes() != target.sizes()) throw std::invalid_argument("soft update shape mismatch");
  for (std::size_t l = 0; l < online.layers(); ++l) {
    target.weight(l) = tau * online.weight(l) + (1.0 - tau) * target.weight(l);
    target.bias(l) = tau * online.bias(l) + (1.0 - tau) * target.bias(l);
  }
}

Vector act_with_noise(const Mlp& actor, const Vector& state, double noise_scale, Rng& rng) {
  Vector a = actor.forward(state);
  if (noise_scale == 0) return a;
  std::normal_distribution<double> noise(0.0, noise_scale);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += noise(rng);
  return a;
}

Vector encode_state(const StateLayout& layout, const Scenario& scenario, const PlacementMap& placement,
                    std::span<const DatasetId> pending) {
  const int num_dc = layout.num_datacenters;
  if (num_dc != scenario.num_datacenters()) throw std::invalid_argument("state layout datacenter count mismatch");
  if (scenario.num_datasets() > layout.max_datasets)
    throw std::invalid_argument("scenario has more datasets than the state layout provides");
  Vector s = Vector::Zero(layout.state_dim());
  const std::vector<Megabytes> used = storage_used(scenario, placement);
  for (const Datacenter& dc : scenario.datacenters) {
    double frac = 1.0;
    if (dc.capacity)
      frac = std::clamp(1.0 - static_cast<double>(used[static_cast<std::size_t>(dc.id)]) / static_cast<double>(*dc.capacity),
                        0.0, 1.0);
    s(dc.id) = frac;
  }
  const auto raw = placement.raw();
  for (std::size_t d = 0; d < raw.size(); ++d)
    if (raw[d] != kNoDatacenter) s(num_dc + static_cast<Eigen::Index>(d) * num_dc + raw[d]) = 1.0;
  const Eigen::Index flags = num_dc + static_cast<Eigen::Index>(layout.max_datasets) * num_dc;
  for (DatasetId d : pending) s(flags + d) = 1.0;
  return s;
}

DecodedAction decode_action(const Vector& scores, const StateLayout& layout, std::span<const DatasetId> pending,
                            const Scenario& scenario, const PlacementMap& placement) {
  if (scores.size() != layout.action_dim()) throw std::invalid_argument("action size mismatch");
  const int num_dc = layout.num_datacenters;
  DecodedAction out;
  PlacementMap next = placement;
  std::vector<DatasetId> movable;
  for (DatasetId d : pending) {
    const Dataset& ds = scenario.datasets.at(static_cast<std::size_t>(d));
    if (d >= layout.max_datasets) throw std::invalid_argument("pending dataset outside the action rows");
    DcId pick = 0;
    if (ds.is_private()) {
      pick = *ds.home;
    } else {
      const Eigen::Index row = static_cast<Eigen::Index>(d) * num_dc;
      for (DcId j = 1; j < num_dc; ++j)
        if (scores(row + j) > scores(row + pick)) pick = j;
      movable.push_back(d);
    }
    out.choice.push_back(pick);
    next.place(d, pick);
  }
  out.placement = repair_pending(std::move(next), scenario, movable, &out.relocations);
  return out;
}

TrainResult train(DecisionEnv& env, const TrainConfig& cfg) {
  if (cfg.episodes < 0 || cfg.maxstep < 1 || cfg.batch == 0) throw std::invalid_argument("invalid training config");
  Rng rng(cfg.seed);
  TrainResult result;
  result.layout = env.layout();
  result.params = make_net_params(result.layout.state_dim(), result.layout.action_dim(), cfg.hidden, rng);
  NetParams& params = result.params;
  ReplayBuffer buffer(cfg.buffer);
  const ActionCodec codec{result.layout, cfg.action_temperature};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto min_t_at = [&](int slot) -> double& {
    if (static_cast<std::size_t>(slot) >= result.min_t.size()) result.min_t.resize(static_cast<std::size_t>(slot) + 1, kInf);
    return result.min_t[static_cast<std::size_t>(slot)];
  };
  const double scale = 1.0 / cfg.time_scale;

  // MinT starts from a random-policy pass.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  env.reset();
  while (env.next_decision()) {
    Vector a(result.layout.action_dim());
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = unit(rng);
    const DecisionEnv::Step step = env.try_action(a);
    double& m = min_t_at(env.slot());
    m = std::min(m, step.average * scale);
    env.commit();
  }

  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    const double frac = cfg.episodes > 1 ? static_cast<double>(episode - 1) / (cfg.episodes - 1) : 0.0;
    const double noise = cfg.noise_start + (cfg.noise_end - cfg.noise_start) * frac;
    env.reset();
    double committed_sum = 0;
    int committed = 0;
    while (env.next_decision()) {
      const int slot = env.slot();
      Vector s = env.state();
      double t_prev = env.current_average() * scale;
      double best = kInf;
      double reward_sum = 0;
      for (int j = 1; j <= cfg.maxstep; ++j) {
        Vector a = act_with_noise(params.actor, s, noise, rng);
        if (cfg.mask_actions) a = mask_actions(result.layout, s, std::move(a));
        DecisionEnv::Step step = env.try_action(a);
        const double t_next = step.average * scale;
        double& min_t = min_t_at(slot);
        std::optional<double> ref;
        if (cfg.threshold == ThresholdMode::kRunningAverage && committed > 0) ref = committed_sum / committed;
        const double r = compute_reward(episode, t_prev, t_next, min_t, ref);
        min_t = std::min(min_t, t_next);
        reward_sum += r;
        best = std::min(best, t_next);
        buffer.push({s, std::move(a), r, step.next_state, j == cfg.maxstep});
        ++result.transitions;
        if (buffer.size() >= cfg.batch) {
          const std::vector<const Transition*> batch = buffer.sample(cfg.batch, rng);
          update_networks(batch, params, cfg.lr_actor, cfg.lr_critic, cfg.gamma, cfg.mask_actions ? &codec : nullptr);
          soft_update(params.critic, params.critic_target, cfg.tau);
          soft_update(params.actor, params.actor_target, cfg.tau);
          ++result.updates;
        }
        s = std::move(step.next_state);
        t_prev = t_next;
      }
      env.commit();
      committed_sum += best;
      ++committed;
      result.log.push_back({episode, slot, reward_sum / cfg.maxstep, best / scale, min_t_at(slot) / scale});
    }
  }
  for (double& m : result.min_t)
    if (std::isfinite(m)) m /= scale;
  return result;
}

void write_train_log(std::ostream& out, std::span<const TrainLogRow> rows) {
  out << "episode,slot,reward,T_avg,MinT\n";
  char buf[160];
  for (const TrainLogRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.10g\n", r.episode, r.slot, r.reward, r.t_avg, r.min_t);
    out << buf;
  }
}

namespace {

constexpr const char* kCheckpointMagic = "dplace-checkpoint";

void write_values(std::ostream& out, const double* data, Eigen::Index n) {
  char buf[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data[i]);
    out << (i == 0 ? "" : " ") << buf;
  }
  out << '\n';
}

void write_net(std::ostream& out, const char* name, const Mlp& net) {
  out << "net " << name << ' ' << net.sizes().size();
  for (int s : net.sizes()) out << ' ' << s;
  out << (net.output() == Mlp::Output::kTanh ? " tanh" : " linear") << '\n';
  for (std::size_t l = 0; l < net.layers(); ++l) {
    out << "weight " << net.weight(l).rows() << ' ' << net.weight(l).cols() << '\n';
    write_values(out, net.weight(l).data(), net.weight(l).size());
    out << "bias " << net.bias(l).size() << '\n';
    write_values(out, net.bias(l).data(), net.bias(l).size());
  }
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw std::runtime_error("checkpoint: expected '" + word + "', got '" + got + "'");
}

template <class T>
T read(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw std::runtime_error(std::string("checkpoint: cannot read ") + what);
  return v;
}

Mlp read_net(std::istream& in, const char* name) {
  expect(in, "net");
  expect(in, name);
  const auto count = read<std::size_t>(in, "layer count");
  if (count < 2 || count > 64) throw std::runtime_error("checkpoint: bad layer count");
  std::vector<int> sizes(count);
  for (int& s : sizes) s = read<int>(in, "layer size");
  const auto kind = read<std::string>(in, "output kind");
  if (kind != "tanh" && kind != "linear") throw std::runtime_error("checkpoint: unknown output kind '" + kind + "'");
  Mlp net(sizes, kind == "tanh" ? Mlp::Output::kTanh : Mlp::Output::kLinear);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    expect(in, "weight");
    if (read<Eigen::Index>(in, "rows") != net.weight(l).rows() || read<Eigen::Index>(in, "cols") != net.weight(l).cols())
      throw std::runtime_error("checkpoint: weight shape disagrees with the layer sizes");
    for (Eigen::Index i = 0; i < net.weight(l).size(); ++i) net.weight(l).data()[i] = read<double>(in, "weight value");
    expect(in, "bias");
    if (read<Eigen::Index>(in, "size") != net.bias(l).size())
      throw std::runtime_error("checkpoint: bias shape disagrees with the layer sizes");
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)(i) = read<double>(in, "bias value");
  }
  return net;
}

}  // namespace

void save_checkpoint(std::ostream& out, const NetParams& params, const StateLayout& layout) {
  out << kCheckpointMagic << " 1\n";
  out << "layout " << layout.num_datacenters << ' ' << layout.max_datasets << '\n';
  write_net(out, "actor", params.actor);
  write_net(out, "critic", params.critic);
  write_net(out, "actor_target", params.actor_target);
  write_net(out, "critic_target", params.critic_target);
}

void save_checkpoint(const std::filesystem::path& path, const NetParams& params, const StateLayout& layout) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  save_checkpoint(out, params, layout);
}

NetParams load_checkpoint(std::istream& in, StateLayout* layout) {
  expect(in, kCheckpointMagic);
  if (read<int>(in, "version") != 1) throw std::runtime_error("checkpoint: unsupported version");
  expect(in, "layout");
  StateLayout l;
  l.num_datacenters = read<int>(in, "datacenter count");
  l.max_datasets = read<int>(in, "dataset slots");
  NetParams p;
  p.actor = read_net(in, "actor");
  p.critic = read_net(in, "critic");
  p.actor_target = read_net(in, "actor_target");
  p.critic_target = read_net(in, "critic_target");
  if (p.actor.inputs() != l.state_dim() || p.actor.outputs() != l.action_dim() ||
      p.critic.inputs() != l.state_dim() + l.action_dim())
    throw std::runtime_error("checkpoint: network shapes disagree with the layout");
  if (layout != nullptr) *layout = l;
  return p;
}

NetParams load_checkpoint(const std::filesystem::path& path, StateLayout* layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return load_checkpoint(in, layout);
}

}  // namespace dplace
