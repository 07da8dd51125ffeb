#include "adhrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adhrl/checkpoint.hpp"
#include "adhrl/errors.hpp"

namespace adhrl {

namespace {

constexpr int kProbeStateCount = 8;

double population_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

double clipped_gaussian_log_density(double eps, double sigma, double clip) {
  if (sigma <= 0.0) return 0.0;
  if (std::abs(eps) >= clip) {
    // Atom at the boundary carries the whole tail: P(|raw| >= clip) per side.
    const double z = clip / sigma;
    return std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
  }
  return -0.5 * (eps / sigma) * (eps / sigma) - std::log(sigma) -
         0.5 * std::log(2.0 * M_PI);
}

Agent::Agent(const ExperimentConfig& cfg, int seed)
    : cfg_(cfg),
      seed_(seed),
      env_(make_env(cfg.env_name, cfg.env)),
      critic_(TwinCritic::init(env_->spec().state_dim, env_->spec().action_dim,
                               cfg.hidden_sizes, cfg.critic_lr,
                               Rng::mix(static_cast<std::uint64_t>(seed), 10))),
      policies_(OptionPolicySet::init(cfg.option_count, env_->spec().state_dim,
                                      env_->spec().action_dim, cfg.hidden_sizes,
                                      env_->spec().action_low, env_->spec().action_high,
                                      cfg.actor_lr,
                                      Rng::mix(static_cast<std::uint64_t>(seed), 11))),
      onet_(OptionNet::init(cfg.option_count, env_->spec().state_dim,
                            env_->spec().action_dim, cfg.hidden_sizes, cfg.option_lr,
                            cfg.lambda_mi, cfg.vat_noise_variance,
                            Rng::mix(static_cast<std::uint64_t>(seed), 12))),
      replay_(static_cast<std::size_t>(cfg.replay_capacity), env_->spec().state_dim,
              env_->spec().action_dim, cfg.option_count),
      on_policy_(static_cast<std::size_t>(cfg.on_policy_capacity),
                 env_->spec().state_dim, env_->spec().action_dim, cfg.option_count),
      rng_env_(static_cast<std::uint64_t>(seed), 1),
      rng_explore_(static_cast<std::uint64_t>(seed), 2),
      rng_batch_(static_cast<std::uint64_t>(seed), 3),
      rng_optnoise_(static_cast<std::uint64_t>(seed), 4) {
  cfg_.validate();
  Rng probe_rng(static_cast<std::uint64_t>(seed), 5);
  for (int i = 0; i < kProbeStateCount; ++i)
    probe_states_.push_back(env_->sample_state(probe_rng));
  interval_usage_.assign(cfg_.option_count, 0);
}

long long Agent::warmup_threshold() const {
  // Updates wait until the largest batch any of them draws is available.
  return std::max<long long>(
      cfg_.warmup_steps, std::max(cfg_.critic_batch, cfg_.actor_batch_total));
}

void Agent::maybe_redraw_option(const VectorXd& state) {
  if (steps_since_option_draw_ == 0) {
    if (policies_.option_count() == 1) {
      current_option_ = 0;
      rng_explore_.uniform();  // keep the stream cadence uniform across modes
    } else {
      current_option_ =
          sample_option(compute_gating(policies_, critic_, state), rng_explore_);
    }
  }
  steps_since_option_draw_ = (steps_since_option_draw_ + 1) % cfg_.option_hold;
}

Agent::ActResult Agent::act_explore(const VectorXd& state) {
  maybe_redraw_option(state);
  ActResult r;
  r.option = current_option_;
  r.action = policies_.action(current_option_, state);
  r.log_density = 0.0;
  const auto& low = policies_.action_low();
  const auto& high = policies_.action_high();
  const double sigma = cfg_.exploration_sigma;
  for (int d = 0; d < r.action.size(); ++d) {
    double eps = 0.0;
    if (sigma > 0.0) {
      eps = std::clamp(rng_explore_.normal(0.0, sigma), -cfg_.noise_clip,
                       cfg_.noise_clip);
    }
    r.log_density += clipped_gaussian_log_density(eps, sigma, cfg_.noise_clip);
    r.action[d] = std::clamp(r.action[d] + eps, low[d], high[d]);
  }
  return r;
}

Agent::ActResult Agent::act_warmup(const VectorXd& state) {
  maybe_redraw_option(state);  // keeps the option-hold pattern intact
  ActResult r;
  r.option = current_option_;
  const auto& low = policies_.action_low();
  const auto& high = policies_.action_high();
  r.action = VectorXd(low.size());
  r.log_density = 0.0;
  for (int d = 0; d < r.action.size(); ++d) {
    r.action[d] = rng_explore_.uniform(low[d], high[d]);
    r.log_density -= std::log(high[d] - low[d]);
  }
  return r;
}

void Agent::train_step() {
  if (need_reset_) {
    current_state_ = env_->reset(rng_env_);
    steps_since_option_draw_ = 0;  // episode start forces an option redraw
    need_reset_ = false;
  }
  step_count_ += 1;
  interval_steps_ += 1;

  const bool warming_up =
      static_cast<long long>(replay_.size()) < warmup_threshold();
  const ActResult act =
      warming_up ? act_warmup(current_state_) : act_explore(current_state_);

  const StepResult res = env_->step(act.action);

  Transition t;
  t.state = current_state_;
  t.action = act.action;
  t.reward = res.reward;
  t.next_state = res.next_state;
  t.terminal = res.terminal;  // horizon truncation bootstraps, so stays false
  t.behavior_log_density = act.log_density;
  t.option_id = act.option;
  replay_.push(t);
  on_policy_.push(t);
  interval_usage_[act.option] += 1;

  current_state_ = res.next_state;
  if (res.terminal || res.truncated) need_reset_ = true;

  // A full aggregation buffer triggers one option-network round, then resets.
  if (on_policy_.is_full() && cfg_.mode != Mode::Td3 && cfg_.option_epochs > 0) {
    const OptionTrainData data = make_train_data(on_policy_, critic_, policies_);
    const OptionTrainResult result =
        train_option_network(onet_, data, cfg_.option_epochs, cfg_.option_batch,
                             cfg_.mode == Mode::InfoHrl, rng_optnoise_);
    last_option_loss_ = result.final_loss;
    last_mi_ = result.final_mi;
    on_policy_.clear();
    option_train_steps_.push_back(step_count_);
  }

  if (static_cast<long long>(replay_.size()) < warmup_threshold()) return;

  const auto batch =
      replay_.sample_batch(static_cast<std::size_t>(cfg_.critic_batch), rng_batch_);
  const auto targets =
      compute_td_target(critic_, batch, policies_, cfg_.gamma,
                        cfg_.target_noise_sigma, cfg_.noise_clip, rng_batch_);
  const auto [loss1, loss2] = critic_update(critic_, batch, targets);
  critic_updates_ += 1;
  interval_loss1_ += loss1;
  interval_loss2_ += loss2;
  interval_updates_ += 1;

  if (critic_updates_ % cfg_.policy_delay != 0) return;

  const auto abatch = replay_.sample_batch(
      static_cast<std::size_t>(cfg_.actor_batch_total), rng_batch_);
  std::vector<VectorXd> states, actions;
  states.reserve(abatch.size());
  actions.reserve(abatch.size());
  for (const auto& tr : abatch) {
    states.push_back(tr.state);
    actions.push_back(tr.action);
  }
  const std::vector<int> assignments =
      policies_.option_count() == 1 ? std::vector<int>(states.size(), 0)
                                    : assign_options(onet_, states, actions);
  policies_.dpg_update(critic_, states, assignments);

  critic_.q1_target = soft_update(critic_.q1_target, critic_.q1, cfg_.tau);
  critic_.q2_target = soft_update(critic_.q2_target, critic_.q2, cfg_.tau);
  policies_.soft_update_targets(cfg_.tau);
}

EvalStats Agent::evaluate(int episodes, Rng& rng) const {
  if (episodes < 1) throw ContractViolation("evaluate: episodes must be >= 1");
  auto env = make_env(cfg_.env_name, cfg_.env);
  EvalStats stats;
  stats.option_usage.assign(policies_.option_count(), 0.0);
  long long total_steps = 0;
  int terminal_episodes = 0;

  for (int ep = 0; ep < episodes; ++ep) {
    VectorXd s = env->reset(rng);
    double ep_return = 0.0;
    int option = 0;
    for (int step = 0;; ++step) {
      if (step % cfg_.option_hold == 0)
        option = greedy_option(policies_, critic_, s);
      const StepResult res = env->step(policies_.action(option, s));
      ep_return += res.reward;
      stats.option_usage[option] += 1.0;
      ++total_steps;
      s = res.next_state;
      if (res.terminal || res.truncated) {
        if (res.terminal) ++terminal_episodes;
        break;
      }
    }
    stats.episode_returns.push_back(ep_return);
  }

  for (double r : stats.episode_returns) stats.return_mean += r;
  stats.return_mean /= static_cast<double>(episodes);
  stats.return_std = population_std(stats.episode_returns, stats.return_mean);
  stats.terminal_fraction =
      static_cast<double>(terminal_episodes) / static_cast<double>(episodes);
  if (total_steps > 0)
    for (auto& u : stats.option_usage) u /= static_cast<double>(total_steps);
  return stats;
}

double Agent::option_action_separation() const {
  const int oc = policies_.option_count();
  if (oc < 2 || probe_states_.empty()) return 0.0;
  double acc = 0.0;
  int pairs = 0;
  for (const VectorXd& s : probe_states_) {
    std::vector<VectorXd> acts;
    for (int o = 0; o < oc; ++o) acts.push_back(policies_.action(o, s));
    for (int i = 0; i < oc; ++i)
      for (int j = i + 1; j < oc; ++j) {
        acc += (acts[i] - acts[j]).norm();
        ++pairs;
      }
  }
  return acc / static_cast<double>(pairs);
}

Agent::IntervalStats Agent::flush_interval_stats() {
  IntervalStats out;
  if (interval_updates_ > 0) {
    out.critic_loss_1 = interval_loss1_ / static_cast<double>(interval_updates_);
    out.critic_loss_2 = interval_loss2_ / static_cast<double>(interval_updates_);
  }
  out.option_usage.assign(cfg_.option_count, 0.0);
  if (interval_steps_ > 0)
    for (int o = 0; o < cfg_.option_count; ++o)
      out.option_usage[o] = static_cast<double>(interval_usage_[o]) /
                            static_cast<double>(interval_steps_);
  interval_loss1_ = interval_loss2_ = 0.0;
  interval_updates_ = 0;
  interval_steps_ = 0;
  interval_usage_.assign(cfg_.option_count, 0);
  return out;
}

std::string TrainReport::to_csv() const {
  std::ostringstream os;
  os << "step,eval_return_mean,eval_return_std,critic_loss_1,critic_loss_2,"
        "option_loss,mi_estimate";
  for (int o = 0; o < option_count; ++o) os << ",usage_" << o;
  os << ",option_action_separation\n";
  for (const auto& r : rows) {
    os << r.step << ',' << format_double(r.eval_return_mean) << ','
       << format_double(r.eval_return_std) << ',' << format_double(r.critic_loss_1)
       << ',' << format_double(r.critic_loss_2) << ',' << format_double(r.option_loss)
       << ',' << format_double(r.mi_estimate);
    for (double u : r.option_usage) os << ',' << format_double(u);
    os << ',' << format_double(r.option_action_separation) << '\n';
  }
  return os.str();
}

std::vector<MetricsRow> parse_metrics_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("metrics csv: missing header");
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  int usage_cols = 0;
  for (const auto& c : cols)
    if (c.rfind("usage_", 0) == 0) ++usage_cols;
  const std::size_t expected = 8 + static_cast<std::size_t>(usage_cols);
  if (cols.size() != expected)
    throw IoError("metrics csv: unexpected header layout");

  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> vals;
    std::string v;
    while (std::getline(ss, v, ',')) vals.push_back(v);
    if (vals.size() != expected)
      throw IoError("metrics csv: row has wrong column count");
    MetricsRow r;
    r.step = std::stoll(vals[0]);
    r.eval_return_mean = parse_double(vals[1]);
    r.eval_return_std = parse_double(vals[2]);
    r.critic_loss_1 = parse_double(vals[3]);
    r.critic_loss_2 = parse_double(vals[4]);
    r.option_loss = parse_double(vals[5]);
    r.mi_estimate = parse_double(vals[6]);
    for (int o = 0; o < usage_cols; ++o)
      r.option_usage.push_back(parse_double(vals[7 + o]));
    r.option_action_separation = parse_double(vals.back());
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

void require_finite_row(const MetricsRow& r) {
  const bool ok = std::isfinite(r.eval_return_mean) && std::isfinite(r.eval_return_std) &&
                  std::isfinite(r.critic_loss_1) && std::isfinite(r.critic_loss_2) &&
                  std::isfinite(r.option_loss) && std::isfinite(r.mi_estimate) &&
                  std::isfinite(r.option_action_separation) &&
                  std::all_of(r.option_usage.begin(), r.option_usage.end(),
                              [](double u) { return std::isfinite(u); });
  if (!ok)
    throw NumericalError("metrics row contains a non-finite value at step " +
                         std::to_string(r.step));
}

}  // namespace

TrainReport run_training(const ExperimentConfig& cfg, int seed,
                         const std::optional<std::string>& out_dir) {
  namespace fs = std::filesystem;
  Agent agent(cfg, seed);

  if (out_dir) {
    fs::create_directories(*out_dir);
    std::ofstream cf(*out_dir + "/config.txt");
    cf << cfg.echo();
  }

  TrainReport report;
  report.option_count = cfg.option_count;
  int interval_idx = 0;

  try {
    for (long long step = 1; step <= cfg.total_steps; ++step) {
      agent.train_step();
      if (step % cfg.eval_interval != 0) continue;

      Rng eval_rng(static_cast<std::uint64_t>(seed),
                   1000 + static_cast<std::uint64_t>(interval_idx));
      ++interval_idx;
      const EvalStats stats = agent.evaluate(cfg.eval_episodes, eval_rng);
      const Agent::IntervalStats interval = agent.flush_interval_stats();

      MetricsRow row;
      row.step = step;
      row.eval_return_mean = stats.return_mean;
      row.eval_return_std = stats.return_std;
      row.critic_loss_1 = interval.critic_loss_1;
      row.critic_loss_2 = interval.critic_loss_2;
      row.option_loss = agent.last_option_loss();
      row.mi_estimate = agent.last_mi_estimate();
      row.option_usage = interval.option_usage;
      row.option_action_separation = agent.option_action_separation();
      require_finite_row(row);
      report.rows.push_back(row);

      if (out_dir) save_checkpoint(agent, *out_dir + "/checkpoint_latest.txt");
    }
  } catch (const NumericalError&) {
    if (out_dir) save_checkpoint(agent, *out_dir + "/checkpoint_abort.txt");
    throw;
  }

  if (out_dir) {
    save_checkpoint(agent, *out_dir + "/checkpoint_final.txt");
    std::ofstream mf(*out_dir + "/metrics.csv");
    mf << report.to_csv();
  }
  return report;
}

}  // namespace adhrl
