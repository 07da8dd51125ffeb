#include "adhrl/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "adhrl/errors.hpp"
#include "adhrl/ndmath.hpp"

namespace adhrl {

Mode mode_from_string(const std::string& name) {
  if (name == "adinfohrl") return Mode::AdInfoHrl;
  if (name == "infohrl") return Mode::InfoHrl;
  if (name == "td3") return Mode::Td3;
  throw ConfigError("mode must be one of adinfohrl, infohrl, td3 (got '" + name + "')");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::AdInfoHrl: return "adinfohrl";
    case Mode::InfoHrl: return "infohrl";
    case Mode::Td3: return "td3";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const IoError&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (...) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key + ": empty list element");
    out.push_back(static_cast<int>(to_int(key, item)));
  }
  if (out.empty()) throw ConfigError(key + ": list must not be empty");
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::set_key(const std::string& key, const std::string& value) {
  // One handler per known key; anything else is rejected by name.
  static const int marker = 0;
  (void)marker;
  if (key == "env_name") env_name = value;
  else if (key == "mode") mode = mode_from_string(value);
  else if (key == "option_count") option_count = static_cast<int>(to_int(key, value));
  else if (key == "option_hold") option_hold = static_cast<int>(to_int(key, value));
  else if (key == "gamma") gamma = to_double(key, value);
  else if (key == "tau") tau = to_double(key, value);
  else if (key == "actor_lr") actor_lr = to_double(key, value);
  else if (key == "critic_lr") critic_lr = to_double(key, value);
  else if (key == "option_lr") option_lr = to_double(key, value);
  else if (key == "critic_batch") critic_batch = static_cast<int>(to_int(key, value));
  else if (key == "actor_batch_total") actor_batch_total = static_cast<int>(to_int(key, value));
  else if (key == "option_batch") option_batch = static_cast<int>(to_int(key, value));
  else if (key == "on_policy_capacity") on_policy_capacity = static_cast<int>(to_int(key, value));
  else if (key == "option_epochs") option_epochs = static_cast<int>(to_int(key, value));
  else if (key == "lambda_mi") lambda_mi = to_double(key, value);
  else if (key == "vat_noise_variance") vat_noise_variance = to_double(key, value);
  else if (key == "exploration_sigma") exploration_sigma = to_double(key, value);
  else if (key == "target_noise_sigma") target_noise_sigma = to_double(key, value);
  else if (key == "noise_clip") noise_clip = to_double(key, value);
  else if (key == "policy_delay") policy_delay = static_cast<int>(to_int(key, value));
  else if (key == "hidden_sizes") hidden_sizes = to_int_list(key, value);
  else if (key == "replay_capacity") replay_capacity = to_int(key, value);
  else if (key == "warmup_steps") warmup_steps = static_cast<int>(to_int(key, value));
  else if (key == "total_steps") total_steps = to_int(key, value);
  else if (key == "eval_interval") eval_interval = static_cast<int>(to_int(key, value));
  else if (key == "eval_episodes") eval_episodes = static_cast<int>(to_int(key, value));
  else if (key == "seeds") seeds = to_int_list(key, value);
  else if (key == "output_dir") output_dir = value;
  else if (key == "env_max_episode_steps") env.max_episode_steps_override = static_cast<int>(to_int(key, value));
  else if (key == "bandit_mode_center") env.bandit_mode_center = to_double(key, value);
  else if (key == "bandit_mode_width") env.bandit_mode_width = to_double(key, value);
  else if (key == "pointmass_goal_x") env.pointmass_goal_x = to_double(key, value);
  else if (key == "pointmass_goal_y") env.pointmass_goal_y = to_double(key, value);
  else if (key == "pointmass_goal_radius") env.pointmass_goal_radius = to_double(key, value);
  else if (key == "pointmass_step_reward") env.pointmass_step_reward = to_double(key, value);
  else if (key == "pointmass_max_speed") env.pointmass_max_speed = to_double(key, value);
  else if (key == "pointmass_init_range") env.pointmass_init_range = to_double(key, value);
  else throw ConfigError("unknown config key: " + key);
}

void ExperimentConfig::resolve() {
  if (mode == Mode::Td3) option_count = 1;
  if (actor_batch_total <= 0) actor_batch_total = 100 * option_count;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (gamma < 0.0 || gamma >= 1.0) fail("gamma must be in [0,1)");
  if (tau <= 0.0 || tau > 1.0) fail("tau must be in (0,1]");
  if (option_count < 1) fail("option_count must be >= 1");
  if (option_hold < 1) fail("option_hold must be >= 1");
  if (actor_lr <= 0.0) fail("actor_lr must be positive");
  if (critic_lr <= 0.0) fail("critic_lr must be positive");
  if (option_lr <= 0.0) fail("option_lr must be positive");
  if (critic_batch < 1) fail("critic_batch must be >= 1");
  if (actor_batch_total < 1) fail("actor_batch_total must be >= 1");
  if (option_batch < 1) fail("option_batch must be >= 1");
  if (on_policy_capacity < 1) fail("on_policy_capacity must be >= 1");
  if (option_epochs < 0) fail("option_epochs must be >= 0");
  if (lambda_mi < 0.0) fail("lambda_mi must be >= 0");
  if (vat_noise_variance < 0.0) fail("vat_noise_variance must be >= 0");
  if (exploration_sigma < 0.0) fail("exploration_sigma must be >= 0");
  if (target_noise_sigma < 0.0) fail("target_noise_sigma must be >= 0");
  if (noise_clip <= 0.0) fail("noise_clip must be positive");
  if (policy_delay < 1) fail("policy_delay must be >= 1");
  if (hidden_sizes.empty()) fail("hidden_sizes must not be empty");
  for (int h : hidden_sizes)
    if (h < 1) fail("hidden_sizes entries must be >= 1");
  if (replay_capacity < 1) fail("replay_capacity must be >= 1");
  if (warmup_steps < 0) fail("warmup_steps must be >= 0");
  if (total_steps < 1) fail("total_steps must be >= 1");
  if (eval_interval < 1) fail("eval_interval must be >= 1");
  if (eval_episodes < 1) fail("eval_episodes must be >= 1");
  if (seeds.empty()) fail("seeds must not be empty");
}

ExperimentConfig ExperimentConfig::load(
    std::istream& in, const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    cfg.set_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& [k, v] : overrides) cfg.set_key(k, v);
  cfg.resolve();
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return load(in, overrides);
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  auto d = [](double x) { return format_double(x); };
  os << "env_name = " << env_name << '\n';
  os << "mode = " << to_string(mode) << '\n';
  os << "option_count = " << option_count << '\n';
  os << "option_hold = " << option_hold << '\n';
  os << "gamma = " << d(gamma) << '\n';
  os << "tau = " << d(tau) << '\n';
  os << "actor_lr = " << d(actor_lr) << '\n';
  os << "critic_lr = " << d(critic_lr) << '\n';
  os << "option_lr = " << d(option_lr) << '\n';
  os << "critic_batch = " << critic_batch << '\n';
  os << "actor_batch_total = " << actor_batch_total << '\n';
  os << "option_batch = " << option_batch << '\n';
  os << "on_policy_capacity = " << on_policy_capacity << '\n';
  os << "option_epochs = " << option_epochs << '\n';
  os << "lambda_mi = " << d(lambda_mi) << '\n';
  os << "vat_noise_variance = " << d(vat_noise_variance) << '\n';
  os << "exploration_sigma = " << d(exploration_sigma) << '\n';
  os << "target_noise_sigma = " << d(target_noise_sigma) << '\n';
  os << "noise_clip = " << d(noise_clip) << '\n';
  os << "policy_delay = " << policy_delay << '\n';
  os << "hidden_sizes = " << join(hidden_sizes) << '\n';
  os << "replay_capacity = " << replay_capacity << '\n';
  os << "warmup_steps = " << warmup_steps << '\n';
  os << "total_steps = " << total_steps << '\n';
  os << "eval_interval = " << eval_interval << '\n';
  os << "eval_episodes = " << eval_episodes << '\n';
  os << "seeds = " << join(seeds) << '\n';
  os << "output_dir = " << output_dir << '\n';
  os << "env_max_episode_steps = " << env.max_episode_steps_override << '\n';
  os << "bandit_mode_center = " << d(env.bandit_mode_center) << '\n';
  os << "bandit_mode_width = " << d(env.bandit_mode_width) << '\n';
  os << "pointmass_goal_x = " << d(env.pointmass_goal_x) << '\n';
  os << "pointmass_goal_y = " << d(env.pointmass_goal_y) << '\n';
  os << "pointmass_goal_radius = " << d(env.pointmass_goal_radius) << '\n';
  os << "pointmass_step_reward = " << d(env.pointmass_step_reward) << '\n';
  os << "pointmass_max_speed = " << d(env.pointmass_max_speed) << '\n';
  os << "pointmass_init_range = " << d(env.pointmass_init_range) << '\n';
  return os.str();
}

}  // namespace adhrl
