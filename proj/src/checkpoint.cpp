#include "adhrl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "adhrl/errors.hpp"

namespace adhrl {

namespace {

constexpr const char* kHeader = "adhrl-checkpoint 1";

void expect_line(std::istream& is, const std::string& want, const char* section) {
  std::string line;
  if (!std::getline(is, line) || line != want)
    throw IoError(std::string("checkpoint section '") + section + "': expected '" +
                  want + "'");
}

template <typename F>
auto in_section(const char* name, F&& f) {
  try {
    return f();
  } catch (const IoError& e) {
    throw IoError(std::string("checkpoint section '") + name + "': " + e.what());
  }
}

void check_same_shape(const DenseNet& got, const DenseNet& want, const char* section) {
  if (got.layer_sizes != want.layer_sizes)
    throw IoError(std::string("checkpoint section '") + section +
                  "': network shape disagrees with the config");
}

}  // namespace

void save_checkpoint_stream(std::ostream& os, const Agent& agent) {
  os << kHeader << '\n';

  os << "section config\n" << agent.cfg_.echo() << "end-section\n";

  os << "section counters\n";
  os << "seed " << agent.seed_ << '\n';
  os << "step_count " << agent.step_count_ << '\n';
  os << "critic_updates " << agent.critic_updates_ << '\n';
  os << "current_option " << agent.current_option_ << '\n';
  os << "steps_since_option_draw " << agent.steps_since_option_draw_ << '\n';
  os << "last_option_loss " << format_double(agent.last_option_loss_) << '\n';
  os << "last_mi " << format_double(agent.last_mi_) << '\n';
  os << "end-section\n";

  os << "section rng\n";
  os << "env " << agent.rng_env_.serialize() << '\n';
  os << "explore " << agent.rng_explore_.serialize() << '\n';
  os << "batch " << agent.rng_batch_.serialize() << '\n';
  os << "optnoise " << agent.rng_optnoise_.serialize() << '\n';
  os << "end-section\n";

  auto net_section = [&os](const char* name, const DenseNet& net) {
    os << "section " << name << '\n';
    save_net(os, net);
    os << "end-section\n";
  };
  auto adam_section = [&os](const char* name, const AdamState& st) {
    os << "section " << name << '\n';
    save_adam(os, st);
    os << "end-section\n";
  };

  net_section("critic-q1", agent.critic_.q1);
  net_section("critic-q2", agent.critic_.q2);
  net_section("critic-q1-target", agent.critic_.q1_target);
  net_section("critic-q2-target", agent.critic_.q2_target);
  adam_section("critic-adam1", agent.critic_.adam1);
  adam_section("critic-adam2", agent.critic_.adam2);

  for (int o = 0; o < agent.policies_.option_count(); ++o) {
    const std::string tag = std::to_string(o);
    net_section(("policy-" + tag).c_str(), agent.policies_.policy(o));
    net_section(("policy-target-" + tag).c_str(), agent.policies_.target(o));
    adam_section(("policy-adam-" + tag).c_str(), agent.policies_.adam(o));
  }

  net_section("option-net", agent.onet_.net());
  adam_section("option-adam", agent.onet_.adam());

  os << "end checkpoint\n";
}

Agent load_checkpoint_stream(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("checkpoint: empty input");
  if (line.rfind("adhrl-checkpoint", 0) != 0)
    throw IoError("checkpoint: bad header");
  if (line != kHeader)
    throw IoError("checkpoint: unsupported format version '" + line + "'");

  // config
  const ExperimentConfig cfg = in_section("config", [&] {
    expect_line(is, "section config", "config");
    std::ostringstream body;
    while (std::getline(is, line)) {
      if (line == "end-section") break;
      body << line << '\n';
    }
    std::istringstream cs(body.str());
    try {
      return ExperimentConfig::load(cs);
    } catch (const ConfigError& e) {
      throw IoError(e.what());
    }
  });

  long long seed = 0, step_count = 0, critic_updates = 0;
  int current_option = 0, steps_since_draw = 0;
  double last_loss = 0.0, last_mi = 0.0;
  in_section("counters", [&] {
    expect_line(is, "section counters", "counters");
    auto read_kv = [&](const char* key) -> std::string {
      std::string l;
      if (!std::getline(is, l)) throw IoError("truncated");
      std::istringstream ss(l);
      std::string k, v;
      ss >> k >> v;
      if (k != key) throw IoError("expected key '" + std::string(key) + "'");
      return v;
    };
    seed = std::stoll(read_kv("seed"));
    step_count = std::stoll(read_kv("step_count"));
    critic_updates = std::stoll(read_kv("critic_updates"));
    current_option = std::stoi(read_kv("current_option"));
    steps_since_draw = std::stoi(read_kv("steps_since_option_draw"));
    last_loss = parse_double(read_kv("last_option_loss"));
    last_mi = parse_double(read_kv("last_mi"));
    expect_line(is, "end-section", "counters");
    return 0;
  });

  // Rebuild from config, then overwrite every learned/stateful piece.
  Agent agent(cfg, static_cast<int>(seed));
  agent.step_count_ = step_count;
  agent.critic_updates_ = critic_updates;
  agent.current_option_ = current_option;
  agent.steps_since_option_draw_ = steps_since_draw;
  agent.last_option_loss_ = last_loss;
  agent.last_mi_ = last_mi;
  agent.need_reset_ = true;  // env state is not part of the bundle

  in_section("rng", [&] {
    expect_line(is, "section rng", "rng");
    auto read_rng = [&](const char* key, Rng& rng) {
      std::string l;
      if (!std::getline(is, l)) throw IoError("truncated");
      const auto sp = l.find(' ');
      if (sp == std::string::npos || l.substr(0, sp) != key)
        throw IoError("expected rng stream '" + std::string(key) + "'");
      rng.restore(l.substr(sp + 1));
    };
    read_rng("env", agent.rng_env_);
    read_rng("explore", agent.rng_explore_);
    read_rng("batch", agent.rng_batch_);
    read_rng("optnoise", agent.rng_optnoise_);
    expect_line(is, "end-section", "rng");
    return 0;
  });

  auto load_net_section = [&](const char* name, DenseNet& into) {
    in_section(name, [&] {
      expect_line(is, std::string("section ") + name, name);
      DenseNet net = load_net(is);
      check_same_shape(net, into, name);
      into = std::move(net);
      expect_line(is, "end-section", name);
      return 0;
    });
  };
  auto load_adam_section = [&](const char* name, AdamState& into,
                               const DenseNet& shape_ref) {
    in_section(name, [&] {
      expect_line(is, std::string("section ") + name, name);
      into = load_adam(is, shape_ref);
      expect_line(is, "end-section", name);
      return 0;
    });
  };

  load_net_section("critic-q1", agent.critic_.q1);
  load_net_section("critic-q2", agent.critic_.q2);
  load_net_section("critic-q1-target", agent.critic_.q1_target);
  load_net_section("critic-q2-target", agent.critic_.q2_target);
  load_adam_section("critic-adam1", agent.critic_.adam1, agent.critic_.q1);
  load_adam_section("critic-adam2", agent.critic_.adam2, agent.critic_.q2);

  for (int o = 0; o < agent.policies_.option_count(); ++o) {
    const std::string tag = std::to_string(o);
    load_net_section(("policy-" + tag).c_str(), agent.policies_.policy(o));
    load_net_section(("policy-target-" + tag).c_str(), agent.policies_.target(o));
    load_adam_section(("policy-adam-" + tag).c_str(), agent.policies_.adam(o),
                      agent.policies_.policy(o));
  }

  load_net_section("option-net", agent.onet_.net());
  load_adam_section("option-adam", agent.onet_.adam(), agent.onet_.net());

  expect_line(is, "end checkpoint", "footer");
  return agent;
}

void save_checkpoint(const Agent& agent, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  save_checkpoint_stream(os, agent);
}

Agent load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read checkpoint: " + path);
  return load_checkpoint_stream(is);
}

}  // namespace adhrl
