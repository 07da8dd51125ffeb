#pragma once

#include <iosfwd>
#include <string>

#include "adhrl/agent.hpp"

namespace adhrl {

// Versioned structured-text bundle: config echo, step counters, the four rng
// stream states, critic (twins, targets, Adam), option policies (online,
// target, Adam) and the option network. save -> load -> save is byte
// identical. A corrupt file fails naming its section and yields no agent.
void save_checkpoint_stream(std::ostream& os, const Agent& agent);
Agent load_checkpoint_stream(std::istream& is);

void save_checkpoint(const Agent& agent, const std::string& path);
Agent load_checkpoint(const std::string& path);

}  // namespace adhrl
