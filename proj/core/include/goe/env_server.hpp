#pragma once

#include <iosfwd>
#include <string_view>

#include "goe/config.hpp"

namespace goe {

enum class AgentRole { sa, aa };

std::string_view to_string(AgentRole role);
AgentRole agent_role_from_string(std::string_view name);

// Newline-delimited JSON session in which `role` is played by the client and
// the other agent follows its configured policy. Every message carries "v":1.
//
//   server: {"v":1,"type":"obs","slot":n,"episode":e,"state":[...]}
//   client: {"v":1,"type":"act","value":0|1}
//   server: {"v":1,"type":"rew","value":0|1,"done":bool}
//
// SA observations are [importance index, E-ACK]; AA observations are
// [usefulness index, AoI, lateness]. The SA is rewarded with the E-ACK that
// follows its action, the AA with the slot's effectiveness. Agent state is
// reset at episode boundaries. Returns 0 when the client closes the stream or
// the configured episode count is reached, 3 after replying to a malformed
// message with {"v":1,"type":"error","message":...}.
int env_serve(const SimConfig& config, AgentRole role, std::istream& in, std::ostream& out);

}  // namespace goe
