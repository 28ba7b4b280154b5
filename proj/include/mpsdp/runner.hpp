#pragma once

#include <optional>
#include <ostream>

#include "mpsdp/config.hpp"
#include "mpsdp/io.hpp"

namespace mpsdp {

struct RunOutput {
  json result;               ///< result document, digest included
  std::optional<json> mps;   ///< the produced state when output.emit_mps is set
};

inline constexpr const char* kVacuousWarning = "certified \xCE\xB5 exceeds 1: bounds vacuous";

/// Runs the configured mode. Errors propagate as mpsdp exceptions; the
/// command-line driver maps them to exit codes.
RunOutput execute(const RunConfig& cfg, std::ostream* log = nullptr);

/// Exit code for an exception escaping execute: 2 for configuration and
/// input errors, 3 for size guards, 4 for numerical failures.
int exit_code_for(const std::exception& e);

}  // namespace mpsdp
