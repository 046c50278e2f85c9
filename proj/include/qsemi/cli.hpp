#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qsemi/fock.hpp"
#include "qsemi/model.hpp"

namespace qsemi::cli {

// Parses and validates a JSON model document (explicit matrix or builtin).
QuadraticModel parse_model_file(const std::string& bytes);

// Parses and validates a JSON state document into a Hermite state.
HermiteState parse_state_file(const std::string& bytes);

// Runs one subcommand. Returns the process exit code: 0 on success,
// 1 when `verify` found a deviation above threshold, 2 on usage errors,
// 3 on input validation and computation precondition failures.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace qsemi::cli
