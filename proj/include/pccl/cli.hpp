#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace pccl {

/// Entry point of the `pccl` command line; args[0] is the program name.
/// Returns the process exit code.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace pccl
