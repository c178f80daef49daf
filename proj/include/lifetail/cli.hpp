#pragma once

namespace lifetail {

/// Entry point of the command line tool. Returns the process exit code:
/// 0 on success, 2 for validation and usage errors, 3 for numerical
/// failures.
int run(int argc, const char* const* argv);

}  // namespace lifetail
