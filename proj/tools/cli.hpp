#pragma once

namespace retexkit::cli {

// Entry point of the `retexkit` command. Exit codes: 0 success, 2 I/O, 3 domain, 4 shape/config.
int run(int argc, const char* const* argv);

}  // namespace retexkit::cli
