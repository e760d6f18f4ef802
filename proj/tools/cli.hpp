#pragma once

namespace requant::cli {

/// Entry point of the requant command line tool.
/// Exit status: 0 on success, 2 on usage errors (bad flags, bad bit-width,
/// unreadable manifest), 1 on processing failures. Failures additionally
/// print one machine-readable JSON line to stderr.
int run(int argc, const char* const* argv);

}  // namespace requant::cli
