#pragma once

namespace anntune::cli {

/// Entry point of the `anntune` tool. Returns the process exit code:
/// 0 success, 2 bad arguments, 3 I/O failure, 4 malformed input file,
/// 5 pipeline stage failure, 1 anything else. Errors go to stderr as one
/// JSON object.
int run(int argc, char** argv);

}  // namespace anntune::cli
