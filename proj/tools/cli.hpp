#pragma once

#include <cstdint>
#include <iosfwd>

#include "cpd/signal.hpp"

namespace cpd::cli {

/// Entry point of the `cpd` command: detect, generate, evaluate, bench.
/// Returns the process exit code: 0 success, 1 data/runtime error, 2 usage
/// error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Synthetic workload used by `cpd bench` for one size and trial.
GeneratorSpec bench_spec(Index n_samples, std::uint64_t seed, Index trial);

} // namespace cpd::cli
