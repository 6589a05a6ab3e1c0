#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "asyncdoc/yxml.hpp"

namespace asyncdoc::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// Random string over `alphabet`, length in [min, max].
std::string random_string(Rng& rng, std::string_view alphabet, std::size_t min, std::size_t max);

/// Random well-formed trees: names/keys without '=', no reserved bytes,
/// unique keys per element.
yxml::Body random_body(Rng& rng, int depth);

/// Random miniprover-flavoured text: commands, comments, strings, stray
/// periods and whitespace.
std::string random_proof_text(Rng& rng, std::size_t pieces);

std::string fixture_path(const std::string& relative);
std::string read_file(const std::string& path);

} // namespace asyncdoc::testing
