#pragma once

// Seeded synthetic English for the long-stream tests. Sentences come from a
// small template grammar over dictionary words, so the stream is stationary
// and every word has a pronunciation.

#include <cstdint>
#include <string>

namespace ptm::testing {

/// Whitespace-separated text of exactly `n_tokens` tokens under the project
/// tokenizer (punctuation is pre-spaced so every token is already split).
std::string generate_corpus(std::uint64_t seed, std::size_t n_tokens);

} // namespace ptm::testing
