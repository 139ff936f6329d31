#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tgp {

// Every random draw derives from one 64-bit seed, split into independent
// named streams so that each subsystem is reproducible on its own.
namespace streams {
inline constexpr std::string_view kSynth = "synth";
inline constexpr std::string_view kNoiseInject = "noise-inject";
inline constexpr std::string_view kInducingInit = "inducing-init";
inline constexpr std::string_view kBatchShuffle = "batch-shuffle";
inline constexpr std::string_view kInit = "init";
}  // namespace streams

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream);
Rng make_rng(std::uint64_t seed, std::string_view stream);

}  // namespace tgp
