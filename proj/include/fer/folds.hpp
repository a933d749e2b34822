#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fer {

/// Stratified fold assignment: each class is shuffled with the seeded RNG
/// and dealt round-robin, the deal position carrying over from one class to
/// the next so fold sizes stay balanced. With `groups`, whole groups are
/// dealt instead of samples, stratified by each group's majority label
/// (ties to the lowest label). Returns the fold index of every sample.
std::vector<std::size_t> stratified_assignment(const std::vector<int>& labels, std::size_t k, std::uint64_t seed,
                                               const std::vector<std::optional<std::string>>* groups = nullptr);

/// Indices with assignment == fold (test) and != fold (train), ascending.
void split_fold(const std::vector<std::size_t>& assignment, std::size_t fold, std::vector<std::size_t>& train,
                std::vector<std::size_t>& test);

}  // namespace fer
