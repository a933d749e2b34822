#include "fer/folds.hpp"

#include "fer/common.hpp"

#include <algorithm>
#include <map>

namespace fer {

std::vector<std::size_t> stratified_assignment(const std::vector<int>& labels, std::size_t k, std::uint64_t seed,
                                               const std::vector<std::optional<std::string>>* groups) {
    if (k < 2) throw InputError("fold count must be at least 2");
    if (groups && groups->size() != labels.size()) throw InputError("group list length differs from labels");

    // Units are samples, or groups of samples sharing an actor.
    std::vector<std::vector<std::size_t>> units;
    if (groups) {
        std::map<std::string, std::size_t> unit_of;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto& g = (*groups)[i];
            if (!g) {
                units.push_back({i});
                continue;
            }
            auto [it, inserted] = unit_of.emplace(*g, units.size());
            if (inserted) units.emplace_back();
            units[it->second].push_back(i);
        }
    } else {
        for (std::size_t i = 0; i < labels.size(); ++i) units.push_back({i});
    }
    if (k > units.size()) {
        throw InputError("fold count " + std::to_string(k) + " exceeds the number of " +
                         (groups ? "actor groups (" : "samples (") + std::to_string(units.size()) + ")");
    }

    std::map<int, std::vector<std::size_t>> units_by_label;
    for (std::size_t u = 0; u < units.size(); ++u) {
        std::map<int, std::size_t> votes;
        for (std::size_t i : units[u]) ++votes[labels[i]];
        int best = votes.begin()->first;
        for (const auto& [label, count] : votes) {
            if (count > votes[best]) best = label;
        }
        units_by_label[best].push_back(u);
    }

    Rng rng(seed);
    std::vector<std::size_t> assignment(labels.size(), 0);
    std::size_t next = 0;
    for (auto& [label, us] : units_by_label) {
        rng.shuffle(us.begin(), us.end());
        for (std::size_t u : us) {
            for (std::size_t i : units[u]) assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    return assignment;
}

void split_fold(const std::vector<std::size_t>& assignment, std::size_t fold, std::vector<std::size_t>& train,
                std::vector<std::size_t>& test) {
    train.clear();
    test.clear();
    for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == fold ? test : train).push_back(i);
}

}  // namespace fer
