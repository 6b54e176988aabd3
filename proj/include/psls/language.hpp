#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "psls/error.hpp"

namespace psls {

// Mode sequence sigma_0..sigma_T; modes are numbered from 1.
class SwitchingSignal {
public:
    SwitchingSignal() = default;
    explicit SwitchingSignal(std::vector<int> modes) : modes_(std::move(modes)) {
        if (modes_.empty()) throw DimensionError("SwitchingSignal: at least one time step required");
        for (int m : modes_)
            if (m < 1) throw DimensionError("SwitchingSignal: modes are numbered from 1");
    }

    [[nodiscard]] int horizon() const { return static_cast<int>(modes_.size()) - 1; }
    [[nodiscard]] int operator[](int t) const { return modes_.at(t); }
    [[nodiscard]] const std::vector<int>& modes() const { return modes_; }
    [[nodiscard]] int max_mode() const { return *std::max_element(modes_.begin(), modes_.end()); }

    // sigma_{0:t}; empty when t < 0.
    [[nodiscard]] std::vector<int> prefix(int t) const {
        if (t < 0) return {};
        return {modes_.begin(), modes_.begin() + std::min(t, horizon()) + 1};
    }

    [[nodiscard]] std::string to_string() const { return join(modes_); }

    static std::string join(const std::vector<int>& modes) {
        std::string s;
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(modes[i]);
        }
        return s;
    }

    friend auto operator<=>(const SwitchingSignal&, const SwitchingSignal&) = default;

private:
    std::vector<int> modes_;
};

inline bool prefixes_equal(const SwitchingSignal& a, const SwitchingSignal& b, int t) {
    if (t < 0) return true;
    if (t > a.horizon() || t > b.horizon()) throw DimensionError("prefixes_equal: t beyond horizon");
    for (int k = 0; k <= t; ++k)
        if (a[k] != b[k]) return false;
    return true;
}

class SwitchingLanguage {
public:
    SwitchingLanguage() = default;

    explicit SwitchingLanguage(std::vector<SwitchingSignal> signals,
                               std::optional<std::vector<double>> probabilities = std::nullopt)
        : signals_(std::move(signals)), probabilities_(std::move(probabilities)) {
        std::set<SwitchingSignal> seen;
        for (const auto& s : signals_) {
            if (!signals_.empty() && s.horizon() != signals_.front().horizon())
                throw DimensionError("SwitchingLanguage: all signals must share the horizon");
            if (!seen.insert(s).second) throw ConfigError("SwitchingLanguage: duplicate signal " + s.to_string());
        }
        if (probabilities_) {
            if (probabilities_->size() != signals_.size())
                throw ConfigError("SwitchingLanguage: probability count does not match signal count");
            double sum = 0.0;
            for (double p : *probabilities_) {
                if (!(p >= 0.0)) throw ConfigError("SwitchingLanguage: probabilities must be non-negative");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("SwitchingLanguage: probabilities must sum to 1");
        }
    }

    [[nodiscard]] int size() const { return static_cast<int>(signals_.size()); }
    [[nodiscard]] bool empty() const { return signals_.empty(); }
    [[nodiscard]] int horizon() const { return signals_.empty() ? -1 : signals_.front().horizon(); }
    [[nodiscard]] const std::vector<SwitchingSignal>& signals() const { return signals_; }
    [[nodiscard]] const SwitchingSignal& signal(int i) const { return signals_.at(i); }
    [[nodiscard]] bool has_probabilities() const { return probabilities_.has_value(); }
    [[nodiscard]] const std::optional<std::vector<double>>& probabilities() const { return probabilities_; }
    [[nodiscard]] double probability(int i) const {
        if (!probabilities_) throw ConfigError("SwitchingLanguage: probabilities are not set");
        return probabilities_->at(i);
    }
    [[nodiscard]] int max_mode() const {
        int m = 0;
        for (const auto& s : signals_) m = std::max(m, s.max_mode());
        return m;
    }
    [[nodiscard]] std::optional<int> find(const SwitchingSignal& s) const {
        auto it = std::find(signals_.begin(), signals_.end(), s);
        if (it == signals_.end()) return std::nullopt;
        return static_cast<int>(it - signals_.begin());
    }

    friend bool operator==(const SwitchingLanguage&, const SwitchingLanguage&) = default;

private:
    std::vector<SwitchingSignal> signals_;
    std::optional<std::vector<double>> probabilities_;
};

// Nominal (mode 1) until t_fault, faulty (mode 2) from t_fault on, for every
// t_fault in 0..T, listed with t_fault ascending.
inline SwitchingLanguage fault_language(int horizon, bool include_never_faulty = false) {
    if (horizon < 0) throw DimensionError("fault_language: horizon must be >= 0");
    std::vector<SwitchingSignal> out;
    for (int t_fault = 0; t_fault <= horizon; ++t_fault) {
        std::vector<int> modes(horizon + 1);
        for (int t = 0; t <= horizon; ++t) modes[t] = t < t_fault ? 1 : 2;
        out.emplace_back(std::move(modes));
    }
    if (include_never_faulty) out.emplace_back(std::vector<int>(horizon + 1, 1));
    return SwitchingLanguage(std::move(out));
}

inline SwitchingLanguage uniform(const SwitchingLanguage& lang) {
    if (lang.empty()) throw ConfigError("uniform: empty language");
    const auto n = static_cast<std::size_t>(lang.size());
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    // Absorb rounding so the sum is 1 to the last ulp where possible.
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    p.back() += 1.0 - sum;
    return SwitchingLanguage(lang.signals(), std::move(p));
}

// Prefix tree over a language. With observation delay d, the node a signal
// visits at depth t is keyed by sigma_{0:t-d}; the first d levels hold a
// single node keyed by the empty prefix.
class PrefixTree {
public:
    struct Node {
        int depth = 0;
        std::vector<int> key;  // delayed prefix
        int parent = -1;
        std::vector<int> signals;  // indices of signals passing through
    };

    PrefixTree() = default;

    PrefixTree(const SwitchingLanguage& lang, int delay) : delay_(delay), horizon_(lang.horizon()) {
        if (lang.empty()) throw ConfigError("build_prefix_tree: empty language");
        if (delay < 0 || delay > horizon_ + 1) throw DimensionError("build_prefix_tree: delay must lie in 0..T+1");
        const int nsig = lang.size();
        path_.assign(nsig, std::vector<int>(horizon_ + 1, -1));
        for (int t = 0; t <= horizon_; ++t) {
            std::map<std::vector<int>, int> level;
            for (int s = 0; s < nsig; ++s) {
                auto key = lang.signal(s).prefix(t - delay);
                auto [it, inserted] = level.try_emplace(key, static_cast<int>(nodes_.size()));
                if (inserted) {
                    Node node;
                    node.depth = t;
                    node.key = key;
                    node.parent = t > 0 ? path_[s][t - 1] : -1;
                    nodes_.push_back(std::move(node));
                    by_depth_key_.emplace(std::make_pair(t, key), it->second);
                }
                nodes_[it->second].signals.push_back(s);
                path_[s][t] = it->second;
            }
        }
    }

    [[nodiscard]] int delay() const { return delay_; }
    [[nodiscard]] int horizon() const { return horizon_; }
    [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
    [[nodiscard]] const Node& node(int i) const { return nodes_.at(i); }
    [[nodiscard]] int node_of(int signal, int t) const { return path_.at(signal).at(t); }
    [[nodiscard]] int leaf(int signal) const { return path_.at(signal).back(); }
    [[nodiscard]] const std::vector<int>& path(int signal) const { return path_.at(signal); }
    [[nodiscard]] int signal_count() const { return static_cast<int>(path_.size()); }

    [[nodiscard]] std::optional<int> lookup(int depth, const std::vector<int>& key) const {
        auto it = by_depth_key_.find({depth, key});
        if (it == by_depth_key_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] int count_at_depth(int t) const {
        return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [t](const Node& n) { return n.depth == t; }));
    }

    // Sum of (t+1) over all nodes: the number of column blocks owned by slabs.
    [[nodiscard]] int block_columns() const {
        int total = 0;
        for (const auto& n : nodes_) total += n.depth + 1;
        return total;
    }

private:
    int delay_ = 0;
    int horizon_ = -1;
    std::vector<Node> nodes_;
    std::vector<std::vector<int>> path_;
    std::map<std::pair<int, std::vector<int>>, int> by_depth_key_;
};

inline PrefixTree build_prefix_tree(const SwitchingLanguage& lang, int delay = 0) { return PrefixTree(lang, delay); }

// One chain per signal; no slab is shared. Used by the explicit-equality formulation.
inline PrefixTree unshared_tree(const SwitchingLanguage& lang) {
    // A language of singleton prefixes keyed by signal index gives chains.
    std::vector<SwitchingSignal> tagged;
    tagged.reserve(lang.size());
    for (int s = 0; s < lang.size(); ++s) {
        std::vector<int> modes(lang.horizon() + 1, s + 1);
        tagged.emplace_back(std::move(modes));
    }
    return PrefixTree(SwitchingLanguage(std::move(tagged)), 0);
}

}  // namespace psls
