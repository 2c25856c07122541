#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace codedq {

std::vector<int> apportion(int total, const std::vector<double>& alpha) {
    const int k = static_cast<int>(alpha.size());
    std::vector<int> counts(k);
    std::vector<std::pair<double, int>> remainders(k);
    int assigned = 0;
    for (int i = 0; i < k; ++i) {
        double raw = alpha[i] * total;
        counts[i] = static_cast<int>(std::floor(raw + 1e-12));
        remainders[i] = {raw - counts[i], i};
        assigned += counts[i];
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int j = 0; j < total - assigned; ++j) counts[remainders[j].second] += 1;
    return counts;
}

SystemSpec build_system(int n, int k, int n_coded, const std::vector<double>& alpha) {
    if (n <= 0 || k <= 0) throw std::invalid_argument("build_system: n and k must be positive");
    if (n_coded < 0 || n_coded >= n)
        throw std::invalid_argument("build_system: require 0 <= n_coded < n");
    if (static_cast<int>(alpha.size()) != k)
        throw std::invalid_argument("build_system: alpha size must equal k");
    double sum = 0.0;
    for (double a : alpha) {
        if (a <= 0.0) throw std::invalid_argument("build_system: alpha entries must be positive");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("build_system: alpha must sum to 1");

    SystemSpec spec;
    spec.n = n;
    spec.k = k;
    spec.n_coded = n_coded;
    spec.alpha = alpha;
    for (double& a : spec.alpha) a /= sum;  // normalize residual 1e-12 drift
    spec.systematic = apportion(n - n_coded, spec.alpha);
    for (int s : spec.systematic)
        if (s <= 0) throw std::invalid_argument("build_system: a type rounds to zero servers");
    return spec;
}

std::string SystemSpec::to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["k"] = k;
    j["n_coded"] = n_coded;
    j["alpha"] = alpha;
    j["systematic"] = systematic;
    return j.dump();
}

SystemSpec SystemSpec::from_json(const std::string& text) {
    try {
        auto j = nlohmann::json::parse(text);
        return build_system(j.at("n").get<int>(), j.at("k").get<int>(),
                            j.at("n_coded").get<int>(),
                            j.at("alpha").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("system JSON: ") + e.what());
    }
}

namespace {

void emit_helper_subsets(const std::vector<int>& others, int count,
                         std::vector<int>& current, std::size_t start,
                         std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == count) {
        out.push_back(current);
        return;
    }
    for (std::size_t i = start; i < others.size(); ++i) {
        current.push_back(others[i]);
        emit_helper_subsets(others, count, current, i + 1, out);
        current.pop_back();
    }
}

}  // namespace

std::vector<RecoveryPattern> enumerate_recovery_patterns(const SystemSpec& system,
                                                         int job_type) {
    if (job_type < 0 || job_type >= system.k)
        throw std::invalid_argument("enumerate_recovery_patterns: bad job_type");

    std::vector<RecoveryPattern> patterns;
    patterns.push_back({job_type, 0, {}});

    std::vector<int> others;
    for (int j = 0; j < system.k; ++j)
        if (j != job_type) others.push_back(j);

    for (int num_coded = 1; num_coded <= system.k; ++num_coded) {
        if (system.n_coded < num_coded) continue;
        std::vector<std::vector<int>> subsets;
        std::vector<int> current;
        emit_helper_subsets(others, system.k - num_coded, current, 0, subsets);
        for (auto& helpers : subsets) {
            bool feasible = true;
            for (int h : helpers)
                if (system.systematic[h] < 1) feasible = false;
            if (feasible) patterns.push_back({job_type, num_coded, helpers});
        }
    }
    return patterns;
}

GeneratorSpec make_vandermonde_generator(int k, int n_coded) {
    GeneratorSpec gen;
    gen.k = k;
    gen.n_coded = n_coded;
    gen.rows.assign(k + n_coded, std::vector<Rational>(k));
    for (int i = 0; i < k; ++i) gen.rows[i][i] = Rational(1);
    for (int c = 0; c < n_coded; ++c) {
        std::int64_t point = c + 1;
        std::int64_t value = 1;
        for (int j = 0; j < k; ++j) {
            gen.rows[k + c][j] = Rational(value);
            value *= point;
        }
    }
    return gen;
}

bool verify_pattern_decodable(const GeneratorSpec& generator,
                              const RecoveryPattern& pattern,
                              const std::vector<int>& coded_rows) {
    if (static_cast<int>(coded_rows.size()) != pattern.num_coded)
        throw std::invalid_argument("verify_pattern_decodable: coded_rows size mismatch");
    if (pattern.job_type < 0 || pattern.job_type >= generator.k)
        throw std::invalid_argument("verify_pattern_decodable: job_type out of range");

    std::vector<std::vector<Rational>> rows;
    if (pattern.num_coded == 0) {
        rows.push_back(generator.rows[pattern.job_type]);
    } else {
        for (int c : coded_rows) {
            if (c < 0 || c >= generator.n_coded)
                throw std::invalid_argument("verify_pattern_decodable: coded row out of range");
            rows.push_back(generator.rows[generator.k + c]);
        }
        for (int h : pattern.helper_types) {
            if (h < 0 || h >= generator.k)
                throw std::invalid_argument("verify_pattern_decodable: helper out of range");
            rows.push_back(generator.rows[h]);
        }
    }

    // Row-reduce [rows | is e_target in span] by augmenting the target and
    // checking the residual: e_target is in the span iff eliminating against
    // all rows leaves zero.
    const int k = generator.k;
    std::vector<Rational> target(k);
    target[pattern.job_type] = Rational(1);

    std::size_t rank_row = 0;
    for (int col = 0; col < k && rank_row < rows.size(); ++col) {
        std::size_t pivot = rank_row;
        while (pivot < rows.size() && rows[pivot][col].is_zero()) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pivot], rows[rank_row]);
        Rational inv = Rational(1) / rows[rank_row][col];
        for (int j = 0; j < k; ++j) rows[rank_row][j] = rows[rank_row][j] * inv;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank_row || rows[r][col].is_zero()) continue;
            Rational f = rows[r][col];
            for (int j = 0; j < k; ++j)
                rows[r][j] = rows[r][j] - f * rows[rank_row][j];
        }
        if (!target[col].is_zero()) {
            Rational f = target[col];
            for (int j = 0; j < k; ++j)
                target[j] = target[j] - f * rows[rank_row][j];
        }
        ++rank_row;
    }
    for (int j = 0; j < k; ++j)
        if (!target[j].is_zero()) return false;
    return true;
}

bool verify_pattern_decodable(const GeneratorSpec& generator,
                              const RecoveryPattern& pattern) {
    std::vector<int> coded_rows(pattern.num_coded);
    std::iota(coded_rows.begin(), coded_rows.end(), 0);
    return verify_pattern_decodable(generator, pattern, coded_rows);
}

}  // namespace codedq
