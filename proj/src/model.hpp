#pragma once

#include <string>
#include <vector>

#include "rational.hpp"

namespace codedq {

// Server topology: n servers total, k job types, n_coded coded servers,
// and the remaining n - n_coded systematic servers split across the types
// by the fractions alpha (largest-remainder apportionment).
struct SystemSpec {
    int n = 0;
    int k = 0;
    int n_coded = 0;
    std::vector<double> alpha;       // length k, sums to 1
    std::vector<int> systematic;     // integer per-type server counts s_i

    std::string to_json() const;
    static SystemSpec from_json(const std::string& text);
};

// Class-level recovery set for one job type: either the job's own
// systematic class (num_coded = 0, one task), or num_coded coded servers
// plus one systematic server from each helper type (k tasks).
struct RecoveryPattern {
    int job_type = 0;                // 0-based
    int num_coded = 0;               // 0..k
    std::vector<int> helper_types;   // sorted, size k - num_coded when 1 <= num_coded < k

    int task_count(int k) const { return num_coded == 0 ? 1 : k; }

    bool operator==(const RecoveryPattern& o) const {
        return job_type == o.job_type && num_coded == o.num_coded &&
               helper_types == o.helper_types;
    }
};

// Systematic MDS generator: k identity rows followed by n_coded coded rows,
// exact rational coefficients.
struct GeneratorSpec {
    int k = 0;
    int n_coded = 0;
    std::vector<std::vector<Rational>> rows;  // (k + n_coded) x k
};

// Largest-remainder apportionment of `total` across the fractions `alpha`.
// Ties broken by lower index. Returns integer counts summing to total.
std::vector<int> apportion(int total, const std::vector<double>& alpha);

SystemSpec build_system(int n, int k, int n_coded, const std::vector<double>& alpha);

// All feasible recovery patterns for one job type, canonically ordered:
// own-systematic first, then ascending num_coded, helper sets lexicographic.
std::vector<RecoveryPattern> enumerate_recovery_patterns(const SystemSpec& system,
                                                         int job_type);

// Systematic Vandermonde generator with evaluation points 1..n_coded.
GeneratorSpec make_vandermonde_generator(int k, int n_coded);

// True iff the unit vector of pattern.job_type lies in the span of the rows
// selected by the pattern (coded_rows gives the 0-based coded-row choices;
// must have size pattern.num_coded). Exact rational elimination.
bool verify_pattern_decodable(const GeneratorSpec& generator,
                              const RecoveryPattern& pattern,
                              const std::vector<int>& coded_rows);

// Convenience overload using the first num_coded coded rows.
bool verify_pattern_decodable(const GeneratorSpec& generator,
                              const RecoveryPattern& pattern);

}  // namespace codedq
