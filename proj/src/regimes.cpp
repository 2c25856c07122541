#include "regimes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "capacity.hpp"

namespace codedq {

SlackProfile slack_profile(const SystemSpec& system, const std::vector<double>& lambda) {
    if (static_cast<int>(lambda.size()) != system.k)
        throw std::invalid_argument("slack_profile: lambda dimension mismatch");
    SlackProfile p;
    p.beta.resize(system.k);
    for (int i = 0; i < system.k; ++i)
        p.beta[i] = system.alpha[i] * system.n - lambda[i];
    p.sort_order.resize(system.k);
    std::iota(p.sort_order.begin(), p.sort_order.end(), 0);
    std::stable_sort(p.sort_order.begin(), p.sort_order.end(),
                     [&](int a, int b) { return p.beta[a] < p.beta[b]; });
    return p;
}

int bottleneck_index(const std::vector<double>& alpha_sorted) {
    const int k = static_cast<int>(alpha_sorted.size());
    if (k < 2) throw std::invalid_argument("bottleneck_index: requires k >= 2");
    int istar = 0;
    double prefix = 0.0;
    for (int j = 1; j <= k; ++j) {
        prefix += alpha_sorted[j - 1];
        if (j * prefix < 1.0) istar = j;
    }
    return istar;
}

namespace {

double kstar_scale(const SystemSpec& system, HeavyKind kind,
                   const RegimeThresholds& t) {
    double base = kind == HeavyKind::inner
                      ? std::sqrt(static_cast<double>(system.n) * system.n_coded)
                      : static_cast<double>(system.n_coded);
    return t.c_kstar * base;
}

}  // namespace

int kstar_index(const SystemSpec& system, const std::vector<double>& lambda,
                HeavyKind kind, const RegimeThresholds& thresholds) {
    SlackProfile p = slack_profile(system, lambda);
    std::vector<double> alpha_sorted(system.k);
    for (int j = 0; j < system.k; ++j)
        alpha_sorted[j] = system.alpha[p.sort_order[j]];
    int istar = bottleneck_index(alpha_sorted);
    double scale = kstar_scale(system, kind, thresholds);

    int kstar = 0;
    for (int j = 1; j <= istar; ++j)
        if (p.beta[p.sort_order[j - 1]] <= scale) kstar = j;
    if (kstar == 0)
        throw std::domain_error("kstar_index: no slack within the regime scale");
    return kstar;
}

RegimeLabel classify_regime(const SystemSpec& system, const std::vector<double>& lambda,
                            const RegimeThresholds& thresholds) {
    if (system.k < 2) throw std::invalid_argument("classify_regime: requires k >= 2");

    RegimeLabel out;
    Membership unc = uncoded_contains(system, lambda);
    Membership cod = coded_contains_waterfill(system, lambda);
    out.diagnostics["uncoded_margin"] = unc.margin;
    out.diagnostics["coded_margin"] = cod.margin;

    SlackProfile p = slack_profile(system, lambda);
    std::vector<double> beta_sorted(system.k);
    std::vector<double> alpha_sorted(system.k);
    for (int j = 0; j < system.k; ++j) {
        beta_sorted[j] = p.beta[p.sort_order[j]];
        alpha_sorted[j] = system.alpha[p.sort_order[j]];
    }
    int istar = bottleneck_index(alpha_sorted);
    out.istar = istar;
    out.diagnostics["beta_1"] = beta_sorted[0];
    if (istar >= 1 && istar < system.k) {
        out.diagnostics["beta_istar"] = beta_sorted[istar - 1];
        out.diagnostics["beta_istar_plus_1"] = beta_sorted[istar];
    }

    const bool u_int = unc.verdict == Membership::Verdict::interior;
    const bool u_ext = unc.verdict == Membership::Verdict::exterior;
    const bool c_int = cod.verdict == Membership::Verdict::interior;
    const bool c_ext = cod.verdict == Membership::Verdict::exterior;

    if (u_ext && c_int) {
        out.label = "uncoded_unstable";
        // Sufficient-condition bookkeeping: the overloaded slack should be
        // small against n_coded while the next slack clears it.
        out.diagnostics["suff_beta_istar_nonpositive"] =
            beta_sorted[istar - 1] <= kEps ? 1.0 : 0.0;
        out.diagnostics["suff_overload_within_n_coded"] =
            std::abs(beta_sorted[istar - 1]) <= system.n_coded ? 1.0 : 0.0;
        if (istar < system.k)
            out.diagnostics["suff_next_slack_clears_n_coded"] =
                beta_sorted[istar] >= system.n_coded ? 1.0 : 0.0;
        return out;
    }
    if (c_ext && u_int) {
        out.label = "coded_unstable";
        return out;
    }
    if (!(u_int && c_int)) {
        out.label = "unclassified";
        return out;
    }

    const double beta1 = beta_sorted[0];
    const double light_cut =
        thresholds.c_light * std::sqrt(static_cast<double>(system.n) * system.n_coded);
    const double inner_cut = thresholds.c_inner * system.n_coded;
    out.diagnostics["light_cutoff"] = light_cut;
    out.diagnostics["inner_cutoff"] = inner_cut;

    if (beta1 >= light_cut) {
        out.label = "light";
        return out;
    }
    if (istar < 1 || istar >= system.k) {
        out.label = "unclassified";
        return out;
    }
    const double beta_next = beta_sorted[istar];
    if (beta1 >= inner_cut && beta_next >= thresholds.c_heavy * beta1) {
        out.label = "inner_heavy";
        out.kstar = kstar_index(system, lambda, HeavyKind::inner, thresholds);
        return out;
    }
    if (beta1 < inner_cut && beta_next >= thresholds.c_heavy * system.n_coded) {
        out.label = "outer_heavy";
        out.kstar = kstar_index(system, lambda, HeavyKind::outer, thresholds);
        return out;
    }
    out.label = "unclassified";
    return out;
}

std::string RegimeLabel::to_json() const {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["istar"] = istar;
    if (kstar)
        j["kstar"] = *kstar;
    else
        j["kstar"] = nullptr;
    nlohmann::ordered_json d;
    for (const auto& [key, value] : diagnostics) d[key] = value;
    j["diagnostics"] = d;
    return j.dump();
}

}  // namespace codedq
