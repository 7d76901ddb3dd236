// Penalized changepoint detection on one-dimensional series. Three normal
// likelihood costs (change in mean, in variance, or in both), an exact O(n^2)
// optimal-partitioning dynamic program, the PELT-pruned variant of the same
// recursion, and an at-most-one-change scan. All solvers share one candidate
// comparison (penalized cost, then fewer changepoints, then lexicographically
// earliest indices) so results are reproducible and mutually consistent.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tipping/common.hpp"
#include "tipping/tension.hpp"

namespace tipping {

enum class cost_model { mean_normal, variance_normal, meanvar_normal };

inline const char* cost_model_name(cost_model m) {
    switch (m) {
        case cost_model::mean_normal: return "mean";
        case cost_model::variance_normal: return "variance";
        case cost_model::meanvar_normal: return "meanvar";
    }
    return "?";
}

inline int params_per_segment(cost_model m) {
    return m == cost_model::meanvar_normal ? 2 : 1;
}

// Penalty charged per changepoint. BIC resolves to
// (params_per_segment + 1) * log n, the +1 paying for the location itself.
struct penalty {
    enum class kind { bic, manual };
    kind scheme = kind::bic;
    double value = 0;

    static penalty bic() { return {}; }
    static penalty manual(double beta) {
        if (!(beta > 0))
            throw domain_error(errc::bad_config, "manual penalty must be > 0");
        return {kind::manual, beta};
    }

    double resolve(cost_model m, size_t n) const {
        if (scheme == kind::manual) return value;
        return (params_per_segment(m) + 1) * std::log(static_cast<double>(n));
    }
};

struct segmentation {
    // Last index of each segment except the final one, strictly increasing.
    std::vector<size_t> changepoint_indices;
    std::vector<double> segment_means;
    std::vector<double> segment_variances;  // MLE variance about the segment mean
    double total_cost = 0;                  // sum of segment costs + beta * #changepoints

    size_t num_segments() const { return segment_means.size(); }
};

enum class shift_direction { high_to_low, low_to_high };

struct changepoint {
    size_t index = 0;  // first index of the new segment
    double time_s = 0;
    channel chan = channel::strain;
    double mean_before = 0;
    double mean_after = 0;
    shift_direction direction = shift_direction::high_to_low;
};

inline constexpr double variance_floor = 1e-8;
inline constexpr double log_two_pi = 1.8378770664093453;

namespace detail {

// Per-segment cost = -2 * maximized normal log-likelihood, via prefix sums.
//  - mean_normal:     SSE about the segment mean, normalized by the MLE
//                     variance of the whole series (fixed variance, free mean)
//  - variance_normal: m (log 2pi + log var + 1), var about the global mean
//  - meanvar_normal:  m (log 2pi + log var + 1), var about the segment mean
// Variances are floored so constant segments stay finite.
class cost_fn {
public:
    cost_fn(std::span<const double> y, cost_model model) : model_(model), n_(y.size()) {
        pre_sum_.resize(n_ + 1, 0.0);
        pre_sumsq_.resize(n_ + 1, 0.0);
        for (size_t i = 0; i < n_; ++i) {
            pre_sum_[i + 1] = pre_sum_[i] + y[i];
            pre_sumsq_[i + 1] = pre_sumsq_[i] + y[i] * y[i];
        }
        global_mean_ = n_ > 0 ? pre_sum_[n_] / static_cast<double>(n_) : 0.0;
        double ss = n_ > 0 ? pre_sumsq_[n_] - static_cast<double>(n_) * global_mean_ * global_mean_
                           : 0.0;
        global_var_ = std::max(n_ > 0 ? ss / static_cast<double>(n_) : 0.0, variance_floor);
    }

    // Cost of the inclusive segment [i, j].
    double operator()(size_t i, size_t j) const {
        double m = static_cast<double>(j - i + 1);
        double sum = pre_sum_[j + 1] - pre_sum_[i];
        double sumsq = pre_sumsq_[j + 1] - pre_sumsq_[i];
        switch (model_) {
            case cost_model::mean_normal: {
                double sse = std::max(sumsq - sum * sum / m, 0.0);
                return sse / global_var_;
            }
            case cost_model::variance_normal: {
                double dev = std::max(
                    sumsq - 2.0 * global_mean_ * sum + m * global_mean_ * global_mean_, 0.0);
                double var = std::max(dev / m, variance_floor);
                return m * (log_two_pi + std::log(var) + 1.0);
            }
            case cost_model::meanvar_normal: {
                double sse = std::max(sumsq - sum * sum / m, 0.0);
                double var = std::max(sse / m, variance_floor);
                return m * (log_two_pi + std::log(var) + 1.0);
            }
        }
        return 0.0;
    }

    double mean(size_t i, size_t j) const {
        return (pre_sum_[j + 1] - pre_sum_[i]) / static_cast<double>(j - i + 1);
    }

    double mle_variance(size_t i, size_t j) const {
        double m = static_cast<double>(j - i + 1);
        double sum = pre_sum_[j + 1] - pre_sum_[i];
        double sumsq = pre_sumsq_[j + 1] - pre_sumsq_[i];
        return std::max(sumsq - sum * sum / m, 0.0) / m;
    }

private:
    cost_model model_;
    size_t n_;
    std::vector<double> pre_sum_, pre_sumsq_;
    double global_mean_ = 0, global_var_ = variance_floor;
};

// Dynamic-programming state for a prefix of length t: raw cost sum over
// segments, segment count, and the previous segment start for backtracking.
struct dp_state {
    double raw = std::numeric_limits<double>::infinity();
    int k = 0;
    long prev = -1;
};

// Segment-start boundaries (ascending, excluding 0) of the stored prefix
// solution ending at length t.
inline std::vector<size_t> trace_boundaries(const std::vector<dp_state>& st, size_t t) {
    std::vector<size_t> out;
    long s = st[t].prev;
    while (s > 0) {
        out.push_back(static_cast<size_t>(s));
        s = st[static_cast<size_t>(s)].prev;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

// True when the candidate (extend the prefix of length s with one segment)
// beats the incumbent under (penalized cost, fewer segments, lex indices).
// Lists are compared only on exact cost-and-count ties.
inline bool candidate_better(const std::vector<dp_state>& st, double cand_pen, int cand_k,
                             size_t cand_s, double best_pen, int best_k, long best_s) {
    if (cand_pen < best_pen) return true;
    if (cand_pen > best_pen) return false;
    if (cand_k != best_k) return cand_k < best_k;
    auto a = trace_boundaries(st, cand_s);
    a.push_back(cand_s);
    auto b = trace_boundaries(st, static_cast<size_t>(best_s));
    b.push_back(static_cast<size_t>(best_s));
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline segmentation build_result(const std::vector<dp_state>& st, size_t n, const cost_fn& cost,
                                 double beta) {
    segmentation seg;
    auto bounds = trace_boundaries(st, n);
    std::vector<size_t> starts{0};
    starts.insert(starts.end(), bounds.begin(), bounds.end());
    for (size_t p = 0; p < starts.size(); ++p) {
        size_t lo = starts[p];
        size_t hi = (p + 1 < starts.size() ? starts[p + 1] : n) - 1;
        seg.segment_means.push_back(cost.mean(lo, hi));
        seg.segment_variances.push_back(cost.mle_variance(lo, hi));
        if (p > 0) seg.changepoint_indices.push_back(lo - 1);
    }
    seg.total_cost = st[n].raw + beta * static_cast<double>(st[n].k - 1);
    return seg;
}

}  // namespace detail

// Public single-segment cost with the precondition checks of the operation
// contract. The solvers below use the unchecked internal evaluator.
inline double segment_cost(std::span<const double> series, size_t i, size_t j, cost_model model,
                           size_t min_seg_len = 2) {
    if (i > j || j >= series.size())
        throw domain_error(errc::bad_config, "segment bounds out of range");
    if (j - i + 1 < min_seg_len)
        throw domain_error(errc::segment_too_short,
                           "segment shorter than min_seg_len=" + std::to_string(min_seg_len));
    return detail::cost_fn(series, model)(i, j);
}

// Exact optimal partitioning: minimizes sum of segment costs plus
// beta * (number of changepoints) by dynamic programming over prefix lengths.
inline segmentation optimal_partition(std::span<const double> series, cost_model model,
                                      penalty pen, size_t min_seg_len = 2) {
    const size_t n = series.size();
    const size_t L = std::max<size_t>(min_seg_len, 1);
    if (n < L)
        throw domain_error(errc::series_too_short,
                           "series of length " + std::to_string(n) + " < min_seg_len");
    const detail::cost_fn cost(series, model);
    const double beta = pen.resolve(model, n);

    std::vector<detail::dp_state> st(n + 1);
    st[0] = {0.0, 0, -1};
    for (size_t t = L; t <= n; ++t) {
        double best_pen = std::numeric_limits<double>::infinity();
        int best_k = 0;
        long best_s = -1;
        auto consider = [&](size_t s) {
            double cand_raw = st[s].raw + cost(s, t - 1);
            int cand_k = st[s].k + 1;
            double cand_pen = cand_raw + beta * static_cast<double>(st[s].k);
            if (best_s < 0 ||
                detail::candidate_better(st, cand_pen, cand_k, s, best_pen, best_k, best_s)) {
                best_pen = cand_pen;
                best_k = cand_k;
                best_s = static_cast<long>(s);
                st[t].raw = cand_raw;
            }
        };
        consider(0);
        for (size_t s = L; s + L <= t; ++s) consider(s);
        st[t].k = best_k;
        st[t].prev = best_s;
    }
    return detail::build_result(st, n, cost, beta);
}

// PELT: the same recursion with provably-suboptimal candidates pruned
// (pruning constant 0, strict inequality so exact ties are never dropped).
// Returns the same segmentation as optimal_partition.
inline segmentation pelt(std::span<const double> series, cost_model model, penalty pen,
                         size_t min_seg_len = 2) {
    const size_t n = series.size();
    const size_t L = std::max<size_t>(min_seg_len, 1);
    if (n < L)
        throw domain_error(errc::series_too_short,
                           "series of length " + std::to_string(n) + " < min_seg_len");
    const detail::cost_fn cost(series, model);
    const double beta = pen.resolve(model, n);

    std::vector<detail::dp_state> st(n + 1);
    st[0] = {0.0, 0, -1};
    std::vector<size_t> cands{0};
    std::vector<double> cand_pens;
    for (size_t t = L; t <= n; ++t) {
        double best_pen = std::numeric_limits<double>::infinity();
        int best_k = 0;
        long best_s = -1;
        cand_pens.assign(cands.size(), std::numeric_limits<double>::infinity());
        for (size_t ci = 0; ci < cands.size(); ++ci) {
            size_t s = cands[ci];
            if (s + L > t) continue;
            if (s != 0 && s < L) continue;
            double cand_raw = st[s].raw + cost(s, t - 1);
            int cand_k = st[s].k + 1;
            double cand_pen = cand_raw + beta * static_cast<double>(st[s].k);
            cand_pens[ci] = cand_pen;
            if (best_s < 0 ||
                detail::candidate_better(st, cand_pen, cand_k, s, best_pen, best_k, best_s)) {
                best_pen = cand_pen;
                best_k = cand_k;
                best_s = static_cast<long>(s);
                st[t].raw = cand_raw;
            }
        }
        st[t].k = best_k;
        st[t].prev = best_s;
        // Keep s unless extending it to t is already strictly worse than the
        // best at t; such an s can never re-enter the optimum later.
        std::vector<size_t> kept;
        kept.reserve(cands.size() + 1);
        for (size_t ci = 0; ci < cands.size(); ++ci) {
            if (cand_pens[ci] > best_pen && cands[ci] + L <= t) continue;
            kept.push_back(cands[ci]);
        }
        if (t + L <= n) kept.push_back(t);
        cands.swap(kept);
    }
    return detail::build_result(st, n, cost, beta);
}

// At most one change: best single split, accepted only when it undercuts the
// unsplit cost by strictly more than the penalty. `time_map` (window index ->
// window start seconds) stamps the report time when provided.
inline std::optional<changepoint> amoc(std::span<const double> series, cost_model model,
                                       penalty pen, size_t min_seg_len = 2,
                                       channel chan = channel::strain,
                                       std::span<const double> time_map = {}) {
    const size_t n = series.size();
    const size_t L = std::max<size_t>(min_seg_len, 1);
    if (n < 2 * L)
        throw domain_error(errc::series_too_short, "amoc needs at least 2*min_seg_len points");
    const detail::cost_fn cost(series, model);
    const double beta = pen.resolve(model, n);
    const double whole = cost(0, n - 1);

    double best = std::numeric_limits<double>::infinity();
    size_t best_tau = 0;
    for (size_t tau = L - 1; tau + L + 1 <= n; ++tau) {
        double split = cost(0, tau) + cost(tau + 1, n - 1);
        if (split < best) {
            best = split;
            best_tau = tau;
        }
    }
    if (!(whole - best > beta)) return std::nullopt;
    changepoint cp;
    cp.index = best_tau + 1;
    cp.time_s = time_map.empty() ? static_cast<double>(cp.index) : time_map[cp.index];
    cp.chan = chan;
    cp.mean_before = cost.mean(0, best_tau);
    cp.mean_after = cost.mean(best_tau + 1, n - 1);
    cp.direction = cp.mean_before > cp.mean_after ? shift_direction::high_to_low
                                                  : shift_direction::low_to_high;
    return cp;
}

// Tipping-point filter: keep only boundaries that step down in mean after a
// build-up of at least `min_buildup` samples.
inline std::vector<changepoint> high_to_low_filter(const segmentation& seg,
                                                   std::span<const double> series,
                                                   size_t min_buildup,
                                                   std::span<const double> time_map = {},
                                                   channel chan = channel::strain) {
    (void)series;
    std::vector<changepoint> out;
    size_t seg_start = 0;
    for (size_t p = 0; p < seg.changepoint_indices.size(); ++p) {
        size_t last = seg.changepoint_indices[p];
        size_t buildup_len = last - seg_start + 1;
        double before = seg.segment_means[p];
        double after = seg.segment_means[p + 1];
        if (before > after && buildup_len >= min_buildup) {
            changepoint cp;
            cp.index = last + 1;
            cp.time_s = time_map.empty() ? static_cast<double>(cp.index) : time_map[cp.index];
            cp.chan = chan;
            cp.mean_before = before;
            cp.mean_after = after;
            cp.direction = shift_direction::high_to_low;
            out.push_back(cp);
        }
        seg_start = last + 1;
    }
    return out;
}

struct model2_config {
    cost_model model = cost_model::meanvar_normal;
    penalty pen{};
    size_t min_seg_len = 2;
    size_t min_buildup = 4;
};

// Tension-based tipping point predictions: PELT per channel, high-to-low
// filtering, merged in time order.
inline std::vector<changepoint> model2_predict(const tension_series& tension,
                                               const model2_config& cfg = {}) {
    std::vector<changepoint> out;
    const std::pair<channel, const std::vector<double>*> channels[] = {
        {channel::diameter, &tension.diameter},
        {channel::momentum, &tension.momentum},
        {channel::strain, &tension.strain},
    };
    for (const auto& [chan, series] : channels) {
        auto seg = pelt(*series, cfg.model, cfg.pen, cfg.min_seg_len);
        auto cps = high_to_low_filter(seg, *series, cfg.min_buildup, tension.window_times, chan);
        out.insert(out.end(), cps.begin(), cps.end());
    }
    std::stable_sort(out.begin(), out.end(), [](const changepoint& a, const changepoint& b) {
        if (a.time_s != b.time_s) return a.time_s < b.time_s;
        return static_cast<int>(a.chan) < static_cast<int>(b.chan);
    });
    return out;
}

}  // namespace tipping
