#include "ivsum/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <iomanip>

#include "ivsum/common.hpp"

namespace ivsum {

PRF prf(const std::vector<uint8_t>& pred_labels, const std::vector<uint8_t>& gt_labels) {
    if (pred_labels.size() != gt_labels.size())
        throw ValidationError(strcat("prf: label lengths differ (", pred_labels.size(), " vs ",
                                     gt_labels.size(), ")"));
    long overlap = 0, pred_ones = 0, gt_ones = 0;
    for (std::size_t i = 0; i < pred_labels.size(); ++i) {
        pred_ones += pred_labels[i] != 0;
        gt_ones += gt_labels[i] != 0;
        overlap += (pred_labels[i] != 0) && (gt_labels[i] != 0);
    }
    PRF out;
    out.precision = pred_ones > 0 ? double(overlap) / double(pred_ones) : 0.0;
    out.recall = gt_ones > 0 ? double(overlap) / double(gt_ones) : 0.0;
    out.f_score = out.precision + out.recall > 0.0
                      ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                      : 0.0;
    return out;
}

namespace {

bool is_constant(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

// Sum of t*(t-1)/2 over tie groups of a sorted vector.
double tie_pair_count(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double total = 0.0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        const double t = double(j - i);
        total += t * (t - 1.0) / 2.0;
        i = j;
    }
    return total;
}

// Inversions in v, counting strict descents only; merge sort.
double count_inversions(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0.0;
    const std::size_t mid = lo + (hi - lo) / 2;
    double inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
    std::size_t a = lo, b = mid, k = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            inv += double(mid - a);
            tmp[k++] = v[b++];
        } else {
            tmp[k++] = v[a++];
        }
    }
    while (a < mid) tmp[k++] = v[a++];
    while (b < hi) tmp[k++] = v[b++];
    std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
    return inv;
}

}  // namespace

RankCorr kendall_tau(const std::vector<double>& pred_scores, const std::vector<double>& gt_scores) {
    if (pred_scores.size() != gt_scores.size())
        throw ValidationError("kendall_tau: score lengths differ");
    const std::size_t n = pred_scores.size();
    if (n < 2) throw ValidationError("kendall_tau: need at least 2 scores");

    if (is_constant(pred_scores) || is_constant(gt_scores)) return {0.0, true};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pred_scores[a] != pred_scores[b]) return pred_scores[a] < pred_scores[b];
        return gt_scores[a] < gt_scores[b];
    });

    const double n0 = double(n) * double(n - 1) / 2.0;
    const double n1 = tie_pair_count(pred_scores);
    const double n2 = tie_pair_count(gt_scores);

    // joint ties
    double n3 = 0.0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && pred_scores[order[j]] == pred_scores[order[i]] &&
                   gt_scores[order[j]] == gt_scores[order[i]])
                ++j;
            const double t = double(j - i);
            n3 += t * (t - 1.0) / 2.0;
            i = j;
        }
    }

    // After sorting by (pred, gt), every y-inversion pairs strictly increasing
    // pred with strictly decreasing gt: exactly the discordant pairs.
    std::vector<double> y(n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = gt_scores[order[i]];
    const double discordant = count_inversions(y, tmp, 0, n);
    const double concordant = n0 - n1 - n2 + n3 - discordant;

    const double denom = std::sqrt((n0 - n1) * (n0 - n2));
    return {(concordant - discordant) / denom, false};
}

namespace {

std::vector<double> fractional_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        const double rank = (double(i + 1) + double(j)) / 2.0;  // 1-based, tie-averaged
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

}  // namespace

RankCorr spearman_rho(const std::vector<double>& pred_scores, const std::vector<double>& gt_scores) {
    if (pred_scores.size() != gt_scores.size())
        throw ValidationError("spearman_rho: score lengths differ");
    const std::size_t n = pred_scores.size();
    if (n < 2) throw ValidationError("spearman_rho: need at least 2 scores");

    if (is_constant(pred_scores) || is_constant(gt_scores)) return {0.0, true};

    const auto ra = fractional_ranks(pred_scores);
    const auto rb = fractional_ranks(gt_scores);
    const double mean = double(n + 1) / 2.0;  // mean rank is fixed
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    return {cov / std::sqrt(var_a * var_b), false};
}

double step_recall(const std::vector<uint8_t>& pred_labels,
                   const std::vector<FrameInterval>& gt_steps, StepRecallMode mode) {
    if (gt_steps.empty()) throw ValidationError("step_recall: empty ground-truth step list");
    for (const auto& iv : gt_steps)
        if (iv.start < 0 || iv.end > static_cast<long>(pred_labels.size()) || iv.start >= iv.end)
            throw ValidationError(strcat("step_recall: bad interval [", iv.start, ",", iv.end, ")"));

    if (mode == StepRecallMode::count) {
        long covered = 0;
        for (const auto& iv : gt_steps) {
            bool touched = false;
            for (long f = iv.start; f < iv.end && !touched; ++f) touched = pred_labels[f] != 0;
            covered += touched;
        }
        return double(covered) / double(gt_steps.size());
    }

    long overlap = 0, total = 0;
    for (const auto& iv : gt_steps) {
        total += iv.end - iv.start;
        for (long f = iv.start; f < iv.end; ++f) overlap += pred_labels[f] != 0;
    }
    return double(overlap) / double(total);
}

EvalReport evaluate_corpus(const std::vector<ScoreTrack>& pred, const std::vector<ScoreTrack>& gt,
                           const std::map<std::string, std::vector<FrameInterval>>* gt_step_intervals,
                           StepRecallMode recall_mode) {
    std::map<std::string, const ScoreTrack*> pred_by_id, gt_by_id;
    for (const auto& t : pred) pred_by_id[t.video_id] = &t;
    for (const auto& t : gt) gt_by_id[t.video_id] = &t;

    std::vector<std::string> only_pred, only_gt;
    for (const auto& [id, _] : pred_by_id)
        if (!gt_by_id.count(id)) only_pred.push_back(id);
    for (const auto& [id, _] : gt_by_id)
        if (!pred_by_id.count(id)) only_gt.push_back(id);
    if (!only_pred.empty() || !only_gt.empty()) {
        std::string msg = "evaluate_corpus: video id mismatch;";
        if (!only_pred.empty()) {
            msg += " only in predictions:";
            for (const auto& id : only_pred) msg += " " + id;
        }
        if (!only_gt.empty()) {
            msg += " only in ground truth:";
            for (const auto& id : only_gt) msg += " " + id;
        }
        throw ValidationError(msg);
    }
    if (pred_by_id.empty()) throw ValidationError("evaluate_corpus: no videos");

    EvalReport report;
    double sr_sum = 0.0;
    int sr_count = 0;
    for (const auto& [id, p] : pred_by_id) {
        const ScoreTrack* g = gt_by_id[id];
        VideoEval ve;
        ve.video_id = id;
        ve.frames = prf(p->frame_labels, g->frame_labels);

        std::vector<double> ps(p->segment_scores.begin(), p->segment_scores.end());
        std::vector<double> gs(g->segment_scores.begin(), g->segment_scores.end());
        if (ps.size() != gs.size())
            throw ValidationError(strcat("evaluate_corpus: segment counts differ for ", id));
        const auto tau = kendall_tau(ps, gs);
        const auto rho = spearman_rho(ps, gs);
        ve.tau = tau.value;
        ve.rho = rho.value;
        ve.tau_degenerate = tau.degenerate;
        ve.rho_degenerate = rho.degenerate;
        if (tau.degenerate || rho.degenerate) ++report.degenerate_count;

        if (gt_step_intervals) {
            auto it = gt_step_intervals->find(id);
            if (it != gt_step_intervals->end() && !it->second.empty()) {
                ve.step_recall = step_recall(p->frame_labels, it->second, recall_mode);
                sr_sum += *ve.step_recall;
                ++sr_count;
            }
        }
        report.videos.push_back(std::move(ve));
    }

    const double n = double(report.videos.size());
    for (const auto& ve : report.videos) {
        report.mean_precision += ve.frames.precision / n;
        report.mean_recall += ve.frames.recall / n;
        report.mean_f_score += ve.frames.f_score / n;
        report.mean_tau += ve.tau / n;
        report.mean_rho += ve.rho / n;
    }
    if (sr_count > 0) report.mean_step_recall = sr_sum / double(sr_count);
    return report;
}

std::string format_table(const EvalReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(24) << "video" << std::right << std::setw(10) << "prec"
       << std::setw(10) << "recall" << std::setw(10) << "f_score" << std::setw(10) << "tau"
       << std::setw(10) << "rho" << std::setw(12) << "step_rec" << '\n';
    os << std::string(86, '-') << '\n';
    os << std::fixed << std::setprecision(4);
    for (const auto& ve : report.videos) {
        os << std::left << std::setw(24) << ve.video_id << std::right << std::setw(10)
           << ve.frames.precision << std::setw(10) << ve.frames.recall << std::setw(10)
           << ve.frames.f_score << std::setw(10) << ve.tau << std::setw(10) << ve.rho;
        if (ve.step_recall)
            os << std::setw(12) << *ve.step_recall;
        else
            os << std::setw(12) << "-";
        os << '\n';
    }
    os << std::string(86, '-') << '\n';
    os << std::left << std::setw(24) << "mean" << std::right << std::setw(10)
       << report.mean_precision << std::setw(10) << report.mean_recall << std::setw(10)
       << report.mean_f_score << std::setw(10) << report.mean_tau << std::setw(10)
       << report.mean_rho;
    if (report.mean_step_recall)
        os << std::setw(12) << *report.mean_step_recall;
    else
        os << std::setw(12) << "-";
    os << '\n';
    if (report.degenerate_count > 0)
        os << report.degenerate_count << " video(s) with degenerate rank correlation (scored 0)\n";
    return os.str();
}

}  // namespace ivsum
