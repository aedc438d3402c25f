#include "ivsum/step_grouping.hpp"

#include <limits>

#include "ivsum/common.hpp"
#include "ivsum/vec_math.hpp"

namespace ivsum {

MergeMode parse_merge_mode(const std::string& name) {
    if (name == "running_mean") return MergeMode::running_mean;
    if (name == "prev_segment") return MergeMode::prev_segment;
    throw ValidationError(strcat("unknown merge mode: ", name, " (expected running_mean or prev_segment)"));
}

namespace {

std::vector<std::vector<double>> normalized_segments(const EmbeddedVideo& video) {
    std::vector<std::vector<double>> unit(video.segments.size());
    double min_norm = 0.0, max_norm = 0.0;
    for (std::size_t i = 0; i < video.segments.size(); ++i) {
        const double norm = l2_norm(video.segments[i].vec);
        min_norm = i == 0 ? norm : std::min(min_norm, norm);
        max_norm = std::max(max_norm, norm);
        unit[i] = try_normalized(video.segments[i].vec);
        if (unit[i].empty())
            throw ValidationError(strcat("video ", video.video_id, ": segment ", i,
                                         " has zero-norm embedding"));
    }
    log_debug("video ", video.video_id, ": raw segment norms in [", min_norm, ", ", max_norm, "]");
    return unit;
}

std::vector<double> renormalized_mean(const std::vector<std::vector<double>>& members) {
    std::vector<double> mean(members[0].size(), 0.0);
    for (const auto& m : members)
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += m[k];
    for (double& x : mean) x /= double(members.size());
    const double n = l2_norm(mean);
    if (n >= kZeroNormEps)
        for (double& x : mean) x /= n;
    return mean;
}

}  // namespace

std::vector<std::vector<double>> pairwise_similarity(const EmbeddedVideo& video) {
    const auto unit = normalized_segments(video);
    const std::size_t n = unit.size();
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        sim[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) sim[i][j] = sim[j][i] = dot(unit[i], unit[j]);
    }
    return sim;
}

double merge_threshold(const std::vector<std::vector<double>>& sim) {
    const std::size_t n = sim.size();
    if (n < 2) return std::numeric_limits<double>::infinity();
    double max_off = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (sim[i][j] > max_off) max_off = sim[i][j];
    return 0.9 * max_off;
}

std::vector<Step> group_into_steps(const EmbeddedVideo& video, MergeMode mode) {
    const auto unit = normalized_segments(video);
    const double threshold = merge_threshold(pairwise_similarity(video));

    std::vector<Step> steps;
    std::vector<std::vector<double>> members;  // unit vectors of the open step

    auto close_step = [&]() {
        if (members.empty()) return;
        steps.back().vec = renormalized_mean(members);
        members.clear();
    };

    for (std::size_t i = 0; i < unit.size(); ++i) {
        bool merge = false;
        if (!members.empty()) {
            const std::vector<double> ref = mode == MergeMode::running_mean
                                                ? renormalized_mean(members)
                                                : members.back();
            merge = dot(unit[i], ref) > threshold;
        }
        if (!merge) {
            close_step();
            Step s;
            s.step_id = static_cast<int>(steps.size());
            s.video_id = video.video_id;
            steps.push_back(std::move(s));
        }
        steps.back().segment_indices.push_back(static_cast<int>(i));
        members.push_back(unit[i]);
    }
    close_step();
    return steps;
}

}  // namespace ivsum
