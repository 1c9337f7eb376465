#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eecl {

// One evaluation point of a training run.
struct CurvePoint {
    long long step = 0;
    double mean_eval_return = 0.0;
    double cumulative_env_reward = 0.0;
    long long novel_state_count = 0;
    double cumulative_exploration_reward = 0.0;
};

struct LearningCurve {
    std::vector<CurvePoint> points;

    std::vector<long long> steps() const {
        std::vector<long long> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(p.step);
        return out;
    }

    std::vector<double> returns() const {
        std::vector<double> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(p.mean_eval_return);
        return out;
    }
};

// %.17g round-trips doubles exactly, so written curves parse back losslessly.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline constexpr const char* kCurveCsvHeader =
    "step,mean_eval_return,cumulative_env_reward,novel_state_count,cumulative_exploration_reward";

inline void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
    out << kCurveCsvHeader << "\n";
    for (const auto& p : curve.points) {
        out << p.step << ',' << format_double(p.mean_eval_return) << ','
            << format_double(p.cumulative_env_reward) << ',' << p.novel_state_count << ','
            << format_double(p.cumulative_exploration_reward) << "\n";
    }
}

inline void write_curve_csv(const std::string& path, const LearningCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_curve_csv(out, curve);
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline LearningCurve read_curve_csv(std::istream& in, const std::string& what = "curve csv") {
    std::string line;
    if (!std::getline(in, line) || line != kCurveCsvHeader)
        throw std::runtime_error(what + ": missing or unexpected header row");
    LearningCurve curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        CurvePoint p;
        char c1, c2, c3, c4;
        if (!(ls >> p.step >> c1 >> p.mean_eval_return >> c2 >> p.cumulative_env_reward >> c3 >>
              p.novel_state_count >> c4 >> p.cumulative_exploration_reward) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
            throw std::runtime_error(what + ": malformed record '" + line + "'");
        curve.points.push_back(p);
    }
    return curve;
}

inline LearningCurve read_curve_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_curve_csv(in, path);
}

// Centered moving average with the window truncated at the edges; window must
// be odd. A single-point series comes back unchanged.
inline std::vector<double> moving_average(const std::vector<double>& xs, int window = 5) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("moving_average: window must be odd and positive");
    const int n = static_cast<int>(xs.size());
    const int half = window / 2;
    std::vector<double> out(xs.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += xs[j];
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

// First step at which the smoothed series has covered 90% of its total
// improvement (initial -> final); well defined for curves of either sign.
inline long long convergence_step(const std::vector<long long>& steps,
                                  const std::vector<double>& returns, int window = 5) {
    if (steps.empty() || steps.size() != returns.size())
        throw std::invalid_argument("convergence_step: empty or mismatched series");
    const std::vector<double> smooth = moving_average(returns, window);
    const double threshold = smooth.front() + 0.9 * (smooth.back() - smooth.front());
    for (std::size_t i = 0; i < smooth.size(); ++i)
        if (smooth[i] >= threshold) return steps[i];
    return steps.back();
}

}  // namespace eecl
