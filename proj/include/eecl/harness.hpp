#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "eecl/checkpoint.hpp"
#include "eecl/config.hpp"
#include "eecl/curve.hpp"
#include "eecl/envs.hpp"
#include "eecl/td3.hpp"

namespace eecl {

// How the novelty detector participates in a run:
//   off     - no detector at all (plain TD3)
//   passive - detector records states and counts discoveries, but rewards
//             are only logged, never added to stored transitions (used for
//             the baseline arm of a comparison)
//   active  - bonuses are added to the stored rewards
enum class NoveltyMode { off, passive, active };

namespace harness_detail {

// Stream tags for deriving independent generators from one master seed.
inline constexpr std::uint64_t kAgentStream = 0x61;
inline constexpr std::uint64_t kActionStream = 0x62;
inline constexpr std::uint64_t kEpisodeStream = 0x63;
inline constexpr std::uint64_t kEvalStream = 0x64;

inline std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode) {
    return mix_seed(mix_seed(seed, kEpisodeStream), episode);
}

}  // namespace harness_detail

struct RunArtifacts {
    std::string curve_csv;   // empty = don't write
    std::string checkpoint;  // empty = don't write
};

// One seeded training run: T environment steps with periodic deterministic
// evaluations. Fully deterministic per (config, seed, mode).
inline LearningCurve run_training(const RunConfig& config, std::uint64_t seed, NoveltyMode mode,
                                  const RunArtifacts& artifacts = {}) {
    using namespace harness_detail;
    config.validate();

    auto env = make_env(config.env);
    auto eval_env = make_env(config.env);
    const EnvSpec& spec = env->spec();

    Td3Config tcfg = config.td3;
    tcfg.state_dim = spec.state_dim;
    tcfg.action_dim = spec.action_dim;
    tcfg.action_bound = spec.action_bound;
    Td3Agent agent(tcfg, mix_seed(seed, kAgentStream));

    std::optional<NoveltyDetector> detector;
    if (mode != NoveltyMode::off) {
        if (!config.novelty)
            throw ConfigError("config: this run needs an eecl section (novelty config absent)");
        NoveltyConfig nc = *config.novelty;
        nc.state_dim = spec.state_dim;
        detector.emplace(nc);
    }

    Rng action_rng(mix_seed(seed, kActionStream));
    std::uint64_t episode = 0;
    env->reset(episode_seed(seed, episode));

    LearningCurve curve;
    double cumulative_env_reward = 0.0;
    const auto record = [&](long long step) {
        Rng eval_rng(mix_seed(seed, kEvalStream));
        const double ret = evaluate(agent, *eval_env, config.eval_episodes, eval_rng);
        curve.points.push_back({step, ret, cumulative_env_reward,
                                detector ? detector->novel_count() : 0,
                                detector ? detector->cumulative_exploration_reward() : 0.0});
    };

    record(0);
    for (long long t = 1; t <= tcfg.total_steps; ++t) {
        const StepReport report =
            agent.step(*env, detector ? &*detector : nullptr, mode == NoveltyMode::active, action_rng);
        cumulative_env_reward += report.env_reward;
        if (report.done) env->reset(episode_seed(seed, ++episode));
        if (t % config.eval_every == 0 || t == tcfg.total_steps) record(t);
    }

    if (!artifacts.curve_csv.empty()) write_curve_csv(artifacts.curve_csv, curve);
    if (!artifacts.checkpoint.empty())
        save_checkpoint(artifacts.checkpoint, config.env, agent, detector ? &*detector : nullptr);
    return curve;
}

// Mode picked from the config: EECL when an eecl section is present, plain
// TD3 otherwise. Writes the curve and a final checkpoint under out_dir.
inline LearningCurve run_training(const RunConfig& config, std::uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    RunArtifacts artifacts{
        (fs::path(config.out_dir) / ("curve_seed" + std::to_string(seed) + ".csv")).string(),
        (fs::path(config.out_dir) / ("checkpoint_seed" + std::to_string(seed) + ".ckpt")).string()};
    return run_training(config, seed,
                        config.novelty ? NoveltyMode::active : NoveltyMode::off, artifacts);
}

struct ComparisonReport {
    std::vector<std::uint64_t> seeds;
    std::vector<LearningCurve> eecl_curves;      // one per seed
    std::vector<LearningCurve> baseline_curves;  // one per seed, passive detector

    // aggregates over seeds, per evaluation step
    std::vector<long long> steps;
    std::vector<double> mean_eecl, halfstd_eecl, mean_base, halfstd_base;

    // per-seed summary
    std::vector<double> final_eecl, final_base;
    std::vector<long long> novel_eecl, novel_base;
    std::vector<long long> convergence_eecl, convergence_base;

    double final_median_eecl = 0.0;
    double final_median_base = 0.0;
    int eecl_final_wins = 0;       // seeds where EECL's final return is strictly greater
    int eecl_faster_seeds = 0;     // seeds where EECL reaches 90% improvement no later
    long long total_novel_eecl = 0;
    long long total_novel_base = 0;
};

namespace harness_detail {

inline double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double sample_std(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

// Runs jobs 0..n-1 on up to hardware_concurrency workers; rethrows the first
// failure after all workers join.
template <typename Fn>
void parallel_for_jobs(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(
        1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace harness_detail

// The full EECL-versus-baseline protocol: for every seed, one EECL run and
// one baseline run built from the identical seed (identical initial networks,
// identical episode seeds, shared warmup action stream), so per-seed
// differences are attributable to the bonus alone. The baseline arm carries a
// passive detector so both arms report novel-state discovery rates. Seeds run
// concurrently; aggregation happens after all runs complete.
inline ComparisonReport run_comparison(const RunConfig& config) {
    namespace fs = std::filesystem;
    config.validate();
    if (!config.novelty) throw ConfigError("config: compare needs an eecl section");
    fs::create_directories(config.out_dir);

    ComparisonReport report;
    report.seeds = config.seeds;
    const std::size_t n_seeds = config.seeds.size();
    report.eecl_curves.resize(n_seeds);
    report.baseline_curves.resize(n_seeds);

    harness_detail::parallel_for_jobs(2 * n_seeds, [&](std::size_t job) {
        const std::size_t k = job / 2;
        const bool eecl_arm = (job % 2) == 0;
        const std::uint64_t seed = config.seeds[k];
        RunArtifacts artifacts;
        artifacts.curve_csv =
            (fs::path(config.out_dir) /
             ((eecl_arm ? "eecl_seed" : "baseline_seed") + std::to_string(seed) + ".csv"))
                .string();
        LearningCurve curve = run_training(
            config, seed, eecl_arm ? NoveltyMode::active : NoveltyMode::passive, artifacts);
        (eecl_arm ? report.eecl_curves : report.baseline_curves)[k] = std::move(curve);
    });

    // All runs share T and eval cadence, so the step grids must agree.
    report.steps = report.eecl_curves.front().steps();
    for (const auto& c : report.eecl_curves)
        if (c.steps() != report.steps) throw std::logic_error("comparison: mismatched step grids");
    for (const auto& c : report.baseline_curves)
        if (c.steps() != report.steps) throw std::logic_error("comparison: mismatched step grids");

    const std::size_t n_points = report.steps.size();
    for (std::size_t i = 0; i < n_points; ++i) {
        std::vector<double> e, b;
        for (std::size_t k = 0; k < n_seeds; ++k) {
            e.push_back(report.eecl_curves[k].points[i].mean_eval_return);
            b.push_back(report.baseline_curves[k].points[i].mean_eval_return);
        }
        double esum = 0, bsum = 0;
        for (double x : e) esum += x;
        for (double x : b) bsum += x;
        report.mean_eecl.push_back(esum / static_cast<double>(n_seeds));
        report.mean_base.push_back(bsum / static_cast<double>(n_seeds));
        report.halfstd_eecl.push_back(0.5 * harness_detail::sample_std(e));
        report.halfstd_base.push_back(0.5 * harness_detail::sample_std(b));
    }

    for (std::size_t k = 0; k < n_seeds; ++k) {
        const auto& ec = report.eecl_curves[k];
        const auto& bc = report.baseline_curves[k];
        report.final_eecl.push_back(ec.points.back().mean_eval_return);
        report.final_base.push_back(bc.points.back().mean_eval_return);
        report.novel_eecl.push_back(ec.points.back().novel_state_count);
        report.novel_base.push_back(bc.points.back().novel_state_count);
        report.convergence_eecl.push_back(convergence_step(ec.steps(), ec.returns()));
        report.convergence_base.push_back(convergence_step(bc.steps(), bc.returns()));
        if (report.final_eecl.back() > report.final_base.back()) ++report.eecl_final_wins;
        if (report.convergence_eecl.back() <= report.convergence_base.back())
            ++report.eecl_faster_seeds;
        report.total_novel_eecl += report.novel_eecl.back();
        report.total_novel_base += report.novel_base.back();
    }
    report.final_median_eecl = harness_detail::median(report.final_eecl);
    report.final_median_base = harness_detail::median(report.final_base);
    return report;
}

inline constexpr const char* kComparisonCsvHeader =
    "step,mean_eecl,halfstd_eecl,mean_base,halfstd_base";

inline void write_comparison_csv(const std::string& path, const ComparisonReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << kComparisonCsvHeader << "\n";
    for (std::size_t i = 0; i < report.steps.size(); ++i)
        out << report.steps[i] << ',' << format_double(report.mean_eecl[i]) << ','
            << format_double(report.halfstd_eecl[i]) << ',' << format_double(report.mean_base[i])
            << ',' << format_double(report.halfstd_base[i]) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_summary_json(const std::string& path, const ComparisonReport& report) {
    nlohmann::json j;
    j["seeds"] = report.seeds;
    j["final_return"] = {{"eecl", report.final_eecl},
                         {"baseline", report.final_base},
                         {"median_eecl", report.final_median_eecl},
                         {"median_baseline", report.final_median_base},
                         {"eecl_wins", report.eecl_final_wins}};
    j["novel_states"] = {{"eecl", report.novel_eecl},
                         {"baseline", report.novel_base},
                         {"total_eecl", report.total_novel_eecl},
                         {"total_baseline", report.total_novel_base}};
    j["convergence_step"] = {{"eecl", report.convergence_eecl},
                             {"baseline", report.convergence_base},
                             {"eecl_faster_seeds", report.eecl_faster_seeds}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Writes a self-contained matplotlib script that renders the comparison CSV:
// both arms' mean curves under a width-5 centered moving average, with shaded
// half-standard-deviation bands.
inline void emit_plot(const std::string& comparison_csv, const std::string& script_path) {
    std::ofstream out(script_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + script_path);
    out << "#!/usr/bin/env python3\n"
           "\"\"\"Render learning curves from a comparison CSV.\n"
           "\n"
           "Columns: step,mean_eecl,halfstd_eecl,mean_base,halfstd_base.\n"
           "Means and band edges are smoothed with a centered moving average\n"
           "(window 5, truncated at the edges).\n"
           "\"\"\"\n"
           "import argparse\n"
           "import csv\n"
           "\n"
           "import matplotlib\n"
           "matplotlib.use(\"Agg\")\n"
           "import matplotlib.pyplot as plt\n"
           "\n"
           "WINDOW = 5\n"
           "\n"
           "\n"
           "def smooth(xs, window=WINDOW):\n"
           "    half = window // 2\n"
           "    out = []\n"
           "    for i in range(len(xs)):\n"
           "        lo = max(0, i - half)\n"
           "        hi = min(len(xs) - 1, i + half)\n"
           "        out.append(sum(xs[lo:hi + 1]) / (hi - lo + 1))\n"
           "    return out\n"
           "\n"
           "\n"
           "def main():\n"
           "    parser = argparse.ArgumentParser(description=__doc__)\n"
           "    parser.add_argument(\"csv\", nargs=\"?\", default="
        << nlohmann::json(comparison_csv).dump()
        << ")\n"
           "    parser.add_argument(\"--out\", default=\"comparison.png\")\n"
           "    args = parser.parse_args()\n"
           "\n"
           "    rows = list(csv.DictReader(open(args.csv, newline=\"\")))\n"
           "    steps = [int(r[\"step\"]) for r in rows]\n"
           "    curves = {k: [float(r[k]) for r in rows]\n"
           "              for k in (\"mean_eecl\", \"halfstd_eecl\", \"mean_base\", \"halfstd_base\")}\n"
           "\n"
           "    fig, ax = plt.subplots(figsize=(7, 4.5))\n"
           "    for mean_key, half_key, label, color in (\n"
           "            (\"mean_eecl\", \"halfstd_eecl\", \"EECL-TD3\", \"tab:blue\"),\n"
           "            (\"mean_base\", \"halfstd_base\", \"TD3\", \"tab:orange\")):\n"
           "        mean = smooth(curves[mean_key])\n"
           "        lo = smooth([m - h for m, h in zip(curves[mean_key], curves[half_key])])\n"
           "        hi = smooth([m + h for m, h in zip(curves[mean_key], curves[half_key])])\n"
           "        ax.plot(steps, mean, label=label, color=color)\n"
           "        ax.fill_between(steps, lo, hi, color=color, alpha=0.2, linewidth=0)\n"
           "    ax.set_xlabel(\"environment steps\")\n"
           "    ax.set_ylabel(\"evaluation return\")\n"
           "    ax.legend()\n"
           "    ax.grid(True, alpha=0.3)\n"
           "    fig.tight_layout()\n"
           "    fig.savefig(args.out, dpi=150)\n"
           "    print(f\"wrote {args.out}\")\n"
           "\n"
           "\n"
           "if __name__ == \"__main__\":\n"
           "    main()\n";
    if (!out) throw std::runtime_error("write failed: " + script_path);
}

}  // namespace eecl
