// Command-line harness: train, evaluate, and compare EECL-TD3 against
// baseline TD3 on the built-in environments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eecl/checkpoint.hpp"
#include "eecl/config.hpp"
#include "eecl/harness.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
    std::string config_path;
    std::string env;
    std::string seeds_csv;
    long long steps = -1;
    bool no_eecl = false;
    std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_seeds) {
    cmd->add_option("--config", flags.config_path, "configuration file (key = value lines)");
    cmd->add_option("--env", flags.env, "environment name: pointmass or armlift");
    if (with_seeds) cmd->add_option("--seeds", flags.seeds_csv, "comma-separated seed list");
    cmd->add_option("--steps", flags.steps, "total environment steps T");
    cmd->add_flag("--no-eecl", flags.no_eecl, "disable the novelty module (baseline TD3)");
    cmd->add_option("--out", flags.out_dir, "output directory");
}

// File (when given) first, then flag overrides. Without a config file the
// novelty module defaults to on; --no-eecl always wins.
eecl::RunConfig assemble_config(const CommonFlags& flags, bool default_eecl_on) {
    eecl::RunConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = eecl::load_config(flags.config_path);
    } else if (default_eecl_on) {
        cfg.novelty = eecl::NoveltyConfig{};
    }
    if (!flags.env.empty()) cfg.env = flags.env;
    if (!flags.seeds_csv.empty()) cfg.seeds = eecl::detail::parse_seed_list("--seeds", flags.seeds_csv, 0);
    if (flags.steps >= 0) cfg.td3.total_steps = flags.steps;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.no_eecl) cfg.novelty.reset();
    try {
        eecl::make_env(cfg.env);
    } catch (const std::invalid_argument& e) {
        throw eecl::ConfigError(e.what());
    }
    cfg.validate();
    return cfg;
}

int cmd_train(const CommonFlags& flags, std::optional<std::uint64_t> seed_flag) {
    eecl::RunConfig cfg = assemble_config(flags, /*default_eecl_on=*/true);
    const std::uint64_t seed = seed_flag.value_or(cfg.seeds.front());
    std::printf("training %s on %s, seed %llu, T=%lld\n",
                cfg.novelty ? "EECL-TD3" : "baseline TD3", cfg.env.c_str(),
                static_cast<unsigned long long>(seed),
                static_cast<long long>(cfg.td3.total_steps));
    const eecl::LearningCurve curve = eecl::run_training(cfg, seed);
    const auto& last = curve.points.back();
    std::printf("final evaluation return: %.6f\n", last.mean_eval_return);
    if (cfg.novelty)
        std::printf("novel states: %lld, cumulative exploration reward: %.6f\n",
                    static_cast<long long>(last.novel_state_count),
                    last.cumulative_exploration_reward);
    std::printf("curve: %s\n", (fs::path(cfg.out_dir) / ("curve_seed" + std::to_string(seed) + ".csv")).c_str());
    std::printf("checkpoint: %s\n",
                (fs::path(cfg.out_dir) / ("checkpoint_seed" + std::to_string(seed) + ".ckpt")).c_str());
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& env_override, int episodes,
             std::uint64_t seed) {
    eecl::LoadedCheckpoint loaded = eecl::load_checkpoint(checkpoint_path);
    const std::string env_name = env_override.empty() ? loaded.env_name : env_override;
    auto env = [&] {
        try {
            return eecl::make_env(env_name);
        } catch (const std::invalid_argument& e) {
            throw eecl::ConfigError(e.what());
        }
    }();
    eecl::Rng rng(eecl::mix_seed(seed, eecl::harness_detail::kEvalStream));
    const double mean_return = eecl::evaluate(loaded.agent, *env, episodes, rng);
    std::printf("mean return over %d episodes on %s: %.6f\n", episodes, env_name.c_str(), mean_return);
    return 0;
}

int cmd_compare(const CommonFlags& flags) {
    if (flags.no_eecl) throw eecl::ConfigError("compare runs both arms; --no-eecl makes no sense here");
    eecl::RunConfig cfg = assemble_config(flags, /*default_eecl_on=*/true);
    if (!cfg.novelty) cfg.novelty = eecl::NoveltyConfig{};
    std::printf("comparing EECL-TD3 vs TD3 on %s, %zu seeds, T=%lld\n", cfg.env.c_str(),
                cfg.seeds.size(), static_cast<long long>(cfg.td3.total_steps));
    const eecl::ComparisonReport report = eecl::run_comparison(cfg);

    const std::string csv = (fs::path(cfg.out_dir) / "comparison.csv").string();
    const std::string summary = (fs::path(cfg.out_dir) / "summary.json").string();
    const std::string script = (fs::path(cfg.out_dir) / "plot.py").string();
    eecl::write_comparison_csv(csv, report);
    eecl::write_summary_json(summary, report);
    eecl::emit_plot(csv, script);

    std::printf("final return median: EECL %.6f vs baseline %.6f (EECL wins %d/%zu seeds)\n",
                report.final_median_eecl, report.final_median_base, report.eecl_final_wins,
                report.seeds.size());
    std::printf("novel states: EECL %lld vs baseline %lld\n",
                static_cast<long long>(report.total_novel_eecl),
                static_cast<long long>(report.total_novel_base));
    std::printf("EECL converges no later in %d/%zu seeds\n", report.eecl_faster_seeds,
                report.seeds.size());
    std::printf("wrote %s, %s, %s\n", csv.c_str(), summary.c_str(), script.c_str());
    return 0;
}

int cmd_plot(const std::string& csv_path, const std::string& out_dir) {
    if (!fs::exists(csv_path)) throw eecl::ConfigError("no such comparison CSV: " + csv_path);
    fs::create_directories(out_dir);
    const std::string script = (fs::path(out_dir) / "plot.py").string();
    eecl::emit_plot(csv_path, script);
    std::printf("wrote %s (run: python3 %s)\n", script.c_str(), script.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TD3 with an exploration-bonus novelty module (EECL) on desk-scale control tasks"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    std::optional<std::uint64_t> train_seed;
    auto* train = app.add_subcommand("train", "train one agent and write curve + checkpoint");
    add_common_flags(train, train_flags, /*with_seeds=*/true);
    train->add_option("--seed", train_seed, "seed for this run (default: first config seed)");

    std::string eval_checkpoint, eval_env;
    int eval_episodes = 10;
    std::uint64_t eval_seed = 0;
    auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint's deterministic policy");
    evalc->add_option("checkpoint", eval_checkpoint, "checkpoint file")->required();
    evalc->add_option("--env", eval_env, "environment override (default: from checkpoint)");
    evalc->add_option("--episodes", eval_episodes, "evaluation episodes");
    evalc->add_option("--seed", eval_seed, "evaluation seed");

    CommonFlags compare_flags;
    auto* compare = app.add_subcommand("compare", "paired EECL vs baseline comparison across seeds");
    add_common_flags(compare, compare_flags, /*with_seeds=*/true);

    std::string plot_csv, plot_out = ".";
    auto* plot = app.add_subcommand("plot", "write a plotting script for a comparison CSV");
    plot->add_option("csv", plot_csv, "comparison CSV file")->required();
    plot->add_option("--out", plot_out, "output directory for plot.py");

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(train_flags, train_seed);
        if (evalc->parsed()) return cmd_eval(eval_checkpoint, eval_env, eval_episodes, eval_seed);
        if (compare->parsed()) return cmd_compare(compare_flags);
        if (plot->parsed()) return cmd_plot(plot_csv, plot_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const eecl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
